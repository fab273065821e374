//! Training-behavior tests for the synthesizer: convergence, determinism,
//! freezing guarantees, and checkpoint round-trips.

mod common;

use common::{tiny_cfg, toy_table};
use tabsynth::encoding::{fit_encoder, EncodingMode};
use tabsynth::schema::{Cell, ColumnKind};
use tabsynth::synthesis::{
    synthesize, train_autoencoder, train_gan, train_joint, NetSpec, SynthModel, TrainConfig,
};

#[test]
fn overcomplete_autoencoder_reconstructs() {
    // two columns, latent as wide as the input: reconstruction should get
    // very good
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let schema = tabsynth::schema::TableSchema::new(
        vec![
            tabsynth::schema::ColumnSpec::continuous("x"),
            tabsynth::schema::ColumnSpec::categorical("y", vec!["a".into(), "b".into()]),
        ],
        "y",
    )
    .unwrap();
    let rows = (0..600)
        .map(|_| {
            vec![
                Cell::Number(rng.random_range(-2.0..2.0)),
                Cell::Category(if rng.random::<f64>() < 0.5 { "a" } else { "b" }.into()),
            ]
        })
        .collect();
    let table = tabsynth::schema::RawTable::new(schema, rows).unwrap();

    let cfg = TrainConfig {
        ae_epochs: 800,
        learning_rate: 1e-3,
        batch_size: 128,
        seed: 5,
        net: tabsynth::synthesis::NetOverrides {
            latent_len: Some(2),
            ..Default::default()
        },
        ..TrainConfig::default()
    };
    let state = fit_encoder(&table, EncodingMode::Plain, cfg.max_modes, 0).unwrap();
    assert_eq!(state.total_width, 2);
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);
    let (_, _, history) = train_autoencoder(&encoded, &spec, &cfg).unwrap();
    let last = *history.last().unwrap();
    assert!(last < 1e-3, "final reconstruction loss {last}");
}

#[test]
fn autoencoder_training_progresses_and_is_deterministic() {
    let table = toy_table(500, 2);
    let mut cfg = tiny_cfg(7);
    cfg.ae_epochs = 50;
    cfg.patience = 1000; // disable early stop so epoch 50 exists
    let state = fit_encoder(&table, EncodingMode::Full, cfg.max_modes, 0).unwrap();
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);

    let (_, _, h1) = train_autoencoder(&encoded, &spec, &cfg).unwrap();
    assert!(h1[49] <= h1[0], "loss went up: {} -> {}", h1[0], h1[49]);

    let (_, _, h2) = train_autoencoder(&encoded, &spec, &cfg).unwrap();
    assert_eq!(h1, h2, "same seed must give identical history");
}

#[test]
fn gan_narrows_validity_gap_on_toy_data() {
    let table = toy_table(800, 3);
    let mut cfg = tiny_cfg(11);
    cfg.gan_epochs = 100;
    cfg.learning_rate = 1e-4;
    cfg.n_critic = 5;
    cfg.ae_epochs = 100;
    let state = fit_encoder(&table, EncodingMode::Full, cfg.max_modes, 0).unwrap();
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);
    let (enc, dec, _) = train_autoencoder(&encoded, &spec, &cfg).unwrap();
    let model = train_gan(&encoded, &state, enc, dec, &spec, &cfg).unwrap();

    // the critic dominates early (gap peaks), then the generator catches up
    let gap = &model.history.validity_gap;
    let last = *gap.last().unwrap();
    let peak = gap.iter().cloned().fold(0.0, f64::max);
    assert!(
        last < 0.5 * peak,
        "validity gap did not shrink: peak {peak}, final {last}"
    );
    assert!(model.history.d_loss.iter().all(|l| l.is_finite()));
}

#[test]
fn disjoint_training_freezes_autoencoder() {
    let table = toy_table(400, 4);
    let cfg = tiny_cfg(13);
    let state = fit_encoder(&table, EncodingMode::Full, cfg.max_modes, 0).unwrap();
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);
    let (enc, dec, _) = train_autoencoder(&encoded, &spec, &cfg).unwrap();
    let enc_sum = enc.param_checksum();
    let dec_sum = dec.param_checksum();

    let model = train_gan(&encoded, &state, enc, dec, &spec, &cfg).unwrap();
    assert_eq!(model.enc.param_checksum(), enc_sum);
    assert_eq!(model.dec.param_checksum(), dec_sum);
}

#[test]
fn joint_training_updates_autoencoder_and_logs_its_loss() {
    let table = toy_table(400, 5);
    let mut cfg = tiny_cfg(17);
    cfg.joint = true;
    cfg.pretrain_epochs = 10;
    cfg.gan_epochs = 5;
    let state = fit_encoder(&table, EncodingMode::Full, cfg.max_modes, 0).unwrap();
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);

    let pre = train_autoencoder(
        &encoded,
        &spec,
        &TrainConfig {
            ae_epochs: cfg.pretrain_epochs,
            ..cfg.clone()
        },
    )
    .unwrap();
    let model = train_joint(&encoded, &state, &spec, &cfg).unwrap();
    // co-training kept appending reconstruction losses after pre-training
    assert_eq!(model.history.ae_loss.len(), pre.2.len() + cfg.gan_epochs);
    // and the autoencoder moved
    assert_ne!(model.enc.param_checksum(), pre.0.param_checksum());
}

#[test]
fn joint_with_zero_gan_epochs_equals_disjoint_pretraining() {
    let table = toy_table(300, 6);
    let mut cfg = tiny_cfg(19);
    cfg.joint = true;
    cfg.pretrain_epochs = 12;
    cfg.gan_epochs = 0;
    let state = fit_encoder(&table, EncodingMode::Full, cfg.max_modes, 0).unwrap();
    let encoded = state.encode_table(&table).unwrap();
    let spec = NetSpec::for_encoder(&state, &cfg.net);

    let model = train_joint(&encoded, &state, &spec, &cfg).unwrap();
    let (enc, dec, _) = train_autoencoder(
        &encoded,
        &spec,
        &TrainConfig {
            ae_epochs: 12,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(model.enc, enc);
    assert_eq!(model.dec, dec);
}

#[test]
fn default_config_is_disjoint() {
    assert!(!TrainConfig::default().joint);
}

#[test]
fn synthesis_is_schema_conformant_and_deterministic() {
    let table = toy_table(500, 7);
    let cfg = tiny_cfg(23);
    let model = SynthModel::fit(&table, EncodingMode::Full, &cfg).unwrap();

    let synth = synthesize(&model, 100, 99).unwrap();
    assert_eq!(synth.n_rows(), 100);
    assert_eq!(synth.schema, table.schema);
    for row in &synth.rows {
        match (&row[0], &row[1], &row[2]) {
            (Cell::Number(a), Cell::Number(b), Cell::Category(y)) => {
                assert!(a.is_finite() && b.is_finite());
                assert!(y == "neg" || y == "pos");
            }
            other => panic!("malformed row {other:?}"),
        }
    }

    let again = synthesize(&model, 100, 99).unwrap();
    assert_eq!(synth, again);
    let different = synthesize(&model, 100, 100).unwrap();
    assert_ne!(synth, different);

    assert!(matches!(
        synthesize(&model, 0, 1),
        Err(tabsynth::Error::ZeroSampleCount)
    ));
}

#[test]
fn synthesized_continuous_cells_stay_within_mode_reach() {
    let table = toy_table(500, 8);
    let cfg = tiny_cfg(29);
    let model = SynthModel::fit(&table, EncodingMode::Full, &cfg).unwrap();
    let synth = synthesize(&model, 300, 17).unwrap();

    for (c, col) in synth.schema.columns.iter().enumerate() {
        if col.kind != ColumnKind::Continuous {
            continue;
        }
        let transform = &model.state.transforms[c];
        let gmm = match transform {
            tabsynth::encoding::ColumnTransform::ModeSpecific { gmm } => gmm,
            other => panic!("expected mode-specific transform, got {other:?}"),
        };
        for value in synth.numeric_column(c) {
            let reachable = (0..gmm.active_modes()).any(|k| {
                (value - gmm.means[k]).abs() <= 4.0 * gmm.stds[k] + 1e-9
            });
            assert!(reachable, "value {value} outside all mode ranges");
        }
    }
}

#[test]
fn checkpoint_round_trip() {
    let table = toy_table(300, 9);
    let cfg = tiny_cfg(31);
    let model = SynthModel::fit(&table, EncodingMode::Full, &cfg).unwrap();

    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    let loaded = SynthModel::load(dir.path()).unwrap();

    assert_eq!(loaded.spec, model.spec);
    assert_eq!(loaded.state, model.state);
    assert_eq!(loaded.history, model.history);
    assert!(loaded.clf.is_some());

    // tensors pass through f32; saving the loaded model again is stable
    let dir2 = tempfile::tempdir().unwrap();
    loaded.save(dir2.path()).unwrap();
    for name in ["enc.bin", "dec.bin", "gen.bin", "disc.bin", "clf.bin"] {
        let a = std::fs::read(dir.path().join(name)).unwrap();
        let b = std::fs::read(dir2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} changed across save/load/save");
    }

    // a loaded model synthesizes deterministically
    let s1 = synthesize(&loaded, 50, 3).unwrap();
    let s2 = synthesize(&SynthModel::load(dir.path()).unwrap(), 50, 3).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn no_classifier_ablation_trains_without_classifier() {
    let table = toy_table(300, 10);
    let mut cfg = tiny_cfg(37);
    cfg.classifier_enabled = false;
    let model = SynthModel::fit(&table, EncodingMode::Full, &cfg).unwrap();
    assert!(model.clf.is_none());
    assert!(model.history.c_loss.iter().all(|&c| c == 0.0));

    let dir = tempfile::tempdir().unwrap();
    model.save(dir.path()).unwrap();
    assert!(!dir.path().join("clf.bin").exists());
    let loaded = SynthModel::load(dir.path()).unwrap();
    assert!(loaded.clf.is_none());
}
