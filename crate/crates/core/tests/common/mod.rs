//! Shared fixtures for integration tests.
// each test binary compiles its own copy and uses a subset
#![allow(dead_code)]

pub mod lp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tabsynth::schema::{Cell, ColumnSpec, RawTable, TableSchema};
use tabsynth::synthesis::{NetOverrides, TrainConfig};

/// Three-column fixture: `a` is bimodal at +-5, `b` tracks `a` linearly with
/// noise, and the binary target is the sign of `a`.
pub fn toy_table(n: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let schema = toy_schema();
    let rows = (0..n)
        .map(|_| {
            let mode = if rng.random::<f64>() < 0.5 { -5.0 } else { 5.0 };
            let a: f64 = mode + unit.sample(&mut rng);
            let b = 0.8 * a + unit.sample(&mut rng);
            let label = if a >= 0.0 { "pos" } else { "neg" };
            vec![
                Cell::Number(a),
                Cell::Number(b),
                Cell::Category(label.into()),
            ]
        })
        .collect();
    RawTable::new(schema, rows).unwrap()
}

pub fn toy_schema() -> TableSchema {
    TableSchema::new(
        vec![
            ColumnSpec::continuous("a"),
            ColumnSpec::continuous("b"),
            ColumnSpec::categorical("y", vec!["neg".into(), "pos".into()]),
        ],
        "y",
    )
    .unwrap()
}

/// Small network sizes and a short schedule for fast mechanical tests.
pub fn tiny_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        ae_epochs: 40,
        gan_epochs: 15,
        pretrain_epochs: 40,
        batch_size: 128,
        learning_rate: 1e-3,
        n_critic: 2,
        net: NetOverrides {
            latent_len: Some(16),
            noise_len: Some(32),
            gen_hidden: Some(64),
            disc_hidden: Some(64),
            clf_hidden: Some(64),
        },
        seed,
        ..TrainConfig::default()
    }
}

/// Uniform sampler over a column's observed range; the baseline synthetic
/// data quality in end-to-end checks.
pub fn uniform_baseline(values: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
