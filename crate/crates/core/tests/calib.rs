//! Temporary calibration runs (deleted before release).

mod common;

use common::{toy_table, uniform_baseline};
use tabsynth::association::{association_matrix, dif_corr};
use tabsynth::encoding::EncodingMode;
use tabsynth::evaluation::{ml_utility_diff, wd_continuous};
use tabsynth::schema::{split, Cell};
use tabsynth::synthesis::{synthesize, NetOverrides, SynthModel, TrainConfig};

#[test]
#[ignore]
fn calib_toy_quality() {
    let table = toy_table(2000, 4242);

    for (label, ae_ep, gan_ep, hidden, lr) in [
        ("lean", 100, 80, 64, 2e-4),
        ("lean-long", 150, 150, 64, 2e-4),
    ] {
        let mut pass = 0;
        let t = std::time::Instant::now();
        for seed in [11u64, 22, 33] {
            let t_seed = std::time::Instant::now();
            let cfg = TrainConfig {
                ae_epochs: ae_ep,
                gan_epochs: gan_ep,
                learning_rate: lr,
                net: NetOverrides {
                    gen_hidden: Some(hidden),
                    disc_hidden: Some(hidden),
                    clf_hidden: Some(hidden),
                    noise_len: Some(64),
                    ..Default::default()
                },
                seed,
                ..TrainConfig::default()
            };
            let model = SynthModel::fit(&table, EncodingMode::Full, &cfg).unwrap();
            let synth = synthesize(&model, table.n_rows(), seed + 1).unwrap();

            let real_a = table.numeric_column(0);
            let synth_a = synth.numeric_column(0);
            let uniform = uniform_baseline(&real_a, real_a.len(), seed + 2);
            let wd_synth = wd_continuous(&real_a, &synth_a).unwrap();
            let wd_uniform = wd_continuous(&real_a, &uniform).unwrap();

            let real_assoc = association_matrix(&table).unwrap();
            let synth_assoc = association_matrix(&synth).unwrap();
            let dc_synth = dif_corr(&real_assoc, &synth_assoc).unwrap();

            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 3);
            let n = table.n_rows();
            let resampled_rows: Vec<Vec<Cell>> = (0..n)
                .map(|_| {
                    (0..table.n_columns())
                        .map(|c| table.rows[rng.random_range(0..n)][c].clone())
                        .collect()
                })
                .collect();
            let resampled =
                tabsynth::schema::RawTable::new(table.schema.clone(), resampled_rows).unwrap();
            let dc_resampled =
                dif_corr(&real_assoc, &association_matrix(&resampled).unwrap()).unwrap();

            let (train, test) = split(&table, 0.2, seed + 4).unwrap();
            let synth_train = tabsynth::schema::RawTable {
                schema: synth.schema.clone(),
                rows: synth.rows[..train.n_rows()].to_vec(),
            };
            let utility = ml_utility_diff(&train, &test, &synth_train, seed + 5).unwrap();

            let a = wd_synth < 0.5 * wd_uniform;
            let b = dc_synth < dc_resampled;
            let c = utility.utility_diff.map(|d| d < 0.15).unwrap_or(false);
            if a && b && c {
                pass += 1;
            }
            eprintln!(
                "CALIB {label} seed={seed}: wd {wd_synth:.3} vs unif/2 {:.3} [{a}] | dc {dc_synth:.3} vs {dc_resampled:.3} [{b}] | util {:?} [{c}] | {:?}",
                0.5 * wd_uniform,
                utility.utility_diff,
                t_seed.elapsed()
            );
        }
        eprintln!("CALIB {label}: {pass}/3 pass, total {:?}", t.elapsed());
    }
}
