//! The latent-space tabular synthesizer.
//!
//! Encoded rows are compressed by an autoencoder; an adversarial pair
//! (generator and critic with gradient penalty) then learns the latent
//! distribution, while an auxiliary classifier ties the generator's output
//! to the target column of decoded rows. Default training is disjoint: the
//! autoencoder first, then the adversarial phase with the autoencoder
//! frozen. Joint co-training is available for ablations.

mod checkpoint;
pub mod losses;
pub mod nn;
pub mod steps;

pub use checkpoint::CHECKPOINT_VERSION;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::encoding::{fit_encoder, EncodedMatrix, EncoderState, EncodingMode};
use crate::error::{Error, Result};
use crate::schema::RawTable;
use crate::util::derive_seed;

use nn::{Adam, LayerChain, Mlp, Mode};
use steps::{ae_step, c_step, d_step, g_step, ClassifierFeedback};

const SEED_AE: u64 = 0xae;
const SEED_GAN: u64 = 0x6a17;
const SEED_ENCODER: u64 = 0xe1c;

/// Optional size overrides; anything unset follows the width-derived rules.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetOverrides {
    pub latent_len: Option<usize>,
    pub noise_len: Option<usize>,
    pub gen_hidden: Option<usize>,
    pub disc_hidden: Option<usize>,
    pub clf_hidden: Option<usize>,
}

/// Shapes of the five networks.
///
/// Every network is three fully-connected layers. Encoder hidden widths
/// taper from twice the latent length; generator and critic hidden layers
/// are flat; the generator's hidden layers carry batch normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub total_width: usize,
    pub latent_len: usize,
    pub noise_len: usize,
    pub leaky_slope: f64,
    pub enc: LayerChain,
    pub dec: LayerChain,
    pub gen: LayerChain,
    pub disc: LayerChain,
    pub clf: LayerChain,
}

impl NetSpec {
    /// Derives network shapes from a fitted encoder.
    ///
    /// Latent length: `ceil(total_width / 4)` clamped to `[32, 256]`, unless
    /// overridden.
    pub fn for_encoder(state: &EncoderState, overrides: &NetOverrides) -> NetSpec {
        let width = state.total_width;
        let latent = overrides
            .latent_len
            .unwrap_or_else(|| width.div_ceil(4).clamp(32, 256));
        let noise = overrides.noise_len.unwrap_or(100);
        let gen_hidden = overrides.gen_hidden.unwrap_or(256);
        let disc_hidden = overrides.disc_hidden.unwrap_or(256);
        let clf_hidden = overrides.clf_hidden.unwrap_or(256);
        let slope = 0.2;
        let mid = (latent * 3).div_ceil(2); // 1.5 * latent, rounded up
        let clf_in = width - state.target_span().width;
        let n_classes = state.target_category_count();
        NetSpec {
            total_width: width,
            latent_len: latent,
            noise_len: noise,
            leaky_slope: slope,
            enc: LayerChain {
                sizes: vec![width, 2 * latent, mid, latent],
                slope,
                batch_norm_hidden: false,
            },
            dec: LayerChain {
                sizes: vec![latent, mid, 2 * latent, width],
                slope,
                batch_norm_hidden: false,
            },
            gen: LayerChain {
                sizes: vec![noise, gen_hidden, gen_hidden, latent],
                slope,
                batch_norm_hidden: true,
            },
            disc: LayerChain {
                sizes: vec![latent, disc_hidden, disc_hidden, 1],
                slope,
                batch_norm_hidden: false,
            },
            clf: LayerChain {
                sizes: vec![clf_in, clf_hidden, clf_hidden, n_classes],
                slope,
                batch_norm_hidden: false,
            },
        }
    }
}

/// Training hyperparameters. All randomness flows from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub ae_epochs: usize,
    pub gan_epochs: usize,
    /// Autoencoder epochs before co-training starts (joint mode only).
    pub pretrain_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Critic steps per generator step.
    pub n_critic: usize,
    /// Gradient penalty coefficient.
    pub gp_lambda: f64,
    /// Autoencoder early stop: epochs without `min_delta` improvement.
    pub patience: usize,
    pub min_delta: f64,
    pub classifier_enabled: bool,
    /// Co-train the autoencoder with the adversarial pair (ablation).
    pub joint: bool,
    pub max_modes: usize,
    pub seed: u64,
    pub net: NetOverrides,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            ae_epochs: 300,
            gan_epochs: 300,
            pretrain_epochs: 300,
            batch_size: 256,
            learning_rate: 1e-4,
            beta1: 0.5,
            beta2: 0.9,
            n_critic: 5,
            gp_lambda: 10.0,
            patience: 20,
            min_delta: 1e-5,
            classifier_enabled: true,
            joint: false,
            max_modes: 10,
            seed: 0,
            net: NetOverrides::default(),
        }
    }
}

/// Per-epoch loss log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Reconstruction loss; keeps growing during joint co-training.
    pub ae_loss: Vec<f64>,
    pub d_loss: Vec<f64>,
    pub g_loss: Vec<f64>,
    pub c_loss: Vec<f64>,
    /// |E D(real) - E D(fake)| averaged over the epoch's critic steps.
    pub validity_gap: Vec<f64>,
}

/// A trained synthesizer: the five networks plus everything needed to map
/// between raw rows and latent space.
#[derive(Debug, Clone)]
pub struct SynthModel {
    pub spec: NetSpec,
    pub cfg: TrainConfig,
    pub state: EncoderState,
    pub enc: Mlp,
    pub dec: Mlp,
    pub gen: Mlp,
    pub disc: Mlp,
    pub clf: Option<Mlp>,
    pub history: TrainingHistory,
}

impl SynthModel {
    /// Full pipeline: fit the encoder, train the autoencoder, then the
    /// adversarial phase (disjoint by default, joint when `cfg.joint`).
    pub fn fit(table: &RawTable, mode: EncodingMode, cfg: &TrainConfig) -> Result<SynthModel> {
        let state = fit_encoder(table, mode, cfg.max_modes, derive_seed(cfg.seed, SEED_ENCODER))?;
        let encoded = state.encode_table(table)?;
        let spec = NetSpec::for_encoder(&state, &cfg.net);
        if cfg.joint {
            train_joint(&encoded, &state, &spec, cfg)
        } else {
            let (enc, dec, ae_loss) = train_autoencoder(&encoded, &spec, cfg)?;
            train_gan_with_history(&encoded, &state, enc, dec, &spec, cfg, ae_loss, false)
        }
    }
}

/// Trains encoder/decoder on reconstruction loss.
///
/// Stops at `cfg.ae_epochs` or when the epoch loss has improved by less
/// than `cfg.min_delta` for `cfg.patience` consecutive epochs. Returns the
/// per-epoch loss history.
pub fn train_autoencoder(
    encoded: &EncodedMatrix,
    spec: &NetSpec,
    cfg: &TrainConfig,
) -> Result<(Mlp, Mlp, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SEED_AE));
    let mut enc = spec.enc.build(&mut rng);
    let mut dec = spec.dec.build(&mut rng);
    let mut opt_enc = Adam::new(&enc, cfg.learning_rate, cfg.beta1, cfg.beta2);
    let mut opt_dec = Adam::new(&dec, cfg.learning_rate, cfg.beta1, cfg.beta2);

    let n = encoded.n_rows();
    let batch = cfg.batch_size.clamp(1, n);
    let mut history = Vec::new();
    let mut prev_loss = f64::INFINITY;
    let mut stall = 0usize;

    for epoch in 0..cfg.ae_epochs {
        let mut order: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(batch) {
            let x = encoded.values.select(ndarray::Axis(0), chunk);
            let (loss, g_enc, g_dec) = ae_step(&enc, &dec, &x)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: "reconstruction".into(),
                });
            }
            opt_enc.step(&mut enc, &g_enc);
            opt_dec.step(&mut dec, &g_dec);
            loss_sum += loss * chunk.len() as f64;
            seen += chunk.len();
        }
        let epoch_loss = loss_sum / seen as f64;
        history.push(epoch_loss);

        if prev_loss - epoch_loss < cfg.min_delta {
            stall += 1;
            if stall >= cfg.patience {
                break;
            }
        } else {
            stall = 0;
        }
        prev_loss = epoch_loss;
    }
    Ok((enc, dec, history))
}

/// Adversarial phase on a trained (frozen) autoencoder.
pub fn train_gan(
    encoded: &EncodedMatrix,
    state: &EncoderState,
    enc: Mlp,
    dec: Mlp,
    spec: &NetSpec,
    cfg: &TrainConfig,
) -> Result<SynthModel> {
    train_gan_with_history(encoded, state, enc, dec, spec, cfg, Vec::new(), false)
}

/// Joint mode: pre-train the autoencoder, then co-train it alongside the
/// adversarial pair. Kept for the ablation; disjoint training is the
/// default.
pub fn train_joint(
    encoded: &EncodedMatrix,
    state: &EncoderState,
    spec: &NetSpec,
    cfg: &TrainConfig,
) -> Result<SynthModel> {
    let pretrain_cfg = TrainConfig {
        ae_epochs: cfg.pretrain_epochs,
        ..cfg.clone()
    };
    let (enc, dec, ae_loss) = train_autoencoder(encoded, spec, &pretrain_cfg)?;
    train_gan_with_history(encoded, state, enc, dec, spec, cfg, ae_loss, true)
}

#[allow(clippy::too_many_arguments)]
fn train_gan_with_history(
    encoded: &EncodedMatrix,
    state: &EncoderState,
    mut enc: Mlp,
    mut dec: Mlp,
    spec: &NetSpec,
    cfg: &TrainConfig,
    ae_loss: Vec<f64>,
    joint: bool,
) -> Result<SynthModel> {
    if state.total_width != enc.input_width() {
        return Err(Error::ShapeMismatch(format!(
            "encoder expects width {}, encoder state produces {}",
            enc.input_width(),
            state.total_width
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SEED_GAN));
    let mut gen = spec.gen.build(&mut rng);
    let mut disc = spec.disc.build(&mut rng);
    // a table holding only the target column leaves the classifier nothing
    // to condition on
    let classifier_on = cfg.classifier_enabled && spec.clf.sizes[0] > 0;
    let mut clf = classifier_on.then(|| spec.clf.build(&mut rng));

    let mut opt_gen = Adam::new(&gen, cfg.learning_rate, cfg.beta1, cfg.beta2);
    let mut opt_disc = Adam::new(&disc, cfg.learning_rate, cfg.beta1, cfg.beta2);
    let mut opt_clf = clf
        .as_ref()
        .map(|c| Adam::new(c, cfg.learning_rate, cfg.beta1, cfg.beta2));
    let mut opt_enc = joint.then(|| Adam::new(&enc, cfg.learning_rate, cfg.beta1, cfg.beta2));
    let mut opt_dec = joint.then(|| Adam::new(&dec, cfg.learning_rate, cfg.beta1, cfg.beta2));

    let n = encoded.n_rows();
    let batch = cfg.batch_size.clamp(1, n);
    let steps_per_epoch = n.div_ceil(batch).max(1);

    let mut history = TrainingHistory {
        ae_loss,
        ..TrainingHistory::default()
    };

    for epoch in 0..cfg.gan_epochs {
        let mut d_sum = 0.0;
        let mut g_sum = 0.0;
        let mut c_sum = 0.0;
        let mut gap_sum = 0.0;
        let mut d_steps = 0usize;
        let mut ae_sum = 0.0;

        for _ in 0..steps_per_epoch {
            for _ in 0..cfg.n_critic {
                let real_rows = sample_rows(&encoded.values, batch, n, &mut rng);
                let real_latent = enc.forward_value(&real_rows, Mode::Eval);
                let z = noise(batch, spec.noise_len, &mut rng);
                let (fake_latent, gen_cache) = gen.forward(&z, Mode::Train);
                gen.update_running_stats(&gen_cache);
                let eps: Vec<f64> = (0..batch).map(|_| rng.random::<f64>()).collect();
                let crit = d_step(&disc, &real_latent, &fake_latent, &eps, cfg.gp_lambda)?;
                if !crit.loss.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        loss: "critic".into(),
                    });
                }
                opt_disc.step(&mut disc, &crit.grads);
                d_sum += crit.loss;
                gap_sum += (crit.mean_real - crit.mean_fake).abs();
                d_steps += 1;
            }

            let z = noise(batch, spec.noise_len, &mut rng);
            let feedback = clf.as_ref().map(|c| ClassifierFeedback { clf: c, state });
            let (g_loss, g_grads, gen_cache) = g_step(&gen, &disc, &dec, feedback.as_ref(), &z)?;
            if !g_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    loss: "generator".into(),
                });
            }
            opt_gen.step(&mut gen, &g_grads);
            gen.update_running_stats(&gen_cache);
            g_sum += g_loss;

            if let (Some(c), Some(opt)) = (clf.as_mut(), opt_clf.as_mut()) {
                let real_rows = sample_rows(&encoded.values, batch, n, &mut rng);
                let real_labels = state.decode_target_indices(&real_rows);
                let real_latent = enc.forward_value(&real_rows, Mode::Eval);
                let recon_real = dec.forward_value(&real_latent, Mode::Eval);
                let real_in = state.strip_target_columns(&recon_real);

                let z = noise(batch, spec.noise_len, &mut rng);
                let (fake_latent, gen_cache) = gen.forward(&z, Mode::Train);
                gen.update_running_stats(&gen_cache);
                let recon_fake = dec.forward_value(&fake_latent, Mode::Eval);
                let fake_labels = state.decode_target_indices(&recon_fake);
                let fake_in = state.strip_target_columns(&recon_fake);

                let (c_loss, c_grads) = c_step(c, &real_in, &real_labels, &fake_in, &fake_labels)?;
                if !c_loss.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        loss: "classifier".into(),
                    });
                }
                opt.step(c, &c_grads);
                c_sum += c_loss;
            }

            if joint {
                let real_rows = sample_rows(&encoded.values, batch, n, &mut rng);
                let (ae, g_enc, g_dec) = ae_step(&enc, &dec, &real_rows)?;
                if !ae.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        loss: "reconstruction".into(),
                    });
                }
                opt_enc.as_mut().unwrap().step(&mut enc, &g_enc);
                opt_dec.as_mut().unwrap().step(&mut dec, &g_dec);
                ae_sum += ae;
            }
        }

        let steps = steps_per_epoch as f64;
        history.d_loss.push(d_sum / d_steps.max(1) as f64);
        history.g_loss.push(g_sum / steps);
        history.c_loss.push(c_sum / steps);
        history.validity_gap.push(gap_sum / d_steps.max(1) as f64);
        if joint {
            history.ae_loss.push(ae_sum / steps);
        }
    }

    Ok(SynthModel {
        spec: spec.clone(),
        cfg: cfg.clone(),
        state: state.clone(),
        enc,
        dec,
        gen,
        disc,
        clf,
        history,
    })
}

fn sample_rows(values: &Array2<f64>, batch: usize, n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let idx: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n)).collect();
    values.select(ndarray::Axis(0), &idx)
}

fn noise(batch: usize, dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut z = Array2::zeros((batch, dim));
    for v in z.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    z
}

/// Draws `n` synthetic rows from a trained model, deterministic under
/// `seed`. Generator and decoder run in eval mode.
pub fn synthesize(model: &SynthModel, n: usize, seed: u64) -> Result<RawTable> {
    if n == 0 {
        return Err(Error::ZeroSampleCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let chunk = 8192usize;
    let mut remaining = n;
    let mut values = Array2::zeros((0, model.state.total_width));
    while remaining > 0 {
        let b = remaining.min(chunk);
        let z = noise(b, model.spec.noise_len, &mut rng);
        let latent = model.gen.forward_value(&z, Mode::Eval);
        let recon = model.dec.forward_value(&latent, Mode::Eval);
        values.append(ndarray::Axis(0), recon.view())
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        remaining -= b;
    }
    let decoded = model.state.decode_table(&EncodedMatrix { values })?;
    rows.extend(decoded.rows);
    RawTable::new(model.state.schema.clone(), rows)
}
