//! Loss-and-gradient computations for single optimization steps.
//!
//! Each function evaluates one training objective on fixed inputs and
//! returns the loss together with analytic parameter gradients, so the
//! training loop stays a thin scheduler and the gradients can be verified
//! against central finite differences.

use ndarray::Array2;

use crate::encoding::EncoderState;
use crate::error::Result;
use crate::synthesis::losses::{cross_entropy_grad, loss_ae, loss_d, loss_g};
use crate::synthesis::nn::{ForwardCache, Mlp, MlpGrads, Mode};

/// Reconstruction loss on one batch with gradients for encoder and decoder.
pub fn ae_step(enc: &Mlp, dec: &Mlp, x: &Array2<f64>) -> Result<(f64, MlpGrads, MlpGrads)> {
    let (latent, cache_enc) = enc.forward(x, Mode::Train);
    let (recon, cache_dec) = dec.forward(&latent, Mode::Train);
    let loss = loss_ae(x, &recon)?;
    let n = x.nrows() as f64;
    let dy = (&recon - x) * (2.0 / n);
    let mut dec_grads = dec.zero_grads();
    let dlatent = dec.backward(&cache_dec, dy, &mut dec_grads);
    let mut enc_grads = enc.zero_grads();
    enc.backward(&cache_enc, dlatent, &mut enc_grads);
    Ok((loss, enc_grads, dec_grads))
}

/// Result of one critic step.
pub struct CriticStep {
    pub loss: f64,
    pub grads: MlpGrads,
    pub mean_real: f64,
    pub mean_fake: f64,
    pub penalty: f64,
}

/// Critic loss on fixed real/fake latent batches, including the gradient
/// penalty on per-sample interpolates `eps*real + (1-eps)*fake`.
pub fn d_step(
    disc: &Mlp,
    real: &Array2<f64>,
    fake: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<CriticStep> {
    let b = real.nrows();
    debug_assert_eq!(fake.nrows(), b);
    debug_assert_eq!(eps.len(), b);
    let bf = b as f64;

    let mut interp = Array2::zeros(real.dim());
    for i in 0..b {
        for j in 0..real.ncols() {
            interp[(i, j)] = eps[i] * real[(i, j)] + (1.0 - eps[i]) * fake[(i, j)];
        }
    }

    let (d_real, cache_real) = disc.forward(real, Mode::Train);
    let (d_fake, cache_fake) = disc.forward(fake, Mode::Train);
    let (_, cache_interp) = disc.forward(&interp, Mode::Train);
    let (input_grad, deltas) = disc.input_gradient(&cache_interp, Array2::ones((b, 1)));

    let norms: Vec<f64> = input_grad
        .rows()
        .into_iter()
        .map(|g| g.mapv(|v| v * v).sum().sqrt())
        .collect();
    let d_real_vals: Vec<f64> = d_real.column(0).to_vec();
    let d_fake_vals: Vec<f64> = d_fake.column(0).to_vec();
    let loss = loss_d(&d_real_vals, &d_fake_vals, &norms, lambda)?;

    let mut grads = disc.zero_grads();
    disc.backward(&cache_fake, Array2::from_elem((b, 1), 1.0 / bf), &mut grads);
    disc.backward(&cache_real, Array2::from_elem((b, 1), -1.0 / bf), &mut grads);

    let mut v = Array2::zeros(input_grad.dim());
    for i in 0..b {
        let r = norms[i];
        let coeff = lambda * 2.0 * (r - 1.0) / (bf * r.max(1e-12));
        for j in 0..input_grad.ncols() {
            v[(i, j)] = coeff * input_grad[(i, j)];
        }
    }
    disc.penalty_backward(&cache_interp, &deltas, &v, &mut grads);

    let penalty = norms.iter().map(|r| (r - 1.0) * (r - 1.0)).sum::<f64>() / bf * lambda;
    Ok(CriticStep {
        loss,
        grads,
        mean_real: d_real_vals.iter().sum::<f64>() / bf,
        mean_fake: d_fake_vals.iter().sum::<f64>() / bf,
        penalty,
    })
}

/// Classifier context for the generator step: the frozen classifier and the
/// encoder state that locates the target span in decoded rows.
pub struct ClassifierFeedback<'a> {
    pub clf: &'a Mlp,
    pub state: &'a EncoderState,
}

/// Generator loss on a fixed noise batch. The critic, decoder, and
/// classifier stay frozen; gradients flow through them into the generator.
/// Returns the generator's forward cache so the caller can commit its
/// batch-norm statistics after the step.
pub fn g_step(
    gen: &Mlp,
    disc: &Mlp,
    dec: &Mlp,
    feedback: Option<&ClassifierFeedback<'_>>,
    z: &Array2<f64>,
) -> Result<(f64, MlpGrads, ForwardCache)> {
    let b = z.nrows() as f64;
    let (fake, cache_gen) = gen.forward(z, Mode::Train);

    let (d_out, cache_disc) = disc.forward(&fake, Mode::Train);
    let (mut dfake, _) = disc.input_gradient(&cache_disc, Array2::from_elem((z.nrows(), 1), -1.0 / b));

    let d_vals: Vec<f64> = d_out.column(0).to_vec();
    let mut ce_pair = None;
    if let Some(fb) = feedback {
        let (recon, cache_dec) = dec.forward(&fake, Mode::Train);
        // the synthetic rows' own decoded target values, treated as constants
        let labels = fb.state.decode_target_indices(&recon);
        let clf_in = fb.state.strip_target_columns(&recon);
        let (logits, cache_clf) = fb.clf.forward(&clf_in, Mode::Train);
        let (dclf_in, _) = fb.clf.input_gradient(&cache_clf, cross_entropy_grad(&logits, &labels));
        let drecon = fb.state.scatter_non_target(&dclf_in);
        let (dfake_clf, _) = dec.input_gradient(&cache_dec, drecon);
        dfake += &dfake_clf;
        ce_pair = Some((logits, labels));
    }

    let loss = loss_g(
        &d_vals,
        ce_pair.as_ref().map(|(l, t)| (l, t.as_slice())),
    )?;

    let mut grads = gen.zero_grads();
    gen.backward(&cache_gen, dfake, &mut grads);
    Ok((loss, grads, cache_gen))
}

/// Classifier loss and gradients on reconstructed real and synthetic rows.
pub fn c_step(
    clf: &Mlp,
    real_in: &Array2<f64>,
    real_labels: &[usize],
    synth_in: &Array2<f64>,
    synth_labels: &[usize],
) -> Result<(f64, MlpGrads)> {
    let (real_logits, cache_real) = clf.forward(real_in, Mode::Train);
    let (synth_logits, cache_synth) = clf.forward(synth_in, Mode::Train);
    let loss = crate::synthesis::losses::loss_c(
        &real_logits,
        real_labels,
        &synth_logits,
        synth_labels,
    )?;
    let mut grads = clf.zero_grads();
    clf.backward(
        &cache_real,
        cross_entropy_grad(&real_logits, real_labels),
        &mut grads,
    );
    clf.backward(
        &cache_synth,
        cross_entropy_grad(&synth_logits, synth_labels),
        &mut grads,
    );
    Ok((loss, grads))
}
