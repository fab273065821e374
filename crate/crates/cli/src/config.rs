//! Run configuration: a JSON file merged with command-line flags.
//!
//! Flags win over file values. Validation collects every violation before
//! failing so a bad config reports all problems at once.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use tabsynth::encoding::EncodingMode;
use tabsynth::sorting::OrderMethod;
use tabsynth::synthesis::{NetOverrides, TrainConfig};

/// Everything a training or sensitivity run needs. All fields optional so
/// files and flags can each fill a subset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub encoding: Option<EncodingMode>,
    pub order: Option<OrderMethod>,
    pub order_file: Option<PathBuf>,
    /// Sets both autoencoder and adversarial epochs unless the specific
    /// fields override it.
    pub epochs: Option<usize>,
    pub ae_epochs: Option<usize>,
    pub gan_epochs: Option<usize>,
    pub pretrain_epochs: Option<usize>,
    pub batch: Option<usize>,
    pub learning_rate: Option<f64>,
    pub n_critic: Option<usize>,
    pub gp_lambda: Option<f64>,
    pub max_modes: Option<usize>,
    pub latent_len: Option<usize>,
    pub noise_len: Option<usize>,
    pub gen_hidden: Option<usize>,
    pub disc_hidden: Option<usize>,
    pub clf_hidden: Option<usize>,
    pub no_classifier: Option<bool>,
    pub joint: Option<bool>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Overlays `flags` on `self`; any field set in `flags` wins.
    pub fn merged_with(mut self, flags: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() { self.$field = flags.$field; })*
            };
        }
        take!(
            data, schema, encoding, order, order_file, epochs, ae_epochs, gan_epochs,
            pretrain_epochs, batch, learning_rate, n_critic, gp_lambda, max_modes, latent_len,
            noise_len, gen_hidden, disc_hidden, clf_hidden, no_classifier, joint, seed, repeats,
            out
        );
        self
    }

    /// Checks everything a training run needs, reporting all violations.
    pub fn validate_for_training(&self) -> Result<()> {
        let mut problems = Vec::new();
        match &self.data {
            None => problems.push("data: missing (set --data or the config field)".to_string()),
            Some(p) if !p.is_file() => problems.push(format!("data: {} is not a file", p.display())),
            _ => {}
        }
        if let Some(p) = &self.schema {
            if !p.is_file() {
                problems.push(format!("schema: {} is not a file", p.display()));
            }
        } else {
            problems.push("schema: missing (set --schema or the config field)".to_string());
        }
        if self.order.is_some() && self.order_file.is_some() {
            problems.push("order: --order and --order-file are mutually exclusive".to_string());
        }
        if let Some(p) = &self.order_file {
            if !p.is_file() {
                problems.push(format!("order_file: {} is not a file", p.display()));
            }
        }
        if self.out.is_none() {
            problems.push("out: missing (set --out or the config field)".to_string());
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("batch", self.batch),
            ("n_critic", self.n_critic),
        ] {
            if v == Some(0) {
                problems.push(format!("{name}: must be at least 1"));
            }
        }
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                problems.push(format!("learning_rate: {lr} must be positive and finite"));
            }
        }
        if let Some(l) = self.gp_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                problems.push(format!("gp_lambda: {l} must be non-negative"));
            }
        }
        if self.max_modes == Some(0) {
            problems.push("max_modes: must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            let mut msg = String::from("invalid configuration:");
            for p in &problems {
                let _ = write!(msg, "\n  - {p}");
            }
            bail!(msg)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut cfg = TrainConfig::default();
        if let Some(e) = self.epochs {
            cfg.ae_epochs = e;
            cfg.gan_epochs = e;
            cfg.pretrain_epochs = e;
        }
        if let Some(e) = self.ae_epochs {
            cfg.ae_epochs = e;
        }
        if let Some(e) = self.gan_epochs {
            cfg.gan_epochs = e;
        }
        if let Some(e) = self.pretrain_epochs {
            cfg.pretrain_epochs = e;
        }
        if let Some(b) = self.batch {
            cfg.batch_size = b;
        }
        if let Some(lr) = self.learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(n) = self.n_critic {
            cfg.n_critic = n;
        }
        if let Some(l) = self.gp_lambda {
            cfg.gp_lambda = l;
        }
        if let Some(m) = self.max_modes {
            cfg.max_modes = m;
        }
        if let Some(v) = self.no_classifier {
            cfg.classifier_enabled = !v;
        }
        if let Some(v) = self.joint {
            cfg.joint = v;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.net = NetOverrides {
            latent_len: self.latent_len,
            noise_len: self.noise_len,
            gen_hidden: self.gen_hidden,
            disc_hidden: self.disc_hidden,
            clf_hidden: self.clf_hidden,
        };
        cfg
    }

    pub fn encoding_mode(&self) -> EncodingMode {
        self.encoding.unwrap_or(EncodingMode::Full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig {
            seed: Some(1),
            batch: Some(64),
            ..Default::default()
        };
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.merged_with(flags);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.batch, Some(64));
    }

    #[test]
    fn validation_lists_every_problem() {
        let cfg = RunConfig {
            epochs: Some(0),
            learning_rate: Some(-1.0),
            ..Default::default()
        };
        let msg = cfg.validate_for_training().unwrap_err().to_string();
        assert!(msg.contains("data:"));
        assert!(msg.contains("schema:"));
        assert!(msg.contains("out:"));
        assert!(msg.contains("epochs:"));
        assert!(msg.contains("learning_rate:"));
    }

    #[test]
    fn epochs_knob_sets_both_phases() {
        let cfg = RunConfig {
            epochs: Some(42),
            gan_epochs: Some(7),
            ..Default::default()
        };
        let t = cfg.train_config();
        assert_eq!(t.ae_epochs, 42);
        assert_eq!(t.gan_epochs, 7);
    }
}
