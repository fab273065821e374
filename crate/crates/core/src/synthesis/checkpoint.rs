//! Checkpoint directory layout.
//!
//! `meta.json` carries the network shapes, training config, encoder state,
//! and loss history. Each network's tensors live in their own binary file
//! (`enc.bin`, `dec.bin`, `gen.bin`, `disc.bin`, and `clf.bin` when the
//! classifier was trained). A file is a sequence of records, all
//! little-endian:
//!
//! ```text
//! u32   name length in bytes
//! ...   UTF-8 tensor name
//! u32   rank
//! u32[] dimensions
//! f32[] row-major payload
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::EncoderState;
use crate::error::{Error, Result};
use crate::synthesis::nn::Mlp;
use crate::synthesis::{NetSpec, SynthModel, TrainConfig, TrainingHistory};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    version: u32,
    spec: NetSpec,
    cfg: TrainConfig,
    state: EncoderState,
    classifier: bool,
    history: TrainingHistory,
}

impl SynthModel {
    /// Writes the model into `dir` (created if needed).
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let meta = CheckpointMeta {
            version: CHECKPOINT_VERSION,
            spec: self.spec.clone(),
            cfg: self.cfg.clone(),
            state: self.state.clone(),
            classifier: self.clf.is_some(),
            history: self.history.clone(),
        };
        let meta_path = dir.join("meta.json");
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
            .map_err(|e| Error::io(&meta_path, e))?;

        write_tensor_file(dir.join("enc.bin"), &self.enc.named_tensors())?;
        write_tensor_file(dir.join("dec.bin"), &self.dec.named_tensors())?;
        write_tensor_file(dir.join("gen.bin"), &self.gen.named_tensors())?;
        write_tensor_file(dir.join("disc.bin"), &self.disc.named_tensors())?;
        if let Some(clf) = &self.clf {
            write_tensor_file(dir.join("clf.bin"), &clf.named_tensors())?;
        }
        Ok(())
    }

    /// Loads a checkpoint written by [`SynthModel::save`].
    pub fn load(dir: impl AsRef<Path>) -> Result<SynthModel> {
        let dir = dir.as_ref();
        let meta_path = dir.join("meta.json");
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: CheckpointMeta = serde_json::from_str(&text)?;
        if meta.version != CHECKPOINT_VERSION {
            return Err(Error::ReportVersion {
                expected: CHECKPOINT_VERSION,
                found: meta.version,
            });
        }
        if meta.state.total_width != meta.spec.total_width {
            return Err(Error::Checkpoint(format!(
                "encoder state width {} does not match network spec width {}",
                meta.state.total_width, meta.spec.total_width
            )));
        }

        let enc = load_net(&meta.spec.enc, dir.join("enc.bin"))?;
        let dec = load_net(&meta.spec.dec, dir.join("dec.bin"))?;
        let gen = load_net(&meta.spec.gen, dir.join("gen.bin"))?;
        let disc = load_net(&meta.spec.disc, dir.join("disc.bin"))?;
        let clf = if meta.classifier {
            Some(load_net(&meta.spec.clf, dir.join("clf.bin"))?)
        } else {
            None
        };
        Ok(SynthModel {
            spec: meta.spec,
            cfg: meta.cfg,
            state: meta.state,
            enc,
            dec,
            gen,
            disc,
            clf,
            history: meta.history,
        })
    }
}

fn load_net(chain: &crate::synthesis::nn::LayerChain, path: impl AsRef<Path>) -> Result<Mlp> {
    // parameters are overwritten wholesale, any init seed works
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    use rand::SeedableRng;
    let mut net = chain.build(&mut rng);
    let tensors = read_tensor_file(path)?;
    net.load_named_tensors(&tensors)?;
    Ok(net)
}

fn write_tensor_file(path: impl AsRef<Path>, tensors: &[(String, Vec<usize>, Vec<f64>)]) -> Result<()> {
    let path = path.as_ref();
    let mut buf: Vec<u8> = Vec::new();
    for (name, shape, values) in tensors {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in values {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_tensor_file(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<usize>, Vec<f64>)>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(|e| Error::io(path, e))?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    let mut tensors = Vec::new();
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<std::ops::Range<usize>> {
        if *pos + n > bytes.len() {
            return Err(Error::Checkpoint("truncated tensor file".into()));
        }
        let r = *pos..*pos + n;
        *pos += n;
        Ok(r)
    };
    while pos < bytes.len() {
        let r = take(&mut pos, 4)?;
        let name_len = u32::from_le_bytes(bytes[r].try_into().unwrap()) as usize;
        let r = take(&mut pos, name_len)?;
        let name = String::from_utf8(bytes[r].to_vec())
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        let r = take(&mut pos, 4)?;
        let rank = u32::from_le_bytes(bytes[r].try_into().unwrap()) as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            let r = take(&mut pos, 4)?;
            shape.push(u32::from_le_bytes(bytes[r].try_into().unwrap()) as usize);
        }
        let count: usize = shape.iter().product();
        let r = take(&mut pos, 4 * count)?;
        let values: Vec<f64> = bytes[r]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        tensors.push((name, shape, values));
    }
    Ok(tensors)
}
