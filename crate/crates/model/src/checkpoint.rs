//! Single-file checkpoint container.
//!
//! Layout (little-endian): magic, u32 version, u64 header length, header JSON,
//! u32 tensor count, then per tensor {u32 name length, name, u32 rows,
//! u32 cols, f32 data}, then a 32-byte SHA-256 of everything before it.

use std::path::Path;

use ndarray::Array2;
use pharmasyn_nn::ParamStore;
use pharmasyn_synthesis::{BuildingBlockCatalog, ReactionTemplateSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ModelConfig, TrainConfig};
use crate::error::ModelError;
use crate::model::Model;
use crate::training::{forward, Batch};

pub const MAGIC: &[u8; 8] = b"PSYNCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    model: ModelConfig,
    train: TrainConfig,
    catalog_hash: String,
    templates_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub model: Model<f32>,
    pub config: TrainConfig,
    pub catalog_hash: String,
    pub templates_hash: String,
}

impl Checkpoint {
    pub fn new(
        model: Model<f32>,
        config: TrainConfig,
        catalog: &BuildingBlockCatalog,
        templates: &ReactionTemplateSet,
    ) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            model,
            config,
            catalog_hash: catalog.digest(),
            templates_hash: templates.digest(),
        }
    }

    /// Fails unless the checkpoint was trained against these exact inputs.
    pub fn check_inputs(&self, catalog: &BuildingBlockCatalog, templates: &ReactionTemplateSet) -> Result<(), ModelError> {
        let got = catalog.digest();
        if got != self.catalog_hash {
            return Err(ModelError::CatalogMismatch {
                expected: self.catalog_hash.clone(),
                got,
            });
        }
        let got = templates.digest();
        if got != self.templates_hash {
            return Err(ModelError::TemplateMismatch {
                expected: self.templates_hash.clone(),
                got,
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&Header {
            model: self.model.config.clone(),
            train: self.config.clone(),
            catalog_hash: self.catalog_hash.clone(),
            templates_hash: self.templates_hash.clone(),
        })
        .expect("header serializes");
        let p = &self.model.params;
        let mut out = Vec::with_capacity(64 + header.len() + 4 * p.numel());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(p.len() as u32).to_le_bytes());
        for (name, a) in p.iter() {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(a.nrows() as u32).to_le_bytes());
            out.extend_from_slice(&(a.ncols() as u32).to_le_bytes());
            for v in a.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(ModelError::BadMagic);
        }
        let mut r = Reader { bytes, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(ModelError::UnsupportedVersion {
                found: version,
                supported: CHECKPOINT_VERSION,
            });
        }
        if bytes.len() < r.pos + 32 {
            return Err(ModelError::Corrupt("truncated".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(ModelError::Checksum);
        }
        let mut r = Reader { bytes: body, pos: r.pos };
        let hlen = r.u64()? as usize;
        let header: Header =
            serde_json::from_slice(r.take(hlen)?).map_err(|e| ModelError::Corrupt(format!("header: {e}")))?;
        let n = r.u32()? as usize;
        let mut params = ParamStore::new();
        for _ in 0..n {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| ModelError::Corrupt("tensor name is not UTF-8".into()))?
                .to_string();
            let rows = r.u32()? as usize;
            let cols = r.u32()? as usize;
            let raw = r.take(rows * cols * 4)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            params.add(name, Array2::from_shape_vec((rows, cols), data).expect("sized read"))?;
        }
        if r.pos != body.len() {
            return Err(ModelError::Corrupt("trailing bytes".into()));
        }
        let model = Model {
            config: header.model,
            params,
        };
        // every expected tensor must be present with the right shape
        let reference: Model<f32> = Model::init(model.config.clone(), 0)?;
        for (name, a) in reference.params.iter() {
            match model.params.get(name) {
                None => return Err(pharmasyn_nn::ParamError::Missing(name.to_string()).into()),
                Some(b) if b.dim() != a.dim() => {
                    return Err(pharmasyn_nn::ParamError::Shape {
                        name: name.to_string(),
                        expected: a.dim(),
                        got: b.dim(),
                    }
                    .into())
                }
                Some(_) => {}
            }
        }
        Ok(Checkpoint {
            version,
            model,
            config: header.train,
            catalog_hash: header.catalog_hash,
            templates_hash: header.templates_hash,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| ModelError::Corrupt("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Save, reload and compare forward outputs on `probe` bit for bit.
pub fn verify_checkpoint(ckpt: &Checkpoint, probe: &Batch<f32>) -> Result<bool, ModelError> {
    let run = |m: &Model<f32>| -> Result<Vec<u32>, ModelError> {
        let mut g = pharmasyn_nn::Graph::new(&m.params);
        let f = forward(&mut g, &m.config, probe, false)?;
        Ok([f.z, f.logits, f.total]
            .iter()
            .flat_map(|&v| g.value(v).iter().map(|x| x.to_bits()).collect::<Vec<_>>())
            .collect())
    };
    let before = run(&ckpt.model)?;
    let reloaded = Checkpoint::from_bytes(&ckpt.to_bytes())?;
    Ok(reloaded == *ckpt && run(&reloaded.model)? == before)
}
