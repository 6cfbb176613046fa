//! Binary weight files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"GMW1"
//! version u32
//! arch    u32 length + architecture JSON
//! fprint  32-byte SHA-256 of the architecture JSON
//! count   u32
//! entry*  u32 name length, name, u8 flags, u32 value count, f32 values
//! trailer 32-byte SHA-256 of everything above
//! ```
//!
//! Flag bit 0 marks a trainable parameter, bit 1 a batch-norm running
//! statistic. Values are stored as f32; models canonicalize parameters
//! to f32-representable values when built and at the end of training,
//! so a save → load roundtrip reproduces the forward pass bit for bit.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ArchSpec, GaitModel};

const MAGIC: &[u8; 4] = b"GMW1";
const VERSION: u32 = 1;

const FLAG_TRAINABLE: u8 = 0b01;
const FLAG_RUNNING_STAT: u8 = 0b10;

struct Entry {
    name: String,
    flags: u8,
    values: Vec<f64>,
}

fn collect_entries(model: &GaitModel) -> Vec<Entry> {
    let mut entries = Vec::new();
    for p in model.params() {
        entries.push(Entry {
            name: p.name.clone(),
            flags: if p.trainable { FLAG_TRAINABLE } else { 0 },
            values: p.data.clone(),
        });
    }
    for b in &model.blocks {
        let prefix = b.bn.gamma.name.trim_end_matches(".gamma").to_string();
        entries.push(Entry {
            name: format!("{prefix}.running_mean"),
            flags: FLAG_RUNNING_STAT,
            values: b.bn.running_mean.clone(),
        });
        entries.push(Entry {
            name: format!("{prefix}.running_var"),
            flags: FLAG_RUNNING_STAT,
            values: b.bn.running_var.clone(),
        });
    }
    entries
}

pub fn serialize(model: &GaitModel) -> Vec<u8> {
    let arch_json = model.arch.to_json();
    let entries = collect_entries(model);

    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(arch_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(arch_json.as_bytes());
    buf.extend_from_slice(&model.arch.fingerprint());
    buf.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for e in &entries {
        buf.extend_from_slice(&(e.name.len() as u32).to_le_bytes());
        buf.extend_from_slice(e.name.as_bytes());
        buf.push(e.flags);
        buf.extend_from_slice(&(e.values.len() as u32).to_le_bytes());
        for &v in &e.values {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let trailer: [u8; 32] = Sha256::digest(&buf).into();
    buf.extend_from_slice(&trailer);
    buf
}

pub fn save_weights(model: &GaitModel, path: &Path) -> Result<()> {
    fs::write(path, serialize(model))?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::CorruptFile(format!(
                "truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

pub fn deserialize(buf: &[u8]) -> Result<GaitModel> {
    if buf.len() < 32 {
        return Err(Error::CorruptFile("file shorter than its trailer".into()));
    }
    let (body, trailer) = buf.split_at(buf.len() - 32);
    let expected: [u8; 32] = Sha256::digest(body).into();
    if trailer != expected {
        return Err(Error::CorruptFile("content hash mismatch".into()));
    }

    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::CorruptFile("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::IncompatibleWeights(format!(
            "format version {version}, expected {VERSION}"
        )));
    }
    let arch_len = r.u32()? as usize;
    let arch_json = std::str::from_utf8(r.take(arch_len)?)
        .map_err(|_| Error::CorruptFile("architecture JSON is not UTF-8".into()))?
        .to_string();
    let arch: ArchSpec = serde_json::from_str(&arch_json)
        .map_err(|e| Error::CorruptFile(format!("architecture JSON does not parse: {e}")))?;
    let stored_fp: [u8; 32] = r.take(32)?.try_into().unwrap();
    let actual_fp: [u8; 32] = Sha256::digest(arch_json.as_bytes()).into();
    if stored_fp != actual_fp {
        return Err(Error::IncompatibleWeights(
            "stored fingerprint does not match the architecture".into(),
        ));
    }

    let mut model = GaitModel::from_arch(&arch, 0);
    let count = r.u32()? as usize;
    let mut filled = 0usize;
    let mut any_frozen_block_param = false;
    let mut all_block_params_frozen = !model.blocks.is_empty();
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::CorruptFile("entry name is not UTF-8".into()))?
            .to_string();
        let flags = r.u8()?;
        let len = r.u32()? as usize;
        let bytes = r.take(len * 4)?;
        let values: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();

        if flags & FLAG_RUNNING_STAT != 0 {
            let target = model
                .blocks
                .iter_mut()
                .find_map(|b| {
                    let prefix = b.bn.gamma.name.trim_end_matches(".gamma").to_string();
                    if name == format!("{prefix}.running_mean") {
                        Some(&mut b.bn.running_mean)
                    } else if name == format!("{prefix}.running_var") {
                        Some(&mut b.bn.running_var)
                    } else {
                        None
                    }
                })
                .ok_or_else(|| Error::CorruptFile(format!("unknown running stat '{name}'")))?;
            if target.len() != values.len() {
                return Err(Error::CorruptFile(format!("size mismatch in '{name}'")));
            }
            *target = values;
        } else {
            let mut params = model.params_mut();
            let p = params
                .iter_mut()
                .find(|p| p.name == name)
                .ok_or_else(|| Error::CorruptFile(format!("unknown parameter '{name}'")))?;
            if p.len() != values.len() {
                return Err(Error::CorruptFile(format!("size mismatch in '{name}'")));
            }
            p.data = values;
            p.trainable = flags & FLAG_TRAINABLE != 0;
            if name.starts_with("backbone.") {
                if p.trainable {
                    all_block_params_frozen = false;
                } else {
                    any_frozen_block_param = true;
                }
            }
            filled += 1;
        }
    }
    let expected_params = model.params().len();
    if filled != expected_params {
        return Err(Error::CorruptFile(format!(
            "file holds {filled} parameters, architecture needs {expected_params}"
        )));
    }
    model.frozen_backbone = any_frozen_block_param && all_block_params_frozen;
    Ok(model)
}

pub fn load_weights(path: &Path) -> Result<GaitModel> {
    deserialize(&fs::read(path)?)
}

/// Loads and verifies the file carries exactly the expected
/// architecture.
pub fn load_weights_expecting(path: &Path, expected: &ArchSpec) -> Result<GaitModel> {
    let model = load_weights(path)?;
    if &model.arch != expected {
        return Err(Error::IncompatibleWeights(
            "weight file was written for a different architecture".into(),
        ));
    }
    Ok(model)
}
