//! Checkpoint layout: `u64` LE byte length of the config JSON, the JSON,
//! then every tensor of [`ModelParams::tensors`] as `f64` LE.

use std::fs;
use std::path::Path;

use super::{Model, ModelConfig, ModelParams};
use crate::error::{Error, Result};

pub fn encode_checkpoint(model: &Model) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&model.config)?;
    let mut out = Vec::with_capacity(8 + header.len() + 8 * model.params.allocated_scalars());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, t) in model.params.tensors() {
        for v in t.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(buf: &[u8]) -> Result<Model> {
    let bad = |m: String| Error::Checkpoint(m);
    let len_bytes: [u8; 8] = buf
        .get(..8)
        .ok_or_else(|| bad("missing header length".into()))?
        .try_into()
        .expect("8 bytes");
    let header_len = usize::try_from(u64::from_le_bytes(len_bytes))
        .map_err(|_| bad("header length overflows".into()))?;
    let header = buf
        .get(8..8usize.saturating_add(header_len))
        .ok_or_else(|| bad(format!("header of {header_len} bytes is truncated")))?;
    let config: ModelConfig = serde_json::from_slice(header)
        .map_err(|e| bad(format!("bad config header: {e}")))?;
    let mut params = ModelParams::zeros(&config)?;
    let body = &buf[8 + header_len..];
    let expected = 8 * params.allocated_scalars();
    if body.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes of tensors, found {}",
            body.len()
        )));
    }
    let mut chunks = body.chunks_exact(8);
    for (_, t) in params.tensors_mut() {
        for v in t.as_mut_slice() {
            *v = f64::from_le_bytes(chunks.next().expect("length checked").try_into().expect("8 bytes"));
        }
    }
    if !params.is_finite() {
        return Err(bad("checkpoint holds non-finite values".into()));
    }
    Ok(Model { config, params })
}

pub fn write_checkpoint(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model)?).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&buf)
}
