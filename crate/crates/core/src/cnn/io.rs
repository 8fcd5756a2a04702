//! Weight files: `b"TFW1"`, a little-endian `u32` header length, a JSON
//! header, then every parameter as a little-endian `f64` in layout order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelConfig, ParamSlot};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TFW1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub config: ModelConfig,
    pub layers: Vec<ParamSlot>,
    pub seed: u64,
    pub num_params: usize,
}

pub fn encode_weights(model: &Model, seed: u64) -> Result<Vec<u8>> {
    let header = WeightsHeader {
        config: model.config().clone(),
        layers: model.slots().to_vec(),
        seed,
        num_params: model.num_params(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(8 + json.len() + 8 * model.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_weights(bytes: &[u8]) -> Result<(Model, WeightsHeader)> {
    let bad = |detail: &str| Error::Format {
        what: "weights",
        detail: detail.into(),
    };
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(bad("missing TFW1 magic"));
    }
    let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = bytes.get(8..8 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: WeightsHeader = serde_json::from_slice(body)?;
    let block = &bytes[8 + hlen..];
    if block.len() != 8 * header.num_params {
        return Err(bad("parameter block length does not match header"));
    }
    let params = block
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let model = Model::from_params(header.config.clone(), params)?;
    if model.slots() != header.layers.as_slice() {
        return Err(bad("layer list does not match the configured stack"));
    }
    Ok((model, header))
}

pub fn save_weights(model: &Model, seed: u64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_weights(model, seed)?).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<(Model, WeightsHeader)> {
    let path = path.as_ref();
    decode_weights(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let model = Model::build(ModelConfig::table_one(24, 26), 8).unwrap();
        let bytes = encode_weights(&model, 8).unwrap();
        let (back, header) = decode_weights(&bytes).unwrap();
        assert_eq!(back, model);
        assert_eq!(header.seed, 8);
        let mut truncated = bytes.clone();
        truncated.pop();
        assert!(decode_weights(&truncated).is_err());
        assert!(decode_weights(b"nope").is_err());
    }
}
