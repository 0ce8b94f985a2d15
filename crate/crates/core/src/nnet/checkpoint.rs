//! Binary checkpoint format.
//!
//! ```text
//! magic   8 bytes  "UQMOLNN\0"
//! version u32 LE
//! length  u32 LE   byte length of the JSON header
//! header  JSON     the network config
//! count   u64 LE   parameter count
//! params  f64 LE * count
//! ```

use super::model::TrainedModel;
use super::{NetConfig, NnetError};

const MAGIC: &[u8; 8] = b"UQMOLNN\0";
pub const CHECKPOINT_VERSION: u32 = 1;

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], NnetError> {
    if bytes.len() < n {
        return Err(NnetError::Checkpoint("truncated checkpoint".into()));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

impl TrainedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.config).expect("config serialises");
        let mut out = Vec::with_capacity(24 + header.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<TrainedModel, NnetError> {
        let b = &mut bytes;
        if take(b, 8)? != MAGIC {
            return Err(NnetError::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(b, 4)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(NnetError::Checkpoint(format!(
                "unsupported version {version}"
            )));
        }
        let len = u32::from_le_bytes(take(b, 4)?.try_into().unwrap()) as usize;
        let config: NetConfig = serde_json::from_slice(take(b, len)?)
            .map_err(|e| NnetError::Checkpoint(format!("header: {e}")))?;
        let count = u64::from_le_bytes(take(b, 8)?.try_into().unwrap()) as usize;
        let raw = take(
            b,
            count
                .checked_mul(8)
                .ok_or_else(|| NnetError::Checkpoint("bad count".into()))?,
        )?;
        if !b.is_empty() {
            return Err(NnetError::Checkpoint("trailing bytes".into()));
        }
        let params = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        TrainedModel::from_params(config, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::{Featurizer, Head};

    #[test]
    fn round_trip() {
        let c = NetConfig {
            featurizer: Featurizer::Fingerprint,
            head: Head::MeanVariance,
            hidden: 8,
            fp_length: 32,
            ..Default::default()
        };
        let m = TrainedModel::init(c, 3).unwrap();
        let bytes = m.to_bytes();
        let back = TrainedModel::from_bytes(&bytes).unwrap();
        assert_eq!(back.config, m.config);
        assert_eq!(back.params, m.params);
        assert!(TrainedModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(TrainedModel::from_bytes(&bad).is_err());
    }
}
