//! Model persistence: a JSON manifest (architecture, lag, mode, neighbour
//! list, normalization records, weight index, format version) followed by
//! the weights as little-endian f64 in manifest order, all under a SHA-256
//! trailer.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TrainError;
use crate::nn::{Model, ModelKind, ModelSpec};
use crate::preprocess::{Metric, NormalizationRecord};
use crate::spatial::PredictionMode;

pub const MODEL_MAGIC: &[u8; 4] = b"APFM";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted predictor plus everything needed to apply it online.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: Model,
    pub kind: ModelKind,
    pub target_ap: String,
    pub metric: Metric,
    pub mode: PredictionMode,
    pub lag: usize,
    /// Neighbours in input-column order (correlation descending).
    pub neighbors: Vec<(String, f64)>,
    /// Target's record first, then one per neighbour column.
    pub normalization: Vec<NormalizationRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    kind: ModelKind,
    target_ap: String,
    metric: Metric,
    mode: PredictionMode,
    lag: usize,
    neighbors: Vec<(String, f64)>,
    normalization: Vec<NormalizationRecord>,
    spec: ModelSpec,
    weights: Vec<WeightEntry>,
}

/// Serializes the model file (atomically: temp file + rename).
pub fn save_model(trained: &TrainedModel, path: &Path) -> Result<(), TrainError> {
    let names = trained.model.param_names();
    let tensors = trained.model.param_tensors();
    let manifest = Manifest {
        format_version: MODEL_FORMAT_VERSION,
        kind: trained.kind,
        target_ap: trained.target_ap.clone(),
        metric: trained.metric,
        mode: trained.mode,
        lag: trained.lag,
        neighbors: trained.neighbors.clone(),
        normalization: trained.normalization.clone(),
        spec: trained.model.spec().clone(),
        weights: names
            .iter()
            .zip(&tensors)
            .map(|(name, t)| WeightEntry {
                name: name.clone(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let manifest_json = serde_json::to_vec(&manifest).map_err(TrainError::Manifest)?;

    let mut bytes = Vec::new();
    bytes.extend_from_slice(MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(manifest_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&manifest_json);
    for t in &tensors {
        for v in t.data() {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    let digest = Sha256::digest(&bytes);
    bytes.extend_from_slice(&digest);

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Reads a model file back, verifying version, checksum and weight shapes.
pub fn load_model(path: &Path) -> Result<TrainedModel, TrainError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 4 + 4 + 8 + 32 {
        return Err(TrainError::Corrupted("file shorter than header".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(TrainError::Corrupted("checksum mismatch".into()));
    }
    if &body[..4] != MODEL_MAGIC {
        return Err(TrainError::Corrupted("bad magic".into()));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != MODEL_FORMAT_VERSION {
        return Err(TrainError::VersionMismatch {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let manifest_len = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
    let manifest_end = 16usize
        .checked_add(manifest_len)
        .filter(|end| *end <= body.len())
        .ok_or_else(|| TrainError::Corrupted("manifest length out of range".into()))?;
    let manifest: Manifest =
        serde_json::from_slice(&body[16..manifest_end]).map_err(TrainError::Manifest)?;

    let mut model = Model::new(&manifest.spec)?;
    let names = model.param_names();
    if names.len() != manifest.weights.len() {
        return Err(TrainError::Corrupted("weight index mismatch".into()));
    }
    let mut cursor = manifest_end;
    for ((tensor, name), entry) in model
        .param_tensors_mut()
        .into_iter()
        .zip(&names)
        .zip(&manifest.weights)
    {
        if name != &entry.name || tensor.shape() != entry.shape.as_slice() {
            return Err(TrainError::Corrupted(format!(
                "weight `{}` does not match the declared layout",
                entry.name
            )));
        }
        let need = tensor.len() * 8;
        if cursor + need > body.len() {
            return Err(TrainError::Corrupted("weight blob truncated".into()));
        }
        for (k, chunk) in body[cursor..cursor + need].chunks_exact(8).enumerate() {
            tensor.data_mut()[k] = f64::from_bits(u64::from_le_bytes(chunk.try_into().unwrap()));
        }
        cursor += need;
    }
    if cursor != body.len() {
        return Err(TrainError::Corrupted("trailing bytes after weights".into()));
    }

    Ok(TrainedModel {
        model,
        kind: manifest.kind,
        target_ap: manifest.target_ap,
        metric: manifest.metric,
        mode: manifest.mode,
        lag: manifest.lag,
        neighbors: manifest.neighbors,
        normalization: manifest.normalization,
    })
}

fn io_err(path: &Path, source: std::io::Error) -> TrainError {
    TrainError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{build_model, AdamSpec, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample() -> TrainedModel {
        let spec = build_model(
            ModelKind::Lstm,
            PredictionMode::SpatioTemporal,
            6,
            5,
            42,
            AdamSpec::default(),
        )
        .unwrap();
        TrainedModel {
            model: Model::new(&spec).unwrap(),
            kind: ModelKind::Lstm,
            target_ap: "AP01".into(),
            metric: Metric::TrafficLoad,
            mode: PredictionMode::SpatioTemporal,
            lag: 6,
            neighbors: vec![("AP02".into(), 0.91), ("AP03".into(), 0.77)],
            normalization: vec![NormalizationRecord {
                ap_name: "AP01".into(),
                metric: Metric::TrafficLoad,
                max_value: 812.0,
                computed_over: (0, 100),
            }],
        }
    }

    #[test]
    fn round_trip_preserves_predictions_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        let trained = sample();
        save_model(&trained, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.lag, 6);
        assert_eq!(loaded.neighbors.len(), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let input = Tensor::from_vec(
                &[6, 6],
                (0..36).map(|_| rng.gen_range(0.0..1.0)).collect(),
            )
            .unwrap();
            let a = trained.model.predict(&input).unwrap();
            let b = loaded.model.predict(&input).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        save_model(&sample(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 40]).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(TrainError::Corrupted(_))
        ));
    }

    #[test]
    fn flipped_weight_byte_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        save_model(&sample(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_model(&path), Err(TrainError::Corrupted(_))));
    }

    #[test]
    fn version_bump_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        save_model(&sample(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[4] = 99; // version field
        let digest = Sha256::digest(&bytes[..bytes.len() - 32]);
        let n = bytes.len();
        bytes[n - 32..].copy_from_slice(&digest);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(TrainError::VersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn save_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.model");
        let b = dir.path().join("b.model");
        let trained = sample();
        save_model(&trained, &a).unwrap();
        save_model(&trained, &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }
}
