use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::Model;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

const FORMAT: &str = "vgrnn-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    trained: bool,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    params: Vec<NamedTensor>,
}

/// Serialises the model. Floats are written with enough digits to read
/// back bit-for-bit.
pub fn checkpoint_to_string(model: &Model, meta: &BTreeMap<String, String>) -> Result<String> {
    let params = model.params().iter().map(|(name, t)| {
        if !t.is_finite() {
            return Err(Error::Checkpoint(format!("parameter `{name}` is not finite")));
        }
        Ok(NamedTensor {
            name: name.to_string(),
            rows: t.rows(),
            cols: t.cols(),
            data: t.data().to_vec(),
        })
    });
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        config: model.config().clone(),
        trained: model.is_trained(),
        meta: meta.clone(),
        params: params.collect::<Result<_>>()?,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn checkpoint_from_str(text: &str) -> Result<(Model, BTreeMap<String, String>)> {
    let file: CheckpointFile = serde_json::from_str(text)?;
    if file.format != FORMAT {
        return Err(Error::Checkpoint(format!("unknown format `{}`", file.format)));
    }
    if file.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {} (expected {VERSION})",
            file.version
        )));
    }
    let mut model = Model::new(file.config, 0)?;
    if file.params.len() != model.params().len() {
        return Err(Error::Checkpoint(format!(
            "expected {} parameters, found {}",
            model.params().len(),
            file.params.len()
        )));
    }
    for p in file.params {
        let store = model.params_mut();
        let id = store
            .find(&p.name)
            .ok_or_else(|| Error::Checkpoint(format!("unexpected parameter `{}`", p.name)))?;
        let expected = store.value(id).shape();
        if expected != (p.rows, p.cols) {
            return Err(Error::Checkpoint(format!(
                "parameter `{}` has shape {:?}, expected {:?}",
                p.name,
                (p.rows, p.cols),
                expected
            )));
        }
        *store.value_mut(id) = Tensor::from_vec(p.rows, p.cols, p.data)
            .map_err(|e| Error::Checkpoint(format!("parameter `{}`: {e}", p.name)))?;
    }
    model.set_trained(file.trained);
    Ok((model, file.meta))
}

pub fn save_checkpoint(
    model: &Model,
    meta: &BTreeMap<String, String>,
    path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(path, checkpoint_to_string(model, meta)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, BTreeMap<String, String>)> {
    checkpoint_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn round_trip_is_bit_exact() {
        for kind in ModelKind::ALL {
            let mut m = Model::new(ModelConfig::new(kind, 7), 3).unwrap();
            let id = m.params().ids().next().unwrap();
            m.params_mut().value_mut(id).set(0, 0, 0.1 + 0.2);
            m.set_trained(true);
            let meta = BTreeMap::from([("seed".to_string(), "3".to_string())]);
            let (back, meta_back) = checkpoint_from_str(&checkpoint_to_string(&m, &meta).unwrap()).unwrap();
            assert_eq!(meta_back, meta);
            assert!(back.is_trained());
            assert_eq!(back.config(), m.config());
            for ((na, a), (nb, b)) in m.params().iter().zip(back.params().iter()) {
                assert_eq!(na, nb);
                let bits = |t: &Tensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(a), bits(b), "{na}");
            }
        }
    }

    #[test]
    fn rejects_wrong_version_and_shapes() {
        let m = Model::new(ModelConfig::new(ModelKind::Vgrnn, 5), 1).unwrap();
        let text = checkpoint_to_string(&m, &BTreeMap::new()).unwrap();
        let bumped = text.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(checkpoint_from_str(&bumped), Err(Error::Checkpoint(_))));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["config"]["input_dim"] = 6.into();
        assert!(matches!(
            checkpoint_from_str(&v.to_string()),
            Err(Error::Checkpoint(_))
        ));
    }
}
