use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, SuiteConfig, TerrainParams};
use crate::scalar::Scalar;

/// Serializes an instance as a compact JSON document. Floats are written in
/// shortest round-trip form, so parsing restores them bit-for-bit.
pub fn serialize_instance<T: Scalar>(inst: &Instance<T>) -> Vec<u8> {
    serde_json::to_vec(inst).expect("instance serialization is infallible")
}

pub fn deserialize_instance<T: Scalar>(bytes: &[u8]) -> Result<Instance<T>, InstanceError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let inst: Instance<T> = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        InstanceError::Parse {
            field,
            message: e.into_inner().to_string(),
        }
    })?;
    inst.validate()?;
    Ok(inst)
}

fn io_err(path: &Path, source: std::io::Error) -> InstanceError {
    InstanceError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_instance(path: &Path) -> Result<Instance<f64>, InstanceError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    deserialize_instance(&bytes).map_err(|e| e.with_id(&path.display().to_string()))
}

/// Generator inputs recorded next to a suite so it can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteProvenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub densities: Vec<usize>,
    pub terrain_params: Vec<TerrainParams>,
    pub config: SuiteConfig,
}

impl SuiteProvenance {
    pub fn new(seed: u64, densities: &[usize], terrain_params: &[TerrainParams], config: &SuiteConfig) -> Self {
        Self {
            tool: "uavbench".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            densities: densities.to_vec(),
            terrain_params: terrain_params.to_vec(),
            config: config.clone(),
        }
    }
}

/// Suite manifest: instance file paths (relative to the manifest's
/// directory) plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub instances: Vec<String>,
    pub provenance: SuiteProvenance,
}

impl SuiteManifest {
    pub fn resolve(&self, manifest_path: &Path) -> Vec<PathBuf> {
        let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        self.instances.iter().map(|p| base.join(p)).collect()
    }
}

/// Writes `<id>.json` per instance and `manifest.json` into `dir`.
/// Returns the manifest path.
pub fn write_suite(
    dir: &Path,
    instances: &[Instance<f64>],
    provenance: SuiteProvenance,
) -> Result<PathBuf, InstanceError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::with_capacity(instances.len());
    for inst in instances {
        let name = format!("{}.json", inst.id);
        let path = dir.join(&name);
        fs::write(&path, serialize_instance(inst)).map_err(|e| io_err(&path, e))?;
        files.push(name);
    }
    let manifest = SuiteManifest {
        instances: files,
        provenance,
    };
    let path = dir.join("manifest.json");
    let body = serde_json::to_vec_pretty(&manifest).expect("manifest serialization is infallible");
    fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

pub fn load_manifest(path: &Path) -> Result<SuiteManifest, InstanceError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Parse {
        field: format!("{}: {}", path.display(), e.path()),
        message: e.into_inner().to_string(),
    })
}

/// Loads every instance listed in a manifest. Missing files are reported
/// before any instance is parsed.
pub fn load_suite(manifest_path: &Path) -> Result<Vec<Instance<f64>>, InstanceError> {
    let manifest = load_manifest(manifest_path)?;
    let paths = manifest.resolve(manifest_path);
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(io_err(
            missing,
            std::io::Error::new(std::io::ErrorKind::NotFound, "instance file not found"),
        ));
    }
    paths.iter().map(|p| load_instance(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instancegen::{build_suite, TerrainParams};

    fn instance(count: usize) -> Instance<f64> {
        let p = TerrainParams {
            iterations: 5,
            mesh_size: 40,
            initial_elevation: 3.0,
            initial_roughness: 12.0,
            roughness_variation: 50.0,
            seed: 2,
        };
        build_suite(&[p], &[count], 5).unwrap().remove(0)
    }

    #[test]
    fn round_trip_is_exact() {
        let inst = instance(15);
        let bytes = serialize_instance(&inst);
        let back: Instance<f64> = deserialize_instance(&bytes).unwrap();
        assert_eq!(back, inst);
        assert_eq!(serialize_instance(&back), bytes);
    }

    #[test]
    fn schema_field_names() {
        let inst = instance(1);
        let v: serde_json::Value = serde_json::from_slice(&serialize_instance(&inst)).unwrap();
        for key in [
            "id", "terrain", "threats", "start", "goal", "h_min", "h_max", "uav_diameter",
            "danger_margin", "j_pen", "weights", "beta_turn", "beta_climb", "density_class",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["terrain"]["heights"].is_array());
        assert_eq!(v["terrain"]["heights"].as_array().unwrap().len(), 40 * 40);
        let t = &v["threats"][0];
        for key in ["cx", "cy", "r", "h"] {
            assert!(t.get(key).is_some());
        }
        assert_eq!(v["start"].as_array().unwrap().len(), 3);
        assert_eq!(v["density_class"], "low");
    }

    #[test]
    fn zero_threats_round_trip() {
        let inst = instance(0);
        let bytes = serialize_instance(&inst);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("\"threats\":[]"));
        assert_eq!(deserialize_instance::<f64>(&bytes).unwrap(), inst);
    }

    #[test]
    fn truncated_input_fails() {
        let bytes = serialize_instance(&instance(3));
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(deserialize_instance::<f64>(cut), Err(InstanceError::Parse { .. })));
    }

    #[test]
    fn errors_name_the_field() {
        let mut v: serde_json::Value = serde_json::from_slice(&serialize_instance(&instance(2))).unwrap();
        v["h_max"] = serde_json::json!("tall");
        let err = deserialize_instance::<f64>(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert!(err.to_string().contains("h_max"), "{err}");

        let mut v: serde_json::Value = serde_json::from_slice(&serialize_instance(&instance(2))).unwrap();
        v.as_object_mut().unwrap().remove("j_pen");
        let err = deserialize_instance::<f64>(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert!(err.to_string().contains("j_pen"), "{err}");

        let mut v: serde_json::Value = serde_json::from_slice(&serialize_instance(&instance(2))).unwrap();
        v["terrain"]["heights"].as_array_mut().unwrap().pop();
        let err = deserialize_instance::<f64>(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert!(err.to_string().contains("terrain.heights"), "{err}");
    }

    #[test]
    fn suite_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let insts = vec![instance(1), instance(2)];
        let prov = SuiteProvenance::new(5, &[1, 2], &[], &SuiteConfig::default());
        let mut renamed = insts.clone();
        renamed[1].id = "other".into();
        let path = write_suite(dir.path(), &renamed, prov).unwrap();
        let loaded = load_suite(&path).unwrap();
        assert_eq!(loaded, renamed);

        std::fs::remove_file(dir.path().join("other.json")).unwrap();
        assert!(matches!(load_suite(&path), Err(InstanceError::Io { .. })));
    }
}
