//! JSON instance files: `{"n": 3, "W": [...], "A": [...], "seed": 7}` with
//! row-major flattened matrices.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{GqssInstance, Matrix, SYMMETRY_TOL};
use crate::transform::preprocess_gqss;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceFile {
    pub fn from_instance(inst: &GqssInstance, seed: Option<u64>) -> Self {
        Self {
            n: inst.dim(),
            w: inst.w().as_flat().to_vec(),
            a: inst.a().as_flat().to_vec(),
            seed,
        }
    }

    /// Rejects matrices that are not symmetric to within rounding, then
    /// applies the usual preprocessing.
    pub fn to_instance(&self) -> Result<GqssInstance> {
        let w = Matrix::from_flat(self.n, self.w.clone())?;
        let a = Matrix::from_flat(self.n, self.a.clone())?;
        w.check_symmetric(SYMMETRY_TOL)?;
        a.check_symmetric(SYMMETRY_TOL)?;
        preprocess_gqss(&w, &[a])
    }
}

pub fn parse_instance(json: &str) -> Result<GqssInstance> {
    serde_json::from_str::<InstanceFile>(json)?.to_instance()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<GqssInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &GqssInstance, seed: Option<u64>) -> Result<()> {
    let json = serde_json::to_string_pretty(&InstanceFile::from_instance(inst, seed))?;
    fs::write(path, json + "\n")?;
    Ok(())
}
