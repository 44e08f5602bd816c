//! JSON problem files.
//!
//! ```json
//! {
//!   "objective": { "type": "linear", "c": [1, 3] },
//!   "A": [[1, -1]],
//!   "b": [0],
//!   "set": { "type": "product", "components": [
//!     { "type": "box", "lower": [2], "upper": [null] },
//!     { "type": "free", "dim": 1 }
//!   ]},
//!   "rho": 1.0
//! }
//! ```
//!
//! `null` box bounds are infinite. A quadratic objective carries `"Q"`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pdflow::flow::{Objective, ProblemSpec};
use pdflow::sets::SimpleSet;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub objective: ObjectiveSpec,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub set: SetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Linear {
        c: Vec<f64>,
    },
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetSpec {
    Free {
        dim: usize,
    },
    NonnegativeOrthant {
        dim: usize,
    },
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Product {
        components: Vec<SetSpec>,
    },
}

fn matrix(name: &str, rows: &[Vec<f64>], cols: usize) -> std::result::Result<DMatrix<f64>, String> {
    for (r, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "{name}: row {} has {} entries, expected {cols}",
                r + 1,
                row.len()
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

impl SetSpec {
    pub fn to_set(&self) -> pdflow::Result<SimpleSet> {
        Ok(match self {
            SetSpec::Free { dim } => SimpleSet::free(*dim),
            SetSpec::NonnegativeOrthant { dim } => SimpleSet::nonnegative(*dim),
            SetSpec::Box { lower, upper } => SimpleSet::new_box(
                lower
                    .iter()
                    .map(|l| l.unwrap_or(f64::NEG_INFINITY))
                    .collect(),
                upper.iter().map(|u| u.unwrap_or(f64::INFINITY)).collect(),
            )?,
            SetSpec::Ball { center, radius } => SimpleSet::ball(center.clone(), *radius)?,
            SetSpec::Product { components } => SimpleSet::product(
                components
                    .iter()
                    .map(SetSpec::to_set)
                    .collect::<pdflow::Result<_>>()?,
            )?,
        })
    }
}

impl ProblemFile {
    pub fn to_spec(&self) -> std::result::Result<ProblemSpec, String> {
        let (objective, n) = match &self.objective {
            ObjectiveSpec::Linear { c } => {
                (Objective::linear(DVector::from_column_slice(c)), c.len())
            }
            ObjectiveSpec::Quadratic { q, c } => {
                let q = matrix("Q", q, c.len())?;
                let objective = Objective::quadratic(q, DVector::from_column_slice(c))
                    .map_err(|e| format!("objective: {e}"))?;
                (objective, c.len())
            }
        };
        let a = matrix("A", &self.a, n)?;
        let set = self.set.to_set().map_err(|e| format!("set: {e}"))?;
        let spec = ProblemSpec::new(objective, a, DVector::from_column_slice(&self.b), set)
            .map_err(|e| e.to_string())?;
        match self.rho {
            Some(rho) => spec.with_rho(rho).map_err(|e| e.to_string()),
            None => Ok(spec),
        }
    }
}

pub fn parse_problem(text: &str, path: &Path) -> Result<ProblemSpec> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
        // serde_json appends " at line L column C"; the position is reported separately.
        let message = e.to_string();
        let detail = message
            .rsplit_once(" at line ")
            .map_or(message.as_str(), |(m, _)| m)
            .to_string();
        if e.is_data() {
            CliError::invalid(
                path,
                format!("line {}, column {}: {detail}", e.line(), e.column()),
            )
        } else {
            CliError::Syntax {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                detail,
            }
        }
    })?;
    file.to_spec()
        .map_err(|detail| CliError::invalid(path, detail))
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text, path)
}
