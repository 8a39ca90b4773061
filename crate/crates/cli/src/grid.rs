//! Parameter grid files for `tune`.
//!
//! A grid lists values per parameter; cells are the Cartesian product in a
//! fixed nesting order (patterns, then v0, then u, v, w).

use std::fs;
use std::path::Path;

use arclust::tune::Method;
use arclust::{DissimParams, Family, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub u: Vec<f64>,
    #[serde(default)]
    pub v: Vec<f64>,
    #[serde(default)]
    pub w: Vec<f64>,
    /// Intensity multiplying each interaction pattern (`V = v0 · pattern`).
    #[serde(default)]
    pub v0: Vec<f64>,
    #[serde(default)]
    pub patterns: Vec<Vec<Vec<f64>>>,
    /// Replace each pattern by `(P + Pᵀ)/2` before use.
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default, rename = "U")]
    pub shift_matrix: Option<Vec<Vec<f64>>>,
}

impl GridSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    fn patterns(&self, p: usize) -> Result<Vec<Matrix>> {
        if self.patterns.is_empty() {
            return Err(usage(format!("{} grid needs `patterns`", self.family)));
        }
        self.patterns
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let m = Matrix::from_rows(rows).map_err(|e| usage(format!("pattern {i}: {e}")))?;
                if m.rows() != p || m.cols() != p {
                    return Err(usage(format!(
                        "pattern {i} is {}x{} but there are {p} protected columns",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(if self.symmetrize { m.symmetrized()? } else { m })
            })
            .collect()
    }

    fn axis<'a>(&self, values: &'a [f64], name: &str) -> Result<&'a [f64]> {
        if values.is_empty() {
            return Err(usage(format!("{} grid needs `{name}` values", self.family)));
        }
        Ok(values)
    }

    /// Every parameter set, in grid order.
    pub fn expand(&self, p: usize) -> Result<Vec<DissimParams>> {
        let unit = [1.0];
        let v0: &[f64] = if self.v0.is_empty() { &unit } else { &self.v0 };
        let mut out = Vec::new();
        match self.family {
            Family::Delta1 => {
                let shift = match &self.shift_matrix {
                    Some(r) => Matrix::from_rows(r).map_err(|e| usage(format!("U: {e}")))?,
                    None => Matrix::zeros(p, p),
                };
                for pat in self.patterns(p)? {
                    for &c in v0 {
                        out.push(DissimParams::delta1(shift.clone(), pat.scaled(c))?);
                    }
                }
            }
            Family::Delta2 => {
                for &u in self.axis(&self.u, "u")? {
                    for &v in self.axis(&self.v, "v")? {
                        out.push(DissimParams::delta2(u, v)?);
                    }
                }
            }
            Family::Delta3 => {
                for &u in self.axis(&self.u, "u")? {
                    out.push(DissimParams::delta3(u)?);
                }
            }
            Family::Delta4 => {
                for pat in self.patterns(p)? {
                    for &c in v0 {
                        for &u in self.axis(&self.u, "u")? {
                            for &v in self.axis(&self.v, "v")? {
                                for &w in self.axis(&self.w, "w")? {
                                    out.push(DissimParams::delta4(pat.scaled(c), u, v, w)?);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
