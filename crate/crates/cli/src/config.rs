//! Pipeline configuration: a flat TOML file whose keys mirror the command
//! line flags. Flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use arclust::kernelize::KernelSpec;
use arclust::tune::{Method, TuneOptions};
use arclust::{Codification, DissimParams, Family, Matrix, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError, Result};
use crate::io::Columns;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Euclidean distance on the unprotected columns.
    #[default]
    Euclidean,
    /// Great-circle distance in km between the lat/lon columns.
    Geodesic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<String>,
    pub class_column: Option<String>,
    pub scheme: Option<Scheme>,
    pub categories: Option<Vec<String>>,
    pub lat: Option<String>,
    pub lon: Option<String>,
    pub distance: Option<Distance>,

    pub family: Option<Family>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub w: Option<f64>,
    #[serde(rename = "U")]
    pub shift_matrix: Option<Vec<Vec<f64>>>,
    #[serde(rename = "V")]
    pub interaction: Option<Vec<Vec<f64>>>,
    pub grid: Option<PathBuf>,

    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<Method>,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub d_prime: Option<usize>,
    pub restarts: Option<usize>,
    pub epsilon: Option<f64>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    // Tables go last so the TOML writer can place them.
    pub kernel: Option<KernelSpec>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; opt: $($o:ident),*; vec: $($v:ident),*) => {
        $( if $top.$o.is_some() { $base.$o = $top.$o; } )*
        $( if !$top.$v.is_empty() { $base.$v = $top.$v; } )*
    };
}

impl PipelineConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.grid, &mut cfg.output]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Values set in `top` win.
    pub fn overlay(mut self, top: PipelineConfig) -> Self {
        let base = &mut self;
        overlay_fields!(base, top;
            opt: input, id, class_column, scheme, categories, lat, lon, distance,
                 family, u, v, w, shift_matrix, interaction, grid, method, k, k_max,
                 d_prime, restarts, epsilon, tau, seed, output, kernel;
            vec: x, s, methods);
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| usage(format!("cannot render config: {e}")))
    }

    pub fn columns(&self) -> Columns {
        Columns {
            id: self.id.clone(),
            x: self.x.clone(),
            s: self.s.clone(),
            class_column: self.class_column.clone(),
            codification: self.scheme.map(|scheme| Codification {
                scheme,
                categories: self.categories.clone(),
            }),
            lat: self.lat.clone(),
            lon: self.lon.clone(),
        }
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| usage("no input file: pass --input or set `input` in the config"))
    }

    pub fn has_params(&self) -> bool {
        self.family.is_some()
            || self.u.is_some()
            || self.v.is_some()
            || self.w.is_some()
            || self.shift_matrix.is_some()
            || self.interaction.is_some()
    }

    /// Exactly one of single parameters or a grid reference.
    pub fn check_params_or_grid(&self, want_grid: bool) -> Result<()> {
        match (self.has_params(), self.grid.is_some()) {
            (true, true) => Err(usage(
                "give either dissimilarity parameters or a grid, not both",
            )),
            (false, true) if !want_grid => Err(usage("this command takes parameters, not a grid")),
            (false, false) if want_grid => Err(usage("no grid: pass --grid or set `grid`")),
            (true, false) if want_grid => {
                Err(usage("tune takes a grid file, not single parameters"))
            }
            _ => Ok(()),
        }
    }

    /// Dissimilarity parameters for `p` protected columns, if a family is set.
    pub fn params(&self, p: usize) -> Result<Option<DissimParams>> {
        let Some(family) = self.family else {
            if self.has_params() {
                return Err(usage("parameters given without --family"));
            }
            return Ok(None);
        };
        let need =
            |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("{family} needs --{name}")));
        let matrix = |rows: &Option<Vec<Vec<f64>>>, name: &str| -> Result<Matrix> {
            match rows {
                None => Ok(Matrix::zeros(p, p)),
                Some(r) => {
                    let m = Matrix::from_rows(r).map_err(|e| usage(format!("--{name}: {e}")))?;
                    if m.rows() != p || m.cols() != p {
                        return Err(usage(format!(
                            "--{name} is {}x{} but there are {p} protected columns",
                            m.rows(),
                            m.cols()
                        )));
                    }
                    Ok(m)
                }
            }
        };
        let unused = |names: &[(&str, bool)]| -> Result<()> {
            match names.iter().find(|(_, set)| *set) {
                Some((n, _)) => Err(usage(format!("--{n} does not apply to {family}"))),
                None => Ok(()),
            }
        };
        let params = match family {
            Family::Delta1 => {
                unused(&[
                    ("u", self.u.is_some()),
                    ("v", self.v.is_some()),
                    ("w", self.w.is_some()),
                ])?;
                DissimParams::delta1(
                    matrix(&self.shift_matrix, "U")?,
                    matrix(&self.interaction, "V")?,
                )?
            }
            Family::Delta2 => {
                unused(&[
                    ("w", self.w.is_some()),
                    ("U", self.shift_matrix.is_some()),
                    ("V", self.interaction.is_some()),
                ])?;
                DissimParams::delta2(need(self.u, "u")?, need(self.v, "v")?)?
            }
            Family::Delta3 => {
                unused(&[
                    ("v", self.v.is_some()),
                    ("w", self.w.is_some()),
                    ("U", self.shift_matrix.is_some()),
                    ("V", self.interaction.is_some()),
                ])?;
                DissimParams::delta3(need(self.u, "u")?)?
            }
            Family::Delta4 => {
                unused(&[("U", self.shift_matrix.is_some())])?;
                if self.interaction.is_none() {
                    return Err(usage("delta4 needs --V"));
                }
                DissimParams::delta4(
                    matrix(&self.interaction, "V")?,
                    need(self.u, "u")?,
                    need(self.v, "v")?,
                    need(self.w, "w")?,
                )?
            }
        };
        Ok(Some(params))
    }

    pub fn tune_options(&self) -> TuneOptions {
        let mut opts = TuneOptions {
            epsilon: self.epsilon,
            kernel: self.kernel,
            ..TuneOptions::default()
        };
        if let Some(d) = self.d_prime {
            opts.d_prime = d;
        }
        if let Some(r) = self.restarts {
            opts.restarts = r;
        }
        opts
    }

    pub fn distance(&self) -> Distance {
        self.distance.unwrap_or_default()
    }
}

/// `1.5`, `1,-1;-1,0` (rows split by `;`).
pub fn parse_matrix(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("bad number `{c}`"))
                })
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(format!("`{text}` is not a square matrix"));
    }
    Ok(rows)
}

/// `linear`, `squared_coords`, `rbf:GAMMA`, `polynomial:DEGREE:COEF`.
pub fn parse_kernel(text: &str) -> std::result::Result<KernelSpec, String> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("bad number `{s}` in kernel"))
    };
    let spec = match parts.as_slice() {
        ["linear"] => KernelSpec::Linear,
        ["squared_coords"] => KernelSpec::SquaredCoords,
        ["rbf", g] => KernelSpec::Rbf { gamma: num(g)? },
        ["polynomial" | "poly", d, c] => KernelSpec::Polynomial {
            degree: d.parse().map_err(|_| format!("bad degree `{d}`"))?,
            coef: num(c)?,
        },
        _ => return Err(format!(
            "unknown kernel `{text}` (linear, squared_coords, rbf:GAMMA, polynomial:DEGREE:COEF)"
        )),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = PipelineConfig {
            k: Some(3),
            x: vec!["a".into()],
            tau: Some(0.1),
            ..Default::default()
        };
        let flags = PipelineConfig {
            k: Some(5),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.k, Some(5));
        assert_eq!(merged.x, vec!["a".to_string()]);
        assert_eq!(merged.tau, Some(0.1));
    }

    #[test]
    fn config_survives_toml() {
        let cfg = PipelineConfig {
            input: Some("data.csv".into()),
            family: Some(Family::Delta4),
            interaction: Some(vec![vec![1.0, -1.0], vec![-1.0, 0.0]]),
            u: Some(0.98),
            v: Some(20.0),
            w: Some(0.05),
            kernel: Some(KernelSpec::SquaredCoords),
            methods: vec![Method::KmeansMds, Method::Average],
            seed: Some(7),
            ..Default::default()
        };
        let text = cfg.to_toml().unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn params_need_their_flags() {
        let cfg = PipelineConfig {
            family: Some(Family::Delta2),
            u: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(
            cfg.params(1),
            Err(crate::error::CliError::Usage(_))
        ));
        let cfg = PipelineConfig {
            family: Some(Family::Delta1),
            interaction: Some(vec![vec![1.32]]),
            ..Default::default()
        };
        assert_eq!(
            cfg.params(1).unwrap().unwrap(),
            DissimParams::delta1(Matrix::zeros(1, 1), Matrix::from_rows(&[[1.32]]).unwrap())
                .unwrap()
        );
        assert!(cfg.params(2).is_err());
    }

    #[test]
    fn matrix_and_kernel_literals() {
        assert_eq!(parse_matrix("1.32").unwrap(), vec![vec![1.32]]);
        assert_eq!(
            parse_matrix("1,-1; -1,0").unwrap(),
            vec![vec![1.0, -1.0], vec![-1.0, 0.0]]
        );
        assert!(parse_matrix("1,2").is_err());
        assert_eq!(
            parse_kernel("rbf:0.5").unwrap(),
            KernelSpec::Rbf { gamma: 0.5 }
        );
        assert!(parse_kernel("rbf").is_err());
        assert!(parse_kernel("rbf:-1").is_err());
    }
}
