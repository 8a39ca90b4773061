//! On-disk formats: datasets, dissimilarity matrices (CSV and ARDM binary),
//! embeddings, partitions, dendrograms and tuner cells.
//!
//! Floats are written with Rust's shortest round-trip formatting, so text
//! files reload bit for bit.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use arclust::embed::Embedding;
use arclust::hier::Dendrogram;
use arclust::tune::GridCell;
use arclust::types::{encode_classes, validate_counts};
use arclust::{Codification, Dataset, Matrix, Partition, Scheme};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use arclust::dissim::DissimMatrix;

use crate::error::{data, usage, CliError, Result};

pub const ARDM_MAGIC: &[u8; 4] = b"ARDM";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(cell: &str, what: impl FnOnce() -> String) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| data(format!("{}: cannot parse `{cell}` as a number", what())))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| data(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| data(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| data(e.to_string()))?;
    }
    w.into_inner().map_err(|e| data(e.to_string()))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    data(format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------- datasets

/// Which CSV columns play which role.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Columns {
    pub id: Option<String>,
    /// Unprotected attributes. Empty means every column whose name starts
    /// with `x` (or lat/lon when those are given and nothing else matches).
    pub x: Vec<String>,
    /// Numeric protected columns. Empty (and no class column) means every
    /// column whose name starts with `s`.
    pub s: Vec<String>,
    /// A single categorical protected column, encoded with `codification`.
    pub class_column: Option<String>,
    pub codification: Option<Codification>,
    pub lat: Option<String>,
    pub lon: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Latitude and longitude in degrees, when declared.
    pub lat_lon: Option<(Vec<f64>, Vec<f64>)>,
    /// One name per column of `dataset.class_counts()`.
    pub class_names: Vec<String>,
    pub x_names: Vec<String>,
}

pub fn load_dataset(path: &Path, cols: &Columns) -> Result<Loaded> {
    let mut rdr = csv_reader(path)?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let position = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data(format!("{}: missing column `{name}`", path.display())))
    };

    let id_name = cols
        .id
        .clone()
        .or_else(|| headers.iter().any(|h| h == "id").then(|| "id".to_string()));
    let lat_lon = match (&cols.lat, &cols.lon) {
        (Some(a), Some(b)) => Some((a.clone(), b.clone())),
        (None, None) => None,
        _ => return Err(usage("give both --lat and --lon or neither")),
    };

    let mut x_names = cols.x.clone();
    if x_names.is_empty() {
        x_names = headers
            .iter()
            .filter(|h| h.starts_with('x'))
            .cloned()
            .collect();
    }
    if x_names.is_empty() {
        if let Some((a, b)) = &lat_lon {
            x_names = vec![a.clone(), b.clone()];
        }
    }
    if x_names.is_empty() {
        return Err(usage("no unprotected columns: pass --x"));
    }
    let s_names: Vec<String> = if cols.class_column.is_some() {
        if !cols.s.is_empty() {
            return Err(usage(
                "give either protected columns or a class column, not both",
            ));
        }
        Vec::new()
    } else if cols.s.is_empty() {
        headers
            .iter()
            .filter(|h| h.starts_with('s'))
            .cloned()
            .collect()
    } else {
        cols.s.clone()
    };
    if s_names.is_empty() && cols.class_column.is_none() {
        return Err(usage("no protected columns: pass --s or --class-column"));
    }

    // Column roles must not overlap (lat/lon may double as x when x was inferred).
    let mut seen = HashSet::new();
    let mut roles: Vec<&String> = x_names.iter().chain(&s_names).collect();
    roles.extend(id_name.iter());
    roles.extend(cols.class_column.iter());
    if !cols.x.is_empty() || !x_names.iter().any(|x| Some(x) == cols.lat.as_ref()) {
        roles.extend(cols.lat.iter().chain(cols.lon.iter()));
    }
    for r in roles {
        if !seen.insert(r) {
            return Err(usage(format!("column `{r}` is given more than one role")));
        }
    }

    let x_idx: Vec<usize> = x_names.iter().map(|n| position(n)).collect::<Result<_>>()?;
    let s_idx: Vec<usize> = s_names.iter().map(|n| position(n)).collect::<Result<_>>()?;
    let id_idx = id_name.as_deref().map(position).transpose()?;
    let class_idx = cols.class_column.as_deref().map(position).transpose()?;
    let geo_idx = match &lat_lon {
        Some((a, b)) => Some((position(a)?, position(b)?)),
        None => None,
    };

    let mut x = Vec::new();
    let mut s = Vec::new();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let (mut lat, mut lon) = (Vec::new(), Vec::new());
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = r + 2;
        let cell = |i: usize| -> Result<&str> {
            match rec.get(i) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(data(format!(
                    "{} row {line}: missing value in column `{}`",
                    path.display(),
                    headers[i]
                ))),
            }
        };
        let num = |i: usize| -> Result<f64> {
            parse_f64(cell(i)?, || {
                format!("{} row {line}, column `{}`", path.display(), headers[i])
            })
        };
        for &i in &x_idx {
            x.push(num(i)?);
        }
        for &i in &s_idx {
            s.push(num(i)?);
        }
        if let Some(i) = id_idx {
            ids.push(cell(i)?.to_string());
        }
        if let Some(i) = class_idx {
            labels.push(cell(i)?.to_string());
        }
        if let Some((a, b)) = geo_idx {
            lat.push(num(a)?);
            lon.push(num(b)?);
        }
    }
    let n = x.len() / x_idx.len();
    if n == 0 {
        return Err(data(format!("{}: no data rows", path.display())));
    }
    if id_idx.is_some() {
        let mut unique = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !unique.insert(id.as_str())) {
            return Err(data(format!("{}: duplicate id `{dup}`", path.display())));
        }
    }

    let x = Matrix::from_vec(n, x_idx.len(), x)?;
    let (s, class_names) = if class_idx.is_some() {
        let codification = cols
            .codification
            .clone()
            .unwrap_or_else(|| Codification::new(Scheme::OneHot));
        let enc = encode_classes(&labels, &codification)?;
        let names = if enc.categories.is_empty() {
            vec![cols.class_column.clone().unwrap_or_default()]
        } else {
            enc.categories
        };
        (enc.matrix, names)
    } else {
        let m = Matrix::from_vec(n, s_idx.len(), s)?;
        if cols.codification.as_ref().map(|c| c.scheme) == Some(Scheme::Counts) {
            validate_counts(&m)?;
        }
        let signed = m.cols() == 1 && m.as_slice().iter().all(|&v| v == 1.0 || v == -1.0);
        let names = if signed {
            vec![format!("{}=+1", s_names[0]), format!("{}=-1", s_names[0])]
        } else {
            s_names.clone()
        };
        (m, names)
    };
    let dataset = Dataset::with_ids(x, s, id_idx.map(|_| ids))?;
    Ok(Loaded {
        dataset,
        lat_lon: geo_idx.map(|_| (lat, lon)),
        class_names,
        x_names,
    })
}

/// Header `id` (when present), `x1..xd`, then the protected columns.
pub fn dataset_csv(data: &Dataset, s_names: &[&str]) -> Result<Vec<u8>> {
    let (x, s) = (data.x(), data.s());
    if s_names.len() != s.cols() {
        return Err(usage(format!(
            "{} protected column names for {} columns",
            s_names.len(),
            s.cols()
        )));
    }
    let mut header = Vec::new();
    if data.ids().is_some() {
        header.push("id".to_string());
    }
    header.extend((1..=x.cols()).map(|j| format!("x{j}")));
    header.extend(s_names.iter().map(|n| n.to_string()));
    let rows = (0..data.len()).map(|i| {
        let mut r = Vec::with_capacity(header.len());
        if let Some(ids) = data.ids() {
            r.push(ids[i].clone());
        }
        r.extend(x.row(i).iter().map(|&v| fmt_f64(v)));
        r.extend(s.row(i).iter().map(|&v| fmt_f64(v)));
        r
    });
    csv_bytes(&header, rows)
}

// ---------------------------------------------------------------- matrices

fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Dense CSV with a header row of ids.
pub fn write_matrix_csv(path: &Path, m: &DissimMatrix, ids: Option<&[String]>) -> Result<()> {
    let n = m.n();
    let header = ids.map_or_else(|| default_ids(n), <[String]>::to_vec);
    let rows = m
        .values()
        .iter_rows()
        .map(|r| r.iter().map(|&v| fmt_f64(v)).collect());
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_matrix_csv(path: &Path) -> Result<(DissimMatrix, Vec<String>)> {
    let mut rdr = csv_reader(path)?;
    let ids: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let n = ids.len();
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (j, cell) in rec.iter().enumerate() {
            values.push(parse_f64(cell, || {
                format!("{} row {}, column {}", path.display(), r + 2, j + 1)
            })?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(data(format!("{}: {n} ids but {rows} rows", path.display())));
    }
    let m = DissimMatrix::from_values(Matrix::from_vec(n, n, values)?)?;
    Ok((m, ids))
}

/// `ARDM`, u64 n, lower triangle row by row (diagonal included), f64 shift,
/// u8 square-root flag. Little-endian.
pub fn ardm_bytes(m: &DissimMatrix) -> Vec<u8> {
    let n = m.n();
    let mut out = Vec::with_capacity(4 + 8 + 8 * n * (n + 1) / 2 + 9);
    out.extend_from_slice(ARDM_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        for j in 0..=i {
            out.extend_from_slice(&m.get(i, j).to_le_bytes());
        }
    }
    out.extend_from_slice(&m.shift().to_le_bytes());
    out.push(u8::from(m.sqrt_applied()));
    out
}

pub fn parse_ardm(bytes: &[u8]) -> Result<DissimMatrix> {
    let bad = |msg: &str| data(format!("not an ARDM matrix: {msg}"));
    if bytes.len() < 12 || &bytes[..4] != ARDM_MAGIC {
        return Err(bad("wrong magic"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| bad("size overflow"))?;
    let tri = n
        .checked_mul(n + 1)
        .map(|v| v / 2)
        .ok_or_else(|| bad("size overflow"))?;
    let expected = tri
        .checked_mul(8)
        .and_then(|v| v.checked_add(12 + 9))
        .ok_or_else(|| bad("size overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("{} bytes, expected {expected}", bytes.len())));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[12 + 8 * k..20 + 8 * k].try_into().unwrap());
    let mut values = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            let v = f(k);
            values[(i, j)] = v;
            values[(j, i)] = v;
            k += 1;
        }
    }
    let shift = f(tri);
    let flag = match bytes[expected - 1] {
        0 => false,
        1 => true,
        other => return Err(bad(&format!("square-root flag {other}"))),
    };
    Ok(DissimMatrix::from_parts(values, shift, flag, None)?)
}

pub fn write_ardm(path: &Path, m: &DissimMatrix) -> Result<()> {
    write_atomic(path, &ardm_bytes(m))
}

pub fn read_ardm(path: &Path) -> Result<DissimMatrix> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_ardm(&bytes).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn is_ardm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ardm"))
}

/// Binary when the extension is `.ardm`, CSV otherwise.
pub fn write_matrix(path: &Path, m: &DissimMatrix, ids: Option<&[String]>) -> Result<()> {
    if is_ardm(path) {
        write_ardm(path, m)
    } else {
        write_matrix_csv(path, m, ids)
    }
}

pub fn read_matrix(path: &Path) -> Result<DissimMatrix> {
    if is_ardm(path) {
        read_ardm(path)
    } else {
        read_matrix_csv(path).map(|(m, _)| m)
    }
}

// ---------------------------------------------------------------- embeddings

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EmbeddingMeta {
    eigenvalues: Vec<f64>,
    negative_mass: f64,
    requested_dim: usize,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Coordinates as CSV (`id,dim1,..`) plus a JSON sidecar with the spectrum.
pub fn write_embedding(path: &Path, e: &Embedding, ids: Option<&[String]>) -> Result<()> {
    let n = e.coords.rows();
    let ids = ids.map_or_else(|| default_ids(n), <[String]>::to_vec);
    let mut header = vec!["id".to_string()];
    header.extend((1..=e.dim()).map(|j| format!("dim{j}")));
    let rows = (0..n).map(|i| {
        let mut r = vec![ids[i].clone()];
        r.extend(e.coords.row(i).iter().map(|&v| fmt_f64(v)));
        r
    });
    write_atomic(path, &csv_bytes(&header, rows)?)?;
    write_json(
        &sidecar_path(path),
        &EmbeddingMeta {
            eigenvalues: e.eigenvalues.clone(),
            negative_mass: e.negative_mass,
            requested_dim: e.requested_dim,
        },
    )
}

/// Reads coordinates; the sidecar is optional.
pub fn read_embedding(path: &Path) -> Result<(Embedding, Vec<String>)> {
    let mut rdr = csv_reader(path)?;
    let dim = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .len()
        .saturating_sub(1);
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        ids.push(rec.get(0).unwrap_or_default().to_string());
        for j in 1..=dim {
            let cell = rec.get(j).unwrap_or("");
            coords.push(parse_f64(cell, || {
                format!("{} row {}", path.display(), r + 2)
            })?);
        }
    }
    let coords = Matrix::from_vec(ids.len(), dim, coords)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        read_json::<EmbeddingMeta>(&side)?
    } else {
        EmbeddingMeta {
            eigenvalues: Vec::new(),
            negative_mass: f64::NAN,
            requested_dim: dim,
        }
    };
    Ok((
        Embedding {
            coords,
            eigenvalues: meta.eigenvalues,
            negative_mass: meta.negative_mass,
            requested_dim: meta.requested_dim,
        },
        ids,
    ))
}

// ---------------------------------------------------------------- partitions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub k: usize,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<String>>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Per-cluster class proportions, one row per cluster.
    #[serde(default)]
    pub proportions: Vec<Vec<f64>>,
}

impl PartitionFile {
    pub fn new(p: &Partition, ids: Option<&[String]>) -> Self {
        PartitionFile {
            k: p.k(),
            labels: p.labels().to_vec(),
            ids: ids.map(<[String]>::to_vec),
            sizes: p.sizes(),
            proportions: p.proportions().to_rows(),
        }
    }
}

pub fn write_partition_json(path: &Path, p: &Partition, ids: Option<&[String]>) -> Result<()> {
    write_json(path, &PartitionFile::new(p, ids))
}

pub fn write_partition_csv(path: &Path, p: &Partition, ids: Option<&[String]>) -> Result<()> {
    let ids = ids.map_or_else(|| default_ids(p.len()), <[String]>::to_vec);
    let header = vec!["id".to_string(), "cluster".to_string()];
    let rows = p
        .labels()
        .iter()
        .zip(ids)
        .map(|(l, id)| vec![id, l.to_string()]);
    write_atomic(path, &csv_bytes(&header, rows)?)
}

/// Reads labels from JSON (`.json`) or CSV (`id,cluster`). Labels are
/// renumbered `0..K` by first appearance if they are not already contiguous.
pub fn read_partition(path: &Path) -> Result<(Partition, Option<Vec<String>>)> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (labels, ids) = if is_json {
        let f: PartitionFile = read_json(path)?;
        (f.labels, f.ids)
    } else {
        let mut rdr = csv_reader(path)?;
        let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        let col = headers
            .iter()
            .position(|h| h == "cluster")
            .ok_or_else(|| data(format!("{}: missing column `cluster`", path.display())))?;
        let id_col = headers.iter().position(|h| h == "id");
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let cell = rec.get(col).unwrap_or("");
            labels.push(cell.parse::<usize>().map_err(|_| {
                data(format!(
                    "{} row {}: bad cluster label `{cell}`",
                    path.display(),
                    r + 2
                ))
            })?);
            if let Some(c) = id_col {
                ids.push(rec.get(c).unwrap_or("").to_string());
            }
        }
        (labels, id_col.map(|_| ids))
    };
    let partition = match Partition::new(labels.clone()) {
        Ok(p) => p,
        Err(_) => Partition::from_raw_labels(&labels)?,
    };
    Ok((partition, ids))
}

// ---------------------------------------------------------------- dendrograms

pub fn write_dendrogram_csv(path: &Path, d: &Dendrogram) -> Result<()> {
    let header: Vec<String> = ["step", "a", "b", "height", "size"]
        .map(String::from)
        .to_vec();
    let rows = d.merges().iter().enumerate().map(|(t, m)| {
        vec![
            t.to_string(),
            m.a.to_string(),
            m.b.to_string(),
            fmt_f64(m.height),
            m.size.to_string(),
        ]
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_dendrogram_json(path: &Path) -> Result<Dendrogram> {
    let d: Dendrogram = read_json(path)?;
    d.validate()?;
    Ok(d)
}

// ---------------------------------------------------------------- tuner cells

pub fn write_cells_csv(path: &Path, cells: &[GridCell]) -> Result<()> {
    let header: Vec<String> = [
        "method",
        "k",
        "index",
        "family",
        "params",
        "unfairness",
        "avg_silhouette",
        "seed",
        "feasible",
        "error",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::with_capacity(cells.len());
    for c in cells {
        rows.push(vec![
            c.method.to_string(),
            c.k.to_string(),
            c.index.to_string(),
            c.params.family().to_string(),
            serde_json::to_string(&c.params).map_err(|e| data(e.to_string()))?,
            fmt_f64(c.unfairness),
            fmt_f64(c.avg_silhouette),
            c.seed.to_string(),
            c.feasible.to_string(),
            c.error.clone().unwrap_or_default(),
        ]);
    }
    write_atomic(path, &csv_bytes(&header, rows)?)
}
