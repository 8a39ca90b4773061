//! The `arclust` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use arclust::dissim::{self, DissimMatrix};
use arclust::embed::classical_mds;
use arclust::geo::geodesic_matrix;
use arclust::kernelize::KernelSpec;
use arclust::metrics::evaluate;
use arclust::plot::{scatter_svg, PlotOptions};
use arclust::synth::{four_gaussians, rings, RingConfig};
use arclust::tune::{self, Method, TuneOptions, TuneResult};
use arclust::{Dataset, Family, Matrix, Partition, Scheme};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_kernel, parse_matrix, Distance, PipelineConfig};
use crate::error::{data as bad_data, usage, CliError, Result};
use crate::grid::GridSpec;
use crate::io::{self, Loaded};

#[derive(Parser, Debug)]
#[command(
    name = "arclust",
    version,
    about = "Attraction-repulsion clustering for fairness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the (perturbed) dissimilarity matrix of a dataset.
    Dissim(DissimArgs),
    /// Classical MDS coordinates of a dataset or a matrix file.
    Embed(EmbedArgs),
    /// Cluster once and write the partition with its metrics.
    Cluster(ClusterArgs),
    /// Grid search: lowest unfairness with average silhouette at least tau.
    Tune(TuneArgs),
    /// Evaluate an existing partition.
    Metrics(MetricsArgs),
    /// Scatter plot (SVG): colour is the cluster, marker shape the class.
    Plot(PlotArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// TOML pipeline config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Args, Debug, Default)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Id column (defaults to `id` when present).
    #[arg(long)]
    pub id: Option<String>,
    /// Unprotected columns (default: names starting with `x`).
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<String>,
    /// Numeric protected columns (default: names starting with `s`).
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<String>,
    /// Categorical protected column, encoded with --scheme.
    #[arg(long)]
    pub class_column: Option<String>,
    /// signed, one_hot, counts or raw.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Declared category order for --class-column.
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    #[arg(long)]
    pub lat: Option<String>,
    #[arg(long)]
    pub lon: Option<String>,
    /// Base distance between records.
    #[arg(long, value_enum)]
    pub distance: Option<Distance>,
    /// Kernel distance on the unprotected columns: linear, squared_coords,
    /// rbf:GAMMA or polynomial:DEGREE:COEF.
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelSpec>,
}

#[derive(Clone, Debug)]
pub struct MatrixArg(pub Vec<Vec<f64>>);

fn parse_matrix_arg(s: &str) -> std::result::Result<MatrixArg, String> {
    parse_matrix(s).map(MatrixArg)
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    match s {
        "signed" => Ok(Scheme::Signed),
        "one_hot" => Ok(Scheme::OneHot),
        "counts" => Ok(Scheme::Counts),
        "raw" => Ok(Scheme::Raw),
        _ => Err(format!(
            "unknown scheme `{s}` (signed, one_hot, counts, raw)"
        )),
    }
}

#[derive(Args, Debug, Default)]
pub struct ParamArgs {
    /// delta1, delta2, delta3 or delta4.
    #[arg(long)]
    pub family: Option<Family>,
    /// Intensity.
    #[arg(long)]
    pub u: Option<f64>,
    /// Decay.
    #[arg(long)]
    pub v: Option<f64>,
    /// Locality (delta4).
    #[arg(long)]
    pub w: Option<f64>,
    /// Class shift matrix for delta1, e.g. `0` or `0,0;0,0`.
    #[arg(long = "U", value_parser = parse_matrix_arg)]
    pub shift_matrix: Option<MatrixArg>,
    /// Interaction matrix for delta1/delta4, e.g. `1.32` or `1,-1;-1,0`.
    #[arg(long = "V", value_parser = parse_matrix_arg)]
    pub interaction: Option<MatrixArg>,
    /// Positivity margin added before MDS.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DissimArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Shift to positive values and take square roots as done before MDS.
    #[arg(long)]
    pub prepare: bool,
    /// Output path; `.ardm` writes the binary format, anything else CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Embed this matrix file (CSV or .ardm) instead of a dataset.
    #[arg(long, conflicts_with = "input")]
    pub matrix: Option<PathBuf>,
    /// Embedding dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Coordinates CSV; the spectrum goes to a `.json` file next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// kmeans_mds, kmedoids_mds, complete, average, single or charged_ward.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// MDS dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// k-means restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Grid file (see `presets/`).
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Methods to compare (default: from the grid, else all).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Number of clusters, or the start of a range with --k-max.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Silhouette floor.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Partition file (JSON or `id,cluster` CSV).
    #[arg(long)]
    pub partition: PathBuf,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Partition file (JSON or `id,cluster` CSV).
    #[arg(long)]
    pub partition: PathBuf,
    /// Plot these coordinates (embedding CSV) instead of the data columns.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Subcommand, Debug)]
pub enum SynthKind {
    /// 200 points from four Gaussians, S = +1 for the upper two.
    Gaussians {
        #[arg(long, required = true)]
        seed: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three concentric rings: squares inside and outside, circles between.
    Rings {
        #[arg(long, required = true)]
        seed: u64,
        #[arg(long)]
        total: Option<usize>,
        #[arg(long)]
        circle_fraction: Option<f64>,
        /// Centre radii of the three rings.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl DataArgs {
    fn into_config(self) -> PipelineConfig {
        PipelineConfig {
            input: self.input,
            id: self.id,
            x: self.x,
            s: self.s,
            class_column: self.class_column,
            scheme: self.scheme,
            categories: self.categories,
            lat: self.lat,
            lon: self.lon,
            distance: self.distance,
            kernel: self.kernel,
            ..Default::default()
        }
    }
}

impl ParamArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        cfg.family = self.family;
        cfg.u = self.u;
        cfg.v = self.v;
        cfg.w = self.w;
        cfg.shift_matrix = self.shift_matrix.map(|m| m.0);
        cfg.interaction = self.interaction.map(|m| m.0);
        cfg.epsilon = self.epsilon;
    }
}

/// File config (if any) overlaid by the flags.
fn resolve(config: &ConfigArgs, flags: PipelineConfig) -> Result<PipelineConfig> {
    let base = match &config.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    Ok(base.overlay(flags))
}

/// Prints the config when asked; returns true if the command should stop.
fn maybe_print(config: &ConfigArgs, cfg: &PipelineConfig) -> Result<bool> {
    if config.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    Ok(false)
}

fn out_path(cfg: &PipelineConfig) -> Result<&Path> {
    cfg.output
        .as_deref()
        .ok_or_else(|| usage("no output: pass --out or set `output`"))
}

fn load(cfg: &PipelineConfig) -> Result<Loaded> {
    let loaded = io::load_dataset(cfg.input()?, &cfg.columns())?;
    if cfg.distance() == Distance::Geodesic && loaded.lat_lon.is_none() {
        return Err(usage("geodesic distance needs --lat and --lon"));
    }
    Ok(loaded)
}

/// Tuning options with the base distance implied by the config.
fn options(cfg: &PipelineConfig, loaded: &Loaded) -> Result<TuneOptions> {
    let mut opts = cfg.tune_options();
    if cfg.distance() == Distance::Geodesic {
        if opts.kernel.is_some() {
            return Err(usage("give either a kernel or geodesic distance, not both"));
        }
        let (lat, lon) = loaded.lat_lon.as_ref().expect("checked in load");
        opts.base_distances = Some(geodesic_matrix(lat, lon)?.values().clone());
    }
    Ok(opts)
}

/// Coordinates for k-means style objectives: the data columns, when the base
/// distance is Euclidean on them.
fn euclidean_coords<'a>(cfg: &PipelineConfig, data: &'a Dataset) -> Option<&'a Matrix> {
    (cfg.distance() == Distance::Euclidean && cfg.kernel.is_none()).then(|| data.x())
}

fn save_config(dir: &Path, cfg: &PipelineConfig) -> Result<()> {
    io::write_atomic(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())
}

fn dissim_cmd(args: DissimArgs) -> Result<()> {
    let mut flags = args.data.into_config();
    args.params.apply(&mut flags);
    flags.output = args.out;
    let cfg = resolve(&args.config, flags)?;
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    cfg.check_params_or_grid(false)?;
    let loaded = load(&cfg)?;
    let data = &loaded.dataset;
    let opts = options(&cfg, &loaded)?;
    let mut m = match cfg.params(data.s_dim())? {
        Some(params) => tune::perturbed(data, &params, &opts)?,
        None => DissimMatrix::from_values(tune::base_distances(data, &opts)?)?,
    };
    if args.prepare {
        m = dissim::prepare_for_mds(&m, cfg.epsilon)?;
    }
    io::write_matrix(out_path(&cfg)?, &m, data.ids())
}

fn embed_cmd(args: EmbedArgs) -> Result<()> {
    let mut flags = args.data.into_config();
    args.params.apply(&mut flags);
    flags.d_prime = args.dim;
    flags.output = args.out;
    let cfg = resolve(&args.config, flags)?;
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    let d_prime = cfg.d_prime.unwrap_or(2);
    let (m, ids) = match &args.matrix {
        Some(path) => {
            if cfg.has_params() {
                return Err(usage(
                    "--matrix is already a dissimilarity; drop the parameters",
                ));
            }
            (io::read_matrix(path)?, None)
        }
        None => {
            cfg.check_params_or_grid(false)?;
            let loaded = load(&cfg)?;
            let data = &loaded.dataset;
            let opts = options(&cfg, &loaded)?;
            let m = match cfg.params(data.s_dim())? {
                Some(params) => tune::perturbed(data, &params, &opts)?,
                None => DissimMatrix::from_values(tune::base_distances(data, &opts)?)?,
            };
            (m, data.ids().map(<[String]>::to_vec))
        }
    };
    let prepared = dissim::prepare_for_mds(&m, cfg.epsilon)?;
    let emb = classical_mds(&prepared, d_prime)?;
    io::write_embedding(out_path(&cfg)?, &emb, ids.as_deref())
}

fn needs_seed(method: Method) -> bool {
    method.needs_embedding()
}

fn cluster_cmd(args: ClusterArgs) -> Result<()> {
    let mut flags = args.data.into_config();
    args.params.apply(&mut flags);
    flags.method = args.method;
    flags.k = args.k;
    flags.seed = args.seed;
    flags.d_prime = args.dim;
    flags.restarts = args.restarts;
    flags.output = args.out;
    let cfg = resolve(&args.config, flags)?;
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    cfg.check_params_or_grid(false)?;
    let method = cfg
        .method
        .ok_or_else(|| usage("no method: pass --method"))?;
    let k = cfg.k.ok_or_else(|| usage("no cluster count: pass --k"))?;
    let seed = match (cfg.seed, needs_seed(method)) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(usage(format!("{method} is randomized: pass --seed"))),
    };
    let out = out_path(&cfg)?.to_path_buf();

    let loaded = load(&cfg)?;
    let data = &loaded.dataset;
    let params = cfg
        .params(data.s_dim())?
        .ok_or_else(|| usage("no dissimilarity: pass --family and its parameters"))?;
    let opts = options(&cfg, &loaded)?;
    if k < 2 || k > data.len() {
        return Err(usage(format!("k = {k} outside 2..={}", data.len())));
    }
    let result = tune::cluster(data, method, &params, k, seed, &opts)?;
    let d = tune::base_distances(data, &opts)?;
    let coords = match &result.embedding {
        Some(e) => Some(&e.coords),
        None => euclidean_coords(&cfg, data),
    };
    let report = evaluate(&d, coords, &result.partition, &data.class_counts()?)?;

    let ids = data.ids();
    io::write_partition_json(&out.join("partition.json"), &result.partition, ids)?;
    io::write_partition_csv(&out.join("partition.csv"), &result.partition, ids)?;
    io::write_json(&out.join("metrics.json"), &report)?;
    if let Some(e) = &result.embedding {
        io::write_embedding(&out.join("embedding.csv"), e, ids)?;
    }
    if let Some(dend) = &result.dendrogram {
        io::write_json(&out.join("dendrogram.json"), dend)?;
        io::write_dendrogram_csv(&out.join("dendrogram.csv"), dend)?;
    }
    let mut resolved = cfg.clone();
    resolved.seed = Some(seed);
    save_config(&out, &resolved)?;
    println!(
        "{method} k={k}: unfairness {:.6}, average silhouette {:.6}",
        report.unfairness, report.avg_silhouette
    );
    Ok(())
}

fn tune_cmd(args: TuneArgs) -> Result<()> {
    let mut flags = args.data.into_config();
    flags.grid = args.grid;
    flags.methods = args.methods;
    flags.k = args.k;
    flags.k_max = args.k_max;
    flags.tau = args.tau;
    flags.seed = args.seed;
    flags.d_prime = args.dim;
    flags.restarts = args.restarts;
    flags.epsilon = args.epsilon;
    flags.output = args.out;
    let mut cfg = resolve(&args.config, flags)?;
    cfg.check_params_or_grid(true)?;
    let grid_path = cfg.grid.clone().expect("checked");
    let grid = GridSpec::load(&grid_path)?;
    // Unset run settings fall back to the grid file.
    if cfg.methods.is_empty() {
        cfg.methods = if grid.methods.is_empty() {
            Method::ALL.to_vec()
        } else {
            grid.methods.clone()
        };
    }
    cfg.k = cfg.k.or(grid.k);
    cfg.k_max = cfg.k_max.or(grid.k_max);
    cfg.tau = cfg.tau.or(grid.tau).or(Some(0.0));
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    let seed = cfg
        .seed
        .ok_or_else(|| usage("tune is randomized: pass --seed"))?;
    let k_lo = cfg.k.ok_or_else(|| usage("no cluster count: pass --k"))?;
    let k_hi = cfg.k_max.unwrap_or(k_lo);
    if k_hi < k_lo {
        return Err(usage(format!("--k-max {k_hi} is below --k {k_lo}")));
    }
    let tau = cfg.tau.expect("defaulted");
    let out = out_path(&cfg)?.to_path_buf();

    let loaded = load(&cfg)?;
    let data = &loaded.dataset;
    let cells = grid.expand(data.s_dim())?;
    let opts = options(&cfg, &loaded)?;
    let mut results: Vec<TuneResult> = Vec::new();
    for k in k_lo..=k_hi {
        let r = tune::tune(data, &cfg.methods, grid.family, &cells, k, tau, seed, &opts)?;
        for m in &r.methods {
            match &m.best {
                Some(b) => eprintln!(
                    "k={k} {}: cell {} unfairness {:.6} silhouette {:.6}",
                    m.method, b.index, b.unfairness, b.avg_silhouette
                ),
                None => eprintln!("k={k} {}: no cell reaches tau = {tau}", m.method),
            }
        }
        results.push(r);
    }
    let all: Vec<_> = results
        .iter()
        .flat_map(|r| r.methods.iter().flat_map(|m| m.curve.iter().cloned()))
        .collect();
    io::write_cells_csv(&out.join("cells.csv"), &all)?;
    io::write_json(&out.join("tune.json"), &results)?;
    save_config(&out, &cfg)
}

/// Partition from file, checked against the dataset.
fn partition_for(path: &Path, data: &Dataset) -> Result<Partition> {
    let (p, ids) = io::read_partition(path)?;
    if p.len() != data.len() {
        return Err(bad_data(format!(
            "partition has {} labels for {} records",
            p.len(),
            data.len()
        )));
    }
    if let (Some(file_ids), Some(data_ids)) = (ids, data.ids()) {
        if file_ids != data_ids {
            return Err(bad_data(
                "partition ids do not match the dataset ids in order",
            ));
        }
    }
    Ok(p.with_classes(&data.class_counts()?)?)
}

fn metrics_cmd(args: MetricsArgs) -> Result<()> {
    let mut flags = args.data.into_config();
    flags.output = args.out;
    let cfg = resolve(&args.config, flags)?;
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    let loaded = load(&cfg)?;
    let data = &loaded.dataset;
    let partition = partition_for(&args.partition, data)?;
    let opts = options(&cfg, &loaded)?;
    let d = tune::base_distances(data, &opts)?;
    let report = evaluate(
        &d,
        euclidean_coords(&cfg, data),
        &partition,
        &data.class_counts()?,
    )?;
    match &cfg.output {
        Some(p) => io::write_json(p, &report),
        None => {
            let mut text =
                serde_json::to_string_pretty(&report).map_err(|e| bad_data(e.to_string()))?;
            text.push('\n');
            emit(None, text.as_bytes())
        }
    }
}

fn plot_cmd(args: PlotArgs) -> Result<()> {
    let flags = args.data.into_config();
    let cfg = resolve(&args.config, flags)?;
    if maybe_print(&args.config, &cfg)? {
        return Ok(());
    }
    let loaded = load(&cfg)?;
    let data = &loaded.dataset;
    let partition = partition_for(&args.partition, data)?;
    let (points, x_label, y_label) = if let Some(path) = &args.coords {
        let (e, _) = io::read_embedding(path)?;
        if e.coords.rows() != data.len() {
            return Err(bad_data(format!(
                "{} has {} rows for {} records",
                path.display(),
                e.coords.rows(),
                data.len()
            )));
        }
        (e.coords, "dim1".to_string(), "dim2".to_string())
    } else if let Some((lat, lon)) = &loaded.lat_lon {
        let m = Matrix::from_fn(data.len(), 2, |i, j| if j == 0 { lon[i] } else { lat[i] });
        (m, "longitude".to_string(), "latitude".to_string())
    } else {
        let names = &loaded.x_names;
        (
            data.x().clone(),
            names.first().cloned().unwrap_or_default(),
            names.get(1).cloned().unwrap_or_default(),
        )
    };
    let opts = PlotOptions {
        title: args.title,
        class_names: loaded.class_names.clone(),
        x_label,
        y_label,
        ..PlotOptions::default()
    };
    let svg = scatter_svg(&points, partition.labels(), &data.class_labels()?, &opts)?;
    io::write_atomic(&args.out, svg.as_bytes())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn synth_cmd(args: SynthArgs) -> Result<()> {
    match args.kind {
        SynthKind::Gaussians { seed, out } => {
            let d = four_gaussians(seed);
            emit(out.as_deref(), &io::dataset_csv(&d, &["s"])?)
        }
        SynthKind::Rings {
            seed,
            total,
            circle_fraction,
            radii,
            width,
            out,
        } => {
            let mut cfg = RingConfig::default();
            if let Some(t) = total {
                cfg.total = t;
            }
            if let Some(f) = circle_fraction {
                cfg.circle_fraction = f;
            }
            if let Some(r) = radii {
                cfg.radii = [r[0], r[1], r[2]];
            }
            if let Some(w) = width {
                cfg.width = w;
            }
            let d = rings(seed, &cfg)?;
            emit(
                out.as_deref(),
                &io::dataset_csv(&d, &["s_circle", "s_square"])?,
            )
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dissim(a) => dissim_cmd(a),
        Command::Embed(a) => embed_cmd(a),
        Command::Cluster(a) => cluster_cmd(a),
        Command::Tune(a) => tune_cmd(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Plot(a) => plot_cmd(a),
        Command::Synth(a) => synth_cmd(a),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
