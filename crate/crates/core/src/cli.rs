//! The `stmp` command line. Every subcommand accepts `--config file.json`
//! whose keys mirror flag names; flags given on the command line win.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::benchmark::{extended_branching, run_benchmark, write_benchmark, BenchmarkConfig};
use crate::clustering::{build_tree, load_tree, save_tree, validate_tree};
use crate::dictionary::{build_from_patches, load_dictionary, save_dictionary};
use crate::error::{Error, Result};
use crate::operators::{
    load_row_select, random_bump_mask, trinocular_views, view_rows, ObservationOperator,
};
use crate::pipelines::in_pool;
use crate::pipelines::{
    add_noise_to_snr, coded_exposure_measure, compressive_recover, denoise, masked_recover,
    save_reports, super_resolve, SelectorKind, TaskConfig,
};
use crate::tensor::{extract_patches, load_pgm, load_tensor, save_pgm, save_tensor, Tensor};

/// Comma-separated list of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Dims(pub Vec<usize>);

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{s:?}: {e}")),
    }
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    s.split(',')
        .map(parse_positive)
        .collect::<std::result::Result<_, _>>()
        .map(Dims)
}

fn parse_branching(s: &str) -> std::result::Result<Dims, String> {
    let dims = parse_dims(s)?;
    if let Some(k) = dims.0.iter().find(|&&k| k < 2) {
        return Err(format!("branching factor {k} is below 2"));
    }
    Ok(dims)
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha {a} is outside (0, 1]"))
    }
}

fn parse_alphas(s: &str) -> std::result::Result<Alphas, String> {
    s.split(',')
        .map(parse_alpha)
        .collect::<std::result::Result<_, _>>()
        .map(Alphas)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Alphas(pub Vec<f64>);

#[derive(Debug, Parser)]
#[command(
    name = "stmp",
    version,
    about = "Sparse coding over shallow cluster trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dictionary from image patches.
    BuildDict(BuildDictArgs),
    /// Build a balanced cluster tree over a dictionary.
    BuildTree(BuildTreeArgs),
    /// Run a restoration task.
    Run(RunArgs),
    /// Compare exact and tree-guided selection cost across dictionary sizes.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct BuildDictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training images (`.pgm` or tensor files), comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1.., required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long, default_value = "16,16", value_parser = parse_dims)]
    pub patch: Dims,
    #[arg(long, default_value = "2,2", value_parser = parse_dims)]
    pub stride: Dims,
    #[arg(long, default_value_t = 2000, value_parser = parse_positive)]
    pub atoms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct BuildTreeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long, default_value = "100,10,10", value_parser = parse_branching)]
    pub branching: Dims,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Denoise,
    Superres,
    Csrecover,
    Maskrecover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorArg {
    Exact,
    Stmp,
}

impl From<SelectorArg> for SelectorKind {
    fn from(s: SelectorArg) -> Self {
        match s {
            SelectorArg::Exact => SelectorKind::Exact,
            SelectorArg::Stmp => SelectorKind::Stmp,
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long, value_enum, default_value = "stmp")]
    pub selector: SelectorArg,
    #[arg(long, default_value = "0.1", value_parser = parse_alpha)]
    pub alpha: f64,
    /// Sparsity: pursuit steps per patch.
    #[arg(long = "k", default_value_t = 10, value_parser = parse_positive)]
    pub sparsity: usize,
    #[arg(long)]
    pub dict: PathBuf,
    /// Tree over the coding dictionary; built from --branching and --seed
    /// when absent. Projected tasks code against projected atoms, so a tree
    /// over the raw dictionary is rejected as stale for them.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    /// Restored output; `.pgm` writes an image, anything else a tensor file.
    #[arg(long)]
    pub out: PathBuf,
    /// Report CSV; defaults to `<out>.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Ground truth for PSNR/SNR.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Treat --input as ground truth and synthesize the observation:
    /// noise for denoise, block averaging for superres, coded exposure for
    /// csrecover, view dropping for maskrecover.
    #[arg(long)]
    pub simulate: bool,
    /// Add Gaussian noise at this SNR (dB) to the observation. Simulated
    /// denoising defaults to 10.
    #[arg(long)]
    pub noise_snr: Option<f64>,
    /// Patch shape of the observation. Defaults per task: 16,16 / 4,4 /
    /// 1,7,7 / 8,8,5,5.
    #[arg(long, value_parser = parse_dims)]
    pub patch: Option<Dims>,
    /// Patch stride; defaults to the patch shape.
    #[arg(long, value_parser = parse_dims)]
    pub stride: Option<Dims>,
    #[arg(long, default_value_t = 4, value_parser = parse_positive)]
    pub factor: usize,
    /// Coded-exposure mask tensor `[frames, ...tile]`; generated when absent.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, default_value_t = 9, value_parser = parse_positive)]
    pub exposure_frames: usize,
    #[arg(long, default_value_t = 3, value_parser = parse_positive)]
    pub open_frames: usize,
    /// Observed coordinates per patch (row-select file); defaults to the
    /// three trinocular views of a square view grid.
    #[arg(long)]
    pub rows: Option<PathBuf>,
    #[arg(long, default_value = "100,10,10", value_parser = parse_branching)]
    pub branching: Dims,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub residual_tol: Option<f32>,
    #[arg(long, value_parser = parse_positive)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "1000,4000,16000", value_parser = parse_dims)]
    pub dict_sizes: Dims,
    #[arg(long, default_value_t = 16, value_parser = parse_positive)]
    pub dim: usize,
    /// Levels used at every size; more are appended as m grows.
    #[arg(long, default_value = "100", value_parser = parse_branching)]
    pub branching: Dims,
    #[arg(long, default_value_t = 10)]
    pub extend_k: usize,
    #[arg(long, default_value_t = 10, value_parser = parse_positive)]
    pub leaf_size: usize,
    #[arg(long, default_value = "0.1,1", value_parser = parse_alphas)]
    pub alpha: Alphas,
    #[arg(long, default_value_t = 200, value_parser = parse_positive)]
    pub queries: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct RunManifest<'a, A: Serialize> {
    command: &'a str,
    version: &'static str,
    seed: u64,
    config: Option<&'a Path>,
    inputs: Vec<&'a Path>,
    outputs: Vec<PathBuf>,
    flags: &'a A,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_manifest<A: Serialize>(
    command: &str,
    seed: u64,
    config: Option<&Path>,
    inputs: Vec<&Path>,
    outputs: Vec<PathBuf>,
    flags: &A,
    primary: &Path,
) -> Result<()> {
    let manifest = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        inputs,
        outputs,
        flags,
    };
    let path = with_suffix(primary, ".manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Internal(format!("manifest encoding failed: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Loads a `.pgm` image or a tensor file.
pub fn load_any(path: &Path) -> Result<Tensor> {
    if is_pgm(path) {
        load_pgm(path)
    } else {
        load_tensor(path)
    }
}

pub fn save_any(t: &Tensor, path: &Path) -> Result<()> {
    if is_pgm(path) {
        save_pgm(t, path)
    } else {
        save_tensor(t, path)
    }
}

fn cmd_build_dict(a: &BuildDictArgs) -> Result<()> {
    let mut patches = Vec::new();
    for path in &a.images {
        let img = load_any(path)?;
        let (_, mut p) = extract_patches(&img, &a.patch.0, &a.stride.0)?;
        patches.append(&mut p);
    }
    let d = in_pool(a.threads, || build_from_patches(&patches, a.atoms, a.seed))??;
    save_dictionary(&d, &a.out)?;
    println!("n={} m={}", d.dim(), d.len());
    let inputs = a.images.iter().map(PathBuf::as_path).collect();
    write_manifest(
        "build-dict",
        a.seed,
        a.config.as_deref(),
        inputs,
        vec![a.out.clone()],
        a,
        &a.out,
    )
}

fn cmd_build_tree(a: &BuildTreeArgs) -> Result<()> {
    let d = load_dictionary(&a.dict)?;
    let tree = in_pool(a.threads, || build_tree(&d, &a.branching.0, a.seed))??;
    let report = validate_tree(&tree, &d)?;
    if let Some(v) = report.violation {
        return Err(Error::Internal(format!(
            "built tree failed validation: {v:?}"
        )));
    }
    save_tree(&tree, &a.out)?;
    println!("m={} branching={:?}", d.len(), a.branching.0);
    write_manifest(
        "build-tree",
        a.seed,
        a.config.as_deref(),
        vec![&a.dict],
        vec![a.out.clone()],
        a,
        &a.out,
    )
}

fn default_patch(task: Task) -> Vec<usize> {
    match task {
        Task::Denoise => vec![16, 16],
        Task::Superres => vec![4, 4],
        Task::Csrecover => vec![1, 7, 7],
        Task::Maskrecover => vec![8, 8, 5, 5],
    }
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let d = load_dictionary(&a.dict)?;
    let input = load_any(&a.input)?;
    let patch = a
        .patch
        .clone()
        .map_or_else(|| default_patch(a.task), |p| p.0);
    let stride = a.stride.clone().map_or_else(|| patch.clone(), |s| s.0);
    let cfg = TaskConfig {
        sparsity: a.sparsity,
        alpha: a.alpha,
        selector: a.selector.into(),
        branching: a.branching.0.clone(),
        seed: a.seed,
        residual_tolerance: a.residual_tol,
        threads: a.threads,
        ..TaskConfig::new(patch.clone(), stride)
    };

    let operator = match a.task {
        Task::Denoise => None,
        Task::Superres => None,
        Task::Csrecover => {
            if patch.len() < 2 {
                return Err(Error::invalid(
                    "coded-exposure patches need a temporal axis",
                ));
            }
            let mask = match &a.mask {
                Some(p) => load_tensor(p)?,
                None => random_bump_mask(a.exposure_frames, &patch[1..], a.open_frames, a.seed)?,
            };
            Some(ObservationOperator::coded_exposure(mask, patch[0])?)
        }
        Task::Maskrecover => {
            let n: usize = patch.iter().product();
            Some(match &a.rows {
                Some(p) => load_row_select(p, n)?,
                None => {
                    if patch.len() != 4 || patch[2] != patch[3] {
                        return Err(Error::invalid(
                            "trinocular views need [rows, cols, v, v] patches; pass --rows otherwise",
                        ));
                    }
                    ObservationOperator::row_select(
                        n,
                        view_rows(&patch, &trinocular_views(patch[2]))?,
                    )?
                }
            })
        }
    };

    let mut reference = a.reference.as_deref().map(load_any).transpose()?;
    let mut observed = input.clone();
    if a.simulate {
        observed = match (a.task, &operator) {
            (Task::Denoise, _) => add_noise_to_snr(&input, a.noise_snr.unwrap_or(10.0), a.seed)?,
            (Task::Superres, _) => {
                let op = ObservationOperator::block_average(
                    input.shape().to_vec(),
                    vec![a.factor; input.rank()],
                )?;
                let out_shape: Vec<usize> = input.shape().iter().map(|s| s / a.factor).collect();
                Tensor::new(out_shape, op.apply(input.data())?)?
            }
            (Task::Csrecover, Some(ObservationOperator::CodedExposure { mask, .. })) => {
                coded_exposure_measure(&input, mask)?
            }
            _ => input.clone(),
        };
        reference = Some(input.clone());
    }
    if let (Some(snr), false) = (a.noise_snr, a.simulate && a.task == Task::Denoise) {
        observed = add_noise_to_snr(&observed, snr, crate::seed::derive_seed(a.seed, &[0x0b5]))?;
    }

    let (estimate, mut report) = match a.task {
        Task::Denoise => {
            let tree = load_optional_tree(a, d.dim())?;
            denoise(&observed, &d, tree.as_ref(), &cfg)?
        }
        Task::Superres => {
            let dim: usize = patch.iter().product();
            let tree = load_optional_tree(a, dim)?;
            super_resolve(&observed, &d, tree.as_ref(), &cfg, a.factor)?
        }
        Task::Csrecover => {
            let op = operator.as_ref().expect("operator built above");
            let tree = load_optional_tree(a, op.n_out())?;
            compressive_recover(&observed, op, &d, tree.as_ref(), &cfg)?
        }
        Task::Maskrecover => {
            let op = operator.as_ref().expect("operator built above");
            let tree = load_optional_tree(a, op.n_out())?;
            masked_recover(&observed, op, &d, tree.as_ref(), &cfg)?
        }
    };
    if let Some(r) = &reference {
        report.score_against(r, &estimate)?;
    }
    save_any(&estimate, &a.out)?;
    let report_path = a
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".csv"));
    save_reports(&report_path, std::slice::from_ref(&report))?;
    println!(
        "{} {}: patches={} inner_products={} psnr_db={}",
        report.task,
        report.selector,
        report.patches,
        report.inner_products,
        report
            .psnr_db
            .map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
    );
    let mut inputs = vec![a.dict.as_path(), a.input.as_path()];
    inputs.extend(a.tree.as_deref());
    inputs.extend(a.reference.as_deref());
    inputs.extend(a.mask.as_deref());
    inputs.extend(a.rows.as_deref());
    write_manifest(
        "run",
        a.seed,
        a.config.as_deref(),
        inputs,
        vec![a.out.clone(), report_path],
        a,
        &a.out,
    )
}

fn load_optional_tree(a: &RunArgs, dim: usize) -> Result<Option<crate::clustering::ClusterTree>> {
    a.tree.as_deref().map(|p| load_tree(p, dim)).transpose()
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let cfg = BenchmarkConfig {
        dict_sizes: a.dict_sizes.0.clone(),
        dim: a.dim,
        base_branching: a.branching.0.clone(),
        extend_k: a.extend_k,
        leaf_size: a.leaf_size,
        alphas: a.alpha.0.clone(),
        queries: a.queries,
        noise: a.noise,
        seed: a.seed,
        threads: a.threads,
    };
    let rows = run_benchmark(&cfg)?;
    let file = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_benchmark(file, &rows)?;
    for m in &a.dict_sizes.0 {
        let b = extended_branching(&cfg.base_branching, *m, cfg.leaf_size, cfg.extend_k);
        println!("m={m} branching={b:?}");
    }
    write_manifest(
        "benchmark",
        a.seed,
        a.config.as_deref(),
        vec![],
        vec![a.out.clone()],
        a,
        &a.out,
    )
}

/// Rewrites `args` so the keys of any `--config` JSON object appear as
/// flags right after the subcommand, ahead of the real flags.
fn inject_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(args);
    };
    let sub = sub + 1;
    let mut path = None;
    for (i, a) in args.iter().enumerate().skip(sub + 1) {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let serde_json::Value::Object(map) = value else {
        return Err("config must be a JSON object".into());
    };
    let mut injected = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => continue,
            serde_json::Value::Bool(true) => {
                injected.push(OsString::from(flag));
                continue;
            }
            serde_json::Value::String(s) => s,
            serde_json::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        injected.push(OsString::from(flag));
        injected.push(OsString::from(text));
    }
    let mut out = args[..=sub].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match inject_config(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::BuildDict(a) => cmd_build_dict(a),
        Command::BuildTree(a) => cmd_build_tree(a),
        Command::Run(a) => cmd_run(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
