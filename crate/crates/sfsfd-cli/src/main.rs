//! Command-line front end: optimize a sampling density, draw designs,
//! score discrepancies, and run the benchmark grid.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sfsfd::baseline::{latin_hypercube_design, sobol_design_with, uniform_random_design, SobolRandomization};
use sfsfd::bench::{
    aggregate, emit_report, run_grid, GridConfig, Method, RecordStore, ReportFormat,
};
use sfsfd::design::DesignMatrix;
use sfsfd::discrepancy::{centered_l2_discrepancy_with, DiscrepancyVariant};
use sfsfd::optimizer::{run_sfsfd, ObjectiveSpec};
use sfsfd::spectral::{sample_design, PdfDocument, PdfMeta};
use sfsfd::stream::StreamSeed;

#[derive(Parser)]
#[command(
    name = "sfsfd",
    about = "Space-filling designs from an optimized sampling density",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the sampling density for a target design size.
    Optimize(OptimizeArgs),
    /// Draw a design and write it as headerless CSV.
    Sample(SampleArgs),
    /// Score a design file under the centered L2 discrepancy.
    Discrepancy(DiscrepancyArgs),
    /// Run the benchmark grid with resumable persistence.
    Benchmark(BenchmarkArgs),
}

/// Flag-or-config resolution: an explicit flag wins, then the config
/// file, then the built-in default.
fn resolve<T: Clone>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn load_config<C: for<'de> Deserialize<'de> + Default>(path: &Option<PathBuf>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config file {}", p.display()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Printed,
    Classical,
}

impl From<VariantArg> for DiscrepancyVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => DiscrepancyVariant::Printed,
            VariantArg::Classical => DiscrepancyVariant::Classical,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// Design size the density is tuned for.
    #[arg(long)]
    n: Option<usize>,
    /// Design dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Density cell count.
    #[arg(long)]
    m: Option<usize>,
    /// Root random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Objective-evaluation budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Replicates per estimate at iteration 0.
    #[arg(long)]
    a_initial: Option<usize>,
    /// Iterations between replicate increments.
    #[arg(long)]
    a_period: Option<usize>,
    /// Discrepancy variant the objective scores against.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Output density file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output trace file (JSON lines); defaults to `<out>.trace.jsonl`.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// JSON config file mirroring these flag names.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
struct OptimizeConfig {
    n: Option<usize>,
    d: Option<usize>,
    m: Option<usize>,
    seed: Option<u64>,
    budget: Option<usize>,
    a_initial: Option<usize>,
    a_period: Option<usize>,
    variant: Option<DiscrepancyVariant>,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
}

fn cmd_optimize(args: OptimizeArgs) -> Result<()> {
    let cfg: OptimizeConfig = load_config(&args.config)?;
    let n = resolve(args.n, cfg.n, 100);
    let d = resolve(args.d, cfg.d, 5);
    let m = resolve(args.m, cfg.m, 10);
    let seed = resolve(args.seed, cfg.seed, 0);
    let budget = resolve(args.budget, cfg.budget, 1000);
    let a_initial = resolve(args.a_initial, cfg.a_initial, 50);
    let a_period = resolve(args.a_period, cfg.a_period, 10);
    let variant = resolve(args.variant.map(Into::into), cfg.variant, DiscrepancyVariant::Classical);
    let out = resolve(args.out, cfg.out, PathBuf::from("pdf.json"));
    let trace_path = resolve(
        args.trace,
        cfg.trace,
        out.with_extension("trace.jsonl"),
    );

    let spec = ObjectiveSpec {
        n,
        d,
        m,
        a_initial,
        a_growth_period: a_period,
        max_iterations: budget,
        seed,
        variant,
    };
    let (pmf, trace) = run_sfsfd(&spec)?;

    let doc = PdfDocument::new(
        &pmf,
        &trace.best_angles,
        PdfMeta {
            n,
            d,
            seed,
            objective_value: trace.rescored_objective,
        },
    );
    write_atomic(&out, doc.to_json()?.as_bytes())?;
    write_atomic(&trace_path, trace.to_jsonl().as_bytes())?;
    println!("{:.9e}", trace.rescored_objective);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleMethod {
    Uniform,
    Lhs,
    Sobol,
    /// Sample from an optimized density file (`--pdf`).
    SfsfdPdfFile,
}

#[derive(Args)]
struct SampleArgs {
    /// Generator to draw from.
    #[arg(long, value_enum)]
    method: Option<SampleMethod>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Density file for `--method sfsfd-pdf-file`.
    #[arg(long)]
    pdf: Option<PathBuf>,
    /// Use the deterministic (unrandomized) Sobol sequence.
    #[arg(long, conflicts_with = "scramble")]
    unscrambled: bool,
    /// Use linear matrix scrambling plus digital shift for Sobol.
    #[arg(long)]
    scramble: bool,
    /// Output CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flag names.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
struct SampleConfig {
    method: Option<String>,
    n: Option<usize>,
    d: Option<usize>,
    seed: Option<u64>,
    pdf: Option<PathBuf>,
    unscrambled: Option<bool>,
    scramble: Option<bool>,
    out: Option<PathBuf>,
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let cfg: SampleConfig = load_config(&args.config)?;
    let method = match (args.method, cfg.method.as_deref()) {
        (Some(m), _) => m,
        (None, Some(name)) => match name {
            "uniform" => SampleMethod::Uniform,
            "lhs" => SampleMethod::Lhs,
            "sobol" => SampleMethod::Sobol,
            "sfsfd-pdf-file" => SampleMethod::SfsfdPdfFile,
            other => bail!("unknown method {other:?} in config file"),
        },
        (None, None) => bail!("--method is required (uniform, lhs, sobol or sfsfd-pdf-file)"),
    };
    let n = resolve(args.n, cfg.n, 100);
    let d = resolve(args.d, cfg.d, 5);
    let seed = resolve(args.seed, cfg.seed, 0);
    let out = resolve(args.out, cfg.out, PathBuf::from("design.csv"));
    let unscrambled = args.unscrambled || cfg.unscrambled.unwrap_or(false);
    let scramble = args.scramble || cfg.scramble.unwrap_or(false);

    let design = match method {
        SampleMethod::Uniform => {
            uniform_random_design(n, d, &mut StreamSeed::from_root(seed).rng())?
        }
        SampleMethod::Lhs => latin_hypercube_design(n, d, &mut StreamSeed::from_root(seed).rng())?,
        SampleMethod::Sobol => {
            let mode = if unscrambled {
                SobolRandomization::Unscrambled
            } else if scramble {
                SobolRandomization::Scramble
            } else {
                SobolRandomization::Shift
            };
            sobol_design_with(n, d, seed, mode)?
        }
        SampleMethod::SfsfdPdfFile => {
            let pdf_path = args
                .pdf
                .or(cfg.pdf)
                .context("--pdf is required for --method sfsfd-pdf-file")?;
            let text = std::fs::read_to_string(&pdf_path)
                .with_context(|| format!("reading density file {}", pdf_path.display()))?;
            let doc = PdfDocument::from_json(&text)
                .with_context(|| format!("parsing density file {}", pdf_path.display()))?;
            let pmf = doc.pmf()?;
            sample_design(&pmf, n, d, &mut StreamSeed::from_root(seed).rng())?
        }
    };

    let mut body = String::new();
    for row in design.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    write_atomic(&out, body.as_bytes())?;
    Ok(())
}

#[derive(Args)]
struct DiscrepancyArgs {
    /// Headerless CSV design file, one point per row.
    design: PathBuf,
    /// Discrepancy variant to evaluate.
    #[arg(long, value_enum, default_value = "classical")]
    variant: VariantArg,
}

fn cmd_discrepancy(args: DiscrepancyArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.design)
        .with_context(|| format!("reading design file {}", args.design.display()))?;
    let design = parse_design_csv(&text)?;
    let value = centered_l2_discrepancy_with(&design, args.variant.into()).value();
    println!("{value:.9e}");
    Ok(())
}

fn parse_design_csv(text: &str) -> Result<DesignMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let value: f64 = cell
                .trim()
                .parse()
                .with_context(|| format!("line {line_no}: invalid number {:?}", cell.trim()))?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("design file contains no rows");
    }
    DesignMatrix::from_rows(&rows).context("design file rejected")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// CI-scale grid: d in {5, 20, 30}, n = 100, 3 seeds, budget 200.
    Desk,
    /// Full grid: d in {5..30}, n in {100..500}, 10 seeds, budget 1000.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SobolModeArg {
    Unscrambled,
    Shift,
    Scramble,
}

impl From<SobolModeArg> for SobolRandomization {
    fn from(v: SobolModeArg) -> Self {
        match v {
            SobolModeArg::Unscrambled => SobolRandomization::Unscrambled,
            SobolModeArg::Shift => SobolRandomization::Shift,
            SobolModeArg::Scramble => SobolRandomization::Scramble,
        }
    }
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Canonical grid to run.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output directory (records, CSV, charts).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated methods (sfsfd,lhs,sobol,uniform).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated design sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Number of seeds; seeds are the integers 0..count-1.
    #[arg(long)]
    seeds: Option<usize>,
    /// Optimizer evaluation budget for density cells.
    #[arg(long)]
    budget: Option<usize>,
    /// Starting replicate count for density cells.
    #[arg(long)]
    a_initial: Option<usize>,
    /// Density cell count.
    #[arg(long)]
    m: Option<usize>,
    /// Discrepancy variant for every score.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Sobol randomization for sobol cells.
    #[arg(long, value_enum)]
    sobol_mode: Option<SobolModeArg>,
    /// Concurrent cell workers (default: SFSFD_WORKERS or 1).
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the SVG charts.
    #[arg(long)]
    no_svg: bool,
    /// JSON config file mirroring these flag names.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
struct BenchmarkConfig {
    preset: Option<String>,
    out: Option<PathBuf>,
    methods: Option<Vec<Method>>,
    dims: Option<Vec<usize>>,
    sizes: Option<Vec<usize>>,
    seeds: Option<usize>,
    budget: Option<usize>,
    a_initial: Option<usize>,
    m: Option<usize>,
    variant: Option<DiscrepancyVariant>,
    sobol_mode: Option<SobolRandomization>,
    workers: Option<usize>,
    no_svg: Option<bool>,
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    let cfg: BenchmarkConfig = load_config(&args.config)?;
    let preset = match (args.preset, cfg.preset.as_deref()) {
        (Some(p), _) => p,
        (None, Some("desk")) => Preset::Desk,
        (None, Some("paper")) => Preset::Paper,
        (None, Some(other)) => bail!("unknown preset {other:?} in config file"),
        (None, None) => Preset::Desk,
    };
    let (preset_dims, preset_sizes, preset_seeds, preset_budget, preset_a_initial): (
        Vec<usize>,
        Vec<usize>,
        usize,
        usize,
        usize,
    ) = match preset {
        Preset::Desk => (vec![5, 20, 30], vec![100], 3, 200, 20),
        Preset::Paper => (
            vec![5, 10, 15, 20, 25, 30],
            vec![100, 200, 300, 400, 500],
            10,
            1000,
            50,
        ),
    };

    let out = resolve(args.out, cfg.out, PathBuf::from("benchmark-out"));
    let methods = resolve(args.methods, cfg.methods, Method::ALL.to_vec());
    let dims = resolve(args.dims, cfg.dims, preset_dims);
    let sizes = resolve(args.sizes, cfg.sizes, preset_sizes);
    let seed_count = resolve(args.seeds, cfg.seeds, preset_seeds);
    let env_workers = std::env::var("SFSFD_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let workers = resolve(args.workers, cfg.workers.or(env_workers), 1).max(1);

    let grid_config = GridConfig {
        budget: resolve(args.budget, cfg.budget, preset_budget),
        a_initial: resolve(args.a_initial, cfg.a_initial, preset_a_initial),
        a_growth_period: 10,
        m: resolve(args.m, cfg.m, 10),
        variant: resolve(args.variant.map(Into::into), cfg.variant, DiscrepancyVariant::Classical),
        sobol_mode: resolve(
            args.sobol_mode.map(Into::into),
            cfg.sobol_mode,
            SobolRandomization::Unscrambled,
        ),
        workers,
    };
    let seeds: Vec<u64> = (0..seed_count as u64).collect();

    std::fs::create_dir_all(&out)?;
    let mut store = RecordStore::open(out.join("records.jsonl"))?;
    run_grid(&methods, &dims, &sizes, &seeds, &grid_config, &mut store)?;

    let table: Vec<_> = store
        .ok_records()
        .into_iter()
        .filter(GridConfig::is_table_record)
        .collect();
    let cells = aggregate(&table)?;
    let format = if args.no_svg || cfg.no_svg.unwrap_or(false) {
        ReportFormat::Csv
    } else {
        ReportFormat::Svg
    };
    let written = emit_report(&cells, &out, format)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }

    let failures = store.failures();
    if !failures.is_empty() {
        for f in &failures {
            eprintln!(
                "cell failed: {} d={} n={} seed={}: {}",
                f.method, f.d, f.n, f.seed, f.error
            );
        }
        bail!("{} grid cell(s) failed; see records.jsonl", failures.len());
    }
    Ok(())
}

/// Writes through a temp file and renames, so an interrupted write never
/// leaves a half-written artifact behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        file.write_all(bytes)?;
        file.flush()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Discrepancy(args) => cmd_discrepancy(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
