use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use tadualcv::eval::{mask_one_per_feature_visit, mask_random, render_reports};
use tadualcv::io;
use tadualcv::synth::{generate, SynthConfig};
use tadualcv::{impute, nrmse, run_experiment, Config, Dataset, Error, FeatureSpec, MaskSpec, MethodVariant};

/// Exit statuses: 0 success, 1 usage or configuration error, 2 data error.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "tadualcv", version, about = "Impute and evaluate irregular multivariate visit data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known truth.
    Synth(SynthArgs),
    /// Hide observed cells and save their true values.
    Mask(MaskArgs),
    /// Fill every missing cell of a dataset.
    Impute(ImputeArgs),
    /// Score an imputed file against the hidden values.
    Evaluate(EvaluateArgs),
    /// Run the mask, impute and score loop over methods, rates and seeds.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    visits: usize,
    #[arg(long, default_value_t = 8)]
    features: usize,
    #[arg(long, default_value_t = 10)]
    min_events: usize,
    #[arg(long, default_value_t = 40)]
    max_events: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Fraction of cells left unobserved in the output.
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Long CSV with native missingness applied.
    #[arg(long)]
    out: PathBuf,
    /// Long CSV with every value.
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Feature manifest (`feature,kind`).
    #[arg(long)]
    manifest_out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Long CSV `visit_id,time_min,feature,value`.
    #[arg(long)]
    input: PathBuf,
    /// Feature manifest `feature,kind`.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Probability of hiding each observed cell.
    #[arg(long, conflicts_with = "one_per_feature", required_unless_present = "one_per_feature")]
    rate: Option<f64>,
    /// Hide one observation per (visit, feature) with at least two.
    #[arg(long)]
    one_per_feature: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Masked long CSV.
    #[arg(long)]
    out: PathBuf,
    /// Hidden cells and their true values.
    #[arg(long)]
    mask_out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// File of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `--set w1=0.7`. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ImputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "tadualcv")]
    method: String,
    #[command(flatten)]
    config: ConfigArgs,
    /// Completed wide CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-cell spread of the imputation (wide CSV).
    #[arg(long)]
    std_out: Option<PathBuf>,
    /// Missing indicators, 1 where the input had no value (wide CSV).
    #[arg(long)]
    mi_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Long CSV before masking.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    features: Option<PathBuf>,
    /// Mask file written by `mask`.
    #[arg(long)]
    truth_mask: PathBuf,
    /// Wide CSV written by `impute`.
    #[arg(long)]
    imputed: PathBuf,
    /// Method name recorded in the report.
    #[arg(long)]
    method: Option<String>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Long CSV; a synthetic dataset is generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    synth_visits: usize,
    #[arg(long, default_value_t = 8)]
    synth_features: usize,
    #[arg(long, default_value_t = 0)]
    synth_seed: u64,
    /// Mask rates; values above 1 are read as percentages.
    #[arg(long, value_delimiter = ',', default_value = "20,50,80")]
    rates: Vec<f64>,
    /// Also run the one-per-feature-visit mask.
    #[arg(long)]
    one_per_feature: bool,
    #[arg(long, value_delimiter = ',', default_value = "tadualcv,mice,meanfill")]
    methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[command(flatten)]
    config: ConfigArgs,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_manifest(path: Option<&PathBuf>) -> CliResult<Option<Vec<FeatureSpec>>> {
    path.map(|p| {
        let file = File::open(p).map_err(|e| io_failure(p, e))?;
        Ok(io::read_feature_manifest(BufReader::new(file))?)
    })
    .transpose()
}

fn read_long(path: &Path, manifest: Option<&[FeatureSpec]>) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    io::read_long_csv(BufReader::new(file), manifest).map_err(|e| match e {
        Error::Io(e) => io_failure(path, e),
        e => Failure::Data(format!("{}: {e}", path.display())),
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn build_config(args: &ConfigArgs) -> CliResult<Config> {
    let mut config = Config::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        config.apply_text(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k, v)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.check()?;
    Ok(config)
}

fn parse_method(name: &str) -> CliResult<MethodVariant> {
    name.parse::<MethodVariant>().map_err(|_| {
        let known: Vec<&str> = MethodVariant::ALL.iter().map(|m| m.name()).collect();
        Failure::Usage(format!("unknown method {name:?}; expected one of {}", known.join(", ")))
    })
}

fn write_report(out: Option<&PathBuf>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(e.to_string())),
    }
}

fn synth(args: SynthArgs) -> CliResult {
    let mut cfg = SynthConfig::new(args.visits, args.features, args.seed);
    cfg.events_per_visit = (args.min_events, args.max_events);
    cfg.noise_scale = args.noise;
    cfg.native_missing_rate = args.missing_rate;
    cfg.check()?;
    let (observed, truth) = generate(&cfg);
    io::write_long_csv(&observed, create(&args.out)?, false)?;
    if let Some(path) = &args.truth_out {
        io::write_long_csv(&truth, create(path)?, false)?;
    }
    if let Some(path) = &args.manifest_out {
        io::write_feature_manifest(&observed.features, create(path)?)?;
    }
    info!(
        "generated {} visits, {} events, {} observed cells",
        observed.n_visits(),
        observed.n_events(),
        observed.observed_count()
    );
    Ok(())
}

fn mask(args: MaskArgs) -> CliResult {
    let manifest = read_manifest(args.input.features.as_ref())?;
    let ds = read_long(&args.input.input, manifest.as_deref())?;
    let mask = match args.rate {
        Some(rate) => mask_random(&ds, rate, args.seed)?,
        None => mask_one_per_feature_visit(&ds, args.seed),
    };
    let masked = ds.apply_mask(&mask)?;
    io::write_long_csv(&masked, create(&args.out)?, true)?;
    io::write_mask_csv(&ds, &mask, create(&args.mask_out)?)?;
    info!("masked {} of {} observed cells", mask.len(), ds.observed_count());
    Ok(())
}

fn impute_cmd(args: ImputeArgs) -> CliResult {
    let variant = parse_method(&args.method)?;
    let config = build_config(&args.config)?;
    let manifest = read_manifest(args.input.features.as_ref())?;
    let ds = read_long(&args.input.input, manifest.as_deref())?;
    let out = impute(&ds, variant, &config)?;
    io::write_wide_csv(&out.data, create(&args.out)?)?;
    if let Some(path) = &args.std_out {
        io::write_std_csv(&out.data, &out.cell_std, create(path)?)?;
    }
    if let Some(path) = &args.mi_out {
        io::write_mi_csv(&out.data, &out.missing, create(path)?)?;
    }
    info!("{variant}: filled {} cells", ds.missing_count());
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> CliResult {
    let method = args.method.as_deref().map(parse_method).transpose()?;
    let manifest = read_manifest(args.features.as_ref())?;
    let reference = read_long(&args.reference, manifest.as_deref())?;
    let mask_file = File::open(&args.truth_mask).map_err(|e| io_failure(&args.truth_mask, e))?;
    let mask = io::read_mask_csv(BufReader::new(mask_file), &reference)?;
    let imputed_file = File::open(&args.imputed).map_err(|e| io_failure(&args.imputed, e))?;
    let imputed = io::read_wide_csv(BufReader::new(imputed_file), manifest.as_deref())?;
    let aligned = io::align_to(&reference, &imputed);
    let mut report = nrmse(&mask, &reference, &aligned)?;
    report.method = method;
    write_report(args.out.as_ref(), &render_reports(&[report]))
}

fn bench(args: BenchArgs) -> CliResult {
    let variants = args
        .methods
        .iter()
        .map(|m| parse_method(m.trim()))
        .collect::<CliResult<Vec<_>>>()?;
    let config = build_config(&args.config)?;
    let ds = match &args.input {
        Some(path) => {
            let manifest = read_manifest(args.features.as_ref())?;
            read_long(path, manifest.as_deref())?
        }
        None => {
            let cfg = SynthConfig::new(args.synth_visits, args.synth_features, args.synth_seed);
            cfg.check()?;
            generate(&cfg).0
        }
    };
    let mut masks: Vec<MaskSpec> = args
        .rates
        .iter()
        .map(|&r| MaskSpec::Rate(if r > 1.0 { r / 100.0 } else { r }))
        .collect();
    if args.one_per_feature {
        masks.push(MaskSpec::OnePerFeatureVisit);
    }
    if masks.is_empty() || args.seeds.is_empty() || variants.is_empty() {
        return Err(Failure::Usage("bench needs at least one rate, seed and method".into()));
    }
    let reports = run_experiment(&ds, &variants, &masks, &args.seeds, &config, config.execution())?;
    write_report(args.out.as_ref(), &render_reports(&reports))
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Mask(a) => mask(a),
        Command::Impute(a) => impute_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
