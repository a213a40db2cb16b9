use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jls::experiment::{presets, run_power_grid, run_type1_grid, ExperimentGrid, PValueMode, TestKind};
use jls::io::{
    load_config, load_phenotypes, resolve_output, write_genotypes, write_phenotypes, write_phenotypes_to, write_results_to,
    GenotypeMatrix, PhenotypeTable,
};
use jls::scan::{
    load_inputs, run_genesets, scan_variants, write_geneset_results_to, JointMethods, ScanConfig, ScanPValues,
};
use jls::simulate::{gen_genotypes_hwe, Effects, GenotypeSource};
use jls::transform::{inverse_normal_transform, BLOM_OFFSET};
use jls::{
    simulate_dataset, Execution, JlsConfig, JlsError, LeveneCenter, LocationTest, Model, PValueConvention,
    PermutationPlan, SetStatistic, Sex, SimulationSpec,
};

const OUTPUT_DIR_ENV: &str = "JLS_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "jls", version, about = "Joint location-scale association testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every variant of a genotype file.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
    /// Permutation test of gene-set sums.
    #[command(args_override_self = true)]
    Geneset(GenesetArgs),
    /// Write a simulated phenotype and genotype file pair.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Empirical type 1 error under the null.
    #[command(args_override_self = true)]
    Calibrate(CalibrateArgs),
    /// Empirical power under an interaction model.
    #[command(args_override_self = true)]
    Power(PowerArgs),
    /// Inverse normal transform of a phenotype file.
    #[command(args_override_self = true)]
    Transform(TransformArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master random seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum LocationArg {
    Ols,
    Anova,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ScaleArg {
    LeveneMean,
    LeveneMedian,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum JointArg {
    Fisher,
    Minp,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ConventionArg {
    AddOne,
    Strict,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SetStatArg {
    Fisher,
    Minp,
}

#[derive(Args, Debug, Clone)]
struct TestArgs {
    #[arg(long, value_enum, default_value = "ols")]
    location: LocationArg,
    #[arg(long, value_enum, default_value = "levene-mean")]
    scale: ScaleArg,
    /// Groups smaller than this are dropped from the scale test and LRT.
    #[arg(long, default_value_t = 2)]
    min_group_size: usize,
    /// Also run the likelihood ratio test.
    #[arg(long)]
    lrt: bool,
}

impl TestArgs {
    fn config(&self) -> JlsConfig {
        JlsConfig {
            location: match self.location {
                LocationArg::Ols => LocationTest::Ols,
                LocationArg::Anova => LocationTest::Anova,
            },
            scale_center: match self.scale {
                ScaleArg::LeveneMean => LeveneCenter::Mean,
                ScaleArg::LeveneMedian => LeveneCenter::Median,
            },
            min_group_size: self.min_group_size,
            include_lrt: self.lrt,
            ..JlsConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long)]
    phenotype: PathBuf,
    #[arg(long)]
    genotype: PathBuf,
    #[command(flatten)]
    tests: TestArgs,
    #[arg(long, value_enum, default_value = "both")]
    joint: JointArg,
    /// Mark variants whose joint p-value is at or below this level.
    #[arg(long)]
    flag_threshold: Option<f64>,
    /// Inverse normal transform the phenotype before testing.
    #[arg(long)]
    int: bool,
    /// Rank offset of the transform (0.375 Blom, 0.5 Hazen).
    #[arg(long, default_value_t = BLOM_OFFSET)]
    int_offset: f64,
    #[arg(long, value_enum, default_value = "add-one")]
    convention: ConventionArg,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Permutation replicates; asymptotic p-values when omitted.
    #[arg(long)]
    permutations: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GenesetArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    genesets: PathBuf,
    #[arg(long, default_value_t = 999)]
    permutations: usize,
    #[arg(long, value_enum, default_value = "fisher")]
    set_statistic: SetStatArg,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    Null,
    I,
    Ii,
    Iii,
}

impl ModelArg {
    fn model(self) -> Model {
        match self {
            ModelArg::Null => Model::Null,
            ModelArg::I => Model::I,
            ModelArg::Ii => Model::II,
            ModelArg::Iii => Model::III,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "null")]
    model: ModelArg,
    #[arg(short = 'n', long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0.3)]
    maf: f64,
    /// Fixed genotype group sizes `n0/n1/n2` instead of HWE draws.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_g: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_e1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_e2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_ge1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_ge2: f64,
    #[arg(long, default_value_t = 0.3)]
    f1: f64,
    #[arg(long, default_value_t = 0.3)]
    f2: f64,
    /// Extra independent null variants written after the simulated one.
    #[arg(long, default_value_t = 0)]
    null_variants: usize,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long)]
    replicates: Option<usize>,
    /// Comma-separated significance levels.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Comma-separated tests (location, scale, jls_fisher, jls_minp, lrt).
    #[arg(long, value_delimiter = ',')]
    tests: Vec<String>,
    /// Permutation p-values with this many replicates per dataset.
    #[arg(long)]
    permutations: Option<usize>,
    #[command(flatten)]
    tests_config: TestArgs,
}

#[derive(Args, Debug, Clone)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(short = 'n', long, default_value_t = 2000)]
    samples: usize,
    /// Comma-separated minor allele frequencies.
    #[arg(long, value_delimiter = ',')]
    maf: Vec<f64>,
    /// Comma-separated fixed group sizes, each `n0/n1/n2`.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PowerPreset {
    ModelI,
    ModelIi,
    ModelIii,
}

#[derive(Args, Debug, Clone)]
struct PowerArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "model-i")]
    preset: PowerPreset,
    #[arg(short = 'n', long, default_value_t = 2000)]
    samples: usize,
    /// Main genetic effect of the model (i) sweep.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_g: f64,
    /// Fixed first interaction of the model (ii) sweep.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    beta_ge1: f64,
}

#[derive(Args, Debug, Clone)]
struct TransformArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    phenotype: PathBuf,
    #[arg(long, default_value_t = BLOM_OFFSET)]
    int_offset: f64,
}

enum Failure {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl From<JlsError> for Failure {
    fn from(e: JlsError) -> Self {
        match e {
            JlsError::InvalidInput(_) => Failure::Usage(e.to_string()),
            e if e.is_data_error() => Failure::Data(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Runtime(m) => m,
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Inserts `--key value` pairs from any `--config FILE` right after the
/// subcommand, so flags given later on the command line override them.
fn expand_config(args: Vec<String>) -> std::result::Result<Vec<String>, Failure> {
    let pos = args.iter().position(|a| a == "--config");
    let path = match pos.and_then(|p| args.get(p + 1)) {
        Some(p) => PathBuf::from(p),
        None => {
            if let Some(a) = args.iter().find_map(|a| a.strip_prefix("--config=")) {
                PathBuf::from(a)
            } else {
                return Ok(args);
            }
        }
    };
    if args.len() < 2 {
        return Ok(args);
    }
    let entries = load_config(&path).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut injected = Vec::new();
    for (key, value) in entries {
        let flag = format!("--{}", key.replace('_', "-"));
        match value.as_str() {
            "true" => injected.push(flag),
            "false" => {}
            _ => {
                injected.push(flag);
                injected.push(value);
            }
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Writes `content` to the resolved `--out` path or to standard output.
fn emit(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Outcome {
    match out {
        Some(p) => {
            let path = resolve_output(p, output_dir().as_deref());
            if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", parent.display())))?;
            }
            let file = std::fs::File::create(&path)
                .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match write(&mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Runtime(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn require_readable(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("cannot read input file {}", path.display())))
    }
}

fn convention(c: ConventionArg) -> PValueConvention {
    match c {
        ConventionArg::AddOne => PValueConvention::AddOne,
        ConventionArg::Strict => PValueConvention::Strict,
    }
}

fn scan_config(input: &InputArgs) -> std::result::Result<ScanConfig, Failure> {
    require_readable(&input.phenotype)?;
    require_readable(&input.genotype)?;
    let mut cfg = ScanConfig::new(&input.phenotype, &input.genotype);
    cfg.jls = input.tests.config();
    cfg.joint = match input.joint {
        JointArg::Fisher => JointMethods::Fisher,
        JointArg::Minp => JointMethods::MinP,
        JointArg::Both => JointMethods::Both,
    };
    cfg.flag_threshold = input.flag_threshold;
    cfg.inverse_normal = input.int.then_some(input.int_offset);
    Ok(cfg)
}

fn plan(replicates: usize, seed: u64, c: ConventionArg) -> PermutationPlan {
    PermutationPlan {
        convention: convention(c),
        ..PermutationPlan::new(replicates, seed)
    }
}

fn cmd_scan(a: &ScanArgs) -> Outcome {
    let mut cfg = scan_config(&a.input)?;
    if let Some(k) = a.permutations {
        cfg.pvalues = ScanPValues::Permutation(plan(k, a.common.seed, a.input.convention));
    }
    cfg.validate()?;
    let inputs = load_inputs(&cfg)?;
    eprintln!("{}", inputs.frame.report);
    let out = scan_variants(&inputs, &cfg)?;
    eprintln!(
        "scanned {} variants: {} degenerate, {} flagged",
        out.records.len(),
        out.degenerate,
        out.flagged
    );
    emit(&a.common.out, |w| write_results_to(&out.records, w))
}

fn cmd_geneset(a: &GenesetArgs) -> Outcome {
    let mut cfg = scan_config(&a.input)?;
    require_readable(&a.genesets)?;
    cfg.genesets = Some(a.genesets.clone());
    cfg.pvalues = ScanPValues::Permutation(plan(a.permutations, a.common.seed, a.input.convention));
    cfg.set_statistic = match a.set_statistic {
        SetStatArg::Fisher => SetStatistic::Fisher,
        SetStatArg::Minp => SetStatistic::MinP,
    };
    let records = run_genesets(&cfg)?;
    for r in records.iter().filter(|r| !r.unresolved.is_empty()) {
        eprintln!(
            "gene set {}: {} of {} variants not in the genotype file",
            r.set_id,
            r.unresolved.len(),
            r.j_listed
        );
    }
    emit(&a.common.out, |w| write_geneset_results_to(&records, w))
}

fn parse_sizes(s: &str) -> std::result::Result<[usize; 3], Failure> {
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Failure::Usage(format!("group sizes {s:?} must look like n0/n1/n2"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0usize; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.trim().parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let genotypes = match &a.sizes {
        Some(s) => GenotypeSource::Fixed(parse_sizes(s)?),
        None => GenotypeSource::Maf(a.maf),
    };
    let n = match genotypes {
        GenotypeSource::Fixed(s) => s.iter().sum(),
        GenotypeSource::Maf(_) => a.samples,
    };
    let spec = SimulationSpec {
        model: a.model.model(),
        n,
        genotypes,
        effects: Effects {
            beta_g: a.beta_g,
            beta_e1: a.beta_e1,
            beta_e2: a.beta_e2,
            beta_ge1: a.beta_ge1,
            beta_ge2: a.beta_ge2,
        },
        f1: a.f1,
        f2: a.f2,
        seed: a.common.seed,
    };
    let data = simulate_dataset(&spec)?;
    let ids: Vec<String> = (0..n).map(|i| format!("s{i:06}")).collect();
    let mut variants = vec![{
        let mut g = data.genotype_vector("sim0");
        g.chrom = "1".into();
        g
    }];
    for j in 0..a.null_variants {
        let seed = jls::seed::substream_seed(a.common.seed ^ 0x6e75_6c6c, j as u64);
        let mut g = gen_genotypes_hwe(a.maf, n, seed)?;
        g.variant_id = format!("null{}", j + 1);
        variants.push(g);
    }
    let matrix = GenotypeMatrix::new(ids.clone(), variants)?;
    let table = PhenotypeTable {
        trait_name: "phenotype".into(),
        sample_ids: ids,
        values: data.phenotype.iter().map(|&v| Some(v)).collect(),
        sexes: vec![Sex::Unknown; n],
        has_sex: false,
    };
    let dir = resolve_output(
        a.common.out.as_deref().unwrap_or(Path::new(".")),
        output_dir().as_deref(),
    );
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    write_phenotypes(&table, dir.join("phenotypes.tsv"))?;
    write_genotypes(&matrix, dir.join("genotypes.tsv"))?;
    eprintln!("wrote {} samples and {} variants to {}", n, matrix.variants.len(), dir.display());
    Ok(())
}

fn build_grid(g: &GridArgs, cells: Vec<jls::experiment::GridCell>, default_reps: usize, default_alphas: &[f64], seed: u64) -> std::result::Result<ExperimentGrid, Failure> {
    let alphas = if g.alpha.is_empty() { default_alphas.to_vec() } else { g.alpha.clone() };
    let mut grid = ExperimentGrid::new(cells, g.replicates.unwrap_or(default_reps), alphas);
    grid.config = JlsConfig {
        include_lrt: true,
        ..g.tests_config.config()
    };
    if !g.tests.is_empty() {
        grid.tests = g
            .tests
            .iter()
            .map(|t| TestKind::parse(t).ok_or_else(|| Failure::Usage(format!("unknown test {t:?}"))))
            .collect::<std::result::Result<_, _>>()?;
    }
    if let Some(k) = g.permutations {
        grid.pvalue_mode = PValueMode::Permutation {
            replicates: k,
            convention: PValueConvention::AddOne,
        };
    }
    grid.seed = seed;
    grid.execution = Execution::Parallel;
    Ok(grid)
}

fn cmd_calibrate(a: &CalibrateArgs) -> Outcome {
    let mut cells = presets::type1_by_maf(&a.maf, a.samples);
    let sizes = a.sizes.iter().map(|s| parse_sizes(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    cells.extend(presets::type1_by_group_sizes(&sizes));
    if cells.is_empty() {
        cells = presets::type1_by_maf(&[0.3], a.samples);
    }
    let grid = build_grid(&a.grid, cells, presets::TYPE1_REPLICATES, &presets::TYPE1_ALPHAS, a.common.seed)?;
    let table = run_type1_grid(&grid)?;
    emit(&a.common.out, |w| w.write_all(table.to_tsv().as_bytes()))
}

fn cmd_power(a: &PowerArgs) -> Outcome {
    let cells = match a.preset {
        PowerPreset::ModelI => presets::model_i_sweep(a.beta_g, a.samples),
        PowerPreset::ModelIi => presets::model_ii_sweep(a.beta_ge1, a.samples),
        PowerPreset::ModelIii => presets::model_iii_rows(a.samples),
    };
    let grid = build_grid(&a.grid, cells, presets::POWER_REPLICATES, &[presets::POWER_ALPHA], a.common.seed)?;
    let table = run_power_grid(&grid)?;
    emit(&a.common.out, |w| w.write_all(table.to_tsv().as_bytes()))
}

fn cmd_transform(a: &TransformArgs) -> Outcome {
    require_readable(&a.phenotype)?;
    let mut table = load_phenotypes(&a.phenotype)?;
    table.values = inverse_normal_transform(&table.values, a.int_offset)?;
    emit(&a.common.out, |w| write_phenotypes_to(&table, w))
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Scan(a) => &a.common,
        Command::Geneset(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Calibrate(a) => &a.common,
        Command::Power(a) => &a.common,
        Command::Transform(a) => &a.common,
    }
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Scan(a) => cmd_scan(a),
        Command::Geneset(a) => cmd_geneset(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Power(a) => cmd_power(a),
        Command::Transform(a) => cmd_transform(a),
    }
}

#[cfg(feature = "parallel")]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Runtime(format!("cannot start worker pool: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        _ => f(),
    }
}

fn run(args: Vec<String>) -> Outcome {
    let args = expand_config(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(Failure::Usage(e.render().to_string())),
    };
    with_threads(common(&cli.command).threads, || dispatch(&cli.command))
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("jls: {}", f.message().trim_end());
            ExitCode::from(f.code())
        }
    }
}
