//! `polarnet` command-line front end.

mod context;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polarnet::calendar::{parse_date, DateRange, Quarter};
use polarnet::community::{detect, modularity, Algorithm};
use polarnet::graph::{project, BipartiteGraph, ProjectionGraph};
use polarnet::ingest::{
    dataset_summary, filter_dataset, parse_records, read_labels, side_map, write_labels, write_records, ActionKind,
    Dataset, Format, SideMap,
};
use polarnet::metrics::{
    detected_sides, exposure_curves, polarization_histogram, user_engagement, user_polarization, write_exposure,
    write_profiles, ExposureAxis, ExposureOptions, Window,
};
use polarnet::synth::{generate, write_truth, ActivityDist, SynthConfig};
use polarnet::temporal::{
    activity_series, cohesion_series, write_cohesion, write_series, write_tests, CohesionOptions, EpochTest, Measure,
};
use polarnet::validation::{run_validation_matrix, write_validation};

use context::Context;

#[derive(Parser)]
#[command(name = "polarnet", version, about = "Polarization analysis of user-page interaction networks")]
struct Cli {
    /// Global seed; every randomized step derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-polarization corpus.
    Synth(SynthArgs),
    /// Parse, validate and filter an interaction file.
    Ingest(IngestArgs),
    /// Per-side corpus breakdown.
    Summary(SummaryArgs),
    /// Weighted page projection of one action kind.
    Project(ProjectArgs),
    /// Community detection on a page projection.
    Detect(DetectArgs),
    /// Rand-index validation matrix.
    Validate(ValidateArgs),
    /// Per-user polarization and its histogram.
    Polarize(PolarizeArgs),
    /// Selective-exposure curves.
    Exposure(ExposureArgs),
    /// Quarterly activity series.
    Timeline(TimelineArgs),
    /// Quarterly community cohesion.
    Cohesion(CohesionArgs),
    /// Two-way ANOVA / MANOVA on the activity series.
    Anova(AnovaArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Interaction records.
    #[arg(long, short)]
    input: PathBuf,
    /// Record format (jsonl or csv); guessed from the extension when absent.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideSource {
    Labels,
    Detected,
}

#[derive(Args)]
struct SidesArgs {
    /// Page label file (`page_id,label`).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Where page sides come from.
    #[arg(long, value_enum, default_value = "labels")]
    sides: SideSource,
    /// Algorithm used for `--sides detected`.
    #[arg(long, default_value = "fastgreedy")]
    detect_algorithm: Algorithm,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_delimiter = ',', default_value = "5000,5000")]
    users: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "145,98")]
    pages: Vec<usize>,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 0.2)]
    comment_fraction: f64,
    #[arg(long, default_value_t = 40)]
    posts_per_page: usize,
    /// Log-normal activity parameters.
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Fixed number of actions per user instead of the log-normal draw.
    #[arg(long)]
    fixed_actions: Option<u64>,
    #[arg(long, default_value = "2010-01-01")]
    from: String,
    #[arg(long, default_value = "2017-05-31")]
    to: String,
    /// Pro pages split into user-disjoint blocks of these sizes.
    #[arg(long, value_delimiter = ',')]
    pro_blocks: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    anti_blocks: Vec<usize>,
    #[arg(long, default_value = "data.jsonl")]
    out: PathBuf,
    #[arg(long, default_value = "truth.csv")]
    truth: PathBuf,
    #[arg(long, default_value = "labels.csv")]
    labels: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0)]
    min_posts: usize,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "clean.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct SummaryArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "summary.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "like")]
    action: ActionKind,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Interaction records; the projection is built from them.
    #[arg(long, short, conflicts_with = "graph")]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Projection edge list written by `project`.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "like")]
    action: ActionKind,
    /// Comma-separated algorithms or `all`.
    #[arg(long, default_value = "all")]
    algorithms: String,
    #[arg(long, default_value = "detect.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "validation.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PolarizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    sides: SidesArgs,
    #[arg(long, default_value = "like")]
    action: ActionKind,
    #[arg(long, default_value_t = 10)]
    min_actions: u64,
    #[arg(long, default_value_t = 21)]
    bins: usize,
    #[arg(long, default_value = "pdf.csv")]
    out: PathBuf,
    /// Also write per-user profiles.
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Args)]
struct ExposureArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    sides: SidesArgs,
    #[arg(long, default_value = "like")]
    action: ActionKind,
    #[arg(long, default_value = "year")]
    window: Window,
    #[arg(long, default_value = "lifetime")]
    axis: ExposureAxis,
    #[arg(long, default_value_t = 0.75)]
    span: f64,
    #[arg(long, default_value_t = 21)]
    points: usize,
    #[arg(long)]
    standardize_pages: bool,
    #[arg(long, default_value = "curve.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct TimelineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    sides: SidesArgs,
    #[arg(long, default_value = "series.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct CohesionArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    sides: SidesArgs,
    #[arg(long, default_value = "like")]
    action: ActionKind,
    #[arg(long, default_value = "all")]
    algorithms: String,
    /// Grow the graph from the first quarter instead of one quarter at a time.
    #[arg(long)]
    cumulative: bool,
    #[arg(long, default_value = "cohesion.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct AnovaArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    sides: SidesArgs,
    /// Dependent measures; with --split runs one test instead of the defaults.
    #[arg(long, value_delimiter = ',')]
    dv: Vec<Measure>,
    #[arg(long)]
    split: Option<Quarter>,
    #[arg(long, default_value = "tests.csv")]
    out: PathBuf,
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

fn date_range(from: Option<&str>, to: Option<&str>) -> Result<Option<DateRange>> {
    if from.is_none() && to.is_none() {
        return Ok(None);
    }
    let start = parse_date(from.unwrap_or("1970-01-01"))?;
    let end = parse_date(to.unwrap_or("9999-12-31"))?;
    Ok(Some(DateRange::new(start, end)?))
}

fn guess_format(path: &Path, format: Option<Format>) -> Format {
    format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Jsonl,
    })
}

fn load(ctx: &mut Context, path: &Path, format: Option<Format>, strict: bool) -> Result<Dataset> {
    let reader = ctx.open(path)?;
    let (d, report) = parse_records(reader, guess_format(path, format), strict)
        .with_context(|| format!("reading {}", path.display()))?;
    if report.skipped > 0 {
        warn(format_args!("{}: skipped {} malformed line(s)", path.display(), report.skipped));
        for (line, reason) in &report.rejects {
            warn(format_args!("  line {line}: {reason}"));
        }
    }
    Ok(d)
}

fn load_input(ctx: &mut Context, input: &InputArgs) -> Result<Dataset> {
    load(ctx, &input.input, input.format, false)
}

fn load_sides_from_labels(ctx: &mut Context, path: &Path) -> Result<SideMap> {
    let labels = read_labels(ctx.open(path)?).with_context(|| format!("reading {}", path.display()))?;
    Ok(side_map(&labels))
}

fn resolve_sides(ctx: &mut Context, d: &Dataset, args: &SidesArgs, kind: ActionKind) -> Result<SideMap> {
    match args.sides {
        SideSource::Labels => {
            let Some(path) = &args.labels else { bail!("--labels is required with --sides labels") };
            load_sides_from_labels(ctx, path)
        }
        SideSource::Detected => {
            let g = project(&BipartiteGraph::build(d, kind, None));
            let seed = ctx.seed("detect_sides");
            let det = detect(&g, args.detect_algorithm, seed)?;
            Ok(detected_sides(&det.partition)?)
        }
    }
}

fn parse_algorithms(text: &str) -> Result<Vec<Algorithm>> {
    if text == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    text.split(',').map(|s| s.trim().parse::<Algorithm>().map_err(anyhow::Error::msg)).collect()
}

fn run_synth(ctx: &mut Context, a: &SynthArgs) -> Result<()> {
    if a.users.len() != 2 || a.pages.len() != 2 {
        bail!("--users and --pages take two comma-separated counts (pro,anti)");
    }
    let actions_per_user = match a.fixed_actions {
        Some(n) => ActivityDist::Fixed { n },
        None => ActivityDist::LogNormal { mu: a.mu, sigma: a.sigma },
    };
    let config = SynthConfig {
        users: (a.users[0], a.users[1]),
        pages: (a.pages[0], a.pages[1]),
        p_out: a.p_out,
        actions_per_user,
        comment_fraction: a.comment_fraction,
        posts_per_page: a.posts_per_page,
        time_range: DateRange::new(parse_date(&a.from)?, parse_date(&a.to)?)?,
        seed: ctx.seed("generate"),
        blocks: (a.pro_blocks.clone(), a.anti_blocks.clone()),
    };
    let s = generate(&config)?;
    let format = guess_format(&a.out, None);
    ctx.write(&a.out, |w| write_records(&s.dataset, format, w))?;
    ctx.write(&a.truth, |w| write_truth(&s.truth, w))?;
    ctx.write(&a.labels, |w| write_labels(&s.labels, w))?;
    Ok(())
}

fn run_ingest(ctx: &mut Context, a: &IngestArgs) -> Result<()> {
    let d = load(ctx, &a.input.input, a.input.format, a.strict)?;
    let range = date_range(a.from.as_deref(), a.to.as_deref())?;
    let filtered = match range {
        Some(r) => filter_dataset(&d, a.min_posts, &r),
        None if a.min_posts > 0 => {
            let all = DateRange::new(parse_date("1970-01-01")?, parse_date("9999-12-31")?)?;
            filter_dataset(&d, a.min_posts, &all)
        }
        None => d,
    };
    let format = guess_format(&a.out, None);
    ctx.write(&a.out, |w| write_records(&filtered, format, w))
}

fn run_summary(ctx: &mut Context, a: &SummaryArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let labels = read_labels(ctx.open(&a.labels)?)?;
    let table = dataset_summary(&d, &labels);
    ctx.write(&a.out, |w| table.write_csv(w))
}

fn run_project(ctx: &mut Context, a: &ProjectArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let window = date_range(a.from.as_deref(), a.to.as_deref())?;
    let g = project(&BipartiteGraph::build(&d, a.action, window));
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("projection_{}.csv", a.action)));
    ctx.write(&out, |w| g.write_csv(w))
}

fn run_detect(ctx: &mut Context, a: &DetectArgs) -> Result<()> {
    let g = match (&a.input, &a.graph) {
        (Some(input), None) => {
            let d = load(ctx, input, a.format, false)?;
            project(&BipartiteGraph::build(&d, a.action, None))
        }
        (None, Some(path)) => {
            ProjectionGraph::read_csv(ctx.open(path)?).with_context(|| format!("reading {}", path.display()))?
        }
        _ => bail!("exactly one of --input or --graph is required"),
    };
    let mut summary = String::from("algorithm,communities,largest,modularity,converged\n");
    for alg in parse_algorithms(&a.algorithms)? {
        let seed = ctx.seed(alg.as_str());
        let det = detect(&g, alg, seed)?;
        if !det.converged {
            warn(format_args!("{alg} stopped at its sweep cap without converging"));
        }
        let q = modularity(&g, &det.partition)?;
        summary.push_str(&format!(
            "{alg},{},{},{q},{}\n",
            det.partition.community_count(),
            det.partition.largest(),
            det.converged
        ));
        ctx.write(Path::new(&format!("partition_{alg}.csv")), |w| det.partition.write_csv(w))?;
        if let Some(dendrogram) = &det.dendrogram {
            ctx.write(Path::new(&format!("dendrogram_{alg}.csv")), |w| dendrogram.write_csv(w))?;
        }
    }
    ctx.write(&a.out, |w| Ok(w.write_all(summary.as_bytes())?))
}

fn run_validate(ctx: &mut Context, a: &ValidateArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = load_sides_from_labels(ctx, &a.labels)?;
    let seed = ctx.seed("validate");
    let v = run_validation_matrix(&d, &sides, seed)?;
    for w in &v.warnings {
        warn(w);
    }
    ctx.write(&a.out, |w| write_validation(&v, w))
}

fn run_polarize(ctx: &mut Context, a: &PolarizeArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = resolve_sides(ctx, &d, &a.sides, a.action)?;
    let profiles = user_polarization(&d, a.action, &sides, a.min_actions)?;
    if profiles.is_empty() {
        warn(format_args!("no user has at least {} {} actions on sided pages", a.min_actions, a.action));
    }
    let hist = polarization_histogram(&profiles, a.bins)?;
    ctx.write(&a.out, |w| hist.write_csv(w))?;
    if let Some(path) = &a.profiles {
        ctx.write(path, |w| write_profiles(&profiles, w))?;
    }
    Ok(())
}

fn run_exposure(ctx: &mut Context, a: &ExposureArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = resolve_sides(ctx, &d, &a.sides, a.action)?;
    let opts = ExposureOptions {
        window: a.window,
        axis: a.axis,
        span: a.span,
        points: a.points,
        standardize_pages: a.standardize_pages,
        kind: a.action,
    };
    for (side, what) in user_engagement(&d, &sides, a.action)?.degenerate {
        warn(format_args!("{side}: {what} has zero range; standardized to 0"));
    }
    let curves = exposure_curves(&d, &sides, &opts)?;
    for c in &curves {
        if c.points.iter().any(|p| p.degenerate) {
            warn(format_args!("{}: local fit fell back to a constant at some points", c.community));
        }
    }
    ctx.write(&a.out, |w| write_exposure(&curves, w))
}

fn run_timeline(ctx: &mut Context, a: &TimelineArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = resolve_sides(ctx, &d, &a.sides, ActionKind::Like)?;
    let series = activity_series(&d, &sides);
    ctx.write(&a.out, |w| write_series(&series, w))
}

fn run_cohesion(ctx: &mut Context, a: &CohesionArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = resolve_sides(ctx, &d, &a.sides, a.action)?;
    let opts = CohesionOptions {
        kind: a.action,
        algorithms: parse_algorithms(&a.algorithms)?,
        cumulative: a.cumulative,
        seed: ctx.seed("cohesion"),
    };
    let points = cohesion_series(&d, &sides, &opts)?;
    let flagged = points.iter().filter(|p| p.degenerate).count();
    if flagged > 0 {
        warn(format_args!("{flagged} cohesion point(s) flagged degenerate"));
    }
    ctx.write(&a.out, |w| write_cohesion(&points, w))
}

fn run_anova(ctx: &mut Context, a: &AnovaArgs) -> Result<()> {
    let d = load_input(ctx, &a.input)?;
    let sides = resolve_sides(ctx, &d, &a.sides, ActionKind::Like)?;
    let series = activity_series(&d, &sides);
    let tests = match (a.dv.is_empty(), a.split) {
        (true, None) => EpochTest::defaults(),
        (false, Some(split)) => vec![EpochTest { measures: a.dv.clone(), split }],
        _ => bail!("--dv and --split must be given together"),
    };
    let mut rows = Vec::new();
    for t in tests {
        let r = t.run(&series).with_context(|| format!("test split at {}", t.split))?;
        if r.degenerate {
            warn(format_args!("test split at {} is degenerate", t.split));
        }
        rows.push((t, r));
    }
    ctx.write(&a.out, |w| write_tests(&rows, w))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    let name = match &cli.command {
        Command::Synth(_) => "synth",
        Command::Ingest(_) => "ingest",
        Command::Summary(_) => "summary",
        Command::Project(_) => "project",
        Command::Detect(_) => "detect",
        Command::Validate(_) => "validate",
        Command::Polarize(_) => "polarize",
        Command::Exposure(_) => "exposure",
        Command::Timeline(_) => "timeline",
        Command::Cohesion(_) => "cohesion",
        Command::Anova(_) => "anova",
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut ctx = Context::new(cli.out_dir.clone(), cli.seed, name, serde_json::json!(argv))?;
    match &cli.command {
        Command::Synth(a) => run_synth(&mut ctx, a)?,
        Command::Ingest(a) => run_ingest(&mut ctx, a)?,
        Command::Summary(a) => run_summary(&mut ctx, a)?,
        Command::Project(a) => run_project(&mut ctx, a)?,
        Command::Detect(a) => run_detect(&mut ctx, a)?,
        Command::Validate(a) => run_validate(&mut ctx, a)?,
        Command::Polarize(a) => run_polarize(&mut ctx, a)?,
        Command::Exposure(a) => run_exposure(&mut ctx, a)?,
        Command::Timeline(a) => run_timeline(&mut ctx, a)?,
        Command::Cohesion(a) => run_cohesion(&mut ctx, a)?,
        Command::Anova(a) => run_anova(&mut ctx, a)?,
    }
    ctx.finish()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
