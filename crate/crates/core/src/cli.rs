//! `typerec` command line: synthesize and validate survey data, cluster,
//! evaluate, build pair tables, export scatter data and recommend.
//!
//! Every subcommand renders its full output in memory before touching the
//! output file, so failed runs never leave partial artifacts.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::analysis::{frequency_bars, inclination, pair_rating_table, scatter_export};
use crate::cluster_eval::{evaluate, report_json, write_report_csv, EvaluationReport};
use crate::domain::{default_catalog, parse_mbti, Dataset, GenreCatalog, MbtiType};
use crate::error::Error;
use crate::ingest::{
    dataset_to_csv, generate_synthetic, load_dataset, skew_summary, type_frequencies, RatingModel,
    SynthConfig, TypeFrequencyTable,
};
use crate::kmeans::{fit, InitMethod, KmeansConfig, Method};
use crate::linalg::Matrix;
use crate::pca::fit_pca;
use crate::recommend::{
    build_profiles, recommend_for_type, recommend_for_user, render_text, RecommendOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "typerec",
    version,
    about = "Personality-type survey analytics and genre recommendations"
)]
struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Genre catalog CSV (`category,genre`); defaults to the built-in 121-genre layout.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Output format; inferred from the -o extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic survey dataset.
    Synth(SynthArgs),
    /// Load and validate a dataset, printing a summary.
    Validate(ValidateArgs),
    /// Run k-means and write cluster assignments.
    Cluster(ClusterArgs),
    /// Evaluate clustering methods per category and write the report table.
    Evaluate(EvaluateArgs),
    /// Joint rating counts of two genres for one type.
    Pairtable(PairArgs),
    /// Rank genres for a type or a respondent.
    Recommend(RecommendArgs),
    /// PCA scatter coordinates, optionally with clusters and centroids.
    Scatter(ScatterArgs),
    /// Type frequency bars.
    Freq(FreqArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Use the 1020-respondent survey frequencies.
    #[arg(long, conflicts_with = "freq_file")]
    paper_frequencies: bool,
    /// JSON object mapping type codes to counts.
    #[arg(long)]
    freq_file: Option<PathBuf>,
    /// Full generator configuration as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KmeansArgs {
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_tol)]
    tol: f64,
}

impl KmeansArgs {
    fn config(&self, seed: u64) -> KmeansConfig {
        KmeansConfig {
            k: self.k as usize,
            restarts: self.restarts as usize,
            max_iters: self.max_iters as usize,
            tol: self.tol,
            seed,
            ..KmeansConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    kmeans: KmeansArgs,
    #[arg(long, default_value = "kmeans++", value_parser = parse_init)]
    init: InitMethod,
    /// Cluster in this many principal components (the PCA-based regime).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pca_dims: Option<u64>,
    /// Restrict features to one category.
    #[arg(long)]
    category: Option<String>,
    /// Write 0 for elapsed time so output depends only on inputs and seed.
    #[arg(long)]
    no_timing: bool,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    kmeans: KmeansArgs,
    /// kmeans++, random or pca; repeatable. Defaults to all three.
    #[arg(long = "method", value_parser = parse_method)]
    methods: Vec<Method>,
    /// Feature category; repeatable. Defaults to every catalog category.
    #[arg(long = "category")]
    categories: Vec<String>,
    /// Evaluate on all genres at once instead of per category.
    #[arg(long, conflicts_with = "categories")]
    all_features: bool,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pca_dims: u64,
    #[arg(long)]
    no_timing: bool,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "type", value_parser = parse_type)]
    mbti: MbtiType,
    #[arg(long)]
    genre_a: String,
    #[arg(long)]
    genre_b: String,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "type", value_parser = parse_type, required_unless_present = "user_row")]
    mbti: Option<MbtiType>,
    /// Respondent id whose own ratings are blended in.
    #[arg(long)]
    user_row: Option<String>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_unit)]
    blend: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
    #[arg(long)]
    category: Option<String>,
    #[arg(long, default_value_t = 5)]
    min_support: u64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=3))]
    dims: u64,
    /// Attach a k-means clustering with this many clusters, run in the projected space.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    with_clusters: Option<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    /// Comma-separated type codes to keep (e.g. one half of the 16 types).
    #[arg(long, value_delimiter = ',', value_parser = parse_type)]
    types: Vec<MbtiType>,
    #[arg(long)]
    category: Option<String>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FreqArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated bar order; defaults to all types by descending count.
    #[arg(long, value_delimiter = ',', value_parser = parse_type)]
    types: Vec<MbtiType>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

fn parse_type(s: &str) -> Result<MbtiType, String> {
    parse_mbti(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_init(s: &str) -> Result<InitMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("tol must be a finite value >= 0, got {v}"))
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = Result<Output, Failure>;

/// Rendered output plus an optional note for the error stream.
struct Output {
    bytes: Vec<u8>,
    path: Option<PathBuf>,
    note: Option<String>,
}

struct Context {
    seed: Option<u64>,
    catalog_path: Option<PathBuf>,
    format: Option<Format>,
}

impl Context {
    fn catalog(&self) -> Result<GenreCatalog, Error> {
        match &self.catalog_path {
            Some(p) => GenreCatalog::load(p),
            None => Ok(default_catalog()),
        }
    }

    fn load(&self, input: &Path) -> Result<Dataset, Error> {
        load_dataset(input, &self.catalog()?)
    }

    /// Explicit `--format`, else the output extension, else `default`.
    fn format(
        &self,
        output: &Option<PathBuf>,
        allowed: &[Format],
        default: Format,
    ) -> Result<Format, Failure> {
        let inferred = output.as_ref().and_then(|p| p.extension()).and_then(|e| {
            match e.to_str()?.to_ascii_lowercase().as_str() {
                "csv" => Some(Format::Csv),
                "json" => Some(Format::Json),
                "txt" | "text" => Some(Format::Text),
                _ => None,
            }
        });
        let f = self.format.or(inferred).unwrap_or(default);
        if !allowed.contains(&f) {
            let names: Vec<_> = allowed
                .iter()
                .map(|a| a.to_possible_value().unwrap().get_name().to_string())
                .collect();
            return Err(Failure::Usage(format!(
                "format {:?} not supported here (expected {})",
                f.to_possible_value().unwrap().get_name(),
                names.join(" or ")
            )));
        }
        Ok(f)
    }
}

fn columns_for(
    catalog: &GenreCatalog,
    category: &Option<String>,
) -> Result<std::ops::Range<usize>, Error> {
    match category {
        Some(c) => catalog
            .category_range(c)
            .ok_or_else(|| Error::UnknownCategory(c.clone())),
        None => Ok(0..catalog.len()),
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>, Error> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn synth(ctx: &Context, a: SynthArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(p) => {
            let f = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            Some(SynthConfig::read_json(f)?)
        }
        None => None,
    };
    let catalog = match (&ctx.catalog_path, &cfg) {
        (Some(_), _) | (None, None) => ctx.catalog()?,
        (None, Some(c)) => c.catalog.clone(),
    };
    let frequencies = if a.paper_frequencies {
        TypeFrequencyTable::survey()
    } else if let Some(p) = &a.freq_file {
        let f = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
        TypeFrequencyTable::read_json(f)?
    } else if let Some(c) = &cfg {
        c.frequencies
    } else {
        return Err(Failure::Usage(
            "synth needs --paper-frequencies, --freq-file or --config".into(),
        ));
    };
    let (rating_model, config_seed) = match cfg.take() {
        Some(c) => (c.rating_model, Some(c.seed)),
        None => (RatingModel::planted(&catalog), None),
    };
    let seed = ctx.seed.or(config_seed).unwrap_or(0);
    let config = SynthConfig {
        seed,
        frequencies,
        catalog,
        rating_model,
    };
    ctx.format(&a.output, &[Format::Csv], Format::Csv)?;
    let d = generate_synthetic(&config)?;
    Ok(Output {
        bytes: dataset_to_csv(&d)?,
        note: Some(format!("{} records, {} genres", d.len(), d.catalog().len())),
        path: a.output,
    })
}

fn validate(ctx: &Context, a: ValidateArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Text, Format::Json], Format::Text)?;
    let d = ctx.load(&a.input)?;
    let freq = type_frequencies(&d);
    let skew = skew_summary(&freq).ok();
    let bytes = match fmt {
        Format::Json => json_bytes(&serde_json::json!({
            "records": d.len(),
            "genres": d.catalog().len(),
            "categories": d.catalog().categories().iter()
                .map(|c| serde_json::json!({"name": c.name, "genres": c.genres.len()}))
                .collect::<Vec<_>>(),
            "frequencies": freq,
            "skew": skew,
        }))?,
        _ => {
            let mut s = format!("ok: {} records, {} genres\n", d.len(), d.catalog().len());
            for c in d.catalog().categories() {
                s.push_str(&format!("  {}: {}\n", c.name, c.genres.len()));
            }
            if let Some(k) = &skew {
                s.push_str(&format!(
                    "introvert fraction: {:.4} ({}/{})\n",
                    k.introvert_fraction, k.introvert_count, k.total
                ));
                let top: Vec<_> = k.top4.iter().map(|(t, n)| format!("{t}:{n}")).collect();
                s.push_str(&format!("top types: {}\n", top.join(" ")));
            }
            s.into_bytes()
        }
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: None,
    })
}

fn cluster(ctx: &Context, a: ClusterArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Csv, Format::Json], Format::Csv)?;
    let d = ctx.load(&a.input)?;
    let cols = columns_for(d.catalog(), &a.category)?;
    let data = d.feature_columns(cols);
    let mut cfg = a.kmeans.config(ctx.seed.unwrap_or(0));
    cfg.init = a.init;
    cfg.reduce_first = a.pca_dims.map(|p| p as usize);
    let mut result = fit(&data, &cfg)?;
    if a.no_timing {
        result.elapsed_seconds = 0.0;
    }
    let bytes = match fmt {
        Format::Json => json_bytes(&result.to_json())?,
        _ => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["respondent_id", "cluster"])
                .map_err(Error::from)?;
            for (r, c) in d.records().iter().zip(&result.assignments) {
                w.write_record([r.respondent_id.as_str(), &c.to_string()])
                    .map_err(Error::from)?;
            }
            w.into_inner()
                .map_err(|e| Error::io("<cluster>", e.into_error()))?
        }
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: Some(format!(
            "{}: k={} inertia={:.4} iterations={}",
            result.method, result.k, result.inertia, result.iterations
        )),
    })
}

/// Rows in category order, then method order.
pub fn evaluation_rows(
    d: &Dataset,
    groups: &[(String, std::ops::Range<usize>)],
    methods: &[Method],
    base: &KmeansConfig,
    pca_dims: usize,
) -> Result<Vec<EvaluationReport>, Error> {
    let labels = d.labels();
    let mut rows = Vec::with_capacity(groups.len() * methods.len());
    for (name, cols) in groups {
        let data: Matrix = d.feature_columns(cols.clone());
        for &m in methods {
            // A category narrower than the requested projection keeps all its columns.
            let mut cfg = m.config(base.k, pca_dims.min(data.ncols()), base.seed);
            cfg.restarts = base.restarts;
            cfg.max_iters = base.max_iters;
            cfg.tol = base.tol;
            let result = fit(&data, &cfg)?;
            let mut report = evaluate(&data, &labels, &result)?;
            report.category = Some(name.clone());
            rows.push(report);
        }
    }
    Ok(rows)
}

fn evaluate_cmd(ctx: &Context, a: EvaluateArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Csv, Format::Json], Format::Csv)?;
    let d = ctx.load(&a.input)?;
    let catalog = d.catalog();
    let groups: Vec<(String, std::ops::Range<usize>)> = if a.all_features {
        vec![("all".to_string(), 0..catalog.len())]
    } else if a.categories.is_empty() {
        catalog
            .categories()
            .iter()
            .map(|c| (c.name.clone(), catalog.category_range(&c.name).unwrap()))
            .collect()
    } else {
        a.categories
            .iter()
            .map(|c| columns_for(catalog, &Some(c.clone())).map(|r| (c.clone(), r)))
            .collect::<Result<_, _>>()?
    };
    let methods = if a.methods.is_empty() {
        vec![Method::KmeansPlusPlus, Method::Random, Method::PcaBased]
    } else {
        a.methods.clone()
    };
    let base = a.kmeans.config(ctx.seed.unwrap_or(0));
    let mut rows = evaluation_rows(&d, &groups, &methods, &base, a.pca_dims as usize)?;
    if a.no_timing {
        rows.iter_mut().for_each(|r| r.elapsed = 0.0);
    }
    let bytes = match fmt {
        Format::Json => json_bytes(&report_json(&rows))?,
        _ => {
            let mut b = Vec::new();
            write_report_csv(&mut b, &rows)?;
            b
        }
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: Some(format!("{} rows", rows.len())),
    })
}

fn pairtable(ctx: &Context, a: PairArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Csv, Format::Json], Format::Csv)?;
    let d = ctx.load(&a.input)?;
    let table = pair_rating_table(&d, a.mbti, &a.genre_a, &a.genre_b)?;
    let summary = inclination(&table);
    let bytes = match fmt {
        Format::Json => json_bytes(&serde_json::json!({
            "table": table,
            "inclination": summary,
        }))?,
        _ => {
            let mut b = Vec::new();
            table.write_csv(&mut b)?;
            b
        }
    };
    let fmt_side = |s: &crate::analysis::SideStats| {
        format!(
            "{}: mean={} enjoy={} support={} no-experience={}",
            s.genre,
            s.mean_nonzero.map_or("n/a".into(), |m| format!("{m:.3}")),
            s.enjoyment_share
                .map_or("n/a".into(), |m| format!("{m:.3}")),
            s.support,
            s.no_experience
        )
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: Some(format!(
            "{}; {}",
            fmt_side(&summary.a),
            fmt_side(&summary.b)
        )),
    })
}

fn recommend(ctx: &Context, a: RecommendArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Json, Format::Text], Format::Text)?;
    let d = ctx.load(&a.input)?;
    let profiles = build_profiles(&d);
    let opts = RecommendOptions {
        category: a.category.clone(),
        top_n: a.top as usize,
        min_support: a.min_support,
    };
    let rec = match &a.user_row {
        Some(id) => {
            let user = d
                .record(id)
                .ok_or_else(|| Error::UnknownRespondent(id.clone()))?;
            if let Some(t) = a.mbti {
                if t != user.mbti {
                    return Err(Failure::Data(Error::InvalidConfig(format!(
                        "respondent {id:?} declared {}, not {t}",
                        user.mbti
                    ))));
                }
            }
            recommend_for_user(&profiles, user, a.blend, &opts)?
        }
        None => recommend_for_type(&profiles, a.mbti.expect("clap enforces --type"), &opts)?,
    };
    let bytes = match fmt {
        Format::Json => json_bytes(&rec)?,
        _ => render_text(&rec).into_bytes(),
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: None,
    })
}

fn scatter(ctx: &Context, a: ScatterArgs) -> CmdResult {
    ctx.format(&a.output, &[Format::Csv], Format::Csv)?;
    let d = ctx.load(&a.input)?;
    let cols = columns_for(d.catalog(), &a.category)?;
    let keep: Vec<usize> = d
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| a.types.is_empty() || a.types.contains(&r.mbti))
        .map(|(i, _)| i)
        .collect();
    let data = d.feature_columns(cols).select_rows(&keep);
    let labels: Vec<MbtiType> = keep.iter().map(|&i| d.records()[i].mbti).collect();
    let dims = a.dims as usize;
    let table = match a.with_clusters {
        Some(k) => {
            let mut cfg = KmeansConfig::new(k as usize, ctx.seed.unwrap_or(0));
            cfg.reduce_first = Some(dims);
            cfg.restarts = a.restarts as usize;
            let result = fit(&data, &cfg)?;
            let coords = result.working_space(&data)?;
            scatter_export(
                &coords,
                &labels,
                Some((&result.assignments, &result.centroids)),
            )?
        }
        None => {
            let model = fit_pca(&data, dims)?;
            scatter_export(&model.project(&data)?, &labels, None)?
        }
    };
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes)?;
    Ok(Output {
        bytes,
        path: a.output,
        note: Some(format!("{} rows", table.rows.len())),
    })
}

fn freq(ctx: &Context, a: FreqArgs) -> CmdResult {
    let fmt = ctx.format(&a.output, &[Format::Csv, Format::Json], Format::Csv)?;
    let d = ctx.load(&a.input)?;
    let table = type_frequencies(&d);
    let bars = if a.types.is_empty() {
        table.sorted_desc()
    } else {
        frequency_bars(&table, &a.types)
    };
    let bytes = match fmt {
        Format::Json => json_bytes(&serde_json::json!({
            "bars": bars.iter().map(|(t, n)| serde_json::json!({"mbti": t, "count": n})).collect::<Vec<_>>(),
            "total": table.total(),
            "skew": skew_summary(&table).ok(),
        }))?,
        _ => {
            let mut s = String::from("mbti,count\n");
            for (t, n) in &bars {
                s.push_str(&format!("{t},{n}\n"));
            }
            s.into_bytes()
        }
    };
    Ok(Output {
        bytes,
        path: a.output,
        note: None,
    })
}

fn dispatch(cli: Cli) -> CmdResult {
    let ctx = Context {
        seed: cli.seed,
        catalog_path: cli.catalog,
        format: cli.format,
    };
    match cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::Evaluate(a) => evaluate_cmd(&ctx, a),
        Command::Pairtable(a) => pairtable(&ctx, a),
        Command::Recommend(a) => recommend(&ctx, a),
        Command::Scatter(a) => scatter(&ctx, a),
        Command::Freq(a) => freq(&ctx, a),
    }
}

/// Runs the CLI with explicit streams. Returns the process exit code:
/// 0 on success, 2 on usage errors, 1 on data or validation errors.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    if !text.contains("Usage:") {
                        let _ = writeln!(stderr, "\n{}", Cli::command().render_usage());
                    }
                    2
                }
            };
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            let written = match &out.path {
                Some(p) => std::fs::write(p, &out.bytes).map_err(|e| Error::io(p, e)),
                None => stdout
                    .write_all(&out.bytes)
                    .map_err(|e| Error::io("<stdout>", e)),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            if let (Some(p), Some(note)) = (&out.path, &out.note) {
                let _ = writeln!(stderr, "wrote {}: {note}", p.display());
            }
            0
        }
        Err(Failure::Usage(msg)) => {
            let usage = Cli::command().render_usage();
            let _ = writeln!(stderr, "error: {msg}\n\n{usage}");
            2
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Runs the CLI against the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
