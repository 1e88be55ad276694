use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfdc::dataset::{load_csv, pairwise_distances, CsvOptions, Dataset, LabelColumn};
use gfdc::density::{default_k, sparse_degree_table};
use gfdc::export::{format_labels, parse_labels, stage_dump, ResultDocument, TimingsMs};
use gfdc::metrics::score_all;
use gfdc::plot::scatter_svg;
use gfdc::{Gfdc, GfdcError};

#[derive(Parser)]
#[command(name = "gfdc", version, about = "Granule fusion density-based clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a CSV file and write the result document.
    Run(RunArgs),
    /// Score a predicted labeling against a reference one.
    Eval {
        /// Label file (one integer per line) or a result JSON.
        pred: PathBuf,
        truth: PathBuf,
    },
    /// Write r*, kNN distance and sparse degree for every sample as CSV.
    SparseDegree {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Treat the first row as a header. Detected automatically when any of
    /// its fields is not a number.
    #[arg(long)]
    has_header: bool,
    /// Ground-truth column, by 0-based index or header name. A header
    /// column named `label` is used when this is absent.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    clusters: usize,
    /// Samples whose Ω mass exceeds this are reported as outliers (-1).
    #[arg(long)]
    tau: Option<f64>,
    /// Scale every attribute to zero mean and unit variance first.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    k: Option<usize>,
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// SVG scatter plot of the labels (2-D data only).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Embed the member sets of every stage in the result.
    #[arg(long)]
    dump_stages: bool,
    /// Also write the labels as a plain label file.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Reference label file to score against, instead of a label column.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Put per-stage timings into the result JSON. Off by default so that
    /// repeated runs produce identical bytes.
    #[arg(long)]
    timings: bool,
    /// No timing summary on stderr.
    #[arg(long)]
    quiet: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<GfdcError> for Failure {
    fn from(e: GfdcError) -> Self {
        let code = match e {
            GfdcError::InvalidConfig(_) | GfdcError::KOutOfRange { .. } => 2,
            GfdcError::Unsatisfiable { .. } => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Eval { pred, truth } => eval(&pred, &truth),
        Command::SparseDegree { input, k, output } => sparse_degree(&input, k, output.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gfdc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// First non-blank line has a field that does not parse as a number.
fn looks_like_header(path: &Path) -> Result<bool, Failure> {
    let file = fs::File::open(path).map_err(|source| GfdcError::Io { path: path.to_path_buf(), source })?;
    let mut line = String::new();
    for next in BufReader::new(file).lines() {
        line = next.map_err(|source| GfdcError::Io { path: path.to_path_buf(), source })?;
        if !line.trim().is_empty() {
            break;
        }
    }
    Ok(line.split(',').any(|f| !f.trim().is_empty() && f.trim().parse::<f64>().is_err()))
}

fn load(args: &InputArgs) -> Result<Dataset, Failure> {
    let has_header = args.has_header || looks_like_header(&args.input)?;
    let mut label_column = args.label_column.as_deref().map(LabelColumn::parse);
    if label_column.is_none() && has_header {
        let first =
            fs::read_to_string(&args.input).map_err(|source| GfdcError::Io { path: args.input.clone(), source })?;
        let header = first.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if header.split(',').any(|h| h.trim() == "label") {
            label_column = Some(LabelColumn::Name("label".into()));
        }
    }
    Ok(load_csv(&args.input, &CsvOptions { has_header, label_column })?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn read_labels(path: &Path) -> Result<Vec<i64>, Failure> {
    let text = fs::read_to_string(path).map_err(|source| GfdcError::Io { path: path.to_path_buf(), source })?;
    parse_labels(&text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut config = Gfdc::new(args.clusters).standardize(args.standardize);
    if let Some(t) = args.tau {
        config = config.tau(t);
    }
    if let Some(k) = args.k {
        config = config.k(k);
    }
    config.validate()?;
    let data = load(&args.input)?;
    if args.plot.is_some() && data.w() != 2 {
        return Err(Failure {
            code: 2,
            message: format!("--plot needs 2-D data, the input has {} attributes", data.w()),
        });
    }

    let fit = config.fit(&data)?;
    let pred = fit.result.label_codes();
    let mut doc = ResultDocument::new(&fit, data.w(), args.standardize);
    let truth = match &args.truth {
        Some(p) => Some(read_labels(p)?),
        None => data.label_codes(),
    };
    if let Some(truth) = truth {
        doc.scores = Some(score_all(&pred, &truth)?);
    }
    if args.dump_stages {
        doc.dump = Some(stage_dump(&fit));
    }
    if args.timings {
        doc.timings_ms = Some(TimingsMs::from(fit.timings));
    }

    write_out(args.output.as_deref(), &doc.to_json())?;
    if let Some(p) = &args.labels_out {
        fs::write(p, format_labels(&pred)).map_err(|e| io_failure(p, e))?;
    }
    if let Some(p) = &args.plot {
        fs::write(p, scatter_svg(&data, &pred)?).map_err(|e| io_failure(p, e))?;
    }
    if !args.quiet {
        let t = TimingsMs::from(fit.timings);
        eprintln!(
            "n={} k={} path={:?} outliers={} | ms: distances {:.2}, density {:.2}, fusion {:.2}, evidence {:.2}, total {:.2}",
            data.n(),
            fit.k,
            fit.fusion.trace.path,
            doc.outliers.len(),
            t.distances,
            t.density,
            t.fusion,
            t.evidence,
            t.total
        );
    }
    Ok(())
}

fn eval(pred: &Path, truth: &Path) -> Result<(), Failure> {
    let scores = score_all(&read_labels(pred)?, &read_labels(truth)?)?;
    let mut text = serde_json::to_string_pretty(&scores).expect("scores serialize");
    text.push('\n');
    write_out(None, &text)
}

fn sparse_degree(input: &InputArgs, k: Option<usize>, output: Option<&Path>) -> Result<(), Failure> {
    if k == Some(0) {
        return Err(GfdcError::InvalidConfig("k must be at least 1".into()).into());
    }
    let data = load(input)?;
    let k = k.unwrap_or_else(|| default_k(data.n()).min(data.n() - 1));
    let table = sparse_degree_table(&pairwise_distances(&data), k)?;
    let mut out = String::from("index,r_star,knn_dist,sd\n");
    for i in 0..table.len() {
        out.push_str(&format!("{i},{},{},{}\n", table.r_star[i], table.knn_dist[i], table.sd[i]));
    }
    write_out(output, &out)
}
