//! Command-line surface: ingest -> thresholds -> indicators -> report.
//! All configuration is explicit; no environment variables are read.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topcite::engine;
use topcite::ingest::{self, Corpus, ExportFormat, IngestReport};
use topcite::model::{CountingScheme, DocType, ThresholdSpec, TiePolicy};
use topcite::render::{self, OutputFormat};
use topcite::synth::{self, GenParams};

#[derive(Parser)]
#[command(
    name = "topcite",
    about = "Normalized top-k% citation indicators over bibliographic corpora",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an export file into canonical lines, with diagnostics
    Ingest(IngestArgs),
    /// Compute per-cell top-k% citation thresholds
    Thresholds(RunArgs),
    /// Compute group indicators against the world reference set
    Indicators(IndicatorArgs),
    /// Synthetic corpora and fixtures
    Synth {
        #[command(subcommand)]
        cmd: SynthCmd,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// Input file path
    #[arg(long)]
    input: PathBuf,
    /// Input format: wostab | canonical
    #[arg(long, default_value = "wostab")]
    format: ExportFormat,
    /// Canonical output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the ingest report here instead of stderr
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Input file path
    #[arg(long)]
    input: PathBuf,
    /// Input format: wostab | canonical
    #[arg(long, default_value = "canonical")]
    format: ExportFormat,
    /// Target top fraction, in (0, 1)
    #[arg(long, default_value_t = 0.01)]
    k: f64,
    /// Tie policy: include | strict | exclude
    #[arg(long, default_value = "include")]
    tie_policy: TiePolicy,
    /// Counting scheme: integer | fractional
    #[arg(long, default_value = "integer")]
    counting: CountingScheme,
    /// Comma-separated doctype filter
    #[arg(long, default_value = "article,review,letter")]
    doctypes: String,
    /// Inclusive year range A..B (defaults to the corpus span)
    #[arg(long, value_parser = parse_year_range)]
    years: Option<RangeInclusive<i32>>,
    /// Output format: csv | md | lines
    #[arg(long, default_value = "csv")]
    output: OutputFormat,
    /// Decimals for rendered percents
    #[arg(long, default_value_t = 2)]
    decimals: u32,
    /// Write the ingest report here instead of stderr
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct IndicatorArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated group labels (country names)
    #[arg(long, value_delimiter = ',')]
    groups: Vec<String>,
    /// Report every country present in the corpus
    #[arg(long, conflicts_with = "groups")]
    all_countries: bool,
    /// Also emit the per-cell threshold table
    #[arg(long)]
    per_cell: bool,
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Generate a seeded random corpus in canonical lines
    Gen(GenArgs),
    /// Write the deterministic worked-example fixture corpus
    Fixture {
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    cmax: u64,
    /// Inclusive year range A..B
    #[arg(long, value_parser = parse_year_range, default_value = "2010..2014")]
    years: RangeInclusive<i32>,
    /// Probability of assigning two categories to a record
    #[arg(long, default_value_t = 0.4)]
    p_multi: f64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_year_range(s: &str) -> Result<RangeInclusive<i32>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: i32 = a.trim().parse().map_err(|_| format!("bad year `{a}`"))?;
    let b: i32 = b.trim().parse().map_err(|_| format!("bad year `{b}`"))?;
    if a > b {
        return Err(format!("empty year range {a}..{b}"));
    }
    Ok(a..=b)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Thresholds(args) => cmd_thresholds(args),
        Command::Indicators(args) => cmd_indicators(args),
        Command::Synth { cmd } => cmd_synth(cmd),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_corpus(path: &PathBuf, format: ExportFormat) -> Result<(Corpus, IngestReport), String> {
    let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    ingest::parse_export(BufReader::new(file), format).map_err(|e| e.to_string())
}

fn emit_report(report: &IngestReport, path: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| e.to_string()),
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, String> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_ingest(args: IngestArgs) -> Result<ExitCode, String> {
    let (corpus, report) = load_corpus(&args.input, args.format)?;
    let mut out = open_out(args.out.as_ref())?;
    ingest::write_canonical(&corpus, &mut out).map_err(|e| e.to_string())?;
    out.flush().map_err(|e| e.to_string())?;
    emit_report(&report, args.report.as_ref())?;
    Ok(if report.rejected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

struct Prepared {
    corpus: Corpus,
    spec: ThresholdSpec,
    view: engine::StratifiedView,
    table: engine::ThresholdTable,
    marks: engine::MarkSet,
}

fn prepare(args: &RunArgs) -> Result<Prepared, String> {
    let spec = ThresholdSpec::new(args.k, args.tie_policy).map_err(|e| e.to_string())?;
    let mut filter: BTreeSet<DocType> = BTreeSet::new();
    for part in args.doctypes.split(',') {
        let part = part.trim();
        if !part.is_empty() {
            filter.insert(part.parse::<DocType>()?);
        }
    }
    if filter.is_empty() {
        return Err("doctype filter must be non-empty".into());
    }
    let (corpus, report) = load_corpus(&args.input, args.format)?;
    if report.rejected > 0 {
        emit_report(&report, args.report.as_ref())?;
    }
    let years = match &args.years {
        Some(r) => r.clone(),
        None => {
            let min = corpus.iter().map(|r| r.year).min().unwrap_or(0);
            let max = corpus.iter().map(|r| r.year).max().unwrap_or(0);
            min..=max
        }
    };
    let view = engine::stratify(&corpus, args.counting, &filter, years).map_err(|e| e.to_string())?;
    let table = engine::compute_thresholds(&corpus, &view, &spec);
    let marks = engine::mark_top(&corpus, &view, &table, &spec).map_err(|e| e.to_string())?;
    Ok(Prepared {
        corpus,
        spec,
        view,
        table,
        marks,
    })
}

fn cmd_thresholds(args: RunArgs) -> Result<ExitCode, String> {
    let prepared = prepare(&args)?;
    print!("{}", render::render_thresholds(&prepared.table, args.output));
    Ok(ExitCode::SUCCESS)
}

fn cmd_indicators(args: IndicatorArgs) -> Result<ExitCode, String> {
    let prepared = prepare(&args.run)?;
    let groups: Vec<String> = if args.all_countries {
        prepared.corpus.all_countries()
    } else {
        args.groups.iter().map(|g| g.trim().to_uppercase()).collect()
    };
    let rows = engine::aggregate_report(
        &prepared.corpus,
        &prepared.view,
        &prepared.marks,
        &groups,
        &prepared.spec,
    );
    print!(
        "{}",
        render::render_indicators(&rows, args.run.output, args.run.decimals)
    );
    if args.per_cell {
        print!("{}", render::render_thresholds(&prepared.table, args.run.output));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(cmd: SynthCmd) -> Result<ExitCode, String> {
    match cmd {
        SynthCmd::Gen(args) => {
            let params = GenParams {
                seed: args.seed,
                n: args.n,
                alpha: args.alpha,
                cmax: args.cmax,
                years: args.years,
                p_multi: args.p_multi,
                ..GenParams::default()
            };
            let corpus = synth::gen_corpus(&params).map_err(|e| e.to_string())?;
            let mut out = open_out(args.out.as_ref())?;
            ingest::write_canonical(&corpus, &mut out).map_err(|e| e.to_string())?;
            out.flush().map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        SynthCmd::Fixture { out } => {
            // construction asserts the fixture's count constraints
            let corpus = synth::gen_paper_fixture();
            let mut w = open_out(out.as_ref())?;
            ingest::write_canonical(&corpus, &mut w).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
