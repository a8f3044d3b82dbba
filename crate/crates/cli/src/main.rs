use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use chordlearn::dot::export_dot;
use chordlearn::liblearn::{PruneOrder, StorageModel};
use chordlearn::{cyk_saturate, reference_diff, run, Corpus, Mode, RunConfig, RunOutput, Schedule};
use chordlearn_harmony::{load_grammar, Grammar};

#[derive(Parser)]
#[command(name = "chordlearn", version, about = "Learn shared harmonic abstractions from chord progressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus and print forest statistics.
    Parse(Common),
    /// Run the full pipeline and write every artifact.
    Learn(Common),
    /// Run the pipeline and print the compression table.
    Report(Common),
    /// Run the pipeline and write DOT graphs (to `--dot`, default `dot/`).
    Export(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Joint,
    Piecewise,
}

#[derive(Clone, Copy, ValueEnum)]
enum StorageArg {
    Flat,
    Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneArg {
    Full,
    Use,
}

#[derive(Args)]
struct Common {
    /// Corpus file: text (`title: chord chord ...`) or JSON.
    #[arg(long)]
    corpus: PathBuf,
    /// Grammar TOML; the built-in grammar when omitted.
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "joint")]
    mode: ModeArg,
    /// Per-class beam width.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    beam: u64,
    /// Disable the per-class beam entirely.
    #[arg(long)]
    no_beam: bool,
    /// Largest library a solution may use.
    #[arg(long, default_value_t = 15)]
    max_lib: usize,
    /// Beam over the corpus-level fold.
    #[arg(long)]
    corpus_beam: Option<usize>,
    /// Keep dominated cost pairs.
    #[arg(long)]
    no_reduce: bool,
    #[arg(long, value_enum, default_value = "flat")]
    storage: StorageArg,
    /// Rank beam candidates by storage plus use cost, or use cost alone.
    #[arg(long, value_enum, default_value = "full")]
    prune_order: PruneArg,
    /// Directory for JSON (and text) outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for DOT graphs.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Print JSON instead of text on stdout.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            mode: match self.mode {
                ModeArg::Joint => Mode::Joint,
                ModeArg::Piecewise => Mode::Piecewise,
            },
            beam: if self.no_beam { None } else { Some(self.beam as usize) },
            max_lib: self.max_lib,
            corpus_beam: self.corpus_beam,
            reduce: !self.no_reduce,
            prune_order: match self.prune_order {
                PruneArg::Full => PruneOrder::FullCost,
                PruneArg::Use => PruneOrder::UseCost,
            },
            storage: match self.storage {
                StorageArg::Flat => StorageModel::Flat,
                StorageArg::Shared => StorageModel::Shared,
            },
            schedule: Schedule::Forward,
        }
    }

    fn inputs(&self) -> Result<(Corpus, Grammar), String> {
        let corpus = Corpus::load(&self.corpus).map_err(|e| format!("{}: {e}", self.corpus.display()))?;
        let grammar = match &self.grammar {
            Some(path) => load_grammar(path).map_err(|e| format!("{}: {e}", path.display()))?,
            None => Grammar::default_grammar(),
        };
        Ok((corpus, grammar))
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Returns whether every piece parsed.
fn parse_cmd(args: &Common) -> Result<bool, String> {
    let (corpus, grammar) = args.inputs()?;
    let forest = cyk_saturate(&corpus, &grammar).map_err(|e| e.to_string())?;
    let mut pieces = Vec::new();
    let mut text = String::new();
    for (p, piece) in corpus.pieces.iter().enumerate() {
        let p = p as u32;
        let count = forest.piece_derivations(p).map_err(|e| e.to_string())?;
        let heads: Vec<String> = forest.full_span_heads(p).iter().map(|h| h.to_string()).collect();
        text.push_str(&format!(
            "{}: {} chords, {} derivations, heads [{}]{}\n",
            piece.title,
            piece.len(),
            count,
            heads.join(", "),
            if forest.is_parsed(p) { "" } else { ", UNPARSED" }
        ));
        pieces.push(json!({
            "title": piece.title,
            "chords": piece.len(),
            "derivations": count.to_string(),
            "full_span_heads": heads,
            "parsed": forest.is_parsed(p),
        }));
    }
    let egraph = &forest.engine.egraph;
    let stats = json!({
        "classes": egraph.number_of_classes(),
        "nodes": egraph.total_number_of_nodes(),
        "spans": forest.spans().count(),
        "root_connected": forest.marked().count(),
        "cyk_iterations": forest.saturation.iterations,
        "pieces": pieces,
    });
    text.push_str(&format!(
        "{} classes, {} nodes, {} spans, {} root-connected\n",
        stats["classes"], stats["nodes"], stats["spans"], stats["root_connected"]
    ));
    print!("{}", if args.json { pretty(&stats) } else { text });
    if let Some(dir) = &args.out {
        write(dir, "parse.json", &pretty(&stats))?;
        write(dir, "forest.json", &pretty(&forest.to_json()))?;
    }
    if let Some(dir) = &args.dot {
        write(dir, "forest.dot", &forest.to_dot())?;
    }
    Ok((0..corpus.pieces.len() as u32).all(|p| forest.is_parsed(p)))
}

fn pipeline(args: &Common) -> Result<RunOutput, String> {
    let (corpus, grammar) = args.inputs()?;
    let output = run(&corpus, &grammar, &args.config()).map_err(|e| e.to_string())?;
    output.verify_round_trip().map_err(|e| format!("round trip failed: {e}"))?;
    Ok(output)
}

fn report_text(output: &RunOutput) -> String {
    let mut text = output.report.render_text();
    if let Some(diff) = reference_diff(&output.report) {
        text.push_str(&diff);
    }
    text
}

fn write_dots(output: &RunOutput, dir: &Path) -> Result<(), String> {
    for (k, learned) in output.runs.iter().enumerate() {
        let prefix = match output.config.mode {
            Mode::Joint => String::new(),
            Mode::Piecewise => format!("run{k}_"),
        };
        export_dot(learned, dir, &prefix).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn learn_cmd(args: &Common, command: &Command) -> Result<bool, String> {
    let output = pipeline(args)?;
    let text = report_text(&output);
    match command {
        Command::Learn(_) => {
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            write(&out, "report.txt", &text)?;
            write(&out, "report.json", &pretty(&output.report.to_json()))?;
            write(&out, "learned.json", &pretty(&output.to_json()))?;
            if let Some(dir) = &args.dot {
                write_dots(&output, dir)?;
            }
            print!("{}", if args.json { pretty(&output.to_json()) } else { text });
        }
        Command::Report(_) => {
            if let Some(dir) = &args.out {
                write(dir, "report.json", &pretty(&output.report.to_json()))?;
            }
            print!("{}", if args.json { pretty(&output.report.to_json()) } else { text });
        }
        Command::Export(_) => {
            let dir = args.dot.clone().unwrap_or_else(|| PathBuf::from("dot"));
            write_dots(&output, &dir)?;
            if let Some(out) = &args.out {
                write(out, "learned.json", &pretty(&output.to_json()))?;
            }
            println!("wrote DOT graphs to {}", dir.display());
        }
        Command::Parse(_) => unreachable!(),
    }
    for title in &output.report.unparsed {
        eprintln!("warning: `{title}` has no complete parse and was skipped");
    }
    Ok(output.report.unparsed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Parse(args) => parse_cmd(args),
        Command::Learn(args) | Command::Report(args) | Command::Export(args) => learn_cmd(args, &cli.command),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
