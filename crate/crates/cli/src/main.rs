//! `strictcut` command-line front end.
//!
//! Exit codes: 0 success, 1 a guarantee did not hold, 2 usage or input error.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use strictcut::check::AssertLevel;
use strictcut::graph::{is_strictly_balanced, Coloring, Measure};
use strictcut::grid::{is_monotone, GridGraph};
use strictcut::instances::{freeze_manifest, generate, measure_coloring, run_corpus, Manifest, Provenance, Recipe};
use strictcut::io::{read_graph_file, write_graph, GraphFile};
use strictcut::oracle::{oracle_by_name, SplitOracle};
use strictcut::strict::{partition, ShrinkConfig};
use strictcut::Error;

#[derive(Parser)]
#[command(name = "strictcut", version, about = "Strictly balanced k-way graph partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(clap::Args)]
struct Common {
    /// Splitting oracle: exhaustive, greedy, separator:exhaustive, separator:bfs, grid.
    #[arg(long, default_value = "greedy")]
    oracle: String,
    /// Exponent of the cost norm (> 1).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Runtime verification level.
    #[arg(long = "assert", default_value = "cheap")]
    level: AssertLevel,
    /// Output file (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Strictly balanced k-coloring of a graph file.
    Partition {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Recorded for reproducibility; the pipeline itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// A splitting set for a target weight.
    Split {
        input: PathBuf,
        #[arg(long)]
        target: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Re-checks a coloring file against a graph file.
    Validate {
        coloring: PathBuf,
        input: PathBuf,
        /// Expected number of colors.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-runs a corpus manifest and compares against its frozen metrics.
    Bench {
        manifest: PathBuf,
        /// Write a copy of the manifest with refreshed hashes and metrics.
        #[arg(long)]
        freeze: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a generated instance in the graph text format.
    Generate {
        /// Generator recipe as JSON, e.g. '{"generator":"grid","sides":[8,8],"weight_max":1,"cost_max":4}'.
        #[arg(long)]
        recipe: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_guarantee_failure() { 1 } else { 2 }, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

type Outcome = Result<u8, Failure>;

/// Compact JSON with every float written to 17 significant digits.
struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    let mut text = String::from_utf8(buf).expect("JSON is UTF-8");
    text.push('\n');
    text
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

fn read_input(path: &Path) -> Result<GraphFile, Failure> {
    read_graph_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn build_oracle(common: &Common, file: &GraphFile) -> Result<Box<dyn SplitOracle>, Failure> {
    let grid = file.dim.map(|d| (d, file.coords.clone()));
    Ok(oracle_by_name(&common.oracle, common.p, grid)?)
}

fn coloring_value(g: &strictcut::graph::WeightedGraph, coloring: &Coloring) -> Value {
    let metrics = measure_coloring(g, coloring);
    json!({
        "k": coloring.k(),
        "colors": coloring.assignment(),
        "class_weights": metrics.class_weights,
        "max_boundary_cost": metrics.max_boundary,
        "avg_boundary_cost": metrics.avg_boundary,
        "eq1_slack": metrics.eq1_slack,
    })
}

fn cmd_partition(input: &Path, k: usize, epsilon: f64, common: &Common) -> Outcome {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let file = read_input(input)?;
    let oracle = build_oracle(common, &file)?;
    let config = ShrinkConfig::new(epsilon)?.with_level(common.level);
    let report = partition(&file.graph, oracle.as_ref(), k, &config)?;
    let text = match common.format {
        Format::Json => to_json(&coloring_value(&file.graph, &report.coloring)),
        Format::Tsv => {
            let mut s = String::from("vertex\tcolor\n");
            for (v, c) in report.coloring.assignment().iter().enumerate() {
                s.push_str(&format!("{v}\t{c}\n"));
            }
            s
        }
    };
    emit(common.out.as_deref(), &text)?;
    eprintln!(
        "k={k} max_boundary={} avg_boundary={} slack={:.3e} oracle_calls={}",
        report.max_boundary,
        report.avg_boundary,
        report.balance.slack(),
        report.oracle.calls
    );
    Ok(0)
}

fn cmd_split(input: &Path, target: f64, common: &Common) -> Outcome {
    let file = read_input(input)?;
    let g = &file.graph;
    let total = g.total_weight();
    if !(target >= 0.0 && target <= total) {
        return Err(usage(format!("--target must lie in [0, {total}]")));
    }
    let oracle = build_oracle(common, &file)?;
    let set = oracle.split(&g.full_view(), g.weights(), target)?;
    let monotone = match file.dim {
        Some(d) => Some(is_monotone(&GridGraph::new(g.clone(), d, file.coords.clone())?, &set)),
        None => None,
    };
    let weight: f64 = set.iter().map(|&v| g.weight(v)).sum();
    let boundary = g.boundary_cost(&set)?;
    let text = match common.format {
        Format::Json => to_json(&json!({
            "target": target,
            "weight": weight,
            "boundary_cost": boundary,
            "monotone": monotone,
            "set": set,
        })),
        Format::Tsv => set.iter().map(|v| format!("{v}\n")).collect(),
    };
    emit(common.out.as_deref(), &text)?;
    Ok(0)
}

/// A coloring file: JSON as written by `partition`, or `vertex<TAB>color` rows.
struct ColoringFile {
    k: Option<usize>,
    recorded: Option<Value>,
    colors: Vec<usize>,
}

fn read_coloring(path: &Path) -> Result<ColoringFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Ok(value) = serde_json::from_str::<Value>(&text) {
        let colors = value
            .get("colors")
            .and_then(Value::as_array)
            .ok_or_else(|| usage("coloring JSON lacks a 'colors' array"))?
            .iter()
            .map(|c| c.as_u64().map(|c| c as usize).ok_or_else(|| usage("colors must be non-negative integers")))
            .collect::<Result<Vec<_>, _>>()?;
        let k = value.get("k").and_then(Value::as_u64).map(|k| k as usize);
        return Ok(ColoringFile { k, recorded: Some(value), colors });
    }
    let mut colors = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let mut cols = line.split('\t');
        let (v, c) = (cols.next(), cols.next());
        let parsed = v.zip(c).and_then(|(v, c)| Some((v.trim().parse::<usize>().ok()?, c.trim().parse().ok()?)));
        match parsed {
            Some((v, c)) if v == colors.len() => colors.push(c),
            _ => return Err(usage(format!("{}:{}: expected 'vertex<TAB>color' in order", path.display(), i + 1))),
        }
    }
    Ok(ColoringFile { k: None, recorded: None, colors })
}

fn cmd_validate(coloring: &Path, input: &Path, k: Option<usize>, common: &Common) -> Outcome {
    let file = read_input(input)?;
    let g = &file.graph;
    let ColoringFile { k: stored_k, recorded: stored, colors } = read_coloring(coloring)?;
    if colors.len() != g.vertex_count() {
        return Err(usage(format!("coloring has {} vertices, graph has {}", colors.len(), g.vertex_count())));
    }
    let used = colors.iter().max().map_or(1, |&c| c + 1);
    let k = match (k, stored_k) {
        (Some(a), Some(b)) if a != b => return Err(usage(format!("--k {a} does not match the file's k = {b}"))),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => used,
    };
    if used > k {
        return Err(usage(format!("color {} out of range for k = {k}", used - 1)));
    }
    let chi = Coloring::new(g, k, colors)?;
    let balance = is_strictly_balanced(&chi, &Measure::weights_of(g));
    let value = coloring_value(g, &chi);
    let mut problems = Vec::new();
    if !balance.holds_within(strictcut::check::FLOAT_SLACK) {
        problems.push(format!(
            "not strictly balanced: max deviation {} exceeds tolerance {} (slack {})",
            balance.max_abs_deviation,
            balance.tolerance,
            balance.slack()
        ));
    }
    if let Some(stored) = &stored {
        for key in ["class_weights", "max_boundary_cost", "avg_boundary_cost"] {
            if let Some(recorded) = stored.get(key) {
                if !same_numbers(recorded, &value[key]) {
                    problems.push(format!("recorded {key} does not match the recomputed value"));
                }
            }
        }
    }
    let report = json!({
        "valid": problems.is_empty(),
        "eq1_slack": value["eq1_slack"],
        "max_boundary_cost": value["max_boundary_cost"],
        "problems": problems,
    });
    emit(common.out.as_deref(), &to_json(&report))?;
    for p in &problems {
        eprintln!("{p}");
    }
    Ok(if problems.is_empty() { 0 } else { 1 })
}

fn same_numbers(a: &Value, b: &Value) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= strictcut::check::slack_for(x.abs().max(y.abs()));
    match (a, b) {
        (Value::Array(xs), Value::Array(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| same_numbers(x, y)),
        _ => matches!((a.as_f64(), b.as_f64()), (Some(x), Some(y)) if close(x, y)),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.16e}"))
}

fn cmd_bench(manifest: &Path, freeze: Option<&Path>, out: Option<&Path>) -> Outcome {
    let text = std::fs::read_to_string(manifest).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
    let manifest = Manifest::parse(&text)?;
    if let Some(path) = freeze {
        let frozen = freeze_manifest(&manifest)?;
        let body = serde_json::to_string_pretty(&frozen).map_err(|e| usage(e.to_string()))? + "\n";
        std::fs::write(path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut tsv = String::from("entry\tmetric\tfrozen\tcurrent\trelative_change\tstatus\n");
    let mut breach = false;
    for (entry, outcome) in manifest.entries.iter().zip(run_corpus(&manifest)) {
        match outcome {
            Ok(o) => {
                if !o.hash_matches {
                    breach = true;
                    tsv.push_str(&format!("{}\thash\t{}\t-\t-\tFAIL\n", o.name, entry.hash));
                }
                for c in &o.comparisons {
                    breach |= !c.ok;
                    tsv.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{:.6}\t{}\n",
                        c.entry,
                        c.metric,
                        fmt_opt(c.frozen),
                        fmt_opt(c.current),
                        c.relative_change,
                        if c.ok { "ok" } else { "FAIL" }
                    ));
                }
            }
            Err(e) => {
                breach = true;
                eprintln!("{}: {e}", entry.name);
                tsv.push_str(&format!("{}\terror\t-\t-\t-\tFAIL\n", entry.name));
            }
        }
    }
    emit(out, &tsv)?;
    Ok(u8::from(breach && freeze.is_none()))
}

fn cmd_generate(recipe: &str, seed: u64, out: Option<&Path>) -> Outcome {
    let recipe: Recipe = serde_json::from_str(recipe).map_err(|e| usage(format!("bad recipe: {e}")))?;
    let bundle = generate(&Provenance { seed, recipe })?;
    emit(out, &write_graph(&bundle.graph, bundle.dim, &bundle.coords))?;
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Partition { input, k, epsilon, seed: _, common } => cmd_partition(&input, k, epsilon, &common),
        Command::Split { input, target, common } => cmd_split(&input, target, &common),
        Command::Validate { coloring, input, k, common } => cmd_validate(&coloring, &input, k, &common),
        Command::Bench { manifest, freeze, out } => cmd_bench(&manifest, freeze.as_deref(), out.as_deref()),
        Command::Generate { recipe, seed, out } => cmd_generate(&recipe, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
