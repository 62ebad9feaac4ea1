//! Command-line front end for the veering complex toolkit.
//!
//! Exit codes: 0 success, 1 validation failure (or refused computation),
//! 2 unresolved blocks in a report, 64 usage error.

use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use veerbs::dynamic::{build_dynamic_region, cc_multiloop_complex};
use veerbs::grading::{s_tilde_partition, spinc_partition, state_gradings};
use veerbs::homology::{fibered_report, homology_dim, sfh_report, BlockStatus, PipelineError};
use veerbs::states::{enumerate_states, state_multiloop, GPlus, MultiLoop};
use veerbs::sweep::sweep_class;
use veerbs::{datasets, VeeringComplex};

#[derive(Parser)]
#[command(
    name = "veerbs",
    version,
    about = "Heegaard states, sweeps and homology of veering complexes",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input instance: a JSON file or a bundled dataset name.
    #[arg(long, global = true)]
    input: Option<String>,
    /// Closure cap: maximum multi-loops per sweep class.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads (0 = available parallelism). Never affects output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized test helpers only.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check every structural invariant and report per-check results.
    Validate { instance: Option<String> },
    /// List the Heegaard states in canonical order.
    States { instance: Option<String> },
    /// Per state: slot assignment, class in the quotient lattice, refined block.
    Gradings { instance: Option<String> },
    /// Sweep-equivalence class of a state's multi-loop or an explicit one.
    Sweep {
        instance: Option<String>,
        #[arg(long)]
        state: Option<usize>,
        #[arg(long = "loop", value_name = "JSON")]
        loop_json: Option<String>,
    },
    /// Sleekness of a state's multi-loop or an explicit one.
    Sleek {
        instance: Option<String>,
        #[arg(long)]
        state: Option<usize>,
        #[arg(long = "loop", value_name = "JSON")]
        loop_json: Option<String>,
    },
    /// Dynamic region statistics for the class of a loop.
    Core {
        instance: Option<String>,
        #[arg(long)]
        state: Option<usize>,
        #[arg(long = "loop", value_name = "JSON")]
        loop_json: Option<String>,
        /// Include the full move graph.
        #[arg(long)]
        move_graph: bool,
    },
    /// Homology of the chain complex of a sleek class.
    Homology {
        instance: Option<String>,
        #[arg(long)]
        state: Option<usize>,
        #[arg(long = "loop", value_name = "JSON")]
        loop_json: Option<String>,
    },
    /// Full pipeline: blocks, sleekness, homology, lower bound.
    Report { instance: Option<String> },
    /// Per-pairing table against the instance's fiber cocycle.
    FiberedReport { instance: Option<String> },
    /// Finite cyclic cover; weights default to the fiber cocycle mod n.
    Cover {
        instance: Option<String>,
        #[arg(long)]
        n: u64,
        /// JSON object edge-id -> residue; defaults to the fiber cocycle.
        #[arg(long, value_name = "JSON")]
        weights: Option<String>,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_UNRESOLVED: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error path with status 0.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit)
        }
    }
}

struct CliError {
    exit: u8,
    message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        exit: EXIT_USAGE,
        message: msg.into(),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError {
        exit: EXIT_VALIDATION,
        message: msg.into(),
    }
}

fn load_input(cli: &Cli, positional: &Option<String>) -> Result<VeeringComplex, CliError> {
    let arg = match (positional, &cli.input) {
        (Some(p), None) => p.clone(),
        (None, Some(f)) => f.clone(),
        (Some(_), Some(_)) => {
            return Err(usage(
                "give the input either positionally or via --input, not both",
            ))
        }
        (None, None) => {
            return Err(usage(
                "no input given; expected a file path or a bundled dataset name",
            ))
        }
    };
    let candidates = [arg.clone(), format!("{arg}.json")];
    for c in &candidates {
        if Path::new(c).is_file() {
            let text =
                std::fs::read_to_string(c).map_err(|e| usage(format!("cannot read {c}: {e}")))?;
            return veerbs::model::parse_complex(&text).map_err(|e| invalid(format!("{c}: {e}")));
        }
    }
    let name = Path::new(&arg)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(&arg);
    datasets::load(&arg)
        .or_else(|| datasets::load(name))
        .ok_or_else(|| usage(format!("no such file or bundled dataset: {arg}")))
}

fn require_valid(cx: &VeeringComplex) -> Result<(), CliError> {
    let report = cx.validate();
    if report.passed() {
        Ok(())
    } else {
        let ids: Vec<String> = report.failures().map(|c| c.id.clone()).collect();
        Err(invalid(format!(
            "{} fails validation: {}",
            cx.name,
            ids.join(", ")
        )))
    }
}

/// Resolve the --state/--loop pair into a multi-loop.
fn resolve_loop(
    cx: &VeeringComplex,
    state: &Option<usize>,
    loop_json: &Option<String>,
) -> Result<MultiLoop, CliError> {
    match (state, loop_json) {
        (Some(_), Some(_)) => Err(usage("--state and --loop are mutually exclusive")),
        (None, None) => Err(usage("give --state <id> or --loop <json>")),
        (Some(id), None) => {
            let states = enumerate_states(cx);
            let st = states.get(*id).ok_or_else(|| {
                usage(format!("state id {id} out of range (0..{})", states.len()))
            })?;
            state_multiloop(cx, st).map_err(|e| invalid(e.to_string()))
        }
        (None, Some(json)) => {
            let m: MultiLoop =
                serde_json::from_str(json).map_err(|e| usage(format!("bad multi-loop: {e}")))?;
            let m = MultiLoop::new(m.loops().to_vec());
            if !GPlus::new(cx).is_valid(&m) {
                return Err(usage("multi-loop edges do not compose head to tail"));
            }
            Ok(m)
        }
    }
}

fn print_rows(format: Format, header: &[&str], rows: &[Vec<String>], json: serde_json::Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
        Format::Tsv => {
            for row in rows {
                println!("{}", row.join("\t"));
            }
        }
        Format::Text => {
            let mut width = vec![0usize; header.len()];
            for row in rows {
                for (i, cell) in row.iter().enumerate() {
                    width[i] = width[i].max(cell.len());
                }
            }
            for (i, h) in header.iter().enumerate() {
                width[i] = width[i].max(h.len());
            }
            let fmt_row = |cells: &[String]| {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{:<1$}", c, width[i]))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            println!(
                "{}",
                fmt_row(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())
            );
            for row in rows {
                println!("{}", fmt_row(row));
            }
        }
    }
}

fn assignment_json(cx: &VeeringComplex, st: &veerbs::HeegaardState) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (s, slot) in cx.sectors.iter().zip(&st.slots) {
        m.insert(s.id.0.to_string(), slot.to_string().into());
    }
    serde_json::Value::Object(m)
}

fn assignment_text(cx: &VeeringComplex, st: &veerbs::HeegaardState) -> String {
    cx.sectors
        .iter()
        .zip(&st.slots)
        .map(|(s, slot)| format!("{}:{}", s.id, slot))
        .collect::<Vec<_>>()
        .join(",")
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Validate { instance } => {
            let cx = load_input(cli, instance)?;
            let report = cx.validate();
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.id.clone(),
                        if c.pass { "pass".into() } else { "FAIL".into() },
                        if c.offenders.is_empty() {
                            c.message.clone()
                        } else {
                            format!("{}: {}", c.message, c.offenders.join("; "))
                        },
                    ]
                })
                .collect();
            print_rows(
                cli.format,
                &["check", "result", "detail"],
                &rows,
                serde_json::to_value(&report).unwrap(),
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }

        Command::States { instance } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let states = enumerate_states(&cx);
            let mut rows = Vec::new();
            let mut json_rows = Vec::new();
            for (i, st) in states.iter().enumerate() {
                let m = state_multiloop(&cx, st).map_err(|e| invalid(e.to_string()))?;
                rows.push(vec![
                    i.to_string(),
                    assignment_text(&cx, st),
                    serde_json::to_string(&m).unwrap(),
                ]);
                json_rows.push(serde_json::json!({
                    "id": i,
                    "assignment": assignment_json(&cx, st),
                    "multi_loop": m,
                }));
            }
            print_rows(
                cli.format,
                &["id", "assignment", "multi_loop"],
                &rows,
                serde_json::Value::Array(json_rows),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Gradings { instance } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let g =
                state_gradings(&cx, enumerate_states(&cx)).map_err(|e| invalid(e.to_string()))?;
            let _spinc = spinc_partition(&g);
            let st = s_tilde_partition(&g);
            let mut rows = Vec::new();
            let mut json_rows = Vec::new();
            for (i, state) in g.states.iter().enumerate() {
                let block = st.block_of(i);
                rows.push(vec![
                    i.to_string(),
                    assignment_text(&cx, state),
                    format!("{:?}", g.classes[i].0),
                    block.to_string(),
                ]);
                json_rows.push(serde_json::json!({
                    "id": i,
                    "assignment": assignment_json(&cx, state),
                    "spinc_class": g.classes[i].0,
                    "s_tilde_block": block,
                }));
            }
            print_rows(
                cli.format,
                &["id", "assignment", "spinc_class", "s_tilde_block"],
                &rows,
                serde_json::Value::Array(json_rows),
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep {
            instance,
            state,
            loop_json,
        } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let m = resolve_loop(&cx, state, loop_json)?;
            let class = sweep_class(&cx, &m, cli.cap).map_err(|e| invalid(e.to_string()))?;
            let (sleek, witness) = class.sleekness(&cx);
            let json = serde_json::json!({
                "base": class.base,
                "size": class.members.len(),
                "sleek": sleek,
                "witness": witness,
                "members": class.members,
                "moves": class.moves,
            });
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
                _ => {
                    println!("size\t{}", class.members.len());
                    println!("sleek\t{sleek}");
                    for (i, member) in class.members.iter().enumerate() {
                        println!("member\t{i}\t{}", serde_json::to_string(member).unwrap());
                    }
                    for mv in &class.moves {
                        println!(
                            "move\t{}\t{}\t{}\t{}",
                            mv.from,
                            mv.side,
                            mv.to,
                            serde_json::to_string(&mv.site).unwrap()
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sleek {
            instance,
            state,
            loop_json,
        } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let m = resolve_loop(&cx, state, loop_json)?;
            let (sleek, witness) =
                veerbs::sweep::is_sleek(&cx, &m, cli.cap).map_err(|e| invalid(e.to_string()))?;
            let json = serde_json::json!({
                "multi_loop": m,
                "sleek": sleek,
                "witness": witness,
            });
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
                _ => {
                    println!("sleek\t{sleek}");
                    if let Some(w) = witness {
                        println!("witness\t{}", serde_json::to_string(&w).unwrap());
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Core {
            instance,
            state,
            loop_json,
            move_graph,
        } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let m = resolve_loop(&cx, state, loop_json)?;
            // The region is based at a plain-graph member of the class.
            let class = sweep_class(&cx, &m, cli.cap).map_err(|e| invalid(e.to_string()))?;
            let base = class
                .members
                .iter()
                .find(|c| c.is_g_only())
                .ok_or_else(|| invalid("class has no plain-graph member"))?;
            let region =
                build_dynamic_region(&cx, base, cli.cap).map_err(|e| invalid(e.to_string()))?;
            let mut json = serde_json::json!({
                "class_size": region.class.members.len(),
                "region_sectors": region.cells.len(),
                "base": region.class.members[region.base],
            });
            if *move_graph {
                json["moves"] = serde_json::to_value(&region.class.moves).unwrap();
                json["members"] = serde_json::to_value(&region.class.members).unwrap();
            }
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
                _ => {
                    println!("class_size\t{}", region.class.members.len());
                    println!("region_sectors\t{}", region.cells.len());
                    if *move_graph {
                        for mv in &region.class.moves {
                            println!(
                                "move\t{}\t{}\t{}\t{}",
                                mv.from,
                                mv.side,
                                mv.to,
                                serde_json::to_string(&mv.site).unwrap()
                            );
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Homology {
            instance,
            state,
            loop_json,
        } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let m = resolve_loop(&cx, state, loop_json)?;
            let class = sweep_class(&cx, &m, cli.cap).map_err(|e| invalid(e.to_string()))?;
            let cc = cc_multiloop_complex(&cx, &class).map_err(|e| invalid(e.to_string()))?;
            let dim = homology_dim(&cc).map_err(|e| invalid(e.to_string()))?;
            let json = serde_json::json!({
                "generators": cc.generators.len(),
                "homology_dim": dim,
            });
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
                _ => {
                    println!("generators\t{}", cc.generators.len());
                    println!("homology_dim\t{dim}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Report { instance } => {
            let cx = load_input(cli, instance)?;
            let report = sfh_report(&cx, cli.cap).map_err(pipeline_error)?;
            let rows: Vec<Vec<String>> = report
                .blocks
                .iter()
                .map(|b| {
                    let (status, dim) = match &b.status {
                        BlockStatus::Sleek { homology_dim, .. } => {
                            ("sleek".to_string(), homology_dim.to_string())
                        }
                        BlockStatus::NotSleek { .. } => ("not-sleek".to_string(), "-".into()),
                        BlockStatus::Unresolved { .. } => ("unresolved".to_string(), "-".into()),
                    };
                    let mut tags = Vec::new();
                    if b.contains_top {
                        tags.push("top");
                    }
                    if b.contains_bot {
                        tags.push("bot");
                    }
                    vec![
                        b.id.to_string(),
                        b.states.len().to_string(),
                        format!("{:?}", b.spinc_class),
                        status,
                        dim,
                        tags.join(","),
                    ]
                })
                .collect();
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => {
                    print_rows(
                        cli.format,
                        &["block", "states", "spinc_class", "status", "dim", "tags"],
                        &rows,
                        serde_json::Value::Null,
                    );
                    println!(
                        "lower_bound {} (sleek dims {} + top bonus {})",
                        report.lower_bound,
                        report.sleek_dim_total,
                        usize::from(report.top_bonus)
                    );
                }
            }
            Ok(if report.unresolved_blocks > 0 {
                ExitCode::from(EXIT_UNRESOLVED)
            } else {
                ExitCode::SUCCESS
            })
        }

        Command::FiberedReport { instance } => {
            let cx = load_input(cli, instance)?;
            let omega = cx
                .fiber_cocycle
                .clone()
                .ok_or_else(|| invalid(format!("{} carries no fiber cocycle", cx.name)))?;
            let report = fibered_report(&cx, &omega, cli.cap).map_err(pipeline_error)?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.states.to_string(),
                        r.blocks.to_string(),
                        r.sleek_blocks.to_string(),
                        r.sleek_dim_total.to_string(),
                        r.unresolved_blocks.to_string(),
                    ]
                })
                .collect();
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => {
                    print_rows(
                        cli.format,
                        &["n", "states", "blocks", "sleek", "sleek_dim", "unresolved"],
                        &rows,
                        serde_json::Value::Null,
                    );
                    println!("bot_pairing {}", report.bot_pairing);
                    println!("top_pairing {}", report.top_pairing);
                }
            }
            let unresolved: usize = report.rows.iter().map(|r| r.unresolved_blocks).sum();
            Ok(if unresolved > 0 {
                ExitCode::from(EXIT_UNRESOLVED)
            } else {
                ExitCode::SUCCESS
            })
        }

        Command::Cover {
            instance,
            n,
            weights,
        } => {
            let cx = load_input(cli, instance)?;
            require_valid(&cx)?;
            let w: Vec<u64> = match weights {
                Some(json) => {
                    let map: BTreeMap<String, u64> = serde_json::from_str(json)
                        .map_err(|e| usage(format!("bad --weights: {e}")))?;
                    let mut v = vec![0u64; cx.edges.len()];
                    for (k, val) in map {
                        let id: u32 = k
                            .parse()
                            .map_err(|_| usage(format!("bad edge id {k:?} in --weights")))?;
                        v[cx.edge_position(veerbs::EdgeId(id))] = val;
                    }
                    v
                }
                None => cx.fiber_cocycle.clone().ok_or_else(|| {
                    usage("no --weights given and the instance has no fiber cocycle")
                })?,
            };
            let cover = cx
                .cyclic_cover(*n, &w)
                .map_err(|e| invalid(e.to_string()))?;
            print!("{}", cover.serialize());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Validation(report) => {
            let ids: Vec<String> = report.failures().map(|c| c.id.clone()).collect();
            invalid(format!("validation failed: {}", ids.join(", ")))
        }
        other => invalid(other.to_string()),
    }
}
