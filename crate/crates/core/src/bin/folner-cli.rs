use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use folner::algebra::WeightJson;
use folner::folner::{LeftTranslation, Strategy};
use folner::group::{GroupModel, ModelDescriptor};
use folner::matching::{build_graph, max_matching, InstanceDump, MatchingResult};
use folner::perturb::{decompose_wobbling, ActionJson, PerturbedAction};
use folner::rational::{format_rational, parse_rational, Rational};
use folner::scenario::{
    execute, load_scenario, verify_action, write_artifacts, DefectTask, IndexJson, Outputs, ParadoxSearchTask,
    ParadoxVerifyTask, PerturbTask, PrecompactTask, RunInfo, RunOptions, RunOutput, Scenario, ScenarioError,
    SearchTask, SeminormTask, Status, SuiteTask, Task, WindowSpec,
};
use folner::Entourage;

#[derive(Parser)]
#[command(
    name = "folner-cli",
    version,
    about = "Exact Følner, seminorm, perturbation and paradox certificates"
)]
struct Cli {
    /// Scenario config; any subcommand and its flags are then ignored.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write certificate, report and manifest here instead of printing.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel steps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized strategies.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the task's search or state budget.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a model and its word-ball growth.
    Model {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 4)]
        ball: u32,
    },
    /// Maximum matching of a dumped instance, or of B(E, F, U).
    Matching {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "E", allow_hyphen_values = true)]
        e: Option<String>,
        #[arg(long = "F", allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long, default_value = "0", value_parser = rational)]
        radius: Rational,
    },
    /// Matching defect of F under E at a closeness radius.
    FolnerDefect {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "F", allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long = "E", allow_hyphen_values = true, default_value = "generators")]
        e: String,
        #[arg(long, default_value = "0", value_parser = rational)]
        radius: Rational,
        #[arg(long, value_parser = rational)]
        theta: Option<Rational>,
        #[arg(long)]
        bridge: bool,
    },
    /// Search for F reaching a target defect.
    FolnerSearch {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "E", allow_hyphen_values = true, default_value = "generators")]
        e: String,
        #[arg(long, default_value = "0", value_parser = rational)]
        radius: Rational,
        #[arg(long, value_parser = rational)]
        theta: Option<Rational>,
        #[arg(long, default_value = "balls")]
        strategy: Strategy,
    },
    /// `p_d(a - g a)` for every `g` in E.
    Seminorm {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long = "E", allow_hyphen_values = true, default_value = "generators")]
        e: String,
    },
    #[command(subcommand)]
    /// Build, verify or decompose perturbed translations.
    Perturb(PerturbCommand),
    /// Perturbation of a precompact model generating a finite group.
    Precompact(PrecompactArgs),
    #[command(subcommand)]
    /// Verify or search for paradoxical decompositions on a window.
    Paradox(ParadoxCommand),
    /// Built-in criteria, or every scenario in a directory.
    Suite {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PerturbCommand {
    /// Assemble packages for a family of indices `E:n`.
    Build {
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_parser = rational)]
        radius: Option<Rational>,
        /// JSON list of {"E": [...], "n": k}, or `E1;E2:n` items.
        #[arg(long)]
        family: Vec<String>,
    },
    /// Check an action table against the radius.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long)]
        action: PathBuf,
        #[arg(long, value_parser = rational)]
        radius: Option<Rational>,
    },
    /// Perturbation of a precompact model generating a finite group.
    Precompact(PrecompactArgs),
    /// Split `α(g)` into pieces translated by single pool elements.
    Wobble {
        #[arg(long)]
        model: String,
        #[arg(long)]
        action: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        pool: Option<String>,
    },
}

#[derive(Args)]
struct PrecompactArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_parser = rational)]
    radius: Option<Rational>,
    #[arg(long, default_value = "grid:60", allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value = "grid:12", allow_hyphen_values = true)]
    pool: String,
}

#[derive(Subcommand)]
enum ParadoxCommand {
    /// Check a certificate on a window.
    Verify {
        #[arg(long)]
        model: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Certificate JSON; the first-letter decomposition of F_2 if absent.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Evaluate translators through a perturbed table.
        #[arg(long)]
        action: Option<PathBuf>,
    },
    /// Minimal covering defect per piece count.
    Search {
        #[arg(long)]
        model: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        pool: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_pieces: usize,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn fail(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    serde_json::from_str(&read(path)?).map_err(|e| fail(&path.display().to_string(), e.to_string()))
}

/// A descriptor file, inline JSON, or `kind[:n]` shorthand.
fn model_arg(s: &str) -> Result<ModelDescriptor, ScenarioError> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else if Path::new(s).is_file() {
        read(Path::new(s))?
    } else {
        let (kind, n) = match s.split_once(':') {
            Some((k, n)) => (
                k,
                Some(
                    n.parse::<u64>()
                        .map_err(|_| fail("--model", format!("bad size in {s:?}")))?,
                ),
            ),
            None => (s, None),
        };
        let params = match (kind, n) {
            ("lattice" | "torus", Some(n)) => json!({ "dim": n }),
            ("free", Some(n)) => json!({ "rank": n }),
            ("cyclic", Some(n)) => json!({ "modulus": n }),
            (_, None) => json!({}),
            _ => return Err(fail("--model", format!("unknown model {s:?}"))),
        };
        json!({ "kind": kind, "params": params }).to_string()
    };
    serde_json::from_str(&text).map_err(|e| fail("--model", e.to_string()))
}

/// A JSON file holding a list of elements or a window spec, or a spec such
/// as `ball:3` or `0;1/4;1/2`.
fn window_arg(s: &str) -> Result<WindowSpec, ScenarioError> {
    let path = Path::new(s);
    if path.is_file() {
        let value: serde_json::Value = read_json(path)?;
        return if value.is_array() {
            serde_json::from_value(value).map(WindowSpec::Elements)
        } else {
            serde_json::from_value(value)
        }
        .map_err(|e| fail(s, e.to_string()));
    }
    WindowSpec::parse_arg(s).map_err(|e| fail(s, e))
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, ScenarioError> {
    v.ok_or_else(|| fail(flag, "required without --config"))
}

fn scenario(model: Option<&str>, task: Task) -> Result<Scenario, ScenarioError> {
    Ok(Scenario {
        name: None,
        model: model.map(model_arg).transpose()?,
        task,
        seed: None,
        outputs: None,
    })
}

fn family_arg(items: &[String]) -> Result<Vec<IndexJson>, ScenarioError> {
    let mut out = Vec::new();
    for item in items {
        if Path::new(item).is_file() {
            out.extend(read_json::<Vec<IndexJson>>(Path::new(item))?);
            continue;
        }
        let (e, n) = item
            .rsplit_once(':')
            .ok_or_else(|| fail("--family", format!("expected E:n, got {item:?}")))?;
        out.push(IndexJson {
            e: e.split(';').map(str::to_string).collect(),
            n: n.parse().map_err(|_| fail("--family", format!("bad n in {item:?}")))?,
        });
    }
    Ok(out)
}

fn precompact_scenario(a: &PrecompactArgs) -> Result<Scenario, ScenarioError> {
    scenario(
        a.model.as_deref(),
        Task::Precompact(PrecompactTask {
            radius: required(a.radius, "--radius")?,
            window: window_arg(&a.window)?,
            pool: window_arg(&a.pool)?,
        }),
    )
}

enum Plan {
    Scenario(Box<Scenario>),
    Direct {
        config: serde_json::Value,
        task: &'static str,
        output: RunOutput,
    },
}

fn matching_output(result: &MatchingResult, left: usize) -> RunOutput {
    let cert = json!({ "mu": result.mu, "pairing": result.pairing, "witness": result.witness });
    RunOutput {
        status: Status::Success,
        summary: format!("mu={} of {left}", result.mu),
        certificate: Some(format!("{}\n", serde_json::to_string_pretty(&cert).expect("json"))),
        report: format!("left,mu,deficiency\n{left},{},{}\n", result.mu, left - result.mu),
    }
}

fn plan(cli: &Cli) -> Result<Plan, ScenarioError> {
    if let Some(path) = &cli.config {
        return Ok(Plan::Scenario(Box::new(load_scenario(path)?)));
    }
    let Some(command) = &cli.command else {
        return Err(ScenarioError::Config {
            path: String::new(),
            message: "a subcommand or --config is required".into(),
        });
    };
    let s = match command {
        Command::Model { model, ball } => {
            let desc = model_arg(model)?;
            let m = GroupModel::from_descriptor(&desc)?;
            let mut report = String::from("radius,ball_size\n");
            let mut sizes = Vec::new();
            if !m.kind().is_continuous() {
                for n in 0..=*ball {
                    let size = m.word_ball(n)?.len();
                    report.push_str(&format!("{n},{size}\n"));
                    sizes.push(size);
                }
            }
            let cert = json!({
                "id": m.id(),
                "descriptor": m.to_descriptor(),
                "generators": m.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "identity": m.identity().to_string(),
            });
            return Ok(Plan::Direct {
                config: json!({ "command": "model", "model": desc }),
                task: "model",
                output: RunOutput {
                    status: Status::Success,
                    summary: format!("{} ball sizes {sizes:?}", m.id()),
                    certificate: Some(format!("{}\n", serde_json::to_string_pretty(&cert).expect("json"))),
                    report,
                },
            });
        }
        Command::Matching {
            instance,
            model,
            e,
            f,
            radius,
        } => {
            let (config, output) = match (instance, model, e, f) {
                (Some(path), ..) => {
                    let dump: InstanceDump = read_json(path)?;
                    let graph = dump.graph();
                    (
                        json!({ "command": "matching", "instance": dump }),
                        matching_output(&max_matching(&graph), dump.e.len()),
                    )
                }
                (None, Some(model), Some(e), Some(f)) => {
                    let desc = model_arg(model)?;
                    let m = GroupModel::from_descriptor(&desc)?;
                    let e = window_arg(e)?.resolve(&m)?;
                    let f = window_arg(f)?.resolve(&m)?;
                    let inst = build_graph(&m, &e, &f, &Entourage::new(*radius))?;
                    (
                        json!({ "command": "matching", "instance": inst.dump() }),
                        matching_output(&max_matching(&inst.graph), e.len()),
                    )
                }
                _ => return Err(fail("--instance", "give --instance or --model/--E/--F")),
            };
            return Ok(Plan::Direct {
                config,
                task: "matching",
                output,
            });
        }
        Command::FolnerDefect {
            model,
            f,
            e,
            radius,
            theta,
            bridge,
        } => scenario(
            model.as_deref(),
            Task::Defect(DefectTask {
                f: window_arg(required(f.as_deref(), "--F")?)?,
                e: window_arg(e)?,
                radius: *radius,
                theta: *theta,
                bridge: *bridge,
            }),
        )?,
        Command::FolnerSearch {
            model,
            e,
            radius,
            theta,
            strategy,
        } => scenario(
            model.as_deref(),
            Task::Search(SearchTask {
                e: window_arg(e)?,
                radius: *radius,
                theta: required(*theta, "--theta")?,
                strategy: *strategy,
                budget: cli.budget.unwrap_or(100),
            }),
        )?,
        Command::Seminorm { model, weight, e } => scenario(
            model.as_deref(),
            Task::Seminorm(SeminormTask {
                weight: read_json::<WeightJson>(required(weight.as_deref(), "--weight")?)?,
                e: window_arg(e)?,
            }),
        )?,
        Command::Perturb(PerturbCommand::Build { model, radius, family }) => scenario(
            model.as_deref(),
            Task::Perturb(PerturbTask {
                family: family_arg(family)?,
                radius: required(*radius, "--radius")?,
                budget: cli.budget.unwrap_or(200),
            }),
        )?,
        Command::Perturb(PerturbCommand::Verify { model, action, radius }) => {
            let desc = model_arg(model)?;
            let m = GroupModel::from_descriptor(&desc)?;
            let json: ActionJson = read_json(action)?;
            let table = PerturbedAction::from_json(&m, &json)?;
            let u = Entourage::new(radius.unwrap_or(table.radius));
            return Ok(Plan::Direct {
                config: json!({ "command": "perturb-verify", "model": desc, "action": json, "radius": format_rational(&u.radius) }),
                task: "perturb-verify",
                output: verify_action(&m, &table, &u)?,
            });
        }
        Command::Perturb(PerturbCommand::Precompact(a)) | Command::Precompact(a) => precompact_scenario(a)?,
        Command::Perturb(PerturbCommand::Wobble { model, action, g, pool }) => {
            let desc = model_arg(model)?;
            let m = GroupModel::from_descriptor(&desc)?;
            let json: ActionJson = read_json(action)?;
            let table = PerturbedAction::from_json(&m, &json)?;
            let g_elem = m.parse_element(g)?;
            let row = table
                .row(&g_elem)
                .ok_or_else(|| fail("--g", format!("{g} has no row in the table")))?;
            let pool = match pool {
                Some(p) => window_arg(p)?.resolve(&m)?,
                None => m
                    .grid_sample(table.window.len() as u32, None)
                    .unwrap_or_else(|_| table.window.clone()),
            };
            let w = decompose_wobbling(&table.window, row, &pool, &LeftTranslation(&m))?;
            let pieces: Vec<_> = w
                .pieces
                .iter()
                .map(|(t, piece)| json!({ "translator": t.to_string(), "piece": piece.to_strings() }))
                .collect();
            let mut report = String::from("translator,piece_size\n");
            for (t, piece) in &w.pieces {
                report.push_str(&format!("{t},{}\n", piece.len()));
            }
            return Ok(Plan::Direct {
                config: json!({ "command": "perturb-wobble", "model": desc, "action": json, "g": g }),
                task: "perturb-wobble",
                output: RunOutput {
                    status: Status::Success,
                    summary: format!("{} pieces", w.pieces.len()),
                    certificate: Some(format!("{}\n", serde_json::to_string_pretty(&pieces).expect("json"))),
                    report,
                },
            });
        }
        Command::Paradox(ParadoxCommand::Verify {
            model,
            window,
            cert,
            action,
        }) => scenario(
            Some(model.as_deref().unwrap_or("free:2")),
            Task::ParadoxVerify(ParadoxVerifyTask {
                window: window_arg(window.as_deref().unwrap_or("ball:6"))?,
                certificate: cert.as_deref().map(read_json).transpose()?,
                action: action.as_deref().map(read_json).transpose()?,
            }),
        )?,
        Command::Paradox(ParadoxCommand::Search {
            model,
            window,
            pool,
            max_pieces,
        }) => scenario(
            model.as_deref(),
            Task::ParadoxSearch(ParadoxSearchTask {
                window: window_arg(required(window.as_deref(), "--window")?)?,
                pool: window_arg(required(pool.as_deref(), "--pool")?)?,
                max_pieces: *max_pieces,
                budget: cli.budget.unwrap_or(1 << 12),
            }),
        )?,
        Command::Suite { dir } => scenario(
            None,
            Task::Suite(SuiteTask {
                directory: dir.as_ref().map(|d| d.display().to_string()),
            }),
        )?,
    };
    Ok(Plan::Scenario(Box::new(s)))
}

fn run(cli: &Cli) -> Result<Status, ScenarioError> {
    let opts = RunOptions {
        workers: cli.workers,
        seed: cli.seed,
        budget: cli.budget,
        ..RunOptions::default()
    };
    let start = Instant::now();
    let (config, task, names, seed, output) = match plan(cli)? {
        Plan::Scenario(s) => {
            let output = execute(&s, &opts)?;
            (
                serde_json::to_value(&s).expect("scenario serializes"),
                s.task.name(),
                s.outputs.clone().unwrap_or_default(),
                opts.seed.or(s.seed),
                output,
            )
        }
        Plan::Direct { config, task, output } => (config, task, Outputs::default(), opts.seed, output),
    };
    match &cli.out_dir {
        Some(dir) => {
            let info = RunInfo {
                config,
                task,
                seed,
                workers: opts.workers,
                elapsed_ms: start.elapsed().as_millis(),
            };
            write_artifacts(dir, &names, &info, &output)?;
        }
        None => print!("{}", output.report),
    }
    eprintln!("{task}: {}", output.summary);
    Ok(output.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
