//! Scenario configs: strict JSON describing one computation, executed under
//! budgets into a certificate JSON, a report CSV and a run manifest.

mod suite;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{invariance_defect, AlgebraError, FiniteWeight, WeightJson};
use crate::folner::{folner_search, lattice_box, topological_defect_with, FolnerError, SearchOptions, Strategy};
use crate::group::{Entourage, FiniteWindow, GroupError, GroupModel, ModelDescriptor};
use crate::matching::{max_matching, Matcher};
use crate::paradox::{
    f2_standard_certificate, search_small_paradox, verify_on_window, CertificateJson as ParadoxJson, Evaluation,
    ParadoxCertificate, ParadoxError,
};
use crate::perturb::{
    build_perturbation, precompact_perturbation, verify_perturbation, ActionJson, IndexSpec, PerturbError,
    PerturbationReport, PerturbedAction,
};
use crate::rational::{self, format_rational, Rational};

pub use suite::{run_suite, SuiteReport, SuiteRow, SuiteSource};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Paradox(#[from] ParadoxError),
    #[error("worker pool: {0}")]
    Workers(String),
}

impl ScenarioError {
    fn config(path: &str, message: impl Into<String>) -> Self {
        ScenarioError::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Outputs>,
}

/// File names inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_certificate")]
    pub certificate: String,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

fn default_certificate() -> String {
    "certificate.json".into()
}

fn default_report() -> String {
    "report.csv".into()
}

fn default_manifest() -> String {
    "manifest.json".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            certificate: default_certificate(),
            report: default_report(),
            manifest: default_manifest(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Defect(DefectTask),
    Search(SearchTask),
    Seminorm(SeminormTask),
    Perturb(PerturbTask),
    Precompact(PrecompactTask),
    ParadoxVerify(ParadoxVerifyTask),
    ParadoxSearch(ParadoxSearchTask),
    Suite(SuiteTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Defect(_) => "defect",
            Task::Search(_) => "search",
            Task::Seminorm(_) => "seminorm",
            Task::Perturb(_) => "perturb",
            Task::Precompact(_) => "precompact",
            Task::ParadoxVerify(_) => "paradox-verify",
            Task::ParadoxSearch(_) => "paradox-search",
            Task::Suite(_) => "suite",
        }
    }
}

/// A finite subset of the model, listed or generated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    Elements(Vec<String>),
    /// Word ball of the given radius.
    Ball(u32),
    /// `[0, n)^d` in a lattice.
    Box(i64),
    /// Points `k/n` on circle or torus.
    Grid(u32),
    /// The model's generating set.
    Generators,
}

impl WindowSpec {
    pub fn resolve(&self, model: &GroupModel) -> Result<FiniteWindow, ScenarioError> {
        Ok(match self {
            WindowSpec::Elements(items) => model.parse_window(items)?,
            WindowSpec::Ball(n) => model.word_ball(*n)?,
            WindowSpec::Box(n) => lattice_box(model, *n)?,
            WindowSpec::Grid(n) => model.grid_sample(*n, None)?,
            WindowSpec::Generators => FiniteWindow::new(model.generators().iter().cloned()),
        })
    }

    /// `ball:3`, `box:10`, `grid:12`, `generators`, or comma-free elements
    /// separated by `;`.
    pub fn parse_arg(s: &str) -> Result<Self, String> {
        let num = |v: &str| v.parse().map_err(|_| format!("bad size in window {s:?}"));
        if let Some(v) = s.strip_prefix("ball:") {
            Ok(WindowSpec::Ball(num(v)?))
        } else if let Some(v) = s.strip_prefix("box:") {
            Ok(WindowSpec::Box(
                v.parse().map_err(|_| format!("bad size in window {s:?}"))?,
            ))
        } else if let Some(v) = s.strip_prefix("grid:") {
            Ok(WindowSpec::Grid(num(v)?))
        } else if s == "generators" {
            Ok(WindowSpec::Generators)
        } else {
            Ok(WindowSpec::Elements(s.split(';').map(str::to_string).collect()))
        }
    }
}

fn generators() -> WindowSpec {
    WindowSpec::Generators
}

fn zero() -> Rational {
    Rational::zero()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectTask {
    #[serde(rename = "F")]
    pub f: WindowSpec,
    #[serde(rename = "E", default = "generators")]
    pub e: WindowSpec,
    #[serde(with = "rational::serde_str", default = "zero")]
    pub radius: Rational,
    #[serde(default, with = "rational::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub theta: Option<Rational>,
    /// Also compute the seminorm values `p_d(δ_F - g δ_F)`.
    #[serde(default)]
    pub bridge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchTask {
    #[serde(rename = "E", default = "generators")]
    pub e: WindowSpec,
    #[serde(with = "rational::serde_str", default = "zero")]
    pub radius: Rational,
    #[serde(with = "rational::serde_str")]
    pub theta: Rational,
    pub strategy: Strategy,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormTask {
    pub weight: WeightJson,
    #[serde(rename = "E", default = "generators")]
    pub e: WindowSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexJson {
    #[serde(rename = "E")]
    pub e: Vec<String>,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbTask {
    pub family: Vec<IndexJson>,
    #[serde(with = "rational::serde_str")]
    pub radius: Rational,
    #[serde(default = "default_perturb_budget")]
    pub budget: usize,
}

fn default_perturb_budget() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecompactTask {
    #[serde(with = "rational::serde_str")]
    pub radius: Rational,
    pub window: WindowSpec,
    pub pool: WindowSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadoxVerifyTask {
    pub window: WindowSpec,
    /// Defaults to the first-letter decomposition of `F_2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ParadoxJson>,
    /// Evaluate translators through this table instead of the group law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadoxSearchTask {
    pub window: WindowSpec,
    pub pool: WindowSpec,
    pub max_pieces: usize,
    #[serde(default = "default_paradox_budget")]
    pub budget: usize,
}

fn default_paradox_budget() -> usize {
    1 << 12
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteTask {
    /// Run every `*.json` scenario here instead of the built-in criteria.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
}

/// Parses a config, reporting the JSON path of the first bad field.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::config(&path, e.inner().to_string())
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    parse_scenario(&text)
}

/// The config re-serialized compactly with sorted keys and canonical
/// rationals.
pub fn canonical_config(s: &Scenario) -> String {
    serde_json::to_value(s).expect("scenario serializes").to_string()
}

pub fn config_hash(s: &Scenario) -> String {
    sha256_hex(canonical_config(s).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("write to string");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    TargetNotMet,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::TargetNotMet => 2,
        }
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub matcher: Matcher,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: None,
            seed: None,
            budget: None,
            matcher: max_matching,
        }
    }
}

/// Everything a run produces except the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub status: Status,
    pub certificate: Option<String>,
    pub report: String,
    pub summary: String,
}

pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ScenarioError::Workers(e.to_string()))?
            .install(|| execute_inner(scenario, opts)),
        None => execute_inner(scenario, opts),
    }
}

fn require_model(s: &Scenario) -> Result<GroupModel, ScenarioError> {
    let desc = s
        .model
        .as_ref()
        .ok_or_else(|| ScenarioError::config("model", format!("task {} needs a model", s.task.name())))?;
    GroupModel::from_descriptor(desc).map_err(|e| ScenarioError::config("model", e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn execute_inner(s: &Scenario, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    let budget = |b: usize| opts.budget.unwrap_or(b);
    match &s.task {
        Task::Defect(t) => {
            let model = require_model(s)?;
            let f = t.f.resolve(&model)?;
            let e = t.e.resolve(&model)?;
            let mut cert = topological_defect_with(&model, &f, &e, &Entourage::new(t.radius), opts.matcher)?;
            if t.bridge {
                cert = cert.with_bridge(&model)?;
            }
            let passed = t.theta.is_none_or(|target| cert.theta >= target);
            let half = Rational::new(1, 2);
            let mut report = String::from("candidate_id,|F|,theta,seminorm_bound,passed\n");
            writeln!(
                report,
                "0,{},{},{},{}",
                f.len(),
                format_rational(&cert.theta),
                format_rational(&(Rational::one() - cert.theta * half)),
                passed
            )
            .expect("write to string");
            Ok(RunOutput {
                status: if passed { Status::Success } else { Status::TargetNotMet },
                summary: format!("|F|={} theta={}", f.len(), format_rational(&cert.theta)),
                certificate: Some(to_json(&cert.to_json())),
                report,
            })
        }
        Task::Search(t) => {
            let model = require_model(s)?;
            let e = t.e.resolve(&model)?;
            let out = folner_search(
                &model,
                &e,
                &Entourage::new(t.radius),
                &SearchOptions {
                    theta: t.theta,
                    strategy: t.strategy,
                    budget: budget(t.budget),
                    seed: opts.seed.or(s.seed),
                },
            )?;
            let best = out
                .best_theta()
                .map(|b| format_rational(&b))
                .unwrap_or_else(|| "-".into());
            Ok(RunOutput {
                status: if out.found {
                    Status::Success
                } else {
                    Status::TargetNotMet
                },
                summary: format!("found={} evaluated={} best_theta={best}", out.found, out.evaluated),
                certificate: out.best.as_ref().map(|c| to_json(&c.to_json())),
                report: out.to_csv(),
            })
        }
        Task::Seminorm(t) => {
            let model = require_model(s)?;
            let a = FiniteWeight::from_json(&model, &t.weight)?;
            let e = t.e.resolve(&model)?;
            let rep = invariance_defect(&model, &a, &e)?;
            let cert = SeminormJson {
                weight: a.to_json(),
                defect: rep.defect(),
                unit_defect: rep.unit_defect(),
                rows: rep
                    .rows
                    .iter()
                    .map(|r| SeminormRowJson {
                        g: r.g.to_string(),
                        p_d: r.p_d,
                        p_unit: r.p_unit,
                        certified: r.certified,
                    })
                    .collect(),
            };
            Ok(RunOutput {
                status: Status::Success,
                summary: format!("p_d defect={}", format_rational(&rep.defect())),
                certificate: Some(to_json(&cert)),
                report: rep.to_csv(),
            })
        }
        Task::Perturb(t) => {
            let model = require_model(s)?;
            let family = t
                .family
                .iter()
                .map(|i| {
                    Ok(IndexSpec {
                        e: model.parse_window(&i.e)?,
                        n: i.n,
                    })
                })
                .collect::<Result<Vec<_>, GroupError>>()?;
            let u = Entourage::new(t.radius);
            let asm = match build_perturbation(&model, &family, &u, budget(t.budget)) {
                Err(PerturbError::BudgetExhausted { best, target }) => {
                    return Ok(RunOutput {
                        status: Status::TargetNotMet,
                        summary: format!("budget exhausted: best {best}, target {target}"),
                        certificate: None,
                        report: format!("check,subject,value,bound,ok\npackage,search,{best},{target},false\n"),
                    })
                }
                other => other?,
            };
            let rep = verify_perturbation(&model, &asm.action, &u)?;
            let mut csv = perturbation_csv(&model, &asm.action, &rep)?;
            let mut ok = rep.is_clean();
            for p in &asm.packages {
                let need = Rational::one() - Rational::new(1, p.spec.n as i64);
                let have = Rational::new(p.d.len() as i64, p.f.len() as i64);
                ok &= have >= need;
                writeln!(
                    csv,
                    "package,n={} |F|={},{},{},{}",
                    p.spec.n,
                    p.f.len(),
                    format_rational(&have),
                    format_rational(&need),
                    have >= need
                )
                .expect("write to string");
            }
            Ok(RunOutput {
                status: if ok { Status::Success } else { Status::TargetNotMet },
                summary: format!(
                    "window={} packages={} violations={}",
                    asm.action.window.len(),
                    asm.packages.len(),
                    rep.violations.len()
                ),
                certificate: Some(to_json(&asm.action.to_json())),
                report: csv,
            })
        }
        Task::Precompact(t) => {
            let model = require_model(s)?;
            let window = t.window.resolve(&model)?;
            let pool = t.pool.resolve(&model)?;
            let u = Entourage::new(t.radius);
            let res = precompact_perturbation(&model, &u, &window, &pool)?;
            let rep = verify_perturbation(&model, &res.action, &u)?;
            let mut csv = perturbation_csv(&model, &res.action, &rep)?;
            let divides = res.group_order.map(|o| res.factorial_bound() % o as u128 == 0);
            writeln!(
                csv,
                "order,|F|={},{},{},{}",
                res.centers.len(),
                res.group_order.map(|o| o.to_string()).unwrap_or_else(|| "-".into()),
                res.factorial_bound(),
                divides.map(|d| d.to_string()).unwrap_or_else(|| "-".into())
            )
            .expect("write to string");
            Ok(RunOutput {
                status: if rep.is_clean() && divides != Some(false) {
                    Status::Success
                } else {
                    Status::TargetNotMet
                },
                summary: format!(
                    "|F|={} order={}",
                    res.centers.len(),
                    res.group_order.map(|o| o.to_string()).unwrap_or_else(|| "-".into())
                ),
                certificate: Some(to_json(&res.action.to_json())),
                report: csv,
            })
        }
        Task::ParadoxVerify(t) => {
            let model = require_model(s)?;
            let window = t.window.resolve(&model)?;
            let cert = match &t.certificate {
                Some(c) => ParadoxCertificate::from_json(&model, c)?,
                None => f2_standard_certificate(),
            };
            let action = t
                .action
                .as_ref()
                .map(|a| PerturbedAction::from_json(&model, a))
                .transpose()?;
            let eval = match &action {
                Some(a) => Evaluation::Perturbed(a),
                None => Evaluation::Direct,
            };
            let rep = verify_on_window(&model, &cert, &window, eval)?;
            Ok(RunOutput {
                status: if rep.interior_violations() == 0 {
                    Status::Success
                } else {
                    Status::TargetNotMet
                },
                summary: format!(
                    "window={} interior_violations={} boundary_defects={}",
                    rep.window_size,
                    rep.interior_violations(),
                    rep.boundary_defects()
                ),
                certificate: Some(to_json(&cert.to_json())),
                report: rep.to_csv(),
            })
        }
        Task::ParadoxSearch(t) => {
            let model = require_model(s)?;
            let window = t.window.resolve(&model)?;
            let pool = t.pool.resolve(&model)?;
            let rep = search_small_paradox(&model, &window, &pool, t.max_pieces, budget(t.budget))?;
            let last = rep.rows.last();
            Ok(RunOutput {
                status: if rep.budget_exhausted {
                    Status::TargetNotMet
                } else {
                    Status::Success
                },
                summary: format!(
                    "window={} min_defect={}",
                    rep.window_size,
                    last.map(|r| r.defect.to_string()).unwrap_or_else(|| "-".into())
                ),
                certificate: last.and_then(|r| r.certificate.as_ref()).map(|c| to_json(&c.to_json())),
                report: rep.to_csv(),
            })
        }
        Task::Suite(t) => {
            let source = match &t.directory {
                Some(d) => SuiteSource::Directory(PathBuf::from(d)),
                None => SuiteSource::BuiltIn,
            };
            let rep = run_suite(&source, opts)?;
            Ok(RunOutput {
                status: if rep.all_passed() {
                    Status::Success
                } else {
                    Status::TargetNotMet
                },
                summary: format!("{}/{} rows passed", rep.passed(), rep.rows.len()),
                certificate: Some(to_json(&rep.rows)),
                report: rep.to_csv(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormRowJson {
    pub g: String,
    #[serde(with = "rational::serde_str")]
    pub p_d: Rational,
    #[serde(with = "rational::serde_str")]
    pub p_unit: Rational,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormJson {
    pub weight: WeightJson,
    #[serde(with = "rational::serde_str")]
    pub defect: Rational,
    #[serde(with = "rational::serde_str")]
    pub unit_defect: Rational,
    pub rows: Vec<SeminormRowJson>,
}

fn perturbation_csv(
    model: &GroupModel,
    action: &PerturbedAction,
    rep: &PerturbationReport,
) -> Result<String, ScenarioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "subject", "value", "bound", "ok"])
        .expect("in-memory csv");
    let flags = action.involution_flags(model)?;
    for (g, flag) in action.pool.iter().zip(flags) {
        let worst = rep.violations.iter().filter(|v| v.g == *g).map(|v| v.distance).max();
        w.write_record([
            "deviation".to_string(),
            g.to_string(),
            worst.map(|d| format_rational(&d)).unwrap_or_else(|| "-".into()),
            format_rational(&rep.radius),
            worst.is_none().to_string(),
        ])
        .expect("in-memory csv");
        w.write_record([
            "involution".to_string(),
            g.to_string(),
            flag.map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
            String::new(),
            (flag != Some(false)).to_string(),
        ])
        .expect("in-memory csv");
    }
    for row in &rep.malformed {
        w.write_record(["permutation", row.as_str(), "malformed", "", "false"])
            .expect("in-memory csv");
    }
    for r in &rep.rosenblatt {
        let ok = r.bound.is_none_or(|b| r.ratio <= b);
        w.write_record([
            "rosenblatt".to_string(),
            r.label.clone(),
            format_rational(&r.ratio),
            r.bound.map(|b| format_rational(&b)).unwrap_or_default(),
            ok.to_string(),
        ])
        .expect("in-memory csv");
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub task: String,
    pub version: String,
    pub exit_code: i32,
    pub summary: String,
    pub workers: usize,
    pub seed: Option<u64>,
    pub wall_time_ms: u128,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

/// Result of [`run_scenario`]; errors are reported with exit code 1.
#[derive(Debug)]
pub struct RunRecord {
    pub exit_code: i32,
    pub output: Option<RunOutput>,
    pub error: Option<ScenarioError>,
}

/// Loads, executes and writes artifacts into `out_dir`.
pub fn run_scenario(config: &Path, out_dir: &Path, opts: &RunOptions) -> RunRecord {
    let fail = |e| RunRecord {
        exit_code: 1,
        output: None,
        error: Some(e),
    };
    let scenario = match load_scenario(config) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match run_loaded(&scenario, out_dir, opts) {
        Ok(out) => RunRecord {
            exit_code: out.status.exit_code(),
            output: Some(out),
            error: None,
        },
        Err(e) => fail(e),
    }
}

pub fn run_loaded(scenario: &Scenario, out_dir: &Path, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    let start = Instant::now();
    let out = execute(scenario, opts)?;
    let run = RunInfo {
        config: serde_json::to_value(scenario).expect("scenario serializes"),
        task: scenario.task.name(),
        seed: opts.seed.or(scenario.seed),
        workers: opts.workers,
        elapsed_ms: start.elapsed().as_millis(),
    };
    write_artifacts(out_dir, &scenario.outputs.clone().unwrap_or_default(), &run, &out)?;
    Ok(out)
}

/// What the manifest records about a run besides its artifacts.
pub struct RunInfo<'a> {
    pub config: serde_json::Value,
    pub task: &'a str,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub elapsed_ms: u128,
}

/// Writes the certificate (if any), the report and the manifest.
pub fn write_artifacts(
    out_dir: &Path,
    names: &Outputs,
    run: &RunInfo<'_>,
    out: &RunOutput,
) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(out_dir).map_err(|e| ScenarioError::io(out_dir, e))?;
    let mut artifacts = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<(), ScenarioError> {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| ScenarioError::io(&path, e))?;
        artifacts.push(ArtifactEntry {
            file: name.to_string(),
            sha256: sha256_hex(body.as_bytes()),
        });
        Ok(())
    };
    if let Some(cert) = &out.certificate {
        write(&names.certificate, cert)?;
    }
    write(&names.report, &out.report)?;
    let manifest = Manifest {
        config_sha256: sha256_hex(run.config.to_string().as_bytes()),
        config: run.config.clone(),
        task: run.task.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        exit_code: out.status.exit_code(),
        summary: out.summary.clone(),
        workers: run.workers.unwrap_or_else(rayon::current_num_threads),
        seed: run.seed,
        wall_time_ms: run.elapsed_ms,
        artifacts,
    };
    let path = out_dir.join(&names.manifest);
    std::fs::write(&path, to_json(&manifest)).map_err(|e| ScenarioError::io(&path, e))
}

/// Checks a stored table against radius `u` and reports it like the
/// perturb task does.
pub fn verify_action(model: &GroupModel, action: &PerturbedAction, u: &Entourage) -> Result<RunOutput, ScenarioError> {
    let rep = verify_perturbation(model, action, u)?;
    Ok(RunOutput {
        status: if rep.is_clean() {
            Status::Success
        } else {
            Status::TargetNotMet
        },
        summary: format!(
            "checked={} violations={} malformed={}",
            rep.checked,
            rep.violations.len(),
            rep.malformed.len()
        ),
        certificate: None,
        report: perturbation_csv(model, action, &rep)?,
    })
}
