use std::path::PathBuf;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{execute, load_scenario, parse_scenario, RunOptions, ScenarioError, Status};
use crate::algebra::{approx_by_uniform, seminorm_pd, FiniteWeight, DEFAULT_N_MAX};
use crate::folner::{folner_search, lattice_box, topological_defect_with, FolnerCertificate, SearchOptions, Strategy};
use crate::group::{Element, Entourage, FiniteWindow, GroupModel, MetricRule};
use crate::matching::{build_graph, BipartiteGraph};
use crate::paradox::{f2_standard_certificate, search_small_paradox, verify_on_window, Evaluation};
use crate::perturb::{build_perturbation, precompact_perturbation, verify_perturbation, IndexSpec};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub id: String,
    pub criterion: String,
    pub passed: bool,
    pub measured: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "criterion", "passed", "measured"])
            .expect("in-memory csv");
        for r in &self.rows {
            w.write_record([
                r.id.as_str(),
                r.criterion.as_str(),
                if r.passed { "PASS" } else { "FAIL" },
                r.measured.as_str(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteSource {
    /// The thirteen built-in checks.
    BuiltIn,
    /// One row per `*.json` scenario in the directory, passing on exit 0.
    Directory(PathBuf),
}

pub fn run_suite(source: &SuiteSource, opts: &RunOptions) -> Result<SuiteReport, ScenarioError> {
    match source {
        SuiteSource::BuiltIn => Ok(SuiteReport {
            rows: CRITERIA
                .iter()
                .enumerate()
                .map(|(i, (name, check))| {
                    let (passed, measured) = match check(opts) {
                        Ok(v) => v,
                        Err(e) => (false, format!("error: {e}")),
                    };
                    SuiteRow {
                        id: (i + 1).to_string(),
                        criterion: name.to_string(),
                        passed,
                        measured,
                    }
                })
                .collect(),
        }),
        SuiteSource::Directory(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| ScenarioError::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            let rows = paths
                .iter()
                .map(|p| {
                    let id = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let outcome = load_scenario(p).and_then(|s| {
                        let name = s.name.clone().unwrap_or_else(|| s.task.name().to_string());
                        execute(&s, opts).map(|o| (name, o))
                    });
                    match outcome {
                        Ok((name, o)) => SuiteRow {
                            id,
                            criterion: name,
                            passed: o.status == Status::Success,
                            measured: o.summary,
                        },
                        Err(e) => SuiteRow {
                            id,
                            criterion: "error".into(),
                            passed: false,
                            measured: e.to_string(),
                        },
                    }
                })
                .collect();
            Ok(SuiteReport { rows })
        }
    }
}

type Check = fn(&RunOptions) -> Result<(bool, String), ScenarioError>;

const CRITERIA: [(&str, Check); 13] = [
    ("hall identity", hall_identity),
    ("perfect matching iff hall condition", perfect_iff_hall),
    ("lattice boxes", lattice_boxes),
    ("free group balls", free_balls),
    ("circle rotations", circle_rotations),
    ("seminorm bridge", seminorm_bridge),
    ("seminorm of point pairs", point_pairs),
    ("uniform approximation", uniform_approximation),
    ("precompact perturbation", precompact),
    ("finite assembly", assembly),
    ("free group paradox certificate", free_paradox),
    ("integer window paradox search", integer_paradox),
    ("determinism", determinism),
];

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn random_graphs(count: usize) -> Vec<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a11);
    (0..count)
        .map(|_| {
            let nl = rng.gen_range(1..=10);
            let nr = rng.gen_range(1..=10);
            let p = rng.gen_range(0.05..0.6);
            let adj = (0..nl).map(|_| (0..nr).filter(|_| rng.gen_bool(p)).collect()).collect();
            BipartiteGraph::new(nr, adj)
        })
        .collect()
}

/// `max_S |S| - |N(S)|` over all left subsets.
fn hall_deficiency(g: &BipartiteGraph) -> usize {
    let masks: Vec<u32> = (0..g.n_left())
        .map(|i| g.neighbourhood(&[i]).iter().fold(0, |m, j| m | 1 << j))
        .collect();
    (0u32..1 << masks.len())
        .map(|s| {
            let n = (0..masks.len())
                .filter(|i| s >> i & 1 == 1)
                .fold(0, |m, i| m | masks[i]);
            (s.count_ones() as usize).saturating_sub(n.count_ones() as usize)
        })
        .max()
        .unwrap_or(0)
}

fn hall_identity(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let graphs = random_graphs(500);
    let bad = graphs
        .iter()
        .filter(|g| (opts.matcher)(g).mu != g.n_left() - hall_deficiency(g))
        .count();
    Ok((bad == 0, format!("500 instances, {bad} mismatches")))
}

fn perfect_iff_hall(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let graphs = random_graphs(500);
    let bad = graphs
        .iter()
        .filter(|g| ((opts.matcher)(g).mu == g.n_left()) != (hall_deficiency(g) == 0))
        .count();
    Ok((bad == 0, format!("500 instances, {bad} disagreements")))
}

fn lattice_boxes(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let z2 = GroupModel::lattice(2);
    let e = FiniteWindow::new(z2.standard_generators());
    let u = Entourage::identity_only();
    let mut bad = Vec::new();
    for n in 2..=30 {
        let cert = topological_defect_with(&z2, &lattice_box(&z2, n)?, &e, &u, opts.matcher)?;
        if cert.theta != Rational::one() - r(1, n) {
            bad.push(n);
        }
    }
    let out = folner_search(
        &z2,
        &e,
        &u,
        &SearchOptions {
            theta: r(9, 10),
            strategy: Strategy::Boxes,
            budget: 500,
            seed: None,
        },
    )?;
    let found_box = out
        .best
        .as_ref()
        .is_some_and(|c| out.found && c.f == lattice_box(&z2, 10).unwrap_or_default());
    Ok((
        bad.is_empty() && found_box,
        format!("wrong n: {bad:?}; search returned the 10x10 box: {found_box}"),
    ))
}

/// Reduced words of length at most `n` over `a, A, b, B`, by enumeration of
/// all raw words.
fn enumerate_reduced(n: usize) -> Vec<String> {
    let mut words = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for c in ['a', 'A', 'b', 'B'] {
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let mut reduced: Vec<String> = words
        .iter()
        .map(|w| {
            let mut out: Vec<char> = Vec::new();
            for c in w.chars() {
                if out.last().is_some_and(|l| *l != c && l.eq_ignore_ascii_case(&c)) {
                    out.pop();
                } else {
                    out.push(c);
                }
            }
            out.into_iter().collect()
        })
        .collect();
    reduced.sort();
    reduced.dedup();
    reduced
}

fn free_balls(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let f2 = GroupModel::free(2);
    let e = f2.parse_window(&["a"])?;
    let u = Entourage::identity_only();
    let mut ok = true;
    for n in 2..=6u32 {
        let words = enumerate_reduced(n as usize);
        let ball = f2.parse_window(&words)?;
        ok &= ball == f2.word_ball(n)?;
        let p = 3i64.pow(n);
        let cert = topological_defect_with(&f2, &ball, &e, &u, opts.matcher)?;
        ok &= cert.theta == r(p - 1, 2 * p - 1);
    }
    let out = folner_search(
        &f2,
        &FiniteWindow::new(f2.standard_generators()),
        &u,
        &SearchOptions {
            theta: r(3, 5),
            strategy: Strategy::Balls,
            budget: 7,
            seed: None,
        },
    )?;
    let best = out.best_theta().unwrap_or_else(Rational::zero);
    ok &= !out.found && best < r(51, 100);
    Ok((
        ok,
        format!(
            "profile matches; search found={} best={}",
            out.found,
            format_rational(&best)
        ),
    ))
}

/// Largest injection by dynamic programming over used right vertices.
fn brute_injection(g: &BipartiteGraph) -> usize {
    let n = g.n_left();
    let mut best = vec![None::<usize>; 1 << g.n_right];
    best[0] = Some(0);
    for i in 0..n {
        let mut next = best.clone();
        for (mask, v) in best.iter().enumerate() {
            let Some(v) = *v else { continue };
            for j in g.neighbourhood(&[i]) {
                if mask >> j & 1 == 0 {
                    let m = mask | 1 << j;
                    next[m] = next[m].max(Some(v + 1));
                }
            }
        }
        best = next;
    }
    best.into_iter().flatten().max().unwrap_or(0)
}

fn circle_rotations(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let c = GroupModel::circle();
    let f = c.grid_sample(12, None)?;
    let u = Entourage::new(r(1, 24));
    let g = c.parse_element("1/3")?;
    let cert = topological_defect_with(&c, &f, &FiniteWindow::new([g.clone()]), &u, opts.matcher)?;
    let gf = c.translate_window(&g, &f)?;
    let identity = cert.matchings[0]
        .result
        .pairing
        .iter()
        .all(|&[i, j]| f.get(i) == gf.get(j));
    let h = c.parse_element("1/8")?;
    let cert8 = topological_defect_with(&c, &f, &FiniteWindow::new([h.clone()]), &u, opts.matcher)?;
    let inst = build_graph(&c, &f, &c.translate_window(&h, &f)?, &u)?;
    let brute = r(brute_injection(&inst.graph) as i64, 12);
    Ok((
        cert.theta == Rational::one() && identity && cert8.theta == brute,
        format!(
            "theta(1/3)={} identity={identity}; theta(1/8)={} brute={}",
            format_rational(&cert.theta),
            format_rational(&cert8.theta),
            format_rational(&brute)
        ),
    ))
}

fn bridge_certificates(opts: &RunOptions) -> Result<Vec<(GroupModel, FolnerCertificate)>, ScenarioError> {
    let mut out = Vec::new();
    let z2 = GroupModel::lattice(2);
    let e = FiniteWindow::new(z2.standard_generators());
    for n in 2..=12 {
        let cert = topological_defect_with(
            &z2,
            &lattice_box(&z2, n)?,
            &e,
            &Entourage::identity_only(),
            opts.matcher,
        )?;
        out.push((z2.clone(), cert));
    }
    let f2 = GroupModel::free(2);
    for n in 2..=3 {
        let cert = topological_defect_with(
            &f2,
            &f2.word_ball(n)?,
            &f2.parse_window(&["a"])?,
            &Entourage::identity_only(),
            opts.matcher,
        )?;
        out.push((f2.clone(), cert));
    }
    let c = GroupModel::circle();
    for g in ["1/3", "1/8"] {
        let cert = topological_defect_with(
            &c,
            &c.grid_sample(12, None)?,
            &c.parse_window(&[g])?,
            &Entourage::new(r(1, 24)),
            opts.matcher,
        )?;
        out.push((c.clone(), cert));
    }
    Ok(out)
}

fn seminorm_bridge(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let mut failures = 0;
    let mut unit_failures = 0;
    let mut worst = Rational::zero();
    let certs = bridge_certificates(opts)?;
    for (model, cert) in &certs {
        let b = cert.bridge_check(model)?;
        if !b.full_holds() {
            failures += 1;
        }
        if !b.unit_holds() {
            unit_failures += 1;
        }
        worst = worst.max(b.max_p_d() - b.bound);
    }
    Ok((
        failures == 0,
        format!(
            "{} certificates; p_d above 1-theta/2 on {failures} (worst excess {}); [0,1] variant above on {unit_failures}",
            certs.len(),
            format_rational(&worst)
        ),
    ))
}

fn pair_models() -> Result<Vec<GroupModel>, ScenarioError> {
    Ok(vec![
        GroupModel::lattice(2).with_metric(MetricRule::Word, r(1, 3))?,
        GroupModel::free(2).with_metric(MetricRule::Word, r(1, 2))?,
        GroupModel::heisenberg().with_metric(MetricRule::Word, r(1, 4))?,
        GroupModel::circle().scaled(r(3, 1)),
        GroupModel::torus(2).scaled(r(2, 1)),
    ])
}

fn point_pairs(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let models = pair_models()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a1);
    let mut bad = 0;
    for i in 0..100 {
        let m = &models[i % models.len()];
        let sample = m.grid_sample(if m.kind().is_continuous() { 40 } else { 3 }, None)?;
        let x = sample.as_slice()[rng.gen_range(0..sample.len())].clone();
        let mut y = x.clone();
        while y == x {
            y = sample.as_slice()[rng.gen_range(0..sample.len())].clone();
        }
        let d = m.distance(&x, &y)?;
        let sol = seminorm_pd(m, &FiniteWeight::new([(x, Rational::one()), (y, -Rational::one())]))?;
        // best grid-valued f with |f(x) - f(y)| <= d
        let mut grid_best = Rational::zero();
        for s in -100i64..=100 {
            for t in -100..=100 {
                let gap = r((s - t).abs(), 100);
                if gap <= d && gap > grid_best {
                    grid_best = gap;
                }
            }
        }
        let exact = d.min(Rational::from_integer(2));
        if crate::rational::abs(&(sol.value - grid_best)) > r(2, 100) || sol.value != exact || !sol.certified {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("100 pairs, {bad} disagreements")))
}

fn uniform_approximation(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let c = GroupModel::circle();
    let supply = c.grid_sample(400, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e);
    let mut bad = 0;
    let mut worst = Rational::zero();
    for _ in 0..50 {
        let k = rng.gen_range(1..=5);
        let counts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = counts.iter().sum();
        let a = FiniteWeight::new(
            counts
                .iter()
                .map(|&n| (Element::Circle(r(rng.gen_range(0..97), 97)), r(n, total))),
        );
        let a = a.scale(a.total().recip());
        match approx_by_uniform(&c, &a, r(1, 5), &supply, DEFAULT_N_MAX) {
            Ok(out) => {
                let check = seminorm_pd(&c, &a.sub(&FiniteWeight::uniform(&out.f)))?.value;
                worst = worst.max(check);
                if check > r(1, 5) {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    Ok((
        bad == 0,
        format!("50 weights, {bad} failures, worst p_d {}", format_rational(&worst)),
    ))
}

fn precompact(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let c = GroupModel::circle();
    let u = Entourage::new(r(7, 20));
    let window = c.grid_sample(60, None)?;
    let pool = c.grid_sample(12, None)?;
    let res = precompact_perturbation(&c, &u, &window, &pool)?;
    let rep = verify_perturbation(&c, &res.action, &u)?;
    let order = res.group_order;
    let divides = order.is_some_and(|o| res.factorial_bound() % o as u128 == 0);
    Ok((
        rep.is_clean() && divides && res.centers.len() <= 9 && rep.checked == 720,
        format!(
            "|F|={} checked={} violations={} order={:?}",
            res.centers.len(),
            rep.checked,
            rep.violations.len(),
            order
        ),
    ))
}

fn assembly(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let c = GroupModel::circle();
    let family = [
        IndexSpec {
            e: c.parse_window(&["0", "1/5"])?,
            n: 4,
        },
        IndexSpec {
            e: c.parse_window(&["0", "2/5"])?,
            n: 4,
        },
    ];
    let u = Entourage::new(r(1, 10));
    let out = build_perturbation(&c, &family, &u, 200)?;
    let rep = verify_perturbation(&c, &out.action, &u)?;
    let involutions = out.action.involution_flags(&c)?.iter().all(|f| *f == Some(true));
    let sizes = out.packages.iter().all(|p| {
        Rational::from_integer(p.d.len() as i64)
            >= (Rational::one() - r(1, p.spec.n as i64)) * Rational::from_integer(p.f.len() as i64)
    });
    Ok((
        rep.is_clean() && involutions && sizes,
        format!(
            "window={} violations={} involutions={involutions} package sizes={sizes}",
            out.action.window.len(),
            rep.violations.len()
        ),
    ))
}

fn free_paradox(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let f2 = GroupModel::free(2);
    let cert = f2_standard_certificate();
    let mut interior = 0;
    for n in 1..=8 {
        interior += verify_on_window(&f2, &cert, &f2.word_ball(n)?, Evaluation::Direct)?.interior_violations();
    }
    let b4 = f2.word_ball(4)?;
    let corruptions = cert.single_rule_corruptions();
    let mut missed = 0;
    for (_, bad) in &corruptions {
        if verify_on_window(&f2, bad, &b4, Evaluation::Direct)?.interior_violations() == 0 {
            missed += 1;
        }
    }
    Ok((
        interior == 0 && missed == 0,
        format!(
            "interior violations on B_1..B_8: {interior}; {missed} of {} corruptions undetected",
            corruptions.len()
        ),
    ))
}

fn integer_paradox(_: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let z = GroupModel::lattice(1);
    let window = FiniteWindow::new((-10..=10).map(|k| Element::Lattice(vec![k])));
    let pool = FiniteWindow::new((-1..=1).map(|k| Element::Lattice(vec![k])));
    let rep = search_small_paradox(&z, &window, &pool, 6, 1 << 12)?;
    let exhaustive = rep.rows.iter().all(|r| r.exhaustive);
    let positive = rep.rows.iter().all(|r| r.defect > 0);
    let defects: Vec<String> = rep.rows.iter().map(|r| format!("{}:{}", r.pieces, r.defect)).collect();
    Ok((
        exhaustive && positive && !rep.rows.is_empty(),
        format!(
            "minimal defect by piece count {}; exhaustive={exhaustive}",
            defects.join(" ")
        ),
    ))
}

const DETERMINISM_SCENARIOS: [&str; 5] = [
    r#"{"model":{"kind":"lattice","params":{"dim":2}},"task":{"search":{"theta":"9/10","strategy":"boxes","budget":20}}}"#,
    r#"{"model":{"kind":"free","params":{"rank":2}},"task":{"defect":{"F":{"ball":3},"E":{"elements":["a"]}}}}"#,
    r#"{"model":{"kind":"circle"},"task":{"perturb":{"family":[{"E":["0","1/5"],"n":4},{"E":["0","2/5"],"n":4}],"radius":"1/10"}}}"#,
    r#"{"model":{"kind":"circle"},"task":{"precompact":{"radius":"7/20","window":{"grid":60},"pool":{"grid":12}}}}"#,
    r#"{"model":{"kind":"lattice","params":{"dim":1}},"task":{"paradox-search":{"window":{"elements":["-3","-2","-1","0","1","2","3"]},"pool":{"elements":["-1","0","1"]},"max_pieces":4}}}"#,
];

fn determinism(opts: &RunOptions) -> Result<(bool, String), ScenarioError> {
    let mut differing = Vec::new();
    for (i, text) in DETERMINISM_SCENARIOS.iter().enumerate() {
        let s = parse_scenario(text)?;
        let a = execute(&s, opts)?;
        let b = execute(&s, opts)?;
        if a.certificate != b.certificate || a.report != b.report {
            differing.push(i);
        }
    }
    Ok((
        differing.is_empty(),
        format!(
            "{} scenarios run twice, differing: {differing:?}",
            DETERMINISM_SCENARIOS.len()
        ),
    ))
}
