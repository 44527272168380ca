//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every measured value is compared against an oracle written here, apart
//! from the library: exhaustive Hall deficiencies, raw word enumeration,
//! injection DP, optimal transport by the Hungarian method, a chain DP for
//! paradox labelings, and direct table scans for perturbations.
//!
//! Set `ACCEPTANCE_STRICT=1` to also fail on known failures.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use folner::algebra::{approx_by_uniform, seminorm_pd, FiniteWeight, DEFAULT_N_MAX};
use folner::folner::{
    bridge_metric, folner_search, lattice_box, topological_defect, FolnerCertificate, SearchOptions, Strategy,
};
use folner::matching::{max_matching, perfect_matching, BipartiteGraph};
use folner::paradox::{f2_standard_certificate, search_small_paradox, verify_on_window, Evaluation};
use folner::perturb::{build_perturbation, precompact_perturbation, verify_perturbation, IndexSpec};
use folner::rational::format_rational;
use folner::scenario::{config_hash, execute, load_scenario, parse_scenario, run_scenario, RunOptions, Status};
use folner::{Element, Entourage, FiniteWindow, GroupModel, MetricRule, Rational};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

/// Criteria that fail for a documented reason; they still print FAIL.
const KNOWN_FAILURES: [(u32, &str); 1] = [(
    6,
    "p_d uses test functions with values in [-1,1]; 1 - theta/2 only bounds the [0,1] variant (2x2 box: p_d = 1 > 3/4)",
)];

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 13] = [
    (1, "hall identity", 10, hall_identity),
    (2, "perfect matching iff hall condition", 10, perfect_iff_hall),
    (3, "lattice boxes", 5, lattice_boxes),
    (4, "free group balls", 60, free_balls),
    (5, "circle rotations", 5, circle_rotations),
    (6, "matching to seminorm bridge", 60, seminorm_bridge),
    (7, "seminorm of point pairs", 30, point_pairs),
    (8, "uniform approximation", 60, uniform_approximation),
    (9, "precompact perturbation", 30, precompact),
    (10, "finite assembly", 60, assembly),
    (11, "free group paradox certificate", 120, free_paradox),
    (12, "integer window paradox search", 120, integer_paradox),
    (13, "determinism", 600, determinism),
];

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut unexpected = Vec::new();
    let mut failed = 0;
    for (id, name, limit, check) in CRITERIA {
        let start = Instant::now();
        let (passed, measured) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let elapsed = start.elapsed();
        let slow = elapsed > Duration::from_secs(limit);
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        println!(
            "{} {id:>2} {name}: {measured} [{:.2}s, limit {limit}s{}]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if slow { ", over" } else { "" }
        );
        if !passed {
            failed += 1;
            match known {
                Some((_, why)) if !strict => println!("     known failure: {why}"),
                _ => unexpected.push(id),
            }
        } else if known.is_some() {
            println!("     listed as a known failure but passed; update the list");
            unexpected.push(id);
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if !unexpected.is_empty() {
        println!("unexpected results: {unexpected:?}");
        std::process::exit(1);
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: usize) -> Rational {
    Rational::from_integer(n as i64)
}

// ---------------------------------------------------------------- matching

fn random_graphs(count: usize) -> Vec<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    (0..count)
        .map(|_| {
            let nl = rng.gen_range(1..=10);
            let nr = rng.gen_range(1..=10);
            let p = rng.gen_range(0.05..0.7);
            let adj = (0..nl).map(|_| (0..nr).filter(|_| rng.gen_bool(p)).collect()).collect();
            BipartiteGraph::new(nr, adj)
        })
        .collect()
}

/// `max_S |S| - |N(S)|` by enumerating every left subset.
fn exhaustive_deficiency(g: &BipartiteGraph) -> usize {
    let n = g.n_left();
    let mut best = 0;
    for s in 0u32..1 << n {
        let mut nbrs = BTreeSet::new();
        for i in (0..n).filter(|i| s >> i & 1 == 1) {
            for j in 0..g.n_right {
                if g.has_edge(i, j) {
                    nbrs.insert(j);
                }
            }
        }
        best = best.max((s.count_ones() as usize).saturating_sub(nbrs.len()));
    }
    best
}

fn hall_identity() -> Outcome {
    let mut bad = 0;
    let mut invalid = 0;
    for g in random_graphs(500) {
        let m = max_matching(&g);
        if m.mu != g.n_left() - exhaustive_deficiency(&g) {
            bad += 1;
        }
        let lefts: HashSet<usize> = m.pairing.iter().map(|p| p[0]).collect();
        let rights: HashSet<usize> = m.pairing.iter().map(|p| p[1]).collect();
        if m.pairing.len() != m.mu
            || lefts.len() != m.mu
            || rights.len() != m.mu
            || m.pairing.iter().any(|&[i, j]| !g.has_edge(i, j))
        {
            invalid += 1;
        }
    }
    Ok((
        bad == 0 && invalid == 0,
        format!("500 instances, {bad} mu mismatches, {invalid} invalid pairings"),
    ))
}

fn perfect_iff_hall() -> Outcome {
    let graphs = random_graphs(500);
    let perfect = graphs.iter().filter(|g| perfect_matching(g).is_perfect()).count();
    let bad = graphs
        .iter()
        .filter(|g| perfect_matching(g).is_perfect() != (exhaustive_deficiency(g) == 0))
        .count();
    Ok((
        bad == 0,
        format!("500 instances ({perfect} perfect), {bad} disagreements"),
    ))
}

// ------------------------------------------------------------------ Følner

fn unit_vectors() -> FiniteWindow {
    FiniteWindow::new([Element::Lattice(vec![1, 0]), Element::Lattice(vec![0, 1])])
}

fn square(n: i64) -> FiniteWindow {
    FiniteWindow::new((0..n).flat_map(|x| (0..n).map(move |y| Element::Lattice(vec![x, y]))))
}

/// `min_g |F ∩ (F + g)| / |F|` for a set of lattice points.
fn overlap_ratio(f: &FiniteWindow, shifts: &[[i64; 2]]) -> Rational {
    let pts: HashSet<Vec<i64>> = f
        .iter()
        .map(|e| match e {
            Element::Lattice(v) => v.clone(),
            _ => unreachable!(),
        })
        .collect();
    shifts
        .iter()
        .map(|s| {
            let hit = pts
                .iter()
                .filter(|p| pts.contains(&vec![p[0] + s[0], p[1] + s[1]]))
                .count();
            r(hit as i64, pts.len() as i64)
        })
        .min()
        .unwrap()
}

fn lattice_boxes() -> Outcome {
    let z2 = GroupModel::lattice(2);
    let mut wrong = Vec::new();
    for n in 2..=30 {
        let f = square(n);
        let cert = topological_defect(&z2, &f, &unit_vectors(), &Entourage::identity_only())?;
        let oracle = overlap_ratio(&f, &[[1, 0], [0, 1]]);
        if cert.theta != oracle || cert.theta != Rational::one() - r(1, n) {
            wrong.push(n);
        }
    }
    let out = folner_search(
        &z2,
        &unit_vectors(),
        &Entourage::identity_only(),
        &SearchOptions {
            theta: r(9, 10),
            strategy: Strategy::Boxes,
            budget: 500,
            seed: None,
        },
    )?;
    let is_box = out.found && out.best.as_ref().is_some_and(|c| c.f == square(10));
    Ok((
        wrong.is_empty() && is_box,
        format!("n=2..30 wrong at {wrong:?}; search at 9/10 returned the 10x10 box: {is_box}"),
    ))
}

/// Reduced words over `a A b B`, by reducing every raw word of length `<= n`.
fn raw_ball(n: usize) -> BTreeSet<String> {
    let mut all = BTreeSet::new();
    let mut layer = vec![String::new()];
    for _ in 0..=n {
        for w in &layer {
            all.insert(reduce(w));
        }
        layer = layer
            .iter()
            .flat_map(|w| "aAbB".chars().map(move |c| format!("{w}{c}")))
            .collect();
    }
    all
}

fn reduce(w: &str) -> String {
    let mut out: Vec<char> = Vec::new();
    for c in w.chars() {
        match out.last() {
            Some(&l) if l != c && l.eq_ignore_ascii_case(&c) => {
                out.pop();
            }
            _ => out.push(c),
        }
    }
    out.into_iter().collect()
}

fn letters(e: &Element) -> String {
    e.to_string().replace(',', "")
}

fn free_balls() -> Outcome {
    let f2 = GroupModel::free(2);
    let a = FiniteWindow::new([f2.parse_element("a")?]);
    let mut mismatches = Vec::new();
    for n in 2..=6u32 {
        let words = raw_ball(n as usize);
        let ball = f2.word_ball(n)?;
        let lib: BTreeSet<String> = ball.iter().map(letters).collect();
        let kept = words
            .iter()
            .filter(|w| words.contains(&reduce(&format!("a{w}"))))
            .count();
        let oracle = r(kept as i64, words.len() as i64);
        let p = 3i64.pow(n);
        let cert = topological_defect(&f2, &ball, &a, &Entourage::identity_only())?;
        if lib != words || cert.theta != oracle || oracle != r(p - 1, 2 * p - 1) {
            mismatches.push(n);
        }
    }
    let s = parse_scenario(
        r#"{"model":{"kind":"free","params":{"rank":2}},"task":{"search":{"theta":"3/5","strategy":"balls","budget":7}}}"#,
    )?;
    let out = execute(&s, &RunOptions::default())?;
    let missed = out.status == Status::TargetNotMet && out.status.exit_code() == 2;
    Ok((
        mismatches.is_empty() && missed,
        format!(
            "profile wrong at {mismatches:?}; search at 3/5: {} ({})",
            out.summary,
            out.status.exit_code()
        ),
    ))
}

fn circle_dist(x: &Rational, y: &Rational) -> Rational {
    let t = (x - y) - (x - y).floor();
    t.min(Rational::one() - t)
}

/// Largest injection under the relation, by DP over sets of used targets.
fn best_injection(rel: &[Vec<bool>], n_right: usize) -> usize {
    let mut best: HashMap<u32, usize> = HashMap::from([(0, 0)]);
    for row in rel {
        let mut next = best.clone();
        for (&mask, &v) in &best {
            for j in (0..n_right).filter(|&j| row[j] && mask >> j & 1 == 0) {
                let e = next.entry(mask | 1 << j).or_insert(0);
                *e = (*e).max(v + 1);
            }
        }
        best = next;
    }
    best.into_values().max().unwrap_or(0)
}

fn circle_rotations() -> Outcome {
    let c = GroupModel::circle();
    let f = c.grid_sample(12, None)?;
    let u = Entourage::new(r(1, 24));
    let third = FiniteWindow::new([Element::Circle(r(1, 3))]);
    let cert = topological_defect(&c, &f, &third, &u)?;
    let identity = cert.matchings[0].result.pairing.iter().all(|&[i, j]| i == j);
    let eighth = FiniteWindow::new([Element::Circle(r(1, 8))]);
    let cert8 = topological_defect(&c, &f, &eighth, &u)?;
    let pts: Vec<Rational> = (0..12).map(|k| r(k, 12)).collect();
    let moved: Vec<Rational> = pts.iter().map(|p| p + r(1, 8)).collect();
    let rel: Vec<Vec<bool>> = pts
        .iter()
        .map(|x| moved.iter().map(|y| circle_dist(x, y) <= r(1, 24)).collect())
        .collect();
    let oracle = r(best_injection(&rel, 12) as i64, 12);
    Ok((
        cert.theta == Rational::one() && identity && cert8.theta == oracle,
        format!(
            "theta(1/3)={} identity pairing={identity}; theta(1/8)={} oracle={}",
            format_rational(&cert.theta),
            format_rational(&cert8.theta),
            format_rational(&oracle)
        ),
    ))
}

// --------------------------------------------------------------- seminorms

/// Minimum-cost perfect assignment (Hungarian method, potentials).
fn min_assignment(cost: &[Vec<Rational>]) -> Rational {
    let n = cost.len();
    let inf = Rational::from_integer(1 << 40);
    let mut u = vec![Rational::zero(); n + 1];
    let mut v = vec![Rational::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// `p_d(δ_F - g δ_F)` as the cheapest transport of `F \ gF` onto `gF \ F`
/// under `min(d, 2)`: unit masses make the transport an assignment.
fn transport_oracle(model: &GroupModel, f: &FiniteWindow, g: &Element) -> Result<Rational, Box<dyn std::error::Error>> {
    let gf = model.translate_window(g, f)?;
    let plus = f.difference(&gf);
    let minus = gf.difference(f);
    let two = Rational::from_integer(2);
    let mut cost = Vec::new();
    for x in &plus {
        let mut row = Vec::new();
        for y in &minus {
            row.push(model.distance(x, y)?.min(two));
        }
        cost.push(row);
    }
    Ok(if cost.is_empty() {
        Rational::zero()
    } else {
        min_assignment(&cost) / int(f.len())
    })
}

fn bridge_certificates() -> Result<Vec<(GroupModel, FolnerCertificate)>, Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    let z2 = GroupModel::lattice(2);
    for n in 2..=12 {
        out.push((
            z2.clone(),
            topological_defect(&z2, &lattice_box(&z2, n)?, &unit_vectors(), &Entourage::identity_only())?,
        ));
    }
    let f2 = GroupModel::free(2);
    let a = FiniteWindow::new([f2.parse_element("a")?]);
    for n in 2..=6 {
        let ball = f2.word_ball(n)?;
        if ball.len() <= 144 {
            out.push((
                f2.clone(),
                topological_defect(&f2, &ball, &a, &Entourage::identity_only())?,
            ));
        }
    }
    let c = GroupModel::circle();
    for g in [r(1, 3), r(1, 8)] {
        let e = FiniteWindow::new([Element::Circle(g)]);
        out.push((
            c.clone(),
            topological_defect(&c, &c.grid_sample(12, None)?, &e, &Entourage::new(r(1, 24)))?,
        ));
    }
    Ok(out)
}

fn seminorm_bridge() -> Outcome {
    let certs = bridge_certificates()?;
    let mut above = Vec::new();
    let mut unit_above = 0;
    let mut oracle_mismatch = 0;
    for (model, cert) in &certs {
        let check = cert.bridge_check(model)?;
        let metric = bridge_metric(model, &cert.entourage)?;
        for row in &check.rows {
            if row.p_d != transport_oracle(&metric, &cert.f, &row.g)? {
                oracle_mismatch += 1;
            }
            if row.p_unit > row.p_d {
                oracle_mismatch += 1;
            }
        }
        if check.max_p_d() > check.bound {
            above.push(format!(
                "|F|={} p_d={} bound={}",
                cert.f.len(),
                format_rational(&check.max_p_d()),
                format_rational(&check.bound)
            ));
        }
        if check.max_p_unit() > check.bound {
            unit_above += 1;
        }
    }
    Ok((
        above.is_empty() && oracle_mismatch == 0,
        format!(
            "{} certificates, LP vs transport mismatches {oracle_mismatch}; p_d above 1-theta/2 on {}: {}; [0,1] variant above on {unit_above}",
            certs.len(),
            above.len(),
            above.join(", ")
        ),
    ))
}

fn pair_models() -> Result<Vec<GroupModel>, Box<dyn std::error::Error>> {
    Ok(vec![
        GroupModel::lattice(2).with_metric(MetricRule::Word, r(1, 3))?,
        GroupModel::free(2).with_metric(MetricRule::Word, r(1, 2))?,
        GroupModel::heisenberg().with_metric(MetricRule::Word, r(1, 4))?,
        GroupModel::circle().scaled(r(3, 1)),
        GroupModel::torus(2).scaled(r(2, 1)),
    ])
}

fn point_pairs() -> Outcome {
    let models = pair_models()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a12);
    let mut bad = 0;
    let mut uncertified = 0;
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
        // f(x) = s/100, f(y) = t/100 over the whole grid
        let mut grid = 0i64;
        for s in -100i64..=100 {
            for t in -100i64..=100 {
                if r((s - t).abs(), 100) <= d {
                    grid = grid.max(s - t);
                }
            }
        }
        let grid = r(grid, 100);
        if (sol.value - grid).abs() > r(2, 100) || sol.value != d.min(Rational::from_integer(2)) {
            bad += 1;
        }
        if !sol.certified {
            uncertified += 1;
        }
    }
    Ok((
        bad == 0 && uncertified == 0,
        format!("100 pairs over 5 models, {bad} disagreements, {uncertified} without dual certificate"),
    ))
}

fn uniform_approximation() -> Outcome {
    let c = GroupModel::circle();
    let supply = c.grid_sample(400, None)?;
    let eps = r(1, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(0x22);
    let mut bad = 0;
    let mut worst_lp = Rational::zero();
    let mut worst_transport = Rational::zero();
    for _ in 0..50 {
        let k = rng.gen_range(1..=5);
        let mut pts = BTreeSet::new();
        while pts.len() < k {
            pts.insert(rng.gen_range(0..97i64));
        }
        let counts: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = counts.iter().sum();
        let a = FiniteWeight::new(
            pts.iter()
                .zip(&counts)
                .map(|(&p, &n)| (Element::Circle(r(p, 97)), r(n, total))),
        );
        let out = approx_by_uniform(&c, &a, eps, &supply, DEFAULT_N_MAX)?;
        let lp = seminorm_pd(&c, &a.sub(&FiniteWeight::uniform(&out.f)))?.value;
        // explicit transport: each supply point to its owner, mismatch through the sink
        let size = int(out.f.len());
        let mut moved = Rational::zero();
        let mut mismatch = Rational::zero();
        let mut used = BTreeSet::new();
        let mut pieces_ok = true;
        for (x, piece) in &out.pieces {
            for y in piece {
                moved += c.distance(x, y)? / size;
                pieces_ok &= c.distance(x, y)? <= eps / 2 && used.insert(y.clone()) && out.f.contains(y);
            }
            mismatch += (a.weight(x) - int(piece.len()) / size).abs();
        }
        pieces_ok &= used.len() == out.f.len();
        let transport = moved + mismatch;
        worst_lp = worst_lp.max(lp);
        worst_transport = worst_transport.max(transport);
        if lp > eps || lp > transport || lp != out.defect || !pieces_ok {
            bad += 1;
        }
    }
    Ok((
        bad == 0,
        format!(
            "50 weights, {bad} failures; worst LP p_d {} (transport bound {})",
            format_rational(&worst_lp),
            format_rational(&worst_transport)
        ),
    ))
}

// ----------------------------------------------------------- perturbations

/// Worst `d(α(g)(h), g h)` over a table, and whether every row permutes.
fn scan_table(
    model: &GroupModel,
    action: &folner::perturb::PerturbedAction,
) -> Result<(Rational, bool), Box<dyn std::error::Error>> {
    let mut worst = Rational::zero();
    let mut perms = true;
    for (g, row) in action.pool.iter().zip(&action.rows) {
        perms &= row.iter().collect::<HashSet<_>>().len() == row.len() && row.iter().all(|&j| j < row.len());
        for (h, &j) in action.window.iter().zip(row) {
            worst = worst.max(model.distance(&action.window.as_slice()[j], &model.mul(g, h)?)?);
        }
    }
    Ok((worst, perms))
}

/// Order of the permutation group generated by `gens`, by breadth-first
/// closure.
fn closure_order(gens: &[Vec<usize>], cap: usize) -> Option<usize> {
    let n = gens.first()?.len();
    let id: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q: Vec<usize> = p.iter().map(|&i| g[i]).collect();
            if seen.insert(q.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(q);
            }
        }
    }
    Some(seen.len())
}

fn precompact() -> Outcome {
    let c = GroupModel::circle();
    let radius = r(7, 20);
    let window = c.grid_sample(60, None)?;
    let pool = c.grid_sample(12, None)?;
    let res = precompact_perturbation(&c, &Entourage::new(radius), &window, &pool)?;
    let (worst, perms) = scan_table(&c, &res.action)?;
    let cells = res.action.window.len() * res.action.pool.len();
    let order = closure_order(&res.action.rows, 1 << 20);
    let k = res.centers.len();
    let factorial: u128 = (1..=k as u128).product();
    let divides = order.is_some_and(|o| factorial.is_multiple_of(o as u128));
    let sep = radius / 3;
    let mut separated = true;
    for (i, x) in res.centers.iter().enumerate() {
        for y in res.centers.iter().skip(i + 1) {
            separated &= circle_dist(&circle(x), &circle(y)) > sep;
        }
    }
    let maximal = window
        .iter()
        .filter(|w| !res.centers.contains(w))
        .all(|w| res.centers.iter().any(|x| circle_dist(&circle(x), &circle(w)) <= sep));
    Ok((
        worst <= radius && perms && cells == 720 && divides && k <= 9 && separated && maximal,
        format!(
            "|F|={k} cells={cells} worst deviation={} order={order:?} divides |F|!={divides} separated={separated} maximal={maximal}",
            format_rational(&worst)
        ),
    ))
}

fn circle(e: &Element) -> Rational {
    match e {
        Element::Circle(t) => *t,
        _ => unreachable!(),
    }
}

fn assembly() -> Outcome {
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
    let radius = r(1, 10);
    let out = build_perturbation(&c, &family, &Entourage::new(radius), 200)?;
    let action = &out.action;
    let (worst, perms) = scan_table(&c, action)?;
    let verified = verify_perturbation(&c, action, &Entourage::new(radius))?.is_clean();
    // ψ(g)(g h) = α(g)(h); squaring ψ must fix every point
    let mut involutions = true;
    for (g, row) in action.pool.iter().zip(&action.rows) {
        let mut psi = HashMap::new();
        for (h, &j) in action.window.iter().zip(row) {
            psi.insert(c.mul(g, h)?, action.window.as_slice()[j].clone());
        }
        involutions &= psi.len() == action.window.len() && psi.iter().all(|(z, y)| psi.get(y) == Some(z));
    }
    let sizes = out.packages.iter().all(|p| {
        int(p.d.len()) * int(p.spec.n as usize) >= int(p.spec.n as usize - 1) * int(p.f.len())
            && p.d.iter().all(|x| p.f.contains(x))
    });
    Ok((
        worst <= radius && perms && verified && involutions && sizes && out.packages.len() == 2,
        format!(
            "window={} worst deviation={} involutions={involutions} |D_i|>=(1-1/n_i)|F_i|={sizes}",
            action.window.len(),
            format_rational(&worst)
        ),
    ))
}

// ----------------------------------------------------------------- paradox

fn first(w: &str) -> Option<char> {
    w.chars().next()
}

fn is_power_of(w: &str, c: char) -> bool {
    !w.is_empty() && w.chars().all(|x| x == c)
}

/// Pieces of the first-letter decomposition: `A_1, A_2, B_1, B_2`.
fn standard_piece(w: &str) -> usize {
    match first(w) {
        Some('a') => 0,
        None => 0,
        Some('A') if is_power_of(w, 'A') => 0,
        Some('A') => 1,
        Some('b') => 2,
        _ => 3,
    }
}

/// `(checkable, violations)` for the three equations on the ball of radius
/// `n`, from string arithmetic alone.
fn standard_counts(n: usize) -> [(usize, usize); 3] {
    let mut ball = BTreeSet::from([String::new()]);
    let mut layer = vec![String::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for c in "aAbB".chars() {
                let v = format!("{w}{c}");
                if reduce(&v).len() == v.len() {
                    next.push(v);
                }
            }
        }
        ball.extend(next.iter().cloned());
        layer = next;
    }
    let mut out = [(ball.len(), 0), (0, 0), (0, 0)];
    for y in &ball {
        for (k, (t, lo, hi)) in [('A', 0, 1), ('B', 2, 3)].into_iter().enumerate() {
            let pre = reduce(&format!("{t}{y}"));
            if !ball.contains(&pre) {
                continue;
            }
            let hits = usize::from(standard_piece(y) == lo) + usize::from(standard_piece(&pre) == hi);
            out[k + 1].0 += 1;
            out[k + 1].1 += usize::from(hits != 1);
        }
    }
    out
}

fn free_paradox() -> Outcome {
    let f2 = GroupModel::free(2);
    let cert = f2_standard_certificate();
    let mut interior = 0;
    let mut oracle_mismatch = Vec::new();
    for n in 1..=8u32 {
        let ball = f2.word_ball(n)?;
        let rep = verify_on_window(&f2, &cert, &ball, Evaluation::Direct)?;
        interior += rep.interior_violations();
        let lib: Vec<(usize, usize)> = rep.equations.iter().map(|e| (e.checkable, e.violations)).collect();
        if lib != standard_counts(n as usize) {
            oracle_mismatch.push(n);
        }
    }
    let b4 = f2.word_ball(4)?;
    let corruptions = cert.single_rule_corruptions();
    let mut missed = Vec::new();
    for (label, bad) in &corruptions {
        if verify_on_window(&f2, bad, &b4, Evaluation::Direct)?.interior_violations() == 0 {
            missed.push(label.clone());
        }
    }
    Ok((
        interior == 0 && oracle_mismatch.is_empty() && missed.is_empty() && !corruptions.is_empty(),
        format!(
            "interior violations on B_1..B_8: {interior}; oracle mismatch at {oracle_mismatch:?}; {} of {} corruptions undetected",
            missed.len(),
            corruptions.len()
        ),
    ))
}

/// Minimal interior defect over labelings of `0..len` for translators
/// `ta`, `tb` in `{-1, 0, 1}`: a chain DP, since each covering instance
/// reads three consecutive labels.
fn chain_min_defect(len: i64, ta: &[i64], tb: &[i64]) -> usize {
    let labels = ta.len() + tb.len();
    // covering instances, keyed by their rightmost position
    let mut at: HashMap<i64, Vec<Vec<(i64, usize)>>> = HashMap::new();
    for (ts, offset) in [(ta, 0), (tb, ta.len())] {
        for y in 0..len {
            let refs: Vec<(i64, usize)> = ts.iter().enumerate().map(|(k, t)| (y - t, offset + k)).collect();
            if refs.iter().all(|(x, _)| (0..len).contains(x)) {
                let last = refs.iter().map(|(x, _)| *x).max().unwrap();
                at.entry(last).or_default().push(refs);
            }
        }
    }
    // state: labels at positions j-1 and j (labels = none)
    let mut dp: HashMap<(usize, usize), usize> = HashMap::from([((labels, labels), 0)]);
    for j in 0..len {
        let mut next: HashMap<(usize, usize), usize> = HashMap::new();
        for (&(p2, p1), &cost) in &dp {
            for l in 0..labels {
                let label_at = |x: i64| match j - x {
                    0 => l,
                    1 => p1,
                    _ => p2,
                };
                let extra = at
                    .get(&j)
                    .map(|v| {
                        v.iter()
                            .filter(|refs| refs.iter().filter(|&&(x, want)| label_at(x) == want).count() != 1)
                            .count()
                    })
                    .unwrap_or(0);
                let e = next.entry((p1, l)).or_insert(usize::MAX);
                *e = (*e).min(cost + extra);
            }
        }
        dp = next;
    }
    dp.into_values().min().unwrap()
}

fn integer_paradox() -> Outcome {
    let z = GroupModel::lattice(1);
    let window = FiniteWindow::new((-10..=10).map(|k| Element::Lattice(vec![k])));
    let pool = FiniteWindow::new((-1..=1).map(|k| Element::Lattice(vec![k])));
    let rep = search_small_paradox(&z, &window, &pool, 6, 1 << 12)?;
    let subsets: Vec<Vec<i64>> = (1u8..8)
        .map(|m| (0..3).filter(|i| m >> i & 1 == 1).map(|i| i as i64 - 1).collect())
        .collect();
    let mut oracle = Vec::new();
    for p in 2..=6 {
        let mut best = usize::MAX;
        for ta in &subsets {
            for tb in &subsets {
                if ta.len() + tb.len() <= p {
                    best = best.min(chain_min_defect(21, ta, tb));
                }
            }
        }
        oracle.push((p, best));
    }
    let lib: Vec<(usize, usize)> = rep.rows.iter().map(|r| (r.pieces, r.defect)).collect();
    let exhaustive = rep.rows.iter().all(|r| r.exhaustive);
    let positive = lib.iter().all(|&(_, d)| d > 0);
    let shown: Vec<String> = lib.iter().map(|(p, d)| format!("{p}:{d}")).collect();
    Ok((
        lib == oracle && exhaustive && positive,
        format!(
            "minimal defect by piece count {}; chain DP agrees: {}; exhaustive={exhaustive}",
            shown.join(" "),
            lib == oracle
        ),
    ))
}

// ------------------------------------------------------------- determinism

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn determinism() -> Outcome {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(scenario_dir())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    let runs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let mut differing = Vec::new();
    let mut hash_bad = Vec::new();
    for cfg in &configs {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut files = Vec::new();
        for dir in &runs {
            let out = dir.path().join(&stem);
            let rec = run_scenario(cfg, &out, &RunOptions::default());
            if let Some(e) = rec.error {
                return Err(format!("{stem}: {e}").into());
            }
            let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json"))?)?;
            if manifest["config_sha256"] != config_hash(&load_scenario(cfg)?).as_str() {
                hash_bad.push(stem.clone());
            }
            files.push((
                std::fs::read(out.join("certificate.json"))?,
                std::fs::read(out.join("report.csv"))?,
            ));
        }
        if files[0] != files[1] {
            differing.push(stem);
        }
    }
    Ok((
        differing.is_empty() && hash_bad.is_empty() && !configs.is_empty(),
        format!(
            "{} scenarios run twice; differing: {differing:?}; manifest hash mismatches: {hash_bad:?}",
            configs.len()
        ),
    ))
}
