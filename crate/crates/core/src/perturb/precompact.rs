use std::collections::{HashSet, VecDeque};

use num_traits::Zero;

use super::{common_denominator, PerturbError, PerturbedAction};
use crate::group::{Element, Entourage, FiniteWindow, GroupKind, GroupModel};
use crate::matching::{build_graph, max_matching, BipartiteGraph};
use crate::rational::Rational;

/// Largest `|F|` for which the generated group is enumerated.
pub const DEFAULT_ORDER_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecompactResult {
    pub action: PerturbedAction,
    /// The `V`-separated set `F`.
    pub centers: FiniteWindow,
    /// `π`: index into `centers` for each window point.
    pub projection: Vec<usize>,
    /// Whether `F` came from the greedy scan rather than a grid subgroup.
    pub greedy: bool,
    /// Order of the group generated by the table, when `|F|` is within the
    /// cap.
    pub group_order: Option<u64>,
}

impl PrecompactResult {
    /// `|F|!`, the bound every generated group order divides.
    pub fn factorial_bound(&self) -> u128 {
        (1..=self.centers.len() as u128).product()
    }
}

pub fn precompact_perturbation(
    model: &GroupModel,
    u: &Entourage,
    window: &FiniteWindow,
    pool: &FiniteWindow,
) -> Result<PrecompactResult, PerturbError> {
    precompact_perturbation_with(model, u, window, pool, DEFAULT_ORDER_CAP)
}

/// A table with `d(α(g)(x), g x) <= r` generating a group that embeds in
/// `Sym(F)`.
///
/// `F` is a maximal set with pairwise distances above `r/3`: the greedy
/// scan in canonical order, or if its projection fibers cannot be made
/// equal in size, the largest separated subgroup of the grid. Each `π` fiber
/// lies within `r/3` of its center; `α(g)` moves fiber `c` onto fiber
/// `γ(g)(c)` keeping positions, where `γ(g)(c) = φ_g^{-1}(g c)` for a perfect
/// matching `φ_g: F → gF` at radius `r/3`.
pub fn precompact_perturbation_with(
    model: &GroupModel,
    u: &Entourage,
    window: &FiniteWindow,
    pool: &FiniteWindow,
    order_cap: usize,
) -> Result<PrecompactResult, PerturbError> {
    if !model.kind().is_precompact() {
        return Err(PerturbError::Precondition(format!("{} is not precompact", model.id())));
    }
    if u.radius <= Rational::zero() {
        return Err(PerturbError::Precondition("entourage radius must be positive".into()));
    }
    if window.is_empty() {
        return Err(PerturbError::EmptyWindow);
    }
    let v = Entourage::new(u.radius / Rational::from_integer(3));

    let greedy = greedy_separated(model, window, &v)?;
    let mut chosen = None;
    if let Some(fibers) = balanced_fibers(model, window, &greedy, &v)? {
        chosen = Some((greedy, fibers, true));
    } else {
        for sub in grid_subgroups(model, window)? {
            if !is_separated(model, &sub, &v)? || !is_maximal_separated(model, &sub, window, &v)? {
                continue;
            }
            if let Some(fibers) = balanced_fibers(model, window, &sub, &v)? {
                chosen = Some((sub, fibers, false));
                break;
            }
        }
    }
    let (centers, fibers, greedy) =
        chosen.ok_or_else(|| PerturbError::Separation("no separated set with equal projection fibers".into()))?;
    let mut projection = vec![0; window.len()];
    for (c, fib) in fibers.iter().enumerate() {
        for &x in fib {
            projection[x] = c;
        }
    }
    let position: Vec<usize> = {
        let mut pos = vec![0; window.len()];
        for fib in &fibers {
            for (k, &x) in fib.iter().enumerate() {
                pos[x] = k;
            }
        }
        pos
    };

    let mut rows = Vec::with_capacity(pool.len());
    for g in pool {
        let gf = model.translate_window(g, &centers)?;
        let inst = build_graph(model, &centers, &gf, &v)?;
        let m = max_matching(&inst.graph);
        if !m.perfect {
            return Err(PerturbError::Separation(format!(
                "no perfect matching between F and {g}F"
            )));
        }
        // gamma[c] = φ_g^{-1}(g c)
        let mut gamma = vec![0; centers.len()];
        for &[i, j] in &m.pairing {
            let target = &gf.as_slice()[j];
            let c = centers
                .iter()
                .position(|x| model.mul(g, x).as_ref() == Ok(target))
                .expect("gF is the image of F");
            gamma[c] = i;
        }
        rows.push(
            (0..window.len())
                .map(|x| fibers[gamma[projection[x]]][position[x]])
                .collect(),
        );
    }
    let group_order = if centers.len() <= order_cap {
        Some(group_closure_order(&rows, window.len()))
    } else {
        None
    };
    Ok(PrecompactResult {
        action: PerturbedAction {
            window: window.clone(),
            pool: pool.clone(),
            rows,
            radius: u.radius,
            folner_windows: Vec::new(),
        },
        centers,
        projection,
        greedy,
        group_order,
    })
}

fn greedy_separated(model: &GroupModel, window: &FiniteWindow, v: &Entourage) -> Result<FiniteWindow, PerturbError> {
    let mut out: Vec<Element> = Vec::new();
    for x in window {
        let mut far = true;
        for c in &out {
            if model.distance(x, c)? <= v.radius {
                far = false;
                break;
            }
        }
        if far {
            out.push(x.clone());
        }
    }
    Ok(FiniteWindow::new(out))
}

fn is_separated(model: &GroupModel, f: &FiniteWindow, v: &Entourage) -> Result<bool, PerturbError> {
    for (i, x) in f.iter().enumerate() {
        for y in &f.as_slice()[i + 1..] {
            if model.distance(x, y)? <= v.radius {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// No window point lies farther than `r/3` from every point of `F`.
pub fn is_maximal_separated(
    model: &GroupModel,
    f: &FiniteWindow,
    window: &FiniteWindow,
    v: &Entourage,
) -> Result<bool, PerturbError> {
    for x in window {
        let mut covered = false;
        for c in f {
            if model.distance(x, c)? <= v.radius {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Equal-size fibers of a projection with `π(x) ∈ V x`: nearest center
/// first, then a slot matching when nearest centers are unbalanced. Fibers
/// list window indices sorted by distance to the center.
fn balanced_fibers(
    model: &GroupModel,
    window: &FiniteWindow,
    centers: &FiniteWindow,
    v: &Entourage,
) -> Result<Option<Vec<Vec<usize>>>, PerturbError> {
    if centers.is_empty() || !window.len().is_multiple_of(centers.len()) {
        return Ok(None);
    }
    let k = window.len() / centers.len();
    let mut dist = vec![vec![Rational::zero(); centers.len()]; window.len()];
    for (i, x) in window.iter().enumerate() {
        for (c, y) in centers.iter().enumerate() {
            dist[i][c] = model.distance(y, x)?;
        }
    }
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (i, row) in dist.iter().enumerate() {
        let c = (0..centers.len())
            .min_by(|&a, &b| row[a].cmp(&row[b]).then(a.cmp(&b)))
            .expect("centers non-empty");
        if row[c] > v.radius {
            return Ok(None);
        }
        fibers[c].push(i);
    }
    if fibers.iter().any(|f| f.len() != k) {
        let adj = dist
            .iter()
            .map(|row| {
                (0..centers.len())
                    .filter(|&c| row[c] <= v.radius)
                    .flat_map(|c| (c * k)..(c * k + k))
                    .collect()
            })
            .collect();
        let m = max_matching(&BipartiteGraph::new(window.len(), adj));
        if !m.perfect {
            return Ok(None);
        }
        fibers = vec![Vec::new(); centers.len()];
        for &[i, slot] in &m.pairing {
            fibers[slot / k].push(i);
        }
    }
    for (c, fib) in fibers.iter_mut().enumerate() {
        fib.sort_by(|&a, &b| dist[a][c].cmp(&dist[b][c]).then(a.cmp(&b)));
    }
    Ok(Some(fibers))
}

/// Subgroups `(1/k ℤ / ℤ)^d`, or `(n/k) ℤ / n ℤ`, contained in the window,
/// largest first. Empty unless the window is a full grid.
fn grid_subgroups(model: &GroupModel, window: &FiniteWindow) -> Result<Vec<FiniteWindow>, PerturbError> {
    let (n, full) = match model.kind() {
        GroupKind::Circle | GroupKind::Torus { .. } => {
            let n = common_denominator(window.iter());
            let full = u32::try_from(n)
                .ok()
                .map(|res| model.grid_sample(res, None))
                .transpose()?;
            (n, full)
        }
        GroupKind::Cyclic { modulus } => {
            let all = FiniteWindow::new((0..modulus).map(Element::Cyclic));
            (modulus as i64, Some(all))
        }
        _ => return Ok(Vec::new()),
    };
    if full.as_ref() != Some(window) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for k in (1..=n).rev().filter(|k| n % k == 0) {
        let step = n / k;
        let sub = window
            .iter()
            .filter(|x| match x {
                Element::Circle(r) => (r * Rational::from_integer(k)).is_integer(),
                Element::Torus(v) => v.iter().all(|r| (r * Rational::from_integer(k)).is_integer()),
                Element::Cyclic(j) => (*j as i64) % step == 0,
                _ => false,
            })
            .cloned()
            .collect();
        out.push(FiniteWindow::new::<Vec<Element>>(sub));
    }
    Ok(out)
}

/// Order of the permutation group generated by `rows`, by closure.
pub fn group_closure_order(rows: &[Vec<usize>], n: usize) -> u64 {
    let identity: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        for g in rows {
            let q: Vec<usize> = p.iter().map(|&i| g[i]).collect();
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen.len() as u64
}
