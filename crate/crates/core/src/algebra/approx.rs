//! Approximating a probability weight by a uniform one `δ_F`.
//!
//! Round `a` to `c(x)/n` within `ε/2` in `ℓ¹`, then split each `x` into
//! `c(x)` distinct supply points within `ε/2` of it. Each moved unit of mass
//! costs at most its distance under `p_d`, so `p_d(a - δ_F) <= ε`; the bound
//! is re-checked with the exact LP.

use num_traits::{Signed, Zero};

use super::{seminorm_pd, AlgebraError, FiniteWeight};
use crate::group::{Element, FiniteWindow, GroupModel};
use crate::matching::{max_matching, BipartiteGraph};
use crate::rational::{format_rational, Rational};

pub const DEFAULT_N_MAX: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct UniformApproximation {
    pub f: FiniteWindow,
    /// Point of `supp(a)` and the supply points standing in for it.
    pub pieces: Vec<(Element, Vec<Element>)>,
    pub l1_error: Rational,
    /// Exact `p_d(a - δ_F)`.
    pub defect: Rational,
}

/// Largest-remainder rounding of `n·a` to integers summing to `n`.
fn round_counts(a: &FiniteWeight, n: usize) -> Vec<usize> {
    let n_r = Rational::from_integer(n as i64);
    let mut counts = Vec::with_capacity(a.len());
    let mut fracs = Vec::with_capacity(a.len());
    for (i, (_, w)) in a.entries().iter().enumerate() {
        let raw = w * n_r;
        let fl = raw.floor();
        counts.push(fl.to_integer() as usize);
        fracs.push((raw - fl, i));
    }
    let assigned: usize = counts.iter().sum();
    // Larger remainder first, earlier element on ties.
    fracs.sort_by(|(fa, ia), (fb, ib)| fb.cmp(fa).then(ia.cmp(ib)));
    for &(_, i) in fracs.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn l1_distance(a: &FiniteWeight, counts: &[usize], n: usize) -> Rational {
    a.entries()
        .iter()
        .zip(counts)
        .map(|((_, w), &c)| (w - Rational::new(c as i64, n as i64)).abs())
        .sum()
}

pub fn approx_by_uniform(
    model: &GroupModel,
    a: &FiniteWeight,
    eps: Rational,
    supply: &FiniteWindow,
    n_max: usize,
) -> Result<UniformApproximation, AlgebraError> {
    if !a.is_stochastic() {
        return Err(AlgebraError::NotStochastic);
    }
    if eps <= Rational::zero() {
        return Err(AlgebraError::InvalidInput("epsilon must be positive".into()));
    }
    let finish = |pieces: Vec<(Element, Vec<Element>)>, l1_error: Rational| {
        let f: FiniteWindow = pieces.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
        let defect = seminorm_pd(model, &a.sub(&FiniteWeight::uniform(&f)))?.value;
        if defect > eps {
            return Err(AlgebraError::SupplyTooCoarse(format!(
                "verified defect {} exceeds epsilon",
                format_rational(&defect)
            )));
        }
        Ok(UniformApproximation {
            f,
            pieces,
            l1_error,
            defect,
        })
    };

    let entries = a.entries();
    if eps >= Rational::from_integer(2) {
        let x = entries[0].0.clone();
        return finish(vec![(x.clone(), vec![x])], Rational::zero());
    }
    if entries.iter().all(|(_, w)| *w == entries[0].1) {
        let pieces = entries.iter().map(|(x, _)| (x.clone(), vec![x.clone()])).collect();
        return finish(pieces, Rational::zero());
    }

    let half = eps / Rational::from_integer(2);
    let (n, counts) = (1..=n_max)
        .map(|n| (n, round_counts(a, n)))
        .find(|(n, c)| l1_distance(a, c, *n) <= half)
        .ok_or_else(|| {
            AlgebraError::InvalidInput(format!("no denominator up to {n_max} approximates within epsilon/2"))
        })?;
    let l1_error = l1_distance(a, &counts, n);

    let pool = supply.union(&a.support());
    let mut candidates: Vec<Vec<(Rational, usize)>> = Vec::with_capacity(entries.len());
    for (x, _) in entries {
        let mut near = Vec::new();
        for (j, y) in pool.iter().enumerate() {
            let d = model.distance(x, y)?;
            if d <= half {
                near.push((d, j));
            }
        }
        near.sort();
        candidates.push(near);
    }

    // Nearest free points first; fall back to a matching if greedy stalls.
    let mut used = vec![false; pool.len()];
    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); entries.len()];
    let mut greedy_ok = true;
    for (i, near) in candidates.iter().enumerate() {
        for &(_, j) in near {
            if chosen[i].len() == counts[i] {
                break;
            }
            if !used[j] {
                used[j] = true;
                chosen[i].push(j);
            }
        }
        greedy_ok &= chosen[i].len() == counts[i];
    }
    if !greedy_ok {
        let mut slot_owner = Vec::new();
        let mut adj = Vec::new();
        for (i, near) in candidates.iter().enumerate() {
            for _ in 0..counts[i] {
                slot_owner.push(i);
                adj.push(near.iter().map(|&(_, j)| j).collect());
            }
        }
        let graph = BipartiteGraph::new(pool.len(), adj);
        let m = max_matching(&graph);
        if !m.perfect {
            let (i, _) = &entries[slot_owner[m.witness[0]]];
            return Err(AlgebraError::SupplyTooCoarse(format!(
                "only {} of {} slots can be placed; first unplaced near {}",
                m.mu,
                slot_owner.len(),
                i
            )));
        }
        chosen = vec![Vec::new(); entries.len()];
        for [s, j] in m.pairing {
            chosen[slot_owner[s]].push(j);
        }
    }
    let pieces = entries
        .iter()
        .zip(chosen)
        .map(|((x, _), js)| {
            let mut pts: Vec<Element> = js.into_iter().map(|j| pool.as_slice()[j].clone()).collect();
            pts.sort();
            (x.clone(), pts)
        })
        .collect();
    finish(pieces, l1_error)
}
