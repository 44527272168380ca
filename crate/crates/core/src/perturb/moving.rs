use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use super::{common_denominator, grid_of, PerturbError};
use crate::folner::{conjugated_entourage, folner_search, SearchOptions, Strategy};
use crate::group::{Element, Entourage, FiniteWindow, GroupModel};
use crate::matching::{build_graph, max_matching};
use crate::rational::{format_rational, Rational};

pub const DEFAULT_STEP_CAP: usize = 10_000;

/// Finer grids tried as supply for the moving injection, as multiples of
/// the Følner grid.
const MAX_REFINEMENT: i64 = 64;

/// Injection `φ: F → supply` with `φ(x) ∈ U x` and `φ(F) ∩ g φ(F) = ∅` for
/// `g ∈ E \ {e}`.
pub fn moving_injection(
    model: &GroupModel,
    f: &FiniteWindow,
    e: &FiniteWindow,
    u: &Entourage,
    supply: &FiniteWindow,
) -> Result<BTreeMap<Element, Element>, PerturbError> {
    moving_injection_with_cap(model, f, e, u, supply, DEFAULT_STEP_CAP)
}

pub fn moving_injection_with_cap(
    model: &GroupModel,
    f: &FiniteWindow,
    e: &FiniteWindow,
    u: &Entourage,
    supply: &FiniteWindow,
    step_cap: usize,
) -> Result<BTreeMap<Element, Element>, PerturbError> {
    if !model.kind().is_continuous() {
        return Err(PerturbError::Precondition(format!(
            "moving sets need a non-discrete group, got {}",
            model.id()
        )));
    }
    let moves: Vec<Element> = e.iter().filter(|g| !model.is_identity(g)).cloned().collect();
    if moves.is_empty() {
        return Ok(f.iter().map(|x| (x.clone(), x.clone())).collect());
    }
    let mut shifts = Vec::with_capacity(2 * moves.len());
    for g in &moves {
        shifts.push(g.clone());
        shifts.push(model.inv(g)?);
    }
    let mut candidates = Vec::with_capacity(f.len());
    for x in f {
        let mut near = Vec::new();
        for y in supply {
            if !f.contains(y) && model.related(u, x, y)? {
                near.push((model.distance(y, x)?, y.clone()));
            }
        }
        near.sort();
        candidates.push(near.into_iter().map(|(_, y)| y).collect::<Vec<_>>());
    }

    let mut state = Placement {
        blocked: HashMap::new(),
        chosen: Vec::with_capacity(f.len()),
        steps: 0,
        best: 0,
    };
    let ok = place(model, &shifts, &candidates, &mut state, step_cap)?;
    if !ok {
        return Err(PerturbError::SupplyExhausted {
            placed: state.best,
            total: f.len(),
        });
    }
    Ok(f.iter().cloned().zip(state.chosen).collect())
}

struct Placement {
    /// Multiplicity of each point in `φ(D) ∪ ⋃_g g^{±1} φ(D)`.
    blocked: HashMap<Element, usize>,
    chosen: Vec<Element>,
    steps: usize,
    best: usize,
}

fn place(
    model: &GroupModel,
    shifts: &[Element],
    candidates: &[Vec<Element>],
    st: &mut Placement,
    cap: usize,
) -> Result<bool, PerturbError> {
    let i = st.chosen.len();
    if i == candidates.len() {
        return Ok(true);
    }
    for y in &candidates[i] {
        if st.steps >= cap {
            return Ok(false);
        }
        st.steps += 1;
        if st.blocked.get(y).is_some_and(|&c| c > 0) {
            continue;
        }
        let mut marks = vec![y.clone()];
        for g in shifts {
            marks.push(model.mul(g, y)?);
        }
        // y must also avoid g^{±1} y, which holds for g != e; the new
        // translates must avoid the points already chosen.
        if marks[1..].iter().any(|m| st.chosen.contains(m)) {
            continue;
        }
        for m in &marks {
            *st.blocked.entry(m.clone()).or_insert(0) += 1;
        }
        st.chosen.push(y.clone());
        st.best = st.best.max(st.chosen.len());
        if place(model, shifts, candidates, st, cap)? {
            return Ok(true);
        }
        st.chosen.pop();
        for m in &marks {
            *st.blocked.get_mut(m).expect("marked") -= 1;
        }
    }
    Ok(false)
}

/// Sets `D ⊆ F` and injections `φ_g: D → gF` with `|D| >= θ|F|`,
/// `F ∩ gF = ∅` and `φ_g(x) ∈ U x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicePackage {
    /// `E ∪ E^{-1} ∪ {e}`.
    pub generators: FiniteWindow,
    pub f: FiniteWindow,
    pub d: FiniteWindow,
    /// `φ_g` for every non-identity generator.
    pub phi: Vec<(Element, BTreeMap<Element, Element>)>,
    /// The Følner set before moving and its defect.
    pub base: FiniteWindow,
    pub base_theta: Rational,
}

impl NicePackage {
    /// Re-checks the three defining properties exhaustively; returns the
    /// failures found.
    pub fn check(&self, model: &GroupModel, theta: Rational, u: &Entourage) -> Result<Vec<String>, PerturbError> {
        let mut bad = Vec::new();
        if !self.d.iter().all(|x| self.f.contains(x)) {
            bad.push("D is not contained in F".to_string());
        }
        if Rational::from_integer(self.d.len() as i64) < theta * Rational::from_integer(self.f.len() as i64) {
            bad.push(format!("|D| = {} below θ|F|", self.d.len()));
        }
        for g in self.generators.iter().filter(|g| !model.is_identity(g)) {
            let gf = model.translate_window(g, &self.f)?;
            if !self.f.is_disjoint(&gf) {
                bad.push(format!("F meets {g}F"));
            }
            let Some((_, phi)) = self.phi.iter().find(|(h, _)| h == g) else {
                bad.push(format!("no injection for {g}"));
                continue;
            };
            let keys: Vec<&Element> = phi.keys().collect();
            if keys != self.d.iter().collect::<Vec<_>>() {
                bad.push(format!("domain of φ_{g} is not D"));
            }
            let mut images: Vec<&Element> = phi.values().collect();
            images.sort();
            images.dedup();
            if images.len() != phi.len() {
                bad.push(format!("φ_{g} is not injective"));
            }
            for (x, y) in phi {
                if !gf.contains(y) {
                    bad.push(format!("φ_{g}({x}) = {y} lies outside {g}F"));
                }
                if !model.related(u, x, y)? {
                    bad.push(format!("φ_{g}({x}) = {y} is not U-close"));
                }
            }
        }
        Ok(bad)
    }
}

/// Builds a package by searching for a Følner set at the boosted level
/// `1 - (1-θ)/|E|` for the entourage of radius `r/3`, moving it apart with
/// [`moving_injection`], and transporting the matchings along the move.
pub fn nice_folner_package(
    model: &GroupModel,
    theta: Rational,
    e: &FiniteWindow,
    u: &Entourage,
    budget: usize,
) -> Result<NicePackage, PerturbError> {
    let mut gens: Vec<Element> = model.symmetric_closure(e)?.into_vec();
    gens.push(model.identity());
    let gens = FiniteWindow::new(gens);
    if gens.len() == 1 {
        let f = FiniteWindow::new([model.identity()]);
        return Ok(NicePackage {
            generators: gens,
            f: f.clone(),
            d: f.clone(),
            phi: Vec::new(),
            base: f,
            base_theta: Rational::from_integer(1),
        });
    }
    if !model.kind().is_continuous() {
        return Err(PerturbError::Precondition(format!(
            "nice packages need a non-discrete group, got {}",
            model.id()
        )));
    }
    let one = Rational::from_integer(1);
    let boosted = one - (one - theta) / Rational::from_integer(gens.len() as i64);
    let v = Entourage::new(u.radius / Rational::from_integer(3));
    let opts = SearchOptions {
        theta: boosted,
        strategy: Strategy::Grid,
        budget,
        seed: None,
    };
    let outcome = folner_search(model, &gens, &v, &opts)?;
    let Some(cert) = outcome.best.filter(|_| outcome.found) else {
        return Err(PerturbError::BudgetExhausted {
            best: outcome
                .candidates
                .iter()
                .map(|c| c.theta)
                .max()
                .map_or_else(|| "none".into(), |t| format_rational(&t)),
            target: format_rational(&boosted),
        });
    };
    let base = cert.f.clone();
    let w = conjugated_entourage(model, &gens, &v)?;

    let grain = common_denominator(base.iter().chain(gens.iter()));
    let mut moved = None;
    let mut last_err = None;
    for m in 2..=MAX_REFINEMENT {
        let supply = grid_of(model, grain * m)?;
        match moving_injection(model, &base, &gens, &w, &supply) {
            Ok(phi) => {
                moved = Some(phi);
                break;
            }
            Err(err @ PerturbError::SupplyExhausted { .. }) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    let alpha = moved.ok_or_else(|| last_err.expect("at least one refinement tried"))?;
    let alpha_inv: BTreeMap<&Element, &Element> = alpha.iter().map(|(x, y)| (y, x)).collect();

    let f = FiniteWindow::new(alpha.values().cloned());
    let mut d: Vec<Element> = f.as_slice().to_vec();
    let mut psis = Vec::new();
    for g in &gens {
        let gbase = model.translate_window(g, &base)?;
        let inst = build_graph(model, &base, &gbase, &v)?;
        let m = max_matching(&inst.graph);
        let psi: BTreeMap<Element, Element> = m
            .pairing
            .iter()
            .map(|&[i, j]| (base.as_slice()[i].clone(), gbase.as_slice()[j].clone()))
            .collect();
        d.retain(|y| psi.contains_key(alpha_inv[y]));
        psis.push((g.clone(), psi));
    }
    let d = FiniteWindow::new(d);

    let mut phi = Vec::new();
    for (g, psi) in psis.into_iter().filter(|(g, _)| !model.is_identity(g)) {
        let g_inv = model.inv(&g)?;
        let mut map = BTreeMap::new();
        for x in &d {
            let back = model.mul(&g_inv, &psi[alpha_inv[x]])?;
            map.insert(x.clone(), model.mul(&g, &alpha[&back])?);
        }
        phi.push((g, map));
    }
    debug_assert!(cert.theta > Rational::zero() || d.is_empty());
    Ok(NicePackage {
        generators: gens,
        f,
        d,
        phi,
        base,
        base_theta: cert.theta,
    })
}
