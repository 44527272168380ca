use std::collections::BTreeMap;

use num_traits::One;

use super::{common_denominator, grid_of, nice_folner_package, FolnerWindow, PerturbError, PerturbedAction};
use crate::group::{Element, Entourage, FiniteWindow, GroupModel};
use crate::rational::Rational;

/// Grids tried for the separating shifts, as multiples of the common grid.
const MAX_SHIFT_REFINEMENT: i64 = 8;

/// One index `(E, n)` of the family: a package with `|D| >= (1 - 1/n)|F|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSpec {
    pub e: FiniteWindow,
    pub n: u64,
}

/// A package after right translation by its shift `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedPackage {
    pub spec: IndexSpec,
    pub generators: FiniteWindow,
    pub shift: Element,
    pub f: FiniteWindow,
    pub d: FiniteWindow,
    pub phi: Vec<(Element, BTreeMap<Element, Element>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembly {
    pub action: PerturbedAction,
    pub packages: Vec<PlacedPackage>,
}

/// Places one package per index with the blocks `E_i F_i` pairwise
/// disjoint, then tabulates `α(g) = ψ(g) ∘ λ_g` on the common grid, where
/// `ψ(g)` swaps each `x ∈ D_i` with `φ_{i,g}(x)` and fixes everything else.
pub fn build_perturbation(
    model: &GroupModel,
    family: &[IndexSpec],
    u: &Entourage,
    budget: usize,
) -> Result<Assembly, PerturbError> {
    if !model.kind().is_continuous() {
        return Err(PerturbError::Precondition(format!(
            "perturbations are assembled on circle or torus, got {}",
            model.id()
        )));
    }
    let mut raw = Vec::with_capacity(family.len());
    for spec in family {
        if !spec.e.iter().any(|g| model.is_identity(g)) {
            return Err(PerturbError::Precondition("every index set must contain e".into()));
        }
        if spec.n == 0 {
            return Err(PerturbError::Precondition("index n must be positive".into()));
        }
        let theta = Rational::one() - Rational::new(1, spec.n as i64);
        raw.push(nice_folner_package(model, theta, &spec.e, u, budget)?);
    }

    let grain = common_denominator(raw.iter().flat_map(|p| p.f.iter().chain(p.generators.iter())));
    let mut placed = Vec::with_capacity(raw.len());
    let mut occupied = FiniteWindow::default();
    let mut denom = grain;
    for (spec, pkg) in family.iter().zip(raw) {
        let mut block = Vec::new();
        for g in &pkg.generators {
            block.extend(model.translate_window(g, &pkg.f)?.into_vec());
        }
        let block = FiniteWindow::new(block);
        let mut shift = None;
        'refine: for m in 1..=MAX_SHIFT_REFINEMENT {
            for z in &grid_of(model, grain * m)? {
                if model.right_translate_window(&block, z)?.is_disjoint(&occupied) {
                    shift = Some(z.clone());
                    denom = num_integer::lcm(denom, grain * m);
                    break 'refine;
                }
            }
        }
        let z = shift
            .ok_or_else(|| PerturbError::Separation(format!("no shift frees room for package {}", placed.len())))?;
        occupied = occupied.union(&model.right_translate_window(&block, &z)?);
        let mut phi = Vec::with_capacity(pkg.phi.len());
        for (g, map) in &pkg.phi {
            let mut moved = BTreeMap::new();
            for (x, y) in map {
                moved.insert(model.mul(x, &z)?, model.mul(y, &z)?);
            }
            phi.push((g.clone(), moved));
        }
        placed.push(PlacedPackage {
            spec: spec.clone(),
            generators: pkg.generators.clone(),
            f: model.right_translate_window(&pkg.f, &z)?,
            d: model.right_translate_window(&pkg.d, &z)?,
            shift: z,
            phi,
        });
    }

    let window = grid_of(model, denom)?;
    let pool = FiniteWindow::new(placed.iter().flat_map(|p| p.generators.iter().cloned()));
    let idx = |x: &Element| {
        window
            .index_of(x)
            .ok_or_else(|| PerturbError::Separation(format!("{x} falls outside the grid window")))
    };
    let mut rows = Vec::with_capacity(pool.len());
    for g in &pool {
        let mut psi: Vec<usize> = (0..window.len()).collect();
        for p in &placed {
            let Some((_, map)) = p.phi.iter().find(|(h, _)| h == g) else {
                continue;
            };
            for (x, y) in map {
                let (i, j) = (idx(x)?, idx(y)?);
                if psi[i] != i || psi[j] != j {
                    return Err(PerturbError::Separation(format!("swaps of {g} overlap at {x}")));
                }
                psi[i] = j;
                psi[j] = i;
            }
        }
        let mut row = Vec::with_capacity(window.len());
        for x in &window {
            row.push(psi[idx(&model.mul(g, x)?)?]);
        }
        rows.push(row);
    }
    let folner_windows = placed
        .iter()
        .map(|p| FolnerWindow {
            label: format!("E{{{}}},n={}", p.spec.e.to_strings().join(";"), p.spec.n),
            generators: p.generators.clone(),
            f: p.f.clone(),
            bound: Some(Rational::one() + Rational::new(p.generators.len() as i64, p.spec.n as i64)),
        })
        .collect();
    Ok(Assembly {
        action: PerturbedAction {
            window,
            pool,
            rows,
            radius: u.radius,
            folner_windows,
        },
        packages: placed,
    })
}
