//! Perturbed translation actions on finite windows: tables `α(g)` of
//! permutations with `d(α(g)(h), g h) <= r`, their constructions and
//! verification.

mod assembly;
mod moving;
mod precompact;
mod wobbling;

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::folner::FolnerError;
use crate::group::{Element, Entourage, FiniteWindow, GroupError, GroupModel};
use crate::rational::{self, Rational};

pub use assembly::{build_perturbation, Assembly, IndexSpec, PlacedPackage};
pub use moving::{moving_injection, moving_injection_with_cap, nice_folner_package, NicePackage, DEFAULT_STEP_CAP};
pub use precompact::{
    group_closure_order, is_maximal_separated, precompact_perturbation, precompact_perturbation_with, PrecompactResult,
    DEFAULT_ORDER_CAP,
};
pub use wobbling::{decompose_wobbling, WobblingElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerturbError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("supply exhausted after placing {placed} of {total} points")]
    SupplyExhausted { placed: usize, total: usize },
    #[error("search budget exhausted: best defect {best} below target {target}")]
    BudgetExhausted { best: String, target: String },
    #[error("cannot separate packages: {0}")]
    Separation(String),
    #[error("window is empty")]
    EmptyWindow,
    #[error("{witness} is not moved by any translator in the pool")]
    NotWobbling { witness: String },
    #[error("not a permutation: {0}")]
    NotPermutation(String),
}

/// A Følner window kept with an action so that `|α(E) F| / |F|` can be
/// reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerWindow {
    pub label: String,
    pub generators: FiniteWindow,
    pub f: FiniteWindow,
    pub bound: Option<Rational>,
}

/// Finite table of `α(g)` for `g` in `pool`, each a permutation of
/// `window` given by image indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbedAction {
    pub window: FiniteWindow,
    pub pool: FiniteWindow,
    pub rows: Vec<Vec<usize>>,
    pub radius: Rational,
    pub folner_windows: Vec<FolnerWindow>,
}

impl PerturbedAction {
    /// Plain left translation, defined when the window is `pool`-invariant.
    pub fn translations(model: &GroupModel, window: &FiniteWindow, pool: &FiniteWindow) -> Result<Self, PerturbError> {
        let rows = pool
            .iter()
            .map(|g| {
                window
                    .iter()
                    .map(|x| {
                        let y = model.mul(g, x)?;
                        window
                            .index_of(&y)
                            .ok_or_else(|| PerturbError::Precondition(format!("{g} moves {x} outside the window")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PerturbedAction {
            window: window.clone(),
            pool: pool.clone(),
            rows,
            radius: Rational::zero(),
            folner_windows: Vec::new(),
        })
    }

    pub fn row(&self, g: &Element) -> Option<&[usize]> {
        self.pool.index_of(g).map(|i| self.rows[i].as_slice())
    }

    pub fn apply(&self, g: &Element, x: &Element) -> Option<&Element> {
        let j = self.window.index_of(x)?;
        self.row(g).map(|row| &self.window.as_slice()[row[j]])
    }

    /// `ψ(g) = α(g) ∘ λ_g^{-1}` squares to the identity, or `None` when
    /// `g^{-1}` moves the window outside itself.
    pub fn involution_flags(&self, model: &GroupModel) -> Result<Vec<Option<bool>>, GroupError> {
        let mut out = Vec::with_capacity(self.pool.len());
        for (g, row) in self.pool.iter().zip(&self.rows) {
            let g_inv = model.inv(g)?;
            let mut psi = Vec::with_capacity(self.window.len());
            for y in &self.window {
                match self.window.index_of(&model.mul(&g_inv, y)?) {
                    Some(j) => psi.push(row[j]),
                    None => break,
                }
            }
            if psi.len() < self.window.len() || psi.iter().any(|&j| j >= psi.len()) {
                out.push(None);
            } else {
                out.push(Some((0..psi.len()).all(|i| psi[psi[i]] == i)));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> ActionJson {
        ActionJson {
            window: self.window.to_strings(),
            pool: self.pool.to_strings(),
            rows: self
                .pool
                .iter()
                .zip(&self.rows)
                .map(|(g, row)| (g.to_string(), row.clone()))
                .collect(),
            radius: self.radius,
            folner_windows: self
                .folner_windows
                .iter()
                .map(|w| FolnerWindowJson {
                    label: w.label.clone(),
                    generators: w.generators.to_strings(),
                    f: w.f.to_strings(),
                    bound: w.bound,
                })
                .collect(),
        }
    }

    pub fn from_json(model: &GroupModel, json: &ActionJson) -> Result<Self, PerturbError> {
        let window = model.parse_window(&json.window)?;
        let pool = model.parse_window(&json.pool)?;
        if window.len() != json.window.len() || pool.len() != json.pool.len() {
            return Err(PerturbError::NotPermutation(
                "window or pool lists repeat an element".into(),
            ));
        }
        let mut rows = Vec::with_capacity(pool.len());
        for g in &pool {
            let key = g.to_string();
            let row = json
                .rows
                .get(&key)
                .ok_or_else(|| PerturbError::NotPermutation(format!("no row for {key}")))?;
            rows.push(row.clone());
        }
        if json.rows.len() != pool.len() {
            return Err(PerturbError::NotPermutation(
                "rows name elements outside the pool".into(),
            ));
        }
        let folner_windows = json
            .folner_windows
            .iter()
            .map(|w| {
                Ok(FolnerWindow {
                    label: w.label.clone(),
                    generators: model.parse_window(&w.generators)?,
                    f: model.parse_window(&w.f)?,
                    bound: w.bound,
                })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        Ok(PerturbedAction {
            window,
            pool,
            rows,
            radius: json.radius,
            folner_windows,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerWindowJson {
    pub label: String,
    pub generators: Vec<String>,
    #[serde(rename = "F")]
    pub f: Vec<String>,
    #[serde(default, with = "rational::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub bound: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionJson {
    pub window: Vec<String>,
    pub pool: Vec<String>,
    pub rows: BTreeMap<String, Vec<usize>>,
    #[serde(with = "rational::serde_str")]
    pub radius: Rational,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folner_windows: Vec<FolnerWindowJson>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub g: Element,
    pub x: Element,
    pub image: Element,
    pub distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosenblattRow {
    pub label: String,
    pub size: usize,
    pub ratio: Rational,
    pub bound: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationReport {
    pub radius: Rational,
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Rows that are not permutations of the window.
    pub malformed: Vec<String>,
    pub rosenblatt: Vec<RosenblattRow>,
}

impl PerturbationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.malformed.is_empty()
    }

    pub fn max_distance(&self) -> Option<Rational> {
        self.violations.iter().map(|v| v.distance).max()
    }
}

/// Checks `d(α(g)(h), g h) <= r` on every table entry and reports
/// `|α(E) F| / |F|` for the stored Følner windows.
pub fn verify_perturbation(
    model: &GroupModel,
    action: &PerturbedAction,
    u: &Entourage,
) -> Result<PerturbationReport, PerturbError> {
    let n = action.window.len();
    let mut malformed = Vec::new();
    if action.rows.len() != action.pool.len() {
        malformed.push(format!(
            "{} rows for a pool of {}",
            action.rows.len(),
            action.pool.len()
        ));
    }
    for (g, row) in action.pool.iter().zip(&action.rows) {
        let distinct: BTreeSet<usize> = row.iter().copied().collect();
        if row.len() != n || distinct.len() != n || row.iter().any(|&j| j >= n) {
            malformed.push(format!("row of {g}"));
        }
    }
    let per_row = action
        .pool
        .as_slice()
        .par_iter()
        .zip(&action.rows)
        .map(|(g, row)| {
            let mut found = Vec::new();
            for (x, &j) in action.window.iter().zip(row) {
                if j >= n {
                    continue;
                }
                let image = &action.window.as_slice()[j];
                let d = model.distance(image, &model.mul(g, x)?)?;
                if d > u.radius {
                    found.push(Violation {
                        g: g.clone(),
                        x: x.clone(),
                        image: image.clone(),
                        distance: d,
                    });
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>, GroupError>>()?;
    let mut rosenblatt = Vec::new();
    for w in &action.folner_windows {
        if !malformed.is_empty() {
            break;
        }
        let mut image = BTreeSet::new();
        for g in &w.generators {
            let row =
                if model.is_identity(g) && action.pool.index_of(g).is_none() {
                    None
                } else {
                    Some(action.row(g).ok_or_else(|| {
                        PerturbError::Precondition(format!("generator {g} of {} has no row", w.label))
                    })?)
                };
            for x in &w.f {
                let j = action
                    .window
                    .index_of(x)
                    .ok_or_else(|| PerturbError::Precondition(format!("{x} of {} lies outside the window", w.label)))?;
                image.insert(row.map_or(j, |r| r[j]));
            }
        }
        rosenblatt.push(RosenblattRow {
            label: w.label.clone(),
            size: w.f.len(),
            ratio: Rational::new(image.len() as i64, w.f.len().max(1) as i64),
            bound: w.bound,
        });
    }
    Ok(PerturbationReport {
        radius: u.radius,
        checked: n * action.pool.len(),
        violations: per_row.into_iter().flatten().collect(),
        malformed,
        rosenblatt,
    })
}

/// Common denominator of the coordinates of a circle or torus element.
pub(crate) fn denominator(x: &Element) -> i64 {
    match x {
        Element::Circle(r) => *r.denom(),
        Element::Torus(v) => v.iter().fold(1, |acc, r| acc.lcm(r.denom())),
        _ => 1,
    }
}

pub(crate) fn common_denominator<'a, I: IntoIterator<Item = &'a Element>>(items: I) -> i64 {
    items.into_iter().fold(1, |acc, x| acc.lcm(&denominator(x)))
}

pub(crate) fn grid_of(model: &GroupModel, denom: i64) -> Result<FiniteWindow, PerturbError> {
    let res = u32::try_from(denom).map_err(|_| PerturbError::Separation(format!("grid 1/{denom} too fine")))?;
    Ok(model.grid_sample(res, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn exact_translations_pass() {
        let c = GroupModel::circle();
        let w = c.grid_sample(12, None).unwrap();
        let pool = c.parse_window(&["0", "1/4", "1/3"]).unwrap();
        let a = PerturbedAction::translations(&c, &w, &pool).unwrap();
        let rep = verify_perturbation(&c, &a, &Entourage::identity_only()).unwrap();
        assert!(rep.is_clean());
        assert_eq!(rep.checked, 36);
    }

    #[test]
    fn corrupted_entry_is_flagged() {
        let c = GroupModel::circle();
        let w = c.grid_sample(12, None).unwrap();
        let pool = c.parse_window(&["1/4"]).unwrap();
        let mut a = PerturbedAction::translations(&c, &w, &pool).unwrap();
        a.rows[0][0] = 9;
        let rep = verify_perturbation(&c, &a, &Entourage::new(r(1, 10))).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].distance, r(1, 2));
        assert_eq!(rep.malformed.len(), 1);
        assert!(!rep.is_clean());
    }

    #[test]
    fn json_round_trip() {
        let c = GroupModel::circle();
        let w = c.grid_sample(4, None).unwrap();
        let pool = c.parse_window(&["1/2"]).unwrap();
        let a = PerturbedAction::translations(&c, &w, &pool).unwrap();
        let text = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"window":["0","1/4","1/2","3/4"],"pool":["1/2"],"rows":{"1/2":[2,3,0,1]},"radius":"0"}"#
        );
        let back = PerturbedAction::from_json(&c, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.involution_flags(&c).unwrap(), vec![Some(true)]);
    }
}
