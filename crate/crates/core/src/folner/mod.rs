//! Følner defects: discrete intersections, matching numbers `μ(F, gF, U)`,
//! pairwise variants, Rosenblatt ratios `|EF| / |F|`, and a budgeted search
//! for good sets.

mod search;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{seminorm_pd_with, AlgebraError, Bounds, FiniteWeight};
use crate::group::{Element, Entourage, FiniteWindow, GroupError, GroupKind, GroupModel, MetricRule};
use crate::matching::{build_graph, max_matching, Matcher, MatchingResult};
use crate::rational::{self, Rational};

pub use search::{folner_search, SearchOptions, SearchOutcome, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FolnerError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("candidate set F is empty")]
    EmptySet,
    #[error("action is undefined at ({g}, {x})")]
    ActionUndefined { g: String, x: String },
    #[error("strategy {strategy} does not apply to {model}")]
    StrategyUnsupported { strategy: String, model: String },
    #[error("{0}")]
    InvalidInput(String),
}

/// `min_{g ∈ E} |F ∩ gF| / |F|`.
pub fn discrete_defect(model: &GroupModel, f: &FiniteWindow, e: &FiniteWindow) -> Result<Rational, FolnerError> {
    if f.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let mut best = Rational::one();
    for g in e {
        let gf = model.translate_window(g, f)?;
        let common = f.intersection(&gf).len();
        best = best.min(Rational::new(common as i64, f.len() as i64));
    }
    Ok(best)
}

/// Matching data for one translate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslateMatching {
    pub g: Element,
    pub result: MatchingResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeRow {
    pub g: Element,
    pub p_d: Rational,
    pub p_unit: Rational,
}

/// Seminorm values `p_d(δ_F - g δ_F)` under the metric rescaled so that the
/// certificate's entourage is the closed ball of radius 1/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeCheck {
    pub metric: String,
    pub bound: Rational,
    pub rows: Vec<BridgeRow>,
}

impl BridgeCheck {
    pub fn max_p_d(&self) -> Rational {
        self.rows.iter().map(|r| r.p_d).max().unwrap_or_else(Rational::zero)
    }

    pub fn max_p_unit(&self) -> Rational {
        self.rows.iter().map(|r| r.p_unit).max().unwrap_or_else(Rational::zero)
    }

    pub fn full_holds(&self) -> bool {
        self.max_p_d() <= self.bound
    }

    pub fn unit_holds(&self) -> bool {
        self.max_p_unit() <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerCertificate {
    pub model: String,
    pub e: FiniteWindow,
    pub entourage: Entourage,
    pub f: FiniteWindow,
    pub theta: Rational,
    pub matchings: Vec<TranslateMatching>,
    pub bridge: Option<BridgeCheck>,
}

/// `min_{g ∈ E} μ(F, gF, U) / |F|` with the matchings kept.
pub fn topological_defect(
    model: &GroupModel,
    f: &FiniteWindow,
    e: &FiniteWindow,
    u: &Entourage,
) -> Result<FolnerCertificate, FolnerError> {
    topological_defect_with(model, f, e, u, max_matching)
}

pub fn topological_defect_with(
    model: &GroupModel,
    f: &FiniteWindow,
    e: &FiniteWindow,
    u: &Entourage,
    matcher: Matcher,
) -> Result<FolnerCertificate, FolnerError> {
    if f.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let matchings = e
        .as_slice()
        .par_iter()
        .map(|g| {
            let gf = model.translate_window(g, f)?;
            let inst = build_graph(model, f, &gf, u)?;
            Ok(TranslateMatching {
                g: g.clone(),
                result: matcher(&inst.graph),
            })
        })
        .collect::<Result<Vec<_>, GroupError>>()?;
    let theta = theta_of(&matchings, f.len());
    Ok(FolnerCertificate {
        model: model.id(),
        e: e.clone(),
        entourage: *u,
        f: f.clone(),
        theta,
        matchings,
        bridge: None,
    })
}

fn theta_of(matchings: &[TranslateMatching], size: usize) -> Rational {
    matchings
        .iter()
        .map(|m| Rational::new(m.result.mu as i64, size as i64))
        .min()
        .unwrap_or_else(Rational::one)
}

impl FolnerCertificate {
    /// Re-derives θ from the stored pairings, checking each one against
    /// `(F, gF, U)`.
    pub fn recheck(&self, model: &GroupModel) -> Result<bool, FolnerError> {
        if self.f.is_empty() {
            return Ok(false);
        }
        for m in &self.matchings {
            let gf = model.translate_window(&m.g, &self.f)?;
            let inst = build_graph(model, &self.f, &gf, &self.entourage)?;
            if !m.result.is_valid_for(&inst.graph) {
                return Ok(false);
            }
            // A stored μ must also be maximum: the witness certifies it.
            if m.result.witness.len() - inst.graph.neighbourhood(&m.result.witness).len() != self.f.len() - m.result.mu
            {
                return Ok(false);
            }
        }
        let listed: BTreeSet<&Element> = self.matchings.iter().map(|m| &m.g).collect();
        if listed.len() != self.e.len() || !self.e.iter().all(|g| listed.contains(g)) {
            return Ok(false);
        }
        Ok(theta_of(&self.matchings, self.f.len()) == self.theta)
    }

    /// Computes `p_d(δ_F - g δ_F)` for every `g ∈ E`, both over `[-1, 1]`
    /// and over `[0, 1]` test functions, and compares with `1 - θ/2`.
    pub fn bridge_check(&self, model: &GroupModel) -> Result<BridgeCheck, FolnerError> {
        let scaled = bridge_metric(model, &self.entourage)?;
        let delta_f = FiniteWeight::uniform(&self.f);
        let rows = self
            .e
            .as_slice()
            .par_iter()
            .map(|g| {
                let diff = delta_f.sub(&delta_f.left_translate(&scaled, g)?);
                let full = seminorm_pd_with(&scaled, &diff, Bounds::Symmetric)?;
                let unit = seminorm_pd_with(&scaled, &diff, Bounds::Unit)?;
                Ok(BridgeRow {
                    g: g.clone(),
                    p_d: full.value,
                    p_unit: unit.value,
                })
            })
            .collect::<Result<Vec<_>, FolnerError>>()?;
        Ok(BridgeCheck {
            metric: scaled.id(),
            bound: Rational::one() - self.theta / Rational::from_integer(2),
            rows,
        })
    }

    pub fn with_bridge(mut self, model: &GroupModel) -> Result<Self, FolnerError> {
        self.bridge = Some(self.bridge_check(model)?);
        Ok(self)
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            model: self.model.clone(),
            e: self.e.to_strings(),
            radius: self.entourage.radius,
            f: self.f.to_strings(),
            theta: self.theta,
            matchings: self
                .matchings
                .iter()
                .map(|m| MatchingJson {
                    g: m.g.to_string(),
                    mu: m.result.mu,
                    pairing: m.result.pairing.clone(),
                    witness: m.result.witness.clone(),
                })
                .collect(),
            seminorm: self.bridge.as_ref().map(|b| BridgeJson {
                metric: b.metric.clone(),
                bound: b.bound,
                rows: b
                    .rows
                    .iter()
                    .map(|r| BridgeRowJson {
                        g: r.g.to_string(),
                        p_d: r.p_d,
                        p_unit: r.p_unit,
                    })
                    .collect(),
            }),
        }
    }

    pub fn from_json(model: &GroupModel, json: &CertificateJson) -> Result<Self, FolnerError> {
        let e = model.parse_window(&json.e)?;
        let f = model.parse_window(&json.f)?;
        let matchings = json
            .matchings
            .iter()
            .map(|m| {
                Ok(TranslateMatching {
                    g: model.parse_element(&m.g)?,
                    result: MatchingResult {
                        mu: m.mu,
                        pairing: m.pairing.clone(),
                        witness: m.witness.clone(),
                        perfect: m.mu == f.len(),
                    },
                })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        Ok(FolnerCertificate {
            model: json.model.clone(),
            e,
            entourage: Entourage::new(json.radius),
            f,
            theta: json.theta,
            matchings,
            bridge: None,
        })
    }
}

/// The metric `d'` with `{d' <= 1/2} = U`: the model metric scaled by
/// `1/(2r)` for `r > 0`. For `r = 0` the unscaled word metric is used on
/// discrete groups (integer distances) and the discrete metric otherwise.
pub fn bridge_metric(model: &GroupModel, u: &Entourage) -> Result<GroupModel, GroupError> {
    if u.radius > Rational::zero() {
        return Ok(model.scaled(Rational::one() / (u.radius * Rational::from_integer(2))));
    }
    let spec = model.metric();
    if spec.rule == MetricRule::Word || spec.rule == MetricRule::Discrete {
        model.clone().with_metric(spec.rule, Rational::one())
    } else {
        model.clone().with_metric(MetricRule::Discrete, Rational::one())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingJson {
    pub g: String,
    pub mu: usize,
    pub pairing: Vec<[usize; 2]>,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeRowJson {
    pub g: String,
    #[serde(with = "rational::serde_str")]
    pub p_d: Rational,
    #[serde(with = "rational::serde_str")]
    pub p_unit: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeJson {
    pub metric: String,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub rows: Vec<BridgeRowJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub model: String,
    #[serde(rename = "E")]
    pub e: Vec<String>,
    #[serde(with = "rational::serde_str")]
    pub radius: Rational,
    #[serde(rename = "F")]
    pub f: Vec<String>,
    #[serde(with = "rational::serde_str")]
    pub theta: Rational,
    pub matchings: Vec<MatchingJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<BridgeJson>,
}

/// `min` over ordered pairs `g, h ∈ E` of `μ(gF, hF, U) / |F|`.
pub fn pairwise_defect(
    model: &GroupModel,
    f: &FiniteWindow,
    e: &FiniteWindow,
    u: &Entourage,
) -> Result<Rational, FolnerError> {
    if f.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let translates = e
        .iter()
        .map(|g| model.translate_window(g, f))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..translates.len())
        .flat_map(|i| (0..translates.len()).map(move |j| (i, j)))
        .collect();
    let mus = pairs
        .par_iter()
        .map(|&(i, j)| {
            let inst = build_graph(model, &translates[i], &translates[j], u)?;
            Ok(max_matching(&inst.graph).mu)
        })
        .collect::<Result<Vec<_>, GroupError>>()?;
    Ok(mus
        .into_iter()
        .map(|mu| Rational::new(mu as i64, f.len() as i64))
        .min()
        .unwrap_or_else(Rational::one))
}

/// A ball `V` with `V ⊆ g^{-1} U g` for every `g ∈ E`.
///
/// Bi-invariant metrics give `U` back. For word metrics on non-abelian
/// groups `|g^{-1} u g| <= |u| + 2|g|`, so shrinking the radius by twice the
/// largest norm in `E` is safe.
pub fn conjugated_entourage(model: &GroupModel, e: &FiniteWindow, u: &Entourage) -> Result<Entourage, GroupError> {
    let bi_invariant = model.kind().is_abelian() || model.metric().rule == MetricRule::Discrete;
    if bi_invariant {
        return Ok(*u);
    }
    let mut longest = Rational::zero();
    for g in e {
        longest = longest.max(model.norm(g)?);
    }
    let r = u.radius - longest * Rational::from_integer(2);
    Ok(Entourage::new(r.max(Rational::zero())))
}

/// Something `G` acts on, possibly partially.
pub trait GroupAction: Sync {
    fn act(&self, g: &Element, x: &Element) -> Option<Element>;
}

/// `G` acting on itself by left multiplication.
pub struct LeftTranslation<'a>(pub &'a GroupModel);

impl GroupAction for LeftTranslation<'_> {
    fn act(&self, g: &Element, x: &Element) -> Option<Element> {
        self.0.mul(g, x).ok()
    }
}

/// `|EF| / |F|` for `EF = {g x : g ∈ E, x ∈ F}`.
pub fn action_defect(f: &FiniteWindow, e: &FiniteWindow, action: &dyn GroupAction) -> Result<Rational, FolnerError> {
    if f.is_empty() {
        return Err(FolnerError::EmptySet);
    }
    let mut image = BTreeSet::new();
    for g in e {
        for x in f {
            let y = action.act(g, x).ok_or_else(|| FolnerError::ActionUndefined {
                g: g.to_string(),
                x: x.to_string(),
            })?;
            image.insert(y);
        }
    }
    Ok(Rational::new(image.len() as i64, f.len() as i64))
}

/// `[0, n)^d` in a lattice.
pub fn lattice_box(model: &GroupModel, n: i64) -> Result<FiniteWindow, FolnerError> {
    let GroupKind::Lattice { dim } = model.kind() else {
        return Err(FolnerError::StrategyUnsupported {
            strategy: "boxes".into(),
            model: model.id(),
        });
    };
    let size = (n.max(0) as usize).checked_pow(dim as u32).unwrap_or(usize::MAX);
    if size > model.window_cap() {
        return Err(GroupError::WindowTooLarge {
            size,
            cap: model.window_cap(),
        }
        .into());
    }
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    Ok(FiniteWindow::new(out.into_iter().map(Element::Lattice)))
}
