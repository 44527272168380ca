//! Finitely supported weights on a group, convolution, the `R_a` transform
//! and bounded-Lipschitz seminorms.

mod approx;
mod seminorm;
pub mod simplex;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::group::{Element, FiniteWindow, GroupError, GroupModel};
use crate::rational::{self, Rational};

pub use approx::{approx_by_uniform, UniformApproximation, DEFAULT_N_MAX};
pub use seminorm::{
    invariance_defect, seminorm_pd, seminorm_pd_with, Bounds, InvarianceReport, InvarianceRow, SeminormSolution,
    MAX_SUPPORT,
};
pub use simplex::LpError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("support of {size} points exceeds the exact-solve limit of {limit}")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("function value missing at {0}")]
    MissingValue(String),
    #[error("weight is not stochastic")]
    NotStochastic,
    #[error("{0}")]
    InvalidInput(String),
    #[error("rational overflow converting the LP optimum")]
    Overflow,
    #[error("supply cannot furnish disjoint pieces: {0}")]
    SupplyTooCoarse(String),
}

/// A finitely supported vector `a ∈ ℝG`, stored sorted by element with no
/// zero weights.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteWeight {
    entries: Vec<(Element, Rational)>,
    norm1: Rational,
}

impl FiniteWeight {
    pub fn new<I: IntoIterator<Item = (Element, Rational)>>(items: I) -> Self {
        let mut map: BTreeMap<Element, Rational> = BTreeMap::new();
        for (x, w) in items {
            *map.entry(x).or_insert_with(Rational::zero) += w;
        }
        let entries: Vec<(Element, Rational)> = map.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        let norm1 = entries.iter().map(|(_, w)| w.abs()).sum();
        FiniteWeight { entries, norm1 }
    }

    pub fn zero() -> Self {
        FiniteWeight::default()
    }

    pub fn delta(x: Element) -> Self {
        FiniteWeight::new([(x, Rational::from_integer(1))])
    }

    /// `δ_F`: the uniform probability on `F`.
    pub fn uniform(f: &FiniteWindow) -> Self {
        assert!(!f.is_empty(), "uniform weight on an empty set");
        let w = Rational::new(1, f.len() as i64);
        FiniteWeight::new(f.iter().map(|x| (x.clone(), w)))
    }

    pub fn entries(&self) -> &[(Element, Rational)] {
        &self.entries
    }

    pub fn support(&self) -> FiniteWindow {
        FiniteWindow::new(self.entries.iter().map(|(x, _)| x.clone()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, x: &Element) -> Rational {
        self.entries
            .binary_search_by(|(y, _)| y.cmp(x))
            .map(|i| self.entries[i].1)
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn norm1(&self) -> Rational {
        self.norm1
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(_, w)| *w).sum()
    }

    pub fn is_stochastic(&self) -> bool {
        self.norm1 == Rational::from_integer(1) && self.entries.iter().all(|(_, w)| w.is_positive())
    }

    pub fn scale(&self, c: Rational) -> Self {
        FiniteWeight::new(self.entries.iter().map(|(x, w)| (x.clone(), w * c)))
    }

    pub fn add(&self, other: &FiniteWeight) -> Self {
        FiniteWeight::new(self.entries.iter().chain(other.entries.iter()).cloned())
    }

    pub fn sub(&self, other: &FiniteWeight) -> Self {
        self.add(&other.scale(Rational::from_integer(-1)))
    }

    /// `g a = δ_g * a`, supported on `g · supp(a)`.
    pub fn left_translate(&self, model: &GroupModel, g: &Element) -> Result<Self, GroupError> {
        let mut items = Vec::with_capacity(self.entries.len());
        for (x, w) in &self.entries {
            items.push((model.mul(g, x)?, *w));
        }
        Ok(FiniteWeight::new(items))
    }

    /// `a(f) = Σ a(x) f(x)`.
    pub fn pair<F: Fn(&Element) -> Option<Rational>>(&self, f: F) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        for (x, w) in &self.entries {
            let v = f(x).ok_or_else(|| AlgebraError::MissingValue(x.to_string()))?;
            total += w * v;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> WeightJson {
        WeightJson {
            support: self.entries.iter().map(|(x, _)| x.to_string()).collect(),
            weights: self.entries.iter().map(|(_, w)| *w).collect(),
        }
    }

    pub fn from_json(model: &GroupModel, json: &WeightJson) -> Result<Self, AlgebraError> {
        if json.support.len() != json.weights.len() {
            return Err(AlgebraError::InvalidInput(
                "support and weights differ in length".into(),
            ));
        }
        let mut items = Vec::new();
        for (s, w) in json.support.iter().zip(&json.weights) {
            items.push((model.parse_element(s)?, *w));
        }
        Ok(FiniteWeight::new(items))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub support: Vec<String>,
    #[serde(with = "rational::serde_str_vec")]
    pub weights: Vec<Rational>,
}

/// `ab = Σ a(g) b(h) δ_{gh}`.
pub fn convolve(model: &GroupModel, a: &FiniteWeight, b: &FiniteWeight) -> Result<FiniteWeight, GroupError> {
    let mut items = Vec::with_capacity(a.len() * b.len());
    for (g, wa) in &a.entries {
        for (h, wb) in &b.entries {
            items.push((model.mul(g, h)?, wa * wb));
        }
    }
    Ok(FiniteWeight::new(items))
}

/// `(R_a f)(x) = Σ_g a(g) f(x g)` for every `x` in `window`.
pub fn r_transform(
    model: &GroupModel,
    a: &FiniteWeight,
    f: &BTreeMap<Element, Rational>,
    window: &FiniteWindow,
) -> Result<BTreeMap<Element, Rational>, AlgebraError> {
    let mut out = BTreeMap::new();
    for x in window {
        let mut total = Rational::zero();
        for (g, w) in &a.entries {
            let xg = model.mul(x, g)?;
            let v = f.get(&xg).ok_or_else(|| AlgebraError::MissingValue(xg.to_string()))?;
            total += w * v;
        }
        out.insert(x.clone(), total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn weights_normalise() {
        let z = GroupModel::lattice(1);
        let x = z.parse_element("1").unwrap();
        let a = FiniteWeight::new([(x.clone(), r(1, 2)), (x.clone(), r(-1, 2))]);
        assert!(a.is_empty());
        let b = FiniteWeight::new([(x.clone(), r(1, 3)), (z.identity(), r(2, 3))]);
        assert!(b.is_stochastic());
        assert_eq!(b.weight(&x), r(1, 3));
        assert_eq!(b.sub(&b), FiniteWeight::zero());
    }

    #[test]
    fn convolution_examples() {
        let z = GroupModel::lattice(1);
        let p = |s: &str| z.parse_element(s).unwrap();
        let a = FiniteWeight::new([(p("0"), r(1, 2)), (p("1"), r(1, 2))]);
        let c = convolve(&z, &a, &FiniteWeight::delta(p("2"))).unwrap();
        assert_eq!(c, FiniteWeight::new([(p("2"), r(1, 2)), (p("3"), r(1, 2))]));

        let f2 = GroupModel::free(2);
        let q = |s: &str| f2.parse_element(s).unwrap();
        let s = FiniteWeight::new([(q("a"), r(1, 2)), (q("A"), r(1, 2))]);
        let ss = convolve(&f2, &s, &s).unwrap();
        assert_eq!(
            ss,
            FiniteWeight::new([(q("aa"), r(1, 4)), (q(""), r(1, 2)), (q("AA"), r(1, 4))])
        );
    }

    #[test]
    fn r_transform_examples() {
        let z = GroupModel::lattice(1);
        let p = |s: &str| z.parse_element(s).unwrap();
        let window = z.word_ball(2).unwrap();
        let f: BTreeMap<Element, Rational> = z
            .word_ball(3)
            .unwrap()
            .iter()
            .map(|x| (x.clone(), if *x == p("0") { r(1, 1) } else { r(0, 1) }))
            .collect();
        let ra = r_transform(&z, &FiniteWeight::delta(p("1")), &f, &window).unwrap();
        for (x, v) in &ra {
            assert_eq!(*v, if *x == p("-1") { r(1, 1) } else { r(0, 1) });
        }
        let id = r_transform(&z, &FiniteWeight::delta(z.identity()), &f, &window).unwrap();
        assert!(id.iter().all(|(x, v)| f[x] == *v));
        let missing = r_transform(&z, &FiniteWeight::delta(p("5")), &f, &window);
        assert!(matches!(missing, Err(AlgebraError::MissingValue(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = GroupModel::circle();
        let a = FiniteWeight::new([
            (c.parse_element("0").unwrap(), r(2, 3)),
            (c.parse_element("1/2").unwrap(), r(1, 3)),
        ]);
        let text = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(text, r#"{"support":["0","1/2"],"weights":["2/3","1/3"]}"#);
        let back: WeightJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FiniteWeight::from_json(&c, &back).unwrap(), a);
    }
}
