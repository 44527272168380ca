//! Built-in groups with exact arithmetic and right-invariant metrics.

mod descriptor;
mod element;
pub(crate) mod heisenberg;
mod window;

use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

pub use descriptor::{MetricDescriptor, ModelDescriptor, ModelParams};
pub use element::Element;
pub(crate) use element::{invert_word, letter_code, push_reduced};
pub use window::FiniteWindow;

use crate::rational::{frac_part, parse_rational, Rational};
use heisenberg::BallCache;

pub const DEFAULT_WINDOW_CAP: usize = 100_000;
const HEISENBERG_CACHE_LIMIT: usize = 2_000_000;
const HEISENBERG_MAX_RADIUS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("element {element} does not belong to the {expected} model")]
    ModelMismatch { expected: String, element: String },
    #[error("cannot parse {input:?} as a {kind} element: {reason}")]
    Parse {
        kind: &'static str,
        input: String,
        reason: String,
    },
    #[error("window of {size} elements exceeds the cap of {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("metric rule {rule:?} is not available on {kind}")]
    MetricUnsupported { kind: &'static str, rule: MetricRule },
    #[error("word length of {element} lies beyond the explored radius {radius}")]
    BeyondHorizon { element: String, radius: u32 },
    #[error("invalid model descriptor: {0}")]
    Descriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Lattice { dim: usize },
    Free { rank: usize },
    Heisenberg,
    Circle,
    Torus { dim: usize },
    Cyclic { modulus: u64 },
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Lattice { .. } => "lattice",
            GroupKind::Free { .. } => "free",
            GroupKind::Heisenberg => "heisenberg",
            GroupKind::Circle => "circle",
            GroupKind::Torus { .. } => "torus",
            GroupKind::Cyclic { .. } => "cyclic",
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupKind::Free { rank } => *rank <= 1,
            GroupKind::Heisenberg => false,
            _ => true,
        }
    }

    /// Circle and torus: every neighbourhood of the identity is infinite.
    pub fn is_continuous(&self) -> bool {
        matches!(self, GroupKind::Circle | GroupKind::Torus { .. })
    }

    pub fn is_precompact(&self) -> bool {
        matches!(
            self,
            GroupKind::Circle | GroupKind::Torus { .. } | GroupKind::Cyclic { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricRule {
    /// Word length over the standard generators.
    Word,
    /// Distance to the nearest integer, max over coordinates.
    Arc,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSpec {
    pub rule: MetricRule,
    pub scale: Rational,
}

/// Closed ball `{g : d(g, e) <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entourage {
    pub radius: Rational,
}

impl Entourage {
    pub fn new(radius: Rational) -> Self {
        assert!(radius >= Rational::zero(), "entourage radius must be >= 0");
        Entourage { radius }
    }

    pub fn identity_only() -> Self {
        Entourage::new(Rational::zero())
    }

    pub fn contains_norm(&self, norm: Rational) -> bool {
        norm <= self.radius
    }
}

#[derive(Debug, Clone)]
pub struct GroupModel {
    kind: GroupKind,
    generators: Vec<Element>,
    metric: MetricSpec,
    window_cap: usize,
    heis_cache: Option<Arc<RwLock<BallCache>>>,
}

impl GroupModel {
    fn from_kind(kind: GroupKind) -> Self {
        let rule = if kind.is_continuous() {
            MetricRule::Arc
        } else {
            MetricRule::Word
        };
        let mut model = GroupModel {
            kind,
            generators: Vec::new(),
            metric: MetricSpec {
                rule,
                scale: Rational::one(),
            },
            window_cap: DEFAULT_WINDOW_CAP,
            heis_cache: matches!(kind, GroupKind::Heisenberg)
                .then(|| Arc::new(RwLock::new(BallCache::new(HEISENBERG_CACHE_LIMIT)))),
        };
        model.generators = model.standard_generators();
        model
    }

    pub fn lattice(dim: usize) -> Self {
        assert!(dim >= 1, "lattice dimension must be positive");
        Self::from_kind(GroupKind::Lattice { dim })
    }

    pub fn free(rank: usize) -> Self {
        assert!((1..=26).contains(&rank), "free rank must be in 1..=26");
        Self::from_kind(GroupKind::Free { rank })
    }

    pub fn heisenberg() -> Self {
        Self::from_kind(GroupKind::Heisenberg)
    }

    pub fn circle() -> Self {
        Self::from_kind(GroupKind::Circle)
    }

    pub fn torus(dim: usize) -> Self {
        assert!(dim >= 1, "torus dimension must be positive");
        Self::from_kind(GroupKind::Torus { dim })
    }

    pub fn cyclic(modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Self::from_kind(GroupKind::Cyclic { modulus })
    }

    pub fn with_metric(mut self, rule: MetricRule, scale: Rational) -> Result<Self, GroupError> {
        let ok = match rule {
            MetricRule::Discrete => true,
            MetricRule::Word => !self.kind.is_continuous(),
            MetricRule::Arc => self.kind.is_continuous() || matches!(self.kind, GroupKind::Cyclic { .. }),
        };
        if !ok {
            return Err(GroupError::MetricUnsupported {
                kind: self.kind.name(),
                rule,
            });
        }
        if scale <= Rational::zero() {
            return Err(GroupError::Descriptor("metric scale must be positive".into()));
        }
        self.metric = MetricSpec { rule, scale };
        Ok(self)
    }

    /// Same group and rule, metric multiplied by `factor`.
    pub fn scaled(&self, factor: Rational) -> Self {
        let mut out = self.clone();
        out.metric.scale *= factor;
        out
    }

    pub fn with_generators(mut self, generators: Vec<Element>) -> Result<Self, GroupError> {
        for g in &generators {
            self.check(g)?;
        }
        self.generators = generators;
        Ok(self)
    }

    pub fn with_window_cap(mut self, cap: usize) -> Self {
        self.window_cap = cap;
        self
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn metric(&self) -> MetricSpec {
        self.metric
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn window_cap(&self) -> usize {
        self.window_cap
    }

    /// Short identifier such as `free(rank=2)/word`.
    pub fn id(&self) -> String {
        let params = match self.kind {
            GroupKind::Lattice { dim } | GroupKind::Torus { dim } => format!("(dim={dim})"),
            GroupKind::Free { rank } => format!("(rank={rank})"),
            GroupKind::Cyclic { modulus } => format!("(modulus={modulus})"),
            GroupKind::Heisenberg | GroupKind::Circle => String::new(),
        };
        let rule = match self.metric.rule {
            MetricRule::Word => "word",
            MetricRule::Arc => "arc",
            MetricRule::Discrete => "discrete",
        };
        let scale = if self.metric.scale.is_one() {
            String::new()
        } else {
            format!("*{}", crate::rational::format_rational(&self.metric.scale))
        };
        format!("{}{}/{}{}", self.kind.name(), params, rule, scale)
    }

    pub fn standard_generators(&self) -> Vec<Element> {
        match self.kind {
            GroupKind::Lattice { dim } => (0..dim)
                .map(|i| {
                    let mut v = vec![0; dim];
                    v[i] = 1;
                    Element::Lattice(v)
                })
                .collect(),
            GroupKind::Free { rank } => (0..rank).map(|i| Element::Free(vec![2 * i as u8])).collect(),
            GroupKind::Heisenberg => vec![Element::Heisenberg([1, 0, 0]), Element::Heisenberg([0, 1, 0])],
            GroupKind::Cyclic { modulus } => vec![Element::Cyclic(1 % modulus)],
            GroupKind::Circle | GroupKind::Torus { .. } => Vec::new(),
        }
    }

    pub fn identity(&self) -> Element {
        match self.kind {
            GroupKind::Lattice { dim } => Element::Lattice(vec![0; dim]),
            GroupKind::Free { .. } => Element::Free(Vec::new()),
            GroupKind::Heisenberg => Element::Heisenberg([0, 0, 0]),
            GroupKind::Circle => Element::Circle(Rational::zero()),
            GroupKind::Torus { dim } => Element::Torus(vec![Rational::zero(); dim]),
            GroupKind::Cyclic { .. } => Element::Cyclic(0),
        }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        *g == self.identity()
    }

    fn mismatch(&self, g: &Element) -> GroupError {
        GroupError::ModelMismatch {
            expected: self.id(),
            element: format!("{}:{}", g.kind_name(), g),
        }
    }

    /// Checks that `g` is a canonical element of this model.
    pub fn check(&self, g: &Element) -> Result<(), GroupError> {
        let ok = match (self.kind, g) {
            (GroupKind::Lattice { dim }, Element::Lattice(v)) => v.len() == dim,
            (GroupKind::Free { rank }, Element::Free(w)) => {
                w.iter().all(|&c| (c as usize) < 2 * rank) && w.windows(2).all(|p| p[0] != p[1] ^ 1)
            }
            (GroupKind::Heisenberg, Element::Heisenberg(_)) => true,
            (GroupKind::Circle, Element::Circle(r)) => in_unit(r),
            (GroupKind::Torus { dim }, Element::Torus(v)) => v.len() == dim && v.iter().all(in_unit),
            (GroupKind::Cyclic { modulus }, Element::Cyclic(k)) => *k < modulus,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(g))
        }
    }

    fn same_shape(&self, g: &Element) -> Result<(), GroupError> {
        let ok = match (self.kind, g) {
            (GroupKind::Lattice { dim }, Element::Lattice(v)) => v.len() == dim,
            (GroupKind::Free { .. }, Element::Free(_)) => true,
            (GroupKind::Heisenberg, Element::Heisenberg(_)) => true,
            (GroupKind::Circle, Element::Circle(_)) => true,
            (GroupKind::Torus { dim }, Element::Torus(v)) => v.len() == dim,
            (GroupKind::Cyclic { .. }, Element::Cyclic(_)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(g))
        }
    }

    pub fn mul(&self, g: &Element, h: &Element) -> Result<Element, GroupError> {
        self.same_shape(g)?;
        self.same_shape(h)?;
        Ok(match (g, h) {
            (Element::Lattice(x), Element::Lattice(y)) => {
                Element::Lattice(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (Element::Free(x), Element::Free(y)) => {
                let mut w = x.clone();
                for &c in y {
                    push_reduced(&mut w, c);
                }
                Element::Free(w)
            }
            (Element::Heisenberg(x), Element::Heisenberg(y)) => Element::Heisenberg(heisenberg::mul(x, y)),
            (Element::Circle(x), Element::Circle(y)) => Element::Circle(frac_part(x + y)),
            (Element::Torus(x), Element::Torus(y)) => {
                Element::Torus(x.iter().zip(y).map(|(a, b)| frac_part(a + b)).collect())
            }
            (Element::Cyclic(x), Element::Cyclic(y)) => {
                let GroupKind::Cyclic { modulus } = self.kind else {
                    unreachable!()
                };
                Element::Cyclic(((*x as u128 + *y as u128) % modulus as u128) as u64)
            }
            _ => unreachable!("shapes checked above"),
        })
    }

    pub fn inv(&self, g: &Element) -> Result<Element, GroupError> {
        self.same_shape(g)?;
        Ok(match g {
            Element::Lattice(x) => Element::Lattice(x.iter().map(|a| -a).collect()),
            Element::Free(w) => Element::Free(invert_word(w)),
            Element::Heisenberg(x) => Element::Heisenberg(heisenberg::inv(x)),
            Element::Circle(x) => Element::Circle(frac_part(-x)),
            Element::Torus(x) => Element::Torus(x.iter().map(|a| frac_part(-a)).collect()),
            Element::Cyclic(x) => {
                let GroupKind::Cyclic { modulus } = self.kind else {
                    unreachable!()
                };
                Element::Cyclic((modulus - x % modulus) % modulus)
            }
        })
    }

    /// `x * y^{-1}`.
    pub fn div_right(&self, x: &Element, y: &Element) -> Result<Element, GroupError> {
        self.mul(x, &self.inv(y)?)
    }

    /// `d(g, e)` under the model metric, scale included.
    pub fn norm(&self, g: &Element) -> Result<Rational, GroupError> {
        self.same_shape(g)?;
        let raw = match self.metric.rule {
            MetricRule::Discrete => {
                if self.is_identity(g) {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            }
            MetricRule::Word => self.word_length(g)?,
            MetricRule::Arc => match g {
                Element::Circle(x) => arc(x),
                Element::Torus(v) => v.iter().map(arc).max().unwrap_or_else(Rational::zero),
                Element::Cyclic(k) => {
                    let GroupKind::Cyclic { modulus } = self.kind else {
                        unreachable!()
                    };
                    Rational::new(cyclic_len(*k, modulus) as i64, modulus as i64)
                }
                _ => {
                    return Err(GroupError::MetricUnsupported {
                        kind: self.kind.name(),
                        rule: MetricRule::Arc,
                    })
                }
            },
        };
        Ok(raw * self.metric.scale)
    }

    /// Word length over the standard generators, unscaled.
    pub fn word_length(&self, g: &Element) -> Result<Rational, GroupError> {
        let n: u64 = match g {
            Element::Lattice(v) => v.iter().map(|a| a.unsigned_abs()).sum(),
            Element::Free(w) => w.len() as u64,
            Element::Heisenberg(t) => self.heisenberg_length(t)? as u64,
            Element::Cyclic(k) => {
                let GroupKind::Cyclic { modulus } = self.kind else {
                    return Err(self.mismatch(g));
                };
                cyclic_len(*k, modulus)
            }
            Element::Circle(_) | Element::Torus(_) => {
                return Err(GroupError::MetricUnsupported {
                    kind: self.kind.name(),
                    rule: MetricRule::Word,
                })
            }
        };
        Ok(Rational::from_integer(n as i64))
    }

    fn heisenberg_length(&self, t: &[i64; 3]) -> Result<u32, GroupError> {
        let cache = self.heis_cache.as_ref().expect("heisenberg model carries a cache");
        if let Some(d) = cache.read().expect("cache lock").lookup(t) {
            return Ok(d);
        }
        let mut guard = cache.write().expect("cache lock");
        // Balls beyond this radius never fit under the cache limit.
        if heisenberg::length_lower_bound(t) > HEISENBERG_MAX_RADIUS {
            return Err(GroupError::BeyondHorizon {
                element: Element::Heisenberg(*t).to_string(),
                radius: guard.radius(),
            });
        }
        loop {
            if let Some(d) = guard.lookup(t) {
                return Ok(d);
            }
            if !guard.grow() {
                return Err(GroupError::BeyondHorizon {
                    element: Element::Heisenberg(*t).to_string(),
                    radius: guard.radius(),
                });
            }
        }
    }

    /// Right-invariant distance `d(x, y) = |x y^{-1}|`.
    pub fn distance(&self, x: &Element, y: &Element) -> Result<Rational, GroupError> {
        self.norm(&self.div_right(x, y)?)
    }

    pub fn entourage_contains(&self, u: &Entourage, g: &Element) -> Result<bool, GroupError> {
        Ok(self.norm(g)? <= u.radius)
    }

    /// Relation test of the bipartite graphs: `y x^{-1} ∈ U`.
    pub fn related(&self, u: &Entourage, x: &Element, y: &Element) -> Result<bool, GroupError> {
        self.entourage_contains(u, &self.div_right(y, x)?)
    }

    pub fn parse_element(&self, input: &str) -> Result<Element, GroupError> {
        let kind = self.kind.name();
        let err = |reason: &str| GroupError::Parse {
            kind,
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        let parts = || s.split(',').map(str::trim).collect::<Vec<_>>();
        let ints = |want: usize| -> Result<Vec<i64>, GroupError> {
            let p = parts();
            if p.len() != want {
                return Err(err(&format!("expected {want} integer coordinates")));
            }
            p.iter()
                .map(|x| x.parse::<i64>().map_err(|_| err("bad integer")))
                .collect()
        };
        let rats = |want: usize| -> Result<Vec<Rational>, GroupError> {
            let p = parts();
            if p.len() != want {
                return Err(err(&format!("expected {want} rational coordinates")));
            }
            p.iter()
                .map(|x| parse_rational(x).map(frac_part).map_err(|e| err(&e.to_string())))
                .collect()
        };
        match self.kind {
            GroupKind::Lattice { dim } => Ok(Element::Lattice(ints(dim)?)),
            GroupKind::Heisenberg => {
                let v = ints(3)?;
                Ok(Element::Heisenberg([v[0], v[1], v[2]]))
            }
            GroupKind::Circle => Ok(Element::Circle(rats(1)?[0])),
            GroupKind::Torus { dim } => Ok(Element::Torus(rats(dim)?)),
            GroupKind::Cyclic { modulus } => {
                let k: i128 = s.parse().map_err(|_| err("bad residue"))?;
                Ok(Element::Cyclic(k.rem_euclid(modulus as i128) as u64))
            }
            GroupKind::Free { rank } => {
                let compact: String = s.chars().filter(|c| *c != ',' && !c.is_whitespace()).collect();
                if compact.is_empty() || compact == "1" || (compact == "e" && rank < 5) {
                    return Ok(Element::Free(Vec::new()));
                }
                let mut w = Vec::new();
                for c in compact.chars() {
                    let code = letter_code(c).ok_or_else(|| err("not a generator letter"))?;
                    if code as usize >= 2 * rank {
                        return Err(err("generator outside the rank"));
                    }
                    push_reduced(&mut w, code);
                }
                Ok(Element::Free(w))
            }
        }
    }

    pub fn parse_window<S: AsRef<str>>(&self, items: &[S]) -> Result<FiniteWindow, GroupError> {
        let elems = items
            .iter()
            .map(|s| self.parse_element(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let w = FiniteWindow::new(elems);
        self.check_cap(w.len())?;
        Ok(w)
    }

    fn check_cap(&self, size: usize) -> Result<(), GroupError> {
        if size > self.window_cap {
            Err(GroupError::WindowTooLarge {
                size,
                cap: self.window_cap,
            })
        } else {
            Ok(())
        }
    }

    /// `{g x : x ∈ F}`.
    pub fn translate_window(&self, g: &Element, f: &FiniteWindow) -> Result<FiniteWindow, GroupError> {
        f.iter().map(|x| self.mul(g, x)).collect()
    }

    /// `{x z : x ∈ F}`.
    pub fn right_translate_window(&self, f: &FiniteWindow, z: &Element) -> Result<FiniteWindow, GroupError> {
        f.iter().map(|x| self.mul(x, z)).collect()
    }

    /// `S ∪ S^{-1}`.
    pub fn symmetric_closure(&self, s: &FiniteWindow) -> Result<FiniteWindow, GroupError> {
        let mut out: Vec<Element> = s.as_slice().to_vec();
        for g in s {
            out.push(self.inv(g)?);
        }
        Ok(FiniteWindow::new(out))
    }

    /// Word ball of radius `n` over the standard generators.
    pub fn word_ball(&self, n: u32) -> Result<FiniteWindow, GroupError> {
        match self.kind {
            GroupKind::Lattice { dim } => {
                self.check_cap(lattice_ball_size(dim, n))?;
                let mut out = Vec::new();
                let mut cur = vec![0i64; dim];
                lattice_ball(dim, 0, n as i64, &mut cur, &mut out);
                Ok(FiniteWindow::new(out.into_iter().map(Element::Lattice)))
            }
            GroupKind::Free { rank } => {
                self.check_cap(free_ball_size(rank, n))?;
                let mut out = vec![Vec::new()];
                let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
                for _ in 0..n {
                    let mut next = Vec::new();
                    for w in &layer {
                        for c in 0..(2 * rank) as u8 {
                            if w.last() != Some(&(c ^ 1)) {
                                let mut v = w.clone();
                                v.push(c);
                                next.push(v);
                            }
                        }
                    }
                    out.extend(next.iter().cloned());
                    layer = next;
                }
                Ok(FiniteWindow::new(out.into_iter().map(Element::Free)))
            }
            GroupKind::Heisenberg => {
                let cache = self.heis_cache.as_ref().expect("heisenberg cache");
                let mut guard = cache.write().expect("cache lock");
                while guard.radius() < n {
                    if !guard.grow() {
                        return Err(GroupError::WindowTooLarge {
                            size: HEISENBERG_CACHE_LIMIT,
                            cap: self.window_cap,
                        });
                    }
                    self.check_cap(guard.count_within(guard.radius()))?;
                }
                self.check_cap(guard.count_within(n))?;
                Ok(FiniteWindow::new(guard.ball(n).into_iter().map(Element::Heisenberg)))
            }
            GroupKind::Cyclic { modulus } => Ok(FiniteWindow::new(
                (0..modulus)
                    .filter(|&k| cyclic_len(k, modulus) <= n as u64)
                    .map(Element::Cyclic),
            )),
            GroupKind::Circle | GroupKind::Torus { .. } => Err(GroupError::MetricUnsupported {
                kind: self.kind.name(),
                rule: MetricRule::Word,
            }),
        }
    }

    /// Finite sample of the group: the grid of denominator `resolution` on
    /// circle and torus, the word ball of radius `resolution` elsewhere.
    /// With `bound`, keeps only points of metric norm at most `bound`.
    pub fn grid_sample(&self, resolution: u32, bound: Option<Rational>) -> Result<FiniteWindow, GroupError> {
        if resolution == 0 {
            return Err(GroupError::Descriptor("resolution must be at least 1".into()));
        }
        let base = match self.kind {
            GroupKind::Circle => {
                self.check_cap(resolution as usize)?;
                FiniteWindow::new((0..resolution as i64).map(|k| Element::Circle(Rational::new(k, resolution as i64))))
            }
            GroupKind::Torus { dim } => {
                let size = (resolution as usize).checked_pow(dim as u32).unwrap_or(usize::MAX);
                self.check_cap(size)?;
                let mut out = vec![Vec::new()];
                for _ in 0..dim {
                    let mut next = Vec::with_capacity(out.len() * resolution as usize);
                    for p in &out {
                        for k in 0..resolution as i64 {
                            let mut q: Vec<Rational> = p.clone();
                            q.push(Rational::new(k, resolution as i64));
                            next.push(q);
                        }
                    }
                    out = next;
                }
                FiniteWindow::new(out.into_iter().map(Element::Torus))
            }
            _ => self.word_ball(resolution)?,
        };
        match bound {
            None => Ok(base),
            Some(b) => {
                let mut keep = Vec::new();
                for x in base.into_vec() {
                    if self.norm(&x)? <= b {
                        keep.push(x);
                    }
                }
                Ok(FiniteWindow::new(keep))
            }
        }
    }
}

fn in_unit(r: &Rational) -> bool {
    *r >= Rational::zero() && *r < Rational::one()
}

fn arc(x: &Rational) -> Rational {
    let f = frac_part(*x);
    let g = Rational::one() - f;
    if f <= g {
        f
    } else {
        g
    }
}

fn cyclic_len(k: u64, modulus: u64) -> u64 {
    let k = k % modulus;
    k.min(modulus - k)
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Number of integer points with l1 norm at most `n` in dimension `dim`.
pub fn lattice_ball_size(dim: usize, n: u32) -> usize {
    let mut total: u128 = 0;
    for k in 0..=dim.min(n as usize) as u64 {
        total += (1u128 << k) * binom(dim as u64, k) * binom(n as u64, k);
    }
    total.min(usize::MAX as u128) as usize
}

/// Size of the radius-`n` ball in the free group of rank `rank`.
pub fn free_ball_size(rank: usize, n: u32) -> usize {
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * rank as u128;
    for _ in 0..n {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * rank as u128 - 1);
    }
    total.min(usize::MAX as u128) as usize
}

fn lattice_ball(dim: usize, i: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if i == dim {
        out.push(cur.clone());
        return;
    }
    for v in -budget..=budget {
        cur[i] = v;
        lattice_ball(dim, i + 1, budget - v.abs(), cur, out);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn products() {
        let z2 = GroupModel::lattice(2);
        let x = z2.parse_element("1,0").unwrap();
        let y = z2.parse_element("0,1").unwrap();
        assert_eq!(z2.mul(&x, &y).unwrap().to_string(), "1,1");

        let f2 = GroupModel::free(2);
        let ab = f2.parse_element("a,b").unwrap();
        let ba = f2.parse_element("B,a").unwrap();
        assert_eq!(f2.mul(&ab, &ba).unwrap().to_string(), "a,a");

        let c = GroupModel::circle();
        let p = c.mul(&Element::Circle(r(3, 4)), &Element::Circle(r(1, 2))).unwrap();
        assert_eq!(p, Element::Circle(r(1, 4)));
    }

    #[test]
    fn mismatch_is_an_error() {
        let z2 = GroupModel::lattice(2);
        assert!(matches!(
            z2.mul(&Element::Lattice(vec![1]), &z2.identity()),
            Err(GroupError::ModelMismatch { .. })
        ));
        assert!(z2.mul(&Element::Circle(r(1, 2)), &z2.identity()).is_err());
    }

    #[test]
    fn metric_values() {
        let f2 = GroupModel::free(2);
        let ab = f2.parse_element("ab").unwrap();
        let a = f2.parse_element("a").unwrap();
        let ba = f2.parse_element("ba").unwrap();
        // d(x, y) = |x y^{-1}|: ab·a^{-1} has length 3, ba·a^{-1} = b.
        assert_eq!(f2.distance(&ab, &a).unwrap(), r(3, 1));
        assert_eq!(f2.distance(&ba, &a).unwrap(), r(1, 1));

        let c = GroupModel::circle();
        let d = c
            .distance(&c.parse_element("0.9").unwrap(), &c.parse_element("0.05").unwrap())
            .unwrap();
        assert_eq!(d, r(3, 20));

        let disc = GroupModel::lattice(1)
            .with_metric(MetricRule::Discrete, Rational::one())
            .unwrap();
        let x = Element::Lattice(vec![4]);
        assert_eq!(disc.distance(&x, &x).unwrap(), r(0, 1));
        assert_eq!(disc.distance(&x, &Element::Lattice(vec![5])).unwrap(), r(1, 1));
    }

    #[test]
    fn entourage_membership() {
        let c = GroupModel::circle();
        let u = Entourage::new(r(1, 10));
        assert!(c.entourage_contains(&u, &Element::Circle(r(1, 12))).unwrap());
        assert!(!c.entourage_contains(&u, &Element::Circle(r(1, 8))).unwrap());
        for m in [GroupModel::lattice(2), GroupModel::free(2), GroupModel::circle()] {
            assert!(m
                .entourage_contains(&Entourage::identity_only(), &m.identity())
                .unwrap());
        }
    }

    #[test]
    fn grid_samples() {
        let c = GroupModel::circle();
        assert_eq!(c.grid_sample(4, None).unwrap().to_strings(), ["0", "1/4", "1/2", "3/4"]);
        assert_eq!(GroupModel::free(2).grid_sample(2, None).unwrap().len(), 17);
        let z = GroupModel::lattice(1).grid_sample(3, None).unwrap();
        assert_eq!(z.len(), 7);
        assert_eq!(z.get(0), Some(&Element::Lattice(vec![-3])));
        let t = GroupModel::torus(2).grid_sample(3, None).unwrap();
        assert_eq!(t.len(), 9);
        let bounded = c.grid_sample(12, Some(r(1, 6))).unwrap();
        assert_eq!(bounded.len(), 5);
    }

    #[test]
    fn ball_sizes_match_closed_forms() {
        for n in 0..6 {
            assert_eq!(GroupModel::free(2).word_ball(n).unwrap().len(), 2 * 3usize.pow(n) - 1);
            assert_eq!(GroupModel::lattice(1).word_ball(n).unwrap().len(), 2 * n as usize + 1);
            assert_eq!(
                GroupModel::lattice(3).word_ball(n).unwrap().len(),
                lattice_ball_size(3, n)
            );
        }
    }

    #[test]
    fn window_cap_enforced() {
        let f2 = GroupModel::free(2).with_window_cap(100);
        assert!(matches!(f2.word_ball(5), Err(GroupError::WindowTooLarge { .. })));
    }

    #[test]
    fn translations() {
        let z = GroupModel::lattice(1);
        let f = z.parse_window(&["0", "1", "2"]).unwrap();
        let g = Element::Lattice(vec![1]);
        assert_eq!(z.translate_window(&g, &f).unwrap().to_strings(), ["1", "2", "3"]);
        let c = GroupModel::circle();
        let f = c.parse_window(&["0", "3/4"]).unwrap();
        let t = c.translate_window(&Element::Circle(r(1, 2)), &f).unwrap();
        assert_eq!(t.to_strings(), ["1/4", "1/2"]);
        assert_eq!(c.translate_window(&c.identity(), &f).unwrap(), f);
    }

    #[test]
    fn parsing() {
        let f2 = GroupModel::free(2);
        assert_eq!(f2.parse_element("a,A,b").unwrap().to_string(), "b");
        assert_eq!(f2.parse_element("").unwrap(), f2.identity());
        assert_eq!(f2.parse_element("e").unwrap(), f2.identity());
        assert!(f2.parse_element("c").is_err());
        let c = GroupModel::circle();
        assert_eq!(c.parse_element("-1/4").unwrap(), Element::Circle(r(3, 4)));
        assert!(c.parse_element("0.1.1").is_err());
        let z12 = GroupModel::cyclic(12);
        assert_eq!(z12.parse_element("-1").unwrap(), Element::Cyclic(11));
    }

    #[test]
    fn heisenberg_metric() {
        let h = GroupModel::heisenberg();
        let comm = Element::Heisenberg([0, 0, 1]);
        assert_eq!(h.norm(&comm).unwrap(), r(4, 1));
        assert_eq!(h.word_ball(2).unwrap().len(), 17);
    }

    #[test]
    fn cyclic_metrics() {
        let z12 = GroupModel::cyclic(12);
        assert_eq!(z12.norm(&Element::Cyclic(9)).unwrap(), r(3, 1));
        let arc12 = z12.clone().with_metric(MetricRule::Arc, Rational::one()).unwrap();
        assert_eq!(arc12.norm(&Element::Cyclic(9)).unwrap(), r(1, 4));
        assert_eq!(z12.word_ball(6).unwrap().len(), 12);
    }

    #[test]
    fn unsupported_metrics_rejected() {
        assert!(GroupModel::circle()
            .with_metric(MetricRule::Word, Rational::one())
            .is_err());
        assert!(GroupModel::free(2)
            .with_metric(MetricRule::Arc, Rational::one())
            .is_err());
    }
}
