//! `p_d(a) = max Σ a(x) f(x)` over `f` with `|f| <= 1` and
//! `|f(x) - f(y)| <= d(x, y)`, solved exactly on the support of `a`.
//!
//! Restricting to the support loses nothing: an optimal `f` on the support
//! extends to the whole group by the McShane formula
//! `x ↦ min_y (f(y) + d(x, y))`, clipped to `[-1, 1]`, which stays
//! 1-Lipschitz and keeps the values on the support.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::simplex::{big_one, LinearProgram, LpSolution};
use super::{AlgebraError, FiniteWeight};
use crate::group::{Element, FiniteWindow, GroupModel};
use crate::rational::{self, from_big, to_big, Rational};

pub const MAX_SUPPORT: usize = 200;

/// Range of the test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bounds {
    /// `f` with values in `[-1, 1]`: the seminorm `p_d`.
    Symmetric,
    /// `f` with values in `[0, 1]`.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSolution {
    pub value: Rational,
    /// Optimal `f` on the support, with `|a(f)| = value`.
    pub witness: Vec<(Element, Rational)>,
    pub pivots: usize,
    /// Every LP solved passed the primal/dual certificate check.
    pub certified: bool,
    /// Pair constraints left after pruning.
    pub pair_constraints: usize,
}

impl SeminormSolution {
    pub fn witness_range(&self) -> Option<(Rational, Rational)> {
        let lo = self.witness.iter().map(|(_, v)| *v).min()?;
        let hi = self.witness.iter().map(|(_, v)| *v).max()?;
        Some((lo, hi))
    }
}

pub fn seminorm_pd(model: &GroupModel, a: &FiniteWeight) -> Result<SeminormSolution, AlgebraError> {
    seminorm_pd_with(model, a, Bounds::Symmetric)
}

pub fn seminorm_pd_with(
    model: &GroupModel,
    a: &FiniteWeight,
    bounds: Bounds,
) -> Result<SeminormSolution, AlgebraError> {
    let n = a.len();
    if n == 0 {
        return Ok(SeminormSolution {
            value: Rational::zero(),
            witness: Vec::new(),
            pivots: 0,
            certified: true,
            pair_constraints: 0,
        });
    }
    if n > MAX_SUPPORT {
        return Err(AlgebraError::SupportTooLarge {
            size: n,
            limit: MAX_SUPPORT,
        });
    }
    let points: Vec<&Element> = a.entries().iter().map(|(x, _)| x).collect();
    let mut dist = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = model.distance(points[i], points[j])?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let cap = match bounds {
        Bounds::Symmetric => Rational::from_integer(2),
        Bounds::Unit => Rational::from_integer(1),
    };
    let pairs = essential_pairs(&dist, cap);

    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n + 2 * pairs.len());
    let mut rhs = Vec::with_capacity(rows.capacity());
    let zero = BigRational::zero();
    for i in 0..n {
        let mut row = vec![zero.clone(); n];
        row[i] = big_one();
        rows.push(row);
        rhs.push(to_big(&cap));
    }
    for &(i, j) in &pairs {
        let d = to_big(&dist[i][j]);
        for (p, q) in [(i, j), (j, i)] {
            let mut row = vec![zero.clone(); n];
            row[p] = big_one();
            row[q] = -big_one();
            rows.push(row);
            rhs.push(d.clone());
        }
    }
    let weights: Vec<BigRational> = a.entries().iter().map(|(_, w)| to_big(w)).collect();
    let solve = |c: Vec<BigRational>| -> Result<(LinearProgram, LpSolution), AlgebraError> {
        let lp = LinearProgram {
            c,
            a: rows.clone(),
            b: rhs.clone(),
        };
        let sol = lp.solve()?;
        Ok((lp, sol))
    };

    let (value, witness, pivots, certified) = match bounds {
        Bounds::Symmetric => {
            // u = f + 1 in [0, 2].
            let (lp, sol) = solve(weights.clone())?;
            let shift: BigRational = weights.iter().sum();
            let value = &sol.value - &shift;
            let witness = sol.primal.iter().map(|u| u - big_one()).collect::<Vec<_>>();
            (value, witness, sol.pivots, lp.certify(&sol))
        }
        Bounds::Unit => {
            let (lp_pos, pos) = solve(weights.clone())?;
            let (lp_neg, neg) = solve(weights.iter().map(|w| -w).collect())?;
            let certified = lp_pos.certify(&pos) && lp_neg.certify(&neg);
            let pivots = pos.pivots + neg.pivots;
            if neg.value > pos.value {
                (neg.value.clone(), neg.primal, pivots, certified)
            } else {
                (pos.value.clone(), pos.primal, pivots, certified)
            }
        }
    };
    let value = from_big(&value.abs()).ok_or(AlgebraError::Overflow)?;
    let witness = points
        .iter()
        .zip(witness.iter())
        .map(|(x, v)| from_big(v).map(|v| ((*x).clone(), v)).ok_or(AlgebraError::Overflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeminormSolution {
        value,
        witness,
        pivots,
        certified,
        pair_constraints: pairs.len(),
    })
}

/// Pairs whose Lipschitz constraint is not implied by the value bounds
/// (`d >= cap`) or by two shorter constraints through a third point.
fn essential_pairs(dist: &[Vec<Rational>], cap: Rational) -> Vec<(usize, usize)> {
    let n = dist.len();
    let zero = Rational::zero();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[i][j];
            if d >= cap {
                continue;
            }
            let implied = (0..n)
                .any(|k| k != i && k != j && dist[i][k] > zero && dist[k][j] > zero && dist[i][k] + dist[k][j] <= d);
            if !implied {
                out.push((i, j));
            }
        }
    }
    out
}

/// One row of an invariance report: the seminorms of `a - g a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceRow {
    pub g: Element,
    pub p_d: Rational,
    pub p_unit: Rational,
    pub lp_pivots: usize,
    pub witness_range: Option<(Rational, Rational)>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
}

impl InvarianceReport {
    /// `max_g p_d(a - g a)`.
    pub fn defect(&self) -> Rational {
        self.rows.iter().map(|r| r.p_d).max().unwrap_or_else(Rational::zero)
    }

    /// Same maximum over `[0, 1]`-valued test functions.
    pub fn unit_defect(&self) -> Rational {
        self.rows.iter().map(|r| r.p_unit).max().unwrap_or_else(Rational::zero)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["g", "p_d_defect", "lp_pivots", "witness_range"])
            .expect("in-memory csv");
        for r in &self.rows {
            let range = match &r.witness_range {
                Some((lo, hi)) => format!("{}..{}", rational::format_rational(lo), rational::format_rational(hi)),
                None => String::new(),
            };
            w.write_record([
                r.g.to_string(),
                rational::format_rational(&r.p_d),
                r.lp_pivots.to_string(),
                range,
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

/// `max_{g ∈ E} p_d(a - g a)`, with the `[0, 1]` variant alongside.
pub fn invariance_defect(
    model: &GroupModel,
    a: &FiniteWeight,
    e: &FiniteWindow,
) -> Result<InvarianceReport, AlgebraError> {
    if !a.is_stochastic() {
        return Err(AlgebraError::NotStochastic);
    }
    let rows = e
        .as_slice()
        .par_iter()
        .map(|g| {
            let diff = a.sub(&a.left_translate(model, g)?);
            let full = seminorm_pd_with(model, &diff, Bounds::Symmetric)?;
            let unit = seminorm_pd_with(model, &diff, Bounds::Unit)?;
            Ok(InvarianceRow {
                g: g.clone(),
                p_d: full.value,
                p_unit: unit.value,
                lp_pivots: full.pivots + unit.pivots,
                witness_range: full.witness_range(),
                certified: full.certified && unit.certified,
            })
        })
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    Ok(InvarianceReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn dirac_and_zero() {
        let c = GroupModel::circle();
        let x = c.parse_element("1/3").unwrap();
        let s = seminorm_pd(&c, &FiniteWeight::delta(x)).unwrap();
        assert_eq!(s.value, r(1, 1));
        assert!(s.certified);
        assert_eq!(seminorm_pd(&c, &FiniteWeight::zero()).unwrap().value, r(0, 1));
    }

    #[test]
    fn dipoles() {
        let c = GroupModel::circle().scaled(r(2, 1));
        let x = c.parse_element("0").unwrap();
        let y = c.parse_element("3/10").unwrap();
        let a = FiniteWeight::delta(x.clone()).sub(&FiniteWeight::delta(y));
        // Scaled arc distance 2 * 3/10 = 3/5.
        assert_eq!(seminorm_pd(&c, &a).unwrap().value, r(3, 5));

        let z = GroupModel::lattice(1);
        let far =
            FiniteWeight::delta(z.parse_element("0").unwrap()).sub(&FiniteWeight::delta(z.parse_element("7").unwrap()));
        assert_eq!(seminorm_pd(&z, &far).unwrap().value, r(2, 1));
        assert_eq!(seminorm_pd_with(&z, &far, Bounds::Unit).unwrap().value, r(1, 1));
    }

    #[test]
    fn lattice_invariance_defect() {
        let z = GroupModel::lattice(1);
        let f10: FiniteWindow = (0..10).map(|k| Element::Lattice(vec![k])).collect();
        let a = FiniteWeight::uniform(&f10);
        let e: FiniteWindow = [Element::Lattice(vec![1])].into_iter().collect();
        let rep = invariance_defect(&z, &a, &e).unwrap();
        assert_eq!(rep.defect(), r(1, 5));
        assert!(rep.unit_defect() <= rep.defect());
        assert!(rep.rows[0].certified);
        let id: FiniteWindow = [z.identity()].into_iter().collect();
        assert_eq!(invariance_defect(&z, &a, &id).unwrap().defect(), r(0, 1));
        assert!(rep.to_csv().starts_with("g,p_d_defect,lp_pivots,witness_range\n1,1/5,"));
    }

    #[test]
    fn pruning_keeps_neighbours_only_on_a_circle() {
        let c = GroupModel::circle();
        let pts = c.grid_sample(10, None).unwrap();
        let a = FiniteWeight::new(
            pts.iter()
                .enumerate()
                .map(|(i, x)| (x.clone(), r(if i % 2 == 0 { 1 } else { -1 }, 10))),
        );
        let s = seminorm_pd(&c, &a).unwrap();
        assert_eq!(s.pair_constraints, 10);
        // Alternating ±1/10 on spacing 1/10: f = ±1/20 gives 10 * 1/10 * 1/20.
        assert_eq!(s.value, r(1, 20));
    }

    #[test]
    fn support_limit() {
        let z = GroupModel::lattice(1);
        let a = FiniteWeight::new((0..201).map(|k| (Element::Lattice(vec![k]), r(1, 201))));
        assert!(matches!(seminorm_pd(&z, &a), Err(AlgebraError::SupportTooLarge { .. })));
    }
}
