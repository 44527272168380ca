use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use folner::algebra::{convolve, r_transform, seminorm_pd, seminorm_pd_with, Bounds, FiniteWeight};
use folner::{Element, FiniteWindow, GroupModel, Rational};

fn z(k: i64) -> Element {
    Element::Lattice(vec![k])
}

fn weight_on_z(lo: i64, hi: i64) -> impl Strategy<Value = FiniteWeight> {
    prop::collection::btree_map(lo..=hi, -6i64..=6, 1..=4)
        .prop_map(|m| FiniteWeight::new(m.into_iter().map(|(k, w)| (z(k), Rational::new(w, 3)))))
}

fn stochastic_on_z(lo: i64, hi: i64) -> impl Strategy<Value = FiniteWeight> {
    prop::collection::btree_map(lo..=hi, 1i64..=5, 1..=4).prop_map(|m| {
        let total: i64 = m.values().sum();
        FiniteWeight::new(m.into_iter().map(|(k, w)| (z(k), Rational::new(w, total))))
    })
}

/// A 1-Lipschitz function on `-15..=15` with steps in `{-1, -1/2, 0, 1/2, 1}`.
fn lipschitz_on_z() -> impl Strategy<Value = BTreeMap<Element, Rational>> {
    (-4i64..=4, prop::collection::vec(-2i64..=2, 30)).prop_map(|(start, steps)| {
        let mut f = BTreeMap::new();
        let mut v = Rational::new(start, 2);
        f.insert(z(-15), v);
        for (i, s) in steps.iter().enumerate() {
            v += Rational::new(*s, 2);
            f.insert(z(-14 + i as i64), v);
        }
        f
    })
}

/// Grid brute force of `max Σ a(x) f(x)` over `f` with values `j/20`, for
/// weights on circle points `k/20`; exact, since optimal vertices lie on
/// that grid.
fn circle_grid_max(points: &[(i64, i64)]) -> Rational {
    let n = points.len();
    let dist = |a: i64, b: i64| {
        let t = (a - b).rem_euclid(20);
        t.min(20 - t)
    };
    let mut best = i64::MIN;
    let mut vals = vec![-20i64; n];
    loop {
        let feasible = (0..n).all(|i| (0..i).all(|j| (vals[i] - vals[j]).abs() <= dist(points[i].0, points[j].0)));
        if feasible {
            best = best.max(points.iter().zip(&vals).map(|((_, w), v)| w * v).sum());
        }
        let mut i = 0;
        loop {
            if i == n {
                return Rational::new(best, 20);
            }
            vals[i] += 1;
            if vals[i] <= 20 {
                break;
            }
            vals[i] = -20;
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_norms_and_support(a in weight_on_z(-3, 3), b in weight_on_z(-3, 3)) {
        let m = GroupModel::lattice(1);
        let ab = convolve(&m, &a, &b).unwrap();
        prop_assert!(ab.norm1() <= a.norm1() * b.norm1());
        let mut prods = Vec::new();
        for x in a.support().iter() {
            for y in b.support().iter() {
                prods.push(m.mul(x, y).unwrap());
            }
        }
        let prods = FiniteWindow::new(prods);
        prop_assert!(ab.support().iter().all(|x| prods.contains(x)));
    }

    #[test]
    fn convolution_of_positive_weights_is_multiplicative(a in stochastic_on_z(-3, 3), b in stochastic_on_z(-3, 3)) {
        let ab = convolve(&GroupModel::lattice(1), &a, &b).unwrap();
        prop_assert_eq!(ab.norm1(), a.norm1() * b.norm1());
        prop_assert!(ab.is_stochastic());
    }

    #[test]
    fn pairing_against_r_transform(a in weight_on_z(-3, 3), b in weight_on_z(-3, 3), f in lipschitz_on_z()) {
        let m = GroupModel::lattice(1);
        let ab = convolve(&m, &a, &b).unwrap();
        let window = a.support();
        let rb = r_transform(&m, &b, &f, &window).unwrap();
        let lhs = ab.pair(|x| f.get(x).copied()).unwrap();
        let rhs = a.pair(|x| rb.get(x).copied()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn r_transform_stays_lipschitz(a in stochastic_on_z(-3, 3), f in lipschitz_on_z()) {
        let m = GroupModel::lattice(1);
        let window = FiniteWindow::new((-10..=10).map(z));
        let rf = r_transform(&m, &a, &f, &window).unwrap();
        for (x, fx) in &rf {
            for (y, fy) in &rf {
                prop_assert!((fx - fy).abs() <= m.distance(x, y).unwrap());
            }
        }
    }

    #[test]
    fn seminorm_bounds(a in weight_on_z(-4, 4), b in weight_on_z(-4, 4), c in 1i64..=4) {
        let m = GroupModel::lattice(1);
        let pa = seminorm_pd(&m, &a).unwrap().value;
        let pb = seminorm_pd(&m, &b).unwrap().value;
        prop_assert!(pa <= a.norm1());
        prop_assert!(seminorm_pd(&m, &a.add(&b)).unwrap().value <= pa + pb);
        let scaled = m.scaled(Rational::from_integer(c));
        prop_assert!(seminorm_pd(&scaled, &a).unwrap().value >= pa);
        prop_assert!(seminorm_pd_with(&m, &a, Bounds::Unit).unwrap().value <= pa);
    }

    #[test]
    fn seminorm_witness_is_feasible(a in weight_on_z(-4, 4)) {
        let m = GroupModel::lattice(1).scaled(Rational::new(1, 3));
        let sol = seminorm_pd(&m, &a).unwrap();
        prop_assert!(sol.certified);
        for (x, fx) in &sol.witness {
            prop_assert!(fx.abs() <= Rational::one());
            for (y, fy) in &sol.witness {
                prop_assert!((fx - fy).abs() <= m.distance(x, y).unwrap());
            }
        }
        prop_assert_eq!(a.pair(|x| sol.witness.iter().find(|(y, _)| y == x).map(|(_, v)| *v)).unwrap().abs(), sol.value);
    }

    #[test]
    fn lp_matches_grid_brute_force(points in prop::collection::btree_map(0i64..20, (-4i64..=4).prop_filter("nonzero", |w| *w != 0), 1..=3)) {
        let c = GroupModel::circle();
        let pts: Vec<(i64, i64)> = points.into_iter().collect();
        let a = FiniteWeight::new(pts.iter().map(|&(k, w)| (Element::Circle(Rational::new(k, 20)), Rational::from_integer(w))));
        let lp = seminorm_pd(&c, &a).unwrap().value;
        prop_assert_eq!(lp, circle_grid_max(&pts));
    }
}

#[test]
fn zero_weight_has_zero_seminorm() {
    assert!(seminorm_pd(&GroupModel::circle(), &FiniteWeight::zero())
        .unwrap()
        .value
        .is_zero());
}
