use std::str::FromStr;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lattice_box, topological_defect, FolnerCertificate, FolnerError};
use crate::group::{Entourage, FiniteWindow, GroupError, GroupKind, GroupModel};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Balls,
    Boxes,
    Grid,
    Local,
}

impl FromStr for Strategy {
    type Err = FolnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "balls" => Ok(Strategy::Balls),
            "boxes" => Ok(Strategy::Boxes),
            "grid" => Ok(Strategy::Grid),
            "local" => Ok(Strategy::Local),
            _ => Err(FolnerError::InvalidInput(format!("unknown strategy {s:?}"))),
        }
    }
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Balls => "balls",
            Strategy::Boxes => "boxes",
            Strategy::Grid => "grid",
            Strategy::Local => "local",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub theta: Rational,
    pub strategy: Strategy,
    /// Maximum number of candidate sets evaluated.
    pub budget: usize,
    /// Random start for the local strategy; `None` starts from a small ball
    /// or grid.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSummary {
    pub id: usize,
    pub size: usize,
    pub theta: Rational,
    pub seminorm_bound: Rational,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    pub best: Option<FolnerCertificate>,
    pub evaluated: usize,
    pub candidates: Vec<CandidateSummary>,
}

impl SearchOutcome {
    pub fn best_theta(&self) -> Option<Rational> {
        self.best.as_ref().map(|c| c.theta)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["candidate_id", "|F|", "theta", "seminorm_bound", "passed"])
            .expect("in-memory csv");
        for c in &self.candidates {
            w.write_record([
                c.id.to_string(),
                c.size.to_string(),
                format_rational(&c.theta),
                format_rational(&c.seminorm_bound),
                c.passed.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }
}

struct Recorder<'a> {
    model: &'a GroupModel,
    e: &'a FiniteWindow,
    u: &'a Entourage,
    target: Rational,
    budget: usize,
    outcome: SearchOutcome,
}

impl Recorder<'_> {
    fn remaining(&self) -> usize {
        self.budget - self.outcome.evaluated
    }

    /// Evaluates a batch in parallel and records it in order. Returns the
    /// index of the first candidate meeting the target.
    fn evaluate(&mut self, batch: Vec<FiniteWindow>) -> Result<Option<usize>, FolnerError> {
        let batch: Vec<FiniteWindow> = batch.into_iter().take(self.remaining()).collect();
        let certs = batch
            .par_iter()
            .map(|f| topological_defect(self.model, f, self.e, self.u))
            .collect::<Result<Vec<_>, _>>()?;
        let mut hit = None;
        for (i, cert) in certs.into_iter().enumerate() {
            let passed = cert.theta >= self.target;
            self.outcome.candidates.push(CandidateSummary {
                id: self.outcome.evaluated,
                size: cert.f.len(),
                theta: cert.theta,
                seminorm_bound: Rational::one() - cert.theta / Rational::from_integer(2),
                passed,
            });
            self.outcome.evaluated += 1;
            if hit.is_none() {
                let better = match &self.outcome.best {
                    None => true,
                    Some(b) => cert.theta > b.theta,
                };
                if passed {
                    hit = Some(i);
                    self.outcome.found = true;
                    self.outcome.best = Some(cert);
                } else if better {
                    self.outcome.best = Some(cert);
                }
            }
        }
        Ok(hit)
    }
}

/// Looks for `F` with `topological_defect(F, E, U) >= θ`. Exhausting the
/// budget or the candidate family is reported in the outcome, not as an
/// error.
pub fn folner_search(
    model: &GroupModel,
    e: &FiniteWindow,
    u: &Entourage,
    opts: &SearchOptions,
) -> Result<SearchOutcome, FolnerError> {
    if opts.budget == 0 {
        return Err(FolnerError::InvalidInput("budget must be positive".into()));
    }
    let unsupported = || FolnerError::StrategyUnsupported {
        strategy: opts.strategy.name().into(),
        model: model.id(),
    };
    let mut rec = Recorder {
        model,
        e,
        u,
        target: opts.theta,
        budget: opts.budget,
        outcome: SearchOutcome {
            found: false,
            best: None,
            evaluated: 0,
            candidates: Vec::new(),
        },
    };
    let family: Box<dyn Fn(usize) -> Result<FiniteWindow, FolnerError>> = match opts.strategy {
        Strategy::Balls if !model.kind().is_continuous() => Box::new(|n| Ok(model.word_ball(n as u32)?)),
        Strategy::Boxes if matches!(model.kind(), GroupKind::Lattice { .. }) => {
            Box::new(|n| lattice_box(model, n as i64 + 1))
        }
        Strategy::Grid if model.kind().is_continuous() => Box::new(|n| Ok(model.grid_sample(n as u32 + 1, None)?)),
        Strategy::Local => return local_search(rec, opts.seed),
        _ => return Err(unsupported()),
    };
    let batch_size = rayon::current_num_threads().max(1);
    let mut next = 0;
    'outer: while rec.remaining() > 0 {
        let mut batch = Vec::new();
        while batch.len() < batch_size.min(rec.remaining()) {
            match family(next) {
                Ok(f) => batch.push(f),
                Err(FolnerError::Group(GroupError::WindowTooLarge { .. })) => {
                    rec.evaluate(batch)?;
                    break 'outer;
                }
                Err(err) => return Err(err),
            }
            next += 1;
        }
        if rec.evaluate(batch)?.is_some() {
            break;
        }
    }
    Ok(rec.outcome)
}

/// Hill-climbing by single swaps `F - {x} + {y}` with `y` from a fixed
/// pool, scanning swaps in canonical order and moving to the first strict
/// improvement.
fn local_search(mut rec: Recorder<'_>, seed: Option<u64>) -> Result<SearchOutcome, FolnerError> {
    let model = rec.model;
    let (start, pool) = if model.kind().is_continuous() {
        (model.grid_sample(4, None)?, model.grid_sample(24, None)?)
    } else {
        (model.word_ball(1)?, model.word_ball(3)?)
    };
    let mut current = match seed {
        None => start,
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut items = pool.as_slice().to_vec();
            items.shuffle(&mut rng);
            items.into_iter().take(start.len()).collect()
        }
    };
    if rec.evaluate(vec![current.clone()])?.is_some() {
        return Ok(rec.outcome);
    }
    let mut current_theta = rec.outcome.best_theta().expect("one candidate evaluated");
    let batch_size = rayon::current_num_threads().max(1);
    loop {
        let outside = pool.difference(&current);
        let mut swaps = current.iter().flat_map(|x| {
            let current = &current;
            outside.iter().map(move |y| {
                let mut f: Vec<_> = current.iter().filter(|z| *z != x).cloned().collect();
                f.push(y.clone());
                FiniteWindow::new(f)
            })
        });
        let mut moved = false;
        while rec.remaining() > 0 {
            let batch: Vec<FiniteWindow> = swaps.by_ref().take(batch_size.min(rec.remaining())).collect();
            if batch.is_empty() {
                break;
            }
            let first_new = rec.outcome.candidates.len();
            if rec.evaluate(batch.clone())?.is_some() {
                return Ok(rec.outcome);
            }
            let improved = rec.outcome.candidates[first_new..]
                .iter()
                .position(|c| c.theta > current_theta);
            if let Some(i) = improved {
                current_theta = rec.outcome.candidates[first_new + i].theta;
                current = batch[i].clone();
                moved = true;
                break;
            }
        }
        if !moved {
            return Ok(rec.outcome);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn opts(theta: Rational, strategy: Strategy, budget: usize) -> SearchOptions {
        SearchOptions {
            theta,
            strategy,
            budget,
            seed: None,
        }
    }

    #[test]
    fn lattice_boxes() {
        let z2 = GroupModel::lattice(2);
        let e = z2.parse_window(&["1,0", "0,1"]).unwrap();
        let out = folner_search(
            &z2,
            &e,
            &Entourage::identity_only(),
            &opts(r(9, 10), Strategy::Boxes, 500),
        )
        .unwrap();
        assert!(out.found);
        let best = out.best.unwrap();
        assert_eq!(best.f.len(), 100);
        assert_eq!(best.theta, r(9, 10));
        assert!(out.candidates.iter().any(|c| c.passed));
    }

    #[test]
    fn circle_grid() {
        let c = GroupModel::circle();
        let e = c.parse_window(&["1/3"]).unwrap();
        let out = folner_search(&c, &e, &Entourage::new(r(1, 24)), &opts(r(1, 1), Strategy::Grid, 50)).unwrap();
        assert!(out.found);
        assert_eq!(out.best.unwrap().f.len(), 3);
    }

    #[test]
    fn free_group_balls_fail() {
        let f2 = GroupModel::free(2);
        let e = f2.parse_window(&["a", "b"]).unwrap();
        let out = folner_search(&f2, &e, &Entourage::identity_only(), &opts(r(3, 5), Strategy::Balls, 7)).unwrap();
        assert!(!out.found);
        assert_eq!(out.evaluated, 7);
        assert_eq!(out.best_theta(), Some(r(728, 1457)));
        assert!(out
            .to_csv()
            .starts_with("candidate_id,|F|,theta,seminorm_bound,passed\n0,1,0,1,false\n"));
    }

    #[test]
    fn local_improves() {
        // Three points of Z are best as an interval, with defect 2/3.
        let z = GroupModel::lattice(1);
        let e = z.parse_window(&["1"]).unwrap();
        let seeded = SearchOptions {
            seed: Some(3),
            ..opts(r(2, 3), Strategy::Local, 200)
        };
        let out = folner_search(&z, &e, &Entourage::identity_only(), &seeded).unwrap();
        assert!(out.found);
        assert_eq!(out.best.unwrap().theta, r(2, 3));
        let stuck = folner_search(
            &z,
            &e,
            &Entourage::identity_only(),
            &opts(r(3, 4), Strategy::Local, 200),
        )
        .unwrap();
        assert!(!stuck.found);
        assert_eq!(stuck.best_theta(), Some(r(2, 3)));
        let again = folner_search(&z, &e, &Entourage::identity_only(), &seeded).unwrap();
        assert_eq!(out.candidates, again.candidates);
    }

    #[test]
    fn mismatched_strategy() {
        let c = GroupModel::circle();
        let e = c.parse_window(&["1/3"]).unwrap();
        assert!(matches!(
            folner_search(&c, &e, &Entourage::new(r(1, 24)), &opts(r(1, 1), Strategy::Boxes, 5)),
            Err(FolnerError::StrategyUnsupported { .. })
        ));
    }
}
