//! Paradoxical decompositions: certificates with serialized piece
//! classifiers, exact verification on finite windows with boundary
//! accounting, and a small exhaustive search.

mod classifier;
mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{Element, FiniteWindow, GroupError, GroupModel};
use crate::perturb::PerturbedAction;

pub use classifier::{Classifier, Sign};
pub use search::{search_small_paradox, PieceCountResult, SmallParadoxReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParadoxError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("classifier {rule} is undefined at {element}")]
    NonTotal { rule: String, element: String },
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("translator {0} has no row in the perturbed action")]
    MissingRow(String),
    #[error("{0}")]
    Precondition(String),
}

/// Pieces `A_1..A_m`, `B_1..B_n` and translators with
/// `G = ⊔ A_i ⊔ ⊔ B_j = ⊔ g_i A_i = ⊔ h_j B_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadoxCertificate {
    pub g: Vec<Element>,
    pub h: Vec<Element>,
    pub a: Vec<Classifier>,
    pub b: Vec<Classifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub g: Vec<String>,
    pub h: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<Classifier>,
    #[serde(rename = "B")]
    pub b: Vec<Classifier>,
}

impl ParadoxCertificate {
    pub fn pieces(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            g: self.g.iter().map(|x| x.to_string()).collect(),
            h: self.h.iter().map(|x| x.to_string()).collect(),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    pub fn from_json(model: &GroupModel, json: &CertificateJson) -> Result<Self, ParadoxError> {
        let parse = |v: &[String]| v.iter().map(|s| model.parse_element(s)).collect::<Result<Vec<_>, _>>();
        let cert = ParadoxCertificate {
            g: parse(&json.g)?,
            h: parse(&json.h)?,
            a: json.a.clone(),
            b: json.b.clone(),
        };
        cert.check_shape()?;
        Ok(cert)
    }

    fn check_shape(&self) -> Result<(), ParadoxError> {
        if self.g.len() != self.a.len() || self.h.len() != self.b.len() {
            return Err(ParadoxError::Malformed(format!(
                "{} translators for {} A-pieces, {} for {} B-pieces",
                self.g.len(),
                self.a.len(),
                self.h.len(),
                self.b.len()
            )));
        }
        if self.a.is_empty() || self.b.is_empty() {
            return Err(ParadoxError::Malformed("both sides need a piece".into()));
        }
        Ok(())
    }

    /// Every certificate obtained by negating one leaf rule or one whole
    /// piece, labelled by where the change was made.
    pub fn single_rule_corruptions(&self) -> Vec<(String, ParadoxCertificate)> {
        let mut out = Vec::new();
        for (side, pieces) in [("A", &self.a), ("B", &self.b)] {
            for (i, c) in pieces.iter().enumerate() {
                let mut variants = vec![(format!("{side}{}:not", i + 1), Classifier::Not(Box::new(c.clone())))];
                for (k, v) in c.leaf_negations().into_iter().enumerate() {
                    variants.push((format!("{side}{}:leaf{k}", i + 1), v));
                }
                for (label, v) in variants {
                    let mut cert = self.clone();
                    if side == "A" {
                        cert.a[i] = v;
                    } else {
                        cert.b[i] = v;
                    }
                    out.push((label, cert));
                }
            }
        }
        out
    }
}

/// The first-letter decomposition of `F_2`: `A_1 = W(a) ∪ {a^{-k} : k >= 0}`,
/// `A_2 = W(a^{-1}) \ {a^{-k}}`, `B_1 = W(b)`, `B_2 = W(b^{-1})`, with
/// `F_2 = A_1 ⊔ a A_2 = B_1 ⊔ b B_2`.
pub fn f2_standard_certificate() -> ParadoxCertificate {
    let letter = |s: &str| Classifier::FirstLetter(s.to_string());
    let a_powers = Classifier::Any(vec![Classifier::Identity, Classifier::PowerOf("A".into())]);
    ParadoxCertificate {
        g: vec![Element::Free(vec![]), Element::Free(vec![0])],
        h: vec![Element::Free(vec![]), Element::Free(vec![2])],
        a: vec![
            Classifier::Any(vec![letter("a"), a_powers]),
            Classifier::All(vec![
                letter("A"),
                Classifier::Not(Box::new(Classifier::PowerOf("A".into()))),
            ]),
        ],
        b: vec![letter("b"), letter("B")],
    }
}

/// How translators act on the window.
#[derive(Clone, Copy)]
pub enum Evaluation<'a> {
    /// Left multiplication in the model.
    Direct,
    /// The table `α(g)` of a perturbed action.
    Perturbed(&'a PerturbedAction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationReport {
    pub equation: String,
    /// Instances whose preimages all lie in the window.
    pub checkable: usize,
    pub covered_once: usize,
    pub violations: usize,
    pub boundary_defects: usize,
    /// Up to a few violating window elements.
    pub samples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowReport {
    pub window_size: usize,
    pub equations: Vec<EquationReport>,
}

impl WindowReport {
    pub fn interior_violations(&self) -> usize {
        self.equations.iter().map(|e| e.violations).sum()
    }

    pub fn boundary_defects(&self) -> usize {
        self.equations.iter().map(|e| e.boundary_defects).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["equation", "checkable", "violations", "boundary_defects"])
            .expect("in-memory csv");
        for e in &self.equations {
            w.write_record([
                e.equation.clone(),
                e.checkable.to_string(),
                e.violations.to_string(),
                e.boundary_defects.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }
}

const SAMPLE_LIMIT: usize = 5;

enum Cover {
    Checked(usize),
    Boundary,
}

/// Checks the partition `G = ⊔ A_i ⊔ ⊔ B_j` and both coverings at every
/// window point. A covering instance at `y` is checkable only when every
/// preimage `g_i^{-1} y` lies in the window; otherwise it is a boundary
/// defect.
pub fn verify_on_window(
    model: &GroupModel,
    cert: &ParadoxCertificate,
    window: &FiniteWindow,
    evaluation: Evaluation<'_>,
) -> Result<WindowReport, ParadoxError> {
    cert.check_shape()?;
    let preimage = Preimages::new(model, window, evaluation, cert)?;
    let rows = window
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(idx, y)| {
            let mut hits = 0;
            for c in cert.a.iter().chain(&cert.b) {
                if c.eval(model, y)? {
                    hits += 1;
                }
            }
            let a = preimage.cover(model, idx, &cert.a, 0)?;
            let b = preimage.cover(model, idx, &cert.b, cert.g.len())?;
            Ok((hits, a, b))
        })
        .collect::<Result<Vec<_>, ParadoxError>>()?;

    let names = ["partition", "cover_g_A", "cover_h_B"];
    let mut equations: Vec<EquationReport> = names
        .iter()
        .map(|n| EquationReport {
            equation: n.to_string(),
            checkable: 0,
            covered_once: 0,
            violations: 0,
            boundary_defects: 0,
            samples: Vec::new(),
        })
        .collect();
    for (y, (hits, a, b)) in window.iter().zip(rows) {
        let outcomes = [Cover::Checked(hits), a, b];
        for (eq, outcome) in equations.iter_mut().zip(outcomes) {
            match outcome {
                Cover::Boundary => eq.boundary_defects += 1,
                Cover::Checked(n) => {
                    eq.checkable += 1;
                    if n == 1 {
                        eq.covered_once += 1;
                    } else {
                        eq.violations += 1;
                        if eq.samples.len() < SAMPLE_LIMIT {
                            eq.samples.push(y.to_string());
                        }
                    }
                }
            }
        }
    }
    Ok(WindowReport {
        window_size: window.len(),
        equations,
    })
}

/// Preimage lookups `t^{-1} y` for every translator, as window elements or
/// `None` outside the window.
struct Preimages {
    table: Vec<Vec<Option<Element>>>,
}

impl Preimages {
    fn new(
        model: &GroupModel,
        window: &FiniteWindow,
        evaluation: Evaluation<'_>,
        cert: &ParadoxCertificate,
    ) -> Result<Self, ParadoxError> {
        let mut table = Vec::new();
        for t in cert.g.iter().chain(&cert.h) {
            let col = match evaluation {
                Evaluation::Direct => {
                    let t_inv = model.inv(t)?;
                    window
                        .iter()
                        .map(|y| {
                            let x = model.mul(&t_inv, y)?;
                            Ok(window.contains(&x).then_some(x))
                        })
                        .collect::<Result<Vec<_>, GroupError>>()?
                }
                Evaluation::Perturbed(action) => {
                    if action.window != *window {
                        return Err(ParadoxError::Precondition(
                            "perturbed evaluation needs the action's own window".into(),
                        ));
                    }
                    let row = action.row(t).ok_or_else(|| ParadoxError::MissingRow(t.to_string()))?;
                    let mut inv = vec![None; window.len()];
                    for (i, &j) in row.iter().enumerate() {
                        if j < inv.len() {
                            inv[j] = Some(window.as_slice()[i].clone());
                        }
                    }
                    inv
                }
            };
            table.push(col);
        }
        Ok(Preimages { table })
    }

    fn cover(&self, model: &GroupModel, y: usize, pieces: &[Classifier], offset: usize) -> Result<Cover, ParadoxError> {
        let mut n = 0;
        for (k, c) in pieces.iter().enumerate() {
            match &self.table[offset + k][y] {
                None => return Ok(Cover::Boundary),
                Some(x) => {
                    if c.eval(model, x)? {
                        n += 1;
                    }
                }
            }
        }
        Ok(Cover::Checked(n))
    }
}
