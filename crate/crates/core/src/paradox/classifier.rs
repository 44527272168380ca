use serde::{Deserialize, Serialize};

use super::ParadoxError;
use crate::group::{letter_code, Element, GroupModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// A serializable membership rule for one piece.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    Always,
    Never,
    Identity,
    /// Reduced word starting with the given letter.
    FirstLetter(String),
    /// A nonempty power of one letter.
    PowerOf(String),
    CoordinateSign {
        coord: usize,
        sign: Sign,
    },
    Residue {
        coord: usize,
        modulus: u64,
        residue: u64,
    },
    /// Explicit finite set, matched on the display form.
    Member(Vec<String>),
    Not(Box<Classifier>),
    All(Vec<Classifier>),
    Any(Vec<Classifier>),
}

impl Classifier {
    pub fn eval(&self, model: &GroupModel, x: &Element) -> Result<bool, ParadoxError> {
        let non_total = || ParadoxError::NonTotal {
            rule: self.name().to_string(),
            element: format!("{x} ({})", x.kind_name()),
        };
        Ok(match self {
            Classifier::Always => true,
            Classifier::Never => false,
            Classifier::Identity => model.is_identity(x),
            Classifier::FirstLetter(l) => {
                let code = single_letter(l).ok_or_else(non_total)?;
                x.word().ok_or_else(non_total)?.first() == Some(&code)
            }
            Classifier::PowerOf(l) => {
                let code = single_letter(l).ok_or_else(non_total)?;
                let w = x.word().ok_or_else(non_total)?;
                !w.is_empty() && w.iter().all(|c| *c == code)
            }
            Classifier::CoordinateSign { coord, sign } => {
                let v = integer_coord(x, *coord).ok_or_else(non_total)?;
                *sign
                    == match v.signum() {
                        -1 => Sign::Negative,
                        0 => Sign::Zero,
                        _ => Sign::Positive,
                    }
            }
            Classifier::Residue {
                coord,
                modulus,
                residue,
            } => {
                if *modulus == 0 {
                    return Err(non_total());
                }
                let v = integer_coord(x, *coord).ok_or_else(non_total)?;
                v.rem_euclid(*modulus as i64) as u64 == *residue
            }
            Classifier::Member(items) => {
                let s = x.to_string();
                items.contains(&s)
            }
            Classifier::Not(c) => !c.eval(model, x)?,
            Classifier::All(cs) => {
                for c in cs {
                    if !c.eval(model, x)? {
                        return Ok(false);
                    }
                }
                true
            }
            Classifier::Any(cs) => {
                for c in cs {
                    if c.eval(model, x)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Classifier::Always => "always",
            Classifier::Never => "never",
            Classifier::Identity => "identity",
            Classifier::FirstLetter(_) => "first_letter",
            Classifier::PowerOf(_) => "power_of",
            Classifier::CoordinateSign { .. } => "coordinate_sign",
            Classifier::Residue { .. } => "residue",
            Classifier::Member(_) => "member",
            Classifier::Not(_) => "not",
            Classifier::All(_) => "all",
            Classifier::Any(_) => "any",
        }
    }

    /// One copy per leaf, with just that leaf negated.
    pub fn leaf_negations(&self) -> Vec<Classifier> {
        match self {
            Classifier::Not(c) => c
                .leaf_negations()
                .into_iter()
                .map(|v| Classifier::Not(Box::new(v)))
                .collect(),
            Classifier::All(cs) | Classifier::Any(cs) => {
                let mut out = Vec::new();
                for (i, c) in cs.iter().enumerate() {
                    for v in c.leaf_negations() {
                        let mut next = cs.clone();
                        next[i] = v;
                        out.push(match self {
                            Classifier::All(_) => Classifier::All(next),
                            _ => Classifier::Any(next),
                        });
                    }
                }
                out
            }
            leaf => vec![Classifier::Not(Box::new(leaf.clone()))],
        }
    }
}

fn single_letter(s: &str) -> Option<u8> {
    let mut it = s.chars();
    let c = it.next()?;
    if it.next().is_some() {
        return None;
    }
    letter_code(c)
}

fn integer_coord(x: &Element, coord: usize) -> Option<i64> {
    match x {
        Element::Lattice(v) => v.get(coord).copied(),
        Element::Heisenberg(t) => t.get(coord).copied(),
        Element::Cyclic(k) if coord == 0 => i64::try_from(*k).ok(),
        _ => None,
    }
}
