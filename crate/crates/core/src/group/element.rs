use std::fmt;

use crate::rational::{format_rational, Rational};

/// A group element in canonical form.
///
/// Free-group words store letter codes: generator `i` is `2i`, its inverse
/// `2i + 1`, so a letter and its inverse differ only in the low bit and the
/// derived order sorts `a < A < b < B`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Lattice(Vec<i64>),
    Free(Vec<u8>),
    Heisenberg([i64; 3]),
    Circle(Rational),
    Torus(Vec<Rational>),
    Cyclic(u64),
}

impl Element {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Element::Lattice(_) => "lattice",
            Element::Free(_) => "free",
            Element::Heisenberg(_) => "heisenberg",
            Element::Circle(_) => "circle",
            Element::Torus(_) => "torus",
            Element::Cyclic(_) => "cyclic",
        }
    }

    /// Free-group word; `None` for other kinds.
    pub fn word(&self) -> Option<&[u8]> {
        match self {
            Element::Free(w) => Some(w),
            _ => None,
        }
    }
}

pub(crate) fn letter(code: u8) -> char {
    let base = if code & 1 == 0 { b'a' } else { b'A' };
    (base + code / 2) as char
}

pub(crate) fn letter_code(c: char) -> Option<u8> {
    match c {
        'a'..='z' => Some((c as u8 - b'a') * 2),
        'A'..='Z' => Some((c as u8 - b'A') * 2 + 1),
        _ => None,
    }
}

/// Appends `code` to a reduced word, cancelling against the last letter.
pub(crate) fn push_reduced(word: &mut Vec<u8>, code: u8) {
    if word.last() == Some(&(code ^ 1)) {
        word.pop();
    } else {
        word.push(code);
    }
}

pub(crate) fn invert_word(word: &[u8]) -> Vec<u8> {
    word.iter().rev().map(|c| c ^ 1).collect()
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Lattice(v) => f.write_str(&join(v, |x| x.to_string())),
            Element::Free(w) => f.write_str(&join(w, |c| letter(*c).to_string())),
            Element::Heisenberg(t) => f.write_str(&join(t, |x| x.to_string())),
            Element::Circle(r) => f.write_str(&format_rational(r)),
            Element::Torus(v) => f.write_str(&join(v, format_rational)),
            Element::Cyclic(k) => write!(f, "{k}"),
        }
    }
}
