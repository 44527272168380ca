use std::collections::BTreeMap;

use super::PerturbError;
use crate::folner::GroupAction;
use crate::group::{Element, FiniteWindow};

/// A permutation `γ` of a window with `γ(x) = g_P x` on each piece `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WobblingElement {
    pub window: FiniteWindow,
    pub image: Vec<usize>,
    /// Translator of each window point.
    pub translators: Vec<Element>,
    /// Pieces keyed by translator, in canonical order.
    pub pieces: Vec<(Element, FiniteWindow)>,
}

impl WobblingElement {
    /// Applies the translators piecewise; equals `γ` for a valid
    /// decomposition.
    pub fn reapply(&self, action: &dyn GroupAction) -> Option<Vec<Element>> {
        let mut out = vec![None; self.window.len()];
        for (g, piece) in &self.pieces {
            for x in piece {
                out[self.window.index_of(x)?] = Some(action.act(g, x)?);
            }
        }
        out.into_iter().collect()
    }
}

/// Assigns each `x` the first `g` in `pool` with `γ(x) = g x`.
pub fn decompose_wobbling(
    window: &FiniteWindow,
    image: &[usize],
    pool: &FiniteWindow,
    action: &dyn GroupAction,
) -> Result<WobblingElement, PerturbError> {
    if image.len() != window.len() {
        return Err(PerturbError::NotPermutation(format!(
            "{} images for {} points",
            image.len(),
            window.len()
        )));
    }
    let mut hit = vec![false; window.len()];
    for &j in image {
        if j >= window.len() || std::mem::replace(&mut hit[j], true) {
            return Err(PerturbError::NotPermutation(format!(
                "image index {j} repeats or is out of range"
            )));
        }
    }
    let mut translators = Vec::with_capacity(window.len());
    let mut pieces: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
    for (x, &j) in window.iter().zip(image) {
        let target = &window.as_slice()[j];
        let g = pool
            .iter()
            .find(|g| action.act(g, x).as_ref() == Some(target))
            .ok_or_else(|| PerturbError::NotWobbling { witness: x.to_string() })?;
        translators.push(g.clone());
        pieces.entry(g.clone()).or_default().push(x.clone());
    }
    Ok(WobblingElement {
        window: window.clone(),
        image: image.to_vec(),
        translators,
        pieces: pieces.into_iter().map(|(g, xs)| (g, FiniteWindow::new(xs))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folner::LeftTranslation;
    use crate::group::GroupModel;

    #[test]
    fn rotation_is_one_piece() {
        let c = GroupModel::circle();
        let w = c.grid_sample(8, None).unwrap();
        let image: Vec<usize> = (0..8).map(|i| (i + 2) % 8).collect();
        let pool = c.parse_window(&["1/4"]).unwrap();
        let out = decompose_wobbling(&w, &image, &pool, &LeftTranslation(&c)).unwrap();
        assert_eq!(out.pieces.len(), 1);
        assert_eq!(out.pieces[0].0, c.parse_element("1/4").unwrap());
    }

    #[test]
    fn swapped_arcs_give_two_pieces() {
        let c = GroupModel::circle();
        let w = c.parse_window(&["0", "1/8", "1/4", "3/8"]).unwrap();
        let image = vec![2, 3, 0, 1];
        let pool = c.parse_window(&["1/4", "-1/4"]).unwrap();
        let out = decompose_wobbling(&w, &image, &pool, &LeftTranslation(&c)).unwrap();
        assert_eq!(out.pieces.len(), 2);
        let back = out.reapply(&LeftTranslation(&c)).unwrap();
        let expected: Vec<Element> = image.iter().map(|&j| w.as_slice()[j].clone()).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn missing_translator_names_witness() {
        let c = GroupModel::circle();
        let w = c.parse_window(&["0", "1/8", "1/4", "3/8"]).unwrap();
        let pool = c.parse_window(&["1/4"]).unwrap();
        let err = decompose_wobbling(&w, &[2, 3, 0, 1], &pool, &LeftTranslation(&c)).unwrap_err();
        assert_eq!(err, PerturbError::NotWobbling { witness: "1/4".into() });
    }
}
