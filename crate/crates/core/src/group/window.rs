use super::Element;

/// Finite subset of a group, kept sorted in canonical order without
/// duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FiniteWindow {
    elems: Vec<Element>,
}

impl FiniteWindow {
    pub fn new<I: IntoIterator<Item = Element>>(elems: I) -> Self {
        let mut elems: Vec<Element> = elems.into_iter().collect();
        elems.sort();
        elems.dedup();
        FiniteWindow { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[Element] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elems.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Element> {
        self.elems.get(i)
    }

    pub fn index_of(&self, x: &Element) -> Option<usize> {
        self.elems.binary_search(x).ok()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.index_of(x).is_some()
    }

    pub fn intersection(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow {
            elems: self.elems.iter().filter(|x| other.contains(x)).cloned().collect(),
        }
    }

    pub fn union(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow::new(self.elems.iter().chain(other.elems.iter()).cloned())
    }

    pub fn difference(&self, other: &FiniteWindow) -> FiniteWindow {
        FiniteWindow {
            elems: self.elems.iter().filter(|x| !other.contains(x)).cloned().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &FiniteWindow) -> bool {
        self.elems.iter().all(|x| !other.contains(x))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.elems.iter().map(|x| x.to_string()).collect()
    }

    pub fn into_vec(self) -> Vec<Element> {
        self.elems
    }
}

impl FromIterator<Element> for FiniteWindow {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        FiniteWindow::new(iter)
    }
}

impl<'a> IntoIterator for &'a FiniteWindow {
    type Item = &'a Element;
    type IntoIter = std::slice::Iter<'a, Element>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}
