//! Word length in the discrete Heisenberg group over the generators
//! `a = (1,0,0)` and `b = (0,1,0)`, computed by breadth-first search and
//! cached. The search grows lazily until the queried element is reached or
//! the cache limit is hit.

use std::collections::hash_map::{Entry, HashMap};

pub(crate) type Triple = [i64; 3];

pub(crate) fn mul(x: &Triple, y: &Triple) -> Triple {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]]
}

pub(crate) fn inv(x: &Triple) -> Triple {
    [-x[0], -x[1], -x[2] + x[0] * x[1]]
}

const GENERATORS: [Triple; 4] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];

#[derive(Debug)]
pub(crate) struct BallCache {
    dist: HashMap<Triple, u32>,
    frontier: Vec<Triple>,
    radius: u32,
    limit: usize,
}

impl BallCache {
    pub(crate) fn new(limit: usize) -> Self {
        let mut dist = HashMap::new();
        dist.insert([0, 0, 0], 0);
        BallCache {
            dist,
            frontier: vec![[0, 0, 0]],
            radius: 0,
            limit,
        }
    }

    pub(crate) fn radius(&self) -> u32 {
        self.radius
    }

    pub(crate) fn lookup(&self, x: &Triple) -> Option<u32> {
        self.dist.get(x).copied()
    }

    /// Explores one more sphere. Returns false when the limit would be
    /// exceeded.
    pub(crate) fn grow(&mut self) -> bool {
        if self.dist.len() >= self.limit {
            return false;
        }
        let next_radius = self.radius + 1;
        let mut next = Vec::new();
        for x in &self.frontier {
            for s in &GENERATORS {
                let y = mul(x, s);
                if let Entry::Vacant(e) = self.dist.entry(y) {
                    e.insert(next_radius);
                    next.push(y);
                }
            }
        }
        next.sort();
        self.frontier = next;
        self.radius = next_radius;
        true
    }

    /// All elements of word length at most `r`, assuming the cache has
    /// been grown that far.
    pub(crate) fn ball(&self, r: u32) -> Vec<Triple> {
        let mut out: Vec<Triple> = self.dist.iter().filter(|(_, &d)| d <= r).map(|(x, _)| *x).collect();
        out.sort();
        out
    }

    pub(crate) fn count_within(&self, r: u32) -> usize {
        self.dist.values().filter(|&&d| d <= r).count()
    }
}

/// Lower bound for the word length, used to reject hopeless queries before
/// growing the cache: every generator changes `|a| + |b|` by one and the
/// central coordinate by at most the current `|a|`.
pub(crate) fn length_lower_bound(x: &Triple) -> u64 {
    let ab = x[0].unsigned_abs() + x[1].unsigned_abs();
    // |c| <= n^2/4 after n letters, so n >= 2 sqrt(|c|).
    let c = x[2].unsigned_abs();
    let mut n = 0u64;
    while n * n < 4 * c {
        n += 1;
    }
    ab.max(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_law() {
        let x = [1, 2, 3];
        let y = [-4, 5, 1];
        assert_eq!(mul(&x, &inv(&x)), [0, 0, 0]);
        assert_eq!(mul(&inv(&x), &x), [0, 0, 0]);
        assert_eq!(mul(&x, &y), [-3, 7, 9]);
    }

    #[test]
    fn small_spheres() {
        let mut cache = BallCache::new(1 << 20);
        for _ in 0..4 {
            assert!(cache.grow());
        }
        // Commutator [a,b] = (0,0,1) has length 4.
        assert_eq!(cache.lookup(&[0, 0, 1]), Some(4));
        assert_eq!(cache.lookup(&[1, 1, 0]), Some(2));
        assert_eq!(cache.lookup(&[1, 1, 1]), Some(2));
        assert_eq!(cache.count_within(1), 5);
        // Sphere sizes 1, 4, 12, 36 for the first radii.
        assert_eq!(cache.count_within(2), 17);
        assert_eq!(cache.count_within(3), 53);
    }

    #[test]
    fn lower_bound_is_sound_on_cached_ball() {
        let mut cache = BallCache::new(1 << 20);
        for _ in 0..8 {
            cache.grow();
        }
        for x in cache.ball(8) {
            assert!(length_lower_bound(&x) <= cache.lookup(&x).unwrap() as u64);
        }
    }
}
