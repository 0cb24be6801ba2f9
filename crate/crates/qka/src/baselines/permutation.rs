//! Random reordering of an in-transit qubit sequence, revealed after receipt.

use crate::rng::RandomSource;

/// A bijection on sequence positions with its inverse cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    /// `forward[i]` is the permuted position of original position `i`.
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        let forward: Vec<usize> = (0..len).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    pub fn random(len: usize, rng: &mut RandomSource) -> Self {
        let mut forward: Vec<usize> = (0..len).collect();
        rng.shuffle(&mut forward);
        let mut inverse = vec![0; len];
        for (i, &p) in forward.iter().enumerate() {
            inverse[p] = i;
        }
        Self { forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Permuted position of original position `i`.
    pub fn forward(&self, i: usize) -> usize {
        self.forward[i]
    }

    /// Original position of permuted position `p`.
    pub fn inverse(&self, p: usize) -> usize {
        self.inverse[p]
    }

    /// Reorder a sequence: output position `forward[i]` holds input `i`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.len());
        let mut out = items.to_vec();
        for (i, item) in items.iter().enumerate() {
            out[self.forward[i]] = item.clone();
        }
        out
    }

    /// Undo [`Permutation::apply`].
    pub fn unapply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.len());
        let mut out = items.to_vec();
        for (p, item) in items.iter().enumerate() {
            out[self.inverse[p]] = item.clone();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_then_unapply_is_identity() {
        let mut rng = RandomSource::new(1);
        for len in [1usize, 2, 7, 16, 33] {
            for _ in 0..50 {
                let perm = Permutation::random(len, &mut rng);
                let items: Vec<usize> = (0..len).collect();
                let shuffled = perm.apply(&items);
                assert_eq!(perm.unapply(&shuffled), items);
            }
        }
    }

    #[test]
    fn forward_and_inverse_agree() {
        let mut rng = RandomSource::new(2);
        let perm = Permutation::random(12, &mut rng);
        for i in 0..12 {
            assert_eq!(perm.inverse(perm.forward(i)), i);
        }
    }

    #[test]
    fn identity_maps_in_place() {
        let perm = Permutation::identity(5);
        let items = vec![10, 20, 30, 40, 50];
        assert_eq!(perm.apply(&items), items);
    }
}
