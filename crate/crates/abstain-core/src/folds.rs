//! Deterministic k-fold index splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// A partition of `0..n` into disjoint test folds. The train set of a fold
/// is everything outside it.
#[derive(Debug, Clone)]
pub struct Folds {
    n: usize,
    folds: Vec<Vec<usize>>,
}

impl Folds {
    /// Splits `0..n` into `k` folds after a seeded shuffle. Fold sizes differ
    /// by at most one, larger folds first (n=10, k=4 gives 3,3,2,2).
    pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(CoreError::InvalidFoldCount { k, n });
        }
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);

        let base = n / k;
        let extra = n % k;
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for i in 0..k {
            let size = base + usize::from(i < extra);
            let mut fold: Vec<usize> = indices[start..start + size].to_vec();
            fold.sort_unstable();
            folds.push(fold);
            start += size;
        }
        Ok(Self { n, folds })
    }

    /// One fold covering everything: train and test are both `0..n`. Used
    /// when a caller asks for k=1, where a disjoint split is impossible.
    pub fn single(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::InvalidFoldCount { k: 1, n });
        }
        Ok(Self {
            n,
            folds: vec![(0..n).collect()],
        })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Test indices of fold `i`, sorted ascending.
    pub fn test_indices(&self, i: usize) -> &[usize] {
        &self.folds[i]
    }

    /// Train indices of fold `i`: the complement, except for a single fold
    /// where train equals test.
    pub fn train_indices(&self, i: usize) -> Vec<usize> {
        if self.folds.len() == 1 {
            return self.folds[0].clone();
        }
        let mut in_test = vec![false; self.n];
        for &j in &self.folds[i] {
            in_test[j] = true;
        }
        (0..self.n).filter(|&j| !in_test[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_sizes_largest_first() {
        let f = Folds::kfold(10, 4, 7).unwrap();
        let sizes: Vec<usize> = (0..4).map(|i| f.test_indices(i).len()).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
    }

    #[test]
    fn folds_partition_the_index_range() {
        let f = Folds::kfold(23, 5, 99).unwrap();
        let mut all: Vec<usize> = (0..5).flat_map(|i| f.test_indices(i).to_vec()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_split_different_seed_differs() {
        let a = Folds::kfold(50, 4, 3).unwrap();
        let b = Folds::kfold(50, 4, 3).unwrap();
        for i in 0..4 {
            assert_eq!(a.test_indices(i), b.test_indices(i));
        }
        let c = Folds::kfold(50, 4, 4).unwrap();
        let differs = (0..4).any(|i| a.test_indices(i) != c.test_indices(i));
        assert!(differs);
    }

    #[test]
    fn train_is_complement_of_test() {
        let f = Folds::kfold(17, 3, 0).unwrap();
        for i in 0..3 {
            let train = f.train_indices(i);
            let test = f.test_indices(i);
            assert_eq!(train.len() + test.len(), 17);
            assert!(train.iter().all(|j| !test.contains(j)));
        }
    }

    #[test]
    fn single_fold_trains_and_tests_on_everything() {
        let f = Folds::single(5).unwrap();
        assert_eq!(f.k(), 1);
        assert_eq!(f.test_indices(0), &[0, 1, 2, 3, 4]);
        assert_eq!(f.train_indices(0), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(Folds::kfold(5, 0, 0).is_err());
        assert!(Folds::kfold(5, 6, 0).is_err());
        assert!(Folds::single(0).is_err());
    }
}
