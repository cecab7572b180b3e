//! Row-major storage for quantities indexed by unordered team pairs `i < j`.

/// Index arithmetic for the `k (k - 1) / 2` pairs of `k` teams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    k: usize,
}

impl PairIndex {
    pub fn new(k: usize) -> Self {
        PairIndex { k }
    }

    pub fn teams(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.k * self.k.saturating_sub(1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of pair `(i, j)`; panics unless `i < j < k`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        assert!(i < j && j < self.k, "pair ({i}, {j}) out of range for k = {}", self.k);
        // pairs before row i: sum_{r<i} (k - 1 - r)
        i * (2 * self.k - i - 1) / 2 + (j - i - 1)
    }

    /// Iterates `(position, i, j)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let k = self.k;
        (0..k)
            .flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
            .enumerate()
            .map(|(p, (i, j))| (p, i, j))
    }
}

/// Fills `out[p] = mu[i] - mu[j]` for every pair.
pub fn differences(mu: &[f64], out: &mut [f64]) {
    let idx = PairIndex::new(mu.len());
    debug_assert_eq!(out.len(), idx.len());
    for (p, i, j) in idx.iter() {
        out[p] = mu[i] - mu[j];
    }
}
