//! Tolerance-based grouping of symbols with union-find closure.

use alloc::vec::Vec;

use crate::dist::DeterministicMap;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: alloc::vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Canonical labeling: classes numbered by smallest member.
    pub fn into_map(mut self) -> DeterministicMap {
        let roots: Vec<usize> = (0..self.parent.len()).map(|i| self.find(i)).collect();
        DeterministicMap::canonical(&roots).expect("nonempty domain")
    }
}

/// ℓ∞ distance between equally long vectors.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Groups `n` vectors, merging any two within `tol` in ℓ∞ and closing the
/// relation transitively. Near-duplicates chained through intermediate
/// vectors end up in one class.
pub fn group_by_linf<'a>(
    n: usize,
    vector: impl Fn(usize) -> &'a [f64],
    tol: f64,
) -> DeterministicMap {
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if linf(vector(i), vector(j)) <= tol {
                uf.union(i, j);
            }
        }
    }
    uf.into_map()
}
