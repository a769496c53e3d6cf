//! Isomorphism-invariant graph fingerprints.
//!
//! Up to [`EXACT_MAX_VERTICES`] vertices the fingerprint digests a canonical
//! form: the lexicographically smallest upper-triangle adjacency encoding over
//! the leaves of an individualization-refinement search tree. Equal
//! fingerprints then mean isomorphic graphs. Above that size it digests the
//! sorted adjacency spectrum rounded to `1e-9`, which is invariant but can
//! collide on cospectral non-isomorphic graphs.

use std::fmt;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::Graph;

pub const EXACT_MAX_VERTICES: usize = 10;

const SPECTRUM_SCALE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FingerprintKind {
    Exact,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    kind: FingerprintKind,
    digest: [u8; 32],
}

impl Fingerprint {
    pub fn kind(&self) -> FingerprintKind {
        self.kind
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            FingerprintKind::Exact => 'x',
            FingerprintKind::Spectral => 's',
        };
        write!(f, "{tag}")?;
        for byte in &self.digest[..12] {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

pub fn canonical_fingerprint(g: &Graph) -> Fingerprint {
    let mut hasher = Sha256::new();
    hasher.update((g.n() as u64).to_le_bytes());
    hasher.update((g.edge_count() as u64).to_le_bytes());
    let kind = if g.n() <= EXACT_MAX_VERTICES {
        hasher.update(canonical_form(g));
        FingerprintKind::Exact
    } else {
        for v in rounded_spectrum(g) {
            hasher.update(v.to_le_bytes());
        }
        FingerprintKind::Spectral
    };
    Fingerprint {
        kind,
        digest: hasher.finalize().into(),
    }
}

fn rounded_spectrum(g: &Graph) -> Vec<i64> {
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig.into_iter().map(|x| (x * SPECTRUM_SCALE).round() as i64).collect()
}

/// Canonical adjacency encoding, packed bits of the upper triangle in row order.
///
/// Exposed to the crate for tests; works for any `n <= 32`.
pub(crate) fn canonical_form(g: &Graph) -> Vec<u8> {
    let n = g.n();
    assert!(n <= 32, "canonical form supports at most 32 vertices");
    let mut adj = vec![0u32; n];
    for &(u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let search = Search { n, adj: &adj };
    let initial: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let mut best = None;
    search.descend(search.refine(initial), &mut best);
    best.expect("search tree has at least one leaf")
}

struct Search<'a> {
    n: usize,
    adj: &'a [u32],
}

impl Search<'_> {
    /// Colour refinement to the coarsest equitable partition finer than `colors`.
    ///
    /// New colours are ranks of (old colour, sorted neighbour colours), so the
    /// result depends only on the graph structure, not on vertex names.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut classes = count_classes(&colors);
        loop {
            let sigs: Vec<(u32, Vec<u32>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<u32> = neighbours(self.adj[v]).map(|w| colors[w]).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let mut distinct: Vec<&(u32, Vec<u32>)> = sigs.iter().collect();
            distinct.sort();
            distinct.dedup();
            colors = sigs
                .iter()
                .map(|s| distinct.binary_search(&s).expect("signature present") as u32)
                .collect();
            if distinct.len() == classes {
                return colors;
            }
            classes = distinct.len();
        }
    }

    fn descend(&self, colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
        let Some(cell) = self.target_cell(&colors) else {
            let code = self.encode(&colors);
            if best.as_ref().is_none_or(|b| code < *b) {
                *best = Some(code);
            }
            return;
        };
        let mut reps: Vec<usize> = Vec::with_capacity(cell.len());
        for &v in &cell {
            // Swapping twins inside one cell is an automorphism that fixes the
            // current partition, so their subtrees carry the same leaves.
            if reps.iter().any(|&r| self.twins(r, v)) {
                continue;
            }
            reps.push(v);
            let individualized = colors
                .iter()
                .enumerate()
                .map(|(w, &c)| if w == v { 2 * c } else { 2 * c + 1 })
                .collect();
            self.descend(self.refine(individualized), best);
        }
    }

    /// Smallest non-singleton cell, ties broken by colour.
    fn target_cell(&self, colors: &[u32]) -> Option<Vec<usize>> {
        let mut sizes = vec![0usize; self.n];
        for &c in colors {
            sizes[c as usize] += 1;
        }
        let color = (0..self.n).filter(|&c| sizes[c] > 1).min_by_key(|&c| (sizes[c], c))?;
        Some((0..self.n).filter(|&v| colors[v] as usize == color).collect())
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        (self.adj[u] & !(1 << v)) == (self.adj[v] & !(1 << u))
    }

    fn encode(&self, labels: &[u32]) -> Vec<u8> {
        let mut inverse = vec![0usize; self.n];
        for (v, &l) in labels.iter().enumerate() {
            inverse[l as usize] = v;
        }
        let bits = self.n * self.n.saturating_sub(1) / 2;
        let mut out = vec![0u8; bits.div_ceil(8)];
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[inverse[i]] & (1 << inverse[j]) != 0 {
                    out[k / 8] |= 0x80 >> (k % 8);
                }
                k += 1;
            }
        }
        out
    }
}

fn neighbours(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&w| mask & (1 << w) != 0)
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}
