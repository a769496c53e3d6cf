//! Random regular graphs via the pairing (configuration) model.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{canonical_fingerprint, Fingerprint, Graph};
use crate::error::{Error, Result};

const MAX_PAIRING_ATTEMPTS: usize = 100_000;

/// Samples a simple `degree`-regular graph on `n` vertices.
///
/// Stubs are shuffled and paired; pairings with a loop or a repeated edge are
/// rejected and redrawn. Deterministic in `seed`. Connectivity is not enforced.
pub fn generate_random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    if degree == 3 && (n < 4 || !n.is_multiple_of(2)) {
        return Err(Error::InvalidGraph(format!(
            "a 3-regular graph needs an even vertex count >= 4, got {n}"
        )));
    }
    if degree >= n || !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidGraph(format!(
            "no {degree}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    let mut seen = HashSet::with_capacity(stubs.len() / 2);
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        stubs.shuffle(&mut rng);
        seen.clear();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        return Graph::new(n, seen.iter().copied());
    }
    Err(Error::InvalidGraph(format!(
        "pairing model found no simple graph in {MAX_PAIRING_ATTEMPTS} attempts"
    )))
}

/// Graphs drawn with isomorphism dedup, in discovery order.
#[derive(Debug, Clone)]
pub struct EnsembleDraw {
    pub graphs: Vec<Graph>,
    pub fingerprints: Vec<Fingerprint>,
    /// Total pairing-model draws consumed.
    pub draws: usize,
}

struct Dedup {
    rng: ChaCha8Rng,
    n: usize,
    seen: HashSet<Fingerprint>,
    out: EnsembleDraw,
}

impl Dedup {
    fn new(n: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n,
            seen: HashSet::new(),
            out: EnsembleDraw {
                graphs: Vec::new(),
                fingerprints: Vec::new(),
                draws: 0,
            },
        }
    }

    /// Draws one graph; returns whether it was a new isomorphism class.
    fn draw(&mut self) -> Result<bool> {
        let g = generate_random_regular(self.n, 3, self.rng.gen())?;
        self.out.draws += 1;
        let f = canonical_fingerprint(&g);
        if self.seen.insert(f) {
            self.out.graphs.push(g);
            self.out.fingerprints.push(f);
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Draws cubic graphs until `count` distinct fingerprints are found.
pub fn sample_distinct(n: usize, count: usize, seed: u64, max_draws: usize) -> Result<EnsembleDraw> {
    let mut d = Dedup::new(n, seed);
    while d.out.graphs.len() < count {
        if d.out.draws >= max_draws {
            return Err(Error::BudgetExhausted {
                draws: d.out.draws,
                found: d.out.graphs.len(),
                requested: count,
            });
        }
        d.draw()?;
    }
    Ok(d.out)
}

/// Draws cubic graphs until `window` consecutive draws add no new class.
///
/// The result approximates the set of all isomorphism classes; the discovered
/// count is whatever the sampler found.
pub fn collect_nonisomorphic(n: usize, seed: u64, window: usize) -> Result<EnsembleDraw> {
    let mut d = Dedup::new(n, seed);
    let mut stale = 0;
    while stale < window {
        if d.draw()? {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok(d.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_is_k4() {
        for seed in 0..5 {
            assert_eq!(
                generate_random_regular(4, 3, seed).unwrap(),
                Graph::complete(4).unwrap()
            );
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_random_regular(8, 3, 7).unwrap();
        let b = generate_random_regular(8, 3, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_n() {
        for n in [0, 2, 3, 5, 11] {
            assert!(generate_random_regular(n, 3, 0).is_err(), "n = {n}");
        }
    }

    #[test]
    fn cubic_invariants_hold() {
        for seed in 0..20 {
            let n = 4 + 2 * (seed as usize % 7);
            let g = generate_random_regular(n, 3, seed).unwrap();
            assert!(g.is_regular(3));
            assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
            assert_eq!(2 * g.edge_count(), 3 * n);
        }
    }

    #[test]
    fn n10_draws_cover_several_classes() {
        let fps: HashSet<_> = (0..200)
            .map(|s| canonical_fingerprint(&generate_random_regular(10, 3, s).unwrap()))
            .collect();
        assert!(fps.len() >= 2, "{} classes", fps.len());
    }

    #[test]
    fn sample_distinct_dedups() {
        let d = sample_distinct(8, 5, 1, 10_000).unwrap();
        let unique: HashSet<_> = d.fingerprints.iter().collect();
        assert_eq!(unique.len(), 5);
        assert!(d.draws >= 5);
    }

    #[test]
    fn budget_exhaustion_names_draws() {
        // K4 is the only cubic graph on four vertices.
        match sample_distinct(4, 2, 0, 50) {
            Err(Error::BudgetExhausted {
                draws,
                found,
                requested,
            }) => {
                assert_eq!((draws, found, requested), (50, 1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn n8_census_finds_all_six_classes() {
        // Five connected cubic graphs on eight vertices plus two disjoint K4.
        let d = collect_nonisomorphic(8, 0, 10_000).unwrap();
        assert_eq!(d.graphs.len(), 6);
        assert_eq!(d.graphs.iter().filter(|g| !g.is_connected()).count(), 1);
    }
}
