use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feedback::LawKind;
use crate::problem::{collect_nonisomorphic, sample_distinct, Graph};
use crate::runner::{FeedbackRun, RunConfig};

/// Pointwise mean and population standard deviation of the approximation
/// ratio over an ensemble, indexed by layer (`mean_r[k - 1]` is layer `k`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleCurve {
    pub n: usize,
    pub law: LawKind,
    pub dt: f64,
    pub mean_r: Vec<f64>,
    pub std_r: Vec<f64>,
    pub graph_count: usize,
    /// Per-graph ratio curves, in ensemble order.
    #[serde(skip)]
    pub per_graph: Vec<Vec<f64>>,
}

impl EnsembleCurve {
    pub fn final_mean(&self) -> f64 {
        *self.mean_r.last().expect("curves have at least one layer")
    }
}

/// `mean_r[k + 1] >= mean_r[k] - eta` for every `k`.
pub fn is_monotone(mean_r: &[f64], eta: f64) -> bool {
    mean_r.windows(2).all(|w| w[1] >= w[0] - eta)
}

fn check_ensemble(graphs: &[Graph]) -> Result<usize> {
    let n = graphs.first().ok_or(Error::EmptyEnsemble)?.n();
    if graphs.iter().any(|g| g.n() != n) {
        return Err(Error::InvalidParameter("ensemble graphs differ in size".into()));
    }
    Ok(n)
}

/// Runs every graph in lockstep, one layer at a time. With `stop_eta` set the
/// simulation ends at the first layer where the mean drops by more than the
/// slack, and `None` is returned.
fn simulate(
    graphs: &[Graph],
    law: LawKind,
    dt: f64,
    l_max: usize,
    stop_eta: Option<f64>,
) -> Result<Option<EnsembleCurve>> {
    let n = check_ensemble(graphs)?;
    let mut runs = graphs
        .iter()
        .map(|g| FeedbackRun::new(&RunConfig::new(g.clone(), dt, l_max, law)))
        .collect::<Result<Vec<_>>>()?;
    let count = runs.len() as f64;
    let mut per_graph = vec![Vec::with_capacity(l_max); runs.len()];
    let mut mean_r = Vec::with_capacity(l_max);
    let mut std_r = Vec::with_capacity(l_max);
    for _ in 0..l_max {
        let ratios = runs
            .par_iter_mut()
            .map(|r| r.step().map(|rec| rec.approx_ratio))
            .collect::<Result<Vec<f64>>>()?;
        // Sequential fold in ensemble order keeps the statistics reproducible.
        let mean = ratios.iter().sum::<f64>() / count;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / count;
        if let (Some(eta), Some(&prev)) = (stop_eta, mean_r.last()) {
            if mean < prev - eta {
                return Ok(None);
            }
        }
        for (curve, r) in per_graph.iter_mut().zip(ratios) {
            curve.push(r);
        }
        mean_r.push(mean);
        std_r.push(var.sqrt());
    }
    Ok(Some(EnsembleCurve {
        n,
        law,
        dt,
        mean_r,
        std_r,
        graph_count: graphs.len(),
        per_graph,
    }))
}

pub fn ensemble_curve(graphs: &[Graph], law: LawKind, dt: f64, l_max: usize) -> Result<EnsembleCurve> {
    Ok(simulate(graphs, law, dt, l_max, None)?.expect("no early stop without a slack"))
}

/// Monotonicity predicate on the ensemble mean, stopping at the first drop.
///
/// Returns the full curve when the predicate holds, `None` otherwise. Agrees
/// with `is_monotone(&ensemble_curve(..).mean_r, eta)`.
pub fn probe_monotone(
    graphs: &[Graph],
    law: LawKind,
    dt: f64,
    l_max: usize,
    eta: f64,
) -> Result<Option<EnsembleCurve>> {
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    simulate(graphs, law, dt, l_max, Some(eta))
}

/// How a per-size ensemble is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnsembleKind {
    /// Every isomorphism class the sampler finds before `window` consecutive
    /// draws add nothing new.
    AllNonisomorphic { window: usize },
    /// `count` distinct classes.
    Random { count: usize },
}

impl EnsembleKind {
    /// All classes up to 10 vertices, `count` random classes above.
    pub fn default_for(n: usize, count: usize) -> Self {
        if n <= 10 {
            Self::AllNonisomorphic { window: 10_000 }
        } else {
            Self::Random { count }
        }
    }
}

pub fn standard_ensemble(n: usize, kind: EnsembleKind, seed: u64) -> Result<Vec<Graph>> {
    let draw = match kind {
        EnsembleKind::AllNonisomorphic { window } => collect_nonisomorphic(n, seed, window)?,
        EnsembleKind::Random { count } => sample_distinct(n, count, seed, 1000 * count.max(1))?,
    };
    Ok(draw.graphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_random_regular;

    fn graphs(n: usize, count: u64) -> Vec<Graph> {
        (0..count).map(|s| generate_random_regular(n, 3, s).unwrap()).collect()
    }

    #[test]
    fn monotone_predicate() {
        assert!(is_monotone(&[0.5; 10], 1e-6));
        assert!(is_monotone(&[], 1e-6));
        let eta = 1e-6;
        assert!(!is_monotone(&[0.5, 0.6, 0.6 - 10.0 * eta, 0.7], eta));
        assert!(is_monotone(&[0.5, 0.6, 0.6 - 0.5 * eta, 0.7], eta));
    }

    #[test]
    fn singleton_ensemble_has_zero_spread() {
        let c = ensemble_curve(&graphs(8, 1), LawKind::FirstOrder, 0.05, 50).unwrap();
        assert_eq!(c.graph_count, 1);
        assert!(c.std_r.iter().all(|&s| s == 0.0));
        assert_eq!(c.mean_r, c.per_graph[0]);
    }

    #[test]
    fn curve_statistics_are_bounded() {
        let c = ensemble_curve(&graphs(8, 4), LawKind::SecondOrderHybrid, 0.1, 80).unwrap();
        assert_eq!(c.mean_r.len(), 80);
        assert_eq!(c.std_r.len(), 80);
        assert!(c.mean_r.iter().all(|&r| (0.0..=1.0).contains(&r)));
        assert!(c.std_r.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn probe_agrees_with_full_curve() {
        let gs = graphs(8, 3);
        for dt in [0.02, 0.08, 0.2] {
            let full = ensemble_curve(&gs, LawKind::FirstOrder, dt, 150).unwrap();
            let probe = probe_monotone(&gs, LawKind::FirstOrder, dt, 150, 1e-6).unwrap();
            assert_eq!(probe.is_some(), is_monotone(&full.mean_r, 1e-6), "dt = {dt}");
            if let Some(p) = probe {
                assert_eq!(p.mean_r, full.mean_r);
            }
        }
    }

    #[test]
    fn empty_or_mixed_ensembles_are_rejected() {
        assert!(matches!(
            ensemble_curve(&[], LawKind::FirstOrder, 0.1, 5),
            Err(Error::EmptyEnsemble)
        ));
        let mixed = vec![
            generate_random_regular(6, 3, 0).unwrap(),
            generate_random_regular(8, 3, 0).unwrap(),
        ];
        assert!(ensemble_curve(&mixed, LawKind::FirstOrder, 0.1, 5).is_err());
    }
}
