use serde::Serialize;

use super::critical::{CriticalSearch, DtPredicate};
use super::ensemble::{ensemble_curve, EnsembleCurve};
use super::fit::ScalingFit;
use super::{DEFAULT_ETA, R_GW};
use crate::error::{Error, Result};
use crate::feedback::LawKind;
use crate::problem::Graph;

/// Smallest layer `k` (1-based) with `mean_r[k - 1] >= r_target`.
pub fn layers_to_threshold(mean_r: &[f64], r_target: f64) -> Option<usize> {
    debug_assert!(r_target > 0.0 && r_target <= 1.0);
    mean_r.iter().position(|&r| r >= r_target).map(|i| i + 1)
}

impl EnsembleCurve {
    pub fn layers_to(&self, r_target: f64) -> Option<usize> {
        layers_to_threshold(&self.mean_r, r_target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingOptions {
    pub l_max: usize,
    pub eta: f64,
    pub resolution: f64,
    pub r_target: f64,
    /// Starting point of the bracket scan for the first size; later sizes
    /// start from the previous size's critical value.
    pub guess: f64,
    pub factor: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl ScalingOptions {
    pub fn for_law(law: LawKind) -> Self {
        Self {
            l_max: 1000,
            eta: DEFAULT_ETA,
            resolution: 1e-3,
            r_target: R_GW,
            guess: match law {
                LawKind::FirstOrder => 0.03,
                _ => 0.12,
            },
            factor: 1.15,
            dt_min: 1e-3,
            dt_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub graph_count: usize,
    pub dt_c: f64,
    /// Layers for the mean curve at `dt_c` to reach the target ratio.
    pub l_required: usize,
    /// Mean ratio after the last layer at `dt_c`.
    pub saturation: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub law: LawKind,
    pub options: ScalingOptions,
    pub rows: Vec<ScalingRow>,
    pub fit: ScalingFit,
    #[serde(skip)]
    pub searches: Vec<CriticalSearch>,
}

/// Critical time step, depth to target and saturation for each ensemble,
/// followed by a least-squares line through `(n, L_required)`.
pub fn scaling_study(ensembles: &[(usize, Vec<Graph>)], law: LawKind, opts: &ScalingOptions) -> Result<ScalingReport> {
    let mut rows = Vec::with_capacity(ensembles.len());
    let mut searches = Vec::with_capacity(ensembles.len());
    let mut guess = opts.guess;
    for (n, graphs) in ensembles {
        let mut pred = DtPredicate::new(graphs, law, opts.l_max, opts.eta)?;
        let (lo, hi) = pred
            .bracket(guess, opts.factor, opts.dt_min, opts.dt_max, opts.resolution)
            .map_err(|e| Error::Bracket(format!("n = {n}: {e}")))?;
        let search = pred
            .bisect(lo, hi, opts.resolution)
            .map_err(|e| Error::Bracket(format!("n = {n}: {e}")))?;
        let l_required = search
            .curve
            .layers_to(opts.r_target)
            .ok_or(Error::ThresholdNotReached {
                n: *n,
                target: opts.r_target,
                l_max: opts.l_max,
            })?;
        rows.push(ScalingRow {
            n: *n,
            graph_count: graphs.len(),
            dt_c: search.critical.dt_c,
            l_required,
            saturation: search.curve.final_mean(),
            evaluations: search.evaluations.len(),
        });
        guess = search.critical.dt_c;
        searches.push(search);
    }
    let points = rows.iter().map(|r| (r.n as f64, r.l_required as f64)).collect();
    Ok(ScalingReport {
        law,
        options: *opts,
        rows,
        fit: ScalingFit::new(law, points)?,
        searches,
    })
}

/// Pure second-order and hybrid curves on the same ensemble at one `dt`.
#[derive(Debug, Clone, Serialize)]
pub struct AppendixPair {
    pub dt: f64,
    pub pure: EnsembleCurve,
    pub hybrid: EnsembleCurve,
}

pub fn appendix_study(graphs: &[Graph], dt_list: &[f64], l_max: usize) -> Result<Vec<AppendixPair>> {
    dt_list
        .iter()
        .map(|&dt| {
            Ok(AppendixPair {
                dt,
                pure: ensemble_curve(graphs, LawKind::SecondOrderPure, dt, l_max)?,
                hybrid: ensemble_curve(graphs, LawKind::SecondOrderHybrid, dt, l_max)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_random_regular;

    #[test]
    fn threshold_examples() {
        assert_eq!(layers_to_threshold(&[0.5, 0.94, 0.96], R_GW), Some(2));
        assert_eq!(layers_to_threshold(&[0.5, 0.9, 0.93], R_GW), None);
        assert_eq!(layers_to_threshold(&[], R_GW), None);
    }

    #[test]
    fn threshold_is_monotone_in_target() {
        let curve: Vec<f64> = (0..100).map(|k| 1.0 - (-(k as f64) / 20.0).exp()).collect();
        let mut last = Some(0);
        for t in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999] {
            let k = layers_to_threshold(&curve, t);
            assert!(match (last, k) {
                (Some(a), Some(b)) => b >= a,
                (_, None) => true,
                (None, Some(_)) => false,
            });
            last = k;
        }
    }

    #[test]
    fn appendix_pairs_share_graphs() {
        let gs: Vec<Graph> = (0..2).map(|s| generate_random_regular(6, 3, s).unwrap()).collect();
        let pairs = appendix_study(&gs, &[0.05, 0.1], 30).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert_eq!(p.pure.law, LawKind::SecondOrderPure);
            assert_eq!(p.hybrid.law, LawKind::SecondOrderHybrid);
            assert_eq!(p.pure.graph_count, p.hybrid.graph_count);
            // beta_1 = 0 for both, so layer 1 agrees.
            assert_eq!(p.pure.mean_r[0], p.hybrid.mean_r[0]);
        }
    }

    #[test]
    fn small_scaling_study_runs() {
        let ensembles: Vec<(usize, Vec<Graph>)> = [6usize, 8]
            .iter()
            .map(|&n| (n, (0..2).map(|s| generate_random_regular(n, 3, s).unwrap()).collect()))
            .collect();
        let opts = ScalingOptions {
            l_max: 200,
            resolution: 5e-3,
            r_target: 0.9,
            ..ScalingOptions::for_law(LawKind::SecondOrderHybrid)
        };
        let rep = scaling_study(&ensembles, LawKind::SecondOrderHybrid, &opts).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.fit.points.len(), 2);
        for r in &rep.rows {
            assert!(r.dt_c > 0.0 && r.l_required >= 1);
        }
    }
}
