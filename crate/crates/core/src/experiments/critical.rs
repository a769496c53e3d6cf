//! Critical time step: the largest `dt` at which the ensemble-mean ratio curve
//! is monotone, found by bisection on a grid aligned to the resolution.
//!
//! The predicate is assumed monotone in `dt` (true below the critical value,
//! false above). Bracket endpoints that violate this are reported as errors.

use serde::Serialize;

use super::ensemble::{probe_monotone, EnsembleCurve};
use crate::error::{Error, Result};
use crate::feedback::LawKind;
use crate::problem::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDt {
    pub n: usize,
    pub law: LawKind,
    pub dt_c: f64,
    pub resolution: f64,
    pub l_max: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalSearch {
    pub critical: CriticalDt,
    /// Curve at `dt_c`, where the predicate holds.
    #[serde(skip)]
    pub curve: EnsembleCurve,
    /// Every predicate evaluation, in order.
    pub evaluations: Vec<(f64, bool)>,
}

/// Memoized monotonicity predicate over one ensemble and law.
pub(crate) struct DtPredicate<'a> {
    graphs: &'a [Graph],
    law: LawKind,
    l_max: usize,
    eta: f64,
    cache: Vec<(f64, Option<EnsembleCurve>)>,
    pub(crate) evaluations: Vec<(f64, bool)>,
}

impl<'a> DtPredicate<'a> {
    pub(crate) fn new(graphs: &'a [Graph], law: LawKind, l_max: usize, eta: f64) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self {
            graphs,
            law,
            l_max,
            eta,
            cache: Vec::new(),
            evaluations: Vec::new(),
        })
    }

    pub(crate) fn eval(&mut self, dt: f64) -> Result<bool> {
        if let Some((_, c)) = self.cache.iter().find(|(d, _)| *d == dt) {
            return Ok(c.is_some());
        }
        let curve = probe_monotone(self.graphs, self.law, dt, self.l_max, self.eta)?;
        let holds = curve.is_some();
        self.evaluations.push((dt, holds));
        self.cache.push((dt, curve));
        Ok(holds)
    }

    fn curve(&self, dt: f64) -> Option<&EnsembleCurve> {
        self.cache.iter().find(|(d, _)| *d == dt).and_then(|(_, c)| c.as_ref())
    }

    /// Scans geometrically from `guess` until the predicate changes value.
    /// Every scanned point is a multiple of `resolution`.
    pub(crate) fn bracket(
        &mut self,
        guess: f64,
        factor: f64,
        dt_min: f64,
        dt_max: f64,
        resolution: f64,
    ) -> Result<(f64, f64)> {
        let valid = factor > 1.0 && guess > 0.0 && dt_min > 0.0 && dt_min <= dt_max && resolution > 0.0;
        if !valid {
            return Err(Error::InvalidParameter(format!(
                "bad bracket scan: guess {guess}, factor {factor}, range [{dt_min}, {dt_max}], resolution {resolution}"
            )));
        }
        let grid = Grid::new(resolution);
        let up = |dt: f64| grid.at(grid.index(dt * factor).max(grid.index(dt) + 1));
        let down = |dt: f64| grid.at(grid.index(dt / factor).min(grid.index(dt) - 1));
        let mut dt = grid.at(grid.index(guess.clamp(dt_min, dt_max)).max(1));
        if self.eval(dt)? {
            loop {
                let next = up(dt);
                if next > dt_max {
                    return Err(Error::Bracket(format!(
                        "predicate still true at {dt}; no failure below dt_max = {dt_max}"
                    )));
                }
                if !self.eval(next)? {
                    return Ok((dt, next));
                }
                dt = next;
            }
        } else {
            loop {
                let next = down(dt);
                if next < dt_min {
                    return Err(Error::Bracket(format!(
                        "predicate still false at {dt}; no success above dt_min = {dt_min}"
                    )));
                }
                if self.eval(next)? {
                    return Ok((next, dt));
                }
                dt = next;
            }
        }
    }

    pub(crate) fn bisect(&mut self, dt_lo: f64, dt_hi: f64, resolution: f64) -> Result<CriticalSearch> {
        if !(resolution > 0.0 && dt_lo > 0.0 && dt_hi > dt_lo) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt_lo < dt_hi and resolution > 0, got [{dt_lo}, {dt_hi}] at {resolution}"
            )));
        }
        if !self.eval(dt_lo)? {
            return Err(Error::Bracket(format!("predicate false at dt_lo = {dt_lo}")));
        }
        if self.eval(dt_hi)? {
            return Err(Error::Bracket(format!("predicate true at dt_hi = {dt_hi}")));
        }
        // Grid points dt_lo + i * resolution; the last index stands for dt_hi.
        let g = Grid::new(resolution);
        let top = ((dt_hi - dt_lo) / resolution - 1e-9).ceil().max(1.0) as usize;
        let base = g.on_grid(dt_lo).then(|| g.index(dt_lo));
        let grid = |i: usize| match (i == top, base) {
            (true, _) => dt_hi,
            (false, Some(b)) => g.at(b + i as i64),
            (false, None) => dt_lo + i as f64 * resolution,
        };
        let (mut lo, mut hi) = (0usize, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(grid(mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let dt_c = grid(lo);
        if hi == top && dt_c + resolution > dt_hi && self.eval(dt_c + resolution)? {
            return Err(Error::Bracket(format!(
                "predicate not monotone in dt: true at {} above a failure at {dt_hi}",
                dt_c + resolution
            )));
        }
        let curve = self.curve(dt_c).expect("predicate held at dt_c").clone();
        Ok(CriticalSearch {
            critical: CriticalDt {
                n: curve.n,
                law: self.law,
                dt_c,
                resolution,
                l_max: self.l_max,
                eta: self.eta,
            },
            curve,
            evaluations: self.evaluations.clone(),
        })
    }
}

/// Multiples of a resolution. When `1 / resolution` is an integer the points
/// are formed as `i / inv`, which is the correctly rounded decimal value.
#[derive(Debug, Clone, Copy)]
struct Grid {
    resolution: f64,
    inv: Option<f64>,
}

impl Grid {
    fn new(resolution: f64) -> Self {
        let inv = 1.0 / resolution;
        Self {
            resolution,
            inv: ((inv - inv.round()).abs() < 1e-9 * inv).then(|| inv.round()),
        }
    }

    fn index(&self, dt: f64) -> i64 {
        (dt / self.resolution).round() as i64
    }

    fn at(&self, i: i64) -> f64 {
        match self.inv {
            Some(inv) => i as f64 / inv,
            None => i as f64 * self.resolution,
        }
    }

    fn on_grid(&self, dt: f64) -> bool {
        (dt / self.resolution - self.index(dt) as f64).abs() < 1e-9
    }
}

/// Bisects `[dt_lo, dt_hi]` to `resolution`; the predicate must hold at
/// `dt_lo` and fail at `dt_hi`.
pub fn find_dt_c(
    graphs: &[Graph],
    law: LawKind,
    dt_lo: f64,
    dt_hi: f64,
    resolution: f64,
    l_max: usize,
    eta: f64,
) -> Result<CriticalSearch> {
    DtPredicate::new(graphs, law, l_max, eta)?.bisect(dt_lo, dt_hi, resolution)
}

/// Finds a bracket `(lo, hi)` with the predicate true at `lo` and false at
/// `hi` by scaling `guess` up or down by `factor` within `[dt_min, dt_max]`.
/// Both ends are multiples of `resolution`.
#[allow(clippy::too_many_arguments)]
pub fn bracket_dt_c(
    graphs: &[Graph],
    law: LawKind,
    guess: f64,
    factor: f64,
    dt_min: f64,
    dt_max: f64,
    resolution: f64,
    l_max: usize,
    eta: f64,
) -> Result<(f64, f64)> {
    DtPredicate::new(graphs, law, l_max, eta)?.bracket(guess, factor, dt_min, dt_max, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ensemble_curve, is_monotone};
    use crate::problem::generate_random_regular;

    fn ensemble() -> Vec<Graph> {
        (0..3).map(|s| generate_random_regular(8, 3, s).unwrap()).collect()
    }

    #[test]
    fn bisection_result_is_reverifiable() {
        let gs = ensemble();
        let (l_max, eta, res) = (150, 1e-6, 2e-3);
        let (lo, hi) = bracket_dt_c(&gs, LawKind::FirstOrder, 0.02, 1.5, 1e-3, 1.0, 1e-3, l_max, eta).unwrap();
        assert_eq!((lo * 1e3).round() / 1e3, lo);
        assert_eq!((hi * 1e3).round() / 1e3, hi);
        let s = find_dt_c(&gs, LawKind::FirstOrder, lo, hi, res, l_max, eta).unwrap();
        let dt_c = s.critical.dt_c;
        assert!(dt_c >= lo && dt_c < hi);
        let at = ensemble_curve(&gs, LawKind::FirstOrder, dt_c, l_max).unwrap();
        let above = ensemble_curve(&gs, LawKind::FirstOrder, dt_c + res, l_max).unwrap();
        assert!(is_monotone(&at.mean_r, eta));
        assert!(!is_monotone(&above.mean_r, eta));
        assert_eq!(s.curve.mean_r, at.mean_r);
    }

    #[test]
    fn invalid_brackets_fail_loudly() {
        let gs = ensemble();
        // Both endpoints monotone.
        assert!(matches!(
            find_dt_c(&gs, LawKind::FirstOrder, 0.001, 0.002, 1e-4, 50, 1e-6),
            Err(Error::Bracket(_))
        ));
        // Reversed.
        assert!(find_dt_c(&gs, LawKind::FirstOrder, 0.2, 0.1, 1e-3, 50, 1e-6).is_err());
        // Scan cannot leave the monotone region.
        assert!(matches!(
            bracket_dt_c(&gs, LawKind::FirstOrder, 0.001, 1.5, 1e-4, 0.002, 1e-4, 50, 1e-6),
            Err(Error::Bracket(_))
        ));
    }
}
