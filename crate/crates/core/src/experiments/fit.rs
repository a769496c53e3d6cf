use serde::Serialize;

use crate::error::{Error, Result};
use crate::feedback::LawKind;

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `y - (slope x + intercept)` per point.
    pub residuals: Vec<f64>,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LinearFit> {
    let m = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::InvalidParameter("a line fit needs at least two points".into()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("a line fit needs two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = points.iter().map(|&(x, y)| y - (slope * x + intercept)).collect();
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
    })
}

/// Depth-versus-size fit for one law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub law: LawKind,
    /// `(n, L_required)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn new(law: LawKind, points: Vec<(f64, f64)>) -> Result<Self> {
        let LinearFit {
            slope,
            intercept,
            residuals,
        } = fit_line(&points)?;
        Ok(Self {
            law,
            points,
            slope,
            intercept,
            residuals,
        })
    }
}
