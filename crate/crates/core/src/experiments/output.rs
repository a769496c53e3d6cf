//! Plot-ready CSV tables and the JSON summary.

use std::io::Write;

use serde::Serialize;

use super::ensemble::EnsembleCurve;
use super::studies::ScalingReport;
use crate::error::Result;
use crate::runner::fmt_real;

/// `curve_<law>_n<n>_dt<dt>.csv`.
pub fn curve_file_name(curve: &EnsembleCurve) -> String {
    format!("curve_{}_n{}_dt{}.csv", curve.law, curve.n, curve.dt)
}

/// One row per layer: `k,mean_r,std_r`.
pub fn write_curve_csv<W: Write>(curve: &EnsembleCurve, header: &[String], mut w: W) -> Result<()> {
    writeln!(
        w,
        "# law {} n {} dt {} graphs {}",
        curve.law,
        curve.n,
        fmt_real(curve.dt),
        curve.graph_count
    )?;
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "k,mean_r,std_r")?;
    for (i, (m, s)) in curve.mean_r.iter().zip(&curve.std_r).enumerate() {
        writeln!(w, "{},{},{}", i + 1, fmt_real(*m), fmt_real(*s))?;
    }
    Ok(())
}

/// One row per size: `n,graph_count,dt_c,l_required,saturation,evaluations`.
pub fn write_scaling_csv<W: Write>(report: &ScalingReport, header: &[String], mut w: W) -> Result<()> {
    writeln!(w, "# law {}", report.law)?;
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "n,graph_count,dt_c,l_required,saturation,evaluations")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n,
            r.graph_count,
            fmt_real(r.dt_c),
            r.l_required,
            fmt_real(r.saturation),
            r.evaluations
        )?;
    }
    Ok(())
}

/// Machine-readable digest of a study run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub config: serde_json::Value,
    pub dt_c: Vec<SummaryDtC>,
    pub slopes: Vec<SummarySlope>,
    pub saturations: Vec<SummarySaturation>,
    pub thresholds: Vec<SummaryThreshold>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryDtC {
    pub law: String,
    pub n: usize,
    pub dt_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummarySlope {
    pub law: String,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummarySaturation {
    pub law: String,
    pub n: usize,
    pub dt: f64,
    pub r_final: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryThreshold {
    pub law: String,
    pub n: usize,
    pub dt: f64,
    pub l_required: Option<usize>,
    pub monotone: bool,
}

impl Summary {
    pub fn add_scaling(&mut self, report: &ScalingReport) {
        let law = report.law.to_string();
        for r in &report.rows {
            self.dt_c.push(SummaryDtC {
                law: law.clone(),
                n: r.n,
                dt_c: r.dt_c,
            });
            self.saturations.push(SummarySaturation {
                law: law.clone(),
                n: r.n,
                dt: r.dt_c,
                r_final: r.saturation,
            });
        }
        self.slopes.push(SummarySlope {
            law,
            slope: report.fit.slope,
            intercept: report.fit.intercept,
        });
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::LawKind;

    #[test]
    fn curve_csv_layout() {
        let c = EnsembleCurve {
            n: 8,
            law: LawKind::FirstOrder,
            dt: 0.05,
            mean_r: vec![0.5, 0.75],
            std_r: vec![0.0, 0.125],
            graph_count: 2,
            per_graph: vec![],
        };
        assert_eq!(curve_file_name(&c), "curve_fo_n8_dt0.05.csv");
        let mut buf = Vec::new();
        write_curve_csv(&c, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "k,mean_r,std_r");
        assert_eq!(rows[2], "2,7.5000000000000000e-1,1.2500000000000000e-1");
    }
}
