//! The closed-loop iteration: grow the circuit one `U_d(beta_k) U_p` layer at a
//! time, measure `(A, B, C)` on the new state and feed them to the control law
//! for the next layer.
//!
//! Conventions: `|psi_0> = |+>^n` and `beta_1 = 0` for every law. After layer
//! `k` the scalars and the energy are measured on `|psi_k>`, and
//! `beta_{k+1} = law(A_k, B_k, C_k)`. Runs always execute `max_layers` layers.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{self, FeedbackScalars, LayerParams, StateVector};
use crate::error::{Error, Result};
use crate::feedback::{default_eps_b, BetaDecision, Branch, LawKind};
use crate::problem::{build_hp_diagonal, solve_exact, DiagonalHamiltonian, Graph};

pub const TRACE_HEADER: &str = "k,beta,A,B,C,energy,approx_ratio,branch";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: Graph,
    pub dt: f64,
    pub max_layers: usize,
    pub law: LawKind,
    pub eps_b: f64,
    pub seed: u64,
}

impl RunConfig {
    /// Config with the default `eps_b` for the graph.
    pub fn new(graph: Graph, dt: f64, max_layers: usize, law: LawKind) -> Self {
        let eps_b = default_eps_b(graph.n(), graph.edge_count());
        Self {
            graph,
            dt,
            max_layers,
            law,
            eps_b,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.max_layers == 0 {
            return Err(Error::InvalidParameter("max_layers must be at least 1".into()));
        }
        if !(self.eps_b > 0.0 && self.eps_b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps_b must be positive, got {}",
                self.eps_b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// Control parameter of layer `k`.
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub energy: f64,
    pub approx_ratio: f64,
    /// Rule that produced `beta`.
    pub branch: Branch,
}

impl StepRecord {
    pub fn scalars(&self) -> FeedbackScalars {
        FeedbackScalars::new(self.a, self.b, self.c)
    }
}

/// Counts of feedback decisions that left the `B > 0` regime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounters {
    /// Decisions taken on scalars with `B < -eps_b`.
    pub sign_flip: usize,
    /// Decisions taken on scalars with `|B| <= eps_b`.
    pub b_zero_fallback: usize,
    /// Hybrid decisions where the first-order value won.
    pub hybrid_capped: usize,
}

impl BranchCounters {
    /// Events where the second-order vertex was unavailable (`B <= eps_b`).
    pub fn b_nonpositive(&self) -> usize {
        self.sign_flip + self.b_zero_fallback
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    pub e_min: f64,
    pub records: Vec<StepRecord>,
    pub warnings: BranchCounters,
}

impl RunTrace {
    pub fn betas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.beta).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.approx_ratio).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

/// `energy / e_min`; every state is optimal when the graph has no edges.
pub fn approx_ratio(energy: f64, e_min: f64) -> f64 {
    if e_min < 0.0 {
        energy / e_min
    } else {
        1.0
    }
}

/// Incremental closed-loop run, one layer per [`FeedbackRun::step`].
pub struct FeedbackRun {
    h: DiagonalHamiltonian,
    e_min: f64,
    state: StateVector,
    dt: f64,
    law: LawKind,
    eps_b: f64,
    next: BetaDecision,
    k: usize,
    warnings: BranchCounters,
}

impl FeedbackRun {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let h = build_hp_diagonal(&cfg.graph)?;
        let e_min = solve_exact(&h).e_min;
        let state = StateVector::plus(cfg.graph.n())?;
        Ok(Self {
            h,
            e_min,
            state,
            dt: cfg.dt,
            law: cfg.law,
            eps_b: cfg.eps_b,
            next: BetaDecision {
                beta: 0.0,
                branch: Branch::Initial,
            },
            k: 0,
            warnings: BranchCounters::default(),
        })
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn hamiltonian(&self) -> &DiagonalHamiltonian {
        &self.h
    }

    pub fn warnings(&self) -> BranchCounters {
        self.warnings
    }

    /// Applies the next layer, measures, and decides the following `beta`.
    pub fn step(&mut self) -> Result<StepRecord> {
        let decision = self.next;
        let rec = apply_and_measure(&mut self.state, &self.h, self.e_min, self.k + 1, self.dt, decision)?;
        self.k += 1;
        let sc = rec.scalars();
        if self.law != LawKind::FirstOrder {
            if sc.b < -self.eps_b {
                self.warnings.sign_flip += 1;
            } else if sc.b <= self.eps_b {
                self.warnings.b_zero_fallback += 1;
            }
        }
        self.next = self.law.decide(&sc, self.dt, self.eps_b);
        if self.next.branch == Branch::HybridCappedToFo {
            self.warnings.hybrid_capped += 1;
        }
        Ok(rec)
    }
}

fn apply_and_measure(
    state: &mut StateVector,
    h: &DiagonalHamiltonian,
    e_min: f64,
    k: usize,
    dt: f64,
    decision: BetaDecision,
) -> Result<StepRecord> {
    if !decision.beta.is_finite() {
        return Err(Error::NonFiniteBeta {
            step: k,
            beta: decision.beta,
        });
    }
    engine::apply_layer(
        state,
        h,
        LayerParams {
            dt,
            beta: decision.beta,
        },
    )?;
    let sc = engine::feedback_scalars(state, h)?;
    let energy = engine::energy(state, h)?;
    Ok(StepRecord {
        k,
        beta: decision.beta,
        a: sc.a,
        b: sc.b,
        c: sc.c,
        energy,
        approx_ratio: approx_ratio(energy, e_min),
        branch: decision.branch,
    })
}

pub fn run_falqon(cfg: &RunConfig) -> Result<RunTrace> {
    let mut run = FeedbackRun::new(cfg)?;
    let records = (0..cfg.max_layers).map(|_| run.step()).collect::<Result<Vec<_>>>()?;
    Ok(RunTrace {
        config: cfg.clone(),
        e_min: run.e_min,
        records,
        warnings: run.warnings,
    })
}

/// Open-loop run: applies `betas` as `beta_1, beta_2, ...` without feedback.
pub fn replay(cfg: &RunConfig, betas: &[f64]) -> Result<RunTrace> {
    cfg.validate()?;
    if betas.len() > cfg.max_layers {
        return Err(Error::InvalidParameter(format!(
            "{} betas exceed max_layers = {}",
            betas.len(),
            cfg.max_layers
        )));
    }
    let h = build_hp_diagonal(&cfg.graph)?;
    let e_min = solve_exact(&h).e_min;
    let mut state = StateVector::plus(cfg.graph.n())?;
    let records = betas
        .iter()
        .enumerate()
        .map(|(i, &beta)| {
            let decision = BetaDecision {
                beta,
                branch: Branch::Replay,
            };
            apply_and_measure(&mut state, &h, e_min, i + 1, cfg.dt, decision)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunTrace {
        config: cfg.clone(),
        e_min,
        records,
        warnings: BranchCounters::default(),
    })
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a trace as CSV. The config echo and any `extra_header` lines are
/// written first as `# ` comments.
pub fn write_trace_csv<W: Write>(trace: &RunTrace, extra_header: &[String], mut w: W) -> Result<()> {
    writeln!(w, "# config {}", serde_json::to_string(&trace.config)?)?;
    writeln!(w, "# e_min {}", fmt_real(trace.e_min))?;
    writeln!(w, "# warnings {}", serde_json::to_string(&trace.warnings)?)?;
    for line in extra_header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.k,
            fmt_real(r.beta),
            fmt_real(r.a),
            fmt_real(r.b),
            fmt_real(r.c),
            fmt_real(r.energy),
            fmt_real(r.approx_ratio),
            r.branch
        )?;
    }
    Ok(())
}

/// Parses the rows of a trace CSV written by [`write_trace_csv`].
pub fn read_trace_records<R: BufRead>(r: R) -> Result<Vec<StepRecord>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != TRACE_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header `{TRACE_HEADER}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let real = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid number `{}`", fields[j]),
            })
        };
        out.push(StepRecord {
            k: fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid step `{}`", fields[0]),
            })?,
            beta: real(1)?,
            a: real(2)?,
            b: real(3)?,
            c: real(4)?,
            energy: real(5)?,
            approx_ratio: real(6)?,
            branch: fields[7].parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?,
        });
    }
    Ok(out)
}

/// One `beta` per line.
pub fn write_beta_column<W: Write>(betas: &[f64], mut w: W) -> Result<()> {
    for &b in betas {
        writeln!(w, "{}", fmt_real(b))?;
    }
    Ok(())
}

pub fn read_beta_column<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("invalid beta `{t}`"),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_random_regular;

    fn cfg(seed: u64, dt: f64, layers: usize, law: LawKind) -> RunConfig {
        RunConfig::new(generate_random_regular(8, 3, seed).unwrap(), dt, layers, law)
    }

    #[test]
    fn edgeless_graph_stays_put() {
        for law in LawKind::ALL {
            let c = RunConfig::new(Graph::edgeless(4).unwrap(), 0.1, 20, law);
            let t = run_falqon(&c).unwrap();
            assert!(t.records.iter().all(|r| r.beta == 0.0 && r.energy == 0.0));
            assert!(t.records.iter().all(|r| r.approx_ratio == 1.0));
        }
    }

    #[test]
    fn first_layer_has_zero_beta_and_indices_count_up() {
        for law in LawKind::ALL {
            let t = run_falqon(&cfg(1, 0.05, 30, law)).unwrap();
            assert_eq!(t.records.len(), 30);
            assert_eq!(t.records[0].beta, 0.0);
            assert_eq!(t.records[0].branch, Branch::Initial);
            assert!(t.records.iter().enumerate().all(|(i, r)| r.k == i + 1));
        }
    }

    #[test]
    fn closed_and_open_loop_agree() {
        let c = cfg(3, 0.02, 200, LawKind::FirstOrder);
        let closed = run_falqon(&c).unwrap();
        let open = replay(&c, &closed.betas()).unwrap();
        for (x, y) in closed.records.iter().zip(&open.records) {
            assert!((x.energy - y.energy).abs() < 1e-10);
            assert!((x.a - y.a).abs() < 1e-10);
            assert!((x.b - y.b).abs() < 1e-10);
            assert!((x.c - y.c).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_betas_keep_initial_energy() {
        let c = cfg(4, 0.3, 10, LawKind::FirstOrder);
        let t = replay(&c, &[0.0; 10]).unwrap();
        let e0 = -(c.graph.edge_count() as f64) / 2.0;
        assert!(t.records.iter().all(|r| (r.energy - e0).abs() < 1e-12));
    }

    #[test]
    fn replay_length_contract() {
        let c = cfg(5, 0.05, 10, LawKind::FirstOrder);
        let betas = run_falqon(&c).unwrap().betas();
        assert_eq!(replay(&c, &betas[..4]).unwrap().records.len(), 4);
        assert!(replay(&c, &[0.0; 11]).is_err());
    }

    #[test]
    fn small_dt_first_order_is_monotone() {
        for seed in 0..3 {
            let t = run_falqon(&cfg(seed, 0.005, 300, LawKind::FirstOrder)).unwrap();
            for w in t.records.windows(2) {
                assert!(w[1].energy <= w[0].energy + 1e-9);
            }
        }
    }

    #[test]
    fn deterministic() {
        let c = cfg(6, 0.1, 50, LawKind::SecondOrderHybrid);
        assert_eq!(run_falqon(&c).unwrap(), run_falqon(&c).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = cfg(0, 0.1, 5, LawKind::FirstOrder);
        c.max_layers = 0;
        assert!(run_falqon(&c).is_err());
        let mut c = cfg(0, 0.1, 5, LawKind::FirstOrder);
        c.dt = -1.0;
        assert!(run_falqon(&c).is_err());
    }

    #[test]
    fn non_finite_beta_is_reported() {
        let c = cfg(0, 0.1, 5, LawKind::FirstOrder);
        assert!(matches!(
            replay(&c, &[0.0, f64::NAN]),
            Err(Error::NonFiniteBeta { step: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = run_falqon(&cfg(2, 0.1, 12, LawKind::SecondOrderHybrid)).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&t, &["seed 2".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == TRACE_HEADER));
        let back = read_trace_records(text.as_bytes()).unwrap();
        assert_eq!(back, t.records);

        let mut col = Vec::new();
        write_beta_column(&t.betas(), &mut col).unwrap();
        assert_eq!(read_beta_column(col.as_slice()).unwrap(), t.betas());
    }
}
