//! Fast internal consistency checks against the dense reference operators.

use falqon_core::engine::dense::{random_state, DenseOperators};
use falqon_core::engine::{feedback_scalars, model_residual, FeedbackScalars};
use falqon_core::experiments::{standard_ensemble, EnsembleKind};
use falqon_core::feedback::LawKind;
use falqon_core::problem::{build_hp_diagonal, generate_random_regular, Graph};
use falqon_core::runner::{replay, run_falqon, FeedbackRun, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exit::SelfcheckFailed;

/// Which scalar the debug hook offsets before the oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Perturb {
    A,
    B,
    C,
}

const PERTURBATION: f64 = 1e-6;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let edges = pairs.into_iter().filter(|_| rng.gen_bool(0.6));
    Graph::new(n, edges).expect("pairs are valid edges")
}

fn oracle_equivalence(perturb: Option<Perturb>) -> anyhow::Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let g = random_graph(n, &mut rng);
        let h = build_hp_diagonal(&g)?;
        let dense = DenseOperators::new(&h);
        for _ in 0..50 {
            let s = random_state(n, &mut rng);
            let mut fast = feedback_scalars(&s, &h)?;
            match perturb {
                Some(Perturb::A) => fast.a += PERTURBATION,
                Some(Perturb::B) => fast.b += PERTURBATION,
                Some(Perturb::C) => fast.c += PERTURBATION,
                None => {}
            }
            let slow: FeedbackScalars = dense.scalars(&s);
            worst = worst
                .max((fast.a - slow.a).abs())
                .max((fast.b - slow.b).abs())
                .max((fast.c - slow.c).abs());
        }
    }
    Ok(Check {
        name: "oracle_equivalence",
        pass: worst < 1e-10,
        detail: format!("max |fast - dense| = {worst:.3e} over 150 states, n = 2..4"),
    })
}

fn norm_preservation() -> anyhow::Result<Check> {
    let g = generate_random_regular(12, 3, 5)?;
    let mut worst = 0.0f64;
    for law in LawKind::ALL {
        let mut run = FeedbackRun::new(&RunConfig::new(g.clone(), 0.1, 300, law))?;
        for _ in 0..300 {
            run.step()?;
        }
        worst = worst.max((run.state().norm() - 1.0).abs());
    }
    Ok(Check {
        name: "norm_preservation",
        pass: worst < 1e-8,
        detail: format!("max |norm - 1| = {worst:.3e} after 300 layers, n = 12"),
    })
}

fn taylor_remainder() -> anyhow::Result<Check> {
    let g = generate_random_regular(6, 3, 2)?;
    let h = build_hp_diagonal(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut coarse, mut fine) = (0.0, 0.0);
    for _ in 0..20 {
        let s = random_state(6, &mut rng);
        let beta = rng.gen_range(-1.0..1.0);
        coarse += model_residual(&s, &h, beta, 0.02)?;
        fine += model_residual(&s, &h, beta, 0.01)?;
    }
    let ratio = coarse / fine;
    Ok(Check {
        name: "taylor_remainder",
        pass: (6.0..=10.0).contains(&ratio),
        detail: format!("residual ratio {ratio:.3} for dt 0.02 -> 0.01 (expected 8 +/- 25%)"),
    })
}

fn replay_identity() -> anyhow::Result<Check> {
    let cfg = RunConfig::new(generate_random_regular(8, 3, 4)?, 0.02, 200, LawKind::FirstOrder);
    let closed = run_falqon(&cfg)?;
    let open = replay(&cfg, &closed.betas())?;
    let worst = closed
        .records
        .iter()
        .zip(&open.records)
        .map(|(x, y)| {
            (x.energy - y.energy)
                .abs()
                .max((x.a - y.a).abs())
                .max((x.b - y.b).abs())
                .max((x.c - y.c).abs())
        })
        .fold(0.0f64, f64::max);
    Ok(Check {
        name: "replay_identity",
        pass: worst < 1e-10,
        detail: format!("max closed/open-loop difference {worst:.3e} over 200 layers"),
    })
}

/// Counts steps where the measured `B` was not positive under the hybrid law.
fn b_nonpositive_report() -> anyhow::Result<String> {
    let graphs = standard_ensemble(10, EnsembleKind::default_for(10, 20), 42)?;
    let (mut flips, mut fallbacks, mut steps) = (0, 0, 0);
    for g in &graphs {
        let trace = run_falqon(&RunConfig::new(g.clone(), 0.1, 300, LawKind::SecondOrderHybrid))?;
        flips += trace.warnings.sign_flip;
        fallbacks += trace.warnings.b_zero_fallback;
        steps += trace.records.len();
    }
    Ok(format!(
        "B <= 0 events over {} graphs, {steps} steps (n = 10, dt = 0.1): sign flips {flips}, B ~ 0 fallbacks {fallbacks}",
        graphs.len()
    ))
}

pub fn selfcheck(perturb: Option<Perturb>) -> anyhow::Result<()> {
    let checks = [
        oracle_equivalence(perturb)?,
        norm_preservation()?,
        taylor_remainder()?,
        replay_identity()?,
    ];
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("INFO {}", b_nonpositive_report()?);
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(SelfcheckFailed(failed).into())
    }
}
