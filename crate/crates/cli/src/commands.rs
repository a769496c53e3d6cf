use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use falqon_core::experiments::{
    appendix_study, curve_file_name, ensemble_curve, is_monotone, scaling_study, standard_ensemble, write_curve_csv,
    write_scaling_csv, EnsembleKind, ScalingOptions, Summary, SummaryThreshold, DEFAULT_ETA, R_GW,
};
use falqon_core::feedback::{default_eps_b, LawKind};
use falqon_core::problem::{
    canonical_fingerprint, generate_random_regular, read_edge_list, sample_distinct, write_edge_list, Graph,
};
use falqon_core::runner::{fmt_real, run_falqon, write_beta_column, write_trace_csv, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{require, resolve, FileConfig};
use crate::exit::ConfigError;

pub const GRAPH_EXT: &str = "edges";

const DEFAULT_SEED: u64 = 42;
const DEFAULT_COUNT: usize = 20;
const DEFAULT_LAYERS: usize = 1000;

/// Loads one edge-list file, or every `*.edges` file of a directory in name
/// order.
pub fn load_graphs(path: &Path) -> anyhow::Result<Vec<(String, Graph)>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == GRAPH_EXT))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(ConfigError(format!("no .{GRAPH_EXT} files in {}", path.display())).into());
        }
        files
    } else if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        return Err(ConfigError(format!("graph input {} does not exist", path.display())).into());
    };
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            let g = read_edge_list(&text).with_context(|| format!("parsing {}", f.display()))?;
            let stem = f
                .file_stem()
                .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned());
            Ok((stem, g))
        })
        .collect()
}

fn out_dir(cfg: &mut FileConfig) -> anyhow::Result<PathBuf> {
    let dir = resolve(&mut cfg.out, PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Writes `config.toml` into the output directory and returns the one-line
/// JSON echo embedded in every artifact.
fn seal(cfg: &FileConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    Ok(vec![format!("resolved {}", cfg.to_json())])
}

/// The graphs named by `graphs`, or a fresh ensemble from the `[ensemble]`
/// section.
fn study_ensemble(cfg: &mut FileConfig) -> anyhow::Result<Vec<Graph>> {
    if let Some(path) = cfg.graphs.clone() {
        return Ok(load_graphs(&path)?.into_iter().map(|(_, g)| g).collect());
    }
    let n = resolve(&mut cfg.ensemble.n, 12);
    let count = resolve(&mut cfg.ensemble.count, DEFAULT_COUNT);
    let seed = resolve(&mut cfg.seed, DEFAULT_SEED);
    Ok(standard_ensemble(n, EnsembleKind::default_for(n, count), seed)?)
}

fn check_dt_list(list: &[f64]) -> anyhow::Result<()> {
    if list.is_empty() || list.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
        return Err(ConfigError("dt_list must be a non-empty list of positive values".into()).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    n: usize,
    edges: usize,
    fingerprint: String,
    connected: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a FileConfig,
    draws: Option<usize>,
    graphs: Vec<ManifestEntry>,
}

pub fn gen_graphs(mut cfg: FileConfig) -> anyhow::Result<()> {
    let n = require(&cfg.ensemble.n, "ensemble.n")?;
    let count = resolve(&mut cfg.ensemble.count, DEFAULT_COUNT);
    let dedup = resolve(&mut cfg.ensemble.dedup, true);
    let max_draws = resolve(&mut cfg.ensemble.max_draws, 1000 * count.max(1));
    let seed = resolve(&mut cfg.seed, DEFAULT_SEED);
    let dir = out_dir(&mut cfg)?;

    let (graphs, draws) = if dedup {
        let draw = sample_distinct(n, count, seed, max_draws)?;
        (draw.graphs, Some(draw.draws))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graphs = (0..count)
            .map(|_| generate_random_regular(n, 3, rng.gen()))
            .collect::<falqon_core::Result<Vec<_>>>()?;
        (graphs, None)
    };

    let mut entries = Vec::with_capacity(graphs.len());
    for (i, g) in graphs.iter().enumerate() {
        let file = format!("graph_n{n}_{i:03}.{GRAPH_EXT}");
        fs::write(dir.join(&file), write_edge_list(g))?;
        entries.push(ManifestEntry {
            file,
            n: g.n(),
            edges: g.edge_count(),
            fingerprint: canonical_fingerprint(g).to_string(),
            connected: g.is_connected(),
        });
    }
    seal(&cfg, &dir)?;
    let manifest = Manifest {
        config: &cfg,
        draws,
        graphs: entries,
    };
    serde_json::to_writer_pretty(create(&dir.join("manifest.json"))?, &manifest)?;
    eprintln!("wrote {} graphs to {}", graphs.len(), dir.display());
    Ok(())
}

pub fn run(mut cfg: FileConfig) -> anyhow::Result<()> {
    let path = require(&cfg.graphs, "graphs")?;
    let graphs = load_graphs(&path)?;
    let dt = resolve(&mut cfg.run.dt, 0.1);
    let layers = resolve(&mut cfg.run.layers, DEFAULT_LAYERS);
    let law = resolve(&mut cfg.run.law, LawKind::SecondOrderHybrid);
    let seed = resolve(&mut cfg.seed, DEFAULT_SEED);
    let eps_b = cfg.run.eps_b;
    let dir = out_dir(&mut cfg)?;
    let header = seal(&cfg, &dir)?;

    let jobs = graphs
        .into_iter()
        .map(|(name, g)| {
            let eps = eps_b.unwrap_or_else(|| default_eps_b(g.n(), g.edge_count()));
            let rc = RunConfig {
                eps_b: eps,
                seed,
                ..RunConfig::new(g, dt, layers, law)
            };
            rc.validate().map_err(|e| ConfigError(e.to_string()))?;
            Ok((name, rc))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    jobs.par_iter().try_for_each(|(name, rc)| -> anyhow::Result<()> {
        let trace = run_falqon(rc)?;
        write_trace_csv(&trace, &header, create(&dir.join(format!("trace_{name}.csv")))?)?;
        write_beta_column(&trace.betas(), create(&dir.join(format!("betas_{name}.txt")))?)?;
        let w = &trace.warnings;
        if w.b_nonpositive() > 0 {
            eprintln!(
                "{name}: B <= 0 on {} steps (sign flips {}, fallbacks {})",
                w.b_nonpositive(),
                w.sign_flip,
                w.b_zero_fallback
            );
        }
        Ok(())
    })?;
    eprintln!("wrote {} traces to {}", jobs.len(), dir.display());
    Ok(())
}

struct SweepRow {
    dt: f64,
    monotone: bool,
    l_required: Option<usize>,
    final_mean: f64,
}

pub fn sweep_dt(mut cfg: FileConfig) -> anyhow::Result<()> {
    let graphs = study_ensemble(&mut cfg)?;
    let law = resolve(&mut cfg.run.law, LawKind::SecondOrderHybrid);
    let layers = resolve(&mut cfg.run.layers, DEFAULT_LAYERS);
    let dt_list = resolve(&mut cfg.study.dt_list, vec![0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14]);
    let eta = resolve(&mut cfg.study.eta, DEFAULT_ETA);
    let r_target = resolve(&mut cfg.study.r_target, R_GW);
    check_dt_list(&dt_list)?;
    let dir = out_dir(&mut cfg)?;
    let header = seal(&cfg, &dir)?;

    let mut summary = Summary {
        config: serde_json::to_value(&cfg)?,
        ..Summary::default()
    };
    let mut w = create(&dir.join(format!("sweep_{law}.csv")))?;
    for line in &header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "dt,monotone,l_required,final_mean")?;
    for &dt in &dt_list {
        let curve = ensemble_curve(&graphs, law, dt, layers)?;
        write_curve_csv(&curve, &header, create(&dir.join(curve_file_name(&curve)))?)?;
        let row = SweepRow {
            dt,
            monotone: is_monotone(&curve.mean_r, eta),
            l_required: curve.layers_to(r_target),
            final_mean: curve.final_mean(),
        };
        writeln!(
            w,
            "{},{},{},{}",
            fmt_real(row.dt),
            row.monotone,
            row.l_required.map_or_else(String::new, |l| l.to_string()),
            fmt_real(row.final_mean)
        )?;
        eprintln!(
            "dt {dt}: monotone {} L {:?} r_final {:.4}",
            row.monotone, row.l_required, row.final_mean
        );
        summary.thresholds.push(SummaryThreshold {
            law: law.to_string(),
            n: curve.n,
            dt,
            l_required: row.l_required,
            monotone: row.monotone,
        });
    }
    w.flush()?;
    summary.write(create(&dir.join("summary.json"))?)?;
    Ok(())
}

pub fn scaling(mut cfg: FileConfig) -> anyhow::Result<()> {
    let quick = resolve(&mut cfg.study.quick, false);
    let n_list = resolve(
        &mut cfg.study.n_list,
        if quick {
            vec![8, 10, 12]
        } else {
            vec![8, 10, 12, 14, 16]
        },
    );
    let count = resolve(&mut cfg.ensemble.count, if quick { 10 } else { DEFAULT_COUNT });
    let laws = resolve(
        &mut cfg.study.laws,
        vec![LawKind::FirstOrder, LawKind::SecondOrderHybrid],
    );
    let layers = resolve(&mut cfg.run.layers, DEFAULT_LAYERS);
    let eta = resolve(&mut cfg.study.eta, DEFAULT_ETA);
    let resolution = resolve(&mut cfg.study.resolution, if quick { 2e-3 } else { 1e-3 });
    let r_target = resolve(&mut cfg.study.r_target, R_GW);
    let seed = resolve(&mut cfg.seed, DEFAULT_SEED);
    if n_list.len() < 2 || laws.is_empty() {
        return Err(ConfigError("scaling needs at least two sizes and one law".into()).into());
    }
    let dir = out_dir(&mut cfg)?;
    let header = seal(&cfg, &dir)?;

    let ensembles = n_list
        .iter()
        .map(|&n| Ok((n, standard_ensemble(n, EnsembleKind::default_for(n, count), seed)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut summary = Summary {
        config: serde_json::to_value(&cfg)?,
        ..Summary::default()
    };
    for law in laws {
        let opts = ScalingOptions {
            l_max: layers,
            eta,
            resolution,
            r_target,
            ..ScalingOptions::for_law(law)
        };
        let report = scaling_study(&ensembles, law, &opts)?;
        for row in &report.rows {
            eprintln!(
                "{law} n={}: dt_c {:.4} L_required {} r_final {:.4}",
                row.n, row.dt_c, row.l_required, row.saturation
            );
        }
        eprintln!("{law} slope {:.3}", report.fit.slope);
        write_scaling_csv(&report, &header, create(&dir.join(format!("scaling_{law}.csv")))?)?;
        for search in &report.searches {
            write_curve_csv(
                &search.curve,
                &header,
                create(&dir.join(curve_file_name(&search.curve)))?,
            )?;
        }
        summary.add_scaling(&report);
    }
    summary.write(create(&dir.join("summary.json"))?)?;
    Ok(())
}

#[derive(Serialize)]
struct AppendixSummary<'a> {
    config: &'a FileConfig,
    pairs: Vec<AppendixEntry>,
}

#[derive(Serialize)]
struct AppendixEntry {
    dt: f64,
    pure_monotone_fraction: f64,
    hybrid_monotone_fraction: f64,
    pure_final_mean: f64,
    hybrid_final_mean: f64,
}

pub fn appendix(mut cfg: FileConfig) -> anyhow::Result<()> {
    let graphs = study_ensemble(&mut cfg)?;
    let layers = resolve(&mut cfg.run.layers, DEFAULT_LAYERS);
    let dt_list = resolve(&mut cfg.study.dt_list, vec![0.028, 0.1]);
    let eta = resolve(&mut cfg.study.eta, DEFAULT_ETA);
    check_dt_list(&dt_list)?;
    let dir = out_dir(&mut cfg)?;
    let header = seal(&cfg, &dir)?;

    let pairs = appendix_study(&graphs, &dt_list, layers)?;
    let fraction = |per_graph: &[Vec<f64>]| {
        per_graph.iter().filter(|r| is_monotone(r, eta)).count() as f64 / per_graph.len() as f64
    };
    let mut entries = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let mut w = create(&dir.join(format!("appendix_n{}_dt{}.csv", p.pure.n, p.dt)))?;
        for line in &header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "k,pure_mean_r,pure_std_r,hybrid_mean_r,hybrid_std_r")?;
        for k in 0..p.pure.mean_r.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                k + 1,
                fmt_real(p.pure.mean_r[k]),
                fmt_real(p.pure.std_r[k]),
                fmt_real(p.hybrid.mean_r[k]),
                fmt_real(p.hybrid.std_r[k])
            )?;
        }
        w.flush()?;
        entries.push(AppendixEntry {
            dt: p.dt,
            pure_monotone_fraction: fraction(&p.pure.per_graph),
            hybrid_monotone_fraction: fraction(&p.hybrid.per_graph),
            pure_final_mean: p.pure.final_mean(),
            hybrid_final_mean: p.hybrid.final_mean(),
        });
    }
    serde_json::to_writer_pretty(
        create(&dir.join("appendix.json"))?,
        &AppendixSummary {
            config: &cfg,
            pairs: entries,
        },
    )?;
    Ok(())
}
