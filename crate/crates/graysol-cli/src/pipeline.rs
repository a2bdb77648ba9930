//! Sweeps: a worker pool runs points, a single writer appends rows in order.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::Instant;

use graysol::analytic::{ModeQuantities, SolitonParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{pooled_scaling_slope, shift_groups};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::{
    bare_soliton_drift, com_speed_point, packet_advance_point, plan_advance, plan_com, plan_shift,
    soliton_shift_point_with, AdvanceOutcome, ComOutcome, Plan, ShiftOutcome, SweepPoint,
};
use crate::record::{column_units, write_columns, write_json, RecordWriter, RunRecord};

/// A sweep point that raised an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub point: SweepPoint,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult<O> {
    pub outcomes: Vec<O>,
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    pub threads: usize,
}

/// `β` outer, then `k`, then `ε`.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for &beta in &cfg.betas {
        for &k in &cfg.k_values {
            for &epsilon in &cfg.epsilons {
                points.push(SweepPoint {
                    beta,
                    mu: cfg.mu,
                    k,
                    epsilon,
                    lambda: cfg.lambda,
                });
            }
        }
    }
    points
}

/// Runs `run` over `points` on `threads` workers (0 = all cores) and hands
/// results to `sink` in point order, each with its wall-clock time.
pub fn sweep<O: Send>(
    points: &[SweepPoint],
    threads: usize,
    run: impl Fn(&SweepPoint) -> graysol::Result<O> + Sync,
    mut sink: impl FnMut(usize, &SweepPoint, &graysol::Result<O>, f64) -> anyhow::Result<()>,
) -> anyhow::Result<(Vec<Option<O>>, usize)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    let n_threads = pool.current_num_threads();
    let mut out: Vec<Option<O>> = (0..points.len()).map(|_| None).collect();
    let (tx, rx) = mpsc::channel();
    let run = &run;
    std::thread::scope(|s| -> anyhow::Result<()> {
        s.spawn(move || {
            pool.install(|| {
                points
                    .par_iter()
                    .enumerate()
                    .for_each_with(tx, |tx, (i, p)| {
                        let start = Instant::now();
                        let r = run(p);
                        let _ = tx.send((i, r, start.elapsed().as_secs_f64()));
                    })
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, r, secs) in rx {
            pending.insert(i, (r, secs));
            while let Some((r, secs)) = pending.remove(&next) {
                sink(next, &points[next], &r, secs)?;
                out[next] = r.ok();
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok((out, n_threads))
}

fn record_base(
    cfg: &ExperimentConfig,
    point: &SweepPoint,
    k: f64,
    q: &ModeQuantities,
    secs: f64,
) -> RunRecord {
    RunRecord {
        experiment: cfg.experiment.name(),
        beta: point.beta,
        v: point.beta,
        mu: point.mu,
        k_requested: point.k,
        k_snapped: k,
        lambda: point.lambda,
        epsilon: point.epsilon,
        delta_k_analytic: q.delta,
        advance_measured: None,
        n1: q.n1,
        n2: q.n2,
        dx_pred: q.dx_pred,
        dx_measured: None,
        dx_over_eps2: None,
        p_drift: 0.0,
        n_drift: 0.0,
        runtime_s: if cfg.record_timings { secs } else { 0.0 },
    }
}

trait Recordable {
    fn record(&self, cfg: &ExperimentConfig, secs: f64) -> RunRecord;
}

impl Recordable for AdvanceOutcome {
    fn record(&self, cfg: &ExperimentConfig, secs: f64) -> RunRecord {
        RunRecord {
            advance_measured: Some(self.advance),
            p_drift: self.drifts.p_drift,
            n_drift: self.drifts.n_drift,
            ..record_base(cfg, &self.point, self.k_snapped, &self.quantities, secs)
        }
    }
}

impl Recordable for ShiftOutcome {
    fn record(&self, cfg: &ExperimentConfig, secs: f64) -> RunRecord {
        RunRecord {
            dx_measured: Some(self.dx),
            dx_over_eps2: Some(self.dx_over_eps2),
            p_drift: self.drifts.p_drift,
            n_drift: self.drifts.n_drift,
            ..record_base(cfg, &self.point, self.k_snapped, &self.quantities, secs)
        }
    }
}

impl Recordable for ComOutcome {
    fn record(&self, cfg: &ExperimentConfig, secs: f64) -> RunRecord {
        RunRecord {
            p_drift: self.drifts.p_drift,
            n_drift: self.drifts.n_drift,
            ..record_base(cfg, &self.point, self.k_snapped, &self.quantities, secs)
        }
    }
}

fn run_sweep<O: Send + Recordable>(
    cfg: &ExperimentConfig,
    run: impl Fn(&SweepPoint) -> graysol::Result<O> + Sync,
) -> anyhow::Result<SweepResult<O>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let points = sweep_points(cfg);
    let mut writer = RecordWriter::create(&cfg.out_dir.join("results.csv"))?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let (outcomes, threads) = sweep(&points, cfg.threads, run, |index, point, result, secs| {
        match result {
            Ok(o) => {
                let r = o.record(cfg, secs);
                writer.write(&r)?;
                records.push(r);
            }
            Err(e) => {
                eprintln!("point {index} ({point:?}) failed: {e}");
                failures.push(Failure {
                    index,
                    point: *point,
                    error: e.to_string(),
                });
            }
        }
        Ok(())
    })?;
    Ok(SweepResult {
        outcomes: outcomes.into_iter().flatten().collect(),
        records,
        failures,
        threads,
    })
}

fn metadata<O>(
    cfg: &ExperimentConfig,
    result: &SweepResult<O>,
    tolerances: serde_json::Value,
    summary: serde_json::Value,
) -> serde_json::Value {
    let units: serde_json::Map<String, serde_json::Value> = column_units()
        .into_iter()
        .map(|(c, u)| (c.to_string(), json!(u)))
        .collect();
    json!({
        "experiment": cfg.experiment.name(),
        "config": cfg,
        "solver": {
            "solver_options": cfg.solver(),
            "grid": "n = smallest power of two >= max(256, 2L/max_dx) unless n_points is set",
            "dt": "0.5 / max(q^2/2 + |beta - v||q|) unless dt is set",
            "frame": "soliton rest frame, beta = v",
        },
        "threads": result.threads,
        "units": units,
        "tolerances": tolerances,
        "n_records": result.records.len(),
        "failures": result.failures,
        "summary": summary,
    })
}

fn snapshot_rows(xs: &[f64], ys: &[f64], region: (f64, f64)) -> Vec<(f64, f64)> {
    xs.iter()
        .zip(ys)
        .filter(|(&x, _)| x >= region.0 && x <= region.1)
        .map(|(&x, &y)| (x, y))
        .collect()
}

/// Paired soliton and uniform-background runs for every point.
pub fn run_packet_advance(cfg: &ExperimentConfig) -> anyhow::Result<SweepResult<AdvanceOutcome>> {
    let opts = cfg.solver();
    let result = run_sweep(cfg, |p| packet_advance_point(p, cfg.x_init, &opts))?;
    let dir = &cfg.out_dir;
    let mut summary = Vec::new();
    for (i, o) in result.outcomes.iter().enumerate() {
        let wide = (o.region.0 - 20.0, o.region.1 + 20.0);
        let xs = &o.soliton_profile.xs;
        write_columns(
            &dir.join(format!("advance_{i}_soliton.dat")),
            snapshot_rows(xs, &o.soliton_profile.density_difference, wide),
        )?;
        write_columns(
            &dir.join(format!("advance_{i}_control.dat")),
            snapshot_rows(
                &o.control_profile.xs,
                &o.control_profile.density_difference,
                wide,
            ),
        )?;
        write_columns(
            &dir.join(format!("advance_{i}_overlay_nu.dat")),
            snapshot_rows(xs, &o.overlay_nu, wide),
        )?;
        write_columns(
            &dir.join(format!("advance_{i}_overlay_nu_corr.dat")),
            snapshot_rows(xs, &o.overlay_nu_corr, wide),
        )?;
        summary.push(json!({
            "outcome": o,
            "advance_rel_error": (o.advance / o.quantities.delta - 1.0).abs(),
            "nu_corr_overlay_closer": (o.center_soliton_run - o.center_pred_nu_corr).abs()
                < (o.center_soliton_run - o.center_pred_nu).abs(),
        }));
    }
    let tol = json!({ "advance_vs_analytic_rel": 0.02 });
    write_json(
        &dir.join("metadata.json"),
        &metadata(cfg, &result, tol, json!(summary)),
    )?;
    Ok(result)
}

fn panel_name(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    letters
        .get(i)
        .map(|&c| (c as char).to_string())
        .unwrap_or_else(|| format!("{i}"))
}

/// Sweep over `(β, k, ε)`; one panel of plot files per `β`.
pub fn run_soliton_shift(cfg: &ExperimentConfig) -> anyhow::Result<SweepResult<ShiftOutcome>> {
    let opts = cfg.solver();
    cfg.validate()?;
    let pairs: Vec<SweepPoint> = cfg
        .betas
        .iter()
        .flat_map(|&beta| {
            cfg.k_values.iter().map(move |&k| SweepPoint {
                beta,
                mu: cfg.mu,
                k,
                epsilon: 0.0,
                lambda: cfg.lambda,
            })
        })
        .collect();
    let (bare, _) = sweep(
        &pairs,
        cfg.threads,
        |p| bare_soliton_drift(p, &opts),
        |_, _, _, _| Ok(()),
    )?;
    let baseline = |p: &SweepPoint| -> graysol::Result<f64> {
        let i = pairs
            .iter()
            .position(|b| b.beta == p.beta && b.k == p.k)
            .expect("pair enumerated above");
        match bare[i] {
            Some(d) => Ok(d),
            None => bare_soliton_drift(&pairs[i], &opts),
        }
    };
    let result = run_sweep(cfg, |p| soliton_shift_point_with(p, &opts, baseline(p)?))?;
    let dir = &cfg.out_dir;
    let groups = shift_groups(&result.outcomes);
    for (i, &beta) in cfg.betas.iter().enumerate() {
        let name = panel_name(i);
        let mine: Vec<_> = groups.iter().filter(|g| g.beta == beta).collect();
        let points = mine
            .iter()
            .flat_map(|g| g.dx_over_eps2.iter().map(move |&r| (g.k_snapped, r)));
        write_columns(&dir.join(format!("panel_{name}_points.dat")), points)?;
        write_columns(
            &dir.join(format!("panel_{name}_mean.dat")),
            mine.iter().map(|g| (g.k_snapped, g.mean)),
        )?;
        let p = SolitonParams::comoving(beta, cfg.mu)?;
        let curve = |with_n2: bool| -> anyhow::Result<Vec<(f64, f64)>> {
            (0..=160)
                .map(|j| {
                    let k = 0.4 + 1.6 * j as f64 / 160.0;
                    let q = ModeQuantities::compute(k, cfg.lambda, 1.0, &p)?;
                    Ok((
                        k,
                        if with_n2 {
                            q.dx_pred
                        } else {
                            q.dx_pred_without_n2
                        },
                    ))
                })
                .collect()
        };
        write_columns(&dir.join(format!("panel_{name}_pred.dat")), curve(true)?)?;
        write_columns(
            &dir.join(format!("panel_{name}_pred_without_n2.dat")),
            curve(false)?,
        )?;
    }
    let tol = json!({
        "eps_spread_rel": 0.005,
        "mean_vs_pred_rel": 0.03,
        "scaling_slope": { "target": 2.0, "abs": 0.02 },
    });
    let summary = json!({
        "groups": groups,
        "pooled_scaling_slope": pooled_scaling_slope(&groups),
        "outcomes": result.outcomes,
    });
    write_json(
        &dir.join("metadata.json"),
        &metadata(cfg, &result, tol, summary),
    )?;
    Ok(result)
}

/// Center-of-mass speed before and after the crossing for every point.
pub fn run_com_speed(cfg: &ExperimentConfig) -> anyhow::Result<SweepResult<ComOutcome>> {
    let opts = cfg.solver();
    let result = run_sweep(cfg, |p| com_speed_point(p, &opts))?;
    let dir = &cfg.out_dir;
    for (i, o) in result.outcomes.iter().enumerate() {
        write_columns(
            &dir.join(format!("com_{i}.dat")),
            o.series.iter().map(|s| (s.t, s.q)),
        )?;
    }
    let tol = json!({ "qdot_residual_abs": "5 epsilon^3", "residual_ratio_per_doubling": { "target": 8.0, "rel": 0.3 } });
    write_json(
        &dir.join("metadata.json"),
        &metadata(cfg, &result, tol, json!(result.outcomes)),
    )?;
    Ok(result)
}

/// Predictions at the requested and snapped wavenumbers, without simulating.
#[derive(Debug, Clone, Serialize)]
pub struct DryRunEntry {
    pub point: SweepPoint,
    pub half_length: f64,
    pub n_points: usize,
    pub k_snapped: f64,
    pub duration: f64,
    pub quantities: ModeQuantities,
}

pub fn dry_run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<DryRunEntry>> {
    cfg.validate()?;
    let opts = cfg.solver();
    sweep_points(cfg)
        .iter()
        .map(|point| {
            let plan: Plan = match cfg.experiment {
                ExperimentKind::PacketAdvance => plan_advance(point, cfg.x_init, &opts)?,
                ExperimentKind::SolitonShift => plan_shift(point, &opts)?,
                ExperimentKind::Custom => plan_com(point, &opts)?,
            };
            Ok(DryRunEntry {
                point: *point,
                half_length: plan.geom.half_length,
                n_points: plan.geom.n_points,
                k_snapped: plan.k,
                duration: plan.duration,
                quantities: plan.quantities,
            })
        })
        .collect()
}

/// Runs the pipeline selected by `cfg.experiment` and returns the record count.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<(usize, usize)> {
    let counts = |r: &[RunRecord], f: &[Failure]| (r.len(), f.len());
    Ok(match cfg.experiment {
        ExperimentKind::PacketAdvance => {
            let r = run_packet_advance(cfg)?;
            counts(&r.records, &r.failures)
        }
        ExperimentKind::SolitonShift => {
            let r = run_soliton_shift(cfg)?;
            counts(&r.records, &r.failures)
        }
        ExperimentKind::Custom => {
            let r = run_com_speed(cfg)?;
            counts(&r.records, &r.failures)
        }
    })
}
