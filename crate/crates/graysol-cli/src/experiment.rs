//! Single-point protocols: paired packet-advance runs, soliton-shift runs
//! and center-of-mass speed runs.

use graysol::analytic::{
    dispersion_curvature, envelope_second_order, group_velocity, ModeQuantities, PacketFrame, Side,
    SolitonParams,
};
use graysol::evolve::{evolve, stable_dt, EvolveOptions, Frame, Observables, SeamGuard};
use graysol::measure::{
    envelope_centroid, fit_soliton_position, measure_soliton_shift, FitGuess, PacketSnapshot,
    SolitonFit, FIT_HALF_WINDOW,
};
use graysol::ring::{
    discrete_wavenumbers_between, tune_ring_with, uniform_ring_length, DiscreteSpectrum,
    RingGeometry, Rounding,
};
use graysol::synthesis::{
    background_field, build_initial_state, InitialState, Order, PacketSpec, SUPPORT,
};
use graysol::{Error, Result};
use serde::Serialize;

/// Grid and step settings shared by all runs of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_dx: f64,
    pub n_points: Option<usize>,
    pub half_length: Option<f64>,
    pub dt: Option<f64>,
    pub sample_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_dx: 0.2,
            n_points: None,
            half_length: None,
            dt: None,
            sample_every: 100,
        }
    }
}

impl SolverOptions {
    fn geometry(&self, half_length: f64) -> Result<RingGeometry> {
        match self.n_points {
            Some(n) => RingGeometry::new(half_length, n),
            None => RingGeometry::with_max_spacing(half_length, self.max_dx),
        }
    }

    fn dt(&self, geom: &RingGeometry, frame: &Frame) -> f64 {
        self.dt.unwrap_or_else(|| stable_dt(geom, frame))
    }
}

/// Step actually taken when `duration` is split into whole steps of at most `dt`.
fn effective_dt(duration: f64, dt: f64) -> f64 {
    duration / (duration / dt).ceil()
}

/// Largest relative excursions of `P` and `N` along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Drifts {
    pub p_drift: f64,
    pub n_drift: f64,
}

impl Drifts {
    pub fn of(series: &[Observables]) -> Self {
        let first = series[0];
        let rel = |a: f64, b: f64| {
            if b != 0.0 {
                (a - b).abs() / b.abs()
            } else {
                (a - b).abs()
            }
        };
        series.iter().fold(Self::default(), |d, o| Self {
            p_drift: d.p_drift.max(rel(o.p, first.p)),
            n_drift: d.n_drift.max(rel(o.n, first.n)),
        })
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            p_drift: self.p_drift.max(other.p_drift),
            n_drift: self.n_drift.max(other.n_drift),
        }
    }
}

/// Soliton speed, packet wavenumber, normalized amplitude and breadth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub mu: f64,
    pub k: f64,
    pub epsilon: f64,
    pub lambda: f64,
}

/// Ring, spectrum, snapped wavenumber and run time for one point.
#[derive(Debug, Clone)]
pub struct Plan {
    pub params: SolitonParams,
    pub geom: RingGeometry,
    pub spectrum: DiscreteSpectrum,
    pub k: f64,
    pub quantities: ModeQuantities,
    pub duration: f64,
}

/// Tunes a ring of at least `target(T)`, snaps `k` onto it and sets the run
/// time `T = (travel − Δ)/ν̃` needed for the packet center to cover `travel`.
fn plan_run(
    point: &SweepPoint,
    opts: &SolverOptions,
    travel: f64,
    target: impl Fn(f64) -> f64,
) -> Result<Plan> {
    let p = SolitonParams::comoving(point.beta, point.mu)?;
    let run_time = |q: &ModeQuantities| (travel - q.delta) / q.nu_corr;
    let rough = ModeQuantities::compute(point.k, point.lambda, point.epsilon, &p)?;
    let l_target = opts.half_length.unwrap_or_else(|| target(run_time(&rough)));
    let ring = tune_ring_with(point.beta, point.mu, l_target, 1e-10, Rounding::AtLeast)?;
    let geom = opts.geometry(ring.half_length)?;
    geom.check_soliton(&p)?;
    let margin = 8.0 / point.lambda;
    let spectrum =
        discrete_wavenumbers_between(&p, &geom, (point.k - margin).max(0.0), point.k + margin)?;
    let k = spectrum
        .nearest(point.k)
        .ok_or(Error::InsufficientSpectrum {
            k: point.k,
            weight: 1.0,
        })?;
    let quantities = ModeQuantities::compute(k, point.lambda, point.epsilon, &p)?;
    Ok(Plan {
        params: p,
        geom,
        spectrum,
        k,
        duration: run_time(&quantities),
        quantities,
    })
}

/// Launch and end positions of the packet center, in units of `λ`.
pub const SHIFT_LAUNCH: f64 = -7.0;
pub const SHIFT_END: f64 = 7.0;
const SHIFT_MARGIN: f64 = 40.0;

/// Ring half-length needed so that the packet and the compensation pulse
/// (moving left at `c + β` and wrapping) do not meet before `duration`.
pub fn shift_ring_target(point: &SweepPoint, duration: f64) -> f64 {
    let c = point.mu.sqrt();
    let l = point.lambda;
    let w = 3.0 * l;
    let path = (c + point.beta) * duration;
    0.5 * ((SHIFT_END - SHIFT_LAUNCH) * l + 2.0 * SUPPORT * l + 8.0 * w + path + SHIFT_MARGIN)
}

pub fn plan_shift(point: &SweepPoint, opts: &SolverOptions) -> Result<Plan> {
    plan_run(
        point,
        opts,
        (SHIFT_END - SHIFT_LAUNCH) * point.lambda,
        |t| shift_ring_target(point, t),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftOutcome {
    pub point: SweepPoint,
    pub k_snapped: f64,
    pub quantities: ModeQuantities,
    pub half_length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub duration: f64,
    pub phase_step: f64,
    pub n_compensation: f64,
    pub fit_before: SolitonFit,
    pub fit_after: SolitonFit,
    /// Fitted displacement of the packet run.
    pub dx_raw: f64,
    /// Displacement of the bare soliton over the same run (time-step drift).
    pub bare_drift: f64,
    /// `dx_raw − bare_drift`.
    pub dx: f64,
    pub dx_over_eps2: f64,
    pub drifts: Drifts,
}

/// Fitted displacement of the bare soliton over the shift protocol's ring,
/// step and duration for `point`.
pub fn bare_soliton_drift(point: &SweepPoint, opts: &SolverOptions) -> Result<f64> {
    let plan = plan_shift(point, opts)?;
    let p = &plan.params;
    let bg = background_field(&plan.spectrum);
    let field = graysol::evolve::WaveField::new(bg, plan.geom, Frame::of(p))?;
    let xs = plan.geom.positions();
    let before = fit_at(&xs, &field.density(), p, p.x0)?;
    let evolve_opts = EvolveOptions {
        dt: opts.dt(&plan.geom, &field.frame),
        sample_every: opts.sample_every,
        seam_guard: None,
    };
    let (end, _) = evolve(&field, plan.duration, &evolve_opts)?;
    let after = fit_at(&xs, &end.density(), p, before.c3)?;
    Ok(after.c3 - before.c3)
}

fn fit_at(xs: &[f64], density: &[f64], p: &SolitonParams, x: f64) -> Result<SolitonFit> {
    fit_soliton_position(
        xs,
        density,
        x,
        FIT_HALF_WINDOW,
        FitGuess {
            c1: p.beta.abs(),
            c2: p.kappa(),
            c3: x,
        },
    )
}

/// Second-order packet launched at `−7λ`, evolved until its center reaches
/// `+7λ`, with the soliton fitted before and after and the bare drift removed.
pub fn soliton_shift_point(point: &SweepPoint, opts: &SolverOptions) -> Result<ShiftOutcome> {
    let bare = bare_soliton_drift(point, opts)?;
    soliton_shift_point_with(point, opts, bare)
}

/// As [`soliton_shift_point`] with a precomputed bare drift.
pub fn soliton_shift_point_with(
    point: &SweepPoint,
    opts: &SolverOptions,
    bare_drift: f64,
) -> Result<ShiftOutcome> {
    let plan = plan_shift(point, opts)?;
    let (p, geom) = (&plan.params, &plan.geom);
    let spec = PacketSpec {
        k_center: plan.k,
        lambda: point.lambda,
        epsilon: point.epsilon,
        x_init: SHIFT_LAUNCH * point.lambda,
    };
    let InitialState { field, report } = build_initial_state(&plan.spectrum, &spec, Order::Second)?;
    let xs = geom.positions();
    let fit_before = fit_at(&xs, &field.density(), p, p.x0)?;
    let dt = opts.dt(geom, &field.frame);
    let evolve_opts = EvolveOptions {
        dt,
        sample_every: opts.sample_every,
        seam_guard: None,
    };
    let (end, series) = evolve(&field, plan.duration, &evolve_opts)?;
    let fit_after = fit_at(&xs, &end.density(), p, fit_before.c3)?;
    let dx_raw = measure_soliton_shift(&fit_before, &fit_after, point.epsilon).dx;
    let dx = dx_raw - bare_drift;
    Ok(ShiftOutcome {
        point: *point,
        k_snapped: plan.k,
        quantities: plan.quantities,
        half_length: geom.half_length,
        n_points: geom.n_points,
        dt: effective_dt(plan.duration, dt),
        duration: plan.duration,
        phase_step: report.phase_step,
        n_compensation: report.n_compensation,
        fit_before,
        fit_after,
        dx_raw,
        bare_drift,
        dx,
        dx_over_eps2: dx / (point.epsilon * point.epsilon),
        drifts: Drifts::of(&series),
    })
}

/// Effective envelope breadth after dispersive spreading for time `t`.
pub fn broadened_breadth(k: f64, lambda: f64, p: &SolitonParams, t: f64) -> f64 {
    let shear = dispersion_curvature(k, p) * t;
    ((lambda.powi(4) + shear * shear) / (lambda * lambda)).sqrt()
}

/// Ring for a packet launched at `x_init < 0` that ends at `−x_init`.
pub fn plan_advance(point: &SweepPoint, x_init: f64, opts: &SolverOptions) -> Result<Plan> {
    let p = SolitonParams::comoving(point.beta, point.mu)?;
    plan_run(point, opts, -2.0 * x_init, |t| {
        -x_init + 5.0 * broadened_breadth(point.k, point.lambda, &p, t) + 10.0
    })
}

/// Final profiles and envelope centers of the paired runs.
#[derive(Debug, Clone, Serialize)]
pub struct AdvanceOutcome {
    pub point: SweepPoint,
    pub x_init: f64,
    pub k_snapped: f64,
    pub quantities: ModeQuantities,
    pub half_length: f64,
    pub control_half_length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub duration: f64,
    pub region: (f64, f64),
    pub center_soliton_run: f64,
    pub center_control_run: f64,
    pub advance: f64,
    /// `x_i + νT + Δ` and `x_i + ν̃T + Δ`.
    pub center_pred_nu: f64,
    pub center_pred_nu_corr: f64,
    /// Centroid of the analytic envelope with `λ⁻²` corrections.
    pub center_pred_envelope: f64,
    pub drifts: Drifts,
    #[serde(skip)]
    pub soliton_profile: PacketSnapshot,
    #[serde(skip)]
    pub control_profile: PacketSnapshot,
    /// Analytic `δρ` moving at `ν` and at `ν̃`, on the soliton-run grid.
    #[serde(skip)]
    pub overlay_nu: Vec<f64>,
    #[serde(skip)]
    pub overlay_nu_corr: Vec<f64>,
}

/// Far-field `δρ = 2Re(ψ̄*εψ₁)` of the analytic envelope, translated back by `lag`.
fn overlay_density(
    plan: &Plan,
    lambda: f64,
    x_init: f64,
    xs: &[f64],
    lag: f64,
) -> Result<Vec<f64>> {
    let p = &plan.params;
    let shifted: Vec<f64> = xs.iter().map(|x| x + lag).collect();
    let raw = plan.quantities.raw_amplitude;
    let env = envelope_second_order(
        plan.k,
        lambda,
        raw,
        p,
        plan.duration,
        &shifted,
        PacketFrame::launched(x_init),
    )?;
    Ok(shifted
        .iter()
        .zip(&env)
        .map(|(&x, e)| {
            let side = if x < p.x0 { Side::Left } else { Side::Right };
            2.0 * ((p.flow_phase(x) * p.asymptote(side)).conj() * e).re
        })
        .collect())
}

/// First-order packet on the soliton ring and on a uniform ring with the
/// same density and flow, both launched at `x_init` and evolved until the
/// packet center is as far past the soliton as it started before it.
pub fn packet_advance_point(
    point: &SweepPoint,
    x_init: f64,
    opts: &SolverOptions,
) -> Result<AdvanceOutcome> {
    let plan = plan_advance(point, x_init, opts)?;
    let (p, geom, q, k, duration) = (
        &plan.params,
        &plan.geom,
        &plan.quantities,
        plan.k,
        plan.duration,
    );

    let control_geom = opts.geometry(uniform_ring_length(point.beta, geom.half_length)?)?;
    let margin = 8.0 / point.lambda;
    let control_spectrum =
        DiscreteSpectrum::uniform(p, &control_geom, (k - margin).max(0.0), k + margin)?;
    let spec = PacketSpec {
        k_center: k,
        lambda: point.lambda,
        epsilon: point.epsilon,
        x_init,
    };

    let frame = Frame::of(p);
    let dt = opts.dt(geom, &frame).min(opts.dt(&control_geom, &frame));
    let evolve_opts = EvolveOptions {
        dt,
        sample_every: opts.sample_every,
        seam_guard: None,
    };
    let run = |spectrum: &DiscreteSpectrum| -> Result<(PacketSnapshot, Drifts)> {
        let state = build_initial_state(spectrum, &spec, Order::First)?;
        let (end, series) = evolve(&state.field, duration, &evolve_opts)?;
        let bg: Vec<f64> = background_field(spectrum)
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let snap =
            PacketSnapshot::new(end.time, spectrum.geometry.positions(), &end.density(), &bg);
        Ok((snap, Drifts::of(&series)))
    };
    let (with, d1) = run(&plan.spectrum)?;
    let (without, d2) = run(&control_spectrum)?;

    let center_nu = x_init + q.nu * duration + q.delta;
    let center_nu_corr = x_init + q.nu_corr * duration + q.delta;
    let spread = broadened_breadth(k, point.lambda, p, duration);
    let region = (
        (center_nu_corr - 5.0 * spread).max(10.0 / p.kappa()),
        (center_nu_corr + 5.0 * spread).min(geom.half_length.min(control_geom.half_length) - 1.0),
    );
    let center_soliton_run = with.envelope_center(region)?;
    let center_control_run = without.envelope_center(region)?;
    let overlay_nu_corr = overlay_density(&plan, point.lambda, x_init, &with.xs, 0.0)?;
    let overlay_nu = overlay_density(
        &plan,
        point.lambda,
        x_init,
        &with.xs,
        (q.nu_corr - q.nu) * duration,
    )?;
    let center_pred_envelope = envelope_centroid(&with.xs, &overlay_nu_corr, region)?;
    Ok(AdvanceOutcome {
        point: *point,
        x_init,
        k_snapped: k,
        quantities: *q,
        half_length: geom.half_length,
        control_half_length: control_geom.half_length,
        n_points: geom.n_points,
        dt: effective_dt(duration, dt),
        duration,
        region,
        center_soliton_run,
        center_control_run,
        advance: center_soliton_run - center_control_run,
        center_pred_nu: center_nu,
        center_pred_nu_corr: center_nu_corr,
        center_pred_envelope,
        drifts: d1.max(d2),
        soliton_profile: with,
        control_profile: without,
        overlay_nu,
        overlay_nu_corr,
    })
}

/// Launch and end positions for the center-of-mass protocol, in units of `λ`.
pub const COM_LAUNCH: f64 = -10.0;
pub const COM_END: f64 = 10.0;
const SEAM_MARGIN: f64 = 20.0;

/// Ring large enough that neither the packet, the compensation pulse nor
/// radiation from the launch reach the seam during the run.
pub fn plan_com(point: &SweepPoint, opts: &SolverOptions) -> Result<Plan> {
    let p = SolitonParams::comoving(point.beta, point.mu)?;
    let l = point.lambda;
    let x_init = COM_LAUNCH * l;
    let c = p.sound_speed();
    let breadth = 3.0 * l;
    let trailing = x_init - SUPPORT * l - 4.0 * breadth - 5.0 * breadth;
    // the missing second-harmonic dressing radiates near 2k
    let k_fast = 2.0 * point.k + SUPPORT / l;
    let backward = group_velocity(-k_fast, &p).abs().max(c + point.beta);
    let forward = group_velocity(k_fast, &p);
    plan_run(point, opts, (COM_END - COM_LAUNCH) * l, |t| {
        let left =
            (-trailing + 1.1 * (c + point.beta) * t).max(-x_init + SUPPORT * l + backward * t);
        let right = (-x_init + SUPPORT * l + forward * t).max(COM_END * l + SUPPORT * l);
        left.max(right) + SEAM_MARGIN + 10.0
    })
}

/// Center-of-mass speed before and after the packet passes the soliton.
#[derive(Debug, Clone, Serialize)]
pub struct ComOutcome {
    pub point: SweepPoint,
    pub k_snapped: f64,
    pub quantities: ModeQuantities,
    pub half_length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub duration: f64,
    pub crossing_time: f64,
    pub before: (f64, f64),
    pub after: (f64, f64),
    pub qdot_before: f64,
    pub qdot_after: f64,
    /// `|Q̇₊ − Q̇₋|`.
    pub residual: f64,
    pub drifts: Drifts,
    #[serde(skip)]
    pub series: Vec<Observables>,
}

/// Least-squares slope of `y(t)`.
pub fn regression_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        sxy += (t - tm) * (y - ym);
        sxx += (t - tm) * (t - tm);
    }
    sxy / sxx
}

fn slope_over(series: &[Observables], window: (f64, f64)) -> Result<f64> {
    let (ts, qs): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|o| o.t >= window.0 && o.t <= window.1)
        .map(|o| (o.t, o.q))
        .unzip();
    if ts.len() < 3 {
        return Err(Error::DegenerateWindow(format!(
            "{} samples in [{}, {}]",
            ts.len(),
            window.0,
            window.1
        )));
    }
    Ok(regression_slope(&ts, &qs))
}

/// Second-order packet from `−10λ` to `+10λ` under a seam guard; `Q̇` is
/// fitted over `[0, t_c − 5λ/ν]` and `[t_c + 5λ/ν, T]`.
pub fn com_speed_point(point: &SweepPoint, opts: &SolverOptions) -> Result<ComOutcome> {
    let plan = plan_com(point, opts)?;
    let (geom, q) = (&plan.geom, &plan.quantities);
    let x_init = COM_LAUNCH * point.lambda;
    let spec = PacketSpec {
        k_center: plan.k,
        lambda: point.lambda,
        epsilon: point.epsilon,
        x_init,
    };
    let state = build_initial_state(&plan.spectrum, &spec, Order::Second)?;
    let reference: Vec<f64> = background_field(&plan.spectrum)
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let dt = opts.dt(geom, &state.field.frame);
    let evolve_opts = EvolveOptions {
        dt,
        sample_every: opts.sample_every,
        seam_guard: Some(SeamGuard::new(reference, SEAM_MARGIN)),
    };
    let (_, series) = evolve(&state.field, plan.duration, &evolve_opts)?;
    let crossing_time = -x_init / q.nu;
    let gap = 5.0 * point.lambda / q.nu;
    let before = (0.0, crossing_time - gap);
    let after = (crossing_time + gap, plan.duration);
    let qdot_before = slope_over(&series, before)?;
    let qdot_after = slope_over(&series, after)?;
    Ok(ComOutcome {
        point: *point,
        k_snapped: plan.k,
        quantities: *q,
        half_length: geom.half_length,
        n_points: geom.n_points,
        dt: effective_dt(plan.duration, dt),
        duration: plan.duration,
        crossing_time,
        before,
        after,
        qdot_before,
        qdot_after,
        residual: (qdot_after - qdot_before).abs(),
        drifts: Drifts::of(&series),
        series,
    })
}
