//! Strang split-step Fourier propagation of
//! `i∂tψ = (−½∂² + i(β−v)∂ + |ψ|² − μ̃)ψ` on the ring.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analytic::SolitonParams;
use crate::ring::RingGeometry;
use crate::spectral::Fourier;
use crate::{Error, Result};

/// Frame constants of the evolution equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub beta: f64,
    pub v: f64,
    pub mu_tilde: f64,
}

impl Frame {
    pub fn of(p: &SolitonParams) -> Self {
        Self {
            beta: p.beta,
            v: p.v,
            mu_tilde: p.mu_tilde(),
        }
    }

    /// Coefficient of `i∂x`.
    pub fn drift(&self) -> f64 {
        self.beta - self.v
    }
}

/// Field samples on the ring at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub psi: Vec<C64>,
    pub time: f64,
    pub geom: RingGeometry,
    pub frame: Frame,
}

/// Center of mass, momentum and number at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub n: f64,
}

impl WaveField {
    pub fn new(psi: Vec<C64>, geom: RingGeometry, frame: Frame) -> Result<Self> {
        geom.validate()?;
        if psi.len() != geom.n_points {
            return Err(Error::InvalidGeometry(format!(
                "{} samples for {} points",
                psi.len(),
                geom.n_points
            )));
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite field sample".into()));
        }
        Ok(Self {
            psi,
            time: 0.0,
            geom,
            frame,
        })
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn number(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.geom.dx()
    }

    /// `∫x|ψ|²dx` with `x ∈ [−L, L)`.
    pub fn center_of_mass(&self) -> f64 {
        let g = &self.geom;
        self.psi
            .iter()
            .enumerate()
            .map(|(j, z)| g.x(j) * z.norm_sqr())
            .sum::<f64>()
            * g.dx()
    }

    /// `∫Im(ψ*∂xψ)dx` evaluated spectrally.
    pub fn momentum(&self, fft: &mut Fourier) -> f64 {
        let mut buf = self.psi.clone();
        fft.forward(&mut buf);
        let n = self.geom.n_points;
        let qs = self.geom.wavenumbers();
        let s: f64 = buf
            .iter()
            .zip(&qs)
            .enumerate()
            .filter(|(j, _)| *j != n / 2)
            .map(|(_, (z, q))| q * z.norm_sqr())
            .sum();
        s * self.geom.dx() / n as f64
    }

    pub fn observables(&self, fft: &mut Fourier) -> Observables {
        Observables {
            t: self.time,
            q: self.center_of_mass(),
            p: self.momentum(fft),
            n: self.number(),
        }
    }
}

/// `max_q (q²/2 + |β−v||q|)` over the grid.
pub fn max_symbol(geom: &RingGeometry, frame: &Frame) -> f64 {
    let q = geom.q_max();
    0.5 * q * q + frame.drift().abs() * q
}

/// Largest step allowed by the guard `dt·max symbol ≤ 0.5`.
pub fn stable_dt(geom: &RingGeometry, frame: &Frame) -> f64 {
    0.5 / max_symbol(geom, frame)
}

/// Reusable propagator for a fixed grid, frame and step.
pub struct Propagator {
    dt: f64,
    mu_tilde: f64,
    kinetic: Vec<C64>,
    fft: Fourier,
}

impl Propagator {
    pub fn new(geom: &RingGeometry, frame: &Frame, dt: f64) -> Result<Self> {
        geom.validate()?;
        let guard = dt * max_symbol(geom, frame);
        if !(dt > 0.0) || guard > 0.5 * (1.0 + 1e-12) {
            return Err(Error::UnstableStep(guard));
        }
        let scale = 1.0 / geom.n_points as f64;
        let kinetic = geom
            .wavenumbers()
            .iter()
            .map(|&q| C64::from_polar(scale, -(0.5 * q * q - frame.drift() * q) * dt))
            .collect();
        Ok(Self {
            dt,
            mu_tilde: frame.mu_tilde,
            kinetic,
            fft: Fourier::new(geom.n_points),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn fourier(&mut self) -> &mut Fourier {
        &mut self.fft
    }

    /// Multiplies by `e^{−i(|ψ|²−μ̃)h}` and returns `Σ|ψ|²`.
    fn potential(&self, psi: &mut [C64], h: f64) -> f64 {
        let mut sum = 0.0;
        for z in psi.iter_mut() {
            let rho = z.norm_sqr();
            sum += rho;
            let (s, c) = (-(rho - self.mu_tilde) * h).sin_cos();
            *z *= C64::new(c, s);
        }
        sum
    }

    fn kinetic(&mut self, psi: &mut [C64]) {
        self.fft.forward(psi);
        for (z, m) in psi.iter_mut().zip(&self.kinetic) {
            *z *= m;
        }
        self.fft.inverse(psi);
    }

    /// Advances `steps` Strang steps, merging adjacent half nonlinear steps.
    pub fn advance(&mut self, field: &mut WaveField, steps: usize) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        let dt = self.dt;
        let mut last = self.potential(&mut field.psi, 0.5 * dt);
        for i in 0..steps {
            self.kinetic(&mut field.psi);
            let h = if i + 1 == steps { 0.5 * dt } else { dt };
            let sum = self.potential(&mut field.psi, h);
            let drift = ((sum - last) / last).abs();
            if !drift.is_finite() || drift > 1e-8 {
                return Err(Error::InstabilityDetected {
                    t: field.time + (i + 1) as f64 * dt,
                    drift,
                });
            }
            last = sum;
        }
        field.time += steps as f64 * dt;
        Ok(())
    }
}

/// One Strang step of size `dt`.
pub fn step(state: &WaveField, dt: f64) -> Result<WaveField> {
    let mut prop = Propagator::new(&state.geom, &state.frame, dt)?;
    let mut out = state.clone();
    prop.advance(&mut out, 1)?;
    Ok(out)
}

/// Guard against perturbation density near the seam.
#[derive(Debug, Clone, PartialEq)]
pub struct SeamGuard {
    /// Background density the perturbation is measured against.
    pub reference: Vec<f64>,
    /// Width of the protected zone on each side of the seam.
    pub margin: f64,
    /// Allowed fraction of `∫|δρ|` inside the zone.
    pub tolerance: f64,
}

impl SeamGuard {
    pub fn new(reference: Vec<f64>, margin: f64) -> Self {
        Self {
            reference,
            margin,
            tolerance: 1e-6,
        }
    }

    /// Fraction of `∫|ρ − ρ_ref|` within `margin` of the seam.
    pub fn fraction(&self, field: &WaveField) -> f64 {
        let g = &field.geom;
        let (mut near, mut total) = (0.0, 0.0);
        for (j, (z, r)) in field.psi.iter().zip(&self.reference).enumerate() {
            let d = (z.norm_sqr() - r).abs();
            total += d;
            if g.half_length - g.x(j).abs() <= self.margin {
                near += d;
            }
        }
        if total > 0.0 {
            near / total
        } else {
            0.0
        }
    }

    pub fn check(&self, field: &WaveField) -> Result<()> {
        let fraction = self.fraction(field);
        if fraction > self.tolerance {
            return Err(Error::SeamCrossing {
                t: field.time,
                fraction,
            });
        }
        Ok(())
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub sample_every: usize,
    pub seam_guard: Option<SeamGuard>,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            sample_every: 100,
            seam_guard: None,
        }
    }
}

/// Evolves for duration `t_total` (the step is shortened so that an integer
/// number of steps lands exactly on it), sampling observables every
/// `sample_every` steps and at the end.
pub fn evolve(
    state: &WaveField,
    t_total: f64,
    opts: &EvolveOptions,
) -> Result<(WaveField, Vec<Observables>)> {
    if !(t_total > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "duration {t_total} must be positive"
        )));
    }
    let steps = (t_total / opts.dt).ceil() as usize;
    let dt = t_total / steps as f64;
    let mut prop = Propagator::new(&state.geom, &state.frame, dt)?;
    let mut field = state.clone();
    let t0 = field.time;
    let every = opts.sample_every.max(1);
    let mut series = vec![field.observables(prop.fourier())];
    let mut done = 0;
    while done < steps {
        let chunk = every.min(steps - done);
        prop.advance(&mut field, chunk)?;
        done += chunk;
        field.time = t0 + done as f64 * dt;
        if let Some(guard) = &opts.seam_guard {
            guard.check(&field)?;
        }
        series.push(field.observables(prop.fourier()));
    }
    Ok((field, series))
}

const MAGIC: &[u8; 4] = b"GSCK";
const VERSION: u32 = 1;

/// Writes a little-endian binary checkpoint:
/// magic `GSCK`, u32 version, u64 n_points, f64 half_length, f64 beta,
/// f64 v, f64 mu_tilde, f64 time, then n_points pairs of f64 (re, im).
pub fn write_checkpoint<W: Write>(field: &WaveField, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.geom.n_points as u64).to_le_bytes())?;
    for x in [
        field.geom.half_length,
        field.frame.beta,
        field.frame.v,
        field.frame.mu_tilde,
        field.time,
    ] {
        w.write_all(&x.to_le_bytes())?;
    }
    for z in &field.psi {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<WaveField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut f = || -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let half_length = f()?;
    let frame = Frame {
        beta: f()?,
        v: f()?,
        mu_tilde: f()?,
    };
    let time = f()?;
    let geom = RingGeometry::new(half_length, n)?;
    let mut psi = Vec::with_capacity(n);
    for _ in 0..n {
        psi.push(C64::new(f()?, f()?));
    }
    let mut field = WaveField::new(psi, geom, frame)?;
    field.time = time;
    Ok(field)
}
