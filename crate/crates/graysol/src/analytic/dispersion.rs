use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{sgn, Direction, SolitonParams};
use crate::{Error, Result};

/// Bogoliubov frequency in the soliton frame, `Ω = −βk + √(k⁴/4 + μk²)`.
pub fn dispersion(k: f64, p: &SolitonParams) -> f64 {
    -p.beta * k + lab_energy(k, p.mu)
}

/// Uniform-background Bogoliubov energy `|k|√(k²/4 + μ) = Ω + βk`.
pub fn lab_energy(k: f64, mu: f64) -> f64 {
    k.abs() * (0.25 * k * k + mu).sqrt()
}

/// Group velocity `dΩ/dk`. At `k = 0` the forward branch `c − β` is returned;
/// use [`phonon_velocity`] to pick the branch explicitly.
pub fn group_velocity(k: f64, p: &SolitonParams) -> f64 {
    let k2 = k * k;
    sgn(k) * (k2 + 2.0 * p.mu) / (k2 + 4.0 * p.mu).sqrt() - p.beta
}

pub fn phonon_velocity(dir: Direction, p: &SolitonParams) -> f64 {
    dir.sign() * p.sound_speed() - p.beta
}

/// `Ω''(k) = |k|(k² + 6μ)/(k² + 4μ)^{3/2}`.
pub fn dispersion_curvature(k: f64, p: &SolitonParams) -> f64 {
    let k2 = k * k;
    k.abs() * (k2 + 6.0 * p.mu) / (k2 + 4.0 * p.mu).powf(1.5)
}

fn theta_args(k: f64, p: &SolitonParams) -> (f64, f64) {
    let kap = p.kappa();
    let a = k * kap * kap - p.beta * dispersion(k, p);
    (2.0 * a, kap * k * k)
}

/// `e^{iθ_k} = (2i(kκ² − βΩ) + κk²)/(2i(kκ² − βΩ) − κk²)`.
pub fn phase_factor(k: f64, p: &SolitonParams) -> C64 {
    if k == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let (im, re) = theta_args(k, p);
    C64::new(re, im) / C64::new(-re, im)
}

/// Phase shift across the soliton on the continuous branch with `θ(0) = 0`.
pub fn phase_shift(k: f64, p: &SolitonParams) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let (im, re) = theta_args(k, p);
    2.0 * im.atan2(re) - sgn(k) * PI
}

/// Packet advance `Δ_k = −dθ/dk = κk²/(Ω(Ω + βk))`.
pub fn packet_advance(k: f64, p: &SolitonParams) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber("use advance_limit for k -> 0"));
    }
    let om = dispersion(k, p);
    Ok(p.kappa() * k * k / (om * (om + p.beta * k)))
}

/// Phonon limit `Δ₀ = κ/(c(c − sgn(k)β))`.
pub fn advance_limit(dir: Direction, p: &SolitonParams) -> f64 {
    let c = p.sound_speed();
    p.kappa() / (c * (c - dir.sign() * p.beta))
}

/// `dΔ/dk = −θ''`.
pub fn advance_slope(k: f64, p: &SolitonParams) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber("advance slope at k = 0"));
    }
    let om = dispersion(k, p);
    let e = om + p.beta * k;
    let nu = group_velocity(k, p);
    let num = 2.0 * k * om * e - k * k * (nu * e + om * (nu + p.beta));
    Ok(p.kappa() * num / (om * e).powi(2))
}

/// Large-k semiclassical advance `4κ/k²`.
pub fn wkb_advance(k: f64, kappa: f64) -> f64 {
    4.0 * kappa / (k * k)
}
