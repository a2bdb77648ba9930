use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{
    advance_slope, dispersion, dispersion_curvature, group_velocity, packet_advance, phase_shift,
    sgn, uniform_amplitudes, Side, SolitonParams, UniformAmplitudes,
};
use crate::{Error, Result};

/// Placement of a Gaussian packet with amplitudes
/// `a_k ∝ e^{-λ²(k-k0)²/2} e^{-ik·origin} e^{i·theta_bias·θ_k}`.
///
/// `centered()` puts the packet at `x = 0` with the phase split `±θ/2`;
/// `launched(x_i)` makes the left-side envelope identical to a
/// uniform-background packet at `x_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketFrame {
    pub origin: f64,
    pub theta_bias: f64,
}

impl PacketFrame {
    pub fn centered() -> Self {
        Self {
            origin: 0.0,
            theta_bias: 0.0,
        }
    }

    pub fn launched(x_init: f64) -> Self {
        Self {
            origin: x_init,
            theta_bias: 0.5,
        }
    }

    /// Multiple of `θ_k` carried by the packet on `side`.
    pub fn theta_weight(&self, side: Side) -> f64 {
        self.theta_bias + 0.5 * side.sign()
    }

    /// Leading-order envelope center on `side` at time `t`. Since
    /// `θ_{k+q} ≈ θ_k − Δ_k q`, a factor `e^{imθ}` moves the envelope by `+mΔ`.
    pub fn center(&self, k: f64, p: &SolitonParams, t: f64, side: Side) -> Result<f64> {
        let m = self.theta_weight(side);
        Ok(self.origin + group_velocity(k, p) * t + m * packet_advance(k, p)?)
    }
}

/// Coefficients of the second-order dressing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressingCoefficients {
    pub eta: f64,
    pub zeta: f64,
    /// `(ν + β)² − c²`.
    pub denominator: f64,
    /// `η + (ν + β)ζ`.
    pub density: f64,
    /// `(ν + β)η + c²ζ`.
    pub phase: f64,
}

pub fn dressing_coefficients(k: f64, p: &SolitonParams) -> Result<DressingCoefficients> {
    p.validate()?;
    if k == 0.0 {
        return Err(Error::ZeroWavenumber("dressing at k = 0"));
    }
    // Closed forms in r = |k|/√(k²+4μ); the direct η + (ν+β)ζ loses digits as k → 0.
    let mu = p.mu;
    let k2 = k * k;
    let q = k2 + 4.0 * mu;
    let s2 = 1.0 / (8.0 * PI);
    let denominator = k2 * (k2 + 3.0 * mu) / q;
    if denominator.abs() < 1e-300 {
        return Err(Error::DegenerateDenominator {
            k,
            value: denominator,
        });
    }
    Ok(DressingCoefficients {
        eta: 4.0 * s2 * (k2 + mu) / (k.abs() * q.sqrt()),
        zeta: -8.0 * mu * s2 / (k * q),
        denominator,
        density: 4.0 * s2 * k.abs() * (k2 + 3.0 * mu) / q.powf(1.5),
        phase: 4.0 * s2 * k * (k2 + 3.0 * mu) / q,
    })
}

/// Far-field phase step of the dressing per unit raw `ε²`.
pub fn dressing_phase_step(k: f64, lambda: f64, p: &SolitonParams) -> Result<f64> {
    let d = dressing_coefficients(k, p)?;
    Ok(2.0 * PI.sqrt() * d.phase / (lambda * d.denominator))
}

/// Relative amplitude `A(z)` and phase gradient `B'(z)` of the dressing
/// per unit raw `ε²`, such that the far field reads `ψ_≷ (1 + A) e^{iB}`.
pub fn dressing_relative(d: &DressingCoefficients, lambda: f64, z: f64) -> (f64, f64) {
    let g = (-(z * z) / (lambda * lambda)).exp() / (lambda * lambda * d.denominator);
    (g * d.density, 2.0 * g * d.phase)
}

/// Second-order dressing `ε²ψ₂^≷` in the far field (`ψ₂^fast` omitted).
/// `epsilon` is the raw packet amplitude.
#[allow(clippy::too_many_arguments)]
pub fn dressing_profile(
    k: f64,
    lambda: f64,
    epsilon: f64,
    p: &SolitonParams,
    t: f64,
    xs: &[f64],
    frame: PacketFrame,
) -> Result<Vec<C64>> {
    p.validate()?;
    let d = dressing_coefficients(k, p)?;
    let left = frame.center(k, p, t, Side::Left)?;
    let right = frame.center(k, p, t, Side::Right)?;
    let e2 = epsilon * epsilon;
    Ok(xs
        .iter()
        .map(|&x| {
            let side = if x < p.x0 { Side::Left } else { Side::Right };
            let z = x - if side == Side::Left { left } else { right };
            let gauss = (-(z * z) / (lambda * lambda)).exp() / (lambda * lambda) * d.density;
            let step = PI.sqrt() / lambda * libm::erf(z / lambda) * d.phase;
            let far = p.flow_phase(x) * p.asymptote(side);
            far * C64::new(gauss, step) * (e2 / d.denominator)
        })
        .collect())
}

/// First- and second-order excited-atom numbers for raw amplitude `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitedNumbers {
    pub n1: f64,
    pub n2: f64,
}

impl ExcitedNumbers {
    pub fn total(&self) -> f64 {
        self.n1 + self.n2
    }
}

pub fn excited_numbers(
    k: f64,
    lambda: f64,
    epsilon: f64,
    p: &SolitonParams,
) -> Result<ExcitedNumbers> {
    let a = uniform_amplitudes(k, p)?;
    let d = dressing_coefficients(k, p)?;
    let s = epsilon * epsilon * PI.sqrt() / lambda;
    Ok(ExcitedNumbers {
        n1: s * (a.u * a.u + a.v * a.v),
        n2: s * 2.0 * p.mu * d.density / d.denominator,
    })
}

/// Raw amplitude giving `N₁ = ε²` for the normalized amplitude `epsilon`.
pub fn raw_amplitude(k: f64, lambda: f64, epsilon: f64, p: &SolitonParams) -> Result<f64> {
    let a = uniform_amplitudes(k, p)?;
    Ok(epsilon * (lambda / (PI.sqrt() * (a.u * a.u + a.v * a.v))).sqrt())
}

/// Predicted soliton displacement `Δ_k(N₁ + N₂)/(2κ)` for raw amplitude `epsilon`.
pub fn soliton_shift_prediction(
    k: f64,
    lambda: f64,
    epsilon: f64,
    p: &SolitonParams,
) -> Result<f64> {
    let n = excited_numbers(k, lambda, epsilon, p)?;
    Ok(packet_advance(k, p)? * n.total() / (2.0 * p.kappa()))
}

/// Same prediction with the dressing contribution `N₂` dropped.
pub fn soliton_shift_without_dressing(
    k: f64,
    lambda: f64,
    epsilon: f64,
    p: &SolitonParams,
) -> Result<f64> {
    let n = excited_numbers(k, lambda, epsilon, p)?;
    Ok(packet_advance(k, p)? * n.n1 / (2.0 * p.kappa()))
}

/// Envelope group velocity including the `λ⁻²` correction.
pub fn corrected_group_velocity(k: f64, lambda: f64, p: &SolitonParams) -> Result<f64> {
    let a = uniform_amplitudes(k, p)?;
    Ok(group_velocity(k, p)
        + (a.du + a.dv) / (a.u + a.v) * dispersion_curvature(k, p) / (lambda * lambda))
}

fn gaussian_term(
    j: f64,
    dj: f64,
    d2j: f64,
    lambda: f64,
    shear: f64,
    z: f64,
    t: f64,
) -> Result<C64> {
    let width = C64::new(lambda * lambda - (d2j / j - (dj / j).powi(2)), shear);
    if width.re <= 0.0 {
        return Err(Error::InvalidWidth { re: width.re, t });
    }
    let w = C64::new(z, -dj / j);
    Ok(j * (-(w * w) / (2.0 * width)).exp() / width.sqrt())
}

/// First-order packet `εψ₁` in the far field including `λ⁻²` envelope
/// corrections and dispersive broadening. `epsilon` is the raw amplitude.
#[allow(clippy::too_many_arguments)]
pub fn envelope_second_order(
    k: f64,
    lambda: f64,
    epsilon: f64,
    p: &SolitonParams,
    t: f64,
    xs: &[f64],
    frame: PacketFrame,
) -> Result<Vec<C64>> {
    p.validate()?;
    let a: UniformAmplitudes = uniform_amplitudes(k, p)?;
    let om = dispersion(k, p);
    let nu = group_velocity(k, p);
    let theta = phase_shift(k, p);
    let delta = packet_advance(k, p)?;
    let d2theta = -advance_slope(k, p)?;
    let curv = dispersion_curvature(k, p);
    let c = p.sound_speed();
    xs.iter()
        .map(|&x| {
            let side = if x < p.x0 { Side::Left } else { Side::Right };
            let m = frame.theta_weight(side);
            let z = x - frame.origin - nu * t - m * delta;
            let shear = curv * t - m * d2theta;
            let phi = k * (x - frame.origin) + m * theta - om * t;
            let carrier = C64::from_polar(1.0, phi);
            let up = carrier * gaussian_term(a.u, a.du, a.d2u, lambda, shear, z, t)?;
            let vp = carrier * gaussian_term(a.v, a.dv, a.d2v, lambda, shear, z, t)?;
            let far = p.flow_phase(x) * p.asymptote(side) / c;
            Ok(far * (up + vp.conj()) * (epsilon * sgn(k)))
        })
        .collect()
}
