use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{sech2, Side};
use crate::{Error, Result};

/// Gray-soliton background `ψ₀ = e^{-iv(x-x0)}(iβ + κ tanh κ(x-x0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    /// Soliton speed.
    pub beta: f64,
    /// Background flow speed.
    pub v: f64,
    /// Asymptotic density `c²`.
    pub mu: f64,
    /// Soliton position.
    pub x0: f64,
}

impl SolitonParams {
    pub fn new(beta: f64, v: f64, mu: f64, x0: f64) -> Result<Self> {
        let p = Self { beta, v, mu, x0 };
        p.validate()?;
        Ok(p)
    }

    /// Soliton at rest in its own frame (`v = β`, `x0 = 0`).
    pub fn comoving(beta: f64, mu: f64) -> Result<Self> {
        Self::new(beta, beta, mu, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite()
            && self.v.is_finite()
            && self.mu.is_finite()
            && self.x0.is_finite())
        {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if self.beta * self.beta >= self.mu {
            return Err(Error::InvalidParams(format!(
                "beta^2 = {} must be below mu = {}",
                self.beta * self.beta,
                self.mu
            )));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        (self.mu - self.beta * self.beta).sqrt()
    }

    pub fn sound_speed(&self) -> f64 {
        self.mu.sqrt()
    }

    /// Chemical potential in the soliton frame, `μ + vβ − v²/2`.
    pub fn mu_tilde(&self) -> f64 {
        self.mu + self.v * self.beta - 0.5 * self.v * self.v
    }

    pub fn with_position(self, x0: f64) -> Self {
        Self { x0, ..self }
    }

    /// Background flow factor `e^{-iv(x-x0)}`.
    pub fn flow_phase(&self, x: f64) -> C64 {
        C64::from_polar(1.0, -self.v * (x - self.x0))
    }

    /// Profile without the flow factor, `iβ + κ tanh κ(x-x0)`.
    pub fn reduced(&self, x: f64) -> C64 {
        let k = self.kappa();
        C64::new(k * (k * (x - self.x0)).tanh(), self.beta)
    }

    pub fn profile(&self, x: f64) -> C64 {
        self.flow_phase(x) * self.reduced(x)
    }

    pub fn density(&self, x: f64) -> f64 {
        let k = self.kappa();
        self.mu - k * k * sech2(k * (x - self.x0))
    }

    /// Reduced far-field value `iβ ± κ`.
    pub fn asymptote(&self, side: Side) -> C64 {
        C64::new(side.sign() * self.kappa(), self.beta)
    }

    /// Total phase jump `arg(ψ_>/ψ_<)` across the soliton.
    pub fn phase_jump(&self) -> f64 {
        (self.asymptote(Side::Right) / self.asymptote(Side::Left)).arg()
    }
}

/// Soliton amplitude at `x`.
pub fn soliton_profile(p: &SolitonParams, x: f64) -> Result<C64> {
    p.validate()?;
    Ok(p.profile(x))
}

/// Discrete zero-mode pair of the soliton.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroModePair {
    /// Translation mode `R_z ∝ (iv + ∂x)ψ₀`.
    pub r_z: Vec<C64>,
    /// Conjugate velocity mode `S_z`.
    pub s_z: Vec<C64>,
    /// Effective mass `−4κ`.
    pub mass: f64,
}

pub fn zero_modes(p: &SolitonParams, xs: &[f64]) -> Result<ZeroModePair> {
    p.validate()?;
    let k = p.kappa();
    let mut r_z = Vec::with_capacity(xs.len());
    let mut s_z = Vec::with_capacity(xs.len());
    for &x in xs {
        let y = k * (x - p.x0);
        let ph = p.flow_phase(x);
        let s2 = sech2(y);
        r_z.push(ph * (k * k * s2));
        s_z.push(ph * C64::new(k, p.beta * (y.tanh() + y * s2)) / (4.0 * k * k));
    }
    Ok(ZeroModePair {
        r_z,
        s_z,
        mass: -4.0 * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_soliton_node() {
        let p = SolitonParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(soliton_profile(&p, 0.0).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn far_field_density_is_mu() {
        let p = SolitonParams::comoving(0.5, 1.0).unwrap();
        assert!((p.profile(60.0).norm_sqr() - 1.0).abs() < 1e-14);
        assert!((p.density(-60.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_supersonic() {
        assert!(matches!(
            SolitonParams::new(1.0, 0.0, 1.0, 0.0),
            Err(Error::InvalidParams(_))
        ));
        assert!(SolitonParams::new(0.1, 0.0, -1.0, 0.0).is_err());
        let bad = SolitonParams {
            beta: 2.0,
            v: 0.0,
            mu: 1.0,
            x0: 0.0,
        };
        assert!(soliton_profile(&bad, 0.0).is_err());
    }

    #[test]
    fn translation_mode_at_center() {
        let p = SolitonParams::comoving(0.3, 1.0).unwrap();
        let z = zero_modes(&p, &[0.0]).unwrap();
        let k = p.kappa();
        assert!((z.r_z[0] - C64::new(k * k, 0.0)).norm() < 1e-15);
        assert_eq!(z.mass, -4.0 * k);
    }

    #[test]
    fn translation_mode_is_flow_derivative() {
        let p = SolitonParams::new(0.4, 0.25, 1.3, 0.7).unwrap();
        let h = 1e-3;
        let xs: Vec<f64> = (-200..=200).map(|i| 0.05 * i as f64).collect();
        let z = zero_modes(&p, &xs).unwrap();
        for (x, r) in xs.iter().zip(&z.r_z) {
            let d = (p.profile(x + h) - p.profile(x - h)) / (2.0 * h);
            let fd = C64::new(0.0, p.v) * p.profile(*x) + d;
            assert!((fd - r).norm() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn velocity_mode_is_beta_derivative() {
        let p = SolitonParams::new(0.35, 0.2, 1.0, 0.0).unwrap();
        let h = 1e-5;
        let xs: Vec<f64> = (-100..=100).map(|i| 0.1 * i as f64).collect();
        let z = zero_modes(&p, &xs).unwrap();
        let up = SolitonParams {
            beta: p.beta + h,
            ..p
        };
        let dn = SolitonParams {
            beta: p.beta - h,
            ..p
        };
        for (x, s) in xs.iter().zip(&z.s_z) {
            let d = (up.profile(*x) - dn.profile(*x)) / (2.0 * h);
            let expect = C64::new(0.0, 1.0) * d / z.mass;
            assert!((expect - s).norm() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn black_velocity_mode_is_flat() {
        let p = SolitonParams::new(0.0, 0.3, 1.0, 0.0).unwrap();
        let xs = [-3.0, 0.0, 2.5];
        let z = zero_modes(&p, &xs).unwrap();
        for (x, s) in xs.iter().zip(&z.s_z) {
            assert!((s - p.flow_phase(*x) / 4.0).norm() < 1e-15);
        }
    }

    #[test]
    fn symplectic_pairing_is_unity() {
        let p = SolitonParams::comoving(0.6, 1.0).unwrap();
        let dx = 0.01;
        let xs: Vec<f64> = (0..8000).map(|i| -40.0 + dx * i as f64).collect();
        let z = zero_modes(&p, &xs).unwrap();
        let s: f64 = z
            .r_z
            .iter()
            .zip(&z.s_z)
            .map(|(r, s)| 2.0 * (r.conj() * s).re)
            .sum::<f64>()
            * dx;
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn phase_jump_matches_asymptotes() {
        let p = SolitonParams::comoving(0.5, 1.0).unwrap();
        let jump = std::f64::consts::PI - 2.0 * (p.beta / p.kappa()).atan();
        assert!((p.phase_jump() + jump).abs() < 1e-14 || (p.phase_jump() - jump).abs() < 1e-14);
    }
}
