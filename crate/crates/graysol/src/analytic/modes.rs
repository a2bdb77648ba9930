use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{dispersion, phase_shift, sech2, sgn, SolitonParams};
use crate::spectral::derivative_twisted;
use crate::{Error, Result};

/// Uniform-background amplitudes `ū_k`, `v̄_k` with their first two
/// k-derivatives. They depend on `k` and `μ` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAmplitudes {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub d2u: f64,
    pub d2v: f64,
}

/// `r = (k²/2)/(Ω + βk) = |k|/√(k² + 4μ)`.
fn ratio(k: f64, mu: f64) -> f64 {
    k.abs() / (k * k + 4.0 * mu).sqrt()
}

fn scale() -> f64 {
    1.0 / (2.0 * (2.0 * PI).sqrt())
}

/// `(ū, v̄)` from `ū ± v̄ = (2π)^{-1/2} r^{±1/2}`. `v̄` is negative.
pub fn uniform_modes(k: f64, p: &SolitonParams) -> Result<(f64, f64)> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber("uniform modes diverge at k = 0"));
    }
    let s = ratio(k, p.mu).sqrt();
    Ok(((s + 1.0 / s) * scale(), (s - 1.0 / s) * scale()))
}

pub fn uniform_amplitudes(k: f64, p: &SolitonParams) -> Result<UniformAmplitudes> {
    let (u, v) = uniform_modes(k, p)?;
    let mu = p.mu;
    let q = k * k + 4.0 * mu;
    let r = ratio(k, mu);
    let r1 = sgn(k) * 4.0 * mu / q.powf(1.5);
    let r2 = -12.0 * mu * k.abs() / q.powf(2.5);
    let (h1, h3, h5) = (r.powf(-0.5), r.powf(-1.5), r.powf(-2.5));
    let s = scale();
    let gu1 = 0.5 * (h1 - h3) * s;
    let gv1 = 0.5 * (h1 + h3) * s;
    let gu2 = (-0.25 * h3 + 0.75 * h5) * s;
    let gv2 = (-0.25 * h3 - 0.75 * h5) * s;
    Ok(UniformAmplitudes {
        u,
        v,
        du: gu1 * r1,
        dv: gv1 * r1,
        d2u: gu2 * r1 * r1 + gu1 * r2,
        d2v: gv2 * r1 * r1 + gv1 * r2,
    })
}

fn bracket_plus(k: f64, p: &SolitonParams, om: f64) -> C64 {
    C64::new(
        -2.0 * p.beta * om + (k * k + 2.0 * om) * 0.5 * k,
        (k * k + 2.0 * om) * p.kappa(),
    )
}

/// Normalization `N_k` fixed by matching to the far-field form
/// `sgn(k) ū e^{±iθ/2} e^{ikx} ψ_≷/|ψ_≷|`.
pub fn mode_normalization(k: f64, p: &SolitonParams) -> Result<C64> {
    p.validate()?;
    let (u, _) = uniform_modes(k, p)?;
    let om = dispersion(k, p);
    let half = C64::from_polar(1.0, 0.5 * phase_shift(k, p));
    let far = C64::new(p.kappa(), p.beta) / p.sound_speed();
    Ok(half * far * (om * sgn(k) * u) / bracket_plus(k, p, om))
}

/// Sampled Bogoliubov mode functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfiles {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

/// Evaluates `(u_k, v_k)` at one point from a precomputed normalization.
pub fn mode_pair_at(k: f64, p: &SolitonParams, norm: C64, x: f64) -> (C64, C64) {
    let om = dispersion(k, p);
    let kap = p.kappa();
    let y = x - p.x0;
    let t = (kap * y).tanh();
    let common = k * kap * kap * sech2(kap * y) - 2.0 * p.beta * om;
    let inner = C64::new(0.5 * k, kap * t);
    let pref = C64::from_polar(1.0, k * y) * norm / om;
    let big_u = pref * (common + (k * k + 2.0 * om) * inner);
    let big_v = pref * (common + (k * k - 2.0 * om) * inner);
    let flow = C64::from_polar(1.0, -p.v * y);
    (flow * big_u, flow.conj() * big_v)
}

pub fn mode_functions(k: f64, p: &SolitonParams, xs: &[f64]) -> Result<ModeProfiles> {
    let norm = mode_normalization(k, p)?;
    let (u, v) = xs.iter().map(|&x| mode_pair_at(k, p, norm, x)).unzip();
    Ok(ModeProfiles { u, v })
}

/// Largest pointwise residual of the stationary Bogoliubov equations
/// `Ωu = Hu + ψ₀²v`, `−Ωv = H*v + ψ₀*²u`,
/// `H = −½∂² + i(β−v)∂ + 2|ψ₀|² − μ̃`, on
/// `n` points over `[−L, L)`. Derivatives are spectral, with each mode
/// function treated as periodic up to its own boundary phase.
pub fn bdg_residual(k: f64, p: &SolitonParams, half_length: f64, n: usize) -> Result<f64> {
    let norm = mode_normalization(k, p)?;
    let dx = 2.0 * half_length / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| -half_length + j as f64 * dx).collect();
    let (u, v): (Vec<C64>, Vec<C64>) = xs.iter().map(|&x| mode_pair_at(k, p, norm, x)).unzip();
    let (u_end, v_end) = mode_pair_at(k, p, norm, half_length);
    let (u_start, v_start) = mode_pair_at(k, p, norm, -half_length);
    // branch of the twist nearest the carrier
    let twist = |end: C64, start: C64, carrier: f64| {
        let base = (end / start).arg() / (2.0 * half_length);
        let step = PI / half_length;
        base + ((carrier - base) / step).round() * step
    };
    let (tu, tv) = (
        twist(u_end, u_start, k - p.v),
        twist(v_end, v_start, k + p.v),
    );
    let d1u = derivative_twisted(&u, half_length, tu, 1);
    let d2u = derivative_twisted(&u, half_length, tu, 2);
    let d1v = derivative_twisted(&v, half_length, tv, 1);
    let d2v = derivative_twisted(&v, half_length, tv, 2);
    let drift = C64::new(0.0, p.beta - p.v);
    let om = dispersion(k, p);
    let mu = p.mu_tilde();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let psi = p.profile(xs[j]);
        let h = 2.0 * psi.norm_sqr() - mu;
        let ru = -0.5 * d2u[j] + drift * d1u[j] + h * u[j] + psi * psi * v[j] - om * u[j];
        let rv =
            -0.5 * d2v[j] - drift * d1v[j] + h * v[j] + psi.conj() * psi.conj() * u[j] + om * v[j];
        worst = worst.max(ru.norm()).max(rv.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64) -> SolitonParams {
        SolitonParams::comoving(beta, 1.0).unwrap()
    }

    fn richardson1(f: impl Fn(f64) -> f64, k: f64) -> f64 {
        let d = |h: f64| (f(k + h) - f(k - h)) / (2.0 * h);
        (100.0 * d(1e-5) - d(1e-4)) / 99.0
    }

    fn richardson2(f: impl Fn(f64) -> f64, k: f64) -> f64 {
        let h = 1e-2 * k.abs().min(1.0);
        let d = |h: f64| (f(k + h) - 2.0 * f(k) + f(k - h)) / (h * h);
        let r1 = (4.0 * d(h) - d(2.0 * h)) / 3.0;
        let r2 = (4.0 * d(2.0 * h) - d(4.0 * h)) / 3.0;
        (16.0 * r1 - r2) / 15.0
    }

    #[test]
    fn frozen_uniform_amplitudes() {
        let a = uniform_amplitudes(0.7, &p(0.5)).unwrap();
        assert!((a.u - 0.461_698_738_582_515).abs() < 1e-15);
        assert!((a.v + 0.232_402_199_036_046_5).abs() < 1e-15);
        assert!((a.du + 0.147_885_586_405_374_8).abs() < 1e-14);
        assert!((a.dv - 0.293_794_933_873_697_1).abs() < 1e-14);
        assert!((a.d2u - 0.444_328_356_788_035_1).abs() < 1e-13);
        assert!((a.d2v + 0.605_418_218_612_749_8).abs() < 1e-13);
        assert!(a.v < 0.0 && a.v.abs() < a.u);
    }

    #[test]
    fn derivatives_match_richardson() {
        for &k in &[0.05, 0.3, 0.7, 1.4, 4.0, -0.9] {
            let q = p(0.2);
            let a = uniform_amplitudes(k, &q).unwrap();
            let u = |k: f64| uniform_modes(k, &q).unwrap().0;
            let v = |k: f64| uniform_modes(k, &q).unwrap().1;
            for (got, want) in [
                (a.du, richardson1(u, k)),
                (a.dv, richardson1(v, k)),
                (a.d2u, richardson2(u, k)),
                (a.d2v, richardson2(v, k)),
            ] {
                assert!(((got - want) / want).abs() < 1e-8, "k {k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn normalization_identity() {
        for i in 0..200 {
            let k = 0.05 * (1000f64).powf(i as f64 / 199.0);
            let (u, v) = uniform_modes(k, &p(0.3)).unwrap();
            assert!((u * u - v * v - 1.0 / (2.0 * PI)).abs() < 4.0 * f64::EPSILON * u * u);
        }
    }

    #[test]
    fn short_wave_limit() {
        let (u, v) = uniform_modes(1e4, &p(0.0)).unwrap();
        assert!(v.abs() < 1e-8 && (u - (2.0 * PI).powf(-0.5)).abs() < 1e-8);
    }

    #[test]
    fn zero_wavenumber_rejected() {
        assert!(matches!(
            uniform_modes(0.0, &p(0.1)),
            Err(Error::ZeroWavenumber(_))
        ));
        assert!(mode_functions(0.0, &p(0.1), &[0.0]).is_err());
    }

    #[test]
    fn modes_solve_the_linearized_equations() {
        for beta in [-0.5, 0.0, 0.3, 0.5] {
            for k in [-1.3, 0.2, 0.7, 2.0] {
                let q = p(beta);
                let res = bdg_residual(k, &q, 20.0 / q.kappa(), 1024).unwrap();
                assert!(res < 1e-9, "beta {beta} k {k}: {res}");
            }
        }
    }

    #[test]
    fn modes_hold_with_background_flow() {
        let q = SolitonParams::new(0.3, -0.2, 1.0, 1.5).unwrap();
        for k in [-0.8, 0.4, 1.7] {
            let res = bdg_residual(k, &q, 20.0 / q.kappa(), 1024).unwrap();
            assert!(res < 1e-9, "k {k}: {res}");
        }
    }

    #[test]
    fn core_shape_at_center() {
        let q = p(0.5);
        let k = 0.9;
        let n = mode_normalization(k, &q).unwrap();
        let om = dispersion(k, &q);
        let (u, _) = mode_pair_at(k, &q, n, 0.0);
        let kap = q.kappa();
        let expect = n / om * (k * kap * kap - 2.0 * q.beta * om + (k * k + 2.0 * om) * 0.5 * k);
        assert!((u - expect).norm() < 1e-15);
    }

    #[test]
    fn far_field_matches_uniform_form() {
        for beta in [-0.5, 0.0, 0.5] {
            let q = p(beta);
            for k in [0.3, 0.7, 2.0] {
                let (ub, vb) = uniform_modes(k, &q).unwrap();
                let th = phase_shift(k, &q);
                let kap = q.kappa();
                for &x in &[-10.0 / kap, 10.0 / kap] {
                    let side = if x < 0.0 { -1.0 } else { 1.0 };
                    let f = C64::new(side * kap, beta) / q.sound_speed();
                    let e = C64::from_polar(1.0, k * x + 0.5 * side * th);
                    let fl = q.flow_phase(x);
                    let m = mode_functions(k, &q, &[x]).unwrap();
                    let bound = 10.0 * (-2.0 * kap * x.abs()).exp();
                    assert!(
                        (m.u[0] - fl * e * f * ub).norm() / ub < bound,
                        "beta {beta} k {k} x {x}"
                    );
                    assert!((m.v[0] - fl.conj() * e * f.conj() * vb).norm() / ub < bound);
                }
            }
        }
    }
}
