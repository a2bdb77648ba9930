//! Ring geometry, tuned ring sizes and the discrete Bogoliubov spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{dispersion, packet_advance, SolitonParams};
use crate::{Error, Result};

/// Largest grid spacing accepted, in healing lengths.
pub const MAX_SPACING: f64 = 0.2;
/// Smallest grid accepted.
pub const MIN_POINTS: usize = 256;
/// Minimum `κL` for a soliton on the ring.
pub const MIN_KAPPA_L: f64 = 15.0;

/// Periodic lattice `x_j = −L + j·dx`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry {
    pub half_length: f64,
    pub n_points: usize,
}

impl RingGeometry {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        let g = Self {
            half_length,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    /// Smallest power-of-two grid with spacing at most `max_dx`.
    pub fn with_max_spacing(half_length: f64, max_dx: f64) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite() && max_dx > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "L = {half_length}, max dx = {max_dx}"
            )));
        }
        let need = (2.0 * half_length / max_dx.min(MAX_SPACING)).ceil() as usize;
        Self::new(half_length, need.max(MIN_POINTS).next_power_of_two())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "half length {}",
                self.half_length
            )));
        }
        if self.n_points < MIN_POINTS || !self.n_points.is_power_of_two() {
            return Err(Error::InvalidGeometry(format!(
                "n_points = {} must be a power of two >= {MIN_POINTS}",
                self.n_points
            )));
        }
        if self.dx() > MAX_SPACING * (1.0 + 1e-12) {
            return Err(Error::InvalidGeometry(format!(
                "dx = {} exceeds {MAX_SPACING}",
                self.dx()
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        crate::spectral::wavenumbers(self.n_points, self.half_length)
    }

    pub fn q_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Maps `x` into `[−L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let p = 2.0 * self.half_length;
        (x + self.half_length).rem_euclid(p) - self.half_length
    }

    /// Signed minimum-image separation `x − y`.
    pub fn separation(&self, x: f64, y: f64) -> f64 {
        self.wrap(x - y)
    }

    pub fn check_soliton(&self, p: &SolitonParams) -> Result<()> {
        if p.kappa() * self.half_length < MIN_KAPPA_L {
            return Err(Error::InvalidGeometry(format!(
                "kappa L = {} below {MIN_KAPPA_L}",
                p.kappa() * self.half_length
            )));
        }
        Ok(())
    }
}

/// How a tuned length is chosen among the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    AtLeast,
}

/// Ring half-length on which the soliton with `v = β` is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunedRing {
    pub half_length: f64,
    pub v: f64,
    pub boundary_mismatch: f64,
}

/// `|ψ₀(L) − ψ₀(−L)|` for the soliton `p`.
pub fn boundary_mismatch(p: &SolitonParams, half_length: f64) -> f64 {
    (p.profile(half_length) - p.profile(-half_length)).norm()
}

/// Tunes `L` near `l_target` so that `2βL + π − 2 atan(β/κ) ≡ 0 (mod 2π)`.
pub fn tune_ring(beta: f64, mu: f64, l_target: f64, tol: f64) -> Result<TunedRing> {
    tune_ring_with(beta, mu, l_target, tol, Rounding::Nearest)
}

pub fn tune_ring_with(
    beta: f64,
    mu: f64,
    l_target: f64,
    tol: f64,
    rounding: Rounding,
) -> Result<TunedRing> {
    let p = SolitonParams::comoving(beta, mu)?;
    if beta == 0.0 {
        return Err(Error::NoSolution(
            "the black soliton's phase jump pi cannot be absorbed with v = 0".into(),
        ));
    }
    let kap = p.kappa();
    if l_target * kap < MIN_KAPPA_L {
        return Err(Error::InvalidGeometry(format!(
            "L_target = {l_target} below {MIN_KAPPA_L}/kappa"
        )));
    }
    // L_m = (2πm − π + 2 atan(β/κ)) / (2β)
    let phi = -PI + 2.0 * (beta / kap).atan();
    let spacing = PI / beta.abs();
    let base = phi / (2.0 * beta);
    let m = (l_target - base) / spacing;
    let m = match rounding {
        Rounding::Nearest => m.round(),
        Rounding::AtLeast => m.ceil(),
    };
    let mut half_length = base + m * spacing;
    if half_length * kap < MIN_KAPPA_L {
        half_length += spacing;
    }
    let mismatch = boundary_mismatch(&p, half_length);
    if mismatch > tol {
        return Err(Error::NoSolution(format!(
            "boundary mismatch {mismatch:e} above {tol:e}"
        )));
    }
    Ok(TunedRing {
        half_length,
        v: beta,
        boundary_mismatch: mismatch,
    })
}

/// Half-length `πj/|v|` nearest `l_target`, on which `c·e^{−ivx}` is periodic.
pub fn uniform_ring_length(v: f64, l_target: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(l_target);
    }
    let spacing = PI / v.abs();
    let j = (l_target / spacing).round().max(1.0);
    Ok(j * spacing)
}

/// Background the spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BackgroundKind {
    Soliton,
    Uniform,
}

/// Positive Bogoliubov wavenumbers allowed on the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    pub wavenumbers: Vec<f64>,
    pub params: SolitonParams,
    pub geometry: RingGeometry,
    pub kind: BackgroundKind,
}

/// `k cot kL − 2(κ − βΩ_k/(κk))`.
pub fn quantization_residual(k: f64, p: &SolitonParams, half_length: f64) -> f64 {
    let kap = p.kappa();
    k / (k * half_length).tan() - 2.0 * (kap - p.beta * dispersion(k, p) / (kap * k))
}

fn refine(p: &SolitonParams, l: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |k: f64| quantization_residual(k, p, l);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::RootBracketing { lo, hi });
    }
    let rising = fhi > flo;
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..12 {
        if fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        a = b;
        fa = fb;
        b = c.clamp(lo, hi);
        fb = f(b);
        if fb.abs() < 1e-12 {
            break;
        }
    }
    if fb.abs() >= 1e-10 {
        return Err(Error::RootBracketing { lo, hi });
    }
    Ok(b)
}

fn cot_interval(n: usize, l: f64) -> (f64, f64) {
    let d = PI / l;
    let eps = 1e-9 * d;
    (n as f64 * d + eps, (n + 1) as f64 * d - eps)
}

/// All quantization roots in `(0, k_max]` for the tuned ring `geom`.
pub fn discrete_wavenumbers(
    p: &SolitonParams,
    geom: &RingGeometry,
    k_max: f64,
) -> Result<DiscreteSpectrum> {
    discrete_wavenumbers_between(p, geom, 0.0, k_max)
}

/// Roots in `[k_lo, k_hi]`. Each cot interval `(nπ/L, (n+1)π/L)` with `n ≥ 1`
/// holds one root; the first interval holds none once `κL` is large.
pub fn discrete_wavenumbers_between(
    p: &SolitonParams,
    geom: &RingGeometry,
    k_lo: f64,
    k_hi: f64,
) -> Result<DiscreteSpectrum> {
    p.validate()?;
    geom.validate()?;
    geom.check_soliton(p)?;
    if !(k_hi > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "k_max = {k_hi} must be positive"
        )));
    }
    let l = geom.half_length;
    let n_first = ((k_lo.max(0.0) * l / PI).floor() as usize).max(1);
    let mut roots = Vec::new();
    let first = cot_interval(0, l);
    if k_lo <= first.1 && quantization_residual(first.0, p, l) > 0.0 {
        let r = refine(p, l, first.0, first.1)?;
        if r >= k_lo && r <= k_hi {
            roots.push(r);
        }
    }
    let mut n = n_first;
    loop {
        let (lo, hi) = cot_interval(n, l);
        if lo > k_hi {
            break;
        }
        let r = refine(p, l, lo, hi)?;
        if r >= k_lo && r <= k_hi {
            roots.push(r);
        }
        n += 1;
    }
    Ok(DiscreteSpectrum {
        wavenumbers: roots,
        params: *p,
        geometry: *geom,
        kind: BackgroundKind::Soliton,
    })
}

impl DiscreteSpectrum {
    /// Uniform-background spectrum `k = πm/L` in `[k_lo, k_hi]`.
    pub fn uniform(p: &SolitonParams, geom: &RingGeometry, k_lo: f64, k_hi: f64) -> Result<Self> {
        p.validate()?;
        geom.validate()?;
        let d = PI / geom.half_length;
        let m0 = (k_lo / d).ceil().max(1.0) as usize;
        let m1 = (k_hi / d).floor() as usize;
        let wavenumbers = (m0..=m1).map(|m| m as f64 * d).collect();
        Ok(Self {
            wavenumbers,
            params: *p,
            geometry: *geom,
            kind: BackgroundKind::Uniform,
        })
    }

    /// Quadrature weight of mode `k`: the inverse density of states.
    pub fn weight(&self, k: f64) -> f64 {
        let l = self.geometry.half_length;
        match self.kind {
            BackgroundKind::Uniform => PI / l,
            BackgroundKind::Soliton => {
                2.0 * PI / (2.0 * l - packet_advance(k, &self.params).unwrap_or(0.0))
            }
        }
    }

    /// Root nearest to `k`.
    pub fn nearest(&self, k: f64) -> Option<f64> {
        self.wavenumbers
            .iter()
            .copied()
            .min_by(|a, b| (a - k).abs().total_cmp(&(b - k).abs()))
    }

    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_invariants() {
        assert!(RingGeometry::new(100.0, 1000).is_err());
        assert!(RingGeometry::new(100.0, 512).is_err());
        assert!(RingGeometry::new(10.0, 128).is_err());
        let g = RingGeometry::with_max_spacing(318.35, 0.2).unwrap();
        assert_eq!(g.n_points, 4096);
        assert!(g.dx() <= 0.2);
        assert_eq!(g.wrap(g.half_length), -g.half_length);
        assert!((g.separation(-g.half_length + 1.0, g.half_length - 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tuned_ring_closes_soliton() {
        let t = tune_ring(0.5, 1.0, 120.0, 1e-10).unwrap();
        assert!((t.half_length - 120.0).abs() <= PI / (2.0 * 0.5));
        assert!(t.boundary_mismatch < 1e-10);
        assert_eq!(t.v, 0.5);
        let t = tune_ring_with(-0.0058, 1.0, 300.0, 1e-10, Rounding::AtLeast).unwrap();
        assert!(t.half_length >= 300.0 && t.half_length < 300.0 + PI / 0.0058);
        let t = tune_ring(0.999, 1.0, 400.0, 1e-6).unwrap();
        let winding = (2.0 * t.v * t.half_length).rem_euclid(2.0 * PI);
        let jump = PI - 2.0 * (0.999 / (1.0 - 0.999f64 * 0.999).sqrt()).atan();
        assert!(
            ((winding + jump) % (2.0 * PI)).abs() < 1e-9
                || (winding + jump - 2.0 * PI).abs() < 1e-9
        );
    }

    #[test]
    fn black_soliton_ring_unsupported() {
        assert!(matches!(
            tune_ring(0.0, 1.0, 100.0, 1e-10),
            Err(Error::NoSolution(_))
        ));
        assert!(tune_ring(0.5, 1.0, 5.0, 1e-10).is_err());
    }

    #[test]
    fn roots_satisfy_quantization() {
        let p = SolitonParams::comoving(0.5, 1.0).unwrap();
        let t = tune_ring(0.5, 1.0, 160.0, 1e-10).unwrap();
        let g = RingGeometry::with_max_spacing(t.half_length, 0.2).unwrap();
        let s = discrete_wavenumbers(&p, &g, 3.0).unwrap();
        for &k in &s.wavenumbers {
            assert!(quantization_residual(k, &p, g.half_length).abs() < 1e-10);
        }
        for w in s.wavenumbers.windows(2) {
            if w[0] * g.half_length > 50.0 {
                assert!(((w[1] - w[0]) / (PI / g.half_length) - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn roots_match_dense_scan() {
        for beta in [1e-3, -0.4] {
            let p = SolitonParams {
                beta,
                v: beta,
                mu: 1.0,
                x0: 0.0,
            };
            let g = RingGeometry::new(40.0, 512).unwrap();
            let s = discrete_wavenumbers(&p, &g, 2.0).unwrap();
            let f = |k: f64| quantization_residual(k, &p, g.half_length);
            let mut scan = Vec::new();
            let dk = 1e-4;
            let mut k = dk;
            let mut fk = f(k);
            while k + dk <= 2.0 {
                let f2 = f(k + dk);
                let pole = ((k * g.half_length / PI).floor()
                    - ((k + dk) * g.half_length / PI).floor())
                    != 0.0;
                if fk.signum() != f2.signum() && !pole {
                    scan.push(k + dk * fk / (fk - f2));
                }
                k += dk;
                fk = f2;
            }
            assert_eq!(scan.len(), s.len(), "beta {beta}");
            for (a, b) in scan.iter().zip(&s.wavenumbers) {
                assert!((a - b).abs() < dk);
            }
        }
    }

    #[test]
    fn uniform_spectrum_is_even_spacing() {
        let p = SolitonParams::comoving(0.5, 1.0).unwrap();
        let l = uniform_ring_length(0.5, 160.0).unwrap();
        assert!(((2.0 * 0.5 * l) / (2.0 * PI)).fract().abs() < 1e-12);
        let g = RingGeometry::with_max_spacing(l, 0.2).unwrap();
        let s = DiscreteSpectrum::uniform(&p, &g, 0.5, 1.0).unwrap();
        assert!(s
            .wavenumbers
            .iter()
            .all(|&k| (k * l / PI - (k * l / PI).round()).abs() < 1e-9));
        assert_eq!(s.weight(0.7), PI / l);
    }
}
