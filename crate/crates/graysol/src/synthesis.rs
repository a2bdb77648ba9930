//! Initial states: soliton background, Gaussian Bogoliubov packet,
//! second-order dressing and the phase-step compensation pulse.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::analytic::{
    dispersion, dressing_coefficients, dressing_relative, excited_numbers, mode_normalization,
    mode_pair_at, phase_shift, raw_amplitude, sgn, uniform_modes, SolitonParams,
};
use crate::evolve::{Frame, WaveField};
use crate::ring::{BackgroundKind, DiscreteSpectrum, RingGeometry};
use crate::spectral::{antiderivative_real, wavenumbers, Fourier};
use crate::{Error, Result};

/// Gaussian amplitudes are kept within this many `1/λ` of the carrier.
pub const K_WINDOW: f64 = 6.5;
/// Envelope support half-width in units of `λ`.
pub const SUPPORT: f64 = 4.0;

/// Gaussian packet request. `epsilon` is the normalized amplitude, `N₁ = ε²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct PacketSpec {
    pub k_center: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub x_init: f64,
}

impl PacketSpec {
    /// Checks breadth, amplitude and placement against the background.
    pub fn validate(&self, spectrum: &DiscreteSpectrum) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPacket(m));
        if !(self.k_center > 0.0) {
            return bad(format!("k_center = {} must be positive", self.k_center));
        }
        if self.k_center * self.lambda < 8.0 {
            return bad(format!(
                "k lambda = {} below 8",
                self.k_center * self.lambda
            ));
        }
        if self.lambda < 6.0 {
            return bad(format!("lambda = {} below 6", self.lambda));
        }
        if !(0.0..=0.3).contains(&self.epsilon) {
            return bad(format!("epsilon = {} outside [0, 0.3]", self.epsilon));
        }
        let g = &spectrum.geometry;
        let (lo, hi) = (
            self.x_init - SUPPORT * self.lambda,
            self.x_init + SUPPORT * self.lambda,
        );
        if lo <= -g.half_length || hi >= g.half_length {
            return bad(format!(
                "support [{lo}, {hi}] crosses the seam at ±{}",
                g.half_length
            ));
        }
        if spectrum.kind == BackgroundKind::Soliton {
            let p = &spectrum.params;
            let core = 8.0 / p.kappa();
            if hi > p.x0 - core && lo < p.x0 + core {
                return bad(format!("support [{lo}, {hi}] overlaps the soliton core"));
            }
        }
        Ok(())
    }

    /// Same packet with the carrier moved to the nearest discrete root.
    pub fn snapped(&self, spectrum: &DiscreteSpectrum) -> Result<Self> {
        let k = spectrum
            .nearest(self.k_center)
            .ok_or(Error::InsufficientSpectrum {
                k: self.k_center,
                weight: 1.0,
            })?;
        Ok(Self {
            k_center: k,
            ..*self
        })
    }

    pub fn raw_amplitude(&self, p: &SolitonParams) -> Result<f64> {
        raw_amplitude(self.k_center, self.lambda, self.epsilon, p)
    }
}

fn gaussian_weight(spec: &PacketSpec, k: f64) -> f64 {
    let d = spec.lambda * (k - spec.k_center);
    (-0.5 * d * d).exp()
}

/// Background field on the grid.
pub fn background_field(spectrum: &DiscreteSpectrum) -> Vec<C64> {
    let p = &spectrum.params;
    let xs = spectrum.geometry.positions();
    match spectrum.kind {
        BackgroundKind::Soliton => xs.iter().map(|&x| p.profile(x)).collect(),
        BackgroundKind::Uniform => xs
            .iter()
            .map(|&x| C64::from_polar(p.sound_speed(), -p.v * x))
            .collect(),
    }
}

/// First-order packet `εψ₁` (raw amplitude from `spec.epsilon`) as a
/// quadrature over the discrete spectrum with amplitudes
/// `a_k = (2π)^{-1/2} e^{−λ²(k−k0)²/2} e^{−ik x_i} e^{iθ_k/2}`.
pub fn build_packet(spec: &PacketSpec, spectrum: &DiscreteSpectrum) -> Result<Vec<C64>> {
    build_packet_at_time(spec, spectrum, 0.0)
}

/// The packet after linear Bogoliubov evolution for time `t`: each
/// amplitude rotated by `e^{−iΩ_k t}`.
pub fn build_packet_at_time(
    spec: &PacketSpec,
    spectrum: &DiscreteSpectrum,
    t: f64,
) -> Result<Vec<C64>> {
    let p = &spectrum.params;
    spec.validate(spectrum)?;
    let lo = spec.k_center - K_WINDOW / spec.lambda;
    let hi = spec.k_center + K_WINDOW / spec.lambda;
    let ks = &spectrum.wavenumbers;
    match (ks.first(), ks.last()) {
        (Some(&first), Some(&last))
            if first <= lo + 2.0 * PI / spectrum.geometry.half_length && last >= hi => {}
        (_, Some(&last)) => {
            return Err(Error::InsufficientSpectrum {
                k: last,
                weight: gaussian_weight(spec, last),
            })
        }
        _ => {
            return Err(Error::InsufficientSpectrum {
                k: spec.k_center,
                weight: 1.0,
            })
        }
    }
    let raw = spec.raw_amplitude(p)?;
    let xs = spectrum.geometry.positions();
    let mut field = vec![C64::new(0.0, 0.0); xs.len()];
    for &k in ks.iter().filter(|&&k| k >= lo && k <= hi) {
        let a = C64::from_polar(
            gaussian_weight(spec, k) / (2.0 * PI).sqrt(),
            -k * spec.x_init - dispersion(k, p) * t,
        ) * spectrum.weight(k);
        match spectrum.kind {
            BackgroundKind::Soliton => {
                let a = a * C64::from_polar(1.0, 0.5 * phase_shift(k, p));
                let norm = mode_normalization(k, p)?;
                for (f, &x) in field.iter_mut().zip(&xs) {
                    let (u, v) = mode_pair_at(k, p, norm, x);
                    *f += u * a + (v * a).conj();
                }
            }
            BackgroundKind::Uniform => {
                let (ub, vb) = uniform_modes(k, p)?;
                for (f, &x) in field.iter_mut().zip(&xs) {
                    let e = C64::from_polar(1.0, k * x) * a;
                    *f += C64::from_polar(sgn(k), -p.v * x) * (e * ub + e.conj() * vb);
                }
            }
        }
    }
    Ok(field.into_iter().map(|f| f * raw).collect())
}

/// Phase discontinuity at the seam, `arg(ψ₀/ψ_{n−1})` minus the smooth
/// increment extrapolated from the neighbouring cells, wrapped to `(−π, π]`.
pub fn winding_mismatch(psi: &[C64]) -> f64 {
    let n = psi.len();
    let seam = (psi[0] / psi[n - 1]).arg();
    let inner = 0.5 * ((psi[n - 1] / psi[n - 2]).arg() + (psi[1] / psi[0]).arg());
    let d = seam - inner;
    (d + PI).rem_euclid(2.0 * PI) - PI
}

/// Center and breadth of the compensation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompensationPlacement {
    pub center: f64,
    pub breadth: f64,
}

impl CompensationPlacement {
    /// Breadth `3λ`, trailing the packet by `4λ + 4·breadth`.
    pub fn behind(spec: &PacketSpec, geom: &RingGeometry) -> Self {
        let breadth = 3.0 * spec.lambda;
        Self {
            center: geom.wrap(spec.x_init - SUPPORT * spec.lambda - 4.0 * breadth),
            breadth,
        }
    }
}

/// Long-wavelength left-moving Bogoliubov pulse on a uniform background,
/// given as a relative amplitude `a` and phase gradient `g`: `ψ̄(1 + a)e^{i∫g}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroPulse {
    pub relative_density: Vec<f64>,
    pub phase_gradient: Vec<f64>,
    pub geom: RingGeometry,
}

impl HydroPulse {
    /// Net phase change `∫g dx` across the pulse.
    pub fn winding(&self) -> f64 {
        self.phase_gradient.iter().sum::<f64>() * self.geom.dx()
    }

    /// Running phase `∫_{−L}^{x} g`, i.e. with the pulse's winding as a jump at the seam.
    pub fn phase(&self) -> Vec<f64> {
        let l = self.geom.half_length;
        let mean = self.winding() / (2.0 * l);
        let zero_mean: Vec<f64> = self.phase_gradient.iter().map(|g| g - mean).collect();
        let periodic = antiderivative_real(&zero_mean, l);
        let b0 = periodic[0];
        self.geom
            .positions()
            .iter()
            .zip(periodic)
            .map(|(&x, b)| b - b0 + mean * (x + l))
            .collect()
    }

    /// Imprints the pulse on `background`.
    pub fn apply(&self, background: &[C64]) -> Vec<C64> {
        background
            .iter()
            .zip(self.phase())
            .zip(&self.relative_density)
            .map(|((&z, b), &a)| z * C64::from_polar(1.0 + a, b))
            .collect()
    }
}

/// Periodic Gaussian of unit area, breadth `w`, centered at `center`.
fn periodic_gaussian(geom: &RingGeometry, center: f64, w: f64) -> Vec<f64> {
    let p = 2.0 * geom.half_length;
    let images = (6.0 * w / p).ceil() as i64 + 1;
    geom.positions()
        .iter()
        .map(|&x| {
            (-images..=images)
                .map(|m| {
                    let z = (x - center - m as f64 * p) / w;
                    (-z * z).exp()
                })
                .sum::<f64>()
                / (w * PI.sqrt())
        })
        .collect()
}

/// Pulse whose far-field phase step is `−phase_step`, with the density of the
/// left-moving branch `â = −ĝ/(2√(q²/4 + c²))`.
pub fn compensation_pulse(
    phase_step: f64,
    geom: &RingGeometry,
    placement: CompensationPlacement,
    sound_speed: f64,
) -> Result<HydroPulse> {
    geom.validate()?;
    if phase_step.abs() >= PI / 4.0 {
        return Err(Error::StepTooLarge(phase_step));
    }
    let phase_gradient: Vec<f64> = periodic_gaussian(geom, placement.center, placement.breadth)
        .iter()
        .map(|g| -phase_step * g)
        .collect();
    let qs = wavenumbers(geom.n_points, geom.half_length);
    let mut a: Vec<C64> = phase_gradient.iter().map(|&g| C64::new(g, 0.0)).collect();
    let c2 = sound_speed * sound_speed;
    Fourier::new(geom.n_points).filter(
        &mut a,
        |q| C64::new(-0.5 / (0.25 * q * q + c2).sqrt(), 0.0),
        &qs,
    );
    Ok(HydroPulse {
        relative_density: a.iter().map(|z| z.re).collect(),
        phase_gradient,
        geom: *geom,
    })
}

/// Perturbative order of the synthesized state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    First,
    Second,
}

/// Compensation choice for second-order states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Compensation {
    Behind,
    At(CompensationPlacement),
    Off,
}

/// Bookkeeping of a synthesized state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub k_center: f64,
    pub raw_amplitude: f64,
    pub n_background: f64,
    pub n_total: f64,
    pub n1: f64,
    pub n2: f64,
    /// Atom number carried by the compensation pulse.
    pub n_compensation: f64,
    /// Dressing phase step `ε²Φ` (zero at first order).
    pub phase_step: f64,
    pub compensation: Option<CompensationPlacement>,
    pub winding_mismatch: f64,
}

#[derive(Debug, Clone)]
pub struct InitialState {
    pub field: WaveField,
    pub report: SynthesisReport,
}

pub fn build_initial_state(
    spectrum: &DiscreteSpectrum,
    spec: &PacketSpec,
    order: Order,
) -> Result<InitialState> {
    build_initial_state_with(spectrum, spec, order, Compensation::Behind)
}

/// Order 1: `ψ̄ + εψ₁`. Order 2: `e^{iε²B}(ψ̄(1 + ε²(A + a_c)) + εψ₁)` with the
/// far-field dressing `(A, B')` and the compensation pulse `(a_c, g_c)`.
pub fn build_initial_state_with(
    spectrum: &DiscreteSpectrum,
    spec: &PacketSpec,
    order: Order,
    compensation: Compensation,
) -> Result<InitialState> {
    let p = &spectrum.params;
    let geom = spectrum.geometry;
    let bg = background_field(spectrum);
    let dx = geom.dx();
    let n_background = bg.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    let packet = build_packet(spec, spectrum)?;
    let raw = spec.raw_amplitude(p)?;
    let e2 = raw * raw;
    let numbers = excited_numbers(spec.k_center, spec.lambda, raw, p)?;
    let mut psi: Vec<C64> = bg.iter().zip(&packet).map(|(a, b)| a + b).collect();
    let mut report = SynthesisReport {
        k_center: spec.k_center,
        raw_amplitude: raw,
        n_background,
        n_total: 0.0,
        n1: numbers.n1,
        n2: 0.0,
        n_compensation: 0.0,
        phase_step: 0.0,
        compensation: None,
        winding_mismatch: 0.0,
    };
    if order == Order::Second && e2 > 0.0 {
        report.n2 = numbers.n2;
        let d = dressing_coefficients(spec.k_center, p)?;
        let xs = geom.positions();
        let (amp, grad): (Vec<f64>, Vec<f64>) = xs
            .iter()
            .map(|&x| dressing_relative(&d, spec.lambda, geom.separation(x, spec.x_init)))
            .map(|(a, g)| (e2 * a, e2 * g))
            .unzip();
        let step: f64 = grad.iter().sum::<f64>() * dx;
        report.phase_step = step;
        let placement = match compensation {
            Compensation::Behind => Some(CompensationPlacement::behind(spec, &geom)),
            Compensation::At(c) => Some(c),
            Compensation::Off => None,
        };
        let (mut amp, mut grad) = (amp, grad);
        if let Some(place) = placement {
            let pulse = compensation_pulse(step, &geom, place, p.sound_speed())?;
            report.n_compensation = bg
                .iter()
                .zip(&pulse.relative_density)
                .map(|(z, a)| z.norm_sqr() * ((1.0 + a) * (1.0 + a) - 1.0))
                .sum::<f64>()
                * dx;
            for j in 0..amp.len() {
                amp[j] += pulse.relative_density[j];
                grad[j] += pulse.phase_gradient[j];
            }
            report.compensation = Some(place);
        }
        let dressed = HydroPulse {
            relative_density: amp,
            phase_gradient: grad,
            geom,
        };
        let phase = dressed.phase();
        for j in 0..psi.len() {
            psi[j] = C64::from_polar(1.0, phase[j])
                * (bg[j] * (1.0 + dressed.relative_density[j]) + packet[j]);
        }
    }
    report.winding_mismatch = winding_mismatch(&psi) - winding_mismatch(&bg);
    let field = WaveField::new(psi, geom, Frame::of(p))?;
    report.n_total = field.number();
    if report.compensation.is_some() && report.winding_mismatch.abs() > 1e-6 {
        return Err(Error::WindingMismatch(report.winding_mismatch));
    }
    Ok(InitialState { field, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::group_velocity;
    use crate::evolve::{evolve, stable_dt, EvolveOptions};
    use crate::measure::packet_centroid;
    use crate::ring::{discrete_wavenumbers_between, tune_ring, uniform_ring_length};

    const K: f64 = 1.0;
    const LAMBDA: f64 = 12.0;

    fn params() -> SolitonParams {
        SolitonParams::comoving(0.5, 1.0).unwrap()
    }

    fn soliton_spectrum() -> DiscreteSpectrum {
        let ring = tune_ring(0.5, 1.0, 160.0, 1e-12).unwrap();
        let geom = RingGeometry::with_max_spacing(ring.half_length, 0.2).unwrap();
        discrete_wavenumbers_between(&params(), &geom, 0.3, 1.7).unwrap()
    }

    fn uniform_spectrum() -> DiscreteSpectrum {
        let geom =
            RingGeometry::with_max_spacing(uniform_ring_length(0.5, 160.0).unwrap(), 0.2).unwrap();
        DiscreteSpectrum::uniform(&params(), &geom, 0.3, 1.7).unwrap()
    }

    fn spec(spectrum: &DiscreteSpectrum, epsilon: f64) -> PacketSpec {
        PacketSpec {
            k_center: K,
            lambda: LAMBDA,
            epsilon,
            x_init: -80.0,
        }
        .snapped(spectrum)
        .unwrap()
    }

    fn norm2(psi: &[C64], dx: f64) -> f64 {
        psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let s = soliton_spectrum();
        assert!(build_packet(&spec(&s, 0.0), &s)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
        let st = build_initial_state(&s, &spec(&s, 0.0), Order::Second).unwrap();
        assert_eq!(st.field.psi, background_field(&s));
    }

    #[test]
    fn packet_is_linear_and_reproducible() {
        let s = soliton_spectrum();
        let a = build_packet(&spec(&s, 0.1), &s).unwrap();
        let b = build_packet(&spec(&s, 0.2), &s).unwrap();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| (2.0 * x - y).norm() <= 1e-14 * scale));
        assert_eq!(a, build_packet(&spec(&s, 0.1), &s).unwrap());
    }

    #[test]
    fn packet_starts_at_launch_point() {
        for s in [soliton_spectrum(), uniform_spectrum()] {
            let sp = spec(&s, 0.1);
            let psi = build_packet(&sp, &s).unwrap();
            let w: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let xs = s.geometry.positions();
            let c = packet_centroid(&xs, &w, (sp.x_init - 60.0, sp.x_init + 60.0)).unwrap();
            assert!((c - sp.x_init).abs() < s.geometry.dx(), "{c}");
        }
    }

    #[test]
    fn packet_number_is_epsilon_squared() {
        for s in [soliton_spectrum(), uniform_spectrum()] {
            let sp = spec(&s, 0.1);
            let n1 = norm2(&build_packet(&sp, &s).unwrap(), s.geometry.dx());
            // ū, v̄ vary across the packet's spectral width 1/λ
            assert!((n1 / 0.01 - 1.0).abs() < 1.0 / (K * LAMBDA).powi(2), "{n1}");
        }
    }

    #[test]
    fn linear_flow_moves_at_group_velocity() {
        let s = uniform_spectrum();
        let sp = spec(&s, 0.1);
        let xs = s.geometry.positions();
        let t = 20.0;
        let w: Vec<f64> = build_packet_at_time(&sp, &s, t)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let c = packet_centroid(&xs, &w, (sp.x_init - 60.0, sp.x_init + 100.0)).unwrap();
        let nu = group_velocity(sp.k_center, &s.params);
        assert!(((c - sp.x_init) / t / nu - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_packets() {
        let s = soliton_spectrum();
        let ok = spec(&s, 0.1);
        for bad in [
            PacketSpec { lambda: 6.0, ..ok },
            PacketSpec {
                epsilon: 0.31,
                ..ok
            },
            PacketSpec {
                x_init: -s.geometry.half_length + 10.0,
                ..ok
            },
            PacketSpec {
                x_init: -20.0,
                ..ok
            },
            PacketSpec {
                k_center: -1.0,
                ..ok
            },
        ] {
            assert!(
                matches!(build_packet(&bad, &s), Err(Error::InvalidPacket(_))),
                "{bad:?}"
            );
        }
        let narrow = discrete_wavenumbers_between(&s.params, &s.geometry, 0.9, 1.1).unwrap();
        assert!(matches!(
            build_packet(&ok, &narrow),
            Err(Error::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn second_order_number_budget() {
        let s = soliton_spectrum();
        let dx = s.geometry.dx();
        let excess = |eps: f64| {
            let sp = spec(&s, eps);
            let r = build_initial_state(&s, &sp, Order::Second).unwrap().report;
            assert!((r.n1 - eps * eps).abs() < 1e-15);
            assert!(r.n_compensation != 0.0);
            assert!(r.winding_mismatch.abs() < 1e-6);
            let packet = norm2(&build_packet(&sp, &s).unwrap(), dx);
            r.n_total - (r.n_background + packet + r.n2 + r.n_compensation)
        };
        let (e1, e2) = (excess(0.1), excess(0.2));
        assert!(e1.abs() < 1e-6);
        // what remains is the quartic |ε²A|² term
        assert!((e2 / e1 / 16.0 - 1.0).abs() < 0.1, "{e1} {e2}");
        let first = build_initial_state(&s, &spec(&s, 0.2), Order::First)
            .unwrap()
            .report;
        let packet = norm2(&build_packet(&spec(&s, 0.2), &s).unwrap(), dx);
        assert!((first.n_total - first.n_background - packet).abs() < 1e-9);
    }

    #[test]
    fn uncompensated_step_breaks_winding() {
        let s = soliton_spectrum();
        let st =
            build_initial_state_with(&s, &spec(&s, 0.2), Order::Second, Compensation::Off).unwrap();
        let step = st.report.phase_step;
        assert!(step > 0.0);
        assert!((st.report.winding_mismatch.abs() - step).abs() < 1e-3 * step);
    }

    #[test]
    fn compensation_pulse_shape() {
        let s = soliton_spectrum();
        let geom = s.geometry;
        let place = CompensationPlacement {
            center: 0.0,
            breadth: 36.0,
        };
        let zero = compensation_pulse(0.0, &geom, place, 1.0).unwrap();
        assert!(zero
            .relative_density
            .iter()
            .chain(&zero.phase_gradient)
            .all(|v| *v == 0.0));
        let pulse = compensation_pulse(0.01, &geom, place, 1.0).unwrap();
        assert!((pulse.winding() + 0.01).abs() < 1e-6);
        let phase = pulse.phase();
        assert!(phase[0].abs() < 1e-15);
        assert!((phase[geom.n_points - 1] + 0.01).abs() < 1e-6);
        assert!(matches!(
            compensation_pulse(1.0, &geom, place, 1.0),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn compensation_pulse_moves_left_at_sound_speed() {
        let s = uniform_spectrum();
        let p = s.params;
        let geom = s.geometry;
        let place = CompensationPlacement {
            center: 60.0,
            breadth: 20.0,
        };
        let pulse = compensation_pulse(0.02, &geom, place, p.sound_speed()).unwrap();
        let bg = background_field(&s);
        // close the winding with a uniform ramp so the seam stays smooth
        let ramp = pulse.winding() / (2.0 * geom.half_length);
        let psi: Vec<C64> = pulse
            .apply(&bg)
            .iter()
            .zip(geom.positions())
            .map(|(z, x)| z * C64::from_polar(1.0, -ramp * (x + geom.half_length)))
            .collect();
        let field = WaveField::new(psi, geom, Frame::of(&p)).unwrap();
        let t = 40.0;
        let (end, _) = evolve(
            &field,
            t,
            &EvolveOptions::new(stable_dt(&geom, &field.frame)),
        )
        .unwrap();
        let xs = geom.positions();
        let d: Vec<f64> = end
            .density()
            .iter()
            .zip(&bg)
            .map(|(a, b)| a - b.norm_sqr())
            .collect();
        let c = packet_centroid(&xs, &d, (-80.0, 80.0)).unwrap();
        let speed = (c - 60.0) / t;
        assert!(
            (speed / -(p.sound_speed() + p.beta) - 1.0).abs() < 0.01,
            "{speed}"
        );
    }
}
