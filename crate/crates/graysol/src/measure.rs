//! Soliton position fits, packet centroids and derived displacements.

use serde::Serialize;

use crate::{Error, Result};

/// Fit of `c1² + c2² tanh²(c2(x − c3))` to a density profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// RMS misfit over the window.
    pub residual: f64,
    pub window: (f64, f64),
    pub iterations: usize,
}

/// Starting point of the fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitGuess {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Fit window half-width used by the soliton-shift protocol.
pub const FIT_HALF_WINDOW: f64 = 15.0;
const MAX_ITER: usize = 200;
const MIN_DAMPING: f64 = 1.0 / (1u64 << 30) as f64;

fn model(c: &[f64; 3], x: f64) -> (f64, [f64; 3]) {
    let y = c[1] * (x - c[2]);
    let t = y.tanh();
    let s2 = 1.0 - t * t;
    let value = c[0] * c[0] + c[1] * c[1] * t * t;
    let d1 = 2.0 * c[0];
    let d2 = 2.0 * c[1] * t * t + 2.0 * c[1] * c[1] * t * s2 * (x - c[2]);
    let d3 = -2.0 * c[1] * c[1] * t * s2 * c[1];
    (value, [d1, d2, d3])
}

fn cost(c: &[f64; 3], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (model(c, x).0 - y).powi(2))
        .sum()
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][i] = b[r];
        }
        *o = det(&m) / d;
    }
    Some(out)
}

/// Damped Gauss–Newton fit over `|x − x_guess| ≤ half_window`.
pub fn fit_soliton_position(
    xs: &[f64],
    density: &[f64],
    x_guess: f64,
    half_window: f64,
    guess: FitGuess,
) -> Result<SolitonFit> {
    let (wx, wy): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(density)
        .filter(|(&x, _)| (x - x_guess).abs() <= half_window)
        .map(|(&x, &y)| (x, y))
        .unzip();
    if wx.len() < 8 {
        return Err(Error::DegenerateWindow(format!(
            "{} samples in window",
            wx.len()
        )));
    }
    let (imin, &ymin) = wy
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let ymax = wy.iter().copied().fold(f64::MIN, f64::max);
    if !(ymax - ymin > 1e-6 * ymax.abs().max(1e-300)) || imin == 0 || imin + 1 == wx.len() {
        return Err(Error::DegenerateWindow(
            "no interior density minimum".into(),
        ));
    }
    let mut c = [guess.c1, guess.c2, guess.c3];
    let mut f = cost(&c, &wx, &wy);
    let mut iterations = 0;
    loop {
        if iterations == MAX_ITER {
            return Err(Error::FitDiverged(format!(
                "no convergence in {MAX_ITER} iterations"
            )));
        }
        iterations += 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in wx.iter().zip(&wy) {
            let (m, d) = model(&c, x);
            let r = m - y;
            for i in 0..3 {
                jtr[i] -= d[i] * r;
                for j in 0..3 {
                    jtj[i][j] += d[i] * d[j];
                }
            }
        }
        let delta =
            solve3(jtj, jtr).ok_or_else(|| Error::FitDiverged("singular normal matrix".into()))?;
        let mut damping = 1.0;
        let accepted = loop {
            let trial = [
                c[0] + damping * delta[0],
                c[1] + damping * delta[1],
                c[2] + damping * delta[2],
            ];
            let ft = cost(&trial, &wx, &wy);
            if ft <= f {
                break Some((trial, ft));
            }
            damping *= 0.5;
            if damping < MIN_DAMPING {
                break None;
            }
        };
        let step = delta.iter().map(|d| d.abs()).fold(0.0, f64::max) * damping;
        match accepted {
            Some((trial, ft)) => {
                let converged = step < 1e-12 || f - ft <= 1e-15 * f;
                c = trial;
                f = ft;
                if converged {
                    break;
                }
            }
            None if step < 1e-9 => break,
            None => return Err(Error::FitDiverged("step damping floor reached".into())),
        }
    }
    Ok(SolitonFit {
        c1: c[0].abs(),
        c2: c[1].abs(),
        c3: c[2],
        residual: (f / wx.len() as f64).sqrt(),
        window: (x_guess - half_window, x_guess + half_window),
        iterations,
    })
}

fn moments(xs: &[f64], weights: &[f64], region: (f64, f64)) -> (f64, f64, usize) {
    let (mut m0, mut m1, mut count) = (0.0, 0.0, 0);
    for (&x, &w) in xs.iter().zip(weights) {
        if x >= region.0 && x <= region.1 {
            m0 += w;
            m1 += w * x;
            count += 1;
        }
    }
    (m0, m1, count)
}

/// First moment of `weights` over `region`. The noise floor is the rounding
/// level of an O(1) density summed over the region.
pub fn packet_centroid(xs: &[f64], weights: &[f64], region: (f64, f64)) -> Result<f64> {
    let (m0, m1, count) = moments(xs, weights, region);
    let floor = f64::EPSILON * count as f64;
    if !(m0.abs() >= 10.0 * floor) {
        return Err(Error::LowMass { mass: m0, floor });
    }
    Ok(m1 / m0)
}

/// Centroid of `(δρ)²`, which follows the envelope `|ψ₁|²` and is insensitive
/// to second-order transients.
pub fn envelope_centroid(
    xs: &[f64],
    density_difference: &[f64],
    region: (f64, f64),
) -> Result<f64> {
    let sq: Vec<f64> = density_difference.iter().map(|d| d * d).collect();
    let (m0, m1, count) = moments(xs, &sq, region);
    let floor = (f64::EPSILON * count as f64).powi(2);
    if !(m0 >= 10.0 * floor) {
        return Err(Error::LowMass { mass: m0, floor });
    }
    Ok(m1 / m0)
}

/// Density difference of a run relative to its bare background at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSnapshot {
    pub time: f64,
    pub xs: Vec<f64>,
    pub density_difference: Vec<f64>,
}

impl PacketSnapshot {
    pub fn new(time: f64, xs: Vec<f64>, density: &[f64], background: &[f64]) -> Self {
        let density_difference = density.iter().zip(background).map(|(a, b)| a - b).collect();
        Self {
            time,
            xs,
            density_difference,
        }
    }

    pub fn envelope_center(&self, region: (f64, f64)) -> Result<f64> {
        envelope_centroid(&self.xs, &self.density_difference, region)
    }
}

/// Final envelope-center difference between the soliton and control runs.
pub fn measure_packet_advance(
    with_soliton: &PacketSnapshot,
    without: &PacketSnapshot,
    region: (f64, f64),
) -> Result<f64> {
    if (with_soliton.time - without.time).abs() > 1e-9 * with_soliton.time.abs().max(1.0) {
        return Err(Error::InvalidPacket(format!(
            "snapshot times differ: {} vs {}",
            with_soliton.time, without.time
        )));
    }
    Ok(with_soliton.envelope_center(region)? - without.envelope_center(region)?)
}

/// Soliton displacement and its `ε²`-normalized value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonShift {
    pub dx: f64,
    pub dx_over_eps2: f64,
}

pub fn measure_soliton_shift(
    before: &SolitonFit,
    after: &SolitonFit,
    epsilon: f64,
) -> SolitonShift {
    let dx = after.c3 - before.c3;
    SolitonShift {
        dx,
        dx_over_eps2: dx / (epsilon * epsilon),
    }
}
