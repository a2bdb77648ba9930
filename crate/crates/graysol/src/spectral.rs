//! FFT helpers on the periodic grid `x_j = −L + j·dx`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Angular wavenumbers in FFT order. The Nyquist entry carries `−π/dx`.
pub fn wavenumbers(n: usize, half_length: f64) -> Vec<f64> {
    let dq = PI / half_length;
    (0..n)
        .map(|j| {
            if j < n / 2 {
                j as f64 * dq
            } else {
                (j as f64 - n as f64) * dq
            }
        })
        .collect()
}

/// Forward/inverse transform pair with owned scratch space.
pub struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            scratch: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&mut self, data: &mut [C64]) {
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&mut self, data: &mut [C64]) {
        self.inv.process_with_scratch(data, &mut self.scratch);
    }

    /// Applies the Fourier multiplier `m(q)` to `data`.
    pub fn filter(&mut self, data: &mut [C64], multiplier: impl Fn(f64) -> C64, qs: &[f64]) {
        self.forward(data);
        let scale = 1.0 / self.n as f64;
        for (d, &q) in data.iter_mut().zip(qs) {
            *d *= multiplier(q) * scale;
        }
        self.inverse(data);
    }
}

/// `order`-th derivative of `f(x) = e^{iγx} g(x)` with `g` periodic, i.e. of a
/// field that picks up the factor `e^{2iγL}` around the ring.
pub fn derivative_twisted(values: &[C64], half_length: f64, twist: f64, order: u32) -> Vec<C64> {
    let n = values.len();
    let qs = wavenumbers(n, half_length);
    let dx = 2.0 * half_length / n as f64;
    let mut g: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(j, &f)| f * C64::from_polar(1.0, -twist * (-half_length + j as f64 * dx)))
        .collect();
    let mut fft = Fourier::new(n);
    fft.forward(&mut g);
    let scale = 1.0 / n as f64;
    for (j, (d, &q)) in g.iter_mut().zip(&qs).enumerate() {
        if j == n / 2 && order % 2 == 1 {
            *d = C64::new(0.0, 0.0);
        } else {
            *d *= C64::new(0.0, q + twist).powu(order) * scale;
        }
    }
    fft.inverse(&mut g);
    g.iter()
        .enumerate()
        .map(|(j, &d)| d * C64::from_polar(1.0, twist * (-half_length + j as f64 * dx)))
        .collect()
}

/// Spectral derivative of a periodic real function.
pub fn derivative_real(values: &[f64], half_length: f64) -> Vec<f64> {
    let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    derivative_twisted(&data, half_length, 0.0, 1)
        .iter()
        .map(|c| c.re)
        .collect()
}

/// Zero-mean periodic antiderivative of the zero-mean part of `values`.
pub fn antiderivative_real(values: &[f64], half_length: f64) -> Vec<f64> {
    let n = values.len();
    let qs = wavenumbers(n, half_length);
    let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut fft = Fourier::new(n);
    fft.filter(
        &mut data,
        |q| {
            if q == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, -1.0 / q)
            }
        },
        &qs,
    );
    data.iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, l: f64) -> Vec<f64> {
        let dx = 2.0 * l / n as f64;
        (0..n).map(|j| -l + j as f64 * dx).collect()
    }

    #[test]
    fn wavenumbers_layout() {
        let q = wavenumbers(8, PI);
        assert_eq!(q, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn derivative_of_trig_is_exact() {
        let l = 7.0;
        let xs = grid(128, l);
        let w = 3.0 * PI / l;
        let f: Vec<f64> = xs.iter().map(|&x| (w * x).sin() + 0.5).collect();
        let d = derivative_real(&f, l);
        for (x, d) in xs.iter().zip(d) {
            assert!((d - w * (w * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn twisted_plane_wave() {
        // e^{ikx} with k off the ring lattice
        let (l, k) = (10.0, 0.73);
        let xs = grid(256, l);
        let f: Vec<C64> = xs.iter().map(|&x| C64::from_polar(1.0, k * x)).collect();
        for order in 1..=3 {
            let d = derivative_twisted(&f, l, k, order);
            let want = C64::new(0.0, k).powu(order);
            for (fj, dj) in f.iter().zip(&d) {
                assert!((dj - want * fj).norm() < 1e-10, "order {order}");
            }
        }
    }

    #[test]
    fn twisted_gaussian_packet() {
        let (l, k) = (30.0, 1.9);
        let xs = grid(1024, l);
        let g = |x: f64| (-x * x / 8.0).exp();
        let f: Vec<C64> = xs.iter().map(|&x| C64::from_polar(g(x), k * x)).collect();
        let d = derivative_twisted(&f, l, 0.0, 2);
        for (&x, dj) in xs.iter().zip(&d) {
            let gp = -x / 4.0 * g(x);
            let gpp = (x * x / 16.0 - 0.25) * g(x);
            let want =
                C64::from_polar(1.0, k * x) * (gpp + 2.0 * C64::new(0.0, k) * gp - k * k * g(x));
            assert!((dj - want).norm() < 1e-11);
        }
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let l = 5.0;
        let xs = grid(64, l);
        let f: Vec<f64> = xs
            .iter()
            .map(|&x| (PI * x / l).cos() + 0.3 * (4.0 * PI * x / l).sin())
            .collect();
        let back = derivative_real(&antiderivative_real(&f, l), l);
        for (a, b) in f.iter().zip(back) {
            assert!((a - b).abs() < 1e-13);
        }
        let shifted: Vec<f64> = f.iter().map(|v| v + 2.0).collect();
        let a = antiderivative_real(&shifted, l);
        assert!(a.iter().sum::<f64>().abs() < 1e-11);
    }

    #[test]
    fn filter_identity_and_shift() {
        let l = 4.0;
        let n = 32;
        let xs = grid(n, l);
        let qs = wavenumbers(n, l);
        let f: Vec<C64> = xs
            .iter()
            .map(|&x| C64::new((PI * x / l).sin(), (2.0 * PI * x / l).cos()))
            .collect();
        let mut fft = Fourier::new(n);
        let mut same = f.clone();
        fft.filter(&mut same, |_| C64::new(1.0, 0.0), &qs);
        assert!(f.iter().zip(&same).all(|(a, b)| (a - b).norm() < 1e-14));
        // translation by one grid step
        let dx = 2.0 * l / n as f64;
        let mut moved = f.clone();
        fft.filter(&mut moved, |q| C64::from_polar(1.0, -q * dx), &qs);
        for j in 1..n {
            assert!((moved[j] - f[j - 1]).norm() < 1e-13);
        }
        assert_eq!(fft.len(), n);
    }
}
