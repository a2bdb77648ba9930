use num_complex::Complex64 as C64;
use serde::Serialize;

use super::*;
use crate::Result;

/// Per-wavenumber analytic quantities for a packet of breadth `lambda` and
/// normalized amplitude `epsilon` (so that `n1 = ε²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeQuantities {
    pub k: f64,
    pub omega: f64,
    pub nu: f64,
    pub nu_corr: f64,
    pub theta: f64,
    pub delta: f64,
    #[serde(skip)]
    pub norm: C64,
    pub u_bar: f64,
    pub v_bar: f64,
    pub eta: f64,
    pub zeta_q: f64,
    pub raw_amplitude: f64,
    pub n1: f64,
    pub n2: f64,
    pub dx_pred: f64,
    pub dx_pred_without_n2: f64,
}

impl ModeQuantities {
    pub fn compute(k: f64, lambda: f64, epsilon: f64, p: &SolitonParams) -> Result<Self> {
        p.validate()?;
        let (u_bar, v_bar) = uniform_modes(k, p)?;
        let d = dressing_coefficients(k, p)?;
        let raw = raw_amplitude(k, lambda, epsilon, p)?;
        let n = excited_numbers(k, lambda, raw, p)?;
        Ok(Self {
            k,
            omega: dispersion(k, p),
            nu: group_velocity(k, p),
            nu_corr: corrected_group_velocity(k, lambda, p)?,
            theta: phase_shift(k, p),
            delta: packet_advance(k, p)?,
            norm: mode_normalization(k, p)?,
            u_bar,
            v_bar,
            eta: d.eta,
            zeta_q: d.zeta,
            raw_amplitude: raw,
            n1: n.n1,
            n2: n.n2,
            dx_pred: soliton_shift_prediction(k, lambda, raw, p)?,
            dx_pred_without_n2: soliton_shift_without_dressing(k, lambda, raw, p)?,
        })
    }
}
