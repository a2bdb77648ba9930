//! Aggregates over sweep outcomes.

use serde::Serialize;

use crate::experiment::ShiftOutcome;

/// ε-averaged soliton shift for one `(β, k)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftGroup {
    pub beta: f64,
    pub k_requested: f64,
    pub k_snapped: f64,
    pub epsilons: Vec<f64>,
    pub dx_over_eps2: Vec<f64>,
    pub mean: f64,
    /// Largest `|x/mean − 1|` over the amplitudes.
    pub max_deviation: f64,
    pub pred: f64,
    pub pred_without_n2: f64,
    /// `|mean/pred − 1|`.
    pub pred_error: f64,
}

/// Groups by `(β, k)` in first-seen order.
pub fn shift_groups(outcomes: &[ShiftOutcome]) -> Vec<ShiftGroup> {
    let mut groups: Vec<ShiftGroup> = Vec::new();
    for o in outcomes {
        let eps2 = o.point.epsilon * o.point.epsilon;
        let found = groups
            .iter_mut()
            .find(|g| g.beta == o.point.beta && g.k_requested == o.point.k);
        let g = match found {
            Some(g) => g,
            None => {
                groups.push(ShiftGroup {
                    beta: o.point.beta,
                    k_requested: o.point.k,
                    k_snapped: o.k_snapped,
                    epsilons: Vec::new(),
                    dx_over_eps2: Vec::new(),
                    mean: 0.0,
                    max_deviation: 0.0,
                    pred: o.quantities.dx_pred / eps2,
                    pred_without_n2: o.quantities.dx_pred_without_n2 / eps2,
                    pred_error: 0.0,
                });
                groups.last_mut().unwrap()
            }
        };
        g.epsilons.push(o.point.epsilon);
        g.dx_over_eps2.push(o.dx_over_eps2);
    }
    for g in &mut groups {
        g.mean = g.dx_over_eps2.iter().sum::<f64>() / g.dx_over_eps2.len() as f64;
        g.max_deviation = g
            .dx_over_eps2
            .iter()
            .map(|x| (x / g.mean - 1.0).abs())
            .fold(0.0, f64::max);
        g.pred_error = (g.mean / g.pred - 1.0).abs();
    }
    groups
}

/// Slope of `log Δx` against `log ε` with a separate intercept per group.
/// Returns `None` without at least two distinct amplitudes in some group,
/// or if any shift is not positive.
pub fn pooled_scaling_slope(groups: &[ShiftGroup]) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for g in groups {
        let pts: Vec<(f64, f64)> = g
            .epsilons
            .iter()
            .zip(&g.dx_over_eps2)
            .map(|(&e, &r)| (e.ln(), (r * e * e).ln()))
            .collect();
        if pts.iter().any(|(_, y)| !y.is_finite()) {
            return None;
        }
        let n = pts.len() as f64;
        let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
        for (x, y) in pts {
            sxy += (x - xm) * (y - ym);
            sxx += (x - xm) * (x - xm);
        }
    }
    (sxx > 0.0).then(|| sxy / sxx)
}
