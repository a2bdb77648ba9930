//! Closed-form gray-soliton Bogoliubov theory.
//!
//! Everything here is a pure function of [`SolitonParams`] and the carrier
//! wavenumber. Mode functions are returned in the lab gauge of the
//! co-moving frame, i.e. including the background flow factor `e^{-iv(x-x0)}`.

mod dispersion;
mod modes;
mod quantities;
mod second_order;
mod soliton;

pub use dispersion::*;
pub use modes::*;
pub use quantities::*;
pub use second_order::*;
pub use soliton::*;

/// Direction of approach for limits taken at `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn of(k: f64) -> Self {
        if k < 0.0 {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }
}

/// Side of the soliton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

pub(crate) fn sgn(k: f64) -> f64 {
    if k < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `sech²(y)` without overflow for large `|y|`.
pub(crate) fn sech2(y: f64) -> f64 {
    let e = (-2.0 * y.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}
