//! Experiment configuration.

use std::path::{Path, PathBuf};

use graysol::analytic::SolitonParams;
use serde::{Deserialize, Serialize};

use crate::experiment::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PacketAdvance,
    SolitonShift,
    /// Center-of-mass speed before and after the crossing.
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::PacketAdvance => "packet-advance",
            Self::SolitonShift => "soliton-shift",
            Self::Custom => "custom",
        }
    }
}

/// Optional grid overrides; unset fields use the automatic sizing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryOverrides {
    pub half_length: Option<f64>,
    pub n_points: Option<usize>,
    pub max_dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mu: f64,
    pub betas: Vec<f64>,
    pub k_values: Vec<f64>,
    /// Normalized amplitudes, `N₁ = ε²`.
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    /// Packet launch position for the packet-advance pipeline.
    pub x_init: f64,
    pub geometry: GeometryOverrides,
    pub dt: Option<f64>,
    pub sample_every: usize,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    /// Write wall-clock runtimes; off gives byte-identical reruns.
    pub record_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::packet_advance()
    }
}

impl ExperimentConfig {
    /// Packet on a `β = v = 1/2` soliton, `k = 0.7`, `λ = 12`, `ε = 0.02`, from `x = −80`.
    pub fn packet_advance() -> Self {
        Self {
            experiment: ExperimentKind::PacketAdvance,
            mu: 1.0,
            betas: vec![0.5],
            k_values: vec![0.7],
            epsilons: vec![0.02],
            lambda: 12.0,
            x_init: -80.0,
            geometry: GeometryOverrides::default(),
            dt: None,
            sample_every: 100,
            out_dir: PathBuf::from("out"),
            threads: 0,
            record_timings: true,
        }
    }

    /// Four soliton speeds, four wavenumbers, four amplitudes.
    pub fn soliton_shift() -> Self {
        Self {
            experiment: ExperimentKind::SolitonShift,
            betas: vec![-0.5, -0.0058, 1.0 / 3.0, 0.5],
            k_values: vec![0.7, 1.0, 1.4, 1.95],
            epsilons: vec![0.03, 0.1, 0.2, 0.3],
            ..Self::packet_advance()
        }
    }

    pub fn custom() -> Self {
        Self {
            experiment: ExperimentKind::Custom,
            betas: vec![0.5],
            k_values: vec![1.0],
            epsilons: vec![0.1, 0.2],
            ..Self::packet_advance()
        }
    }

    pub fn preset(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::PacketAdvance => Self::packet_advance(),
            ExperimentKind::SolitonShift => Self::soliton_shift(),
            ExperimentKind::Custom => Self::custom(),
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn solver(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            max_dx: self.geometry.max_dx.unwrap_or(d.max_dx),
            n_points: self.geometry.n_points,
            half_length: self.geometry.half_length,
            dt: self.dt,
            sample_every: self.sample_every,
        }
    }

    /// Checks every sweep point before anything runs.
    pub fn validate(&self) -> anyhow::Result<()> {
        use anyhow::bail;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            bail!("mu = {} must be positive", self.mu);
        }
        if !(self.lambda >= 6.0) {
            bail!("lambda = {} below 6", self.lambda);
        }
        if self.sample_every == 0 {
            bail!("sample_every must be at least 1");
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                bail!("dt = {dt} must be positive");
            }
        }
        if let Some(n) = self.geometry.n_points {
            if n < 256 || !n.is_power_of_two() {
                bail!("n_points = {n} must be a power of two >= 256");
            }
        }
        for &beta in &self.betas {
            SolitonParams::comoving(beta, self.mu)
                .map_err(|e| anyhow::anyhow!("beta = {beta}: {e}"))?;
            if beta == 0.0 {
                bail!("beta = 0 cannot be tuned onto a ring");
            }
        }
        for &k in &self.k_values {
            if !(k > 0.0 && k * self.lambda >= 8.0) {
                bail!("k = {k}: need k > 0 and k lambda >= 8");
            }
        }
        for &e in &self.epsilons {
            if !(0.0..=0.3).contains(&e) {
                bail!("epsilon = {e} outside [0, 0.3]");
            }
            if e == 0.0 && self.experiment != ExperimentKind::PacketAdvance {
                bail!("epsilon = 0 gives no shift to measure");
            }
        }
        if self.experiment == ExperimentKind::PacketAdvance && !(self.x_init < 0.0) {
            bail!("x_init = {} must be left of the soliton", self.x_init);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in [
            ExperimentKind::PacketAdvance,
            ExperimentKind::SolitonShift,
            ExperimentKind::Custom,
        ] {
            ExperimentConfig::preset(kind).validate().unwrap();
        }
    }

    #[test]
    fn json_roundtrip_and_partial() {
        let c = ExperimentConfig::soliton_shift();
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        let partial: ExperimentConfig =
            serde_json::from_str(r#"{"experiment": "soliton-shift", "k_values": []}"#).unwrap();
        assert_eq!(partial.experiment, ExperimentKind::SolitonShift);
        assert!(partial.k_values.is_empty());
    }

    #[test]
    fn rejects_bad_points() {
        let mut c = ExperimentConfig::soliton_shift();
        c.k_values.push(0.4);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::soliton_shift();
        c.betas.push(0.0);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::soliton_shift();
        c.betas.push(1.2);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::soliton_shift();
        c.epsilons.push(0.5);
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
