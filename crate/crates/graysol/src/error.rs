use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid soliton parameters: {0}")]
    InvalidParams(String),
    #[error("zero wavenumber: {0}")]
    ZeroWavenumber(&'static str),
    #[error("degenerate dressing denominator (nu + beta)^2 - c^2 = {value:e} at k = {k}")]
    DegenerateDenominator { k: f64, value: f64 },
    #[error("complex envelope width has non-positive real part ({re}) at t = {t}")]
    InvalidWidth { re: f64, t: f64 },
    #[error("invalid ring geometry: {0}")]
    InvalidGeometry(String),
    #[error("no sign change of the quantization function in ({lo}, {hi})")]
    RootBracketing { lo: f64, hi: f64 },
    #[error("no tuned ring: {0}")]
    NoSolution(String),
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("spectrum does not cover the packet: edge weight {weight:e} at k = {k}")]
    InsufficientSpectrum { k: f64, weight: f64 },
    #[error("residual winding mismatch {0:e} after compensation")]
    WindingMismatch(f64),
    #[error("phase step {0} too large for a linear compensation pulse")]
    StepTooLarge(f64),
    #[error("time step violates the stability guard: dt * max symbol = {0}")]
    UnstableStep(f64),
    #[error("instability detected at t = {t}: relative N drift {drift:e} in one step")]
    InstabilityDetected { t: f64, drift: f64 },
    #[error("packet density reached the seam at t = {t} (fraction {fraction:e})")]
    SeamCrossing { t: f64, fraction: f64 },
    #[error("soliton fit diverged: {0}")]
    FitDiverged(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error("region mass {mass:e} below noise floor {floor:e}")]
    LowMass { mass: f64, floor: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
