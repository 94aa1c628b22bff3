use thiserror::Error;

/// Errors raised while constructing inputs, synthesizing pulses or simulating.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("time {t:e} s lies outside the photon support [{t_start:e}, {t_stop:e}] s")]
    OutsideSupport { t: f64, t_start: f64, t_stop: f64 },

    #[error(
        "infeasible coupling: cooperativity C = {cooperativity:.4} (impedance matching \
         needs C > 1/2); minimum rho_ee = {rho_ee:.3e} at t = {t:.6e} s"
    )]
    InfeasibleCoupling {
        t: f64,
        rho_ee: f64,
        cooperativity: f64,
    },

    #[error("divergent pulse: rho_ee = {rho_ee:.3e} below threshold with zeta = {zeta:.3e} at t = {t:.6e} s")]
    DivergentPulse { t: f64, rho_ee: f64, zeta: f64 },

    #[error("pulse exceeds cap: |omega| = {omega:.6e} rad/s > {cap:.6e} rad/s at t = {t:.6e} s")]
    OmegaCapExceeded { t: f64, omega: f64, cap: f64 },

    #[error(
        "zero rho0: the impedance-matching pulse diverges for an empty initial |e,0> population"
    )]
    ZeroRho0,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time bins overlap: bin 1 ends at {end1:e} s, bin 2 starts at {start2:e} s")]
    OverlapError { end1: f64, start2: f64 },

    #[error("qubit amplitudes not normalized: |alpha|^2 + |beta|^2 = {0}")]
    Normalization(f64),
}

impl Error {
    /// Variant name, used as a stable tag in diagnostics and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidParameter(_) => "InvalidParameter",
            Self::InvalidGrid(_) => "InvalidGrid",
            Self::InvalidWaveform(_) => "InvalidWaveform",
            Self::OutsideSupport { .. } => "OutsideSupport",
            Self::InfeasibleCoupling { .. } => "InfeasibleCoupling",
            Self::DivergentPulse { .. } => "DivergentPulse",
            Self::OmegaCapExceeded { .. } => "OmegaCapExceeded",
            Self::ZeroRho0 => "ZeroRho0",
            Self::GridMismatch(_) => "GridMismatch",
            Self::OverlapError { .. } => "OverlapError",
            Self::Normalization(_) => "Normalization",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
