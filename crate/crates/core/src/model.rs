//! Shared domain types: cavity parameters, the uniform time grid, sampled
//! control pulses, state trajectories and the excitation ledger.
//!
//! Rates are angular frequencies in rad/s and times are seconds. The
//! boundary helpers [`mhz_to_rad`] and [`rad_to_mhz`] follow the
//! `2π × ν MHz` convention used for quoting cavity-QED parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid steps over a photon support.
pub const DEFAULT_STEPS: usize = 1 << 14;

/// Default initial population of |e,0⟩ used when deriving pulses.
pub const DEFAULT_RHO0: f64 = 0.005;

/// `ν` MHz (ordinary frequency) to `2π·ν·10⁶` rad/s.
pub fn mhz_to_rad(nu_mhz: f64) -> f64 {
    2.0 * PI * nu_mhz * 1e6
}

pub fn rad_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

pub fn us_to_s(t_us: f64) -> f64 {
    t_us * 1e-6
}

pub fn s_to_us(t: f64) -> f64 {
    t * 1e6
}

/// Atom-cavity coupling `g`, cavity field decay `κ`, atomic polarization
/// decay `γ` (all rad/s) and the initial |e,0⟩ population `ρ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    g: f64,
    kappa: f64,
    gamma: f64,
    rho0: f64,
}

impl CavityParams {
    pub fn new(g: f64, kappa: f64, gamma: f64, rho0: f64) -> Result<Self> {
        for (name, v) in [("g", g), ("kappa", kappa), ("gamma", gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(rho0.is_finite() && (0.0..1.0).contains(&rho0)) {
            return Err(Error::InvalidParameter(format!(
                "rho0 must lie in [0, 1), got {rho0}"
            )));
        }
        Ok(Self {
            g,
            kappa,
            gamma,
            rho0,
        })
    }

    /// Parameters quoted as `2π × (g, κ, γ)` MHz.
    pub fn from_mhz(g_mhz: f64, kappa_mhz: f64, gamma_mhz: f64, rho0: f64) -> Result<Self> {
        Self::new(
            mhz_to_rad(g_mhz),
            mhz_to_rad(kappa_mhz),
            mhz_to_rad(gamma_mhz),
            rho0,
        )
    }

    /// Holds `κ` and `γ` fixed and picks `g = √(2κγC)`.
    pub fn from_cooperativity(c: f64, kappa: f64, gamma: f64, rho0: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cooperativity must be finite and > 0, got {c}"
            )));
        }
        Self::new((2.0 * kappa * gamma * c).sqrt(), kappa, gamma, rho0)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn with_rho0(&self, rho0: f64) -> Result<Self> {
        Self::new(self.g, self.kappa, self.gamma, rho0)
    }

    pub fn cooperativity(&self) -> f64 {
        cooperativity(self)
    }
}

/// `C = g²/(2κγ)`.
pub fn cooperativity(p: &CavityParams) -> f64 {
    p.g * p.g / (2.0 * p.kappa * p.gamma)
}

/// Uniform grid `t_k`, `k = 0..=n_steps`, evaluated from the index so that
/// both end points are reproduced exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_stop: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_stop: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_stop.is_finite() && t_stop > t_start) {
            return Err(Error::InvalidGrid(format!(
                "need finite t_stop > t_start, got [{t_start}, {t_stop}]"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need n_steps >= 2, got {n_steps}"
            )));
        }
        Ok(Self {
            t_start,
            t_stop,
            n_steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_stop(&self) -> f64 {
        self.t_stop
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_stop - self.t_start) / self.n_steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_stop - self.t_start
    }

    pub fn t(&self, k: usize) -> f64 {
        let s = k as f64 / self.n_steps as f64;
        self.t_start * (1.0 - s) + self.t_stop * s
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |k| self.t(k))
    }

    /// Same span, half the step.
    pub fn refined(&self) -> Self {
        Self {
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_stop
    }
}

/// Trapezoidal rule over samples on a uniform grid.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Running trapezoidal integral; element `k` integrates `samples[..=k]`.
pub fn cumulative_trapezoid(samples: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for (k, &f) in samples.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (samples[k - 1] + f);
        }
        out.push(acc);
    }
    out
}

/// Real, signed Rabi frequency sampled on a grid (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPulse {
    grid: TimeGrid,
    omega: Vec<f64>,
}

impl ControlPulse {
    pub fn new(grid: TimeGrid, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "pulse has {} samples, grid has {} points",
                omega.len(),
                grid.len()
            )));
        }
        if let Some(k) = omega.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite Rabi frequency at grid index {k}"
            )));
        }
        Ok(Self { grid, omega })
    }

    /// Zero drive on `grid`.
    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            grid,
            omega: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn peak_abs(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Linear interpolation between samples `k` and `k + 1`.
    pub fn interpolate(&self, k: usize, frac: f64) -> f64 {
        let a = self.omega[k];
        match self.omega.get(k + 1) {
            Some(&b) => a + (b - a) * frac,
            None => a,
        }
    }
}

/// Amplitudes of |e,0⟩, |x,0⟩ (stored as `c_x = i·c_x_im`) and |g,1⟩, plus the
/// reflected running-wave amplitude, at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub c_e: Vec<f64>,
    pub c_x_im: Vec<f64>,
    pub c_g: Vec<f64>,
    pub phi_in: Vec<f64>,
    pub phi_out: Vec<f64>,
}

impl StateTrajectory {
    pub fn rho_ee(&self) -> Vec<f64> {
        self.c_e.iter().map(|c| c * c).collect()
    }

    pub fn rho_xx(&self) -> Vec<f64> {
        self.c_x_im.iter().map(|c| c * c).collect()
    }

    pub fn rho_gg(&self) -> Vec<f64> {
        self.c_g.iter().map(|c| c * c).collect()
    }

    /// `ρ_ee + ρ_xx + ρ_gg` at grid index `k`.
    pub fn norm_sqr(&self, k: usize) -> f64 {
        self.c_e[k].powi(2) + self.c_x_im[k].powi(2) + self.c_g[k].powi(2)
    }

    pub fn last(&self) -> usize {
        self.grid.n_steps()
    }
}

/// Where the incoming excitation ended up after one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    /// `∫|φ_out|² dt`
    pub reflection: f64,
    /// `∫2γρ_xx dt`
    pub spont_loss: f64,
    /// `ρ_ee(t_stop) − ρ_ee(t_start)`
    pub storage_efficiency: f64,
    pub conservation_residual: f64,
}
