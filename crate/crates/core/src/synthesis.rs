//! Analytic inversion from an incoming photon φ_in(t) to the control pulse
//! Ω(t) that keeps the reflected field identically zero.
//!
//! With `φ_out = 0` the cavity amplitude is slaved to the input,
//! `c_g = φ_in/√(2κ)`. The cavity row of the equations of motion then fixes
//! `c_x = i·(ċ_g − κc_g)/g`, the excited-state row fixes the product
//! `ζ = Ω·c_e = 2(−ċ_x,im − γc_x,im − g·c_g)`, and excitation balance gives
//! `ρ_ee(t) = ρ₀ − ρ_gg − ρ_xx + ∫(|φ_in|² − 2γρ_xx)dt'`. Taking the positive
//! root `c_e = √ρ_ee` leaves `Ω = ζ/√ρ_ee`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cumulative_trapezoid, CavityParams, ControlPulse, TimeGrid};
use crate::shapes::PhotonWaveform;

/// Populations below this are treated as zero when dividing out `c_e`.
pub const EPS_DIV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Fail with [`Error::OmegaCapExceeded`] instead of clipping.
    pub omega_max: Option<f64>,
    pub eps_div: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            omega_max: None,
            eps_div: EPS_DIV,
        }
    }
}

/// Amplitudes implied by perfect impedance matching at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedAmplitudes {
    pub cg: f64,
    pub cg_dot: f64,
    pub cx_im: f64,
    pub cx_im_dot: f64,
    pub zeta: f64,
}

impl MatchedAmplitudes {
    /// From `[φ, φ', φ'']` at one instant.
    pub fn from_derivatives(phi: [f64; 3], p: &CavityParams) -> Self {
        let [v, d1, d2] = phi;
        let (g, kappa, gamma) = (p.g(), p.kappa(), p.gamma());
        let root = (2.0 * kappa).sqrt();
        let cg = v / root;
        let cg_dot = d1 / root;
        let cx_im = (d1 - kappa * v) / (g * root);
        let cx_im_dot = (d2 - kappa * d1) / (g * root);
        let zeta = 2.0 * (-cx_im_dot - gamma * cx_im - g * cg);
        Self {
            cg,
            cg_dot,
            cx_im,
            cx_im_dot,
            zeta,
        }
    }

    pub fn at(w: &PhotonWaveform, p: &CavityParams, t: f64) -> Result<Self> {
        Ok(Self::from_derivatives(w.eval_checked(t)?, p))
    }
}

/// `c_g(t) = φ_in(t)/√(2κ)`.
pub fn amplitude_cg(w: &PhotonWaveform, p: &CavityParams, t: f64) -> Result<f64> {
    Ok(MatchedAmplitudes::at(w, p, t)?.cg)
}

/// Imaginary part of `c_x(t)`: `(φ' − κφ)/(g√(2κ))`.
pub fn amplitude_cx(w: &PhotonWaveform, p: &CavityParams, t: f64) -> Result<f64> {
    Ok(MatchedAmplitudes::at(w, p, t)?.cx_im)
}

/// `ζ(t) = Ω(t)·c_e(t)`.
pub fn coupling_product_zeta(w: &PhotonWaveform, p: &CavityParams, t: f64) -> Result<f64> {
    Ok(MatchedAmplitudes::at(w, p, t)?.zeta)
}

/// Grid samples of every quantity in the inversion chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisIntermediates {
    pub grid: TimeGrid,
    pub phi_in: Vec<f64>,
    pub cg: Vec<f64>,
    pub cx_im: Vec<f64>,
    pub cx_im_dot: Vec<f64>,
    pub zeta: Vec<f64>,
    pub rho_ee: Vec<f64>,
}

fn check_grid(w: &PhotonWaveform, grid: &TimeGrid) -> Result<()> {
    for t in [grid.t_start(), grid.t_stop()] {
        if !w.contains(t) {
            return Err(Error::OutsideSupport {
                t,
                t_start: w.t_start(),
                t_stop: w.t_stop(),
            });
        }
    }
    Ok(())
}

/// Evaluates the chain on `grid` without any feasibility checks.
pub fn intermediates(
    w: &PhotonWaveform,
    p: &CavityParams,
    grid: &TimeGrid,
) -> Result<SynthesisIntermediates> {
    check_grid(w, grid)?;
    let n = grid.len();
    let mut out = SynthesisIntermediates {
        grid: *grid,
        phi_in: Vec::with_capacity(n),
        cg: Vec::with_capacity(n),
        cx_im: Vec::with_capacity(n),
        cx_im_dot: Vec::with_capacity(n),
        zeta: Vec::with_capacity(n),
        rho_ee: Vec::with_capacity(n),
    };
    for t in grid.times() {
        let phi = w.eval(t);
        let m = MatchedAmplitudes::from_derivatives(phi, p);
        out.phi_in.push(phi[0]);
        out.cg.push(m.cg);
        out.cx_im.push(m.cx_im);
        out.cx_im_dot.push(m.cx_im_dot);
        out.zeta.push(m.zeta);
    }

    let gamma = p.gamma();
    let source: Vec<f64> = out
        .phi_in
        .iter()
        .zip(&out.cx_im)
        .map(|(f, x)| f * f - 2.0 * gamma * x * x)
        .collect();
    let inflow = cumulative_trapezoid(&source, grid.dt());
    out.rho_ee = inflow
        .iter()
        .zip(out.cg.iter().zip(&out.cx_im))
        .map(|(acc, (cg, cx))| p.rho0() - cg * cg - cx * cx + acc)
        .collect();
    Ok(out)
}

/// `ρ_ee(t_k)` from excitation balance; fails if it goes negative anywhere.
pub fn population_ee(w: &PhotonWaveform, p: &CavityParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    let chain = intermediates(w, p, grid)?;
    check_feasible(&chain, p)?;
    Ok(chain.rho_ee)
}

/// Impedance matching needs `C > 1/2`; at or below it the balance only
/// closes while `ρ₀` lasts, so such couplings are rejected outright.
pub const MIN_COOPERATIVITY: f64 = 0.5;

fn check_feasible(chain: &SynthesisIntermediates, p: &CavityParams) -> Result<()> {
    let weak = p.cooperativity() <= MIN_COOPERATIVITY * (1.0 + 1e-12);
    let worst = chain
        .rho_ee
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, &r)| (k, r));
    match worst {
        Some((k, r)) if r < 0.0 || weak => Err(Error::InfeasibleCoupling {
            t: chain.grid.t(k),
            rho_ee: r,
            cooperativity: p.cooperativity(),
        }),
        _ => Ok(()),
    }
}

/// A synthesized pulse together with the chain that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub pulse: ControlPulse,
    pub chain: SynthesisIntermediates,
}

/// The impedance-matching control pulse `Ω(t_k) = ζ(t_k)/√ρ_ee(t_k)`.
pub fn synthesize_control(
    w: &PhotonWaveform,
    p: &CavityParams,
    grid: &TimeGrid,
) -> Result<ControlPulse> {
    synthesize_with(w, p, grid, &SynthesisOptions::default()).map(|s| s.pulse)
}

pub fn synthesize_with(
    w: &PhotonWaveform,
    p: &CavityParams,
    grid: &TimeGrid,
    opts: &SynthesisOptions,
) -> Result<Synthesis> {
    if p.rho0() == 0.0 {
        return Err(Error::ZeroRho0);
    }
    let chain = intermediates(w, p, grid)?;
    check_feasible(&chain, p)?;

    let mut omega = Vec::with_capacity(grid.len());
    for (k, (&zeta, &rho)) in chain.zeta.iter().zip(&chain.rho_ee).enumerate() {
        let t = grid.t(k);
        let value = if rho < opts.eps_div {
            if zeta != 0.0 {
                return Err(Error::DivergentPulse {
                    t,
                    rho_ee: rho,
                    zeta,
                });
            }
            0.0
        } else {
            zeta / rho.sqrt()
        };
        if !value.is_finite() {
            return Err(Error::DivergentPulse {
                t,
                rho_ee: rho,
                zeta,
            });
        }
        if let Some(cap) = opts.omega_max {
            if value.abs() > cap {
                return Err(Error::OmegaCapExceeded {
                    t,
                    omega: value,
                    cap,
                });
            }
        }
        omega.push(value);
    }
    Ok(Synthesis {
        pulse: ControlPulse::new(*grid, omega)?,
        chain,
    })
}

/// Largest relative deviation between `ζ` rebuilt from `(c_g, c_x, Ω·√ρ_ee)`
/// and the excited-state row `2(−ċ_x,im − γc_x,im − g·c_g)`.
pub fn chain_residual(s: &Synthesis, p: &CavityParams) -> f64 {
    let c = &s.chain;
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..c.grid.len() {
        let rebuilt = s.pulse.omega()[k] * c.rho_ee[k].max(0.0).sqrt();
        let row = 2.0 * (-c.cx_im_dot[k] - p.gamma() * c.cx_im[k] - p.g() * c.cg[k]);
        err = err.max((rebuilt - row).abs());
        scale = scale.max(row.abs());
    }
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}
