//! Direct integration of the resonant atom-cavity equations of motion.
//!
//! With `g` and `φ_in` real, `c_e` and `c_g` stay real and `c_x = i·c_x,im`
//! is purely imaginary, so the dynamics reduce to
//!
//! ```text
//! ċ_e    =  Ω/2·c_x,im
//! ċ_x,im = −Ω/2·c_e − γ·c_x,im − g·c_g
//! ċ_g    =  g·c_x,im − κ·c_g + √(2κ)·φ_in
//! φ_out  =  √(2κ)·c_g − φ_in
//! ```
//!
//! integrated with fixed-step classical RK4 on the pulse grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    trapezoid, AbsorptionReport, CavityParams, ControlPulse, StateTrajectory, TimeGrid,
};
use crate::shapes::PhotonWaveform;

/// A real incoming running-wave amplitude `φ_in(t)`.
pub trait IncomingField {
    fn amplitude(&self, t: f64) -> f64;
}

impl IncomingField for PhotonWaveform {
    fn amplitude(&self, t: f64) -> f64 {
        self.value(t)
    }
}

/// `factor · φ_in(t)`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<'a, F: ?Sized>(pub &'a F, pub f64);

impl<F: IncomingField + ?Sized> IncomingField for Scaled<'_, F> {
    fn amplitude(&self, t: f64) -> f64 {
        self.1 * self.0.amplitude(t)
    }
}

/// No incoming photon.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoInput;

impl IncomingField for NoInput {
    fn amplitude(&self, _t: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    ce0: f64,
    cx_im0: f64,
    cg0: f64,
}

impl InitialState {
    pub fn new(ce0: f64, cx_im0: f64, cg0: f64) -> Result<Self> {
        let norm = ce0 * ce0 + cx_im0 * cx_im0 + cg0 * cg0;
        if !(norm.is_finite() && norm <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "initial populations sum to {norm}, must not exceed 1"
            )));
        }
        Ok(Self { ce0, cx_im0, cg0 })
    }

    /// All population outside the one-excitation subspace, i.e. in |g,0⟩.
    pub fn ground() -> Self {
        Self {
            ce0: 0.0,
            cx_im0: 0.0,
            cg0: 0.0,
        }
    }

    /// `c_e = √ρ₀`, the boundary value the pulse was derived for.
    pub fn matched(p: &CavityParams) -> Self {
        Self {
            ce0: p.rho0().sqrt(),
            cx_im0: 0.0,
            cg0: 0.0,
        }
    }

    pub fn ce0(&self) -> f64 {
        self.ce0
    }

    pub fn cx_im0(&self) -> f64 {
        self.cx_im0
    }

    pub fn cg0(&self) -> f64 {
        self.cg0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ce0 * self.ce0 + self.cx_im0 * self.cx_im0 + self.cg0 * self.cg0
    }
}

#[inline]
fn rhs(y: [f64; 3], omega: f64, phi: f64, g: f64, kappa: f64, gamma: f64, root: f64) -> [f64; 3] {
    let [ce, cx, cg] = y;
    [
        0.5 * omega * cx,
        -0.5 * omega * ce - gamma * cx - g * cg,
        g * cx - kappa * cg + root * phi,
    ]
}

#[inline]
fn axpy(y: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Integrates the atom-cavity system driven by `pulse` and fed by `field`.
pub fn simulate<F: IncomingField + ?Sized>(
    field: &F,
    pulse: &ControlPulse,
    p: &CavityParams,
    init: InitialState,
    grid: &TimeGrid,
) -> Result<StateTrajectory> {
    if pulse.grid() != grid {
        return Err(Error::GridMismatch(format!(
            "pulse grid {:?} differs from simulation grid {:?}",
            pulse.grid(),
            grid
        )));
    }
    let (g, kappa, gamma) = (p.g(), p.kappa(), p.gamma());
    let root = (2.0 * kappa).sqrt();
    let dt = grid.dt();
    let n = grid.len();
    let omega = pulse.omega();

    let mut traj = StateTrajectory {
        grid: *grid,
        c_e: Vec::with_capacity(n),
        c_x_im: Vec::with_capacity(n),
        c_g: Vec::with_capacity(n),
        phi_in: Vec::with_capacity(n),
        phi_out: Vec::with_capacity(n),
    };
    let mut y = [init.ce0, init.cx_im0, init.cg0];
    let mut t = grid.t(0);
    let mut phi = field.amplitude(t);
    let record = |traj: &mut StateTrajectory, y: [f64; 3], phi: f64| {
        traj.c_e.push(y[0]);
        traj.c_x_im.push(y[1]);
        traj.c_g.push(y[2]);
        traj.phi_in.push(phi);
        traj.phi_out.push(root * y[2] - phi);
    };
    record(&mut traj, y, phi);

    for k in 0..grid.n_steps() {
        let t_next = grid.t(k + 1);
        let t_mid = 0.5 * (t + t_next);
        let (w0, w1) = (omega[k], omega[k + 1]);
        let w_mid = pulse.interpolate(k, 0.5);
        let phi_mid = field.amplitude(t_mid);
        let phi_next = field.amplitude(t_next);

        let k1 = rhs(y, w0, phi, g, kappa, gamma, root);
        let k2 = rhs(axpy(y, 0.5 * dt, k1), w_mid, phi_mid, g, kappa, gamma, root);
        let k3 = rhs(axpy(y, 0.5 * dt, k2), w_mid, phi_mid, g, kappa, gamma, root);
        let k4 = rhs(axpy(y, dt, k3), w1, phi_next, g, kappa, gamma, root);
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t_next;
        phi = phi_next;
        record(&mut traj, y, phi);
    }
    Ok(traj)
}

/// Intracavity and reflected amplitudes for a cavity without an atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyCavityResponse {
    pub grid: TimeGrid,
    pub c_cav: Vec<f64>,
    pub phi_in: Vec<f64>,
    pub phi_out: Vec<f64>,
}

impl EmptyCavityResponse {
    pub fn reflection(&self) -> f64 {
        let sq: Vec<f64> = self.phi_out.iter().map(|f| f * f).collect();
        trapezoid(&sq, self.grid.dt())
    }

    pub fn report(&self) -> AbsorptionReport {
        let dt = self.grid.dt();
        let reflection = self.reflection();
        let incoming = trapezoid(&self.phi_in.iter().map(|f| f * f).collect::<Vec<_>>(), dt);
        let inside = self.c_cav.last().map_or(0.0, |c| c * c);
        AbsorptionReport {
            reflection,
            spont_loss: 0.0,
            storage_efficiency: 0.0,
            conservation_residual: (inside + reflection - incoming).abs(),
        }
    }

    /// Times where `φ_out` changes sign, located by linear interpolation
    /// between the bracketing samples. Exact zeros at the support edges are
    /// not counted.
    pub fn sign_changes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut last: Option<(usize, f64)> = None;
        for (k, &f) in self.phi_out.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            if let Some((j, prev)) = last {
                if prev.signum() != f.signum() {
                    let (tj, tk) = (self.grid.t(j), self.grid.t(k));
                    out.push(tj + (tk - tj) * prev / (prev - f));
                }
            }
            last = Some((k, f));
        }
        out
    }
}

/// `ċ_cav = −κc_cav + √(2κ)φ_in`, `φ_out = √(2κ)c_cav − φ_in`, from `c_cav = 0`.
pub fn empty_cavity_response<F: IncomingField + ?Sized>(
    field: &F,
    kappa: f64,
    grid: &TimeGrid,
) -> Result<EmptyCavityResponse> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be > 0, got {kappa}"
        )));
    }
    let root = (2.0 * kappa).sqrt();
    let dt = grid.dt();
    let n = grid.len();
    let f = |c: f64, phi: f64| -kappa * c + root * phi;

    let mut out = EmptyCavityResponse {
        grid: *grid,
        c_cav: Vec::with_capacity(n),
        phi_in: Vec::with_capacity(n),
        phi_out: Vec::with_capacity(n),
    };
    let mut c = 0.0;
    let mut t = grid.t(0);
    let mut phi = field.amplitude(t);
    out.c_cav.push(c);
    out.phi_in.push(phi);
    out.phi_out.push(root * c - phi);
    for k in 0..grid.n_steps() {
        let t_next = grid.t(k + 1);
        let phi_mid = field.amplitude(0.5 * (t + t_next));
        let phi_next = field.amplitude(t_next);
        let k1 = f(c, phi);
        let k2 = f(c + 0.5 * dt * k1, phi_mid);
        let k3 = f(c + 0.5 * dt * k2, phi_mid);
        let k4 = f(c + dt * k3, phi_next);
        c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_next;
        phi = phi_next;
        out.c_cav.push(c);
        out.phi_in.push(phi);
        out.phi_out.push(root * c - phi);
    }
    Ok(out)
}

/// Ring-down span, in units of `1/κ`, appended after the photon support so
/// that an empty cavity has released all stored light (`e^(−2κt)` < 1e-13).
pub const RINGDOWN_DECAY_TIMES: f64 = 15.0;

/// `support` extended past its end by the cavity ring-down time, keeping `dt`.
pub fn ringdown_grid(support: &TimeGrid, kappa: f64) -> Result<TimeGrid> {
    let dt = support.dt();
    let extra = (RINGDOWN_DECAY_TIMES / (kappa * dt)).ceil() as usize;
    let n = support.n_steps() + extra;
    TimeGrid::new(support.t_start(), support.t_start() + n as f64 * dt, n)
}

/// Trapezoidal `∫|φ_out|² dt`.
pub fn reflection_probability(traj: &StateTrajectory) -> f64 {
    let sq: Vec<f64> = traj.phi_out.iter().map(|f| f * f).collect();
    trapezoid(&sq, traj.grid.dt())
}

/// Splits the excitation that entered (initial norm plus the incoming photon)
/// into reflection, spontaneous loss and what remains in the system.
pub fn excitation_ledger<F: IncomingField + ?Sized>(
    traj: &StateTrajectory,
    field: &F,
    p: &CavityParams,
    init: InitialState,
) -> AbsorptionReport {
    let dt = traj.grid.dt();
    let reflection = reflection_probability(traj);
    let decay: Vec<f64> = traj
        .c_x_im
        .iter()
        .map(|c| 2.0 * p.gamma() * c * c)
        .collect();
    let spont_loss = trapezoid(&decay, dt);
    let incoming: Vec<f64> = traj
        .grid
        .times()
        .map(|t| field.amplitude(t).powi(2))
        .collect();
    let incoming = trapezoid(&incoming, dt);
    let end = traj.last();
    let storage_efficiency = traj.c_e[end].powi(2) - init.ce0.powi(2);
    let remaining = traj.norm_sqr(end);
    AbsorptionReport {
        reflection,
        spont_loss,
        storage_efficiency,
        conservation_residual: (remaining + reflection + spont_loss - init.norm_sqr() - incoming)
            .abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mhz_to_rad, DEFAULT_STEPS};
    use crate::shapes::make_sin2;
    use crate::synthesis::synthesize_control;

    const TAU: f64 = 3.14e-6;

    fn params() -> CavityParams {
        CavityParams::from_mhz(15.0, 3.0, 3.0, 0.005).unwrap()
    }

    #[test]
    fn grid_mismatch_rejected() {
        let w = make_sin2(TAU).unwrap();
        let pulse = ControlPulse::zero(w.grid(100).unwrap());
        let grid = w.grid(200).unwrap();
        assert!(matches!(
            simulate(&w, &pulse, &params(), InitialState::ground(), &grid),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn initial_state_validated() {
        assert!(InitialState::new(0.8, 0.0, 0.8).is_err());
        assert!(InitialState::new(0.6, 0.0, 0.8).is_ok());
    }

    #[test]
    fn empty_cavity_reflects_everything() {
        let w = make_sin2(TAU).unwrap();
        let kappa = mhz_to_rad(3.0);
        let support = w.grid(DEFAULT_STEPS).unwrap();
        let grid = ringdown_grid(&support, kappa).unwrap();
        assert!((grid.dt() / support.dt() - 1.0).abs() < 1e-12);
        let resp = empty_cavity_response(&w, kappa, &grid).unwrap();
        assert!((resp.reflection() - 1.0).abs() < 1e-6);
        // without the ring-down tail part of the photon is still inside
        let short = empty_cavity_response(&w, kappa, &support).unwrap();
        assert!(1.0 - short.reflection() > 1e-6);
        assert!(resp.report().conservation_residual < 1e-6);
    }

    #[test]
    fn empty_cavity_without_input_stays_empty() {
        let grid = TimeGrid::new(0.0, TAU, 1000).unwrap();
        let resp = empty_cavity_response(&NoInput, mhz_to_rad(3.0), &grid).unwrap();
        assert!(resp.c_cav.iter().all(|&c| c == 0.0));
        assert!(resp.phi_out.iter().all(|&c| c == 0.0));
        assert!(resp.sign_changes().is_empty());
    }

    #[test]
    fn matched_start_suppresses_reflection() {
        let w = make_sin2(TAU).unwrap();
        let p = params();
        let grid = w.grid(DEFAULT_STEPS).unwrap();
        let pulse = synthesize_control(&w, &p, &grid).unwrap();
        let init = InitialState::matched(&p);
        let traj = simulate(&w, &pulse, &p, init, &grid).unwrap();
        assert!(reflection_probability(&traj) < 1e-8);
        let report = excitation_ledger(&traj, &w, &p, init);
        assert!(report.conservation_residual < 1e-6);
    }

    #[test]
    fn free_decay_of_cavity_photon_is_accounted() {
        // Ω ≡ 0, φ_in ≡ 0, one photon in the cavity at t = 0
        let p = params();
        let grid = TimeGrid::new(0.0, 1e-6, 1 << 15).unwrap();
        let init = InitialState::new(0.0, 0.0, 1.0).unwrap();
        let traj = simulate(&NoInput, &ControlPulse::zero(grid), &p, init, &grid).unwrap();
        let report = excitation_ledger(&traj, &NoInput, &p, init);
        let end = traj.last();
        assert!(traj.c_g[end].powi(2) < 1e-6, "cavity should have emptied");
        let lost = 1.0 - traj.norm_sqr(end);
        assert!((report.reflection + report.spont_loss - lost).abs() < 1e-6);
        assert!(report.conservation_residual < 1e-6);
    }
}
