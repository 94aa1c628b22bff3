//! Photon waveforms φ_in(t): real running-wave amplitudes (s^-1/2) with finite
//! support `[0, τ]`, unit L² norm and a smooth start (`φ = φ' = 0` at `t = 0`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{us_to_s, TimeGrid};
use crate::spline::CubicSpline;

/// Minimum number of samples accepted for a tabulated waveform.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sin2,
    TwinPeak,
    Tabulated,
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin2" => Ok(Self::Sin2),
            "twin_peak" => Ok(Self::TwinPeak),
            "tabulated" => Ok(Self::Tabulated),
            other => Err(Error::InvalidWaveform(format!(
                "unknown shape kind {other:?} (expected sin2, twin_peak or tabulated)"
            ))),
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sin2 => "sin2",
            Self::TwinPeak => "twin_peak",
            Self::Tabulated => "tabulated",
        })
    }
}

/// Description of a waveform to build. Times in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub tau_photon: Option<f64>,
    pub samples: Vec<(f64, f64)>,
}

impl ShapeSpec {
    pub fn analytic(kind: ShapeKind, tau_photon: f64) -> Self {
        Self {
            kind,
            tau_photon: Some(tau_photon),
            samples: Vec::new(),
        }
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Self {
        Self {
            kind: ShapeKind::Tabulated,
            tau_photon: None,
            samples,
        }
    }

    pub fn build(&self) -> Result<PhotonWaveform> {
        match self.kind {
            ShapeKind::Sin2 => make_sin2(self.require_tau()?),
            ShapeKind::TwinPeak => make_twin_peak(self.require_tau()?),
            ShapeKind::Tabulated => from_samples(self),
        }
    }

    fn require_tau(&self) -> Result<f64> {
        self.tau_photon
            .ok_or_else(|| Error::InvalidWaveform(format!("{} shape needs tau_photon", self.kind)))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    /// `sin²(πt/τ)`
    Sin2 {
        tau: f64,
    },
    /// `sin²(2πt/τ)·cos(π/2·(1 − t/τ))`
    TwinPeak {
        tau: f64,
    },
    Spline(CubicSpline),
}

impl Profile {
    /// Unnormalized value, first and second derivative.
    fn eval(&self, t: f64) -> [f64; 3] {
        match self {
            Self::Sin2 { tau } => {
                let w = PI / tau;
                let (s2, c2) = (2.0 * w * t).sin_cos();
                [0.5 * (1.0 - c2), w * s2, 2.0 * w * w * c2]
            }
            Self::TwinPeak { tau } => {
                // cos(π/2·(1 − u)) = sin(πu/2)
                let a = 2.0 * PI / tau;
                let b = 0.5 * PI / tau;
                let s = (a * t).sin();
                let (q, c4) = (2.0 * a * t).sin_cos();
                let (e, ec) = (b * t).sin_cos();
                let v = s * s * e;
                let d1 = a * q * e + b * s * s * ec;
                let d2 = 2.0 * a * a * c4 * e + 2.0 * a * b * q * ec - b * b * s * s * e;
                [v, d1, d2]
            }
            Self::Spline(s) => s.eval(t),
        }
    }
}

/// A normalized single-photon waveform on `[0, τ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonWaveform {
    profile: Profile,
    scale: f64,
    kind: ShapeKind,
    t_stop: f64,
}

impl PhotonWaveform {
    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn t_start(&self) -> f64 {
        0.0
    }

    pub fn t_stop(&self) -> f64 {
        self.t_stop
    }

    pub fn duration(&self) -> f64 {
        self.t_stop
    }

    /// Normalization constant multiplying the unit-amplitude profile.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn grid(&self, n_steps: usize) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.t_stop, n_steps)
    }

    pub fn contains(&self, t: f64) -> bool {
        (0.0..=self.t_stop).contains(&t)
    }

    /// `[φ, φ', φ'']` at `t`; zero outside the support.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        if !self.contains(t) {
            return [0.0; 3];
        }
        let [v, d1, d2] = self.profile.eval(t);
        [self.scale * v, self.scale * d1, self.scale * d2]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    pub fn d1(&self, t: f64) -> f64 {
        self.eval(t)[1]
    }

    pub fn d2(&self, t: f64) -> f64 {
        self.eval(t)[2]
    }

    /// `[φ, φ', φ'']` at `t`, or an error if `t` is outside the support.
    pub fn eval_checked(&self, t: f64) -> Result<[f64; 3]> {
        if self.contains(t) {
            Ok(self.eval(t))
        } else {
            Err(Error::OutsideSupport {
                t,
                t_start: 0.0,
                t_stop: self.t_stop,
            })
        }
    }

    /// `∫|φ|² dt` by Gauss-Legendre quadrature; exact for tabulated waveforms.
    pub fn norm_sqr(&self) -> f64 {
        let panels: Vec<(f64, f64)> = match &self.profile {
            Profile::Spline(s) => s.knots().windows(2).map(|w| (w[0], w[1])).collect(),
            _ => {
                let n = 512;
                let h = self.t_stop / n as f64;
                (0..n).map(|i| (i as f64 * h, (i + 1) as f64 * h)).collect()
            }
        };
        panels
            .into_iter()
            .map(|(a, b)| gauss_legendre_5(|t| self.value(t).powi(2), a, b))
            .sum()
    }

    /// Rescale to unit L² norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidWaveform(format!(
                "cannot normalize waveform with squared norm {n}"
            )));
        }
        Ok(Self {
            scale: self.scale / n.sqrt(),
            ..self.clone()
        })
    }
}

fn gauss_legendre_5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWaveform(format!(
            "tau_photon must be finite and > 0, got {tau}"
        )))
    }
}

/// `A·sin²(πt/τ)` with `A = √(8/(3τ))`.
pub fn make_sin2(tau_photon: f64) -> Result<PhotonWaveform> {
    check_tau(tau_photon)?;
    Ok(PhotonWaveform {
        profile: Profile::Sin2 { tau: tau_photon },
        scale: (8.0 / (3.0 * tau_photon)).sqrt(),
        kind: ShapeKind::Sin2,
        t_stop: tau_photon,
    })
}

/// `B·sin²(2πt/τ)·cos(π/2·(1 − t/τ))`; the squared profile integrates to
/// `3τ/16`, so `B = √(16/(3τ))`.
pub fn make_twin_peak(tau_photon: f64) -> Result<PhotonWaveform> {
    check_tau(tau_photon)?;
    Ok(PhotonWaveform {
        profile: Profile::TwinPeak { tau: tau_photon },
        scale: (16.0 / (3.0 * tau_photon)).sqrt(),
        kind: ShapeKind::TwinPeak,
        t_stop: tau_photon,
    })
}

/// Interpolates `(t, amplitude)` samples (seconds, arbitrary units) with a
/// cubic spline whose slope is pinned to zero at the first sample, shifts the
/// support to start at `t = 0` and normalizes.
pub fn from_samples(spec: &ShapeSpec) -> Result<PhotonWaveform> {
    let samples = &spec.samples;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidWaveform(format!(
            "tabulated waveform needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|(t, a)| !t.is_finite() || !a.is_finite())
    {
        return Err(Error::InvalidWaveform("non-finite sample".into()));
    }
    if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidWaveform(format!(
            "sample times must be strictly increasing (rows {} and {})",
            i,
            i + 1
        )));
    }
    let peak = samples.iter().fold(0.0f64, |m, (_, a)| m.max(a.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidWaveform(
            "all samples are zero; cannot normalize".into(),
        ));
    }
    let first = samples[0].1;
    if first.abs() > 1e-12 * peak {
        return Err(Error::InvalidWaveform(format!(
            "first sample must be zero for a smooth start, got {first}"
        )));
    }

    let t0 = samples[0].0;
    let x: Vec<f64> = samples.iter().map(|(t, _)| t - t0).collect();
    let mut y: Vec<f64> = samples.iter().map(|(_, a)| a / peak).collect();
    y[0] = 0.0;
    let t_stop = *x.last().unwrap();
    let spline = CubicSpline::clamped_start(x, y, 0.0)?;
    PhotonWaveform {
        profile: Profile::Spline(spline),
        scale: 1.0,
        kind: ShapeKind::Tabulated,
        t_stop,
    }
    .normalized()
}

/// Parses two-column `time_us amplitude` text (whitespace or comma separated,
/// `#` comments). Returned times are in seconds.
pub fn parse_tabulated(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::InvalidWaveform(format!(
                "line {}: expected 2 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |col: usize| {
            fields[col].parse::<f64>().map_err(|_| {
                Error::InvalidWaveform(format!(
                    "line {}, column {}: cannot parse {:?} as a number",
                    lineno + 1,
                    col + 1,
                    fields[col]
                ))
            })
        };
        out.push((us_to_s(parse(0)?), parse(1)?));
    }
    Ok(out)
}
