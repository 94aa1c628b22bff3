//! Run configuration: TOML sections in MHz and μs, converted to SI once here.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use photon_capture::model::{mhz_to_rad, us_to_s};
use photon_capture::shapes::parse_tabulated;
use photon_capture::{CavityParams, ShapeKind, ShapeSpec, DEFAULT_RHO0, DEFAULT_STEPS};
use serde::Deserialize;

use crate::CliError;

/// Amplitudes whose squared norms sum to within this of 1 are renormalized,
/// so four-digit values such as 0.7071 are accepted.
pub const AMPLITUDE_NORM_TOLERANCE: f64 = 1e-3;

#[allow(clippy::approx_constant)]
const DEFAULT_TAU_US: f64 = 3.14;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    cavity: RawCavity,
    photon: RawPhoton,
    grid: RawGrid,
    derive: RawDerive,
    simulate: RawSimulate,
    sweep: RawSweep,
    timebin: RawTimebin,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCavity {
    g_mhz: f64,
    kappa_mhz: f64,
    gamma_mhz: f64,
    rho0: f64,
}

impl Default for RawCavity {
    fn default() -> Self {
        Self {
            g_mhz: 15.0,
            kappa_mhz: 3.0,
            gamma_mhz: 3.0,
            rho0: DEFAULT_RHO0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPhoton {
    kind: String,
    tau_us: Option<f64>,
    file: Option<PathBuf>,
}

impl Default for RawPhoton {
    fn default() -> Self {
        Self {
            kind: "sin2".into(),
            tau_us: None,
            file: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGrid {
    n_steps: usize,
}

impl Default for RawGrid {
    fn default() -> Self {
        Self {
            n_steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDerive {
    omega_max_mhz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSimulate {
    initial: String,
}

impl Default for RawSimulate {
    fn default() -> Self {
        Self {
            initial: "matched".into(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    axis: Option<String>,
    values: Vec<f64>,
    metrics: Option<Vec<String>>,
    surface_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawAmplitude {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTimebin {
    alpha: Option<RawAmplitude>,
    beta: Option<RawAmplitude>,
    gap_us: f64,
}

impl Default for RawTimebin {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: None,
            gap_us: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    Matched,
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rho0,
    Cooperativity,
}

impl Axis {
    pub fn metrics(self) -> &'static [&'static str] {
        match self {
            Self::Rho0 => &[
                "peak_omega_mhz",
                "reflection",
                "storage_efficiency",
                "conservation_residual",
            ],
            Self::Cooperativity => &[
                "efficiency",
                "mismatch",
                "spont_loss",
                "conservation_residual",
            ],
        }
    }

    fn default_metric(self) -> &'static str {
        self.metrics()[0]
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "rho0" => Ok(Self::Rho0),
            "cooperativity" => Ok(Self::Cooperativity),
            other => Err(CliError::Invalid(format!(
                "[sweep] axis must be \"rho0\" or \"cooperativity\", got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rho0 => "rho0",
            Self::Cooperativity => "cooperativity",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub axis: Option<Axis>,
    pub values: Vec<f64>,
    pub metrics: Vec<String>,
    pub surface_out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TimebinConfig {
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub gap: f64,
}

impl TimebinConfig {
    /// Both amplitudes, renormalized when within [`AMPLITUDE_NORM_TOLERANCE`].
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64), CliError> {
        let (Some(a), Some(b)) = (self.alpha, self.beta) else {
            return Err(CliError::Invalid(
                "[timebin] needs both alpha and beta".into(),
            ));
        };
        let norm = a.norm_sqr() + b.norm_sqr();
        if norm.is_nan() || (norm - 1.0).abs() > AMPLITUDE_NORM_TOLERANCE {
            return Err(photon_capture::Error::Normalization(norm).into());
        }
        let s = norm.sqrt();
        Ok((a / s, b / s))
    }
}

/// Validated configuration in SI units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CavityParams,
    /// `(g, κ, γ)` as written, in MHz.
    pub rates_mhz: [f64; 3],
    pub shape: ShapeSpec,
    /// Tabulated waveform file as written in the config.
    pub photon_file: Option<PathBuf>,
    pub n_steps: usize,
    pub omega_max: Option<f64>,
    pub initial: Initial,
    pub sweep: SweepConfig,
    pub timebin: TimebinConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Self::parse("", Path::new(".")),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Invalid(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text, p.parent().unwrap_or(Path::new(".")))
            }
        }
    }

    /// Relative paths inside the config resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| CliError::Invalid(format!("config: {}", e.message())))?;

        let c = &raw.cavity;
        let params = CavityParams::from_mhz(c.g_mhz, c.kappa_mhz, c.gamma_mhz, c.rho0)?;

        let kind: ShapeKind = raw
            .photon
            .kind
            .parse()
            .map_err(|e: photon_capture::Error| CliError::Invalid(format!("[photon] {e}")))?;
        let (shape, photon_file) = match kind {
            ShapeKind::Tabulated => {
                let Some(file) = raw.photon.file.clone() else {
                    return Err(CliError::Invalid(
                        "[photon] kind = \"tabulated\" needs file".into(),
                    ));
                };
                let full = base.join(&file);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    CliError::Invalid(format!("cannot read photon file {}: {e}", full.display()))
                })?;
                (ShapeSpec::tabulated(parse_tabulated(&text)?), Some(file))
            }
            analytic => {
                if raw.photon.file.is_some() {
                    return Err(CliError::Invalid(format!(
                        "[photon] file is only used with kind = \"tabulated\", not {analytic}"
                    )));
                }
                let tau = raw.photon.tau_us.unwrap_or(DEFAULT_TAU_US);
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(CliError::Invalid(format!(
                        "[photon] tau_us must be positive, got {tau}"
                    )));
                }
                (ShapeSpec::analytic(analytic, us_to_s(tau)), None)
            }
        };

        if raw.grid.n_steps < 2 {
            return Err(CliError::Invalid(format!(
                "[grid] n_steps must be >= 2, got {}",
                raw.grid.n_steps
            )));
        }

        let omega_max = match raw.derive.omega_max_mhz {
            Some(v) if !(v.is_finite() && v > 0.0) => {
                return Err(CliError::Invalid(format!(
                    "[derive] omega_max_mhz must be positive, got {v}"
                )))
            }
            v => v.map(mhz_to_rad),
        };

        let initial = match raw.simulate.initial.as_str() {
            "matched" => Initial::Matched,
            "ground" => Initial::Ground,
            other => {
                return Err(CliError::Invalid(format!(
                    "[simulate] initial must be \"matched\" or \"ground\", got {other:?}"
                )))
            }
        };

        let axis: Option<Axis> = raw.sweep.axis.as_deref().map(str::parse).transpose()?;
        if let Some(v) = raw.sweep.values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Invalid(format!("[sweep] non-finite value {v}")));
        }
        let metrics = match (axis, raw.sweep.metrics) {
            (Some(axis), Some(list)) => {
                if list.is_empty() {
                    return Err(CliError::Invalid("[sweep] metrics is empty".into()));
                }
                if let Some(bad) = list.iter().find(|m| !axis.metrics().contains(&m.as_str())) {
                    return Err(CliError::Invalid(format!(
                        "[sweep] unknown metric {bad:?} for axis {axis}; choose from {}",
                        axis.metrics().join(", ")
                    )));
                }
                list
            }
            (Some(axis), None) => vec![axis.default_metric().to_string()],
            (None, _) => Vec::new(),
        };
        let sweep = SweepConfig {
            axis,
            values: raw.sweep.values,
            metrics,
            surface_out: raw.sweep.surface_out.map(|p| base.join(p)),
        };

        let amp = |a: Option<RawAmplitude>, name: &str| -> Result<Option<Complex64>, CliError> {
            let z = match a {
                None => return Ok(None),
                Some(RawAmplitude::Real(re)) => Complex64::new(re, 0.0),
                Some(RawAmplitude::Complex([re, im])) => Complex64::new(re, im),
            };
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(CliError::Invalid(format!("[timebin] {name} is not finite")));
            }
            Ok(Some(z))
        };
        let timebin = TimebinConfig {
            alpha: amp(raw.timebin.alpha, "alpha")?,
            beta: amp(raw.timebin.beta, "beta")?,
            gap: us_to_s(raw.timebin.gap_us),
        };

        Ok(Self {
            params,
            rates_mhz: [c.g_mhz, c.kappa_mhz, c.gamma_mhz],
            shape,
            photon_file,
            n_steps: raw.grid.n_steps,
            omega_max,
            initial,
            sweep,
            timebin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::parse("", Path::new(".")).unwrap();
        assert_eq!(c.rates_mhz, [15.0, 3.0, 3.0]);
        assert_eq!(c.n_steps, DEFAULT_STEPS);
        assert!((c.params.cooperativity() - 12.5).abs() < 1e-12);
        assert_eq!(c.shape.tau_photon, Some(3.14e-6));
        assert_eq!(c.initial, Initial::Matched);
    }

    #[test]
    fn amplitudes_accept_reals_and_pairs() {
        let c =
            RunConfig::parse("[timebin]\nalpha = 0.6\nbeta = [0, 0.8]\n", Path::new(".")).unwrap();
        let (a, b) = c.timebin.amplitudes().unwrap();
        assert_eq!(a, Complex64::new(0.6, 0.0));
        assert!((b - Complex64::new(0.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn rounded_amplitudes_renormalize() {
        let c = RunConfig::parse(
            "[timebin]\nalpha = 0.7071\nbeta = -0.7071\n",
            Path::new("."),
        )
        .unwrap();
        let (a, b) = c.timebin.amplitudes().unwrap();
        assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-15);
        let c = RunConfig::parse("[timebin]\nalpha = 1\nbeta = 1\n", Path::new(".")).unwrap();
        assert!(matches!(
            c.timebin.amplitudes(),
            Err(CliError::Domain(photon_capture::Error::Normalization(_)))
        ));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            "[cavity]\ng = 15\n",
            "[grid]\nn_steps = 1\n",
            "[simulate]\ninitial = \"excited\"\n",
            "[sweep]\naxis = \"g\"\n",
            "[sweep]\naxis = \"rho0\"\nmetrics = [\"efficiency\"]\n",
            "[photon]\nkind = \"gauss\"\n",
            "[photon]\nkind = \"tabulated\"\n",
            "[derive]\nomega_max_mhz = -1\n",
        ] {
            assert!(
                matches!(
                    RunConfig::parse(text, Path::new(".")),
                    Err(CliError::Invalid(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn sweep_defaults_to_headline_metric() {
        let c = RunConfig::parse(
            "[sweep]\naxis = \"cooperativity\"\nvalues = [1, 2]\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(c.sweep.metrics, vec!["efficiency".to_string()]);
        assert_eq!(c.sweep.values, vec![1.0, 2.0]);
    }
}
