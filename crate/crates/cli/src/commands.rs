use std::path::PathBuf;

use photon_capture::experiments::rho0_surface;
use photon_capture::model::{rad_to_mhz, s_to_us};
use photon_capture::table::{fmt_f64, Cell, Table};
use photon_capture::{
    empty_cavity_response, excitation_ledger, ringdown_grid, simulate, sweep_cooperativity,
    sweep_rho0, synthesize_with, timebin_map, AbsorptionReport, ControlPulse, InitialState,
    PhotonWaveform, SynthesisOptions, TimeBinQubit,
};
use serde_json::{json, Map, Value};

use crate::config::{Axis, Initial, RunConfig};
use crate::io::{num, to_json_text, PulseFile};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Text produced by a command: the main artifact plus any side files.
#[derive(Debug, Default)]
pub struct Output {
    pub main: String,
    /// Simulation report; written next to the main output.
    pub report: Option<String>,
    pub files: Vec<(PathBuf, String)>,
}

fn provenance(cfg: &RunConfig, command: &str) -> Vec<(String, String)> {
    let [g, k, gm] = cfg.rates_mhz;
    let mut m = vec![
        ("photon-capture".to_string(), VERSION.to_string()),
        ("command".into(), command.into()),
        ("g_mhz".into(), fmt_f64(g)),
        ("kappa_mhz".into(), fmt_f64(k)),
        ("gamma_mhz".into(), fmt_f64(gm)),
        ("rho0".into(), fmt_f64(cfg.params.rho0())),
        ("cooperativity".into(), fmt_f64(cfg.params.cooperativity())),
        ("photon_kind".into(), cfg.shape.kind.to_string()),
    ];
    if let Some(tau) = cfg.shape.tau_photon {
        m.push(("tau_us".into(), fmt_f64(s_to_us(tau))));
    }
    if let Some(f) = &cfg.photon_file {
        m.push(("photon_file".into(), f.display().to_string()));
    }
    m.push(("n_steps".into(), cfg.n_steps.to_string()));
    m
}

fn with_meta(mut t: Table, meta: Vec<(String, String)>) -> Table {
    for (k, v) in meta {
        t.meta(k, v);
    }
    t
}

fn synthesis_options(cfg: &RunConfig) -> SynthesisOptions {
    SynthesisOptions {
        omega_max: cfg.omega_max,
        ..SynthesisOptions::default()
    }
}

fn waveform(cfg: &RunConfig) -> Result<PhotonWaveform, CliError> {
    Ok(cfg.shape.build()?)
}

pub fn derive(cfg: &RunConfig) -> Result<Output, CliError> {
    let w = waveform(cfg)?;
    let grid = w.grid(cfg.n_steps)?;
    let s = synthesize_with(&w, &cfg.params, &grid, &synthesis_options(cfg))?;
    let mut meta = provenance(cfg, "derive");
    meta.push((
        "peak_omega_mhz".into(),
        fmt_f64(rad_to_mhz(s.pulse.peak_abs())),
    ));
    let mut t = with_meta(Table::new(["t_us", "phi_in", "omega_mhz", "rho_ee"]), meta);
    for k in 0..grid.len() {
        t.push(vec![
            s_to_us(grid.t(k)).into(),
            s.chain.phi_in[k].into(),
            rad_to_mhz(s.pulse.omega()[k]).into(),
            s.chain.rho_ee[k].into(),
        ]);
    }
    Ok(Output {
        main: t.to_csv(),
        ..Output::default()
    })
}

const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t_us", "phi_in", "phi_out", "c_e", "c_x_im", "c_g", "rho_ee", "rho_gg", "rho_xx",
];

fn report_json(case: &str, r: &AbsorptionReport) -> String {
    to_json_text(&json!({
        "case": case,
        "reflection": num(r.reflection),
        "spont_loss": num(r.spont_loss),
        "storage_efficiency": num(r.storage_efficiency),
        "conservation_residual": num(r.conservation_residual),
    }))
}

pub fn simulate_cmd(
    cfg: &RunConfig,
    empty_cavity: bool,
    pulse_file: Option<&std::path::Path>,
) -> Result<Output, CliError> {
    let w = waveform(cfg)?;
    let support = w.grid(cfg.n_steps)?;
    let p = &cfg.params;

    if empty_cavity {
        if pulse_file.is_some() {
            return Err(CliError::Invalid(
                "--pulse has no effect with --empty-cavity".into(),
            ));
        }
        let grid = ringdown_grid(&support, p.kappa())?;
        let resp = empty_cavity_response(&w, p.kappa(), &grid)?;
        let mut meta = provenance(cfg, "simulate");
        meta.push(("case".into(), "empty_cavity".into()));
        meta.push(("t_stop_us".into(), fmt_f64(s_to_us(grid.t_stop()))));
        let mut t = with_meta(Table::new(TRAJECTORY_COLUMNS), meta);
        for k in 0..grid.len() {
            let c = resp.c_cav[k];
            t.push(vec![
                s_to_us(grid.t(k)).into(),
                resp.phi_in[k].into(),
                resp.phi_out[k].into(),
                0.0.into(),
                0.0.into(),
                c.into(),
                0.0.into(),
                (c * c).into(),
                0.0.into(),
            ]);
        }
        return Ok(Output {
            main: t.to_csv(),
            report: Some(report_json("empty_cavity", &resp.report())),
            files: Vec::new(),
        });
    }

    let (pulse, source): (ControlPulse, String) = match pulse_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Invalid(format!("cannot read pulse file {}: {e}", path.display()))
            })?;
            (
                PulseFile::parse(&text)?.into_pulse(&support)?,
                path.display().to_string(),
            )
        }
        None => (
            synthesize_with(&w, p, &support, &synthesis_options(cfg))?.pulse,
            "derived".into(),
        ),
    };
    let (init, case) = match cfg.initial {
        Initial::Matched => (InitialState::matched(p), "matched"),
        Initial::Ground => (InitialState::ground(), "ground"),
    };
    let traj = simulate(&w, &pulse, p, init, &support)?;
    let report = excitation_ledger(&traj, &w, p, init);

    let mut meta = provenance(cfg, "simulate");
    meta.push(("case".into(), case.into()));
    meta.push(("pulse".into(), source));
    let mut t = with_meta(Table::new(TRAJECTORY_COLUMNS), meta);
    let (ee, gg, xx) = (traj.rho_ee(), traj.rho_gg(), traj.rho_xx());
    for k in 0..support.len() {
        t.push(vec![
            s_to_us(support.t(k)).into(),
            traj.phi_in[k].into(),
            traj.phi_out[k].into(),
            traj.c_e[k].into(),
            traj.c_x_im[k].into(),
            traj.c_g[k].into(),
            ee[k].into(),
            gg[k].into(),
            xx[k].into(),
        ]);
    }
    Ok(Output {
        main: t.to_csv(),
        report: Some(report_json(case, &report)),
        files: Vec::new(),
    })
}

type PointMetrics = Result<[(&'static str, f64); 4], &'static str>;

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let sc = &cfg.sweep;
    let axis = sc
        .axis
        .ok_or_else(|| CliError::Invalid("[sweep] axis is required".into()))?;
    if sc.values.is_empty() {
        return Err(CliError::Invalid(format!(
            "[sweep] empty axis: no values given for {axis}"
        )));
    }
    if sc.surface_out.is_some() && axis != Axis::Rho0 {
        return Err(CliError::Invalid(
            "[sweep] surface_out is only produced for axis = \"rho0\"".into(),
        ));
    }
    let w = waveform(cfg)?;
    let p = &cfg.params;

    // every metric of a feasible point, or the error that stopped it
    let mut points: Vec<(f64, PointMetrics)> = Vec::new();
    let mut files = Vec::new();
    match axis {
        Axis::Rho0 => {
            let pts = sweep_rho0(&w, p, cfg.n_steps, &sc.values)?;
            if let Some(path) = &sc.surface_out {
                let mut meta = provenance(cfg, "sweep");
                meta.push(("surface".into(), "omega(t, rho0)".into()));
                files.push((path.clone(), with_meta(rho0_surface(&pts), meta).to_csv()));
            }
            for pt in pts {
                let metrics = pt
                    .outcome
                    .map(|row| {
                        [
                            ("peak_omega_mhz", rad_to_mhz(row.peak_omega)),
                            ("reflection", row.reflection),
                            ("storage_efficiency", row.storage_efficiency),
                            ("conservation_residual", row.conservation_residual),
                        ]
                    })
                    .map_err(|e| e.name());
                points.push((pt.rho0, metrics));
            }
        }
        Axis::Cooperativity => {
            let pts =
                sweep_cooperativity(&w, p.kappa(), p.gamma(), p.rho0(), cfg.n_steps, &sc.values)?;
            for pt in pts {
                let metrics = pt
                    .outcome
                    .map(|row| {
                        [
                            ("efficiency", row.efficiency),
                            ("mismatch", row.mismatch),
                            ("spont_loss", row.spont_loss),
                            ("conservation_residual", row.conservation_residual),
                        ]
                    })
                    .map_err(|e| e.name());
                points.push((pt.cooperativity, metrics));
            }
        }
    }

    let mut meta = provenance(cfg, "sweep");
    meta.push(("axis".into(), axis.to_string()));
    let mut t = with_meta(
        Table::new([
            "axis",
            "sweep_value",
            "feasible",
            "metric",
            "value",
            "error",
        ]),
        meta,
    );
    for (x, outcome) in &points {
        for metric in &sc.metrics {
            let (feasible, value, error) = match outcome {
                Ok(all) => {
                    let v = all.iter().find(|(name, _)| name == metric).map(|m| m.1);
                    (true, v.map_or(Cell::Empty, Cell::Num), Cell::Empty)
                }
                Err(name) => (false, Cell::Empty, Cell::from(*name)),
            };
            t.push(vec![
                axis.to_string().into(),
                (*x).into(),
                feasible.into(),
                metric.as_str().into(),
                value,
                error,
            ]);
        }
    }
    Ok(Output {
        main: t.to_csv(),
        report: None,
        files,
    })
}

fn pair(z: num_complex::Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn timebin(cfg: &RunConfig) -> Result<Output, CliError> {
    let (alpha, beta) = cfg.timebin.amplitudes()?;
    let w = waveform(cfg)?;
    let q = TimeBinQubit::same_shape(w, cfg.timebin.gap, alpha, beta)?;
    let r = timebin_map(&q, &cfg.params, cfg.n_steps)?;

    let mut meta = Map::new();
    for (k, v) in provenance(cfg, "timebin") {
        meta.insert(k, Value::String(v));
    }
    let bins: Vec<Value> = [&r.bin1, &r.bin2]
        .iter()
        .map(|b| {
            json!({
                "start_us": num(s_to_us(b.start)),
                "amplitude": pair(b.amplitude),
                "reflection": num(b.reflection),
                "spont_loss": num(b.spont_loss),
            })
        })
        .collect();
    let rho = r
        .density_matrix
        .iter()
        .map(|row| Value::Array(row.iter().map(|&z| pair(z)).collect()))
        .collect::<Vec<_>>();
    let doc = json!({
        "meta": meta,
        "alpha": pair(alpha),
        "beta": pair(beta),
        "gap_us": num(s_to_us(cfg.timebin.gap)),
        "pop_minus": num(r.pop_minus),
        "pop_plus": num(r.pop_plus),
        "efficiency": num(r.efficiency),
        "fidelity": num(r.fidelity),
        "density_matrix": rho,
        "bins": bins,
    });
    Ok(Output {
        main: to_json_text(&doc),
        report: None,
        files: Vec::new(),
    })
}
