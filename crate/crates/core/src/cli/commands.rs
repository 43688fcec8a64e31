use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::output::{Cell, DataTable};
use super::sweep::{beam_for_delta_n, optimal_limit, sweep_gain, PointStatus, SweepPoint};
use crate::analytics::cooling_limit;
use crate::constants::{BOLTZMANN, HBAR};
use crate::dynamics::{
    run_ensemble, run_ensemble_traces, EnsembleTraces, FeedbackConfig, Initial, MeasurementModel, Model,
};
use crate::rates::{characterize, to_millikelvin_per_second, Dof, TrapCharacterization};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Instability(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        let key = match &e {
            crate::Error::InvalidParameter { name, .. } => name.to_string(),
            _ => "particle".into(),
        };
        CliError::Config(ConfigError::new(key, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub tables: Vec<DataTable>,
    /// Human-readable summary for the terminal.
    pub text: String,
}

fn trap(cfg: &RunConfig) -> Result<TrapCharacterization, CliError> {
    Ok(characterize(&cfg.particle()?, &cfg.beam()?)?)
}

fn to_kelvin(energy: f64) -> f64 {
    energy / BOLTZMANN
}

/// Closed-form characterization of each particle, in display units.
pub fn cmd_table(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let beam = cfg.beam()?;
    let mut table = DataTable::new(
        "table",
        &[
            ("material", "-"),
            ("a", "nm"),
            ("b", "nm"),
            ("anisotropy", "1"),
            ("f_beta1", "kHz"),
            ("f_x", "kHz"),
            ("f_y", "kHz"),
            ("Edot_R", "mK/s"),
            ("Edot_T", "mK/s"),
            ("ratio_Edot", "1"),
            ("ratio_omega", "1"),
            ("ratio_ndot", "1"),
            ("ratio_delta_n", "1"),
        ],
    );
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<8} {:>5} {:>5} {:>7} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7} {:>7} {:>7} {:>7}",
        "material", "a", "b", "aniso", "fβ1 kHz", "fx kHz", "fy kHz", "ĖR mK/s", "ĖT mK/s", "ĖR/ĖT", "ωβ/ωx", "ṅR/ṅT", "ΔnR/ΔnT"
    );
    for p in cfg.table_entries()? {
        let c = characterize(&p, &beam)?;
        let khz = |w: f64| w / (2.0 * std::f64::consts::PI) / 1e3;
        let values = [
            p.short_axis() * 1e9,
            p.long_axis() * 1e9,
            c.polarizability.anisotropy(),
            khz(c.frequencies.beta1),
            khz(c.frequencies.x),
            khz(c.frequencies.y),
            to_millikelvin_per_second(c.heating_rotational),
            to_millikelvin_per_second(c.heating_translational),
            c.ratios.energy,
            c.ratios.frequency,
            c.ratios.occupation_rate,
            c.ratios.delta_n,
        ];
        let mut row = vec![Cell::Text(p.material().label.clone())];
        row.extend(values.iter().map(|&v| Cell::Num(v)));
        table.push(row);
        let _ = writeln!(
            text,
            "{:<8} {:>5.0} {:>5.0} {:>7.3} {:>9.1} {:>9.1} {:>9.1} {:>9.3e} {:>9.3e} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
            p.material().label,
            values[0],
            values[1],
            values[2],
            values[3],
            values[4],
            values[5],
            values[6],
            values[7],
            values[8],
            values[9],
            values[10],
            values[11]
        );
    }
    Ok(CommandOutput {
        tables: vec![table],
        text,
    })
}

fn series_tables<const D: usize>(
    prefix: &str,
    traces: &EnsembleTraces<D>,
    trap: &TrapCharacterization,
    t0: f64,
) -> Vec<DataTable> {
    let summary = traces.summary();
    summary
        .dofs
        .iter()
        .zip(Dof::ALL)
        .map(|(d, dof)| {
            let mut t = DataTable::new(
                format!("{prefix}_{}", d.label),
                &[
                    ("t", "s"),
                    ("energy", "K"),
                    ("energy_se", "K"),
                    ("occupation", "1"),
                    ("occupation_se", "1"),
                    ("shot_noise_reference", "K"),
                ],
            );
            for (k, &time) in summary.times.iter().enumerate() {
                let se = d.std_error.as_ref().map(|s| to_kelvin(s[k]));
                let occ_se = d.occupation_std_error.as_ref().map(|s| s[k]);
                t.push(vec![
                    time.into(),
                    to_kelvin(d.mean_energy[k]).into(),
                    se.into(),
                    d.mean_occupation[k].into(),
                    occ_se.into(),
                    (t0 + to_kelvin(trap.heating_rate(dof)) * time).into(),
                ]);
            }
            t
        })
        .collect()
}

/// Pure shot-noise heating of all five DOFs.
pub fn cmd_heat(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let trap = trap(cfg)?;
    let model = Model::full(&trap, &FeedbackConfig::off(cfg.size_scale()?), MeasurementModel::ideal())?;
    let t0 = cfg.temperature(1e-6)?;
    let duration = cfg.duration(10e-3)?;
    let integ = cfg.integrator_config(100, duration, 100)?;
    let traces = run_ensemble_traces(&model, &Initial::Thermal(t0), &integ, duration)?
        .map_err(|f| CliError::Instability(f.to_string()))?;
    let mut tables = series_tables("heat", &traces, &trap, t0);
    let mut slopes = DataTable::new(
        "heat_slopes",
        &[("dof", "-"), ("slope", "mK/s"), ("slope_se", "mK/s"), ("shot_noise", "mK/s")],
    );
    let mut text = format!(
        "heating: {} trajectories, {} s, T0 = {} K\n",
        traces.trajectories(),
        duration,
        t0
    );
    if traces.times.len() >= 2 {
        for dof in Dof::ALL {
            let s = traces.slope(dof.index(), 0, traces.times.len());
            let shot = to_millikelvin_per_second(trap.heating_rate(dof));
            slopes.push(vec![
                dof.label().into(),
                to_millikelvin_per_second(s.mean).into(),
                s.std_error.map(to_millikelvin_per_second).into(),
                shot.into(),
            ]);
            let _ = writeln!(
                text,
                "{:<6} slope {:>10.4} mK/s ± {:<10.4} shot noise {:>10.4} mK/s",
                dof.label(),
                to_millikelvin_per_second(s.mean),
                s.std_error.map_or(f64::NAN, to_millikelvin_per_second),
                shot
            );
        }
        tables.push(slopes);
    }
    Ok(CommandOutput { tables, text })
}

/// Parametric feedback cooling of all five DOFs.
pub fn cmd_cool(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let trap = trap(cfg)?;
    let feedback = cfg.feedback()?;
    let model = Model::full(&trap, &feedback, cfg.measurement()?)?;
    let t0 = cfg.temperature(0.1)?;
    let duration = cfg.duration(0.2)?;
    let integ = cfg.integrator_config(30, duration, 200)?;
    let traces = run_ensemble_traces(&model, &Initial::Thermal(t0), &integ, duration)?.map_err(|f| {
        CliError::Instability(format!(
            "{f} (eta = {:?} s/m², zeta = {:?} s/m², schedule = {:?})",
            feedback.eta,
            feedback.zeta,
            feedback.schedule.switches()
        ))
    })?;
    let tables = series_tables("cool", &traces, &trap, t0);
    let summary = traces.summary();
    let mut text = format!("cooling: {} trajectories, {} s, T0 = {} K\nfinal occupations:", traces.trajectories(), duration, t0);
    for d in &summary.dofs {
        let _ = write!(text, " {}={:.4}", d.label, d.mean_occupation.last().copied().unwrap_or(f64::NAN));
    }
    text.push('\n');
    Ok(CommandOutput { tables, text })
}

fn sweep_row(n: f64, delta_n: f64, p: &SweepPoint) -> Vec<Cell> {
    vec![
        n.into(),
        delta_n.into(),
        p.value.into(),
        p.occupation.into(),
        p.std_error.into(),
        p.converged.into(),
        p.status.label().into(),
        p.analytic_limit.into(),
    ]
}

const SWEEP_COLUMNS: [(&str, &str); 8] = [
    ("N", "1"),
    ("delta_n", "1"),
    ("eta", "s/m^2"),
    ("occupation", "1"),
    ("occupation_se", "1"),
    ("converged", "-"),
    ("status", "-"),
    ("analytic_limit", "1"),
];

/// Steady-state occupation against gain for each N, or, when `sweep.delta_n`
/// is set, the minimum over gain for each (N, Δn).
pub fn cmd_sweep(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let particle = cfg.particle()?;
    let beam = cfg.beam()?;
    let dof = cfg.sweep.dof;
    let r = cfg.size_scale()?;
    let settings = cfg.steady_state()?;
    let integ = cfg.integrator_config(20, 1.0, 1)?;
    if cfg.sweep.noise.is_empty() {
        return Err(ConfigError::new("sweep.N", "need at least one value").into());
    }
    if cfg.sweep.eta.is_empty() {
        return Err(ConfigError::new("sweep.eta", "need at least one value").into());
    }
    let mut all: Vec<SweepPoint> = Vec::new();
    let mut text = String::new();
    let mut tables = Vec::new();
    if cfg.sweep.delta_n.is_empty() {
        let trap = characterize(&particle, &beam)?;
        let mut table = DataTable::new("sweep", &SWEEP_COLUMNS);
        for &n in &cfg.sweep.noise {
            let mm = measurement(cfg, n)?;
            let points = sweep_gain(&trap, dof, &cfg.sweep.eta, r, mm, &integ, &settings)?;
            for p in &points {
                table.push(sweep_row(n, trap.delta_n(dof), p));
                let _ = writeln!(text, "N={n} eta={:e} n={:.4} ({})", p.value, p.occupation, p.status.label());
            }
            all.extend(points);
        }
        tables.push(table);
    } else {
        let mut limits = DataTable::new(
            "limit",
            &[
                ("N", "1"),
                ("delta_n", "1"),
                ("waist", "nm"),
                ("min_occupation", "1"),
                ("min_occupation_se", "1"),
                ("argmin_eta", "s/m^2"),
                ("interior", "-"),
            ],
        );
        let mut points_table = DataTable::new("limit_points", &SWEEP_COLUMNS);
        for &n in &cfg.sweep.noise {
            let mm = measurement(cfg, n)?;
            for &dn in &cfg.sweep.delta_n {
                let b = beam_for_delta_n(&particle, &beam, dof, dn).map_err(|e| ConfigError::new("sweep.delta_n", e))?;
                let trap = characterize(&particle, &b)?;
                let scan = optimal_limit(&trap, dof, &cfg.sweep.eta, r, mm, &integ, &settings, cfg.sweep.max_extensions)?;
                for p in &scan.points {
                    points_table.push(sweep_row(n, dn, p));
                }
                let best = scan.best;
                limits.push(vec![
                    n.into(),
                    dn.into(),
                    (trap.focus.waist * 1e9).into(),
                    best.map(|p| p.occupation).into(),
                    best.and_then(|p| p.std_error).into(),
                    best.map(|p| p.value).into(),
                    scan.interior.into(),
                ]);
                let _ = writeln!(
                    text,
                    "N={n} delta_n={dn} min n={:.4} at eta={:e}{}",
                    best.map_or(f64::NAN, |p| p.occupation),
                    best.map_or(f64::NAN, |p| p.value),
                    if scan.interior { "" } else { " (edge of grid)" }
                );
                all.extend(scan.points);
            }
        }
        tables.push(limits);
        tables.push(points_table);
    }
    if all.iter().all(|p| p.status == PointStatus::Unstable) {
        return Err(CliError::Instability("every sweep point was unstable".into()));
    }
    if !all.iter().any(|p| p.converged) {
        return Err(CliError::NonConvergence("no sweep point reached a steady state".into()));
    }
    Ok(CommandOutput { tables, text })
}

fn measurement(cfg: &RunConfig, n: f64) -> Result<MeasurementModel, CliError> {
    MeasurementModel::new(n, cfg.measurement.velocity).map_err(|e| ConfigError::new("sweep.N", e).into())
}

/// Closed-form cooling curve for one DOF, optionally overlaid with a
/// simulation of that DOF alone.
pub fn cmd_analytic(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let trap = trap(cfg)?;
    let dof = cfg.analytic.dof;
    let feedback = cfg.feedback()?;
    let gain = feedback.gain(dof);
    let solution = cooling_limit(trap.heating_rate(dof), gain, trap.inertia_of(dof), trap.frequency(dof))
        .map_err(|e| ConfigError::new(if dof.is_rotational() { "feedback.zeta" } else { "feedback.eta" }, e))?;
    let t0 = cfg.temperature(0.1)?;
    let e_i = BOLTZMANN * t0;
    let duration = cfg.analytic.duration_s.unwrap_or(10.0 / solution.relaxation_rate);
    if !(duration.is_finite() && duration > 0.0) {
        return Err(ConfigError::new("analytic.duration_s", "must be > 0").into());
    }
    if cfg.analytic.points < 2 {
        return Err(ConfigError::new("analytic.points", "must be at least 2").into());
    }
    let dt = duration / (cfg.analytic.points - 1) as f64;
    let times: Vec<f64> = (0..cfg.analytic.points).map(|k| k as f64 * dt).collect();
    let mut table = DataTable::new(
        format!("analytic_{dof}"),
        &[
            ("t", "s"),
            ("energy", "J"),
            ("temperature", "K"),
            ("occupation", "1"),
            ("limit_energy", "J"),
            ("limit_occupation", "1"),
        ],
    );
    for &t in &times {
        let e = solution.energy_at(e_i, t);
        table.push(vec![
            t.into(),
            e.into(),
            to_kelvin(e).into(),
            (e / (HBAR * solution.omega)).into(),
            solution.energy_limit.into(),
            solution.occupation_limit.into(),
        ]);
    }
    let mut text = format!(
        "{dof}: E_limit = {:e} J, n_limit = {:.4}, relaxation rate = {:e} 1/s\n",
        solution.energy_limit, solution.occupation_limit, solution.relaxation_rate
    );
    let mut tables = vec![table];
    if cfg.analytic.overlay {
        let model = Model::single(&trap, dof, gain, cfg.measurement()?)?;
        let mut integ = cfg.integrator_config(30, duration, 1)?;
        integ.record_interval = dt;
        let series = run_ensemble(&model, &Initial::Thermal(t0), &integ, duration)?
            .map_err(|f| CliError::Instability(format!("{f} (gain = {gain:e})")))?;
        let d = &series.dofs[0];
        let mut overlay = DataTable::new(
            format!("analytic_overlay_{dof}"),
            &[
                ("t", "s"),
                ("analytic_energy", "J"),
                ("simulated_energy", "J"),
                ("simulated_energy_se", "J"),
                ("residual", "J"),
                ("residual_in_se", "1"),
            ],
        );
        for (k, &t) in series.times.iter().enumerate() {
            let a = solution.energy_at(e_i, t);
            let se = d.std_error.as_ref().map(|s| s[k]);
            let residual = d.mean_energy[k] - a;
            overlay.push(vec![
                t.into(),
                a.into(),
                d.mean_energy[k].into(),
                se.into(),
                residual.into(),
                se.map(|s| residual / s).into(),
            ]);
        }
        let _ = writeln!(text, "overlay: {} trajectories", series.trajectories);
        tables.push(overlay);
    }
    Ok(CommandOutput { tables, text })
}
