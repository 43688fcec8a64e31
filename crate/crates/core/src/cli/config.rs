//! Flat `key = value` run configuration with dotted section keys.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated; schedules are `time_s:multiplier` pairs. Unknown and repeated
//! keys are rejected.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::dynamics::{
    FeedbackConfig, Initial, IntegratorConfig, MeasurementModel, Schedule, SteadyStateConfig, VelocityEstimate,
};
use crate::material::{Ellipsoid, Material};
use crate::optics::Beam;
use crate::rates::Dof;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub key: String,
    pub message: String,
    pub line: Option<usize>,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            key: key.into(),
            message: message.to_string(),
            line: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// CSV files with a JSON mirror of each.
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSection {
    /// Preset label, or any label when both overrides are given.
    pub material: String,
    pub permittivity: Option<f64>,
    pub density: Option<f64>,
    pub a_nm: f64,
    pub b_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSection {
    pub wavelength_nm: f64,
    pub power_mw: f64,
    pub na: f64,
    /// Overrides `na` with λ/(π·w0) when set.
    pub waist_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackSection {
    pub eta: [f64; 3],
    pub zeta: [f64; 2],
    /// Defaults to √(a² + b²).
    pub r_nm: Option<f64>,
    pub schedule: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSection {
    pub n: f64,
    pub velocity: VelocityEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSection {
    pub steps_per_period: u32,
    pub master_seed: u64,
    pub trajectories: Option<usize>,
    pub duration_s: Option<f64>,
    pub record_interval_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub dof: Dof,
    /// Feedback coefficients to scan (η, or ζ for a libration) [s/m²].
    pub eta: Vec<f64>,
    pub noise: Vec<f64>,
    /// Non-empty turns the sweep into an optimal-limit scan over Δn.
    pub delta_n: Vec<f64>,
    pub window_relaxation_times: f64,
    pub tolerance: f64,
    pub max_windows: usize,
    /// Extra factor-of-two grid points allowed past an edge minimum.
    pub max_extensions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSection {
    pub dof: Dof,
    pub points: usize,
    pub duration_s: Option<f64>,
    /// Also simulate the DOF alone and report residuals.
    pub overlay: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub particle: ParticleSection,
    pub beam: BeamSection,
    pub feedback: FeedbackSection,
    pub measurement: MeasurementSection,
    pub integrator: IntegratorSection,
    pub initial_temperature_k: Option<f64>,
    pub sweep: SweepSection,
    /// `material:a_nm:b_nm` entries for the table command.
    pub table_particles: Vec<(String, f64, f64)>,
    pub analytic: AnalyticSection,
    pub output_dir: String,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            particle: ParticleSection {
                material: "diamond".into(),
                permittivity: None,
                density: None,
                a_nm: 48.0,
                b_nm: 53.0,
            },
            beam: BeamSection {
                wavelength_nm: 1064.0,
                power_mw: 70.0,
                na: 0.9,
                waist_nm: None,
            },
            feedback: FeedbackSection {
                eta: [1.1e11; 3],
                zeta: [1e11; 2],
                r_nm: None,
                schedule: vec![(0.1, 10.0)],
            },
            measurement: MeasurementSection {
                n: 0.0,
                velocity: VelocityEstimate::OmegaScaled,
            },
            integrator: IntegratorSection {
                steps_per_period: 100,
                master_seed: 1,
                trajectories: None,
                duration_s: None,
                record_interval_s: None,
            },
            initial_temperature_k: None,
            sweep: SweepSection {
                dof: Dof::X,
                eta: vec![1e11, 3e11, 1e12, 3e12, 1e13, 3e13],
                noise: vec![0.0, 2.0],
                delta_n: Vec::new(),
                window_relaxation_times: 50.0,
                tolerance: 0.01,
                max_windows: 30,
                max_extensions: 6,
            },
            table_particles: Vec::new(),
            analytic: AnalyticSection {
                dof: Dof::X,
                points: 201,
                duration_s: None,
                overlay: false,
            },
            output_dir: "out".into(),
            format: Format::Csv,
        }
    }
}

/// Shortest text that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::new(key, format!("expected a finite number, got `{v}`")))
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse::<T>()
        .map_err(|_| ConfigError::new(key, format!("expected a non-negative integer, got `{v}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

fn parse_fixed<const N: usize>(key: &str, v: &str) -> Result<[f64; N], ConfigError> {
    let values = parse_list(key, v)?;
    match values.len() {
        1 => Ok([values[0]; N]),
        n if n == N => Ok(values.try_into().unwrap()),
        n => Err(ConfigError::new(key, format!("expected 1 or {N} values, got {n}"))),
    }
}

fn parse_dof(key: &str, v: &str) -> Result<Dof, ConfigError> {
    Dof::parse(v).ok_or_else(|| ConfigError::new(key, format!("unknown degree of freedom `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::new(key, format!("expected true or false, got `{v}`"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let with_line = |mut e: ConfigError| {
                e.line = Some(n + 1);
                e
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| with_line(ConfigError::new(line, "expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(with_line(ConfigError::new(key, "repeated key")));
            }
            config.set(key, value).map_err(with_line)?;
        }
        Ok(config)
    }

    /// Assigns one key. Values are checked for syntax only; physical
    /// validity is checked when the model objects are built.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let opt = |v: &str| -> Result<Option<f64>, ConfigError> {
            if v.is_empty() {
                Ok(None)
            } else {
                parse_f64(key, v).map(Some)
            }
        };
        match key {
            "particle.material" => self.particle.material = v.to_string(),
            "particle.permittivity" => self.particle.permittivity = opt(v)?,
            "particle.density" => self.particle.density = opt(v)?,
            "particle.a_nm" => self.particle.a_nm = parse_f64(key, v)?,
            "particle.b_nm" => self.particle.b_nm = parse_f64(key, v)?,
            "beam.wavelength_nm" => self.beam.wavelength_nm = parse_f64(key, v)?,
            "beam.power_mW" => self.beam.power_mw = parse_f64(key, v)?,
            "beam.na" => self.beam.na = parse_f64(key, v)?,
            "beam.waist_nm" => self.beam.waist_nm = opt(v)?,
            "feedback.eta" => self.feedback.eta = parse_fixed(key, v)?,
            "feedback.zeta" => self.feedback.zeta = parse_fixed(key, v)?,
            "feedback.r_nm" => self.feedback.r_nm = opt(v)?,
            "feedback.schedule" => {
                self.feedback.schedule = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|pair| {
                            let (t, m) = pair.trim().split_once(':').ok_or_else(|| {
                                ConfigError::new(key, format!("expected time_s:multiplier, got `{}`", pair.trim()))
                            })?;
                            Ok((parse_f64(key, t.trim())?, parse_f64(key, m.trim())?))
                        })
                        .collect::<Result<_, ConfigError>>()?
                }
            }
            "measurement.N" => self.measurement.n = parse_f64(key, v)?,
            "measurement.velocity" => {
                self.measurement.velocity = VelocityEstimate::parse(v).ok_or_else(|| {
                    ConfigError::new(key, format!("expected exact, omega or difference, got `{v}`"))
                })?
            }
            "integrator.steps_per_period" => self.integrator.steps_per_period = parse_int(key, v)?,
            "integrator.master_seed" => self.integrator.master_seed = parse_int(key, v)?,
            "integrator.trajectories" => {
                self.integrator.trajectories = if v.is_empty() { None } else { Some(parse_int(key, v)?) }
            }
            "integrator.duration_s" => self.integrator.duration_s = opt(v)?,
            "integrator.record_interval_s" => self.integrator.record_interval_s = opt(v)?,
            "initial.temperature_K" => self.initial_temperature_k = opt(v)?,
            "sweep.dof" => self.sweep.dof = parse_dof(key, v)?,
            "sweep.eta" => self.sweep.eta = parse_list(key, v)?,
            "sweep.N" => self.sweep.noise = parse_list(key, v)?,
            "sweep.delta_n" => self.sweep.delta_n = parse_list(key, v)?,
            "sweep.window_relaxation_times" => self.sweep.window_relaxation_times = parse_f64(key, v)?,
            "sweep.tolerance" => self.sweep.tolerance = parse_f64(key, v)?,
            "sweep.max_windows" => self.sweep.max_windows = parse_int(key, v)?,
            "sweep.max_extensions" => self.sweep.max_extensions = parse_int(key, v)?,
            "table.particles" => {
                self.table_particles = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|item| {
                            let parts: Vec<&str> = item.trim().split(':').collect();
                            if parts.len() != 3 {
                                return Err(ConfigError::new(
                                    key,
                                    format!("expected material:a_nm:b_nm, got `{}`", item.trim()),
                                ));
                            }
                            Ok((parts[0].to_string(), parse_f64(key, parts[1])?, parse_f64(key, parts[2])?))
                        })
                        .collect::<Result<_, _>>()?
                }
            }
            "analytic.dof" => self.analytic.dof = parse_dof(key, v)?,
            "analytic.points" => self.analytic.points = parse_int(key, v)?,
            "analytic.duration_s" => self.analytic.duration_s = opt(v)?,
            "analytic.overlay" => self.analytic.overlay = parse_bool(key, v)?,
            "output.dir" => self.output_dir = v.to_string(),
            "output.format" => {
                self.format = Format::parse(v)
                    .ok_or_else(|| ConfigError::new(key, format!("expected csv or json, got `{v}`")))?
            }
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, in file order. Unset optional keys
    /// are omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e: Vec<(&'static str, String)> = Vec::new();
        let opt = |e: &mut Vec<_>, key, v: Option<f64>| {
            if let Some(v) = v {
                e.push((key, fmt_f64(v)));
            }
        };
        e.push(("particle.material", self.particle.material.clone()));
        opt(&mut e, "particle.permittivity", self.particle.permittivity);
        opt(&mut e, "particle.density", self.particle.density);
        e.push(("particle.a_nm", fmt_f64(self.particle.a_nm)));
        e.push(("particle.b_nm", fmt_f64(self.particle.b_nm)));
        e.push(("beam.wavelength_nm", fmt_f64(self.beam.wavelength_nm)));
        e.push(("beam.power_mW", fmt_f64(self.beam.power_mw)));
        e.push(("beam.na", fmt_f64(self.beam.na)));
        opt(&mut e, "beam.waist_nm", self.beam.waist_nm);
        e.push(("feedback.eta", join(&self.feedback.eta, |v| fmt_f64(*v))));
        e.push(("feedback.zeta", join(&self.feedback.zeta, |v| fmt_f64(*v))));
        opt(&mut e, "feedback.r_nm", self.feedback.r_nm);
        e.push((
            "feedback.schedule",
            join(&self.feedback.schedule, |(t, m)| format!("{}:{}", fmt_f64(*t), fmt_f64(*m))),
        ));
        e.push(("measurement.N", fmt_f64(self.measurement.n)));
        e.push(("measurement.velocity", self.measurement.velocity.label().to_string()));
        e.push(("integrator.steps_per_period", self.integrator.steps_per_period.to_string()));
        e.push(("integrator.master_seed", self.integrator.master_seed.to_string()));
        if let Some(k) = self.integrator.trajectories {
            e.push(("integrator.trajectories", k.to_string()));
        }
        opt(&mut e, "integrator.duration_s", self.integrator.duration_s);
        opt(&mut e, "integrator.record_interval_s", self.integrator.record_interval_s);
        opt(&mut e, "initial.temperature_K", self.initial_temperature_k);
        e.push(("sweep.dof", self.sweep.dof.label().to_string()));
        e.push(("sweep.eta", join(&self.sweep.eta, |v| fmt_f64(*v))));
        e.push(("sweep.N", join(&self.sweep.noise, |v| fmt_f64(*v))));
        e.push(("sweep.delta_n", join(&self.sweep.delta_n, |v| fmt_f64(*v))));
        e.push(("sweep.window_relaxation_times", fmt_f64(self.sweep.window_relaxation_times)));
        e.push(("sweep.tolerance", fmt_f64(self.sweep.tolerance)));
        e.push(("sweep.max_windows", self.sweep.max_windows.to_string()));
        e.push(("sweep.max_extensions", self.sweep.max_extensions.to_string()));
        e.push((
            "table.particles",
            join(&self.table_particles, |(m, a, b)| format!("{m}:{}:{}", fmt_f64(*a), fmt_f64(*b))),
        ));
        e.push(("analytic.dof", self.analytic.dof.label().to_string()));
        e.push(("analytic.points", self.analytic.points.to_string()));
        opt(&mut e, "analytic.duration_s", self.analytic.duration_s);
        e.push(("analytic.overlay", self.analytic.overlay.to_string()));
        e.push(("output.dir", self.output_dir.clone()));
        e.push(("output.format", self.format.label().to_string()));
        e
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Short SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        crate::dynamics::ensemble::short_hash(self.to_text().as_bytes())
    }

    pub fn material(&self) -> Result<Material, ConfigError> {
        let p = &self.particle;
        match (p.permittivity, p.density, Material::preset(&p.material)) {
            (Some(eps), Some(rho), _) => {
                Material::new(&p.material, eps, rho).map_err(|e| ConfigError::new("particle.permittivity", e))
            }
            (eps, rho, Some(base)) => Material::new(
                &p.material,
                eps.unwrap_or(base.permittivity),
                rho.unwrap_or(base.density),
            )
            .map_err(|e| ConfigError::new("particle.permittivity", e)),
            (_, _, None) => Err(ConfigError::new(
                "particle.material",
                format!("unknown preset `{}`; give particle.permittivity and particle.density", p.material),
            )),
        }
    }

    pub fn particle(&self) -> Result<Ellipsoid, ConfigError> {
        Ellipsoid::new(self.particle.a_nm * 1e-9, self.particle.b_nm * 1e-9, self.material()?)
            .map_err(|e| ConfigError::new("particle.a_nm", e))
    }

    /// Table entries, or the `particle` section when the list is empty.
    pub fn table_entries(&self) -> Result<Vec<Ellipsoid>, ConfigError> {
        if self.table_particles.is_empty() {
            return Ok(vec![self.particle()?]);
        }
        self.table_particles
            .iter()
            .map(|(m, a, b)| {
                let material = Material::preset(m)
                    .ok_or_else(|| ConfigError::new("table.particles", format!("unknown preset `{m}`")))?;
                Ellipsoid::new(a * 1e-9, b * 1e-9, material).map_err(|e| ConfigError::new("table.particles", e))
            })
            .collect()
    }

    pub fn beam(&self) -> Result<Beam, ConfigError> {
        let b = &self.beam;
        let result = match b.waist_nm {
            Some(w) => Beam::with_waist(b.wavelength_nm * 1e-9, b.power_mw * 1e-3, w * 1e-9),
            None => Beam::new(b.wavelength_nm * 1e-9, b.power_mw * 1e-3, b.na),
        };
        result.map_err(|e| {
            let key = match &e {
                crate::Error::InvalidParameter { name: "wavelength", .. } => "beam.wavelength_nm",
                crate::Error::InvalidParameter { name: "power", .. } => "beam.power_mW",
                crate::Error::InvalidParameter { name: "waist", .. } => "beam.waist_nm",
                _ => "beam.na",
            };
            ConfigError::new(key, e)
        })
    }

    pub fn size_scale(&self) -> Result<f64, ConfigError> {
        let r = match self.feedback.r_nm {
            Some(r) => r * 1e-9,
            None => self.particle()?.size(),
        };
        if r.is_finite() && r > 0.0 {
            Ok(r)
        } else {
            Err(ConfigError::new("feedback.r_nm", "must be > 0"))
        }
    }

    pub fn feedback(&self) -> Result<FeedbackConfig, ConfigError> {
        let schedule = Schedule::new(self.feedback.schedule.clone())
            .map_err(|e| ConfigError::new("feedback.schedule", e))?;
        FeedbackConfig::new(self.feedback.eta, self.feedback.zeta, self.size_scale()?, schedule).map_err(|e| {
            let key = match &e {
                crate::Error::InvalidParameter { name: "feedback.zeta", .. } => "feedback.zeta",
                _ => "feedback.eta",
            };
            ConfigError::new(key, e)
        })
    }

    pub fn measurement(&self) -> Result<MeasurementModel, ConfigError> {
        MeasurementModel::new(self.measurement.n, self.measurement.velocity)
            .map_err(|e| ConfigError::new("measurement.N", e))
    }

    pub fn trajectories(&self, default: usize) -> usize {
        self.integrator.trajectories.unwrap_or(default)
    }

    pub fn duration(&self, default: f64) -> Result<f64, ConfigError> {
        let d = self.integrator.duration_s.unwrap_or(default);
        if d.is_finite() && d >= 0.0 {
            Ok(d)
        } else {
            Err(ConfigError::new("integrator.duration_s", "must be >= 0"))
        }
    }

    /// Record interval defaults to 1/`samples` of the duration.
    pub fn integrator_config(&self, default_trajectories: usize, duration: f64, samples: usize) -> Result<IntegratorConfig, ConfigError> {
        let interval = self
            .integrator
            .record_interval_s
            .unwrap_or(if duration > 0.0 { duration / samples as f64 } else { 1e-6 });
        IntegratorConfig::new(
            self.integrator.steps_per_period,
            self.integrator.master_seed,
            self.trajectories(default_trajectories),
            interval,
        )
        .map_err(|e| {
            let key = match &e {
                crate::Error::InvalidParameter { name, .. } => name.to_string(),
                _ => "integrator".into(),
            };
            ConfigError::new(key, e)
        })
    }

    pub fn temperature(&self, default: f64) -> Result<f64, ConfigError> {
        let t = self.initial_temperature_k.unwrap_or(default);
        if t.is_finite() && t >= 0.0 {
            Ok(t)
        } else {
            Err(ConfigError::new("initial.temperature_K", "must be >= 0"))
        }
    }

    pub fn initial<const D: usize>(&self, default: f64) -> Result<Initial<D>, ConfigError> {
        Ok(Initial::Thermal(self.temperature(default)?))
    }

    pub fn steady_state(&self) -> Result<SteadyStateConfig, ConfigError> {
        let s = &self.sweep;
        if !(s.window_relaxation_times.is_finite() && s.window_relaxation_times > 0.0) {
            return Err(ConfigError::new("sweep.window_relaxation_times", "must be > 0"));
        }
        if !(s.tolerance.is_finite() && s.tolerance > 0.0) {
            return Err(ConfigError::new("sweep.tolerance", "must be > 0"));
        }
        if s.max_windows < 2 {
            return Err(ConfigError::new("sweep.max_windows", "must be at least 2"));
        }
        Ok(SteadyStateConfig {
            window_relaxation_times: s.window_relaxation_times,
            relative_tolerance: s.tolerance,
            max_windows: s.max_windows,
            ..SteadyStateConfig::default()
        })
    }
}
