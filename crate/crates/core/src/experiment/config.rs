use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Result, SolverError};
use crate::integrator::{NewtonConfig, Scheme};
use crate::thermo::GasConstants;

use super::init::BubbleShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    HydrostaticColumn,
    BubbleColumn,
    BubbleSlice,
    ToleranceSweep,
    CnCompare,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::HydrostaticColumn,
        Experiment::BubbleColumn,
        Experiment::BubbleSlice,
        Experiment::ToleranceSweep,
        Experiment::CnCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HydrostaticColumn => "hydrostatic-column",
            Experiment::BubbleColumn => "bubble-column",
            Experiment::BubbleSlice => "bubble-slice",
            Experiment::ToleranceSweep => "tolerance-sweep",
            Experiment::CnCompare => "cn-compare",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| SolverError::Config(format!("unknown experiment '{s}'")))
    }
}

pub(crate) fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Balanced => "balanced",
        Scheme::CrankNicolson => "crank-nicolson",
    }
}

pub(crate) fn parse_scheme(s: &str) -> Result<Scheme> {
    match s {
        "balanced" => Ok(Scheme::Balanced),
        "crank-nicolson" | "cn" => Ok(Scheme::CrankNicolson),
        other => Err(SolverError::Config(format!("unknown integrator '{other}'"))),
    }
}

/// Everything a preset run needs. Every key has a default; see [`ExperimentConfig::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_levels: usize,
    pub z_top: f64,
    pub n_columns: usize,
    pub dx: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub include_w_in_criteria: bool,
    pub accept_unconverged: bool,
    pub integrator: Scheme,
    pub theta0: f64,
    pub bubble: BubbleShape,
    /// Horizontal bubble centre; the middle of the slice when unset.
    pub bubble_centre_x: Option<f64>,
    pub rayleigh: bool,
    pub viscosity_factor: f64,
    pub cp: f64,
    pub cv: f64,
    pub p0: f64,
    pub g: f64,
    pub sweep_tolerances: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults of a preset.
    pub fn preset(experiment: Experiment) -> Self {
        let consts = GasConstants::default();
        let base = Self {
            experiment,
            n_levels: 150,
            z_top: 1500.0,
            n_columns: 16,
            dx: 62.5,
            dt: 1.0,
            n_steps: 400,
            tolerance: 1e-8,
            max_iterations: 40,
            include_w_in_criteria: true,
            accept_unconverged: false,
            integrator: Scheme::Balanced,
            theta0: 300.0,
            bubble: BubbleShape::default(),
            bubble_centre_x: None,
            rayleigh: false,
            viscosity_factor: 1.0,
            cp: consts.cp(),
            cv: consts.cv(),
            p0: consts.p0(),
            g: consts.g(),
            sweep_tolerances: vec![1e-6, 1e-8, 1e-10, 1e-12, 1e-14],
            output: None,
        };
        match experiment {
            Experiment::HydrostaticColumn => Self {
                n_steps: 100,
                include_w_in_criteria: false,
                ..base
            },
            Experiment::BubbleColumn | Experiment::CnCompare => Self {
                include_w_in_criteria: false,
                ..base
            },
            Experiment::ToleranceSweep => Self {
                include_w_in_criteria: false,
                accept_unconverged: true,
                ..base
            },
            Experiment::BubbleSlice => Self {
                n_levels: 50,
                dt: 0.1,
                n_steps: 2000,
                include_w_in_criteria: false,
                ..base
            },
        }
    }

    /// Reads a flat `key = value` file (`#` starts a comment) over the defaults of the
    /// experiment it names, or of `fallback` when it names none.
    pub fn from_file(path: &Path, fallback: Experiment) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| SolverError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, fallback)
    }

    pub fn parse(text: &str, fallback: Experiment) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                SolverError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let experiment = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.parse()?,
            None => fallback,
        };
        let mut cfg = Self::preset(experiment);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            SolverError::Config(format!("override '{assignment}' is not key=value"))
        })?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| SolverError::Config(format!("{key}: cannot parse '{value}'")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "on" | "yes" | "1" => Ok(true),
                "false" | "off" | "no" | "0" => Ok(false),
                _ => Err(SolverError::Config(format!(
                    "{key}: expected a boolean, got '{value}'"
                ))),
            }
        }
        match key {
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(SolverError::Config(format!(
                        "experiment '{e}' conflicts with the selected preset '{}'",
                        self.experiment
                    )));
                }
            }
            "n_levels" => self.n_levels = num(key, value)?,
            "z_top" => self.z_top = num(key, value)?,
            "n_columns" => self.n_columns = num(key, value)?,
            "dx" => self.dx = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "n_steps" => self.n_steps = num(key, value)?,
            "tolerance" => self.tolerance = num(key, value)?,
            "max_iterations" => self.max_iterations = num(key, value)?,
            "include_w_in_criteria" => self.include_w_in_criteria = flag(key, value)?,
            "accept_unconverged" => self.accept_unconverged = flag(key, value)?,
            "integrator" => self.integrator = parse_scheme(value)?,
            "theta0" => self.theta0 = num(key, value)?,
            "bubble_amplitude" => self.bubble.amplitude = num(key, value)?,
            "bubble_radius" => self.bubble.radius = num(key, value)?,
            "bubble_centre_z" => self.bubble.centre_z = num(key, value)?,
            "bubble_centre_x" => self.bubble_centre_x = Some(num(key, value)?),
            "rayleigh" => self.rayleigh = flag(key, value)?,
            "viscosity_factor" => self.viscosity_factor = num(key, value)?,
            "cp" => self.cp = num(key, value)?,
            "cv" => self.cv = num(key, value)?,
            "p0" => self.p0 = num(key, value)?,
            "g" => self.g = num(key, value)?,
            "sweep_tolerances" => {
                self.sweep_tolerances = value
                    .split(',')
                    .map(|t| num(key, t.trim()))
                    .collect::<Result<_>>()?
            }
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(SolverError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Every key with its current value, in a form [`ExperimentConfig::parse`] accepts.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(&str, String)> = vec![
            ("experiment", self.experiment.to_string()),
            ("n_levels", self.n_levels.to_string()),
            ("z_top", format!("{:e}", self.z_top)),
            ("n_columns", self.n_columns.to_string()),
            ("dx", format!("{:e}", self.dx)),
            ("dt", format!("{:e}", self.dt)),
            ("n_steps", self.n_steps.to_string()),
            ("tolerance", format!("{:e}", self.tolerance)),
            ("max_iterations", self.max_iterations.to_string()),
            (
                "include_w_in_criteria",
                self.include_w_in_criteria.to_string(),
            ),
            ("accept_unconverged", self.accept_unconverged.to_string()),
            ("integrator", scheme_name(self.integrator).to_string()),
            ("theta0", format!("{:e}", self.theta0)),
            ("bubble_amplitude", format!("{:e}", self.bubble.amplitude)),
            ("bubble_radius", format!("{:e}", self.bubble.radius)),
            ("bubble_centre_z", format!("{:e}", self.bubble.centre_z)),
            ("rayleigh", self.rayleigh.to_string()),
            ("viscosity_factor", format!("{:e}", self.viscosity_factor)),
            ("cp", format!("{:e}", self.cp)),
            ("cv", format!("{:e}", self.cv)),
            ("p0", format!("{:e}", self.p0)),
            ("g", format!("{:e}", self.g)),
            (
                "sweep_tolerances",
                self.sweep_tolerances
                    .iter()
                    .map(|t| format!("{t:e}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ];
        if let Some(x) = self.bubble_centre_x {
            pairs.push(("bubble_centre_x", format!("{x:e}")));
        }
        if let Some(p) = &self.output {
            pairs.push(("output", p.display().to_string()));
        }
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn constants(&self) -> Result<GasConstants> {
        GasConstants::new(self.cp, self.cv, self.p0, self.g).map_err(|e| match e {
            SolverError::InvalidArgument(m) => SolverError::Config(m),
            other => other,
        })
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            dt: self.dt,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            include_w_in_criteria: self.include_w_in_criteria,
            scheme: self.integrator,
            linearised: false,
            accept_unconverged: self.accept_unconverged,
        }
    }

    /// Bubble with its horizontal centre resolved against the slice width.
    pub fn bubble_shape(&self) -> BubbleShape {
        BubbleShape {
            centre_x: self
                .bubble_centre_x
                .unwrap_or(0.5 * self.n_columns as f64 * self.dx),
            ..self.bubble
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(SolverError::Config(m));
        if self.n_levels < 2 {
            return fail(format!(
                "n_levels must be at least 2, got {}",
                self.n_levels
            ));
        }
        if self.n_columns == 0 {
            return fail("n_columns must be positive".into());
        }
        for (name, v) in [
            ("z_top", self.z_top),
            ("dx", self.dx),
            ("dt", self.dt),
            ("tolerance", self.tolerance),
            ("theta0", self.theta0),
            ("bubble_radius", self.bubble.radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        if !(self.viscosity_factor >= 0.0) {
            return fail("viscosity_factor must be non-negative".into());
        }
        if self.rayleigh && self.n_levels < 4 {
            return fail("rayleigh damping needs at least 4 levels".into());
        }
        if self.experiment == Experiment::ToleranceSweep
            && (self.sweep_tolerances.is_empty()
                || self.sweep_tolerances.iter().any(|t| !(*t > 0.0)))
        {
            return fail("sweep_tolerances must be a non-empty list of positive values".into());
        }
        self.constants()?;
        Ok(())
    }
}
