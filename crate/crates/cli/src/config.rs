//! Flat key=value run configuration. Unknown keys are rejected so typos
//! surface as config errors rather than silently applied defaults.

use std::path::Path;

use ldg_core::optimizer::{Branch, ObstacleSpec, SweepParameter};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: expected key=value")]
    BadLine(usize),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{0}': {1}")]
    BadValue(String, String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub mu: f64,
    pub branch: Branch,
    pub bound: f64,
    pub sector: bool,
    pub seed_amplitude: f64,
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub run_id: String,
    pub sweep_parameter: Option<String>,
    pub sweep_values: Vec<f64>,
    pub checkpoint: Option<String>,
    pub beta_values: Vec<f64>,
    pub samples: usize,
    pub ring_kappa: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            mu: 10.0,
            branch: Branch::Plus,
            bound: -0.5,
            sector: true,
            seed_amplitude: 0.2,
            grad_tol: None,
            max_iters: None,
            run_id: "run".into(),
            sweep_parameter: None,
            sweep_values: Vec::new(),
            checkpoint: None,
            beta_values: vec![0.3, 1.0, 2.0],
            samples: 10_001,
            ring_kappa: 1.0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| ConfigError::BadValue(key.into(), e.to_string()))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let Some(path) = path else { return Ok(cfg) };
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::BadLine(lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = parse(key, value)?,
                "mu" => cfg.mu = parse(key, value)?,
                "branch" => {
                    cfg.branch = match value {
                        "plus" => Branch::Plus,
                        "minus" => Branch::Minus,
                        "none" => Branch::None,
                        other => {
                            return Err(ConfigError::BadValue(
                                key.into(),
                                format!("expected plus|minus|none, got '{other}'"),
                            ))
                        }
                    }
                }
                "bound" => cfg.bound = parse(key, value)?,
                "sector" => cfg.sector = parse(key, value)?,
                "seed_amplitude" => cfg.seed_amplitude = parse(key, value)?,
                "grad_tol" => cfg.grad_tol = Some(parse(key, value)?),
                "max_iters" => cfg.max_iters = Some(parse(key, value)?),
                "run_id" => cfg.run_id = value.into(),
                "sweep_parameter" => cfg.sweep_parameter = Some(value.into()),
                "sweep_values" => cfg.sweep_values = parse_list(key, value)?,
                "checkpoint" => cfg.checkpoint = Some(value.into()),
                "beta_values" => cfg.beta_values = parse_list(key, value)?,
                "samples" => cfg.samples = parse(key, value)?,
                "ring_kappa" => cfg.ring_kappa = parse(key, value)?,
                other => return Err(ConfigError::UnknownKey(other.into())),
            }
        }
        if cfg.n < 32 {
            return Err(ConfigError::Invalid(format!(
                "n = {} too coarse for analysis runs, need n >= 32",
                cfg.n
            )));
        }
        Ok(cfg)
    }

    pub fn obstacle(&self) -> Result<ObstacleSpec, ConfigError> {
        if self.branch == Branch::None {
            return Ok(ObstacleSpec::unconstrained());
        }
        ObstacleSpec::new(self.branch, self.bound)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn sweep(&self) -> Result<(SweepParameter, Vec<f64>), ConfigError> {
        let param = match self.sweep_parameter.as_deref() {
            Some("b") => SweepParameter::LowerBound,
            Some("c") => SweepParameter::UpperBound,
            Some("mu") => SweepParameter::Mu,
            Some(other) => {
                return Err(ConfigError::BadValue(
                    "sweep_parameter".into(),
                    format!("expected b|c|mu, got '{other}'"),
                ))
            }
            None => {
                return Err(ConfigError::Invalid(
                    "sweep needs sweep_parameter=b|c|mu".into(),
                ))
            }
        };
        if self.sweep_values.is_empty() {
            return Err(ConfigError::Invalid("sweep_values is empty".into()));
        }
        Ok((param, self.sweep_values.clone()))
    }
}
