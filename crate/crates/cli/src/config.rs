use std::path::Path;

use fracmax::maximizer::{AscentOptions, Init, SolverKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Exponents {
    One(#[serde(serialize_with = "fracmax::io::sig17")] f64),
    Many(#[serde(serialize_with = "fracmax::io::sig17_vec")] Vec<f64>),
}

impl Exponents {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Exponents::One(s) => vec![*s],
            Exponents::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitName {
    Random,
    Centered,
    UniformThenSnap,
}

impl From<InitName> for Init {
    fn from(i: InitName) -> Init {
        match i {
            InitName::Random => Init::Random,
            InitName::Centered => Init::Centered,
            InitName::UniformThenSnap => Init::UniformThenSnap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverName {
    Direct,
    Iterative,
}

fn sig17_pairs<S: serde::Serializer>(pairs: &[[f64; 2]], ser: S) -> Result<S::Ok, S::Error> {
    use fracmax::io::Sig17;
    ser.collect_seq(pairs.iter().map(|[a, b]| [Sig17(*a), Sig17(*b)]))
}

fn d_max_iter() -> usize {
    100
}
fn d_restarts() -> usize {
    10
}
fn d_solver_tol() -> f64 {
    1e-10
}
fn d_brute_limit() -> u64 {
    10_000_000
}
fn d_init() -> InitName {
    InitName::Centered
}
fn d_solver() -> SolverName {
    SolverName::Direct
}

/// Experiment configuration, read from JSON. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(serialize_with = "sig17_pairs")]
    pub domain: Vec<[f64; 2]>,
    #[serde(serialize_with = "fracmax::io::sig17")]
    pub h: f64,
    pub s: Exponents,
    #[serde(serialize_with = "fracmax::io::sig17")]
    pub beta: f64,
    #[serde(default = "d_max_iter")]
    pub max_iter: usize,
    #[serde(default = "d_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_solver_tol", serialize_with = "fracmax::io::sig17")]
    pub solver_tol: f64,
    #[serde(default = "d_brute_limit")]
    pub brute_limit: u64,
    #[serde(default = "d_init")]
    pub init: InitName,
    #[serde(default = "d_solver")]
    pub solver: SolverName,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: vec![[-1.0, 1.0]],
            h: 1.0 / 32.0,
            s: Exponents::One(0.5),
            beta: 0.5,
            max_iter: d_max_iter(),
            restarts: d_restarts(),
            seed: 0,
            solver_tol: d_solver_tol(),
            brute_limit: d_brute_limit(),
            init: d_init(),
            solver: d_solver(),
        }
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config field `{name}`: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.domain.is_empty() {
            return Err(field("domain", "at least one interval is required"));
        }
        for (i, [l, r]) in self.domain.iter().enumerate() {
            if !(l.is_finite() && r.is_finite() && r > l) {
                return Err(field(
                    "domain",
                    format!("interval #{i} [{l}, {r}] needs right > left"),
                ));
            }
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(field("h", format!("{} must be positive", self.h)));
        }
        for s in self.s.values() {
            if !(s > 0.0 && s < 1.0) {
                return Err(field("s", format!("{s} outside (0, 1)")));
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(field("beta", format!("{} must be positive", self.beta)));
        }
        if self.max_iter == 0 {
            return Err(field("max_iter", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(field("restarts", "must be at least 1"));
        }
        if self.solver_tol.is_nan() || self.solver_tol <= 0.0 {
            return Err(field(
                "solver_tol",
                format!("{} must be positive", self.solver_tol),
            ));
        }
        if self.brute_limit == 0 {
            return Err(field("brute_limit", "must be at least 1"));
        }
        Ok(())
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.domain.iter().map(|[l, r]| (*l, *r)).collect()
    }

    /// The exponent for single-run commands.
    pub fn single_s(&self) -> Result<f64, CliError> {
        match &self.s {
            Exponents::One(s) => Ok(*s),
            Exponents::Many(v) if v.len() == 1 => Ok(v[0]),
            Exponents::Many(v) => Err(field(
                "s",
                format!("this command takes one exponent, got {}", v.len()),
            )),
        }
    }

    pub fn ascent_options(&self) -> AscentOptions {
        AscentOptions {
            init: self.init.into(),
            max_iter: self.max_iter,
            restarts: self.restarts,
            seed: self.seed,
            solver_tol: self.solver_tol,
            solver: match self.solver {
                SolverName::Direct => SolverKind::Direct,
                SolverName::Iterative => SolverKind::Iterative,
            },
        }
    }
}
