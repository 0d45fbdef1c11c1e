//! Experiment configuration files (TOML).
//!
//! ```toml
//! problem = "coupled.toml"     # or a [generator] table
//! order = [2, 1]               # 1-based sweep order; or `start = 2`
//! f0 = "zero"                  # or a path to a row-major matrix text file
//! max_sweeps = 500
//! tol_change = 1e-10
//! tol_residual = 1e-8
//! tol_reference = 1e-7
//! order_window = [1e-10, 1e-2]
//! trace = true
//! rate = true
//! order_fit = true
//!
//! [generator]
//! state_blocks = [2, 2]
//! input_blocks = [1, 1]
//! coupling = 0.1
//! domain = "discrete"
//! seed = 42
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::generator::GeneratorSpec;
use crate::rate::OrderWindow;
use crate::split::{OrderPolicy, RunOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub enum F0Source {
    Zero,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outputs {
    pub trace: bool,
    pub rate: bool,
    pub order_fit: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trace: true,
            rate: true,
            order_fit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: ProblemSource,
    pub order: OrderPolicy,
    pub f0: F0Source,
    pub run: RunOptions,
    /// Relative Frobenius distance accepted between the final feedback and
    /// the full-problem reference.
    pub tol_reference: f64,
    pub window: OrderWindow,
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn generated(spec: GeneratorSpec) -> Self {
        Self {
            source: ProblemSource::Generated(spec),
            order: OrderPolicy::default(),
            f0: F0Source::Zero,
            run: RunOptions::default(),
            tol_reference: 1e-7,
            window: OrderWindow::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { location, message } => {
                Error::parse(format!("{}: {location}", path.display()), message)
            }
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::parse("config", e.to_string().trim().to_string()))?;
        let resolve = |p: &str| -> Result<PathBuf> {
            let path = base_dir.join(p);
            if !path.exists() {
                return Err(Error::parse(
                    "config",
                    format!("{} does not exist", path.display()),
                ));
            }
            Ok(path)
        };
        let source = match (raw.problem, raw.generator) {
            (Some(p), None) => ProblemSource::File(resolve(&p)?),
            (None, Some(g)) => {
                g.validate()?;
                ProblemSource::Generated(g)
            }
            _ => {
                return Err(Error::parse(
                    "config",
                    "exactly one of `problem` or `[generator]` is required",
                ))
            }
        };
        let order = match (raw.order, raw.start) {
            (Some(_), Some(_)) => {
                return Err(Error::parse("config", "`order` and `start` are exclusive"))
            }
            (Some(order), None) => OrderPolicy::Explicit(one_based(&order, "order")?),
            (None, Some(start)) => OrderPolicy::Ascending {
                start: one_based(&[start], "start")?[0],
            },
            (None, None) => OrderPolicy::default(),
        };
        let f0 = match raw.f0.as_deref() {
            None | Some("zero") => F0Source::Zero,
            Some(p) => F0Source::File(resolve(p)?),
        };
        let defaults = RunOptions::default();
        let mut run = RunOptions {
            max_sweeps: raw.max_sweeps.unwrap_or(defaults.max_sweeps),
            tol_change: raw.tol_change.unwrap_or(defaults.tol_change),
            tol_residual: raw.tol_residual.unwrap_or(defaults.tol_residual),
            order: order.clone(),
            tolerances: defaults.tolerances,
        };
        if let Some(t) = raw.tol_riccati {
            run.tolerances.riccati = t;
        }
        let window = match raw.order_window {
            Some([lower, upper]) => OrderWindow { lower, upper },
            None => OrderWindow::default(),
        };
        let tol_reference = raw.tol_reference.unwrap_or(1e-7);
        for (name, v) in [
            ("tol_change", run.tol_change),
            ("tol_residual", run.tol_residual),
            ("tol_riccati", run.tolerances.riccati),
            ("tol_reference", tol_reference),
            ("order_window", window.lower),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::parse(name, "tolerances must be positive"));
            }
        }
        if !(window.upper > window.lower) {
            return Err(Error::parse(
                "order_window",
                "upper bound must exceed lower bound",
            ));
        }
        if run.max_sweeps == 0 {
            return Err(Error::parse("max_sweeps", "must be at least 1"));
        }
        let outputs = Outputs {
            trace: raw.trace.unwrap_or(true),
            rate: raw.rate.unwrap_or(true),
            order_fit: raw.order_fit.unwrap_or(true),
        };
        Ok(Self {
            source,
            order,
            f0,
            run,
            tol_reference,
            window,
            outputs,
        })
    }
}

/// Converts 1-based subsystem numbers to 0-based indices.
pub fn one_based(values: &[usize], what: &str) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            v.checked_sub(1)
                .ok_or_else(|| Error::parse(what, "subsystem numbers start at 1"))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<String>,
    generator: Option<GeneratorSpec>,
    order: Option<Vec<usize>>,
    start: Option<usize>,
    f0: Option<String>,
    max_sweeps: Option<usize>,
    tol_change: Option<f64>,
    tol_residual: Option<f64>,
    tol_riccati: Option<f64>,
    tol_reference: Option<f64>,
    order_window: Option<[f64; 2]>,
    trace: Option<bool>,
    rate: Option<bool>,
    order_fit: Option<bool>,
}
