//! Run configuration: a JSON document, optionally patched by dotted command-line
//! overrides such as `--cavity1.omega 0.5`.
//!
//! Every rate is a ratio against the declared reference rate (`unit`), and
//! every time is in units of its inverse. `reference_rate` gives the absolute
//! value of the reference, used only for the absolute-time outputs.

use cavent::amplitudes::CavityParams;
use cavent::quantum_state::InitialState;
use serde::Deserialize;
use serde_json::Value;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Omega1,
    Lambda1,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Omega1 => "omega1",
            Unit::Lambda1 => "lambda1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dynamics,
    Events,
    Protocol,
    Sweep,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub s: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub omega: f64,
    pub lambda: f64,
    #[serde(default)]
    pub delta: f64,
}

impl CavityConfig {
    pub fn params(&self) -> Result<CavityParams, cavent::Error> {
        CavityParams::new(self.omega, self.lambda, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    /// Number of grid points, endpoints included.
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsConfig {
    /// Defaults to ten lifetimes of the slower pair.
    pub horizon: Option<f64>,
    pub scan_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub f_threshold: f64,
    /// Fixed interaction time; overrides `f_threshold` when set.
    pub t_bar: Option<f64>,
    pub target_e: f64,
    /// Atom 2 emits into cavity 2 and cavity 1's coupling is solved for.
    pub swapped: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            f_threshold: cavent::protocol::DEFAULT_F_THRESHOLD,
            t_bar: None,
            target_e: cavent::protocol::W_TARGET_E,
            swapped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    #[default]
    Events,
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..=n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub target: SweepTarget,
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Comparison window; defaults to `10 / lambda` per cavity (`grid.t_max` for an ideal cavity).
    pub t_max: Option<f64>,
    /// Memory-kernel grid points; defaults to a step of `0.002 / max rate`.
    pub oracle_steps: Option<usize>,
    pub n_modes: usize,
    /// Half-width of the mode band in units of lambda. Defaults to
    /// `max(50, 20 max(Omega, |delta|) / lambda)`, capped so that the bath
    /// recurrence time is at least twice the comparison window.
    pub cutoff: Option<f64>,
    /// Points of the invariant checks.
    pub samples: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            t_max: None,
            oracle_steps: None,
            n_modes: 2001,
            cutoff: None,
            samples: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub unit: Unit,
    #[serde(default = "one")]
    pub reference_rate: f64,
    pub initial: InitialConfig,
    pub cavity1: CavityConfig,
    pub cavity2: CavityConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub events: EventsConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

/// Parameters reachable from a sweep axis.
pub const SWEEP_PARAMS: [&str; 10] = [
    "initial.s",
    "initial.phi",
    "cavity1.omega",
    "cavity1.lambda",
    "cavity1.delta",
    "cavity2.omega",
    "cavity2.lambda",
    "cavity2.delta",
    "detuning.antisymmetric",
    "detuning.symmetric",
];

/// Built-in configuration: equal cavities with `lambda = 0.1 Omega`,
/// `delta = Omega / 2`, `s = 0.2`, sampled to `t = 40 / Omega`.
pub fn default_document() -> Value {
    serde_json::json!({
        "unit": "omega1",
        "reference_rate": 1.0,
        "initial": { "s": 0.2, "phi": 0.0 },
        "cavity1": { "omega": 1.0, "lambda": 0.1, "delta": 0.5 },
        "cavity2": { "omega": 1.0, "lambda": 0.1, "delta": 0.5 },
        "grid": { "t_max": 40.0, "n_steps": 401 }
    })
}

/// A `--a.b.c value` pair taken from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

/// Removes dotted `--path value` / `--path=value` flags from `args`.
pub fn extract_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<Override>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (path, inline) = match flag.split_once('=') {
            Some((p, v)) => (p.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !path.contains('.') {
            rest.push(arg);
            continue;
        }
        let raw = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| CliError::Config(format!("--{path}: missing value")))?,
        };
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        overrides.push(Override { path, value });
    }
    Ok((rest, overrides))
}

/// Sets `value` at a dotted path, creating intermediate objects.
pub fn apply_override(doc: &mut Value, ov: &Override) -> Result<(), CliError> {
    let mut node = doc;
    let parts: Vec<&str> = ov.path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("--{}: empty path segment", ov.path)));
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "--{}: `{}` is not an object",
                ov.path,
                parts[..i].join(".")
            ))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), ov.value.clone());
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Loads the document at `path` (or the built-in default), applies
/// `overrides` and deserializes it.
pub fn load(path: Option<&Path>, overrides: &[Override]) -> Result<RunConfig, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => default_document(),
    };
    for ov in overrides {
        apply_override(&mut doc, ov)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(doc)
        .map_err(|e| CliError::Config(format!("{}: {}", e.path(), e.inner())))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if !(self.reference_rate.is_finite() && self.reference_rate > 0.0) {
            return bad("reference_rate", format!("must be > 0, got {}", self.reference_rate));
        }
        let (field, value) = match self.unit {
            Unit::Omega1 => ("cavity1.omega", self.cavity1.omega),
            Unit::Lambda1 => ("cavity1.lambda", self.cavity1.lambda),
        };
        if value != 1.0 {
            return bad(
                field,
                format!("must be 1 when unit = {}, got {value}", self.unit.name()),
            );
        }
        self.initial_state().map_err(|e| CliError::Config(format!("initial: {e}")))?;
        self.cavity1.params().map_err(|e| CliError::Config(format!("cavity1: {e}")))?;
        self.cavity2.params().map_err(|e| CliError::Config(format!("cavity2: {e}")))?;
        if !(self.grid.t_max.is_finite() && self.grid.t_max > 0.0) {
            return bad("grid.t_max", format!("must be > 0, got {}", self.grid.t_max));
        }
        if self.grid.n_steps < 2 {
            return bad("grid.n_steps", format!("must be >= 2, got {}", self.grid.n_steps));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() {
                return bad("sweep.axes", "at least one axis is required".into());
            }
            for (i, axis) in sweep.axes.iter().enumerate() {
                if !SWEEP_PARAMS.contains(&axis.param.as_str()) {
                    return bad(
                        &format!("sweep.axes[{i}].param"),
                        format!("unknown parameter `{}`", axis.param),
                    );
                }
                if axis.param == field {
                    return bad(
                        &format!("sweep.axes[{i}].param"),
                        format!("`{field}` is the reference unit and cannot be swept"),
                    );
                }
                if axis.count < 2 {
                    return bad(&format!("sweep.axes[{i}].count"), "must be >= 2".into());
                }
                if !(axis.min.is_finite() && axis.max.is_finite()) {
                    return bad(&format!("sweep.axes[{i}]"), "bounds must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Result<InitialState, cavent::Error> {
        InitialState::new(self.initial.s, self.initial.phi)
    }

    /// Sets one sweep parameter.
    pub fn set_param(&mut self, name: &str, v: f64) {
        match name {
            "initial.s" => self.initial.s = v,
            "initial.phi" => self.initial.phi = v,
            "cavity1.omega" => self.cavity1.omega = v,
            "cavity1.lambda" => self.cavity1.lambda = v,
            "cavity1.delta" => self.cavity1.delta = v,
            "cavity2.omega" => self.cavity2.omega = v,
            "cavity2.lambda" => self.cavity2.lambda = v,
            "cavity2.delta" => self.cavity2.delta = v,
            "detuning.antisymmetric" => {
                self.cavity1.delta = v;
                self.cavity2.delta = -v;
            }
            "detuning.symmetric" => {
                self.cavity1.delta = v;
                self.cavity2.delta = v;
            }
            _ => unreachable!("validated sweep parameter {name}"),
        }
    }
}
