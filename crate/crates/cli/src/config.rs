//! Scenario configuration: a flat TOML table layered from a named preset, a
//! config file and `key=value` overrides, validated into typed values.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use relaxometer_core::spectral::to_eigenbasis;
use relaxometer_core::{
    diagonalize, make_state, Basis, BathConfig, CMat4, DensityMatrix, Error as CoreError, StatePreset, SystemParams,
    Topology,
};
use toml::{Table, Value};

use crate::error::CliError;
use crate::presets;

/// Every key a scenario table may contain.
pub const KNOWN_KEYS: [&str; 20] = [
    "preset",
    "delta",
    "v",
    "topology",
    "kappa",
    "beta",
    "omega_c",
    "state",
    "rho_re",
    "rho_im",
    "rho_basis",
    "t_start",
    "t_end",
    "t_count",
    "spacing",
    "include_zero",
    "require",
    "sweep",
    "values",
    "description",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Sampling times. A logarithmic grid spans `[start, end]` geometrically and
/// may be preceded by `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub include_zero: bool,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count + 1);
        if self.count == 1 {
            out.push(self.start);
            return out;
        }
        let last = (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => {
                let step = (self.end - self.start) / last;
                out.extend((0..self.count).map(|k| self.start + step * k as f64));
            }
            Spacing::Log => {
                if self.include_zero {
                    out.push(0.0);
                }
                let ratio = (self.end / self.start).ln();
                out.extend((0..self.count).map(|k| self.start * (ratio * k as f64 / last).exp()));
            }
        }
        // pin the endpoint against rounding
        if let Some(t) = out.last_mut() {
            *t = self.end;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    Kappa,
    Delta,
}

impl SweepAxis {
    pub fn key(&self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Delta => "delta",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "beta" => Ok(SweepAxis::Beta),
            "kappa" => Ok(SweepAxis::Kappa),
            "delta" => Ok(SweepAxis::Delta),
            other => Err(CliError::config("sweep", format!("expected beta, kappa or delta, got `{other}`"))),
        }
    }
}

/// Report fields whose failure to converge is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequiredField {
    RelaxationTime,
    GammaRatio,
    OracleMaxDeviation,
}

impl RequiredField {
    pub fn key(&self) -> &'static str {
        match self {
            RequiredField::RelaxationTime => "relaxation_time",
            RequiredField::GammaRatio => "gamma_ratio",
            RequiredField::OracleMaxDeviation => "oracle_max_deviation",
        }
    }
}

impl FromStr for RequiredField {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "relaxation_time" => Ok(RequiredField::RelaxationTime),
            "gamma_ratio" => Ok(RequiredField::GammaRatio),
            "oracle_max_deviation" => Ok(RequiredField::OracleMaxDeviation),
            other => Err(CliError::config(
                "require",
                format!("unknown field `{other}` (expected relaxation_time, gamma_ratio or oracle_max_deviation)"),
            )),
        }
    }
}

/// Fully validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub params: SystemParams,
    pub bath: BathConfig,
    pub state: StatePreset,
    /// Initial state in the energy eigenbasis.
    pub rho0: DensityMatrix,
    pub grid: TimeGrid,
    pub require: Vec<RequiredField>,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
}

/// Unvalidated layered table.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub table: Table,
}

impl RawConfig {
    /// Starts from a named preset.
    pub fn from_preset(name: &str) -> Result<Self, CliError> {
        let table = presets::table(name).ok_or_else(|| {
            CliError::config("preset", format!("unknown preset `{name}` (see `relaxometer presets`)"))
        })?;
        Ok(RawConfig { table })
    }

    /// Overlays a TOML document. A `preset` key in the document is applied
    /// first when `self` is still empty.
    pub fn overlay_str(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        let doc: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config("config", format!("{origin}: {}", e.message())))?;
        if self.table.is_empty() {
            if let Some(name) = doc.get("preset") {
                let name = name.as_str().ok_or_else(|| CliError::config("preset", "expected a string"))?;
                *self = RawConfig::from_preset(name)?;
            }
        }
        for (k, v) in doc {
            self.table.insert(k, v);
        }
        Ok(())
    }

    pub fn overlay_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        self.overlay_str(&text, &path.display().to_string())
    }

    /// Applies one `key=value` override. The value is read as a TOML value,
    /// falling back to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config("set", format!("expected key=value, got `{assignment}`")))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = format!("x = {value}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| Value::String(value.to_string()));
        self.table.insert(key.to_string(), parsed);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.table.insert(key.to_string(), value);
    }

    pub fn validate(&self) -> Result<ScenarioConfig, CliError> {
        validate(&self.table)
    }
}

fn number(t: &Table, key: &'static str) -> Result<Option<f64>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(n)) => Ok(Some(*n as f64)),
        Some(Value::String(s)) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::config(key, format!("expected a number, got `{s}`"))),
        Some(other) => Err(CliError::config(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn required_number(t: &Table, key: &'static str) -> Result<f64, CliError> {
    number(t, key)?.ok_or_else(|| CliError::config(key, "missing"))
}

fn string<'a>(t: &'a Table, key: &'static str) -> Result<Option<&'a str>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.as_str())),
        Some(other) => Err(CliError::config(key, format!("expected a string, got {}", other.type_str()))),
    }
}

fn string_list(t: &Table, key: &'static str) -> Result<Vec<String>, CliError> {
    match t.get(key) {
        None => Ok(Vec::new()),
        Some(Value::String(s)) => Ok(s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(String::from).ok_or_else(|| CliError::config(key, "expected an array of strings")))
            .collect(),
        Some(other) => Err(CliError::config(key, format!("expected a list, got {}", other.type_str()))),
    }
}

/// Parses a comma-separated list of numbers (`inf` allowed).
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::config("values", format!("`{s}` is not a number"))))
        .collect()
}

fn number_list(t: &Table, key: &'static str) -> Result<Option<Vec<f64>>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => parse_values(s).map(Some),
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for v in items {
                out.push(match v {
                    Value::Float(x) => *x,
                    Value::Integer(n) => *n as f64,
                    _ => return Err(CliError::config(key, "expected an array of numbers")),
                });
            }
            Ok(Some(out))
        }
        Some(other) => Err(CliError::config(key, format!("expected a list, got {}", other.type_str()))),
    }
}

fn matrix(t: &Table, key: &'static str) -> Result<Option<[[f64; 4]; 4]>, CliError> {
    let Some(value) = t.get(key) else { return Ok(None) };
    let bad = || CliError::config(key, "expected a 4x4 array of numbers");
    let rows = value.as_array().ok_or_else(bad)?;
    if rows.len() != 4 {
        return Err(bad());
    }
    let mut out = [[0.0; 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(bad)?;
        if row.len() != 4 {
            return Err(bad());
        }
        for (j, x) in row.iter().enumerate() {
            out[i][j] = match x {
                Value::Float(x) => *x,
                Value::Integer(n) => *n as f64,
                _ => return Err(bad()),
            };
        }
    }
    Ok(Some(out))
}

fn core_to_config(err: CoreError, fallback: &'static str) -> CliError {
    match err {
        CoreError::InvalidParameter { name, reason } => CliError::config(name, reason),
        other => CliError::config(fallback, other.to_string()),
    }
}

fn validate(t: &Table) -> Result<ScenarioConfig, CliError> {
    if let Some(key) = t.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(CliError::config_owned(key.clone(), "unknown key"));
    }

    let delta = required_number(t, "delta")?;
    let v = required_number(t, "v")?;
    let params = SystemParams::new(delta, v).map_err(|e| core_to_config(e, "delta"))?;

    let topology: Topology = string(t, "topology")?
        .ok_or_else(|| CliError::config("topology", "missing"))?
        .parse()
        .map_err(|e| core_to_config(e, "topology"))?;
    let kappa = required_number(t, "kappa")?;
    let beta = required_number(t, "beta")?;
    let bath = match number(t, "omega_c")? {
        Some(wc) => BathConfig::new(topology, kappa, beta, wc),
        None => BathConfig::with_default_cutoff(topology, kappa, beta, &params),
    }
    .map_err(|e| core_to_config(e, "kappa"))?;

    let spec = diagonalize(&params);
    let state_name = string(t, "state")?.ok_or_else(|| CliError::config("state", "missing"))?;
    let (state, rho0) = if state_name.trim() == "custom" {
        let re = matrix(t, "rho_re")?.ok_or_else(|| CliError::config("rho_re", "missing for a custom state"))?;
        let im = matrix(t, "rho_im")?.unwrap_or([[0.0; 4]; 4]);
        let basis = match string(t, "rho_basis")?.unwrap_or("computational") {
            "computational" => Basis::Computational,
            "eigen" => Basis::Eigen,
            other => {
                return Err(CliError::config("rho_basis", format!("expected computational or eigen, got `{other}`")))
            }
        };
        let entries = CMat4::from_fn(|i, j| Complex64::new(re[i][j], im[i][j]));
        let rho = DensityMatrix::new(entries, basis).map_err(|e| CliError::config("rho_re", e.to_string()))?;
        let rho = match basis {
            Basis::Eigen => rho,
            Basis::Computational => {
                to_eigenbasis(&rho, &spec).map_err(|e| CliError::config("rho_basis", e.to_string()))?
            }
        };
        (StatePreset::Custom(rho.clone()), rho)
    } else {
        for key in ["rho_re", "rho_im", "rho_basis"] {
            if t.contains_key(key) {
                return Err(CliError::config_owned(key.to_string(), "only allowed with state = \"custom\""));
            }
        }
        let preset: StatePreset =
            state_name.parse().map_err(|e: CoreError| CliError::config("state", e.to_string()))?;
        let rho0 = make_state(&preset, &spec).map_err(|e| core_to_config(e, "state"))?;
        (preset, rho0)
    };

    let grid = time_grid(t)?;

    let require = string_list(t, "require")?.iter().map(|s| s.parse()).collect::<Result<Vec<RequiredField>, _>>()?;

    let sweep = match string(t, "sweep")? {
        None => {
            if t.contains_key("values") {
                return Err(CliError::config("values", "given without a sweep axis"));
            }
            None
        }
        Some(axis) => {
            let axis: SweepAxis = axis.parse()?;
            let values = number_list(t, "values")?.ok_or_else(|| CliError::config("values", "missing"))?;
            if values.is_empty() {
                return Err(CliError::config("values", "empty value list"));
            }
            Some((axis, values))
        }
    };

    Ok(ScenarioConfig { params, bath, state, rho0, grid, require, sweep })
}

fn time_grid(t: &Table) -> Result<TimeGrid, CliError> {
    let start = number(t, "t_start")?.unwrap_or(0.0);
    let end = required_number(t, "t_end")?;
    let count = match t.get("t_count") {
        None => 101,
        Some(Value::Integer(n)) if *n >= 1 => *n as usize,
        Some(_) => return Err(CliError::config("t_count", "expected an integer >= 1")),
    };
    let spacing = match string(t, "spacing")?.unwrap_or("linear") {
        "linear" => Spacing::Linear,
        "log" => Spacing::Log,
        other => return Err(CliError::config("spacing", format!("expected linear or log, got `{other}`"))),
    };
    let include_zero = match t.get("include_zero") {
        None => spacing == Spacing::Log,
        Some(Value::Boolean(b)) => *b,
        Some(_) => return Err(CliError::config("include_zero", "expected a boolean")),
    };
    if !(start >= 0.0) || !start.is_finite() {
        return Err(CliError::config("t_start", format!("must be finite and >= 0, got {start}")));
    }
    if !end.is_finite() || end < start || (count > 1 && end <= start) {
        return Err(CliError::config("t_end", format!("must be finite and > t_start, got {end}")));
    }
    if spacing == Spacing::Log && start <= 0.0 {
        return Err(CliError::config("t_start", "must be > 0 for log spacing"));
    }
    if spacing == Spacing::Linear && include_zero && start > 0.0 {
        return Err(CliError::config("include_zero", "only supported with log spacing"));
    }
    Ok(TimeGrid { start, end, count, spacing, include_zero })
}
