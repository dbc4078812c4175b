//! Experiment configuration: JSON documents, validation and presets.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::checkpoint::Checkpoint;
use crate::constants::Params;
use crate::diagnostics::DiagnosticsConfig;
use crate::error::{Error, Result};
use crate::evolve::StepperConfig;
use crate::spectral::{FrontState, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub alpha: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_theta() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub length: f64,
}

/// Initial profile families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `a exp(-(x - c)²/(2w²))`; the center defaults to `L/2`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<f64>,
    },
    /// `a cos(2π m x/L)` with integer mode `m`.
    Cosine { amplitude: f64, wavenumber: i64 },
    /// Profile read from a checkpoint file on the same grid.
    File { path: PathBuf },
    /// Random phases on modes `1..=band` with `1/m` amplitudes, scaled so that
    /// `max|φ| = amplitude`; drawn from the config seed.
    Random { amplitude: f64, band: usize },
}

/// What a run computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    /// Time integration with diagnostics.
    #[default]
    Evolve,
    /// Velocity-field cross-check of the contour right-hand side.
    Kinematic {
        /// Offset `h` of the reference shear; defaults to `2(1 + max|φ|)`.
        #[serde(default)]
        offset: Option<f64>,
    },
    /// Symbol sweeps without time stepping.
    ResonanceProbe { alphas: Vec<f64>, xis: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Output directory; the command line may override it.
    pub dir: Option<PathBuf>,
    pub diagnostics_file: String,
    pub summary_file: String,
    pub checkpoint_prefix: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            diagnostics_file: "diagnostics.ndjson".into(),
            summary_file: "summary.json".into(),
            checkpoint_prefix: "checkpoint".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamSpec,
    pub grid: GridSpec,
    pub initial: InitialCondition,
    #[serde(default)]
    pub task: Task,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

const TOP_KEYS: &[&str] = &[
    "params", "grid", "initial", "task", "stepper", "diagnostics", "output", "seed",
];
const PARAM_KEYS: &[&str] = &["alpha", "theta"];
const GRID_KEYS: &[&str] = &["n_points", "length"];
const STEPPER_KEYS: &[&str] = &[
    "dt", "t_end", "rhs_mode", "quadrature", "slope_guard", "checkpoint_every",
];
const QUAD_KEYS: &[&str] = &["inner_cutoff", "growth_ratio", "truncation", "tolerance", "order"];
const DIAG_KEYS: &[&str] = &[
    "sample_interval", "sobolev_s", "r", "decay_window", "wrap_horizon", "phase_probes",
];
const OUTPUT_KEYS: &[&str] = &["dir", "diagnostics_file", "summary_file", "checkpoint_prefix"];

fn initial_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "gaussian" => &["kind", "amplitude", "width", "center"],
        "cosine" => &["kind", "amplitude", "wavenumber"],
        "file" => &["kind", "path"],
        "random" => &["kind", "amplitude", "band"],
        _ => return None,
    })
}

fn task_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "evolve" => &["kind"],
        "kinematic" => &["kind", "offset"],
        "resonance_probe" => &["kind", "alphas", "xis"],
        _ => return None,
    })
}

/// Removes keys not in `known` from the object at `path`, recording each.
fn strip_unknown(value: &mut Value, path: &str, known: &[&str], errs: &mut Vec<String>) {
    if let Value::Object(map) = value {
        let unknown: Vec<String> = map.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect();
        for k in unknown {
            errs.push(format!("unknown key {path}{k}"));
            map.remove(&k);
        }
    }
}

fn strip_tagged(
    value: &mut Value,
    path: &str,
    keys: fn(&str) -> Option<&'static [&'static str]>,
    errs: &mut Vec<String>,
) {
    let kind = value.get("kind").and_then(Value::as_str).map(str::to_string);
    match kind {
        Some(k) => match keys(&k) {
            Some(known) => strip_unknown(value, path, known, errs),
            None => errs.push(format!("unknown {path}kind {k:?}")),
        },
        None => {
            if value.is_object() {
                errs.push(format!("{path}kind is required"));
            }
        }
    }
}

/// Parses and validates a JSON document, reporting every violation found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Validation(vec![format!("not a JSON document: {e}")]))?;
    if !value.is_object() {
        return Err(Error::Validation(vec!["config must be a JSON object".into()]));
    }
    let mut errs = Vec::new();
    strip_unknown(&mut value, "", TOP_KEYS, &mut errs);
    for (key, known) in [
        ("params", PARAM_KEYS),
        ("grid", GRID_KEYS),
        ("stepper", STEPPER_KEYS),
        ("diagnostics", DIAG_KEYS),
        ("output", OUTPUT_KEYS),
    ] {
        if let Some(v) = value.get_mut(key) {
            strip_unknown(v, &format!("{key}."), known, &mut errs);
        }
    }
    if let Some(q) = value.get_mut("stepper").and_then(|s| s.get_mut("quadrature")) {
        strip_unknown(q, "stepper.quadrature.", QUAD_KEYS, &mut errs);
    }
    if let Some(v) = value.get_mut("initial") {
        strip_tagged(v, "initial.", initial_keys, &mut errs);
    }
    if let Some(v) = value.get_mut("task") {
        strip_tagged(v, "task.", task_keys, &mut errs);
    }
    for key in ["params", "grid", "initial"] {
        if value.get(key).is_none() {
            errs.push(format!("missing required section {key}"));
        }
    }
    let structural = errs.iter().any(|e| !e.starts_with("unknown key"));
    if structural {
        return Err(Error::Validation(errs));
    }
    match serde_json::from_value::<RunConfig>(value) {
        Ok(cfg) => {
            errs.extend(cfg.violations());
            if errs.is_empty() {
                Ok(cfg)
            } else {
                Err(Error::Validation(errs))
            }
        }
        Err(e) => {
            errs.push(e.to_string());
            Err(Error::Validation(errs))
        }
    }
}

fn in_alpha_range(a: f64) -> bool {
    a.is_finite() && a > 1.0 && a < 2.0
}

impl RunConfig {
    /// Every constraint violation, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !in_alpha_range(self.params.alpha) {
            errs.push(format!(
                "params.alpha must lie in the open interval (1, 2), got {}",
                self.params.alpha
            ));
        }
        if !self.params.theta.is_finite() {
            errs.push(format!("params.theta must be finite, got {}", self.params.theta));
        }
        let n = self.grid.n_points;
        if n % 2 != 0 || n < 8 {
            errs.push(format!("grid.n_points must be even and >= 8, got {n}"));
        }
        if !(self.grid.length.is_finite() && self.grid.length > 0.0) {
            errs.push(format!("grid.length must be positive, got {}", self.grid.length));
        }
        match &self.initial {
            InitialCondition::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !amplitude.is_finite() {
                    errs.push("initial.amplitude must be finite".into());
                }
                if !(width.is_finite() && *width > 0.0) {
                    errs.push(format!("initial.width must be positive, got {width}"));
                }
                if center.is_some_and(|c| !c.is_finite()) {
                    errs.push("initial.center must be finite".into());
                }
            }
            InitialCondition::Cosine {
                amplitude,
                wavenumber,
            } => {
                if !amplitude.is_finite() {
                    errs.push("initial.amplitude must be finite".into());
                }
                if *wavenumber < 0 || (*wavenumber as usize) >= n / 2 {
                    errs.push(format!(
                        "initial.wavenumber must lie in 0..{} (below Nyquist), got {wavenumber}",
                        n / 2
                    ));
                }
            }
            InitialCondition::File { path } => {
                if path.as_os_str().is_empty() {
                    errs.push("initial.path must not be empty".into());
                }
            }
            InitialCondition::Random { amplitude, band } => {
                if !amplitude.is_finite() {
                    errs.push("initial.amplitude must be finite".into());
                }
                if *band == 0 || *band >= n / 2 {
                    errs.push(format!("initial.band must lie in 1..{}, got {band}", n / 2));
                }
            }
        }
        match &self.task {
            Task::Evolve => {}
            Task::Kinematic { offset } => {
                if offset.is_some_and(|h| !h.is_finite()) {
                    errs.push("task.offset must be finite".into());
                }
            }
            Task::ResonanceProbe { alphas, xis } => {
                if alphas.is_empty() || alphas.iter().any(|a| !in_alpha_range(*a)) {
                    errs.push("task.alphas must be a non-empty list in (1, 2)".into());
                }
                if xis.is_empty() || xis.iter().any(|x| !x.is_finite() || *x == 0.0) {
                    errs.push("task.xis must be a non-empty list of finite nonzero values".into());
                }
            }
        }
        if let Ok(grid) = self.grid() {
            errs.extend(self.stepper.validate(&grid));
        }
        errs.extend(self.diagnostics.validate());
        for (name, f) in [
            ("diagnostics_file", &self.output.diagnostics_file),
            ("summary_file", &self.output.summary_file),
            ("checkpoint_prefix", &self.output.checkpoint_prefix),
        ] {
            if f.is_empty() || f.contains('/') {
                errs.push(format!("output.{name} must be a plain file name, got {f:?}"));
            }
        }
        errs
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.params.alpha, self.params.theta)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n_points, self.grid.length)
    }

    /// Initial profile at `t = 0`.
    pub fn initial_state(&self) -> Result<FrontState> {
        let grid = self.grid()?;
        let l = grid.length();
        Ok(match &self.initial {
            InitialCondition::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let c = center.unwrap_or(0.5 * l);
                let w2 = 2.0 * width * width;
                FrontState::from_fn(grid, 0.0, |x| amplitude * (-(x - c).powi(2) / w2).exp())
            }
            InitialCondition::Cosine {
                amplitude,
                wavenumber,
            } => {
                let k = 2.0 * PI * *wavenumber as f64 / l;
                FrontState::from_fn(grid, 0.0, |x| amplitude * (k * x).cos())
            }
            InitialCondition::File { path } => {
                let ck = Checkpoint::read(path)?;
                if !ck.state.grid().same_as(&grid) {
                    return Err(Error::GridMismatch(format!(
                        "initial profile {} does not match the configured grid",
                        path.display()
                    )));
                }
                ck.state.with_time(0.0)
            }
            InitialCondition::Random { amplitude, band } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let modes: Vec<(f64, f64)> = (1..=*band)
                    .map(|m| (rng.gen_range(0.0..2.0 * PI), 1.0 / m as f64))
                    .collect();
                let raw = FrontState::from_fn(grid, 0.0, |x| {
                    modes
                        .iter()
                        .enumerate()
                        .map(|(i, (ph, a))| a * (2.0 * PI * (i + 1) as f64 * x / l + ph).cos())
                        .sum()
                });
                let m = raw.max_abs();
                raw.scaled(amplitude / m)
            }
        })
    }

    /// Canonical JSON with every default filled in.
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact canonical JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub const PRESET_NAMES: &[&str] = &["conservation", "decay", "resonance-probe", "kinematic"];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "conservation" => include_str!("../presets/conservation.json"),
        "decay" => include_str!("../presets/decay.json"),
        "resonance-probe" => include_str!("../presets/resonance-probe.json"),
        "kinematic" => include_str!("../presets/kinematic.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Validation(vec![format!(
            "unknown preset {name:?}; available: {}",
            PRESET_NAMES.join(", ")
        )])
    })?;
    parse_config(text)
}
