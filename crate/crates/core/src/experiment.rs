//! Run execution: stepping with diagnostics, the velocity cross-check and
//! symbol sweeps, with every output stamped with the run conventions.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::checkpoint::{Checkpoint, BETA_NORMALIZATION, SIGN_CONVENTION, X_CENTERING};
use crate::config::{RunConfig, Task};
use crate::constants::{Params, P0, P1, THEORY_SOBOLEV_S};
use crate::contourfield::{kinematic_residual, FrontGeometry};
use crate::diagnostics::{decay_fit, format_f64, wrap_horizon, DecayFit, DiagnosticsRecord, RECORD_VERSION};
use crate::error::{Error, Result};
use crate::evolve::{resolve_dt, run, step_plan, HState, StepObserver};
use crate::rhs::{full_rhs, RhsMode};
use crate::spectral::{derivative, FrontState};
use crate::symbols::{phase_phi, resonance_ratio, t1_prime_diagonal, ScatteringPhase};

pub const OUTPUT_FORMAT_VERSION: u32 = 1;
/// Share of slope energy allowed below the frequency that sets the wrap horizon.
pub const WRAP_ENERGY_FRACTION: f64 = 0.01;
/// Fraction of the wrap horizon used by the default decay window.
pub const WRAP_WINDOW_FRACTION: f64 = 0.3;
/// Start of the default decay window.
pub const DEFAULT_DECAY_START: f64 = 2.0;

/// Convention flags and identity carried by every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stamp {
    pub format_version: u32,
    pub config_hash: String,
    pub alpha: f64,
    pub theta: f64,
    pub sign_convention: &'static str,
    pub beta_normalization: &'static str,
    pub x_centering: &'static str,
}

impl Stamp {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            format_version: OUTPUT_FORMAT_VERSION,
            config_hash: cfg.hash(),
            alpha: cfg.params.alpha,
            theta: cfg.params.theta,
            sign_convention: SIGN_CONVENTION,
            beta_normalization: BETA_NORMALIZATION,
            x_centering: X_CENTERING,
        }
    }
}

/// Phase drift of one probed mode over the last half of the decay window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseProbe {
    pub requested_xi: f64,
    pub xi: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Total variation of `arg ĥ(ξ,t)`.
    pub h_variation: f64,
    /// Total variation of `arg v̂(ξ,t)`, `v̂ = e^{iΘ}ĥ`.
    pub v_variation: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSummary {
    pub rhs_mode: RhsMode,
    pub steps: usize,
    pub dt: f64,
    pub t_final: f64,
    pub records: usize,
    pub l2_initial: f64,
    pub l2_final: f64,
    /// `max_t |‖φ(t)‖ - ‖φ(0)‖| / ‖φ(0)‖` over every step.
    pub l2_drift: f64,
    /// `max_t |mean φ(t) - mean φ(0)|` over every step.
    pub mean_drift: f64,
    /// `max_t |‖φ(t)‖_{H⁴} / ‖φ(0)‖_{H⁴} - 1|` over the records; absent when `s = 4` is not sampled.
    pub h4_growth: Option<f64>,
    pub max_slope_initial: f64,
    pub max_slope_peak: f64,
    pub max_slope_ratio: f64,
    /// `(t, max|φ_x|)` at the record times.
    pub max_slope_history: Vec<(f64, f64)>,
    pub wrap_horizon: f64,
    pub decay_window: (f64, f64),
    pub decay_fit: Option<DecayFit>,
    pub decay_fit_error: Option<String>,
    pub phase_probes: Vec<PhaseProbe>,
    pub checkpoints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinematicSummary {
    pub offset: f64,
    pub residual: f64,
    pub rhs_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    pub alpha: f64,
    pub xi: f64,
    /// Leading coefficient of `T₁'/Φ` at the space-resonant point.
    pub ratio: f64,
    pub t1_diagonal: f64,
    /// `Φ(ξ,ξ,ξ)`, zero at the resonance.
    pub phase_at_resonance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSummary {
    Evolve(EvolveSummary),
    Kinematic(KinematicSummary),
    ResonanceProbe { rows: Vec<ResonanceRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    #[serde(flatten)]
    pub stamp: Stamp,
    pub result: TaskSummary,
    pub config: RunConfig,
}

/// Paths of the files a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub dir: PathBuf,
    pub diagnostics: PathBuf,
    pub summary: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

pub fn failure_file_name() -> &'static str {
    "failure.json"
}

/// Runs `cfg`, writing into `out_dir`. On failure a `failure.json` record is
/// written next to the partial outputs and the error is returned.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<(RunSummary, RunOutputs)> {
    let errs = cfg.violations();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    fs::create_dir_all(out_dir)?;
    let stamp = Stamp::new(cfg);
    match execute(cfg, &stamp, out_dir) {
        Ok(done) => Ok(done),
        Err(e) => {
            let mut record = json!({
                "status": "failed",
                "error_kind": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            if let Some(obj) = record.as_object_mut() {
                if let Value::Object(s) = serde_json::to_value(&stamp)? {
                    obj.extend(s);
                }
                match &e {
                    Error::Blowup { time, max_slope } => {
                        obj.insert("time".into(), json!(time));
                        obj.insert("max_slope".into(), json!(max_slope));
                    }
                    Error::Numerical { time, .. } => {
                        obj.insert("time".into(), json!(time));
                    }
                    _ => {}
                }
            }
            let text = serde_json::to_string_pretty(&record)?;
            fs::write(out_dir.join(failure_file_name()), text + "\n")?;
            Err(e)
        }
    }
}

fn meta_line(cfg: &RunConfig, stamp: &Stamp, params: &Params) -> Result<String> {
    let mut meta = json!({
        "kind": "meta",
        "record_version": RECORD_VERSION,
        "constants": {
            "A": params.a,
            "A_prime": params.a_prime,
            "C_prime": params.c_prime,
            "G_alpha": params.g_alpha,
            "p0": P0,
            "p1": P1,
            "theory_sobolev_s": THEORY_SOBOLEV_S,
        },
        "config": serde_json::to_value(cfg)?,
    });
    if let (Some(obj), Value::Object(s)) = (meta.as_object_mut(), serde_json::to_value(stamp)?) {
        obj.extend(s);
    }
    Ok(serde_json::to_string(&meta)?)
}

fn execute(cfg: &RunConfig, stamp: &Stamp, out_dir: &Path) -> Result<(RunSummary, RunOutputs)> {
    let params = cfg.params()?;
    let diag_path = out_dir.join(&cfg.output.diagnostics_file);
    let mut out = BufWriter::new(File::create(&diag_path)?);
    writeln!(out, "{}", meta_line(cfg, stamp, &params)?)?;
    let mut checkpoints = Vec::new();
    let result = match &cfg.task {
        Task::Evolve => TaskSummary::Evolve(evolve_task(cfg, stamp, &params, out_dir, &mut out, &mut checkpoints)?),
        Task::Kinematic { offset } => {
            let k = kinematic_task(cfg, &params, *offset)?;
            writeln!(
                out,
                "{{\"record_version\":{RECORD_VERSION},\"offset\":{},\"residual\":{},\"rhs_sup\":{}}}",
                format_f64(k.offset),
                format_f64(k.residual),
                format_f64(k.rhs_sup)
            )?;
            TaskSummary::Kinematic(k)
        }
        Task::ResonanceProbe { alphas, xis } => {
            let rows = resonance_task(alphas, xis)?;
            for r in &rows {
                writeln!(
                    out,
                    "{{\"record_version\":{RECORD_VERSION},\"alpha\":{},\"xi\":{},\"ratio\":{},\"t1_diagonal\":{},\"phase_at_resonance\":{}}}",
                    format_f64(r.alpha),
                    format_f64(r.xi),
                    format_f64(r.ratio),
                    format_f64(r.t1_diagonal),
                    format_f64(r.phase_at_resonance)
                )?;
            }
            TaskSummary::ResonanceProbe { rows }
        }
    };
    out.flush()?;
    let summary = RunSummary {
        status: "ok",
        stamp: stamp.clone(),
        result,
        config: cfg.clone(),
    };
    let summary_path = out_dir.join(&cfg.output.summary_file);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok((
        summary,
        RunOutputs {
            dir: out_dir.to_path_buf(),
            diagnostics: diag_path,
            summary: summary_path,
            checkpoints,
        },
    ))
}

fn kinematic_task(cfg: &RunConfig, params: &Params, offset: Option<f64>) -> Result<KinematicSummary> {
    let state = cfg.initial_state()?;
    let quad = &cfg.stepper.quadrature;
    let phi_t = full_rhs(&state, params, RhsMode::Contour, quad)?;
    let geom = match offset {
        Some(h) => FrontGeometry::new(state, h, *params)?,
        None => FrontGeometry::with_default_offset(state, *params)?,
    };
    let residual = kinematic_residual(&geom, &phi_t, quad)?;
    Ok(KinematicSummary {
        offset: geom.h(),
        residual,
        rhs_sup: phi_t.max_abs(),
    })
}

fn resonance_task(alphas: &[f64], xis: &[f64]) -> Result<Vec<ResonanceRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &xi in xis {
            rows.push(ResonanceRow {
                alpha,
                xi,
                ratio: resonance_ratio(xi, alpha)?,
                t1_diagonal: t1_prime_diagonal(xi, alpha),
                phase_at_resonance: phase_phi(xi, xi, xi, alpha),
            });
        }
    }
    Ok(rows)
}

/// Principal value of an angle difference.
fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn total_variation(angles: &[f64]) -> f64 {
    angles.windows(2).map(|w| wrap_angle(w[1] - w[0]).abs()).sum()
}

struct Tracker<'a, W: Write> {
    cfg: &'a RunConfig,
    params: &'a Params,
    stamp: &'a Stamp,
    out_dir: &'a Path,
    out: &'a mut W,
    record_stride: usize,
    last_step: usize,
    dt: f64,
    l2_0: f64,
    mean_0: f64,
    slope_0: f64,
    l2_drift: f64,
    mean_drift: f64,
    slope_peak: f64,
    h4_0: Option<f64>,
    h4_growth: Option<f64>,
    slope_history: Vec<(f64, f64)>,
    records: usize,
    phase: ScatteringPhase,
    prev_spectrum: Option<Vec<Complex64>>,
    probe_slots: Vec<usize>,
    /// `(t, arg ĥ, arg v̂)` per probe at the record times.
    probe_series: Vec<Vec<(f64, f64, f64)>>,
    checkpoints: &'a mut Vec<PathBuf>,
}

impl<W: Write> Tracker<'_, W> {
    fn record(&mut self, state: &FrontState, step: usize) -> Result<()> {
        let rhs = full_rhs(state, self.params, self.cfg.stepper.rhs_mode, &self.cfg.stepper.quadrature)?;
        let rec = DiagnosticsRecord::compute(state, &rhs, step, self.params, &self.cfg.diagnostics)?;
        writeln!(self.out, "{}", rec.to_json_line())?;
        self.records += 1;
        self.slope_history.push((rec.t, rec.max_slope));
        if let Some(&(_, h4)) = rec.sobolev.iter().find(|(s, _)| *s == 4.0) {
            match self.h4_0 {
                None => {
                    self.h4_0 = Some(h4);
                    self.h4_growth = Some(0.0);
                }
                Some(h0) => {
                    let g = (h4 / h0 - 1.0).abs();
                    self.h4_growth = Some(self.h4_growth.unwrap_or(0.0).max(g));
                }
            }
        }
        if !self.probe_slots.is_empty() {
            let h = HState::from_front(state, self.params);
            let v = self.phase.corrected(&h.spectrum);
            for (series, &slot) in self.probe_series.iter_mut().zip(&self.probe_slots) {
                series.push((state.time(), h.spectrum[slot].arg(), v[slot].arg()));
            }
        }
        Ok(())
    }
}

impl<W: Write> StepObserver for Tracker<'_, W> {
    fn observe(&mut self, state: &FrontState, step: usize) -> Result<()> {
        let slope = derivative(state, 1).max_abs();
        if step == 0 {
            self.l2_0 = state.l2_norm();
            self.mean_0 = state.mean();
            self.slope_0 = slope;
        } else {
            self.l2_drift = self.l2_drift.max((state.l2_norm() - self.l2_0).abs() / self.l2_0);
            self.mean_drift = self.mean_drift.max((state.mean() - self.mean_0).abs());
            if let Some(prev) = &self.prev_spectrum {
                self.phase = self.phase.step(prev, state.grid(), self.dt, self.params)?;
            }
        }
        self.slope_peak = self.slope_peak.max(slope);
        if !self.probe_slots.is_empty() {
            self.prev_spectrum = Some(state.spectrum().to_vec());
        }
        if step % self.record_stride == 0 || step == self.last_step {
            self.record(state, step)?;
        }
        Ok(())
    }

    fn checkpoint(&mut self, state: &FrontState, step: usize) -> Result<()> {
        let name = format!("{}_{step:08}.bin", self.cfg.output.checkpoint_prefix);
        let path = self.out_dir.join(name);
        Checkpoint::new(state, self.params)
            .with_config_hash(&self.stamp.config_hash)
            .write(&path)?;
        self.checkpoints.push(path);
        Ok(())
    }
}

fn evolve_task<W: Write>(
    cfg: &RunConfig,
    stamp: &Stamp,
    params: &Params,
    out_dir: &Path,
    out: &mut W,
    checkpoints: &mut Vec<PathBuf>,
) -> Result<EvolveSummary> {
    let initial = cfg.initial_state()?;
    let grid = *initial.grid();
    let dt0 = resolve_dt(cfg.stepper.dt, &initial, params);
    let (steps, dt) = step_plan(cfg.stepper.t_end, dt0);
    let record_stride = ((cfg.diagnostics.sample_interval / dt).round() as usize).max(1);
    let probe_slots: Vec<usize> = cfg
        .diagnostics
        .phase_probes
        .iter()
        .map(|xi| {
            let m = (xi.abs() / grid.dxi()).round() as usize;
            m.clamp(1, grid.nyquist_index() - 1)
        })
        .collect();
    let wrap = cfg
        .diagnostics
        .wrap_horizon
        .unwrap_or_else(|| wrap_horizon(&initial, params, WRAP_ENERGY_FRACTION));
    let window = cfg.diagnostics.decay_window.unwrap_or((
        DEFAULT_DECAY_START,
        cfg.stepper.t_end.min(WRAP_WINDOW_FRACTION * wrap),
    ));

    let mut tracker = Tracker {
        cfg,
        params,
        stamp,
        out_dir,
        out,
        record_stride,
        last_step: steps,
        dt,
        l2_0: 0.0,
        mean_0: 0.0,
        slope_0: 0.0,
        l2_drift: 0.0,
        mean_drift: 0.0,
        slope_peak: 0.0,
        h4_0: None,
        h4_growth: None,
        slope_history: Vec::new(),
        records: 0,
        phase: ScatteringPhase::new(grid, initial.time()),
        prev_spectrum: None,
        probe_series: vec![Vec::new(); probe_slots.len()],
        probe_slots,
        checkpoints,
    };
    let last = run(&initial, &cfg.stepper, params, &mut tracker)?;
    let final_path = out_dir.join(format!("{}_final.bin", cfg.output.checkpoint_prefix));
    Checkpoint::new(&last, params)
        .with_config_hash(&stamp.config_hash)
        .write(&final_path)?;
    tracker.checkpoints.push(final_path);

    let (decay, decay_err) = match decay_fit(&tracker.slope_history, window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mid = 0.5 * (window.0 + window.1);
    let phase_probes = cfg
        .diagnostics
        .phase_probes
        .iter()
        .zip(&tracker.probe_slots)
        .zip(&tracker.probe_series)
        .map(|((&requested, &slot), series)| {
            let late: Vec<&(f64, f64, f64)> =
                series.iter().filter(|(t, _, _)| *t >= mid && *t <= window.1).collect();
            let hs: Vec<f64> = late.iter().map(|p| p.1).collect();
            let vs: Vec<f64> = late.iter().map(|p| p.2).collect();
            let h_variation = total_variation(&hs);
            let v_variation = total_variation(&vs);
            PhaseProbe {
                requested_xi: requested,
                xi: grid.wavenumber(slot),
                t_start: late.first().map_or(f64::NAN, |p| p.0),
                t_end: late.last().map_or(f64::NAN, |p| p.0),
                h_variation,
                v_variation,
                ratio: v_variation / h_variation,
            }
        })
        .collect();
    Ok(EvolveSummary {
        rhs_mode: cfg.stepper.rhs_mode,
        steps,
        dt,
        t_final: last.time(),
        records: tracker.records,
        l2_initial: tracker.l2_0,
        l2_final: last.l2_norm(),
        l2_drift: tracker.l2_drift,
        mean_drift: tracker.mean_drift,
        h4_growth: tracker.h4_growth,
        max_slope_initial: tracker.slope_0,
        max_slope_peak: tracker.slope_peak,
        max_slope_ratio: tracker.slope_peak / tracker.slope_0,
        max_slope_history: tracker.slope_history,
        wrap_horizon: wrap,
        decay_window: window,
        decay_fit: decay,
        decay_fit_error: decay_err,
        phase_probes,
        checkpoints: tracker
            .checkpoints
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
    })
}
