//! Time integration with the exact linear propagator.
//!
//! The linear part `φ̂_t = iω(ξ)φ̂`, `ω(ξ) = -ΘAξ|ξ|^{1-α}`, is integrated
//! exactly; the nonlinear part is advanced by classical RK4 in the rotating
//! frame `ĥ = e^{-iωt}φ̂` (Lawson's integrating-factor scheme). With `Θ = -1`
//! this frame is `ĥ = e^{-iAtξ|ξ|^{1-α}}φ̂`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Params;
use crate::error::{Error, Result};
use crate::rhs::{linear_frequency, nonlinear_term, QuadratureSpec, RhsMode};
use crate::spectral::{derivative, FrontState, Grid};

/// Default small-slope guard on `max|φ_x|`.
pub const DEFAULT_SLOPE_GUARD: f64 = 0.5;

/// Fixed step, or the automatic choice `min(0.5, 1/(10‖φ₀‖_{W^{1,∞}} ξ_max^{3-α}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub dt: DtPolicy,
    pub t_end: f64,
    pub rhs_mode: RhsMode,
    pub quadrature: QuadratureSpec,
    pub slope_guard: f64,
    /// Checkpoint every this many steps; `None` disables checkpoints.
    pub checkpoint_every: Option<usize>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self::new(DtPolicy::Auto, 0.0, RhsMode::Contour)
    }
}

impl StepperConfig {
    pub fn new(dt: DtPolicy, t_end: f64, rhs_mode: RhsMode) -> Self {
        Self {
            dt,
            t_end,
            rhs_mode,
            quadrature: QuadratureSpec::default(),
            slope_guard: DEFAULT_SLOPE_GUARD,
            checkpoint_every: None,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Vec<String> {
        let mut errs = Vec::new();
        if let DtPolicy::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                errs.push(format!("stepper.dt must be positive and finite, got {dt}"));
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            errs.push(format!("stepper.t_end must be finite and >= 0, got {}", self.t_end));
        }
        if !(self.slope_guard > 0.0) {
            errs.push(format!(
                "stepper.slope_guard must be positive, got {}",
                self.slope_guard
            ));
        }
        if self.checkpoint_every == Some(0) {
            errs.push("stepper.checkpoint_every must be at least 1".into());
        }
        if let Err(Error::Validation(v)) = self.quadrature.validate(grid) {
            errs.extend(v);
        }
        errs
    }
}

/// `‖φ‖_{W^{1,∞}} = max|φ| + max|φ_x|`.
pub fn w1_inf_norm(state: &FrontState) -> f64 {
    state.max_abs() + derivative(state, 1).max_abs()
}

/// Step size from the policy for the given initial data.
pub fn resolve_dt(policy: DtPolicy, initial: &FrontState, params: &Params) -> f64 {
    match policy {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Auto => {
            let w = w1_inf_norm(initial);
            let xi = initial.grid().xi_max();
            let bound = 1.0 / (10.0 * w * xi.powf(3.0 - params.alpha));
            if bound.is_finite() {
                bound.min(0.5)
            } else {
                0.5
            }
        }
    }
}

/// Spectrum of the rotating-frame profile `ĥ = e^{-iωt}φ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct HState {
    pub grid: Grid,
    pub time: f64,
    pub spectrum: Vec<Complex64>,
}

impl HState {
    pub fn from_front(state: &FrontState, params: &Params) -> Self {
        let grid = *state.grid();
        let t = state.time();
        let spectrum = rotate(state.spectrum(), &grid, -t, params);
        Self {
            grid,
            time: t,
            spectrum,
        }
    }

    pub fn to_front(&self, params: &Params) -> FrontState {
        let coeffs = rotate(&self.spectrum, &self.grid, self.time, params);
        FrontState::from_spectrum(self.grid, self.time, coeffs)
    }
}

/// Multiplies each mode by `e^{iω(ξ)τ}`.
fn rotate(coeffs: &[Complex64], grid: &Grid, tau: f64, params: &Params) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == grid.nyquist_index() {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::from_polar(1.0, linear_frequency(grid.wavenumber(j), params) * tau)
            }
        })
        .collect()
}

/// Exact linear flow over `dt`.
pub fn propagate_linear(state: &FrontState, dt: f64, params: &Params) -> FrontState {
    if dt == 0.0 {
        return state.clone();
    }
    let grid = *state.grid();
    let coeffs = rotate(state.spectrum(), &grid, dt, params);
    FrontState::from_spectrum(grid, state.time() + dt, coeffs)
}

fn combine(terms: &[(f64, &[Complex64])]) -> Vec<Complex64> {
    let n = terms[0].1.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (w, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x * *w;
        }
    }
    out
}

/// One step with the configured mode, guard and step size.
pub fn step(state: &FrontState, cfg: &StepperConfig, params: &Params) -> Result<FrontState> {
    let dt = resolve_dt(cfg.dt, state, params);
    step_by(state, dt, params, cfg.rhs_mode, &cfg.quadrature, cfg.slope_guard)
}

/// One Lawson RK4 step of size `dt` (negative `dt` integrates backward).
pub fn step_by(
    state: &FrontState,
    dt: f64,
    params: &Params,
    mode: RhsMode,
    quad: &QuadratureSpec,
    slope_guard: f64,
) -> Result<FrontState> {
    let t = state.time();
    if !state.is_finite() {
        return Err(Error::Numerical {
            time: t,
            context: "non-finite front before step".into(),
        });
    }
    let slope = derivative(state, 1).max_abs();
    if slope > slope_guard {
        return Err(Error::Blowup {
            time: t,
            max_slope: slope,
        });
    }
    let grid = *state.grid();
    let e = |c: &[Complex64], tau: f64| rotate(c, &grid, tau, params);
    let nl = |c: Vec<Complex64>, time: f64| -> Result<Vec<Complex64>> {
        let s = FrontState::from_spectrum(grid, time, c);
        Ok(nonlinear_term(&s, params, mode, quad)?.spectrum().to_vec())
    };
    let phi = state.spectrum();
    let half = 0.5 * dt;
    let k1 = nl(phi.to_vec(), t)?;
    let e_half_phi = e(phi, half);
    let k2 = nl(
        e(&combine(&[(1.0, phi), (half, &k1)]), half),
        t + half,
    )?;
    let k3 = nl(combine(&[(1.0, &e_half_phi), (half, &k2)]), t + half)?;
    let e_full_phi = e(phi, dt);
    let k4 = nl(
        combine(&[(1.0, &e_full_phi), (dt, &e(&k3, half))]),
        t + dt,
    )?;
    let k1e = e(&k1, dt);
    let k23 = e(&combine(&[(1.0, &k2), (1.0, &k3)]), half);
    let next = combine(&[
        (1.0, &e_full_phi),
        (dt / 6.0, &k1e),
        (dt / 3.0, &k23),
        (dt / 6.0, &k4),
    ]);
    let out = FrontState::from_spectrum(grid, t + dt, next);
    if !out.is_finite() {
        return Err(Error::Numerical {
            time: t + dt,
            context: "non-finite front after step".into(),
        });
    }
    Ok(out)
}

/// Receives the initial state (step 0) and every completed step.
pub trait StepObserver {
    fn observe(&mut self, state: &FrontState, step: usize) -> Result<()>;

    /// Called after `observe` on steps that hit the checkpoint cadence.
    fn checkpoint(&mut self, _state: &FrontState, _step: usize) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(&FrontState, usize) -> Result<()>> StepObserver for F {
    fn observe(&mut self, state: &FrontState, step: usize) -> Result<()> {
        self(state, step)
    }
}

/// Step count and uniform step size covering `[t0, t0 + t_end]` exactly.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end == 0.0 {
        return (0, dt);
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

/// Advances `initial` by `cfg.t_end`, reporting each completed step.
pub fn run(
    initial: &FrontState,
    cfg: &StepperConfig,
    params: &Params,
    observer: &mut dyn StepObserver,
) -> Result<FrontState> {
    let dt0 = resolve_dt(cfg.dt, initial, params);
    let (n, dt) = step_plan(cfg.t_end, dt0);
    observer.observe(initial, 0)?;
    let mut state = initial.clone();
    for k in 1..=n {
        state = step_by(&state, dt, params, cfg.rhs_mode, &cfg.quadrature, cfg.slope_guard)?;
        observer.observe(&state, k)?;
        if cfg.checkpoint_every.is_some_and(|every| k % every == 0) {
            observer.checkpoint(&state, k)?;
        }
    }
    Ok(state)
}
