//! Norms, functionals and decay fits monitored along a run.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{Params, Z_NORM_R};
use crate::error::{Error, Result};
use crate::rhs::linear_frequency;
use crate::spectral::{derivative, lp_block_energy, lp_range, FrontState};
use crate::symbols::z_weight;

/// Version tag of the diagnostics record layout.
pub const RECORD_VERSION: u32 = 1;

/// `‖φ‖_{H^s}` with `H⁰ = L²(0, L)`: `(L Σ (1+ξ²)^s |c_ξ|²)^{1/2}`.
pub fn sobolev_norm(state: &FrontState, s: f64) -> f64 {
    let grid = state.grid();
    let sum: f64 = state
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let xi = grid.wavenumber(j);
            (1.0 + xi * xi).powf(s) * c.norm_sqr()
        })
        .sum();
    (grid.length() * sum).sqrt()
}

/// `max_ξ (|ξ| + |ξ|^{r+3}) |f̂(ξ)|` with `f̂ ≈ c_ξ L/(2π)`.
pub fn z_norm(state: &FrontState, r: u32) -> f64 {
    let grid = state.grid();
    let nyq = grid.nyquist_index();
    state
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != nyq)
        .map(|(j, c)| z_weight(grid.wavenumber(j), r) * c.norm() * grid.density_factor())
        .fold(0.0, f64::max)
}

/// `[max|φ|, max|φ_x|, …, max|∂_x^{j_max} φ|]`.
pub fn sup_derivative_norms(state: &FrontState, j_max: u32) -> Vec<f64> {
    (0..=j_max)
        .map(|j| {
            if j == 0 {
                state.max_abs()
            } else {
                derivative(state, j).max_abs()
            }
        })
        .collect()
}

/// `Sφ = (2-α)tφ_t + xφ_x` with `x` centered on the domain midpoint.
pub fn scaling_field(state: &FrontState, rhs_value: &FrontState, params: &Params) -> Result<FrontState> {
    if rhs_value.time() != state.time() {
        return Err(Error::InvalidInput(format!(
            "time mismatch: state at {}, rhs at {}",
            state.time(),
            rhs_value.time()
        )));
    }
    if !state.grid().same_as(rhs_value.grid()) {
        return Err(Error::GridMismatch("scaling field operands".into()));
    }
    let grid = *state.grid();
    let dx = derivative(state, 1);
    let c = (2.0 - params.alpha) * state.time();
    let values = grid
        .centered_xs()
        .into_iter()
        .zip(dx.values())
        .zip(rhs_value.values())
        .map(|((x, d), r)| c * r + x * d)
        .collect();
    FrontState::new(grid, state.time(), values)
}

/// `e^{tL}(x ∂_x φ₀)`: the scaling field of a linear solution, obtained from the
/// fact that `S` commutes with `∂_t - L`. Requires `xφ₀'` to be effectively
/// periodic.
pub fn linear_scaling_field(initial: &FrontState, t: f64, params: &Params) -> FrontState {
    let grid = *initial.grid();
    let d = derivative(initial, 1);
    let xd: Vec<f64> = grid
        .centered_xs()
        .into_iter()
        .zip(d.values())
        .map(|(x, v)| x * v)
        .collect();
    let s0 = FrontState::new(grid, initial.time(), xd).expect("same grid");
    let coeffs: Vec<Complex64> = s0
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, c)| c * Complex64::from_polar(1.0, linear_frequency(grid.wavenumber(j), params) * t))
        .collect();
    FrontState::from_spectrum(grid, initial.time() + t, coeffs)
}

/// Least-squares power law `‖φ_x‖_∞ ≈ C (t+1)^{slope}` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t1: f64,
    pub t2: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln` coordinates.
    pub residual: f64,
    pub samples: usize,
}

pub const DECAY_FIT_MIN_SAMPLES: usize = 10;

pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t1, t2) = window;
    if !(t1 >= 1.0 && t2 > t1) {
        return Err(Error::InvalidInput(format!(
            "decay window must satisfy 1 <= t1 < t2, got [{t1}, {t2}]"
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t1 && *t <= t2)
        .map(|&(t, v)| ((t + 1.0).ln(), v.ln()))
        .collect();
    if pts.len() < DECAY_FIT_MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "decay fit needs at least {DECAY_FIT_MIN_SAMPLES} samples in [{t1}, {t2}], got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidInput("decay series must be positive".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        t1,
        t2,
        slope,
        intercept,
        residual,
        samples: pts.len(),
    })
}

/// Linear group speed `|ω'(ξ)| = (2-α)A|ξ|^{1-α}`.
pub fn group_speed(xi: f64, params: &Params) -> f64 {
    (2.0 - params.alpha) * params.a * params.theta.abs() * xi.abs().powf(1.0 - params.alpha)
}

/// Time for the fastest significant wave to cross half the domain.
///
/// Significance is measured in slope energy `ξ²|φ̂|²`, the content that
/// `‖φ_x‖_∞` sees: the lowest frequency `ξ_lo` below which at most
/// `energy_fraction` of it lies sets the fastest relevant group speed.
pub fn wrap_horizon(state: &FrontState, params: &Params, energy_fraction: f64) -> f64 {
    let grid = state.grid();
    let spec = state.spectrum();
    let half = grid.nyquist_index();
    let energy: Vec<f64> = (1..half)
        .map(|m| {
            let xi = grid.wavenumber(m);
            xi * xi * (spec[m].norm_sqr() + spec[grid.n_points() - m].norm_sqr())
        })
        .collect();
    let total: f64 = energy.iter().sum();
    if total == 0.0 {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    let mut m_lo = 1;
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc > energy_fraction * total {
            m_lo = i + 1;
            break;
        }
    }
    let xi = m_lo as f64 * grid.dxi();
    0.5 * grid.length() / group_speed(xi, params)
}

/// Which functionals a record carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Simulation-time spacing of records.
    pub sample_interval: f64,
    #[serde(default = "default_sobolev")]
    pub sobolev_s: Vec<f64>,
    #[serde(default = "default_r")]
    pub r: u32,
    /// Decay-fit window; the default is `[2, min(t_end, 0.3 t_wrap)]`.
    #[serde(default)]
    pub decay_window: Option<(f64, f64)>,
    /// Wrap-around horizon; estimated from the initial spectrum when absent.
    #[serde(default)]
    pub wrap_horizon: Option<f64>,
    /// Frequencies at which the scattering phase is tracked.
    #[serde(default)]
    pub phase_probes: Vec<f64>,
}

fn default_sobolev() -> Vec<f64> {
    vec![0.0, 2.0, 4.0]
}

fn default_r() -> u32 {
    Z_NORM_R
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            sample_interval: 1.0,
            sobolev_s: default_sobolev(),
            r: default_r(),
            decay_window: None,
            wrap_horizon: None,
            phase_probes: Vec::new(),
        }
    }
}

impl DiagnosticsConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            errs.push(format!(
                "diagnostics.sample_interval must be positive, got {}",
                self.sample_interval
            ));
        }
        if self.sobolev_s.iter().any(|s| !s.is_finite() || *s < 0.0) {
            errs.push("diagnostics.sobolev_s entries must be finite and >= 0".into());
        }
        if self.r > 16 {
            errs.push(format!("diagnostics.r must be at most 16, got {}", self.r));
        }
        if let Some((a, b)) = self.decay_window {
            if !(a >= 1.0 && b > a) {
                errs.push(format!("diagnostics.decay_window must satisfy 1 <= t1 < t2, got [{a}, {b}]"));
            }
        }
        if let Some(w) = self.wrap_horizon {
            if !(w > 0.0) {
                errs.push(format!("diagnostics.wrap_horizon must be positive, got {w}"));
            }
        }
        if self.phase_probes.iter().any(|x| !x.is_finite()) {
            errs.push("diagnostics.phase_probes must be finite".into());
        }
        errs
    }
}

/// One sample of every monitored functional.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub l2_norm: f64,
    pub mean: f64,
    pub sobolev: Vec<(f64, f64)>,
    pub z_norm: f64,
    pub z_r: u32,
    pub sup_dx: Vec<f64>,
    pub scaling_field_hr: f64,
    pub lp_low: f64,
    pub lp_energies: Vec<(i32, f64)>,
    pub max_slope: f64,
}

impl DiagnosticsRecord {
    /// All functionals at `state`; `rhs_value` is `φ_t` at the same time.
    pub fn compute(
        state: &FrontState,
        rhs_value: &FrontState,
        step: usize,
        params: &Params,
        cfg: &DiagnosticsConfig,
    ) -> Result<Self> {
        let sup_dx = sup_derivative_norms(state, cfg.r + 1);
        let s = scaling_field(state, rhs_value, params)?;
        let (k_lo, k_hi) = lp_range(state.grid());
        let grid = state.grid();
        let lp_low = (grid.length() * state.spectrum()[0].norm_sqr()).sqrt();
        Ok(Self {
            t: state.time(),
            step,
            l2_norm: state.l2_norm(),
            mean: state.mean(),
            sobolev: cfg.sobolev_s.iter().map(|&s| (s, sobolev_norm(state, s))).collect(),
            z_norm: z_norm(state, cfg.r),
            z_r: cfg.r,
            max_slope: sup_dx[1],
            sup_dx,
            scaling_field_hr: sobolev_norm(&s, cfg.r as f64),
            lp_low,
            lp_energies: (k_lo + 1..=k_hi).map(|k| (k, lp_block_energy(state, k))).collect(),
        })
    }

    /// Flat key-value pairs in a fixed order.
    pub fn fields(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("t".to_string(), self.t),
            ("step".to_string(), self.step as f64),
            ("l2_norm".to_string(), self.l2_norm),
            ("mean".to_string(), self.mean),
            ("z_norm".to_string(), self.z_norm),
            ("max_slope".to_string(), self.max_slope),
            ("scaling_field_hr".to_string(), self.scaling_field_hr),
        ];
        out.extend(self.sobolev.iter().map(|(s, v)| (format!("h_s{s}"), *v)));
        out.extend(self.sup_dx.iter().enumerate().map(|(j, v)| (format!("sup_dx{j}"), *v)));
        out.push(("lp_low".to_string(), self.lp_low));
        out.extend(self.lp_energies.iter().map(|(k, v)| (format!("lp_k{k}"), *v)));
        out
    }

    /// One NDJSON line (without the newline).
    pub fn to_json_line(&self) -> String {
        let mut s = String::from("{");
        let _ = write!(s, "\"record_version\":{RECORD_VERSION}");
        for (k, v) in self.fields() {
            let _ = write!(s, ",\"{k}\":");
            if k == "step" {
                let _ = write!(s, "{}", self.step);
            } else {
                s.push_str(&format_f64(v));
            }
        }
        s.push('}');
        s
    }
}

/// Decimal with 17 significant digits; non-finite values become `null`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}
