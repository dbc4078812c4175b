//! Periodic-grid Fourier substrate: grids, front samples, Fourier multipliers,
//! Littlewood–Paley blocks and alias-free cubic products.
//!
//! Spectral coefficients follow `f(x) = sum_m c_m exp(i xi_m x)` with
//! `xi_m = 2 pi m / L`, the discrete counterpart of `f(x) = ∫ f̂(ξ) e^{iξx} dξ`.
//! The continuum density is recovered as `f̂(ξ_m) ≈ c_m L / (2π)`.
//!
//! Every multiplier zeroes the Nyquist mode, so the odd symbol `ξ|ξ|^{1-α}` never
//! acts on the unpaired coefficient.

pub mod fft;
mod littlewood_paley;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use littlewood_paley::{
    lp_block_energy, lp_decomposition, lp_low, lp_project, lp_range, psi, psi_k, psi_le,
    LpDecomposition,
};

/// Uniform periodic grid on `[0, L)` with an even number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || n_points % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid size must be even and >= 8, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Frequency spacing `2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Factor converting discrete coefficients to continuum spectral density.
    pub fn density_factor(&self) -> f64 {
        self.length / (2.0 * PI)
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Coordinates centered on the domain midpoint, in `[-L/2, L/2)`.
    pub fn centered_xs(&self) -> Vec<f64> {
        let half = 0.5 * self.length;
        (0..self.n_points).map(|j| self.x(j) - half).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Signed mode number of FFT slot `j`: `0, 1, …, N/2, -N/2+1, …, -1`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT slot of signed mode `m`, or `None` if `m` is outside `-N/2+1 ..= N/2`.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let n = self.n_points as i64;
        if m > n / 2 || m <= -n / 2 {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + n) as usize })
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 * self.dxi()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.wavenumber(j)).collect()
    }

    /// Largest resolved (non-Nyquist) frequency.
    pub fn xi_max(&self) -> f64 {
        (self.n_points / 2 - 1) as f64 * self.dxi()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(N={}, L={}) vs (N={}, L={})",
                self.n_points, self.length, other.n_points, other.length
            )))
        }
    }
}

/// Front profile samples at a given time, with a lazily derived spectrum.
#[derive(Debug, Clone)]
pub struct FrontState {
    grid: Grid,
    time: f64,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for FrontState {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.time == other.time && self.values == other.values
    }
}

impl FrontState {
    pub fn new(grid: Grid, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            time,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.xs().into_iter().map(f).collect();
        Self {
            grid,
            time,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self::from_fn(grid, time, |_| 0.0)
    }

    /// Builds a state from coefficients in FFT order. The Nyquist slot is dropped.
    pub fn from_spectrum(grid: Grid, time: f64, mut coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n_points(), "spectrum length mismatch");
        coeffs[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        let values = fft::inverse(&coeffs);
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Self {
            grid,
            time,
            values,
            spectrum: cell,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Unvalidated spectrum; use [`transform_forward`] at trust boundaries.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| fft::forward(&self.values))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖φ‖_{L²(0,L)}` by the rectangle rule (exact for trigonometric polynomials).
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> FrontState {
        FrontState::from_fn_values(self.grid, self.time, self.values.iter().map(|v| v * factor))
    }

    pub(crate) fn from_fn_values(grid: Grid, time: f64, it: impl Iterator<Item = f64>) -> Self {
        Self {
            grid,
            time,
            values: it.collect(),
            spectrum: OnceLock::new(),
        }
    }
}

/// Forward transform with input validation.
pub fn transform_forward(state: &FrontState) -> Result<Vec<Complex64>> {
    if let Some(j) = state.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite sample {} at index {j}",
            state.values[j]
        )));
    }
    Ok(state.spectrum().to_vec())
}

pub fn transform_inverse(grid: Grid, time: f64, coeffs: Vec<Complex64>) -> FrontState {
    FrontState::from_spectrum(grid, time, coeffs)
}

/// `‖φ‖_{L²}` from the coefficients (Parseval): `L Σ |c_m|²`.
pub fn l2_norm_spectral(state: &FrontState) -> f64 {
    (state.grid.length() * state.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Applies the symbol `m(ξ)` mode by mode; the Nyquist slot is zeroed.
pub fn apply_multiplier(state: &FrontState, symbol: impl Fn(f64) -> Complex64) -> FrontState {
    let grid = *state.grid();
    let coeffs = state
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, c)| c * symbol(grid.wavenumber(j)))
        .collect();
    FrontState::from_spectrum(grid, state.time(), coeffs)
}

pub fn apply_real_multiplier(state: &FrontState, symbol: impl Fn(f64) -> f64) -> FrontState {
    apply_multiplier(state, |xi| Complex64::new(symbol(xi), 0.0))
}

/// `|ξ|^s` with the zero mode set to 0 for `s ≤ 0`.
pub fn abs_power(xi: f64, s: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(s)
    }
}

/// `sgn(ξ)|ξ|^s`, zero at `ξ = 0`.
pub fn signed_power(xi: f64, s: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi.signum() * xi.abs().powf(s)
    }
}

/// `|∂_x|^s φ`.
pub fn fractional_derivative(state: &FrontState, s: f64) -> FrontState {
    apply_real_multiplier(state, |xi| abs_power(xi, s))
}

/// `∂_x^j φ`.
pub fn derivative(state: &FrontState, order: u32) -> FrontState {
    apply_multiplier(state, |xi| Complex64::new(0.0, xi).powu(order))
}

/// Translation `φ(· + d)` by a spectral phase shift.
pub fn shift(state: &FrontState, d: f64) -> FrontState {
    apply_multiplier(state, |xi| Complex64::from_polar(1.0, xi * d))
}

/// Places coefficients of an `N`-grid onto a zero-padded `M`-grid (`M ≥ N`).
pub fn pad_spectrum(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for (j, c) in coeffs.iter().enumerate() {
        if j == half {
            continue;
        }
        let slot = if j < half { j } else { m - (n - j) };
        out[slot] = *c;
    }
    out
}

/// Keeps the resolved modes `|m| < N/2` of an `M`-grid spectrum.
pub fn truncate_spectrum(padded: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = padded.len();
    let half = n / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        if j == half {
            continue;
        }
        let src = if j < half { j } else { m - (n - j) };
        out[j] = padded[src];
    }
    out
}

/// Samples of the band-limited interpolant on a grid refined by `factor`.
pub fn refined_values(state: &FrontState, factor: usize) -> Vec<f64> {
    let m = state.grid().n_points() * factor;
    fft::inverse(&pad_spectrum(state.spectrum(), m))
}

/// Pointwise product `abc` evaluated on a `2N` grid and truncated back to `N`.
///
/// With the Nyquist mode removed the inputs have `|m| ≤ N/2 - 1`, the product
/// has `|m| ≤ 3N/2 - 3`, and images of those modes on the `2N` grid land at
/// `|m| ≥ N/2 + 3`, outside the retained band.
pub fn dealias_product(a: &FrontState, b: &FrontState, c: &FrontState) -> Result<FrontState> {
    a.grid().check_same(b.grid())?;
    a.grid().check_same(c.grid())?;
    let grid = *a.grid();
    let m = 2 * grid.n_points();
    let pa = fft::inverse(&pad_spectrum(a.spectrum(), m));
    let pb = fft::inverse(&pad_spectrum(b.spectrum(), m));
    let pc = fft::inverse(&pad_spectrum(c.spectrum(), m));
    let prod: Vec<f64> = pa
        .iter()
        .zip(&pb)
        .zip(&pc)
        .map(|((x, y), z)| x * y * z)
        .collect();
    let coeffs = truncate_spectrum(&fft::forward(&prod), grid.n_points());
    Ok(FrontState::from_spectrum(grid, a.time(), coeffs))
}
