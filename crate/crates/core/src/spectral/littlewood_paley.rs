//! Smooth dyadic frequency blocks.
//!
//! `ψ` equals 1 on `[-5/4, 5/4]`, vanishes outside `[-8/5, 8/5]` and blends
//! in between with the `e^{-1/x}` smooth step. Blocks are
//! `ψ_k(ξ) = ψ(ξ/2^k) - ψ(ξ/2^{k-1})`.

use super::{apply_real_multiplier, FrontState, Grid};

const PLATEAU: f64 = 5.0 / 4.0;
const SUPPORT: f64 = 8.0 / 5.0;

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

pub fn psi(xi: f64) -> f64 {
    let r = xi.abs();
    if r <= PLATEAU {
        1.0
    } else if r >= SUPPORT {
        0.0
    } else {
        smooth_step((SUPPORT - r) / (SUPPORT - PLATEAU))
    }
}

/// `ψ_{≤k}(ξ) = ψ(ξ/2^k)`.
pub fn psi_le(k: i32, xi: f64) -> f64 {
    psi(xi / 2f64.powi(k))
}

pub fn psi_k(k: i32, xi: f64) -> f64 {
    psi_le(k, xi) - psi_le(k - 1, xi)
}

/// `P_k φ`.
pub fn lp_project(state: &FrontState, k: i32) -> FrontState {
    apply_real_multiplier(state, |xi| psi_k(k, xi))
}

/// `P_{≤k} φ`.
pub fn lp_low(state: &FrontState, k: i32) -> FrontState {
    apply_real_multiplier(state, |xi| psi_le(k, xi))
}

/// Block indices `(k_lo, k_hi)` such that `P_{≤k_lo}` keeps only the mean and
/// `Σ_{k_lo<k≤k_hi} ψ_k = 1` on every resolved nonzero frequency.
pub fn lp_range(grid: &Grid) -> (i32, i32) {
    let k_lo = (grid.dxi() / SUPPORT).log2().floor() as i32;
    let k_hi = (grid.xi_max() / PLATEAU).log2().ceil() as i32;
    (k_lo, k_hi.max(k_lo + 1))
}

#[derive(Debug, Clone)]
pub struct LpDecomposition {
    pub low_index: i32,
    pub low: FrontState,
    pub blocks: Vec<(i32, FrontState)>,
}

pub fn lp_decomposition(state: &FrontState) -> LpDecomposition {
    let (k_lo, k_hi) = lp_range(state.grid());
    LpDecomposition {
        low_index: k_lo,
        low: lp_low(state, k_lo),
        blocks: (k_lo + 1..=k_hi).map(|k| (k, lp_project(state, k))).collect(),
    }
}

/// `⟨P_k φ, φ⟩^{1/2}` in `L²(0, L)`. Since `ψ_k ≥ 0` and the blocks sum to one,
/// the squares of these energies add up to `‖φ‖²` minus the mean part.
pub fn lp_block_energy(state: &FrontState, k: i32) -> f64 {
    let grid = state.grid();
    let nyq = grid.nyquist_index();
    let sum: f64 = state
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != nyq)
        .map(|(j, c)| psi_k(k, grid.wavenumber(j)) * c.norm_sqr())
        .sum();
    (grid.length() * sum).sqrt()
}
