//! Right-hand side of the front equation `φ_t = L[φ] + N[φ]`.
//!
//! `L[φ] = -ΘA|∂_x|^{1-α}φ_x` has the Fourier multiplier `-iΘAξ|ξ|^{1-α}`.
//! The nonlinear part has three evaluators: the contour integral
//! `N[φ](x) = -Θ∫[φ_x(x) - φ_x(x+ζ)]{|ζ|^{α-2} - (ζ² + Δ²)^{(α-2)/2}} dζ`,
//! `Δ = φ(x) - φ(x+ζ)`, and two forms of its cubic truncation.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::Params;
use crate::error::{Error, Result};
use crate::quadrature::{geometric_breaks, lattice_tail, GaussLegendre};
use crate::spectral::{
    abs_power, apply_multiplier, derivative, fft, pad_spectrum, truncate_spectrum, FrontState,
    Grid,
};
use crate::symbols::t1_prime;

/// `K / (ΘA')`: the cubic term is `K ∂_x{φ²|∂|^{3-α}φ - φ|∂|^{3-α}(φ²) + ⅓|∂|^{3-α}(φ³)}`.
///
/// The bracket symmetrizes to `⅓ T₁'`, so matching `ΘiA'ξ∬T₁'φ̂φ̂φ̂` needs
/// `K = 3ΘA'`. Least-squares fits against the convolution form reproduce this
/// ratio to round-off (see `examples/calibrate_cubic_prefactor.rs`).
pub const CUBIC_PREFACTOR_RATIO: f64 = 3.0;

/// Which nonlinear evaluator drives the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    Contour,
    CubicSpectral,
    CubicConvolutionOracle,
    /// Nonlinearity switched off; only the exact linear flow remains.
    Linear,
}

impl fmt::Display for RhsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RhsMode::Contour => "contour",
            RhsMode::CubicSpectral => "cubic_spectral",
            RhsMode::CubicConvolutionOracle => "cubic_convolution_oracle",
            RhsMode::Linear => "linear",
        };
        f.write_str(s)
    }
}

/// Discretization of the `ζ`-integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Half-width `δ` of the discarded core `[-δ, δ]`, relative to `L`.
    pub inner_cutoff: f64,
    /// Growth ratio of the panels graded toward `ζ = 0`.
    pub growth_ratio: f64,
    /// Radius of a plainly truncated integral. `None` integrates the full line
    /// by summing periodic images over the cell `[-L/2, L/2]`.
    pub truncation: Option<f64>,
    /// Target for the estimated quadrature error, relative to `max|N[φ]|`.
    pub tolerance: f64,
    /// Gauss–Legendre points per panel of the reported rule.
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            inner_cutoff: 1e-10,
            growth_ratio: 1.5,
            truncation: None,
            tolerance: 1e-10,
            order: 20,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.inner_cutoff > 0.0 && self.inner_cutoff < 1e-2) {
            errs.push(format!(
                "quadrature.inner_cutoff must lie in (0, 1e-2), got {}",
                self.inner_cutoff
            ));
        }
        if !(self.growth_ratio > 1.0 && self.growth_ratio <= 4.0) {
            errs.push(format!(
                "quadrature.growth_ratio must lie in (1, 4], got {}",
                self.growth_ratio
            ));
        }
        if let Some(r) = self.truncation {
            let half = 0.5 * grid.length();
            if !(r > self.inner_cutoff * grid.length() && r <= half * (1.0 + 1e-12)) {
                errs.push(format!(
                    "quadrature.truncation must lie in (delta, L/2 = {half}], got {r}"
                ));
            }
        }
        if !(self.tolerance >= 1e-12) {
            errs.push(format!(
                "quadrature.tolerance must be >= 1e-12, got {}",
                self.tolerance
            ));
        }
        if !(4..=64).contains(&self.order) {
            errs.push(format!("quadrature.order must lie in 4..=64, got {}", self.order));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// `-ΘA|∂_x|^{1-α}φ_x`.
pub fn linear_term(state: &FrontState, params: &Params) -> FrontState {
    let s = 1.0 - params.alpha;
    let c = -params.theta * params.a;
    apply_multiplier(state, |xi| Complex64::new(0.0, c * xi * abs_power(xi, s)))
}

/// Linear multiplier `λ(ξ) = -iΘAξ|ξ|^{1-α}`, returned as its imaginary part.
pub fn linear_frequency(xi: f64, params: &Params) -> f64 {
    -params.theta * params.a * xi * abs_power(xi, 1.0 - params.alpha)
}

/// Cubic prefactor `K` for the given parameters.
pub fn cubic_prefactor(params: &Params) -> f64 {
    CUBIC_PREFACTOR_RATIO * params.theta * params.a_prime
}

/// `∂_x{φ²|∂|^sφ - φ|∂|^s(φ²) + ⅓|∂|^s(φ³)}` with `s = 3 - α`, evaluated on a
/// `3N` grid so that no product aliases onto a resolved mode.
pub fn cubic_bracket(state: &FrontState, alpha: f64) -> FrontState {
    let grid = *state.grid();
    let n = grid.n_points();
    let m = 3 * n;
    let s = 3.0 - alpha;
    let fine = Grid::new(m, grid.length()).expect("refined grid is valid");
    let fine_spec = pad_spectrum(state.spectrum(), m);
    let frac = |coeffs: &[Complex64]| -> Vec<f64> {
        let out: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * abs_power(fine.wavenumber(j), s))
            .collect();
        fft::inverse(&out)
    };
    let phi = fft::inverse(&fine_spec);
    let d_phi = frac(&fine_spec);
    let sq: Vec<f64> = phi.iter().map(|p| p * p).collect();
    let cube: Vec<f64> = sq.iter().zip(&phi).map(|(a, b)| a * b).collect();
    let d_sq = frac(&fft::forward(&sq));
    let d_cube = frac(&fft::forward(&cube));
    let bracket: Vec<f64> = (0..m)
        .map(|j| sq[j] * d_phi[j] - phi[j] * d_sq[j] + d_cube[j] / 3.0)
        .collect();
    let coeffs = truncate_spectrum(&fft::forward(&bracket), n);
    let coeffs = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * Complex64::new(0.0, grid.wavenumber(j)))
        .collect();
    FrontState::from_spectrum(grid, state.time(), coeffs)
}

/// Cubic term in physical space: `K ∂_x{...}` with the frozen prefactor.
pub fn cubic_spectral_rhs(state: &FrontState, params: &Params) -> FrontState {
    cubic_bracket(state, params.alpha).scaled(cubic_prefactor(params))
}

/// Largest grid accepted by the `O(N³)` convolution oracle.
pub const ORACLE_MAX_POINTS: usize = 128;

/// Direct evaluation of `ΘiA'ξ Σ_{η₁+η₂+η₃=ξ} T₁'(η₁,η₂,η₃) c(η₁)c(η₂)c(η₃)`
/// over resolved modes.
pub fn cubic_convolution_oracle(state: &FrontState, params: &Params) -> Result<FrontState> {
    let grid = *state.grid();
    let n = grid.n_points();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Refused(format!(
            "convolution oracle is O(N^3); N = {n} exceeds {ORACLE_MAX_POINTS}"
        )));
    }
    let half = (n / 2) as i64;
    let spec = state.spectrum();
    let dxi = grid.dxi();
    let coef = |m: i64| spec[grid.slot(m).expect("resolved mode")];
    let alpha = params.alpha;
    let pref = params.theta * params.a_prime;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for m in -(half - 1)..half {
        let mut acc = Complex64::new(0.0, 0.0);
        for m1 in -(half - 1)..half {
            for m2 in -(half - 1)..half {
                let m3 = m - m1 - m2;
                if m3.abs() >= half {
                    continue;
                }
                let t = t1_prime(m1 as f64 * dxi, m2 as f64 * dxi, m3 as f64 * dxi, alpha);
                if t == 0.0 {
                    continue;
                }
                acc += coef(m1) * coef(m2) * coef(m3) * t;
            }
        }
        let xi = m as f64 * dxi;
        out[grid.slot(m).expect("resolved mode")] = Complex64::new(0.0, pref * xi) * acc;
    }
    Ok(FrontState::from_spectrum(grid, state.time(), out))
}

/// Contour integral with its estimated quadrature error.
#[derive(Debug, Clone)]
pub struct ContourEvaluation {
    pub value: FrontState,
    /// Estimated absolute error, sup over grid points.
    pub error: f64,
}

/// Nodes per parallel work unit. Fixed, so partial sums are grouped the same
/// way for every thread count.
const NODE_CHUNK: usize = 32;
/// Images summed directly on each side before the lattice tail.
const DIRECT_IMAGES: u64 = 8;
const MAX_REFINEMENT: u32 = 3;

/// Contour form of the nonlinear term, failing if the error target is missed.
pub fn contour_rhs(state: &FrontState, params: &Params, quad: &QuadratureSpec) -> Result<FrontState> {
    Ok(contour_rhs_with_estimate(state, params, quad)?.value)
}

/// Contour form of the nonlinear term with its error estimate.
///
/// The integral over `ζ ∈ ℝ` is folded onto `u ∈ [-L/2, L/2]` using the
/// periodicity of `φ`: `Δ` and `φ_x(x+ζ)` depend only on `u`, and the kernel is
/// summed over images `u + mL`. Images with `m ≠ 0` are expanded as
/// `-Σ_n c_n Δ^{2n} |ζ|^{α-2-2n}`, so only the lattice sums
/// `G_n(u) = Σ_{m≠0}|u + mL|^{-(2+2n-α)}` are needed, once per node.
///
/// Nodes are graded geometrically toward `u = 0` from `δ` and uniform beyond.
/// For each node the differences `φ(x) - φ(x+u)` and `φ_x(x) - φ_x(x+u)` are
/// formed spectrally at all grid points at once.
pub fn contour_rhs_with_estimate(
    state: &FrontState,
    params: &Params,
    quad: &QuadratureSpec,
) -> Result<ContourEvaluation> {
    let grid = *state.grid();
    quad.validate(&grid)?;
    if !state.is_finite() {
        return Err(Error::Numerical {
            time: state.time(),
            context: "non-finite front samples".into(),
        });
    }
    let n = grid.n_points();
    let length = grid.length();
    let spec = state.spectrum();
    let peak = spec.iter().map(|c| c.norm()).skip(1).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(ContourEvaluation {
            value: FrontState::zeros(grid, state.time()),
            error: 0.0,
        });
    }
    let alpha = params.alpha;
    let beta = 1.0 - 0.5 * alpha;
    let periodic = quad.truncation.is_none();
    let radius = quad.truncation.unwrap_or(0.5 * length);

    let spread = state.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - state.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let image_terms = if periodic {
        let q = 2.0 * spread / length;
        if q >= 0.5 {
            return Err(Error::Refused(format!(
                "front spread {spread} is too large for the periodic image expansion on L = {length}"
            )));
        }
        let mut k = 1u32;
        while k < 60 && q.powi(2 * k as i32) > 1e-18 {
            k += 1;
        }
        k
    } else {
        0
    };
    let cn: Vec<f64> = (1..=image_terms).map(|k| params.c(k)).collect();

    // effective bandwidth of the profile
    let mut xi_eff: f64 = grid.dxi();
    for (j, c) in spec.iter().enumerate() {
        if j != grid.nyquist_index() && c.norm() > 1e-13 * peak {
            xi_eff = xi_eff.max(grid.wavenumber(j).abs());
        }
    }
    let slope = derivative(state, 1).max_abs();
    let curvature = derivative(state, 2).max_abs();
    let delta = quad.inner_cutoff * length;
    // |integrand| ≤ ‖φ_xx‖|u| · |u|^{α-2}(1 - (1+‖φ_x‖²)^{-β}) near the origin
    let core_bound = 2.0
        * curvature
        * (1.0 - (1.0 + slope * slope).powf(-beta))
        * delta.powf(alpha)
        / alpha;

    let lo_order = (quad.order * 2 / 3).max(3);
    let mut last: Option<(Vec<f64>, f64)> = None;
    for level in 0..=MAX_REFINEMENT {
        let width = (std::f64::consts::PI / xi_eff) / 2f64.powi(level as i32);
        let nodes = contour_nodes(delta, radius, width, quad.growth_ratio, quad.order, lo_order);
        let chunks: Vec<&[Node]> = nodes.chunks(NODE_CHUNK).collect();
        let partials: Vec<(Vec<f64>, Vec<f64>)> = chunks
            .par_iter()
            .map(|chunk| {
                let mut hi = vec![0.0; n];
                let mut lo = vec![0.0; n];
                for node in chunk.iter() {
                    accumulate_node(
                        node, spec, &grid, alpha, beta, &cn, periodic, &mut hi, &mut lo,
                    );
                }
                (hi, lo)
            })
            .collect();
        let mut hi = vec![0.0; n];
        let mut lo = vec![0.0; n];
        for (ph, pl) in &partials {
            for j in 0..n {
                hi[j] += ph[j];
                lo[j] += pl[j];
            }
        }
        let scale = -params.theta;
        for v in hi.iter_mut().chain(lo.iter_mut()) {
            *v *= scale;
        }
        let diff = hi
            .iter()
            .zip(&lo)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let err = diff + params.theta.abs() * core_bound;
        let size = hi.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if err <= quad.tolerance * size.max(f64::MIN_POSITIVE) {
            return Ok(ContourEvaluation {
                value: FrontState::new(grid, state.time(), hi)?,
                error: err,
            });
        }
        last = Some((hi, err));
    }
    let (hi, err) = last.expect("at least one level");
    let size = hi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Err(Error::Accuracy {
        achieved: err / size.max(f64::MIN_POSITIVE),
        target: quad.tolerance,
        context: format!("contour integral at t = {}", state.time()),
    })
}

#[derive(Debug, Clone, Copy)]
struct Node {
    u: f64,
    w_hi: f64,
    w_lo: f64,
}

/// Nodes of two Gauss–Legendre orders on both half-lines `±[δ, R]`, graded
/// toward the origin up to `width` and uniform beyond.
fn contour_nodes(
    delta: f64,
    radius: f64,
    width: f64,
    ratio: f64,
    hi_order: usize,
    lo_order: usize,
) -> Vec<Node> {
    let w0 = width.min(radius);
    let mut breaks = if w0 > delta {
        geometric_breaks(delta, w0, ratio)
    } else {
        vec![delta, radius]
    };
    let start = *breaks.last().expect("non-empty");
    let panels = ((radius - start) / width).ceil().max(0.0) as usize;
    if panels > 0 {
        let step = (radius - start) / panels as f64;
        for k in 1..panels {
            breaks.push(start + step * k as f64);
        }
        breaks.push(radius);
    }
    let hi_rule = GaussLegendre::cached(hi_order);
    let lo_rule = GaussLegendre::cached(lo_order);
    let mut nodes = Vec::new();
    for w in breaks.windows(2) {
        for (u, wt) in hi_rule.mapped(w[0], w[1]) {
            nodes.push(Node { u, w_hi: wt, w_lo: 0.0 });
            nodes.push(Node { u: -u, w_hi: wt, w_lo: 0.0 });
        }
        for (u, wt) in lo_rule.mapped(w[0], w[1]) {
            nodes.push(Node { u, w_hi: 0.0, w_lo: wt });
            nodes.push(Node { u: -u, w_hi: 0.0, w_lo: wt });
        }
    }
    nodes
}

/// `G_n(u) = Σ_{m≥1}[(mL+u)^{-p} + (mL-u)^{-p}]`, `p = 2 + 2n - α`, `|u| ≤ L/2`.
fn image_sum(u: f64, length: f64, p: f64) -> f64 {
    let mut s = 0.0;
    for m in 1..=DIRECT_IMAGES {
        let ml = m as f64 * length;
        s += (ml + u).powf(-p) + (ml - u).powf(-p);
    }
    s + lattice_tail(&[(1.0, u), (1.0, -u)], p, length, DIRECT_IMAGES + 1)
}

#[allow(clippy::too_many_arguments)]
fn accumulate_node(
    node: &Node,
    spec: &[Complex64],
    grid: &Grid,
    alpha: f64,
    beta: f64,
    cn: &[f64],
    periodic: bool,
    hi: &mut [f64],
    lo: &mut [f64],
) {
    let u = node.u;
    let nyq = grid.nyquist_index();
    // spectrum of Δ + i·(φ_x(x) - φ_x(x+u)); both parts are real fields
    let combined: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == nyq {
                return Complex64::new(0.0, 0.0);
            }
            let xi = grid.wavenumber(j);
            let half = 0.5 * xi * u;
            // 1 - e^{iξu} = -2i sin(ξu/2) e^{iξu/2}
            let factor = Complex64::new(0.0, -2.0 * half.sin()) * Complex64::from_polar(1.0, half);
            let d = c * factor;
            d + Complex64::new(0.0, 1.0) * (d * Complex64::new(0.0, xi))
        })
        .collect();
    let fields = fft::inverse_complex(&combined);
    let au = u.abs();
    let base = au.powf(alpha - 2.0);
    let lattice: Vec<f64> = if periodic {
        (1..=cn.len())
            .map(|k| image_sum(u, grid.length(), 2.0 + 2.0 * k as f64 - alpha))
            .collect()
    } else {
        Vec::new()
    };
    for (j, f) in fields.iter().enumerate() {
        let d = f.re;
        let dphix = f.im;
        let r = d / u;
        // |u|^{α-2}[1 - (1 + Δ²/u²)^{-β}]
        let mut kernel = -base * (-beta * (r * r).ln_1p()).exp_m1();
        if periodic {
            let d2 = d * d;
            let mut pw = d2;
            for (c, g) in cn.iter().zip(&lattice) {
                kernel -= c * pw * g;
                pw *= d2;
            }
        }
        let v = dphix * kernel;
        hi[j] += node.w_hi * v;
        lo[j] += node.w_lo * v;
    }
}

/// Nonlinear contribution for the selected evaluator.
pub fn nonlinear_term(
    state: &FrontState,
    params: &Params,
    mode: RhsMode,
    quad: &QuadratureSpec,
) -> Result<FrontState> {
    match mode {
        RhsMode::Contour => contour_rhs(state, params, quad),
        RhsMode::CubicSpectral => Ok(cubic_spectral_rhs(state, params)),
        RhsMode::CubicConvolutionOracle => cubic_convolution_oracle(state, params),
        RhsMode::Linear => Ok(FrontState::zeros(*state.grid(), state.time())),
    }
}

/// Full `φ_t = L[φ] + N[φ]`.
pub fn full_rhs(
    state: &FrontState,
    params: &Params,
    mode: RhsMode,
    quad: &QuadratureSpec,
) -> Result<FrontState> {
    let lin = linear_term(state, params);
    let non = nonlinear_term(state, params, mode, quad)?;
    let values = lin.values().iter().zip(non.values()).map(|(a, b)| a + b).collect();
    FrontState::new(*state.grid(), state.time(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_term_on_a_mode() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let params = Params::with_alpha(1.5).unwrap();
        let k = 4.0;
        let f = FrontState::from_fn(grid, 0.0, |x| (k * x).cos());
        let l = linear_term(&f, &params);
        // Θ = -1: multiplier iAξ|ξ|^{1-α}, so cos(kx) ↦ -A k^{2-α} sin(kx)
        let amp = params.a * k.powf(0.5);
        for (j, x) in grid.xs().into_iter().enumerate() {
            assert!((l.values()[j] + amp * (k * x).sin()).abs() < 1e-12);
        }
        assert!((amp - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-12);
        let c = FrontState::from_fn(grid, 0.0, |_| 3.0);
        assert!(linear_term(&c, &params).max_abs() < 1e-15);
    }

    #[test]
    fn nonlinear_terms_vanish_on_constants() {
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        let params = Params::with_alpha(1.5).unwrap();
        let c = FrontState::from_fn(grid, 0.0, |_| 0.7);
        assert!(cubic_spectral_rhs(&c, &params).max_abs() < 1e-15);
        assert!(cubic_convolution_oracle(&c, &params).unwrap().max_abs() < 1e-15);
        let q = QuadratureSpec::default();
        assert_eq!(contour_rhs(&c, &params, &q).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn oracle_refuses_large_grids() {
        let grid = Grid::new(256, 1.0).unwrap();
        let params = Params::with_alpha(1.5).unwrap();
        let f = FrontState::zeros(grid, 0.0);
        assert!(matches!(
            cubic_convolution_oracle(&f, &params),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn quadrature_spec_validation_collects_all() {
        let grid = Grid::new(32, 1.0).unwrap();
        let bad = QuadratureSpec {
            inner_cutoff: 0.0,
            growth_ratio: 1.0,
            truncation: Some(2.0),
            tolerance: 1e-14,
            order: 2,
        };
        match bad.validate(&grid) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 5),
            other => panic!("{other:?}"),
        }
        assert!(QuadratureSpec::default().validate(&grid).is_ok());
    }

    #[test]
    fn image_sum_matches_direct_sum() {
        let length = 3.0;
        for &u in &[0.0, 0.4, -1.2, 1.5] {
            for &p in &[2.5, 4.5] {
                let mut direct = 0.0;
                let big = 200_000u64;
                for m in 1..big {
                    let ml = m as f64 * length;
                    direct += (ml + u).powf(-p) + (ml - u).powf(-p);
                }
                // midpoint-rule estimate of the remainder
                let edge = (big as f64 - 0.5) * length;
                direct += 2.0 * edge.powf(1.0 - p) / ((p - 1.0) * length);
                let got = image_sum(u, length, p);
                assert!((got - direct).abs() < 1e-12 * direct, "u={u} p={p}");
            }
        }
    }
}
