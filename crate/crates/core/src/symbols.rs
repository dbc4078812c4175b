//! Multilinear symbols and phases of the cubic interaction: the closed-form
//! cubic symbol `T₁'`, a quadrature evaluation of the general `T_n`, the
//! dispersion phase `Φ`, the resonant quotient, the Z-norm weight, and the
//! modified-scattering phase accumulator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::Params;
use crate::error::{Error, Result};
use crate::quadrature::{geometric_breaks, GaussLegendre};
use crate::spectral::Grid;

/// `|x|^s` with `|0|^s = 0` (all exponents used here are positive).
fn apow(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(s)
    }
}

/// `x|x|^{s-1}`, i.e. `sgn(x)|x|^s`, zero at the origin.
fn spow(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(s)
    }
}

/// Orders by modulus, then by value, so a zero argument always comes first.
fn sort3(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    v
}

/// Frequency triple `(η₁, η₂, η₃)` of a cubic interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicSymbolPoint {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl CubicSymbolPoint {
    pub fn new(eta1: f64, eta2: f64, eta3: f64) -> Result<Self> {
        if !(eta1.is_finite() && eta2.is_finite() && eta3.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite frequency in ({eta1}, {eta2}, {eta3})"
            )));
        }
        Ok(Self { eta1, eta2, eta3 })
    }

    pub fn t1_prime(&self, alpha: f64) -> f64 {
        t1_prime(self.eta1, self.eta2, self.eta3, alpha)
    }
}

/// `T₁'(η₁,η₂,η₃) = Σ|η_j|^s + |η₁+η₂+η₃|^s - Σ_{i<j}|η_i+η_j|^s`, `s = 3 - α`.
///
/// Arguments are sorted first so that every permutation evaluates the same
/// floating-point expression. The smallest argument `a` is grouped so that each
/// bracket cancels exactly when `a = 0`.
pub fn t1_prime(eta1: f64, eta2: f64, eta3: f64, alpha: f64) -> f64 {
    let s = 3.0 - alpha;
    let [a, b, c] = sort3([eta1, eta2, eta3]);
    (apow(b, s) - apow(a + b, s))
        + (apow(c, s) - apow(a + c, s))
        + (apow(a + b + c, s) - apow(b + c, s))
        + apow(a, s)
}

/// `T₁'(ξ, ξ, -ξ) = (4 - 2^{3-α}) |ξ|^{3-α}`.
pub fn t1_prime_diagonal(xi: f64, alpha: f64) -> f64 {
    let s = 3.0 - alpha;
    (4.0 - 2f64.powf(s)) * apow(xi, s)
}

/// Dispersion phase
/// `Φ(ξ,η₁,η₂) = ω(ξ-η₁-η₂) + ω(η₁) + ω(η₂) - ω(ξ)` with `ω(k) = k|k|^{1-α}`.
pub fn phase_phi(xi: f64, eta1: f64, eta2: f64, alpha: f64) -> f64 {
    let s = 2.0 - alpha;
    let (lo, hi) = if eta1 <= eta2 { (eta1, eta2) } else { (eta2, eta1) };
    spow(xi - lo - hi, s) + spow(lo, s) + spow(hi, s) - spow(xi, s)
}

/// Leading coefficient of `T₁'/Φ` at the space-resonant point `(ξ/3, ξ/3)`:
/// `(3^{2-α} - 2^{3-α} + 1)/(3 - 3^{2-α}) · ξ`.
pub fn resonance_ratio(xi: f64, alpha: f64) -> Result<f64> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::Domain(format!(
            "resonance quotient needs a finite nonzero frequency, got {xi}"
        )));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    let t = 3f64.powf(2.0 - alpha);
    Ok((t - 2f64.powf(3.0 - alpha) + 1.0) / (3.0 - t) * xi)
}

/// Z-norm weight `|ξ| + |ξ|^{r+3}`.
pub fn z_weight(xi: f64, r: u32) -> f64 {
    xi.abs() + xi.abs().powi(r as i32 + 3)
}

/// Value of `T_n` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnEstimate {
    pub value: f64,
    pub error: f64,
    /// Imaginary part of the assembled integral. The integrand pairs `ζ` with
    /// `-ζ`, so this is zero by construction.
    pub imag_residual: f64,
}

/// Quadrature of
/// `T_n(η) = ∫_ℝ Π_{j=1}^{2n+1}(1 - e^{iη_jζ}) |ζ|^{α-1} sgn ζ / ζ^{2n+1} dζ`.
///
/// The integrand at `-ζ` is the conjugate of the one at `ζ`, so
/// `T_n = 2∫_0^∞ Re Π(...) ζ^{α-2-2n} dζ` with
/// `Re Π(1 - e^{iη_jζ}) = 2(-4)^n sin(σζ/2) Π sin(η_jζ/2)`, `σ = Ση_j`.
/// The finite part `[0, Z]` uses Gauss–Legendre panels graded toward the
/// origin. Beyond `Z` the product is expanded into cosines
/// `Σ_S (-1)^{|S|} cos(σ_S ζ)` and each `∫_Z^∞ cos(σ_S ζ) ζ^{-p} dζ` is
/// integrated numerically up to `σ_S ζ = 40` and by its asymptotic series
/// beyond. The error estimate compares two rule orders.
pub fn tn_quadrature(etas: &[f64], n: u32, alpha: f64, tol: f64) -> Result<TnEstimate> {
    if !(n == 1 || n == 2) {
        return Err(Error::InvalidInput(format!("n must be 1 or 2, got {n}")));
    }
    if etas.len() != 2 * n as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "T_{n} takes {} frequencies, got {}",
            2 * n + 1,
            etas.len()
        )));
    }
    if !(tol >= 1e-10) {
        return Err(Error::InvalidInput(format!("tolerance must be >= 1e-10, got {tol}")));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    if etas.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidInput("non-finite frequency".into()));
    }
    if etas.iter().any(|&e| e == 0.0) {
        return Ok(TnEstimate {
            value: 0.0,
            error: 0.0,
            imag_residual: 0.0,
        });
    }

    // canonical order makes the result independent of argument permutation
    let mut etas = etas.to_vec();
    etas.sort_by(|a, b| a.total_cmp(b));
    let p = 2.0 * n as f64 + 2.0 - alpha;
    let eta_max = etas.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let sigma: f64 = etas.iter().sum();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pref = 2.0 * sign * 4f64.powi(n as i32);
    let integrand = |z: f64| -> f64 {
        let mut prod = (0.5 * sigma * z).sin();
        for e in &etas {
            prod *= (0.5 * e * z).sin();
        }
        pref * prod * z.powf(-p)
    };

    let mut last: Option<(f64, f64)> = None;
    for level in 0..5u32 {
        let per_unit = 2usize.pow(level);
        let z_end = 32.0 / eta_max;
        let core = z_end * 1e-12;
        let (main_lo, main_hi) = finite_part(&integrand, core, z_end, per_unit);
        // |Re Π| ≤ 2·4^n |σ/2| Π|η_j/2| ζ^{2n+2} near 0
        let core_bound = 2.0
            * 4f64.powi(n as i32)
            * (0.5 * sigma).abs()
            * etas.iter().map(|e| 0.5 * e.abs()).product::<f64>()
            * core.powf(alpha + 1.0)
            / (alpha + 1.0);
        let (tail_lo, tail_hi) = cosine_tail(&etas, z_end, p, per_unit);
        let lo = 2.0 * (main_lo + tail_lo);
        let hi = 2.0 * (main_hi + tail_hi);
        let err = (hi - lo).abs() + 2.0 * core_bound;
        if err <= tol * (1.0 + hi.abs()) {
            return Ok(TnEstimate {
                value: hi,
                error: err,
                imag_residual: 0.0,
            });
        }
        last = Some((hi, err));
    }
    let (value, err) = last.expect("at least one refinement level");
    Err(Error::Accuracy {
        achieved: err / (1.0 + value.abs()),
        target: tol,
        context: format!("T_{n} quadrature at {etas:?}"),
    })
}

/// `∫_{core}^{end} f` on panels graded geometrically from the origin, at two
/// Gauss–Legendre orders.
fn finite_part(f: &dyn Fn(f64) -> f64, core: f64, end: f64, refine: usize) -> (f64, f64) {
    let lo_rule = GaussLegendre::cached(12 * refine);
    let hi_rule = GaussLegendre::cached(18 * refine);
    let mut breaks = vec![0.0];
    breaks.extend(geometric_breaks(core, end / 16.0, 2.0));
    let step = end / 16.0;
    for k in 2..=16 {
        breaks.push(step * k as f64);
    }
    let mut lo = 0.0;
    let mut hi = 0.0;
    for w in breaks.windows(2).skip(1) {
        lo += lo_rule.integrate(w[0], w[1], f);
        hi += hi_rule.integrate(w[0], w[1], f);
    }
    (lo, hi)
}

/// `Σ_S (-1)^{|S|} ∫_Z^∞ cos(σ_S ζ) ζ^{-p} dζ` over subsets `S` of the
/// frequencies, at two rule orders.
fn cosine_tail(etas: &[f64], z: f64, p: f64, refine: usize) -> (f64, f64) {
    let m = etas.len();
    let mut lo = 0.0;
    let mut hi = 0.0;
    for mask in 0u32..(1 << m) {
        let mut s = 0.0;
        for (j, e) in etas.iter().enumerate() {
            if mask & (1 << j) != 0 {
                s += e;
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = cosine_power_tail(s.abs(), z, p, refine);
        lo += sign * a;
        hi += sign * b;
    }
    (lo, hi)
}

const ASYMPTOTIC_START: f64 = 40.0;

/// `∫_z^∞ cos(σζ) ζ^{-p} dζ` for `σ ≥ 0`, `p > 1`, at two rule orders.
fn cosine_power_tail(sigma: f64, z: f64, p: f64, refine: usize) -> (f64, f64) {
    if sigma * z < 1e-300 || sigma == 0.0 {
        let v = z.powf(1.0 - p) / (p - 1.0);
        return (v, v);
    }
    // ∫_z^∞ cos(σζ) ζ^{-p} dζ = σ^{p-1} Re ∫_{σz}^∞ e^{iX} X^{-p} dX
    let x0 = sigma * z;
    let scale = sigma.powf(p - 1.0);
    if x0 >= ASYMPTOTIC_START {
        let v = scale * oscillatory_power_tail(x0, p).re;
        return (v, v);
    }
    let f = |x: f64| x.cos() * x.powf(-p);
    let lo_rule = GaussLegendre::cached(12 * refine);
    let hi_rule = GaussLegendre::cached(18 * refine);
    let mut breaks = if x0 < 1.0 {
        geometric_breaks(x0, 1.0, 2.0)
    } else {
        vec![x0]
    };
    let mut x = *breaks.last().expect("non-empty");
    while x < ASYMPTOTIC_START {
        x = (x + 1.0).min(ASYMPTOTIC_START);
        breaks.push(x);
    }
    let mut lo = 0.0;
    let mut hi = 0.0;
    for w in breaks.windows(2) {
        lo += lo_rule.integrate(w[0], w[1], f);
        hi += hi_rule.integrate(w[0], w[1], f);
    }
    let tail = oscillatory_power_tail(ASYMPTOTIC_START, p).re;
    (scale * (lo + tail), scale * (hi + tail))
}

/// Asymptotic expansion of `∫_X^∞ e^{iy} y^{-p} dy = i e^{iX} X^{-p} Σ_k (p)_k (-i/X)^k`
/// for large `X`.
fn oscillatory_power_tail(x: f64, p: f64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_mag = f64::INFINITY;
    for k in 0..60 {
        term *= Complex64::new(0.0, -(p + k as f64) / x);
        let mag = term.norm();
        if mag > prev_mag || mag < 1e-18 * sum.norm() {
            break;
        }
        sum += term;
        prev_mag = mag;
    }
    Complex64::new(0.0, 1.0) * Complex64::from_polar(x.powf(-p), x) * sum
}

/// Constant of the dyadic bound `|T_n| ≤ C (Π_{k=1}^{2n}|η_{j_k}|) |η_{j_{2n}}|^{1-α}`,
/// collected from the low, intermediate and high `ζ` ranges of the estimate.
pub fn tn_bound_constant(n: u32, alpha: f64) -> f64 {
    let nf = n as f64;
    2f64.powf(alpha + 1.0) / (alpha - 1.0)
        + (2.0 * nf - 1.0) * 2f64.powf(alpha) / (2.0 - alpha)
        + 2f64.powf(alpha + 1.0) / (2.0 * nf - alpha)
}

/// Right-hand side of the dyadic `T_n` bound with frequencies sorted by modulus.
pub fn tn_bound(etas: &[f64], n: u32, alpha: f64) -> f64 {
    let mut mags: Vec<f64> = etas.iter().map(|e| e.abs()).collect();
    mags.sort_by(|a, b| a.total_cmp(b));
    let k = 2 * n as usize;
    let prod: f64 = mags[..k].iter().product();
    tn_bound_constant(n, alpha) * prod * mags[k - 1].powf(1.0 - alpha)
}

/// Resonant cutoff scale `ϱ(t) = (t+1)^{-0.49}`.
pub fn rho(t: f64) -> f64 {
    (t + 1.0).powf(-0.49)
}

/// `∫_ℝ ψ = 5/4 + 8/5`: the blend satisfies `ψ(5/4 + u) + ψ(8/5 - u) = 1`.
pub const PSI_INTEGRAL: f64 = 5.0 / 4.0 + 8.0 / 5.0;

/// Resonant coefficient `β(t) = A'_eff (∫ψ)² ϱ(t)²`, the area of the cutoff
/// around each space-time resonant point times the cubic prefactor. The three
/// resonant points share this value.
pub fn scattering_beta(t: f64, params: &Params) -> f64 {
    params.effective_a_prime() * PSI_INTEGRAL * PSI_INTEGRAL * rho(t).powi(2)
}

/// Accumulated nonlinear phase correction `Θ(ξ,t)` on a grid. The linear part
/// `-Atξ|ξ|^{1-α}` is not stored: the corrected profile is formed from the
/// linearly de-rotated profile `ĥ` as `v̂ = e^{iΘ} ĥ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringPhase {
    grid: Grid,
    time: f64,
    phase: Vec<f64>,
}

impl ScatteringPhase {
    pub fn new(grid: Grid, time: f64) -> Self {
        Self {
            grid,
            time,
            phase: vec![0.0; grid.n_points()],
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Phase in FFT order.
    pub fn values(&self) -> &[f64] {
        &self.phase
    }

    pub fn at_slot(&self, j: usize) -> f64 {
        self.phase[j]
    }

    /// Left-endpoint update over `[t, t + dt]` driven by the current spectrum
    /// (discrete coefficients; converted to continuum density internally).
    pub fn step(
        &self,
        spectrum: &[Complex64],
        grid: &Grid,
        dt: f64,
        params: &Params,
    ) -> Result<ScatteringPhase> {
        self.grid.check_same(grid)?;
        if spectrum.len() != self.grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "spectrum has {} entries for a grid of {}",
                spectrum.len(),
                self.grid.n_points()
            )));
        }
        let beta = scattering_beta(self.time, params);
        let density = self.grid.density_factor();
        let alpha = params.alpha;
        let phase = self
            .phase
            .iter()
            .zip(spectrum)
            .enumerate()
            .map(|(j, (theta, c))| {
                let xi = self.grid.wavenumber(j);
                let power = c.norm_sqr() * density * density;
                let symbol = beta * t1_prime(xi, xi, -xi, alpha)
                    + beta * t1_prime(xi, -xi, xi, alpha)
                    + beta * t1_prime(-xi, xi, xi, alpha);
                theta + dt * xi * symbol * power
            })
            .collect();
        Ok(ScatteringPhase {
            grid: self.grid,
            time: self.time + dt,
            phase,
        })
    }

    /// `e^{iΘ} ĥ`.
    pub fn corrected(&self, h_spectrum: &[Complex64]) -> Vec<Complex64> {
        h_spectrum
            .iter()
            .zip(&self.phase)
            .map(|(c, th)| c * Complex64::from_polar(1.0, *th))
            .collect()
    }
}

/// Integral of `ψ` by adaptive quadrature, used to check [`PSI_INTEGRAL`].
pub fn psi_integral_numeric() -> Result<f64> {
    let est = crate::quadrature::adaptive(0.0, 1.6, 1e-13, 40, &crate::spectral::psi)?;
    Ok(2.0 * est.value)
}

/// Continuum-normalized spectrum is `c · L/(2π)`; exposed for reporting.
pub fn continuum_power(c: Complex64, grid: &Grid) -> f64 {
    c.norm_sqr() * grid.density_factor().powi(2)
}
