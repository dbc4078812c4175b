//! Velocity field of a front: the shear flow `ũ`, the perturbation `(u*, v*)`
//! and the kinematic condition `φ_t = v - uφ_x` on `y = φ(x)`.
//!
//! With `β = 1 - α/2` and `K(s, d) = (s² + d²)^{-β}`,
//!
//! ```text
//! u*(x, y) = -Θ ∫ K(x - x', y - φ(x')) - K(x - x', y + h) dx'
//! v*(x, y) = -Θ ∫ φ'(x') K(x - x', y - φ(x')) dx'
//! ```
//!
//! For a periodic profile the line integrals are summed over all periodic
//! images in symmetric order, which is the limit of the truncations
//! `|x - x'| < λ`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::{scaleid_coefficient, Params};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, geometric_breaks, lattice_tail, Estimate};
use crate::rhs::QuadratureSpec;
use crate::spectral::{derivative, FrontState};

const DIRECT_IMAGES: u64 = 8;
const MAX_DEPTH: u32 = 48;

/// `U(y) = ΘC'_α|y|^{α-1}`.
pub fn shear_velocity(y: f64, params: &Params) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    params.theta * params.c_prime * y.abs().powf(params.alpha - 1.0)
}

/// Trigonometric interpolant of a state and its derivative.
#[derive(Debug, Clone)]
struct Interpolant {
    mean: f64,
    coeffs: Vec<Complex64>,
    dxi: f64,
}

impl Interpolant {
    fn new(state: &FrontState) -> Self {
        let grid = state.grid();
        let spec = state.spectrum();
        Self {
            mean: spec[0].re,
            coeffs: spec[1..grid.nyquist_index()].to_vec(),
            dxi: grid.dxi(),
        }
    }

    /// `(φ(x), φ_x(x))`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        let step = Complex64::from_polar(1.0, self.dxi * x);
        let mut z = step;
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = i + 1;
            if m % 32 == 0 {
                z = Complex64::from_polar(1.0, m as f64 * self.dxi * x);
            }
            let t = c * z;
            v += t.re;
            d -= m as f64 * t.im;
            z *= step;
        }
        (self.mean + 2.0 * v, 2.0 * self.dxi * d)
    }

    /// `(φ(x - s), φ_x(x - s), (φ(x) - φ(x - s))/s)`, the quotient without
    /// cancellation for small `s`.
    fn eval_chord(&self, x: f64, s: f64) -> (f64, f64, f64) {
        if s == 0.0 {
            let (v, d) = self.eval(x);
            return (v, d, d);
        }
        let mut v = 0.0;
        let mut d = 0.0;
        let mut q = 0.0;
        let y = x - s;
        let mid = x - 0.5 * s;
        let theta = 0.5 * self.dxi * s;
        let step_y = Complex64::from_polar(1.0, self.dxi * y);
        let step_mid = Complex64::from_polar(1.0, self.dxi * mid);
        let step_h = Complex64::from_polar(1.0, theta);
        let (mut zy, mut zm, mut zh) = (step_y, step_mid, step_h);
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = i + 1;
            if m % 32 == 0 {
                let mf = m as f64;
                zy = Complex64::from_polar(1.0, mf * self.dxi * y);
                zm = Complex64::from_polar(1.0, mf * self.dxi * mid);
                zh = Complex64::from_polar(1.0, mf * theta);
            }
            let t = c * zy;
            v += t.re;
            d -= m as f64 * t.im;
            // c e^{iξ(x-s/2)} · 2i sin(ξs/2)
            let w = c * zm;
            q -= 2.0 * w.im * zh.im;
            zy *= step_y;
            zm *= step_mid;
            zh *= step_h;
        }
        (self.mean + 2.0 * v, 2.0 * self.dxi * d, 2.0 * q / s)
    }
}

/// A profile together with the offset `h` of the reference shear.
#[derive(Debug, Clone)]
pub struct FrontGeometry {
    state: FrontState,
    h: f64,
    params: Params,
    interp: Interpolant,
}

impl FrontGeometry {
    pub fn new(state: FrontState, h: f64, params: Params) -> Result<Self> {
        let min = state.values().iter().cloned().fold(f64::INFINITY, f64::min);
        if !(h.is_finite() && -h < min) {
            return Err(Error::InvalidInput(format!(
                "offset must satisfy -h < min phi = {min}, got h = {h}"
            )));
        }
        let interp = Interpolant::new(&state);
        Ok(Self {
            state,
            h,
            params,
            interp,
        })
    }

    /// Offset `h = 2(1 + max|φ|)` used by the presets.
    pub fn with_default_offset(state: FrontState, params: Params) -> Result<Self> {
        let h = 2.0 * (1.0 + state.max_abs());
        Self::new(state, h, params)
    }

    pub fn state(&self) -> &FrontState {
        &self.state
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `ũ(y) = U(y + h)`.
    pub fn reference_shear(&self, y: f64) -> f64 {
        shear_velocity(y + self.h, &self.params)
    }
}

/// `Σ_{m≠0} [K(s + mL, d) - |mL|^{-2β}]`, symmetric in `m`.
fn image_kernel(s: f64, d: f64, length: f64, beta: f64) -> f64 {
    let mut total = 0.0;
    for m in 1..DIRECT_IMAGES {
        let ml = m as f64 * length;
        total += ((ml + s).powi(2) + d * d).powf(-beta) + ((ml - s).powi(2) + d * d).powf(-beta)
            - 2.0 * ml.powf(-2.0 * beta);
    }
    // K = Σ_n binom(-β, n) d^{2n} |s + mL|^{-2β-2n} on the far images
    let far = (DIRECT_IMAGES as f64 - 0.5) * length;
    let q = (d / far).powi(2);
    let mut binom = 1.0;
    let mut dp = 1.0;
    let mut n = 0u32;
    loop {
        let p = 2.0 * beta + 2.0 * n as f64;
        let tail = if n == 0 {
            lattice_tail(&[(1.0, s), (1.0, -s), (-2.0, 0.0)], p, length, DIRECT_IMAGES)
        } else {
            lattice_tail(&[(1.0, s), (1.0, -s)], p, length, DIRECT_IMAGES)
        };
        total += binom * dp * tail;
        if n >= 1 && q.powi(n as i32) < 1e-18 {
            break;
        }
        binom *= (-beta - n as f64) / (n as f64 + 1.0);
        dp *= d * d;
        n += 1;
        if n > 200 {
            break;
        }
    }
    total
}

/// Quadrature of `∫_{-L/2}^{L/2} g(s) ds` where `g(s) = K(s, d(s)) f(s)` plus a
/// smooth part. The singular weight `|s|^{-2β}` is removed by `|s| = w^q`,
/// `q = 1/(α - 1)`, on each half-line.
struct CellIntegral<'a> {
    alpha: f64,
    length: f64,
    /// `(d(s), d(s)/s, f(s), smooth(s))` at offset `s`.
    parts: &'a (dyn Fn(f64) -> (f64, f64, f64, f64) + Sync),
}

impl CellIntegral<'_> {
    fn integrate(&self, tol: f64) -> Result<Estimate> {
        let beta = 1.0 - self.alpha / 2.0;
        let q = 1.0 / (self.alpha - 1.0);
        let w_end = (0.5 * self.length).powf(1.0 / q);
        let mut value = 0.0;
        let mut error = 0.0;
        for sign in [1.0, -1.0] {
            let g = |w: f64| {
                let s = w.powf(q);
                let (d, r, f, smooth) = (self.parts)(sign * s);
                let jac = q * w.powf(q - 1.0);
                let k = if r.abs() > 1.0 {
                    (s * s + d * d).powf(-beta) * jac
                } else {
                    // s^{-2β} · q w^{q-1} = q
                    q * (1.0 + r * r).powf(-beta)
                };
                k * f + smooth * jac
            };
            let breaks = geometric_breaks(w_end * 1e-3, w_end, 4.0);
            let mut segments = vec![(0.0, breaks[0])];
            segments.extend(breaks.windows(2).map(|p| (p[0], p[1])));
            let share = tol / (2.0 * segments.len() as f64);
            for (a, b) in segments {
                let est = adaptive(a, b, share, MAX_DEPTH, &g)?;
                value += est.value;
                error += est.error;
            }
        }
        Ok(Estimate { value, error })
    }
}

/// `(u*, v*)` at `(x, y)` with quadrature error estimates.
pub fn perturbation_velocity_with_estimate(
    geom: &FrontGeometry,
    x: f64,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<(Estimate, Estimate)> {
    let params = geom.params;
    let grid = geom.state.grid();
    let length = grid.length();
    let beta = 1.0 - params.alpha / 2.0;
    let theta = params.theta;
    let yh = y + geom.h;
    let interp = &geom.interp;

    // on the front d(s)/s is a chord slope, evaluated without cancellation
    let (phi_at_x, _) = interp.eval(x);
    let on_front = (y - phi_at_x).abs() <= 1e-12 * (1.0 + y.abs());
    let sample = |s: f64| -> (f64, f64, f64) {
        if on_front {
            let (_, dphi, chord) = interp.eval_chord(x, s);
            (chord * s, chord, dphi)
        } else {
            let (phi, dphi) = interp.eval(x - s);
            let d = y - phi;
            (d, d / s, dphi)
        }
    };
    let u_parts = |s: f64| {
        let (d, r, _) = sample(s);
        let smooth = -(s * s + yh * yh).powf(-beta) + image_kernel(s, d, length, beta)
            - image_kernel(s, yh, length, beta);
        (d, r, 1.0, smooth)
    };
    let v_parts = |s: f64| {
        let (d, r, dphi) = sample(s);
        (d, r, dphi, dphi * image_kernel(s, d, length, beta))
    };
    let tol = quad.tolerance;
    let u = CellIntegral {
        alpha: params.alpha,
        length,
        parts: &u_parts,
    }
    .integrate(tol)?;
    let v = CellIntegral {
        alpha: params.alpha,
        length,
        parts: &v_parts,
    }
    .integrate(tol)?;
    for (name, est) in [("u*", u), ("v*", v)] {
        if !(est.error * theta.abs() <= tol) {
            return Err(Error::Accuracy {
                achieved: est.error * theta.abs(),
                target: tol,
                context: format!("{name} at ({x}, {y})"),
            });
        }
    }
    Ok((
        Estimate {
            value: -theta * u.value,
            error: theta.abs() * u.error,
        },
        Estimate {
            value: -theta * v.value,
            error: theta.abs() * v.error,
        },
    ))
}

/// `(u*, v*)` at `(x, y)`.
pub fn perturbation_velocity(
    geom: &FrontGeometry,
    x: f64,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let (u, v) = perturbation_velocity_with_estimate(geom, x, y, quad)?;
    Ok((u.value, v.value))
}

/// Both sides of
/// `∫_0^∞ (s²+1)^{-β} - (s²+c²)^{-β} ds = √π Γ((1-α)/2)/(2Γ(1-α/2)) (1 - |c|^{α-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleIdCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn scaleid_check(c: f64, alpha: f64, tol: f64) -> Result<ScaleIdCheck> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!("c must be finite and nonzero, got {c}")));
    }
    let k = scaleid_coefficient(alpha)?;
    let beta = 1.0 - alpha / 2.0;
    let c2 = c * c;
    let rhs = k * (1.0 - c.abs().powf(alpha - 1.0));
    let f = |s: f64| (s * s + 1.0).powf(-beta) - (s * s + c2).powf(-beta);
    let cut = 20.0 * c.abs().max(1.0);
    let breaks = geometric_breaks(1e-3 * c.abs().min(1.0), cut, 2.0);
    let mut lhs = adaptive(0.0, breaks[0], tol / 100.0, MAX_DEPTH, &f)?.value;
    for p in breaks.windows(2) {
        lhs += adaptive(p[0], p[1], tol / 100.0, MAX_DEPTH, &f)?.value;
    }
    // ∫_cut^∞ Σ_{n≥1} binom(-β, n)(1 - c^{2n}) s^{-2β-2n} ds
    let mut binom = 1.0;
    let mut n = 0;
    loop {
        binom *= (-beta - n as f64) / (n as f64 + 1.0);
        n += 1;
        let p = 2.0 * beta + 2.0 * n as f64;
        let term = binom * (1.0 - c2.powi(n)) * cut.powf(1.0 - p) / (p - 1.0);
        lhs += term;
        if term.abs() < 1e-18 || n > 100 {
            break;
        }
    }
    Ok(ScaleIdCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// `max_j |φ_t - (v* - (ũ + u*)φ_x)|` at the grid points of the front.
pub fn kinematic_residual(
    geom: &FrontGeometry,
    rhs_value: &FrontState,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let state = &geom.state;
    if !state.grid().same_as(rhs_value.grid()) {
        return Err(Error::GridMismatch("kinematic residual operands".into()));
    }
    let grid = *state.grid();
    let phi_x = derivative(state, 1);
    let residuals: Vec<Result<f64>> = (0..grid.n_points())
        .into_par_iter()
        .map(|j| {
            let x = grid.x(j);
            let y = state.values()[j];
            let (u, v) = perturbation_velocity(geom, x, y, quad)?;
            let predicted = v - (geom.reference_shear(y) + u) * phi_x.values()[j];
            Ok((rhs_value.values()[j] - predicted).abs())
        })
        .collect();
    let mut worst = 0.0_f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}
