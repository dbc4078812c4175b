//! α-dependent constants of the front equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Regularity index of the Z-norm weight `|ξ| + |ξ|^{r+3}`.
pub const Z_NORM_R: u32 = 8;
/// Sobolev index of the global theory. Not usable in floating point at `|ξ| > 1`;
/// reported only.
pub const THEORY_SOBOLEV_S: u32 = 1200;
/// Growth exponent of the energy envelope `(t+1)^{p0}`.
pub const P0: f64 = 1e-4;
/// Upper frequency growth exponent of the resonant cutoff.
pub const P1: f64 = 1e-6;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "alpha must lie in the open interval (1, 2), got {alpha}"
        )))
    }
}

/// `A = 2 sin(πα/2) Γ(α-1)`.
pub fn compute_a(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * (PI * alpha / 2.0).sin() * gamma(alpha - 1.0))
}

/// `g_α = Γ(1 - α/2) / (2^α π Γ(α/2))`.
pub fn compute_g_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(gamma(1.0 - alpha / 2.0) / (2f64.powf(alpha) * PI * gamma(alpha / 2.0)))
}

/// Expansion coefficient `c_n = Γ(α/2) / (Γ(n+1) Γ(α/2 - n))`, evaluated as the
/// falling product `(1/n!) Π_{j=1}^{n} (α/2 - j)`.
pub fn compute_cn(alpha: f64, n: u32) -> f64 {
    let mut c = 1.0;
    for j in 1..=n {
        c *= (alpha / 2.0 - j as f64) / j as f64;
    }
    c
}

/// `A' = -A / (6 (3 - α))`.
pub fn compute_a_prime(alpha: f64) -> Result<f64> {
    Ok(-compute_a(alpha)? / (6.0 * (3.0 - alpha)))
}

/// Shear coefficient `C'_α = -(1/√π) sin(πα/2) Γ((1-α)/2) Γ(α/2)`.
pub fn compute_c_prime(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-(PI * alpha / 2.0).sin() * gamma((1.0 - alpha) / 2.0) * gamma(alpha / 2.0) / PI.sqrt())
}

/// `√π Γ((1-α)/2) / (2 Γ(1-α/2))`, the coefficient of `(1 - |c|^{α-1})` in
/// `∫_0^∞ [(s²+1)^{-(2-α)/2} - (s²+c²)^{-(2-α)/2}] ds`.
pub fn scaleid_coefficient(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(PI.sqrt() * gamma((1.0 - alpha) / 2.0) / (2.0 * gamma(1.0 - alpha / 2.0)))
}

/// Model parameters and derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    /// Scaled jump `Θ = g_α (θ_+ - θ_-)`.
    pub theta: f64,
    pub a: f64,
    pub g_alpha: f64,
    pub a_prime: f64,
    pub c_prime: f64,
}

impl Params {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !theta.is_finite() {
            return Err(Error::Domain(format!("theta must be finite, got {theta}")));
        }
        Ok(Self {
            alpha,
            theta,
            a: compute_a(alpha)?,
            g_alpha: compute_g_alpha(alpha)?,
            a_prime: compute_a_prime(alpha)?,
            c_prime: compute_c_prime(alpha)?,
        })
    }

    /// Parameters with the normalization `Θ = -1`.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, -1.0)
    }

    pub fn c(&self, n: u32) -> f64 {
        compute_cn(self.alpha, n)
    }

    /// Exponent `3 - α` of the cubic symbol.
    pub fn cubic_order(&self) -> f64 {
        3.0 - self.alpha
    }

    /// `A'` rescaled to the configured jump: the cubic term of `φ̂_t` is
    /// `-i A'_eff ξ ∬ T₁' φ̂φ̂φ̂`, and `A'_eff = A'` when `Θ = -1`.
    pub fn effective_a_prime(&self) -> f64 {
        -self.theta * self.a_prime
    }

    /// Jump `θ_+ - θ_-` implied by `Θ`.
    pub fn theta_jump(&self) -> f64 {
        self.theta / self.g_alpha
    }
}
