//! Gauss–Legendre rules, adaptive bisection and Euler–Maclaurin lattice tails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared instance of the `n`-point rule.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let mut map = RULES
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .expect("quadrature rule cache poisoned");
        map.entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel endpoints growing geometrically by `ratio` from `start` up to `end`.
pub fn geometric_breaks(start: f64, end: f64, ratio: f64) -> Vec<f64> {
    assert!(start > 0.0 && end > start && ratio > 1.0);
    let mut out = vec![start];
    let mut x = start;
    while x * ratio < end {
        x *= ratio;
        out.push(x);
    }
    out.push(end);
    out
}

/// Integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Adaptive bisection on `[a, b]` comparing 15- and 30-point Gauss–Legendre
/// rules on each subinterval. Subintervals are processed in a fixed order, so
/// the result is deterministic.
pub fn adaptive(
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
    f: &dyn Fn(f64) -> f64,
) -> Result<Estimate> {
    let lo = GaussLegendre::cached(15);
    let hi = GaussLegendre::cached(30);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut unresolved = 0.0;
    let width = (b - a).abs();
    let mut stack = vec![(a, b, 0u32)];
    while let Some((x0, x1, depth)) = stack.pop() {
        let g1 = lo.integrate(x0, x1, f);
        let g2 = hi.integrate(x0, x1, f);
        let err = (g2 - g1).abs();
        let share = abs_tol * ((x1 - x0).abs() / width).max(1e-3);
        if err <= share || depth >= max_depth {
            if !g2.is_finite() {
                return Err(Error::Accuracy {
                    achieved: f64::INFINITY,
                    target: abs_tol,
                    context: format!("non-finite integrand on [{x0}, {x1}]"),
                });
            }
            value += g2;
            error += err;
            if err > share {
                unresolved += err;
            }
        } else {
            let mid = 0.5 * (x0 + x1);
            stack.push((mid, x1, depth + 1));
            stack.push((x0, mid, depth + 1));
        }
    }
    if unresolved > abs_tol {
        return Err(Error::Accuracy {
            achieved: error,
            target: abs_tol,
            context: format!("adaptive quadrature on [{a}, {b}] hit depth {max_depth}"),
        });
    }
    Ok(Estimate { value, error })
}

const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
];

/// `Σ_{m ≥ a} Σ_j w_j (m L + c_j)^{-p}` by Euler–Maclaurin.
///
/// Requires `a L + c_j > 0` well above `|c_j|` so the Bernoulli terms decay. For
/// `p < 1` the weights must make the combination decay faster than `m^{-1}`; the
/// integral term is then the limit of the antiderivatives.
pub fn lattice_tail(terms: &[(f64, f64)], p: f64, length: f64, a: u64) -> f64 {
    assert!((p - 1.0).abs() > 1e-12, "p = 1 needs a logarithmic tail");
    let af = a as f64;
    let base = |c: f64| af * length + c;
    let integral: f64 = terms
        .iter()
        .map(|&(w, c)| w * base(c).powf(1.0 - p))
        .sum::<f64>()
        / ((p - 1.0) * length);
    let endpoint: f64 = terms.iter().map(|&(w, c)| w * base(c).powf(-p)).sum::<f64>() / 2.0;
    let mut corr = 0.0;
    for (k, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        // (2k+1)-th derivative in m, i.e. order r = 2k + 1
        let r = 2 * k + 1;
        let mut falling = 1.0;
        for i in 0..r {
            falling *= -p - i as f64;
        }
        let lr = length.powi(r as i32);
        let d: f64 = terms
            .iter()
            .map(|&(w, c)| w * base(c).powf(-p - r as f64))
            .sum::<f64>()
            * falling
            * lr;
        corr -= coef * d;
    }
    integral + endpoint + corr
}
