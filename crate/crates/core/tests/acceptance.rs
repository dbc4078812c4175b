//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gsqg::config::preset;
use gsqg::constants::{compute_a, compute_a_prime, compute_c_prime, compute_cn};
use gsqg::contourfield::scaleid_check;
use gsqg::evolve::{run, DtPolicy, StepperConfig};
use gsqg::experiment::{run_experiment, EvolveSummary, TaskSummary};
use gsqg::rhs::{contour_rhs, cubic_bracket, cubic_convolution_oracle, cubic_spectral_rhs, QuadratureSpec, RhsMode};
use gsqg::symbols::{phase_phi, resonance_ratio, t1_prime, tn_quadrature};
use gsqg::{FrontState, Grid, Params, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Γ(3/4) to 20 digits, from tables.
const GAMMA_3_4: f64 = 1.225_416_702_465_177_645_1;
/// Literal quoted for C'(1.5) in the acceptance list; see the decisions ledger.
const C_PRIME_QUOTED: f64 = 1.6944661;

struct Line {
    id: &'static str,
    title: &'static str,
    pass: bool,
}

struct Suite {
    lines: Vec<Line>,
}

impl Suite {
    fn check(&mut self, id: &'static str, title: &'static str, pass: bool, detail: String) {
        println!("{} {id:<4} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push(Line { id, title, pass });
    }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.1} s of {limit_s} s"))
}

fn random_frequency(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 10f64.powf(rng.gen_range(-1.0..1.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l2_diff(a: &FrontState, b: &FrontState) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn random_field(grid: Grid, band: i64, seed: u64) -> FrontState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.n_points()];
    for m in 1..=band {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.05;
        c[grid.slot(m).unwrap()] = z;
        c[grid.slot(-m).unwrap()] = z.conj();
    }
    FrontState::from_spectrum(grid, 0.0, c)
}

fn constants(suite: &mut Suite) -> Result<()> {
    let t = Instant::now();
    let a = compute_a(1.5)?;
    let e_a = (a - (2.0 * PI).sqrt()).abs();
    let c1_exact = (0..10).all(|k| {
        let al = 1.02 + 0.1 * k as f64;
        compute_cn(al, 1) == al / 2.0 - 1.0
    });
    let e_ap = (compute_a_prime(1.5)? + a / 9.0).abs();
    // C' = -(1/√π) sin(3π/4) Γ(-1/4) Γ(3/4), with Γ(-1/4) = -4 Γ(3/4)
    let c_prime = compute_c_prime(1.5)?;
    let oracle = 4.0 / PI.sqrt() * (0.75 * PI).sin() * GAMMA_3_4 * GAMMA_3_4;
    let e_cp = (c_prime - oracle).abs();
    let (fast, time) = within(t.elapsed(), 1.0);
    suite.check(
        "1",
        "constants",
        e_a <= 1e-10 && c1_exact && e_ap <= 1e-12 && e_cp <= 1e-6 && fast,
        format!(
            "|A-sqrt(2pi)| {e_a:.1e}, c1 exact {c1_exact}, |A'+A/9| {e_ap:.1e}, C'(1.5) {c_prime:.7} vs Gamma path {oracle:.7} ({e_cp:.1e}; quoted {C_PRIME_QUOTED} = C' sin(3pi/4)), {time}"
        ),
    );
    Ok(())
}

fn symbol_oracle(suite: &mut Suite) -> Result<()> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for alpha in [1.25, 1.5, 1.75] {
        let a = compute_a(alpha)?;
        for _ in 0..50 {
            let e: Vec<f64> = (0..3).map(|_| random_frequency(&mut rng)).collect();
            let est = tn_quadrature(&e, 1, alpha, 1e-10)?;
            let closed = a * t1_prime(e[0], e[1], e[2], alpha) / ((2.0 - alpha) * (3.0 - alpha));
            worst = worst.max((est.value - closed).abs() / closed.abs());
        }
    }
    let mut zeros = true;
    for _ in 0..20 {
        let (x, y) = (random_frequency(&mut rng), random_frequency(&mut rng));
        for alpha in [1.25, 1.5, 1.75] {
            zeros &= t1_prime(0.0, x, y, alpha) == 0.0
                && t1_prime(x, 0.0, y, alpha) == 0.0
                && t1_prime(x, y, 0.0, alpha) == 0.0
                && tn_quadrature(&[x, 0.0, y], 1, alpha, 1e-10)?.value == 0.0;
        }
    }
    let (fast, time) = within(t.elapsed(), 30.0);
    suite.check(
        "2",
        "symbol oracle",
        worst <= 1e-6 && zeros && fast,
        format!("150 points, worst relative error {worst:.2e}, exact zeros {zeros}, {time}"),
    );
    Ok(())
}

fn resonance(suite: &mut Suite) -> Result<()> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut phi_worst: f64 = 0.0;
    for _ in 0..20 {
        let xi = random_frequency(&mut rng) * 5.0;
        phi_worst = phi_worst.max(phase_phi(xi, xi, xi, 1.5).abs());
    }
    let ratio = resonance_ratio(1.0, 1.5)?;
    let e_ratio = (ratio + 0.0760094).abs();
    let err = |d: f64| {
        let (e1, e2) = (1.0 / 3.0 + d, 1.0 / 3.0 - 0.7 * d);
        (t1_prime(e1, e2, 1.0 - e1 - e2, 1.5) / phase_phi(1.0, e1, e2, 1.5) - ratio).abs()
    };
    let (a, b, c) = (err(0.02), err(0.01), err(0.005));
    let order = (a / b).log2().min((b / c).log2());
    let (fast, time) = within(t.elapsed(), 5.0);
    suite.check(
        "3",
        "resonance",
        phi_worst <= 1e-12 && e_ratio <= 1e-6 && order >= 1.9 && fast,
        format!("max |Phi(xi,xi,xi)| {phi_worst:.1e}, ratio {ratio:.7} ({e_ratio:.1e}), quotient order {order:.3}, {time}"),
    );
    Ok(())
}

fn cubic_equivalence(suite: &mut Suite) -> Result<()> {
    let t = Instant::now();
    let grid = Grid::new(64, 2.0 * PI)?;
    let mut worst: f64 = 0.0;
    let mut k_dev: f64 = 0.0;
    for alpha in [1.25, 1.5, 1.75] {
        let params = Params::with_alpha(alpha)?;
        let mut ks = Vec::new();
        for seed in 0..10 {
            let f = random_field(grid, 31, 100 + seed);
            let oracle = cubic_convolution_oracle(&f, &params)?;
            let spectral = cubic_spectral_rhs(&f, &params);
            worst = worst.max(l2_diff(&spectral, &oracle) / l2(oracle.values()));
            let basis = cubic_bracket(&f, alpha);
            let num: f64 = basis.values().iter().zip(oracle.values()).map(|(b, o)| b * o).sum();
            ks.push(num / l2(basis.values()).powi(2) / (params.theta * params.a_prime));
        }
        for k in &ks {
            k_dev = k_dev.max((k - ks[0]).abs()).max((k - 3.0).abs());
        }
    }
    let (fast, time) = within(t.elapsed(), 60.0);
    suite.check(
        "4",
        "cubic equivalence",
        worst <= 1e-8 && k_dev <= 1e-10 && fast,
        format!("30 fields, worst relative L2 {worst:.2e}, K/(Theta A') spread and offset from 3 {k_dev:.1e}, {time}"),
    );
    Ok(())
}

fn series_consistency(suite: &mut Suite) -> Result<()> {
    let t = Instant::now();
    let grid = Grid::new(64, 2.0 * PI)?;
    let params = Params::with_alpha(1.5)?;
    let quad = QuadratureSpec::default();
    let mut diffs = Vec::new();
    for a in [1e-2, 5e-3, 2.5e-3] {
        let f = FrontState::from_fn(grid, 0.0, |x| a * x.cos());
        diffs.push(l2_diff(&contour_rhs(&f, &params, &quad)?, &cubic_spectral_rhs(&f, &params)));
    }
    let o1 = (diffs[0] / diffs[1]).log2();
    let o2 = (diffs[1] / diffs[2]).log2();
    let (fast, time) = within(t.elapsed(), 60.0);
    suite.check(
        "5",
        "series consistency",
        o1 >= 4.5 && o2 >= 4.5 && fast,
        format!("contour minus cubic orders {o1:.3}, {o2:.3}, {time}"),
    );
    Ok(())
}

fn evolve_summary(name: &str, dir: &Path) -> Result<EvolveSummary> {
    match run_experiment(&preset(name)?, dir)?.0.result {
        TaskSummary::Evolve(e) => Ok(e),
        _ => unreachable!("evolve preset"),
    }
}

fn conservation(suite: &mut Suite, root: &Path) -> Result<()> {
    let t = Instant::now();
    let e = evolve_summary("conservation", &root.join("conservation"))?;
    let h4 = e.h4_growth.unwrap_or(f64::INFINITY);
    let (fast, time) = within(t.elapsed(), 300.0);
    suite.check(
        "6",
        "conservation",
        e.l2_drift <= 1e-8 && e.mean_drift <= 1e-12 && h4 <= 0.05 && fast,
        format!(
            "{} steps to t = {}, L2 drift {:.2e}, mean drift {:.2e}, H4 growth {:.2e}, {time}",
            e.steps, e.t_final, e.l2_drift, e.mean_drift, h4
        ),
    );
    Ok(())
}

fn decay(suite: &mut Suite, root: &Path) -> Result<EvolveSummary> {
    let t = Instant::now();
    let e = evolve_summary("decay", &root.join("decay"))?;
    let (fast, time) = within(t.elapsed(), 1200.0);
    let (slope_ok, slope_text) = match &e.decay_fit {
        Some(f) => (
            (-0.65..=-0.35).contains(&f.slope) && f.t2 <= e.wrap_horizon,
            format!("slope {:.4} on [{}, {}] ({} samples, wrap horizon {:.0})", f.slope, f.t1, f.t2, f.samples, e.wrap_horizon),
        ),
        None => (false, format!("no fit: {}", e.decay_fit_error.clone().unwrap_or_default())),
    };
    suite.check("7a", "dispersive decay slope", slope_ok && fast, format!("{slope_text}, {time}"));
    let peak_at = e
        .max_slope_history
        .iter()
        .fold((0.0, 0.0), |best, &(t, v)| if v > best.1 { (t, v) } else { best });
    suite.check(
        "7b",
        "max slope within 1.1x initial",
        e.max_slope_ratio <= 1.1,
        format!(
            "peak/initial {:.4} (initial {:.3e}, peak {:.3e} near t = {})",
            e.max_slope_ratio, e.max_slope_initial, e.max_slope_peak, peak_at.0
        ),
    );
    Ok(e)
}

fn identities(suite: &mut Suite, root: &Path) -> Result<()> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut gap: f64 = 0.0;
    for _ in 0..20 {
        let alpha = rng.gen_range(1.05..1.95);
        let c = 10f64.powf(rng.gen_range(-1.5..1.5));
        gap = gap.max(scaleid_check(c, alpha, 1e-11)?.gap);
    }
    let residual = match run_experiment(&preset("kinematic")?, &root.join("kinematic"))?.0.result {
        TaskSummary::Kinematic(k) => k.residual,
        _ => unreachable!("kinematic preset"),
    };
    let (fast, time) = within(t.elapsed(), 600.0);
    suite.check(
        "8",
        "appendix identities",
        gap <= 1e-8 && residual <= 1e-4 && fast,
        format!("scaleid worst gap {gap:.1e} on 20 pairs, kinematic residual {residual:.1e}, {time}"),
    );
    Ok(())
}

fn gaussian(grid: Grid, amp: f64, width: f64) -> FrontState {
    let c = grid.length() / 2.0;
    FrontState::from_fn(grid, 0.0, |x| amp * (-(x - c).powi(2) / (2.0 * width * width)).exp())
}

fn advance(init: &FrontState, params: &Params, dt: f64, t_end: f64, mode: RhsMode) -> Result<FrontState> {
    let cfg = StepperConfig::new(DtPolicy::Fixed(dt), t_end, mode);
    run(init, &cfg, params, &mut |_: &FrontState, _: usize| -> Result<()> { Ok(()) })
}

fn diagnostics_bytes(name: &str, threads: usize, dir: &Path) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let cfg = preset(name)?;
    let out = pool.install(|| run_experiment(&cfg, dir))?.1;
    Ok(fs::read(out.diagnostics)?)
}

fn integrator(suite: &mut Suite, root: &Path) -> Result<()> {
    let t = Instant::now();
    let grid = Grid::new(128, 20.0 * PI)?;
    let params = Params::with_alpha(1.5)?;
    let init = gaussian(grid, 0.3, 2.0);
    let reference = advance(&init, &params, 0.25 / 8.0, 16.0, RhsMode::CubicSpectral)?;
    let mut errs = Vec::new();
    for dt in [1.0, 0.5, 0.25] {
        errs.push(l2_diff(&advance(&init, &params, dt, 16.0, RhsMode::CubicSpectral)?, &reference));
    }
    let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());

    // exact solution of the linear flow at Θ = -1, α = 1.5: cos(kx + p) ↦ cos(kx + p + √(2π) k^{1/2} t)
    let lin_grid = Grid::new(64, 2.0 * PI)?;
    let modes = [(1.0, 0.03, 0.2), (3.0, -0.01, 1.1), (7.0, 0.005, -0.4)];
    let field = |t: f64| {
        FrontState::from_fn(lin_grid, t, |x| {
            modes
                .iter()
                .map(|(k, a, p)| a * (k * x + p + (2.0 * PI).sqrt() * k.sqrt() * t).cos())
                .sum()
        })
    };
    let t_lin = 37.3;
    let got = advance(&field(0.0), &params, 0.7, t_lin, RhsMode::Linear)?;
    let lin_err = got
        .values()
        .iter()
        .zip(field(t_lin).values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut same = true;
    for name in ["decay", "kinematic"] {
        let a = diagnostics_bytes(name, 1, &root.join(format!("det-{name}-1a")))?;
        let b = diagnostics_bytes(name, 1, &root.join(format!("det-{name}-1b")))?;
        let c = diagnostics_bytes(name, 4, &root.join(format!("det-{name}-4")))?;
        same &= a == b && a == c;
    }
    // a contour-driven evolution exercises the parallel quadrature reductions
    let mut cfg = preset("kinematic")?;
    cfg.task = gsqg::config::Task::Evolve;
    cfg.grid.n_points = 64;
    cfg.stepper = StepperConfig::new(DtPolicy::Fixed(0.1), 0.3, RhsMode::Contour);
    cfg.diagnostics.sample_interval = 0.1;
    let mut streams = Vec::new();
    for (k, threads) in [1usize, 1, 4].into_iter().enumerate() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let out = pool.install(|| run_experiment(&cfg, &root.join(format!("det-contour-{k}"))))?.1;
        streams.push(fs::read(out.diagnostics)?);
    }
    same &= streams[0] == streams[1] && streams[0] == streams[2];

    let (fast, time) = within(t.elapsed(), 300.0);
    suite.check(
        "9",
        "integrator quality",
        order >= 3.8 && lin_err <= 1e-12 && same && fast,
        format!("self-convergence order {order:.3}, linear error {lin_err:.1e}, byte-identical across runs and threads {{1,4}}: {same}, {time}"),
    );
    Ok(())
}

fn scattering(suite: &mut Suite, e: &EvolveSummary) {
    let worst = e.phase_probes.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let text: Vec<String> = e.phase_probes.iter().map(|p| format!("xi {}: {:.3}", p.xi, p.ratio)).collect();
    suite.check(
        "10",
        "scattering phase",
        e.phase_probes.len() == 3 && worst <= 0.5,
        format!("v/h phase variation ratios {} (need <= 0.5)", text.join(", ")),
    );
}

fn main() -> ExitCode {
    // filters passed by `cargo test <name>` do not apply to this target
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let root = tempfile::tempdir().expect("scratch directory");
    let mut suite = Suite { lines: Vec::new() };
    let mut errors = Vec::new();
    let mut guard = |label: &str, r: Result<()>| {
        if let Err(e) = r {
            errors.push(format!("{label}: {e}"));
        }
    };
    guard("1", constants(&mut suite));
    guard("2", symbol_oracle(&mut suite));
    guard("3", resonance(&mut suite));
    guard("4", cubic_equivalence(&mut suite));
    guard("5", series_consistency(&mut suite));
    guard("6", conservation(&mut suite, root.path()));
    let mut decayed = None;
    guard("7", decay(&mut suite, root.path()).map(|e| decayed = Some(e)));
    guard("8", identities(&mut suite, root.path()));
    guard("9", integrator(&mut suite, root.path()));
    match &decayed {
        Some(e) => scattering(&mut suite, e),
        None => errors.push("10: no decay run to probe".into()),
    }
    for e in &errors {
        println!("FAIL error {e}");
    }
    let failed: Vec<String> = suite
        .lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| format!("{} ({})", l.id, l.title))
        .collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        suite.lines.len() - failed.len(),
        failed.len() + errors.len(),
        if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) }
    );
    if failed.is_empty() && errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
