//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cgphase::adiabatic::{equator_benchmark, BENCH_FIELD, DEFAULT_TOL};
use cgphase::ising::{
    exceptional_point, ground_energy, mode_hamiltonian, mode_spectrum, overall_phase_closed, overall_phase_finite,
    overall_phase_thermo, phase_derivative, IsingParams,
};
use cgphase::nalgebra::DMatrix;
use cgphase::phase::{monopole_phase, phase_limits_im, phase_limits_re, wilson_loop_phase, ZSign};
use cgphase::quad::{integrate, QuadOptions};
use cgphase::scan::{run_scan, Axis, OutputFormat, ScanConfig, ScanMode, ScanReport};
use cgphase::specfun::complete_ke;
use cgphase::twolevel::{classify_degeneracy, complex_radius, DegeneracyKind, DEFAULT_TOL_DEGENERACY};
use cgphase::{Complex64, ComplexVec3, LoopPath, TwoLevelHamiltonian};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The 20×20 `(h, δ)` grid with the band `|h² + δ² − 1| < 1e-3` removed.
fn grid() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let h = 2.0 * i as f64 / 19.0;
            let d = 0.9 * j as f64 / 19.0;
            if (h * h + d * d - 1.0).abs() >= 1e-3 {
                pts.push((h, d));
            }
        }
    }
    pts
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failed = None;
    for (h, d) in grid() {
        let g = c(h, -d);
        match (overall_phase_thermo(g), overall_phase_closed(g)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).norm()),
            (a, b) => failed = Some(format!("({h}, {d}): {:?} / {:?}", a.err(), b.err())),
        }
    }
    let elapsed = start.elapsed();
    if let Some(f) = failed {
        return outcome(false, f);
    }
    outcome(
        worst < 1e-9 && elapsed < Duration::from_secs(10),
        format!(
            "max |quadrature - closed form| = {worst:.2e} over {} points in {elapsed:.2?}",
            grid().len()
        ),
    )
}

fn derivative_identity() -> Outcome {
    let step = 1e-5;
    let mut worst = 0.0f64;
    for (h, d) in grid() {
        let g = c(h, -d);
        let (Ok(gamma), Ok(plus), Ok(minus)) = (
            overall_phase_closed(g),
            ground_energy(g + step, d, 1.0),
            ground_energy(g - step, d, 1.0),
        ) else {
            return outcome(false, format!("evaluation failed at ({h}, {d})"));
        };
        let de = (plus - minus) / (2.0 * step);
        worst = worst.max((gamma - PI * (1.0 + de)).norm() / gamma.norm());
    }
    outcome(worst < 1e-6, format!("max relative error {worst:.2e}"))
}

fn limits() -> Outcome {
    let (Ok(at_zero), Ok(large)) = (overall_phase_thermo(c(0.0, 0.0)), overall_phase_thermo(c(100.0, 0.0))) else {
        return outcome(false, "evaluation failed".into());
    };
    let zero_err = (at_zero - PI).norm();
    outcome(
        zero_err <= 1e-10 && large.re < 1e-3,
        format!("|gamma(0) - pi| = {zero_err:.2e}, Re gamma(h=100) = {:.2e}", large.re),
    )
}

fn qpt_order() -> Outcome {
    let thermo = |h: f64, d: f64| overall_phase_thermo(c(h, -d)).map(|z| z.re);
    let h_c = 0.75f64.sqrt();
    let (Ok(below), Ok(above)) = (thermo(h_c - 0.01, 0.5), thermo(h_c + 0.01, 0.5)) else {
        return outcome(false, "evaluation failed near delta = 0.5".into());
    };
    let jump = (below - above).abs();
    let (Ok(left), Ok(right)) = (thermo(0.99, 0.0), thermo(1.01, 0.0)) else {
        return outcome(false, "evaluation failed near h = 1".into());
    };
    let continuity = (left - right).abs();

    let mut slopes = Vec::new();
    for j in 2..=5 {
        let e = 10f64.powi(-j);
        let mut pair = [0.0; 2];
        for (slot, h) in pair.iter_mut().zip([1.0 - e, 1.0 + e]) {
            match phase_derivative(c(h, 0.0), 1e-5f64.min(e / 10.0)) {
                Ok(v) => *slot = v.norm(),
                Err(err) => return outcome(false, format!("derivative at h = {h}: {err}")),
            }
        }
        slopes.push(pair);
    }
    let monotone = slopes.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] > w[0][1]);

    let first = jump > 0.1;
    let continuous = continuity < 0.01;
    let slope_text: Vec<String> = slopes.iter().map(|p| format!("{:.2}/{:.2}", p[0], p[1])).collect();
    outcome(
        first && continuous && monotone,
        format!(
            "jump(delta=0.5) = {jump:.4} [{}]; |gamma(0.99) - gamma(1.01)| at delta=0 = {continuity:.4} [{}]; \
             |dgamma/dh| at 1-/+10^-j, j=2..5: {} [{}]",
            if first { "ok" } else { "fail" },
            if continuous { "ok" } else { "fail" },
            slope_text.join(", "),
            if monotone { "ok" } else { "fail" },
        ),
    )
}

fn exceptional_circle() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [0.1, 0.5, 0.9] {
        let q = match exceptional_point(d, 1.0) {
            Ok(q) => q,
            Err(e) => return outcome(false, format!("delta = {d}: {e}")),
        };
        let hk = mode_hamiltonian(&IsingParams::new(q.h_c, d), q.k_c);
        let r = complex_radius(&hk.r_vec).norm();
        let kind = classify_degeneracy(&hk.r_vec, DEFAULT_TOL_DEGENERACY).kind;
        pass &= r < 1e-12 && kind == DegeneracyKind::ExceptionalPoint;
        pass &= (q.h_c - (1.0 - d * d).sqrt()).abs() < 1e-15 && (q.k_c - d.asin()).abs() < 1e-15;
        parts.push(format!("delta={d}: |R| = {r:.1e} {kind:?}"));
    }
    outcome(pass, parts.join("; "))
}

fn monopole_limits() -> Outcome {
    let spot = [
        (phase_limits_re(1.0, ZSign::Plus, 0.5), PI),
        (phase_limits_re(0.0, ZSign::Plus, 0.5), 0.0),
        (phase_limits_re(0.3, ZSign::Minus, 0.5), 2.25 * PI),
        (phase_limits_im(0.3, 0.5), 0.0),
        (phase_limits_im(0.4, 0.2), PI / 3f64.sqrt()),
        (phase_limits_im(0.7, 0.0), 0.0),
    ];
    let mut worst = 0.0f64;
    for (got, want) in spot {
        match got {
            Ok(v) => worst = worst.max((v - want).abs()),
            Err(e) => return outcome(false, format!("spot value: {e}")),
        }
    }
    let eps = 0.5;
    let n = 41;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let d = 10f64.powf(-6.0 + 4.0 * j as f64 / (n - 1) as f64);
        let Ok(v) = phase_limits_im(eps + d, eps) else {
            return outcome(false, format!("Im gamma at r - eps = {d:e}"));
        };
        let (x, y) = (d.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    outcome(
        worst < 1e-12 && (slope + 0.5).abs() <= 0.02,
        format!("max spot error {worst:.1e}, fitted exponent {slope:.4}"),
    )
}

fn field_map(p: &[Complex64]) -> DMatrix<Complex64> {
    TwoLevelHamiltonian::traceless(ComplexVec3::new(p[0], p[1], p[2])).to_dmatrix()
}

fn cross_method() -> Outcome {
    let field = BENCH_FIELD;
    let analytic = match monopole_phase(&ComplexVec3::real(field, 0.0, 0.0)) {
        Ok(p) => p.gamma,
        Err(e) => return outcome(false, format!("analytic: {e}")),
    };
    let wilson = LoopPath::azimuthal(field, 0.0, 0.0, 2048).and_then(|p| wilson_loop_phase(&field_map, &p, 0));
    let wilson = match wilson {
        Ok(p) => p.gamma,
        Err(e) => return outcome(false, format!("wilson: {e}")),
    };
    let mut errors = Vec::new();
    for t in [250.0, 500.0, 1000.0] {
        match equator_benchmark(field, t, DEFAULT_TOL) {
            Ok(row) => errors.push(row.error),
            Err(e) => return outcome(false, format!("adiabatic T = {t}: {e}")),
        }
    }
    let w_err = (wilson - analytic).norm();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let adiabatic_err = errors[2];
    outcome(
        w_err < 1e-8 && adiabatic_err < 1e-3 && ratios.iter().all(|r| (1.6..=2.4).contains(r)),
        format!(
            "|wilson - analytic| = {w_err:.1e}, adiabatic error at T=1000 = {adiabatic_err:.2e}, \
             ratios {:.3}, {:.3}",
            ratios[0], ratios[1]
        ),
    )
}

fn azimuth_map(p: &IsingParams, k: f64) -> impl Fn(&[Complex64]) -> DMatrix<Complex64> + Sync {
    let h = mode_hamiltonian(p, k);
    let (l0, x, z) = (h.lambda0, h.r_vec.x, h.r_vec.z);
    move |q: &[Complex64]| TwoLevelHamiltonian::new(l0, ComplexVec3::new(x * q[0], x * q[1], z)).to_dmatrix()
}

fn finite_size() -> Outcome {
    let p = IsingParams::new(0.5, 0.2);
    let (Ok(f), Ok(t)) = (overall_phase_finite(&p), overall_phase_thermo(p.g())) else {
        return outcome(false, "evaluation failed".into());
    };
    let thermo_diff = (f - t).norm();

    let small = p.with_sites(64);
    let spectrum = match mode_spectrum(&small) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("spectrum: {e}")),
    };
    let circle = LoopPath::circle(
        vec![c(0.0, 0.0); 2],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        2048,
    );
    let Ok(circle) = circle else {
        return outcome(false, "loop construction".into());
    };
    let mut worst = 0.0f64;
    for (j, &k) in spectrum.momenta.iter().enumerate() {
        match wilson_loop_phase(&azimuth_map(&small, k), &circle, 0) {
            Ok(w) => worst = worst.max((w.gamma - PI * (1.0 - spectrum.cos_theta[j])).norm()),
            Err(e) => return outcome(false, format!("mode k = {k}: {e}")),
        }
    }
    outcome(
        thermo_diff < 1e-8 && worst < 1e-8,
        format!("|gamma(N=1024) - gamma(inf)| = {thermo_diff:.1e}, max per-mode |wilson - pi(1 - cos theta)| (N=64) = {worst:.1e}"),
    )
}

fn special_functions() -> Outcome {
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        ..QuadOptions::default()
    };
    let mut worst = 0.0f64;
    // 200 moduli on a sunflower spiral filling |k| < 0.95
    let golden = PI * (3.0 - 5f64.sqrt());
    for i in 0..200 {
        let k = Complex64::from_polar(0.95 * ((i as f64 + 0.5) / 200.0).sqrt(), golden * i as f64);
        let Ok((kk, ee)) = complete_ke(k) else {
            return outcome(false, format!("K/E at {k}"));
        };
        let kq = integrate(|t| (1.0 - k * k * t.sin().powi(2)).sqrt().inv(), 0.0, FRAC_PI_2, opts).value;
        let eq = integrate(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, opts).value;
        worst = worst.max((kk - kq).norm()).max((ee - eq).norm());
    }
    let mut legendre = 0.0f64;
    for i in 1..100 {
        let k = i as f64 / 100.0;
        let kp = (1.0 - k * k).sqrt();
        let (Ok((k1, e1)), Ok((k2, e2))) = (complete_ke(c(k, 0.0)), complete_ke(c(kp, 0.0))) else {
            return outcome(false, format!("K/E at real modulus {k}"));
        };
        legendre = legendre.max((e1 * k2 + e2 * k1 - k1 * k2 - FRAC_PI_2).norm());
    }
    outcome(
        worst < 1e-11 && legendre < 1e-12,
        format!("max |carlson - quadrature| = {worst:.1e}, max Legendre residual = {legendre:.1e}"),
    )
}

fn determinism() -> Outcome {
    let mut outputs = Vec::new();
    for threads in [1, 4, 8] {
        let config = ScanConfig {
            axes: vec![
                Axis {
                    name: "h".into(),
                    min: 0.0,
                    max: 2.0,
                    steps: 101,
                },
                Axis {
                    name: "delta".into(),
                    min: 0.0,
                    max: 0.9,
                    steps: 31,
                },
            ],
            threads: Some(threads),
            ..ScanConfig::new(ScanMode::DerivativeMap)
        };
        let grid = match run_scan(&config) {
            Ok(g) => g,
            Err(e) => return outcome(false, format!("{threads} workers: {e}")),
        };
        let report = ScanReport::Grid(grid);
        let (mut csv, mut json) = (Vec::new(), Vec::new());
        if report.write(OutputFormat::Csv, &mut csv).is_err() || report.write(OutputFormat::Json, &mut json).is_err() {
            return outcome(false, "write failed".into());
        }
        outputs.push((csv, json));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "{} CSV bytes, {} JSON bytes with 1, 4 and 8 workers",
            outputs[0].0.len(),
            outputs[0].1.len()
        ),
    )
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("closed-form equivalence", closed_form_equivalence),
        ("derivative identity", derivative_identity),
        ("limits", limits),
        ("transition order", qpt_order),
        ("exceptional circle", exceptional_circle),
        ("monopole limits", monopole_limits),
        ("cross-method agreement", cross_method),
        ("finite-size convergence", finite_size),
        ("special functions", special_functions),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failures, failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
