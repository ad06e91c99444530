use std::f64::consts::{PI, TAU};

use cgphase::ising::{
    bogoliubov_angle, exceptional_point, ground_energy, ground_phase_finite, magnetization_from_phase,
    mode_hamiltonian, mode_spectrum, overall_phase_closed, overall_phase_finite, overall_phase_thermo, IsingParams,
    QptOrder,
};
use cgphase::nalgebra::DMatrix;
use cgphase::phase::wilson_loop_phase;
use cgphase::quad::{integrate, QuadOptions};
use cgphase::twolevel::{classify_degeneracy, complex_radius, DegeneracyKind, DEFAULT_TOL_DEGENERACY};
use cgphase::{Complex64, ComplexVec3, LoopPath, TwoLevelHamiltonian};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn off_circle(h: f64, d: f64, band: f64) -> bool {
    (h * h + d * d - 1.0).abs() > band
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angles_agree_with_the_mode_hamiltonian(h in 0.0..2.0f64, d in 0.0..0.9f64, phi in 0.0..TAU) {
        prop_assume!(off_circle(h, d, 1e-3));
        let p = IsingParams { phi, ..IsingParams::new(h, d).with_sites(64) };
        let s = mode_spectrum(&p).unwrap();
        for (j, &k) in s.momenta.iter().enumerate() {
            let hk = mode_hamiltonian(&p, k);
            let core = hk.r_vec.z / complex_radius(&hk.r_vec);
            let sign = if s.branch_flipped[j] { -1.0 } else { 1.0 };
            prop_assert!((s.cos_theta[j] - sign * core).norm() < 1e-12);
            prop_assert!((bogoliubov_angle(&p, k).unwrap() - s.cos_theta[j]).norm() < 1e-15);
            prop_assert!((s.energies[j] * s.energies[j] - complex_radius(&hk.r_vec).powi(2)).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_only_rotates_the_transverse_field(h in 0.0..2.0f64, d in 0.0..0.9f64, phi in 0.0..TAU) {
        prop_assume!(off_circle(h, d, 1e-3));
        let base = IsingParams::new(h, d).with_sites(32);
        let rotated = IsingParams { phi, ..base };
        prop_assert_eq!(mode_spectrum(&base).unwrap().cos_theta, mode_spectrum(&rotated).unwrap().cos_theta);
    }

    #[test]
    fn closed_form_is_real_without_dissipation(h in 0.0..3.0f64) {
        prop_assume!((h - 1.0).abs() > 1e-6);
        let g = c(h, 0.0);
        prop_assert!(overall_phase_closed(g).unwrap().im.abs() < 1e-12);
        prop_assert!(overall_phase_thermo(g).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn circle_from_trace(d in 0.0..1.0f64) {
        let q = exceptional_point(d, 1.0).unwrap();
        prop_assert!((q.h_c * q.h_c + d * d - 1.0).abs() < 1e-12);
        prop_assert_eq!(q.order, if d > 0.0 { QptOrder::First } else { QptOrder::Second });
    }
}

#[test]
fn finite_sum_examples() {
    // g = 0, N = 4: the cosines cancel
    assert!((ground_phase_finite(&IsingParams::new(0.0, 0.0).with_sites(4)).unwrap() - TAU).norm() < 1e-14);
    for n in [2, 4, 10, 64, 1024] {
        let v = overall_phase_finite(&IsingParams::new(0.0, 0.0).with_sites(n)).unwrap();
        assert!((v - PI).norm() < 1e-13, "N = {n}: {v}");
    }
    assert!(
        ground_phase_finite(&IsingParams::new(1e4, 0.0).with_sites(64))
            .unwrap()
            .norm()
            < 1e-3
    );
    let p = IsingParams::new(2.0, 0.0);
    assert!((overall_phase_finite(&p).unwrap() - overall_phase_thermo(p.g()).unwrap()).norm() < 1e-8);
}

#[test]
fn finite_size_converges_away_from_the_circle() {
    for (h, d) in [(0.5, 0.2), (2.0, 0.0), (1.5, 0.5), (0.2, 0.5), (0.3, 0.6), (1.3, 0.8)] {
        let p = IsingParams::new(h, d);
        let dist = ((h * h + d * d).sqrt() - 1.0).abs();
        assert!(dist > 0.1);
        let diff = (overall_phase_finite(&p).unwrap() - overall_phase_thermo(p.g()).unwrap()).norm();
        assert!(diff < 1e-8, "({h}, {d}): {diff:e}");
    }
}

/// `H(k)` with the azimuth carried as the point `(cos φ, sin φ)`.
fn azimuth_map(p: &IsingParams, k: f64) -> impl Fn(&[Complex64]) -> DMatrix<Complex64> + Sync {
    let h = mode_hamiltonian(p, k);
    let transverse = h.r_vec.x;
    let (l0, z) = (h.lambda0, h.r_vec.z);
    move |q: &[Complex64]| {
        TwoLevelHamiltonian::new(l0, ComplexVec3::new(transverse * q[0], transverse * q[1], z)).to_dmatrix()
    }
}

#[test]
fn per_mode_phases_match_wilson_loops() {
    let p = IsingParams::new(0.5, 0.1).with_sites(64);
    let s = mode_spectrum(&p).unwrap();
    let loop_path = LoopPath::circle(
        vec![c(0.0, 0.0); 2],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        2048,
    )
    .unwrap();
    let mut total = c(0.0, 0.0);
    for (j, &k) in s.momenta.iter().enumerate() {
        assert!(!s.branch_flipped[j]);
        let w = wilson_loop_phase(&azimuth_map(&p, k), &loop_path, 0).unwrap().gamma;
        let mode_term = PI * (1.0 - s.cos_theta[j]);
        assert!((w - mode_term).norm() < 1e-8, "k = {k}: {w} vs {mode_term}");
        total += w;
    }
    assert!((total - ground_phase_finite(&p).unwrap()).norm() < 1e-8 * s.momenta.len() as f64);
}

#[test]
fn ground_energy_examples() {
    assert!((ground_energy(c(0.0, 0.0), 0.0, 1.0).unwrap() + 1.0).norm() < 1e-14);
    let g = c(0.5, 0.0);
    let s = 1e-5;
    let de = (ground_energy(g + s, 0.0, 1.0).unwrap() - ground_energy(g - s, 0.0, 1.0).unwrap()) / (2.0 * s);
    assert!((de - (overall_phase_closed(g).unwrap() / PI - 1.0)).norm() < 1e-6);
    assert!((magnetization_from_phase(g).unwrap() - de).norm() < 1e-6);
    // δ = 0.3, h = 0.4 against −iδ − (1/2π)∫ ε(x) dx
    let (h, d) = (0.4, 0.3);
    let g = c(h, -d);
    let eps = integrate(
        |x| 2.0 * (g * g - 2.0 * g * x.cos() + 1.0).sqrt(),
        0.0,
        PI,
        QuadOptions::default(),
    )
    .value;
    let reference = c(0.0, -d) - eps / (2.0 * PI);
    let e = ground_energy(g, d, 1.0).unwrap();
    assert!((e - reference).norm() < 1e-9, "{e} vs {reference}");
}

#[test]
fn magnetization_limits() {
    assert!(magnetization_from_phase(c(0.0, 0.0)).unwrap().norm() < 1e-12);
    assert!((magnetization_from_phase(c(1e6, 0.0)).unwrap() + 1.0).norm() < 1e-6);
}

#[test]
fn exceptional_circle_points() {
    let q = exceptional_point(0.0, 1.0).unwrap();
    assert_eq!(
        (q.h_c, q.k_c, q.order, q.jump),
        (1.0, 0.0, QptOrder::Second, c(0.0, 0.0))
    );
    let q = exceptional_point(1.0, 1.0).unwrap();
    assert!(q.h_c.abs() < 1e-15 && (q.k_c - PI / 2.0).abs() < 1e-15);
    let q = exceptional_point(0.6, 1.0).unwrap();
    assert!((q.h_c - 0.8).abs() < 1e-15);
    assert!(exceptional_point(1.2, 1.0).is_err());
    for d in [0.1, 0.5, 0.9] {
        let q = exceptional_point(d, 1.0).unwrap();
        let hk = mode_hamiltonian(&IsingParams::new(q.h_c, d), q.k_c);
        assert!(complex_radius(&hk.r_vec).norm() < 1e-12);
        assert_eq!(
            classify_degeneracy(&hk.r_vec, DEFAULT_TOL_DEGENERACY).kind,
            DegeneracyKind::ExceptionalPoint
        );
    }
}
