use cgphase::adiabatic::{cone_benchmark, evolve_pair, extract_geometric_phase, Schedule};
use cgphase::{Complex64, ComplexVec3, LoopPath, PhaseMethod, TwoLevelHamiltonian};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_times(times: &[f64], total: f64) {
    assert_eq!(times[0], 0.0);
    assert_eq!(*times.last().unwrap(), total);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn constant_hamiltonians_carry_no_geometric_phase() {
    let tol = 1e-10;
    for h in [
        TwoLevelHamiltonian::new(c(0.1, 0.0), ComplexVec3::real(0.2, 0.5, -0.7)),
        TwoLevelHamiltonian::new(c(0.0, -0.3), ComplexVec3::new(c(0.4, 0.1), c(0.0, 0.0), c(0.9, -0.2))),
    ] {
        let p = vec![h.r_vec.x, h.r_vec.y, h.r_vec.z];
        let schedule = Schedule::new(LoopPath::constant(p, 64).unwrap(), 40.0).unwrap();
        let hf = |_: f64| h;
        let traj = evolve_pair(&hf, &schedule, tol).unwrap();
        check_times(&traj.times, 40.0);
        assert!(traj.overlap_log.norm() < 10.0 * tol);
        let gamma = extract_geometric_phase(&traj, &hf).unwrap();
        assert_eq!(gamma.method, PhaseMethod::Adiabatic);
        assert!(gamma.gamma.norm() < 1e-8, "{}", gamma.gamma);
    }
}

#[test]
fn north_pole_loop_is_trivial() {
    // θ = 0: the field never moves, the loop has zero solid angle
    let row = cone_benchmark(1.0, 0.0, 0.0, 100.0, 1e-10).unwrap();
    assert!(row.gamma.norm() < 1e-8, "{}", row.gamma);
}

#[test]
fn complex_cone_trajectory() {
    let path = LoopPath::azimuthal(10.0 * 0.8, 10.0 * 0.6, 0.2, 1024).unwrap();
    let schedule = Schedule::new(path, 200.0).unwrap();
    let h = schedule.field_hamiltonian(c(0.0, 0.0)).unwrap();
    // evolve_pair itself rejects an overlap drift above 10·tol
    let traj = evolve_pair(&h, &schedule, 1e-10).unwrap();
    check_times(&traj.times, 200.0);
    assert!(traj.overlap_log.is_finite());
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), traj.times.len() + 1);
    assert!(text.lines().all(|l| l.split(',').count() == 7));
}
