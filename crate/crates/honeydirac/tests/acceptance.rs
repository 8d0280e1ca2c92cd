//! Acceptance suite: one test per release criterion, each printing a
//! [PASS] line with the measured numbers (visible with --nocapture).
//!
//! Desk scale throughout: standard potential, cutoff N = 6, Kerr K₀ = 1,
//! εV = 0.5 (the Dirac gap is then ≈ 0.75, well resolved).

use std::f64::consts::PI;
use std::time::Instant;

use honeydirac::bootstrap::{
    bootstrap_equator, bootstrap_polar, find_bifurcation_modes, predicted_roots,
    radial_separability_probe, uniqueness_probe, BootstrapConfig, PolarMode, ScanStatus,
};
use honeydirac::cli::{cmd_bifurcate, cmd_integrals, cmd_spectrum, cmd_verify, RunConfig};
use honeydirac::fields::kahan_complex;
use honeydirac::lattice::{IndexSet, LatticeBasis};
use honeydirac::linear_spectrum::{build_hamiltonian, dirac_basis, solve_spectrum, SymmetryClass};
use honeydirac::nonlinearity::{HoneycombPotential, NonlinearityKind};
use honeydirac::perturbation::t2_sum;
use honeydirac::system::System;
use num_complex::Complex64;

const CUTOFF: u32 = 6;
const EPS_V: f64 = 0.5;

fn production_system() -> System {
    let pot = HoneycombPotential::standard().with_amplitude(EPS_V);
    System::assemble(pot, NonlinearityKind::Kerr { k0: 1.0 }, CUTOFF).expect("assembly")
}

fn pass(msg: &str) {
    println!("[PASS] {msg}");
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

/// Criterion 1: εV = 0 ⇒ lowest eigenvalue 16π²/9 with multiplicity exactly
/// 3, relative error ≤ 1e−10, in under a second.
#[test]
fn criterion_1_free_particle_degeneracy() {
    let t0 = Instant::now();
    let lattice = LatticeBasis::honeycomb();
    let set = IndexSet::build(CUTOFF).unwrap();
    let pot = HoneycombPotential::standard();
    let h = build_hamiltonian(&lattice, &set, &pot, 0.0);
    let (vals, _) = solve_spectrum(&h).unwrap();
    let expected = 16.0 * PI * PI / 9.0;
    assert!(
        (vals[0] - expected).abs() <= 1e-10 * expected,
        "lowest eigenvalue {} vs {expected}",
        vals[0]
    );
    let mult = vals
        .iter()
        .filter(|&&v| (v - expected).abs() <= 1e-10 * expected)
        .count();
    assert_eq!(mult, 3, "ground multiplicity");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?}");
    pass(&format!(
        "criterion 1: free-particle ground shell at 16pi^2/9 = {expected:.10}, multiplicity 3 ({dt:?})"
    ));
}

/// Criterion 2: small εV with V₁,₁ > 0 ⇒ two-dimensional ground eigenspace
/// with classes {ω, ω̄} and φ₀ᵇ = conj_invert(φ₀ᵃ) to 1e−10, in under 5 s.
#[test]
fn criterion_2_theorem_regime() {
    let t0 = Instant::now();
    let lattice = LatticeBasis::honeycomb();
    let set = IndexSet::build(CUTOFF).unwrap();
    let pot = HoneycombPotential::standard();
    let (_, basis) = dirac_basis(&lattice, &set, &pot, EPS_V).unwrap();
    // select_dirac enforces cluster size exactly 2; double-check the gap
    assert!((basis.eigenvalues[0] - basis.eigenvalues[1]).abs() < 1e-10);
    assert!(basis.degeneracy_gap > 0.1);
    assert_eq!(basis.classes[0], SymmetryClass::Omega);
    assert_eq!(basis.classes[1], SymmetryClass::OmegaBar);
    let defect = basis.phi_a().conj_inverted().distance(basis.phi_b());
    assert!(defect <= 1e-10, "conj_invert defect {defect:.3e}");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "runtime {dt:?}");
    pass(&format!(
        "criterion 2: Dirac pair at E0 = {:.10}, gap {:.4}, classes (omega, omega_bar), conj defect {defect:.1e} ({dt:?})",
        basis.e0, basis.degeneracy_gap
    ));
}

/// Criterion 3: the vanishing integral, I_a = I_b, and the T₂ class
/// selection rule at their stated tolerances.
#[test]
fn criterion_3_symmetry_identities() {
    let sys = production_system();
    let grid = &sys.grid;
    let m_samples = sys.potential.sample_shape(grid);
    let m_inf = m_samples.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));

    // vanishing integral over several (ω, ω̄) pairs
    let mut pairs: Vec<(&str, Vec<Complex64>, Vec<Complex64>)> = vec![(
        "dirac",
        sys.phi_a_samples.clone(),
        sys.phi_b_samples.clone(),
    )];
    let mut excited_omega = None;
    let mut excited_bar = None;
    for (_, field, class) in sys.basis.excited_states() {
        if class == SymmetryClass::Omega && excited_omega.is_none() {
            excited_omega = Some(grid.to_grid(field));
        }
        if class == SymmetryClass::OmegaBar && excited_bar.is_none() {
            excited_bar = Some(grid.to_grid(field));
        }
    }
    pairs.push(("excited", excited_omega.unwrap(), excited_bar.unwrap()));
    let mut worst: f64 = 0.0;
    for (name, g, h) in &pairs {
        let i1 = kahan_complex((0..g.len()).map(|j| m_samples[j] * g[j].conj() * h[j]))
            * grid.weight();
        let i2 = kahan_complex((0..g.len()).map(|j| m_samples[j] * g[j] * h[j].conj()))
            * grid.weight();
        let budget = 1e-10 * m_inf; // unit-norm fields
        assert!(i1.norm() <= budget, "{name}: |I| = {:.3e}", i1.norm());
        assert!(i2.norm() <= budget, "{name}: |I'| = {:.3e}", i2.norm());
        worst = worst.max(i1.norm()).max(i2.norm());
    }

    // quartic conjugation symmetry
    let report = &sys.report;
    assert!(
        report.i_a_minus_i_b.abs() <= 1e-10 * report.i_one.abs(),
        "I_a - I_b = {:.3e}",
        report.i_a_minus_i_b
    );

    // T₂ selection rule: unrestricted sum agrees with the class-1 restriction
    let t2 = t2_sum(grid, &sys.basis, sys.model.k_field());
    let sel = (t2.restricted - t2.unrestricted).norm() / t2.restricted.norm();
    assert!(sel <= 1e-8, "selection-rule defect {sel:.3e}");

    pass(&format!(
        "criterion 3: vanishing integral max {worst:.1e}, |I_a-I_b|/I_one = {:.1e}, T2 selection defect {sel:.1e}",
        report.i_a_minus_i_b.abs() / report.i_one
    ));
}

/// Criterion 4: contraction and scaling laws over ε ∈ {0.02, 0.04, 0.08}:
/// outer ratio ≤ C·ε² with stable C, ‖φ̃‖ ~ ε^3.0±0.1, ℑE′ ~ ε^4.0±0.1,
/// E′ ~ ε^2.0±0.05, all inside 2 minutes.
#[test]
fn criterion_4_contraction_and_scaling() {
    let t0 = Instant::now();
    let sys = production_system();
    let epsilons = [0.02, 0.04, 0.08];
    let beta_generic = -sys.report.theta_pred + PI / 6.0;

    let mut corr_pts = Vec::new();
    let mut energy_pts = Vec::new();
    let mut im_pts = Vec::new();
    let mut fitted_c = Vec::new();
    for &eps in &epsilons {
        let cfg = BootstrapConfig::new(eps);
        let polar = bootstrap_polar(&sys, PolarMode::APole, &cfg).unwrap();
        corr_pts.push((eps.ln(), polar.correction_norm.ln()));
        energy_pts.push((eps.ln(), polar.e_shift.re.ln()));
        let ratio = polar.outer_contraction[0];
        assert!(ratio < 1.0, "outer iteration not contracting at eps={eps}");
        fitted_c.push(ratio / (eps * eps));
        let generic = bootstrap_equator(&sys, beta_generic, &cfg).unwrap();
        im_pts.push((eps.ln(), generic.e_shift.im.abs().ln()));
    }

    let c_min = fitted_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_max = fitted_c.iter().cloned().fold(0.0_f64, f64::max);
    assert!(
        c_max / c_min <= 2.0,
        "contraction constant unstable: {fitted_c:?}"
    );

    let s_corr = slope(&corr_pts);
    let s_energy = slope(&energy_pts);
    let s_im = slope(&im_pts);
    assert!((s_corr - 3.0).abs() <= 0.1, "correction exponent {s_corr}");
    assert!((s_im - 4.0).abs() <= 0.1, "imaginary-energy exponent {s_im}");
    assert!((s_energy - 2.0).abs() <= 0.05, "energy exponent {s_energy}");

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "runtime {dt:?}");
    pass(&format!(
        "criterion 4: exponents phi~{s_corr:.3}, ImE~{s_im:.3}, E~{s_energy:.4}; C in [{c_min:.2}, {c_max:.2}] ({dt:?})"
    ));
}

/// Criterion 5: Richardson-extrapolated (E−E₀)/ε² matches I_one (polar) and
/// I_int + I_one/2 (equator) within 2%.
#[test]
fn criterion_5_eigenvalue_coefficients() {
    let sys = production_system();
    let epsilons = [0.02, 0.04, 0.08];
    let beta_root = -sys.report.theta_pred;

    let richardson = |v: &[f64]| -> f64 {
        // v(ε) = c0 + c1·ε² + c2·ε⁴ on a doubling grid
        let r1a = (4.0 * v[0] - v[1]) / 3.0;
        let r1b = (4.0 * v[1] - v[2]) / 3.0;
        (16.0 * r1a - r1b) / 15.0
    };

    let mut polar_vals = Vec::new();
    let mut equator_vals = Vec::new();
    for &eps in &epsilons {
        let cfg = BootstrapConfig::new(eps);
        let polar = bootstrap_polar(&sys, PolarMode::APole, &cfg).unwrap();
        polar_vals.push(polar.e_shift.re / (eps * eps));
        let eq = bootstrap_equator(&sys, beta_root, &cfg).unwrap();
        equator_vals.push(eq.e_shift.re / (eps * eps));
    }
    let polar_coeff = richardson(&polar_vals);
    let equator_coeff = richardson(&equator_vals);
    let polar_target = sys.report.i_one;
    let equator_target = sys.report.i_int + sys.report.i_one / 2.0;
    let polar_err = (polar_coeff - polar_target).abs() / polar_target;
    let equator_err = (equator_coeff - equator_target).abs() / equator_target;
    assert!(polar_err <= 0.02, "polar coefficient off by {polar_err:.4}");
    assert!(
        equator_err <= 0.02,
        "equator coefficient off by {equator_err:.4}"
    );
    pass(&format!(
        "criterion 5: (E-E0)/eps^2 -> {polar_coeff:.6} vs I_one = {polar_target:.6} ({:.2}%), {equator_coeff:.6} vs I_int+I_one/2 = {equator_target:.6} ({:.2}%)",
        100.0 * polar_err,
        100.0 * equator_err
    ));
}

/// Criterion 6: exactly 8 certified modes; six equator roots spaced π/3 and
/// matching (nπ − arg I_c-int)/3 within 5ε²; rotation triples share
/// eigenvalues to 1e−10 relative; every certified residual ≤ 1e−8.
#[test]
fn criterion_6_eight_mode_bifurcation() {
    let t0 = Instant::now();
    let sys = production_system();
    let cfg = BootstrapConfig::new(0.05);
    let scan = find_bifurcation_modes(&sys, &cfg).unwrap();
    assert_eq!(scan.status, ScanStatus::EightModes);
    assert_eq!(scan.modes.len(), 8);
    assert_eq!(scan.roots.len(), 6);

    let bound = 5.0 * cfg.epsilon * cfg.epsilon;
    for i in 0..6 {
        let gap = if i + 1 < 6 {
            scan.roots[i + 1] - scan.roots[i]
        } else {
            scan.roots[0] + 2.0 * PI - scan.roots[5]
        };
        assert!(
            (gap - PI / 3.0).abs() <= bound,
            "root spacing {gap} at {i}"
        );
    }
    assert!(
        scan.root_deviation <= bound,
        "roots deviate from (n*pi - arg I)/3 by {}",
        scan.root_deviation
    );
    let predicted = predicted_roots(sys.report.i_c_int);
    assert_eq!(predicted.len(), 6);

    // rotation triples: sorted equator roots alternate between the two
    // triples, so members are two apart
    for parity in 0..2 {
        let es: Vec<f64> = (0..3)
            .map(|k| sys.basis.e0 + scan.modes[2 + parity + 2 * k].e_shift.re)
            .collect();
        for w in es.windows(2) {
            assert!(
                (w[0] - w[1]).abs() <= 1e-10 * w[0].abs(),
                "triple eigenvalues {es:?}"
            );
        }
    }

    for (k, mode) in scan.modes.iter().enumerate() {
        assert!(mode.is_true_eigenpair, "mode {k} not certified true");
        assert!(
            mode.residual <= 1e-8,
            "mode {k} residual {:.3e}",
            mode.residual
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "runtime {dt:?}");
    pass(&format!(
        "criterion 6: 8 certified modes, root deviation {:.2e} (bound {bound:.2e}), max residual {:.1e} ({dt:?})",
        scan.root_deviation,
        scan.modes.iter().map(|m| m.residual).fold(0.0, f64::max)
    ));
}

/// Criterion 7: five perturbed restarts per mode re-converge within
/// 10·outer_tol; off-equator consistency defects are bounded below by the
/// necessary-condition landscape with a positive fitted constant.
#[test]
fn criterion_7_uniqueness_and_separability() {
    let sys = production_system();
    let cfg = BootstrapConfig::new(0.05);

    let polar = bootstrap_polar(&sys, PolarMode::APole, &cfg).unwrap();
    let root = bootstrap_equator(&sys, -sys.report.theta_pred, &cfg).unwrap();
    let mut worst = 0.0_f64;
    for (i, mode) in [&polar, &root].iter().enumerate() {
        let probe = uniqueness_probe(&sys, mode, 5, 0.5, 42 + i as u64, &cfg).unwrap();
        assert!(
            probe.all_returned,
            "restart escaped: max distance {:.3e}",
            probe.max_distance
        );
        worst = worst.max(probe.max_distance);
    }

    let thetas = [
        0.0,
        PI / 16.0,
        PI / 8.0,
        3.0 * PI / 16.0,
        PI / 4.0,
    ];
    let sep = radial_separability_probe(&sys, &cfg, &thetas).unwrap();
    // poles and equator attainable
    assert!(sep.rows[0].consistency_residual <= 10.0 * cfg.outer_tol);
    assert!(sep.rows[4].consistency_residual <= 1e-4 * cfg.epsilon * cfg.epsilon);
    // off-manifold pairs bounded below consistently with the landscape
    assert!(sep.fitted_c > 0.25, "fitted constant {}", sep.fitted_c);
    for row in &sep.rows[1..4] {
        assert!(
            row.consistency_residual >= 0.25 * cfg.epsilon * cfg.epsilon * row.landscape,
            "theta {} under the landscape bound",
            row.theta
        );
    }
    pass(&format!(
        "criterion 7: restarts max distance {worst:.1e}, separability constant {:.2}",
        sep.fitted_c
    ));
}

/// Criterion 8: identical config + seed produce byte-identical output trees
/// across the whole pipeline.
#[test]
fn criterion_8_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config_text = "\
potential = standard
epsilon_v = 0.5
nonlinearity = kerr
k0 = 1.0
cutoff = 4
epsilons = 0.04,0.08
beta_samples = 32
seed = 42
";
    let config_path = dir.path().join("run.conf");
    std::fs::write(&config_path, config_text).unwrap();

    let run_all = |out: &std::path::Path| {
        let mut cfg = RunConfig::parse_file(&config_path).unwrap();
        cfg.output_dir = out.to_path_buf();
        cfg.quiet = true;
        cmd_spectrum(&cfg).unwrap();
        cmd_integrals(&cfg).unwrap();
        cmd_bifurcate(&cfg).unwrap();
        cmd_verify(&cfg).unwrap();
    };
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    run_all(&out1);
    run_all(&out2);

    let mut names: Vec<String> = std::fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let names2: Vec<String> = {
        let mut v: Vec<String> = std::fs::read_dir(&out2)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names, names2, "output trees differ in file sets");
    assert!(!names.is_empty());
    for name in &names {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let dt = t0.elapsed();
    pass(&format!(
        "criterion 8: {} output files byte-identical across runs ({dt:?})",
        names.len()
    ));
}
