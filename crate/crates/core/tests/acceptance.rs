//! Acceptance criteria. Run with `cargo test --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use approx::abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasecov::cli::{sweep_k, sweep_n, CurveRow};
use phasecov::cloner::{
    apply_choi, clone, optimal_choi, shift_isometry, ClonerSpec,
};
use phasecov::fidelity::{
    closed_global_nm, closed_single_1m, closed_single_nm, global_fidelity_sim,
    phase_estimation_fidelity, reduced_onebody, single_fidelity_sim,
};
use phasecov::optimizer::{find_optimal_blocks, Merit};
use phasecov::states::{apply_phases_sym, make_equatorial, PhaseVector};
use phasecov::symspace::{SymVector, DEFAULT_ORACLE_CAP};
use phasecov::verify::{oracle_partial_trace, phase_samples, random_sym_vector};

type Matrix = DMatrix<Complex64>;

const SEED: u64 = 20_240_601;

fn report(id: u8, title: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id}: {title} ({detail})");
    assert!(passed, "criterion {id} failed: {detail}");
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn projector(v: &SymVector) -> Matrix {
    let x = DVector::from_column_slice(v.amplitudes());
    &x * x.adjoint()
}

/// `<psi|rho|psi>` for the equatorial state with the given phases.
fn overlap(rho: &Matrix, phases: &PhaseVector) -> f64 {
    let psi = DVector::from_column_slice(make_equatorial(phases).amplitudes());
    (psi.adjoint() * rho * &psi)[(0, 0)].re
}

#[test]
fn criterion_1_one_to_many_limit() {
    let mut worst: f64 = 0.0;
    for (d, expected) in [(2, 0.75), (3, 5.0 / 9.0), (5, 0.36)] {
        let f = closed_single_1m(d, 1000).unwrap();
        worst = worst.max((f - expected).abs());
    }
    report(
        1,
        "1 -> M fidelity at k=1000 reaches (2d-1)/d^2 for d=2,3,5",
        worst <= 1e-3,
        &format!("max deviation {worst:.3e} <= 1e-3"),
    );
}

#[test]
fn criterion_2_closed_form_matches_simulation() {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in [2, 3, 5] {
        let samples = phase_samples(SEED, d, 20);
        for n in 1..=3 {
            for k in 1..=2 {
                let spec = ClonerSpec::new(d, n, k).unwrap();
                let closed = closed_single_nm(d, n, k).unwrap();
                for phases in &samples {
                    let sim = single_fidelity_sim(&spec, phases).unwrap();
                    worst = worst.max((sim - closed).abs());
                    count += 1;
                }
            }
        }
    }
    report(
        2,
        "closed-form N -> M single-qudit fidelity equals simulation",
        worst <= 1e-10,
        &format!("{count} points, max deviation {worst:.3e} <= 1e-10"),
    );
}

#[test]
fn criterion_3_phase_estimation_asymptote() {
    let mut worst_gap: f64 = 0.0;
    let mut monotone = true;
    for d in 2..=5 {
        for n in 1..=3 {
            let limit = phase_estimation_fidelity(d, n).unwrap();
            let gaps: Vec<f64> = (1..=200)
                .map(|k| closed_single_nm(d, n, k).unwrap() - limit)
                .collect();
            monotone &= gaps.windows(2).all(|w| w[1] < w[0]) && gaps[199] > 0.0;
            worst_gap = worst_gap.max(gaps[199].abs());
        }
    }
    report(
        3,
        "gap to the phase-estimation limit shrinks monotonically over k=1..200",
        worst_gap <= 5e-3 && monotone,
        &format!("max gap at k=200 {worst_gap:.3e} <= 5e-3, monotone={monotone}"),
    );
}

#[test]
fn criterion_4_uniform_block_is_optimal() {
    let mut cases = 0;
    let mut bad = Vec::new();
    for d in 2..=5 {
        for n in 1..=3 {
            for k in 0..=2 {
                for merit in [Merit::Single, Merit::Global] {
                    let search = find_optimal_blocks(d, n, n + k * d, merit).unwrap();
                    cases += 1;
                    if search.uniform_winner() != Some(k) {
                        bad.push(format!("d={d} n={n} k={k} {merit:?}"));
                    }
                }
            }
        }
    }
    report(
        4,
        "(k,...,k) is the unique argmax under both merits for d<=5, N<=3, k<=2",
        bad.is_empty(),
        &format!("{cases} searches, failures: {bad:?}"),
    );
}

#[test]
fn criterion_5_channel_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut isometry_exact = true;
    let (mut trace_dev, mut cov_dev, mut comm_dev, mut choi_dev): (f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0);
    for d in [2, 3] {
        let samples = phase_samples(SEED, d, 100);
        for n in 1..=2 {
            for k in 0..=2 {
                let spec = ClonerSpec::new(d, n, k).unwrap();
                let v = shift_isometry(&spec);
                let gram = v.adjoint() * &v;
                isometry_exact &= gram == Matrix::identity(v.ncols(), v.ncols());
                isometry_exact &= v
                    .iter()
                    .all(|z| *z == Complex64::new(0.0, 0.0) || *z == Complex64::new(1.0, 0.0));

                let choi = optimal_choi(&spec).unwrap();
                let tr = choi.trace_over_output();
                trace_dev = trace_dev.max(max_abs(&(&tr - Matrix::identity(tr.nrows(), tr.ncols()))));

                let base = clone(&spec, &PhaseVector::zeros(d).unwrap()).unwrap();
                for phases in &samples {
                    let direct = projector(&clone(&spec, phases).unwrap());
                    let rotated = projector(&apply_phases_sym(phases, &base).unwrap());
                    cov_dev = cov_dev.max(max_abs(&(direct - rotated)));
                    comm_dev = comm_dev.max(choi.commutator_max(phases).unwrap());
                }

                for _ in 0..10 {
                    let psi = random_sym_vector(&mut rng, n, d).unwrap();
                    let rho = projector(&psi);
                    let via_choi = apply_choi(&choi, &rho).unwrap();
                    let via_v = &v * &rho * v.adjoint();
                    choi_dev = choi_dev.max(max_abs(&(via_choi - via_v)));
                }
            }
        }
    }
    let passed = isometry_exact
        && trace_dev <= 1e-12
        && cov_dev <= 1e-12
        && comm_dev <= 1e-12
        && choi_dev <= 1e-12;
    report(
        5,
        "isometry, trace preservation, covariance, commutation and Choi action",
        passed,
        &format!(
            "V'V exact={isometry_exact}, trace {trace_dev:.1e}, covariance {cov_dev:.1e}, \
             commutator {comm_dev:.1e}, choi vs VrhoV' {choi_dev:.1e}, all <= 1e-12"
        ),
    );
}

#[test]
fn criterion_6_reduced_state_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let d: usize = if i % 2 == 0 { 2 } else { 3 };
        let max_n: usize = if d == 2 { 12 } else { 7 };
        let n = rng.gen_range(1..=max_n);
        assert!(d.pow(n as u32) <= DEFAULT_ORACLE_CAP);
        let v = random_sym_vector(&mut rng, n, d).unwrap();
        let fast = reduced_onebody(&v).unwrap();
        let full = oracle_partial_trace(&v, DEFAULT_ORACLE_CAP).unwrap();
        worst = worst.max(max_abs(&(fast - full)));
    }
    report(
        6,
        "symmetric-subspace reduced state equals the full-space partial trace",
        worst <= 1e-12,
        &format!("200 states, max deviation {worst:.3e} <= 1e-12"),
    );
}

#[test]
fn criterion_7_point_values() {
    let tol = 1e-12;
    let spec = ClonerSpec::new(2, 1, 1).unwrap();
    let phases = PhaseVector::new(vec![0.37]).unwrap();
    let rho = reduced_onebody(&clone(&spec, &phases).unwrap()).unwrap();

    let checks = [
        ("closed 1->3 single", closed_single_nm(2, 1, 1).unwrap(), 5.0 / 6.0),
        ("closed 1->M single", closed_single_1m(2, 1).unwrap(), 5.0 / 6.0),
        ("density matrix 1->3 single", overlap(&rho, &phases), 5.0 / 6.0),
        ("simulated 1->3 single", single_fidelity_sim(&spec, &phases).unwrap(), 5.0 / 6.0),
        ("closed 1->3 global", closed_global_nm(2, 1, 1).unwrap(), 0.75),
        ("simulated 1->3 global", global_fidelity_sim(&spec, &phases).unwrap(), 0.75),
        ("closed 2->4 single", closed_single_nm(2, 2, 1).unwrap(), 0.5 + 3f64.sqrt() / 4.0),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| !abs_diff_eq!(*got, *want, epsilon = tol))
        .map(|(name, got, want)| format!("{name}: {got} vs {want}"))
        .collect();
    report(
        7,
        "5/6, 3/4 and 1/2+sqrt(3)/4 for the qubit cloners",
        failed.is_empty(),
        &format!("{} values at 1e-12, failures: {failed:?}", checks.len()),
    );
}

#[test]
fn criterion_8_beats_universal() {
    let mut rows: Vec<CurveRow> = Vec::new();
    for d in [2, 3, 5] {
        for n in 1..=3 {
            rows.extend(sweep_k(d, n, 200).unwrap());
        }
    }
    let mut endpoints_ok = true;
    for (d, m) in [(2, 21), (3, 28), (5, 51)] {
        let sat = sweep_n(d, m).unwrap();
        let last = sat.last().unwrap();
        endpoints_ok &= last.n_in == m
            && abs_diff_eq!(last.f_phase, 1.0, epsilon = 1e-12)
            && abs_diff_eq!(last.f_universal, 1.0, epsilon = 1e-12);
        rows.extend(sat);
    }
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| r.f_phase < r.f_universal - 1e-12)
        .map(|r| format!("d={} n={} m={}", r.d, r.n_in, r.m_out))
        .collect();
    report(
        8,
        "phase-covariant fidelity never falls below universal, both reach 1 at N=M",
        violations.is_empty() && endpoints_ok,
        &format!(
            "{} curve points, violations {violations:?}, endpoints equal 1: {endpoints_ok}",
            rows.len()
        ),
    );
}
