//! End-to-end acceptance gate. Each criterion is one test that prints a
//! single summary line on success; tolerances and runtime budgets are
//! asserted, so a red test is a missed criterion, not a flaky benchmark.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use genboson::algebra::{roundtrip_check, GeneralizedBoson};
use genboson::dynamics::{
    cqed_coupling, ion_superspin_coupling, peropadre_distribution, tv_scaling_experiment,
};
use genboson::fbs::{
    amplitude_oracle, enumerate_outcomes, full_distribution, outcome_probability, total_variation,
    NumericalPolicy, OccupationVector,
};
use genboson::gbs::{
    displaced_probability, gaussian_probability_oracle, gaussian_threshold_probability,
    random_valid_sigma, GaussianState,
};
use genboson::linalg::{
    haar_unitary, hafnian_naive, permanent_fast, permanent_naive, ComplexMatrix,
};
use num_complex::Complex64 as C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn catalog_species() -> Vec<(&'static str, GeneralizedBoson)> {
    vec![
        ("standard", GeneralizedBoson::standard()),
        ("boson_pair", GeneralizedBoson::boson_pair()),
        ("spin_1/2", GeneralizedBoson::spin(1).unwrap()),
        ("spin_1", GeneralizedBoson::spin(2).unwrap()),
        ("q_boson_q2", GeneralizedBoson::q_boson(c(2.0)).unwrap()),
        ("m_paraboson_1", GeneralizedBoson::m_paraboson(1)),
    ]
}

fn budget(start: Instant, limit: Duration, what: &str) {
    let took = start.elapsed();
    assert!(
        took <= limit,
        "{what} exceeded its runtime budget: {took:?} > {limit:?}"
    );
}

/// 1. Every catalog species: |first-quantized amplitude|² equals the
///    permanent-formula probability for all occupation pairs with N ≤ 3 on
///    M ≤ 4 modes over 50 seeded Haar unitaries, to 1e-9.
#[test]
fn criterion_01_amplitude_oracle_equivalence() {
    let start = Instant::now();
    let mut max_err = 0.0f64;
    let mut checked = 0usize;
    for (name, boson) in catalog_species() {
        for m in 1..=4usize {
            for seed in 0..50u64 {
                let u = haar_unitary(m, 1000 * m as u64 + seed);
                for n in 0..=3usize {
                    let inputs = enumerate_outcomes(m, n, boson.local_dim());
                    for l in &inputs {
                        for k in &inputs {
                            let p = outcome_probability(&boson, &u, l, k).unwrap();
                            let a = amplitude_oracle(&boson, &u, l, k).unwrap();
                            let err = (a.norm_sqr() - p).abs();
                            assert!(
                                err < 1e-9,
                                "{name}: M={m} seed={seed} l={l} k={k}: |amp|²={} prob={p} err={err:e}",
                                a.norm_sqr()
                            );
                            max_err = max_err.max(err);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    budget(start, Duration::from_secs(60), "criterion 1");
    println!(
        "criterion 01 PASS: oracle equivalence on {checked} (species, U, l, k) instances, max |err| = {max_err:.2e} ({:.1?})",
        start.elapsed()
    );
}

/// 2. Standard bosons conserve probability: total_mass = 1 ± 1e-9 on every
///    input instance of criterion 1.
#[test]
fn criterion_02_standard_reduction_mass() {
    let start = Instant::now();
    let boson = GeneralizedBoson::standard();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for m in 1..=4usize {
        for seed in 0..50u64 {
            let u = haar_unitary(m, 1000 * m as u64 + seed);
            for n in 0..=3usize {
                for l in enumerate_outcomes(m, n, None) {
                    let dist = full_distribution(&boson, &u, &l, NumericalPolicy::Raw).unwrap();
                    let defect = (dist.total_mass - 1.0).abs();
                    assert!(
                        defect < 1e-9,
                        "M={m} seed={seed} l={l}: mass defect {defect:e}"
                    );
                    assert!(dist.normalized);
                    worst = worst.max(defect);
                    checked += 1;
                }
            }
        }
    }
    budget(start, Duration::from_secs(60), "criterion 2");
    println!(
        "criterion 02 PASS: unit total mass on {checked} standard-boson distributions, max defect = {worst:.2e}"
    );
}

/// 3. Collision-free universality: binary-in/binary-out probabilities are
///    species-independent to 1e-10.
#[test]
fn criterion_03_collision_free_universality() {
    let start = Instant::now();
    let standard = GeneralizedBoson::standard();
    let others = vec![
        ("spin_1/2", GeneralizedBoson::spin(1).unwrap()),
        ("boson_pair", GeneralizedBoson::boson_pair()),
        ("q_boson_q2", GeneralizedBoson::q_boson(c(2.0)).unwrap()),
    ];
    let mut max_dev = 0.0f64;
    let mut checked = 0usize;
    for m in 3..=4usize {
        for seed in 0..10u64 {
            let u = haar_unitary(m, 77 * m as u64 + seed);
            for n in 1..=3usize.min(m) {
                // local_dim 2 restricts enumeration to binary vectors
                let binaries = enumerate_outcomes(m, n, Some(2));
                for l in &binaries {
                    for k in &binaries {
                        let p0 = outcome_probability(&standard, &u, l, k).unwrap();
                        for (name, b) in &others {
                            let p = outcome_probability(b, &u, l, k).unwrap();
                            let dev = (p - p0).abs();
                            assert!(
                                dev < 1e-10,
                                "{name} vs standard: M={m} seed={seed} l={l} k={k}: {p} vs {p0}"
                            );
                            max_dev = max_dev.max(dev);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    budget(start, Duration::from_secs(60), "criterion 3");
    println!(
        "criterion 03 PASS: collision-free probabilities species-independent on {checked} comparisons, max dev = {max_dev:.2e}"
    );
}

/// 4. Catalog self-consistency: the commutator rebuilt from the factor column
///    matches 2+8n exactly for pair bosons and [n+1]_q − [n]_q for q-bosons;
///    the two species whose published columns disagree are flagged by the
///    round-trip report without failing it.
#[test]
fn criterion_04_catalog_consistency() {
    let pair = GeneralizedBoson::boson_pair();
    for n in 0..=12usize {
        let f_n = pair.commutator(n).unwrap();
        let want = c(2.0 + 8.0 * n as f64);
        assert_eq!(f_n, want, "pair boson F({n})");
    }

    let q = 2.0f64;
    let qb = GeneralizedBoson::q_boson(c(q)).unwrap();
    let bracket = |n: i32| (q.powi(n) - q.powi(-n)) / (q - q.recip());
    let mut max_dev = 0.0f64;
    for n in 0..=12usize {
        let f_n = qb.commutator(n).unwrap();
        let want = bracket(n as i32 + 1) - bracket(n as i32);
        let dev = (f_n - c(want)).norm();
        assert!(dev < 1e-10, "q-boson F({n}): {f_n} vs {want}");
        max_dev = max_dev.max(dev);
    }

    // consistent species pass the round trip clean
    for b in [
        GeneralizedBoson::standard(),
        GeneralizedBoson::boson_pair(),
        GeneralizedBoson::q_boson(c(2.0)).unwrap(),
    ] {
        let r = roundtrip_check(&b, 8).unwrap();
        assert!(r.max_recursion_residual < 1e-9);
        assert!(!r.catalog_discrepancy, "{:?}", b.kind());
    }
    // the spin commutator column and the m-paraboson factor column are
    // internally inconsistent with their own factor/commutator definitions:
    // the report must flag them while still completing
    let spin = roundtrip_check(&GeneralizedBoson::spin(2).unwrap(), 2).unwrap();
    assert!(spin.catalog_discrepancy);
    assert!(spin.max_recursion_residual < 1e-12);
    let para = roundtrip_check(&GeneralizedBoson::m_paraboson(1), 6).unwrap();
    assert!(para.catalog_discrepancy);
    assert!(para.max_recursion_residual < 1e-12);

    println!(
        "criterion 04 PASS: pair-boson F = 2+8n exact (n ≤ 12), q-boson column dev ≤ {max_dev:.2e}, spin/paraboson discrepancies flagged"
    );
}

/// 5. Matrix kernels: fast and naive permanents agree to 1e-9 relative on 200
///    random instances; the block-embedding identity ties the Hafnian to the
///    permanent; the 8×8 all-ones permanent is 8! on the nose.
#[test]
fn criterion_05_permanent_hafnian_kernels() {
    let start = Instant::now();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(505);
    let mut max_rel = 0.0f64;
    for inst in 0..200usize {
        let n = 1 + inst % 8;
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let fast = permanent_fast(&a).unwrap();
        let naive = permanent_naive(&a).unwrap();
        let rel = (fast - naive).norm() / naive.norm().max(1.0);
        assert!(rel < 1e-9, "instance {inst} (n={n}): rel err {rel:e}");
        max_rel = max_rel.max(rel);
    }

    let mut max_block = 0.0f64;
    for n in 1..=6usize {
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut block = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                block[(i, n + j)] = a[(i, j)];
                block[(n + j, i)] = a[(i, j)];
            }
        }
        let haf = hafnian_naive(&block).unwrap();
        let per = permanent_fast(&a).unwrap();
        let dev = (haf - per).norm();
        assert!(dev < 1e-9, "n={n}: Haf(block)={haf} vs Perm={per}");
        max_block = max_block.max(dev);
    }

    let mut ones = ComplexMatrix::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            ones[(i, j)] = c(1.0);
        }
    }
    assert_eq!(permanent_fast(&ones).unwrap(), c(40320.0));
    assert_eq!(permanent_naive(&ones).unwrap(), c(40320.0));

    budget(start, Duration::from_secs(30), "criterion 5");
    println!(
        "criterion 05 PASS: 200 fast/naive permanents (max rel {max_rel:.2e}), Hafnian block identity (max dev {max_block:.2e}), perm(J₈) = 40320 exact"
    );
}

/// 6. The mode-mixing realization is exact for standard bosons: transfer
///    distribution vs the permanent-formula distribution, TV < 1e-7, at the
///    minimal cutoff N+1.
#[test]
fn criterion_06_dynamics_exactness() {
    let start = Instant::now();
    let boson = GeneralizedBoson::standard();
    let mut max_tv = 0.0f64;
    let mut max_leak = 0.0f64;
    let mut runs = 0usize;
    for m in 2..=3usize {
        for seed in 0..5u64 {
            let r = haar_unitary(m, 4200 + 10 * m as u64 + seed);
            for n in 1..=m.min(3) {
                // collision-free input: first n modes singly occupied
                let mut l = vec![0usize; m];
                for li in l.iter_mut().take(n) {
                    *li = 1;
                }
                let l = OccupationVector::new(l);
                let cutoffs = vec![n + 1; 2 * m];
                let report = peropadre_distribution(&boson, &r, &l, &cutoffs).unwrap();
                let ideal =
                    full_distribution(&boson, &r.conjugate(), &l, NumericalPolicy::Renormalize)
                        .unwrap();
                let tv = total_variation(&report.distribution, &ideal).unwrap();
                assert!(tv < 1e-7, "M={m} seed={seed} N={n}: TV = {tv:e}");
                max_tv = max_tv.max(tv);
                max_leak = max_leak.max(report.leakage);
                runs += 1;
            }
        }
    }
    budget(start, Duration::from_secs(120), "criterion 6");
    println!(
        "criterion 06 PASS: {runs} standard-boson transfers exact, max TV = {max_tv:.2e}, max leakage = {max_leak:.2e} ({:.1?})",
        start.elapsed()
    );
}

/// 7. Dilution trend: hard-core pairs approach ideal sampling as modes are
///    added (mean TV strictly decreasing over M ∈ {4,6,8}), while single
///    excitations are exact at every M.
#[test]
fn criterion_07_dilution_trend() {
    let start = Instant::now();
    let spin_half = GeneralizedBoson::spin(1).unwrap();
    let table = tv_scaling_experiment(&spin_half, 2, &[4, 6, 8], 20, 2).unwrap();
    for w in table.mean_tv.windows(2) {
        assert!(
            w[1] < w[0],
            "mean TV not strictly decreasing: {:?}",
            table.mean_tv
        );
    }
    let single = tv_scaling_experiment(&spin_half, 1, &[4, 6, 8], 20, 2).unwrap();
    let worst_single = single.mean_tv.iter().cloned().fold(0.0, f64::max);
    assert!(worst_single < 1e-9, "N=1 should be exact: {worst_single:e}");
    budget(start, Duration::from_secs(600), "criterion 7");
    println!(
        "criterion 07 PASS: N=2 mean TV {:?} strictly decreasing (exponent {:?}), N=1 max mean TV = {worst_single:.2e} ({:.1?})",
        table.mean_tv,
        table.fitted_exponent,
        start.elapsed()
    );
}

/// 8. Gaussian outcome probabilities: the restricted-Hafnian formula matches
///    the generating-function oracle on every binary outcome for 20 random
///    valid covariances per mode count; vacuum takes its closed form; the
///    displaced path reduces to the undisplaced one at zero displacement.
#[test]
fn criterion_08_gaussian_hafnian_formula() {
    let start = Instant::now();
    let species = vec![
        ("standard", GeneralizedBoson::standard()),
        ("boson_pair", GeneralizedBoson::boson_pair()),
    ];
    let mut max_err = 0.0f64;
    let mut max_vac = 0.0f64;
    let mut max_disp = 0.0f64;
    let mut checked = 0usize;
    for m in 1..=3usize {
        for seed in 0..20u64 {
            let sigma = random_valid_sigma(m, 900 * m as u64 + seed);
            let state = GaussianState::new(sigma.clone(), None).unwrap();
            let zero_disp = GaussianState::new(sigma, Some(vec![C64::new(0.0, 0.0); m])).unwrap();
            let det = state.determinant().unwrap();
            let vac_closed = 1.0 / (std::f64::consts::PI.powi(m as i32) * det);
            for (name, b) in &species {
                for total in 0..=m {
                    for outcome in enumerate_outcomes(m, total, Some(2)) {
                        let p = gaussian_threshold_probability(b, &state, &outcome).unwrap();
                        let o = gaussian_probability_oracle(b, &state, &outcome).unwrap();
                        let err = (p - o).abs();
                        assert!(
                            err < 1e-9,
                            "{name}: M={m} seed={seed} outcome={outcome}: formula {p} vs oracle {o}"
                        );
                        max_err = max_err.max(err);
                        let pd = displaced_probability(b, &zero_disp, &outcome).unwrap();
                        let derr = (pd - p).abs();
                        assert!(
                            derr < 1e-12,
                            "{name}: M={m} seed={seed} outcome={outcome}: displaced-at-0 {pd} vs {p}"
                        );
                        max_disp = max_disp.max(derr);
                        checked += 1;
                    }
                }
                let vac = OccupationVector::new(vec![0; m]);
                let pv = gaussian_threshold_probability(b, &state, &vac).unwrap();
                let vdev = (pv - vac_closed).abs() / vac_closed;
                assert!(vdev < 1e-12, "{name}: vacuum closed form rel dev {vdev:e}");
                max_vac = max_vac.max(vdev);
            }
        }
    }
    budget(start, Duration::from_secs(120), "criterion 8");
    println!(
        "criterion 08 PASS: {checked} formula/oracle agreements (max {max_err:.2e}), vacuum closed form (max rel {max_vac:.2e}), displacement reduction (max {max_disp:.2e}) ({:.1?})",
        start.elapsed()
    );
}

/// 9. Platform coupling formulas: the cavity-mediated matrix is rank 1 at
///    χ = 0 and loses its diagonal at χ = |g|²/Δ; the trapped-ion superspin
///    coupling hits 4J₀/(N_S²−N_S) on uniform schedules and stays above 1 Hz
///    at J₀ = 1 kHz with 50 superspins.
#[test]
fn criterion_09_platform_formulas() {
    let g = [
        C64::new(0.4, -0.9),
        C64::new(-1.3, 0.2),
        C64::new(0.7, 0.5),
        C64::new(-0.2, -1.1),
    ];
    let j = cqed_coupling(&g, 1.9, 0.0).unwrap();
    let svd = j.to_nalgebra().svd(false, false);
    let mut svs: Vec<f64> = svd.singular_values.iter().cloned().collect();
    svs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(svs[1] < 1e-12, "second singular value {:e}", svs[1]);

    let delta = 2.5;
    let modulus = 1.3f64;
    let uniform: Vec<C64> = [0.3f64, 1.1, 2.6, 4.0]
        .iter()
        .map(|phi| C64::from_polar(modulus, *phi))
        .collect();
    let chi = modulus * modulus / delta;
    let j = cqed_coupling(&uniform, delta, chi).unwrap();
    let mut max_diag = 0.0f64;
    for a in 0..uniform.len() {
        max_diag = max_diag.max(j[(a, a)].norm());
    }
    assert!(max_diag < 1e-15, "diagonal should cancel: {max_diag:e}");

    let j0 = 1000.0;
    for ns in [2usize, 5, 50] {
        let dt = vec![1.0; ns * ns];
        let got = ion_superspin_coupling(j0, 0.0, 2, ns, &dt).unwrap();
        let want = 4.0 * j0 / ((ns * ns - ns) as f64);
        assert_eq!(got, want, "Ns={ns}");
    }
    let dt = vec![1.0; 50 * 50];
    let at_fifty = ion_superspin_coupling(j0, 0.0, 2, 50, &dt).unwrap();
    assert!(at_fifty > 1.0, "coupling {at_fifty} Hz should clear 1 Hz");
    assert!(
        (at_fifty - 1.63).abs() < 5e-3,
        "expected ≈1.63 Hz, got {at_fifty}"
    );

    println!(
        "criterion 09 PASS: rank-1 cavity matrix (σ₂ = {:.1e}), diagonal cancellation ({max_diag:.1e}), superspin coupling = {at_fifty:.4} Hz",
        svs[1]
    );
}

/// 10. CLI determinism: identical invocations produce byte-identical stdout
///     and artifacts, including the CSV side output.
#[test]
fn criterion_10_cli_determinism() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_genboson");
    let dir = tempfile::tempdir().unwrap();

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };

    let dist_path = dir.path().join("dist.json");
    let dist_args = [
        "distribution",
        "--boson",
        "spin_s:0.5",
        "--unitary",
        "haar:M=3,seed=9",
        "--in",
        "1,1,0",
        "--policy",
        "renormalize",
        "--output",
        dist_path.to_str().unwrap(),
    ];
    let first = run(&dist_args);
    let first_file = std::fs::read(&dist_path).unwrap();
    let second = run(&dist_args);
    let second_file = std::fs::read(&dist_path).unwrap();
    assert_eq!(first, second, "distribution stdout differs across reruns");
    assert_eq!(first_file, second_file, "distribution artifact differs");

    let csv_path = dir.path().join("scaling.csv");
    let json_path = dir.path().join("scaling.json");
    let scaling_args = [
        "scaling",
        "--boson",
        "standard",
        "--n",
        "1",
        "--m-list",
        "2,3",
        "--trials",
        "3",
        "--seed",
        "5",
        "--output",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ];
    run(&scaling_args);
    let csv_a = std::fs::read(&csv_path).unwrap();
    let json_a = std::fs::read(&json_path).unwrap();
    run(&scaling_args);
    assert_eq!(csv_a, std::fs::read(&csv_path).unwrap(), "CSV differs");
    assert_eq!(json_a, std::fs::read(&json_path).unwrap(), "JSON differs");

    let sample_args = [
        "sample",
        "--boson",
        "standard",
        "--unitary",
        "haar:M=3,seed=1",
        "--in",
        "1,1,0",
        "--count",
        "200",
        "--seed",
        "11",
    ];
    assert_eq!(
        run(&sample_args),
        run(&sample_args),
        "sample stdout differs"
    );

    println!(
        "criterion 10 PASS: byte-identical reruns for distribution, scaling (JSON+CSV), sample"
    );
}
