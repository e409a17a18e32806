//! Gaussian-state outcome probabilities through the loop-free Hafnian route,
//! cross-checked against an independent Taylor-coefficient oracle, plus the
//! series hygiene around generalized coherent states: finite radii and
//! zero-radius divergence are detected rather than silently mis-summed.

use genboson::gbs::{
    coherent_normalization, gaussian_probability_oracle, gaussian_threshold_probability,
    random_valid_sigma, GaussianState, GbsError,
};
use genboson::{ComplexMatrix, GeneralizedBoson, OccupationVector};
use num_complex::Complex64 as C64;

fn main() {
    // coherent-state normalization: standard is entire, the pair species has
    // radius |alpha|^2 < 1/4, and |q| > 1 q-bosons have zero radius
    let alpha = C64::new(0.45, 0.2);
    let standard = GeneralizedBoson::standard();
    println!(
        "standard  N({alpha})  = {:.9}  (closed form e^|a|^2 = {:.9})",
        coherent_normalization(&standard, alpha).expect("entire series"),
        alpha.norm_sqr().exp()
    );
    let pair = GeneralizedBoson::boson_pair();
    println!(
        "pair      N(0.45)    = {:.9}  (radius 1/2: converges)",
        coherent_normalization(&pair, C64::new(0.45, 0.0)).expect("inside radius")
    );
    match coherent_normalization(&pair, C64::new(0.55, 0.0)) {
        Err(GbsError::SeriesDivergence { .. }) => {
            println!("pair      N(0.55)    = divergent (outside the radius, flagged)")
        }
        other => panic!("expected divergence, got {other:?}"),
    }
    let q2 = GeneralizedBoson::q_boson(C64::new(2.0, 0.0)).expect("valid q");
    match coherent_normalization(&q2, C64::new(0.05, 0.0)) {
        Err(GbsError::ZeroConvergenceRadius { q_norm }) => println!(
            "q=2       N(0.05)    = zero convergence radius (|q| = {q_norm}), rejected analytically"
        ),
        other => panic!("expected zero-radius rejection, got {other:?}"),
    }
    println!();

    // identity covariance: the vacuum carries everything, at exactly 1/pi^M
    let m = 2;
    let vacuum_state = GaussianState::new(ComplexMatrix::identity(m), None).expect("valid state");
    let vac = gaussian_threshold_probability(
        &standard,
        &vacuum_state,
        &OccupationVector::new(vec![0; m]),
    )
    .expect("in range");
    println!(
        "identity sigma_Q, M = {m}: Pr(vacuum) = {vac:.9}  (1/pi^{m} = {:.9})",
        1.0 / std::f64::consts::PI.powi(m as i32)
    );
    println!();

    // random valid covariance: Hafnian route vs Taylor-coefficient oracle
    let sigma = random_valid_sigma(m, 31);
    let state = GaussianState::new(sigma, None).expect("valid state");
    for (name, boson) in [("standard", standard), ("boson pair", pair)] {
        println!("{name}, random sigma_Q (seed 31), all binary outcomes:");
        println!(
            "{:>10} {:>16} {:>16} {:>10}",
            "outcome", "hafnian", "oracle", "|diff|"
        );
        for bits in 0..(1u32 << m) {
            let outcome =
                OccupationVector::new((0..m).map(|j| ((bits >> j) & 1) as usize).collect());
            let hafnian =
                gaussian_threshold_probability(&boson, &state, &outcome).expect("in range");
            let oracle = gaussian_probability_oracle(&boson, &state, &outcome).expect("in range");
            println!(
                "{:>10} {hafnian:>16.12} {oracle:>16.12} {:>10.2e}",
                outcome.to_string(),
                (hafnian - oracle).abs()
            );
        }
        println!();
    }
}
