//! Seeded inverse-CDF sampling from an exact output distribution, plus a
//! frequency check: empirical rates converge to the exact probabilities at
//! the statistical rate, and reruns with the same seed reproduce the draws
//! bit for bit.

use genboson::fbs::{full_distribution, sample, NumericalPolicy, OccupationVector};
use genboson::linalg::haar_unitary;
use genboson::GeneralizedBoson;

fn main() {
    let boson = GeneralizedBoson::boson_pair();
    let unitary = haar_unitary(3, 21);
    let input = OccupationVector::new(vec![2, 1, 0]);
    let dist = full_distribution(&boson, &unitary, &input, NumericalPolicy::Renormalize)
        .expect("in range");

    let count = 20_000;
    let seed = 4242;
    let draws = sample(&dist, count, seed).expect("normalized");
    let again = sample(&dist, count, seed).expect("normalized");
    assert_eq!(draws, again, "same seed, same draws");

    let mut freq = std::collections::BTreeMap::<&OccupationVector, usize>::new();
    for d in &draws {
        *freq.entry(d).or_insert(0) += 1;
    }

    println!("boson pair, Haar(3) seed 21, input (2,1,0), {count} draws (seed {seed}):");
    println!(
        "{:>12} {:>12} {:>12} {:>10}",
        "outcome", "exact", "empirical", "sigma"
    );
    let mut worst = 0.0f64;
    for (k, p) in dist.outcomes.iter().zip(&dist.probs) {
        let observed = *freq.get(k).unwrap_or(&0) as f64 / count as f64;
        // binomial standard error of the empirical rate
        let sigma = (p * (1.0 - p) / count as f64).sqrt();
        let pulls = if sigma > 0.0 {
            (observed - p).abs() / sigma
        } else {
            0.0
        };
        worst = worst.max(pulls);
        println!(
            "{:>12} {p:>12.6} {observed:>12.6} {pulls:>9.2}s",
            k.to_string()
        );
    }
    println!("largest deviation: {worst:.2} standard errors");
}
