//! Exact Fock boson-sampling statistics for generalized bosons.
//!
//! The output probability of scattering a Fock state `|l⟩` through a mode
//! unitary `Λ` into `|k⟩` is
//!
//! ```text
//! Pr(k|l) = |Π_i f(k_i) / (f(l_i) · k_i!)|² · |Perm(Λ[k|l])|²
//! ```
//!
//! with `Λ[k|l]` the repeated submatrix of [`crate::linalg::submatrix_repeat`].
//! An independent oracle recomputes the same amplitude by expanding the
//! product of linear forms `Π_i (Σ_j Λ_{ji} x_j)^{l_i}` as a dense polynomial
//! and reading off one coefficient; it shares no code with the permanent path.

use crate::algebra::{AlgebraError, GeneralizedBoson};
use crate::linalg::{permanent_fast, submatrix_repeat, LinalgError, ModeUnitary};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FbsError {
    #[error("occupation vector length {got} does not match mode count {want}")]
    ModeMismatch { got: usize, want: usize },
    #[error("particle number not conserved: input {input}, output {output}")]
    ParticleNumberMismatch { input: usize, output: usize },
    #[error("input occupation {occ} is not a physical state (local dimension {local_dim})")]
    InvalidInputState { occ: usize, local_dim: usize },
    #[error(
        "amplitude oracle guard exceeded: N = {n}, M = {m} (limits N <= {n_limit}, M <= {m_limit})"
    )]
    OracleGuard {
        n: usize,
        m: usize,
        n_limit: usize,
        m_limit: usize,
    },
    #[error("distribution is not normalized; renormalize it first")]
    NotNormalized,
    #[error("cannot renormalize: total mass {0:e} is numerically zero")]
    DegenerateTotalMass(f64),
    #[error("distributions are over different mode counts: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type FbsResult<T> = Result<T, FbsError>;

pub const ORACLE_PARTICLE_LIMIT: usize = 8;
pub const ORACLE_MODE_LIMIT: usize = 6;

/// Mode occupation numbers. Ordering is lexicographic, which fixes the
/// canonical outcome order everywhere (enumeration, serialization, sampling).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(pub Vec<usize>);

impl OccupationVector {
    pub fn new(occ: Vec<usize>) -> Self {
        Self(occ)
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// True when every occupation is 0 or 1.
    pub fn is_collision_free(&self) -> bool {
        self.0.iter().all(|&n| n <= 1)
    }
}

impl std::fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// How [`full_distribution`] treats truncated-species mass defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericalPolicy {
    /// Report raw formula weights; the mass defect stays visible.
    Raw,
    /// Divide by the total mass (errors when the mass is numerically zero).
    Renormalize,
}

/// A finite distribution over occupation vectors, kept in lexicographic
/// outcome order. `total_mass` always records the pre-renormalization mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub outcomes: Vec<OccupationVector>,
    pub probs: Vec<f64>,
    pub total_mass: f64,
    pub normalized: bool,
}

impl Distribution {
    /// Builds from (outcome, weight) pairs; sorts, merges duplicates, and
    /// applies the policy.
    pub fn from_weights(
        mut pairs: Vec<(OccupationVector, f64)>,
        policy: NumericalPolicy,
    ) -> FbsResult<Self> {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut outcomes: Vec<OccupationVector> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (k, p) in pairs {
            if outcomes.last() == Some(&k) {
                *probs.last_mut().expect("nonempty") += p;
            } else {
                outcomes.push(k);
                probs.push(p);
            }
        }
        let total_mass: f64 = probs.iter().sum();
        let normalized = match policy {
            NumericalPolicy::Raw => (total_mass - 1.0).abs() <= 1e-9,
            NumericalPolicy::Renormalize => {
                if total_mass < 1e-12 {
                    return Err(FbsError::DegenerateTotalMass(total_mass));
                }
                for p in &mut probs {
                    *p /= total_mass;
                }
                true
            }
        };
        Ok(Self {
            outcomes,
            probs,
            total_mass,
            normalized,
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn prob_of(&self, k: &OccupationVector) -> f64 {
        match self.outcomes.binary_search(k) {
            Ok(idx) => self.probs[idx],
            Err(_) => 0.0,
        }
    }
}

/// All occupation vectors with `modes` modes summing to `total`, parts capped
/// below `local_dim` when finite, in lexicographic order.
pub fn enumerate_outcomes(
    modes: usize,
    total: usize,
    local_dim: Option<usize>,
) -> Vec<OccupationVector> {
    let cap = local_dim.map(|d| d - 1).unwrap_or(total);
    let mut out = Vec::new();
    let mut current = vec![0usize; modes];
    fn rec(
        out: &mut Vec<OccupationVector>,
        current: &mut Vec<usize>,
        mode: usize,
        remaining: usize,
        cap: usize,
    ) {
        let modes = current.len();
        if mode == modes {
            if remaining == 0 {
                out.push(OccupationVector::new(current.clone()));
            }
            return;
        }
        // occupations left to place must fit under the per-mode cap
        if remaining > cap * (modes - mode) {
            return;
        }
        for v in 0..=remaining.min(cap) {
            current[mode] = v;
            rec(out, current, mode + 1, remaining - v, cap);
            current[mode] = 0;
        }
    }
    rec(&mut out, &mut current, 0, total, cap);
    out
}

fn validate_io(
    boson: &GeneralizedBoson,
    unitary: &ModeUnitary,
    input: &OccupationVector,
    output: &OccupationVector,
) -> FbsResult<()> {
    let m = unitary.modes();
    if input.modes() != m {
        return Err(FbsError::ModeMismatch {
            got: input.modes(),
            want: m,
        });
    }
    if output.modes() != m {
        return Err(FbsError::ModeMismatch {
            got: output.modes(),
            want: m,
        });
    }
    if input.total() != output.total() {
        return Err(FbsError::ParticleNumberMismatch {
            input: input.total(),
            output: output.total(),
        });
    }
    if let Some(d) = boson.local_dim() {
        if let Some(&occ) = input.as_slice().iter().find(|&&n| n >= d) {
            return Err(FbsError::InvalidInputState { occ, local_dim: d });
        }
    }
    Ok(())
}

/// Exact output probability `Pr(k|l)` through the permanent of the repeated
/// submatrix. Exactly 0 whenever some `f(k_i)` vanishes.
pub fn outcome_probability(
    boson: &GeneralizedBoson,
    unitary: &ModeUnitary,
    input: &OccupationVector,
    output: &OccupationVector,
) -> FbsResult<f64> {
    validate_io(boson, unitary, input, output)?;
    let mut prefactor = C64::new(1.0, 0.0);
    for &k in output.as_slice() {
        let f = boson.factor(k)?;
        if f.norm() == 0.0 {
            return Ok(0.0);
        }
        let mut k_fact = 1.0;
        for j in 1..=k {
            k_fact *= j as f64;
        }
        prefactor *= f / k_fact;
    }
    for &l in input.as_slice() {
        prefactor /= boson.factor(l)?;
    }
    let sub = submatrix_repeat(unitary.matrix(), output.as_slice(), input.as_slice())?;
    let perm = permanent_fast(&sub)?;
    Ok(prefactor.norm_sqr() * perm.norm_sqr())
}

/// Transition amplitude `⟨k|Λ|l⟩` by dense multivariate polynomial expansion
/// of `Π_i (Σ_j Λ_{ji} x_j)^{l_i}`; independent of the permanent kernels.
pub fn amplitude_oracle(
    boson: &GeneralizedBoson,
    unitary: &ModeUnitary,
    input: &OccupationVector,
    output: &OccupationVector,
) -> FbsResult<C64> {
    validate_io(boson, unitary, input, output)?;
    let m = unitary.modes();
    let n = input.total();
    if n > ORACLE_PARTICLE_LIMIT || m > ORACLE_MODE_LIMIT {
        return Err(FbsError::OracleGuard {
            n,
            m,
            n_limit: ORACLE_PARTICLE_LIMIT,
            m_limit: ORACLE_MODE_LIMIT,
        });
    }
    // dense coefficients over multi-indices in mixed radix n+1 per mode
    let radix = n + 1;
    let size = radix.pow(m as u32);
    let lambda = unitary.matrix();
    let mut poly = vec![C64::new(0.0, 0.0); size];
    poly[0] = C64::new(1.0, 0.0);
    for i in 0..m {
        for _ in 0..input.as_slice()[i] {
            let mut next = vec![C64::new(0.0, 0.0); size];
            // multiply by the linear form Σ_j Λ_{ji} x_j; per-mode digits stay
            // below radix − 1 = N before the last multiply, so no carries
            for (idx, &coeff) in poly.iter().enumerate() {
                if coeff == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut stride = 1usize;
                for j in (0..m).rev() {
                    debug_assert!((idx / stride) % radix < radix - 1);
                    next[idx + stride] += coeff * lambda[(j, i)];
                    stride *= radix;
                }
            }
            poly = next;
        }
    }
    // index of the target monomial Π_j x_j^{k_j}; mode 1 most significant
    let mut target = 0usize;
    for &k in output.as_slice() {
        target = target * radix + k;
    }
    let mut amp = poly[target];
    for &k in output.as_slice() {
        amp *= boson.factor(k)?;
    }
    for &l in input.as_slice() {
        amp /= boson.factor(l)?;
    }
    Ok(amp)
}

/// Exact output distribution over every particle-conserving outcome.
pub fn full_distribution(
    boson: &GeneralizedBoson,
    unitary: &ModeUnitary,
    input: &OccupationVector,
    policy: NumericalPolicy,
) -> FbsResult<Distribution> {
    validate_io(boson, unitary, input, input)?;
    let outcomes = enumerate_outcomes(unitary.modes(), input.total(), boson.local_dim());
    let probs: Vec<FbsResult<f64>> = outcomes
        .par_iter()
        .map(|k| outcome_probability(boson, unitary, input, k))
        .collect();
    let mut pairs = Vec::with_capacity(outcomes.len());
    for (k, p) in outcomes.into_iter().zip(probs) {
        pairs.push((k, p?));
    }
    Distribution::from_weights(pairs, policy)
}

/// Draws `count` outcomes by inverse-CDF over the lexicographic order;
/// deterministic for a given seed.
pub fn sample(dist: &Distribution, count: usize, seed: u64) -> FbsResult<Vec<OccupationVector>> {
    if !dist.normalized {
        return Err(FbsError::NotNormalized);
    }
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0f64;
    for &p in &dist.probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen::<f64>();
        let idx = cdf.partition_point(|&c| c <= u).min(dist.probs.len() - 1);
        draws.push(dist.outcomes[idx].clone());
    }
    Ok(draws)
}

/// Total variation distance `½ Σ |p − q|` over the union of outcomes.
/// Both inputs must be normalized.
pub fn total_variation(p: &Distribution, q: &Distribution) -> FbsResult<f64> {
    if !p.normalized || !q.normalized {
        return Err(FbsError::NotNormalized);
    }
    let pm = p.outcomes.first().map(OccupationVector::modes);
    let qm = q.outcomes.first().map(OccupationVector::modes);
    if let (Some(a), Some(b)) = (pm, qm) {
        if a != b {
            return Err(FbsError::UniverseMismatch(a, b));
        }
    }
    // both outcome lists are sorted: merge
    let mut tv = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < p.outcomes.len() || j < q.outcomes.len() {
        match (p.outcomes.get(i), q.outcomes.get(j)) {
            (Some(a), Some(b)) => match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    tv += p.probs[i].abs();
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    tv += q.probs[j].abs();
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    tv += (p.probs[i] - q.probs[j]).abs();
                    i += 1;
                    j += 1;
                }
            },
            (Some(_), None) => {
                tv += p.probs[i].abs();
                i += 1;
            }
            (None, Some(_)) => {
                tv += q.probs[j].abs();
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(0.5 * tv)
}

// --- tests -------------------------------------------------------------------
