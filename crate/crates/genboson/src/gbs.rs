//! Gaussian (threshold) statistics for generalized bosons.
//!
//! States are parametrized by an `M×M` Hermitian positive-definite matrix
//! `σ_Q` and an optional displacement `d ∈ ℂᴹ`; the Husimi-style weight is
//!
//! ```text
//! Q(α) = exp(−(α − d)† σ_Q⁻¹ (α − d)) / (g √|σ_Q|)
//! ```
//!
//! (the doubled-variable form `exp(−½ ν†Σ⁻¹ν)` with `ν = (α, ᾱ)` and
//! `Σ = σ_Q ⊕ σ_Qᵀ`), with `g` fixed by `∫Q = 1`, which gives
//! `g = π^M √|σ_Q|`. Binary-outcome probabilities follow from derivatives of
//! the generating function
//!
//! ```text
//! G(α) = exp(Σ_j c₁ |α_j|² − α†σ_Q⁻¹α)       c₁ = |f(1)|²
//! ```
//!
//! whose quadratic-form matrix in `ν` is `A = [[0, Wᵀ], [W, 0]]` with
//! `W = c₁I − σ_Q⁻¹`, so that `Pr(n) = e^{c₀M} / (g√|σ_Q|) · Haf(A_n) / Π_j |f(n_j)|²`
//! with `A_n` restricted to the occupied modes' `(α_j, ᾱ_j)` index pairs. For
//! `c₁ = 1` this is the familiar `[[0, I], [I, 0]](I_{2M} − Σ⁻¹)` structure;
//! for `c₁ ≠ 1` the `c₁` enters only through the diagonal `|α_j|²` term, which
//! is what the independent Taylor-coefficient oracle verifies. A displacement
//! adds linear terms and turns the Hafnian into a partition sum over outcome
//! indices assigned either to the linear coefficients or to matching pairs.

use crate::algebra::{AlgebraError, GeneralizedBoson};
use crate::fbs::OccupationVector;
use crate::linalg::{hafnian_naive, ComplexMatrix, LinalgError};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GbsError {
    #[error("sigma_Q must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("sigma_Q is not Hermitian within {tol:e} (deviation {dev:e})")]
    NotHermitian { tol: f64, dev: f64 },
    #[error("sigma_Q is not positive definite (eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("sigma_Q is numerically singular")]
    Singular,
    #[error("displacement length {got} does not match mode count {want}")]
    DisplacementLength { got: usize, want: usize },
    #[error("outcome must be binary (0/1 occupations), got {0}")]
    NonBinaryOutcome(String),
    #[error("outcome length {got} does not match mode count {want}")]
    ModeMismatch { got: usize, want: usize },
    #[error("guard exceeded for {what}: {n} > {limit}")]
    GuardExceeded {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("series did not converge after {terms} terms (last term {last:e}); the normalization diverges for this species/amplitude")]
    SeriesDivergence { terms: usize, last: f64 },
    #[error("coherent-state series has zero convergence radius (|q| = {q_norm} > 1); only zero amplitude is summable")]
    ZeroConvergenceRadius { q_norm: f64 },
    #[error("state carries a displacement; use the displaced probability")]
    UnexpectedDisplacement,
    #[error("probability has non-negligible imaginary part {0:e}")]
    ImaginaryResidue(f64),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type GbsResult<T> = Result<T, GbsError>;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const SERIES_EPS: f64 = 1e-16;
pub const SERIES_MAX_TERMS: usize = 10_000;
pub const LOG_SERIES_ORDER_LIMIT: usize = 8;
pub const THRESHOLD_MODE_LIMIT: usize = 6;
pub const ORACLE_MODE_LIMIT: usize = 3;
pub const ORACLE_PARTICLE_LIMIT: usize = 3;

/// Gaussian state over `M` modes. See the module docs for the conventions.
/// `norm_g` is derived from `σ_Q` at construction and cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    sigma_q: ComplexMatrix,
    displacement: Option<Vec<C64>>,
    norm_g: f64,
}

impl GaussianState {
    pub fn new(sigma_q: ComplexMatrix, displacement: Option<Vec<C64>>) -> GbsResult<Self> {
        if !sigma_q.is_square() {
            return Err(GbsError::NotSquare {
                rows: sigma_q.rows(),
                cols: sigma_q.cols(),
            });
        }
        let dev = sigma_q.hermiticity_residual();
        if dev > HERMITICITY_TOL {
            return Err(GbsError::NotHermitian {
                tol: HERMITICITY_TOL,
                dev,
            });
        }
        let eig = sigma_q.to_nalgebra().symmetric_eigen();
        if let Some(min) = eig
            .eigenvalues
            .iter()
            .cloned()
            .reduce(f64::min)
            .filter(|&min| min <= 0.0)
        {
            return Err(GbsError::NotPositiveDefinite(min));
        }
        if let Some(d) = &displacement {
            if d.len() != sigma_q.rows() {
                return Err(GbsError::DisplacementLength {
                    got: d.len(),
                    want: sigma_q.rows(),
                });
            }
        }
        let det = det_of(&sigma_q)?;
        let norm_g = std::f64::consts::PI.powi(sigma_q.rows() as i32) * det.sqrt();
        Ok(Self {
            sigma_q,
            displacement,
            norm_g,
        })
    }

    pub fn modes(&self) -> usize {
        self.sigma_q.rows()
    }

    pub fn sigma_q(&self) -> &ComplexMatrix {
        &self.sigma_q
    }

    pub fn displacement(&self) -> Option<&[C64]> {
        self.displacement.as_deref()
    }

    /// The cached constant `g = π^M √|σ_Q|` making `∫Q = 1`.
    pub fn norm_g(&self) -> f64 {
        self.norm_g
    }

    fn inverse(&self) -> GbsResult<DMatrix<C64>> {
        self.sigma_q
            .to_nalgebra()
            .try_inverse()
            .ok_or(GbsError::Singular)
    }

    /// `det σ_Q`, real and positive for a valid state.
    pub fn determinant(&self) -> GbsResult<f64> {
        det_of(&self.sigma_q)
    }
}

fn det_of(sigma_q: &ComplexMatrix) -> GbsResult<f64> {
    let det = sigma_q.to_nalgebra().lu().determinant();
    if det.im.abs() > 1e-9 * det.norm().max(1.0) || det.re <= 0.0 {
        return Err(GbsError::Singular);
    }
    Ok(det.re)
}

#[derive(Serialize, Deserialize)]
struct GaussianStateJson {
    sigma_q: ComplexMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    displacement: Option<Vec<[f64; 2]>>,
}

impl Serialize for GaussianState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GaussianStateJson {
            sigma_q: self.sigma_q.clone(),
            displacement: self
                .displacement
                .as_ref()
                .map(|d| d.iter().map(|z| [z.re, z.im]).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GaussianStateJson::deserialize(d)?;
        GaussianState::new(
            j.sigma_q,
            j.displacement
                .map(|v| v.iter().map(|p| C64::new(p[0], p[1])).collect()),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Shared adaptive series loop: sums `Σ term_n` where
/// `term_{n+1} = term_n · factor(n+1)`, stopping at relative [`SERIES_EPS`].
/// Detects divergence instead of looping forever.
fn adaptive_series(
    mut term: C64,
    local_dim: Option<usize>,
    mut factor: impl FnMut(usize) -> GbsResult<C64>,
) -> GbsResult<C64> {
    let mut sum = term;
    let mut growth_streak = 0usize;
    for n in 1..=SERIES_MAX_TERMS {
        if let Some(d) = local_dim {
            if n >= d {
                return Ok(sum);
            }
        }
        let f = factor(n)?;
        let prev = term.norm();
        term *= f;
        sum += term;
        let t = term.norm();
        if !t.is_finite() || !sum.norm().is_finite() {
            return Err(GbsError::SeriesDivergence { terms: n, last: t });
        }
        // a small term only ends the sum while the ratio is ≤ 1: series like
        // the q-boson one (|q| > 1) dip below epsilon before exploding
        if f.norm() <= 1.0 && t <= SERIES_EPS * sum.norm().max(1.0) {
            return Ok(sum);
        }
        growth_streak = if t > prev { growth_streak + 1 } else { 0 };
        if growth_streak > 50 && t > 1e60 {
            return Err(GbsError::SeriesDivergence { terms: n, last: t });
        }
    }
    Err(GbsError::SeriesDivergence {
        terms: SERIES_MAX_TERMS,
        last: term.norm(),
    })
}

/// `|f(n)|²/(n!)² ~ |q|^{n²/2}` for a q-boson with `|q| > 1`: the coherent
/// series converges for no nonzero amplitude, which no finite number of terms
/// can reveal (they first decay, then explode). Caught analytically.
fn check_summable(boson: &GeneralizedBoson, t: f64) -> GbsResult<()> {
    if t == 0.0 {
        return Ok(());
    }
    if let crate::algebra::BosonKind::QBoson { q } = boson.kind() {
        if q.norm() > 1.0 + 1e-12 {
            return Err(GbsError::ZeroConvergenceRadius { q_norm: q.norm() });
        }
    }
    Ok(())
}

/// Normalization `N(α) = Σ_n |α|^{2n} |f(n)|² / (n!)²` of the generalized
/// coherent state `e^{α b†}|0⟩` (before dividing by `√N`).
pub fn coherent_normalization(boson: &GeneralizedBoson, alpha: C64) -> GbsResult<f64> {
    let t = alpha.norm_sqr();
    check_summable(boson, t)?;
    let sum = adaptive_series(C64::new(1.0, 0.0), boson.local_dim(), |n| {
        let r2 = boson.factor_ratio_sq(n)?;
        Ok(C64::new(t * r2.norm() / (n as f64 * n as f64), 0.0))
    })?;
    Ok(sum.re)
}

/// Overlap `⟨β|α⟩` of two normalized generalized coherent states:
/// `Σ_n (β̄α)ⁿ |f(n)|²/(n!)² / √(N(α)N(β))`.
pub fn coherent_overlap(boson: &GeneralizedBoson, beta: C64, alpha: C64) -> GbsResult<C64> {
    let z = beta.conj() * alpha;
    check_summable(boson, z.norm())?;
    let sum = adaptive_series(C64::new(1.0, 0.0), boson.local_dim(), |n| {
        let r2 = boson.factor_ratio_sq(n)?;
        Ok(z * r2.norm() / (n as f64 * n as f64))
    })?;
    let norm =
        (coherent_normalization(boson, alpha)? * coherent_normalization(boson, beta)?).sqrt();
    Ok(sum / norm)
}

/// Coefficients `c_0 … c_order` of `ln N` as a power series in `t = |α|²`.
/// Always `c_0 = 0` and `c_1 = |f(1)|²`.
pub fn log_norm_series(boson: &GeneralizedBoson, order: usize) -> GbsResult<Vec<f64>> {
    if order > LOG_SERIES_ORDER_LIMIT {
        return Err(GbsError::GuardExceeded {
            what: "log-normalization series order",
            n: order,
            limit: LOG_SERIES_ORDER_LIMIT,
        });
    }
    // a_n = |f(n)|²/(n!)², a_0 = 1
    let mut a = vec![0.0f64; order + 1];
    a[0] = 1.0;
    let mut running = 1.0f64;
    for (n, an) in a.iter_mut().enumerate().skip(1) {
        let r2 = match boson.local_dim() {
            Some(d) if n >= d => 0.0,
            _ => boson.factor_ratio_sq(n)?.norm(),
        };
        running *= r2 / (n as f64 * n as f64);
        *an = running;
    }
    // k c_k = k a_k − Σ_{j=1..k−1} j c_j a_{k−j}
    let mut c = vec![0.0f64; order + 1];
    for k in 1..=order {
        let mut v = k as f64 * a[k];
        for j in 1..k {
            v -= j as f64 * c[j] * a[k - j];
        }
        c[k] = v / k as f64;
    }
    Ok(c)
}

/// The constant `g` making `∫ Q = 1`: `g = π^M √|σ_Q|`.
pub fn normalization_constant(state: &GaussianState) -> GbsResult<f64> {
    Ok(state.norm_g())
}

/// Pointwise Husimi-style weight of the state at `α ∈ ℂᴹ`.
pub fn q_function(state: &GaussianState, alpha: &[C64]) -> GbsResult<f64> {
    let m = state.modes();
    if alpha.len() != m {
        return Err(GbsError::ModeMismatch {
            got: alpha.len(),
            want: m,
        });
    }
    let inv = state.inverse()?;
    let zero = vec![C64::new(0.0, 0.0); m];
    let d = state.displacement().unwrap_or(&zero);
    let mut quad = C64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            quad += (alpha[i] - d[i]).conj() * inv[(i, j)] * (alpha[j] - d[j]);
        }
    }
    let g = normalization_constant(state)?;
    let det = state.determinant()?;
    Ok((-quad.re).exp() / (g * det.sqrt()))
}

/// The `2M×2M` quadratic-form matrix `A = [[0, Wᵀ], [W, 0]]`,
/// `W = diag(c₁) − σ_Q⁻¹`, in the doubled variables `(α, ᾱ)`.
pub fn build_a_matrix(state: &GaussianState, c1_per_mode: &[f64]) -> GbsResult<ComplexMatrix> {
    let m = state.modes();
    if c1_per_mode.len() != m {
        return Err(GbsError::ModeMismatch {
            got: c1_per_mode.len(),
            want: m,
        });
    }
    let inv = state.inverse()?;
    let mut a = ComplexMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let w = if i == j {
                C64::new(c1_per_mode[i], 0.0) - inv[(i, j)]
            } else {
                -inv[(i, j)]
            };
            a[(m + i, j)] = w; // W block: ᾱ_i α_j coefficients
            a[(j, m + i)] = w; // Wᵀ block
        }
    }
    Ok(a)
}

fn binary_indices(outcome: &OccupationVector, m: usize) -> GbsResult<Vec<usize>> {
    if outcome.modes() != m {
        return Err(GbsError::ModeMismatch {
            got: outcome.modes(),
            want: m,
        });
    }
    if !outcome.is_collision_free() {
        return Err(GbsError::NonBinaryOutcome(outcome.to_string()));
    }
    Ok(outcome
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n == 1)
        .map(|(j, _)| j)
        .collect())
}

/// The outcome-restricted quadratic-form matrix fed to the Hafnian:
/// [`build_a_matrix`] followed by [`restrict_to_outcome`].
pub fn build_as(
    state: &GaussianState,
    c1_per_mode: &[f64],
    outcome: &OccupationVector,
) -> GbsResult<ComplexMatrix> {
    let a = build_a_matrix(state, c1_per_mode)?;
    restrict_to_outcome(&a, outcome)
}

/// Restriction of a `2M×2M` doubled-index matrix to the `(j, M+j)` pairs of
/// the occupied modes, symmetrized before use.
pub fn restrict_to_outcome(
    a: &ComplexMatrix,
    outcome: &OccupationVector,
) -> GbsResult<ComplexMatrix> {
    let m = a.rows() / 2;
    let modes = binary_indices(outcome, m)?;
    let idx: Vec<usize> = modes
        .iter()
        .copied()
        .chain(modes.iter().map(|&j| m + j))
        .collect();
    let mut out = ComplexMatrix::zeros(idx.len(), idx.len());
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(r, c)] = a[(i, j)];
        }
    }
    Ok(out.symmetrized())
}

static NEGATIVE_CLIPS: AtomicUsize = AtomicUsize::new(0);

/// How many probabilities in the range `(−1e-12, 0)` have been clipped to 0
/// since process start. Rounding can push an exact zero slightly negative;
/// anything below the clip window is reported as-is.
pub fn negative_clip_count() -> usize {
    NEGATIVE_CLIPS.load(Ordering::Relaxed)
}

fn finalize_probability(p: C64) -> GbsResult<f64> {
    if p.im.abs() > 1e-9 * p.norm().max(1e-300) {
        return Err(GbsError::ImaginaryResidue(p.im));
    }
    if p.re < 0.0 && p.re > -1e-12 {
        NEGATIVE_CLIPS.fetch_add(1, Ordering::Relaxed);
        return Ok(0.0);
    }
    Ok(p.re)
}

fn prefactor(boson: &GeneralizedBoson, state: &GaussianState, n_ones: usize) -> GbsResult<f64> {
    // e^{c₀ M} / (g √|σ_Q|) / Π_j |f(n_j)|², with c₀ = 0 identically
    let c = log_norm_series(boson, 1)?;
    let c0 = c[0];
    debug_assert_eq!(c0, 0.0);
    let g = normalization_constant(state)?;
    let det = state.determinant()?;
    let f1_sq = boson.factor(1)?.norm_sqr();
    Ok((c0 * state.modes() as f64).exp() / (g * det.sqrt() * f1_sq.powi(n_ones as i32)))
}

/// Probability of a binary outcome of the undisplaced Gaussian state through
/// the restricted-Hafnian formula.
pub fn gaussian_threshold_probability(
    boson: &GeneralizedBoson,
    state: &GaussianState,
    outcome: &OccupationVector,
) -> GbsResult<f64> {
    if state.displacement().is_some() {
        return Err(GbsError::UnexpectedDisplacement);
    }
    let m = state.modes();
    if m > THRESHOLD_MODE_LIMIT {
        return Err(GbsError::GuardExceeded {
            what: "threshold probability modes",
            n: m,
            limit: THRESHOLD_MODE_LIMIT,
        });
    }
    let c1 = log_norm_series(boson, 1)?[1];
    let a = build_a_matrix(state, &vec![c1; m])?;
    let sub = restrict_to_outcome(&a, outcome)?;
    let haf = hafnian_naive(&sub)?;
    let ones = outcome.total();
    let pref = prefactor(boson, state, ones)?;
    finalize_probability(haf * pref)
}

/// Linear coefficients `(u, v)` of the displaced generating function in the
/// doubled variables: `u = conj(σ_Q⁻¹ d)` on the `α` block, `v = σ_Q⁻¹ d`
/// on the `ᾱ` block, plus the constant `exp(−d†σ_Q⁻¹d)`.
fn displacement_terms(state: &GaussianState) -> GbsResult<(Vec<C64>, f64)> {
    let m = state.modes();
    let inv = state.inverse()?;
    let zero = vec![C64::new(0.0, 0.0); m];
    let d = state.displacement().unwrap_or(&zero);
    let mut v = vec![C64::new(0.0, 0.0); m];
    for i in 0..m {
        for j in 0..m {
            v[i] += inv[(i, j)] * d[j];
        }
    }
    let mut quad = C64::new(0.0, 0.0);
    for i in 0..m {
        quad += d[i].conj() * v[i];
    }
    let mut linear = Vec::with_capacity(2 * m);
    linear.extend(v.iter().map(|z| z.conj())); // α-block coefficients
    linear.extend(v.iter().copied()); // ᾱ-block coefficients
    Ok((linear, (-quad.re).exp()))
}

/// Probability of a binary outcome of a displaced Gaussian state: partition
/// sum over outcome indices assigned to linear coefficients or Hafnian pairs.
pub fn displaced_probability(
    boson: &GeneralizedBoson,
    state: &GaussianState,
    outcome: &OccupationVector,
) -> GbsResult<f64> {
    let m = state.modes();
    if m > ORACLE_MODE_LIMIT {
        return Err(GbsError::GuardExceeded {
            what: "displaced probability modes",
            n: m,
            limit: ORACLE_MODE_LIMIT,
        });
    }
    let c1 = log_norm_series(boson, 1)?[1];
    let a = build_a_matrix(state, &vec![c1; m])?;
    let modes = binary_indices(outcome, m)?;
    let idx: Vec<usize> = modes
        .iter()
        .copied()
        .chain(modes.iter().map(|&j| m + j))
        .collect();
    let (linear, gauss_const) = displacement_terms(state)?;
    let s = idx.len();
    let mut deriv = C64::new(0.0, 0.0);
    // subsets of S assigned to linear factors; the rest must pair up
    for mask in 0u32..(1u32 << s) {
        if (mask.count_ones() as usize) % 2 != s % 2 {
            continue;
        }
        let mut lin = C64::new(1.0, 0.0);
        let mut rest: Vec<usize> = Vec::with_capacity(s);
        for (pos, &i) in idx.iter().enumerate() {
            if (mask >> pos) & 1 == 1 {
                lin *= linear[i];
            } else {
                rest.push(i);
            }
        }
        let mut sub = ComplexMatrix::zeros(rest.len(), rest.len());
        for (r, &i) in rest.iter().enumerate() {
            for (c, &j) in rest.iter().enumerate() {
                sub[(r, c)] = a[(i, j)];
            }
        }
        deriv += lin * hafnian_naive(&sub.symmetrized())?;
    }
    let pref = prefactor(boson, state, outcome.total())?;
    finalize_probability(deriv * pref * gauss_const)
}

// --- independent Taylor-coefficient oracle -----------------------------------

/// Sparse multivariate polynomial over `nvars` variables with total-degree
/// truncation; exponents are kept as small vectors.
#[derive(Clone)]
struct Poly {
    terms: BTreeMap<Vec<u8>, C64>,
    nvars: usize,
    max_deg: usize,
}

impl Poly {
    fn zero(nvars: usize, max_deg: usize) -> Self {
        Self {
            terms: BTreeMap::new(),
            nvars,
            max_deg,
        }
    }

    fn constant(nvars: usize, max_deg: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars, max_deg);
        p.terms.insert(vec![0; nvars], c);
        p
    }

    fn add_term(&mut self, exps: Vec<u8>, c: C64) {
        debug_assert_eq!(exps.len(), self.nvars);
        if exps.iter().map(|&e| e as usize).sum::<usize>() > self.max_deg {
            return;
        }
        *self.terms.entry(exps).or_insert(C64::new(0.0, 0.0)) += c;
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars, self.max_deg);
        for (ea, ca) in &self.terms {
            let da: usize = ea.iter().map(|&e| e as usize).sum();
            for (eb, cb) in &other.terms {
                let db: usize = eb.iter().map(|&e| e as usize).sum();
                if da + db > self.max_deg {
                    continue;
                }
                let exps: Vec<u8> = ea.iter().zip(eb).map(|(&a, &b)| a + b).collect();
                *out.terms.entry(exps).or_insert(C64::new(0.0, 0.0)) += *ca * *cb;
            }
        }
        out
    }

    /// `exp(self)` for polynomials with zero constant term: `Σ_k self^k / k!`
    /// terminates at `k = max_deg`.
    fn exp(&self) -> Poly {
        debug_assert!(!self.terms.contains_key(&vec![0; self.nvars]));
        let mut out = Poly::constant(self.nvars, self.max_deg, C64::new(1.0, 0.0));
        let mut power = Poly::constant(self.nvars, self.max_deg, C64::new(1.0, 0.0));
        let mut kfact = 1.0f64;
        for k in 1..=self.max_deg {
            power = power.mul(self);
            kfact *= k as f64;
            for (e, c) in &power.terms {
                *out.terms.entry(e.clone()).or_insert(C64::new(0.0, 0.0)) += *c / kfact;
            }
        }
        out
    }

    fn coefficient(&self, exps: &[u8]) -> C64 {
        self.terms.get(exps).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

/// Independent check of the Hafnian route: extracts the same probability as
/// the Taylor coefficient of `exp(Σ_j c₁|α_j|² − (α−d)†σ_Q⁻¹(α−d))` in the
/// doubled variables. Shares the σ_Q⁻¹ entries with the formula path but no
/// combinatorial code.
pub fn gaussian_probability_oracle(
    boson: &GeneralizedBoson,
    state: &GaussianState,
    outcome: &OccupationVector,
) -> GbsResult<f64> {
    let m = state.modes();
    if m > ORACLE_MODE_LIMIT {
        return Err(GbsError::GuardExceeded {
            what: "oracle modes",
            n: m,
            limit: ORACLE_MODE_LIMIT,
        });
    }
    let n_total = outcome.total();
    if n_total > ORACLE_PARTICLE_LIMIT {
        return Err(GbsError::GuardExceeded {
            what: "oracle particles",
            n: n_total,
            limit: ORACLE_PARTICLE_LIMIT,
        });
    }
    let modes = binary_indices(outcome, m)?;
    let c1 = log_norm_series(boson, 1)?[1];
    let inv = state.inverse()?;
    let (linear, gauss_const) = displacement_terms(state)?;

    // variables: 0..m are α_j, m..2m are ᾱ_j
    let nvars = 2 * m;
    let max_deg = 2 * n_total;
    let mut e_poly = Poly::zero(nvars, max_deg);
    for j in 0..m {
        let mut exps = vec![0u8; nvars];
        exps[j] = 1;
        exps[m + j] = 1;
        e_poly.add_term(exps, C64::new(c1, 0.0));
    }
    for i in 0..m {
        for j in 0..m {
            let mut exps = vec![0u8; nvars];
            exps[m + i] += 1;
            exps[j] += 1;
            e_poly.add_term(exps, -inv[(i, j)]);
        }
    }
    for (k, &coeff) in linear.iter().enumerate() {
        if coeff != C64::new(0.0, 0.0) {
            let mut exps = vec![0u8; nvars];
            exps[k] = 1;
            e_poly.add_term(exps, coeff);
        }
    }
    let expanded = e_poly.exp();
    let mut target = vec![0u8; nvars];
    for &j in &modes {
        target[j] = 1;
        target[m + j] = 1;
    }
    let coeff = expanded.coefficient(&target);
    let pref = prefactor(boson, state, n_total)?;
    finalize_probability(coeff * pref * gauss_const)
}

/// Random Hermitian `σ_Q` with eigenvalues in `(1, 5)`: a valid, comfortably
/// conditioned test state for a given seed.
pub fn random_valid_sigma(m: usize, seed: u64) -> ComplexMatrix {
    use rand::{Rng, SeedableRng};
    let u = crate::linalg::haar_unitary(m, seed);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let evals: Vec<f64> = (0..m).map(|_| rng.gen_range(1.2..4.8)).collect();
    let mut sigma = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut v = C64::new(0.0, 0.0);
            for (k, &ev) in evals.iter().enumerate() {
                v += u.matrix()[(i, k)] * ev * u.matrix()[(j, k)].conj();
            }
            sigma[(i, j)] = v;
        }
    }
    // force exact Hermiticity against rounding
    let mut h = sigma.clone();
    for i in 0..m {
        for j in 0..m {
            h[(i, j)] = (sigma[(i, j)] + sigma[(j, i)].conj()) * 0.5;
        }
    }
    h
}

// --- tests -------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbs::enumerate_outcomes;

    fn occ(v: &[usize]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn standard_coherent_normalization_is_exponential() {
        let b = GeneralizedBoson::standard();
        for alpha in [c(0.0, 0.0), c(0.5, 0.0), c(1.0, -0.7), c(0.0, 1.9)] {
            let n = coherent_normalization(&b, alpha).unwrap();
            let want = alpha.norm_sqr().exp();
            assert!((n - want).abs() < 1e-12 * want, "{alpha}: {n} vs {want}");
        }
    }

    #[test]
    fn spin_half_normalization_truncates_exactly() {
        let b = GeneralizedBoson::spin(1).unwrap();
        let alpha = c(0.8, 0.3);
        let n = coherent_normalization(&b, alpha).unwrap();
        assert!((n - (1.0 + alpha.norm_sqr())).abs() < 1e-15);
    }

    #[test]
    fn divergent_normalizations_are_flagged() {
        // pair bosons: Σ C(2n,n) t^n has radius 1/4
        let b = GeneralizedBoson::boson_pair();
        assert!(coherent_normalization(&b, c(0.4, 0.0)).unwrap().is_finite());
        assert!(matches!(
            coherent_normalization(&b, c(0.51, 0.0)),
            Err(GbsError::SeriesDivergence { .. })
        ));
        // q-boson with |q| > 1 has zero convergence radius
        let q = GeneralizedBoson::q_boson(c(2.0, 0.0)).unwrap();
        assert!(matches!(
            coherent_normalization(&q, c(0.1, 0.0)),
            Err(GbsError::ZeroConvergenceRadius { .. })
        ));
        assert!((coherent_normalization(&q, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        // |q| ≤ 1 stays entire: a phase keeps [n]_q bounded
        let phase = GeneralizedBoson::q_boson(c(0.0, 1.0)).unwrap();
        assert!(coherent_normalization(&phase, c(1.5, 0.0))
            .unwrap()
            .is_finite());
    }

    #[test]
    fn coherent_overlap_is_normalized_and_contractive() {
        let species = [
            GeneralizedBoson::standard(),
            GeneralizedBoson::spin(3).unwrap(),
            GeneralizedBoson::m_paraboson(1),
        ];
        for b in &species {
            let alpha = c(0.6, -0.2);
            let beta = c(-0.3, 0.4);
            let self_overlap = coherent_overlap(b, alpha, alpha).unwrap();
            assert!((self_overlap - c(1.0, 0.0)).norm() < 1e-12);
            let cross = coherent_overlap(b, alpha, beta).unwrap();
            assert!(cross.norm() <= 1.0 + 1e-12);
        }
        // standard bosons: ⟨β|α⟩ = exp(β̄α − |α|²/2 − |β|²/2)
        let b = GeneralizedBoson::standard();
        let (alpha, beta) = (c(0.7, 0.1), c(-0.2, 0.5));
        let got = coherent_overlap(&b, beta, alpha).unwrap();
        let want = (beta.conj() * alpha - alpha.norm_sqr() * 0.5 - beta.norm_sqr() * 0.5).exp();
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn overlap_contractive_across_random_pairs() {
        use rand::{Rng, SeedableRng};
        let species = [
            GeneralizedBoson::standard(),
            GeneralizedBoson::boson_pair(),
            GeneralizedBoson::spin(2).unwrap(),
            GeneralizedBoson::m_paraboson(2),
        ];
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31_337);
        for b in &species {
            for _ in 0..100 {
                // pair bosons diverge beyond |α| = 1/2; stay inside
                let scale = 0.3;
                let alpha = c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                let beta = c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                let ov = coherent_overlap(b, beta, alpha).unwrap();
                assert!(ov.norm() <= 1.0 + 1e-12, "{:?}: |{ov}|", b.kind());
            }
        }
    }

    #[test]
    fn log_norm_series_known_coefficients() {
        let std = log_norm_series(&GeneralizedBoson::standard(), 6).unwrap();
        assert_eq!(std[0], 0.0);
        assert!((std[1] - 1.0).abs() < 1e-14);
        for (k, ck) in std.iter().enumerate().skip(2) {
            assert!(ck.abs() < 1e-12, "c_{k} = {ck}");
        }
        let pair = log_norm_series(&GeneralizedBoson::boson_pair(), 3).unwrap();
        assert!((pair[1] - 2.0).abs() < 1e-14);
        // spin-1/2: N = 1 + t, so c_k = (−1)^{k+1}/k
        let spin = log_norm_series(&GeneralizedBoson::spin(1).unwrap(), 5).unwrap();
        for (k, ck) in spin.iter().enumerate().skip(1) {
            let want = if k % 2 == 1 {
                1.0 / k as f64
            } else {
                -1.0 / k as f64
            };
            assert!((ck - want).abs() < 1e-12, "c_{k}");
        }
        assert!(matches!(
            log_norm_series(&GeneralizedBoson::standard(), 9),
            Err(GbsError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn c1_equals_first_factor_magnitude_squared() {
        let species = [
            GeneralizedBoson::standard(),
            GeneralizedBoson::boson_pair(),
            GeneralizedBoson::spin(3).unwrap(),
            GeneralizedBoson::q_boson(c(0.5, 0.0)).unwrap(),
            GeneralizedBoson::m_paraboson(1),
        ];
        for b in &species {
            let c1 = log_norm_series(b, 1).unwrap()[1];
            let f1 = b.factor(1).unwrap().norm_sqr();
            assert!((c1 - f1).abs() < 1e-14, "{:?}", b.kind());
        }
    }

    #[test]
    fn log_norm_series_resums_the_normalization() {
        let b = GeneralizedBoson::m_paraboson(0);
        let series = log_norm_series(&b, 8).unwrap();
        // small enough that the omitted c_9 t^9 tail sits under the tolerance
        let t = 0.04f64;
        let ln_n: f64 = series
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * t.powi(k as i32))
            .sum();
        let direct = coherent_normalization(&b, c(t.sqrt(), 0.0)).unwrap();
        assert!((ln_n.exp() - direct).abs() < 1e-9 * direct);
    }

    /// Quadrature oracle for `∫ Q`: polar grid, Simpson in radius, uniform in
    /// angle. Shares nothing with the closed form for `g`.
    fn quadrature_unit_mass_m1(state: &GaussianState, radius: f64) -> f64 {
        let n_r = 4001usize;
        let n_th = 256usize;
        let dr = radius / (n_r - 1) as f64;
        let mut total = 0.0f64;
        for it in 0..n_th {
            let theta = 2.0 * std::f64::consts::PI * it as f64 / n_th as f64;
            let dir = C64::new(theta.cos(), theta.sin());
            let mut radial = 0.0f64;
            for ir in 0..n_r {
                let r = ir as f64 * dr;
                let w = if ir == 0 || ir == n_r - 1 {
                    1.0
                } else if ir % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                radial += w * q_function(state, &[dir * r]).unwrap() * r;
            }
            total += radial * dr / 3.0;
        }
        total * 2.0 * std::f64::consts::PI / n_th as f64
    }

    #[test]
    fn normalization_constant_verified_by_quadrature() {
        // unit sigma: g = π and the quadrature must integrate Q to 1
        let unit = GaussianState::new(ComplexMatrix::identity(1), None).unwrap();
        assert!((normalization_constant(&unit).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        assert!((quadrature_unit_mass_m1(&unit, 8.0) - 1.0).abs() < 1e-6);
        // a stretched sigma still integrates to 1
        let mut s = ComplexMatrix::identity(1);
        s[(0, 0)] = c(3.1, 0.0);
        let stretched = GaussianState::new(s, None).unwrap();
        assert!((quadrature_unit_mass_m1(&stretched, 14.0) - 1.0).abs() < 1e-6);
        // scaling law g(c σ) = c^{M/2} g(σ)
        let mut s2 = ComplexMatrix::identity(1);
        s2[(0, 0)] = c(2.0 * 3.1, 0.0);
        let doubled = GaussianState::new(s2, None).unwrap();
        let ratio =
            normalization_constant(&doubled).unwrap() / normalization_constant(&stretched).unwrap();
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identity_sigma_kills_standard_nonvacuum_outcomes() {
        let b = GeneralizedBoson::standard();
        let state = GaussianState::new(ComplexMatrix::identity(3), None).unwrap();
        for outcome in enumerate_outcomes(3, 1, Some(2))
            .into_iter()
            .chain(enumerate_outcomes(3, 2, Some(2)))
        {
            let p = gaussian_threshold_probability(&b, &state, &outcome).unwrap();
            assert!(p.abs() < 1e-15, "{outcome}: {p}");
        }
        // vacuum takes the closed form 1/(π³ |σ|) = 1/π³
        let vac = gaussian_threshold_probability(&b, &state, &occ(&[0, 0, 0])).unwrap();
        assert!((vac - 1.0 / std::f64::consts::PI.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn single_mode_threshold_matches_hand_value() {
        // M = 1, σ = 2, standard boson: A off-diagonal = 1 − 1/2 = 1/2
        let mut s = ComplexMatrix::identity(1);
        s[(0, 0)] = c(2.0, 0.0);
        let state = GaussianState::new(s, None).unwrap();
        let a = build_a_matrix(&state, &[1.0]).unwrap();
        assert!((a[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((a[(1, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let b = GeneralizedBoson::standard();
        let p1 = gaussian_threshold_probability(&b, &state, &occ(&[1])).unwrap();
        // prefactor 1/(π·2)·√... : g√|σ| = π·2, Haf = 1/2
        assert!((p1 - 0.5 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn hafnian_route_matches_taylor_oracle() {
        let species = [GeneralizedBoson::standard(), GeneralizedBoson::boson_pair()];
        for m in 1..=3 {
            for trial in 0..6 {
                let sigma = random_valid_sigma(m, 40_000 + 100 * m as u64 + trial);
                let state = GaussianState::new(sigma, None).unwrap();
                for b in &species {
                    for outcome in all_binary_outcomes(m) {
                        let formula = gaussian_threshold_probability(b, &state, &outcome).unwrap();
                        let oracle = gaussian_probability_oracle(b, &state, &outcome).unwrap();
                        assert!(
                            (formula - oracle).abs() < 1e-12,
                            "{:?} m={m} trial={trial} {outcome}: {formula} vs {oracle}",
                            b.kind()
                        );
                    }
                }
            }
        }
    }

    fn all_binary_outcomes(m: usize) -> Vec<OccupationVector> {
        (0..=m)
            .flat_map(|n| enumerate_outcomes(m, n, Some(2)))
            .collect()
    }

    #[test]
    fn displaced_reduces_to_undisplaced_at_zero() {
        let b = GeneralizedBoson::standard();
        for m in 1..=3 {
            let sigma = random_valid_sigma(m, 777 + m as u64);
            let plain = GaussianState::new(sigma.clone(), None).unwrap();
            let zeroed = GaussianState::new(sigma, Some(vec![c(0.0, 0.0); m])).unwrap();
            for outcome in all_binary_outcomes(m) {
                let a = gaussian_threshold_probability(&b, &plain, &outcome).unwrap();
                let d = displaced_probability(&b, &zeroed, &outcome).unwrap();
                assert!((a - d).abs() < 1e-12, "m={m} {outcome}");
            }
        }
    }

    #[test]
    fn displaced_partition_sum_matches_taylor_oracle() {
        let species = [GeneralizedBoson::standard(), GeneralizedBoson::boson_pair()];
        for m in 1..=3 {
            for trial in 0..4 {
                let seed = 88_000 + 100 * m as u64 + trial;
                let sigma = random_valid_sigma(m, seed);
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed ^ 0xd15b);
                let d: Vec<C64> = (0..m)
                    .map(|_| c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)))
                    .collect();
                let state = GaussianState::new(sigma, Some(d)).unwrap();
                for b in &species {
                    for outcome in all_binary_outcomes(m) {
                        let formula = displaced_probability(b, &state, &outcome).unwrap();
                        let oracle = gaussian_probability_oracle(b, &state, &outcome).unwrap();
                        assert!(
                            (formula - oracle).abs() < 1e-12,
                            "{:?} m={m} trial={trial} {outcome}",
                            b.kind()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn displaced_probability_continuous_at_zero() {
        let b = GeneralizedBoson::standard();
        let sigma = random_valid_sigma(2, 4242);
        let plain = GaussianState::new(sigma.clone(), None).unwrap();
        let eps = 1e-4 / 2f64.sqrt();
        let nudged = GaussianState::new(sigma, Some(vec![c(eps, 0.0), c(0.0, eps)])).unwrap();
        for outcome in all_binary_outcomes(2) {
            let p0 = gaussian_threshold_probability(&b, &plain, &outcome).unwrap();
            let p = displaced_probability(&b, &nudged, &outcome).unwrap();
            assert!((p - p0).abs() < 1e-6, "{outcome}: {p} vs {p0}");
        }
    }

    #[test]
    fn build_as_restricts_and_symmetrizes() {
        let state = GaussianState::new(random_valid_sigma(3, 9), None).unwrap();
        let empty = build_as(&state, &[1.0; 3], &occ(&[0, 0, 0])).unwrap();
        assert_eq!(empty.rows(), 0);
        let pair = build_as(&state, &[1.0; 3], &occ(&[1, 0, 1])).unwrap();
        assert_eq!(pair.rows(), 4);
        assert!(pair.symmetry_residual() < 1e-14);
    }

    #[test]
    fn displaced_vacuum_closed_form() {
        // vacuum probability is exp(−d†σ⁻¹d)/(g√|σ|)
        let mut s = ComplexMatrix::identity(1);
        s[(0, 0)] = c(2.5, 0.0);
        let d = c(0.4, -0.3);
        let state = GaussianState::new(s, Some(vec![d])).unwrap();
        let b = GeneralizedBoson::standard();
        let p = displaced_probability(&b, &state, &occ(&[0])).unwrap();
        let want = (-d.norm_sqr() / 2.5).exp() / (std::f64::consts::PI * 2.5);
        assert!((p - want).abs() < 1e-15);
    }

    #[test]
    fn state_validation_rejects_bad_sigma() {
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.1, 1.0]]).unwrap();
        assert!(matches!(
            GaussianState::new(bad, None),
            Err(GbsError::NotHermitian { .. })
        ));
        let mut neg = ComplexMatrix::identity(2);
        neg[(1, 1)] = c(-2.0, 0.0);
        assert!(matches!(
            GaussianState::new(neg, None),
            Err(GbsError::NotPositiveDefinite(_))
        ));
        let sigma = random_valid_sigma(2, 5);
        assert!(matches!(
            GaussianState::new(sigma, Some(vec![c(0.0, 0.0); 3])),
            Err(GbsError::DisplacementLength { .. })
        ));
    }

    #[test]
    fn nonbinary_outcomes_are_rejected() {
        let b = GeneralizedBoson::standard();
        let state = GaussianState::new(ComplexMatrix::identity(2), None).unwrap();
        assert!(matches!(
            gaussian_threshold_probability(&b, &state, &occ(&[2, 0])),
            Err(GbsError::NonBinaryOutcome(_))
        ));
        assert!(matches!(
            gaussian_threshold_probability(&b, &state, &occ(&[1])),
            Err(GbsError::ModeMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_state_json_roundtrip() {
        let sigma = random_valid_sigma(2, 12);
        let state = GaussianState::new(sigma, Some(vec![c(0.1, 0.2), c(-0.3, 0.0)])).unwrap();
        let text = serde_json::to_string(&state).unwrap();
        let back: GaussianState = serde_json::from_str(&text).unwrap();
        assert_eq!(state, back);
        // deserialization re-validates
        let bad = r#"{"sigma_q":{"rows":1,"cols":1,"entries":[[-1.0,0.0]]}}"#;
        assert!(serde_json::from_str::<GaussianState>(bad).is_err());
    }
}
