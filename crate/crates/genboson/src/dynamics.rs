//! Truncated-Fock-space state-vector simulation.
//!
//! Quadratic generalized-boson Hamiltonians `H = Σ J_ij b_i†b_j` act on a
//! mixed-radix truncated Fock space. Matrix elements come from the species'
//! ladder amplitudes: the hop `|…, n_i, …, n_j, …⟩ → |…, n_i+1, …, n_j−1, …⟩`
//! carries `J_ij · raise_i(n_i) · conj(lower_j(n_j))`, so `J` Hermitian gives
//! `H` exactly Hermitian for any species, including those with complex `f`.
//!
//! The mode-mixing protocol prepares `|l⟩_in ⊗ |0⟩_out` on a doubled mode set,
//! evolves under `H = Σ R_ji b_j,out† b_i,in + h.c.`, and reads out the
//! out-mode occupations. The transfer time is `t = π/(2|f(1)|²)`: in the
//! single-excitation sector every species couples with strength `|f(1)|²`, so
//! this calibration transfers one particle exactly (for standard bosons it is
//! the familiar `π/2`). A single excitation arrives at the out-modes as
//! `−i Σ_j conj(R_ji) b_j,out†`, so the realized linear-optical matrix is the
//! entrywise conjugate of `R`; ideal-distribution comparisons must use it.

use crate::algebra::{AlgebraError, GeneralizedBoson, LadderElements};
use crate::fbs::{
    full_distribution, total_variation, Distribution, FbsError, NumericalPolicy, OccupationVector,
};
use crate::krylov::{expm_multiply, KrylovError};
use crate::linalg::{haar_unitary, ComplexMatrix, LinalgError, ModeUnitary};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("Fock space dimension {dim} exceeds the limit {limit}")]
    SpaceTooLarge { dim: u128, limit: usize },
    #[error("cutoff count {got} does not match mode count {want}")]
    CutoffCount { got: usize, want: usize },
    #[error("cutoffs must be positive")]
    ZeroCutoff,
    #[error("coupling matrix is not Hermitian within {tol:e} (deviation {dev:e})")]
    NotHermitian { tol: f64, dev: f64 },
    #[error("dimension mismatch: {got}, expected {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("occupation {occ} at mode {mode} exceeds cutoff {cutoff}")]
    OccupationOutOfRange {
        mode: usize,
        occ: usize,
        cutoff: usize,
    },
    #[error("dense path limited to dimension {limit}, got {dim}")]
    DenseTooLarge { dim: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fbs(#[from] FbsError),
}

pub type DynResult<T> = Result<T, DynamicsError>;

pub const SPACE_DIM_LIMIT: usize = 2_000_000;
pub const DENSE_EVOLVE_LIMIT: usize = 1024;
pub const DENSE_REFERENCE_LIMIT: usize = 4000;
pub const COUPLING_HERMITICITY_TOL: f64 = 1e-10;
pub const DEFAULT_EVOLVE_TOL: f64 = 1e-10;

/// Truncated multi-mode Fock space with per-mode cutoffs `d_i` (levels
/// `0..d_i − 1`). Flat indices are mixed-radix with mode 1 most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(cutoffs: Vec<usize>) -> DynResult<Self> {
        if cutoffs.contains(&0) {
            return Err(DynamicsError::ZeroCutoff);
        }
        let mut dim: u128 = 1;
        for &d in &cutoffs {
            dim *= d as u128;
            if dim > SPACE_DIM_LIMIT as u128 {
                return Err(DynamicsError::SpaceTooLarge {
                    dim,
                    limit: SPACE_DIM_LIMIT,
                });
            }
        }
        let mut strides = vec![1usize; cutoffs.len()];
        for i in (0..cutoffs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cutoffs[i + 1];
        }
        Ok(Self {
            cutoffs,
            strides,
            dim: dim as usize,
        })
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn index_of(&self, occ: &[usize]) -> DynResult<usize> {
        if occ.len() != self.modes() {
            return Err(DynamicsError::DimensionMismatch {
                got: occ.len(),
                want: self.modes(),
            });
        }
        let mut idx = 0usize;
        for (mode, (&n, (&d, &s))) in occ
            .iter()
            .zip(self.cutoffs.iter().zip(&self.strides))
            .enumerate()
        {
            if n >= d {
                return Err(DynamicsError::OccupationOutOfRange {
                    mode,
                    occ: n,
                    cutoff: d,
                });
            }
            idx += n * s;
        }
        Ok(idx)
    }

    pub fn occupation_at(&self, mut idx: usize) -> Vec<usize> {
        debug_assert!(idx < self.dim);
        let mut occ = vec![0usize; self.modes()];
        for (o, &s) in occ.iter_mut().zip(&self.strides) {
            *o = idx / s;
            idx %= s;
        }
        occ
    }

    fn strides(&self) -> &[usize] {
        &self.strides
    }
}

/// Explicit constructor matching the (modes, cutoffs) calling convention.
pub fn build_space(modes: usize, cutoffs: &[usize]) -> DynResult<FockSpace> {
    if cutoffs.len() != modes {
        return Err(DynamicsError::CutoffCount {
            got: cutoffs.len(),
            want: modes,
        });
    }
    FockSpace::new(cutoffs.to_vec())
}

/// Default truncation policy: number conservation caps any mode at `N + 1`
/// levels for an `N`-particle input, and a species' own local dimension caps
/// it further.
pub fn default_cutoffs(boson: &GeneralizedBoson, modes: usize, total: usize) -> Vec<usize> {
    let cap = match boson.local_dim() {
        Some(d) => d.min(total + 1),
        None => total + 1,
    };
    vec![cap; modes]
}

/// State vector over a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amplitudes: Vec<C64>,
}

impl FockState {
    pub fn from_amplitudes(space: FockSpace, amplitudes: Vec<C64>) -> DynResult<Self> {
        if amplitudes.len() != space.dim() {
            return Err(DynamicsError::DimensionMismatch {
                got: amplitudes.len(),
                want: space.dim(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn basis_state(space: FockSpace, occ: &[usize]) -> DynResult<Self> {
        let idx = space.index_of(occ)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); space.dim()];
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Sparse Hermitian operator in coordinate form, triples sorted by
/// (row, col) with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    triples: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn new(dim: usize, mut triples: Vec<(usize, usize, C64)>) -> Self {
        triples.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triples.len());
        for (r, c, v) in triples {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != C64::new(0.0, 0.0));
        Self {
            dim,
            triples: merged,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn triples(&self) -> &[(usize, usize, C64)] {
        &self.triples
    }

    pub fn nnz(&self) -> usize {
        self.triples.len()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for &(r, c, val) in &self.triples {
            out[r] += val * v[c];
        }
        out
    }

    /// Max over entries of `|H_{rc} − conj(H_{cr})|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(r, c, v) in &self.triples {
            let mirror = self
                .triples
                .binary_search_by_key(&(c, r), |&(rr, cc, _)| (rr, cc))
                .map(|i| self.triples[i].2)
                .unwrap_or(C64::new(0.0, 0.0));
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }

    pub fn to_dense(&self) -> DynResult<nalgebra::DMatrix<C64>> {
        if self.dim > DENSE_REFERENCE_LIMIT {
            return Err(DynamicsError::DenseTooLarge {
                dim: self.dim,
                limit: DENSE_REFERENCE_LIMIT,
            });
        }
        let mut m = nalgebra::DMatrix::<C64>::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triples {
            m[(r, c)] += v;
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct SparseJson {
    dimension: usize,
    triples: Vec<(usize, usize, [f64; 2])>,
}

impl Serialize for SparseOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SparseJson {
            dimension: self.dim,
            triples: self
                .triples
                .iter()
                .map(|&(r, c, v)| (r, c, [v.re, v.im]))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SparseJson::deserialize(d)?;
        Ok(SparseOperator::new(
            j.dimension,
            j.triples
                .into_iter()
                .map(|(r, c, v)| (r, c, C64::new(v[0], v[1])))
                .collect(),
        ))
    }
}

/// Ladder amplitudes per occupation, zero at and above a species' local
/// dimension so unphysical cutoff levels decouple instead of erroring.
fn ladder_table(boson: &GeneralizedBoson, max_cutoff: usize) -> DynResult<Vec<LadderElements>> {
    let zero = LadderElements {
        lower: C64::new(0.0, 0.0),
        raise: C64::new(0.0, 0.0),
    };
    let mut table = Vec::with_capacity(max_cutoff);
    for n in 0..max_cutoff {
        match boson.local_dim() {
            Some(d) if n >= d => table.push(zero),
            _ => table.push(boson.ladder_elements(n)?),
        }
    }
    Ok(table)
}

/// `H = Σ_ij J_ij b_i†b_j` on the truncated space. Hops that would exceed a
/// mode's cutoff are dropped; diagonal `i = j` terms carry `|f(n)/f(n−1)|²`.
pub fn build_quadratic(
    boson: &GeneralizedBoson,
    coupling: &ComplexMatrix,
    space: &FockSpace,
) -> DynResult<SparseOperator> {
    let m = space.modes();
    if !coupling.is_square() || coupling.rows() != m {
        return Err(DynamicsError::DimensionMismatch {
            got: coupling.rows(),
            want: m,
        });
    }
    let dev = coupling.hermiticity_residual();
    if dev > COUPLING_HERMITICITY_TOL {
        return Err(DynamicsError::NotHermitian {
            tol: COUPLING_HERMITICITY_TOL,
            dev,
        });
    }
    let max_cutoff = space.cutoffs().iter().copied().max().unwrap_or(1);
    let ladders = ladder_table(boson, max_cutoff)?;
    let hops: Vec<(usize, usize, C64)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, coupling[(i, j)]))
        .filter(|&(_, _, v)| v != C64::new(0.0, 0.0))
        .collect();
    let mut triples = Vec::new();
    for s in 0..space.dim() {
        let occ = space.occupation_at(s);
        for &(i, j, jval) in &hops {
            let nj = occ[j];
            if nj == 0 {
                continue;
            }
            let lower = ladders[nj].lower;
            let value;
            let target;
            if i == j {
                value = jval * lower.norm_sqr();
                target = s;
            } else {
                let ni = occ[i];
                if ni + 1 >= space.cutoffs()[i] {
                    continue;
                }
                value = jval * ladders[ni].raise * lower.conj();
                target = s - space.strides()[j] + space.strides()[i];
            }
            if value != C64::new(0.0, 0.0) {
                triples.push((target, s, value));
            }
        }
    }
    Ok(SparseOperator::new(space.dim(), triples))
}

/// `H = Σ_ij R_ji b_{j,out}† b_{i,in} + h.c.` on a doubled mode set:
/// in-modes occupy positions `0..M`, out-modes `M..2M`.
pub fn build_bs_hamiltonian(
    boson: &GeneralizedBoson,
    r: &ModeUnitary,
    space: &FockSpace,
) -> DynResult<SparseOperator> {
    let m = r.modes();
    if space.modes() != 2 * m {
        return Err(DynamicsError::DimensionMismatch {
            got: space.modes(),
            want: 2 * m,
        });
    }
    let mut j = ComplexMatrix::zeros(2 * m, 2 * m);
    for out in 0..m {
        for inp in 0..m {
            let v = r.matrix()[(out, inp)];
            j[(m + out, inp)] = v;
            j[(inp, m + out)] = v.conj();
        }
    }
    build_quadratic(boson, &j, space)
}

/// `e^{−iHt}|ψ⟩` by full eigendecomposition; exact reference for spaces up to
/// [`DENSE_REFERENCE_LIMIT`].
pub(crate) fn evolve_dense(state: &FockState, h: &SparseOperator, t: f64) -> DynResult<FockState> {
    let n = h.dimension();
    if n > DENSE_REFERENCE_LIMIT {
        return Err(DynamicsError::DenseTooLarge {
            dim: n,
            limit: DENSE_REFERENCE_LIMIT,
        });
    }
    // hopping Hamiltonians on bipartite lattices have ±-paired spectra with
    // near-degenerate clusters; the solver must remain backward stable there
    let mut dense = faer::Mat::<C64>::zeros(n, n);
    for &(r, c, v) in h.triples() {
        dense[(r, c)] = v;
    }
    let eig = dense
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition of finite operator");
    let q = eig.U();
    let s = eig.S();
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    for (l, cl) in coeffs.iter_mut().enumerate() {
        for (k, ak) in state.amplitudes.iter().enumerate() {
            *cl += q[(k, l)].conj() * ak;
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); n];
    for l in 0..n {
        let phase = C64::from_polar(1.0, -s[l].re * t) * coeffs[l];
        for (k, ok) in out.iter_mut().enumerate() {
            *ok += q[(k, l)] * phase;
        }
    }
    FockState::from_amplitudes(state.space.clone(), out)
}

pub(crate) fn evolve_krylov(
    state: &FockState,
    h: &SparseOperator,
    t: f64,
    tol: f64,
) -> DynResult<FockState> {
    let amps = expm_multiply(&|v: &[C64]| h.apply(v), &state.amplitudes, t, tol)?;
    FockState::from_amplitudes(state.space.clone(), amps)
}

/// `e^{−iHt}|ψ⟩`: dense eigendecomposition for small spaces, Lanczos-Krylov
/// propagation beyond, accurate to `tol` against the dense reference.
pub fn evolve(state: &FockState, h: &SparseOperator, t: f64, tol: f64) -> DynResult<FockState> {
    if h.dimension() != state.space.dim() {
        return Err(DynamicsError::DimensionMismatch {
            got: h.dimension(),
            want: state.space.dim(),
        });
    }
    debug_assert!(h.hermiticity_residual() < 1e-9);
    if state.space.dim() <= DENSE_EVOLVE_LIMIT {
        evolve_dense(state, h, t)
    } else {
        evolve_krylov(state, h, t, tol)
    }
}

/// Output of the mode-transfer protocol: the out-mode occupation distribution
/// plus the population left behind in the in-modes.
#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub distribution: Distribution,
    pub leakage: f64,
    pub transfer_time: f64,
}

/// Prepares `|l⟩_in ⊗ |0⟩_out`, evolves under [`build_bs_hamiltonian`] for
/// `t = π/(2|f(1)|²)`, and marginalizes onto the out-mode occupations.
/// `cutoffs` covers all `2M` modes.
pub fn peropadre_distribution(
    boson: &GeneralizedBoson,
    r: &ModeUnitary,
    input: &OccupationVector,
    cutoffs: &[usize],
) -> DynResult<TransferReport> {
    let m = r.modes();
    if input.modes() != m {
        return Err(DynamicsError::DimensionMismatch {
            got: input.modes(),
            want: m,
        });
    }
    let space = build_space(2 * m, cutoffs)?;
    let mut occ = vec![0usize; 2 * m];
    occ[..m].copy_from_slice(input.as_slice());
    let start = FockState::basis_state(space.clone(), &occ)?;
    let h = build_bs_hamiltonian(boson, r, &space)?;
    let f1_sq = boson.factor(1)?.norm_sqr();
    if f1_sq == 0.0 {
        return Err(DynamicsError::InvalidParameter(
            "species has no single-excitation transfer (f(1) = 0)".into(),
        ));
    }
    let transfer_time = std::f64::consts::FRAC_PI_2 / f1_sq;
    let evolved = evolve(&start, &h, transfer_time, DEFAULT_EVOLVE_TOL)?;
    let mut weights: std::collections::BTreeMap<Vec<usize>, f64> =
        std::collections::BTreeMap::new();
    let mut leakage = 0.0f64;
    for (idx, amp) in evolved.amplitudes().iter().enumerate() {
        let w = amp.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let full = space.occupation_at(idx);
        if full[..m].iter().any(|&n| n > 0) {
            leakage += w;
        }
        *weights.entry(full[m..].to_vec()).or_insert(0.0) += w;
    }
    let pairs = weights
        .into_iter()
        .map(|(occ, w)| (OccupationVector::new(occ), w))
        .collect();
    let distribution = Distribution::from_weights(pairs, NumericalPolicy::Renormalize)?;
    Ok(TransferReport {
        distribution,
        leakage,
        transfer_time,
    })
}

/// Applies [`evolve`] segment by segment; each entry is a coupling matrix and
/// a duration.
pub fn trotter_evolve(
    boson: &GeneralizedBoson,
    state: &FockState,
    schedule: &[(ComplexMatrix, f64)],
    tol: f64,
) -> DynResult<FockState> {
    let mut current = state.clone();
    for (coupling, duration) in schedule {
        if *duration < 0.0 {
            return Err(DynamicsError::InvalidParameter(format!(
                "negative segment duration {duration}"
            )));
        }
        let h = build_quadratic(boson, coupling, &current.space)?;
        current = evolve(&current, &h, *duration, tol)?;
    }
    Ok(current)
}

/// Scaling-experiment table: mean total-variation distance to the ideal
/// distribution per mode count, with the fitted power-law exponent of
/// `mean_tv` against `M` (absent when any mean vanishes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingTable {
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub mean_tv: Vec<f64>,
    pub stderr: Vec<f64>,
    pub fitted_exponent: Option<f64>,
}

fn derive_seed(seed: u64, m: usize, trial: usize) -> u64 {
    let mut x = seed
        ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Dilution experiment: for each `M`, draw Haar interferometers, run the
/// transfer protocol on the collision-free input `(1,…,1,0,…,0)` with `N`
/// ones, and average the TV distance to the ideal distribution of the
/// realized matrix `conj(R)`. Trials are seeded per `(M, trial)` pair, so the
/// table is deterministic regardless of thread count.
pub fn tv_scaling_experiment(
    boson: &GeneralizedBoson,
    n: usize,
    m_list: &[usize],
    trials: usize,
    seed: u64,
) -> DynResult<ScalingTable> {
    if n == 0 || n > 3 {
        return Err(DynamicsError::InvalidParameter(format!(
            "particle number {n} outside 1..=3"
        )));
    }
    if trials == 0 {
        return Err(DynamicsError::InvalidParameter("zero trials".into()));
    }
    let mut mean_tv = Vec::with_capacity(m_list.len());
    let mut stderr = Vec::with_capacity(m_list.len());
    for &m in m_list {
        if m < n {
            return Err(DynamicsError::InvalidParameter(format!(
                "M = {m} smaller than N = {n}"
            )));
        }
        let mut input = vec![0usize; m];
        input[..n].iter_mut().for_each(|x| *x = 1);
        let input = OccupationVector::new(input);
        let cutoffs = default_cutoffs(boson, 2 * m, n);
        build_space(2 * m, &cutoffs)?;
        let tvs: Vec<DynResult<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let r = haar_unitary(m, derive_seed(seed, m, trial));
                let report = peropadre_distribution(boson, &r, &input, &cutoffs)?;
                let ideal =
                    full_distribution(boson, &r.conjugate(), &input, NumericalPolicy::Renormalize)?;
                Ok(total_variation(&report.distribution, &ideal)?)
            })
            .collect();
        let tvs = tvs.into_iter().collect::<DynResult<Vec<f64>>>()?;
        let mean = tvs.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            tvs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        mean_tv.push(mean);
        stderr.push((var / trials as f64).sqrt());
    }
    let fitted_exponent = fit_power_law(m_list, &mean_tv);
    Ok(ScalingTable {
        m: m_list.to_vec(),
        mean_tv,
        stderr,
        fitted_exponent,
    })
}

/// Least-squares slope of `ln(tv)` against `ln(M)`.
fn fit_power_law(m_list: &[usize], mean_tv: &[f64]) -> Option<f64> {
    if m_list.len() < 2 || mean_tv.iter().any(|&tv| tv <= 1e-300) {
        return None;
    }
    let xs: Vec<f64> = m_list.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = mean_tv.iter().map(|&tv| tv.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Cavity-mediated coupling `J_ij = g_i conj(g_j)/Δ − χ δ_ij`; Hermitian by
/// construction, rank 1 at `χ = 0`.
pub fn cqed_coupling(g: &[C64], delta: f64, chi: f64) -> DynResult<ComplexMatrix> {
    if delta == 0.0 {
        return Err(DynamicsError::InvalidParameter(
            "detuning must be nonzero".into(),
        ));
    }
    let m = g.len();
    let mut j = ComplexMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            j[(a, b)] = g[a] * g[b].conj() / delta;
        }
        j[(a, a)] -= chi;
    }
    Ok(j)
}

/// Effective superspin-pair coupling of the trapped-ion construction:
/// `J_eff = J0·N·(Σ_{i<j} dt_ij) / (Σ_{i<j} dt_ij · Σ_{α<β} |α−β|^ζ)`,
/// separations `|α−β|` measured in superspin units along the chain (this
/// indexing makes the uniform-schedule closed form `J0·N / Σ_{α<β}|α−β|^ζ`,
/// which at `ζ = 0`, `N = 2` is `4 J0/(Ns² − Ns)`). `dt` is the row-major
/// `Ns×Ns` schedule; only the upper triangle is read.
pub fn ion_superspin_coupling(
    j0_hz: f64,
    zeta: f64,
    ions_per_superspin: usize,
    superspins: usize,
    dt: &[f64],
) -> DynResult<f64> {
    if superspins < 2 {
        return Err(DynamicsError::InvalidParameter(
            "need at least two superspins".into(),
        ));
    }
    if ions_per_superspin == 0 {
        return Err(DynamicsError::InvalidParameter(
            "need at least one ion per superspin".into(),
        ));
    }
    if !(0.0..3.0).contains(&zeta) {
        return Err(DynamicsError::InvalidParameter(format!(
            "power-law exponent {zeta} outside [0, 3)"
        )));
    }
    if dt.len() != superspins * superspins {
        return Err(DynamicsError::DimensionMismatch {
            got: dt.len(),
            want: superspins * superspins,
        });
    }
    if dt.iter().any(|&x| x < 0.0) {
        return Err(DynamicsError::InvalidParameter(
            "segment times must be nonnegative".into(),
        ));
    }
    let mut sum_dt = 0.0f64;
    let mut separations = 0.0f64;
    for i in 0..superspins {
        for j in (i + 1)..superspins {
            sum_dt += dt[i * superspins + j];
            separations += ((j - i) as f64).powf(zeta);
        }
    }
    if sum_dt == 0.0 {
        return Err(DynamicsError::InvalidParameter(
            "all segment times are zero".into(),
        ));
    }
    Ok(j0_hz * ions_per_superspin as f64 * sum_dt / (sum_dt * separations))
}
