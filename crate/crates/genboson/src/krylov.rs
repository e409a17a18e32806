//! Hermitian Krylov propagation: `e^{−iHt}v` through Lanczos with full
//! reorthogonalization and adaptive time-step bisection.
//!
//! The operator enters only through its matrix-vector product. Each step
//! builds an orthonormal basis of span{v, Hv, …}, exponentiates the small
//! real symmetric tridiagonal projection, and accepts the step when the
//! standard residual estimate `β_m |y_m|` clears the step's error budget;
//! otherwise the interval is bisected with the budget split between halves.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("propagation failed to reach tolerance {tol:e} within {max_depth} bisections")]
    NotConverged { tol: f64, max_depth: usize },
}

pub const MAX_BASIS: usize = 30;
pub const MAX_DEPTH: usize = 40;

struct LanczosDecomposition {
    basis: Vec<Vec<C64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    /// The residual vanished: the basis spans an invariant subspace and the
    /// projected exponential is exact for any time.
    complete: bool,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn lanczos<F>(matvec: &F, start: &[C64], max_basis: usize) -> LanczosDecomposition
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let beta0 = norm(start);
    let mut basis: Vec<Vec<C64>> = vec![start.iter().map(|z| z / beta0).collect()];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut scale = 1.0f64;
    for j in 0..max_basis {
        let mut w = matvec(&basis[j]);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= alpha * vi;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        // two passes of re-projection keep the basis orthonormal in floating
        // point even when eigenvalues cluster
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let beta = norm(&w);
        betas.push(beta);
        scale = scale.max(alpha.abs()).max(beta);
        if beta <= 1e-14 * scale.max(1.0) {
            return LanczosDecomposition {
                basis,
                alphas,
                betas,
                complete: true,
            };
        }
        if j + 1 < max_basis {
            basis.push(w.iter().map(|z| z / beta).collect());
        }
    }
    LanczosDecomposition {
        basis,
        alphas,
        betas,
        complete: false,
    }
}

/// `y = exp(−i T t) (β₀ e₁)` for the real symmetric tridiagonal `T`.
///
/// Bipartite hopping Hamiltonians project to tridiagonals whose spectra pair
/// as ±λ with gaps near machine precision; the residual estimate downstream
/// is only as trustworthy as this solver's backward error, so the
/// decomposition must stay backward stable on clustered spectra.
fn tridiag_expm_e1(alphas: &[f64], betas: &[f64], t: f64, beta0: f64) -> Vec<C64> {
    let m = alphas.len();
    let mut tri = faer::Mat::<f64>::zeros(m, m);
    for j in 0..m {
        tri[(j, j)] = alphas[j];
        if j + 1 < m {
            tri[(j, j + 1)] = betas[j];
            tri[(j + 1, j)] = betas[j];
        }
    }
    let eig = tri
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition of finite tridiagonal");
    let q = eig.U();
    let s = eig.S();
    let mut y = vec![C64::new(0.0, 0.0); m];
    for l in 0..m {
        let phase = C64::from_polar(beta0, -s[l] * t) * q[(0, l)];
        for (k, yk) in y.iter_mut().enumerate() {
            *yk += q[(k, l)] * phase;
        }
    }
    y
}

/// `e^{−i t H} v` for Hermitian `H` given through its matrix-vector product.
/// `tol` bounds the accumulated propagation error in 2-norm.
pub fn expm_multiply<F>(matvec: &F, v: &[C64], t: f64, tol: f64) -> Result<Vec<C64>, KrylovError>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if t == 0.0 || norm(v) == 0.0 {
        return Ok(v.to_vec());
    }
    step(matvec, v, t, tol, 0)
}

fn step<F>(matvec: &F, v: &[C64], t: f64, tol: f64, depth: usize) -> Result<Vec<C64>, KrylovError>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let beta0 = norm(v);
    let dec = lanczos(matvec, v, MAX_BASIS);
    let m = dec.alphas.len();
    let y = tridiag_expm_e1(&dec.alphas, &dec.betas[..m - 1], t, beta0);
    let residual = dec.betas[m - 1] * y[m - 1].norm();
    if dec.complete || residual <= tol {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (k, basis_vec) in dec.basis.iter().enumerate() {
            let yk = y[k];
            for (oi, bi) in out.iter_mut().zip(basis_vec) {
                *oi += yk * bi;
            }
        }
        return Ok(out);
    }
    if depth >= MAX_DEPTH {
        return Err(KrylovError::NotConverged {
            tol,
            max_depth: MAX_DEPTH,
        });
    }
    let halfway = step(matvec, v, t / 2.0, tol / 2.0, depth + 1)?;
    step(matvec, &halfway, t / 2.0, tol / 2.0, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(dim: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let raw = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (raw.clone() + raw.adjoint()) * C64::new(0.5, 0.0)
    }

    fn dense_reference(h: &DMatrix<C64>, v: &[C64], t: f64) -> Vec<C64> {
        let eig = h.clone().symmetric_eigen();
        let coeffs = eig.eigenvectors.adjoint() * DMatrix::from_column_slice(v.len(), 1, v);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for l in 0..v.len() {
            let phase = C64::from_polar(1.0, -eig.eigenvalues[l] * t) * coeffs[(l, 0)];
            for (k, ok) in out.iter_mut().enumerate() {
                *ok += eig.eigenvectors[(k, l)] * phase;
            }
        }
        out
    }

    fn matvec_of(h: &DMatrix<C64>) -> impl Fn(&[C64]) -> Vec<C64> + '_ {
        move |v: &[C64]| {
            let prod = h * DMatrix::from_column_slice(v.len(), 1, v);
            prod.column(0).iter().copied().collect()
        }
    }

    #[test]
    fn matches_dense_reference() {
        for (dim, t, seed) in [(12usize, 0.7f64, 1u64), (40, 3.0, 2), (64, 12.5, 3)] {
            let h = random_hermitian(dim, seed);
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed + 100);
            let mut v: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let nv = norm(&v);
            v.iter_mut().for_each(|z| *z /= nv);
            let got = expm_multiply(&matvec_of(&h), &v, t, 1e-11).unwrap();
            let want = dense_reference(&h, &v, t);
            let err: f64 = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-9, "dim={dim} t={t}: err={err:e}");
            assert!((norm(&got) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn invariant_subspace_terminates_early() {
        // block-diagonal H with the start vector inside a 3-dim block: the
        // basis completes at 3 vectors and is exact for any t
        let mut h = DMatrix::<C64>::zeros(50, 50);
        let block = random_hermitian(3, 7);
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] = block[(i, j)];
            }
        }
        for i in 3..50 {
            h[(i, i)] = C64::new(i as f64, 0.0);
        }
        let mut v = vec![C64::new(0.0, 0.0); 50];
        v[0] = C64::new(0.6, 0.0);
        v[1] = C64::new(0.0, 0.8);
        let got = expm_multiply(&matvec_of(&h), &v, 200.0, 1e-12).unwrap();
        let want = dense_reference(&h, &v, 200.0);
        let err: f64 = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "err={err:e}");
        for z in &got[3..] {
            assert_eq!(*z, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_time_and_zero_vector_are_identity() {
        let h = random_hermitian(8, 11);
        let v: Vec<C64> = (0..8).map(|i| C64::new(i as f64, -1.0)).collect();
        assert_eq!(expm_multiply(&matvec_of(&h), &v, 0.0, 1e-12).unwrap(), v);
        let zero = vec![C64::new(0.0, 0.0); 8];
        assert_eq!(
            expm_multiply(&matvec_of(&h), &zero, 2.0, 1e-12).unwrap(),
            zero
        );
    }
}
