//! Generalized boson species and their single-mode algebra.
//!
//! A species is fixed by its *bosonic factor* `f(n)`, defined through
//! `(b†)^n |0⟩ = f(n) |n⟩` with `f(0) = 1`, or equivalently by the diagonal
//! commutator function `F(n)` appearing in `[b, b†] = Σ_n F(n) |n⟩⟨n|`.
//! The two characterizations are linked by
//!
//! ```text
//! F(n) = f(n+1)²/f(n)² − f(n)²/f(n−1)²            (F(0) = f(1)²)
//! f(n+1)²/f(n)² = f(1)² + Σ_{i=1..n} F(i)
//! ```
//!
//! Internally every species is represented by the squared ladder ratio
//! `r²(n) = f(n)²/f(n−1)²`, which stays well scaled where `f(n)` itself grows
//! factorially; `f(n)` is reconstructed as a product of principal square
//! roots of `r²`, accumulated in log-magnitude/phase form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Species whose factor table cannot be evaluated at the requested occupation,
/// or whose parameters are rejected at construction.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("invalid species parameter: {0}")]
    InvalidParameter(String),
    #[error("factor table exhausted: f({0}) is outside the supplied table")]
    TableExhausted(usize),
    #[error(
        "commutator undefined on truncated state: n = {n} reaches local dimension {local_dim}"
    )]
    TruncatedState { n: usize, local_dim: usize },
}

pub type AlgebraResult<T> = Result<T, AlgebraError>;

/// Matrix elements of the ladder operators at occupation `n`:
/// `b|n⟩ = lower |n−1⟩` and `b†|n⟩ = raise |n+1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderElements {
    pub lower: C64,
    pub raise: C64,
}

/// The species catalog plus user-supplied tables.
#[derive(Debug, Clone, PartialEq)]
pub enum BosonKind {
    /// Ordinary bosons, `f(n) = √(n!)`, `F(n) = 1`.
    Standard,
    /// Pairs of ordinary bosons (`b = a²/√2`-type), `f(n) = √((2n)!)`, `F(n) = 2 + 8n`.
    BosonPair,
    /// Spin-S excitations; `two_s` stores 2S. Truncated at `local_dim = 2S + 1`.
    SpinS { two_s: usize },
    /// q-deformed bosons, `f(n) = √([n]_q!)` with `[n]_q = (qⁿ − q⁻ⁿ)/(q − q⁻¹)`.
    QBoson { q: C64 },
    /// m-parabosons, defined by the commutator `F(n) = 1 + (2m+1)(−1)ⁿ`.
    MParaboson { m: usize },
    /// Explicit factor table `f(0), f(1), …` (must start at 1).
    CustomFactor { f_table: Vec<C64> },
    /// Explicit commutator table `F(0), F(1), …`; `f` is rebuilt by recursion.
    CustomCommutator { table: Vec<C64> },
}

/// A generalized boson species with its precomputed local dimension
/// (`None` means the single-mode Hilbert space is unbounded).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedBoson {
    kind: BosonKind,
    local_dim: Option<usize>,
}

/// Partial sums of a commutator table vanish to within this scale-relative
/// tolerance are treated as exact truncation points.
const TRUNCATION_EPS: f64 = 1e-12;

/// `q` within this distance of ±1 is evaluated by the analytic limit of `[n]_q`.
const Q_LIMIT_EPS: f64 = 1e-12;

fn almost_zero(z: C64, scale: f64) -> bool {
    z.norm() <= TRUNCATION_EPS * scale.max(1.0)
}

/// `[n]_q`, with the analytic limits `n` at `q = 1` and `n(−1)^{n+1}` at `q = −1`.
fn q_bracket(q: C64, n: usize) -> C64 {
    let nf = n as f64;
    if (q - C64::new(1.0, 0.0)).norm() < Q_LIMIT_EPS {
        return C64::new(nf, 0.0);
    }
    if (q + C64::new(1.0, 0.0)).norm() < Q_LIMIT_EPS {
        let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        return C64::new(sign * nf, 0.0);
    }
    let qinv = 1.0 / q;
    (q.powi(n as i32) - qinv.powi(n as i32)) / (q - qinv)
}

/// Squared ladder ratios generated from a commutator table:
/// `r²(n) = F(0) + Σ_{i=1..n−1} F(i)`. Returns `(value, branch_warning)`;
/// the warning marks partial sums on the negative real axis, where the
/// principal square root leaves the real line.
fn ratio_sq_from_commutator(table: &[C64], n: usize) -> AlgebraResult<(C64, bool)> {
    debug_assert!(n >= 1);
    if table.is_empty() || n > table.len() {
        return Err(AlgebraError::TableExhausted(n));
    }
    let mut sum = table[0];
    let mut scale = table[0].norm();
    for v in &table[1..n] {
        sum += v;
        scale = scale.max(v.norm());
    }
    if almost_zero(sum, scale) {
        return Ok((C64::new(0.0, 0.0), false));
    }
    let warn = sum.im.abs() <= TRUNCATION_EPS * sum.norm() && sum.re < 0.0;
    Ok((sum, warn))
}

impl GeneralizedBoson {
    pub fn new(kind: BosonKind) -> AlgebraResult<Self> {
        let local_dim = match &kind {
            BosonKind::Standard | BosonKind::BosonPair | BosonKind::MParaboson { .. } => None,
            BosonKind::SpinS { two_s } => {
                if *two_s == 0 {
                    return Err(AlgebraError::InvalidParameter(
                        "spin species needs 2S >= 1".into(),
                    ));
                }
                Some(two_s + 1)
            }
            BosonKind::QBoson { q } => {
                if q.norm() == 0.0 {
                    return Err(AlgebraError::InvalidParameter("q must be nonzero".into()));
                }
                None
            }
            BosonKind::CustomFactor { f_table } => {
                if f_table.first() != Some(&C64::new(1.0, 0.0)) {
                    return Err(AlgebraError::InvalidParameter(
                        "factor table must start with f(0) = 1".into(),
                    ));
                }
                f_table.iter().position(|f| f.norm() == 0.0)
            }
            BosonKind::CustomCommutator { table } => {
                if table.is_empty() {
                    return Err(AlgebraError::InvalidParameter(
                        "commutator table must contain F(0)".into(),
                    ));
                }
                // local_dim = first n whose ratio-squared partial sum vanishes
                let mut dim = None;
                for n in 1..=table.len() {
                    if ratio_sq_from_commutator(table, n)?.0.norm() == 0.0 {
                        dim = Some(n);
                        break;
                    }
                }
                dim
            }
        };
        Ok(Self { kind, local_dim })
    }

    pub fn standard() -> Self {
        Self::new(BosonKind::Standard).expect("parameter-free")
    }

    pub fn boson_pair() -> Self {
        Self::new(BosonKind::BosonPair).expect("parameter-free")
    }

    /// Spin species with `2S = two_s`.
    pub fn spin(two_s: usize) -> AlgebraResult<Self> {
        Self::new(BosonKind::SpinS { two_s })
    }

    pub fn q_boson(q: C64) -> AlgebraResult<Self> {
        Self::new(BosonKind::QBoson { q })
    }

    pub fn m_paraboson(m: usize) -> Self {
        Self::new(BosonKind::MParaboson { m }).expect("all m >= 0 are valid")
    }

    pub fn kind(&self) -> &BosonKind {
        &self.kind
    }

    /// Dimension of the single-mode Hilbert space, when finite.
    pub fn local_dim(&self) -> Option<usize> {
        self.local_dim
    }

    /// `f(n)²/f(n−1)²` for `n ≥ 1`; exactly 0 at and beyond the local dimension.
    pub fn factor_ratio_sq(&self, n: usize) -> AlgebraResult<C64> {
        debug_assert!(n >= 1, "ratio is defined for n >= 1");
        if let Some(d) = self.local_dim {
            if n > d {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        match &self.kind {
            BosonKind::Standard => Ok(C64::new(n as f64, 0.0)),
            BosonKind::BosonPair => Ok(C64::new((2 * n) as f64 * (2 * n - 1) as f64, 0.0)),
            BosonKind::SpinS { two_s } => {
                if n > *two_s {
                    Ok(C64::new(0.0, 0.0))
                } else {
                    Ok(C64::new(n as f64 * (two_s - n + 1) as f64, 0.0))
                }
            }
            BosonKind::QBoson { q } => Ok(q_bracket(*q, n)),
            BosonKind::MParaboson { m } => {
                // partial sums of F(i) = 1 + (2m+1)(−1)^i in closed form
                let mf = (2 * m + 1) as f64;
                let alt = if (n - 1) % 2 == 1 { -mf } else { 0.0 };
                Ok(C64::new(mf + 1.0 + (n - 1) as f64 + alt, 0.0))
            }
            BosonKind::CustomFactor { f_table } => {
                if n >= f_table.len() {
                    return Err(AlgebraError::TableExhausted(n));
                }
                let prev = f_table[n - 1];
                if prev.norm() == 0.0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let r = f_table[n] / prev;
                Ok(r * r)
            }
            BosonKind::CustomCommutator { table } => Ok(ratio_sq_from_commutator(table, n)?.0),
        }
    }

    /// The bosonic factor `f(n)`; exactly 1 at `n = 0` and exactly 0 at and
    /// beyond the local dimension. Accumulated in log-magnitude/phase form so
    /// factorial growth only saturates where `f(n)` itself leaves f64 range.
    pub fn factor(&self, n: usize) -> AlgebraResult<C64> {
        if n == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        if let Some(d) = self.local_dim {
            if n >= d {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        let mut log_mag = 0.0;
        let mut phase = 0.0;
        for j in 1..=n {
            let r2 = self.factor_ratio_sq(j)?;
            if r2.norm() == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            log_mag += 0.5 * r2.norm().ln();
            phase += 0.5 * r2.arg();
        }
        Ok(C64::from_polar(log_mag.exp(), phase))
    }

    /// `F(n)`, the diagonal commutator eigenvalue on `|n⟩`. Errors where the
    /// state itself is truncated away.
    pub fn commutator(&self, n: usize) -> AlgebraResult<C64> {
        if let Some(d) = self.local_dim {
            if n >= d {
                return Err(AlgebraError::TruncatedState { n, local_dim: d });
            }
        }
        let up = self.factor_ratio_sq(n + 1)?;
        if n == 0 {
            return Ok(up);
        }
        Ok(up - self.factor_ratio_sq(n)?)
    }

    /// Ladder matrix elements at occupation `n` (`lower = f(n)/f(n−1)`,
    /// `raise = f(n+1)/f(n)`, principal square roots of the squared ratios).
    pub fn ladder_elements(&self, n: usize) -> AlgebraResult<LadderElements> {
        if let Some(d) = self.local_dim {
            if n >= d {
                return Err(AlgebraError::TruncatedState { n, local_dim: d });
            }
        }
        let lower = if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.factor_ratio_sq(n)?.sqrt()
        };
        let raise = self.factor_ratio_sq(n + 1)?.sqrt();
        Ok(LadderElements { lower, raise })
    }
}

/// Rebuilds `f(n)` from a commutator table by the partial-sum recursion,
/// taking principal square roots factor by factor.
pub fn factor_from_commutator(table: &[C64], n: usize) -> AlgebraResult<C64> {
    let mut f = C64::new(1.0, 0.0);
    for j in 1..=n {
        let (r2, _) = ratio_sq_from_commutator(table, j)?;
        if r2.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        f *= r2.sqrt();
    }
    Ok(f)
}

/// One row of a [`RoundtripReport`].
#[derive(Debug, Clone)]
pub struct RoundtripEntry {
    pub n: usize,
    pub factor: C64,
    /// |f rebuilt from F_from_f  −  f| / max(1, |f|): the recursion identity.
    pub recursion_residual: f64,
    /// Deviation of `f(n)` from the catalog's closed-form factor column.
    pub catalog_factor_residual: Option<f64>,
    /// Deviation of `F(n)` from the catalog's closed-form commutator column.
    pub catalog_commutator_residual: Option<f64>,
}

/// Result of [`roundtrip_check`]: the f ↔ F recursion identity per occupation,
/// plus cross-checks against the two conventional closed forms for catalog
/// species. A nonzero catalog residual flags a species whose two published
/// characterizations are mutually inconsistent (the factor form is the one
/// this crate treats as ground truth for spin species, and the commutator
/// form for m-parabosons).
#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub entries: Vec<RoundtripEntry>,
    pub max_recursion_residual: f64,
    pub max_catalog_residual: f64,
    /// True when some catalog closed form disagrees beyond 1e-6.
    pub catalog_discrepancy: bool,
    /// Count of negative-real partial sums met while rebuilding f from F.
    pub branch_warnings: usize,
}

/// Closed-form commutator column for catalog species, where one exists.
fn catalog_commutator_closed_form(kind: &BosonKind, n: usize) -> Option<C64> {
    match kind {
        BosonKind::Standard => Some(C64::new(1.0, 0.0)),
        BosonKind::BosonPair => Some(C64::new(2.0 + 8.0 * n as f64, 0.0)),
        BosonKind::SpinS { two_s } => {
            // (n − 2S) θ(2S − n), as conventionally printed
            let v = if n <= *two_s {
                n as f64 - *two_s as f64
            } else {
                0.0
            };
            Some(C64::new(v, 0.0))
        }
        BosonKind::QBoson { q } => Some(q_bracket(*q, n + 1) - q_bracket(*q, n)),
        BosonKind::MParaboson { m } => {
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            Some(C64::new(1.0 + (2 * m + 1) as f64 * sign, 0.0))
        }
        _ => None,
    }
}

/// Closed-form factor column for catalog species, where one exists.
fn catalog_factor_closed_form(kind: &BosonKind, n: usize) -> Option<C64> {
    match kind {
        BosonKind::Standard => {
            let mut v = 1.0;
            for j in 1..=n {
                v *= j as f64;
            }
            Some(C64::new(v.sqrt(), 0.0))
        }
        BosonKind::BosonPair => {
            let mut v = 1.0;
            for j in 1..=2 * n {
                v *= j as f64;
            }
            Some(C64::new(v.sqrt(), 0.0))
        }
        BosonKind::SpinS { two_s } => {
            if n > *two_s {
                return Some(C64::new(0.0, 0.0));
            }
            // n! (2S)! / (2S − n)!
            let mut v = 1.0;
            for j in 1..=n {
                v *= j as f64;
            }
            for j in (two_s - n + 1)..=*two_s {
                v *= j as f64;
            }
            Some(C64::new(v.sqrt(), 0.0))
        }
        BosonKind::QBoson { q } => {
            let mut v = C64::new(1.0, 0.0);
            for j in 1..=n {
                v *= q_bracket(*q, j).sqrt();
            }
            Some(v)
        }
        BosonKind::MParaboson { m } => {
            // conventional product form Π_k √((2k + 2m + 3 + (2m+1) e^{2πk})/2)
            let mut v = 1.0;
            for k in 1..=n {
                let term = (2 * k) as f64
                    + (2 * m) as f64
                    + 3.0
                    + (2 * m + 1) as f64 * (TAU * k as f64).exp();
                v *= (term / 2.0).sqrt();
            }
            Some(C64::new(v, 0.0))
        }
        _ => None,
    }
}

const TAU: f64 = std::f64::consts::TAU;

/// Verifies the f ↔ F recursion identity for `n ≤ n_max` and cross-checks
/// catalog closed forms; see [`RoundtripReport`].
pub fn roundtrip_check(boson: &GeneralizedBoson, n_max: usize) -> AlgebraResult<RoundtripReport> {
    // Rebuilding f(n) for n ≤ n_max consumes F(0) … F(n−1); truncated species
    // stop one short of the local dimension and are identically zero beyond.
    let f_count = match boson.local_dim() {
        Some(d) => n_max.min(d - 1),
        None => n_max,
    };
    let mut commutator_table = Vec::with_capacity(f_count);
    for n in 0..f_count {
        commutator_table.push(boson.commutator(n)?);
    }

    let mut branch_warnings = 0usize;
    for j in 1..=f_count {
        if let Ok((_, true)) = ratio_sq_from_commutator(&commutator_table, j) {
            branch_warnings += 1;
        }
    }

    let mut entries = Vec::new();
    let mut max_rec = 0.0f64;
    let mut max_cat = 0.0f64;
    for n in 0..=n_max {
        let f = boson.factor(n)?;
        let scale = f.norm().max(1.0);
        let rebuilt = match boson.local_dim() {
            // truncated species: everything at and beyond local_dim is exactly zero
            Some(d) if n >= d => C64::new(0.0, 0.0),
            _ => factor_from_commutator(&commutator_table, n)?,
        };
        let recursion_residual = (rebuilt - f).norm() / scale;

        let catalog_factor_residual =
            catalog_factor_closed_form(boson.kind(), n).map(|cf| (cf - f).norm() / scale);
        let catalog_commutator_residual = match boson.commutator(n) {
            Ok(actual) => catalog_commutator_closed_form(boson.kind(), n)
                .map(|cf| (cf - actual).norm() / actual.norm().max(1.0)),
            Err(_) => None,
        };

        max_rec = max_rec.max(recursion_residual);
        if let Some(r) = catalog_factor_residual {
            max_cat = max_cat.max(r);
        }
        if let Some(r) = catalog_commutator_residual {
            max_cat = max_cat.max(r);
        }
        entries.push(RoundtripEntry {
            n,
            factor: f,
            recursion_residual,
            catalog_factor_residual,
            catalog_commutator_residual,
        });
    }
    Ok(RoundtripReport {
        entries,
        max_recursion_residual: max_rec,
        max_catalog_residual: max_cat,
        catalog_discrepancy: max_cat > 1e-6,
        branch_warnings,
    })
}

// --- serialization ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum SpeciesJson {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "boson_pair")]
    BosonPair,
    #[serde(rename = "spin_s")]
    SpinS { params: SpinParams },
    #[serde(rename = "q_boson")]
    QBoson { params: QParams },
    #[serde(rename = "m_paraboson")]
    MParaboson { params: MParams },
    #[serde(rename = "custom_f")]
    CustomFactor { f_table: Vec<[f64; 2]> },
    #[serde(rename = "custom_commutator")]
    CustomCommutator { commutator_table: Vec<[f64; 2]> },
}

#[derive(Serialize, Deserialize)]
struct SpinParams {
    two_s: usize,
}

#[derive(Serialize, Deserialize)]
struct QParams {
    q: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct MParams {
    m: usize,
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

impl Serialize for GeneralizedBoson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let j = match &self.kind {
            BosonKind::Standard => SpeciesJson::Standard,
            BosonKind::BosonPair => SpeciesJson::BosonPair,
            BosonKind::SpinS { two_s } => SpeciesJson::SpinS {
                params: SpinParams { two_s: *two_s },
            },
            BosonKind::QBoson { q } => SpeciesJson::QBoson {
                params: QParams { q: [q.re, q.im] },
            },
            BosonKind::MParaboson { m } => SpeciesJson::MParaboson {
                params: MParams { m: *m },
            },
            BosonKind::CustomFactor { f_table } => SpeciesJson::CustomFactor {
                f_table: pairs(f_table),
            },
            BosonKind::CustomCommutator { table } => SpeciesJson::CustomCommutator {
                commutator_table: pairs(table),
            },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneralizedBoson {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SpeciesJson::deserialize(d)?;
        let kind = match j {
            SpeciesJson::Standard => BosonKind::Standard,
            SpeciesJson::BosonPair => BosonKind::BosonPair,
            SpeciesJson::SpinS { params } => BosonKind::SpinS {
                two_s: params.two_s,
            },
            SpeciesJson::QBoson { params } => BosonKind::QBoson {
                q: C64::new(params.q[0], params.q[1]),
            },
            SpeciesJson::MParaboson { params } => BosonKind::MParaboson { m: params.m },
            SpeciesJson::CustomFactor { f_table } => BosonKind::CustomFactor {
                f_table: unpairs(&f_table),
            },
            SpeciesJson::CustomCommutator { commutator_table } => BosonKind::CustomCommutator {
                table: unpairs(&commutator_table),
            },
        };
        GeneralizedBoson::new(kind).map_err(serde::de::Error::custom)
    }
}

// --- tests -------------------------------------------------------------------
