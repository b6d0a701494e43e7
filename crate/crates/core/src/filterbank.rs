//! Filter banks `(m₀, …, m_{N−1})` for a digit system, polyphase unitarity,
//! the pairing `⟨m, m′⟩_N`, and the loop-group action `m ↦ A(z^N) m(z)`.
//!
//! Banks built by [`build_bank`] are ordered as: the low-pass filter, then
//! one gap-filling monomial `z^d` per missing digit `d` (ascending), then the
//! `p − 1` detail-filling filters `p^{-1/2} Σ_i η^{k i} z^{a_i}`, `η = e^{2πi/p}`,
//! for `k = 1, …, p−1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ifs::DigitSystem;
use crate::laurent::LaurentPolynomial;
use crate::scalar::Scalar;

/// Tolerance for unitarity of approximate-tier banks and loop matrices.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Number of torus samples used when a caller does not choose one.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    scale: u32,
    filters: Vec<LaurentPolynomial>,
}

impl FilterBank {
    pub fn new(scale: u32, filters: Vec<LaurentPolynomial>) -> Result<Self> {
        if filters.len() != scale as usize {
            return Err(Error::Precondition(format!(
                "a scale-{scale} bank needs {scale} filters, got {}",
                filters.len()
            )));
        }
        Ok(FilterBank { scale, filters })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn filters(&self) -> &[LaurentPolynomial] {
        &self.filters
    }

    pub fn filter(&self, i: usize) -> &LaurentPolynomial {
        &self.filters[i]
    }

    pub fn lowpass(&self) -> &LaurentPolynomial {
        &self.filters[0]
    }

    pub fn is_exact(&self) -> bool {
        self.filters.iter().all(LaurentPolynomial::is_exact)
    }

    /// Reorder filters: output slot `i` holds input filter `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.filters.len()];
        if order.len() != self.filters.len() {
            return Err(Error::Precondition("permutation has the wrong length".into()));
        }
        for &i in order {
            if i >= seen.len() || seen[i] {
                return Err(Error::Precondition(format!("{order:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(FilterBank {
            scale: self.scale,
            filters: order.iter().map(|&i| self.filters[i].clone()).collect(),
        })
    }

    /// Polyphase matrix `H_{i,r}(z)` with `m_i(w) = Σ_r w^r H_{i,r}(w^N)`.
    pub fn polyphase_at(&self, z: Complex64) -> DMatrix<Complex64> {
        polyphase(&self.filters, self.scale, z)
    }
}

fn polyphase(filters: &[LaurentPolynomial], scale: u32, z: Complex64) -> DMatrix<Complex64> {
    let n = scale as i64;
    let mut h = DMatrix::zeros(filters.len(), scale as usize);
    for (i, m) in filters.iter().enumerate() {
        for (k, a) in m.terms() {
            let r = k.rem_euclid(n);
            let q = k.div_euclid(n);
            h[(i, r as usize)] += a.to_complex() * z.powi(q as i32);
        }
    }
    h
}

/// `m₀(z) = p^{-1/2} Σ_{a∈S} z^a`.
pub fn canonical_lowpass(sys: &DigitSystem) -> LaurentPolynomial {
    sys.lowpass()
}

pub fn build_bank(sys: &DigitSystem) -> FilterBank {
    let p = sys.p() as i64;
    let mut filters = vec![canonical_lowpass(sys)];
    for d in sys.gap_digits() {
        filters.push(LaurentPolynomial::monomial(d as i64, Scalar::one()));
    }
    let c = sys.inv_sqrt_p();
    for k in 1..p {
        filters.push(LaurentPolynomial::from_terms(
            sys.digits()
                .iter()
                .enumerate()
                .map(|(i, &a)| (a as i64, &c * &Scalar::root_of_unity(k * i as i64, p))),
        ));
    }
    FilterBank { scale: sys.scale(), filters }
}

/// `⟨m, m′⟩_N(z) = (1/N) Σ_{w^N=z} conj(m(w)) m′(w)`, coefficientwise
/// `c_n = Σ_k conj(m_k) m′_{k+Nn}`.
pub fn pairing(m: &LaurentPolynomial, m2: &LaurentPolynomial, n: u32) -> LaurentPolynomial {
    let n = n as i64;
    let mut out = LaurentPolynomial::zero();
    for (k, a) in m.terms() {
        let ac = a.conj();
        for (j, b) in m2.terms() {
            let d = j - k;
            if d.rem_euclid(n) == 0 {
                out.add_term(d / n, &(&ac * b));
            }
        }
    }
    out
}

/// Outcome of a unitarity check. `exact` is set when the coefficient
/// identities held exactly, in which case `value` is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityDefect {
    pub value: f64,
    pub exact: bool,
}

impl UnitarityDefect {
    pub fn passes(&self, tol: f64) -> bool {
        self.exact || self.value < tol
    }
}

fn operator_norm(m: DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Distance of the polyphase matrix from unitary: the larger of
/// `max_z ‖H(z)H(z)* − I‖` over `samples` roots of unity and the largest
/// deviation of the pairing coefficients from `δ_{ij}`.
pub fn unitarity_defect(bank: &FilterBank, samples: usize) -> UnitarityDefect {
    gram_defect(bank.filters(), bank.scale(), samples)
}

fn gram_defect(filters: &[LaurentPolynomial], scale: u32, samples: usize) -> UnitarityDefect {
    let mut coeff_dev: f64 = 0.0;
    let mut all_exact = true;
    for (i, mi) in filters.iter().enumerate() {
        for (j, mj) in filters.iter().enumerate() {
            let pij = pairing(mj, mi, scale);
            let target = if i == j { LaurentPolynomial::one() } else { LaurentPolynomial::zero() };
            let diff = pij.sub(&target);
            if !(diff.is_zero() && pij.is_exact()) {
                all_exact = false;
            }
            coeff_dev = coeff_dev.max(pij.max_distance(&target));
        }
    }
    if all_exact {
        return UnitarityDefect { value: 0.0, exact: true };
    }
    let samples = samples.max(1);
    let id = DMatrix::<Complex64>::identity(filters.len(), filters.len());
    let sampled = (0..samples)
        .map(|s| {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s as f64 / samples as f64);
            let h = polyphase(filters, scale, z);
            operator_norm(&h * h.adjoint() - &id)
        })
        .fold(0.0, f64::max);
    UnitarityDefect { value: sampled.max(coeff_dev), exact: false }
}

/// An `N × N` matrix of Laurent polynomials, acting by `m ↦ A(z^N) m(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopMatrix {
    scale: u32,
    entries: Vec<Vec<LaurentPolynomial>>,
}

impl LoopMatrix {
    pub fn new(scale: u32, entries: Vec<Vec<LaurentPolynomial>>) -> Result<Self> {
        let n = scale as usize;
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Precondition(format!("loop matrix must be {n}×{n}")));
        }
        Ok(LoopMatrix { scale, entries })
    }

    pub fn identity(scale: u32) -> Self {
        let n = scale as usize;
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { LaurentPolynomial::one() } else { LaurentPolynomial::zero() })
                    .collect()
            })
            .collect();
        LoopMatrix { scale, entries }
    }

    pub fn diagonal(diag: Vec<LaurentPolynomial>) -> Self {
        let n = diag.len();
        let mut entries = vec![vec![LaurentPolynomial::zero(); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i][i] = d;
        }
        LoopMatrix { scale: n as u32, entries }
    }

    /// Constant matrix.
    pub fn constant(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len() as u32;
        let entries = rows
            .into_iter()
            .map(|row| row.into_iter().map(LaurentPolynomial::constant).collect())
            .collect();
        LoopMatrix::new(n, entries)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn entry(&self, j: usize, k: usize) -> &LaurentPolynomial {
        &self.entries[j][k]
    }

    pub fn entries(&self) -> &[Vec<LaurentPolynomial>] {
        &self.entries
    }

    pub fn matmul(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        if self.scale != other.scale {
            return Err(Error::ScaleMismatch(self.scale, other.scale));
        }
        let n = self.scale as usize;
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(LaurentPolynomial::zero(), |acc, k| {
                            acc.add(&self.entries[i][k].mul(&other.entries[k][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(LoopMatrix { scale: self.scale, entries })
    }

    pub fn at(&self, z: Complex64) -> DMatrix<Complex64> {
        let n = self.scale as usize;
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j].eval(z))
    }

    /// Unitarity of `A(z)` on the torus: exact via `A Ã = I` as Laurent
    /// identities when every entry is exact, sampled otherwise.
    pub fn unitarity_defect(&self, samples: usize) -> UnitarityDefect {
        let n = self.scale as usize;
        let mut exact = true;
        let mut coeff_dev: f64 = 0.0;
        for i in 0..n {
            for l in 0..n {
                let s = (0..n).fold(LaurentPolynomial::zero(), |acc, k| {
                    acc.add(&self.entries[i][k].mul(&self.entries[l][k].conj_reflect()))
                });
                let target = if i == l { LaurentPolynomial::one() } else { LaurentPolynomial::zero() };
                if !(s.is_exact() && s == target) {
                    exact = false;
                }
                coeff_dev = coeff_dev.max(s.max_distance(&target));
            }
        }
        if exact {
            return UnitarityDefect { value: 0.0, exact: true };
        }
        let id = DMatrix::<Complex64>::identity(n, n);
        let sampled = (0..samples.max(1))
            .map(|s| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s as f64 / samples.max(1) as f64);
                let a = self.at(z);
                operator_norm(&a * a.adjoint() - &id)
            })
            .fold(0.0, f64::max);
        UnitarityDefect { value: sampled.max(coeff_dev), exact: false }
    }

    pub fn max_distance(&self, other: &LoopMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| a.max_distance(b))
            .fold(0.0, f64::max)
    }
}

/// `m′_j(z) = Σ_k A_{j,k}(z^N) m_k(z)`.
pub fn loop_apply(a: &LoopMatrix, bank: &FilterBank) -> Result<FilterBank> {
    if a.scale != bank.scale {
        return Err(Error::ScaleMismatch(a.scale, bank.scale));
    }
    let n = bank.scale as i64;
    let mut filters = Vec::with_capacity(bank.filters.len());
    for row in &a.entries {
        let mut acc = LaurentPolynomial::zero();
        for (ajk, mk) in row.iter().zip(&bank.filters) {
            acc = acc.add(&ajk.dilate(n)?.mul(mk));
        }
        filters.push(acc);
    }
    Ok(FilterBank { scale: bank.scale, filters })
}

/// The unique loop `A` with `loop_apply(A, bank) = bank2`:
/// `A_{j,k} = ⟨m_k, m′_j⟩_N`.
pub fn connecting_matrix(bank: &FilterBank, bank2: &FilterBank) -> Result<LoopMatrix> {
    if bank.scale != bank2.scale {
        return Err(Error::ScaleMismatch(bank.scale, bank2.scale));
    }
    for (name, b) in [("first", bank), ("second", bank2)] {
        let d = unitarity_defect(b, DEFAULT_SAMPLES);
        if !d.passes(UNITARITY_TOL) {
            return Err(Error::Precondition(format!(
                "{name} bank is not unitary (defect {:e})",
                d.value
            )));
        }
    }
    let entries = bank2
        .filters
        .iter()
        .map(|mj| bank.filters.iter().map(|mk| pairing(mk, mj, bank.scale)).collect())
        .collect();
    Ok(LoopMatrix { scale: bank.scale, entries })
}
