//! The transfer (Ruelle) operator
//! `(Rf)(z) = (1/N) Σ_{w^N = z} W(w) f(w)`, `W = |m₀|²`,
//! realized exactly on Laurent polynomials through the coefficient rule
//! `(Rf)^(m) = Σ_b Ŵ(Nm − b) f̂(b)`.
//!
//! If `|b| ≤ D` and `Ŵ(Nm − b) ≠ 0` then `|Nm| ≤ D + deg W`, so `|m| ≤ D`
//! whenever `D ≥ deg W / (N − 1)`: the trigonometric polynomials of degree at
//! most `D = ⌈deg W / (N − 1)⌉` form an invariant block, and every orbit
//! `Rᵏf` enters it after finitely many steps.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;
use crate::scalar::Scalar;

/// Largest block dimension [`spectral_block`] will build.
pub const BLOCK_DIMENSION_CAP: usize = 2001;

/// Default cap on the support of `W⁽ⁿ⁾`.
pub const ITERATE_SUPPORT_CAP: usize = 1_000_000;

/// Modulus threshold for flagging peripheral eigenvalues.
pub const PERIPHERAL_TOL: f64 = 1e-9;

/// `Ŵ(k) = Σ_j conj(a_j) a_{j+k}`, i.e. the Laurent expansion of `|m₀|²`.
pub fn weight_from_filter(m0: &LaurentPolynomial) -> LaurentPolynomial {
    m0.conj_reflect().mul(m0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOperator {
    scale: u32,
    weight: LaurentPolynomial,
}

impl TransferOperator {
    pub fn new(scale: u32, weight: LaurentPolynomial) -> Result<Self> {
        if scale < 2 {
            return Err(Error::Precondition(format!("scale must be at least 2, got {scale}")));
        }
        Ok(TransferOperator { scale, weight })
    }

    pub fn from_filter(m0: &LaurentPolynomial, scale: u32) -> Result<Self> {
        Self::new(scale, weight_from_filter(m0))
    }

    /// `R₁`, the operator of the constant filter: averages over `w^N = z`.
    pub fn haar_average(scale: u32) -> Result<Self> {
        Self::new(scale, LaurentPolynomial::one())
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn weight(&self) -> &LaurentPolynomial {
        &self.weight
    }

    /// Half-width `D = ⌈deg W / (N − 1)⌉` of the invariant block.
    pub fn block_half_width(&self) -> i64 {
        let d = self.weight.max_abs_exponent();
        let n1 = self.scale as i64 - 1;
        (d + n1 - 1) / n1
    }

    /// `R1̂` as a polynomial: `Σ_m Ŵ(Nm) z^m`.
    pub fn image_of_one(&self) -> LaurentPolynomial {
        self.apply(&LaurentPolynomial::one())
    }

    /// `R1̂ = 1̂`, exactly in the exact tier or within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let r1 = self.image_of_one();
        if r1.is_exact() {
            r1 == LaurentPolynomial::one()
        } else {
            r1.approx_eq(&LaurentPolynomial::one(), tol)
        }
    }

    pub fn apply(&self, f: &LaurentPolynomial) -> LaurentPolynomial {
        apply_transfer(self, f)
    }
}

pub fn apply_transfer(op: &TransferOperator, f: &LaurentPolynomial) -> LaurentPolynomial {
    let n = op.scale as i64;
    let mut out = LaurentPolynomial::zero();
    for (b, fb) in f.terms() {
        for (k, w) in op.weight.terms() {
            // Ŵ(k) f̂(b) lands on z^{(k+b)/N}
            let e = k + b;
            if e.rem_euclid(n) == 0 {
                out.add_term(e / n, &(w * fb));
            }
        }
    }
    out
}

/// `W⁽ⁿ⁾(z) = W(z) W(z^N) ⋯ W(z^{N^{n−1}})`.
pub fn iterate_weight(op: &TransferOperator, n: u32, cap: usize) -> Result<LaurentPolynomial> {
    if n == 0 {
        return Err(Error::Precondition("iterate_weight needs n ≥ 1".into()));
    }
    let mut acc = op.weight.clone();
    let mut dilation: i64 = 1;
    for _ in 1..n {
        dilation = dilation
            .checked_mul(op.scale as i64)
            .ok_or(Error::Overflow("iterated weight exponent"))?;
        let projected = acc.len().saturating_mul(op.weight.len());
        if projected > cap {
            return Err(Error::CapExceeded {
                what: "iterated weight support",
                requested: projected as u128,
                cap: cap as u128,
            });
        }
        acc = acc.mul(&op.weight.dilate(dilation)?);
    }
    Ok(acc)
}

/// `R₁ⁿ`: keeps exponents divisible by `Nⁿ` and divides them by `Nⁿ`.
pub fn apply_haar_average(scale: u32, f: &LaurentPolynomial, n: u32) -> LaurentPolynomial {
    let Some(period) = (scale as i64).checked_pow(n) else {
        return LaurentPolynomial::constant(f.coeff(0));
    };
    LaurentPolynomial::from_terms(
        f.terms()
            .filter(|(k, _)| k.rem_euclid(period) == 0)
            .map(|(k, a)| (k / period, a.clone())),
    )
}

/// The matrix of `R` on the invariant block `[−D, D]`, with its spectrum.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub half_width: i64,
    /// Row `m`, column `b` (both offset by `D`): `Ŵ(Nm − b)`.
    pub matrix: Vec<Vec<Scalar>>,
    /// Eigenvalues sorted by decreasing modulus (ties by argument).
    pub eigenvalues: Vec<Complex64>,
    /// Number of eigenvalues within [`PERIPHERAL_TOL`] of 1.
    pub unit_multiplicity: usize,
    /// `dim ker(M − I)` computed exactly, when the block is exact.
    pub exact_fixed_dimension: Option<usize>,
    /// Eigenvalues other than 1 with modulus ≥ 1 − [`PERIPHERAL_TOL`].
    pub other_peripheral: Vec<Complex64>,
    /// Whether the coefficient vector of `1̂` is fixed.
    pub constant_fixed: bool,
}

impl SpectralBlock {
    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    /// Eigenvalue 1 is simple and nothing else sits on the unit circle.
    pub fn has_perron_frobenius_spectrum(&self) -> bool {
        let simple = match self.exact_fixed_dimension {
            Some(d) => d == 1 && self.unit_multiplicity == 1,
            None => self.unit_multiplicity == 1,
        };
        simple && self.other_peripheral.is_empty() && self.constant_fixed
    }
}

pub fn spectral_block(op: &TransferOperator) -> Result<SpectralBlock> {
    let d = op.block_half_width();
    let dim = (2 * d + 1) as usize;
    if dim > BLOCK_DIMENSION_CAP {
        return Err(Error::CapExceeded {
            what: "spectral block dimension",
            requested: dim as u128,
            cap: BLOCK_DIMENSION_CAP as u128,
        });
    }
    let n = op.scale as i64;
    let matrix: Vec<Vec<Scalar>> = (-d..=d)
        .map(|m| (-d..=d).map(|b| op.weight.coeff(n * m - b)).collect())
        .collect();

    let dense = DMatrix::from_fn(dim, dim, |i, j| matrix[i][j].to_complex());
    let mut eigenvalues: Vec<Complex64> = dense.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    eigenvalues.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.arg().partial_cmp(&b.arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let one = Complex64::new(1.0, 0.0);
    let unit_multiplicity = eigenvalues.iter().filter(|l| (*l - one).norm() < PERIPHERAL_TOL).count();
    let other_peripheral = eigenvalues
        .iter()
        .filter(|l| (*l - one).norm() >= PERIPHERAL_TOL && l.norm() >= 1.0 - PERIPHERAL_TOL)
        .copied()
        .collect();

    let exact = matrix.iter().flatten().all(Scalar::is_exact);
    let exact_fixed_dimension = exact.then(|| {
        let shifted: Vec<Vec<Scalar>> = matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| if i == j { x - &Scalar::one() } else { x.clone() })
                    .collect()
            })
            .collect();
        dim - exact_rank(shifted)
    });

    let c = d as usize;
    let constant_fixed = (0..dim).all(|i| {
        let target = if i == c { Scalar::one() } else { Scalar::zero() };
        matrix[i][c].approx_eq(&target, if exact { 0.0 } else { PERIPHERAL_TOL })
    });

    Ok(SpectralBlock {
        half_width: d,
        matrix,
        eigenvalues,
        unit_multiplicity,
        exact_fixed_dimension,
        other_peripheral,
        constant_fixed,
    })
}

/// Rank by Gaussian elimination over the scalars' field.
pub(crate) fn exact_rank(mut rows: Vec<Vec<Scalar>>) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inverse().expect("nonzero pivot");
        for r in 0..nrows {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] * &inv;
            for c in col..ncols {
                let delta = &factor * &rows[rank][c];
                rows[r][c] = &rows[r][c] - &delta;
            }
        }
        rank += 1;
    }
    rank
}
