//! Finitely supported Laurent polynomials `Σ_k a_k z^k` on the torus.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse exponent → coefficient map. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(i64, Scalar)>", from = "Vec<(i64, Scalar)>")]
pub struct LaurentPolynomial {
    coeffs: BTreeMap<i64, Scalar>,
}

impl From<LaurentPolynomial> for Vec<(i64, Scalar)> {
    fn from(p: LaurentPolynomial) -> Self {
        p.coeffs.into_iter().collect()
    }
}

impl From<Vec<(i64, Scalar)>> for LaurentPolynomial {
    fn from(terms: Vec<(i64, Scalar)>) -> Self {
        LaurentPolynomial::from_terms(terms)
    }
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: i64, c: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_term(k, &c);
        p
    }

    /// Sums repeated exponents.
    pub fn from_terms<I: IntoIterator<Item = (i64, Scalar)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
    }

    pub fn add_term(&mut self, k: i64, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&k) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.coeffs.remove(&k);
                }
            }
            None => {
                self.coeffs.insert(k, c.clone());
            }
        }
    }

    pub fn coeff(&self, k: i64) -> Scalar {
        self.coeffs.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(Scalar::is_exact)
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `max |k|` over the support; 0 for the zero polynomial.
    pub fn max_abs_exponent(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_terms(self.terms().map(|(k, a)| (k, a * c)))
    }

    /// Multiply by `z^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        Self::from_terms(self.terms().map(|(k, a)| (k + shift, a.clone())))
    }

    /// `z ↦ z^factor`.
    pub fn dilate(&self, factor: i64) -> Result<Self> {
        let mut out = Self::zero();
        for (k, a) in self.terms() {
            let e = k.checked_mul(factor).ok_or(Error::Overflow("polynomial dilation"))?;
            out.add_term(e, a);
        }
        Ok(out)
    }

    /// `z ↦ conj(p(z))` on the torus: conjugated coefficients at negated exponents.
    pub fn conj_reflect(&self) -> Self {
        Self::from_terms(self.terms().map(|(k, a)| (-k, a.conj())))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, a) in other.terms() {
            out.add_term(k, a);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, a) in other.terms() {
            out.add_term(k, &-a);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (j, a) in self.terms() {
            for (k, b) in other.terms() {
                out.add_term(j + k, &(a * b));
            }
        }
        out
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms().map(|(k, a)| a.to_complex() * z.powi(k as i32)).sum()
    }

    /// Evaluate at `e^{2πiθ}`, `θ` in turns.
    pub fn eval_turn(&self, theta: f64) -> Complex64 {
        self.terms()
            .map(|(k, a)| {
                let phase = 2.0 * std::f64::consts::PI * ((k as f64 * theta) % 1.0);
                a.to_complex() * Complex64::new(phase.cos(), phase.sin())
            })
            .sum()
    }

    pub fn coefficient_sum(&self) -> Scalar {
        self.terms().map(|(_, a)| a.clone()).sum()
    }

    /// `Σ_k |a_k|²`.
    pub fn coefficient_norm_sqr(&self) -> Scalar {
        self.terms().map(|(_, a)| a.abs_sqr()).sum()
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.sub(other).terms().map(|(_, a)| a.abs()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_distance(other) <= tol
    }

    /// Drop approximate coefficients with modulus below `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(_, a)| a.is_exact() || a.abs() > tol)
                .map(|(k, a)| (k, a.clone())),
        )
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, a)| match k {
                0 => format!("({a})"),
                1 => format!("({a})z"),
                _ => format!("({a})z^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
