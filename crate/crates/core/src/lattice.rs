//! Exact model of `L²(ℛ, ℋˢ)` through the orthonormal families
//! `{U⁻ⁿTᵏφ : k ∈ ℤ}`, `φ = χ_C`.
//!
//! A vector is a finite combination `Σ_k c_k U⁻ⁿTᵏφ` at one resolution `n`.
//! The resolution is a label: no function is ever evaluated on the line.
//! Everything follows from three identities:
//!
//! * `U Tᵏ U⁻¹ = T^{Nk}`, hence `Tᵏ U⁻ⁿ = U⁻ⁿ T^{Nⁿk}`;
//! * `φ = p^{-1/2} Σ_{a∈S} U⁻¹Tᵃφ` (the scaling equation), hence
//!   `U⁻ⁿTᵏφ = p^{-1/2} Σ_a U^{-(n+1)} T^{Nk+a} φ`;
//! * translates of `φ` are orthonormal.
//!
//! Inner products are conjugate-linear in the first argument.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::filterbank::{build_bank, canonical_lowpass, pairing};
use crate::ifs::{cylinder_translate_index, CylinderAddress, DigitSystem};
use crate::laurent::LaurentPolynomial;
use crate::scalar::Scalar;
use crate::transfer::TransferOperator;

/// Largest support a single refinement may produce.
pub const REFINE_SUPPORT_CAP: usize = 10_000_000;
/// Largest number of vectors in a Gram section.
pub const GRAM_LABEL_CAP: usize = 10_000;
pub const MAX_CASCADE_STEPS: u32 = 12;
pub const MAX_REPRESENTATION_DEPTH: u32 = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeVector {
    system: DigitSystem,
    resolution: i32,
    coeffs: BTreeMap<i128, Scalar>,
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            system: &'a DigitSystem,
            resolution: i32,
            entries: Vec<(String, &'a Scalar)>,
        }
        // indices as strings: they may exceed the 64-bit JSON integer range
        Repr {
            system: &self.system,
            resolution: self.resolution,
            entries: self.coeffs.iter().map(|(k, c)| (k.to_string(), c)).collect(),
        }
        .serialize(s)
    }
}

impl LatticeVector {
    pub fn zero(system: &DigitSystem, resolution: i32) -> Self {
        LatticeVector { system: system.clone(), resolution, coeffs: BTreeMap::new() }
    }

    pub fn from_entries<I: IntoIterator<Item = (i128, Scalar)>>(system: &DigitSystem, resolution: i32, entries: I) -> Self {
        let mut v = Self::zero(system, resolution);
        for (k, c) in entries {
            v.add_entry(k, &c);
        }
        v
    }

    fn add_entry(&mut self, k: i128, c: &Scalar) {
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

    pub fn system(&self) -> &DigitSystem {
        &self.system
    }

    pub fn resolution(&self) -> i32 {
        self.resolution
    }

    pub fn coeff(&self, k: i128) -> Scalar {
        self.coeffs.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (i128, &Scalar)> + '_ {
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

    /// `‖v‖² = Σ|c_k|²` by orthonormality.
    pub fn norm_sqr(&self) -> Scalar {
        self.coeffs.values().map(Scalar::abs_sqr).sum()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_entries(&self.system, self.resolution, self.entries().map(|(k, a)| (k, a * c)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = common_resolution(self, other)?;
        let mut out = a;
        for (k, c) in b.entries() {
            out.add_entry(k, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    /// Equality as elements of the Hilbert space.
    pub fn same_vector(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }
}

fn check_system(v: &LatticeVector, w: &LatticeVector) -> Result<()> {
    if v.system == w.system {
        Ok(())
    } else {
        Err(Error::SystemMismatch)
    }
}

fn common_resolution(v: &LatticeVector, w: &LatticeVector) -> Result<(LatticeVector, LatticeVector)> {
    check_system(v, w)?;
    let r = v.resolution.max(w.resolution);
    Ok((refine_to(v, r)?, refine_to(w, r)?))
}

/// `U⁻ⁿTᵏφ`.
pub fn basis_delta(sys: &DigitSystem, n: i32, k: i128) -> LatticeVector {
    LatticeVector::from_entries(sys, n, [(k, Scalar::one())])
}

/// `φ = χ_C`.
pub fn scaling_function(sys: &DigitSystem) -> LatticeVector {
    basis_delta(sys, 0, 0)
}

pub fn refine_to(v: &LatticeVector, m: i32) -> Result<LatticeVector> {
    if m < v.resolution {
        return Err(Error::CoarseningNotSupported { from: v.resolution, to: m });
    }
    let steps = (m - v.resolution) as u32;
    let p = v.system.p() as usize;
    let projected = (p as u128).checked_pow(steps).and_then(|g| g.checked_mul(v.len() as u128)).unwrap_or(u128::MAX);
    if projected > REFINE_SUPPORT_CAP as u128 {
        return Err(Error::CapExceeded { what: "refined support", requested: projected, cap: REFINE_SUPPORT_CAP as u128 });
    }
    let n = v.system.scale() as i128;
    let c = v.system.inv_sqrt_p();
    let mut cur = v.clone();
    for _ in 0..steps {
        let mut next = LatticeVector::zero(&v.system, cur.resolution + 1);
        for (k, a) in cur.entries() {
            let ac = a * &c;
            let base = k.checked_mul(n).ok_or(Error::Overflow("refined index"))?;
            for &d in v.system.digits() {
                next.add_entry(base.checked_add(d as i128).ok_or(Error::Overflow("refined index"))?, &ac);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// `⟨v | w⟩ = Σ conj(c_k) c′_k` at a common resolution.
pub fn inner(v: &LatticeVector, w: &LatticeVector) -> Result<Scalar> {
    let (a, b) = common_resolution(v, w)?;
    Ok(sparse_dot(&a.coeffs, &b.coeffs))
}

fn sparse_dot(a: &BTreeMap<i128, Scalar>, b: &BTreeMap<i128, Scalar>) -> Scalar {
    let (small, large, flip) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| if flip { &y.conj() * x } else { &x.conj() * y }))
        .sum()
}

/// `Tᵏ v`.
pub fn apply_shift(v: &LatticeVector, k: i128) -> Result<LatticeVector> {
    if k == 0 {
        return Ok(v.clone());
    }
    let n = v.system.scale() as i128;
    let (base, offset) = if v.resolution >= 0 {
        let pw = n.checked_pow(v.resolution as u32).ok_or(Error::Overflow("shift at resolution"))?;
        (v.clone(), k.checked_mul(pw).ok_or(Error::Overflow("shifted index"))?)
    } else {
        // Tᵏ Uʲ = Uʲ T^{k/Nʲ} when Nʲ | k; otherwise move to resolution 0
        let pw = n.checked_pow(v.resolution.unsigned_abs()).ok_or(Error::Overflow("shift at resolution"))?;
        if k % pw == 0 {
            (v.clone(), k / pw)
        } else {
            (refine_to(v, 0)?, k)
        }
    };
    let mut out = LatticeVector::zero(&v.system, base.resolution);
    for (j, c) in base.entries() {
        out.add_entry(j.checked_add(offset).ok_or(Error::Overflow("shifted index"))?, c);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dilation {
    /// `U`: resolution `n ↦ n − 1`.
    U,
    /// `U⁻¹`: resolution `n ↦ n + 1`.
    UInverse,
}

pub fn apply_dilation(v: &LatticeVector, direction: Dilation) -> LatticeVector {
    let mut out = v.clone();
    out.resolution += match direction {
        Dilation::U => -1,
        Dilation::UInverse => 1,
    };
    out
}

/// `U⁻ʲ v` for any integer `j`.
pub fn dilate_power(v: &LatticeVector, j: i32) -> LatticeVector {
    let mut out = v.clone();
    out.resolution += j;
    out
}

/// `m(T) v = Σ_j a_j Tʲ v`.
pub fn apply_filter(v: &LatticeVector, m: &LaurentPolynomial) -> Result<LatticeVector> {
    let mut out = LatticeVector::zero(&v.system, v.resolution.max(0));
    for (j, a) in m.terms() {
        let shifted = apply_shift(v, j as i128)?;
        out = out.add(&shifted.scale(a))?;
    }
    Ok(out)
}

/// `M v = U⁻¹ m(T) v`.
pub fn cascade_step(v: &LatticeVector, m: &LaurentPolynomial) -> Result<LatticeVector> {
    Ok(apply_dilation(&apply_filter(v, m)?, Dilation::UInverse))
}

/// `p(v, w)(z) = Σ_k zᵏ ⟨Tᵏv | w⟩`.
pub fn correlation(v: &LatticeVector, w: &LatticeVector) -> Result<LaurentPolynomial> {
    check_system(v, w)?;
    let r = v.resolution.max(w.resolution).max(0);
    let a = refine_to(v, r)?;
    let b = refine_to(w, r)?;
    let period = (v.system.scale() as i128).checked_pow(r as u32).ok_or(Error::Overflow("correlation period"))?;
    // ⟨Tᵏv | w⟩ pairs index i of v with i + k·Nʳ of w
    let mut by_residue: BTreeMap<i128, Vec<(i128, &Scalar)>> = BTreeMap::new();
    for (j, c) in b.entries() {
        by_residue.entry(j.rem_euclid(period)).or_default().push((j, c));
    }
    let mut out = LaurentPolynomial::zero();
    for (i, x) in a.entries() {
        let Some(bucket) = by_residue.get(&i.rem_euclid(period)) else { continue };
        let xc = x.conj();
        for &(j, y) in bucket {
            let k = i64::try_from((j - i) / period).map_err(|_| Error::Overflow("correlation exponent"))?;
            out.add_term(k, &(&xc * y));
        }
    }
    Ok(out)
}

/// `ψ_i = U⁻¹ m_i(T) φ` for the high-pass filters of [`build_bank`].
pub fn wavelet_generators(sys: &DigitSystem) -> Vec<LatticeVector> {
    let phi = scaling_function(sys);
    build_bank(sys).filters()[1..]
        .iter()
        .map(|m| cascade_step(&phi, m).expect("generator indices are small"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GramLabel {
    /// 1-based generator index.
    pub generator: usize,
    pub scale: i32,
    pub translate: i64,
}

/// Gram matrix of `{U⁻ʲTᵏψ_i}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramSection {
    pub labels: Vec<GramLabel>,
    pub matrix: Vec<Vec<Scalar>>,
}

impl GramSection {
    pub fn is_identity(&self) -> bool {
        self.matrix.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| *x == if i == j { Scalar::one() } else { Scalar::zero() })
        })
    }

    pub fn max_identity_deviation(&self) -> f64 {
        self.matrix
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, x)| (x.to_complex() - if i == j { 1.0 } else { 0.0 }).norm()))
            .fold(0.0, f64::max)
    }
}

pub fn gram_section(
    sys: &DigitSystem,
    generators: &[LatticeVector],
    scales: RangeInclusive<i32>,
    translates: RangeInclusive<i64>,
) -> Result<GramSection> {
    let count = generators.len() as u128 * scales.clone().count() as u128 * translates.clone().count() as u128;
    if count > GRAM_LABEL_CAP as u128 {
        return Err(Error::CapExceeded { what: "Gram section size", requested: count, cap: GRAM_LABEL_CAP as u128 });
    }
    let mut labels = Vec::with_capacity(count as usize);
    let mut vectors = Vec::with_capacity(count as usize);
    for (i, g) in generators.iter().enumerate() {
        if g.system != *sys {
            return Err(Error::SystemMismatch);
        }
        for j in scales.clone() {
            for k in translates.clone() {
                labels.push(GramLabel { generator: i + 1, scale: j, translate: k });
                vectors.push(dilate_power(&apply_shift(g, k as i128)?, j));
            }
        }
    }
    let top = vectors.iter().map(LatticeVector::resolution).max().unwrap_or(0);
    let refined: Vec<LatticeVector> = vectors.iter().map(|v| refine_to(v, top)).collect::<Result<_>>()?;
    let m = refined.len();
    let upper: Vec<Vec<Scalar>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| sparse_dot(&refined[i].coeffs, &refined[j].coeffs)).collect())
        .collect();
    let mut matrix = vec![vec![Scalar::zero(); m]; m];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, x) in row.into_iter().enumerate() {
            let j = i + off;
            matrix[j][i] = x.conj();
            matrix[i][j] = x;
        }
    }
    Ok(GramSection { labels, matrix })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeRow {
    pub n: u32,
    /// `‖Mⁿφ − Mⁿ⁺¹φ‖²`.
    pub norm_sq: Scalar,
    /// `⟨Mⁿφ | Mⁿ⁺¹φ⟩`.
    pub inner: Scalar,
}

/// Rows `n = 0..steps−1` of the cascade `φ, Mφ, M²φ, …`, `M = U⁻¹m(T)`.
pub fn cascade_experiment(sys: &DigitSystem, m: &LaurentPolynomial, steps: u32) -> Result<Vec<CascadeRow>> {
    if steps > MAX_CASCADE_STEPS {
        return Err(Error::CapExceeded { what: "cascade steps", requested: steps as u128, cap: MAX_CASCADE_STEPS as u128 });
    }
    let mut rows = Vec::with_capacity(steps as usize);
    let mut cur = scaling_function(sys);
    for n in 0..steps {
        let next = cascade_step(&cur, m)?;
        rows.push(CascadeRow { n, norm_sq: next.sub(&cur)?.norm_sqr(), inner: inner(&cur, &next)? });
        cur = next;
    }
    Ok(rows)
}

/// The same rows through the transfer operator of `m`:
/// `⟨Mⁿφ | Mⁿ⁺¹φ⟩ = (Rⁿ A₀₀)^(0)` with `A₀₀ = ⟨m₀, m⟩_N`, and `‖Mⁿφ‖² = (Rⁿ1̂)^(0)`.
pub fn cascade_transfer_prediction(sys: &DigitSystem, m: &LaurentPolynomial, steps: u32) -> Result<Vec<CascadeRow>> {
    let op = TransferOperator::from_filter(m, sys.scale())?;
    let mut a = pairing(&canonical_lowpass(sys), m, sys.scale());
    let mut one = LaurentPolynomial::one();
    let mut norm = one.coeff(0);
    let mut rows = Vec::with_capacity(steps as usize);
    for n in 0..steps {
        let ip = a.coeff(0);
        one = op.apply(&one);
        let next_norm = one.coeff(0);
        let cross = &ip + &ip.conj();
        rows.push(CascadeRow { n, norm_sq: &(&norm + &next_norm) - &cross, inner: ip });
        a = op.apply(&a);
        norm = next_norm;
    }
    Ok(rows)
}

/// `m^{(n)}(z) = m(z) m(z^N) ⋯ m(z^{N^{n−1}})`.
pub fn filter_product(m: &LaurentPolynomial, scale: u32, n: u32) -> Result<LaurentPolynomial> {
    let mut acc = LaurentPolynomial::one();
    let mut dilation: i64 = 1;
    for _ in 0..n {
        acc = acc.mul(&m.dilate(dilation)?);
        dilation = dilation.checked_mul(scale as i64).ok_or(Error::Overflow("filter product exponent"))?;
    }
    Ok(acc)
}

/// `⟨Uⁿφ | Tᵐ Uⁿφ⟩` with `Uⁿφ = m₀^{(n)}(T)φ`.
pub fn representation_limit(sys: &DigitSystem, m0: &LaurentPolynomial, n: u32, m: i64) -> Result<Scalar> {
    if n > MAX_REPRESENTATION_DEPTH {
        return Err(Error::CapExceeded { what: "representation depth", requested: n as u128, cap: MAX_REPRESENTATION_DEPTH as u128 });
    }
    let v = apply_filter(&scaling_function(sys), &filter_product(m0, sys.scale(), n)?)?;
    inner(&v, &apply_shift(&v, m as i128)?)
}

/// `χ` of the cylinder of `addr`: `p^{-n/2} U⁻ⁿT^lφ`.
pub fn cylinder_vector(addr: &CylinderAddress) -> Result<LatticeVector> {
    let (n, l) = cylinder_translate_index(addr)?;
    let sys = addr.system();
    let mut c = Scalar::one();
    for _ in 0..n {
        c = &c * &sys.inv_sqrt_p();
    }
    Ok(LatticeVector::from_entries(sys, n as i32, [(l, c)]))
}
