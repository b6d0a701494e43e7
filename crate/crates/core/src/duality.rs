//! Spectral duality for a digit system `(N, S)`: dual digit sets `B`, the
//! candidate spectrum `Λ_N(B) = {Σ n_i N^i : n_i ∈ B}`, `B`-cycles, the dual
//! transfer operator `(R_B f)(ξ) = (1/p) Σ_b |m₀((ξ−b)/N)|² f((ξ−b)/N)`, and
//! Gram matrices of exponentials `e_n(x) = e^{2πinx}` in `L²(C, μ)`, where
//! `⟨e_n | e_{n'}⟩ = B(n' − n)` with `B` the transform of `μ`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ifs::{DigitSystem, HutchinsonTransform};
use crate::scalar::Scalar;

pub const DUAL_TOL: f64 = 1e-10;
pub const LAMBDA_CAP: usize = 1_000_000;
/// Largest number of words `Σ_{k ≤ K} p^k` the cycle search visits.
pub const WORD_CAP: u128 = 1_000_000;
pub const MAX_TRANSFER_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualVerdict {
    Dual,
    NotDual,
}

/// `(N, S)` with a candidate dual set `B` and `M_N(S, B)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralPair {
    pub system: DigitSystem,
    pub dual: Vec<i64>,
    /// Row `j`, column `k`: `p^{-1/2} e^{2πi a_j b_k / N}`.
    pub matrix: Vec<Vec<Scalar>>,
    /// `‖M M* − I‖₂`.
    pub defect: f64,
    /// The defect was computed in exact arithmetic.
    pub exact: bool,
    pub verdict: DualVerdict,
}

impl SpectralPair {
    pub fn is_dual(&self) -> bool {
        self.verdict == DualVerdict::Dual
    }

    pub fn scale(&self) -> u32 {
        self.system.scale()
    }

    pub fn p(&self) -> usize {
        self.dual.len()
    }

    /// Exact symbolic form, e.g. `1/√3 [[1, 1, 1], [1, ζ3, ζ3^2], [1, ζ3^2, ζ3]]`.
    pub fn render_matrix(&self) -> String {
        let n = self.scale() as i64;
        let rows: Vec<String> = self
            .system
            .digits()
            .iter()
            .map(|&a| {
                let cells: Vec<String> = self.dual.iter().map(|&b| render_root(a as i64 * b, n)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        let prefix = if self.p() == 1 { String::new() } else { format!("1/√{} ", self.p()) };
        format!("{prefix}[{}]", rows.join(", "))
    }

    fn require_dual(&self) -> Result<()> {
        if self.is_dual() {
            Ok(())
        } else {
            Err(Error::NotDual(self.defect))
        }
    }

    /// `|m₀(e^{2πix})|²` for the canonical low-pass filter of the system.
    pub fn lowpass_modulus_sqr(&self, x: f64) -> f64 {
        self.system.lowpass_symbol(x).norm_sqr()
    }
}

/// `e^{2πi k/n}` as `1`, `-1` or `ζd^e` in lowest terms.
fn render_root(k: i64, n: i64) -> String {
    let r = k.rem_euclid(n);
    if r == 0 {
        return "1".into();
    }
    let g = num_integer::gcd(r, n);
    let (e, d) = (r / g, n / g);
    match (e, d) {
        (_, 2) => "-1".into(),
        (1, _) => format!("ζ{d}"),
        _ => format!("ζ{d}^{e}"),
    }
}

pub fn dual_matrix(sys: &DigitSystem, dual: &[i64]) -> Result<SpectralPair> {
    let p = sys.p() as usize;
    if dual.len() != p {
        return Err(Error::Precondition(format!("#B = {} but #S = {p}", dual.len())));
    }
    if !dual.contains(&0) {
        return Err(Error::Precondition("0 must belong to B".into()));
    }
    if dual.iter().collect::<BTreeSet<_>>().len() != p {
        return Err(Error::Precondition("B has repeated elements".into()));
    }
    let n = sys.scale() as i64;
    let c = sys.inv_sqrt_p();
    let matrix: Vec<Vec<Scalar>> = sys
        .digits()
        .iter()
        .map(|&a| dual.iter().map(|&b| &c * &Scalar::root_of_unity(a as i64 * b, n)).collect())
        .collect();
    let exact = matrix.iter().flatten().all(Scalar::is_exact);
    let defect = if exact {
        let mut zero = true;
        for (i, ri) in matrix.iter().enumerate() {
            for (j, rj) in matrix.iter().enumerate() {
                let g: Scalar = ri.iter().zip(rj).map(|(x, y)| x * &y.conj()).sum();
                let target = if i == j { Scalar::one() } else { Scalar::zero() };
                zero &= g == target;
            }
        }
        if zero { 0.0 } else { float_defect(&matrix) }
    } else {
        float_defect(&matrix)
    };
    let exact = exact && defect == 0.0;
    let verdict = if defect <= DUAL_TOL { DualVerdict::Dual } else { DualVerdict::NotDual };
    Ok(SpectralPair { system: sys.clone(), dual: dual.to_vec(), matrix, defect, exact, verdict })
}

fn float_defect(matrix: &[Vec<Scalar>]) -> f64 {
    let p = matrix.len();
    let m = DMatrix::from_fn(p, p, |i, j| matrix[i][j].to_complex());
    let d = &m * m.adjoint() - DMatrix::<Complex64>::identity(p, p);
    d.singular_values().max()
}

/// A prefix of `Λ_N(B)`. For signed `B` the prefix comes from digit strings
/// of length `≤ depth`, ordered by `(|n|, n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaSet {
    pub prefix: Vec<i64>,
    /// Digit-string length used when `B` has negative elements.
    pub depth: Option<u32>,
}

/// All `Σ_{i<k} n_i N^i`, `n_i ∈ B`.
fn digit_sums(n: i64, dual: &[i64], k: u32) -> Result<Vec<i128>> {
    let mut sums = vec![0i128];
    let mut power: i128 = 1;
    for _ in 0..k {
        let mut next = Vec::with_capacity(sums.len() * dual.len());
        for &s in &sums {
            for &b in dual {
                let v = (b as i128).checked_mul(power).and_then(|t| s.checked_add(t)).ok_or(Error::Overflow("Λ digit sum"))?;
                next.push(v);
            }
        }
        sums = next;
        power = power.checked_mul(n as i128).ok_or(Error::Overflow("Λ digit sum"))?;
    }
    sums.sort_unstable();
    sums.dedup();
    Ok(sums)
}

pub fn lambda_set(pair: &SpectralPair, count: usize) -> Result<LambdaSet> {
    pair.require_dual()?;
    if count == 0 || count > LAMBDA_CAP {
        return Err(Error::CapExceeded { what: "Λ prefix length", requested: count as u128, cap: LAMBDA_CAP as u128 });
    }
    if pair.p() == 1 {
        if count > 1 {
            return Err(Error::Precondition("Λ = {0} has a single element".into()));
        }
        return Ok(LambdaSet { prefix: vec![0], depth: None });
    }
    let n = pair.scale() as i64;
    let to_i64 = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("Λ element"));
    if pair.dual.iter().all(|&b| b >= 0) {
        // anything using position ≥ k is at least b_min·N^k
        let b_min = *pair.dual.iter().filter(|&&b| b > 0).min().expect("p ≥ 2") as i128;
        let mut k = 1;
        loop {
            let bound = b_min.checked_mul((n as i128).checked_pow(k).ok_or(Error::Overflow("Λ bound"))?).ok_or(Error::Overflow("Λ bound"))?;
            let sums = digit_sums(n, &pair.dual, k)?;
            let below: Vec<i128> = sums.into_iter().filter(|&v| v < bound).collect();
            if below.len() >= count {
                let prefix = below[..count].iter().map(|&v| to_i64(v)).collect::<Result<_>>()?;
                return Ok(LambdaSet { prefix, depth: None });
            }
            k += 1;
        }
    }
    let p = pair.p();
    let mut depth = 0u32;
    while p.pow(depth) < count {
        depth += 1;
    }
    depth += 2;
    let mut sums = digit_sums(n, &pair.dual, depth)?;
    sums.sort_by_key(|&v| (v.abs(), v));
    let prefix = sums.into_iter().take(count).map(to_i64).collect::<Result<_>>()?;
    Ok(LambdaSet { prefix, depth: Some(depth) })
}

/// A rational point on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint(pub Ratio<i128>);

impl RationalPoint {
    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Points `ξ₁, …, ξ_k` with `ξ_{i+1} = Nξ_i + b_i`, `ξ_{k+1} = ξ₁`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BCycle {
    pub word: Vec<i64>,
    pub points: Vec<RationalPoint>,
    /// `|m₀(e^{2πiξ_i})|²` at each point.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BCycleReport {
    pub max_length: u32,
    pub cycles: Vec<BCycle>,
    pub trivial_only: bool,
}

/// `ξ₁ = −(Σ_i N^{k−i} b_i)/(N^k − 1)` and its orbit.
pub fn cycle_points(scale: u32, word: &[i64]) -> Result<Vec<RationalPoint>> {
    let n = scale as i128;
    let k = word.len() as u32;
    let nk = n.checked_pow(k).ok_or(Error::Overflow("N^k in a B-cycle"))?;
    let mut num: i128 = 0;
    for &b in word {
        num = num.checked_mul(n).and_then(|v| v.checked_add(b as i128)).ok_or(Error::Overflow("B-cycle numerator"))?;
    }
    let mut x = Ratio::new(-num, nk - 1);
    let mut points = Vec::with_capacity(word.len());
    for &b in word {
        points.push(RationalPoint(x));
        x = x * Ratio::from_integer(n) + Ratio::from_integer(b as i128);
    }
    debug_assert_eq!(x, points[0].0);
    Ok(points)
}

fn is_primitive(word: &[i64]) -> bool {
    let k = word.len();
    (1..k).filter(|d| k % d == 0).all(|d| (0..k).any(|i| word[i] != word[i % d]))
}

fn is_least_rotation(word: &[i64]) -> bool {
    let k = word.len();
    (1..k).all(|r| {
        let rotated: Vec<i64> = (0..k).map(|i| word[(i + r) % k]).collect();
        word <= rotated.as_slice()
    })
}

/// `|m₀|²` at a rational point, with the phase reduced exactly.
fn modulus_sqr_at_rational(sys: &DigitSystem, x: &Ratio<i128>) -> f64 {
    let d = *x.denom();
    let v: Complex64 = sys
        .digits()
        .iter()
        .map(|&a| {
            let r = (*x.numer() * a as i128).rem_euclid(d) as f64 / d as f64;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r)
        })
        .sum();
    v.norm_sqr() / sys.p() as f64
}

pub fn b_cycles(pair: &SpectralPair, max_length: u32, tol: f64) -> Result<BCycleReport> {
    if max_length == 0 {
        return Err(Error::Precondition("B-cycle length bound must be at least 1".into()));
    }
    let p = pair.p() as u128;
    let words: u128 = (1..=max_length).try_fold(0u128, |acc, k| p.checked_pow(k).and_then(|v| acc.checked_add(v))).unwrap_or(u128::MAX);
    if words > WORD_CAP {
        return Err(Error::CapExceeded { what: "B-cycle words", requested: words, cap: WORD_CAP });
    }
    let target = pair.p() as f64;
    let mut seen = BTreeSet::new();
    let mut cycles = Vec::new();
    for k in 1..=max_length as usize {
        let mut idx = vec![0usize; k];
        loop {
            let word: Vec<i64> = idx.iter().map(|&i| pair.dual[i]).collect();
            if is_primitive(&word) && is_least_rotation(&word) {
                let points = cycle_points(pair.scale(), &word)?;
                let weights: Vec<f64> = points.iter().map(|x| modulus_sqr_at_rational(&pair.system, &x.0)).collect();
                if weights.iter().all(|w| (w - target).abs() <= tol) {
                    let mut key = points.clone();
                    key.sort();
                    if seen.insert(key) {
                        cycles.push(BCycle { word, points, weights });
                    }
                }
            }
            // odometer over B^k
            let mut pos = k;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < pair.p() {
                    break;
                }
                idx[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    let trivial_only = cycles.iter().all(|c| c.points.len() == 1 && *c.points[0].0.numer() == 0);
    Ok(BCycleReport { max_length, cycles, trivial_only })
}

/// Partial sums of `|B(ξ − n)|²` over the first `count` elements of `Λ`.
pub fn onb_defect(pair: &SpectralPair, xi: f64, count: usize, depth: u32) -> Result<Vec<f64>> {
    let lambda = lambda_set(pair, count)?;
    let b = HutchinsonTransform::new(&pair.system, depth);
    let mut acc = 0.0;
    Ok(lambda
        .prefix
        .iter()
        .map(|&n| {
            acc += b.value(xi - n as f64).norm_sqr();
            acc
        })
        .collect())
}

/// `G_{ij} = ⟨e_{n_i} | e_{n_j}⟩ = B(n_j − n_i)`.
pub fn exponential_gram(sys: &DigitSystem, exponents: &[i64], depth: u32) -> DMatrix<Complex64> {
    let b = HutchinsonTransform::new(sys, depth);
    let m = exponents.len();
    let upper: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| b.value_at_integer(exponents[j] - exponents[i])).collect())
        .collect();
    let mut g = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for (i, row) in upper.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let j = i + off;
            g[(i, j)] = *v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

/// Indices of three exponentials that are pairwise orthogonal within `tol`.
pub fn find_orthogonal_triple(gram: &DMatrix<Complex64>, tol: f64) -> Option<(usize, usize, usize)> {
    let m = gram.nrows();
    let orth = |i: usize, j: usize| gram[(i, j)].norm() <= tol;
    for i in 0..m {
        for j in i + 1..m {
            if !orth(i, j) {
                continue;
            }
            for k in j + 1..m {
                if orth(i, k) && orth(j, k) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// `Rⁿ_B f(ξ)` over the full `pⁿ`-leaf branch tree.
pub fn dual_transfer_eval<F: Fn(f64) -> f64>(pair: &SpectralPair, f: F, xi: f64, n: u32) -> Result<f64> {
    if n > MAX_TRANSFER_DEPTH {
        return Err(Error::CapExceeded { what: "dual transfer depth", requested: n as u128, cap: MAX_TRANSFER_DEPTH as u128 });
    }
    let scale = pair.scale() as i128;
    let p = pair.p() as f64;
    // leaf state: offset c with point (ξ − c)/N^t, and accumulated weight
    let mut level = vec![(0i128, 1.0f64)];
    let mut power: i128 = 1;
    for _ in 0..n {
        let denom = (power * scale) as f64;
        let mut next = Vec::with_capacity(level.len() * pair.p());
        for &(c, w) in &level {
            for &b in &pair.dual {
                let c2 = c + b as i128 * power;
                let x = (xi - c2 as f64) / denom;
                next.push((c2, w * pair.lowpass_modulus_sqr(x) / p));
            }
        }
        level = next;
        power *= scale;
    }
    Ok(level.iter().map(|&(c, w)| w * f((xi - c as f64) / power as f64)).sum())
}

/// `Ω_K(ξ) = Σ_{λ ∈ Λ_K} |B(ξ − λ)|²`, `Λ_K` the digit sums with `K` positions.
/// `R_B Ω_{K−1} = Ω_K`, and `Ω_K` increases to the fixed function `Ω`.
pub fn omega(pair: &SpectralPair, xi: f64, k: u32, depth: u32) -> Result<f64> {
    Ok(digit_sums(pair.scale() as i64, &pair.dual, k)?
        .iter()
        .map(|&l| crate::ifs::hutchinson_transform(&pair.system, xi - l as f64, depth).norm_sqr())
        .sum())
}
