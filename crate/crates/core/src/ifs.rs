//! Affine digit systems `(N, S)` on the line, their attractors, cylinder
//! addressing and the Fourier transform of the Hutchinson measure.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;
use crate::scalar::Scalar;

/// Default cap on the number of points produced by [`attractor_sample`].
pub const DEFAULT_SAMPLE_CAP: usize = 1_000_000;

/// Default truncation depth of the infinite product for `B(k)`.
pub const DEFAULT_PRODUCT_DEPTH: u32 = 40;

/// The pair `(N, S)`: the maps `σ_a(x) = (x + a)/N`, `a ∈ S ⊆ {0, …, N−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitSystem {
    scale: u32,
    digits: Vec<u32>,
}

impl DigitSystem {
    /// Digits are sorted; duplicates, out-of-range digits and the empty set are
    /// rejected.
    pub fn new(scale: u32, digits: &[i64]) -> Result<Self> {
        if scale < 2 {
            return Err(Error::InvalidSystem(format!("scale must be at least 2, got {scale}")));
        }
        if digits.is_empty() {
            return Err(Error::InvalidSystem("digit set is empty".into()));
        }
        let mut sorted = digits.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSystem(format!("repeated digit in {digits:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&d| d < 0 || d >= scale as i64) {
            return Err(Error::InvalidSystem(format!(
                "digit {bad} outside 0..={}",
                scale - 1
            )));
        }
        Ok(DigitSystem {
            scale,
            digits: sorted.into_iter().map(|d| d as u32).collect(),
        })
    }

    /// The middle-third Cantor system `(3, {0, 2})`.
    pub fn cantor3() -> Self {
        DigitSystem { scale: 3, digits: vec![0, 2] }
    }

    /// The quarter Cantor system `(4, {0, 2})`.
    pub fn cantor4() -> Self {
        DigitSystem { scale: 4, digits: vec![0, 2] }
    }

    /// `(2, {0, 1})`; its attractor is the unit interval.
    pub fn haar() -> Self {
        DigitSystem { scale: 2, digits: vec![0, 1] }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `p = #S`.
    pub fn p(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn contains_digit(&self, d: i64) -> bool {
        d >= 0 && self.digits.contains(&(d as u32))
    }

    /// Digits of `{0, …, N−1}` missing from `S`, ascending.
    pub fn gap_digits(&self) -> Vec<u32> {
        (0..self.scale).filter(|d| !self.digits.contains(d)).collect()
    }

    pub fn max_digit(&self) -> u32 {
        *self.digits.last().expect("nonempty digit set")
    }

    /// `σ_a(x) = (x + a)/N`.
    pub fn apply_map(&self, digit: u32, x: &BigRational) -> BigRational {
        (x + BigRational::from_integer(BigInt::from(digit)))
            / BigRational::from_integer(BigInt::from(self.scale))
    }

    /// The normalized low-pass symbol `p^{-1/2} Σ_a e^{2πi a θ}`, `θ` in turns.
    pub fn lowpass_symbol(&self, theta: f64) -> Complex64 {
        let s: Complex64 = self
            .digits
            .iter()
            .map(|&a| {
                let t = 2.0 * PI * ((a as f64 * theta) % 1.0);
                Complex64::new(t.cos(), t.sin())
            })
            .sum();
        s / (self.p() as f64).sqrt()
    }

    /// `p^{-1/2}` as an exact scalar.
    pub fn inv_sqrt_p(&self) -> Scalar {
        Scalar::inv_sqrt(self.p() as u64)
    }

    pub fn lowpass(&self) -> LaurentPolynomial {
        let c = self.inv_sqrt_p();
        LaurentPolynomial::from_terms(self.digits.iter().map(|&a| (a as i64, c.clone())))
    }

    pub fn label(&self) -> String {
        let digits: Vec<String> = self.digits.iter().map(u32::to_string).collect();
        format!("({},{{{}}})", self.scale, digits.join(","))
    }
}

/// `log p / log N`.
pub fn hausdorff_dimension(sys: &DigitSystem) -> f64 {
    (sys.p() as f64).ln() / (sys.scale() as f64).ln()
}

/// A depth-`n` cylinder `σ_{w₁}∘…∘σ_{wₙ}(C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderAddress {
    system: DigitSystem,
    word: Vec<u32>,
}

impl CylinderAddress {
    pub fn new(system: &DigitSystem, word: &[i64]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Precondition("cylinder depth must be at least 1".into()));
        }
        for &d in word {
            if !system.contains_digit(d) {
                return Err(Error::InvalidDigit {
                    digit: d,
                    digits: system.digits().iter().map(|&a| a as i64).collect(),
                });
            }
        }
        Ok(CylinderAddress {
            system: system.clone(),
            word: word.iter().map(|&d| d as u32).collect(),
        })
    }

    pub fn depth(&self) -> u32 {
        self.word.len() as u32
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    pub fn system(&self) -> &DigitSystem {
        &self.system
    }

    /// Left endpoint `Σ_k w_k N^{-k}` of the cylinder.
    pub fn left_endpoint(&self) -> BigRational {
        let mut x = BigRational::zero();
        for &d in self.word.iter().rev() {
            x = self.system.apply_map(d, &x);
        }
        x
    }
}

/// `(n, l)` with `l = Σ_k w_k N^{n−k}`: the cylinder indicator is
/// `p^{-n/2} U^{-n} T^l φ`.
pub fn cylinder_translate_index(addr: &CylinderAddress) -> Result<(u32, i128)> {
    let n = addr.system.scale() as i128;
    let mut l: i128 = 0;
    for &d in &addr.word {
        l = l
            .checked_mul(n)
            .and_then(|x| x.checked_add(d as i128))
            .ok_or(Error::Overflow("cylinder translate index"))?;
    }
    Ok((addr.depth(), l))
}

/// Left endpoints of all depth-`n` cylinders, ascending.
pub fn attractor_sample(sys: &DigitSystem, depth: u32, cap: usize) -> Result<Vec<BigRational>> {
    let count = (sys.p() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::CapExceeded { what: "attractor sample size", requested: count, cap: cap as u128 });
    }
    // integer numerators over N^depth, built digit by digit
    let mut numerators: Vec<BigInt> = vec![BigInt::zero()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(numerators.len() * sys.digits().len());
        for x in &numerators {
            for &a in sys.digits() {
                next.push(x * sys.scale() + a);
            }
        }
        numerators = next;
    }
    numerators.sort();
    let denom = BigInt::from(sys.scale()).pow(depth);
    Ok(numerators
        .into_iter()
        .map(|x| BigRational::new(x, denom.clone()))
        .collect())
}

/// `B(k) = ∫ e^{2πi k x} dμ(x)` for the Hutchinson measure of a digit system,
/// evaluated as the truncated product `Π_{j=1..J} (1/p) Σ_a e^{2πi a k N^{-j}}`.
#[derive(Debug)]
pub struct HutchinsonTransform {
    system: DigitSystem,
    depth: u32,
    cache: RwLock<HashMap<u64, Complex64>>,
}

impl Clone for HutchinsonTransform {
    fn clone(&self) -> Self {
        HutchinsonTransform::new(&self.system, self.depth)
    }
}

impl HutchinsonTransform {
    pub fn new(system: &DigitSystem, depth: u32) -> Self {
        HutchinsonTransform {
            system: system.clone(),
            depth: depth.max(1),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &DigitSystem {
        &self.system
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Cached `B(k)`.
    pub fn value(&self, k: f64) -> Complex64 {
        let key = k.to_bits();
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return *v;
        }
        let v = hutchinson_transform(&self.system, k, self.depth);
        self.cache.write().expect("cache lock").insert(key, v);
        v
    }

    /// `B(k)` for integer frequencies, with residues taken exactly while
    /// `N^j` fits in 128 bits.
    pub fn value_at_integer(&self, k: i64) -> Complex64 {
        hutchinson_transform_integer(&self.system, k, self.depth)
    }

    /// Upper bound on `|B_∞(k) − B_J(k)|`-driving tail phase:
    /// `exp(2π|k| Σ_{j>J} ā N^{-j}) − 1`.
    pub fn tail_bound(&self, k: f64) -> f64 {
        tail_bound(&self.system, k, self.depth)
    }
}

fn factor(sys: &DigitSystem, frac: impl Fn(u32) -> f64) -> Complex64 {
    let s: Complex64 = sys
        .digits()
        .iter()
        .map(|&a| {
            let t = 2.0 * PI * frac(a);
            Complex64::new(t.cos(), t.sin())
        })
        .sum();
    s / sys.p() as f64
}

/// Truncated product for `B(k)` at depth `J ≥ 1`.
pub fn hutchinson_transform(sys: &DigitSystem, k: f64, depth: u32) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let n = sys.scale() as f64;
    let mut out = Complex64::new(1.0, 0.0);
    let mut scaled = k;
    for _ in 0..depth.max(1) {
        scaled /= n;
        out *= factor(sys, |a| (a as f64 * scaled) % 1.0);
        if out.norm_sqr() == 0.0 {
            break;
        }
    }
    out
}

fn hutchinson_transform_integer(sys: &DigitSystem, k: i64, depth: u32) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let n = sys.scale() as i128;
    let mut out = Complex64::new(1.0, 0.0);
    let mut power: Option<i128> = Some(1);
    for j in 1..=depth.max(1) {
        power = power.and_then(|p| p.checked_mul(n));
        let f = match power {
            Some(pw) => factor(sys, |a| {
                let r = (a as i128 * k as i128).rem_euclid(pw);
                r as f64 / pw as f64
            }),
            None => {
                let scaled = k as f64 / (sys.scale() as f64).powi(j as i32);
                factor(sys, |a| (a as f64 * scaled) % 1.0)
            }
        };
        out *= f;
        if out.norm_sqr() == 0.0 {
            break;
        }
    }
    out
}

pub fn tail_bound(sys: &DigitSystem, k: f64, depth: u32) -> f64 {
    let n = sys.scale() as f64;
    let tail = sys.max_digit() as f64 * n.powi(-(depth as i32)) / (n - 1.0);
    (2.0 * PI * k.abs() * tail).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn dimensions() {
        assert_eq!(hausdorff_dimension(&DigitSystem::cantor3()), 0.6309297535714574);
        assert_eq!(hausdorff_dimension(&DigitSystem::cantor4()), 0.5);
        let s = DigitSystem::new(6, &[0, 2, 4]).unwrap();
        assert!((hausdorff_dimension(&s) - 0.6131471927654584).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(DigitSystem::new(1, &[0]).is_err());
        assert!(DigitSystem::new(3, &[]).is_err());
        assert!(DigitSystem::new(3, &[0, 3]).is_err());
        assert!(DigitSystem::new(3, &[0, 0]).is_err());
        assert!(DigitSystem::new(3, &[-1, 2]).is_err());
        assert_eq!(DigitSystem::new(3, &[2, 0]).unwrap(), DigitSystem::cantor3());
    }

    #[test]
    fn translate_indices() {
        let c3 = DigitSystem::cantor3();
        let a = CylinderAddress::new(&c3, &[2]).unwrap();
        assert_eq!(cylinder_translate_index(&a).unwrap(), (1, 2));
        let a = CylinderAddress::new(&c3, &[2, 0]).unwrap();
        assert_eq!(cylinder_translate_index(&a).unwrap(), (2, 6));
        let a = CylinderAddress::new(&c3, &[0, 0, 0]).unwrap();
        assert_eq!(cylinder_translate_index(&a).unwrap(), (3, 0));
        assert!(matches!(
            CylinderAddress::new(&c3, &[1]),
            Err(Error::InvalidDigit { digit: 1, .. })
        ));
    }

    #[test]
    fn translate_index_matches_left_endpoint() {
        // l / N^n is the left endpoint of the cylinder
        let c4 = DigitSystem::cantor4();
        let a = CylinderAddress::new(&c4, &[2, 0, 2]).unwrap();
        let (n, l) = cylinder_translate_index(&a).unwrap();
        assert_eq!(a.left_endpoint(), rat(l as i64, 4i64.pow(n)));
    }

    #[test]
    fn attractor_samples() {
        let c3 = DigitSystem::cantor3();
        assert_eq!(attractor_sample(&c3, 1, 10).unwrap(), vec![rat(0, 1), rat(2, 3)]);
        assert_eq!(
            attractor_sample(&c3, 2, 10).unwrap(),
            vec![rat(0, 1), rat(2, 9), rat(2, 3), rat(8, 9)]
        );
        assert_eq!(
            attractor_sample(&DigitSystem::cantor4(), 2, 10).unwrap(),
            vec![rat(0, 1), rat(1, 8), rat(1, 2), rat(5, 8)]
        );
        assert!(matches!(
            attractor_sample(&c3, 21, DEFAULT_SAMPLE_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn attractor_is_self_similar() {
        let c3 = DigitSystem::cantor3();
        let coarse = attractor_sample(&c3, 3, 100).unwrap();
        let fine = attractor_sample(&c3, 4, 100).unwrap();
        for x in &coarse {
            for &a in c3.digits() {
                assert!(fine.binary_search(&c3.apply_map(a, x)).is_ok());
            }
        }
    }

    #[test]
    fn transform_special_values() {
        let c4 = DigitSystem::cantor4();
        assert_eq!(hutchinson_transform(&c4, 0.0, 40), Complex64::new(1.0, 0.0));
        for depth in 1..5 {
            assert!(hutchinson_transform(&c4, 1.0, depth).norm() < 1e-15);
        }
        let b = hutchinson_transform(&DigitSystem::cantor3(), 1.0, 40);
        assert!(b.norm() > 0.0 && b.norm() <= 1.0);
    }

    #[test]
    fn integer_path_agrees_with_real_path() {
        let c3 = DigitSystem::cantor3();
        let t = HutchinsonTransform::new(&c3, 40);
        for k in [-17i64, -3, 1, 2, 5, 20, 243, 1000] {
            assert!((t.value_at_integer(k) - t.value(k as f64)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn tail_bound_is_small_at_default_depth() {
        let c3 = DigitSystem::cantor3();
        assert!(tail_bound(&c3, 10.0, 40) < 1e-15);
        assert!(tail_bound(&c3, 10.0, 2) > 0.1);
    }
}
