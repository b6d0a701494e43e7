//! Invariant measures of the transfer operator, handled through their
//! Fourier moments `ν̂(n) = ∫ zⁿ dν`.
//!
//! `ν̂(n) = lim_k (Rᵏ zⁿ)^(0)`. Once `Rᵏzⁿ` lies in the invariant block of
//! dimension `d = 2D + 1`, the constant terms satisfy the linear recurrence of
//! the block's characteristic polynomial `χ`, and `χ(1) = 0` because `1̂` is
//! fixed. So `d` identical consecutive constant terms force every later one to
//! agree: that is the exact stabilization test.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;
use crate::scalar::Scalar;
use crate::transfer::{apply_haar_average, spectral_block, weight_from_filter, TransferOperator};

pub const DEFAULT_MAX_ITER: u32 = 200;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_CYCLE_LENGTH: u32 = 12;
pub const CYCLE_TOL: f64 = 1e-9;
/// Largest `N^ℓ − 1` the cycle search enumerates.
pub const CYCLE_PERIOD_CAP: u64 = 1_000_000_000;
/// Moment range attached to a full-support classification.
pub const CLASSIFY_MOMENT_RANGE: i64 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentStatus {
    Stabilized { iterate: u32 },
    Converged { tol: f64, iterate: u32 },
    /// Value is the Cesàro mean of all iterates.
    Unsettled { iterations: u32 },
}

impl MomentStatus {
    pub fn label(&self) -> &'static str {
        match self {
            MomentStatus::Stabilized { .. } => "stabilized",
            MomentStatus::Converged { .. } => "converged",
            MomentStatus::Unsettled { .. } => "unsettled",
        }
    }

    pub fn is_settled(&self) -> bool {
        !matches!(self, MomentStatus::Unsettled { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEntry {
    pub value: Scalar,
    pub status: MomentStatus,
}

/// `ν̂(n)` by iterating `R` on `zⁿ` and watching the constant term.
pub fn moment(op: &TransferOperator, n: i64, max_iter: u32, tol: f64) -> Result<MomentEntry> {
    if max_iter < 2 {
        return Err(Error::Precondition(format!("max_iter must be at least 2, got {max_iter}")));
    }
    let d = op.block_half_width();
    let dim = (2 * d + 1) as u32;
    let mut f = LaurentPolynomial::monomial(n, Scalar::one());
    let mut prev = f.coeff(0);
    let mut prev_in_block = f.max_abs_exponent() <= d;
    let mut run = u32::from(prev_in_block);
    let mut small_steps = 0;
    let mut total = prev.clone();
    for k in 1..=max_iter {
        f = op.apply(&f);
        if f.is_zero() {
            return Ok(MomentEntry { value: Scalar::zero(), status: MomentStatus::Stabilized { iterate: k } });
        }
        let c = f.coeff(0);
        total += &c;
        let in_block = f.max_abs_exponent() <= d;
        if in_block {
            let same = prev_in_block && c.is_exact() && c == prev;
            run = if same { run + 1 } else { 1 };
            if c.is_exact() && run >= dim {
                return Ok(MomentEntry { value: c, status: MomentStatus::Stabilized { iterate: k } });
            }
            let delta = (c.to_complex() - prev.to_complex()).norm();
            small_steps = if prev_in_block && delta < tol { small_steps + 1 } else { 0 };
            if small_steps >= 2 {
                return Ok(MomentEntry { value: c, status: MomentStatus::Converged { tol, iterate: k } });
            }
        }
        prev = c;
        prev_in_block = in_block;
    }
    let mean = total * Scalar::from_ratio(1, max_iter as i64 + 1);
    Ok(MomentEntry { value: mean, status: MomentStatus::Unsettled { iterations: max_iter } })
}

/// Moments `ν̂(n)` for `|n| ≤ range`, with `ν̂(−n) = conj(ν̂(n))` imposed.
#[derive(Clone, Debug, Serialize)]
pub struct MomentTable {
    scale: u32,
    weight: LaurentPolynomial,
    #[serde(serialize_with = "serialize_entries")]
    entries: BTreeMap<i64, MomentEntry>,
}

fn serialize_entries<S: Serializer>(entries: &BTreeMap<i64, MomentEntry>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(entries.iter().map(|(n, e)| (n, &e.value, &e.status)))
}

impl MomentTable {
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn weight(&self) -> &LaurentPolynomial {
        &self.weight
    }

    pub fn range(&self) -> i64 {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, &MomentEntry)> + '_ {
        self.entries.iter().map(|(n, e)| (*n, e))
    }

    pub fn entry(&self, n: i64) -> Result<&MomentEntry> {
        self.entries.get(&n).ok_or(Error::MissingMoment(n))
    }

    pub fn get(&self, n: i64) -> Result<&Scalar> {
        self.entry(n).map(|e| &e.value)
    }

    pub fn all_settled(&self) -> bool {
        self.entries.values().all(|e| e.status.is_settled())
    }

    /// `ν(f) = Σ_k f̂(k) ν̂(k)`.
    pub fn integrate(&self, f: &LaurentPolynomial) -> Result<Scalar> {
        f.terms().map(|(k, a)| Ok(a * self.get(k)?)).sum()
    }
}

pub fn moment_table(op: &TransferOperator, range: i64) -> Result<MomentTable> {
    moment_table_with(op, range, DEFAULT_MAX_ITER, DEFAULT_TOL)
}

pub fn moment_table_with(op: &TransferOperator, range: i64, max_iter: u32, tol: f64) -> Result<MomentTable> {
    if range < 0 {
        return Err(Error::Precondition(format!("moment range must be nonnegative, got {range}")));
    }
    let half: Vec<(i64, MomentEntry)> = (0..=range)
        .into_par_iter()
        .map(|n| moment(op, n, max_iter, tol).map(|e| (n, e)))
        .collect::<Result<_>>()?;
    let mut entries = BTreeMap::new();
    for (n, e) in half {
        if n != 0 {
            entries.insert(-n, MomentEntry { value: e.value.conj(), status: e.status });
        }
        entries.insert(n, e);
    }
    Ok(MomentTable { scale: op.scale(), weight: op.weight().clone(), entries })
}

/// `max_{|m| ≤ max_m} |ν(R zᵐ) − ν(zᵐ)|` for a measure given by its moments.
pub fn invariance_defect<F>(op: &TransferOperator, moments: F, max_m: i64) -> Result<f64>
where
    F: Fn(i64) -> Result<Scalar>,
{
    let mut worst: f64 = 0.0;
    for m in -max_m..=max_m {
        let rf = op.apply(&LaurentPolynomial::monomial(m, Scalar::one()));
        let lhs: Scalar = rf.terms().map(|(k, a)| Ok(a * &moments(k)?)).sum::<Result<Scalar>>()?;
        worst = worst.max((lhs.to_complex() - moments(m)?.to_complex()).norm());
    }
    Ok(worst)
}

/// A rational angle `num/den` in turns, `0 ≤ num < den`, reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle {
    pub num: u64,
    pub den: u64,
}

impl Angle {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den);
        Angle { num: num / g, den: den / g }
    }

    /// `θ ↦ Nθ mod 1`.
    pub fn times(&self, n: u32) -> Self {
        Angle::new((self.num as u128 * n as u128 % self.den as u128) as u64, self.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `e^{2πi k θ}`, exact when it is ±1.
    pub fn character(&self, k: i64) -> Scalar {
        let r = (k as i128 * self.num as i128).rem_euclid(self.den as i128) as i64;
        Scalar::root_of_unity(r, self.den as i64)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a.max(1) } else { gcd(b, a % b) }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclePoint {
    pub angle: Angle,
    /// `|m₀(e^{2πiθ})|²`.
    pub weight: f64,
}

/// An orbit of `θ ↦ Nθ` of exact period `length`, listed sorted by angle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    pub length: u32,
    pub points: Vec<CyclePoint>,
}

impl Cycle {
    pub fn angles(&self) -> Vec<Angle> {
        self.points.iter().map(|p| p.angle).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleVerdict {
    NoCycles,
    CyclesFound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleReport {
    pub max_length: u32,
    pub cycles: Vec<Cycle>,
    pub verdict: CycleVerdict,
}

/// `|m₀|²` at `j/den` with the phases reduced exactly.
fn modulus_sqr_at(m0: &LaurentPolynomial, j: u64, den: u64) -> f64 {
    let v: Complex64 = m0
        .terms()
        .map(|(k, a)| {
            let r = (k as i128 * j as i128).rem_euclid(den as i128) as f64;
            let t = 2.0 * std::f64::consts::PI * r / den as f64;
            a.to_complex() * Complex64::new(t.cos(), t.sin())
        })
        .sum();
    v.norm_sqr()
}

/// All `(m₀, N)`-cycles of length `≤ max_length`.
pub fn find_cycles(m0: &LaurentPolynomial, scale: u32, max_length: u32, tol: f64) -> Result<CycleReport> {
    if max_length == 0 {
        return Err(Error::Precondition("cycle length bound must be at least 1".into()));
    }
    if scale < 2 {
        return Err(Error::Precondition(format!("scale must be at least 2, got {scale}")));
    }
    let top = (scale as u64)
        .checked_pow(max_length)
        .ok_or(Error::Overflow("N^L in the cycle search"))?
        - 1;
    if top > CYCLE_PERIOD_CAP {
        return Err(Error::CapExceeded { what: "cycle period N^L - 1", requested: top as u128, cap: CYCLE_PERIOD_CAP as u128 });
    }
    let n = scale as f64;
    let sup: f64 = m0.terms().map(|(_, a)| a.abs()).sum();
    let mut cycles = Vec::new();
    // |m₀|² ≤ (Σ|a_k|)² everywhere
    if sup * sup >= n - tol {
        for length in 1..=max_length {
            let period = (scale as u64).pow(length) - 1;
            let period = period.max(1);
            for j in 0..period {
                let w = modulus_sqr_at(m0, j, period);
                if (w - n).abs() > tol {
                    continue;
                }
                let mut orbit = vec![j];
                let mut x = (j as u128 * scale as u128 % period as u128) as u64;
                while x != j {
                    orbit.push(x);
                    x = (x as u128 * scale as u128 % period as u128) as u64;
                }
                // keep exact period, count each orbit once from its least point
                if orbit.len() as u32 != length || orbit.iter().any(|&y| y < j) {
                    continue;
                }
                let points: Option<Vec<CyclePoint>> = orbit
                    .iter()
                    .map(|&y| {
                        let w = modulus_sqr_at(m0, y, period);
                        ((w - n).abs() <= tol).then(|| CyclePoint { angle: Angle::new(y, period), weight: w })
                    })
                    .collect();
                if let Some(mut points) = points {
                    points.sort_by_key(|p| p.angle.to_f64().to_bits());
                    cycles.push(Cycle { length, points });
                }
            }
        }
    }
    let verdict = if cycles.is_empty() { CycleVerdict::NoCycles } else { CycleVerdict::CyclesFound };
    Ok(CycleReport { max_length, cycles, verdict })
}

/// Uniform probability measure on one cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<(Angle, Scalar)>,
}

impl AtomicMeasure {
    pub fn uniform_on(cycle: &Cycle) -> Self {
        let w = Scalar::from_ratio(1, cycle.length as i64);
        AtomicMeasure { atoms: cycle.points.iter().map(|p| (p.angle, w.clone())).collect() }
    }

    /// `Σ w_θ e^{2πinθ}`.
    pub fn moment(&self, n: i64) -> Scalar {
        self.atoms.iter().map(|(a, w)| w * &a.character(n)).sum()
    }

    pub fn integrate(&self, f: &LaurentPolynomial) -> Scalar {
        f.terms().map(|(k, a)| a * &self.moment(k)).sum()
    }

    pub fn mass_at(&self, angle: Angle) -> Scalar {
        self.atoms.iter().filter(|(a, _)| *a == angle).map(|(_, w)| w.clone()).sum()
    }

    /// `ν({z^N}) ≥ ν({z})` at every atom.
    pub fn transport_is_monotone(&self, scale: u32) -> bool {
        self.atoms
            .iter()
            .all(|(a, w)| self.mass_at(a.times(scale)).real_cmp(w) != std::cmp::Ordering::Less)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportClassification {
    FullSupport {
        moments: MomentTable,
        /// Eigenvalue 1 of the block is simple and alone on the unit circle.
        unique: bool,
        diagnostics: Vec<String>,
    },
    AtomicOnCycles {
        cycles: Vec<Cycle>,
        /// One extreme invariant measure per cycle.
        measures: Vec<AtomicMeasure>,
        diagnostics: Vec<String>,
    },
}

impl SupportClassification {
    pub fn is_full_support(&self) -> bool {
        matches!(self, SupportClassification::FullSupport { .. })
    }

    pub fn diagnostics(&self) -> &[String] {
        match self {
            SupportClassification::FullSupport { diagnostics, .. }
            | SupportClassification::AtomicOnCycles { diagnostics, .. } => diagnostics,
        }
    }
}

fn require_normalized(op: &TransferOperator) -> Result<()> {
    if op.is_normalized(CYCLE_TOL) {
        Ok(())
    } else {
        Err(Error::NotNormalized(format!("R(1) = {}", op.image_of_one())))
    }
}

pub fn classify_support(m0: &LaurentPolynomial, scale: u32, max_length: u32) -> Result<SupportClassification> {
    classify_support_with(m0, scale, max_length, CLASSIFY_MOMENT_RANGE)
}

pub fn classify_support_with(
    m0: &LaurentPolynomial,
    scale: u32,
    max_length: u32,
    range: i64,
) -> Result<SupportClassification> {
    let op = TransferOperator::from_filter(m0, scale)?;
    require_normalized(&op)?;
    let report = find_cycles(m0, scale, max_length, CYCLE_TOL)?;
    if report.cycles.is_empty() {
        let moments = moment_table(&op, range)?;
        let unique = spectral_block(&op)?.has_perron_frobenius_spectrum();
        let mut diagnostics = vec![format!("non-atomic: no cycles of length <= {max_length}")];
        // R z^{Nn} = zⁿ·R1̂ = zⁿ, so ν̂(Nn) = ν̂(n) never decays
        if moments.entries().any(|(n, e)| n != 0 && !e.value.approx_eq(&Scalar::zero(), 1e-12)) {
            diagnostics.push("singular, non-atomic: moments do not decay along n -> N*n".into());
        }
        if !unique {
            diagnostics.push("eigenvalue 1 is not simple or other peripheral eigenvalues exist".into());
        }
        Ok(SupportClassification::FullSupport { moments, unique, diagnostics })
    } else {
        let measures: Vec<AtomicMeasure> = report.cycles.iter().map(AtomicMeasure::uniform_on).collect();
        let diagnostics = vec![format!("{} extreme invariant measure(s), one per cycle", measures.len())];
        Ok(SupportClassification::AtomicOnCycles { cycles: report.cycles, measures, diagnostics })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WienerEntry {
    pub k: i64,
    /// `s_k = Σ_{j ≤ k} |ν̂(j)|²`.
    pub partial_sum: Scalar,
    /// `s_k / k`, absent at `k = 0`.
    pub ratio: Option<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WienerProfile {
    pub entries: Vec<WienerEntry>,
    pub warnings: Vec<String>,
}

pub fn wiener_profile(table: &MomentTable, k_max: i64) -> Result<WienerProfile> {
    let mut entries = Vec::with_capacity(k_max.max(0) as usize + 1);
    let mut warnings = Vec::new();
    let mut s = Scalar::zero();
    for k in 0..=k_max {
        let e = table.entry(k)?;
        if !e.status.is_settled() {
            warnings.push(format!("moment {k} is unsettled"));
        }
        s += &e.value.abs_sqr();
        let ratio = (k > 0).then(|| &s * &Scalar::from_ratio(1, k));
        entries.push(WienerEntry { k, partial_sum: s.clone(), ratio });
    }
    Ok(WienerProfile { entries, warnings })
}

/// `(1/2π) Π_{k=1..n} (1 + cos(2·3ᵏ t))` on the grid `t = 2πj/G`.
pub fn riesz_samples(n: u32, grid: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 || grid < 2 {
        return Err(Error::Precondition(format!("riesz_samples needs n >= 1 and G >= 2, got n={n}, G={grid}")));
    }
    let tau = 2.0 * std::f64::consts::PI;
    Ok((0..grid)
        .map(|j| {
            let t = tau * j as f64 / grid as f64;
            // reduce 3ᵏ j mod G before scaling to keep the phase accurate
            let mut mult: u128 = 1;
            let mut v = 1.0;
            for _ in 0..n {
                mult = mult * 3 % grid as u128;
                let phase = tau * ((2 * mult * j as u128) % grid as u128) as f64 / grid as f64;
                v *= 1.0 + phase.cos();
            }
            (t, v / tau)
        })
        .collect())
}

/// `ν_n(f) = ν(R₁ⁿ f)`.
pub fn tail_measure(table: &MomentTable, scale: u32, n: u32, f: &LaurentPolynomial) -> Result<Scalar> {
    table.integrate(&apply_haar_average(scale, f, n))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FilterComparison {
    SameMeasure { same_modulus: bool },
    DifferentMeasure { first_difference: i64, representations_disjoint: bool },
}

pub fn compare_filters(
    m0: &LaurentPolynomial,
    m0b: &LaurentPolynomial,
    scale: u32,
    range: i64,
    tol: f64,
) -> Result<FilterComparison> {
    let op = TransferOperator::from_filter(m0, scale)?;
    let opb = TransferOperator::from_filter(m0b, scale)?;
    require_normalized(&op)?;
    require_normalized(&opb)?;
    for m in [m0, m0b] {
        let report = find_cycles(m, scale, DEFAULT_CYCLE_LENGTH, CYCLE_TOL)?;
        if !report.cycles.is_empty() {
            let first: Vec<String> = report.cycles[0].angles().iter().map(Angle::to_string).collect();
            return Err(Error::CyclesPresent(format!("cycle {{{}}}; use classify_support", first.join(", "))));
        }
    }
    let a = moment_table(&op, range)?;
    let b = moment_table(&opb, range)?;
    for n in 0..=range {
        if !a.get(n)?.approx_eq(b.get(n)?, tol) {
            return Ok(FilterComparison::DifferentMeasure { first_difference: n, representations_disjoint: true });
        }
    }
    let (wa, wb) = (weight_from_filter(m0), weight_from_filter(m0b));
    let same_modulus = if wa.is_exact() && wb.is_exact() { wa == wb } else { wa.approx_eq(&wb, tol) };
    Ok(FilterComparison::SameMeasure { same_modulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::DigitSystem;

    fn cantor3() -> TransferOperator {
        TransferOperator::from_filter(&DigitSystem::cantor3().lowpass(), 3).unwrap()
    }

    fn haar_filter() -> LaurentPolynomial {
        DigitSystem::haar().lowpass()
    }

    fn stretched_haar() -> LaurentPolynomial {
        LaurentPolynomial::from_terms([(0, Scalar::inv_sqrt(2)), (3, Scalar::inv_sqrt(2))])
    }

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn cantor3_moments() {
        let op = cantor3();
        let e = moment(&op, 0, 10, 1e-12).unwrap();
        assert_eq!(e.value, Scalar::one());
        assert!(matches!(e.status, MomentStatus::Stabilized { .. }));
        let e = moment(&op, 1, 10, 1e-12).unwrap();
        assert_eq!(e.value, Scalar::zero());
        assert!(matches!(e.status, MomentStatus::Stabilized { .. }));
        assert_eq!(moment(&op, 4, 10, 1e-12).unwrap().value, q(1, 4));
        assert!(moment(&op, 4, 1, 1e-12).is_err());
    }

    #[test]
    fn cantor3_table_to_eight() {
        let t = moment_table(&cantor3(), 8).unwrap();
        let want = [q(1, 1), q(0, 1), q(1, 2), q(0, 1), q(1, 4), q(0, 1), q(1, 2), q(0, 1), q(1, 4)];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(t.get(n as i64).unwrap(), w);
            assert_eq!(t.get(-(n as i64)).unwrap(), w);
        }
        assert!(t.all_settled());
        assert!(matches!(t.get(9), Err(Error::MissingMoment(9))));
    }

    #[test]
    fn haar_moments_converge_to_dirac() {
        let op = TransferOperator::from_filter(&haar_filter(), 2).unwrap();
        let t = moment_table_with(&op, 2, 20, 1e-3).unwrap();
        for n in -2..=2 {
            let e = t.entry(n).unwrap();
            assert!((e.value.to_complex() - 1.0).norm() < 1e-3);
            if n != 0 {
                assert!(matches!(e.status, MomentStatus::Converged { .. }));
            }
        }
    }

    #[test]
    fn lebesgue_measure_for_trivial_weight() {
        let t = moment_table(&TransferOperator::haar_average(3).unwrap(), 6).unwrap();
        for (n, e) in t.entries() {
            assert_eq!(e.value, if n == 0 { Scalar::one() } else { Scalar::zero() });
        }
    }

    #[test]
    fn cycle_census() {
        let r = find_cycles(&haar_filter(), 2, 8, CYCLE_TOL).unwrap();
        assert_eq!(r.cycles.len(), 1);
        assert_eq!(r.cycles[0].angles(), vec![Angle::new(0, 1)]);

        let r = find_cycles(&DigitSystem::cantor3().lowpass(), 3, 12, CYCLE_TOL).unwrap();
        assert_eq!(r.verdict, CycleVerdict::NoCycles);

        let r = find_cycles(&stretched_haar(), 2, 8, CYCLE_TOL).unwrap();
        let orbits: Vec<Vec<Angle>> = r.cycles.iter().map(Cycle::angles).collect();
        assert_eq!(orbits, vec![vec![Angle::new(0, 1)], vec![Angle::new(1, 3), Angle::new(2, 3)]]);
        for c in &r.cycles {
            for p in &c.points {
                assert!((p.weight - 2.0).abs() < 1e-12);
            }
        }
        assert!(matches!(find_cycles(&haar_filter(), 2, 40, CYCLE_TOL), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn exhaustive_cycles_agree_with_bound_shortcut() {
        // Cantor-4 filter (1+z²)/√2 at N=4 has sup |m₀|² = 2 < 4
        let r = find_cycles(&DigitSystem::cantor4().lowpass(), 4, 6, CYCLE_TOL).unwrap();
        assert!(r.cycles.is_empty());
        // (1+z+z²)/√3 at N=3 attains 3 at θ=0 only
        let m = DigitSystem::new(3, &[0, 1, 2]).unwrap().lowpass();
        let r = find_cycles(&m, 3, 6, CYCLE_TOL).unwrap();
        assert_eq!(r.cycles.len(), 1);
    }

    #[test]
    fn classification() {
        let c = classify_support(&DigitSystem::cantor3().lowpass(), 3, 12).unwrap();
        match &c {
            SupportClassification::FullSupport { unique, diagnostics, .. } => {
                assert!(*unique);
                assert!(diagnostics.iter().any(|d| d.contains("singular, non-atomic")));
            }
            _ => panic!("expected full support"),
        }
        match classify_support(&haar_filter(), 2, 8).unwrap() {
            SupportClassification::AtomicOnCycles { measures, .. } => {
                assert_eq!(measures.len(), 1);
                assert_eq!(measures[0].atoms, vec![(Angle::new(0, 1), Scalar::one())]);
            }
            _ => panic!("expected atoms"),
        }
        let op = TransferOperator::from_filter(&stretched_haar(), 2).unwrap();
        match classify_support(&stretched_haar(), 2, 8).unwrap() {
            SupportClassification::AtomicOnCycles { measures, .. } => {
                assert_eq!(measures.len(), 2);
                assert_eq!(measures[1].atoms, vec![(Angle::new(1, 3), q(1, 2)), (Angle::new(2, 3), q(1, 2))]);
                for m in &measures {
                    assert!(invariance_defect(&op, |n| Ok(m.moment(n)), 6).unwrap() < 1e-12);
                    assert!(m.transport_is_monotone(2));
                }
            }
            _ => panic!("expected atoms"),
        }
        let bad = LaurentPolynomial::from_terms([(0, Scalar::one()), (1, Scalar::one())]);
        assert!(matches!(classify_support(&bad, 2, 4), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn cantor3_measure_is_invariant() {
        let op = cantor3();
        let t = moment_table(&op, 80).unwrap();
        assert_eq!(invariance_defect(&op, |n| t.get(n).cloned(), 20).unwrap(), 0.0);
    }

    #[test]
    fn wiener_examples() {
        let t = moment_table(&cantor3(), 9).unwrap();
        let w = wiener_profile(&t, 2).unwrap();
        assert_eq!(w.entries[2].partial_sum, q(5, 4));
        assert!(w.warnings.is_empty());
        let w = wiener_profile(&moment_table(&TransferOperator::haar_average(2).unwrap(), 10).unwrap(), 10).unwrap();
        assert!(w.entries.iter().all(|e| e.partial_sum == Scalar::one()));
        assert_eq!(w.entries[10].ratio, Some(q(1, 10)));
        assert!(wiener_profile(&t, 10).is_err());
    }

    #[test]
    fn riesz_examples() {
        for n in 1..5 {
            let s = riesz_samples(n, 16).unwrap();
            assert!((s[0].1 - 2f64.powi(n as i32) / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        }
        let s = riesz_samples(1, 4).unwrap();
        assert!((s[1].0 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(s[1].1.abs() < 1e-15);
        let g = 3usize.pow(8);
        let mass: f64 = riesz_samples(6, g).unwrap().iter().map(|(_, v)| v).sum::<f64>() * 2.0 * std::f64::consts::PI / g as f64;
        assert!((mass - 1.0).abs() < 5e-2);
        assert!(riesz_samples(0, 4).is_err());
    }

    #[test]
    fn tail_examples() {
        let t = moment_table(&cantor3(), 8).unwrap();
        for n in 0..4 {
            assert_eq!(tail_measure(&t, 3, n, &LaurentPolynomial::one()).unwrap(), Scalar::one());
        }
        let z6 = LaurentPolynomial::monomial(6, Scalar::one());
        assert_eq!(tail_measure(&t, 3, 1, &z6).unwrap(), q(1, 2));
        let z = LaurentPolynomial::monomial(1, Scalar::one());
        assert_eq!(tail_measure(&t, 3, 1, &z).unwrap(), Scalar::zero());
    }

    #[test]
    fn filter_comparison() {
        let m0 = DigitSystem::cantor3().lowpass();
        assert_eq!(compare_filters(&m0, &m0, 3, 20, 1e-12).unwrap(), FilterComparison::SameMeasure { same_modulus: true });
        let shifted = m0.shift(3);
        assert_eq!(compare_filters(&m0, &shifted, 3, 50, 1e-12).unwrap(), FilterComparison::SameMeasure { same_modulus: true });
        let stretched = LaurentPolynomial::from_terms([(0, Scalar::inv_sqrt(2)), (3, Scalar::inv_sqrt(2))]);
        assert!(matches!(compare_filters(&m0, &stretched, 3, 10, 1e-12), Err(Error::NotNormalized(_))));
        // (1+z)/√2 is normalized at N=3, with ν̂(1) = 1/2 ≠ 0
        let other = haar_filter();
        assert!(matches!(
            compare_filters(&m0, &other, 3, 10, 1e-12).unwrap(),
            FilterComparison::DifferentMeasure { first_difference: 1, .. }
        ));
        assert!(matches!(compare_filters(&haar_filter(), &haar_filter(), 2, 4, 1e-12), Err(Error::CyclesPresent(_))));
    }

    #[test]
    fn angles() {
        assert_eq!(Angle::new(2, 6), Angle::new(1, 3));
        assert_eq!(Angle::new(1, 3).times(2), Angle::new(2, 3));
        assert_eq!(Angle::new(0, 7).to_string(), "0");
        assert_eq!(Angle::new(1, 2).character(3), Scalar::from_int(-1));
    }
}
