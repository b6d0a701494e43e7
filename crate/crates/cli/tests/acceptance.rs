//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fractalmra::duality::{b_cycles, dual_matrix, exponential_gram, find_orthogonal_triple, lambda_set, onb_defect};
use fractalmra::filterbank::{build_bank, pairing, unitarity_defect, DEFAULT_SAMPLES};
use fractalmra::lattice::{
    cascade_experiment, cascade_step, correlation, gram_section, inner, representation_limit,
    scaling_function, wavelet_generators,
};
use fractalmra::measure::{find_cycles, moment_table, wiener_profile, Angle, MomentStatus, MomentTable, CYCLE_TOL};
use fractalmra::transfer::{apply_transfer, spectral_block};
use fractalmra::{DigitSystem, LatticeVector, LaurentPolynomial, Scalar, TransferOperator};

fn q(n: i64, d: i64) -> Scalar {
    Scalar::from_ratio(n, d)
}

fn cantor3_table(range: i64) -> MomentTable {
    let sys = DigitSystem::cantor3();
    moment_table(&TransferOperator::from_filter(&sys.lowpass(), 3).unwrap(), range).unwrap()
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn subsets(n: u32) -> impl Iterator<Item = Vec<i64>> {
    (1u32..1 << n).map(move |mask| (0..n as i64).filter(|d| mask >> d & 1 == 1).collect())
}

fn c1_unitarity() -> Result<(), String> {
    let mut systems = 0;
    for n in 2..=6 {
        for s in subsets(n) {
            let sys = DigitSystem::new(n, &s).map_err(|e| e.to_string())?;
            let d = unitarity_defect(&build_bank(&sys), DEFAULT_SAMPLES);
            check(d.value < 1e-10, || format!("N={n} S={s:?}: defect {:e}", d.value))?;
            if s.len() == 2 {
                check(d.exact && d.value == 0.0, || format!("N={n} S={s:?}: p=2 defect not exactly 0"))?;
            }
            systems += 1;
        }
    }
    check(systems == 119, || format!("{systems} systems checked"))
}

fn c2_moment_recursion(t: &MomentTable) -> Result<(), String> {
    let nu = |n: i64| t.get(n).unwrap().clone();
    for n in -243..=243i64 {
        let e = t.entry(n).unwrap();
        check(e.value.is_exact() && matches!(e.status, MomentStatus::Stabilized { .. }), || format!("ν̂({n}) not exact"))?;
        if n % 2 != 0 {
            check(nu(n) == Scalar::zero(), || format!("ν̂({n}) = {} for odd n", nu(n)))?;
        }
        if n % 3 == 0 {
            check(nu(n) == nu(n / 3), || format!("ν̂({n}) != ν̂({})", n / 3))?;
        }
        for (r, sign) in [(2i64, 1i64), (-2, -1)] {
            if (n - r) % 3 == 0 {
                let m = (n - r) / 3;
                check(nu(n) == &nu(m) * &q(1, 2), || format!("ν̂({n}) != ½ν̂({m}) (3m{}2)", if sign > 0 { '+' } else { '-' }))?;
            }
        }
    }
    check(nu(0) == Scalar::one() && nu(1) == Scalar::zero(), || "ν̂(0) or ν̂(1) wrong".into())
}

fn c3_gk_gram(t: &MomentTable) -> Result<(), String> {
    let three = |k: u32| 3i64.pow(k);
    let g = |k: u32| LaurentPolynomial::from_terms([(2 * three(k), Scalar::one()), (0, q(-1, 2))]);
    for k in 0..=5 {
        for l in 0..=5 {
            let v = t.integrate(&g(k).conj_reflect().mul(&g(l))).map_err(|e| e.to_string())?;
            let want = if k == l { q(3, 4) } else { Scalar::zero() };
            check(v.is_exact() && v == want, || format!("⟨g_{k}|g_{l}⟩ = {v}"))?;
        }
    }
    Ok(())
}

fn c4_wiener(t: &MomentTable) -> Result<(), String> {
    let profile = wiener_profile(t, 729).map_err(|e| e.to_string())?;
    check(profile.warnings.is_empty(), || format!("{:?}", profile.warnings))?;
    let s = |k: i64| profile.entries[k as usize].partial_sum.clone();
    check(s(0).is_exact(), || "s_0 not exact".into())?;
    for n in 0..=4u32 {
        let (a, b) = (3i64.pow(n), 3i64.pow(n + 1));
        let bound = &s(a) * &q(5, 2);
        check(s(b).is_exact() && s(b).real_cmp(&bound).is_le(), || format!("s_{b} = {} > 5/2·s_{a} = {bound}", s(b)))?;
    }
    for k in 1..=729i64 {
        let mut m = 0;
        while 3i64.pow(m + 1) <= k {
            m += 1;
        }
        let bound = &(&q(5i64.pow(m), 6i64.pow(m)) * &q(5, 2)) * &s(0);
        let ratio = profile.entries[k as usize].ratio.clone().unwrap();
        check(ratio.is_exact() && ratio.real_cmp(&bound).is_le(), || format!("s_{k}/{k} = {ratio} > {bound}"))?;
    }
    Ok(())
}

fn c5_cascade(t: &MomentTable) -> Result<(), String> {
    let sys = DigitSystem::cantor3();
    let m0 = sys.lowpass();
    let m1 = m0.shift(3);
    let mut failures = Vec::new();

    let phi = scaling_function(&sys);
    let m_phi = cascade_step(&phi, &m0).map_err(|e| e.to_string())?;
    if !m_phi.same_vector(&phi).unwrap() {
        failures.push("(a) Mφ != φ".to_string());
    }

    let mut iterates = vec![phi.clone()];
    for _ in 0..6 {
        let next = cascade_step(iterates.last().unwrap(), &m1).map_err(|e| e.to_string())?;
        iterates.push(next);
    }
    let mut off = Vec::new();
    for (a, va) in iterates.iter().enumerate() {
        for (b, vb) in iterates.iter().enumerate().skip(a) {
            let g = inner(va, vb).map_err(|e| e.to_string())?;
            let want = if a == b { Scalar::one() } else { Scalar::zero() };
            if !(g.is_exact() && g == want) {
                off.push(format!("⟨M'^{a}φ|M'^{b}φ⟩={g}"));
            }
        }
    }
    if !off.is_empty() {
        failures.push(format!("(b) {} pairs not orthonormal: {}", off.len(), off.join(", ")));
    }
    let rows = cascade_experiment(&sys, &m1, 7).map_err(|e| e.to_string())?;
    for r in rows.iter().filter(|r| r.norm_sq != Scalar::from_int(2)) {
        failures.push(format!("(b) row {}: ‖·‖² = {}", r.n, r.norm_sq));
    }

    let a00 = pairing(&m0, &m1, 3);
    let nu_a00 = t.integrate(&a00).map_err(|e| e.to_string())?;
    let Scalar::Exact(re) = &nu_a00 else { return Err("ν(A₀₀) inexact".into()) };
    let predicted = &Scalar::from_int(2) - &(&Scalar::from_int(2) * &Scalar::Exact(re.clone()));
    if a00 != LaurentPolynomial::monomial(1, Scalar::one()) || nu_a00 != Scalar::zero() || predicted != rows[0].norm_sq {
        failures.push(format!("(c) A₀₀ = {a00:?}, ν(A₀₀) = {nu_a00}, 2 − 2Re ν(A₀₀) = {predicted}"));
    }
    check(failures.is_empty(), || failures.join("; "))
}

fn random_vector(rng: &mut ChaCha8Rng, sys: &DigitSystem) -> LatticeVector {
    let resolution = rng.random_range(-1..=2);
    let len = rng.random_range(1..=5);
    let entries: Vec<(i128, Scalar)> = (0..len)
        .map(|_| (rng.random_range(-12..=12) as i128, q(rng.random_range(-4..=4), rng.random_range(1..=3))))
        .collect();
    LatticeVector::from_entries(sys, resolution, entries)
}

fn c6_zak() -> Result<(), String> {
    for (sys, seed) in [(DigitSystem::cantor3(), 3u64), (DigitSystem::cantor4(), 4)] {
        let m0 = sys.lowpass();
        let op = TransferOperator::from_filter(&m0, sys.scale()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..20 {
            let (v, w) = (random_vector(&mut rng, &sys), random_vector(&mut rng, &sys));
            let lhs = apply_transfer(&op, &correlation(&v, &w).map_err(|e| e.to_string())?);
            let mv = cascade_step(&v, &m0).map_err(|e| e.to_string())?;
            let mw = cascade_step(&w, &m0).map_err(|e| e.to_string())?;
            let rhs = correlation(&mv, &mw).map_err(|e| e.to_string())?;
            check(lhs.is_exact() && lhs == rhs, || format!("{} pair {i}: R p(v,w) != p(Mv,Mw)", sys.label()))?;
        }
    }
    Ok(())
}

fn c7_gram_sections() -> Result<(), String> {
    for (sys, j, k, size) in [(DigitSystem::cantor3(), 2, 5, 2 * 5 * 11), (DigitSystem::cantor4(), 1, 3, 3 * 3 * 7)] {
        let gens = wavelet_generators(&sys);
        let g = gram_section(&sys, &gens, -j..=j, -k..=k).map_err(|e| e.to_string())?;
        check(g.labels.len() == size, || format!("{} section has {} labels", sys.label(), g.labels.len()))?;
        check(g.is_identity(), || format!("{} deviation {:e}", sys.label(), g.max_identity_deviation()))?;
    }
    Ok(())
}

fn c8_spectrum_and_cycles() -> Result<(), String> {
    let sys = DigitSystem::cantor3();
    let block = spectral_block(&TransferOperator::from_filter(&sys.lowpass(), 3).unwrap()).map_err(|e| e.to_string())?;
    let want = [1.0, 0.5, 0.5];
    check(block.eigenvalues.len() == 3, || format!("{} eigenvalues", block.eigenvalues.len()))?;
    for (z, w) in block.eigenvalues.iter().zip(want) {
        check((z - Complex64::new(w, 0.0)).norm() < 1e-12, || format!("eigenvalue {z} vs {w}"))?;
    }
    check(block.unit_multiplicity == 1 && block.exact_fixed_dimension == Some(1), || "eigenvalue 1 not simple".into())?;
    check(block.constant_fixed, || "constant not fixed".into())?;

    let census = |m0: &LaurentPolynomial, n: u32| -> Result<Vec<Vec<Angle>>, String> {
        let r = find_cycles(m0, n, 12, CYCLE_TOL).map_err(|e| e.to_string())?;
        Ok(r.cycles.iter().map(|c| c.angles()).collect())
    };
    let haar = DigitSystem::haar().lowpass();
    check(census(&haar, 2)? == vec![vec![Angle::new(0, 1)]], || "Haar census".into())?;
    check(census(&sys.lowpass(), 3)?.is_empty(), || "Cantor-3 census".into())?;
    let h = Scalar::inv_sqrt(2);
    let stretched = LaurentPolynomial::from_terms([(0, h.clone()), (3, h)]);
    let want = vec![vec![Angle::new(0, 1)], vec![Angle::new(1, 3), Angle::new(2, 3)]];
    let got = census(&stretched, 2)?;
    check(got == want, || format!("(1+z³)/√2 census {got:?}"))
}

fn c9_duality() -> Result<(), String> {
    let sys = DigitSystem::cantor4();
    let pair = dual_matrix(&sys, &[0, 1]).map_err(|e| e.to_string())?;
    check(pair.is_dual() && pair.exact && pair.defect == 0.0, || format!("M₄ defect {:e}", pair.defect))?;
    let lambda = lambda_set(&pair, 8).map_err(|e| e.to_string())?.prefix;
    check(lambda == [0, 1, 4, 5, 16, 17, 20, 21], || format!("Λ₄ = {lambda:?}"))?;
    let g = exponential_gram(&sys, &lambda, 40);
    for i in 0..8 {
        for j in 0..8 {
            let d = (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm();
            check(d < 1e-8, || format!("Gram ({i},{j}) off by {d:e}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..8 {
        let xi: f64 = rng.random_range(-1.0..=1.0);
        let sums = onb_defect(&pair, xi, 64, 40).map_err(|e| e.to_string())?;
        check(sums.windows(2).all(|w| w[1] >= w[0]), || format!("partial sums decrease at ξ={xi}"))?;
        check(sums.iter().all(|&s| s <= 1.0 + 1e-9), || format!("partial sum above 1 at ξ={xi}"))?;
    }
    let cycles = b_cycles(&pair, 8, CYCLE_TOL).map_err(|e| e.to_string())?;
    check(cycles.trivial_only, || format!("B-cycles {:?}", cycles.cycles))
}

fn c10_no_orthogonal_triple() -> Result<(), String> {
    let exps: Vec<i64> = (0..=20).collect();
    let g = exponential_gram(&DigitSystem::cantor3(), &exps, 40);
    let triple = find_orthogonal_triple(&g, 1e-6);
    check(triple.is_none(), || format!("orthogonal triple {triple:?}"))
}

fn c11_representation_limit(t: &MomentTable) -> Result<(), String> {
    let sys = DigitSystem::cantor3();
    let m0 = sys.lowpass();
    for m in -10..=10i64 {
        let lim = representation_limit(&sys, &m0, 8, m).map_err(|e| e.to_string())?;
        let e = t.entry(m).unwrap();
        let d = (lim.to_complex() - e.value.to_complex()).norm();
        check(d < 1e-6, || format!("m={m}: |limit − ν̂| = {d:e}"))?;
        if m % 2 == 0 && matches!(e.status, MomentStatus::Stabilized { .. }) {
            check(lim.is_exact() && lim == e.value, || format!("m={m}: {lim} != {}", e.value))?;
        }
    }
    Ok(())
}

/// `Λ` prefix by enumerating digit strings, independent of the library.
fn lambda_oracle(n: i64, dual: &[i64], count: usize) -> Vec<i64> {
    let mut sums = vec![0i64];
    let mut power = 1i64;
    for _ in 0..6 {
        sums = sums.iter().flat_map(|s| dual.iter().map(move |b| s + b * power)).collect();
        power *= n;
    }
    sums.sort_unstable();
    sums.dedup();
    sums.truncate(count);
    sums
}

fn c12_table() -> Result<(), String> {
    let run = |format: &str| {
        Command::new(env!("CARGO_BIN_EXE_fractalmra")).args(["table", "--format", format]).output().unwrap()
    };
    for format in ["json", "text"] {
        let (a, b) = (run(format), run(format));
        check(a.status.success() && b.status.success(), || format!("table --format {format} failed"))?;
        check(a.stdout == b.stdout, || format!("table --format {format} not byte-identical"))?;
    }
    let doc: serde_json::Value = serde_json::from_slice(&run("json").stdout).map_err(|e| e.to_string())?;
    let rows = doc["rows"].as_array().ok_or("no rows")?;
    let ln = |x: f64| x.ln();
    let expected: [(i64, &[i64], &[i64], &str, f64); 4] = [
        (4, &[0, 2], &[0, 1], "1/√2 [[1, 1], [1, -1]]", 0.5),
        (6, &[0, 3], &[0, 1], "1/√2 [[1, 1], [1, -1]]", ln(2.0) / ln(6.0)),
        (6, &[0, 1], &[0, 3], "1/√2 [[1, 1], [1, -1]]", ln(2.0) / ln(6.0)),
        (6, &[0, 2, 4], &[0, 1, 2], "1/√3 [[1, 1, 1], [1, ζ3, ζ3^2], [1, ζ3^2, ζ3]]", ln(3.0) / ln(6.0)),
    ];
    check(rows.len() == 4, || format!("{} rows", rows.len()))?;
    for (row, (n, s, b, matrix, dim)) in rows.iter().zip(expected) {
        let ints = |v: &serde_json::Value| v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect::<Vec<_>>();
        check(row["scale"] == n && ints(&row["digits"]) == s && ints(&row["dual"]) == b, || format!("row {row}"))?;
        check(row["matrix"] == matrix, || format!("matrix {}", row["matrix"]))?;
        let d = row["dimension"].as_f64().unwrap();
        check((d - dim).abs() < 1e-12, || format!("dimension {d} vs {dim}"))?;
        let want = lambda_oracle(n, b, 4 * s.len());
        check(ints(&row["lambda_prefix"]) == want, || format!("Λ prefix {} vs {want:?}", row["lambda_prefix"]))?;
        check(row["verdict"] == "dual", || "verdict".into())?;
    }
    check(ints_of(&rows[0]["lambda_prefix"]) == [0, 1, 4, 5, 16, 17, 20, 21], || "Λ₄ prefix".into())
}

fn ints_of(v: &serde_json::Value) -> Vec<i64> {
    v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect()
}

fn main() {
    let start = Instant::now();
    let table = cantor3_table(729);
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<(), String>>)> = vec![
        ("filter-bank unitarity", Box::new(c1_unitarity)),
        ("moment recursion", Box::new(|| c2_moment_recursion(&table))),
        ("g_k Gram", Box::new(|| c3_gk_gram(&table))),
        ("Wiener averages", Box::new(|| c4_wiener(&table))),
        ("cascade dichotomy", Box::new(|| c5_cascade(&table))),
        ("Zak intertwining", Box::new(c6_zak)),
        ("wavelet ONB sections", Box::new(c7_gram_sections)),
        ("spectral block and cycle census", Box::new(c8_spectrum_and_cycles)),
        ("duality", Box::new(c9_duality)),
        ("no orthogonal triple on C3", Box::new(c10_no_orthogonal_triple)),
        ("representation limit", Box::new(|| c11_representation_limit(&table))),
        ("table reproduction", Box::new(c12_table)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS criterion {:>2}: {name} ({ms} ms)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {e} ({ms} ms)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:.1} s", criteria.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
