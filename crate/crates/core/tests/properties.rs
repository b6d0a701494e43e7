use proptest::prelude::*;

use fractalmra::filterbank::{build_bank, connecting_matrix, loop_apply, pairing, unitarity_defect, DEFAULT_SAMPLES};
use fractalmra::ifs::hutchinson_transform;
use fractalmra::lattice::{
    apply_dilation, apply_filter, apply_shift, cascade_step, correlation, inner, refine_to, scaling_function, Dilation,
};
use fractalmra::transfer::apply_transfer;
use fractalmra::{DigitSystem, LatticeVector, LaurentPolynomial, LoopMatrix, Scalar, TransferOperator};

fn systems() -> impl Strategy<Value = DigitSystem> {
    prop_oneof![Just(DigitSystem::cantor3()), Just(DigitSystem::cantor4()), Just(DigitSystem::new(5, &[0, 1, 3]).unwrap())]
}

fn rational() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Scalar::from_ratio(n, d))
}

fn entries() -> impl Strategy<Value = Vec<(i128, Scalar)>> {
    prop::collection::vec((-15i128..=15, rational()), 1..6)
}

fn vector(sys: DigitSystem) -> impl Strategy<Value = LatticeVector> {
    (-2i32..=2, entries()).prop_map(move |(n, e)| LatticeVector::from_entries(&sys, n, e))
}

fn system_and_vectors() -> impl Strategy<Value = (DigitSystem, LatticeVector, LatticeVector)> {
    systems().prop_flat_map(|s| (Just(s.clone()), vector(s.clone()), vector(s)))
}

fn polynomial() -> impl Strategy<Value = LaurentPolynomial> {
    prop::collection::vec((-6i64..=6, rational()), 1..5).prop_map(LaurentPolynomial::from_terms)
}

fn close(a: num_complex::Complex64, b: num_complex::Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hutchinson_refinement(sys in systems(), k in -5000.0f64..5000.0) {
        // B(ξ) = (1/p) Σ_a e^{2πiaξ/N} B(ξ/N)
        let n = sys.scale() as f64;
        let head: num_complex::Complex64 = sys
            .digits()
            .iter()
            .map(|&a| num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * a as f64 * k / n))
            .sum::<num_complex::Complex64>()
            / sys.p() as f64;
        let lhs = hutchinson_transform(&sys, k, 40);
        let rhs = head * hutchinson_transform(&sys, k / n, 39);
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
        prop_assert!(lhs.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn shift_dilation_commutation((sys, v, _w) in system_and_vectors(), k in -20i128..=20) {
        // U T^k U⁻¹ = T^{Nk}
        let lhs = apply_dilation(&apply_shift(&apply_dilation(&v, Dilation::UInverse), k).unwrap(), Dilation::U);
        let rhs = apply_shift(&v, sys.scale() as i128 * k).unwrap();
        prop_assert!(lhs.same_vector(&rhs).unwrap());
    }

    #[test]
    fn isometries_preserve_norms((_sys, v, _w) in system_and_vectors(), k in -20i128..=20, up in 0i32..3) {
        let n = v.norm_sqr();
        prop_assert_eq!(apply_shift(&v, k).unwrap().norm_sqr(), n.clone());
        prop_assert_eq!(apply_dilation(&v, Dilation::U).norm_sqr(), n.clone());
        prop_assert_eq!(apply_dilation(&v, Dilation::UInverse).norm_sqr(), n.clone());
        prop_assert_eq!(refine_to(&v, v.resolution() + up).unwrap().norm_sqr(), n);
    }

    #[test]
    fn inner_product_is_hermitian_and_cauchy_schwarz((_sys, v, w) in system_and_vectors()) {
        let vw = inner(&v, &w).unwrap();
        prop_assert_eq!(vw.conj(), inner(&w, &v).unwrap());
        let bound = (&v.norm_sqr() * &w.norm_sqr()).to_complex().re;
        prop_assert!(vw.abs_sqr().to_complex().re <= bound + 1e-12);
    }

    #[test]
    fn filter_calculus_is_multiplicative((sys, v, _w) in system_and_vectors(), a in polynomial(), b in polynomial()) {
        let _ = sys;
        let lhs = apply_filter(&apply_filter(&v, &a).unwrap(), &b).unwrap();
        let rhs = apply_filter(&v, &a.mul(&b)).unwrap();
        prop_assert!(lhs.same_vector(&rhs).unwrap());
    }

    #[test]
    fn zak_intertwining((sys, v, w) in system_and_vectors()) {
        let m0 = sys.lowpass();
        let op = TransferOperator::from_filter(&m0, sys.scale()).unwrap();
        let lhs = apply_transfer(&op, &correlation(&v, &w).unwrap());
        let rhs = correlation(&cascade_step(&v, &m0).unwrap(), &cascade_step(&w, &m0).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn correlation_constant_term_is_inner((_sys, v, w) in system_and_vectors()) {
        prop_assert_eq!(correlation(&v, &w).unwrap().coeff(0), inner(&v, &w).unwrap());
    }

    #[test]
    fn generalized_pairing(sys in systems(), m in polynomial()) {
        // p(φ, M′φ) = ⟨m₀, m′⟩ when Mφ = φ and the translates of φ are orthonormal
        let phi = scaling_function(&sys);
        let lhs = correlation(&phi, &cascade_step(&phi, &m).unwrap()).unwrap();
        prop_assert_eq!(lhs, pairing(&sys.lowpass(), &m, sys.scale()));
    }

    #[test]
    fn transfer_preserves_positivity(sys in systems(), f in polynomial(), theta in 0.0f64..1.0) {
        let op = TransferOperator::from_filter(&sys.lowpass(), sys.scale()).unwrap();
        let g = apply_transfer(&op, &f.conj_reflect().mul(&f));
        prop_assert!(g.eval_turn(theta).re >= -1e-9);
    }

    #[test]
    fn transfer_contracts_degree(sys in systems(), f in polynomial()) {
        let op = TransferOperator::from_filter(&sys.lowpass(), sys.scale()).unwrap();
        let g = apply_transfer(&op, &f);
        let n = sys.scale() as i64;
        let bound = (f.max_abs_exponent() + op.weight().max_abs_exponent()) / n;
        prop_assert!(g.max_abs_exponent() <= bound);
    }

    #[test]
    fn normalization_is_transported_by_unimodular_factors(sys in systems(), k in -8i64..=8, neg in any::<bool>()) {
        // R_{m}1 = 1 iff ⟨m, m⟩ = 1, and zᵏ·(±m₀) keeps both
        let sign = if neg { Scalar::from_int(-1) } else { Scalar::one() };
        let m = sys.lowpass().shift(k).scale(&sign);
        let op = TransferOperator::from_filter(&m, sys.scale()).unwrap();
        prop_assert_eq!(op.image_of_one(), LaurentPolynomial::one());
        prop_assert_eq!(pairing(&m, &m, sys.scale()), LaurentPolynomial::one());
    }
}

fn unit_rows(rows: &[&[(usize, Scalar)]], n: usize) -> Vec<Vec<Scalar>> {
    rows.iter()
        .map(|r| {
            let mut row = vec![Scalar::zero(); n];
            for (j, x) in r.iter() {
                row[*j] = x.clone();
            }
            row
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loop_action_round_trip(exps in prop::collection::vec(0i64..=2, 3), perm in 0usize..6, flip in any::<bool>()) {
        // A = G · diag(zᵉ) · P with G a Givens rotation by π/4 and P a signed permutation
        let sys = DigitSystem::cantor3();
        let bank = build_bank(&sys);
        let h = Scalar::inv_sqrt(2);
        let g = LoopMatrix::constant(unit_rows(
            &[&[(0, h.clone()), (1, h.clone())], &[(0, h.clone()), (1, Scalar::from_int(-1) * h.clone())], &[(2, Scalar::one())]],
            3,
        ))
        .unwrap();
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let s = if flip { Scalar::from_int(-1) } else { Scalar::one() };
        let o = orders[perm];
        let p = LoopMatrix::constant(unit_rows(&[&[(o[0], s)], &[(o[1], Scalar::one())], &[(o[2], Scalar::one())]], 3)).unwrap();
        let d = LoopMatrix::diagonal(exps.iter().map(|&e| LaurentPolynomial::monomial(e, Scalar::one())).collect());
        let a = g.matmul(&d).unwrap().matmul(&p).unwrap();
        let bank2 = loop_apply(&a, &bank).unwrap();
        let defect = unitarity_defect(&bank2, DEFAULT_SAMPLES);
        prop_assert!(defect.exact && defect.value == 0.0);
        prop_assert_eq!(connecting_matrix(&bank, &bank2).unwrap(), a);
    }
}
