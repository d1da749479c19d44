use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repzeta::a2_formulas::{funeq_verify, A2Variant};
use repzeta::euler_global::{euler_convolve, zeta_power_family, GlobalSpec};
use repzeta::finite_lie::{generic_exponents, mat_mul, smith_normal_form, LieKind, LieLattice, Matrix, Zpl};
use repzeta::kirillov_census::{census_at, formula_counts, Strategy as Census};
use repzeta::StreamU64;

fn variant() -> impl Strategy<Value = A2Variant> {
    prop::sample::select(A2Variant::ALL.to_vec())
}

fn zeta_power(k: usize, n: usize) -> StreamU64 {
    euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(k).unwrap(), 0), n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functional_equation_holds(v in variant(), m in 1i64..=8) {
        prop_assert!(funeq_verify::<BigRational>(v, m).unwrap());
    }

    #[test]
    fn formula_counts_are_nonnegative_with_abelian_start(v in variant(), m in 1u32..=3, q in prop::sample::select(vec![2u64, 4, 5, 7, 8, 9, 11])) {
        let c = formula_counts(v, q, m, 40).unwrap();
        prop_assert_eq!(&c[0], &BigInt::from(q).pow(8 * m));
        prop_assert!(c.iter().all(|x| *x >= BigInt::from(0)));
    }

    #[test]
    fn smith_exponents_are_equivalence_invariants(r in 1usize..=5, c in 1usize..=5, seed in any::<u64>()) {
        let z = Zpl::new(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize, k: usize| {
            Matrix::from_vec(n, k, (0..n * k).map(|_| if rng.gen_bool(0.4) { 3 * rng.gen_range(0..9) } else { rng.gen_range(0..27) }).collect())
        };
        let m = draw(r, c);
        let mut unit = |n: usize| loop {
            let u = draw(n, n);
            if generic_exponents(&z, u.data(), n, n).iter().all(|&e| e == 0) {
                break u;
            }
        };
        let (u, v) = (unit(r), unit(c));
        let moved = mat_mul(&z, &mat_mul(&z, &u, &m), &v);
        prop_assert_eq!(smith_normal_form(&z, &m).exponents, smith_normal_form(&z, &moved).exponents);
    }

    #[test]
    fn dirichlet_product_adds_zeta_powers(a in 1usize..=3, b in 1usize..=3) {
        let n = 2000;
        let lhs = zeta_power(a, n).dirichlet_mul(&zeta_power(b, n)).unwrap();
        let rhs = zeta_power(a + b, n);
        prop_assert_eq!(lhs.values(), rhs.values());
    }

    #[test]
    fn euler_streams_are_multiplicative(k in 1usize..=4, m in 1usize..=60, n in 1usize..=60) {
        prop_assume!(num_integer::gcd(m, n) == 1);
        let s = zeta_power(k, 3600);
        prop_assert_eq!(s.get(m * n), s.get(m) * s.get(n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn shell_and_exhaustive_censuses_agree(
        (kind, p) in prop::sample::select(vec![
            (LieKind::Sl3, 5u64), (LieKind::Sl3, 7), (LieKind::Su3, 5), (LieKind::Su3, 7), (LieKind::Gl3, 5),
        ]),
        m in 1u32..=2,
    ) {
        let lattice = LieLattice::make(kind, p, 1).unwrap();
        let a = census_at(&lattice, p, 1, 2, m, &Census::Exhaustive).unwrap();
        let b = census_at(&lattice, p, 1, 2, m, &Census::Shell).unwrap();
        prop_assert_eq!(&a.counts, &b.counts);
        prop_assert!(a.mass_holds(lattice.dim()));
    }
}
