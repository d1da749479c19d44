//! Exact bivariate rational functions in `q` and `t = q^{-s}`.
//!
//! Every zeta function handled by the crate has the shape
//! `c q^e N(q, t) / prod (1 - q^a t^b)`; the denominator is kept factored so
//! that poles can be read off directly as `s = a/b`.

mod json;
mod laurent;
mod rational;

pub use json::{graded_from_json, graded_to_json, zeta_from_json, zeta_to_json, SCHEMA_VERSION};
pub(crate) use json::big_number;
pub use laurent::{Coefficient, LaurentPoly, QPoly};
pub use rational::{coeff_growth_abscissa, q_power, GradedCoefficients, PoleReport, ZetaRational};
pub(crate) use rational::least_squares_slope;

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::{BigRational, Ratio};
    use proptest::prelude::*;

    type Z = ZetaRational<BigRational>;
    type P = LaurentPoly<BigRational>;

    fn geo(a: i64, b: i64) -> Z {
        Z::geometric(&[(a, b)]).unwrap()
    }

    /// Brute-force truncated series: numerator times explicit geometric sums.
    fn brute_series(z: &Z, k: i64) -> Vec<P> {
        let mut acc = z.scaled_numerator();
        for &(a, b) in z.denominator() {
            let mut g = P::zero();
            let mut j = 0;
            while j * b <= k {
                g.add_term(j * a, j * b, BigRational::from_integer(1.into()));
                j += 1;
            }
            acc = acc.mul(&g);
        }
        (0..=k)
            .map(|i| P::from_terms(acc.t_slice(i).terms().map(|(a, c)| (a, 0, c.clone()))))
            .collect()
    }

    fn as_bivariate(g: &GradedCoefficients<BigRational>) -> Vec<P> {
        g.coeffs()
            .iter()
            .map(|p| P::from_terms(p.terms().map(|(a, c)| (a, 0, c.clone()))))
            .collect()
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        assert_eq!(geo(1, 2).mul(&Z::one()), geo(1, 2));
    }

    #[test]
    fn inverse_pair_cancels() {
        let f = Z::polynomial(P::from_int_terms(&[(0, 0, 1), (1, 2, -1)])).unwrap();
        let prod = geo(1, 2).mul(&f);
        assert_eq!(prod, Z::one());
        assert!(prod.denominator().is_empty());
    }

    #[test]
    fn addition_matches_series_oracle() {
        let rhs = Z::new(P::from_int_terms(&[(1, 2, 1)]), vec![(1, 2)], BigRational::from_integer(1.into()), 0)
            .unwrap();
        let sum = Z::one().add(&rhs);
        assert_eq!(sum, geo(1, 2));
        let lhs_series: Vec<P> = brute_series(&Z::one(), 10)
            .iter()
            .zip(brute_series(&rhs, 10))
            .map(|(a, b)| a.add(&b))
            .collect();
        assert_eq!(as_bivariate(&sum.expand(10)), lhs_series);
    }

    #[test]
    fn inverse_substitution_of_geometric_factor() {
        let inv = geo(1, 2).inverse_substitute().unwrap();
        let expected = Z::new(P::from_int_terms(&[(1, 2, -1)]), vec![(1, 2)], BigRational::from_integer(1.into()), 0)
            .unwrap();
        assert_eq!(inv, expected);
    }

    #[test]
    fn inverse_substitution_rejects_excess_numerator_degree() {
        let z = Z::new(P::from_int_terms(&[(0, 0, 1), (0, 3, 1)]), vec![(1, 2)], BigRational::from_integer(1.into()), 0)
            .unwrap();
        assert!(z.inverse_substitute().is_err());
    }

    #[test]
    fn single_factor_pole() {
        let r = geo(1, 2).poles(3).unwrap();
        assert_eq!(r.candidate_poles, vec![Ratio::new(1, 2)]);
        assert_eq!(r.abscissa, Some(Ratio::new(1, 2)));
        assert!(geo(1, 2).poles(1).is_err());
    }

    #[test]
    fn evaluation_and_pole_error() {
        let v: f64 = geo(1, 2).evaluate(2, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(matches!(geo(1, 2).evaluate(2, 0.5f64), Err(crate::Error::Pole { .. })));
        let v32: f32 = geo(1, 2).evaluate(2, 1.0f32).unwrap();
        assert!((v32 - 2.0).abs() < 1e-5);
    }

    #[test]
    fn growth_of_geometric_series() {
        let g = geo(1, 2).expand(60);
        let slope = coeff_growth_abscissa(&g, 3).unwrap();
        assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
        let constant = geo(0, 1).expand(40);
        assert!(coeff_growth_abscissa(&constant, 5).unwrap().abs() < 1e-12);
        assert!(coeff_growth_abscissa(&geo(1, 2).expand(10), 3).is_err());
        let zero = GradedCoefficients::<BigRational>::from_coeffs(vec![QPoly::zero(); 30]);
        assert!(matches!(
            coeff_growth_abscissa(&zero, 3),
            Err(crate::Error::UndefinedGrowth(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let z = Z::new(
            P::from_int_terms(&[(0, 0, 1), (-3, 2, 7), (5, 5, -2)]),
            vec![(2, 3), (1, 2)],
            BigRational::new(BigInt::from(3), BigInt::from(4)),
            8,
        )
        .unwrap();
        let v = zeta_to_json(&z);
        assert_eq!(zeta_from_json(&v).unwrap(), z);
        let g = z.expand(6);
        assert_eq!(graded_from_json(&graded_to_json(&g)).unwrap(), g);
    }

    fn arb_zeta() -> impl Strategy<Value = Z> {
        let term = (-3i64..4, 0i64..4, -3i64..4);
        (
            prop::collection::vec(term, 1..4),
            prop::collection::vec((-2i64..3, 1i64..4), 0..3),
            -2i64..3,
        )
            .prop_filter_map("nonzero", |(terms, den, e)| {
                let mut num = P::from_int_terms(&terms);
                num.add_term(0, 0, BigRational::from_integer(1.into()));
                let z = Z::new(num, den, BigRational::from_integer(1.into()), e).ok()?;
                (!z.is_zero()).then_some(z)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn expansion_of_product_is_graded_product(a in arb_zeta(), b in arb_zeta(), k in 0usize..9) {
            let lhs = a.mul(&b).expand(k);
            let rhs = a.expand(k).graded_mul(&b.expand(k));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn expansion_matches_brute_series(a in arb_zeta(), k in 0usize..9) {
            prop_assert_eq!(as_bivariate(&a.expand(k)), brute_series(&a, k as i64));
        }

        #[test]
        fn inverse_substitution_is_an_involution(a in arb_zeta()) {
            if let Ok(once) = a.inverse_substitute() {
                prop_assert_eq!(once.inverse_substitute().unwrap(), a);
            }
        }
    }
}
