//! Coadjoint orbit census at finite level.
//!
//! Irreducible representations of `exp(p^m L)` at level `N` correspond to
//! orbits of functionals; an orbit of size `q^{2k}` carries one representation
//! of dimension `q^k`. Counting functionals by orbit exponent and dividing by
//! `q^{2k}` gives the number of irreducibles of each dimension.

mod census;
mod shell;

pub use census::{
    census_at, census_vs_formula, divisor_type_histogram, fiber_histogram, fiber_histogram_brute, formula_counts, level_census,
    residue_rank_census, stable_coeffs, CensusReport, CensusRow, Counts, DimCounts, Estimate, StableCoefficients,
    Strategy, TypeHistogram, EXHAUSTIVE_LIMIT, SHELL_LIFT_LIMIT,
};
pub use shell::{orbit_decomposition, shell_decompose, ResidueAction, ShellDecomposition, SHELL_RESIDUE_LIMIT};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::a2_formulas::A2Variant;
    use crate::finite_lie::{LieKind, LieLattice, Zpl};
    use num_bigint::BigUint;

    fn sl3(p: u64) -> LieLattice {
        LieLattice::make(LieKind::Sl3, p, 1).unwrap()
    }

    #[test]
    fn abelian_level_is_trivial() {
        let c = census_at(&sl3(5), 5, 1, 1, 1, &Strategy::Auto).unwrap();
        assert_eq!(c.exact().unwrap().len(), 1);
        assert_eq!(c.get(0).unwrap(), BigUint::from(390_625u32));
        assert!(c.mass_holds(8));
    }

    #[test]
    fn residue_rank_strata() {
        let ranks = residue_rank_census(&sl3(5), 5).unwrap();
        assert_eq!(ranks.get(&4), Some(&3844));
        assert_eq!(ranks.get(&6), Some(&(390_625 - 1 - 3844)));
        assert_eq!(ranks.get(&0), Some(&1));
        assert!(!ranks.contains_key(&2));
    }

    #[test]
    fn level_two_exhaustive_census() {
        let c = census_at(&sl3(5), 5, 1, 2, 1, &Strategy::Exhaustive).unwrap();
        assert_eq!(c.get(0).unwrap(), BigUint::from(390_625u32));
        assert_eq!(c.get(1).unwrap(), BigUint::from(0u32));
        assert_eq!(c.get(2).unwrap(), BigUint::from(2_402_500u32));
        assert_eq!(c.get(3).unwrap(), BigUint::from(9_669_500u32));
        assert!(c.mass_holds(8));
    }

    #[test]
    fn shell_agrees_with_exhaustive() {
        for kind in [LieKind::Sl3, LieKind::Su3] {
            let l = LieLattice::make(kind, 5, 1).unwrap();
            let a = census_at(&l, 5, 1, 2, 1, &Strategy::Exhaustive).unwrap();
            let b = census_at(&l, 5, 1, 2, 1, &Strategy::Shell).unwrap();
            assert_eq!(a.counts, b.counts, "{kind}");
        }
    }

    #[test]
    fn linearized_fiber_matches_brute_lifts() {
        let l = sl3(5);
        let r2 = Zpl::new(5, 2).unwrap();
        let ranks = |w: &[u64]| {
            let r1 = Zpl::new(5, 1).unwrap();
            crate::finite_lie::functional_orbit_exponent(&l, &r1, w, 0, 1).unwrap()
        };
        let shell = shell_decompose(&l, 5).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for (rep, _) in &shell.residue_orbit_reps {
            let r = ranks(rep);
            if r == 0 || !seen.insert(r) {
                continue;
            }
            assert_eq!(fiber_histogram(&l, &r2, rep).unwrap(), fiber_histogram_brute(&l, &r2, rep).unwrap());
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn montecarlo_is_consistent_with_exact_counts() {
        let l = sl3(5);
        let exact = census_at(&l, 5, 1, 2, 1, &Strategy::Exhaustive).unwrap();
        let mc = census_at(&l, 5, 1, 2, 1, &Strategy::MonteCarlo { samples: 20_000, seed: 7 }).unwrap();
        let Counts::Estimated(est) = &mc.counts else { panic!("expected estimates") };
        for (k, e) in est {
            let truth = exact.get(*k).unwrap().to_string().parse::<f64>().unwrap();
            assert!((e.value - truth).abs() <= 4.0 * e.std_error.max(1.0), "k = {k}: {e:?} vs {truth}");
        }
        let again = census_at(&l, 5, 1, 2, 1, &Strategy::MonteCarlo { samples: 20_000, seed: 7 }).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn infeasible_and_invalid_requests() {
        let l = sl3(5);
        assert!(matches!(
            census_at(&l, 5, 1, 3, 1, &Strategy::Exhaustive),
            Err(crate::Error::Infeasible { .. })
        ));
        assert!(LieLattice::make(LieKind::Sl3, 3, 1)
            .and_then(|l3| census_at(&l3, 3, 1, 2, 1, &Strategy::Auto))
            .is_err());
        assert!(census_at(&l, 5, 1, 2, 0, &Strategy::Auto).is_err());
    }

    #[test]
    fn stable_coefficients_match_the_formula() {
        let r = census_vs_formula(A2Variant::Sl3, 5, 1, 1, 3).unwrap();
        assert!(r.exact_match, "{:?}", r.rows);
        assert_eq!(r.rows[3].formula, (5u64.pow(10) - 5u64.pow(7) - 5u64.pow(6) - 5u64.pow(5) + 625 + 125).to_string());
    }

    #[test]
    fn su3_counts_match_the_formula() {
        let r = census_vs_formula(A2Variant::Su3, 5, 1, 1, 2).unwrap();
        assert!(r.exact_match, "{:?}", r.rows);
        assert_eq!(r.rows[2].census.as_deref(), Some("1627500"));
    }

    #[test]
    fn second_prime_replicates() {
        let r = census_vs_formula(A2Variant::Sl3, 7, 1, 1, 2).unwrap();
        assert!(r.exact_match, "{:?}", r.rows);
    }

    #[test]
    fn json_export() {
        let c = census_at(&sl3(5), 5, 1, 2, 1, &Strategy::Auto).unwrap();
        let v = c.to_json();
        assert_eq!(v["schema_version"], 1);
        let entry = v["counts"].as_array().unwrap().iter().find(|e| e["k"] == 2).unwrap();
        assert_eq!(entry["count"].to_string(), "2402500");
    }
}
