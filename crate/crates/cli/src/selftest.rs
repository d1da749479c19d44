//! Fast invariant suites behind `--selftest`.

use crate::{Command, Report, SCHEMA_VERSION};
use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use repzeta::a2_formulas::{funeq_verify, theorem_d, A2Variant, LocalFactorFamily};
use repzeta::euler_global::{
    abscissa_of_product, archimedean_stream, euler_convolve, riemann_zeta_check, zeta_power_family, GlobalSpec,
};
use repzeta::finite_lie::{LieKind, LieLattice};
use repzeta::kirillov_census::{census_at, shell_decompose, Strategy};
use repzeta::padic_integral::{integral_truncated, Domain, Families, IntegralSpec};
use repzeta::similarity_shadows::classes::{classes_at_level, FiberOptions};
use repzeta::similarity_shadows::dixon::{char_degrees, standard_generators, DixonOptions};
use repzeta::similarity_shadows::shadows::{shadow_census, transition_table, CensusOptions, ShadowCatalogue};
use serde_json::json;

type Check = (&'static str, Box<dyn FnOnce() -> bool>);

fn formula_checks() -> Vec<Check> {
    vec![
        (
            "functional_equation_m_le_5",
            Box::new(|| {
                A2Variant::ALL.iter().all(|&v| (1..=5).all(|m| funeq_verify::<BigRational>(v, m).unwrap_or(false)))
            }),
        ),
        (
            "no_linear_term",
            Box::new(|| {
                A2Variant::ALL.iter().all(|&v| {
                    theorem_d::<BigRational>(v, 1).is_ok_and(|z| z.expand(3).evaluate_at(5)[1] == BigRational::from_integer(0.into()))
                })
            }),
        ),
        (
            "abscissa_two_thirds",
            Box::new(|| {
                A2Variant::ALL.iter().all(|&v| {
                    theorem_d::<BigRational>(v, 2)
                        .and_then(|z| z.poles(7))
                        .is_ok_and(|r| r.abscissa == Some(Ratio::new(2, 3)))
                })
            }),
        ),
        ("m_zero_rejected", Box::new(|| theorem_d::<BigRational>(A2Variant::Sl3, 0).is_err())),
    ]
}

fn census_checks() -> Vec<Check> {
    let sl3 = || LieLattice::make(LieKind::Sl3, 5, 1).expect("sl3 over Z_5");
    vec![
        (
            "abelian_level",
            Box::new(move || {
                census_at(&sl3(), 5, 1, 1, 1, &Strategy::Auto).is_ok_and(|c| c.get(0) == Some(BigUint::from(390_625u32)))
            }),
        ),
        (
            "mass_and_shell_agreement",
            Box::new(move || {
                let a = census_at(&sl3(), 5, 1, 2, 1, &Strategy::Exhaustive);
                let b = census_at(&sl3(), 5, 1, 2, 1, &Strategy::Shell);
                matches!((a, b), (Ok(a), Ok(b)) if a.counts == b.counts && a.mass_holds(8))
            }),
        ),
        ("shell_partition", Box::new(move || shell_decompose(&sl3(), 5).is_ok_and(|s| s.total_mass() == 390_625))),
    ]
}

fn integral_checks() -> Vec<Check> {
    let spec = |domain: Domain, families: Families| {
        let mut s = IntegralSpec::new(LieLattice::make(LieKind::Sl3, 5, 1).expect("sl3"), 5, 1, 0.0, 0.0);
        s.domain = domain;
        s.families = families;
        s
    };
    vec![
        (
            "trivial_families_measure_one",
            Box::new(move || integral_truncated(&spec(Domain::Full, Families::Trivial)).is_ok_and(|r| (r.value - 1.0).abs() < 1e-12)),
        ),
        (
            "unit_x_measure",
            Box::new(move || integral_truncated(&spec(Domain::UnitX, Families::Minors)).is_ok_and(|r| (r.value - 0.8).abs() < 1e-12)),
        ),
    ]
}

fn simclass_checks() -> Vec<Check> {
    vec![
        ("shadow_census_q3", Box::new(|| shadow_census(3, 2, &CensusOptions::default()).is_ok_and(|c| c.count() == 10))),
        (
            "uniformity_q2",
            Box::new(|| {
                let mut cat = ShadowCatalogue::new(2, true);
                classes_at_level(2, 1)
                    .and_then(|s| transition_table(&s, &mut cat, &FiberOptions::default()))
                    .is_ok_and(|t| t.violations.is_empty())
            }),
        ),
    ]
}

fn chars_checks() -> Vec<Check> {
    vec![(
        "gl3_f2_degrees",
        Box::new(|| {
            char_degrees(2, &standard_generators(2, false), &DixonOptions::default())
                .is_ok_and(|d| d.degrees == vec![1, 3, 3, 6, 7, 8] && d.sum_of_squares() == 168)
        }),
    )]
}

fn euler_checks() -> Vec<Check> {
    vec![
        (
            "multiplicativity",
            Box::new(|| {
                let spec = GlobalSpec::rationals(zeta_power_family(3).expect("zeta^3"), 0);
                euler_convolve::<u64>(&spec, 10_000).is_ok_and(|s| {
                    (1..=100usize).all(|m| {
                        (1..=100usize).all(|n| num_integer::gcd(m, n) != 1 || s.get(m * n) == s.get(m) * s.get(n))
                    })
                })
            }),
        ),
        (
            "archimedean_dimensions",
            Box::new(|| archimedean_stream::<u64>(10).is_ok_and(|s| s.values()[1..].to_vec() == vec![1, 0, 2, 0, 0, 2, 0, 1, 0, 2])),
        ),
        ("zeta_two", Box::new(|| riemann_zeta_check(100_000, 2.0).is_ok_and(|c| c.error.is_some_and(|e| e <= c.tail_bound + 1e-12)))),
        (
            "model_abscissa_one",
            Box::new(|| abscissa_of_product(&LocalFactorFamily::model(A2Variant::Sl3)).is_ok_and(|a| a == Ratio::new(1, 1))),
        ),
    ]
}

pub fn run(command: &Command) -> Report {
    let (module, checks) = match command {
        Command::Formula(_) => ("a2_formulas", formula_checks()),
        Command::Census(_) => ("kirillov_census", census_checks()),
        Command::Integral(_) => ("padic_integral", integral_checks()),
        Command::Simclass(_) => ("similarity_shadows", simclass_checks()),
        Command::Chars(_) => ("character_degrees", chars_checks()),
        Command::Euler(_) => ("euler_global", euler_checks()),
    };
    let results: Vec<(&str, bool)> = checks.into_iter().map(|(name, f)| (name, f())).collect();
    let passed = results.iter().all(|r| r.1);
    let mut csv = String::from("check,pass\n");
    for (n, p) in &results {
        csv.push_str(&format!("{n},{p}\n"));
    }
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "selftest": module,
        "passed": passed,
        "checks": results.iter().map(|(n, p)| json!({"name": n, "pass": p})).collect::<Vec<_>>(),
    });
    Report { json, csv: Some(csv), verified: passed }
}
