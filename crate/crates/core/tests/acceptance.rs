use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repzeta::a2_formulas::{funeq_verify, theorem_d, A2Variant, LocalFactorFamily};
use repzeta::euler_global::{
    abscissa_of_product, euler_convolve, partial_sum_fit, pole_factorization, riemann_zeta_check, zeta_power_family,
    GlobalSpec,
};
use repzeta::finite_lie::{
    alternating_exponents, generic_exponents, mat_mul, smith_normal_form, LieKind, LieLattice, LocalRing, Matrix, Zpl,
};
use repzeta::kirillov_census::{census_at, formula_counts, residue_rank_census, stable_coeffs, DimCounts, Strategy};
use repzeta::similarity_shadows::classes::{classes_at_level, FiberOptions};
use repzeta::similarity_shadows::clifford::{clifford_assemble, shadow_characters, sl3_order, CliffordOptions};
use repzeta::similarity_shadows::dixon::{char_degrees, standard_generators, DixonOptions};
use repzeta::similarity_shadows::fit::{table_for, transition_polynomials, FitOptions};
use repzeta::similarity_shadows::shadows::{shadow_census, transition_table, CensusOptions, ShadowCatalogue};
use repzeta::zeta_core::coeff_growth_abscissa;
use std::io::Write;
use std::time::{Duration, Instant};

type Q = BigRational;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fail(err: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {err}"))
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn functional_equation() -> Outcome {
    let mut bad = Vec::new();
    for v in [A2Variant::Sl3, A2Variant::Su3] {
        for m in 1..=5 {
            match funeq_verify::<Q>(v, m) {
                Ok(true) => {}
                Ok(false) => bad.push(format!("{v:?} m={m}")),
                Err(e) => return fail(e),
            }
        }
    }
    outcome(bad.is_empty(), format!("10 cases, failures {bad:?}"))
}

fn poles_and_abscissa() -> Outcome {
    let expected = vec![Ratio::new(1, 2), Ratio::new(2, 3)];
    let mut notes = Vec::new();
    let mut ok = true;
    for v in [A2Variant::Sl3, A2Variant::Su3] {
        let z = match theorem_d::<Q>(v, 1) {
            Ok(z) => z,
            Err(e) => return fail(e),
        };
        let r = match z.poles(5) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        ok &= r.candidate_poles == expected && r.abscissa == Some(Ratio::new(2, 3));
        let g = match coeff_growth_abscissa(&z.expand(60), 5) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        ok &= (g - 2.0 / 3.0).abs() <= 0.05;
        let poles: Vec<String> = r.candidate_poles.iter().map(|x| x.to_string()).collect();
        notes.push(format!("{v:?}: poles {{{}}} growth {g:.4}", poles.join(", ")));
    }
    outcome(ok, notes.join("; "))
}

fn compare_to_formula(
    variant: A2Variant,
    p: u64,
    k_max: u32,
    pinned: &[(u32, BigUint)],
    censuses: &mut Vec<DimCounts>,
) -> Result<(bool, String), repzeta::Error> {
    let kind = match variant {
        A2Variant::Sl3 => LieKind::Sl3,
        A2Variant::Su3 => LieKind::Su3,
    };
    let lattice = LieLattice::make(kind, p, 1)?;
    let stable = stable_coeffs(&lattice, p, 1, 1, 2, &Strategy::Auto)?;
    let formula = formula_counts(variant, p, 1, k_max as usize)?;
    let mut ok = true;
    for k in 0..=k_max {
        let c = stable.stable.get(&k).map(|c| BigInt::from(c.clone()));
        ok &= c.as_ref() == Some(&formula[k as usize]);
    }
    for (k, v) in pinned {
        ok &= stable.stable.get(k) == Some(v);
    }
    let shown: Vec<String> = (0..=k_max).map(|k| stable.stable.get(&k).map_or("-".into(), |c| c.to_string())).collect();
    censuses.push(stable.lower);
    censuses.push(stable.upper);
    Ok((ok, format!("{variant:?} p={p}: [{}]", shown.join(", "))))
}

fn census_vs_formula_check(censuses: &mut Vec<DimCounts>) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let t = Instant::now();
    let lattice = LieLattice::make(LieKind::Sl3, 5, 1).expect("sl3");
    match census_at(&lattice, 5, 1, 2, 1, &Strategy::Exhaustive) {
        Ok(c) => {
            let el = t.elapsed();
            ok &= el < Duration::from_secs(60);
            notes.push(format!("exhaustive level 2 in {el:.1?}"));
            censuses.push(c);
        }
        Err(e) => return fail(e),
    }
    let top = 5u64.pow(10) - 5u64.pow(7) - 5u64.pow(6) - 5u64.pow(5) + 5u64.pow(4) + 5u64.pow(3);
    let t = Instant::now();
    let cases: [(A2Variant, u64, u32, Vec<(u32, BigUint)>); 3] = [
        (A2Variant::Sl3, 5, 3, vec![(0, big(390_625)), (1, big(0)), (2, big(2_402_500)), (3, big(top))]),
        (A2Variant::Sl3, 7, 2, vec![]),
        (A2Variant::Su3, 5, 2, vec![(2, big(1_627_500))]),
    ];
    for (v, p, k, pinned) in cases {
        match compare_to_formula(v, p, k, &pinned, censuses) {
            Ok((good, note)) => {
                ok &= good;
                notes.push(note);
            }
            Err(e) => return fail(e),
        }
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(1800);
    notes.push(format!("shell level 3 checks in {el:.1?}"));
    outcome(ok, notes.join("; "))
}

fn rank_strata() -> Outcome {
    let lattice = LieLattice::make(LieKind::Sl3, 5, 1).expect("sl3");
    let ranks = match residue_rank_census(&lattice, 5) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let q: i64 = 5;
    let r4 = q.pow(5) + q.pow(4) + q.pow(3) - q * q - q - 1;
    let r6 = q.pow(8) - q.pow(5) - q.pow(4) - q.pow(3) + q * q + q;
    let total: u64 = ranks.values().sum();
    let got4 = ranks.get(&4).copied().unwrap_or(0);
    let got6 = ranks.get(&6).copied().unwrap_or(0);
    let ok = total == 390_625 && got4 == 3844 && got6 == 390_625 - 1 - 3844 && got4 as i64 == r4 && got6 as i64 == r6;
    outcome(ok, format!("rank 4: {got4}, rank 6: {got6}, total {total}"))
}

fn shadows_check() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    match shadow_census(5, 3, &CensusOptions::default()) {
        Ok(c) => {
            ok &= c.count() == 10;
            notes.push(format!("census(5, 3) = {}", c.count()));
        }
        Err(e) => return fail(e),
    }
    for level in 1..=2 {
        let sources = match classes_at_level(2, level) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let mut cat = ShadowCatalogue::new(2, true);
        match transition_table(&sources, &mut cat, &FiberOptions::default()) {
            Ok(t) => {
                ok &= t.violations.is_empty();
                notes.push(format!("q=2 l={level}: {} sources, {} violations", sources.len(), t.violations.len()));
            }
            Err(e) => return fail(e),
        }
    }
    for q in [5, 7] {
        let opts = FitOptions { sources_per_shadow: 3, ..FitOptions::default() };
        match table_for(q, &opts) {
            Ok(t) => {
                let multi = t.sources.values().filter(|&&n| n > 1).count();
                ok &= t.violations.is_empty() && multi > 0;
                notes.push(format!("q={q}: {} violations over {} shadows", t.violations.len(), t.sources.len()));
            }
            Err(e) => return fail(e),
        }
    }
    match transition_polynomials(&[3, 5, 7, 13, 17, 19, 23], &[11], &FitOptions::default()) {
        Ok(fit) => {
            ok &= fit.violations() == 0 && fit.unfitted.is_empty() && fit.holdout_exact();
            notes.push(format!(
                "{} fitted pairs, {} unfitted, holdout q=11 {}/{} exact",
                fit.counts.len(),
                fit.unfitted.len(),
                fit.holdout.iter().filter(|h| h.matches).count(),
                fit.holdout.len()
            ));
        }
        Err(e) => return fail(e),
    }
    outcome(ok, notes.join("; "))
}

fn character_degrees() -> Outcome {
    let opts = DixonOptions::default();
    let gl = match char_degrees(2, &standard_generators(2, false), &opts) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let mut ok = gl.degrees == vec![1, 3, 3, 6, 7, 8] && gl.sum_of_squares() == 168;
    let mut notes = vec![format!("GL3(F2): {:?}", gl.degrees)];
    let census = match shadow_census(5, 3, &CensusOptions::default()) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let chars = match shadow_characters(&census.catalogue, &opts) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let mut checked = 0;
    for ch in &chars {
        for d in std::iter::once(&ch.special).chain(ch.full.as_ref()) {
            ok &= d.sum_of_squares() == d.order && d.degrees.len() == d.class_count;
            checked += 1;
        }
    }
    notes.push(format!("{} shadows, {checked} groups consistent", chars.len()));
    outcome(ok, notes.join("; "))
}

fn clifford_check() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for level in 1..=2 {
        match clifford_assemble(5, level, &CliffordOptions::default()) {
            Ok(a) => {
                let order = sl3_order(5) * 5u128.pow(8 * (level - 1));
                let m = &a.moments;
                let good = a.exact() && m.classes_match == Some(true) && m.order_match && m.group_order == order.to_string();
                ok &= good;
                notes.push(format!(
                    "l={level}: zeta(0) = {} vs classes {:?}, zeta(-2) = {}{}",
                    m.at_zero,
                    m.class_number,
                    m.at_minus_two,
                    if good { String::new() } else { format!(" discrepancies {:?}", a.violations) }
                ));
            }
            Err(e) => return fail(e),
        }
    }
    outcome(ok, notes.join("; "))
}

fn global_analytics() -> Outcome {
    let model = LocalFactorFamily::model(A2Variant::Sl3);
    let mut notes = Vec::new();
    let abscissa = match abscissa_of_product(&model) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let mut ok = abscissa == Ratio::new(1, 1);
    notes.push(format!("abscissa {abscissa}"));
    match pole_factorization(&model, 0.9, 100_000) {
        Ok(f) => {
            ok &= (f.e1, f.e2) == (1, 1) && f.epsilon >= 0.1 && f.converges;
            notes.push(format!("(e1, e2) = ({}, {}), epsilon {:.3}", f.e1, f.e2, f.epsilon));
        }
        Err(e) => return fail(e),
    }
    let n = 10_000_000;
    let divisor = euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(2).expect("zeta^2"), 0), n)
        .and_then(|s| partial_sum_fit(&s, n));
    match divisor {
        Ok(f) => {
            ok &= (f.c_estimate - 1.0).abs() <= 0.05;
            notes.push(format!("divisor c = {:.4}", f.c_estimate));
        }
        Err(e) => return fail(e),
    }
    let modelled = euler_convolve::<f64>(&GlobalSpec::rationals(model, 1), n).and_then(|s| partial_sum_fit(&s, n));
    match modelled {
        Ok(f) => {
            ok &= f.drift_decreasing && f.normalization_ok && f.c_estimate > 0.0;
            let ratios: Vec<String> = f.ratios.iter().map(|r| format!("{:.4}", r.2)).collect();
            notes.push(format!("model R_N/(N log N) at decades [{}], drift decreasing {}", ratios.join(", "), f.drift_decreasing));
        }
        Err(e) => return fail(e),
    }
    outcome(ok, notes.join("; "))
}

fn random_matrix(z: &Zpl, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<u64> {
    let data = (0..rows * cols)
        .map(|_| {
            let x = rng.gen_range(0..z.cardinality());
            if rng.gen_bool(0.3) {
                z.mul(&x, &z.p())
            } else {
                x
            }
        })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

fn properties(censuses: &[DimCounts]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let z = Zpl::new(5, 3).expect("ring");
    let mut snf_ok = true;
    for _ in 0..10_000 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = random_matrix(&z, r, c, &mut rng);
        let s = smith_normal_form(&z, &m);
        snf_ok &= mat_mul(&z, &mat_mul(&z, &s.u, &m), &s.v) == s.diagonal(&z, r, c)
            && generic_exponents(&z, s.u.data(), r, r).iter().all(|&e| e == 0)
            && generic_exponents(&z, s.v.data(), c, c).iter().all(|&e| e == 0);
    }
    let z2 = Zpl::new(5, 2).expect("ring");
    let mut pair_ok = true;
    for _ in 0..10_000 {
        let n = 2 * rng.gen_range(1..=4);
        let mut m = Matrix::filled(n, n, 0u64);
        for i in 0..n {
            for j in i + 1..n {
                let mut x = rng.gen_range(0..z2.cardinality());
                if rng.gen_bool(0.4) {
                    x = z2.mul(&x, &5);
                }
                m.set(i, j, x);
                m.set(j, i, z2.neg(&x));
            }
        }
        let e = smith_normal_form(&z2, &m).exponents;
        pair_ok &= e.chunks(2).all(|c| c[0] == c[1]) && alternating_exponents(&z2, &m).is_ok_and(|a| a == e);
    }
    let mass_ok = !censuses.is_empty() && censuses.iter().all(|c| c.mass_holds(8));
    let zeta = riemann_zeta_check(1_000_000, 2.0);
    let zeta_ok = zeta.as_ref().is_ok_and(|c| c.error.is_some_and(|e| e < 1e-6));
    outcome(
        snf_ok && pair_ok && mass_ok && zeta_ok,
        format!(
            "SNF {snf_ok}, pairing {pair_ok}, mass over {} censuses {mass_ok}, zeta(2) error {:?}",
            censuses.len(),
            zeta.ok().and_then(|c| c.error)
        ),
    )
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let pass = o.pass && el <= limit;
    let line = format!(
        "criterion {id} [{}] {name} ({el:.1?} of {limit:?}): {}\n",
        if pass { "PASS" } else { "FAIL" },
        o.detail
    );
    std::io::stderr().write_all(line.as_bytes()).ok();
    pass
}

#[test]
fn acceptance_criteria() {
    let mut censuses = Vec::new();
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        run(1, "functional equation", Duration::from_secs(1), functional_equation),
        run(2, "poles and abscissa", Duration::from_secs(10), poles_and_abscissa),
        run(3, "census vs formula", min(31), || census_vs_formula_check(&mut censuses)),
        run(4, "rank strata", min(1), rank_strata),
        run(5, "shadows and transitions", min(30), shadows_check),
        run(6, "character degrees", min(10), character_degrees),
        run(7, "clifford assembly", min(60), clifford_check),
        run(8, "global analytics", min(15), global_analytics),
        run(9, "property suites", min(5), || properties(&censuses)),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &p)| !p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
