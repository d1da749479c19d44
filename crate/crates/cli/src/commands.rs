use crate::{
    CensusArgs, CharsArgs, CliError, CliResult, DomainArg, EulerArgs, FamilyArg, FieldArg, FormulaArgs, GlobalOpts,
    GroupArg, IntegralArgs, Report, SimMode, SimclassArgs, StrategyArg, SCHEMA_VERSION,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use repzeta::a2_formulas::{funeq_verify, is_prime, theorem_d, A2Variant, Extension, LocalFactorFamily};
use repzeta::euler_global::{
    abscissa_of_product, euler_convolve, partial_sum_fit, Field, pole_factorization, zeta_power_family, CoefficientStream,
    GlobalSpec, StreamScalar,
};
use repzeta::finite_lie::{LieKind, LieLattice};
use repzeta::kirillov_census::{census_at, formula_counts, stable_coeffs, Counts, DimCounts, Strategy};
use repzeta::padic_integral::{integral_truncated, Domain, Families, IntegralSpec};
use repzeta::similarity_shadows::classes::{classes_at_level, FiberOptions};
use repzeta::similarity_shadows::clifford::{clifford_assemble, shadow_characters, CliffordOptions};
use repzeta::similarity_shadows::dixon::{char_degrees, standard_generators, CharacterDegrees, DixonOptions};
use repzeta::similarity_shadows::fit::{transition_polynomials, transitions_csv, FitOptions};
use repzeta::similarity_shadows::shadows::{shadow_census, CensusOptions, ShadowCatalogue};
use repzeta::zeta_core::zeta_to_json;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

fn ok(json: Value, csv: Option<String>) -> CliResult<Report> {
    Ok(Report { json, csv, verified: true })
}

fn variant_of(kind: LieKind) -> Option<A2Variant> {
    match kind {
        LieKind::Sl3 => Some(A2Variant::Sl3),
        LieKind::Su3 => Some(A2Variant::Su3),
        LieKind::Gl3 => None,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

pub fn formula(a: &FormulaArgs) -> CliResult<Report> {
    let variant: A2Variant = a.variant.parse()?;
    let m = required(a.m, "m")?;
    if m < 1 {
        return Err(usage("m must be >= 1; the prefactor-free model is available through `euler`"));
    }
    if a.q < 2 {
        return Err(usage("q must be >= 2"));
    }
    let z = theorem_d::<BigRational>(variant, m)?;
    let coeffs = z.expand(a.expand).evaluate_at(a.q as i64);
    let mut csv = String::from("k,value\n");
    for (k, c) in coeffs.iter().enumerate() {
        writeln!(csv, "{k},{c}").ok();
    }
    let poles = z.poles(a.q)?;
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "variant": variant,
        "m": m,
        "q": a.q,
        "zeta": zeta_to_json(&z),
        "functional_equation": funeq_verify::<BigRational>(variant, m)?,
        "candidate_poles": poles.candidate_poles.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "abscissa": poles.abscissa.map(|r| r.to_string()),
        "coefficients": coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    ok(json, Some(csv))
}

fn strategy(a: StrategyArg, samples: u64, seed: Option<u64>) -> Strategy {
    match a {
        StrategyArg::Auto => Strategy::Auto,
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Shell => Strategy::Shell,
        StrategyArg::Montecarlo => Strategy::MonteCarlo { samples, seed: seed.unwrap_or(0) },
    }
}

fn census_csv(c: &DimCounts) -> String {
    let mut out = String::new();
    match &c.counts {
        Counts::Exact(map) => {
            out.push_str("k,count\n");
            for (k, v) in map {
                writeln!(out, "{k},{v}").ok();
            }
        }
        Counts::Estimated(map) => {
            out.push_str("k,estimate,std_error\n");
            for (k, e) in map {
                writeln!(out, "{k},{},{}", e.value, e.std_error).ok();
            }
        }
    }
    out
}

pub fn census(a: &CensusArgs, g: &GlobalOpts) -> CliResult<Report> {
    let kind: LieKind = a.kind.parse()?;
    let p = required(a.p, "p")?;
    let m = required(a.m, "m")?;
    let level = required(a.level, "N")?;
    let lattice = LieLattice::make(kind, p, a.f)?;
    let strat = strategy(a.strategy, a.samples, g.seed);
    let counts = census_at(&lattice, p, a.f, level, m, &strat)?;
    let dim = lattice.dim();
    let mut json = counts.to_json();
    let exact = counts.exact().is_some();
    json["mass_conserved"] = if exact { json!(counts.mass_holds(dim)) } else { Value::Null };
    let mut verified = !exact || counts.mass_holds(dim);
    if a.verify {
        let variant = variant_of(kind).ok_or_else(|| usage("--verify needs kind sl3 or su3"))?;
        if !exact {
            return Err(usage("--verify needs an exact strategy"));
        }
        let stable = stable_coeffs(&lattice, p, a.f, m, level, &strat)?;
        let k_max = stable.stable.keys().max().copied().unwrap_or(0);
        let formula = formula_counts(variant, p.pow(a.f), m, k_max as usize)?;
        let rows: Vec<Value> = stable
            .stable
            .iter()
            .map(|(k, c)| {
                let f = &formula[*k as usize];
                json!({"k": k, "census": c.to_string(), "formula": f.to_string(), "matches": BigInt::from(c.clone()) == *f})
            })
            .collect();
        let all = rows.iter().all(|r| r["matches"] == json!(true)) && stable.upper.mass_holds(dim);
        verified &= all;
        json["verification"] = json!({"levels": [level, level + 1], "stable": rows, "exact_match": all});
    }
    Ok(Report { json, csv: Some(census_csv(&counts)), verified })
}

fn parse_cosets(text: &str) -> CliResult<Vec<(u64, Vec<u64>)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (x, y) = part.split_once(':').ok_or_else(|| usage(format!("coset {part:?} must look like x:y1,...,yd")))?;
            let x = x.trim().parse().map_err(|_| usage(format!("bad residue {x:?}")))?;
            let y = y
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| usage(format!("bad residue {c:?}"))))
                .collect::<CliResult<Vec<u64>>>()?;
            Ok((x, y))
        })
        .collect()
}

pub fn integral(a: &IntegralArgs) -> CliResult<Report> {
    let kind: LieKind = a.kind.parse()?;
    let p = required(a.p, "p")?;
    let level = required(a.level, "N")?;
    let lattice = LieLattice::make(kind, p, 1)?;
    let mut spec = IntegralSpec::new(lattice, p, level, a.r, a.t);
    spec.domain = match (&a.cosets, a.domain) {
        (Some(c), _) => Domain::Cosets(parse_cosets(c)?),
        (None, DomainArg::Full) => Domain::Full,
        (None, DomainArg::UnitX) => Domain::UnitX,
        (None, DomainArg::PrimitiveY) => Domain::PrimitiveY,
    };
    if a.trivial_families {
        spec.families = Families::Trivial;
    }
    let res = integral_truncated(&spec)?;
    let within = a.tolerance.map(|t| res.band_width() <= t);
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind.to_string(),
        "p": p,
        "N": level,
        "r": a.r,
        "t": a.t,
        "domain": to_value(&spec.domain)?,
        "families": to_value(&spec.families)?,
        "result": to_value(&res)?,
        "band_width": res.band_width(),
        "within_tolerance": within,
    });
    Ok(Report { json, csv: None, verified: within.unwrap_or(true) })
}

fn fiber_opts(seed: Option<u64>) -> FiberOptions {
    let mut o = FiberOptions::default();
    if let Some(s) = seed {
        o.seed = s;
    }
    o
}

fn dixon_opts(seed: Option<u64>, order_limit: Option<usize>) -> DixonOptions {
    let mut o = DixonOptions::default();
    if let Some(s) = seed {
        o.seed = s;
    }
    if let Some(l) = order_limit {
        o.order_limit = l;
    }
    o
}

fn mat_text(m: &[u64]) -> String {
    m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn simclass(a: &SimclassArgs, g: &GlobalOpts) -> CliResult<Report> {
    let q = required(a.q, "q")?;
    match a.mode {
        SimMode::Classes => {
            let classes = classes_at_level(q, a.level)?;
            let mut cat = ShadowCatalogue::new(q, true);
            let mut csv = String::from("index,representative,size,shadow\n");
            let mut rows = Vec::new();
            for (i, c) in classes.iter().enumerate() {
                let s = cat.classify(&c.stabilizer_algebra, c.level);
                writeln!(csv, "{i},{},{},{s}", mat_text(&c.representative), c.size).ok();
                rows.push(json!({"index": i, "representative": c.representative, "size": c.size.to_string(), "shadow": s}));
            }
            let json = json!({"schema_version": SCHEMA_VERSION, "q": q, "level": a.level, "count": classes.len(), "classes": rows});
            ok(json, Some(csv))
        }
        SimMode::Shadows => {
            let mut opts = CensusOptions { samples_per_shadow: a.samples.max(1), ..CensusOptions::default() };
            if let Some(s) = g.seed {
                opts.seed = s;
            }
            let census = shadow_census(q, a.level, &opts)?;
            let mut json: Value = serde_json::from_str(&census.catalogue.to_json()?).map_err(|e| CliError::Io(e.to_string()))?;
            json["level"] = json!(a.level);
            json["count"] = json!(census.count());
            json["per_level"] = json!(census.per_level);
            let mut csv = String::from("id,first_level,order,algebra_dim\n");
            for e in &census.catalogue.entries {
                let f = &e.shadow.fingerprint;
                writeln!(csv, "{},{},{},{}", e.shadow.id, e.first_level, f.order, f.structure.dim).ok();
            }
            ok(json, Some(csv))
        }
        SimMode::Transitions => {
            let opts = FitOptions { sources_per_shadow: a.samples.max(1), fiber: fiber_opts(g.seed), ..FitOptions::default() };
            let fit = transition_polynomials(&a.fit_q, &a.holdout_q, &opts)?;
            let pairs: Vec<Value> = fit
                .counts
                .iter()
                .map(|(k, c)| {
                    Ok(json!({
                        "source": to_value(&k.0)?,
                        "target": to_value(&k.1)?,
                        "count": c.to_string(),
                        "multiplier": fit.multipliers.get(k).map(|m| m.to_string()),
                    }))
                })
                .collect::<CliResult<_>>()?;
            let holdout_ok = fit.holdout.is_empty() || fit.holdout_exact();
            let json = json!({
                "schema_version": SCHEMA_VERSION,
                "fit_q": fit.fit_q,
                "holdout_q": fit.holdout_q,
                "violations": fit.violations(),
                "unfitted": fit.unfitted.len(),
                "residue_classes_merged": fit.residue_classes_merged,
                "holdout_exact": holdout_ok,
                "polynomials": pairs,
                "holdout": to_value(&fit.holdout)?,
            });
            let verified = !a.verify || (holdout_ok && fit.violations() == 0 && fit.unfitted.is_empty());
            Ok(Report { json, csv: Some(transitions_csv(&fit)), verified })
        }
        SimMode::Clifford => {
            let opts = CliffordOptions { dixon: dixon_opts(g.seed, None), ..CliffordOptions::default() };
            let asm = clifford_assemble(q, a.level, &opts)?;
            let mut csv = String::from("dimension,coefficient\n");
            for (n, c) in &asm.terms {
                writeln!(csv, "{n},{c}").ok();
            }
            let mut json = to_value(&asm)?;
            json["schema_version"] = json!(SCHEMA_VERSION);
            json["exact"] = json!(asm.exact());
            json["exploratory"] = json!(a.level > 2);
            Ok(Report { json, csv: Some(csv), verified: !a.verify || asm.exact() })
        }
    }
}

fn degree_rows(label: &str, d: &CharacterDegrees, csv: &mut String) {
    let mut mult: BTreeMap<u64, usize> = BTreeMap::new();
    for &x in &d.degrees {
        *mult.entry(x).or_default() += 1;
    }
    for (x, k) in mult {
        writeln!(csv, "{label},{},{x},{k}", d.order).ok();
    }
}

fn degrees_consistent(d: &CharacterDegrees) -> bool {
    d.sum_of_squares() == d.order && d.degrees.len() == d.class_count
}

pub fn chars(a: &CharsArgs, g: &GlobalOpts) -> CliResult<Report> {
    let p = required(a.p, "p")?;
    if !is_prime(p) {
        return Err(usage(format!("p = {p} is not prime")));
    }
    let opts = dixon_opts(g.seed, Some(a.order_limit));
    let mut csv = String::from("group,order,degree,multiplicity\n");
    match a.group {
        GroupArg::Gl3 | GroupArg::Sl3 => {
            let special = matches!(a.group, GroupArg::Sl3);
            let d = char_degrees(p, &standard_generators(p, special), &opts)?;
            let label = if special { "sl3" } else { "gl3" };
            degree_rows(label, &d, &mut csv);
            let consistent = degrees_consistent(&d);
            let mut json = to_value(&d)?;
            json["schema_version"] = json!(SCHEMA_VERSION);
            json["group"] = json!(label);
            json["consistent"] = json!(consistent);
            Ok(Report { json, csv: Some(csv), verified: consistent })
        }
        GroupArg::Shadows => {
            let census = shadow_census(p, a.level, &CensusOptions::default())?;
            let chars = shadow_characters(&census.catalogue, &opts)?;
            let mut consistent = true;
            for c in &chars {
                degree_rows(&format!("shadow{}-special", c.shadow), &c.special, &mut csv);
                consistent &= degrees_consistent(&c.special);
                if let Some(f) = &c.full {
                    degree_rows(&format!("shadow{}", c.shadow), f, &mut csv);
                    consistent &= degrees_consistent(f);
                }
            }
            let json = json!({
                "schema_version": SCHEMA_VERSION,
                "p": p,
                "shadows": to_value(&chars)?,
                "consistent": consistent,
            });
            Ok(Report { json, csv: Some(csv), verified: consistent })
        }
    }
}

fn family(f: FamilyArg) -> CliResult<LocalFactorFamily<BigRational>> {
    Ok(match f {
        FamilyArg::Model => LocalFactorFamily::model(A2Variant::Sl3),
        FamilyArg::ModelSu3 => LocalFactorFamily::model(A2Variant::Su3),
        FamilyArg::Zeta => zeta_power_family(1)?,
        FamilyArg::Zeta2 => zeta_power_family(2)?,
        FamilyArg::Trivial => {
            LocalFactorFamily::custom("trivial", repzeta::zeta_core::ZetaRational::one(), Extension::ResidueCardinality)
        }
    })
}

fn local_report(fam: &LocalFactorFamily<BigRational>, a: &EulerArgs) -> CliResult<Value> {
    let abscissa = abscissa_of_product(fam).ok();
    let poles = match abscissa {
        Some(_) => Some(pole_factorization(fam, a.remainder_s, a.max_prime)?),
        None => None,
    };
    Ok(json!({
        "family": fam.name,
        "abscissa": abscissa.map(|r| r.to_string()),
        "e1": poles.as_ref().map(|p| p.e1),
        "e2": poles.as_ref().map(|p| p.e2),
        "epsilon": poles.as_ref().map(|p| p.epsilon),
        "pole_factorization": poles.map(|p| to_value(&p)).transpose()?,
    }))
}

fn stream_outputs<T: StreamScalar + std::fmt::Display>(
    s: &CoefficientStream<T>,
    a: &EulerArgs,
) -> CliResult<(Value, Value, String)> {
    let fit = if a.bound >= 10_000 { Some(partial_sum_fit(s, a.bound)?) } else { None };
    let cum = s.cumulative();
    let mut csv = String::from("N,R_N,R_N/(N log N)\n");
    let mut n = 10usize;
    let mut marks = Vec::new();
    while n <= a.bound {
        marks.push(n);
        n *= 10;
    }
    if marks.last() != Some(&a.bound) && a.bound >= 2 {
        marks.push(a.bound);
    }
    for n in marks {
        let nf = n as f64;
        writeln!(csv, "{n},{},{}", cum[n], cum[n] / (nf * nf.ln())).ok();
    }
    if let Some(path) = &a.coefficients {
        let mut rows = String::from("n,r_n\n");
        for (n, v) in s.values().iter().enumerate().skip(1) {
            writeln!(rows, "{n},{v}").ok();
        }
        std::fs::write(path, rows).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let partial: Vec<Value> = a.s_eval.iter().map(|&x| json!({"s": x, "value": s.partial_value(x)})).collect();
    Ok((fit.map(|f| to_value(&f)).transpose()?.unwrap_or(Value::Null), json!(partial), csv))
}

fn ramified(spec: &GlobalSpec) -> Vec<u64> {
    match spec.field {
        Field::Rationals => Vec::new(),
        Field::Quadratic(d) => (2..=d.unsigned_abs()).filter(|&p| is_prime(p) && d.unsigned_abs() % p == 0).collect(),
    }
}

pub fn euler(a: &EulerArgs) -> CliResult<Report> {
    let (spec, families) = match a.field {
        FieldArg::Rationals => {
            let fam = family(a.family)?;
            (GlobalSpec::rationals(fam.clone(), a.copies.unwrap_or(1)), vec![("all", fam)])
        }
        FieldArg::Quadratic => {
            if !matches!(a.family, FamilyArg::Model) {
                return Err(usage("quadratic fields use the sl3/su3 model pair; drop --family"));
            }
            let d = required(a.discriminant, "D")?;
            let spec = GlobalSpec::quadratic_model(d, a.copies.unwrap_or(2))?;
            let fams = vec![("split", spec.split_family.clone()), ("inert", spec.inert_family.clone().expect("quadratic"))];
            (spec, fams)
        }
    };
    let spec = spec.with_excluded(a.excluded.iter().copied());
    let exact = matches!(a.family, FamilyArg::Zeta | FamilyArg::Zeta2 | FamilyArg::Trivial) && matches!(a.field, FieldArg::Rationals);
    let (fit, partial, csv) = if exact {
        stream_outputs(&euler_convolve::<u64>(&spec, a.bound)?, a)?
    } else {
        stream_outputs(&euler_convolve::<f64>(&spec, a.bound)?, a)?
    };
    let mut locals = Vec::new();
    for (role, fam) in &families {
        let mut r = local_report(fam, a)?;
        r["role"] = json!(role);
        locals.push(r);
    }
    let agree = |key: &str| {
        let first = &locals[0][key];
        if locals.iter().all(|l| l[key] == *first) {
            first.clone()
        } else {
            Value::Null
        }
    };
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "model": matches!(a.family, FamilyArg::Model | FamilyArg::ModelSu3),
        "field": to_value(&spec.field)?,
        "excluded": spec.excluded,
        "ramified": ramified(&spec),
        "archimedean_copies": spec.archimedean_copies,
        "N": a.bound,
        "abscissa": agree("abscissa"),
        "e1": agree("e1"),
        "e2": agree("e2"),
        "epsilon": agree("epsilon"),
        "c_estimate": fit.get("c_estimate").cloned().unwrap_or(Value::Null),
        "fit": fit,
        "local_factors": locals,
        "partial_values": partial,
    });
    ok(json, Some(csv))
}
