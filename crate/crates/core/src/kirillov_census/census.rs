use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::shell::{shell_decompose, ShellDecomposition, SHELL_RESIDUE_LIMIT};
use crate::a2_formulas::{theorem_d, A2Variant};
use crate::error::{Error, Result};
use crate::finite_lie::{
    orbit_size_exponent, ring_make, smith_normal_form, LieKind, LieLattice, LocalRing, Zpl,
};
use crate::zeta_core::{big_number, SCHEMA_VERSION};

/// Largest level-`M` dual space enumerated point by point.
pub const EXHAUSTIVE_LIMIT: f64 = (1u64 << 24) as f64;
/// Largest number of lifted points the shell strategy visits.
pub const SHELL_LIFT_LIMIT: f64 = (1u64 << 28) as f64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Exhaustive,
    Shell,
    MonteCarlo { samples: u64, seed: u64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::Exhaustive => "exhaustive",
            Strategy::Shell => "shell",
            Strategy::MonteCarlo { .. } => "montecarlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Counts {
    Exact(BTreeMap<u32, BigUint>),
    Estimated(BTreeMap<u32, Estimate>),
}

/// Number of irreducibles of dimension `q^k`, keyed by `k`, at a finite level.
#[derive(Clone, Debug, PartialEq)]
pub struct DimCounts {
    pub lattice: String,
    pub p: u64,
    pub f: u32,
    pub m: u32,
    pub level: u32,
    pub strategy: String,
    pub counts: Counts,
}

impl DimCounts {
    pub fn q(&self) -> u64 {
        self.p.pow(self.f)
    }

    pub fn exact(&self) -> Option<&BTreeMap<u32, BigUint>> {
        match &self.counts {
            Counts::Exact(c) => Some(c),
            Counts::Estimated(_) => None,
        }
    }

    /// Exact count for `k`, zero when absent.
    pub fn get(&self, k: u32) -> Option<BigUint> {
        self.exact().map(|c| c.get(&k).cloned().unwrap_or_default())
    }

    /// `sum_k counts[k] q^{2k} = q^{dN}`.
    pub fn mass_holds(&self, dim: usize) -> bool {
        let Some(c) = self.exact() else { return false };
        let q = BigUint::from(self.q());
        let lhs: BigUint = c.iter().map(|(k, v)| v * q.pow(2 * k)).sum();
        lhs == q.pow(dim as u32 * self.level)
    }

    pub fn to_json(&self) -> Value {
        let counts: Value = match &self.counts {
            Counts::Exact(c) => c.iter().map(|(k, v)| json!({"k": k, "count": big_number(&BigInt::from(v.clone()))})).collect(),
            Counts::Estimated(c) => c
                .iter()
                .map(|(k, e)| json!({"k": k, "estimate": e.value, "std_error": e.std_error}))
                .collect(),
        };
        json!({
            "schema_version": SCHEMA_VERSION,
            "lattice": self.lattice,
            "p": self.p,
            "f": self.f,
            "m": self.m,
            "level": self.level,
            "strategy": self.strategy,
            "exact": self.exact().is_some(),
            "counts": counts,
        })
    }
}

/// Divisor type (sorted elementary-divisor exponents) to number of functionals.
pub type TypeHistogram = BTreeMap<Vec<u32>, u128>;
type Histogram = TypeHistogram;

fn merge(mut a: Histogram, b: Histogram) -> Histogram {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

fn type_at<R: LocalRing>(lattice: &LieLattice, ring: &R, w: &[R::Elem]) -> Vec<u32> {
    let r = lattice.commutator_matrix(ring, w);
    ring.divisor_exponents(r.data(), lattice.dim())
}

fn decode<R: LocalRing>(ring: &R, mut idx: u64, d: usize) -> Vec<R::Elem> {
    let n = ring.cardinality();
    (0..d)
        .map(|_| {
            let x = ring.element(idx % n);
            idx /= n;
            x
        })
        .collect()
}

fn powf(q: u64, e: usize) -> f64 {
    (q as f64).powi(e as i32)
}

fn exhaustive_histogram<R: LocalRing>(lattice: &LieLattice, ring: &R, primitive_only: bool) -> Histogram {
    let d = lattice.dim();
    let total = ring.cardinality().pow(d as u32);
    let chunk = 1 << 14;
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = Histogram::new();
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                let w = decode(ring, idx, d);
                if primitive_only && w.iter().all(|x| ring.valuation(x) > 0) {
                    continue;
                }
                *h.entry(type_at(lattice, ring, &w)).or_default() += 1;
            }
            h
        })
        .reduce(Histogram::new, merge)
}

/// Echelon basis of the span of vectors over a residue field.
fn span_basis<R: LocalRing>(field: &R, vectors: &[Vec<R::Elem>]) -> Vec<Vec<R::Elem>> {
    let mut basis: Vec<Vec<R::Elem>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for v in vectors {
        let mut v = v.clone();
        for (b, &pc) in basis.iter().zip(&pivots) {
            if !field.is_zero(&v[pc]) {
                let f = v[pc].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x = field.sub(x, &field.mul(&f, y));
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !field.is_zero(x)) {
            let inv = field.inv_unit(&v[pc]).expect("nonzero field element");
            for x in v.iter_mut() {
                *x = field.mul(x, &inv);
            }
            for (b, _) in basis.iter_mut().zip(&pivots) {
                if !field.is_zero(&b[pc]) {
                    let f = b[pc].clone();
                    for (x, y) in b.iter_mut().zip(&v) {
                        *x = field.sub(x, &field.mul(&f, y));
                    }
                }
            }
            basis.push(v);
            pivots.push(pc);
        }
    }
    basis
}

/// Histogram of `E` over all lifts of `w0 mod p` to level 2.
///
/// With `U R(w0) V = diag(I_r, p D_1, 0)`, a lift `w0 + p z` has exponent
/// `2r + rank(D_1 + (U R(z) V)_{22} mod p)`, an affine function of `z mod p`.
fn linear_fiber<R: LocalRing>(lattice: &LieLattice, r2: &R, w0: &[R::Elem]) -> Result<Histogram> {
    let d = lattice.dim();
    let r1 = r2.at_level(1);
    let q = r1.cardinality();
    let snf = smith_normal_form(r2, &lattice.commutator_matrix(r2, w0));
    let r = snf.exponents.iter().filter(|&&a| a == 0).count();
    let k = d - r;
    let mut out = Histogram::new();
    let type_of = |rank: usize| -> Vec<u32> {
        let mut t = vec![0; r];
        t.extend(std::iter::repeat(1).take(rank));
        t.extend(std::iter::repeat(2).take(k - rank));
        t
    };
    if k == 0 {
        out.insert(type_of(0), q.pow(d as u32) as u128);
        return Ok(out);
    }
    let u1 = snf.u.map(|x| r2.reduce_into(x, &r1));
    let v1 = snf.v.map(|x| r2.reduce_into(x, &r1));
    let mut base = vec![r1.zero(); k * k];
    for i in 0..k {
        if snf.exponents[r + i] == 1 {
            base[i * k + i] = r1.one();
        }
    }
    let mut images = Vec::with_capacity(d * r1.residue_degree() as usize);
    for idx in 0..d {
        let mut z = vec![r1.zero(); d];
        z[idx] = r1.one();
        let y = crate::finite_lie::mat_mul(&r1, &crate::finite_lie::mat_mul(&r1, &u1, &lattice.commutator_matrix(&r1, &z)), &v1);
        let mut block = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                block.push(y.get(r + i, r + j).clone());
            }
        }
        images.push(block);
    }
    let basis = span_basis(&r1, &images);
    let rho = basis.len();
    let weight = q.pow((d - rho) as u32) as u128;
    let points = q.pow(rho as u32);
    for idx in 0..points {
        let coeffs = decode(&r1, idx, rho);
        let mut v = base.clone();
        for (c, b) in coeffs.iter().zip(&basis) {
            if r1.is_zero(c) {
                continue;
            }
            for (x, y) in v.iter_mut().zip(b) {
                *x = r1.add(x, &r1.mul(c, y));
            }
        }
        let rank = r1.divisor_exponents(&v, k).iter().filter(|&&a| a == 0).count();
        *out.entry(type_of(rank)).or_default() += weight;
    }
    Ok(out)
}

fn brute_fiber<R: LocalRing>(lattice: &LieLattice, ring: &R, w0: &[R::Elem]) -> Result<Histogram> {
    let d = lattice.dim();
    let lower = ring.at_level(ring.level() - 1);
    let p = ring.from_int(ring.p() as i64);
    let total = lower.cardinality().pow(d as u32);
    let mut h = Histogram::new();
    for idx in 0..total {
        let z = decode(&lower, idx, d);
        let w: Vec<R::Elem> = w0
            .iter()
            .zip(&z)
            .map(|(a, b)| ring.add(a, &ring.mul(&p, &ring.lift_from(b, &lower))))
            .collect();
        *h.entry(type_at(lattice, ring, &w)).or_default() += 1;
    }
    Ok(h)
}

/// Divisor-type histogram of all lifts of a residue vector to the level of `ring`.
pub fn fiber_histogram<R: LocalRing>(lattice: &LieLattice, ring: &R, residue: &[u64]) -> Result<TypeHistogram> {
    let w0: Vec<R::Elem> = residue.iter().map(|&x| ring.from_int(x as i64)).collect();
    match ring.level() {
        1 => Ok(BTreeMap::from([(type_at(lattice, ring, &w0), 1)])),
        2 => linear_fiber(lattice, ring, &w0),
        _ => brute_fiber(lattice, ring, &w0),
    }
}

/// Brute-force lift enumeration, for cross-checking the level-2 linearization.
pub fn fiber_histogram_brute<R: LocalRing>(lattice: &LieLattice, ring: &R, residue: &[u64]) -> Result<TypeHistogram> {
    let w0: Vec<R::Elem> = residue.iter().map(|&x| ring.from_int(x as i64)).collect();
    brute_fiber(lattice, ring, &w0)
}

fn shell_histogram<R: LocalRing>(
    lattice: &LieLattice,
    ring: &R,
    shell: &ShellDecomposition,
    skip_residue_zero: bool,
) -> Result<Histogram> {
    shell
        .residue_orbit_reps
        .par_iter()
        .filter(|(rep, _)| !(skip_residue_zero && rep.iter().all(|&x| x == 0)))
        .map(|(rep, size)| {
            let h = fiber_histogram(lattice, ring, rep)?;
            Ok(h.into_iter().map(|(e, c)| (e, c * *size as u128)).collect::<Histogram>())
        })
        .try_reduce(Histogram::new, |a, b| Ok(merge(a, b)))
}

fn check_preconditions<R: LocalRing>(lattice: &LieLattice, ring: &R, m: u32) -> Result<()> {
    if ring.p() < 5 {
        return Err(Error::InvalidParameter("census needs p >= 5".into()));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if lattice.realization().is_some() && !lattice.trace_form_nondegenerate(&ring.at_level(1))? {
        return Err(Error::InvalidParameter("trace form is degenerate at this prime".into()));
    }
    Ok(())
}

/// Resolves `Auto` and checks feasibility for an enumeration at the level of `ring`.
fn resolve_strategy<R: LocalRing>(lattice: &LieLattice, ring: &R, strategy: &Strategy) -> Result<Strategy> {
    let d = lattice.dim();
    let q = ring.residue_cardinality();
    let level = ring.level() as usize;
    let exhaustive_states = powf(q, d * level);
    let resolved = match strategy {
        Strategy::Auto if exhaustive_states <= EXHAUSTIVE_LIMIT => Strategy::Exhaustive,
        Strategy::Auto if ring.residue_degree() == 1 && lattice.kind().is_some() => Strategy::Shell,
        Strategy::Auto => Strategy::Exhaustive,
        s => s.clone(),
    };
    match &resolved {
        Strategy::Exhaustive if exhaustive_states > EXHAUSTIVE_LIMIT => Err(Error::Infeasible {
            states: exhaustive_states,
            limit: EXHAUSTIVE_LIMIT,
            strategy: "exhaustive".into(),
        }),
        Strategy::Shell if ring.residue_degree() != 1 => {
            Err(Error::Unsupported("shell strategy over a prime residue field only".into()))
        }
        Strategy::Shell if powf(q, d) > SHELL_RESIDUE_LIMIT as f64 => Err(Error::Infeasible {
            states: powf(q, d),
            limit: SHELL_RESIDUE_LIMIT as f64,
            strategy: "shell".into(),
        }),
        _ => Ok(resolved),
    }
}

/// Divisor types of `R(w)` over all `w` in `(O/p^M)^d`, `M = ring.level()`.
///
/// With `primitive_only`, vectors vanishing mod `p` are skipped.
pub fn divisor_type_histogram<R: LocalRing>(
    lattice: &LieLattice,
    ring: &R,
    strategy: &Strategy,
    primitive_only: bool,
) -> Result<TypeHistogram> {
    match resolve_strategy(lattice, ring, strategy)? {
        Strategy::Exhaustive => Ok(exhaustive_histogram(lattice, ring, primitive_only)),
        Strategy::Shell => {
            let shell = shell_decompose(lattice, ring.p())?;
            if ring.level() >= 3 {
                let lifts = shell.residue_orbit_reps.len() as f64
                    * powf(ring.residue_cardinality(), lattice.dim() * (ring.level() as usize - 1));
                if lifts > SHELL_LIFT_LIMIT {
                    return Err(Error::Infeasible { states: lifts, limit: SHELL_LIFT_LIMIT, strategy: "shell".into() });
                }
            }
            shell_histogram(lattice, ring, &shell, primitive_only)
        }
        Strategy::MonteCarlo { .. } => Err(Error::InvalidParameter("exact histogram requested with montecarlo".into())),
        Strategy::Auto => unreachable!("resolved"),
    }
}

/// Census of orbit-size exponents of all functionals on `p^m L / p^N L`, `N = ring.level()`.
///
/// Only the class of `w` mod `p^{N-m}` matters, so enumeration runs at the
/// effective level `M = N - m` and is scaled by `q^{d(N-M)}`.
pub fn level_census<R: LocalRing>(lattice: &LieLattice, ring: &R, m: u32, strategy: &Strategy) -> Result<DimCounts> {
    check_preconditions(lattice, ring, m)?;
    let d = lattice.dim();
    let n = ring.level();
    let eff = n.saturating_sub(m);
    let q = ring.residue_cardinality();
    let mut result = DimCounts {
        lattice: lattice.name().to_string(),
        p: ring.p(),
        f: ring.residue_degree(),
        m,
        level: n,
        strategy: String::new(),
        counts: Counts::Exact(BTreeMap::new()),
    };
    if eff == 0 {
        result.strategy = "trivial".into();
        result.counts = Counts::Exact(BTreeMap::from([(0, BigUint::from(q).pow(d as u32 * n))]));
        return Ok(result);
    }
    let ring_eff = ring.at_level(eff);
    if let Strategy::MonteCarlo { samples, seed } = strategy {
        result.strategy = strategy.name().into();
        result.counts = Counts::Estimated(montecarlo(lattice, &ring_eff, n, *samples, *seed)?);
        return Ok(result);
    }
    let resolved = resolve_strategy(lattice, &ring_eff, strategy)?;
    result.strategy = resolved.name().into();
    let types = divisor_type_histogram(lattice, &ring_eff, &resolved, false)?;
    let mut by_exponent: BTreeMap<u32, u128> = BTreeMap::new();
    for (t, c) in &types {
        *by_exponent.entry(orbit_size_exponent(t, eff, 0)?).or_default() += c;
    }
    result.counts = Counts::Exact(normalize(&by_exponent, q, d as u32 * (n - eff))?);
    if !result.mass_holds(d) {
        return Err(Error::Inconsistent("census mass does not equal q^{dN}".into()));
    }
    Ok(result)
}

fn normalize(hist: &BTreeMap<u32, u128>, q: u64, lift_exp: u32) -> Result<BTreeMap<u32, BigUint>> {
    let qb = BigUint::from(q);
    let mult = qb.pow(lift_exp);
    let mut out = BTreeMap::new();
    for (&e, &c) in hist {
        if e % 2 == 1 {
            return Err(Error::OddOrbitExponent(e as u64));
        }
        let total = BigUint::from(c) * &mult;
        let (quot, rem) = total.div_rem(&qb.pow(e));
        if !rem.is_zero() {
            return Err(Error::Normalization {
                k: (e / 2) as u64,
                detail: format!("{total} functionals with orbit exponent {e} is not divisible by q^{e}"),
            });
        }
        out.insert(e / 2, quot);
    }
    Ok(out)
}

fn montecarlo<R: LocalRing>(lattice: &LieLattice, ring: &R, n: u32, samples: u64, seed: u64) -> Result<BTreeMap<u32, Estimate>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("montecarlo needs at least one sample".into()));
    }
    let d = lattice.dim();
    let block = 4096u64;
    let blocks = samples.div_ceil(block);
    let size = ring.cardinality();
    let hist = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut h: BTreeMap<u32, u128> = BTreeMap::new();
            for _ in b * block..((b + 1) * block).min(samples) {
                let w: Vec<R::Elem> = (0..d).map(|_| ring.element(rng.gen_range(0..size))).collect();
                *h.entry(orbit_size_exponent(&type_at(lattice, ring, &w), ring.level(), 0)?).or_default() += 1;
            }
            Ok::<_, Error>(h)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            Ok(a)
        })?;
    let q = ring.residue_cardinality() as f64;
    let mass = q.powi((d as u32 * n) as i32);
    Ok(hist
        .into_iter()
        .map(|(e, c)| {
            let frac = c as f64 / samples as f64;
            let scale = mass / q.powi(e as i32);
            let se = scale * (frac * (1.0 - frac) / samples as f64).sqrt();
            (e / 2, Estimate { value: frac * scale, std_error: se })
        })
        .collect())
}

/// Census at level `n` over `O/p^n` with residue degree `f`.
pub fn census_at(lattice: &LieLattice, p: u64, f: u32, n: u32, m: u32, strategy: &Strategy) -> Result<DimCounts> {
    if f == 1 {
        level_census(lattice, &Zpl::new(p, n)?, m, strategy)
    } else {
        level_census(lattice, &ring_make(p, n, f)?, m, strategy)
    }
}

#[derive(Clone, Debug)]
pub struct StableCoefficients {
    pub lower: DimCounts,
    pub upper: DimCounts,
    /// Coefficients that agree between the two levels.
    pub stable: BTreeMap<u32, BigUint>,
}

/// Coefficients agreeing between levels `n` and `n + 1`.
pub fn stable_coeffs(lattice: &LieLattice, p: u64, f: u32, m: u32, n: u32, strategy: &Strategy) -> Result<StableCoefficients> {
    let lower = census_at(lattice, p, f, n, m, strategy)?;
    let upper = census_at(lattice, p, f, n + 1, m, strategy)?;
    let (Some(lo), Some(_)) = (lower.exact(), upper.exact()) else {
        return Err(Error::InvalidParameter("stability needs exact censuses".into()));
    };
    let top = lo.keys().max().copied().unwrap_or(0);
    let stable = (0..=top)
        .filter_map(|k| {
            let (a, b) = (lower.get(k)?, upper.get(k)?);
            (a == b).then_some((k, a))
        })
        .collect();
    Ok(StableCoefficients { lower, upper, stable })
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    pub k: u32,
    pub census: Option<String>,
    pub formula: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub variant: A2Variant,
    pub p: u64,
    pub f: u32,
    pub m: u32,
    pub levels: (u32, u32),
    pub rows: Vec<CensusRow>,
    pub exact_match: bool,
}

impl CensusReport {
    pub fn mismatches(&self) -> Vec<u32> {
        self.rows.iter().filter(|r| !r.matches).map(|r| r.k).collect()
    }
}

/// Formula coefficients of `t^k`, `k <= k_max`, evaluated at `q`.
pub fn formula_counts(variant: A2Variant, q: u64, m: u32, k_max: usize) -> Result<Vec<BigInt>> {
    let z = theorem_d::<BigRational>(variant, m as i64)?;
    z.expand(k_max)
        .evaluate_at(q as i64)
        .into_iter()
        .map(|c| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::Inconsistent(format!("non-integral coefficient {c}")))
            }
        })
        .collect()
}

/// Side-by-side stable census and formula coefficients, using levels `m+1` and `m+2`.
pub fn census_vs_formula(variant: A2Variant, p: u64, f: u32, m: u32, k_max: u32) -> Result<CensusReport> {
    let kind = match variant {
        A2Variant::Sl3 => LieKind::Sl3,
        A2Variant::Su3 => LieKind::Su3,
    };
    let lattice = LieLattice::make(kind, p, f)?;
    let stable = stable_coeffs(&lattice, p, f, m, m + 1, &Strategy::Auto)?;
    let q = p.pow(f);
    let formula = formula_counts(variant, q, m, k_max as usize)?;
    let rows: Vec<CensusRow> = (0..=k_max)
        .map(|k| {
            let census = stable.stable.get(&k).cloned();
            let fval = &formula[k as usize];
            let matches = census.as_ref().is_some_and(|c| BigInt::from(c.clone()) == *fval);
            CensusRow { k, census: census.map(|c| c.to_string()), formula: fval.to_string(), matches }
        })
        .collect();
    let exact_match = rows.iter().all(|r| r.matches);
    Ok(CensusReport { variant, p, f, m, levels: (m + 1, m + 2), rows, exact_match })
}

/// Number of residue functionals with commutator rank `r`, for each `r`.
pub fn residue_rank_census(lattice: &LieLattice, p: u64) -> Result<BTreeMap<usize, u64>> {
    let ring = Zpl::new(p, 1)?;
    let mut out = BTreeMap::new();
    for (t, c) in exhaustive_histogram(lattice, &ring, false) {
        *out.entry(t.iter().filter(|&&a| a == 0).count()).or_default() += c.to_u64().unwrap_or(u64::MAX);
    }
    Ok(out)
}
