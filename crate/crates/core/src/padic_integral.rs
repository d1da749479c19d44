//! Finite-level evaluation of the `p`-adic integral
//!
//! ```text
//! Z(r, t) = ∫_V |x|^t  prod_j  ‖F_j(y) ∪ F_{j-1}(y) x^2‖^r / ‖F_{j-1}(y)‖^r  dμ(x, y)
//! ```
//!
//! with `F_j(y)` the `2j x 2j` minors of the commutator matrix `R(y)`.
//! `‖F_j(y)‖ = q^{-(a_1 + ... + a_{2j})}` in terms of elementary divisors, so
//! the integrand factors through the divisor type of `R(y)` and the
//! valuation of `x`; enumeration reuses the census histograms.
//!
//! At level `N` a valuation equal to `N` only says "at least `N`". Such points
//! are evaluated at the cap for `value` and over completions
//! `{N, ..., N+L} ∪ {∞}` for the band `[lower, upper]`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_lie::{LieLattice, LocalRing, Zpl};
use crate::kirillov_census::{divisor_type_histogram, fiber_histogram, Strategy, TypeHistogram};

/// Stand-in for an infinite valuation.
const INFINITE_VALUATION: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Full,
    UnitX,
    PrimitiveY,
    /// Union of cosets mod `p`, each given by residues `(x, y)`.
    Cosets(Vec<(u64, Vec<u64>)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Families {
    /// `F_j` = all `2j x 2j` minors of `R(y)`.
    Minors,
    /// Every `F_j = {1}`.
    Trivial,
}

#[derive(Clone, Debug)]
pub struct IntegralSpec {
    pub lattice: LieLattice,
    pub p: u64,
    pub level: u32,
    pub r: f64,
    pub t: f64,
    pub domain: Domain,
    pub families: Families,
    pub strategy: Strategy,
    /// Finite completions `N..=N+L` used for the band, besides `∞`.
    pub completion_depth: u32,
}

impl IntegralSpec {
    pub fn new(lattice: LieLattice, p: u64, level: u32, r: f64, t: f64) -> Self {
        Self {
            lattice,
            p,
            level,
            r,
            t,
            domain: Domain::Full,
            families: Families::Minors,
            strategy: Strategy::Auto,
            completion_depth: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub band: (f64, f64),
    pub points_enumerated: u128,
    pub ambiguous_points: u128,
    pub domain_measure: f64,
}

impl IntegralResult {
    pub fn band_width(&self) -> f64 {
        self.band.1 - self.band.0
    }
}

/// `F_j(y)`: all `2j x 2j` minors of `R(y)`; `F_0 = {1}`.
pub fn minor_family<R: LocalRing>(lattice: &LieLattice, ring: &R, y: &[R::Elem], j: usize) -> Result<Vec<R::Elem>> {
    let d = lattice.dim();
    if 2 * j > d {
        return Err(Error::InvalidParameter(format!("j = {j} exceeds d/2")));
    }
    if j == 0 {
        return Ok(vec![ring.one()]);
    }
    let m = lattice.commutator_matrix(ring, y);
    let subsets = combinations(d, 2 * j);
    let mut out = Vec::with_capacity(subsets.len() * subsets.len());
    for rows in &subsets {
        for cols in &subsets {
            let sub: Vec<R::Elem> = rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&c| (i, c)))
                .map(|(i, c)| m.get(i, c).clone())
                .collect();
            out.push(determinant(ring, &sub, 2 * j));
        }
    }
    Ok(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Laplace expansion; adequate for the `n <= 9` minors used here.
fn determinant<R: LocalRing>(ring: &R, a: &[R::Elem], n: usize) -> R::Elem {
    match n {
        0 => ring.one(),
        1 => a[0].clone(),
        2 => ring.sub(&ring.mul(&a[0], &a[3]), &ring.mul(&a[1], &a[2])),
        _ => {
            let mut acc = ring.zero();
            for c in 0..n {
                if ring.is_zero(&a[c]) {
                    continue;
                }
                let minor: Vec<R::Elem> = (1..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != c).map(move |j| (i, j)))
                    .map(|(i, j)| a[i * n + j].clone())
                    .collect();
                let term = ring.mul(&a[c], &determinant(ring, &minor, n - 1));
                acc = if c % 2 == 0 { ring.add(&acc, &term) } else { ring.sub(&acc, &term) };
            }
            acc
        }
    }
}

/// Minimal valuation of a family of ring elements (capped at the level).
pub fn family_valuation<R: LocalRing>(ring: &R, family: &[R::Elem]) -> u32 {
    family.iter().map(|x| ring.valuation(x)).min().unwrap_or(ring.level())
}

/// Integrand as a function of `v(x)` and the partial sums `v_j = a_1 + ... + a_{2j}`.
fn integrand(q: f64, r: f64, t: f64, vx: u32, partial: &[u64]) -> f64 {
    let mut exponent = t * vx as f64;
    for j in 1..partial.len() {
        let num = partial[j].min(partial[j - 1] + 2 * vx as u64);
        exponent += r * (num - partial[j - 1]) as f64;
    }
    if exponent == 0.0 {
        1.0
    } else {
        q.powf(-exponent)
    }
}

/// Capped minor valuations `P_j = min(N, a_1 + ... + a_{2j})`, `j = 1..=J`.
fn capped_partials(exps: &[u32], j_max: usize, n: u32) -> Vec<u32> {
    (1..=j_max).map(|j| exps[..2 * j].iter().sum::<u32>().min(n)).collect()
}

/// `(capped, lower, upper)` integrand values for `v(x)` and capped minor valuations `P`.
fn evaluate_key(spec: &IntegralSpec, q: f64, vx: u32, partials: &[u32]) -> (f64, f64, f64) {
    let n = spec.level;
    let with_zero = |ps: &[u32]| -> Vec<u64> { std::iter::once(0).chain(ps.iter().map(|&v| v as u64)).collect() };
    let capped = integrand(q, spec.r, spec.t, vx, &with_zero(partials));
    let n_capped = partials.iter().filter(|&&v| v >= n).count();
    let vx_capped = vx >= n;
    if n_capped == 0 && !vx_capped {
        return (capped, capped, capped);
    }
    let mut choices: Vec<u32> = (n..=n + spec.completion_depth).collect();
    choices.push(INFINITE_VALUATION);
    let vx_choices: Vec<u32> = if vx_capped { choices.clone() } else { vec![vx] };
    let fixed = &partials[..partials.len() - n_capped];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut tail = vec![0usize; n_capped];
    loop {
        let mut full: Vec<u32> = fixed.to_vec();
        full.extend(tail.iter().map(|&i| choices[i]));
        let ps = with_zero(&full);
        for &v in &vx_choices {
            let val = integrand(q, spec.r, spec.t, v, &ps);
            lo = lo.min(val);
            hi = hi.max(val);
        }
        // next nondecreasing index tuple
        let Some(pos) = (0..n_capped).rev().find(|&i| tail[i] + 1 < choices.len()) else { break };
        let nv = tail[pos] + 1;
        for x in tail[pos..].iter_mut() {
            *x = nv;
        }
    }
    (capped, lo, hi)
}

/// Number of `x mod p^N` (within the domain constraint) by capped valuation.
fn x_distribution(q: u64, n: u32, unit_only: bool, residue_zero_only: bool) -> BTreeMap<u32, u128> {
    let q = q as u128;
    let mut out = BTreeMap::new();
    if !residue_zero_only {
        out.insert(0, (q - 1) * q.pow(n - 1));
    }
    if !unit_only {
        for v in 1..n {
            out.insert(v, (q - 1) * q.pow(n - 1 - v));
        }
        out.insert(n, 1);
    }
    out
}

/// Histogram-based evaluation at truncation level `N`.
pub fn integral_truncated(spec: &IntegralSpec) -> Result<IntegralResult> {
    let ring = Zpl::new(spec.p, spec.level)?;
    if spec.level == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    let d = spec.lattice.dim();
    let q = spec.p;
    let n = spec.level;
    let all_y = || -> TypeHistogram { BTreeMap::from([(vec![n; d], (q as u128).pow(d as u32 * n))]) };
    let y_hist = |primitive: bool| -> Result<TypeHistogram> {
        match spec.families {
            Families::Trivial if !primitive => Ok(all_y()),
            _ => divisor_type_histogram(&spec.lattice, &ring, &spec.strategy, primitive),
        }
    };
    // (x distribution, y histogram) pairs whose products make up the domain
    let mut parts: Vec<(BTreeMap<u32, u128>, TypeHistogram)> = Vec::new();
    match &spec.domain {
        Domain::Full => parts.push((x_distribution(q, n, false, false), y_hist(false)?)),
        Domain::UnitX => parts.push((x_distribution(q, n, true, false), y_hist(false)?)),
        Domain::PrimitiveY => parts.push((x_distribution(q, n, false, false), y_hist(true)?)),
        Domain::Cosets(list) => {
            if list.is_empty() {
                return Err(Error::InvalidParameter("domain is empty".into()));
            }
            let mut seen = std::collections::BTreeSet::new();
            for (x0, y0) in list {
                if y0.len() != d || *x0 >= q || y0.iter().any(|&c| c >= q) {
                    return Err(Error::InvalidParameter("coset residues must lie in F_p with y of length d".into()));
                }
                if !seen.insert((x0, y0.clone())) {
                    continue;
                }
                let xs = if *x0 == 0 {
                    x_distribution(q, n, false, true)
                } else {
                    BTreeMap::from([(0, (q as u128).pow(n - 1))])
                };
                parts.push((xs, fiber_histogram(&spec.lattice, &ring, y0)?));
            }
        }
    }
    let j_max = match spec.families {
        Families::Minors => d / 2,
        Families::Trivial => 0,
    };
    let qf = q as f64;
    let scale = qf.powi(-((d as i32 + 1) * n as i32));
    let (mut value, mut lower, mut upper) = (0.0, 0.0, 0.0);
    let (mut points, mut ambiguous) = (0u128, 0u128);
    for (xs, ys) in &parts {
        for (exps, &cy) in ys {
            for (&vx, &cx) in xs {
                let w = cx * cy;
                let (c, lo, hi) = evaluate_key(spec, qf, vx, &capped_partials(exps, j_max, n));
                points += w;
                if lo != hi {
                    ambiguous += w;
                }
                let wf = w as f64 * scale;
                value += wf * c;
                lower += wf * lo;
                upper += wf * hi;
            }
        }
    }
    Ok(IntegralResult {
        value,
        band: (lower, upper),
        points_enumerated: points,
        ambiguous_points: ambiguous,
        domain_measure: points as f64 * scale,
    })
}

/// Integrand at a single point via explicit minors, `(capped, lower, upper)`.
pub fn integrand_at_point(spec: &IntegralSpec, x: u64, y: &[u64]) -> Result<(f64, f64, f64)> {
    let ring = Zpl::new(spec.p, spec.level)?;
    let vx = ring.valuation(&(x % ring.modulus()));
    let d = spec.lattice.dim();
    let j_max = match spec.families {
        Families::Minors => d / 2,
        Families::Trivial => 0,
    };
    let mut partials = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        partials.push(family_valuation(&ring, &minor_family(&spec.lattice, &ring, y, j)?));
    }
    Ok(evaluate_key(spec, spec.p as f64, vx, &partials))
}
