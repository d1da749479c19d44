//! Similarity classes in `gl3(Z/p^l)`: canonical forms, centralizers and
//! fiber splitting along `gl3(Z/p^{l+1}) -> gl3(Z/p^l)`.

use super::algebra::MatrixAlgebra;
use super::mat3::{self, Mat3};
use crate::error::{Error, Result};
use crate::finite_lie::{smith_normal_form, Matrix, Zpl};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SimilarityClass {
    pub p: u64,
    pub level: u32,
    /// Entries in `[0, p^level)`.
    pub representative: Mat3,
    pub size: u128,
    /// Reduction modulo `p` of the centralizer algebra, spanned by its units.
    #[serde(skip)]
    pub stabilizer_algebra: MatrixAlgebra,
}

/// The solution module of `XA = AX` over `Z/p^l`.
#[derive(Clone, Debug)]
pub struct Centralizer {
    pub p: u64,
    pub level: u32,
    /// `log_p` of the module order.
    pub log_order: u32,
    /// Module generators over `Z/p^l`.
    pub generators: Vec<Mat3>,
    /// Reduction modulo `p`.
    pub reduction: MatrixAlgebra,
    /// Number of invertible solutions.
    pub unit_count: u128,
}

pub fn gl3_order(p: u64, level: u32) -> Result<u128> {
    let q = p as u128;
    let base = (q.pow(3) - 1) * (q.pow(3) - q) * (q.pow(3) - q * q);
    q.checked_pow(9 * (level - 1))
        .and_then(|x| x.checked_mul(base))
        .ok_or_else(|| Error::InvalidParameter(format!("|GL3(Z/{p}^{level})| overflows 128 bits")))
}

fn modulus(p: u64, level: u32) -> Result<u64> {
    p.checked_pow(level)
        .filter(|m| *m < 1 << 31)
        .ok_or_else(|| Error::InvalidParameter(format!("{p}^{level} too large")))
}

pub fn centralizer(p: u64, level: u32, a: &Mat3) -> Result<Centralizer> {
    let m = modulus(p, level)?;
    let ring = Zpl::new(p, level)?;
    let ad = mat3::ad_matrix(&mat3::reduce(a, m), m);
    let snf = smith_normal_form(&ring, &Matrix::from_vec(9, 9, ad.concat()));
    let mut generators = Vec::new();
    let mut residue = Vec::new();
    let mut log_order = 0;
    for (i, &e) in snf.exponents.iter().enumerate() {
        let e = e.min(level);
        log_order += e;
        if e == 0 {
            continue;
        }
        let col: Mat3 = std::array::from_fn(|r| *snf.v.get(r, i));
        let scale = p.pow(level - e);
        generators.push(mat3::scale(&col, scale, m));
        if e == level {
            residue.push(mat3::reduce(&col, p));
        }
    }
    let reduction = MatrixAlgebra::from_span(p, &residue);
    let units = reduction.structure().unit_count;
    let unit_count = (p as u128).pow(log_order - reduction.dim() as u32) * units;
    Ok(Centralizer { p, level, log_order, generators, reduction, unit_count })
}

impl Centralizer {
    pub fn class_size(&self) -> Result<u128> {
        Ok(gl3_order(self.p, self.level)? / self.unit_count)
    }

    pub fn random_unit(&self, rng: &mut impl rand::Rng) -> Mat3 {
        let m = self.p.pow(self.level);
        loop {
            let mut x = mat3::ZERO;
            for g in &self.generators {
                x = mat3::add(&x, &mat3::scale(g, rng.gen_range(0..m), m), m);
            }
            if mat3::det(&x, self.p) != 0 {
                return x;
            }
        }
    }
}

fn make_class(p: u64, level: u32, representative: Mat3) -> Result<SimilarityClass> {
    let c = centralizer(p, level, &representative)?;
    Ok(SimilarityClass {
        p,
        level,
        representative,
        size: c.class_size()?,
        stabilizer_algebra: c.reduction.unit_span(),
    })
}

/// Rational canonical forms of `M3(F_p)`: scalars, `a (+) C((x-a)(x-b))`,
/// and companion matrices of all monic cubics.
pub fn canonical_forms(p: u64) -> Vec<Mat3> {
    let mut out = Vec::new();
    for a in 0..p {
        out.push(mat3::scalar(a));
    }
    for a in 0..p {
        for b in 0..p {
            let s = (a + b) % p;
            let prod = (p - a * b % p) % p;
            out.push([a, 0, 0, 0, 0, prod, 0, 1, s]);
        }
    }
    for c0 in 0..p {
        for c1 in 0..p {
            for c2 in 0..p {
                out.push([0, 0, c0, 1, 0, (p - c1) % p, 0, 1, c2]);
            }
        }
    }
    out
}

/// Limit on `q^{3l}`, a proxy for the number of classes at level `l`.
pub const CLASS_LIMIT: f64 = 4_194_304.0;

pub fn classes_at_level(p: u64, level: u32) -> Result<Vec<SimilarityClass>> {
    if level == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    if !crate::a2_formulas::is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let states = (p as f64).powi(3 * level as i32);
    if states > CLASS_LIMIT {
        return Err(Error::Infeasible { states, limit: CLASS_LIMIT, strategy: "fiber".into() });
    }
    let mut classes: Vec<SimilarityClass> =
        canonical_forms(p).into_par_iter().map(|a| make_class(p, 1, a)).collect::<Result<_>>()?;
    for _ in 1..level {
        let next: Vec<Vec<SimilarityClass>> =
            classes.par_iter().map(|c| fiber_split(c, &FiberOptions::default())).collect::<Result<_>>()?;
        classes = next.into_iter().flatten().collect();
    }
    Ok(classes)
}

#[derive(Clone, Debug)]
pub struct FiberOptions {
    pub seed: u64,
    /// Random centralizer units used as generators, per attempt.
    pub random_generators: usize,
    pub attempts: usize,
}

impl Default for FiberOptions {
    fn default() -> Self {
        Self { seed: 0x5eed, random_generators: 12, attempts: 4 }
    }
}

/// `(lambda, j, A')` with `A = lambda + p^j A'` and `A'` non-scalar mod `p`;
/// `None` when `A` is scalar modulo `p^level`.
pub fn scalar_reduction(a: &Mat3, p: u64, level: u32) -> Option<(u64, u32, Mat3)> {
    let m = p.pow(level);
    let lambda = a[0] % m;
    let diff = mat3::sub(a, &mat3::scalar(lambda), m);
    let mut j = 0;
    let mut pj = 1u64;
    while j < level && diff.iter().all(|x| x % (pj * p) == 0) {
        j += 1;
        pj *= p;
    }
    if j == level {
        return None;
    }
    let reduced: Mat3 = std::array::from_fn(|k| diff[k] / pj);
    Some((lambda, j, reduced))
}

struct AffineGenerator {
    linear: Vec<Vec<u64>>,
    shift: Vec<u64>,
}

/// Classes of `gl3(Z/p^{l+1})` lying over `class`.
pub fn fiber_split(class: &SimilarityClass, opts: &FiberOptions) -> Result<Vec<SimilarityClass>> {
    let p = class.p;
    let level = class.level;
    let big = modulus(p, level + 1)?;
    let pl = p.pow(level);
    let lift = |b: &Mat3| mat3::add(&class.representative, &mat3::scale(b, pl, big), big);
    let Some((lambda, j, a1)) = scalar_reduction(&class.representative, p, level) else {
        return canonical_forms(p)
            .into_iter()
            .map(|b| {
                let sub = make_class(p, level + 1, lift(&b))?;
                check_size(&sub, class.size * make_class(p, 1, b)?.size)?;
                Ok(sub)
            })
            .collect();
    };
    let l1 = level - j;
    let m1 = p.pow(l1);
    let m1_big = m1 * p;
    let pj = p.pow(j);
    let lift_reduced = |b: &Mat3| {
        let inner = mat3::add(&a1, &mat3::scale(b, m1, big), big);
        mat3::add(&mat3::scalar(lambda), &mat3::scale(&inner, pj, big), big)
    };
    let abar = mat3::reduce(&a1, p);
    let ad = mat3::ad_matrix(&abar, p);
    let ad_t: Vec<Vec<u64>> = (0..9).map(|c| (0..9).map(|r| ad[r][c]).collect()).collect();
    let mut proj = mat3::nullspace(&ad_t, 9, p);
    let pivots = mat3::rref(&mut proj, p);
    let d = proj.len();
    let section = |c: &[u64]| -> Mat3 {
        let mut b = mat3::ZERO;
        for (i, &pc) in pivots.iter().enumerate() {
            b[pc] = c[i];
        }
        b
    };
    let project = |b: &Mat3| -> Vec<u64> { proj.iter().map(|r| r.iter().zip(b).map(|(x, y)| x * y % p).sum::<u64>() % p).collect() };
    let cent = centralizer(p, l1, &a1)?;
    let npts = p.pow(d as u32) as usize;
    let decode = |mut idx: usize| -> [u64; 9] {
        let mut c = [0u64; 9];
        for x in c.iter_mut().take(d) {
            *x = idx as u64 % p;
            idx /= p as usize;
        }
        c
    };
    let encode = |c: &[u64; 9]| -> usize { c[..d].iter().rev().fold(0usize, |acc, &x| acc * p as usize + x as usize) };
    let rep_hash = class.representative.iter().fold(0u64, |h, &x| h.wrapping_mul(0x100000001b3).wrapping_add(x));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ rep_hash);
    let mut units: Vec<Mat3> = cent
        .generators
        .iter()
        .map(|g| mat3::add(&mat3::ONE, g, m1))
        .filter(|x| mat3::det(x, p) != 0)
        .collect();
    for attempt in 0..opts.attempts {
        units.extend((0..opts.random_generators * (attempt + 1)).map(|_| cent.random_unit(&mut rng)));
        let gens: Vec<AffineGenerator> = units
            .iter()
            .map(|x| {
                let xi = mat3::inverse(x, m1_big).expect("centralizer unit");
                let moved = mat3::sub(&mat3::conj(x, &a1, &xi, m1_big), &a1, m1_big);
                debug_assert!(moved.iter().all(|v| v % m1 == 0));
                let shift_mat: Mat3 = std::array::from_fn(|k| moved[k] / m1 % p);
                let xb = mat3::reduce(x, p);
                let xbi = mat3::reduce(&xi, p);
                let linear = (0..d)
                    .map(|i| {
                        let mut e = vec![0u64; d];
                        e[i] = 1;
                        project(&mat3::conj(&xb, &section(&e), &xbi, p))
                    })
                    .collect();
                AffineGenerator { linear, shift: project(&shift_mat) }
            })
            .collect();
        let mut orbit_of = vec![usize::MAX; npts];
        let mut orbits: Vec<(usize, u128)> = Vec::new();
        for start in 0..npts {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            orbit_of[start] = id;
            let mut stack = vec![start];
            let mut count = 0u128;
            while let Some(cur) = stack.pop() {
                count += 1;
                let c = decode(cur);
                for g in &gens {
                    let mut img = [0u64; 9];
                    for (r, x) in img.iter_mut().enumerate().take(d) {
                        let mut acc = g.shift[r];
                        for i in 0..d {
                            acc += g.linear[i][r] * c[i];
                        }
                        *x = acc % p;
                    }
                    let k = encode(&img);
                    if orbit_of[k] == usize::MAX {
                        orbit_of[k] = id;
                        stack.push(k);
                    }
                }
            }
            orbits.push((start, count));
        }
        let translations = (p as u128).pow(9 - d as u32);
        let subs: Result<Vec<SimilarityClass>> = orbits
            .iter()
            .map(|&(start, count)| {
                let sub = make_class(p, level + 1, lift_reduced(&section(&decode(start))))?;
                check_size(&sub, class.size * count * translations)?;
                Ok(sub)
            })
            .collect();
        match subs {
            Ok(s) => return Ok(s),
            Err(Error::Inconsistent(_)) if attempt + 1 < opts.attempts => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!("the last attempt returns")
}

fn check_size(sub: &SimilarityClass, orbit_size: u128) -> Result<()> {
    if sub.size != orbit_size {
        return Err(Error::Inconsistent(format!(
            "fiber orbit of {:?} has size {orbit_size}, centralizer count gives {}",
            sub.representative, sub.size
        )));
    }
    Ok(())
}

/// Classes at level `level + 1` from splitting every class in `classes`.
pub fn split_all(classes: &[SimilarityClass], opts: &FiberOptions) -> Result<Vec<SimilarityClass>> {
    let parts: Vec<Vec<SimilarityClass>> = classes.par_iter().map(|c| fiber_split(c, opts)).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Orbit count of GL3(F_p) on M3(F_p) by union-find over all matrices.
    fn brute_class_count(p: u64) -> usize {
        let n = p.pow(9) as usize;
        let gens: Vec<Mat3> = vec![[1, 1, 0, 0, 1, 0, 0, 0, 1], [0, 0, 1, 1, 0, 0, 0, 1, 0], [p - 1, 0, 0, 0, 1, 0, 0, 0, 1]]
            .into_iter()
            .map(|g| mat3::reduce(&g, p))
            .collect();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(c) = stack.pop() {
                let a = mat3::decode(c as u64, p);
                for g in &gens {
                    let gi = mat3::inverse(g, p).unwrap();
                    let k = mat3::encode(&mat3::conj(g, &a, &gi, p), p) as usize;
                    if !seen[k] {
                        seen[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn level_one_mass_and_count() {
        for p in [2u64, 3, 5] {
            let cl = classes_at_level(p, 1).unwrap();
            assert_eq!(cl.len() as u64, p * p * p + p * p + p);
            assert_eq!(cl.iter().map(|c| c.size).sum::<u128>(), (p as u128).pow(9));
        }
        assert_eq!(brute_class_count(2), 14);
        assert_eq!(brute_class_count(3), 39);
    }

    #[test]
    fn level_two_mass() {
        for p in [2u64, 3] {
            let cl = classes_at_level(p, 2).unwrap();
            assert_eq!(cl.iter().map(|c| c.size).sum::<u128>(), (p as u128).pow(18));
            let reps: HashSet<_> = cl.iter().map(|c| c.representative).collect();
            assert_eq!(reps.len(), cl.len());
        }
    }

    #[test]
    fn zero_fiber_matches_level_one() {
        let p = 5;
        let zero = make_class(p, 1, mat3::ZERO).unwrap();
        let subs = fiber_split(&zero, &FiberOptions::default()).unwrap();
        let mut got: Vec<u128> = subs.iter().map(|c| c.size).collect();
        let mut want: Vec<u128> = classes_at_level(p, 1).unwrap().iter().map(|c| c.size).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn split_masses_at_five() {
        let p = 5;
        for c in classes_at_level(p, 1).unwrap().iter().step_by(7) {
            let subs = fiber_split(c, &FiberOptions::default()).unwrap();
            assert_eq!(subs.iter().map(|s| s.size).sum::<u128>(), c.size * (p as u128).pow(9));
        }
    }

    #[test]
    fn scalar_shift_preserves_pattern() {
        let p = 3;
        let opts = FiberOptions::default();
        let a = make_class(p, 1, [1, 1, 0, 0, 1, 0, 0, 0, 2]).unwrap();
        let b = make_class(p, 1, [2, 1, 0, 0, 2, 0, 0, 0, 0]).unwrap();
        let pattern = |c: &SimilarityClass| {
            let mut v: Vec<u128> = fiber_split(c, &opts).unwrap().iter().map(|s| s.size).collect();
            v.sort();
            v
        };
        assert_eq!(pattern(&a), pattern(&b));
    }
}
