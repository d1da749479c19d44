//! Finite-level Clifford assembly of the representation zeta function of
//! `SL3(Z/p^L)` from shadows, shadow-refined class counts and character
//! degrees of `H ∩ SL3(F_p)`.
//!
//! The assembly at group level `L` uses similarity classes of level `L - 1`.
//! It is exact for `L <= 2` when `p > 3`; deeper levels are exploratory and
//! only compared through moments.

use super::algebra::MatrixAlgebra;
use super::classes::{classes_at_level, gl3_order};
use super::dixon::{degrees_of_group, standard_generators, CharacterDegrees, DixonOptions, FiniteGroup};
use super::mat3::{self, Mat3};
use super::shadows::ShadowCatalogue;
use crate::error::{Error, Result};
use crate::finite_lie::inv_mod;
use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Characters of one shadow subgroup `H` and of `H ∩ SL3`.
#[derive(Clone, Debug, Serialize)]
pub struct ShadowCharacters {
    pub shadow: usize,
    pub order: u128,
    pub special: CharacterDegrees,
    /// Present when `|H|` is within the Dixon order limit.
    pub full: Option<CharacterDegrees>,
}

pub fn sl3_order(p: u64) -> u128 {
    gl3_order(p, 1).expect("fits") / (p as u128 - 1)
}

fn special_group(algebra: &MatrixAlgebra, opts: &DixonOptions) -> Result<FiniteGroup> {
    let limit = 2 * 10u128.pow(7);
    let elems = algebra
        .special_units(limit)
        .ok_or_else(|| Error::GroupTooLarge(format!("algebra has more than {limit} elements")))?;
    FiniteGroup::from_elements(algebra.p(), &elems, opts.seed)
}

/// Character degrees of `H(sigma) ∩ SL3(F_p)` for every catalogued shadow.
pub fn shadow_characters(catalogue: &ShadowCatalogue, opts: &DixonOptions) -> Result<Vec<ShadowCharacters>> {
    catalogue
        .entries
        .par_iter()
        .map(|e| {
            let order = e.algebra.unit_count();
            let special = degrees_of_group(&special_group(&e.algebra, opts)?, opts)?;
            let full = if order <= opts.order_limit as u128 {
                let units = e.algebra.units(u128::MAX).expect("unbounded");
                Some(degrees_of_group(&FiniteGroup::from_elements(catalogue.p, &units, opts.seed)?, opts)?)
            } else {
                None
            };
            Ok(ShadowCharacters { shadow: e.shadow.id, order, special, full })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    /// Assembly at `s = 0`.
    pub at_zero: String,
    /// Assembly at `s = -2`.
    pub at_minus_two: String,
    pub class_number: Option<u64>,
    pub group_order: String,
    pub classes_match: Option<bool>,
    pub order_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CliffordAssembly {
    pub q: u64,
    pub level: u32,
    /// Dimension `n` to rational coefficient of `n^{-s}`.
    #[serde(serialize_with = "ser_terms")]
    pub terms: BTreeMap<u64, BigRational>,
    /// Contributions whose dimension is not an integer.
    pub violations: Vec<String>,
    pub moments: MomentReport,
    pub shadows: usize,
}

fn ser_terms<S: serde::Serializer>(t: &BTreeMap<u64, BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(t.iter().map(|(k, v)| (k.to_string(), v.to_string())))
}

impl CliffordAssembly {
    pub fn evaluate(&self, s: i32) -> BigRational {
        self.terms
            .iter()
            .map(|(&n, c)| {
                let base = BigRational::from_integer(BigInt::from(n));
                c * base.pow(-s)
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Whether every term is an integer count, i.e. the assembly is the zeta
    /// function of a finite group.
    pub fn integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn exact(&self) -> bool {
        self.violations.is_empty()
            && self.integral()
            && self.moments.order_match
            && self.moments.classes_match.unwrap_or(false)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CliffordOptions {
    pub dixon: DixonOptions,
    /// Skip the independent class-number oracle.
    pub skip_class_oracle: bool,
}

pub fn clifford_assemble(q: u64, level: u32, opts: &CliffordOptions) -> Result<CliffordAssembly> {
    if q <= 3 || !crate::a2_formulas::is_prime(q) {
        return Err(Error::InvalidParameter(format!("assembly requires a prime q > 3, got {q}")));
    }
    if level == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    let mut catalogue = ShadowCatalogue::new(q, true);
    // (shadow, class size) -> number of classes
    let mut census: BTreeMap<(usize, u128), u64> = BTreeMap::new();
    if level == 1 {
        let s = catalogue.full_group();
        census.insert((s, 1), 1);
    } else {
        for c in classes_at_level(q, level - 1)? {
            let s = catalogue.classify(&c.stabilizer_algebra, c.level);
            *census.entry((s, c.size)).or_insert(0) += 1;
        }
    }
    let chars = shadow_characters(&catalogue, &opts.dixon)?;
    let gl = gl3_order(q, 1)?;
    let sl = sl3_order(q);
    let qpow = BigInt::from(q).pow(level - 1);
    let mut terms: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut violations = Vec::new();
    for (&(s, size), &mult) in &census {
        let ch = &chars[s];
        let index = gl / ch.order;
        let special_index = sl / ch.special.order as u128;
        let coeff = BigRational::new(BigInt::from(index) * BigInt::from(mult), BigInt::from(special_index) * &qpow);
        let square = index * size;
        let root = square.sqrt();
        if root * root != square {
            violations.push(format!("shadow {s}: index {index} times class size {size} is not a square"));
            continue;
        }
        for (&d, &k) in &ch.special.zeta() {
            let n = (root * d as u128)
                .to_u64()
                .ok_or_else(|| Error::InvalidParameter("dimension exceeds 64 bits".into()))?;
            let e = terms.entry(n).or_insert_with(BigRational::zero);
            *e += &coeff * BigRational::from_integer(BigInt::from(k));
        }
    }
    let mut asm = CliffordAssembly {
        q,
        level,
        terms,
        violations,
        shadows: catalogue.entries.len(),
        moments: MomentReport {
            at_zero: String::new(),
            at_minus_two: String::new(),
            class_number: None,
            group_order: String::new(),
            classes_match: None,
            order_match: false,
        },
    };
    let order = BigInt::from(q).pow(8 * (level - 1)) * BigInt::from(sl);
    let class_number = match level {
        1 if !opts.skip_class_oracle => {
            let g = FiniteGroup::generated_by(q, &standard_generators(q, true), opts.dixon.order_limit)?;
            Some(g.conjugacy_classes().count() as u64)
        }
        2 if !opts.skip_class_oracle => Some(sl3_level2_class_number(q, &opts.dixon)?),
        _ => None,
    };
    let z = asm.evaluate(0);
    let m2 = asm.evaluate(-2);
    asm.moments = MomentReport {
        at_zero: z.to_string(),
        at_minus_two: m2.to_string(),
        class_number,
        group_order: order.to_string(),
        classes_match: class_number.map(|c| z == BigRational::from_integer(BigInt::from(c))),
        order_match: m2 == BigRational::from_integer(order),
    };
    Ok(asm)
}

/// Lift to `SL3(Z/p^2)` of a matrix in `SL3(F_p)`.
fn lift(x: &Mat3, p: u64) -> Mat3 {
    let m = p * p;
    let d = mat3::det(x, m);
    let inv = inv_mod(d, m).expect("unit determinant");
    let mut out = *x;
    for v in out.iter_mut().take(3) {
        *v = *v * inv % m;
    }
    out
}

fn sl3_basis() -> Vec<Mat3> {
    let mut b = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                b.push(mat3::unit_matrix(i, j));
            }
        }
    }
    b.push([1, 0, 0, 0, 0, 0, 0, 0, 0]);
    b.push([0, 0, 0, 0, 1, 0, 0, 0, 0]);
    b
}

/// Number of conjugacy classes of `SL3(Z/p^2)`, by counting orbits of
/// centralizers in `SL3(F_p)` on the fibers of the reduction map.
pub fn sl3_level2_class_number(p: u64, opts: &DixonOptions) -> Result<u64> {
    let m = p * p;
    let g = FiniteGroup::generated_by(p, &standard_generators(p, true), opts.order_limit)?;
    let classes = g.conjugacy_classes();
    let mut basis = sl3_basis();
    for b in basis.iter_mut().skip(6) {
        b[8] = p - 1;
    }
    let reps: Vec<Mat3> = classes.representatives.iter().map(|&i| g.elements()[i]).collect();
    let counts: Vec<u64> = reps
        .par_iter()
        .map(|g0| -> Result<u64> {
            let g0_inv = mat3::inverse(g0, p).expect("unit");
            let image: Vec<Vec<u64>> =
                basis.iter().map(|y| mat3::sub(&mat3::conj(&g0_inv, y, g0, p), y, p).to_vec()).collect();
            let w = mat3::span_basis(&image, p);
            let pivots: Vec<usize> = w.iter().map(|r| r.iter().position(|&x| x != 0).expect("nonzero")).collect();
            let reduce = |x: &Mat3| -> Mat3 {
                let mut x = *x;
                for (row, &pc) in w.iter().zip(&pivots) {
                    let f = x[pc];
                    if f != 0 {
                        for k in 0..9 {
                            x[k] = (x[k] + p * p - f * row[k] % p) % p;
                        }
                    }
                }
                x
            };
            let mut complement = w.clone();
            let mut comp_vecs = Vec::new();
            for b in &basis {
                if !mat3::in_span(&complement, &b.to_vec(), p) {
                    complement.push(b.to_vec());
                    complement = mat3::span_basis(&complement, p);
                    comp_vecs.push(*b);
                }
            }
            let k = comp_vecs.len() as u32;
            let npts = p.pow(k) as usize;
            let mut index: HashMap<Mat3, u32> = HashMap::with_capacity(npts);
            let mut points = Vec::with_capacity(npts);
            for code in 0..npts as u64 {
                let mut x = mat3::ZERO;
                let mut c = code;
                for v in &comp_vecs {
                    x = mat3::add(&x, &mat3::scale(v, c % p, p), p);
                    c /= p;
                }
                let r = reduce(&x);
                index.insert(r, points.len() as u32);
                points.push(r);
            }
            let cent: Vec<Mat3> = g
                .elements()
                .iter()
                .filter(|z| mat3::mul(z, g0, p) == mat3::mul(g0, z, p))
                .copied()
                .collect();
            let gens: Vec<Mat3> = if cent.len() == g.order() {
                g.generators().to_vec()
            } else {
                FiniteGroup::from_elements(p, &cent, opts.seed)?.generators().to_vec()
            };
            let g0_hat = lift(g0, p);
            let g0_hat_inv = mat3::inverse(&g0_hat, m).expect("unit");
            let actions: Vec<(Mat3, Mat3, Mat3)> = gens
                .iter()
                .map(|z| {
                    let zh = lift(z, p);
                    let zh_inv = mat3::inverse(&zh, m).expect("unit");
                    let c = mat3::mul(&mat3::mul(&g0_hat_inv, &zh, m), &mat3::mul(&g0_hat, &zh_inv, m), m);
                    let t: Mat3 = std::array::from_fn(|i| {
                        let v = (c[i] + m - mat3::ONE[i]) % m;
                        debug_assert_eq!(v % p, 0);
                        v / p
                    });
                    (*z, mat3::inverse(z, p).expect("unit"), t)
                })
                .collect();
            let mut seen = vec![false; npts];
            let mut orbits = 0u64;
            for start in 0..npts {
                if seen[start] {
                    continue;
                }
                orbits += 1;
                seen[start] = true;
                let mut stack = vec![start];
                while let Some(i) = stack.pop() {
                    for (z, zi, t) in &actions {
                        let y = reduce(&mat3::add(&mat3::conj(z, &points[i], zi, p), t, p));
                        let j = *index.get(&y).ok_or_else(|| Error::Inconsistent("fiber action left the quotient".into()))?
                            as usize;
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            Ok(orbits)
        })
        .collect::<Result<_>>()?;
    Ok(counts.iter().sum())
}
