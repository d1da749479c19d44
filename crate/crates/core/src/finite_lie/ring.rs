//! Finite local principal ideal rings `Z/p^l` and Galois rings `GR(p^l, f)`.

use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

/// A finite local ring whose maximal ideal is generated by the rational prime `p`.
pub trait LocalRing: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + Debug + Send + Sync;

    fn p(&self) -> u64;
    /// Nilpotency level `l` of `p` (so `p^l = 0`).
    fn level(&self) -> u32;
    fn residue_degree(&self) -> u32;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: i64) -> Self::Elem;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;

    /// `p`-adic valuation, capped at `level` (the value for zero).
    fn valuation(&self, x: &Self::Elem) -> u32;
    fn inv_unit(&self, x: &Self::Elem) -> Option<Self::Elem>;
    /// Some `y` with `p^a y = x`; requires `valuation(x) >= a`.
    fn div_pi_pow(&self, x: &Self::Elem, a: u32) -> Self::Elem;

    /// Enumeration of all `q^l` elements.
    fn element(&self, index: u64) -> Self::Elem;
    fn index_of(&self, x: &Self::Elem) -> u64;

    /// Elementary-divisor exponents of a square matrix (row-major), sorted.
    fn divisor_exponents(&self, data: &[Self::Elem], n: usize) -> Vec<u32> {
        super::snf::generic_exponents(self, data, n, n)
    }

    fn residue_cardinality(&self) -> u64 {
        self.p().pow(self.residue_degree())
    }

    fn cardinality(&self) -> u64 {
        self.residue_cardinality().pow(self.level())
    }

    fn is_zero(&self, x: &Self::Elem) -> bool {
        *x == self.zero()
    }

    fn is_unit(&self, x: &Self::Elem) -> bool {
        self.valuation(x) == 0
    }

    /// The same ring at another level, sharing the residue field presentation.
    fn at_level(&self, level: u32) -> Self;

    /// Reduce an element of `self` into the ring `target` of lower level.
    fn reduce_into(&self, x: &Self::Elem, target: &Self) -> Self::Elem;

    /// Canonical lift of an element of a lower-level ring into `self`.
    fn lift_from(&self, x: &Self::Elem, source: &Self) -> Self::Elem;
}

fn check_prime(p: u64) -> Result<()> {
    if !crate::a2_formulas::is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    Ok(())
}

/// `Z/p^l` with elements stored as canonical residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zpl {
    p: u64,
    level: u32,
    modulus: u64,
}

impl Zpl {
    pub fn new(p: u64, level: u32) -> Result<Self> {
        check_prime(p)?;
        if level == 0 {
            return Err(Error::InvalidParameter("level must be >= 1".into()));
        }
        let modulus = p
            .checked_pow(level)
            .filter(|m| *m < (1 << 31))
            .ok_or_else(|| Error::InvalidParameter(format!("{p}^{level} exceeds 2^31")))?;
        Ok(Self { p, level, modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

pub(crate) fn inv_mod(x: u64, m: u64) -> Option<u64> {
    let (mut a, mut b) = (x as i64 % m as i64, m as i64);
    let (mut u, mut v) = (1i64, 0i64);
    while b != 0 {
        let t = a / b;
        a -= t * b;
        std::mem::swap(&mut a, &mut b);
        u -= t * v;
        std::mem::swap(&mut u, &mut v);
    }
    (a == 1).then(|| u.rem_euclid(m as i64) as u64)
}

impl LocalRing for Zpl {
    type Elem = u64;

    fn p(&self) -> u64 {
        self.p
    }
    fn level(&self) -> u32 {
        self.level
    }
    fn residue_degree(&self) -> u32 {
        1
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn from_int(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        (x + y) % self.modulus
    }
    fn sub(&self, x: &u64, y: &u64) -> u64 {
        (x + self.modulus - y) % self.modulus
    }
    fn neg(&self, x: &u64) -> u64 {
        (self.modulus - x) % self.modulus
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        x * y % self.modulus
    }
    fn valuation(&self, x: &u64) -> u32 {
        let mut x = *x;
        if x == 0 {
            return self.level;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }
    fn inv_unit(&self, x: &u64) -> Option<u64> {
        inv_mod(*x, self.modulus)
    }
    fn div_pi_pow(&self, x: &u64, a: u32) -> u64 {
        x / self.p.pow(a)
    }
    fn element(&self, index: u64) -> u64 {
        index % self.modulus
    }
    fn index_of(&self, x: &u64) -> u64 {
        *x
    }
    fn divisor_exponents(&self, data: &[u64], n: usize) -> Vec<u32> {
        super::snf::zpl_exponents(self.p, self.level, self.modulus, data, n)
    }
    fn at_level(&self, level: u32) -> Self {
        Zpl::new(self.p, level).expect("same prime at another level")
    }
    fn reduce_into(&self, x: &u64, target: &Self) -> u64 {
        x % target.modulus
    }
    fn lift_from(&self, x: &u64, _source: &Self) -> u64 {
        *x % self.modulus
    }
}

/// `GR(p^l, f) = (Z/p^l)[x] / (g)` with `g` monic of degree `f`, irreducible mod `p`.
///
/// Elements are coefficient vectors of length `f` in the power basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisRing {
    base: Zpl,
    f: u32,
    /// Coefficients `g_0..g_{f-1}` of `x^f + g_{f-1} x^{f-1} + ... + g_0`.
    modulus_poly: Vec<u64>,
    /// Images of `x^i` under Frobenius.
    frob_powers: Vec<Vec<u64>>,
}

fn poly_divides_mod_p(divisor: &[u64], dividend: &[u64], p: u64) -> bool {
    // both monic, coefficient vectors low -> high including leading 1
    let mut rem = dividend.to_vec();
    let dd = divisor.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p;
        let shift = rem.len() - 1 - dd;
        for (i, c) in divisor.iter().enumerate() {
            rem[shift + i] = (rem[shift + i] + p * p - lead * c % p) % p;
        }
        rem.pop();
    }
    rem.iter().all(|c| c % p == 0)
}

/// Irreducibility of a monic polynomial over `F_p` by trial division.
pub fn is_irreducible_mod_p(low_coeffs: &[u64], p: u64) -> bool {
    let f = low_coeffs.len();
    if f <= 1 {
        return true;
    }
    let mut full: Vec<u64> = low_coeffs.iter().map(|c| c % p).collect();
    full.push(1);
    for deg in 1..=f / 2 {
        let count = p.pow(deg as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(deg + 1);
            let mut r = idx;
            for _ in 0..deg {
                cand.push(r % p);
                r /= p;
            }
            cand.push(1);
            if poly_divides_mod_p(&cand, &full, p) {
                return false;
            }
        }
    }
    true
}

impl GaloisRing {
    /// Builds `GR(p^l, f)` with the lexicographically first irreducible modulus.
    pub fn new(p: u64, level: u32, f: u32) -> Result<Self> {
        if f == 0 {
            return Err(Error::InvalidParameter("residue degree f must be >= 1".into()));
        }
        check_prime(p)?;
        let f_us = f as usize;
        let count = p.pow(f);
        for idx in 0..count {
            let mut low = Vec::with_capacity(f_us);
            let mut r = idx;
            for _ in 0..f_us {
                low.push(r % p);
                r /= p;
            }
            if is_irreducible_mod_p(&low, p) {
                return Self::with_modulus(p, level, &low);
            }
        }
        Err(Error::ReducibleModulus)
    }

    pub fn with_modulus(p: u64, level: u32, low_coeffs: &[u64]) -> Result<Self> {
        let base = Zpl::new(p, level)?;
        let f = low_coeffs.len() as u32;
        if f == 0 {
            return Err(Error::InvalidParameter("modulus must have degree >= 1".into()));
        }
        base.modulus()
            .checked_pow(2)
            .ok_or_else(|| Error::InvalidParameter("ring too large".into()))?;
        if !is_irreducible_mod_p(low_coeffs, p) {
            return Err(Error::ReducibleModulus);
        }
        let mut ring = Self {
            modulus_poly: low_coeffs.iter().map(|c| c % base.modulus()).collect(),
            base,
            f,
            frob_powers: Vec::new(),
        };
        ring.frob_powers = ring.frobenius_images();
        Ok(ring)
    }

    pub fn base(&self) -> &Zpl {
        &self.base
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus_poly
    }

    fn generator(&self) -> Vec<u64> {
        let mut x = vec![0; self.f as usize];
        if self.f == 1 {
            // x = -g_0
            x[0] = self.base.neg(&self.modulus_poly[0]);
        } else {
            x[1] = 1;
        }
        x
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn eval_modulus(&self, y: &[u64]) -> (Vec<u64>, Vec<u64>) {
        // g(y) and g'(y) by Horner
        let f = self.f as usize;
        let y = &y.to_vec();
        let mut coeffs: Vec<Vec<u64>> = self.modulus_poly.iter().map(|c| self.scalar(*c)).collect();
        coeffs.push(self.one());
        let mut g = self.zero();
        for c in coeffs.iter().rev() {
            g = self.add(&self.mul(&g, y), c);
        }
        let mut dg = self.zero();
        for k in (1..=f).rev() {
            let ck = self.mul(&coeffs[k], &self.scalar(k as u64));
            dg = self.add(&self.mul(&dg, y), &ck);
        }
        (g, dg)
    }

    fn scalar(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.f as usize];
        v[0] = c % self.base.modulus();
        v
    }

    /// Hensel-lift the residue Frobenius `theta -> theta^p` to a root of `g`.
    fn frobenius_images(&self) -> Vec<Vec<u64>> {
        let f = self.f as usize;
        let theta = self.generator();
        let mut root = self.pow(&theta, self.base.p);
        for _ in 0..=self.base.level {
            let (g, dg) = self.eval_modulus(&root);
            let inv = self
                .inv_unit(&dg)
                .expect("g' is a unit at a simple root of a separable residue polynomial");
            root = self.sub(&root, &self.mul(&g, &inv));
        }
        let mut powers = Vec::with_capacity(f);
        let mut acc = self.one();
        for _ in 0..f {
            powers.push(acc.clone());
            acc = self.mul(&acc, &root);
        }
        powers
    }

    /// The ring automorphism lifting `x -> x^p` on the residue field.
    pub fn frobenius(&self, x: &[u64]) -> Vec<u64> {
        let mut acc = self.zero();
        for (c, pw) in x.iter().zip(&self.frob_powers) {
            let term: Vec<u64> = pw.iter().map(|v| v * c % self.base.modulus()).collect();
            acc = self.add(&acc, &term);
        }
        acc
    }
}

impl LocalRing for GaloisRing {
    type Elem = Vec<u64>;

    fn p(&self) -> u64 {
        self.base.p
    }
    fn level(&self) -> u32 {
        self.base.level
    }
    fn residue_degree(&self) -> u32 {
        self.f
    }
    fn zero(&self) -> Vec<u64> {
        vec![0; self.f as usize]
    }
    fn one(&self) -> Vec<u64> {
        self.scalar(1)
    }
    fn from_int(&self, v: i64) -> Vec<u64> {
        let mut x = self.zero();
        x[0] = self.base.from_int(v);
        x
    }
    fn add(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        x.iter().zip(y).map(|(a, b)| self.base.add(a, b)).collect()
    }
    fn sub(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        x.iter().zip(y).map(|(a, b)| self.base.sub(a, b)).collect()
    }
    fn neg(&self, x: &Vec<u64>) -> Vec<u64> {
        x.iter().map(|a| self.base.neg(a)).collect()
    }
    fn mul(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        let f = self.f as usize;
        let m = self.base.modulus();
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, a) in x.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % m;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (i, g) in self.modulus_poly.iter().enumerate() {
                prod[k - f + i] = (prod[k - f + i] + m - c * g % m) % m;
            }
            prod[k] = 0;
        }
        prod.truncate(f);
        prod
    }
    fn valuation(&self, x: &Vec<u64>) -> u32 {
        x.iter().map(|c| self.base.valuation(c)).min().unwrap_or(self.base.level)
    }
    fn inv_unit(&self, x: &Vec<u64>) -> Option<Vec<u64>> {
        if self.valuation(x) != 0 {
            return None;
        }
        let q = self.residue_cardinality();
        // residue inverse, then Newton iteration y <- y (2 - x y)
        let mut y = self.pow(x, q - 2);
        let two = self.from_int(2);
        for _ in 0..=(32 - self.base.level.leading_zeros()) {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
        }
        debug_assert_eq!(self.mul(x, &y), self.one());
        Some(y)
    }
    fn div_pi_pow(&self, x: &Vec<u64>, a: u32) -> Vec<u64> {
        x.iter().map(|c| self.base.div_pi_pow(c, a)).collect()
    }
    fn element(&self, mut index: u64) -> Vec<u64> {
        let m = self.base.modulus();
        (0..self.f)
            .map(|_| {
                let c = index % m;
                index /= m;
                c
            })
            .collect()
    }
    fn index_of(&self, x: &Vec<u64>) -> u64 {
        let m = self.base.modulus();
        x.iter().rev().fold(0, |acc, c| acc * m + c)
    }
    fn at_level(&self, level: u32) -> Self {
        Self::with_modulus(self.base.p, level, &self.modulus_poly)
            .expect("modulus irreducible at every level")
    }
    fn reduce_into(&self, x: &Vec<u64>, target: &Self) -> Vec<u64> {
        x.iter().map(|c| c % target.base.modulus()).collect()
    }
    fn lift_from(&self, x: &Vec<u64>, _source: &Self) -> Vec<u64> {
        x.iter().map(|c| c % self.base.modulus()).collect()
    }
}

/// `O/p^l` for an unramified `O` with residue degree `f`.
pub fn ring_make(p: u64, level: u32, f: u32) -> Result<GaloisRing> {
    if p == 2 {
        return Err(Error::InvalidParameter("residue characteristic must be odd".into()));
    }
    GaloisRing::new(p, level, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zpl_arithmetic() {
        let r = Zpl::new(5, 2).unwrap();
        assert_eq!(r.cardinality(), 25);
        assert_eq!(r.valuation(&10), 1);
        assert_eq!(r.valuation(&0), 2);
        assert_eq!(r.mul(&r.inv_unit(&7).unwrap(), &7), 1);
        assert!(r.inv_unit(&5).is_none());
        assert_eq!(r.div_pi_pow(&15, 1), 3);
        assert!(Zpl::new(6, 1).is_err());
    }

    #[test]
    fn trivial_extension_has_identity_frobenius() {
        let r = ring_make(5, 2, 1).unwrap();
        assert_eq!(r.cardinality(), 25);
        for i in 0..25 {
            let x = r.element(i);
            assert_eq!(r.frobenius(&x), x);
        }
    }

    #[test]
    fn field_frobenius_is_fifth_power() {
        let r = ring_make(5, 1, 2).unwrap();
        assert_eq!(r.cardinality(), 25);
        for i in 0..25 {
            let x = r.element(i);
            assert_eq!(r.frobenius(&x), r.pow(&x, 5));
        }
    }

    #[test]
    fn galois_ring_frobenius_fixes_exactly_the_base() {
        let r = ring_make(5, 2, 2).unwrap();
        assert_eq!(r.cardinality(), 625);
        let mut fixed = 0;
        for i in 0..625 {
            let x = r.element(i);
            let fx = r.frobenius(&x);
            assert_eq!(r.frobenius(&fx), x);
            if fx == x {
                fixed += 1;
                assert_eq!(x[1], 0, "fixed element outside Z/25: {x:?}");
            }
        }
        assert_eq!(fixed, 25);
    }

    #[test]
    fn frobenius_is_a_ring_automorphism() {
        let r = ring_make(7, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = r.cardinality();
            let (x, y) = (r.element(rng.gen_range(0..n)), r.element(rng.gen_range(0..n)));
            assert_eq!(r.frobenius(&r.add(&x, &y)), r.add(&r.frobenius(&x), &r.frobenius(&y)));
            assert_eq!(r.frobenius(&r.mul(&x, &y)), r.mul(&r.frobenius(&x), &r.frobenius(&y)));
        }
        let mut x = r.element(12345);
        for _ in 0..3 {
            x = r.frobenius(&x);
        }
        assert_eq!(x, r.element(12345));
    }

    #[test]
    fn reducible_modulus_is_rejected() {
        // x^2 - 1 = (x - 1)(x + 1)
        assert!(matches!(GaloisRing::with_modulus(5, 1, &[4, 0]), Err(Error::ReducibleModulus)));
        // x^2 - 2 is irreducible mod 5
        assert!(GaloisRing::with_modulus(5, 2, &[3, 0]).is_ok());
    }

    #[test]
    fn units_invert() {
        let r = ring_make(3, 3, 2).unwrap();
        for i in 0..r.cardinality() {
            let x = r.element(i);
            match r.inv_unit(&x) {
                Some(y) => assert_eq!(r.mul(&x, &y), r.one()),
                None => assert!(r.valuation(&x) > 0),
            }
            assert_eq!(r.index_of(&x), i);
        }
    }
}
