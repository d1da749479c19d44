//! Laurent polynomials in `q` (any integer exponent) and `t = q^{-s}`
//! (nonnegative exponent), plus the univariate `q`-only slice type.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Scalar type usable as a coefficient.
///
/// Exact types (`BigRational`, `Ratio<i64>`) give exact canonical forms; floats
/// work but cancellation tests become approximate.
pub trait Coefficient:
    Clone + Num + Neg<Output = Self> + PartialEq + fmt::Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

impl<T> Coefficient for T where
    T: Clone + Num + Neg<Output = T> + PartialEq + fmt::Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

pub(crate) fn int_pow<C: Coefficient>(base: i64, exp: i64) -> C {
    let b = C::from_i64(base).expect("base fits coefficient type");
    let mut acc = C::one();
    for _ in 0..exp.unsigned_abs() {
        acc = acc * b.clone();
    }
    if exp < 0 {
        C::one() / acc
    } else {
        acc
    }
}

/// Univariate Laurent polynomial in `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QPoly<C> {
    terms: BTreeMap<i64, C>,
}

impl<C: Coefficient> Default for QPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> QPoly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn monomial(c: C, a: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(a, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (a, c) in iter {
            p.add_term(a, c);
        }
        p
    }

    pub fn add_term(&mut self, a: i64, c: C) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&a) {
            Some(v) => {
                *v = v.clone() + c;
                v.is_zero()
            }
            None => {
                self.terms.insert(a, c);
                false
            }
        };
        if remove {
            self.terms.remove(&a);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.terms.iter().map(|(a, c)| (*a, c))
    }

    pub fn coefficient(&self, a: i64) -> C {
        self.terms.get(&a).cloned().unwrap_or_else(C::zero)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, c) in self.terms() {
            for (b, d) in other.terms() {
                out.add_term(a + b, c.clone() * d.clone());
            }
        }
        out
    }

    /// Multiply by `c q^shift`.
    pub fn scale_shift(&self, c: &C, shift: i64) -> Self {
        Self::from_terms(self.terms().map(|(a, v)| (a + shift, v.clone() * c.clone())))
    }

    /// Exact value at an integer `q0`.
    pub fn eval_exact(&self, q0: i64) -> C {
        let mut acc = C::zero();
        for (a, c) in self.terms() {
            acc = acc + c.clone() * int_pow::<C>(q0, a);
        }
        acc
    }

    pub fn eval<F: Float>(&self, q0: F) -> F {
        let mut acc = F::zero();
        for (a, c) in self.terms() {
            let cf = F::from(c.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(F::nan);
            acc = acc + cf * q0.powi(a as i32);
        }
        acc
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for QPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().rev().enumerate() {
            write_term(f, c, &[("q", *a)], i == 0)?;
        }
        Ok(())
    }
}

fn write_term<C: Coefficient + fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    c: &C,
    vars: &[(&str, i64)],
    first: bool,
) -> fmt::Result {
    let neg = c.to_f64().map(|v| v < 0.0).unwrap_or(false);
    let mag = if neg { -c.clone() } else { c.clone() };
    if first {
        if neg {
            write!(f, "-")?;
        }
    } else if neg {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let vars: Vec<_> = vars.iter().filter(|(_, e)| *e != 0).collect();
    let unit = mag.is_one();
    if !unit || vars.is_empty() {
        write!(f, "{mag}")?;
        if !vars.is_empty() {
            write!(f, "*")?;
        }
    }
    for (i, (v, e)) in vars.iter().enumerate() {
        if i > 0 {
            write!(f, "*")?;
        }
        if *e == 1 {
            write!(f, "{v}")?;
        } else {
            write!(f, "{v}^{e}")?;
        }
    }
    Ok(())
}

/// Bivariate Laurent polynomial: keys are `(q_exponent, t_exponent)`.
///
/// No zero coefficient is ever stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<C> {
    terms: BTreeMap<(i64, i64), C>,
}

impl<C: Coefficient> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> LaurentPoly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0, 0)
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: C, a: i64, b: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64, C)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (a, b, c) in iter {
            p.add_term(a, b, c);
        }
        p
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(i64, i64, i64)]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(a, b, c)| (a, b, C::from_i64(c).expect("coefficient conversion"))),
        )
    }

    pub fn add_term(&mut self, a: i64, b: i64, c: C) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                *v = v.clone() + c;
                v.is_zero()
            }
            None => {
                self.terms.insert(key, c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `(q_exponent, t_exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &C)> {
        self.terms.iter().map(|((a, b), c)| (*a, *b, c))
    }

    pub fn coefficient(&self, a: i64, b: i64) -> C {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(C::zero)
    }

    pub fn min_t(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.1).min()
    }

    pub fn max_t(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.1).max()
    }

    /// Term with the smallest t-exponent, ties broken by smallest q-exponent.
    pub fn leading_term(&self) -> Option<(i64, i64, C)> {
        self.terms
            .iter()
            .min_by_key(|((a, b), _)| (*b, *a))
            .map(|((a, b), c)| (*a, *b, c.clone()))
    }

    /// Coefficient of `t^k`, as a polynomial in `q`.
    pub fn t_slice(&self, k: i64) -> QPoly<C> {
        QPoly::from_terms(
            self.terms
                .iter()
                .filter(|((_, b), _)| *b == k)
                .map(|((a, _), c)| (*a, c.clone())),
        )
    }

    /// All nonzero t-slices keyed by t-exponent.
    pub fn t_slices(&self) -> BTreeMap<i64, QPoly<C>> {
        let mut out: BTreeMap<i64, QPoly<C>> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            out.entry(*b).or_default().add_term(*a, c.clone());
        }
        out
    }

    pub fn from_t_slices(slices: &BTreeMap<i64, QPoly<C>>) -> Self {
        let mut p = Self::zero();
        for (b, s) in slices {
            for (a, c) in s.terms() {
                p.add_term(a, *b, c.clone());
            }
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b, c) in other.terms() {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b, c) in other.terms() {
            out.add_term(a, b, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.terms().map(|(a, b, c)| (a, b, -c.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, b, c) in self.terms() {
            for (a2, b2, d) in other.terms() {
                out.add_term(a + a2, b + b2, c.clone() * d.clone());
            }
        }
        out
    }

    /// Multiply by `c q^da t^db`.
    pub fn scale_shift(&self, c: &C, da: i64, db: i64) -> Self {
        Self::from_terms(self.terms().map(|(a, b, v)| (a + da, b + db, v.clone() * c.clone())))
    }

    /// Substitute `q -> q^fq` and `t -> t^ft`.
    pub fn substitute_powers(&self, fq: i64, ft: i64) -> Self {
        Self::from_terms(self.terms().map(|(a, b, c)| (a * fq, b * ft, c.clone())))
    }

    /// Multiply by the geometric factor `1 - q^a t^b`.
    pub fn mul_geometric(&self, a: i64, b: i64) -> Self {
        let mut out = self.clone();
        for (x, y, c) in self.terms() {
            out.add_term(x + a, y + b, -c.clone());
        }
        out
    }

    /// Exact division by `1 - q^a t^b` (`b >= 1`); `None` if it does not divide.
    pub fn div_geometric(&self, a: i64, b: i64) -> Option<Self> {
        assert!(b >= 1, "geometric factor needs a positive t-exponent");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let slices = self.t_slices();
        let lo = *slices.keys().next().unwrap();
        let hi = *slices.keys().next_back().unwrap();
        if hi - lo < b {
            return None;
        }
        // Q_k = N_k + q^a Q_{k-b}, for lo <= k <= hi - b; the remaining N_k must be
        // cancelled by q^a Q_{k-b}.
        let mut quotient: BTreeMap<i64, QPoly<C>> = BTreeMap::new();
        let empty = QPoly::zero();
        for k in lo..=hi {
            let nk = slices.get(&k).unwrap_or(&empty);
            let carry = quotient
                .get(&(k - b))
                .map(|p| p.scale_shift(&C::one(), a))
                .unwrap_or_default();
            let qk = nk.add(&carry);
            if k <= hi - b {
                if !qk.is_zero() {
                    quotient.insert(k, qk);
                }
            } else if !qk.is_zero() {
                return None;
            }
        }
        Some(Self::from_t_slices(&quotient))
    }

    /// Replace `q -> q^{-1}` and `t -> t^{-1}`.
    pub fn invert_variables(&self) -> Self {
        Self::from_terms(self.terms().map(|(a, b, c)| (-a, -b, c.clone())))
    }

    pub fn eval<F: Float>(&self, q0: F, t0: F) -> F {
        let mut acc = F::zero();
        for (a, b, c) in self.terms() {
            let cf = F::from(c.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(F::nan);
            acc = acc + cf * q0.powi(a as i32) * t0.powi(b as i32);
        }
        acc
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|((a, b), _)| (*b, -*a));
        for (i, ((a, b), c)) in keys.into_iter().enumerate() {
            write_term(f, c, &[("q", *a), ("t", *b)], i == 0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = LaurentPoly<BigRational>;

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = P::monomial(BigRational::from_integer(3.into()), 1, 2);
        p.add_term(1, 2, BigRational::from_integer((-3).into()));
        assert!(p.is_zero());
    }

    #[test]
    fn geometric_division_round_trips() {
        let p = P::from_int_terms(&[(0, 0, 1), (-3, 2, 5), (4, 3, -2)]);
        let prod = p.mul_geometric(2, 3);
        assert_eq!(prod.div_geometric(2, 3), Some(p.clone()));
        assert_eq!(p.div_geometric(1, 2), None);
    }

    #[test]
    fn display_is_readable() {
        let p = P::from_int_terms(&[(0, 0, 1), (1, 2, -1)]);
        assert_eq!(p.to_string(), "1 - q*t^2");
        let s = QPoly::<BigRational>::from_terms([(9, BigRational::from_integer(1.into())), (-1, BigRational::from_integer((-2).into()))]);
        assert_eq!(s.to_string(), "q^9 - 2*q^-1");
    }
}
