//! Global Euler products of local representation zeta factors: coefficient
//! streams, the archimedean factor of `SL3(C)`, multiplicative convolution,
//! abscissae, pole factorization and partial-sum asymptotics.

mod analytic;

pub use analytic::{
    abscissa_of_product, euler_partial_logs, growth_exponent, partial_sum_fit, pole_factorization,
    riemann_zeta_check, PoleFactorization, TauberianFit, ZetaCheck,
};

use crate::a2_formulas::{A2Variant, LocalFactorFamily};
use crate::error::{Error, Result};
use crate::zeta_core::{GradedCoefficients, QPoly};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Debug;

/// Scalar type of Dirichlet coefficients.
pub trait StreamScalar: Copy + Send + Sync + Zero + One + PartialOrd + ToPrimitive + Debug {
    /// Coefficient of a local factor at `q = p`.
    fn from_local(poly: &QPoly<BigRational>, p: u64) -> Result<Self>;
    fn mul_checked(self, other: Self) -> Result<Self>;
    fn add_checked(self, other: Self) -> Result<Self>;
}

fn overflow() -> Error {
    Error::InvalidParameter("coefficient overflow".into())
}

macro_rules! int_scalar {
    ($t:ty) => {
        impl StreamScalar for $t {
            fn from_local(poly: &QPoly<BigRational>, p: u64) -> Result<Self> {
                let v = poly.eval_exact(p as i64);
                if !v.is_integer() {
                    return Err(Error::NotRepresentable(format!("local coefficient {v} at p = {p} is not an integer")));
                }
                v.to_integer()
                    .try_into()
                    .map_err(|_| Error::NotRepresentable(format!("local coefficient {v} at p = {p} is out of range")))
            }
            fn mul_checked(self, other: Self) -> Result<Self> {
                self.checked_mul(other).ok_or_else(overflow)
            }
            fn add_checked(self, other: Self) -> Result<Self> {
                self.checked_add(other).ok_or_else(overflow)
            }
        }
    };
}

int_scalar!(u64);
int_scalar!(u128);

impl StreamScalar for f64 {
    fn from_local(poly: &QPoly<BigRational>, p: u64) -> Result<Self> {
        Ok(poly.eval(p as f64))
    }
    fn mul_checked(self, other: Self) -> Result<Self> {
        Ok(self * other)
    }
    fn add_checked(self, other: Self) -> Result<Self> {
        Ok(self + other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StreamSource {
    Archimedean,
    Local { family: String, p: u64 },
    Global { description: String },
    Constant,
}

/// Dirichlet coefficients `r_1, ..., r_N`.
#[derive(Clone, Debug)]
pub struct CoefficientStream<T> {
    pub source: StreamSource,
    /// `values[n]` is `r_n`; `values[0]` is unused.
    values: Vec<T>,
}

impl<T: StreamScalar> CoefficientStream<T> {
    pub fn from_values(source: StreamSource, values: Vec<T>) -> Self {
        Self { source, values }
    }

    /// The constant series `1`.
    pub fn unit(bound: usize) -> Self {
        let mut values = vec![T::zero(); bound + 1];
        if bound >= 1 {
            values[1] = T::one();
        }
        Self { source: StreamSource::Constant, values }
    }

    pub fn bound(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn get(&self, n: usize) -> T {
        self.values.get(n).copied().unwrap_or_else(T::zero)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `R_N = sum_{n <= N} r_n` for every `N`, as floats.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        for (n, v) in self.values.iter().enumerate() {
            if n > 0 {
                acc += v.to_f64().unwrap_or(f64::NAN);
            }
            out.push(acc);
        }
        out
    }

    /// `sum_{n <= N} r_n n^{-s}`, summed from the tail for accuracy.
    pub fn partial_value(&self, s: f64) -> f64 {
        (1..self.values.len())
            .rev()
            .map(|n| self.values[n].to_f64().unwrap_or(f64::NAN) * (n as f64).powf(-s))
            .sum()
    }

    /// Dirichlet product truncated at the smaller bound.
    pub fn dirichlet_mul(&self, other: &Self) -> Result<Self> {
        let n = self.bound().min(other.bound());
        let mut out = vec![T::zero(); n + 1];
        for a in 1..=n {
            let x = self.values[a];
            if x.is_zero() {
                continue;
            }
            for b in 1..=n / a {
                let y = other.values[b];
                if !y.is_zero() {
                    out[a * b] = out[a * b].add_checked(x.mul_checked(y)?)?;
                }
            }
        }
        Ok(Self { source: StreamSource::Global { description: "product".into() }, values: out })
    }
}

/// Dimension `(a+1)(b+1)(a+b+2)/2` of the irreducible `SL3(C)`-module of
/// highest weight `(a, b)`.
pub fn weyl_dimension(a: u64, b: u64) -> u64 {
    (a + 1) * (b + 1) * (a + b + 2) / 2
}

/// Number of irreducible rational representations of `SL3(C)` of each
/// dimension up to `k`.
pub fn archimedean_stream<T: StreamScalar>(k: usize) -> Result<CoefficientStream<T>> {
    if k < 1 {
        return Err(Error::InvalidParameter("dimension cutoff must be >= 1".into()));
    }
    let mut values = vec![T::zero(); k + 1];
    let mut a = 0u64;
    while weyl_dimension(a, 0) as usize <= k {
        let mut b = 0u64;
        loop {
            let d = weyl_dimension(a, b) as usize;
            if d > k {
                break;
            }
            values[d] = values[d].add_checked(T::one())?;
            b += 1;
        }
        a += 1;
    }
    Ok(CoefficientStream { source: StreamSource::Archimedean, values })
}

/// Coefficients `c_k` at `p^k <= bound` of one local factor.
pub fn local_stream<T: StreamScalar>(
    family: &LocalFactorFamily<BigRational>,
    p: u64,
    bound: usize,
) -> Result<CoefficientStream<T>> {
    let kmax = max_power(p, bound);
    let graded = family.base_extend(1)?.expand(kmax);
    let coeffs = local_coefficients::<T>(&graded, p, kmax)?;
    let mut values = vec![T::zero(); bound + 1];
    let mut pk = 1usize;
    for c in coeffs {
        values[pk] = c;
        pk = pk.saturating_mul(p as usize);
    }
    Ok(CoefficientStream { source: StreamSource::Local { family: family.name.clone(), p }, values })
}

fn max_power(p: u64, bound: usize) -> usize {
    let mut k = 0;
    let mut pk = 1u128;
    while pk * p as u128 <= bound as u128 {
        pk *= p as u128;
        k += 1;
    }
    k
}

fn local_coefficients<T: StreamScalar>(graded: &GradedCoefficients<BigRational>, p: u64, kmax: usize) -> Result<Vec<T>> {
    (0..=kmax)
        .map(|k| graded.get(k).map_or(Ok(T::zero()), |poly| T::from_local(poly, p)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "discriminant", rename_all = "lowercase")]
pub enum Field {
    Rationals,
    /// `Q(sqrt D)` for a fundamental discriminant `D`.
    Quadratic(i64),
}

/// A global Euler product over the rational primes.
#[derive(Clone, Debug)]
pub struct GlobalSpec {
    pub field: Field,
    /// Excluded primes; ramified primes of a quadratic field are added.
    pub excluded: BTreeSet<u64>,
    /// Factor at primes of `Q` and at split primes.
    pub split_family: LocalFactorFamily<BigRational>,
    /// Factor at inert primes of a quadratic field.
    pub inert_family: Option<LocalFactorFamily<BigRational>>,
    pub archimedean_copies: u32,
}

impl GlobalSpec {
    pub fn rationals(family: LocalFactorFamily<BigRational>, archimedean_copies: u32) -> Self {
        Self { field: Field::Rationals, excluded: BTreeSet::new(), split_family: family, inert_family: None, archimedean_copies }
    }

    /// `Q(sqrt d)` with the `sl3` model at split and the `su3` model at
    /// inert primes.
    pub fn quadratic_model(d: i64, archimedean_copies: u32) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::InvalidParameter(format!("{d} is not a fundamental discriminant")));
        }
        Ok(Self {
            field: Field::Quadratic(d),
            excluded: BTreeSet::new(),
            split_family: LocalFactorFamily::model(A2Variant::Sl3),
            inert_family: Some(LocalFactorFamily::model(A2Variant::Su3)),
            archimedean_copies,
        })
    }

    pub fn with_excluded(mut self, primes: impl IntoIterator<Item = u64>) -> Self {
        self.excluded.extend(primes);
        self
    }

    /// Local family at `p`, or `None` when `p` is excluded or ramified.
    pub fn family_at(&self, p: u64) -> Option<&LocalFactorFamily<BigRational>> {
        if self.excluded.contains(&p) {
            return None;
        }
        match self.field {
            Field::Rationals => Some(&self.split_family),
            Field::Quadratic(d) => match kronecker(d, p) {
                1 => Some(&self.split_family),
                -1 => self.inert_family.as_ref(),
                _ => None,
            },
        }
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    let squarefree = |n: i64| (2..).take_while(|k: &i64| k * k <= n.abs()).all(|k| n % (k * k) != 0);
    match d.rem_euclid(4) {
        1 => d != 1 && squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
        }
        _ => false,
    }
}

/// Kronecker symbol `(d / p)` for a prime `p`.
pub fn kronecker(d: i64, p: u64) -> i32 {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let a = d.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let mut r = 1u128;
    let mut b = a as u128;
    let m = p as u128;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

pub fn primes_up_to(n: usize) -> Vec<u64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Local coefficient vectors for every included prime up to `bound`,
/// computed in parallel; primes whose factor is trivial below `bound` are
/// dropped.
pub fn local_tables<T: StreamScalar>(spec: &GlobalSpec, bound: usize) -> Result<Vec<(u64, Vec<T>)>> {
    let kmax = max_power(2, bound);
    let split = spec.split_family.base_extend(1)?.expand(kmax);
    let inert = spec.inert_family.as_ref().map(|f| f.base_extend(1).map(|z| z.expand(kmax))).transpose()?;
    let primes = primes_up_to(bound);
    let tables: Vec<Option<(u64, Vec<T>)>> = primes
        .par_iter()
        .map(|&p| {
            let Some(fam) = spec.family_at(p) else { return Ok(None) };
            let graded = if std::ptr::eq(fam, &spec.split_family) { &split } else { inert.as_ref().expect("inert family") };
            let c = local_coefficients::<T>(graded, p, max_power(p, bound))?;
            if c[0] != T::one() {
                return Err(Error::InvalidParameter(format!(
                    "local factor {} has constant term {:?} at p = {p}; Euler products need 1",
                    fam.name, c[0]
                )));
            }
            Ok(c[1..].iter().any(|x| !x.is_zero()).then_some((p, c)))
        })
        .collect::<Result<_>>()?;
    Ok(tables.into_iter().flatten().collect())
}

/// Multiplies the local factors into `values` one prime at a time, in the
/// given order.
pub fn multiply_local_factors<T: StreamScalar>(values: &mut [T], tables: &[(u64, Vec<T>)]) -> Result<()> {
    let n = values.len() - 1;
    for (p, c) in tables {
        let p = *p as usize;
        for m in (1..=n / p).rev() {
            if m % p == 0 || values[m].is_zero() {
                continue;
            }
            let v = values[m];
            let mut pk = m;
            for ck in &c[1..] {
                pk *= p;
                if pk > n {
                    break;
                }
                values[pk] = v.mul_checked(*ck)?;
            }
        }
    }
    Ok(())
}

/// Global `r_n` for `n <= bound`: the Euler product over primes followed by
/// convolution with the archimedean factors.
pub fn euler_convolve<T: StreamScalar>(spec: &GlobalSpec, bound: usize) -> Result<CoefficientStream<T>> {
    if bound < 1 {
        return Err(Error::InvalidParameter("bound must be >= 1".into()));
    }
    let tables = local_tables::<T>(spec, bound)?;
    let mut values = vec![T::zero(); bound + 1];
    values[1] = T::one();
    multiply_local_factors(&mut values, &tables)?;
    let mut stream = CoefficientStream { source: StreamSource::Constant, values };
    if spec.archimedean_copies > 0 {
        let arch = archimedean_stream::<T>(bound)?;
        for _ in 0..spec.archimedean_copies {
            stream = convolve_sparse(&stream, &arch)?;
        }
    }
    stream.source = StreamSource::Global {
        description: format!(
            "{:?}, {} with {} archimedean copies, excluded {:?}",
            spec.field, spec.split_family.name, spec.archimedean_copies, spec.excluded
        ),
    };
    Ok(stream)
}

/// Dirichlet product where `sparse` has few nonzero entries.
fn convolve_sparse<T: StreamScalar>(dense: &CoefficientStream<T>, sparse: &CoefficientStream<T>) -> Result<CoefficientStream<T>> {
    let n = dense.bound().min(sparse.bound());
    let support: Vec<(usize, T)> =
        (1..=n).filter(|&d| !sparse.values[d].is_zero()).map(|d| (d, sparse.values[d])).collect();
    let mut out = vec![T::zero(); n + 1];
    for (d, a) in support {
        for m in 1..=n / d {
            let v = dense.values[m];
            if !v.is_zero() {
                out[d * m] = out[d * m].add_checked(a.mul_checked(v)?)?;
            }
        }
    }
    Ok(CoefficientStream { source: dense.source.clone(), values: out })
}

/// `(1 - t)^{-k}`: the local factor of `zeta(s)^k`.
pub fn zeta_power_family(k: usize) -> Result<LocalFactorFamily<BigRational>> {
    let w = crate::zeta_core::ZetaRational::geometric(&vec![(0, 1); k])?;
    Ok(LocalFactorFamily::custom(&format!("zeta^{k}"), w, crate::a2_formulas::Extension::ResidueCardinality))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_divisors(n: usize) -> u64 {
        (1..=n).filter(|d| n % d == 0).count() as u64
    }

    #[test]
    fn archimedean_dimensions() {
        let s = archimedean_stream::<u64>(10).unwrap();
        let dims: Vec<u64> = (1..=10).flat_map(|n| std::iter::repeat(n as u64).take(s.get(n) as usize)).collect();
        assert_eq!(dims, vec![1, 3, 3, 6, 6, 8, 10, 10]);
        let mut brute = [0u64; 11];
        for a in 0..3 {
            for b in 0..3 {
                let d = weyl_dimension(a, b) as usize;
                if d <= 10 {
                    brute[d] += 1;
                }
            }
        }
        assert_eq!(s.get(1), 1);
        assert_eq!(&brute[..7], &s.values()[..7]);
    }

    #[test]
    fn zeta_and_divisor_streams() {
        let one = euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(1).unwrap(), 0), 1000).unwrap();
        assert!((1..=1000).all(|n| one.get(n) == 1));
        let two = euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(2).unwrap(), 0), 2000).unwrap();
        assert!((1..=2000).all(|n| two.get(n) == brute_divisors(n)));
        let direct = one.dirichlet_mul(&one).unwrap();
        assert_eq!(direct.values(), &two.values()[..direct.values().len()]);
    }

    #[test]
    fn trivial_local_factors_give_archimedean_stream() {
        let trivial = LocalFactorFamily::custom(
            "one",
            crate::zeta_core::ZetaRational::one(),
            crate::a2_formulas::Extension::ResidueCardinality,
        );
        let g = euler_convolve::<u64>(&GlobalSpec::rationals(trivial, 1), 5000).unwrap();
        assert_eq!(g.values(), archimedean_stream::<u64>(5000).unwrap().values());
    }

    #[test]
    fn local_stream_matches_expansion() {
        let fam = LocalFactorFamily::model(A2Variant::Sl3);
        let s = local_stream::<f64>(&fam, 3, 81).unwrap();
        assert_eq!(s.get(1), 1.0);
        assert_eq!(s.get(3), 0.0);
        let u = 27.0 + 9.0 - 3.0 - 1.0 - 1.0 / 3.0;
        assert!((s.get(9) - (3.0 + u / 27.0)).abs() < 1e-12);
        assert_eq!(s.get(2), 0.0);
    }

    #[test]
    fn integral_streams_reject_rational_coefficients() {
        let spec = GlobalSpec::rationals(LocalFactorFamily::model(A2Variant::Sl3), 0);
        assert!(matches!(euler_convolve::<u64>(&spec, 100), Err(Error::NotRepresentable(_))));
        let spec = GlobalSpec::rationals(LocalFactorFamily::theorem_d(A2Variant::Sl3, 1).unwrap(), 0);
        assert!(matches!(euler_convolve::<f64>(&spec, 100), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn quadratic_classification() {
        assert!(is_fundamental_discriminant(5));
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(8));
        assert!(!is_fundamental_discriminant(12 * 4));
        assert!(!is_fundamental_discriminant(1));
        // 5 splits at primes = +-1 mod 5
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(5, 7), -1);
        assert_eq!(kronecker(5, 5), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-4, 2), 0);
        let spec = GlobalSpec::quadratic_model(5, 0).unwrap();
        assert_eq!(spec.family_at(11).unwrap().name, "sl3-model");
        assert_eq!(spec.family_at(7).unwrap().name, "su3-model");
        assert!(spec.family_at(5).is_none());
        assert!(GlobalSpec::quadratic_model(3, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prime_order_does_not_matter(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let spec = GlobalSpec::rationals(zeta_power_family(3).unwrap(), 0).with_excluded([3]);
            let n = 3000;
            let mut tables = local_tables::<u64>(&spec, n).unwrap();
            let mut a = vec![0u64; n + 1];
            a[1] = 1;
            multiply_local_factors(&mut a, &tables).unwrap();
            tables.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut b = vec![0u64; n + 1];
            b[1] = 1;
            multiply_local_factors(&mut b, &tables).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn multiplicativity_to_ten_thousand() {
        let spec = GlobalSpec::rationals(zeta_power_family(3).unwrap(), 0).with_excluded([2, 7]);
        let n = 10_000;
        let s = euler_convolve::<u64>(&spec, n).unwrap();
        for a in 1..=100usize {
            for b in 1..=n / a {
                if num_integer::Integer::gcd(&a, &b) == 1 {
                    assert_eq!(s.get(a * b), s.get(a) * s.get(b));
                }
            }
        }
        assert_eq!(s.get(2), 0);
        assert_eq!(s.get(5), 3);
    }
}
