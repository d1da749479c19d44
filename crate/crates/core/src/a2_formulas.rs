//! Closed-form representation zeta functions of principal congruence
//! subgroups of `SL3(O)` and `SU3(O', O)`, plus base extension and the
//! functional-equation and abscissa-monotonicity checks built on them.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::zeta_core::{Coefficient, LaurentPoly, QPoly, ZetaRational};

/// Lie rank of `sl3` and `su3` over the base ring.
pub const A2_DIMENSION: i64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum A2Variant {
    Sl3,
    Su3,
}

impl A2Variant {
    pub const ALL: [A2Variant; 2] = [A2Variant::Sl3, A2Variant::Su3];

    pub fn name(self) -> &'static str {
        match self {
            A2Variant::Sl3 => "sl3",
            A2Variant::Su3 => "su3",
        }
    }
}

impl fmt::Display for A2Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for A2Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl3" => Ok(A2Variant::Sl3),
            "su3" => Ok(A2Variant::Su3),
            other => Err(Error::InvalidParameter(format!("unknown variant {other}"))),
        }
    }
}

fn c<C: Coefficient>(v: i64) -> C {
    C::from_i64(v).expect("small integer fits coefficient type")
}

/// `u(X)` for the variant: `X^3 + X^2 - X - 1 - X^-1` or `-X^3 + X^2 - X + 1 - X^-1`.
pub fn u_polynomial<C: Coefficient>(variant: A2Variant) -> QPoly<C> {
    let s = match variant {
        A2Variant::Sl3 => 1,
        A2Variant::Su3 => -1,
    };
    QPoly::from_terms([(3, c(s)), (2, c(1)), (1, c(-1)), (0, c(-s)), (-1, c(-1))])
}

/// Numerator `1 + u(q) q^-3 t^2 + u(q^-1) q^-2 t^3 + q^-5 t^5`.
fn a2_numerator<C: Coefficient>(variant: A2Variant) -> LaurentPoly<C> {
    let u = u_polynomial::<C>(variant);
    let mut n = LaurentPoly::one();
    for (a, v) in u.terms() {
        n.add_term(a - 3, 2, v.clone());
        n.add_term(-a - 2, 3, v.clone());
    }
    n.add_term(-5, 5, C::one());
    n
}

const A2_DENOMINATOR: [(i64, i64); 2] = [(1, 2), (2, 3)];

/// `q^{8m} W(q, t)` for the m-th principal congruence subgroup.
pub fn theorem_d<C: Coefficient>(variant: A2Variant, m: i64) -> Result<ZetaRational<C>> {
    if m < 1 {
        return Err(Error::InvalidParameter(format!("congruence level m must be >= 1, got {m}")));
    }
    ZetaRational::new(a2_numerator(variant), A2_DENOMINATOR.to_vec(), C::one(), A2_DIMENSION * m)
}

/// Exponent `d(1 - 2m)` of the functional-equation factor (f = 1).
pub fn funeq_exponent(m: i64) -> i64 {
    A2_DIMENSION * (1 - 2 * m)
}

/// True iff inverting `q` and `t` multiplies `z` by exactly `q^e`.
pub fn satisfies_funeq<C: Coefficient>(z: &ZetaRational<C>, e: i64) -> bool {
    match z.inverse_substitute() {
        Ok(inv) => inv.equals_scaled(z, e),
        Err(_) => false,
    }
}

pub fn funeq_verify<C: Coefficient>(variant: A2Variant, m: i64) -> Result<bool> {
    let z = theorem_d::<C>(variant, m)?;
    Ok(satisfies_funeq(&z, funeq_exponent(m)))
}

/// How a family reacts to replacing the residue field by a degree-f extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// `q -> q^f` and `q^{-s} -> q^{-fs}`: the residue cardinality changes.
    ResidueCardinality,
    /// Only `q -> q^f`, with `t` untouched. Used for synthetic families.
    QOnly,
}

/// `W` together with the data needed to instantiate `q^{fdm} W(q^f, q^{-fs})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactorFamily<C> {
    pub name: String,
    pub w: ZetaRational<C>,
    /// Lie rank `d`.
    pub rank: i64,
    /// Congruence level; 0 for prefactor-free model families.
    pub m: i64,
    pub extension: Extension,
}

impl<C: Coefficient> LocalFactorFamily<C> {
    pub fn theorem_d(variant: A2Variant, m: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter(format!("congruence level m must be >= 1, got {m}")));
        }
        Ok(Self {
            name: format!("{variant}-m{m}"),
            w: ZetaRational::new(a2_numerator(variant), A2_DENOMINATOR.to_vec(), C::one(), 0)?,
            rank: A2_DIMENSION,
            m,
            extension: Extension::ResidueCardinality,
        })
    }

    /// The A2 `W` with the `q^{8m}` prefactor dropped. A model for global
    /// Euler products with the right denominator and leading exponents.
    pub fn model(variant: A2Variant) -> Self {
        Self {
            name: format!("{variant}-model"),
            w: ZetaRational::new(a2_numerator(variant), A2_DENOMINATOR.to_vec(), C::one(), 0)
                .expect("fixed formula is canonical"),
            rank: A2_DIMENSION,
            m: 0,
            extension: Extension::ResidueCardinality,
        }
    }

    pub fn custom(name: &str, w: ZetaRational<C>, extension: Extension) -> Self {
        Self {
            name: name.to_string(),
            w,
            rank: 0,
            m: 0,
            extension,
        }
    }

    pub fn prefactor_exponent(&self, f: i64) -> i64 {
        f * self.rank * self.m
    }

    pub fn base_extend(&self, f: i64) -> Result<ZetaRational<C>> {
        if f < 1 {
            return Err(Error::InvalidParameter(format!("residue degree f must be >= 1, got {f}")));
        }
        let ft = match self.extension {
            Extension::ResidueCardinality => f,
            Extension::QOnly => 1,
        };
        Ok(self.w.substitute_powers(f, ft)?.scale(C::one(), self.prefactor_exponent(f)))
    }

    /// Every m >= 1 is permissible for unramified rings with p odd.
    pub fn permissible(p: u64, f: i64, m: i64) -> bool {
        p % 2 == 1 && is_prime(p) && f >= 1 && m >= 1
    }

    /// Oracle comparisons additionally exclude residue characteristic 3.
    pub fn oracle_admissible(p: u64, f: i64, m: i64) -> bool {
        Self::permissible(p, f, m) && p != 3
    }
}

pub fn monotonicity_check<C: Coefficient>(
    family: &LocalFactorFamily<C>,
    f1: i64,
    f2: i64,
    q0: u64,
) -> Result<bool> {
    if f1 > f2 {
        return Err(Error::InvalidParameter(format!("need f1 <= f2, got {f1} > {f2}")));
    }
    let a1 = abscissa(&family.base_extend(f1)?, q0)?;
    let a2 = abscissa(&family.base_extend(f2)?, q0)?;
    Ok(match (a1, a2) {
        (Some(x), Some(y)) => x <= y,
        (None, _) => true,
        (Some(_), None) => false,
    })
}

fn abscissa<C: Coefficient>(z: &ZetaRational<C>, q0: u64) -> Result<Option<Ratio<i64>>> {
    Ok(z.poles(q0)?.abscissa)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta_core::coeff_growth_abscissa;
    use num_rational::BigRational;
    use num_traits::{One, Signed};

    type Q = BigRational;

    fn qp(terms: &[(i64, i64)]) -> QPoly<Q> {
        QPoly::from_terms(terms.iter().map(|&(a, v)| (a, Q::from_integer(v.into()))))
    }

    /// Truncated series by explicit multiplication with geometric sums.
    fn brute(z: &ZetaRational<Q>, k: i64) -> Vec<QPoly<Q>> {
        let mut acc = z.scaled_numerator();
        for &(a, b) in z.denominator() {
            let mut g = LaurentPoly::zero();
            let mut j = 0;
            while j * b <= k {
                g.add_term(j * a, j * b, Q::one());
                j += 1;
            }
            acc = acc.mul(&g);
        }
        (0..=k).map(|i| acc.t_slice(i)).collect()
    }

    #[test]
    fn u_polynomials() {
        assert_eq!(u_polynomial::<Q>(A2Variant::Sl3), qp(&[(3, 1), (2, 1), (1, -1), (0, -1), (-1, -1)]));
        assert_eq!(u_polynomial::<Q>(A2Variant::Su3), qp(&[(3, -1), (2, 1), (1, -1), (0, 1), (-1, -1)]));
    }

    #[test]
    fn low_degree_coefficients() {
        let z = theorem_d::<Q>(A2Variant::Sl3, 1).unwrap();
        let g = z.expand(3);
        let oracle = brute(&z, 3);
        assert_eq!(g.coeffs(), &oracle[..]);
        assert_eq!(g.get(0).unwrap(), &qp(&[(8, 1)]));
        assert!(g.get(1).unwrap().is_zero());
        assert_eq!(g.get(2).unwrap(), &qp(&[(9, 1), (8, 1), (7, 1), (6, -1), (5, -1), (4, -1)]));
        assert_eq!(g.get(3).unwrap(), &qp(&[(10, 1), (7, -1), (6, -1), (5, -1), (4, 1), (3, 1)]));
        let su = theorem_d::<Q>(A2Variant::Su3, 1).unwrap().expand(2);
        assert_eq!(su.get(2).unwrap(), &qp(&[(9, 1), (8, -1), (7, 1), (6, -1), (5, 1), (4, -1)]));
        assert_eq!(su.get(2).unwrap().eval_exact(5), Q::from_integer(1627500.into()));
    }

    #[test]
    fn rejects_m_zero() {
        assert!(theorem_d::<Q>(A2Variant::Sl3, 0).is_err());
    }

    #[test]
    fn functional_equation() {
        assert_eq!(funeq_exponent(1), -8);
        assert_eq!(funeq_exponent(3), -40);
        for v in A2Variant::ALL {
            for m in 1..=5 {
                assert!(funeq_verify::<Q>(v, m).unwrap(), "{v} m={m}");
            }
        }
        let z = theorem_d::<Q>(A2Variant::Sl3, 1).unwrap();
        assert!(!satisfies_funeq(&z, -7));
        let mut bad = z.numerator().clone();
        bad.add_term(-5, 5, Q::from_integer((-2).into()));
        let corrupted = ZetaRational::new(bad, z.denominator().to_vec(), Q::one(), 8).unwrap();
        assert!(!satisfies_funeq(&corrupted, -8));
    }

    #[test]
    fn functional_equation_with_small_rationals() {
        assert!(funeq_verify::<Ratio<i64>>(A2Variant::Su3, 2).unwrap());
    }

    #[test]
    fn poles_are_half_and_two_thirds() {
        for v in A2Variant::ALL {
            for m in 1..=3 {
                let r = theorem_d::<Q>(v, m).unwrap().poles(5).unwrap();
                assert_eq!(r.candidate_poles, vec![Ratio::new(1, 2), Ratio::new(2, 3)]);
                assert_eq!(r.abscissa, Some(Ratio::new(2, 3)));
            }
        }
    }

    #[test]
    fn coefficients_are_nonnegative_integers() {
        for v in A2Variant::ALL {
            for m in 1..=3 {
                let g = theorem_d::<Q>(v, m).unwrap().expand(40);
                for q0 in [2i64, 4, 5, 7, 8, 9, 11] {
                    for (k, val) in g.evaluate_at(q0).into_iter().enumerate() {
                        assert!(val.is_integer() && !val.is_negative(), "{v} m={m} q={q0} k={k}: {val}");
                    }
                }
            }
        }
    }

    #[test]
    fn evaluation_against_partial_sums() {
        let z = theorem_d::<Q>(A2Variant::Sl3, 1).unwrap();
        let s0 = 2.0f64;
        let closed: f64 = z.evaluate(5, s0).unwrap();
        let partial: f64 = z
            .expand(60)
            .evaluate_at(5)
            .iter()
            .enumerate()
            .map(|(k, v)| num_traits::ToPrimitive::to_f64(v).unwrap() * 5f64.powf(-s0 * k as f64))
            .sum();
        assert!((closed - partial).abs() < 1e-6 * closed.abs(), "{closed} vs {partial}");
        assert!(matches!(z.evaluate(5, 2.0f64 / 3.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn growth_regression_near_two_thirds() {
        let z = theorem_d::<Q>(A2Variant::Sl3, 1).unwrap();
        let est = coeff_growth_abscissa(&z.expand(60), 5).unwrap();
        assert!((est - 2.0 / 3.0).abs() < 0.05, "estimate {est}");
    }

    #[test]
    fn base_extension() {
        let fam = LocalFactorFamily::<Q>::theorem_d(A2Variant::Sl3, 1).unwrap();
        assert_eq!(fam.base_extend(1).unwrap(), theorem_d::<Q>(A2Variant::Sl3, 1).unwrap());
        let ext2 = fam.base_extend(2).unwrap();
        assert_eq!(ext2.poles(5).unwrap().abscissa, Some(Ratio::new(2, 3)));
        assert_eq!(ext2.prefactor().1, 16);
        let f3: f64 = fam.base_extend(3).unwrap().evaluate(2, 1.5).unwrap();
        let f1: f64 = fam.base_extend(1).unwrap().evaluate(8, 1.5).unwrap();
        assert!((f3 - f1).abs() < 1e-9 * f1.abs());
    }

    #[test]
    fn abscissa_monotonicity() {
        let fam = LocalFactorFamily::<Q>::theorem_d(A2Variant::Su3, 2).unwrap();
        assert!(monotonicity_check(&fam, 1, 2, 5).unwrap());
        assert!(monotonicity_check(&fam, 3, 3, 5).unwrap());
        assert!(monotonicity_check(&fam, 2, 1, 5).is_err());
        let synthetic = LocalFactorFamily::custom(
            "q^f t",
            ZetaRational::<Q>::geometric(&[(1, 1)]).unwrap(),
            Extension::QOnly,
        );
        for f in 1..4 {
            let a = synthetic.base_extend(f).unwrap().poles(3).unwrap().abscissa.unwrap();
            assert_eq!(a, Ratio::from_integer(f));
        }
        assert!(monotonicity_check(&synthetic, 1, 3, 3).unwrap());
    }

    #[test]
    fn permissibility() {
        assert!(LocalFactorFamily::<Q>::permissible(5, 1, 1));
        assert!(!LocalFactorFamily::<Q>::permissible(2, 1, 1));
        assert!(LocalFactorFamily::<Q>::permissible(3, 2, 4));
        assert!(!LocalFactorFamily::<Q>::oracle_admissible(3, 1, 1));
        assert!(!LocalFactorFamily::<Q>::permissible(9, 1, 1));
    }
}
