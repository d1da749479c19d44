use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Float, Zero};

use super::laurent::{int_pow, Coefficient, LaurentPoly, QPoly};
use crate::error::{Error, Result};

/// `c q^e N(q,t) / prod (1 - q^a t^b)` in canonical form.
///
/// Canonical means: no denominator factor divides the numerator, factors are
/// sorted by `(b, a)`, and the numerator's leading term (lowest t-exponent, then
/// lowest q-exponent) is `1 * q^0 t^b0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaRational<C> {
    numerator: LaurentPoly<C>,
    denominator: Vec<(i64, i64)>,
    prefactor: (C, i64),
}

impl<C: Coefficient> ZetaRational<C> {
    pub fn new(
        numerator: LaurentPoly<C>,
        denominator: Vec<(i64, i64)>,
        prefactor_coeff: C,
        prefactor_q_exp: i64,
    ) -> Result<Self> {
        if let Some(&(a, b)) = denominator.iter().find(|(_, b)| *b < 1) {
            return Err(Error::InvalidParameter(format!(
                "denominator factor 1 - q^{a} t^{b} needs a positive t-exponent"
            )));
        }
        if numerator.min_t().is_some_and(|b| b < 0) {
            return Err(Error::NotRepresentable("negative t-exponent in numerator".into()));
        }
        Ok(Self::canonical(numerator, denominator, prefactor_coeff, prefactor_q_exp))
    }

    /// The polynomial `N` viewed as a zeta rational with trivial denominator.
    pub fn polynomial(numerator: LaurentPoly<C>) -> Result<Self> {
        Self::new(numerator, Vec::new(), C::one(), 0)
    }

    pub fn one() -> Self {
        Self::canonical(LaurentPoly::one(), Vec::new(), C::one(), 0)
    }

    /// `1 / prod (1 - q^a t^b)`.
    pub fn geometric(factors: &[(i64, i64)]) -> Result<Self> {
        Self::new(LaurentPoly::one(), factors.to_vec(), C::one(), 0)
    }

    fn canonical(
        mut numerator: LaurentPoly<C>,
        mut denominator: Vec<(i64, i64)>,
        mut c: C,
        mut e: i64,
    ) -> Self {
        if numerator.is_zero() || c.is_zero() {
            return Self {
                numerator: LaurentPoly::zero(),
                denominator: Vec::new(),
                prefactor: (C::zero(), 0),
            };
        }
        loop {
            let mut cancelled = false;
            for i in 0..denominator.len() {
                let (a, b) = denominator[i];
                if let Some(q) = numerator.div_geometric(a, b) {
                    numerator = q;
                    denominator.remove(i);
                    cancelled = true;
                    break;
                }
            }
            if !cancelled {
                break;
            }
        }
        let (a0, _, c0) = numerator.leading_term().expect("nonzero numerator");
        let inv = C::one() / c0.clone();
        numerator = numerator.scale_shift(&inv, -a0, 0);
        c = c * c0;
        e += a0;
        denominator.sort_by_key(|&(a, b)| (b, a));
        Self {
            numerator,
            denominator,
            prefactor: (c, e),
        }
    }

    pub fn numerator(&self) -> &LaurentPoly<C> {
        &self.numerator
    }

    pub fn denominator(&self) -> &[(i64, i64)] {
        &self.denominator
    }

    pub fn prefactor(&self) -> (&C, i64) {
        (&self.prefactor.0, self.prefactor.1)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Full numerator including the prefactor.
    pub fn scaled_numerator(&self) -> LaurentPoly<C> {
        self.numerator.scale_shift(&self.prefactor.0, self.prefactor.1, 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut den = self.denominator.clone();
        den.extend_from_slice(&other.denominator);
        Self::canonical(
            self.numerator.mul(&other.numerator),
            den,
            self.prefactor.0.clone() * other.prefactor.0.clone(),
            self.prefactor.1 + other.prefactor.1,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let count = |v: &[(i64, i64)]| {
            let mut m: BTreeMap<(i64, i64), usize> = BTreeMap::new();
            for f in v {
                *m.entry(*f).or_default() += 1;
            }
            m
        };
        let ma = count(&self.denominator);
        let mb = count(&other.denominator);
        let mut common = ma.clone();
        for (f, n) in &mb {
            let e = common.entry(*f).or_default();
            *e = (*e).max(*n);
        }
        let lift = |z: &Self, own: &BTreeMap<(i64, i64), usize>| {
            let mut n = z.scaled_numerator();
            for (&(a, b), &k) in &common {
                for _ in own.get(&(a, b)).copied().unwrap_or(0)..k {
                    n = n.mul_geometric(a, b);
                }
            }
            n
        };
        let num = lift(self, &ma).add(&lift(other, &mb));
        let den: Vec<(i64, i64)> = common
            .iter()
            .flat_map(|(f, k)| std::iter::repeat_n(*f, *k))
            .collect();
        Self::canonical(num, den, C::one(), 0)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.prefactor.0 = -out.prefactor.0;
        out
    }

    /// Multiply by `c q^e`.
    pub fn scale(&self, c: C, e: i64) -> Self {
        Self::canonical(
            self.numerator.clone(),
            self.denominator.clone(),
            self.prefactor.0.clone() * c,
            self.prefactor.1 + e,
        )
    }

    /// Substitute `q -> q^fq`, `t -> t^ft` throughout.
    pub fn substitute_powers(&self, fq: i64, ft: i64) -> Result<Self> {
        if fq == 0 || ft < 1 {
            return Err(Error::InvalidParameter(format!(
                "substitution exponents must satisfy fq != 0, ft >= 1 (got {fq}, {ft})"
            )));
        }
        Ok(Self::canonical(
            self.numerator.substitute_powers(fq, ft),
            self.denominator.iter().map(|&(a, b)| (a * fq, b * ft)).collect(),
            self.prefactor.0.clone(),
            self.prefactor.1 * fq,
        ))
    }

    /// `q -> q^{-1}` together with `t -> t^{-1}` (since `q^{-s}` becomes `q^{s}`),
    /// renormalised via `1 - q^{-a} t^{-b} = (-q^{-a} t^{-b})(1 - q^a t^b)`.
    ///
    /// Fails when the result would carry a negative t-exponent, i.e. when the
    /// numerator's t-degree exceeds the denominator's total t-degree.
    pub fn inverse_substitute(&self) -> Result<Self> {
        let mut num = self.numerator.invert_variables();
        for &(a, b) in &self.denominator {
            num = num.scale_shift(&-C::one(), a, b);
        }
        if let Some(b) = num.min_t() {
            if b < 0 {
                return Err(Error::NotRepresentable(format!(
                    "inverse substitution leaves t^{b}; numerator t-degree exceeds denominator t-degree"
                )));
            }
        }
        Ok(Self::canonical(
            num,
            self.denominator.clone(),
            self.prefactor.0.clone(),
            -self.prefactor.1,
        ))
    }

    /// Power series in `t` up to and including `t^k_max`.
    pub fn expand(&self, k_max: usize) -> GradedCoefficients<C> {
        let mut coeffs: Vec<QPoly<C>> = vec![QPoly::zero(); k_max + 1];
        for (b, slice) in self.scaled_numerator().t_slices() {
            if (b as usize) <= k_max {
                coeffs[b as usize] = slice;
            }
        }
        for &(a, b) in &self.denominator {
            let b = b as usize;
            // S = In + q^a t^b S
            for k in b..=k_max {
                let carry = coeffs[k - b].scale_shift(&C::one(), a);
                coeffs[k] = coeffs[k].add(&carry);
            }
        }
        GradedCoefficients { coeffs }
    }

    /// Candidate poles `a/b` of surviving denominator factors.
    pub fn poles(&self, q0: u64) -> Result<PoleReport> {
        if q0 < 2 {
            return Err(Error::InvalidParameter(format!("q0 must be >= 2, got {q0}")));
        }
        let mut candidates: Vec<Ratio<i64>> = self
            .denominator
            .iter()
            .map(|&(a, b)| Ratio::new(a, b))
            .collect();
        candidates.sort();
        candidates.dedup();
        let abscissa = candidates.last().copied();
        Ok(PoleReport {
            candidate_poles: candidates,
            abscissa,
            growth_estimate: None,
        })
    }

    /// Value at `(q0, q0^{-s0})`.
    pub fn evaluate<F: Float>(&self, q0: u64, s0: F) -> Result<F> {
        let tol = F::from(1e-12).unwrap();
        for &(a, b) in &self.denominator {
            let af = F::from(a).unwrap();
            let bf = F::from(b).unwrap();
            if (af - bf * s0).abs() <= tol {
                return Err(Error::Pole {
                    s: s0.to_f64().unwrap_or(f64::NAN),
                    a,
                    b,
                });
            }
        }
        let q = F::from(q0).unwrap();
        let t = q.powf(-s0);
        let mut den = F::one();
        for &(a, b) in &self.denominator {
            den = den * (F::one() - q.powi(a as i32) * t.powi(b as i32));
        }
        Ok(self.scaled_numerator().eval(q, t) / den)
    }

    /// True iff `self = q^e * other` exactly.
    pub fn equals_scaled(&self, other: &Self, e: i64) -> bool {
        *self == other.scale(C::one(), e)
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for ZetaRational<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, e) = (&self.prefactor.0, self.prefactor.1);
        if !c.is_one() {
            write!(f, "{c}*")?;
        }
        if e != 0 {
            write!(f, "q^{e}*")?;
        }
        write!(f, "({})", self.numerator)?;
        if !self.denominator.is_empty() {
            write!(f, " / (")?;
            for (i, (a, b)) in self.denominator.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write!(f, "(1 - q^{a}*t^{b})")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Coefficients of `t^k`, `k = 0..=K`, each a Laurent polynomial in `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedCoefficients<C> {
    pub(crate) coeffs: Vec<QPoly<C>>,
}

impl<C: Coefficient> GradedCoefficients<C> {
    pub fn from_coeffs(coeffs: Vec<QPoly<C>>) -> Self {
        Self { coeffs }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn get(&self, k: usize) -> Option<&QPoly<C>> {
        self.coeffs.get(k)
    }

    pub fn coeffs(&self) -> &[QPoly<C>] {
        &self.coeffs
    }

    /// Exact values at an integer `q0`.
    pub fn evaluate_at(&self, q0: i64) -> Vec<C> {
        self.coeffs.iter().map(|c| c.eval_exact(q0)).collect()
    }

    /// Truncated product of two series; the shorter truncation wins.
    pub fn graded_mul(&self, other: &Self) -> Self {
        let k = self.truncation().min(other.truncation());
        let mut out = vec![QPoly::zero(); k + 1];
        for i in 0..=k {
            for j in 0..=(k - i) {
                out[i + j] = out[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        Self { coeffs: out }
    }
}

/// Candidate poles and abscissa of a zeta rational.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleReport {
    pub candidate_poles: Vec<Ratio<i64>>,
    /// `None` when there are no poles at all (a Dirichlet polynomial).
    pub abscissa: Option<Ratio<i64>>,
    pub growth_estimate: Option<f64>,
}

/// Least-squares slope of `log_{q0}` of the positive coefficient values
/// against `k`, over the upper half of the available range.
pub fn coeff_growth_abscissa<C: Coefficient>(
    coeffs: &GradedCoefficients<C>,
    q0: u64,
) -> Result<f64> {
    let k_max = coeffs.truncation();
    if k_max < 20 {
        return Err(Error::InvalidParameter(format!(
            "growth regression needs truncation K >= 20, got {k_max}"
        )));
    }
    if q0 < 2 {
        return Err(Error::InvalidParameter(format!("q0 must be >= 2, got {q0}")));
    }
    let lnq = (q0 as f64).ln();
    let pts: Vec<(f64, f64)> = (k_max / 2..=k_max)
        .filter_map(|k| {
            let v = coeffs.coeffs[k].eval_exact(q0 as i64);
            let v = v.to_f64()?;
            (v > 0.0).then(|| (k as f64, v.ln() / lnq))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedGrowth(
            "fewer than two positive coefficients in the regression window".into(),
        ));
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx.is_zero() {
        0.0
    } else {
        sxy / sxx
    }
}

/// `q0^e` in the coefficient type.
pub fn q_power<C: Coefficient>(q0: i64, e: i64) -> C {
    int_pow(q0, e)
}
