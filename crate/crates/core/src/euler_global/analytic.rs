use super::{primes_up_to, CoefficientStream, StreamScalar};
use crate::a2_formulas::LocalFactorFamily;
use crate::error::{Error, Result};
use crate::zeta_core::{GradedCoefficients, ZetaRational};
use num_rational::{BigRational, Ratio};
use serde::Serialize;

const EXPANSION_DEPTH: usize = 60;

/// `max (a + 1) / k` over leading terms `q^a t^k`, `k >= 1`.
fn leading_ratio(graded: &GradedCoefficients<BigRational>) -> Option<(Ratio<i64>, (i64, i64))> {
    graded
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(k, c)| c.max_exponent().map(|a| (Ratio::new(a + 1, k as i64), (a, k as i64))))
        .max_by(|x, y| x.0.cmp(&y.0).then(y.1 .1.cmp(&x.1 .1)))
}

/// Abscissa of convergence of `prod_p W(p, p^{-s})`.
pub fn abscissa_of_product(family: &LocalFactorFamily<BigRational>) -> Result<Ratio<i64>> {
    let w = family.base_extend(1)?;
    leading_ratio(&w.expand(EXPANSION_DEPTH))
        .map(|x| x.0)
        .ok_or_else(|| Error::UndefinedGrowth(format!("{} has no terms of positive degree", family.name)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleFactorization {
    pub abscissa: String,
    /// Multiplicity of `zeta(2s - 1)`.
    pub e1: usize,
    /// Multiplicity of `zeta(3s - 2)`.
    pub e2: usize,
    /// `(a, b, multiplicity)` for each extracted `zeta(bs - a)`.
    pub translated: Vec<(i64, i64, usize)>,
    /// Abscissa of the remainder product `H`, if it has any terms.
    pub remainder_abscissa: Option<String>,
    /// Leading monomial `q^a t^b` of the remainder.
    pub remainder_leading: Option<(i64, i64)>,
    pub epsilon: f64,
    pub s_eval: f64,
    /// `(P, sum_{p <= P} |log H_p(s_eval)|)`.
    pub partial_sums: Vec<(u64, f64)>,
    pub tail_bound: f64,
    /// Fitted exponent `lambda` in `|log H_p(s_eval)| ~ p^lambda`.
    pub decay_exponent: Option<f64>,
    pub converges: bool,
}

impl PoleFactorization {
    pub fn pole_order_at_one(&self) -> usize {
        self.translated.iter().filter(|(a, b, _)| a + 1 == *b).map(|t| t.2).sum()
    }
}

/// Splits `prod_p W` as `prod zeta(bs - a)^{e} * H(s)` over the denominator
/// factors attaining the abscissa, and bounds `H` at `s_eval`.
pub fn pole_factorization(family: &LocalFactorFamily<BigRational>, s_eval: f64, max_prime: u64) -> Result<PoleFactorization> {
    let w = family.base_extend(1)?;
    let alpha = abscissa_of_product(family)?;
    let mut translated: Vec<(i64, i64, usize)> = Vec::new();
    let mut remaining = Vec::new();
    for &(a, b) in w.denominator() {
        if Ratio::new(a + 1, b) == alpha {
            match translated.iter_mut().find(|t| t.0 == a && t.1 == b) {
                Some(t) => t.2 += 1,
                None => translated.push((a, b, 1)),
            }
        } else {
            remaining.push((a, b));
        }
    }
    let count = |a, b| translated.iter().find(|t| t.0 == a && t.1 == b).map_or(0, |t| t.2);
    let h = ZetaRational::new(w.scaled_numerator(), remaining, BigRational::from_integer(1.into()), 0)?;
    let lead = leading_ratio(&h.expand(EXPANSION_DEPTH));
    let rho = lead.map(|x| *x.0.numer() as f64 / *x.0.denom() as f64);
    let alpha_f = *alpha.numer() as f64 / *alpha.denom() as f64;
    let epsilon = rho.map_or(alpha_f, |r| alpha_f - r);
    let primes = primes_up_to(max_prime as usize);
    let logs: Vec<(u64, f64)> = primes
        .iter()
        .map(|&p| {
            let v: f64 = h.evaluate(p, s_eval)?;
            Ok((p, v.abs().ln().abs()))
        })
        .collect::<Result<_>>()?;
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    let mut next = 100u64;
    for &(p, l) in &logs {
        while p > next {
            partial_sums.push((next, acc));
            next *= 10;
        }
        acc += l;
    }
    while next <= max_prime {
        partial_sums.push((next, acc));
        next *= 10;
    }
    partial_sums.push((max_prime, acc));
    let fit_pts: Vec<(f64, f64)> = logs
        .iter()
        .filter(|(p, l)| *p * 100 >= max_prime && *l > 0.0)
        .map(|&(p, l)| ((p as f64).ln(), l.ln()))
        .collect();
    let decay_exponent = (fit_pts.len() >= 2).then(|| crate::zeta_core::least_squares_slope(&fit_pts));
    let (tail_bound, converges) = match lead.map(|x| x.1) {
        None => (0.0, true),
        Some((a, b)) => {
            let lambda = a as f64 - b as f64 * s_eval;
            if lambda >= -1.0 {
                (f64::INFINITY, false)
            } else {
                let c = logs
                    .iter()
                    .filter(|(p, _)| *p >= 100)
                    .map(|&(p, l)| l / (p as f64).powf(lambda))
                    .fold(0.0, f64::max);
                let pm = max_prime as f64;
                (2.0 * c * pm.powf(1.0 + lambda) / (-1.0 - lambda), true)
            }
        }
    };
    Ok(PoleFactorization {
        abscissa: alpha.to_string(),
        e1: count(1, 2),
        e2: count(2, 3),
        translated,
        remainder_abscissa: lead.map(|x| x.0.to_string()),
        remainder_leading: lead.map(|x| x.1),
        epsilon,
        s_eval,
        partial_sums,
        tail_bound,
        decay_exponent,
        converges: converges && epsilon > 0.0,
    })
}

/// `(P, sum_{p <= P} log W(p, p^{-s}))` at each checkpoint.
pub fn euler_partial_logs(family: &LocalFactorFamily<BigRational>, s: f64, checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
    let w = family.base_extend(1)?;
    let max = checkpoints.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    let mut idx = 0;
    for p in primes_up_to(max as usize) {
        while idx < cps.len() && p > cps[idx] {
            out.push((cps[idx], acc));
            idx += 1;
        }
        let v: f64 = w.evaluate(p, s)?;
        acc += v.ln();
    }
    while idx < cps.len() {
        out.push((cps[idx], acc));
        idx += 1;
    }
    Ok(out)
}

fn geometric_window(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as usize)
        .map(|n| n.clamp(lo, hi))
        .collect();
    v.dedup();
    v
}

fn check_positive<T: StreamScalar>(stream: &CoefficientStream<T>, n: usize) -> Result<Vec<f64>> {
    if stream.values()[1..=n].iter().any(|v| *v < T::zero()) {
        return Err(Error::UndefinedGrowth("stream has negative coefficients".into()));
    }
    let cum = stream.cumulative();
    if cum[n] <= 0.0 {
        return Err(Error::UndefinedGrowth("partial sums vanish".into()));
    }
    Ok(cum)
}

/// Slope of `log R_N` against `log N` over the top decade `[N/10, N]`.
pub fn growth_exponent<T: StreamScalar>(stream: &CoefficientStream<T>) -> Result<f64> {
    let n = stream.bound();
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("growth fit needs N >= 1000, got {n}")));
    }
    let cum = check_positive(stream, n)?;
    let pts: Vec<(f64, f64)> = geometric_window(n / 10, n, 40)
        .into_iter()
        .filter(|&m| cum[m] > 0.0)
        .map(|m| ((m as f64).ln(), cum[m].ln()))
        .collect();
    Ok(crate::zeta_core::least_squares_slope(&pts))
}

#[derive(Clone, Debug, Serialize)]
pub struct TauberianFit {
    /// Slope of `R_N / N` against `log N`.
    pub c_estimate: f64,
    pub intercept: f64,
    pub window: (usize, usize),
    /// `(N, R_N, R_N / (N log N))` at decades ending at `N_max`.
    pub ratios: Vec<(usize, f64, f64)>,
    /// Absolute changes of the ratio between consecutive decades.
    pub drift: Vec<f64>,
    pub drift_decreasing: bool,
    /// Whether `N log N` is the right scale (false when `R_N ~ c N`).
    pub normalization_ok: bool,
}

pub fn partial_sum_fit<T: StreamScalar>(stream: &CoefficientStream<T>, n: usize) -> Result<TauberianFit> {
    if n < 10_000 {
        return Err(Error::InvalidParameter(format!("partial-sum fit needs N >= 10^4, got {n}")));
    }
    if n > stream.bound() {
        return Err(Error::InvalidParameter(format!("stream only reaches {}", stream.bound())));
    }
    let cum = check_positive(stream, n)?;
    let lo = n / 1000;
    let pts: Vec<(f64, f64)> =
        geometric_window(lo, n, 60).into_iter().map(|m| ((m as f64).ln(), cum[m] / m as f64)).collect();
    let slope = crate::zeta_core::least_squares_slope(&pts);
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let intercept = my - slope * mx;
    let mut ratios = Vec::new();
    let mut m = n;
    while m >= lo.max(10) {
        ratios.push((m, cum[m], cum[m] / (m as f64 * (m as f64).ln())));
        m /= 10;
    }
    ratios.reverse();
    let drift: Vec<f64> = ratios.windows(2).map(|w| (w[1].2 - w[0].2).abs()).collect();
    let drift_decreasing = drift.windows(2).all(|w| w[1] <= w[0]);
    let last = ratios.last().map_or(0.0, |r| r.2);
    Ok(TauberianFit {
        c_estimate: slope,
        intercept,
        window: (lo, n),
        ratios,
        drift,
        drift_decreasing,
        normalization_ok: slope > 0.25 * last,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaCheck {
    pub n: usize,
    pub s: f64,
    pub partial: f64,
    /// Bound on the omitted tail `sum_{n > N} n^{-s}`.
    pub tail_bound: f64,
    pub reference: Option<f64>,
    pub error: Option<f64>,
}

/// `zeta(s)` from the Euler product of `(1 - p^{-s})^{-1}` truncated at `N`.
pub fn riemann_zeta_check(n: usize, s: f64) -> Result<ZetaCheck> {
    if s <= 1.0 {
        return Err(Error::InvalidParameter(format!("need s > 1, got {s}")));
    }
    let spec = super::GlobalSpec::rationals(super::zeta_power_family(1)?, 0);
    let stream = super::euler_convolve::<u64>(&spec, n)?;
    let partial = stream.partial_value(s);
    let reference = (s == 2.0).then(|| std::f64::consts::PI.powi(2) / 6.0);
    Ok(ZetaCheck {
        n,
        s,
        partial,
        tail_bound: (n as f64).powf(1.0 - s) / (s - 1.0),
        reference,
        error: reference.map(|r| (r - partial).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{euler_convolve, zeta_power_family, GlobalSpec};
    use super::*;
    use crate::a2_formulas::{A2Variant, Extension};
    use crate::zeta_core::LaurentPoly;

    fn custom(terms: &[(i64, i64, i64)], den: &[(i64, i64)]) -> LocalFactorFamily<BigRational> {
        let w = ZetaRational::new(LaurentPoly::from_int_terms(terms), den.to_vec(), BigRational::from_integer(1.into()), 0)
            .unwrap();
        LocalFactorFamily::custom("custom", w, Extension::ResidueCardinality)
    }

    #[test]
    fn abscissae() {
        assert_eq!(abscissa_of_product(&LocalFactorFamily::model(A2Variant::Sl3)).unwrap(), Ratio::new(1, 1));
        assert_eq!(abscissa_of_product(&LocalFactorFamily::model(A2Variant::Su3)).unwrap(), Ratio::new(1, 1));
        assert_eq!(abscissa_of_product(&zeta_power_family(1).unwrap()).unwrap(), Ratio::new(1, 1));
        assert_eq!(abscissa_of_product(&custom(&[(0, 0, 1), (1, 3, 1)], &[])).unwrap(), Ratio::new(2, 3));
        assert!(abscissa_of_product(&custom(&[(0, 0, 1)], &[])).is_err());
    }

    #[test]
    fn model_has_double_pole() {
        let f = pole_factorization(&LocalFactorFamily::model(A2Variant::Sl3), 0.9, 100_000).unwrap();
        assert_eq!((f.e1, f.e2), (1, 1));
        assert_eq!(f.pole_order_at_one(), 2);
        assert!(f.epsilon >= 0.1);
        assert!(f.converges);
        assert!(f.decay_exponent.unwrap() <= -1.2, "{:?}", f.decay_exponent);
        assert!(f.tail_bound.is_finite());
    }

    #[test]
    fn zeta_like_family_has_simple_pole() {
        let f = pole_factorization(&zeta_power_family(1).unwrap(), 0.9, 10_000).unwrap();
        assert_eq!(f.translated, vec![(0, 1, 1)]);
        assert_eq!((f.e1, f.e2), (0, 0));
        assert_eq!(f.pole_order_at_one(), 1);
        assert!(f.remainder_leading.is_none());
    }

    #[test]
    fn partial_products_converge_only_right_of_one() {
        let fam = zeta_power_family(1).unwrap();
        let cps = [1_000, 10_000, 100_000, 1_000_000];
        let right = euler_partial_logs(&fam, 1.1, &cps).unwrap();
        let left = euler_partial_logs(&fam, 0.9, &cps).unwrap();
        let dr: Vec<f64> = right.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let dl: Vec<f64> = left.windows(2).map(|w| w[1].1 - w[0].1).collect();
        assert!(dr.windows(2).all(|w| w[1] < w[0]));
        assert!(dl.iter().all(|&d| d > 0.3), "{dl:?}");
        assert!(dr[2] < 0.1 && dl[2] > 5.0 * dr[2], "{dr:?} {dl:?}");
    }

    #[test]
    fn zeta_stream_flags_normalization() {
        let s = euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(1).unwrap(), 0), 100_000).unwrap();
        let fit = partial_sum_fit(&s, 100_000).unwrap();
        assert!(!fit.normalization_ok);
        assert!(fit.ratios.last().unwrap().2 < 0.1);
        assert!(partial_sum_fit(&s, 1000).is_err());
    }

    #[test]
    fn divisor_stream_constant() {
        let s = euler_convolve::<u64>(&GlobalSpec::rationals(zeta_power_family(2).unwrap(), 0), 1_000_000).unwrap();
        let fit = partial_sum_fit(&s, 1_000_000).unwrap();
        assert!((fit.c_estimate - 1.0).abs() < 0.05, "{fit:?}");
        assert!(fit.normalization_ok);
        // sum d(n) = N log N + (2 gamma - 1) N + O(sqrt N)
        assert!((fit.intercept - 0.1544).abs() < 0.05, "{}", fit.intercept);
    }

    #[test]
    fn archimedean_growth() {
        let s = super::super::archimedean_stream::<u64>(100_000).unwrap();
        let g = growth_exponent(&s).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 0.05, "{g}");
    }

    #[test]
    fn riemann_zeta_at_two() {
        let c = riemann_zeta_check(1_000_000, 2.0).unwrap();
        assert!(c.error.unwrap() < 1e-6);
        assert!(c.error.unwrap() <= c.tail_bound);
    }
}
