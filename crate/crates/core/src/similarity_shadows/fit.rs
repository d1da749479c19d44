//! Exact polynomial fits of transition counts and multipliers across residue
//! field sizes.

use super::algebra::StructureKey;
use super::classes::FiberOptions;
use super::shadows::{transition_sources, transition_table, ShadowCatalogue, TransitionTable};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// `x^k r(x)` with `r` given by ascending rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FittedPolynomial {
    pub q_power: u32,
    #[serde(serialize_with = "ser_coeffs")]
    pub coefficients: Vec<BigRational>,
    /// Points beyond the `deg r + 1` needed to determine the fit.
    pub confirmations: usize,
}

fn ser_coeffs<S: serde::Serializer>(c: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|x| x.to_string()))
}

impl FittedPolynomial {
    pub fn evaluate(&self, q: u64) -> BigRational {
        let x = BigRational::from_integer(BigInt::from(q));
        let r = self.coefficients.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c);
        r * BigRational::from_integer(BigInt::from(q).pow(self.q_power))
    }

    pub fn degree(&self) -> usize {
        self.q_power as usize + self.coefficients.len().saturating_sub(1)
    }
}

impl std::fmt::Display for FittedPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})*x^{}", i + self.q_power as usize))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Newton interpolation through `pts`, returned in the monomial basis.
fn interpolate(pts: &[(BigRational, BigRational)]) -> Vec<BigRational> {
    let n = pts.len();
    let mut dd: Vec<BigRational> = pts.iter().map(|p| p.1.clone()).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&pts[i].0 - &pts[i - j].0);
        }
    }
    let mut coeffs = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (x - x_i) + dd[i]
        let mut next = vec![BigRational::zero(); n];
        for k in 0..n {
            if k + 1 < n {
                next[k + 1] = &next[k + 1] + &coeffs[k];
            }
            next[k] = &next[k] - &coeffs[k] * &pts[i].0;
        }
        next[0] = &next[0] + &dd[i];
        coeffs = next;
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

fn q_valuation(mut v: u128, q: u64) -> u32 {
    let mut k = 0;
    while v != 0 && v % q as u128 == 0 {
        v /= q as u128;
        k += 1;
    }
    k
}

/// Minimal-degree exact fit `x^k r(x)` through integer data.
pub fn fit_points(points: &[(u64, u128)], max_degree: usize) -> Option<FittedPolynomial> {
    if points.is_empty() {
        return None;
    }
    let q_power = points.iter().filter(|p| p.1 != 0).map(|&(q, v)| q_valuation(v, q)).min().unwrap_or(0);
    let pts: Vec<(BigRational, BigRational)> = points
        .iter()
        .map(|&(q, v)| {
            let x = BigRational::from_integer(BigInt::from(q));
            let y = BigRational::new(BigInt::from(v), BigInt::from(q).pow(q_power));
            (x, y)
        })
        .collect();
    for deg in 0..pts.len().min(max_degree + 1 - q_power.min(max_degree as u32) as usize) {
        let coefficients = interpolate(&pts[..=deg]);
        let fp = FittedPolynomial { q_power, coefficients, confirmations: pts.len() - deg - 1 };
        if points.iter().all(|&(q, v)| fp.evaluate(q) == BigRational::from_integer(BigInt::from(v))) {
            return Some(fp);
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct HoldoutCheck {
    pub q: u64,
    pub source: StructureKey,
    pub target: StructureKey,
    pub predicted_count: String,
    pub observed_count: u64,
    pub predicted_multiplier: Option<String>,
    pub observed_multiplier: Option<u128>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionFit {
    pub fit_q: Vec<u64>,
    pub holdout_q: Vec<u64>,
    pub tables: BTreeMap<u64, TransitionTable>,
    pub counts: BTreeMap<(StructureKey, StructureKey), FittedPolynomial>,
    pub multipliers: BTreeMap<(StructureKey, StructureKey), FittedPolynomial>,
    /// Pairs without an exact confirmed fit.
    pub unfitted: Vec<(StructureKey, StructureKey)>,
    pub holdout: Vec<HoldoutCheck>,
    /// Whether the joint fit is exact on points from both classes of `q mod 3`.
    pub residue_classes_merged: bool,
}

impl TransitionFit {
    pub fn violations(&self) -> usize {
        self.tables.values().map(|t| t.violations.len()).sum()
    }

    pub fn holdout_exact(&self) -> bool {
        !self.holdout.is_empty() && self.holdout.iter().all(|h| h.matches)
    }
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub max_degree: usize,
    pub sources_per_shadow: usize,
    pub fiber: FiberOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_degree: 6, sources_per_shadow: 1, fiber: FiberOptions::default() }
    }
}

pub fn table_for(q: u64, opts: &FitOptions) -> Result<TransitionTable> {
    let mut cat = ShadowCatalogue::structural(q);
    let sources = transition_sources(q, opts.sources_per_shadow, &mut cat, &opts.fiber)?;
    transition_table(&sources, &mut cat, &opts.fiber)
}

pub fn transition_polynomials(fit_q: &[u64], holdout_q: &[u64], opts: &FitOptions) -> Result<TransitionFit> {
    if fit_q.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 values of q for fitting".into()));
    }
    let mut tables = BTreeMap::new();
    for &q in fit_q.iter().chain(holdout_q) {
        tables.insert(q, table_for(q, opts)?);
    }
    let mut keys: BTreeSet<(StructureKey, StructureKey)> = BTreeSet::new();
    for q in fit_q {
        keys.extend(tables[q].entries.keys().cloned());
    }
    let mut counts = BTreeMap::new();
    let mut multipliers = BTreeMap::new();
    let mut unfitted = Vec::new();
    let mut classes_seen = BTreeSet::new();
    for key in &keys {
        let mut a_pts = Vec::new();
        let mut b_pts = Vec::new();
        for &q in fit_q {
            let t = &tables[&q];
            if !t.sources.contains_key(&key.0) {
                continue;
            }
            match t.entries.get(key) {
                Some(e) => {
                    a_pts.push((q, e.count as u128));
                    b_pts.push((q, e.multiplier));
                    classes_seen.insert(q % 3);
                }
                None => a_pts.push((q, 0)),
            }
        }
        match (fit_points(&a_pts, opts.max_degree), fit_points(&b_pts, opts.max_degree)) {
            (Some(a), Some(b)) if a.confirmations > 0 && b.confirmations > 0 => {
                counts.insert(key.clone(), a);
                multipliers.insert(key.clone(), b);
            }
            (a, b) => {
                if let Some(a) = a {
                    counts.insert(key.clone(), a);
                }
                if let Some(b) = b {
                    multipliers.insert(key.clone(), b);
                }
                unfitted.push(key.clone());
            }
        }
    }
    let mut holdout = Vec::new();
    for &q in holdout_q {
        let t = &tables[&q];
        let mut all: BTreeSet<(StructureKey, StructureKey)> = keys.clone();
        all.extend(t.entries.keys().cloned());
        for key in all {
            if !t.sources.contains_key(&key.0) {
                continue;
            }
            let observed = t.entries.get(&key);
            let pa = counts.get(&key).map(|f| f.evaluate(q));
            let pb = multipliers.get(&key).map(|f| f.evaluate(q));
            let observed_count = observed.map_or(0, |e| e.count);
            let count_ok = pa.as_ref().is_some_and(|v| *v == BigRational::from_integer(BigInt::from(observed_count)));
            let mult_ok = match observed {
                Some(e) => pb.as_ref().is_some_and(|v| *v == BigRational::from_integer(BigInt::from(e.multiplier))),
                None => true,
            };
            holdout.push(HoldoutCheck {
                q,
                source: key.0.clone(),
                target: key.1.clone(),
                predicted_count: pa.map_or_else(|| "none".into(), |v| v.to_string()),
                observed_count,
                predicted_multiplier: pb.map(|v| v.to_string()),
                observed_multiplier: observed.map(|e| e.multiplier),
                matches: count_ok && mult_ok,
            });
        }
    }
    let residue_classes_merged = unfitted.is_empty() && classes_seen.contains(&1) && classes_seen.contains(&2);
    Ok(TransitionFit {
        fit_q: fit_q.to_vec(),
        holdout_q: holdout_q.to_vec(),
        tables,
        counts,
        multipliers,
        unfitted,
        holdout,
        residue_classes_merged,
    })
}

/// CSV rows `(sigma1, sigma2, q, count, multiplier)`, shadows labelled by
/// their index in the sorted structure keys.
pub fn transitions_csv(fit: &TransitionFit) -> String {
    let labels: BTreeSet<&StructureKey> =
        fit.tables.values().flat_map(|t| t.entries.keys().flat_map(|(a, b)| [a, b])).collect();
    let label = |k: &StructureKey| labels.iter().position(|x| *x == k).unwrap_or(usize::MAX);
    let mut out = String::from("sigma1,sigma2,q,count,multiplier\n");
    for (q, t) in &fit.tables {
        for ((a, b), e) in &t.entries {
            out.push_str(&format!("{},{},{q},{},{}\n", label(a), label(b), e.count, e.multiplier));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn interpolation_recovers_polynomials() {
        let pts: Vec<(u64, u128)> = [3u64, 5, 7, 13, 17].iter().map(|&q| (q, ((q * q * q - q) / 3) as u128)).collect();
        let f = fit_points(&pts, 6).unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.confirmations, 1);
        assert_eq!(f.evaluate(11), BigRational::from_integer(BigInt::from(440)));
        let pts: Vec<(u64, u128)> =
            [3u64, 5, 7].iter().map(|&q| (q, (q as u128).pow(3) * (q as u128 + 1))).collect();
        let f = fit_points(&pts, 6).unwrap();
        assert_eq!(f.q_power, 3);
        assert_eq!(f.coefficients.len(), 2);
        assert!(f.coefficients.iter().all(|c| *c == BigRational::one()));
    }

    #[test]
    fn no_fit_below_degree_bound() {
        let pts: Vec<(u64, u128)> = [2u64, 3, 5, 7].iter().map(|&q| (q, (q as u128 + 1).pow(3) + 1)).collect();
        assert!(fit_points(&pts, 2).is_none());
    }
}
