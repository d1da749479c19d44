//! Shadows: conjugacy classes of stabilizer reductions, their catalogue,
//! transition statistics between levels and shadow-refined class zeta
//! polynomials.

use super::algebra::{MatrixAlgebra, StructureKey};
use super::classes::{self, fiber_split, FiberOptions, SimilarityClass};
use super::mat3::Mat3;
use crate::error::Result;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};

const ORDER_LIMIT: u128 = 1 << 16;
const ORBIT_LIMIT: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShadowFingerprint {
    pub order: u128,
    pub structure: StructureKey,
    pub element_orders: Option<BTreeMap<u64, u64>>,
    pub orbit_signature: Option<BTreeMap<u64, u64>>,
}

impl ShadowFingerprint {
    /// Order and structure only, comparable across residue fields.
    pub fn structural(algebra: &MatrixAlgebra) -> Self {
        let s = algebra.structure();
        Self { order: s.unit_count, structure: s.key, element_orders: None, orbit_signature: None }
    }

    pub fn of(algebra: &MatrixAlgebra) -> Self {
        let s = algebra.structure();
        Self {
            order: s.unit_count,
            structure: s.key,
            element_orders: algebra.element_orders(ORDER_LIMIT),
            orbit_signature: algebra.orbit_signature(ORBIT_LIMIT),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShadowId {
    pub id: usize,
    pub fingerprint: ShadowFingerprint,
    pub representative_generators: Vec<Mat3>,
}

#[derive(Clone, Debug)]
pub struct ShadowEntry {
    pub shadow: ShadowId,
    pub algebra: MatrixAlgebra,
    pub first_level: u32,
}

/// Shadows met so far for one residue field, with a cache from literal
/// stabilizer algebras to catalogue indices.
#[derive(Clone, Debug)]
pub struct ShadowCatalogue {
    pub p: u64,
    pub entries: Vec<ShadowEntry>,
    /// Confirm fingerprint collisions by an explicit conjugator search.
    pub confirm_conjugacy: bool,
    /// Fingerprint collisions confirmed by a conjugator.
    pub confirmations: usize,
    /// Skip element-order and orbit data in fingerprints.
    pub structural_only: bool,
    cache: HashMap<Vec<u64>, usize>,
}

fn generators_of(algebra: &MatrixAlgebra, seed: u64) -> Vec<Mat3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..6).map(|_| algebra.random_unit(&mut rng)).collect()
}

impl ShadowCatalogue {
    pub fn new(p: u64, confirm_conjugacy: bool) -> Self {
        Self { p, entries: Vec::new(), confirm_conjugacy, confirmations: 0, structural_only: false, cache: HashMap::new() }
    }

    /// Classification by structure key alone, for large residue fields.
    pub fn structural(p: u64) -> Self {
        Self { structural_only: true, ..Self::new(p, false) }
    }

    /// Catalogue index of the shadow whose unit group is that of `algebra`.
    pub fn classify(&mut self, algebra: &MatrixAlgebra, level: u32) -> usize {
        let key = algebra.key();
        if let Some(&id) = self.cache.get(&key) {
            return id;
        }
        let fp = if self.structural_only { ShadowFingerprint::structural(algebra) } else { ShadowFingerprint::of(algebra) };
        let mut found = None;
        for e in &self.entries {
            if e.shadow.fingerprint != fp {
                continue;
            }
            if !self.confirm_conjugacy {
                found = Some(e.shadow.id);
                break;
            }
            if e.algebra.conjugator_to(algebra, 0x5eed).is_some() {
                self.confirmations += 1;
                found = Some(e.shadow.id);
                break;
            }
        }
        let id = found.unwrap_or_else(|| {
            let id = self.entries.len();
            self.entries.push(ShadowEntry {
                shadow: ShadowId { id, fingerprint: fp, representative_generators: generators_of(algebra, id as u64) },
                algebra: algebra.clone(),
                first_level: level,
            });
            id
        });
        self.cache.insert(key, id);
        id
    }

    pub fn shadow(&self, id: usize) -> &ShadowId {
        &self.entries[id].shadow
    }

    pub fn structure(&self, id: usize) -> &StructureKey {
        &self.entries[id].shadow.fingerprint.structure
    }

    /// Index of the shadow with the full group `GL3(F_q)`.
    pub fn full_group(&mut self) -> usize {
        self.classify(&MatrixAlgebra::full(self.p), 1)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            id: usize,
            first_level: u32,
            fingerprint: &'a ShadowFingerprint,
            representative_generators: &'a [Mat3],
        }
        let rows: Vec<Row> = self
            .entries
            .iter()
            .map(|e| Row {
                id: e.shadow.id,
                first_level: e.first_level,
                fingerprint: &e.shadow.fingerprint,
                representative_generators: &e.shadow.representative_generators,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "schema_version": crate::zeta_core::SCHEMA_VERSION,
            "p": self.p,
            "shadows": rows,
        }))?)
    }
}

pub fn shadow_of(class: &SimilarityClass, catalogue: &mut ShadowCatalogue) -> ShadowId {
    let id = catalogue.classify(&class.stabilizer_algebra, class.level);
    catalogue.shadow(id).clone()
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    /// Levels up to which every class is split; deeper levels split samples.
    pub exhaustive_through: u32,
    pub samples_per_shadow: usize,
    pub seed: u64,
    pub confirm_conjugacy: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self { exhaustive_through: 1, samples_per_shadow: 4, seed: 0x5eed, confirm_conjugacy: true }
    }
}

#[derive(Clone, Debug)]
pub struct ShadowCensus {
    pub catalogue: ShadowCatalogue,
    /// Shadow indices seen at each level `1..=l_max`.
    pub per_level: Vec<BTreeSet<usize>>,
    /// Classes whose fibers were split, per source level.
    pub split_counts: Vec<usize>,
}

impl ShadowCensus {
    pub fn count(&self) -> usize {
        self.catalogue.entries.len()
    }
}

/// Picks up to `k` classes per shadow, deterministically.
fn sample_by_shadow(classes: &[(SimilarityClass, usize)], k: usize, seed: u64) -> Vec<SimilarityClass> {
    let mut groups: BTreeMap<usize, Vec<&SimilarityClass>> = BTreeMap::new();
    for (c, s) in classes {
        groups.entry(*s).or_default().push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (_, mut v) in groups {
        v.shuffle(&mut rng);
        out.extend(v.into_iter().take(k).cloned());
    }
    out
}

pub fn shadow_census(p: u64, l_max: u32, opts: &CensusOptions) -> Result<ShadowCensus> {
    let mut catalogue = ShadowCatalogue::new(p, opts.confirm_conjugacy);
    let mut current: Vec<(SimilarityClass, usize)> = classes::classes_at_level(p, 1)?
        .into_iter()
        .map(|c| {
            let s = catalogue.classify(&c.stabilizer_algebra, 1);
            (c, s)
        })
        .collect();
    let mut per_level = vec![current.iter().map(|x| x.1).collect::<BTreeSet<_>>()];
    let mut split_counts = Vec::new();
    let fiber_opts = FiberOptions { seed: opts.seed, ..FiberOptions::default() };
    for level in 1..l_max {
        let sources: Vec<SimilarityClass> = if level <= opts.exhaustive_through {
            current.iter().map(|x| x.0.clone()).collect()
        } else {
            sample_by_shadow(&current, opts.samples_per_shadow, opts.seed ^ level as u64)
        };
        split_counts.push(sources.len());
        let parts: Vec<Vec<SimilarityClass>> =
            sources.par_iter().map(|c| fiber_split(c, &fiber_opts)).collect::<Result<_>>()?;
        current = parts
            .into_iter()
            .flatten()
            .map(|c| {
                let s = catalogue.classify(&c.stabilizer_algebra, level + 1);
                (c, s)
            })
            .collect();
        per_level.push(current.iter().map(|x| x.1).collect());
    }
    Ok(ShadowCensus { catalogue, per_level, split_counts })
}

/// `(count, multiplier)` for classes of shadow `sigma2` over one class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionEntry {
    pub count: u64,
    pub multiplier: u128,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TransitionTable {
    pub p: u64,
    /// Keyed by (source shadow, target shadow) structure keys.
    pub entries: BTreeMap<(StructureKey, StructureKey), TransitionEntry>,
    /// Number of source classes examined per source shadow.
    pub sources: BTreeMap<StructureKey, usize>,
    pub violations: Vec<String>,
}

/// Splits each source and tabulates target shadows; records any
/// dependence beyond the source shadow as a violation.
pub fn transition_table(sources: &[SimilarityClass], catalogue: &mut ShadowCatalogue, opts: &FiberOptions) -> Result<TransitionTable> {
    let p = catalogue.p;
    let splits: Vec<Vec<SimilarityClass>> = sources.par_iter().map(|c| fiber_split(c, opts)).collect::<Result<_>>()?;
    let mut table = TransitionTable { p, ..Default::default() };
    for (src, subs) in sources.iter().zip(splits) {
        let s1 = catalogue.classify(&src.stabilizer_algebra, src.level);
        let k1 = catalogue.structure(s1).clone();
        let mut local: BTreeMap<StructureKey, TransitionEntry> = BTreeMap::new();
        for sub in &subs {
            let s2 = catalogue.classify(&sub.stabilizer_algebra, sub.level);
            let k2 = catalogue.structure(s2).clone();
            let mult = sub.size / src.size;
            let e = local.entry(k2.clone()).or_insert(TransitionEntry { count: 0, multiplier: mult });
            if e.multiplier != mult {
                table.violations.push(format!(
                    "class {:?}: targets of one shadow have multipliers {} and {mult}",
                    src.representative, e.multiplier
                ));
            }
            e.count += 1;
        }
        let first = !table.sources.contains_key(&k1);
        *table.sources.entry(k1.clone()).or_insert(0) += 1;
        if first {
            for (k2, e) in local {
                table.entries.insert((k1.clone(), k2), e);
            }
        } else {
            let expected: BTreeMap<&StructureKey, &TransitionEntry> =
                table.entries.iter().filter(|((a, _), _)| *a == k1).map(|((_, b), e)| (b, e)).collect();
            let got: BTreeMap<&StructureKey, &TransitionEntry> = local.iter().collect();
            if expected != got {
                table.violations.push(format!("class {:?}: fiber statistics differ from its shadow's", src.representative));
            }
        }
    }
    Ok(table)
}

/// `(size, multiplicity)` pairs of the classes with shadow `sigma`; empty
/// when the shadow does not occur.
pub fn zeta_sigma(classes: &[SimilarityClass], catalogue: &mut ShadowCatalogue, sigma: usize) -> BTreeMap<u128, u64> {
    let mut out = BTreeMap::new();
    for c in classes {
        if catalogue.classify(&c.stabilizer_algebra, c.level) == sigma {
            *out.entry(c.size).or_insert(0) += 1;
        }
    }
    out
}

/// Source classes for transition statistics: up to `per_shadow` classes for
/// every shadow met at levels 1 and 2.
pub fn transition_sources(
    p: u64,
    per_shadow: usize,
    catalogue: &mut ShadowCatalogue,
    opts: &FiberOptions,
) -> Result<Vec<SimilarityClass>> {
    let level1: Vec<(SimilarityClass, usize)> = classes::classes_at_level(p, 1)?
        .into_iter()
        .map(|c| {
            let s = catalogue.classify(&c.stabilizer_algebra, 1);
            (c, s)
        })
        .collect();
    let mut sources = sample_by_shadow(&level1, per_shadow, opts.seed);
    let seen: BTreeSet<usize> = level1.iter().map(|x| x.1).collect();
    let probes = sample_by_shadow(&level1, 1, opts.seed ^ 1);
    let parts: Vec<Vec<SimilarityClass>> = probes.par_iter().map(|c| fiber_split(c, opts)).collect::<Result<_>>()?;
    let level2: Vec<(SimilarityClass, usize)> = parts
        .into_iter()
        .flatten()
        .map(|c| {
            let s = catalogue.classify(&c.stabilizer_algebra, 2);
            (c, s)
        })
        .filter(|x| !seen.contains(&x.1))
        .collect();
    sources.extend(sample_by_shadow(&level2, per_shadow, opts.seed ^ 2));
    Ok(sources)
}
