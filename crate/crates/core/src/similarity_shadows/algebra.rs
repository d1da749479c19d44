//! Unital subalgebras of `M3(F_p)`: structure, unit groups and conjugacy.

use super::mat3::{self, Mat3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// An `F_p`-subspace of `M3(F_p)` closed under multiplication, kept in
/// reduced echelon form so that equal algebras have equal bases.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixAlgebra {
    p: u64,
    basis: Vec<Vec<u64>>,
}

/// Conjugation-invariant structure data, independent of `q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StructureKey {
    pub dim: usize,
    pub radical_dim: usize,
    pub radical_sq_dim: usize,
    /// Simple quotients `M_n(F_{q^e})` as sorted `(n, e)`.
    pub simple_factors: Vec<(usize, usize)>,
    pub center_dim: usize,
    /// `dim {v : J v = 0}`.
    pub socle_dim: usize,
    /// `dim J V`.
    pub radical_image_dim: usize,
    /// Sorted composition factor dimensions of `F_p^3`.
    pub composition: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct AlgebraStructure {
    pub key: StructureKey,
    pub unit_count: u128,
    /// Invariant lines and planes of `F_p^3`.
    pub invariant_lines: usize,
    pub invariant_planes: usize,
}

fn projective_points(p: u64) -> Vec<[u64; 3]> {
    let mut pts = Vec::new();
    for a in 0..p {
        for b in 0..p {
            pts.push([1, a, b]);
        }
    }
    for b in 0..p {
        pts.push([0, 1, b]);
    }
    pts.push([0, 0, 1]);
    pts
}

fn parallel(v: &[u64; 3], w: &[u64; 3], p: u64) -> bool {
    let c = |i: usize, j: usize| (v[i] * w[j] + p * p - v[j] * w[i] % p) % p;
    c(0, 1) == 0 && c(0, 2) == 0 && c(1, 2) == 0
}

fn dot(a: &[u64], b: &[u64], p: u64) -> u64 {
    a.iter().zip(b).map(|(x, y)| x * y % p).sum::<u64>() % p
}

fn units_of_simple(n: usize, e: usize, q: u128) -> u128 {
    let qe = q.pow(e as u32);
    (0..n as u32).map(|k| qe.pow(n as u32) - qe.pow(k)).product()
}

impl MatrixAlgebra {
    /// The algebra spanned by `gens` (assumed multiplicatively closed).
    pub fn from_span(p: u64, gens: &[Mat3]) -> Self {
        let vecs: Vec<Vec<u64>> = gens.iter().map(|g| mat3::reduce(g, p).to_vec()).collect();
        Self { p, basis: mat3::span_basis(&vecs, p) }
    }

    /// Centralizer of `a` in `M3(F_p)`.
    pub fn centralizer(p: u64, a: &Mat3) -> Self {
        let ad = mat3::ad_matrix(&mat3::reduce(a, p), p);
        let ns = mat3::nullspace(&ad, 9, p);
        Self { p, basis: mat3::span_basis(&ns, p) }
    }

    pub fn full(p: u64) -> Self {
        Self::from_span(p, &(0..9).map(|k| mat3::unit_matrix(k / 3, k % 3)).collect::<Vec<_>>())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> Vec<Mat3> {
        self.basis.iter().map(|v| mat3::vec_to_mat(v)).collect()
    }

    /// Canonical flattened basis, usable as a cache key.
    pub fn key(&self) -> Vec<u64> {
        self.basis.concat()
    }

    pub fn contains(&self, a: &Mat3) -> bool {
        mat3::in_span(&self.basis, &mat3::reduce(a, self.p), self.p)
    }

    pub fn element(&self, coeffs: &[u64]) -> Mat3 {
        let p = self.p;
        let mut m = mat3::ZERO;
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for k in 0..9 {
                m[k] = (m[k] + c * b[k]) % p;
            }
        }
        m
    }

    pub fn cardinality(&self) -> u128 {
        (self.p as u128).pow(self.dim() as u32)
    }

    /// Visits every element in lexicographic coefficient order.
    pub fn for_each_element(&self, mut f: impl FnMut(&Mat3)) {
        let d = self.dim();
        let mut coeffs = vec![0u64; d];
        let mut m = mat3::ZERO;
        loop {
            f(&m);
            let mut i = 0;
            loop {
                if i == d {
                    return;
                }
                coeffs[i] += 1;
                for k in 0..9 {
                    m[k] = (m[k] + self.basis[i][k]) % self.p;
                }
                if coeffs[i] < self.p {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    pub fn random_element(&self, rng: &mut impl Rng) -> Mat3 {
        let c: Vec<u64> = (0..self.dim()).map(|_| rng.gen_range(0..self.p)).collect();
        self.element(&c)
    }

    pub fn random_unit(&self, rng: &mut impl Rng) -> Mat3 {
        loop {
            let x = self.random_element(rng);
            if mat3::det(&x, self.p) != 0 {
                return x;
            }
        }
    }

    pub fn conjugate(&self, g: &Mat3) -> Self {
        let p = self.p;
        let gi = mat3::inverse(g, p).expect("conjugating matrix must be invertible");
        Self::from_span(p, &self.basis().iter().map(|a| mat3::conj(g, a, &gi, p)).collect::<Vec<_>>())
    }

    /// The span of the unit group.  Equal to the algebra unless some simple
    /// quotient is `F_2`.
    pub fn unit_span(&self) -> Self {
        if self.p > 2 {
            return self.clone();
        }
        let mut units = Vec::new();
        self.for_each_element(|m| {
            if mat3::det(m, 2) != 0 {
                units.push(*m);
            }
        });
        Self::from_span(2, &units)
    }

    fn coefficient_equations(&self, f: impl Fn(&Mat3) -> Vec<u64>) -> Vec<Vec<u64>> {
        let cols: Vec<Vec<u64>> = self.basis().iter().map(f).collect();
        let n = cols.first().map_or(0, |c| c.len());
        (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    fn from_coefficients(&self, coeff_basis: &[Vec<u64>]) -> Vec<Mat3> {
        coeff_basis.iter().map(|c| self.element(c)).collect()
    }

    /// Invariant lines (as spanning vectors) and invariant-plane normals.
    fn invariant_subspaces(&self) -> (Vec<[u64; 3]>, Vec<[u64; 3]>) {
        let p = self.p;
        let basis = self.basis();
        let pts = projective_points(p);
        let lines = pts.iter().filter(|v| basis.iter().all(|a| parallel(v, &mat3::apply(a, v, p), p))).copied().collect();
        let planes = pts
            .iter()
            .filter(|u| basis.iter().all(|a| parallel(u, &mat3::apply(&mat3::transpose(a), u, p), p)))
            .copied()
            .collect();
        (lines, planes)
    }

    /// Canonical composition flag of `F_p^3`: subspaces `W_1 < ... < W_r = V`.
    fn composition_flag(&self, lines: &[[u64; 3]], planes: &[[u64; 3]]) -> Vec<Vec<Vec<u64>>> {
        let p = self.p;
        let whole: Vec<Vec<u64>> = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let plane_of = |u: &[u64; 3]| mat3::span_basis(&mat3::nullspace(&[u.to_vec()], 3, p), p);
        if let Some(l) = lines.first() {
            let line = vec![l.to_vec()];
            if let Some(u) = planes.iter().find(|u| dot(*u, l, p) == 0) {
                vec![line, plane_of(u), whole]
            } else {
                vec![line, whole]
            }
        } else if let Some(u) = planes.first() {
            vec![plane_of(u), whole]
        } else {
            vec![whole]
        }
    }

    pub fn structure(&self) -> AlgebraStructure {
        let p = self.p;
        let d = self.dim();
        let (lines, planes) = self.invariant_subspaces();
        let flag = self.composition_flag(&lines, &planes);
        let mut all_eqs: Vec<Vec<u64>> = Vec::new();
        let mut kernels: Vec<(Vec<Vec<u64>>, usize, usize)> = Vec::new();
        let mut prev: Vec<Vec<u64>> = Vec::new();
        let mut composition = Vec::new();
        for w in &flag {
            let normals = if prev.is_empty() {
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
            } else {
                mat3::nullspace(&prev, 3, p)
            };
            let eqs = self.coefficient_equations(|a| {
                let mut out = Vec::new();
                for b in w {
                    let img = mat3::apply(a, &[b[0], b[1], b[2]], p);
                    for n in &normals {
                        out.push(dot(n, &img, p));
                    }
                }
                out
            });
            let kernel = mat3::span_basis(&mat3::nullspace(&eqs, d, p), p);
            let s = w.len() - prev.len();
            composition.push(s);
            let image_dim = d - kernel.len();
            kernels.push((kernel, s, image_dim));
            all_eqs.extend(eqs);
            prev = w.clone();
        }
        let mut distinct: Vec<(Vec<Vec<u64>>, usize, usize)> = Vec::new();
        for k in kernels {
            if !distinct.iter().any(|x| x.0 == k.0) {
                distinct.push(k);
            }
        }
        composition.sort();
        let mut simple_factors: Vec<(usize, usize)> = distinct
            .iter()
            .map(|(_, s, m)| if *m == s * s { (*s, 1) } else { (1, *s) })
            .collect();
        simple_factors.sort();
        let radical = self.from_coefficients(&mat3::nullspace(&all_eqs, d, p));
        let mut products = Vec::new();
        for x in &radical {
            for y in &radical {
                products.push(mat3::mul(x, y, p).to_vec());
            }
        }
        let radical_sq_dim = mat3::span_basis(&products, p).len();
        let basis = self.basis();
        let center_eqs = self.coefficient_equations(|z| {
            basis.iter().flat_map(|a| mat3::sub(&mat3::mul(z, a, p), &mat3::mul(a, z, p), p)).collect()
        });
        let center_dim = mat3::nullspace(&center_eqs, d, p).len();
        let socle_rows: Vec<Vec<u64>> = radical.iter().flat_map(|j| (0..3).map(move |i| j[3 * i..3 * i + 3].to_vec())).collect();
        let socle_dim = if socle_rows.is_empty() { 3 } else { 3 - mat3::rank(&socle_rows, p) };
        let image_vecs: Vec<Vec<u64>> = radical
            .iter()
            .flat_map(|j| (0..3).map(move |c| vec![j[c], j[3 + c], j[6 + c]]))
            .collect();
        let radical_image_dim = mat3::rank(&image_vecs, p);
        let q = p as u128;
        let unit_count = q.pow(radical.len() as u32)
            * simple_factors.iter().map(|&(n, e)| units_of_simple(n, e, q)).product::<u128>();
        AlgebraStructure {
            key: StructureKey {
                dim: d,
                radical_dim: radical.len(),
                radical_sq_dim,
                simple_factors,
                center_dim,
                socle_dim,
                radical_image_dim,
                composition,
            },
            unit_count,
            invariant_lines: lines.len(),
            invariant_planes: planes.len(),
        }
    }

    pub fn unit_count(&self) -> u128 {
        self.structure().unit_count
    }

    /// Every unit, when the algebra has at most `limit` elements.
    pub fn units(&self, limit: u128) -> Option<Vec<Mat3>> {
        if self.cardinality() > limit {
            return None;
        }
        let mut out = Vec::new();
        self.for_each_element(|m| {
            if mat3::det(m, self.p) != 0 {
                out.push(*m);
            }
        });
        Some(out)
    }

    /// Element-order histogram of the unit group.
    pub fn element_orders(&self, limit: u128) -> Option<BTreeMap<u64, u64>> {
        let units = self.units(limit)?;
        let mut h = BTreeMap::new();
        for u in &units {
            *h.entry(mat3::order(u, self.p)).or_insert(0) += 1;
        }
        Some(h)
    }

    /// Orbit-size histogram of the unit group acting on `F_p^3`.
    pub fn orbit_signature(&self, limit: u128) -> Option<BTreeMap<u64, u64>> {
        let p = self.p;
        let n = (p * p * p) as usize;
        if self.cardinality() * n as u128 > limit {
            return None;
        }
        let units = self.units(limit)?;
        let mut seen = vec![false; n];
        let mut h = BTreeMap::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let v = [start as u64 % p, start as u64 / p % p, start as u64 / (p * p)];
            let mut size = 0u64;
            for u in &units {
                let w = mat3::apply(u, &v, p);
                let idx = (w[0] + p * w[1] + p * p * w[2]) as usize;
                if !seen[idx] {
                    seen[idx] = true;
                    size += 1;
                }
            }
            *h.entry(size).or_insert(0) += 1;
        }
        Some(h)
    }

    fn annihilator_rows(&self) -> Vec<Vec<u64>> {
        mat3::nullspace(&self.basis, 9, self.p)
    }

    /// Explicit search for `g` with `g A g^{-1} = other`.
    pub fn conjugator_to(&self, other: &Self, seed: u64) -> Option<Mat3> {
        let p = self.p;
        if self.dim() != other.dim() {
            return None;
        }
        if self == other {
            return Some(mat3::ONE);
        }
        let centralizer_dim = |x: &Mat3| mat3::nullspace(&mat3::ad_matrix(x, p), 9, p).len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut candidates = self.basis();
        candidates.extend((0..32).map(|_| self.random_element(&mut rng)));
        let x = candidates.into_iter().min_by_key(centralizer_dim)?;
        let cx = centralizer_dim(&x);
        if cx == 9 {
            return None;
        }
        let px = mat3::char_poly(&x, p);
        let ann: Vec<Vec<u64>> = other.annihilator_rows();
        let member = |m: &Mat3| ann.iter().all(|r| dot(r, m, p) == 0);
        let gens = self.basis();
        let mut found = None;
        other.for_each_element(|y| {
            if found.is_some() || mat3::char_poly(y, p) != px || centralizer_dim(y) != cx {
                return;
            }
            // g x - y g = 0
            let mut eqs = vec![vec![0u64; 9]; 9];
            for k in 0..9 {
                let e = mat3::unit_matrix(k / 3, k % 3);
                let img = mat3::sub(&mat3::mul(&e, &x, p), &mat3::mul(y, &e, p), p);
                for r in 0..9 {
                    eqs[r][k] = img[r];
                }
            }
            let sol = MatrixAlgebra { p, basis: mat3::nullspace(&eqs, 9, p) };
            sol.for_each_element(|g| {
                if found.is_some() || mat3::det(g, p) == 0 {
                    return;
                }
                let gi = mat3::inverse(g, p).expect("unit");
                if gens.iter().all(|a| member(&mat3::conj(g, a, &gi, p))) {
                    found = Some(*g);
                }
            });
        });
        found
    }

    /// Elements of the unit group with determinant one.
    pub fn special_units(&self, limit: u128) -> Option<Vec<Mat3>> {
        let units = self.units(limit)?;
        Some(units.into_iter().filter(|u| mat3::det(u, self.p) == 1).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(a: &Mat3, p: u64) -> StructureKey {
        MatrixAlgebra::centralizer(p, a).structure().key
    }

    #[test]
    fn level_one_centralizer_unit_counts() {
        let p = 5u64;
        let q = p as u128;
        let gl3 = (q.pow(3) - 1) * (q.pow(3) - q) * (q.pow(3) - q * q);
        let gl2 = (q * q - 1) * (q * q - q);
        let cases: Vec<(Mat3, u128)> = vec![
            (mat3::scalar(2), gl3),
            ([1, 0, 0, 0, 1, 0, 0, 0, 2], gl2 * (q - 1)),
            ([1, 0, 0, 0, 2, 0, 0, 0, 3], (q - 1).pow(3)),
            // companion of an irreducible cubic x^3 - x - 2 over F_5
            ([0, 0, 2, 1, 0, 1, 0, 1, 0], q.pow(3) - 1),
            ([0, 1, 0, 0, 0, 1, 0, 0, 0], q * q * (q - 1)),
            ([0, 1, 0, 0, 0, 0, 0, 0, 0], q.pow(3) * (q - 1) * (q - 1)),
        ];
        for (a, want) in cases {
            let alg = MatrixAlgebra::centralizer(p, &a);
            assert_eq!(alg.unit_count(), want, "{a:?}");
            let brute = alg.units(u128::MAX).unwrap().len() as u128;
            assert_eq!(brute, want);
        }
    }

    #[test]
    fn structure_separates_level_one_types() {
        let p = 7;
        let reps: Vec<Mat3> = vec![
            mat3::scalar(1),
            [1, 0, 0, 0, 1, 0, 0, 0, 2],
            [1, 1, 0, 0, 1, 0, 0, 0, 1],
            [1, 0, 0, 0, 2, 0, 0, 0, 3],
            [0, 3, 0, 1, 0, 0, 0, 0, 1],
            [0, 0, 2, 1, 0, 0, 0, 1, 0],
            [1, 1, 0, 0, 1, 0, 0, 0, 2],
            [0, 1, 0, 0, 0, 1, 0, 0, 0],
        ];
        let keys: std::collections::BTreeSet<_> = reps.iter().map(|a| key_of(a, p)).collect();
        assert_eq!(keys.len(), 8);
    }

    #[test]
    fn conjugator_search_finds_permutation() {
        let p = 5;
        let a = MatrixAlgebra::centralizer(p, &[1, 0, 0, 0, 1, 0, 0, 0, 2]);
        let b = MatrixAlgebra::centralizer(p, &[3, 0, 0, 0, 4, 0, 0, 0, 4]);
        let g = a.conjugator_to(&b, 1).expect("conjugate");
        assert_eq!(a.conjugate(&g), b);
        let torus = MatrixAlgebra::centralizer(p, &[1, 0, 0, 0, 2, 0, 0, 0, 3]);
        let regular = MatrixAlgebra::centralizer(p, &[0, 1, 0, 0, 0, 1, 0, 0, 0]);
        assert!(torus.conjugator_to(&regular, 1).is_none());
    }

    #[test]
    fn unit_span_over_f2_can_shrink() {
        let torus = MatrixAlgebra::centralizer(2, &[0, 0, 0, 0, 1, 0, 0, 0, 1]);
        assert_eq!(torus.dim(), 5);
        let diag = MatrixAlgebra::from_span(2, &[mat3::unit_matrix(0, 0), mat3::unit_matrix(1, 1), mat3::unit_matrix(2, 2)]);
        assert_eq!(diag.unit_span().dim(), 1);
    }
}
