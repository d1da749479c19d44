//! Irreducible character degrees of finite matrix groups by the
//! Burnside–Dixon method.

use super::mat3::{self, Mat3};
use crate::a2_formulas::is_prime;
use crate::error::{Error, Result};
use crate::finite_lie::inv_mod;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

pub const DEFAULT_ORDER_LIMIT: usize = 1_000_000;
pub const DEFAULT_CLASS_LIMIT: usize = 200;

/// A finite subgroup of `GL3(Z/m)` held as an explicit element list.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    modulus: u64,
    elements: Vec<Mat3>,
    index: HashMap<Mat3, u32>,
    generators: Vec<Mat3>,
}

fn closure(modulus: u64, gens: &[Mat3], limit: usize) -> Result<(Vec<Mat3>, HashMap<Mat3, u32>)> {
    let one = mat3::reduce(&mat3::ONE, modulus);
    let mut elements = vec![one];
    let mut index = HashMap::from([(one, 0u32)]);
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head];
        head += 1;
        for g in gens {
            let y = mat3::mul(&x, g, modulus);
            if !index.contains_key(&y) {
                if elements.len() >= limit {
                    return Err(Error::GroupTooLarge(format!("more than {limit} elements")));
                }
                index.insert(y, elements.len() as u32);
                elements.push(y);
            }
        }
    }
    Ok((elements, index))
}

impl FiniteGroup {
    pub fn generated_by(modulus: u64, gens: &[Mat3], limit: usize) -> Result<Self> {
        let gens: Vec<Mat3> = gens.iter().map(|g| mat3::reduce(g, modulus)).collect();
        if let Some(g) = gens.iter().find(|g| mat3::inverse(g, modulus).is_none()) {
            return Err(Error::InvalidParameter(format!("generator {g:?} is not invertible")));
        }
        let (elements, index) = closure(modulus, &gens, limit)?;
        Ok(Self { modulus, elements, index, generators: gens })
    }

    /// Wraps a subgroup given by all of its elements, finding a small
    /// generating set on the way.
    pub fn from_elements(modulus: u64, elements: &[Mat3], seed: u64) -> Result<Self> {
        let target = elements.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gens: Vec<Mat3> = Vec::new();
        let mut current = closure(modulus, &gens, target + 1)?;
        let mut misses = 0;
        while current.0.len() < target {
            let g = elements[rng.gen_range(0..target)];
            if current.1.contains_key(&g) {
                misses += 1;
                if misses > 64 * target {
                    return Err(Error::Inconsistent("generator search stalled".into()));
                }
                continue;
            }
            gens.push(g);
            current = closure(modulus, &gens, target + 1)
                .map_err(|_| Error::Inconsistent("element list is not closed under multiplication".into()))?;
        }
        if current.0.len() != target || elements.iter().any(|e| !current.1.contains_key(e)) {
            return Err(Error::Inconsistent("element list is not a group".into()));
        }
        let (elements, index) = current;
        Ok(Self { modulus, elements, index, generators: gens })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[Mat3] {
        &self.elements
    }

    pub fn generators(&self) -> &[Mat3] {
        &self.generators
    }

    pub fn contains(&self, g: &Mat3) -> bool {
        self.index.contains_key(g)
    }

    /// Conjugacy classes, the identity class first.
    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        let m = self.modulus;
        let gens: Vec<(Mat3, Mat3)> =
            self.generators.iter().map(|g| (*g, mat3::inverse(g, m).expect("unit"))).collect();
        let n = self.elements.len();
        let mut class_of = vec![u32::MAX; n];
        let mut representatives = Vec::new();
        let mut sizes = Vec::new();
        for start in 0..n {
            if class_of[start] != u32::MAX {
                continue;
            }
            let c = representatives.len() as u32;
            representatives.push(start);
            class_of[start] = c;
            let mut queue = vec![start];
            let mut size = 0u64;
            while let Some(i) = queue.pop() {
                size += 1;
                let x = self.elements[i];
                for (g, gi) in &gens {
                    let y = self.index[&mat3::conj(g, &x, gi, m)] as usize;
                    if class_of[y] == u32::MAX {
                        class_of[y] = c;
                        queue.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        ConjugacyClasses { class_of, representatives, sizes }
    }

    pub fn exponent(&self, classes: &ConjugacyClasses) -> u64 {
        classes
            .representatives
            .iter()
            .map(|&i| mat3::order(&self.elements[i], self.modulus))
            .fold(1, |a, b| a.lcm(&b))
    }

    fn inverse_indices(&self) -> Vec<u32> {
        self.elements
            .iter()
            .map(|x| self.index[&mat3::inverse(x, self.modulus).expect("unit")])
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ConjugacyClasses {
    pub class_of: Vec<u32>,
    /// Element indices of class representatives.
    pub representatives: Vec<usize>,
    pub sizes: Vec<u64>,
}

impl ConjugacyClasses {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterDegrees {
    pub order: u64,
    pub class_count: usize,
    pub exponent: u64,
    pub modulus: u64,
    /// Sorted ascending.
    pub degrees: Vec<u64>,
}

impl CharacterDegrees {
    /// `(degree, multiplicity)` pairs.
    pub fn zeta(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for &d in &self.degrees {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.degrees.iter().map(|d| d * d).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DixonOptions {
    pub order_limit: usize,
    pub class_limit: usize,
    pub seed: u64,
}

impl Default for DixonOptions {
    fn default() -> Self {
        Self { order_limit: DEFAULT_ORDER_LIMIT, class_limit: DEFAULT_CLASS_LIMIT, seed: 0xd1c5 }
    }
}

/// Smallest prime `P = 1 mod exponent` with `P > 2 sqrt(order)`.
pub fn dixon_prime(exponent: u64, order: u64) -> Result<u64> {
    let bound = 2 * order.isqrt() + 2;
    let mut k = bound / exponent + 1;
    loop {
        let cand = k
            .checked_mul(exponent)
            .and_then(|x| x.checked_add(1))
            .filter(|&x| x < 1 << 31)
            .ok_or_else(|| Error::DixonModulus(format!("no prime found for exponent {exponent}")))?;
        if cand > bound && is_prime(cand) {
            return Ok(cand);
        }
        k += 1;
    }
}

pub fn char_degrees(modulus: u64, gens: &[Mat3], opts: &DixonOptions) -> Result<CharacterDegrees> {
    let g = FiniteGroup::generated_by(modulus, gens, opts.order_limit)?;
    degrees_of_group(&g, opts)
}

pub fn degrees_of_group(g: &FiniteGroup, opts: &DixonOptions) -> Result<CharacterDegrees> {
    if g.order() > opts.order_limit {
        return Err(Error::GroupTooLarge(format!("order {} exceeds {}", g.order(), opts.order_limit)));
    }
    let classes = g.conjugacy_classes();
    let r = classes.count();
    if r > opts.class_limit {
        return Err(Error::GroupTooLarge(format!("{r} classes exceed {}", opts.class_limit)));
    }
    let order = g.order() as u64;
    let exponent = g.exponent(&classes);
    let prime = dixon_prime(exponent, order)?;
    let coeffs = class_coefficients(g, &classes);
    let vectors = common_eigenvectors(&coeffs, r, prime, opts.seed)?;
    let inv = g.inverse_indices();
    let dual: Vec<usize> =
        classes.representatives.iter().map(|&i| classes.class_of[inv[i] as usize] as usize).collect();
    let mut degrees = Vec::with_capacity(r);
    for v in &vectors {
        let mut s = 0u64;
        for j in 0..r {
            let t = mulm(v[j], v[dual[j]], prime);
            let size_inv = inv_mod(classes.sizes[j] % prime, prime).expect("class size coprime to prime");
            s = (s + mulm(t, size_inv, prime)) % prime;
        }
        let s_inv =
            inv_mod(s, prime).ok_or_else(|| Error::Inconsistent("vanishing norm of central character".into()))?;
        let target = mulm(order % prime, s_inv, prime);
        let d = (1..=order.isqrt())
            .find(|&d| order % d == 0 && mulm(d, d, prime) == target)
            .ok_or_else(|| Error::Inconsistent("no admissible degree for a central character".into()))?;
        degrees.push(d);
    }
    degrees.sort_unstable();
    let out = CharacterDegrees { order, class_count: r, exponent, modulus: prime, degrees };
    if out.sum_of_squares() != order || out.degrees.len() != r {
        return Err(Error::Inconsistent(format!(
            "sum of squared degrees {} against order {order}, {} degrees against {r} classes",
            out.sum_of_squares(),
            out.degrees.len()
        )));
    }
    Ok(out)
}

/// `c[j][i][k] = #{(x, y) in C_j x C_i : xy = z_k}` for fixed `z_k in C_k`,
/// flattened as `(j * r + i) * r + k`.
fn class_coefficients(g: &FiniteGroup, classes: &ConjugacyClasses) -> Vec<u64> {
    let r = classes.count();
    let m = g.modulus;
    let inv = g.inverse_indices();
    let mut c = vec![0u64; r * r * r];
    for (k, &zk) in classes.representatives.iter().enumerate() {
        let z = g.elements[zk];
        for (xi, _) in g.elements.iter().enumerate() {
            let y = mat3::mul(&g.elements[inv[xi] as usize], &z, m);
            let j = classes.class_of[xi] as usize;
            let i = classes.class_of[g.index[&y] as usize] as usize;
            c[(j * r + i) * r + k] += 1;
        }
    }
    c
}

#[inline]
fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Common eigenvectors of the class matrices, normalized at the identity.
fn common_eigenvectors(coeffs: &[u64], r: usize, p: u64, seed: u64) -> Result<Vec<Vec<u64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity_space: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            let mut v = vec![0; r];
            v[i] = 1;
            v
        })
        .collect();
    mat3::rref(&mut identity_space, p);
    let mut pending = vec![identity_space];
    let mut done = Vec::new();
    let mut stalls = 0;
    while let Some(space) = pending.pop() {
        if space.len() == 1 {
            let v = &space[0];
            let inv = inv_mod(v[0] % p, p).ok_or_else(|| Error::Inconsistent("eigenvector vanishes at 1".into()))?;
            done.push(v.iter().map(|&x| mulm(x, inv, p)).collect());
            continue;
        }
        let weights: Vec<u64> = (0..r).map(|_| rng.gen_range(0..p)).collect();
        let parts = split_space(coeffs, r, p, &weights, &space, &mut rng)?;
        if parts.len() == 1 {
            stalls += 1;
            if stalls > 64 {
                return Err(Error::Inconsistent("eigenspace does not split".into()));
            }
        }
        pending.extend(parts);
    }
    Ok(done)
}

/// Eigenspace decomposition of `sum_j w_j M_j` restricted to `space`, whose
/// rows are in reduced echelon form.
fn split_space(
    coeffs: &[u64],
    r: usize,
    p: u64,
    weights: &[u64],
    space: &[Vec<u64>],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<Vec<u64>>>> {
    let k = space.len();
    let pivots: Vec<usize> = space.iter().map(|v| v.iter().position(|&x| x != 0).expect("nonzero row")).collect();
    // A[i][c] with M w_c = sum_i A[i][c] w_i.
    let mut a = vec![vec![0u64; k]; k];
    for (c, w) in space.iter().enumerate() {
        let mut image = vec![0u64; r];
        for (row, img) in image.iter_mut().enumerate() {
            let mut acc = 0u128;
            for (j, &wj) in weights.iter().enumerate() {
                if wj == 0 {
                    continue;
                }
                let base = (j * r + row) * r;
                let mut inner = 0u128;
                for (kk, &x) in w.iter().enumerate() {
                    inner += coeffs[base + kk] as u128 * x as u128;
                }
                acc += (inner % p as u128) * wj as u128;
            }
            *img = (acc % p as u128) as u64;
        }
        for (i, &pc) in pivots.iter().enumerate() {
            a[i][c] = image[pc];
        }
    }
    let cp = char_poly(&a, p);
    let roots = distinct_roots(&cp, p, rng);
    let mut parts = Vec::new();
    let mut total = 0;
    for lambda in roots {
        let mut shifted = a.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] = (row[i] + p - lambda) % p;
        }
        let kernel = mat3::nullspace(&shifted, k, p);
        total += kernel.len();
        let mut lifted: Vec<Vec<u64>> = kernel
            .iter()
            .map(|coef| {
                (0..r)
                    .map(|t| coef.iter().zip(space).fold(0u64, |acc, (&c, w)| (acc + mulm(c, w[t], p)) % p))
                    .collect()
            })
            .collect();
        mat3::rref(&mut lifted, p);
        parts.push(lifted);
    }
    if total != k {
        return Err(Error::Inconsistent("class algebra is not split semisimple modulo the Dixon prime".into()));
    }
    Ok(parts)
}

/// Characteristic polynomial, ascending coefficients, via Hessenberg form.
fn char_poly(a: &[Vec<u64>], p: u64) -> Vec<u64> {
    let n = a.len();
    let mut h: Vec<Vec<u64>> = a.to_vec();
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else { continue };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = inv_mod(h[j + 1][j], p).expect("nonzero pivot");
        for i in j + 2..n {
            if h[i][j] == 0 {
                continue;
            }
            let u = mulm(h[i][j], inv, p);
            for c in 0..n {
                h[i][c] = (h[i][c] + p - mulm(u, h[j + 1][c], p)) % p;
            }
            for row in h.iter_mut() {
                row[j + 1] = (row[j + 1] + mulm(u, row[i], p)) % p;
            }
        }
    }
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for m in 0..n {
        // (x - h[m][m]) p_m
        let prev = &polys[m];
        let mut next = vec![0u64; m + 2];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % p;
            next[d] = (next[d] + p - mulm(h[m][m], c, p)) % p;
        }
        let mut t = 1u64;
        for i in (0..m).rev() {
            t = mulm(t, h[i + 1][i], p);
            let f = mulm(h[i][m], t, p);
            if f == 0 {
                continue;
            }
            for (d, &c) in polys[i].iter().enumerate() {
                next[d] = (next[d] + p - mulm(f, c, p)) % p;
            }
        }
        polys.push(next);
    }
    polys.pop().expect("nonempty")
}

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.len() > 1 && f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
        }
    }
    trim(out)
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p).expect("nonzero leading coefficient");
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let shift = r.len() - 1 - dm;
        let f = mulm(*r.last().expect("nonempty"), lead_inv, p);
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mulm(f, c, p)) % p;
        }
        r = trim(r);
        if r.len() - 1 < dm {
            break;
        }
    }
    r
}

fn is_zero(f: &[u64]) -> bool {
    f.iter().all(|&c| c == 0)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !is_zero(&b) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    let inv = inv_mod(*a.last().expect("nonempty"), p).expect("nonzero");
    a.iter().map(|&c| mulm(c, inv, p)).collect()
}

fn poly_pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_rem(&poly_mul(&result, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    result
}

fn poly_div_exact(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p).expect("nonzero");
    let mut q = vec![0u64; a.len() - db];
    for s in (0..q.len()).rev() {
        let f = mulm(r[s + db], lead_inv, p);
        q[s] = f;
        for (i, &c) in b.iter().enumerate() {
            r[s + i] = (r[s + i] + p - mulm(f, c, p)) % p;
        }
    }
    q
}

/// Distinct roots in `F_p` by Cantor–Zassenhaus.
fn distinct_roots(f: &[u64], p: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let f = trim(f.to_vec());
    if f.len() <= 1 {
        return Vec::new();
    }
    let xp = poly_pow_mod(&[0, 1], p, &f, p);
    let mut xp_minus_x = xp.clone();
    xp_minus_x.resize(xp_minus_x.len().max(2), 0);
    xp_minus_x[1] = (xp_minus_x[1] + p - 1) % p;
    let g = poly_gcd(&f, &trim(xp_minus_x), p);
    let mut roots = Vec::new();
    let mut stack = vec![g];
    while let Some(h) = stack.pop() {
        match h.len() {
            0 | 1 => {}
            2 => roots.push((p - mulm(h[0], inv_mod(h[1], p).expect("monic"), p)) % p),
            _ if p == 2 => {
                for x in 0..2 {
                    if h.iter().rev().fold(0, |acc, &c| (acc * x + c) % 2) == 0 {
                        roots.push(x);
                    }
                }
            }
            _ => loop {
                let a = rng.gen_range(0..p);
                let mut t = poly_pow_mod(&[a, 1], (p - 1) / 2, &h, p);
                t[0] = (t[0] + p - 1) % p;
                let d = poly_gcd(&h, &trim(t), p);
                if d.len() > 1 && d.len() < h.len() {
                    let other = poly_div_exact(&h, &d, p);
                    stack.push(d);
                    stack.push(other);
                    break;
                }
            },
        }
    }
    roots.sort_unstable();
    roots
}

/// Generators of `GL3(F_p)` or of `SL3(F_p)`.
pub fn standard_generators(p: u64, special: bool) -> Vec<Mat3> {
    let mut gens = vec![[1, 1, 0, 0, 1, 0, 0, 0, 1], [0, 0, 1, 1, 0, 0, 0, 1, 0]];
    gens.push([1, 0, 0, 1, 1, 0, 0, 0, 1]);
    if !special {
        let g = (1..p).find(|&x| (1..p - 1).all(|k| mat3::pow_mod(x, k, p) != 1)).unwrap_or(1);
        gens.push([g, 0, 0, 0, 1, 0, 0, 0, 1]);
    }
    gens.into_iter().map(|g| mat3::reduce(&g, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl3_f2_degrees() {
        let d = char_degrees(2, &standard_generators(2, false), &DixonOptions::default()).unwrap();
        assert_eq!(d.order, 168);
        assert_eq!(d.degrees, vec![1, 3, 3, 6, 7, 8]);
    }

    #[test]
    fn abelian_torus() {
        let p = 7;
        let gens = [[3, 0, 0, 0, 5, 0, 0, 0, 1], [1, 0, 0, 0, 3, 0, 0, 0, 5]];
        let d = char_degrees(p, &gens, &DixonOptions::default()).unwrap();
        assert_eq!(d.order, 36);
        assert!(d.degrees.iter().all(|&x| x == 1));
        assert_eq!(d.degrees.len(), 36);
    }

    #[test]
    fn small_groups_against_known_tables() {
        // GL2(F3) inside GL3(F3): degrees 1,1,2,2,2,3,3,4.
        let gens = [[1, 1, 0, 0, 1, 0, 0, 0, 1], [0, 1, 0, 1, 0, 0, 0, 0, 1], [2, 0, 0, 0, 1, 0, 0, 0, 1]];
        let d = char_degrees(3, &gens, &DixonOptions::default()).unwrap();
        assert_eq!(d.order, 48);
        assert_eq!(d.degrees, vec![1, 1, 2, 2, 2, 3, 3, 4]);
        // SL3(F3): 13 classes, order 5616.
        let d = char_degrees(3, &standard_generators(3, true), &DixonOptions::default()).unwrap();
        assert_eq!(d.order, 5616);
        assert_eq!(d.class_count, 12);
    }

    #[test]
    fn prime_condition() {
        let p = dixon_prime(12, 168).unwrap();
        assert_eq!(p % 12, 1);
        assert!(p > 2 * 12 + 2);
        assert!(is_prime(p));
    }

    #[test]
    fn limits_are_enforced() {
        let opts = DixonOptions { order_limit: 100, ..DixonOptions::default() };
        assert!(matches!(char_degrees(2, &standard_generators(2, false), &opts), Err(Error::GroupTooLarge(_))));
        let opts = DixonOptions { class_limit: 3, ..DixonOptions::default() };
        assert!(matches!(char_degrees(2, &standard_generators(2, false), &opts), Err(Error::GroupTooLarge(_))));
    }

    #[test]
    fn group_from_elements() {
        let g = FiniteGroup::generated_by(2, &standard_generators(2, false), 1000).unwrap();
        let h = FiniteGroup::from_elements(2, g.elements(), 1).unwrap();
        assert_eq!(h.order(), 168);
        assert!(FiniteGroup::from_elements(2, &g.elements()[..100], 1).is_err());
    }
}
