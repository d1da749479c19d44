//! Smith normal form over finite local PIRs and the congruence normal form of
//! alternating matrices.

use super::ring::LocalRing;
use crate::error::{Error, Result};

/// Dense row-major matrix over a ring element type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn map<F: Clone>(&self, f: impl Fn(&E) -> F) -> Matrix<F> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }
}

pub fn identity<R: LocalRing>(ring: &R, n: usize) -> Matrix<R::Elem> {
    let mut m = Matrix::filled(n, n, ring.zero());
    for i in 0..n {
        m.set(i, i, ring.one());
    }
    m
}

pub fn mat_mul<R: LocalRing>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    assert_eq!(a.cols, b.rows, "dimension mismatch");
    let mut out = Matrix::filled(a.rows, b.cols, ring.zero());
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if ring.is_zero(x) {
                continue;
            }
            for j in 0..b.cols {
                let v = ring.add(out.get(i, j), &ring.mul(x, b.get(k, j)));
                out.set(i, j, v);
            }
        }
    }
    out
}

/// `U M V = D` with `U`, `V` invertible and `D` diagonal with entries `p^{a_i}`.
#[derive(Clone, Debug)]
pub struct SmithForm<E> {
    /// Exponents `a_1 <= a_2 <= ...`, one per diagonal slot; zero entries carry the level.
    pub exponents: Vec<u32>,
    pub u: Matrix<E>,
    pub v: Matrix<E>,
}

impl<E: Clone> SmithForm<E> {
    pub fn diagonal<R: LocalRing<Elem = E>>(&self, ring: &R, rows: usize, cols: usize) -> Matrix<E> {
        let mut d = Matrix::filled(rows, cols, ring.zero());
        let p = ring.from_int(ring.p() as i64);
        for (i, &a) in self.exponents.iter().enumerate() {
            let mut v = ring.one();
            for _ in 0..a {
                v = ring.mul(&v, &p);
            }
            d.set(i, i, v);
        }
        d
    }
}

fn row_axpy<R: LocalRing>(ring: &R, m: &mut Matrix<R::Elem>, dst: usize, src: usize, f: &R::Elem) {
    for j in 0..m.cols {
        let v = ring.sub(m.get(dst, j), &ring.mul(f, m.get(src, j)));
        m.set(dst, j, v);
    }
}

fn col_axpy<R: LocalRing>(ring: &R, m: &mut Matrix<R::Elem>, dst: usize, src: usize, f: &R::Elem) {
    for i in 0..m.rows {
        let v = ring.sub(m.get(i, dst), &ring.mul(f, m.get(i, src)));
        m.set(i, dst, v);
    }
}

fn min_valuation_entry<R: LocalRing>(ring: &R, a: &Matrix<R::Elem>, k: usize) -> (u32, usize, usize) {
    let mut best = (ring.level(), k, k);
    for i in k..a.rows {
        for j in k..a.cols {
            let v = ring.valuation(a.get(i, j));
            if v < best.0 {
                best = (v, i, j);
                if v == 0 {
                    return best;
                }
            }
        }
    }
    best
}

/// Smith normal form with transforms, valuation-greedy pivoting.
pub fn smith_normal_form<R: LocalRing>(ring: &R, m: &Matrix<R::Elem>) -> SmithForm<R::Elem> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = identity(ring, rows);
    let mut v = identity(ring, cols);
    let mut exponents = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        let (val, pi, pj) = min_valuation_entry(ring, &a, k);
        if val == ring.level() {
            exponents.resize(rows.min(cols), ring.level());
            break;
        }
        a.swap_rows(k, pi);
        u.swap_rows(k, pi);
        a.swap_cols(k, pj);
        v.swap_cols(k, pj);
        let unit = ring.div_pi_pow(a.get(k, k), val);
        let inv = ring.inv_unit(&unit).expect("pivot cofactor is a unit");
        for j in 0..cols {
            let x = ring.mul(&inv, a.get(k, j));
            a.set(k, j, x);
        }
        for j in 0..rows {
            let x = ring.mul(&inv, u.get(k, j));
            u.set(k, j, x);
        }
        for i in k + 1..rows {
            if ring.is_zero(a.get(i, k)) {
                continue;
            }
            let f = ring.div_pi_pow(a.get(i, k), val);
            row_axpy(ring, &mut a, i, k, &f);
            row_axpy(ring, &mut u, i, k, &f);
        }
        for j in k + 1..cols {
            if ring.is_zero(a.get(k, j)) {
                continue;
            }
            let f = ring.div_pi_pow(a.get(k, j), val);
            col_axpy(ring, &mut a, j, k, &f);
            col_axpy(ring, &mut v, j, k, &f);
        }
        exponents.push(val);
    }
    SmithForm { exponents, u, v }
}

/// Elementary-divisor exponents without transforms.
pub fn generic_exponents<R: LocalRing>(ring: &R, data: &[R::Elem], rows: usize, cols: usize) -> Vec<u32> {
    let mut a = Matrix::from_vec(rows, cols, data.to_vec());
    let mut exponents = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        let (val, pi, pj) = min_valuation_entry(ring, &a, k);
        if val == ring.level() {
            exponents.resize(rows.min(cols), ring.level());
            break;
        }
        a.swap_rows(k, pi);
        a.swap_cols(k, pj);
        let unit = ring.div_pi_pow(a.get(k, k), val);
        let inv = ring.inv_unit(&unit).expect("pivot cofactor is a unit");
        for j in k..cols {
            let x = ring.mul(&inv, a.get(k, j));
            a.set(k, j, x);
        }
        for i in k + 1..rows {
            if ring.is_zero(a.get(i, k)) {
                continue;
            }
            let f = ring.div_pi_pow(a.get(i, k), val);
            // column k of row i becomes zero; the pivot row is cleared implicitly
            for j in k..cols {
                let x = ring.sub(a.get(i, j), &ring.mul(&f, a.get(k, j)));
                a.set(i, j, x);
            }
        }
        exponents.push(val);
    }
    exponents
}

/// Fast path for `Z/p^l` on square matrices.
pub(crate) fn zpl_exponents(p: u64, level: u32, modulus: u64, data: &[u64], n: usize) -> Vec<u32> {
    let mut a: Vec<u64> = data.to_vec();
    let mut pows = Vec::with_capacity(level as usize + 1);
    let mut x = 1u64;
    for _ in 0..=level {
        pows.push(x);
        x = x.saturating_mul(p);
    }
    let val = |x: u64| -> u32 {
        if x == 0 {
            return level;
        }
        let mut v = 0;
        while v < level && x % pows[v as usize + 1] == 0 {
            v += 1;
        }
        v
    };
    let mut exps = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = (level, k, k);
        'scan: for i in k..n {
            for j in k..n {
                let e = a[i * n + j];
                if e == 0 {
                    continue;
                }
                let v = val(e);
                if v < best.0 {
                    best = (v, i, j);
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v == level {
            exps.resize(n, level);
            break;
        }
        if pi != k {
            for j in 0..n {
                a.swap(k * n + j, pi * n + j);
            }
        }
        if pj != k {
            for i in 0..n {
                a.swap(i * n + k, i * n + pj);
            }
        }
        let pk = pows[v as usize];
        let inv = super::ring::inv_mod(a[k * n + k] / pk, modulus).expect("unit cofactor");
        for j in k..n {
            a[k * n + j] = a[k * n + j] * inv % modulus;
        }
        for i in k + 1..n {
            let e = a[i * n + k];
            if e == 0 {
                continue;
            }
            let f = e / pk;
            for j in k..n {
                let s = f * a[k * n + j] % modulus;
                a[i * n + j] = (a[i * n + j] + modulus - s) % modulus;
            }
        }
        exps.push(v);
    }
    exps
}

/// Congruence normal form `P^T A P = diag(p^{b_i} J)` of an alternating matrix.
///
/// Returns the full exponent multiset (each `b_i` twice, plus `level` for a
/// leftover zero row when `n` is odd), sorted.
pub fn alternating_exponents<R: LocalRing>(ring: &R, m: &Matrix<R::Elem>) -> Result<Vec<u32>> {
    let n = m.rows;
    if m.cols != n {
        return Err(Error::InvalidParameter("alternating form must be square".into()));
    }
    for i in 0..n {
        if !ring.is_zero(m.get(i, i)) {
            return Err(Error::InvalidParameter("alternating form has nonzero diagonal".into()));
        }
        for j in 0..i {
            if *m.get(i, j) != ring.neg(m.get(j, i)) {
                return Err(Error::InvalidParameter("matrix is not antisymmetric".into()));
            }
        }
    }
    let mut a = m.clone();
    let mut exps = Vec::with_capacity(n);
    let mut k = 0;
    while k + 1 < n {
        let mut best = (ring.level(), k, k + 1);
        for i in k..n {
            for j in i + 1..n {
                let v = ring.valuation(a.get(i, j));
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (val, bi, bj) = best;
        if val == ring.level() {
            break;
        }
        // move (bi, bj) to (k, k+1) by simultaneous permutations
        a.swap_rows(k, bi);
        a.swap_cols(k, bi);
        let bj = if bj == k { bi } else { bj };
        a.swap_rows(k + 1, bj);
        a.swap_cols(k + 1, bj);
        let unit = ring.div_pi_pow(a.get(k, k + 1), val);
        let inv = ring.inv_unit(&unit).expect("pivot cofactor is a unit");
        for j in 0..n {
            let x = ring.mul(&inv, a.get(k, j));
            a.set(k, j, x);
        }
        for i in 0..n {
            let x = ring.mul(&inv, a.get(i, k));
            a.set(i, k, x);
        }
        for i in k + 2..n {
            // kill a[i][k] using row/col k+1 (a[k+1][k] = -p^val)
            if !ring.is_zero(a.get(i, k)) {
                let x = ring.neg(&ring.div_pi_pow(a.get(i, k), val));
                row_axpy(ring, &mut a, i, k + 1, &x);
                col_axpy(ring, &mut a, i, k + 1, &x);
            }
            // kill a[i][k+1] using row/col k (a[k][k+1] = p^val)
            if !ring.is_zero(a.get(i, k + 1)) {
                let y = ring.div_pi_pow(a.get(i, k + 1), val);
                row_axpy(ring, &mut a, i, k, &y);
                col_axpy(ring, &mut a, i, k, &y);
            }
        }
        exps.push(val);
        exps.push(val);
        k += 2;
    }
    exps.resize(n, ring.level());
    exps.sort_unstable();
    Ok(exps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_lie::ring::{ring_make, Zpl};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix<R: LocalRing>(ring: &R, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<R::Elem> {
        let n = ring.cardinality();
        let data = (0..rows * cols)
            .map(|_| {
                // bias toward non-units so that higher exponents show up
                let x = ring.element(rng.gen_range(0..n));
                if rng.gen_bool(0.5) {
                    ring.mul(&x, &ring.from_int(ring.p() as i64))
                } else {
                    x
                }
            })
            .collect();
        Matrix::from_vec(rows, cols, data)
    }

    fn check_reconstruction<R: LocalRing>(ring: &R, m: &Matrix<R::Elem>) -> Vec<u32> {
        let s = smith_normal_form(ring, m);
        let d = s.diagonal(ring, m.rows(), m.cols());
        assert_eq!(mat_mul(ring, &mat_mul(ring, &s.u, m), &s.v), d);
        assert!(s.exponents.windows(2).all(|w| w[0] <= w[1]));
        // U and V are invertible: their own forms are all units
        assert!(generic_exponents(ring, s.u.data(), m.rows(), m.rows()).iter().all(|&e| e == 0));
        assert!(generic_exponents(ring, s.v.data(), m.cols(), m.cols()).iter().all(|&e| e == 0));
        s.exponents
    }

    #[test]
    fn reconstruction_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = Zpl::new(5, 3).unwrap();
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=6);
            let m = random_matrix(&z, n, n, &mut rng);
            let e = check_reconstruction(&z, &m);
            assert_eq!(e, z.divisor_exponents(m.data(), n));
            assert_eq!(e, generic_exponents(&z, m.data(), n, n));
        }
        let gr = ring_make(3, 2, 2).unwrap();
        for _ in 0..300 {
            let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
            check_reconstruction(&gr, &random_matrix(&gr, r, c, &mut rng));
        }
    }

    #[test]
    fn small_explicit_forms() {
        let z = Zpl::new(5, 2).unwrap();
        let m = Matrix::from_vec(2, 2, vec![5, 0, 0, 0]);
        assert_eq!(smith_normal_form(&z, &m).exponents, vec![1, 2]);
        let m = Matrix::from_vec(2, 2, vec![5, 10, 1, 3]);
        assert_eq!(smith_normal_form(&z, &m).exponents, vec![0, 1]);
    }

    #[test]
    fn invariance_under_unimodular_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = Zpl::new(3, 4).unwrap();
        let mut done = 0;
        while done < 500 {
            let m = random_matrix(&z, 5, 5, &mut rng);
            let p = random_matrix(&z, 5, 5, &mut rng);
            let q = random_matrix(&z, 5, 5, &mut rng);
            let unimodular = |x: &Matrix<u64>| z.divisor_exponents(x.data(), 5).iter().all(|&e| e == 0);
            if !unimodular(&p) || !unimodular(&q) {
                continue;
            }
            let moved = mat_mul(&z, &mat_mul(&z, &p, &m), &q);
            assert_eq!(z.divisor_exponents(m.data(), 5), z.divisor_exponents(moved.data(), 5));
            done += 1;
        }
    }

    fn random_alternating<R: LocalRing>(ring: &R, n: usize, rng: &mut ChaCha8Rng) -> Matrix<R::Elem> {
        let mut m = Matrix::filled(n, n, ring.zero());
        for i in 0..n {
            for j in i + 1..n {
                let mut x = ring.element(rng.gen_range(0..ring.cardinality()));
                for _ in 0..rng.gen_range(0..3) {
                    x = ring.mul(&x, &ring.from_int(ring.p() as i64));
                }
                m.set(i, j, x.clone());
                m.set(j, i, ring.neg(&x));
            }
        }
        m
    }

    #[test]
    fn alternating_matrices_have_paired_exponents() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = Zpl::new(5, 2).unwrap();
        for _ in 0..10_000 {
            let m = random_alternating(&z, 8, &mut rng);
            let e = z.divisor_exponents(m.data(), 8);
            for chunk in e.chunks(2) {
                assert_eq!(chunk[0], chunk[1], "unpaired exponents {e:?}");
            }
            assert_eq!(alternating_exponents(&z, &m).unwrap(), e);
        }
        let gr = ring_make(3, 2, 2).unwrap();
        for _ in 0..200 {
            let m = random_alternating(&gr, 5, &mut rng);
            let e = smith_normal_form(&gr, &m).exponents;
            assert_eq!(alternating_exponents(&gr, &m).unwrap(), e);
        }
    }

    #[test]
    fn non_alternating_input_is_rejected() {
        let z = Zpl::new(5, 1).unwrap();
        let m = Matrix::from_vec(2, 2, vec![0, 1, 1, 0]);
        assert!(alternating_exponents(&z, &m).is_err());
    }
}
