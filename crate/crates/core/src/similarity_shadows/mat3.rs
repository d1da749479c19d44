//! 3x3 matrices over `Z/m` and dense linear algebra over `F_p`.

use crate::finite_lie::inv_mod;

/// Row-major 3x3 matrix with entries reduced modulo some `m`.
pub type Mat3 = [u64; 9];

pub const ZERO: Mat3 = [0; 9];
pub const ONE: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];

pub fn scalar(x: u64) -> Mat3 {
    [x, 0, 0, 0, x, 0, 0, 0, x]
}

pub fn unit_matrix(i: usize, j: usize) -> Mat3 {
    let mut e = ZERO;
    e[3 * i + j] = 1;
    e
}

#[inline]
pub fn mul(a: &Mat3, b: &Mat3, m: u64) -> Mat3 {
    let mut c = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let s = a[3 * i] as u128 * b[j] as u128
                + a[3 * i + 1] as u128 * b[3 + j] as u128
                + a[3 * i + 2] as u128 * b[6 + j] as u128;
            c[3 * i + j] = (s % m as u128) as u64;
        }
    }
    c
}

pub fn add(a: &Mat3, b: &Mat3, m: u64) -> Mat3 {
    std::array::from_fn(|k| (a[k] + b[k]) % m)
}

pub fn sub(a: &Mat3, b: &Mat3, m: u64) -> Mat3 {
    std::array::from_fn(|k| (a[k] + m - b[k] % m) % m)
}

pub fn scale(a: &Mat3, c: u64, m: u64) -> Mat3 {
    std::array::from_fn(|k| ((a[k] as u128 * c as u128) % m as u128) as u64)
}

pub fn reduce(a: &Mat3, m: u64) -> Mat3 {
    std::array::from_fn(|k| a[k] % m)
}

pub fn transpose(a: &Mat3) -> Mat3 {
    [a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]]
}

pub fn trace(a: &Mat3, m: u64) -> u64 {
    (a[0] + a[4] + a[8]) % m
}

pub fn det(a: &Mat3, m: u64) -> u64 {
    let mm = m as i128;
    let g = |k: usize| a[k] as i128;
    let d = g(0) * ((g(4) * g(8) - g(5) * g(7)) % mm) - g(1) * ((g(3) * g(8) - g(5) * g(6)) % mm)
        + g(2) * ((g(3) * g(7) - g(4) * g(6)) % mm);
    d.rem_euclid(mm) as u64
}

fn adjugate(a: &Mat3, m: u64) -> Mat3 {
    let mm = m as i128;
    let g = |k: usize| a[k] as i128;
    let c = |x: i128| x.rem_euclid(mm) as u64;
    [
        c(g(4) * g(8) - g(5) * g(7)),
        c(g(2) * g(7) - g(1) * g(8)),
        c(g(1) * g(5) - g(2) * g(4)),
        c(g(5) * g(6) - g(3) * g(8)),
        c(g(0) * g(8) - g(2) * g(6)),
        c(g(2) * g(3) - g(0) * g(5)),
        c(g(3) * g(7) - g(4) * g(6)),
        c(g(1) * g(6) - g(0) * g(7)),
        c(g(0) * g(4) - g(1) * g(3)),
    ]
}

/// Inverse modulo `m`, if the determinant is a unit.
pub fn inverse(a: &Mat3, m: u64) -> Option<Mat3> {
    let d = inv_mod(det(a, m), m)?;
    Some(scale(&adjugate(a, m), d, m))
}

pub fn conj(x: &Mat3, a: &Mat3, x_inv: &Mat3, m: u64) -> Mat3 {
    mul(&mul(x, a, m), x_inv, m)
}

pub fn is_scalar(a: &Mat3, m: u64) -> bool {
    let r = reduce(a, m);
    r[1] == 0 && r[2] == 0 && r[3] == 0 && r[5] == 0 && r[6] == 0 && r[7] == 0 && r[0] == r[4] && r[4] == r[8]
}

/// Characteristic polynomial `x^3 - c2 x^2 + c1 x - c0` as `(c2, c1, c0)`.
pub fn char_poly(a: &Mat3, p: u64) -> (u64, u64, u64) {
    let a = reduce(a, p);
    let g = |k: usize| a[k] as i128;
    let minors = g(0) * g(4) - g(1) * g(3) + g(0) * g(8) - g(2) * g(6) + g(4) * g(8) - g(5) * g(7);
    (trace(&a, p), minors.rem_euclid(p as i128) as u64, det(&a, p))
}

/// Encodes a matrix with entries below `m` as a base-`m` integer.
pub fn encode(a: &Mat3, m: u64) -> u64 {
    a.iter().rev().fold(0u64, |acc, &x| acc * m + x)
}

pub fn decode(mut code: u64, m: u64) -> Mat3 {
    let mut a = ZERO;
    for x in a.iter_mut() {
        *x = code % m;
        code /= m;
    }
    a
}

/// The linear map `X -> XA - AX` on row-major coordinates.
pub fn ad_matrix(a: &Mat3, m: u64) -> Vec<Vec<u64>> {
    let mut rows = vec![vec![0u64; 9]; 9];
    for k in 0..9 {
        let e = unit_matrix(k / 3, k % 3);
        let img = sub(&mul(&e, a, m), &mul(a, &e, m), m);
        for (r, row) in rows.iter_mut().enumerate() {
            row[k] = img[r];
        }
    }
    rows
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Row reduction over `F_p` in place; returns pivot columns.
pub fn rref(rows: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else { continue };
        rows.swap(r, piv);
        let inv = inv_mod(rows[r][c] % p, p).expect("nonzero pivot is invertible");
        for x in rows[r].iter_mut() {
            *x = (*x % p) * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] % p != 0 {
                let f = rows[i][c] % p;
                for j in 0..ncols {
                    rows[i][j] = (rows[i][j] % p + p * p - f * rows[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, p).len()
}

/// Basis of `{x : M x = 0}` for `M` given by rows.
pub fn nullspace(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[i][f] % p) % p;
            }
            v
        })
        .collect()
}

/// Reduced echelon basis of the span of `vectors`.
pub fn span_basis(vectors: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut m = vectors.to_vec();
    let k = rref(&mut m, p).len();
    m.truncate(k);
    m
}

/// Whether `v` lies in the span of the reduced echelon basis `basis`.
pub fn in_span(basis: &[Vec<u64>], v: &[u64], p: u64) -> bool {
    let mut m = basis.to_vec();
    m.push(v.to_vec());
    rank(&m, p) == basis.len()
}

pub fn mat_to_vec(a: &Mat3) -> Vec<u64> {
    a.to_vec()
}

pub fn vec_to_mat(v: &[u64]) -> Mat3 {
    std::array::from_fn(|k| v[k])
}

pub fn apply(a: &Mat3, v: &[u64; 3], p: u64) -> [u64; 3] {
    std::array::from_fn(|i| (a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2]) % p)
}

/// Multiplicative order of an invertible matrix modulo `p`.
pub fn order(a: &Mat3, p: u64) -> u64 {
    let mut x = *a;
    let mut k = 1;
    while x != ONE {
        x = mul(&x, a, p);
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let a = [2, 1, 0, 0, 3, 1, 1, 0, 1];
        let m = 25;
        let inv = inverse(&a, m).unwrap();
        assert_eq!(mul(&a, &inv, m), ONE);
        assert_eq!(det(&a, m), 7);
        assert!(inverse(&[5, 0, 0, 0, 1, 0, 0, 0, 1], m).is_none());
    }

    #[test]
    fn char_poly_of_companion() {
        // companion of x^3 - 2x^2 + 3x - 4
        let c = [0, 0, 4, 1, 0, 4, 0, 1, 2];
        assert_eq!(char_poly(&c, 7), (2, 3, 4));
    }

    #[test]
    fn nullspace_of_ad_scalar_is_everything() {
        let ad = ad_matrix(&scalar(3), 5);
        assert_eq!(nullspace(&ad, 9, 5).len(), 9);
        let ad = ad_matrix(&[1, 0, 0, 0, 2, 0, 0, 0, 3], 5);
        assert_eq!(nullspace(&ad, 9, 5).len(), 3);
    }

    #[test]
    fn encode_roundtrip() {
        let a = [4, 0, 3, 2, 2, 1, 0, 0, 4];
        assert_eq!(decode(encode(&a, 5), 5), a);
    }
}
