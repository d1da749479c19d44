//! Integral Lie lattices with explicit structure constants.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::ring::LocalRing;
use super::snf::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LieKind {
    Sl3,
    Gl3,
    Su3,
}

impl fmt::Display for LieKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LieKind::Sl3 => "sl3",
            LieKind::Gl3 => "gl3",
            LieKind::Su3 => "su3",
        })
    }
}

impl FromStr for LieKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl3" => Ok(LieKind::Sl3),
            "gl3" => Ok(LieKind::Gl3),
            "su3" => Ok(LieKind::Su3),
            _ => Err(Error::InvalidParameter(format!("unknown Lie lattice {s}"))),
        }
    }
}

/// `a + b*delta` with `delta^2 = eps`.
pub type QuadInt = (i64, i64);

/// 3x3 matrix over `Z[delta]`, row-major.
pub type QuadMat = [[QuadInt; 3]; 3];

fn quad_mul(x: QuadInt, y: QuadInt, eps: i64) -> QuadInt {
    (x.0 * y.0 + eps * x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

fn quad_mat_mul(a: &QuadMat, b: &QuadMat, eps: i64) -> QuadMat {
    let mut c = [[(0, 0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let t = quad_mul(a[i][k], b[k][j], eps);
                c[i][j].0 += t.0;
                c[i][j].1 += t.1;
            }
        }
    }
    c
}

fn quad_commutator(a: &QuadMat, b: &QuadMat, eps: i64) -> QuadMat {
    let (ab, ba) = (quad_mat_mul(a, b, eps), quad_mat_mul(b, a, eps));
    let mut c = [[(0, 0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (ab[i][j].0 - ba[i][j].0, ab[i][j].1 - ba[i][j].1);
        }
    }
    c
}

fn flatten(m: &QuadMat) -> Vec<i64> {
    let mut v = Vec::with_capacity(18);
    for part in 0..2 {
        for row in m {
            for x in row {
                v.push(if part == 0 { x.0 } else { x.1 });
            }
        }
    }
    v
}

/// Solves `B x = v` exactly for a full-column-rank integer `B` (given by columns).
fn solve_in_span(columns: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let (rows, d) = (v.len(), columns.len());
    let mut aug: Vec<Vec<Ratio<i64>>> = (0..rows)
        .map(|i| {
            let mut r: Vec<Ratio<i64>> = columns.iter().map(|c| Ratio::from_integer(c[i])).collect();
            r.push(Ratio::from_integer(v[i]));
            r
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..d {
        let Some(r) = (pivot_row..rows).find(|&r| !aug[r][col].is_zero()) else {
            return None;
        };
        aug.swap(pivot_row, r);
        let inv = aug[pivot_row][col].recip();
        for x in aug[pivot_row].iter_mut() {
            *x *= inv;
        }
        for r in 0..rows {
            if r != pivot_row && !aug[r][col].is_zero() {
                let f = aug[r][col];
                for c in 0..=d {
                    let t = aug[pivot_row][c] * f;
                    aug[r][c] -= t;
                }
            }
        }
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|r| !r[d].is_zero()) {
        return None;
    }
    let x: Vec<Ratio<i64>> = (0..d).map(|c| aug[c][d]).collect();
    x.iter()
        .all(|r| r.denom().is_one())
        .then(|| x.iter().map(|r| r.to_integer()).collect())
}

/// Smallest quadratic nonresidue modulo an odd prime.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&a| {
            let mut acc = 1u64;
            let mut b = a;
            let mut e = (p - 1) / 2;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % p;
                }
                b = b * b % p;
                e >>= 1;
            }
            acc == p - 1
        })
        .expect("odd primes have nonresidues")
}

/// A free `Z`-module with bracket `[e_i, e_j] = sum_k c_ijk e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieLattice {
    name: String,
    kind: Option<LieKind>,
    dim: usize,
    structure: Vec<i64>,
    realization: Option<(Vec<QuadMat>, i64)>,
}

fn e(i: usize, j: usize) -> QuadMat {
    let mut m = [[(0, 0); 3]; 3];
    m[i][j] = (1, 0);
    m
}

fn comb(terms: &[(i64, i64, QuadMat)]) -> QuadMat {
    // sum of (a + b delta) * M
    let mut out = [[(0, 0); 3]; 3];
    for (a, b, m) in terms {
        for i in 0..3 {
            for j in 0..3 {
                let x = m[i][j];
                out[i][j].0 += a * x.0;
                out[i][j].1 += b * x.0 + a * x.1;
            }
        }
    }
    out
}

fn standard_basis(kind: LieKind) -> Vec<QuadMat> {
    let off = [(0, 1), (1, 2), (0, 2), (1, 0), (2, 1), (2, 0)];
    match kind {
        LieKind::Sl3 => {
            let mut b = vec![comb(&[(1, 0, e(0, 0)), (-1, 0, e(1, 1))]), comb(&[(1, 0, e(1, 1)), (-1, 0, e(2, 2))])];
            b.extend(off.iter().map(|&(i, j)| e(i, j)));
            b
        }
        LieKind::Gl3 => {
            let mut b = vec![e(0, 0), e(1, 1), e(2, 2)];
            b.extend(off.iter().map(|&(i, j)| e(i, j)));
            b
        }
        LieKind::Su3 => {
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let mut b = vec![comb(&[(0, 1, e(0, 0)), (0, -1, e(1, 1))]), comb(&[(0, 1, e(1, 1)), (0, -1, e(2, 2))])];
            b.extend(pairs.iter().map(|&(i, j)| comb(&[(1, 0, e(i, j)), (-1, 0, e(j, i))])));
            b.extend(pairs.iter().map(|&(i, j)| comb(&[(0, 1, e(i, j)), (0, 1, e(j, i))])));
            b
        }
    }
}

impl LieLattice {
    /// The standard lattice of the given kind; `su3` needs the prime to fix `delta^2`.
    pub fn make(kind: LieKind, p: u64, f: u32) -> Result<Self> {
        if p == 2 || !crate::a2_formulas::is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not an odd prime")));
        }
        let eps = match kind {
            LieKind::Su3 if f % 2 == 0 => {
                return Err(Error::Unsupported(
                    "su3 over an even-degree residue field (the quadratic extension splits)".into(),
                ))
            }
            LieKind::Su3 => smallest_nonresidue(p) as i64,
            _ => 1,
        };
        Self::from_matrices(&kind.to_string(), Some(kind), standard_basis(kind), eps)
    }

    /// Lattice spanned by explicit `3x3` matrices over `Z[delta]`.
    pub fn from_matrices(name: &str, kind: Option<LieKind>, basis: Vec<QuadMat>, eps: i64) -> Result<Self> {
        let d = basis.len();
        let columns: Vec<Vec<i64>> = basis.iter().map(flatten).collect();
        let mut structure = vec![0i64; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = flatten(&quad_commutator(&basis[i], &basis[j], eps));
                let coords = solve_in_span(&columns, &br).ok_or_else(|| {
                    Error::InvalidParameter(format!("bracket of basis elements {i}, {j} leaves the lattice"))
                })?;
                structure[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&coords);
            }
        }
        Ok(Self { name: name.into(), kind, dim: d, structure, realization: Some((basis, eps)) })
    }

    /// Lattice given by raw structure constants, `c[(i*d + j)*d + k]`.
    pub fn custom(name: &str, dim: usize, structure: Vec<i64>) -> Result<Self> {
        if structure.len() != dim * dim * dim {
            return Err(Error::InvalidParameter("structure constant table has wrong size".into()));
        }
        let l = Self { name: name.into(), kind: None, dim, structure, realization: None };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if l.c(i, j, k) != -l.c(j, i, k) {
                        return Err(Error::InvalidParameter("bracket is not antisymmetric".into()));
                    }
                }
            }
        }
        if !l.jacobi_holds() {
            return Err(Error::InvalidParameter("Jacobi identity fails".into()));
        }
        Ok(l)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Option<LieKind> {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> i64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn realization(&self) -> Option<(&[QuadMat], i64)> {
        self.realization.as_ref().map(|(b, e)| (b.as_slice(), *e))
    }

    pub fn jacobi_holds(&self) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for n in 0..d {
                        let s: i64 = (0..d)
                            .map(|m| {
                                self.c(i, j, m) * self.c(m, k, n)
                                    + self.c(j, k, m) * self.c(m, i, n)
                                    + self.c(k, i, m) * self.c(m, j, n)
                            })
                            .sum();
                        if s != 0 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `R(w)_{ij} = w([e_i, e_j]) = sum_k c_ijk w_k` for a functional with coordinates `w_k = w(e_k)`.
    pub fn commutator_matrix<R: LocalRing>(&self, ring: &R, w: &[R::Elem]) -> Matrix<R::Elem> {
        let d = self.dim;
        assert_eq!(w.len(), d, "functional has wrong length");
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = ring.zero();
                for (k, wk) in w.iter().enumerate() {
                    let c = self.c(i, j, k);
                    if c != 0 {
                        acc = ring.add(&acc, &ring.mul(&ring.from_int(c), wk));
                    }
                }
                data.push(acc);
            }
        }
        Matrix::from_vec(d, d, data)
    }

    /// Integer Gram matrix of the trace form `Tr(e_i e_j)` of the realization.
    pub fn trace_gram(&self) -> Result<Vec<i64>> {
        let (basis, eps) = self
            .realization()
            .ok_or_else(|| Error::Unsupported(format!("lattice {} has no matrix realization", self.name)))?;
        let d = self.dim;
        let mut g = Vec::with_capacity(d * d);
        for a in basis {
            for b in basis {
                let prod = quad_mat_mul(a, b, eps);
                let tr = (0..3).fold((0, 0), |acc, i| (acc.0 + prod[i][i].0, acc.1 + prod[i][i].1));
                if tr.1 != 0 {
                    return Err(Error::Inconsistent("trace form is not rational on the basis".into()));
                }
                g.push(tr.0);
            }
        }
        Ok(g)
    }

    pub fn trace_form_gram<R: LocalRing>(&self, ring: &R) -> Result<Matrix<R::Elem>> {
        let d = self.dim;
        Ok(Matrix::from_vec(d, d, self.trace_gram()?.iter().map(|&x| ring.from_int(x)).collect()))
    }

    /// Unimodularity of the trace form over `ring`.
    pub fn trace_form_nondegenerate<R: LocalRing>(&self, ring: &R) -> Result<bool> {
        let g = self.trace_form_gram(ring)?;
        Ok(ring.divisor_exponents(g.data(), self.dim).iter().all(|&e| e == 0))
    }

    /// Coordinates of the functional `y -> Tr(x y)` for `x = sum x_i e_i`.
    pub fn dual_of_element<R: LocalRing>(&self, ring: &R, x: &[i64]) -> Result<Vec<R::Elem>> {
        let g = self.trace_gram()?;
        let d = self.dim;
        Ok((0..d)
            .map(|k| ring.from_int((0..d).map(|i| x[i] * g[i * d + k]).sum()))
            .collect())
    }

    /// Coordinates of an element given as a matrix over `Z[delta]`.
    pub fn coordinates(&self, m: &QuadMat) -> Result<Vec<i64>> {
        let (basis, _) = self
            .realization()
            .ok_or_else(|| Error::Unsupported("no matrix realization".into()))?;
        let cols: Vec<Vec<i64>> = basis.iter().map(flatten).collect();
        solve_in_span(&cols, &flatten(m)).ok_or_else(|| Error::InvalidParameter("matrix is not in the lattice".into()))
    }

    /// Structure constants as nested arrays `c[i][j][k]`.
    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim;
        let c: Vec<Vec<Vec<i64>>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| self.c(i, j, k)).collect()).collect())
            .collect();
        serde_json::json!({ "name": self.name, "dim": d, "structure_constants": c })
    }

    /// Dimension over the residue field of the center of `L / pL`.
    pub fn residue_center_dim(&self, p: u64) -> Result<usize> {
        let f = super::ring::Zpl::new(p, 1)?;
        let d = self.dim;
        // x in center iff sum_i x_i c_ijk = 0 for all j, k: kernel of a d x d^2 map
        let mut data = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for jk in 0..d * d {
                data.push(f.from_int(self.structure[i * d * d + jk]));
            }
        }
        let rank = super::snf::generic_exponents(&f, &data, d, d * d).iter().filter(|&&e| e == 0).count();
        Ok(d - rank)
    }
}

/// `E = sum_i max(N - m - a_i, 0)` for divisor exponents computed at level `N`.
///
/// The orbit has size `q^E` and the attached representation dimension `q^{E/2}`.
pub fn orbit_size_exponent(exponents: &[u32], n: u32, m: u32) -> Result<u32> {
    let eff = n.saturating_sub(m);
    let e: u32 = exponents.iter().map(|&a| eff.saturating_sub(a)).sum();
    if e % 2 == 1 {
        return Err(Error::OddOrbitExponent(e as u64));
    }
    Ok(e)
}

/// Orbit-size exponent of the functional `w` on `p^m L / p^N L`.
///
/// `w` lives over a ring of level at least `N - m`; only its class mod `p^{N-m}` matters.
pub fn functional_orbit_exponent<R: LocalRing>(
    lattice: &LieLattice,
    ring: &R,
    w: &[R::Elem],
    m: u32,
    n: u32,
) -> Result<u32> {
    if m > n {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds N = {n}")));
    }
    let eff = n - m;
    if eff == 0 {
        return Ok(0);
    }
    if ring.level() < eff {
        return Err(Error::InvalidParameter(format!(
            "functional known to level {} only, need {eff}",
            ring.level()
        )));
    }
    let target = ring.at_level(eff);
    let reduced: Vec<R::Elem> = w.iter().map(|x| ring.reduce_into(x, &target)).collect();
    let r = lattice.commutator_matrix(&target, &reduced);
    orbit_size_exponent(&target.divisor_exponents(r.data(), lattice.dim()), eff, 0)
}
