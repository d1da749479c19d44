//! Coadjoint action of a residue group on `(L/pL)^*` and its orbit decomposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_lie::{inv_mod, LieKind, LieLattice};

/// Element `a + b*delta` of `F_p[delta]`, `delta^2 = eps`.
type Fq2 = (u64, u64);
type M3 = [[Fq2; 3]; 3];

#[derive(Clone, Copy, Debug)]
struct Field2 {
    p: u64,
    eps: u64,
}

impl Field2 {
    fn add(&self, x: Fq2, y: Fq2) -> Fq2 {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }
    fn neg(&self, x: Fq2) -> Fq2 {
        ((self.p - x.0) % self.p, (self.p - x.1) % self.p)
    }
    fn mul(&self, x: Fq2, y: Fq2) -> Fq2 {
        let p = self.p;
        ((x.0 * y.0 + self.eps * (x.1 * y.1 % p)) % p, (x.0 * y.1 + x.1 * y.0) % p)
    }
    fn inv(&self, x: Fq2) -> Option<Fq2> {
        let p = self.p;
        let norm = (x.0 * x.0 % p + p - self.eps * (x.1 * x.1 % p) % p) % p;
        let n = inv_mod(norm, p)?;
        Some((x.0 * n % p, (p - x.1) % p * n % p))
    }
    fn from_int(&self, v: i64) -> Fq2 {
        (v.rem_euclid(self.p as i64) as u64, 0)
    }

    fn mat_mul(&self, a: &M3, b: &M3) -> M3 {
        let mut c = [[(0, 0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] = self.add(c[i][j], self.mul(a[i][k], b[k][j]));
                }
            }
        }
        c
    }

    fn identity(&self) -> M3 {
        let mut m = [[(0, 0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = (1, 0);
        }
        m
    }

    fn det(&self, a: &M3) -> Fq2 {
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
            self.add(self.mul(a[r1][c1], a[r2][c2]), self.neg(self.mul(a[r1][c2], a[r2][c1])))
        };
        let t0 = self.mul(a[0][0], minor(1, 2, 1, 2));
        let t1 = self.mul(a[0][1], minor(1, 2, 0, 2));
        let t2 = self.mul(a[0][2], minor(1, 2, 0, 1));
        self.add(self.add(t0, self.neg(t1)), t2)
    }

    fn inverse(&self, a: &M3) -> Option<M3> {
        let dinv = self.inv(self.det(a))?;
        let mut out = [[(0, 0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // cofactor of (j, i)
                let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                let m = self.add(
                    self.mul(a[rows[0]][cols[0]], a[rows[1]][cols[1]]),
                    self.neg(self.mul(a[rows[0]][cols[1]], a[rows[1]][cols[0]])),
                );
                let m = if (i + j) % 2 == 1 { self.neg(m) } else { m };
                out[i][j] = self.mul(m, dinv);
            }
        }
        Some(out)
    }
}

/// Linear maps `w -> T w` on `F_p^d` induced by a generating set of a residue group.
#[derive(Clone, Debug)]
pub struct ResidueAction {
    p: u64,
    d: usize,
    gens: Vec<Vec<u64>>,
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut n = p - 1;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            factors.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    (2..p).find(|&g| factors.iter().all(|&q| pow(g, (p - 1) / q) != 1)).unwrap_or(1)
}

impl ResidueAction {
    /// Generators: elementary matrices and a diagonal for `sl3`/`gl3`;
    /// Cayley transforms and norm-one diagonals for `su3`.
    pub fn for_lattice(lattice: &LieLattice, p: u64, seed: u64) -> Result<Self> {
        let kind = lattice
            .kind()
            .ok_or_else(|| Error::Unsupported("residue action needs a standard lattice".into()))?;
        let (basis, eps) = lattice.realization().expect("standard lattices are realized");
        let field = Field2 { p, eps: eps.rem_euclid(p as i64) as u64 };
        let d = lattice.dim();
        let basis_mod: Vec<M3> = basis
            .iter()
            .map(|b| {
                let mut m = [[(0, 0); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = (
                            b[i][j].0.rem_euclid(p as i64) as u64,
                            b[i][j].1.rem_euclid(p as i64) as u64,
                        );
                    }
                }
                m
            })
            .collect();
        let coords = CoordinateSolver::new(&basis_mod, p)?;

        let mut group: Vec<M3> = Vec::new();
        match kind {
            LieKind::Sl3 | LieKind::Gl3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            let mut x = field.identity();
                            x[i][j] = (1, 0);
                            group.push(x);
                        }
                    }
                }
                let mut g = field.identity();
                g[0][0] = field.from_int(primitive_root(p) as i64);
                group.push(g);
            }
            LieKind::Su3 => {
                let u = norm_one_generator(&field);
                for i in 0..2 {
                    let mut g = field.identity();
                    g[i][i] = u;
                    group.push(g);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let one = field.identity();
                while group.len() < 10 {
                    let mut x = [[(0, 0); 3]; 3];
                    for b in &basis_mod {
                        let c = rng.gen_range(0..p);
                        for i in 0..3 {
                            for j in 0..3 {
                                x[i][j] = field.add(x[i][j], field.mul((c, 0), b[i][j]));
                            }
                        }
                    }
                    let mut plus = one;
                    let mut minus = one;
                    for i in 0..3 {
                        for j in 0..3 {
                            plus[i][j] = field.add(one[i][j], x[i][j]);
                            minus[i][j] = field.add(one[i][j], field.neg(x[i][j]));
                        }
                    }
                    if field.inverse(&plus).is_none() {
                        continue;
                    }
                    if let Some(mi) = field.inverse(&minus) {
                        group.push(field.mat_mul(&mi, &plus));
                    }
                }
            }
        }

        let mut gens = Vec::with_capacity(group.len());
        for g in &group {
            let ginv = field.inverse(g).ok_or_else(|| Error::Inconsistent("singular generator".into()))?;
            // w'(b_j) = w(g^{-1} b_j g), so T[j][k] = coordinate k of g^{-1} b_j g
            let mut t = vec![0u64; d * d];
            for (j, b) in basis_mod.iter().enumerate() {
                let y = field.mat_mul(&field.mat_mul(&ginv, b), g);
                let c = coords.solve(&y).ok_or_else(|| {
                    Error::Inconsistent(format!("generator does not preserve the {} lattice", lattice.name()))
                })?;
                t[j * d..(j + 1) * d].copy_from_slice(&c);
            }
            gens.push(t);
        }
        Ok(Self { p, d, gens })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    pub fn apply(&self, g: usize, w: &[u64]) -> Vec<u64> {
        let t = &self.gens[g];
        (0..self.d)
            .map(|j| t[j * self.d..(j + 1) * self.d].iter().zip(w).map(|(a, b)| a * b % self.p).sum::<u64>() % self.p)
            .collect()
    }
}

fn norm_one_generator(field: &Field2) -> Fq2 {
    let p = field.p;
    let order = |x: Fq2| {
        let mut y = x;
        let mut k = 1;
        while y != (1, 0) {
            y = field.mul(y, x);
            k += 1;
        }
        k
    };
    for a in 0..p {
        for b in 0..p {
            let x = (a, b);
            let norm = (a * a % p + p - field.eps * (b * b % p) % p) % p;
            if norm == 1 && order(x) == p + 1 {
                return x;
            }
        }
    }
    (1, 0)
}

/// Coordinates in a fixed basis of `3x3` matrices over `F_p[delta]`.
struct CoordinateSolver {
    p: u64,
    basis: Vec<Vec<u64>>,
    rows: Vec<usize>,
    inverse: Vec<u64>,
}

fn flat(m: &M3) -> Vec<u64> {
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

impl CoordinateSolver {
    fn new(basis: &[M3], p: u64) -> Result<Self> {
        let cols: Vec<Vec<u64>> = basis.iter().map(flat).collect();
        let d = cols.len();
        // greedily pick rows that keep the selected d x k block of full rank
        let mut rows = Vec::with_capacity(d);
        for r in 0..18 {
            let mut cand = rows.clone();
            cand.push(r);
            if rank_mod_p(&cand.iter().map(|&i| cols.iter().map(|c| c[i]).collect()).collect::<Vec<Vec<u64>>>(), p)
                == cand.len()
            {
                rows = cand;
            }
            if rows.len() == d {
                break;
            }
        }
        if rows.len() < d {
            return Err(Error::Inconsistent("basis is degenerate modulo p".into()));
        }
        let square: Vec<Vec<u64>> = rows.iter().map(|&i| cols.iter().map(|c| c[i]).collect()).collect();
        let inverse = invert_mod_p(&square, p).expect("selected block is invertible");
        Ok(Self { p, basis: cols, rows, inverse })
    }

    fn solve(&self, m: &M3) -> Option<Vec<u64>> {
        let y = flat(m);
        let d = self.rows.len();
        let p = self.p;
        let c: Vec<u64> = (0..d)
            .map(|i| (0..d).map(|j| self.inverse[i * d + j] * y[self.rows[j]] % p).sum::<u64>() % p)
            .collect();
        for (r, yr) in y.iter().enumerate() {
            let v = self.basis.iter().zip(&c).map(|(b, ci)| b[r] * ci % p).sum::<u64>() % p;
            if v != *yr {
                return None;
            }
        }
        Some(c)
    }
}

fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = inv_mod(a[rank][c], p).unwrap();
        for r in 0..a.len() {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % p;
                for k in 0..ncols {
                    a[r][k] = (a[r][k] + p - f * a[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn invert_mod_p(m: &[Vec<u64>], p: u64) -> Option<Vec<u64>> {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| u64::from(i == j)));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| a[r][c] != 0)?;
        a.swap(c, piv);
        let inv = inv_mod(a[c][c], p)?;
        for x in a[c].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..n {
            if r != c && a[r][c] != 0 {
                let f = a[r][c];
                for k in 0..2 * n {
                    a[r][k] = (a[r][k] + p - f * a[c][k] % p) % p;
                }
            }
        }
    }
    Some(a.iter().flat_map(|r| r[n..].to_vec()).collect())
}

/// Residue dual space split into orbits: `(representative, orbit size)`.
#[derive(Clone, Debug, Serialize)]
pub struct ShellDecomposition {
    pub p: u64,
    pub dim: usize,
    pub residue_orbit_reps: Vec<(Vec<u64>, u64)>,
}

impl ShellDecomposition {
    pub fn total_mass(&self) -> u64 {
        self.residue_orbit_reps.iter().map(|(_, s)| s).sum()
    }
}

/// Largest residue space enumerated by the orbit search.
pub const SHELL_RESIDUE_LIMIT: u64 = 1 << 28;

fn decode(mut idx: u64, p: u64, d: usize) -> Vec<u64> {
    (0..d)
        .map(|_| {
            let x = idx % p;
            idx /= p;
            x
        })
        .collect()
}

fn encode(w: &[u64], p: u64) -> u64 {
    w.iter().rev().fold(0, |acc, x| acc * p + x)
}

/// Orbit decomposition of `F_p^d` under the residue coadjoint action (BFS).
pub fn shell_decompose(lattice: &LieLattice, p: u64) -> Result<ShellDecomposition> {
    let action = ResidueAction::for_lattice(lattice, p, 0x5eed)?;
    orbit_decomposition(&action)
}

pub fn orbit_decomposition(action: &ResidueAction) -> Result<ShellDecomposition> {
    let (p, d) = (action.p, action.d);
    let total = (p as f64).powi(d as i32);
    if total > SHELL_RESIDUE_LIMIT as f64 {
        return Err(Error::Infeasible {
            states: total,
            limit: SHELL_RESIDUE_LIMIT as f64,
            strategy: "shell".into(),
        });
    }
    let total = total as u64;
    let mut seen = vec![false; total as usize];
    let mut reps = Vec::new();
    let mut queue = Vec::new();
    for start in 0..total {
        if seen[start as usize] {
            continue;
        }
        seen[start as usize] = true;
        queue.clear();
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            let w = decode(queue[head], p, d);
            head += 1;
            for g in 0..action.gens.len() {
                let idx = encode(&action.apply(g, &w), p);
                if !seen[idx as usize] {
                    seen[idx as usize] = true;
                    queue.push(idx);
                }
            }
        }
        reps.push((decode(start, p, d), queue.len() as u64));
    }
    Ok(ShellDecomposition { p, dim: d, residue_orbit_reps: reps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_lie::{smallest_nonresidue, LocalRing, Zpl};

    #[test]
    fn generators_preserve_divisor_types() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [LieKind::Sl3, LieKind::Su3, LieKind::Gl3] {
            let l = LieLattice::make(kind, 7, 1).unwrap();
            let action = ResidueAction::for_lattice(&l, 7, 3).unwrap();
            let r = Zpl::new(7, 1).unwrap();
            for _ in 0..200 {
                let w: Vec<u64> = (0..l.dim()).map(|_| rng.gen_range(0..7)).collect();
                let g = rng.gen_range(0..action.generator_count());
                let w2 = action.apply(g, &w);
                let e1 = r.divisor_exponents(l.commutator_matrix(&r, &w).data(), l.dim());
                let e2 = r.divisor_exponents(l.commutator_matrix(&r, &w2).data(), l.dim());
                assert_eq!(e1, e2, "{kind}");
            }
        }
    }

    #[test]
    fn sl3_shell_partition() {
        let l = LieLattice::make(LieKind::Sl3, 5, 1).unwrap();
        let s = shell_decompose(&l, 5).unwrap();
        assert_eq!(s.total_mass(), 390_625);
        assert_eq!(s.residue_orbit_reps[0], (vec![0; 8], 1));
        assert!(s.residue_orbit_reps.len() < 100, "{} reps", s.residue_orbit_reps.len());
    }

    #[test]
    fn su3_shell_partition() {
        let l = LieLattice::make(LieKind::Su3, 5, 1).unwrap();
        let s = shell_decompose(&l, 5).unwrap();
        assert_eq!(s.total_mass(), 390_625);
        assert!(s.residue_orbit_reps.len() < 100, "{} reps", s.residue_orbit_reps.len());
    }

    #[test]
    fn small_helpers() {
        assert_eq!(primitive_root(7), 3);
        assert_eq!(smallest_nonresidue(5), 2);
        let m = vec![vec![2, 1], vec![1, 1]];
        let inv = invert_mod_p(&m, 5).unwrap();
        assert_eq!(inv, vec![1, 4, 4, 2]);
        assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 4]], 5), 1);
    }
}
