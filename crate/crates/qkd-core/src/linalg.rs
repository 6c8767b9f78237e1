//! Dense complex matrices of tiny dimension and a Hermitian eigensolver.
//!
//! Everything here lives on 2x2 to 16x16 matrices, so the solver is a
//! plain cyclic Jacobi iteration on the real symmetric embedding
//! `[[A, -B], [B, A]]` of `M = A + iB`. Each eigenvalue of `M` shows up
//! twice in the embedding; the doubled spectrum is folded back by pairing
//! real vectors `(x, y)` into complex ones `x + iy`.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> CMatrix {
        CMatrix { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rank-one projector weight `v v^dagger` (no normalization).
    pub fn outer(v: &[Complex64]) -> CMatrix {
        CMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> CMatrix {
        CMatrix { n: self.n, a: self.a.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        CMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in i..self.n {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

/// Cyclic Jacobi on a real symmetric matrix held as a flat row-major
/// buffer. Returns eigenvalues (unsorted) and the rotation accumulator
/// with eigenvectors in columns.
fn jacobi_real_symmetric(mut s: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm0: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-13 * norm0.max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * s[i * n + j] * s[i * n + j];
            }
        }
        if off.sqrt() < target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = s[k * n + p];
                    let akq = s[k * n + q];
                    s[k * n + p] = c * akp - sn * akq;
                    s[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = s[p * n + k];
                    let aqk = s[q * n + k];
                    s[p * n + k] = c * apk - sn * aqk;
                    s[q * n + k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let eigs = (0..n).map(|i| s[i * n + i]).collect();
    (eigs, v)
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, the
/// matching orthonormal eigenvectors as columns of the returned matrix.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.n;
    let scale = m.max_abs().max(1.0);
    if !m.is_hermitian(1e-12 * scale) {
        return Err(Error::Domain(
            "eigendecomposition requested for a non-Hermitian matrix".into(),
        ));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0)));
    }

    // real symmetric embedding, Hermiticity enforced exactly by averaging
    let nn = 2 * n;
    let mut s = vec![0.0f64; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (m.get(i, j) + m.get(j, i).conj());
            s[i * nn + j] = h.re;
            s[(i + n) * nn + (j + n)] = h.re;
            s[i * nn + (j + n)] = -h.im;
            s[(i + n) * nn + j] = h.im;
        }
    }
    let (eigs, vecs) = jacobi_real_symmetric(s, nn);

    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| eigs[a].total_cmp(&eigs[b]));

    // fold the doubled spectrum: group nearly equal eigenvalues, then pick
    // a complex orthonormal basis of half the real dimension per group
    let emax = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut out_vals: Vec<f64> = Vec::with_capacity(n);
    let mut out_vecs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut gap = 1e-9 * emax;
    loop {
        out_vals.clear();
        out_vecs.clear();
        let mut ok = true;
        let mut i = 0;
        while i < nn {
            let mut j = i + 1;
            while j < nn && eigs[order[j]] - eigs[order[j - 1]] <= gap {
                j += 1;
            }
            let size = j - i;
            if size % 2 != 0 {
                ok = false;
                break;
            }
            let want = size / 2;
            let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(want);
            for pass_tol in [0.3, 1e-3] {
                for &col in &order[i..j] {
                    if basis.len() == want {
                        break;
                    }
                    let mut z: Vec<Complex64> = (0..n)
                        .map(|r| Complex64::new(vecs[r * nn + col], vecs[(r + n) * nn + col]))
                        .collect();
                    for b in &basis {
                        let proj: Complex64 =
                            b.iter().zip(&z).map(|(bb, zz)| bb.conj() * zz).sum();
                        for (zz, bb) in z.iter_mut().zip(b) {
                            *zz -= proj * bb;
                        }
                    }
                    let norm: f64 =
                        z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    if norm > pass_tol {
                        for c in z.iter_mut() {
                            *c /= norm;
                        }
                        basis.push(z);
                    }
                }
                if basis.len() == want {
                    break;
                }
            }
            if basis.len() != want {
                ok = false;
                break;
            }
            let lambda =
                order[i..j].iter().map(|&c| eigs[c]).sum::<f64>() / size as f64;
            for b in basis {
                out_vals.push(lambda);
                out_vecs.push(b);
            }
            i = j;
        }
        if ok && out_vals.len() == n {
            break;
        }
        gap *= 10.0;
        if gap > 1e-3 * emax {
            return Err(Error::Degenerate(
                "eigenvalue pairing of the symmetric embedding failed".into(),
            ));
        }
    }

    let mut v = CMatrix::zeros(n);
    for (col, vec) in out_vecs.iter().enumerate() {
        for (row, &c) in vec.iter().enumerate() {
            v.set(row, col, c);
        }
    }
    Ok((out_vals, v))
}
