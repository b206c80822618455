//! Sparse and banded linear algebra for the Dirichlet solver:
//! CSR matrices, Jacobi-preconditioned BiCGStab, and a banded LU with
//! partial pivoting for the n = 1 grids.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed sparse row matrix, rows assembled in order.
#[derive(Clone, Debug)]
pub struct Csr<R: Real> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<R>,
}

impl<R: Real> Csr<R> {
    pub fn builder(n: usize) -> CsrBuilder<R> {
        CsrBuilder {
            n,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[R], y: &mut [R]) {
        for i in 0..self.n {
            let mut acc = R::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<R> {
        let mut d = vec![R::zero(); self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[usize], &[R])> {
        (0..self.n).map(move |i| {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            (i, &self.cols[r.clone()], &self.vals[r])
        })
    }
}

pub struct CsrBuilder<R: Real> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<R>,
}

impl<R: Real> CsrBuilder<R> {
    /// Append the next row; entries need not be sorted.
    pub fn push_row(&mut self, mut entries: Vec<(usize, R)>) {
        entries.sort_by_key(|&(c, _)| c);
        // merge duplicates
        let mut merged: Vec<(usize, R)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            debug_assert!(c < self.n);
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn finish(self) -> Csr<R> {
        assert_eq!(self.row_ptr.len(), self.n + 1, "row count mismatch");
        Csr {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

/// BiCGStab with Jacobi preconditioning. Returns the solution and the
/// achieved residual norm (2-norm of b - Ax).
pub fn bicgstab<R: Real>(
    a: &Csr<R>,
    b: &[R],
    x0: Option<&[R]>,
    tol: R,
    max_iter: usize,
) -> Result<(Vec<R>, R)> {
    let n = a.n();
    let diag = a.diagonal();
    let minv: Vec<R> = diag
        .iter()
        .map(|&d| if d.abs() > R::zero() { R::one() / d } else { R::one() })
        .collect();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![R::zero(); n]);
    let mut r = vec![R::zero(); n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = r.clone();
    let norm = |v: &[R]| v.iter().map(|&e| e * e).sum::<R>().sqrt();
    let bnorm = norm(b).max(R::of_f64(f64::MIN_POSITIVE));
    let target = tol * bnorm;
    if norm(&r) <= target {
        let res = norm(&r);
        return Ok((x, res));
    }
    let mut rho = R::one();
    let mut alpha = R::one();
    let mut omega = R::one();
    let mut v = vec![R::zero(); n];
    let mut p = vec![R::zero(); n];
    let mut best = (x.clone(), norm(&r));
    for _ in 0..max_iter {
        let rho_new: R = r0.iter().zip(&r).map(|(&a, &b)| a * b).sum();
        if rho_new.abs() < R::of_f64(1e-300) {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat: Vec<R> = p.iter().zip(&minv).map(|(&pi, &mi)| pi * mi).collect();
        a.matvec(&phat, &mut v);
        let r0v: R = r0.iter().zip(&v).map(|(&a, &b)| a * b).sum();
        if r0v.abs() < R::of_f64(1e-300) {
            break;
        }
        alpha = rho_new / r0v;
        let s: Vec<R> = r.iter().zip(&v).map(|(&ri, &vi)| ri - alpha * vi).collect();
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            let mut res = vec![R::zero(); n];
            a.matvec(&x, &mut res);
            for i in 0..n {
                res[i] = b[i] - res[i];
            }
            return Ok((x, norm(&res)));
        }
        let shat: Vec<R> = s.iter().zip(&minv).map(|(&si, &mi)| si * mi).collect();
        let mut t = vec![R::zero(); n];
        a.matvec(&shat, &mut t);
        let tt: R = t.iter().map(|&e| e * e).sum();
        if tt.abs() < R::of_f64(1e-300) {
            break;
        }
        omega = t.iter().zip(&s).map(|(&a, &b)| a * b).sum::<R>() / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rn = norm(&r);
        if rn < best.1 {
            best = (x.clone(), rn);
        }
        if rn <= target {
            return Ok((x, rn));
        }
        rho = rho_new;
        if omega.abs() < R::of_f64(1e-300) {
            break;
        }
    }
    // report the best iterate; caller decides whether it is good enough
    if best.1 <= target {
        Ok(best)
    } else {
        Err(Error::NumericFailure(format!(
            "BiCGStab stalled: residual {} > target {}",
            best.1, target
        )))
    }
}

/// Banded matrix in LAPACK-style column storage with `kl` sub- and `ku`
/// superdiagonals plus `kl` fill rows for partial pivoting.
pub struct Banded<R: Real> {
    n: usize,
    kl: usize,
    ku: usize,
    /// ab[col * w + (kl + ku + row - col)], w = 2 kl + ku + 1
    ab: Vec<R>,
    ipiv: Vec<usize>,
    factored: bool,
}

impl<R: Real> Banded<R> {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            ab: vec![R::zero(); n * w],
            ipiv: vec![0; n],
            factored: false,
        }
    }

    fn w(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    pub fn set(&mut self, row: usize, col: usize, v: R) {
        assert!(!self.factored);
        assert!(row < self.n && col < self.n);
        assert!(row + self.ku >= col && col + self.kl >= row, "entry outside band");
        let w = self.w();
        self.ab[col * w + (self.kl + self.ku + row - col)] = v;
    }

    pub fn add(&mut self, row: usize, col: usize, v: R) {
        let w = self.w();
        let idx = col * w + (self.kl + self.ku + row - col);
        self.ab[idx] += v;
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.w());
        let band = |col: usize, row: usize| col * w + (kl + ku + row - col);
        for k in 0..n {
            let km = kl.min(n - 1 - k);
            // pivot search in column k
            let mut p = 0usize;
            let mut pmax = self.ab[band(k, k)].abs();
            for i in 1..=km {
                let v = self.ab[band(k, k + i)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == R::zero() {
                return Err(Error::NumericFailure(format!(
                    "banded LU: zero pivot at column {k}"
                )));
            }
            self.ipiv[k] = k + p;
            if p != 0 {
                let jmax = (k + kl + ku).min(n - 1);
                for j in k..=jmax {
                    self.ab.swap(band(j, k), band(j, k + p));
                }
            }
            if k == n - 1 {
                break;
            }
            let pivot = self.ab[band(k, k)];
            for i in 1..=km {
                let idx = band(k, k + i);
                self.ab[idx] = self.ab[idx] / pivot;
            }
            let jmax = (k + kl + ku).min(n - 1);
            for j in k + 1..=jmax {
                let akj = self.ab[band(j, k)];
                if akj != R::zero() {
                    for i in 1..=km {
                        let m = self.ab[band(k, k + i)];
                        let idx = band(j, k + i);
                        self.ab[idx] = self.ab[idx] - m * akj;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solve in place after `factor`.
    pub fn solve(&self, b: &mut [R]) {
        assert!(self.factored, "factor before solve");
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.w());
        let band = |col: usize, row: usize| col * w + (kl + ku + row - col);
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let km = kl.min(n - 1 - k);
            for i in 1..=km {
                let m = self.ab[band(k, k + i)];
                b[k + i] = b[k + i] - m * b[k];
            }
        }
        for k in (0..n).rev() {
            b[k] = b[k] / self.ab[band(k, k)];
            let start = k.saturating_sub(kl + ku);
            for i in start..k {
                let u = self.ab[band(k, i)];
                b[i] = b[i] - u * b[k];
            }
        }
    }
}
