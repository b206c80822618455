//! Sparse multivariate polynomials over an exact coefficient field.
//!
//! Terms are stored as exponent-vector -> coefficient, all arithmetic is
//! exact (no rounding ever). The coefficient field is generic: rationals
//! for the real tier, Gaussian rationals for the complex tier.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::rational::BigRational;
use num::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Monomial = Vec<u32>;

/// Exact coefficient field required by the symbolic tier.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn conjugate(&self) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    /// Embedding into C as (re, im), for the numeric tier.
    fn to_complex_f64(&self) -> (f64, f64);

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl Coeff for BigRational {
    fn conjugate(&self) -> Self {
        self.clone()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_complex_f64(&self) -> (f64, f64) {
        (rational_to_f64(self), 0.0)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled division for extreme magnitudes
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Sparse polynomial in `nvars` variables with exact coefficients.
///
/// Invariants: no stored coefficient is zero; every exponent vector has
/// length `nvars`.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The variable x_i as a polynomial.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        Self::monomial(exp, C::one())
    }

    pub fn monomial(exp: Monomial, c: C) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in graded-lex order (degree first, then lex), ascending.
    pub fn terms_graded(&self) -> Vec<(&Monomial, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_cmp(a.0, b.0));
        v
    }

    pub fn coeff(&self, exp: &[u32]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    /// Constant term; the whole polynomial if it is constant.
    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn add_term(&mut self, exp: Monomial, c: C) {
        assert_eq!(exp.len(), self.nvars, "exponent vector length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "nvars mismatch");
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Monomial = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exp, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = Self::zero(self.nvars);
        for (e, k) in &self.terms {
            out.add_term(e.clone(), k.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable index out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut exp = e.clone();
            exp[var] = k - 1;
            out.add_term(exp, c.clone() * C::from_int(k as i64));
        }
        out
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Evaluate exactly at a point in the coefficient field.
    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Replace every variable by the given polynomial; exact.
    pub fn substitute_all(&self, images: &[Self]) -> Self {
        assert_eq!(images.len(), self.nvars, "substitution arity mismatch");
        let out_nvars = images.first().map(|p| p.nvars).unwrap_or(self.nvars);
        let mut acc = Self::zero(out_nvars);
        for (e, c) in &self.terms {
            let mut t = Self::constant(out_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&images[i].pow(k));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Insert a fresh variable (exponent 0 everywhere) at `position`.
    pub fn insert_var(&self, position: usize) -> Self {
        assert!(position <= self.nvars);
        let mut out = Self::zero(self.nvars + 1);
        for (e, c) in &self.terms {
            let mut exp = e.clone();
            exp.insert(position, 0);
            out.terms.insert(exp, c.clone());
        }
        out
    }

    /// Coefficient-wise conjugation.
    pub fn conjugate_coeffs(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.conjugate());
        }
        out
    }

    /// Apply a permutation to the variable slots: new_exp[i] = exp[perm[i]].
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let exp: Monomial = perm.iter().map(|&j| e[j]).collect();
            out.add_term(exp, c.clone());
        }
        out
    }

    /// Split into homogeneous parts; degrees strictly increasing and the
    /// parts sum back to the input exactly.
    pub fn homogeneous_decomposition(&self) -> HomogeneousDecomposition<C> {
        let mut by_deg: BTreeMap<usize, Poly<C>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d: usize = e.iter().map(|&k| k as usize).sum();
            by_deg
                .entry(d)
                .or_insert_with(|| Poly::zero(self.nvars))
                .add_term(e.clone(), c.clone());
        }
        HomogeneousDecomposition {
            parts: by_deg.into_iter().collect(),
        }
    }

    /// Sum of second partials over the given variables.
    pub fn laplacian(&self, vars: &[usize]) -> Result<Self> {
        for &v in vars {
            if v >= self.nvars {
                return Err(Error::InvalidInput(format!(
                    "laplacian: variable index {v} out of range (nvars = {})",
                    self.nvars
                )));
            }
        }
        let mut out = Self::zero(self.nvars);
        for &v in vars {
            out = out.add(&self.diff(v).diff(v));
        }
        Ok(out)
    }

    /// Sum of squared first partials over the given variables.
    pub fn gradient_norm_sq(&self, vars: &[usize]) -> Result<Self> {
        for &v in vars {
            if v >= self.nvars {
                return Err(Error::InvalidInput(format!(
                    "gradient_norm_sq: variable index {v} out of range (nvars = {})",
                    self.nvars
                )));
            }
        }
        let mut out = Self::zero(self.nvars);
        for &v in vars {
            let d = self.diff(v);
            out = out.add(&d.mul(&d));
        }
        Ok(out)
    }

    /// Evaluate at a complex point via the coefficient embedding.
    pub fn eval_complex(&self, point: &[(f64, f64)]) -> (f64, f64) {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        let (mut re, mut im) = (0.0_f64, 0.0_f64);
        for (e, c) in &self.terms {
            let (mut tr, mut ti) = c.to_complex_f64();
            for (i, &k) in e.iter().enumerate() {
                let (pr, pi) = point[i];
                for _ in 0..k {
                    let nr = tr * pr - ti * pi;
                    let ni = tr * pi + ti * pr;
                    tr = nr;
                    ti = ni;
                }
            }
            re += tr;
            im += ti;
        }
        (re, im)
    }
}

impl Poly<BigRational> {
    /// Real evaluation for the numeric tier.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        let mut acc = 0.0_f64;
        for (e, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (i, &k) in e.iter().enumerate() {
                t *= point[i].powi(k as i32);
            }
            acc += t;
        }
        acc
    }
}

/// Graded lexicographic comparison: degree first, then lex on exponents.
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Decomposition of a polynomial into its homogeneous parts.
pub struct HomogeneousDecomposition<C: Coeff> {
    /// (degree, part), degrees strictly increasing.
    pub parts: Vec<(usize, Poly<C>)>,
}

impl<C: Coeff> HomogeneousDecomposition<C> {
    pub fn sum(&self, nvars: usize) -> Poly<C> {
        let mut acc = Poly::zero(nvars);
        for (_, p) in &self.parts {
            acc = acc.add(p);
        }
        acc
    }
}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms_graded().into_iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}", c)?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*v{}^{}", i, k)?;
                }
            }
        }
        Ok(())
    }
}

/// All exponent vectors of total degree `d` in `n` variables,
/// in descending lex order (deterministic).
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(n: usize, i: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == n - 1 {
            cur[i] = rem;
            out.push(cur.clone());
            return;
        }
        for k in (0..=rem).rev() {
            cur[i] = k;
            rec(n, i + 1, rem - k, cur, out);
        }
    }
    if n == 0 {
        if d == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(n, 0, d, &mut cur, &mut out);
    out
}

// ------------------------------------------------------------------
// Exact linear algebra (Gaussian elimination over the coefficient field)
// ------------------------------------------------------------------

/// Reduced row echelon form in place; returns pivot column per row.
fn rref<C: Coeff>(m: &mut Vec<Vec<C>>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv_lead = C::one() / m[r][c].clone();
        for j in c..cols {
            m[r][j] = m[r][j].clone() * inv_lead.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                    m[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the null space of the matrix (columns = unknowns).
pub fn kernel_basis<C: Coeff>(mut m: Vec<Vec<C>>, ncols: usize) -> Vec<Vec<C>> {
    let pivots = rref(&mut m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![C::zero(); ncols];
        v[free] = C::one();
        for (row, &pc) in pivots.iter().enumerate() {
            // pivot row: x_pc + sum over free cols of m[row][j] x_j = 0
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve a square nonsingular system exactly.
pub fn solve_square<C: Coeff>(mut m: Vec<Vec<C>>, rhs: &[C]) -> Option<Vec<C>> {
    let n = rhs.len();
    for (i, row) in m.iter_mut().enumerate() {
        row.push(rhs[i].clone());
    }
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

// ------------------------------------------------------------------
// Harmonic polynomials and Laplacian inversion
// ------------------------------------------------------------------

/// Basis of harmonic homogeneous polynomials of degree `d` in `n` variables.
///
/// Computed as the exact kernel of the Laplacian restricted to the span of
/// degree-`d` monomials; the output is deterministic and every element is
/// annihilated by `laplacian` exactly.
pub fn harmonic_basis<C: Coeff>(n: usize, d: u32) -> Result<Vec<Poly<C>>> {
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic_basis: n must be >= 1".into()));
    }
    let monos = monomials_of_degree(n, d);
    if d < 2 {
        // the Laplacian kills everything of degree < 2
        return Ok(monos
            .into_iter()
            .map(|e| Poly::monomial(e, C::one()))
            .collect());
    }
    let targets = monomials_of_degree(n, d - 2);
    let target_index: BTreeMap<&Monomial, usize> =
        targets.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let vars: Vec<usize> = (0..n).collect();
    // rows = target monomials, cols = source monomials
    let mut mat = vec![vec![C::zero(); monos.len()]; targets.len()];
    for (j, e) in monos.iter().enumerate() {
        let lap = Poly::<C>::monomial(e.clone(), C::one()).laplacian(&vars)?;
        for (te, tc) in &lap.terms {
            let i = target_index[te];
            mat[i][j] = mat[i][j].clone() + tc.clone();
        }
    }
    let kernel = kernel_basis(mat, monos.len());
    let mut out = Vec::with_capacity(kernel.len());
    for v in kernel {
        let mut p = Poly::zero(n);
        for (j, c) in v.into_iter().enumerate() {
            p.add_term(monos[j].clone(), c);
        }
        out.push(p);
    }
    Ok(out)
}

/// Canonical particular solution g of `laplacian(g) = h` on polynomials.
///
/// Per homogeneous degree m of h, g_m = |x|^2 * q with q homogeneous of
/// degree m; the Fischer decomposition makes that q unique, so the output
/// is deterministic. h = 0 returns 0.
pub fn invert_laplacian<C: Coeff>(h: &Poly<C>) -> Result<Poly<C>> {
    let n = h.nvars();
    if n == 0 {
        return Err(Error::InvalidInput("invert_laplacian: no variables".into()));
    }
    let vars: Vec<usize> = (0..n).collect();
    let mut g = Poly::zero(n);
    let r2 = {
        let mut p = Poly::<C>::zero(n);
        for i in 0..n {
            let mut e = vec![0u32; n];
            e[i] = 2;
            p.add_term(e, C::one());
        }
        p
    };
    for (deg, part) in h.homogeneous_decomposition().parts {
        let m = deg as u32;
        let monos = monomials_of_degree(n, m);
        let idx: BTreeMap<&Monomial, usize> =
            monos.iter().enumerate().map(|(i, e)| (e, i)).collect();
        // columns: q-monomial -> coefficients of Delta(|x|^2 * mono) in degree-m basis
        let mut mat = vec![vec![C::zero(); monos.len()]; monos.len()];
        for (j, e) in monos.iter().enumerate() {
            let img = r2
                .mul(&Poly::monomial(e.clone(), C::one()))
                .laplacian(&vars)?;
            for (te, tc) in &img.terms {
                mat[idx[te]][j] = mat[idx[te]][j].clone() + tc.clone();
            }
        }
        let rhs: Vec<C> = monos.iter().map(|e| part.coeff(e)).collect();
        let q_coeffs = solve_square(mat, &rhs).ok_or_else(|| {
            Error::InternalConsistency("invert_laplacian: Fischer system singular".into())
        })?;
        let mut q = Poly::zero(n);
        for (j, c) in q_coeffs.into_iter().enumerate() {
            q.add_term(monos[j].clone(), c);
        }
        g = g.add(&r2.mul(&q));
    }
    Ok(g)
}
