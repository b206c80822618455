//! The n = 2 complex Monge-Ampere correspondence: the solution family
//! v = a z zbar + f + z b + zbar bbar + g with det(v_{i jbar}) = 1,
//! Wirtinger-Hessian evaluation, the bridge identity between Q and the
//! complex Hessian determinant of the s-independent extension, and
//! finite-difference flatness spot checks of the Kahler metric.
//!
//! Variable order in `BiPoly` is (z, zbar, w, wbar); the Wirtinger
//! convention is d/dz = (d/dt - i d/ds)/2 throughout.

use num::rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::poly::Coeff;
use crate::verifier::q_operator_symbolic;
use crate::{BiPoly, ExactPoly, Rational};

pub const VAR_Z: usize = 0;
pub const VAR_ZBAR: usize = 1;
pub const VAR_W: usize = 2;
pub const VAR_WBAR: usize = 3;

/// Complex conjugate of a function of (z, zbar, w, wbar): conjugate the
/// coefficients and swap each variable with its bar partner.
pub fn conjugate(p: &BiPoly) -> BiPoly {
    p.conjugate_coeffs().permute_vars(&[VAR_ZBAR, VAR_Z, VAR_WBAR, VAR_W])
}

/// True when p represents a real-valued function.
pub fn is_real_valued(p: &BiPoly) -> bool {
    conjugate(p) == *p
}

fn uses_only(p: &BiPoly, allowed: &[usize]) -> bool {
    let forbidden: Vec<usize> = (0..4).filter(|v| !allowed.contains(v)).collect();
    forbidden.iter().all(|&v| p.diff(v).is_zero())
}

/// Invert d^2/dw dwbar on polynomials: w^p wbar^q pulls back from
/// w^(p+1) wbar^(q+1) / ((p+1)(q+1)); the harmonic kernel is fixed to
/// zero for determinism.
pub fn invert_dw_dwbar(h: &BiPoly) -> BiPoly {
    let mut g = BiPoly::zero(4);
    for (e, c) in h.terms_graded() {
        let mut exp = e.clone();
        exp[VAR_W] += 1;
        exp[VAR_WBAR] += 1;
        let den = GaussianRational::from_int((exp[VAR_W] as i64) * (exp[VAR_WBAR] as i64));
        g.add_term(exp, c.clone() / den);
    }
    g
}

/// Build an Eq.-style complex Monge-Ampere family member from
/// (a, b, f). Constraints checked exactly: d^2 b / dw dwbar = 0,
/// d^2 f / dz dzbar = 0, b a function of (w, wbar) only, f of
/// (z, zbar) only and real-valued.
pub fn build_cma_solution(a: &Rational, b: &BiPoly, f: &BiPoly) -> Result<BiPoly> {
    if a <= &BigRational::zero() {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    let b_ww = b.diff(VAR_W).diff(VAR_WBAR);
    if !b_ww.is_zero() {
        return Err(Error::ConstraintViolation {
            what: "d^2 b / dw dwbar != 0".into(),
            residual: format!("{:?}", b_ww),
        });
    }
    let f_zz = f.diff(VAR_Z).diff(VAR_ZBAR);
    if !f_zz.is_zero() {
        return Err(Error::ConstraintViolation {
            what: "d^2 f / dz dzbar != 0".into(),
            residual: format!("{:?}", f_zz),
        });
    }
    if !uses_only(b, &[VAR_W, VAR_WBAR]) {
        return Err(Error::InvalidInput("b must depend on (w, wbar) only".into()));
    }
    if !uses_only(f, &[VAR_Z, VAR_ZBAR]) {
        return Err(Error::InvalidInput("f must depend on (z, zbar) only".into()));
    }
    if !is_real_valued(f) {
        return Err(Error::ConstraintViolation {
            what: "f must be real-valued".into(),
            residual: format!("{:?}", f.sub(&conjugate(f))),
        });
    }
    let a_c = GaussianRational::from_rational(a);
    let b_wbar = b.diff(VAR_WBAR);
    // g solves d^2 g / dw dwbar = (1 + |db/dwbar|^2) / a
    let rhs = BiPoly::one(4)
        .add(&b_wbar.mul(&conjugate(&b_wbar)))
        .scale(&(GaussianRational::one() / a_c.clone()));
    let g = invert_dw_dwbar(&rhs);
    let z = BiPoly::var(4, VAR_Z);
    let zbar = BiPoly::var(4, VAR_ZBAR);
    let v = z
        .mul(&zbar)
        .scale(&a_c)
        .add(f)
        .add(&z.mul(b))
        .add(&zbar.mul(&conjugate(b)))
        .add(&g);
    debug_assert!(is_real_valued(&v));
    Ok(v)
}

/// det(v_{i jbar}) - 1 as an exact polynomial; zero for family members.
pub fn hessian_det_residual(v: &BiPoly) -> BiPoly {
    let v_zz = v.diff(VAR_Z).diff(VAR_ZBAR);
    let v_ww = v.diff(VAR_W).diff(VAR_WBAR);
    let v_zw = v.diff(VAR_Z).diff(VAR_WBAR);
    let v_wz = v.diff(VAR_W).diff(VAR_ZBAR);
    v_zz.mul(&v_ww).sub(&v_zw.mul(&v_wz)).sub(&BiPoly::one(4))
}

/// 2x2 complex Hessian of a real-valued potential at a point.
#[derive(Clone, Copy, Debug)]
pub struct HermitianForm2 {
    pub h_zz: f64,
    pub h_ww: f64,
    /// h_{z wbar}; the (w, zbar) entry is its conjugate.
    pub h_zw: (f64, f64),
}

impl HermitianForm2 {
    pub fn det(&self) -> f64 {
        self.h_zz * self.h_ww - (self.h_zw.0 * self.h_zw.0 + self.h_zw.1 * self.h_zw.1)
    }

    pub fn positive_definite(&self) -> bool {
        self.h_zz > 0.0 && self.det() > 0.0
    }
}

fn eval_at(p: &BiPoly, z: (f64, f64), w: (f64, f64)) -> (f64, f64) {
    p.eval_complex(&[z, (z.0, -z.1), w, (w.0, -w.1)])
}

/// Wirtinger second derivatives of v at a point of C^2.
pub fn complex_hessian(v: &BiPoly, z: (f64, f64), w: (f64, f64)) -> HermitianForm2 {
    let h_zz = eval_at(&v.diff(VAR_Z).diff(VAR_ZBAR), z, w);
    let h_ww = eval_at(&v.diff(VAR_W).diff(VAR_WBAR), z, w);
    let h_zw = eval_at(&v.diff(VAR_Z).diff(VAR_WBAR), z, w);
    HermitianForm2 { h_zz: h_zz.0, h_ww: h_ww.0, h_zw }
}

/// Report of the bridge identity 16 (v_zz v_ww - |v_zw|^2) = Q(D^2 u)
/// for the s-independent extension of u(t, x1, x2).
#[derive(Clone, Debug)]
pub struct BridgeReport {
    /// Exact polynomial identity (always true under the fixed convention).
    pub exact_identity: bool,
    pub sample_points: usize,
    pub max_deviation: f64,
}

/// Verify the bridge identity both as exact polynomial algebra and at
/// sample points. Under d/dz = (d_t - i d_s)/2 the extension satisfies
/// v_zz = u_tt/4, v_ww = lap(u)/4, v_zw = (u_tx1 + i u_tx2)/4, so the
/// determinant carries a factor 1/16.
pub fn real_to_complex_bridge(u: &ExactPoly, sample_points: &[[f64; 3]]) -> Result<BridgeReport> {
    if u.nvars() != 3 {
        return Err(Error::Unsupported(format!(
            "bridge requires u(t, x1, x2); got {} variables",
            u.nvars()
        )));
    }
    let quarter = Rational::new(1.into(), 4.into());
    let u_tt = u.diff(0).diff(0);
    let lap = u.laplacian(&[1, 2])?;
    let u_tx1 = u.diff(0).diff(1);
    let u_tx2 = u.diff(0).diff(2);
    // 16 * (u_tt/4 * lap/4 - (u_tx1^2 + u_tx2^2)/16) as exact algebra
    let sixteen = Rational::new(16.into(), 1.into());
    let det16 = u_tt
        .scale(&quarter)
        .mul(&lap.scale(&quarter))
        .sub(&u_tx1.mul(&u_tx1).add(&u_tx2.mul(&u_tx2)).scale(&(quarter.clone() * quarter.clone())))
        .scale(&sixteen);
    let q = q_operator_symbolic(u);
    let exact_identity = det16 == q;

    let mut max_dev = 0.0_f64;
    for p in sample_points {
        let h_zz = u_tt.eval_f64(p) / 4.0;
        let h_ww = lap.eval_f64(p) / 4.0;
        let hzw_re = u_tx1.eval_f64(p) / 4.0;
        let hzw_im = u_tx2.eval_f64(p) / 4.0;
        let det = h_zz * h_ww - (hzw_re * hzw_re + hzw_im * hzw_im);
        let dev = (16.0 * det - q.eval_f64(p)).abs();
        max_dev = max_dev.max(dev);
    }
    Ok(BridgeReport {
        exact_identity,
        sample_points: sample_points.len(),
        max_deviation: max_dev,
    })
}

// ------------------------------------------------------------------
// Flatness spot checks
// ------------------------------------------------------------------

type C = (f64, f64);

fn c_add(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}
fn c_sub(a: C, b: C) -> C {
    (a.0 - b.0, a.1 - b.1)
}
fn c_mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn c_scale(a: C, s: f64) -> C {
    (a.0 * s, a.1 * s)
}
fn c_abs(a: C) -> f64 {
    a.0.hypot(a.1)
}

/// 2x2 complex matrix of metric samples g_{i jbar}.
type Metric = [[C; 2]; 2];

fn metric_at(v: &BiPoly, coords: &[f64; 4]) -> Metric {
    let z = (coords[0], coords[1]);
    let w = (coords[2], coords[3]);
    let h = complex_hessian(v, z, w);
    [
        [(h.h_zz, 0.0), h.h_zw],
        [(h.h_zw.0, -h.h_zw.1), (h.h_ww, 0.0)],
    ]
}

fn metric_add(a: &Metric, b: &Metric, sa: f64, sb: f64) -> Metric {
    let mut out = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = c_add(c_scale(a[i][j], sa), c_scale(b[i][j], sb));
        }
    }
    out
}

/// First real partial of the metric with respect to real coordinate r.
fn metric_d1(v: &BiPoly, coords: &[f64; 4], r: usize, h: f64) -> Metric {
    let mut plus = *coords;
    plus[r] += h;
    let mut minus = *coords;
    minus[r] -= h;
    metric_add(&metric_at(v, &plus), &metric_at(v, &minus), 0.5 / h, -0.5 / h)
}

/// Second real partial d^2/dr ds of the metric.
fn metric_d2(v: &BiPoly, coords: &[f64; 4], r: usize, s: usize, h: f64) -> Metric {
    if r == s {
        let mut plus = *coords;
        plus[r] += h;
        let mut minus = *coords;
        minus[r] -= h;
        let center = metric_at(v, coords);
        let sum = metric_add(&metric_at(v, &plus), &metric_at(v, &minus), 1.0, 1.0);
        metric_add(&sum, &center, 1.0 / (h * h), -2.0 / (h * h))
    } else {
        let shift = |dr: f64, ds: f64| {
            let mut c = *coords;
            c[r] += dr;
            c[s] += ds;
            metric_at(v, &c)
        };
        let pp = shift(h, h);
        let pm = shift(h, -h);
        let mp = shift(-h, h);
        let mm = shift(-h, -h);
        let d = metric_add(&metric_add(&pp, &mm, 1.0, 1.0), &metric_add(&pm, &mp, 1.0, 1.0), 1.0, -1.0);
        metric_add(&d, &[[(0.0, 0.0); 2]; 2], 0.25 / (h * h), 0.0)
    }
}

/// Holomorphic derivative d/dzeta_k of the metric:
/// (d/d re - i d/d im)/2 by central differences.
fn metric_dk(v: &BiPoly, coords: &[f64; 4], k: usize, h: f64) -> Metric {
    let da = metric_d1(v, coords, 2 * k, h);
    let db = metric_d1(v, coords, 2 * k + 1, h);
    let mut out = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            // (da - i db)/2
            out[i][j] = c_scale(c_sub(da[i][j], c_mul((0.0, 1.0), db[i][j])), 0.5);
        }
    }
    out
}

/// Antiholomorphic derivative d/dzetabar_l of the metric.
fn metric_dlbar(v: &BiPoly, coords: &[f64; 4], l: usize, h: f64) -> Metric {
    let dc = metric_d1(v, coords, 2 * l, h);
    let dd = metric_d1(v, coords, 2 * l + 1, h);
    let mut out = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            // (dc + i dd)/2
            out[i][j] = c_scale(c_add(dc[i][j], c_mul((0.0, 1.0), dd[i][j])), 0.5);
        }
    }
    out
}

/// Mixed derivative d^2/dzeta_k dzetabar_l of the metric.
fn metric_dk_dlbar(v: &BiPoly, coords: &[f64; 4], k: usize, l: usize, h: f64) -> Metric {
    let (ak, bk) = (2 * k, 2 * k + 1);
    let (cl, dl) = (2 * l, 2 * l + 1);
    let dac = metric_d2(v, coords, ak, cl, h);
    let dbd = metric_d2(v, coords, bk, dl, h);
    let dad = metric_d2(v, coords, ak, dl, h);
    let dbc = metric_d2(v, coords, bk, cl, h);
    // 1/4 (d_a d_c + d_b d_d) + i/4 (d_a d_d - d_b d_c)
    let mut out = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let real_part = c_scale(c_add(dac[i][j], dbd[i][j]), 0.25);
            let imag_part = c_scale(c_sub(dad[i][j], dbc[i][j]), 0.25);
            out[i][j] = c_add(real_part, c_mul((0.0, 1.0), imag_part));
        }
    }
    out
}

/// Finite-difference estimate of the Kahler curvature tensor at a point:
/// R_{i jbar k lbar} = -d^2 g_{i jbar}/dzeta_k dzetabar_l
///                     + g^{p qbar} (dg_{i qbar}/dzeta_k)(dg_{p jbar}/dzetabar_l).
/// Returns the maximum absolute component. Spot check only.
pub fn curvature_spot_check(v: &BiPoly, z: C, w: C, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::InvalidParameter("step h must be positive".into()));
    }
    let coords = [z.0, z.1, w.0, w.1];
    let g = metric_at(v, &coords);
    let det = c_sub(c_mul(g[0][0], g[1][1]), c_mul(g[0][1], g[1][0]));
    let hess = complex_hessian(v, z, w);
    if !hess.positive_definite() {
        return Err(Error::InvalidParameter(format!(
            "metric not positive definite at the point (det = {})",
            hess.det()
        )));
    }
    // inverse metric, g^{p qbar}
    let inv_det = (det.0 / (det.0 * det.0 + det.1 * det.1),
                   -det.1 / (det.0 * det.0 + det.1 * det.1));
    let ginv: Metric = [
        [c_mul(g[1][1], inv_det), c_mul(c_scale(g[0][1], -1.0), inv_det)],
        [c_mul(c_scale(g[1][0], -1.0), inv_det), c_mul(g[0][0], inv_det)],
    ];
    let dk: Vec<Metric> = (0..2).map(|k| metric_dk(v, &coords, k, h)).collect();
    let dlbar: Vec<Metric> = (0..2).map(|l| metric_dlbar(v, &coords, l, h)).collect();
    let mut max_comp = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let second = metric_dk_dlbar(v, &coords, k, l, h);
                    let mut r = c_scale(second[i][j], -1.0);
                    for p in 0..2 {
                        for q in 0..2 {
                            let term = c_mul(ginv[p][q], c_mul(dk[k][i][q], dlbar[l][p][j]));
                            r = c_add(r, term);
                        }
                    }
                    max_comp = max_comp.max(c_abs(r));
                }
            }
        }
    }
    Ok(max_comp)
}
