//! The Donaldson transform z = u_t, theta(z, x) = t, its harmonicity
//! residual, the Liouville constancy diagnostic for dtheta/dz = 1/u_tt,
//! and the completeness diagnostic for the line metric u_tt dt^2.

use num::rational::BigRational;
use num::BigInt;
use num_traits::One;

use crate::builder::EntireSolution;
use crate::error::{Error, Result};
use crate::grid::{indices, Grid};
use crate::scalar::Real;
use crate::verifier::ResidualReport;
use crate::{ExactPoly, Rational};

/// Root-finder tolerance for the per-column inversion of z = u_t(t, x).
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Stats<R: Real> {
    pub min: R,
    pub max: R,
    pub mean: R,
    pub variance: R,
}

impl<R: Real> Stats<R> {
    pub fn of(values: &[R]) -> Self {
        assert!(!values.is_empty());
        let n = R::of_usize(values.len());
        let mut min = R::infinity();
        let mut max = R::neg_infinity();
        let mut sum = R::zero();
        for &v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        let mean = sum / n;
        let mut var = R::zero();
        for &v in values {
            var += (v - mean) * (v - mean);
        }
        Stats { min, max, mean, variance: var / n }
    }

    pub fn relative_variation(&self) -> R {
        if self.mean == R::zero() {
            R::infinity()
        } else {
            (self.max - self.min) / self.mean.abs()
        }
    }
}

/// Result of the transform; symbolic for family members, a (z, x) grid
/// for sampled fields.
#[derive(Clone, Debug)]
pub enum Theta<R: Real> {
    Symbolic(ExactPoly),
    Numeric(Grid<R>),
}

#[derive(Clone, Debug)]
pub struct TransformResult<R: Real> {
    pub theta: Theta<R>,
    /// Common interval of u_t values; infinite for the symbolic path.
    pub z_range: (R, R),
    pub dtheta_dz_stats: Stats<R>,
    /// Exact value of dtheta/dz when available (1/(2a) on the family).
    pub dtheta_dz_exact: Option<Rational>,
}

/// Exact transform on the family: u_t = 2a t + b(x) is affine in t, so
/// theta(z, x) = (z - b(x)) / (2a) with dtheta/dz = 1/(2a).
pub fn donaldson_transform_symbolic(sol: &EntireSolution) -> Result<TransformResult<f64>> {
    let u_ttt = sol.u.diff(0).diff(0).diff(0);
    if !u_ttt.is_zero() {
        return Err(Error::Unsupported(
            "symbolic transform covers constant-u_tt solutions only".into(),
        ));
    }
    let two_a = BigRational::from_integer(BigInt::from(2)) * sol.a.clone();
    let inv_2a = BigRational::one() / two_a;
    // variables (z, x1..xn)
    let z = ExactPoly::var(sol.n + 1, 0);
    let theta = z.sub(&sol.b.insert_var(0)).scale(&inv_2a);
    let d = crate::poly::rational_to_f64(&inv_2a);
    Ok(TransformResult {
        theta: Theta::Symbolic(theta),
        z_range: (f64::NEG_INFINITY, f64::INFINITY),
        dtheta_dz_stats: Stats { min: d, max: d, mean: d, variance: 0.0 },
        dtheta_dz_exact: Some(inv_2a),
    })
}

/// Numeric transform of a sampled u(t, x): per spatial column, invert
/// the strictly increasing u_t by monotone cubic interpolation plus
/// safeguarded Newton-bisection, filling theta on a rectangular z-grid
/// over the common range of u_t values.
pub fn donaldson_transform_numeric<R: Real>(u: &Grid<R>) -> Result<TransformResult<R>> {
    if u.ndim() < 2 {
        return Err(Error::InvalidInput("grid needs t and spatial axes".into()));
    }
    let nt = u.shape()[0];
    if nt < 5 {
        return Err(Error::InvalidInput("t axis too short".into()));
    }
    let spatial_shape: Vec<usize> = u.shape()[1..].to_vec();
    let columns = indices(&spatial_shape);
    let n_t_samples = nt - 2; // u_t known at interior t-levels only
    let ht = u.spacing()[0];

    // u_t per column at interior t indices, monotonicity checked
    let mut col_ut: Vec<Vec<R>> = Vec::with_capacity(columns.len());
    let mut zmin = R::neg_infinity();
    let mut zmax = R::infinity();
    for col in &columns {
        let mut s = Vec::with_capacity(n_t_samples);
        let mut idx = Vec::with_capacity(u.ndim());
        for j in 1..nt - 1 {
            idx.clear();
            idx.push(j);
            idx.extend_from_slice(col);
            let o = u.offset(&idx);
            if u.d2(o, 0) <= R::zero() {
                return Err(Error::EllipticityViolation(format!(
                    "u_tt <= 0 at index {:?}",
                    idx
                )));
            }
            s.push(u.d1(o, 0));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::EllipticityViolation(
                "u_t not strictly increasing along a column".into(),
            ));
        }
        zmin = zmin.max(s[0]);
        zmax = zmax.min(s[n_t_samples - 1]);
        col_ut.push(s);
    }
    if zmin >= zmax {
        return Err(Error::TransformDomain(
            "columns share no common u_t range".into(),
        ));
    }

    // rectangular theta grid over the common z interval
    let nz = n_t_samples.max(5);
    let mut bounds = vec![(zmin, zmax)];
    bounds.extend_from_slice(&u.bounds()[1..]);
    let mut shape = vec![nz];
    shape.extend_from_slice(&spatial_shape);
    let hz = (zmax - zmin) / R::of_usize(nz - 1);

    let t_knots: Vec<R> = (1..nt - 1)
        .map(|j| u.bounds()[0].0 + ht * R::of_usize(j))
        .collect();

    let mut values = vec![R::zero(); shape.iter().product()];
    let spatial_strides = crate::grid::strides_of(&spatial_shape);
    let z_stride: usize = spatial_shape.iter().product();
    for (ci, col) in columns.iter().enumerate() {
        let interp = MonotoneCubic::new(&t_knots, &col_ut[ci]);
        let col_offset: usize = col
            .iter()
            .zip(&spatial_strides)
            .map(|(&i, &s)| i * s)
            .sum();
        for k in 0..nz {
            let z = zmin + hz * R::of_usize(k);
            let t = interp.invert(z);
            values[k * z_stride + col_offset] = t;
        }
    }
    let theta = Grid::new(bounds, shape, values)?;

    // dtheta/dz statistics from central differences on the z axis
    let mut slopes = Vec::new();
    for idx in indices(theta.shape()) {
        if idx[0] == 0 || idx[0] == nz - 1 {
            continue;
        }
        let o = theta.offset(&idx);
        slopes.push(theta.d1(o, 0));
    }
    let stats = Stats::of(&slopes);
    if stats.min <= R::zero() {
        return Err(Error::EllipticityViolation(
            "dtheta/dz not positive on the z grid".into(),
        ));
    }
    Ok(TransformResult {
        theta: Theta::Numeric(theta),
        z_range: (zmin, zmax),
        dtheta_dz_stats: stats,
        dtheta_dz_exact: None,
    })
}

/// Fritsch-Carlson monotone cubic interpolant on increasing data.
struct MonotoneCubic<R: Real> {
    t: Vec<R>,
    s: Vec<R>,
    m: Vec<R>, // slopes ds/dt at the knots
}

impl<R: Real> MonotoneCubic<R> {
    fn new(t: &[R], s: &[R]) -> Self {
        let n = t.len();
        assert!(n >= 2);
        let mut d = Vec::with_capacity(n - 1); // secant slopes
        for i in 0..n - 1 {
            d.push((s[i + 1] - s[i]) / (t[i + 1] - t[i]));
        }
        let mut m = vec![R::zero(); n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = (d[i - 1] + d[i]) / R::of_f64(2.0);
        }
        // clamp to keep the interpolant monotone
        let three = R::of_f64(3.0);
        for i in 0..n - 1 {
            if d[i] == R::zero() {
                m[i] = R::zero();
                m[i + 1] = R::zero();
            } else {
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let r = (a * a + b * b).sqrt();
                if r > three {
                    let tau = three / r;
                    m[i] = tau * a * d[i];
                    m[i + 1] = tau * b * d[i];
                }
            }
        }
        MonotoneCubic { t: t.to_vec(), s: s.to_vec(), m }
    }

    fn eval(&self, x: R) -> (R, R) {
        let n = self.t.len();
        let i = match self
            .t
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.t[i + 1] - self.t[i];
        let u = (x - self.t[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let two = R::of_f64(2.0);
        let three = R::of_f64(3.0);
        let h00 = two * u3 - three * u2 + R::one();
        let h10 = u3 - two * u2 + u;
        let h01 = -two * u3 + three * u2;
        let h11 = u3 - u2;
        let val = h00 * self.s[i] + h10 * h * self.m[i] + h01 * self.s[i + 1] + h11 * h * self.m[i + 1];
        let dh00 = (R::of_f64(6.0) * u2 - R::of_f64(6.0) * u) / h;
        let dh10 = (three * u2 - R::of_f64(4.0) * u + R::one()) / h;
        let dh01 = (R::of_f64(6.0) * u - R::of_f64(6.0) * u2) / h;
        let dh11 = (three * u2 - two * u) / h;
        let deriv = dh00 * self.s[i] + dh10 * h * self.m[i] + dh01 * self.s[i + 1] + dh11 * h * self.m[i + 1];
        (val, deriv)
    }

    /// Solve s(t) = z by safeguarded Newton-bisection; z must lie in
    /// the data range.
    fn invert(&self, z: R) -> R {
        let n = self.t.len();
        // bracket from the knot values (monotone data)
        let (mut lo, mut hi) = match self.s.binary_search_by(|v| v.partial_cmp(&z).unwrap()) {
            Ok(i) => return self.t[i],
            Err(i) => {
                if i == 0 {
                    return self.t[0];
                }
                if i >= n {
                    return self.t[n - 1];
                }
                (self.t[i - 1], self.t[i])
            }
        };
        let tol = R::of_f64(INVERSION_TOL);
        let mut x = (lo + hi) / R::of_f64(2.0);
        for _ in 0..100 {
            let (v, dv) = self.eval(x);
            let err = v - z;
            if err.abs() <= tol {
                return x;
            }
            if err > R::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - err / dv;
            if !(next > lo && next < hi) || dv <= R::zero() {
                next = (lo + hi) / R::of_f64(2.0);
            }
            if (next - x).abs() <= tol {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Harmonicity of theta in all (z, x) variables: exact polynomial on the
/// symbolic path, FD Laplacian statistics on grids.
pub enum HarmonicityReport<R: Real> {
    Symbolic(ExactPoly),
    Numeric(ResidualReport<R>),
}

pub fn harmonicity_residual<R: Real>(result: &TransformResult<R>) -> Result<HarmonicityReport<R>> {
    match &result.theta {
        Theta::Symbolic(theta) => {
            let vars: Vec<usize> = (0..theta.nvars()).collect();
            Ok(HarmonicityReport::Symbolic(theta.laplacian(&vars)?))
        }
        Theta::Numeric(g) => Ok(HarmonicityReport::Numeric(laplacian_residual_grid(g)?)),
    }
}

/// FD Laplacian over all axes on the interior of a grid.
pub fn laplacian_residual_grid<R: Real>(g: &Grid<R>) -> Result<ResidualReport<R>> {
    let interior = g.interior_indices();
    if interior.is_empty() {
        return Err(Error::InvalidInput("grid too small: empty interior".into()));
    }
    let resid: Vec<R> = interior
        .iter()
        .map(|idx| {
            let o = g.offset(idx);
            (0..g.ndim()).map(|a| g.d2(o, a)).sum()
        })
        .collect();
    let max_abs = resid.iter().fold(R::zero(), |m, v| m.max(v.abs()));
    let mut sum = R::zero();
    for &v in &resid {
        sum += v * v;
    }
    Ok(ResidualReport {
        max_abs,
        rms: (sum / R::of_usize(resid.len())).sqrt(),
        eval_region: g.shape().iter().map(|&s| (1, s - 1)).collect(),
        order_estimate: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiouvilleVerdict {
    ConsistentWithConstant,
    NonConstantOnWindow,
}

#[derive(Clone, Debug)]
pub struct LiouvilleReport<R: Real> {
    pub positive: bool,
    pub relative_variation: R,
    pub tolerance: R,
    /// A window observation, not a theorem.
    pub verdict: LiouvilleVerdict,
}

/// Default relative-variation tolerance for symbolic-sourced fields.
pub const LIOUVILLE_TOL_SYMBOLIC: f64 = 1e-6;

/// Positivity plus constancy-on-window check of dtheta/dz.
pub fn liouville_diagnostic<R: Real>(
    result: &TransformResult<R>,
    tolerance: R,
) -> LiouvilleReport<R> {
    let stats = &result.dtheta_dz_stats;
    let rv = if result.dtheta_dz_exact.is_some() {
        R::zero()
    } else {
        stats.relative_variation()
    };
    LiouvilleReport {
        positive: stats.min > R::zero(),
        relative_variation: rv,
        tolerance,
        verdict: if rv <= tolerance {
            LiouvilleVerdict::ConsistentWithConstant
        } else {
            LiouvilleVerdict::NonConstantOnWindow
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    PlusT,
    MinusT,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompletenessKind {
    Diverging,
    Inconclusive,
    BoundedOnWindow,
}

#[derive(Clone, Debug)]
pub struct CompletenessVerdict {
    pub direction: Direction,
    /// L(T) = integral of sqrt(u_tt) over [0, T] (or [-T, 0]).
    pub window_integrals: Vec<(f64, f64)>,
    pub verdict: CompletenessKind,
    /// Power-law exponent fitted to the largest windows.
    pub growth_exponent: f64,
}

/// Truncated-length diagnostic for the line metric u_tt dt^2 along one
/// t-direction. Completeness is undecidable from finite data; the verdict
/// vocabulary keeps that explicit.
pub fn completeness_diagnostic(
    u_tt: impl Fn(f64) -> f64,
    direction: Direction,
    windows: &[f64],
) -> Result<CompletenessVerdict> {
    if windows.len() < 3 || windows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "need at least 3 strictly increasing windows".into(),
        ));
    }
    let sign = match direction {
        Direction::PlusT => 1.0,
        Direction::MinusT => -1.0,
    };
    let mut integrals = Vec::with_capacity(windows.len());
    for &tmax in windows {
        if tmax <= 0.0 {
            return Err(Error::InvalidInput("windows must be positive".into()));
        }
        let l = simpson(|t| u_tt(sign * t).max(0.0).sqrt(), 0.0, tmax, 4096);
        integrals.push((tmax, l));
    }
    // power-law fit over the largest windows
    let tail = &integrals[integrals.len() - 3..];
    let p = crate::verifier::log_log_slope(tail);
    let verdict = if p >= 0.05 {
        CompletenessKind::Diverging
    } else if p <= 0.01 {
        CompletenessKind::BoundedOnWindow
    } else {
        CompletenessKind::Inconclusive
    };
    Ok(CompletenessVerdict {
        direction,
        window_integrals: integrals,
        verdict,
        growth_exponent: p,
    })
}

/// Completeness diagnostic for a family member (u_tt = 2a).
pub fn completeness_of_solution(
    sol: &EntireSolution,
    direction: Direction,
    windows: &[f64],
) -> Result<CompletenessVerdict> {
    let two_a = 2.0 * crate::poly::rational_to_f64(&sol.a);
    completeness_diagnostic(move |_| two_a, direction, windows)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) & !1usize;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}
