//! Certification of `Q(D^2 u) = u_tt * lap(u) - |grad u_t|^2 = 1` and the
//! ellipticity conditions: exact on polynomials, central-difference based
//! on sampled fields, with convergence-order estimation.

use crate::error::{Error, Result};
use crate::grid::{indices_in, Grid};
use crate::scalar::Real;
use crate::ExactPoly;

/// Relative roundoff threshold for "exact on this grid" verdicts.
pub const ROUNDOFF_TOL: f64 = 1e-10;

/// Q(D^2 u) as an exact polynomial. Variable 0 of `u` is t, the rest
/// are spatial; a t-only polynomial degenerates to Q = 0.
pub fn q_operator_symbolic(u: &ExactPoly) -> ExactPoly {
    let spatial: Vec<usize> = (1..u.nvars()).collect();
    let u_tt = u.diff(0).diff(0);
    let lap = u.laplacian(&spatial).expect("spatial vars in range");
    let grad_t_sq = u.diff(0).gradient_norm_sq(&spatial).expect("spatial vars in range");
    u_tt.mul(&lap).sub(&grad_t_sq)
}

/// Residual statistics over the interior of a grid.
#[derive(Clone, Debug)]
pub struct ResidualReport<R: Real> {
    pub max_abs: R,
    pub rms: R,
    /// Per-axis index ranges the statistics were taken over.
    pub eval_region: Vec<(usize, usize)>,
    pub order_estimate: Option<R>,
}

/// Discrete Q(D^2 u) - 1 at the interior offsets, in the order of
/// `u.interior_indices()`. Shared with the Dirichlet solver.
pub fn q_residual_interior<R: Real>(u: &Grid<R>) -> Vec<R> {
    let one = R::one();
    u.interior_indices()
        .iter()
        .map(|idx| {
            let o = u.offset(idx);
            q_point(u, o) - one
        })
        .collect()
}

/// Discrete Q(D^2 u) at one interior offset.
pub fn q_point<R: Real>(u: &Grid<R>, offset: usize) -> R {
    let u_tt = u.d2(offset, 0);
    let mut lap = R::zero();
    let mut cross_sq = R::zero();
    for axis in 1..u.ndim() {
        lap += u.d2(offset, axis);
        let c = u.d2_cross(offset, 0, axis);
        cross_sq += c * c;
    }
    u_tt * lap - cross_sq
}

/// Residual report for Q(D^2 u) = 1 over the one-cell-inset interior.
pub fn q_operator_grid<R: Real>(u: &Grid<R>) -> Result<ResidualReport<R>> {
    if u.ndim() < 2 {
        return Err(Error::InvalidInput(
            "grid must have a t axis and at least one spatial axis".into(),
        ));
    }
    let resid = q_residual_interior(u);
    if resid.is_empty() {
        return Err(Error::InvalidInput("grid too small: empty interior".into()));
    }
    let region = u.shape().iter().map(|&s| (1, s - 1)).collect();
    Ok(report_from(&resid, region))
}

fn report_from<R: Real>(resid: &[R], eval_region: Vec<(usize, usize)>) -> ResidualReport<R> {
    let max_abs = resid.iter().fold(R::zero(), |m, v| m.max(v.abs()));
    // compensated summation keeps rms reproducible across runs
    let mut sum = R::zero();
    let mut carry = R::zero();
    for &v in resid {
        let y = v * v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    let rms = (sum / R::of_usize(resid.len())).sqrt();
    ResidualReport { max_abs, rms, eval_region, order_estimate: None }
}

/// Sign verdicts for the ellipticity cone u_tt > 0, lap(u) > 0, Q > 0.
#[derive(Clone, Debug)]
pub struct EllipticityVerdict<R: Real> {
    pub u_tt_positive: bool,
    pub lap_positive: bool,
    pub q_positive: bool,
    pub min_u_tt: R,
    pub min_lap: R,
    pub min_q: R,
    /// True when the verdict comes from a sample lattice (polynomials),
    /// false when it is pointwise over a grid interior.
    pub sampled: bool,
}

impl<R: Real> EllipticityVerdict<R> {
    pub fn all_positive(&self) -> bool {
        self.u_tt_positive && self.lap_positive && self.q_positive
    }
}

/// Sample-based ellipticity verdict for a polynomial on a box; reported
/// as positivity on the lattice, never as a proof.
pub fn ellipticity_check_poly(
    u: &ExactPoly,
    region: &[(f64, f64)],
    samples_per_axis: usize,
) -> Result<EllipticityVerdict<f64>> {
    if region.len() != u.nvars() {
        return Err(Error::InvalidInput(format!(
            "region rank {} does not match polynomial variables {}",
            region.len(),
            u.nvars()
        )));
    }
    let m = samples_per_axis.max(2);
    let spatial: Vec<usize> = (1..u.nvars()).collect();
    let u_tt = u.diff(0).diff(0);
    let lap = u.laplacian(&spatial)?;
    let q = q_operator_symbolic(u);
    let mut min_u_tt = f64::INFINITY;
    let mut min_lap = f64::INFINITY;
    let mut min_q = f64::INFINITY;
    let ranges: Vec<(usize, usize)> = region.iter().map(|_| (0, m)).collect();
    for idx in indices_in(&ranges) {
        let point: Vec<f64> = idx
            .iter()
            .zip(region)
            .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .collect();
        min_u_tt = min_u_tt.min(u_tt.eval_f64(&point));
        min_lap = min_lap.min(lap.eval_f64(&point));
        min_q = min_q.min(q.eval_f64(&point));
    }
    Ok(EllipticityVerdict {
        u_tt_positive: min_u_tt > 0.0,
        lap_positive: min_lap > 0.0,
        q_positive: min_q > 0.0,
        min_u_tt,
        min_lap,
        min_q,
        sampled: true,
    })
}

/// Pointwise ellipticity verdict over a grid interior.
pub fn ellipticity_check_grid<R: Real>(u: &Grid<R>) -> Result<EllipticityVerdict<R>> {
    if u.ndim() < 2 {
        return Err(Error::InvalidInput("grid needs t and spatial axes".into()));
    }
    let mut min_u_tt = R::infinity();
    let mut min_lap = R::infinity();
    let mut min_q = R::infinity();
    for idx in u.interior_indices() {
        let o = u.offset(&idx);
        let u_tt = u.d2(o, 0);
        let mut lap = R::zero();
        for axis in 1..u.ndim() {
            lap += u.d2(o, axis);
        }
        min_u_tt = min_u_tt.min(u_tt);
        min_lap = min_lap.min(lap);
        min_q = min_q.min(q_point(u, o));
    }
    Ok(EllipticityVerdict {
        u_tt_positive: min_u_tt > R::zero(),
        lap_positive: min_lap > R::zero(),
        q_positive: min_q > R::zero(),
        min_u_tt,
        min_lap,
        min_q,
        sampled: false,
    })
}

/// Outcome of a grid-refinement study.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderEstimate {
    /// Residual at roundoff on every grid (stencils exact on the input).
    Exact,
    /// Least-squares slope of log(max residual) vs log(h).
    Order(f64),
}

/// Estimate the truncation order of the Q stencil on grids of the given
/// shapes (at least 3, nested by factor 2) over one box.
pub fn convergence_order(
    u_exact: &ExactPoly,
    bounds: &[(f64, f64)],
    shapes: &[Vec<usize>],
) -> Result<OrderEstimate> {
    if shapes.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 grid resolutions".into()));
    }
    let mut pts = Vec::new();
    let mut magnitude = 0.0_f64;
    for shape in shapes {
        let g: Grid<f64> = Grid::sample_poly(u_exact, bounds.to_vec(), shape.clone())?;
        magnitude = magnitude.max(g.max_abs());
        let rep = q_operator_grid(&g)?;
        let h = g.spacing().iter().cloned().fold(0.0_f64, f64::max);
        pts.push((h, rep.max_abs));
    }
    let tol = ROUNDOFF_TOL * (1.0 + magnitude);
    if pts.iter().all(|&(_, r)| r <= tol) {
        return Ok(OrderEstimate::Exact);
    }
    let slope = log_log_slope(&pts);
    Ok(OrderEstimate::Order(slope))
}

/// Least-squares slope of log(y) vs log(x).
pub fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let lx = x.ln();
        let ly = y.max(f64::MIN_POSITIVE).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_entire_solution;
    use num::rational::BigRational;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn x(n: usize, i: usize) -> ExactPoly {
        ExactPoly::var(n, i)
    }

    #[test]
    fn symbolic_q_examples() {
        // t^2/2 + (x1^2 + x2^2)/4 -> 1
        let t = ExactPoly::var(3, 0);
        let u = t
            .pow(2)
            .scale(&rat(1, 2))
            .add(&x(2, 0).pow(2).add(&x(2, 1).pow(2)).scale(&rat(1, 4)).insert_var(0));
        assert_eq!(q_operator_symbolic(&u), ExactPoly::one(3));

        // t^2 with one spatial variable it does not use -> 0
        let u = ExactPoly::var(2, 0).pow(2);
        assert!(q_operator_symbolic(&u).is_zero());

        // t^2/2 + t x1 + (x1^2 + x2^2)/2 -> 1
        let t = ExactPoly::var(3, 0);
        let u = t
            .pow(2)
            .scale(&rat(1, 2))
            .add(&t.mul(&ExactPoly::var(3, 1)))
            .add(&x(2, 0).pow(2).add(&x(2, 1).pow(2)).scale(&rat(1, 2)).insert_var(0));
        assert_eq!(q_operator_symbolic(&u), ExactPoly::one(3));
    }

    #[test]
    fn grid_q_quadratic_is_roundoff() {
        let t = ExactPoly::var(3, 0);
        let u = t
            .pow(2)
            .scale(&rat(1, 2))
            .add(&x(2, 0).pow(2).add(&x(2, 1).pow(2)).scale(&rat(1, 4)).insert_var(0));
        let g: Grid<f64> = Grid::sample_poly(
            &u,
            vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            vec![9, 9, 9],
        )
        .unwrap();
        let rep = q_operator_grid(&g).unwrap();
        assert!(rep.max_abs <= 1e-12, "max_abs = {}", rep.max_abs);
        assert!(rep.rms <= rep.max_abs);
    }

    #[test]
    fn grid_q_constant_field_is_minus_one() {
        let g: Grid<f64> =
            Grid::from_fn(vec![(0.0, 1.0), (0.0, 1.0)], vec![7, 7], |_| 3.25).unwrap();
        let resid = q_residual_interior(&g);
        assert!(resid.iter().all(|r| (r + 1.0).abs() < 1e-12));
    }

    #[test]
    fn grid_q_refinement_ratio_on_quartic() {
        let b = x(2, 0).pow(2).sub(&x(2, 1).pow(2));
        let sol = build_entire_solution(&rat(1, 2), &b, 2, None).unwrap();
        let bounds = vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)];
        let coarse: Grid<f64> =
            Grid::sample_poly(&sol.u, bounds.clone(), vec![17, 17, 17]).unwrap();
        let fine: Grid<f64> =
            Grid::sample_poly(&sol.u, bounds, vec![33, 33, 33]).unwrap();
        let rc = q_operator_grid(&coarse).unwrap().max_abs;
        let rf = q_operator_grid(&fine).unwrap().max_abs;
        let ratio = rc / rf;
        assert!((3.5..=4.5).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn ellipticity_verdicts() {
        let t = ExactPoly::var(3, 0);
        let u = t
            .pow(2)
            .scale(&rat(1, 2))
            .add(&x(2, 0).pow(2).add(&x(2, 1).pow(2)).scale(&rat(1, 4)).insert_var(0));
        let v = ellipticity_check_poly(&u, &[(-1.0, 1.0); 3], 11).unwrap();
        assert!(v.all_positive());

        // u = -t^2 + x1^2 fails u_tt > 0
        let u = ExactPoly::var(2, 0)
            .pow(2)
            .neg()
            .add(&ExactPoly::var(2, 1).pow(2));
        let v = ellipticity_check_poly(&u, &[(-1.0, 1.0); 2], 5).unwrap();
        assert!(!v.u_tt_positive);

        let b = x(2, 0).pow(2).sub(&x(2, 1).pow(2));
        let sol = build_entire_solution(&rat(1, 2), &b, 2, None).unwrap();
        let v = ellipticity_check_poly(&sol.u, &[(-1.0, 1.0); 3], 11).unwrap();
        assert!(v.all_positive());
        assert!(v.min_lap >= 1.0 - 1e-12);
    }

    #[test]
    fn order_quadratic_exact_quartic_second_order() {
        let t = ExactPoly::var(3, 0);
        let quad = t
            .pow(2)
            .scale(&rat(1, 2))
            .add(&x(2, 0).pow(2).add(&x(2, 1).pow(2)).scale(&rat(1, 4)).insert_var(0));
        let bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)];
        let shapes = vec![vec![9, 9, 9], vec![17, 17, 17], vec![33, 33, 33]];
        assert_eq!(
            convergence_order(&quad, &bounds, &shapes).unwrap(),
            OrderEstimate::Exact
        );

        let b = x(2, 0).pow(2).sub(&x(2, 1).pow(2));
        let sol = build_entire_solution(&rat(1, 2), &b, 2, None).unwrap();
        match convergence_order(&sol.u, &bounds, &shapes).unwrap() {
            OrderEstimate::Order(p) => assert!((1.9..=2.1).contains(&p), "order {p}"),
            OrderEstimate::Exact => panic!("quartic should not be stencil-exact"),
        }
    }
}
