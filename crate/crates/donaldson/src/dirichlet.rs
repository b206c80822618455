//! Damped-Newton finite-difference solver for Q(D^2 u) = 1 with full
//! Dirichlet data on boxes (n = 1 and n = 2), plus the nested-domain
//! experiment probing whether u_tt stays constant.

use crate::builder::EntireSolution;
use crate::error::{Error, Result};
use crate::grid::{indices, Grid};
use crate::linalg::{bicgstab, Banded, Csr};
use crate::scalar::Real;
use crate::verifier::q_residual_interior;
use crate::ExactPoly;

#[derive(Clone, Debug)]
pub struct SolveConfig<R: Real> {
    /// Residual sup-norm target.
    pub newton_tol: R,
    pub max_newton_iters: usize,
    pub line_search_shrink: R,
    pub max_backtracks: usize,
    /// Relative tolerance handed to the iterative linear solver.
    pub linear_tol: R,
    /// Ellipticity floor for min u_tt and min lap(u).
    pub ellipticity_floor: R,
}

impl<R: Real> Default for SolveConfig<R> {
    fn default() -> Self {
        SolveConfig {
            newton_tol: R::of_f64(1e-10),
            max_newton_iters: 30,
            line_search_shrink: R::of_f64(0.5),
            max_backtracks: 30,
            linear_tol: R::of_f64(1e-2),
            ellipticity_floor: R::of_f64(1e-8),
        }
    }
}

impl<R: Real> SolveConfig<R> {
    fn validate(&self) -> Result<()> {
        if self.newton_tol <= R::zero()
            || self.linear_tol <= R::zero()
            || self.ellipticity_floor <= R::zero()
            || !(self.line_search_shrink > R::zero() && self.line_search_shrink < R::one())
        {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Stalled,
    EllipticityBreakdown,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolveReport<R: Real> {
    /// Residual sup-norm after every accepted step (index 0 = initial guess).
    pub residual_norms: Vec<R>,
    /// Accepted step sizes per Newton iteration.
    pub step_sizes: Vec<R>,
    pub final_residual: R,
    /// (min u_tt, min lap u) over the interior of the final iterate.
    pub ellipticity_margin: (R, R),
    pub converged: bool,
    pub status: SolveStatus,
    pub newton_iterations: usize,
}

/// Discrete Q(D^2 u) - 1 on the interior, in interior-index order.
pub fn assemble_residual<R: Real>(u: &Grid<R>) -> Vec<R> {
    q_residual_interior(u)
}

/// Minimum of discrete u_tt and of the discrete spatial Laplacian over
/// the interior.
pub fn ellipticity_margins<R: Real>(u: &Grid<R>) -> (R, R) {
    let mut min_utt = R::infinity();
    let mut min_lap = R::infinity();
    for idx in u.interior_indices() {
        let o = u.offset(&idx);
        min_utt = min_utt.min(u.d2(o, 0));
        let lap: R = (1..u.ndim()).map(|a| u.d2(o, a)).sum();
        min_lap = min_lap.min(lap);
    }
    (min_utt, min_lap)
}

/// The linearization L[phi] = lap(u) phi_tt + u_tt lap(phi)
/// - 2 grad(u_t) . grad(phi_t) on interior unknowns with homogeneous
/// Dirichlet conditions, as a CSR matrix in interior-index order.
/// The flag is false when the base iterate leaves the elliptic cone.
pub fn linearized_operator<R: Real>(u: &Grid<R>, floor: R) -> (Csr<R>, bool) {
    let ndim = u.ndim();
    let shape = u.shape();
    let ishape: Vec<usize> = shape.iter().map(|&s| s - 2).collect();
    let istrides = crate::grid::strides_of(&ishape);
    let nun: usize = ishape.iter().product();
    let mut builder = Csr::builder(nun);
    let h = u.spacing();
    let two = R::of_f64(2.0);
    let (min_utt, min_lap) = ellipticity_margins(u);
    let elliptic = min_utt >= floor && min_lap >= floor;
    for idx in u.interior_indices() {
        let o = u.offset(&idx);
        let u_tt = u.d2(o, 0);
        let lap: R = (1..ndim).map(|a| u.d2(o, a)).sum();
        let mut row: Vec<(usize, R)> = Vec::with_capacity(15);
        let unknown_id = |jdx: &[usize]| -> Option<usize> {
            let mut id = 0usize;
            for a in 0..ndim {
                if jdx[a] == 0 || jdx[a] == shape[a] - 1 {
                    return None;
                }
                id += (jdx[a] - 1) * istrides[a];
            }
            Some(id)
        };
        let mut push = |jdx: &[usize], v: R| {
            if let Some(id) = unknown_id(jdx) {
                row.push((id, v));
            }
        };
        // phi_tt coefficient lap(u); lap(phi) coefficient u_tt
        let mut center = -two * lap / (h[0] * h[0]);
        let mut jdx = idx.clone();
        jdx[0] = idx[0] - 1;
        push(&jdx, lap / (h[0] * h[0]));
        jdx[0] = idx[0] + 1;
        push(&jdx, lap / (h[0] * h[0]));
        for a in 1..ndim {
            center -= two * u_tt / (h[a] * h[a]);
            jdx = idx.clone();
            jdx[a] = idx[a] - 1;
            push(&jdx, u_tt / (h[a] * h[a]));
            jdx[a] = idx[a] + 1;
            push(&jdx, u_tt / (h[a] * h[a]));
            // -2 u_{t x_a} phi_{t x_a} over the four corners
            let c = u.d2_cross(o, 0, a);
            let w = c / (two * h[0] * h[a]);
            for (st, sa) in [(1isize, 1isize), (1, -1), (-1, 1), (-1, -1)] {
                jdx = idx.clone();
                jdx[0] = (idx[0] as isize + st) as usize;
                jdx[a] = (idx[a] as isize + sa) as usize;
                let sign = R::of_f64((st * sa) as f64);
                push(&jdx, -sign * w);
            }
        }
        let center_id = unknown_id(&idx).expect("interior point");
        row.push((center_id, center));
        builder.push_row(row);
    }
    (builder.finish(), elliptic)
}

/// Solve the linearized system; direct banded LU on 2D (n = 1) grids,
/// Jacobi-preconditioned BiCGStab on 3D (n = 2) grids.
fn solve_linear<R: Real>(
    a: &Csr<R>,
    rhs: &[R],
    ndim: usize,
    ishape: &[usize],
    rel_tol: R,
) -> Result<Vec<R>> {
    if ndim == 2 {
        let n = a.n();
        let bw = ishape[1] + 1;
        let mut band = Banded::new(n, bw, bw);
        for (i, cols, vals) in a.rows() {
            for (&c, &v) in cols.iter().zip(vals) {
                band.add(i, c, v);
            }
        }
        band.factor()?;
        let mut x = rhs.to_vec();
        band.solve(&mut x);
        Ok(x)
    } else {
        let (x, _) = bicgstab(a, rhs, None, rel_tol, 20_000)?;
        Ok(x)
    }
}

/// Discrete harmonic extension of the boundary values of `boundary`
/// into the interior (Laplace equation in all grid variables).
pub fn laplace_extension<R: Real>(boundary: &Grid<R>) -> Result<Grid<R>> {
    poisson_extension(boundary, None)
}

/// Solve lap w = rhs (all grid variables) with the boundary values of
/// `boundary`; `rhs` is in interior-index order, `None` meaning zero.
fn poisson_extension<R: Real>(boundary: &Grid<R>, rhs_in: Option<&[R]>) -> Result<Grid<R>> {
    let shape = boundary.shape().to_vec();
    let ishape: Vec<usize> = shape.iter().map(|&s| s - 2).collect();
    let istrides = crate::grid::strides_of(&ishape);
    let nun: usize = ishape.iter().product();
    let h = boundary.spacing().to_vec();
    let ndim = shape.len();
    let mut builder = Csr::builder(nun);
    let mut rhs = vec![R::zero(); nun];
    let two = R::of_f64(2.0);
    for (rid, idx) in boundary.interior_indices().into_iter().enumerate() {
        let mut row: Vec<(usize, R)> = Vec::with_capacity(2 * ndim + 1);
        let mut center = R::zero();
        for a in 0..ndim {
            let w = R::one() / (h[a] * h[a]);
            center += two * w;
            for s in [-1isize, 1] {
                let mut jdx = idx.clone();
                jdx[a] = (idx[a] as isize + s) as usize;
                if boundary.is_boundary(&jdx) {
                    rhs[rid] += w * boundary.get(&jdx);
                } else {
                    let mut id = 0usize;
                    for b in 0..ndim {
                        id += (jdx[b] - 1) * istrides[b];
                    }
                    row.push((id, -w));
                }
            }
        }
        if let Some(s) = rhs_in {
            // assembled operator is -lap, so lap w = s becomes -s here
            rhs[rid] -= s[rid];
        }
        row.push((rid, center));
        builder.push_row(row);
    }
    let a = builder.finish();
    let (x, _) = bicgstab(&a, &rhs, None, R::of_f64(1e-12), 50_000)?;
    let mut out = boundary.clone();
    for (rid, idx) in out.interior_indices().into_iter().enumerate() {
        out.set(&idx, x[rid]);
    }
    Ok(out)
}

/// Initial guess: harmonic extension of the data, lifted by c (t^2 minus
/// the harmonic extension of t^2 boundary values) with the smallest c
/// reaching u_tt >= floor. The lift vanishes on the boundary.
fn initial_guess<R: Real>(boundary: &Grid<R>, floor: R) -> Result<Grid<R>> {
    // aim well inside the cone: starting on the barrier makes the
    // linearization nearly singular and the line search crawl
    let target = floor.max(R::of_f64(0.5));
    let mut base = laplace_extension(boundary)?;
    // fixed-point refinement: when Q(D^2 u) = 1,
    //   (lap_{t,x} u)^2 = (u_tt - lap_x u)^2 + 4 (1 + |grad u_t|^2),
    // so resolving lap w = sqrt(...) from the current iterate walks the
    // guess toward the solution while keeping the Dirichlet data
    let four = R::of_f64(4.0);
    let mut prev_resid = sup_norm(&assemble_residual(&base));
    for _ in 0..12 {
        let mut s = Vec::new();
        for idx in base.interior_indices() {
            let o = base.offset(&idx);
            let u_tt = base.d2(o, 0);
            let lap_x: R = (1..base.ndim()).map(|a| base.d2(o, a)).sum();
            let grad_sq: R = (1..base.ndim())
                .map(|a| {
                    let c = base.d2_cross(o, 0, a);
                    c * c
                })
                .sum();
            let diff = u_tt - lap_x;
            s.push((diff * diff + four * (R::one() + grad_sq)).sqrt());
        }
        let next = poisson_extension(boundary, Some(&s))?;
        let resid = sup_norm(&assemble_residual(&next));
        if !(resid < prev_resid) {
            break;
        }
        prev_resid = resid;
        base = next;
    }
    let (min_utt, _) = ellipticity_margins(&base);
    if min_utt >= target {
        return Ok(base);
    }
    let t2 = Grid::from_fn(boundary.bounds().to_vec(), boundary.shape().to_vec(), |p| {
        p[0] * p[0]
    })?;
    let t2_ext = laplace_extension(&t2)?;
    let mut lift = t2;
    for (i, v) in lift.values_mut().iter_mut().enumerate() {
        *v = *v - t2_ext.values()[i];
    }
    let mut best: Option<(R, Grid<R>)> = None;
    let mut c = R::of_f64(1e-3);
    for _ in 0..64 {
        let mut trial = base.clone();
        for (i, v) in trial.values_mut().iter_mut().enumerate() {
            *v = *v + c * lift.values()[i];
        }
        let (m, _) = ellipticity_margins(&trial);
        if m >= target {
            return Ok(trial);
        }
        if best.as_ref().map(|(bm, _)| m > *bm).unwrap_or(true) {
            best = Some((m, trial));
        }
        c = c * R::of_f64(2.0);
    }
    // no elliptic start found; hand Newton the best attempt and let the
    // barrier logic report the breakdown
    Ok(best.map(|(_, g)| g).unwrap_or(base))
}

/// Decimate a grid by a factor of two along every axis (requires every
/// `shape - 1` to be even).  Coarse nodes coincide with fine nodes.
fn restrict_grid<R: Real>(g: &Grid<R>) -> Option<Grid<R>> {
    if g.shape().iter().any(|&s| (s - 1) % 2 != 0 || (s - 1) / 2 < 4) {
        return None;
    }
    let shape: Vec<usize> = g.shape().iter().map(|&s| (s - 1) / 2 + 1).collect();
    let values: Vec<R> = indices(&shape)
        .iter()
        .map(|idx| {
            let fid: Vec<usize> = idx.iter().map(|&i| 2 * i).collect();
            g.get(&fid)
        })
        .collect();
    Grid::new(g.bounds().to_vec(), shape, values).ok()
}

/// Multilinear interpolation of grid values at an arbitrary point in the
/// grid's bounding box.
fn interpolate<R: Real>(g: &Grid<R>, p: &[R]) -> R {
    let ndim = g.ndim();
    let mut base = vec![0usize; ndim];
    let mut frac = vec![R::zero(); ndim];
    for a in 0..ndim {
        let (lo, _) = g.bounds()[a];
        let s = (p[a] - lo) / g.spacing()[a];
        let mut i = s.to_f64_().floor().max(0.0) as usize;
        if i + 1 >= g.shape()[a] {
            i = g.shape()[a] - 2;
        }
        base[a] = i;
        frac[a] = (s - R::of_usize(i)).max(R::zero()).min(R::one());
    }
    let mut out = R::zero();
    for corner in 0..(1usize << ndim) {
        let mut w = R::one();
        let mut idx = base.clone();
        for a in 0..ndim {
            if corner & (1 << a) != 0 {
                idx[a] += 1;
                w = w * frac[a];
            } else {
                w = w * (R::one() - frac[a]);
            }
        }
        out = out + w * g.get(&idx);
    }
    out
}

/// Coarse-grid continuation: solve the problem on a grid decimated by two,
/// then transfer the coarse solution to the fine grid through its combined
/// Laplacian.  Piecewise-multilinear prolongation of u itself would have
/// zero second differences inside coarse cells (outside the ellipticity
/// cone), so instead the smooth source
///   s = sqrt((u_tt - lap_x u)^2 + 4 (1 + |grad u_t|^2))  (= lap u when Q = 1)
/// is interpolated and one Poisson solve lap w = s with the fine Dirichlet
/// data produces the starting point.  Returns `None` when the grid cannot
/// be coarsened or the coarse solve does not converge.
fn continuation_guess<R: Real>(boundary: &Grid<R>, config: &SolveConfig<R>) -> Option<Grid<R>> {
    let coarse_boundary = restrict_grid(boundary)?;
    let (coarse, report) = newton_solve(&coarse_boundary, config).ok()?;
    if report.status != SolveStatus::Converged {
        return None;
    }
    // combined Laplacian of the coarse solution, extended to the coarse
    // boundary by clamping to the nearest interior node
    let four = R::of_f64(4.0);
    let s_values: Vec<R> = indices(coarse.shape())
        .iter()
        .map(|idx| {
            let clamped: Vec<usize> = idx
                .iter()
                .zip(coarse.shape())
                .map(|(&i, &s)| i.clamp(1, s - 2))
                .collect();
            let o = coarse.offset(&clamped);
            let u_tt = coarse.d2(o, 0);
            let lap_x: R = (1..coarse.ndim()).map(|a| coarse.d2(o, a)).sum();
            let grad_sq: R = (1..coarse.ndim())
                .map(|a| {
                    let c = coarse.d2_cross(o, 0, a);
                    c * c
                })
                .sum();
            let diff = u_tt - lap_x;
            (diff * diff + four * (R::one() + grad_sq)).sqrt()
        })
        .collect();
    let s_coarse = Grid::new(coarse.bounds().to_vec(), coarse.shape().to_vec(), s_values).ok()?;
    let s_fine: Vec<R> = boundary
        .interior_indices()
        .iter()
        .map(|idx| interpolate(&s_coarse, &boundary.point(idx)))
        .collect();
    poisson_extension(boundary, Some(&s_fine)).ok()
}

/// Damped Newton iteration for Q(D^2 u) = 1 with the given Dirichlet
/// data (boundary values of `boundary`; its interior is ignored).
pub fn newton_solve<R: Real>(
    boundary: &Grid<R>,
    config: &SolveConfig<R>,
) -> Result<(Grid<R>, SolveReport<R>)> {
    config.validate()?;
    let ndim = boundary.ndim();
    if !(2..=3).contains(&ndim) {
        return Err(Error::Unsupported(
            "solver covers n = 1 (2D grid) and n = 2 (3D grid)".into(),
        ));
    }
    let floor = config.ellipticity_floor;
    let mut u = match continuation_guess(boundary, config) {
        Some(g) => g,
        None => initial_guess(boundary, floor)?,
    };
    let ishape: Vec<usize> = u.shape().iter().map(|&s| s - 2).collect();
    let interior = u.interior_indices();
    let sup = |r: &[R]| r.iter().fold(R::zero(), |m, &v| m.max(v.abs()));

    let mut resid = assemble_residual(&u);
    let mut rn = sup(&resid);
    let mut residual_norms = vec![rn];
    let mut step_sizes = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut iters = 0usize;

    for _ in 0..config.max_newton_iters {
        if rn <= config.newton_tol {
            status = SolveStatus::Converged;
            break;
        }
        iters += 1;
        let (jac, _elliptic) = linearized_operator(&u, floor);
        let rhs: Vec<R> = resid.iter().map(|&r| -r).collect();
        let delta = match solve_linear(&jac, &rhs, ndim, &ishape, config.linear_tol) {
            Ok(d) => d,
            Err(_) => {
                status = SolveStatus::Stalled;
                break;
            }
        };
        // fraction-to-the-boundary: a single step may not collapse the
        // ellipticity margin, or the iteration crawls along the barrier
        let (m0_utt, m0_lap) = ellipticity_margins(&u);
        let keep = R::of_f64(0.05);
        let utt_floor = floor.max(keep * m0_utt);
        let lap_floor = floor.max(keep * m0_lap);
        let mut step = R::one();
        let mut accepted = false;
        let mut barrier_blocked = true;
        for _ in 0..=config.max_backtracks {
            let mut trial = u.clone();
            for (k, idx) in interior.iter().enumerate() {
                let v = trial.get(idx) + step * delta[k];
                trial.set(idx, v);
            }
            let trial_resid = assemble_residual(&trial);
            let trial_rn = sup(&trial_resid);
            let (m_utt, m_lap) = ellipticity_margins(&trial);
            let inside_cone = m_utt >= utt_floor && m_lap >= lap_floor;
            if trial_rn < rn {
                barrier_blocked = barrier_blocked && !inside_cone;
                if inside_cone {
                    u = trial;
                    resid = trial_resid;
                    rn = trial_rn;
                    residual_norms.push(rn);
                    step_sizes.push(step);
                    accepted = true;
                    break;
                }
            } else {
                barrier_blocked = false;
            }
            step = step * config.line_search_shrink;
        }
        if !accepted {
            status = if barrier_blocked {
                SolveStatus::EllipticityBreakdown
            } else {
                SolveStatus::Stalled
            };
            break;
        }
        if rn <= config.newton_tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let margin = ellipticity_margins(&u);
    let converged = status == SolveStatus::Converged
        && rn <= config.newton_tol
        && margin.0 >= floor
        && margin.1 >= floor;
    if status == SolveStatus::Converged && !converged {
        status = SolveStatus::EllipticityBreakdown;
    }
    Ok((
        u,
        SolveReport {
            residual_norms,
            step_sizes,
            final_residual: rn,
            ellipticity_margin: margin,
            converged,
            status,
            newton_iterations: iters,
        },
    ))
}

fn sup_norm<R: Real>(r: &[R]) -> R {
    r.iter().fold(R::zero(), |m, &v| m.max(v.abs()))
}

/// Max interior error against an exact polynomial solution.
pub fn interior_error_max<R: Real>(u: &Grid<R>, exact: &ExactPoly) -> f64 {
    let mut max_err = 0.0_f64;
    for idx in u.interior_indices() {
        let p: Vec<f64> = u.point(&idx).iter().map(|v| v.to_f64_()).collect();
        let e = (u.get(&idx).to_f64_() - exact.eval_f64(&p)).abs();
        max_err = max_err.max(e);
    }
    max_err
}

// ------------------------------------------------------------------
// Problem 3.1 probing
// ------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Probe31Row {
    /// Edge length of the box [0, L]^(n+1).
    pub domain: f64,
    pub h: f64,
    /// max - min of discrete u_tt over the fixed core sub-box.
    pub osc_utt: f64,
    pub converged: bool,
    pub final_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Probe31Report {
    pub rows: Vec<Probe31Row>,
    /// False when any solve failed to converge (partial report).
    pub complete: bool,
}

/// Solve the Dirichlet problem on nested boxes [0, L]^(n+1) with data
/// from `base` plus `amplitude * perturbation` on the boundary, and
/// report the interior oscillation of discrete u_tt on a fixed core
/// sub-box (the central half of the smallest domain). The trend is
/// emitted as data; no claim about the open problem is made.
pub fn probe_problem31(
    base: &EntireSolution,
    perturbation: Option<&ExactPoly>,
    amplitude: f64,
    domains: &[f64],
    points_per_axis: usize,
    config: &SolveConfig<f64>,
) -> Result<Probe31Report> {
    if !(1..=2).contains(&base.n) {
        return Err(Error::Unsupported("probe31 covers n = 1 and n = 2".into()));
    }
    if domains.is_empty() || domains.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("domains must be strictly increasing".into()));
    }
    if let Some(p) = perturbation {
        if p.nvars() != base.n + 1 {
            return Err(Error::InvalidInput(
                "perturbation must be a polynomial in (t, x1..xn)".into(),
            ));
        }
    }
    let ndim = base.n + 1;
    let l0 = domains[0];
    let core = (l0 * 0.25, l0 * 0.75);
    let mut rows = Vec::new();
    let mut complete = true;
    for &l in domains {
        let bounds = vec![(0.0, l); ndim];
        let shape = vec![points_per_axis; ndim];
        let data = Grid::<f64>::from_fn(bounds, shape, |p| {
            let mut v = base.u.eval_f64(p);
            if let Some(q) = perturbation {
                v += amplitude * q.eval_f64(p);
            }
            v
        })?;
        let (u, report) = newton_solve(&data, config)?;
        let mut min_utt = f64::INFINITY;
        let mut max_utt = f64::NEG_INFINITY;
        for idx in u.interior_indices() {
            let p = u.point(&idx);
            if p.iter().all(|&c| c >= core.0 && c <= core.1) {
                let v = u.d2(u.offset(&idx), 0);
                min_utt = min_utt.min(v);
                max_utt = max_utt.max(v);
            }
        }
        let osc = if max_utt >= min_utt { max_utt - min_utt } else { f64::NAN };
        complete = complete && report.converged;
        rows.push(Probe31Row {
            domain: l,
            h: l / (points_per_axis - 1) as f64,
            osc_utt: osc,
            converged: report.converged,
            final_residual: report.final_residual,
        });
    }
    Ok(Probe31Report { rows, complete })
}
