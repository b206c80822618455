//! Acceptance gate: ten criteria, one pass/fail line each. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines on
//! success; they are printed on failure regardless.

use donaldson::builder::{build_entire_solution, catalog, harmonic_catalog, split_g};
use donaldson::complexify::{
    build_cma_solution, curvature_spot_check, hessian_det_residual, real_to_complex_bridge,
    VAR_W, VAR_WBAR, VAR_Z, VAR_ZBAR,
};
use donaldson::dirichlet::{
    assemble_residual, linearized_operator, newton_solve, probe_problem31, SolveConfig,
};
use donaldson::gaussian::GaussianRational;
use donaldson::grid::Grid;
use donaldson::io::poly_to_json_string;
use donaldson::poly::Coeff;
use donaldson::transform::{
    donaldson_transform_numeric, donaldson_transform_symbolic, harmonicity_residual,
    liouville_diagnostic, HarmonicityReport, LiouvilleVerdict, Stats, Theta, TransformResult,
};
use donaldson::verifier::{log_log_slope, q_operator_symbolic};
use donaldson::{BiPoly, ExactPoly, Rational};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Catalog used by criteria 1-3 and 9: all basis harmonics of degree
/// <= 4 for n in {1,2,3} at a in {1, 1/2}, plus harmonic_extra variants.
fn acceptance_catalog() -> Vec<donaldson::builder::EntireSolution> {
    let a_values = [rat(1, 1), rat(1, 2)];
    let mut members = Vec::new();
    for n in 1..=3usize {
        members.extend(catalog(n, 4, &a_values).unwrap());
    }
    // harmonic_extra variants on the n = 2 saddle member
    let b = ExactPoly::var(2, 0).pow(2).sub(&ExactPoly::var(2, 1).pow(2));
    for extra in harmonic_catalog(2, 3).unwrap().iter().take(4) {
        members.push(build_entire_solution(&rat(1, 2), &b, 2, Some(extra)).unwrap());
    }
    members
}

fn criterion_1() -> Result<String, String> {
    let members = acceptance_catalog();
    if members.len() < 20 {
        return Err(format!("catalog too small: {}", members.len()));
    }
    for sol in &members {
        let q = q_operator_symbolic(&sol.u);
        if q != ExactPoly::one(sol.n + 1) {
            return Err(format!("Q != 1 for n={} b={:?}", sol.n, sol.b));
        }
        // byte-exact: serialized Q matches the serialized constant 1
        let q_bytes = poly_to_json_string(&q).map_err(|e| e.to_string())?;
        let expect =
            poly_to_json_string(&ExactPoly::one(sol.n + 1)).map_err(|e| e.to_string())?;
        if q_bytes != expect {
            return Err(format!("serialization mismatch: {q_bytes}"));
        }
    }
    Ok(format!("{} members, Q(D^2 u) = 1 byte-exact", members.len()))
}

fn criterion_2() -> Result<String, String> {
    let members = acceptance_catalog();
    for sol in &members {
        let (_, lap_f) = split_g(sol).map_err(|e| e.to_string())?;
        let expect = rat(1, 1) / (rat(2, 1) * sol.a.clone());
        if lap_f != expect {
            return Err(format!("lap f = {lap_f} != 1/(2a) for a = {}", sol.a));
        }
    }
    Ok(format!("lap f = 1/(2a) exactly for all {} members", members.len()))
}

fn criterion_3() -> Result<String, String> {
    let members = acceptance_catalog();
    for sol in &members {
        let r = donaldson_transform_symbolic(sol).map_err(|e| e.to_string())?;
        let expect = rat(1, 1) / (rat(2, 1) * sol.a.clone());
        if r.dtheta_dz_exact.as_ref() != Some(&expect) {
            return Err(format!("dtheta/dz != 1/(2a) for a = {}", sol.a));
        }
        match harmonicity_residual(&r).map_err(|e| e.to_string())? {
            HarmonicityReport::Symbolic(lap) => {
                if !lap.is_zero() {
                    return Err(format!("lap theta != 0 for n={} b={:?}", sol.n, sol.b));
                }
            }
            _ => return Err("expected symbolic harmonicity report".into()),
        }
    }
    Ok(format!(
        "lap theta = 0 and dtheta/dz = 1/(2a) exactly for all {} members",
        members.len()
    ))
}

fn criterion_4() -> Result<String, String> {
    // a = 1 keeps the per-column u_t ranges overlapping on the unit box
    let sol = build_entire_solution(&rat(1, 1), &ExactPoly::var(1, 0), 1, None).unwrap();
    let theta_sym = |z: f64, x: f64| (z - x) / 2.0;
    let mut lap_maxes = Vec::new();
    let mut sup_err_fine = 0.0_f64;
    for &m in &[33usize, 65] {
        let g: Grid<f64> =
            Grid::sample_poly(&sol.u, vec![(0.0, 1.0), (0.0, 1.0)], vec![m, m])
                .map_err(|e| e.to_string())?;
        let r = donaldson_transform_numeric(&g).map_err(|e| e.to_string())?;
        let theta = match &r.theta {
            Theta::Numeric(t) => t,
            _ => return Err("expected numeric theta".into()),
        };
        if m == 65 {
            for idx in donaldson::grid::indices(theta.shape()) {
                let p = theta.point(&idx);
                sup_err_fine = sup_err_fine.max((theta.get(&idx) - theta_sym(p[0], p[1])).abs());
            }
        }
        match harmonicity_residual(&r).map_err(|e| e.to_string())? {
            HarmonicityReport::Numeric(rep) => lap_maxes.push(rep.max_abs),
            _ => return Err("expected numeric harmonicity report".into()),
        }
    }
    if sup_err_fine > 1e-3 {
        return Err(format!("|theta_num - theta_sym| = {sup_err_fine} > 1e-3 at h = 1/64"));
    }
    // theta is linear on this member, so the FD Laplacian residual sits
    // at roundoff on every grid; that counts as passing the refinement
    // test (Exact branch), mirroring OrderEstimate::Exact
    let roundoff = lap_maxes.iter().all(|&m| m <= 1e-7);
    let ratio = lap_maxes[0] / lap_maxes[1];
    if !roundoff && !(3.5..=4.5).contains(&ratio) {
        return Err(format!("residual ratio {ratio} outside [3.5, 4.5], maxes {lap_maxes:?}"));
    }
    Ok(format!(
        "sup error {sup_err_fine:.2e} <= 1e-3; Laplacian residuals {lap_maxes:?} ({})",
        if roundoff { "roundoff-exact on both grids" } else { "ratio in [3.5, 4.5]" }
    ))
}

fn gr(n: i64, d: i64) -> GaussianRational {
    GaussianRational::from_ratio(n, d)
}

fn bvar(i: usize) -> BiPoly {
    BiPoly::var(4, i)
}

fn criterion_5() -> Result<String, String> {
    // complex members: anti-holomorphic b(wbar) of degree <= 3, z-harmonic
    // real f, a in {1, 1/2, 2}
    let wbar = bvar(VAR_WBAR);
    let bs: Vec<BiPoly> = vec![
        BiPoly::zero(4),
        wbar.clone(),
        wbar.scale(&gr(2, 1)),
        wbar.pow(2),
        wbar.pow(2).scale(&gr(1, 2)),
        wbar.pow(3),
        wbar.clone().add(&wbar.pow(3)),
        wbar.pow(2).sub(&wbar.clone()),
    ];
    let fs: Vec<BiPoly> = vec![
        BiPoly::zero(4),
        bvar(VAR_Z).pow(2).add(&bvar(VAR_ZBAR).pow(2)),
    ];
    let mut count = 0usize;
    for a in [rat(1, 1), rat(1, 2), rat(2, 1)] {
        for b in &bs {
            for f in &fs {
                let v = build_cma_solution(&a, b, f).map_err(|e| e.to_string())?;
                if !hessian_det_residual(&v).is_zero() {
                    return Err(format!("det - 1 != 0 for a = {a}, b = {b:?}"));
                }
                count += 1;
            }
        }
    }
    // bridge identity on real n = 2 catalog members
    let members = catalog(2, 4, &[rat(1, 1), rat(1, 2)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<[f64; 3]> = (0..12)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let mut bridged = 0usize;
    for sol in members.iter().take(8) {
        let rep = real_to_complex_bridge(&sol.u, &pts).map_err(|e| e.to_string())?;
        if !rep.exact_identity {
            return Err(format!("bridge identity fails for b = {:?}", sol.b));
        }
        if rep.max_deviation > 1e-10 {
            return Err(format!("bridge deviation {} at samples", rep.max_deviation));
        }
        bridged += 1;
    }
    if count < 10 || bridged < 5 {
        return Err(format!("only {count} complex members / {bridged} bridges"));
    }
    Ok(format!(
        "{count} complex members with det = 1 exactly; bridge identity exact for {bridged} real members"
    ))
}

fn criterion_6() -> Result<String, String> {
    // constant-Hessian members: b affine in wbar
    let wbar = bvar(VAR_WBAR);
    let members = [
        build_cma_solution(&rat(1, 1), &wbar, &BiPoly::zero(4)),
        build_cma_solution(&rat(2, 1), &wbar.scale(&gr(1, 2)), &BiPoly::zero(4)),
        build_cma_solution(&rat(1, 2), &BiPoly::zero(4), &BiPoly::zero(4)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut max_flat = 0.0_f64;
    for v in &members {
        let v = v.as_ref().map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let z = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let c = curvature_spot_check(v, z, w, 1e-2).map_err(|e| e.to_string())?;
            max_flat = max_flat.max(c);
        }
    }
    if max_flat > 1e-6 {
        return Err(format!("flat member curvature {max_flat} > 1e-6"));
    }
    // non-flat control: (z zbar)^2 / 2 + z zbar + w wbar at (1, 0)
    let zz = bvar(VAR_Z).mul(&bvar(VAR_ZBAR));
    let control = zz.pow(2).scale(&gr(1, 2)).add(&zz).add(&bvar(VAR_W).mul(&bvar(VAR_WBAR)));
    let c = curvature_spot_check(&control, (1.0, 0.0), (0.0, 0.0), 1e-2)
        .map_err(|e| e.to_string())?;
    if c <= 1e-2 {
        return Err(format!("non-flat control curvature {c} <= 1e-2"));
    }
    Ok(format!(
        "flat members max curvature {max_flat:.2e} <= 1e-6; control {c:.3} > 1e-2"
    ))
}

/// Exact non-polynomial n = 1 solution u = t^2/(2(1+x)) + (1+x)^3/6:
/// u_tt = 1/(1+x), and u_tt*u_xx - u_tx^2 = 1 identically. The spec's
/// "quartic n = 1 member" does not exist (n = 1 family members are
/// quadratic, on which the stencils are exact), so this supplies the
/// genuinely inexact manufactured truth the ratio test needs.
fn exact_n1(p: &[f64]) -> f64 {
    let (t, x) = (p[0], p[1]);
    t * t / (2.0 * (1.0 + x)) + (1.0 + x).powi(3) / 6.0
}

fn criterion_7() -> Result<String, String> {
    let cfg = SolveConfig::<f64>::default();
    // n = 1: three grids, error ratios ~ 4
    let mut errs = Vec::new();
    for &m in &[33usize, 65, 129] {
        let data: Grid<f64> =
            Grid::from_fn(vec![(0.0, 1.0), (0.0, 1.0)], vec![m, m], exact_n1)
                .map_err(|e| e.to_string())?;
        let (u, rep) = newton_solve(&data, &cfg).map_err(|e| e.to_string())?;
        if !rep.converged || rep.newton_iterations > 10 || rep.final_residual > 1e-10 {
            return Err(format!(
                "n=1 m={m}: status {:?}, {} iters, residual {}",
                rep.status, rep.newton_iterations, rep.final_residual
            ));
        }
        let mut e = 0.0_f64;
        for idx in u.interior_indices() {
            e = e.max((u.get(&idx) - exact_n1(&u.point(&idx))).abs());
        }
        errs.push(e);
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        if !(3.5..=4.5).contains(&ratio) {
            return Err(format!("n=1 error ratio {ratio} outside [3.5, 4.5]; errors {errs:?}"));
        }
    }
    // n = 2: quartic family member
    let b = ExactPoly::var(2, 0).pow(2).sub(&ExactPoly::var(2, 1).pow(2));
    let sol = build_entire_solution(&rat(1, 2), &b, 2, None).unwrap();
    let mut errs2 = Vec::new();
    for &m in &[17usize, 33] {
        let data: Grid<f64> =
            Grid::sample_poly(&sol.u, vec![(0.0, 1.0); 3], vec![m, m, m])
                .map_err(|e| e.to_string())?;
        let (u, rep) = newton_solve(&data, &cfg).map_err(|e| e.to_string())?;
        if !rep.converged || rep.newton_iterations > 10 || rep.final_residual > 1e-10 {
            return Err(format!(
                "n=2 m={m}: status {:?}, {} iters, residual {}",
                rep.status, rep.newton_iterations, rep.final_residual
            ));
        }
        let mut e = 0.0_f64;
        for idx in u.interior_indices() {
            e = e.max((u.get(&idx) - sol.u.eval_f64(&u.point(&idx))).abs());
        }
        errs2.push(e);
    }
    let ratio2 = errs2[0] / errs2[1];
    if !(3.5..=4.5).contains(&ratio2) {
        return Err(format!("n=2 error ratio {ratio2} outside [3.5, 4.5]; errors {errs2:?}"));
    }
    Ok(format!(
        "n=1 errors {errs:?} (ratios in [3.5,4.5]); n=2 errors {errs2:?} (ratio {ratio2:.2})"
    ))
}

fn criterion_8() -> Result<String, String> {
    // linearized_operator vs central differences of assemble_residual.
    // The discrete residual is exactly quadratic in the grid values, so
    // the central difference equals the linearization to roundoff at
    // every probe step; that exactness (order "infinity") subsumes the
    // order-2 band and is reported as such.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_exact = 0.0_f64;
    let mut slopes = Vec::new();
    for ndim in [2usize, 3] {
        let shape = vec![7usize; ndim];
        let mut u: Grid<f64> = Grid::from_fn(vec![(0.0, 1.0); ndim], shape, |p| {
            p[0] * p[0] + 0.3 * p.iter().map(|v| v * v).sum::<f64>()
        })
        .map_err(|e| e.to_string())?;
        for v in u.values_mut() {
            *v += 0.01 * rng.gen_range(-1.0..1.0);
        }
        let interior = u.interior_indices();
        let phi: Vec<f64> = (0..interior.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (jac, _) = linearized_operator(&u, 1e-8);
        let mut lphi = vec![0.0; phi.len()];
        jac.matvec(&phi, &mut lphi);
        let mut pts = Vec::new();
        for &s in &[1e-1, 1e-2, 1e-3] {
            let perturb = |sign: f64| {
                let mut w = u.clone();
                for (k, idx) in interior.iter().enumerate() {
                    let v = w.get(idx) + sign * s * phi[k];
                    w.set(idx, v);
                }
                assemble_residual(&w)
            };
            let (rp, rm) = (perturb(1.0), perturb(-1.0));
            let err = lphi
                .iter()
                .enumerate()
                .map(|(k, &l)| (l - (rp[k] - rm[k]) / (2.0 * s)).abs())
                .fold(0.0_f64, f64::max);
            worst_exact = worst_exact.max(err);
            pts.push((s, err));
        }
        if pts.iter().any(|&(_, e)| e > 1e-8) {
            let slope = log_log_slope(&pts);
            if (slope - 2.0).abs() > 0.2 {
                return Err(format!("ndim {ndim}: probe order {slope} outside 2 +/- 0.2"));
            }
            slopes.push(slope);
        }
    }
    if slopes.is_empty() {
        Ok(format!(
            "central differences match the linearization to roundoff ({worst_exact:.2e}) at every probe step (exact; subsumes order 2 +/- 0.2)"
        ))
    } else {
        Ok(format!("probe orders {slopes:?} within 2 +/- 0.2"))
    }
}

fn criterion_9() -> Result<String, String> {
    // exact tier: zero variance on every catalog member
    for sol in acceptance_catalog() {
        let r = donaldson_transform_symbolic(&sol).map_err(|e| e.to_string())?;
        if r.dtheta_dz_stats.variance != 0.0 {
            return Err(format!("nonzero exact variance for b = {:?}", sol.b));
        }
        let rep = liouville_diagnostic(&r, 1e-6);
        if rep.verdict != LiouvilleVerdict::ConsistentWithConstant {
            return Err("exact member flagged non-constant".into());
        }
    }
    // synthetic non-constant control: theta = z + 0.1 z x
    let theta: Grid<f64> = Grid::from_fn(vec![(1.0, 2.0), (0.0, 1.0)], vec![17, 17], |p| {
        p[0] + 0.1 * p[0] * p[1]
    })
    .map_err(|e| e.to_string())?;
    let mut dvals = Vec::new();
    for idx in theta.interior_indices() {
        dvals.push(theta.d1(theta.offset(&idx), 0));
    }
    let synthetic = TransformResult {
        z_range: (1.0, 2.0),
        dtheta_dz_stats: Stats::of(&dvals),
        dtheta_dz_exact: None,
        theta: Theta::Numeric(theta),
    };
    let rep = liouville_diagnostic(&synthetic, 1e-6);
    if rep.verdict != LiouvilleVerdict::NonConstantOnWindow {
        return Err("synthetic control not flagged".into());
    }
    // solver-sourced theta: solve a family member, transform the output
    let sol = build_entire_solution(&rat(1, 2), &ExactPoly::var(1, 0), 1, None).unwrap();
    let data: Grid<f64> =
        Grid::sample_poly(&sol.u, vec![(0.0, 3.0), (0.0, 1.0)], vec![33, 33])
            .map_err(|e| e.to_string())?;
    let (u, rep_solve) = newton_solve(&data, &SolveConfig::default()).map_err(|e| e.to_string())?;
    if !rep_solve.converged {
        return Err(format!("solver-sourced solve failed: {:?}", rep_solve.status));
    }
    let h = 3.0 / 32.0;
    let tol = 10.0 * h * h;
    let r = donaldson_transform_numeric(&u).map_err(|e| e.to_string())?;
    let rep = liouville_diagnostic(&r, tol);
    if rep.verdict != LiouvilleVerdict::ConsistentWithConstant {
        return Err(format!(
            "solver-sourced variation {} > {tol}",
            rep.relative_variation
        ));
    }
    Ok(format!(
        "exact variance 0; synthetic control flagged; solver-sourced variation {:.2e} <= {tol:.2e}",
        rep.relative_variation
    ))
}

fn criterion_10() -> Result<String, String> {
    let sol = build_entire_solution(&rat(1, 2), &ExactPoly::var(1, 0), 1, None).unwrap();
    let cfg = SolveConfig::default();
    let domains = [1.0, 2.0, 4.0];
    let rep = probe_problem31(&sol, None, 0.0, &domains, 17, &cfg).map_err(|e| e.to_string())?;
    if !rep.complete || rep.rows.len() != domains.len() {
        return Err("zero-perturbation probe incomplete".into());
    }
    for row in &rep.rows {
        if !(row.osc_utt <= 10.0 * row.h * row.h) {
            return Err(format!("osc {} > 10 h^2 at L = {}", row.osc_utt, row.domain));
        }
    }
    // perturbed run: every domain reported, no silent failures
    let pert = ExactPoly::var(2, 0).mul(&ExactPoly::var(2, 1)); // t * x1
    let rep2 =
        probe_problem31(&sol, Some(&pert), 1e-3, &domains, 17, &cfg).map_err(|e| e.to_string())?;
    if rep2.rows.len() != domains.len() {
        return Err("perturbed probe dropped rows".into());
    }
    for row in &rep2.rows {
        if !row.osc_utt.is_finite() || !row.final_residual.is_finite() {
            return Err(format!("non-finite report entry at L = {}", row.domain));
        }
    }
    if !rep2.complete {
        return Err("perturbed probe reported non-convergence".into());
    }
    Ok(format!(
        "zero-perturbation osc <= 10 h^2 on {} domains; perturbed CSV complete",
        domains.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Result<String, String>)> = vec![
        ("1 exact family certification", criterion_1),
        ("2 delta-f consistency", criterion_2),
        ("3 transform harmonicity, exact tier", criterion_3),
        ("4 transform harmonicity, numeric tier", criterion_4),
        ("5 complex family certification", criterion_5),
        ("6 flatness spot checks", criterion_6),
        ("7 Dirichlet manufactured solutions", criterion_7),
        ("8 Jacobian consistency", criterion_8),
        ("9 Liouville diagnostic", criterion_9),
        ("10 probe31 harness", criterion_10),
    ];
    let mut failed = 0usize;
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("criterion {name}: PASS ({msg})"),
            Err(msg) => {
                println!("criterion {name}: FAIL ({msg})");
                failed += 1;
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
