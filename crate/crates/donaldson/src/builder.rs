//! Construction of the constant-`u_tt` entire-solution family
//! `u = a t^2 + t b(x) + g(x)` with `b` harmonic and
//! `lap(g) = (1 + |grad b|^2) / (2a)`.

use num::rational::BigRational;
use num::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{harmonic_basis, invert_laplacian};
use crate::{ExactPoly, Rational};

/// A member of the solution family. Variable order in `u` is
/// (t, x1..xn); `b` and `g` live in the spatial variables only.
#[derive(Clone, Debug)]
pub struct EntireSolution {
    pub n: usize,
    pub a: Rational,
    pub b: ExactPoly,
    pub g: ExactPoly,
    pub u: ExactPoly,
}

impl EntireSolution {
    pub fn spatial_vars(&self) -> Vec<usize> {
        (1..=self.n).collect()
    }

    /// Check the defining identities exactly; used when loading bundles.
    pub fn validate(&self) -> Result<()> {
        let vars: Vec<usize> = (0..self.n).collect();
        let lap_b = self.b.laplacian(&vars)?;
        if !lap_b.is_zero() {
            return Err(Error::ConstraintViolation {
                what: "b is not harmonic".into(),
                residual: format!("{:?}", lap_b),
            });
        }
        let h = poisson_rhs(&self.a, &self.b)?;
        let resid = self.g.laplacian(&vars)?.sub(&h);
        if !resid.is_zero() {
            return Err(Error::ConstraintViolation {
                what: "lap(g) != (1 + |grad b|^2)/(2a)".into(),
                residual: format!("{:?}", resid),
            });
        }
        let rebuilt = assemble_u(&self.a, &self.b, &self.g);
        if rebuilt != self.u {
            return Err(Error::ConstraintViolation {
                what: "u != a t^2 + t b + g".into(),
                residual: format!("{:?}", rebuilt.sub(&self.u)),
            });
        }
        Ok(())
    }
}

fn two_a_inv(a: &Rational) -> Rational {
    BigRational::one() / (BigRational::from_integer(BigInt::from(2)) * a.clone())
}

/// h = (1 + |grad b|^2) / (2a) in the spatial variables.
fn poisson_rhs(a: &Rational, b: &ExactPoly) -> Result<ExactPoly> {
    let n = b.nvars();
    let vars: Vec<usize> = (0..n).collect();
    let grad2 = b.gradient_norm_sq(&vars)?;
    Ok(ExactPoly::one(n).add(&grad2).scale(&two_a_inv(a)))
}

/// u = a t^2 + t b + g with t inserted as variable 0.
fn assemble_u(a: &Rational, b: &ExactPoly, g: &ExactPoly) -> ExactPoly {
    let n = b.nvars();
    let t = ExactPoly::var(n + 1, 0);
    t.pow(2)
        .scale(a)
        .add(&t.mul(&b.insert_var(0)))
        .add(&g.insert_var(0))
}

/// Build a family member from (a, b), optionally adding a harmonic
/// function to g. Harmonicity of `b` (and of the extra) is verified,
/// never trusted.
pub fn build_entire_solution(
    a: &Rational,
    b: &ExactPoly,
    n: usize,
    harmonic_extra: Option<&ExactPoly>,
) -> Result<EntireSolution> {
    if a <= &BigRational::zero() {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if b.nvars() != n {
        return Err(Error::InvalidInput(format!(
            "b has {} variables, expected n = {n}",
            b.nvars()
        )));
    }
    let vars: Vec<usize> = (0..n).collect();
    let lap_b = b.laplacian(&vars)?;
    if !lap_b.is_zero() {
        return Err(Error::ConstraintViolation {
            what: "b is not harmonic".into(),
            residual: format!("{:?}", lap_b),
        });
    }
    let mut g = invert_laplacian(&poisson_rhs(a, b)?)?;
    if let Some(extra) = harmonic_extra {
        if extra.nvars() != n {
            return Err(Error::InvalidInput(
                "harmonic_extra has wrong number of variables".into(),
            ));
        }
        let lap_e = extra.laplacian(&vars)?;
        if !lap_e.is_zero() {
            return Err(Error::ConstraintViolation {
                what: "harmonic_extra is not harmonic".into(),
                residual: format!("{:?}", lap_e),
            });
        }
        g = g.add(extra);
    }
    let u = assemble_u(a, b, &g);
    Ok(EntireSolution { n, a: a.clone(), b: b.clone(), g, u })
}

/// Split g = b^2/(4a) + f and return (f, lap(f)).
///
/// The returned constant is 1/(2a): differentiating b^2/(4a) leaves
/// lap(f) = 1/(2a), which matches the governing Poisson equation.
pub fn split_g(sol: &EntireSolution) -> Result<(ExactPoly, Rational)> {
    let four_a = BigRational::from_integer(BigInt::from(4)) * sol.a.clone();
    let f = sol
        .g
        .sub(&sol.b.mul(&sol.b).scale(&(BigRational::one() / four_a)));
    let vars: Vec<usize> = (0..sol.n).collect();
    let lap_f = f.laplacian(&vars)?;
    if !lap_f.is_constant() {
        return Err(Error::InternalConsistency(format!(
            "lap(f) is not constant: {:?}",
            lap_f
        )));
    }
    Ok((f, lap_f.constant_term()))
}

/// Enumerate family members over the harmonic-polynomial catalog:
/// every basis harmonic of degree <= `max_degree` in `n` variables,
/// for each given `a`. Used by the certification suite and the CLI.
pub fn catalog(
    n: usize,
    max_degree: u32,
    a_values: &[Rational],
) -> Result<Vec<EntireSolution>> {
    let mut out = Vec::new();
    for a in a_values {
        for d in 0..=max_degree {
            for b in harmonic_basis::<Rational>(n, d)? {
                out.push(build_entire_solution(a, &b, n, None)?);
            }
        }
    }
    Ok(out)
}

/// Harmonic polynomials usable as `harmonic_extra`, degree <= max_degree.
pub fn harmonic_catalog(n: usize, max_degree: u32) -> Result<Vec<ExactPoly>> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        out.extend(harmonic_basis::<Rational>(n, d)?);
    }
    Ok(out)
}
