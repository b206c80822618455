//! Entire solutions of Donaldson's equation `u_tt * lap(u) - |grad u_t|^2 = 1`
//! on R x R^n: exact construction and certification of the constant-`u_tt`
//! solution family, the Donaldson transform with its Liouville diagnostic,
//! the n=2 complex Monge-Ampere correspondence, and a damped-Newton
//! Dirichlet solver on boxes.
//!
//! The symbolic tier is exact (arbitrary-precision rationals, Gaussian
//! rationals on the complex side); the numeric tier is generic over the
//! floating scalar with `f64` aliases at the crate root.

pub mod builder;
pub mod cli;
pub mod complexify;
pub mod dirichlet;
pub mod error;
pub mod exprparse;
pub mod gaussian;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod transform;
pub mod verifier;

pub use error::{Error, Result};

/// Exact rational scalar used throughout the symbolic tier.
pub type Rational = num::rational::BigRational;

/// Polynomial in (t, x1..xn) or (x1..xn) with exact rational coefficients.
pub type ExactPoly = poly::Poly<Rational>;

/// Polynomial in (z, zbar, w, wbar) with Gaussian-rational coefficients.
pub type BiPoly = poly::Poly<gaussian::GaussianRational>;

/// Default numeric scalar for grids and solvers.
pub type GridField = grid::Grid<f64>;
