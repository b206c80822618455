//! Uniform tensor grids over boxes and the central-difference stencils
//! shared by the verifier, the transform and the Dirichlet solver.
//!
//! Axis 0 is always the t axis; axes 1..=n are spatial.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::ExactPoly;

/// Scalar field sampled on a uniform tensor grid. Values are stored
/// row-major with axis 0 (t) slowest.
#[derive(Clone, Debug)]
pub struct Grid<R: Real> {
    bounds: Vec<(R, R)>,
    shape: Vec<usize>,
    spacing: Vec<R>,
    strides: Vec<usize>,
    values: Vec<R>,
}

impl<R: Real> Grid<R> {
    pub fn new(bounds: Vec<(R, R)>, shape: Vec<usize>, values: Vec<R>) -> Result<Self> {
        if bounds.len() != shape.len() {
            return Err(Error::InvalidInput("bounds/shape rank mismatch".into()));
        }
        if shape.is_empty() {
            return Err(Error::InvalidInput("grid must have at least one axis".into()));
        }
        for (i, &s) in shape.iter().enumerate() {
            if s < 5 {
                return Err(Error::InvalidInput(format!(
                    "axis {i} has {s} points; at least 5 required for second differences"
                )));
            }
            if bounds[i].1 <= bounds[i].0 {
                return Err(Error::InvalidInput(format!("axis {i} has empty extent")));
            }
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match shape product {total}",
                values.len()
            )));
        }
        let spacing = bounds
            .iter()
            .zip(&shape)
            .map(|(&(lo, hi), &s)| (hi - lo) / R::of_usize(s - 1))
            .collect();
        let strides = strides_of(&shape);
        Ok(Grid { bounds, shape, spacing, strides, values })
    }

    pub fn from_fn(
        bounds: Vec<(R, R)>,
        shape: Vec<usize>,
        f: impl Fn(&[R]) -> R,
    ) -> Result<Self> {
        let total: usize = shape.iter().product();
        let mut proto = Grid {
            bounds: bounds.clone(),
            shape: shape.clone(),
            spacing: bounds
                .iter()
                .zip(&shape)
                .map(|(&(lo, hi), &s)| (hi - lo) / R::of_usize(s.max(2) - 1))
                .collect(),
            strides: strides_of(&shape),
            values: Vec::new(),
        };
        let mut values = Vec::with_capacity(total);
        let mut point = vec![R::zero(); shape.len()];
        for idx in indices(&shape) {
            for (a, &i) in idx.iter().enumerate() {
                point[a] = proto.coord(a, i);
            }
            values.push(f(&point));
        }
        proto.values = values;
        Grid::new(proto.bounds, proto.shape, proto.values)
    }

    /// Sample a polynomial in (t, x1..xn); the grid rank must equal
    /// the polynomial's variable count.
    pub fn sample_poly(
        poly: &ExactPoly,
        bounds: Vec<(R, R)>,
        shape: Vec<usize>,
    ) -> Result<Self> {
        if poly.nvars() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "polynomial has {} variables, grid rank is {}",
                poly.nvars(),
                shape.len()
            )));
        }
        Grid::from_fn(bounds, shape, |p| {
            let pf: Vec<f64> = p.iter().map(|v| v.to_f64_()).collect();
            R::of_f64(poly.eval_f64(&pf))
        })
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn bounds(&self) -> &[(R, R)] {
        &self.bounds
    }
    pub fn spacing(&self) -> &[R] {
        &self.spacing
    }
    pub fn values(&self) -> &[R] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [R] {
        &mut self.values
    }

    pub fn coord(&self, axis: usize, i: usize) -> R {
        self.bounds[axis].0 + self.spacing[axis] * R::of_usize(i)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<R> {
        idx.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn get(&self, idx: &[usize]) -> R {
        self.values[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: R) {
        let o = self.offset(idx);
        self.values[o] = v;
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Second central difference along `axis` at a linear offset that is
    /// at least one cell inset on that axis.
    pub fn d2(&self, offset: usize, axis: usize) -> R {
        let s = self.strides[axis];
        let h = self.spacing[axis];
        (self.values[offset + s] - R::of_f64(2.0) * self.values[offset]
            + self.values[offset - s])
            / (h * h)
    }

    /// First central difference along `axis`.
    pub fn d1(&self, offset: usize, axis: usize) -> R {
        let s = self.strides[axis];
        (self.values[offset + s] - self.values[offset - s])
            / (R::of_f64(2.0) * self.spacing[axis])
    }

    /// Mixed second central difference along two distinct axes.
    pub fn d2_cross(&self, offset: usize, axis_a: usize, axis_b: usize) -> R {
        let sa = self.strides[axis_a];
        let sb = self.strides[axis_b];
        (self.values[offset + sa + sb] - self.values[offset + sa - sb]
            - self.values[offset - sa + sb]
            + self.values[offset - sa - sb])
            / (R::of_f64(4.0) * self.spacing[axis_a] * self.spacing[axis_b])
    }

    /// Multi-indices of the interior (one-cell inset on every axis).
    pub fn interior_indices(&self) -> Vec<Vec<usize>> {
        let ranges: Vec<(usize, usize)> = self.shape.iter().map(|&s| (1, s - 1)).collect();
        indices_in(&ranges)
    }

    /// True when the index touches any face of the box.
    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.shape)
            .any(|(&i, &s)| i == 0 || i == s - 1)
    }

    pub fn max_abs(&self) -> R {
        self.values
            .iter()
            .fold(R::zero(), |m, v| m.max(v.abs()))
    }
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

/// All multi-indices of a shape, row-major (axis 0 slowest).
pub fn indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let ranges: Vec<(usize, usize)> = shape.iter().map(|&s| (0, s)).collect();
    indices_in(&ranges)
}

/// All multi-indices with idx[a] in [lo_a, hi_a).
pub fn indices_in(ranges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if ranges.iter().any(|&(lo, hi)| lo >= hi) {
        return out;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|&(lo, _)| lo).collect();
    loop {
        out.push(idx.clone());
        let mut a = ranges.len();
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < ranges[a].1 {
                break;
            }
            idx[a] = ranges[a].0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_exact_on_quadratics() {
        // u = t^2 + 3 t x + x^2 on a 2D grid
        let g: Grid<f64> = Grid::from_fn(
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![9, 9],
            |p| p[0] * p[0] + 3.0 * p[0] * p[1] + p[1] * p[1],
        )
        .unwrap();
        let idx = [4usize, 4];
        let o = g.offset(&idx);
        assert!((g.d2(o, 0) - 2.0).abs() < 1e-12);
        assert!((g.d2(o, 1) - 2.0).abs() < 1e-12);
        assert!((g.d2_cross(o, 0, 1) - 3.0).abs() < 1e-12);
        let (t, x) = (g.coord(0, 4), g.coord(1, 4));
        assert!((g.d1(o, 0) - (2.0 * t + 3.0 * x)).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_axes() {
        let r: Result<Grid<f64>> = Grid::from_fn(vec![(0.0, 1.0)], vec![4], |_| 0.0);
        assert!(r.is_err());
    }

    #[test]
    fn interior_misses_boundary() {
        let g: Grid<f64> =
            Grid::from_fn(vec![(0.0, 1.0), (0.0, 1.0)], vec![5, 6], |_| 0.0).unwrap();
        let interior = g.interior_indices();
        assert_eq!(interior.len(), 3 * 4);
        assert!(interior.iter().all(|i| !g.is_boundary(i)));
    }

    #[test]
    fn works_in_f32_too() {
        let g: Grid<f32> =
            Grid::from_fn(vec![(0.0_f32, 1.0)], vec![5], |p| p[0] * p[0]).unwrap();
        let o = g.offset(&[2]);
        assert!((g.d2(o, 0) - 2.0).abs() < 1e-3);
    }
}
