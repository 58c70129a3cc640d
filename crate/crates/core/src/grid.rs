//! Rectangular sampling lattices and real-valued data on them.
//!
//! Storage is row-major with the x-index fastest: node `(i, j)` lives at
//! `j * nx + i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest node count per axis: interior second-order stencils plus
/// boundary rows need five nodes.
pub const MIN_NODES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIndex {
    pub i: usize,
    pub j: usize,
}

impl NodeIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        NodeIndex { i, j }
    }
}

/// Closed axis-aligned rectangle sampled on a uniform lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridDomain {
    pub fn new(x0: f64, y0: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidDomain("corner must be finite".into()));
        }
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(Error::InvalidDomain(format!("spacings must be positive, got dx={dx}, dy={dy}")));
        }
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidDomain(format!("need at least {MIN_NODES} nodes per axis, got {nx}x{ny}")));
        }
        Ok(GridDomain { x0, y0, dx, dy, nx, ny })
    }

    /// Grid spanning `[x0, x1] x [y0, y1]` with `nx x ny` nodes.
    pub fn from_bounds(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidDomain(format!(
                "upper corner ({x1}, {y1}) must exceed lower corner ({x0}, {y0})"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidDomain(format!("need at least {MIN_NODES} nodes per axis")));
        }
        let dx = (x1 - x0) / (nx - 1) as f64;
        let dy = (y1 - y0) / (ny - 1) as f64;
        GridDomain::new(x0, y0, dx, dy, nx, ny)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, k: usize) -> NodeIndex {
        NodeIndex { i: k % self.nx, j: k / self.nx }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn x1(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y1(&self) -> f64 {
        self.y(self.ny - 1)
    }

    /// Largest spacing; the `h` in `O(h^2)` statements.
    pub fn h(&self) -> f64 {
        self.dx.max(self.dy)
    }

    pub fn contains(&self, node: NodeIndex) -> bool {
        node.i < self.nx && node.j < self.ny
    }

    #[inline]
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    /// Flat indices of nodes off the boundary rows and columns.
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.ny - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| j * self.nx + i))
    }

    /// Same lattice with spacings halved (`2n - 1` nodes per axis).
    pub fn refined(&self) -> GridDomain {
        GridDomain {
            x0: self.x0,
            y0: self.y0,
            dx: self.dx / 2.0,
            dy: self.dy / 2.0,
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
        }
    }

    pub fn same_lattice(&self, other: &GridDomain) -> bool {
        self == other
    }
}

/// Real-valued data sampled on a [`GridDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    domain: GridDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidField(format!("expected {} values, got {}", domain.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let n = domain.node(k);
            return Err(Error::InvalidField(format!("non-finite value at node ({}, {})", n.i, n.j)));
        }
        Ok(ScalarField { domain, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariant.
    pub(crate) fn from_vec_unchecked(domain: GridDomain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        ScalarField { domain, values }
    }

    pub fn constant(domain: GridDomain, c: f64) -> Self {
        ScalarField { domain, values: vec![c; domain.len()] }
    }

    pub fn zeros(domain: GridDomain) -> Self {
        ScalarField::constant(domain, 0.0)
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(domain.len());
        for j in 0..domain.ny {
            let y = domain.y(j);
            for i in 0..domain.nx {
                values.push(f(domain.x(i), y));
            }
        }
        ScalarField { domain, values }
    }

    #[inline]
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { domain: self.domain, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert!(self.domain.same_lattice(&other.domain));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { domain: self.domain, values }
    }

    pub fn add_constant(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max of `|self|` over interior nodes only.
    pub fn interior_max_abs(&self) -> f64 {
        self.domain.interior_indices().fold(0.0, |m, k| m.max(self.values[k].abs()))
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

pub(crate) fn ensure_same_domain(a: &GridDomain, b: &GridDomain, what: &str) -> Result<()> {
    if a.same_lattice(b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{what}: fields live on different grids")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(GridDomain::new(0.0, 0.0, 0.1, 0.1, 4, 10).is_err());
        assert!(GridDomain::new(0.0, 0.0, 0.0, 0.1, 10, 10).is_err());
        assert!(GridDomain::new(0.0, 0.0, -0.1, 0.1, 10, 10).is_err());
        assert!(GridDomain::from_bounds(1.0, 0.0, 0.0, 1.0, 10, 10).is_err());
        assert!(GridDomain::new(0.0, 0.0, 0.1, 0.1, 5, 5).is_ok());
    }

    #[test]
    fn indexing_is_x_fastest() {
        let d = GridDomain::new(0.0, 0.0, 1.0, 1.0, 6, 5).unwrap();
        assert_eq!(d.index(2, 3), 3 * 6 + 2);
        assert_eq!(d.node(20), NodeIndex::new(2, 3));
        let f = ScalarField::from_fn(d, |x, y| x + 10.0 * y);
        assert_eq!(f.at(2, 3), 32.0);
    }

    #[test]
    fn from_bounds_hits_upper_corner() {
        let d = GridDomain::from_bounds(1.5, -0.75, 3.0, 0.75, 129, 65).unwrap();
        assert!((d.x1() - 3.0).abs() < 1e-14);
        assert!((d.y1() - 0.75).abs() < 1e-14);
        assert_eq!(d.refined().nx, 257);
    }

    #[test]
    fn rejects_non_finite_values() {
        let d = GridDomain::new(0.0, 0.0, 1.0, 1.0, 5, 5).unwrap();
        let mut v = vec![0.0; 25];
        v[7] = f64::NAN;
        assert!(ScalarField::new(d, v).is_err());
        assert!(ScalarField::new(d, vec![0.0; 24]).is_err());
    }
}
