//! Dirichlet solvers for the minimal and maximal systems by Picard
//! iteration: coefficients are frozen from the current iterate and each
//! component is relaxed by SOR on the resulting linear equation.
//!
//! The 9-point stencil of the mixed derivative couples diagonal neighbours,
//! so sweeps use four colours `(i mod 2, j mod 2)`. Nodes of one colour are
//! independent and are updated in parallel; results do not depend on the
//! thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{first_fundamental_form, HeightMap, Signature};
use crate::grid::{GridDomain, ScalarField};
use crate::report::{to_json, GridInfo};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub max_outer: usize,
    /// Inner SOR stops when the largest change in one sweep is at most this.
    pub inner_tol: f64,
    /// Cap on SOR sweeps per outer step.
    pub max_inner: usize,
    /// Outer loop stops when the largest nodewise update is at most this.
    pub outer_tol: f64,
    pub relaxation: f64,
    /// Required lower bound on `sqrt(E G - F^2)` for the split system.
    pub spacelike_margin: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_outer: 200,
            inner_tol: 1e-10,
            max_inner: 20_000,
            outer_tol: 1e-9,
            relaxation: 1.5,
            spacelike_margin: 0.05,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ParamConstraintViolation(m.into()));
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be positive");
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad("relaxation must lie in (0, 2)");
        }
        if !(self.spacelike_margin >= 0.0 && self.spacelike_margin < 1.0) {
            return bad("spacelike_margin must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OuterStep {
    pub iteration: usize,
    pub update: f64,
    pub inner_sweeps: usize,
    /// Step length accepted by the spacelike line search (1 when undamped).
    pub damping: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: HeightMap,
    pub signature: Signature,
    pub history: Vec<OuterStep>,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn history_json(&self) -> String {
        #[derive(Serialize)]
        struct J<'a> {
            signature: Signature,
            grid: GridInfo,
            converged: bool,
            iterations: usize,
            history: &'a [OuterStep],
        }
        to_json(&J {
            signature: self.signature,
            grid: GridInfo::from(self.field.domain()),
            converged: true,
            iterations: self.iterations(),
            history: &self.history,
        })
    }
}

/// Transfinite bilinear (Coons) interpolation of the boundary values.
pub fn coons_patch(boundary: &ScalarField) -> ScalarField {
    let d = *boundary.domain();
    let b = |i, j| boundary.at(i, j);
    let (ni, nj) = (d.nx - 1, d.ny - 1);
    let mut out = boundary.clone();
    for j in 1..nj {
        let v = j as f64 / nj as f64;
        for i in 1..ni {
            let u = i as f64 / ni as f64;
            let val = (1.0 - v) * b(i, 0) + v * b(i, nj) + (1.0 - u) * b(0, j) + u * b(ni, j)
                - ((1.0 - u) * (1.0 - v) * b(0, 0)
                    + u * (1.0 - v) * b(ni, 0)
                    + (1.0 - u) * v * b(0, nj)
                    + u * v * b(ni, nj));
            out.values_mut()[d.index(i, j)] = val;
        }
    }
    out
}

/// Frozen stencil coefficients: `a f_xx + b f_xy + c f_yy = 0`.
struct Coefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

fn freeze(f: &HeightMap, signature: Signature) -> Coefficients {
    let m = first_fundamental_form(f, signature);
    Coefficients {
        a: m.g.values().to_vec(),
        b: m.f.values().iter().map(|v| -2.0 * v).collect(),
        c: m.e.values().to_vec(),
    }
}

/// One four-colour SOR sweep; returns the largest change.
fn sweep(d: &GridDomain, co: &Coefficients, u: &mut [f64], omega: f64) -> f64 {
    let (idx2, idy2, idxy4) = (1.0 / (d.dx * d.dx), 1.0 / (d.dy * d.dy), 1.0 / (4.0 * d.dx * d.dy));
    let nx = d.nx;
    let mut change = 0.0f64;
    for (ci, cj) in [(1usize, 1usize), (0, 1), (1, 0), (0, 0)] {
        let rows: Vec<usize> = (1..d.ny - 1).filter(|j| j % 2 == cj).collect();
        let src: &[f64] = u;
        let updates: Vec<(usize, Vec<f64>, f64)> = rows
            .par_iter()
            .map(|&j| {
                let mut vals = Vec::with_capacity(nx / 2);
                let mut row_change = 0.0f64;
                let start = if ci == 1 { 1 } else { 2 };
                let mut i = start;
                while i < nx - 1 {
                    let k = j * nx + i;
                    let (a, b, c) = (co.a[k], co.b[k], co.c[k]);
                    let cross = src[k + nx + 1] - src[k - nx + 1] - src[k + nx - 1] + src[k - nx - 1];
                    let num = a * idx2 * (src[k + 1] + src[k - 1])
                        + c * idy2 * (src[k + nx] + src[k - nx])
                        + b * idxy4 * cross;
                    let diag = 2.0 * (a * idx2 + c * idy2);
                    let delta = omega * (num / diag - src[k]);
                    row_change = row_change.max(delta.abs());
                    vals.push(src[k] + delta);
                    i += 2;
                }
                (j, vals, row_change)
            })
            .collect();
        for (j, vals, rc) in updates {
            change = change.max(rc);
            let start = if ci == 1 { 1 } else { 2 };
            for (t, v) in vals.into_iter().enumerate() {
                u[j * nx + start + 2 * t] = v;
            }
        }
    }
    change
}

fn inner_solve(f: &HeightMap, co: &Coefficients, opts: &SolveOptions) -> Result<(HeightMap, usize)> {
    let d = *f.domain();
    let mut comps = Vec::with_capacity(f.n());
    let mut sweeps = 0;
    for c in f.components() {
        let mut u = c.values().to_vec();
        for s in 1..=opts.max_inner {
            let ch = sweep(&d, co, &mut u, opts.relaxation);
            sweeps = sweeps.max(s);
            if ch <= opts.inner_tol || !ch.is_finite() {
                break;
            }
        }
        comps.push(ScalarField::new(d, u)?);
    }
    Ok((HeightMap::new(comps)?, sweeps))
}

fn max_update(a: &HeightMap, b: &HeightMap) -> f64 {
    a.components().iter().zip(b.components()).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

/// `a + t (b - a)` componentwise.
fn blend(a: &HeightMap, b: &HeightMap, t: f64) -> HeightMap {
    let comps = a.components().iter().zip(b.components()).map(|(x, y)| x.zip_map(y, |p, q| p + t * (q - p))).collect();
    HeightMap::new(comps).expect("same shape")
}

fn has_margin(f: &HeightMap, margin: f64) -> bool {
    let m = first_fundamental_form(f, Signature::Split);
    let m2 = margin * margin;
    (0..f.domain().len()).all(|k| m.e.values()[k] * m.g.values()[k] - m.f.values()[k].powi(2) >= m2)
}

const DIVERGENCE_WINDOW: usize = 20;
const DIVERGENCE_GROWTH: f64 = 10.0;
const MIN_DAMPING: f64 = 1e-6;

fn picard(boundary: &HeightMap, signature: Signature, opts: &SolveOptions) -> Result<Solution> {
    opts.validate()?;
    let d = *boundary.domain();
    if d.nx < 3 || d.ny < 3 {
        return Err(Error::InvalidDomain("solver needs at least 3 x 3 nodes".into()));
    }
    if !boundary.components().iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidField("non-finite boundary data".into()));
    }
    let mut f = HeightMap::new(boundary.components().iter().map(coons_patch).collect())?;
    if signature == Signature::Split && !has_margin(&f, opts.spacelike_margin) {
        // Pull the interior toward zero, keeping the Dirichlet data.
        let zero = HeightMap::new(
            boundary
                .components()
                .iter()
                .map(|c| {
                    let mut z = c.clone();
                    for k in d.interior_indices() {
                        z.values_mut()[k] = 0.0;
                    }
                    z
                })
                .collect(),
        )?;
        let mut t = 0.5;
        loop {
            let trial = blend(&zero, &f, t);
            if has_margin(&trial, opts.spacelike_margin) {
                f = trial;
                break;
            }
            t *= 0.5;
            if t < MIN_DAMPING {
                return Err(Error::SpacelikeUnreachable { iteration: 0 });
            }
        }
    }

    let mut history: Vec<OuterStep> = Vec::new();
    for it in 1..=opts.max_outer {
        let co = freeze(&f, signature);
        let (mut next, inner_sweeps) = inner_solve(&f, &co, opts)?;
        let mut damping = 1.0;
        if signature == Signature::Split {
            while !has_margin(&next, opts.spacelike_margin) {
                damping *= 0.5;
                if damping < MIN_DAMPING {
                    return Err(Error::SpacelikeUnreachable { iteration: it });
                }
                next = blend(&f, &next, 0.5);
            }
        }
        let update = max_update(&f, &next);
        if !update.is_finite() {
            return Err(Error::Diverged { iteration: it });
        }
        history.push(OuterStep { iteration: it, update, inner_sweeps, damping });
        f = next;
        if update <= opts.outer_tol {
            return Ok(Solution { field: f, signature, history });
        }
        if it > DIVERGENCE_WINDOW && update > DIVERGENCE_GROWTH * history[it - 1 - DIVERGENCE_WINDOW].update {
            return Err(Error::Diverged { iteration: it });
        }
    }
    let update = history.last().map_or(f64::NAN, |s| s.update);
    Err(Error::MaxIterations { iterations: opts.max_outer, update })
}

/// Minimal graph with the boundary values of `boundary`; interior values of
/// `boundary` are ignored.
pub fn solve_minimal(boundary: &HeightMap, opts: &SolveOptions) -> Result<Solution> {
    picard(&boundary.without_analytic(), Signature::Euclidean, opts)
}

/// Spacelike maximal graph with the boundary values of `boundary`.
pub fn solve_maximal(boundary: &HeightMap, opts: &SolveOptions) -> Result<Solution> {
    picard(&boundary.without_analytic(), Signature::Split, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{minimal_residual, Normalization};

    fn unit(n: usize) -> GridDomain {
        GridDomain::from_bounds(0.0, 0.0, 1.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn coons_reproduces_bilinear() {
        let d = unit(9);
        let f = ScalarField::from_fn(d, |x, y| 1.0 + x - 2.0 * y + 3.0 * x * y);
        assert!(coons_patch(&f.map(|v| v)).max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn affine_boundary_is_fixed_point() {
        let d = unit(17);
        let b = HeightMap::new(vec![
            ScalarField::from_fn(d, |x, y| 0.3 * x - 0.7 * y + 2.0),
            ScalarField::from_fn(d, |x, y| -x + 0.1 * y),
        ])
        .unwrap();
        let s = solve_minimal(&b, &SolveOptions::default()).unwrap();
        assert!(s.iterations() <= 2);
        assert!(minimal_residual(&s.field, Normalization::Scaled).max_abs <= 1e-9);
    }

    #[test]
    fn zero_boundary_maximal() {
        let d = unit(9);
        let s = solve_maximal(&HeightMap::zeros(d, 2).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(s.field.component(0).max_abs(), 0.0);
        assert_eq!(s.field.component(1).max_abs(), 0.0);
    }

    #[test]
    fn steep_affine_maximal_boundary_is_rejected() {
        let d = unit(9);
        let b = HeightMap::new(vec![ScalarField::from_fn(d, |x, y| 2f64.sqrt() * (x + y))]).unwrap();
        let err = solve_maximal(&b, &SolveOptions::default()).unwrap_err();
        assert_eq!(err.code(), "SPACELIKE_UNREACHABLE");
    }

    #[test]
    fn bad_relaxation_is_rejected() {
        let opts = SolveOptions { relaxation: 2.0, ..Default::default() };
        assert!(opts.validate().is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let d = unit(17);
        let b = HeightMap::new(vec![ScalarField::from_fn(d, |x, y| (x * y * 4.0).sin())]).unwrap();
        let opts = SolveOptions { max_outer: 1, ..Default::default() };
        assert_eq!(solve_minimal(&b, &opts).unwrap_err().code(), "MAX_ITERATIONS");
    }
}
