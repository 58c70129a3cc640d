//! Generalized Gauss map into the complex hyperquadric, hyperplane fits and
//! planarity scoring.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{truncate_nodes, Error, Result};
use crate::fields::{first_fundamental_form, HeightMap, Hessian, Signature};
use crate::grid::{ensure_same_domain, GridDomain, ScalarField};
use crate::report::to_json;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Entries below this modulus are treated as zero when fixing the phase.
const PHASE_FLOOR: f64 = 1e-12;

/// Planarity compares every pair of nodes up to this many nodes, and a
/// fixed-seed sample of this size beyond it.
pub const PLANARITY_SAMPLE: usize = 4096;
const PLANARITY_SEED: u64 = 0x5eed_2024;

/// One point of complex projective space per node, stored as a unit vector
/// whose first non-negligible entry is real and positive.
#[derive(Clone, Debug)]
pub struct ProjectivePointField {
    domain: GridDomain,
    /// `points[k]` holds the homogeneous coordinates at node `k`.
    points: Vec<Vec<Complex64>>,
}

fn normalize(mut z: Vec<Complex64>) -> Vec<Complex64> {
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return z;
    }
    let phase = z.iter().find(|c| c.norm() > PHASE_FLOOR * norm).map(|c| c.conj() / c.norm()).unwrap_or(ONE);
    for c in &mut z {
        *c = *c * phase / norm;
    }
    z
}

impl ProjectivePointField {
    /// Builds a field from raw homogeneous coordinates, normalizing each node.
    pub fn from_points(domain: GridDomain, points: Vec<Vec<Complex64>>) -> Result<Self> {
        if points.len() != domain.len() {
            return Err(Error::ShapeMismatch(format!("{} points for {} nodes", points.len(), domain.len())));
        }
        let width = points.first().map_or(0, Vec::len);
        if width < 2 || points.iter().any(|p| p.len() != width) {
            return Err(Error::InvalidField("projective points need a common length of at least 2".into()));
        }
        if points.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField("non-finite projective coordinate".into()));
        }
        if points.iter().any(|p| p.iter().all(|c| c.norm_sqr() == 0.0)) {
            return Err(Error::InvalidField("zero vector is not a projective point".into()));
        }
        Ok(ProjectivePointField { domain, points: points.into_iter().map(normalize).collect() })
    }

    pub fn constant(domain: GridDomain, point: &[Complex64]) -> Result<Self> {
        Self::from_points(domain, vec![point.to_vec(); domain.len()])
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Number of homogeneous coordinates (`n + 2`).
    pub fn width(&self) -> usize {
        self.points[0].len()
    }

    pub fn point(&self, k: usize) -> &[Complex64] {
        &self.points[k]
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    /// Interleaved `Re z_1, Im z_1, Re z_2, ...` real fields.
    pub fn to_fields(&self) -> Vec<ScalarField> {
        let d = self.domain;
        (0..self.width())
            .flat_map(|c| {
                let re = self.points.iter().map(|p| p[c].re).collect();
                let im = self.points.iter().map(|p| p[c].im).collect();
                [ScalarField::from_vec_unchecked(d, re), ScalarField::from_vec_unchecked(d, im)]
            })
            .collect()
    }

    pub fn from_fields(fields: &[ScalarField]) -> Result<Self> {
        if fields.len() < 4 || !fields.len().is_multiple_of(2) {
            return Err(Error::InvalidField(format!(
                "projective field needs an even number (>= 4) of Re/Im components, got {}",
                fields.len()
            )));
        }
        let d = *fields[0].domain();
        for f in fields {
            ensure_same_domain(&d, f.domain(), "projective field")?;
        }
        let points = (0..d.len())
            .map(|k| fields.chunks(2).map(|c| Complex64::new(c[0].values()[k], c[1].values()[k])).collect())
            .collect();
        Self::from_points(d, points)
    }
}

/// Homogeneous Gauss map `[G/w, i - F/w, (G/w) a_k + (i - F/w) b_k]`.
pub fn gauss_map(f: &HeightMap) -> ProjectivePointField {
    let d = *f.domain();
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let grads = f.gradients();
    let points = (0..d.len())
        .map(|k| {
            let w = metric.omega.values()[k];
            let go = Complex64::new(metric.g.values()[k] / w, 0.0);
            let second = I - metric.f.values()[k] / w;
            let mut z = vec![go, second];
            z.extend(grads.iter().map(|g| go * g.dx.values()[k] + second * g.dy.values()[k]));
            normalize(z)
        })
        .collect();
    ProjectivePointField { domain: d, points }
}

/// The equivalent representative `[1 - iF/w, iE/w, (1 - iF/w) a_k + i (E/w) b_k]`.
pub fn gauss_map_alt(f: &HeightMap) -> ProjectivePointField {
    let d = *f.domain();
    let metric = first_fundamental_form(f, Signature::Euclidean);
    let grads = f.gradients();
    let points = (0..d.len())
        .map(|k| {
            let w = metric.omega.values()[k];
            let first = ONE - I * (metric.f.values()[k] / w);
            let second = I * (metric.e.values()[k] / w);
            let mut z = vec![first, second];
            z.extend(grads.iter().map(|g| first * g.dx.values()[k] + second * g.dy.values()[k]));
            normalize(z)
        })
        .collect();
    ProjectivePointField { domain: d, points }
}

/// Max nodewise `|sum z_k^2|`.
pub fn quadric_residual(g: &ProjectivePointField) -> f64 {
    g.points.iter().map(|p| p.iter().map(|z| z * z).sum::<Complex64>().norm()).fold(0.0, f64::max)
}

/// Fubini-Study chordal distance between two unit vectors, via the Lagrange
/// identity so that nearly equal points do not lose precision.
pub fn chordal_distance(z: &[Complex64], w: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            s += (z[a] * w[b] - z[b] * w[a]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Max nodewise chordal distance between two fields on the same grid.
pub fn max_distance(a: &ProjectivePointField, b: &ProjectivePointField) -> Result<f64> {
    ensure_same_domain(&a.domain, &b.domain, "projective distance")?;
    if a.width() != b.width() {
        return Err(Error::ShapeMismatch("projective fields of different widths".into()));
    }
    Ok(a.points.iter().zip(&b.points).map(|(z, w)| chordal_distance(z, w)).fold(0.0, f64::max))
}

/// Max pairwise chordal distance over all nodes, or over a fixed-seed
/// sample of `PLANARITY_SAMPLE` nodes on larger grids.
pub fn planarity_score(g: &ProjectivePointField) -> f64 {
    let nodes: Vec<&[Complex64]> = if g.points.len() <= PLANARITY_SAMPLE {
        g.points.iter().map(Vec::as_slice).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PLANARITY_SEED);
        let mut idx = sample(&mut rng, g.points.len(), PLANARITY_SAMPLE).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|k| g.points[k].as_slice()).collect()
    };
    // max is exact, so the parallel reduction is order independent
    (0..nodes.len())
        .into_par_iter()
        .map(|a| nodes[a + 1..].iter().map(|w| chordal_distance(nodes[a], w)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HyperplaneFit {
    /// One-based component indices of the relation `z_i = lambda z_j`.
    pub i: usize,
    pub j: usize,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Max nodewise `|z_i - lambda z_j|`.
    pub residual: f64,
    pub is_nonreal: bool,
    pub valid_nodes: usize,
}

impl HyperplaneFit {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Nodes with `|z_j|` below this are left out of the fit.
pub const FIT_FLOOR: f64 = 1e-8;
pub const FIT_MIN_FRACTION: f64 = 0.99;
/// `|Im lambda|` above this marks the relation as non-real.
pub const NONREAL_THRESHOLD: f64 = 1e-8;

/// Least-squares `lambda` minimizing `sum |z_i - lambda z_j|^2`.
pub fn hyperplane_fit(g: &ProjectivePointField, i: usize, j: usize) -> Result<HyperplaneFit> {
    let w = g.width();
    if i == 0 || j == 0 || i > w || j > w || i == j {
        return Err(Error::InvalidField(format!("fit indices ({i}, {j}) must be distinct and in 1..={w}")));
    }
    let (a, b) = (i - 1, j - 1);
    let (mut num, mut den, mut valid) = (Complex64::new(0.0, 0.0), 0.0, 0usize);
    for p in &g.points {
        if p[b].norm() > FIT_FLOOR {
            num += p[a] * p[b].conj();
            den += p[b].norm_sqr();
            valid += 1;
        }
    }
    let total = g.points.len();
    if (valid as f64) < FIT_MIN_FRACTION * total as f64 || den == 0.0 {
        return Err(Error::DegenerateFit { valid, total });
    }
    let lambda = num / den;
    let residual = g.points.iter().map(|p| (p[a] - lambda * p[b]).norm()).fold(0.0, f64::max);
    Ok(HyperplaneFit {
        i,
        j,
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        residual,
        is_nonreal: lambda.im.abs() > NONREAL_THRESHOLD,
        valid_nodes: valid,
    })
}

/// Gauss field `[e F_yy, i - e F_xy, e + i F_xy, i F_yy]` of the gradient
/// graph of a solution of `det D^2 F = 1`, with `e` the sign of `F_xx + F_yy`.
pub fn jorgens_gauss(f: &ScalarField, tol: f64) -> Result<ProjectivePointField> {
    let d = *f.domain();
    let h = Hessian::of(f);
    let det = h.determinant();
    let bad: Vec<usize> = (0..d.len()).filter(|&k| (det.values()[k] - 1.0).abs() > tol).collect();
    if !bad.is_empty() {
        let residual = bad.iter().map(|&k| (det.values()[k] - 1.0).abs()).fold(0.0, f64::max);
        let nodes = bad.into_iter().map(|k| d.node(k)).collect();
        return Err(Error::NotUnimodular { residual, tol, nodes: truncate_nodes(nodes) });
    }
    let lap = h.laplacian();
    let positive = lap.values().iter().filter(|&&v| v > 0.0).count();
    let eps = if positive == d.len() {
        1.0
    } else if lap.values().iter().all(|&v| v < 0.0) {
        -1.0
    } else {
        let first_positive = lap.values()[0] > 0.0;
        let nodes = (0..d.len()).filter(|&k| (lap.values()[k] > 0.0) != first_positive).map(|k| d.node(k)).collect();
        return Err(Error::SignChange { nodes: truncate_nodes(nodes) });
    };
    let points = (0..d.len())
        .map(|k| {
            let (fxy, fyy) = (h.xy.values()[k], h.yy.values()[k]);
            normalize(vec![
                Complex64::new(eps * fyy, 0.0),
                I - eps * fxy,
                Complex64::new(eps, fxy),
                Complex64::new(0.0, fyy),
            ])
        })
        .collect();
    Ok(ProjectivePointField { domain: d, points })
}
