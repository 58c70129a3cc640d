use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticCode};
use crate::fields::height::{Gradient, HeightMap};
use crate::grid::{GridDomain, ScalarField};

/// Ambient signature: `R^{n+2}` or the split space `R^{n+2}_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Euclidean,
    Split,
}

impl Signature {
    /// `+1` for euclidean, `-1` for split: the sign in front of the
    /// height-derivative terms of E, F, G.
    pub fn sign(self) -> f64 {
        match self {
            Signature::Euclidean => 1.0,
            Signature::Split => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signature::Euclidean => "euclidean",
            Signature::Split => "split",
        }
    }
}

/// Induced metric `E dx^2 + 2F dx dy + G dy^2` and area element `omega`.
///
/// Under the split signature `omega` is only meaningful where `spacelike`
/// holds; elsewhere it is stored as zero.
#[derive(Clone, Debug)]
pub struct MetricData {
    pub signature: Signature,
    pub e: ScalarField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub omega: ScalarField,
    pub spacelike: Vec<bool>,
    pub diagnostic: Option<Diagnostic>,
}

impl MetricData {
    pub fn domain(&self) -> &GridDomain {
        self.e.domain()
    }

    pub fn all_spacelike(&self) -> bool {
        self.spacelike.iter().all(|&b| b)
    }

    /// `(E/omega, F/omega, G/omega)`; zero where omega vanishes.
    pub fn normalized(&self) -> (ScalarField, ScalarField, ScalarField) {
        let div = |a: &ScalarField| a.zip_map(&self.omega, |v, w| if w > 0.0 { v / w } else { 0.0 });
        (div(&self.e), div(&self.f), div(&self.g))
    }
}

pub fn first_fundamental_form(h: &HeightMap, signature: Signature) -> MetricData {
    metric_from_gradients(h.domain(), &h.gradients(), signature)
}

/// Metric of the graph whose components have the given first derivatives.
pub fn metric_from_gradients(domain: &GridDomain, grads: &[Gradient], signature: Signature) -> MetricData {
    let d = *domain;
    let s = signature.sign();
    let len = d.len();
    let (mut e, mut f, mut g) = (vec![1.0; len], vec![0.0; len], vec![1.0; len]);
    for k in 0..len {
        let (mut saa, mut sab, mut sbb) = (0.0, 0.0, 0.0);
        for gr in grads {
            let a = gr.dx.values()[k];
            let b = gr.dy.values()[k];
            saa += a * a;
            sab += a * b;
            sbb += b * b;
        }
        e[k] = 1.0 + s * saa;
        f[k] = s * sab;
        g[k] = 1.0 + s * sbb;
    }
    let mut omega = vec![0.0; len];
    let mut spacelike = vec![true; len];
    let mut bad = Vec::new();
    for k in 0..len {
        let det = e[k] * g[k] - f[k] * f[k];
        // E, G >= 1 in the euclidean case, so only the split case can fail.
        if det > 0.0 && e[k] > 0.0 {
            omega[k] = det.sqrt();
        } else {
            spacelike[k] = false;
            bad.push(d.node(k));
        }
    }
    let diagnostic = match signature {
        Signature::Split => Diagnostic::from_nodes(DiagnosticCode::SplitNotSpacelike, bad),
        Signature::Euclidean => None,
    };
    MetricData {
        signature,
        e: ScalarField::from_vec_unchecked(d, e),
        f: ScalarField::from_vec_unchecked(d, f),
        g: ScalarField::from_vec_unchecked(d, g),
        omega: ScalarField::from_vec_unchecked(d, omega),
        spacelike,
        diagnostic,
    }
}
