use crate::error::{Error, Result};
use crate::fields::diff::{partial_x, partial_x4, partial_y, partial_y4, Hessian};
use crate::grid::{ensure_same_domain, GridDomain, ScalarField};

/// First derivatives `(df/dx, df/dy)` of one height component.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub dx: ScalarField,
    pub dy: ScalarField,
}

impl Gradient {
    pub fn of(field: &ScalarField) -> Gradient {
        Gradient { dx: partial_x(field), dy: partial_y(field) }
    }

    pub fn of_fourth_order(field: &ScalarField) -> Gradient {
        Gradient { dx: partial_x4(field), dy: partial_y4(field) }
    }
}

/// An `n`-component map `f: Omega -> R^n`, optionally carrying exact first
/// derivatives. When present, the exact derivatives replace finite
/// differences in every metric and Jacobian computation; second
/// derivatives are always taken from the sampled values.
#[derive(Clone, Debug)]
pub struct HeightMap {
    domain: GridDomain,
    components: Vec<ScalarField>,
    analytic: Option<Vec<Gradient>>,
}

impl HeightMap {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first =
            components.first().ok_or_else(|| Error::InvalidField("height map needs at least one component".into()))?;
        let domain = *first.domain();
        for c in &components[1..] {
            ensure_same_domain(&domain, c.domain(), "height map")?;
        }
        Ok(HeightMap { domain, components, analytic: None })
    }

    pub fn with_gradients(components: Vec<ScalarField>, gradients: Vec<Gradient>) -> Result<Self> {
        let mut map = HeightMap::new(components)?;
        if gradients.len() != map.n() {
            return Err(Error::ShapeMismatch(format!("{} gradients for {} components", gradients.len(), map.n())));
        }
        for g in &gradients {
            ensure_same_domain(&map.domain, g.dx.domain(), "gradient")?;
            ensure_same_domain(&map.domain, g.dy.domain(), "gradient")?;
            if !(g.dx.is_finite() && g.dy.is_finite()) {
                return Err(Error::InvalidField("non-finite analytic gradient".into()));
            }
        }
        map.analytic = Some(gradients);
        Ok(map)
    }

    pub fn zeros(domain: GridDomain, n: usize) -> Result<Self> {
        HeightMap::new(vec![ScalarField::zeros(domain); n])
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &ScalarField {
        &self.components[k]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.analytic.is_some()
    }

    /// Same samples with the exact derivatives dropped.
    pub fn without_analytic(&self) -> HeightMap {
        HeightMap { domain: self.domain, components: self.components.clone(), analytic: None }
    }

    pub fn gradient(&self, k: usize) -> Gradient {
        match &self.analytic {
            Some(g) => g[k].clone(),
            None => Gradient::of(&self.components[k]),
        }
    }

    pub fn gradients(&self) -> Vec<Gradient> {
        (0..self.n()).map(|k| self.gradient(k)).collect()
    }

    /// Exact derivatives when present, fourth-order differences otherwise.
    pub fn accurate_gradients(&self) -> Vec<Gradient> {
        match &self.analytic {
            Some(g) => g.clone(),
            None => self.components.iter().map(Gradient::of_fourth_order).collect(),
        }
    }

    pub fn hessian(&self, k: usize) -> Hessian {
        Hessian::of(&self.components[k])
    }

    pub fn hessians(&self) -> Vec<Hessian> {
        self.components.iter().map(Hessian::of).collect()
    }

    /// Component-wise map of the samples; exact derivatives are dropped.
    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> HeightMap {
        HeightMap { domain: self.domain, components: self.components.iter().map(f).collect(), analytic: None }
    }
}
