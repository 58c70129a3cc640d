//! Closed-form surfaces with analytic first and second derivatives.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{partial_x, partial_xx, partial_xy, partial_y, partial_yy, Gradient, HeightMap};
use crate::grid::{GridDomain, ScalarField};

pub type Params = BTreeMap<String, f64>;

pub const NAMES: [&str; 8] = [
    "plane",
    "catenoid",
    "helicoid",
    "scherk",
    "holomorphic",
    "quadratic_gradient",
    "lagrangian_catenoid",
    "chamberland_reverse",
];

/// Value and derivatives up to second order of one component at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

#[derive(Clone, Debug)]
enum Kind {
    /// One `(a, b, c)` per component: `a x + b y + c`.
    Plane(Vec<[f64; 3]>),
    Catenoid {
        rho: f64,
    },
    Helicoid {
        rho: f64,
    },
    Scherk {
        rho: f64,
    },
    /// Coefficients of each polynomial `phi_m`, lowest degree first.
    Holomorphic(Vec<Vec<Complex64>>),
    QuadraticGradient {
        a: f64,
        b: f64,
        c: f64,
    },
    LagrangianCatenoid {
        rho: f64,
    },
    ChamberlandReverse {
        c: f64,
        p: i32,
    },
}

#[derive(Clone, Debug)]
pub struct Surface {
    name: &'static str,
    kind: Kind,
}

/// Closed-form `(M, N)` potentials of the special Lagrangian lift.
pub type LiftFn = Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

pub(crate) fn acosh(x: f64) -> f64 {
    (x + (x * x - 1.0).sqrt()).ln()
}

pub(crate) fn asinh(x: f64) -> f64 {
    if x < 0.0 {
        -asinh(-x)
    } else {
        (x + (x * x + 1.0).sqrt()).ln()
    }
}

fn take(params: &mut Params, key: &str, default: f64) -> f64 {
    params.remove(key).unwrap_or(default)
}

fn positive(name: &str, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ParamConstraintViolation(format!("{name}: {key} must be positive, got {v}")))
    }
}

impl Surface {
    pub fn new(name: &str, params: &Params) -> Result<Surface> {
        let mut p = params.clone();
        let (name, kind): (&'static str, Kind) = match name {
            "plane" => {
                let n = take(&mut p, "n", 1.0);
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(Error::ParamConstraintViolation(format!(
                        "plane: n must be a positive integer, got {n}"
                    )));
                }
                let mut comps = Vec::new();
                for k in 1..=n as usize {
                    let mut get = |base: &str| {
                        let v = take(&mut p, &format!("{base}{k}"), 0.0);
                        if k == 1 {
                            take(&mut p, base, v)
                        } else {
                            v
                        }
                    };
                    comps.push([get("a"), get("b"), get("c")]);
                }
                ("plane", Kind::Plane(comps))
            }
            "catenoid" => ("catenoid", Kind::Catenoid { rho: positive(name, "rho", take(&mut p, "rho", 1.0))? }),
            "helicoid" => ("helicoid", Kind::Helicoid { rho: positive(name, "rho", take(&mut p, "rho", 1.0))? }),
            "scherk" => ("scherk", Kind::Scherk { rho: positive(name, "rho", take(&mut p, "rho", 1.0))? }),
            "lagrangian_catenoid" => (
                "lagrangian_catenoid",
                Kind::LagrangianCatenoid { rho: positive(name, "rho", take(&mut p, "rho", 1.0))? },
            ),
            "quadratic_gradient" => {
                let a = take(&mut p, "a", 1.0);
                let b = take(&mut p, "b", 1.0);
                let c = take(&mut p, "c", 0.0);
                ("quadratic_gradient", Kind::QuadraticGradient { a, b, c })
            }
            "chamberland_reverse" => {
                let c = take(&mut p, "c", 1.0);
                let deg = take(&mut p, "p", 4.0);
                if !(2.0..=12.0).contains(&deg) || deg.fract() != 0.0 {
                    return Err(Error::ParamConstraintViolation(format!(
                        "chamberland_reverse: p must be an integer in [2, 12], got {deg}"
                    )));
                }
                ("chamberland_reverse", Kind::ChamberlandReverse { c, p: deg as i32 })
            }
            "holomorphic" => ("holomorphic", Kind::Holomorphic(holomorphic_coeffs(&mut p)?)),
            other => return Err(Error::UnknownSurface(other.to_string())),
        };
        if let Some(key) = p.keys().next() {
            return Err(Error::ParamConstraintViolation(format!("{name}: unknown parameter `{key}`")));
        }
        Ok(Surface { name, kind })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Number of height components.
    pub fn n(&self) -> usize {
        match &self.kind {
            Kind::Plane(c) => c.len(),
            Kind::Holomorphic(phis) => 2 * phis.len(),
            Kind::QuadraticGradient { .. } | Kind::LagrangianCatenoid { .. } => 2,
            _ => 1,
        }
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new();
        match &self.kind {
            Kind::Plane(c) => {
                p.insert("n".into(), c.len() as f64);
                for (k, [a, b, cc]) in c.iter().enumerate() {
                    p.insert(format!("a{}", k + 1), *a);
                    p.insert(format!("b{}", k + 1), *b);
                    p.insert(format!("c{}", k + 1), *cc);
                }
            }
            Kind::Catenoid { rho }
            | Kind::Helicoid { rho }
            | Kind::Scherk { rho }
            | Kind::LagrangianCatenoid { rho } => {
                p.insert("rho".into(), *rho);
            }
            Kind::Holomorphic(phis) => {
                for (m, coeffs) in phis.iter().enumerate() {
                    for (d, c) in coeffs.iter().enumerate() {
                        if *c != Complex64::new(0.0, 0.0) {
                            p.insert(format!("re{}_{}", m + 1, d), c.re);
                            p.insert(format!("im{}_{}", m + 1, d), c.im);
                        }
                    }
                }
            }
            Kind::QuadraticGradient { a, b, c } => {
                p.insert("a".into(), *a);
                p.insert("b".into(), *b);
                p.insert("c".into(), *c);
            }
            Kind::ChamberlandReverse { c, p: deg } => {
                p.insert("c".into(), *c);
                p.insert("p".into(), *deg as f64);
            }
        }
        p
    }

    /// `(x0, y0, x1, y1)` used when no domain is given.
    pub fn default_bounds(&self) -> [f64; 4] {
        match &self.kind {
            Kind::Catenoid { rho } | Kind::LagrangianCatenoid { rho } => {
                [1.5 * rho, -0.75 * rho, 3.0 * rho, 0.75 * rho]
            }
            Kind::Helicoid { .. } => [1.0, 1.0, 2.0, 2.0],
            Kind::Scherk { rho } => [-0.6 / rho, -0.6 / rho, 0.6 / rho, 0.6 / rho],
            Kind::Holomorphic(_) => [-0.3, -0.3, 0.3, 0.3],
            Kind::QuadraticGradient { .. } | Kind::ChamberlandReverse { .. } => [-1.0, -1.0, 1.0, 1.0],
            Kind::Plane(_) => [0.0, 0.0, 1.0, 1.0],
        }
    }

    pub fn check_domain(&self, d: &GridDomain) -> Result<()> {
        let fail = |reason: String| Err(Error::DomainNotAdmissible { name: self.name.to_string(), reason });
        let (x0, y0, x1, y1) = (d.x0, d.y0, d.x1(), d.y1());
        match &self.kind {
            Kind::Catenoid { rho } | Kind::LagrangianCatenoid { rho } => {
                let cx = 0f64.clamp(x0, x1);
                let cy = 0f64.clamp(y0, y1);
                let r = cx.hypot(cy);
                if r <= *rho {
                    return fail(format!("needs x^2 + y^2 > rho^2, closest point has r = {r}"));
                }
            }
            Kind::Helicoid { .. } => {
                if x0 <= 0.0 {
                    return fail(format!("needs x > 0, domain starts at x = {x0}"));
                }
            }
            Kind::Scherk { rho } => {
                let m = x0.abs().max(x1.abs()).max(y0.abs()).max(y1.abs()) * rho;
                if m >= FRAC_PI_2 {
                    return fail(format!("needs |rho x|, |rho y| < pi/2, found {m}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Jets of every component at `(x, y)`.
    pub fn jets(&self, x: f64, y: f64) -> Vec<Jet> {
        match &self.kind {
            Kind::Plane(c) => {
                c.iter().map(|[a, b, cc]| Jet { v: a * x + b * y + cc, x: *a, y: *b, ..Jet::default() }).collect()
            }
            Kind::Catenoid { rho } => {
                let r2 = x * x + y * y;
                let r = r2.sqrt();
                let q = r2 - rho * rho;
                let fr = rho / q.sqrt();
                let frr = -rho * r / (q * q.sqrt());
                vec![radial(rho * acosh(r / rho), fr, frr, x, y)]
            }
            Kind::Helicoid { rho } => {
                let r2 = x * x + y * y;
                let r4 = r2 * r2;
                vec![Jet {
                    v: rho * (y / x).atan(),
                    x: -rho * y / r2,
                    y: rho * x / r2,
                    xx: 2.0 * rho * x * y / r4,
                    xy: rho * (y * y - x * x) / r4,
                    yy: -2.0 * rho * x * y / r4,
                }]
            }
            Kind::Scherk { rho } => {
                let (cx, cy) = ((rho * x).cos(), (rho * y).cos());
                vec![Jet {
                    v: (cx.ln() - cy.ln()) / rho,
                    x: -(rho * x).tan(),
                    y: (rho * y).tan(),
                    xx: -rho / (cx * cx),
                    xy: 0.0,
                    yy: rho / (cy * cy),
                }]
            }
            Kind::Holomorphic(phis) => {
                let z = Complex64::new(x, y);
                let mut out = Vec::with_capacity(2 * phis.len());
                for coeffs in phis {
                    let (p0, p1, p2) = poly_derivs(coeffs, z);
                    out.push(Jet { v: p0.re, x: p1.re, y: -p1.im, xx: p2.re, xy: -p2.im, yy: -p2.re });
                    out.push(Jet { v: p0.im, x: p1.im, y: p1.re, xx: p2.im, xy: p2.re, yy: -p2.im });
                }
                out
            }
            Kind::QuadraticGradient { a, b, c } => vec![
                Jet { v: a * x + c * y, x: *a, y: *c, ..Jet::default() },
                Jet { v: c * x + b * y, x: *c, y: *b, ..Jet::default() },
            ],
            Kind::LagrangianCatenoid { rho } => {
                let r2 = x * x + y * y;
                let s = (1.0 - rho * rho / r2).sqrt();
                let t = rho * rho / (s * r2 * r2);
                let w = t / s + 4.0 / r2;
                vec![
                    Jet {
                        v: s * x,
                        x: s + t * x * x,
                        y: t * x * y,
                        xx: t * x * (3.0 - w * x * x),
                        xy: t * y * (1.0 - w * x * x),
                        yy: t * x * (1.0 - w * y * y),
                    },
                    Jet {
                        v: s * y,
                        x: t * x * y,
                        y: s + t * y * y,
                        xx: t * y * (1.0 - w * x * x),
                        xy: t * x * (1.0 - w * y * y),
                        yy: t * y * (3.0 - w * y * y),
                    },
                ]
            }
            Kind::ChamberlandReverse { c, p } => {
                let pf = *p as f64;
                vec![Jet {
                    v: x * y + c * x.powi(*p),
                    x: y + c * pf * x.powi(p - 1),
                    y: x,
                    xx: c * pf * (pf - 1.0) * x.powi(p - 2),
                    xy: 1.0,
                    yy: 0.0,
                }]
            }
        }
    }

    /// Samples the surface with analytic gradients attached.
    pub fn sample(&self, domain: &GridDomain) -> Result<HeightMap> {
        self.check_domain(domain)?;
        let d = *domain;
        let n = self.n();
        let mut vals = vec![Vec::with_capacity(d.len()); n];
        let mut gx = vals.clone();
        let mut gy = vals.clone();
        for j in 0..d.ny {
            for i in 0..d.nx {
                for (k, jet) in self.jets(d.x(i), d.y(j)).into_iter().enumerate() {
                    vals[k].push(jet.v);
                    gx[k].push(jet.x);
                    gy[k].push(jet.y);
                }
            }
        }
        let mk = |v: Vec<f64>| ScalarField::new(d, v);
        let comps = vals.into_iter().map(mk).collect::<Result<Vec<_>>>()?;
        let grads =
            gx.into_iter().zip(gy).map(|(a, b)| Ok(Gradient { dx: mk(a)?, dy: mk(b)? })).collect::<Result<Vec<_>>>()?;
        HeightMap::with_gradients(comps, grads)
    }

    /// Analytic `[xx, xy, yy]` second derivatives of component `k`.
    pub fn sample_hessian(&self, domain: &GridDomain, k: usize) -> [ScalarField; 3] {
        let pick = |f: fn(&Jet) -> f64| ScalarField::from_fn(*domain, |x, y| f(&self.jets(x, y)[k]));
        [pick(|j| j.xx), pick(|j| j.xy), pick(|j| j.yy)]
    }

    /// Closed-form lift potentials `(M, N)` where one is known.
    pub fn known_lift(&self) -> Option<LiftFn> {
        match self.kind {
            Kind::Catenoid { rho } => Some(Box::new(move |x, y| {
                let s = (1.0 - rho * rho / (x * x + y * y)).sqrt();
                (s * x, s * y)
            })),
            Kind::Helicoid { rho } => Some(Box::new(move |x, y| {
                let s = (1.0 + rho * rho / (x * x + y * y)).sqrt();
                (s * x, s * y)
            })),
            Kind::Scherk { rho } => Some(Box::new(move |x, y| {
                let (tx, ty) = ((rho * x).tan(), (rho * y).tan());
                (asinh(tx * (rho * y).cos()) / rho, asinh(ty * (rho * x).cos()) / rho)
            })),
            _ => None,
        }
    }
}

/// Jet of a radial function with `f' = fr`, `f'' = frr`.
fn radial(v: f64, fr: f64, frr: f64, x: f64, y: f64) -> Jet {
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    let r3 = r2 * r;
    Jet {
        v,
        x: fr * x / r,
        y: fr * y / r,
        xx: frr * x * x / r2 + fr * y * y / r3,
        xy: (frr - fr / r) * x * y / r2,
        yy: frr * y * y / r2 + fr * x * x / r3,
    }
}

fn poly_derivs(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p0, mut p1, mut p2) = (zero, zero, zero);
    for c in coeffs.iter().rev() {
        p2 = p2 * z + p1 * 2.0;
        p1 = p1 * z + p0;
        p0 = p0 * z + c;
    }
    (p0, p1, p2)
}

/// Parses `re{m}_{d}` / `im{m}_{d}` keys (coefficient of `z^d` in `phi_m`).
fn holomorphic_coeffs(p: &mut Params) -> Result<Vec<Vec<Complex64>>> {
    let mut found: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    let keys: Vec<String> = p.keys().cloned().collect();
    for key in keys {
        let (part, rest) = if let Some(r) = key.strip_prefix("re") {
            (0, r)
        } else if let Some(r) = key.strip_prefix("im") {
            (1, r)
        } else {
            continue;
        };
        let Some((m, d)) = rest.split_once('_') else { continue };
        let (Ok(m), Ok(d)) = (m.parse::<usize>(), d.parse::<usize>()) else { continue };
        if m == 0 || d > 16 {
            return Err(Error::ParamConstraintViolation(format!("holomorphic: bad coefficient key `{key}`")));
        }
        let v = p.remove(&key).unwrap_or(0.0);
        let c = found.entry((m, d)).or_default();
        if part == 0 {
            c.re = v;
        } else {
            c.im = v;
        }
    }
    if found.is_empty() {
        return Ok(vec![vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]]);
    }
    let count = found.keys().map(|(m, _)| *m).max().unwrap_or(1);
    let mut phis = vec![Vec::new(); count];
    for ((m, d), c) in found {
        let poly = &mut phis[m - 1];
        if poly.len() <= d {
            poly.resize(d + 1, Complex64::new(0.0, 0.0));
        }
        poly[d] = c;
    }
    Ok(phis)
}

pub fn make_surface(name: &str, params: &Params, domain: &GridDomain) -> Result<HeightMap> {
    Surface::new(name, params)?.sample(domain)
}

pub fn known_lift(name: &str, params: &Params) -> Result<Option<LiftFn>> {
    Ok(Surface::new(name, params)?.known_lift())
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryInfo {
    pub name: &'static str,
    pub n: usize,
    pub params: Params,
    pub default_domain: [f64; 4],
    pub known_lift: bool,
}

pub fn list() -> Vec<EntryInfo> {
    NAMES
        .iter()
        .map(|name| {
            let s = Surface::new(name, &Params::new()).expect("defaults are valid");
            EntryInfo {
                name: s.name,
                n: s.n(),
                params: s.params(),
                default_domain: s.default_bounds(),
                known_lift: s.known_lift().is_some(),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SelfTest {
    /// Max interior gap between analytic and finite-difference gradients.
    pub gradient_error: f64,
    /// Same for second derivatives.
    pub hessian_error: f64,
}

pub fn self_test(surface: &Surface, domain: &GridDomain) -> Result<SelfTest> {
    let f = surface.sample(domain)?;
    let mut out = SelfTest { gradient_error: 0.0, hessian_error: 0.0 };
    let interior = |a: &ScalarField, b: &ScalarField| {
        domain.interior_indices().map(|k| (a.values()[k] - b.values()[k]).abs()).fold(0.0, f64::max)
    };
    for k in 0..f.n() {
        let c = f.component(k);
        let g = f.gradient(k);
        out.gradient_error = out.gradient_error.max(interior(&g.dx, &partial_x(c))).max(interior(&g.dy, &partial_y(c)));
        let [hxx, hxy, hyy] = surface.sample_hessian(domain, k);
        out.hessian_error = out
            .hessian_error
            .max(interior(&hxx, &partial_xx(c)))
            .max(interior(&hxy, &partial_xy(c)))
            .max(interior(&hyy, &partial_yy(c)));
    }
    Ok(out)
}
