//! Scalar fields on a model manifold in geodesic polar coordinates.
//!
//! A field is an evaluator `u(r, xi)` together with optional analytic
//! derivative data. The built-in catalog carries analytic radial and angular
//! derivatives; expression fields fall back to centered finite differences
//! (radial step `max(1e-5, 1e-3 r)`, angular step `1e-3` along great circles).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr;
use crate::geodesic::{self, SamplerSpec};
use crate::manifold::ModelManifold;
use crate::quadrature;

const ANGULAR_FD_STEP: f64 = 1e-3;
const POLE_DIRECTION_TOL: f64 = 1e-8;

// --- small 3-vector helpers -------------------------------------------------

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// A direction on the unit sphere of the tangent space at the pole.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    /// Dimension 2: an angle in `[0, 2*pi)`.
    Angle(f64),
    /// Dimension 3: a unit vector.
    Unit([f64; 3]),
    /// Placeholder for radial-only work in dimension >= 4.
    Radial,
}

impl Direction {
    pub fn angle(theta: f64) -> Self {
        Direction::Angle(theta.rem_euclid(2.0 * PI))
    }

    pub fn unit(v: [f64; 3]) -> Result<Self> {
        let n = norm3(v);
        if !(n > 1e-14) || !n.is_finite() {
            return Err(Error::InvalidInput("direction vector must be nonzero".into()));
        }
        Ok(Direction::Unit(scale3(v, 1.0 / n)))
    }

    /// Reference direction for a given dimension.
    pub fn canonical(dim: usize) -> Self {
        match dim {
            2 => Direction::Angle(0.0),
            3 => Direction::Unit([1.0, 0.0, 0.0]),
            _ => Direction::Radial,
        }
    }

    pub fn antipode(&self) -> Self {
        match self {
            Direction::Angle(t) => Direction::angle(t + PI),
            Direction::Unit(v) => Direction::Unit([-v[0], -v[1], -v[2]]),
            Direction::Radial => Direction::Radial,
        }
    }

    /// Cartesian components of the unit vector, zero-padded.
    pub fn components(&self) -> [f64; 3] {
        match self {
            Direction::Angle(t) => [t.cos(), t.sin(), 0.0],
            Direction::Unit(v) => *v,
            Direction::Radial => [0.0, 0.0, 0.0],
        }
    }

    /// Orthonormal tangent frame at a point of the unit 2-sphere.
    pub(crate) fn tangent_frame(v: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let pick = if v[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let a = cross3(v, pick);
        let a = scale3(a, 1.0 / norm3(a));
        let b = cross3(v, a);
        (a, b)
    }
}

/// A point `(r, xi)` in geodesic polar coordinates about the pole.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub xi: Direction,
}

impl PolarPoint {
    pub fn new(r: f64, xi: Direction) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("radius must be >= 0, got {r}")));
        }
        Ok(Self { r, xi })
    }

    pub fn pole(dim: usize) -> Self {
        Self { r: 0.0, xi: Direction::canonical(dim) }
    }
}

impl fmt::Display for PolarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.xi {
            Direction::Angle(t) => write!(f, "(r={:.6}, theta={:.6})", self.r, t),
            Direction::Unit(v) => {
                write!(f, "(r={:.6}, xi=[{:.4}, {:.4}, {:.4}])", self.r, v[0], v[1], v[2])
            }
            Direction::Radial => write!(f, "(r={:.6})", self.r),
        }
    }
}

// --- scalar fields -----------------------------------------------------------

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FieldFlags {
    pub nonnegative: bool,
    pub subharmonic_claimed: bool,
    pub convex_claimed: bool,
    pub radial_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    Catalog { name: String, params: BTreeMap<String, f64> },
    Expression { text: String },
    Closure { label: String },
}

pub type EvalFn = dyn Fn(f64, &Direction) -> f64 + Send + Sync;
type VecFn = dyn Fn(f64, &Direction) -> [f64; 3] + Send + Sync;

/// Analytic angular derivative data, matched to the field's dimension.
#[derive(Clone)]
enum AngularAnalytic {
    /// dim 2: derivatives in the angle.
    Planar { d1: Arc<EvalFn>, d2: Arc<EvalFn> },
    /// dim 3: intrinsic gradient and Laplacian on the unit 2-sphere.
    Spherical { grad: Arc<VecFn>, lap: Arc<EvalFn> },
    /// Radial field in dimension >= 4.
    Zero,
}

/// A scalar function `u(r, xi)` with optional analytic derivatives.
///
/// Declared flags are claims recorded at construction; verification routines
/// never trust them.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<EvalFn>,
    du_dr: Option<Arc<EvalFn>>,
    d2u_dr2: Option<Arc<EvalFn>>,
    angular: Option<AngularAnalytic>,
    pub flags: FieldFlags,
    pub source: FieldSource,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("source", &self.source)
            .field("flags", &self.flags)
            .finish()
    }
}

fn pole_sample_directions(dim: usize) -> Vec<Direction> {
    match dim {
        2 => (0..8).map(|k| Direction::angle(2.0 * PI * k as f64 / 8.0)).collect(),
        3 => {
            let s = 1.0 / 3f64.sqrt();
            vec![
                Direction::Unit([1.0, 0.0, 0.0]),
                Direction::Unit([-1.0, 0.0, 0.0]),
                Direction::Unit([0.0, 1.0, 0.0]),
                Direction::Unit([0.0, -1.0, 0.0]),
                Direction::Unit([0.0, 0.0, 1.0]),
                Direction::Unit([0.0, 0.0, -1.0]),
                Direction::Unit([s, s, s]),
                Direction::Unit([-s, s, -s]),
            ]
        }
        _ => vec![Direction::Radial],
    }
}

impl ScalarField {
    fn check_pole_consistency(&self) -> Result<()> {
        let dirs = pole_sample_directions(self.dim);
        let base = (self.eval)(0.0, &dirs[0]);
        if !base.is_finite() {
            return Err(Error::NonFinite { r: 0.0, what: "field value at the pole".into() });
        }
        for d in &dirs[1..] {
            let v = (self.eval)(0.0, d);
            if (v - base).abs() > POLE_DIRECTION_TOL * base.abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "field is direction-dependent at the pole: {base} vs {v}"
                )));
            }
        }
        Ok(())
    }

    /// Wrap a plain closure. No analytic derivatives; all operators fall back
    /// to finite differences.
    pub fn from_fn(
        dim: usize,
        label: &str,
        flags: FieldFlags,
        eval: impl Fn(f64, &Direction) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let f = Self {
            dim,
            eval: Arc::new(eval),
            du_dr: None,
            d2u_dr2: None,
            angular: None,
            flags,
            source: FieldSource::Closure { label: label.to_owned() },
        };
        f.check_pole_consistency()?;
        Ok(f)
    }

    /// Parse an expression over `r, x1..x<dim>` into a field with
    /// finite-difference derivatives. `x_i = r * xi_i`.
    pub fn from_expr(text: &str, dim: usize) -> Result<Self> {
        let ast = expr::parse(text, dim)?;
        let radial_only = ast.max_coord() == 0;
        if dim > 3 && !radial_only {
            return Err(Error::InvalidInput(format!(
                "directional fields need dimension 2 or 3; dimension {dim} supports only radial expressions"
            )));
        }
        let ast = Arc::new(ast);
        let f = Self {
            dim,
            eval: Arc::new(move |r, xi: &Direction| {
                let c = xi.components();
                ast.eval(r, &[r * c[0], r * c[1], r * c[2]])
            }),
            du_dr: None,
            d2u_dr2: None,
            angular: None,
            flags: FieldFlags { radial_only, ..FieldFlags::default() },
            source: FieldSource::Expression { text: text.to_owned() },
        };
        f.check_pole_consistency()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, r: f64, xi: &Direction) -> f64 {
        (self.eval)(r, xi)
    }

    pub fn eval_at(&self, p: &PolarPoint) -> f64 {
        (self.eval)(p.r, &p.xi)
    }

    pub fn value_at_pole(&self) -> f64 {
        (self.eval)(0.0, &Direction::canonical(self.dim))
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.du_dr.is_some() && self.d2u_dr2.is_some() && self.angular.is_some()
    }

    /// Evaluation extended through the pole: `u(-r, xi) = u(r, -xi)`.
    pub fn eval_signed(&self, r: f64, xi: &Direction) -> f64 {
        if r < 0.0 {
            (self.eval)(-r, &xi.antipode())
        } else {
            (self.eval)(r, xi)
        }
    }

    /// `du/dr`, analytic when available.
    pub fn radial_deriv(&self, r: f64, xi: &Direction) -> f64 {
        if let Some(d) = &self.du_dr {
            return d(r, xi);
        }
        let step = (1e-3 * r.abs()).max(1e-5);
        (self.eval_signed(r + step, xi) - self.eval_signed(r - step, xi)) / (2.0 * step)
    }

    /// `d2u/dr2`, analytic when available.
    pub fn radial_deriv2(&self, r: f64, xi: &Direction) -> f64 {
        if let Some(d) = &self.d2u_dr2 {
            return d(r, xi);
        }
        let step = (1e-3 * r.abs()).max(1e-5);
        (self.eval_signed(r + step, xi) - 2.0 * self.eval_signed(r, xi)
            + self.eval_signed(r - step, xi))
            / (step * step)
    }

    /// First derivatives along an orthonormal tangent frame of the sphere and
    /// the intrinsic sphere Laplacian, all at unit-sphere scale.
    ///
    /// Returns `(components, laplacian)`; for dim 2 only the first component
    /// is used (the derivative in the angle).
    pub fn angular_derivs(&self, r: f64, xi: &Direction) -> ([f64; 2], f64) {
        if let Some(ang) = &self.angular {
            return match ang {
                AngularAnalytic::Planar { d1, d2 } => ([d1(r, xi), 0.0], d2(r, xi)),
                AngularAnalytic::Spherical { grad, lap } => {
                    let g = grad(r, xi);
                    let v = match xi {
                        Direction::Unit(v) => *v,
                        _ => return ([0.0, 0.0], 0.0),
                    };
                    let (ea, eb) = Direction::tangent_frame(v);
                    ([dot3(g, ea), dot3(g, eb)], lap(r, xi))
                }
                AngularAnalytic::Zero => ([0.0, 0.0], 0.0),
            };
        }
        if self.flags.radial_only {
            return ([0.0, 0.0], 0.0);
        }
        let s = ANGULAR_FD_STEP;
        match xi {
            Direction::Angle(t) => {
                let u0 = (self.eval)(r, xi);
                let up = (self.eval)(r, &Direction::angle(t + s));
                let um = (self.eval)(r, &Direction::angle(t - s));
                ([(up - um) / (2.0 * s), 0.0], (up - 2.0 * u0 + um) / (s * s))
            }
            Direction::Unit(v) => {
                // second differences along two orthogonal great circles; their
                // sum is the sphere Laplacian since great circles are geodesics
                let (ea, eb) = Direction::tangent_frame(*v);
                let u0 = (self.eval)(r, xi);
                let mut comps = [0.0; 2];
                let mut lap = 0.0;
                for (k, e) in [ea, eb].into_iter().enumerate() {
                    let plus = add3(scale3(*v, s.cos()), scale3(e, s.sin()));
                    let minus = add3(scale3(*v, s.cos()), scale3(e, -s.sin()));
                    let up = (self.eval)(r, &Direction::Unit(plus));
                    let um = (self.eval)(r, &Direction::Unit(minus));
                    comps[k] = (up - um) / (2.0 * s);
                    lap += (up - 2.0 * u0 + um) / (s * s);
                }
                (comps, lap)
            }
            Direction::Radial => ([0.0, 0.0], 0.0),
        }
    }

    /// Pointwise square `u^2`, propagating analytic derivatives.
    pub fn square(&self) -> ScalarField {
        let e = self.eval.clone();
        let eval: Arc<EvalFn> = Arc::new(move |r, xi| {
            let v = e(r, xi);
            v * v
        });
        let du_dr = self.du_dr.as_ref().map(|d| {
            let (e, d) = (self.eval.clone(), d.clone());
            Arc::new(move |r: f64, xi: &Direction| 2.0 * e(r, xi) * d(r, xi)) as Arc<EvalFn>
        });
        let d2u_dr2 = match (&self.du_dr, &self.d2u_dr2) {
            (Some(d1), Some(d2)) => {
                let (e, d1, d2) = (self.eval.clone(), d1.clone(), d2.clone());
                Some(Arc::new(move |r: f64, xi: &Direction| {
                    let dr = d1(r, xi);
                    2.0 * (dr * dr + e(r, xi) * d2(r, xi))
                }) as Arc<EvalFn>)
            }
            _ => None,
        };
        let angular = self.angular.as_ref().map(|ang| match ang {
            AngularAnalytic::Planar { d1, d2 } => {
                let (e, d1c, d2c) = (self.eval.clone(), d1.clone(), d2.clone());
                let e2 = e.clone();
                let d1b = d1.clone();
                AngularAnalytic::Planar {
                    d1: Arc::new(move |r, xi| 2.0 * e(r, xi) * d1c(r, xi)),
                    d2: Arc::new(move |r, xi| {
                        let dt = d1b(r, xi);
                        2.0 * (dt * dt + e2(r, xi) * d2c(r, xi))
                    }),
                }
            }
            AngularAnalytic::Spherical { grad, lap } => {
                let (e, g, l) = (self.eval.clone(), grad.clone(), lap.clone());
                let e2 = e.clone();
                let g2 = g.clone();
                AngularAnalytic::Spherical {
                    grad: Arc::new(move |r, xi| scale3(g(r, xi), 2.0 * e(r, xi))),
                    lap: Arc::new(move |r, xi| {
                        let gv = g2(r, xi);
                        2.0 * (dot3(gv, gv) + e2(r, xi) * l(r, xi))
                    }),
                }
            }
            AngularAnalytic::Zero => AngularAnalytic::Zero,
        });
        ScalarField {
            dim: self.dim,
            eval,
            du_dr,
            d2u_dr2,
            angular,
            flags: FieldFlags {
                nonnegative: true,
                subharmonic_claimed: self.flags.nonnegative && self.flags.subharmonic_claimed,
                convex_claimed: false,
                radial_only: self.flags.radial_only,
            },
            source: FieldSource::Closure { label: "square".into() },
        }
    }

    /// `lambda * u`, propagating analytic derivatives.
    pub fn scale(&self, lambda: f64) -> ScalarField {
        let mul = move |f: &Arc<EvalFn>| {
            let f = f.clone();
            Arc::new(move |r: f64, xi: &Direction| lambda * f(r, xi)) as Arc<EvalFn>
        };
        ScalarField {
            dim: self.dim,
            eval: mul(&self.eval),
            du_dr: self.du_dr.as_ref().map(&mul),
            d2u_dr2: self.d2u_dr2.as_ref().map(&mul),
            angular: self.angular.as_ref().map(|ang| match ang {
                AngularAnalytic::Planar { d1, d2 } => {
                    AngularAnalytic::Planar { d1: mul(d1), d2: mul(d2) }
                }
                AngularAnalytic::Spherical { grad, lap } => {
                    let g = grad.clone();
                    AngularAnalytic::Spherical {
                        grad: Arc::new(move |r, xi| scale3(g(r, xi), lambda)),
                        lap: mul(lap),
                    }
                }
                AngularAnalytic::Zero => AngularAnalytic::Zero,
            }),
            flags: FieldFlags {
                nonnegative: self.flags.nonnegative && lambda >= 0.0,
                subharmonic_claimed: self.flags.subharmonic_claimed && lambda >= 0.0,
                convex_claimed: self.flags.convex_claimed && lambda >= 0.0,
                radial_only: self.flags.radial_only,
            },
            source: FieldSource::Closure { label: "scale".into() },
        }
    }

    /// `a*u + b*g`. Analytic derivatives survive only when both operands carry
    /// matching analytic data.
    pub fn lincomb(a: f64, u: &ScalarField, b: f64, g: &ScalarField) -> Result<ScalarField> {
        if u.dim != g.dim {
            return Err(Error::InvalidInput("dimension mismatch in field combination".into()));
        }
        let comb = |f: &Arc<EvalFn>, h: &Arc<EvalFn>| {
            let (f, h) = (f.clone(), h.clone());
            Arc::new(move |r: f64, xi: &Direction| a * f(r, xi) + b * h(r, xi)) as Arc<EvalFn>
        };
        let eval = comb(&u.eval, &g.eval);
        let du_dr = match (&u.du_dr, &g.du_dr) {
            (Some(x), Some(y)) => Some(comb(x, y)),
            _ => None,
        };
        let d2u_dr2 = match (&u.d2u_dr2, &g.d2u_dr2) {
            (Some(x), Some(y)) => Some(comb(x, y)),
            _ => None,
        };
        let angular = match (&u.angular, &g.angular) {
            (Some(AngularAnalytic::Planar { d1: a1, d2: a2 }), Some(AngularAnalytic::Planar { d1: b1, d2: b2 })) => {
                Some(AngularAnalytic::Planar { d1: comb(a1, b1), d2: comb(a2, b2) })
            }
            (
                Some(AngularAnalytic::Spherical { grad: ga, lap: la }),
                Some(AngularAnalytic::Spherical { grad: gb, lap: lb }),
            ) => {
                let (ga, gb) = (ga.clone(), gb.clone());
                Some(AngularAnalytic::Spherical {
                    grad: Arc::new(move |r, xi| add3(scale3(ga(r, xi), a), scale3(gb(r, xi), b))),
                    lap: comb(la, lb),
                })
            }
            (Some(AngularAnalytic::Zero), Some(AngularAnalytic::Zero)) => Some(AngularAnalytic::Zero),
            _ => None,
        };
        Ok(ScalarField {
            dim: u.dim,
            eval,
            du_dr,
            d2u_dr2,
            angular,
            flags: FieldFlags {
                radial_only: u.flags.radial_only && g.flags.radial_only,
                ..FieldFlags::default()
            },
            source: FieldSource::Closure { label: "lincomb".into() },
        })
    }
}

// --- the analytic catalog ----------------------------------------------------

fn xi1(xi: &Direction) -> f64 {
    xi.components()[0]
}

fn require_angular_dim(dim: usize, name: &str) -> Result<()> {
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidInput(format!(
            "catalog field '{name}' uses directions and needs dimension 2 or 3, got {dim}"
        )));
    }
    Ok(())
}

fn radial_angular_zero(dim: usize) -> AngularAnalytic {
    match dim {
        2 => AngularAnalytic::Planar {
            d1: Arc::new(|_, _| 0.0),
            d2: Arc::new(|_, _| 0.0),
        },
        3 => AngularAnalytic::Spherical {
            grad: Arc::new(|_, _| [0.0; 3]),
            lap: Arc::new(|_, _| 0.0),
        },
        _ => AngularAnalytic::Zero,
    }
}

/// Angular analytic data for fields `u = f(r, x1)` with `x1 = r * xi_1`.
/// `du(r, xi1)` must equal `r * df/dx1`; `lap(r, xi1)` is the intrinsic
/// sphere Laplacian of `u` at unit-sphere scale.
fn angular_from_x1(
    dim: usize,
    du: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    lap: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
) -> AngularAnalytic {
    match dim {
        2 => {
            // xi = (cos t, sin t): d/dt u(r, r cos t) = -r sin t * u_x1
            let du2 = du.clone();
            AngularAnalytic::Planar {
                d1: Arc::new(move |r, xi| {
                    if let Direction::Angle(t) = xi {
                        -t.sin() * du2(r, t.cos())
                    } else {
                        0.0
                    }
                }),
                d2: Arc::new(move |r, xi| {
                    if let Direction::Angle(t) = xi {
                        lap(r, t.cos())
                    } else {
                        0.0
                    }
                }),
            }
        }
        _ => {
            // grad_{S^2} u = u_x1(r, xi1) * r-scaled tangential part of e1
            let du2 = du.clone();
            AngularAnalytic::Spherical {
                grad: Arc::new(move |r, xi| {
                    if let Direction::Unit(v) = xi {
                        let tang = add3([1.0, 0.0, 0.0], scale3(*v, -v[0]));
                        scale3(tang, du2(r, v[0]))
                    } else {
                        [0.0; 3]
                    }
                }),
                lap: Arc::new(move |r, xi| {
                    if let Direction::Unit(v) = xi {
                        lap(r, v[0])
                    } else {
                        0.0
                    }
                }),
            }
        }
    }
}

fn take_params(
    name: &str,
    params: &BTreeMap<String, f64>,
    allowed: &[(&str, f64)],
) -> Result<BTreeMap<String, f64>> {
    for k in params.keys() {
        if !allowed.iter().any(|(a, _)| a == k) {
            return Err(Error::InvalidInput(format!(
                "unknown parameter '{k}' for catalog field '{name}'"
            )));
        }
    }
    Ok(allowed
        .iter()
        .map(|(k, d)| (k.to_string(), params.get(*k).copied().unwrap_or(*d)))
        .collect())
}

/// Names of the built-in fields, alphabetized.
pub fn catalog_names() -> Vec<&'static str> {
    vec!["affine_r2", "constant", "exp_x1", "one_plus_x1", "r_pow", "x1_sq"]
}

/// Construct a catalog field with analytic derivatives.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>, dim: usize) -> Result<ScalarField> {
    let source = |p: &BTreeMap<String, f64>| FieldSource::Catalog {
        name: name.to_owned(),
        params: p.clone(),
    };
    let field = match name {
        "r_pow" => {
            let p = take_params(name, params, &[("alpha", 2.0)])?;
            let alpha = p["alpha"];
            if !(alpha >= 2.0) {
                return Err(Error::InvalidInput(format!(
                    "r_pow needs alpha >= 2 for a C^2 field, got {alpha}"
                )));
            }
            ScalarField {
                dim,
                eval: Arc::new(move |r, _| r.powf(alpha)),
                du_dr: Some(Arc::new(move |r, _| alpha * r.powf(alpha - 1.0))),
                d2u_dr2: Some(Arc::new(move |r, _| {
                    alpha * (alpha - 1.0) * r.powf(alpha - 2.0)
                })),
                angular: Some(radial_angular_zero(dim)),
                flags: FieldFlags {
                    nonnegative: true,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: true,
                },
                source: source(&p),
            }
        }
        "constant" => {
            let p = take_params(name, params, &[("value", 1.0)])?;
            let c = p["value"];
            ScalarField {
                dim,
                eval: Arc::new(move |_, _| c),
                du_dr: Some(Arc::new(|_, _| 0.0)),
                d2u_dr2: Some(Arc::new(|_, _| 0.0)),
                angular: Some(radial_angular_zero(dim)),
                flags: FieldFlags {
                    nonnegative: c >= 0.0,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: true,
                },
                source: source(&p),
            }
        }
        "x1_sq" => {
            require_angular_dim(dim, name)?;
            let p = take_params(name, params, &[])?;
            ScalarField {
                dim,
                eval: Arc::new(|r, xi| {
                    let x = r * xi1(xi);
                    x * x
                }),
                du_dr: Some(Arc::new(|r, xi| {
                    let c = xi1(xi);
                    2.0 * r * c * c
                })),
                d2u_dr2: Some(Arc::new(|_, xi| {
                    let c = xi1(xi);
                    2.0 * c * c
                })),
                angular: Some(angular_from_x1(
                    dim,
                    Arc::new(|r, x| 2.0 * r * r * x),
                    Arc::new(move |r, x| {
                        if dim == 2 {
                            -2.0 * r * r * (2.0 * x * x - 1.0) // -2 r^2 cos(2t)
                        } else {
                            r * r * (2.0 - 6.0 * x * x)
                        }
                    }),
                )),
                flags: FieldFlags {
                    nonnegative: true,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: false,
                },
                source: source(&p),
            }
        }
        "exp_x1" => {
            require_angular_dim(dim, name)?;
            let p = take_params(name, params, &[])?;
            ScalarField {
                dim,
                eval: Arc::new(|r, xi| (r * xi1(xi)).exp()),
                du_dr: Some(Arc::new(|r, xi| {
                    let c = xi1(xi);
                    c * (r * c).exp()
                })),
                d2u_dr2: Some(Arc::new(|r, xi| {
                    let c = xi1(xi);
                    c * c * (r * c).exp()
                })),
                angular: Some(angular_from_x1(
                    dim,
                    Arc::new(|r, x| r * (r * x).exp()),
                    Arc::new(move |r, x| {
                        if dim == 2 {
                            (r * r * (1.0 - x * x) - r * x) * (r * x).exp()
                        } else {
                            (-2.0 * x * r + (1.0 - x * x) * r * r) * (r * x).exp()
                        }
                    }),
                )),
                flags: FieldFlags {
                    nonnegative: true,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: false,
                },
                source: source(&p),
            }
        }
        "one_plus_x1" => {
            require_angular_dim(dim, name)?;
            let p = take_params(name, params, &[])?;
            ScalarField {
                dim,
                eval: Arc::new(|r, xi| 1.0 + r * xi1(xi)),
                du_dr: Some(Arc::new(|_, xi| xi1(xi))),
                d2u_dr2: Some(Arc::new(|_, _| 0.0)),
                angular: Some(angular_from_x1(
                    dim,
                    Arc::new(|r, _| r),
                    Arc::new(move |r, x| if dim == 2 { -r * x } else { -2.0 * r * x }),
                )),
                flags: FieldFlags {
                    nonnegative: false,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: false,
                },
                source: source(&p),
            }
        }
        "affine_r2" => {
            require_angular_dim(dim, name)?;
            let p = take_params(name, params, &[("offset", 1.0), ("slope", 1.0)])?;
            let (a, b) = (p["offset"], p["slope"]);
            ScalarField {
                dim,
                eval: Arc::new(move |r, xi| a + b * r * xi1(xi) + r * r),
                du_dr: Some(Arc::new(move |r, xi| b * xi1(xi) + 2.0 * r)),
                d2u_dr2: Some(Arc::new(|_, _| 2.0)),
                angular: Some(angular_from_x1(
                    dim,
                    Arc::new(move |r, _| b * r),
                    Arc::new(move |r, x| if dim == 2 { -b * r * x } else { -2.0 * b * r * x }),
                )),
                flags: FieldFlags {
                    // a + b*x1 + r^2 >= a - b^2/4 on any model since r >= |x1|
                    nonnegative: a - b * b / 4.0 >= 0.0,
                    subharmonic_claimed: true,
                    convex_claimed: true,
                    radial_only: false,
                },
                source: source(&p),
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown catalog field '{other}' (known: {})",
                catalog_names().join(", ")
            )))
        }
    };
    field.check_pole_consistency()?;
    Ok(field)
}

// --- differential operators ---------------------------------------------------

/// Gradient data at a point: radial component, norm of the angular part, and
/// the squared norm `u_r^2 + |grad_sphere u|^2 / h^2`.
#[derive(Clone, Copy, Debug)]
pub struct Gradient {
    pub radial: f64,
    pub angular_norm: f64,
    pub norm_sq: f64,
}

fn check_field_dim(u: &ScalarField, m: &ModelManifold) -> Result<()> {
    if u.dim() != m.dim() {
        return Err(Error::InvalidInput(format!(
            "field dimension {} does not match manifold dimension {}",
            u.dim(),
            m.dim()
        )));
    }
    Ok(())
}

pub fn gradient(u: &ScalarField, m: &ModelManifold, p: &PolarPoint) -> Result<Gradient> {
    check_field_dim(u, m)?;
    if p.r == 0.0 {
        if u.flags.radial_only {
            let d = u.radial_deriv(0.0, &p.xi);
            return Ok(Gradient { radial: d, angular_norm: 0.0, norm_sq: d * d });
        }
        return Err(Error::Pole("gradient of a non-radial field at the pole".into()));
    }
    if p.r > m.r_max() {
        return Err(Error::Domain { r: p.r, r_max: m.r_max() });
    }
    let ur = u.radial_deriv(p.r, &p.xi);
    let (comps, _) = u.angular_derivs(p.r, &p.xi);
    let h = m.h(p.r);
    let ang = (comps[0] * comps[0] + comps[1] * comps[1]).sqrt() / h;
    Ok(Gradient { radial: ur, angular_norm: ang, norm_sq: ur * ur + ang * ang })
}

/// The gradient as a tangent vector usable by the exponential map: radial
/// component plus a signed angular component (dim 2) or a magnitude with a
/// unit 3-direction (dim 3), both in the orthonormal frame.
pub fn gradient_vector(
    u: &ScalarField,
    m: &ModelManifold,
    p: &PolarPoint,
) -> Result<geodesic::TangentVector> {
    check_field_dim(u, m)?;
    if p.r == 0.0 {
        if u.flags.radial_only {
            return Ok(geodesic::TangentVector {
                radial: u.radial_deriv(0.0, &p.xi),
                angular: 0.0,
                angular_dir: None,
            });
        }
        return Err(Error::Pole("gradient of a non-radial field at the pole".into()));
    }
    let ur = u.radial_deriv(p.r, &p.xi);
    let (comps, _) = u.angular_derivs(p.r, &p.xi);
    let h = m.h(p.r);
    match &p.xi {
        Direction::Angle(_) => Ok(geodesic::TangentVector {
            radial: ur,
            angular: comps[0] / h,
            angular_dir: None,
        }),
        Direction::Unit(v) => {
            let (ea, eb) = Direction::tangent_frame(*v);
            let g = add3(scale3(ea, comps[0]), scale3(eb, comps[1]));
            let gn = norm3(g);
            Ok(geodesic::TangentVector {
                radial: ur,
                angular: gn / h,
                angular_dir: if gn > 1e-300 { Some(scale3(g, 1.0 / gn)) } else { None },
            })
        }
        Direction::Radial => Ok(geodesic::TangentVector {
            radial: ur,
            angular: 0.0,
            angular_dir: None,
        }),
    }
}

/// Laplace-Beltrami operator in polar form:
/// `u_rr + (n-1)(h'/h) u_r + (sphere Laplacian of u) / h^2`.
///
/// At the pole, radial fields use the limit `n u''(0)`; other fields use a
/// small-sphere mean.
pub fn laplace_beltrami(u: &ScalarField, m: &ModelManifold, p: &PolarPoint) -> Result<f64> {
    check_field_dim(u, m)?;
    if p.r == 0.0 {
        return laplacian_at_pole(u, m);
    }
    if p.r > m.r_max() {
        return Err(Error::Domain { r: p.r, r_max: m.r_max() });
    }
    let d2 = u.radial_deriv2(p.r, &p.xi);
    let d1 = u.radial_deriv(p.r, &p.xi);
    let (_, ang_lap) = u.angular_derivs(p.r, &p.xi);
    let h = m.h(p.r);
    Ok(d2 + (m.dim() as f64 - 1.0) * m.dh(p.r) / h * d1 + ang_lap / (h * h))
}

/// Laplacian at the pole.
pub fn laplacian_at_pole(u: &ScalarField, m: &ModelManifold) -> Result<f64> {
    check_field_dim(u, m)?;
    let n = m.dim() as f64;
    let xi = Direction::canonical(m.dim());
    if u.flags.radial_only {
        // even extension through the pole: u''(0) = 2 (u(d) - u(0)) / d^2
        if u.d2u_dr2.is_some() {
            return Ok(n * u.radial_deriv2(0.0, &xi));
        }
        let u0 = u.eval(0.0, &xi);
        let est = |d: f64| 2.0 * (u.eval(d, &xi) - u0) / (d * d);
        let d = 1e-3;
        return Ok(n * (4.0 * est(0.5 * d) - est(d)) / 3.0);
    }
    if m.dim() > 3 {
        return Err(Error::Pole(
            "non-radial fields are unsupported above dimension 3".into(),
        ));
    }
    if u.has_analytic_derivatives() {
        // mean over directions of u_rr(0) equals (Laplacian at the pole)/n
        let rule = quadrature::sphere_rule(m.dim(), 32)?;
        let mut acc = 0.0;
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * u.radial_deriv2(0.0, node);
        }
        return Ok(n * acc / rule.total_weight());
    }
    // small-sphere mean: mean_{S_eps} u = u(0) + eps^2/(2n) lap u(0) + O(eps^4)
    let rule = quadrature::sphere_rule(m.dim(), 64)?;
    let u0 = u.value_at_pole();
    let est = |eps: f64| -> f64 {
        let mut acc = 0.0;
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * u.eval(eps, node);
        }
        let mean = acc / rule.total_weight();
        2.0 * n * (mean - u0) / (eps * eps)
    };
    let eps = 1e-3;
    Ok((4.0 * est(0.5 * eps) - est(eps)) / 3.0)
}

/// Result of a subharmonicity scan over a tensor grid.
#[derive(Clone, Debug)]
pub struct SubharmonicScan {
    pub ok: bool,
    pub min_laplacian: f64,
    pub at: PolarPoint,
}

/// `lap u >= -tol` sampled over `radii x directions`.
pub fn is_subharmonic_on(
    u: &ScalarField,
    m: &ModelManifold,
    radii: &[f64],
    dirs: &[Direction],
    tol: f64,
) -> Result<SubharmonicScan> {
    check_field_dim(u, m)?;
    let mut min_lap = f64::INFINITY;
    let mut at = PolarPoint::pole(m.dim());
    for &r in radii {
        for d in dirs {
            let p = PolarPoint { r, xi: d.clone() };
            let lap = laplace_beltrami(u, m, &p)?;
            if lap < min_lap {
                min_lap = lap;
                at = p;
            }
        }
    }
    Ok(SubharmonicScan { ok: min_lap >= -tol, min_laplacian: min_lap, at })
}

/// Result of a convexity scan along sampled geodesics.
#[derive(Clone, Debug)]
pub struct ConvexityScan {
    pub ok: bool,
    /// Worst centered second-difference quotient of `u` along a geodesic.
    pub worst: f64,
    pub worst_trajectory: usize,
    pub worst_param: f64,
    pub trajectories: usize,
    pub skipped: usize,
    pub clairaut_drift: f64,
    pub speed_drift: f64,
}

/// Convexity in the geodesic-segment sense: for sampled geodesics, every
/// centered second difference of `u` along the parameter must be `>= -tol`
/// (as a quotient by the squared grid step). Trajectories that leave the
/// working radius are skipped and counted.
pub fn is_convex_along_geodesics(
    u: &ScalarField,
    m: &ModelManifold,
    spec: &SamplerSpec,
    tol: f64,
) -> Result<ConvexityScan> {
    check_field_dim(u, m)?;
    if m.dim() > 3 && !u.flags.radial_only {
        return Err(Error::InvalidInput(
            "directional fields are unsupported above dimension 3".into(),
        ));
    }
    let trajs = geodesic::sample_geodesics(m, spec)?;
    let mut scan = ConvexityScan {
        ok: true,
        worst: f64::INFINITY,
        worst_trajectory: 0,
        worst_param: 0.0,
        trajectories: trajs.len(),
        skipped: 0,
        clairaut_drift: 0.0,
        speed_drift: 0.0,
    };
    for (ti, traj) in trajs.iter().enumerate() {
        if traj.escaped {
            scan.skipped += 1;
            continue;
        }
        scan.clairaut_drift = scan.clairaut_drift.max(traj.clairaut_drift);
        scan.speed_drift = scan.speed_drift.max(traj.speed_drift);
        let vals: Vec<f64> = (0..traj.len()).map(|i| u.eval_at(&traj.point(i))).collect();
        for i in 1..vals.len().saturating_sub(1) {
            let ds = traj.params[i + 1] - traj.params[i];
            let q = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / (ds * ds);
            if q < scan.worst {
                scan.worst = q;
                scan.worst_trajectory = ti;
                scan.worst_param = traj.params[i];
            }
        }
    }
    scan.ok = scan.worst >= -tol;
    Ok(scan)
}
