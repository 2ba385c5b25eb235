//! Rotationally symmetric manifolds with a pole, described by a warping
//! function `h`: the metric is `dr^2 + h(r)^2 dTheta^2` in geodesic polar
//! coordinates. Every metric quantity used elsewhere derives from `h`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerances for the smooth-pole normalization check `h(0)=0, h'(0)=1`,
/// verified numerically near the pole.
const POLE_CHECK_RADIUS: f64 = 1e-6;
const POLE_CHECK_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub enum WarpKind {
    Euclidean,
    Hyperbolic { a: f64 },
    Paraboloid,
    Custom { expr: String },
}

/// Warping function with first and second derivatives.
///
/// For integrator stages the function is extended through the pole with
/// `h(-r) = -h(r)` (odd), `h'` even, `h''` odd, which is the smooth
/// continuation of a polar metric.
#[derive(Clone)]
pub struct WarpingFunction {
    pub kind: WarpKind,
    h: RadialFn,
    dh: RadialFn,
    ddh: RadialFn,
}

impl std::fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WarpingFunction").field("kind", &self.kind).finish()
    }
}

/// Arc length along the profile curve of the revolved parabola `z = t^2/2`,
/// measured from the apex: `arc(t) = (t sqrt(1+t^2) + asinh t) / 2`.
fn parabola_arc(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Invert `parabola_arc` by safeguarded Newton iteration.
fn parabola_profile(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0_f64;
    let mut hi = (2.0 * r).sqrt().max(1.0) + 1.0;
    while parabola_arc(hi) < r {
        hi *= 2.0;
    }
    // arc(t) ~ t near 0 and ~ t^2/2 for large t
    let mut t = if r < 1.0 { r } else { (2.0 * r).sqrt() };
    t = t.clamp(lo, hi);
    for _ in 0..60 {
        let f = parabola_arc(t) - r;
        if f.abs() <= 1e-13 * r.max(1.0) {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let step = f / (1.0 + t * t).sqrt();
        let mut next = t - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= f64::EPSILON * t.abs() {
            t = next;
            break;
        }
        t = next;
    }
    t
}

impl WarpingFunction {
    pub fn euclidean() -> Self {
        Self {
            kind: WarpKind::Euclidean,
            h: Arc::new(|r| r),
            dh: Arc::new(|_| 1.0),
            ddh: Arc::new(|_| 0.0),
        }
    }

    /// `h(r) = sinh(a r)/a`, constant sectional curvature `-a^2`.
    pub fn hyperbolic(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("hyperbolic scale must be positive, got {a}")));
        }
        Ok(Self {
            kind: WarpKind::Hyperbolic { a },
            h: Arc::new(move |r| (a * r).sinh() / a),
            dh: Arc::new(move |r| (a * r).cosh()),
            ddh: Arc::new(move |r| a * (a * r).sinh()),
        })
    }

    /// Paraboloid of revolution `z = t^2/2`, parameterized by arc length from
    /// the apex: `h(r) = t(r)` with `h' = (1+h^2)^{-1/2}`. A noncompact model
    /// with strictly positive sectional curvature.
    pub fn paraboloid() -> Self {
        Self {
            kind: WarpKind::Paraboloid,
            h: Arc::new(parabola_profile),
            dh: Arc::new(|r| {
                let t = parabola_profile(r);
                1.0 / (1.0 + t * t).sqrt()
            }),
            ddh: Arc::new(|r| {
                let t = parabola_profile(r);
                -t / (1.0 + t * t).powi(2)
            }),
        }
    }

    /// Custom warping from an expression in the single variable `r`.
    /// Derivatives are formed by centered differences.
    pub fn custom_expr(text: &str) -> Result<Self> {
        let ast = expr::parse(text, 1)?;
        if ast.max_coord() > 0 {
            return Err(Error::InvalidInput(
                "warping expressions may use only the variable r".into(),
            ));
        }
        let ast = Arc::new(ast);
        let e0 = ast.clone();
        let h: RadialFn = Arc::new(move |r| e0.eval(r, &[0.0; 3]));
        let h1 = h.clone();
        let dh: RadialFn = Arc::new(move |r| {
            let d = 1e-5 * r.abs().max(1.0);
            (h1(r + d) - h1(r - d)) / (2.0 * d)
        });
        let h2 = h.clone();
        let ddh: RadialFn = Arc::new(move |r| {
            let d = 1e-4 * r.abs().max(1.0);
            (h2(r + d) - 2.0 * h2(r) + h2(r - d)) / (d * d)
        });
        Ok(Self { kind: WarpKind::Custom { expr: text.to_owned() }, h, dh, ddh })
    }

    /// Custom warping from analytic callables (mainly for tests).
    pub fn custom_fns(
        label: &str,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddh: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: WarpKind::Custom { expr: label.to_owned() },
            h: Arc::new(h),
            dh: Arc::new(dh),
            ddh: Arc::new(ddh),
        }
    }

    /// `h(r)`, odd-extended through the pole.
    pub fn eval(&self, r: f64) -> f64 {
        if r < 0.0 {
            -(self.h)(-r)
        } else {
            (self.h)(r)
        }
    }

    /// `h'(r)`, even-extended.
    pub fn deriv1(&self, r: f64) -> f64 {
        (self.dh)(r.abs())
    }

    /// `h''(r)`, odd-extended.
    pub fn deriv2(&self, r: f64) -> f64 {
        if r < 0.0 {
            -(self.ddh)(-r)
        } else {
            (self.ddh)(r)
        }
    }

    /// Smooth-pole normalization, positivity and derivative consistency on
    /// `(0, r_max]`. Custom warpings that fail the pole normalization are
    /// rejected rather than reinterpreted.
    fn validate(&self, r_max: f64) -> Result<()> {
        let eps = POLE_CHECK_RADIUS;
        let h_eps = self.eval(eps);
        if h_eps.abs() > POLE_CHECK_TOL {
            return Err(Error::InvalidInput(format!(
                "warping function violates h(0) = 0: h({eps}) = {h_eps}"
            )));
        }
        let dh_eps = self.deriv1(eps);
        if (dh_eps - 1.0).abs() > POLE_CHECK_TOL {
            return Err(Error::InvalidInput(format!(
                "warping function violates h'(0) = 1: h'({eps}) = {dh_eps}"
            )));
        }
        let samples = 256;
        for i in 1..=samples {
            let r = r_max * i as f64 / samples as f64;
            let h = self.eval(r);
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "warping function must be positive on (0, r_max]: h({r}) = {h}"
                )));
            }
            // cross-check the supplied derivatives against centered differences
            let d = 1e-4 * r.max(1.0);
            if r > 2.0 * d && r + d <= r_max {
                let fd1 = (self.eval(r + d) - self.eval(r - d)) / (2.0 * d);
                let a1 = self.deriv1(r);
                if (fd1 - a1).abs() > 1e-3 * a1.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "warping derivative inconsistent at r = {r}: h' = {a1}, finite difference = {fd1}"
                    )));
                }
                let fd2 = (self.deriv1(r + d) - self.deriv1(r - d)) / (2.0 * d);
                let a2 = self.deriv2(r);
                if (fd2 - a2).abs() > 1e-3 * a2.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "warping second derivative inconsistent at r = {r}: h'' = {a2}, finite difference = {fd2}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Lanczos approximation of the Gamma function (g = 7, 9 terms), accurate to
/// about 1e-13 relative on the positive axis.
pub fn gamma(z: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        // reflection formula
        return PI / ((PI * z).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * x
}

/// Total measure of the unit (n-1)-sphere, `2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_measure(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// Volume of the Euclidean unit n-ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_measure(n) / n as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Curvatures {
    /// Sectional curvature of planes containing the radial direction, `-h''/h`.
    pub k_radial: f64,
    /// Sectional curvature of planes tangent to the distance sphere,
    /// `(1 - h'^2)/h^2`; undefined for surfaces.
    pub k_tangential: Option<f64>,
    /// Ricci curvature in the radial direction, `(n-1) * k_radial`.
    pub ricci_radial: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    RicciNonneg,
    SectionalPositive,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::RicciNonneg => "ricci_nonnegative",
            Hypothesis::SectionalPositive => "sectional_positive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisVerdict {
    pub hypothesis: Hypothesis,
    pub ok: bool,
    /// Smallest curvature quantity encountered over the sample grid.
    pub worst_value: f64,
    pub worst_radius: f64,
}

/// A model manifold: dimension, warping function, and a working radius.
///
/// Dimension 2 and 3 have full angular support; higher dimensions are
/// restricted to radial fields by the callers that need directions.
#[derive(Clone, Debug)]
pub struct ModelManifold {
    dim: usize,
    warp: WarpingFunction,
    r_max: f64,
}

impl ModelManifold {
    pub fn new(dim: usize, warp: WarpingFunction, r_max: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {dim}")));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
        }
        warp.validate(r_max)?;
        Ok(Self { dim, warp, r_max })
    }

    pub fn euclidean(dim: usize, r_max: f64) -> Result<Self> {
        Self::new(dim, WarpingFunction::euclidean(), r_max)
    }

    pub fn hyperbolic(dim: usize, a: f64, r_max: f64) -> Result<Self> {
        Self::new(dim, WarpingFunction::hyperbolic(a)?, r_max)
    }

    pub fn paraboloid(dim: usize, r_max: f64) -> Result<Self> {
        Self::new(dim, WarpingFunction::paraboloid(), r_max)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn warp(&self) -> &WarpingFunction {
        &self.warp
    }

    pub fn h(&self, r: f64) -> f64 {
        self.warp.eval(r)
    }

    pub fn dh(&self, r: f64) -> f64 {
        self.warp.deriv1(r)
    }

    pub fn ddh(&self, r: f64) -> f64 {
        self.warp.deriv2(r)
    }

    /// Total measure of the unit sphere in the tangent space at the pole.
    pub fn unit_sphere_measure(&self) -> f64 {
        unit_sphere_measure(self.dim)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || r > self.r_max || !r.is_finite() {
            return Err(Error::Domain { r, r_max: self.r_max });
        }
        Ok(())
    }

    /// Area of the geodesic sphere of radius `r`: `omega_{n-1} h(r)^{n-1}`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.unit_sphere_measure() * self.h(r).powi(self.dim as i32 - 1))
    }

    /// Volume of the geodesic ball of radius `r`, integrated from sphere areas
    /// by adaptive quadrature.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let omega = self.unit_sphere_measure();
        let p = self.dim as i32 - 1;
        Ok(adaptive_simpson(
            &|t| if t <= 0.0 { 0.0 } else { omega * self.h(t).powi(p) },
            0.0,
            r,
            1e-12,
        ))
    }

    /// Laplacian of the distance function, `(n-1) h'(r) / h(r)`; singular at
    /// the pole and satisfies `r * lap(r) -> n-1` as `r -> 0`.
    pub fn laplacian_of_r(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok((self.dim as f64 - 1.0) * self.dh(r) / self.h(r))
    }

    pub fn curvatures(&self, r: f64) -> Result<Curvatures> {
        self.check_radius(r)?;
        let h = self.h(r);
        let k_radial = -self.ddh(r) / h;
        let k_tangential = if self.dim >= 3 {
            let dh = self.dh(r);
            Some((1.0 - dh * dh) / (h * h))
        } else {
            None
        };
        Ok(Curvatures { k_radial, k_tangential, ricci_radial: (self.dim as f64 - 1.0) * k_radial })
    }

    /// Samples the curvature condition over `radii`; the condition is
    /// considered to hold when every relevant quantity stays above `-tol`.
    pub fn check_hypothesis(
        &self,
        hyp: Hypothesis,
        radii: &[f64],
        tol: f64,
    ) -> Result<HypothesisVerdict> {
        let n = self.dim as f64;
        let mut worst = f64::INFINITY;
        let mut worst_r = f64::NAN;
        for &r in radii {
            let c = self.curvatures(r)?;
            let vals: [Option<f64>; 2] = match hyp {
                // both the radial and (for n >= 3) tangential Ricci directions
                Hypothesis::RicciNonneg => [
                    Some(c.ricci_radial),
                    c.k_tangential.map(|kt| c.k_radial + (n - 2.0) * kt),
                ],
                Hypothesis::SectionalPositive => [Some(c.k_radial), c.k_tangential],
            };
            for v in vals.into_iter().flatten() {
                if v < worst {
                    worst = v;
                    worst_r = r;
                }
            }
        }
        Ok(HypothesisVerdict { hypothesis: hyp, ok: worst >= -tol, worst_value: worst, worst_radius: worst_r })
    }
}

/// Adaptive Simpson quadrature with a relative tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    let tol = rel_tol * whole.abs().max(1e-12);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
