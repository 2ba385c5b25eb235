//! Sphere and ball quadrature.
//!
//! Dimension 2 uses the equispaced trapezoid rule (spectrally exact for
//! trigonometric polynomials below the node count); dimension 3 uses a
//! Gauss-Legendre x trapezoid product rule in (cos theta, phi). Radial
//! integration over balls is panelized Gauss-Legendre, shells of at most unit
//! length. Summation order is fixed so results are reproducible.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Direction, PolarPoint, ScalarField};
use crate::manifold::{unit_sphere_measure, ModelManifold};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A quadrature rule on the unit sphere: nodes, positive weights summing to
/// the total sphere measure, and the polynomial exactness degree.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl SphereRule {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Build a sphere rule for dimension 2 or 3.
///
/// Dimension 2: `order` equispaced angles, weight `2 pi / order` each.
/// Dimension 3: `order` Gauss-Legendre nodes in `cos theta` times `2 order`
/// equispaced azimuths.
pub fn sphere_rule(dim: usize, order: usize) -> Result<SphereRule> {
    if order < 4 {
        return Err(Error::InvalidInput(format!("sphere rule order must be >= 4, got {order}")));
    }
    match dim {
        2 => {
            let w = 2.0 * PI / order as f64;
            let nodes = (0..order)
                .map(|k| Direction::angle(2.0 * PI * k as f64 / order as f64))
                .collect();
            Ok(SphereRule { dim, nodes, weights: vec![w; order], exactness: order - 1 })
        }
        3 => {
            let (tn, tw) = gauss_legendre(order);
            let nphi = 2 * order;
            let wphi = 2.0 * PI / nphi as f64;
            let mut nodes = Vec::with_capacity(order * nphi);
            let mut weights = Vec::with_capacity(order * nphi);
            for (t, wt) in tn.iter().zip(&tw) {
                let s = (1.0 - t * t).max(0.0).sqrt();
                for j in 0..nphi {
                    let phi = 2.0 * PI * j as f64 / nphi as f64;
                    nodes.push(Direction::Unit([s * phi.cos(), s * phi.sin(), *t]));
                    weights.push(wt * wphi);
                }
            }
            Ok(SphereRule { dim, nodes, weights, exactness: 2 * order - 1 })
        }
        _ => Err(Error::InvalidInput(format!(
            "sphere quadrature supports dimensions 2 and 3; dimension {dim} is radial-only"
        ))),
    }
}

/// Single-node placeholder rule for radial-only work in dimension >= 4.
pub fn radial_rule(dim: usize) -> SphereRule {
    SphereRule {
        dim,
        nodes: vec![Direction::Radial],
        weights: vec![unit_sphere_measure(dim)],
        exactness: usize::MAX,
    }
}

/// Rule selection: full angular rule for dim 2/3, placeholder otherwise.
pub fn rule_for(m: &ModelManifold, order: usize) -> Result<SphereRule> {
    if m.dim() <= 3 {
        sphere_rule(m.dim(), order)
    } else {
        Ok(radial_rule(m.dim()))
    }
}

/// Weighted average over the sphere of radius `r` of an arbitrary integrand.
pub fn sphere_mean_fn<F>(mut f: F, r: f64, rule: &SphereRule) -> Result<f64>
where
    F: FnMut(f64, &Direction) -> f64,
{
    let mut acc = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(r, node);
        if !v.is_finite() {
            return Err(Error::NonFinite { r, what: format!("integrand at {}", PolarPoint { r, xi: node.clone() }) });
        }
        acc += w * v;
    }
    Ok(acc / rule.total_weight())
}

/// Spherical mean of a field; at `r = 0` this is the value at the pole.
pub fn sphere_mean(u: &ScalarField, m: &ModelManifold, r: f64, rule: &SphereRule) -> Result<f64> {
    if r < 0.0 || r > m.r_max() {
        return Err(Error::Domain { r, r_max: m.r_max() });
    }
    if r == 0.0 {
        return Ok(u.value_at_pole());
    }
    if u.flags.radial_only {
        let v = u.eval(r, &Direction::canonical(m.dim()));
        if !v.is_finite() {
            return Err(Error::NonFinite { r, what: "radial field value".into() });
        }
        return Ok(v);
    }
    sphere_mean_fn(|rr, xi| u.eval(rr, xi), r, rule)
}

/// Integral of `f` over the geodesic ball of radius `r`, by shell
/// decomposition: panelized Gauss-Legendre in the radius of
/// `sphere_mean(f, t) * sphere_area(t)`.
pub fn ball_integral_fn<F>(
    mut f: F,
    m: &ModelManifold,
    r: f64,
    rule: &SphereRule,
    radial_order: usize,
) -> Result<f64>
where
    F: FnMut(f64, &Direction) -> f64,
{
    if !(r > 0.0) || r > m.r_max() {
        return Err(Error::Domain { r, r_max: m.r_max() });
    }
    if radial_order < 2 {
        return Err(Error::InvalidInput("radial quadrature order must be >= 2".into()));
    }
    let (nodes, weights) = gauss_legendre(radial_order);
    let panels = r.ceil().max(1.0) as usize;
    let dt = r / panels as f64;
    let omega = m.unit_sphere_measure();
    let p = m.dim() as i32 - 1;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 * dt;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = a + 0.5 * dt * (x + 1.0);
            let mean = sphere_mean_fn(&mut f, t, rule)?;
            total += w * 0.5 * dt * mean * omega * m.h(t).powi(p);
        }
    }
    Ok(total)
}

pub fn ball_integral(
    u: &ScalarField,
    m: &ModelManifold,
    r: f64,
    rule: &SphereRule,
    radial_order: usize,
) -> Result<f64> {
    ball_integral_fn(|rr, xi| u.eval(rr, xi), m, r, rule, radial_order)
}

#[derive(Clone, Copy, Debug)]
pub enum Region {
    Ball(f64),
    Sphere(f64),
}

/// Direction grid used by the sup estimator.
pub fn sup_directions(dim: usize, count: usize) -> Vec<Direction> {
    match dim {
        2 => (0..count.max(1))
            .map(|k| Direction::angle(2.0 * PI * k as f64 / count.max(1) as f64))
            .collect(),
        3 => {
            let order = (((count.max(8) as f64) / 2.0).sqrt().ceil() as usize).max(4);
            sphere_rule(3, order).expect("order >= 4").nodes
        }
        _ => vec![Direction::Radial],
    }
}

/// Grid estimate of the supremum of `u` over a ball or sphere; a lower bound
/// on the true supremum. Returns the maximum and where it was attained.
pub fn sup_on(
    u: &ScalarField,
    m: &ModelManifold,
    region: Region,
    radii_count: usize,
    dir_count: usize,
) -> Result<(f64, PolarPoint)> {
    let dirs = sup_directions(m.dim(), dir_count);
    let mut best = f64::NEG_INFINITY;
    let mut at = PolarPoint::pole(m.dim());
    let mut consider = |r: f64, xi: &Direction| {
        let v = u.eval(r, xi);
        if v > best {
            best = v;
            at = PolarPoint { r, xi: xi.clone() };
        }
    };
    match region {
        Region::Ball(r) => {
            if !(r > 0.0) || r > m.r_max() {
                return Err(Error::Domain { r, r_max: m.r_max() });
            }
            let n = radii_count.max(2);
            for i in 0..n {
                let t = r * i as f64 / (n - 1) as f64;
                if t == 0.0 {
                    consider(0.0, &Direction::canonical(m.dim()));
                } else {
                    for d in &dirs {
                        consider(t, d);
                    }
                }
            }
        }
        Region::Sphere(r) => {
            if !(r > 0.0) || r > m.r_max() {
                return Err(Error::Domain { r, r_max: m.r_max() });
            }
            for d in &dirs {
                consider(r, d);
            }
        }
    }
    Ok((best, at))
}

/// Grid estimate of the infimum, same grids as `sup_on`.
pub fn inf_on(
    u: &ScalarField,
    m: &ModelManifold,
    region: Region,
    radii_count: usize,
    dir_count: usize,
) -> Result<(f64, PolarPoint)> {
    let neg = u.scale(-1.0);
    let (v, at) = sup_on(&neg, m, region, radii_count, dir_count)?;
    Ok((-v, at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use std::f64::consts::E;

    fn euclid2() -> ModelManifold {
        ModelManifold::euclidean(2, 12.0).unwrap()
    }

    fn cat(name: &str, dim: usize) -> ScalarField {
        crate::field::catalog(name, &BTreeMap::new(), dim).unwrap()
    }

    /// Modified Bessel function of the first kind, order zero, by its power
    /// series: the oracle for spherical means of exp(x1).
    fn bessel_i0(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-18 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree <= 15 exact
        for p in 0..=15 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let expect = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - expect).abs() < 1e-13, "degree {p}: {got} vs {expect}");
        }
        let (_, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn rule_weights_sum_to_sphere_measure() {
        let r2 = sphere_rule(2, 16).unwrap();
        assert!((r2.total_weight() - 2.0 * PI).abs() < 1e-12);
        assert!(r2.weights.iter().all(|&w| w > 0.0));

        let r3 = sphere_rule(3, 8).unwrap();
        assert!((r3.total_weight() - 4.0 * PI).abs() < 1e-12);
        assert!(r3.weights.iter().all(|&w| w > 0.0));

        assert!(sphere_rule(2, 3).is_err());
        assert!(sphere_rule(4, 8).is_err());
    }

    #[test]
    fn rule_exactness_examples() {
        // integral of cos^2 over the circle = pi
        let r2 = sphere_rule(2, 16).unwrap();
        let got: f64 = r2
            .nodes
            .iter()
            .zip(&r2.weights)
            .map(|(d, w)| {
                let c = d.components()[0];
                w * c * c
            })
            .sum();
        assert!((got - PI).abs() < 1e-12);

        // integral of x1^2 over S^2 = 4 pi / 3
        let r3 = sphere_rule(3, 8).unwrap();
        let got: f64 = r3
            .nodes
            .iter()
            .zip(&r3.weights)
            .map(|(d, w)| {
                let c = d.components()[0];
                w * c * c
            })
            .sum();
        assert!((got - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_mean_examples() {
        let m = euclid2();
        let rule = sphere_rule(2, 64).unwrap();

        let u = cat("x1_sq", 2);
        assert!((sphere_mean(&u, &m, 1.0, &rule).unwrap() - 0.5).abs() < 1e-12);

        let u = cat("exp_x1", 2);
        let v = sphere_mean(&u, &m, 1.0, &rule).unwrap();
        assert!((v - bessel_i0(1.0)).abs() < 1e-12);
        assert!((v - 1.266_065_877_752_008_3).abs() < 1e-12);

        let u = cat("r_pow", 2);
        assert!((sphere_mean(&u, &m, 3.0, &rule).unwrap() - 9.0).abs() < 1e-12);

        // pole value
        let u = cat("exp_x1", 2);
        assert!((sphere_mean(&u, &m, 0.0, &rule).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_mean_order_doubling_is_stable() {
        let m3 = ModelManifold::euclidean(3, 12.0).unwrap();
        for name in ["x1_sq", "exp_x1", "affine_r2"] {
            for (m, base) in [(&euclid2(), 64usize), (&m3, 16)] {
                let u = cat(name, m.dim());
                for r in [0.5, 1.0, 2.0] {
                    let a = sphere_mean(&u, m, r, &sphere_rule(m.dim(), base).unwrap()).unwrap();
                    let b = sphere_mean(&u, m, r, &sphere_rule(m.dim(), 2 * base).unwrap()).unwrap();
                    assert!((a - b).abs() < 1e-8, "{name} dim {} r {r}: {a} vs {b}", m.dim());
                }
            }
        }
    }

    #[test]
    fn ball_integral_examples() {
        let m = euclid2();
        let rule = sphere_rule(2, 64).unwrap();

        let one = cat("constant", 2);
        assert!((ball_integral(&one, &m, 1.0, &rule, 64).unwrap() - PI).abs() < 1e-10);

        let u = cat("r_pow", 2);
        assert!((ball_integral(&u, &m, 1.0, &rule, 64).unwrap() - PI / 2.0).abs() < 1e-10);

        // 2 pi * integral_0^1 I0(t) t dt = 2 pi I1(1), by the series oracle
        let u = cat("exp_x1", 2);
        let got = ball_integral(&u, &m, 1.0, &rule, 64).unwrap();
        let series: f64 = {
            // sum_k 1 / (4^k (k!)^2 (2k+2))
            let mut term = 1.0_f64;
            let mut sum = 0.5;
            for k in 1..40 {
                term /= 4.0 * (k as f64) * (k as f64);
                sum += term / (2.0 * k as f64 + 2.0);
            }
            2.0 * PI * sum
        };
        assert!((got - series).abs() < 1e-9, "{got} vs {series}");
        assert!((got - 3.550_999_378_424_362).abs() < 1e-9);
    }

    #[test]
    fn ball_integral_is_linear_and_consistent_with_volume() {
        let rule2 = sphere_rule(2, 64).unwrap();
        let m = euclid2();
        let u = cat("exp_x1", 2);
        let g = cat("x1_sq", 2);
        let (a, b) = (2.0, -0.7);
        let comb = ScalarField::lincomb(a, &u, b, &g).unwrap();
        let lhs = ball_integral(&comb, &m, 2.0, &rule2, 64).unwrap();
        let rhs = a * ball_integral(&u, &m, 2.0, &rule2, 64).unwrap()
            + b * ball_integral(&g, &m, 2.0, &rule2, 64).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);

        for m in [
            ModelManifold::euclidean(2, 8.0).unwrap(),
            ModelManifold::euclidean(3, 8.0).unwrap(),
            ModelManifold::hyperbolic(2, 1.0, 8.0).unwrap(),
            ModelManifold::paraboloid(2, 8.0).unwrap(),
        ] {
            let rule = rule_for(&m, if m.dim() == 2 { 64 } else { 16 }).unwrap();
            let one = cat("constant", m.dim());
            for r in [0.5, 1.5, 4.0] {
                let q = ball_integral(&one, &m, r, &rule, 64).unwrap();
                let v = m.ball_volume(r).unwrap();
                assert!((q - v).abs() <= 1e-8 * v, "vol mismatch on {:?} at {r}", m.warp().kind);
            }
        }
    }

    #[test]
    fn ball_integral_rejects_non_finite_samples() {
        let m = euclid2();
        let rule = sphere_rule(2, 16).unwrap();
        let res = ball_integral_fn(|r, _| 1.0 / (r - 0.5), &m, 1.0, &rule, 64);
        // the pole of the integrand is not on a node, so this integrates fine
        assert!(res.is_ok());
        let res = ball_integral_fn(|_, _| f64::NAN, &m, 1.0, &rule, 8);
        assert!(matches!(res, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn sup_examples() {
        let m = euclid2();
        let u = cat("r_pow", 2);
        let (s, at) = sup_on(&u, &m, Region::Ball(2.0), 200, 256).unwrap();
        assert!((s - 4.0).abs() < 1e-12);
        assert!((at.r - 2.0).abs() < 1e-12);

        let u = cat("exp_x1", 2);
        let (s, at) = sup_on(&u, &m, Region::Sphere(1.0), 200, 256).unwrap();
        assert!((s - E).abs() < 1e-12);
        assert_eq!(at.xi, Direction::angle(0.0));

        let u = cat("x1_sq", 2);
        let (s, _) = sup_on(&u, &m, Region::Ball(1.0), 200, 256).unwrap();
        assert!((s - 1.0).abs() < 1e-12);

        let (lo, _) = inf_on(&cat("one_plus_x1", 2), &m, Region::Ball(0.9), 100, 128).unwrap();
        assert!((lo - 0.1).abs() < 1e-9);
    }

    #[test]
    fn radial_rule_supports_high_dimensions() {
        let m = ModelManifold::euclidean(5, 6.0).unwrap();
        let rule = rule_for(&m, 64).unwrap();
        let u = cat("r_pow", 5);
        assert!((sphere_mean(&u, &m, 2.0, &rule).unwrap() - 4.0).abs() < 1e-12);
        // volume of the unit 5-ball is 8 pi^2 / 15
        let one = cat("constant", 5);
        let got = ball_integral(&one, &m, 1.0, &rule, 64).unwrap();
        assert!((got - 8.0 * PI * PI / 15.0).abs() < 1e-10);
    }
}
