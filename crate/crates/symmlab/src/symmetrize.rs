//! Spherical-mean symmetrization of a scalar field.
//!
//! The profile `v(r)` is the average of `u` over the geodesic sphere of
//! radius `r`. Its derivatives are formed by differentiating under the
//! integral (spherical means of the radial derivatives of `u`) rather than by
//! differencing the sampled profile, and the radial Laplacian is assembled as
//! `v'' + (n-1)(h'/h) v'`. The central identity, checked by
//! [`laplacian_consistency`], is that this radial Laplacian equals the
//! spherical mean of the full Laplacian of `u`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::{self, ScalarField};
use crate::manifold::ModelManifold;
use crate::quadrature::{sphere_mean_fn, SphereRule};

/// A sampled symmetrization: values, first and second derivatives, and the
/// radial Laplacian on a grid whose first entry is always the pole.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub ddv: Vec<f64>,
    /// `ddv + (n-1)(h'/h) dv` for `r > 0`; the origin entry holds the limit
    /// `n * ddv(0)`.
    pub lap_v: Vec<f64>,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Index of a grid radius (exact match).
    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.radii.iter().position(|&x| x == r)
    }

    pub fn value_at(&self, r: f64) -> Option<f64> {
        self.index_of(r).map(|i| self.v[i])
    }
}

/// Default profile grid: geometric radii from `1e-3` to `0.9 r_max` (the pole
/// is prepended by `symmetrize`).
pub fn default_profile_radii(r_max: f64) -> Vec<f64> {
    let lo: f64 = 1e-3;
    let hi = 0.9 * r_max;
    let count = 200;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Build the symmetrization of `u` on `radii` (sorted, within `[0, r_max]`;
/// the pole is prepended when absent).
pub fn symmetrize(
    u: &ScalarField,
    m: &ModelManifold,
    radii: &[f64],
    rule: &SphereRule,
) -> Result<RadialProfile> {
    if u.dim() != m.dim() {
        return Err(Error::InvalidInput("field/manifold dimension mismatch".into()));
    }
    let mut grid: Vec<f64> = Vec::with_capacity(radii.len() + 1);
    if radii.first().copied() != Some(0.0) {
        grid.push(0.0);
    }
    grid.extend_from_slice(radii);
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidInput(format!(
                "profile radii must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&hi) = grid.last() {
        if hi > m.r_max() {
            return Err(Error::Domain { r: hi, r_max: m.r_max() });
        }
    }

    let n = grid.len();
    let mut p = RadialProfile {
        radii: grid,
        v: Vec::with_capacity(n),
        dv: Vec::with_capacity(n),
        ddv: Vec::with_capacity(n),
        lap_v: Vec::with_capacity(n),
    };
    for i in 0..n {
        let r = p.radii[i];
        let v = sphere_mean_fn(|rr, xi| u.eval(rr, xi), r, rule)?;
        let dv = sphere_mean_fn(|rr, xi| u.radial_deriv(rr, xi), r, rule)?;
        let ddv = sphere_mean_fn(|rr, xi| u.radial_deriv2(rr, xi), r, rule)?;
        let lap = if r > 0.0 {
            ddv + m.laplacian_of_r(r)? * dv
        } else {
            // limit of the radial Laplacian at the pole
            m.dim() as f64 * ddv
        };
        p.v.push(v);
        p.dv.push(dv);
        p.ddv.push(ddv);
        p.lap_v.push(lap);
    }
    Ok(p)
}

/// Recompute the radial Laplacian `ddv + (n-1)(h'/h) dv` from the stored
/// derivative columns.
pub fn radial_laplacian(p: &RadialProfile, m: &ModelManifold) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let r = p.radii[i];
        out.push(if r > 0.0 {
            p.ddv[i] + m.laplacian_of_r(r)? * p.dv[i]
        } else {
            m.dim() as f64 * p.ddv[i]
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    /// Worst relative discrepancy between the profile Laplacian and the
    /// spherical mean of the field Laplacian.
    pub max_rel: f64,
    pub at_radius: f64,
    /// Spherical mean of the field Laplacian per grid radius (pole included).
    pub mean_lap: Vec<f64>,
}

/// The module's central oracle: compare `lap_v` against the spherical mean of
/// the Laplace-Beltrami operator applied to `u`, radius by radius.
pub fn laplacian_consistency(
    u: &ScalarField,
    m: &ModelManifold,
    p: &RadialProfile,
    rule: &SphereRule,
) -> Result<ConsistencyReport> {
    let mut max_rel = 0.0_f64;
    let mut at = 0.0;
    let mut means = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let r = p.radii[i];
        let mean = if r == 0.0 {
            field::laplacian_at_pole(u, m)?
        } else {
            sphere_mean_fn(
                |rr, xi| {
                    field::laplace_beltrami(u, m, &field::PolarPoint { r: rr, xi: xi.clone() })
                        .unwrap_or(f64::NAN)
                },
                r,
                rule,
            )?
        };
        means.push(mean);
        if r > 0.0 {
            let rel = (p.lap_v[i] - mean).abs() / p.lap_v[i].abs().max(mean.abs()).max(1.0);
            if rel > max_rel {
                max_rel = rel;
                at = r;
            }
        }
    }
    Ok(ConsistencyReport { max_rel, at_radius: at, mean_lap: means })
}

#[derive(Clone, Debug)]
pub struct OriginLimits {
    pub dv0: f64,
    pub ddv0: f64,
    pub lap_limit: f64,
    /// `(0, lap_u(pole)/n, lap_u(pole))` when the pole Laplacian is available.
    pub predicted: Option<(f64, f64, f64)>,
    pub deviation: Option<(f64, f64, f64)>,
}

/// Estimate `v'(0)`, `v''(0)` and the limit of the radial Laplacian at the
/// pole by Richardson extrapolation from small radii, and compare with the
/// values predicted from the Laplacian of `u` at the pole.
pub fn origin_limits(u: &ScalarField, m: &ModelManifold, rule: &SphereRule) -> Result<OriginLimits> {
    let h = 1e-3;
    let dv = |r: f64| sphere_mean_fn(|rr, xi| u.radial_deriv(rr, xi), r, rule);
    let ddv = |r: f64| sphere_mean_fn(|rr, xi| u.radial_deriv2(rr, xi), r, rule);
    let lap = |r: f64| -> Result<f64> { Ok(ddv(r)? + m.laplacian_of_r(r)? * dv(r)?) };

    // dv(r) = v'(0) + r v''(0) + O(r^2): eliminate the linear term
    let dv0 = 2.0 * dv(0.5 * h)? - dv(h)?;
    // ddv and lap are even in r up to O(r^2)
    let ddv0 = (4.0 * ddv(0.5 * h)? - ddv(h)?) / 3.0;
    let lap_limit = (4.0 * lap(0.5 * h)? - lap(h)?) / 3.0;

    let predicted = field::laplacian_at_pole(u, m).ok().map(|l| (0.0, l / m.dim() as f64, l));
    let deviation = predicted.map(|(a, b, c)| (dv0 - a, ddv0 - b, lap_limit - c));
    Ok(OriginLimits { dv0, ddv0, lap_limit, predicted, deviation })
}

#[derive(Clone, Debug)]
pub struct ProfileVerdict {
    pub ok: bool,
    pub worst: f64,
    pub at_radius: f64,
}

/// `v' >= -tol` across the grid (the maximum principle direction for the
/// profile of a subharmonic field).
pub fn monotonicity(p: &RadialProfile, tol: f64) -> ProfileVerdict {
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for i in 0..p.len() {
        if p.dv[i] < worst {
            worst = p.dv[i];
            at = p.radii[i];
        }
    }
    ProfileVerdict { ok: worst >= -tol, worst, at_radius: at }
}

/// `lap_v >= -tol` across the grid: symmetrization preserves subharmonicity.
pub fn profile_subharmonicity(p: &RadialProfile, tol: f64) -> ProfileVerdict {
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for i in 0..p.len() {
        if p.lap_v[i] < worst {
            worst = p.lap_v[i];
            at = p.radii[i];
        }
    }
    ProfileVerdict { ok: worst >= -tol, worst, at_radius: at }
}

/// CSV dump: `r,v,dv,ddv,lap_v,mean_lap_u`, one row per grid radius with 17
/// significant digits.
pub fn write_csv<W: Write>(p: &RadialProfile, mean_lap: &[f64], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "r,v,dv,ddv,lap_v,mean_lap_u")?;
    for i in 0..p.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.radii[i], p.v[i], p.dv[i], p.ddv[i], p.lap_v[i], mean_lap[i]
        )?;
    }
    Ok(())
}
