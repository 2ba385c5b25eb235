//! Geodesics on a model manifold.
//!
//! Any geodesic stays in the totally geodesic 2-surface spanned by its initial
//! radial direction and angular velocity, so the integration reduces to the
//! planar warped system
//!
//! ```text
//! r''   =  h(r) h'(r) phi'^2
//! phi'' = -2 (h'(r)/h(r)) r' phi'
//! ```
//!
//! integrated with classical RK4 at fixed step. Two conserved quantities serve
//! as diagnostics: the speed `r'^2 + h^2 phi'^2` and the Clairaut invariant
//! `c = h^2 phi'`. Purely radial data short-circuits to the exact line
//! `r(s) = |r0 + s dr0|`, which also handles passes through the pole.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{add3, norm3, scale3, Direction, PolarPoint};
use crate::manifold::ModelManifold;

/// Radius below which the integrator switches to a flat local chart; the
/// metric there differs from the flat one by O(r^2) curvature terms.
const POLE_CHART_RADIUS: f64 = 1e-4;

/// A tangent vector in the orthonormal polar frame: radial component and
/// angular component (signed for dim 2; magnitude plus `angular_dir` for
/// dim 3).
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub radial: f64,
    pub angular: f64,
    pub angular_dir: Option<[f64; 3]>,
}

impl TangentVector {
    pub fn radial(component: f64) -> Self {
        Self { radial: component, angular: 0.0, angular_dir: None }
    }

    pub fn norm(&self) -> f64 {
        (self.radial * self.radial + self.angular * self.angular).sqrt()
    }
}

/// State of the reduced planar system.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicState {
    pub r: f64,
    pub phi: f64,
    pub dr: f64,
    pub dphi: f64,
}

/// Embedding of the reduced 2-surface back into direction space.
#[derive(Clone, Debug)]
pub enum Frame {
    /// dim 2: `theta(s) = theta0 + phi(s)`.
    Planar { theta0: f64 },
    /// dim 3: `xi(s) = cos(phi) e1 + sin(phi) e2`.
    Spatial { e1: [f64; 3], e2: [f64; 3] },
    /// dim >= 4: directions are not represented.
    RadialOnly,
}

impl Frame {
    pub fn direction(&self, phi: f64) -> Direction {
        match self {
            Frame::Planar { theta0 } => Direction::angle(theta0 + phi),
            Frame::Spatial { e1, e2 } => {
                let v = add3(scale3(*e1, phi.cos()), scale3(*e2, phi.sin()));
                let n = norm3(v);
                Direction::Unit(scale3(v, 1.0 / n))
            }
            Frame::RadialOnly => Direction::Radial,
        }
    }
}

/// A sampled unit-speed geodesic with its evaluation grid and conservation
/// diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub frame: Frame,
    pub params: Vec<f64>,
    pub states: Vec<GeodesicState>,
    pub clairaut_drift: f64,
    pub speed_drift: f64,
    pub escaped: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn point(&self, i: usize) -> PolarPoint {
        let s = &self.states[i];
        PolarPoint { r: s.r, xi: self.frame.direction(s.phi) }
    }

    pub fn endpoint(&self) -> PolarPoint {
        self.point(self.states.len() - 1)
    }
}

fn system_rhs(m: &ModelManifold, y: [f64; 4]) -> [f64; 4] {
    let [r, _phi, dr, dphi] = y;
    if dphi == 0.0 {
        // radial motion: the system degenerates to r'' = 0
        return [dr, 0.0, 0.0, 0.0];
    }
    let h = m.h(r);
    let dh = m.dh(r);
    [dr, dphi, h * dh * dphi * dphi, -2.0 * (dh / h) * dr * dphi]
}

fn rk4_step(m: &ModelManifold, y: [f64; 4], dt: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], s: f64| {
        [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]]
    };
    let k1 = system_rhs(m, y);
    let k2 = system_rhs(m, add(y, k1, 0.5 * dt));
    let k3 = system_rhs(m, add(y, k2, 0.5 * dt));
    let k4 = system_rhs(m, add(y, k3, dt));
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        y[3] + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ]
}

/// One step in a flat chart around the pole, used when `r < POLE_CHART_RADIUS`.
fn flat_chart_step(y: [f64; 4], dt: f64) -> [f64; 4] {
    let [r, phi, dr, dphi] = y;
    let (sin, cos) = phi.sin_cos();
    let p = [r * cos, r * sin];
    let v = [dr * cos - r * dphi * sin, dr * sin + r * dphi * cos];
    let q = [p[0] + dt * v[0], p[1] + dt * v[1]];
    let rq = (q[0] * q[0] + q[1] * q[1]).sqrt();
    if rq < 1e-300 {
        // exactly at the pole: keep moving radially
        return [0.0, phi, (v[0] * v[0] + v[1] * v[1]).sqrt(), 0.0];
    }
    let phi_q = q[1].atan2(q[0]);
    let dr_q = (q[0] * v[0] + q[1] * v[1]) / rq;
    let dphi_q = (q[0] * v[1] - q[1] * v[0]) / (rq * rq);
    [rq, phi_q, dr_q, dphi_q]
}

/// Fixed-step integration of the reduced system, saving `saves + 1` states on
/// a uniform parameter grid. Leaving `r_max` sets `escaped` and truncates.
pub fn integrate_reduced(
    m: &ModelManifold,
    r0: f64,
    dr0: f64,
    dphi0: f64,
    length: f64,
    step: f64,
    saves: usize,
) -> Trajectory {
    let saves = saves.max(1);
    let target = (length / step).ceil().max(1.0) as usize;
    let stride = target.div_ceil(saves);
    let n_steps = stride * saves;
    let dt = length / n_steps as f64;

    let mut y = [r0, 0.0, dr0, dphi0];
    let c0 = m.h(r0).powi(2) * dphi0;
    let speed0 = dr0 * dr0 + m.h(r0).powi(2) * dphi0 * dphi0;

    let mut traj = Trajectory {
        frame: Frame::RadialOnly,
        params: vec![0.0],
        states: vec![GeodesicState { r: y[0], phi: y[1], dr: y[2], dphi: y[3] }],
        clairaut_drift: 0.0,
        speed_drift: 0.0,
        escaped: false,
    };

    for k in 1..=n_steps {
        // engage the flat chart before a step could jump across the pole
        // region, where the angular velocity varies too fast for RK4
        y = if y[0].abs() < POLE_CHART_RADIUS + dt && y[3] != 0.0 {
            flat_chart_step(y, dt)
        } else {
            rk4_step(m, y, dt)
        };
        if y[0] < 0.0 {
            // only reachable for radial motion; fold back through the pole
            y = [-y[0], y[1] + std::f64::consts::PI, -y[2], y[3]];
        }
        if !y[0].is_finite() || y[0] > m.r_max() {
            traj.escaped = true;
            break;
        }
        let h = m.h(y[0]);
        let c = h * h * y[3];
        let speed = y[2] * y[2] + h * h * y[3] * y[3];
        traj.clairaut_drift = traj.clairaut_drift.max((c - c0).abs());
        traj.speed_drift = traj.speed_drift.max((speed - speed0).abs());
        if k % stride == 0 {
            traj.params.push(k as f64 * dt);
            traj.states.push(GeodesicState { r: y[0], phi: y[1], dr: y[2], dphi: y[3] });
        }
    }
    traj
}

/// Exact trajectory for purely radial data: `r(s) = |r0 + s dr0|` with a
/// direction flip past the pole.
fn radial_trajectory(m: &ModelManifold, r0: f64, dr0: f64, length: f64, saves: usize) -> Trajectory {
    let saves = saves.max(1);
    let mut traj = Trajectory {
        frame: Frame::RadialOnly,
        params: Vec::with_capacity(saves + 1),
        states: Vec::with_capacity(saves + 1),
        clairaut_drift: 0.0,
        speed_drift: 0.0,
        escaped: false,
    };
    for k in 0..=saves {
        let s = length * k as f64 / saves as f64;
        let line = r0 + s * dr0;
        if line.abs() > m.r_max() {
            traj.escaped = true;
            break;
        }
        traj.params.push(s);
        traj.states.push(GeodesicState {
            r: line.abs(),
            phi: if line < 0.0 { std::f64::consts::PI } else { 0.0 },
            dr: if line < 0.0 { -dr0 } else { dr0 },
            dphi: 0.0,
        });
    }
    traj
}

/// Integration step policy for a given arc length.
pub fn default_step(length: f64) -> f64 {
    (1e-3_f64).min(length / 1e4)
}

fn spatial_frame(xi: [f64; 3], dir: [f64; 3]) -> Result<Frame> {
    let mut e2 = add3(dir, scale3(xi, -crate::field::dot3(dir, xi)));
    let n = norm3(e2);
    if n < 1e-9 {
        return Err(Error::InvalidInput(
            "angular direction is parallel to the radial direction".into(),
        ));
    }
    e2 = scale3(e2, 1.0 / n);
    Ok(Frame::Spatial { e1: xi, e2 })
}

/// The exponential map: follow the geodesic with initial data `w` at `x` for
/// unit time. Fails when the trajectory leaves the working radius.
pub fn exp_map(m: &ModelManifold, x: &PolarPoint, w: &TangentVector) -> Result<PolarPoint> {
    let speed = w.norm();
    if speed < 1e-300 {
        return Ok(x.clone());
    }
    if x.r <= 1e-12 {
        if w.angular.abs() > 1e-9 * speed {
            return Err(Error::InvalidInput(
                "tangent vectors at the pole must be given radially, in the direction of the base point".into(),
            ));
        }
        let line = w.radial;
        if line.abs() > m.r_max() {
            return Err(Error::LeftDomain { s: m.r_max() / speed, r_max: m.r_max() });
        }
        let xi = if line >= 0.0 { x.xi.clone() } else { x.xi.antipode() };
        return Ok(PolarPoint { r: line.abs(), xi });
    }
    if w.angular.abs() <= 1e-12 * speed {
        let line = x.r + w.radial;
        if line.abs() > m.r_max() {
            return Err(Error::LeftDomain { s: 0.0, r_max: m.r_max() });
        }
        let xi = if line >= 0.0 { x.xi.clone() } else { x.xi.antipode() };
        return Ok(PolarPoint { r: line.abs(), xi });
    }
    let frame = match (&x.xi, &w.angular_dir) {
        (Direction::Angle(t), _) => Frame::Planar { theta0: *t },
        (Direction::Unit(v), Some(dir)) => spatial_frame(*v, *dir)?,
        (Direction::Unit(_), None) => {
            return Err(Error::InvalidInput(
                "dimension 3 tangent vectors with an angular part need angular_dir".into(),
            ))
        }
        (Direction::Radial, _) => {
            return Err(Error::InvalidInput(
                "angular tangents are not representable in radial-only dimensions".into(),
            ))
        }
    };
    let dr0 = w.radial / speed;
    let dphi0 = w.angular / speed / m.h(x.r);
    let traj = integrate_reduced(m, x.r, dr0, dphi0, speed, default_step(speed), 8);
    if traj.escaped {
        return Err(Error::LeftDomain { s: *traj.params.last().unwrap_or(&0.0), r_max: m.r_max() });
    }
    let end = traj.states.last().unwrap();
    Ok(PolarPoint { r: end.r, xi: frame.direction(end.phi) })
}

/// Deterministic sampler configuration for random geodesics.
#[derive(Clone, Copy, Debug)]
pub struct SamplerSpec {
    pub count: usize,
    pub length: f64,
    pub seed: u64,
    /// Start radii are drawn uniformly from `[r_lo_frac, r_hi_frac] * r_max`.
    pub r_lo_frac: f64,
    pub r_hi_frac: f64,
}

impl SamplerSpec {
    pub fn for_manifold(m: &ModelManifold, seed: u64) -> Self {
        Self {
            count: 24,
            length: (0.4 * m.r_max()).min(8.0),
            seed,
            r_lo_frac: 0.05,
            r_hi_frac: 0.35,
        }
    }
}

fn random_unit3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = norm3(v);
        if n > 0.1 && n <= 1.0 {
            return scale3(v, 1.0 / n);
        }
    }
}

/// Sample unit-speed geodesics with seeded pseudo-random starting points and
/// directions. Every eighth trajectory is launched exactly radially (handled
/// in closed form, exercising pole crossings); the rest keep their launch
/// angle away from radial so the reduced system stays well resolved.
pub fn sample_geodesics(m: &ModelManifold, spec: &SamplerSpec) -> Result<Vec<Trajectory>> {
    if spec.count == 0 {
        return Err(Error::InvalidInput("sampler count must be >= 1".into()));
    }
    if !(spec.length > 0.0) {
        return Err(Error::InvalidInput("sampler length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    let saves = 64;
    for k in 0..spec.count {
        let r0 = rng.gen_range(spec.r_lo_frac..spec.r_hi_frac) * m.r_max();
        let (frame, e1_dir) = match m.dim() {
            2 => {
                let t0 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                (Frame::Planar { theta0: t0 }, None)
            }
            3 => {
                let xi0 = random_unit3(&mut rng);
                (Frame::RadialOnly, Some(xi0)) // frame finished below
            }
            _ => (Frame::RadialOnly, None),
        };
        let frame = if let Some(xi0) = e1_dir {
            let (ea, eb) = Direction::tangent_frame(xi0);
            let alpha = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let e2 = add3(scale3(ea, alpha.cos()), scale3(eb, alpha.sin()));
            Frame::Spatial { e1: xi0, e2 }
        } else {
            frame
        };

        let mut traj = if k % 8 == 7 {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            radial_trajectory(m, r0, sign, spec.length, saves)
        } else {
            let psi = loop {
                let psi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                if psi.sin().abs() >= 0.2 {
                    break psi;
                }
            };
            let dr0 = psi.cos();
            let dphi0 = psi.sin() / m.h(r0);
            integrate_reduced(m, r0, dr0, dphi0, spec.length, default_step(spec.length), saves)
        };
        traj.frame = frame;
        out.push(traj);
    }
    Ok(out)
}
