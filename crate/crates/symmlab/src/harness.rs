//! Executable checks for the growth, energy and integral inequalities.
//!
//! Every check verifies its hypotheses first and returns `Inapplicable` with
//! the violated hypothesis when they fail; it never judges the inequality in
//! that case. Measured constants are extremal values over a finite radius
//! range and are reported as such, never asserted as universal bounds.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{
    self, gradient, gradient_vector, is_convex_along_geodesics, is_subharmonic_on, Direction,
    PolarPoint, ScalarField,
};
use crate::geodesic::{exp_map, SamplerSpec};
use crate::manifold::{unit_ball_volume, Hypothesis, ModelManifold};
use crate::quadrature::{
    ball_integral_fn, gauss_legendre, inf_on, rule_for, sup_directions, sup_on, Region, SphereRule,
};
use crate::symmetrize::{self, symmetrize, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckId {
    Bishop,
    ClassifyGrowth,
    ConvexOrigin,
    Energy,
    GradientIntegral,
    Growth,
    IntegralLower,
    Limsup,
    MeanValue,
}

impl CheckId {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Bishop => "bishop",
            CheckId::ClassifyGrowth => "classify_growth",
            CheckId::ConvexOrigin => "convex_origin",
            CheckId::Energy => "energy",
            CheckId::GradientIntegral => "gradient_integral",
            CheckId::Growth => "growth",
            CheckId::IntegralLower => "integral_lower",
            CheckId::Limsup => "limsup",
            CheckId::MeanValue => "mean_value",
        }
    }

    pub fn from_str(s: &str) -> Option<CheckId> {
        CheckId::all().into_iter().find(|c| c.as_str() == s)
    }

    pub fn all() -> Vec<CheckId> {
        vec![
            CheckId::Bishop,
            CheckId::ClassifyGrowth,
            CheckId::ConvexOrigin,
            CheckId::Energy,
            CheckId::GradientIntegral,
            CheckId::Growth,
            CheckId::IntegralLower,
            CheckId::Limsup,
            CheckId::MeanValue,
        ]
    }

    /// One-line description of what the check verifies, for the catalog
    /// listing.
    pub fn describe(self) -> &'static str {
        match self {
            CheckId::Bishop => "geodesic-ball volume stays at or below the flat value under nonnegative Ricci curvature",
            CheckId::ClassifyGrowth => "certifies |u| <= C r^p v(r) on the tested range against a weight profile",
            CheckId::ConvexOrigin => "lower bound on the pole value of a nonnegative convex field from the integral envelope",
            CheckId::Energy => "scaled Dirichlet energy of a ball is controlled by the squared-field profile at four times the radius",
            CheckId::GradientIntegral => "lower bound on the ball integral of u after an exponential gradient step",
            CheckId::Growth => "sup of a nonnegative subharmonic field over half-balls grows at most like r times its spherical mean",
            CheckId::IntegralLower => "ball integrals of u^p admit a positive linear lower envelope under positive curvature",
            CheckId::Limsup => "tail surrogate: scaled energy growth against the squared-field profile",
            CheckId::MeanValue => "sup over the half-ball is bounded by the ball average times a dimensional constant",
        }
    }

    /// Hypotheses required before the inequality is judged.
    pub fn hypotheses(self) -> &'static str {
        match self {
            CheckId::Bishop => "nonnegative Ricci curvature",
            CheckId::ClassifyGrowth => "positive weight profile on the grid",
            CheckId::ConvexOrigin => "nonnegative field, convex along geodesics, positive sectional curvature",
            CheckId::Energy => "nonnegative subharmonic field, nonnegative Ricci curvature",
            CheckId::GradientIntegral => "u >= 1 and |grad u| >= 1 on the ball, convex field, nonnegative Ricci curvature",
            CheckId::Growth => "nonnegative subharmonic field, nonnegative Ricci curvature, subharmonic profile",
            CheckId::IntegralLower => "nonnegative subharmonic field, positive sectional curvature, exponent p > 1",
            CheckId::Limsup => "nonnegative subharmonic field, nonnegative Ricci curvature",
            CheckId::MeanValue => "nonnegative subharmonic field, nonnegative Ricci curvature",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Concrete evidence attached to a failing or inapplicable verdict.
#[derive(Clone, Debug, Default)]
pub struct Witness {
    pub radius: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub hypothesis: Option<String>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Holds,
    Fails(Witness),
    Inapplicable(Witness),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Inapplicable(_) => "inapplicable",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) | Verdict::Inapplicable(w) => Some(w),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisDetail {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// A finite-range growth certificate: `|u| <= constant * r^degree * v(r)` on
/// the tested range with the stored constant.
#[derive(Clone, Copy, Debug)]
pub struct GrowthClass {
    pub degree: f64,
    pub constant: f64,
    pub range: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: CheckId,
    pub hypotheses: Vec<HypothesisDetail>,
    pub measured: BTreeMap<String, f64>,
    pub range: (f64, f64),
    pub verdict: Verdict,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub growth_class: Option<GrowthClass>,
}

impl CheckReport {
    pub fn hypotheses_ok(&self) -> bool {
        self.hypotheses.iter().all(|h| h.ok)
    }
}

/// Tolerances used by the harness; `verdict` defaults per field (1e-7 with
/// analytic derivatives, 1e-5 with finite differences only).
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub identity: f64,
    pub verdict: Option<f64>,
    pub curvature: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-7, verdict: None, curvature: 1e-9, inequality: 1e-9 }
    }
}

/// Execution context tying a manifold, a field, quadrature settings and
/// tolerances together.
pub struct Harness<'a> {
    pub manifold: &'a ModelManifold,
    pub field: &'a ScalarField,
    pub rule: SphereRule,
    pub radial_order: usize,
    pub sup_radii: usize,
    pub sup_dirs: usize,
    pub tol: Tolerances,
    pub seed: u64,
}

impl<'a> Harness<'a> {
    pub fn new(
        manifold: &'a ModelManifold,
        field: &'a ScalarField,
        sphere_order: usize,
        radial_order: usize,
        sup_radii: usize,
        sup_dirs: usize,
        tol: Tolerances,
        seed: u64,
    ) -> Result<Self> {
        if field.dim() != manifold.dim() {
            return Err(Error::InvalidInput("field/manifold dimension mismatch".into()));
        }
        Ok(Self {
            manifold,
            field,
            rule: rule_for(manifold, sphere_order)?,
            radial_order,
            sup_radii,
            sup_dirs,
            tol,
            seed,
        })
    }

    pub fn verdict_tol(&self) -> f64 {
        self.tol
            .verdict
            .unwrap_or(if self.field.has_analytic_derivatives() { 1e-7 } else { 1e-5 })
    }

    fn tolerances_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("identity".into(), self.tol.identity),
            ("verdict".into(), self.verdict_tol()),
            ("curvature".into(), self.tol.curvature),
            ("inequality".into(), self.tol.inequality),
        ])
    }

    fn hyp_radii(&self, hi: f64) -> Vec<f64> {
        let lo = (0.005 * hi).max(1e-3).min(hi / 2.0);
        let count = 64;
        (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect()
    }

    fn default_sampler(&self) -> SamplerSpec {
        SamplerSpec::for_manifold(self.manifold, self.seed)
    }

    // --- hypothesis verification -------------------------------------------

    fn hyp_nonnegative(&self, radius: f64) -> Result<HypothesisDetail> {
        let (min, at) = inf_on(self.field, self.manifold, Region::Ball(radius), self.sup_radii, self.sup_dirs)?;
        Ok(HypothesisDetail {
            name: "nonnegative".into(),
            ok: min >= -self.verdict_tol(),
            detail: format!("min u = {min:.6e} at {at}"),
        })
    }

    fn hyp_subharmonic(&self, radius: f64) -> Result<HypothesisDetail> {
        let radii = self.hyp_radii(radius);
        let dirs = sup_directions(self.manifold.dim(), self.sup_dirs.min(64));
        let scan = is_subharmonic_on(self.field, self.manifold, &radii, &dirs, self.verdict_tol())?;
        Ok(HypothesisDetail {
            name: "subharmonic".into(),
            ok: scan.ok,
            detail: format!("min lap u = {:.6e} at {}", scan.min_laplacian, scan.at),
        })
    }

    fn hyp_curvature(&self, hyp: Hypothesis, radius: f64) -> Result<HypothesisDetail> {
        let v = self.manifold.check_hypothesis(hyp, &self.hyp_radii(radius), self.tol.curvature)?;
        Ok(HypothesisDetail {
            name: hyp.as_str().into(),
            ok: v.ok,
            detail: format!("worst curvature value {:.6e} at r = {:.6}", v.worst_value, v.worst_radius),
        })
    }

    fn hyp_convex(&self) -> Result<(HypothesisDetail, field::ConvexityScan)> {
        let scan = is_convex_along_geodesics(
            self.field,
            self.manifold,
            &self.default_sampler(),
            self.verdict_tol(),
        )?;
        let d = HypothesisDetail {
            name: "convex".into(),
            ok: scan.ok,
            detail: format!(
                "worst second difference {:.6e} on trajectory {} (skipped {}/{})",
                scan.worst, scan.worst_trajectory, scan.skipped, scan.trajectories
            ),
        };
        Ok((d, scan))
    }

    fn gate(hyps: &[HypothesisDetail]) -> Option<Witness> {
        hyps.iter().find(|h| !h.ok).map(|h| Witness {
            hypothesis: Some(h.name.clone()),
            detail: h.detail.clone(),
            ..Witness::default()
        })
    }

    fn report(
        &self,
        id: CheckId,
        hypotheses: Vec<HypothesisDetail>,
        measured: BTreeMap<String, f64>,
        range: (f64, f64),
        verdict: Verdict,
        notes: Vec<String>,
    ) -> CheckReport {
        CheckReport {
            id,
            hypotheses,
            measured,
            range,
            verdict,
            tolerances: self.tolerances_map(),
            notes,
            growth_class: None,
        }
    }

    fn grid_range(radii: &[f64]) -> (f64, f64) {
        (radii.first().copied().unwrap_or(0.0), radii.last().copied().unwrap_or(0.0))
    }

    // --- derived quantities --------------------------------------------------

    fn ball_average_constant(&self, r: f64) -> Result<f64> {
        let (sup, _) = sup_on(self.field, self.manifold, Region::Ball(0.5 * r), self.sup_radii, self.sup_dirs)?;
        let vol = self.manifold.ball_volume(r)?;
        let integral = ball_integral_fn(
            |rr, xi| self.field.eval(rr, xi),
            self.manifold,
            r,
            &self.rule,
            self.radial_order,
        )?;
        if integral.abs() < 1e-300 {
            return Ok(if sup.abs() < 1e-300 { 0.0 } else { f64::INFINITY });
        }
        Ok(sup * vol / integral)
    }

    /// `C(r) = sup_{B_{r/2}} u * Vol(B_r) / int_{B_r} u` per grid radius.
    pub fn mean_value_curve(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
        radii.iter().map(|&r| Ok((r, self.ball_average_constant(r)?))).collect()
    }

    /// Verifies the ball-average bound and measures the smallest admissible
    /// uniform constant over the grid.
    pub fn check_mean_value(&self, radii: &[f64]) -> Result<CheckReport> {
        let r_hi = *radii.last().expect("nonempty grid");
        let hyps = vec![
            self.hyp_nonnegative(r_hi)?,
            self.hyp_subharmonic(r_hi)?,
            self.hyp_curvature(Hypothesis::RicciNonneg, r_hi)?,
        ];
        let mut measured = BTreeMap::new();
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::MeanValue, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), vec![]));
        }
        let curve = self.mean_value_curve(radii)?;
        let mut c_min = f64::NEG_INFINITY;
        let mut at = radii[0];
        let mut low = f64::INFINITY;
        for &(r, c) in &curve {
            if !c.is_finite() {
                let w = Witness {
                    radius: Some(r),
                    detail: "ball average vanished with a positive sup".into(),
                    ..Witness::default()
                };
                return Ok(self.report(CheckId::MeanValue, hyps, measured, Self::grid_range(radii), Verdict::Fails(w), vec![]));
            }
            if c > c_min {
                c_min = c;
                at = r;
            }
            low = low.min(c);
        }
        measured.insert("C_min".into(), c_min);
        measured.insert("C_min_radius".into(), at);
        measured.insert("C_grid_low".into(), low);
        Ok(self.report(CheckId::MeanValue, hyps, measured, Self::grid_range(radii), Verdict::Holds, vec![]))
    }

    /// Profile of the field on exactly the radii the growth check needs.
    fn growth_profile(&self, radii: &[f64], extra: &[f64]) -> Result<RadialProfile> {
        let mut set: Vec<f64> = radii.to_vec();
        set.extend(radii.iter().map(|&r| 2.0 * r));
        set.extend_from_slice(extra);
        set.sort_by(|a, b| a.partial_cmp(b).unwrap());
        set.dedup();
        symmetrize(self.field, self.manifold, &set, &self.rule)
    }

    /// `rho(r) = sup_{B_{r/2}} u / (r v(r))` for a prepared profile.
    pub fn growth_curve(&self, radii: &[f64], profile: &RadialProfile) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let (sup, _) = sup_on(self.field, self.manifold, Region::Ball(0.5 * r), self.sup_radii, self.sup_dirs)?;
            let v = profile
                .value_at(r)
                .ok_or_else(|| Error::InvalidInput(format!("profile misses radius {r}")))?;
            let denom = r * v;
            let rho = if denom.abs() < 1e-300 {
                if sup.abs() < 1e-300 { 0.0 } else { f64::INFINITY }
            } else {
                sup / denom
            };
            out.push((r, rho));
        }
        Ok(out)
    }

    /// Growth of the sup over half-balls against `r v(r)`, plus the
    /// `sup_{B_r} u <= C' r v(2r)` restatement and a small-radius diagnostic.
    pub fn check_growth(&self, radii: &[f64]) -> Result<CheckReport> {
        let r_hi = *radii.last().expect("nonempty grid");
        let r_lo = radii[0];
        let small: Vec<f64> = if r_lo > 0.06 {
            (0..8).map(|i| 0.05 * (r_lo / 0.05f64).powf(i as f64 / 8.0)).collect()
        } else {
            Vec::new()
        };
        let profile = self.growth_profile(radii, &small)?;

        let mut hyps = vec![
            self.hyp_nonnegative(r_hi)?,
            self.hyp_subharmonic(r_hi)?,
            self.hyp_curvature(Hypothesis::RicciNonneg, r_hi)?,
        ];
        let ps = symmetrize::profile_subharmonicity(&profile, self.verdict_tol());
        hyps.push(HypothesisDetail {
            name: "profile_subharmonic".into(),
            ok: ps.ok,
            detail: format!("min profile laplacian {:.6e} at r = {:.6}", ps.worst, ps.at_radius),
        });

        let mut measured = BTreeMap::new();
        let mut notes = Vec::new();
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::Growth, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), notes));
        }

        let curve = self.growth_curve(radii, &profile)?;
        let mut c = f64::NEG_INFINITY;
        let mut at = radii[0];
        for &(r, rho) in &curve {
            if !rho.is_finite() {
                let w = Witness {
                    radius: Some(r),
                    detail: "profile vanished with a positive sup".into(),
                    ..Witness::default()
                };
                return Ok(self.report(CheckId::Growth, hyps, measured, Self::grid_range(radii), Verdict::Fails(w), notes));
            }
            if rho > c {
                c = rho;
                at = r;
            }
        }

        // restatement with omega(r) = v(2r): sup over the full ball
        let mut c_omega = f64::NEG_INFINITY;
        for &r in radii {
            let (sup, _) = sup_on(self.field, self.manifold, Region::Ball(r), self.sup_radii, self.sup_dirs)?;
            let v2 = profile
                .value_at(2.0 * r)
                .ok_or_else(|| Error::InvalidInput(format!("profile misses radius {}", 2.0 * r)))?;
            let denom = r * v2;
            if denom.abs() > 1e-300 {
                c_omega = c_omega.max(sup / denom);
            }
        }

        measured.insert("C".into(), c);
        measured.insert("C_radius".into(), at);
        measured.insert("C_omega".into(), c_omega);
        if !small.is_empty() {
            let small_curve = self.growth_curve(&small, &profile)?;
            let max = small_curve.iter().fold(f64::NEG_INFINITY, |m, &(_, v)| m.max(v));
            measured.insert("rho_small_r_max".into(), max);
            notes.push("small-radius ratio reported as a diagnostic only".into());
        }

        let mut report = self.report(CheckId::Growth, hyps, measured, Self::grid_range(radii), Verdict::Holds, notes);
        report.growth_class = Some(GrowthClass { degree: 1.0, constant: c, range: Self::grid_range(radii) });
        Ok(report)
    }

    /// Best linear lower envelope `F(r) >= C (r - r0)` for `F(r) = int u^p`.
    pub fn check_integral_lower(&self, radii: &[f64], p: f64) -> Result<CheckReport> {
        if !(p > 1.0) {
            return Err(Error::InvalidInput(format!("integral_lower needs p > 1, got {p}")));
        }
        let r_hi = *radii.last().expect("nonempty grid");
        let hyps = vec![
            self.hyp_nonnegative(r_hi)?,
            self.hyp_subharmonic(r_hi)?,
            self.hyp_curvature(Hypothesis::SectionalPositive, r_hi)?,
        ];
        let mut measured = BTreeMap::new();
        measured.insert("p".into(), p);
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::IntegralLower, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), vec![]));
        }

        let f: Vec<f64> = radii
            .iter()
            .map(|&r| {
                ball_integral_fn(
                    |rr, xi| self.field.eval(rr, xi).max(0.0).powf(p),
                    self.manifold,
                    r,
                    &self.rule,
                    self.radial_order,
                )
            })
            .collect::<Result<_>>()?;
        measured.insert("F_hi".into(), *f.last().unwrap());

        // smallest r0 (scanned over {0} + grid) with a positive envelope slope
        let mut fit: Option<(f64, f64)> = None;
        let candidates = std::iter::once(0.0).chain(radii.iter().copied());
        for r0 in candidates {
            if r0 >= r_hi {
                break;
            }
            let mut c = f64::INFINITY;
            for (i, &r) in radii.iter().enumerate() {
                if r > r0 {
                    c = c.min(f[i] / (r - r0));
                }
            }
            if c.is_finite() && c >= 1e-12 {
                fit = Some((c, r0));
                break;
            }
        }
        match fit {
            Some((c, r0)) => {
                measured.insert("C".into(), c);
                measured.insert("r0".into(), r0);
                Ok(self.report(CheckId::IntegralLower, hyps, measured, Self::grid_range(radii), Verdict::Holds, vec![]))
            }
            None => {
                let w = Witness {
                    radius: Some(r_hi),
                    lhs: Some(*f.last().unwrap()),
                    rhs: Some(0.0),
                    detail: "no positive linear lower envelope on the grid".into(),
                    ..Witness::default()
                };
                Ok(self.report(CheckId::IntegralLower, hyps, measured, Self::grid_range(radii), Verdict::Fails(w), vec![]))
            }
        }
    }

    /// Pole lower bound for convex fields, evaluated at `r1 = r0 + 1` with the
    /// `(C, r0)` envelope from `check_integral_lower`.
    pub fn check_convex_origin(&self, c: f64, r0: f64) -> Result<CheckReport> {
        let r1 = r0 + 1.0;
        if r1 > self.manifold.r_max() {
            return Err(Error::Domain { r: r1, r_max: self.manifold.r_max() });
        }
        let (convex_detail, scan) = self.hyp_convex()?;
        let hyps = vec![
            self.hyp_nonnegative(r1)?,
            convex_detail,
            self.hyp_curvature(Hypothesis::SectionalPositive, r1)?,
        ];
        let mut measured = BTreeMap::new();
        measured.insert("C_used".into(), c);
        measured.insert("r1".into(), r1);
        measured.insert("clairaut_drift".into(), scan.clairaut_drift);
        measured.insert("speed_drift".into(), scan.speed_drift);
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::ConvexOrigin, hyps, measured, (0.0, r1), Verdict::Inapplicable(w), vec![]));
        }
        let lhs = self.field.value_at_pole();
        let area = self.manifold.sphere_area(r1)?;
        let (sup, _) = sup_on(self.field, self.manifold, Region::Sphere(r1), self.sup_radii, self.sup_dirs)?;
        let rhs = 2.0 * c / area - sup;
        measured.insert("u_at_pole".into(), lhs);
        measured.insert("rhs".into(), rhs);
        measured.insert("sup_boundary".into(), sup);
        let verdict = if lhs >= rhs - self.tol.inequality {
            Verdict::Holds
        } else {
            Verdict::Fails(Witness {
                radius: Some(r1),
                lhs: Some(lhs),
                rhs: Some(rhs),
                detail: "pole value below the envelope bound".into(),
                ..Witness::default()
            })
        };
        Ok(self.report(CheckId::ConvexOrigin, hyps, measured, (0.0, r1), verdict, vec![]))
    }

    fn grad_ball_integral(&self, r: f64) -> Result<f64> {
        ball_integral_fn(
            |rr, xi| {
                gradient(self.field, self.manifold, &PolarPoint { r: rr, xi: xi.clone() })
                    .map(|g| g.norm_sq)
                    .unwrap_or(f64::NAN)
            },
            self.manifold,
            r,
            &self.rule,
            self.radial_order,
        )
    }

    /// `(E(r), w(4r), E/w)` per radius, with `w` the profile of `u^2`.
    pub fn energy_curve(&self, radii: &[f64]) -> Result<Vec<(f64, f64, f64, f64)>> {
        let u2 = self.field.square();
        let w4_radii: Vec<f64> = {
            let mut s: Vec<f64> = radii.iter().map(|&r| 4.0 * r).collect();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s.dedup();
            s
        };
        let w = symmetrize(&u2, self.manifold, &w4_radii, &self.rule)?;
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let e = r / self.manifold.ball_volume(2.0 * r)? * self.grad_ball_integral(r)?;
            let w4 = w
                .value_at(4.0 * r)
                .ok_or_else(|| Error::InvalidInput(format!("profile misses radius {}", 4.0 * r)))?;
            let ratio = if w4.abs() < 1e-300 {
                if e.abs() < 1e-300 { 0.0 } else { f64::INFINITY }
            } else {
                e / w4
            };
            out.push((r, e, w4, ratio));
        }
        Ok(out)
    }

    /// Energy bound: `E(r) = (r / Vol(B_{2r})) int_{B_r} |grad u|^2` measured
    /// against `w(4r)` for the squared-field profile `w`.
    pub fn check_energy(&self, radii: &[f64]) -> Result<CheckReport> {
        let r_hi = *radii.last().expect("nonempty grid");
        if 4.0 * r_hi > self.manifold.r_max() {
            return Err(Error::Domain { r: 4.0 * r_hi, r_max: self.manifold.r_max() });
        }
        let hyps = vec![
            self.hyp_nonnegative(2.0 * r_hi)?,
            self.hyp_subharmonic(2.0 * r_hi)?,
            self.hyp_curvature(Hypothesis::RicciNonneg, 2.0 * r_hi)?,
        ];
        let mut measured = BTreeMap::new();
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::Energy, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), vec![]));
        }
        let curve = self.energy_curve(radii)?;
        let mut c = f64::NEG_INFINITY;
        let mut at = radii[0];
        for &(r, e, w4, ratio) in &curve {
            if !ratio.is_finite() {
                let w = Witness {
                    radius: Some(r),
                    lhs: Some(e),
                    rhs: Some(w4),
                    detail: "squared-field profile vanished with positive energy".into(),
                    ..Witness::default()
                };
                return Ok(self.report(CheckId::Energy, hyps, measured, Self::grid_range(radii), Verdict::Fails(w), vec![]));
            }
            if ratio > c {
                c = ratio;
                at = r;
            }
        }
        // ingredient estimate: r^2 int_{B_r} |grad u|^2 <= C int_{B_2r} u^2
        let u2 = self.field.square();
        let mut ingredient = f64::NEG_INFINITY;
        for &r in radii {
            let num = r * r * self.grad_ball_integral(r)?;
            let den = ball_integral_fn(
                |rr, xi| u2.eval(rr, xi),
                self.manifold,
                2.0 * r,
                &self.rule,
                self.radial_order,
            )?;
            if den > 1e-300 {
                ingredient = ingredient.max(num / den);
            }
        }
        measured.insert("C".into(), c);
        measured.insert("C_radius".into(), at);
        measured.insert("ingredient_max".into(), ingredient);
        Ok(self.report(CheckId::Energy, hyps, measured, Self::grid_range(radii), Verdict::Holds, vec![]))
    }

    /// Tail surrogate for the limit bound: maxima over the tail grid stand in
    /// for the limits superior on both sides.
    pub fn check_limsup(&self, tail: &[f64]) -> Result<CheckReport> {
        let t_hi = *tail.last().expect("nonempty tail grid");
        if 4.0 * t_hi > self.manifold.r_max() {
            return Err(Error::Domain { r: 4.0 * t_hi, r_max: self.manifold.r_max() });
        }
        let hyps = vec![
            self.hyp_nonnegative(2.0 * t_hi)?,
            self.hyp_subharmonic(2.0 * t_hi)?,
            self.hyp_curvature(Hypothesis::RicciNonneg, 2.0 * t_hi)?,
        ];
        let mut measured = BTreeMap::new();
        let notes = vec!["finite-range surrogate: maxima over the tail grid approximate both limits".to_string()];
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::Limsup, hyps, measured, Self::grid_range(tail), Verdict::Inapplicable(w), notes));
        }
        let n = self.manifold.dim();
        let kappa = unit_ball_volume(n);
        let curve = self.energy_curve(tail)?;
        let mut lhs_sup = f64::NEG_INFINITY;
        let mut rhs_sup = f64::NEG_INFINITY;
        let mut c_energy = f64::NEG_INFINITY;
        let mut bishop = f64::NEG_INFINITY;
        for &(r, _e, w4, ratio) in &curve {
            let g = self.grad_ball_integral(r)?;
            lhs_sup = lhs_sup.max(g / r.powi(n as i32 - 1));
            rhs_sup = rhs_sup.max(w4);
            c_energy = c_energy.max(ratio);
            let s = 2.0 * r;
            bishop = bishop.max(self.manifold.ball_volume(s)? / (kappa * s.powi(n as i32)));
        }
        let c1 = c_energy * bishop * kappa * 2f64.powi(n as i32);
        measured.insert("lhs_sup".into(), lhs_sup);
        measured.insert("rhs_sup".into(), rhs_sup);
        measured.insert("C1".into(), c1);
        measured.insert("C_energy_tail".into(), c_energy);
        measured.insert("bishop_factor".into(), bishop);
        let mut notes = notes;
        if !rhs_sup.is_finite() || rhs_sup > 1e300 {
            notes.push("right-hand side numerically unbounded; bound holds vacuously".into());
            return Ok(self.report(CheckId::Limsup, hyps, measured, Self::grid_range(tail), Verdict::Holds, notes));
        }
        let verdict = if lhs_sup <= c1 * rhs_sup * (1.0 + self.tol.inequality) + self.tol.inequality {
            Verdict::Holds
        } else {
            Verdict::Fails(Witness {
                radius: Some(t_hi),
                lhs: Some(lhs_sup),
                rhs: Some(c1 * rhs_sup),
                detail: "tail energy exceeded the profile bound".into(),
                ..Witness::default()
            })
        };
        Ok(self.report(CheckId::Limsup, hyps, measured, Self::grid_range(tail), verdict, notes))
    }

    /// Pointwise convexity step: `|grad u|^2 <= u(exp_x grad u) - u(x)` at
    /// seeded sample points of the ball with `|grad u| >= 1`. Returns the
    /// minimum slack and how many points were checked.
    pub fn pointwise_convexity_step(&self, radius: f64, samples: usize) -> Result<(f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e3779b97f4a7c15);
        let mut min_slack = f64::INFINITY;
        let mut checked = 0;
        let mut attempts = 0;
        while checked < samples && attempts < samples * 1000 {
            attempts += 1;
            let r = rng.gen_range(0.01..radius);
            let xi = match self.manifold.dim() {
                2 => Direction::angle(rng.gen_range(0.0..2.0 * std::f64::consts::PI)),
                3 => {
                    let v = [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ];
                    match Direction::unit(v) {
                        Ok(d) => d,
                        Err(_) => continue,
                    }
                }
                _ => Direction::Radial,
            };
            let p = PolarPoint { r, xi };
            let gv = gradient_vector(self.field, self.manifold, &p)?;
            let norm_sq = gv.radial * gv.radial + gv.angular * gv.angular;
            if norm_sq < 1.0 {
                continue;
            }
            let q = match exp_map(self.manifold, &p, &gv) {
                Ok(q) => q,
                Err(Error::LeftDomain { .. }) => continue,
                Err(e) => return Err(e),
            };
            let slack = self.field.eval_at(&q) - self.field.eval_at(&p) - norm_sq;
            min_slack = min_slack.min(slack);
            checked += 1;
        }
        Ok((min_slack, checked))
    }

    /// Lower bound for the ball integral of `u` after an exponential gradient
    /// step. Hypotheses are verified on the queried ball only.
    pub fn check_gradient_integral(&self, radii: &[f64], samples: usize) -> Result<CheckReport> {
        let r_hi = *radii.last().expect("nonempty grid");
        if 4.0 * r_hi > self.manifold.r_max() {
            return Err(Error::Domain { r: 4.0 * r_hi, r_max: self.manifold.r_max() });
        }
        let vtol = self.verdict_tol();

        // scan u >= 1 and |grad u| >= 1 over the dense ball grid
        let (u_min, u_at) = inf_on(self.field, self.manifold, Region::Ball(r_hi), self.sup_radii, self.sup_dirs)?;
        let dirs = sup_directions(self.manifold.dim(), self.sup_dirs);
        let mut g_min = f64::INFINITY;
        let mut g_at = PolarPoint::pole(self.manifold.dim());
        let nr = self.sup_radii.max(2);
        for i in 1..nr {
            let r = r_hi * i as f64 / (nr - 1) as f64;
            for d in &dirs {
                let p = PolarPoint { r, xi: d.clone() };
                let g = gradient(self.field, self.manifold, &p)?;
                let n = g.norm_sq.sqrt();
                if n < g_min {
                    g_min = n;
                    g_at = p;
                }
            }
        }
        let (convex_detail, scan) = self.hyp_convex()?;
        let hyps = vec![
            HypothesisDetail {
                name: "u_at_least_one".into(),
                ok: u_min >= 1.0 - vtol,
                detail: format!("min u = {u_min:.6e} at {u_at}"),
            },
            HypothesisDetail {
                name: "gradient_at_least_one".into(),
                ok: g_min >= 1.0 - vtol,
                detail: format!("min |grad u| = {g_min:.6e} at {g_at}"),
            },
            convex_detail,
            self.hyp_curvature(Hypothesis::RicciNonneg, r_hi)?,
        ];
        let mut measured = BTreeMap::new();
        measured.insert("min_u".into(), u_min);
        measured.insert("min_grad".into(), g_min);
        measured.insert("clairaut_drift".into(), scan.clairaut_drift);
        measured.insert("speed_drift".into(), scan.speed_drift);
        // locations of the worst nodes, for witness inspection
        let uc = u_at.xi.components();
        measured.insert("min_u_r".into(), u_at.r);
        measured.insert("min_u_x1".into(), u_at.r * uc[0]);
        measured.insert("min_u_x2".into(), u_at.r * uc[1]);
        let gc = g_at.xi.components();
        measured.insert("min_grad_r".into(), g_at.r);
        measured.insert("min_grad_x1".into(), g_at.r * gc[0]);
        measured.insert("min_grad_x2".into(), g_at.r * gc[1]);
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(
                CheckId::GradientIntegral,
                hyps,
                measured,
                Self::grid_range(radii),
                Verdict::Inapplicable(w),
                vec![],
            ));
        }

        // profile of u^2 at 4r, cubed on the right-hand side
        let u2 = self.field.square();
        let mut w_radii: Vec<f64> = radii.iter().map(|&r| 4.0 * r).collect();
        w_radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w_radii.dedup();
        let w = symmetrize(&u2, self.manifold, &w_radii, &self.rule)?;

        let (gl_nodes, gl_weights) = gauss_legendre(self.radial_order);
        let n = self.manifold.dim();
        let omega = self.manifold.unit_sphere_measure();
        let mut c6 = f64::INFINITY;
        let mut c6_at = radii[0];
        let mut skipped_total = 0usize;
        let mut nodes_total = 0usize;
        for &r in radii {
            let panels = r.ceil().max(1.0) as usize;
            let dt = r / panels as f64;
            let mut lhs = 0.0;
            for k in 0..panels {
                for (x, wq) in gl_nodes.iter().zip(&gl_weights) {
                    let t = k as f64 * dt + 0.5 * dt * (x + 1.0);
                    let shell = omega * self.manifold.h(t).powi(n as i32 - 1);
                    let mut mean = 0.0;
                    for (node, ws) in self.rule.nodes.iter().zip(&self.rule.weights) {
                        nodes_total += 1;
                        let p = PolarPoint { r: t, xi: node.clone() };
                        let gv = gradient_vector(self.field, self.manifold, &p)?;
                        match exp_map(self.manifold, &p, &gv) {
                            Ok(q) => mean += ws * self.field.eval_at(&q),
                            Err(Error::LeftDomain { .. }) => skipped_total += 1,
                            Err(e) => return Err(e),
                        }
                    }
                    lhs += wq * 0.5 * dt * shell * mean / self.rule.total_weight();
                }
            }
            let vol = self.manifold.ball_volume(r)?;
            let w4 = w
                .value_at(4.0 * r)
                .ok_or_else(|| Error::InvalidInput(format!("profile misses radius {}", 4.0 * r)))?;
            let c = lhs * r.powi(n as i32 + 1) * w4.powi(3) / (vol * vol);
            if c < c6 {
                c6 = c;
                c6_at = r;
            }
        }
        let skip_frac = skipped_total as f64 / nodes_total.max(1) as f64;
        measured.insert("skipped_fraction".into(), skip_frac);
        if skip_frac > 0.01 {
            let w = Witness {
                hypothesis: Some("exp_map_range".into()),
                detail: format!(
                    "{skipped_total} of {nodes_total} exponential steps left the working radius"
                ),
                ..Witness::default()
            };
            return Ok(self.report(
                CheckId::GradientIntegral,
                hyps,
                measured,
                Self::grid_range(radii),
                Verdict::Inapplicable(w),
                vec![],
            ));
        }

        let (min_slack, checked) = self.pointwise_convexity_step(r_hi, samples)?;
        measured.insert("C6".into(), c6);
        measured.insert("C6_radius".into(), c6_at);
        measured.insert("pointwise_min_slack".into(), min_slack);
        measured.insert("pointwise_checked".into(), checked as f64);

        let verdict = if c6 > 0.0 && min_slack >= -self.tol.inequality {
            Verdict::Holds
        } else {
            Verdict::Fails(Witness {
                radius: Some(c6_at),
                lhs: Some(c6),
                rhs: Some(0.0),
                detail: if c6 <= 0.0 {
                    "empirical constant is not positive".into()
                } else {
                    format!("pointwise convexity step violated by {min_slack:.3e}")
                },
                ..Witness::default()
            })
        };
        Ok(self.report(CheckId::GradientIntegral, hyps, measured, Self::grid_range(radii), verdict, vec![]))
    }

    /// Ball-volume comparison against the flat value `kappa_n r^n`.
    pub fn check_bishop(&self, radii: &[f64]) -> Result<CheckReport> {
        let r_hi = *radii.last().expect("nonempty grid");
        let hyps = vec![self.hyp_curvature(Hypothesis::RicciNonneg, r_hi)?];
        let mut measured = BTreeMap::new();
        let mut tolerances = self.tolerances_map();
        tolerances.insert("bishop_ratio".into(), 1e-8);
        if let Some(w) = Self::gate(&hyps) {
            let mut rep = self.report(CheckId::Bishop, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), vec![]);
            rep.tolerances = tolerances;
            return Ok(rep);
        }
        let kappa = unit_ball_volume(self.manifold.dim());
        let n = self.manifold.dim() as i32;
        let mut ratio_max = f64::NEG_INFINITY;
        let mut ratio_min = f64::INFINITY;
        let mut worst = radii[0];
        for &r in radii {
            let ratio = self.manifold.ball_volume(r)? / (kappa * r.powi(n));
            if ratio > ratio_max {
                ratio_max = ratio;
                worst = r;
            }
            ratio_min = ratio_min.min(ratio);
        }
        measured.insert("ratio_max".into(), ratio_max);
        measured.insert("ratio_min".into(), ratio_min);
        let verdict = if ratio_max <= 1.0 + 1e-8 {
            Verdict::Holds
        } else {
            Verdict::Fails(Witness {
                radius: Some(worst),
                lhs: Some(ratio_max),
                rhs: Some(1.0),
                detail: "ball volume exceeded the flat value".into(),
                ..Witness::default()
            })
        };
        let mut rep = self.report(CheckId::Bishop, hyps, measured, Self::grid_range(radii), verdict, vec![]);
        rep.tolerances = tolerances;
        Ok(rep)
    }

    /// Certify `|u| <= C r^p v(r)` over the grid against a weight profile.
    pub fn classify_growth(
        &self,
        weight: &RadialProfile,
        p: f64,
        radii: &[f64],
    ) -> Result<CheckReport> {
        let mut measured = BTreeMap::new();
        measured.insert("degree".into(), p);
        let hyps = {
            let mut ok = true;
            let mut detail = String::from("weight positive on the grid");
            for &r in radii {
                match weight.value_at(r) {
                    Some(v) if v > 0.0 => {}
                    Some(v) => {
                        ok = false;
                        detail = format!("weight {v:.3e} at r = {r}");
                        break;
                    }
                    None => {
                        return Err(Error::InvalidInput(format!("weight profile misses radius {r}")))
                    }
                }
            }
            vec![HypothesisDetail { name: "positive_weight".into(), ok, detail }]
        };
        if let Some(w) = Self::gate(&hyps) {
            return Ok(self.report(CheckId::ClassifyGrowth, hyps, measured, Self::grid_range(radii), Verdict::Inapplicable(w), vec![]));
        }
        let mut c = f64::NEG_INFINITY;
        let mut at = radii[0];
        for &r in radii {
            let (hi, _) = sup_on(self.field, self.manifold, Region::Sphere(r), self.sup_radii, self.sup_dirs)?;
            let (lo, _) = inf_on(self.field, self.manifold, Region::Sphere(r), self.sup_radii, self.sup_dirs)?;
            let sup_abs = hi.abs().max(lo.abs());
            let v = weight.value_at(r).unwrap();
            let ratio = sup_abs / (r.powf(p) * v);
            if ratio > c {
                c = ratio;
                at = r;
            }
        }
        measured.insert("C".into(), c);
        measured.insert("C_radius".into(), at);
        let mut rep = self.report(
            CheckId::ClassifyGrowth,
            hyps,
            measured,
            Self::grid_range(radii),
            if c.is_finite() {
                Verdict::Holds
            } else {
                Verdict::Fails(Witness { radius: Some(at), detail: "unbounded ratio".into(), ..Witness::default() })
            },
            vec!["finite-range certificate: the constant is valid on the tested range".into()],
        );
        rep.growth_class = Some(GrowthClass { degree: p, constant: c, range: Self::grid_range(radii) });
        Ok(rep)
    }

    /// Profile of the field itself on `radii` (used as the default weight for
    /// growth classification).
    pub fn self_profile(&self, radii: &[f64]) -> Result<RadialProfile> {
        symmetrize(self.field, self.manifold, radii, &self.rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap as Map;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn cat(name: &str, dim: usize) -> ScalarField {
        field::catalog(name, &Map::new(), dim).unwrap()
    }

    fn harness<'a>(m: &'a ModelManifold, u: &'a ScalarField) -> Harness<'a> {
        Harness::new(m, u, 64, 64, 200, 256, Tolerances::default(), 42).unwrap()
    }

    #[test]
    fn mean_value_constant_for_r_squared() {
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let radii = grid(0.5, 10.0, 20);
        let rep = h.check_mean_value(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!(rep.hypotheses_ok());
        assert!((rep.measured["C_min"] - 0.5).abs() < 1e-6);
        for (r, c) in h.mean_value_curve(&radii).unwrap() {
            assert!((c - 0.5).abs() < 1e-6, "C({r}) = {c}");
        }
    }

    #[test]
    fn mean_value_constant_for_constants() {
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let u = cat("constant", 2);
        let h = harness(&m, &u);
        let rep = h.check_mean_value(&grid(0.5, 10.0, 10)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!((rep.measured["C_min"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn growth_ratio_for_r_squared() {
        let m = ModelManifold::euclidean(2, 48.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let radii = grid(1.0, 10.0, 19);
        let rep = h.check_growth(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds), "{:?}", rep.verdict);
        let gc = rep.growth_class.unwrap();
        assert!((gc.constant - 0.25).abs() < 1e-6);
        assert_eq!(gc.degree, 1.0);
        let profile = h.growth_profile(&radii, &[]).unwrap();
        for (r, rho) in h.growth_curve(&radii, &profile).unwrap() {
            assert!((rho - 1.0 / (4.0 * r)).abs() < 1e-6);
        }
        // sup u <= C' r v(2r) bound is 1/... r^2 / (r * 4 r^2) = 1/(4r) as well
        assert!((rep.measured["C_omega"] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn mean_value_constant_in_dimension_five() {
        // radial-only path: sup(B_{r/2}) Vol(B_r) / int(B_r) for r^2 in flat
        // 5-space is (r^2/4)(kappa_5 r^5) / (omega_4 r^7 / 7) = 7/20
        let m = ModelManifold::euclidean(5, 24.0).unwrap();
        let u = cat("r_pow", 5);
        let h = Harness::new(&m, &u, 16, 64, 200, 8, Tolerances::default(), 42).unwrap();
        let rep = h.check_mean_value(&grid(0.5, 8.0, 8)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!((rep.measured["C_min"] - 0.35).abs() < 1e-8, "{}", rep.measured["C_min"]);
        assert!((rep.measured["C_grid_low"] - 0.35).abs() < 1e-8);
    }

    #[test]
    fn growth_ratio_for_constants() {
        // sup = 1 and v = 1, so rho(r) = 1/r, largest at the left end
        let m = ModelManifold::euclidean(2, 48.0).unwrap();
        let u = cat("constant", 2);
        let h = harness(&m, &u);
        let rep = h.check_growth(&grid(1.0, 10.0, 10)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!((rep.measured["C"] - 1.0).abs() < 1e-9);
        assert!((rep.measured["C_radius"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_is_scale_equivariant() {
        let m = ModelManifold::euclidean(2, 48.0).unwrap();
        let u = cat("exp_x1", 2);
        let scaled = u.scale(3.7);
        let radii = grid(1.0, 8.0, 8);
        let h1 = harness(&m, &u);
        let h2 = harness(&m, &scaled);
        let r1 = h1.check_growth(&radii).unwrap();
        let r2 = h2.check_growth(&radii).unwrap();
        assert!(matches!(r1.verdict, Verdict::Holds));
        assert!(matches!(r2.verdict, Verdict::Holds));
        let (c1, c2) = (r1.measured["C"], r2.measured["C"]);
        assert!((c1 - c2).abs() <= 1e-10 * c1.abs().max(1.0), "{c1} vs {c2}");
    }

    #[test]
    fn hypothesis_gating_is_strict() {
        // hyperbolic manifold: Ricci gate fires and the verdict must be
        // Inapplicable with the violated hypothesis, never Holds/Fails
        let m = ModelManifold::hyperbolic(2, 1.0, 24.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let rep = h.check_mean_value(&grid(0.5, 4.0, 8)).unwrap();
        match &rep.verdict {
            Verdict::Inapplicable(w) => {
                assert_eq!(w.hypothesis.as_deref(), Some("ricci_nonnegative"));
            }
            other => panic!("expected Inapplicable, got {other:?}"),
        }
        // sign-flipped field: subharmonicity gate
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let neg = cat("r_pow", 2).scale(-1.0);
        let h = harness(&m, &neg);
        let rep = h.check_growth(&grid(1.0, 4.0, 6)).unwrap();
        match &rep.verdict {
            Verdict::Inapplicable(w) => {
                assert_eq!(w.hypothesis.as_deref(), Some("nonnegative"));
            }
            other => panic!("expected Inapplicable, got {other:?}"),
        }
    }

    #[test]
    fn energy_ratio_for_r_squared() {
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let radii = grid(1.0, 2.0, 6);
        let rep = h.check_energy(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        for (r, e, w4, ratio) in h.energy_curve(&radii).unwrap() {
            assert!((e - r * r * r / 2.0).abs() < 1e-6 * (r * r * r), "E({r}) = {e}");
            assert!((w4 - 256.0 * r.powi(4)).abs() < 1e-6 * w4);
            assert!((ratio - 1.0 / (512.0 * r)).abs() < 1e-5);
        }
        assert!((rep.measured["C"] - 1.0 / 512.0).abs() < 1e-5);
    }

    #[test]
    fn energy_of_constants_is_zero() {
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let u = cat("constant", 2);
        let h = harness(&m, &u);
        let rep = h.check_energy(&grid(1.0, 2.0, 4)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!(rep.measured["C"].abs() < 1e-12);
    }

    #[test]
    fn integral_lower_envelope_on_paraboloid() {
        let m = ModelManifold::paraboloid(2, 12.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let radii = grid(0.5, 5.0, 10);
        let rep = h.check_integral_lower(&radii, 2.0).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds), "{:?}", rep.verdict);
        assert!(rep.measured["C"] > 0.0);
        assert!(rep.measured["r0"] < 1.0);

        // constants also admit an envelope (F = volume, unbounded)
        let one = cat("constant", 2);
        let h = harness(&m, &one);
        let rep = h.check_integral_lower(&radii, 2.0).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));

        // the all-zero field fails
        let zero = field::catalog("constant", &Map::from([("value".into(), 0.0)]), 2).unwrap();
        let h = harness(&m, &zero);
        let rep = h.check_integral_lower(&radii, 2.0).unwrap();
        assert!(matches!(rep.verdict, Verdict::Fails(_)));
    }

    #[test]
    fn convex_origin_bound() {
        let m = ModelManifold::paraboloid(2, 12.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let lower = h.check_integral_lower(&grid(0.5, 5.0, 10), 2.0).unwrap();
        let (c, r0) = (lower.measured["C"], lower.measured["r0"]);
        let rep = h.check_convex_origin(c, r0).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds), "{:?}", rep.verdict);

        // the all-zero field with an injected positive C exercises Fails
        let zero = field::catalog("constant", &Map::from([("value".into(), 0.0)]), 2).unwrap();
        let h = harness(&m, &zero);
        let rep = h.check_convex_origin(1.0, 0.0).unwrap();
        assert!(matches!(rep.verdict, Verdict::Fails(_)), "{:?}", rep.verdict);
    }

    #[test]
    fn limsup_surrogate_holds_for_r_squared() {
        let m = ModelManifold::euclidean(2, 48.0).unwrap();
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let rep = h.check_limsup(&grid(8.0, 10.0, 5)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds), "{:?}", rep.verdict);
        assert!(rep.notes.iter().any(|n| n.contains("finite-range")));

        let one = cat("constant", 2);
        let h = harness(&m, &one);
        let rep = h.check_limsup(&grid(8.0, 10.0, 3)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!(rep.measured["lhs_sup"].abs() < 1e-12);
    }

    #[test]
    fn gradient_integral_gates_on_default_field() {
        let m = ModelManifold::euclidean(2, 8.0).unwrap();
        let u = cat("affine_r2", 2); // 1 + x1 + r^2
        let h = harness(&m, &u);
        let rep = h.check_gradient_integral(&grid(0.5, 2.0, 4), 100).unwrap();
        match &rep.verdict {
            // both pointwise hypotheses have their minimum at x = -e1/2, where
            // u = 3/4 and |grad u| = 0; either witness must sit there
            Verdict::Inapplicable(w) => {
                let hyp = w.hypothesis.as_deref().unwrap();
                let key = match hyp {
                    "u_at_least_one" => "min_u",
                    "gradient_at_least_one" => "min_grad",
                    other => panic!("unexpected hypothesis {other}"),
                };
                assert!((rep.measured[&format!("{key}_x1")] + 0.5).abs() < 0.1);
                assert!(rep.measured[&format!("{key}_x2")].abs() < 0.1);
                assert!((rep.measured["min_u"] - 0.75).abs() < 0.01);
                assert!(rep.measured["min_grad"] < 0.1);
            }
            other => panic!("expected Inapplicable, got {other:?}"),
        }

        // constants gate immediately on the gradient bound
        let one = cat("constant", 2);
        let h = harness(&m, &one);
        let rep = h.check_gradient_integral(&grid(0.5, 1.0, 2), 10).unwrap();
        assert!(matches!(rep.verdict, Verdict::Inapplicable(_)));
    }

    #[test]
    fn gradient_integral_holds_with_shifted_affine() {
        let m = ModelManifold::euclidean(2, 8.0).unwrap();
        let u = field::catalog(
            "affine_r2",
            &Map::from([("offset".into(), 5.0), ("slope".into(), 3.0)]),
            2,
        )
        .unwrap();
        let mut h = Harness::new(&m, &u, 24, 12, 100, 64, Tolerances::default(), 42).unwrap();
        h.sup_dirs = 64;
        let rep = h.check_gradient_integral(&grid(0.5, 1.0, 3), 50).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds), "{:?}", rep.verdict);
        assert!(rep.measured["C6"] > 0.0);
        assert!(rep.measured["pointwise_min_slack"] >= 0.0);
        assert!(rep.measured["skipped_fraction"] == 0.0);
    }

    #[test]
    fn bishop_ratio_examples() {
        let radii = grid(0.5, 5.0, 10);
        let e2 = ModelManifold::euclidean(2, 12.0).unwrap();
        let u = cat("constant", 2);
        let h = harness(&e2, &u);
        let rep = h.check_bishop(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!((rep.measured["ratio_max"] - 1.0).abs() < 1e-8);
        assert!((rep.measured["ratio_min"] - 1.0).abs() < 1e-8);

        let p2 = ModelManifold::paraboloid(2, 12.0).unwrap();
        let h = harness(&p2, &u);
        let rep = h.check_bishop(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds));
        assert!(rep.measured["ratio_max"] < 1.0);

        let h2 = ModelManifold::hyperbolic(2, 1.0, 12.0).unwrap();
        let h = harness(&h2, &u);
        let rep = h.check_bishop(&radii).unwrap();
        assert!(matches!(rep.verdict, Verdict::Inapplicable(_)));
    }

    #[test]
    fn classify_growth_certificates() {
        let m = ModelManifold::euclidean(2, 24.0).unwrap();
        let radii = grid(1.0, 8.0, 8);

        // r^2 against its own profile: C = 1/r at the grid minimum
        let u = cat("r_pow", 2);
        let h = harness(&m, &u);
        let weight = h.self_profile(&radii).unwrap();
        let rep = h.classify_growth(&weight, 1.0, &radii).unwrap();
        let gc = rep.growth_class.unwrap();
        assert!((gc.constant - 1.0).abs() < 1e-9, "C = {}", gc.constant);
        assert!((rep.measured["C_radius"] - 1.0).abs() < 1e-12);

        // constants with unit weight and degree zero
        let one = cat("constant", 2);
        let h = harness(&m, &one);
        let weight = h.self_profile(&radii).unwrap();
        let rep = h.classify_growth(&weight, 0.0, &radii).unwrap();
        assert!((rep.growth_class.unwrap().constant - 1.0).abs() < 1e-9);

        // exp(x1) against its own spherical-mean profile: the ratio
        // e^r / (r I0(r)) is largest at the left end of the grid
        let u = cat("exp_x1", 2);
        let h = harness(&m, &u);
        let weight = h.self_profile(&radii).unwrap();
        let rep = h.classify_growth(&weight, 1.0, &radii).unwrap();
        let c = rep.growth_class.unwrap().constant;
        assert!((c - 2.147_030_321_428_101).abs() < 1e-6, "C = {c}");
        assert!((rep.measured["C_radius"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measured_constants_stable_under_order_doubling() {
        let m = ModelManifold::euclidean(2, 48.0).unwrap();
        let u = cat("exp_x1", 2);
        let radii = grid(1.0, 6.0, 6);
        let coarse = Harness::new(&m, &u, 64, 64, 200, 256, Tolerances::default(), 42).unwrap();
        let fine = Harness::new(&m, &u, 128, 128, 200, 256, Tolerances::default(), 42).unwrap();
        let a = coarse.check_growth(&radii).unwrap().measured["C"];
        let b = fine.check_growth(&radii).unwrap().measured["C"];
        assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
        let a = coarse.check_mean_value(&radii).unwrap().measured["C_min"];
        let b = fine.check_mean_value(&radii).unwrap().measured["C_min"];
        assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
    }
}
