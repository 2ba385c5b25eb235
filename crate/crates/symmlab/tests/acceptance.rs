//! Acceptance suite: every numbered criterion runs at its stated tolerance
//! and prints one pass line (run with `--nocapture` to see them; a failing
//! criterion fails its test).

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use symmlab::field::{self, Direction, ScalarField};
use symmlab::geodesic::{integrate_reduced, sample_geodesics, SamplerSpec};
use symmlab::harness::{Harness, Tolerances, Verdict};
use symmlab::manifold::ModelManifold;
use symmlab::quadrature::{rule_for, sphere_rule};
use symmlab::scenario::{self, ScenarioConfig};
use symmlab::symmetrize::{
    laplacian_consistency, monotonicity, origin_limits, profile_subharmonicity, symmetrize,
};

fn cat(name: &str, dim: usize) -> ScalarField {
    field::catalog(name, &BTreeMap::new(), dim).unwrap()
}

fn lin(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn geo(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn harness<'a>(m: &'a ModelManifold, u: &'a ScalarField) -> Harness<'a> {
    let order = if m.dim() == 3 { 16 } else { 64 };
    Harness::new(m, u, order, 64, 200, 256, Tolerances::default(), 42).unwrap()
}

#[test]
fn acceptance_01_symmetrization_identity_suite() {
    let t0 = Instant::now();
    let r_max = 5.0;
    let radii = geo(0.05, 0.9 * r_max, 48);
    for dim in [2usize, 3] {
        for make in [
            ModelManifold::euclidean(dim, r_max).unwrap(),
            ModelManifold::hyperbolic(dim, 1.0, r_max).unwrap(),
        ] {
            let rule = rule_for(&make, if dim == 3 { 16 } else { 64 }).unwrap();
            for name in ["r_pow", "x1_sq", "exp_x1", "one_plus_x1", "constant"] {
                let u = cat(name, dim);
                let p = symmetrize(&u, &make, &radii, &rule).unwrap();
                let c = laplacian_consistency(&u, &make, &p, &rule).unwrap();
                assert!(
                    c.max_rel <= 1e-5,
                    "{name} dim {dim} on {:?}: discrepancy {} at r = {}",
                    make.warp().kind,
                    c.max_rel,
                    c.at_radius
                );
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "identity suite took {dt:?}");
    println!("acceptance 01 symmetrization identity suite: pass ({dt:?})");
}

#[test]
fn acceptance_02_bessel_oracle() {
    let m = ModelManifold::euclidean(2, 12.0).unwrap();
    let rule = sphere_rule(2, 64).unwrap();
    let u = cat("exp_x1", 2);
    let radii = lin(0.05, 4.0, 80);
    let p = symmetrize(&u, &m, &radii, &rule).unwrap();
    for i in 0..p.len() {
        let r = p.radii[i];
        let i0 = common::bessel_i0(r);
        assert!(
            (p.v[i] - i0).abs() <= 1e-6,
            "v({r}) = {} vs I0 = {i0}",
            p.v[i]
        );
        // the profile solves the modified Bessel equation: lap v = v
        assert!(
            (p.lap_v[i] - i0).abs() <= 1e-5,
            "lap_v({r}) = {} vs I0 = {i0}",
            p.lap_v[i]
        );
    }
    println!("acceptance 02 bessel oracle: pass");
}

#[test]
fn acceptance_03_origin_limits() {
    let m = ModelManifold::euclidean(2, 12.0).unwrap();
    let rule = sphere_rule(2, 64).unwrap();
    let o = origin_limits(&cat("x1_sq", 2), &m, &rule).unwrap();
    assert!(o.dv0.abs() <= 1e-6, "v'(0) = {}", o.dv0);
    assert!((o.ddv0 - 1.0).abs() <= 1e-4, "v''(0) = {}", o.ddv0);
    assert!((o.lap_limit - 2.0).abs() <= 1e-4, "lim lap v = {}", o.lap_limit);
    let (p0, p1, p2) = o.predicted.expect("pole laplacian available");
    assert!(p0 == 0.0 && (p1 - 1.0).abs() < 1e-9 && (p2 - 2.0).abs() < 1e-9);
    println!("acceptance 03 origin limits: pass");
}

#[test]
fn acceptance_04_mean_value_constant() {
    let m = ModelManifold::euclidean(2, 24.0).unwrap();
    let u = cat("r_pow", 2);
    let h = harness(&m, &u);
    let radii = lin(0.5, 10.0, 39);
    let rep = h.check_mean_value(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    for (r, c) in h.mean_value_curve(&radii).unwrap() {
        assert!((c - 0.5).abs() <= 1e-6, "C({r}) = {c}");
    }
    assert!((rep.measured["C_min"] - 0.5).abs() <= 1e-6);
    println!("acceptance 04 mean value constant: pass");
}

#[test]
fn acceptance_05_growth_ratio() {
    // u = r^2: rho(r) = 1/(4r) and C = 0.25 at the grid minimum
    let m = ModelManifold::euclidean(2, 48.0).unwrap();
    let u = cat("r_pow", 2);
    let h = harness(&m, &u);
    let radii = lin(1.0, 10.0, 19);
    let rep = h.check_growth(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    let gc = rep.growth_class.unwrap();
    assert!((gc.constant - 0.25).abs() <= 1e-6, "C = {}", gc.constant);
    assert_eq!(gc.degree, 1.0);
    let profile = h.self_profile(&{
        let mut s = radii.clone();
        s.extend(radii.iter().map(|&r| 2.0 * r));
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s
    }).unwrap();
    for (r, rho) in h.growth_curve(&radii, &profile).unwrap() {
        assert!((rho - 1.0 / (4.0 * r)).abs() <= 1e-6, "rho({r}) = {rho}");
    }

    // u = exp(x1): bounded ratio, decreasing from r = 1 to r = 8
    let m = ModelManifold::euclidean(2, 18.0).unwrap();
    let u = cat("exp_x1", 2);
    let h = harness(&m, &u);
    let radii = lin(1.0, 8.0, 15);
    let rep = h.check_growth(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    let profile = h.self_profile(&{
        let mut s = radii.clone();
        s.extend(radii.iter().map(|&r| 2.0 * r));
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s
    }).unwrap();
    let curve = h.growth_curve(&radii, &profile).unwrap();
    let rho1 = curve.first().unwrap().1;
    let rho8 = curve.last().unwrap().1;
    assert!(rho1.is_finite() && rho8.is_finite());
    assert!(rho8 < rho1, "rho(8) = {rho8} !< rho(1) = {rho1}");
    println!("acceptance 05 growth ratio: pass");
}

#[test]
fn acceptance_06_subharmonicity_preservation() {
    let m = ModelManifold::euclidean(2, 12.0).unwrap();
    let rule = sphere_rule(2, 64).unwrap();
    let radii = geo(0.05, 9.0, 40);
    let dirs: Vec<Direction> = (0..32)
        .map(|k| Direction::angle(2.0 * std::f64::consts::PI * k as f64 / 32.0))
        .collect();
    let scan_radii = geo(0.05, 9.0, 24);
    for name in ["r_pow", "x1_sq", "exp_x1", "one_plus_x1", "constant", "affine_r2"] {
        let u = cat(name, 2);
        let scan = field::is_subharmonic_on(&u, &m, &scan_radii, &dirs, 1e-7).unwrap();
        assert!(scan.ok, "{name} must be subharmonic here");
        let p = symmetrize(&u, &m, &radii, &rule).unwrap();
        assert!(profile_subharmonicity(&p, 1e-7).ok, "{name}: profile subharmonicity");
        assert!(monotonicity(&p, 1e-7).ok, "{name}: profile monotonicity");
    }
    // negative control is gated out by the subharmonicity scan itself
    let neg = cat("r_pow", 2).scale(-1.0);
    let scan = field::is_subharmonic_on(&neg, &m, &scan_radii, &dirs, 1e-7).unwrap();
    assert!(!scan.ok);
    println!("acceptance 06 subharmonicity preservation: pass");
}

#[test]
fn acceptance_07_energy_chain() {
    let m = ModelManifold::euclidean(2, 24.0).unwrap();
    let u = cat("r_pow", 2);
    let h = harness(&m, &u);
    let radii = lin(1.0, 2.0, 11);
    let rep = h.check_energy(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    for (r, _e, _w4, ratio) in h.energy_curve(&radii).unwrap() {
        assert!(
            (ratio - 1.0 / (512.0 * r)).abs() <= 1e-5,
            "ratio({r}) = {ratio} vs {}",
            1.0 / (512.0 * r)
        );
    }
    println!("acceptance 07 energy chain: pass");
}

#[test]
fn acceptance_08_integral_lower_envelope() {
    let m = ModelManifold::paraboloid(2, 12.0).unwrap();
    let u = cat("r_pow", 2);
    let radii = lin(0.5, 5.0, 10);
    let h = Harness::new(&m, &u, 64, 64, 200, 256, Tolerances::default(), 42).unwrap();
    let rep = h.check_integral_lower(&radii, 2.0).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    let (c, r0) = (rep.measured["C"], rep.measured["r0"]);
    assert!(c > 0.0, "C = {c}");
    assert!(r0 < 1.0, "r0 = {r0}");
    // stability under quadrature-order doubling
    let h2 = Harness::new(&m, &u, 128, 128, 200, 256, Tolerances::default(), 42).unwrap();
    let rep2 = h2.check_integral_lower(&radii, 2.0).unwrap();
    let c2 = rep2.measured["C"];
    assert!((c - c2).abs() <= 0.01 * c.abs(), "C unstable: {c} vs {c2}");
    assert_eq!(r0, rep2.measured["r0"]);
    println!("acceptance 08 integral lower envelope: pass");
}

#[test]
fn acceptance_09_geodesic_integrity() {
    // conservation over length 10 on all built-in warpings
    for m in [
        ModelManifold::euclidean(2, 30.0).unwrap(),
        ModelManifold::hyperbolic(2, 1.0, 30.0).unwrap(),
        ModelManifold::paraboloid(2, 30.0).unwrap(),
    ] {
        let spec = SamplerSpec { count: 100, length: 10.0, seed: 2024, r_lo_frac: 0.08, r_hi_frac: 0.3 };
        for (i, traj) in sample_geodesics(&m, &spec).unwrap().iter().enumerate() {
            assert!(
                traj.clairaut_drift <= 1e-8,
                "{:?} trajectory {i}: clairaut drift {}",
                m.warp().kind,
                traj.clairaut_drift
            );
            assert!(
                traj.speed_drift <= 1e-8,
                "{:?} trajectory {i}: speed drift {}",
                m.warp().kind,
                traj.speed_drift
            );
        }
    }

    // flat geodesics against Cartesian lines
    let m = ModelManifold::euclidean(2, 30.0).unwrap();
    let spec = SamplerSpec { count: 100, length: 10.0, seed: 7, r_lo_frac: 0.08, r_hi_frac: 0.3 };
    for traj in sample_geodesics(&m, &spec).unwrap() {
        if traj.escaped {
            continue;
        }
        let start = traj.point(0);
        let s0 = &traj.states[0];
        let t0 = match start.xi {
            Direction::Angle(t) => t,
            _ => unreachable!(),
        };
        let p = [start.r * t0.cos(), start.r * t0.sin()];
        let d = [
            s0.dr * t0.cos() - m.h(start.r) * s0.dphi * t0.sin(),
            s0.dr * t0.sin() + m.h(start.r) * s0.dphi * t0.cos(),
        ];
        let l = *traj.params.last().unwrap();
        let q = [p[0] + l * d[0], p[1] + l * d[1]];
        let rq = (q[0] * q[0] + q[1] * q[1]).sqrt();
        assert!((traj.endpoint().r - rq).abs() <= 1e-8, "{} vs {rq}", traj.endpoint().r);
    }

    // observed convergence order of the integrator by step halving
    let m = ModelManifold::hyperbolic(2, 1.0, 50.0).unwrap();
    let dphi0 = 0.8 / m.h(1.0);
    let endpoint = |step: f64| {
        let t = integrate_reduced(&m, 1.0, 0.6, dphi0, 2.0, step, 1);
        let e = t.states.last().unwrap();
        (e.r, e.phi)
    };
    let rf = endpoint(0.00125);
    let err = |step: f64| {
        let (r, p) = endpoint(step);
        ((r - rf.0).powi(2) + (p - rf.1).powi(2)).sqrt()
    };
    let order = (err(0.02) / err(0.01)).log2();
    assert!(order >= 3.5, "observed order {order}");
    println!("acceptance 09 geodesic integrity: pass (order {order:.2})");
}

#[test]
fn acceptance_10_pointwise_exponential_step() {
    let m = ModelManifold::euclidean(2, 8.0).unwrap();
    let u = cat("affine_r2", 2); // 1 + x1 + r^2
    let h = Harness::new(&m, &u, 24, 12, 200, 256, Tolerances::default(), 42).unwrap();

    let (min_slack, checked) = h.pointwise_convexity_step(2.0, 100).unwrap();
    assert_eq!(checked, 100);
    assert!(min_slack >= 0.0, "pointwise slack {min_slack}");

    // spot value from plane arithmetic: at x = (1, 0), grad = 3 e1,
    // exp_x(grad) = (4, 0), u jumps from 3 to 21 while |grad|^2 = 9
    let p = symmlab::PolarPoint { r: 1.0, xi: Direction::angle(0.0) };
    let gv = field::gradient_vector(&u, &m, &p).unwrap();
    assert!((gv.radial - 3.0).abs() < 1e-12 && gv.angular.abs() < 1e-12);
    let q = symmlab::exp_map(&m, &p, &gv).unwrap();
    assert!((q.r - 4.0).abs() < 1e-9);
    let jump = u.eval_at(&q) - u.eval_at(&p);
    assert!((jump - 18.0).abs() < 1e-8);
    assert!(9.0 <= jump);

    // hypothesis scan on the ball of radius 2: inapplicable, witness near -e1/2
    let rep = h.check_gradient_integral(&lin(0.5, 2.0, 4), 100).unwrap();
    match &rep.verdict {
        Verdict::Inapplicable(w) => {
            let key = match w.hypothesis.as_deref().unwrap() {
                "u_at_least_one" => "min_u",
                "gradient_at_least_one" => "min_grad",
                other => panic!("unexpected hypothesis {other}"),
            };
            let x1 = rep.measured[&format!("{key}_x1")];
            let x2 = rep.measured[&format!("{key}_x2")];
            assert!((x1 + 0.5).abs() < 0.1 && x2.abs() < 0.1, "witness at ({x1}, {x2})");
        }
        other => panic!("expected Inapplicable, got {other:?}"),
    }
    println!("acceptance 10 pointwise exponential step: pass");
}

#[test]
fn acceptance_11_volume_comparison() {
    let radii = lin(0.5, 5.0, 10);
    let one = cat("constant", 2);

    let e2 = ModelManifold::euclidean(2, 12.0).unwrap();
    let h = harness(&e2, &one);
    let rep = h.check_bishop(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    assert!((rep.measured["ratio_max"] - 1.0).abs() <= 1e-8);
    assert!((rep.measured["ratio_min"] - 1.0).abs() <= 1e-8);

    let p2 = ModelManifold::paraboloid(2, 12.0).unwrap();
    let h = harness(&p2, &one);
    let rep = h.check_bishop(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Holds));
    assert!(rep.measured["ratio_max"] < 1.0);

    let h2 = ModelManifold::hyperbolic(2, 1.0, 12.0).unwrap();
    let h = harness(&h2, &one);
    let rep = h.check_bishop(&radii).unwrap();
    assert!(matches!(rep.verdict, Verdict::Inapplicable(_)));
    println!("acceptance 11 volume comparison: pass");
}

#[test]
fn acceptance_12_determinism_and_goldens() {
    let t0 = Instant::now();
    let bless = std::env::var("SYMMLAB_BLESS").is_ok();
    let goldens_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/goldens");
    for (name, text) in scenario::BUILTIN_SCENARIOS {
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        let a = scenario::run_scenario(&cfg, 1).unwrap();
        let b = scenario::run_scenario(&cfg, 1).unwrap();
        assert!(a.report.errors.is_empty(), "{name}: {:?}", a.report.errors);
        assert!(!a.any_fails, "{name} has failing checks");
        assert_eq!(a.report.to_json(), b.report.to_json(), "{name}: nondeterministic report");

        let path = format!("{goldens_dir}/{name}.json");
        if bless {
            std::fs::write(&path, a.report.to_json()).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{name}: missing golden ({e}); run with SYMMLAB_BLESS=1"));
        let got: serde_json::Value = serde_json::from_str(&a.report.to_json()).unwrap();
        let want: serde_json::Value = serde_json::from_str(&golden).unwrap();
        common::json_close(&got, &want, 1e-7, 1e-9)
            .unwrap_or_else(|e| panic!("{name}: report deviates from golden at {e}"));
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "scenario suite took {dt:?}");
    println!("acceptance 12 determinism and goldens: pass ({dt:?})");
}
