use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use mopstar_core::equilibrium::{self, DiscreteMeasure};
use mopstar_core::hp::{fl, Cx};
use mopstar_core::mop_core::{self, ReducedPoly};
use mopstar_core::riemann_surface::{self, SurfaceModel};
use mopstar_core::second_kind::{self, PhiKernel, SecondKindRecord};
use mopstar_core::{Error, MomentCache, StarConfig, WeightId};
use num_complex::Complex64 as C;
use rug::Float;
use serde_json::json;

struct Fixture {
    mc: MomentCache,
    polys: Vec<ReducedPoly>,
    records: Vec<SecondKindRecord>,
}

fn r1() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = StarConfig::reference_r1(128, 64, 24);
        let mc = MomentCache::new(&cfg).unwrap();
        let polys = mop_core::compute_all(&mc, 25).unwrap();
        let records = polys[..=24].iter().map(|p| second_kind::build_record(&mc, p).unwrap()).collect();
        Fixture { mc, polys, records }
    })
}

fn surface_r1() -> &'static SurfaceModel {
    static S: OnceLock<SurfaceModel> = OnceLock::new();
    S.get_or_init(|| SurfaceModel::build(&StarConfig::reference_r1(256, 64, 24)).unwrap())
}

fn base_json() -> serde_json::Value {
    json!({
        "alpha": "1", "a": "1", "b": "2",
        "s1": {"gamma": "0", "delta": "0"},
        "s2": {"gamma": "0", "delta": "0"},
        "precision_bits": 128, "quad_points": 64, "n_max": 24
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

#[test]
fn s1_evaluates_jacobi_factors() {
    let mut v = base_json();
    let cfg = StarConfig::from_value(&v).unwrap();
    let p = cfg.prec();
    assert_eq!(cfg.eval_s1(&fl(p, 0.5)).unwrap(), 1);

    v["s1"] = json!({"gamma": "0.5", "delta": "0"});
    let cfg = StarConfig::from_value(&v).unwrap();
    assert!(rel(cfg.eval_s1(&fl(p, 0.25)).unwrap().to_f64(), 0.5) < 1e-15);

    v["s1"] = json!({"gamma": "0", "delta": "1"});
    let cfg = StarConfig::from_value(&v).unwrap();
    assert!(rel(cfg.eval_s1(&fl(p, 0.75)).unwrap().to_f64(), 0.25) < 1e-15);
    assert!(matches!(cfg.eval_s1(&fl(p, 1.5)), Err(Error::Domain(_))));
}

#[test]
fn g_large_w_limit() {
    let mc = &r1().mc;
    let w = Cx::from_f64(mc.prec(), 1e6, 0.0);
    let wg = (&mc.eval_g(&w).unwrap() * &w).to_c64();
    assert!((wg - 1.0).norm() < 1e-5, "{wg}");
}

#[test]
fn g_at_one_against_riemann_sum() {
    let mc = &r1().mc;
    let g = mc.eval_g(&Cx::from_f64(mc.prec(), 1.0, 0.0)).unwrap().to_c64();
    let n = 1_000_000;
    let h = 1.0 / n as f64;
    let brute: f64 = (0..n)
        .map(|i| {
            let t = -2.0 + (i as f64 + 0.5) * h;
            1.0 / (1.0 - t * t * t)
        })
        .sum::<f64>()
        * h;
    assert!(g.im.abs() < 1e-30);
    assert!(rel(g.re, brute) < 1e-8, "{} vs {brute}", g.re);
}

#[test]
fn g_is_rejected_on_the_cut() {
    let mc = &r1().mc;
    assert!(mc.eval_g(&Cx::from_f64(mc.prec(), -4.0, 0.0)).is_err());
}

#[test]
fn closed_form_moments() {
    let mc = &r1().mc;
    let tol = 1e-30;
    assert!(rel(mc.moment(WeightId::A, 0).to_f64(), 3.0) < tol);
    assert!(rel(mc.moment(WeightId::B, 1).to_f64(), 0.5) < tol);
    assert!(rel(mc.moment(WeightId::C, 0).to_f64(), 0.6) < tol);
}

fn simpson(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn cauchy_moment_against_double_integral() {
    let mc = &r1().mc;
    let m = mc.moment(WeightId::Af, 0).to_f64();
    // ∫₀¹ τ^{1/3} g(τ) dτ = 3 ∫₀¹ u³ ∫_{−2}^{−1} dt/(u³ − t³) du on a 1000 × 1000 grid
    let brute = simpson(1000, 0.0, 1.0, |u| 3.0 * u.powi(3) * simpson(1000, -2.0, -1.0, |t| 1.0 / (u.powi(3) - t.powi(3))));
    assert!(rel(m, brute) < 1e-8, "{m} vs {brute}");
}

#[test]
fn hankel_positive_and_moments_decrease() {
    let mc = &r1().mc;
    for id in [WeightId::A, WeightId::B, WeightId::Af] {
        let m: Vec<f64> = (0..8).map(|k| mc.moment(id, k).to_f64()).collect();
        assert!(m.windows(2).all(|w| w[1] < w[0]), "{id:?} {m:?}");
        for d in 1..=4 {
            let h = nalgebra::DMatrix::from_fn(d, d, |i, j| m[i + j]);
            assert!(h.determinant() > 0.0, "{id:?} order {d}");
        }
    }
}

#[test]
fn moment_error_estimate_bounds_refinement() {
    let coarse = MomentCache::new(&StarConfig::reference_r1(128, 64, 24)).unwrap();
    let fine = MomentCache::new(&StarConfig::reference_r1(128, 128, 24)).unwrap();
    for k in 0..6 {
        let (m, err) = coarse.moment_with_error(WeightId::Af, k).unwrap();
        let diff = Float::with_val(m.prec(), &m - fine.moment(WeightId::Af, k)).abs().to_f64();
        assert!(diff <= 10.0 * err.to_f64() + 1e-35, "k = {k}: {diff:e} vs {:e}", err.to_f64());
    }
}

#[test]
fn first_polynomials() {
    let f = r1();
    for n in 0..3 {
        assert_eq!(f.polys[n].coeffs.len(), 1);
        assert_eq!(f.polys[n].coeffs[0], 1);
    }
    let p3 = &f.polys[3];
    assert_eq!(p3.degree(), 1);
    assert!((p3.coeffs[0].to_f64() + 0.25).abs() < 1e-30);
    assert_eq!(p3.coeffs[1], 1);
}

#[test]
fn p6_satisfies_its_conditions() {
    let f = r1();
    let p6 = &f.polys[6];
    assert_eq!(p6.degree(), 2);
    let worst = mop_core::orthogonality_residuals(&f.mc, p6).unwrap().iter().map(Float::to_f64).fold(0.0, |a: f64, r| a.max(r.abs()));
    assert!(worst < 1e-32, "{worst:e}");
}

#[test]
fn q_values_and_rotation() {
    let f = r1();
    let p = f.mc.prec();
    let q1 = mop_core::eval_q(&f.polys[1], &Cx::from_f64(p, 0.3, 0.0)).to_c64();
    assert!((q1 - 0.3).norm() < 1e-30);
    let q3 = mop_core::eval_q(&f.polys[3], &Cx::from_f64(p, 1.0, 0.0)).to_c64();
    assert!((q3 - 0.75).norm() < 1e-30);
    let z = C::new(0.7, -0.4);
    let rot = C::from_polar(1.0, 2.0 * PI / 3.0);
    let a = mop_core::eval_q(&f.polys[4], &Cx::from_c64(p, z)).to_c64();
    let b = mop_core::eval_q(&f.polys[4], &Cx::from_c64(p, z * rot)).to_c64();
    assert!((b - a * C::from_polar(1.0, 8.0 * PI / 3.0)).norm() < 1e-14);
}

#[test]
fn a2_and_three_term_consistency() {
    let f = r1();
    let e = mop_core::compute_a(&f.mc, &f.polys, 2).unwrap();
    let a2 = e.a.to_f64();
    assert!((a2 - 0.25).abs() < 1e-30);
    let p = f.mc.prec();
    for z in [C::new(0.3, 0.0), C::new(-1.2, 0.5), C::new(2.0, 3.0)] {
        let zz = Cx::from_c64(p, z);
        let q = |n: usize| mop_core::eval_q(&f.polys[n], &zz).to_c64();
        assert!((z * q(2) - q(3) - a2 * q(0)).norm() < 1e-14);
    }
}

#[test]
fn a_positive_and_zeros_interlace() {
    let f = r1();
    let table = mop_core::build_recurrence(&f.mc, &f.polys, 24).unwrap();
    assert!(table.entries.iter().all(|e| e.a > 0));
    let a3 = f.mc.config().alpha3();
    let roots: Vec<Vec<Float>> = f.polys.iter().map(|p| mop_core::roots(p, &a3).unwrap()).collect();
    assert!(roots[3][0].to_f64().cbrt() < roots[4][0].to_f64().cbrt());
    for n in 0..=2 {
        assert!(roots[n].is_empty());
        assert!(mop_core::check_interlacing(n, &roots[n], &roots[n + 1]).ok());
    }
    for n in 0..24 {
        let rep = mop_core::check_interlacing(n, &roots[n], &roots[n + 1]);
        assert!(rep.ok(), "n = {n}: {:?}", rep.violations);
    }
}

#[test]
fn phi0_leading_coefficient() {
    let f = r1();
    let k = PhiKernel::new(&f.mc, &f.polys[0]);
    let w = Cx::from_f64(f.mc.prec(), -1e8, 0.0);
    let v = (&k.eval(&w).unwrap() * &w).to_c64();
    assert!((-v - 3.0).norm() < 1e-7, "{v}");
}

#[test]
fn phi1_closed_form() {
    let f = r1();
    let k = PhiKernel::new(&f.mc, &f.polys[1]);
    let v = k.eval(&Cx::from_f64(f.mc.prec(), -1.0, 0.0)).unwrap().to_c64();
    let exact = 3.0 - LN_2 - PI / 3f64.sqrt();
    assert!(rel(v.re, exact) < 1e-10, "{} vs {exact}", v.re);
    let brute = simpson(1000, 0.0, 1.0, |u| 3.0 * u.powi(3) / (u.powi(3) + 1.0));
    assert!(rel(exact, brute) < 1e-10);
}

#[test]
fn second_kind_zero_counts() {
    let f = r1();
    for n in [0, 1, 2, 3, 5] {
        assert!(f.records[n].p2_roots.is_empty(), "n = {n}");
    }
    let r4 = f.records[4].roots_f64();
    assert_eq!(r4.len(), 1);
    assert!(r4[0] > -8.0 && r4[0] < -1.0);
    for w in f.records.windows(2) {
        assert!(second_kind::check_root_interlacing(&w[0], &w[1]).is_empty(), "n = {}", w[0].n);
    }
}

#[test]
fn first_norm_and_orthonormality() {
    let f = r1();
    assert!(rel(f.records[0].kappa_n(), 3f64.powf(-0.5)) < 1e-14);
    for n in [6, 10, 16, 24] {
        let (p, r) = (&f.polys[n], &f.records[n]);
        assert!(second_kind::nu_orthogonality(&f.mc, p, r) < 1e-20, "n = {n}");
        assert!(second_kind::nu2_orthogonality(&f.mc, p, r) < 1e-10, "n = {n}");
        // ∫ p_n² dν_n = K_n² ∫ P_n² dν_n
        let k = r.kappa_n();
        assert!(rel(k * k * r.norm1(), 1.0) < 1e-14);
    }
}

#[test]
fn h_far_field_and_limit() {
    let f = r1();
    for n in [6, 12, 18] {
        let z = C::new(1e4, 0.0);
        let h = f.records[n].eval_h(z);
        assert!((h * z + 1.0).norm() < 1e-3, "n = {n}: {h}");
    }
    let target = -4.0 / 56f64.sqrt();
    assert!((second_kind::h_limit(0, C::new(2.0, 0.0), 1.0) - target).norm() < 1e-15);
    let err: Vec<f64> = [12, 18, 24].iter().map(|&n| (f.records[n].eval_h(C::new(2.0, 0.0)) - target).norm()).collect();
    assert!(err[2] < err[1] && err[1] < err[0], "{err:?}");
    assert!(err[2] < 5e-2);
}

#[test]
fn h_rotation_prefactor() {
    let f = r1();
    let rot = C::from_polar(1.0, 2.0 * PI / 3.0);
    let z = C::new(0.9, 1.3);
    for (n, m) in [(12, 2), (13, 1), (14, 3)] {
        let a = f.records[n].eval_h(z);
        let b = f.records[n].eval_h(z * rot);
        assert!((b - a * rot.powi(m)).norm() < 1e-10 * a.norm(), "n = {n}");
    }
}

#[test]
fn symmetric_beta_gamma() {
    let p = 300;
    let three = Float::with_val(p, 3);
    let (beta, gamma, _) = riemann_surface::solve_beta_gamma(&three, &three).unwrap();
    let oracle = riemann_surface::symmetric_beta(&three);
    assert!(Float::with_val(p, &beta + &gamma).abs() < 1e-20);
    assert!(Float::with_val(p, &beta - &oracle).abs() < 1e-20);
}

#[test]
fn r1_beta_gamma_residuals() {
    let s = surface_r1();
    assert_eq!(s.lambda.to_f64(), 15.0);
    assert_eq!(s.mu.to_f64(), 3.0);
    for r in &s.residuals {
        assert!(r.clone().abs() < 1e-30);
    }
}

#[test]
fn psi1_asymptote() {
    let s = surface_r1();
    let z = C::new(1e6, 0.0);
    let b = s.eval_branches(z).unwrap();
    assert!((b[1] / (-2.0 * z) - 1.0).norm() < 1e-5);
}

#[test]
fn branch_vieta_identities() {
    let s = surface_r1();
    let f = |x: &Float| x.to_f64();
    let (h, t1, t2, hb) = (f(&s.h), f(&s.theta1), f(&s.theta2), f(&s.h_beta));
    let a3 = f(&s.a3);
    let prod = 2.0 * t1 / hb.powi(3);
    for z in [C::new(3.0, 0.5), C::new(-0.5, 2.0), C::new(-12.0, -1.0), C::new(0.4, -0.01)] {
        let b = s.eval_branches(z).unwrap();
        let sum = -(2.0 * z / a3 + 1.0 + (3.0 + h + t2 - t1) / hb);
        assert!((b[0] + b[1] + b[2] - sum).norm() < 1e-10 * sum.norm());
        assert!((b[0] * b[1] * b[2] - prod).norm() < 1e-10 * prod.abs());
    }
}

#[test]
fn branch_refuses_endpoints() {
    let s = surface_r1();
    assert!(s.eval_branches(C::new(1.0, 0.0)).is_err());
    assert!(s.eval_branches(C::new(-8.0, 0.0)).is_err());
}

#[test]
fn limiting_functions_at_infinity() {
    let s = surface_r1();
    let a = s.implied_limits().unwrap().limits;
    let z = C::new(0.7, 0.9);
    let (f1, _) = s.limiting_f(z, &a).unwrap();
    assert!((f1[2] - z * f1[0]).norm() < 1e-14 * f1[2].norm());
    let far = C::new(1e6, 0.0);
    let t = s.tilde(far).unwrap();
    let (f1, _) = s.limiting_f(far, &a).unwrap();
    assert!((f1[0] - 1.0).norm() < 1e-5);
    let e = s.delta_a();
    let closed = -Float::with_val(s.prec, &s.a3 * &s.theta2) / Float::with_val(s.prec, &s.h_beta * 4u32);
    assert!(Float::with_val(s.prec, &e - &closed).abs() < 1e-40);
    assert!(e > 0);
    let e = e.to_f64();
    assert!(rel(((t[0] - 1.0) * far).re, e) < 1e-4);
    assert!(rel(a.a0 - a.a3, e) < 1e-12);
    assert!(rel(-((f1[0] - 1.0) * far).re, a.a0) < 1e-4);
}

#[test]
fn equilibrium_potential_oracles() {
    let pm = DiscreteMeasure::new(0.0, 0.0, vec![0.0], vec![1.0]).unwrap();
    assert!((equilibrium::potential(&pm, C::new(std::f64::consts::E, 0.0)).unwrap() + 1.0).abs() < 1e-15);
    assert!(equilibrium::potential(&pm, C::new(0.0, 0.0)).is_err());
    let n = 1000;
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let u = DiscreteMeasure::new(0.0, 1.0, nodes, vec![1.0 / n as f64; n]).unwrap();
    let exact = -(10.0 * 10f64.ln() - 9.0 * 9f64.ln() - 1.0);
    assert!((equilibrium::potential(&u, C::new(10.0, 0.0)).unwrap() - exact).abs() < 1e-3);
}

#[test]
fn equilibrium_masses_far_field_and_refinement() {
    let cfg = StarConfig::reference_r1(128, 64, 24);
    let coarse = equilibrium::solve_equilibrium(&cfg, 400).unwrap();
    let fine = equilibrium::solve_equilibrium(&cfg, 800).unwrap();
    for sol in [&coarse, &fine] {
        assert!((sol.mu1.mass() - 1.0).abs() < 1e-12);
        assert!((sol.mu2.mass() - 1.0).abs() < 1e-12);
    }
    for x in [1e6, -1e6] {
        let z = C::new(x, 0.0);
        let v = equilibrium::potential(&coarse.mu1, z).unwrap() + z.norm().ln();
        assert!(v.abs() < 1e-5, "{v:e}");
    }
    assert!((coarse.omega1 - fine.omega1).abs() < 1e-3);
    assert!((coarse.omega2 - fine.omega2).abs() < 1e-3);
}

#[test]
fn config_validation_errors() {
    let mut v = base_json();
    v.as_object_mut().unwrap().remove("alpha");
    match StarConfig::from_value(&v) {
        Err(Error::MissingKey(k)) => assert_eq!(k, "alpha"),
        other => panic!("{other:?}"),
    }
    let mut v = base_json();
    v["b"] = json!("0.5");
    let e = StarConfig::from_value(&v).unwrap_err();
    assert!(e.to_string().contains("intervals out of order"), "{e}");
    assert_eq!(e.exit_code(), 2);
    let mut v = base_json();
    v["s2"]["scale"] = json!("0");
    assert!(StarConfig::from_value(&v).unwrap_err().to_string().contains("s2 vanishes"));
    let mut v = base_json();
    v["alpha"] = json!(0.5);
    assert!(matches!(StarConfig::from_value(&v), Err(Error::Config(_))));
}

#[test]
fn toml_and_json_agree() {
    let toml = r#"
alpha = "1"
a = "1"
b = "2"
precision_bits = 128
quad_points = 64
n_max = 24
[s1]
gamma = "0"
delta = "0"
[s2]
gamma = "0"
delta = "0"
"#;
    let t = StarConfig::from_toml_str(toml).unwrap();
    let j = StarConfig::from_json_str(&base_json().to_string()).unwrap();
    assert_eq!(t.echo(), j.echo());
}
