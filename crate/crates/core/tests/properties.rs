use std::f64::consts::PI;
use std::sync::OnceLock;

use mopstar_core::asymptotics;
use mopstar_core::equilibrium::{self, DiscreteMeasure};
use mopstar_core::hp::{self, Cx};
use mopstar_core::mop_core::{self, ReducedPoly};
use mopstar_core::riemann_surface::{self, ALimits, SurfaceModel};
use mopstar_core::second_kind;
use mopstar_core::{MomentCache, StarConfig};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rug::Float;

struct Fixture {
    mc: MomentCache,
    polys: Vec<ReducedPoly>,
}

fn r1() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let mc = MomentCache::new(&StarConfig::reference_r1(128, 64, 24)).unwrap();
        let polys = mop_core::compute_all(&mc, 25).unwrap();
        Fixture { mc, polys }
    })
}

fn surface() -> &'static (SurfaceModel, ALimits) {
    static S: OnceLock<(SurfaceModel, ALimits)> = OnceLock::new();
    S.get_or_init(|| {
        let s = SurfaceModel::build(&StarConfig::reference_r1(128, 64, 8)).unwrap();
        let a = s.implied_limits().unwrap().limits;
        (s, a)
    })
}

/// Points at least 0.05 away from both cuts.
fn off_cut() -> impl Strategy<Value = C> {
    (-12.0f64..4.0, -3.0f64..3.0).prop_filter("near a cut", |&(x, y)| {
        let on1 = (-0.05..=1.05).contains(&x);
        let on2 = (-8.05..=-0.95).contains(&x);
        y.abs() > 0.05 || !(on1 || on2)
    }).prop_map(|(x, y)| C::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn q_rotation_symmetry(n in 0usize..25, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let f = r1();
        let p = f.mc.prec();
        let z = C::new(re, im);
        let rot = C::from_polar(1.0, 2.0 * PI / 3.0);
        let a = mop_core::eval_q(&f.polys[n], &Cx::from_c64(p, z)).to_c64();
        let b = mop_core::eval_q(&f.polys[n], &Cx::from_c64(p, z * rot)).to_c64();
        let want = a * rot.powi(n as i32);
        prop_assert!((b - want).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn monic_and_real_rooted(n in 3usize..25) {
        let f = r1();
        let p = &f.polys[n];
        prop_assert_eq!(p.degree(), n / 3);
        prop_assert_eq!(p.coeffs.last().unwrap().to_f64(), 1.0);
        let roots = mop_core::roots(p, &f.mc.config().alpha3()).unwrap();
        prop_assert_eq!(roots.len(), n / 3);
        prop_assert!(roots.iter().all(|x| *x > 0 && *x < 1));
    }

    #[test]
    fn poly_from_roots_vanishes_at_roots(mut xs in prop::collection::vec(-8.0f64..-1.0, 1..8)) {
        xs.sort_by(f64::total_cmp);
        let p = 128;
        let roots: Vec<Float> = xs.iter().map(|&x| hp::fl(p, x)).collect();
        let c = second_kind::poly_from_roots(&roots, p);
        prop_assert_eq!(c.len(), xs.len() + 1);
        prop_assert_eq!(c.last().unwrap().to_f64(), 1.0);
        for r in &roots {
            prop_assert!(hp::horner(&c, r).abs() < 1e-25);
        }
    }

    #[test]
    fn interlace_accepts_merged_sequences(mut v in prop::collection::vec(0.0f64..1.0, 2..20)) {
        v.sort_by(f64::total_cmp);
        v.dedup();
        let xs: Vec<f64> = v.iter().step_by(2).copied().collect();
        let ys: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
        prop_assert!(mop_core::interlace(&xs, &ys, Some(true)).is_empty());
        prop_assert!(!mop_core::interlace(&xs, &ys, Some(false)).is_empty());
        prop_assert!(!mop_core::interlace(&xs, &xs, None).is_empty());
    }

    #[test]
    fn branch_vieta_and_conjugation(z in off_cut()) {
        let (s, _) = surface();
        let b = s.eval_branches(z).unwrap();
        let c_prod = s.c_prod.to_f64();
        prop_assert!((b[0] * b[1] * b[2] - c_prod).norm() <= 1e-9 * c_prod.abs());
        let bc = s.eval_branches(z.conj()).unwrap();
        for k in 0..3 {
            prop_assert!((bc[k] - b[k].conj()).norm() <= 1e-9 * (1.0 + b[k].norm()));
        }
        let zz = Cx::from_c64(s.prec, z);
        for w in &b {
            prop_assert!(s.cubic_residual(&zz, &Cx::from_c64(s.prec, *w)).to_f64() < 1e-12);
        }
    }

    #[test]
    fn limiting_functions_satisfy_relations(z in off_cut()) {
        let (s, a) = surface();
        let (f1, f2) = s.limiting_f(z, a).unwrap();
        for r in asymptotics::check_limit_relations(z, &f1, &f2, &a.six()) {
            prop_assert!(r.value < 1e-8, "{} at {z}: {:e}", r.name, r.value);
        }
    }

    #[test]
    fn a_relations_vanish_on_consistent_limits(a0 in 0.1f64..2.0, a3f in 0.1f64..0.9, a1 in 0.001f64..1.0) {
        let a3 = a0 * a3f;
        let a4 = a1 + a0 - a3;
        let six = ALimits { a0, a1, a3, a4 }.six();
        for r in asymptotics::a_relations(&six) {
            prop_assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn potential_is_linear_and_tends_to_minus_log(ws in prop::collection::vec(0.01f64..1.0, 3..12), r in 1e3f64..1e5) {
        let n = ws.len();
        let total: f64 = ws.iter().sum();
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let w: Vec<f64> = ws.iter().map(|x| x / total).collect();
        let m = DiscreteMeasure::new(0.0, 1.0, nodes.clone(), w.clone()).unwrap();
        let z = C::new(0.3, r);
        let v = equilibrium::potential(&m, z).unwrap();
        prop_assert!((v + z.norm().ln()).abs() < 2.0 / r);
        let sum: f64 = (0..n)
            .map(|i| w[i] * equilibrium::potential(&DiscreteMeasure::new(0.0, 1.0, vec![nodes[i]], vec![1.0]).unwrap(), z).unwrap())
            .sum();
        prop_assert!((v - sum).abs() < 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn kolmogorov_distance_is_a_probability(xs in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let n = 50;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = asymptotics::kolmogorov_distance(&xs, &nodes, &vec![1.0 / n as f64; n]);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn decimal_geometry_round_trips(alpha in 1u32..400, a in 1u32..300, gap in 1u32..300) {
        let text = |v: u32| format!("{}.{:02}", v / 100, v % 100);
        let b = a + gap;
        let v = serde_json::json!({
            "alpha": text(alpha), "a": text(a), "b": text(b),
            "s1": {"gamma": "0", "delta": "0"}, "s2": {"gamma": "0", "delta": "0"},
            "precision_bits": 96, "quad_points": 32, "n_max": 6
        });
        let cfg = StarConfig::from_value(&v).unwrap();
        prop_assert!((cfg.b.to_f64() - b as f64 / 100.0).abs() < 1e-15);
        let mut swapped = v.clone();
        swapped["a"] = v["b"].clone();
        swapped["b"] = v["a"].clone();
        prop_assert!(StarConfig::from_value(&swapped).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn beta_gamma_symmetric_when_lambda_equals_mu(mu in 1.5f64..8.0) {
        let p = 200;
        let m = hp::fl(p, mu);
        let (beta, gamma, _) = riemann_surface::solve_beta_gamma(&m, &m).unwrap();
        prop_assert!(Float::with_val(p, &beta + &gamma).abs() < 1e-20);
        let orc = riemann_surface::symmetric_beta(&m);
        prop_assert!(Float::with_val(p, &beta - &orc).abs() < 1e-20);
        let r = riemann_surface::beta_gamma_system(&beta, &gamma, &m, &m);
        prop_assert!(r[0].clone().abs() < 1e-30 && r[1].clone().abs() < 1e-30);
    }
}
