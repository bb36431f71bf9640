//! The genus-zero three-sheeted surface over Δ₁ = [0, α³], Δ₂ = [−b³, −a³]:
//! the β/γ system, the cubic for ψ, labelled branches, the limiting ratio
//! functions F̃ and the boundary-value constants.

use num_complex::Complex64;
use rug::Float;

use crate::config_weights::StarConfig;
use crate::error::{Error, Result};
use crate::hp::{dec, Cx};

type C = Complex64;

/// The two equations of the β/γ system.
pub fn beta_gamma_system(beta: &Float, gamma: &Float, lambda: &Float, mu: &Float) -> [Float; 2] {
    let p = beta.prec().max(gamma.prec());
    let f = |v: f64| Float::with_val(p, v);
    let s = Float::with_val(p, beta + gamma);
    let dlt = Float::with_val(p, beta - gamma);
    let bg = Float::with_val(p, beta * gamma);
    let t1 = f(3.0) - &bg - &s;
    let t2 = f(3.0) - &bg + &s;
    let d3 = Float::with_val(p, dlt.square_ref()) * &dlt;
    let e1 = Float::with_val(p, &s * 2u32) * t1 * t2 + Float::with_val(p, lambda - mu) * &d3;
    let lm = Float::with_val(p, lambda + mu);
    let lhs = Float::with_val(p, lm.square_ref()) * Float::with_val(p, d3.square_ref());
    let q = f(3.0) + &bg;
    let q3 = Float::with_val(p, q.square_ref()) * &q;
    let rhs = q3 * (f(1.0) - &bg) * (f(2.0) + &s) * (f(2.0) - &s) * 4u32;
    [e1, lhs - rhs]
}

fn norm2(v: &[Float; 2]) -> Float {
    let p = v[0].prec();
    Float::with_val(p, v[0].square_ref()) + Float::with_val(p, v[1].square_ref())
}

/// Damped Newton with a central-difference Jacobian. Returns the point and ‖F‖².
fn newton_bg(x0: (Float, Float), lambda: &Float, mu: &Float, iters: usize) -> (Float, Float, Float) {
    let p = x0.0.prec();
    let (mut b, mut g) = x0;
    let h = Float::with_val(p, Float::i_exp(1, -(p as i32) / 3));
    let mut fx = beta_gamma_system(&b, &g, lambda, mu);
    let mut nf = norm2(&fx);
    for _ in 0..iters {
        let col = |db: &Float, dg: &Float| {
            let fp = beta_gamma_system(&Float::with_val(p, &b + db), &Float::with_val(p, &g + dg), lambda, mu);
            let fm = beta_gamma_system(&Float::with_val(p, &b - db), &Float::with_val(p, &g - dg), lambda, mu);
            [
                Float::with_val(p, &fp[0] - &fm[0]) / Float::with_val(p, &h * 2u32),
                Float::with_val(p, &fp[1] - &fm[1]) / Float::with_val(p, &h * 2u32),
            ]
        };
        let zero = Float::new(p);
        let jb = col(&h, &zero);
        let jg = col(&zero, &h);
        let det = Float::with_val(p, &jb[0] * &jg[1]) - Float::with_val(p, &jg[0] * &jb[1]);
        if det.is_zero() {
            break;
        }
        let db = (Float::with_val(p, &fx[0] * &jg[1]) - Float::with_val(p, &jg[0] * &fx[1])) / &det;
        let dg = (Float::with_val(p, &jb[0] * &fx[1]) - Float::with_val(p, &fx[0] * &jb[1])) / &det;
        let mut step = Float::with_val(p, 1);
        let mut improved = false;
        for _ in 0..40 {
            let nb = Float::with_val(p, &b - Float::with_val(p, &db * &step));
            let ng = Float::with_val(p, &g - Float::with_val(p, &dg * &step));
            let nfx = beta_gamma_system(&nb, &ng, lambda, mu);
            let nn = norm2(&nfx);
            if nn < nf {
                b = nb;
                g = ng;
                fx = nfx;
                nf = nn;
                improved = true;
                break;
            }
            step /= 2u32;
        }
        if !improved || nf.is_zero() {
            break;
        }
    }
    (b, g, nf)
}

/// Unique root of the β/γ system with −1 < γ < β < 1 and the number of distinct
/// constrained roots seen from a 16×16 multistart grid.
pub fn solve_beta_gamma(lambda: &Float, mu: &Float) -> Result<(Float, Float, usize)> {
    let p = lambda.prec();
    if *lambda <= 1 || *mu <= 1 {
        return Err(Error::Hypothesis("lambda and mu must exceed 1".into()));
    }
    let lo = Float::with_val(53, lambda);
    let mo = Float::with_val(53, mu);
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::INFINITY;
    for i in 0..16 {
        for j in 0..16 {
            let b0 = -1.0 + (i as f64 + 0.5) / 8.0;
            let g0 = -1.0 + (j as f64 + 0.5) / 8.0;
            if g0 >= b0 {
                continue;
            }
            let (b, g, nf) = newton_bg((Float::with_val(53, b0), Float::with_val(53, g0)), &lo, &mo, 80);
            let (b, g, nf) = (b.to_f64(), g.to_f64(), nf.to_f64().sqrt());
            best = best.min(nf);
            if nf < 1e-9 && -1.0 < g && g < b && b < 1.0 && !found.iter().any(|&(fb, fg)| (fb - b).abs() + (fg - g).abs() < 1e-7) {
                found.push((b, g));
            }
        }
    }
    match found.len() {
        0 => Err(Error::NonConvergence(format!(
            "no constrained root of the beta/gamma system; smallest residual on the grid {best:.3e}"
        ))),
        1 => {
            let (b, g, _) = newton_bg((Float::with_val(p, found[0].0), Float::with_val(p, found[0].1)), lambda, mu, 200);
            Ok((b, g, 1))
        }
        k => Err(Error::Hypothesis(format!("{k} distinct constrained roots of the beta/gamma system: {found:?}"))),
    }
}

/// With λ = μ the first equation forces γ = −β; β then solves a 1-D equation on (0, 1).
pub fn symmetric_beta(mu: &Float) -> Float {
    let p = mu.prec();
    let f = |b: &Float| {
        let g = Float::with_val(p, -b);
        beta_gamma_system(b, &g, mu, mu)[1].clone()
    };
    let mut lo = Float::with_val(p, 1e-12);
    let mut hi = Float::with_val(p, 1) - Float::with_val(p, 1e-12);
    let neg_lo = f(&lo).is_sign_negative();
    for _ in 0..(p + 20) {
        let mid = Float::with_val(p, &lo + &hi) / 2u32;
        if f(&mid).is_sign_negative() == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Float::with_val(p, &lo + &hi) / 2u32
}

/// The four a-limits entering the closed forms; a⁽²⁾ = a⁽⁰⁾, a⁽⁵⁾ = a⁽³⁾.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ALimits {
    pub a0: f64,
    pub a1: f64,
    pub a3: f64,
    pub a4: f64,
}

impl ALimits {
    pub fn from_six(a: &[f64; 6]) -> Self {
        ALimits { a0: a[0], a1: a[1], a3: a[3], a4: a[4] }
    }

    pub fn six(&self) -> [f64; 6] {
        [self.a0, self.a1, self.a0, self.a3, self.a4, self.a3]
    }

    /// ω₁⁽ˡ⁾ for l = 0..5.
    pub fn omega1(&self) -> [f64; 6] {
        let ALimits { a0, a1, a3, a4 } = *self;
        let w0 = (a4 - a1) / (a0 * a4);
        let w3 = a0 / (a0 - a3);
        [w0, a4 / (a4 - a1), w0, w3, (a0 - a3) / (a0 * a0), w3]
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    pub prec: u32,
    pub a3: Float,
    pub alpha3: Float,
    pub b3: Float,
    pub lambda: Float,
    pub mu: Float,
    pub beta: Float,
    pub gamma: Float,
    pub c: Float,
    pub d: Float,
    pub h: Float,
    pub theta1: Float,
    pub theta2: Float,
    pub h_beta: Float,
    /// z-free parts of the w² and w coefficients.
    pub coef_a: Float,
    pub coef_b: Float,
    /// ψ₀ψ₁ψ₂ = 2Θ₁/H(β)³.
    pub c_prod: Float,
    /// Leading Laurent coefficients: ψ₀(∞), ψ₁ ~ L₁z, ψ₂ ~ L₂/z.
    pub lead: [Float; 3],
    pub residuals: [Float; 2],
    pub constrained_roots: usize,
    f: Fast,
}

#[derive(Clone, Copy, Debug)]
struct Fast {
    a3: f64,
    h_beta: f64,
    coef_a: f64,
    coef_b: f64,
    c_prod: f64,
    lead: [f64; 3],
    scale: f64,
}

impl SurfaceModel {
    pub fn build(cfg: &StarConfig) -> Result<Self> {
        let p = cfg.prec();
        let a3 = cfg.a3();
        let alpha3 = cfg.alpha3();
        let b3 = cfg.b3();
        let lambda = Float::with_val(p, &b3 * 2u32) / &a3 - 1u32;
        let mu = Float::with_val(p, &alpha3 * 2u32) / &a3 + 1u32;
        let (beta, gamma, constrained_roots) = solve_beta_gamma(&lambda, &mu)?;
        let residuals = beta_gamma_system(&beta, &gamma, &lambda, &mu).map(|x| x.abs());
        if !(Float::with_val(p, -1) < gamma && gamma < beta && beta < 1) {
            return Err(Error::Hypothesis("beta/gamma root violates -1 < gamma < beta < 1".into()));
        }
        let one = Float::with_val(p, 1);
        let s = Float::with_val(p, &beta + &gamma);
        let dlt = Float::with_val(p, &beta - &gamma);
        let bg = Float::with_val(p, &beta * &gamma);
        let dd = Float::with_val(p, dlt.square_ref()) / Float::with_val(p, &one - &bg);
        // x² + s x + (dd − 3) = 0
        let disc = Float::with_val(p, s.square_ref()) - Float::with_val(p, &dd - 3u32) * 4u32;
        if disc <= 0 {
            return Err(Error::Hypothesis("quadratic for c, d has no real roots".into()));
        }
        let sq = disc.sqrt();
        let c = (Float::with_val(p, -&s) - &sq) / 2u32;
        let d = (Float::with_val(p, -&s) + &sq) / 2u32;
        if !(c < -1 && d > 1) {
            return Err(Error::Hypothesis(format!("c = {}, d = {} fail c < -1 < 1 < d", dec(&c, 12), dec(&d, 12))));
        }
        let h = Float::with_val(p, &s * (Float::with_val(p, &bg * 2u32) - &dd)) / 4u32;
        let quarter = |x: Float| x / 4u32;
        let theta1 = quarter(
            Float::with_val(p, &one - &c)
                * Float::with_val(p, &one - &d)
                * Float::with_val(p, &one - &beta)
                * Float::with_val(p, &one - &gamma),
        );
        let theta2 = quarter(
            Float::with_val(p, &one + &c)
                * Float::with_val(p, &one + &d)
                * Float::with_val(p, &one + &beta)
                * Float::with_val(p, &one + &gamma),
        );
        let h_beta = Float::with_val(p, &h + &beta)
            + Float::with_val(p, &theta1 * &beta) / Float::with_val(p, &one - &beta)
            + Float::with_val(p, &theta2 * &beta) / Float::with_val(p, &one + &beta);
        let hb2 = Float::with_val(p, h_beta.square_ref());
        let coef_a = Float::with_val(p, 1)
            + (Float::with_val(p, 3) + &h + &theta2 - &theta1) / &h_beta;
        let coef_b = Float::with_val(p, 2) / &h_beta
            + (Float::with_val(p, 2) + Float::with_val(p, &h * 2u32) + &theta2 - Float::with_val(p, &theta1 * 3u32)) / &hb2;
        let c_prod = Float::with_val(p, &theta1 * 2u32) / Float::with_val(p, &hb2 * &h_beta);
        let lead = [
            Float::with_val(p, -2) / &h_beta,
            Float::with_val(p, -2) / &a3,
            Float::with_val(p, &a3 * &theta1) / Float::with_val(p, &hb2 * 2u32),
        ];
        let f = Fast {
            a3: a3.to_f64(),
            h_beta: h_beta.to_f64(),
            coef_a: coef_a.to_f64(),
            coef_b: coef_b.to_f64(),
            c_prod: c_prod.to_f64(),
            lead: [lead[0].to_f64(), lead[1].to_f64(), lead[2].to_f64()],
            scale: 1.0 + alpha3.to_f64() + b3.to_f64(),
        };
        Ok(SurfaceModel {
            prec: p,
            a3,
            alpha3,
            b3,
            lambda,
            mu,
            beta,
            gamma,
            c,
            d,
            h,
            theta1,
            theta2,
            h_beta,
            coef_a,
            coef_b,
            c_prod,
            lead,
            residuals,
            constrained_roots,
            f,
        })
    }

    /// a⁽⁰⁾ − a⁽³⁾ = a⁽⁴⁾ − a⁽¹⁾ = −a³Θ₂/(4H(β)).
    pub fn delta_a(&self) -> Float {
        -Float::with_val(self.prec, &self.a3 * &self.theta2) / Float::with_val(self.prec, &self.h_beta * 4u32)
    }

    /// Coefficients (p, q, r) of w³ + p w² + q w + r at z.
    fn cubic_f64(&self, z: C) -> [C; 3] {
        let f = &self.f;
        [
            z * (2.0 / f.a3) + f.coef_a,
            z * (4.0 / (f.a3 * f.h_beta)) + f.coef_b,
            C::new(-f.c_prod, 0.0),
        ]
    }

    pub fn cubic_hp(&self, z: &Cx) -> [Cx; 3] {
        let p = self.prec;
        let two_over = Float::with_val(p, 2) / &self.a3;
        let four_over = Float::with_val(p, 4) / Float::with_val(p, &self.a3 * &self.h_beta);
        [
            z.scale(&two_over).add_real(&self.coef_a),
            z.scale(&four_over).add_real(&self.coef_b),
            Cx::real(Float::with_val(p, -&self.c_prod)),
        ]
    }

    /// Labelled roots (ψ₀, ψ₁, ψ₂) in double precision.
    ///
    /// Labels are fixed far up (or down) the vertical line through z, where ψ₁ is
    /// the largest and ψ₂ the smallest root, and carried down to z by
    /// continuation; points on a cut are taken as limits from the side of Im z.
    pub fn eval_branches(&self, z: C) -> Result<[C; 3]> {
        self.check_branch_points(z)?;
        let sign = if z.im.is_sign_negative() { -1.0 } else { 1.0 };
        let m = 1e4 * self.f.scale.max(1.0) * (1.0 + z.re.abs() / self.f.scale);
        let top = C::new(z.re, sign * m);
        let mut cur = self.initial_roots(top)?;
        let steps = 4000;
        for s in (0..steps).rev() {
            let u = s as f64 / steps as f64;
            let zz = C::new(z.re, z.im + (sign * m - z.im) * u * u * u);
            let next = aberth(self.cubic_f64(zz), cur)?;
            cur = best_permutation(&cur, next);
        }
        let gap = (cur[0] - cur[1]).norm().min((cur[1] - cur[2]).norm()).min((cur[0] - cur[2]).norm());
        if gap < 1e-12 * (1.0 + cur.iter().map(|w| w.norm()).fold(0.0, f64::max)) {
            return Err(Error::Domain(format!("branches coincide near z = {z}")));
        }
        Ok(cur)
    }

    fn initial_roots(&self, z: C) -> Result<[C; 3]> {
        let l = self.f.lead;
        let guess = [C::new(l[0], 0.0), z * l[1], C::new(l[2], 0.0) / z];
        let mut r = aberth(self.cubic_f64(z), guess)?;
        r.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        // largest is ψ₁, smallest ψ₂
        Ok([r[1], r[0], r[2]])
    }

    fn check_branch_points(&self, z: C) -> Result<()> {
        let ends = [0.0, self.alpha3.to_f64(), -self.b3.to_f64(), -self.f.a3];
        for e in ends {
            if (z - e).norm() < 1e-10 {
                return Err(Error::Domain(format!("z = {z} is a branch point")));
            }
        }
        Ok(())
    }

    /// Labelled roots polished at the working precision.
    pub fn eval_branches_hp(&self, z: &Cx) -> Result<[Cx; 3]> {
        let lo = self.eval_branches(z.to_c64())?;
        let co = self.cubic_hp(z);
        let p = self.prec;
        let mut out = Vec::with_capacity(3);
        for w0 in lo {
            let mut w = Cx::from_c64(p, w0);
            for _ in 0..64 {
                let w2 = &w * &w;
                let val = &(&(&w2 * &w) + &(&co[0] * &w2)) + &(&(&co[1] * &w) + &co[2]);
                let three = Cx::from_f64(p, 3.0, 0.0);
                let two = Cx::from_f64(p, 2.0, 0.0);
                let der = &(&(&three * &w2) + &(&(&two * &co[0]) * &w)) + &co[1];
                let step = val.div(&der);
                w = &w - &step;
                if step.abs() <= Float::with_val(p, Float::i_exp(1, 8 - p as i32)) * (w.abs() + 1u32) {
                    break;
                }
            }
            out.push(w);
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    }

    /// |w³ + p w² + q w + r| / (|w|³ + |p||w|² + |q||w| + |r|).
    pub fn cubic_residual(&self, z: &Cx, w: &Cx) -> Float {
        let co = self.cubic_hp(z);
        let w2 = &w.clone() * w;
        let t = [&w2 * w, &co[0] * &w2, &co[1] * w, co[2].clone()];
        let val = &(&t[0] + &t[1]) + &(&t[2] + &t[3]);
        let scale = t.iter().fold(Float::new(self.prec), |acc, x| acc + x.abs());
        val.abs() / scale
    }

    /// ψ̃_k = ψ_k divided by its leading Laurent coefficient.
    pub fn tilde(&self, z: C) -> Result<[C; 3]> {
        let b = self.eval_branches(z)?;
        let l = self.f.lead;
        Ok([b[0] / l[0], b[1] / l[1], b[2] / l[2]])
    }

    /// Surface-implied a-limits.
    ///
    /// The z-free part w³ + A w² + B w − C of the cubic has a double root w_d and a
    /// simple root w_s. Combined with the closed forms at the points where ψ̃₀
    /// meets them, a⁽³⁾/a⁽⁰⁾ = w_d/ψ₀(∞) and a⁽¹⁾/a⁽⁴⁾ = w_s/ψ₀(∞); with the gap
    /// a⁽⁰⁾ − a⁽³⁾ = a⁽⁴⁾ − a⁽¹⁾ this fixes all four values.
    pub fn implied_limits(&self) -> Result<ImpliedLimits> {
        let p = self.prec;
        // N'(w) = 3w² + 2A w + B
        let a = &self.coef_a;
        let b = &self.coef_b;
        let disc = Float::with_val(p, a.square_ref()) * 4u32 - Float::with_val(p, b * 12u32);
        if disc < 0 {
            return Err(Error::Hypothesis("z-free cubic has no real critical points".into()));
        }
        let sq = disc.sqrt();
        let n_at = |w: &Float| {
            let w2 = Float::with_val(p, w.square_ref());
            Float::with_val(p, &w2 * w) + Float::with_val(p, &w2 * a) + Float::with_val(p, w * b) - &self.c_prod
        };
        let cands = [
            (-Float::with_val(p, a * 2u32) + &sq) / 6u32,
            (-Float::with_val(p, a * 2u32) - &sq) / 6u32,
        ];
        let (wd, res) = cands
            .into_iter()
            .map(|w| {
                let r = n_at(&w).abs();
                (w, r)
            })
            .min_by(|x, y| crate::hp::cmp(&x.1, &y.1))
            .expect("two candidates");
        let ws = Float::with_val(p, -a) - Float::with_val(p, &wd * 2u32);
        let e = self.delta_a();
        let r2 = Float::with_val(p, &wd / &self.lead[0]);
        let r1 = Float::with_val(p, &ws / &self.lead[0]);
        let a0 = Float::with_val(p, &e / (Float::with_val(p, 1) - &r2));
        let a3v = Float::with_val(p, &a0 - &e);
        let a4 = Float::with_val(p, &e / (Float::with_val(p, 1) - &r1));
        let a1 = Float::with_val(p, &a4 - &e);
        // ψ₁ψ₂ ~ L₁L₂ fixes a⁽⁴⁾(a⁽⁰⁾)²/e² = a³/H(β)
        let lhs = Float::with_val(p, &a4 * Float::with_val(p, a0.square_ref())) / Float::with_val(p, e.square_ref());
        let rhs = Float::with_val(p, &self.a3 / &self.h_beta);
        let consistency = (Float::with_val(p, &lhs - &rhs) / rhs).abs().to_f64();
        Ok(ImpliedLimits {
            limits: ALimits { a0: a0.to_f64(), a1: a1.to_f64(), a3: a3v.to_f64(), a4: a4.to_f64() },
            double_root_residual: res.to_f64(),
            consistency,
        })
    }

    /// (F̃₁⁽⁰ᐟ⁵⁾, F̃₂⁽⁰ᐟ⁵⁾) at z.
    pub fn limiting_f(&self, z: C, a: &ALimits) -> Result<([C; 6], [C; 6])> {
        let t = self.tilde(z)?;
        Ok(limiting_f_from_tilde(z, t, a))
    }

    /// Values of the twelve boundary laws at τ on Δ₁ or Δ₂, approached from
    /// Im = `eps`. Returns `None` for τ off both intervals.
    pub fn boundary_laws(&self, tau: f64, eps: f64, a: &ALimits) -> Result<Option<[f64; 6]>> {
        let z = C::new(tau, eps);
        let (f1, f2) = self.limiting_f(z, a)?;
        let alpha3 = self.alpha3.to_f64();
        let (lo2, hi2) = (-self.b3.to_f64(), -self.f.a3);
        let mut out = [0.0; 6];
        if tau > 0.0 && tau < alpha3 {
            for l in 0..6 {
                let base = f1[l].norm_sqr() / f2[l].re;
                out[l] = match l {
                    0 | 3 => base * tau,
                    1 | 4 => base,
                    _ => base / tau,
                };
            }
        } else if tau > lo2 && tau < hi2 {
            for l in 0..6 {
                let base = f2[l].norm_sqr() / f1[l].norm();
                out[l] = match l {
                    0 | 3 => base / tau.abs(),
                    1 | 4 => base * tau.abs(),
                    _ => base,
                };
            }
        } else {
            return Ok(None);
        }
        Ok(Some(out))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ImpliedLimits {
    pub limits: ALimits,
    /// |N(w_d)| for the selected critical point.
    pub double_root_residual: f64,
    /// Relative mismatch of a⁽⁴⁾(a⁽⁰⁾)²/e² against a³/H(β).
    pub consistency: f64,
}

pub fn limiting_f_from_tilde(z: C, t: [C; 3], a: &ALimits) -> ([C; 6], [C; 6]) {
    let ALimits { a0, a1, a3, a4 } = *a;
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let w = a.omega1();
    let (e03, e41) = (a0 - a3, a4 - a1);
    let f10 = e03 / (t0 * a0 - a3);
    let f11 = t0 * e41 / (t0 * a4 - a1);
    let f13 = t0 * e03 / (t0 * a0 - a3);
    let f14 = e41 / (t0 * a4 - a1);
    let f1 = [f10, f11, z * f10, f13, f14, z * f13];
    let den = (C::new(a0, 0.0) - t0 * t2 * (a3 * w[3] / w[0])) * (t0 * a0 - a3);
    let f20 = z * t0 * t2 * (a0 * e03) / den;
    let f23 = z * t0 * (a0 * e03) / den;
    let tail = t1 - (w[1] - 1.0) / w[4];
    let f21 = e41 / (t2 * (t0 * a4 - a1) * tail);
    let f24 = e41 / ((t0 * a4 - a1) * tail);
    (f1, [f20, f21, f20, f23, f24, f23])
}

/// Aberth–Ehrlich iteration for the monic cubic w³ + c₀w² + c₁w + c₂.
fn aberth(co: [C; 3], mut r: [C; 3]) -> Result<[C; 3]> {
    let p = |w: C| ((w + co[0]) * w + co[1]) * w + co[2];
    let dp = |w: C| (w * 3.0 + co[0] * 2.0) * w + co[1];
    for _ in 0..200 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let n = p(r[k]) / dp(r[k]);
            let s: C = (0..3).filter(|&j| j != k).map(|j| C::new(1.0, 0.0) / (r[k] - r[j])).sum();
            let step = n / (C::new(1.0, 0.0) - n * s);
            if step.is_finite() {
                r[k] -= step;
                worst = worst.max(step.norm() / (1.0 + r[k].norm()));
            }
        }
        if worst < 1e-15 {
            return Ok(r);
        }
    }
    let res = r.iter().map(|&w| p(w).norm()).fold(0.0, f64::max);
    if res < 1e-9 {
        Ok(r)
    } else {
        Err(Error::NonConvergence(format!("cubic root iteration stalled (residual {res:.2e})")))
    }
}

fn best_permutation(prev: &[C; 3], next: [C; 3]) -> [C; 3] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let cost = |pm: &[usize; 3]| (0..3).map(|k| (next[pm[k]] - prev[k]).norm()).sum::<f64>();
    let best = PERMS.iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).expect("six permutations");
    [next[best[0]], next[best[1]], next[best[2]]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aberth_finds_known_roots() {
        // (w − 1)(w + 2)(w − 3i)
        let r = [C::new(1.0, 0.0), C::new(-2.0, 0.0), C::new(0.0, 3.0)];
        let c0 = -(r[0] + r[1] + r[2]);
        let c1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let c2 = -(r[0] * r[1] * r[2]);
        let got = aberth([c0, c1, c2], [C::new(0.5, 0.5), C::new(-1.0, -0.5), C::new(0.3, 2.0)]).unwrap();
        let got = best_permutation(&r, got);
        for k in 0..3 {
            assert!((got[k] - r[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn omega_products() {
        let a = ALimits { a0: 0.25, a1: 0.004, a3: 0.23, a4: 0.024 };
        let w = a.omega1();
        assert_eq!(w[0], w[2]);
        assert_eq!(w[3], w[5]);
        assert!((w[1] * w[3] - a.a4 * a.a0 / ((a.a4 - a.a1) * (a.a0 - a.a3))).abs() < 1e-12);
    }
}
