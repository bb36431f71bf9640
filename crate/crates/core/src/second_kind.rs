//! Second-type functions Ψ_n in reduced form Φ_n, their zeros off the star,
//! the normalization constants K_n, K_{n,2} and the functions h_n.
//!
//! Ψ_n(z) = z^{e_r} Φ_n(z³) with e_r = 2, 0, 1 for r = 0, 1, 2, and
//! Φ_n(w) = 3 ∫₀^α u^e P_n(u³) s₁(u) / (u³ − w) du with e = 0 for r = 0, else 3.

use num_complex::Complex64;
use rug::{Assign, Float};

use crate::config_weights::MomentCache;
use crate::error::{Error, Result};
use crate::hp::{cmp, dec, one, zero, Cx};
use crate::mop_core::{interlace, ReducedPoly};

fn u_exponent(r: usize) -> u32 {
    if r == 0 {
        0
    } else {
        3
    }
}

/// Prefactor exponent of Ψ_n over Φ_n(z³).
pub fn psi_exponent(r: usize) -> u32 {
    [2, 0, 1][r]
}

/// Φ_n as a discrete Cauchy transform over the u-nodes.
#[derive(Clone, Debug)]
pub struct PhiKernel<'a> {
    pub n: usize,
    pub r: usize,
    mc: &'a MomentCache,
    /// 3 w_i u_i^e P_n(u_i³)
    pub c: Vec<Float>,
}

impl<'a> PhiKernel<'a> {
    pub fn new(mc: &'a MomentCache, p: &ReducedPoly) -> Self {
        let prec = mc.prec();
        let e = u_exponent(p.r);
        let nodes = &mc.nodes;
        let c = nodes
            .u
            .nodes
            .iter()
            .zip(&nodes.u.weights)
            .zip(&nodes.u3)
            .map(|((u, w), u3)| {
                let ue = Float::with_val(prec, rug::ops::Pow::pow(u, e));
                Float::with_val(prec, w * &ue) * p.eval(u3) * 3u32
            })
            .collect();
        PhiKernel { n: p.n, r: p.r, mc, c }
    }

    fn u3(&self) -> &[Float] {
        &self.mc.nodes.u3
    }

    fn check_off_cut(&self, w: &Cx) -> Result<()> {
        let alpha3 = self.mc.config().alpha3();
        let dist = if w.re < 0 {
            w.abs().to_f64()
        } else if w.re > alpha3 {
            Cx::new(Float::with_val(w.prec(), &w.re - &alpha3), w.im.clone()).abs().to_f64()
        } else {
            w.im.to_f64().abs()
        };
        if dist < 1e-12 {
            return Err(Error::Domain(format!("Phi_{} evaluated on [0, alpha^3]", self.n)));
        }
        Ok(())
    }

    pub fn eval(&self, w: &Cx) -> Result<Cx> {
        self.check_off_cut(w)?;
        let prec = self.mc.prec();
        let mut acc = Cx::zero(prec);
        for (ci, u3) in self.c.iter().zip(self.u3()) {
            let d = (-w).add_real(u3);
            acc = &acc + &d.recip().scale(ci);
        }
        Ok(acc)
    }

    /// Φ_n and Φ_n' at a real point off [0, α³].
    pub fn eval_real(&self, w: &Float) -> (Float, Float) {
        value_and_slope(&self.c, self.u3(), w)
    }

    pub fn eval_psi(&self, z: &Cx) -> Result<Cx> {
        let phi = self.eval(&z.powi(3))?;
        Ok(&z.powi(psi_exponent(self.r)) * &phi)
    }

    /// Ψ_n at a real point.
    pub fn eval_psi_real(&self, x: &Float) -> Float {
        let prec = self.mc.prec();
        let x3 = Float::with_val(prec, rug::ops::Pow::pow(x, 3u32));
        let (phi, _) = self.eval_real(&x3);
        Float::with_val(prec, rug::ops::Pow::pow(x, psi_exponent(self.r))) * phi
    }
}

fn value_and_slope(c: &[Float], u3: &[Float], w: &Float) -> (Float, Float) {
    let prec = w.prec();
    let mut v = zero(prec);
    let mut dv = zero(prec);
    let mut inv = zero(prec);
    let mut t = zero(prec);
    for (ci, u) in c.iter().zip(u3) {
        inv.assign(u - w);
        inv.recip_mut();
        t.assign(ci * &inv);
        dv += &t * &inv;
        v += &t;
    }
    (v, dv)
}

fn value_only(c: &[Float], u3: &[Float], w: &Float) -> Float {
    let prec = w.prec();
    let mut v = zero(prec);
    let mut t = zero(prec);
    for (ci, u) in c.iter().zip(u3) {
        t.assign(u - w);
        t.recip_mut();
        v += ci * &t;
    }
    v
}

/// Expected number of zeros of Φ_n on (−b³, −a³).
pub fn expected_p2_degree(n: usize) -> usize {
    n / 6 + usize::from(n % 6 == 4)
}

/// Safeguarded Newton inside a sign-change bracket.
fn refine_in_bracket<F: Fn(&Float) -> (Float, Float)>(f: F, lo: &Float, hi: &Float, tol_exp: i32) -> Result<Float> {
    let prec = lo.prec();
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let neg_at_lo = f(&lo).0.is_sign_negative();
    let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
    let tol = Float::with_val(prec, Float::i_exp(1, tol_exp));
    let floor = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let mut prev_step: Option<Float> = None;
    for _ in 0..400 {
        let (v, dv) = f(&x);
        if v.is_zero() {
            return Ok(x);
        }
        if v.is_sign_negative() == neg_at_lo {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let width = Float::with_val(prec, &hi - &lo);
        let scale = one(prec) + Float::with_val(prec, x.abs_ref());
        if width <= Float::with_val(prec, &tol * &scale) {
            return Ok(x);
        }
        let newton = if dv.is_zero() { None } else { Some(Float::with_val(prec, &x - v / dv)) };
        let next = match newton {
            Some(y) if y > lo && y < hi => y,
            _ => Float::with_val(prec, &lo + &hi) / 2u32,
        };
        let step = Float::with_val(prec, &next - &x).abs();
        x = next;
        if step <= Float::with_val(prec, &tol * &scale) {
            return Ok(x);
        }
        // roundoff floor: Newton stopped shrinking while already tiny
        if let Some(ps) = &prev_step {
            if step >= *ps && step <= Float::with_val(prec, &floor * &scale) {
                return Ok(x);
            }
        }
        prev_step = Some(step);
    }
    Err(Error::NonConvergence("root refinement in bracket".into()))
}

/// Sign of Φ_n in f64 when the rounding bound certifies it.
fn certified_sign(c: &[f64], u3: &[f64], w: f64) -> Option<bool> {
    let (mut v, mut m) = (0.0f64, 0.0f64);
    for (ci, u) in c.iter().zip(u3) {
        let t = ci / (u - w);
        v += t;
        m += t.abs();
    }
    let bound = 4.0 * c.len() as f64 * f64::EPSILON * m;
    (v.abs() > bound).then_some(v < 0.0)
}

fn zeros_on_grid(k: &PhiKernel, lo: &Float, hi: &Float, m: usize, scan_prec: u32) -> Result<Vec<Float>> {
    let prec = lo.prec();
    let c: Vec<Float> = k.c.iter().map(|x| Float::with_val(scan_prec, x)).collect();
    let u3: Vec<Float> = k.u3().iter().map(|x| Float::with_val(scan_prec, x)).collect();
    let c64: Vec<f64> = k.c.iter().map(Float::to_f64).collect();
    let u64: Vec<f64> = k.u3().iter().map(Float::to_f64).collect();
    let width = Float::with_val(scan_prec, hi - lo);
    let lo_s = Float::with_val(scan_prec, lo);
    let grid: Vec<Float> = (0..m)
        .map(|j| Float::with_val(scan_prec, &width * (j as f64 + 0.5)) / m as u32 + &lo_s)
        .collect();
    let negative: Vec<bool> = grid
        .iter()
        .map(|w| {
            certified_sign(&c64, &u64, w.to_f64())
                .unwrap_or_else(|| value_only(&c, &u3, w).is_sign_negative())
        })
        .collect();
    let mut out = Vec::new();
    for j in 0..m - 1 {
        if negative[j] == negative[j + 1] {
            continue;
        }
        let root = refine_in_bracket(|w| value_and_slope(&c, &u3, w), &grid[j], &grid[j + 1], -100)?;
        // quadratic convergence from the scan accuracy
        let mut x = Float::with_val(prec, root);
        let mut prev: Option<Float> = None;
        for _ in 0..8 {
            let (v, dv) = k.eval_real(&x);
            if dv.is_zero() || v.is_zero() {
                break;
            }
            let d = Float::with_val(prec, v / dv);
            x -= &d;
            let step = d.abs();
            if let Some(p) = &prev {
                if step > Float::with_val(prec, p / 4u32) {
                    break;
                }
            }
            prev = Some(step);
        }
        out.push(x);
    }
    Ok(out)
}

/// Zeros of Φ_n on (−b³, −a³), ascending; grid refined ×4 once on a count mismatch.
pub fn find_p2_roots(k: &PhiKernel) -> Result<Vec<Float>> {
    let cfg = k.mc.config();
    let prec = k.mc.prec();
    let lo = Float::with_val(prec, -cfg.b3());
    let hi = Float::with_val(prec, -cfg.a3());
    let expected = expected_p2_degree(k.n);
    let base = 64 * (k.n / 6 + 1);
    let mut found = 0;
    // Φ_n loses about n/2 decimal digits to cancellation; scan with that plus a margin
    let scan = (128 + 2 * k.n as u32).min(prec);
    for (m, sp) in [(base, scan), (4 * base, prec)] {
        let mut z = zeros_on_grid(k, &lo, &hi, m, sp)?;
        if z.len() == expected {
            z.sort_by(cmp);
            return Ok(z);
        }
        found = z.len();
    }
    Err(Error::NonConvergence(format!(
        "Phi_{} has {found} sign changes on (-b^3, -a^3), expected {expected}",
        k.n
    )))
}

/// Ascending coefficients of Π(τ − ζ_j).
pub fn poly_from_roots(roots: &[Float], prec: u32) -> Vec<Float> {
    let mut c = vec![one(prec)];
    for z in roots {
        let mut next = vec![zero(prec); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= Float::with_val(prec, ci * z);
        }
        c = next;
    }
    c
}

fn prod_f64(roots: &[f64], x: f64) -> f64 {
    roots.iter().map(|r| x - r).product()
}

fn prod_c64(roots: &[f64], z: Complex64) -> Complex64 {
    roots.iter().map(|r| z - r).product()
}

/// Per-n record of the second family.
#[derive(Clone, Debug)]
pub struct SecondKindRecord {
    pub n: usize,
    pub p2_roots: Vec<Float>,
    pub p2: Vec<Float>,
    pub k_n: Float,
    pub k_n2: f64,
    /// 3 w_i u_i^e P_n(u_i³)² / P_{n,2}(u_i³): the discrete ν_n with P_n² folded in.
    pub nu: Vec<f64>,
    u3: Vec<f64>,
}

impl SecondKindRecord {
    pub fn kappa_n(&self) -> f64 {
        self.k_n.to_f64()
    }

    pub fn kappa_n2(&self) -> f64 {
        self.k_n2 / self.k_n.to_f64()
    }

    pub fn roots_f64(&self) -> Vec<f64> {
        self.p2_roots.iter().map(Float::to_f64).collect()
    }

    pub fn eval_p2(&self, tau: Complex64) -> Complex64 {
        prod_c64(&self.roots_f64(), tau)
    }

    /// H_n(z) = h_n(z)/K_n².
    pub fn eval_big_h(&self, z: Complex64) -> Complex64 {
        let z3 = z * z * z;
        let pre = [z * z, z, z3][self.n % 3];
        let s: Complex64 = self.nu.iter().zip(&self.u3).map(|(d, u3)| d / (u3 - z3)).sum();
        pre * s
    }

    pub fn eval_h(&self, z: Complex64) -> Complex64 {
        let k = self.k_n.to_f64();
        self.eval_big_h(z) * k * k
    }

    /// ∫ P_n² dν_n = K_n^{−2}.
    pub fn norm1(&self) -> f64 {
        let k = self.k_n.to_f64();
        1.0 / (k * k)
    }

    /// ∫ P_{n,2}² dν_{n,2} = K_n² / K_{n,2}².
    pub fn norm2(&self) -> f64 {
        let k = self.k_n.to_f64();
        k * k / (self.k_n2 * self.k_n2)
    }
}

/// −z^{m}/√((z³ − α³) z³), the limit of h_{3k+r} with m = 2, 1, 3.
pub fn h_limit(r: usize, z: Complex64, alpha3: f64) -> Complex64 {
    let z3 = z * z * z;
    let pre = [z * z, z, z3][r];
    -pre / ((z3 - alpha3).sqrt() * z3.sqrt())
}

pub fn build_record(mc: &MomentCache, p: &ReducedPoly) -> Result<SecondKindRecord> {
    let prec = mc.prec();
    let kern = PhiKernel::new(mc, p);
    let p2_roots = find_p2_roots(&kern)?;
    let p2 = poly_from_roots(&p2_roots, prec);
    let nodes = &mc.nodes;
    let e = u_exponent(p.r);
    let mut nu_hp = Vec::with_capacity(nodes.u.len());
    for ((u, w), u3) in nodes.u.nodes.iter().zip(&nodes.u.weights).zip(&nodes.u3) {
        let pv = p.eval(u3);
        let p2v = crate::hp::horner(&p2, u3);
        let ue = Float::with_val(prec, rug::ops::Pow::pow(u, e));
        nu_hp.push(Float::with_val(prec, w * &ue) * Float::with_val(prec, pv.square_ref()) * 3u32 / p2v);
    }
    let total = nu_hp.iter().fold(zero(prec), |acc, x| acc + x);
    if !total.is_finite() || total <= 0 {
        return Err(Error::Hypothesis(format!("non-positive norm integral for P_{}", p.n)));
    }
    let k_n = Float::with_val(prec, total.recip_sqrt_ref());
    let nu: Vec<f64> = nu_hp.iter().map(Float::to_f64).collect();
    let u3: Vec<f64> = nodes.u3.iter().map(Float::to_f64).collect();
    let mut rec = SecondKindRecord { n: p.n, p2_roots, p2, k_n, k_n2: 0.0, nu, u3 };

    let roots2 = rec.roots_f64();
    let pc = p.coeffs_f64();
    let mut i2 = 0.0;
    for (t, w) in nodes.t.nodes.iter().zip(&nodes.t.weights) {
        let x = t.to_f64();
        let x3 = x * x * x;
        let big_h = rec.eval_big_h(Complex64::new(x, 0.0)).norm();
        let dr = [x.abs(), x3.abs(), x * x][p.r];
        let pn = horner_f64(&pc, x3).abs();
        let q2 = prod_f64(&roots2, x3);
        i2 += w.to_f64() * 3.0 * x * x * q2 * q2 * big_h / (dr * pn);
    }
    if !i2.is_finite() || i2 <= 0.0 {
        return Err(Error::Hypothesis(format!("non-positive second norm integral at n={}", p.n)));
    }
    rec.k_n2 = 1.0 / i2.sqrt();
    Ok(rec)
}

pub fn horner_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
}

/// max_j |∫ τ^j p_n dν_n| over j < deg P_n, relative to ∫ |τ^j p_n| dν_n.
pub fn nu_orthogonality(mc: &MomentCache, p: &ReducedPoly, rec: &SecondKindRecord) -> f64 {
    let prec = mc.prec();
    let nodes = &mc.nodes;
    let e = u_exponent(p.r);
    let mut worst: f64 = 0.0;
    for j in 0..p.degree() as u32 {
        let mut s = zero(prec);
        let mut m = zero(prec);
        for ((u, w), u3) in nodes.u.nodes.iter().zip(&nodes.u.weights).zip(&nodes.u3) {
            let ue = Float::with_val(prec, rug::ops::Pow::pow(u, e));
            let tj = Float::with_val(prec, rug::ops::Pow::pow(u3, j));
            let t = Float::with_val(prec, w * &ue) * tj * p.eval(u3) * 3u32 / crate::hp::horner(&rec.p2, u3);
            m += Float::with_val(prec, t.abs_ref());
            s += t;
        }
        worst = worst.max((s / m).to_f64().abs());
    }
    worst
}

/// max_j |∫ τ^j P_{n,2} dν_{n,2}| over j < deg P_{n,2}, relative to the absolute integral.
pub fn nu2_orthogonality(mc: &MomentCache, p: &ReducedPoly, rec: &SecondKindRecord) -> f64 {
    let nodes = &mc.nodes;
    let roots2 = rec.roots_f64();
    let pc = p.coeffs_f64();
    let mut worst: f64 = 0.0;
    for j in 0..roots2.len() as i32 {
        let (mut s, mut m) = (0.0, 0.0);
        for (t, w) in nodes.t.nodes.iter().zip(&nodes.t.weights) {
            let x = t.to_f64();
            let x3 = x * x * x;
            let big_h = rec.eval_big_h(Complex64::new(x, 0.0)).norm();
            let dr = [x.abs(), x3.abs(), x * x][p.r];
            let v = w.to_f64() * 3.0 * x * x * x3.powi(j) * prod_f64(&roots2, x3) * big_h
                / (dr * horner_f64(&pc, x3).abs());
            s += v;
            m += v.abs();
        }
        worst = worst.max((s / m).abs());
    }
    worst
}

/// Residuals of ∫_{−b}^{−a} x^ν Ψ_n(x) s₂(x) dx = 0 for ν < ⌊n/2⌋ with ν + n + 2 ≡ 0 (mod 3),
/// each relative to ∫ |x^ν Ψ_n(x)| s₂(x) dx.
pub fn psi_orthogonality(k: &PhiKernel) -> Vec<(u32, f64)> {
    let prec = k.mc.prec();
    let nodes = &k.mc.nodes;
    let psi: Vec<Float> = nodes.t.nodes.iter().map(|x| k.eval_psi_real(x)).collect();
    let mut out = Vec::new();
    for nu in 0..(k.n / 2) as u32 {
        if !(nu as usize + k.n + 2).is_multiple_of(3) {
            continue;
        }
        let mut s = zero(prec);
        let mut m = zero(prec);
        for ((x, w), ps) in nodes.t.nodes.iter().zip(&nodes.t.weights).zip(&psi) {
            let t = Float::with_val(prec, rug::ops::Pow::pow(x, nu)) * w * ps;
            m += Float::with_val(prec, t.abs_ref());
            s += t;
        }
        out.push((nu, (s / m).to_f64().abs()));
    }
    out
}

/// Expected sign of Ψ_n / Q_{n,2} on the negative axis.
pub fn expected_sign(n: usize) -> i32 {
    let k = n / 3;
    let parity = if n % 3 == 2 { k + 1 } else { k };
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of Ψ_n(x)/P_{n,2}(x³) at `count` interior points of (−b, −a), avoiding zeros.
pub fn sign_samples(k: &PhiKernel, rec: &SecondKindRecord, count: usize) -> Vec<(f64, i32)> {
    let cfg = k.mc.config();
    let prec = k.mc.prec();
    let (a, b) = (cfg.a.to_f64(), cfg.b.to_f64());
    (0..count)
        .map(|j| {
            let x = -b + (b - a) * (j as f64 + 0.5) / count as f64;
            let xf = Float::with_val(prec, x);
            let psi = k.eval_psi_real(&xf);
            let x3 = Float::with_val(prec, rug::ops::Pow::pow(&xf, 3u32));
            let q2 = crate::hp::horner(&rec.p2, &x3);
            let pos = psi.is_sign_positive() == q2.is_sign_positive();
            (x, if pos { 1 } else { -1 })
        })
        .collect()
}

pub fn check_root_interlacing(prev: &SecondKindRecord, next: &SecondKindRecord) -> Vec<String> {
    interlace(&prev.roots_f64(), &next.roots_f64(), None)
}

pub fn to_csv(records: &[SecondKindRecord]) -> String {
    let mut s = String::from("n,deg_p2,roots,K_n,K_n2\n");
    for r in records {
        let roots: Vec<String> = r.p2_roots.iter().map(|x| dec(x, 25)).collect();
        s += &format!(
            "{},{},\"{}\",{},{}\n",
            r.n,
            r.p2_roots.len(),
            roots.join(";"),
            dec(&r.k_n, 25),
            crate::hp::dec_f64(r.k_n2)
        );
    }
    s
}
