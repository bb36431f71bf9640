//! Reduced monic polynomials P_n with Q_n(z) = z^r P_n(z³), their order-3
//! recurrence coefficients, real zeros and interlacing.

use rayon::prelude::*;
use rug::Float;

use crate::config_weights::{MomentCache, MomentKind};
use crate::error::{Error, Result};
use crate::hp::{dec, horner, horner2, horner_cx, one, solve_dense, zero, Cx};

#[derive(Clone, Debug)]
pub struct ReducedPoly {
    pub n: usize,
    pub r: usize,
    /// Ascending coefficients in τ; the last one is 1.
    pub coeffs: Vec<Float>,
}

impl ReducedPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, tau: &Float) -> Float {
        horner(&self.coeffs, tau)
    }

    pub fn eval_cx(&self, tau: &Cx) -> Cx {
        horner_cx(&self.coeffs, tau)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Float::to_f64).collect()
    }
}

/// A surviving orthogonality condition ∫₀^α u^{q+3j} P(u³) s₁ [g(u³)] du.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Condition {
    pub kind: MomentKind,
    pub q: u32,
}

/// Conditions on P_n after the rotation factors have removed the rest.
pub fn conditions(n: usize) -> Result<Vec<Condition>> {
    let r = (n % 3) as u32;
    let mut out = Vec::new();
    for k in 0..n.div_ceil(2) {
        if (k + n).is_multiple_of(3) {
            out.push(Condition { kind: MomentKind::Plain, q: k as u32 + r });
        }
    }
    for k in 0..n / 2 {
        if (k + n + 2).is_multiple_of(3) {
            out.push(Condition { kind: MomentKind::Cauchy, q: k as u32 + r + 2 });
        }
    }
    if out.len() != n / 3 {
        return Err(Error::Hypothesis(format!(
            "condition count {} differs from degree {} at n={n}",
            out.len(),
            n / 3
        )));
    }
    Ok(out)
}

/// ∫₀^α u^q P(u³) s₁ [g(u³)] du through the moment table.
pub fn pairing(mc: &MomentCache, coeffs: &[Float], kind: MomentKind, q: u32) -> Float {
    let mut acc = zero(mc.prec());
    for (j, c) in coeffs.iter().enumerate() {
        acc += Float::with_val(mc.prec(), c * &mc.star(kind, q + 3 * j as u32));
    }
    acc
}

pub fn compute_p(mc: &MomentCache, n: usize) -> Result<ReducedPoly> {
    let prec = mc.prec();
    let d = n / 3;
    let conds = conditions(n)?;
    if d == 0 {
        return Ok(ReducedPoly { n, r: n % 3, coeffs: vec![one(prec)] });
    }
    let mut a = Vec::with_capacity(d);
    let mut rhs = Vec::with_capacity(d);
    for c in &conds {
        a.push((0..d).map(|j| mc.star(c.kind, c.q + 3 * j as u32)).collect::<Vec<_>>());
        rhs.push(-mc.star(c.kind, c.q + 3 * d as u32));
    }
    let mut coeffs = solve_dense(a, rhs)
        .ok_or_else(|| Error::Singular(format!("moment system for P_{n} at {prec} bits")))?;
    coeffs.push(one(prec));
    Ok(ReducedPoly { n, r: n % 3, coeffs })
}

/// Residuals of every defining condition, relative to the pairing of τ^d alone.
pub fn orthogonality_residuals(mc: &MomentCache, p: &ReducedPoly) -> Result<Vec<Float>> {
    let d = p.degree() as u32;
    conditions(p.n)?
        .into_iter()
        .map(|c| {
            let v = pairing(mc, &p.coeffs, c.kind, c.q);
            let s = mc.star(c.kind, c.q + 3 * d);
            Ok(Float::with_val(mc.prec(), v / s).abs())
        })
        .collect()
}

/// Q_n(z) = z^r P_n(z³).
pub fn eval_q(p: &ReducedPoly, z: &Cx) -> Cx {
    let z3 = z.powi(3);
    &z.powi(p.r as u32) * &p.eval_cx(&z3)
}

pub fn compute_all(mc: &MomentCache, n_top: usize) -> Result<Vec<ReducedPoly>> {
    (0..=n_top).into_par_iter().map(|n| compute_p(mc, n)).collect()
}

#[derive(Clone, Debug)]
pub struct RecurrenceEntry {
    pub n: usize,
    /// Coefficient route.
    pub a: Float,
    /// Integral route.
    pub a_integral: Float,
    /// ‖LHS − P_{n+1} − a_n P_{n−2}‖∞ on coefficients.
    pub residual: Float,
    pub route_rel_diff: Float,
}

#[derive(Clone, Debug, Default)]
pub struct RecurrenceTable {
    pub entries: Vec<RecurrenceEntry>,
}

impl RecurrenceTable {
    pub fn get(&self, n: usize) -> Option<&RecurrenceEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    pub fn a_f64(&self, n: usize) -> Option<f64> {
        self.get(n).map(|e| e.a.to_f64())
    }

    /// (k, a_{6k+i}) for every stored index in the class.
    pub fn tail(&self, i: usize) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .filter(|e| e.n % 6 == i)
            .map(|e| (e.n / 6, e.a.to_f64()))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual.to_f64()).fold(0.0, f64::max)
    }

    pub fn max_route_diff(&self) -> f64 {
        self.entries.iter().map(|e| e.route_rel_diff.to_f64()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,a_n,residual\n");
        for e in &self.entries {
            s += &format!("{},{},{}\n", e.n, dec(&e.a, 30), dec(&e.residual, 6));
        }
        s
    }
}

/// a_n by coefficient matching and by the integral formula. Needs P_0..P_{n+1}.
pub fn compute_a(mc: &MomentCache, polys: &[ReducedPoly], n: usize) -> Result<RecurrenceEntry> {
    if n < 2 || n + 1 >= polys.len() {
        return Err(Error::Domain(format!("a_{n} needs P_(n-2) .. P_(n+1)")));
    }
    let prec = mc.prec();
    let (pn, pn1, low) = (&polys[n], &polys[n + 1], &polys[n - 2]);
    let mut lhs: Vec<Float> = pn.coeffs.clone();
    if n % 3 == 2 {
        lhs.insert(0, zero(prec));
    }
    let len = lhs.len().max(pn1.coeffs.len());
    let mut diff: Vec<Float> = (0..len)
        .map(|i| {
            let l = lhs.get(i).cloned().unwrap_or_else(|| zero(prec));
            let r = pn1.coeffs.get(i).cloned().unwrap_or_else(|| zero(prec));
            l - r
        })
        .collect();
    let lead = low.degree();
    let a = diff[lead].clone();
    for (i, c) in low.coeffs.iter().enumerate() {
        diff[i] -= Float::with_val(prec, &a * c);
    }
    let residual = diff
        .iter()
        .map(|x| Float::with_val(prec, x.abs_ref()))
        .fold(zero(prec), |m, x| if x > m { x } else { m });

    let m = (n / 2) as u32;
    let (kind, q_n, q_low) = if n.is_multiple_of(2) {
        (MomentKind::Plain, m + (n % 3) as u32, m - 1 + ((n - 2) % 3) as u32)
    } else {
        (MomentKind::Cauchy, m + (n % 3) as u32 + 2, m - 1 + ((n - 2) % 3) as u32 + 2)
    };
    let num = pairing(mc, &pn.coeffs, kind, q_n);
    let den = pairing(mc, &low.coeffs, kind, q_low);
    let a_integral = num / den;
    let route_rel_diff = Float::with_val(prec, &a_integral - &a).abs() / Float::with_val(prec, a.abs_ref());
    if a <= 0 {
        return Err(Error::Hypothesis(format!("a_{n} = {} is not positive", dec(&a, 12))));
    }
    Ok(RecurrenceEntry { n, a, a_integral, residual, route_rel_diff })
}

pub fn build_recurrence(mc: &MomentCache, polys: &[ReducedPoly], n_max: usize) -> Result<RecurrenceTable> {
    let entries = (2..=n_max)
        .into_par_iter()
        .map(|n| compute_a(mc, polys, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(RecurrenceTable { entries })
}

/// Real zeros of a real-rooted polynomial with all zeros above `start`, ascending.
///
/// Laguerre from the left converges monotonically to the smallest zero; after
/// deflation the next one follows. Every zero is re-polished on the original.
pub fn real_roots_from(coeffs: &[Float], start: &Float) -> Result<Vec<Float>> {
    let prec = start.prec();
    let deg = coeffs.len() - 1;
    let tol = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
    let floor = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let mut work: Vec<Float> = coeffs.to_vec();
    let mut roots = Vec::with_capacity(deg);
    for _ in 0..deg {
        let m = work.len() - 1;
        let mut x = start.clone();
        let mf = Float::with_val(prec, m);
        let mut done = false;
        let mut prev_step: Option<Float> = None;
        for _ in 0..500 {
            let (p, dp, ddp) = horner2(&work, &x);
            if p.is_zero() {
                done = true;
                break;
            }
            let step = if m == 1 {
                Float::with_val(prec, &p / &dp)
            } else {
                let g = Float::with_val(prec, &dp / &p);
                let h = Float::with_val(prec, g.square_ref()) - Float::with_val(prec, &ddp / &p);
                let disc = (Float::with_val(prec, &mf * &h) - Float::with_val(prec, g.square_ref()))
                    * Float::with_val(prec, &mf - 1u32);
                let sq = if disc < 0 { zero(prec) } else { disc.sqrt() };
                let den = if g >= 0 { g + sq } else { g - sq };
                if den.is_zero() {
                    return Err(Error::NonConvergence("Laguerre step degenerate".into()));
                }
                Float::with_val(prec, &mf / &den)
            };
            x -= &step;
            let size = Float::with_val(prec, step.abs_ref());
            let scale = one(prec) + Float::with_val(prec, x.abs_ref());
            if size <= Float::with_val(prec, &tol * &scale) {
                done = true;
                break;
            }
            // roundoff floor: the step stopped shrinking while already tiny
            if let Some(ps) = &prev_step {
                if size >= *ps && size <= Float::with_val(prec, &floor * &scale) {
                    done = true;
                    break;
                }
            }
            prev_step = Some(size);
        }
        if !done {
            return Err(Error::NonConvergence(format!("Laguerre iteration for a zero of a degree-{deg} polynomial")));
        }
        // synthetic division by (τ − x)
        let mut q = vec![zero(prec); m];
        let mut carry = zero(prec);
        for i in (1..=m).rev() {
            carry = Float::with_val(prec, &carry * &x) + &work[i];
            q[i - 1] = carry.clone();
        }
        work = q;
        roots.push(x);
    }
    for x in roots.iter_mut() {
        for _ in 0..8 {
            let (p, dp, _) = horner2(coeffs, x);
            if dp.is_zero() {
                break;
            }
            let step = p / dp;
            *x -= &step;
            if Float::with_val(prec, step.abs_ref()) <= Float::with_val(prec, &tol * (one(prec) + Float::with_val(prec, x.abs_ref()))) {
                break;
            }
        }
    }
    roots.sort_by(crate::hp::cmp);
    Ok(roots)
}

/// Zeros of P_n in τ, validated: simple, real, inside (0, α³), one sign change each.
pub fn roots(p: &ReducedPoly, alpha3: &Float) -> Result<Vec<Float>> {
    let prec = alpha3.prec();
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let xs = real_roots_from(&p.coeffs, &zero(prec))?;
    let gap = Float::with_val(prec, alpha3 * 1e-20);
    for (i, x) in xs.iter().enumerate() {
        if *x <= 0 || x >= alpha3 {
            return Err(Error::Hypothesis(format!("zero {} of P_{} outside (0, alpha^3)", dec(x, 20), p.n)));
        }
        if i > 0 && Float::with_val(prec, x - &xs[i - 1]) < gap {
            return Err(Error::Hypothesis(format!("P_{} has a multiple zero near {}", p.n, dec(x, 20))));
        }
    }
    // a sign change between consecutive midpoints confirms each zero
    let mut pts = vec![zero(prec)];
    for w in xs.windows(2) {
        pts.push(Float::with_val(prec, &w[0] + &w[1]) / 2u32);
    }
    pts.push(alpha3.clone());
    for (i, w) in pts.windows(2).enumerate() {
        let s0 = p.eval(&w[0]);
        let s1 = p.eval(&w[1]);
        if s0.is_sign_negative() == s1.is_sign_negative() {
            return Err(Error::Hypothesis(format!("no sign change of P_{} around zero {}", p.n, i + 1)));
        }
    }
    Ok(xs)
}

#[derive(Clone, Debug)]
pub struct InterlaceReport {
    pub n: usize,
    pub violations: Vec<String>,
}

impl InterlaceReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Strict alternation of two sorted sets whose sizes differ by at most one.
/// `first` forces which set owns the smallest element.
pub fn interlace(xs: &[f64], ys: &[f64], first: Option<bool>) -> Vec<String> {
    let mut v = Vec::new();
    if xs.len().abs_diff(ys.len()) > 1 {
        v.push(format!("sizes {} and {} cannot interlace", xs.len(), ys.len()));
        return v;
    }
    let mut merged: Vec<(f64, bool)> = xs.iter().map(|&x| (x, true)).chain(ys.iter().map(|&y| (y, false))).collect();
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    if let (Some(f), Some(&(x, owner))) = (first, merged.first()) {
        if owner != f {
            v.push(format!("smallest zero {x:.6e} belongs to the wrong polynomial"));
        }
    }
    for w in merged.windows(2) {
        if w[0].1 == w[1].1 || w[0].0 >= w[1].0 {
            v.push(format!("zeros {:.12e} and {:.12e} out of order", w[0].0, w[1].0));
        }
    }
    v
}

/// Interlacing of P_n and P_{n+1} zeros, compared as cube roots, with the directed order
/// (3k before 3k+1, 3k+1 before 3k+2, 3k+3 before 3k+2).
pub fn check_interlacing(n: usize, roots_n: &[Float], roots_n1: &[Float]) -> InterlaceReport {
    let cb = |v: &[Float]| v.iter().map(|x| x.to_f64().cbrt()).collect::<Vec<f64>>();
    let (xs, ys) = (cb(roots_n), cb(roots_n1));
    let first = Some(n % 3 != 2);
    let mut violations = interlace(&xs, &ys, first);
    let expect = if n % 3 == 2 { xs.len() + 1 } else { xs.len() };
    if ys.len() != expect {
        violations.push(format!("P_{} has {} zeros, expected {expect}", n + 1, ys.len()));
    }
    InterlaceReport { n, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config_weights::StarConfig;
    use crate::hp::fl;

    #[test]
    fn condition_counts() {
        for n in 0..200 {
            assert_eq!(conditions(n).unwrap().len(), n / 3);
        }
    }

    #[test]
    fn laguerre_on_known_roots() {
        let p = 200;
        // (x − 0.1)(x − 0.5)(x − 0.9)
        let c = [fl(p, -0.045), fl(p, 0.59), fl(p, -1.5), fl(p, 1.0)];
        let r = real_roots_from(&c, &zero(p)).unwrap();
        for (x, e) in r.iter().zip([0.1, 0.5, 0.9]) {
            assert!((x.to_f64() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn interlace_detects_order() {
        assert!(interlace(&[1.0, 3.0], &[2.0, 4.0], Some(true)).is_empty());
        assert!(!interlace(&[1.0, 3.0], &[2.0, 4.0], Some(false)).is_empty());
        assert!(!interlace(&[1.0, 2.0], &[3.0, 4.0], None).is_empty());
        assert!(interlace(&[], &[], None).is_empty());
    }

    #[test]
    fn low_order_polynomials() {
        let cfg = StarConfig::reference_r1(128, 48, 8);
        let mc = MomentCache::new(&cfg).unwrap();
        let ps = compute_all(&mc, 4).unwrap();
        for p in &ps[..3] {
            assert_eq!(p.coeffs.len(), 1);
        }
        assert!((ps[3].coeffs[0].to_f64() + 0.25).abs() < 1e-30);
    }
}
