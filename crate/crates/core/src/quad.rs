//! Gauss–Jacobi rules in extended precision.
//!
//! Nodes start from an f64 Golub–Welsch eigen-solve and are polished by
//! Newton on the three-term recurrence at the working precision.

use nalgebra::DMatrix;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::hp::{fl, one, zero};

/// A rule `∫ f(x) w(x) dx ≈ Σ weights[i] f(nodes[i])`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(&Float) -> Float>(&self, mut f: F) -> Float {
        let prec = self.nodes.first().map_or(64, Float::prec);
        let mut acc = zero(prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(x) * w;
        }
        acc
    }

    /// Rule on [lo, hi] for the weight (x − lo)^gamma (hi − x)^delta.
    pub fn on_interval(
        n: usize,
        lo: &Float,
        hi: &Float,
        gamma: &Float,
        delta: &Float,
        prec: u32,
    ) -> Result<GaussRule> {
        let base = gauss_jacobi(n, delta, gamma, prec)?;
        let half = Float::with_val(prec, hi - lo) / 2u32;
        let expo = Float::with_val(prec, gamma + delta) + 1u32;
        let scale = Float::with_val(prec, (&half).pow(&expo));
        let nodes = base
            .nodes
            .iter()
            .map(|x| Float::with_val(prec, x + 1u32) * &half + lo)
            .collect();
        let weights = base.weights.iter().map(|w| Float::with_val(prec, w * &scale)).collect();
        Ok(GaussRule { nodes, weights })
    }
}

/// P_n^{(a,b)}(x) and P_{n-1}^{(a,b)}(x).
fn jacobi_pair(n: usize, a: &Float, b: &Float, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let ab = Float::with_val(prec, a + b);
    let mut p0 = one(prec);
    if n == 0 {
        return (p0, zero(prec));
    }
    let mut p1 = Float::with_val(prec, a - b) / 2u32
        + Float::with_val(prec, &ab + 2u32) * x / 2u32;
    for k in 2..=n {
        let kf = Float::with_val(prec, k);
        let two_k_ab = Float::with_val(prec, &kf * 2u32) + &ab;
        let c0 = Float::with_val(prec, &kf + &ab) * &kf * 2u32 * Float::with_val(prec, &two_k_ab - 2u32);
        let c1 = Float::with_val(prec, &two_k_ab - 1u32);
        let lin = Float::with_val(prec, &two_k_ab * Float::with_val(prec, &two_k_ab - 2u32)) * x
            + Float::with_val(prec, a.square_ref())
            - Float::with_val(prec, b.square_ref());
        let c2 = (Float::with_val(prec, &kf + a) - 1u32)
            * (Float::with_val(prec, &kf + b) - 1u32)
            * &two_k_ab
            * 2u32;
        let p2 = (c1 * lin * &p1 - c2 * &p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Derivative from (2n+a+b)(1−x²)P'_n = n[(a−b) − (2n+a+b)x]P_n + 2(n+a)(n+b)P_{n−1}.
fn jacobi_deriv(n: usize, a: &Float, b: &Float, x: &Float, pn: &Float, pn1: &Float) -> Float {
    let prec = x.prec();
    let nf = Float::with_val(prec, n);
    let s = Float::with_val(prec, &nf * 2u32) + a + b;
    let t1 = (Float::with_val(prec, a - b) - Float::with_val(prec, &s * x)) * &nf * pn;
    let t2 = Float::with_val(prec, &nf + a) * Float::with_val(prec, &nf + b) * pn1 * 2u32;
    let den = s * (one(prec) - Float::with_val(prec, x.square_ref()));
    (t1 + t2) / den
}

fn golub_welsch_f64(n: usize, a: f64, b: f64) -> Vec<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        m[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let sj = 2.0 * j + a + b;
            let num = 4.0 * j * (j + a) * (j + b) * (j + a + b);
            let den = sj * sj * (sj + 1.0) * (sj - 1.0);
            let off = (num / den).sqrt();
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    let mut x: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    x.sort_by(|p, q| p.total_cmp(q));
    x
}

/// Gauss–Jacobi rule on [−1,1] for (1−x)^a (1+x)^b, with a, b > −1.
pub fn gauss_jacobi(n: usize, a: &Float, b: &Float, prec: u32) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Config("quadrature rule needs at least one node".into()));
    }
    if *a <= -1 || *b <= -1 {
        return Err(Error::Domain("Jacobi exponents must exceed -1".into()));
    }
    let guesses = golub_welsch_f64(n, a.to_f64(), b.to_f64());
    let tol = Float::with_val(prec, Float::i_exp(1, 12 - prec as i32));
    let nf = Float::with_val(prec, n);
    let gamma = |v: Float| v.gamma();
    let c = gamma(Float::with_val(prec, &nf + a) + 1u32) * gamma(Float::with_val(prec, &nf + b) + 1u32)
        / gamma(Float::with_val(prec, &nf + a) + b + 1u32)
        / gamma(Float::with_val(prec, &nf + 1u32))
        * Float::with_val(prec, 2u32).pow(Float::with_val(prec, a + b) + 1u32);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for g in guesses {
        let mut x = fl(prec, g);
        let mut converged = false;
        for _ in 0..40 {
            let (pn, pn1) = jacobi_pair(n, a, b, &x);
            let d = jacobi_deriv(n, a, b, &x, &pn, &pn1);
            let dx = pn / d;
            x -= &dx;
            if Float::with_val(prec, dx.abs_ref()) < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!(
                "Gauss-Jacobi node near {g} did not converge (n={n})"
            )));
        }
        let (pn, pn1) = jacobi_pair(n, a, b, &x);
        let d = jacobi_deriv(n, a, b, &x, &pn, &pn1);
        let w = Float::with_val(prec, &c)
            / (one(prec) - Float::with_val(prec, x.square_ref()))
            / Float::with_val(prec, d.square_ref());
        nodes.push(x);
        weights.push(w);
    }
    Ok(GaussRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let p = 256;
        let r = gauss_jacobi(12, &zero(p), &zero(p), p).unwrap();
        for k in 0..24u32 {
            let v = r.integrate(|x| Float::with_val(p, x.pow(k)));
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((v.to_f64() - exact).abs() < 1e-60, "k={k}");
        }
    }

    #[test]
    fn jacobi_mass_matches_beta_function() {
        let p = 256;
        let a = fl(p, 0.5);
        let b = fl(p, 1.5);
        let r = GaussRule::on_interval(20, &zero(p), &one(p), &b, &a, p).unwrap();
        // ∫_0^1 x^{1.5} (1−x)^{0.5} dx = B(2.5, 1.5) = π/16
        let mass = r.integrate(|_| one(p));
        let exact = Float::with_val(p, rug::float::Constant::Pi) / 16u32;
        assert!(Float::with_val(p, mass - exact).abs().to_f64() < 1e-70);
    }
}
