//! Vector equilibrium for the interaction matrix [[1, −1/4], [−1/4, 1/4]] on
//! Δ₁ = [0, α³] and Δ₂ = [−b³, −a³], discretized on fixed Chebyshev nodes.

use num_complex::Complex64;

use crate::config_weights::StarConfig;
use crate::error::{Error, Result};
use crate::riemann_surface::{limiting_f_from_tilde, ALimits, SurfaceModel};

type C = Complex64;

pub const INTERACTION: [[f64; 2]; 2] = [[1.0, -0.25], [-0.25, 0.25]];

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(lo: f64, hi: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Domain("nodes and weights must be non-empty and of equal length".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Domain("weights must be finite and nonnegative".into()));
        }
        Ok(DiscreteMeasure { lo, hi, nodes, weights })
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// μ((−∞, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).filter(|(t, _)| **t <= x).map(|(_, w)| w).sum()
    }

    /// Smallest interval holding every node with weight above `thresh`.
    pub fn support(&self, thresh: f64) -> Option<(f64, f64)> {
        let s: Vec<f64> = self.nodes.iter().zip(&self.weights).filter(|(_, w)| **w > thresh).map(|(x, _)| *x).collect();
        Some((*s.first()?, *s.last()?))
    }
}

/// V^μ(z) = Σ w_i log(1/|z − x_i|).
pub fn potential(m: &DiscreteMeasure, z: C) -> Result<f64> {
    let mut v = 0.0;
    for (x, w) in m.nodes.iter().zip(&m.weights) {
        let d = (z - x).norm();
        if d == 0.0 {
            return Err(Error::Domain(format!("potential evaluated at the node {x}")));
        }
        v -= w * d.ln();
    }
    Ok(v)
}

pub fn chebyshev_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|k| {
            let x = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            lo + (hi - lo) * (x + 1.0) / 2.0
        })
        .collect()
}

/// Central differences inside, one-sided at the ends.
fn spacing(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| match i {
            0 => x[1] - x[0],
            _ if i == n - 1 => x[n - 1] - x[n - 2],
            _ => (x[i + 1] - x[i - 1]) / 2.0,
        })
        .collect()
}

/// Dense symmetric 2N×2N energy matrix.
struct Energy {
    n: usize,
    a: Vec<f64>,
}

impl Energy {
    fn new(x1: &[f64], x2: &[f64]) -> Self {
        let n = x1.len();
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        let xs: Vec<f64> = x1.iter().chain(x2).cloned().collect();
        let sp: Vec<f64> = spacing(x1).into_iter().chain(spacing(x2)).collect();
        for i in 0..m {
            for j in 0..m {
                let c = INTERACTION[i / n][j / n];
                let k = if i == j { -(sp[i] / 4.0).ln() } else { -(xs[i] - xs[j]).abs().ln() };
                a[i * m + j] = c * k;
            }
        }
        Energy { n, a }
    }

    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let m = self.dim();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * m..(i + 1) * m];
            *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
        }
    }

    /// Upper bound on the spectral radius from power iteration.
    fn spectral_bound(&self) -> f64 {
        let m = self.dim();
        let mut v: Vec<f64> = (0..m).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        let mut w = vec![0.0; m];
        let mut lam = 0.0;
        for _ in 0..300 {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            self.apply(&v, &mut w);
            let nl = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let done = (nl - lam).abs() < 1e-10 * nl;
            lam = nl;
            std::mem::swap(&mut v, &mut w);
            if done {
                break;
            }
        }
        lam * 1.02
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    pub mu1: DiscreteMeasure,
    pub mu2: DiscreteMeasure,
    pub omega1: f64,
    pub omega2: f64,
    /// W₁ = V^{μ₁} − V^{μ₂}/4 and W₂ = −V^{μ₁}/4 + V^{μ₂}/4 at the nodes.
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub iterations: usize,
    /// Energy of accepted iterates.
    pub energy_trace: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalResidual {
    /// max over support nodes of |W_j − ω_j| / |ω_j|.
    pub on_support: f64,
    /// max over off-support nodes of (ω_j − W_j)⁺ / |ω_j|.
    pub off_support: f64,
    pub support_nodes: usize,
}

pub const SUPPORT_THRESHOLD: f64 = 1e-14;

impl EquilibriumSolution {
    pub fn residuals(&self) -> [VariationalResidual; 2] {
        let one = |m: &DiscreteMeasure, w: &[f64], om: f64| {
            let mut on: f64 = 0.0;
            let mut off: f64 = 0.0;
            let mut cnt = 0;
            for (wt, wv) in m.weights.iter().zip(w) {
                if *wt > SUPPORT_THRESHOLD {
                    on = on.max((wv - om).abs());
                    cnt += 1;
                } else {
                    off = off.max(om - wv);
                }
            }
            VariationalResidual { on_support: on / om.abs(), off_support: off.max(0.0) / om.abs(), support_nodes: cnt }
        };
        [one(&self.mu1, &self.w1, self.omega1), one(&self.mu2, &self.w2, self.omega2)]
    }

    pub fn energy_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("interval,node,weight,W\n");
        for (id, m, w) in [(1, &self.mu1, &self.w1), (2, &self.mu2, &self.w2)] {
            for ((x, wt), wv) in m.nodes.iter().zip(&m.weights).zip(w) {
                s.push_str(&format!("{id},{x:.15e},{wt:.15e},{wv:.15e}\n"));
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Start {
    Uniform,
    /// Weights proportional to 1, 2, ..., N on each interval.
    Ramp,
}

pub fn solve_equilibrium(cfg: &StarConfig, n: usize) -> Result<EquilibriumSolution> {
    solve_equilibrium_from(cfg, n, Start::Uniform, 200_000, 1e-13)
}

/// FISTA with adaptive restart on the simplex product.
pub fn solve_equilibrium_from(cfg: &StarConfig, n: usize, start: Start, max_iter: usize, tol: f64) -> Result<EquilibriumSolution> {
    if n < 50 {
        return Err(Error::Domain(format!("need at least 50 nodes per interval, got {n}")));
    }
    let al = cfg.alpha3().to_f64();
    let (lo2, hi2) = (-cfg.b3().to_f64(), -cfg.a3().to_f64());
    let x1 = chebyshev_nodes(0.0, al, n);
    let x2 = chebyshev_nodes(lo2, hi2, n);
    let en = Energy::new(&x1, &x2);
    let m = en.dim();
    let lip = 2.0 * en.spectral_bound();
    let mut x: Vec<f64> = match start {
        Start::Uniform => vec![1.0 / n as f64; m],
        Start::Ramp => (0..m).map(|i| (i % n + 1) as f64 / (n * (n + 1) / 2) as f64).collect(),
    };
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
    let mut ax = vec![0.0; m];
    en.apply(&x, &mut ax);
    let mut e_old = dot(&x, &ax);
    let mut y = x.clone();
    let mut ay = ax.clone();
    let mut t = 1.0f64;
    let mut trace = vec![e_old];
    let mut anew = vec![0.0; m];
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let mut z: Vec<f64> = y.iter().zip(&ay).map(|(yi, gi)| yi - 2.0 * gi / lip).collect();
        project_simplex(&mut z[..n]);
        project_simplex(&mut z[n..]);
        en.apply(&z, &mut anew);
        let e_new = dot(&z, &anew);
        if e_new > e_old {
            y.copy_from_slice(&x);
            ay.copy_from_slice(&ax);
            t = 1.0;
            continue;
        }
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / tn;
        for i in 0..m {
            y[i] = z[i] + beta * (z[i] - x[i]);
            ay[i] = anew[i] + beta * (anew[i] - ax[i]);
        }
        let done = (e_old - e_new).abs() < tol * e_new.abs() && it > 100;
        x = z;
        ax.copy_from_slice(&anew);
        t = tn;
        e_old = e_new;
        trace.push(e_new);
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        let tail: Vec<String> = trace.iter().rev().take(5).map(|e| format!("{e:.12e}")).collect();
        return Err(Error::NonConvergence(format!("equilibrium solver hit {max_iter} iterations; last energies {}", tail.join(", "))));
    }
    let w1 = ax[..n].to_vec();
    let w2 = ax[n..].to_vec();
    let omega1 = w1.iter().cloned().fold(f64::INFINITY, f64::min);
    let omega2 = w2.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(EquilibriumSolution {
        mu1: DiscreteMeasure::new(0.0, al, x1, x[..n].to_vec())?,
        mu2: DiscreteMeasure::new(lo2, hi2, x2, x[n..].to_vec())?,
        omega1,
        omega2,
        w1,
        w2,
        iterations: it,
        energy_trace: trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResidual {
    pub z: C,
    /// V^{μ₁}(z) + ½ Σ log|F̃₁⁽ⁱ⁾(z)|
    pub first: f64,
    /// V^{μ₂}(z) + Σ log|F̃₂⁽ⁱ⁾(z)|
    pub second: f64,
}

pub fn check_potential_ratio_identity(surface: &SurfaceModel, a: &ALimits, sol: &EquilibriumSolution, zs: &[C]) -> Result<Vec<IdentityResidual>> {
    zs.iter()
        .map(|&z| {
            let (f1, f2) = limiting_f_from_tilde(z, surface.tilde(z)?, a);
            let s1: f64 = f1.iter().map(|f| f.norm().ln()).sum();
            let s2: f64 = f2.iter().map(|f| f.norm().ln()).sum();
            Ok(IdentityResidual {
                z,
                first: potential(&sol.mu1, z)? + 0.5 * s1,
                second: potential(&sol.mu2, z)? + s2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.5, 0.5, 0.5];
        project_simplex(&mut v);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let mut v = vec![2.0, 0.0, -1.0];
        project_simplex(&mut v);
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn point_mass_potential() {
        let m = DiscreteMeasure::new(0.0, 0.0, vec![0.0], vec![1.0]).unwrap();
        assert!((potential(&m, C::new(std::f64::consts::E, 0.0)).unwrap() + 1.0).abs() < 1e-15);
        assert!(potential(&m, C::new(0.0, 0.0)).is_err());
    }
}
