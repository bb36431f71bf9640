//! Finite-n estimates of the limit objects: tails of a_n, ratio sequences of
//! both families, relation residuals, nth roots and norm sequences.

use num_complex::Complex64;

use crate::config_weights::StarConfig;
use crate::error::{Error, Result};
use crate::hp::Cx;
use crate::mop_core::{RecurrenceTable, ReducedPoly};
use crate::second_kind::SecondKindRecord;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub i: usize,
    pub value: f64,
    /// |a_{6k+i} − a_{6(k−1)+i}| at the last k.
    pub increment: f64,
    /// Whether the last three increments shrink in magnitude.
    pub tail_monotone: bool,
}

/// Mean of a_{6k+i} over k = k_tail−2..=k_tail.
pub fn estimate_limit_a(table: &RecurrenceTable, i: usize, k_tail: usize) -> Result<LimitEstimate> {
    if k_tail < 3 {
        return Err(Error::Domain("k_tail must be at least 3".into()));
    }
    let seq: Vec<f64> = (k_tail - 3..=k_tail)
        .map(|k| {
            table
                .a_f64(6 * k + i)
                .ok_or_else(|| Error::Domain(format!("recurrence table lacks n = {}", 6 * k + i)))
        })
        .collect::<Result<_>>()?;
    let last = &seq[1..];
    let value = last.iter().sum::<f64>() / 3.0;
    let inc: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let increment = inc[2];
    let t = &inc;
    Ok(LimitEstimate { i, value, increment, tail_monotone: t[0] >= t[1] && t[1] >= t[2] })
}

pub fn estimate_all(table: &RecurrenceTable, k_tail: usize) -> Result<[LimitEstimate; 6]> {
    let v: Vec<_> = (0..6).map(|i| estimate_limit_a(table, i, k_tail)).collect::<Result<_>>()?;
    Ok([v[0], v[1], v[2], v[3], v[4], v[5]])
}

pub fn values(est: &[LimitEstimate; 6]) -> [f64; 6] {
    est.map(|e| e.value)
}

/// Residuals of a⁽⁰⁾ = a⁽²⁾, a⁽³⁾ = a⁽⁵⁾ and a⁽⁰⁾ + a⁽¹⁾ = a⁽³⁾ + a⁽⁴⁾, divided by max â.
pub fn a_relations(a: &[f64; 6]) -> [f64; 3] {
    let m = a.iter().cloned().fold(0.0, f64::max);
    [
        (a[0] - a[2]).abs() / m,
        (a[3] - a[5]).abs() / m,
        (a[0] + a[1] - a[3] - a[4]).abs() / m,
    ]
}

/// Four real points outside both intervals and four complex points at distance
/// at least α³/2 from the cuts, all in the τ = z³ plane.
pub fn test_set(cfg: &StarConfig) -> Vec<C> {
    let al = cfg.alpha3().to_f64();
    let a = cfg.a3().to_f64();
    let b = cfg.b3().to_f64();
    vec![
        C::new(al + 1.0, 0.0),
        C::new(al + 2.0, 0.0),
        C::new(-a / 2.0, 0.0),
        C::new(-b - 1.0, 0.0),
        C::new(al / 2.0, al),
        C::new(-(a + b) / 2.0, al),
        C::new(al + 1.0, al),
        C::new(-a / 2.0, al),
    ]
}

pub fn eval_poly(p: &ReducedPoly, tau: C) -> C {
    let prec = p.coeffs.first().map_or(64, |c| c.prec());
    p.eval_cx(&Cx::from_c64(prec, tau)).to_c64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    First,
    Second,
}

/// (k, P_{6k+i+1}(z)/P_{6k+i}(z)) for k = 1.. while both indices are available.
pub fn ratio_sequence(polys: &[ReducedPoly], records: &[SecondKindRecord], family: Family, i: usize, z: C) -> Result<Vec<(usize, C)>> {
    let len = match family {
        Family::First => polys.len(),
        Family::Second => records.len(),
    };
    let mut out = Vec::new();
    let mut k = 1;
    while 6 * k + i + 1 < len {
        let n = 6 * k + i;
        let (num, den) = match family {
            Family::First => (eval_poly(&polys[n + 1], z), eval_poly(&polys[n], z)),
            Family::Second => (records[n + 1].eval_p2(z), records[n].eval_p2(z)),
        };
        if den.norm() == 0.0 || !num.is_finite() {
            return Err(Error::Domain(format!("ratio at n = {n} undefined at z = {z}")));
        }
        out.push((k, num / den));
        k += 1;
    }
    Ok(out)
}

/// Last value of each of the six ratio sequences and its last increment.
pub fn ratio_estimates(polys: &[ReducedPoly], records: &[SecondKindRecord], family: Family, z: C) -> Result<([C; 6], [f64; 6])> {
    let mut v = [C::new(0.0, 0.0); 6];
    let mut e = [0.0; 6];
    for i in 0..6 {
        let s = ratio_sequence(polys, records, family, i, z)?;
        if s.len() < 2 {
            return Err(Error::Domain("ratio sequences need at least two terms".into()));
        }
        v[i] = s[s.len() - 1].1;
        e[i] = (s[s.len() - 1].1 - s[s.len() - 2].1).norm();
    }
    Ok((v, e))
}

/// True when the last `m` successive deviations are non-increasing.
pub fn deviations_decreasing(seq: &[C], m: usize) -> bool {
    if seq.len() < m + 1 {
        return false;
    }
    let d: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    d[d.len() - m..].windows(2).all(|w| w[1] <= w[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationResidual {
    pub name: &'static str,
    pub z: C,
    pub value: f64,
}

fn rel(x: C, y: C) -> f64 {
    (x - y).norm() / x.norm().max(y.norm())
}

/// Residuals of the functional relations among the six limits of each family.
pub fn check_limit_relations(z: C, f1: &[C; 6], f2: &[C; 6], a: &[f64; 6]) -> Vec<RelationResidual> {
    let one = C::new(1.0, 0.0);
    let r = |name, value| RelationResidual { name, z, value };
    vec![
        r("F1_2 = z F1_0", rel(f1[2], z * f1[0])),
        r("F1_5 = z F1_3", rel(f1[5], z * f1[3])),
        r("F1_0 F1_1 = F1_3 F1_4", rel(f1[0] * f1[1], f1[3] * f1[4])),
        r("F1_1 F1_2 = F1_4 F1_5", rel(f1[1] * f1[2], f1[4] * f1[5])),
        r("F1_2 F1_3 = F1_5 F1_0", rel(f1[2] * f1[3], f1[5] * f1[0])),
        r("(1-F1_3)/(1-F1_0) = a3/a0", rel((one - f1[3]) / (one - f1[0]), C::new(a[3] / a[0], 0.0))),
        r("(1-F1_4)/(1-F1_1) = a4/a1", rel((one - f1[4]) / (one - f1[1]), C::new(a[4] / a[1], 0.0))),
        r("(z-F1_5)/(z-F1_2) = a5/a2", rel((z - f1[5]) / (z - f1[2]), C::new(a[5] / a[2], 0.0))),
        r("F2_0 = F2_2", rel(f2[0], f2[2])),
        r("F2_3 = F2_5", rel(f2[3], f2[5])),
        r("F2_0 F2_1 = F2_3 F2_4", rel(f2[0] * f2[1], f2[3] * f2[4])),
        r("F2_1 F2_2 = F2_4 F2_5", rel(f2[1] * f2[2], f2[4] * f2[5])),
        r("F2_2 F2_3 = F2_5 F2_0", rel(f2[2] * f2[3], f2[5] * f2[0])),
    ]
}

/// min_{i<j} |F_i − F_j| divided by the largest error proxy.
pub fn distinctness(f: &[C; 6], err: &[f64; 6]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..6 {
        for j in i + 1..6 {
            sep = sep.min((f[i] - f[j]).norm());
        }
    }
    sep / err.iter().cloned().fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NthRootSample {
    pub n: usize,
    /// |P_n(z)|^{1/⌊n/3⌋}
    pub p: f64,
    /// |P_{n,2}(z)|^{1/deg P_{n,2}}, absent when the degree is zero.
    pub p2: Option<f64>,
}

pub fn nth_root_samples(polys: &[ReducedPoly], records: &[SecondKindRecord], z: C) -> Vec<NthRootSample> {
    records
        .iter()
        .filter(|r| r.n >= 3 && r.n < polys.len())
        .map(|r| {
            let p = &polys[r.n];
            let d2 = r.p2_roots.len();
            NthRootSample {
                n: r.n,
                p: eval_poly(p, z).norm().powf(1.0 / p.degree() as f64),
                p2: (d2 > 0).then(|| r.eval_p2(z).norm().powf(1.0 / d2 as f64)),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSample {
    pub n: usize,
    /// (∫P_n² dν_n)^{1/4k}, k = ⌊n/6⌋.
    pub first: f64,
    /// (∫P_{n,2}² dν_{n,2})^{1/2k}.
    pub second: f64,
}

pub fn norm_sequences(records: &[SecondKindRecord]) -> Vec<NormSample> {
    records
        .iter()
        .filter(|r| r.n >= 6)
        .map(|r| {
            let k = (r.n / 6) as f64;
            NormSample { n: r.n, first: r.norm1().powf(1.0 / (4.0 * k)), second: r.norm2().powf(1.0 / (2.0 * k)) }
        })
        .collect()
}

/// (k, κ_{6k+i+1}/κ_{6k+i}) for both families.
pub fn kappa_ratios(records: &[SecondKindRecord], i: usize) -> Vec<(usize, f64, f64)> {
    (1..)
        .map(|k| 6 * k + i)
        .take_while(|&n| n + 1 < records.len())
        .map(|n| {
            (
                n / 6,
                records[n + 1].kappa_n() / records[n].kappa_n(),
                records[n + 1].kappa_n2() / records[n].kappa_n2(),
            )
        })
        .collect()
}

/// Kolmogorov distance between the empirical law of `sample` and a discrete measure.
pub fn kolmogorov_distance(sample: &[f64], nodes: &[f64], weights: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let emp = |x: f64, strict: bool| sample.iter().filter(|&&s| if strict { s < x } else { s <= x }).count() as f64 / n;
    let mu = |x: f64, strict: bool| {
        nodes.iter().zip(weights).filter(|(&t, _)| if strict { t < x } else { t <= x }).map(|(_, w)| w).sum::<f64>()
    };
    // both CDFs are step functions, so the supremum sits at a jump or just before it
    sample
        .iter()
        .chain(nodes)
        .map(|&x| (emp(x, false) - mu(x, false)).abs().max((emp(x, true) - mu(x, true)).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_vanish_on_consistent_data() {
        let z = C::new(2.0, 0.5);
        let f0 = C::new(1.3, 0.1);
        let f3 = C::new(0.7, -0.2);
        let f1 = C::new(0.4, 0.3);
        let f4 = f0 * f1 / f3;
        let f1s = [f0, f1, z * f0, f3, f4, z * f3];
        let res = check_limit_relations(z, &f1s, &f1s, &[1.0; 6]);
        for r in &res[..5] {
            assert!(r.value < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn kolmogorov_of_identical_laws() {
        let x = [0.1, 0.2, 0.3, 0.4];
        assert!((kolmogorov_distance(&x, &x, &[0.25; 4]) - 0.0).abs() < 1e-15);
        assert!((kolmogorov_distance(&[0.9], &[0.1], &[1.0]) - 1.0).abs() < 1e-15);
    }
}
