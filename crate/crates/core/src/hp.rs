//! Extended-precision scalars over `rug::Float`, plus the small complex type
//! the rest of the crate needs (the system MPFR build ships without MPC).

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

pub fn fl(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn zero(prec: u32) -> Float {
    Float::new(prec)
}

pub fn one(prec: u32) -> Float {
    Float::with_val(prec, 1)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Parses a decimal string directly at the target precision.
pub fn parse_decimal(prec: u32, s: &str) -> Option<Float> {
    let parsed = Float::parse(s.trim()).ok()?;
    let v = Float::with_val(prec, parsed);
    v.is_finite().then_some(v)
}

/// Fixed-format decimal rendering used in every artifact.
pub fn dec(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

pub fn dec_f64(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn cmp(a: &Float, b: &Float) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Horner evaluation of `c[0] + c[1] x + ...` at a real point.
pub fn horner(c: &[Float], x: &Float) -> Float {
    let prec = x.prec();
    let mut acc = zero(prec);
    for ci in c.iter().rev() {
        acc *= x;
        acc += ci;
    }
    acc
}

/// Value, first and second derivative in one pass.
pub fn horner2(c: &[Float], x: &Float) -> (Float, Float, Float) {
    let prec = x.prec();
    let mut p = zero(prec);
    let mut dp = zero(prec);
    let mut ddp = zero(prec);
    for ci in c.iter().rev() {
        ddp *= x;
        ddp += &dp;
        dp *= x;
        dp += &p;
        p *= x;
        p += ci;
    }
    ddp *= 2;
    (p, dp, ddp)
}

pub fn horner_cx(c: &[Float], z: &Cx) -> Cx {
    let prec = z.prec();
    let mut acc = Cx::zero(prec);
    for ci in c.iter().rev() {
        acc = &acc * z;
        acc.re += ci;
    }
    acc
}

/// Gaussian elimination with partial pivoting. Returns `None` on an exactly
/// singular pivot.
pub fn solve_dense(mut a: Vec<Vec<Float>>, mut b: Vec<Float>) -> Option<Vec<Float>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            let ai = Float::with_val(53, a[i][col].abs_ref());
            let aj = Float::with_val(53, a[j][col].abs_ref());
            cmp(&ai, &aj)
        })?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = Float::with_val(b[row].prec(), &a[row][col] / &a[col][col]);
            if f.is_zero() {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (d, s) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *d -= Float::with_val(f.prec(), &f * s);
            }
            let t = Float::with_val(f.prec(), &f * &b[col]);
            b[row] -= t;
        }
    }
    let mut x = vec![Float::new(b.first().map_or(64, Float::prec)); n];
    for row in (0..n).rev() {
        let mut s = b[row].clone();
        for k in row + 1..n {
            s -= Float::with_val(s.prec(), &a[row][k] * &x[k]);
        }
        x[row] = s / &a[row][row];
    }
    Some(x)
}

/// Complex number with `rug::Float` parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl Cx {
    pub fn new(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cx::new(zero(prec), zero(prec))
    }

    pub fn real(re: Float) -> Self {
        let im = zero(re.prec());
        Cx { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cx::new(fl(prec, re), fl(prec, im))
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Cx::from_f64(prec, z.re, z.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Cx {
        Cx::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn scale(&self, s: &Float) -> Cx {
        let p = self.prec();
        Cx::new(Float::with_val(p, &self.re * s), Float::with_val(p, &self.im * s))
    }

    pub fn add_real(&self, s: &Float) -> Cx {
        Cx::new(Float::with_val(self.prec(), &self.re + s), self.im.clone())
    }

    pub fn recip(&self) -> Cx {
        let d = self.norm_sqr();
        let p = self.prec();
        Cx::new(
            Float::with_val(p, &self.re / &d),
            Float::with_val(p, -&self.im) / &d,
        )
    }

    pub fn div(&self, o: &Cx) -> Cx {
        self * &o.recip()
    }

    pub fn powi(&self, k: u32) -> Cx {
        let mut acc = Cx::real(one(self.prec()));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Principal square root, branch cut on the negative real axis.
    pub fn sqrt(&self) -> Cx {
        let p = self.prec();
        let r = self.abs();
        if r.is_zero() {
            return Cx::zero(p);
        }
        if self.re >= 0 {
            let t = Float::with_val(p, &r + &self.re) / 2u32;
            let t = t.sqrt();
            let im = Float::with_val(p, &self.im / &t) / 2u32;
            Cx::new(t, im)
        } else {
            let t = Float::with_val(p, &r - &self.re) / 2u32;
            let t = t.sqrt();
            let re = Float::with_val(p, self.im.abs_ref()) / &t / 2u32;
            let im = if self.im.is_sign_negative() { -t } else { t };
            Cx::new(re, im)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for &Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx::new(
            Float::with_val(p, &self.re + &o.re),
            Float::with_val(p, &self.im + &o.im),
        )
    }
}

impl Sub for &Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx::new(
            Float::with_val(p, &self.re - &o.re),
            Float::with_val(p, &self.im - &o.im),
        )
    }
}

impl Mul for &Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        Cx::new(rr - ii, ri + ir)
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        let p = self.prec();
        Cx::new(Float::with_val(p, -&self.re), Float::with_val(p, -&self.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_branch() {
        let z = Cx::from_f64(128, -4.0, 0.0);
        let s = z.sqrt();
        assert!(s.re.to_f64().abs() < 1e-30);
        assert!((s.im.to_f64() - 2.0).abs() < 1e-30);
        let z = Cx::from_f64(128, -4.0, -0.0);
        assert!(z.sqrt().im.to_f64() < 0.0);
        let z = Cx::from_f64(128, 3.0, 4.0);
        let s = z.sqrt();
        assert!((s.re.to_f64() - 2.0).abs() < 1e-30 && (s.im.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn division_roundtrip() {
        let a = Cx::from_f64(200, 1.5, -2.0);
        let b = Cx::from_f64(200, 0.25, 3.0);
        let back = &a.div(&b) * &b;
        assert!((&back - &a).abs().to_f64() < 1e-55);
    }

    #[test]
    fn dense_solve() {
        let p = 200;
        let a = vec![
            vec![fl(p, 1e-30), fl(p, 1.0)],
            vec![fl(p, 1.0), fl(p, 1.0)],
        ];
        let x = solve_dense(a, vec![fl(p, 1.0), fl(p, 2.0)]).unwrap();
        assert!((x[0].to_f64() - 1.0).abs() < 1e-25);
        assert!((x[1].to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn horner_derivatives() {
        let p = 128;
        let c = [fl(p, -1.0), fl(p, 0.0), fl(p, 2.0), fl(p, 1.0)];
        let (v, d, dd) = horner2(&c, &fl(p, 2.0));
        assert_eq!(v.to_f64(), 15.0);
        assert_eq!(d.to_f64(), 20.0);
        assert_eq!(dd.to_f64(), 16.0);
    }
}
