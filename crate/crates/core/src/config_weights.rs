//! Problem configuration, the weights s₁, s₂, the Cauchy transform g and the
//! memoized moment service.
//!
//! Every reduced moment is an integral over u ∈ [0, α] after the substitution
//! τ = u³, so the only rules needed are a Gauss–Jacobi rule for s₁ on [0, α]
//! and one for s₂ on [−b, −a].

use std::collections::HashMap;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use rug::ops::Pow;
use rug::Float;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hp::{dec, parse_decimal, zero, Cx};
use crate::quad::GaussRule;

/// Generalized Jacobi density `scale · (x − lo)^gamma (hi − x)^delta`.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub gamma: Float,
    pub delta: Float,
    pub scale: Float,
}

impl WeightSpec {
    pub fn uniform(prec: u32) -> Self {
        WeightSpec {
            gamma: zero(prec),
            delta: zero(prec),
            scale: Float::with_val(prec, 1),
        }
    }

    fn eval(&self, x: &Float, lo: &Float, hi: &Float) -> Float {
        let p = x.prec();
        let l = Float::with_val(p, x - lo).pow(&self.gamma);
        let r = Float::with_val(p, hi - x).pow(&self.delta);
        l * r * &self.scale
    }
}

#[derive(Clone, Debug)]
pub struct StarConfig {
    pub alpha: Float,
    pub a: Float,
    pub b: Float,
    pub s1: WeightSpec,
    pub s2: WeightSpec,
    pub precision_bits: u32,
    pub quad_points: usize,
    pub n_max: usize,
}

fn lookup<'a>(v: &'a Value, path: &str) -> Result<&'a Value> {
    let mut cur = v;
    for part in path.split('.') {
        cur = cur.get(part).ok_or_else(|| Error::MissingKey(path.to_string()))?;
    }
    Ok(cur)
}

fn real_field(v: &Value, path: &str, prec: u32) -> Result<Float> {
    let text = match lookup(v, path)? {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        _ => {
            return Err(Error::Config(format!(
                "`{path}` must be a decimal string"
            )))
        }
    };
    parse_decimal(prec, &text)
        .ok_or_else(|| Error::Config(format!("`{path}` is not a decimal number: {text:?}")))
}

fn int_field(v: &Value, path: &str) -> Result<u64> {
    match lookup(v, path)? {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse::<u64>().ok(),
        _ => None,
    }
    .ok_or_else(|| Error::Config(format!("`{path}` must be a non-negative integer")))
}

fn weight_field(v: &Value, name: &str, prec: u32) -> Result<WeightSpec> {
    lookup(v, name)?;
    let gamma = real_field(v, &format!("{name}.gamma"), prec)?;
    let delta = real_field(v, &format!("{name}.delta"), prec)?;
    let scale = match lookup(v, &format!("{name}.scale")) {
        Ok(_) => real_field(v, &format!("{name}.scale"), prec)?,
        Err(_) => Float::with_val(prec, 1),
    };
    Ok(WeightSpec { gamma, delta, scale })
}

fn json_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))
}

fn toml_value(text: &str) -> Result<Value> {
    let t: toml::Table = toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
    serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))
}

impl StarConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_value(&Self::value_from_path(path)?)
    }

    /// Raw key tree of a JSON or TOML file, chosen by extension (JSON first otherwise).
    pub fn value_from_path(path: &Path) -> Result<Value> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml_value(&text),
            Some("json") => json_value(&text),
            _ => json_value(&text).or_else(|_| toml_value(&text)),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_value(&json_value(text)?)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_value(&toml_value(text)?)
    }

    /// Same problem with a different target precision.
    pub fn with_precision(&self, precision_bits: u32) -> Self {
        let p = working_prec(precision_bits, self.n_max);
        let f = |x: &Float| Float::with_val(p, x);
        let w = |s: &WeightSpec| WeightSpec { gamma: f(&s.gamma), delta: f(&s.delta), scale: f(&s.scale) };
        StarConfig {
            alpha: f(&self.alpha),
            a: f(&self.a),
            b: f(&self.b),
            s1: w(&self.s1),
            s2: w(&self.s2),
            precision_bits,
            ..*self
        }
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let precision_bits = int_field(v, "precision_bits")? as u32;
        let quad_points = int_field(v, "quad_points")? as usize;
        let n_max = int_field(v, "n_max")? as usize;
        let prec = working_prec(precision_bits.max(64), n_max);
        let cfg = StarConfig {
            alpha: real_field(v, "alpha", prec)?,
            a: real_field(v, "a", prec)?,
            b: real_field(v, "b", prec)?,
            s1: weight_field(v, "s1", prec)?,
            s2: weight_field(v, "s2", prec)?,
            precision_bits,
            quad_points,
            n_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Constant weights on the given geometry.
    pub fn uniform(alpha: Float, a: Float, b: Float, precision_bits: u32, quad_points: usize, n_max: usize) -> Result<Self> {
        let prec = working_prec(precision_bits, n_max);
        let cfg = StarConfig {
            alpha: Float::with_val(prec, alpha),
            a: Float::with_val(prec, a),
            b: Float::with_val(prec, b),
            s1: WeightSpec::uniform(prec),
            s2: WeightSpec::uniform(prec),
            precision_bits,
            quad_points,
            n_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// α = 1, a = 1, b = 2, s₁ ≡ s₂ ≡ 1.
    pub fn reference_r1(precision_bits: u32, quad_points: usize, n_max: usize) -> Self {
        let p = working_prec(precision_bits, n_max);
        Self::uniform(Float::with_val(p, 1), Float::with_val(p, 1), Float::with_val(p, 2), precision_bits, quad_points, n_max)
            .expect("reference configuration is valid")
    }

    /// α = 1, a = 1, b = ∛2, so that λ = μ.
    pub fn reference_r0(precision_bits: u32, quad_points: usize, n_max: usize) -> Self {
        let p = working_prec(precision_bits, n_max);
        let b = Float::with_val(p, 2).cbrt();
        Self::uniform(Float::with_val(p, 1), Float::with_val(p, 1), b, precision_bits, quad_points, n_max)
            .expect("reference configuration is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::Config("precision_bits must be at least 64".into()));
        }
        if self.quad_points < 32 {
            return Err(Error::Config("quad_points must be at least 32".into()));
        }
        if self.alpha <= 0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.a <= 0 {
            return Err(Error::Config("a must be positive".into()));
        }
        if self.b <= self.a {
            return Err(Error::Config("intervals out of order: need 0 < a < b".into()));
        }
        for (name, w) in [("s1", &self.s1), ("s2", &self.s2)] {
            if w.gamma < 0 || w.delta < 0 {
                return Err(Error::Config(format!("{name} exponents must be non-negative")));
            }
            if w.scale < 0 {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
            if w.scale.is_zero() {
                return Err(Error::Config(format!("{name} vanishes identically")));
            }
        }
        Ok(())
    }

    /// Precision used for every extended-precision computation.
    pub fn prec(&self) -> u32 {
        working_prec(self.precision_bits, self.n_max)
    }

    pub fn alpha3(&self) -> Float {
        Float::with_val(self.prec(), (&self.alpha).pow(3u32))
    }

    pub fn a3(&self) -> Float {
        Float::with_val(self.prec(), (&self.a).pow(3u32))
    }

    pub fn b3(&self) -> Float {
        Float::with_val(self.prec(), (&self.b).pow(3u32))
    }

    /// s₁(x) = x^γ₁ (α − x)^δ₁ · scale on (0, α).
    pub fn eval_s1(&self, x: &Float) -> Result<Float> {
        if *x <= 0 || *x >= self.alpha {
            return Err(Error::Domain(format!("s1 evaluated outside (0, alpha): {}", x.to_f64())));
        }
        Ok(self.s1.eval(x, &zero(self.prec()), &self.alpha))
    }

    /// s₂(t) = (t + b)^γ₂ (−a − t)^δ₂ · scale on (−b, −a).
    pub fn eval_s2(&self, t: &Float) -> Result<Float> {
        let lo = Float::with_val(self.prec(), -&self.b);
        let hi = Float::with_val(self.prec(), -&self.a);
        if *t <= lo || *t >= hi {
            return Err(Error::Domain(format!("s2 evaluated outside (-b, -a): {}", t.to_f64())));
        }
        Ok(self.s2.eval(t, &lo, &hi))
    }

    pub fn echo(&self) -> Value {
        let d = |x: &Float| dec(x, 40);
        serde_json::json!({
            "alpha": d(&self.alpha),
            "a": d(&self.a),
            "b": d(&self.b),
            "s1": {"gamma": d(&self.s1.gamma), "delta": d(&self.s1.delta), "scale": d(&self.s1.scale)},
            "s2": {"gamma": d(&self.s2.gamma), "delta": d(&self.s2.delta), "scale": d(&self.s2.scale)},
            "precision_bits": self.precision_bits,
            "quad_points": self.quad_points,
            "n_max": self.n_max,
        })
    }
}

/// Target bits plus guard bits that absorb the growth of the moment systems.
pub fn working_prec(precision_bits: u32, n_max: usize) -> u32 {
    precision_bits + 2 * n_max as u32 + 32
}

/// Node tables shared by every integral in the crate.
#[derive(Debug)]
pub struct NodeTables {
    pub prec: u32,
    /// Rule on [0, α] carrying s₁.
    pub u: GaussRule,
    pub u3: Vec<Float>,
    /// g(u_i³).
    pub g_u3: Vec<Float>,
    /// Rule on [−b, −a] carrying s₂.
    pub t: GaussRule,
    pub t3: Vec<Float>,
}

impl NodeTables {
    pub fn build(cfg: &StarConfig, nu: usize, nt: usize) -> Result<Self> {
        let prec = cfg.prec();
        let u = GaussRule::on_interval(nu, &zero(prec), &cfg.alpha, &cfg.s1.gamma, &cfg.s1.delta, prec)?;
        let u = scaled(u, &cfg.s1.scale);
        let lo = Float::with_val(prec, -&cfg.b);
        let hi = Float::with_val(prec, -&cfg.a);
        let t = GaussRule::on_interval(nt, &lo, &hi, &cfg.s2.gamma, &cfg.s2.delta, prec)?;
        let t = scaled(t, &cfg.s2.scale);
        let cube = |x: &Float| Float::with_val(prec, x.pow(3u32));
        let u3: Vec<Float> = u.nodes.iter().map(cube).collect();
        let t3: Vec<Float> = t.nodes.iter().map(cube).collect();
        let g_u3 = u3
            .iter()
            .map(|w| {
                let mut acc = zero(prec);
                for (tj, wj) in t3.iter().zip(&t.weights) {
                    acc += Float::with_val(prec, wj / Float::with_val(prec, w - tj));
                }
                acc
            })
            .collect();
        Ok(NodeTables { prec, u, u3, g_u3, t, t3 })
    }

    /// g(w) = ∫_{−b}^{−a} s₂(t)/(w − t³) dt.
    pub fn g(&self, w: &Cx) -> Cx {
        let mut acc = Cx::zero(self.prec);
        for (tj, wj) in self.t3.iter().zip(&self.t.weights) {
            let d = w.add_real(&Float::with_val(self.prec, -tj));
            acc = &acc + &d.recip().scale(wj);
        }
        acc
    }
}

fn scaled(mut r: GaussRule, s: &Float) -> GaussRule {
    if *s != 1 {
        for w in &mut r.weights {
            *w *= s;
        }
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MomentKind {
    /// ∫₀^α u^p s₁(u) du
    Plain,
    /// ∫₀^α u^p s₁(u) g(u³) du
    Cauchy,
}

/// Reduced weights on [0, α³].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightId {
    /// s₁(∛τ) τ^{−2/3}
    A,
    /// s₁(∛τ)
    B,
    /// s₁(∛τ) τ^{2/3}
    C,
    /// A with the extra factor ∛τ f(∛τ) = τ g(τ)
    Af,
    Bf,
    Cf,
}

impl WeightId {
    /// ∫₀^{α³} τ^k w(τ) dτ = 3 ∫₀^α u^p s₁(u) [g(u³)] du.
    fn reduce(self, k: u32) -> (MomentKind, u32) {
        match self {
            WeightId::A => (MomentKind::Plain, 3 * k),
            WeightId::B => (MomentKind::Plain, 3 * k + 2),
            WeightId::C => (MomentKind::Plain, 3 * k + 4),
            WeightId::Af => (MomentKind::Cauchy, 3 * k + 3),
            WeightId::Bf => (MomentKind::Cauchy, 3 * k + 5),
            WeightId::Cf => (MomentKind::Cauchy, 3 * k + 7),
        }
    }
}

/// Memoized moments; concurrent reads, serialized inserts.
#[derive(Debug)]
pub struct MomentCache {
    cfg: StarConfig,
    pub nodes: NodeTables,
    coarse: OnceLock<NodeTables>,
    cache: RwLock<HashMap<(MomentKind, u32), Float>>,
}

impl MomentCache {
    pub fn new(cfg: &StarConfig) -> Result<Self> {
        let (nu, nt) = Self::sizes(cfg);
        Ok(MomentCache {
            cfg: cfg.clone(),
            nodes: NodeTables::build(cfg, nu, nt)?,
            coarse: OnceLock::new(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    fn sizes(cfg: &StarConfig) -> (usize, usize) {
        let q = cfg.quad_points;
        (q + (3 * cfg.n_max).div_ceil(2) + 8, q + cfg.n_max / 2 + 8)
    }

    pub fn config(&self) -> &StarConfig {
        &self.cfg
    }

    pub fn prec(&self) -> u32 {
        self.nodes.prec
    }

    fn star_on(tables: &NodeTables, kind: MomentKind, p: u32) -> Float {
        let prec = tables.prec;
        let mut acc = zero(prec);
        for (i, (x, w)) in tables.u.nodes.iter().zip(&tables.u.weights).enumerate() {
            let mut term = Float::with_val(prec, x.pow(p)) * w;
            if kind == MomentKind::Cauchy {
                term *= &tables.g_u3[i];
            }
            acc += term;
        }
        acc
    }

    /// ∫₀^α u^p s₁(u) du or ∫₀^α u^p s₁(u) g(u³) du.
    pub fn star(&self, kind: MomentKind, p: u32) -> Float {
        if let Some(v) = self.cache.read().expect("moment cache poisoned").get(&(kind, p)) {
            return v.clone();
        }
        let v = Self::star_on(&self.nodes, kind, p);
        self.cache
            .write()
            .expect("moment cache poisoned")
            .entry((kind, p))
            .or_insert(v)
            .clone()
    }

    pub fn moment(&self, id: WeightId, k: u32) -> Float {
        let (kind, p) = id.reduce(k);
        self.star(kind, p) * 3u32
    }

    /// Moment together with the change against a rule with 3/4 of the nodes.
    pub fn moment_with_error(&self, id: WeightId, k: u32) -> Result<(Float, Float)> {
        let coarse = match self.coarse.get() {
            Some(c) => c,
            None => {
                let (nu, nt) = Self::sizes(&self.cfg);
                let built = NodeTables::build(&self.cfg, (3 * nu).div_ceil(4), (3 * nt).div_ceil(4))?;
                self.coarse.get_or_init(|| built)
            }
        };
        let (kind, p) = id.reduce(k);
        let fine = self.moment(id, k);
        let rough = Self::star_on(coarse, kind, p) * 3u32;
        let err = Float::with_val(self.prec(), &fine - &rough).abs();
        Ok((fine, err))
    }

    /// g(w) for w off [−b³, −a³].
    pub fn eval_g(&self, w: &Cx) -> Result<Cx> {
        let prec = self.prec();
        let lo = Float::with_val(prec, -self.cfg.b3());
        let hi = Float::with_val(prec, -self.cfg.a3());
        let dist = if w.re < lo {
            Cx::new(Float::with_val(prec, &w.re - &lo), w.im.clone()).abs()
        } else if w.re > hi {
            Cx::new(Float::with_val(prec, &w.re - &hi), w.im.clone()).abs()
        } else {
            Float::with_val(prec, w.im.abs_ref())
        };
        if dist < 1e-12 {
            return Err(Error::Domain("g evaluated on its cut [-b^3, -a^3]".into()));
        }
        Ok(self.nodes.g(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::fl;

    #[test]
    fn s1_examples() {
        let mut c = StarConfig::reference_r1(128, 32, 6);
        let p = c.prec();
        assert_eq!(c.eval_s1(&fl(p, 0.5)).unwrap().to_f64(), 1.0);
        c.s1.gamma = fl(p, 0.5);
        assert!((c.eval_s1(&fl(p, 0.25)).unwrap().to_f64() - 0.5).abs() < 1e-30);
        c.s1.gamma = fl(p, 0.0);
        c.s1.delta = fl(p, 1.0);
        assert!((c.eval_s1(&fl(p, 0.75)).unwrap().to_f64() - 0.25).abs() < 1e-30);
        assert!(c.eval_s1(&fl(p, 1.5)).is_err());
    }
}
