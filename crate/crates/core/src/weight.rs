//! One- and two-dimensional weights with exact integral primitives.
//!
//! Weights form a closed family so that every integral used by the norms and
//! weight-class constants has a closed form:
//!
//! * `V(r)  = ∫₀^r v`
//! * `T_p(r) = ∫_r^∞ v(x) x^{-p} dx` (may be `+∞`, reported as `f64::INFINITY`)
//! * `ṽ(σ)  = T_1(σ) = ∫_σ^∞ v(x)/x dx`
//! * `Ṽ(x)  = ∫₀^x ṽ = V(x) + x ṽ(x)`

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, GridFunction2D};

#[derive(Debug, Clone, PartialEq)]
pub enum Weight1D {
    /// `c · x^alpha`, `alpha > -1`.
    Power {
        c: f64,
        alpha: f64,
    },
    /// `c · χ_[0,a]`.
    Indicator {
        a: f64,
        c: f64,
    },
    Step(GridFunction1D),
}

/// `∫_a^b x^{-p} dx` for `0 ≤ a ≤ b`; `+∞` when the singularity at zero is
/// not integrable.
fn inverse_power_integral(a: f64, b: f64, p: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a == 0.0 && p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 1.0 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - p) - a.powf(1.0 - p)) / (1.0 - p)
    }
}

impl Weight1D {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "power weight needs c > 0, got {c}"
            )));
        }
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(Error::InvalidWeight(format!(
                "power weight x^{alpha} is not locally integrable (need alpha > -1)"
            )));
        }
        Ok(Weight1D::Power { c, alpha })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::power(c, 0.0)
    }

    pub fn one() -> Self {
        Weight1D::Power { c: 1.0, alpha: 0.0 }
    }

    pub fn indicator(a: f64) -> Result<Self> {
        Self::scaled_indicator(a, 1.0)
    }

    pub fn scaled_indicator(a: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && c.is_finite() && c > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "indicator weight needs a > 0 and c > 0, got a = {a}, c = {c}"
            )));
        }
        Ok(Weight1D::Indicator { a, c })
    }

    pub fn step(g: GridFunction1D) -> Self {
        Weight1D::Step(g)
    }

    /// Pointwise value (the left limit convention does not matter for integrals).
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Weight1D::Power { c, alpha } => c * x.powf(alpha),
            Weight1D::Indicator { a, c } => {
                if (0.0..=a).contains(&x) {
                    c
                } else {
                    0.0
                }
            }
            Weight1D::Step(ref g) => g.value_at(x),
        }
    }

    /// `V(r) = ∫₀^r v`.
    pub fn primitive(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            Weight1D::Power { c, alpha } => c * r.powf(alpha + 1.0) / (alpha + 1.0),
            Weight1D::Indicator { a, c } => c * r.min(a),
            Weight1D::Step(ref g) => g.integral_to(r),
        }
    }

    /// `∫_a^b v`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }

    /// `T_p(r) = ∫_r^∞ v(x) x^{-p} dx`; `f64::INFINITY` when divergent.
    pub fn tail(&self, r: f64, p: f64) -> f64 {
        let r = r.max(0.0);
        match *self {
            Weight1D::Power { c, alpha } => {
                let e = alpha - p + 1.0;
                if e >= 0.0 || r == 0.0 {
                    f64::INFINITY
                } else {
                    c * r.powf(e) / (-e)
                }
            }
            Weight1D::Indicator { a, c } => c * inverse_power_integral(r, a, p),
            Weight1D::Step(ref g) => {
                let h = g.cell_width();
                let mut acc = 0.0;
                for (k, &v) in g.values().iter().enumerate() {
                    let hi = (k + 1) as f64 * h;
                    if hi <= r || v == 0.0 {
                        continue;
                    }
                    let lo = (k as f64 * h).max(r);
                    acc += v * inverse_power_integral(lo, hi, p);
                }
                acc
            }
        }
    }

    /// `ṽ(σ) = ∫_σ^∞ v(x)/x dx`.
    pub fn log_tail(&self, sigma: f64) -> f64 {
        self.tail(sigma, 1.0)
    }

    /// `Ṽ(x) = ∫₀^x ṽ = V(x) + x·ṽ(x)`.
    pub fn log_tail_primitive(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if let Weight1D::Power { c, alpha } = *self {
            if alpha >= 0.0 {
                return f64::INFINITY;
            }
            return c * x.powf(alpha + 1.0) * (1.0 / (alpha + 1.0) + 1.0 / -alpha);
        }
        self.primitive(x) + x * self.log_tail(x)
    }

    /// Nonincreasing on `(0, ∞)`.
    pub fn is_decreasing(&self) -> bool {
        match *self {
            Weight1D::Power { alpha, .. } => alpha <= 0.0,
            Weight1D::Indicator { .. } => true,
            Weight1D::Step(ref g) => g.is_decreasing(),
        }
    }

    /// Parses `const:c`, `power:c,alpha`, `indicator:a[,c]` or `step:<path>`;
    /// a step file holds `{"h": .., "values": [..]}`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("weight spec `{spec}` lacks a `kind:` prefix")))?;
        let nums = || -> Result<Vec<f64>> {
            arg.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad number `{s}` in `{spec}`: {e}")))
                })
                .collect()
        };
        match kind {
            "const" => match nums()?.as_slice() {
                [c] => Self::constant(*c),
                _ => Err(Error::Parse(format!("expected const:c, got `{spec}`"))),
            },
            "power" => match nums()?.as_slice() {
                [c, alpha] => Self::power(*c, *alpha),
                _ => Err(Error::Parse(format!(
                    "expected power:c,alpha, got `{spec}`"
                ))),
            },
            "indicator" => match nums()?.as_slice() {
                [a] => Self::indicator(*a),
                [a, c] => Self::scaled_indicator(*a, *c),
                _ => Err(Error::Parse(format!("expected indicator:a, got `{spec}`"))),
            },
            "step" => {
                let text = std::fs::read_to_string(Path::new(arg))?;
                Ok(Weight1D::Step(serde_json::from_str(&text)?))
            }
            _ => Err(Error::Parse(format!("unknown weight kind `{kind}`"))),
        }
    }
}

impl fmt::Display for Weight1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight1D::Power { c, alpha } if *alpha == 0.0 => write!(f, "const:{c}"),
            Weight1D::Power { c, alpha } => write!(f, "power:{c},{alpha}"),
            Weight1D::Indicator { a, c } if *c == 1.0 => write!(f, "indicator:{a}"),
            Weight1D::Indicator { a, c } => write!(f, "indicator:{a},{c}"),
            Weight1D::Step(g) => write!(f, "step:[h={},cells={}]", g.cell_width(), g.len()),
        }
    }
}

/// Weight `w(s,t)` on the quadrant.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight2D {
    /// `u(s)·v(t)`.
    Product(Weight1D, Weight1D),
    /// Cellwise constant, zero outside its grid.
    Step(GridFunction2D),
}

impl Weight2D {
    pub fn one() -> Self {
        Weight2D::Product(Weight1D::one(), Weight1D::one())
    }

    pub fn product(u: Weight1D, v: Weight1D) -> Self {
        Weight2D::Product(u, v)
    }

    /// `w([x0,x1] × [y0,y1])`.
    pub fn rect_mass(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        match self {
            Weight2D::Product(u, v) => u.mass(x0, x1) * v.mass(y0, y1),
            Weight2D::Step(g) => g.rect_integral(x0, x1, y0, y1),
        }
    }

    pub fn as_product(&self) -> Option<(&Weight1D, &Weight1D)> {
        match self {
            Weight2D::Product(u, v) => Some((u, v)),
            Weight2D::Step(_) => None,
        }
    }

    /// Parses `<u>*<v>` (two 1D specs), `const:c` (shorthand for
    /// `const:c*const:1`) or `step:<path>` holding a grid JSON.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some((u, v)) = spec.split_once('*') {
            return Ok(Weight2D::Product(Weight1D::parse(u)?, Weight1D::parse(v)?));
        }
        if let Some(path) = spec.strip_prefix("step:") {
            let text = std::fs::read_to_string(path)?;
            return Ok(Weight2D::Step(serde_json::from_str(&text)?));
        }
        match Weight1D::parse(spec)? {
            w @ Weight1D::Power { alpha: 0.0, .. } => Ok(Weight2D::Product(w, Weight1D::one())),
            _ => Err(Error::Parse(format!(
                "2D weight `{spec}` must be `u*v`, `const:c` or `step:<path>`"
            ))),
        }
    }
}

impl fmt::Display for Weight2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight2D::Product(u, v) => write!(f, "{u}*{v}"),
            Weight2D::Step(g) => {
                let (m, n) = g.shape();
                write!(f, "step:[hx={},hy={},cells={m}x{n}]", g.hx(), g.hy())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite midpoint rule on `[a, b]` with a geometric start near 0.
    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn constant_weight_primitives() {
        let v = Weight1D::one();
        assert_eq!(v.primitive(3.0), 3.0);
        assert!((v.tail(4.0, 2.0) - 0.25).abs() < 1e-15);
        assert_eq!(v.log_tail(2.0), f64::INFINITY);
    }

    #[test]
    fn indicator_primitives_match_quadrature() {
        let v = Weight1D::indicator(1.0).unwrap();
        assert_eq!(v.primitive(0.3), 0.3);
        assert_eq!(v.primitive(5.0), 1.0);
        assert!((v.tail(0.5, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(v.tail(2.0, 2.0), 0.0);
        let q = quad(|x| v.value(x) / (x * x), 0.5, 1.0, 100_000);
        assert!((q - v.tail(0.5, 2.0)).abs() < 1e-8);
    }

    #[test]
    fn inverse_sqrt_primitives() {
        let u = Weight1D::power(1.0, -0.5).unwrap();
        for a in [0.1, 1.0, 7.0] {
            assert!((u.log_tail(a) - 2.0 / a.sqrt()).abs() < 1e-12);
            assert!((u.primitive(a) - 2.0 * a.sqrt()).abs() < 1e-12);
            assert!((u.log_tail_primitive(a) - 4.0 * a.sqrt()).abs() < 1e-12);
        }
        // quadrature of the tail up to a large cutoff plus the analytic remainder
        let q = quad(|x| x.powf(-1.5), 1.0, 100.0, 200_000) + 2.0 / 10.0;
        assert!((q - u.log_tail(1.0)).abs() < 1e-6);
    }

    #[test]
    fn power_tail_divergence_flag() {
        let v = Weight1D::power(1.0, 1.0).unwrap();
        assert_eq!(v.tail(1.0, 2.0), f64::INFINITY);
        assert!(v.tail(1.0, 3.0).is_finite());
        assert!(Weight1D::power(1.0, -1.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ws = [
            Weight1D::power(2.0, -0.3).unwrap(),
            Weight1D::indicator(3.0).unwrap(),
            Weight1D::step(GridFunction1D::new(0.5, vec![3.0, 1.0, 2.0]).unwrap()),
        ];
        let h = 1e-6;
        for w in &ws {
            for r in [0.3, 0.7, 1.2] {
                let dv = (w.primitive(r + h) - w.primitive(r - h)) / (2.0 * h);
                assert!(
                    (dv - w.value(r)).abs() <= 1e-6 * w.value(r).max(1.0),
                    "{w} V' at {r}"
                );
                let dt = (w.tail(r + h, 2.0) - w.tail(r - h, 2.0)) / (2.0 * h);
                let expect = -w.value(r) / (r * r);
                assert!(
                    (dt - expect).abs() <= 1e-6 * expect.abs().max(1.0),
                    "{w} T' at {r}"
                );
                let du = (w.log_tail_primitive(r + h) - w.log_tail_primitive(r - h)) / (2.0 * h);
                assert!((du - w.log_tail(r)).abs() <= 1e-6 * w.log_tail(r).max(1.0));
            }
        }
    }

    #[test]
    fn step_tail_is_exact_sum() {
        let g = GridFunction1D::new(1.0, vec![2.0, 3.0]).unwrap();
        let w = Weight1D::step(g);
        // 2·(1/0.5 − 1) + 3·(1 − 1/2)
        assert!((w.tail(0.5, 2.0) - 3.5).abs() < 1e-14);
        assert_eq!(w.tail(2.0, 2.0), 0.0);
        assert_eq!(w.tail(0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            Weight1D::parse("const:2").unwrap(),
            Weight1D::constant(2.0).unwrap()
        );
        assert_eq!(
            Weight1D::parse("power:1,-0.5").unwrap(),
            Weight1D::power(1.0, -0.5).unwrap()
        );
        assert_eq!(
            Weight1D::parse("indicator:1").unwrap(),
            Weight1D::indicator(1.0).unwrap()
        );
        assert!(Weight1D::parse("power:1").is_err());
        assert!(Weight1D::parse("bogus:1").is_err());
        assert!(Weight1D::parse("power:1,-2").is_err());
        let w = Weight2D::parse("indicator:1*const:1").unwrap();
        assert_eq!(w.to_string(), "indicator:1*const:1");
        assert_eq!(Weight2D::parse("const:1").unwrap(), Weight2D::one());
    }
}
