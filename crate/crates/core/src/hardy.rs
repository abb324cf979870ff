//! Hardy-type averaging operators.
//!
//! * `S²f(s,t) = (st)^{-1} ∫₀^s∫₀^t f`
//! * `f**(s,t) = S²(f*_{yx})(s,t)`
//! * `f**_{yx}(s,t) = S_{2,1}f(s,t)`: average each row of `f*_y` over
//!   `[0,t]`, rearrange the resulting function of `x`, average over `[0,s]`.
//!
//! All three are exact at any point with `s, t > 0`. Beyond the support box
//! `[0,M]×[0,N]` each satisfies `F(s,t) = (M/s)·F(M,t)` for `s ≥ M` and
//! `F(s,t) = (N/t)·F(s,N)` for `t ≥ N`, which the norm integrals use to
//! handle the unbounded quadrant exactly.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::{GridFunction1D, GridFunction2D};
use crate::rearrange::{rearrange_y, rearrange_yx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    /// `S²f`
    S2,
    /// `f** = S² f*_{yx}`
    FStarStar,
    /// `f**_{yx} = S_{2,1} f`
    S21,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::S2 => "s2",
            Operator::FStarStar => "fss",
            Operator::S21 => "s21",
        })
    }
}

impl std::str::FromStr for Operator {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s2" => Ok(Operator::S2),
            "fss" | "fstarstar" => Ok(Operator::FStarStar),
            "s21" | "fss-yx" => Ok(Operator::S21),
            _ => Err(crate::Error::Parse(format!(
                "unknown operator `{s}` (s2|fss|s21)"
            ))),
        }
    }
}

/// A pointwise operator evaluated on a fixed input.
pub trait PointOperator {
    /// Value at `(s, t)`, `s, t > 0` (unchecked).
    fn eval(&self, s: f64, t: f64) -> f64;
    /// Upper corner of the input's support box.
    fn extent(&self) -> (f64, f64);
}

pub struct S2Eval {
    f: GridFunction2D,
}

impl S2Eval {
    pub fn new(f: GridFunction2D) -> Self {
        Self { f }
    }
}

impl PointOperator for S2Eval {
    fn eval(&self, s: f64, t: f64) -> f64 {
        self.f.cumulative_unchecked(s, t) / (s * t)
    }

    fn extent(&self) -> (f64, f64) {
        self.f.extent()
    }
}

/// `S_{2,1}` with the rows of `f*_y` and their prefix sums cached.
pub struct S21Eval {
    hx: f64,
    hy: f64,
    m: usize,
    n: usize,
    /// `m × (n+1)` prefix sums of each sorted row (unscaled).
    row_prefix: Vec<f64>,
}

impl S21Eval {
    pub fn new(f: &GridFunction2D) -> Self {
        let fy = rearrange_y(f);
        let (m, n) = f.shape();
        let mut row_prefix = vec![0.0; m * (n + 1)];
        for i in 0..m {
            for j in 0..n {
                row_prefix[i * (n + 1) + j + 1] = row_prefix[i * (n + 1) + j] + fy.get(i, j);
            }
        }
        Self {
            hx: f.hx(),
            hy: f.hy(),
            m,
            n,
            row_prefix,
        }
    }

    /// `∫₀^t f*_y(i, τ) dτ`.
    fn row_integral(&self, i: usize, t: f64) -> f64 {
        let base = i * (self.n + 1);
        let k = t / self.hy;
        if k >= self.n as f64 {
            return self.row_prefix[base + self.n] * self.hy;
        }
        let j = k.floor() as usize;
        let cell = self.row_prefix[base + j + 1] - self.row_prefix[base + j];
        (self.row_prefix[base + j] + cell * (k - j as f64)) * self.hy
    }

    /// The averaged rows `x ↦ t^{-1}∫₀^t f*_y(x,τ)dτ` as a 1D grid function.
    pub fn averaged_rows(&self, t: f64) -> GridFunction1D {
        let values = (0..self.m).map(|i| self.row_integral(i, t) / t).collect();
        GridFunction1D::new(self.hx, values).expect("averages of nonnegative values")
    }
}

impl PointOperator for S21Eval {
    fn eval(&self, s: f64, t: f64) -> f64 {
        let mut h: Vec<f64> = (0..self.m).map(|i| self.row_integral(i, t) / t).collect();
        // the sort order depends on t, so it is redone per point
        h.sort_by(|a, b| b.total_cmp(a));
        let k = s / self.hx;
        let integral = if k >= self.m as f64 {
            h.iter().sum::<f64>() * self.hx
        } else {
            let i = k.floor() as usize;
            (h[..i].iter().sum::<f64>() + h[i] * (k - i as f64)) * self.hx
        };
        integral / s
    }

    fn extent(&self) -> (f64, f64) {
        (self.m as f64 * self.hx, self.n as f64 * self.hy)
    }
}

impl Operator {
    pub fn evaluator(self, f: &GridFunction2D) -> Box<dyn PointOperator + Send + Sync> {
        match self {
            Operator::S2 => Box::new(S2Eval::new(f.clone())),
            Operator::FStarStar => Box::new(S2Eval::new(rearrange_yx(f))),
            Operator::S21 => Box::new(S21Eval::new(f)),
        }
    }
}

/// Pointwise values of an operator applied to one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSample {
    pub operator: Operator,
    pub input: String,
    pub points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl OperatorSample {
    /// CSV with header `s,t,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,value\n");
        for ((s, t), v) in self.points.iter().zip(&self.values) {
            out.push_str(&format!("{s},{t},{v}\n"));
        }
        out
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if let Some(p) = points
        .iter()
        .find(|(s, t)| !(*s > 0.0 && *t > 0.0 && s.is_finite() && t.is_finite()))
    {
        return domain(format!(
            "evaluation points must be strictly positive, got {p:?}"
        ));
    }
    Ok(())
}

/// Evaluates `op` applied to `f` at each point.
pub fn sample(
    op: Operator,
    f: &GridFunction2D,
    points: &[(f64, f64)],
    input: &str,
) -> Result<OperatorSample> {
    check_points(points)?;
    let e = op.evaluator(f);
    Ok(OperatorSample {
        operator: op,
        input: input.to_string(),
        points: points.to_vec(),
        values: points.iter().map(|&(s, t)| e.eval(s, t)).collect(),
    })
}

pub fn s2(f: &GridFunction2D, points: &[(f64, f64)]) -> Result<OperatorSample> {
    sample(Operator::S2, f, points, "grid")
}

pub fn fstarstar(f: &GridFunction2D, points: &[(f64, f64)]) -> Result<OperatorSample> {
    sample(Operator::FStarStar, f, points, "grid")
}

pub fn s21(f: &GridFunction2D, points: &[(f64, f64)]) -> Result<OperatorSample> {
    sample(Operator::S21, f, points, "grid")
}

/// `(1/t) ∫₀^t g`.
pub fn hardy_1d(g: &GridFunction1D, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("Hardy average needs t > 0, got {t}"));
    }
    Ok(g.integral_to(t) / t)
}

/// Cell midpoints of an `m × n` query grid on `[0,a]×[0,b]`.
pub fn midpoints(a: f64, b: f64, m: usize, n: usize) -> Vec<(f64, f64)> {
    let (dx, dy) = (a / m as f64, b / n as f64);
    (0..m)
        .flat_map(|i| (0..n).map(move |j| ((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy)))
        .collect()
}

/// Interior and outer cell corners of an `m × n` query grid on `[0,a]×[0,b]`
/// (corners on the axes are excluded).
pub fn corners(a: f64, b: f64, m: usize, n: usize) -> Vec<(f64, f64)> {
    let (dx, dy) = (a / m as f64, b / n as f64);
    (1..=m)
        .flat_map(|i| (1..=n).map(move |j| (i as f64 * dx, j as f64 * dy)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperlevelMeasure {
    pub lambda: f64,
    pub measure: f64,
    /// Exact over the whole quadrant (indicator path).
    pub exact: bool,
    /// Relative change between the last two refinements (0 when exact).
    pub tolerance: f64,
    /// Samples per axis at the final refinement (0 when exact).
    pub resolution: usize,
}

/// `|{(s,t) : S²χ_{[0,1]²}(s,t) > λ}|` over the whole quadrant, summed over
/// the regions where `min(s,1)·min(t,1)/(st)` takes each closed form.
pub fn unit_square_superlevel(lambda: f64) -> f64 {
    if lambda >= 1.0 {
        return 0.0;
    }
    let inv = 1.0 / lambda;
    // s, t ≤ 1: value 1
    let square = 1.0;
    // one coordinate above 1: value 1/s > λ for s < 1/λ
    let strips = 2.0 * (inv - 1.0);
    // both above 1: st < 1/λ
    let hyperbola = inv * inv.ln() - (inv - 1.0);
    square + strips + hyperbola
}

/// `Some((c, a, b))` when `f = c·χ_{[0,a]×[0,b]}`.
pub fn as_origin_rectangle(f: &GridFunction2D) -> Option<(f64, f64, f64)> {
    let c = f.max_value();
    if c == 0.0 || f.values().iter().any(|&v| v != 0.0 && v != c) {
        return None;
    }
    let (m, n) = f.shape();
    let rows = (0..m).take_while(|&i| f.get(i, 0) == c).count();
    let cols = (0..n).take_while(|&j| f.get(0, j) == c).count();
    let cells = f.values().iter().filter(|&&v| v == c).count();
    if cells != rows * cols {
        return None;
    }
    let inside = (0..rows).all(|i| (0..cols).all(|j| f.get(i, j) == c));
    inside.then(|| (c, rows as f64 * f.hx(), cols as f64 * f.hy()))
}

/// Measure of `{op f > λ}`.
///
/// For `f = c·χ_{[0,a]×[0,b]}` all three operators equal `c·g(s/a)·g(t/b)`
/// with `g(x) = min(x,1)/x`, and the measure over the whole quadrant is
/// `ab·unit_square_superlevel(λ/c)` (`bbox` is ignored). Otherwise the
/// measure is restricted to `[0,bbox.0]×[0,bbox.1]` and computed by midpoint
/// counting, doubling the sampling density until two successive values
/// differ by less than 0.5%; the result is then a lower bound for the
/// quadrant measure.
pub fn superlevel_measure(
    op: Operator,
    f: &GridFunction2D,
    lambda: f64,
    bbox: (f64, f64),
) -> Result<SuperlevelMeasure> {
    if !(lambda > 0.0) {
        return domain(format!("superlevel measure needs lambda > 0, got {lambda}"));
    }
    if let Some((c, a, b)) = as_origin_rectangle(f) {
        return Ok(SuperlevelMeasure {
            lambda,
            measure: a * b * unit_square_superlevel(lambda / c),
            exact: true,
            tolerance: 0.0,
            resolution: 0,
        });
    }
    if !(bbox.0 > 0.0 && bbox.1 > 0.0) {
        return domain("truncation box must have positive sides");
    }
    let e = op.evaluator(f);
    let count = |k: usize| {
        let pts = midpoints(bbox.0, bbox.1, k, k);
        let hits = pts.iter().filter(|&&(s, t)| e.eval(s, t) > lambda).count();
        hits as f64 * bbox.0 * bbox.1 / (k * k) as f64
    };
    let mut k = 32;
    let mut prev = count(k);
    let mut tolerance = f64::INFINITY;
    while k < 2048 {
        k *= 2;
        let cur = count(k);
        tolerance = if cur == 0.0 && prev == 0.0 {
            0.0
        } else {
            (cur - prev).abs() / cur.max(prev)
        };
        prev = cur;
        if tolerance < 5e-3 {
            break;
        }
    }
    Ok(SuperlevelMeasure {
        lambda,
        measure: prev,
        exact: false,
        tolerance,
        resolution: k,
    })
}
