//! Piecewise-constant functions on uniform grids.
//!
//! A [`GridFunction1D`] is constant on each cell `[i·h, (i+1)·h)` and zero
//! beyond the last cell. A [`GridFunction2D`] is constant on each cell
//! `[i·hx, (i+1)·hx) × [j·hy, (j+1)·hy)`; the first index runs along the
//! `x`/`s` axis and the second along `y`/`t`. Both are zero outside their
//! support box, which is how the positive half line and quadrant are
//! truncated throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

fn check_values(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidGrid(format!(
            "values must be finite and nonnegative, found {v}"
        )));
    }
    Ok(())
}

fn check_width(name: &str, h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "{name} must be positive, got {h}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Grid1DJson", into = "Grid1DJson")]
pub struct GridFunction1D {
    h: f64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Grid1DJson {
    h: f64,
    values: Vec<f64>,
}

impl TryFrom<Grid1DJson> for GridFunction1D {
    type Error = Error;
    fn try_from(j: Grid1DJson) -> Result<Self> {
        GridFunction1D::new(j.h, j.values)
    }
}

impl From<GridFunction1D> for Grid1DJson {
    fn from(g: GridFunction1D) -> Self {
        Grid1DJson {
            h: g.h,
            values: g.values,
        }
    }
}

impl GridFunction1D {
    pub fn new(h: f64, values: Vec<f64>) -> Result<Self> {
        check_width("cell_width", h)?;
        check_values(&values)?;
        Ok(Self { h, values })
    }

    pub fn cell_width(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Right end of the support interval.
    pub fn support_end(&self) -> f64 {
        self.h * self.values.len() as f64
    }

    pub fn total_integral(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    /// Value at `x`, using the half-open cell convention.
    pub fn value_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let i = (x / self.h).floor() as usize;
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫₀^r g`, exact.
    pub fn integral_to(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let full = ((r / self.h).floor() as usize).min(self.values.len());
        let mut acc: f64 = self.values[..full].iter().sum::<f64>() * self.h;
        if full < self.values.len() {
            acc += self.values[full] * (r - full as f64 * self.h);
        }
        acc
    }

    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Nonnegative piecewise-constant function on an `m × n` uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct GridFunction2D {
    hx: f64,
    hy: f64,
    m: usize,
    n: usize,
    values: Vec<f64>,
    /// `(m+1) × (n+1)` corner prefix sums of cell masses.
    prefix: Vec<f64>,
}

impl PartialEq for GridFunction2D {
    fn eq(&self, other: &Self) -> bool {
        self.hx == other.hx
            && self.hy == other.hy
            && self.m == other.m
            && self.n == other.n
            && self.values == other.values
    }
}

/// Wire format: `{"hx": .., "hy": .., "values": [[..], ..]}`, row index = x.
#[derive(Serialize, Deserialize)]
struct GridJson {
    hx: f64,
    hy: f64,
    values: Vec<Vec<f64>>,
}

impl TryFrom<GridJson> for GridFunction2D {
    type Error = Error;
    fn try_from(j: GridJson) -> Result<Self> {
        GridFunction2D::from_rows(j.hx, j.hy, j.values)
    }
}

impl From<GridFunction2D> for GridJson {
    fn from(g: GridFunction2D) -> Self {
        let values = g.rows().map(|r| r.to_vec()).collect();
        GridJson {
            hx: g.hx,
            hy: g.hy,
            values,
        }
    }
}

impl GridFunction2D {
    pub fn new(hx: f64, hy: f64, m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        check_width("hx", hx)?;
        check_width("hy", hy)?;
        if m == 0 || n == 0 {
            return Err(Error::InvalidGrid(
                "grid must have at least one cell".into(),
            ));
        }
        if values.len() != m * n {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for a {m}x{n} grid, got {}",
                m * n,
                values.len()
            )));
        }
        check_values(&values)?;
        let area = hx * hy;
        let mut prefix = vec![0.0; (m + 1) * (n + 1)];
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..n {
                row += values[i * n + j] * area;
                prefix[(i + 1) * (n + 1) + j + 1] = prefix[i * (n + 1) + j + 1] + row;
            }
        }
        Ok(Self {
            hx,
            hy,
            m,
            n,
            values,
            prefix,
        })
    }

    /// Builds a grid from rows; `rows[i][j]` is the value on cell `(i, j)`.
    pub fn from_rows(hx: f64, hy: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGrid("rows have unequal lengths".into()));
        }
        Self::new(hx, hy, m, n, rows.into_iter().flatten().collect())
    }

    pub fn unit(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(1.0, 1.0, rows)
    }

    pub fn zeros(hx: f64, hy: f64, m: usize, n: usize) -> Result<Self> {
        Self::new(hx, hy, m, n, vec![0.0; m * n])
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// `(m, n)`: cells along x and along y.
    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Upper corner `(m·hx, n·hy)` of the support box.
    pub fn extent(&self) -> (f64, f64) {
        (self.m as f64 * self.hx, self.n as f64 * self.hy)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, j)).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_integral(&self) -> f64 {
        self.prefix[(self.m + 1) * (self.n + 1) - 1]
    }

    /// Same geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.hx, self.hy, self.m, self.n, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Cellwise sum; both grids must share their geometry.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() || self.hx != other.hx || self.hy != other.hy {
            return domain("cellwise sum needs grids of identical geometry");
        }
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Swaps the roles of x and y.
    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.n {
            for i in 0..self.m {
                values.push(self.get(i, j));
            }
        }
        Self::new(self.hy, self.hx, self.n, self.m, values).expect("transpose of a valid grid")
    }

    /// Weakly decreasing along both indices.
    pub fn is_doubly_decreasing(&self) -> bool {
        (0..self.m).all(|i| {
            (0..self.n).all(|j| {
                (j + 1 == self.n || self.get(i, j) >= self.get(i, j + 1))
                    && (i + 1 == self.m || self.get(i, j) >= self.get(i + 1, j))
            })
        })
    }

    /// All cells flattened onto a 1D grid of cell width `hx·hy`, in storage order.
    pub fn flatten(&self) -> GridFunction1D {
        GridFunction1D {
            h: self.cell_area(),
            values: self.values.clone(),
        }
    }

    fn corner(&self, i: usize, j: usize) -> f64 {
        self.prefix[i * (self.n + 1) + j]
    }

    /// `∫₀^s ∫₀^t f`, exact: bilinear interpolation of corner prefix sums,
    /// constant beyond the support box.
    pub fn cumulative_integral(&self, s: f64, t: f64) -> Result<f64> {
        if !(s >= 0.0 && t >= 0.0) {
            return domain(format!(
                "cumulative integral needs s, t >= 0, got ({s}, {t})"
            ));
        }
        Ok(self.cumulative_unchecked(s, t))
    }

    pub(crate) fn cumulative_unchecked(&self, s: f64, t: f64) -> f64 {
        let (i, fs) = locate(s, self.hx, self.m);
        let (j, ft) = locate(t, self.hy, self.n);
        let p00 = self.corner(i, j);
        let p10 = self.corner(i + 1, j);
        let p01 = self.corner(i, j + 1);
        let p11 = self.corner(i + 1, j + 1);
        p00 + fs * (p10 - p00) + ft * (p01 - p00) + fs * ft * (p11 - p10 - p01 + p00)
    }

    /// `∫` of `f` over `[x0,x1] × [y0,y1]` (coordinates ≥ 0).
    pub fn rect_integral(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        self.cumulative_unchecked(x1, y1)
            - self.cumulative_unchecked(x0, y1)
            - self.cumulative_unchecked(x1, y0)
            + self.cumulative_unchecked(x0, y0)
    }
}

/// Cell index and fractional offset of coordinate `x` on a grid of `cells`
/// cells of width `h`; coordinates past the end clamp to the last corner.
fn locate(x: f64, h: f64, cells: usize) -> (usize, f64) {
    let k = x / h;
    if k >= cells as f64 {
        return (cells - 1, 1.0);
    }
    let i = k.floor() as usize;
    (i, k - i as f64)
}
