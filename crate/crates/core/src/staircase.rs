//! Decreasing sets on a grid.
//!
//! A set whose indicator is decreasing in each variable is, on a uniform
//! grid anchored at the origin, a Young diagram: column `i` covers
//! `[i·hx, (i+1)·hx) × [0, λᵢ·hy)` with `λ₁ ≥ λ₂ ≥ … ≥ λ_m`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction2D;
use crate::weight::Weight2D;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Staircase {
    pub hx: f64,
    pub hy: f64,
    heights: Vec<usize>,
}

impl Staircase {
    pub fn new(hx: f64, hy: f64, heights: Vec<usize>) -> Result<Self> {
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::InvalidStaircase(
                "cell sizes must be positive".into(),
            ));
        }
        if heights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidStaircase(format!(
                "heights must be weakly decreasing, got {heights:?}"
            )));
        }
        Ok(Self { hx, hy, heights })
    }

    /// The full `m × n` box.
    pub fn full(hx: f64, hy: f64, m: usize, n: usize) -> Self {
        Self {
            hx,
            hy,
            heights: vec![n; m],
        }
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn cell_count(&self) -> usize {
        self.heights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count() == 0
    }

    /// `|D|`.
    pub fn measure(&self) -> f64 {
        self.hx * self.hy * self.cell_count() as f64
    }

    /// `w(D) = ∫_D w`, summed column by column.
    pub fn weight(&self, w: &Weight2D) -> f64 {
        self.heights
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(i, &h)| {
                let x0 = i as f64 * self.hx;
                w.rect_mass(x0, x0 + self.hx, 0.0, h as f64 * self.hy)
            })
            .sum()
    }

    /// `D ⊆ other` (columns beyond either profile count as height 0).
    pub fn is_subset_of(&self, other: &Staircase) -> bool {
        self.heights
            .iter()
            .enumerate()
            .all(|(i, &h)| h <= other.heights.get(i).copied().unwrap_or(0))
    }

    /// `χ_D` on an `m × n` grid with this staircase's cell sizes.
    pub fn indicator(&self, m: usize, n: usize) -> Result<GridFunction2D> {
        if self.heights.len() > m || self.heights.iter().any(|&h| h > n) {
            return Err(Error::InvalidStaircase(format!(
                "profile {:?} does not fit a {m}x{n} grid",
                self.heights
            )));
        }
        let mut values = vec![0.0; m * n];
        for (i, &h) in self.heights.iter().enumerate() {
            values[i * n..i * n + h].fill(1.0);
        }
        GridFunction2D::new(self.hx, self.hy, m, n, values)
    }
}

/// Number of weakly decreasing profiles with `m` entries in `[0, n]`: `C(m+n, m)`.
pub fn staircase_count(m: usize, n: usize) -> u128 {
    let k = m.min(n) as u128;
    let total = (m + n) as u128;
    (0..k).fold(1u128, |acc, i| acc * (total - i) / (i + 1))
}

/// Every profile `n ≥ λ₁ ≥ … ≥ λ_m ≥ 0` exactly once, in lexicographic order,
/// starting with the empty set.
pub fn enumerate_staircases(m: usize, n: usize) -> StaircaseIter {
    StaircaseIter {
        n,
        current: Some(vec![0; m]),
    }
}

pub struct StaircaseIter {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for StaircaseIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let pos = (0..next.len())
            .rev()
            .find(|&i| next[i] < if i == 0 { self.n } else { next[i - 1] });
        if let Some(i) = pos {
            next[i] += 1;
            next[i + 1..].fill(0);
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Per-column prefix sums of a cell quantity: `get(i, h)` is the sum over
/// cells `(i, 0..h)`. Any quantity additive over cells of a staircase
/// (measure, weight mass, integrals linear in `χ_D`) is a sum of these.
#[derive(Debug, Clone)]
pub struct ColumnSums {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl ColumnSums {
    pub fn from_cells(m: usize, n: usize, cell: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; m * (n + 1)];
        for i in 0..m {
            for j in 0..n {
                data[i * (n + 1) + j + 1] = data[i * (n + 1) + j] + cell(i, j);
            }
        }
        Self { m, n, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.data[i * (self.n + 1) + h]
    }

    /// Total over a profile, in column order.
    pub fn total(&self, heights: &[usize]) -> f64 {
        heights
            .iter()
            .enumerate()
            .map(|(i, &h)| self.get(i, h))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseMax {
    pub value: f64,
    pub heights: Vec<usize>,
    /// Profiles for which `score` returned a value.
    pub evaluated: u64,
    /// Profiles for which `score` declined (e.g. zero denominators).
    pub skipped: u64,
}

/// Exhaustive maximum of `score(a(D), b(D))` over every nonempty staircase,
/// where `a` and `b` are column-additive. `score` returns `None` to skip a
/// set. Ties keep the first profile in lexicographic order.
pub fn sup_over_staircases(
    a: &ColumnSums,
    b: &ColumnSums,
    mut score: impl FnMut(f64, f64) -> Option<f64>,
) -> Option<StaircaseMax> {
    assert_eq!(a.shape(), b.shape(), "column tables must share a grid");
    let (m, n) = a.shape();
    let mut heights = vec![0; m];
    let mut best: Option<StaircaseMax> = None;
    let (mut evaluated, mut skipped) = (0u64, 0u64);
    walk(
        0,
        n,
        0.0,
        0.0,
        false,
        &mut heights,
        a,
        b,
        &mut |h, sa, sb| match score(sa, sb) {
            Some(v) => {
                evaluated += 1;
                if best.as_ref().is_none_or(|bst| v > bst.value) {
                    best = Some(StaircaseMax {
                        value: v,
                        heights: h.to_vec(),
                        evaluated: 0,
                        skipped: 0,
                    });
                }
            }
            None => skipped += 1,
        },
    );
    best.map(|mut b| {
        b.evaluated = evaluated;
        b.skipped = skipped;
        b
    })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    col: usize,
    cap: usize,
    sa: f64,
    sb: f64,
    nonempty: bool,
    heights: &mut [usize],
    a: &ColumnSums,
    b: &ColumnSums,
    visit: &mut impl FnMut(&[usize], f64, f64),
) {
    if col == heights.len() {
        if nonempty {
            visit(heights, sa, sb);
        }
        return;
    }
    if cap == 0 {
        // remaining columns are empty
        heights[col..].fill(0);
        if nonempty {
            visit(heights, sa, sb);
        }
        return;
    }
    for h in 0..=cap {
        heights[col] = h;
        walk(
            col + 1,
            h,
            sa + a.get(col, h),
            sb + b.get(col, h),
            nonempty || h > 0,
            heights,
            a,
            b,
            visit,
        );
    }
    heights[col] = 0;
}
