//! Distribution functions and decreasing rearrangements.
//!
//! On uniform cells every rearrangement is a stable descending sort: `f*_y`
//! sorts each x-row along y, `f*_x` sorts each y-column along x, and the
//! iterated `f*_{yx}` does the former and then the latter.

use crate::error::{domain, Result};
use crate::grid::{GridFunction1D, GridFunction2D};

fn sort_desc(values: &mut [f64]) {
    values.sort_by(|a, b| b.total_cmp(a));
}

/// `λ_g(σ) = |{g > σ}|`.
pub fn distribution_1d(g: &GridFunction1D, sigma: f64) -> f64 {
    g.values().iter().filter(|&&v| v > sigma).count() as f64 * g.cell_width()
}

/// `λ_f(σ) = |{f > σ}|`.
pub fn distribution(f: &GridFunction2D, sigma: f64) -> f64 {
    f.values().iter().filter(|&&v| v > sigma).count() as f64 * f.cell_area()
}

/// `g*`: the values sorted in descending order on the same cell width.
pub fn rearrange_1d(g: &GridFunction1D) -> GridFunction1D {
    let mut values = g.values().to_vec();
    sort_desc(&mut values);
    GridFunction1D::new(g.cell_width(), values).expect("a permutation of valid values")
}

/// `f*` of a 2D function as a function on the half line (cell width `hx·hy`).
pub fn rearrange_global(f: &GridFunction2D) -> GridFunction1D {
    rearrange_1d(&f.flatten())
}

/// `f*_y`: each x-row sorted along y.
pub fn rearrange_y(f: &GridFunction2D) -> GridFunction2D {
    let mut values = f.values().to_vec();
    let (_, n) = f.shape();
    values.chunks_mut(n).for_each(sort_desc);
    f.with_values(values)
        .expect("a permutation of valid values")
}

/// `f*_x`: each y-column sorted along x.
pub fn rearrange_x(f: &GridFunction2D) -> GridFunction2D {
    rearrange_y(&f.transpose()).transpose()
}

/// `f*_{yx} = (f*_y(·, t))*_x`.
pub fn rearrange_yx(f: &GridFunction2D) -> GridFunction2D {
    rearrange_x(&rearrange_y(f))
}

/// `f*_{xy} = (f*_x(s, ·))*_y`.
pub fn rearrange_xy(f: &GridFunction2D) -> GridFunction2D {
    rearrange_y(&rearrange_x(f))
}

/// Whether `f` and `g` have the same distribution function, comparing sorted
/// positive values at `1e-12` relative tolerance. Cell shapes may differ but
/// cell areas must agree.
pub fn equimeasurable(f: &GridFunction2D, g: &GridFunction2D) -> Result<bool> {
    let (af, ag) = (f.cell_area(), g.cell_area());
    if (af - ag).abs() > 1e-12 * af.max(ag) {
        return domain(format!("cell areas differ: {af} vs {ag}"));
    }
    let positive = |h: &GridFunction2D| {
        let mut v: Vec<f64> = h.values().iter().copied().filter(|&x| x > 0.0).collect();
        sort_desc(&mut v);
        v
    };
    let (mut a, mut b) = (positive(f), positive(g));
    let len = a.len().max(b.len());
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    Ok(a.iter()
        .zip(&b)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs())))
}
