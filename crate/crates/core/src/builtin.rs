//! Named example functions used by the CLI and the verification suite.

use crate::error::{Error, Result};
use crate::grid::GridFunction2D;

/// Staircase of `N` unit-width blocks: `a_k` on `(k, k+1) × (0, k+1)` with
/// `a_k = (1+k)^{-1/p}`. Its mixed norm is 1 for every `N`, while its
/// two-dimensional Lorentz norm grows like the harmonic sum.
pub fn staircase_harmonic(blocks: usize, p: f64) -> Result<GridFunction2D> {
    let rows = (0..blocks)
        .map(|k| {
            let a = (1.0 + k as f64).powf(-1.0 / p);
            (0..blocks).map(|j| if j <= k { a } else { 0.0 }).collect()
        })
        .collect();
    GridFunction2D::unit(rows)
}

/// `Σ_k a_k χ_{[k,k+1]²}` for a given decreasing sequence.
pub fn diagonal(coefficients: &[f64]) -> Result<GridFunction2D> {
    let n = coefficients.len();
    let rows = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| if j == k { coefficients[k] } else { 0.0 })
                .collect()
        })
        .collect();
    GridFunction2D::unit(rows)
}

/// Diagonal blocks with `a_k = 2^{-k}`.
pub fn diagonal_geometric(blocks: usize) -> Result<GridFunction2D> {
    diagonal(
        &(0..blocks)
            .map(|k| 0.5f64.powi(k as i32))
            .collect::<Vec<_>>(),
    )
}

/// Diagonal blocks with `a_k = (1+k)^{-1/p}`.
pub fn diagonal_harmonic(blocks: usize, p: f64) -> Result<GridFunction2D> {
    diagonal(
        &(0..blocks)
            .map(|k| (1.0 + k as f64).powf(-1.0 / p))
            .collect::<Vec<_>>(),
    )
}

/// `χ_D` with `D = [0,3]×[0,1] ∪ [2,3]×[1,2]` on a 3 × 2 unit grid.
pub fn indicator_witness() -> GridFunction2D {
    GridFunction2D::unit(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).expect("static grid")
}

/// `[[4,1],[3,2]]` on unit cells: `f**(1,2) = 3` but `f**_{yx}(1,2) = 2.5`.
pub fn separating_grid() -> GridFunction2D {
    GridFunction2D::unit(vec![vec![4.0, 1.0], vec![3.0, 2.0]]).expect("static grid")
}

pub fn unit_square() -> GridFunction2D {
    GridFunction2D::unit(vec![vec![1.0]]).expect("static grid")
}

/// Coefficient rule for the diagonal example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientRule {
    Geometric,
    Harmonic,
}

/// Looks up a generator by name: `r25i`, `r25ii`, `prop21-witness`,
/// `separating`, `unit-square`.
pub fn by_name(name: &str, blocks: usize, p: f64, rule: CoefficientRule) -> Result<GridFunction2D> {
    match name {
        "r25i" => staircase_harmonic(blocks, p),
        "r25ii" => match rule {
            CoefficientRule::Geometric => diagonal_geometric(blocks),
            CoefficientRule::Harmonic => diagonal_harmonic(blocks, p),
        },
        "prop21-witness" => Ok(indicator_witness()),
        "separating" => Ok(separating_grid()),
        "unit-square" => Ok(unit_square()),
        _ => Err(Error::Parse(format!(
            "unknown example `{name}` (r25i|r25ii|prop21-witness|separating|unit-square)"
        ))),
    }
}
