//! Browser bindings for three interactive views: rearranging an editable
//! grid, the weak-type curve `λ·|{S²f > λ}|`, and the staircase supremum for
//! a product of power weights.
//!
//! Grids travel as the same JSON used by the command-line tool.

use serde_json::json;
use wasm_bindgen::prelude::*;

use lorentz2d::classes::{b21_staircase_sup, b2_product_formula, SearchOptions};
use lorentz2d::hardy::{superlevel_measure, Operator};
use lorentz2d::rearrange::{rearrange_xy, rearrange_yx};
use lorentz2d::{GridFunction2D, Weight1D, Weight2D};

fn parse_grid(grid_json: &str) -> Result<GridFunction2D, String> {
    serde_json::from_str(grid_json).map_err(|e| e.to_string())
}

/// `{"yx": grid, "xy": grid, "same": bool}` for a grid JSON.
pub fn rearrangements(grid_json: &str) -> Result<String, String> {
    let f = parse_grid(grid_json)?;
    let (yx, xy) = (rearrange_yx(&f), rearrange_xy(&f));
    let same = yx == xy;
    Ok(json!({ "yx": yx, "xy": xy, "same": same }).to_string())
}

/// `λ·|{op f > λ}|` at each level. Non-rectangular inputs are counted on a
/// box eight times the support, so the values are lower bounds there.
pub fn weak_type_curve(grid_json: &str, op: &str, lambdas: &[f64]) -> Result<Vec<f64>, String> {
    let f = parse_grid(grid_json)?;
    let op: Operator = op.parse().map_err(|e: lorentz2d::Error| e.to_string())?;
    let (a, b) = f.extent();
    lambdas
        .iter()
        .map(|&l| {
            superlevel_measure(op, &f, l, (8.0 * a, 8.0 * b))
                .map(|m| l * m.measure)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Staircase supremum of `∫S²(χ_D)w / w(D)` for `w = s^{α}t^{β}` on
/// `[0,side]²` with `cells × cells` cells, next to the product formula.
pub fn power_staircase_sup(
    alpha: f64,
    beta: f64,
    side: f64,
    cells: usize,
    seed: u64,
) -> Result<String, String> {
    let u = Weight1D::power(1.0, alpha).map_err(|e| e.to_string())?;
    let v = Weight1D::power(1.0, beta).map_err(|e| e.to_string())?;
    let formula = b2_product_formula(&u, &v);
    let w = Weight2D::product(u, v);
    let sup = b21_staircase_sup(
        &w,
        (side, side),
        (cells, cells),
        &SearchOptions::with_seed(seed),
    )
    .map_err(|e| e.to_string())?;
    Ok(json!({ "sup": sup.value(), "formula": formula, "heights": sup.maximizer, "method": sup.method }).to_string())
}

#[wasm_bindgen(js_name = rearrangements)]
pub fn rearrangements_js(grid_json: &str) -> Result<String, JsValue> {
    rearrangements(grid_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = weakTypeCurve)]
pub fn weak_type_curve_js(grid_json: &str, op: &str, lambdas: &[f64]) -> Result<Vec<f64>, JsValue> {
    weak_type_curve(grid_json, op, lambdas).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = powerStaircaseSup)]
pub fn power_staircase_sup_js(
    alpha: f64,
    beta: f64,
    side: f64,
    cells: usize,
    seed: u64,
) -> Result<String, JsValue> {
    power_staircase_sup(alpha, beta, side, cells, seed).map_err(|e| JsValue::from_str(&e))
}
