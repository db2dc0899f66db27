//! wasm-bindgen entry points for `www/index.html`.
//!
//! Every export returns a flat `Float64Array`; the page knows the layout.
//! The `*_impl` functions carry the logic and are tested natively.

use fractal_onb::basis::gen_walsh_basis;
use fractal_onb::basis::gen_fractal_onb;
use fractal_onb::cycles::{find_extreme_cycles, DEFAULT_CYCLE_TOL, DEFAULT_P_MAX};
use fractal_onb::filters::UnitaryMatrix;
use fractal_onb::ifs::AffineIfs;
use fractal_onb::verify::{transfer_trajectory, TransferGrid};
use wasm_bindgen::prelude::*;

const MAX_WORD: usize = 6;
const MAX_CELLS: usize = 1 << 14;

/// Real parts of all `S_w 1` with `|w| <= max_len` for a random unitary
/// `n x n` matrix with constant first row (or the Hadamard-type Fourier
/// matrix when `seed` is 0). Layout: `[count, cells, values...]`.
pub fn walsh_values_impl(n: usize, max_len: usize, seed: u64) -> Result<Vec<f64>, String> {
    if !(2..=8).contains(&n) || max_len > MAX_WORD || n.pow(max_len as u32) > 64 {
        return Err(format!("need 2 <= N <= 8 and N^len <= 64, got N = {n}, len = {max_len}"));
    }
    let a = if seed == 0 { UnitaryMatrix::fourier(n) } else { UnitaryMatrix::random_walsh(n, seed) };
    let basis = gen_walsh_basis(&a, max_len).map_err(|e| e.to_string())?;
    let cells = n.pow(max_len as u32);
    let mut out = vec![basis.len() as f64, cells as f64];
    for g in &basis {
        out.extend(g.refine(max_len).values().iter().map(|v| v.re));
    }
    Ok(out)
}

/// Real part of the `index`-th basis element for the system `(R, B, L)` on
/// `points` attractor points. Layout: `[count, x0, y0, x1, y1, ...]`.
pub fn fractal_element_impl(scale: f64, digits: &[f64], spectrum: &[f64], max_len: usize, index: usize, points: usize) -> Result<Vec<f64>, String> {
    if max_len > MAX_WORD || points == 0 || points > MAX_CELLS {
        return Err(format!("max_len must be at most {MAX_WORD} and points in 1..={MAX_CELLS}"));
    }
    let ifs = AffineIfs::new(scale, digits.to_vec()).map_err(|e| e.to_string())?;
    let cycles = find_extreme_cycles(&ifs, spectrum, DEFAULT_P_MAX, DEFAULT_CYCLE_TOL).map_err(|e| e.to_string())?;
    let basis = gen_fractal_onb(&ifs, spectrum, &cycles, max_len);
    let e = basis.get(index).ok_or_else(|| format!("only {} elements", basis.len()))?;
    let mut out = vec![basis.len() as f64];
    for z in ifs.grid(points) {
        out.push(z.x());
        out.push(e.eval_point(&ifs, &z).re);
    }
    Ok(out)
}

/// `sup |R^k h - 1|` for `k = 1..=iters`, starting from `1 + amp * bump`.
pub fn transfer_curve_impl(scale: f64, digits: &[f64], spectrum: &[f64], amp: f64, iters: usize) -> Result<Vec<f64>, String> {
    if iters == 0 || iters > 500 {
        return Err("iters must be in 1..=500".into());
    }
    let ifs = AffineIfs::new(scale, digits.to_vec()).map_err(|e| e.to_string())?;
    let probe = TransferGrid::covering(spectrum, scale, 2, |_| 0.0).map_err(|e| e.to_string())?;
    let (c, w) = (0.5 * (probe.a + probe.b), 0.05 * (probe.b - probe.a));
    let h0 = TransferGrid::covering(spectrum, scale, 1024, |t| 1.0 + amp * (-((t - c) / w).powi(2)).exp()).map_err(|e| e.to_string())?;
    let path = transfer_trajectory(&ifs, spectrum, &h0, iters).map_err(|e| e.to_string())?;
    Ok(path.iter().map(|h| h.distance_to_constant(1.0)).collect())
}

#[wasm_bindgen]
pub fn walsh_values(n: usize, max_len: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    walsh_values_impl(n, max_len, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fractal_element(scale: f64, digits: Vec<f64>, spectrum: Vec<f64>, max_len: usize, index: usize, points: usize) -> Result<Vec<f64>, JsError> {
    fractal_element_impl(scale, &digits, &spectrum, max_len, index, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn transfer_curve(scale: f64, digits: Vec<f64>, spectrum: Vec<f64>, amp: f64, iters: usize) -> Result<Vec<f64>, JsError> {
    transfer_curve_impl(scale, &digits, &spectrum, amp, iters).map_err(|e| JsError::new(&e))
}
