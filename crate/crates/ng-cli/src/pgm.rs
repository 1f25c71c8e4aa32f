//! Binary PGM (P5) rendering of decision-region label grids.

use ng_core::DecisionGrid;

/// Renders the label grid as an 8-bit PGM image. Labels are spread linearly
/// over 0..=255; the first image row is the top of the quadrature plane
/// (largest `p`).
pub fn render(grid: &DecisionGrid, n_labels: u32) -> Vec<u8> {
    let res = grid.resolution;
    let mut out = format!("P5\n{res} {res}\n255\n").into_bytes();
    out.reserve(res * res);
    let denom = n_labels.saturating_sub(1).max(1);
    for iy in (0..res).rev() {
        for ix in 0..res {
            let label = grid.labels[[iy, ix]];
            out.push((label * 255 / denom) as u8);
        }
    }
    out
}
