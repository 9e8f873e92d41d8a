//! Separable raised-cosine (Tukey) window for edge suppression.

use crate::core::RealImage2D;
use crate::error::{Error, Result};

fn tukey_axis(n: usize, edge_fraction: f64) -> Vec<f64> {
    let taper = edge_fraction * n as f64;
    (0..n)
        .map(|i| {
            let from_start = i as f64;
            let from_end = (n - 1 - i) as f64;
            let d = from_start.min(from_end);
            if d >= taper {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * d / taper).cos())
            }
        })
        .collect()
}

/// Soft-edge mask: 1 in the interior, cosine taper to 0 over
/// `edge_fraction` of each dimension. Corners reach exactly 0.
pub fn soft_edge_mask(height: usize, width: usize, edge_fraction: f64) -> Result<RealImage2D> {
    if !(edge_fraction > 0.0 && edge_fraction < 0.5) {
        return Err(Error::InvalidParameter {
            field: "edge_fraction",
            message: format!("must be in (0, 0.5), got {edge_fraction}"),
        });
    }
    let row_win = tukey_axis(height, edge_fraction);
    let col_win = tukey_axis(width, edge_fraction);
    Ok(RealImage2D::from_fn(height, width, |r, c| row_win[r] * col_win[c]))
}
