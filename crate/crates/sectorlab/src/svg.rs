//! SVG heatmaps of nodal fields: one filled polygon per grid cell mapped
//! to Cartesian coordinates, no smoothing, so the plot is faithful to the
//! data.
//!
//! Colormap: symmetric diverging blue (negative) to white (zero) to red
//! (positive), scaled by the maximum absolute value of the field.

use crate::grid::{GridGeometry, ScalarField};

fn color(t: f64) -> String {
    // t in [-1, 1]; endpoints #1f4fa8 and #b40426 through white
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let w = 1.0 + t;
        (
            31.0 + (255.0 - 31.0) * w,
            79.0 + (255.0 - 79.0) * w,
            168.0 + (255.0 - 168.0) * w,
        )
    } else {
        let w = 1.0 - t;
        (
            180.0 + (255.0 - 180.0) * w,
            4.0 + (255.0 - 4.0) * w,
            38.0 + (255.0 - 38.0) * w,
        )
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Renders the field as an SVG heatmap string.
pub fn heatmap(field: &ScalarField, title: &str) -> String {
    let grid = field.grid();
    let scale = field.max_abs().max(1e-300);
    let half_r = grid.h_r() / 2.0;
    let half_t = grid.h_theta() / 2.0;

    // cell corners in physical coordinates
    let corner = |i_edge: f64, j_edge: f64| -> (f64, f64) {
        match grid.geometry() {
            GridGeometry::Polar { .. } => {
                let r = i_edge.max(0.0);
                (r * j_edge.cos(), r * j_edge.sin())
            }
            GridGeometry::Cartesian { .. } => (j_edge, i_edge),
        }
    };

    let mut polys = String::new();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (r_lo_bound, r_hi_bound) = match grid.geometry() {
        GridGeometry::Polar {
            r_inner, r_outer, ..
        } => (r_inner, r_outer),
        GridGeometry::Cartesian { width, .. } => (0.0, width),
    };
    let beta = grid.beta();
    for i in 0..grid.n_r() {
        let r_lo = (grid.r(i) - half_r).max(r_lo_bound);
        let r_hi = (grid.r(i) + half_r).min(r_hi_bound);
        for j in 0..grid.n_theta() {
            let t_lo = (grid.theta(j) - half_t).max(0.0);
            let t_hi = (grid.theta(j) + half_t).min(beta);
            let pts = [
                corner(r_lo, t_lo),
                corner(r_hi, t_lo),
                corner(r_hi, t_hi),
                corner(r_lo, t_hi),
            ];
            for &(x, y) in &pts {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
            let fill = color(field.at(i, j) / scale);
            polys.push_str(&format!(
                "<polygon points=\"{:.4},{:.4} {:.4},{:.4} {:.4},{:.4} {:.4},{:.4}\" \
                 fill=\"{fill}\" stroke=\"none\"/>\n",
                pts[0].0, -pts[0].1, pts[1].0, -pts[1].1, pts[2].0, -pts[2].1, pts[3].0, -pts[3].1,
            ));
        }
    }
    let pad = 0.05 * (x_max - x_min).max(y_max - y_min).max(1e-9);
    let vb = format!(
        "{:.4} {:.4} {:.4} {:.4}",
        x_min - pad,
        -(y_max + pad),
        (x_max - x_min) + 2.0 * pad,
        (y_max - y_min) + 2.0 * pad
    );
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vb}\" width=\"640\">\n\
         <title>{title}</title>\n{polys}</svg>\n"
    )
}
