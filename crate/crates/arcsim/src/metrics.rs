//! Circularity and radial-deviation indexes on sampled XY point sets.
//!
//! The circle fit is an algebraic least-squares seed refined by damped
//! geometric least squares. The circularity index G is the radial band
//! width about the fitted center; radial deviations are signed against a
//! nominal circle, outward positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;

const REFINE_MAX_ITERS: usize = 50;
const REFINE_STEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Point2,
    pub radius: f64,
    pub rms_residual: f64,
}

/// Least-squares circle through a point set.
pub fn fit_circle(points: &[Point2]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let cx0 = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy0 = points.iter().map(|p| p.y).sum::<f64>() / n;

    // Algebraic seed on centered data: minimize sum (x²+y² - 2ax - 2by - c)².
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for p in points {
        let x = p.x - cx0;
        let y = p.y - cy0;
        let z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    let det = sxx * syy - sxy * sxy;
    if det.abs() <= 1e-12 * (sxx * syy).max(1e-300) {
        return Err(Error::DegenerateFit("points are collinear".into()));
    }
    let a = 0.5 * (sxz * syy - syz * sxy) / det;
    let b = 0.5 * (syz * sxx - sxz * sxy) / det;
    // r² = c + a² + b² with c = mean(z) on centered data.
    let radius2 = sz / n + a * a + b * b;
    let mut center = Point2::new(cx0 + a, cy0 + b);
    let mut radius = radius2.max(0.0).sqrt();

    // Geometric refinement, damped so the residual never climbs.
    let sse = |c: &Point2, r: f64| -> f64 {
        points
            .iter()
            .map(|p| {
                let e = p.dist(c) - r;
                e * e
            })
            .sum()
    };
    let mut current = sse(&center, radius);
    for _ in 0..REFINE_MAX_ITERS {
        // Gauss-Newton normal equations for residuals (|p - c| - r).
        let (mut h00, mut h01, mut h02) = (0.0, 0.0, 0.0);
        let (mut h11, mut h12, mut h22) = (0.0, 0.0, 0.0);
        let (mut g0, mut g1, mut g2) = (0.0, 0.0, 0.0);
        for p in points {
            let d = p.dist(&center).max(1e-300);
            let ux = (center.x - p.x) / d;
            let uy = (center.y - p.y) / d;
            let e = d - radius;
            h00 += ux * ux;
            h01 += ux * uy;
            h02 += -ux;
            h11 += uy * uy;
            h12 += -uy;
            h22 += 1.0;
            g0 += ux * e;
            g1 += uy * e;
            g2 += -e;
        }
        let step = solve3(
            [[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]],
            [g0, g1, g2],
        );
        let Some(step) = step else { break };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand_center = Point2::new(center.x - scale * step[0], center.y - scale * step[1]);
            let cand_radius = radius - scale * step[2];
            let cand = sse(&cand_center, cand_radius);
            if cand <= current && cand_radius > 0.0 {
                center = cand_center;
                radius = cand_radius;
                current = cand;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
        let norm = (step[0] * scale).hypot(step[1] * scale).hypot(step[2] * scale);
        if norm < REFINE_STEP_TOL {
            break;
        }
    }

    if !(radius > 0.0) {
        return Err(Error::DegenerateFit("fitted radius is not positive".into()));
    }
    Ok(CircleFit {
        center,
        radius,
        rms_residual: (current / n).sqrt(),
    })
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [
        [m[0][0], m[0][1], m[0][2], b[0]],
        [m[1][0], m[1][1], m[1][2], b[1]],
        [m[2][0], m[2][1], m[2][2], b[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Circularity deviation: radial band width about the fitted center.
pub fn circularity_g(points: &[Point2]) -> Result<(f64, CircleFit)> {
    let fit = fit_circle(points)?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in points {
        let d = p.dist(&fit.center);
        min = min.min(d);
        max = max.max(d);
    }
    Ok((max - min, fit))
}

/// Signed radial deviations against a nominal circle, outward positive.
pub fn radial_deviation(
    points: &[Point2],
    nominal_center: Point2,
    nominal_radius: f64,
) -> (f64, f64, Vec<f64>) {
    let deviations: Vec<f64> = points
        .iter()
        .map(|p| p.dist(&nominal_center) - nominal_radius)
        .collect();
    let f_max = deviations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f_min = deviations.iter().copied().fold(f64::INFINITY, f64::min);
    (f_max, f_min, deviations)
}

/// Combined circularity report for one point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularityReport {
    /// Circularity deviation about the fitted center (m).
    pub g: f64,
    /// Extreme signed radial deviations from the nominal circle (m).
    pub f_max: f64,
    pub f_min: f64,
    pub deviations: Vec<f64>,
    pub fit: CircleFit,
    /// True when no nominal circle was supplied and the fitted one stood in.
    pub nominal_defaulted: bool,
}

impl CircularityReport {
    pub fn from_points(points: &[Point2], nominal: Option<(Point2, f64)>) -> Result<Self> {
        let (g, fit) = circularity_g(points)?;
        let nominal_defaulted = nominal.is_none();
        let (nc, nr) = nominal.unwrap_or((fit.center, fit.radius));
        let (f_max, f_min, deviations) = radial_deviation(points, nc, nr);
        Ok(Self {
            g,
            f_max,
            f_min,
            deviations,
            fit,
            nominal_defaulted,
        })
    }
}
