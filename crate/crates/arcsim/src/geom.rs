//! Planar points and the angular-position convention shared by the whole crate.
//!
//! A circle of radius `r` around center `c` is parameterized as
//! `p(alpha) = c + r * (sin alpha, cos alpha)`. With this convention the
//! per-axis limit formulas take their simplest form: the tangent mixes the
//! axes as `(cos alpha, -sin alpha)` and the inward normal as
//! `(-sin alpha, -cos alpha)`. Increasing `alpha` traverses the circle
//! clockwise (the standard polar angle is `pi/2 - alpha`).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Unit vector `(sin alpha, cos alpha)` from a circle center to the point at
/// angular position `alpha`.
pub fn radial_dir(alpha: f64) -> Point2 {
    Point2::new(alpha.sin(), alpha.cos())
}

/// Angular position on a circular block, normalized to `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularPosition(f64);

impl AngularPosition {
    pub fn new(rad: f64) -> Self {
        Self(rad.rem_euclid(TAU))
    }

    pub fn rad(&self) -> f64 {
        self.0
    }

    pub fn deg(&self) -> f64 {
        self.0.to_degrees()
    }

    /// Representative in `[0, pi/2]` of the symmetry class `{±alpha + k*pi}`.
    ///
    /// Every per-axis limit depends on the angle only through
    /// `(|sin|, |cos|)`, which this fold preserves.
    pub fn fold_symmetric(&self) -> f64 {
        let a = self.0.rem_euclid(PI);
        if a > FRAC_PI_2 {
            PI - a
        } else {
            a
        }
    }
}

impl From<f64> for AngularPosition {
    fn from(rad: f64) -> Self {
        Self::new(rad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} != {b}");
    }

    #[test]
    fn normalizes_into_full_turn() {
        close(AngularPosition::new(-0.5).rad(), TAU - 0.5);
        close(AngularPosition::new(TAU + 1.0).rad(), 1.0);
        close(AngularPosition::new(0.0).rad(), 0.0);
    }

    #[test]
    fn symmetric_fold_preserves_axis_mix() {
        let a = AngularPosition::new(326.443f64.to_radians());
        close(a.fold_symmetric().to_degrees(), 33.557);
        for deg in [10.0f64, 80.0, 100.0, 170.0, 190.0, 260.0, 280.0, 350.0] {
            let alpha = AngularPosition::new(deg.to_radians());
            let f = alpha.fold_symmetric();
            close(f.sin().abs(), alpha.rad().sin().abs());
            close(f.cos().abs(), alpha.rad().cos().abs());
        }
    }
}
