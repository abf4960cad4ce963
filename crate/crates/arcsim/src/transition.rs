//! Crossing speeds at curvature discontinuities between tangent arcs.
//!
//! Two arcs that join with a common tangent but different radii force an
//! acceleration jump. The controller crosses such a junction within the
//! transition time `delta_t`, which bounds the crossing feed by the
//! tangential jerk available at the junction's angular position.

use serde::{Deserialize, Serialize};

use crate::geom::AngularPosition;
use crate::limits::tangential_jerk_limit;
use crate::machine::PlanarLimits;

/// Relative radius difference below which two arcs count as the same
/// curvature (no discontinuity).
const SAME_RADIUS_TOL: f64 = 1e-12;

/// One curvature discontinuity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSpec {
    /// Upstream block radius (m).
    pub r1: f64,
    /// Downstream block radius (m).
    pub r2: f64,
    /// Junction angular position, taken from the downstream block start.
    pub alpha: AngularPosition,
    /// Upstream set point (m/s); caps the effective crossing speed.
    pub v_in_cap: f64,
}

/// Tangential jerk available at a junction (m/s³). Same axis mix as the
/// steady-state jerk limit; on an axis direction the finite term binds.
pub fn transition_jerk(alpha: AngularPosition, caps: &PlanarLimits) -> f64 {
    tangential_jerk_limit(alpha, caps)
}

/// Crossing feed allowed over a curvature discontinuity (m/s).
///
/// Returns infinity when the radii match: equal curvature needs no
/// transition and the junction imposes no feed loss.
pub fn transition_feedrate(spec: &TransitionSpec, caps: &PlanarLimits, delta_t: f64) -> f64 {
    let dr = (spec.r1 - spec.r2).abs();
    if dr <= SAME_RADIUS_TOL * spec.r1.max(spec.r2) {
        return f64::INFINITY;
    }
    let j_t = transition_jerk(spec.alpha, caps);
    (spec.r1 * spec.r2 * j_t * delta_t / dr).sqrt()
}

/// Effective junction speed: the crossing bound capped by both adjacent
/// set points. A block already running below the crossing bound loses no
/// feed at the junction.
pub fn effective_crossing(v_fr: f64, v_st_up: f64, v_st_down: f64) -> f64 {
    v_fr.min(v_st_up).min(v_st_down)
}

/// Per-junction record for the simulation summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionRecord {
    pub r1_m: f64,
    pub r2_m: f64,
    pub alpha_rad: f64,
    pub jt_m_s3: f64,
    /// Crossing bound from the discontinuity model; None when the radii
    /// match and the junction is free.
    pub vfr_m_s: Option<f64>,
    /// Junction speed actually planned (m/s).
    pub effective_m_s: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn caps() -> PlanarLimits {
        PlanarLimits {
            v_max: [0.5, 0.5],
            a_max: [2.5, 3.0],
            j_max: [5.0, 5.0],
        }
    }

    fn deg(d: f64) -> AngularPosition {
        AngularPosition::new(d.to_radians())
    }

    fn spec(r1_mm: f64, r2_mm: f64, alpha_deg: f64) -> TransitionSpec {
        TransitionSpec {
            r1: r1_mm / 1000.0,
            r2: r2_mm / 1000.0,
            alpha: deg(alpha_deg),
            v_in_cap: f64::INFINITY,
        }
    }

    fn close_rel(actual: f64, expected: f64, rel: f64) {
        assert!(
            (actual / expected - 1.0).abs() <= rel,
            "{actual} vs {expected}"
        );
    }

    #[test]
    fn junction_jerk_examples() {
        assert_eq!(transition_jerk(deg(0.0), &caps()), 5.0);
        close_rel(transition_jerk(deg(30.0), &caps()), 2.0 * 5.0 / 3f64.sqrt(), 1e-12);
        close_rel(transition_jerk(deg(45.0), &caps()), 5.0 * 2f64.sqrt(), 1e-12);
    }

    #[test]
    fn crossing_feed_examples() {
        let dt = 0.012;
        close_rel(transition_feedrate(&spec(14.0, 16.0, 0.0), &caps(), dt) * 60.0, 4.9185, 1e-4);
        close_rel(transition_feedrate(&spec(14.0, 16.0, 30.0), &caps(), dt) * 60.0, 5.2853, 1e-4);
        close_rel(transition_feedrate(&spec(14.0, 16.0, 45.0), &caps(), dt) * 60.0, 5.8492, 1e-4);
        close_rel(transition_feedrate(&spec(1.5, 2.5, 0.0), &caps(), dt) * 60.0, 0.9, 1e-9);
        close_rel(transition_feedrate(&spec(20.0, 30.0, 0.0), &caps(), dt) * 60.0, 3.6, 1e-9);
    }

    #[test]
    fn equal_radii_cross_free() {
        let v = transition_feedrate(&spec(16.0, 16.0, 0.0), &caps(), 0.012);
        assert!(v.is_infinite());
        assert_eq!(effective_crossing(v, 0.1, 0.2), 0.1);
        // vanishing curvature jump: the bound blows up well past any feed
        let near = transition_feedrate(&spec(16.0, 16.0001, 0.0), &caps(), 0.012);
        assert!(near > 10.0, "near-equal radii gave {near} m/s");
    }

    #[test]
    fn crossing_scales_with_quarter_root_of_jerk() {
        let dt = 0.012;
        let v0 = transition_feedrate(&spec(14.0, 16.0, 0.0), &caps(), dt);
        let v45 = transition_feedrate(&spec(14.0, 16.0, 45.0), &caps(), dt);
        close_rel(v45 / v0, 2f64.powf(0.25), 1e-12);
    }

    proptest! {
        /// Swapping the two radii leaves the crossing feed unchanged.
        #[test]
        fn symmetric_in_radii(
            r1 in 1e-3f64..0.1,
            r2 in 1e-3f64..0.1,
            alpha_deg in 0.0f64..360.0,
        ) {
            prop_assume!((r1 - r2).abs() > 1e-6);
            let dt = 0.012;
            let a = transition_feedrate(&spec(r1 * 1000.0, r2 * 1000.0, alpha_deg), &caps(), dt);
            let b = transition_feedrate(&spec(r2 * 1000.0, r1 * 1000.0, alpha_deg), &caps(), dt);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
        }

        /// At fixed geometric mean the crossing feed falls as the curvature
        /// jump grows.
        #[test]
        fn monotone_in_curvature_jump(
            g in 5e-3f64..0.05,
            u1 in 0.01f64..1.0,
            du in 0.05f64..1.0,
        ) {
            let dt = 0.012;
            let u2 = u1 + du;
            let jump = |u: f64| {
                let (r1, r2) = (g * u.exp(), g * (-u).exp());
                let jump = (1.0 / r1 - 1.0 / r2).abs();
                (transition_feedrate(&spec(r1 * 1000.0, r2 * 1000.0, 0.0), &caps(), dt), jump)
            };
            let (v1, j1) = jump(u1);
            let (v2, j2) = jump(u2);
            prop_assert!(j2 > j1);
            prop_assert!(v2 < v1);
        }
    }
}
