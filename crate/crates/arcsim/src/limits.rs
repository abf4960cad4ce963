//! Feed-rate limits during circular interpolation.
//!
//! Three per-angle limits come from axis capacities: speed, acceleration
//! (through the normal acceleration a feed implies on a given radius) and
//! jerk (through the tangential jerk a steady feed implies). Two more come
//! from the controller: the curvilinear-jerk register scaled by its
//! tangential rate, and the interpolator cycle time on short blocks. The
//! set point a block actually holds in steady state is the minimum of all
//! of them plus the programmed feed.

use serde::{Deserialize, Serialize};

use crate::geom::AngularPosition;
use crate::machine::{NcuSettings, PlanarLimits};
use crate::toolpath::ArcBlock;

/// Fixed-point termination threshold for the set-point iteration (m/s).
const SETPOINT_TOL: f64 = 1e-6;
const SETPOINT_MAX_ITERS: usize = 10;
/// Grid resolution for envelope scans along a block.
const SCAN_STEPS: usize = 2048;

/// Feed limit from axis speed capacities at one angular position (m/s).
pub fn axis_feed_limit(alpha: AngularPosition, caps: &PlanarLimits) -> f64 {
    let (s, c) = alpha.rad().sin_cos();
    (caps.v_max[0] / c.abs()).min(caps.v_max[1] / s.abs())
}

/// Normal acceleration available from axis capacities at one angular
/// position (m/s²).
pub fn normal_accel_limit(alpha: AngularPosition, caps: &PlanarLimits) -> f64 {
    let (s, c) = alpha.rad().sin_cos();
    (caps.a_max[0] / s.abs()).min(caps.a_max[1] / c.abs())
}

/// Steady feed that a normal acceleration allows on radius `r` (m/s).
pub fn feed_from_accel(a_n: f64, r: f64) -> f64 {
    (r * a_n).sqrt()
}

/// Tangential jerk available from axis capacities at one angular
/// position (m/s³).
pub fn tangential_jerk_limit(alpha: AngularPosition, caps: &PlanarLimits) -> f64 {
    let (s, c) = alpha.rad().sin_cos();
    (caps.j_max[0] / c.abs()).min(caps.j_max[1] / s.abs())
}

/// Steady feed that a tangential jerk allows on radius `r` (m/s).
pub fn feed_from_jerk(j_t: f64, r: f64) -> f64 {
    (j_t * r * r).cbrt()
}

/// Static look-ahead: the axis-capacity feed envelope at one angular
/// position (m/s).
pub fn static_lookahead(alpha: AngularPosition, r: f64, caps: &PlanarLimits) -> f64 {
    axis_feed_limit(alpha, caps)
        .min(feed_from_accel(normal_accel_limit(alpha, caps), r))
        .min(feed_from_jerk(tangential_jerk_limit(alpha, caps), r))
}

/// Minimum feed that still covers the block within one interpolator
/// cycle (m/s).
pub fn cycle_time_limit(r: f64, alpha_start: f64, alpha_end: f64, t_cy: f64) -> f64 {
    r * (alpha_end - alpha_start).abs() / t_cy
}

/// Tangential jerk allowed by the controller registers (m/s³).
pub fn ncu_tangential_jerk(ncu: &NcuSettings) -> f64 {
    ncu.j_curv * ncu.r_jct
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingTerm {
    VProg,
    VJtcurv,
    VJt,
    VAn,
    VT,
    VTcy,
}

/// Every term entering the set point for one block, all in m/s, with the
/// angular position at which the angle-dependent terms were taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitBreakdown {
    pub v_t: f64,
    pub v_an: f64,
    pub v_jt: f64,
    pub v_jtcurv: f64,
    pub v_tcy: f64,
    pub v_prog: f64,
    pub v_st: f64,
    pub binding: BindingTerm,
    pub alpha_eval: AngularPosition,
    /// False when the fixed point did not settle and the breakdown fell
    /// back to the most conservative angle on the block.
    pub converged: bool,
}

/// Feed envelope value at travel distance-angle `delta` from block start.
fn envelope_along(block: &ArcBlock, caps: &PlanarLimits, delta: f64) -> f64 {
    let alpha = block.alpha_start + block.sweep().signum() * delta;
    static_lookahead(AngularPosition::new(alpha), block.r, caps)
}

/// First angular travel from block start where the envelope admits `v`.
/// Falls back to the envelope maximum when `v` is unreachable anywhere on
/// the block.
fn first_admitting_angle(block: &ArcBlock, caps: &PlanarLimits, v: f64) -> f64 {
    let span = block.sweep().abs();
    let admit = |delta: f64| envelope_along(block, caps, delta) >= v - 1e-12;
    if admit(0.0) {
        return 0.0;
    }
    let step = span / SCAN_STEPS as f64;
    for k in 1..=SCAN_STEPS {
        let hi = step * k as f64;
        if admit(hi) {
            let mut lo = hi - step;
            let mut hi = hi;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if admit(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
    }
    // Unreachable set point: settle on the best the block offers.
    extremum_angle(block, caps, span, true)
}

/// Grid argmax/argmin of the envelope with a local ternary refinement.
fn extremum_angle(block: &ArcBlock, caps: &PlanarLimits, span: f64, maximum: bool) -> f64 {
    let step = span / SCAN_STEPS as f64;
    let better = |a: f64, b: f64| if maximum { a > b } else { a < b };
    let mut best_k = 0usize;
    let mut best = envelope_along(block, caps, 0.0);
    for k in 1..=SCAN_STEPS {
        let v = envelope_along(block, caps, step * k as f64);
        if better(v, best) {
            best = v;
            best_k = k;
        }
    }
    let mut lo = step * best_k.saturating_sub(1) as f64;
    let mut hi = (step * (best_k + 1) as f64).min(span);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if better(envelope_along(block, caps, m1), envelope_along(block, caps, m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Set point and full term breakdown for one block.
///
/// The programmed feed, the controller jerk limit and the cycle-time limit
/// are angle-free; the axis terms are taken at the angular position where
/// the rising feed stops being envelope-limited, i.e. the first position
/// along the block whose static look-ahead admits the candidate set point.
/// That position and the set point depend on each other, so both are
/// resolved by fixed-point iteration.
pub fn feed_setpoint(block: &ArcBlock, caps: &PlanarLimits, ncu: &NcuSettings) -> LimitBreakdown {
    let r = block.r;
    let v_jtcurv = feed_from_jerk(ncu_tangential_jerk(ncu), r);
    let v_tcy = cycle_time_limit(r, block.alpha_start, block.alpha_end, ncu.t_cy);
    let v_free = block.v_prog.min(v_jtcurv).min(v_tcy);

    let sign = block.sweep().signum();
    let mut v = v_free;
    let mut delta = 0.0;
    let mut converged = false;
    for _ in 0..SETPOINT_MAX_ITERS {
        delta = first_admitting_angle(block, caps, v);
        let v_next = v_free.min(envelope_along(block, caps, delta));
        let settled = (v_next - v).abs() < SETPOINT_TOL;
        v = v_next;
        if settled {
            converged = true;
            break;
        }
    }
    if !converged {
        delta = extremum_angle(block, caps, block.sweep().abs(), false);
    }

    let alpha_eval = AngularPosition::new(block.alpha_start + sign * delta);
    let v_t = axis_feed_limit(alpha_eval, caps);
    let v_an = feed_from_accel(normal_accel_limit(alpha_eval, caps), r);
    let v_jt = feed_from_jerk(tangential_jerk_limit(alpha_eval, caps), r);
    let v_st = block
        .v_prog
        .min(v_jtcurv)
        .min(v_jt)
        .min(v_an)
        .min(v_t)
        .min(v_tcy);

    let ordered = [
        (BindingTerm::VProg, block.v_prog),
        (BindingTerm::VJtcurv, v_jtcurv),
        (BindingTerm::VJt, v_jt),
        (BindingTerm::VAn, v_an),
        (BindingTerm::VT, v_t),
        (BindingTerm::VTcy, v_tcy),
    ];
    let binding = ordered
        .iter()
        .find(|(_, value)| *value <= v_st * (1.0 + 1e-9))
        .map(|(term, _)| *term)
        .unwrap_or(BindingTerm::VProg);

    LimitBreakdown {
        v_t,
        v_an,
        v_jt,
        v_jtcurv,
        v_tcy,
        v_prog: block.v_prog,
        v_st,
        binding,
        alpha_eval,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::toolpath::circle_path;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn caps() -> PlanarLimits {
        PlanarLimits {
            v_max: [0.5, 0.5],
            a_max: [2.5, 3.0],
            j_max: [5.0, 5.0],
        }
    }

    fn ncu() -> NcuSettings {
        NcuSettings {
            j_curv: 10.0,
            r_jct: 0.6,
            r_jcc: 0.4,
            t_cy: 0.012,
            delta_t: 0.012,
        }
    }

    fn deg(d: f64) -> AngularPosition {
        AngularPosition::new(d.to_radians())
    }

    fn m_min(v: f64) -> f64 {
        v * 60.0
    }

    fn close_rel(actual: f64, expected: f64, rel: f64) {
        assert!(
            (actual / expected - 1.0).abs() <= rel,
            "{actual} vs {expected} (rel {rel})"
        );
    }

    #[test]
    fn axis_feed_limit_examples() {
        close_rel(m_min(axis_feed_limit(deg(45.0), &caps())), 42.43, 1e-3);
        close_rel(m_min(axis_feed_limit(deg(90.0), &caps())), 30.0, 1e-12);
        close_rel(m_min(axis_feed_limit(deg(33.5), &caps())), 35.97, 1e-3);
    }

    #[test]
    fn normal_accel_limit_examples() {
        assert_eq!(normal_accel_limit(deg(90.0), &caps()), 2.5);
        assert_eq!(normal_accel_limit(deg(0.0), &caps()), 3.0);
        // argmax sits where both axes saturate: tan(alpha) = amx/amy
        let expected = (2.5f64 / 3.0).atan().to_degrees();
        close_rel(expected, 39.8056, 1e-4);
        let mut best = (0.0, 0.0);
        for k in 0..90_000 {
            let a = deg(k as f64 * 1e-3);
            let v = normal_accel_limit(a, &caps());
            if v > best.1 {
                best = (a.deg(), v);
            }
        }
        assert!((best.0 - expected).abs() < 1e-2, "argmax at {}", best.0);
    }

    #[test]
    fn feed_from_accel_examples() {
        let an = normal_accel_limit(deg(33.557), &caps());
        close_rel(m_min(feed_from_accel(an, 0.0025)), 5.69, 2e-3);
        close_rel(m_min(feed_from_accel(0.333, 0.03)), 6.0, 1e-3);
        assert_eq!(feed_from_accel(0.0, 0.03), 0.0);
    }

    #[test]
    fn tangential_jerk_limit_examples() {
        assert_eq!(tangential_jerk_limit(deg(0.0), &caps()), 5.0);
        close_rel(tangential_jerk_limit(deg(45.0), &caps()), 7.0711, 1e-4);
        close_rel(tangential_jerk_limit(deg(33.5), &caps()), 5.996, 1e-3);
    }

    #[test]
    fn feed_from_jerk_examples() {
        close_rel(m_min(feed_from_jerk(5.0, 0.0025)), 1.8899, 1e-4);
        close_rel(m_min(feed_from_jerk(5.0, 0.03)), 9.9058, 1e-4);
        close_rel(m_min(feed_from_jerk(6.0, 0.03)), 10.526, 1e-3);
    }

    #[test]
    fn static_lookahead_composes_the_three_limits() {
        let alpha = deg(33.557);
        let vs = static_lookahead(alpha, 0.0025, &caps());
        let v_jt = feed_from_jerk(tangential_jerk_limit(alpha, &caps()), 0.0025);
        assert_eq!(vs, v_jt, "jerk term binds on a small radius");
        close_rel(m_min(vs), 2.0078, 1e-3);
        // Large radius at 45 degrees: the axis speed term binds.
        let vs = static_lookahead(deg(45.0), 1e6, &caps());
        close_rel(m_min(vs), 42.43, 1e-3);
    }

    #[test]
    fn cycle_time_limit_examples() {
        close_rel(m_min(cycle_time_limit(0.0025, 0.0, TAU, 0.012)), 78.54, 1e-3);
        close_rel(m_min(cycle_time_limit(0.03, 0.0, TAU, 0.012)), 942.48, 1e-3);
        assert_eq!(cycle_time_limit(0.03, 1.0, 1.0, 0.012), 0.0);
    }

    #[test]
    fn ncu_tangential_jerk_examples() {
        assert_eq!(ncu_tangential_jerk(&ncu()), 6.0);
        let full = NcuSettings { r_jct: 1.0, ..ncu() };
        assert_eq!(ncu_tangential_jerk(&full), full.j_curv);
        let half = NcuSettings { r_jct: 0.5, ..ncu() };
        assert_eq!(ncu_tangential_jerk(&half), 5.0);
    }

    fn circle_block(r: f64, feed_m_min: f64) -> ArcBlock {
        circle_path(r, feed_m_min / 60.0).unwrap().blocks[0]
    }

    #[test]
    fn setpoint_small_circle_binds_on_controller_jerk() {
        let b = feed_setpoint(&circle_block(0.0025, 6.0), &caps(), &ncu());
        assert!(b.converged);
        close_rel(m_min(b.v_st), 2.0083, 1e-3);
        assert_eq!(b.binding, BindingTerm::VJtcurv);
        close_rel(b.alpha_eval.fold_symmetric().to_degrees(), 33.557, 1e-3);
        close_rel(m_min(b.v_an), 5.69, 2e-3);
        close_rel(m_min(b.v_t), 36.0, 1e-3);
        close_rel(m_min(b.v_tcy), 78.54, 1e-3);
    }

    #[test]
    fn setpoint_large_circle_reaches_programmed_feed() {
        let b = feed_setpoint(&circle_block(0.03, 6.0), &caps(), &ncu());
        close_rel(m_min(b.v_st), 6.0, 1e-9);
        assert_eq!(b.binding, BindingTerm::VProg);
    }

    #[test]
    fn setpoint_spiral_radii() {
        for (r_mm, expected) in [(10.0, 5.0606), (12.0, 5.7146), (14.0, 6.0)] {
            let b = feed_setpoint(&circle_block(r_mm / 1000.0, 6.0), &caps(), &ncu());
            close_rel(m_min(b.v_st), expected, 1e-3);
        }
    }

    proptest! {
        /// Radius monotonicity: larger circles admit faster feeds.
        #[test]
        fn limit_feeds_grow_with_radius(
            r1 in 1e-4f64..0.3,
            factor in 1.01f64..10.0,
            jerk in 0.5f64..60.0,
            accel in 0.5f64..10.0,
        ) {
            let r2 = r1 * factor;
            prop_assert!(feed_from_jerk(jerk, r2) > feed_from_jerk(jerk, r1));
            prop_assert!(feed_from_accel(accel, r2) > feed_from_accel(accel, r1));
        }

        /// The set point never exceeds the programmed feed and equals it
        /// when every capacity term clears it.
        #[test]
        fn setpoint_bounded_by_programmed_feed(
            r_mm in 1.0f64..60.0,
            feed in 0.5f64..30.0,
        ) {
            let b = feed_setpoint(&circle_block(r_mm / 1000.0, feed), &caps(), &ncu());
            prop_assert!(b.v_st <= b.v_prog + 1e-12);
            let min_caps = b.v_jtcurv.min(b.v_jt).min(b.v_an).min(b.v_t).min(b.v_tcy);
            if min_caps > b.v_prog {
                prop_assert!((b.v_st - b.v_prog).abs() < 1e-12);
            }
        }

        /// Half-turn shift and reflection leave every per-angle limit alone.
        #[test]
        fn per_angle_limits_are_symmetric(alpha_deg in 0.0f64..360.0) {
            let a = deg(alpha_deg);
            let shifted = deg(alpha_deg + 180.0);
            let reflected = deg(-alpha_deg);
            for f in [axis_feed_limit, normal_accel_limit, tangential_jerk_limit] {
                let v = f(a, &caps());
                prop_assert!((f(shifted, &caps()) - v).abs() <= 1e-9 * v);
                prop_assert!((f(reflected, &caps()) - v).abs() <= 1e-9 * v);
            }
        }

        /// With equal axis jerks the tangential jerk is minimal on the axes
        /// and maximal on the diagonals.
        #[test]
        fn jerk_extremes_sit_on_axes_and_diagonals(alpha_deg in 0.0f64..360.0) {
            let v = tangential_jerk_limit(deg(alpha_deg), &caps());
            prop_assert!(v >= 5.0 - 1e-12);
            prop_assert!(v <= 5.0 * 2f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn breakdown_minimum_invariant() {
        for r_mm in [1.0, 2.5, 10.0, 30.0, 80.0] {
            for feed in [3.0, 6.0, 12.0, 24.0] {
                let b = feed_setpoint(&circle_block(r_mm / 1000.0, feed), &caps(), &ncu());
                let min = b
                    .v_prog
                    .min(b.v_jtcurv)
                    .min(b.v_jt)
                    .min(b.v_an)
                    .min(b.v_t)
                    .min(b.v_tcy);
                assert_eq!(b.v_st, min);
                assert!(b.v_st > 0.0);
            }
        }
    }

    #[test]
    fn partial_arc_setpoint_uses_block_span() {
        // Quarter arc far from any admitting angle still gets a set point
        // from the best the block offers.
        let b = ArcBlock::new(Point2::new(0.0, 0.0), 0.0025, 0.0, 0.2, 0.1).unwrap();
        let breakdown = feed_setpoint(&b, &caps(), &ncu());
        assert!(breakdown.v_st > 0.0);
        assert!(breakdown.v_st <= breakdown.v_prog);
        // Envelope over [0, 0.2 rad] tops out below the controller limit.
        let best = (0..=2000)
            .map(|k| static_lookahead(AngularPosition::new(0.2 * k as f64 / 2000.0), 0.0025, &caps()))
            .fold(0.0f64, f64::max);
        assert!(breakdown.v_st <= best + 1e-9);
    }
}
