//! Controlled-jerk feed law per block and whole-path simulation.
//!
//! Each block runs three phases: a jerk-limited acceleration ramp (A), an
//! optional constant-feed plateau (B) and a jerk-limited deceleration ramp
//! (C). A ramp between two speeds is a triangular tangential-acceleration
//! pulse: jerk +J for half the ramp, -J for the other half, so
//!
//!   duration = 2*sqrt(dv/J),   distance = (v_lo + v_hi)*sqrt(dv/J).
//!
//! When the block is too short to climb to the set point and back, the
//! reachable peak solves  dist(v_entry -> v) + dist(v -> v_exit) = L.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, LimitBreakdown};
use crate::machine::{MachineParameters, NcuSettings, PlanarLimits};
use crate::toolpath::{ArcBlock, Toolpath};
use crate::transition::{
    effective_crossing, transition_feedrate, JunctionRecord, TransitionSpec,
};
use crate::geom::AngularPosition;

/// Default trace sampling step (s).
pub const DEFAULT_SAMPLE_STEP: f64 = 1e-3;

/// Bisection tolerance for peak-feed solves (m/s).
const PEAK_TOL: f64 = 1e-12;
/// Slack on arc-length feasibility checks (m).
const LEN_TOL: f64 = 1e-12;

/// Ramp distance from `v_lo` up to `v_hi` at jerk `j` (m).
pub fn ramp_distance(v_lo: f64, v_hi: f64, j: f64) -> f64 {
    let dv = (v_hi - v_lo).max(0.0);
    (v_lo + v_hi) * (dv / j).sqrt()
}

/// Ramp duration from `v_lo` up to `v_hi` at jerk `j` (s).
pub fn ramp_duration(v_lo: f64, v_hi: f64, j: f64) -> f64 {
    2.0 * ((v_hi - v_lo).max(0.0) / j).sqrt()
}

/// Highest speed reachable from `v_from` over `dist` metres at jerk `j`.
pub fn max_reachable(v_from: f64, dist: f64, j: f64) -> f64 {
    if dist <= 0.0 {
        return v_from;
    }
    let mut hi = v_from.max(1e-3);
    let mut guard = 0;
    while ramp_distance(v_from, hi, j) < dist {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return hi;
        }
    }
    let mut lo = v_from;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ramp_distance(v_from, mid, j) < dist {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < PEAK_TOL {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSolve {
    pub v_peak: f64,
    /// True when the block is long enough to hold the cap speed.
    pub has_plateau: bool,
}

/// Peak feed reachable on a block of length `arc_len` between boundary
/// speeds, capped at `v_cap`.
///
/// Errors when even staying at `max(v_start, v_end)` cannot bridge the
/// boundary speeds within the block; the caller must lower the entry speed.
pub fn solve_peak_feed(
    arc_len: f64,
    v_start: f64,
    v_end: f64,
    j: f64,
    v_cap: f64,
) -> Result<PeakSolve> {
    if !(arc_len > 0.0) {
        return Err(Error::InvalidArg(format!(
            "arc length must be positive, got {arc_len}"
        )));
    }
    if !(j > 0.0) {
        return Err(Error::InvalidArg(format!("jerk must be positive, got {j}")));
    }
    let lo = v_start.max(v_end);
    if v_cap < lo - 1e-15 {
        return Err(Error::InvalidArg(format!(
            "cap speed {v_cap} is below a boundary speed ({v_start}, {v_end})"
        )));
    }
    let need = |v: f64| ramp_distance(v_start, v, j) + ramp_distance(v_end, v, j);
    if need(lo) > arc_len + LEN_TOL {
        return Err(Error::Infeasible {
            block: 0,
            message: format!(
                "boundary speeds {:.6} -> {:.6} m/s need {:.6} m but the block is {:.6} m",
                v_start,
                v_end,
                need(lo),
                arc_len
            ),
        });
    }
    if need(v_cap) <= arc_len + LEN_TOL {
        return Ok(PeakSolve {
            v_peak: v_cap,
            has_plateau: true,
        });
    }
    let (mut a, mut b) = (lo, v_cap);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if need(mid) < arc_len {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < PEAK_TOL {
            break;
        }
    }
    Ok(PeakSolve {
        v_peak: 0.5 * (a + b),
        has_plateau: false,
    })
}

/// Feed law of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub v_entry: f64,
    pub v_exit: f64,
    pub v_peak: f64,
    /// Set point the plateau would hold (m/s).
    pub v_st: f64,
    pub has_phase_b: bool,
    /// Tangential jerk magnitude driving both ramps (m/s³).
    pub j_used: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub len_a: f64,
    pub len_b: f64,
    pub len_c: f64,
}

impl BlockPlan {
    pub fn total_time(&self) -> f64 {
        self.t_a + self.t_b + self.t_c
    }

    pub fn total_len(&self) -> f64 {
        self.len_a + self.len_b + self.len_c
    }

    /// Local kinematic state `(v, a_t, j_t, s)` at block-local time `tau`.
    ///
    /// Jerk is right-continuous: a sample on a phase or ramp-midpoint
    /// boundary carries the jerk of the segment it opens. Midpoint
    /// comparisons allow a 1e-12 s slack because sample times are rebuilt
    /// from sums of phase durations.
    pub fn eval(&self, tau: f64) -> (f64, f64, f64, f64) {
        const EDGE_TOL: f64 = 1e-12;
        let j = self.j_used;
        if tau < self.t_a {
            let half = 0.5 * self.t_a;
            if tau < half - EDGE_TOL {
                let v = self.v_entry + 0.5 * j * tau * tau;
                let s = self.v_entry * tau + j * tau * tau * tau / 6.0;
                (v, j * tau, j, s)
            } else {
                let sigma = self.t_a - tau;
                let v = self.v_peak - 0.5 * j * sigma * sigma;
                let s = self.len_a - (self.v_peak * sigma - j * sigma * sigma * sigma / 6.0);
                (v, j * sigma, -j, s)
            }
        } else if tau < self.t_a + self.t_b {
            let s = self.len_a + self.v_peak * (tau - self.t_a);
            (self.v_peak, 0.0, 0.0, s)
        } else if tau < self.total_time() {
            let u = tau - self.t_a - self.t_b;
            let half = 0.5 * self.t_c;
            if u < half - EDGE_TOL {
                let v = self.v_peak - 0.5 * j * u * u;
                let s = self.len_a + self.len_b + self.v_peak * u - j * u * u * u / 6.0;
                (v, -j * u, -j, s)
            } else {
                let sigma = self.t_c - u;
                let v = self.v_exit + 0.5 * j * sigma * sigma;
                let s = self.total_len() - (self.v_exit * sigma + j * sigma * sigma * sigma / 6.0);
                (v, -j * sigma, j, s)
            }
        } else {
            (self.v_exit, 0.0, 0.0, self.total_len())
        }
    }
}

/// Minimum tangential jerk over a block's angular span, capped by the
/// controller register. Interior minima of the jerk limit sit only on axis
/// directions, so endpoints plus crossed axis multiples suffice.
pub fn block_jerk(block: &ArcBlock, caps: &PlanarLimits, ncu: &NcuSettings) -> f64 {
    let (lo, hi) = if block.alpha_start <= block.alpha_end {
        (block.alpha_start, block.alpha_end)
    } else {
        (block.alpha_end, block.alpha_start)
    };
    let mut j = limits::tangential_jerk_limit(AngularPosition::new(lo), caps)
        .min(limits::tangential_jerk_limit(AngularPosition::new(hi), caps));
    let quarter = std::f64::consts::FRAC_PI_2;
    let mut k = (lo / quarter).ceil();
    while k * quarter <= hi {
        j = j.min(limits::tangential_jerk_limit(
            AngularPosition::new(k * quarter),
            caps,
        ));
        k += 1.0;
    }
    j.min(limits::ncu_tangential_jerk(ncu))
}

/// Plan one block between boundary speeds.
pub fn plan_block(
    block: &ArcBlock,
    v_entry: f64,
    v_exit: f64,
    v_st: f64,
    caps: &PlanarLimits,
    ncu: &NcuSettings,
) -> Result<BlockPlan> {
    if v_entry > v_st + 1e-12 || v_exit > v_st + 1e-12 {
        return Err(Error::InvalidArg(format!(
            "boundary speeds ({v_entry}, {v_exit}) exceed the set point {v_st}"
        )));
    }
    let arc_len = block.arc_len();
    let j = block_jerk(block, caps, ncu);
    let peak = solve_peak_feed(arc_len, v_entry, v_exit, j, v_st)?;
    let v_peak = peak.v_peak;
    let t_a = ramp_duration(v_entry, v_peak, j);
    let t_c = ramp_duration(v_exit, v_peak, j);
    let len_a = ramp_distance(v_entry, v_peak, j);
    let len_c = ramp_distance(v_exit, v_peak, j);
    // Solver residue on plateau-free blocks would otherwise leave a
    // zero-width phase B that still captures boundary samples.
    let mut len_b = (arc_len - len_a - len_c).max(0.0);
    if !peak.has_plateau || len_b <= LEN_TOL {
        len_b = 0.0;
    }
    let t_b = if v_peak > 0.0 { len_b / v_peak } else { 0.0 };
    Ok(BlockPlan {
        v_entry,
        v_exit,
        v_peak,
        v_st,
        has_phase_b: len_b > 0.0,
        j_used: j,
        t_a,
        t_b,
        t_c,
        len_a,
        len_b,
        len_c,
    })
}

/// One time-sampled kinematic record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// Time from path start (s).
    pub t: f64,
    /// Arc length from path start (m).
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// Feed (m/s).
    pub v_f: f64,
    /// Tangential acceleration (m/s²).
    pub a_t: f64,
    /// Normal acceleration (m/s²).
    pub a_n: f64,
    /// Tangential jerk (m/s³).
    pub j_t: f64,
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KinematicTrace {
    pub samples: Vec<TraceSample>,
}

impl KinematicTrace {
    /// CSV with the fixed header
    /// `t_s,s_m,x_mm,y_mm,v_m_min,at_m_s2,an_m_s2,jt_m_s3,block`.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "t_s,s_m,x_mm,y_mm,v_m_min,at_m_s2,an_m_s2,jt_m_s3,block")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.6},{:.9},{:.9},{:.9},{:.6},{:.6},{:.6},{:.6},{}",
                s.t,
                s.s,
                s.x * 1e3,
                s.y * 1e3,
                s.v_f * 60.0,
                s.a_t,
                s.a_n,
                s.j_t,
                s.block
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("csv is utf8")
    }
}

/// Full simulation output for one toolpath.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub breakdowns: Vec<LimitBreakdown>,
    pub junctions: Vec<JunctionRecord>,
    pub plans: Vec<BlockPlan>,
    pub trace: KinematicTrace,
    /// Total traversal time (s); equals the sum of phase durations.
    pub total_time: f64,
}

/// Simulate a toolpath at the default 1 ms sampling step.
pub fn simulate_toolpath(path: &Toolpath, machine: &MachineParameters) -> Result<Simulation> {
    simulate_toolpath_with(path, machine, DEFAULT_SAMPLE_STEP)
}

/// Simulate a toolpath.
///
/// Stage 1 computes the per-block set point; stage 2 the junction speeds
/// (crossing bound capped by both set points, then clamped to what the
/// neighbouring blocks can actually reach by accelerating forward and
/// decelerating backward); stage 3 plans every block and samples the trace.
pub fn simulate_toolpath_with(
    path: &Toolpath,
    machine: &MachineParameters,
    sample_step: f64,
) -> Result<Simulation> {
    if !(sample_step > 0.0) {
        return Err(Error::InvalidArg(format!(
            "sample step must be positive, got {sample_step}"
        )));
    }
    let violations = path.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidToolpath(violations));
    }
    let caps = machine.planar()?;
    let ncu = &machine.ncu;
    let n = path.blocks.len();

    // Stage 1: set points.
    let breakdowns: Vec<LimitBreakdown> = path
        .blocks
        .iter()
        .map(|b| limits::feed_setpoint(b, &caps, ncu))
        .collect();
    let jerks: Vec<f64> = path
        .blocks
        .iter()
        .map(|b| block_jerk(b, &caps, ncu))
        .collect();
    let lens: Vec<f64> = path.blocks.iter().map(|b| b.arc_len()).collect();

    // Stage 2: junction speeds. Interior junction j joins block j-1 to j.
    let mut vfr_raw: Vec<Option<f64>> = vec![None; n + 1];
    let mut caps_at: Vec<f64> = vec![0.0; n + 1];
    for j in 1..n {
        let up = &path.blocks[j - 1];
        let down = &path.blocks[j];
        let spec = TransitionSpec {
            r1: up.r,
            r2: down.r,
            alpha: AngularPosition::new(down.alpha_start),
            v_in_cap: breakdowns[j - 1].v_st,
        };
        let v_fr = transition_feedrate(&spec, &caps, ncu.delta_t);
        vfr_raw[j] = v_fr.is_finite().then_some(v_fr);
        caps_at[j] = effective_crossing(v_fr, breakdowns[j - 1].v_st, breakdowns[j].v_st);
    }

    let mut speeds = vec![0.0; n + 1];
    for j in 1..n {
        speeds[j] = caps_at[j].min(max_reachable(speeds[j - 1], lens[j - 1], jerks[j - 1]));
    }
    speeds[n] = 0.0;
    for j in (1..n).rev() {
        speeds[j] = speeds[j].min(max_reachable(speeds[j + 1], lens[j], jerks[j]));
    }

    let junctions: Vec<JunctionRecord> = (1..n)
        .map(|j| JunctionRecord {
            r1_m: path.blocks[j - 1].r,
            r2_m: path.blocks[j].r,
            alpha_rad: AngularPosition::new(path.blocks[j].alpha_start).rad(),
            jt_m_s3: crate::transition::transition_jerk(
                AngularPosition::new(path.blocks[j].alpha_start),
                &caps,
            ),
            vfr_m_s: vfr_raw[j],
            effective_m_s: speeds[j],
        })
        .collect();

    // Stage 3: per-block plans.
    let mut plans = Vec::with_capacity(n);
    for (i, block) in path.blocks.iter().enumerate() {
        let plan = plan_block(
            block,
            speeds[i],
            speeds[i + 1],
            breakdowns[i].v_st,
            &caps,
            ncu,
        )
        .map_err(|e| match e {
            Error::Infeasible { message, .. } => Error::Infeasible { block: i, message },
            other => other,
        })?;
        plans.push(plan);
    }
    let total_time: f64 = plans.iter().map(BlockPlan::total_time).sum();

    let trace = sample_trace(path, &plans, sample_step);
    Ok(Simulation {
        breakdowns,
        junctions,
        plans,
        trace,
        total_time,
    })
}

fn sample_trace(path: &Toolpath, plans: &[BlockPlan], step: f64) -> KinematicTrace {
    let mut samples = Vec::new();
    let mut t_block = 0.0;
    let mut s_block = 0.0;
    let mut next_grid = 0.0;
    for (i, (block, plan)) in path.blocks.iter().zip(plans).enumerate() {
        let t_end = t_block + plan.total_time();
        // Block-local sample times: phase boundaries (the ramp midpoints are
        // jerk sign flips and count as boundaries) plus the global grid.
        let mut locals = vec![
            0.0,
            0.5 * plan.t_a,
            plan.t_a,
            plan.t_a + plan.t_b,
            plan.t_a + plan.t_b + 0.5 * plan.t_c,
        ];
        while next_grid < t_end - 1e-12 {
            if next_grid >= t_block {
                locals.push(next_grid - t_block);
            }
            next_grid += step;
        }
        locals.retain(|&tau| tau >= 0.0 && tau < plan.total_time() - 1e-12);
        locals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        locals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for &tau in &locals {
            samples.push(make_sample(block, plan, i, t_block, s_block, tau));
        }
        // Block end belongs to the next block except for the path end.
        if i + 1 == path.blocks.len() {
            let tau = plan.total_time();
            samples.push(make_sample(block, plan, i, t_block, s_block, tau));
        }
        t_block = t_end;
        s_block += plan.total_len();
    }
    KinematicTrace { samples }
}

fn make_sample(
    block: &ArcBlock,
    plan: &BlockPlan,
    index: usize,
    t_block: f64,
    s_block: f64,
    tau: f64,
) -> TraceSample {
    let (v, a_t, j_t, s_local) = plan.eval(tau);
    let p = block.point_at_arclen(s_local);
    TraceSample {
        t: t_block + tau,
        s: s_block + s_local,
        x: p.x,
        y: p.y,
        v_f: v,
        a_t,
        a_n: v * v / block.r,
        j_t,
        block: index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::AxisCapacity;
    use crate::toolpath::{circle_path, spiral_path, SpiralParams};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn machine() -> MachineParameters {
        MachineParameters::new(
            vec![
                AxisCapacity { name: "X".into(), v_max: 0.5, a_max: 2.5, j_max: 5.0 },
                AxisCapacity { name: "Y".into(), v_max: 0.5, a_max: 3.0, j_max: 5.0 },
            ],
            NcuSettings {
                j_curv: 10.0,
                r_jct: 0.6,
                r_jcc: 0.4,
                t_cy: 0.012,
                delta_t: 0.012,
            },
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn close_rel(a: f64, b: f64, rel: f64) {
        assert!((a / b - 1.0).abs() <= rel, "{a} vs {b} (rel {rel})");
    }

    #[test]
    fn peak_at_zero_boundaries_has_closed_form() {
        // dist(0 -> v) = v^(3/2)/sqrt(J); both ramps: L = 2 v^(3/2)/sqrt(J).
        let sol = solve_peak_feed(0.010, 0.0, 0.0, 5.0, 10.0).unwrap();
        assert!(!sol.has_plateau);
        close(sol.v_peak, 0.05, 1e-9);
        close_rel(sol.v_peak * 60.0, 3.0, 1e-6);
    }

    #[test]
    fn steady_boundaries_keep_a_plateau() {
        let sol = solve_peak_feed(0.005, 0.08, 0.08, 5.0, 0.08).unwrap();
        assert!(sol.has_plateau);
        close(sol.v_peak, 0.08, 0.0);
    }

    #[test]
    fn infeasible_boundary_pair_is_reported() {
        // 0 -> 0.2 m/s needs (0.2)*sqrt(0.2/5) = 0.04 m; give it less.
        let err = solve_peak_feed(0.02, 0.0, 0.2, 5.0, 0.3).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn quarter_arc_peak_stays_below_set_point() {
        let v_st = 5.0606 / 60.0;
        let sol = solve_peak_feed(FRAC_PI_2 * 0.010, 0.0, 0.06, 5.0, v_st).unwrap();
        assert!(!sol.has_plateau);
        assert!(sol.v_peak < v_st);
        close_rel(sol.v_peak * 60.0, 4.39, 2e-2);
    }

    #[test]
    fn solver_matches_brute_force_ramp_integration() {
        // Independent route: build v(t) by integrating the piecewise
        // constant jerk, integrate again for distance, then bisect on the
        // peak speed against that distance.
        fn brute_ramp_distance(v_lo: f64, v_hi: f64, j: f64) -> f64 {
            let t_total = 2.0 * ((v_hi - v_lo) / j).sqrt();
            let n = 4096usize;
            let h = t_total / n as f64;
            let mut a = 0.0;
            let mut v = v_lo;
            let mut d = 0.0;
            for k in 0..n {
                let t = k as f64 * h;
                let jerk = if t < 0.5 * t_total { j } else { -j };
                let v0 = v;
                let a0 = a;
                a += jerk * h;
                v += 0.5 * (a0 + a) * h;
                d += 0.5 * (v0 + v) * h;
            }
            d
        }
        fn brute_peak(arc_len: f64, v_s: f64, v_e: f64, j: f64, cap: f64) -> f64 {
            let need =
                |v: f64| brute_ramp_distance(v_s, v, j) + brute_ramp_distance(v_e, v, j);
            if need(cap) <= arc_len {
                return cap;
            }
            let (mut a, mut b) = (v_s.max(v_e), cap);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if need(mid) < arc_len {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let v_s: f64 = rng.gen_range(0.0..0.5);
            let v_e: f64 = rng.gen_range(0.0..0.5);
            let j: f64 = rng.gen_range(0.5..60.0);
            let cap = v_s.max(v_e) + rng.gen_range(1e-4..0.8);
            let min_len = ramp_distance(v_s.min(v_e), v_s.max(v_e), j);
            let arc_len = min_len * 1.01 + rng.gen_range(1e-5..0.3);
            let got = solve_peak_feed(arc_len, v_s, v_e, j, cap).unwrap().v_peak;
            let want = brute_peak(arc_len, v_s, v_e, j, cap);
            assert!(
                (got - want).abs() <= 1e-6,
                "peak {got} vs brute {want} (vs={v_s}, ve={v_e}, j={j}, cap={cap}, L={arc_len})"
            );
        }
    }

    #[test]
    fn standalone_large_circle_plan() {
        let m = machine();
        let path = circle_path(0.03, 0.1).unwrap();
        let sim = simulate_toolpath(&path, &m).unwrap();
        let plan = &sim.plans[0];
        assert!(plan.has_phase_b);
        close_rel(plan.v_peak, 0.1, 1e-9);
        close(plan.t_a, 2.0 * (0.1f64 / 5.0).sqrt(), 1e-9); // 0.283 s
        close(plan.j_used, 5.0, 0.0);
        // peak tangential acceleration of the ramp
        let peak_at = sim
            .trace
            .samples
            .iter()
            .map(|s| s.a_t)
            .fold(0.0f64, f64::max);
        close_rel(peak_at, (5.0f64 * 0.1).sqrt(), 1e-4); // 0.707 m/s²
        // plateau normal acceleration
        let mid = sim
            .trace
            .samples
            .iter()
            .find(|s| s.t > plan.t_a && s.t < plan.t_a + plan.t_b)
            .unwrap();
        close_rel(mid.a_n, 0.1 * 0.1 / 0.03, 1e-9); // 0.333 m/s²
        close_rel(sim.total_time, 2.1678, 1e-3);
    }

    #[test]
    fn standalone_small_circle_plan() {
        let m = machine();
        let path = circle_path(0.0025, 0.1).unwrap();
        let sim = simulate_toolpath(&path, &m).unwrap();
        let plan = &sim.plans[0];
        assert!(plan.has_phase_b);
        close_rel(plan.v_peak * 60.0, 2.0083, 1e-3);
        let a_n = plan.v_peak * plan.v_peak / 0.0025;
        close_rel(a_n, 0.4481, 1e-3);
        close_rel(a_n, 0.444, 2e-2);
    }

    #[test]
    fn semispiral_first_arc_holds_reduced_steady_feed() {
        let m = machine();
        let path = spiral_path(
            PI,
            &SpiralParams {
                r_start: 0.010,
                r_end: 0.030,
                step: 0.005,
                incline: 0.0,
                feed: 0.1,
            },
        )
        .unwrap();
        let sim = simulate_toolpath(&path, &m).unwrap();
        assert!(sim.plans[0].has_phase_b);
        close_rel(sim.plans[0].v_peak * 60.0, 5.0606, 1e-3);
    }

    #[test]
    fn trace_invariants_hold() {
        let m = machine();
        let path = spiral_path(
            FRAC_PI_2,
            &SpiralParams {
                r_start: 0.010,
                r_end: 0.030,
                step: 0.002,
                incline: 30f64.to_radians(),
                feed: 0.2,
            },
        )
        .unwrap();
        let sim = simulate_toolpath(&path, &m).unwrap();
        // strictly increasing time
        for w in sim.trace.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        // normal acceleration identity, jerk levels, ramp acceleration bound
        for s in &sim.trace.samples {
            let plan = &sim.plans[s.block];
            let r = path.blocks[s.block].r;
            let expect = s.v_f * s.v_f / r;
            assert!((s.a_n - expect).abs() <= 1e-9 * expect.max(1.0));
            assert!(s.j_t.abs() <= plan.j_used + 1e-12);
            let level_ok = [-plan.j_used, 0.0, plan.j_used]
                .iter()
                .any(|l| (s.j_t - l).abs() <= 1e-12);
            assert!(level_ok, "jerk {} is not a plateau level", s.j_t);
            let dv = plan.v_peak - plan.v_entry.min(plan.v_exit);
            assert!(s.a_t.abs() <= (plan.j_used * dv).sqrt() + 1e-12);
        }
        // boundary speeds appear in the trace at junction times
        let mut t = 0.0;
        for (i, plan) in sim.plans.iter().enumerate().skip(1) {
            t += sim.plans[i - 1].total_time();
            let at_junction = sim
                .trace
                .samples
                .iter()
                .find(|s| (s.t - t).abs() < 1e-9)
                .unwrap();
            close(at_junction.v_f, plan.v_entry, 1e-9);
            let _ = plan;
        }
        // total time equals the sum of phase durations
        let sum: f64 = sim.plans.iter().map(BlockPlan::total_time).sum();
        close(sim.total_time, sum, 1e-9);
        close(sim.trace.samples.last().unwrap().t, sum, 1e-9);
    }

    #[test]
    fn csv_has_fixed_header() {
        let m = machine();
        let sim = simulate_toolpath(&circle_path(0.03, 0.1).unwrap(), &m).unwrap();
        let csv = sim.trace.to_csv_string();
        assert!(csv.starts_with("t_s,s_m,x_mm,y_mm,v_m_min,at_m_s2,an_m_s2,jt_m_s3,block\n"));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), sim.trace.samples.len() + 1);
    }
}
