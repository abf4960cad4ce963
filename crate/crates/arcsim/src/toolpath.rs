//! Arc-block geometry, test-trajectory generators and path validation.
//!
//! A toolpath is an ordered list of circular blocks. Consecutive blocks must
//! join without a position or tangent gap; only the curvature (radius) may
//! jump at a junction. Junction crossing speeds for those curvature jumps
//! live in the `transition` module.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{radial_dir, Point2};
use crate::units;

/// Junction position tolerance (m).
pub const POSITION_TOL: f64 = 1e-9;
/// Junction tangent tolerance (rad).
pub const TANGENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcDirection {
    /// Standard polar angle decreasing (G2).
    Cw,
    /// Standard polar angle increasing (G3).
    Ccw,
}

/// One circular block.
///
/// Angles use the crate convention `p(alpha) = center + r*(sin a, cos a)`;
/// the sweep `alpha_end - alpha_start` is signed, positive for clockwise
/// travel. A full circle has `|sweep| == 2*pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcBlock {
    pub center: Point2,
    /// Radius (m).
    pub r: f64,
    /// Angular position at block start (rad).
    pub alpha_start: f64,
    /// Angular position at block end (rad).
    pub alpha_end: f64,
    /// Programmed feed (m/s).
    pub v_prog: f64,
}

impl ArcBlock {
    pub fn new(
        center: Point2,
        r: f64,
        alpha_start: f64,
        alpha_end: f64,
        v_prog: f64,
    ) -> Result<Self> {
        let block = Self::new_unchecked(center, r, alpha_start, alpha_end, v_prog);
        match block.local_violation(0) {
            None => Ok(block),
            Some(v) => Err(Error::InvalidToolpath(vec![v])),
        }
    }

    /// Builds without validation; pair with [`validate_blocks`].
    pub fn new_unchecked(
        center: Point2,
        r: f64,
        alpha_start: f64,
        alpha_end: f64,
        v_prog: f64,
    ) -> Self {
        Self {
            center,
            r,
            alpha_start,
            alpha_end,
            v_prog,
        }
    }

    pub fn sweep(&self) -> f64 {
        self.alpha_end - self.alpha_start
    }

    pub fn direction(&self) -> ArcDirection {
        if self.sweep() >= 0.0 {
            ArcDirection::Cw
        } else {
            ArcDirection::Ccw
        }
    }

    pub fn arc_len(&self) -> f64 {
        self.r * self.sweep().abs()
    }

    pub fn point_at_angle(&self, alpha: f64) -> Point2 {
        let u = radial_dir(alpha);
        Point2::new(self.center.x + self.r * u.x, self.center.y + self.r * u.y)
    }

    /// Angular position after `s` metres of travel from the block start.
    pub fn angle_at_arclen(&self, s: f64) -> f64 {
        self.alpha_start + self.sweep().signum() * s / self.r
    }

    pub fn point_at_arclen(&self, s: f64) -> Point2 {
        self.point_at_angle(self.angle_at_arclen(s))
    }

    /// Unit tangent in the direction of travel at angular position `alpha`.
    pub fn tangent_at_angle(&self, alpha: f64) -> Point2 {
        let sign = self.sweep().signum();
        Point2::new(sign * alpha.cos(), -sign * alpha.sin())
    }

    pub fn start_point(&self) -> Point2 {
        self.point_at_angle(self.alpha_start)
    }

    pub fn end_point(&self) -> Point2 {
        self.point_at_angle(self.alpha_end)
    }

    fn local_violation(&self, index: usize) -> Option<Violation> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Some(Violation::NonPositiveRadius {
                block: index,
                r: self.r,
            });
        }
        if self.sweep() == 0.0 || !self.sweep().is_finite() {
            return Some(Violation::EmptySweep { block: index });
        }
        if !(self.v_prog > 0.0 && self.v_prog.is_finite()) {
            return Some(Violation::NonPositiveFeed {
                block: index,
                v: self.v_prog,
            });
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveRadius { block: usize, r: f64 },
    EmptySweep { block: usize },
    NonPositiveFeed { block: usize, v: f64 },
    PositionGap { junction: usize, gap_m: f64 },
    TangentBreak { junction: usize, gap_rad: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRadius { block, r } => {
                write!(f, "block {block}: radius must be positive, got {r}")
            }
            Violation::EmptySweep { block } => {
                write!(f, "block {block}: arc sweep must be non-zero")
            }
            Violation::NonPositiveFeed { block, v } => {
                write!(f, "block {block}: programmed feed must be positive, got {v}")
            }
            Violation::PositionGap { junction, gap_m } => write!(
                f,
                "junction {junction}: position gap of {gap_m:.3e} m between blocks {} and {junction}",
                junction - 1
            ),
            Violation::TangentBreak { junction, gap_rad } => write!(
                f,
                "junction {junction}: tangent break of {gap_rad:.3e} rad between blocks {} and {junction}",
                junction - 1
            ),
        }
    }
}

/// Checks block-local invariants and junction continuity. Empty result
/// means the block list forms a valid toolpath.
pub fn validate_blocks(blocks: &[ArcBlock]) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        if let Some(v) = b.local_violation(i) {
            violations.push(v);
        }
    }
    for i in 1..blocks.len() {
        let prev = &blocks[i - 1];
        let next = &blocks[i];
        if prev.local_violation(i - 1).is_some() || next.local_violation(i).is_some() {
            continue; // junction checks need well-formed arcs
        }
        let gap = prev.end_point().dist(&next.start_point());
        if gap > POSITION_TOL {
            violations.push(Violation::PositionGap {
                junction: i,
                gap_m: gap,
            });
            continue;
        }
        let t_prev = prev.tangent_at_angle(prev.alpha_end);
        let t_next = next.tangent_at_angle(next.alpha_start);
        let cross = t_prev.x * t_next.y - t_prev.y * t_next.x;
        let dot = t_prev.x * t_next.x + t_prev.y * t_next.y;
        let gap_rad = cross.atan2(dot).abs();
        if gap_rad > TANGENT_TOL {
            violations.push(Violation::TangentBreak {
                junction: i,
                gap_rad,
            });
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq)]
pub struct Toolpath {
    pub blocks: Vec<ArcBlock>,
}

impl Toolpath {
    pub fn from_blocks(blocks: Vec<ArcBlock>) -> Result<Self> {
        let violations = validate_blocks(&blocks);
        if violations.is_empty() {
            Ok(Self { blocks })
        } else {
            Err(Error::InvalidToolpath(violations))
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_blocks(&self.blocks)
    }

    pub fn total_len(&self) -> f64 {
        self.blocks.iter().map(|b| b.arc_len()).sum()
    }
}

/// Generator parameters for the built-in test trajectories.
#[derive(Debug, Clone, PartialEq)]
pub enum TestPath {
    /// Single full circle.
    Circle { radius: f64, feed: f64 },
    /// Half-circle arcs of stepwise increasing radius, tangent junctions.
    SemiSpiral(SpiralParams),
    /// Quarter-circle arcs of stepwise increasing radius.
    QuarterSpiral(SpiralParams),
    /// Approach arc, full machining circle, clearance arc.
    Bore(BoreParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralParams {
    /// First arc radius (m).
    pub r_start: f64,
    /// Last arc radius (m).
    pub r_end: f64,
    /// Radius increment between arcs (m).
    pub step: f64,
    /// Rotation applied to every junction angular position (rad).
    pub incline: f64,
    /// Programmed feed (m/s).
    pub feed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoreParams {
    /// Tool diameter (m).
    pub tool_dia: f64,
    /// Bore diameter (m).
    pub bore_dia: f64,
    /// Approach / clearance arc radius (m).
    pub approach_radius: f64,
    /// Angular span of the approach and clearance arcs (rad).
    pub approach_span: f64,
    /// Programmed feed (m/s).
    pub feed: f64,
}

impl BoreParams {
    /// Radius of the tool-center circle that machines the bore wall.
    pub fn circle_radius(&self) -> f64 {
        (self.bore_dia - self.tool_dia) / 2.0
    }
}

pub fn generate_test_path(kind: &TestPath) -> Result<Toolpath> {
    match kind {
        TestPath::Circle { radius, feed } => circle_path(*radius, *feed),
        TestPath::SemiSpiral(p) => spiral_path(PI, p),
        TestPath::QuarterSpiral(p) => spiral_path(FRAC_PI_2, p),
        TestPath::Bore(p) => bore_path(p),
    }
}

/// Full circle around the origin, counter-clockwise, starting at the top.
pub fn circle_path(radius: f64, feed: f64) -> Result<Toolpath> {
    let block = ArcBlock::new(Point2::new(0.0, 0.0), radius, 0.0, -TAU, feed)?;
    Toolpath::from_blocks(vec![block])
}

/// Spiral of arcs with radii `r_start, r_start+step, .., r_end`.
///
/// Junction `k` sits at angular position `incline + k*span`, so the
/// non-inclined junctions of half and quarter spirals fall on axis
/// directions. Tangency holds by construction: consecutive centers are
/// offset along the junction radial direction by the radius step.
pub fn spiral_path(span: f64, p: &SpiralParams) -> Result<Toolpath> {
    if !(p.r_start > 0.0) {
        return Err(Error::InvalidArg(format!(
            "spiral start radius must be positive, got {}",
            p.r_start
        )));
    }
    if !(p.step > 0.0) {
        return Err(Error::InvalidArg(format!(
            "spiral radius step must be positive, got {}",
            p.step
        )));
    }
    if p.r_end < p.r_start {
        return Err(Error::InvalidArg(format!(
            "spiral end radius {} is below start radius {}",
            p.r_end, p.r_start
        )));
    }
    let n_arcs = ((p.r_end - p.r_start) / p.step + 1e-9).floor() as usize + 1;
    let mut blocks = Vec::with_capacity(n_arcs);
    let mut center = Point2::new(0.0, 0.0);
    let mut radius = p.r_start;
    for k in 0..n_arcs {
        let a_start = p.incline + k as f64 * span;
        let a_end = a_start + span;
        blocks.push(ArcBlock::new(center, radius, a_start, a_end, p.feed)?);
        let next_radius = radius + p.step;
        let u = radial_dir(a_end);
        center = Point2::new(
            center.x + (radius - next_radius) * u.x,
            center.y + (radius - next_radius) * u.y,
        );
        radius = next_radius;
    }
    Toolpath::from_blocks(blocks)
}

/// Bore machining path: approach arc, full tool-center circle, clearance arc.
///
/// Both junctions sit at angular position 0 in the crate convention, with
/// the approach and clearance arcs internally tangent to the machining
/// circle.
pub fn bore_path(p: &BoreParams) -> Result<Toolpath> {
    let r_circle = p.circle_radius();
    if !(r_circle > 0.0) {
        return Err(Error::InvalidArg(format!(
            "bore diameter {} must exceed tool diameter {}",
            p.bore_dia, p.tool_dia
        )));
    }
    if !(p.approach_radius > 0.0) {
        return Err(Error::InvalidArg(format!(
            "approach radius must be positive, got {}",
            p.approach_radius
        )));
    }
    if !(p.approach_span > 0.0 && p.approach_span <= TAU) {
        return Err(Error::InvalidArg(format!(
            "approach span must be in (0, 2*pi], got {}",
            p.approach_span
        )));
    }
    let side_center = Point2::new(0.0, r_circle - p.approach_radius);
    let blocks = vec![
        ArcBlock::new(
            side_center,
            p.approach_radius,
            -p.approach_span,
            0.0,
            p.feed,
        )?,
        ArcBlock::new(Point2::new(0.0, 0.0), r_circle, 0.0, TAU, p.feed)?,
        ArcBlock::new(
            side_center,
            p.approach_radius,
            TAU,
            TAU + p.approach_span,
            p.feed,
        )?,
    ];
    Toolpath::from_blocks(blocks)
}

/// On-disk arc schema: mm, degrees in the standard polar convention
/// (counter-clockwise positive from +X), mm/min.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcFileEntry {
    cx_mm: f64,
    cy_mm: f64,
    r_mm: f64,
    a_start_deg: f64,
    a_end_deg: f64,
    dir: ArcDirection,
    feed_mm_min: f64,
}

impl ArcFileEntry {
    fn into_block(self, index: usize, origin: &Path) -> Result<ArcBlock> {
        let sweep_deg = match self.dir {
            ArcDirection::Ccw => self.a_end_deg - self.a_start_deg,
            ArcDirection::Cw => self.a_start_deg - self.a_end_deg,
        };
        if sweep_deg <= 0.0 || sweep_deg > 360.0 + 1e-9 {
            return Err(Error::Schema {
                path: origin.to_path_buf(),
                message: format!(
                    "arc {index}: {:?} sweep from {} to {} deg must be in (0, 360]",
                    self.dir, self.a_start_deg, self.a_end_deg
                ),
            });
        }
        let alpha_start = (90.0 - self.a_start_deg).to_radians();
        let sweep = match self.dir {
            ArcDirection::Ccw => -sweep_deg.to_radians(),
            ArcDirection::Cw => sweep_deg.to_radians(),
        };
        ArcBlock::new(
            Point2::new(units::mm_to_m(self.cx_mm), units::mm_to_m(self.cy_mm)),
            units::mm_to_m(self.r_mm),
            alpha_start,
            alpha_start + sweep,
            units::mm_min_to_m_s(self.feed_mm_min),
        )
    }

    fn from_block(b: &ArcBlock) -> Self {
        let a_start_deg = (90.0 - b.alpha_start.to_degrees()).rem_euclid(360.0);
        let sweep_deg = b.sweep().abs().to_degrees();
        let (dir, a_end_deg) = match b.direction() {
            ArcDirection::Ccw => (ArcDirection::Ccw, a_start_deg + sweep_deg),
            ArcDirection::Cw => (ArcDirection::Cw, a_start_deg - sweep_deg),
        };
        ArcFileEntry {
            cx_mm: units::m_to_mm(b.center.x),
            cy_mm: units::m_to_mm(b.center.y),
            r_mm: units::m_to_mm(b.r),
            a_start_deg,
            a_end_deg,
            dir,
            feed_mm_min: units::m_s_to_mm_min(b.v_prog),
        }
    }
}

pub fn toolpath_from_json_str(text: &str, origin: &Path) -> Result<Toolpath> {
    let entries: Vec<ArcFileEntry> = serde_json::from_str(text).map_err(|e| Error::Schema {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let blocks = entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.into_block(i, origin))
        .collect::<Result<Vec<_>>>()?;
    Toolpath::from_blocks(blocks)
}

pub fn toolpath_to_json_string(path: &Toolpath) -> String {
    let entries: Vec<ArcFileEntry> = path.blocks.iter().map(ArcFileEntry::from_block).collect();
    let mut out = serde_json::to_string_pretty(&entries).expect("toolpath serializes");
    out.push('\n');
    out
}

pub fn load_toolpath(path: &Path) -> Result<Toolpath> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toolpath_from_json_str(&text, path)
}

pub fn save_toolpath(toolpath: &Toolpath, path: &Path) -> Result<()> {
    fs::write(path, toolpath_to_json_string(toolpath)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
