//! Kinematic simulator and analyzer for circular-interpolated toolpaths.
//!
//! Given a machine description (axis speed/acceleration/jerk capacities and
//! controller settings) and a toolpath made of tangent circular blocks, the
//! crate predicts the feed-rate law each block can actually hold, the
//! crossing speeds at curvature discontinuities, the resulting machining
//! time, and a time-sampled kinematic trace. A separate metrics module
//! computes circularity and radial-deviation indexes on sampled XY data.

pub mod error;
pub mod gcode;
pub mod geom;
pub mod limits;
pub mod machine;
pub mod metrics;
pub mod plot;
pub mod profile;
pub mod toolpath;
pub mod transition;
pub mod units;

pub use error::{Error, Result};
pub use geom::{AngularPosition, Point2};
pub use machine::{load_machine, save_machine, AxisCapacity, MachineParameters, NcuSettings, PlanarLimits};
pub use metrics::{circularity_g, fit_circle, radial_deviation, CircleFit, CircularityReport};
pub use profile::{
    plan_block, simulate_toolpath, simulate_toolpath_with, solve_peak_feed, BlockPlan,
    KinematicTrace, Simulation, TraceSample, DEFAULT_SAMPLE_STEP,
};
pub use limits::{feed_setpoint, BindingTerm, LimitBreakdown};
pub use toolpath::{
    bore_path, circle_path, generate_test_path, load_toolpath, save_toolpath, spiral_path,
    ArcBlock, ArcDirection, BoreParams, SpiralParams, TestPath, Toolpath, Violation,
};
pub use transition::{transition_feedrate, transition_jerk, JunctionRecord, TransitionSpec};
