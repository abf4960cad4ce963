//! Machine and controller capacity data.
//!
//! A machine file carries per-axis capacities plus the controller settings
//! that shape circular interpolation: the curvilinear jerk register, the
//! tangential/central jerk rates, the interpolator cycle time and the
//! transition crossing time. File units follow machining convention
//! (mm/min, m/s², m/s³, ms); loaded values are strict SI.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Kinematic capacity of one axis, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisCapacity {
    pub name: String,
    /// Maximum axis speed (m/s).
    pub v_max: f64,
    /// Maximum axis acceleration (m/s²).
    pub a_max: f64,
    /// Maximum axis jerk (m/s³).
    pub j_max: f64,
}

impl AxisCapacity {
    fn validate(&self) -> Result<()> {
        let check = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::MachineParam {
                    field: format!("{}.{}", self.name, field),
                    message: format!("must be positive and finite, got {v}"),
                })
            }
        };
        check("v_max", self.v_max)?;
        check("a_max", self.a_max)?;
        check("j_max", self.j_max)
    }
}

/// Controller settings, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcuSettings {
    /// Curvilinear jerk register (m/s³).
    pub j_curv: f64,
    /// Rate of curvilinear jerk allowed in tangential jerk, 0..=1.
    pub r_jct: f64,
    /// Rate of curvilinear jerk allowed in central jerk, 0..=1.
    /// Stored for completeness; no feed limit is derived from it.
    pub r_jcc: f64,
    /// Interpolation cycle time (s).
    pub t_cy: f64,
    /// Transition block crossing time (s).
    pub delta_t: f64,
}

impl NcuSettings {
    fn validate(&self) -> Result<()> {
        let err = |field: &str, message: String| Error::MachineParam {
            field: format!("ncu.{field}"),
            message,
        };
        if !(self.j_curv > 0.0 && self.j_curv.is_finite()) {
            return Err(err("j_curv", format!("must be positive, got {}", self.j_curv)));
        }
        if !(self.r_jct > 0.0 && self.r_jct <= 1.0) {
            return Err(err("r_jct", format!("must be in (0, 1], got {}", self.r_jct)));
        }
        if !(self.r_jcc >= 0.0 && self.r_jcc <= 1.0) {
            return Err(err("r_jcc", format!("must be in [0, 1], got {}", self.r_jcc)));
        }
        if !(self.t_cy > 0.0 && self.t_cy.is_finite()) {
            return Err(err("t_cy", format!("must be positive, got {}", self.t_cy)));
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(err("delta_t", format!("must be positive, got {}", self.delta_t)));
        }
        Ok(())
    }
}

/// Planar (X, Y) capacities in the index order used by the limit formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarLimits {
    /// [X, Y] maximum speeds (m/s).
    pub v_max: [f64; 2],
    /// [X, Y] maximum accelerations (m/s²).
    pub a_max: [f64; 2],
    /// [X, Y] maximum jerks (m/s³).
    pub j_max: [f64; 2],
}

/// Full machine description. Immutable after load; cheap to share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineParameters {
    pub axes: Vec<AxisCapacity>,
    pub ncu: NcuSettings,
}

impl MachineParameters {
    pub fn new(axes: Vec<AxisCapacity>, ncu: NcuSettings) -> Result<Self> {
        let m = Self { axes, ncu };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for axis in &self.axes {
            axis.validate()?;
        }
        self.ncu.validate()?;
        for name in ["X", "Y"] {
            if self.axis(name).is_none() {
                return Err(Error::MachineParam {
                    field: format!("axes.{name}"),
                    message: "planar simulation needs X and Y axes".into(),
                });
            }
        }
        Ok(())
    }

    pub fn axis(&self, name: &str) -> Option<&AxisCapacity> {
        self.axes.iter().find(|a| a.name.eq_ignore_ascii_case(name))
    }

    /// X/Y capacities for the planar limit formulas. Axes beyond X and Y
    /// (Z, rotary) are carried but ignored here.
    pub fn planar(&self) -> Result<PlanarLimits> {
        let x = self.axis("X").ok_or_else(|| Error::MachineParam {
            field: "axes.X".into(),
            message: "missing".into(),
        })?;
        let y = self.axis("Y").ok_or_else(|| Error::MachineParam {
            field: "axes.Y".into(),
            message: "missing".into(),
        })?;
        Ok(PlanarLimits {
            v_max: [x.v_max, y.v_max],
            a_max: [x.a_max, y.a_max],
            j_max: [x.j_max, y.j_max],
        })
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let file: MachineFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        let m = file.into_si();
        m.validate()?;
        Ok(m)
    }

    pub fn to_json_string(&self) -> String {
        let file = MachineFile::from_si(self);
        let mut out = serde_json::to_string_pretty(&file).expect("machine file serializes");
        out.push('\n');
        out
    }
}

/// On-disk schema, machining units. Spindle data may be present in real
/// machine files; it is accepted and ignored.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    axes: Vec<AxisFileEntry>,
    ncu: NcuFileEntry,
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    spindle: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisFileEntry {
    name: String,
    vmax_mm_min: f64,
    amax_m_s2: f64,
    jmax_m_s3: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NcuFileEntry {
    jcurv_m_s3: f64,
    rjct: f64,
    rjcc: f64,
    tcy_ms: f64,
    /// Transition crossing time; defaults to the interpolator cycle time.
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_ms: Option<f64>,
}

/// File-unit value that loads back to exactly `si` when divided by
/// `divisor`. The rounded product can land one ulp off the preimage of
/// `si`, so nearby representables are tried until the division inverts.
fn file_value_for(si: f64, divisor: f64) -> f64 {
    let y0 = si * divisor;
    if y0 / divisor == si {
        return y0;
    }
    let step = |v: f64, up: bool| -> f64 {
        if v == 0.0 {
            return if up { f64::MIN_POSITIVE } else { -f64::MIN_POSITIVE };
        }
        let bits = v.to_bits();
        let next = if (v > 0.0) == up { bits + 1 } else { bits - 1 };
        f64::from_bits(next)
    };
    let mut up = y0;
    let mut down = y0;
    for _ in 0..4 {
        up = step(up, true);
        if up / divisor == si {
            return up;
        }
        down = step(down, false);
        if down / divisor == si {
            return down;
        }
    }
    y0
}

impl MachineFile {
    fn into_si(self) -> MachineParameters {
        let axes = self
            .axes
            .into_iter()
            .map(|a| AxisCapacity {
                name: a.name,
                v_max: units::mm_min_to_m_s(a.vmax_mm_min),
                a_max: a.amax_m_s2,
                j_max: a.jmax_m_s3,
            })
            .collect();
        let t_cy = units::ms_to_s(self.ncu.tcy_ms);
        MachineParameters {
            axes,
            ncu: NcuSettings {
                j_curv: self.ncu.jcurv_m_s3,
                r_jct: self.ncu.rjct,
                r_jcc: self.ncu.rjcc,
                t_cy,
                delta_t: self.ncu.dt_ms.map(units::ms_to_s).unwrap_or(t_cy),
            },
        }
    }

    fn from_si(m: &MachineParameters) -> Self {
        MachineFile {
            axes: m
                .axes
                .iter()
                .map(|a| AxisFileEntry {
                    name: a.name.clone(),
                    vmax_mm_min: file_value_for(a.v_max, units::MM_MIN_PER_M_S),
                    amax_m_s2: a.a_max,
                    jmax_m_s3: a.j_max,
                })
                .collect(),
            ncu: NcuFileEntry {
                jcurv_m_s3: m.ncu.j_curv,
                rjct: m.ncu.r_jct,
                rjcc: m.ncu.r_jcc,
                tcy_ms: file_value_for(m.ncu.t_cy, units::MS_PER_S),
                dt_ms: Some(file_value_for(m.ncu.delta_t, units::MS_PER_S)),
            },
            spindle: None,
        }
    }
}

pub fn load_machine(path: &Path) -> Result<MachineParameters> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    MachineParameters::from_json_str(&text, path)
}

pub fn save_machine(machine: &MachineParameters, path: &Path) -> Result<()> {
    fs::write(path, machine.to_json_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
