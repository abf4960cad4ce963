//! Unit conversions between machining I/O units and internal SI.
//!
//! Files and the CLI speak mm, mm/min, degrees and milliseconds; everything
//! inside the crate is metres, seconds and radians.

pub const MM_PER_M: f64 = 1_000.0;
pub const MM_MIN_PER_M_S: f64 = 60_000.0;
pub const M_MIN_PER_M_S: f64 = 60.0;
pub const MS_PER_S: f64 = 1_000.0;

pub fn mm_to_m(v: f64) -> f64 {
    v / MM_PER_M
}

pub fn m_to_mm(v: f64) -> f64 {
    v * MM_PER_M
}

pub fn mm_min_to_m_s(v: f64) -> f64 {
    v / MM_MIN_PER_M_S
}

pub fn m_s_to_mm_min(v: f64) -> f64 {
    v * MM_MIN_PER_M_S
}

pub fn m_s_to_m_min(v: f64) -> f64 {
    v * M_MIN_PER_M_S
}

pub fn m_min_to_m_s(v: f64) -> f64 {
    v / M_MIN_PER_M_S
}

pub fn ms_to_s(v: f64) -> f64 {
    v / MS_PER_S
}

pub fn s_to_ms(v: f64) -> f64 {
    v * MS_PER_S
}
