//! Parser for a restricted arc-only G-code dialect.
//!
//! Supported: G17 plane selection, G21 (mm), G90 (absolute), G64, modal F in
//! mm/min, and G2/G3 arcs with X Y end coordinates and I J center offsets.
//! G0 may reposition the tool before the first arc. Everything else is
//! rejected with the offending word; linear cutting moves (G1) are out of
//! scope for the simulation core.

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::toolpath::{validate_blocks, ArcBlock, Toolpath, Violation};
use crate::units;

/// Allowed mismatch between |start-center| and |end-center| (m).
const RADIUS_CONSISTENCY_TOL: f64 = 1e-6;
/// End point within this distance of the start point closes a full circle (m).
const FULL_CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Word {
    letter: char,
    value: f64,
}

fn strip_comments(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut depth = 0usize;
    for c in line.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ';' if depth == 0 => break,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Word>> {
    let mut words = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let letter = c.to_ascii_uppercase();
        if !letter.is_ascii_alphabetic() {
            return Err(Error::Gcode {
                line: line_no,
                message: format!("unexpected character `{c}`"),
            });
        }
        chars.next();
        let mut num = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() || d == '.' || d == '-' || d == '+' {
                num.push(d);
                chars.next();
            } else {
                break;
            }
        }
        let value = num.parse::<f64>().map_err(|_| Error::Gcode {
            line: line_no,
            message: format!("word `{letter}{num}` has no numeric value"),
        })?;
        words.push(Word { letter, value });
    }
    Ok(words)
}

pub fn parse_gcode(text: &str) -> Result<Toolpath> {
    let mut pos = Point2::new(0.0, 0.0);
    let mut feed: Option<f64> = None;
    let mut blocks: Vec<ArcBlock> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comments(raw_line);
        if line.trim().is_empty() || line.trim().starts_with('%') {
            continue;
        }
        let words = tokenize(&line, line_no)?;

        let mut motion: Option<u32> = None;
        let mut x = None;
        let mut y = None;
        let mut i_off = None;
        let mut j_off = None;

        for w in &words {
            match w.letter {
                'N' => {}
                'G' => {
                    let code = w.value as u32;
                    if (w.value - code as f64).abs() > 1e-9 {
                        return Err(Error::Gcode {
                            line: line_no,
                            message: format!("unsupported word `G{}`", w.value),
                        });
                    }
                    match code {
                        17 | 21 | 90 | 64 => {}
                        0 | 2 | 3 => {
                            if motion.is_some() {
                                return Err(Error::Gcode {
                                    line: line_no,
                                    message: "multiple motion words on one line".into(),
                                });
                            }
                            motion = Some(code);
                        }
                        1 => {
                            return Err(Error::Gcode {
                                line: line_no,
                                message: "linear moves (G1) are not supported; \
                                          the simulation core handles arcs only"
                                    .into(),
                            });
                        }
                        18 | 19 => {
                            return Err(Error::Gcode {
                                line: line_no,
                                message: format!("unsupported word `G{code}`: only the G17 plane is handled"),
                            });
                        }
                        20 => {
                            return Err(Error::Gcode {
                                line: line_no,
                                message: "unsupported word `G20`: units must be mm (G21)".into(),
                            });
                        }
                        91 => {
                            return Err(Error::Gcode {
                                line: line_no,
                                message: "unsupported word `G91`: only absolute mode (G90) is handled"
                                    .into(),
                            });
                        }
                        other => {
                            return Err(Error::Gcode {
                                line: line_no,
                                message: format!("unsupported word `G{other}`"),
                            });
                        }
                    }
                }
                'M' => {
                    let code = w.value as u32;
                    if code != 2 && code != 30 {
                        return Err(Error::Gcode {
                            line: line_no,
                            message: format!("unsupported word `M{}`", w.value),
                        });
                    }
                }
                'X' => x = Some(units::mm_to_m(w.value)),
                'Y' => y = Some(units::mm_to_m(w.value)),
                'I' => i_off = Some(units::mm_to_m(w.value)),
                'J' => j_off = Some(units::mm_to_m(w.value)),
                'F' => {
                    if w.value <= 0.0 {
                        return Err(Error::Gcode {
                            line: line_no,
                            message: format!("feed must be positive, got F{}", w.value),
                        });
                    }
                    feed = Some(units::mm_min_to_m_s(w.value));
                }
                other => {
                    return Err(Error::Gcode {
                        line: line_no,
                        message: format!("unsupported word `{other}{}`", w.value),
                    });
                }
            }
        }

        match motion {
            Some(0) => {
                if !blocks.is_empty() {
                    return Err(Error::Gcode {
                        line: line_no,
                        message: "G0 after an arc would break path continuity".into(),
                    });
                }
                pos = Point2::new(x.unwrap_or(pos.x), y.unwrap_or(pos.y));
            }
            Some(code @ (2 | 3)) => {
                let (i, j) = match (i_off, j_off) {
                    (Some(i), Some(j)) => (i, j),
                    _ => {
                        return Err(Error::Gcode {
                            line: line_no,
                            message: "arc needs both I and J center offsets".into(),
                        });
                    }
                };
                let v_prog = feed.ok_or_else(|| Error::Gcode {
                    line: line_no,
                    message: "arc before any feed word (F)".into(),
                })?;
                let center = Point2::new(pos.x + i, pos.y + j);
                let end = Point2::new(x.unwrap_or(pos.x), y.unwrap_or(pos.y));
                let r_start = pos.dist(&center);
                let r_end = end.dist(&center);
                if r_start <= 0.0 {
                    return Err(Error::Gcode {
                        line: line_no,
                        message: "arc start point coincides with its center".into(),
                    });
                }
                if (r_start - r_end).abs() > RADIUS_CONSISTENCY_TOL {
                    return Err(Error::Gcode {
                        line: line_no,
                        message: format!(
                            "arc end point is {:.3e} m off the start radius",
                            (r_start - r_end).abs()
                        ),
                    });
                }
                // Angles in the crate convention: alpha = pi/2 - polar angle.
                let alpha_start = std::f64::consts::FRAC_PI_2
                    - (pos.y - center.y).atan2(pos.x - center.x);
                let theta_sweep = if pos.dist(&end) <= FULL_CIRCLE_TOL {
                    std::f64::consts::TAU
                } else {
                    let a_end = (end.y - center.y).atan2(end.x - center.x);
                    let a_start = (pos.y - center.y).atan2(pos.x - center.x);
                    let ccw = (a_end - a_start).rem_euclid(std::f64::consts::TAU);
                    match code {
                        3 => ccw,
                        _ => std::f64::consts::TAU - ccw,
                    }
                };
                let alpha_end = match code {
                    3 => alpha_start - theta_sweep,
                    _ => alpha_start + theta_sweep,
                };
                blocks.push(ArcBlock::new(center, r_start, alpha_start, alpha_end, v_prog)?);
                pos = end;
            }
            _ => {
                if x.is_some() || y.is_some() || i_off.is_some() || j_off.is_some() {
                    return Err(Error::Gcode {
                        line: line_no,
                        message: "coordinate words without a motion word".into(),
                    });
                }
            }
        }
    }

    if blocks.is_empty() {
        return Err(Error::InvalidArg("program contains no arcs".into()));
    }
    let violations = validate_blocks(&blocks);
    if let Some(v) = violations
        .iter()
        .find(|v| matches!(v, Violation::TangentBreak { .. } | Violation::PositionGap { .. }))
    {
        return Err(Error::InvalidToolpath(vec![v.clone()]));
    }
    Toolpath::from_blocks(blocks)
}
