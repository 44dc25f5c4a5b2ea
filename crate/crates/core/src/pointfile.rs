//! Plain-text point sets: one point per line, whitespace-separated
//! coordinates, `#` comment lines. The first data line fixes the dimension.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};

pub fn parse(text: &str) -> Result<PointSet> {
    let mut points = Vec::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let coords = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid coordinate `{tok}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {d} coordinates, found {}", coords.len()),
                })
            }
            _ => {}
        }
        let p = Point::new(coords).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no points found".into(),
        });
    }
    PointSet::new(points)
}

pub fn format(ps: &PointSet) -> String {
    let mut out = String::new();
    for p in ps {
        let line = p
            .coords()
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(out, "{line}").unwrap();
    }
    out
}
