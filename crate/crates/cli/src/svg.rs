use std::fmt::Write;

use powassign::{Error, Point, PointSet};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 0.05 * SIZE;
const MARKER: f64 = 6.0;

const STYLE: &str = "\
.station{fill:#444}.source{fill:#c0392b}.receiver{fill:#2471a3}.uncovered{fill:#e67e22}\
.ball{fill:#2471a3;fill-opacity:0.12;stroke:#2471a3}\
.range{fill:#c0392b;fill-opacity:0.08;stroke:#c0392b}\
.tour{fill:none;stroke:#222}.edge{fill:none;stroke:#c0392b;stroke-width:2}";

/// An 800×800 drawing with the point bounding box fitted inside a 5% margin,
/// one scale on both axes so circles stay round, y pointing up.
pub struct Canvas {
    min: (f64, f64),
    scale: f64,
    offset: (f64, f64),
    shapes: String,
    markers: String,
}

impl Canvas {
    pub fn fit(ps: &PointSet) -> Result<Self, Error> {
        if ps.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                required: 2,
                found: ps.dim(),
            });
        }
        let xs = ps.iter().map(|p| p.coords()[0]);
        let ys = ps.iter().map(|p| p.coords()[1]);
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
            (a.min(y), b.max(y))
        });
        let span = (x1 - x0).max(y1 - y0);
        let inner = SIZE - 2.0 * MARGIN;
        let scale = if span > 0.0 { inner / span } else { 1.0 };
        Ok(Self {
            min: (x0, y0),
            scale,
            offset: (
                MARGIN + (inner - (x1 - x0) * scale) / 2.0,
                MARGIN + (inner - (y1 - y0) * scale) / 2.0,
            ),
            shapes: String::new(),
            markers: String::new(),
        })
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        let c = p.coords();
        (
            self.offset.0 + (c[0] - self.min.0) * self.scale,
            SIZE - self.offset.1 - (c[1] - self.min.1) * self.scale,
        )
    }

    pub fn station(&mut self, p: &Point, class: &str) {
        let (x, y) = self.map(p);
        let h = MARKER / 2.0;
        let _ = writeln!(
            self.markers,
            r#"<rect class="{class}" x="{:.3}" y="{:.3}" width="{MARKER}" height="{MARKER}"/>"#,
            x - h,
            y - h
        );
    }

    pub fn circle(&mut self, center: &Point, radius: f64, class: &str) {
        let (x, y) = self.map(center);
        let _ = writeln!(
            self.shapes,
            r#"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#,
            radius * self.scale
        );
    }

    pub fn polyline(&mut self, points: &[&Point], class: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.shapes,
            r#"<polyline class="{class}" points="{}"/>"#,
            coords.join(" ")
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <style>{STYLE}</style>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}{}</svg>\n",
            self.shapes, self.markers
        )
    }
}
