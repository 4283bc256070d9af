//! Minimal SVG renderers for point sets, staircases and grid level plots.

use std::fmt::Write as _;

use crate::geometry::{Point, PointSet, RectangleSpec};
use crate::grid::MonotoneGrid;
use crate::scalar::Scalar;
use crate::tableau::StaircaseFunction;

const SIZE: f64 = 400.0;
const PAD: f64 = 30.0;

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    flip_y: bool,
}

impl Frame {
    fn new(x0: f64, y0: f64, x1: f64, y1: f64, flip_y: bool) -> Self {
        let w = (x1 - x0).max(1e-12);
        let h = (y1 - y0).max(1e-12);
        Frame { x0, y0, sx: (SIZE - 2.0 * PAD) / w, sy: (SIZE - 2.0 * PAD) / h, flip_y }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) * self.sx
    }

    fn py(&self, y: f64) -> f64 {
        let v = (y - self.y0) * self.sy;
        if self.flip_y {
            PAD + v
        } else {
            SIZE - PAD - v
        }
    }
}

fn header(out: &mut String) {
    let _ =
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
}

fn bounds<T: Scalar>(pts: &[Point<T>]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let (x, y) = (p.x.as_f64(), p.y.as_f64());
        b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
    }
    if !b.0.is_finite() {
        return (0.0, 0.0, 1.0, 1.0);
    }
    b
}

/// All points in grey, the decreasing sequences as polylines on top. The y
/// axis points down, so decreasing sequences run up and to the right.
pub fn watermelon_svg<T: Scalar>(ps: &PointSet<T>, sequences: &[Vec<Point<T>>]) -> String {
    let (x0, y0, x1, y1) = bounds(ps.points());
    let f = Frame::new(x0, y0, x1, y1, true);
    let mut out = String::new();
    header(&mut out);
    for p in ps.points() {
        let _ = writeln!(out, r##"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="#999"/>"##, f.px(p.x.as_f64()), f.py(p.y.as_f64()));
    }
    for seq in sequences.iter().filter(|s| !s.is_empty()) {
        let pts: Vec<String> = seq.iter().map(|p| format!("{:.3},{:.3}", f.px(p.x.as_f64()), f.py(p.y.as_f64()))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1"/>"#, pts.join(" "));
    }
    out.push_str("</svg>\n");
    out
}

/// The level frontiers of `kappa` as staircases, the points, and the value of
/// `kappa` printed at each of `labels`.
pub fn kappa_svg<T: Scalar>(kappa: &StaircaseFunction<T>, labels: &[(T, T)]) -> String {
    let mut all: Vec<Point<T>> = kappa.levels.iter().flatten().map(|&(x, y)| Point::new(x, y)).collect();
    all.extend(labels.iter().map(|&(x, y)| Point::new(x, y)));
    let (x0, y0, x1, y1) = bounds(&all);
    let (x0, y0) = (x0.min(0.0), y0.min(0.0));
    let (x1, y1) = (x1 + 1.0, y1 + 1.0);
    let f = Frame::new(x0, y0, x1, y1, false);
    let mut out = String::new();
    header(&mut out);
    for level in &kappa.levels {
        // Up from the top edge, then alternately down and right.
        let mut d = format!("M {:.3} {:.3}", f.px(level[0].0.as_f64()), f.py(y1));
        for (k, &(x, y)) in level.iter().enumerate() {
            let _ = write!(d, " L {:.3} {:.3}", f.px(x.as_f64()), f.py(y.as_f64()));
            let next_x = level.get(k + 1).map_or(x1, |p| p.0.as_f64());
            let _ = write!(d, " L {:.3} {:.3}", f.px(next_x), f.py(y.as_f64()));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1"/>"#);
        for &(x, y) in level {
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="black"/>"#, f.px(x.as_f64()), f.py(y.as_f64()));
        }
    }
    for &(x, y) in labels {
        let _ = writeln!(
            out,
            r#"<text class="level" data-x="{}" data-y="{}" x="{:.3}" y="{:.3}" font-size="14">{}</text>"#,
            x,
            y,
            f.px(x.as_f64()),
            f.py(y.as_f64()),
            kappa.eval(x, y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grey-scale cells coloured by the average of their corner values.
pub fn grid_svg<T: Scalar>(g: &MonotoneGrid<T>) -> String {
    let d = g.domain();
    let f = Frame::new(d.x0.as_f64(), d.y0.as_f64(), d.x(d.nx - 1).as_f64(), d.y(d.ny - 1).as_f64(), false);
    let (lo, span) = (g.min().as_f64(), g.diam().as_f64());
    let mut out = String::new();
    header(&mut out);
    let w = d.hx.as_f64() * f.sx;
    let h = d.hy.as_f64() * f.sy;
    for i in 0..d.nx - 1 {
        for j in 0..d.ny - 1 {
            let avg = 0.25 * (g.get(i, j) + g.get(i + 1, j) + g.get(i, j + 1) + g.get(i + 1, j + 1)).as_f64();
            let t = if span > 0.0 { (avg - lo) / span } else { 0.0 };
            let c = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({c},{c},{c})"/>"#,
                f.px(d.x(i).as_f64()),
                f.py(d.y(j + 1).as_f64()),
                w + 0.05,
                h + 0.05
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// A rotated rectangle of width `1` and length `beta` with its points.
pub fn rectangle_svg<T: Scalar>(spec: &RectangleSpec, ps: &PointSet<T>) -> String {
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, spec.beta), (0.0, spec.beta)].map(|(s, t)| RectangleSpec::from_rotated(s, t));
    let mut all: Vec<Point<f64>> = corners.iter().map(|&(x, y)| Point::new(x, y)).collect();
    all.extend(ps.points().iter().map(|p| Point::new(p.x.as_f64(), p.y.as_f64())));
    let (x0, y0, x1, y1) = bounds(&all);
    let side = (x1 - x0).max(y1 - y0);
    let f = Frame::new(x0, y0, x0 + side, y0 + side, false);
    let mut out = String::new();
    header(&mut out);
    let poly: Vec<String> = corners.iter().map(|&(x, y)| format!("{:.3},{:.3}", f.px(x), f.py(y))).collect();
    let _ = writeln!(out, r#"<polygon points="{}" fill="none" stroke="black"/>"#, poly.join(" "));
    for p in ps.points() {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="1" fill="black"/>"#, f.px(p.x.as_f64()), f.py(p.y.as_f64()));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::staircase_example;
    use crate::tableau::kappa_surface;

    #[test]
    fn kappa_labels() {
        let k = kappa_surface(&staircase_example::<f64>());
        let svg = kappa_svg(&k, &[(1.0, 2.0), (3.0, 5.0), (5.0, 5.0), (7.0, 6.0)]);
        for (pos, v) in [("data-x=\"1\" data-y=\"2\"", 0), ("data-x=\"7\" data-y=\"6\"", 3)] {
            let at = svg.find(pos).unwrap();
            let tail = &svg[at..];
            let text = &tail[tail.find('>').unwrap() + 1..tail.find("</text>").unwrap()];
            assert_eq!(text, v.to_string());
        }
    }
}
