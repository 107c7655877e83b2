//! Static SVG figures. Coordinates are computed from exact values and
//! printed with 12 significant digits.

use std::fmt::Write;

use nokholo_core::nok::{NokBody, SliceRegion};
use nokholo_core::rational::{format_q, sig12, to_f64, Q};
use nokholo_core::Surd;
use num_traits::{One, Signed, Zero};

const W: f64 = 420.0;
const H: f64 = 320.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(origin: (f64, f64), xmax: f64, ymax: f64, w: f64, h: f64) -> Self {
        let sx = if xmax > 0.0 { w / xmax } else { 1.0 };
        let sy = if ymax > 0.0 { h / ymax } else { 1.0 };
        Frame { x0: origin.0, y0: origin.1, sx, sy }
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{},{}", sig12(self.x0 + x * self.sx), sig12(self.y0 - y * self.sy))
    }

    fn xy(&self, x: f64, y: f64) -> (String, String) {
        (sig12(self.x0 + x * self.sx), sig12(self.y0 - y * self.sy))
    }
}

/// `t^2 - 8*t + 9` from ascending coefficients.
pub fn minimal_polynomial_text(s: &Surd, var: &str) -> String {
    let c = s.minimal_polynomial();
    let mut out = String::new();
    for (k, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let mag = a.abs();
        if out.is_empty() {
            if a.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if a.is_negative() { " - " } else { " + " });
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{k}"),
        };
        match (mag.is_one(), mono.is_empty()) {
            (true, false) => out.push_str(&mono),
            (_, true) => out.push_str(&format_q(&mag)),
            _ => {
                let _ = write!(out, "{}*{mono}", format_q(&mag));
            }
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"11\">\n<title>{}</title>\n",
        escape(title)
    )
}

fn axes(out: &mut String, f: &Frame, xmax: f64, ymax: f64, xlabel: &str, ylabel: &str) {
    let (ox, oy) = f.xy(0.0, 0.0);
    let (ex, _) = f.xy(xmax, 0.0);
    let (_, ey) = f.xy(0.0, ymax);
    let _ = writeln!(out, "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ex}\" y2=\"{oy}\" stroke=\"#444\"/>");
    let _ = writeln!(out, "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ox}\" y2=\"{ey}\" stroke=\"#444\"/>");
    let _ = writeln!(out, "<text x=\"{ex}\" y=\"{}\" text-anchor=\"end\">{xlabel} = {}</text>", sig12(f.y0 + 16.0), sig12(xmax));
    let _ = writeln!(out, "<text x=\"{}\" y=\"{ey}\" text-anchor=\"end\">{ylabel} = {}</text>", sig12(f.x0 - 4.0), sig12(ymax));
}

fn body_polygon(out: &mut String, f: &Frame, body: &NokBody, fill: &str) {
    let pts: Vec<String> = body.vertices.iter().map(|(t, y)| f.point(t.to_f64(), y.to_f64())).collect();
    let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"#1f3b73\" stroke-width=\"1.2\"/>", pts.join(" "));
}

fn body_extent(body: &NokBody) -> (f64, f64) {
    let tmax = body.t_extent().to_f64();
    let ymax = body.vertices.iter().map(|(_, y)| y.to_f64()).fold(0.0, f64::max);
    (tmax, ymax)
}

/// One body, with every irrational vertex annotated by its exact value and
/// minimal polynomial.
pub fn body_svg(body: &NokBody, title: &str) -> String {
    let (tmax, ymax) = body_extent(body);
    let f = Frame::new((MARGIN, H - MARGIN), tmax, ymax, W - 2.0 * MARGIN - 120.0, H - 2.0 * MARGIN);
    let mut out = header(W, H, title);
    let _ = writeln!(out, "<text x=\"{MARGIN}\" y=\"20\">{}</text>", escape(title));
    axes(&mut out, &f, tmax, ymax, "t", "y");
    body_polygon(&mut out, &f, body, "#c9d8f2");
    let mut notes: Vec<String> = Vec::new();
    for (t, y) in &body.vertices {
        let (x, yy) = f.xy(t.to_f64(), y.to_f64());
        let _ = writeln!(out, "<circle cx=\"{x}\" cy=\"{yy}\" r=\"2.5\" fill=\"#1f3b73\"/>");
        for (value, var) in [(t, "t"), (y, "y")] {
            let note = format!("{var} = {}, root of {} = 0", value, minimal_polynomial_text(value, var));
            if !value.is_rational() && !notes.contains(&note) {
                notes.push(note);
            }
        }
    }
    for (line, note) in notes.iter().enumerate() {
        let y = sig12(H - 10.0 - 13.0 * line as f64);
        let _ = writeln!(out, "<text x=\"{MARGIN}\" y=\"{y}\" class=\"annotation\">{}</text>", escape(note));
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"20\" text-anchor=\"end\">area = {}</text>", W - 8.0, escape(&body.area().to_string()));
    out.push_str("</svg>\n");
    out
}

/// Boundary plot `t = μ(s)` of a slice region; held-out samples are hollow.
pub fn boundary_svg(region: &SliceRegion, title: &str) -> String {
    let smax = to_f64(&region.epsilon);
    let tmax = region.samples.iter().map(|x| x.mu.to_f64()).fold(0.0, f64::max);
    let f = Frame::new((MARGIN, H - MARGIN), smax, tmax, W - 2.0 * MARGIN, H - 2.0 * MARGIN);
    let mut out = header(W, H, title);
    let _ = writeln!(out, "<text x=\"{MARGIN}\" y=\"20\">{}</text>", escape(title));
    axes(&mut out, &f, smax, tmax, "s", "t");
    let pts: Vec<String> = region.samples.iter().map(|x| f.point(to_f64(&x.s), x.mu.to_f64())).collect();
    let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"#a33\" stroke-width=\"1.2\"/>", pts.join(" "));
    for x in &region.samples {
        let (cx, cy) = f.xy(to_f64(&x.s), x.mu.to_f64());
        let fill = if x.held_out { "white" } else { "#a33" };
        let _ = writeln!(out, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"{fill}\" stroke=\"#a33\"/>");
    }
    let _ = writeln!(out, "<text x=\"{MARGIN}\" y=\"36\">Q(s, t) = {} = 0</text>", escape(&region.boundary_polynomial.to_string()));
    out.push_str("</svg>\n");
    out
}

/// Stacked sections of the slice family: one body per sampled `s`.
pub fn slice_family_svg(bodies: &[(Q, NokBody)], title: &str) -> String {
    let cell_w = 170.0;
    let cell_h = 150.0;
    let cols = 3usize;
    let rows = bodies.len().div_ceil(cols).max(1);
    let (tmax, ymax) = bodies.iter().map(|(_, b)| body_extent(b)).fold((0.0, 0.0), |a, b| (f64::max(a.0, b.0), f64::max(a.1, b.1)));
    let w = cell_w * cols as f64 + 20.0;
    let h = cell_h * rows as f64 + 40.0;
    let mut out = header(w, h, title);
    let _ = writeln!(out, "<text x=\"10\" y=\"20\">{}</text>", escape(title));
    for (k, (s, body)) in bodies.iter().enumerate() {
        let (c, r) = (k % cols, k / cols);
        let ox = 20.0 + cell_w * c as f64;
        let oy = 40.0 + cell_h * (r as f64 + 1.0) - 24.0;
        let f = Frame::new((ox, oy), tmax, ymax, cell_w - 40.0, cell_h - 50.0);
        axes(&mut out, &f, tmax, ymax, "t", "y");
        body_polygon(&mut out, &f, body, "#d7e6c8");
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">s = {}</text>", sig12(ox + 20.0), sig12(oy - (cell_h - 50.0) - 6.0), format_q(s));
    }
    out.push_str("</svg>\n");
    out
}
