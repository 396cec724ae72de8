//! Plain CSV and SVG output for benchmark and accuracy results.

use std::fmt::Write;
use std::path::Path;

use crate::error::Result;
use crate::pipeline::write_atomic;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

/// One point of an accuracy vs cost plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub label: String,
    pub cost: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<PlotPoint>,
    /// Dashed vertical guides, e.g. a reference cost.
    pub guides: Vec<(String, f64)>,
}

const W: f64 = 480.0;
const H: f64 = 320.0;
const M: f64 = 48.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,cost,accuracy\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{}", p.label, p.cost, p.accuracy);
        }
        s
    }

    /// Scatter plot with labelled points; axes start at zero.
    pub fn to_svg(&self) -> String {
        let x_max = self
            .points
            .iter()
            .map(|p| p.cost)
            .chain(self.guides.iter().map(|g| g.1))
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE)
            * 1.1;
        let y_max = self
            .points
            .iter()
            .map(|p| p.accuracy)
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let sx = |x: f64| M + x / x_max * (W - 2.0 * M);
        let sy = |y: f64| H - M - y / y_max * (H - 2.0 * M);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{M} {} V{} H{}" fill="none" stroke="black"/>"#,
            M,
            H - M,
            W - M
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        for (name, x) in &self.guides {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.1}" y1="{1}" x2="{0:.1}" y2="{2}" stroke="gray" stroke-dasharray="4 3"/><text x="{0:.1}" y="{3}" fill="gray">{4}</text>"#,
                sx(*x),
                M,
                H - M,
                M - 4.0,
                esc(name)
            );
        }
        for p in &self.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="steelblue"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                sx(p.cost),
                sy(p.accuracy),
                sx(p.cost) + 6.0,
                sy(p.accuracy) - 6.0,
                esc(&p.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_every_point_and_guide() {
        let plot = Plot {
            title: "a<b".into(),
            x_label: "ms".into(),
            y_label: "accuracy".into(),
            points: vec![
                PlotPoint {
                    label: "full".into(),
                    cost: 10.0,
                    accuracy: 0.9,
                },
                PlotPoint {
                    label: "partial".into(),
                    cost: 2.0,
                    accuracy: 0.9,
                },
            ],
            guides: vec![("20%".into(), 2.0)],
        };
        let svg = plot.to_svg();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("a&lt;b"));
        assert_eq!(plot.to_csv().lines().count(), 3);
    }
}
