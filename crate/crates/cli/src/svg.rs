//! Static SVG plots. Coordinates are printed with three decimals so identical
//! inputs give identical bytes.

use std::fmt::Write;

pub const RED: &str = "#d62728";
pub const GRAY: &str = "#c7c7c7";

/// Line colour per series index.
pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf",
];

pub struct Series {
    pub label: String,
    /// In data units, both axes on `[0, 1]`.
    pub points: Vec<(f64, f64)>,
    /// `(point index, text)` labels drawn next to points.
    pub annotations: Vec<(usize, String)>,
}

pub struct UnitPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Dashed y = x reference line.
    pub diagonal: bool,
    pub series: Vec<Series>,
}

const W: f64 = 480.0;
const H: f64 = 440.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 40.0;
const SIZE: f64 = 340.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn sx(x: f64) -> f64 {
    LEFT + x.clamp(0.0, 1.0) * SIZE
}

fn sy(y: f64) -> f64 {
    TOP + (1.0 - y.clamp(0.0, 1.0)) * SIZE
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#
    );
}

impl UnitPlot {
    pub fn render(&self) -> String {
        let mut s = String::new();
        header(&mut s, W, H);
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            LEFT + SIZE / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT:.3}" y="{TOP:.3}" width="{SIZE:.3}" height="{SIZE:.3}" fill="none" stroke="black"/>"#
        );
        for i in 0..=5 {
            let v = i as f64 / 5.0;
            let _ = writeln!(
                s,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{GRAY}" stroke-width="0.5"/>"#,
                sx(v),
                sy(0.0),
                sx(v),
                sy(1.0)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{GRAY}" stroke-width="0.5"/>"#,
                sx(0.0),
                sy(v),
                sx(1.0),
                sy(v)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{v:.1}</text>"#,
                sx(v),
                sy(0.0) + 16.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v:.1}</text>"#,
                sx(0.0) - 6.0,
                sy(v) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            LEFT + SIZE / 2.0,
            TOP + SIZE + 34.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
            TOP + SIZE / 2.0,
            TOP + SIZE / 2.0,
            escape(&self.y_label)
        );
        if self.diagonal {
            let _ = writeln!(
                s,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
                sx(0.0),
                sy(0.0),
                sx(1.0),
                sy(1.0)
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            for (idx, text) in &series.annotations {
                if let Some(&(x, y)) = series.points.get(*idx) {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="{color}"/>"#,
                        sx(x),
                        sy(y)
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.3}" y="{:.3}" fill="{color}" font-size="9">{}</text>"#,
                        sx(x) + 4.0,
                        sy(y) - 4.0,
                        escape(text)
                    );
                }
            }
            let ly = TOP + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="2"/>"#,
                LEFT + SIZE + 8.0,
                LEFT + SIZE + 24.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
                LEFT + SIZE + 28.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// One strip per row, one cell per timestep; `true` cells are red.
pub struct Timeline {
    pub title: String,
    pub dt: f64,
    pub rows: Vec<(String, Vec<bool>)>,
}

impl Timeline {
    pub fn render(&self) -> String {
        const CELL: f64 = 8.0;
        const ROW: f64 = 22.0;
        const LABEL: f64 = 80.0;
        let steps = self.rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
        let w = LABEL + CELL * steps as f64 + 20.0;
        let h = 40.0 + ROW * self.rows.len() as f64 + 30.0;
        let mut s = String::new();
        header(&mut s, w, h);
        let _ = writeln!(
            s,
            r#"<text x="10" y="20" font-size="13">{}</text>"#,
            escape(&self.title)
        );
        for (r, (label, cells)) in self.rows.iter().enumerate() {
            let y = 32.0 + ROW * r as f64;
            let _ = writeln!(
                s,
                r#"<text x="10" y="{:.3}">{}</text>"#,
                y + 13.0,
                escape(label)
            );
            for t in 0..steps {
                let on = cells.get(t).copied().unwrap_or(false);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                    LABEL + CELL * t as f64,
                    CELL - 1.0,
                    ROW - 4.0,
                    if on { RED } else { GRAY }
                );
            }
        }
        // tick every second
        let axis_y = 32.0 + ROW * self.rows.len() as f64 + 12.0;
        let per_sec = if self.dt > 0.0 {
            (1.0 / self.dt).round().max(1.0) as usize
        } else {
            10
        };
        for t in (0..steps).step_by(per_sec) {
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{axis_y:.3}" font-size="9">{:.1}s</text>"#,
                LABEL + CELL * t as f64,
                t as f64 * self.dt
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
