//! Self-contained SVG line charts with min/max error bars.

use std::fmt::Write as _;

use crate::experiments::figures::{FigureData, FigureDataset, GRID_B, GRID_K};

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 50.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 40.0;
const GAP: f64 = 70.0;

/// A y-range always fixed to [0, 1]; fitness and %gRNA are both unit scaled.
struct Panel {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        let span = (self.xmax - self.xmin).max(f64::EPSILON);
        self.x0 + (x - self.xmin) / span * PANEL_W
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + (1.0 - y.clamp(0.0, 1.0)) * PANEL_H
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, xticks: &[f64]) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{PANEL_W:.1}" height="{PANEL_H:.1}" fill="none" stroke="#333"/>"##,
            self.x0, self.y0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{title}</text>"#,
            self.x0 + PANEL_W / 2.0,
            self.y0 - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            self.x0 + PANEL_W / 2.0,
            self.y0 + PANEL_H + 32.0
        );
        for i in 0..=5 {
            let y = i as f64 / 5.0;
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{y:.1}</text>"##,
                self.x0,
                self.x0 + PANEL_W,
                self.x0 - 5.0,
                self.py(y) + 3.0,
                py = self.py(y),
            );
        }
        for &x in xticks {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                self.px(x),
                self.y0 + PANEL_H + 14.0,
                x
            );
        }
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dash: bool) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{}/>"#,
        coords.join(" "),
        if dash {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        }
    );
}

fn header(width: f64, height: f64, title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        width / 2.0
    )
}

/// Renders a figure dataset as an SVG document.
pub fn render(d: &FigureDataset) -> String {
    match &d.data {
        FigureData::Grid(rows) => render_grid(d, rows),
        FigureData::Series(rows) => render_series(d, rows),
    }
}

fn render_grid(d: &FigureDataset, rows: &[crate::experiments::figures::GridRow]) -> String {
    let width = MARGIN_L + 2.0 * PANEL_W + GAP + 120.0;
    let height = MARGIN_T + PANEL_H + MARGIN_B + 20.0;
    let mut out = header(width, height, d.figure.title());
    let xmin = GRID_B[0] as f64 - 0.3;
    let xmax = *GRID_B.last().unwrap() as f64 + 0.3;
    let xticks: Vec<f64> = GRID_B.iter().map(|&b| b as f64).collect();
    let panels = [
        (
            Panel {
                x0: MARGIN_L,
                y0: MARGIN_T,
                xmin,
                xmax,
            },
            "Fitness",
        ),
        (
            Panel {
                x0: MARGIN_L + PANEL_W + GAP,
                y0: MARGIN_T,
                xmin,
                xmax,
            },
            "%gRNA (final generation)",
        ),
    ];
    for (pi, (panel, title)) in panels.iter().enumerate() {
        panel.frame(&mut out, title, "B", &xticks);
        for (ki, &k) in GRID_K.iter().enumerate() {
            let color = PALETTE[ki % PALETTE.len()];
            // small horizontal offset per K keeps error bars apart
            let dx = (ki as f64 - 2.5) * 0.04;
            let mut pts = Vec::new();
            for r in rows.iter().filter(|r| r.k == k) {
                let s = if pi == 0 { r.fitness } else { r.pct_grna };
                let Some(s) = s else { continue };
                let x = panel.px(r.b as f64 + dx);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/>"#,
                    panel.py(s.min),
                    panel.py(s.max)
                );
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#,
                    panel.py(s.mean)
                );
                pts.push((x, panel.py(s.mean)));
            }
            polyline(&mut out, &pts, color, false);
        }
    }
    let lx = MARGIN_L + 2.0 * PANEL_W + GAP + 15.0;
    for (ki, &k) in GRID_K.iter().enumerate() {
        let y = MARGIN_T + 10.0 + ki as f64 * 18.0;
        let color = PALETTE[ki % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">K={k}</text>"#,
            lx + 20.0,
            lx + 25.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn render_series(d: &FigureDataset, rows: &[crate::experiments::figures::SeriesRow]) -> String {
    let width = MARGIN_L + PANEL_W + 140.0;
    let height = MARGIN_T + PANEL_H + MARGIN_B + 20.0;
    let mut out = header(width, height, d.figure.title());
    // the first run in file order
    let first: Vec<_> = match rows.first() {
        Some(f) => rows
            .iter()
            .filter(|r| {
                (&r.mode, r.b, r.k, r.c, r.landscape, r.run)
                    == (&f.mode, f.b, f.k, f.c, f.landscape, f.run)
            })
            .collect(),
        None => Vec::new(),
    };
    let xmax = first.iter().map(|r| r.generation).max().unwrap_or(1).max(1) as f64;
    let panel = Panel {
        x0: MARGIN_L,
        y0: MARGIN_T,
        xmin: 0.0,
        xmax,
    };
    let xticks: Vec<f64> = (0..=4).map(|i| (xmax * i as f64 / 4.0).round()).collect();
    let title = match first.first() {
        Some(f) => format!(
            "B={} K={} C={} landscape {} run {}",
            f.b, f.k, f.c, f.landscape, f.run
        ),
        None => "no data".into(),
    };
    panel.frame(&mut out, &title, "generation", &xticks);
    let fit: Vec<(f64, f64)> = first
        .iter()
        .map(|r| (panel.px(r.generation as f64), panel.py(r.fitness)))
        .collect();
    let pct: Vec<(f64, f64)> = first
        .iter()
        .map(|r| (panel.px(r.generation as f64), panel.py(r.pct_grna)))
        .collect();
    polyline(&mut out, &fit, PALETTE[0], false);
    polyline(&mut out, &pct, PALETTE[1], true);
    let lx = MARGIN_L + PANEL_W + 15.0;
    for (i, (name, color)) in [("fitness", PALETTE[0]), ("%gRNA", PALETTE[1])]
        .iter()
        .enumerate()
    {
        let y = MARGIN_T + 10.0 + i as f64 * 18.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{name}</text>"#,
            lx + 20.0,
            lx + 25.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}
