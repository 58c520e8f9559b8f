//! Minimal SVG line chart for convergence tables: x axis log2(N+1),
//! y axis log10(error), solid lines for state errors and dashed lines for
//! adjoint errors.  Emitted directly so artifacts need no plotting
//! toolchain; the output is plain well-formed XML.

use peeroc_core::convergence::ConvergenceTable;
use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn finite_logs(tables: &[ConvergenceTable]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in tables {
        for c in &t.cells {
            xs.push((c.n_steps as f64).log2());
            for e in [c.state_error, c.adjoint_error] {
                if e.is_finite() && e > 0.0 {
                    ys.push(e.log10());
                }
            }
        }
    }
    (xs, ys)
}

fn polyline(table: &ConvergenceTable, adjoint: bool, ax: &Axes) -> String {
    let mut pts = String::new();
    for c in &table.cells {
        let e = if adjoint { c.adjoint_error } else { c.state_error };
        if e.is_finite() && e > 0.0 {
            let _ = write!(
                pts,
                "{:.1},{:.1} ",
                ax.x((c.n_steps as f64).log2()),
                ax.y(e.log10())
            );
        }
    }
    pts.trim_end().to_string()
}

/// Renders all tables of one sweep into a single chart.
pub fn convergence_svg(tables: &[ConvergenceTable]) -> String {
    let (xs, ys) = finite_logs(tables);
    let (x0, x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (4.0, 9.0) };
    let (mut y0, mut y1) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !y0.is_finite() || !(y1 > y0) {
        y0 = -8.0;
        y1 = 0.0;
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let ax = Axes { x0, x1, y0, y1 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let title = tables
        .first()
        .map(|t| format!("{} errors over step count", t.problem))
        .unwrap_or_else(|| "errors over step count".into());
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        MARGIN_L, title
    );

    // Gridlines and tick labels on integer log2 / log10 positions.
    let mut k = x0.ceil() as i64;
    while k as f64 <= x1 {
        let px = ax.x(k as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_T,
            HEIGHT - MARGIN_B
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            HEIGHT - MARGIN_B + 16.0,
            1u64 << k
        );
        k += 1;
    }
    let mut e = y0 as i64;
    while e as f64 <= y1 {
        let py = ax.y(e as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_L,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{e}</text>",
            MARGIN_L - 6.0,
            py + 4.0
        );
        e += 1;
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">N+1</text>",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">max error</text>",
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0
    );

    for (i, table) in tables.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (adjoint, dash) in [(false, ""), (true, " stroke-dasharray=\"6 4\"")] {
            let pts = polyline(table, adjoint, &ax);
            if !pts.is_empty() {
                let _ = writeln!(
                    svg,
                    "<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>"
                );
            }
        }
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            lx + 30.0,
            table.method
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\">solid: state, dashed: adjoint</text>",
        WIDTH - MARGIN_R + 12.0,
        HEIGHT - MARGIN_B - 8.0
    );
    svg.push_str("</svg>\n");
    svg
}
