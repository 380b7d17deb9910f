//! Hand-rolled SVG line plots. The CSV files are the authoritative output;
//! these exist so a run can be eyeballed without further tooling, which
//! keeps plotting dependencies out of the build.

use std::path::PathBuf;

use crate::CliError;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 66.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Curve colors, cycled in drawing order.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#636363",
];

/// Smallest/largest finite values of an iterator, padded when degenerate.
pub fn value_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.04;
    (lo - pad, hi + pad)
}

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_x: bool,
    shapes: String,
    legend: Vec<(String, String)>,
}

impl Plot {
    pub fn new(
        title: &str,
        x_label: &str,
        y_label: &str,
        x_range: (f64, f64),
        y_range: (f64, f64),
    ) -> Plot {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x0: x_range.0,
            x1: x_range.1,
            y0: y_range.0,
            y1: y_range.1,
            log_x: false,
            shapes: String::new(),
            legend: Vec::new(),
        }
    }

    /// Switches the x-axis to logarithmic scale; both range ends must be
    /// positive.
    pub fn with_log_x(mut self) -> Plot {
        debug_assert!(self.x0 > 0.0 && self.x1 > 0.0);
        self.log_x = true;
        self
    }

    fn tx(&self, x: f64) -> f64 {
        let (x, x0, x1) = if self.log_x {
            (x.ln(), self.x0.ln(), self.x1.ln())
        } else {
            (x, self.x0, self.x1)
        };
        let frac = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.5 };
        MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn ty(&self, y: f64) -> f64 {
        let frac = if self.y1 > self.y0 {
            (y - self.y0) / (self.y1 - self.y0)
        } else {
            0.5
        };
        HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    pub fn line(&mut self, points: &[(f64, f64)], color: &str, label: Option<&str>) {
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.tx(x), self.ty(y)))
            .collect();
        if coords.len() >= 2 {
            self.shapes.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
                coords.join(" ")
            ));
        }
        if let Some(text) = label {
            self.legend.push((color.to_string(), text.to_string()));
        }
    }

    pub fn dots(&mut self, points: &[(f64, f64)], color: &str, radius: f64) {
        for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            self.shapes.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius}\" fill=\"{color}\" fill-opacity=\"0.55\"/>\n",
                self.tx(x),
                self.ty(y)
            ));
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
        ));
        out.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        // Frame.
        let (fx, fy) = (MARGIN_LEFT, MARGIN_TOP);
        let (fw, fh) = (
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        );
        out.push_str(&format!(
            "<rect x=\"{fx}\" y=\"{fy}\" width=\"{fw}\" height=\"{fh}\" fill=\"none\" stroke=\"#999\"/>\n"
        ));
        // Title and axis labels.
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
            MARGIN_LEFT + fw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\" \
             transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            MARGIN_TOP + fh / 2.0,
            MARGIN_TOP + fh / 2.0,
            escape(&self.y_label)
        ));
        // Corner tick labels.
        let scale = if self.log_x { " (log)" } else { "" };
        out.push_str(&format!(
            "<text x=\"{fx}\" y=\"{:.1}\" font-size=\"11\" fill=\"#555\">{}{}</text>\n",
            HEIGHT - MARGIN_BOTTOM + 16.0,
            fmt_tick(self.x0),
            scale
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\" fill=\"#555\">{}</text>\n",
            WIDTH - MARGIN_RIGHT,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            fmt_tick(self.x1)
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\" fill=\"#555\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            HEIGHT - MARGIN_BOTTOM,
            fmt_tick(self.y0)
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\" fill=\"#555\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            MARGIN_TOP + 10.0,
            fmt_tick(self.y1)
        ));
        out.push_str(&self.shapes);
        // Legend, stacked inside the top-right corner.
        for (i, (color, text)) in self.legend.iter().enumerate() {
            let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
            let x = WIDTH - MARGIN_RIGHT - 150.0;
            out.push_str(&format!(
                "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                x + 18.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n",
                x + 24.0,
                y + 4.0,
                escape(text)
            ));
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn write(&self, path: PathBuf) -> Result<PathBuf, CliError> {
        std::fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10_000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
