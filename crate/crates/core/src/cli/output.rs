//! Deterministic CSV and SVG emission.
//!
//! CSV is the canonical artifact: comma separated, one header row, floats at
//! 17 significant digits so values round-trip bit-exactly. Files are staged
//! next to their target and renamed into place. SVG rendering is a thin
//! optional layer, free of timestamps so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::config::CliError;

/// 17 significant digits; `inf` spelled out for the unitary limit.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// Write bytes through a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut tmp = PathBuf::from(path);
    let mut name = tmp.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Assemble a CSV document from a fixed schema and formatted rows.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width must match header");
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn write(self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, self.into_string().as_bytes())
    }
}

// ---------------------------------------------------------------------------
// SVG

const PLOT_W: f64 = 760.0;
const PLOT_H: f64 = 470.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

const LINE_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn axis_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.04;
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Self-contained line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x_lo, x_hi) = axis_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_lo, y_hi) = axis_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let x_map = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (PLOT_W - MARGIN_L - MARGIN_R);
    let y_map =
        |y: f64| PLOT_H - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (PLOT_H - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\" \
         font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n\
         <rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        PLOT_W / 2.0,
        escape(title)
    );

    for tx in ticks(x_lo, x_hi, 6) {
        let px = x_map(tx);
        let _ = write!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_T,
            PLOT_H - MARGIN_B,
            PLOT_H - MARGIN_B + 18.0,
            tick_label(tx)
        );
    }
    for ty in ticks(y_lo, y_hi, 6) {
        let py = y_map(ty);
        let _ = write!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L,
            PLOT_W - MARGIN_R,
            MARGIN_L - 6.0,
            py + 4.0,
            tick_label(ty)
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        PLOT_W - MARGIN_L - MARGIN_R,
        PLOT_H - MARGIN_T - MARGIN_B,
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
        PLOT_H - 16.0,
        escape(x_label),
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        escape(y_label),
    );

    for (idx, s) in series.iter().enumerate() {
        let color = LINE_COLORS[idx % LINE_COLORS.len()];
        let mut path = String::new();
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2} {:.2} ", x_map(x), y_map(y));
        }
        let _ = write!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>\n",
            path.trim_end()
        );
        let ly = MARGIN_T + 16.0 + 16.0 * idx as f64;
        let _ = write!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_L + 34.0,
            MARGIN_L + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Self-contained heatmap with the value grid downsampled to at most
/// 240 x 160 cells (bin means) to keep files small.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_axis: &[f64],
    y_axis: &[f64],
    values: &[Vec<f64>], // values[yi][xi]
) -> String {
    let max_cells_x = 240.min(x_axis.len());
    let max_cells_y = 160.min(y_axis.len());
    let bin = |len: usize, cells: usize, i: usize| {
        (
            i * len / cells,
            ((i + 1) * len / cells).max(i * len / cells + 1),
        )
    };

    let mut grid = vec![vec![0.0; max_cells_x]; max_cells_y];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (yi, row) in grid.iter_mut().enumerate() {
        let (y0, y1) = bin(y_axis.len(), max_cells_y, yi);
        for (xi, cell) in row.iter_mut().enumerate() {
            let (x0, x1) = bin(x_axis.len(), max_cells_x, xi);
            let mut acc = 0.0;
            let mut count = 0usize;
            for vy in y0..y1.min(y_axis.len()) {
                for vx in x0..x1.min(x_axis.len()) {
                    acc += values[vy][vx];
                    count += 1;
                }
            }
            *cell = if count > 0 { acc / count as f64 } else { 0.0 };
            lo = lo.min(*cell);
            hi = hi.max(*cell);
        }
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }

    let cell_w = (PLOT_W - MARGIN_L - MARGIN_R) / max_cells_x as f64;
    let cell_h = (PLOT_H - MARGIN_T - MARGIN_B) / max_cells_y as f64;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PLOT_W} {PLOT_H}\" \
         font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n\
         <rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        PLOT_W / 2.0,
        escape(title)
    );
    for (yi, row) in grid.iter().enumerate() {
        for (xi, &v) in row.iter().enumerate() {
            let frac = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            let px = MARGIN_L + xi as f64 * cell_w;
            // y axis points up: last row at the top
            let py = PLOT_H - MARGIN_B - (yi as f64 + 1.0) * cell_h;
            let _ = write!(
                svg,
                "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                cell_w + 0.05,
                cell_h + 0.05,
                colormap(frac)
            );
        }
    }
    // axis labels at the extremes
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333333\"/>\n\
         <text x=\"{MARGIN_L}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        PLOT_W - MARGIN_L - MARGIN_R,
        PLOT_H - MARGIN_T - MARGIN_B,
        PLOT_H - MARGIN_B + 18.0,
        tick_label(x_axis[0]),
        PLOT_W - MARGIN_R,
        PLOT_H - MARGIN_B + 18.0,
        tick_label(*x_axis.last().unwrap()),
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
        PLOT_H - 16.0,
        escape(x_label),
        MARGIN_L - 6.0,
        PLOT_H - MARGIN_B + 4.0,
        tick_label(y_axis[0]),
        MARGIN_L - 6.0,
        MARGIN_T + 12.0,
        tick_label(*y_axis.last().unwrap()),
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        escape(y_label),
    );
    svg.push_str("</svg>\n");
    svg
}

/// Dark-blue to yellow ramp through three anchors.
fn colormap(frac: f64) -> String {
    let anchors = [
        (68.0, 1.0, 84.0),
        (33.0, 144.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let x = frac * 2.0;
    let (a, b, t) = if x <= 1.0 {
        (anchors[0], anchors[1], x)
    } else {
        (anchors[1], anchors[2], x - 1.0)
    };
    let mix = |p: f64, q: f64| (p + (q - p) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
