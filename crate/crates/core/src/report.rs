//! Report containers and flat-file emission: named numeric tables with
//! metadata, CSV round-tripping, and a minimal SVG line plot.
//!
//! CSV format: UTF-8, LF line endings, a leading block of `# key = value`
//! metadata lines, one header row, then comma-separated rows. All floats
//! are printed with 10 significant digits, which round-trips exactly
//! through `f64` parsing.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// One rectangular numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column values by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// A set of tables plus metadata echoing the resolved configuration
/// (seed, defaults, proxy decisions). Metadata order is emission order.
#[derive(Debug, Clone, Default)]
pub struct SimulationReport {
    pub tables: Vec<Table>,
    pub metadata: Vec<(String, String)>,
}

impl SimulationReport {
    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Format a float with 10 significant digits. The representation parses
/// back to a value that re-formats identically (the integral shortcut
/// is decided on the rounded value, so near-integers stay stable).
pub fn format_float(x: f64) -> String {
    let exp_form = format!("{x:.9e}");
    let rounded: f64 = exp_form.parse().expect("own formatting parses");
    if rounded == rounded.trunc() && rounded.abs() < 1e15 {
        // integral values print plainly so indices stay readable
        format!("{rounded}")
    } else {
        exp_form
    }
}

/// Serialize a table (with metadata comment lines) to CSV text.
pub fn to_csv(table: &Table, metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Write a table to `path` as CSV.
pub fn write_csv(table: &Table, metadata: &[(String, String)], path: &Path) -> io::Result<()> {
    fs::write(path, to_csv(table, metadata))
}

/// Parse CSV text produced by [`to_csv`]. Metadata lines may appear
/// anywhere; the first non-comment line is the header.
pub fn from_csv(text: &str, name: &str) -> io::Result<(Table, Vec<(String, String)>)> {
    let mut metadata = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|s| s.to_string()).collect()),
            Some(cols) => {
                let cells: Result<Vec<f64>, _> =
                    line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let cells = cells.map_err(|e| {
                    io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("line {}: bad float: {e}", lineno + 1),
                    )
                })?;
                if cells.len() != cols.len() {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("line {}: expected {} cells, got {}", lineno + 1, cols.len(), cells.len()),
                    ));
                }
                rows.push(cells);
            }
        }
    }
    let columns = columns
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "missing header row"))?;
    Ok((Table { name: name.to_string(), columns, rows }, metadata))
}

/// Read a CSV file produced by [`write_csv`].
pub fn read_csv(path: &Path) -> io::Result<(Table, Vec<(String, String)>)> {
    let text = fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    from_csv(&text, name)
}

/// Render a table as a simple SVG line plot: `x_col` on the horizontal
/// axis, every other numeric column as one polyline.
pub fn render_line_svg(table: &Table, x_col: &str, title: &str) -> Option<String> {
    const W: f64 = 780.0;
    const H: f64 = 460.0;
    const MARGIN: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

    let xi = table.columns.iter().position(|c| c == x_col)?;
    if table.rows.is_empty() {
        return None;
    }
    let xs: Vec<f64> = table.rows.iter().map(|r| r[xi]).collect();
    let series: Vec<(String, Vec<f64>)> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != xi)
        .map(|(i, c)| (c.clone(), table.rows.iter().map(|r| r[i]).collect()))
        .collect();
    if series.is_empty() {
        return None;
    }
    let (xmin, xmax) = bounds(&xs);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, ys) in &series {
        let (lo, hi) = bounds(ys);
        ymin = ymin.min(lo);
        ymax = ymax.max(hi);
    }
    if !(ymin.is_finite() && ymax.is_finite()) {
        return None;
    }
    let xspan = if (xmax - xmin).abs() < 1e-300 { 1.0 } else { xmax - xmin };
    let yspan = if (ymax - ymin).abs() < 1e-300 { 1.0 } else { ymax - ymin };
    let px = |x: f64| MARGIN + (x - xmin) / xspan * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - ymin) / yspan * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = write!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle" font-family="sans-serif">{title}</text>"#,
        W / 2.0
    );
    // axes
    let _ = write!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    );
    for tick in 0..=4 {
        let fx = xmin + xspan * tick as f64 / 4.0;
        let fy = ymin + yspan * tick as f64 / 4.0;
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" font-family="sans-serif">{:.4}</text>"#,
            px(fx),
            H - MARGIN + 18.0,
            fx
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end" font-family="sans-serif">{:.4}</text>"#,
            MARGIN - 6.0,
            py(fy) + 4.0,
            fy
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle" font-family="sans-serif">{x_col}</text>"#,
        W / 2.0,
        H - 14.0
    );
    for (si, (label, ys)) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let points: Vec<String> =
            xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = write!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * si as f64;
        let _ = write!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}" font-size="12" font-family="sans-serif">{label}</text>"#,
            W - MARGIN - 150.0,
            ly,
            W - MARGIN - 132.0,
            ly + 6.0
        );
    }
    svg.push_str("</svg>");
    Some(svg)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo, hi)
}
