use anyhow::Result;
use std::fmt::Write as _;

pub const CSV_VERSION_LINE: &str = "# fractal-onb v1\n";

/// Fixed 17-significant-digit rendering so re-runs are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut out = CSV_VERSION_LINE.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out)?)
}

/// Numeric column of a signal file: one value per line, or `re,im` pairs.
/// Blank lines, `#` comments and a non-numeric header line are skipped.
pub fn read_signal(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 1 => out.push((v[0], 0.0)),
            Ok(v) if v.len() == 2 => out.push((v[0], v[1])),
            Ok(v) => anyhow::bail!("signal line {}: expected 1 or 2 numbers, got {}", line + 1, v.len()),
            Err(_) if out.is_empty() && line == 0 => continue,
            Err(e) => anyhow::bail!("signal line {}: {e}", line + 1),
        }
    }
    Ok(out)
}

pub enum Panel {
    /// Values on equal subintervals of `[0, 1]`.
    Steps(Vec<f64>),
    /// Sample points `(x, y)`.
    Curve(Vec<(f64, f64)>),
}

/// Small multiples: one framed panel per titled plot, `columns` per row.
pub fn svg_panels(title: &str, panels: &[(String, Panel)], columns: usize) -> String {
    const W: f64 = 160.0;
    const H: f64 = 110.0;
    const PAD: f64 = 14.0;
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let width = columns as f64 * (W + PAD) + PAD;
    let height = rows as f64 * (H + PAD + 14.0) + PAD + 24.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="18" font-size="14">{}</text>"#, escape(title));

    for (k, (name, panel)) in panels.iter().enumerate() {
        let x0 = PAD + (k % columns) as f64 * (W + PAD);
        let y0 = 24.0 + PAD + (k / columns) as f64 * (H + PAD + 14.0) + 14.0;
        let pts: Vec<(f64, f64)> = match panel {
            Panel::Steps(v) => {
                let n = v.len() as f64;
                v.iter()
                    .enumerate()
                    .flat_map(|(i, &y)| [(i as f64 / n, y), ((i + 1) as f64 / n, y)])
                    .collect()
            }
            Panel::Curve(p) => p.clone(),
        };
        let (xmin, xmax) = bounds(pts.iter().map(|p| p.0));
        let (ymin, ymax) = bounds(pts.iter().map(|p| p.1).chain([0.0]));
        let sx = |x: f64| x0 + (x - xmin) / (xmax - xmin) * W;
        let sy = |y: f64| y0 + H - (y - ymin) / (ymax - ymin) * H;

        let _ = writeln!(s, r#"<text x="{x0:.1}" y="{:.1}">{}</text>"#, y0 - 4.0, escape(name));
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{W}" height="{H}" fill="none" stroke="#999"/>"##
        );
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#ccc"/>"##,
            x0 + W,
            y = sy(0.0)
        );
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r##"<path d="{d}" fill="none" stroke="#1f5fa8" stroke-width="1.3"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        (lo - 1.0, lo + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
