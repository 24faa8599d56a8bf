//! File formats: CSV tables, legacy VTK meshes and log-log SVG plots.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::analysis::{fit_power_law, DeltaSeries, RateFit};
use crate::geometry::Mesh;
use crate::solver::EigenPair;
use crate::{Error, Result, C64};

/// 17 significant digits, locale independent.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn write_eigs_csv<W: Write>(w: W, pairs: &[EigenPair]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "re_k", "im_k", "multiplicity", "residual"])?;
    for (i, p) in pairs.iter().enumerate() {
        out.write_record([
            i.to_string(),
            fmt_f64(p.k.re),
            fmt_f64(p.k.im),
            p.multiplicity.to_string(),
            fmt_f64(p.residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads back `(k, multiplicity)` from an eigenvalue table.
pub fn read_eigs_csv<R: std::io::Read>(r: R) -> Result<Vec<(C64, usize)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad eigenvalue record {rec:?}")))
        };
        let mult = rec
            .get(3)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad multiplicity in {rec:?}")))?;
        out.push((C64::new(num(1)?, num(2)?), mult));
    }
    Ok(out)
}

pub fn write_delta_csv<W: Write>(w: W, series: &[DeltaSeries]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["mode", "feature", "field", "r", "delta"])?;
    for s in series {
        for &(r, d) in &s.samples {
            out.write_record([
                s.mode.to_string(),
                s.feature_id.clone(),
                s.field.name().to_string(),
                fmt_f64(r),
                fmt_f64(d),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One fitted rate per series; `angle` is the opening angle of the feature.
pub struct RateRow<'a> {
    pub series: &'a DeltaSeries,
    pub angle: Option<f64>,
    pub fit: Result<RateFit>,
}

pub fn write_rates_csv<W: Write>(w: W, rows: &[RateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "mode",
        "feature",
        "field",
        "angle",
        "slope",
        "amplitude",
        "r2",
        "class",
        "samples",
    ])?;
    for row in rows {
        let s = row.series;
        let angle = row.angle.map(fmt_f64).unwrap_or_default();
        let (slope, amp, r2, class) = match &row.fit {
            Ok(f) => (
                fmt_f64(f.slope),
                fmt_f64(f.amplitude),
                fmt_f64(f.r2),
                f.class.name().to_string(),
            ),
            Err(e) => (String::new(), String::new(), String::new(), format!("error: {e}")),
        };
        out.write_record([
            s.mode.to_string(),
            s.feature_id.clone(),
            s.field.name().to_string(),
            angle,
            slope,
            amp,
            r2,
            class,
            s.samples.len().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes all roots per angular order.
pub fn write_roots_csv<W: Write>(w: W, roots: &[(usize, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["order", "root_index", "k"])?;
    for (m, ks) in roots {
        for (j, k) in ks.iter().enumerate() {
            out.write_record([m.to_string(), (j + 1).to_string(), fmt_f64(*k)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Point data of one eigenmode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFields {
    pub abs_u0: Vec<f64>,
    pub abs_u: Vec<f64>,
    pub abs_diff: Vec<f64>,
}

impl ModeFields {
    pub fn from_pair(pair: &EigenPair) -> Self {
        ModeFields {
            abs_u0: pair.u0.iter().map(|z| z.norm()).collect(),
            abs_u: pair.u.iter().map(|z| z.norm()).collect(),
            abs_diff: pair.u.iter().zip(&pair.u0).map(|(a, b)| (a - b).norm()).collect(),
        }
    }

    fn named(&self) -> [(&'static str, &[f64]); 3] {
        [
            ("abs_u0", &self.abs_u0),
            ("abs_u", &self.abs_u),
            ("abs_diff", &self.abs_diff),
        ]
    }
}

/// Legacy ASCII VTK unstructured grid with the three mode magnitudes as
/// point data.
pub fn write_vtk_mode<W: Write>(w: W, mesh: &Mesh, fields: &ModeFields, title: &str) -> Result<()> {
    write_vtk(w, mesh, title, &fields.named())
}

/// Legacy ASCII VTK unstructured grid. Values use the shortest exact
/// decimal representation so the file re-parses bitwise.
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, title: &str, scalars: &[(&str, &[f64])]) -> Result<()> {
    let nv = mesh.n_vertices();
    for (name, f) in scalars {
        if f.len() != nv {
            return Err(Error::DimensionMismatch(format!(
                "field {name} has {} values for {nv} vertices",
                f.len()
            )));
        }
    }
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0").unwrap();
    writeln!(s, "{}", title.replace('\n', " ")).unwrap();
    writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {nv} double").unwrap();
    for p in mesh.points() {
        writeln!(s, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    let k = mesh.dim() + 1;
    let nc = mesh.n_cells();
    writeln!(s, "CELLS {nc} {}", nc * (k + 1)).unwrap();
    for c in mesh.cells() {
        write!(s, "{k}").unwrap();
        for v in c {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "CELL_TYPES {nc}").unwrap();
    let ty = if mesh.dim() == 2 { 5 } else { 10 };
    for _ in 0..nc {
        writeln!(s, "{ty}").unwrap();
    }
    if !scalars.is_empty() {
        writeln!(s, "POINT_DATA {nv}").unwrap();
    }
    for (name, f) in scalars {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in *f {
            writeln!(s, "{v}").unwrap();
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Parsed content of a file written by [`write_vtk_mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub scalars: Vec<(String, Vec<f64>)>,
}

pub fn read_vtk<R: BufRead>(r: R) -> Result<VtkData> {
    let bad = |m: &str| Error::Parse(format!("vtk: {m}"));
    let mut lines = r.lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };
    let mut data = VtkData {
        points: Vec::new(),
        cells: Vec::new(),
        scalars: Vec::new(),
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("number `{t}`")));
    let count =
        |t: Option<&str>| -> Result<usize> { t.and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing count")) };
    while let Some(line) = next()? {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("POINTS") => {
                let n = count(tok.next())?;
                for _ in 0..n {
                    let l = next()?.ok_or_else(|| bad("truncated points"))?;
                    let v: Vec<f64> = l.split_whitespace().map(num).collect::<Result<_>>()?;
                    if v.len() != 3 {
                        return Err(bad("point needs 3 coordinates"));
                    }
                    data.points.push([v[0], v[1], v[2]]);
                }
            }
            Some("CELLS") => {
                let n = count(tok.next())?;
                for _ in 0..n {
                    let l = next()?.ok_or_else(|| bad("truncated cells"))?;
                    let v: Vec<usize> = l
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| bad("cell index")))
                        .collect::<Result<_>>()?;
                    data.cells.push(v[1..].to_vec());
                }
            }
            Some("SCALARS") => {
                let name = tok.next().ok_or_else(|| bad("unnamed scalars"))?.to_string();
                next()?;
                let mut v = Vec::with_capacity(data.points.len());
                for _ in 0..data.points.len() {
                    let l = next()?.ok_or_else(|| bad("truncated scalars"))?;
                    v.push(num(l.trim())?);
                }
                data.scalars.push((name, v));
            }
            _ => {}
        }
    }
    Ok(data)
}

/// One polyline of a log-log plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// (label, positive points, fitted slope) of one plotted series.
type CleanSeries = (String, Vec<(f64, f64)>, Option<f64>);

/// Log-log SVG with one polyline per series and the fitted slope in the
/// legend. Non-positive points are dropped.
pub fn plot_loglog(series: &[PlotSeries], title: &str) -> String {
    let (w, h, margin) = (640.0, 480.0, 60.0);
    let clean: Vec<CleanSeries> = series
        .iter()
        .map(|s| {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| {
                    let ok = x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite();
                    if !ok {
                        log::warn!("plot {title}: dropping ({x}, {y}) from {}", s.label);
                    }
                    ok
                })
                .collect();
            let slope = fit_power_law(&pts).ok().map(|f| f.slope);
            (s.label.clone(), pts, slope)
        })
        .collect();
    let all = clean.iter().flat_map(|c| c.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| margin + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |y: f64| h - margin - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * margin);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        w / 2.0,
        xml_escape(title)
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * margin,
        h - 2.0 * margin
    )
    .unwrap();
    for e in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(e));
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="12">1e{e}</text>"#,
            h - margin + 18.0
        )
        .unwrap();
    }
    for e in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(e));
        writeln!(
            s,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" font-size="12">1e{e}</text>"#,
            margin - 6.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">r</text>"#,
        w / 2.0,
        h - 12.0
    )
    .unwrap();
    for (i, (label, pts, slope)) in clean.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        let annot = slope.map(|v| format!(" (slope {v:.2})")).unwrap_or_default();
        let ly = margin + 16.0 + 16.0 * i as f64;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" font-size="12" fill="{color}">{}{}</text>"#,
            margin + 8.0,
            xml_escape(label),
            annot
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
