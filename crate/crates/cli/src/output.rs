use std::fmt::Write as _;
use std::io::{self, Write};

use hcv_dynamics::{SweepGrid, SweepSpec, Trajectory};

use crate::fmt_f64;

pub const TRAJECTORY_HEADER: &str = "t,T,I,V";

pub fn write_trajectory_csv(traj: &Trajectory, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (t, st) in traj.times.iter().zip(&traj.states) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(st.t),
            fmt_f64(st.i),
            fmt_f64(st.v)
        )?;
    }
    Ok(())
}

/// Axis columns, then the requested outputs, then `status`. Missing values
/// are empty fields.
pub fn write_sweep_csv(spec: &SweepSpec, grid: &SweepGrid, out: &mut dyn Write) -> io::Result<()> {
    let mut header: Vec<&str> = vec![spec.axis1.param.as_str()];
    if let Some(a2) = &spec.axis2 {
        header.push(a2.param.as_str());
    }
    header.extend(grid.outputs.iter().map(|o| o.as_str()));
    header.push("status");
    writeln!(out, "{}", header.join(","))?;

    for cell in &grid.cells {
        let mut fields = vec![fmt_f64(cell.axis1)];
        if let Some(v) = cell.axis2 {
            fields.push(fmt_f64(v));
        }
        let v = &cell.values;
        for o in &grid.outputs {
            use hcv_dynamics::sweep::Output;
            let field = match o {
                Output::R0 => v.r0.map(fmt_f64),
                Output::Regime => v.regime.map(|r| r.as_str().to_string()),
                Output::T0 => v.t0.map(fmt_f64),
                Output::EstarT => v.estar_t.map(fmt_f64),
                Output::Delta2 => v.delta2.map(fmt_f64),
            };
            fields.push(field.unwrap_or_default());
        }
        fields.push(cell.status.as_str().to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub const DEFAULT_WIDTH: u32 = 800;
pub const DEFAULT_HEIGHT: u32 = 500;
const MARGIN: f64 = 60.0;

/// Static SVG: one polyline of `ys` against `xs`, both axes linear, with the
/// extreme values written at the corners.
pub fn render_svg(label: &str, xs: &[f64], ys: &[f64], width: u32, height: u32) -> String {
    let (w, h) = (width as f64, height as f64);
    let range = |v: &[f64]| {
        v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        })
    };
    let (x_lo, x_hi) = range(xs);
    let (y_lo, y_hi) = range(ys);
    let scale = |v: f64, lo: f64, hi: f64, a: f64, b: f64| {
        if hi > lo {
            a + (v - lo) / (hi - lo) * (b - a)
        } else {
            (a + b) / 2.0
        }
    };
    let (left, right, top, bottom) = (MARGIN, w - MARGIN / 2.0, MARGIN / 2.0, h - MARGIN);

    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let px = scale(*x, x_lo, x_hi, left, right);
        let py = scale(*y, y_lo, y_hi, bottom, top);
        let _ = write!(points, "{px:.2},{py:.2} ");
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        right - left,
        bottom - top
    );
    if !xs.is_empty() {
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let text = |svg: &mut String, x: f64, y: f64, anchor: &str, s: String| {
            let _ = writeln!(
                svg,
                r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{s}</text>"#
            );
        };
        text(&mut svg, left - 4.0, top + 4.0, "end", format!("{y_hi:.4e}"));
        text(&mut svg, left - 4.0, bottom, "end", format!("{y_lo:.4e}"));
        text(&mut svg, left, bottom + 16.0, "start", format!("{x_lo}"));
        text(&mut svg, right, bottom + 16.0, "end", format!("{x_hi}"));
        text(&mut svg, (left + right) / 2.0, top - 8.0, "middle", label.to_string());
    }
    svg.push_str("</svg>\n");
    svg
}
