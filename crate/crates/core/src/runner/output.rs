//! CSV time series and SVG population plots.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::disorder::EnsembleResult;
use crate::dynamics::StateSeries;
use crate::measures::{concurrence, populations, w_fidelity};
use crate::qops::BasisLabel;

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t, rho_0 … rho_{d−1}, <measure>[, stderr_0 … stderr_{d−1}]`.
/// Floats carry 17 significant digits.
pub fn write_csv<W: Write>(mut w: W, name: &str, result: &EnsembleResult) -> io::Result<()> {
    let dim = result.mean_states.first().map_or(0, |s| s.dim());
    let n = dim.trailing_zeros() as usize;
    let measure = if n == 2 { "concurrence" } else { "w_fidelity" };
    let with_stderr = result.realizations > 1;

    writeln!(
        w,
        "# scenario {name}; realizations {}; rho_k is the population of basis state k \
         (qubit 1 = most significant bit), 1-based diagonal label rho_(k+1)(k+1)",
        result.realizations
    )?;
    let labels: Vec<String> = (0..dim)
        .map(|k| {
            format!(
                "rho_{k}=|{}>",
                BasisLabel::from_index(k, n).expect("k < dim")
            )
        })
        .collect();
    writeln!(w, "# {}", labels.join(" "))?;

    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|k| format!("rho_{k}")));
    header.push(measure.to_string());
    if with_stderr {
        header.extend((0..dim).map(|k| format!("stderr_{k}")));
    }
    writeln!(w, "{}", header.join(","))?;

    for (g, (t, s)) in result.grid().iter().zip(result.states()).enumerate() {
        let mut row = String::with_capacity(32 * (2 * dim + 2));
        row.push_str(&sci(*t));
        for p in populations(s) {
            row.push(',');
            row.push_str(&sci(p));
        }
        let m = if n == 2 {
            concurrence(s)
        } else {
            w_fidelity(s)
        }
        .unwrap_or(f64::NAN);
        row.push(',');
        row.push_str(&sci(m));
        if with_stderr {
            for e in &result.population_stderr[g] {
                row.push(',');
                row.push_str(&sci(*e));
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

const COLORS: [&str; 8] = [
    "#d62728", "#1f77b4", "#000000", "#17becf", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Line plot of every basis population against time.
pub fn render_svg(title: &str, series: &dyn StateSeries) -> String {
    let (width, height) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let pw = width - left - right;
    let ph = height - top - bottom;
    let grid = series.grid();
    let t_max = grid.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let x = |t: f64| left + pw * t / t_max;
    let y = |p: f64| top + ph * (1.0 - p.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#ddd"/><text x="{2}" y="{3:.2}" text-anchor="end">{p:.2}</text>"##,
            y(p),
            left + pw,
            left - 6.0,
            y(p) + 4.0
        );
    }
    let ticks = 5;
    for i in 0..=ticks {
        let t = t_max * i as f64 / ticks as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x(t),
            top + ph + 18.0,
            trim_float(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">t</text><text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">population</text>"#,
        left + pw / 2.0,
        height - 10.0,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let states = series.states();
    let dim = states.first().map_or(0, |st| st.dim());
    let n = dim.trailing_zeros() as usize;
    for k in 0..dim {
        let color = COLORS[k % COLORS.len()];
        let mut pts = String::new();
        for (t, st) in grid.iter().zip(states) {
            let _ = write!(pts, "{:.2},{:.2} ", x(*t), y(st.get(k, k).re));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = top + 14.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let label = BasisLabel::from_index(k, n)
            .map(|b| b.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">|{label}⟩</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{basis_state, BasisLabel};

    fn tiny(realizations: usize) -> EnsembleResult {
        let s = basis_state(&BasisLabel::parse("01").unwrap());
        EnsembleResult {
            grid: vec![0.0, 0.5],
            mean_states: vec![s.clone(), s],
            population_stderr: vec![vec![0.0; 4], vec![0.01, 0.0, 0.0, 0.0]],
            realizations,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "demo", &tiny(3)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# scenario demo"));
        assert_eq!(
            lines[2],
            "t,rho_0,rho_1,rho_2,rho_3,concurrence,stderr_0,stderr_1,stderr_2,stderr_3"
        );
        let cells: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[0], "5.0000000000000000e-1");
        assert_eq!(cells[6].parse::<f64>().unwrap(), 0.01);
    }

    #[test]
    fn csv_without_stderr_for_single_run() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "demo", &tiny(1)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with("concurrence"));
    }

    #[test]
    fn svg_has_one_line_per_population() {
        let svg = render_svg("demo <a>", &tiny(1));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("demo &lt;a&gt;"));
    }
}
