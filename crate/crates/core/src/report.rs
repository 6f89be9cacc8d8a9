//! Deterministic SVG figures: correlation heatmaps and grouped quality plots.
//!
//! Output bytes depend only on the input tables, so the figures can be
//! compared against golden files.

use std::fmt::Write as _;

use crate::anderson::QualityLevel;
use crate::ensemble::{CorrelationRow, GroupRow, Metric, Param};
use crate::signal::Component;

pub const POOR_FILL: &str = "#d7301f";
pub const FAIR_GOOD_FILL: &str = "#fee440";
pub const EXCELLENT_FILL: &str = "#ffffff";

pub const QUALITATIVE_NOTE: &str =
    "few distinct parameter values: read correlations as qualitative trends";

/// Three colour classes: red for poor, yellow for fair and good, white for
/// excellent.
pub fn quality_fill(q: QualityLevel) -> &'static str {
    match q {
        QualityLevel::Poor => POOR_FILL,
        QualityLevel::Fair | QualityLevel::Good => FAIR_GOOD_FILL,
        QualityLevel::Excellent => EXCELLENT_FILL,
    }
}

/// Blue (−1) through white (0) to red (+1).
pub fn diverging_fill(r: f64) -> String {
    let r = r.clamp(-1.0, 1.0);
    let (end, w) = if r < 0.0 {
        ([33.0, 102.0, 172.0], -r)
    } else {
        ([178.0, 24.0, 43.0], r)
    };
    let c = |k: usize| (255.0 + (end[k] - 255.0) * w).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(0), c(1), c(2))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#f4f4f4"/>"##);
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{}</text>"#,
        esc(s)
    );
}

/// Heatmap of parameter × metric correlations. Cells without a significant
/// value are left blank: outlined, unfilled and unlabelled.
pub fn heatmap_svg(component: Component, rows: &[CorrelationRow], qualitative: bool) -> String {
    let metrics = Metric::all();
    let (cell_w, cell_h) = (52.0, 34.0);
    let (left, top) = (70.0, 60.0);
    let width = (left + cell_w * metrics.len() as f64 + 90.0) as u32;
    let height = (top + cell_h * 3.0 + 70.0) as u32;
    let mut out = String::new();
    header(&mut out, width, height);
    text(
        &mut out,
        left,
        22.0,
        "start",
        &format!("Significant correlations, {} component", component.name().to_uppercase()),
    );
    if qualitative {
        text(&mut out, left, 40.0, "start", QUALITATIVE_NOTE);
    }
    for (j, m) in metrics.iter().enumerate() {
        let x = left + cell_w * (j as f64 + 0.5);
        text(&mut out, x, top - 6.0, "middle", m.name());
    }
    for (i, p) in Param::ALL.iter().enumerate() {
        let y = top + cell_h * i as f64;
        text(&mut out, left - 8.0, y + cell_h / 2.0 + 4.0, "end", p.name());
        for (j, m) in metrics.iter().enumerate() {
            let x = left + cell_w * j as f64;
            let r = rows
                .iter()
                .find(|row| row.parameter == *p && row.metric == *m)
                .and_then(|row| row.r_significant);
            match r {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="{}" stroke="#999999"/>"##,
                        diverging_fill(r)
                    );
                    text(&mut out, x + cell_w / 2.0, y + cell_h / 2.0 + 4.0, "middle", &format!("{r:.2}"));
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="none" stroke="#999999"/>"##
                    );
                }
            }
        }
    }
    // colour bar
    let bx = left + cell_w * metrics.len() as f64 + 30.0;
    for k in 0..=20 {
        let r = 1.0 - k as f64 / 10.0;
        let y = top + k as f64 * (cell_h * 3.0 / 21.0);
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.1}" y="{y:.1}" width="14.0" height="{:.1}" fill="{}"/>"#,
            cell_h * 3.0 / 21.0,
            diverging_fill(r)
        );
    }
    text(&mut out, bx + 18.0, top + 8.0, "start", "+1");
    text(&mut out, bx + 18.0, top + cell_h * 3.0, "start", "-1");
    text(
        &mut out,
        left,
        top + cell_h * 3.0 + 24.0,
        "start",
        "Blank cells: p > alpha or undefined.",
    );
    out.push_str("</svg>\n");
    out
}

/// Scores of every run grouped by parameter value, one panel per parameter;
/// markers are coloured by quality class.
pub fn grouped_svg(component: Component, rows: &[GroupRow]) -> String {
    let metrics = Metric::all();
    let rows: Vec<&GroupRow> = rows.iter().filter(|r| r.component == component).collect();
    let (col_w, panel_h, gap) = (66.0, 150.0, 46.0);
    let (left, top) = (60.0, 50.0);
    let width = (left + col_w * metrics.len() as f64 + 30.0) as u32;
    let height = (top + 3.0 * (panel_h + gap) + 40.0) as u32;
    let mut out = String::new();
    header(&mut out, width, height);
    text(
        &mut out,
        left,
        22.0,
        "start",
        &format!("Scores grouped by fault parameter, {} component", component.name().to_uppercase()),
    );
    for (pi, p) in Param::ALL.iter().enumerate() {
        let y0 = top + pi as f64 * (panel_h + gap);
        let pr: Vec<&&GroupRow> = rows.iter().filter(|r| r.parameter == *p).collect();
        let mut values: Vec<f64> = pr.iter().map(|r| r.value).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let _ = writeln!(
            out,
            r##"<rect x="{left:.1}" y="{y0:.1}" width="{:.1}" height="{panel_h:.1}" fill="#e0e0e0" stroke="#666666"/>"##,
            col_w * metrics.len() as f64
        );
        text(&mut out, left - 40.0, y0 - 8.0, "start", &format!("{} ({})", p.name(), join_values(&values)));
        for s in [0.0, 4.0, 6.0, 8.0, 10.0] {
            let y = y0 + panel_h * (1.0 - s / 10.0);
            let _ = writeln!(
                out,
                r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#bbbbbb"/>"##,
                left + col_w * metrics.len() as f64
            );
            text(&mut out, left - 6.0, y + 4.0, "end", &format!("{s}"));
        }
        for (j, m) in metrics.iter().enumerate() {
            let xc = left + col_w * j as f64;
            if pi == 2 {
                text(&mut out, xc + col_w / 2.0, y0 + panel_h + 16.0, "middle", m.name());
            }
            for (k, v) in values.iter().enumerate() {
                let slot = col_w / (values.len() as f64 + 1.0);
                let x = xc + slot * (k as f64 + 1.0);
                for r in pr.iter().filter(|r| r.metric == *m && r.value == *v) {
                    let y = y0 + panel_h * (1.0 - r.score.clamp(0.0, 10.0) / 10.0);
                    let _ = writeln!(
                        out,
                        r##"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" fill="{}" stroke="#333333" stroke-width="0.6"/>"##,
                        quality_fill(r.quality)
                    );
                }
            }
        }
    }
    // legend
    let ly = height as f64 - 18.0;
    for (k, (fill, label)) in [
        (POOR_FILL, "poor"),
        (FAIR_GOOD_FILL, "fair / good"),
        (EXCELLENT_FILL, "excellent"),
    ]
    .iter()
    .enumerate()
    {
        let x = left + 130.0 * k as f64;
        let _ = writeln!(
            out,
            r##"<circle cx="{x:.1}" cy="{ly:.1}" r="5.0" fill="{fill}" stroke="#333333"/>"##
        );
        text(&mut out, x + 10.0, ly + 4.0, "start", label);
    }
    out.push_str("</svg>\n");
    out
}

fn join_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(param: Param, metric: Metric, r: Option<f64>) -> CorrelationRow {
        CorrelationRow {
            parameter: param,
            metric,
            n: 27,
            r,
            p: r.map(|_| 0.01),
            r_significant: r,
        }
    }

    #[test]
    fn fills() {
        assert_eq!(diverging_fill(0.0), "#ffffff");
        assert_eq!(diverging_fill(1.0), "#b2182b");
        assert_eq!(diverging_fill(-1.0), "#2166ac");
        assert_eq!(diverging_fill(7.0), "#b2182b");
        assert_eq!(quality_fill(QualityLevel::Poor), POOR_FILL);
        assert_eq!(quality_fill(QualityLevel::Fair), quality_fill(QualityLevel::Good));
        assert_eq!(quality_fill(QualityLevel::Excellent), EXCELLENT_FILL);
    }

    #[test]
    fn blank_cells_have_no_fill_or_label() {
        let rows = vec![
            corr(Param::Rake, Metric::Eg, Some(0.8)),
            corr(Param::Dip, Metric::Eg, None),
        ];
        let svg = heatmap_svg(Component::Ew, &rows, true);
        assert!(svg.contains(">0.80<"));
        assert!(!svg.contains(">0.00<"));
        assert_eq!(svg.matches(r#"fill="none""#).count(), 3 * 12 - 1);
        assert!(svg.contains(QUALITATIVE_NOTE));
        assert!(!heatmap_svg(Component::Ew, &rows, false).contains(QUALITATIVE_NOTE));
        assert_eq!(svg, heatmap_svg(Component::Ew, &rows, true));
    }

    #[test]
    fn escaping() {
        assert_eq!(esc("C* <a&b>"), "C* &lt;a&amp;b&gt;");
    }
}
