//! Report tables and SVG plots.

use std::fmt::Write as _;

use crate::classifiers::ModelKind;
use crate::ensemble::VotingMode;
use crate::error::{Error, Result};
use crate::evaluation::{metrics_csv, CvReport, MetricSet, RocCurve};
use crate::preprocess::CorrelationMatrix;

/// Row order of the summary table.
pub fn table_order() -> Vec<&'static str> {
    let mut order: Vec<&str> = ModelKind::ALL.iter().map(|k| k.display_name()).collect();
    order.push(VotingMode::Soft.display_name());
    order.push(VotingMode::Hard.display_name());
    order
}

/// Metrics table in the fixed model order with 4-decimal values. Unknown
/// names follow in input order.
pub fn table_rows(rows: &[(String, MetricSet)]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::domain("no results to report"));
    }
    let order = table_order();
    let rank = |name: &str| order.iter().position(|o| *o == name).unwrap_or(order.len());
    let mut sorted: Vec<&(String, MetricSet)> = rows.iter().collect();
    sorted.sort_by_key(|(name, _)| rank(name));
    let present: Vec<&str> = sorted.iter().map(|(n, _)| n.as_str()).collect();
    for expected in &order[..=ModelKind::ALL.len()] {
        if !present.contains(expected) && rows.len() > 1 {
            log::warn!("report has no row for {expected}");
        }
    }
    Ok(metrics_csv(sorted.into_iter().map(|(n, m)| (n.as_str(), m)), 4))
}

/// `report.csv` from cross-validation reports.
pub fn emit_table3(reports: &[CvReport]) -> Result<String> {
    let rows: Vec<(String, MetricSet)> = reports
        .iter()
        .map(|r| (r.model_name.clone(), r.mean))
        .collect();
    table_rows(&rows)
}

fn threshold_text(t: f64) -> String {
    if t == f64::INFINITY {
        "inf".to_string()
    } else if t == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{t:.6}")
    }
}

pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{:.6},{:.6}", threshold_text(p.threshold), p.fpr, p.tpr);
    }
    out
}

const PLOT_LEFT: f64 = 50.0;
const PLOT_TOP: f64 = 30.0;
const PLOT_SIZE: f64 = 320.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf",
];

fn plot_x(fpr: f64) -> f64 {
    PLOT_LEFT + PLOT_SIZE * fpr
}

fn plot_y(tpr: f64) -> f64 {
    PLOT_TOP + PLOT_SIZE * (1.0 - tpr)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// ROC plot: unit-square axes, the chance diagonal, one polyline per curve
/// and the AUC of each in a text element.
pub fn roc_svg(curves: &[(String, RocCurve)]) -> String {
    let width = PLOT_LEFT + PLOT_SIZE + 220.0;
    let height = PLOT_TOP + PLOT_SIZE + 50.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{PLOT_SIZE}" height="{PLOT_SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<line class="chance" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-dasharray="4 4"/>"##,
        plot_x(0.0),
        plot_y(0.0),
        plot_x(1.0),
        plot_y(1.0)
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{tick:.1}</text>"#,
            plot_x(tick),
            plot_y(0.0) + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick:.1}</text>"#,
            PLOT_LEFT - 6.0,
            plot_y(tick) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">False positive rate</text>"#,
        plot_x(0.5),
        plot_y(0.0) + 34.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">True positive rate</text>"#,
        plot_y(0.5),
        plot_y(0.5)
    );
    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", plot_x(p.fpr), plot_y(p.tpr)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text class="auc" x="{:.2}" y="{:.2}" fill="{color}">{} AUC = {:.4}</text>"#,
            PLOT_LEFT + PLOT_SIZE + 12.0,
            PLOT_TOP + 14.0 + 18.0 * i as f64,
            escape(name),
            curve.auc
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Linear ramp from blue at -1 to red at +1.
fn ramp(v: f64) -> String {
    let t = ((v.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0);
    let (lo, hi) = ([0x21, 0x66, 0xac], [0xb2, 0x18, 0x2b]);
    let c: Vec<u8> = lo
        .iter()
        .zip(hi.iter())
        .map(|(&a, &b): (&i32, &i32)| (f64::from(a) + t * f64::from(b - a)).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Heatmap of a correlation matrix with the value printed in each cell.
pub fn corr_svg(m: &CorrelationMatrix) -> String {
    let cell = 40.0;
    let margin = 80.0;
    let n = m.labels.len() as f64;
    let size = margin + cell * n + 10.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="10">"#
    );
    for (i, label) in m.labels.iter().enumerate() {
        let offset = margin + cell * (i as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{offset:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            margin - 4.0,
            escape(label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{offset:.2}" y="{:.2}" text-anchor="start" transform="rotate(-60 {offset:.2} {:.2})">{}</text>"#,
            margin - 4.0,
            margin - 4.0,
            escape(label)
        );
    }
    for (i, row) in m.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let x = margin + cell * j as f64;
            let y = margin + cell * i as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell}" height="{cell}" fill="{}"/>"#,
                ramp(v)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" dominant-baseline="middle" fill="white">{v:.2}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
