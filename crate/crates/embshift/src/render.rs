//! Report rendering: markdown and CSV tables, SVG density panels, and a
//! machine-readable JSON document that parses back to the same report.

use std::fmt::Write as _;

use embshift_core::audit::{AuditReport, ComparisonBlock, GroupBy, ModelRole};
use embshift_core::simengine::SimilaritySample;
use embshift_core::GenderClass;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MACHINE_FORMAT_TAG: &str = "embshift-audit";
pub const MACHINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Markdown,
    Csv,
    Svg,
    Machine,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Markdown => "md",
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Machine => "json",
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("SVG output needs KDE curves; block {0:?} has none (enable --kde on)")]
    MissingCurves(String),
    #[error("machine report: {0}")]
    Machine(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// D-statistic as printed in tables.
pub fn format_d(d: f64) -> String {
    format!("{d:.4}")
}

/// p-value as printed in tables: "<0.0001" below 1e-4.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

pub fn render_report(report: &AuditReport, format: Format) -> Result<Vec<u8>, RenderError> {
    match format {
        Format::Markdown => Ok(render_markdown(report).into_bytes()),
        Format::Csv => render_csv(report),
        Format::Svg => render_svg(report).map(String::into_bytes),
        Format::Machine => Ok(render_machine(report).into_bytes()),
    }
}

fn group_by_name(g: GroupBy) -> &'static str {
    match g {
        GroupBy::Stereotype => "stereotype",
        GroupBy::Occupation => "occupation",
        GroupBy::None => "none",
    }
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn render_markdown(report: &AuditReport) -> String {
    let mut out = String::new();
    let p = &report.parameters;
    let kde = match &p.kde {
        Some(k) => format!("{} bandwidth, {}-point grid", k.bandwidth, k.grid_size),
        None => "off".to_string(),
    };
    let _ = writeln!(out, "# Embedding association audit\n");
    let _ = writeln!(out, "- corpus: {}", report.corpus);
    let _ = writeln!(out, "- configuration: {}", report.config);
    let _ = writeln!(out, "- baseline model: {}", report.baseline_label);
    let _ = writeln!(out, "- mitigated model: {}", report.mitigated_label);
    let _ = writeln!(out, "- grouping: {}", group_by_name(p.group_by));
    let _ = writeln!(out, "- KDE: {kde}");
    let _ = writeln!(out, "- p-values: {}", p.p_value_method);
    let _ = writeln!(out, "- tool version: {}\n", report.tool_version);

    let _ = writeln!(out, "## Kolmogorov-Smirnov comparisons\n");
    let _ = writeln!(out, "| Group | Comparison | D-statistic | p-value | n | m |");
    let _ = writeln!(out, "|---|---|---:|---:|---:|---:|");
    for block in &report.blocks {
        for row in &block.rows {
            let r = &row.result;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                md_cell(&block.group_label),
                row.kind.label(),
                format_d(r.d_statistic),
                format_p(r.p_value),
                r.n,
                r.m
            );
        }
    }

    if report.blocks.iter().any(|b| !b.summaries.is_empty()) {
        let _ = writeln!(out, "\n## Cosine similarity summaries\n");
        let _ = writeln!(out, "| Group | Model | Gender terms | n | mean | sd | min | q1 | median | q3 | max |");
        let _ = writeln!(out, "|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|");
        for block in &report.blocks {
            for cell in &block.summaries {
                let s = &cell.summary;
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                    md_cell(&block.group_label),
                    cell.model.as_str(),
                    cell.gender,
                    s.count,
                    s.mean,
                    s.std_dev,
                    s.min,
                    s.q1,
                    s.median,
                    s.q3,
                    s.max
                );
            }
        }
    }
    out
}

pub fn render_csv(report: &AuditReport) -> Result<Vec<u8>, RenderError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "comparison", "d", "p", "n", "m"])?;
    for block in &report.blocks {
        for row in &block.rows {
            let r = &row.result;
            w.write_record([
                block.group_label.as_str(),
                row.kind.id(),
                &format_d(r.d_statistic),
                &format_p(r.p_value),
                &r.n.to_string(),
                &r.m.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| RenderError::Csv(e.into_error().into()))
}

#[derive(Serialize, Deserialize)]
struct MachineDoc {
    format: String,
    version: u32,
    report: AuditReport,
}

pub fn render_machine(report: &AuditReport) -> String {
    let doc =
        MachineDoc { format: MACHINE_FORMAT_TAG.to_string(), version: MACHINE_FORMAT_VERSION, report: report.clone() };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_machine(bytes: &[u8]) -> Result<AuditReport, RenderError> {
    let doc: MachineDoc = serde_json::from_slice(bytes).map_err(|e| RenderError::Machine(e.to_string()))?;
    if doc.format != MACHINE_FORMAT_TAG || doc.version != MACHINE_FORMAT_VERSION {
        return Err(RenderError::Machine(format!("unsupported document {} v{}", doc.format, doc.version)));
    }
    Ok(doc.report)
}

/// Per-sample dump: one CSV row per score, 17 significant digits.
pub fn render_samples_csv(samples: &[SimilaritySample]) -> Result<Vec<u8>, RenderError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seq_id", "model_label", "config", "gender_class", "stereotype", "score"])?;
    for s in samples {
        w.write_record([
            s.seq_id.as_str(),
            &s.model_label,
            s.config.as_str(),
            s.gender_class.as_str(),
            s.stereotype.as_str(),
            &format!("{:.16e}", s.score),
        ])?;
    }
    w.into_inner().map_err(|e| RenderError::Csv(e.into_error().into()))
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn gender_color(g: GenderClass) -> &'static str {
    match g {
        GenderClass::Male => "#1f77b4",
        GenderClass::Female => "#d62728",
    }
}

/// One row per block, baseline panel left and mitigated panel right.
pub fn render_svg(report: &AuditReport) -> Result<String, RenderError> {
    for block in &report.blocks {
        if block.curves.is_empty() {
            return Err(RenderError::MissingCurves(block.group_label.clone()));
        }
    }
    let width = 2.0 * PANEL_W;
    let height = 30.0 + PANEL_H * report.blocks.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Cosine similarity densities, configuration {}</text>"#,
        width / 2.0,
        report.config
    );
    for (i, block) in report.blocks.iter().enumerate() {
        let y0 = 30.0 + i as f64 * PANEL_H;
        for (j, model) in ModelRole::ALL.iter().enumerate() {
            let label = match model {
                ModelRole::Baseline => &report.baseline_label,
                ModelRole::Mitigated => &report.mitigated_label,
            };
            svg_panel(&mut out, block, *model, label, j as f64 * PANEL_W, y0);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn svg_panel(out: &mut String, block: &ComparisonBlock, model: ModelRole, label: &str, x0: f64, y0: f64) {
    // shared axes across both panels of a block
    let (mut xmin, mut xmax, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for c in &block.curves {
        xmin = xmin.min(c.curve.grid[0]);
        xmax = xmax.max(*c.curve.grid.last().unwrap());
        ymax = c.curve.density.iter().copied().fold(ymax, f64::max);
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let (px0, py0) = (x0 + MARGIN_L, y0 + MARGIN_T);
    let sx = |x: f64| px0 + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = |y: f64| py0 + plot_h - y / ymax * plot_h;

    let title = format!(
        "{} - {} ({})",
        block.group_label,
        match model {
            ModelRole::Baseline => "Baseline",
            ModelRole::Mitigated => "Mitigated",
        },
        label
    );
    let _ = writeln!(out, r#"<g>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        px0 + plot_w / 2.0,
        y0 + 22.0,
        xml_escape(&title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{px0:.2}" y="{py0:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = xmin + t * (xmax - xmin);
        let yv = t * ymax;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"#,
            sx(xv),
            py0 + plot_h + 15.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#, px0 - 5.0, sy(yv) + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">cosine similarity</text>"#,
        px0 + plot_w / 2.0,
        py0 + plot_h + 35.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">density</text>"#,
        x0 + 15.0,
        py0 + plot_h / 2.0,
        x0 + 15.0,
        py0 + plot_h / 2.0
    );
    for (k, c) in block.curves.iter().filter(|c| c.model == model).enumerate() {
        let points: Vec<String> =
            c.curve.grid.iter().zip(&c.curve.density).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let color = gender_color(c.gender);
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = py0 + 12.0 + 14.0 * k as f64;
        let lx = px0 + plot_w - 110.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{ly:.2}">{} terms</text>"#, lx + 22.0, c.gender);
    }
    let _ = writeln!(out, "</g>");
}
