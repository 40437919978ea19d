//! Hand-written SVG bar charts. Every bar group carries `class="bar-group"`
//! and a `data-model` attribute so the output can be checked without a
//! browser.

use std::fmt::Write;

use super::report::{EvalReport, Status};

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_B: f64 = 60.0;
const MARGIN_T: f64 = 36.0;
const COLORS: [&str; 3] = ["#4c72b0", "#dd8452", "#55a868"];

struct Series<'a> {
    name: &'a str,
    /// One value per group; `None` marks a failed model.
    values: Vec<Option<f64>>,
}

struct Panel<'a> {
    title: &'a str,
    unit: &'a str,
    groups: Vec<(String, String)>,
    series: Vec<Series<'a>>,
    /// Fixed y range; derived from the data when `None`.
    range: Option<(f64, f64)>,
    decimals: usize,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_range(series: &[Series<'_>]) -> (f64, f64) {
    let vals = series.iter().flat_map(|s| s.values.iter().flatten().copied());
    let (lo, hi) = vals.fold((0.0_f64, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let hi = if hi == lo { lo + 1.0 } else { hi };
    let pad = 0.1 * (hi - lo);
    (if lo < 0.0 { lo - pad } else { 0.0 }, hi + pad)
}

fn draw_panel(out: &mut String, p: &Panel<'_>, ox: f64, oy: f64) {
    let (lo, hi) = p.range.unwrap_or_else(|| nice_range(&p.series));
    let plot_w = PANEL_W - MARGIN_L - 16.0;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let y_of = |v: f64| oy + MARGIN_T + plot_h * (hi - v) / (hi - lo);
    let x0 = ox + MARGIN_L;
    let _ = writeln!(out, r#"<g class="panel" data-title="{}">"#, esc(p.title));
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" font-weight="bold">{}</text>"#,
        x0,
        oy + 20.0,
        esc(p.title)
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{v:.1}</text>"##,
            x0 + plot_w,
            x0 - 4.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" transform="rotate(-90 {:.1} {:.1})" text-anchor="middle">{}</text>"#,
        ox + 14.0,
        oy + MARGIN_T + plot_h / 2.0,
        ox + 14.0,
        oy + MARGIN_T + plot_h / 2.0,
        esc(p.unit)
    );
    let zero = y_of(0.0_f64.clamp(lo, hi));
    let group_w = plot_w / p.groups.len().max(1) as f64;
    let bar_w = (group_w * 0.8) / p.series.len().max(1) as f64;
    for (g, (key, label)) in p.groups.iter().enumerate() {
        let gx = x0 + g as f64 * group_w + group_w * 0.1;
        let failed = p.series.iter().all(|s| s.values[g].is_none());
        let cls = if failed { "bar-group failed" } else { "bar-group" };
        let _ = writeln!(out, r#"<g class="{cls}" data-model="{}">"#, esc(key));
        for (s, series) in p.series.iter().enumerate() {
            let x = gx + s as f64 * bar_w;
            match series.values[g] {
                Some(v) => {
                    let (top, h) = if v >= 0.0 { (y_of(v), zero - y_of(v)) } else { (zero, y_of(v) - zero) };
                    let _ = writeln!(
                        out,
                        r#"<rect class="bar" data-series="{}" data-value="{v}" x="{x:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                        esc(series.name),
                        bar_w * 0.95,
                        h.max(0.0),
                        COLORS[s % COLORS.len()]
                    );
                    let ty = if v >= 0.0 { top - 3.0 } else { top + h + 10.0 };
                    let _ = writeln!(
                        out,
                        r#"<text class="value" x="{:.1}" y="{ty:.1}" font-size="9" text-anchor="middle">{v:.*}</text>"#,
                        x + bar_w * 0.475,
                        p.decimals
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"<text class="value" x="{:.1}" y="{:.1}" font-size="9" text-anchor="middle" fill="#c00">n/a</text>"##,
                        x + bar_w * 0.475,
                        zero - 3.0
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            oy + PANEL_H - MARGIN_B + 16.0,
            esc(label)
        );
        let _ = writeln!(out, "</g>");
    }
    if p.series.len() > 1 {
        for (s, series) in p.series.iter().enumerate() {
            let lx = x0 + s as f64 * 110.0;
            let ly = oy + PANEL_H - 18.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{ly:.1}" font-size="10">{}</text>"#,
                ly - 9.0,
                COLORS[s % COLORS.len()],
                lx + 14.0,
                esc(series.name)
            );
        }
    }
    let _ = writeln!(out, "</g>");
}

fn document(panels: &[Panel<'_>], cols: usize, title: &str, notes: &[String]) -> String {
    let rows = panels.len().div_ceil(cols);
    let w = PANEL_W * cols as f64;
    let notes_h = 16.0 * notes.len() as f64;
    let h = PANEL_H * rows as f64 + 40.0 + notes_h;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="12" y="24" font-size="16" font-weight="bold">{}</text>"#, esc(title));
    for (i, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, PANEL_W * (i % cols) as f64, 40.0 + PANEL_H * (i / cols) as f64);
    }
    for (i, n) in notes.iter().enumerate() {
        let _ = writeln!(
            out,
            r##"<text class="legend-note" x="12" y="{:.1}" font-size="11" fill="#c00">{}</text>"##,
            40.0 + PANEL_H * rows as f64 + 12.0 + 16.0 * i as f64,
            esc(n)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub(crate) fn render_models(report: &EvalReport) -> String {
    let groups: Vec<(String, String)> =
        report.models.iter().map(|m| (m.model.as_str().to_string(), m.model.display_name().to_string())).collect();
    let col = |f: fn(&super::report::ModelScores) -> f64| -> Vec<Option<f64>> {
        report.models.iter().map(|m| m.scores.as_ref().map(f)).collect()
    };
    let panels = [
        Panel {
            title: "Accuracy",
            unit: "%",
            groups: groups.clone(),
            series: vec![
                Series { name: "train", values: col(|s| s.train_accuracy) },
                Series { name: "test", values: col(|s| s.test_accuracy) },
            ],
            range: Some((0.0, 100.0)),
            decimals: 2,
        },
        Panel {
            title: "Generalization gap (train - test)",
            unit: "percentage points",
            groups: groups.clone(),
            series: vec![Series { name: "gap", values: col(|s| s.generalization_gap) }],
            range: None,
            decimals: 2,
        },
        Panel {
            title: "Model complexity",
            unit: "trainable parameters",
            groups: groups.clone(),
            series: vec![Series { name: "parameters", values: col(|s| s.parameter_count as f64) }],
            range: None,
            decimals: 0,
        },
        Panel {
            title: "Macro precision / recall / F1 (test)",
            unit: "score",
            groups,
            series: vec![
                Series { name: "precision", values: col(|s| s.macro_precision) },
                Series { name: "recall", values: col(|s| s.macro_recall) },
                Series { name: "F1", values: col(|s| s.macro_f1) },
            ],
            range: Some((0.0, 1.0)),
            decimals: 2,
        },
    ];
    let notes: Vec<String> = report
        .models
        .iter()
        .filter(|m| m.status == Status::Failed)
        .map(|m| format!("{} failed: {}", m.model.display_name(), m.error.as_deref().unwrap_or("unknown error")))
        .collect();
    let title = format!("Classifier comparison ({} train / {} test)", report.split.n_train, report.split.n_test);
    document(&panels, 2, &title, &notes)
}

pub(crate) fn render_feature_maps(report: &EvalReport) -> String {
    let fm = &report.feature_maps;
    let groups: Vec<(String, String)> =
        fm.iter().map(|r| (r.map.clone(), format!("{} ({} qubits)", r.map, r.n_qubits))).collect();
    let panels = [
        Panel {
            title: "QSVM accuracy by feature map",
            unit: "%",
            groups: groups.clone(),
            series: vec![
                Series { name: "train", values: fm.iter().map(|r| r.train_accuracy).collect() },
                Series { name: "test", values: fm.iter().map(|r| r.test_accuracy).collect() },
                Series { name: "cv mean", values: fm.iter().map(|r| r.cv_accuracy).collect() },
            ],
            range: Some((0.0, 100.0)),
            decimals: 2,
        },
        Panel {
            title: "Generalization gap",
            unit: "percentage points",
            groups,
            series: vec![Series { name: "gap", values: fm.iter().map(|r| r.generalization_gap).collect() }],
            range: None,
            decimals: 2,
        },
    ];
    let notes: Vec<String> = fm
        .iter()
        .filter(|r| r.status == Status::Failed)
        .map(|r| format!("{} failed: {}", r.map, r.error.as_deref().unwrap_or("unknown error")))
        .collect();
    document(&panels, 2, "Feature map comparison", &notes)
}
