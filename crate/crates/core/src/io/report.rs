use std::fmt::Write as _;
use std::str::FromStr;

use crate::metrics::{MetricsDocument, ResponseReport, StrategyBreakdown};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (expected md, csv or json)")),
        }
    }
}

/// Renders metrics documents. Markdown and CSV rows are ordered by
/// language (IS, CS, ES), then system; JSON is the lossless metrics-file
/// encoding.
pub fn render_report(docs: &[MetricsDocument], format: ReportFormat) -> String {
    let mut sorted: Vec<&MetricsDocument> = docs.iter().collect();
    sorted.sort_by(|a, b| (a.language, &a.system).cmp(&(b.language, &b.system)));
    match format {
        ReportFormat::Markdown => markdown(&sorted),
        ReportFormat::Csv => csv_long(&sorted),
        ReportFormat::Json => {
            let mut buf = Vec::new();
            super::write_metrics(&mut buf, docs).expect("writing to memory");
            String::from_utf8(buf).expect("json is utf-8")
        }
    }
}

fn fixed(x: f64, places: usize) -> String {
    let s = format!("{x:.places$}");
    // -0.000 reads as a change that is not there
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn triplet(b: &StrategyBreakdown<f64>) -> String {
    format!("({}, {}, {})", fixed(b.m, 2), fixed(b.f, 2), fixed(b.n, 2))
}

fn delta(x: f64, significant: bool) -> String {
    if significant {
        format!("**{}**", fixed(x, 3))
    } else {
        fixed(x, 3)
    }
}

fn row_start(doc: &MetricsDocument) -> String {
    format!("| {} | {} |", doc.language.code().to_uppercase(), doc.system)
}

fn table_header(out: &mut String, title: &str, columns: &[&str]) {
    let _ = writeln!(out, "\n## {title}\n");
    let _ = writeln!(out, "| Lang. | System | {} |", columns.join(" | "));
    let _ = writeln!(out, "|---|---|{}", "---:|".repeat(columns.len()));
}

fn response_row(doc: &MetricsDocument, r: &ResponseReport<f64>) -> String {
    format!(
        "{} {} | {} | {} | {} | {} |",
        row_start(doc),
        triplet(&r.det),
        triplet(&r.amb),
        delta(r.delta_m, r.significant_m),
        delta(r.delta_f, false),
        delta(r.delta_n, r.significant_n),
    )
}

fn markdown(docs: &[&MetricsDocument]) -> String {
    let mut out = String::from("# Gender-neutral translation report\n");
    if let Some(t) = docs.first().map(|d| d.threshold) {
        let _ = writeln!(out, "\nBold deltas have an absolute value of at least {t}.");
    }

    table_header(
        &mut out,
        "Baseline gender neutrality (determined gender)",
        &["(M, F, N)_Det", "N_Det", "N1", "N2", "N3", "N4", "N5"],
    );
    for doc in docs {
        if let Some(b) = &doc.baseline {
            let strategies = match &b.breakdown.strategies {
                Some(s) => s.iter().map(|x| fixed(*x, 3)).collect::<Vec<_>>().join(" | "),
                None => vec!["-"; 5].join(" | "),
            };
            let _ = writeln!(
                out,
                "{} {} | {} | {} |",
                row_start(doc),
                triplet(&b.breakdown),
                fixed(b.n_det, 3),
                strategies
            );
        }
    }

    let response_cols = ["(M, F, N)_Det", "(M, F, N)_Amb", "ΔM", "ΔF", "ΔN"];
    table_header(&mut out, "Ambiguity by omission (I, you)", &response_cols);
    for doc in docs {
        if let Some(s) = &doc.omission_response {
            let _ = writeln!(out, "{}", response_row(doc, &s.macro_average));
        }
    }

    table_header(&mut out, "Active ambiguity (they)", &response_cols);
    for doc in docs {
        if let Some(s) = &doc.active_response {
            let _ = writeln!(out, "{}", response_row(doc, &s.macro_average));
        }
    }

    table_header(
        &mut out,
        "Active ambiguity by strategy",
        &["(M, F, N)_Det", "ΔN", "ΔN1", "ΔN2", "ΔN3", "ΔN4", "ΔN5"],
    );
    for doc in docs {
        if let Some(s) = &doc.active_response {
            let r = &s.macro_average;
            let strategies = match &r.delta_strategies {
                Some(d) => d.iter().map(|x| fixed(*x, 3)).collect::<Vec<_>>().join(" | "),
                None => vec!["-"; 5].join(" | "),
            };
            let _ = writeln!(
                out,
                "{} {} | {} | {} |",
                row_start(doc),
                triplet(&r.det),
                delta(r.delta_n, r.significant_n),
                strategies
            );
        }
    }

    table_header(
        &mut out,
        "Stereotyped adverbs",
        &["(M, F, N)_Neutral", "(M, F, N)_StereoM", "(M, F, N)_StereoF", "ΔG_avg", "ΔN_avg"],
    );
    for doc in docs {
        if let Some(s) = &doc.stereotype {
            let r = &s.report;
            let _ = writeln!(
                out,
                "{} {} | {} | {} | {} | {} |",
                row_start(doc),
                triplet(&r.neutral),
                triplet(&r.stereo_m),
                triplet(&r.stereo_f),
                delta(r.delta_g_avg, r.significant_g),
                delta(r.delta_n_avg, false),
            );
        }
    }

    table_header(
        &mut out,
        "Coverage",
        &["Slots", "Scored", "Unmatched", "U rate", "Missing", "Orphan"],
    );
    for doc in docs {
        let c = &doc.coverage;
        let _ = writeln!(
            out,
            "{} {} | {} | {} | {} | {} | {} |",
            row_start(doc),
            c.suite_slots,
            c.scored_slots,
            c.unmatched,
            c.u_rate.map_or("-".to_string(), |u| fixed(u, 3)),
            c.missing_scores,
            c.orphan_scores,
        );
    }
    out
}

fn csv_long(docs: &[&MetricsDocument]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lang", "system", "section", "metric", "value", "significant"])
        .expect("writing to memory");
    let mut row = |doc: &MetricsDocument, section: &str, metric: &str, value: String, sig: Option<bool>| {
        w.write_record([
            doc.language.code(),
            doc.system.as_str(),
            section,
            metric,
            value.as_str(),
            sig.map_or("", |s| if s { "true" } else { "false" }),
        ])
        .expect("writing to memory");
    };
    for doc in docs {
        if let Some(b) = &doc.baseline {
            breakdown_rows(&mut row, doc, "baseline", "", &b.breakdown);
        }
        for (section, s) in [("omission", &doc.omission_response), ("active", &doc.active_response)] {
            let Some(s) = s else { continue };
            let r = &s.macro_average;
            breakdown_rows(&mut row, doc, section, "det_", &r.det);
            breakdown_rows(&mut row, doc, section, "amb_", &r.amb);
            row(doc, section, "delta_m", r.delta_m.to_string(), Some(r.significant_m));
            row(doc, section, "delta_f", r.delta_f.to_string(), None);
            row(doc, section, "delta_n", r.delta_n.to_string(), Some(r.significant_n));
            if let Some(d) = &r.delta_strategies {
                for (i, x) in d.iter().enumerate() {
                    row(doc, section, &format!("delta_n{}", i + 1), x.to_string(), None);
                }
            }
        }
        if let Some(s) = &doc.stereotype {
            let r = &s.report;
            breakdown_rows(&mut row, doc, "stereotype", "neutral_", &r.neutral);
            breakdown_rows(&mut row, doc, "stereotype", "stereo_m_", &r.stereo_m);
            breakdown_rows(&mut row, doc, "stereotype", "stereo_f_", &r.stereo_f);
            row(doc, "stereotype", "delta_g_avg", r.delta_g_avg.to_string(), Some(r.significant_g));
            row(doc, "stereotype", "delta_n_avg", r.delta_n_avg.to_string(), None);
        }
        let c = &doc.coverage;
        for (metric, value) in [
            ("suite_slots", c.suite_slots),
            ("scored_slots", c.scored_slots),
            ("unmatched", c.unmatched),
            ("missing_scores", c.missing_scores),
            ("orphan_scores", c.orphan_scores),
        ] {
            row(doc, "coverage", metric, value.to_string(), None);
        }
        if let Some(u) = c.u_rate {
            row(doc, "coverage", "u_rate", u.to_string(), None);
        }
    }
    drop(row);
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

fn breakdown_rows(
    row: &mut impl FnMut(&MetricsDocument, &str, &str, String, Option<bool>),
    doc: &MetricsDocument,
    section: &str,
    prefix: &str,
    b: &StrategyBreakdown<f64>,
) {
    row(doc, section, &format!("{prefix}m"), b.m.to_string(), None);
    row(doc, section, &format!("{prefix}f"), b.f.to_string(), None);
    row(doc, section, &format!("{prefix}n"), b.n.to_string(), None);
    if let Some(s) = &b.strategies {
        for (i, x) in s.iter().enumerate() {
            row(doc, section, &format!("{prefix}n{}", i + 1), x.to_string(), None);
        }
    }
    row(doc, section, &format!("{prefix}count"), b.count.to_string(), None);
}
