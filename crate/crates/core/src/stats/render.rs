use std::fmt::Write as _;
use std::str::FromStr;

use super::table::{CorrelationTable, RowLabel, TableRow};
use crate::corpus::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(format!("unknown table format `{other}`")),
        }
    }
}

/// `r × 100` with one decimal, stars appended. Rounded zero never shows a sign.
pub fn format_r(display_r: f64, stars: &str) -> String {
    let mut text = format!("{:.1}", display_r * 100.0);
    if text == "-0.0" {
        text = "0.0".into();
    }
    text.push_str(stars);
    text
}

fn display_cell(row: &TableRow, column: Dimension) -> String {
    match row.cell(column) {
        None => "---".into(),
        Some(c) => match (c.cell, row.display_r(column)) {
            (Some(cell), Some(r)) => format_r(r, cell.stars.as_str()),
            _ => "n/a".into(),
        },
    }
}

fn ref_less_mark(row: &TableRow) -> &'static str {
    match row.ref_less {
        Some(true) => "✓",
        Some(false) => "✗",
        None => "",
    }
}

fn markdown(table: &CorrelationTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "| {} | Ref-less |", table.split.title());
    for c in &table.columns {
        let _ = write!(out, " {} |", c.display_name());
    }
    out.push('\n');
    out.push_str("|---|:---:|");
    for _ in &table.columns {
        out.push_str("---:|");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(
            out,
            "| {} | {} |",
            row.label.display_name(),
            ref_less_mark(row)
        );
        for &c in &table.columns {
            let _ = write!(out, " {} |", display_cell(row, c));
        }
        out.push('\n');
    }
    out
}

fn csv(table: &CorrelationTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "split", "row", "row_kind", "ref_less", "column", "n", "r", "display", "p", "stars", "note",
    ];
    w.write_record(header).expect("in-memory csv");
    for row in &table.rows {
        let kind = match row.label {
            RowLabel::Dimension(_) => "dimension",
            RowLabel::Metric(_) => "metric",
        };
        let ref_less = row.ref_less.map(|b| b.to_string()).unwrap_or_default();
        for cell in &row.cells {
            let (r, p, stars) = match cell.cell {
                Some(c) => (
                    c.r.to_string(),
                    c.p.to_string(),
                    c.stars.as_str().to_string(),
                ),
                None => Default::default(),
            };
            w.write_record([
                table.split.to_string(),
                row.label.display_name().to_string(),
                kind.to_string(),
                ref_less.clone(),
                cell.column.as_str().to_string(),
                cell.n.to_string(),
                r,
                display_cell(row, cell.column),
                p,
                stars,
                cell.note.clone().unwrap_or_default(),
            ])
            .expect("in-memory csv");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Deterministic rendering of a correlation table.
pub fn render_table(table: &CorrelationTable, format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => markdown(table),
        TableFormat::Csv => csv(table),
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("table serializes");
            s.push('\n');
            s
        }
    }
}
