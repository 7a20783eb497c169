//! Report serialization: CSV, markdown, and JSON-lines renderings of
//! indicator rows and threshold tables. Ratios are emitted both as raw
//! reals and as rendered percents so rounding never destroys
//! reproducibility.

use std::fmt::Write as _;

use crate::engine::ThresholdTable;
use crate::model::GroupIndicator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
    Lines,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            "lines" => Ok(OutputFormat::Lines),
            other => Err(format!("unknown output format `{other}`")),
        }
    }
}

/// Renders a ratio as a percent with the given number of decimals,
/// rounding half-up. `percent(0.0279619, 2)` is `"2.80%"`.
pub fn percent(value: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    // f64::round is half-away-from-zero, which is half-up for the
    // non-negative ratios rendered here
    let x = (value * 100.0 * scale).round() / scale;
    format!("{:.*}%", decimals as usize, x)
}

/// Groups the digits of a non-negative integer: 1309 -> "1,309".
pub fn thousands(value: u64) -> String {
    let digits = value.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Weighted counts: integral values print as integers (grouped when
/// `group_digits`), fractional values print in full precision.
pub fn format_count(value: f64, group_digits: bool) -> String {
    if value.fract() == 0.0 && value >= 0.0 && value <= u64::MAX as f64 {
        if group_digits {
            thousands(value as u64)
        } else {
            format!("{}", value as u64)
        }
    } else {
        format!("{value}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const INDICATOR_HEADER: [&str; 10] = [
    "group",
    "group_total",
    "group_top",
    "activity",
    "activity_pct",
    "pp_top",
    "pp_top_pct",
    "world_share",
    "world_share_pct",
    "expected_top",
];

fn indicator_fields(row: &GroupIndicator, decimals: u32, group_digits: bool) -> Vec<String> {
    let ratio = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let pct = |v: Option<f64>| v.map(|x| percent(x, decimals)).unwrap_or_default();
    vec![
        row.group.clone(),
        format_count(row.group_total, group_digits),
        format_count(row.group_top, group_digits),
        format!("{}", row.activity),
        percent(row.activity, decimals),
        ratio(row.pp_top),
        pct(row.pp_top),
        ratio(row.world_share),
        pct(row.world_share),
        format!("{}", row.expected_top),
    ]
}

/// Renders indicator rows in the requested format. Absent ratios appear
/// as empty cells, never as zeros.
pub fn render_indicators(rows: &[GroupIndicator], format: OutputFormat, decimals: u32) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&INDICATOR_HEADER.join(","));
            out.push('\n');
            for row in rows {
                let fields: Vec<String> = indicator_fields(row, decimals, false)
                    .iter()
                    .map(|f| csv_field(f))
                    .collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "| {} |", INDICATOR_HEADER.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(INDICATOR_HEADER.len()));
            for row in rows {
                let _ = writeln!(out, "| {} |", indicator_fields(row, decimals, true).join(" | "));
            }
            out
        }
        OutputFormat::Lines => {
            let mut out = String::new();
            for row in rows {
                let _ = writeln!(out, "{}", serde_json::to_string(row).expect("serializable row"));
            }
            out
        }
    }
}

const THRESHOLD_HEADER: [&str; 7] = [
    "year", "doctype", "category", "n_cell", "rank", "threshold", "n_top",
];

/// Renders a threshold table, one row per cell in stratum order.
pub fn render_thresholds(table: &ThresholdTable, format: OutputFormat) -> String {
    let rows: Vec<Vec<String>> = table
        .cells()
        .values()
        .map(|c| {
            vec![
                c.key.year.to_string(),
                c.key.doctype.to_string(),
                c.key.category.clone(),
                c.n_cell.to_string(),
                c.rank.to_string(),
                c.threshold.to_string(),
                c.n_top.to_string(),
            ]
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&THRESHOLD_HEADER.join(","));
            out.push('\n');
            for row in rows {
                let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "| {} |", THRESHOLD_HEADER.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(THRESHOLD_HEADER.len()));
            for row in rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            out
        }
        OutputFormat::Lines => {
            let mut out = String::new();
            for cell in table.cells().values() {
                let _ = writeln!(out, "{}", serde_json::to_string(cell).expect("serializable cell"));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_half_up_at_boundary() {
        assert_eq!(percent(0.005, 2), "0.50%");
        assert_eq!(percent(0.0279619, 2), "2.80%");
        assert_eq!(percent(0.0052808, 2), "0.53%");
        assert_eq!(percent(0.015, 1), "1.5%");
    }

    #[test]
    fn thousands_grouping() {
        assert_eq!(thousands(1309), "1,309");
        assert_eq!(thousands(1_320_618), "1,320,618");
        assert_eq!(thousands(7), "7");
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("Physics, Applied"), "\"Physics, Applied\"");
        assert_eq!(csv_field("Ecology"), "Ecology");
    }
}
