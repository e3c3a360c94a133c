//! Point-based scoring sheets in the layout of a clinical form:
//!
//! ```text
//! PREDICT MEMORY IMPAIRMENT DISORDER IF SCORE < 10
//! Command clock:
//! 1. Hour hand is present & +5
//! Copy clock:
//! 2. Numbers are repeated & -3
//! ```
//!
//! A sheet awards `−λ_j` points per true predicate and predicts the class
//! when the total is below `T = λ0`, which is exactly `λ0 + Σ λ_j x_j > 0`.

use crate::features::{FeatureCatalog, FeatureClock};

use super::SlimModel;

pub const DEFAULT_LABEL: &str = "IMPAIRMENT";

const SECTIONS: [(FeatureClock, &str); 3] = [
    (FeatureClock::Command, "Command clock:"),
    (FeatureClock::Copy, "Copy clock:"),
    (FeatureClock::Both, "Both clocks:"),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SheetError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("model feature `{0}` is not in the catalog")]
    UnknownFeature(String),
}

fn signed(points: i64) -> String {
    if points > 0 {
        format!("+{points}")
    } else {
        points.to_string()
    }
}

/// Renders nonzero coefficients grouped by clock, keeping model order
/// within each section.
pub fn render(m: &SlimModel, catalog: &FeatureCatalog) -> Result<String, SheetError> {
    let label = m.label.as_deref().unwrap_or(DEFAULT_LABEL);
    let mut s = format!("PREDICT {label} IF SCORE < {}\n", m.intercept);
    let mut n = 0;
    for (clock, title) in SECTIONS {
        let mut rows = Vec::new();
        for (name, &c) in m.names.iter().zip(&m.coefficients) {
            if c == 0 {
                continue;
            }
            let def = catalog.get(name).ok_or_else(|| SheetError::UnknownFeature(name.clone()))?;
            if def.clock == clock {
                rows.push((def.description.as_str(), -(c as i64)));
            }
        }
        if rows.is_empty() {
            continue;
        }
        s.push_str(title);
        s.push('\n');
        for (desc, pts) in rows {
            n += 1;
            s.push_str(&format!("{n}. {desc} & {}\n", signed(pts)));
        }
    }
    Ok(s)
}

/// Reads a sheet back into a model over the features it lists.
pub fn parse_sheet(text: &str, catalog: &FeatureCatalog) -> Result<SlimModel, SheetError> {
    let bad = |line: usize, reason: &str| SheetError::Malformed { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| bad(1, "empty sheet"))?;
    let rest = head.strip_prefix("PREDICT ").ok_or_else(|| bad(1, "expected `PREDICT <label> IF SCORE < T`"))?;
    let (label, threshold) = rest.rsplit_once(" IF SCORE < ").ok_or_else(|| bad(1, "expected `IF SCORE < T`"))?;
    let threshold: i32 = threshold.trim().parse().map_err(|_| bad(1, "threshold is not an integer"))?;
    if label.trim().is_empty() {
        return Err(bad(1, "empty label"));
    }
    let mut m = SlimModel::new(vec![], vec![], threshold);
    m.label = Some(label.trim().to_string());
    let mut section: Option<FeatureClock> = None;
    let mut expected = 1;
    for (line, l) in lines {
        if let Some(&(clock, _)) = SECTIONS.iter().find(|(_, t)| *t == l.trim()) {
            section = Some(clock);
            continue;
        }
        let clock = section.ok_or_else(|| bad(line, "row before any section heading"))?;
        let (num, body) = l.split_once(". ").ok_or_else(|| bad(line, "expected `n. <predicate> & <points>`"))?;
        if num.trim().parse::<usize>().ok() != Some(expected) {
            return Err(bad(line, "rows must be numbered consecutively from 1"));
        }
        expected += 1;
        let (desc, pts) = body.rsplit_once(" & ").ok_or_else(|| bad(line, "missing `& <points>`"))?;
        let pts = pts.trim();
        let pts: i32 = pts.strip_prefix('+').unwrap_or(pts).parse().map_err(|_| bad(line, "points are not an integer"))?;
        if pts == 0 {
            return Err(bad(line, "zero-point rows are not allowed"));
        }
        let def = catalog
            .defs()
            .iter()
            .find(|d| d.clock == clock && d.description == desc.trim())
            .ok_or_else(|| bad(line, "predicate not found in the catalog for this clock"))?;
        if m.names.contains(&def.name) {
            return Err(bad(line, "predicate listed twice"));
        }
        m.names.push(def.name.clone());
        m.coefficients.push(-pts);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_feature_sheet() {
        let cat = FeatureCatalog::builtin();
        let m = SlimModel::new(vec!["cmd_hour_hand_present".into()], vec![1], 0);
        let s = render(&m, &cat).unwrap();
        assert_eq!(s, "PREDICT IMPAIRMENT IF SCORE < 0\nCommand clock:\n1. Hour hand is present & -1\n");
        let back = parse_sheet(&s, &cat).unwrap();
        assert_eq!(back.coefficients, vec![1]);
        assert_eq!(back.intercept, 0);
    }

    #[test]
    fn rejects_bad_sheets() {
        let cat = FeatureCatalog::builtin();
        assert!(parse_sheet("", &cat).is_err());
        assert!(parse_sheet("PREDICT X IF SCORE < a\n", &cat).is_err());
        assert!(parse_sheet("PREDICT X IF SCORE < 1\n1. Hour hand is present & +1\n", &cat).is_err());
        assert!(parse_sheet("PREDICT X IF SCORE < 1\nCommand clock:\n1. Nonsense & +1\n", &cat).is_err());
        assert!(parse_sheet("PREDICT X IF SCORE < 1\nCommand clock:\n2. Hour hand is present & +1\n", &cat).is_err());
    }
}
