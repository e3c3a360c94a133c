//! The line-oriented stroke file and the subject labels file.
//!
//! ```text
//! dcdt-strokes v1
//! subject_id,clock,stroke_id,symbol,digit_value,point_idx,x_cm,y_cm,t_ms
//! S001,command,0,clockface,,0,4.0000,0.0000,0
//! ```
//!
//! The column-name line is written by [`write_strokes`] and skipped by
//! [`parse_strokes`] when present.

use std::fmt::Write as _;

use indexmap::IndexMap;

use super::{
    ClockDrawing, ClockKind, ClockTest, Group, PenPoint, Stroke, StrokeError, SymbolKind,
    SymbolLabel,
};

pub const STROKE_HEADER: &str = "dcdt-strokes v1";
const STROKE_COLUMNS: &str = "subject_id,clock,stroke_id,symbol,digit_value,point_idx,x_cm,y_cm,t_ms";
const LABEL_COLUMNS: &str = "subject_id,group";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line 1: expected header `{STROKE_HEADER}`")]
    MissingHeader,
    #[error("line 1: expected header `{LABEL_COLUMNS}`")]
    MissingLabelHeader,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown symbol `{token}`")]
    UnknownSymbol { line: usize, token: String },
    #[error("line {line}: digit value {value} outside 1-12")]
    DigitOutOfRange { line: usize, value: String },
    #[error(
        "line {line}: timestamps not strictly increasing in stroke {stroke} ({subject}, {clock})"
    )]
    NonMonotoneTime { line: usize, subject: String, clock: &'static str, stroke: u32 },
    #[error("line {line}: stroke {stroke} ({subject}, {clock}) has fewer than 2 points")]
    TooFewPoints { line: usize, subject: String, clock: &'static str, stroke: u32 },
    #[error("line {line}: unknown group `{token}`")]
    UnknownGroup { line: usize, token: String },
    #[error("line {line}: duplicate subject `{subject}`")]
    DuplicateSubject { line: usize, subject: String },
    #[error("labels reference unknown subject `{0}`")]
    UnknownSubject(String),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MissingHeader | ParseError::MissingLabelHeader => Some(1),
            ParseError::Malformed { line, .. }
            | ParseError::UnknownSymbol { line, .. }
            | ParseError::DigitOutOfRange { line, .. }
            | ParseError::NonMonotoneTime { line, .. }
            | ParseError::TooFewPoints { line, .. }
            | ParseError::UnknownGroup { line, .. }
            | ParseError::DuplicateSubject { line, .. } => Some(*line),
            ParseError::UnknownSubject(_) => None,
        }
    }
}

/// Rounds a coordinate to the 4-decimal grid used by the stroke file.
pub fn quantize_coord(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

struct PendingStroke {
    first_line: usize,
    label: SymbolLabel,
    points: Vec<PenPoint>,
}

#[derive(Default)]
struct PendingSubject {
    command: IndexMap<u32, PendingStroke>,
    copy: IndexMap<u32, PendingStroke>,
}

fn malformed(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, reason: reason.into() }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_strokes(text: &str) -> Result<Vec<ClockTest>, ParseError> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((1, h)) if h.trim() == STROKE_HEADER => {}
        _ => return Err(ParseError::MissingHeader),
    }

    let mut subjects: IndexMap<String, PendingSubject> = IndexMap::new();
    for (line, row) in lines {
        if row == STROKE_COLUMNS {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 9 {
            return Err(malformed(line, format!("expected 9 fields, found {}", fields.len())));
        }
        let subject = fields[0];
        if subject.is_empty() {
            return Err(malformed(line, "empty subject_id"));
        }
        let clock = ClockKind::from_token(fields[1])
            .ok_or_else(|| malformed(line, format!("unknown clock `{}`", fields[1])))?;
        let stroke_id: u32 = fields[2]
            .parse()
            .map_err(|_| malformed(line, format!("bad stroke_id `{}`", fields[2])))?;
        let kind = SymbolKind::from_token(fields[3])
            .ok_or_else(|| ParseError::UnknownSymbol { line, token: fields[3].to_string() })?;
        let label = match kind {
            SymbolKind::Digit => {
                let raw = fields[4];
                let value: u8 = raw
                    .parse()
                    .map_err(|_| ParseError::DigitOutOfRange { line, value: raw.to_string() })?;
                SymbolLabel::digit(value)
                    .ok_or_else(|| ParseError::DigitOutOfRange { line, value: raw.to_string() })?
            }
            other => {
                if !fields[4].is_empty() {
                    return Err(malformed(line, "digit_value given for a non-digit symbol"));
                }
                SymbolLabel::new(other).expect("non-digit kind")
            }
        };
        let point_idx: usize = fields[5]
            .parse()
            .map_err(|_| malformed(line, format!("bad point_idx `{}`", fields[5])))?;
        let coord = |s: &str, name: &str| -> Result<f64, ParseError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(line, format!("bad {name} `{s}`")))
        };
        let x = coord(fields[6], "x_cm")?;
        let y = coord(fields[7], "y_cm")?;
        let t: i64 = fields[8]
            .parse()
            .ok()
            .filter(|t: &i64| *t >= 0)
            .ok_or_else(|| malformed(line, format!("bad t_ms `{}`", fields[8])))?;

        let pending = subjects.entry(subject.to_string()).or_default();
        let strokes = match clock {
            ClockKind::Command => &mut pending.command,
            ClockKind::Copy => &mut pending.copy,
        };
        let stroke = strokes.entry(stroke_id).or_insert_with(|| PendingStroke {
            first_line: line,
            label,
            points: Vec::new(),
        });
        if stroke.label != label {
            return Err(malformed(line, format!("stroke {stroke_id} changes symbol mid-stroke")));
        }
        if point_idx != stroke.points.len() {
            return Err(malformed(
                line,
                format!("point_idx {point_idx} out of sequence (expected {})", stroke.points.len()),
            ));
        }
        if let Some(prev) = stroke.points.last() {
            if t <= prev.t {
                return Err(ParseError::NonMonotoneTime {
                    line,
                    subject: subject.to_string(),
                    clock: clock.token(),
                    stroke: stroke_id,
                });
            }
        }
        stroke.points.push(PenPoint::new(x, y, t));
    }

    subjects
        .into_iter()
        .map(|(subject, pending)| {
            let command = build_drawing(&subject, ClockKind::Command, pending.command)?;
            let copy = build_drawing(&subject, ClockKind::Copy, pending.copy)?;
            Ok(ClockTest::new(subject, command, copy, None).expect("kinds assigned by construction"))
        })
        .collect()
}

fn build_drawing(
    subject: &str,
    kind: ClockKind,
    strokes: IndexMap<u32, PendingStroke>,
) -> Result<ClockDrawing, ParseError> {
    let strokes = strokes
        .into_iter()
        .map(|(id, p)| {
            Stroke::new(id, p.label, p.points).map_err(|e| match e {
                StrokeError::TooFewPoints { .. } => ParseError::TooFewPoints {
                    line: p.first_line,
                    subject: subject.to_string(),
                    clock: kind.token(),
                    stroke: id,
                },
                other => malformed(p.first_line, other.to_string()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClockDrawing::new(kind, strokes).expect("ids are map keys"))
}

pub fn write_strokes(tests: &[ClockTest]) -> String {
    let mut out = String::new();
    out.push_str(STROKE_HEADER);
    out.push('\n');
    out.push_str(STROKE_COLUMNS);
    out.push('\n');
    for test in tests {
        for drawing in [test.command(), test.copy()] {
            for stroke in drawing.strokes() {
                let label = stroke.label();
                let digit = label.digit_value().map(|d| d.to_string()).unwrap_or_default();
                for (idx, p) in stroke.points().iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{:.4},{:.4},{}",
                        test.subject_id,
                        drawing.kind().token(),
                        stroke.id(),
                        label.kind().token(),
                        digit,
                        idx,
                        p.x,
                        p.y,
                        p.t
                    )
                    .unwrap();
                }
            }
        }
    }
    out
}

pub fn parse_labels(text: &str) -> Result<Vec<(String, Group)>, ParseError> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((1, h)) if h.trim() == LABEL_COLUMNS => {}
        _ => return Err(ParseError::MissingLabelHeader),
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (line, row) in lines {
        let (subject, group) = row
            .split_once(',')
            .ok_or_else(|| malformed(line, "expected `subject_id,group`"))?;
        if subject.is_empty() || group.contains(',') {
            return Err(malformed(line, "expected `subject_id,group`"));
        }
        let group: Group = group
            .parse()
            .map_err(|_| ParseError::UnknownGroup { line, token: group.to_string() })?;
        if !seen.insert(subject.to_string()) {
            return Err(ParseError::DuplicateSubject { line, subject: subject.to_string() });
        }
        out.push((subject.to_string(), group));
    }
    Ok(out)
}

/// Writes one row per labeled test; unlabeled tests are skipped.
pub fn write_labels(tests: &[ClockTest]) -> String {
    let mut out = format!("{LABEL_COLUMNS}\n");
    for t in tests {
        if let Some(g) = t.group {
            writeln!(out, "{},{}", t.subject_id, g).unwrap();
        }
    }
    out
}

pub fn attach_labels(tests: &mut [ClockTest], labels: &[(String, Group)]) -> Result<(), ParseError> {
    let index: std::collections::HashMap<String, usize> =
        tests.iter().enumerate().map(|(i, t)| (t.subject_id.clone(), i)).collect();
    for (subject, group) in labels {
        let &i = index
            .get(subject)
            .ok_or_else(|| ParseError::UnknownSubject(subject.clone()))?;
        tests[i].group = Some(*group);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "dcdt-strokes v1\n\
        S1,command,0,clockface,,0,4.0000,0.0000,0\n\
        S1,command,0,clockface,,1,0.0000,4.0000,13\n\
        S1,command,0,clockface,,2,-4.0000,0.0000,26\n\
        S1,command,0,clockface,,3,0.0000,-4.0000,39\n";

    #[test]
    fn minimal_file() {
        let tests = parse_strokes(MINIMAL).unwrap();
        assert_eq!(tests.len(), 1);
        let t = &tests[0];
        assert_eq!(t.subject_id, "S1");
        assert_eq!(t.command().strokes().len(), 1);
        assert_eq!(t.command().strokes()[0].points().len(), 4);
        assert!(t.copy().is_empty());
    }

    #[test]
    fn repeated_timestamp_names_stroke() {
        let text = "dcdt-strokes v1\n\
            S1,command,7,hourhand,,0,0.0,0.0,0\n\
            S1,command,7,hourhand,,1,1.0,0.0,13\n\
            S1,command,7,hourhand,,2,2.0,0.0,13\n";
        match parse_strokes(text) {
            Err(ParseError::NonMonotoneTime { line, stroke, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(stroke, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        let row = |r: &str| format!("{STROKE_HEADER}\n{r}\n");
        assert!(matches!(
            parse_strokes(&row("S1,command,0,digit,13,0,0.0,0.0,0")),
            Err(ParseError::DigitOutOfRange { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,digit,,0,0.0,0.0,0")),
            Err(ParseError::DigitOutOfRange { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,tail,,0,0.0,0.0,0")),
            Err(ParseError::UnknownSymbol { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,noise,,0,0.0,0.0")),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,noise,,0,0.0,0.0,0")),
            Err(ParseError::TooFewPoints { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,noise,,1,0.0,0.0,0")),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,command,0,noise,,0,NaN,0.0,0")),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_strokes(&row("S1,later,0,noise,,0,0.0,0.0,0")),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert_eq!(parse_strokes("subject_id,clock\n"), Err(ParseError::MissingHeader));
    }

    #[test]
    fn labels_round_trip() {
        let text = "subject_id,group\nA,HC\nB,PD\n";
        let labels = parse_labels(text).unwrap();
        assert_eq!(labels, vec![("A".into(), Group::HC), ("B".into(), Group::PD)]);
        assert!(matches!(
            parse_labels("subject_id,group\nA,XX\n"),
            Err(ParseError::UnknownGroup { line: 2, .. })
        ));
        assert!(matches!(
            parse_labels("subject_id,group\nA,HC\nA,PD\n"),
            Err(ParseError::DuplicateSubject { line: 3, .. })
        ));
    }

    #[test]
    fn attach_rejects_unknown_subjects() {
        let mut tests = parse_strokes(MINIMAL).unwrap();
        attach_labels(&mut tests, &[("S1".into(), Group::MID)]).unwrap();
        assert_eq!(tests[0].group, Some(Group::MID));
        assert!(attach_labels(&mut tests, &[("S2".into(), Group::MID)]).is_err());
    }
}
