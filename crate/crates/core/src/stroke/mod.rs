//! Symbol-labeled digitized clock drawings.
//!
//! Coordinates are page centimeters with `y` pointing up; timestamps are
//! integer milliseconds on a single axis per test (the copy clock continues
//! the command clock's axis).

mod format;

pub use format::{
    attach_labels, parse_labels, parse_strokes, quantize_coord, write_labels, write_strokes,
    ParseError, STROKE_HEADER,
};

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenPoint {
    pub x: f64,
    pub y: f64,
    pub t: i64,
}

impl PenPoint {
    pub fn new(x: f64, y: f64, t: i64) -> Self {
        Self { x, y, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Clockface,
    Digit,
    HourHand,
    MinuteHand,
    ArrowheadHour,
    ArrowheadMinute,
    Noise,
}

impl SymbolKind {
    pub const ALL: [SymbolKind; 7] = [
        SymbolKind::Clockface,
        SymbolKind::Digit,
        SymbolKind::HourHand,
        SymbolKind::MinuteHand,
        SymbolKind::ArrowheadHour,
        SymbolKind::ArrowheadMinute,
        SymbolKind::Noise,
    ];

    pub fn token(self) -> &'static str {
        match self {
            SymbolKind::Clockface => "clockface",
            SymbolKind::Digit => "digit",
            SymbolKind::HourHand => "hourhand",
            SymbolKind::MinuteHand => "minutehand",
            SymbolKind::ArrowheadHour => "arrowhead_hour",
            SymbolKind::ArrowheadMinute => "arrowhead_minute",
            SymbolKind::Noise => "noise",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.token() == token)
    }

    pub fn is_hand(self) -> bool {
        matches!(self, SymbolKind::HourHand | SymbolKind::MinuteHand)
    }

    pub fn is_arrowhead(self) -> bool {
        matches!(self, SymbolKind::ArrowheadHour | SymbolKind::ArrowheadMinute)
    }
}

/// Symbol class of a stroke. Construct through [`SymbolLabel::digit`] or
/// [`SymbolLabel::new`] so the digit value invariant holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolLabel {
    kind: SymbolKind,
    digit: Option<u8>,
}

impl SymbolLabel {
    /// Non-digit label. Returns `None` for [`SymbolKind::Digit`].
    pub fn new(kind: SymbolKind) -> Option<Self> {
        (kind != SymbolKind::Digit).then_some(Self { kind, digit: None })
    }

    pub fn digit(value: u8) -> Option<Self> {
        (1..=12).contains(&value).then_some(Self {
            kind: SymbolKind::Digit,
            digit: Some(value),
        })
    }

    pub const CLOCKFACE: SymbolLabel = SymbolLabel { kind: SymbolKind::Clockface, digit: None };
    pub const HOUR_HAND: SymbolLabel = SymbolLabel { kind: SymbolKind::HourHand, digit: None };
    pub const MINUTE_HAND: SymbolLabel = SymbolLabel { kind: SymbolKind::MinuteHand, digit: None };
    pub const ARROWHEAD_HOUR: SymbolLabel =
        SymbolLabel { kind: SymbolKind::ArrowheadHour, digit: None };
    pub const ARROWHEAD_MINUTE: SymbolLabel =
        SymbolLabel { kind: SymbolKind::ArrowheadMinute, digit: None };
    pub const NOISE: SymbolLabel = SymbolLabel { kind: SymbolKind::Noise, digit: None };

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn digit_value(&self) -> Option<u8> {
        self.digit
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrokeError {
    #[error("stroke {id} has {count} point(s); at least 2 are required")]
    TooFewPoints { id: u32, count: usize },
    #[error("stroke {id}: timestamp {t} ms at point {index} does not increase")]
    NonMonotoneTime { id: u32, index: usize, t: i64 },
    #[error("stroke {id}: negative timestamp {t} ms")]
    NegativeTime { id: u32, t: i64 },
    #[error("duplicate stroke id {0} in drawing")]
    DuplicateId(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    id: u32,
    label: SymbolLabel,
    points: Vec<PenPoint>,
}

impl Stroke {
    pub fn new(id: u32, label: SymbolLabel, points: Vec<PenPoint>) -> Result<Self, StrokeError> {
        if points.len() < 2 {
            return Err(StrokeError::TooFewPoints { id, count: points.len() });
        }
        if let Some(p) = points.iter().find(|p| p.t < 0) {
            return Err(StrokeError::NegativeTime { id, t: p.t });
        }
        for (index, w) in points.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(StrokeError::NonMonotoneTime { id, index: index + 1, t: w[1].t });
            }
        }
        Ok(Self { id, label, points })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn label(&self) -> SymbolLabel {
        self.label
    }

    pub fn kind(&self) -> SymbolKind {
        self.label.kind
    }

    pub fn points(&self) -> &[PenPoint] {
        &self.points
    }

    pub fn start_time(&self) -> i64 {
        self.points[0].t
    }

    pub fn end_time(&self) -> i64 {
        self.points[self.points.len() - 1].t
    }

    /// Ink length in centimeters.
    pub fn length(&self) -> f64 {
        stroke_length(self)
    }

    /// Duration in milliseconds.
    pub fn duration(&self) -> i64 {
        stroke_duration(self)
    }

    /// Applies `f` to every point. Fails only if `f` breaks the time invariants.
    pub fn map_points(
        &self,
        f: impl Fn(PenPoint) -> PenPoint,
    ) -> Result<Self, StrokeError> {
        Self::new(self.id, self.label, self.points.iter().copied().map(f).collect())
    }
}

/// Sum of Euclidean distances between consecutive points.
pub fn stroke_length(s: &Stroke) -> f64 {
    s.points
        .windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .sum()
}

/// Last timestamp minus first timestamp, in milliseconds.
pub fn stroke_duration(s: &Stroke) -> i64 {
    s.end_time() - s.start_time()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockKind {
    Command,
    Copy,
}

impl ClockKind {
    pub fn token(self) -> &'static str {
        match self {
            ClockKind::Command => "command",
            ClockKind::Copy => "copy",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "command" => Some(ClockKind::Command),
            "copy" => Some(ClockKind::Copy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockDrawing {
    kind: ClockKind,
    strokes: Vec<Stroke>,
}

impl ClockDrawing {
    pub fn new(kind: ClockKind, strokes: Vec<Stroke>) -> Result<Self, StrokeError> {
        let mut seen = std::collections::HashSet::new();
        for s in &strokes {
            if !seen.insert(s.id) {
                return Err(StrokeError::DuplicateId(s.id));
            }
        }
        Ok(Self { kind, strokes })
    }

    pub fn empty(kind: ClockKind) -> Self {
        Self { kind, strokes: Vec::new() }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn strokes_of(&self, kind: SymbolKind) -> impl Iterator<Item = &Stroke> {
        self.strokes.iter().filter(move |s| s.kind() == kind)
    }

    /// Strokes sorted by start time (stable for equal starts).
    pub fn time_ordered(&self) -> Vec<&Stroke> {
        let mut v: Vec<&Stroke> = self.strokes.iter().collect();
        v.sort_by_key(|s| s.start_time());
        v
    }

    pub fn start_time(&self) -> Option<i64> {
        self.strokes.iter().map(Stroke::start_time).min()
    }

    pub fn end_time(&self) -> Option<i64> {
        self.strokes.iter().map(Stroke::end_time).max()
    }

    pub fn map_points(&self, f: impl Fn(PenPoint) -> PenPoint) -> Result<Self, StrokeError> {
        let strokes = self
            .strokes
            .iter()
            .map(|s| s.map_points(&f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { kind: self.kind, strokes })
    }

    /// Same drawing with its strokes in a different order.
    pub fn with_stroke_order(&self, order: &[usize]) -> Self {
        Self {
            kind: self.kind,
            strokes: order.iter().map(|&i| self.strokes[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    HC,
    MID,
    VCD,
    PD,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::HC, Group::MID, Group::VCD, Group::PD];

    pub fn token(self) -> &'static str {
        match self {
            Group::HC => "HC",
            Group::MID => "MID",
            Group::VCD => "VCD",
            Group::PD => "PD",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group::ALL
            .into_iter()
            .find(|g| g.token() == s)
            .ok_or_else(|| format!("unknown group `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockTest {
    pub subject_id: String,
    command: ClockDrawing,
    copy: ClockDrawing,
    pub group: Option<Group>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("expected a {expected} drawing, got {got}")]
pub struct WrongClockKind {
    pub expected: &'static str,
    pub got: &'static str,
}

impl ClockTest {
    pub fn new(
        subject_id: impl Into<String>,
        command: ClockDrawing,
        copy: ClockDrawing,
        group: Option<Group>,
    ) -> Result<Self, WrongClockKind> {
        if command.kind != ClockKind::Command {
            return Err(WrongClockKind { expected: "command", got: command.kind.token() });
        }
        if copy.kind != ClockKind::Copy {
            return Err(WrongClockKind { expected: "copy", got: copy.kind.token() });
        }
        Ok(Self { subject_id: subject_id.into(), command, copy, group })
    }

    pub fn command(&self) -> &ClockDrawing {
        &self.command
    }

    pub fn copy(&self) -> &ClockDrawing {
        &self.copy
    }

    pub fn drawing(&self, kind: ClockKind) -> &ClockDrawing {
        match kind {
            ClockKind::Command => &self.command,
            ClockKind::Copy => &self.copy,
        }
    }

    /// Applies `f` to every point of both drawings.
    pub fn map_points(&self, f: impl Fn(PenPoint) -> PenPoint) -> Result<Self, StrokeError> {
        Ok(Self {
            subject_id: self.subject_id.clone(),
            command: self.command.map_points(&f)?,
            copy: self.copy.map_points(&f)?,
            group: self.group,
        })
    }
}
