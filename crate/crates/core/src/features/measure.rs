//! Per-drawing measurements: clockface geometry, digit census, hands and
//! timing. Angles follow the clock convention (degrees clockwise from 12).

use crate::stroke::{ClockDrawing, ClockTest, PenPoint, Stroke, SymbolKind};

use super::geometry::{angle_diff, clock_angle, fit_ellipse, largest_angular_gap, EllipseFit};

pub const HOUR_TARGET_DEG: f64 = 335.0;
pub const MINUTE_TARGET_DEG: f64 = 60.0;
/// Direction of digit 10, the classic wrong target for the minute hand.
pub const DIGIT_TEN_DEG: f64 = 300.0;
/// Tolerance for "minute hand points to digit 10".
pub const POINTS_AT_TOLERANCE_DEG: f64 = 15.0;
/// Bounding boxes closer than this belong to the same digit instance.
const GLYPH_LINK_CM: f64 = 0.15;
/// Hand strokes further apart than this count as distinct directions.
const DISTINCT_DIRECTION_DEG: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a PenPoint>) -> Option<Self> {
        pts.into_iter().fold(None, |acc: Option<BBox>, p| {
            Some(match acc {
                None => BBox { min_x: p.x, min_y: p.y, max_x: p.x, max_y: p.y },
                Some(b) => BBox {
                    min_x: b.min_x.min(p.x),
                    min_y: b.min_y.min(p.y),
                    max_x: b.max_x.max(p.x),
                    max_y: b.max_y.max(p.y),
                },
            })
        })
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.min_x + self.max_x), 0.5 * (self.min_y + self.max_y))
    }

    /// Separation between two boxes (0 when they touch or overlap).
    pub fn gap(&self, o: &BBox) -> f64 {
        let dx = (o.min_x - self.max_x).max(self.min_x - o.max_x).max(0.0);
        let dy = (o.min_y - self.max_y).max(self.min_y - o.max_y).max(0.0);
        dx.hypot(dy)
    }

    pub fn intersection_area(&self, o: &BBox) -> f64 {
        let w = self.max_x.min(o.max_x) - self.min_x.max(o.min_x);
        let h = self.max_y.min(o.max_y) - self.min_y.max(o.min_y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

fn points_of<'a>(strokes: impl IntoIterator<Item = &'a Stroke>) -> Vec<(f64, f64)> {
    strokes.into_iter().flat_map(|s| s.points().iter().map(|p| (p.x, p.y))).collect()
}

fn centroid(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.is_empty() {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    Some((sx / n, sy / n))
}

/// Clockface geometry plus the reference center for angular measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceGeometry {
    pub present: bool,
    pub fit: Option<EllipseFit>,
    /// Ellipse center, else clockface centroid, else digit centroid, else
    /// centroid of all ink. `None` only for an empty drawing.
    pub center: Option<(f64, f64)>,
    pub largest_gap_deg: Option<f64>,
    pub closure: Option<(f64, f64)>,
}

pub fn face_geometry(drawing: &ClockDrawing) -> FaceGeometry {
    let face: Vec<&Stroke> = drawing.strokes_of(SymbolKind::Clockface).collect();
    let face_pts = points_of(face.iter().copied());
    let fit = fit_ellipse(&face_pts).ok();
    let center = fit
        .map(|f| f.center)
        .or_else(|| centroid(&face_pts))
        .or_else(|| {
            let centers: Vec<(f64, f64)> =
                digit_instances(drawing).iter().map(|i| i.bbox.center()).collect();
            centroid(&centers)
        })
        .or_else(|| centroid(&points_of(drawing.strokes())));
    let (largest_gap_deg, closure) = match center {
        Some(c) if !face.is_empty() => (
            largest_angular_gap(&face_pts.iter().map(|&p| clock_angle(c, p)).collect::<Vec<_>>()),
            clockface_closure(drawing, c),
        ),
        _ => (None, None),
    };
    FaceGeometry { present: !face.is_empty(), fit, center, largest_gap_deg, closure }
}

/// Distance (cm) and angular difference (degrees about `center`) between the
/// first clockface point and the last, in time order.
pub fn clockface_closure(drawing: &ClockDrawing, center: (f64, f64)) -> Option<(f64, f64)> {
    let mut face: Vec<&Stroke> = drawing.strokes_of(SymbolKind::Clockface).collect();
    face.sort_by_key(|s| s.start_time());
    let first = face.first()?.points()[0];
    let last = *face.iter().max_by_key(|s| s.end_time())?.points().last()?;
    let gap_cm = (last.x - first.x).hypot(last.y - first.y);
    let gap_deg = if gap_cm == 0.0 {
        0.0
    } else {
        angle_diff(clock_angle(center, (first.x, first.y)), clock_angle(center, (last.x, last.y)))
    };
    Some((gap_cm, gap_deg))
}

/// One drawn occurrence of a digit: strokes with the same value whose
/// bounding boxes chain together.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitInstance {
    pub value: u8,
    pub bbox: BBox,
    pub start: i64,
    pub end: i64,
    pub stroke_ids: Vec<u32>,
    pub crossed_out: bool,
}

pub fn digit_instances(drawing: &ClockDrawing) -> Vec<DigitInstance> {
    let mut out = Vec::new();
    for value in 1..=12u8 {
        let mut strokes: Vec<&Stroke> = drawing
            .strokes_of(SymbolKind::Digit)
            .filter(|s| s.label().digit_value() == Some(value))
            .collect();
        if strokes.is_empty() {
            continue;
        }
        strokes.sort_by_key(|s| (s.start_time(), s.id()));
        let boxes: Vec<BBox> = strokes.iter().map(|s| BBox::of_points(s.points()).unwrap()).collect();
        // Single-link clustering via union-find.
        let mut parent: Vec<usize> = (0..strokes.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut j = i;
            while p[j] != r {
                let next = p[j];
                p[j] = r;
                j = next;
            }
            r
        }
        for i in 0..strokes.len() {
            for j in i + 1..strokes.len() {
                if boxes[i].gap(&boxes[j]) <= GLYPH_LINK_CM {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[b.max(a)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, DigitInstance)> = Vec::new();
        for i in 0..strokes.len() {
            let root = find(&mut parent, i);
            let s = strokes[i];
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, inst)) => {
                    inst.bbox = inst.bbox.union(&boxes[i]);
                    inst.start = inst.start.min(s.start_time());
                    inst.end = inst.end.max(s.end_time());
                    inst.stroke_ids.push(s.id());
                }
                None => groups.push((
                    root,
                    DigitInstance {
                        value,
                        bbox: boxes[i],
                        start: s.start_time(),
                        end: s.end_time(),
                        stroke_ids: vec![s.id()],
                        crossed_out: false,
                    },
                )),
            }
        }
        out.extend(groups.into_iter().map(|(_, g)| g));
    }
    let noise: Vec<&Stroke> = drawing.strokes_of(SymbolKind::Noise).collect();
    for inst in &mut out {
        inst.crossed_out = noise.iter().any(|s| crosses_out(inst, drawing, s));
    }
    out.sort_by_key(|i| (i.start, i.value));
    out
}

/// A later noise stroke whose box covers at least half of the digit's box
/// and whose path crosses one of the digit's strokes.
fn crosses_out(inst: &DigitInstance, drawing: &ClockDrawing, s: &Stroke) -> bool {
    if s.start_time() < inst.end {
        return false;
    }
    let b = BBox::of_points(s.points()).unwrap();
    let area = inst.bbox.area();
    let covered = if area > 0.0 {
        inst.bbox.intersection_area(&b) / area >= 0.5
    } else {
        inst.bbox.gap(&b) == 0.0
    };
    covered
        && drawing
            .strokes()
            .iter()
            .filter(|d| inst.stroke_ids.contains(&d.id()))
            .any(|d| polylines_cross(d.points(), s.points()))
}

fn segments_cross(p1: &PenPoint, p2: &PenPoint, q1: &PenPoint, q2: &PenPoint) -> bool {
    let orient = |a: &PenPoint, b: &PenPoint, c: &PenPoint| {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn polylines_cross(a: &[PenPoint], b: &[PenPoint]) -> bool {
    a.windows(2).any(|s| b.windows(2).any(|t| segments_cross(&s[0], &s[1], &t[0], &t[1])))
}

/// Census entry for one nominal digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitRecord {
    pub value: u8,
    pub present: bool,
    /// Instances that were not crossed out.
    pub count: usize,
    /// Angle of the earliest surviving instance, `[0, 360)`.
    pub angle: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitCensus {
    /// Indexed by digit value − 1.
    pub digits: Vec<DigitRecord>,
    pub crossed_out: usize,
}

impl DigitCensus {
    pub fn record(&self, value: u8) -> &DigitRecord {
        &self.digits[value as usize - 1]
    }

    pub fn missing(&self) -> usize {
        self.digits.iter().filter(|d| !d.present).count()
    }

    pub fn repeated(&self) -> usize {
        self.digits.iter().filter(|d| d.count >= 2).count()
    }

    pub fn any_drawn(&self) -> bool {
        self.crossed_out > 0 || self.digits.iter().any(|d| d.present)
    }

    /// Angular deviations of present digits from their ideal positions.
    pub fn angle_errors(&self) -> Vec<f64> {
        self.digits
            .iter()
            .filter_map(|d| d.angle.map(|a| angle_diff(a, ideal_digit_angle(d.value))))
            .collect()
    }
}

/// Ideal position of a digit on an 11:10 clock, degrees clockwise from 12.
pub fn ideal_digit_angle(value: u8) -> f64 {
    (value as f64 * 30.0) % 360.0
}

pub fn digit_census(drawing: &ClockDrawing, center: Option<(f64, f64)>) -> DigitCensus {
    let instances = digit_instances(drawing);
    let digits = (1..=12u8)
        .map(|value| {
            let alive: Vec<&DigitInstance> =
                instances.iter().filter(|i| i.value == value && !i.crossed_out).collect();
            let first = alive.first();
            DigitRecord {
                value,
                present: !alive.is_empty(),
                count: alive.len(),
                angle: first.and_then(|i| center.map(|c| clock_angle(c, i.bbox.center()))),
                width: first.map(|i| i.bbox.width()),
                height: first.map(|i| i.bbox.height()),
            }
        })
        .collect();
    DigitCensus { digits, crossed_out: instances.iter().filter(|i| i.crossed_out).count() }
}

pub const NON_ANCHOR_DIGITS: [u8; 8] = [1, 2, 4, 5, 7, 8, 10, 11];

/// For each non-anchor digit, whether it sits strictly inside its 45°
/// sector (sector boundaries at multiples of 45°).
pub fn digit_eighth_correct(census: &DigitCensus) -> Vec<(u8, bool)> {
    NON_ANCHOR_DIGITS
        .iter()
        .map(|&d| {
            let sector = (ideal_digit_angle(d) / 45.0).floor();
            let (lo, hi) = (sector * 45.0, sector * 45.0 + 45.0);
            let ok = census.record(d).angle.is_some_and(|a| a > lo && a < hi);
            (d, ok)
        })
        .collect()
}

/// All twelve digits present exactly once and, going clockwise from 12,
/// in the order 12, 1, 2, ..., 11.
pub fn digit_order_correct(census: &DigitCensus) -> bool {
    if census.digits.iter().any(|d| d.count != 1 || d.angle.is_none()) {
        return false;
    }
    let twelve = census.record(12).angle.unwrap();
    let mut order: Vec<(f64, u8)> = census
        .digits
        .iter()
        .map(|d| ((d.angle.unwrap() - twelve).rem_euclid(360.0), d.value))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let expected = std::iter::once(12u8).chain(1..=11);
    order.iter().map(|o| o.1).eq(expected)
}

/// Most steps between consecutive present digits (by value) run
/// counterclockwise. Needs at least three digits.
pub fn digits_counterclockwise(census: &DigitCensus) -> bool {
    let angles: Vec<f64> = census.digits.iter().filter_map(|d| d.angle).collect();
    if angles.len() < 3 {
        return false;
    }
    let (mut cw, mut ccw) = (0, 0);
    for w in angles.windows(2) {
        let step = (w[1] - w[0] + 540.0).rem_euclid(360.0) - 180.0;
        if step > 0.0 {
            cw += 1;
        } else if step < 0.0 {
            ccw += 1;
        }
    }
    ccw > cw
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandMeasure {
    pub present: bool,
    pub angle: Option<f64>,
    pub length: Option<f64>,
    pub angle_error: Option<f64>,
    /// Outer (far-from-center) end of the hand.
    tip: Option<(f64, f64)>,
    base: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandMetrics {
    pub hour: HandMeasure,
    pub minute: HandMeasure,
    /// Hour length over minute length, when both hands are present.
    pub size_ratio: Option<f64>,
    pub arrowheads_present: bool,
    /// Every arrowhead sits at the outer end of its hand.
    pub arrowheads_correct: bool,
    pub perseveration: bool,
    pub minute_at_ten: bool,
}

fn measure_hand(drawing: &ClockDrawing, kind: SymbolKind, center: Option<(f64, f64)>, target: f64) -> HandMeasure {
    let pts = points_of(drawing.strokes_of(kind));
    let empty = HandMeasure { present: false, angle: None, length: None, angle_error: None, tip: None, base: None };
    let (Some(c), false) = (center, pts.is_empty()) else {
        return HandMeasure { present: !pts.is_empty(), ..empty };
    };
    let dist = |p: &(f64, f64)| (p.0 - c.0).hypot(p.1 - c.1);
    let tip = *pts.iter().max_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
    let base = *pts.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
    let angle = clock_angle(c, tip);
    HandMeasure {
        present: true,
        angle: Some(angle),
        length: Some((tip.0 - base.0).hypot(tip.1 - base.1)),
        angle_error: Some(angle_diff(angle, target)),
        tip: Some(tip),
        base: Some(base),
    }
}

pub fn hand_metrics(drawing: &ClockDrawing, center: Option<(f64, f64)>) -> HandMetrics {
    let hour = measure_hand(drawing, SymbolKind::HourHand, center, HOUR_TARGET_DEG);
    let minute = measure_hand(drawing, SymbolKind::MinuteHand, center, MINUTE_TARGET_DEG);
    let size_ratio = match (hour.length, minute.length) {
        (Some(h), Some(m)) if m > 0.0 => Some(h / m),
        _ => None,
    };

    let arrows: Vec<&Stroke> = drawing.strokes().iter().filter(|s| s.kind().is_arrowhead()).collect();
    let arrowheads_correct = !arrows.is_empty()
        && arrows.iter().all(|s| {
            let hand = if s.kind() == SymbolKind::ArrowheadHour { &hour } else { &minute };
            match (hand.tip, hand.base, centroid(&points_of([*s]))) {
                (Some(tip), Some(base), Some(a)) => {
                    (a.0 - tip.0).hypot(a.1 - tip.1) < (a.0 - base.0).hypot(a.1 - base.1)
                }
                _ => false,
            }
        });

    let perseveration = match center {
        Some(c) => {
            let hand_strokes: Vec<&Stroke> = drawing.strokes().iter().filter(|s| s.kind().is_hand()).collect();
            let mut directions: Vec<f64> = Vec::new();
            for s in &hand_strokes {
                let far = s
                    .points()
                    .iter()
                    .map(|p| (p.x, p.y))
                    .max_by(|a, b| {
                        (a.0 - c.0).hypot(a.1 - c.1).total_cmp(&(b.0 - c.0).hypot(b.1 - c.1))
                    })
                    .unwrap();
                let dir = clock_angle(c, far);
                if directions.iter().all(|&d| angle_diff(d, dir) > DISTINCT_DIRECTION_DEG) {
                    directions.push(dir);
                }
            }
            hand_strokes.len() > 2 && directions.len() > 2
        }
        None => false,
    };

    let minute_at_ten =
        minute.angle.is_some_and(|a| angle_diff(a, DIGIT_TEN_DEG) <= POINTS_AT_TOLERANCE_DEG);

    HandMetrics {
        hour,
        minute,
        size_ratio,
        arrowheads_present: !arrows.is_empty(),
        arrowheads_correct,
        perseveration,
        minute_at_ten,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Component {
    Face,
    Digits,
    Hands,
    Noise,
}

fn component(kind: SymbolKind) -> Component {
    match kind {
        SymbolKind::Clockface => Component::Face,
        SymbolKind::Digit => Component::Digits,
        SymbolKind::HourHand
        | SymbolKind::MinuteHand
        | SymbolKind::ArrowheadHour
        | SymbolKind::ArrowheadMinute => Component::Hands,
        SymbolKind::Noise => Component::Noise,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComponentTiming {
    pub strokes: usize,
    pub ink_length_cm: f64,
    pub ink_time_ms: i64,
}

impl ComponentTiming {
    /// Ink length over ink time; `None` without ink time.
    pub fn speed_cm_per_s(&self) -> Option<f64> {
        (self.ink_time_ms > 0).then(|| self.ink_length_cm / (self.ink_time_ms as f64 / 1000.0))
    }

    fn add(&mut self, s: &Stroke) {
        self.strokes += 1;
        self.ink_length_cm += s.length();
        self.ink_time_ms += s.duration();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockTiming {
    pub total_time_ms: Option<i64>,
    pub stroke_count: usize,
    pub ink_length_cm: f64,
    pub all: ComponentTiming,
    pub face: ComponentTiming,
    pub digits: ComponentTiming,
    pub hands: ComponentTiming,
    pub noise: ComponentTiming,
    /// Pauses between consecutive component episodes, in time order.
    pub latencies_ms: Vec<i64>,
}

pub fn clock_timing(drawing: &ClockDrawing) -> ClockTiming {
    let mut t = ClockTiming {
        total_time_ms: drawing.start_time().zip(drawing.end_time()).map(|(s, e)| e - s),
        stroke_count: drawing.strokes().len(),
        ink_length_cm: 0.0,
        all: ComponentTiming::default(),
        face: ComponentTiming::default(),
        digits: ComponentTiming::default(),
        hands: ComponentTiming::default(),
        noise: ComponentTiming::default(),
        latencies_ms: Vec::new(),
    };
    let ordered = drawing.time_ordered();
    let mut episode: Option<(Component, i64)> = None;
    for s in &ordered {
        t.all.add(s);
        let comp = component(s.kind());
        match comp {
            Component::Face => t.face.add(s),
            Component::Digits => t.digits.add(s),
            Component::Hands => t.hands.add(s),
            Component::Noise => t.noise.add(s),
        }
        episode = match episode {
            Some((c, end)) if c == comp => Some((c, end.max(s.end_time()))),
            Some((_, end)) => {
                t.latencies_ms.push(s.start_time() - end);
                Some((comp, s.end_time()))
            }
            None => Some((comp, s.end_time())),
        };
    }
    t.ink_length_cm = t.all.ink_length_cm;
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingFeatures {
    pub command: ClockTiming,
    pub copy: ClockTiming,
    /// Sum of the two per-clock totals.
    pub total_time_ms: Option<i64>,
    /// Pause between the end of the command clock and the start of the copy clock.
    pub clock_switch_ms: Option<i64>,
}

pub fn timing_features(test: &ClockTest) -> TimingFeatures {
    let command = clock_timing(test.command());
    let copy = clock_timing(test.copy());
    TimingFeatures {
        total_time_ms: command.total_time_ms.zip(copy.total_time_ms).map(|(a, b)| a + b),
        clock_switch_ms: test.command().end_time().zip(test.copy().start_time()).map(|(e, s)| s - e),
        command,
        copy,
    }
}
