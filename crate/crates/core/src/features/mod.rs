//! Feature battery computed from a clock test, plus binarization for SLIM.
//!
//! Missing values are stored as NaN. They appear whenever a measurement needs
//! a component that was not drawn (no clockface, fewer than two hands, ...)
//! and collapse to the catalog's abnormal pole on binarization.

pub mod catalog;
pub mod geometry;
pub mod measure;

use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::stroke::{ClockDrawing, ClockKind, ClockTest, Group};

pub use catalog::{
    assign_heights, CatalogError, Comparison, Cutpoint, FeatureCatalog, FeatureClock, FeatureDef,
    FeatureKind, FeatureSet,
};
pub use geometry::{fit_ellipse, largest_angular_gap, EllipseFit, FitError};
pub use measure::{
    clock_timing, clockface_closure, digit_census, digit_eighth_correct, digit_order_correct,
    face_geometry, hand_metrics, timing_features, DigitCensus, HandMetrics,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("catalog feature `{0}` has no extractor")]
    UnknownFeature(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Values keyed by feature name, in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: IndexMap<String, f64>,
    binarized: bool,
}

impl FeatureVector {
    pub fn new(values: IndexMap<String, f64>) -> Self {
        Self { values, binarized: false }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.values().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binarized(&self) -> bool {
        self.binarized
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Every per-clock measurement, keyed by the name without clock prefix.
pub fn clock_measurements(drawing: &ClockDrawing) -> IndexMap<&'static str, f64> {
    const NAMES: [&str; 40] = [
        "face_present",
        "face_major_axis_cm",
        "face_minor_axis_cm",
        "face_eccentricity",
        "face_largest_gap_deg",
        "face_closure_cm",
        "face_closure_deg",
        "digits_missing",
        "digits_repeated",
        "crossed_out_digits",
        "digit_order_correct",
        "digits_counterclockwise",
        "digits_correct_eighth",
        "digit_max_angle_error_deg",
        "digit_mean_angle_error_deg",
        "digit_height_mean_cm",
        "digit_width_mean_cm",
        "hour_hand_present",
        "minute_hand_present",
        "two_hands_not_present",
        "hands_perseveration",
        "hour_hand_angle_error_deg",
        "minute_hand_angle_error_deg",
        "minute_hand_at_10",
        "hand_size_ratio",
        "arrowheads_present",
        "arrowheads_correct",
        "noise_strokes",
        "stroke_count",
        "ink_length_cm",
        "total_time_s",
        "face_time_s",
        "digit_time_s",
        "hand_time_s",
        "face_speed_cm_s",
        "digit_speed_cm_s",
        "hand_speed_cm_s",
        "mean_pen_speed_cm_s",
        "mean_latency_s",
        "max_latency_s",
    ];
    let mut m: IndexMap<&'static str, f64> = NAMES.iter().map(|&n| (n, f64::NAN)).collect();
    if drawing.is_empty() {
        return m;
    }
    let mut set = |k: &'static str, v: f64| {
        *m.get_mut(k).expect("known measurement") = v;
    };

    let face = face_geometry(drawing);
    set("face_present", flag(face.present));
    if let Some(f) = face.fit {
        set("face_major_axis_cm", 2.0 * f.semi_major);
        set("face_minor_axis_cm", 2.0 * f.semi_minor);
        set("face_eccentricity", f.eccentricity);
    }
    set("face_largest_gap_deg", opt(face.largest_gap_deg));
    if let Some((cm, deg)) = face.closure {
        set("face_closure_cm", cm);
        set("face_closure_deg", deg);
    }

    let census = digit_census(drawing, face.center);
    set("digits_missing", census.missing() as f64);
    set("digits_repeated", census.repeated() as f64);
    set("crossed_out_digits", census.crossed_out as f64);
    set("digit_order_correct", flag(digit_order_correct(&census)));
    set("digits_counterclockwise", flag(measure::digits_counterclockwise(&census)));
    set("digits_correct_eighth", flag(digit_eighth_correct(&census).iter().all(|e| e.1)));
    let errors = census.angle_errors();
    set("digit_max_angle_error_deg", errors.iter().copied().reduce(f64::max).unwrap_or(f64::NAN));
    set("digit_mean_angle_error_deg", mean(&errors));
    let heights: Vec<f64> = census.digits.iter().filter_map(|d| d.height).collect();
    let widths: Vec<f64> = census.digits.iter().filter_map(|d| d.width).collect();
    set("digit_height_mean_cm", mean(&heights));
    set("digit_width_mean_cm", mean(&widths));

    let hands = hand_metrics(drawing, face.center);
    set("hour_hand_present", flag(hands.hour.present));
    set("minute_hand_present", flag(hands.minute.present));
    set("two_hands_not_present", flag(!(hands.hour.present && hands.minute.present)));
    set("hands_perseveration", flag(hands.perseveration));
    set("hour_hand_angle_error_deg", opt(hands.hour.angle_error));
    set("minute_hand_angle_error_deg", opt(hands.minute.angle_error));
    set("minute_hand_at_10", flag(hands.minute_at_ten));
    set("hand_size_ratio", opt(hands.size_ratio));
    set("arrowheads_present", flag(hands.arrowheads_present));
    set("arrowheads_correct", flag(hands.arrowheads_correct));

    let t = clock_timing(drawing);
    let secs = |ms: i64| ms as f64 / 1000.0;
    let component_time = |c: &measure::ComponentTiming| if c.strokes > 0 { secs(c.ink_time_ms) } else { f64::NAN };
    set("noise_strokes", t.noise.strokes as f64);
    set("stroke_count", t.stroke_count as f64);
    set("ink_length_cm", t.ink_length_cm);
    set("total_time_s", opt(t.total_time_ms.map(secs)));
    set("face_time_s", component_time(&t.face));
    set("digit_time_s", component_time(&t.digits));
    set("hand_time_s", component_time(&t.hands));
    set("face_speed_cm_s", opt(t.face.speed_cm_per_s()));
    set("digit_speed_cm_s", opt(t.digits.speed_cm_per_s()));
    set("hand_speed_cm_s", opt(t.hands.speed_cm_per_s()));
    set("mean_pen_speed_cm_s", opt(t.all.speed_cm_per_s()));
    let lat: Vec<f64> = t.latencies_ms.iter().map(|&l| secs(l)).collect();
    set("mean_latency_s", mean(&lat));
    set("max_latency_s", lat.iter().copied().reduce(f64::max).unwrap_or(f64::NAN));
    m
}

/// Computes every measurement a test supports, with clock prefixes.
pub fn all_measurements(test: &ClockTest) -> IndexMap<String, f64> {
    let mut out = IndexMap::new();
    for (prefix, kind) in [("cmd_", ClockKind::Command), ("copy_", ClockKind::Copy)] {
        for (k, v) in clock_measurements(test.drawing(kind)) {
            out.insert(format!("{prefix}{k}"), v);
        }
    }
    let cmd = out["cmd_total_time_s"];
    let copy = out["copy_total_time_s"];
    out.insert("both_total_time_s".into(), cmd + copy);
    out.insert("cmd_copy_time_ratio".into(), if copy > 0.0 { cmd / copy } else { f64::NAN });
    out
}

/// Feature vector over exactly the catalog's `set`, in catalog order.
pub fn extract(test: &ClockTest, catalog: &FeatureCatalog, set: FeatureSet) -> Result<FeatureVector, FeatureError> {
    let all = all_measurements(test);
    let values = catalog
        .select(set)
        .map(|d| {
            all.get(&d.name)
                .map(|&v| (d.name.clone(), v))
                .ok_or_else(|| FeatureError::UnknownFeature(d.name.clone()))
        })
        .collect::<Result<_, _>>()?;
    Ok(FeatureVector::new(values))
}

/// Applies catalog cutpoints; binary features pass through and missing
/// values go to the abnormal pole. Idempotent.
pub fn binarize(v: &FeatureVector, catalog: &FeatureCatalog) -> FeatureVector {
    if v.binarized {
        return v.clone();
    }
    let values = v
        .iter()
        .map(|(name, x)| {
            let def = catalog.get(name);
            let b = match def {
                _ if x.is_nan() => def.map_or(1.0, |d| d.abnormal as f64),
                Some(FeatureDef { kind: FeatureKind::Numeric, cutpoint: Some(c), .. }) => flag(c.holds(x)),
                _ => flag(x != 0.0),
            };
            (name.to_string(), b)
        })
        .collect();
    FeatureVector { values, binarized: true }
}

/// Per-subject feature rows sharing one column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub subjects: Vec<String>,
    pub groups: Vec<Option<Group>>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn from_tests(tests: &[ClockTest], catalog: &FeatureCatalog, set: FeatureSet) -> Result<Self, FeatureError> {
        let names = catalog.names(set);
        let mut rows = Vec::with_capacity(tests.len());
        for t in tests {
            rows.push(extract(t, catalog, set)?.values().collect());
        }
        Ok(Self {
            names,
            subjects: tests.iter().map(|t| t.subject_id.clone()).collect(),
            groups: tests.iter().map(|t| t.group).collect(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn vector(&self, row: usize) -> FeatureVector {
        FeatureVector::new(self.names.iter().cloned().zip(self.rows[row].iter().copied()).collect())
    }

    pub fn binarized(&self, catalog: &FeatureCatalog) -> Self {
        let rows = (0..self.len()).map(|i| binarize(&self.vector(i), catalog).values().collect()).collect();
        Self { rows, ..self.clone() }
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Option<Self> {
        let idx: Vec<usize> = names.iter().map(|n| self.column(n)).collect::<Option<_>>()?;
        Some(Self {
            names: names.to_vec(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            ..self.clone()
        })
    }

    /// CSV with header `subject_id,group,<names>`; missing values are `NA`,
    /// unknown groups are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("subject_id,group");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for i in 0..self.len() {
            s.push_str(&self.subjects[i]);
            s.push(',');
            if let Some(g) = self.groups[i] {
                s.push_str(g.token());
            }
            for &v in &self.rows[i] {
                if v.is_nan() {
                    s.push_str(",NA");
                } else {
                    let _ = write!(s, ",{v}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self, FeatureError> {
        let bad = |line: usize, reason: String| FeatureError::Malformed { line, reason };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty feature file".into()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "subject_id" || cols[1] != "group" {
            return Err(bad(1, "header must start with subject_id,group".into()));
        }
        let names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
        for (j, n) in names.iter().enumerate() {
            if n.is_empty() || names[..j].contains(n) {
                return Err(bad(1, format!("bad or duplicate column `{n}`")));
            }
        }
        let mut t = Self { names, subjects: vec![], groups: vec![], rows: vec![] };
        for (i, l) in lines {
            let line = i + 1;
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != cols.len() {
                return Err(bad(line, format!("expected {} fields, got {}", cols.len(), f.len())));
            }
            if f[0].is_empty() || t.subjects.iter().any(|s| s == f[0]) {
                return Err(bad(line, format!("bad or duplicate subject `{}`", f[0])));
            }
            let group = match f[1] {
                "" => None,
                g => Some(g.parse::<Group>().map_err(|e| bad(line, e))?),
            };
            let row = f[2..]
                .iter()
                .map(|v| match *v {
                    "NA" => Ok(f64::NAN),
                    v => v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(line, format!("bad value `{v}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            t.subjects.push(f[0].to_string());
            t.groups.push(group);
            t.rows.push(row);
        }
        Ok(t)
    }
}
