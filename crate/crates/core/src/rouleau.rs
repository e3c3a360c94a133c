//! Operationalized Rouleau scoring: clockface (0-2), numbers (0-4) and
//! hands (0-4), each vague rubric phrase mapped to one named threshold.

use std::fmt;

use crate::eval::{auc, EvalError, Learner};
use crate::features::FeatureVector;
use crate::kv::{parse_kv, parse_list, parse_value, KvError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouleauParams {
    pub eps1_deg: f64,
    pub eps2_deg: f64,
    pub digit_minimal_err_deg: f64,
    pub digit_gross_err_deg: f64,
    pub face_distortion_ecc: f64,
    pub face_gap_deg: f64,
    pub size_ratio_max: f64,
    pub cut_score: u8,
}

impl Default for RouleauParams {
    fn default() -> Self {
        Self {
            eps1_deg: 15.0,
            eps2_deg: 45.0,
            digit_minimal_err_deg: 22.5,
            digit_gross_err_deg: 45.0,
            face_distortion_ecc: 0.6,
            face_gap_deg: 45.0,
            size_ratio_max: 0.9,
            cut_score: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouleauError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl RouleauParams {
    pub fn validate(&self) -> Result<(), RouleauError> {
        let p = self;
        let finite = [
            p.eps1_deg,
            p.eps2_deg,
            p.digit_minimal_err_deg,
            p.digit_gross_err_deg,
            p.face_distortion_ecc,
            p.face_gap_deg,
            p.size_ratio_max,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(RouleauError::Invalid("non-finite value".into()));
        }
        if !(0.0 < p.eps1_deg && p.eps1_deg < p.eps2_deg && p.eps2_deg <= 180.0) {
            return Err(RouleauError::Invalid("need 0 < eps1_deg < eps2_deg <= 180".into()));
        }
        if p.cut_score > 10 {
            return Err(RouleauError::Invalid("cut_score must be in 0..=10".into()));
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), KvError> {
        match key {
            "eps1_deg" => self.eps1_deg = parse_value(key, v)?,
            "eps2_deg" => self.eps2_deg = parse_value(key, v)?,
            "digit_minimal_err_deg" => self.digit_minimal_err_deg = parse_value(key, v)?,
            "digit_gross_err_deg" => self.digit_gross_err_deg = parse_value(key, v)?,
            "face_distortion_ecc" => self.face_distortion_ecc = parse_value(key, v)?,
            "face_gap_deg" => self.face_gap_deg = parse_value(key, v)?,
            "size_ratio_max" => self.size_ratio_max = parse_value(key, v)?,
            "cut_score" => self.cut_score = parse_value(key, v)?,
            _ => return Err(KvError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses a `key = value` file; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, RouleauError> {
        let mut p = Self::default();
        for (k, v) in parse_kv(text)? {
            p.set(&k, &v)?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "eps1_deg = {}\neps2_deg = {}\ndigit_minimal_err_deg = {}\ndigit_gross_err_deg = {}\n\
             face_distortion_ecc = {}\nface_gap_deg = {}\nsize_ratio_max = {}\ncut_score = {}\n",
            self.eps1_deg,
            self.eps2_deg,
            self.digit_minimal_err_deg,
            self.digit_gross_err_deg,
            self.face_distortion_ecc,
            self.face_gap_deg,
            self.size_ratio_max,
            self.cut_score
        )
    }
}

impl fmt::Display for RouleauParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eps1={} eps2={} digit_min={} digit_gross={} ecc={} gap={} ratio={} cut={}",
            self.eps1_deg,
            self.eps2_deg,
            self.digit_minimal_err_deg,
            self.digit_gross_err_deg,
            self.face_distortion_ecc,
            self.face_gap_deg,
            self.size_ratio_max,
            self.cut_score
        )
    }
}

/// The measurements Rouleau scoring reads, for one clock. NaN = missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouleauInputs {
    pub face_present: f64,
    pub face_eccentricity: f64,
    pub face_largest_gap_deg: f64,
    pub digits_missing: f64,
    pub digits_repeated: f64,
    pub digit_order_correct: f64,
    pub digits_counterclockwise: f64,
    pub digit_max_angle_error_deg: f64,
    pub hour_hand_present: f64,
    pub minute_hand_present: f64,
    pub hands_perseveration: f64,
    pub hour_hand_angle_error_deg: f64,
    pub minute_hand_angle_error_deg: f64,
    pub hand_size_ratio: f64,
}

/// Which clock to score. The command clock is the clinical convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoredClock {
    #[default]
    Command,
    Copy,
}

impl ScoredClock {
    pub fn prefix(self) -> &'static str {
        match self {
            ScoredClock::Command => "cmd_",
            ScoredClock::Copy => "copy_",
        }
    }
}

impl RouleauInputs {
    /// Feature names (without clock prefix) the scorer consumes.
    pub const FEATURES: [&'static str; 14] = [
        "face_present",
        "face_eccentricity",
        "face_largest_gap_deg",
        "digits_missing",
        "digits_repeated",
        "digit_order_correct",
        "digits_counterclockwise",
        "digit_max_angle_error_deg",
        "hour_hand_present",
        "minute_hand_present",
        "hands_perseveration",
        "hour_hand_angle_error_deg",
        "minute_hand_angle_error_deg",
        "hand_size_ratio",
    ];

    /// Reads the prefixed features; absent names count as missing.
    pub fn from_vector(v: &FeatureVector, clock: ScoredClock) -> Self {
        let g = |n: &str| v.get(&format!("{}{n}", clock.prefix())).unwrap_or(f64::NAN);
        Self {
            face_present: g("face_present"),
            face_eccentricity: g("face_eccentricity"),
            face_largest_gap_deg: g("face_largest_gap_deg"),
            digits_missing: g("digits_missing"),
            digits_repeated: g("digits_repeated"),
            digit_order_correct: g("digit_order_correct"),
            digits_counterclockwise: g("digits_counterclockwise"),
            digit_max_angle_error_deg: g("digit_max_angle_error_deg"),
            hour_hand_present: g("hour_hand_present"),
            minute_hand_present: g("minute_hand_present"),
            hands_perseveration: g("hands_perseveration"),
            hour_hand_angle_error_deg: g("hour_hand_angle_error_deg"),
            minute_hand_angle_error_deg: g("minute_hand_angle_error_deg"),
            hand_size_ratio: g("hand_size_ratio"),
        }
    }
}

fn is_true(x: f64) -> bool {
    x == 1.0
}

/// A comparison that a missing value fails.
fn le(x: f64, limit: f64) -> bool {
    x <= limit
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouleauScore {
    pub face_pts: u8,
    pub numbers_pts: u8,
    pub hands_pts: u8,
    pub total: u8,
    pub rationale: Vec<String>,
}

pub fn score_face(x: &RouleauInputs, p: &RouleauParams) -> (u8, &'static str) {
    if !is_true(x.face_present) {
        return (0, "clockface absent");
    }
    let shape_ok = le(x.face_eccentricity, p.face_distortion_ecc);
    let closed_ok = le(x.face_largest_gap_deg, p.face_gap_deg);
    match (shape_ok, closed_ok) {
        (true, true) => (2, "present without gross distortion"),
        (false, false) if x.face_largest_gap_deg > 180.0 => (0, "totally inappropriate clockface"),
        (false, false) => (1, "distorted and incomplete"),
        (false, true) => (1, "some distortion"),
        (true, false) => (1, "incomplete"),
    }
}

pub fn score_numbers(x: &RouleauInputs, p: &RouleauParams) -> (u8, &'static str) {
    let missing = if x.digits_missing.is_nan() { 12.0 } else { x.digits_missing };
    if 12.0 - missing < 3.0 {
        return (0, "poor representation of numbers");
    }
    let dev = x.digit_max_angle_error_deg;
    let complete = missing == 0.0 && x.digits_repeated == 0.0;
    if complete {
        if is_true(x.digits_counterclockwise) {
            (2, "numbers placed counterclockwise")
        } else if is_true(x.digit_order_correct) && le(dev, p.digit_minimal_err_deg) {
            (4, "all present in the right order")
        } else if le(dev, p.digit_gross_err_deg) {
            (3, "all present, slight errors in spatial arrangement")
        } else {
            (2, "all present, gross spatial errors")
        }
    } else if le(dev, p.digit_gross_err_deg) {
        (2, "numbers missing or added, no gross distortion")
    } else {
        (1, "numbers missing or added with gross distortion")
    }
}

pub fn score_hands(x: &RouleauInputs, p: &RouleauParams) -> (u8, &'static str) {
    let hour = is_true(x.hour_hand_present);
    let minute = is_true(x.minute_hand_present);
    if is_true(x.hands_perseveration) {
        return (0, "perseveration on hands");
    }
    match (hour, minute) {
        (false, false) => return (0, "no hands"),
        (true, false) | (false, true) => return (1, "only one hand"),
        _ => {}
    }
    let errs = [x.hour_hand_angle_error_deg, x.minute_hand_angle_error_deg];
    if errs.iter().any(|&e| !le(e, p.eps2_deg)) {
        return (2, "hand significantly out of course");
    }
    let slight = errs.iter().filter(|&&e| e > p.eps1_deg).count();
    match slight {
        0 if le(x.hand_size_ratio, p.size_ratio_max) => (4, "correct position, size difference respected"),
        0 | 1 => (3, "slight errors in placement or size difference absent"),
        _ => (2, "both hands slightly out of course"),
    }
}

pub fn rouleau_total(x: &RouleauInputs, p: &RouleauParams) -> RouleauScore {
    let (f, fr) = score_face(x, p);
    let (n, nr) = score_numbers(x, p);
    let (h, hr) = score_hands(x, p);
    RouleauScore {
        face_pts: f,
        numbers_pts: n,
        hands_pts: h,
        total: f + n + h,
        rationale: vec![fr.to_string(), nr.to_string(), hr.to_string()],
    }
}

/// Impaired iff the total falls below the cut score.
pub fn classify(score: &RouleauScore, p: &RouleauParams) -> bool {
    score.total < p.cut_score
}

/// Candidate values per threshold; the cut score is chosen afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct RouleauGrid {
    pub eps1_deg: Vec<f64>,
    pub eps2_deg: Vec<f64>,
    pub digit_minimal_err_deg: Vec<f64>,
    pub digit_gross_err_deg: Vec<f64>,
    pub face_distortion_ecc: Vec<f64>,
    pub face_gap_deg: Vec<f64>,
    pub size_ratio_max: Vec<f64>,
}

impl Default for RouleauGrid {
    fn default() -> Self {
        Self {
            eps1_deg: vec![10.0, 15.0, 20.0, 30.0],
            eps2_deg: vec![30.0, 45.0, 60.0, 90.0],
            digit_minimal_err_deg: vec![15.0, 22.5, 30.0],
            digit_gross_err_deg: vec![45.0, 60.0, 90.0],
            face_distortion_ecc: vec![0.4, 0.6, 0.8],
            face_gap_deg: vec![30.0, 45.0, 90.0],
            size_ratio_max: vec![0.8, 0.9, 1.0],
        }
    }
}

impl RouleauGrid {
    pub fn single(p: &RouleauParams) -> Self {
        Self {
            eps1_deg: vec![p.eps1_deg],
            eps2_deg: vec![p.eps2_deg],
            digit_minimal_err_deg: vec![p.digit_minimal_err_deg],
            digit_gross_err_deg: vec![p.digit_gross_err_deg],
            face_distortion_ecc: vec![p.face_distortion_ecc],
            face_gap_deg: vec![p.face_gap_deg],
            size_ratio_max: vec![p.size_ratio_max],
        }
    }

    /// Parses `key = v1, v2, ...` lines over the threshold names.
    pub fn parse(text: &str) -> Result<Self, RouleauError> {
        let mut g = Self::default();
        for (k, v) in parse_kv(text)? {
            let list = parse_list::<f64>(&k, &v)?;
            if list.is_empty() || list.iter().any(|x| !x.is_finite()) {
                return Err(KvError::BadValue { key: k, value: v }.into());
            }
            match k.as_str() {
                "eps1_deg" => g.eps1_deg = list,
                "eps2_deg" => g.eps2_deg = list,
                "digit_minimal_err_deg" => g.digit_minimal_err_deg = list,
                "digit_gross_err_deg" => g.digit_gross_err_deg = list,
                "face_distortion_ecc" => g.face_distortion_ecc = list,
                "face_gap_deg" => g.face_gap_deg = list,
                "size_ratio_max" => g.size_ratio_max = list,
                _ => return Err(KvError::UnknownKey(k).into()),
            }
        }
        Ok(g)
    }

    /// Valid parameter combinations (eps1 < eps2), eps pairs outermost in
    /// ascending order so ties resolve to the smallest pair.
    pub fn points(&self) -> Vec<RouleauParams> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let mut out = Vec::new();
        for &e1 in &sorted(&self.eps1_deg) {
            for &e2 in &sorted(&self.eps2_deg) {
                for &dm in &self.digit_minimal_err_deg {
                    for &dg in &self.digit_gross_err_deg {
                        for &ecc in &self.face_distortion_ecc {
                            for &gap in &self.face_gap_deg {
                                for &r in &self.size_ratio_max {
                                    let p = RouleauParams {
                                        eps1_deg: e1,
                                        eps2_deg: e2,
                                        digit_minimal_err_deg: dm,
                                        digit_gross_err_deg: dg,
                                        face_distortion_ecc: ecc,
                                        face_gap_deg: gap,
                                        size_ratio_max: r,
                                        cut_score: RouleauParams::default().cut_score,
                                    };
                                    if p.validate().is_ok() {
                                        out.push(p);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Cut score maximizing Youden's J (TPR − FPR) on training totals; the
/// smallest such cut wins ties.
pub fn fit_cut_score(totals: &[u8], labels: &[bool]) -> u8 {
    let n_pos = labels.iter().filter(|&&l| l).count().max(1) as f64;
    let n_neg = labels.iter().filter(|&&l| !l).count().max(1) as f64;
    let mut best = (f64::NEG_INFINITY, 0u8);
    for cut in 0..=10u8 {
        let tp = totals.iter().zip(labels).filter(|(&t, &l)| l && t < cut).count() as f64;
        let fp = totals.iter().zip(labels).filter(|(&t, &l)| !l && t < cut).count() as f64;
        let j = tp / n_pos - fp / n_neg;
        if j > best.0 {
            best = (j, cut);
        }
    }
    best.1
}

/// Grid search maximizing training AUC of −total. Returns the parameters
/// and their training AUC.
pub fn fit_params(
    train: &[RouleauInputs],
    labels: &[bool],
    grid: &RouleauGrid,
) -> Result<(RouleauParams, f64), RouleauError> {
    let points = grid.points();
    if points.is_empty() {
        return Err(RouleauError::Invalid("grid has no valid parameter combination".into()));
    }
    let mut best: Option<(f64, RouleauParams, Vec<u8>)> = None;
    let mut scores = vec![0.0; train.len()];
    for p in points {
        let totals: Vec<u8> = train.iter().map(|x| rouleau_total(x, &p).total).collect();
        for (s, &t) in scores.iter_mut().zip(&totals) {
            *s = -(t as f64);
        }
        let a = auc(&scores, labels)?;
        if best.as_ref().is_none_or(|b| a > b.0) {
            best = Some((a, p, totals));
        }
    }
    let (a, mut p, totals) = best.expect("nonempty grid");
    p.cut_score = fit_cut_score(&totals, labels);
    Ok((p, a))
}

/// Rouleau as a cross-validation learner over precomputed inputs.
pub struct RouleauLearner<'a> {
    pub inputs: &'a [RouleauInputs],
    pub labels: &'a [bool],
}

/// A grid to search, shown by its size in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig(pub RouleauGrid);

impl fmt::Display for GridConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rouleau grid of {}", self.0.points().len())
    }
}

impl Learner for RouleauLearner<'_> {
    type Config = GridConfig;
    type Model = RouleauParams;

    fn fit(&self, config: &GridConfig, rows: &[usize]) -> Result<RouleauParams, EvalError> {
        let x: Vec<RouleauInputs> = rows.iter().map(|&r| self.inputs[r]).collect();
        let y: Vec<bool> = rows.iter().map(|&r| self.labels[r]).collect();
        fit_params(&x, &y, &config.0).map(|(p, _)| p).map_err(|e| match e {
            RouleauError::Eval(e) => e,
            e => EvalError::Trainer(e.to_string()),
        })
    }

    fn score(&self, model: &RouleauParams, row: usize) -> f64 {
        -(rouleau_total(&self.inputs[row], model).total as f64)
    }
}

/// CSV report: `subject_id,face,numbers,hands,total,impaired`.
pub fn score_csv(subjects: &[String], inputs: &[RouleauInputs], p: &RouleauParams) -> String {
    let mut s = String::from("subject_id,face,numbers,hands,total,impaired\n");
    for (id, x) in subjects.iter().zip(inputs) {
        let r = rouleau_total(x, p);
        s.push_str(&format!(
            "{id},{},{},{},{},{}\n",
            r.face_pts,
            r.numbers_pts,
            r.hands_pts,
            r.total,
            u8::from(classify(&r, p))
        ));
    }
    s
}
