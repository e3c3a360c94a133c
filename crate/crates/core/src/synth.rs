//! Seeded generator of synthetic clock tests.
//!
//! Phenotype presets are invented calibration: they exist to exercise the
//! pipeline with controllable error modes and carry no clinical meaning.
//!
//! Randomness comes from ChaCha8 streams. Each subject gets its own seed
//! derived from the dataset seed, its group and its index within the group,
//! so any subset of a cohort can be regenerated on its own.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::kv::{self, KvError};
use crate::stroke::{
    ClockDrawing, ClockKind, ClockTest, Group, PenPoint, Stroke, SymbolLabel,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("phenotype {group}: {field} = {value} is out of range")]
    OutOfRange { group: Group, field: &'static str, value: f64 },
    #[error("no phenotype given for group {0}")]
    MissingPhenotype(Group),
    #[error("sample period must be positive")]
    BadSamplePeriod,
    #[error("canvas radius must be positive")]
    BadCanvas,
    #[error(transparent)]
    Config(#[from] KvError),
}

/// Error-mode parameters for one simulated group.
#[derive(Debug, Clone, PartialEq)]
pub struct PhenotypeParams {
    pub group: Group,
    pub digit_omission_prob: f64,
    pub digit_repetition_prob: f64,
    pub digit_angle_jitter_deg: f64,
    pub hand_angle_error_deg: f64,
    pub minute_to_10_error_prob: f64,
    pub hand_omission_prob: f64,
    pub crossed_out_digit_prob: f64,
    pub draw_speed_cm_per_s: f64,
    pub clockface_eccentricity: f64,
    pub clockface_gap_deg: f64,
    pub noise_stroke_rate: f64,
    pub inter_symbol_latency_ms: f64,
    /// Size of the drawing relative to the canvas radius.
    pub drawing_scale: f64,
    /// Probability that a drawn hand gets an arrowhead.
    pub arrowhead_prob: f64,
    /// Multiplier applied to every error probability and jitter in the copy clock.
    pub copy_error_scale: f64,
    /// Log-scale spread of per-subject speed, latency, size and face shape.
    pub subject_spread: f64,
}

macro_rules! phenotype_fields {
    ($m:ident) => {
        $m!(
            digit_omission_prob,
            digit_repetition_prob,
            digit_angle_jitter_deg,
            hand_angle_error_deg,
            minute_to_10_error_prob,
            hand_omission_prob,
            crossed_out_digit_prob,
            draw_speed_cm_per_s,
            clockface_eccentricity,
            clockface_gap_deg,
            noise_stroke_rate,
            inter_symbol_latency_ms,
            drawing_scale,
            arrowhead_prob,
            copy_error_scale,
            subject_spread
        )
    };
}

impl PhenotypeParams {
    /// Noiseless drawer: every error probability and jitter is zero.
    pub fn ideal(group: Group) -> Self {
        Self {
            group,
            digit_omission_prob: 0.0,
            digit_repetition_prob: 0.0,
            digit_angle_jitter_deg: 0.0,
            hand_angle_error_deg: 0.0,
            minute_to_10_error_prob: 0.0,
            hand_omission_prob: 0.0,
            crossed_out_digit_prob: 0.0,
            draw_speed_cm_per_s: 3.0,
            clockface_eccentricity: 0.0,
            clockface_gap_deg: 0.0,
            noise_stroke_rate: 0.0,
            inter_symbol_latency_ms: 600.0,
            drawing_scale: 1.0,
            arrowhead_prob: 0.0,
            copy_error_scale: 1.0,
            subject_spread: 0.0,
        }
    }

    /// Shipped preset for a group. HC is near-ideal; MID pauses long between
    /// symbols and often sets the minute hand to 10; VCD adds digit jitter,
    /// noise strokes and slow drawing; PD draws slowly and small. Impaired
    /// groups carry their errors into the copy clock.
    pub fn preset(group: Group) -> Self {
        let base = Self::ideal(group);
        match group {
            Group::HC => Self {
                digit_omission_prob: 0.004,
                digit_repetition_prob: 0.004,
                digit_angle_jitter_deg: 4.0,
                hand_angle_error_deg: 5.0,
                minute_to_10_error_prob: 0.03,
                hand_omission_prob: 0.01,
                crossed_out_digit_prob: 0.005,
                draw_speed_cm_per_s: 3.2,
                clockface_eccentricity: 0.25,
                clockface_gap_deg: 8.0,
                noise_stroke_rate: 0.2,
                inter_symbol_latency_ms: 650.0,
                arrowhead_prob: 0.4,
                copy_error_scale: 0.6,
                subject_spread: 0.25,
                ..base
            },
            Group::MID => Self {
                digit_omission_prob: 0.03,
                digit_repetition_prob: 0.02,
                digit_angle_jitter_deg: 5.0,
                hand_angle_error_deg: 6.0,
                minute_to_10_error_prob: 0.3,
                hand_omission_prob: 0.06,
                crossed_out_digit_prob: 0.02,
                draw_speed_cm_per_s: 2.6,
                clockface_eccentricity: 0.3,
                clockface_gap_deg: 12.0,
                noise_stroke_rate: 0.6,
                inter_symbol_latency_ms: 1500.0,
                arrowhead_prob: 0.3,
                copy_error_scale: 1.0,
                subject_spread: 0.25,
                ..base
            },
            Group::VCD => Self {
                digit_omission_prob: 0.02,
                digit_repetition_prob: 0.015,
                digit_angle_jitter_deg: 7.0,
                hand_angle_error_deg: 6.0,
                minute_to_10_error_prob: 0.1,
                hand_omission_prob: 0.04,
                crossed_out_digit_prob: 0.02,
                draw_speed_cm_per_s: 2.1,
                clockface_eccentricity: 0.3,
                clockface_gap_deg: 12.0,
                noise_stroke_rate: 0.8,
                inter_symbol_latency_ms: 1300.0,
                drawing_scale: 0.95,
                arrowhead_prob: 0.3,
                copy_error_scale: 1.0,
                subject_spread: 0.25,
                ..base
            },
            Group::PD => Self {
                digit_omission_prob: 0.01,
                digit_repetition_prob: 0.01,
                digit_angle_jitter_deg: 4.5,
                hand_angle_error_deg: 5.0,
                minute_to_10_error_prob: 0.06,
                hand_omission_prob: 0.03,
                crossed_out_digit_prob: 0.015,
                draw_speed_cm_per_s: 1.8,
                clockface_eccentricity: 0.3,
                clockface_gap_deg: 12.0,
                noise_stroke_rate: 0.6,
                inter_symbol_latency_ms: 850.0,
                drawing_scale: 0.75,
                arrowhead_prob: 0.3,
                copy_error_scale: 0.9,
                subject_spread: 0.25,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let g = self.group;
        let check = |field: &'static str, value: f64, ok: bool| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(SynthError::OutOfRange { group: g, field, value })
            }
        };
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        check("digit_omission_prob", self.digit_omission_prob, prob(self.digit_omission_prob))?;
        check("digit_repetition_prob", self.digit_repetition_prob, prob(self.digit_repetition_prob))?;
        check("minute_to_10_error_prob", self.minute_to_10_error_prob, prob(self.minute_to_10_error_prob))?;
        check("hand_omission_prob", self.hand_omission_prob, prob(self.hand_omission_prob))?;
        check("crossed_out_digit_prob", self.crossed_out_digit_prob, prob(self.crossed_out_digit_prob))?;
        check("arrowhead_prob", self.arrowhead_prob, prob(self.arrowhead_prob))?;
        check("digit_angle_jitter_deg", self.digit_angle_jitter_deg, self.digit_angle_jitter_deg >= 0.0)?;
        check("hand_angle_error_deg", self.hand_angle_error_deg, self.hand_angle_error_deg >= 0.0)?;
        check("draw_speed_cm_per_s", self.draw_speed_cm_per_s, self.draw_speed_cm_per_s > 0.0)?;
        check(
            "clockface_eccentricity",
            self.clockface_eccentricity,
            (0.0..1.0).contains(&self.clockface_eccentricity),
        )?;
        check("clockface_gap_deg", self.clockface_gap_deg, (0.0..360.0).contains(&self.clockface_gap_deg))?;
        check("noise_stroke_rate", self.noise_stroke_rate, self.noise_stroke_rate >= 0.0)?;
        check("inter_symbol_latency_ms", self.inter_symbol_latency_ms, self.inter_symbol_latency_ms >= 0.0)?;
        check("drawing_scale", self.drawing_scale, self.drawing_scale > 0.0)?;
        check("copy_error_scale", self.copy_error_scale, self.copy_error_scale >= 0.0)?;
        check("subject_spread", self.subject_spread, self.subject_spread >= 0.0)?;
        Ok(())
    }

    /// Sets one numeric field by name.
    pub fn set(&mut self, field: &str, value: &str) -> Result<(), KvError> {
        macro_rules! assign {
            ($($f:ident),*) => {
                match field {
                    $(stringify!($f) => { self.$f = kv::parse_value(field, value)?; Ok(()) })*
                    _ => Err(KvError::UnknownKey(field.to_string())),
                }
            };
        }
        phenotype_fields!(assign)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($($f:ident),*) => {
                $(out.push_str(&format!("{}.{} = {}\n", self.group, stringify!($f), self.$f));)*
            };
        }
        phenotype_fields!(emit);
        out
    }

    fn for_copy_clock(&self) -> Self {
        let s = self.copy_error_scale;
        let p = |v: f64| (v * s).clamp(0.0, 1.0);
        Self {
            digit_omission_prob: p(self.digit_omission_prob),
            digit_repetition_prob: p(self.digit_repetition_prob),
            digit_angle_jitter_deg: self.digit_angle_jitter_deg * s,
            hand_angle_error_deg: self.hand_angle_error_deg * s,
            minute_to_10_error_prob: p(self.minute_to_10_error_prob),
            hand_omission_prob: p(self.hand_omission_prob),
            crossed_out_digit_prob: p(self.crossed_out_digit_prob),
            ..self.clone()
        }
    }
}

pub fn preset_phenotypes() -> BTreeMap<Group, PhenotypeParams> {
    Group::ALL.into_iter().map(|g| (g, PhenotypeParams::preset(g))).collect()
}

/// Parses a phenotype config file. `preset = default | ideal` picks the
/// starting values (default when absent); `<GROUP>.<field> = value` lines
/// override individual fields.
pub fn parse_phenotypes(text: &str) -> Result<BTreeMap<Group, PhenotypeParams>, SynthError> {
    let entries = kv::parse_kv(text)?;
    let mut out = match entries.get("preset").map(String::as_str) {
        None | Some("default") => preset_phenotypes(),
        Some("ideal") => Group::ALL.into_iter().map(|g| (g, PhenotypeParams::ideal(g))).collect(),
        Some(other) => {
            return Err(KvError::BadValue { key: "preset".into(), value: other.into() }.into())
        }
    };
    for (key, value) in &entries {
        if key == "preset" {
            continue;
        }
        let (group, field) = key
            .split_once('.')
            .ok_or_else(|| KvError::UnknownKey(key.clone()))?;
        let group: Group = group.parse().map_err(|_| KvError::UnknownKey(key.clone()))?;
        out.get_mut(&group).expect("all groups present").set(field, value)?;
    }
    for p in out.values() {
        p.validate()?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub counts: BTreeMap<Group, usize>,
    pub seed: u64,
    pub canvas_radius_cm: f64,
    pub sample_period_ms: i64,
}

impl GeneratorConfig {
    pub fn new(counts: impl IntoIterator<Item = (Group, usize)>, seed: u64) -> Self {
        Self { counts: counts.into_iter().collect(), seed, canvas_radius_cm: 4.0, sample_period_ms: 13 }
    }

    /// 406 controls and 151 subjects in each impaired group.
    pub fn default_cohort(seed: u64) -> Self {
        Self::new([(Group::HC, 406), (Group::MID, 151), (Group::VCD, 151), (Group::PD, 151)], seed)
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.sample_period_ms <= 0 {
            return Err(SynthError::BadSamplePeriod);
        }
        if !(self.canvas_radius_cm > 0.0) {
            return Err(SynthError::BadCanvas);
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th subject of `group` in a dataset seeded with `seed`.
pub fn subject_seed(seed: u64, group: Group, index: usize) -> u64 {
    let g = group as u64 + 1;
    splitmix64(splitmix64(seed ^ splitmix64(g)) ^ index as u64)
}

pub fn subject_id(group: Group, index: usize) -> String {
    format!("{}-{:04}", group, index + 1)
}

pub fn generate_dataset(
    cfg: &GeneratorConfig,
    phenotypes: &BTreeMap<Group, PhenotypeParams>,
) -> Result<Vec<ClockTest>, SynthError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for (&group, &count) in &cfg.counts {
        if count == 0 {
            continue;
        }
        let params = phenotypes.get(&group).ok_or(SynthError::MissingPhenotype(group))?;
        params.validate()?;
        for i in 0..count {
            out.push(generate_test(params, &subject_id(group, i), subject_seed(cfg.seed, group, i), cfg));
        }
    }
    Ok(out)
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        z * sigma
    }
}

fn lognormal_factor(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    gauss(rng, sigma).exp()
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    p > 0.0 && rng.random::<f64>() < p
}

/// Unit vector pointing at a clock angle (degrees clockwise from 12).
fn clock_dir(angle_deg: f64) -> (f64, f64) {
    let (s, c) = angle_deg.to_radians().sin_cos();
    (s, c)
}

struct Pen<'a> {
    rng: &'a mut ChaCha8Rng,
    period: i64,
    t: i64,
    started: bool,
    next_id: u32,
    strokes: Vec<Stroke>,
    speed: f64,
    latency: f64,
    speed_jitter: f64,
}

impl Pen<'_> {
    fn pause(&mut self, mean_ms: f64) {
        if !self.started {
            return;
        }
        let e: f64 = Exp1.sample(self.rng);
        let gap = (mean_ms * (0.5 + 0.5 * e)).round() as i64;
        self.t += gap.max(self.period);
    }

    fn draw(&mut self, label: SymbolLabel, path: &[(f64, f64)]) {
        let seg: Vec<f64> =
            path.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).collect();
        let total: f64 = seg.iter().sum();
        self.draw_curve(label, total, |frac| {
            if frac >= 1.0 {
                return path[path.len() - 1];
            }
            let s = total * frac;
            let mut seg_idx = 0;
            let mut seg_start = 0.0;
            while seg_idx + 1 < seg.len() && s > seg_start + seg[seg_idx] {
                seg_start += seg[seg_idx];
                seg_idx += 1;
            }
            let (a, b) = (path[seg_idx], path[seg_idx + 1]);
            let f = if seg[seg_idx] > 0.0 { ((s - seg_start) / seg[seg_idx]).clamp(0.0, 1.0) } else { 0.0 };
            (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
        });
    }

    /// Samples `curve` (parameterized on `[0, 1]`) at the pen period, taking
    /// as long as `length` cm needs at the current speed.
    fn draw_curve(&mut self, label: SymbolLabel, length: f64, curve: impl Fn(f64) -> (f64, f64)) {
        let speed = self.speed * lognormal_factor(self.rng, self.speed_jitter);
        let duration_ms = length / speed * 1000.0;
        let intervals = ((duration_ms / self.period as f64).round() as usize).max(1);
        let points = (0..=intervals)
            .map(|k| {
                let (x, y) = curve(k as f64 / intervals as f64);
                PenPoint::new(x, y, self.t + k as i64 * self.period)
            })
            .collect();
        self.t += intervals as i64 * self.period;
        self.started = true;
        let id = self.next_id;
        self.next_id += 1;
        self.strokes.push(Stroke::new(id, label, points).expect("sampled strokes are valid"));
    }
}

struct Face {
    center: (f64, f64),
    semi_major: f64,
    semi_minor: f64,
    /// Major-axis direction, radians counterclockwise from +x.
    rotation: f64,
}

impl Face {
    fn point_at_param(&self, s: f64) -> (f64, f64) {
        let (x, y) = (self.semi_major * s.cos(), self.semi_minor * s.sin());
        let (sr, cr) = self.rotation.sin_cos();
        (self.center.0 + cr * x - sr * y, self.center.1 + sr * x + cr * y)
    }

    /// Distance from the center to the outline along a clock direction.
    fn radius_toward(&self, angle_deg: f64) -> f64 {
        let (ux, uy) = clock_dir(angle_deg);
        let (sr, cr) = self.rotation.sin_cos();
        let (lx, ly) = (cr * ux + sr * uy, -sr * ux + cr * uy);
        1.0 / ((lx / self.semi_major).powi(2) + (ly / self.semi_minor).powi(2)).sqrt()
    }

    fn at(&self, angle_deg: f64, radius: f64) -> (f64, f64) {
        let (ux, uy) = clock_dir(angle_deg);
        (self.center.0 + radius * ux, self.center.1 + radius * uy)
    }
}

struct SubjectTraits {
    speed: f64,
    latency: f64,
    size: f64,
    eccentricity: f64,
    gap_deg: f64,
}

pub const CLOCK_CENTER: (f64, f64) = (10.0, 14.0);
const HOUR_TARGET_DEG: f64 = 335.0;
const MINUTE_TARGET_DEG: f64 = 60.0;
const DIGIT_TEN_DEG: f64 = 300.0;

pub fn generate_test(
    params: &PhenotypeParams,
    subject_id: &str,
    seed: u64,
    cfg: &GeneratorConfig,
) -> ClockTest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = params.subject_spread;
    let traits = SubjectTraits {
        speed: params.draw_speed_cm_per_s * lognormal_factor(&mut rng, spread),
        latency: params.inter_symbol_latency_ms * lognormal_factor(&mut rng, spread),
        size: params.drawing_scale * lognormal_factor(&mut rng, spread * 0.5),
        eccentricity: (params.clockface_eccentricity * lognormal_factor(&mut rng, spread)).min(0.9),
        gap_deg: (params.clockface_gap_deg * lognormal_factor(&mut rng, spread)).min(300.0),
    };

    let mut pen = Pen {
        rng: &mut rng,
        period: cfg.sample_period_ms,
        t: 0,
        started: false,
        next_id: 0,
        strokes: Vec::new(),
        speed: traits.speed,
        latency: traits.latency,
        speed_jitter: if spread > 0.0 { 0.1 } else { 0.0 },
    };
    draw_clock(&mut pen, params, &traits, cfg.canvas_radius_cm);
    let command = ClockDrawing::new(ClockKind::Command, std::mem::take(&mut pen.strokes))
        .expect("fresh ids");

    pen.pause(3000.0 + traits.latency);
    pen.next_id = 0;
    draw_clock(&mut pen, &params.for_copy_clock(), &traits, cfg.canvas_radius_cm);
    let copy = ClockDrawing::new(ClockKind::Copy, std::mem::take(&mut pen.strokes)).expect("fresh ids");

    ClockTest::new(subject_id, command, copy, Some(params.group)).expect("kinds set")
}

fn draw_clock(pen: &mut Pen<'_>, p: &PhenotypeParams, traits: &SubjectTraits, canvas_radius: f64) {
    let a = canvas_radius * traits.size;
    let ecc = traits.eccentricity;
    let face = Face {
        center: CLOCK_CENTER,
        semi_major: a,
        semi_minor: a * (1.0 - ecc * ecc).sqrt(),
        rotation: if ecc > 0.0 { pen.rng.random::<f64>() * std::f64::consts::PI } else { 0.0 },
    };
    let latency = pen.latency;

    // Clockface: one clockwise stroke leaving `gap_deg` undrawn.
    let start_clock_deg = pen.rng.random::<f64>() * 360.0;
    let sweep = 360.0 - traits.gap_deg;
    let steps = sweep.ceil().max(6.0) as usize;
    let s0 = (90.0 - start_clock_deg).to_radians() - face.rotation;
    let length: f64 = (0..steps)
        .map(|k| {
            let p0 = face.point_at_param(s0 - (sweep * k as f64 / steps as f64).to_radians());
            let p1 = face.point_at_param(s0 - (sweep * (k + 1) as f64 / steps as f64).to_radians());
            (p1.0 - p0.0).hypot(p1.1 - p0.1)
        })
        .sum();
    pen.draw_curve(SymbolLabel::CLOCKFACE, length, |f| face.point_at_param(s0 - (sweep * f).to_radians()));

    // Digits in reading order 12, 1, ..., 11.
    let glyph_h = 0.2 * a;
    for d in std::iter::once(12u8).chain(1..=11) {
        if bernoulli(pen.rng, p.digit_omission_prob) {
            continue;
        }
        let angle = (d as f64 * 30.0) % 360.0 + gauss(pen.rng, p.digit_angle_jitter_deg);
        let radius = 0.8 * face.radius_toward(angle);
        let width = if d >= 10 { 0.9 * glyph_h } else { 0.5 * glyph_h };
        let label = SymbolLabel::digit(d).expect("1..=12");
        let center = face.at(angle, radius);

        if bernoulli(pen.rng, p.crossed_out_digit_prob) {
            pen.pause(latency);
            draw_glyph(pen, label, center, width, glyph_h, latency);
            pen.pause(latency * 0.5);
            let (hw, hh) = (width / 2.0 + 0.1, glyph_h / 2.0 + 0.1);
            pen.draw(
                SymbolLabel::NOISE,
                &[(center.0 - hw, center.1 - hh), (center.0 + hw, center.1 + hh)],
            );
            // Rewrite next to the struck-out glyph, shifted clockwise.
            let (tx, ty) = {
                let (ux, uy) = clock_dir(angle);
                (uy, -ux)
            };
            let shift = width + 0.25 * glyph_h;
            let center = (center.0 + shift * tx, center.1 + shift * ty);
            pen.pause(latency * 0.5);
            draw_glyph(pen, label, center, width, glyph_h, latency);
        } else {
            pen.pause(latency);
            draw_glyph(pen, label, center, width, glyph_h, latency);
        }

        if bernoulli(pen.rng, p.digit_repetition_prob) {
            pen.pause(latency);
            let inner = face.at(angle, 0.55 * face.radius_toward(angle));
            draw_glyph(pen, label, inner, width, glyph_h, latency);
        }
    }

    // Hands for 11:10, drawn from the center outward.
    let hands = [
        (SymbolLabel::HOUR_HAND, SymbolLabel::ARROWHEAD_HOUR, HOUR_TARGET_DEG, 0.35 * a, false),
        (SymbolLabel::MINUTE_HAND, SymbolLabel::ARROWHEAD_MINUTE, MINUTE_TARGET_DEG, 0.7 * a, true),
    ];
    for (label, arrow, target, length, is_minute) in hands {
        if bernoulli(pen.rng, p.hand_omission_prob) {
            continue;
        }
        let mut angle = target;
        if is_minute && bernoulli(pen.rng, p.minute_to_10_error_prob) {
            angle = DIGIT_TEN_DEG;
        }
        angle += gauss(pen.rng, p.hand_angle_error_deg);
        let tip = face.at(angle, length);
        pen.pause(latency);
        pen.draw(label, &[face.center, tip]);
        if bernoulli(pen.rng, p.arrowhead_prob) {
            let size = 0.06 * a;
            let back = |off: f64| {
                let (ux, uy) = clock_dir(angle + 180.0 + off);
                (tip.0 + size * ux, tip.1 + size * uy)
            };
            pen.pause(latency * 0.25);
            pen.draw(arrow, &[back(-30.0), tip, back(30.0)]);
        }
    }

    let noise_count = if p.noise_stroke_rate > 0.0 {
        Poisson::new(p.noise_stroke_rate).expect("positive rate").sample(pen.rng) as usize
    } else {
        0
    };
    for _ in 0..noise_count {
        let angle = pen.rng.random::<f64>() * 360.0;
        let radius = pen.rng.random::<f64>() * 0.6 * a;
        let (cx, cy) = face.at(angle, radius);
        let z = 0.04 * a;
        pen.pause(latency);
        pen.draw(
            SymbolLabel::NOISE,
            &[(cx - z, cy), (cx - z / 3.0, cy + z), (cx + z / 3.0, cy - z), (cx + z, cy)],
        );
    }
}

/// A digit drawn as two strokes that together trace its bounding box.
fn draw_glyph(
    pen: &mut Pen<'_>,
    label: SymbolLabel,
    center: (f64, f64),
    width: f64,
    height: f64,
    latency: f64,
) {
    let (l, r) = (center.0 - width / 2.0, center.0 + width / 2.0);
    let (b, t) = (center.1 - height / 2.0, center.1 + height / 2.0);
    pen.draw(label, &[(l, t), (l, b), (r, b)]);
    pen.pause(latency * 0.25);
    pen.draw(label, &[(l, t), (r, t), (r, b)]);
}
