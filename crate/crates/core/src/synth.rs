//! Synthetic driver populations with known gaze strategy.
//!
//! Every gaze region has a target displacement `g` in normalized units. A
//! subject with head gain `alpha` moves the nose tip by `alpha * g` inside
//! the eyes-and-nose box (a depth-weighted planar shear of the face) and the
//! pupil by `(1 - alpha) * g` inside the corner-aligned eye box, so the
//! owlness measured by the pipeline tracks `alpha`. Landmarks get Gaussian
//! jitter, eye crops are rendered as sclera, iris and a dark pupil disk with
//! Gaussian pixel noise, and frames can drop out as face or pupil failures.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{
    BoundingBox, EyePolygon, EyeSide, Landmarks, Point, EYES_AND_NOSE, LANDMARK_COUNT,
};
use crate::image::GrayImage;
use crate::region::{GazeRegion, NUM_REGIONS};
use crate::seed;

pub const CROP_WIDTH: usize = 40;
pub const CROP_HEIGHT: usize = 24;

const SKIN: f64 = 150.0;
const SCLERA: f64 = 200.0;
const IRIS: f64 = 110.0;
const PUPIL: f64 = 5.0;
const LASH_LINE: f64 = 90.0;
const IRIS_TO_PUPIL: f64 = 2.2;

/// Gaze displacement per region, in normalized units; Road is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionTargets {
    vectors: [Point<f64>; NUM_REGIONS],
}

impl RegionTargets {
    pub fn new(vectors: [Point<f64>; NUM_REGIONS]) -> Result<Self> {
        for i in 0..NUM_REGIONS {
            for j in i + 1..NUM_REGIONS {
                if vectors[i] == vectors[j] {
                    return Err(Error::config(
                        "region_targets",
                        format!(
                            "{} and {} share a target",
                            GazeRegion::ALL[i],
                            GazeRegion::ALL[j]
                        ),
                    ));
                }
            }
        }
        Ok(RegionTargets { vectors })
    }

    pub fn get(&self, region: GazeRegion) -> Point<f64> {
        self.vectors[region.index()]
    }
}

impl Default for RegionTargets {
    /// Center stack and instrument cluster sit close to the road.
    fn default() -> Self {
        RegionTargets::new([
            Point::new(0.0, 0.0),
            Point::new(0.10, 0.16),
            Point::new(0.0, 0.12),
            Point::new(0.20, -0.16),
            Point::new(-0.30, 0.02),
            Point::new(0.28, 0.04),
        ])
        .expect("distinct defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// Independent uniform draws on `[0, 1]`.
    Uniform,
    /// Evenly spaced from 0 to 1.
    Linspace,
    Fixed(f64),
}

impl AlphaSchedule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(AlphaSchedule::Uniform),
            "linspace" => Ok(AlphaSchedule::Linspace),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| {
                        Error::config(
                            "alpha",
                            format!("`{s}`: expected uniform, linspace or fixed:<0..1>"),
                        )
                    })?;
                Ok(AlphaSchedule::Fixed(v))
            }
        }
    }

    fn alphas(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            AlphaSchedule::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
            AlphaSchedule::Linspace if n == 1 => vec![0.5],
            AlphaSchedule::Linspace => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            AlphaSchedule::Fixed(a) => vec![a; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub frames_per_region: usize,
    pub alpha: AlphaSchedule,
    /// Landmark jitter in pixels.
    pub sigma_landmark: f64,
    /// Eye-crop pixel noise in 8-bit intensity levels.
    pub sigma_image: f64,
    pub p_face_fail: f64,
    /// Conditional on the face being found.
    pub p_pupil_fail: f64,
    /// Relative per-subject variation of face geometry.
    pub face_variation: f64,
    /// Per-subject offset of the resting pupil, normalized units.
    pub pupil_rest_sigma: f64,
    /// Per-subject offset of the resting head pose, in gaze units.
    pub head_rest_sigma: f64,
    /// Per-frame scatter of the gaze point around the region target.
    pub gaze_jitter: f64,
    /// Per-frame scatter of the pupil within the eye, normalized units.
    pub pupil_jitter: f64,
    /// Per-frame head sway independent of gaze, in gaze units.
    pub head_sway: f64,
    pub targets: RegionTargets,
    pub eye_side: EyeSide,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 40,
            frames_per_region: 120,
            alpha: AlphaSchedule::Uniform,
            sigma_landmark: 0.5,
            sigma_image: 8.0,
            p_face_fail: 0.0,
            p_pupil_fail: 0.0,
            face_variation: 0.08,
            pupil_rest_sigma: 0.04,
            head_rest_sigma: 0.0,
            gaze_jitter: 0.0,
            pupil_jitter: 0.0,
            head_sway: 0.0,
            targets: RegionTargets::default(),
            eye_side: EyeSide::Right,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Adds the frame-to-frame and subject-to-subject variability of real
    /// drivers: resting head pose, glance scatter, pupil flutter and head
    /// sway.
    pub fn with_behavioral_noise(self) -> Self {
        SynthConfig {
            head_rest_sigma: 0.05,
            gaze_jitter: 0.03,
            pupil_jitter: 0.08,
            head_sway: 0.08,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |key: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::config(key, format!("{p} is not a probability")))
            }
        };
        prob("face_fail", self.p_face_fail)?;
        prob("pupil_fail", self.p_pupil_fail)?;
        for (key, v) in [
            ("sigma_landmark", self.sigma_landmark),
            ("sigma_image", self.sigma_image),
            ("face_variation", self.face_variation),
            ("pupil_rest_sigma", self.pupil_rest_sigma),
            ("head_rest_sigma", self.head_rest_sigma),
            ("gaze_jitter", self.gaze_jitter),
            ("pupil_jitter", self.pupil_jitter),
            ("head_sway", self.head_sway),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be finite and >= 0"));
            }
        }
        if self.n_subjects == 0 {
            return Err(Error::config("subjects", "must be >= 1"));
        }
        if self.frames_per_region == 0 {
            return Err(Error::config("frames_per_region", "must be >= 1"));
        }
        Ok(())
    }
}

/// How much each landmark follows the head displacement horizontally and
/// vertically; a crude stand-in for depth relative to the eye plane.
fn head_weights(i: usize) -> (f64, f64) {
    match i {
        0..=16 => (-0.25, -0.15),
        17..=26 => (0.15, 0.15),
        27 => (0.2, 0.0),
        28 => (0.45, 0.45),
        29 => (0.7, 0.7),
        30 => (1.0, 1.0),
        // nostrils bound the normalizing box from below
        31..=35 => (0.6, 0.0),
        36..=47 => (0.0, 0.0),
        _ => (0.5, 0.5),
    }
}

/// Frontal 68-point face centered on the nose bridge, in pixels.
pub fn canonical_face() -> [Point<f64>; LANDMARK_COUNT] {
    let mut p = [Point::new(0.0, 0.0); LANDMARK_COUNT];
    for (i, q) in p.iter_mut().enumerate().take(17) {
        let t = PI * i as f64 / 16.0;
        *q = Point::new(-75.0 * t.cos(), 8.0 + 105.0 * t.sin());
    }
    for k in 0..5 {
        let y = -14.0 - 5.0 * (PI * k as f64 / 4.0).sin();
        p[17 + k] = Point::new(-62.0 + 11.0 * k as f64, y);
        p[22 + k] = Point::new(
            18.0 + 11.0 * k as f64,
            -14.0 - 5.0 * (PI * (4 - k) as f64 / 4.0).sin(),
        );
    }
    let nose = [
        (0.0, 4.0),
        (0.0, 16.0),
        (0.0, 27.0),
        (0.0, 38.0),
        (-15.0, 51.0),
        (-8.0, 54.0),
        (0.0, 56.0),
        (8.0, 54.0),
        (15.0, 51.0),
    ];
    let eyes = [
        (-60.0, 8.0),
        (-52.0, 0.0),
        (-36.0, 0.0),
        (-28.0, 8.0),
        (-36.0, 16.0),
        (-52.0, 16.0),
        (28.0, 8.0),
        (36.0, 0.0),
        (52.0, 0.0),
        (60.0, 8.0),
        (52.0, 16.0),
        (36.0, 16.0),
    ];
    for (k, &(x, y)) in nose.iter().chain(eyes.iter()).enumerate() {
        p[27 + k] = Point::new(x, y);
    }
    for k in 0..12 {
        let t = PI - 2.0 * PI * k as f64 / 12.0;
        p[48 + k] = Point::new(26.0 * t.cos(), 82.0 - 11.0 * t.sin());
    }
    for k in 0..8 {
        let t = PI - 2.0 * PI * k as f64 / 8.0;
        p[60 + k] = Point::new(16.0 * t.cos(), 82.0 - 4.0 * t.sin());
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: String,
    /// Fraction of a gaze shift carried by the head: 1 = owl, 0 = lizard.
    pub head_gain: f64,
    pub face: [Point<f64>; LANDMARK_COUNT],
    pub pupil_rest: Point<f64>,
    /// Resting head pose relative to the population, in gaze units.
    pub head_rest: Point<f64>,
    pub gaze_jitter: f64,
    pub pupil_jitter: f64,
    pub head_sway: f64,
    pub pupil_radius: f64,
    pub sigma_landmark: f64,
    pub sigma_image: f64,
    pub p_face_fail: f64,
    pub p_pupil_fail: f64,
    pub eye_side: EyeSide,
}

impl SubjectProfile {
    /// A subject with the canonical face and no noise or dropout.
    pub fn ideal(subject_id: impl Into<String>, head_gain: f64) -> Self {
        SubjectProfile {
            subject_id: subject_id.into(),
            head_gain,
            face: canonical_face(),
            pupil_rest: Point::new(0.0, 0.0),
            head_rest: Point::new(0.0, 0.0),
            gaze_jitter: 0.0,
            pupil_jitter: 0.0,
            head_sway: 0.0,
            pupil_radius: 3.5,
            sigma_landmark: 0.0,
            sigma_image: 0.0,
            p_face_fail: 0.0,
            p_pupil_fail: 0.0,
            eye_side: EyeSide::Right,
        }
    }

    fn draw(subject_id: String, head_gain: f64, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut n = || -> f64 { StandardNormal.sample(rng) };
        let v = cfg.face_variation;
        let (sx, sy) = (1.0 + v * n(), 1.0 + v * n());
        let nose_len = 1.0 + v * n();
        let mouth_drop = 6.0 * v * n() / 0.04;
        let mut face = canonical_face();
        for (i, q) in face.iter_mut().enumerate() {
            let mut y = q.y;
            if (28..=35).contains(&i) {
                y = 4.0 + (y - 4.0) * nose_len;
            }
            if i >= 48 {
                y += mouth_drop;
            }
            let (jx, jy) = (n(), n());
            *q = Point::new(q.x * sx + 20.0 * v * jx, y * sy + 20.0 * v * jy);
        }
        let rest = Point::new(cfg.pupil_rest_sigma * n(), cfg.pupil_rest_sigma * n());
        let pupil_radius = 3.5 + 0.3 * n().clamp(-2.0, 2.0);
        let head_rest = Point::new(cfg.head_rest_sigma * n(), cfg.head_rest_sigma * n());
        SubjectProfile {
            subject_id,
            head_gain,
            face,
            pupil_rest: rest,
            head_rest,
            gaze_jitter: cfg.gaze_jitter,
            pupil_jitter: cfg.pupil_jitter,
            head_sway: cfg.head_sway,
            pupil_radius,
            sigma_landmark: cfg.sigma_landmark,
            sigma_image: cfg.sigma_image,
            p_face_fail: cfg.p_face_fail,
            p_pupil_fail: cfg.p_pupil_fail,
            eye_side: cfg.eye_side,
        }
    }
}

/// Generator-side truth for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTruth {
    pub head_gain: f64,
    pub gaze: Point<f64>,
    /// Rendered pupil center in eye-crop pixels.
    pub pupil_center: Point<f64>,
    pub face_failed: bool,
    pub eye_closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrame {
    pub subject_id: String,
    pub frame_index: u64,
    pub label: GazeRegion,
    /// `None` for a simulated face-detection failure.
    pub record: Option<FrameRecord<f64>>,
    pub truth: FrameTruth,
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    } else {
        0.0
    }
}

/// Renders an eye crop: skin outside the polygon; sclera, iris and pupil
/// inside it; plus Gaussian noise of `sigma` intensity levels.
pub fn render_eye(
    width: usize,
    height: usize,
    polygon: &EyePolygon<f64>,
    pupil: Option<(Point<f64>, f64)>,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GrayImage> {
    let noise = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("positive sigma"));
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let p = Point::new(x as f64, y as f64);
            let mut v = if polygon.contains(p) {
                match pupil {
                    Some((c, r)) if p.distance(c) <= r => PUPIL,
                    Some((c, r)) if p.distance(c) <= IRIS_TO_PUPIL * r => IRIS,
                    _ => SCLERA,
                }
            } else {
                SKIN
            };
            if let Some(n) = &noise {
                v += n.sample(rng);
            }
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, data)
}

/// Inverse of pupil normalization: the crop position whose normalized
/// coordinates in `polygon` are `q`.
fn denormalize_pupil(q: Point<f64>, polygon: &EyePolygon<f64>) -> Point<f64> {
    let origin = polygon.outer_corner();
    let axis = polygon.inner_corner() - origin;
    let along = axis.scale(1.0 / axis.norm());
    let across = Point::new(-along.y, along.x);
    let rotated: Vec<Point<f64>> = polygon
        .points()
        .iter()
        .map(|&p| {
            let d = p - origin;
            Point::new(d.dot(along), d.dot(across))
        })
        .collect();
    let bb = BoundingBox::enclosing(rotated).expect("six points");
    let u = bb.min.x + q.x * bb.width();
    let v = bb.min.y + q.y * bb.height();
    origin + along.scale(u) + across.scale(v)
}

fn eye_points(lm: &[Point<f64>], side: EyeSide) -> [Point<f64>; 6] {
    let r = side.landmark_range();
    [
        lm[r.start],
        lm[r.start + 1],
        lm[r.start + 2],
        lm[r.start + 3],
        lm[r.start + 4],
        lm[r.start + 5],
    ]
}

/// Renders one frame of `profile` looking at `region`.
pub fn generate_frame(
    profile: &SubjectProfile,
    targets: &RegionTargets,
    region: GazeRegion,
    frame_index: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SynthFrame> {
    let alpha = profile.head_gain;
    let gaze = targets.get(region)
        + Point::new(
            gaussian(rng, profile.gaze_jitter),
            gaussian(rng, profile.gaze_jitter),
        );
    let face_failed = rng.random::<f64>() < profile.p_face_fail;
    let eye_closed = !face_failed && rng.random::<f64>() < profile.p_pupil_fail;

    let face_box =
        BoundingBox::enclosing(EYES_AND_NOSE.map(|i| profile.face[i])).expect("non-empty");
    let sway = Point::new(
        gaussian(rng, profile.head_sway),
        gaussian(rng, profile.head_sway),
    );
    let pose = gaze.scale(alpha) + profile.head_rest + sway;
    let (dx, dy) = (pose.x * face_box.width(), pose.y * face_box.height());
    let scale = rng.random_range(0.92..1.05);
    let offset = Point::new(
        rng.random_range(250.0..350.0),
        rng.random_range(200.0..260.0),
    );
    let place = |p: Point<f64>| offset + p.scale(scale);

    let mut truth_lm = [Point::new(0.0, 0.0); LANDMARK_COUNT];
    let mut observed = [Point::new(0.0, 0.0); LANDMARK_COUNT];
    for i in 0..LANDMARK_COUNT {
        let (wx, wy) = head_weights(i);
        let moved = profile.face[i] + Point::new(wx * dx, wy * dy);
        truth_lm[i] = place(moved);
        let jitter = Point::new(
            gaussian(rng, profile.sigma_landmark),
            gaussian(rng, profile.sigma_landmark),
        );
        observed[i] = truth_lm[i] + jitter;
    }

    // Crop a fixed-size window centered on the eye corners.
    let true_eye = eye_points(&truth_lm, profile.eye_side);
    let center = (true_eye[0] + true_eye[3]).scale(0.5);
    let crop_origin = Point::new(
        (center.x - (CROP_WIDTH as f64 - 1.0) / 2.0).floor(),
        (center.y - (CROP_HEIGHT as f64 - 1.0) / 2.0).floor(),
    );
    let to_crop = |p: Point<f64>| {
        let q = p - crop_origin;
        Point::new(
            q.x.clamp(0.0, (CROP_WIDTH - 1) as f64),
            q.y.clamp(0.0, (CROP_HEIGHT - 1) as f64),
        )
    };
    let true_poly = EyePolygon::new(true_eye.map(to_crop))?;
    let mut seen_poly = EyePolygon::new(eye_points(&observed, profile.eye_side).map(to_crop))?;

    if eye_closed {
        // lids collapse onto the corner line
        let (a, b) = (seen_poly.outer_corner(), seen_poly.inner_corner());
        let half = 0.03 * a.distance(b);
        let pts = seen_poly.points();
        let lid = |p: Point<f64>, sign: f64| {
            let t = ((p.x - a.x) / (b.x - a.x)).clamp(0.0, 1.0);
            Point::new(p.x, a.y + t * (b.y - a.y) + sign * half)
        };
        seen_poly = EyePolygon::new([
            pts[0],
            lid(pts[1], -1.0),
            lid(pts[2], -1.0),
            pts[3],
            lid(pts[4], 1.0),
            lid(pts[5], 1.0),
        ])?;
        let range = profile.eye_side.landmark_range();
        for (k, p) in seen_poly.points().iter().enumerate() {
            observed[range.start + k] = *p + crop_origin;
        }
    }

    let flutter = Point::new(
        gaussian(rng, profile.pupil_jitter),
        gaussian(rng, profile.pupil_jitter),
    );
    let q = Point::new(0.5, 0.5) + profile.pupil_rest + gaze.scale(1.0 - alpha) + flutter;
    let pupil_center = denormalize_pupil(q, &true_poly);
    let crop = if eye_closed {
        let mut img = render_eye(
            CROP_WIDTH,
            CROP_HEIGHT,
            &seen_poly,
            None,
            profile.sigma_image,
            rng,
        )?;
        // dark lash line instead of an open eye
        let data: Vec<u8> = (0..CROP_HEIGHT * CROP_WIDTH)
            .map(|i| {
                let p = Point::new((i % CROP_WIDTH) as f64, (i / CROP_WIDTH) as f64);
                if seen_poly.contains(p) {
                    LASH_LINE as u8
                } else {
                    img.data()[i]
                }
            })
            .collect();
        img = GrayImage::new(CROP_WIDTH, CROP_HEIGHT, data)?;
        img
    } else {
        render_eye(
            CROP_WIDTH,
            CROP_HEIGHT,
            &seen_poly,
            Some((pupil_center, profile.pupil_radius * scale)),
            profile.sigma_image,
            rng,
        )?
    };

    let record = if face_failed {
        None
    } else {
        Some(FrameRecord::new(
            profile.subject_id.clone(),
            frame_index,
            Landmarks::new(observed.to_vec())?,
            crop,
            seen_poly,
            region,
        )?)
    };

    Ok(SynthFrame {
        subject_id: profile.subject_id.clone(),
        frame_index,
        label: region,
        record,
        truth: FrameTruth {
            head_gain: alpha,
            gaze,
            pupil_center,
            face_failed,
            eye_closed,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub profiles: Vec<SubjectProfile>,
    pub frames: Vec<SynthFrame>,
}

pub fn subject_id(index: usize) -> String {
    format!("S{:03}", index + 1)
}

/// Draws subject profiles; deterministic in `cfg.seed`.
pub fn generate_profiles(cfg: &SynthConfig) -> Result<Vec<SubjectProfile>> {
    cfg.validate()?;
    let mut alpha_rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, 0));
    let alphas = cfg.alpha.alphas(cfg.n_subjects, &mut alpha_rng);
    Ok(alphas
        .into_iter()
        .enumerate()
        .map(|(i, alpha)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_all(cfg.seed, &[1, i as u64]));
            SubjectProfile::draw(subject_id(i), alpha, cfg, &mut rng)
        })
        .collect())
}

/// All frames of one subject: `frames_per_region` per region, regions
/// interleaved in a seeded random order.
pub fn generate_subject(
    profile: &SubjectProfile,
    index: usize,
    cfg: &SynthConfig,
) -> Result<Vec<SynthFrame>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_all(cfg.seed, &[2, index as u64]));
    let mut labels: Vec<GazeRegion> = GazeRegion::ALL
        .iter()
        .flat_map(|&r| std::iter::repeat_n(r, cfg.frames_per_region))
        .collect();
    rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(k, region)| generate_frame(profile, &cfg.targets, region, k as u64, &mut rng))
        .collect()
}

pub fn generate_population(cfg: &SynthConfig) -> Result<Population> {
    use rayon::prelude::*;
    let profiles = generate_profiles(cfg)?;
    let per_subject: Vec<Vec<SynthFrame>> = profiles
        .par_iter()
        .enumerate()
        .map(|(i, p)| generate_subject(p, i, cfg))
        .collect::<Result<_>>()?;
    Ok(Population {
        profiles,
        frames: per_subject.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{normalize_landmarks, normalized_nose_tip};

    #[test]
    fn canonical_face_box() {
        let face = canonical_face();
        let bb = BoundingBox::enclosing(EYES_AND_NOSE.map(|i| face[i])).unwrap();
        assert_eq!((bb.width(), bb.height()), (120.0, 56.0));
    }

    #[test]
    fn owl_moves_only_the_head() {
        let targets = RegionTargets::default();
        let owl = SubjectProfile::ideal("owl", 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let road = generate_frame(&owl, &targets, GazeRegion::Road, 0, &mut rng).unwrap();
        let left = generate_frame(&owl, &targets, GazeRegion::Left, 1, &mut rng).unwrap();
        let tip = |f: &SynthFrame| {
            normalized_nose_tip(
                &normalize_landmarks(f.record.as_ref().unwrap().landmarks()).unwrap(),
            )
        };
        let shift = tip(&left) - tip(&road);
        let g = targets.get(GazeRegion::Left);
        assert!(
            (shift.x - g.x).abs() < 1e-9 && (shift.y - g.y).abs() < 1e-9,
            "{shift:?}"
        );
    }

    #[test]
    fn lizard_keeps_head_still() {
        let targets = RegionTargets::default();
        let lizard = SubjectProfile::ideal("lizard", 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let road = generate_frame(&lizard, &targets, GazeRegion::Road, 0, &mut rng).unwrap();
        let left = generate_frame(&lizard, &targets, GazeRegion::Left, 1, &mut rng).unwrap();
        let head =
            |f: &SynthFrame| normalize_landmarks(f.record.as_ref().unwrap().landmarks()).unwrap();
        for (a, b) in head(&road).iter().zip(head(&left)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_schedule_parse() {
        assert_eq!(
            AlphaSchedule::parse("uniform").unwrap(),
            AlphaSchedule::Uniform
        );
        assert_eq!(
            AlphaSchedule::parse("fixed:0.25").unwrap(),
            AlphaSchedule::Fixed(0.25)
        );
        assert!(AlphaSchedule::parse("fixed:2").is_err());
        assert!(AlphaSchedule::parse("owl").is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            AlphaSchedule::Linspace.alphas(3, &mut rng),
            vec![0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn duplicate_targets_rejected() {
        let p = Point::new(0.0, 0.0);
        assert!(RegionTargets::new([p; NUM_REGIONS]).is_err());
    }
}
