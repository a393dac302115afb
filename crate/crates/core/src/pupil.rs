//! CDF-threshold pupil detection on a tight eye crop.
//!
//! For each candidate parameter triple the crop is masked to the eye
//! polygon, contrast-stretched between its 2nd and 98th intensity
//! percentiles, thresholded (dark pixels become 1), opened, closed, and
//! searched for its largest roughly circular blob. The triple producing the
//! largest such blob wins and its centroid is the pupil center.

use crate::blob::{largest_circular_blob_with, Blob, MIN_ASPECT, MIN_BLOB_AREA};
use crate::error::{Error, Result};
use crate::geometry::{EyePolygon, Point};
use crate::image::{BinaryImage, GrayImage, UnitImage};
use crate::morphology;
use crate::scalar::Scalar;

pub const LOW_PERCENTILE: u32 = 2;
pub const HIGH_PERCENTILE: u32 = 98;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilParams<T> {
    pub cdf_threshold: T,
    pub opening_window: usize,
    pub closing_window: usize,
}

/// Three values for each of the three detector parameters, stored sorted so
/// that triples enumerate in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilGrid<T> {
    thresholds: [T; 3],
    opening: [usize; 3],
    closing: [usize; 3],
}

impl<T: Scalar> PupilGrid<T> {
    pub fn new(
        mut thresholds: [T; 3],
        mut opening: [usize; 3],
        mut closing: [usize; 3],
    ) -> Result<Self> {
        for t in thresholds {
            if !(t > T::zero() && t < T::one()) {
                return Err(Error::config(
                    "pupil_grid",
                    format!("cdf threshold {t} not in (0, 1)"),
                ));
            }
        }
        for w in opening.iter().chain(&closing) {
            if *w == 0 || w % 2 == 0 {
                return Err(Error::config(
                    "pupil_grid",
                    format!("window {w} must be odd and >= 1"),
                ));
            }
        }
        thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
        opening.sort_unstable();
        closing.sort_unstable();
        Ok(PupilGrid {
            thresholds,
            opening,
            closing,
        })
    }

    /// Parses nine comma-separated values: three thresholds, three opening
    /// windows, three closing windows.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 9 {
            return Err(Error::config(
                "pupil_grid",
                format!("expected 9 values, found {}", parts.len()),
            ));
        }
        let real = |v: &str| {
            v.parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::config("pupil_grid", format!("`{v}` is not a number")))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::config("pupil_grid", format!("`{v}` is not a window size")))
        };
        Self::new(
            [real(parts[0])?, real(parts[1])?, real(parts[2])?],
            [int(parts[3])?, int(parts[4])?, int(parts[5])?],
            [int(parts[6])?, int(parts[7])?, int(parts[8])?],
        )
    }

    pub fn thresholds(&self) -> [T; 3] {
        self.thresholds
    }

    pub fn opening(&self) -> [usize; 3] {
        self.opening
    }

    pub fn closing(&self) -> [usize; 3] {
        self.closing
    }

    /// All 27 triples in lexicographic order.
    pub fn triples(&self) -> impl Iterator<Item = PupilParams<T>> + '_ {
        self.thresholds.iter().flat_map(move |&t| {
            self.opening.iter().flat_map(move |&o| {
                self.closing.iter().map(move |&c| PupilParams {
                    cdf_threshold: t,
                    opening_window: o,
                    closing_window: c,
                })
            })
        })
    }
}

impl<T: Scalar> Default for PupilGrid<T> {
    fn default() -> Self {
        PupilGrid::new(
            [T::lit(0.03), T::lit(0.05), T::lit(0.10)],
            [1, 3, 5],
            [1, 3, 5],
        )
        .expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig<T> {
    pub grid: PupilGrid<T>,
    /// An eye whose polygon is shorter than this fraction of its width is
    /// treated as closed.
    pub closed_eye_ratio: T,
    pub min_blob_area: usize,
    pub min_aspect: f64,
    /// Minimum spread `p98 - p2` (in 8-bit levels) of the masked intensities.
    /// Flatter crops contain no dark region and yield `NoBlob`.
    pub min_contrast: u8,
}

impl<T: Scalar> Default for DetectorConfig<T> {
    fn default() -> Self {
        DetectorConfig {
            grid: PupilGrid::default(),
            closed_eye_ratio: T::lit(0.10),
            min_blob_area: MIN_BLOB_AREA,
            min_aspect: MIN_ASPECT,
            min_contrast: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PupilStatus {
    Detected,
    EyeClosed,
    NoBlob,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilResult<T> {
    pub status: PupilStatus,
    /// Present iff `status == Detected`; eye-crop pixel coordinates.
    pub center: Option<Point<T>>,
    pub blob_area: usize,
    pub blob_bbox: (usize, usize),
    pub chosen_params: Option<PupilParams<T>>,
}

impl<T: Scalar> PupilResult<T> {
    fn rejected(status: PupilStatus) -> Self {
        PupilResult {
            status,
            center: None,
            blob_area: 0,
            blob_bbox: (0, 0),
            chosen_params: None,
        }
    }

    pub fn is_detected(&self) -> bool {
        self.status == PupilStatus::Detected
    }
}

/// Pixels whose centers fall inside the polygon.
pub fn polygon_mask<T: Scalar>(polygon: &EyePolygon<T>, width: usize, height: usize) -> Vec<bool> {
    let bb = polygon.bounding_box();
    let mut mask = vec![false; width * height];
    for y in 0..height {
        let py = T::from_count(y);
        if py < bb.min.y || py > bb.max.y {
            continue;
        }
        for x in 0..width {
            let p = Point::new(T::from_count(x), py);
            mask[y * width + x] = bb.contains(p) && polygon.contains(p);
        }
    }
    mask
}

/// Nearest-rank percentile of a 256-bin histogram holding `n > 0` samples:
/// the smallest value whose cumulative count reaches `ceil(percent * n / 100)`.
fn histogram_percentile(hist: &[usize; 256], n: usize, percent: u32) -> u8 {
    let rank = ((percent as usize * n).div_ceil(100)).max(1);
    let mut cumulative = 0;
    for (value, &count) in hist.iter().enumerate() {
        cumulative += count;
        if cumulative >= rank {
            return value as u8;
        }
    }
    255
}

/// Masked 2nd/98th percentiles and the rescaled image.
fn rescale_masked<T: Scalar>(img: &GrayImage, mask: &[bool]) -> Result<(UnitImage<T>, u8, u8)> {
    let mut hist = [0usize; 256];
    let mut n = 0;
    for (&v, &m) in img.data().iter().zip(mask) {
        if m {
            hist[v as usize] += 1;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::DegenerateMask);
    }
    let lo = histogram_percentile(&hist, n, LOW_PERCENTILE);
    let hi = histogram_percentile(&hist, n, HIGH_PERCENTILE);
    if lo == hi {
        return Err(Error::DegenerateIntensity(lo));
    }
    let (lo_t, span) = (T::from_u8(lo).unwrap(), T::from_u8(hi - lo).unwrap());
    let data = img
        .data()
        .iter()
        .zip(mask)
        .map(|(&v, &m)| {
            if m {
                ((T::from_u8(v).unwrap() - lo_t) / span)
                    .max(T::zero())
                    .min(T::one())
            } else {
                T::one()
            }
        })
        .collect();
    Ok((UnitImage::new(img.width(), img.height(), data)?, lo, hi))
}

/// Linear contrast stretch of the pixels inside `polygon`: the 2nd
/// percentile maps to 0, the 98th to 1, and values beyond clamp. Pixels
/// outside the polygon become 1 (bright, never pupil).
pub fn rescale_intensity<T: Scalar>(
    img: &GrayImage,
    polygon: &EyePolygon<T>,
) -> Result<UnitImage<T>> {
    let mask = polygon_mask(polygon, img.width(), img.height());
    rescale_masked(img, &mask).map(|(out, _, _)| out)
}

/// Pixels strictly darker than `threshold` become 1.
pub fn binarize<T: Scalar>(img: &UnitImage<T>, threshold: T) -> BinaryImage {
    let data = img
        .data()
        .iter()
        .map(|&v| u8::from(v < threshold))
        .collect();
    BinaryImage::from_raw(img.width(), img.height(), data).expect("same dimensions")
}

/// True when the polygon's height is below `ratio` of its width.
pub fn is_eye_closed<T: Scalar>(polygon: &EyePolygon<T>, ratio: T) -> bool {
    let bb = polygon.bounding_box();
    bb.height() < ratio * bb.width()
}

/// Exhaustive search over the 27 parameter triples for the largest circular
/// blob. Equal areas keep the lexicographically smallest triple.
pub fn detect_pupil<T: Scalar>(
    crop: &GrayImage,
    polygon: &EyePolygon<T>,
    cfg: &DetectorConfig<T>,
) -> PupilResult<T> {
    if is_eye_closed(polygon, cfg.closed_eye_ratio) {
        return PupilResult::rejected(PupilStatus::EyeClosed);
    }
    let mask = polygon_mask(polygon, crop.width(), crop.height());
    let rescaled = match rescale_masked::<T>(crop, &mask) {
        Ok((img, lo, hi)) if hi - lo >= cfg.min_contrast => img,
        _ => return PupilResult::rejected(PupilStatus::NoBlob),
    };

    let grid = &cfg.grid;
    let mut best: Option<(Blob, PupilParams<T>)> = None;
    for &t in &grid.thresholds {
        let binary = binarize(&rescaled, t);
        for &o in &grid.opening {
            let opened = morphology::open(&binary, o);
            for &c in &grid.closing {
                let closed = morphology::close(&opened, c);
                let Some(blob) =
                    largest_circular_blob_with(&closed, cfg.min_aspect, cfg.min_blob_area)
                else {
                    continue;
                };
                if best.is_none_or(|(b, _)| blob.area > b.area) {
                    let params = PupilParams {
                        cdf_threshold: t,
                        opening_window: o,
                        closing_window: c,
                    };
                    best = Some((blob, params));
                }
            }
        }
    }

    match best {
        Some((blob, params)) => PupilResult {
            status: PupilStatus::Detected,
            center: Some(blob.centroid()),
            blob_area: blob.area,
            blob_bbox: blob.bbox(),
            chosen_params: Some(params),
        },
        None => PupilResult::rejected(PupilStatus::NoBlob),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon(w: f64, h: f64) -> EyePolygon<f64> {
        EyePolygon::from_flat(&[
            0.0,
            h / 2.0,
            w / 4.0,
            0.0,
            3.0 * w / 4.0,
            0.0,
            w,
            h / 2.0,
            3.0 * w / 4.0,
            h,
            w / 4.0,
            h,
        ])
        .unwrap()
    }

    // covers every pixel center
    fn full_rect(w: usize, h: usize) -> EyePolygon<f64> {
        let (w, h) = (w as f64 - 0.5, h as f64 - 0.5);
        EyePolygon::from_flat(&[
            -0.5,
            -0.5,
            w / 2.0,
            -0.5,
            w,
            -0.5,
            w,
            h / 2.0,
            w,
            h,
            -0.5,
            h,
        ])
        .unwrap()
    }

    #[test]
    fn uniform_image_is_degenerate() {
        let img = GrayImage::filled(10, 10, 128).unwrap();
        assert!(matches!(
            rescale_intensity::<f64>(&img, &full_rect(10, 10)),
            Err(Error::DegenerateIntensity(128))
        ));
    }

    #[test]
    fn two_level_image_hits_both_ends() {
        // first quarter of the rows dark
        let img = GrayImage::from_fn(8, 8, |_, y| if y < 2 { 0 } else { 200 }).unwrap();
        let out = rescale_intensity::<f64>(&img, &full_rect(8, 8)).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(out.get(x, y), if y < 2 { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn masked_out_pixels_are_bright() {
        let img = GrayImage::from_fn(20, 10, |x, _| (x * 10) as u8).unwrap();
        let poly = hexagon(19.0, 9.0);
        let out = rescale_intensity::<f64>(&img, &poly).unwrap();
        assert_eq!(out.get(0, 0), 1.0);
        assert_eq!(out.get(19, 9), 1.0);
    }

    #[test]
    fn binarize_examples() {
        let zeros = UnitImage::new(3, 3, vec![0.0; 9]).unwrap();
        assert_eq!(binarize(&zeros, 0.5).count_ones(), 9);
        let ones = UnitImage::new(3, 3, vec![1.0; 9]).unwrap();
        assert_eq!(binarize(&ones, 1.0).count_ones(), 0);
        let checker: Vec<f64> = (0..16)
            .map(|i| if (i % 4 + i / 4) % 2 == 0 { 0.2 } else { 0.8 })
            .collect();
        let b = binarize(&UnitImage::new(4, 4, checker).unwrap(), 0.5);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(b.get(x, y), (x + y) % 2 == 0);
            }
        }
    }

    #[test]
    fn closed_eye_detected() {
        let poly = hexagon(40.0, 3.0);
        let crop = GrayImage::filled(41, 24, 200).unwrap();
        let r = detect_pupil(&crop, &poly, &DetectorConfig::default());
        assert_eq!(r.status, PupilStatus::EyeClosed);
        assert_eq!(r.center, None);
    }

    #[test]
    fn bright_crop_has_no_blob() {
        let crop = GrayImage::filled(40, 24, 230).unwrap();
        let r = detect_pupil(&crop, &full_rect(40, 24), &DetectorConfig::default());
        assert_eq!(r.status, PupilStatus::NoBlob);
    }

    #[test]
    fn grid_parse_and_order() {
        let g = PupilGrid::<f64>::parse("0.1,0.03,0.05,5,1,3,3,1,5").unwrap();
        assert_eq!(g.thresholds(), [0.03, 0.05, 0.1]);
        assert_eq!(g.opening(), [1, 3, 5]);
        let triples: Vec<_> = g.triples().collect();
        assert_eq!(triples.len(), 27);
        assert_eq!(triples[1].closing_window, 3);
        assert!(PupilGrid::<f64>::parse("0.1,0.2,0.3,1,2,3,1,3,5").is_err());
        assert!(PupilGrid::<f64>::parse("0.1,0.2").is_err());
    }
}
