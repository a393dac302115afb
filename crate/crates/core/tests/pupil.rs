use gazekit::geometry::{EyePolygon, Point};
use gazekit::pupil::{binarize, detect_pupil, rescale_intensity, DetectorConfig, PupilStatus};
use gazekit::{Error, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

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

fn eye_hexagon(w: f64, h: f64) -> EyePolygon<f64> {
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

/// Nearest-rank percentile: the element at 1-based rank ceil(p n / 100) of
/// the sorted list.
fn nearest_rank(sorted: &[u8], p: usize) -> u8 {
    let rank = (p * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

#[test]
fn ramp_matches_sorted_percentiles() {
    let img = GrayImage::from_fn(10, 10, |x, y| (y * 10 + x) as u8).unwrap();
    let mut sorted = img.data().to_vec();
    sorted.sort_unstable();
    let (lo, hi) = (
        nearest_rank(&sorted, 2) as f64,
        nearest_rank(&sorted, 98) as f64,
    );
    assert_eq!((lo, hi), (1.0, 97.0));
    let out = rescale_intensity::<f64>(&img, &full_rect(10, 10)).unwrap();
    for y in 0..10 {
        for x in 0..10 {
            let v = (y * 10 + x) as f64;
            let expected = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            assert!((out.get(x, y) - expected).abs() < 1e-12, "({x}, {y})");
        }
    }
}

#[test]
fn random_images_match_sorted_percentiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let (w, h) = (rng.random_range(3..30), rng.random_range(3..30));
        let data: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let img = GrayImage::new(w, h, data.clone()).unwrap();
        let mut sorted = data;
        sorted.sort_unstable();
        let (lo, hi) = (
            nearest_rank(&sorted, 2) as f64,
            nearest_rank(&sorted, 98) as f64,
        );
        let out = rescale_intensity::<f64>(&img, &full_rect(w, h)).unwrap();
        for y in 0..h {
            for x in 0..w {
                let expected = ((img.get(x, y) as f64 - lo) / (hi - lo)).clamp(0.0, 1.0);
                assert!((out.get(x, y) - expected).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn uniform_and_two_level_images() {
    let flat = GrayImage::filled(6, 6, 128).unwrap();
    assert!(matches!(
        rescale_intensity::<f64>(&flat, &full_rect(6, 6)),
        Err(Error::DegenerateIntensity(128))
    ));
    let img = GrayImage::from_fn(4, 4, |x, _| if x == 0 { 0 } else { 200 }).unwrap();
    let out = rescale_intensity::<f64>(&img, &full_rect(4, 4)).unwrap();
    for y in 0..4 {
        assert_eq!(out.get(0, y), 0.0);
        for x in 1..4 {
            assert_eq!(out.get(x, y), 1.0);
        }
    }
}

#[test]
fn binarize_is_strict() {
    let img = GrayImage::from_fn(4, 4, |x, y| if (x + y) % 2 == 0 { 40 } else { 160 }).unwrap();
    let unit = rescale_intensity::<f64>(&img, &full_rect(4, 4)).unwrap();
    let b = binarize(&unit, 0.5);
    for y in 0..4 {
        for x in 0..4 {
            assert_eq!(b.get(x, y), (x + y) % 2 == 0);
        }
    }
    assert_eq!(binarize(&unit, 0.0).count_ones(), 0);
}

/// Bright crop, one dark disk, additive Gaussian noise.
fn disk_crop(center: Point<f64>, r: f64, sigma: f64, rng: &mut ChaCha8Rng) -> GrayImage {
    let noise = Normal::new(0.0, sigma.max(1e-9)).unwrap();
    let mut data = Vec::with_capacity(40 * 24);
    for y in 0..24 {
        for x in 0..40 {
            let d = Point::new(x as f64, y as f64).distance(center);
            let base = if d <= r { 30.0 } else { 210.0 };
            data.push((base + noise.sample(rng)).round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(40, 24, data).unwrap()
}

#[test]
fn dark_disk_is_found() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let crop = disk_crop(Point::new(20.0, 12.0), 5.0, 6.0, &mut rng);
    let r = detect_pupil(&crop, &eye_hexagon(39.0, 23.0), &DetectorConfig::default());
    assert_eq!(r.status, PupilStatus::Detected);
    let c = r.center.unwrap();
    assert!(c.distance(Point::new(20.0, 12.0)) <= 2.0, "{c:?}");
}

#[test]
fn random_disks_are_localized() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let poly = eye_hexagon(39.0, 23.0);
    for _ in 0..60 {
        let radius = rng.random_range(3.0..8.0);
        let center = Point::new(rng.random_range(14.0..26.0), rng.random_range(9.0..15.0));
        let sigma = rng.random_range(0.0..15.0);
        let crop = disk_crop(center, radius, sigma, &mut rng);
        let r = detect_pupil(&crop, &poly, &DetectorConfig::default());
        let c = r.center.expect("detected");
        assert!(
            c.distance(center) <= 2.0,
            "r={radius} sigma={sigma} {center:?} -> {c:?}"
        );
    }
}

#[test]
fn closed_and_empty_eyes() {
    let crop = GrayImage::filled(41, 24, 200).unwrap();
    let r = detect_pupil(&crop, &eye_hexagon(40.0, 3.0), &DetectorConfig::default());
    assert_eq!((r.status, r.center), (PupilStatus::EyeClosed, None));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sigma in [0.0f64, 4.0, 10.0] {
        let noise = Normal::new(0.0, sigma.max(1e-9)).unwrap();
        let data =
            (0..40 * 24).map(|_| (220.0 + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8);
        let crop = GrayImage::new(40, 24, data.collect()).unwrap();
        let r = detect_pupil(&crop, &eye_hexagon(39.0, 23.0), &DetectorConfig::default());
        assert_eq!(r.status, PupilStatus::NoBlob, "sigma {sigma}");
    }
}
