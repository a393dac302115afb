//! 8-connected component analysis on binary images.

use crate::geometry::Point;
use crate::image::BinaryImage;
use crate::scalar::Scalar;

/// Minimum blob area accepted as a pupil.
pub const MIN_BLOB_AREA: usize = 5;
/// Minimum `min(w, h) / max(w, h)` of a blob's bounding box.
pub const MIN_ASPECT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blob {
    pub area: usize,
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
    sum_x: u64,
    sum_y: u64,
}

impl Blob {
    /// Bounding box `(width, height)` in pixels.
    pub fn bbox(&self) -> (usize, usize) {
        (self.max_x - self.min_x + 1, self.max_y - self.min_y + 1)
    }

    pub fn aspect(&self) -> f64 {
        let (w, h) = self.bbox();
        w.min(h) as f64 / w.max(h) as f64
    }

    pub fn is_circular(&self, min_aspect: f64) -> bool {
        self.aspect() >= min_aspect
    }

    /// Mean of member pixel coordinates.
    pub fn centroid<T: Scalar>(&self) -> Point<T> {
        let n = self.area as f64;
        Point::new(T::lit(self.sum_x as f64 / n), T::lit(self.sum_y as f64 / n))
    }
}

/// All 8-connected components of set pixels, in raster order of their first
/// pixel.
pub fn connected_components(img: &BinaryImage) -> Vec<Blob> {
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let mut seen = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if data[start] == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut blob = Blob {
            area: 0,
            min_x: usize::MAX,
            min_y: usize::MAX,
            max_x: 0,
            max_y: 0,
            sum_x: 0,
            sum_y: 0,
        };
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            blob.area += 1;
            blob.min_x = blob.min_x.min(x);
            blob.min_y = blob.min_y.min(y);
            blob.max_x = blob.max_x.max(x);
            blob.max_y = blob.max_y.max(y);
            blob.sum_x += x as u64;
            blob.sum_y += y as u64;
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if data[n] != 0 && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        blobs.push(blob);
    }
    blobs
}

/// Largest component passing the circularity test, provided its area is at
/// least `min_area`. Equal areas resolve to the component found first in
/// raster order.
pub fn largest_circular_blob_with(
    img: &BinaryImage,
    min_aspect: f64,
    min_area: usize,
) -> Option<Blob> {
    let mut best: Option<Blob> = None;
    for blob in connected_components(img) {
        if blob.is_circular(min_aspect) && best.is_none_or(|b| blob.area > b.area) {
            best = Some(blob);
        }
    }
    best.filter(|b| b.area >= min_area)
}

pub fn largest_circular_blob(img: &BinaryImage) -> Option<Blob> {
    largest_circular_blob_with(img, MIN_ASPECT, MIN_BLOB_AREA)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(img: &mut BinaryImage, x0: usize, y0: usize, w: usize, h: usize) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                img.set(x, y, true);
            }
        }
    }

    #[test]
    fn filled_square() {
        let mut img = BinaryImage::zeros(12, 12);
        rect(&mut img, 3, 4, 5, 5);
        let b = largest_circular_blob(&img).unwrap();
        assert_eq!(b.area, 25);
        assert_eq!(b.bbox(), (5, 5));
        assert_eq!(b.centroid::<f64>(), Point::new(5.0, 6.0));
    }

    #[test]
    fn bar_loses_to_square() {
        let mut img = BinaryImage::zeros(30, 12);
        rect(&mut img, 1, 1, 20, 2);
        rect(&mut img, 20, 4, 6, 6);
        let b = largest_circular_blob(&img).unwrap();
        assert_eq!(b.area, 36);
        assert_eq!(b.bbox(), (6, 6));
    }

    #[test]
    fn diagonal_pixels_connect() {
        let img = BinaryImage::from_fn(4, 4, |x, y| x == y);
        let comps = connected_components(&img);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].area, 4);
    }

    #[test]
    fn small_blob_rejected() {
        let mut img = BinaryImage::zeros(8, 8);
        rect(&mut img, 2, 2, 2, 2);
        assert_eq!(largest_circular_blob(&img), None);
        assert_eq!(largest_circular_blob(&BinaryImage::zeros(3, 3)), None);
    }
}
