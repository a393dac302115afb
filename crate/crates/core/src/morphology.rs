//! Binary erosion, dilation, opening and closing with a square structuring
//! element of odd side `w`. Pixels outside the image count as background, so
//! erosion clears a border of width `w / 2`.
//!
//! Square elements are separable: a row pass followed by a column pass.
//! Images up to 64 pixels wide are processed as one bit mask per row;
//! wider ones use a sliding-window count per line.

use crate::image::BinaryImage;

#[derive(Clone, Copy)]
enum Op {
    Erode,
    Dilate,
}

fn check_window(w: usize) {
    assert!(
        w >= 1 && w % 2 == 1,
        "structuring element side must be odd and >= 1, got {w}"
    );
}

/// One separable pass over lines of length `len`, spaced `stride` apart
/// along the line and `step` apart between lines.
fn pass(
    src: &[u8],
    dst: &mut [u8],
    lines: usize,
    len: usize,
    step: usize,
    stride: usize,
    w: usize,
    op: Op,
) {
    let r = w / 2;
    for line in 0..lines {
        let base = line * step;
        let at = |i: usize| src[base + i * stride] as usize;
        // count of ones in the window [i - r, i + r] clipped to the line
        let mut count: usize = (0..=r.min(len - 1)).map(at).sum();
        for i in 0..len {
            let out = match op {
                // out-of-bounds positions are zeros, so the window must be
                // fully inside the line and all ones
                Op::Erode => i >= r && i + r < len && count == w,
                Op::Dilate => count > 0,
            };
            dst[base + i * stride] = u8::from(out);
            if i + r + 1 < len {
                count += at(i + r + 1);
            }
            if i >= r {
                count -= at(i - r);
            }
        }
    }
}

fn apply_packed(img: &BinaryImage, w: usize, op: Op) -> BinaryImage {
    let (width, height) = (img.width(), img.height());
    let r = w / 2;
    let full = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    // bit x of rows[y] is pixel (x, y)
    let rows: Vec<u64> = img
        .data()
        .chunks(width.max(1))
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u64, |m, (x, &v)| m | u64::from(v != 0) << x)
        })
        .collect();
    let shifted = |m: u64, k: usize, up: bool| {
        if k >= 64 {
            0
        } else if up {
            (m << k) & full
        } else {
            m >> k
        }
    };
    let horizontal: Vec<u64> = rows
        .iter()
        .map(|&m| {
            (1..=r).fold(m, |acc, k| {
                let (a, b) = (shifted(m, k, true), shifted(m, k, false));
                match op {
                    Op::Erode => acc & a & b,
                    Op::Dilate => acc | a | b,
                }
            })
        })
        .collect();
    let mut out = BinaryImage::zeros(width, height);
    for y in 0..height {
        let m = match op {
            Op::Erode if y < r || y + r >= height => 0,
            Op::Erode => horizontal[y - r..=y + r].iter().fold(full, |a, &b| a & b),
            Op::Dilate => horizontal[y.saturating_sub(r)..(y + r + 1).min(height)]
                .iter()
                .fold(0, |a, &b| a | b),
        };
        for (x, v) in out.data_mut()[y * width..(y + 1) * width]
            .iter_mut()
            .enumerate()
        {
            *v = (m >> x & 1) as u8;
        }
    }
    out
}

fn apply(img: &BinaryImage, w: usize, op: Op) -> BinaryImage {
    check_window(w);
    if w == 1 {
        return img.clone();
    }
    if img.width() <= 64 {
        apply_packed(img, w, op)
    } else {
        apply_counting(img, w, op)
    }
}

fn apply_counting(img: &BinaryImage, w: usize, op: Op) -> BinaryImage {
    let (width, height) = (img.width(), img.height());
    let mut tmp = BinaryImage::zeros(width, height);
    pass(img.data(), tmp.data_mut(), height, width, width, 1, w, op);
    let mut out = BinaryImage::zeros(width, height);
    pass(tmp.data(), out.data_mut(), width, height, 1, width, w, op);
    out
}

pub fn erode(img: &BinaryImage, w: usize) -> BinaryImage {
    apply(img, w, Op::Erode)
}

pub fn dilate(img: &BinaryImage, w: usize) -> BinaryImage {
    apply(img, w, Op::Dilate)
}

/// Erosion followed by dilation.
pub fn open(img: &BinaryImage, w: usize) -> BinaryImage {
    dilate(&erode(img, w), w)
}

/// Dilation followed by erosion.
pub fn close(img: &BinaryImage, w: usize) -> BinaryImage {
    erode(&dilate(img, w), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_pixel() -> BinaryImage {
        let mut img = BinaryImage::zeros(7, 7);
        img.set(3, 3, true);
        img
    }

    #[test]
    fn window_one_is_identity() {
        let img = BinaryImage::from_fn(5, 4, |x, y| (x * 3 + y) % 4 == 0);
        assert_eq!(open(&img, 1), img);
        assert_eq!(close(&img, 1), img);
    }

    #[test]
    fn opening_removes_isolated_pixel() {
        assert_eq!(open(&single_pixel(), 3).count_ones(), 0);
    }

    #[test]
    fn dilation_grows_square() {
        let d = dilate(&single_pixel(), 3);
        assert_eq!(d.count_ones(), 9);
        assert!(d.get(2, 2) && d.get(4, 4) && !d.get(1, 3));
    }

    #[test]
    fn erosion_clears_border() {
        let full = BinaryImage::from_fn(6, 5, |_, _| true);
        let e = erode(&full, 3);
        assert_eq!(e.count_ones(), 4 * 3);
        assert!(!e.get(0, 2) && e.get(1, 1));
    }

    #[test]
    fn closing_fills_single_hole() {
        let mut img = BinaryImage::from_fn(9, 9, |x, y| (2..7).contains(&x) && (2..7).contains(&y));
        img.set(4, 4, false);
        let c = close(&img, 3);
        assert!(c.get(4, 4));
        assert_eq!(c.count_ones(), 25);
    }

    #[test]
    fn packed_and_counting_paths_agree() {
        for (k, &(width, height)) in [(1, 1), (5, 3), (40, 24), (64, 9), (63, 2), (2, 17)]
            .iter()
            .enumerate()
        {
            let img = BinaryImage::from_fn(width, height, |x, y| (x * 7 + y * 13 + k * 5) % 5 < 3);
            for w in [3, 5, 7, 131] {
                for op in [Op::Erode, Op::Dilate] {
                    assert_eq!(
                        apply_packed(&img, w, op),
                        apply_counting(&img, w, op),
                        "{width}x{height} w={w}"
                    );
                }
            }
        }
    }

    #[test]
    #[should_panic]
    fn even_window_panics() {
        erode(&single_pixel(), 2);
    }
}
