//! Points, boxes, the 68-point landmark set and the 6-point eye polygon.
//!
//! All coordinates are image pixels with the origin at the top-left corner,
//! x growing to the right and y growing downwards.

use std::ops::{Add, Range, RangeInclusive, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const LANDMARK_COUNT: usize = 68;
/// Nose tip under the 68-point Multi-PIE ordering.
pub const NOSE_TIP: usize = 30;
/// Nose and both eyes; the bounding box of these landmarks is the
/// normalizing region for head features.
pub const EYES_AND_NOSE: RangeInclusive<usize> = 27..=47;
pub const JAWLINE: Range<usize> = 0..17;
pub const EYEBROWS: Range<usize> = 17..27;
pub const NOSE: Range<usize> = 27..36;
pub const RIGHT_EYE: Range<usize> = 36..42;
pub const LEFT_EYE: Range<usize> = 42..48;
pub const MOUTH: Range<usize> = 48..68;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    #[inline]
    pub fn scale(self, k: T) -> Self {
        Point::new(self.x * k, self.y * k)
    }

    pub fn cast<U: Scalar>(self) -> Point<U> {
        Point::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Point<T>;
    fn add(self, rhs: Self) -> Self {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Point<T>;
    fn sub(self, rhs: Self) -> Self {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> BoundingBox<T> {
    /// Returns `None` for an empty iterator.
    pub fn enclosing<I: IntoIterator<Item = Point<T>>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    #[inline]
    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    #[inline]
    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Maps the box onto the unit square. Points outside the box map outside
    /// `[0, 1]²`.
    pub fn to_unit(&self, p: Point<T>) -> Point<T> {
        Point::new(
            (p.x - self.min.x) / self.width(),
            (p.y - self.min.y) / self.height(),
        )
    }
}

/// Exactly 68 finite facial landmarks in Multi-PIE order.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks<T> {
    points: Vec<Point<T>>,
}

impl<T: Scalar> Landmarks<T> {
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::InvalidLandmarks(format!(
                "expected {LANDMARK_COUNT} points, found {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidLandmarks(format!("point {i} is not finite")));
        }
        Ok(Landmarks { points })
    }

    /// Builds from `[x0, y0, x1, y1, ...]`.
    pub fn from_flat(coords: &[T]) -> Result<Self> {
        if coords.len() != 2 * LANDMARK_COUNT {
            return Err(Error::InvalidLandmarks(format!(
                "expected {} coordinates, found {}",
                2 * LANDMARK_COUNT,
                coords.len()
            )));
        }
        Self::new(
            coords
                .chunks_exact(2)
                .map(|c| Point::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    #[inline]
    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    #[inline]
    pub fn get(&self, index: usize) -> Point<T> {
        self.points[index]
    }

    pub fn nose_tip(&self) -> Point<T> {
        self.points[NOSE_TIP]
    }

    /// Applies `f` to every point, revalidating the result.
    pub fn map(&self, f: impl Fn(Point<T>) -> Point<T>) -> Result<Self> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

/// Which of the two eye landmark groups is cropped as "the right eye".
///
/// Whether the image-side group corresponds to the driver's anatomical right
/// eye depends on camera mirroring; the dataset producer decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EyeSide {
    /// Landmarks 36–41.
    #[default]
    Right,
    /// Landmarks 42–47.
    Left,
}

impl EyeSide {
    pub fn landmark_range(self) -> Range<usize> {
        match self {
            EyeSide::Right => RIGHT_EYE,
            EyeSide::Left => LEFT_EYE,
        }
    }
}

/// Six eye landmarks. Point 0 is the outer corner and point 3 the inner
/// corner; 1–2 run along the upper lid and 4–5 along the lower lid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyePolygon<T> {
    points: [Point<T>; 6],
}

impl<T: Scalar> EyePolygon<T> {
    pub fn new(points: [Point<T>; 6]) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("point {i} is not finite")));
        }
        Ok(EyePolygon { points })
    }

    pub fn from_flat(coords: &[T]) -> Result<Self> {
        if coords.len() != 12 {
            return Err(Error::InvalidPolygon(format!(
                "expected 12 coordinates, found {}",
                coords.len()
            )));
        }
        let mut pts = [Point::new(T::zero(), T::zero()); 6];
        for (p, c) in pts.iter_mut().zip(coords.chunks_exact(2)) {
            *p = Point::new(c[0], c[1]);
        }
        Self::new(pts)
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    #[inline]
    pub fn points(&self) -> &[Point<T>; 6] {
        &self.points
    }

    #[inline]
    pub fn outer_corner(&self) -> Point<T> {
        self.points[0]
    }

    #[inline]
    pub fn inner_corner(&self) -> Point<T> {
        self.points[3]
    }

    pub fn bounding_box(&self) -> BoundingBox<T> {
        BoundingBox::enclosing(self.points.iter().copied()).expect("six points")
    }

    pub fn map(&self, f: impl Fn(Point<T>) -> Point<T>) -> Self {
        EyePolygon {
            points: self.points.map(f),
        }
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Point<T>) -> bool {
        let mut inside = false;
        let n = self.points.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}
