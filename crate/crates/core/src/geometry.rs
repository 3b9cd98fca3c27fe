//! Points and planar distance helpers.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point in world coordinates. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> From<[T; 3]> for Point3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<T: Scalar> From<Point3<T>> for [T; 3] {
    fn from(p: Point3<T>) -> Self {
        [p.x, p.y, p.z]
    }
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Length of the projection of `other - self` onto the horizontal plane.
    pub fn horizontal_distance(&self, other: &Self) -> T {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn cast<U: Scalar>(&self) -> Point3<U> {
        Point3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

/// Minimum distance in the horizontal plane between the projected segment
/// `a -> b` and the point `(cx, cy)`.
pub fn horizontal_segment_distance<T: Scalar>(a: &Point3<T>, b: &Point3<T>, cx: T, cy: T) -> T {
    let (ux, uy) = (b.x - a.x, b.y - a.y);
    let (wx, wy) = (cx - a.x, cy - a.y);
    let len2 = ux * ux + uy * uy;
    if len2 <= T::zero() {
        return wx.hypot(wy);
    }
    let t = (wx * ux + wy * uy) / len2;
    if t <= T::zero() {
        return wx.hypot(wy);
    }
    if t >= T::one() {
        return (cx - b.x).hypot(cy - b.y);
    }
    (cx - (a.x + t * ux)).hypot(cy - (a.y + t * uy))
}
