//! Shared helpers for the integration suites.

/// Area of the set of circle centers whose circle of radius `r` meets
/// the unit square.
///
/// A circle around `z` meets the square exactly when the nearest point
/// sits within `r` and the farthest within reach, so the area is the
/// Minkowski sausage of the square minus the region whose circle
/// swallows the square whole.  The sausage of a unit square is
/// `1 + 4r + pi r^2`; the swallowed region is the intersection of the
/// four corner disks, integrated in closed form.  Valid for
/// `r > sqrt(2)`.
pub fn unit_square_circle_area(r: f64) -> f64 {
    let antider = |s: f64| (s * (r * r - s * s).sqrt() + r * r * (s / r).asin()) / 2.0;
    let b = (r * r - 0.25).sqrt();
    let lens = 4.0 * (antider(b) - antider(0.5) - 0.5 * (b - 0.5));
    1.0 + 4.0 * r + std::f64::consts::PI * r * r - lens
}
