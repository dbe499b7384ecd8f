//! Small 3-vector and polygon/polyhedron geometry primitives.
//!
//! All meshes are embedded in `R^3`; planar (2D) meshes live in the `z = 0`
//! plane and use segment "faces" whose normals lie in-plane. Faces of 3D
//! cells may be non-planar (distorted hexahedra/prisms); their area vector is
//! the sum of the *signed* area vectors of the fan triangulation about the
//! vertex centroid, which keeps the discrete Gauss identity
//! `Σ_σ |σ| n_{K,σ} = 0` exact up to round-off for any closed cell.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A 3-component vector of `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction; zero vector is returned unchanged.
    #[inline]
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    /// Component access by axis index (0 = x, 1 = y, 2 = z).
    #[inline]
    pub fn comp(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Signed area vector of the triangle `(a, b, c)`: `0.5 (b−a)×(c−a)`.
#[inline]
pub fn triangle_area_vector(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    (b - a).cross(c - a) * 0.5
}

/// Area vector and area-weighted centroid of a (possibly non-planar) polygon,
/// triangulated as a fan about the vertex centroid.
///
/// The area vector is the sum of signed triangle area vectors, so for a
/// closed surface the vectors of all faces sum to zero exactly (up to
/// round-off). The scalar area reported elsewhere is the *norm* of this sum.
/// The centroid weights each fan triangle by its unsigned area; for planar
/// polygons this is the exact area centroid.
pub fn polygon_area_centroid(pts: &[Vec3]) -> (Vec3, Vec3) {
    let n = pts.len();
    debug_assert!(n >= 3);
    let mut m = Vec3::ZERO;
    for &p in pts {
        m += p;
    }
    m = m / n as f64;
    let mut area_vec = Vec3::ZERO;
    let mut w_sum = 0.0;
    let mut c_sum = Vec3::ZERO;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let t = triangle_area_vector(m, a, b);
        area_vec += t;
        let w = t.norm();
        w_sum += w;
        c_sum += (m + a + b) * (w / 3.0);
    }
    let centroid = if w_sum > 0.0 { c_sum / w_sum } else { m };
    (area_vec, centroid)
}

/// Runs `f` over the fan triangles of a polygon about its vertex centroid,
/// in the polygon's orientation. This is the triangulation used consistently
/// for areas, volumes and half-space clipping, so all derived quantities
/// agree on the same geometric boundary.
pub fn for_each_fan_triangle(pts: &[Vec3], mut f: impl FnMut(Vec3, Vec3, Vec3)) {
    let n = pts.len();
    let mut m = Vec3::ZERO;
    for &p in pts {
        m += p;
    }
    m = m / n as f64;
    for i in 0..n {
        f(m, pts[i], pts[(i + 1) % n]);
    }
}

/// Accumulator for polyhedron volume and centroid via the divergence theorem
/// over an oriented triangulated boundary. Triangles must be oriented
/// outward. Internally shifts by a reference point to limit cancellation.
pub struct VolumeAccumulator {
    origin: Vec3,
    vol6: f64,
    c_sum: Vec3,
}

impl VolumeAccumulator {
    pub fn new(origin: Vec3) -> Self {
        VolumeAccumulator { origin, vol6: 0.0, c_sum: Vec3::ZERO }
    }

    /// Adds the signed tetrahedron (origin, a, b, c).
    #[inline]
    pub fn add_triangle(&mut self, a: Vec3, b: Vec3, c: Vec3) {
        let pa = a - self.origin;
        let pb = b - self.origin;
        let pc = c - self.origin;
        let v6 = pa.dot(pb.cross(pc));
        self.vol6 += v6;
        self.c_sum += (pa + pb + pc) * (v6 * 0.25);
    }

    /// Signed volume and centroid of the accumulated solid.
    pub fn finish(self) -> (f64, Vec3) {
        let vol = self.vol6 / 6.0;
        let centroid = if self.vol6 != 0.0 {
            self.origin + self.c_sum / self.vol6
        } else {
            self.origin
        };
        (vol, centroid)
    }
}

/// Signed area and centroid of a planar polygon in the z = 0 plane with the
/// shoelace formula (positive for counterclockwise orientation).
pub fn polygon_area_centroid_2d(pts: &[Vec3]) -> (f64, Vec3) {
    let n = pts.len();
    debug_assert!(n >= 3);
    let o = pts[0];
    let mut a2 = 0.0;
    let mut c_sum = Vec3::ZERO;
    for i in 1..n - 1 {
        let p = pts[i] - o;
        let q = pts[i + 1] - o;
        let cr = p.x * q.y - p.y * q.x;
        a2 += cr;
        c_sum += (p + q) * (cr / 3.0);
    }
    let area = 0.5 * a2;
    let centroid = if a2 != 0.0 { o + c_sum / a2 } else { o };
    (area, centroid)
}

/// `∫ min(x − x0, 0) n_x dS` over one oriented flat triangle: the triangle's
/// contribution to the volume of a solid's portion in the half-space
/// `x < x0` (divergence theorem applied to the field `(min(x−x0,0), 0, 0)`).
pub fn triangle_flux_below_x(a: Vec3, b: Vec3, c: Vec3, x0: f64) -> f64 {
    let mut kept = [Vec3::ZERO; 4];
    let nk = clip_below_x(&[a, b, c], x0, &mut kept);
    if nk < 3 {
        return 0.0;
    }
    // Integrate the linear function (x − x0) over the clipped planar polygon:
    // fan from kept[0]; per sub-triangle, area-vector x-component times the
    // value at its centroid.
    let mut acc = 0.0;
    for i in 1..nk - 1 {
        let t = triangle_area_vector(kept[0], kept[i], kept[i + 1]);
        let cx = (kept[0].x + kept[i].x + kept[i + 1].x) / 3.0;
        acc += t.x * (cx - x0);
    }
    acc
}

/// `∫ min(x − x0, 0) n_x ds` over one oriented segment of a counterclockwise
/// 2D polygon (outward normal (dy, −dx)): the 2D analog of
/// [`triangle_flux_below_x`]; summing over all edges yields the polygon area
/// in `x < x0`.
pub fn segment_flux_below_x(a: Vec3, b: Vec3, x0: f64) -> f64 {
    let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
    if lo.x >= x0 {
        return 0.0;
    }
    // Portion of the segment with x < x0, preserving orientation a → b.
    let (ka, kb) = if hi.x <= x0 {
        (a, b)
    } else {
        let t = (x0 - lo.x) / (hi.x - lo.x);
        let cut = lo + (hi - lo) * t;
        if a.x <= b.x {
            (a, cut)
        } else {
            (cut, b)
        }
    };
    // n ds = (dy, −dx) over the kept piece; integrand value at its midpoint.
    let dy = kb.y - ka.y;
    dy * (0.5 * (ka.x + kb.x) - x0)
}

/// Clips a convex polygon against the half-space `x < x0` (Sutherland–
/// Hodgman, one plane). Returns the vertex count written into `out`.
fn clip_below_x(pts: &[Vec3], x0: f64, out: &mut [Vec3]) -> usize {
    let n = pts.len();
    let mut k = 0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let ina = a.x < x0;
        let inb = b.x < x0;
        if ina {
            out[k] = a;
            k += 1;
        }
        if ina != inb {
            let t = (x0 - a.x) / (b.x - a.x);
            out[k] = a + (b - a) * t;
            k += 1;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_area_vector_unit() {
        let a = triangle_area_vector(
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        );
        assert_relative_eq!(a.z, 0.5);
        assert_eq!((a.x, a.y), (0.0, 0.0));
    }

    #[test]
    fn polygon_area_centroid_square() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 2.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        let (a, c) = polygon_area_centroid(&pts);
        assert_relative_eq!(a.norm(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(c.x, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.y, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn nonplanar_quad_area_vectors_close_a_cube() {
        // Perturb one vertex of a unit cube; the fan-triangulated face area
        // vectors must still sum to zero over the closed surface.
        let mut v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        ];
        v[6] += Vec3::new(0.2, -0.1, 0.15);
        let faces: [[usize; 4]; 6] = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [1, 2, 6, 5],
            [2, 3, 7, 6],
            [3, 0, 4, 7],
        ];
        let mut sum = Vec3::ZERO;
        for f in &faces {
            let pts: Vec<Vec3> = f.iter().map(|&i| v[i]).collect();
            sum += polygon_area_centroid(&pts).0;
        }
        assert!(sum.norm() < 1e-14);
    }

    #[test]
    fn volume_accumulator_unit_cube() {
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        ];
        let faces: [[usize; 4]; 6] = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [1, 2, 6, 5],
            [2, 3, 7, 6],
            [3, 0, 4, 7],
        ];
        let mut acc = VolumeAccumulator::new(Vec3::new(0.3, 0.4, 0.5));
        for f in &faces {
            let pts: Vec<Vec3> = f.iter().map(|&i| v[i]).collect();
            for_each_fan_triangle(&pts, |a, b, c| acc.add_triangle(a, b, c));
        }
        let (vol, c) = acc.finish();
        assert_relative_eq!(vol, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.x, 0.5, max_relative = 1e-13);
        assert_relative_eq!(c.y, 0.5, max_relative = 1e-13);
        assert_relative_eq!(c.z, 0.5, max_relative = 1e-13);
    }

    #[test]
    fn clipped_volume_of_cube_fraction() {
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        ];
        let faces: [[usize; 4]; 6] = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [1, 2, 6, 5],
            [2, 3, 7, 6],
            [3, 0, 4, 7],
        ];
        let mut below = 0.0;
        for f in &faces {
            let pts: Vec<Vec3> = f.iter().map(|&i| v[i]).collect();
            for_each_fan_triangle(&pts, |a, b, c| {
                below += triangle_flux_below_x(a, b, c, 0.3);
            });
        }
        assert_relative_eq!(below, 0.3, max_relative = 1e-13);
    }

    #[test]
    fn clipped_area_of_ccw_triangle() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        let mut below = 0.0;
        for i in 0..3 {
            below += segment_flux_below_x(pts[i], pts[(i + 1) % 3], 1.0);
        }
        // Full area 2, region x >= 1 is a right triangle of area 0.5.
        assert_relative_eq!(below, 1.5, max_relative = 1e-13);
    }
}
