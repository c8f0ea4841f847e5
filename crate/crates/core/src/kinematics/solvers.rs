//! Closed-form geometric subproblems used by the forward kinematics.

use nalgebra::{Point2, Point3};

use crate::error::{Error, Result};
use crate::model::normalize_angle;

/// Absolute tolerance for tangency and degeneracy decisions.
pub const TANGENCY_TOL: f64 = 1e-12;

/// Intersection points of three spheres. Returns 0, 1 (tangent) or 2 points.
pub fn trilaterate(centers: [Point3<f64>; 3], radii: [f64; 3]) -> Result<Vec<Point3<f64>>> {
    let [c1, c2, c3] = centers;
    let [r1, r2, r3] = radii;

    let d12 = c2 - c1;
    let d = d12.norm();
    if d <= TANGENCY_TOL {
        return Err(Error::CollinearCenters);
    }
    let ex = d12 / d;
    let t = c3 - c1;
    let i = ex.dot(&t);
    let perp = t - ex * i;
    let j = perp.norm();
    if j <= TANGENCY_TOL {
        return Err(Error::CollinearCenters);
    }
    let ey = perp / j;
    let ez = ex.cross(&ey);

    let x = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let y = (r1 * r1 - r3 * r3 + i * i + j * j) / (2.0 * j) - i * x / j;
    let z2 = r1 * r1 - x * x - y * y;

    let base = c1 + ex * x + ey * y;
    if z2.abs() <= TANGENCY_TOL {
        return Ok(vec![base]);
    }
    if z2 < 0.0 {
        return Ok(Vec::new());
    }
    let z = z2.sqrt();
    Ok(vec![base + ez * z, base - ez * z])
}

/// Intersection points of two circles in the plane.
pub fn intersect_circles(c1: Point2<f64>, r1: f64, c2: Point2<f64>, r2: f64) -> Result<Vec<Point2<f64>>> {
    let delta = c2 - c1;
    let d = delta.norm();
    if d <= TANGENCY_TOL {
        return Err(Error::ConcentricCircles);
    }
    let u = delta / d;
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let foot = c1 + u * a;

    if (d - (r1 + r2)).abs() <= TANGENCY_TOL || (d - (r1 - r2).abs()).abs() <= TANGENCY_TOL {
        return Ok(vec![foot]);
    }
    if d > r1 + r2 || d < (r1 - r2).abs() {
        return Ok(Vec::new());
    }
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let n = nalgebra::Vector2::new(-u.y, u.x);
    Ok(vec![foot + n * h, foot - n * h])
}

/// Angles in (-pi, pi] with `a·cos α + b·sin α = d`.
pub fn solve_linear_trig(a: f64, b: f64, d: f64) -> Result<Vec<f64>> {
    let amp = a.hypot(b);
    if amp <= TANGENCY_TOL {
        return if d.abs() <= TANGENCY_TOL {
            Err(Error::IndeterminateAngle)
        } else {
            Err(Error::Degenerate)
        };
    }
    let base = b.atan2(a);
    if (d.abs() - amp).abs() <= TANGENCY_TOL {
        let root = if d > 0.0 { base } else { base + std::f64::consts::PI };
        return Ok(vec![normalize_angle(root)]);
    }
    if d.abs() > amp {
        return Ok(Vec::new());
    }
    let phi = (d / amp).acos();
    Ok(vec![normalize_angle(base + phi), normalize_angle(base - phi)])
}
