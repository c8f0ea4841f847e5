//! Inverse kinematics by leg-wise quadratics and forward kinematics by
//! sphere/circle intersection plus a linear trigonometric solve.

mod solvers;

pub use solvers::{intersect_circles, solve_linear_trig, trilaterate, TANGENCY_TOL};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Point2, Point3};

use crate::error::{Error, Result};
use crate::model::{ConstraintSystem, Coord, JointInput, LegConstraint, OperationMode, Pose, Term};

/// Every forward-kinematics solution satisfies all three constraints to this level.
pub const FK_RESIDUAL_TOL: f64 = 1e-9;
/// Solutions closer than this (angle on the circle) are merged.
pub const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Plus)
        } else if v < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }
}

/// Inverse-kinematics branch per leg: `ρ_i = w_i + σ_i √D_i`.
///
/// Ordering is lexicographic with `-` before `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkingMode(pub [Sign; 3]);

impl WorkingMode {
    pub const PPP: WorkingMode = WorkingMode([Sign::Plus, Sign::Plus, Sign::Plus]);

    /// All eight branches in lexicographic order.
    pub fn all() -> [WorkingMode; 8] {
        std::array::from_fn(|k| {
            let bit = |b: usize| if k >> (2 - b) & 1 == 1 { Sign::Plus } else { Sign::Minus };
            WorkingMode([bit(0), bit(1), bit(2)])
        })
    }
}

impl Default for WorkingMode {
    fn default() -> Self {
        WorkingMode::PPP
    }
}

impl fmt::Display for WorkingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            f.write_str(if s == Sign::Plus { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for WorkingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<Sign> = s
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                _ => Err(Error::Config(format!("bad working mode `{s}`: use three of + and -"))),
            })
            .collect::<Result<_>>()?;
        let arr: [Sign; 3] = signs
            .try_into()
            .map_err(|_| Error::Config(format!("bad working mode `{s}`: use three of + and -")))?;
        Ok(WorkingMode(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub joints: JointInput,
    /// Legs whose discriminant is within tolerance of zero (serial singular, both branches coincide).
    pub boundary: [bool; 3],
}

/// Per-leg `(w, D)` of `ρ = w ± √D`, with `D` in `[-tol, 0)` clamped to zero.
fn leg_quadratic(leg: &LegConstraint, pose: &Pose) -> (f64, f64) {
    let (w, d) = leg.rho_quadratic(pose);
    if (-TANGENCY_TOL..0.0).contains(&d) {
        (w, 0.0)
    } else {
        (w, d)
    }
}

pub fn inverse_kinematics(system: &ConstraintSystem, pose: &Pose, wm: WorkingMode) -> Result<IkSolution> {
    pose.check_mode(system.mode)?;
    let mut rho = [0.0; 3];
    let mut boundary = [false; 3];
    let mut unreachable = Vec::new();
    for (i, leg) in system.legs.iter().enumerate() {
        let (w, d) = leg_quadratic(leg, pose);
        if d < 0.0 || !d.is_finite() {
            unreachable.push(i);
            continue;
        }
        boundary[i] = d <= TANGENCY_TOL;
        rho[i] = w + wm.0[i].value() * d.sqrt();
    }
    if !unreachable.is_empty() {
        return Err(Error::Unreachable { legs: unreachable });
    }
    Ok(IkSolution {
        joints: JointInput { rho },
        boundary,
    })
}

/// All distinct inverse-kinematics solutions, ordered by working mode.
/// Legs at a discriminant boundary contribute a single (`+`) branch.
pub fn enumerate_ik(system: &ConstraintSystem, pose: &Pose) -> Result<Vec<(WorkingMode, IkSolution)>> {
    pose.check_mode(system.mode)?;
    let mut branches: Vec<Vec<Sign>> = Vec::with_capacity(3);
    for leg in &system.legs {
        let (_, d) = leg_quadratic(leg, pose);
        if d < 0.0 || !d.is_finite() {
            return Ok(Vec::new());
        }
        branches.push(if d <= TANGENCY_TOL {
            vec![Sign::Plus]
        } else {
            vec![Sign::Minus, Sign::Plus]
        });
    }
    let mut out = Vec::with_capacity(8);
    for &s1 in &branches[0] {
        for &s2 in &branches[1] {
            for &s3 in &branches[2] {
                let wm = WorkingMode([s1, s2, s3]);
                out.push((wm, inverse_kinematics(system, pose, wm)?));
            }
        }
    }
    Ok(out)
}

/// Branch signs read back from a configuration; `None` when a leg sits on its boundary.
pub fn branch_signature(system: &ConstraintSystem, pose: &Pose, joints: &JointInput) -> Option<WorkingMode> {
    let mut signs = [Sign::Plus; 3];
    for (i, leg) in system.legs.iter().enumerate() {
        let w = leg.form_values(pose, 0.0)[leg.rho_form()];
        let v = joints.rho[i] - w;
        if v.abs() <= TANGENCY_TOL {
            return None;
        }
        signs[i] = Sign::of(v)?;
    }
    Some(WorkingMode(signs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkSolution {
    pub pose: Pose,
    pub working_mode: Option<WorkingMode>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FkSolutionSet {
    pub solutions: Vec<FkSolution>,
    /// Set when the orientation is undetermined for some position (a continuum of solutions).
    pub indeterminate: bool,
}

impl FkSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn contains(&self, pose: &Pose, mode: OperationMode, tol: f64) -> bool {
        self.solutions.iter().any(|s| s.pose.distance(pose, mode) <= tol)
    }
}

fn position_coords(mode: OperationMode) -> Vec<Coord> {
    mode.active_coords()
        .into_iter()
        .filter(|&c| c != Coord::Alpha)
        .collect()
}

fn coord_term(c: Coord) -> Term {
    match c {
        Coord::X => Term::X,
        Coord::Y => Term::Y,
        Coord::Z => Term::Z,
        Coord::Alpha => unreachable!("angle is not a position coordinate"),
    }
}

/// Center and squared radius of an angle-free leg, in the given position coordinates.
fn leg_sphere(leg: &LegConstraint, coords: &[Coord], rho: f64) -> Result<(Vec<f64>, f64)> {
    let n = coords.len();
    let g: Vec<Vec<f64>> = (0..3)
        .map(|k| coords.iter().map(|&c| leg.coeff(k, coord_term(c))).collect())
        .collect();
    for p in 0..n {
        for q in 0..n {
            let dot: f64 = (0..3).map(|k| g[k][p] * g[k][q]).sum();
            let want = if p == q { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-12 {
                return Err(Error::Config(
                    "leg forms are not an orthonormal embedding of the position".into(),
                ));
            }
        }
    }
    let h: Vec<f64> = (0..3)
        .map(|k| leg.coeff(k, Term::Rho) * rho + leg.coeff(k, Term::One))
        .collect();
    let gth: Vec<f64> = (0..n).map(|q| (0..3).map(|k| g[k][q] * h[k]).sum()).collect();
    let center: Vec<f64> = gth.iter().map(|v| -v).collect();
    let h2: f64 = h.iter().map(|v| v * v).sum();
    let gth2: f64 = gth.iter().map(|v| v * v).sum();
    Ok((center, leg.rhs() - h2 + gth2))
}

/// Coefficients `(a, b, d)` of `a cos α + b sin α = d` for an angle-bearing leg at a fixed position.
fn angle_equation(leg: &LegConstraint, position: &Pose, rho: f64) -> Result<(f64, f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut pp = 0.0;
    let (mut qcc, mut qss, mut qcs) = (0.0, 0.0, 0.0);
    let basis = position.basis(rho);
    for form in leg.forms() {
        let p: f64 = form
            .iter()
            .zip(basis.iter())
            .enumerate()
            .filter(|(t, _)| *t != Term::Cos as usize && *t != Term::Sin as usize)
            .map(|(_, (m, v))| m * v)
            .sum();
        let mc = form[Term::Cos as usize];
        let ms = form[Term::Sin as usize];
        a += 2.0 * p * mc;
        b += 2.0 * p * ms;
        pp += p * p;
        qcc += mc * mc;
        qss += ms * ms;
        qcs += mc * ms;
    }
    if (qcc - qss).abs() > 1e-12 || qcs.abs() > 1e-12 {
        return Err(Error::Config(
            "angle terms are not isotropic; orientation is not a linear trig equation".into(),
        ));
    }
    Ok((a, b, leg.rhs() - qcc - pp))
}

fn cmp_solutions(mode: OperationMode, a: &FkSolution, b: &FkSolution) -> Ordering {
    a.working_mode.cmp(&b.working_mode).then_with(|| {
        let (pa, pb) = (a.pose.active(mode), b.pose.active(mode));
        pa.iter()
            .zip(pb.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// All real platform poses for the given actuator positions.
///
/// Angle-free legs fix the position (three spheres when the mode has no
/// rotation, otherwise two circles); the remaining leg then fixes α.
pub fn forward_kinematics(system: &ConstraintSystem, joints: &JointInput) -> Result<FkSolutionSet> {
    let mode = system.mode;
    let coords = position_coords(mode);
    let free: Vec<usize> = (0..3).filter(|&i| system.legs[i].is_angle_free()).collect();
    let mut candidates: Vec<Pose> = Vec::new();
    let mut indeterminate = false;

    if !mode.has_rotation() {
        if free.len() != 3 || coords.len() != 3 {
            return Err(Error::Config("translational mode needs three angle-free legs".into()));
        }
        let mut centers = [Point3::origin(); 3];
        let mut radii = [0.0; 3];
        for i in 0..3 {
            let (c, r2) = leg_sphere(&system.legs[i], &coords, joints.rho[i])?;
            if r2 < 0.0 {
                return Ok(FkSolutionSet::default());
            }
            centers[i] = Point3::new(c[0], c[1], c[2]);
            radii[i] = r2.sqrt();
        }
        for p in trilaterate(centers, radii)? {
            candidates.push(Pose::from_active(mode, [p.x, p.y, p.z]));
        }
    } else {
        if free.len() != 2 || coords.len() != 2 {
            return Err(Error::Config("planar mode needs exactly two angle-free legs".into()));
        }
        let angled = (0..3).find(|i| !free.contains(i)).expect("one angle-bearing leg");
        let mut circles = [(Point2::origin(), 0.0); 2];
        for (slot, &i) in free.iter().enumerate() {
            let (c, r2) = leg_sphere(&system.legs[i], &coords, joints.rho[i])?;
            if r2 < 0.0 {
                return Ok(FkSolutionSet::default());
            }
            circles[slot] = (Point2::new(c[0], c[1]), r2.sqrt());
        }
        let positions = match intersect_circles(circles[0].0, circles[0].1, circles[1].0, circles[1].1) {
            Ok(p) => p,
            // coincident actuator lines: the position is not isolated
            Err(Error::ConcentricCircles) => {
                return Ok(FkSolutionSet {
                    solutions: Vec::new(),
                    indeterminate: true,
                })
            }
            Err(e) => return Err(e),
        };
        for p in positions {
            let mut pose = Pose::default();
            pose.set(coords[0], p.x);
            pose.set(coords[1], p.y);
            let (a, b, d) = angle_equation(&system.legs[angled], &pose, joints.rho[angled])?;
            match solve_linear_trig(a, b, d) {
                Ok(angles) => candidates.extend(angles.into_iter().map(|t| pose.with(Coord::Alpha, t))),
                Err(Error::IndeterminateAngle) => indeterminate = true,
                Err(Error::Degenerate) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let mut solutions: Vec<FkSolution> = Vec::with_capacity(candidates.len());
    for pose in candidates {
        let max_residual = system.max_residual(&pose, joints);
        if max_residual >= FK_RESIDUAL_TOL {
            continue;
        }
        if solutions.iter().any(|s| s.pose.distance(&pose, mode) <= DEDUP_TOL) {
            continue;
        }
        solutions.push(FkSolution {
            pose,
            working_mode: branch_signature(system, &pose, joints),
            max_residual,
        });
    }
    solutions.sort_by(|a, b| cmp_solutions(mode, a, b));
    Ok(FkSolutionSet {
        solutions,
        indeterminate,
    })
}
