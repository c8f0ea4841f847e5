//! Robot geometry and the per-operation-mode constraint systems.
//!
//! Every leg constraint is stored as data: three linear forms over the basis
//! `(x, y, z, cos α, sin α, ρ, 1)` whose squares sum to a squared length.
//! Inverse kinematics, Jacobians and the forward-kinematics structure
//! detection all read these coefficients instead of hard-coding per-mode
//! formulas.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Point3;

use crate::error::{Error, Result};

/// Number of basis terms in a linear form.
pub const BASIS_LEN: usize = 7;

/// Index of each basis term inside a linear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    X = 0,
    Y = 1,
    Z = 2,
    Cos = 3,
    Sin = 4,
    Rho = 5,
    One = 6,
}

/// Link lengths in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub l: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            d1: 0.5,
            d2: 1.0,
            d3: 0.1,
            d4: 0.1,
            l: 1.0,
        }
    }
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("l", self.l),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be a positive finite length, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// x-offset between a platform attachment and its actuator line for legs 1 and 2 (3/20).
    pub fn leg_offset(&self) -> f64 {
        self.d1 / 2.0 - self.d3
    }

    /// Height offset of leg 3 measured from the platform point (4/5).
    pub fn leg3_height(&self) -> f64 {
        self.d2 - 2.0 * self.d4
    }

    /// Height of the leg-3 actuator line (9/10).
    pub fn leg3_base_height(&self) -> f64 {
        self.d2 - self.d4
    }
}

/// Pose coordinates of the platform point P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    X,
    Y,
    Z,
    Alpha,
}

impl Coord {
    pub fn name(self) -> &'static str {
        match self {
            Coord::X => "x",
            Coord::Y => "y",
            Coord::Z => "z",
            Coord::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LockableJoint {
    R1,
    R2,
    R3,
    P1,
    P2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

/// One of the four motion patterns selected by locking joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperationMode {
    /// 3T: translation along x, y, z.
    One,
    /// 2T1R: translation in the xy-plane, rotation about z.
    Two,
    /// 2T1R: translation in the xy-plane, rotation about x.
    Three,
    /// 2T1R: translation in the yz-plane, rotation about z.
    Four,
}

impl OperationMode {
    pub const ALL: [OperationMode; 4] = [
        OperationMode::One,
        OperationMode::Two,
        OperationMode::Three,
        OperationMode::Four,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(OperationMode::One),
            2 => Ok(OperationMode::Two),
            3 => Ok(OperationMode::Three),
            4 => Ok(OperationMode::Four),
            _ => Err(Error::Config(format!("unknown operation mode {id}"))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            OperationMode::One => 1,
            OperationMode::Two => 2,
            OperationMode::Three => 3,
            OperationMode::Four => 4,
        }
    }

    pub fn locked_joints(self) -> &'static [LockableJoint] {
        use LockableJoint::*;
        match self {
            OperationMode::One => &[P1, P2],
            OperationMode::Two => &[R1, R2, P2],
            OperationMode::Three => &[R1, R2, P1],
            OperationMode::Four => &[R3, P2],
        }
    }

    pub fn released_joints(self) -> &'static [LockableJoint] {
        use LockableJoint::*;
        match self {
            OperationMode::One => &[R1, R2, R3],
            OperationMode::Two => &[R3, P1],
            OperationMode::Three => &[R3, P2],
            OperationMode::Four => &[R1, R2, P1],
        }
    }

    /// The three controlled pose coordinates, in Jacobian column order.
    pub fn active_coords(self) -> [Coord; 3] {
        match self {
            OperationMode::One => [Coord::X, Coord::Y, Coord::Z],
            OperationMode::Two | OperationMode::Three => [Coord::X, Coord::Y, Coord::Alpha],
            OperationMode::Four => [Coord::Y, Coord::Z, Coord::Alpha],
        }
    }

    /// The pose coordinate pinned to zero.
    pub fn inactive_coord(self) -> Coord {
        match self {
            OperationMode::One => Coord::Alpha,
            OperationMode::Two | OperationMode::Three => Coord::Z,
            OperationMode::Four => Coord::X,
        }
    }

    pub fn rotation_axis(self) -> Option<Axis> {
        match self {
            OperationMode::One => None,
            OperationMode::Two => Some(Axis::Z),
            OperationMode::Three => Some(Axis::X),
            OperationMode::Four => Some(Axis::Z),
        }
    }

    pub fn has_rotation(self) -> bool {
        self.rotation_axis().is_some()
    }
}

impl fmt::Display for OperationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for OperationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("unknown operation mode `{s}`")))?;
        Self::from_id(id)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid maps -pi to pi already; guard the r == -pi case from rounding
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Shortest angular distance between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// Platform pose. Coordinates inactive in the current mode are held at 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, alpha: f64) -> Self {
        Self {
            x,
            y,
            z,
            alpha: normalize_angle(alpha),
        }
    }

    /// Builds a pose from the mode's three active coordinates.
    pub fn from_active(mode: OperationMode, values: [f64; 3]) -> Self {
        let mut p = Pose::default();
        for (c, v) in mode.active_coords().into_iter().zip(values) {
            p.set(c, v);
        }
        p
    }

    pub fn get(&self, c: Coord) -> f64 {
        match c {
            Coord::X => self.x,
            Coord::Y => self.y,
            Coord::Z => self.z,
            Coord::Alpha => self.alpha,
        }
    }

    pub fn set(&mut self, c: Coord, v: f64) {
        match c {
            Coord::X => self.x = v,
            Coord::Y => self.y = v,
            Coord::Z => self.z = v,
            Coord::Alpha => self.alpha = normalize_angle(v),
        }
    }

    pub fn with(mut self, c: Coord, v: f64) -> Self {
        self.set(c, v);
        self
    }

    pub fn active(&self, mode: OperationMode) -> [f64; 3] {
        mode.active_coords().map(|c| self.get(c))
    }

    pub fn check_mode(&self, mode: OperationMode) -> Result<()> {
        let c = mode.inactive_coord();
        if self.get(c) != 0.0 {
            return Err(Error::InactiveCoordinate { mode, coord: c.name() });
        }
        Ok(())
    }

    /// Distance on the mode's active coordinates, with the angle measured on the circle.
    pub fn distance(&self, other: &Pose, mode: OperationMode) -> f64 {
        mode.active_coords()
            .into_iter()
            .map(|c| match c {
                Coord::Alpha => angle_distance(self.alpha, other.alpha),
                _ => self.get(c) - other.get(c),
            })
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }

    /// Values of the basis `(x, y, z, cos α, sin α, ρ, 1)`.
    pub fn basis(&self, rho: f64) -> [f64; BASIS_LEN] {
        let (s, c) = self.alpha.sin_cos();
        [self.x, self.y, self.z, c, s, rho, 1.0]
    }
}

/// Actuator positions along the y-axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointInput {
    pub rho: [f64; 3],
}

impl JointInput {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Self {
        Self {
            rho: [rho1, rho2, rho3],
        }
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            rho: self.rho.map(|r| r + delta),
        }
    }
}

/// Coefficient presets. `PaperIkMode4` swaps in the mode-4 constants that the
/// printed closed-form inverse kinematics and the printed mode-4 transition
/// boundary were computed with; every other mode is identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Preset {
    #[default]
    Consistent,
    PaperIkMode4,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Consistent => "consistent",
            Preset::PaperIkMode4 => "paper-ik-mode4",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "consistent" => Ok(Preset::Consistent),
            "paper-ik-mode4" => Ok(Preset::PaperIkMode4),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

/// A single leg: `L1² + L2² + L3² = r²` with `L_k = forms[k] · basis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegConstraint {
    forms: [[f64; BASIS_LEN]; 3],
    rhs: f64,
    rho_form: usize,
}

impl LegConstraint {
    /// Fails unless exactly one form carries ρ, with coefficient -1.
    pub fn new(forms: [[f64; BASIS_LEN]; 3], rhs: f64) -> Result<Self> {
        let carriers: Vec<usize> = (0..3).filter(|&k| forms[k][Term::Rho as usize] != 0.0).collect();
        match carriers.as_slice() {
            [k] if forms[*k][Term::Rho as usize] == -1.0 => Ok(Self {
                forms,
                rhs,
                rho_form: *k,
            }),
            _ => Err(Error::Config(
                "a leg constraint needs rho in exactly one form with coefficient -1".into(),
            )),
        }
    }

    pub fn forms(&self) -> &[[f64; BASIS_LEN]; 3] {
        &self.forms
    }

    /// Squared length `r²`.
    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    /// Index of the form that carries ρ.
    pub fn rho_form(&self) -> usize {
        self.rho_form
    }

    pub fn coeff(&self, form: usize, term: Term) -> f64 {
        self.forms[form][term as usize]
    }

    /// True when neither cos α nor sin α appears.
    pub fn is_angle_free(&self) -> bool {
        self.forms
            .iter()
            .all(|f| f[Term::Cos as usize] == 0.0 && f[Term::Sin as usize] == 0.0)
    }

    pub fn form_values(&self, pose: &Pose, rho: f64) -> [f64; 3] {
        let b = pose.basis(rho);
        self.forms.map(|f| f.iter().zip(b.iter()).map(|(m, v)| m * v).sum())
    }

    pub fn residual(&self, pose: &Pose, rho: f64) -> f64 {
        self.form_values(pose, rho).iter().map(|l| l * l).sum::<f64>() - self.rhs
    }

    /// Splits the leg into `(w, D)` with `residual = (w - ρ)² - D`, so the
    /// inverse kinematics is `ρ = w ± √D`.
    pub fn rho_quadratic(&self, pose: &Pose) -> (f64, f64) {
        let l = self.form_values(pose, 0.0);
        let w = l[self.rho_form];
        let rest: f64 = (0..3).filter(|&k| k != self.rho_form).map(|k| l[k] * l[k]).sum();
        (w, self.rhs - rest)
    }

    /// Partial derivative of each form with respect to a pose coordinate.
    pub fn form_partials(&self, pose: &Pose, coord: Coord) -> [f64; 3] {
        match coord {
            Coord::X => self.forms.map(|f| f[Term::X as usize]),
            Coord::Y => self.forms.map(|f| f[Term::Y as usize]),
            Coord::Z => self.forms.map(|f| f[Term::Z as usize]),
            Coord::Alpha => {
                let (s, c) = pose.alpha.sin_cos();
                self.forms
                    .map(|f| -f[Term::Cos as usize] * s + f[Term::Sin as usize] * c)
            }
        }
    }
}

/// The three legs of one operation mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSystem {
    pub mode: OperationMode,
    pub params: DesignParams,
    pub preset: Preset,
    pub legs: [LegConstraint; 3],
}

impl ConstraintSystem {
    pub fn residual(&self, pose: &Pose, joints: &JointInput) -> [f64; 3] {
        residual(self, pose, joints)
    }

    pub fn max_residual(&self, pose: &Pose, joints: &JointInput) -> f64 {
        self.residual(pose, joints).iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

#[derive(Default)]
struct FormBuilder([f64; BASIS_LEN]);

impl FormBuilder {
    fn t(mut self, term: Term, v: f64) -> Self {
        self.0[term as usize] = v;
        self
    }
}

fn f() -> FormBuilder {
    FormBuilder::default()
}

fn leg(forms: [FormBuilder; 3], rhs: f64) -> Result<LegConstraint> {
    let [a, b, c] = forms;
    LegConstraint::new([a.0, b.0, c.0], rhs)
}

/// Builds the constraint system of one operation mode.
///
/// At default parameters and the `Consistent` preset the legs read
/// (forms; r²):
///
/// | mode | leg 1 | leg 2 | leg 3 |
/// |------|-------|-------|-------|
/// | 1 | (x+3/20, y−ρ1, z); 1 | (x−3/20, y−ρ2, z); 1 | (x, y−ρ3, z−4/5); 1 |
/// | 2 | (x−c/10+1/4, y−s/10−ρ1, 0); 1 | (x−3/20, y−ρ2, 0); 1 | (x, y−ρ3, 0); 9/25 |
/// | 3 | (x+3/20, y−ρ1, 0); 1 | (x−3/20, y−ρ2, 0); 1 | (x, y+s/10−ρ3, c/10−9/10); 1 |
/// | 4 | (−c/10+1/4, y−s/10−ρ1, z); 1 | (0, y−ρ2, z); 391/400 | (0, y−ρ3, z−4/5); 1 |
///
/// `PaperIkMode4` changes mode 4 only: leg-1 constant `d1` (1/2), leg-2
/// r² = l² − d3² (99/100), leg-3 r² = l² − (d1/2)² (15/16).
pub fn build_system(mode: OperationMode, params: DesignParams, preset: Preset) -> Result<ConstraintSystem> {
    use Term::*;
    params.validate()?;
    let DesignParams { d1, d3, d4, l, .. } = params;
    let e = params.leg_offset();
    let h = params.leg3_height();
    let g = params.leg3_base_height();
    let l2 = l * l;

    let legs = match mode {
        OperationMode::One => [
            leg([f().t(X, 1.0).t(One, e), f().t(Y, 1.0).t(Rho, -1.0), f().t(Z, 1.0)], l2)?,
            leg(
                [f().t(X, 1.0).t(One, -e), f().t(Y, 1.0).t(Rho, -1.0), f().t(Z, 1.0)],
                l2,
            )?,
            leg(
                [f().t(X, 1.0), f().t(Y, 1.0).t(Rho, -1.0), f().t(Z, 1.0).t(One, -h)],
                l2,
            )?,
        ],
        OperationMode::Two => [
            leg(
                [
                    f().t(X, 1.0).t(Cos, -d3).t(One, d1 / 2.0),
                    f().t(Y, 1.0).t(Sin, -d3).t(Rho, -1.0),
                    f(),
                ],
                l2,
            )?,
            leg([f().t(X, 1.0).t(One, -e), f().t(Y, 1.0).t(Rho, -1.0), f()], l2)?,
            leg([f().t(X, 1.0), f().t(Y, 1.0).t(Rho, -1.0), f()], l2 - h * h)?,
        ],
        OperationMode::Three => [
            leg([f().t(X, 1.0).t(One, e), f().t(Y, 1.0).t(Rho, -1.0), f()], l2)?,
            leg([f().t(X, 1.0).t(One, -e), f().t(Y, 1.0).t(Rho, -1.0), f()], l2)?,
            leg(
                [
                    f().t(X, 1.0),
                    f().t(Y, 1.0).t(Sin, d4).t(Rho, -1.0),
                    f().t(Cos, d4).t(One, -g),
                ],
                l2,
            )?,
        ],
        OperationMode::Four => {
            let (k, r2_leg2, r2_leg3) = match preset {
                Preset::Consistent => (d1 / 2.0, l2 - e * e, l2),
                Preset::PaperIkMode4 => (d1, l2 - d3 * d3, l2 - (d1 / 2.0) * (d1 / 2.0)),
            };
            [
                leg(
                    [
                        f().t(Cos, -d3).t(One, k),
                        f().t(Y, 1.0).t(Sin, -d3).t(Rho, -1.0),
                        f().t(Z, 1.0),
                    ],
                    l2,
                )?,
                leg([f(), f().t(Y, 1.0).t(Rho, -1.0), f().t(Z, 1.0)], r2_leg2)?,
                leg([f(), f().t(Y, 1.0).t(Rho, -1.0), f().t(Z, 1.0).t(One, -h)], r2_leg3)?,
            ]
        }
    };

    Ok(ConstraintSystem {
        mode,
        params,
        preset,
        legs,
    })
}

/// `Σ L_k² − r²` per leg; zero exactly when the leg's constraint holds.
pub fn residual(system: &ConstraintSystem, pose: &Pose, joints: &JointInput) -> [f64; 3] {
    std::array::from_fn(|i| system.legs[i].residual(pose, joints.rho[i]))
}

/// Named points of the mechanism, for rendering and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSet {
    pub a: [Point3<f64>; 3],
    pub b: [Point3<f64>; 3],
    pub c: [Point3<f64>; 3],
    pub p: Point3<f64>,
}

/// Point listings per mode. These are not used to derive the constraints:
/// the listed C2 disagrees with the leg-2 x-offset of the constraint tables.
pub fn leg_points(mode: OperationMode, pose: &Pose, joints: &JointInput, params: &DesignParams) -> PointSet {
    let DesignParams { d1, d2, d3, d4, .. } = *params;
    let a = [
        Point3::new(-d1 / 2.0, 0.0, 0.0),
        Point3::new(d1 / 2.0 - d3, 0.0, 0.0),
        Point3::new(0.0, 0.0, d2 - d4),
    ];
    let b: [Point3<f64>; 3] = std::array::from_fn(|i| Point3::new(a[i].x, a[i].y + joints.rho[i], a[i].z));
    let Pose { x, y, z, alpha } = *pose;
    let (s, c) = alpha.sin_cos();
    let (cpts, p) = match mode {
        OperationMode::One => (
            [
                Point3::new(x - d3, y, z),
                Point3::new(x + d3, y, z),
                Point3::new(x, y, z + d4),
            ],
            Point3::new(x, y, z),
        ),
        OperationMode::Two => (
            [
                Point3::new(x - d3 * c, y - d3 * s, 0.0),
                Point3::new(x + d3 * c, y + d3 * s, 0.0),
                Point3::new(x, y, d4),
            ],
            Point3::new(x, y, 0.0),
        ),
        OperationMode::Three => (
            [
                Point3::new(x - d3, y, 0.0),
                Point3::new(x + d3, y, 0.0),
                Point3::new(x, y + d4 * s, d4 * c),
            ],
            Point3::new(x, y, 0.0),
        ),
        OperationMode::Four => (
            [
                Point3::new(-d3 * c, y - d3 * s, z),
                Point3::new(d3 * c, y + d3 * s, z),
                Point3::new(0.0, y, z + d4),
            ],
            Point3::new(0.0, y, z),
        ),
    };
    PointSet { a, b, c: cpts, p }
}
