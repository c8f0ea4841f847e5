//! Jacobians of the constraint residuals and serial/parallel singularity
//! classification.
//!
//! Differentiating `F(pose, ρ) = 0` gives `A·ṗ + B·ρ̇ = 0`. `A` is taken with
//! respect to the mode's active pose coordinates (angle columns through
//! `d cos α = −sin α dα`, `d sin α = cos α dα`); `B` is diagonal since each
//! residual carries a single actuator.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::model::{ConstraintSystem, JointInput, OperationMode, Pose, Preset};

/// Configurations farther than this from the constraint manifold are rejected.
pub const MANIFOLD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative: `|det A| ≤ parallel · Π ‖row_i(A)‖`.
    pub parallel: f64,
    /// Absolute: `|B_ii| ≤ serial`.
    pub serial: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            parallel: 1e-9,
            serial: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianPair {
    pub a: Matrix3<f64>,
    pub b_diag: Vector3<f64>,
}

impl JacobianPair {
    pub fn b(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.b_diag)
    }

    pub fn det_a(&self) -> f64 {
        self.a.determinant()
    }

    pub fn det_b(&self) -> f64 {
        self.b_diag.iter().product()
    }

    /// Product of the row norms of `A`, the scale for the parallel tolerance.
    pub fn a_scale(&self) -> f64 {
        (0..3).map(|i| self.a.row(i).norm()).product()
    }

    /// `|det A|` below the relative parallel tolerance.
    pub fn is_parallel_singular(&self, tol: f64) -> bool {
        self.det_a().abs() <= tol * self.a_scale()
    }

    /// Sign of `det A` under the relative tolerance: -1, 0 or +1.
    pub fn det_a_sign(&self, tol: f64) -> i8 {
        let d = self.det_a();
        if d.abs() <= tol * self.a_scale() {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Analytic Jacobians without the on-manifold check; for grid sweeps that
/// evaluate exact inverse-kinematics configurations.
pub fn jacobians_unchecked(system: &ConstraintSystem, pose: &Pose, joints: &JointInput) -> JacobianPair {
    let coords = system.mode.active_coords();
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for (i, leg) in system.legs.iter().enumerate() {
        let l = leg.form_values(pose, joints.rho[i]);
        for (j, &c) in coords.iter().enumerate() {
            let dl = leg.form_partials(pose, c);
            a[(i, j)] = 2.0 * (0..3).map(|k| l[k] * dl[k]).sum::<f64>();
        }
        b[i] = -2.0 * l[leg.rho_form()];
    }
    JacobianPair { a, b_diag: b }
}

pub fn jacobians(system: &ConstraintSystem, pose: &Pose, joints: &JointInput) -> Result<JacobianPair> {
    let r = system.max_residual(pose, joints);
    if !(r < MANIFOLD_TOL) {
        return Err(Error::OffManifold(r));
    }
    Ok(jacobians_unchecked(system, pose, joints))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    Regular,
    Serial,
    Parallel,
    SerialParallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerialHit {
    /// Zero-based leg index.
    pub leg: usize,
    /// The closed-form condition for that leg, e.g. `-10y + sin(alpha) + 10rho1 = 0`.
    pub condition: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityVerdict {
    pub kind: SingularityKind,
    pub serial_legs: Vec<SerialHit>,
    pub det_a: f64,
    pub b_diag: [f64; 3],
}

/// Closed-form serial condition of a leg, as text.
pub fn serial_condition(mode: OperationMode, leg: usize) -> &'static str {
    match (mode, leg) {
        (OperationMode::Two | OperationMode::Four, 0) => "-10y + sin(alpha) + 10rho1 = 0",
        (OperationMode::Three, 2) => "-10y - sin(alpha) + 10rho3 = 0",
        (_, 0) => "rho1 - y = 0",
        (_, 1) => "rho2 - y = 0",
        _ => "rho3 - y = 0",
    }
}

/// Value of the closed-form serial condition of a leg (zero on the serial locus).
///
/// Angle-dependent legs use `10(ρ − y ± d3 sin α)`, which at default
/// parameters is the printed `-10y ± sin α + 10ρ`.
pub fn serial_condition_value(system: &ConstraintSystem, leg: usize, pose: &Pose, joints: &JointInput) -> f64 {
    let p = &system.params;
    let rho = joints.rho[leg];
    let s = pose.alpha.sin();
    match (system.mode, leg) {
        (OperationMode::Two | OperationMode::Four, 0) => 10.0 * (rho - pose.y + p.d3 * s),
        (OperationMode::Three, 2) => 10.0 * (rho - pose.y - p.d4 * s),
        _ => rho - pose.y,
    }
}

pub fn classify(
    system: &ConstraintSystem,
    pose: &Pose,
    joints: &JointInput,
    tol: &Tolerances,
) -> Result<SingularityVerdict> {
    let jac = jacobians(system, pose, joints)?;
    let serial_legs: Vec<SerialHit> = (0..3)
        .filter(|&i| jac.b_diag[i].abs() <= tol.serial)
        .map(|leg| SerialHit {
            leg,
            condition: serial_condition(system.mode, leg),
        })
        .collect();
    let parallel = jac.is_parallel_singular(tol.parallel);
    let kind = match (!serial_legs.is_empty(), parallel) {
        (false, false) => SingularityKind::Regular,
        (true, false) => SingularityKind::Serial,
        (false, true) => SingularityKind::Parallel,
        (true, true) => SingularityKind::SerialParallel,
    };
    Ok(SingularityVerdict {
        kind,
        serial_legs,
        det_a: jac.det_a(),
        b_diag: jac.b_diag.into(),
    })
}

/// Leg-1 constant of the mode-4 angle-bearing form (1/4, or 1/2 under `PaperIkMode4`).
fn mode4_leg1_offset(system: &ConstraintSystem) -> f64 {
    match system.preset {
        Preset::Consistent => system.params.d1 / 2.0,
        Preset::PaperIkMode4 => system.params.d1,
    }
}

/// Closed-form parallel-singularity factors.
///
/// Mode 1 has no factorization and returns `[det A]`. Modes 2 to 4 return
/// `[f1, f2]` with `det A = κ · f1 · f2`, `κ > 0` (see
/// [`parallel_factor_scale`]). At default parameters:
///
/// - mode 2: `f1 = 20x(ρ2 − ρ3) + 3(ρ3 − y)`, `f2 = 4x sin α + 4ρ1 cos α − 4y cos α + sin α`
/// - mode 3: `f1 = 20ρ1x − 20ρ2x − 3ρ1 − 3ρ2 + 6y`, `f2 = −10ρ3 cos α + 10y cos α + 9 sin α`
/// - mode 4: `f1 = 5ρ2z − 5ρ3z − 4ρ2 + 4y`, `f2 = −4ρ1 cos α + 4y cos α − sin α`
///
/// The mode-2 `f2` is oriented opposite to its usual printed sign so that
/// `κ` stays positive in every mode.
pub fn parallel_factor_values(system: &ConstraintSystem, pose: &Pose, joints: &JointInput) -> Vec<f64> {
    let p = &system.params;
    let e = p.leg_offset();
    let Pose { x, y, z, alpha } = *pose;
    let [r1, r2, r3] = joints.rho;
    let (s, c) = alpha.sin_cos();
    match system.mode {
        OperationMode::One => vec![jacobians_unchecked(system, pose, joints).det_a()],
        OperationMode::Two => vec![
            20.0 * (x * (r2 - r3) + e * (r3 - y)),
            4.0 * (x * s + p.d1 / 2.0 * s - y * c + r1 * c),
        ],
        OperationMode::Three => vec![
            20.0 * (x * (r1 - r2) - e * (r1 + r2 - 2.0 * y)),
            10.0 * ((y - r3) * c + p.leg3_base_height() * s),
        ],
        OperationMode::Four => vec![
            5.0 * (z * (r2 - r3) - p.leg3_height() * (r2 - y)),
            4.0 * ((y - r1) * c - mode4_leg1_offset(system) * s),
        ],
    }
}

/// `κ` in `det A = κ · f1 · f2`; `None` for mode 1.
pub fn parallel_factor_scale(system: &ConstraintSystem) -> Option<f64> {
    let p = &system.params;
    match system.mode {
        OperationMode::One => None,
        OperationMode::Two => Some(p.d3 / 10.0),
        OperationMode::Three => Some(p.d4 / 25.0),
        OperationMode::Four => Some(2.0 * p.d3 / 5.0),
    }
}
