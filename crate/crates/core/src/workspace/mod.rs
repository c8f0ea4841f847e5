//! Grid-sampled workspace and joint-space maps.
//!
//! A workspace map sweeps a two-dimensional section of the pose space (the
//! remaining coordinate held fixed) for one working mode, recording IK
//! feasibility and the sign of `det A` at every cell center and cell corner.
//! A joint-space map sweeps `(ρ2, ρ3)` on a fixed `ρ1` slice and counts real
//! forward-kinematics solutions.

mod labeling;
mod transition;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, inverse_kinematics, WorkingMode};
use crate::model::{ConstraintSystem, Coord, JointInput, OperationMode, Pose};
use crate::singularity::{jacobians_unchecked, Tolerances};

pub use labeling::{feasible_components, label_aspects, region_summary, Aspect, AspectLabeling, Region};
pub use transition::{
    default_transition_wm, find_boundary_root, transition_for_mode, transition_report, HomeLine, LineSegment,
    ModeTransition, TransitionReport,
};

/// Default half-width of the linear pose axes.
pub const DEFAULT_POSE_RANGE: f64 = 1.2;
/// Default half-width of the joint-space axes.
pub const DEFAULT_JOINT_RANGE: f64 = 2.5;

/// Pose with every active coordinate zero.
pub fn home_pose(_mode: OperationMode) -> Pose {
    Pose::default()
}

/// One sampled axis. Linear axes are inclusive linspaces; a periodic axis
/// samples `(-π, π]` at `-π + (j + 1)·2π/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub periodic: bool,
}

impl AxisSpec {
    pub fn linear(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            lo,
            hi,
            n,
            periodic: false,
        }
    }

    pub fn angle(n: usize) -> Self {
        Self {
            lo: -std::f64::consts::PI,
            hi: std::f64::consts::PI,
            n,
            periodic: true,
        }
    }

    pub fn step(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.n as f64
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }

    pub fn sample(&self, i: usize) -> f64 {
        if self.periodic {
            self.lo + (i + 1) as f64 * self.step()
        } else if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.sample(i)).collect()
    }

    /// Number of cell-corner positions. A periodic axis reuses corner 0 as corner `n`.
    fn corner_count(&self) -> usize {
        if self.periodic {
            self.n
        } else {
            self.n + 1
        }
    }

    fn corner(&self, k: usize) -> f64 {
        self.sample(k.min(self.n - 1)) + if k < self.n { -0.5 } else { 0.5 } * self.step()
    }

    /// Corner indices (low, high) bounding sample `i`.
    fn corners_of(&self, i: usize) -> (usize, usize) {
        if self.periodic {
            (i, (i + 1) % self.n)
        } else {
            (i, i + 1)
        }
    }

    /// Index of the sample nearest `t`.
    pub fn nearest(&self, t: f64) -> usize {
        (0..self.n)
            .min_by(|&a, &b| (self.sample(a) - t).abs().total_cmp(&(self.sample(b) - t).abs()))
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "axis resolution must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!("invalid axis range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    /// Pose section for one working mode; `y` is the fixed off-section coordinate.
    Workspace { wm: WorkingMode, y: f64 },
    /// Actuator section `(ρ2, ρ3)` at fixed `ρ1`.
    JointSpace { rho1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub mode: OperationMode,
    pub kind: MapKind,
    pub u: AxisSpec,
    pub v: AxisSpec,
    pub tol: Tolerances,
}

/// Pose coordinates spanned by a mode's workspace section.
pub fn section_coords(mode: OperationMode) -> (Coord, Coord) {
    match mode {
        OperationMode::One => (Coord::X, Coord::Z),
        OperationMode::Two | OperationMode::Three => (Coord::X, Coord::Alpha),
        OperationMode::Four => (Coord::Z, Coord::Alpha),
    }
}

impl GridSpec {
    /// Workspace section at `y = 0` with default ranges and `res × res` cells.
    pub fn workspace(mode: OperationMode, wm: WorkingMode, res: usize) -> Self {
        let r = DEFAULT_POSE_RANGE;
        let (_, second) = section_coords(mode);
        let v = if second == Coord::Alpha {
            AxisSpec::angle(res)
        } else {
            AxisSpec::linear(-r, r, res)
        };
        Self {
            mode,
            kind: MapKind::Workspace { wm, y: 0.0 },
            u: AxisSpec::linear(-r, r, res),
            v,
            tol: Tolerances::default(),
        }
    }

    /// Joint-space slice at `ρ1 = 0` with default ranges and `res × res` cells.
    pub fn jointspace(mode: OperationMode, res: usize) -> Self {
        let r = DEFAULT_JOINT_RANGE;
        Self {
            mode,
            kind: MapKind::JointSpace { rho1: 0.0 },
            u: AxisSpec::linear(-r, r, res),
            v: AxisSpec::linear(-r, r, res),
            tol: Tolerances::default(),
        }
    }

    pub fn with_linear_range(mut self, lo: f64, hi: f64) -> Self {
        self.u.lo = lo;
        self.u.hi = hi;
        if !self.v.periodic {
            self.v.lo = lo;
            self.v.hi = hi;
        }
        self
    }

    pub fn axis_names(&self) -> (&'static str, &'static str) {
        match self.kind {
            MapKind::Workspace { .. } => {
                let (a, b) = section_coords(self.mode);
                (a.name(), b.name())
            }
            MapKind::JointSpace { .. } => ("rho2", "rho3"),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.u.n * self.v.n
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.v.n + j
    }

    /// Pose at section coordinates `(a, b)`.
    pub fn pose_at(&self, a: f64, b: f64) -> Pose {
        let y = match self.kind {
            MapKind::Workspace { y, .. } => y,
            MapKind::JointSpace { .. } => 0.0,
        };
        let (ca, cb) = section_coords(self.mode);
        Pose::default().with(Coord::Y, y).with(ca, a).with(cb, b)
    }

    fn validate(&self, system: &ConstraintSystem) -> Result<()> {
        if system.mode != self.mode {
            return Err(Error::SpecMismatch(format!(
                "grid is for mode {} but the system is mode {}",
                self.mode, system.mode
            )));
        }
        self.u.validate()?;
        self.v.validate()?;
        let want_periodic = matches!(self.kind, MapKind::Workspace { .. }) && self.mode.has_rotation();
        if self.u.periodic || self.v.periodic != want_periodic {
            return Err(Error::SpecMismatch("only the angle axis may be periodic".into()));
        }
        if self.v.periodic && (self.v.lo != -std::f64::consts::PI || self.v.hi != std::f64::consts::PI) {
            return Err(Error::SpecMismatch("the angle axis must span (-pi, pi]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub feasible: bool,
    /// Sign of `det A` at the cell center under the relative tolerance; 0 when infeasible.
    pub det_sign: i8,
    /// Feasible cell on the workspace boundary: a corner or 4-neighbor is out of reach.
    pub serial: bool,
    /// Feasible cell whose corners disagree with the center sign (a parallel singularity crosses it).
    pub straddles: bool,
    /// `min_i |B_ii|` at the center; infinite when infeasible.
    pub min_abs_b: f64,
    /// Number of real forward-kinematics solutions (joint-space maps).
    pub n_fk: u8,
    pub aspect: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub spec: GridSpec,
    /// Row-major: `cells[i * v.n + j]` for `u` sample `i`, `v` sample `j`.
    pub cells: Vec<Cell>,
}

impl GridMap {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[self.spec.index(i, j)]
    }

    pub fn feasible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.feasible).count()
    }
}

/// `(det A sign, min |B_ii|)` at a pose, or `None` when out of reach.
fn evaluate_pose(system: &ConstraintSystem, wm: WorkingMode, pose: &Pose, tol: &Tolerances) -> Option<(i8, f64)> {
    let ik = inverse_kinematics(system, pose, wm).ok()?;
    let jac = jacobians_unchecked(system, pose, &ik.joints);
    let min_b = jac.b_diag.iter().fold(f64::INFINITY, |m, b| m.min(b.abs()));
    Some((jac.det_a_sign(tol.parallel), min_b))
}

/// Neighbor indices of sample `j` along an axis, wrapping when periodic.
fn neighbors_along(axis: &AxisSpec, j: usize) -> impl Iterator<Item = usize> {
    let n = axis.n;
    let prev = if j > 0 {
        Some(j - 1)
    } else {
        axis.periodic.then_some(n - 1)
    };
    let next = if j + 1 < n {
        Some(j + 1)
    } else {
        axis.periodic.then_some(0)
    };
    prev.into_iter().chain(next)
}

pub fn workspace_map(system: &ConstraintSystem, spec: &GridSpec) -> Result<GridMap> {
    spec.validate(system)?;
    let MapKind::Workspace { wm, .. } = spec.kind else {
        return Err(Error::SpecMismatch("expected a workspace grid".into()));
    };
    let (u, v) = (spec.u, spec.v);

    let centers: Vec<Option<(i8, f64)>> = (0..spec.cell_count())
        .into_par_iter()
        .map(|k| {
            let pose = spec.pose_at(u.sample(k / v.n), v.sample(k % v.n));
            evaluate_pose(system, wm, &pose, &spec.tol)
        })
        .collect();

    let (cu, cv) = (u.corner_count(), v.corner_count());
    let corners: Vec<Option<(i8, f64)>> = (0..cu * cv)
        .into_par_iter()
        .map(|k| {
            let pose = spec.pose_at(u.corner(k / cv), v.corner(k % cv));
            evaluate_pose(system, wm, &pose, &spec.tol)
        })
        .collect();

    let cells = (0..spec.cell_count())
        .map(|k| {
            let (i, j) = (k / v.n, k % v.n);
            let Some((sign, min_b)) = centers[k] else {
                return Cell {
                    min_abs_b: f64::INFINITY,
                    ..Cell::default()
                };
            };
            let (i0, i1) = u.corners_of(i);
            let (j0, j1) = v.corners_of(j);
            let mut serial = [(i.wrapping_sub(1), j), (i + 1, j)]
                .into_iter()
                .chain(neighbors_along(&v, j).map(|nj| (i, nj)))
                .any(|(ni, nj)| ni < u.n && centers[ni * v.n + nj].is_none());
            let mut straddles = sign == 0;
            for (ci, cj) in [(i0, j0), (i0, j1), (i1, j0), (i1, j1)] {
                match corners[ci * cv + cj] {
                    None => serial = true,
                    Some((s, _)) if s != sign => straddles = true,
                    Some(_) => {}
                }
            }
            Cell {
                feasible: true,
                det_sign: sign,
                serial,
                straddles,
                min_abs_b: min_b,
                n_fk: 0,
                aspect: None,
            }
        })
        .collect();
    Ok(GridMap { spec: *spec, cells })
}

pub fn jointspace_map(system: &ConstraintSystem, spec: &GridSpec) -> Result<GridMap> {
    spec.validate(system)?;
    let MapKind::JointSpace { rho1 } = spec.kind else {
        return Err(Error::SpecMismatch("expected a joint-space grid".into()));
    };
    let (u, v) = (spec.u, spec.v);
    let cells = (0..spec.cell_count())
        .into_par_iter()
        .map(|k| {
            let joints = JointInput::new(rho1, u.sample(k / v.n), v.sample(k % v.n));
            let n = forward_kinematics(system, &joints).map(|s| s.len()).unwrap_or(0);
            Cell {
                feasible: n > 0,
                n_fk: n as u8,
                min_abs_b: f64::INFINITY,
                ..Cell::default()
            }
        })
        .collect();
    Ok(GridMap { spec: *spec, cells })
}
