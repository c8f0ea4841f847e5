//! Reachability of each planar mode's aspects from the home line.
//!
//! Switching out of the translational mode happens on a line through the home
//! pose: `z = 0, α = 0` for modes 2 and 3, `x = 0, α = 0` for mode 4, with
//! `y = 0` fixed by the y-shift symmetry. The aspects that line crosses are
//! the ones reachable after the switch.

use crate::error::{Error, Result};
use crate::kinematics::{inverse_kinematics, Sign, WorkingMode};
use crate::model::{build_system, ConstraintSystem, Coord, DesignParams, OperationMode, Pose, Preset};
use crate::singularity::parallel_factor_values;

use super::{label_aspects, workspace_map, GridSpec};

pub const BISECTION_TOL: f64 = 1e-12;

/// Line `pose(t) = base` with `coord = t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomeLine {
    pub coord: Coord,
    pub base: Pose,
}

impl HomeLine {
    pub fn for_mode(mode: OperationMode) -> Self {
        let coord = match mode {
            OperationMode::Four => Coord::Z,
            _ => Coord::X,
        };
        Self {
            coord,
            base: Pose::default(),
        }
    }

    pub fn pose(&self, t: f64) -> Pose {
        self.base.with(self.coord, t)
    }

    /// Constraints that pin the line, e.g. `z = 0, alpha = 0`.
    pub fn constraints(&self, mode: OperationMode) -> String {
        let fixed = mode.inactive_coord();
        format!("{} = 0, alpha = 0, y = 0", fixed.name())
    }
}

/// Working mode used for each target mode's transition analysis. Mode 4 takes
/// `(+,+,-)`: along its home line the two angle-free legs then sit on opposite
/// branches, which is the configuration whose boundary the closed form describes.
pub fn default_transition_wm(mode: OperationMode) -> WorkingMode {
    match mode {
        OperationMode::Four => WorkingMode([Sign::Plus, Sign::Plus, Sign::Minus]),
        _ => WorkingMode::PPP,
    }
}

/// Root of the parallel-singularity factor that changes sign over `bracket`
/// along `line`, by bisection to `tol`.
pub fn find_boundary_root(
    system: &ConstraintSystem,
    wm: WorkingMode,
    line: &HomeLine,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let factors = |t: f64| -> Result<Vec<f64>> {
        let pose = line.pose(t);
        let ik = inverse_kinematics(system, &pose, wm)?;
        Ok(parallel_factor_values(system, &pose, &ik.joints))
    };
    let (mut lo, mut hi) = bracket;
    let f_lo = factors(lo)?;
    let f_hi = factors(hi)?;
    let Some(k) = (0..f_lo.len()).find(|&k| f_lo[k] == 0.0 || f_hi[k] == 0.0 || (f_lo[k] < 0.0) != (f_hi[k] < 0.0))
    else {
        return Err(Error::NoSignChange { lo, hi });
    };
    if f_lo[k] == 0.0 {
        return Ok(lo);
    }
    if f_hi[k] == 0.0 {
        return Ok(hi);
    }
    let neg_lo = f_lo[k] < 0.0;
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let f = factors(mid)?[k];
        if f == 0.0 {
            return Ok(mid);
        }
        if (f < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximal run of home-line samples sharing one aspect (or none).
#[derive(Debug, Clone, PartialEq)]
pub struct LineSegment {
    pub lo: f64,
    pub hi: f64,
    pub aspect: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransition {
    pub mode: OperationMode,
    pub wm: WorkingMode,
    pub line: HomeLine,
    pub segments: Vec<LineSegment>,
    /// Distinct aspect ids met along the line, in order of first appearance.
    pub reachable: Vec<u32>,
    /// Parallel-singularity crossings along the line, ascending.
    pub boundaries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub preset: Preset,
    pub resolution: usize,
    pub modes: Vec<ModeTransition>,
}

/// Sweep a mode's home line through its aspect labeling at `res × res`.
pub fn transition_for_mode(system: &ConstraintSystem, wm: WorkingMode, res: usize) -> Result<ModeTransition> {
    let mode = system.mode;
    if !mode.has_rotation() {
        return Err(Error::Config("transitions are defined for modes 2 to 4".into()));
    }
    let spec = GridSpec::workspace(mode, wm, res);
    let mut map = workspace_map(system, &spec)?;
    label_aspects(&mut map);
    let line = HomeLine::for_mode(mode);
    let j0 = spec.v.nearest(0.0);

    let mut segments: Vec<LineSegment> = Vec::new();
    let mut reachable = Vec::new();
    for i in 0..spec.u.n {
        let t = spec.u.sample(i);
        let aspect = map.cell(i, j0).aspect;
        if let Some(a) = aspect {
            if !reachable.contains(&a) {
                reachable.push(a);
            }
        }
        match segments.last_mut() {
            Some(s) if s.aspect == aspect => s.hi = t,
            _ => segments.push(LineSegment { lo: t, hi: t, aspect }),
        }
    }

    // bracket every sign change of det A between feasible samples of one reachable stretch
    let mut boundaries = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for i in 0..spec.u.n {
        let cell = map.cell(i, j0);
        if !cell.feasible {
            last = None;
            continue;
        }
        if cell.det_sign == 0 {
            continue;
        }
        let t = spec.u.sample(i);
        if let Some((t0, s0)) = last {
            if s0 != cell.det_sign {
                match find_boundary_root(system, wm, &line, (t0, t), BISECTION_TOL) {
                    Ok(r) => boundaries.push(r),
                    Err(Error::NoSignChange { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        last = Some((t, cell.det_sign));
    }

    Ok(ModeTransition {
        mode,
        wm,
        line,
        segments,
        reachable,
        boundaries,
    })
}

pub fn transition_report(params: DesignParams, preset: Preset, resolution: usize) -> Result<TransitionReport> {
    let modes = [OperationMode::Two, OperationMode::Three, OperationMode::Four]
        .into_iter()
        .map(|mode| {
            let system = build_system(mode, params, preset)?;
            transition_for_mode(&system, default_transition_wm(mode), resolution)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionReport {
        preset,
        resolution,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(mode: OperationMode, preset: Preset) -> ConstraintSystem {
        build_system(mode, DesignParams::default(), preset).unwrap()
    }

    /// Mode-4 first factor on the home line in closed form:
    /// `5z(u + w) − 4u` with the leg-2/leg-3 radicands `u²`, `w²`.
    fn mode4_line_oracle(z: f64, c2: f64, c3: f64) -> f64 {
        let u = (c2 - 400.0 * z * z).sqrt();
        let w = (c3 + 640.0 * z - 400.0 * z * z).sqrt();
        5.0 * z * (u + w) - 4.0 * u
    }

    fn brent_like(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        // plain regula falsi with Illinois modification, independent of the library bisection
        let (mut flo, mut fhi) = (f(lo), f(hi));
        let mut side = 0;
        for _ in 0..200 {
            let m = (lo * fhi - hi * flo) / (fhi - flo);
            let fm = f(m);
            if fm == 0.0 || (hi - lo).abs() < 1e-15 {
                return m;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = m;
                flo = fm;
                if side == -1 {
                    fhi /= 2.0;
                }
                side = -1;
            } else {
                hi = m;
                fhi = fm;
                if side == 1 {
                    flo /= 2.0;
                }
                side = 1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn mode_two_root() {
        let s = sys(OperationMode::Two, Preset::Consistent);
        let line = HomeLine::for_mode(OperationMode::Two);
        let r = find_boundary_root(&s, WorkingMode::PPP, &line, (-0.5, 0.0), BISECTION_TOL).unwrap();
        assert!((r + 0.225).abs() < 1e-10, "{r}");
    }

    #[test]
    fn mode_four_roots_match_closed_form() {
        let line = HomeLine::for_mode(OperationMode::Four);
        let wm = default_transition_wm(OperationMode::Four);

        let s = sys(OperationMode::Four, Preset::Consistent);
        let r = find_boundary_root(&s, wm, &line, (0.3, 0.5), BISECTION_TOL).unwrap();
        let want = brent_like(|z| mode4_line_oracle(z, 391.0, 144.0), 0.3, 0.5);
        assert!((r - want).abs() < 1e-9, "{r} vs {want}");
        assert!((r - 0.39772432584033546).abs() < 1e-9);

        let s = sys(OperationMode::Four, Preset::PaperIkMode4);
        let r = find_boundary_root(&s, wm, &line, (0.3, 0.5), BISECTION_TOL).unwrap();
        let want = 528.0 / 35.0 - 8.0 * 165f64.sqrt() / 7.0;
        assert!((r - want).abs() < 1e-9, "{r} vs {want}");
        assert!(mode4_line_oracle(want, 396.0, 119.0).abs() < 1e-9);
    }

    #[test]
    fn no_sign_change() {
        let s = sys(OperationMode::Two, Preset::Consistent);
        let line = HomeLine::for_mode(OperationMode::Two);
        let r = find_boundary_root(&s, WorkingMode::PPP, &line, (0.0, 0.3), BISECTION_TOL);
        assert_eq!(r, Err(Error::NoSignChange { lo: 0.0, hi: 0.3 }));
    }

    #[test]
    fn line_constraints_text() {
        let l = HomeLine::for_mode(OperationMode::Four);
        assert_eq!(l.constraints(OperationMode::Four), "x = 0, alpha = 0, y = 0");
        assert_eq!(l.pose(0.4), Pose::new(0.0, 0.0, 0.4, 0.0));
        let l = HomeLine::for_mode(OperationMode::Two);
        assert_eq!(l.constraints(OperationMode::Two), "z = 0, alpha = 0, y = 0");
    }

    #[test]
    fn report_at_low_resolution() {
        let rep = transition_report(DesignParams::default(), Preset::Consistent, 128).unwrap();
        assert_eq!(rep.modes.len(), 3);
        let m2 = &rep.modes[0];
        assert_eq!(m2.reachable.len(), 2);
        assert_eq!(m2.boundaries.len(), 1);
        assert!((m2.boundaries[0] + 0.225).abs() < 1e-9);
        let m3 = &rep.modes[1];
        assert_eq!(m3.reachable.len(), 1);
        assert!(m3.boundaries.is_empty());
        let m4 = &rep.modes[2];
        assert_eq!(m4.boundaries.len(), 1);
        assert!((m4.boundaries[0] - 0.39772432584033546).abs() < 1e-9);
    }
}
