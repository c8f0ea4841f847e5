//! Kinematics of a reconfigurable 3-PRPiR parallel robot whose
//! lockable joints select one of four operation modes.
//!
//! Every leg is modelled as a sum of three squared linear forms in the pose,
//! `cos α`, `sin α` and the actuator coordinate. Inverse and forward
//! kinematics, the Jacobians and the workspace maps all work from that one
//! representation.
//!
//! ```
//! use pipir::{build_system, classify, forward_kinematics, inverse_kinematics};
//! use pipir::{DesignParams, OperationMode, Pose, Preset, SingularityKind, Tolerances, WorkingMode};
//!
//! let sys = build_system(OperationMode::Two, DesignParams::default(), Preset::Consistent)?;
//! let pose = Pose::new(0.1, 0.2, 0.0, 0.3);
//! let ik = inverse_kinematics(&sys, &pose, WorkingMode::PPP)?;
//! let fk = forward_kinematics(&sys, &ik.joints)?;
//! assert!(fk.solutions.len() <= 4);
//! let verdict = classify(&sys, &pose, &ik.joints, &Tolerances::default())?;
//! assert_eq!(verdict.kind, SingularityKind::Regular);
//! # Ok::<(), pipir::Error>(())
//! ```

pub mod error;
pub mod kinematics;
pub mod model;
pub mod singularity;
pub mod workspace;

pub use error::{Error, Result};
pub use kinematics::{
    enumerate_ik, forward_kinematics, inverse_kinematics, FkSolution, FkSolutionSet, IkSolution, Sign, WorkingMode,
};
pub use model::{build_system, ConstraintSystem, Coord, DesignParams, JointInput, OperationMode, Pose, Preset};
pub use singularity::{classify, jacobians, JacobianPair, SingularityKind, SingularityVerdict, Tolerances};
pub use workspace::{
    jointspace_map, label_aspects, transition_report, workspace_map, GridMap, GridSpec, TransitionReport,
};
