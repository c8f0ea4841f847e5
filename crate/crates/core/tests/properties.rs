use pipir::kinematics::{branch_signature, forward_kinematics, inverse_kinematics, WorkingMode};
use pipir::model::{build_system, ConstraintSystem, Coord, DesignParams, JointInput, OperationMode, Pose, Preset};
use pipir::singularity::{jacobians, parallel_factor_scale, parallel_factor_values};
use proptest::prelude::*;

fn sys(mode: OperationMode) -> ConstraintSystem {
    build_system(mode, DesignParams::default(), Preset::Consistent).unwrap()
}

fn mode_strategy() -> impl Strategy<Value = OperationMode> {
    prop::sample::select(OperationMode::ALL.to_vec())
}

fn wm_strategy() -> impl Strategy<Value = WorkingMode> {
    prop::sample::select(WorkingMode::all().to_vec())
}

/// Active coordinates drawn over a box that mostly lies inside the workspace.
fn active_strategy() -> impl Strategy<Value = [f64; 3]> {
    (-0.9..0.9f64, -1.0..1.0f64, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(a, b, c)| [a, b, c])
}

/// Pose for a mode from three draws: first position coordinate, y, and the
/// third slot (z for mode 1, α otherwise).
fn pose_for(mode: OperationMode, v: [f64; 3]) -> Pose {
    match mode {
        OperationMode::One => Pose::new(v[0], v[1], v[2].abs() / std::f64::consts::PI * 0.9, 0.0),
        OperationMode::Two | OperationMode::Three => Pose::new(v[0], v[1], 0.0, v[2]),
        OperationMode::Four => Pose::new(0.0, v[1], v[0].abs(), v[2]),
    }
}

/// The constraint equations written out by hand at default parameters.
fn printed_residual(mode: OperationMode, p: &Pose, j: &JointInput) -> [f64; 3] {
    let Pose { x, y, z, alpha } = *p;
    let [r1, r2, r3] = j.rho;
    let (s, c) = alpha.sin_cos();
    let sq = |v: f64| v * v;
    match mode {
        OperationMode::One => [
            sq(x + 0.15) + sq(y - r1) + sq(z) - 1.0,
            sq(x - 0.15) + sq(y - r2) + sq(z) - 1.0,
            sq(x) + sq(y - r3) + sq(z - 0.8) - 1.0,
        ],
        OperationMode::Two => [
            sq(x - c / 10.0 + 0.25) + sq(y - s / 10.0 - r1) - 1.0,
            sq(x - 0.15) + sq(y - r2) - 1.0,
            sq(x) + sq(y - r3) - 9.0 / 25.0,
        ],
        OperationMode::Three => [
            sq(x + 0.15) + sq(y - r1) - 1.0,
            sq(x - 0.15) + sq(y - r2) - 1.0,
            sq(x) + sq(y + s / 10.0 - r3) + sq(c / 10.0 - 0.9) - 1.0,
        ],
        OperationMode::Four => [
            sq(-c / 10.0 + 0.25) + sq(y - s / 10.0 - r1) + sq(z) - 1.0,
            sq(y - r2) + sq(z) - 391.0 / 400.0,
            sq(y - r3) + sq(z - 0.8) - 1.0,
        ],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn residual_matches_written_equations(mode in mode_strategy(), v in active_strategy(), r in prop::array::uniform3(-2.0..2.0f64)) {
        let s = sys(mode);
        let pose = pose_for(mode, v);
        let j = JointInput { rho: r };
        let got = s.residual(&pose, &j);
        let want = printed_residual(mode, &pose, &j);
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_is_invariant_under_y_shift(mode in mode_strategy(), v in active_strategy(), r in prop::array::uniform3(-2.0..2.0f64), d in -3.0..3.0f64) {
        let s = sys(mode);
        let pose = pose_for(mode, v);
        let j = JointInput { rho: r };
        let a = s.residual(&pose, &j);
        let b = s.residual(&pose.with(Coord::Y, pose.y + d), &j.shifted(d));
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn ik_solves_and_keeps_branch(mode in mode_strategy(), v in active_strategy(), wm in wm_strategy()) {
        let s = sys(mode);
        let pose = pose_for(mode, v);
        let Ok(ik) = inverse_kinematics(&s, &pose, wm) else { return Ok(()) };
        prop_assert!(s.max_residual(&pose, &ik.joints) < 1e-10);
        if !ik.boundary.iter().any(|&b| b) {
            prop_assert_eq!(branch_signature(&s, &pose, &ik.joints), Some(wm));
        }
        let jac = jacobians(&s, &pose, &ik.joints).unwrap();
        // B_ii = 2σ_i √D_i
        for (i, leg) in s.legs.iter().enumerate() {
            let (_, d) = leg.rho_quadratic(&pose);
            prop_assert!((jac.b_diag[i] - 2.0 * wm.0[i].value() * d.max(0.0).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn fk_recovers_ik_pose(mode in mode_strategy(), v in active_strategy(), wm in wm_strategy()) {
        let s = sys(mode);
        let pose = pose_for(mode, v);
        let Ok(ik) = inverse_kinematics(&s, &pose, wm) else { return Ok(()) };
        let fk = forward_kinematics(&s, &ik.joints).unwrap();
        prop_assert!(fk.contains(&pose, mode, 1e-8), "{:?}", fk);
    }

    #[test]
    fn fk_solution_set_is_well_formed(mode in mode_strategy(), r in prop::array::uniform3(-2.5..2.5f64)) {
        let s = sys(mode);
        let j = JointInput { rho: r };
        let fk = forward_kinematics(&s, &j).unwrap();
        let cap = if mode == OperationMode::One { 2 } else { 4 };
        prop_assert!(fk.len() <= cap);
        for (a, sa) in fk.solutions.iter().enumerate() {
            prop_assert!(sa.max_residual < 1e-9);
            prop_assert!(s.max_residual(&sa.pose, &j) < 1e-9);
            prop_assert!(sa.pose.alpha > -std::f64::consts::PI && sa.pose.alpha <= std::f64::consts::PI);
            for sb in &fk.solutions[a + 1..] {
                prop_assert!(sa.pose.distance(&sb.pose, mode) > 1e-8);
            }
        }
    }

    #[test]
    fn jacobians_satisfy_velocity_relation(mode in mode_strategy(), v in active_strategy(), wm in wm_strategy(), rate in prop::array::uniform3(-1.0..1.0f64)) {
        let s = sys(mode);
        let pose = pose_for(mode, v);
        let Ok(ik) = inverse_kinematics(&s, &pose, wm) else { return Ok(()) };
        let jac = jacobians(&s, &pose, &ik.joints).unwrap();
        prop_assume!(jac.b_diag.iter().all(|b| b.abs() > 1e-3));
        let pdot = nalgebra::Vector3::from(rate);
        let rhodot = -(jac.a * pdot).component_div(&jac.b_diag);
        let eps = 1e-5;
        let mut moved = pose;
        for (k, c) in mode.active_coords().into_iter().enumerate() {
            moved.set(c, pose.get(c) + eps * pdot[k]);
        }
        let j2 = JointInput { rho: std::array::from_fn(|i| ik.joints.rho[i] + eps * rhodot[i]) };
        let scale = 1.0 + rhodot.amax();
        prop_assert!(s.max_residual(&moved, &j2) < 1e-6 * scale * scale);
    }

    #[test]
    fn determinant_factorizes(mode in prop::sample::select(vec![OperationMode::Two, OperationMode::Three, OperationMode::Four]),
                              preset in prop::sample::select(vec![Preset::Consistent, Preset::PaperIkMode4]),
                              v in active_strategy(), wm in wm_strategy()) {
        let s = build_system(mode, DesignParams::default(), preset).unwrap();
        let pose = pose_for(mode, v);
        let Ok(ik) = inverse_kinematics(&s, &pose, wm) else { return Ok(()) };
        let det = jacobians(&s, &pose, &ik.joints).unwrap().det_a();
        let f = parallel_factor_values(&s, &pose, &ik.joints);
        let k = parallel_factor_scale(&s).unwrap();
        prop_assert!(k > 0.0);
        prop_assert!((det - k * f[0] * f[1]).abs() < 1e-12 * (1.0 + det.abs()));
    }

    #[test]
    fn pose_angles_are_normalized(a in -100.0..100.0f64) {
        let p = Pose::new(0.0, 0.0, 0.0, a);
        prop_assert!(p.alpha > -std::f64::consts::PI && p.alpha <= std::f64::consts::PI);
        prop_assert!((p.alpha.sin() - a.sin()).abs() < 1e-9 && (p.alpha.cos() - a.cos()).abs() < 1e-9);
    }
}

#[test]
fn serial_singularity_approached_along_rays() {
    // shrinking distance to the reach limit drives min |B_ii| to zero
    let s = sys(OperationMode::One);
    let dir = [0.6, 0.0, 0.8];
    let at = |t: f64| Pose::new(dir[0] * t, 0.0, dir[2] * t, 0.0);
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inverse_kinematics(&s, &at(mid), WorkingMode::PPP).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut last = f64::INFINITY;
    for k in 1..=8 {
        let pose = at(lo - 10f64.powi(-k));
        let ik = inverse_kinematics(&s, &pose, WorkingMode::PPP).unwrap();
        let b = jacobians(&s, &pose, &ik.joints).unwrap().b_diag.amin();
        assert!(b < last);
        last = b;
    }
    assert!(last < 1e-3);
}
