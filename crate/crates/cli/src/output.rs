//! Number formatting and CSV/report emission.

use std::fmt::Write as _;

use pipir::model::DesignParams;
use pipir::workspace::{GridMap, MapKind, TransitionReport};

/// Fixed-point rendering with `digits` significant digits; scientific
/// notation outside `[1e-4, 1e15)`.
pub fn fmt_num(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let mag = v.abs().log10().floor() as i32;
    let s = if !(-4..15).contains(&mag) {
        format!("{:.*e}", digits - 1, v)
    } else {
        let decimals = (digits as i32 - 1 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    };
    // "-0.000" after rounding carries no sign information
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub struct Format {
    pub digits: usize,
    pub degrees: bool,
}

impl Format {
    pub fn num(&self, v: f64) -> String {
        fmt_num(v, self.digits)
    }

    pub fn angle(&self, v: f64) -> String {
        self.num(if self.degrees { v.to_degrees() } else { v })
    }
}

fn params_header(out: &mut String, p: &DesignParams, f: &Format) {
    for (k, v) in [("d1", p.d1), ("d2", p.d2), ("d3", p.d3), ("d4", p.d4), ("l", p.l)] {
        let _ = writeln!(out, "# {k}={}", f.num(v));
    }
}

/// Workspace or joint-space map as CSV with `# key=value` header lines.
pub fn map_csv(map: &GridMap, params: &DesignParams, preset: &str, f: &Format) -> String {
    let spec = &map.spec;
    let (c1, c2) = spec.axis_names();
    let angle_v = spec.v.periodic;
    let v_val = |t: f64| if angle_v { f.angle(t) } else { f.num(t) };
    let mut out = String::new();
    let kind = match spec.kind {
        MapKind::Workspace { .. } => "workspace",
        MapKind::JointSpace { .. } => "jointspace",
    };
    let _ = writeln!(out, "# kind={kind}");
    let _ = writeln!(out, "# mode={}", spec.mode);
    match spec.kind {
        MapKind::Workspace { wm, y } => {
            let _ = writeln!(out, "# wm={wm}");
            let _ = writeln!(out, "# y={}", f.num(y));
        }
        MapKind::JointSpace { rho1 } => {
            let _ = writeln!(out, "# rho1={}", f.num(rho1));
        }
    }
    let _ = writeln!(out, "# preset={preset}");
    params_header(&mut out, params, f);
    let _ = writeln!(out, "# coord1={c1}");
    let _ = writeln!(out, "# coord1_range={},{}", f.num(spec.u.lo), f.num(spec.u.hi));
    let _ = writeln!(out, "# coord2={c2}");
    let _ = writeln!(out, "# coord2_range={},{}", v_val(spec.v.lo), v_val(spec.v.hi));
    let _ = writeln!(out, "# coord2_periodic={}", spec.v.periodic);
    let _ = writeln!(out, "# angle_unit={}", if f.degrees { "deg" } else { "rad" });
    let _ = writeln!(out, "# resolution={},{}", spec.u.n, spec.v.n);
    let _ = writeln!(out, "# tol_parallel={:e}", spec.tol.parallel);
    let _ = writeln!(out, "# tol_serial={:e}", spec.tol.serial);

    let (us, vs) = (spec.u.samples(), spec.v.samples());
    let vs: Vec<String> = vs.into_iter().map(v_val).collect();
    match spec.kind {
        MapKind::Workspace { .. } => {
            let _ = writeln!(out, "coord1,coord2,feasible,detA_sign,aspect_id");
            for (i, u) in us.iter().enumerate() {
                let u = f.num(*u);
                for (j, v) in vs.iter().enumerate() {
                    let c = map.cell(i, j);
                    let aspect = c.aspect.map(|a| a.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "{u},{v},{},{},{aspect}", u8::from(c.feasible), c.det_sign);
                }
            }
        }
        MapKind::JointSpace { .. } => {
            let _ = writeln!(out, "rho2,rho3,n_fk");
            for (i, u) in us.iter().enumerate() {
                let u = f.num(*u);
                for (j, v) in vs.iter().enumerate() {
                    let _ = writeln!(out, "{u},{v},{}", map.cell(i, j).n_fk);
                }
            }
        }
    }
    out
}

fn aspects_text(ids: &[u32]) -> String {
    if ids.is_empty() {
        "none".into()
    } else {
        ids.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
    }
}

pub fn transitions_text(rep: &TransitionReport, params: &DesignParams, f: &Format) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# preset={}", rep.preset);
    let _ = writeln!(out, "# resolution={}", rep.resolution);
    params_header(&mut out, params, f);
    for m in &rep.modes {
        let coord = m.line.coord.name();
        let _ = writeln!(
            out,
            "mode {}: wm {}, home line {}, along {coord}",
            m.mode,
            m.wm,
            m.line.constraints(m.mode)
        );
        let _ = writeln!(out, "mode {}: reachable aspects {}", m.mode, aspects_text(&m.reachable));
        if m.boundaries.is_empty() {
            let _ = writeln!(out, "mode {}: no boundary on the home line", m.mode);
        }
        for b in &m.boundaries {
            let _ = writeln!(out, "mode {}: boundary {coord} = {}", m.mode, f.num(*b));
        }
        for s in &m.segments {
            let a = s.aspect.map(|a| a.to_string()).unwrap_or_else(|| "none".into());
            let _ = writeln!(
                out,
                "mode {}: segment {coord} in [{}, {}] aspect {a}",
                m.mode,
                f.num(s.lo),
                f.num(s.hi)
            );
        }
    }
    out
}

pub fn transitions_csv(rep: &TransitionReport, params: &DesignParams, f: &Format) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# kind=transitions");
    let _ = writeln!(out, "# preset={}", rep.preset);
    let _ = writeln!(out, "# resolution={}", rep.resolution);
    params_header(&mut out, params, f);
    for m in &rep.modes {
        let _ = writeln!(out, "# wm_mode{}={}", m.mode, m.wm);
    }
    let _ = writeln!(out, "mode,record,coord,value1,value2,aspect_id");
    for m in &rep.modes {
        let coord = m.line.coord.name();
        for a in &m.reachable {
            let _ = writeln!(out, "{},reachable,{coord},,,{a}", m.mode);
        }
        for b in &m.boundaries {
            let _ = writeln!(out, "{},boundary,{coord},{},,", m.mode, f.num(*b));
        }
        for s in &m.segments {
            let a = s.aspect.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},segment,{coord},{},{},{a}", m.mode, f.num(s.lo), f.num(s.hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_num(391f64.sqrt() / 20.0, 6), "0.988686");
        assert_eq!(fmt_num(0.6, 6), "0.600000");
        assert_eq!(fmt_num(-0.225, 10), "-0.2250000000");
        assert_eq!(fmt_num(1.8982, 3), "1.90");
        assert_eq!(fmt_num(123.456, 4), "123.5");
        assert_eq!(fmt_num(0.0, 3), "0.00");
        assert_eq!(fmt_num(-1e-20, 3), "-1.00e-20");
        assert_eq!(fmt_num(-0.00001, 2), "-1.0e-5");
        assert_eq!(fmt_num(-0.0004, 1), "-0.0004");
        assert_eq!(fmt_num(-0.0, 3), "0.00");
    }
}
