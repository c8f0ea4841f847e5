//! Connected-component analysis on grid maps.

use std::collections::{BTreeSet, VecDeque};

use super::GridMap;

const NEIGHBORS_8: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Grid topology: a rectangle, optionally wrapped along the second axis.
#[derive(Debug, Clone, Copy)]
struct Topology {
    nu: usize,
    nv: usize,
    wrap_v: bool,
}

impl Topology {
    fn of(map: &GridMap) -> Self {
        Self {
            nu: map.spec.u.n,
            nv: map.spec.v.n,
            wrap_v: map.spec.v.periodic,
        }
    }

    fn neighbors<'a>(&self, k: usize, offsets: &'a [(isize, isize)]) -> impl Iterator<Item = usize> + 'a {
        let t = *self;
        let (i, j) = ((k / t.nv) as isize, (k % t.nv) as isize);
        offsets.iter().filter_map(move |&(di, dj)| {
            let ni = i + di;
            if ni < 0 || ni >= t.nu as isize {
                return None;
            }
            let mut nj = j + dj;
            if t.wrap_v {
                nj = nj.rem_euclid(t.nv as isize);
            } else if nj < 0 || nj >= t.nv as isize {
                return None;
            }
            Some(ni as usize * t.nv + nj as usize)
        })
    }

    fn on_border(&self, k: usize) -> bool {
        let (i, j) = (k / self.nv, k % self.nv);
        i == 0 || i + 1 == self.nu || (!self.wrap_v && (j == 0 || j + 1 == self.nv))
    }
}

/// Component labels over cells where `member` holds, in scan order. Cells
/// join when `same(a, b)` holds for adjacent members.
fn components(
    topo: Topology,
    offsets: &[(isize, isize)],
    member: impl Fn(usize) -> bool,
    same: impl Fn(usize, usize) -> bool,
) -> (Vec<Option<u32>>, u32) {
    let n = topo.nu * topo.nv;
    let mut label = vec![None; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start].is_some() || !member(start) {
            continue;
        }
        label[start] = Some(next);
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            for nb in topo.neighbors(k, offsets) {
                if label[nb].is_none() && member(nb) && same(k, nb) {
                    label[nb] = Some(next);
                    queue.push_back(nb);
                }
            }
        }
        next += 1;
    }
    (label, next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aspect {
    pub id: u32,
    /// Sign of `det A` throughout the aspect.
    pub sign: i8,
    pub cells: usize,
    /// Inclusive sample-index bounds `(i_min, i_max, j_min, j_max)`.
    pub bbox: (usize, usize, usize, usize),
    /// Some cell borders a singular (straddling) cell.
    pub touches_parallel: bool,
    /// Some cell lies on the workspace boundary.
    pub touches_serial: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AspectLabeling {
    pub aspects: Vec<Aspect>,
}

impl AspectLabeling {
    pub fn count(&self) -> usize {
        self.aspects.len()
    }
}

/// Flood fill over singularity-free cells, 8-connected, wrapping on the angle
/// axis. A cell joins an aspect only when it is feasible, its center sign is
/// nonzero and no feasible corner disagrees with it; the rest form barriers.
/// Writes `aspect` into every cell and returns the per-aspect summary.
pub fn label_aspects(map: &mut GridMap) -> AspectLabeling {
    let topo = Topology::of(map);
    let cells = &map.cells;
    let (labels, count) = components(
        topo,
        &NEIGHBORS_8,
        |k| cells[k].feasible && cells[k].det_sign != 0 && !cells[k].straddles,
        |a, b| cells[a].det_sign == cells[b].det_sign,
    );

    let mut aspects: Vec<Aspect> = (0..count)
        .map(|id| Aspect {
            id,
            sign: 0,
            cells: 0,
            bbox: (usize::MAX, 0, usize::MAX, 0),
            touches_parallel: false,
            touches_serial: false,
        })
        .collect();
    for (k, l) in labels.iter().enumerate() {
        let Some(id) = *l else { continue };
        let (i, j) = (k / topo.nv, k % topo.nv);
        let a = &mut aspects[id as usize];
        a.sign = cells[k].det_sign;
        a.cells += 1;
        a.bbox = (a.bbox.0.min(i), a.bbox.1.max(i), a.bbox.2.min(j), a.bbox.3.max(j));
        a.touches_serial |= cells[k].serial;
        a.touches_parallel |= topo
            .neighbors(k, &NEIGHBORS_8)
            .any(|nb| cells[nb].feasible && labels[nb].is_none());
    }
    for (cell, l) in map.cells.iter_mut().zip(labels) {
        cell.aspect = l;
    }
    AspectLabeling { aspects }
}

/// Number of 8-connected components of feasible cells (wrapping on the angle axis).
pub fn feasible_components(map: &GridMap) -> usize {
    let cells = &map.cells;
    components(Topology::of(map), &NEIGHBORS_8, |k| cells[k].feasible, |_, _| true).1 as usize
}

/// One connected region of a joint-space map.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub cells: usize,
    /// Bounded 4-connected components of the region's complement.
    pub holes: usize,
    /// Distinct nonzero solution counts inside the region.
    pub counts: BTreeSet<u8>,
}

/// 8-connected regions of cells with at least one forward-kinematics solution,
/// in scan order, each with its hole count.
pub fn region_summary(map: &GridMap) -> Vec<Region> {
    let topo = Topology::of(map);
    let cells = &map.cells;
    let (labels, count) = components(topo, &NEIGHBORS_8, |k| cells[k].n_fk > 0, |_, _| true);
    (0..count)
        .map(|id| {
            let inside = |k: usize| labels[k] == Some(id);
            let (outside, n_bg) = components(topo, &NEIGHBORS_4, |k| !inside(k), |_, _| true);
            let mut open = vec![false; n_bg as usize];
            for (k, l) in outside.iter().enumerate() {
                if let Some(b) = l {
                    if topo.on_border(k) {
                        open[*b as usize] = true;
                    }
                }
            }
            let members: Vec<usize> = (0..cells.len()).filter(|&k| inside(k)).collect();
            Region {
                cells: members.len(),
                holes: open.iter().filter(|o| !**o).count(),
                counts: members.iter().map(|&k| cells[k].n_fk).collect(),
            }
        })
        .collect()
}
