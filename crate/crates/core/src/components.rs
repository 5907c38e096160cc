//! Component-level analyses: chain recurrent boxes, terminal components,
//! chain stability, graph periods, and the periodic/odometer signature of
//! terminal components across refinements.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::chain_graph::{
    build_chain_graph, scc_decompose, ChainDecomposition, ChainGraphParams, ComponentId,
};
use crate::error::{Error, Result};
use crate::phase_space::{subdivide, BoxId, BoxSet, Grid, Point};
use crate::systems::SystemDef;

/// Box count allowed per period point for a component to look periodic.
pub const PERIODIC_BOX_FACTOR: usize = 8;

/// Union of the boxes of all cyclic components.
pub fn chain_recurrent_boxes(dec: &ChainDecomposition) -> BoxSet {
    dec.component_ids()
        .filter(|&c| dec.has_cycle(c))
        .flat_map(|c| dec.boxes(c).iter().copied())
        .collect()
}

/// Sinks of the condensation.
pub fn terminal_components(dec: &ChainDecomposition) -> Vec<ComponentId> {
    let out: Vec<ComponentId> = dec
        .component_ids()
        .filter(|&c| dec.is_terminal(c))
        .collect();
    debug_assert!(out
        .iter()
        .all(|&c| dec.has_cycle(c) && dec.successors(c).is_empty()));
    out
}

/// Components reachable from `c` in the condensation, `c` included.
fn component_reach(dec: &ChainDecomposition, c: ComponentId) -> Vec<bool> {
    let mut seen = vec![false; dec.component_count()];
    seen[c.index()] = true;
    let mut queue = VecDeque::from([c]);
    while let Some(x) = queue.pop_front() {
        for &d in dec.successors(x) {
            if !seen[d.index()] {
                seen[d.index()] = true;
                queue.push_back(d);
            }
        }
    }
    seen
}

/// Cyclic components `C` such that `C <= D` implies `C = D` for every cyclic
/// `D`, where `C <= D` means some box of `D` is reachable from `C`.
pub fn maximal_components(dec: &ChainDecomposition) -> Vec<ComponentId> {
    dec.component_ids()
        .filter(|&c| dec.has_cycle(c))
        .filter(|&c| {
            let reach = component_reach(dec, c);
            dec.component_ids()
                .all(|d| d == c || !reach[d.index()] || !dec.has_cycle(d))
        })
        .collect()
}

/// Whether every chain starting in `c` stays within `eps_boxes` cells of
/// `c`, measured by lattice dilation of the component on its grid.
///
/// On a bare graph there is no metric and the neighbourhood is `c` itself.
pub fn verify_chain_stability(
    dec: &ChainDecomposition,
    c: ComponentId,
    eps_boxes: u32,
) -> Result<bool> {
    dec.check(c)?;
    let own = dec.box_set(c);
    let allowed = match dec.grid() {
        Some(grid) => grid.dilate(&own, eps_boxes),
        None => own.clone(),
    };
    let reach = dec
        .graph()
        .reach_mask(&own.to_mask(dec.graph().node_count()));
    let allowed = allowed.to_mask(reach.len());
    Ok(reach.iter().zip(&allowed).all(|(&r, &a)| !r || a))
}

/// Terminal, `<=`-maximal and chain-stable-at-zero pick out the same
/// cyclic components.
pub fn terminal_notions_agree(dec: &ChainDecomposition) -> bool {
    let terminal = terminal_components(dec);
    let maximal = maximal_components(dec);
    let stable: Vec<ComponentId> = dec
        .component_ids()
        .filter(|&c| dec.has_cycle(c) && verify_chain_stability(dec, c, 0).unwrap_or(false))
        .collect();
    terminal == maximal && maximal == stable
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a cyclic component: the gcd of its cycle lengths, computed from
/// BFS levels as the gcd of `level(u) + 1 - level(v)` over internal edges.
pub fn component_period(dec: &ChainDecomposition, c: ComponentId) -> Result<u32> {
    dec.check(c)?;
    if !dec.has_cycle(c) {
        return Err(Error::UndefinedPeriod(c.index()));
    }
    let boxes = dec.boxes(c);
    let mut level: BTreeMap<BoxId, i64> = BTreeMap::new();
    level.insert(boxes[0], 0);
    let mut queue = VecDeque::from([boxes[0]]);
    let mut g = 0u64;
    while let Some(u) = queue.pop_front() {
        let lu = level[&u];
        for v in dec.graph().successors(u) {
            if dec.component_of(v) != c {
                continue;
            }
            match level.get(&v) {
                Some(&lv) => g = gcd(g, (lu + 1 - lv).unsigned_abs()),
                None => {
                    level.insert(v, lu + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(g as u32)
}

/// Summary of one component at one resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentProfile {
    pub id: ComponentId,
    pub grid: Grid,
    pub boxes: BoxSet,
    pub period: u32,
    pub box_count: usize,
    pub is_terminal: bool,
}

impl ComponentProfile {
    pub fn new(dec: &ChainDecomposition, c: ComponentId) -> Result<Self> {
        let grid = *dec.grid().ok_or_else(|| {
            Error::Precondition("profiles need a decomposition over a grid".into())
        })?;
        let period = component_period(dec, c)?;
        let boxes = dec.box_set(c);
        Ok(ComponentProfile {
            id: c,
            grid,
            box_count: boxes.len(),
            boxes,
            period,
            is_terminal: dec.is_terminal(c),
        })
    }

    /// Total volume (length in 1D) of the component's boxes.
    pub fn measure(&self) -> f64 {
        let vol: f64 = (0..self.grid.dim()).map(|a| self.grid.width(a)).product();
        self.box_count as f64 * vol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PeriodicLike,
    OdometerLike,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalClassification {
    pub verdict: Verdict,
    pub depths: Vec<u32>,
    pub period_sequence: Vec<u32>,
    pub measure_sequence: Vec<f64>,
}

/// Ancestor of `b` at a coarser grid over the same domain.
fn ancestor(fine: &Grid, b: BoxId, coarse_depth: u32) -> BoxId {
    let cell = fine.cell_coords(b);
    let shift = fine.depth() - coarse_depth;
    let n = fine.cells_per_axis() >> shift;
    match fine.dim() {
        1 => BoxId(cell[0] >> shift),
        _ => BoxId((cell[1] >> shift) * n + (cell[0] >> shift)),
    }
}

/// Number of boxes of `fine` whose ancestor lies in `coarse`.
fn overlap(coarse: &ComponentProfile, fine_grid: &Grid, fine: &BoxSet) -> usize {
    fine.iter()
        .filter(|&&b| {
            coarse
                .boxes
                .contains(&ancestor(fine_grid, b, coarse.grid.depth()))
        })
        .count()
}

/// Classifies the profile sequence of one attractor tracked over at least
/// three increasing depths.
///
/// * `odometer_like`: the period is multiplied by an integer `>= 2` at two
///   consecutive refinements while the measure shrinks at both;
/// * `periodic_like`: otherwise, if the last two periods agree on some `p`
///   and the last two box counts are at most `PERIODIC_BOX_FACTOR * p`;
/// * `other` in every remaining case.
pub fn classify_terminal(profiles: &[ComponentProfile]) -> Result<TerminalClassification> {
    if profiles.len() < 3 {
        return Err(Error::Precondition(format!(
            "classification needs at least 3 depths, got {}",
            profiles.len()
        )));
    }
    for w in profiles.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.grid.domain() != b.grid.domain() || b.grid.depth() <= a.grid.depth() {
            return Err(Error::Tracking(format!(
                "profiles at depths {} and {} are not refinements of one grid",
                a.grid.depth(),
                b.grid.depth()
            )));
        }
        if overlap(a, &b.grid, &b.boxes) == 0 {
            return Err(Error::Tracking(format!(
                "component at depth {} is not contained in the one at depth {}",
                b.grid.depth(),
                a.grid.depth()
            )));
        }
    }
    let periods: Vec<u32> = profiles.iter().map(|p| p.period).collect();
    let measures: Vec<f64> = profiles.iter().map(ComponentProfile::measure).collect();
    let multiplies =
        |k: usize| periods[k + 1] > periods[k] && periods[k + 1].is_multiple_of(periods[k]);
    let shrinks = |k: usize| measures[k + 1] < measures[k];

    let odometer = (0..periods.len() - 2)
        .any(|k| multiplies(k) && multiplies(k + 1) && shrinks(k) && shrinks(k + 1));
    let n = periods.len();
    let p = periods[n - 1];
    let periodic = periods[n - 2] == p
        && profiles[n - 2..]
            .iter()
            .all(|pr| pr.box_count <= PERIODIC_BOX_FACTOR * p as usize);
    let verdict = if odometer {
        Verdict::OdometerLike
    } else if periodic {
        Verdict::PeriodicLike
    } else {
        Verdict::Other
    };
    Ok(TerminalClassification {
        verdict,
        depths: profiles.iter().map(|p| p.grid.depth()).collect(),
        period_sequence: periods,
        measure_sequence: measures,
    })
}

/// Chain tolerance and padding expressed relative to the grid resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// δ as a multiple of the (largest) box width.
    pub delta_boxes: f64,
    pub rigor_margin: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            delta_boxes: 1.0,
            rigor_margin: 0.0,
        }
    }
}

impl Resolution {
    pub fn params_for(&self, grid: &Grid) -> Result<ChainGraphParams> {
        ChainGraphParams::new(self.delta_boxes * grid.max_width(), self.rigor_margin)
    }

    /// Grid, chain graph and decomposition at one depth.
    pub fn decompose(&self, sys: &SystemDef, depth: u32) -> Result<ChainDecomposition> {
        let grid = subdivide(*sys.domain(), depth)?;
        let g = build_chain_graph(sys, &grid, self.params_for(&grid)?)?;
        Ok(scc_decompose(&g))
    }
}

/// Follows one terminal component through increasing depths.
///
/// At the first depth the terminal component nearest to `anchor` is chosen
/// (or the only one, when `anchor` is `None`). Each later depth picks the
/// terminal component with the most boxes inside the previous one, ties
/// going to the smaller id.
pub fn track_terminal(
    sys: &SystemDef,
    depths: &[u32],
    resolution: &Resolution,
    anchor: Option<Point>,
) -> Result<Vec<ComponentProfile>> {
    let mut out: Vec<ComponentProfile> = Vec::with_capacity(depths.len());
    for &depth in depths {
        let dec = resolution.decompose(sys, depth)?;
        let grid = *dec.grid().expect("grid decomposition");
        let terminals = terminal_components(&dec);
        let chosen = match out.last() {
            None => match anchor {
                Some(p) => {
                    let dist = |c: ComponentId| {
                        dec.boxes(c)
                            .iter()
                            .map(|&b| grid.point_box_distance(&p, b))
                            .fold(f64::INFINITY, f64::min)
                    };
                    terminals
                        .iter()
                        .copied()
                        .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
                        .ok_or_else(|| Error::Tracking("no terminal component".into()))?
                }
                None if terminals.len() == 1 => terminals[0],
                None => {
                    return Err(Error::Tracking(format!(
                        "{} terminal components at depth {depth}; an anchor point is needed",
                        terminals.len()
                    )))
                }
            },
            Some(prev) => {
                let scored: Vec<(usize, ComponentId)> = terminals
                    .iter()
                    .map(|&c| (overlap(prev, &grid, &dec.box_set(c)), c))
                    .collect();
                let best = scored
                    .iter()
                    .filter(|(n, _)| *n > 0)
                    .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
                match best {
                    Some(&(_, c)) => c,
                    None => {
                        return Err(Error::Tracking(format!(
                            "no terminal component at depth {depth} lies inside the tracked one"
                        )))
                    }
                }
            }
        };
        out.push(ComponentProfile::new(&dec, chosen)?);
    }
    Ok(out)
}
