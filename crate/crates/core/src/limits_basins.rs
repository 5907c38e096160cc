//! ω-limit estimates from orbits, chain ω-limit sets from graph
//! reachability, the basin partition by terminal components, and the
//! W_{j,m} membership test.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_graph::{ChainDecomposition, ComponentId};
use crate::components::Resolution;
use crate::error::{Error, Result};
use crate::phase_space::{random_point, BoxId, BoxSet, Domain, Grid, Point};
use crate::systems::SystemDef;

/// Boxes visited by `f^i(seed)` for `transient <= i < horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaEstimate {
    pub seed: Point,
    pub transient: usize,
    pub horizon: usize,
    pub boxes: BoxSet,
}

pub fn omega_estimate(
    sys: &SystemDef,
    x: &Point,
    transient: usize,
    horizon: usize,
    grid: &Grid,
) -> Result<OmegaEstimate> {
    if transient >= horizon {
        return Err(Error::Precondition(format!(
            "transient {transient} must be below horizon {horizon}"
        )));
    }
    let mut p = sys.domain().wrap(*x)?;
    let mut boxes = BoxSet::new();
    for i in 0..horizon {
        if i >= transient {
            boxes.insert(grid.box_of(&p)?);
        }
        p = sys.eval(&p);
    }
    Ok(OmegaEstimate {
        seed: *x,
        transient,
        horizon,
        boxes,
    })
}

fn cyclic_mask(dec: &ChainDecomposition) -> Vec<bool> {
    (0..dec.graph().node_count())
        .map(|b| dec.has_cycle(dec.component_of(BoxId(b as u32))))
        .collect()
}

/// Chain ω-limit of a box: everything reachable from the cyclic boxes that
/// `b` reaches. On a finite graph these are exactly the boxes reachable from
/// `b` by arbitrarily long walks.
pub fn chain_omega(dec: &ChainDecomposition, b: BoxId) -> BoxSet {
    BoxSet::from_mask(&chain_omega_mask(dec, b, &cyclic_mask(dec)))
}

fn chain_omega_mask(dec: &ChainDecomposition, b: BoxId, cyclic: &[bool]) -> Vec<bool> {
    let g = dec.graph();
    let mut src = vec![false; g.node_count()];
    src[b.index()] = true;
    let reach = g.reach_mask(&src);
    let core: Vec<bool> = reach.iter().zip(cyclic).map(|(&r, &c)| r && c).collect();
    g.reach_mask(&core)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinAssignment {
    Terminal(ComponentId),
    Ambiguous,
}

impl BasinAssignment {
    pub fn component(self) -> Option<ComponentId> {
        match self {
            BasinAssignment::Terminal(c) => Some(c),
            BasinAssignment::Ambiguous => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub assignment: Vec<BasinAssignment>,
    /// Fraction of boxes assigned to a single terminal component.
    pub v_fraction: f64,
    pub per_component_basin_size: BTreeMap<ComponentId, usize>,
}

impl BasinReport {
    pub fn ambiguous_count(&self) -> usize {
        self.assignment
            .iter()
            .filter(|a| **a == BasinAssignment::Ambiguous)
            .count()
    }

    pub fn of(&self, b: BoxId) -> BasinAssignment {
        self.assignment[b.index()]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Reached {
    Nothing,
    Single(ComponentId),
    Many,
}

/// Assigns box `b` to terminal component `C` when `C` is the only cyclic
/// component reachable from `b`; every other box is ambiguous.
pub fn terminal_basin_partition(dec: &ChainDecomposition) -> BasinReport {
    let order = dec
        .topological_order()
        .expect("condensation of a digraph is acyclic");
    let mut summary = vec![Reached::Nothing; dec.component_count()];
    for &c in order.iter().rev() {
        let mut acc = if dec.has_cycle(c) {
            Reached::Single(c)
        } else {
            Reached::Nothing
        };
        for &d in dec.successors(c) {
            acc = match (acc, summary[d.index()]) {
                (x, Reached::Nothing) | (Reached::Nothing, x) => x,
                (Reached::Single(a), Reached::Single(b)) if a == b => Reached::Single(a),
                _ => Reached::Many,
            };
        }
        summary[c.index()] = acc;
    }

    let n = dec.graph().node_count();
    let mut per_component_basin_size = BTreeMap::new();
    let assignment: Vec<BasinAssignment> = (0..n)
        .map(
            |b| match summary[dec.component_of(BoxId(b as u32)).index()] {
                Reached::Single(c) => {
                    debug_assert!(dec.is_terminal(c));
                    *per_component_basin_size.entry(c).or_insert(0) += 1;
                    BasinAssignment::Terminal(c)
                }
                _ => BasinAssignment::Ambiguous,
            },
        )
        .collect();
    let assigned = assignment.len()
        - assignment
            .iter()
            .filter(|a| **a == BasinAssignment::Ambiguous)
            .count();
    BasinReport {
        v_fraction: if n == 0 {
            0.0
        } else {
            assigned as f64 / n as f64
        },
        assignment,
        per_component_basin_size,
    }
}

/// Every box reaches at least one terminal component.
pub fn every_box_reaches_terminal(dec: &ChainDecomposition) -> bool {
    let g = dec.graph();
    let terminal: Vec<bool> = (0..g.node_count())
        .map(|b| dec.is_terminal(dec.component_of(BoxId(b as u32))))
        .collect();
    g.reversed().reach_mask(&terminal).into_iter().all(|r| r)
}

/// The three per-box properties that should coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasinEquivalence {
    pub uniquely_assigned: bool,
    pub omega_in_one_terminal: bool,
    pub omega_strongly_connected: bool,
}

impl BasinEquivalence {
    pub fn agrees(&self) -> bool {
        self.uniquely_assigned == self.omega_in_one_terminal
            && self.omega_in_one_terminal == self.omega_strongly_connected
    }
}

/// Evaluates the unique-assignment / ω*-collapse / ω*-strongly-connected
/// triple for every box.
pub fn basin_equivalences(dec: &ChainDecomposition, report: &BasinReport) -> Vec<BasinEquivalence> {
    let g = dec.graph();
    let rev = g.reversed();
    let cyclic = cyclic_mask(dec);
    (0..g.node_count())
        .map(|b| {
            let b = BoxId(b as u32);
            let omega = chain_omega_mask(dec, b, &cyclic);
            let members: Vec<usize> = (0..omega.len()).filter(|&i| omega[i]).collect();
            if members.is_empty() {
                // only possible on graphs that are not total
                return BasinEquivalence {
                    uniquely_assigned: report.of(b).component().is_some(),
                    omega_in_one_terminal: false,
                    omega_strongly_connected: false,
                };
            }
            let first = dec.component_of(BoxId(members[0] as u32));
            let omega_in_one_terminal = dec.is_terminal(first)
                && members
                    .iter()
                    .all(|&i| dec.component_of(BoxId(i as u32)) == first);
            // omega is forward closed, so forward reach from any member
            // stays inside it; check backward reach within omega
            let mut src = vec![false; omega.len()];
            src[members[0]] = true;
            let fwd = g.reach_mask(&src);
            let mut seen = src.clone();
            let mut stack = vec![members[0]];
            while let Some(u) = stack.pop() {
                for &v in rev.succ_raw(u) {
                    if omega[v as usize] && !seen[v as usize] {
                        seen[v as usize] = true;
                        stack.push(v as usize);
                    }
                }
            }
            let omega_strongly_connected = members.iter().all(|&i| fwd[i] && seen[i]);
            BasinEquivalence {
                uniquely_assigned: report.of(b).component().is_some(),
                omega_in_one_terminal,
                omega_strongly_connected,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WMembership {
    pub seed: Point,
    pub j: u32,
    pub m: usize,
    pub member: bool,
}

/// Grid-precision test of `C(x,f) ⊂ U_{1/j}({f^i(x) : i >= m})`: every box
/// center of the terminal component assigned to `x` must lie within `1/j`
/// of some orbit point `f^i(x)`, `m <= i <= m + horizon`.
pub fn w_membership(
    sys: &SystemDef,
    x: &Point,
    j: u32,
    m: usize,
    horizon: usize,
    dec: &ChainDecomposition,
    report: &BasinReport,
) -> Result<WMembership> {
    if j == 0 {
        return Err(Error::Precondition("j must be at least 1".into()));
    }
    let grid = dec
        .grid()
        .ok_or_else(|| Error::Precondition("decomposition has no grid".into()))?;
    let x = sys.domain().wrap(*x)?;
    let b = grid.box_of(&x)?;
    let c = report
        .of(b)
        .component()
        .ok_or_else(|| Error::Precondition(format!("seed {x:?} lies in ambiguous box {b}")))?;
    let orbit: Vec<Point> = std::iter::successors(Some(sys.iterate(&x, m)), |p| Some(sys.eval(p)))
        .take(horizon + 1)
        .collect();
    let radius = 1.0 / j as f64;
    let domain: &Domain = grid.domain();
    let member = dec.boxes(c).iter().all(|&cb| {
        let center = grid.center(cb);
        orbit.iter().any(|p| domain.distance(&center, p) < radius)
    });
    Ok(WMembership {
        seed: x,
        j,
        m,
        member,
    })
}

/// Knobs for [`coverage_study`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageParams {
    pub resolution: Resolution,
    pub j: u32,
    pub m: usize,
    /// Orbit length for W_{j,m}; `None` means `10 * 2^depth`.
    pub horizon: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Extra transients reported alongside `m`.
    pub m_scan: Vec<usize>,
}

impl Default for CoverageParams {
    fn default() -> Self {
        CoverageParams {
            resolution: Resolution::default(),
            j: 4,
            m: 100,
            horizon: None,
            samples: 100,
            seed: 0,
            m_scan: vec![0, 100, 1000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub depth: u32,
    pub delta: f64,
    pub box_count: usize,
    pub ambiguous_boxes: usize,
    pub v_fraction: f64,
    /// Fraction of sampled seeds (drawn from uniquely assigned boxes) in
    /// W_{j,m} at the configured `m`.
    pub w_sample_fraction: f64,
    /// `(m, fraction)` for each transient in the scan.
    pub w_scan: Vec<(usize, f64)>,
    pub seeds_drawn: usize,
    pub seeds_used: usize,
}

fn coverage_row(sys: &SystemDef, depth: u32, params: &CoverageParams) -> Result<CoverageRow> {
    let dec = params.resolution.decompose(sys, depth)?;
    let grid = *dec.grid().expect("grid decomposition");
    let report = terminal_basin_partition(&dec);
    let horizon = params.horizon.unwrap_or(10 << depth);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ ((depth as u64) << 32));

    let mut seeds = Vec::with_capacity(params.samples);
    let mut drawn = 0;
    let max_draws = params.samples.max(1) * 100;
    while seeds.len() < params.samples && drawn < max_draws {
        let p = random_point(sys.domain(), &mut rng);
        drawn += 1;
        if report.of(grid.box_of(&p)?).component().is_some() {
            seeds.push(p);
        }
    }
    let fraction = |m: usize| -> Result<f64> {
        if seeds.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0;
        for p in &seeds {
            if w_membership(sys, p, params.j, m, horizon, &dec, &report)?.member {
                hits += 1;
            }
        }
        Ok(hits as f64 / seeds.len() as f64)
    };
    let w_sample_fraction = fraction(params.m)?;
    let w_scan = params
        .m_scan
        .iter()
        .map(|&m| Ok((m, fraction(m)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageRow {
        depth,
        delta: params.resolution.params_for(&grid)?.delta,
        box_count: grid.box_count(),
        ambiguous_boxes: report.ambiguous_count(),
        v_fraction: report.v_fraction,
        w_sample_fraction,
        w_scan,
        seeds_drawn: drawn,
        seeds_used: seeds.len(),
    })
}

/// V/W estimates across strictly increasing depths. Depths are processed in
/// parallel; each uses its own generator derived from `(seed, depth)`.
pub fn coverage_study(
    sys: &SystemDef,
    depths: &[u32],
    params: &CoverageParams,
) -> Result<Vec<CoverageRow>> {
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "depths must be nonempty and strictly increasing".into(),
        ));
    }
    depths
        .par_iter()
        .map(|&d| coverage_row(sys, d, params))
        .collect()
}
