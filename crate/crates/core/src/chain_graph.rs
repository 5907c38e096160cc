//! The δ-chain digraph over grid boxes and its strongly connected
//! decomposition.
//!
//! An edge `b -> b'` means some point of `b` may have an image within `δ` of
//! some point of `b'`. Edges come from an outer enclosure of `f(b)`, so the
//! graph over-approximates the chain relation and every true orbit induces a
//! walk in it.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{wrap_signed, BoxId, BoxSet, Grid, Point, DIST_SLACK, MAX_DIM};
use crate::systems::SystemDef;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainGraphParams {
    /// Chain tolerance: jumps of at most `delta` are allowed after each step.
    pub delta: f64,
    /// Extra padding added to every box image.
    pub rigor_margin: f64,
}

impl ChainGraphParams {
    pub fn new(delta: f64, rigor_margin: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("rigor_margin", rigor_margin)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter {
                    name: name.into(),
                    value: v,
                    reason: "must be finite and nonnegative".into(),
                });
            }
        }
        Ok(ChainGraphParams {
            delta,
            rigor_margin,
        })
    }
}

/// An axis-aligned region that contains the image of a box. On periodic axes
/// the bounds are unwrapped: they may extend past `[0,1]`, and a span of at
/// least one covers the whole circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    bounds: [(f64, f64); MAX_DIM],
    dim: usize,
    periodic: bool,
}

impl Enclosure {
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds[..self.dim]
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| {
            let (lo, hi) = self.bounds[a];
            let v = p.get(a);
            if self.periodic {
                if hi - lo >= 1.0 {
                    return true;
                }
                let shifted = lo + (v - lo).rem_euclid(1.0);
                shifted <= hi || shifted - 1.0 >= lo
            } else {
                v >= lo && v <= hi
            }
        })
    }

    /// Distance from the enclosure to a grid box.
    pub fn distance_to_box(&self, grid: &Grid, b: BoxId) -> f64 {
        let bb = grid.bounds(b);
        (0..self.dim)
            .map(|a| grid.domain().axis_gap(self.bounds[a], bb[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Encloses the image of box `b`, padded by `margin`.
///
/// `f` is sampled on the corners, edge midpoints and center of the box. In
/// one dimension consecutive samples `u, v` at spacing `h` bound `f` between
/// them by `(u + v ± L h) / 2`, which is exact for maps of slope `±L`. In two
/// dimensions the sample hull is padded by `L` times the largest distance
/// from a box point to the nearest sample. With a valid Lipschitz bound `L`
/// the result contains `f(b)`.
pub fn box_image(sys: &SystemDef, b: BoxId, grid: &Grid, margin: f64) -> Enclosure {
    let domain = grid.domain();
    let dim = grid.dim();
    let periodic = domain.is_periodic();
    let bounds = grid.bounds(b);
    let lip = sys.lipschitz_on(&bounds[..dim]);
    let center = grid.center(b);
    let mut out = [(0.0, 0.0); MAX_DIM];
    let full = |lo: f64| (lo, lo + 1.0);

    if dim == 1 {
        let (a, c) = bounds[0];
        let h = 0.5 * (c - a);
        let samples = [
            sys.eval(&Point::new1(a)).x(),
            sys.eval(&center).x(),
            sys.eval(&Point::new1(c)).x(),
        ];
        if periodic && lip * h >= 0.5 {
            out[0] = full(samples[1]);
        } else {
            let mut u = samples;
            if periodic {
                u[1] = u[0] + wrap_signed(samples[1] - u[0]);
                u[2] = u[1] + wrap_signed(samples[2] - u[1]);
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for w in u.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let bulge = 0.5 * lip * h;
                lo = lo.min(mid - bulge).min(w[0]).min(w[1]);
                hi = hi.max(mid + bulge).max(w[0]).max(w[1]);
            }
            out[0] = (lo - margin - DIST_SLACK, hi + margin + DIST_SLACK);
        }
    } else {
        let fc = sys.eval(&center);
        let diam = grid.box_diameter();
        if periodic && lip * 0.5 * diam >= 0.5 {
            for (a, slot) in out.iter_mut().enumerate().take(dim) {
                *slot = full(fc.get(a));
            }
        } else {
            let mut lo = [f64::INFINITY; MAX_DIM];
            let mut hi = [f64::NEG_INFINITY; MAX_DIM];
            for i in 0..3 {
                for j in 0..3 {
                    let x = bounds[0].0 + 0.5 * i as f64 * (bounds[0].1 - bounds[0].0);
                    let y = bounds[1].0 + 0.5 * j as f64 * (bounds[1].1 - bounds[1].0);
                    let fp = sys.eval(&Point::new2(x, y));
                    for a in 0..dim {
                        let v = fc.get(a) + domain.displacement(&fc, &fp, a);
                        lo[a] = lo[a].min(v);
                        hi[a] = hi[a].max(v);
                    }
                }
            }
            let pad = lip * 0.25 * diam + margin + DIST_SLACK;
            for a in 0..dim {
                out[a] = (lo[a] - pad, hi[a] + pad);
            }
        }
    }
    Enclosure {
        bounds: out,
        dim,
        periodic,
    }
}

/// A directed graph on nodes `0..n` with sorted, duplicate-free adjacency
/// lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    succ: Vec<Vec<u32>>,
}

impl Digraph {
    pub fn from_adjacency(mut succ: Vec<Vec<u32>>) -> Result<Self> {
        let n = succ.len();
        for (u, list) in succ.iter_mut().enumerate() {
            if let Some(&bad) = list.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Validation(format!(
                    "edge {u} -> {bad} leaves the node range 0..{n}"
                )));
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Digraph { succ })
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut succ = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::Validation(format!("edge source {u} out of range")));
            }
            succ[u as usize].push(v);
        }
        Digraph::from_adjacency(succ)
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, b: BoxId) -> impl Iterator<Item = BoxId> + '_ {
        self.succ[b.index()].iter().map(|&v| BoxId(v))
    }

    pub(crate) fn succ_raw(&self, u: usize) -> &[u32] {
        &self.succ[u]
    }

    pub fn has_edge(&self, u: BoxId, v: BoxId) -> bool {
        self.succ[u.index()].binary_search(&v.0).is_ok()
    }

    /// Every node has at least one successor.
    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|s| !s.is_empty())
    }

    pub fn reversed(&self) -> Digraph {
        let mut pred = vec![Vec::new(); self.succ.len()];
        for (u, list) in self.succ.iter().enumerate() {
            for &v in list {
                pred[v as usize].push(u as u32);
            }
        }
        // pushed in ascending u, so already sorted
        Digraph { succ: pred }
    }

    /// Nodes reachable from the marked sources (sources included).
    pub(crate) fn reach_mask(&self, sources: &[bool]) -> Vec<bool> {
        let mut seen = sources.to_vec();
        let mut queue: VecDeque<usize> = (0..seen.len()).filter(|&i| seen[i]).collect();
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v as usize);
                }
            }
        }
        seen
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Transitive closure of `sources` along edges (forward) or reversed edges
/// (backward), sources included.
pub fn reachable_set(g: &Digraph, sources: &BoxSet, direction: Direction) -> BoxSet {
    let mask = sources.to_mask(g.node_count());
    let reach = match direction {
        Direction::Forward => g.reach_mask(&mask),
        Direction::Backward => g.reversed().reach_mask(&mask),
    };
    BoxSet::from_mask(&reach)
}

/// The δ-chain graph of a system over a grid.
#[derive(Clone, Debug)]
pub struct ChainGraph {
    grid: Grid,
    params: ChainGraphParams,
    graph: Digraph,
}

impl ChainGraph {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ChainGraphParams {
        &self.params
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn successors(&self, b: BoxId) -> impl Iterator<Item = BoxId> + '_ {
        self.graph.successors(b)
    }
}

/// Builds the δ-chain graph: `b -> b'` iff the enclosure of `f(b)` lies
/// within `params.delta` of box `b'`.
pub fn build_chain_graph(
    sys: &SystemDef,
    grid: &Grid,
    params: ChainGraphParams,
) -> Result<ChainGraph> {
    if sys.domain() != grid.domain() {
        return Err(Error::Validation(format!(
            "system '{}' lives on {}, grid is over {}",
            sys.name(),
            sys.domain(),
            grid.domain()
        )));
    }
    let succ: Vec<Vec<u32>> = (0..grid.box_count() as u32)
        .into_par_iter()
        .map(|b| {
            let enc = box_image(sys, BoxId(b), grid, params.rigor_margin);
            chain_targets(&enc, grid, params.delta)
        })
        .collect();
    Ok(ChainGraph {
        grid: *grid,
        params,
        graph: Digraph { succ },
    })
}

/// Cells along one axis that may lie within `delta` of `[lo, hi]`.
fn axis_candidates(grid: &Grid, axis: usize, (lo, hi): (f64, f64), delta: f64) -> Vec<u32> {
    let n = grid.cells_per_axis() as i64;
    let (start, _) = grid.domain().axis(axis);
    let w = grid.width(axis);
    let first = ((lo - delta - start) / w).floor() as i64 - 1;
    let last = ((hi + delta - start) / w).floor() as i64 + 1;
    if grid.domain().is_periodic() {
        if last - first + 1 >= n {
            return (0..n as u32).collect();
        }
        let mut v: Vec<u32> = (first..=last).map(|i| i.rem_euclid(n) as u32).collect();
        v.sort_unstable();
        v.dedup();
        v
    } else {
        let first = first.max(0);
        let last = last.min(n - 1);
        (first..=last).map(|i| i as u32).collect()
    }
}

fn chain_targets(enc: &Enclosure, grid: &Grid, delta: f64) -> Vec<u32> {
    let xs = axis_candidates(grid, 0, enc.bounds[0], delta);
    let ys = if grid.dim() == 2 {
        axis_candidates(grid, 1, enc.bounds[1], delta)
    } else {
        vec![0]
    };
    let mut out = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let b = grid.box_from_cell([x, y]);
            if enc.distance_to_box(grid, b) <= delta + DIST_SLACK {
                out.push(b.0);
            }
        }
    }
    out
}

/// Index of a strongly connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub u32);

impl ComponentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Strongly connected components and their condensation.
///
/// Components are numbered in ascending order of their smallest node, so the
/// numbering depends only on the graph.
#[derive(Clone, Debug)]
pub struct ChainDecomposition {
    graph: Digraph,
    grid: Option<Grid>,
    scc_of: Vec<ComponentId>,
    components: Vec<Vec<BoxId>>,
    has_cycle: Vec<bool>,
    dag: Vec<Vec<ComponentId>>,
    terminal: Vec<bool>,
}

impl ChainDecomposition {
    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    /// The grid the graph was built on, when there is one.
    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_ids(&self) -> impl Iterator<Item = ComponentId> {
        (0..self.components.len() as u32).map(ComponentId)
    }

    pub fn check(&self, c: ComponentId) -> Result<()> {
        if c.index() < self.components.len() {
            Ok(())
        } else {
            Err(Error::UnknownComponent(c.index()))
        }
    }

    pub fn component_of(&self, b: BoxId) -> ComponentId {
        self.scc_of[b.index()]
    }

    /// Sorted boxes of a component.
    pub fn boxes(&self, c: ComponentId) -> &[BoxId] {
        &self.components[c.index()]
    }

    pub fn box_set(&self, c: ComponentId) -> BoxSet {
        self.components[c.index()].iter().copied().collect()
    }

    pub fn has_cycle(&self, c: ComponentId) -> bool {
        self.has_cycle[c.index()]
    }

    /// Condensation successors, excluding `c` itself.
    pub fn successors(&self, c: ComponentId) -> &[ComponentId] {
        &self.dag[c.index()]
    }

    pub fn is_terminal(&self, c: ComponentId) -> bool {
        self.terminal[c.index()]
    }

    /// Kahn's algorithm on the condensation; `None` if it had a cycle.
    pub fn topological_order(&self) -> Option<Vec<ComponentId>> {
        let m = self.components.len();
        let mut indeg = vec![0usize; m];
        for succ in &self.dag {
            for d in succ {
                indeg[d.index()] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..m).filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(c) = queue.pop_front() {
            order.push(ComponentId(c as u32));
            for d in &self.dag[c] {
                indeg[d.index()] -= 1;
                if indeg[d.index()] == 0 {
                    queue.push_back(d.index());
                }
            }
        }
        (order.len() == m).then_some(order)
    }
}

/// Decomposes the chain graph into strongly connected components.
pub fn scc_decompose(g: &ChainGraph) -> ChainDecomposition {
    let mut dec = decompose(&g.graph);
    dec.grid = Some(g.grid);
    dec
}

/// Decomposes an arbitrary digraph (no grid attached).
pub fn decompose(graph: &Digraph) -> ChainDecomposition {
    let raw = tarjan(graph);
    let mut comps: Vec<Vec<BoxId>> = raw
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c.into_iter().map(BoxId).collect()
        })
        .collect();
    comps.sort_unstable_by_key(|c| c[0]);

    let n = graph.node_count();
    let mut scc_of = vec![ComponentId(0); n];
    for (i, c) in comps.iter().enumerate() {
        for b in c {
            scc_of[b.index()] = ComponentId(i as u32);
        }
    }
    let has_cycle: Vec<bool> = comps
        .iter()
        .map(|c| c.len() >= 2 || graph.has_edge(c[0], c[0]))
        .collect();
    let mut dag: Vec<Vec<ComponentId>> = vec![Vec::new(); comps.len()];
    for u in 0..n {
        let cu = scc_of[u];
        for &v in graph.succ_raw(u) {
            let cv = scc_of[v as usize];
            if cv != cu {
                dag[cu.index()].push(cv);
            }
        }
    }
    for d in &mut dag {
        d.sort_unstable();
        d.dedup();
    }
    let terminal = (0..comps.len())
        .map(|c| has_cycle[c] && dag[c].is_empty())
        .collect();
    ChainDecomposition {
        graph: graph.clone(),
        grid: None,
        scc_of,
        components: comps,
        has_cycle,
        dag,
        terminal,
    }
}

/// Iterative Tarjan; returns components as node lists.
fn tarjan(graph: &Digraph) -> Vec<Vec<u32>> {
    const UNSEEN: u32 = u32::MAX;
    let n = graph.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut next = 0u32;
    let mut out = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        frames.push((root, 0));

        while let Some(frame) = frames.last_mut() {
            let v = frame.0 as usize;
            let succ = graph.succ_raw(v);
            if frame.1 < succ.len() {
                let w = succ[frame.1] as usize;
                frame.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0 as usize;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w as usize == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{subdivide, Domain};
    use crate::systems::builtin_with;

    fn ids(v: &[u32]) -> Vec<BoxId> {
        v.iter().map(|&i| BoxId(i)).collect()
    }

    #[test]
    fn params_validation() {
        assert!(ChainGraphParams::new(0.0, 0.0).is_ok());
        assert!(ChainGraphParams::new(-0.1, 0.0).is_err());
        assert!(ChainGraphParams::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn doubling_box_image() {
        let sys = builtin_with("doubling", &[]).unwrap();
        let g = subdivide(Domain::circle(), 3).unwrap();
        let enc = box_image(&sys, BoxId(0), &g, 0.0);
        let (lo, hi) = enc.bounds()[0];
        assert!(lo <= 0.0 && hi >= 0.25);
        // tight for a map of constant slope
        assert!(lo > -1e-9 && hi < 0.25 + 1e-9);
    }

    #[test]
    fn rotation_box_image() {
        let sys = builtin_with("rotation", &[("alpha", 0.25)]).unwrap();
        let g = subdivide(Domain::circle(), 2).unwrap();
        let (lo, hi) = box_image(&sys, BoxId(0), &g, 0.0).bounds()[0];
        assert!(lo <= 0.25 && hi >= 0.5);
        assert!(lo > 0.25 - 1e-9 && hi < 0.5 + 1e-9);
    }

    #[test]
    fn constant_map_image_is_margin_ball() {
        let sys = builtin_with("logistic", &[("r", 0.0)]).unwrap();
        let g = subdivide(Domain::unit_interval(), 4).unwrap();
        for b in g.boxes() {
            let (lo, hi) = box_image(&sys, b, &g, 0.01).bounds()[0];
            assert!((lo + 0.01).abs() < 1e-9 && (hi - 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_doubling_image_covers_circle() {
        let sys = builtin_with("doubling", &[]).unwrap();
        let g = subdivide(Domain::circle(), 1).unwrap();
        let enc = box_image(&sys, BoxId(0), &g, 0.0);
        for i in 0..100 {
            assert!(enc.contains(&Point::new1(i as f64 / 100.0)));
        }
    }

    #[test]
    fn cat_map_image_contains_samples() {
        let sys = builtin_with("cat_map", &[]).unwrap();
        let g = subdivide(Domain::torus(), 3).unwrap();
        for b in g.boxes() {
            let enc = box_image(&sys, b, &g, 0.0);
            let bb = g.bounds(b);
            for i in 0..=4 {
                for j in 0..=4 {
                    let x = bb[0].0 + (bb[0].1 - bb[0].0) * i as f64 / 4.0;
                    let y = bb[1].0 + (bb[1].1 - bb[1].0) * j as f64 / 4.0;
                    assert!(enc.contains(&sys.eval(&Point::new2(x, y))));
                }
            }
        }
    }

    #[test]
    fn doubling_depth3_delta0_edges() {
        let sys = builtin_with("doubling", &[]).unwrap();
        let g = subdivide(Domain::circle(), 3).unwrap();
        let cg = build_chain_graph(&sys, &g, ChainGraphParams::new(0.0, 0.0).unwrap()).unwrap();
        let succ: BoxSet = cg.successors(BoxId(0)).collect();
        // the image [0, 1/4] meets boxes 0 and 1, and touches 2 and 7 at a point
        assert!(BoxSet::from_indices([0, 1]).is_subset(&succ));
        assert!(succ.is_subset(&BoxSet::from_indices([7, 0, 1, 2])));
    }

    #[test]
    fn identity_rotation_has_self_loops() {
        let sys = builtin_with("rotation", &[("alpha", 0.0)]).unwrap();
        let g = subdivide(Domain::circle(), 4).unwrap();
        let cg = build_chain_graph(&sys, &g, ChainGraphParams::new(0.0, 0.0).unwrap()).unwrap();
        for b in g.boxes() {
            let succ: Vec<BoxId> = cg.successors(b).collect();
            assert!(succ.contains(&b));
            assert!(succ.len() <= 3);
        }
    }

    #[test]
    fn huge_delta_gives_complete_graph() {
        let sys = builtin_with("logistic", &[("r", 3.7)]).unwrap();
        let g = subdivide(Domain::unit_interval(), 4).unwrap();
        let cg = build_chain_graph(&sys, &g, ChainGraphParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(cg.graph().edge_count(), 16 * 16);
        let t = builtin_with("cat_map", &[]).unwrap();
        let tg = subdivide(Domain::torus(), 2).unwrap();
        let cg = build_chain_graph(&t, &tg, ChainGraphParams::new(0.75, 0.0).unwrap()).unwrap();
        assert_eq!(cg.graph().edge_count(), 16 * 16);
    }

    #[test]
    fn mismatched_domain_is_rejected() {
        let sys = builtin_with("doubling", &[]).unwrap();
        let g = subdivide(Domain::unit_interval(), 3).unwrap();
        assert!(build_chain_graph(&sys, &g, ChainGraphParams::new(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn scc_worked_example() {
        let g = Digraph::from_edges(3, &[(0, 1), (1, 0), (1, 2), (2, 2)]).unwrap();
        let dec = decompose(&g);
        assert_eq!(dec.component_count(), 2);
        assert_eq!(dec.boxes(ComponentId(0)), ids(&[0, 1]).as_slice());
        assert_eq!(dec.boxes(ComponentId(1)), ids(&[2]).as_slice());
        assert!(dec.has_cycle(ComponentId(0)) && dec.has_cycle(ComponentId(1)));
        assert!(!dec.is_terminal(ComponentId(0)));
        assert!(dec.is_terminal(ComponentId(1)));
        assert_eq!(dec.successors(ComponentId(0)), &[ComponentId(1)]);
    }

    #[test]
    fn self_loops_are_all_terminal() {
        let n = 5;
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, i)).collect();
        let dec = decompose(&Digraph::from_edges(n as usize, &edges).unwrap());
        assert_eq!(dec.component_count(), 5);
        assert!(dec.component_ids().all(|c| dec.is_terminal(c)));
    }

    #[test]
    fn acyclic_singleton_is_not_cyclic() {
        let dec = decompose(&Digraph::from_edges(2, &[(0, 1), (1, 1)]).unwrap());
        assert!(!dec.has_cycle(ComponentId(0)));
        assert!(!dec.is_terminal(ComponentId(0)));
        assert_eq!(
            dec.topological_order().unwrap(),
            vec![ComponentId(0), ComponentId(1)]
        );
    }

    #[test]
    fn reachable_examples() {
        let g = Digraph::from_edges(3, &[(0, 1), (1, 2), (2, 2)]).unwrap();
        let all = BoxSet::from_indices([0, 1, 2]);
        assert_eq!(
            reachable_set(&g, &BoxSet::from_indices([0]), Direction::Forward),
            all
        );
        assert_eq!(
            reachable_set(&g, &BoxSet::from_indices([2]), Direction::Backward),
            all
        );
        assert!(reachable_set(&g, &BoxSet::new(), Direction::Forward).is_empty());
        assert_eq!(
            reachable_set(&g, &BoxSet::from_indices([2]), Direction::Forward),
            BoxSet::from_indices([2])
        );
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000u32;
        let mut edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        let dec = decompose(&Digraph::from_edges(n as usize, &edges).unwrap());
        assert_eq!(dec.component_count(), 1);
        assert!(dec.is_terminal(ComponentId(0)));
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(Digraph::from_edges(2, &[(0, 2)]).is_err());
        assert!(Digraph::from_edges(2, &[(3, 0)]).is_err());
    }
}
