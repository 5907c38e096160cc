//! Pseudo-orbits, shadowing searches, an empirical shadowing modulus, and
//! the chain-continuity cells `C_{j,l}`.
//!
//! Everything here is empirical. A failed search means no witness was found
//! among the box centers scanned at that depth, not that the pseudo-orbit
//! cannot be shadowed.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_graph::{build_chain_graph, ChainGraph, ChainGraphParams};
use crate::error::{Error, Result};
use crate::phase_space::{
    random_point, subdivide, wrap_signed, wrap_unit, BoxId, Domain, Grid, Point, DIST_SLACK,
};
use crate::systems::{MapKind, SystemDef};

/// Noise radius as a fraction of δ, so rounding never breaks the δ bound.
const NOISE_SHRINK: f64 = 1.0 - 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PseudoOrbitKind {
    /// Uniform noise in the δ-ball after every step.
    PerturbedOrbit,
    /// A jump of full length δ in a random direction after every step.
    RandomWalk,
    /// A true orbit with a single δ jump into index `at`.
    Spliced { at: usize },
}

/// A finite δ-pseudo orbit: `d(f(x_i), x_{i+1}) <= delta` for all `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoOrbit {
    points: Vec<Point>,
    delta: f64,
    kind: PseudoOrbitKind,
}

impl PseudoOrbit {
    /// Checks the δ bound exactly.
    pub fn new(
        sys: &SystemDef,
        points: Vec<Point>,
        delta: f64,
        kind: PseudoOrbitKind,
    ) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::Precondition(format!(
                "delta {delta} must be finite and nonnegative"
            )));
        }
        if points.is_empty() {
            return Err(Error::Precondition(
                "a pseudo-orbit needs at least one point".into(),
            ));
        }
        let points = points
            .into_iter()
            .map(|p| sys.domain().wrap(p))
            .collect::<Result<Vec<_>>>()?;
        for (i, w) in points.windows(2).enumerate() {
            let jump = sys.domain().distance(&sys.eval(&w[0]), &w[1]);
            if jump > delta {
                return Err(Error::Generation(format!(
                    "step {i} jumps {jump:e}, more than delta = {delta:e}"
                )));
            }
        }
        Ok(PseudoOrbit {
            points,
            delta,
            kind,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> PseudoOrbitKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `d(f(x_i), x_{i+1})`.
    pub fn max_jump(&self, sys: &SystemDef) -> f64 {
        self.points
            .windows(2)
            .map(|w| sys.domain().distance(&sys.eval(&w[0]), &w[1]))
            .fold(0.0, f64::max)
    }
}

/// Offset of length `radius` (random direction) or uniform in the ball.
fn noise(dim: usize, radius: f64, on_sphere: bool, rng: &mut ChaCha8Rng) -> [f64; 2] {
    if dim == 1 {
        if on_sphere {
            let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            return [s * radius, 0.0];
        }
        return [rng.gen_range(-radius..=radius), 0.0];
    }
    if on_sphere {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        return [radius * t.cos(), radius * t.sin()];
    }
    loop {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        let v: f64 = rng.gen_range(-1.0..=1.0);
        if u * u + v * v <= 1.0 {
            return [radius * u, radius * v];
        }
    }
}

fn perturb(
    sys: &SystemDef,
    base: &Point,
    delta: f64,
    on_sphere: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Point> {
    let domain = sys.domain();
    for _ in 0..16 {
        let off = noise(domain.dim(), delta * NOISE_SHRINK, on_sphere, rng);
        let mut q = *base;
        for (a, o) in off.iter().enumerate().take(domain.dim()) {
            q.set(a, base.get(a) + o);
        }
        let q = domain.clamp(q);
        if domain.distance(base, &q) <= delta {
            return Ok(q);
        }
    }
    Err(Error::Generation(format!(
        "could not place a point within {delta:e} of {base:?}"
    )))
}

/// Generates a δ-pseudo orbit of `length` points starting at `x0`.
pub fn generate_pseudo_orbit(
    sys: &SystemDef,
    x0: &Point,
    delta: f64,
    length: usize,
    seed: u64,
    kind: PseudoOrbitKind,
) -> Result<PseudoOrbit> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Precondition(format!(
            "delta {delta} must be finite and nonnegative"
        )));
    }
    if length < 2 {
        return Err(Error::Precondition(
            "pseudo-orbit length must be at least 2".into(),
        ));
    }
    if let PseudoOrbitKind::Spliced { at } = kind {
        if at == 0 || at >= length {
            return Err(Error::Precondition(format!(
                "splice index {at} must lie in 1..{length}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(length);
    points.push(sys.domain().wrap(*x0)?);
    for i in 1..length {
        let image = sys.eval(&points[i - 1]);
        let next = if delta == 0.0 {
            image
        } else {
            match kind {
                PseudoOrbitKind::PerturbedOrbit => perturb(sys, &image, delta, false, &mut rng)?,
                PseudoOrbitKind::RandomWalk => perturb(sys, &image, delta, true, &mut rng)?,
                PseudoOrbitKind::Spliced { at } if at == i => {
                    perturb(sys, &image, delta, true, &mut rng)?
                }
                PseudoOrbitKind::Spliced { .. } => image,
            }
        };
        points.push(next);
    }
    PseudoOrbit::new(sys, points, delta, kind)
}

/// `max_i d(f^i(start), x_i)`, stopping early once it exceeds `cap`.
fn deviation_capped(sys: &SystemDef, start: &Point, po: &PseudoOrbit, cap: f64) -> f64 {
    let domain = sys.domain();
    let mut p = *start;
    let mut worst: f64 = 0.0;
    for (i, x) in po.points.iter().enumerate() {
        if i > 0 {
            p = sys.eval(&p);
        }
        worst = worst.max(domain.distance(&p, x));
        if worst > cap {
            break;
        }
    }
    worst
}

/// `max_i d(f^i(start), x_i)` over the whole pseudo-orbit.
pub fn orbit_deviation(sys: &SystemDef, start: &Point, po: &PseudoOrbit) -> f64 {
    deviation_capped(sys, start, po, f64::INFINITY)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowingResult {
    pub found: bool,
    pub witness: Option<Point>,
    /// Deviation of the witness, when one was found.
    pub deviation: Option<f64>,
    pub search_depth: u32,
    pub candidates: usize,
}

/// Scans the centers of all depth-`search_depth` boxes within `epsilon` of
/// `x_0` and returns the one with the smallest deviation, if that deviation
/// is at most `epsilon`. Ties go to the lowest box index.
pub fn shadowing_search(
    sys: &SystemDef,
    po: &PseudoOrbit,
    epsilon: f64,
    search_depth: u32,
) -> Result<ShadowingResult> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    let grid = subdivide(*sys.domain(), search_depth)?;
    let x0 = po.points[0];
    let home = grid.box_of(&x0)?;
    let reach = (epsilon / grid.max_width()).ceil() as u32 + 1;
    let mut candidates: Vec<BoxId> = grid
        .cell_window(home, reach)
        .into_iter()
        .filter(|&b| grid.domain().distance(&grid.center(b), &x0) <= epsilon)
        .collect();
    candidates.sort_unstable();
    let scored: Vec<(f64, BoxId)> = candidates
        .par_iter()
        .map(|&b| (deviation_capped(sys, &grid.center(b), po, epsilon), b))
        .collect();
    let best = scored
        .into_iter()
        .filter(|(d, _)| *d <= epsilon)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(ShadowingResult {
        found: best.is_some(),
        witness: best.map(|(_, b)| grid.center(b)),
        deviation: best.map(|(d, _)| d),
        search_depth,
        candidates: candidates.len(),
    })
}

/// Expansion factor of a supported expanding map.
pub fn expansion_factor(sys: &SystemDef) -> Option<f64> {
    match sys.map() {
        MapKind::Doubling => Some(2.0),
        MapKind::Tent { s } if *s > 1.0 => Some(*s),
        _ => None,
    }
}

/// Builds a shadow point for an expanding map by pulling the last point of
/// the pseudo-orbit back through the inverse branch nearest each `x_i`.
/// For expansion `λ` the deviation is at most `δ/(λ-1)`.
pub fn inverse_branch_shadow(sys: &SystemDef, po: &PseudoOrbit) -> Result<Point> {
    let domain = sys.domain();
    let pick = |cands: [f64; 2], target: &Point| -> f64 {
        let d0 = domain.distance(&Point::new1(cands[0]), target);
        let d1 = domain.distance(&Point::new1(cands[1]), target);
        if d1 < d0 {
            cands[1]
        } else {
            cands[0]
        }
    };
    let mut y = po.points.last().unwrap().x();
    match sys.map() {
        MapKind::Doubling => {
            for x in po.points.iter().rev().skip(1) {
                y = pick([0.5 * y, 0.5 * (y + 1.0)], x);
            }
            Ok(Point::new1(wrap_unit(y)))
        }
        MapKind::Tent { s } if *s > 1.0 => {
            for x in po.points.iter().rev().skip(1) {
                let yc = y.min(0.5 * s);
                y = pick([yc / s, 1.0 - yc / s], x);
            }
            Ok(Point::new1(y))
        }
        _ => Err(Error::Unsupported(format!(
            "inverse-branch shadowing needs an expanding map (doubling or tent with s > 1), got '{}'",
            sys.name()
        ))),
    }
}

/// Knobs for [`estimate_shadowing_modulus`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusParams {
    pub length: usize,
    pub search_depth: u32,
    /// Kinds cycled through across trials.
    pub kinds: Vec<PseudoOrbitKind>,
    /// Bisection stops once the bracket is narrower than this times ε.
    pub min_width_fraction: f64,
}

impl Default for ModulusParams {
    fn default() -> Self {
        ModulusParams {
            length: 10,
            search_depth: 14,
            kinds: vec![
                PseudoOrbitKind::PerturbedOrbit,
                PseudoOrbitKind::RandomWalk,
                PseudoOrbitKind::Spliced { at: 5 },
            ],
            min_width_fraction: 1.0 / 1024.0,
        }
    }
}

/// Empirical result; not a proof of shadowing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub evaluations: usize,
    pub empirical: bool,
}

fn trial_start(domain: &Domain, seed: u64, t: usize) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(t as u64 + 1)),
    );
    random_point(domain, &mut rng)
}

/// Largest δ in `(0, epsilon]` (found by bisection) for which every trial
/// pseudo-orbit was ε-shadowed by the candidate search.
pub fn estimate_shadowing_modulus(
    sys: &SystemDef,
    epsilon: f64,
    trials: usize,
    seed: u64,
    params: &ModulusParams,
) -> Result<ModulusEstimate> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if trials == 0 || params.kinds.is_empty() {
        return Err(Error::Precondition(
            "need at least one trial and one kind".into(),
        ));
    }
    let mut evaluations = 0;
    let mut accepts = |delta: f64| -> Result<bool> {
        evaluations += 1;
        for t in 0..trials {
            let kind = match params.kinds[t % params.kinds.len()] {
                PseudoOrbitKind::Spliced { at } => PseudoOrbitKind::Spliced {
                    at: at.clamp(1, params.length - 1),
                },
                k => k,
            };
            let x0 = trial_start(sys.domain(), seed, t);
            let po = generate_pseudo_orbit(
                sys,
                &x0,
                delta,
                params.length,
                seed.wrapping_add(t as u64),
                kind,
            )?;
            if !shadowing_search(sys, &po, epsilon, params.search_depth)?.found {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let min_width = epsilon * params.min_width_fraction;
    let (mut lo, mut hi) = (0.0, epsilon);
    if accepts(epsilon)? {
        lo = epsilon;
    } else {
        while hi - lo > min_width {
            let mid = 0.5 * (lo + hi);
            if accepts(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    if lo == 0.0 {
        return Err(Error::NoModulus { min_width });
    }
    Ok(ModulusEstimate {
        epsilon,
        delta: lo,
        trials,
        evaluations,
        empirical: true,
    })
}

/// Half-range of the accumulated offsets `x_i - R^i(x_0)` of a rotation
/// pseudo-orbit: the smallest deviation any true rotation orbit can achieve.
pub fn rotation_drift(alpha: f64, po: &PseudoOrbit) -> f64 {
    let x0 = po.points[0].x();
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    let mut offset = 0.0;
    let mut expected = x0;
    for x in &po.points[1..] {
        expected = wrap_unit(expected + alpha);
        // per-step increment of the offset
        let inc = wrap_signed(x.x() - expected) - wrap_signed(offset);
        offset += wrap_signed(inc);
        lo = lo.min(offset);
        hi = hi.max(offset);
    }
    0.5 * (hi - lo)
}

fn check_cell_args(l: u32) -> Result<()> {
    if l == 0 {
        return Err(Error::Precondition("l must be at least 1".into()));
    }
    Ok(())
}

/// Whether box `b` behaves like a point of `C_{j,l}` up to `horizon`: for
/// each `i <= horizon` the `i`-th reachability layer from `b` in the
/// `1/j`-chain graph stays inside the `1/l` neighbourhood (box-center rule)
/// of the box holding `f^i(center(b))`.
pub fn chain_continuity_cell(
    g_j: &ChainGraph,
    sys: &SystemDef,
    b: BoxId,
    l: u32,
    horizon: usize,
) -> Result<bool> {
    check_cell_args(l)?;
    let grid = g_j.grid();
    Ok(cell_holds(g_j, sys, grid, b, l, horizon))
}

fn cell_holds(
    g: &ChainGraph,
    sys: &SystemDef,
    grid: &Grid,
    b: BoxId,
    l: u32,
    horizon: usize,
) -> bool {
    let threshold = 1.0 / l as f64 + 0.5 * grid.box_diameter() + DIST_SLACK;
    let mut layer: BTreeSet<BoxId> = BTreeSet::from([b]);
    let mut z = grid.center(b);
    for i in 0..=horizon {
        let zb = match grid.box_of(&z) {
            Ok(zb) => zb,
            Err(_) => return false,
        };
        if !layer
            .iter()
            .all(|&c| grid.point_box_distance(&grid.center(c), zb) <= threshold)
        {
            return false;
        }
        if i == horizon {
            break;
        }
        layer = layer.iter().flat_map(|&c| g.successors(c)).collect();
        z = sys.eval(&z);
    }
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CCReport {
    pub depth: u32,
    pub ladder: Vec<(u32, u32)>,
    pub horizon: usize,
    /// `membership[b][k]` for box `b` and ladder entry `k`.
    pub membership: Vec<Vec<bool>>,
    /// Per ladder entry, fraction of boxes in the cell.
    pub pair_fractions: Vec<f64>,
    /// Fraction of boxes that, for every `l` in the ladder, lie in some
    /// `C_{j,l}` with `(j, l)` in the ladder.
    pub cc_fraction: f64,
}

impl CCReport {
    pub fn in_cc(&self, b: BoxId) -> bool {
        let ls: BTreeSet<u32> = self.ladder.iter().map(|&(_, l)| l).collect();
        ls.iter().all(|&l| {
            self.ladder
                .iter()
                .zip(&self.membership[b.index()])
                .any(|(&(_, pl), &m)| pl == l && m)
        })
    }
}

/// Default layer horizon: 50 times the largest `j`.
pub fn default_cc_horizon(ladder: &[(u32, u32)]) -> usize {
    50 * ladder.iter().map(|&(j, _)| j as usize).max().unwrap_or(1)
}

/// Evaluates every `(j, l)` cell of the ladder on every box of `grid`.
pub fn cc_report(
    sys: &SystemDef,
    grid: &Grid,
    ladder: &[(u32, u32)],
    horizon: Option<usize>,
    rigor_margin: f64,
) -> Result<CCReport> {
    if ladder.is_empty() {
        return Err(Error::Precondition("the (j, l) ladder is empty".into()));
    }
    if ladder.iter().any(|&(j, l)| j == 0 || l == 0) {
        return Err(Error::Precondition("ladder entries need j, l >= 1".into()));
    }
    let horizon = horizon.unwrap_or_else(|| default_cc_horizon(ladder));
    let js: BTreeSet<u32> = ladder.iter().map(|&(j, _)| j).collect();
    let graphs = js
        .iter()
        .map(|&j| {
            let params = ChainGraphParams::new(1.0 / j as f64, rigor_margin)?;
            Ok((j, build_chain_graph(sys, grid, params)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let graph_for = |j: u32| &graphs.iter().find(|(gj, _)| *gj == j).unwrap().1;
    let membership: Vec<Vec<bool>> = (0..grid.box_count() as u32)
        .into_par_iter()
        .map(|b| {
            ladder
                .iter()
                .map(|&(j, l)| cell_holds(graph_for(j), sys, grid, BoxId(b), l, horizon))
                .collect()
        })
        .collect();
    let n = grid.box_count() as f64;
    let pair_fractions = (0..ladder.len())
        .map(|k| membership.iter().filter(|row| row[k]).count() as f64 / n)
        .collect();
    let mut report = CCReport {
        depth: grid.depth(),
        ladder: ladder.to_vec(),
        horizon,
        membership,
        pair_fractions,
        cc_fraction: 0.0,
    };
    let inside = grid.boxes().filter(|&b| report.in_cc(b)).count();
    report.cc_fraction = inside as f64 / n;
    Ok(report)
}
