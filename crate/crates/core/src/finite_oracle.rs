//! Brute-force checks on small finite dynamical systems.
//!
//! States are bits of a `u64`, so `n <= 64`; the sweeps stay far below that.
//! Nothing here reuses the graph algorithms of [`crate::chain_graph`], which
//! keeps the cross-check between the two meaningful.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_graph::{decompose, Digraph};
use crate::components::terminal_notions_agree;
use crate::error::{Error, Result};
use crate::limits_basins::chain_omega;
use crate::phase_space::BoxId;

pub const MAX_STATES: usize = 64;
pub const MAX_FUNCTIONAL_N: usize = 7;

/// A total relation on `0..n`; row `x` is the successor bitmask of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSystem {
    n: usize,
    rows: Vec<u64>,
}

fn bit(x: usize) -> u64 {
    1u64 << x
}

fn states(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| mask & bit(i) != 0)
}

impl FiniteSystem {
    pub fn from_masks(rows: Vec<u64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_STATES {
            return Err(Error::Precondition(format!(
                "state count {n} outside 1..={MAX_STATES}"
            )));
        }
        let full = if n == 64 { u64::MAX } else { bit(n) - 1 };
        for (x, &r) in rows.iter().enumerate() {
            if r == 0 {
                return Err(Error::Validation(format!("state {x} has no successor")));
            }
            if r & !full != 0 {
                return Err(Error::Validation(format!(
                    "state {x} has a successor >= {n}"
                )));
            }
        }
        Ok(FiniteSystem { n, rows })
    }

    pub fn from_succ(succ: &[Vec<usize>]) -> Result<Self> {
        let rows = succ
            .iter()
            .enumerate()
            .map(|(x, s)| {
                s.iter().try_fold(0u64, |m, &y| {
                    if y >= succ.len() || y >= MAX_STATES {
                        Err(Error::Validation(format!("edge {x} -> {y} out of range")))
                    } else {
                        Ok(m | bit(y))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(rows)
    }

    pub fn functional(map: &[usize]) -> Result<Self> {
        let succ: Vec<Vec<usize>> = map.iter().map(|&y| vec![y]).collect();
        Self::from_succ(&succ)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn successors(&self, x: usize) -> Vec<usize> {
        states(self.rows[x]).collect()
    }

    pub fn is_functional(&self) -> bool {
        self.rows.iter().all(|r| r.count_ones() == 1)
    }

    fn image(&self, set: u64) -> u64 {
        states(set).fold(0, |acc, x| acc | self.rows[x])
    }

    pub fn to_digraph(&self) -> Digraph {
        let succ = (0..self.n)
            .map(|x| states(self.rows[x]).map(|y| y as u32).collect())
            .collect();
        Digraph::from_adjacency(succ).expect("rows are in range")
    }

    /// Row `x` of the transitive closure (walks of length >= 1), by
    /// repeated squaring until nothing changes.
    pub fn transitive_closure(&self) -> Vec<u64> {
        let mut r = self.rows.clone();
        loop {
            let next: Vec<u64> = (0..self.n)
                .map(|x| r[x] | states(r[x]).fold(0, |acc, y| acc | r[y]))
                .collect();
            if next == r {
                return r;
            }
            r = next;
        }
    }

    /// States reachable by walks of every sufficiently large length
    /// (arbitrarily long walks): the union of `A^k[x]` for `n <= k < 2n`.
    pub fn chain_omega(&self, x: usize) -> u64 {
        let mut layer = bit(x);
        for _ in 0..self.n {
            layer = self.image(layer);
        }
        let mut acc = 0;
        for _ in self.n..2 * self.n {
            acc |= layer;
            layer = self.image(layer);
        }
        acc
    }
}

/// Component structure computed from the transitive closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDecomposition {
    /// Ordered by smallest state.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub cyclic: Vec<bool>,
    pub terminal: Vec<bool>,
    /// `<=`-maximal among cyclic components.
    pub maximal: Vec<bool>,
    closure: Vec<u64>,
}

impl ExactDecomposition {
    fn mask(&self, c: usize) -> u64 {
        self.components[c].iter().fold(0, |m, &x| m | bit(x))
    }
}

pub fn exact_decomposition(fs: &FiniteSystem) -> ExactDecomposition {
    let n = fs.n;
    let closure = fs.transitive_closure();
    let mut component_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    for x in 0..n {
        if component_of[x] != usize::MAX {
            continue;
        }
        let id = components.len();
        let members: Vec<usize> = (x..n)
            .filter(|&y| y == x || (closure[x] & bit(y) != 0 && closure[y] & bit(x) != 0))
            .collect();
        for &y in &members {
            component_of[y] = id;
        }
        components.push(members);
    }
    let cyclic: Vec<bool> = components
        .iter()
        .map(|m| closure[m[0]] & bit(m[0]) != 0)
        .collect();
    let mut dec = ExactDecomposition {
        terminal: vec![false; components.len()],
        maximal: vec![false; components.len()],
        components,
        component_of,
        cyclic,
        closure,
    };
    for c in 0..dec.components.len() {
        let own = dec.mask(c);
        let leaks = dec.components[c].iter().any(|&x| fs.rows[x] & !own != 0);
        dec.terminal[c] = dec.cyclic[c] && !leaks;
        let reach = dec.components[c][0];
        dec.maximal[c] = dec.cyclic[c]
            && (0..dec.components.len()).all(|d| {
                d == c || !dec.cyclic[d] || dec.closure[reach] & bit(dec.components[d][0]) == 0
            });
    }
    dec
}

/// Every state reaches a terminal component.
pub fn verify_terminal_reachability(fs: &FiniteSystem) -> bool {
    let dec = exact_decomposition(fs);
    let terminal_states = (0..fs.n)
        .filter(|&x| dec.terminal[dec.component_of[x]])
        .fold(0u64, |m, x| m | bit(x));
    (0..fs.n).all(|x| (dec.closure[x] | bit(x)) & terminal_states != 0)
}

fn strongly_connected(fs: &FiniteSystem, set: u64) -> bool {
    let Some(start) = states(set).next() else {
        return false;
    };
    let restricted = |x: usize| fs.rows[x] & set;
    let mut fwd = bit(start);
    let mut frontier = fwd;
    while frontier != 0 {
        let next = states(frontier).fold(0, |m, x| m | restricted(x)) & !fwd;
        fwd |= next;
        frontier = next;
    }
    let mut bwd = bit(start);
    let mut frontier = bwd;
    while frontier != 0 {
        let next = states(set & !bwd)
            .filter(|&y| restricted(y) & frontier != 0)
            .fold(0, |m, y| m | bit(y));
        bwd |= next;
        frontier = next;
    }
    fwd == set && bwd == set
}

/// For every state: the cyclic components it reaches are a single one,
/// iff its chain ω-limit lies in one terminal component, iff its chain
/// ω-limit is strongly connected. Functional systems additionally check
/// that the orbit's limit cycle is that ω-limit.
pub fn verify_omega_equivalence(fs: &FiniteSystem) -> bool {
    let dec = exact_decomposition(fs);
    (0..fs.n).all(|x| {
        let reach = dec.closure[x] | bit(x);
        let mut cyclic_reached = states(reach)
            .map(|y| dec.component_of[y])
            .filter(|&c| dec.cyclic[c])
            .collect::<Vec<_>>();
        cyclic_reached.sort_unstable();
        cyclic_reached.dedup();
        let single = cyclic_reached.len() == 1;

        let omega = fs.chain_omega(x);
        let in_one_terminal = (0..dec.components.len())
            .any(|c| dec.terminal[c] && omega != 0 && omega & !dec.mask(c) == 0);
        let sc = strongly_connected(fs, omega);
        if !(single == in_one_terminal && in_one_terminal == sc) {
            return false;
        }
        if fs.is_functional() {
            // run n steps to land on the limit cycle, then walk it once
            let next = |y: usize| fs.rows[y].trailing_zeros() as usize;
            let mut y = x;
            for _ in 0..fs.n {
                y = next(y);
            }
            let mut cycle = bit(y);
            let mut z = next(y);
            while z != y {
                cycle |= bit(z);
                z = next(z);
            }
            if cycle != omega || !in_one_terminal {
                return false;
            }
        }
        true
    })
}

/// Terminal components are exactly the `<=`-maximal ones.
pub fn verify_maximality(fs: &FiniteSystem) -> bool {
    let dec = exact_decomposition(fs);
    dec.terminal == dec.maximal
}

/// Compares the brute-force structure with [`decompose`], the chain ω-limit
/// with [`chain_omega`], and the three terminal notions on the result.
pub fn cross_check(fs: &FiniteSystem) -> bool {
    let exact = exact_decomposition(fs);
    let dec = decompose(&fs.to_digraph());
    if dec.component_count() != exact.components.len() {
        return false;
    }
    for (c, members) in exact.components.iter().enumerate() {
        let id = dec.component_of(BoxId(members[0] as u32));
        let theirs: Vec<usize> = dec.boxes(id).iter().map(|b| b.index()).collect();
        if &theirs != members
            || dec.has_cycle(id) != exact.cyclic[c]
            || dec.is_terminal(id) != exact.terminal[c]
        {
            return false;
        }
    }
    let omega_ok = (0..fs.n).all(|x| {
        let theirs = chain_omega(&dec, BoxId(x as u32))
            .iter()
            .fold(0u64, |m, b| m | bit(b.index()));
        theirs == fs.chain_omega(x)
    });
    omega_ok && terminal_notions_agree(&dec)
}

/// All `n^n` maps `0..n -> 0..n`, in lexicographic order of `(f(0), .., f(n-1))`.
pub fn enumerate_functional(n: usize) -> Result<impl Iterator<Item = FiniteSystem>> {
    if !(1..=MAX_FUNCTIONAL_N).contains(&n) {
        return Err(Error::Precondition(format!(
            "n = {n} outside 1..={MAX_FUNCTIONAL_N}"
        )));
    }
    let total = (n as u64).pow(n as u32);
    Ok((0..total).map(move |i| functional_at(n, i)))
}

fn functional_at(n: usize, mut index: u64) -> FiniteSystem {
    let mut map = vec![0usize; n];
    for slot in map.iter_mut().rev() {
        *slot = (index % n as u64) as usize;
        index /= n as u64;
    }
    FiniteSystem::functional(&map).expect("digits are in range")
}

/// A uniformly random total relation on `n` states: each row is a uniform
/// nonempty subset.
pub fn random_total_relation(n: usize, rng: &mut impl Rng) -> FiniteSystem {
    let rows = (0..n)
        .map(|_| {
            if n == 64 {
                loop {
                    let r: u64 = rng.gen();
                    if r != 0 {
                        break r;
                    }
                }
            } else {
                rng.gen_range(1..bit(n))
            }
        })
        .collect();
    FiniteSystem::from_masks(rows).expect("rows are nonempty and in range")
}

/// `count` random total relations with `n` uniform in `1..=max_n`.
pub fn random_sweep(count: usize, max_n: usize, seed: u64) -> Result<Vec<FiniteSystem>> {
    if !(1..=MAX_STATES).contains(&max_n) {
        return Err(Error::Precondition(format!(
            "max_n = {max_n} outside 1..={MAX_STATES}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            random_total_relation(n, &mut rng)
        })
        .collect())
}

/// Failure counts over a family of systems.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub systems: usize,
    pub reachability_failures: usize,
    pub equivalence_failures: usize,
    pub maximality_failures: usize,
    pub cross_check_failures: usize,
}

impl CheckCounts {
    fn of(fs: &FiniteSystem) -> Self {
        CheckCounts {
            systems: 1,
            reachability_failures: usize::from(!verify_terminal_reachability(fs)),
            equivalence_failures: usize::from(!verify_omega_equivalence(fs)),
            maximality_failures: usize::from(!verify_maximality(fs)),
            cross_check_failures: usize::from(!cross_check(fs)),
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.systems += o.systems;
        self.reachability_failures += o.reachability_failures;
        self.equivalence_failures += o.equivalence_failures;
        self.maximality_failures += o.maximality_failures;
        self.cross_check_failures += o.cross_check_failures;
        self
    }

    pub fn all_green(&self) -> bool {
        self.reachability_failures == 0
            && self.equivalence_failures == 0
            && self.maximality_failures == 0
            && self.cross_check_failures == 0
    }
}

/// Runs every check on every functional system of size exactly `n`.
pub fn check_functional(n: usize) -> Result<CheckCounts> {
    let _ = enumerate_functional(n)?;
    let total = (n as u64).pow(n as u32);
    Ok((0..total)
        .into_par_iter()
        .map(|i| CheckCounts::of(&functional_at(n, i)))
        .reduce(CheckCounts::default, CheckCounts::merge))
}

pub fn check_all(systems: &[FiniteSystem]) -> CheckCounts {
    systems
        .par_iter()
        .map(CheckCounts::of)
        .reduce(CheckCounts::default, CheckCounts::merge)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub functional_max_n: usize,
    pub functional: CheckCounts,
    pub random_count: usize,
    pub random_max_n: usize,
    pub seed: u64,
    pub random: CheckCounts,
    pub all_green: bool,
}

/// Functional systems of every size up to `functional_max_n`, plus a seeded
/// random sweep.
pub fn run_oracle(
    functional_max_n: usize,
    random_count: usize,
    random_max_n: usize,
    seed: u64,
) -> Result<OracleSummary> {
    if functional_max_n > MAX_FUNCTIONAL_N {
        return Err(Error::Precondition(format!(
            "n = {functional_max_n} outside 1..={MAX_FUNCTIONAL_N}"
        )));
    }
    let mut functional = CheckCounts::default();
    for n in 1..=functional_max_n {
        functional = functional.merge(check_functional(n)?);
    }
    let random = check_all(&random_sweep(random_count, random_max_n, seed)?);
    Ok(OracleSummary {
        all_green: functional.all_green() && random.all_green(),
        functional_max_n,
        functional,
        random_count,
        random_max_n,
        seed,
        random,
    })
}
