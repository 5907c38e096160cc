use std::collections::BTreeSet;

use chainrec::chain_graph::box_image;
use chainrec::components::terminal_notions_agree;
use chainrec::finite_oracle::{cross_check, FiniteSystem};
use chainrec::limits_basins::{terminal_basin_partition, w_membership, BasinAssignment};
use chainrec::phase_space::metric_distance;
use chainrec::shadowing_lab::{
    cc_report, generate_pseudo_orbit, inverse_branch_shadow, orbit_deviation, shadowing_search,
    PseudoOrbitKind,
};
use chainrec::{
    build_chain_graph, builtin_with, decompose, neighborhood_boxes, scc_decompose, subdivide,
    BoxId, BoxSet, ChainGraphParams, Digraph, Domain, Point,
};
use proptest::prelude::*;

fn any_domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::unit_interval()),
        Just(Domain::circle()),
        Just(Domain::torus()),
        Just(Domain::square((-1.0, 2.0), (0.0, 0.5)).unwrap()),
    ]
}

fn point_in(d: &Domain, u: f64, v: f64) -> Point {
    let (x0, x1) = d.axis(0);
    let x = x0 + u * (x1 - x0);
    if d.dim() == 1 {
        Point::new1(x)
    } else {
        let (y0, y1) = d.axis(1);
        Point::new2(x, y0 + v * (y1 - y0))
    }
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

/// Reachability by DFS from one node, including the node itself.
fn brute_reach(succ: &[Vec<u32>], s: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for &v in &succ[u] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v as usize);
            }
        }
    }
    seen
}

fn random_digraph() -> impl Strategy<Value = Vec<Vec<u32>>> {
    (1usize..14)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n as u32, 0..4), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn metric_axioms(d in any_domain(), a in (unit(), unit()), b in (unit(), unit()), c in (unit(), unit())) {
        let (p, q, r) = (point_in(&d, a.0, a.1), point_in(&d, b.0, b.1), point_in(&d, c.0, c.1));
        let dpq = metric_distance(&p, &q, &d);
        prop_assert!(dpq >= 0.0);
        prop_assert_eq!(metric_distance(&p, &p, &d), 0.0);
        prop_assert_eq!(dpq, metric_distance(&q, &p, &d));
        prop_assert!(dpq <= metric_distance(&p, &r, &d) + metric_distance(&r, &q, &d) + 1e-12);
        prop_assert!(dpq <= d.diameter() + 1e-12);
    }

    #[test]
    fn boxes_partition_domain(d in any_domain(), depth in 0u32..7, u in unit(), v in unit()) {
        let grid = subdivide(d, depth).unwrap();
        let p = point_in(&d, u, v);
        let b = grid.box_of(&p).unwrap();
        prop_assert_eq!(grid.point_box_distance(&p, b), 0.0);
        // No other box claims p as an interior point.
        for o in grid.boxes().filter(|&o| o != b) {
            let bounds = grid.bounds(o);
            let inside = (0..grid.dim()).all(|a| bounds[a].0 < p.get(a) && p.get(a) < bounds[a].1);
            prop_assert!(!inside);
        }
        let vol: f64 = (0..grid.dim()).map(|a| grid.width(a)).product();
        let total: f64 = (0..d.dim()).map(|a| d.span(a)).product();
        prop_assert!((vol * grid.box_count() as f64 - total).abs() < 1e-9 * total);
    }

    #[test]
    fn neighborhood_monotone(depth in 2u32..6, seeds in prop::collection::vec(0u32..1024, 1..4), r1 in 0.0..0.3f64, dr in 0.0..0.3f64) {
        let grid = subdivide(Domain::circle(), depth).unwrap();
        let s = BoxSet::from_indices(seeds.iter().map(|&i| i % grid.box_count() as u32));
        let small = neighborhood_boxes(&s, r1, &grid);
        let big = neighborhood_boxes(&s, r1 + dr, &grid);
        prop_assert!(s.is_subset(&small));
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn enclosure_contains_sampled_images(
        name in prop::sample::select(vec!["doubling", "logistic", "tent", "north_south", "rotation", "cat_map"]),
        depth in 1u32..6,
        idx in 0u32..4096,
        u in unit(),
        v in unit(),
    ) {
        let sys = builtin_with(name, &[]).unwrap();
        let grid = subdivide(*sys.domain(), depth).unwrap();
        let b = BoxId(idx % grid.box_count() as u32);
        let enc = box_image(&sys, b, &grid, 0.0);
        let bounds = grid.bounds(b);
        let coords: Vec<f64> = (0..grid.dim())
            .map(|a| bounds[a].0 + [u, v][a] * (bounds[a].1 - bounds[a].0))
            .collect();
        let p = Point::from_slice(&coords).unwrap();
        let img = sys.eval(&p);
        prop_assert!(enc.contains(&img), "{name}: f({p:?}) = {img:?} escapes {:?}", enc.bounds());
    }

    #[test]
    fn graph_edges_cover_true_chains(depth in 3u32..7, delta_boxes in 0.0..2.0f64, u in unit()) {
        // Soundness: the box of f(x) is within δ of the image of box(x), so the edge exists.
        let sys = builtin_with("logistic", &[("r", 3.7)]).unwrap();
        let grid = subdivide(*sys.domain(), depth).unwrap();
        let params = ChainGraphParams::new(delta_boxes * grid.max_width(), 0.0).unwrap();
        let g = build_chain_graph(&sys, &grid, params).unwrap();
        let x = Point::new1(u);
        let bx = grid.box_of(&x).unwrap();
        let by = grid.box_of(&sys.eval(&x)).unwrap();
        prop_assert!(g.graph().has_edge(bx, by));
    }

    #[test]
    fn scc_matches_mutual_reachability(succ in random_digraph()) {
        let g = Digraph::from_adjacency(succ.clone()).unwrap();
        let dec = decompose(&g);
        let n = succ.len();
        let reach: Vec<Vec<bool>> = (0..n).map(|s| brute_reach(&succ, s)).collect();
        for (a, ra) in reach.iter().enumerate() {
            for (b, rb) in reach.iter().enumerate() {
                let same = dec.component_of(BoxId(a as u32)) == dec.component_of(BoxId(b as u32));
                prop_assert_eq!(same, ra[b] && rb[a]);
            }
        }
        // Numbering follows the smallest member box.
        let firsts: Vec<u32> = dec.component_ids().map(|c| dec.boxes(c)[0].0).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        for c in dec.component_ids() {
            let sink = dec.successors(c).is_empty();
            prop_assert_eq!(dec.is_terminal(c), sink && dec.has_cycle(c));
        }
    }

    #[test]
    fn finite_decomposition_cross_checks(rows in (1usize..10).prop_flat_map(|n| prop::collection::vec(1u64..(1u64 << n), n))) {
        let fs = FiniteSystem::from_masks(rows).unwrap();
        prop_assert!(cross_check(&fs));
        prop_assert!(terminal_notions_agree(&decompose(&fs.to_digraph())));
    }

    #[test]
    fn search_witness_is_sound(x0 in unit(), seed in 0u64..1000) {
        let sys = builtin_with("doubling", &[]).unwrap();
        let po = generate_pseudo_orbit(&sys, &Point::new1(x0), 0.002, 8, seed, PseudoOrbitKind::RandomWalk).unwrap();
        let res = shadowing_search(&sys, &po, 0.05, 12).unwrap();
        prop_assert!(res.found);
        let w = res.witness.unwrap();
        let dev = orbit_deviation(&sys, &w, &po);
        prop_assert!(dev <= 0.05);
        prop_assert_eq!(Some(dev), res.deviation);
    }

    #[test]
    fn cc_cells_grow_with_j(depth in 3u32..6, beta in 0.3..1.0f64) {
        let sys = builtin_with("north_south", &[("beta", beta)]).unwrap();
        let grid = subdivide(*sys.domain(), depth).unwrap();
        let ladder = [(4, 4), (8, 4), (16, 4)];
        let rep = cc_report(&sys, &grid, &ladder, Some(60), 0.0).unwrap();
        for row in &rep.membership {
            prop_assert!(!row[0] || row[1]);
            prop_assert!(!row[1] || row[2]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn w_membership_shrinks_with_j(u in unit(), m in 0usize..50) {
        let sys = builtin_with("rotation", &[]).unwrap();
        let grid = subdivide(*sys.domain(), 6).unwrap();
        let g = build_chain_graph(&sys, &grid, ChainGraphParams::new(grid.max_width(), 0.0).unwrap()).unwrap();
        let dec = scc_decompose(&g);
        let rep = terminal_basin_partition(&dec);
        let x = Point::new1(u);
        prop_assume!(matches!(rep.of(grid.box_of(&x).unwrap()), BasinAssignment::Terminal(_)));
        let members: Vec<bool> = [2u32, 4, 8, 16, 64]
            .iter()
            .map(|&j| w_membership(&sys, &x, j, m, 640, &dec, &rep).unwrap().member)
            .collect();
        // W_{j',m} ⊂ W_{j,m} for j' > j.
        prop_assert!(members.windows(2).all(|w| w[0] || !w[1]));
    }
}

#[test]
fn inverse_branch_bound_on_100_orbits() {
    for (name, lambda) in [("doubling", 2.0), ("tent", 2.0)] {
        let sys = builtin_with(name, &[]).unwrap();
        let delta = 1e-3;
        let bound = delta * lambda / (lambda - 1.0);
        let mut worst: f64 = 0.0;
        for seed in 0..100u64 {
            let x0 = Point::new1((seed as f64 * 0.618_033_988_75).fract());
            let kind =
                [PseudoOrbitKind::PerturbedOrbit, PseudoOrbitKind::RandomWalk][seed as usize % 2];
            let po = generate_pseudo_orbit(&sys, &x0, delta, 40, seed, kind).unwrap();
            let y = inverse_branch_shadow(&sys, &po).unwrap();
            worst = worst.max(orbit_deviation(&sys, &y, &po));
        }
        assert!(worst <= bound + 1e-12, "{name}: worst {worst} > {bound}");
    }
}

#[test]
fn brute_force_scc_on_chain_graph() {
    let sys = builtin_with("north_south", &[]).unwrap();
    let grid = subdivide(*sys.domain(), 5).unwrap();
    let g = build_chain_graph(
        &sys,
        &grid,
        ChainGraphParams::new(grid.max_width(), 0.0).unwrap(),
    )
    .unwrap();
    let dec = scc_decompose(&g);
    let succ: Vec<Vec<u32>> = grid
        .boxes()
        .map(|b| g.successors(b).map(|c| c.0).collect())
        .collect();
    let reach: Vec<Vec<bool>> = (0..succ.len()).map(|s| brute_reach(&succ, s)).collect();
    let mut classes = BTreeSet::new();
    for (a, ra) in reach.iter().enumerate() {
        let class: Vec<usize> = (0..succ.len()).filter(|&b| ra[b] && reach[b][a]).collect();
        classes.insert(class);
    }
    assert_eq!(classes.len(), dec.component_count());
}
