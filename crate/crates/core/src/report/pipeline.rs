//! Runs the requested analyses and collects their result blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Analysis, AnalysisConfig};
use crate::chain_graph::{build_chain_graph, scc_decompose, ChainDecomposition, ChainGraphParams};
use crate::components::{
    chain_recurrent_boxes, component_period, terminal_notions_agree, ComponentProfile, Resolution,
};
use crate::error::{Error, Result};
use crate::finite_oracle::{run_oracle, OracleSummary};
use crate::limits_basins::{
    basin_equivalences, coverage_study, every_box_reaches_terminal, terminal_basin_partition,
    BasinReport, CoverageParams, CoverageRow,
};
use crate::phase_space::{random_point, subdivide, Grid};
use crate::shadowing_lab::{
    cc_report, estimate_shadowing_modulus, expansion_factor, generate_pseudo_orbit,
    inverse_branch_shadow, orbit_deviation, shadowing_search, CCReport, ModulusEstimate,
    ModulusParams, PseudoOrbitKind,
};
use crate::systems::SystemDef;

/// Bumped whenever the JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub id: u32,
    pub box_count: usize,
    pub cyclic: bool,
    pub terminal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<u32>,
    pub successors: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalSummary {
    pub id: u32,
    pub box_count: usize,
    pub period: u32,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentsBlock {
    pub depth: u32,
    pub delta: f64,
    pub box_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    pub cyclic_count: usize,
    pub chain_recurrent_boxes: usize,
    pub terminal: Vec<TerminalSummary>,
    pub components: Vec<ComponentSummary>,
    pub terminal_notions_agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinsBlock {
    pub v_fraction: f64,
    pub ambiguous_boxes: usize,
    /// `(component id, boxes assigned)` for every terminal component.
    pub basin_sizes: Vec<(u32, usize)>,
    pub every_box_reaches_terminal: bool,
    pub equivalences_agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowingBlock {
    pub epsilon: f64,
    pub delta: f64,
    pub length: usize,
    pub trials: usize,
    pub search_depth: u32,
    /// Fraction of sampled pseudo-orbits with a witness at `search_depth`.
    pub found_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_witness_deviation: Option<f64>,
    /// Only for expanding maps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_branch_max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus_failure: Option<String>,
    /// These are sampled experiments, not proofs.
    pub empirical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcBlock {
    pub depth: u32,
    pub ladder: Vec<(u32, u32)>,
    pub horizon: usize,
    pub pair_fractions: Vec<f64>,
    pub cc_fraction: f64,
    pub monotone_in_j: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Results {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<ComponentsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basins: Option<BasinsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Vec<CoverageRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadowing: Option<ShadowingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc: Option<CcBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_oracle: Option<OracleSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisFailure {
    pub analysis: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub version: u32,
    pub config: AnalysisConfig,
    pub results: Results,
    #[serde(default)]
    pub errors: Vec<AnalysisFailure>,
    pub provenance: Provenance,
}

impl AnalysisReport {
    pub fn empty(config: AnalysisConfig) -> Self {
        AnalysisReport {
            version: SCHEMA_VERSION,
            provenance: Provenance {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                seed: config.seed,
            },
            config,
            results: Results::default(),
            errors: Vec::new(),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.errors.is_empty()
    }
}

/// The report plus the structures the DOT and CSV writers read.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub report: AnalysisReport,
    pub grid: Option<Grid>,
    pub decomposition: Option<ChainDecomposition>,
    pub basins: Option<BasinReport>,
    pub cc: Option<CCReport>,
}

fn components_block(dec: &ChainDecomposition, grid: &Grid, delta: f64) -> Result<ComponentsBlock> {
    let mut components = Vec::with_capacity(dec.component_count());
    let mut terminal = Vec::new();
    for c in dec.component_ids() {
        let period = if dec.has_cycle(c) {
            Some(component_period(dec, c)?)
        } else {
            None
        };
        components.push(ComponentSummary {
            id: c.0,
            box_count: dec.boxes(c).len(),
            cyclic: dec.has_cycle(c),
            terminal: dec.is_terminal(c),
            period,
            successors: dec.successors(c).iter().map(|d| d.0).collect(),
        });
        if dec.is_terminal(c) {
            let profile = ComponentProfile::new(dec, c)?;
            terminal.push(TerminalSummary {
                id: c.0,
                box_count: profile.box_count,
                period: profile.period,
                measure: profile.measure(),
            });
        }
    }
    Ok(ComponentsBlock {
        depth: grid.depth(),
        delta,
        box_count: grid.box_count(),
        edge_count: dec.graph().edge_count(),
        component_count: dec.component_count(),
        cyclic_count: components.iter().filter(|c| c.cyclic).count(),
        chain_recurrent_boxes: chain_recurrent_boxes(dec).len(),
        terminal,
        components,
        terminal_notions_agree: terminal_notions_agree(dec),
    })
}

fn basins_block(dec: &ChainDecomposition, report: &BasinReport) -> BasinsBlock {
    BasinsBlock {
        v_fraction: report.v_fraction,
        ambiguous_boxes: report.ambiguous_count(),
        basin_sizes: report
            .per_component_basin_size
            .iter()
            .map(|(c, n)| (c.0, *n))
            .collect(),
        every_box_reaches_terminal: every_box_reaches_terminal(dec),
        equivalences_agree: basin_equivalences(dec, report).iter().all(|e| e.agrees()),
    }
}

fn shadowing_block(sys: &SystemDef, cfg: &AnalysisConfig) -> Result<ShadowingBlock> {
    let sh = &cfg.shadowing;
    let kinds = [
        PseudoOrbitKind::PerturbedOrbit,
        PseudoOrbitKind::RandomWalk,
        PseudoOrbitKind::Spliced { at: sh.length / 2 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found = 0;
    let mut max_dev: Option<f64> = None;
    let mut ib_dev: Option<f64> = None;
    for t in 0..sh.trials {
        let x0 = random_point(sys.domain(), &mut rng);
        let kind = match kinds[t % 3] {
            PseudoOrbitKind::Spliced { at } => PseudoOrbitKind::Spliced { at: at.max(1) },
            k => k,
        };
        let po = generate_pseudo_orbit(sys, &x0, sh.delta, sh.length, rng.gen(), kind)?;
        let res = shadowing_search(sys, &po, sh.epsilon, sh.search_depth)?;
        if let Some(d) = res.deviation {
            found += 1;
            max_dev = Some(max_dev.map_or(d, |m| m.max(d)));
        }
        if expansion_factor(sys).is_some() {
            let d = orbit_deviation(sys, &inverse_branch_shadow(sys, &po)?, &po);
            ib_dev = Some(ib_dev.map_or(d, |m| m.max(d)));
        }
    }
    let (modulus, modulus_failure) = if sh.modulus {
        let params = ModulusParams {
            length: sh.length,
            search_depth: sh.search_depth,
            kinds: kinds.to_vec(),
            ..ModulusParams::default()
        };
        match estimate_shadowing_modulus(sys, sh.epsilon, sh.trials, cfg.seed, &params) {
            Ok(m) => (Some(m), None),
            Err(e @ Error::NoModulus { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(ShadowingBlock {
        epsilon: sh.epsilon,
        delta: sh.delta,
        length: sh.length,
        trials: sh.trials,
        search_depth: sh.search_depth,
        found_fraction: found as f64 / sh.trials as f64,
        max_witness_deviation: max_dev,
        inverse_branch_max_deviation: ib_dev,
        modulus,
        modulus_failure,
        empirical: true,
    })
}

/// Membership at `(j1, l)` implies membership at `(j2, l)` for `j2 >= j1`.
pub fn cc_monotone_in_j(rep: &CCReport) -> bool {
    let ladder = &rep.ladder;
    rep.membership.iter().all(|row| {
        (0..ladder.len()).all(|a| {
            (0..ladder.len()).all(|b| {
                let ((j1, l1), (j2, l2)) = (ladder[a], ladder[b]);
                !(l1 == l2 && j2 >= j1 && row[a]) || row[b]
            })
        })
    })
}

fn cc_block(rep: &CCReport) -> CcBlock {
    CcBlock {
        depth: rep.depth,
        ladder: rep.ladder.clone(),
        horizon: rep.horizon,
        pair_fractions: rep.pair_fractions.clone(),
        cc_fraction: rep.cc_fraction,
        monotone_in_j: cc_monotone_in_j(rep),
    }
}

/// Runs every requested analysis. Failures are recorded in the report's
/// `errors` list; analyses that do not depend on a failed step still run.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<PipelineOutput> {
    let sys = cfg.system_def()?;
    let mut report = AnalysisReport::empty(cfg.clone());
    let mut out_dec = None;
    let mut out_basins = None;
    let mut out_cc = None;
    let fail = |report: &mut AnalysisReport, a: Analysis, e: Error| {
        report.errors.push(AnalysisFailure {
            analysis: a.name().into(),
            message: e.to_string(),
        })
    };

    let grid = cfg.depth.map(|d| subdivide(*sys.domain(), d)).transpose()?;
    let delta = cfg.delta;

    if cfg.wants(Analysis::Components) || cfg.wants(Analysis::Basins) {
        let (grid, delta) = (grid.expect("validated"), delta.expect("validated"));
        let built = ChainGraphParams::new(delta, cfg.rigor_margin)
            .and_then(|p| build_chain_graph(&sys, &grid, p))
            .map(|g| scc_decompose(&g));
        match built {
            Ok(dec) => {
                if cfg.wants(Analysis::Components) {
                    match components_block(&dec, &grid, delta) {
                        Ok(b) => report.results.components = Some(b),
                        Err(e) => fail(&mut report, Analysis::Components, e),
                    }
                }
                if cfg.wants(Analysis::Basins) {
                    let partition = terminal_basin_partition(&dec);
                    report.results.basins = Some(basins_block(&dec, &partition));
                    out_basins = Some(partition);
                }
                out_dec = Some(dec);
            }
            Err(e) => {
                for a in [Analysis::Components, Analysis::Basins] {
                    if cfg.wants(a) {
                        fail(&mut report, a, e.clone());
                    }
                }
            }
        }
    }

    if cfg.wants(Analysis::CoverageStudy) {
        let cov = &cfg.coverage;
        let params = CoverageParams {
            resolution: Resolution {
                delta_boxes: 1.0,
                rigor_margin: cfg.rigor_margin,
            },
            j: cov.j,
            m: cov.m,
            horizon: cov.horizon,
            samples: cov.samples,
            seed: cfg.seed,
            m_scan: cov.m_scan.clone(),
        };
        match coverage_study(&sys, cfg.depths.as_deref().unwrap_or_default(), &params) {
            Ok(rows) => report.results.coverage = Some(rows),
            Err(e) => fail(&mut report, Analysis::CoverageStudy, e),
        }
    }

    if cfg.wants(Analysis::Shadowing) {
        match shadowing_block(&sys, cfg) {
            Ok(b) => report.results.shadowing = Some(b),
            Err(e) => fail(&mut report, Analysis::Shadowing, e),
        }
    }

    if cfg.wants(Analysis::CcReport) {
        let grid = grid.expect("validated");
        match cc_report(
            &sys,
            &grid,
            &cfg.cc.ladder,
            Some(cfg.cc_horizon()),
            cfg.rigor_margin,
        ) {
            Ok(rep) => {
                report.results.cc = Some(cc_block(&rep));
                out_cc = Some(rep);
            }
            Err(e) => fail(&mut report, Analysis::CcReport, e),
        }
    }

    if cfg.wants(Analysis::FiniteOracle) {
        let fo = &cfg.finite_oracle;
        match run_oracle(fo.n, fo.random, fo.random_max_n, cfg.seed) {
            Ok(summary) => report.results.finite_oracle = Some(summary),
            Err(e) => fail(&mut report, Analysis::FiniteOracle, e),
        }
    }

    Ok(PipelineOutput {
        report,
        grid,
        decomposition: out_dec,
        basins: out_basins,
        cc: out_cc,
    })
}
