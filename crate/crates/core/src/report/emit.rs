//! JSON, DOT and CSV writers. All output is deterministic: maps are ordered
//! and floats use the shortest round-trip formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::pipeline::{AnalysisReport, PipelineOutput};
use crate::chain_graph::ChainDecomposition;
use crate::components::component_period;
use crate::error::{Error, Result};
use crate::limits_basins::{BasinAssignment, BasinReport};
use crate::phase_space::Grid;
use crate::shadowing_lab::CCReport;

pub const REPORT_FILE: &str = "report.json";
pub const DOT_FILE: &str = "condensation.dot";
pub const CSV_FILE: &str = "boxes.csv";
pub const CSV_HEADER: [&str; 7] = [
    "id",
    "center_x",
    "center_y",
    "component",
    "terminal",
    "basin",
    "cc",
];

pub fn emit_json(report: &AnalysisReport) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(report).map_err(|e| Error::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report(text: &str) -> Result<AnalysisReport> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("bad report: {e}")))
}

/// The condensation DAG, nodes in ascending id order.
pub fn emit_dot(dec: &ChainDecomposition) -> String {
    let mut s = String::from("digraph condensation {\n    node [shape=circle];\n");
    for c in dec.component_ids() {
        let period = component_period(dec, c).map_or_else(|_| "-".to_string(), |p| p.to_string());
        let shape = if dec.is_terminal(c) {
            ", shape=doublecircle"
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "    c{} [label=\"C{} [n={}, p={}]\"{}];",
            c.0,
            c.0,
            dec.boxes(c).len(),
            period,
            shape
        );
    }
    for c in dec.component_ids() {
        for d in dec.successors(c) {
            let _ = writeln!(s, "    c{} -> c{};", c.0, d.0);
        }
    }
    s.push_str("}\n");
    s
}

/// One row per box. Columns whose analysis did not run are left empty.
pub fn emit_csv(
    grid: Option<&Grid>,
    dec: Option<&ChainDecomposition>,
    basins: Option<&BasinReport>,
    cc: Option<&CCReport>,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    if let Some(grid) = grid {
        for b in grid.boxes() {
            let c = grid.center(b);
            let y = if grid.dim() == 2 {
                c.get(1).to_string()
            } else {
                String::new()
            };
            let (component, terminal) = match dec {
                Some(dec) => {
                    let id = dec.component_of(b);
                    (id.0.to_string(), dec.is_terminal(id).to_string())
                }
                None => (String::new(), String::new()),
            };
            let basin = match basins.map(|r| r.of(b)) {
                Some(BasinAssignment::Terminal(id)) => id.0.to_string(),
                Some(BasinAssignment::Ambiguous) => "ambiguous".into(),
                None => String::new(),
            };
            let flag = cc.map_or_else(String::new, |r| r.in_cc(b).to_string());
            w.write_record([
                b.0.to_string(),
                c.x().to_string(),
                y,
                component,
                terminal,
                basin,
                flag,
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Writes `report.json`, `condensation.dot` and `boxes.csv` under `dir`.
pub fn write_outputs(out: &PipelineOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_FILE), emit_json(&out.report)?)?;
    let dot = match &out.decomposition {
        Some(dec) => emit_dot(dec),
        None => "digraph condensation {\n}\n".to_string(),
    };
    fs::write(dir.join(DOT_FILE), dot)?;
    let csv = emit_csv(
        out.grid.as_ref(),
        out.decomposition.as_ref(),
        out.basins.as_ref(),
        out.cc.as_ref(),
    )?;
    fs::write(dir.join(CSV_FILE), csv)?;
    Ok(())
}
