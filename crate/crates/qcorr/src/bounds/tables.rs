//! Reference-table reproduction: recomputes every cell of the three
//! benchmark tables and compares against the published values.
//!
//! The four benchmark states are the two-qubit maximally entangled state,
//! the 4x4 maximally entangled state, the Werner state at `k = -1` on 8x8,
//! and the same 64-dimensional matrix re-read across the 2x32 cut. Witness
//! rows come from the negativity and random-robustness families; discord
//! rows measure the smaller factor.
//!
//! Cells marked `informational` are reported but excluded from the overall
//! verdict: the published random-robustness witness for the 4x4 and 2x32
//! rows came from a sampled optimizer run, so its norm cells carry sampling
//! noise, and the last column of the third table does not match its own
//! stated definition for three of the four rows.

use serde::Serialize;

use crate::config::RunConfig;
use crate::discord;
use crate::error::Result;
use crate::matops::{Cut, Side};
use crate::states::{self, BipartiteState};
use crate::witness;

/// Comparison of one computed cell against its published value.
#[derive(Clone, Debug, Serialize)]
pub struct CellVerdict {
    pub table: u8,
    pub row: String,
    pub column: String,
    pub computed: f64,
    pub published: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub pass: bool,
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// All cell verdicts; `all_pass` covers the non-informational cells only.
#[derive(Clone, Debug, Serialize)]
pub struct TableVerdicts {
    pub seed: u64,
    pub restarts: usize,
    pub cells: Vec<CellVerdict>,
    pub all_pass: bool,
}

impl TableVerdicts {
    pub fn failures(&self) -> impl Iterator<Item = &CellVerdict> {
        self.cells
            .iter()
            .filter(|c| !c.pass && !c.informational)
    }
}

/// Absolute tolerance for cells printed to full shown precision.
const EXACT: f64 = 1e-6;
/// Absolute tolerance for cells printed from a sampled witness run.
const SAMPLED: f64 = 1e-2;
/// Absolute tolerance for four-decimal rounded cells.
const ROUNDED: f64 = 1e-3;
/// Relative tolerance for the optimized discord cells.
const DISCORD_REL: f64 = 0.02;

struct Quantities {
    label: String,
    dim: f64,
    negativity: f64,
    exp_wn: f64,
    tr_wn_sq: f64,
    sup_wn: f64,
    exp_wr: f64,
    tr_wr_sq: f64,
    sup_wr: f64,
    rr_value: f64,
    d1: f64,
    d2: f64,
}

fn benchmark_states() -> Result<Vec<(BipartiteState, Side)>> {
    let bell = states::max_entangled(2)?;
    let maxent4 = states::max_entangled(4)?;
    let werner8 = states::werner(8, -1.0)?;
    let recut = werner8.rebipartition(Cut::new(2, 32)?)?;
    Ok(vec![
        (bell, Side::B),
        (maxent4, Side::B),
        (werner8, Side::B),
        (recut, Side::A),
    ])
}

fn compute_row(state: &BipartiteState, side: Side, config: &RunConfig) -> Result<Quantities> {
    let wn = witness::negativity_witness(state)?;
    let wr = witness::random_robustness_decomposable(state)?;
    let d1 = discord::d1_discord(state, side, config)?;
    let d2 = discord::d2_discord(state, side, config)?;
    Ok(Quantities {
        label: state.label().to_string(),
        dim: state.dim() as f64,
        negativity: witness::negativity(state),
        exp_wn: wn.expectation,
        tr_wn_sq: wn.tr_w_squared,
        sup_wn: wn.sup_norm,
        exp_wr: wr.expectation,
        tr_wr_sq: wr.tr_w_squared,
        sup_wr: wr.sup_norm,
        rr_value: wr.value,
        d1: d1.value,
        d2: d2.value,
    })
}

struct CellSpec {
    column: &'static str,
    published: f64,
    tolerance: f64,
    relative: bool,
    informational: bool,
    note: Option<&'static str>,
}

fn cell(column: &'static str, published: f64, tolerance: f64) -> CellSpec {
    CellSpec {
        column,
        published,
        tolerance,
        relative: false,
        informational: false,
        note: None,
    }
}

fn rel_cell(column: &'static str, published: f64, tolerance: f64) -> CellSpec {
    CellSpec {
        relative: true,
        ..cell(column, published, tolerance)
    }
}

fn info_cell(column: &'static str, published: f64, note: &'static str) -> CellSpec {
    CellSpec {
        informational: true,
        note: Some(note),
        ..cell(column, published, ROUNDED)
    }
}

const SAMPLED_NOTE: &str = "published witness came from a sampled run";
const RR_COLUMN_NOTE: &str = "printed column is inconsistent with its stated definition";

fn table1_row(q: &Quantities) -> Vec<CellSpec> {
    match q.label.as_str() {
        l if l.starts_with("max_entangled(2)") => vec![
            cell("tr_rho_wn", -0.5, EXACT),
            cell("tr_rho_wr", -0.5, EXACT),
            cell("tr_wn_sq", 1.0, EXACT),
            cell("tr_wr_sq", 1.0, EXACT),
            cell("sup_wn", 0.5, EXACT),
            cell("sup_wr", 0.5, EXACT),
        ],
        l if l.starts_with("max_entangled(4)") => vec![
            cell("tr_rho_wn", -1.5, EXACT),
            cell("tr_rho_wr", -0.25, EXACT),
            cell("tr_wn_sq", 6.0, EXACT),
            cell("tr_wr_sq", 0.1677, SAMPLED),
            cell("sup_wn", 1.5, EXACT),
            cell("sup_wr", 0.2503, SAMPLED),
        ],
        l if l.starts_with("werner(8") && !l.contains("2x32") => vec![
            cell("tr_rho_wn", -0.125, EXACT),
            cell("tr_rho_wr", -0.125, EXACT),
            cell("tr_wn_sq", 1.0, EXACT),
            cell("tr_wr_sq", 1.0, EXACT),
            cell("sup_wn", 0.125, EXACT),
            cell("sup_wr", 0.125, EXACT),
        ],
        _ => vec![
            cell("tr_rho_wn", -0.1786, ROUNDED),
            cell("tr_rho_wr", -0.0179, ROUNDED),
            cell("tr_wn_sq", 10.0, EXACT),
            cell("tr_wr_sq", 0.1013, SAMPLED),
            cell("sup_wn", 0.5, EXACT),
            info_cell("sup_wr", 0.06, SAMPLED_NOTE),
        ],
    }
}

fn table1_value(q: &Quantities, column: &str) -> f64 {
    match column {
        "tr_rho_wn" => q.exp_wn,
        "tr_rho_wr" => q.exp_wr,
        "tr_wn_sq" => q.tr_wn_sq,
        "tr_wr_sq" => q.tr_wr_sq,
        "sup_wn" => q.sup_wn,
        "sup_wr" => q.sup_wr,
        _ => unreachable!(),
    }
}

struct Table2Row {
    d2: f64,
    ratio_wn2: f64,
    ratio_wr2: f64,
    d1: f64,
    ratio_wn1: f64,
    ratio_wr1: f64,
}

fn table2_published(label: &str) -> Table2Row {
    match label {
        l if l.starts_with("max_entangled(2)") => Table2Row {
            d2: 0.5,
            ratio_wn2: 0.25,
            ratio_wr2: 0.25,
            d1: 1.0,
            ratio_wn1: 1.0,
            ratio_wr1: 1.0,
        },
        l if l.starts_with("max_entangled(4)") => Table2Row {
            d2: 0.75,
            ratio_wn2: 0.375,
            ratio_wr2: 0.3727,
            d1: 1.5,
            ratio_wn1: 1.0,
            ratio_wr1: 0.9988,
        },
        l if l.starts_with("werner(8") && !l.contains("2x32") => Table2Row {
            d2: 0.0179,
            ratio_wn2: 0.0156,
            ratio_wr2: 0.0156,
            d1: 1.0,
            ratio_wn1: 1.0,
            ratio_wr1: 1.0,
        },
        _ => Table2Row {
            d2: 0.0102,
            ratio_wn2: 0.0032,
            ratio_wr2: 0.0032,
            d1: 0.5714,
            ratio_wn1: 0.358,
            ratio_wr1: 0.2983,
        },
    }
}

struct Table3Row {
    d2: f64,
    neg_sq_over_dim: f64,
    d1: f64,
    neg_over_dim: f64,
    rr_over_dim: f64,
}

fn table3_published(label: &str) -> Table3Row {
    match label {
        l if l.starts_with("max_entangled(2)") => Table3Row {
            d2: 0.5,
            neg_sq_over_dim: 0.0833,
            d1: 1.0,
            neg_over_dim: 0.125,
            rr_over_dim: 0.5,
        },
        l if l.starts_with("max_entangled(4)") => Table3Row {
            d2: 0.75,
            neg_sq_over_dim: 0.15,
            d1: 1.5,
            neg_over_dim: 0.0938,
            rr_over_dim: 0.25,
        },
        l if l.starts_with("werner(8") && !l.contains("2x32") => Table3Row {
            d2: 0.0179,
            neg_sq_over_dim: 0.0002,
            d1: 1.0,
            neg_over_dim: 0.002,
            rr_over_dim: 0.002,
        },
        _ => Table3Row {
            d2: 0.0102,
            neg_sq_over_dim: 0.0005,
            d1: 0.5714,
            neg_over_dim: 0.0028,
            rr_over_dim: 0.0179,
        },
    }
}

fn verdict(
    table: u8,
    row: &str,
    spec: CellSpec,
    computed: f64,
    tol_scale: f64,
) -> CellVerdict {
    let tolerance = spec.tolerance * tol_scale;
    let err = (computed - spec.published).abs();
    let allowed = if spec.relative {
        tolerance * spec.published.abs()
    } else {
        tolerance
    };
    CellVerdict {
        table,
        row: row.to_string(),
        column: spec.column.to_string(),
        computed,
        published: spec.published,
        tolerance,
        relative: spec.relative,
        pass: err <= allowed,
        informational: spec.informational,
        note: spec.note.map(str::to_string),
    }
}

/// Recomputes the three benchmark tables and grades every cell. The last
/// column of the third table is emitted only when `include_table3_rr` is
/// set, always as informational.
pub fn reproduce_tables(config: &RunConfig, include_table3_rr: bool) -> Result<TableVerdicts> {
    let mut cells = Vec::new();
    let ts = config.tol_scale;

    for (state, side) in benchmark_states()? {
        let q = compute_row(&state, side, config)?;
        let row = q.label.clone();

        for spec in table1_row(&q) {
            let computed = table1_value(&q, spec.column);
            cells.push(verdict(1, &row, spec, computed, ts));
        }

        let p2 = table2_published(&q.label);
        let ratio_wn2 = q.exp_wn * q.exp_wn / q.tr_wn_sq;
        let ratio_wr2 = q.exp_wr * q.exp_wr / q.tr_wr_sq;
        let ratio_wn1 = -q.exp_wn / q.sup_wn;
        let ratio_wr1 = -q.exp_wr / q.sup_wr;
        cells.push(verdict(2, &row, rel_cell("d2", p2.d2, DISCORD_REL), q.d2, ts));
        cells.push(verdict(
            2,
            &row,
            cell("bound_d2_wn_ratio", p2.ratio_wn2, ROUNDED),
            ratio_wn2,
            ts,
        ));
        cells.push(verdict(
            2,
            &row,
            info_cell("bound_d2_wr_ratio", p2.ratio_wr2, SAMPLED_NOTE),
            ratio_wr2,
            ts,
        ));
        cells.push(verdict(2, &row, rel_cell("d1", p2.d1, DISCORD_REL), q.d1, ts));
        cells.push(verdict(
            2,
            &row,
            cell("bound_d1_wn_ratio", p2.ratio_wn1, ROUNDED),
            ratio_wn1,
            ts,
        ));
        cells.push(verdict(
            2,
            &row,
            info_cell("bound_d1_wr_ratio", p2.ratio_wr1, SAMPLED_NOTE),
            ratio_wr1,
            ts,
        ));

        let p3 = table3_published(&q.label);
        let neg_sq_over_dim = q.negativity * q.negativity / (q.dim - 1.0);
        let neg_over_dim = q.negativity / q.dim;
        cells.push(verdict(3, &row, rel_cell("d2", p3.d2, DISCORD_REL), q.d2, ts));
        cells.push(verdict(
            3,
            &row,
            cell("neg_sq_over_dim", p3.neg_sq_over_dim, ROUNDED),
            neg_sq_over_dim,
            ts,
        ));
        cells.push(verdict(3, &row, rel_cell("d1", p3.d1, DISCORD_REL), q.d1, ts));
        cells.push(verdict(
            3,
            &row,
            cell("neg_over_dim", p3.neg_over_dim, ROUNDED),
            neg_over_dim,
            ts,
        ));
        if include_table3_rr {
            cells.push(verdict(
                3,
                &row,
                info_cell("rr_over_dim", p3.rr_over_dim, RR_COLUMN_NOTE),
                q.rr_value / q.dim,
                ts,
            ));
        }
    }

    let all_pass = cells.iter().all(|c| c.pass || c.informational);
    Ok(TableVerdicts {
        seed: config.seed,
        restarts: config.restarts,
        cells,
        all_pass,
    })
}
