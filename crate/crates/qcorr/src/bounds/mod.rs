//! Discord-versus-entanglement bounds: assembling witness quantities into
//! lower bounds on the geometric discords, with verdict reports.
//!
//! The central inequality is the Hölder chain: for any state `rho`, any
//! classical-quantum `xi` and any certified witness `W`,
//! `||rho - xi||_p ||W||_q >= |Tr[(rho - xi) W]| >= -Tr[rho W]`,
//! so `D_p >= (E_w / ||W||_q)^p` with `q` the Hölder conjugate. Specialized
//! forms: `D_1 >= E_w / ||W||_inf`, `D_2 >= E_w^2 / Tr W^2`, and with the
//! negativity witness `D_2 >= N^2 / n_minus`.

pub mod sweep;
pub mod tables;

use serde::Serialize;

use crate::config::RunConfig;
use crate::discord::{self, DiscordResult, InnerMode};
use crate::error::{Error, Result};
use crate::matops::{self, Cut, Side};
use crate::states::BipartiteState;
use crate::witness::{self, EntanglementResult};

pub use sweep::{sweep_family, sweep_to_csv, SweepFamily, SweepRow, DETECTION_THRESHOLD};
pub use tables::{reproduce_tables, CellVerdict, TableVerdicts};

/// Margins below this are treated as violations of a proved inequality.
pub const MARGIN_TOL: f64 = -1e-6;

/// Lower bound `(E_w / ||W||_q)^p` on `D_p` from a witnessed value, where
/// `q = p / (p - 1)` is the Hölder conjugate (`q = inf` for `p = 1`).
/// The witness does not need to be optimal; any certified member of the
/// family gives a valid bound.
pub fn bound_dp(e_w: f64, w: &witness::Witness, p: f64) -> Result<f64> {
    if e_w < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "witnessed value must be nonnegative, got {e_w}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bound needs p >= 1, got {p}"
        )));
    }
    if e_w == 0.0 {
        return Ok(0.0);
    }
    let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let norm = matops::schatten(&w.matrix, q)?;
    if norm <= 0.0 {
        return Err(Error::InvalidArgument("witness has zero norm".into()));
    }
    Ok((e_w / norm).powf(p))
}

/// `D_2 >= N^2 / n_minus`; zero for PPT states.
pub fn bound_d2_negativity(state: &BipartiteState) -> f64 {
    let n = witness::negativity(state);
    let nm = witness::n_minus(state);
    if nm == 0 {
        0.0
    } else {
        n * n / nm as f64
    }
}

/// Dimension-only variant `N^2 / (d - 1)` with `d` the total dimension,
/// valid because `n_minus <= d - 1`. Weaker than [`bound_d2_negativity`].
pub fn bound_d2_negativity_dim(state: &BipartiteState) -> f64 {
    let n = witness::negativity(state);
    let d = state.dim() as f64;
    n * n / (d - 1.0)
}

/// Which quantifiers [`verify_bounds`] computes beyond the analytic ones.
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub d1: bool,
    pub d2: bool,
    /// Measured side for the discords; `None` picks the smaller factor.
    pub side: Option<Side>,
    /// Run the cutting-plane random robustness (expensive, certified).
    pub rr_certified: bool,
    /// Run the PPT relaxation of the generalized robustness.
    pub rg_ppt: bool,
    /// Exponents for the general-p bound list.
    pub general_p: Vec<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> AnalysisOptions {
        AnalysisOptions {
            d1: true,
            d2: true,
            side: None,
            rr_certified: false,
            rg_ppt: false,
            general_p: vec![1.0, 2.0, 3.0],
        }
    }
}

/// Default measured side: the smaller factor, side B on ties.
pub fn default_side(cut: Cut) -> Side {
    if cut.d_a < cut.d_b {
        Side::A
    } else {
        Side::B
    }
}

/// Scalar summary of an [`EntanglementResult`] for reports.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub value: f64,
    pub expectation: f64,
    pub tr_w_squared: f64,
    pub sup_norm: f64,
    pub margin: Option<f64>,
    pub capped: bool,
}

impl From<&EntanglementResult> for WitnessSummary {
    fn from(r: &EntanglementResult) -> WitnessSummary {
        WitnessSummary {
            value: r.value,
            expectation: r.expectation,
            tr_w_squared: r.tr_w_squared,
            sup_norm: r.sup_norm,
            margin: r.witness.certificate.map(|c| c.margin),
            capped: r.capped,
        }
    }
}

/// Scalar summary of a [`DiscordResult`] for reports.
#[derive(Clone, Debug, Serialize)]
pub struct DiscordSummary {
    pub p: f64,
    pub side: Side,
    pub value: f64,
    pub dephased_value: f64,
    pub inner: String,
    pub best_restart: usize,
    pub converged: bool,
}

impl From<&DiscordResult> for DiscordSummary {
    fn from(r: &DiscordResult) -> DiscordSummary {
        DiscordSummary {
            p: r.p,
            side: r.side,
            value: r.value,
            dephased_value: r.diagnostics.dephased_value,
            inner: match r.diagnostics.inner {
                InnerMode::Dephased => "dephased".into(),
                InnerMode::Refined { .. } => "refined".into(),
            },
            best_restart: r.diagnostics.optimizer.best_restart,
            converged: r.diagnostics.optimizer.converged,
        }
    }
}

/// One entry of the general-p bound list.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralPBound {
    pub p: f64,
    pub from_wn: Option<f64>,
    pub from_wr: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundValues {
    pub d1_wn: Option<f64>,
    pub d1_wr: f64,
    pub d2_wn: Option<f64>,
    pub d2_wr: f64,
    pub d2_neg: f64,
    pub d2_neg_dim: f64,
    pub general_p: Vec<GeneralPBound>,
}

/// `D - bound` slacks; present only where both sides were computed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Margins {
    pub d1_wn: Option<f64>,
    pub d1_wr: Option<f64>,
    pub d2_wn: Option<f64>,
    pub d2_wr: Option<f64>,
    pub d2_neg: Option<f64>,
}

impl Margins {
    pub fn worst(&self) -> f64 {
        [self.d1_wn, self.d1_wr, self.d2_wn, self.d2_wr, self.d2_neg]
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-state record pairing computed discords with every applicable bound.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub cut: Cut,
    pub family: Option<String>,
    pub param: Option<f64>,
    pub negativity: f64,
    pub n_minus: usize,
    pub rr_decomposable: WitnessSummary,
    /// Negativity-family witness quantities; absent for PPT states.
    pub wn: Option<WitnessSummary>,
    pub rr_certified: Option<WitnessSummary>,
    pub rg_ppt: Option<f64>,
    pub d1: Option<DiscordSummary>,
    pub d2: Option<DiscordSummary>,
    pub bounds: BoundValues,
    pub margins: Margins,
}

/// Computes quantifiers, witnesses and discords for one state and checks
/// every bound margin; fails loudly with the offending pair serialized if a
/// margin dips below `-1e-6`.
pub fn verify_bounds(
    state: &BipartiteState,
    config: &RunConfig,
    options: &AnalysisOptions,
) -> Result<BoundReport> {
    let neg = witness::negativity(state);
    let nm = witness::n_minus(state);
    let wn_result = match witness::negativity_witness(state) {
        Ok(r) => Some(r),
        Err(Error::PptState) => None,
        Err(e) => return Err(e),
    };
    let wr_result = witness::random_robustness_decomposable(state)?;
    let rr_certified = if options.rr_certified {
        Some(witness::random_robustness_cutting_plane(state, config)?)
    } else {
        None
    };
    let rg_ppt = if options.rg_ppt {
        Some(witness::generalized_robustness_ppt(state, config)?)
    } else {
        None
    };

    let side = options.side.unwrap_or_else(|| default_side(state.cut()));
    let d1 = if options.d1 {
        Some(discord::d1_discord(state, side, config)?)
    } else {
        None
    };
    let d2 = if options.d2 {
        Some(discord::d2_discord(state, side, config)?)
    } else {
        None
    };

    let mut bounds = BoundValues {
        d1_wn: None,
        d1_wr: bound_dp(wr_result.value, &wr_result.witness, 1.0)?,
        d2_wn: None,
        d2_wr: bound_dp(wr_result.value, &wr_result.witness, 2.0)?,
        d2_neg: bound_d2_negativity(state),
        d2_neg_dim: bound_d2_negativity_dim(state),
        general_p: Vec::new(),
    };
    if let Some(wn) = &wn_result {
        bounds.d1_wn = Some(bound_dp(wn.value, &wn.witness, 1.0)?);
        bounds.d2_wn = Some(bound_dp(wn.value, &wn.witness, 2.0)?);
    }
    for &p in &options.general_p {
        bounds.general_p.push(GeneralPBound {
            p,
            from_wn: match &wn_result {
                Some(wn) => Some(bound_dp(wn.value, &wn.witness, p)?),
                None => None,
            },
            from_wr: bound_dp(wr_result.value, &wr_result.witness, p)?,
        });
    }

    let margins = Margins {
        d1_wn: match (&d1, bounds.d1_wn) {
            (Some(d), Some(b)) => Some(d.value - b),
            _ => None,
        },
        d1_wr: d1.as_ref().map(|d| d.value - bounds.d1_wr),
        d2_wn: match (&d2, bounds.d2_wn) {
            (Some(d), Some(b)) => Some(d.value - b),
            _ => None,
        },
        d2_wr: d2.as_ref().map(|d| d.value - bounds.d2_wr),
        d2_neg: d2.as_ref().map(|d| d.value - bounds.d2_neg),
    };

    let report = BoundReport {
        label: state.label().to_string(),
        cut: state.cut(),
        family: None,
        param: None,
        negativity: neg,
        n_minus: nm,
        rr_decomposable: WitnessSummary::from(&wr_result),
        wn: wn_result.as_ref().map(WitnessSummary::from),
        rr_certified: rr_certified.as_ref().map(WitnessSummary::from),
        rg_ppt,
        d1: d1.as_ref().map(DiscordSummary::from),
        d2: d2.as_ref().map(DiscordSummary::from),
        bounds,
        margins,
    };

    let worst = report.margins.worst();
    if worst < MARGIN_TOL {
        return Err(Error::BoundViolation {
            context: serde_json::to_string(&report)?,
            margin: worst,
        });
    }
    Ok(report)
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "paired samples required");
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap().then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
