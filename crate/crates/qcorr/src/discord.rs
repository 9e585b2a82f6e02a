//! Geometric quantum discord in Schatten p-norms.
//!
//! `D_p` of a bipartite state, for a chosen measured side, is the minimal
//! `||rho - xi||_p^p` over classical-quantum states `xi` whose classical
//! side is that side. The minimization runs in two layers: an outer search
//! over local measurement bases (Givens-parametrized, Nelder-Mead with
//! seeded restarts, identity basis always tried first) and an inner choice
//! of the classical blocks. For `p = 2` dephasing in the measured basis is
//! the exact inner optimum; for `p = 1` the dephased value is refined by a
//! projected subgradient pass over the blocks and kept only if it improves.

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::matops::{self, CMatrix, CVector, Cut, Side, C64};
use crate::optim;
use crate::states::BipartiteState;

/// An orthonormal measurement basis on one side of a cut.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurementBasis {
    pub side: Side,
    #[serde(serialize_with = "serialize_vectors")]
    vectors: Vec<CVector>,
}

fn serialize_vectors<S: Serializer>(
    vectors: &[CVector],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(vectors.len()))?;
    for v in vectors {
        let flat: Vec<[f64; 2]> = v.as_slice().iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&flat)?;
    }
    seq.end()
}

impl MeasurementBasis {
    pub fn new(side: Side, vectors: Vec<CVector>) -> Result<MeasurementBasis> {
        let d = vectors.len();
        crate::states::validate_orthonormal(&vectors, d, "measurement basis")?;
        Ok(MeasurementBasis { side, vectors })
    }

    /// Computational basis on the given side.
    pub fn computational(side: Side, d: usize) -> MeasurementBasis {
        MeasurementBasis {
            side,
            vectors: crate::states::computational_basis(d),
        }
    }

    /// Basis formed by the columns of a unitary.
    pub fn from_unitary(side: Side, u: &CMatrix) -> Result<MeasurementBasis> {
        let d = u.rows();
        let vectors = (0..d)
            .map(|j| {
                let mut v = CVector::zeros(d);
                for i in 0..d {
                    v[i] = u[(i, j)];
                }
                v
            })
            .collect();
        MeasurementBasis::new(side, vectors)
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Unitary whose columns are the basis vectors.
    pub fn unitary(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| self.vectors[j][i])
    }
}

/// Conjugates the measured side by `U`: side B gives `(I (x) U^dag) rho (I (x) U)`.
///
/// In the rotated frame, measuring in the basis `U` columns becomes a
/// computational-basis pinching, which is the cheap inner loop.
fn conjugate_side(rho: &CMatrix, cut: Cut, side: Side, u: &CMatrix) -> CMatrix {
    let d = cut.dim();
    let (da, db) = (cut.d_a, cut.d_b);
    let dm = cut.side_dim(side);
    debug_assert_eq!(u.rows(), dm);
    let mut mid = CMatrix::zeros(d, d);
    match side {
        Side::B => {
            // right-multiply by I (x) U
            for r in 0..d {
                for a2 in 0..da {
                    for b2p in 0..db {
                        let mut acc = C64::new(0.0, 0.0);
                        for b2 in 0..db {
                            acc += rho[(r, a2 * db + b2)] * u[(b2, b2p)];
                        }
                        mid[(r, a2 * db + b2p)] = acc;
                    }
                }
            }
            // left-multiply by I (x) U^dag
            let mut out = CMatrix::zeros(d, d);
            for a in 0..da {
                for bp in 0..db {
                    for c in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..db {
                            acc += u[(b, bp)].conj() * mid[(a * db + b, c)];
                        }
                        out[(a * db + bp, c)] = acc;
                    }
                }
            }
            out
        }
        Side::A => {
            for r in 0..d {
                for a2p in 0..da {
                    for b2 in 0..db {
                        let mut acc = C64::new(0.0, 0.0);
                        for a2 in 0..da {
                            acc += rho[(r, a2 * db + b2)] * u[(a2, a2p)];
                        }
                        mid[(r, a2p * db + b2)] = acc;
                    }
                }
            }
            let mut out = CMatrix::zeros(d, d);
            for ap in 0..da {
                for b in 0..db {
                    for c in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..da {
                            acc += u[(a, ap)].conj() * mid[(a * db + b, c)];
                        }
                        out[(ap * db + b, c)] = acc;
                    }
                }
            }
            out
        }
    }
}

fn measured_index(e: usize, cut: Cut, side: Side) -> usize {
    match side {
        Side::A => e / cut.d_b,
        Side::B => e % cut.d_b,
    }
}

/// Keeps only entries whose measured indices agree (computational pinching).
fn pinch(rho: &CMatrix, cut: Cut, side: Side) -> CMatrix {
    let d = cut.dim();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            if measured_index(r, cut, side) == measured_index(c, cut, side) {
                out[(r, c)] = rho[(r, c)];
            }
        }
    }
    out
}

/// `rho - pinch(rho)`: the part removed by a computational measurement.
fn pinch_residual(rho: &CMatrix, cut: Cut, side: Side) -> CMatrix {
    let d = cut.dim();
    let mut out = rho.clone();
    for r in 0..d {
        for c in 0..d {
            if measured_index(r, cut, side) == measured_index(c, cut, side) {
                out[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

fn pinched_purity(rho: &CMatrix, cut: Cut, side: Side) -> f64 {
    let d = cut.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            if measured_index(r, cut, side) == measured_index(c, cut, side) {
                acc += rho[(r, c)].norm_sqr();
            }
        }
    }
    acc
}

/// Projective dephasing of a state in a local basis: `sum_j P_j rho P_j`
/// with `P_j` acting on the basis side.
pub fn dephase(state: &BipartiteState, basis: &MeasurementBasis) -> Result<BipartiteState> {
    let cut = state.cut();
    let dm = cut.side_dim(basis.side);
    if basis.dim() != dm {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} vectors, side {} of cut {} needs {}",
            basis.dim(),
            basis.side,
            cut,
            dm
        )));
    }
    let u = basis.unitary();
    let rotated = conjugate_side(state.rho(), cut, basis.side, &u);
    let pinched = pinch(&rotated, cut, basis.side);
    let back = conjugate_side(&pinched, cut, basis.side, &u.dagger());
    BipartiteState::new(
        back.hermitize(),
        cut,
        format!("dephased[{}]({})", basis.side, state.label()),
    )
}

/// Convergence report from the basis search.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizerDiagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub seed: u64,
}

/// Minimizes `objective(U)` over `d x d` unitaries with seeded restarts.
///
/// Restart 0 always starts from the identity so that computational-basis
/// optima are found without luck; the remaining restarts draw Givens angles
/// from substreams of `config.seed`. The best restart wins, ties broken by
/// restart index, so results do not depend on thread scheduling.
pub fn basis_optimizer<F>(
    objective: F,
    d: usize,
    config: &RunConfig,
) -> (CMatrix, f64, OptimizerDiagnostics)
where
    F: Fn(&CMatrix) -> f64 + Sync,
{
    let n_params = d * (d - 1);
    let restarts = config.restarts.max(1);
    if n_params == 0 {
        let u = CMatrix::identity(d);
        let value = objective(&u);
        return (
            u,
            value,
            OptimizerDiagnostics {
                restarts,
                best_restart: 0,
                iterations: 0,
                residual: 0.0,
                converged: true,
                seed: config.seed,
            },
        );
    }
    let max_iter = (250 * n_params).min(8000);
    let run_one = |r: usize| {
        let x0: Vec<f64> = if r == 0 {
            vec![0.0; n_params]
        } else {
            let mut rng = optim::substream(config.seed, r as u64);
            (0..n_params)
                .map(|i| {
                    use rand::Rng;
                    if i % 2 == 0 {
                        rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)
                    } else {
                        rng.gen_range(0.0..2.0 * std::f64::consts::PI)
                    }
                })
                .collect()
        };
        let mut g = |x: &[f64]| objective(&optim::givens_unitary(x, d));
        optim::nelder_mead(&mut g, &x0, 0.35, max_iter, config.optimizer_tol)
    };
    let outcomes: Vec<optim::NmOutcome> = (0..restarts).into_par_iter().map(run_one).collect();
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best].value {
            best = r;
        }
    }
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let chosen = &outcomes[best];
    let u = optim::givens_unitary(&chosen.x, d);
    (
        u,
        chosen.value,
        OptimizerDiagnostics {
            restarts,
            best_restart: best,
            iterations,
            residual: chosen.residual,
            converged: chosen.residual <= config.optimizer_tol,
            seed: config.seed,
        },
    )
}

/// How the inner (block) minimization concluded.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum InnerMode {
    /// Dephasing in the optimal basis was kept.
    Dephased,
    /// The block refinement improved on dephasing by `improvement`.
    Refined { improvement: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscordDiagnostics {
    pub optimizer: OptimizerDiagnostics,
    pub inner: InnerMode,
    /// Value of plain dephasing in the optimal basis, kept for comparison.
    pub dephased_value: f64,
}

/// Result of a discord computation.
#[derive(Clone, Debug, Serialize)]
pub struct DiscordResult {
    pub p: f64,
    pub side: Side,
    /// `||rho - xi||_p^p` at the best classical-quantum state found.
    pub value: f64,
    pub basis: MeasurementBasis,
    #[serde(skip)]
    pub classical_state: BipartiteState,
    pub diagnostics: DiscordDiagnostics,
}

fn schatten_power(m: &CMatrix, p: f64) -> f64 {
    if p == 2.0 {
        let f = m.frobenius();
        return f * f;
    }
    let vals = matops::eigvalsh(m).expect("pinch residual stays Hermitian");
    vals.iter().map(|l| l.abs().powf(p)).sum()
}

fn discord_objective(
    rho: &CMatrix,
    cut: Cut,
    side: Side,
    p: f64,
) -> impl Fn(&CMatrix) -> f64 + Sync + '_ {
    move |u: &CMatrix| {
        let rot = conjugate_side(rho, cut, side, u);
        if p == 2.0 {
            let full: f64 = rho.as_slice().iter().map(|z| z.norm_sqr()).sum();
            full - pinched_purity(&rot, cut, side)
        } else {
            schatten_power(&pinch_residual(&rot, cut, side), p)
        }
    }
}

/// Geometric discord `D_p(rho) = min ||rho - xi||_p^p` for finite `p >= 1`.
pub fn dp_discord(
    state: &BipartiteState,
    p: f64,
    side: Side,
    config: &RunConfig,
) -> Result<DiscordResult> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "discord needs a finite p >= 1, got {p}"
        )));
    }
    let cut = state.cut();
    let dm = cut.side_dim(side);
    let objective = discord_objective(state.rho(), cut, side, p);
    let (u, _, optimizer) = basis_optimizer(&objective, dm, config);
    let basis = MeasurementBasis::from_unitary(side, &u)?;
    let dephased = dephase(state, &basis)?;
    let dephased_value = schatten_power(&(state.rho() - dephased.rho()), p);

    let (value, classical_state, inner) = if p == 1.0 && config.refine_iters > 0 {
        match refine_blocks(state, side, &u, config) {
            Some((refined_value, xi)) if refined_value < dephased_value - 1e-9 => {
                let improvement = dephased_value - refined_value;
                (refined_value, xi, InnerMode::Refined { improvement })
            }
            _ => (dephased_value, dephased, InnerMode::Dephased),
        }
    } else {
        (dephased_value, dephased, InnerMode::Dephased)
    };

    Ok(DiscordResult {
        p,
        side,
        value,
        basis,
        classical_state,
        diagnostics: DiscordDiagnostics {
            optimizer,
            inner,
            dephased_value,
        },
    })
}

/// Hilbert-Schmidt discord, `min ||rho - xi||_2^2`.
pub fn d2_discord(state: &BipartiteState, side: Side, config: &RunConfig) -> Result<DiscordResult> {
    dp_discord(state, 2.0, side, config)
}

/// Trace-norm discord, `min ||rho - xi||_1`.
pub fn d1_discord(state: &BipartiteState, side: Side, config: &RunConfig) -> Result<DiscordResult> {
    dp_discord(state, 1.0, side, config)
}

/// Projected subgradient descent over the classical blocks in the rotated
/// frame, starting from the dephased blocks. Returns the best feasible
/// candidate found, already rotated back, or `None` if nothing improved.
fn refine_blocks(
    state: &BipartiteState,
    side: Side,
    u: &CMatrix,
    config: &RunConfig,
) -> Option<(f64, BipartiteState)> {
    let cut = state.cut();
    let rot = conjugate_side(state.rho(), cut, side, u);
    let mut s = pinch(&rot, cut, side);
    let value_of = |s: &CMatrix| -> f64 {
        matops::eigvalsh(&(&rot - s).hermitize())
            .map(|vals| vals.iter().map(|l| l.abs()).sum())
            .unwrap_or(f64::INFINITY)
    };
    let mut best_s = s.clone();
    let mut best = value_of(&s);
    let start = best;
    let mut stale = 0usize;
    for t in 0..config.refine_iters {
        let x = (&rot - &s).hermitize();
        let dec = match matops::eigh(&x) {
            Ok(d) => d,
            Err(_) => break,
        };
        let g = dec.map_eigenvalues(|l| {
            if l > 0.0 {
                1.0
            } else if l < 0.0 {
                -1.0
            } else {
                0.0
            }
        });
        // move the blocks along the subgradient of -||rot - S||_1 in S
        let eta = 0.1 * start.max(0.1) / ((t + 1) as f64).sqrt();
        let step = pinch(&g, cut, side).scale(eta);
        s = &s + &step;
        s = project_blocks(&s, cut, side)?;
        let v = value_of(&s);
        if v < best - 1e-12 {
            best = v;
            best_s = s.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= 50 {
                break;
            }
        }
    }
    if best >= start {
        return None;
    }
    let back = conjugate_side(&best_s, cut, side, &u.dagger()).hermitize();
    let xi = BipartiteState::new(back, cut, format!("refined[{side}]({})", state.label())).ok()?;
    // evaluate honestly in the original frame
    let value = schatten_power(&(state.rho() - xi.rho()), 1.0);
    Some((value, xi))
}

/// Maps pinched blocks to the nearest feasible classical-quantum candidate:
/// PSD blocks, then a global trace rescale.
fn project_blocks(s: &CMatrix, cut: Cut, side: Side) -> Option<CMatrix> {
    let dm = cut.side_dim(side);
    let dn = cut.side_dim(side.other());
    let mut out = CMatrix::zeros(cut.dim(), cut.dim());
    let mut total = 0.0;
    for j in 0..dm {
        let mut block = CMatrix::zeros(dn, dn);
        for r in 0..dn {
            for c in 0..dn {
                let (fr, fc) = match side {
                    Side::B => (cut.flat(r, j), cut.flat(c, j)),
                    Side::A => (cut.flat(j, r), cut.flat(j, c)),
                };
                block[(r, c)] = s[(fr, fc)];
            }
        }
        let proj = matops::psd_project(&block.hermitize()).ok()?;
        total += proj.trace().re;
        for r in 0..dn {
            for c in 0..dn {
                let (fr, fc) = match side {
                    Side::B => (cut.flat(r, j), cut.flat(c, j)),
                    Side::A => (cut.flat(j, r), cut.flat(j, c)),
                };
                out[(fr, fc)] = proj[(r, c)];
            }
        }
    }
    if total <= 1e-12 {
        return None;
    }
    Some(out.scale(1.0 / total))
}

/// Quantum mutual information `S(rho_A) + S(rho_B) - S(rho)` in bits.
pub fn mutual_information(state: &BipartiteState) -> Result<f64> {
    let sa = matops::entropy(&state.reduced(Side::A)?)?;
    let sb = matops::entropy(&state.reduced(Side::B)?)?;
    let s = matops::entropy(state.rho())?;
    Ok((sa + sb - s).max(0.0))
}
