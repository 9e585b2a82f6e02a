//! Run configuration shared by the optimizers and solvers.

use serde::{Deserialize, Serialize};

/// Environment variable consulted for the default seed.
pub const SEED_ENV: &str = "QCORR_SEED";

/// Knobs controlling seeds, restart budgets and solver tolerances.
///
/// All iterative routines take their budgets from here so that a single
/// config (or CLI flag set) controls determinism and runtime. Fields left
/// out of a JSON config fall back to the defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every stochastic routine derives its streams from it.
    pub seed: u64,
    /// Random restarts for the measurement-basis optimizer.
    pub restarts: usize,
    /// Restarts for the final product-state certification sweep.
    pub seesaw_restarts: usize,
    /// Restarts for the cheap separation calls inside the cutting plane.
    pub separation_restarts: usize,
    /// Maximum number of product-state cuts before the solver stops with a flag.
    pub max_cuts: usize,
    /// Frobenius radius of the witness search ball.
    pub ball_radius: f64,
    /// Relative tolerance for the cutting-plane master problem.
    pub master_tol: f64,
    /// Product expectations above `-margin_tol` count as certified.
    pub margin_tol: f64,
    /// Convergence residual for the basis optimizer.
    pub optimizer_tol: f64,
    /// Iteration cap for the classical-side refinement of the trace-norm discord.
    pub refine_iters: usize,
    /// Iteration cap for the positive-part robustness splitting solver.
    pub gr_max_iters: usize,
    /// Residual tolerance for the positive-part robustness splitting solver.
    pub gr_tol: f64,
    /// Multiplier applied to reproduction tolerances (testing hook).
    pub tol_scale: f64,
    /// Worker threads for restart loops; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Optional detection threshold for the certified robustness solver.
    ///
    /// When set, the cutting plane stops early once it either certifies a
    /// witness value at or above the threshold, or proves via its relaxation
    /// bound that no witness in the ball can reach it. Sweeps that only need
    /// a detected / not-detected verdict use this to keep grids cheap.
    pub detection_target: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            seed: seed_from_env(),
            restarts: 32,
            seesaw_restarts: 200,
            separation_restarts: 24,
            max_cuts: 500,
            ball_radius: 4.0,
            master_tol: 1e-7,
            margin_tol: 1e-6,
            optimizer_tol: 1e-8,
            refine_iters: 500,
            gr_max_iters: 50_000,
            gr_tol: 1e-6,
            tol_scale: 1.0,
            workers: None,
            detection_target: None,
        }
    }
}

fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(7)
}

impl RunConfig {
    /// Default config with an explicit seed.
    pub fn with_seed(seed: u64) -> RunConfig {
        RunConfig {
            seed,
            ..RunConfig::default()
        }
    }
}
