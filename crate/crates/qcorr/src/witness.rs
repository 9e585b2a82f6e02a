//! Entanglement quantifiers through optimized witnesses.
//!
//! Three witness families are implemented, each fixed by a different
//! normalization of the witness set:
//!
//! - negativity: `0 <= W^TA <= I`; the optimum is the partially transposed
//!   projector onto the negative eigenspace of `rho^TA`, and the witnessed
//!   value equals the negativity.
//! - random robustness: `Tr W = 1`. The decomposable optimum is analytic
//!   (uniform projector onto the minimizing eigenspace of `rho` or
//!   `rho^TA`); the full optimum over a Frobenius ball is computed by a
//!   cutting-plane method whose separation oracle is a product-state
//!   seesaw, so it also detects PPT entangled states. Every returned
//!   witness carries a certificate from an independent final seesaw sweep.
//! - generalized robustness: `W <= I`, lower-bounded here through the PPT
//!   relaxation `min Tr Y` s.t. `Y >= 0`, `(rho + Y)^TA >= 0`, solved by an
//!   operator-splitting iteration.

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::matops::{
    self, partial_transpose, trace_inner, CMatrix, CVector, Cut, Side, C64,
};
use crate::optim;
use crate::states::BipartiteState;

/// Eigenvalues of `rho^TA` below this count as negative.
pub const NEGATIVE_EIG_TOL: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    Negativity,
    RandomRobustness,
    GeneralizedRobustness,
}

/// The constraint set pinning the scale of a witness family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `0 <= W^TA <= I`.
    PtBox,
    /// `Tr W = 1`.
    UnitTrace,
    /// `W <= I`.
    LeqIdentity,
}

/// Product-positivity certificate from a final seesaw sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Certificate {
    /// Smallest product expectation `<ab|W|ab>` found; near zero or positive
    /// means the witness is valid to within the margin tolerance.
    pub margin: f64,
    pub restarts: usize,
    pub seed: u64,
}

fn serialize_entries<S: Serializer>(
    m: &CMatrix,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(m.as_slice().len()))?;
    for z in m.as_slice() {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// An entanglement witness with its family, normalization and certificate.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub family: WitnessFamily,
    pub cut: Cut,
    #[serde(rename = "entries", serialize_with = "serialize_entries")]
    pub matrix: CMatrix,
    pub normalization: Normalization,
    pub certificate: Option<Certificate>,
}

/// A witnessed-entanglement value together with the witness that attains it.
#[derive(Clone, Debug, Serialize)]
pub struct EntanglementResult {
    /// `max(0, -Tr[W rho])`.
    pub value: f64,
    /// Signed expectation `Tr[W rho]`.
    pub expectation: f64,
    pub witness: Witness,
    pub tr_w_squared: f64,
    pub sup_norm: f64,
    /// Number of negative partial-transpose eigenvalues (negativity family).
    pub n_minus: Option<usize>,
    /// True when the cut budget ran out and the best certified iterate was returned.
    pub capped: bool,
    pub cuts_used: Option<usize>,
}

/// Negativity `(||rho^TA||_1 - 1) / 2 = sum of |negative PT eigenvalues|`.
pub fn negativity(state: &BipartiteState) -> f64 {
    let pt = partial_transpose(state.rho(), state.cut(), Side::A)
        .expect("cut was validated with the state");
    let vals = matops::eigvalsh(&pt).expect("partial transpose of a Hermitian matrix");
    vals.iter().filter(|&&l| l < 0.0).map(|l| -l).sum()
}

/// Number of eigenvalues of `rho^TA` below the negativity threshold.
pub fn n_minus(state: &BipartiteState) -> usize {
    let pt = partial_transpose(state.rho(), state.cut(), Side::A)
        .expect("cut was validated with the state");
    let vals = matops::eigvalsh(&pt).expect("partial transpose of a Hermitian matrix");
    vals.iter().filter(|&&l| l < NEGATIVE_EIG_TOL).count()
}

/// Optimal witness of the negativity family: `W = P^TA` with `P` the
/// projector onto the negative eigenspace of `rho^TA`. The witnessed value
/// equals the negativity; `Tr W^2` counts the negative eigenvalues.
///
/// Product positivity is structural here (`W^TA = P >= 0`), so no sampling
/// certificate is attached. Errors with [`Error::PptState`] when the partial
/// transpose has no negative eigenvalues.
pub fn negativity_witness(state: &BipartiteState) -> Result<EntanglementResult> {
    let cut = state.cut();
    let pt = partial_transpose(state.rho(), cut, Side::A)?;
    let dec = matops::eigh(&pt)?;
    let mut p = CMatrix::zeros(cut.dim(), cut.dim());
    let mut count = 0usize;
    for (i, &l) in dec.eigenvalues.iter().enumerate() {
        if l < NEGATIVE_EIG_TOL {
            p.add_scaled_outer(1.0, &dec.vector(i));
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::PptState);
    }
    let w = partial_transpose(&p, cut, Side::A)?.hermitize();
    finish_result(
        state,
        w,
        WitnessFamily::Negativity,
        Normalization::PtBox,
        None,
        Some(count),
        false,
        None,
    )
}

/// Optimal decomposable witness of the random robustness family.
///
/// The minimum of `Tr[W rho]` over unit-trace witnesses of the form
/// `P >= 0` or `Q^TA`, `Q >= 0`, is attained by the uniform projector onto
/// the minimizing eigenspace of `rho` or `rho^TA` (whichever is lower),
/// partially transposed in the latter case. The witnessed value is
/// `max(0, -min(eig(rho), eig(rho^TA)))`; for NPT states this equals the
/// local-dimension multiple of the random robustness.
pub fn random_robustness_decomposable(state: &BipartiteState) -> Result<EntanglementResult> {
    let cut = state.cut();
    let dec_rho = matops::eigh(state.rho())?;
    let pt = partial_transpose(state.rho(), cut, Side::A)?;
    let dec_pt = matops::eigh(&pt)?;
    let from_pt = dec_pt.eigenvalues[0] <= dec_rho.eigenvalues[0];
    let dec = if from_pt { &dec_pt } else { &dec_rho };
    let group = dec.degenerate_groups()[0].clone();
    let m = group.len();
    let mut p = CMatrix::zeros(cut.dim(), cut.dim());
    for i in group {
        p.add_scaled_outer(1.0 / m as f64, &dec.vector(i));
    }
    let w = if from_pt {
        partial_transpose(&p, cut, Side::A)?.hermitize()
    } else {
        p.hermitize()
    };
    finish_result(
        state,
        w,
        WitnessFamily::RandomRobustness,
        Normalization::UnitTrace,
        None,
        None,
        false,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_result(
    state: &BipartiteState,
    w: CMatrix,
    family: WitnessFamily,
    normalization: Normalization,
    certificate: Option<Certificate>,
    n_minus: Option<usize>,
    capped: bool,
    cuts_used: Option<usize>,
) -> Result<EntanglementResult> {
    let expectation = trace_inner(&w, state.rho())?.re;
    let tr_w_squared = trace_inner(&w, &w)?.re;
    let sup_norm = matops::schatten(&w, f64::INFINITY)?;
    Ok(EntanglementResult {
        value: (-expectation).max(0.0),
        expectation,
        witness: Witness {
            family,
            cut: state.cut(),
            matrix: w,
            normalization,
            certificate,
        },
        tr_w_squared,
        sup_norm,
        n_minus,
        capped,
        cuts_used,
    })
}

/// A product vector `|a> (x) |b>`.
#[derive(Clone, Debug)]
pub struct ProductState {
    pub a: CVector,
    pub b: CVector,
}

impl ProductState {
    pub fn joint(&self) -> CVector {
        self.a.tensor(&self.b)
    }
}

/// Haar-random product states, deterministic for a fixed seed; sample `i`
/// depends only on `(seed, i)`.
pub fn sample_product_states(cut: Cut, count: usize, seed: u64) -> Vec<ProductState> {
    (0..count)
        .map(|i| {
            let mut rng = optim::substream(seed, i as u64);
            ProductState {
                a: optim::random_unit_vector(&mut rng, cut.d_a),
                b: optim::random_unit_vector(&mut rng, cut.d_b),
            }
        })
        .collect()
}

/// Outcome of a product-state minimization of `<ab|W|ab>`.
#[derive(Clone, Debug)]
pub struct SeesawOutcome {
    pub value: f64,
    pub state: ProductState,
    pub iterations: usize,
    pub restart: usize,
}

fn contract_side_b(w: &CMatrix, cut: Cut, b: &CVector) -> CMatrix {
    let (da, db) = (cut.d_a, cut.d_b);
    let mut out = CMatrix::zeros(da, da);
    for i in 0..da {
        for i2 in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..db {
                let bj = b[j].conj();
                for j2 in 0..db {
                    acc += bj * w[(cut.flat(i, j), cut.flat(i2, j2))] * b[j2];
                }
            }
            out[(i, i2)] = acc;
        }
    }
    out
}

fn contract_side_a(w: &CMatrix, cut: Cut, a: &CVector) -> CMatrix {
    let (da, db) = (cut.d_a, cut.d_b);
    let mut out = CMatrix::zeros(db, db);
    for j in 0..db {
        for j2 in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                let ai = a[i].conj();
                for i2 in 0..da {
                    acc += ai * w[(cut.flat(i, j), cut.flat(i2, j2))] * a[i2];
                }
            }
            out[(j, j2)] = acc;
        }
    }
    out
}

/// Minimizes `<ab|W|ab>` over product states by alternating exact local
/// minimizations (each step is an eigenvector problem, so the value is
/// non-increasing). Multi-restart; deterministic for a fixed seed.
pub fn seesaw_min_product(
    w: &CMatrix,
    cut: Cut,
    restarts: usize,
    seed: u64,
) -> Result<SeesawOutcome> {
    let outcomes = seesaw_sweep(w, cut, restarts, seed)?;
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best].value {
            best = r;
        }
    }
    Ok(outcomes.into_iter().nth(best).expect("nonempty restarts"))
}

/// All restart outcomes of the product seesaw, in restart order.
pub(crate) fn seesaw_sweep(
    w: &CMatrix,
    cut: Cut,
    restarts: usize,
    seed: u64,
) -> Result<Vec<SeesawOutcome>> {
    if !w.is_square() || w.rows() != cut.dim() {
        return Err(Error::DimensionMismatch(format!(
            "witness is {}x{}, cut {} needs {}",
            w.rows(),
            w.cols(),
            cut,
            cut.dim()
        )));
    }
    let restarts = restarts.max(1);
    let run_one = |r: usize| -> Result<SeesawOutcome> {
        let mut rng = optim::substream(seed, r as u64);
        let mut a = optim::random_unit_vector(&mut rng, cut.d_a);
        let mut b = optim::random_unit_vector(&mut rng, cut.d_b);
        let mut value = f64::INFINITY;
        let mut iterations = 0;
        for _ in 0..500 {
            iterations += 1;
            let wa = contract_side_b(w, cut, &b);
            let dec = matops::eigh(&wa.hermitize())?;
            a = dec.vector(0);
            let wb = contract_side_a(w, cut, &a);
            let dec = matops::eigh(&wb.hermitize())?;
            b = dec.vector(0);
            let new_value = dec.eigenvalues[0];
            if value - new_value <= 1e-10 {
                value = new_value.min(value);
                break;
            }
            value = new_value;
        }
        Ok(SeesawOutcome {
            value,
            state: ProductState { a, b },
            iterations,
            restart: r,
        })
    };
    (0..restarts).into_par_iter().map(run_one).collect()
}

/// Cutting-plane master in dual form.
///
/// The primal is `min Tr[W rho]` over Hermitian `W` with `Tr W = 1`,
/// `||W||_2 <= c`, and `<a_m b_m|W|a_m b_m> >= 0` for the accumulated cuts.
/// Over the ball-plus-hyperplane alone the minimizer is closed-form, so the
/// cut constraints are dualized: with `q = rho - sum_m lambda_m v_m v_m^dag`
/// the dual is `max_{lambda >= 0} Tr(q)/d - s ||q_perp||_F`,
/// `s = sqrt(c^2 - 1/d)`, and the primal witness is recovered as
/// `W = I/d - s q_perp / ||q_perp||`. Concave, solved by monotone projected
/// gradient ascent with an adaptive step, warm-started across rounds.
///
/// All objective and gradient evaluations reduce to the Gram matrix of the
/// cut vectors, so the per-iteration cost is quadratic in the number of cuts
/// and independent of the matrix dimension.
struct CuttingPlaneMaster {
    rho: CMatrix,
    d: usize,
    s: f64,
    trace: f64,
    cuts: Vec<CVector>,
    lambda: Vec<f64>,
    /// `<v_m|rho|v_m> - Tr(rho)/d`.
    diag: Vec<f64>,
    /// `|<v_m|v_n>|^2 - 1/d`, stored as full symmetric rows.
    gram: Vec<Vec<f64>>,
    /// `||rho - I Tr(rho)/d||_F^2`.
    perp_sq: f64,
    step: f64,
    qp_lambda: Vec<f64>,
    bound_lambda: Vec<f64>,
}

impl CuttingPlaneMaster {
    fn new(rho: CMatrix, s: f64) -> CuttingPlaneMaster {
        let d = rho.rows();
        let trace = rho.trace().re;
        let frob_sq = {
            let f = rho.frobenius();
            f * f
        };
        CuttingPlaneMaster {
            d,
            s,
            trace,
            cuts: Vec::new(),
            lambda: Vec::new(),
            diag: Vec::new(),
            gram: Vec::new(),
            perp_sq: frob_sq - trace * trace / d as f64,
            step: 1.0,
            qp_lambda: Vec::new(),
            bound_lambda: Vec::new(),
            rho,
        }
    }

    fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    fn add_cut(&mut self, v: CVector) {
        let inv_d = 1.0 / self.d as f64;
        let mut row = Vec::with_capacity(self.cuts.len() + 1);
        for (n, u) in self.cuts.iter().enumerate() {
            let o = u.dot(&v).norm_sqr() - inv_d;
            self.gram[n].push(o);
            row.push(o);
        }
        row.push(v.norm().powi(4) - inv_d);
        self.diag.push(self.rho.quad_form(&v).re - self.trace * inv_d);
        self.gram.push(row);
        self.cuts.push(v);
        self.lambda.push(0.0);
        self.qp_lambda.push(0.0);
        self.bound_lambda.push(0.0);
    }

    /// Is `v` already represented among the cuts, up to phase?
    fn is_duplicate(&self, v: &CVector) -> bool {
        self.cuts
            .iter()
            .any(|u| u.dot(v).norm_sqr() > 1.0 - 1e-9)
    }

    /// `(objective, G lambda, ||q_perp||, sum lambda)` at `lambda`.
    fn eval(&self, lambda: &[f64]) -> (f64, Vec<f64>, f64, f64) {
        let k = lambda.len();
        let mut gl = vec![0.0; k];
        for m in 0..k {
            let row = &self.gram[m];
            let mut acc = 0.0;
            for n in 0..k {
                acc += row[n] * lambda[n];
            }
            gl[m] = acc;
        }
        let mut lsum = 0.0;
        let mut bl = 0.0;
        let mut lgl = 0.0;
        for m in 0..k {
            lsum += lambda[m];
            bl += self.diag[m] * lambda[m];
            lgl += lambda[m] * gl[m];
        }
        let norm_sq = (self.perp_sq - 2.0 * bl + lgl).max(0.0);
        let norm = norm_sq.sqrt();
        let h = (self.trace - lsum) / self.d as f64 - self.s * norm;
        (h, gl, norm, lsum)
    }

    /// Traceless part of `rho - sum lambda_m v_m v_m^dag` and its norm.
    fn perp_of(&self, lambda: &[f64]) -> (CMatrix, f64) {
        let mut q = self.rho.clone();
        let mut tr = self.trace;
        for (v, &l) in self.cuts.iter().zip(lambda) {
            if l != 0.0 {
                q.add_scaled_outer(-l, v);
                tr -= l * v.norm().powi(2);
            }
        }
        let shift = tr / self.d as f64;
        for i in 0..self.d {
            q[(i, i)] -= C64::new(shift, 0.0);
        }
        let norm = q.frobenius();
        (q, norm)
    }

    fn witness_from(&self, perp: &CMatrix, norm: f64) -> CMatrix {
        let mut w = CMatrix::identity(self.d).scale(1.0 / self.d as f64);
        if norm > 1e-14 {
            w = &w - &perp.scale(self.s / norm);
        }
        w.hermitize()
    }

    /// Maximizes the dual; returns the recovered primal witness and the dual
    /// value, a lower bound on the relaxed primal minimum.
    fn solve(&mut self, tol: f64, max_iter: usize) -> (CMatrix, f64) {
        let mut lambda = self.lambda.clone();
        let (mut h, mut gl, mut norm, _) = self.eval(&lambda);
        self.step = self.step.clamp(1e-9, 1e4);
        if !self.cuts.is_empty() {
            for _ in 0..max_iter {
                // gradient of the dual equals minus the cut expectations of W
                let inv_d = 1.0 / self.d as f64;
                let mut grad = Vec::with_capacity(lambda.len());
                let mut residual: f64 = 0.0;
                for m in 0..lambda.len() {
                    let g = if norm > 1e-14 {
                        -inv_d + self.s * (self.diag[m] - gl[m]) / norm
                    } else {
                        -inv_d
                    };
                    let pg = if lambda[m] > 0.0 { g } else { g.max(0.0) };
                    residual = residual.max(pg.abs());
                    grad.push(g);
                }
                if residual <= tol {
                    break;
                }
                // monotone line search on the concave dual
                let mut advanced = false;
                for _ in 0..60 {
                    let candidate: Vec<f64> = lambda
                        .iter()
                        .zip(&grad)
                        .map(|(&l, &g)| (l + self.step * g).max(0.0))
                        .collect();
                    let (h2, gl2, norm2, _) = self.eval(&candidate);
                    if h2 > h {
                        lambda = candidate;
                        h = h2;
                        gl = gl2;
                        norm = norm2;
                        self.step *= 1.3;
                        advanced = true;
                        break;
                    }
                    self.step *= 0.5;
                }
                if !advanced {
                    break;
                }
            }
        }
        self.lambda = lambda;
        let (perp, norm) = self.perp_of(&self.lambda);
        (self.witness_from(&perp, norm), h)
    }

    /// Exact solve of `G_PP x = theta_P` on a passive set, with a small
    /// ridge escalated on factorization failure (the Gram matrix is
    /// numerically rank deficient when cuts nearly coincide).
    fn solve_passive(&self, passive: &[usize], theta: &[f64]) -> Vec<f64> {
        let p = passive.len();
        let mut ridge = 1e-12;
        loop {
            let mut gpp = nalgebra::DMatrix::<f64>::zeros(p, p);
            for (i, &m) in passive.iter().enumerate() {
                let row = &self.gram[m];
                for (j, &n) in passive.iter().enumerate() {
                    gpp[(i, j)] = row[n];
                }
                gpp[(i, i)] += ridge;
            }
            let rhs =
                nalgebra::DVector::<f64>::from_iterator(p, passive.iter().map(|&m| theta[m]));
            if let Some(chol) = gpp.cholesky() {
                return chol.solve(&rhs).iter().copied().collect();
            }
            ridge *= 100.0;
            if ridge > 1e-3 {
                return vec![0.0; p];
            }
        }
    }

    /// Lawson-Hanson active set on the regularized dual, which after
    /// rescaling is the non-negative least-squares problem
    /// `min (1/2) l^T G l - theta^T l`, `theta_m = b_m - mu/d`.
    /// Passive-set subproblems are solved exactly by Cholesky, so the
    /// returned dual value is optimal to solver precision; the residual
    /// at coordinate m equals `-mu <v_m|W(lambda)|v_m>`, making the exit
    /// test a cut-feasibility bound on the recovered witness.
    fn nnls_dual(&self, mu: f64, tol: f64, max_outer: usize, lambda: &mut [f64]) -> f64 {
        let d = self.d as f64;
        let k = self.cuts.len();
        let theta: Vec<f64> = (0..k).map(|m| self.diag[m] - mu / d).collect();
        let kkt_tol = (tol * mu).max(1e-12);
        let mut passive: Vec<usize> = (0..k).filter(|&m| lambda[m] > 0.0).collect();
        let mut gl = vec![0.0; k];
        let mut last_entering = usize::MAX;
        for _ in 0..max_outer.min(400) {
            let mut guard = 2 * passive.len() + 4;
            while !passive.is_empty() {
                let x = self.solve_passive(&passive, &theta);
                if x.iter().all(|&xi| xi > 0.0) {
                    for (i, &m) in passive.iter().enumerate() {
                        lambda[m] = x[i];
                    }
                    break;
                }
                // step toward the subproblem solution until the first
                // coordinate hits the boundary, then drop it
                let mut alpha = 1.0f64;
                for (i, &m) in passive.iter().enumerate() {
                    if x[i] <= 0.0 && lambda[m] > x[i] {
                        alpha = alpha.min(lambda[m] / (lambda[m] - x[i]));
                    }
                }
                for (i, &m) in passive.iter().enumerate() {
                    lambda[m] += alpha * (x[i] - lambda[m]);
                    if x[i] <= 0.0 && lambda[m] < 1e-13 {
                        lambda[m] = 0.0;
                    }
                }
                passive.retain(|&m| lambda[m] > 0.0);
                guard -= 1;
                if guard == 0 {
                    break;
                }
            }
            for v in gl.iter_mut() {
                *v = 0.0;
            }
            for &m in &passive {
                let lm = lambda[m];
                let row = &self.gram[m];
                for n in 0..k {
                    gl[n] += lm * row[n];
                }
            }
            let mut worst = -kkt_tol;
            let mut entering = usize::MAX;
            for m in 0..k {
                if lambda[m] > 0.0 {
                    continue;
                }
                let r = gl[m] - theta[m];
                if r < worst {
                    worst = r;
                    entering = m;
                }
            }
            if entering == usize::MAX || entering == last_entering {
                break;
            }
            last_entering = entering;
            passive.push(entering);
        }
        let mut lsum = 0.0;
        let mut bl = 0.0;
        let mut lgl = 0.0;
        for m in 0..k {
            lsum += lambda[m];
            bl += self.diag[m] * lambda[m];
            lgl += lambda[m] * gl[m];
        }
        let norm_sq = (self.perp_sq - 2.0 * bl + lgl).max(0.0);
        -norm_sq / (2.0 * mu) + (self.trace - lsum) / d + mu / (2.0 * d)
    }

    /// Minimum-norm extraction: solves
    /// `min Tr[W rho] + mu/2 ||W||_F^2` s.t. `Tr W = 1` and the accumulated
    /// cuts, in the dual over the Gram matrix. Unlike the ball solution,
    /// which always sits on the sphere and violates unseen products at unit
    /// depth, this iterate approaches the minimum-norm optimal witness, so
    /// its violations vanish as the cut set closes in on the active face;
    /// that makes it the useful candidate for shift-correction.
    ///
    /// With `q = rho - sum lambda_m v_m v_m^dag` the dual is
    /// `max_{lambda >= 0} -||q_perp||^2/(2 mu) + (Tr q)/d + mu/(2d)` and the
    /// primal recovery is `W = -(q + nu I)/mu`, `nu` fixed by `Tr W = 1`.
    fn regularized_witness(&mut self, mu: f64, tol: f64, max_iter: usize) -> (CMatrix, f64) {
        let d = self.d as f64;
        let mut lambda = std::mem::take(&mut self.qp_lambda);
        let g = self.nnls_dual(mu, tol, max_iter, &mut lambda);
        self.qp_lambda = lambda;
        let mut w = self.rho.scale(-1.0 / mu);
        let mut tr_q = self.trace;
        for (v, &l) in self.cuts.iter().zip(&self.qp_lambda) {
            if l != 0.0 {
                w.add_scaled_outer(l / mu, v);
                tr_q -= l * v.norm().powi(2);
            }
        }
        let nu = (-mu - tr_q) / d;
        for i in 0..self.d {
            w[(i, i)] -= C64::new(nu / mu, 0.0);
        }
        (w.hermitize(), g)
    }

    /// Upper bound on the witnessed value of the current cut relaxation:
    /// for any dual-feasible multipliers and any witness in the ball,
    /// `-Tr[W rho] <= -g(mu) + mu c^2 / 2`, evaluated here at a fixed tiny
    /// `mu` so the penalty term is negligible once the cuts pin the dual.
    fn relaxation_upper_bound(&mut self, tol: f64) -> f64 {
        let mu = 1e-7;
        let c_sq = self.s * self.s + 1.0 / self.d as f64;
        let mut lambda = std::mem::take(&mut self.bound_lambda);
        let g = self.nnls_dual(mu, tol, 400, &mut lambda);
        self.bound_lambda = lambda;
        -g + 0.5 * mu * c_sq
    }
}

/// Shift toward the identity that restores product positivity:
/// `(W + m I) / (1 + m d)`, trace-preserving.
fn shift_corrected(w: &CMatrix, m: f64) -> CMatrix {
    let d = w.rows();
    let mut wc = w.clone();
    for i in 0..d {
        wc[(i, i)] += C64::new(m, 0.0);
    }
    wc.scale(1.0 / (1.0 + m * d as f64))
}

/// Pulls a unit-trace witness inside the Frobenius ball by mixing toward
/// `I/d`, which preserves product positivity. Returns the mixing weight kept
/// on the input, so callers can rescale quantities affine in the witness.
fn clamp_to_ball(w: CMatrix, c: f64) -> (CMatrix, f64) {
    let d = w.rows();
    let norm = w.frobenius();
    if norm <= c {
        return (w, 1.0);
    }
    let inv_d = 1.0 / d as f64;
    let perp_sq = (norm * norm - inv_d).max(0.0);
    let target = (c * c - inv_d).max(0.0).sqrt();
    let gamma = if perp_sq > 0.0 {
        (target / perp_sq.sqrt()).min(1.0)
    } else {
        1.0
    };
    let mut out = w.scale(gamma);
    for i in 0..d {
        out[(i, i)] += C64::new((1.0 - gamma) * inv_d, 0.0);
    }
    (out, gamma)
}

/// New cuts this round: the distinct violated products from a seesaw sweep,
/// deepest first.
fn select_cuts(
    sweep: &[SeesawOutcome],
    master: &CuttingPlaneMaster,
    margin_tol: f64,
    max_new: usize,
) -> Vec<CVector> {
    let mut violated: Vec<&SeesawOutcome> = sweep
        .iter()
        .filter(|o| o.value < -margin_tol)
        .collect();
    violated.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap().then(a.restart.cmp(&b.restart)));
    let mut out: Vec<CVector> = Vec::new();
    for o in violated {
        if out.len() >= max_new {
            break;
        }
        let v = o.state.joint();
        if master.is_duplicate(&v) {
            continue;
        }
        if out.iter().any(|u| u.dot(&v).norm_sqr() > 1.0 - 1e-9) {
            continue;
        }
        out.push(v);
    }
    out
}

/// Runs the full certification sweep on a corrected iterate, re-shifting on
/// any remaining violation, and packages the result.
fn certify_corrected(
    state: &BipartiteState,
    mut w: CMatrix,
    config: &RunConfig,
    capped: bool,
    cuts_used: usize,
) -> Result<EntanglementResult> {
    let cut = state.cut();
    for attempt in 0..5u64 {
        let cert = seesaw_min_product(
            &w,
            cut,
            config.seesaw_restarts,
            optim::substream_seed(config.seed, 3_000_000 + attempt),
        )?;
        if cert.value >= -config.margin_tol {
            return finish_result(
                state,
                w,
                WitnessFamily::RandomRobustness,
                Normalization::UnitTrace,
                Some(Certificate {
                    margin: cert.value,
                    restarts: config.seesaw_restarts,
                    seed: config.seed,
                }),
                None,
                capped,
                Some(cuts_used),
            );
        }
        w = shift_corrected(&w, -cert.value);
    }
    Err(Error::NonConvergence {
        solver: "random robustness cutting plane",
        residual: f64::NAN,
        iterations: cuts_used,
    })
}

/// Most new cuts accepted per separation round.
const MAX_NEW_CUTS: usize = 16;

/// Cut count below which every round also solves the ball master, whose
/// saturated iterates explore far from the minimum-norm path.
const EXPLORE_CUTS: usize = 160;

/// After the exploration phase the ball master still runs every this many
/// rounds.
const EXPLORE_PERIOD: u64 = 8;

/// Random robustness over all witnesses in a Frobenius ball, by cutting
/// planes with a seesaw separation oracle.
///
/// Unlike the decomposable optimum this can detect PPT entangled states.
///
/// The master solution always saturates the ball, so its expectation `-h` is
/// an upper bound on the witnessed value while any shift-corrected iterate
/// `(W + m I)/(1 + m d)` is product-positive up to the sweep's resolution
/// and gives a lower bound. The loop terminates when the two meet to within
/// the margin tolerance (or earlier, if an iterate certifies directly); the
/// returned witness always carries a certificate from an independent
/// final sweep. If the cut budget runs out first, the best corrected
/// iterate is certified and returned with `capped = true`.
pub fn random_robustness_cutting_plane(
    state: &BipartiteState,
    config: &RunConfig,
) -> Result<EntanglementResult> {
    let cut = state.cut();
    let d = cut.dim();
    let c = config.ball_radius;
    if c * c <= 1.0 / d as f64 {
        return Err(Error::InvalidArgument(format!(
            "ball radius {c} does not contain the unit-trace slice for dimension {d}"
        )));
    }
    let s = (c * c - 1.0 / d as f64).sqrt();
    let mut master = CuttingPlaneMaster::new(state.rho().clone(), s);
    let mut best_corrected: Option<(f64, CMatrix)> = None;
    let gap_tol = config.margin_tol.max(1e-7);
    let mut mu = 0.5;

    let mut round = 0u64;
    let mut stalled = 0usize;
    let mut upper = f64::INFINITY;
    let mut capped = true;
    let mut next_target_attempt = config.detection_target;
    while master.cut_count() < config.max_cuts && stalled < 5 {
        let iters = if round == 0 { 2000 } else { 500 };
        let mut sweep: Vec<SeesawOutcome> = Vec::new();
        let mut candidates: Vec<(CMatrix, f64)> = Vec::new();
        // the saturated ball iterate explores far from the minimum-norm
        // path but rarely corrects well (its violations stay at unit
        // depth); once the cut pool is broad it only runs occasionally
        if master.cut_count() < EXPLORE_CUTS || round % EXPLORE_PERIOD == 0 {
            let (w, h) = master.solve(config.master_tol, iters);
            upper = upper.min(-h);
            let ball_sweep = seesaw_sweep(
                &w,
                cut,
                config.separation_restarts,
                optim::substream_seed(config.seed, 1_000_000 + round),
            )?;
            let mut worst = ball_sweep
                .iter()
                .map(|o| o.value)
                .fold(f64::INFINITY, f64::min);
            sweep.extend(ball_sweep);
            if worst >= -config.margin_tol {
                // cheap sweep found nothing: certify with the full budget
                let cert_sweep = seesaw_sweep(
                    &w,
                    cut,
                    config.seesaw_restarts,
                    optim::substream_seed(config.seed, 2_000_000 + round),
                )?;
                worst = cert_sweep
                    .iter()
                    .map(|o| o.value)
                    .fold(worst, f64::min);
                if worst >= -config.margin_tol {
                    return finish_result(
                        state,
                        w,
                        WitnessFamily::RandomRobustness,
                        Normalization::UnitTrace,
                        Some(Certificate {
                            margin: worst,
                            restarts: config.seesaw_restarts,
                            seed: config.seed,
                        }),
                        None,
                        false,
                        Some(master.cut_count()),
                    );
                }
                sweep.extend(cert_sweep);
            }
            candidates.push((w, worst));
        }
        // the minimum-norm iterate, whose violations vanish as the cut set
        // closes in, is both the main cut source and the bound carrier
        let (w_reg, g) = master.regularized_witness(mu, config.master_tol, iters);
        upper = upper.min(-g + 0.5 * mu * c * c);
        upper = upper.min(master.relaxation_upper_bound(config.master_tol));
        let reg_sweep = seesaw_sweep(
            &w_reg,
            cut,
            config.separation_restarts,
            optim::substream_seed(config.seed, 4_000_000 + round),
        )?;
        let worst_reg = reg_sweep
            .iter()
            .map(|o| o.value)
            .fold(f64::INFINITY, f64::min);
        sweep.extend(reg_sweep);
        candidates.push((w_reg, worst_reg));
        // continuation: drop the regularization only once the current cut
        // set supports the iterate to the current resolution
        if worst_reg >= -mu {
            mu = (0.5 * mu).max(1e-7);
        }

        // shift corrections give certified-candidate lower bounds; clamping
        // first keeps the measured violation meaningful, since mixing toward
        // the identity rescales every product expectation by the same weight
        for (cand, violation) in &candidates {
            let (clamped, kept) = clamp_to_ball(cand.clone(), c);
            let violation = kept * violation + (1.0 - kept) / d as f64;
            let m = (-violation).max(0.0);
            let corrected = shift_corrected(&clamped, m);
            let corrected_value = -trace_inner(&corrected, state.rho())?.re;
            if best_corrected
                .as_ref()
                .map_or(true, |(v, _)| corrected_value > *v)
            {
                best_corrected = Some((corrected_value, corrected));
            }
        }
        let (lower, _) = best_corrected.as_ref().expect("just set");
        if upper - lower <= gap_tol * (1.0 + upper.abs()) {
            let (_, wc) = best_corrected.expect("just checked");
            return certify_corrected(state, wc, config, false, master.cut_count());
        }
        if let Some(target) = config.detection_target {
            // certified at the target: detection verdicts do not need the
            // optimum, so stop as soon as the full sweep confirms one
            if *lower >= next_target_attempt.unwrap_or(target) {
                let (_, wc) = best_corrected.as_ref().expect("just set");
                if let Ok(r) =
                    certify_corrected(state, wc.clone(), config, false, master.cut_count())
                {
                    if r.value >= target {
                        return Ok(r);
                    }
                }
                // certification fell short; wait for real growth before
                // paying for another full sweep
                next_target_attempt = Some((lower * 1.02).max(target));
            }
            // the relaxation bound proves no witness in the ball reaches
            // the target, so the verdict is already settled
            if upper < target {
                capped = false;
                break;
            }
        }
        let fresh = select_cuts(&sweep, &master, config.margin_tol, MAX_NEW_CUTS);
        if fresh.is_empty() {
            stalled += 1;
        } else {
            stalled = 0;
        }
        for v in fresh {
            if master.cut_count() >= config.max_cuts {
                break;
            }
            master.add_cut(v);
        }
        round += 1;
    }

    // budget exhausted (or the verdict settled): certify the best iterate
    let (_, w) = best_corrected.ok_or(Error::NonConvergence {
        solver: "random robustness cutting plane",
        residual: f64::NAN,
        iterations: config.max_cuts,
    })?;
    certify_corrected(state, w, config, capped, master.cut_count())
}

/// PPT relaxation of the generalized robustness:
/// `min Tr Y` s.t. `Y >= 0` and `(rho + Y)^TA >= 0`.
///
/// For NPT states without the `Y >= 0` constraint the optimum would be the
/// negativity, so this value always dominates it; it vanishes exactly on
/// PPT states. Solved by a two-block operator-splitting iteration with
/// closed-form subproblems (both projections are spectral).
pub fn generalized_robustness_ppt(state: &BipartiteState, config: &RunConfig) -> Result<f64> {
    let cut = state.cut();
    let d = cut.dim();
    let rho = state.rho();
    let pt_rho = partial_transpose(rho, cut, Side::A)?;
    // PPT states are feasible with Y = 0
    if matops::eigvalsh(&pt_rho)?[0] >= -1e-12 {
        return Ok(0.0);
    }
    let mut beta = 1.0;
    let mut u = CMatrix::zeros(d, d);
    let mut v = matops::psd_project(&pt_rho)?;
    let mut l1 = CMatrix::zeros(d, d);
    let mut l2 = CMatrix::zeros(d, d);
    let scale = rho.frobenius().max(1.0);
    let mut residual = f64::INFINITY;
    for it in 0..config.gr_max_iters {
        let vm = &v - &l2;
        let pt_vm = partial_transpose(&vm, cut, Side::A)?;
        let mut y = &(&(&u - &l1) + &pt_vm) - rho;
        for i in 0..d {
            y[(i, i)] -= C64::new(1.0 / beta, 0.0);
        }
        let y = y.scale(0.5);

        let u_prev = u.clone();
        u = matops::psd_project(&(&y + &l1))?;
        l1 = &l1 + &(&y - &u);

        let t = partial_transpose(&(rho + &y), cut, Side::A)?;
        let v_prev = v.clone();
        v = matops::psd_project(&(&t + &l2))?;
        l2 = &l2 + &(&t - &v);

        let r_primal = (&y - &u).frobenius().max((&t - &v).frobenius());
        let r_dual = beta
            * (&u - &u_prev)
                .frobenius()
                .max((&v - &v_prev).frobenius());
        residual = r_primal.max(r_dual) / scale;
        if residual <= config.gr_tol {
            return Ok(u.trace().re.max(0.0));
        }
        if it % 50 == 49 {
            if r_primal > 10.0 * r_dual {
                beta *= 2.0;
                l1 = l1.scale(0.5);
                l2 = l2.scale(0.5);
            } else if r_dual > 10.0 * r_primal {
                beta *= 0.5;
                l1 = l1.scale(2.0);
                l2 = l2.scale(2.0);
            }
        }
    }
    Err(Error::NonConvergence {
        solver: "generalized robustness splitting",
        residual,
        iterations: config.gr_max_iters,
    })
}
