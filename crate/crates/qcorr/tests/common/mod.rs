//! Property-suite bodies shared by the `properties` and `acceptance`
//! integration targets. Each returns `Err` with a description of the first
//! offending case instead of panicking, so the acceptance runner can grade
//! criteria without aborting.

use std::f64::consts::PI;

use qcorr::bounds::{self, AnalysisOptions};
use qcorr::config::RunConfig;
use qcorr::discord::{self, MeasurementBasis};
use qcorr::matops::{self, CMatrix, CVector, Cut, Side, C64};
use qcorr::states;
use qcorr::witness;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(gaussian(rng), gaussian(rng))).hermitize()
}

/// Orthonormal basis of `C^d` as the eigenvectors of a random Hermitian.
pub fn random_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    let eig = matops::eigh(&random_hermitian(d, rng)).unwrap();
    (0..d).map(|i| eig.vector(i)).collect()
}

pub fn random_probs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|x| x / total).collect()
}

/// `|Tr AB| <= ||A||_p ||B||_q` over random Hermitian pairs, cycling
/// through the conjugate pairs (1, inf), (2, 2), (inf, 1), (3, 3/2).
pub fn holder_on_random_pairs(pairs: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let exponents = [(1.0, f64::INFINITY), (2.0, 2.0), (f64::INFINITY, 1.0), (3.0, 1.5)];
    for i in 0..pairs {
        let d = 2 + i % 5;
        let a = random_hermitian(d, &mut rng);
        let b = random_hermitian(d, &mut rng);
        // Hermitian pair, so Tr[A B^dag] = Tr[A B]
        let lhs = matops::trace_inner(&a, &b).unwrap().re.abs();
        let (p, q) = exponents[i % exponents.len()];
        let rhs = matops::schatten(&a, p).unwrap() * matops::schatten(&b, q).unwrap();
        if lhs > rhs * (1.0 + 1e-12) + 1e-12 {
            return Err(format!("pair {i} (p={p}, q={q}): |Tr AB| = {lhs} > {rhs}"));
        }
    }
    Ok(())
}

/// Geometric discords vanish on random classical-classical states. The
/// basis search stops at function spread 1e-8, so "vanish" means below
/// 1e-7, still far under any nonzero discord in this corpus.
pub fn discords_vanish_on_classical_states(count: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cut = Cut::new(2, 2).unwrap();
    let config = RunConfig {
        restarts: 12,
        refine_iters: 200,
        ..RunConfig::with_seed(11)
    };
    for k in 0..count {
        let probs = random_probs(4, &mut rng);
        let basis_a = random_basis(2, &mut rng);
        let basis_b = random_basis(2, &mut rng);
        let s = states::classical_classical(&probs, cut, &basis_a, &basis_b)
            .map_err(|e| e.to_string())?;
        let side = if k % 2 == 0 { Side::B } else { Side::A };
        let d2 = discord::d2_discord(&s, side, &config).map_err(|e| e.to_string())?.value;
        if d2 >= 1e-7 {
            return Err(format!("state {k}: D2 = {d2}"));
        }
        let d1 = discord::d1_discord(&s, side, &config).map_err(|e| e.to_string())?.value;
        if d1 >= 1e-6 {
            return Err(format!("state {k}: D1 = {d1}"));
        }
        if k % 10 == 0 {
            let d3 = discord::dp_discord(&s, 3.0, side, &config)
                .map_err(|e| e.to_string())?
                .value;
            if d3 >= 1e-7 {
                return Err(format!("state {k}: D3 = {d3}"));
            }
        }
    }
    Ok(())
}

/// Every discord-versus-witness margin stays above `-1e-6` on random
/// two-qubit states; `verify_bounds` itself errors on a violation.
pub fn margins_hold_on_random_two_qubit_states(count: u64) -> Result<(), String> {
    let cut = Cut::new(2, 2).unwrap();
    let config = RunConfig {
        restarts: 8,
        refine_iters: 100,
        ..RunConfig::with_seed(17)
    };
    let options = AnalysisOptions::default();
    for i in 0..count {
        let s = states::random_state(cut, 9_000 + i).map_err(|e| e.to_string())?;
        let report = bounds::verify_bounds(&s, &config, &options)
            .map_err(|e| format!("state {i}: {e}"))?;
        if report.margins.worst() < bounds::MARGIN_TOL {
            return Err(format!("state {i}: margin {}", report.margins.worst()));
        }
    }
    Ok(())
}

/// Unitary whose columns are the Bloch basis at `(theta, phi)`.
pub fn bloch_basis(theta: f64, phi: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let phase = C64::new(phi.cos(), phi.sin());
    let mut u = CMatrix::zeros(2, 2);
    u[(0, 0)] = C64::new(c, 0.0);
    u[(1, 0)] = phase * s;
    u[(0, 1)] = -phase.conj() * s;
    u[(1, 1)] = C64::new(c, 0.0);
    u
}

/// The Hilbert-Schmidt discord optimizer against a 100 x 100 basis grid.
/// `{u, u_perp}` is an unordered pair, so the half sphere (theta in
/// [0, pi/2), full phi) covers every basis once.
pub fn d2_matches_basis_grid(count: u64) -> Result<(), String> {
    let cut = Cut::new(2, 2).unwrap();
    let config = RunConfig {
        restarts: 16,
        ..RunConfig::with_seed(23)
    };
    for i in 0..count {
        let s = states::random_state(cut, 400 + i).map_err(|e| e.to_string())?;
        let opt = discord::d2_discord(&s, Side::B, &config)
            .map_err(|e| e.to_string())?
            .value;
        let mut grid_min = f64::INFINITY;
        for a in 0..100 {
            let theta = (a as f64 + 0.5) * (PI / 2.0) / 100.0;
            for b in 0..100 {
                let phi = b as f64 * 2.0 * PI / 100.0;
                let basis = MeasurementBasis::from_unitary(Side::B, &bloch_basis(theta, phi))
                    .map_err(|e| e.to_string())?;
                let xi = discord::dephase(&s, &basis).map_err(|e| e.to_string())?;
                let dist = (s.rho() - xi.rho()).frobenius();
                grid_min = grid_min.min(dist * dist);
            }
        }
        let gap = grid_min - opt;
        if !(-1e-9..=1e-4).contains(&gap) {
            return Err(format!("state {i}: optimizer {opt} vs grid {grid_min}"));
        }
    }
    Ok(())
}

/// `N = (||rho^TA||_1 - 1) / 2` across random states on assorted cuts.
pub fn negativity_matches_trace_norm(count: u64) -> Result<(), String> {
    let cuts = [
        Cut::new(2, 2).unwrap(),
        Cut::new(2, 3).unwrap(),
        Cut::new(3, 3).unwrap(),
        Cut::new(2, 4).unwrap(),
    ];
    for i in 0..count {
        let cut = cuts[(i % 4) as usize];
        let s = states::random_state(cut, 7_000 + i).map_err(|e| e.to_string())?;
        let neg = witness::negativity(&s);
        let pt = matops::partial_transpose(s.rho(), cut, Side::A).map_err(|e| e.to_string())?;
        let trace_norm = matops::schatten(&pt, 1.0).map_err(|e| e.to_string())?;
        if (neg - (trace_norm - 1.0) / 2.0).abs() > 1e-10 {
            return Err(format!(
                "state {i} on {cut:?}: N = {neg}, ||rho^TA||_1 = {trace_norm}"
            ));
        }
    }
    Ok(())
}
