//! Internal optimization utilities: seeded substreams, Haar-style sampling,
//! Givens parametrization of unitaries, and a dependency-free Nelder-Mead.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matops::{CMatrix, CVector, C64};

/// Derives an independent substream seed from a master seed and an index.
///
/// SplitMix64 finalizer; consecutive indices give uncorrelated streams, and
/// results depend only on `(seed, index)`, never on scheduling.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, index))
}

/// Standard normal pair via Box-Muller.
pub(crate) fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    (r * t.cos(), r * t.sin())
}

/// Haar-distributed unit vector: complex Gaussian entries, normalized.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    loop {
        let mut v = CVector::zeros(d);
        for i in 0..d {
            let (re, im) = normal_pair(rng);
            v[i] = C64::new(re, im);
        }
        if v.norm() > 1e-6 {
            return v.normalized();
        }
    }
}

/// Unitary from a list of Givens rotations, one `(theta, phi)` pair per
/// index pair `i < j`, applied to the identity. `params.len()` must be
/// `d (d - 1)` (two angles per pair); the map is onto the unitaries that
/// matter for basis choice (global and per-column phases are quotiented
/// away by the objectives).
pub fn givens_unitary(params: &[f64], d: usize) -> CMatrix {
    let n_pairs = d * (d - 1) / 2;
    assert_eq!(params.len(), 2 * n_pairs, "expected 2 * C(d,2) parameters");
    let mut u = CMatrix::identity(d);
    let mut idx = 0;
    for i in 0..d {
        for j in (i + 1)..d {
            let theta = params[idx];
            let phi = params[idx + 1];
            idx += 2;
            let c = C64::new(theta.cos(), 0.0);
            let s = C64::new(theta.sin() * phi.cos(), theta.sin() * phi.sin());
            // right-multiply by the rotation in the (i, j) plane
            for r in 0..d {
                let a = u[(r, i)];
                let b = u[(r, j)];
                u[(r, i)] = a * c + b * s.conj();
                u[(r, j)] = -a * s + b * c;
            }
        }
    }
    u
}

/// Outcome of a Nelder-Mead run.
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Final spread of simplex values; small means converged.
    pub residual: f64,
}

/// Nelder-Mead simplex minimization with standard coefficients.
///
/// Deterministic for a fixed starting point and step. Terminates when the
/// value spread across the simplex drops below `ftol` or after `max_iter`
/// reflections.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> NmOutcome {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        if spread.abs() <= ftol {
            break;
        }

        // centroid of all but the worst point
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, &xi) in centroid.iter_mut().zip(&simplex[i]) {
                *c += xi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
        };

        let reflected = blend(&centroid, &simplex[worst], -alpha);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = blend(&centroid, &simplex[worst], -gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        let contracted = blend(&centroid, &simplex[worst], rho);
        let fc = f(&contracted);
        if fc < values[worst] {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best_point = simplex[best].clone();
        for &i in &order[1..] {
            simplex[i] = blend(&best_point, &simplex[i], sigma);
            values[i] = f(&simplex[i]);
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    let spread = values
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - values[best];
    NmOutcome {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        residual: spread,
    }
}
