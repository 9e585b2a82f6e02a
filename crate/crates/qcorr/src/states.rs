//! Canonical bipartite state families and density-matrix plumbing.
//!
//! Every constructor returns a validated [`BipartiteState`]: unit trace to
//! 1e-12, Hermitian, and positive semidefinite to -1e-10. States serialize
//! to a flat JSON schema (`label`, `d_A`, `d_B`, row-major `entries` as
//! `[re, im]` pairs) so they can be piped between CLI invocations.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matops::{self, CMatrix, CVector, Cut, Side, C64};

/// Trace must match 1 at this absolute tolerance.
pub const TRACE_TOL: f64 = 1e-12;

/// Eigenvalues above this (negative) floor count as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

/// A validated bipartite density matrix with its cut and a human label.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    rho: CMatrix,
    cut: Cut,
    label: String,
}

impl BipartiteState {
    /// Validates and wraps a density matrix.
    pub fn new(rho: CMatrix, cut: Cut, label: impl Into<String>) -> Result<BipartiteState> {
        if !rho.is_square() || rho.rows() != cut.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state matrix is {}x{}, cut {} needs dimension {}",
                rho.rows(),
                rho.cols(),
                cut,
                cut.dim()
            )));
        }
        let defect = rho.hermiticity_defect();
        if defect > matops::HERMITICITY_TOL * 10.0 {
            return Err(Error::NotDensityMatrix(format!(
                "Hermiticity defect {defect:.3e}"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "trace {:.15} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let min_eig = matops::eigvalsh(&rho)?[0];
        if min_eig < PSD_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(BipartiteState {
            rho,
            cut,
            label: label.into(),
        })
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn cut(&self) -> Cut {
        self.cut
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.cut.dim()
    }

    /// `Tr[rho^2]`, one for pure states.
    pub fn purity(&self) -> f64 {
        let f = self.rho.frobenius();
        f * f
    }

    /// Reduced state of one side.
    pub fn reduced(&self, side: Side) -> Result<CMatrix> {
        matops::partial_trace(&self.rho, self.cut, side)
    }

    /// Convex mixture with white noise: `(1 - s) rho + s I/d`.
    pub fn mix_with_noise(&self, s: f64) -> Result<BipartiteState> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "noise weight must lie in [0, 1], got {s}"
            )));
        }
        let d = self.dim();
        let mixed = &self.rho.scale(1.0 - s) + &CMatrix::identity(d).scale(s / d as f64);
        BipartiteState::new(mixed, self.cut, format!("{}+noise({s})", self.label))
    }

    /// Reinterprets the same matrix under a different cut of equal total dimension.
    pub fn rebipartition(&self, cut: Cut) -> Result<BipartiteState> {
        if cut.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot re-cut dimension {} as {}",
                self.dim(),
                cut
            )));
        }
        BipartiteState::new(
            self.rho.clone(),
            cut,
            format!("{}@{}", self.label, cut),
        )
    }
}

/// Swap operator `F |i j> = |j i>` on `d (x) d`.
pub fn flip_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    f
}

/// Maximally entangled state `|phi_d> = sum_i |ii> / sqrt(d)` on `d (x) d`.
///
/// Entries are written as exact reciprocals `1/d` so that the partial
/// transpose equals `flip_operator(d) / d` bit for bit.
pub fn max_entangled(d: usize) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "maximally entangled state needs local dimension >= 2, got {d}"
        )));
    }
    let inv = 1.0 / d as f64;
    let mut rho = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            rho[(i * d + i, j * d + j)] = C64::new(inv, 0.0);
        }
    }
    BipartiteState::new(rho, Cut::new(d, d)?, format!("max_entangled({d})"))
}

/// Werner state on `d (x) d` with flip expectation `Tr[F rho] = k`.
///
/// `rho = [(d - k) I + (d k - 1) F] / (d^3 - d)`, entangled iff `k < 0`.
pub fn werner(d: usize, k: f64) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "Werner family needs local dimension >= 2, got {d}"
        )));
    }
    if !(-1.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "Werner parameter must lie in [-1, 1], got {k}"
        )));
    }
    let df = d as f64;
    let denom = df * df * df - df;
    let alpha = (df - k) / denom;
    let beta = (df * k - 1.0) / denom;
    let rho = &CMatrix::identity(d * d).scale(alpha) + &flip_operator(d).scale(beta);
    BipartiteState::new(rho, Cut::new(d, d)?, format!("werner({d},{k})"))
}

/// One-parameter 3x3 family that stays PPT for every `k` in `[0, 1]` while
/// being entangled strictly inside the interval.
///
/// `rho = [3k P_psi + k (P_01 + P_02 + P_10 + P_12 + P_21) + |phi_k><phi_k|] / (8k + 1)`
/// with `psi = (|00> + |11> + |22>)/sqrt(3)` and
/// `phi_k = sqrt((1+k)/2) |20> + sqrt((1-k)/2) |22>`.
pub fn horodecki_3x3(k: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "family parameter must lie in [0, 1], got {k}"
        )));
    }
    let cut = Cut::new(3, 3)?;
    let mut psi = CVector::zeros(9);
    for i in 0..3 {
        psi[cut.flat(i, i)] = C64::new(1.0 / 3f64.sqrt(), 0.0);
    }
    let mut rho = CMatrix::zeros(9, 9);
    rho.add_scaled_outer(3.0 * k, &psi);
    for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 1)] {
        let e = cut.flat(i, j);
        rho[(e, e)] += C64::new(k, 0.0);
    }
    let mut phi = CVector::zeros(9);
    phi[cut.flat(2, 0)] = C64::new(((1.0 + k) / 2.0).sqrt(), 0.0);
    phi[cut.flat(2, 2)] = C64::new(((1.0 - k) / 2.0).sqrt(), 0.0);
    rho.add_scaled_outer(1.0, &phi);
    BipartiteState::new(
        rho.scale(1.0 / (8.0 * k + 1.0)),
        cut,
        format!("horodecki_3x3({k})"),
    )
}

/// The nine mutually orthogonal product vectors of the 4x4 tile pattern:
/// `u_j = (|j> - |j+1>)/sqrt(2) (x) |j>`, `v_j = |j> (x) (|j+1> - |j+2>)/sqrt(2)`
/// (indices mod 4) and the uniform vector `w = (1/4) sum_ij |ij>`.
pub fn upb_tiles_vectors() -> Vec<CVector> {
    let cut = Cut { d_a: 4, d_b: 4 };
    let s = 1.0 / 2f64.sqrt();
    let mut vectors = Vec::with_capacity(9);
    for j in 0..4usize {
        let mut u = CVector::zeros(16);
        u[cut.flat(j, j)] = C64::new(s, 0.0);
        u[cut.flat((j + 1) % 4, j)] = C64::new(-s, 0.0);
        vectors.push(u);
    }
    for j in 0..4usize {
        let mut v = CVector::zeros(16);
        v[cut.flat(j, (j + 1) % 4)] = C64::new(s, 0.0);
        v[cut.flat(j, (j + 2) % 4)] = C64::new(-s, 0.0);
        vectors.push(v);
    }
    let mut w = CVector::zeros(16);
    for e in 0..16 {
        w[e] = C64::new(0.25, 0.0);
    }
    vectors.push(w);
    vectors
}

/// Bound entangled 4x4 state supported on the complement of the tile basis:
/// `rho = (I - sum_k |psi_k><psi_k|) / 7`. Partial-transpose invariant, hence
/// PPT, yet entangled because the product basis is unextendible.
pub fn upb_tiles_4x4() -> Result<BipartiteState> {
    let mut rho = CMatrix::identity(16);
    for v in upb_tiles_vectors() {
        rho.add_scaled_outer(-1.0, &v);
    }
    BipartiteState::new(rho.scale(1.0 / 7.0), Cut::new(4, 4)?, "upb_tiles_4x4")
}

pub(crate) fn validate_orthonormal(basis: &[CVector], d: usize, what: &str) -> Result<()> {
    if basis.len() != d {
        return Err(Error::InvalidArgument(format!(
            "{what} needs {d} vectors, got {}",
            basis.len()
        )));
    }
    for (i, u) in basis.iter().enumerate() {
        if u.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "{what} vector {i} has dimension {}, expected {d}",
                u.dim()
            )));
        }
        for (j, v) in basis.iter().enumerate() {
            let g = u.dot(v);
            let target = if i == j { 1.0 } else { 0.0 };
            if (g - C64::new(target, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "{what} is not orthonormal: |<{i}|{j}> - {target}| = {:.3e}",
                    (g - C64::new(target, 0.0)).norm()
                )));
            }
        }
    }
    Ok(())
}

fn validate_probabilities(p: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for &x in p {
        if x < -1e-14 {
            return Err(Error::InvalidArgument(format!(
                "{what} has a negative entry {x:.3e}"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{what} sums to {sum:.15}, expected 1"
        )));
    }
    Ok(())
}

/// Classical-classical state `sum_ij p_ij |e_i f_j><e_i f_j|` from a joint
/// probability table (row-major `d_A x d_B`) and local orthonormal bases.
pub fn classical_classical(
    p: &[f64],
    cut: Cut,
    basis_a: &[CVector],
    basis_b: &[CVector],
) -> Result<BipartiteState> {
    if p.len() != cut.d_a * cut.d_b {
        return Err(Error::DimensionMismatch(format!(
            "probability table has {} entries, cut {} needs {}",
            p.len(),
            cut,
            cut.d_a * cut.d_b
        )));
    }
    validate_probabilities(p, "probability table")?;
    validate_orthonormal(basis_a, cut.d_a, "basis A")?;
    validate_orthonormal(basis_b, cut.d_b, "basis B")?;
    let mut rho = CMatrix::zeros(cut.dim(), cut.dim());
    for i in 0..cut.d_a {
        for j in 0..cut.d_b {
            let w = p[i * cut.d_b + j];
            if w == 0.0 {
                continue;
            }
            rho.add_scaled_outer(w, &basis_a[i].tensor(&basis_b[j]));
        }
    }
    BipartiteState::new(rho, cut, "classical_classical")
}

/// Quantum-classical state `sum_j w_j sigma_j (x) |f_j><f_j|`: arbitrary
/// states on side A correlated with an orthonormal basis on side B.
pub fn quantum_classical(
    weights: &[f64],
    block_states: &[CMatrix],
    basis_b: &[CVector],
) -> Result<BipartiteState> {
    if weights.len() != basis_b.len() || block_states.len() != basis_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "need equally many weights ({}), block states ({}) and basis vectors ({})",
            weights.len(),
            block_states.len(),
            basis_b.len()
        )));
    }
    validate_probabilities(weights, "weight vector")?;
    let d_b = basis_b.len();
    let d_a = block_states
        .first()
        .map(|m| m.rows())
        .ok_or_else(|| Error::InvalidArgument("no blocks given".into()))?;
    validate_orthonormal(basis_b, d_b, "basis B")?;
    let cut = Cut::new(d_a, d_b)?;
    let mut rho = CMatrix::zeros(cut.dim(), cut.dim());
    for (j, (sigma, &w)) in block_states.iter().zip(weights).enumerate() {
        if !sigma.is_square() || sigma.rows() != d_a {
            return Err(Error::DimensionMismatch(format!(
                "block {j} is {}x{}, expected {d_a}x{d_a}",
                sigma.rows(),
                sigma.cols()
            )));
        }
        let tr = sigma.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!("block {j} trace {}", tr.re)));
        }
        if matops::eigvalsh(sigma)?[0] < PSD_TOL {
            return Err(Error::NotDensityMatrix(format!("block {j} is not PSD")));
        }
        if w == 0.0 {
            continue;
        }
        let proj = basis_b[j].outer(&basis_b[j]);
        rho = &rho + &matops::tensor(&sigma.scale(w), &proj);
    }
    BipartiteState::new(rho, cut, "quantum_classical")
}

/// Computational basis of dimension `d`.
pub fn computational_basis(d: usize) -> Vec<CVector> {
    (0..d).map(|i| CVector::basis(d, i)).collect()
}

/// Seeded random density matrix from the Ginibre ensemble: `G G^dag / Tr`,
/// full rank almost surely. Deterministic for a fixed `(cut, seed)`.
pub fn random_state(cut: Cut, seed: u64) -> Result<BipartiteState> {
    let d = cut.dim();
    let mut rng = crate::optim::substream(seed, 0x47494e42);
    let g = CMatrix::from_fn(d, d, |_, _| {
        let (re, im) = crate::optim::normal_pair(&mut rng);
        C64::new(re, im)
    });
    let gg = &g * &g.dagger();
    let tr = gg.trace().re;
    BipartiteState::new(
        gg.scale(1.0 / tr).hermitize(),
        cut,
        format!("random({cut},{seed})"),
    )
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    label: String,
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for BipartiteState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            label: self.label.clone(),
            d_a: self.cut.d_a,
            d_b: self.cut.d_b,
            entries: self
                .rho
                .as_slice()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BipartiteState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(deserializer)?;
        let cut = Cut::new(raw.d_a, raw.d_b).map_err(D::Error::custom)?;
        let n = cut.dim();
        let data: Vec<C64> = raw
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let rho = CMatrix::from_rows(n, n, data).map_err(D::Error::custom)?;
        BipartiteState::new(rho, cut, raw.label).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{eigvalsh, partial_transpose, trace_inner};
    use approx::assert_abs_diff_eq;

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flip_squares_to_identity() {
        let f = flip_operator(3);
        assert_eq!(max_abs_diff(&(&f * &f), &CMatrix::identity(9)), 0.0);
        assert_eq!(f.trace().re, 3.0);
    }

    #[test]
    fn max_entangled_partial_transpose_is_flip_over_d() {
        for d in [2usize, 3, 4] {
            let phi = max_entangled(d).unwrap();
            let pt = partial_transpose(phi.rho(), phi.cut(), Side::A).unwrap();
            let expect = flip_operator(d).scale(1.0 / d as f64);
            // exact by construction, not just close
            assert_eq!(pt.as_slice(), expect.as_slice(), "d = {d}");
            assert_abs_diff_eq!(phi.purity(), 1.0, epsilon = 1e-14);
        }
        assert!(max_entangled(1).is_err());
    }

    #[test]
    fn werner_flip_expectation_and_extremes() {
        for d in [2usize, 3, 5, 8] {
            for k in [-1.0, -0.4, 0.0, 1.0 / d as f64, 0.7, 1.0] {
                let w = werner(d, k).unwrap();
                let f = flip_operator(d);
                let got = trace_inner(&f, w.rho()).unwrap().re;
                assert_abs_diff_eq!(got, k, epsilon = 1e-12);
            }
        }
        // k = 1 on qubits: projector onto the symmetric subspace over 3
        let w = werner(2, 1.0).unwrap();
        let psym = &(&CMatrix::identity(4) + &flip_operator(2)).scale(0.5);
        assert!(max_abs_diff(w.rho(), &psym.scale(1.0 / 3.0)) < 1e-15);
        // k = -1 in d = 8: antisymmetric projector over 28
        let w = werner(8, -1.0).unwrap();
        let panti = &(&CMatrix::identity(64) - &flip_operator(8)).scale(0.5);
        assert!(max_abs_diff(w.rho(), &panti.scale(1.0 / 28.0)) < 1e-15);
        assert!(werner(8, 1.2).is_err());
        assert!(werner(1, 0.0).is_err());
    }

    #[test]
    fn werner_spectra() {
        let d = 5usize;
        let k = -0.3;
        let w = werner(d, k).unwrap();
        let df = d as f64;
        let vals = eigvalsh(w.rho()).unwrap();
        let sym = (1.0 + k) / (df * (df + 1.0));
        let anti = (1.0 - k) / (df * (df - 1.0));
        let n_anti = d * (d - 1) / 2;
        for (i, &v) in vals.iter().enumerate() {
            let expect = if i < d * (d + 1) / 2 { sym } else { anti };
            // ascending: sym < anti here because k < 0
            let expect = if sym <= anti {
                expect
            } else if i < n_anti {
                anti
            } else {
                sym
            };
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
        // partial transpose spectrum: k/d once, (d - k)/(d^3 - d) with multiplicity d^2 - 1
        let pt = partial_transpose(w.rho(), w.cut(), Side::A).unwrap();
        let ptvals = eigvalsh(&pt).unwrap();
        assert_abs_diff_eq!(ptvals[0], k / df, epsilon = 1e-12);
        assert_abs_diff_eq!(
            ptvals[1],
            (df - k) / (df * df * df - df),
            epsilon = 1e-12
        );
    }

    #[test]
    fn werner_separability_boundary_sits_at_k_zero() {
        let d = 4usize;
        let w = werner(d, 0.0).unwrap();
        let pt = partial_transpose(w.rho(), w.cut(), Side::A).unwrap();
        let min = eigvalsh(&pt).unwrap()[0];
        assert!(min.abs() < 1e-12, "boundary min eigenvalue {min}");
        let ent = werner(d, -0.1).unwrap();
        let pt = partial_transpose(ent.rho(), ent.cut(), Side::A).unwrap();
        assert!(eigvalsh(&pt).unwrap()[0] < -1e-3);
    }

    #[test]
    fn horodecki_matches_reference_entries() {
        let k = 0.5;
        let h = horodecki_3x3(k).unwrap();
        let rho = h.rho();
        let norm = 1.0 / (8.0 * k + 1.0);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        // hand-computed entries of the reference matrix
        assert_abs_diff_eq!(rho[(0, 0)].re, k * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(0, 4)].re, k * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(4, 8)].re, k * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(6, 6)].re, (1.0 + k) / 2.0 * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(8, 8)].re, (1.0 + k) / 2.0 * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(
            rho[(6, 8)].re,
            (1.0 - k * k).sqrt() / 2.0 * norm,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(rho[(1, 1)].re, k * norm, epsilon = 1e-14);
        assert_abs_diff_eq!(rho[(0, 8)].re, k * norm, epsilon = 1e-14);
        assert_eq!(rho[(0, 1)].re, 0.0);
    }

    #[test]
    fn horodecki_is_ppt_for_all_k() {
        for k in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let h = horodecki_3x3(k).unwrap();
            let pt = partial_transpose(h.rho(), h.cut(), Side::A).unwrap();
            let min = eigvalsh(&pt).unwrap()[0];
            assert!(min > -1e-10, "k = {k}: PT min eigenvalue {min}");
        }
        assert!(horodecki_3x3(-0.1).is_err());
        assert!(horodecki_3x3(1.1).is_err());
    }

    #[test]
    fn upb_vectors_are_orthonormal_products() {
        let vs = upb_tiles_vectors();
        assert_eq!(vs.len(), 9);
        for (i, u) in vs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                let g = u.dot(v);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(target, 0.0)).norm() < 1e-14,
                    "Gram[{i}][{j}] = {g}"
                );
            }
        }
    }

    #[test]
    fn upb_state_is_pt_invariant_and_orthogonal_to_basis() {
        let s = upb_tiles_4x4().unwrap();
        let pt = partial_transpose(s.rho(), s.cut(), Side::A).unwrap();
        assert!(max_abs_diff(&pt, s.rho()) < 1e-15);
        for v in upb_tiles_vectors() {
            let overlap = s.rho().quad_form(&v).norm();
            assert!(overlap < 1e-14, "overlap {overlap}");
        }
        // spectrum: seven eigenvalues 1/7, nine zeros
        let vals = eigvalsh(s.rho()).unwrap();
        for &v in &vals[..9] {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
        }
        for &v in &vals[9..] {
            assert_abs_diff_eq!(v, 1.0 / 7.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn classical_classical_uniform_is_maximally_mixed() {
        let cut = Cut::new(2, 2).unwrap();
        let p = [0.25; 4];
        let s = classical_classical(
            &p,
            cut,
            &computational_basis(2),
            &computational_basis(2),
        )
        .unwrap();
        assert!(max_abs_diff(s.rho(), &CMatrix::identity(4).scale(0.25)) < 1e-15);
        // invalid tables are rejected
        assert!(classical_classical(
            &[0.5, 0.6, -0.1, 0.0],
            cut,
            &computational_basis(2),
            &computational_basis(2)
        )
        .is_err());
        assert!(classical_classical(
            &[0.5, 0.2, 0.1, 0.1],
            cut,
            &computational_basis(2),
            &computational_basis(2)
        )
        .is_err());
        // non-orthonormal basis rejected
        let skew = vec![CVector::basis(2, 0), CVector::basis(2, 0)];
        assert!(classical_classical(&p, cut, &skew, &computational_basis(2)).is_err());
    }

    #[test]
    fn quantum_classical_builds_block_diagonal() {
        let plus = CVector::from_real(&[0.5f64.sqrt(), 0.5f64.sqrt()]);
        let blocks = vec![plus.outer(&plus), CMatrix::from_diag(&[1.0, 0.0])];
        let s = quantum_classical(&[0.5, 0.5], &blocks, &computational_basis(2)).unwrap();
        assert_abs_diff_eq!(s.rho().trace().re, 1.0, epsilon = 1e-14);
        // block (j = 0) lives on B-index 0
        assert_abs_diff_eq!(s.rho()[(0, 2)].re, 0.25, epsilon = 1e-14);
        assert_eq!(s.rho()[(0, 1)].re, 0.0);
        // non-density block rejected
        let bad = vec![CMatrix::from_diag(&[2.0, -1.0]), blocks[1].clone()];
        assert!(quantum_classical(&[0.5, 0.5], &bad, &computational_basis(2)).is_err());
    }

    #[test]
    fn mix_with_noise_endpoints() {
        let s = max_entangled(2).unwrap();
        let same = s.mix_with_noise(0.0).unwrap();
        assert!(max_abs_diff(same.rho(), s.rho()) < 1e-15);
        let mixed = s.mix_with_noise(1.0).unwrap();
        assert!(max_abs_diff(mixed.rho(), &CMatrix::identity(4).scale(0.25)) < 1e-15);
        assert!(s.mix_with_noise(-0.1).is_err());
        assert!(s.mix_with_noise(1.1).is_err());
    }

    #[test]
    fn rebipartition_checks_dimensions() {
        let w = werner(8, -1.0).unwrap();
        let recut = w.rebipartition(Cut::new(2, 32).unwrap()).unwrap();
        assert_eq!(recut.cut(), Cut::new(2, 32).unwrap());
        assert_eq!(max_abs_diff(recut.rho(), w.rho()), 0.0);
        assert!(w.rebipartition(Cut::new(3, 21).unwrap()).is_err());
    }

    #[test]
    fn constructor_rejects_bad_matrices() {
        let cut = Cut::new(2, 2).unwrap();
        let not_unit_trace = CMatrix::identity(4);
        assert!(BipartiteState::new(not_unit_trace, cut, "x").is_err());
        let negative = CMatrix::from_diag(&[1.5, -0.5, 0.0, 0.0]);
        assert!(BipartiteState::new(negative, cut, "x").is_err());
        let wrong_dim = CMatrix::identity(6).scale(1.0 / 6.0);
        assert!(BipartiteState::new(wrong_dim, cut, "x").is_err());
    }

    #[test]
    fn json_roundtrip_preserves_state() {
        let s = werner(3, -0.5).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"d_A\":3"));
        assert!(text.contains("\"label\":\"werner(3,-0.5)\""));
        let back: BipartiteState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        // corrupted payloads fail validation on the way in
        let bad = text.replace("\"d_A\":3", "\"d_A\":9");
        assert!(serde_json::from_str::<BipartiteState>(&bad).is_err());
    }
}
