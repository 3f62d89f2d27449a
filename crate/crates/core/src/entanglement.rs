//! Concurrences, the bi-local tangle and the concurrence-sum inequality.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{amplitude, AmplitudePair, CavityParams};
use crate::error::{Error, Result};
use crate::quantum_state::{reduce, DensityMatrix4, InitialState, JointState, Subsystem};

/// Concurrences this close to zero are reported as exactly zero.
pub const ZERO_SNAP: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-8;

fn snap(c: f64) -> f64 {
    if c < ZERO_SNAP {
        0.0
    } else {
        c.min(1.0)
    }
}

/// `sigma_y (x) sigma_y` in the (00, 01, 10, 11) basis.
fn spin_flip() -> Matrix4<Complex64> {
    let mut y = Matrix4::zeros();
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// Wootters concurrence of a two-qubit state.
///
/// The decreasing roots `l_i` of the spectrum of `rho (Y rho* Y)` are the
/// eigenvalue roots of the Hermitian `sqrt(rho) Y rho* Y sqrt(rho)`. Writing
/// `rho = psi psi^dagger`, they equal the singular values of the complex
/// symmetric `psi^T Y psi`, which are computed directly so that vanishing
/// `l_i` are resolved to working precision rather than to its square root.
pub fn wootters(rho: &DensityMatrix4) -> Result<f64> {
    let herm_err = rho.hermiticity_error();
    if herm_err > HERMITIAN_TOL {
        return Err(Error::Domain(format!(
            "density matrix is not Hermitian (error {herm_err:.3e})"
        )));
    }
    let psi = match rho.factor() {
        Some(psi) => *psi,
        None => {
            let m = rho.matrix();
            let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(herm);
            let mut psi = eig.eigenvectors;
            for (k, lam) in eig.eigenvalues.iter().enumerate() {
                let root = lam.max(0.0).sqrt();
                psi.column_mut(k).scale_mut(root);
            }
            psi
        }
    };
    let y = spin_flip();
    let tau = psi.transpose() * y * psi;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok(snap(l[0] - l[1] - l[2] - l[3]))
}

/// Atom-atom concurrence `max{0, |E1 E2| [sqrt(1-s^2) - (1+s)|F1 F2|]}`.
pub fn concurrence_qubits(s: f64, a1: &AmplitudePair, a2: &AmplitudePair) -> f64 {
    let e = (a1.e * a2.e).norm();
    let f = a1.f_mag * a2.f_mag;
    snap(e * ((1.0 - s * s).max(0.0).sqrt() - (1.0 + s) * f))
}

/// Reservoir-reservoir concurrence `max{0, |F1 F2| [sqrt(1-s^2) - (1+s)|E1 E2|]}`.
pub fn concurrence_reservoirs(s: f64, a1: &AmplitudePair, a2: &AmplitudePair) -> f64 {
    let e = (a1.e * a2.e).norm();
    let f = a1.f_mag * a2.f_mag;
    snap(f * ((1.0 - s * s).max(0.0).sqrt() - (1.0 + s) * e))
}

/// Concurrence between an atom and its own reservoir, `(1+s)|E F|`.
pub fn concurrence_qubit_own_reservoir(s: f64, a: &AmplitudePair) -> f64 {
    snap((1.0 + s) * a.e.norm() * a.f_mag)
}

/// Linear-entropy tangle `2 (1 - Tr rho^2)` of a reduced pair state.
pub fn bilocal_tangle(rho: &DensityMatrix4) -> f64 {
    2.0 * (1.0 - rho.purity())
}

/// Wootters concurrences of (A1, R2) and (A2, R1).
pub fn cross_concurrences(state: &JointState) -> Result<(f64, f64)> {
    let c1r2 = wootters(&reduce(state, (Subsystem::A1, Subsystem::R2))?)?;
    let c2r1 = wootters(&reduce(state, (Subsystem::A2, Subsystem::R1))?)?;
    Ok((c1r2, c2r1))
}

/// Every bipartite measure of the model at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSnapshot {
    pub t: f64,
    pub c_12: f64,
    pub c_r1r2: f64,
    pub c_1r1: f64,
    pub c_2r2: f64,
    pub c_1r2: f64,
    pub c_2r1: f64,
    pub tangle_bilocal: f64,
    pub abs_e1: f64,
    pub abs_e2: f64,
}

impl EntanglementSnapshot {
    /// `C12^2 + Cr1r2^2 + C1r2^2 + C2r1^2`, bounded by the bi-local tangle.
    pub fn concurrence_square_sum(&self) -> f64 {
        self.c_12.powi(2) + self.c_r1r2.powi(2) + self.c_1r2.powi(2) + self.c_2r1.powi(2)
    }
}

/// Assembles all measures for the pair states at time `t`.
pub fn snapshot(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    t: f64,
) -> Result<EntanglementSnapshot> {
    init.validate()?;
    let a1 = amplitude(p1, t)?;
    let a2 = amplitude(p2, t)?;
    snapshot_from_pairs(init, &a1, &a2, t)
}

/// [`snapshot`] for externally supplied amplitudes.
pub fn snapshot_from_pairs(
    init: &InitialState,
    a1: &AmplitudePair,
    a2: &AmplitudePair,
    t: f64,
) -> Result<EntanglementSnapshot> {
    let s = init.s;
    let state = JointState::from_pairs(init, a1, a2);
    let (c_1r2, c_2r1) = cross_concurrences(&state)?;
    let tangle = bilocal_tangle(&reduce(&state, (Subsystem::A1, Subsystem::R1))?);
    let snap = EntanglementSnapshot {
        t,
        c_12: concurrence_qubits(s, a1, a2),
        c_r1r2: concurrence_reservoirs(s, a1, a2),
        c_1r1: concurrence_qubit_own_reservoir(s, a1),
        c_2r2: concurrence_qubit_own_reservoir(s, a2),
        c_1r2,
        c_2r1,
        tangle_bilocal: tangle,
        abs_e1: a1.e_abs(),
        abs_e2: a2.e_abs(),
    };
    debug_assert!(snap.concurrence_square_sum() <= snap.tangle_bilocal + 1e-10);
    Ok(snap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_state::evolve_state;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bell_state_is_maximal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix4::pure([c(h), c(0.0), c(0.0), c(h)]);
        assert!((wootters(&rho).unwrap() - 1.0).abs() < 1e-14);
        // Same state without the stored factor.
        let bare = DensityMatrix4::new(*rho.matrix());
        assert!((wootters(&bare).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_and_mixed_are_zero() {
        let a = [c(0.6), Complex64::new(0.0, 0.8)];
        let b = [c(0.28), c(0.96)];
        let prod = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        assert_eq!(wootters(&DensityMatrix4::pure(prod)).unwrap(), 0.0);
        let mixed = DensityMatrix4::new(Matrix4::identity() * c(0.25));
        assert_eq!(wootters(&mixed).unwrap(), 0.0);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = Matrix4::identity() * c(0.25);
        m[(0, 1)] = c(0.1);
        assert!(matches!(
            wootters(&DensityMatrix4::new(m)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn werner_state_concurrence() {
        // p |Phi+><Phi+| + (1-p) I/4 has C = max(0, (3p - 1)/2).
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix4::pure([c(h), c(0.0), c(0.0), c(h)]);
        for p in [0.2, 1.0 / 3.0, 0.5, 0.9] {
            let m = bell.matrix() * c(p) + Matrix4::identity() * c((1.0 - p) / 4.0);
            let cc = wootters(&DensityMatrix4::new(m)).unwrap();
            assert!((cc - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn initial_concurrence() {
        let a = AmplitudePair::initial();
        assert!((concurrence_qubits(0.2, &a, &a) - 0.96f64.sqrt()).abs() < 1e-15);
        assert!((concurrence_qubits(0.2, &a, &a) - 0.9798).abs() < 1e-4);
        assert_eq!(concurrence_reservoirs(0.2, &a, &a), 0.0);
        assert_eq!(concurrence_qubit_own_reservoir(0.2, &a), 0.0);
        // The sign of s does not matter at t = 0.
        assert_eq!(concurrence_qubits(0.7, &a, &a), concurrence_qubits(-0.7, &a, &a));
    }

    #[test]
    fn own_reservoir_maximum() {
        // x sqrt(1 - x^2) peaks at x^2 = 1/2 with value 1/2.
        let half = AmplitudePair::from_excited(c(std::f64::consts::FRAC_1_SQRT_2));
        assert!((concurrence_qubit_own_reservoir(0.4, &half) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn product_initial_state_has_no_cross_entanglement() {
        let init = InitialState::new(1.0, 0.0).unwrap();
        let p1 = CavityParams::new(1.0, 0.3, 0.2).unwrap();
        let p2 = CavityParams::new(0.7, 1.5, -0.5).unwrap();
        for t in [0.0, 0.5, 2.0, 7.0] {
            let st = evolve_state(&init, &p1, &p2, t).unwrap();
            assert_eq!(cross_concurrences(&st).unwrap(), (0.0, 0.0));
            let rho = reduce(&st, (Subsystem::A1, Subsystem::R1)).unwrap();
            assert!(bilocal_tangle(&rho).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_at_start() {
        let init = InitialState::new(0.2, 0.0).unwrap();
        let p = CavityParams::new(1.0, 0.1, 0.5).unwrap();
        let s = snapshot(&init, &p, &p, 0.0).unwrap();
        assert!((s.c_12 - 0.9798).abs() < 1e-4);
        assert_eq!(
            (s.c_r1r2, s.c_1r1, s.c_2r2, s.c_1r2, s.c_2r1),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert!((s.tangle_bilocal - 0.96).abs() < 1e-12);
    }

    #[test]
    fn tangle_is_constant_in_time() {
        let init = InitialState::new(0.3, 0.4).unwrap();
        let p1 = CavityParams::new(1.0, 0.5, 0.3).unwrap();
        let p2 = CavityParams::new(2.0, 0.2, -1.0).unwrap();
        for i in 0..40 {
            let s = snapshot(&init, &p1, &p2, 0.37 * i as f64).unwrap();
            assert!((s.tangle_bilocal - 0.91).abs() < 1e-12);
        }
    }

    #[test]
    fn markovian_death_time() {
        // Equal Markovian cavities: |F1 F2| = 1 - e^{-gamma t} = sqrt(2/3) at s = 0.2.
        let gamma_t = -(1.0 - (2.0f64 / 3.0).sqrt()).ln();
        let just_before = AmplitudePair::from_excited(c((-0.5 * gamma_t * (1.0 - 1e-6)).exp()));
        let at = AmplitudePair::from_excited(c((-0.5 * gamma_t * (1.0 + 1e-9)).exp()));
        assert!(concurrence_qubits(0.2, &just_before, &just_before) > 0.0);
        assert_eq!(concurrence_qubits(0.2, &at, &at), 0.0);
    }
}
