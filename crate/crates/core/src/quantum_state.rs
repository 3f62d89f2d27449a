//! Joint state of (atom 1, reservoir 1, atom 2, reservoir 2) as four effective qubits.
//!
//! Basis index bits are `a1 r1 a2 r2` with `a1` most significant. An atom bit
//! is 0 for ground and 1 for excited; a reservoir bit is 0 for the vacuum and
//! 1 for the single emitted photon.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::amplitudes::{amplitude, AmplitudePair, CavityParams};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Amplitudes below this magnitude outside the model subspace are tolerated.
const STRUCTURE_TOL: f64 = 1e-10;

/// Outcomes less likely than this cannot be post-selected.
const MIN_PROBABILITY: f64 = 1e-12;

/// One of the four effective qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A1,
    R1,
    A2,
    R2,
}

impl Subsystem {
    pub const ALL: [Subsystem; 4] = [Subsystem::A1, Subsystem::R1, Subsystem::A2, Subsystem::R2];

    /// Bit position inside a basis index (0 = least significant).
    pub fn shift(self) -> usize {
        match self {
            Subsystem::A1 => 3,
            Subsystem::R1 => 2,
            Subsystem::A2 => 1,
            Subsystem::R2 => 0,
        }
    }

    /// The corresponding subsystem of the other atom-cavity pair.
    pub fn partner(self) -> Subsystem {
        match self {
            Subsystem::A1 => Subsystem::A2,
            Subsystem::R1 => Subsystem::R2,
            Subsystem::A2 => Subsystem::A1,
            Subsystem::R2 => Subsystem::R1,
        }
    }

    fn bit(self, index: usize) -> usize {
        (index >> self.shift()) & 1
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subsystem::A1 => "A1",
            Subsystem::R1 => "R1",
            Subsystem::A2 => "A2",
            Subsystem::R2 => "R2",
        };
        f.write_str(s)
    }
}

/// Initial two-atom state `sqrt((1-s)/2)|gg> + e^{i phi} sqrt((1+s)/2)|ee>`
/// with both cavities empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub s: f64,
    pub phi: f64,
}

impl InitialState {
    pub fn new(s: f64, phi: f64) -> Result<Self> {
        let init = Self { s, phi };
        init.validate()?;
        Ok(init)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && (-1.0..=1.0).contains(&self.s)) {
            return Err(Error::Domain(format!("s must lie in [-1, 1], got {}", self.s)));
        }
        if !self.phi.is_finite() {
            return Err(Error::Domain(format!("phi must be finite, got {}", self.phi)));
        }
        Ok(())
    }

    /// Initial atom-atom tangle `1 - s^2`.
    pub fn initial_tangle(&self) -> f64 {
        1.0 - self.s * self.s
    }

    /// Weight of the stable `|gg>` component.
    pub fn ground_weight(&self) -> f64 {
        (0.5 * (1.0 - self.s)).max(0.0).sqrt()
    }

    /// `e^{i phi} sqrt((1+s)/2)`, the coefficient of the decaying branch.
    pub fn excited_coefficient(&self) -> Complex64 {
        Complex64::from_polar((0.5 * (1.0 + self.s)).max(0.0).sqrt(), self.phi)
    }

    /// `sqrt((1-s)/(1+s))`, the common threshold of the death and birth conditions.
    pub fn threshold(&self) -> f64 {
        ((1.0 - self.s) / (1.0 + self.s)).sqrt()
    }
}

/// Named view of the five basis components a model state can populate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveComponents {
    /// `|g1 g2, 0, 0>`
    pub ground: Complex64,
    /// `|e1 e2, 0, 0>`
    pub both_excited: Complex64,
    /// `|e1 g2, 0, photon2>`
    pub photon2: Complex64,
    /// `|g1 e2, photon1, 0>`
    pub photon1: Complex64,
    /// `|g1 g2, photon1, photon2>`
    pub both_photons: Complex64,
}

impl FiveComponents {
    pub fn as_array(&self) -> [Complex64; 5] {
        [
            self.ground,
            self.both_excited,
            self.photon2,
            self.photon1,
            self.both_photons,
        ]
    }
}

/// Pure state of the four effective qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    amps: [Complex64; 16],
}

/// Composes a basis index from `(a1, r1, a2, r2)` bits.
pub const fn basis_index(a1: usize, r1: usize, a2: usize, r2: usize) -> usize {
    (a1 << 3) | (r1 << 2) | (a2 << 1) | r2
}

/// Indices of the five model components, in [`FiveComponents`] order.
pub const MODEL_INDICES: [usize; 5] = [
    basis_index(0, 0, 0, 0),
    basis_index(1, 0, 1, 0),
    basis_index(1, 0, 0, 1),
    basis_index(0, 1, 1, 0),
    basis_index(0, 1, 0, 1),
];

impl JointState {
    pub fn from_amplitudes(amps: [Complex64; 16]) -> Self {
        Self { amps }
    }

    /// Builds the model state from the initial condition and the two pairs'
    /// amplitudes at a common time.
    pub fn from_pairs(init: &InitialState, pair1: &AmplitudePair, pair2: &AmplitudePair) -> Self {
        let c = init.excited_coefficient();
        let (e1, f1) = (pair1.e, Complex64::new(pair1.f_mag, 0.0));
        let (e2, f2) = (pair2.e, Complex64::new(pair2.f_mag, 0.0));
        let mut amps = [ZERO; 16];
        amps[MODEL_INDICES[0]] = Complex64::new(init.ground_weight(), 0.0);
        amps[MODEL_INDICES[1]] = c * e1 * e2;
        amps[MODEL_INDICES[2]] = c * e1 * f2;
        amps[MODEL_INDICES[3]] = c * f1 * e2;
        amps[MODEL_INDICES[4]] = c * f1 * f2;
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; 16] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies every component with `sub` in state 1 by `e^{i chi}`.
    pub fn with_local_phase(&self, sub: Subsystem, chi: f64) -> Self {
        let phase = Complex64::from_polar(1.0, chi);
        let mut amps = self.amps;
        for (i, a) in amps.iter_mut().enumerate() {
            if sub.bit(i) == 1 {
                *a *= phase;
            }
        }
        Self { amps }
    }

    /// Exchanges the roles of the two atom-cavity pairs.
    pub fn swap_pairs(&self) -> Self {
        let mut amps = [ZERO; 16];
        for (i, a) in self.amps.iter().enumerate() {
            let (hi, lo) = (i >> 2, i & 0b11);
            amps[(lo << 2) | hi] = *a;
        }
        Self { amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &JointState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// One line per basis index, `bits re im`, indices ascending.
    pub fn dump(&self, format_number: impl Fn(f64) -> String) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            out.push_str(&format!(
                "{i:04b} {} {}\n",
                format_number(a.re),
                format_number(a.im)
            ));
        }
        out
    }
}

/// Joint state at time `t` for two independent atom-cavity pairs.
pub fn evolve_state(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    t: f64,
) -> Result<JointState> {
    init.validate()?;
    let a1 = amplitude(p1, t)?;
    let a2 = amplitude(p2, t)?;
    Ok(JointState::from_pairs(init, &a1, &a2))
}

/// Coefficients of the five model components, checking nothing else is populated.
pub fn five_component_view(state: &JointState) -> Result<FiveComponents> {
    for (i, a) in state.amps.iter().enumerate() {
        if !MODEL_INDICES.contains(&i) && a.norm() > STRUCTURE_TOL {
            return Err(Error::Structure {
                index: i,
                magnitude: a.norm(),
            });
        }
    }
    let c = |k: usize| state.amps[MODEL_INDICES[k]];
    Ok(FiveComponents {
        ground: c(0),
        both_excited: c(1),
        photon2: c(2),
        photon1: c(3),
        both_photons: c(4),
    })
}

/// Two-qubit density matrix, optionally carrying a factor `psi` with `rho = psi psi^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    rho: Matrix4<Complex64>,
    factor: Option<Matrix4<Complex64>>,
}

impl DensityMatrix4 {
    pub fn new(rho: Matrix4<Complex64>) -> Self {
        Self { rho, factor: None }
    }

    /// `rho = psi psi^dagger`, keeping `psi` for rank-exact downstream use.
    pub fn from_factor(psi: Matrix4<Complex64>) -> Self {
        Self {
            rho: psi * psi.adjoint(),
            factor: Some(psi),
        }
    }

    /// Projector onto a pure two-qubit state given in (00, 01, 10, 11) order.
    pub fn pure(v: [Complex64; 4]) -> Self {
        let mut psi = Matrix4::zeros();
        for (i, a) in v.iter().enumerate() {
            psi[(i, 0)] = *a;
        }
        Self::from_factor(psi)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn factor(&self) -> Option<&Matrix4<Complex64>> {
        self.factor.as_ref()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.rho
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut v = [0.0; 4];
        for (i, x) in eig.eigenvalues.iter().enumerate() {
            v[i] = *x;
        }
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// `<v| rho |v>` for a two-qubit vector in (00, 01, 10, 11) order.
    pub fn expectation(&self, v: &[Complex64; 4]) -> f64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i].conj() * self.rho[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

/// Reduced state of the ordered pair `keep`, tracing out the other two qubits.
///
/// Rows and columns run over (00, 01, 10, 11) with the first kept subsystem
/// as the high bit.
pub fn reduce(state: &JointState, keep: (Subsystem, Subsystem)) -> Result<DensityMatrix4> {
    let (hi, lo) = keep;
    if hi == lo {
        return Err(Error::Domain(format!(
            "reduction needs two distinct subsystems, got ({hi}, {hi})"
        )));
    }
    let mut traced = Subsystem::ALL.iter().copied().filter(|s| *s != hi && *s != lo);
    let (t_hi, t_lo) = (traced.next().unwrap(), traced.next().unwrap());

    // psi[(kept, traced)] so that rho = psi psi^dagger.
    let mut psi = Matrix4::zeros();
    for (i, a) in state.amps.iter().enumerate() {
        let row = (hi.bit(i) << 1) | lo.bit(i);
        let col = (t_hi.bit(i) << 1) | t_lo.bit(i);
        psi[(row, col)] = *a;
    }
    Ok(DensityMatrix4::from_factor(psi))
}

/// Projects `sub` onto `outcome` and renormalizes; returns the post-measurement
/// state and the Born probability.
pub fn measure(state: &JointState, sub: Subsystem, outcome: u8) -> Result<(JointState, f64)> {
    if outcome > 1 {
        return Err(Error::Domain(format!("outcome must be 0 or 1, got {outcome}")));
    }
    let mut amps = [ZERO; 16];
    let mut kept = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        if sub.bit(i) == outcome as usize {
            amps[i] = *a;
            kept += a.norm_sqr();
        }
    }
    let prob = kept / state.norm_sqr();
    if prob <= MIN_PROBABILITY {
        return Err(Error::MeasurementImpossible { probability: prob });
    }
    let scale = 1.0 / kept.sqrt();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    Ok((JointState { amps }, prob))
}
