//! Deterministic W-state preparation of (atom 2, cavity 1, cavity 2) and the
//! three measurement-induced Bell states.
//!
//! Cavity 1 is tuned so that atom 1 has emitted almost surely at the
//! interaction time `t_bar` (`F1(t_bar) ~ 1`), while cavity 2 is tuned so that
//! `|E2(t_bar)| = 1/sqrt(2)`. With `s = 1/3` the remaining three-party state
//! is then `(|g2,0,0> + |e2,photon1,0> + |g2,photon1,photon2>)/sqrt(3)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::amplitudes::{amplitude, CavityParams};
use crate::error::{Error, Result};
use crate::quantum_state::{
    basis_index, evolve_state, measure, reduce, InitialState, JointState, Subsystem,
};
use crate::roots::bisect;

/// Default `F1(t_bar)` threshold defining "atom 1 has decayed".
pub const DEFAULT_F_THRESHOLD: f64 = 0.99;

/// `|E2(t_bar)|` target giving equal W weights.
pub const W_TARGET_E: f64 = FRAC_1_SQRT_2;

/// `find_tbar` gives up after this many lifetimes of the slowest decay.
const TBAR_LIFETIMES: f64 = 100.0;

/// Grid size of the coupling scan in `solve_omega2`.
const OMEGA_SCAN_POINTS: usize = 4000;

const REL_TOL: f64 = 1e-10;

/// Smallest time after which `|F1| >= threshold` holds on a sampled window
/// extending to twice that time.
pub fn find_tbar(p1: &CavityParams, threshold: f64) -> Result<f64> {
    p1.validate()?;
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::Domain(format!(
            "threshold must lie in [0, 1), got {threshold}"
        )));
    }
    if threshold == 0.0 {
        return Ok(0.0);
    }
    if p1.lambda == 0.0 {
        return Err(Error::NeverConverges(
            "an ideal cavity reabsorbs the photon; |F1| never settles".into(),
        ));
    }
    // The slowest of the cavity decay and the atomic envelope decay sets the scale.
    let slowest = p1.lambda.min(p1.envelope_rate());
    let horizon = TBAR_LIFETIMES / slowest;
    let osc = p1.w().im.abs();
    let mut step = horizon / 20_000.0;
    if osc > 0.0 {
        step = step.min(4.0 * std::f64::consts::PI / osc / 50.0);
    }
    let f = |t: f64| amplitude(p1, t).expect("validated").f_mag - threshold;

    let n = (horizon / step).ceil() as usize;
    let sample = |i: usize| horizon * i as f64 / n as f64;
    let mut i = 0;
    while i < n {
        if f(sample(i)) < 0.0 && f(sample(i + 1)) >= 0.0 {
            let t = bisect(f, sample(i), sample(i + 1), 0.0);
            let t = refine_rel(f, sample(i), sample(i + 1), t);
            // Envelope check on the samples in (t, 2t].
            let end = ((2.0 * t / horizon) * n as f64).ceil() as usize;
            let violation = (i + 1..=end.min(n)).find(|&j| f(sample(j)) < 0.0);
            match violation {
                None if 2.0 * t <= horizon => return Ok(t),
                None => break,
                Some(j) => {
                    i = j;
                    continue;
                }
            }
        }
        i += 1;
    }
    Err(Error::Horizon(format!(
        "|F1| does not stay above {threshold} within {horizon}"
    )))
}

/// Bisection to `REL_TOL` relative to the root.
fn refine_rel(f: impl Fn(f64) -> f64, lo: f64, hi: f64, guess: f64) -> f64 {
    bisect(f, lo, hi, REL_TOL * guess.abs().max(f64::MIN_POSITIVE))
}

/// Smallest coupling `Omega2` with `|E2(t_bar)| = target_e`.
///
/// The bracket is `(0, 10 lambda2]`, or `(0, 10 / t_bar]` for an ideal cavity.
pub fn solve_omega2(lambda2: f64, delta2: f64, t_bar: f64, target_e: f64) -> Result<f64> {
    if !(target_e > 0.0 && target_e < 1.0) {
        return Err(Error::Domain(format!(
            "target |E2| must lie in (0, 1), got {target_e}"
        )));
    }
    if !(t_bar.is_finite() && t_bar >= 0.0) {
        return Err(Error::Domain(format!("t_bar must be >= 0, got {t_bar}")));
    }
    if !(lambda2.is_finite() && lambda2 >= 0.0 && delta2.is_finite()) {
        return Err(Error::Domain(format!(
            "invalid cavity 2 parameters lambda2={lambda2}, delta2={delta2}"
        )));
    }
    let upper = if lambda2 > 0.0 {
        10.0 * lambda2
    } else if t_bar > 0.0 {
        10.0 / t_bar
    } else {
        return Err(Error::Solver("t_bar = 0 and lambda2 = 0 leave no bracket".into()));
    };
    let h = |omega: f64| {
        let p = CavityParams {
            omega,
            lambda: lambda2,
            delta: delta2,
        };
        amplitude(&p, t_bar).expect("validated").e_abs() - target_e
    };
    let sample = |i: usize| upper * i as f64 / OMEGA_SCAN_POINTS as f64;
    // h -> 1 - target > 0 as Omega2 -> 0.
    let mut prev = 1.0 - target_e;
    for i in 1..=OMEGA_SCAN_POINTS {
        let cur = h(sample(i));
        if (prev >= 0.0) != (cur >= 0.0) {
            let lo = if i == 1 { f64::MIN_POSITIVE } else { sample(i - 1) };
            let guess = bisect(h, lo, sample(i), 0.0);
            return Ok(refine_rel(h, lo, sample(i), guess));
        }
        prev = cur;
    }
    Err(Error::Solver(format!(
        "|E2(t_bar)| never reaches {target_e} for Omega2 in (0, {upper}]"
    )))
}

/// W-state overlap figures for a model state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WFidelity {
    /// Probability of finding atom 1 in its ground state.
    pub atom1_ground_probability: f64,
    /// `|<W|psi'>|^2` for the state conditioned on `|g1>`.
    pub fidelity: f64,
    /// `|<g1, W|psi>|^2` on the unconditioned state.
    pub joint_fidelity: f64,
    /// Conditional fidelity maximized over the relative phase between the
    /// ground and decayed branches.
    pub phase_corrected: f64,
    /// Atom 1 is more likely excited than not.
    pub precondition_warning: bool,
}

const W_GROUND: usize = basis_index(0, 0, 0, 0);
const W_PHOTON1: usize = basis_index(0, 1, 1, 0);
const W_BOTH: usize = basis_index(0, 1, 0, 1);

/// Overlap of the (A2, R1, R2) state, after projecting atom 1 on `|g1>`,
/// with the equal-phase W state.
pub fn w_fidelity(state: &JointState) -> Result<WFidelity> {
    let (post, p_ground) = measure(state, Subsystem::A1, 0)?;
    let a = post.amplitude(W_GROUND);
    let b = post.amplitude(W_PHOTON1);
    let c = post.amplitude(W_BOTH);
    let fidelity = (a + b + c).norm_sqr() / 3.0;
    let phase_corrected = (a.norm() + (b + c).norm()).powi(2) / 3.0;
    Ok(WFidelity {
        atom1_ground_probability: p_ground,
        fidelity,
        joint_fidelity: fidelity * p_ground,
        phase_corrected,
        precondition_warning: p_ground < 0.5,
    })
}

/// The three projective measurements that turn the W state into Bell pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellMeasurement {
    /// Atom 2 found in `|g2>`: the cavities share `(|0,0> + |photon1,photon2>)/sqrt2`.
    Atom2Ground,
    /// A photon found in cavity 1: atom 2 and cavity 2 share `(|e2,0> + |g2,photon2>)/sqrt2`.
    Cavity1Photon,
    /// Cavity 2 found empty: atom 2 and cavity 1 share `(|g2,0> + |e2,photon1>)/sqrt2`.
    Cavity2Vacuum,
}

impl BellMeasurement {
    pub const ALL: [BellMeasurement; 3] = [
        BellMeasurement::Atom2Ground,
        BellMeasurement::Cavity1Photon,
        BellMeasurement::Cavity2Vacuum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellMeasurement::Atom2Ground => "atom2_ground",
            BellMeasurement::Cavity1Photon => "cavity1_photon",
            BellMeasurement::Cavity2Vacuum => "cavity2_vacuum",
        }
    }

    /// Measured subsystem and the post-selected outcome.
    pub fn projection(self) -> (Subsystem, u8) {
        match self {
            BellMeasurement::Atom2Ground => (Subsystem::A2, 0),
            BellMeasurement::Cavity1Photon => (Subsystem::R1, 1),
            BellMeasurement::Cavity2Vacuum => (Subsystem::R2, 0),
        }
    }

    /// Pair carrying the Bell state and the target in that pair's (00, 01, 10, 11) basis.
    pub fn target(self) -> ((Subsystem, Subsystem), [Complex64; 4]) {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellMeasurement::Atom2Ground => ((Subsystem::R1, Subsystem::R2), [h, z, z, h]),
            BellMeasurement::Cavity1Photon => ((Subsystem::A2, Subsystem::R2), [z, h, h, z]),
            BellMeasurement::Cavity2Vacuum => ((Subsystem::A2, Subsystem::R1), [h, z, z, h]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellOutcome {
    pub measurement: BellMeasurement,
    pub probability: f64,
    pub post_state: JointState,
    pub fidelity: f64,
}

/// Applies one of the Bell-extraction measurements to `state`.
pub fn bell_from_state(state: &JointState, which: BellMeasurement) -> Result<BellOutcome> {
    let (sub, outcome) = which.projection();
    let (post, probability) = measure(state, sub, outcome)?;
    let (pair, target) = which.target();
    let fidelity = reduce(&post, pair)?.expectation(&target);
    Ok(BellOutcome {
        measurement: which,
        probability,
        post_state: post,
        fidelity,
    })
}

/// How the interaction time is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbarRule {
    /// Envelope criterion on `|F1|` (see [`find_tbar`]).
    Threshold(f64),
    /// A fixed interaction time.
    Fixed(f64),
}

/// Which atom-cavity pair is driven to full emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Atom 1 emits; the W state lives on (atom 2, cavity 1, cavity 2).
    Direct,
    /// Atom 2 emits; the W state lives on (atom 1, cavity 2, cavity 1).
    Swapped,
}

impl Layout {
    pub fn toggled(self) -> Self {
        match self {
            Layout::Direct => Layout::Swapped,
            Layout::Swapped => Layout::Direct,
        }
    }
}

/// Inputs of the design pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignInputs {
    pub init: InitialState,
    /// Cavity of the atom that must emit.
    pub emitter: CavityParams,
    /// Linewidth and detuning of the other cavity; its coupling is solved for.
    pub partner_lambda: f64,
    pub partner_delta: f64,
    pub tbar_rule: TbarRule,
    pub target_e: f64,
    pub layout: Layout,
}

impl DesignInputs {
    /// The reference design point: `s = 1/3`, `phi = 0`, both cavities
    /// with linewidth `lambda`, `Omega1 = lambda`, `lambda t_bar = 3`.
    pub fn reference(lambda: f64) -> Result<Self> {
        Ok(Self {
            init: InitialState::new(1.0 / 3.0, 0.0)?,
            emitter: CavityParams::resonant(lambda, lambda)?,
            partner_lambda: lambda,
            partner_delta: 0.0,
            tbar_rule: TbarRule::Fixed(3.0 / lambda),
            target_e: W_TARGET_E,
            layout: Layout::Direct,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            layout: self.layout.toggled(),
            ..*self
        }
    }

    /// Cavity parameters in laboratory order (cavity 1, cavity 2) for a solved coupling.
    pub fn lab_cavities(&self, partner_omega: f64) -> (CavityParams, CavityParams) {
        let partner = CavityParams {
            omega: partner_omega,
            lambda: self.partner_lambda,
            delta: self.partner_delta,
        };
        match self.layout {
            Layout::Direct => (self.emitter, partner),
            Layout::Swapped => (partner, self.emitter),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellRecord {
    pub measurement: BellMeasurement,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDesign {
    pub inputs: DesignInputs,
    pub t_bar: f64,
    /// Solved coupling of the partner cavity.
    pub omega2: f64,
    /// `|F|` of the emitting atom at `t_bar`.
    pub f1_at_tbar: f64,
    /// `E` of the partner atom at `t_bar`.
    pub e2_at_tbar: Complex64,
    pub w: WFidelity,
    pub bell_outcomes: Vec<BellRecord>,
    /// Set when `phi != 0`; the fidelities refer to the equal-phase targets.
    pub phase_warning: bool,
}

impl ProtocolDesign {
    pub fn w_fidelity(&self) -> f64 {
        self.w.fidelity
    }

    pub fn bell(&self, which: BellMeasurement) -> Option<&BellRecord> {
        self.bell_outcomes.iter().find(|b| b.measurement == which)
    }
}

/// Joint state at `t` relabelled so that the emitting pair is pair 1.
fn canonical_state(inputs: &DesignInputs, partner_omega: f64, t: f64) -> Result<JointState> {
    let (p1, p2) = inputs.lab_cavities(partner_omega);
    let lab = evolve_state(&inputs.init, &p1, &p2, t)?;
    Ok(match inputs.layout {
        Layout::Direct => lab,
        Layout::Swapped => lab.swap_pairs(),
    })
}

/// Runs the full pipeline: interaction time, partner coupling, W fidelity
/// and the three Bell extractions.
pub fn design(inputs: &DesignInputs) -> Result<ProtocolDesign> {
    inputs.init.validate()?;
    inputs.emitter.validate()?;
    let t_bar = match inputs.tbar_rule {
        TbarRule::Threshold(th) => find_tbar(&inputs.emitter, th)?,
        TbarRule::Fixed(t) if t.is_finite() && t >= 0.0 => t,
        TbarRule::Fixed(t) => return Err(Error::Domain(format!("t_bar must be >= 0, got {t}"))),
    };
    let omega2 = solve_omega2(inputs.partner_lambda, inputs.partner_delta, t_bar, inputs.target_e)?;
    let state = canonical_state(inputs, omega2, t_bar)?;
    let emitter = amplitude(&inputs.emitter, t_bar)?;
    let partner = amplitude(
        &CavityParams {
            omega: omega2,
            lambda: inputs.partner_lambda,
            delta: inputs.partner_delta,
        },
        t_bar,
    )?;
    let w = w_fidelity(&state)?;
    let bell_outcomes = BellMeasurement::ALL
        .iter()
        .map(|&m| {
            bell_from_state(&state, m).map(|o| BellRecord {
                measurement: m,
                probability: o.probability,
                fidelity: o.fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolDesign {
        inputs: *inputs,
        t_bar,
        omega2,
        f1_at_tbar: emitter.f_mag,
        e2_at_tbar: partner.e,
        w,
        bell_outcomes,
        phase_warning: inputs.init.phi.rem_euclid(2.0 * std::f64::consts::PI) != 0.0,
    })
}

/// The same pipeline with the roles of the two atom-cavity pairs exchanged.
pub fn swapped_design(inputs: &DesignInputs) -> Result<ProtocolDesign> {
    design(&inputs.swapped())
}

/// Re-evaluates one Bell extraction for a finished design, in laboratory labels.
///
/// `p1` and `p2` are the laboratory cavities; for a swapped design the
/// measurement is applied to the partner subsystems.
pub fn run_bell_extraction(
    design: &ProtocolDesign,
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    which: BellMeasurement,
) -> Result<BellOutcome> {
    let lab = evolve_state(init, p1, p2, design.t_bar)?;
    let state = match design.inputs.layout {
        Layout::Direct => lab,
        Layout::Swapped => lab.swap_pairs(),
    };
    bell_from_state(&state, which)
}
