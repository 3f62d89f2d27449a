//! Entanglement sudden death (ESD), revival and sudden birth (ESB) events.
//!
//! The atom-atom concurrence vanishes exactly when
//! `g(t) = |F1 F2| - sqrt((1-s)/(1+s))` is non-negative, and the
//! reservoir-reservoir concurrence is positive exactly when
//! `|E1 E2| < sqrt((1-s)/(1+s))` (with `F1 F2 != 0`). Both conditions are
//! located by scanning and bisecting.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::amplitudes::{amplitude, CavityParams};
use crate::entanglement::{concurrence_qubits, ZERO_SNAP};
use crate::error::Result;
use crate::quantum_state::InitialState;
use crate::roots::{scan, Crossing, ScanResult};

/// Relative bisection tolerance on event times.
pub const TIME_TOL: f64 = 1e-10;

/// Samples per Rabi period used for the default scan and for extremum detection.
pub const SCAN_POINTS_PER_PERIOD: f64 = 50.0;
pub const SAMPLE_POINTS_PER_PERIOD: f64 = 200.0;

/// Qualitative behaviour of the atom-atom concurrence over a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// At least one death followed by a revival.
    DarkPeriods,
    /// A death with no revival before the horizon.
    EsdTerminal,
    /// No death, but the concurrence has interior local maxima.
    OscillatoryNoEsd,
    /// No death and no local maxima.
    MonotonicDecay,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::DarkPeriods => "DARK_PERIODS",
            Regime::EsdTerminal => "ESD_TERMINAL",
            Regime::OscillatoryNoEsd => "OSCILLATORY_NO_ESD",
            Regime::MonotonicDecay => "MONOTONIC_DECAY",
        };
        f.write_str(s)
    }
}

/// Interval on which the atom-atom concurrence stays at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkInterval {
    pub start: f64,
    pub end: f64,
    /// No revival before the horizon; `end` is the horizon.
    pub open_at_horizon: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub horizon: f64,
    /// `false` when `s <= 0`, in which case no death can happen.
    pub esd_possible: bool,
    pub esd_times: Vec<f64>,
    pub revival_times: Vec<f64>,
    pub dark_intervals: Vec<DarkInterval>,
    pub esb_time: Option<f64>,
    pub regime: Regime,
}

/// Horizon covering ten envelope lifetimes of the slower pair, or four Rabi
/// periods when both cavities are ideal.
pub fn default_horizon(p1: &CavityParams, p2: &CavityParams) -> f64 {
    if p1.lambda == 0.0 && p2.lambda == 0.0 {
        return 4.0 * rabi_period(p1, p2);
    }
    let lifetime = |p: &CavityParams| {
        if p.lambda == 0.0 {
            0.0
        } else {
            1.0 / p.lambda.min(p.gamma().unwrap_or(p.lambda))
        }
    };
    10.0 * lifetime(p1).max(lifetime(p2))
}

/// `2 pi / max(R1, R2)`.
pub fn rabi_period(p1: &CavityParams, p2: &CavityParams) -> f64 {
    2.0 * PI / p1.rabi().max(p2.rabi())
}

fn scan_step(p1: &CavityParams, p2: &CavityParams, requested: Option<f64>) -> f64 {
    let limit = rabi_period(p1, p2) / SCAN_POINTS_PER_PERIOD;
    requested.map_or(limit, |s| s.min(limit))
}

/// `|F1 F2| - threshold`; non-negative exactly when the atoms are disentangled.
fn death_function<'a>(
    init: &'a InitialState,
    p1: &'a CavityParams,
    p2: &'a CavityParams,
) -> impl Fn(f64) -> f64 + 'a {
    let thr = init.threshold();
    move |t| {
        let a1 = amplitude(p1, t).expect("validated");
        let a2 = amplitude(p2, t).expect("validated");
        a1.f_mag * a2.f_mag - thr
    }
}

fn validate(init: &InitialState, p1: &CavityParams, p2: &CavityParams, horizon: f64) -> Result<()> {
    init.validate()?;
    p1.validate()?;
    p2.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(crate::Error::Domain(format!("horizon must be > 0, got {horizon}")));
    }
    Ok(())
}

struct DeathScan {
    deaths: Vec<f64>,
    revivals: Vec<f64>,
}

fn scan_deaths(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
    step: Option<f64>,
) -> DeathScan {
    if init.s <= 0.0 {
        return DeathScan {
            deaths: Vec::new(),
            revivals: Vec::new(),
        };
    }
    let g = death_function(init, p1, p2);
    let ScanResult { crossings, touches } = scan(
        &g,
        horizon,
        scan_step(p1, p2, step),
        TIME_TOL * horizon,
        1e-9,
    );

    let mut deaths = Vec::new();
    let mut revivals = Vec::new();
    for Crossing { t, rising } in crossings {
        if rising {
            deaths.push(t);
        } else {
            revivals.push(t);
        }
    }
    // A tangency is a death plus an immediate revival only if the
    // concurrence itself vanishes there.
    for touch in touches {
        if touch.value < 0.0 {
            let a1 = amplitude(p1, touch.t).expect("validated");
            let a2 = amplitude(p2, touch.t).expect("validated");
            if concurrence_qubits(init.s, &a1, &a2) < ZERO_SNAP {
                deaths.push(touch.t);
                revivals.push(touch.t);
            }
        }
    }
    deaths.sort_by(f64::total_cmp);
    revivals.sort_by(f64::total_cmp);
    DeathScan { deaths, revivals }
}

/// Times at which the atom-atom concurrence drops to zero.
pub fn find_esd_times(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
    scan_step: Option<f64>,
) -> Result<Vec<f64>> {
    validate(init, p1, p2, horizon)?;
    Ok(scan_deaths(init, p1, p2, horizon, scan_step).deaths)
}

/// First time the reservoir-reservoir concurrence becomes positive.
///
/// Returns `Some(0.0)` when the birth threshold exceeds one (`s < 0`), since
/// then the reservoirs entangle immediately, and `None` for `s = +-1` or when
/// no birth happens before the horizon.
pub fn find_esb_time(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
) -> Result<Option<f64>> {
    validate(init, p1, p2, horizon)?;
    if init.s.abs() >= 1.0 {
        return Ok(None);
    }
    let thr = init.threshold();
    if thr >= 1.0 {
        return Ok(Some(0.0));
    }
    let h = move |t: f64| {
        let a1 = amplitude(p1, t).expect("validated");
        let a2 = amplitude(p2, t).expect("validated");
        (a1.e * a2.e).norm() - thr
    };
    let res = scan(
        h,
        horizon,
        scan_step(p1, p2, None),
        TIME_TOL * horizon,
        0.0,
    );
    Ok(res.crossings.iter().find(|c| !c.rising).map(|c| c.t))
}

fn pair_intervals(deaths: &[f64], revivals: &[f64], horizon: f64) -> Vec<DarkInterval> {
    let mut out = Vec::new();
    let mut rev = revivals.iter().peekable();
    for &start in deaths {
        while rev.peek().is_some_and(|&&r| r < start) {
            rev.next();
        }
        match rev.next() {
            Some(&end) => out.push(DarkInterval {
                start,
                end,
                open_at_horizon: false,
            }),
            None => out.push(DarkInterval {
                start,
                end: horizon,
                open_at_horizon: true,
            }),
        }
    }
    out
}

/// Intervals of vanishing atom-atom concurrence.
pub fn dark_periods(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
) -> Result<Vec<DarkInterval>> {
    validate(init, p1, p2, horizon)?;
    let ds = scan_deaths(init, p1, p2, horizon, None);
    Ok(pair_intervals(&ds.deaths, &ds.revivals, horizon))
}

/// Whether the sampled atom-atom concurrence has an interior local maximum.
fn has_local_maximum(init: &InitialState, p1: &CavityParams, p2: &CavityParams, horizon: f64) -> bool {
    let dt = rabi_period(p1, p2) / SAMPLE_POINTS_PER_PERIOD;
    let n = ((horizon / dt).ceil() as usize).max(2);
    let c: Vec<f64> = (0..=n)
        .map(|i| {
            let t = horizon * i as f64 / n as f64;
            let a1 = amplitude(p1, t).expect("validated");
            let a2 = amplitude(p2, t).expect("validated");
            concurrence_qubits(init.s, &a1, &a2)
        })
        .collect();
    c.windows(3)
        .any(|w| w[1] > ZERO_SNAP && w[1] > w[0] + ZERO_SNAP && w[1] >= w[2])
}

fn regime_of(deaths: usize, revivals: usize, local_max: impl FnOnce() -> bool) -> Regime {
    match (deaths, revivals) {
        (0, _) if local_max() => Regime::OscillatoryNoEsd,
        (0, _) => Regime::MonotonicDecay,
        (_, 0) => Regime::EsdTerminal,
        _ => Regime::DarkPeriods,
    }
}

/// Labels the atom-atom entanglement behaviour over `[0, horizon]`.
pub fn classify_regime(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
) -> Result<Regime> {
    validate(init, p1, p2, horizon)?;
    let ds = scan_deaths(init, p1, p2, horizon, None);
    Ok(regime_of(ds.deaths.len(), ds.revivals.len(), || {
        has_local_maximum(init, p1, p2, horizon)
    }))
}

/// Full event analysis over `[0, horizon]`.
pub fn analyze_events(
    init: &InitialState,
    p1: &CavityParams,
    p2: &CavityParams,
    horizon: f64,
    scan_step: Option<f64>,
) -> Result<EventReport> {
    validate(init, p1, p2, horizon)?;
    let ds = scan_deaths(init, p1, p2, horizon, scan_step);
    let dark_intervals = pair_intervals(&ds.deaths, &ds.revivals, horizon);
    let esb_time = find_esb_time(init, p1, p2, horizon)?;
    let regime = regime_of(ds.deaths.len(), ds.revivals.len(), || {
        has_local_maximum(init, p1, p2, horizon)
    });
    Ok(EventReport {
        horizon,
        esd_possible: init.s > 0.0,
        esd_times: ds.deaths,
        revival_times: ds.revivals,
        dark_intervals,
        esb_time,
        regime,
    })
}
