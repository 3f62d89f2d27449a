use cavent::amplitudes::{amplitude, jc_amplitude, markovian_amplitude, CavityParams};
use cavent::entanglement::{
    concurrence_qubit_own_reservoir, concurrence_qubits, concurrence_reservoirs, snapshot, wootters,
};
use cavent::events::{analyze_events, default_horizon, EventReport};
use cavent::oracle::{discretized_modes_solve, memory_kernel_solve, ModeDiscretization, TimeGrid};
use cavent::protocol::{design, BellMeasurement, DesignInputs, Layout, ProtocolDesign, TbarRule};
use cavent::quantum_state::{evolve_state, reduce, InitialState, JointState, Subsystem};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig, SweepTarget};
use crate::error::CliError;
use crate::output::{fmt_num, num, nums, opt_num, records_to_csv, records_to_json, Record};

pub const DYNAMICS_HEADER: &str = "t,c12,cr1r2,c1r1,c2r2,c1r2,c2r1,tangle,abs_e1,abs_e2";

/// Rendered result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub body: String,
    /// Joint-state dump requested with `--dump-state`.
    pub state_dump: Option<String>,
    /// Set when the command ran but a check failed (validate only).
    pub failure: Option<String>,
}

impl CommandOutput {
    fn ok(body: String) -> Self {
        Self {
            body,
            state_dump: None,
            failure: None,
        }
    }
}

struct Physical {
    init: InitialState,
    p1: CavityParams,
    p2: CavityParams,
}

fn physical(cfg: &RunConfig) -> Result<Physical, CliError> {
    Ok(Physical {
        init: cfg.initial_state()?,
        p1: cfg.cavity1.params()?,
        p2: cfg.cavity2.params()?,
    })
}

fn abs_time(cfg: &RunConfig, t: f64) -> f64 {
    t / cfg.reference_rate
}

fn header(cfg: &RunConfig, command: &str) -> Record {
    let mut r = Record::new();
    r.push("command", command)
        .push("unit", cfg.unit.name())
        .push("reference_rate", num(cfg.reference_rate));
    r
}

fn dump(state: &JointState) -> String {
    state.dump(fmt_num)
}

#[derive(Serialize)]
struct DynamicsDoc {
    #[serde(flatten)]
    header: Record,
    rows: Vec<Record>,
}

pub fn run_dynamics(cfg: &RunConfig, format: Format, dump_state: bool) -> Result<CommandOutput, CliError> {
    let ph = physical(cfg)?;
    let grid = TimeGrid::new(cfg.grid.t_max, cfg.grid.n_steps)?;
    let snaps = grid
        .times()
        .map(|t| snapshot(&ph.init, &ph.p1, &ph.p2, t))
        .collect::<Result<Vec<_>, _>>()?;
    let body = match format {
        Format::Csv => {
            let mut out = String::from(DYNAMICS_HEADER);
            out.push('\n');
            for s in &snaps {
                let row = [
                    s.t, s.c_12, s.c_r1r2, s.c_1r1, s.c_2r2, s.c_1r2, s.c_2r1, s.tangle_bilocal,
                    s.abs_e1, s.abs_e2,
                ];
                out.push_str(&row.map(fmt_num).join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows = snaps
                .iter()
                .map(|s| {
                    let mut r = Record::new();
                    r.push("t", num(s.t))
                        .push("t_abs", num(abs_time(cfg, s.t)))
                        .push("c12", num(s.c_12))
                        .push("cr1r2", num(s.c_r1r2))
                        .push("c1r1", num(s.c_1r1))
                        .push("c2r2", num(s.c_2r2))
                        .push("c1r2", num(s.c_1r2))
                        .push("c2r1", num(s.c_2r1))
                        .push("tangle", num(s.tangle_bilocal))
                        .push("abs_e1", num(s.abs_e1))
                        .push("abs_e2", num(s.abs_e2));
                    r
                })
                .collect();
            let doc = DynamicsDoc {
                header: header(cfg, "dynamics"),
                rows,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
    };
    let mut out = CommandOutput::ok(body);
    if dump_state {
        let t = grid.time(grid.n_steps - 1);
        out.state_dump = Some(dump(&evolve_state(&ph.init, &ph.p1, &ph.p2, t)?));
    }
    Ok(out)
}

fn event_report(cfg: &RunConfig) -> Result<EventReport, CliError> {
    let ph = physical(cfg)?;
    let horizon = cfg
        .events
        .horizon
        .unwrap_or_else(|| default_horizon(&ph.p1, &ph.p2));
    Ok(analyze_events(&ph.init, &ph.p1, &ph.p2, horizon, cfg.events.scan_step)?)
}

fn events_record(cfg: &RunConfig, rep: &EventReport) -> Record {
    let abs = |ts: &[f64]| nums(ts.iter().map(|&t| abs_time(cfg, t)));
    let starts: Vec<f64> = rep.dark_intervals.iter().map(|d| d.start).collect();
    let ends: Vec<f64> = rep.dark_intervals.iter().map(|d| d.end).collect();
    let mut r = header(cfg, "events");
    r.push("s", num(cfg.initial.s))
        .push("threshold", num(((1.0 - cfg.initial.s) / (1.0 + cfg.initial.s)).sqrt()))
        .push("gamma1", opt_num(cfg.cavity1.params().ok().and_then(|p| p.gamma())))
        .push("gamma2", opt_num(cfg.cavity2.params().ok().and_then(|p| p.gamma())))
        .push("horizon", num(rep.horizon))
        .push("horizon_abs", num(abs_time(cfg, rep.horizon)))
        .push("esd_possible", rep.esd_possible)
        .push("esd_times", nums(rep.esd_times.iter().copied()))
        .push("esd_times_abs", abs(&rep.esd_times))
        .push("revival_times", nums(rep.revival_times.iter().copied()))
        .push("revival_times_abs", abs(&rep.revival_times))
        .push("dark_interval_starts", nums(starts.iter().copied()))
        .push("dark_interval_ends", nums(ends.iter().copied()))
        .push(
            "dark_interval_open_at_horizon",
            rep.dark_intervals.last().is_some_and(|d| d.open_at_horizon),
        )
        .push("esb_time", opt_num(rep.esb_time))
        .push("esb_time_abs", opt_num(rep.esb_time.map(|t| abs_time(cfg, t))))
        .push("regime", rep.regime.to_string());
    r
}

fn render_record(r: &Record, format: Format) -> String {
    match format {
        Format::Json => r.to_json(),
        Format::Csv => r.to_csv(),
    }
}

pub fn run_events(cfg: &RunConfig, format: Format) -> Result<CommandOutput, CliError> {
    let rep = event_report(cfg)?;
    Ok(CommandOutput::ok(render_record(&events_record(cfg, &rep), format)))
}

fn design_inputs(cfg: &RunConfig) -> Result<DesignInputs, CliError> {
    let ph = physical(cfg)?;
    let pc = &cfg.protocol;
    let (emitter, partner, layout) = if pc.swapped {
        (ph.p2, ph.p1, Layout::Swapped)
    } else {
        (ph.p1, ph.p2, Layout::Direct)
    };
    Ok(DesignInputs {
        init: ph.init,
        emitter,
        partner_lambda: partner.lambda,
        partner_delta: partner.delta,
        tbar_rule: match pc.t_bar {
            Some(t) => TbarRule::Fixed(t),
            None => TbarRule::Threshold(pc.f_threshold),
        },
        target_e: pc.target_e,
        layout,
    })
}

fn protocol_record(cfg: &RunConfig, d: &ProtocolDesign) -> Record {
    let i = &d.inputs;
    let mut r = header(cfg, "protocol");
    r.push("s", num(i.init.s)).push("phi", num(i.init.phi));
    match i.tbar_rule {
        TbarRule::Threshold(th) => {
            r.push("tbar_rule", "threshold").push("f_threshold", num(th));
        }
        TbarRule::Fixed(_) => {
            r.push("tbar_rule", "fixed").push("f_threshold", Value::Null);
        }
    }
    r.push("target_e", num(i.target_e))
        .push("layout", if i.layout == Layout::Direct { "direct" } else { "swapped" })
        .push("emitter_omega", num(i.emitter.omega))
        .push("emitter_lambda", num(i.emitter.lambda))
        .push("emitter_delta", num(i.emitter.delta))
        .push("partner_lambda", num(i.partner_lambda))
        .push("partner_delta", num(i.partner_delta))
        .push("t_bar", num(d.t_bar))
        .push("t_bar_abs", num(abs_time(cfg, d.t_bar)))
        .push("omega2", num(d.omega2))
        .push("omega2_abs", num(d.omega2 * cfg.reference_rate))
        .push("f1_at_tbar", num(d.f1_at_tbar))
        .push("e2_at_tbar_re", num(d.e2_at_tbar.re))
        .push("e2_at_tbar_im", num(d.e2_at_tbar.im))
        .push("e2_at_tbar_abs", num(d.e2_at_tbar.norm()))
        .push("w_fidelity", num(d.w.fidelity))
        .push("w_fidelity_joint", num(d.w.joint_fidelity))
        .push("w_fidelity_phase_corrected", num(d.w.phase_corrected))
        .push("atom1_ground_probability", num(d.w.atom1_ground_probability))
        .push("precondition_warning", d.w.precondition_warning)
        .push("phase_warning", d.phase_warning);
    for m in BellMeasurement::ALL {
        let b = d.bell(m).expect("all measurements evaluated");
        r.push(format!("{}_probability", m.name()), num(b.probability))
            .push(format!("{}_fidelity", m.name()), num(b.fidelity));
    }
    r
}

pub fn run_protocol(cfg: &RunConfig, format: Format, dump_state: bool) -> Result<CommandOutput, CliError> {
    let inputs = design_inputs(cfg)?;
    let d = design(&inputs)?;
    let mut out = CommandOutput::ok(render_record(&protocol_record(cfg, &d), format));
    if dump_state {
        let (p1, p2) = inputs.lab_cavities(d.omega2);
        out.state_dump = Some(dump(&evolve_state(&inputs.init, &p1, &p2, d.t_bar)?));
    }
    Ok(out)
}

fn sweep_point(cfg: &RunConfig, target: SweepTarget) -> Result<Vec<(String, Value)>, CliError> {
    cfg.validate()?;
    Ok(match target {
        SweepTarget::Events => {
            let rep = event_report(cfg)?;
            vec![
                ("regime".into(), rep.regime.to_string().into()),
                ("esd_count".into(), rep.esd_times.len().into()),
                ("revival_count".into(), rep.revival_times.len().into()),
                ("first_esd".into(), opt_num(rep.esd_times.first().copied())),
                ("esb_time".into(), opt_num(rep.esb_time)),
                ("horizon".into(), num(rep.horizon)),
            ]
        }
        SweepTarget::Protocol => {
            let d = design(&design_inputs(cfg)?)?;
            let mut v: Vec<(String, Value)> = vec![
                ("t_bar".into(), num(d.t_bar)),
                ("omega2".into(), num(d.omega2)),
                ("f1_at_tbar".into(), num(d.f1_at_tbar)),
                ("w_fidelity".into(), num(d.w.fidelity)),
                ("w_fidelity_joint".into(), num(d.w.joint_fidelity)),
            ];
            for b in &d.bell_outcomes {
                v.push((format!("{}_probability", b.measurement.name()), num(b.probability)));
                v.push((format!("{}_fidelity", b.measurement.name()), num(b.fidelity)));
            }
            v
        }
    })
}

fn metric_names(target: SweepTarget) -> Vec<String> {
    match target {
        SweepTarget::Events => ["regime", "esd_count", "revival_count", "first_esd", "esb_time", "horizon"]
            .map(String::from)
            .to_vec(),
        SweepTarget::Protocol => {
            let mut v: Vec<String> = ["t_bar", "omega2", "f1_at_tbar", "w_fidelity", "w_fidelity_joint"]
                .map(String::from)
                .to_vec();
            for m in BellMeasurement::ALL {
                v.push(format!("{}_probability", m.name()));
                v.push(format!("{}_fidelity", m.name()));
            }
            v
        }
    }
}

/// Cartesian product of the axes, last axis fastest.
fn sweep_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, values| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

pub fn run_sweep(cfg: &RunConfig, format: Format, jobs: usize) -> Result<CommandOutput, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: section required for the sweep command".into()))?;
    let names: Vec<&str> = sweep.axes.iter().map(|a| a.param.as_str()).collect();
    let points = sweep_points(&sweep.axes.iter().map(|a| a.values()).collect::<Vec<_>>());
    let metrics = metric_names(sweep.target);

    let evaluate = |(index, point): (usize, &Vec<f64>)| {
        let mut local = cfg.clone();
        local.sweep = None;
        for (name, &v) in names.iter().zip(point) {
            local.set_param(name, v);
        }
        let mut r = Record::new();
        r.push("index", index);
        for (name, &v) in names.iter().zip(point) {
            r.push(*name, num(v));
        }
        match sweep_point(&local, sweep.target) {
            Ok(values) => {
                r.push("status", "ok").push("message", "");
                r.0.extend(values);
            }
            Err(e) => {
                r.push("status", "error").push("message", e.to_string());
                for m in &metrics {
                    r.push(m.clone(), Value::Null);
                }
            }
        }
        r
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    let rows: Vec<Record> = pool.install(|| points.par_iter().enumerate().map(evaluate).collect());
    let body = match format {
        Format::Csv => records_to_csv(&rows),
        Format::Json => records_to_json(&rows),
    };
    Ok(CommandOutput::ok(body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

struct Check {
    name: String,
    status: Status,
    residual: Option<f64>,
    tolerance: f64,
    detail: String,
}

impl Check {
    fn measured(name: impl Into<String>, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if residual <= tolerance { Status::Pass } else { Status::Fail },
            residual: Some(residual),
            tolerance,
            detail: detail.into(),
        }
    }

    fn from_result(
        name: impl Into<String>,
        tolerance: f64,
        detail: &str,
        r: Result<f64, cavent::Error>,
    ) -> Self {
        match r {
            Ok(residual) => Self::measured(name, residual, tolerance, detail),
            Err(e) => Self {
                name: name.into(),
                status: Status::Error,
                residual: None,
                tolerance,
                detail: e.to_string(),
            },
        }
    }

    fn skipped(name: impl Into<String>, tolerance: f64, why: &str) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            residual: None,
            tolerance,
            detail: why.into(),
        }
    }

    fn record(&self) -> Record {
        let mut r = Record::new();
        r.push("name", self.name.clone())
            .push("status", self.status.name())
            .push("residual", opt_num(self.residual))
            .push("tolerance", num(self.tolerance))
            .push("detail", self.detail.clone());
        r
    }
}

fn oracle_window(cfg: &RunConfig, p: &CavityParams) -> f64 {
    cfg.validate.t_max.unwrap_or(if p.lambda > 0.0 {
        10.0 / p.lambda
    } else {
        cfg.grid.t_max
    })
}

fn kernel_residual(cfg: &RunConfig, p: &CavityParams) -> Result<f64, cavent::Error> {
    let t_max = oracle_window(cfg, p);
    let rate = p.lambda.max(p.omega).max(p.delta.abs());
    let n = cfg
        .validate
        .oracle_steps
        .unwrap_or((t_max * rate / 0.002).ceil() as usize + 1);
    let grid = TimeGrid::new(t_max, n)?;
    let sol = memory_kernel_solve(p, &grid)?;
    let mut sup = 0.0f64;
    for (t, v) in grid.times().zip(&sol) {
        sup = sup.max((amplitude(p, t)?.e - v).norm());
    }
    Ok(sup)
}

fn modes_residual(cfg: &RunConfig, p: &CavityParams) -> Result<f64, cavent::Error> {
    let window = oracle_window(cfg, p);
    let n = cfg.validate.n_modes;
    let cutoff = cfg.validate.cutoff.unwrap_or_else(|| {
        let wanted = (20.0 * p.omega.max(p.delta.abs()) / p.lambda).max(50.0);
        // Recurrence time 2 pi / spacing = pi n / (cutoff lambda) >= 2 window.
        wanted.min(std::f64::consts::PI * n as f64 / (2.0 * p.lambda * window))
    });
    let disc = ModeDiscretization::new(n, cutoff)?;
    let grid = TimeGrid::new(window, 201)?;
    let sol = discretized_modes_solve(p, &disc, &grid)?;
    let mut sup = 0.0f64;
    for (t, v) in grid.times().zip(&sol) {
        sup = sup.max((amplitude(p, t)?.e - v).norm());
    }
    Ok(sup)
}

fn sup_distance(p: &CavityParams, horizon: f64, approx: impl Fn(&CavityParams, f64) -> f64) -> f64 {
    (0..=2000)
        .map(|i| {
            let t = horizon * i as f64 / 2000.0;
            (amplitude(p, t).expect("valid").e_abs() - approx(p, t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest step `d[k+1] - d[k]`; negative when strictly decreasing.
fn worst_increase(d: &[f64]) -> f64 {
    d.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn markovian_ladder(p: &CavityParams) -> Vec<f64> {
    [10.0, 30.0, 100.0]
        .iter()
        .map(|&ratio| {
            let q = CavityParams::resonant(p.omega, ratio * p.omega).expect("valid");
            let horizon = 10.0 / q.gamma().expect("lambda > 0");
            sup_distance(&q, horizon, |q, t| markovian_amplitude(q, t).expect("valid").norm())
        })
        .collect()
}

fn jc_ladder(p: &CavityParams) -> Vec<f64> {
    [0.1, 0.03, 0.01]
        .iter()
        .map(|&ratio| {
            let q = CavityParams::new(p.omega, ratio * p.omega, p.delta).expect("valid");
            let horizon = 8.0 * std::f64::consts::PI / q.rabi();
            sup_distance(&q, horizon, |q, t| jc_amplitude(q, t).expect("valid").norm())
        })
        .collect()
}

struct Invariants {
    pair_norm: f64,
    state_norm: f64,
    wootters_gap: f64,
    tangle_spread: f64,
    inequality_excess: f64,
    gauge_gap: f64,
    threshold_mismatches: f64,
}

fn invariants(cfg: &RunConfig, ph: &Physical) -> Result<Invariants, cavent::Error> {
    let s = ph.init.s;
    let n = cfg.validate.samples.max(2);
    let mut inv = Invariants {
        pair_norm: 0.0,
        state_norm: 0.0,
        wootters_gap: 0.0,
        tangle_spread: 0.0,
        inequality_excess: 0.0,
        gauge_gap: 0.0,
        threshold_mismatches: 0.0,
    };
    let pairs = [
        (Subsystem::A1, Subsystem::A2),
        (Subsystem::R1, Subsystem::R2),
        (Subsystem::A1, Subsystem::R2),
        (Subsystem::A2, Subsystem::R1),
    ];
    let expected_tangle = 1.0 - s * s;
    for i in 0..n {
        let t = cfg.grid.t_max * i as f64 / (n - 1) as f64;
        let a1 = amplitude(&ph.p1, t)?;
        let a2 = amplitude(&ph.p2, t)?;
        for a in [&a1, &a2] {
            inv.pair_norm = inv.pair_norm.max((a.e.norm_sqr() + a.f_mag * a.f_mag - 1.0).abs());
        }
        let st = JointState::from_pairs(&ph.init, &a1, &a2);
        inv.state_norm = inv.state_norm.max((st.norm_sqr() - 1.0).abs());

        let generic = [
            (Subsystem::A1, Subsystem::A2, concurrence_qubits(s, &a1, &a2)),
            (Subsystem::R1, Subsystem::R2, concurrence_reservoirs(s, &a1, &a2)),
            (Subsystem::A1, Subsystem::R1, concurrence_qubit_own_reservoir(s, &a1)),
            (Subsystem::A2, Subsystem::R2, concurrence_qubit_own_reservoir(s, &a2)),
        ];
        for (x, y, closed) in generic {
            inv.wootters_gap = inv.wootters_gap.max((wootters(&reduce(&st, (x, y))?)? - closed).abs());
        }

        let snap = snapshot(&ph.init, &ph.p1, &ph.p2, t)?;
        inv.tangle_spread = inv.tangle_spread.max((snap.tangle_bilocal - expected_tangle).abs());
        inv.inequality_excess = inv
            .inequality_excess
            .max(snap.concurrence_square_sum() - expected_tangle);

        let rotated = st.with_local_phase(Subsystem::R1, 0.7);
        for pair in pairs {
            let a = wootters(&reduce(&st, pair)?)?;
            let b = wootters(&reduce(&rotated, pair)?)?;
            inv.gauge_gap = inv.gauge_gap.max((a - b).abs());
        }

        let g = a1.f_mag * a2.f_mag - ph.init.threshold();
        if (g > 1e-9 && snap.c_12 != 0.0) || (g < -1e-9 && snap.c_12 == 0.0 && snap.abs_e1 * snap.abs_e2 * -g * (1.0 + s) > 1e-11) {
            inv.threshold_mismatches += 1.0;
        }
    }
    inv.inequality_excess = inv.inequality_excess.max(0.0);
    Ok(inv)
}

pub fn run_validate(cfg: &RunConfig, format: Format) -> Result<CommandOutput, CliError> {
    let ph = physical(cfg)?;
    let mut checks = Vec::new();
    for (label, p) in [("cavity1", &ph.p1), ("cavity2", &ph.p2)] {
        checks.push(Check::from_result(
            format!("memory_kernel_{label}"),
            1e-6,
            "sup |E - memory-kernel RK4|",
            kernel_residual(cfg, p),
        ));
        if p.lambda > 0.0 {
            checks.push(Check::from_result(
                format!("discrete_modes_{label}"),
                1e-3,
                "sup |E - discretized-bath amplitude|",
                modes_residual(cfg, p),
            ));
            let ladder = markovian_ladder(p);
            checks.push(Check::measured(
                format!("markovian_limit_{label}"),
                worst_increase(&ladder),
                0.0,
                format!(
                    "sup distance to the bad-cavity form at lambda/Omega = 10, 30, 100: {}",
                    ladder.iter().map(|d| fmt_num(*d)).collect::<Vec<_>>().join(", ")
                ),
            ));
        } else {
            checks.push(Check::skipped(
                format!("discrete_modes_{label}"),
                1e-3,
                "lambda = 0: the reservoir is a single mode",
            ));
            checks.push(Check::skipped(
                format!("markovian_limit_{label}"),
                0.0,
                "lambda = 0: the bad-cavity rate is undefined",
            ));
        }
        let ladder = jc_ladder(p);
        checks.push(Check::measured(
            format!("ideal_cavity_limit_{label}"),
            worst_increase(&ladder),
            0.0,
            format!(
                "sup distance to the ideal-cavity form at lambda/Omega = 0.1, 0.03, 0.01: {}",
                ladder.iter().map(|d| fmt_num(*d)).collect::<Vec<_>>().join(", ")
            ),
        ));
    }
    match invariants(cfg, &ph) {
        Ok(inv) => {
            checks.push(Check::measured("pair_normalization", inv.pair_norm, 1e-12, "max ||E|^2 + |F|^2 - 1|"));
            checks.push(Check::measured("state_normalization", inv.state_norm, 1e-12, "max |<psi|psi> - 1|"));
            checks.push(Check::measured("wootters_closed_form", inv.wootters_gap, 1e-10, "max |C_wootters - C_closed|"));
            checks.push(Check::measured("tangle_invariant", inv.tangle_spread, 1e-10, "max |tangle - (1 - s^2)|"));
            checks.push(Check::measured(
                "concurrence_inequality",
                inv.inequality_excess,
                1e-10,
                "max (sum C^2 - (1 - s^2))",
            ));
            checks.push(Check::measured("gauge_invariance", inv.gauge_gap, 1e-12, "max concurrence change under a cavity-1 phase"));
            checks.push(Check::measured(
                "esd_threshold",
                inv.threshold_mismatches,
                0.0,
                "samples where C12 = 0 disagrees with |F1 F2| >= threshold",
            ));
        }
        Err(e) => checks.push(Check::from_result("invariants", 0.0, "", Err(e))),
    }

    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let (passed, failed, skipped, errors) = (
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skipped),
        count(Status::Error),
    );
    let rows: Vec<Record> = checks.iter().map(Check::record).collect();
    let body = match format {
        Format::Csv => records_to_csv(&rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Report {
                #[serde(flatten)]
                header: Record,
                checks: Vec<Record>,
            }
            let mut h = header(cfg, "validate");
            h.push("status", if failed + errors == 0 { "pass" } else { "fail" })
                .push("passed", passed)
                .push("failed", failed)
                .push("skipped", skipped)
                .push("errors", errors);
            let mut s = serde_json::to_string_pretty(&Report { header: h, checks: rows }).expect("serializable");
            s.push('\n');
            s
        }
    };
    let mut out = CommandOutput::ok(body);
    if failed + errors > 0 {
        let names: Vec<&str> = checks
            .iter()
            .filter(|c| matches!(c.status, Status::Fail | Status::Error))
            .map(|c| c.name.as_str())
            .collect();
        out.failure = Some(names.join(", "));
    }
    Ok(out)
}
