//! Cross-checks of independent solution routes, written as a JSON report.

use num_complex::Complex64;
use serde::Serialize;

use swanson::closed_form::{
    first_divergence_time, metric_closed, real_trajectory, survival_closed,
};
use swanson::gaussian::{evolve_b, evolve_b_path, integrate_riccati, propagate, PathEvent};
use swanson::geometry::BlowupDetector;
use swanson::metriplectic::{integrate, integrate_lifted, Trajectory, BLOWUP_THRESHOLD};
use swanson::{
    mapped_dynamics, metric_eigen, swanson_hamiltonian, GaussianState, Metric, MetriplecticState,
    RealState, SwansonParams, UncertaintyB,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::write_json;

/// Samples whose reference metric eigenvalue exceeds this are not compared.
const REFERENCE_CAP: f64 = 10.0;
const ROUTE_TOLERANCE: f64 = 1e-8;
const ORDER_RANGE: (f64, f64) = (3.7, 4.3);
const MAX_COMPARISONS: usize = 500;

#[derive(Debug, Serialize)]
pub struct Thresholds {
    pub closed_vs_ode: f64,
    pub mobius_vs_riccati: f64,
    pub mapped_vs_direct: f64,
    pub order_range: (f64, f64),
    pub divergence_steps: f64,
}

#[derive(Debug, Serialize)]
pub struct ClosedVsOde {
    pub reference: &'static str,
    pub max_err_z: f64,
    pub max_err_g: f64,
    pub max_err_n: f64,
    pub compared: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MobiusVsRiccati {
    pub max_err_b: f64,
    pub compared: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MappedVsDirect {
    pub max_err_b: f64,
    pub max_err_z: f64,
    pub max_err_n: f64,
    pub compared: usize,
    pub skipped: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Convergence {
    pub steps: [f64; 2],
    pub errors: [f64; 2],
    pub order: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Divergence {
    pub expected_time: Option<f64>,
    pub lifted_time: Option<f64>,
    pub direct_time: Option<f64>,
    pub step: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub params: SwansonParams,
    pub step: f64,
    pub t_end: f64,
    pub thresholds: Thresholds,
    pub closed_vs_ode: ClosedVsOde,
    pub mobius_vs_riccati: MobiusVsRiccati,
    pub mapped_vs_direct: MappedVsDirect,
    pub convergence: Convergence,
    pub divergence: Divergence,
    pub failures: Vec<&'static str>,
    pub pass: bool,
}

/// Reference solution for the configured initial data.
#[derive(Clone, Copy)]
struct Reference {
    params: SwansonParams,
    z0: RealState,
    g0: Metric,
    b0: UncertaintyB,
    n0: f64,
}

impl Reference {
    fn identity_metric(&self) -> bool {
        self.g0.max_abs_diff(&Metric::IDENTITY) == 0.0
    }

    /// `(Z, G, n)` at `t`; `None` past a blow-up or above [`REFERENCE_CAP`].
    fn at(&self, t: f64) -> Option<MetriplecticState> {
        let g = metric_closed(&self.params, &self.g0, t).ok()?;
        if metric_eigen(&g).g_plus > REFERENCE_CAP {
            return None;
        }
        if self.identity_metric() {
            let z = real_trajectory(&self.params, &self.z0, t).ok()?;
            let n = survival_closed(&self.params, &self.z0, t).ok()? * self.n0;
            return Some(MetriplecticState { z, g, n });
        }
        let state = propagate(&swanson_hamiltonian(&self.params), &self.initial(), t).ok()?;
        Some(MetriplecticState {
            z: state.expectation().ok()?,
            g,
            n: state.norm().ok()?,
        })
    }

    fn initial(&self) -> GaussianState {
        GaussianState {
            center: self.z0.into(),
            b: self.b0,
            gamma: Complex64::new(0.0, -0.5 * self.n0.ln()),
        }
    }
}

fn stride(len: usize) -> usize {
    len.div_ceil(MAX_COMPARISONS).max(1)
}

/// Max errors of a trajectory against the reference, all samples if the
/// reference is closed-form, otherwise a thinned subset.
fn compare(reference: &Reference, traj: &Trajectory, thin: bool) -> (f64, f64, f64, usize) {
    let step = if thin { stride(traj.states.len()) } else { 1 };
    let (mut ez, mut eg, mut en, mut count) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for (t, s) in traj.times.iter().zip(&traj.states).step_by(step) {
        let Some(r) = reference.at(*t) else { break };
        ez = ez.max((s.z.vector() - r.z.vector()).norm());
        eg = eg.max(s.g.max_abs_diff(&r.g));
        en = en.max((s.n - r.n).abs() / r.n.max(1.0));
        count += 1;
    }
    (ez, eg, en, count)
}

fn closed_vs_ode(reference: &Reference, traj: &Trajectory, tol: f64) -> ClosedVsOde {
    let closed = reference.identity_metric();
    let (ez, eg, en, compared) = compare(reference, traj, !closed);
    ClosedVsOde {
        reference: if closed { "closed_form" } else { "gaussian" },
        max_err_z: ez,
        max_err_g: eg,
        max_err_n: en,
        compared,
        pass: compared > 0 && ez < tol && eg < tol && en < tol,
    }
}

fn mobius_vs_riccati(
    params: &SwansonParams,
    b0: &UncertaintyB,
    t_end: f64,
    h: f64,
) -> MobiusVsRiccati {
    let model = swanson_hamiltonian(params);
    let samples = ((t_end / h).round() as usize).max(1);
    let horizon = match evolve_b_path(&model, b0, t_end, samples).event {
        Some(PathEvent::Pole { from, .. }) => from,
        _ => t_end,
    };
    let (mut err, mut compared) = (0.0f64, 0usize);
    if let Ok(path) = integrate_riccati(&model, b0, horizon, h) {
        let every = stride(path.len());
        for (t, b) in path.iter().step_by(every) {
            let Ok(exact) = evolve_b(&model, b0, *t) else {
                break;
            };
            if exact.0.norm() > REFERENCE_CAP {
                break;
            }
            err = err.max((exact.0 - b.0).norm() / exact.0.norm().max(1.0));
            compared += 1;
        }
    }
    MobiusVsRiccati {
        max_err_b: err,
        compared,
        pass: compared > 0 && err < ROUTE_TOLERANCE,
    }
}

/// Compares on `[0, horizon)`; past a divergence the phase integral has
/// crossed a non-integrable singularity and `n` is meaningless on both routes.
fn mapped_vs_direct(reference: &Reference, t_end: f64, horizon: f64) -> MappedVsDirect {
    let model = swanson_hamiltonian(&reference.params);
    let state0 = reference.initial();
    let (mut eb, mut ez, mut en, mut compared, mut skipped) = (0.0f64, 0.0f64, 0.0f64, 0, 0);
    for k in 0..=50 {
        let t = t_end * k as f64 / 50.0;
        if t >= horizon {
            skipped += 1;
            continue;
        }
        let pair = mapped_dynamics(&reference.params, &state0, t).and_then(|m| {
            let d = propagate(&model, &state0, t)?;
            Ok((
                m.b,
                m.expectation()?,
                m.norm()?,
                d.b,
                d.expectation()?,
                d.norm()?,
            ))
        });
        let Ok((bm, zm, nm, bd, zd, nd)) = pair else {
            skipped += 1;
            continue;
        };
        let scale = metric_eigen(&swanson::metric_from_b(&bd).expect("normalizable")).g_plus;
        if scale > REFERENCE_CAP {
            skipped += 1;
            continue;
        }
        eb = eb.max((bm.0 - bd.0).norm() / bd.0.norm().max(1.0));
        ez = ez.max((zm.vector() - zd.vector()).norm() / scale);
        en = en.max((nm - nd).abs() / nd.max(1.0));
        compared += 1;
    }
    MappedVsDirect {
        max_err_b: eb,
        max_err_z: ez,
        max_err_n: en,
        compared,
        skipped,
        pass: compared > 0 && eb.max(ez).max(en) < ROUTE_TOLERANCE,
    }
}

fn convergence(reference: &Reference, h: f64) -> CliResult<Convergence> {
    let p = reference.params;
    let unit = Reference {
        g0: Metric::IDENTITY,
        b0: UncertaintyB::new(0.0, 1.0),
        ..*reference
    };
    let window = first_divergence_time(&p).map_or(p.period(), |t| 0.5 * t.min(p.period()));
    let base = h.max(p.period() / 400.0);
    let steps = [base, base / 2.0];
    let init = MetriplecticState {
        z: unit.z0,
        g: Metric::IDENTITY,
        n: unit.n0,
    };
    let mut errors = [0.0; 2];
    for (e, h) in errors.iter_mut().zip(steps) {
        let traj = integrate(&swanson_hamiltonian(&p), &init, window, h)?;
        let (ez, eg, en, _) = compare(&unit, &traj, false);
        *e = ez.max(eg).max(en);
    }
    let order = (errors[0] / errors[1]).log2();
    Ok(Convergence {
        steps,
        errors,
        order,
        pass: (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order),
    })
}

fn divergence(reference: &Reference, t_end: f64, h: f64) -> CliResult<Divergence> {
    let p = reference.params;
    let model = swanson_hamiltonian(&p);
    let expected = if reference.identity_metric() {
        closed_blowup(reference, t_end, h).or_else(|| {
            first_divergence_time(&p)
                .filter(|&t| t <= t_end)
                .or_else(|| critical_pole(&p, t_end))
        })
    } else {
        let samples = ((t_end / h).round() as usize).max(1);
        BlowupDetector::new(&p, t_end, samples).first_blowup(&reference.b0)
    };
    let init = MetriplecticState {
        z: reference.z0,
        g: reference.g0,
        n: reference.n0,
    };
    let lifted = integrate_lifted(&model, &init, t_end, h)?.divergence_time;
    let direct = integrate(&model, &init, t_end, h)?.divergence_time;
    let pass = match (expected, lifted) {
        (None, None) => true,
        (Some(e), Some(l)) => (e - l).abs() <= 2.0 * h,
        _ => false,
    };
    Ok(Divergence {
        expected_time: expected,
        lifted_time: lifted,
        direct_time: direct,
        step: h,
        pass,
    })
}

/// First grid time at which the closed-form state trips the integrator's
/// divergence rules. Catches `n` overflowing before the metric pole.
fn closed_blowup(reference: &Reference, t_end: f64, h: f64) -> Option<f64> {
    let p = &reference.params;
    let steps = (t_end / h).round() as usize;
    (1..=steps).map(|k| k as f64 * h).find(|&t| {
        let Ok(g) = metric_closed(p, &reference.g0, t) else {
            return true;
        };
        let z = real_trajectory(p, &reference.z0, t);
        let n = survival_closed(p, &reference.z0, t).map(|n| n * reference.n0);
        match (z, n) {
            (Ok(z), Ok(n)) => {
                metric_eigen(&g).g_plus > BLOWUP_THRESHOLD
                    || z.vector().norm() > BLOWUP_THRESHOLD
                    || !n.is_finite()
            }
            _ => true,
        }
    })
}

/// `|delta| = omega0` with `G0 = I`: the metric has a double pole at a
/// quarter period without changing sheet.
fn critical_pole(p: &SwansonParams, t_end: f64) -> Option<f64> {
    let critical = (p.delta().abs() - p.omega0()).abs() <= 1e-12 * p.omega0();
    let t = p.period() / 4.0;
    (critical && t <= t_end).then_some(t)
}

pub fn report(cfg: &RunConfig) -> CliResult<ValidationReport> {
    let params = cfg.model.swanson()?;
    let (h, t_end) = (cfg.step_size()?, cfg.t_end()?);
    let reference = Reference {
        params,
        z0: cfg.z0,
        g0: cfg.g0,
        b0: cfg.initial_b(),
        n0: cfg.n0,
    };
    let init = MetriplecticState {
        z: cfg.z0,
        g: cfg.g0,
        n: cfg.n0,
    };
    let traj = integrate(&swanson_hamiltonian(&params), &init, t_end, h)?;
    let closed = closed_vs_ode(&reference, &traj, cfg.tolerance);
    let mobius = mobius_vs_riccati(&params, &reference.b0, t_end, h);
    let div = divergence(&reference, t_end, h)?;
    let horizon = div.expected_time.unwrap_or(f64::INFINITY);
    let mapped = mapped_vs_direct(&reference, t_end, horizon);
    let conv = convergence(&reference, h)?;
    let checks = [
        ("closed_vs_ode", closed.pass),
        ("mobius_vs_riccati", mobius.pass),
        ("mapped_vs_direct", mapped.pass),
        ("convergence", conv.pass),
        ("divergence", div.pass),
    ];
    let failures: Vec<&'static str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Ok(ValidationReport {
        params,
        step: h,
        t_end,
        thresholds: Thresholds {
            closed_vs_ode: cfg.tolerance,
            mobius_vs_riccati: ROUTE_TOLERANCE,
            mapped_vs_direct: ROUTE_TOLERANCE,
            order_range: ORDER_RANGE,
            divergence_steps: 2.0,
        },
        closed_vs_ode: closed,
        mobius_vs_riccati: mobius,
        mapped_vs_direct: mapped,
        convergence: conv,
        divergence: div,
        pass: failures.is_empty(),
        failures,
    })
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let report = report(cfg)?;
    write_json(cfg.out.as_deref(), &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Validation(report.failures.join(", ")))
    }
}
