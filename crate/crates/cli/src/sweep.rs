use rayon::prelude::*;

use swanson::geometry::{classify_b, classify_metric};
use swanson::metriplectic::integrate_lifted;
use swanson::{metric_from_b, swanson_hamiltonian, MetriplecticState, SwansonParams, UncertaintyB};

use crate::config::{RunConfig, StepSpec, SweepVariable};
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv};

pub const HEADER: [&str; 6] = [
    "value",
    "label",
    "outcome",
    "max_g_plus",
    "divergence_time",
    "steps",
];

/// `from, from + by, ...` up to `to` inclusive; empty when `to < from`.
pub fn values(from: f64, to: f64, by: f64) -> Vec<f64> {
    if to < from {
        return Vec::new();
    }
    let n = ((to - from) / by + 1e-9).floor() as usize;
    (0..=n).map(|k| from + k as f64 * by).collect()
}

struct Row {
    value: f64,
    label: String,
    diverged: bool,
    max_g_plus: f64,
    divergence_time: Option<f64>,
    steps: usize,
}

fn run_one(cfg: &RunConfig, value: f64) -> CliResult<Row> {
    let base = cfg.model.swanson()?;
    let (params, g0, label) = match cfg.sweep_variable {
        SweepVariable::Delta => {
            let p = SwansonParams::new(base.omega0(), value)?;
            (p, cfg.g0, classify_metric(&p, &cfg.g0, cfg.band)?)
        }
        SweepVariable::ImB0 => {
            let b = UncertaintyB::new(cfg.initial_b().0.re, value);
            (base, metric_from_b(&b)?, classify_b(&base, &b, cfg.band)?)
        }
    };
    let step = match cfg.step {
        StepSpec::Absolute(h) => h,
        StepSpec::PeriodFraction(n) => params.period() / n,
    };
    let init = MetriplecticState {
        z: cfg.z0,
        g: g0,
        n: cfg.n0,
    };
    let traj = integrate_lifted(
        &swanson_hamiltonian(&params),
        &init,
        cfg.periods * params.period(),
        step,
    )?;
    Ok(Row {
        value,
        label: label.to_string(),
        diverged: traj.diverged(),
        max_g_plus: traj.max_g_plus(),
        divergence_time: traj.divergence_time,
        steps: traj.states.len() - 1,
    })
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    cfg.model.swanson()?;
    let values = values(cfg.sweep_from, cfg.sweep_to, cfg.sweep_by);
    if cfg.sweep_variable == SweepVariable::ImB0 && values.iter().any(|&v| !(v > 0.0)) {
        return Err(CliError::Config(
            "Im B0 sweep must stay in the upper half-plane".into(),
        ));
    }
    let rows = values
        .par_iter()
        .map(|&v| run_one(cfg, v))
        .collect::<CliResult<Vec<_>>>()?;
    let lines: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.value),
                r.label.clone(),
                if r.diverged { "divergent" } else { "bounded" }.to_string(),
                num(r.max_g_plus),
                r.divergence_time.map_or_else(String::new, num),
                r.steps.to_string(),
            ]
        })
        .collect();
    write_csv(cfg.out.as_deref(), &HEADER, &lines)?;
    Ok(())
}
