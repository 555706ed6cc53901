use swanson::metriplectic::{integrate, integrate_lifted};
use swanson::{metric_eigen, MetriplecticState};

use crate::config::{Method, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv};

pub const HEADER: [&str; 13] = [
    "t", "t_over_T", "P", "Q", "g_pp", "g_pq", "g_qq", "g_plus", "g_minus", "phi", "n", "det_G",
    "diverged",
];

fn row(t: f64, unit: f64, s: &MetriplecticState) -> Vec<String> {
    let e = metric_eigen(&s.g);
    let values = [
        t,
        t / unit,
        s.z.p,
        s.z.q,
        s.g.g_pp,
        s.g.g_pq,
        s.g.g_qq,
        e.g_plus,
        e.g_minus,
        e.phi,
        s.n,
        s.g.det(),
    ];
    let mut out: Vec<String> = values.iter().map(|&v| num(v)).collect();
    out.push("0".into());
    out
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let model = cfg.model.hamiltonian();
    let init = MetriplecticState {
        z: cfg.z0,
        g: cfg.g0,
        n: cfg.n0,
    };
    let (t_end, step, unit) = (cfg.t_end()?, cfg.step_size()?, cfg.time_unit()?);
    let traj = match cfg.method {
        Method::Direct => integrate(&model, &init, t_end, step)?,
        Method::Lifted => integrate_lifted(&model, &init, t_end, step)?,
    };
    let mut rows: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .step_by(cfg.every)
        .map(|(t, s)| row(*t, unit, s))
        .collect();
    if let Some(t) = traj.divergence_time {
        let mut last = vec![num(t), num(t / unit)];
        last.extend(std::iter::repeat_n("nan".to_string(), HEADER.len() - 3));
        last.push("1".into());
        rows.push(last);
    }
    write_csv(cfg.out.as_deref(), &HEADER, &rows)?;
    match traj.divergence_time {
        Some(t) if !cfg.allow_divergence => Err(CliError::Divergence(format!(
            "blow-up at t = {t} (t/T = {}); pass --allow-divergence to accept",
            t / unit
        ))),
        _ => Ok(()),
    }
}
