//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use serde::Deserialize;

use swanson::geometry::DEFAULT_BAND;
use swanson::{
    metric_from_b, Metric, QuadraticHamiltonian, RealState, SwansonParams, UncertaintyB,
};

use crate::error::{CliError, CliResult};

/// Either an absolute step or `"T/N"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Absolute(f64),
    PeriodFraction(f64),
}

impl StepSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("T/") {
            let n: f64 = rest.parse().map_err(|_| format!("bad step '{s}'"))?;
            if !(n > 0.0) || !n.is_finite() {
                return Err(format!("bad step '{s}'"));
            }
            Ok(StepSpec::PeriodFraction(n))
        } else {
            let h: f64 = s
                .parse()
                .map_err(|_| format!("bad step '{s}', expected a number or T/N"))?;
            Ok(StepSpec::Absolute(h))
        }
    }

    pub fn resolve(&self, period: f64) -> f64 {
        match *self {
            StepSpec::Absolute(h) => h,
            StepSpec::PeriodFraction(n) => period / n,
        }
    }
}

impl<'de> Deserialize<'de> for StepSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(StepSpec::Absolute(h)),
            Raw::Str(s) => StepSpec::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Lifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Delta,
    #[value(name = "im_b0")]
    ImB0,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub hess_h: [[f64; 2]; 2],
    #[serde(default)]
    pub hess_gamma: [[f64; 2]; 2],
    #[serde(default)]
    pub lin_h: [f64; 2],
    #[serde(default)]
    pub lin_gamma: [f64; 2],
    #[serde(default)]
    pub const_h: f64,
    #[serde(default)]
    pub const_gamma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub every: Option<usize>,
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyFile {
    pub re_range: Option<[f64; 2]>,
    pub im_range: Option<[f64; 2]>,
    pub resolution: Option<usize>,
    pub band: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub variable: Option<SweepVariable>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub by: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateFile {
    pub tolerance: Option<f64>,
}

/// Schema of the `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega0: Option<f64>,
    pub delta: Option<f64>,
    pub hamiltonian: Option<HamiltonianFile>,
    pub z0: Option<[f64; 2]>,
    pub g0: Option<[f64; 3]>,
    pub b0: Option<[f64; 2]>,
    pub n0: Option<f64>,
    pub step: Option<StepSpec>,
    pub periods: Option<f64>,
    pub out: Option<PathBuf>,
    pub allow_divergence: Option<bool>,
    #[serde(default)]
    pub simulate: SimulateFile,
    #[serde(default)]
    pub classify: ClassifyFile,
    #[serde(default)]
    pub sweep: SweepFile,
    #[serde(default)]
    pub validate: ValidateFile,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// The model a run integrates.
#[derive(Debug, Clone)]
pub enum Model {
    Swanson(SwansonParams),
    General(QuadraticHamiltonian),
}

impl Model {
    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        match self {
            Model::Swanson(p) => swanson::swanson_hamiltonian(p),
            Model::General(h) => *h,
        }
    }

    /// `2 pi / omega` with `omega^2 = det(H'' - i Gamma'')`.
    pub fn period(&self) -> CliResult<f64> {
        match self {
            Model::Swanson(p) => Ok(p.period()),
            Model::General(h) => {
                let det = h.complex_hessian().determinant();
                if det.re > 0.0 && det.im.abs() <= 1e-12 * det.re {
                    Ok(2.0 * PI / det.re.sqrt())
                } else {
                    Err(CliError::Config(format!(
                        "the period T is undefined for this Hamiltonian (det of the complex Hessian = {det}); give --step as an absolute value and --periods counts units of 1"
                    )))
                }
            }
        }
    }

    pub fn swanson(&self) -> CliResult<SwansonParams> {
        match self {
            Model::Swanson(p) => Ok(*p),
            Model::General(_) => Err(CliError::Config(
                "this command needs Swanson parameters (omega0, delta), not a general hamiltonian"
                    .into(),
            )),
        }
    }
}

/// Fully resolved configuration shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub z0: RealState,
    pub g0: Metric,
    /// Set when the initial state was given as `B0`.
    pub b0: Option<UncertaintyB>,
    pub n0: f64,
    pub step: StepSpec,
    pub periods: f64,
    pub out: Option<PathBuf>,
    pub allow_divergence: bool,
    pub every: usize,
    pub method: Method,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub band: f64,
    pub sweep_variable: SweepVariable,
    pub sweep_from: f64,
    pub sweep_to: f64,
    pub sweep_by: f64,
    pub tolerance: f64,
}

impl RunConfig {
    /// Time unit for `--step T/N` and `--periods`; 1 when `T` is undefined
    /// and the step is absolute.
    pub fn time_unit(&self) -> CliResult<f64> {
        match (self.model.period(), self.step) {
            (Ok(t), _) => Ok(t),
            (Err(_), StepSpec::Absolute(_)) => Ok(1.0),
            (Err(e), _) => Err(e),
        }
    }

    pub fn step_size(&self) -> CliResult<f64> {
        let h = self.step.resolve(self.time_unit()?);
        if h > 0.0 && h.is_finite() {
            Ok(h)
        } else {
            Err(CliError::Config(format!(
                "step must be positive and finite, got {h}"
            )))
        }
    }

    pub fn t_end(&self) -> CliResult<f64> {
        Ok(self.periods * self.time_unit()?)
    }

    pub fn initial_b(&self) -> UncertaintyB {
        self.b0.unwrap_or_else(|| swanson::b_from_metric(&self.g0))
    }
}

/// Values given on the command line; `None` means not given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub omega0: Option<f64>,
    pub delta: Option<f64>,
    pub z0: Option<[f64; 2]>,
    pub g0: Option<[f64; 3]>,
    pub b0: Option<[f64; 2]>,
    pub step: Option<StepSpec>,
    pub periods: Option<f64>,
    pub out: Option<PathBuf>,
    pub allow_divergence: bool,
    pub every: Option<usize>,
    pub method: Option<Method>,
    pub re_range: Option<[f64; 2]>,
    pub im_range: Option<[f64; 2]>,
    pub resolution: Option<usize>,
    pub band: Option<f64>,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_from: Option<f64>,
    pub sweep_to: Option<f64>,
    pub sweep_by: Option<f64>,
    pub tolerance: Option<f64>,
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn range(name: &str, r: [f64; 2]) -> CliResult<(f64, f64)> {
    Ok((finite(name, r[0])?, finite(name, r[1])?))
}

pub fn resolve(file: FileConfig, cli: Overrides) -> CliResult<RunConfig> {
    let model = match (
        &file.hamiltonian,
        cli.omega0.or(file.omega0),
        cli.delta.or(file.delta),
    ) {
        (Some(h), None, None) => {
            let m = |a: [[f64; 2]; 2]| Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
            Model::General(QuadraticHamiltonian::new(
                m(h.hess_h),
                m(h.hess_gamma),
                Vector2::from(h.lin_h),
                Vector2::from(h.lin_gamma),
                h.const_h,
                h.const_gamma,
            )?)
        }
        (Some(_), _, _) => {
            return Err(CliError::Config(
                "give either a hamiltonian or omega0/delta, not both".into(),
            ))
        }
        (None, w0, d) => Model::Swanson(SwansonParams::new(w0.unwrap_or(1.0), d.unwrap_or(0.5))?),
    };

    let z0 = cli.z0.or(file.z0).unwrap_or([1.0, 0.0]);
    let z0 = RealState::new(finite("z0", z0[0])?, finite("z0", z0[1])?);

    // flags win over the file; within one source b0 and g0 exclude each other
    let (g0, b0) = match (cli.g0, cli.b0) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --g0 or --b0".into())),
        (Some(g), None) => (Some(g), None),
        (None, Some(b)) => (None, Some(b)),
        (None, None) => match (file.g0, file.b0) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("config sets both g0 and b0".into()))
            }
            other => other,
        },
    };
    let (g0, b0) = match (g0, b0) {
        (_, Some(b)) => {
            let b = UncertaintyB::new(finite("b0", b[0])?, finite("b0", b[1])?);
            (metric_from_b(&b)?, Some(b))
        }
        (Some(g), None) => (Metric::new(g[0], g[1], g[2])?, None),
        (None, None) => (Metric::IDENTITY, None),
    };

    let n0 = finite("n0", file.n0.unwrap_or(1.0))?;
    if !(n0 > 0.0) {
        return Err(CliError::Config(format!("n0 must be positive, got {n0}")));
    }
    let periods = finite("periods", cli.periods.or(file.periods).unwrap_or(1.0))?;
    if periods < 0.0 {
        return Err(CliError::Config(format!(
            "periods must be non-negative, got {periods}"
        )));
    }
    let resolution = cli.resolution.or(file.classify.resolution).unwrap_or(41);
    if resolution < 2 {
        return Err(CliError::Config(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let band = finite(
        "band",
        cli.band.or(file.classify.band).unwrap_or(DEFAULT_BAND),
    )?;
    if !(band > 0.0) {
        return Err(CliError::Config(format!(
            "band must be positive, got {band}"
        )));
    }
    let every = cli.every.or(file.simulate.every).unwrap_or(1);
    if every == 0 {
        return Err(CliError::Config("every must be at least 1".into()));
    }
    let sweep_by = finite("sweep by", cli.sweep_by.or(file.sweep.by).unwrap_or(0.1))?;
    if !(sweep_by > 0.0) {
        return Err(CliError::Config(format!(
            "sweep step must be positive, got {sweep_by}"
        )));
    }
    let tolerance = finite(
        "tolerance",
        cli.tolerance.or(file.validate.tolerance).unwrap_or(1e-6),
    )?;
    if !(tolerance > 0.0) {
        return Err(CliError::Config(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }

    let cfg = RunConfig {
        model,
        z0,
        g0,
        b0,
        n0,
        step: cli
            .step
            .or(file.step)
            .unwrap_or(StepSpec::PeriodFraction(1e4)),
        periods,
        out: cli.out.or(file.out),
        allow_divergence: cli.allow_divergence || file.allow_divergence.unwrap_or(false),
        every,
        method: cli
            .method
            .or(file.simulate.method)
            .unwrap_or(Method::Lifted),
        re_range: range(
            "re_range",
            cli.re_range
                .or(file.classify.re_range)
                .unwrap_or([-2.0, 2.0]),
        )?,
        im_range: range(
            "im_range",
            cli.im_range
                .or(file.classify.im_range)
                .unwrap_or([0.05, 2.0]),
        )?,
        resolution,
        band,
        sweep_variable: cli
            .sweep_variable
            .or(file.sweep.variable)
            .unwrap_or(SweepVariable::Delta),
        sweep_from: finite(
            "sweep from",
            cli.sweep_from.or(file.sweep.from).unwrap_or(0.0),
        )?,
        sweep_to: finite("sweep to", cli.sweep_to.or(file.sweep.to).unwrap_or(1.2))?,
        sweep_by,
        tolerance,
    };
    cfg.step_size()?;
    Ok(cfg)
}
