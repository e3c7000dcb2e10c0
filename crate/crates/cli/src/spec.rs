use std::path::PathBuf;

use clap::ValueEnum;
use nonsmooth_core::models::{
    self, ChuaParams, DrillingMotorParams, DrillingParams, FrictionLaw, WattParams,
};
use nonsmooth_core::{PiecewiseSystem, SolverConfig};

use crate::params::ParamSet;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Drilling,
    DrillingMotor,
    Watt,
    Chua,
    DoubleIntegrator,
    FrictionLinear,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Drilling => "drilling",
            ModelKind::DrillingMotor => "drilling-motor",
            ModelKind::Watt => "watt",
            ModelKind::Chua => "chua",
            ModelKind::DoubleIntegrator => "double-integrator",
            ModelKind::FrictionLinear => "friction-linear",
        }
    }

    pub fn keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::Drilling => &["a", "c", "gamma", "M_lock"],
            ModelKind::DrillingMotor => &["L", "R", "S", "B", "I_inertia", "beta", "T0", "M_lock"],
            ModelKind::Watt => &["A", "B"],
            ModelKind::Chua => &["alpha", "beta", "gamma_c", "m0", "m1"],
            ModelKind::DoubleIntegrator => &[],
            ModelKind::FrictionLinear => &["A", "b", "c", "law", "alpha_s"],
        }
    }
}

pub fn drilling_params(p: &ParamSet) -> Result<DrillingParams, CliError> {
    Ok(DrillingParams {
        a: p.f64_or("a", 10.0)?,
        c: p.f64_or("c", 5.0)?,
        gamma: p.f64_or("gamma", 1.0)?,
        m_lock: p.f64_or("M_lock", 10.0)?,
    })
}

pub fn motor_params(p: &ParamSet) -> Result<DrillingMotorParams, CliError> {
    Ok(DrillingMotorParams {
        l: p.f64_or("L", 0.5)?,
        r: p.f64_or("R", 2.5)?,
        s: p.f64_or("S", 0.5)?,
        b: p.f64_or("B", 2.0)?,
        i_inertia: p.f64_or("I_inertia", 1.0)?,
        beta: p.f64_or("beta", 5.0)?,
        t0: p.f64_or("T0", 1.0)?,
        m_lock: p.f64_or("M_lock", 10.0)?,
    })
}

pub fn watt_params(p: &ParamSet) -> Result<WattParams, CliError> {
    Ok(WattParams {
        a: p.f64_or("A", 1.5)?,
        b: p.f64_or("B", 1.1)?,
    })
}

/// Builds the system for `kind`. Missing keys take the defaults listed in
/// the README; unknown keys are rejected.
pub fn build_model(kind: ModelKind, p: &ParamSet) -> Result<PiecewiseSystem, CliError> {
    p.only(kind.keys(), kind.name())?;
    let sys = match kind {
        ModelKind::Drilling => models::drilling_reduced(&drilling_params(p)?)?,
        ModelKind::DrillingMotor => models::drilling_motor(&motor_params(p)?)?,
        ModelKind::Watt => models::watt(&watt_params(p)?)?,
        ModelKind::Chua => {
            let d = ChuaParams::hidden_attractor();
            models::chua(&ChuaParams {
                alpha: p.f64_or("alpha", d.alpha)?,
                beta: p.f64_or("beta", d.beta)?,
                gamma_c: p.f64_or("gamma_c", d.gamma_c)?,
                m0: p.f64_or("m0", d.m0)?,
                m1: p.f64_or("m1", d.m1)?,
            })?
        }
        ModelKind::DoubleIntegrator => models::double_integrator_control(),
        ModelKind::FrictionLinear => {
            let list = |k: &str, d: &[f64]| match p.raw(k) {
                Some(_) => p.list_required(k),
                None => Ok(d.to_vec()),
            };
            let a = list("A", &[0.0, 1.0, -1.0, 0.0])?;
            let b = list("b", &[0.0, -1.0])?;
            let c = list("c", &[0.0, 1.0])?;
            let law = match p.raw("law").unwrap_or("symmetric") {
                "symmetric" => {
                    if p.raw("alpha_s").is_some() {
                        return Err(CliError::Spec("`alpha_s` needs law = static".into()));
                    }
                    FrictionLaw::Symmetric
                }
                "static" => FrictionLaw::StaticExceeds {
                    alpha_s: p.f64_or("alpha_s", 2.0)?,
                },
                other => {
                    return Err(CliError::Spec(format!(
                        "`law`: expected symmetric or static, got `{other}`"
                    )))
                }
            };
            models::friction_linear(&a, &b, &c, law)?
        }
    };
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Filippov,
    Ap,
    Gly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything `simulate` needs.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub model: ModelKind,
    pub params: ParamSet,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub solver: SolverKind,
    pub eps: Vec<f64>,
    pub config: SolverConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(CliError::Spec("t0 and t1 must be finite".into()));
        }
        if self.t1 < self.t0 {
            return Err(CliError::Spec(format!(
                "t1 = {} is before t0 = {}",
                self.t1, self.t0
            )));
        }
        match (self.solver, self.eps.is_empty()) {
            (SolverKind::Ap, true) => Err(CliError::Spec("--solver ap needs --eps".into())),
            (SolverKind::Filippov | SolverKind::Gly, false) => {
                Err(CliError::Spec("--eps only applies to --solver ap".into()))
            }
            _ => Ok(()),
        }?;
        self.config.validate()?;
        Ok(())
    }
}
