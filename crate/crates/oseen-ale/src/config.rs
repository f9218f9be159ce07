//! Flat sectioned key-value experiment configuration.
//!
//! ```text
//! # comment
//! [mesh]
//! nx = 8
//! ny = 8
//! [motion]
//! name = smooth-expansion
//! params = 0.1
//! ```

use std::collections::BTreeMap;

use crate::error::{Result, SolverError};
use crate::fem::ViscousForm;
use crate::mesh_motion::TimeQuadrature;
use crate::timestepper::{SchemeConfig, SchemeVariant};
use crate::vms::CoarseProjector;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub ny: usize,
    pub motion: String,
    pub motion_params: Vec<f64>,
    pub scheme: SchemeConfig,
    pub dt: f64,
    pub n_steps: usize,
    pub problem: String,
    /// Step sizes for the convergence study.
    pub dts: Vec<f64>,
    pub t_final: f64,
    /// Constant of the step-size condition.
    pub c: f64,
    /// Poincare-type constant of the midpoint-scheme estimate.
    pub c_omega: f64,
    /// Calibrated constant of the endpoint-scheme estimate.
    pub c_prime: f64,
    /// Time-quadrature rule for the geometric conservation check.
    pub gcl_rule: TimeQuadrature,
    /// Run the full standard sweep instead of a single case.
    pub sweep: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nx: 4,
            ny: 4,
            motion: "stationary".into(),
            motion_params: Vec::new(),
            scheme: SchemeConfig::default(),
            dt: 0.05,
            n_steps: 10,
            problem: "decay".into(),
            dts: vec![0.1, 0.05, 0.025, 0.0125],
            t_final: 0.5,
            c: 1.0,
            c_omega: 1.0,
            c_prime: 1.5,
            gcl_rule: TimeQuadrature::Midpoint,
            sweep: false,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|e| SolverError::Config(format!("{key}: bad number '{v}': {e}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|e| SolverError::Config(format!("{key}: bad integer '{v}': {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SolverError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let full = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            entries.insert(full, value.trim().to_string());
        }

        let mut cfg = ExperimentConfig::default();
        for (key, value) in &entries {
            match key.as_str() {
                "mesh.nx" => cfg.nx = parse_usize(key, value)?,
                "mesh.ny" => cfg.ny = parse_usize(key, value)?,
                "motion.name" => cfg.motion = value.clone(),
                "motion.params" => cfg.motion_params = parse_list(key, value)?,
                "scheme.variant" => {
                    cfg.scheme.variant = match value.as_str() {
                        "gcl-midpoint" => SchemeVariant::GclMidpoint,
                        "endpoint" => SchemeVariant::Endpoint,
                        v => {
                            return Err(SolverError::Config(format!(
                                "scheme.variant: unknown '{v}'"
                            )))
                        }
                    }
                }
                "scheme.mu" => cfg.scheme.mu = parse_f64(key, value)?,
                "scheme.mu_t" => cfg.scheme.mu_t = parse_f64(key, value)?,
                "scheme.dt" => cfg.dt = parse_f64(key, value)?,
                "scheme.n_steps" => cfg.n_steps = parse_usize(key, value)?,
                "scheme.quadrature_degree" => {
                    cfg.scheme.quadrature_degree = parse_usize(key, value)?
                }
                "scheme.solver_tolerance" => cfg.scheme.solver_tolerance = parse_f64(key, value)?,
                "scheme.projector" => {
                    cfg.scheme.projector = match value.as_str() {
                        "cellwise-constant" => CoarseProjector::CellwiseConstant,
                        "full-gradient" => CoarseProjector::FullGradient,
                        v => {
                            return Err(SolverError::Config(format!(
                                "scheme.projector: unknown '{v}'"
                            )))
                        }
                    }
                }
                "scheme.viscous_form" => {
                    cfg.scheme.viscous_form = match value.as_str() {
                        "gradient-gradient" => ViscousForm::GradientGradient,
                        "symmetric-gradient" => ViscousForm::SymmetricGradient,
                        v => {
                            return Err(SolverError::Config(format!(
                                "scheme.viscous_form: unknown '{v}'"
                            )))
                        }
                    }
                }
                "problem.name" => cfg.problem = value.clone(),
                "convergence.dts" => cfg.dts = parse_list(key, value)?,
                "convergence.t_final" => cfg.t_final = parse_f64(key, value)?,
                "condition.c" => cfg.c = parse_f64(key, value)?,
                "condition.c_omega" => cfg.c_omega = parse_f64(key, value)?,
                "condition.c_prime" => cfg.c_prime = parse_f64(key, value)?,
                "gcl.rule" => {
                    cfg.gcl_rule = match value.as_str() {
                        "midpoint" => TimeQuadrature::Midpoint,
                        "left-endpoint" => TimeQuadrature::LeftEndpoint,
                        "gauss5" => TimeQuadrature::Gauss5,
                        v => return Err(SolverError::Config(format!("gcl.rule: unknown '{v}'"))),
                    }
                }
                "sweep.enabled" => {
                    cfg.sweep = match value.as_str() {
                        "true" => true,
                        "false" => false,
                        v => {
                            return Err(SolverError::Config(format!(
                                "sweep.enabled: expected true/false, got '{v}'"
                            )))
                        }
                    }
                }
                other => {
                    return Err(SolverError::Config(format!("unknown key '{other}'")));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(SolverError::Config("mesh.nx and mesh.ny must be >= 2".into()));
        }
        if self.scheme.mu <= 0.0 {
            return Err(SolverError::Config("scheme.mu must be positive".into()));
        }
        if self.scheme.mu_t < 0.0 {
            return Err(SolverError::Config("scheme.mu_t must be nonnegative".into()));
        }
        if self.dt <= 0.0 {
            return Err(SolverError::Config("scheme.dt must be positive".into()));
        }
        if self.n_steps < 1 {
            return Err(SolverError::Config("scheme.n_steps must be >= 1".into()));
        }
        // registry names must resolve
        crate::mesh_motion::MotionProgram::from_registry(&self.motion, &self.motion_params)?;
        crate::analysis::problem_from_registry(&self.problem, self.scheme.mu)?;
        Ok(())
    }

    /// Serialization mirror of `parse`.
    pub fn to_text(&self) -> String {
        let params = self
            .motion_params
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let dts = self
            .dts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "[mesh]\nnx = {}\nny = {}\n\n[motion]\nname = {}\nparams = {}\n\n\
             [scheme]\nvariant = {}\nmu = {}\nmu_t = {}\ndt = {}\nn_steps = {}\n\
             quadrature_degree = {}\nsolver_tolerance = {}\nprojector = {}\nviscous_form = {}\n\n\
             [problem]\nname = {}\n\n[convergence]\ndts = {}\nt_final = {}\n\n\
             [condition]\nc = {}\nc_omega = {}\nc_prime = {}\n\n[gcl]\nrule = {}\n\n\
             [sweep]\nenabled = {}\n",
            self.nx,
            self.ny,
            self.motion,
            params,
            self.scheme.variant,
            self.scheme.mu,
            self.scheme.mu_t,
            self.dt,
            self.n_steps,
            self.scheme.quadrature_degree,
            self.scheme.solver_tolerance,
            match self.scheme.projector {
                CoarseProjector::CellwiseConstant => "cellwise-constant",
                CoarseProjector::FullGradient => "full-gradient",
            },
            match self.scheme.viscous_form {
                ViscousForm::GradientGradient => "gradient-gradient",
                ViscousForm::SymmetricGradient => "symmetric-gradient",
            },
            self.problem,
            dts,
            self.t_final,
            self.c,
            self.c_omega,
            self.c_prime,
            match self.gcl_rule {
                TimeQuadrature::Midpoint => "midpoint",
                TimeQuadrature::LeftEndpoint => "left-endpoint",
                TimeQuadrature::Gauss5 => "gauss5",
            },
            self.sweep,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_and_round_trip() {
        let cfg = ExperimentConfig::parse("[mesh]\nnx = 6\nny = 6\n").unwrap();
        assert_eq!((cfg.nx, cfg.ny), (6, 6));
        let text = cfg.to_text();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("[mesh]\nnx = 1\n").is_err());
        assert!(ExperimentConfig::parse("[scheme]\nmu = 0\n").is_err());
        assert!(ExperimentConfig::parse("[scheme]\ndt = -0.1\n").is_err());
        assert!(ExperimentConfig::parse("[motion]\nname = warp\n").is_err());
        assert!(ExperimentConfig::parse("[problem]\nname = vortex\n").is_err());
        assert!(ExperimentConfig::parse("nonsense line\n").is_err());
        assert!(ExperimentConfig::parse("[mesh]\nunknown = 3\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = ExperimentConfig::parse(
            "# experiment\n\n[scheme]\nmu = 0.01 # low viscosity\n\n[gcl]\nrule = gauss5\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme.mu, 0.01);
        assert_eq!(cfg.gcl_rule, TimeQuadrature::Gauss5);
    }
}
