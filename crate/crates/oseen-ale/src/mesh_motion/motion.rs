//! Prescribed analytic domain motions and their registry.

use crate::error::{Result, SolverError};

type Map2 = Box<dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>;

/// Analytic domain motion: a map `(t, Y) -> x` starting at the identity,
/// together with its exact time derivative for oracle checks.
pub struct MotionProgram {
    name: String,
    displacement: Map2,
    displacement_time_derivative: Map2,
}

impl MotionProgram {
    pub fn new(name: &str, displacement: Map2, displacement_time_derivative: Map2) -> Self {
        Self {
            name: name.to_string(),
            displacement,
            displacement_time_derivative,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn displacement(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        (self.displacement)(t, y)
    }

    pub fn displacement_time_derivative(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        (self.displacement_time_derivative)(t, y)
    }

    /// Looks up a motion by registry name. Parameter counts are validated.
    ///
    /// Registry:
    /// - `stationary` ()
    /// - `translation` (vx, vy)
    /// - `expansion` (alpha): `x = (1 + alpha t) Y`
    /// - `shear` (rate): `x = (Y1 + rate t Y2, Y2)`
    /// - `smooth-expansion` (amp): `x = (1 + amp t sin(pi Y1)) Y`
    /// - `quadratic-expansion` (alpha): `x = (1 + alpha t^2) Y`
    pub fn from_registry(name: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                Err(SolverError::InvalidMotion(format!(
                    "motion '{name}' expects {n} parameter(s), got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "stationary" => {
                need(0)?;
                Ok(Self::new(
                    name,
                    Box::new(|_, y| y),
                    Box::new(|_, _| [0.0, 0.0]),
                ))
            }
            "translation" => {
                need(2)?;
                let (vx, vy) = (params[0], params[1]);
                Ok(Self::new(
                    name,
                    Box::new(move |t, y| [y[0] + t * vx, y[1] + t * vy]),
                    Box::new(move |_, _| [vx, vy]),
                ))
            }
            "expansion" => {
                need(1)?;
                let a = params[0];
                Ok(Self::new(
                    name,
                    Box::new(move |t, y| [(1.0 + a * t) * y[0], (1.0 + a * t) * y[1]]),
                    Box::new(move |_, y| [a * y[0], a * y[1]]),
                ))
            }
            "shear" => {
                need(1)?;
                let r = params[0];
                Ok(Self::new(
                    name,
                    Box::new(move |t, y| [y[0] + r * t * y[1], y[1]]),
                    Box::new(move |_, y| [r * y[1], 0.0]),
                ))
            }
            "smooth-expansion" => {
                need(1)?;
                let a = params[0];
                Ok(Self::new(
                    name,
                    Box::new(move |t, y| {
                        let s = 1.0 + a * t * (std::f64::consts::PI * y[0]).sin();
                        [s * y[0], s * y[1]]
                    }),
                    Box::new(move |_, y| {
                        let s = a * (std::f64::consts::PI * y[0]).sin();
                        [s * y[0], s * y[1]]
                    }),
                ))
            }
            "quadratic-expansion" => {
                need(1)?;
                let a = params[0];
                Ok(Self::new(
                    name,
                    Box::new(move |t, y| [(1.0 + a * t * t) * y[0], (1.0 + a * t * t) * y[1]]),
                    Box::new(move |t, y| [2.0 * a * t * y[0], 2.0 * a * t * y[1]]),
                ))
            }
            other => Err(SolverError::InvalidMotion(format!(
                "unknown motion '{other}'"
            ))),
        }
    }
}

impl std::fmt::Debug for MotionProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MotionProgram").field("name", &self.name).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_resolve() {
        for (name, params) in [
            ("stationary", vec![]),
            ("translation", vec![1.0, 0.0]),
            ("expansion", vec![0.1]),
            ("shear", vec![0.1]),
            ("smooth-expansion", vec![0.1]),
            ("quadratic-expansion", vec![0.1]),
        ] {
            let m = MotionProgram::from_registry(name, &params).unwrap();
            // identity at t = 0
            let y = [0.3, 0.7];
            let x = m.displacement(0.0, y);
            assert!((x[0] - y[0]).abs() < 1e-15 && (x[1] - y[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_name_or_bad_params_rejected() {
        assert!(MotionProgram::from_registry("vortex", &[]).is_err());
        assert!(MotionProgram::from_registry("expansion", &[0.1, 0.2]).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = MotionProgram::from_registry("smooth-expansion", &[0.1]).unwrap();
        let y = [0.4, 0.6];
        let (t, h) = (0.5, 1e-6);
        let a = m.displacement(t + h, y);
        let b = m.displacement(t - h, y);
        let d = m.displacement_time_derivative(t, y);
        for c in 0..2 {
            assert!(((a[c] - b[c]) / (2.0 * h) - d[c]).abs() < 1e-8);
        }
    }
}
