use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::Result;
use crate::gaussian::GaussianState;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DerivativeMethod {
    Analytic,
    /// Richardson-extrapolated central difference with outer step `h`.
    CentralDifference {
        h: f64,
    },
}

/// `∂_C` of a Gaussian family at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDerivative {
    pub d_dot: Vector4<C64>,
    pub sigma_dot: Matrix4<C64>,
    pub method: DerivativeMethod,
}

impl ParamDerivative {
    pub fn zero(method: DerivativeMethod) -> Self {
        Self {
            d_dot: Vector4::zeros(),
            sigma_dot: Matrix4::zeros(),
            method,
        }
    }
}

/// Default finite-difference step, `1e-5 * max(|C|, 1)`.
pub fn default_step(c: f64) -> f64 {
    1e-5 * c.abs().max(1.0)
}

fn plain_difference<F>(family: &F, c: f64, h: f64) -> Result<(Vector4<C64>, Matrix4<C64>)>
where
    F: Fn(f64) -> Result<GaussianState>,
{
    let plus = family(c + h)?;
    let minus = family(c - h)?;
    let scale = 1.0 / (2.0 * h);
    Ok((
        (plus.d() - minus.d()) * C64::new(scale, 0.0),
        (plus.sigma() - minus.sigma()) * C64::new(scale, 0.0),
    ))
}

/// Central difference at steps `h` and `h/2`, combined as `(4 D(h/2) - D(h)) / 3`.
pub fn central_difference<F>(family: F, c: f64, h: f64) -> Result<ParamDerivative>
where
    F: Fn(f64) -> Result<GaussianState>,
{
    let (d1, s1) = plain_difference(&family, c, h)?;
    let (d2, s2) = plain_difference(&family, c, h / 2.0)?;
    let four = C64::new(4.0, 0.0);
    let third = C64::new(1.0 / 3.0, 0.0);
    Ok(ParamDerivative {
        d_dot: (d2 * four - d1) * third,
        sigma_dot: (s2 * four - s1) * third,
        method: DerivativeMethod::CentralDifference { h },
    })
}
