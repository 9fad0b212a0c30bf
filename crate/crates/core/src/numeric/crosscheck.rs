use num_complex::Complex64;

use super::{class_coefficient, NumericError, ParamManifold, QuadratureSpec};
use crate::classes::{bott_rep, dbott_rep};
use crate::foliation::{ChartFoliation, DeformationData};

/// λ may not lie on the closed negative real axis: there λ|z₁|² + |z₂|² vanishes
/// somewhere on S³.
pub fn admissible_lambda(lambda: Complex64) -> bool {
    !(lambda.im == 0.0 && lambda.re <= 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub lambda0: Complex64,
    pub h: f64,
    pub bott_minus: Complex64,
    pub bott_plus: Complex64,
    /// (Bott(λ0+h) − Bott(λ0−h))/2h
    pub finite_difference: Complex64,
    pub dbott: Complex64,
    pub difference: f64,
}

/// Compares the central difference of Bott in `param` with the DBott coefficient of
/// the given deformation at λ0. The step is along the real direction.
pub fn derivative_crosscheck(
    chart: &ChartFoliation,
    deformation: &DeformationData,
    param: &str,
    manifold: &ParamManifold,
    quad: &QuadratureSpec,
    lambda0: Complex64,
    h: f64,
) -> Result<CrosscheckReport, NumericError> {
    let at = |l: Complex64| -> Result<ParamManifold, NumericError> {
        if !admissible_lambda(l) {
            return Err(NumericError::Inadmissible(format!("{param} = {l}")));
        }
        Ok(manifold.clone().with_parameter(param, l))
    };
    let bott = bott_rep(chart);
    let bott_minus = class_coefficient(&bott, &at(lambda0 - h)?, quad)?;
    let bott_plus = class_coefficient(&bott, &at(lambda0 + h)?, quad)?;
    let dbott = class_coefficient(&dbott_rep(chart, deformation), &at(lambda0)?, quad)?;
    let finite_difference = (bott_plus - bott_minus) / (2.0 * h);
    Ok(CrosscheckReport {
        lambda0,
        h,
        bott_minus,
        bott_plus,
        finite_difference,
        dbott,
        difference: (finite_difference - dbott).norm(),
    })
}
