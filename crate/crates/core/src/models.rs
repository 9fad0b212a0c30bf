//! Concrete foliations used as worked examples.

use std::sync::Arc;

use crate::cdga::{AlgebraError, FormExpr, Universe};
use crate::foliation::{solve_connection, Category, ChartFoliation, DeformationData, FoliationError};

/// The transversely holomorphic flow on S³ ⊂ ℂ² given by ω = z₂dz₁ − λz₁dz₂.
///
/// The universe has z1, z2 with conjugates zb1, zb2, the circle coordinate t and the
/// parameter `lambda`. The connection is η = −(λ+1)(z̄₁dz₁ + z̄₂dz₂)/(λ|z₁|² + |z₂|²)
/// and the deformation is ∂/∂λ.
#[derive(Clone, Debug)]
pub struct S3Family {
    pub universe: Arc<Universe>,
    pub chart: ChartFoliation,
    pub deformation: DeformationData,
}

pub const S3_OMEGA: &str = "z2*dz1 - lambda*z1*dz2";
pub const S3_ETA: &str = "-(lambda + 1)*(zb1*dz1 + zb2*dz2)/(lambda*z1*zb1 + z2*zb2)";

pub fn s3_universe() -> Result<Arc<Universe>, AlgebraError> {
    Universe::builder()
        .coordinate("z1")
        .coordinate("z2")
        .coordinate("zb1")
        .coordinate("zb2")
        .conjugates("z1", "zb1")
        .conjugates("z2", "zb2")
        .coordinate("t")
        .parameter("lambda")
        .build()
}

impl S3Family {
    pub fn new() -> Result<Self, FoliationError> {
        let u = s3_universe()?;
        let omega = FormExpr::parse(&u, S3_OMEGA)?;
        let eta = FormExpr::parse(&u, S3_ETA)?;
        S3Family::from_parts(&u, omega, eta)
    }

    /// Same family with η found by the connection solver from the ansatz
    /// {z̄₁dz₁/h, z̄₂dz₂/h}.
    pub fn solved() -> Result<Self, FoliationError> {
        let u = s3_universe()?;
        let omega = FormExpr::parse(&u, S3_OMEGA)?;
        let h = "(lambda*z1*zb1 + z2*zb2)";
        let ansatz = [FormExpr::parse(&u, &format!("zb1*dz1/{h}"))?, FormExpr::parse(&u, &format!("zb2*dz2/{h}"))?];
        let eta = solve_connection(&omega, &ansatz, None)?;
        S3Family::from_parts(&u, omega, eta)
    }

    fn from_parts(u: &Arc<Universe>, omega: FormExpr, eta: FormExpr) -> Result<Self, FoliationError> {
        let chart = ChartFoliation::new(u, Category::Holomorphic, vec![vec![eta]], vec![omega])?;
        let deformation = DeformationData::parameter_derivative(&chart, "lambda")?;
        Ok(S3Family { universe: Arc::clone(u), chart, deformation })
    }
}

/// ½α∧dα with α = (1/2√−1)Σ(z̄dz − zdz̄); pulls back to the round volume form.
pub fn s3_volume_form(universe: &Arc<Universe>) -> Result<FormExpr, AlgebraError> {
    let alpha = FormExpr::parse(universe, "(zb1*dz1 - z1*dzb1 + zb2*dz2 - z2*dzb2)/(2*i)")?;
    let half = FormExpr::parse(universe, "1/2")?;
    Ok(&(&half * &alpha) * &alpha.exterior_d())
}
