use super::{ChartFoliation, FoliationError, VectorValuedForm};
use crate::cdga::FormExpr;
use crate::scalar::{GaussRational, Scalar};

/// Reads θ = Σ f_i dy^i off the chart; fails unless every term of θ is a degree-0
/// coefficient times a single transverse coframe generator.
pub(crate) fn theta_coefficients(chart: &ChartFoliation) -> Result<Vec<Scalar>, FoliationError> {
    let coframe = chart.transverse_coframe();
    if coframe.len() != chart.q() {
        return Err(FoliationError::Precondition(
            "theta must be written against a named transverse coframe dy^1..dy^q".into(),
        ));
    }
    let theta = chart.theta();
    let mut f = vec![Scalar::zero(); chart.q()];
    for (mask, coef) in theta.terms() {
        match coframe.iter().position(|&g| mask == 1 << g) {
            Some(i) => f[i] = coef.clone(),
            None => {
                return Err(FoliationError::Precondition(format!(
                    "theta term {} is not a multiple of a transverse coframe element",
                    FormExpr::monomial(theta.universe(), mask, coef.clone()).render()
                )))
            }
        }
    }
    Ok(f)
}

/// N_i = df_i − Σ_j (1/(q+1)) f_i f_j dy^j.
pub fn projective_curvature(chart: &ChartFoliation) -> Result<Vec<FormExpr>, FoliationError> {
    let f = theta_coefficients(chart)?;
    let u = chart.universe();
    let q = chart.q();
    let k = GaussRational::from_ratio(-1, q as i64 + 1);
    let coframe = chart.transverse_coframe();
    Ok((0..q)
        .map(|i| {
            let mut n = FormExpr::scalar(u, f[i].clone()).exterior_d();
            for j in 0..q {
                let c = f[i].mul(&f[j]).scale(&k);
                n = &n + &FormExpr::monomial(u, 1 << coframe[j], c);
            }
            n
        })
        .collect())
}

/// d(Σ_i N_i∧c^i)∧(dθ)^{q−1}.
pub fn lp_representative(chart: &ChartFoliation, c: &VectorValuedForm) -> Result<FormExpr, FoliationError> {
    let n = projective_curvature(chart)?;
    if c.dim() != chart.q() {
        return Err(FoliationError::DimensionMismatch { expected: chart.q(), got: c.dim() });
    }
    let u = chart.universe();
    let mut nc = FormExpr::zero(u);
    for (ni, ci) in n.iter().zip(c.components()) {
        nc = nc.checked_add(&ni.wedge(ci)?)?;
    }
    let dtheta = chart.theta().exterior_d();
    Ok(&nc.exterior_d() * &dtheta.wedge_pow(chart.q() as u32 - 1))
}
