use std::sync::Arc;

use super::{Category, FoliationError};
use crate::cdga::{wedge_sign, AlgebraError, FormExpr, SymbolRef, Universe};

/// One local model of a foliated chart in a fixed frame.
#[derive(Clone, Debug)]
pub struct ChartFoliation {
    universe: Arc<Universe>,
    category: Category,
    tau: Vec<Vec<FormExpr>>,
    omega: Vec<FormExpr>,
    transverse: Vec<usize>,
    theta_e: Option<FormExpr>,
    twist_index: Option<i64>,
}

fn check_one_forms<'a>(
    universe: &Arc<Universe>,
    what: &str,
    forms: impl IntoIterator<Item = &'a FormExpr>,
) -> Result<(), FoliationError> {
    for f in forms {
        if !f.same_universe(&FormExpr::zero(universe)) {
            return Err(AlgebraError::UniverseMismatch.into());
        }
        if !f.is_homogeneous_of(1) {
            return Err(FoliationError::WrongDegree { what: what.to_string(), degree: 1 });
        }
    }
    Ok(())
}

impl ChartFoliation {
    pub fn new(
        universe: &Arc<Universe>,
        category: Category,
        tau: Vec<Vec<FormExpr>>,
        omega: Vec<FormExpr>,
    ) -> Result<Self, FoliationError> {
        let q = tau.len();
        if q == 0 {
            return Err(FoliationError::Precondition("codimension must be positive".into()));
        }
        for row in &tau {
            if row.len() != q {
                return Err(FoliationError::DimensionMismatch { expected: q, got: row.len() });
            }
        }
        if omega.len() != q {
            return Err(FoliationError::DimensionMismatch { expected: q, got: omega.len() });
        }
        check_one_forms(universe, "tau entry", tau.iter().flatten())?;
        check_one_forms(universe, "omega entry", &omega)?;
        Ok(ChartFoliation {
            universe: Arc::clone(universe),
            category,
            tau,
            omega,
            transverse: Vec::new(),
            theta_e: None,
            twist_index: None,
        })
    }

    /// Names the transverse coframe `dy¹..dy^q`; each must be a transverse generator.
    pub fn with_transverse_coframe(mut self, names: &[&str]) -> Result<Self, FoliationError> {
        if names.len() != self.q() {
            return Err(FoliationError::DimensionMismatch { expected: self.q(), got: names.len() });
        }
        let mut ids = Vec::with_capacity(names.len());
        for n in names {
            let g = self.universe.generator_id(n)?;
            if !self.universe.is_transverse(g) {
                return Err(FoliationError::Precondition(format!("`{n}` is not a transverse generator")));
            }
            ids.push(g);
        }
        self.transverse = ids;
        Ok(self)
    }

    /// Sets θ^e, the connection form with respect to a global trivialization e of the
    /// anticanonical bundle, when it differs from tr τ. Only a closed shift is allowed,
    /// so dθ^e = dθ.
    pub fn with_trivialization_form(mut self, theta_e: FormExpr) -> Result<Self, FoliationError> {
        check_one_forms(&self.universe, "theta_e", [&theta_e])?;
        let shift = &theta_e - &self.theta();
        if !shift.exterior_d().is_zero() {
            return Err(FoliationError::Precondition(format!(
                "theta_e - theta must be closed, d of it is {}",
                shift.exterior_d().render()
            )));
        }
        self.theta_e = Some(theta_e);
        Ok(self)
    }

    /// Replaces τ, ω by a gauge-transformed pair whose trace moved by `shift`.
    pub(crate) fn with_twist(
        mut self,
        tau: Vec<Vec<FormExpr>>,
        omega: Vec<FormExpr>,
        shift: &FormExpr,
        m: i64,
    ) -> Self {
        self.tau = tau;
        self.omega = omega;
        if let Some(te) = &self.theta_e {
            self.theta_e = Some(te + shift);
        }
        self.twist_index = Some(self.twist_index.unwrap_or(0) + m);
        self
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn q(&self) -> usize {
        self.tau.len()
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn tau(&self) -> &[Vec<FormExpr>] {
        &self.tau
    }

    pub fn omega(&self) -> &[FormExpr] {
        &self.omega
    }

    /// Generator ids of the transverse coframe, empty if none was named.
    pub fn transverse_coframe(&self) -> &[usize] {
        &self.transverse
    }

    pub fn twist_index(&self) -> Option<i64> {
        self.twist_index
    }

    /// θ = tr τ, recomputed on every call.
    pub fn theta(&self) -> FormExpr {
        (0..self.q()).fold(FormExpr::zero(&self.universe), |acc, i| &acc + &self.tau[i][i])
    }

    /// θ^e if one was set, otherwise θ.
    pub fn theta_e(&self) -> FormExpr {
        self.theta_e.clone().unwrap_or_else(|| self.theta())
    }

    /// Components of `dω + τ∧ω`; all zero when τ is compatible with ω.
    pub fn structure_residual(&self) -> Vec<FormExpr> {
        (0..self.q())
            .map(|i| {
                let mut r = self.omega[i].exterior_d();
                for j in 0..self.q() {
                    r = &r + &(&self.tau[i][j] * &self.omega[j]);
                }
                r
            })
            .collect()
    }
}

/// ω̇, τ̇ with θ̇ = tr τ̇.
#[derive(Clone, Debug)]
pub struct DeformationData {
    omega_dot: Vec<FormExpr>,
    tau_dot: Vec<Vec<FormExpr>>,
}

fn render_components(v: &[FormExpr]) -> String {
    let parts: Vec<String> = v.iter().map(|f| f.render()).collect();
    format!("[{}]", parts.join("; "))
}

impl DeformationData {
    /// Validates shapes, degrees and the deformation relation.
    pub fn new(
        chart: &ChartFoliation,
        omega_dot: Vec<FormExpr>,
        tau_dot: Vec<Vec<FormExpr>>,
    ) -> Result<Self, FoliationError> {
        let d = DeformationData::unchecked(chart, omega_dot, tau_dot)?;
        let residual = d.relation_residual(chart);
        if residual.iter().any(|r| !r.is_zero()) {
            return Err(FoliationError::DeformationRelation { residual: render_components(&residual) });
        }
        Ok(d)
    }

    /// Validates shapes and degrees only; the relation may fail.
    pub fn unchecked(
        chart: &ChartFoliation,
        omega_dot: Vec<FormExpr>,
        tau_dot: Vec<Vec<FormExpr>>,
    ) -> Result<Self, FoliationError> {
        let q = chart.q();
        if omega_dot.len() != q {
            return Err(FoliationError::DimensionMismatch { expected: q, got: omega_dot.len() });
        }
        if tau_dot.len() != q {
            return Err(FoliationError::DimensionMismatch { expected: q, got: tau_dot.len() });
        }
        for row in &tau_dot {
            if row.len() != q {
                return Err(FoliationError::DimensionMismatch { expected: q, got: row.len() });
            }
        }
        check_one_forms(chart.universe(), "omega_dot entry", &omega_dot)?;
        check_one_forms(chart.universe(), "tau_dot entry", tau_dot.iter().flatten())?;
        Ok(DeformationData { omega_dot, tau_dot })
    }

    /// The derivative of the chart's own data in a parameter: ω̇ = ∂ω, τ̇ = ∂τ.
    pub fn parameter_derivative(chart: &ChartFoliation, param: &str) -> Result<Self, FoliationError> {
        let omega_dot = chart.omega().iter().map(|w| w.param_derivative(param)).collect::<Result<_, _>>()?;
        let tau_dot = chart
            .tau()
            .iter()
            .map(|row| row.iter().map(|t| t.param_derivative(param)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        DeformationData::new(chart, omega_dot, tau_dot)
    }

    /// Completes a user-supplied ω̇ by solving Σ_j τ̇^i_j∧dy^j = −(dω̇ + τ∧ω̇)^i. The
    /// chart's coframe must be the transverse coframe `(dy¹, …, dy^q)`.
    pub fn from_omega_dot(chart: &ChartFoliation, omega_dot: Vec<FormExpr>) -> Result<Self, FoliationError> {
        let q = chart.q();
        let coframe = chart.transverse_coframe();
        if coframe.len() != q {
            return Err(FoliationError::Precondition("chart has no transverse coframe".into()));
        }
        let u = chart.universe();
        for (i, &g) in coframe.iter().enumerate() {
            if chart.omega()[i] != FormExpr::monomial(u, 1 << g, crate::scalar::Scalar::one()) {
                return Err(FoliationError::Precondition(format!(
                    "omega component {} is not the transverse coframe element {}",
                    i + 1,
                    u.generator_name(g)
                )));
            }
        }
        if omega_dot.len() != q {
            return Err(FoliationError::DimensionMismatch { expected: q, got: omega_dot.len() });
        }
        check_one_forms(u, "omega_dot entry", &omega_dot)?;
        let mut tau_dot = vec![vec![FormExpr::zero(u); q]; q];
        for i in 0..q {
            let mut target = omega_dot[i].exterior_d();
            for j in 0..q {
                target = &target + &(&chart.tau()[i][j] * &omega_dot[j]);
            }
            let target = -&target;
            for (mask, coef) in target.terms() {
                // factor out the highest-index coframe generator present
                let Some(j) = (0..q).rev().find(|&j| mask & (1 << coframe[j]) != 0) else {
                    return Err(FoliationError::NoSolution {
                        residual: format!(
                            "component {}: term {} has no transverse factor",
                            i + 1,
                            FormExpr::monomial(u, mask, coef.clone()).render()
                        ),
                    });
                };
                let bit = 1u64 << coframe[j];
                let rest = mask ^ bit;
                let neg = wedge_sign(rest, bit).expect("disjoint");
                let c = if neg { coef.neg() } else { coef.clone() };
                tau_dot[i][j] = &tau_dot[i][j] + &FormExpr::monomial(u, rest, c);
            }
        }
        DeformationData::new(chart, omega_dot, tau_dot)
    }

    pub fn omega_dot(&self) -> &[FormExpr] {
        &self.omega_dot
    }

    pub fn tau_dot(&self) -> &[Vec<FormExpr>] {
        &self.tau_dot
    }

    /// θ̇ = tr τ̇.
    pub fn theta_dot(&self) -> FormExpr {
        let u = self.omega_dot[0].universe();
        (0..self.tau_dot.len()).fold(FormExpr::zero(u), |acc, i| &acc + &self.tau_dot[i][i])
    }

    /// Components of `dω̇ + τ∧ω̇ + τ̇∧ω`.
    pub fn relation_residual(&self, chart: &ChartFoliation) -> Vec<FormExpr> {
        let q = chart.q();
        (0..q)
            .map(|i| {
                let mut r = self.omega_dot[i].exterior_d();
                for j in 0..q {
                    r = &r + &(&chart.tau()[i][j] * &self.omega_dot[j]);
                    r = &r + &(&self.tau_dot[i][j] * &chart.omega()[j]);
                }
                r
            })
            .collect()
    }
}

/// `c = Σ e_i ⊗ c^i` in the chart's fixed frame.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorValuedForm {
    components: Vec<FormExpr>,
}

impl VectorValuedForm {
    pub fn new(components: Vec<FormExpr>) -> Result<Self, FoliationError> {
        let Some(first) = components.first() else {
            return Err(FoliationError::Malformed("vector-valued form needs at least one component".into()));
        };
        let degree = components.iter().find_map(|c| c.degree());
        for c in &components {
            if !c.same_universe(first) {
                return Err(AlgebraError::UniverseMismatch.into());
            }
            if let Some(d) = degree {
                if !c.is_homogeneous_of(d) {
                    return Err(FoliationError::WrongDegree { what: "vector-valued form component".into(), degree: d });
                }
            } else if !c.is_zero() {
                return Err(FoliationError::Malformed("component is not homogeneous".into()));
            }
        }
        Ok(VectorValuedForm { components })
    }

    pub fn from_symbols(universe: &Arc<Universe>, names: &[&str]) -> Result<Self, FoliationError> {
        let comps = names
            .iter()
            .map(|n| match universe.lookup(n) {
                Some(SymbolRef::Scalar(_)) | Some(SymbolRef::Generator(_)) => Ok(FormExpr::symbol(universe, n)?),
                None => Err(FoliationError::from(AlgebraError::Undeclared(n.to_string()))),
            })
            .collect::<Result<_, _>>()?;
        VectorValuedForm::new(comps)
    }

    pub fn components(&self) -> &[FormExpr] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> Option<usize> {
        self.components.iter().find_map(|c| c.degree())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn reduce_mod_ideal(&self, k: i64) -> Result<VectorValuedForm, FoliationError> {
        let components = self.components.iter().map(|c| c.reduce_mod_ideal(k)).collect::<Result<_, _>>()?;
        Ok(VectorValuedForm { components })
    }

    pub fn map(&self, f: impl Fn(&FormExpr) -> FormExpr) -> VectorValuedForm {
        VectorValuedForm { components: self.components.iter().map(f).collect() }
    }
}

/// `d_F c = (dc^i + Σ_j τ^i_j∧c^j) mod I₁`.
pub fn covariant_d(c: &VectorValuedForm, chart: &ChartFoliation) -> Result<VectorValuedForm, FoliationError> {
    let q = chart.q();
    if c.dim() != q {
        return Err(FoliationError::DimensionMismatch { expected: q, got: c.dim() });
    }
    let mut out = Vec::with_capacity(q);
    for i in 0..q {
        let mut r = c.components[i].exterior_d();
        for j in 0..q {
            r = r.checked_add(&chart.tau()[i][j].wedge(&c.components[j])?)?;
        }
        out.push(r.reduce_mod_ideal(1)?);
    }
    Ok(VectorValuedForm { components: out })
}

/// Componentwise θ^e∧c.
pub fn theta_wedge(chart: &ChartFoliation, c: &VectorValuedForm) -> Result<VectorValuedForm, FoliationError> {
    let theta = chart.theta_e();
    let components = c.components.iter().map(|ci| theta.wedge(ci)).collect::<Result<_, _>>()?;
    Ok(VectorValuedForm { components })
}
