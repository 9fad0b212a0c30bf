//! Named chain-level identities, checked by exact normal-form differences.

use std::fmt;
use std::str::FromStr;

use super::projective::theta_coefficients;
use super::{
    covariant_d, lp_representative, theta_wedge, ChartFoliation, DeformationData, FoliationError, GenericChart,
    GenericTwist, VectorValuedForm,
};
use crate::cdga::FormExpr;
use crate::scalar::{GaussRational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Identity {
    /// (dθ)^q = ε(q)·q!·df₁∧⋯∧df_q∧dy¹∧⋯∧dy^q
    DthetaPow,
    /// L_P(θ^e∧ω̇) = (1/q)·θ̇∧θ^e∧(dθ)^q
    LemmaLp,
    /// η̇°∧η°∧(dη°)^q = η̇∧η∧(dη)^q + m·(dt/t)∧η̇∧(dη)^q
    Prop31Expansion,
    /// d_F c = 0 ⇒ d_F(θ^e∧c) = 0, and θ^e∧d_F f = d_F(−θ^e∧f)
    Lemma21Closed,
}

impl Identity {
    pub const ALL: [Identity; 4] =
        [Identity::DthetaPow, Identity::LemmaLp, Identity::Prop31Expansion, Identity::Lemma21Closed];

    pub fn name(self) -> &'static str {
        match self {
            Identity::DthetaPow => "dtheta-pow",
            Identity::LemmaLp => "lemma-LP",
            Identity::Prop31Expansion => "prop31-expansion",
            Identity::Lemma21Closed => "lemma21-closed",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Identity {
    type Err = FoliationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::ALL.into_iter().find(|i| i.name() == s).ok_or_else(|| FoliationError::UnknownIdentity(s.to_string()))
    }
}

/// Data an identity is checked on. Each identity reads the fields it needs.
#[derive(Clone, Debug, Default)]
pub struct IdentityInstance {
    pub chart: Option<ChartFoliation>,
    pub deformation: Option<DeformationData>,
    /// A d_F-closed section (lemma21-closed).
    pub section: Option<VectorValuedForm>,
    /// A section f whose d_F is checked against θ∧ (lemma21-closed).
    pub primitive: Option<VectorValuedForm>,
    pub twist: Option<TwistExpansion>,
}

impl IdentityInstance {
    /// A seeded generic instance in codimension q carrying the data of every identity.
    pub fn generic(q: usize, seed: u64) -> Result<Self, FoliationError> {
        let g = GenericChart::new(q, seed)?;
        let t = GenericTwist::new(q, seed)?;
        Ok(IdentityInstance {
            section: Some(g.closed_section()?),
            primitive: Some(g.primitive.clone()),
            chart: Some(g.chart),
            deformation: Some(g.deformation),
            twist: Some((&t).into()),
        })
    }
}

/// η, η̇ with a circle coordinate and a (possibly symbolic) twist index.
#[derive(Clone, Debug)]
pub struct TwistExpansion {
    pub q: usize,
    pub eta: FormExpr,
    pub eta_dot: FormExpr,
    /// Name of the circle coordinate t; `dt` must be declared.
    pub t: String,
    pub m: Scalar,
}

impl From<&GenericTwist> for TwistExpansion {
    fn from(g: &GenericTwist) -> Self {
        let m = g.universe.scalar_id("m").expect("generic twist declares m");
        TwistExpansion { q: g.q, eta: g.eta.clone(), eta_dot: g.eta_dot.clone(), t: "t".into(), m: Scalar::var(m) }
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub identity: Identity,
    pub q: usize,
    /// Left minus right, one entry per component; all empty iff verified.
    pub differences: Vec<FormExpr>,
    /// For dtheta-pow: the sign s with (dθ)^q = s·q!·df₁∧⋯∧dy^q found by expansion.
    pub sign: Option<i64>,
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.differences.iter().all(|d| d.is_zero())
    }

    pub fn residual_text(&self) -> String {
        let parts: Vec<String> = self.differences.iter().map(|d| d.render()).collect();
        parts.join("; ")
    }
}

/// ε(q) = (−1)^{q(q−1)/2}: the sign of moving dy^i past df_{i+1},…,df_q in
/// Π(df_i∧dy^i) to reach df₁∧⋯∧df_q∧dy¹∧⋯∧dy^q in declaration order.
pub fn dtheta_pow_sign(q: usize) -> i64 {
    if (q * q.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn factorial(q: usize) -> i64 {
    (1..=q as i64).product()
}

fn need<'a, T>(v: &'a Option<T>, what: &str, id: Identity) -> Result<&'a T, FoliationError> {
    v.as_ref().ok_or_else(|| FoliationError::Malformed(format!("{id} needs {what}")))
}

pub fn verify_identity(identity: Identity, instance: &IdentityInstance) -> Result<IdentityReport, FoliationError> {
    match identity {
        Identity::DthetaPow => dtheta_pow(need(&instance.chart, "a chart", identity)?),
        Identity::LemmaLp => lemma_lp(
            need(&instance.chart, "a chart", identity)?,
            need(&instance.deformation, "a deformation", identity)?,
        ),
        Identity::Prop31Expansion => prop31_expansion(need(&instance.twist, "twist data", identity)?),
        Identity::Lemma21Closed => {
            lemma21(need(&instance.chart, "a chart", identity)?, instance.section.as_ref(), instance.primitive.as_ref())
        }
    }
}

fn dtheta_pow(chart: &ChartFoliation) -> Result<IdentityReport, FoliationError> {
    let q = chart.q();
    let f = theta_coefficients(chart)?;
    let u = chart.universe();
    let lhs = chart.theta().exterior_d().wedge_pow(q as u32);
    let mut product = FormExpr::one(u);
    for fi in &f {
        product = &product * &FormExpr::scalar(u, fi.clone()).exterior_d();
    }
    for &g in chart.transverse_coframe() {
        product = &product * &FormExpr::monomial(u, 1 << g, Scalar::one());
    }
    let scaled = product.scale_const(&GaussRational::from_int(factorial(q)));
    let found = if lhs == scaled {
        Some(1)
    } else if lhs == -&scaled {
        Some(-1)
    } else {
        None
    };
    let expected = dtheta_pow_sign(q);
    let difference = &lhs - &scaled.scale_const(&GaussRational::from_int(expected));
    let mut notes = vec![format!("sign factor (-1)^(q(q-1)/2) = {expected} for q = {q}")];
    if found.is_some_and(|s| s != expected) {
        notes.push("expansion sign differs from the recorded rule".into());
    }
    if product.is_zero() {
        notes.push("df_1..df_q, dy^1..dy^q are not independent; both sides vanish".into());
    }
    Ok(IdentityReport { identity: Identity::DthetaPow, q, differences: vec![difference], sign: found, notes })
}

fn lemma_lp(chart: &ChartFoliation, def: &DeformationData) -> Result<IdentityReport, FoliationError> {
    let q = chart.q();
    let u = chart.universe();
    let theta = chart.theta_e();
    let theta_dot = def.theta_dot();
    let dtheta_q = chart.theta().exterior_d().wedge_pow(q as u32);
    let c = VectorValuedForm::new(def.omega_dot().iter().map(|w| &theta * w).collect())?;
    let lhs = lp_representative(chart, &c)?;
    let inv_q = GaussRational::from_ratio(1, q as i64);
    let rhs = (&(&theta_dot * &theta) * &dtheta_q).scale_const(&inv_q);
    let difference = &lhs - &rhs;

    let mut notes = Vec::new();
    let f = theta_coefficients(chart)?;
    let mut df_w = FormExpr::zero(u);
    for (fi, wi) in f.iter().zip(def.omega_dot()) {
        df_w = &df_w + &(&FormExpr::scalar(u, fi.clone()).exterior_d() * wi);
    }
    let middle = &(-&(&df_w * &dtheta_q)) - &(&(&theta * &theta_dot) * &dtheta_q).scale_const(&inv_q);
    notes.push(format!(
        "intermediate expansion -(sum df_i^w_i)^(dtheta)^q - (1/q) theta^theta_dot^(dtheta)^q {}",
        if middle == lhs { "matches" } else { "does not match" }
    ));
    let relation = def.relation_residual(chart);
    if relation.iter().any(|r| !r.is_zero()) {
        notes.push("deformation relation does not hold on this instance".into());
    }
    if !difference.is_zero() {
        let closed = difference.exterior_d().is_zero();
        notes.push(format!("difference is {}closed", if closed { "" } else { "not " }));
    }
    Ok(IdentityReport { identity: Identity::LemmaLp, q, differences: vec![difference], sign: None, notes })
}

fn prop31_expansion(t: &TwistExpansion) -> Result<IdentityReport, FoliationError> {
    let u = t.eta.universe();
    let t_id = u.scalar_id(&t.t)?;
    let dt = FormExpr::symbol(u, &format!("d{}", t.t))?;
    let dt_over_t = dt.scale(&Scalar::var(t_id).inv().expect("t is a variable"));
    let m_dt = dt_over_t.scale(&t.m);
    let eta0 = &t.eta - &m_dt;
    let q = t.q as u32;
    let lhs = &(&t.eta_dot * &eta0) * &eta0.exterior_d().wedge_pow(q);
    let deta_q = t.eta.exterior_d().wedge_pow(q);
    let rhs = &(&(&t.eta_dot * &t.eta) * &deta_q) + &(&(&m_dt * &t.eta_dot) * &deta_q);
    Ok(IdentityReport {
        identity: Identity::Prop31Expansion,
        q: t.q,
        differences: vec![&lhs - &rhs],
        sign: None,
        notes: Vec::new(),
    })
}

fn lemma21(
    chart: &ChartFoliation,
    section: Option<&VectorValuedForm>,
    primitive: Option<&VectorValuedForm>,
) -> Result<IdentityReport, FoliationError> {
    if section.is_none() && primitive.is_none() {
        return Err(FoliationError::Malformed("lemma21-closed needs a section or a primitive".into()));
    }
    let mut differences = Vec::new();
    let mut notes = Vec::new();
    if let Some(c) = section {
        if !covariant_d(c, chart)?.is_zero() {
            return Err(FoliationError::Precondition("section is not d_F-closed".into()));
        }
        differences.extend(covariant_d(&theta_wedge(chart, c)?, chart)?.components().iter().cloned());
        notes.push("closed section: d_F(theta^c) mod I_1".into());
    }
    if let Some(f) = primitive {
        let c = covariant_d(f, chart)?;
        let lhs = theta_wedge(chart, &c)?.reduce_mod_ideal(1)?;
        let rhs = covariant_d(&theta_wedge(chart, f)?.map(|x| -x), chart)?;
        differences.extend(lhs.components().iter().zip(rhs.components()).map(|(a, b)| a - b));
        notes.push("exact section: theta^d_F f - d_F(-theta^f) mod I_1".into());
    }
    Ok(IdentityReport { identity: Identity::Lemma21Closed, q: chart.q(), differences, sign: None, notes })
}

#[cfg(test)]
mod tests {
    use super::super::Category;
    use super::*;
    use crate::cdga::Universe;

    fn dtheta_chart(q: usize) -> ChartFoliation {
        let mut b = Universe::builder();
        for i in 1..=q {
            b.coordinate(&format!("f{i}"));
        }
        for i in 1..=q {
            b.transverse_coordinate(&format!("y{i}"));
        }
        let u = b.build().unwrap();
        let mut tau = vec![vec![FormExpr::zero(&u); q]; q];
        for i in 0..q {
            tau[i][i] = FormExpr::parse(&u, &format!("f{0}*dy{0}", i + 1)).unwrap();
        }
        let omega = (1..=q).map(|i| FormExpr::parse(&u, &format!("dy{i}")).unwrap()).collect();
        let names: Vec<String> = (1..=q).map(|i| format!("dy{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        ChartFoliation::new(&u, Category::Real, tau, omega).unwrap().with_transverse_coframe(&refs).unwrap()
    }

    #[test]
    fn dtheta_pow_sign_by_expansion() {
        // brute-force expansion at q = 1, 2, 3 gives +, −, −
        for (q, s) in [(1, 1), (2, -1), (3, -1)] {
            let inst = IdentityInstance { chart: Some(dtheta_chart(q)), ..Default::default() };
            let r = verify_identity(Identity::DthetaPow, &inst).unwrap();
            assert!(r.passed(), "q={q}: {}", r.residual_text());
            assert_eq!(r.sign, Some(s));
            assert_eq!(dtheta_pow_sign(q), s);
        }
        assert_eq!(dtheta_pow_sign(4), 1);
    }

    #[test]
    fn dtheta_pow_codimension_one_explicit() {
        let ch = dtheta_chart(1);
        let u = ch.universe();
        assert_eq!(ch.theta().exterior_d(), FormExpr::parse(u, "df1*dy1").unwrap());
    }

    #[test]
    fn lemma_lp_generic() {
        for q in 1..=2 {
            let mut live = 0;
            for seed in 0..4 {
                let g = GenericChart::new(q, seed).unwrap();
                let inst = IdentityInstance {
                    chart: Some(g.chart.clone()),
                    deformation: Some(g.deformation.clone()),
                    ..Default::default()
                };
                let r = verify_identity(Identity::LemmaLp, &inst).unwrap();
                assert!(r.passed(), "q={q} seed={seed}: {}", r.residual_text());
                assert!(r.notes[0].ends_with(" matches"), "{:?}", r.notes);
                let ch = &g.chart;
                let rhs = &(&g.deformation.theta_dot() * &ch.theta_e()) * &ch.theta().exterior_d().wedge_pow(q as u32);
                live += usize::from(!rhs.is_zero());
            }
            assert!(live == 4, "q={q}: only {live} seeds give a nonzero right side");
        }
    }

    #[test]
    fn lemma_lp_fails_when_relation_is_violated() {
        let g = GenericChart::new(1, 3).unwrap();
        let u = g.universe().clone();
        let bad_tau_dot = vec![vec![&g.deformation.tau_dot()[0][0] + &FormExpr::parse(&u, "x1*dx2").unwrap()]];
        let bad = DeformationData::unchecked(&g.chart, g.deformation.omega_dot().to_vec(), bad_tau_dot).unwrap();
        let inst = IdentityInstance { chart: Some(g.chart.clone()), deformation: Some(bad), ..Default::default() };
        let r = verify_identity(Identity::LemmaLp, &inst).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn prop31_expansion_generic() {
        for q in 1..=2 {
            let g = GenericTwist::new(q, 5).unwrap();
            let inst = IdentityInstance { twist: Some(TwistExpansion::from(&g)), ..Default::default() };
            let r = verify_identity(Identity::Prop31Expansion, &inst).unwrap();
            assert!(r.passed(), "{}", r.residual_text());
        }
    }

    #[test]
    fn theta_wedge_generic() {
        for q in 1..=2 {
            let g = GenericChart::new(q, 9).unwrap();
            let inst = IdentityInstance {
                chart: Some(g.chart.clone()),
                section: Some(g.closed_section().unwrap()),
                primitive: Some(g.primitive.clone()),
                ..Default::default()
            };
            let r = verify_identity(Identity::Lemma21Closed, &inst).unwrap();
            assert!(r.passed(), "{}", r.residual_text());
        }
    }

    #[test]
    fn generic_instance_passes_everything() {
        let inst = IdentityInstance::generic(2, 9).unwrap();
        for id in Identity::ALL {
            let r = verify_identity(id, &inst).unwrap();
            assert!(r.passed(), "{id}: {}", r.residual_text());
        }
    }

    #[test]
    fn names_round_trip() {
        for id in Identity::ALL {
            assert_eq!(id.name().parse::<Identity>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<Identity>(), Err(FoliationError::UnknownIdentity(_))));
    }

    #[test]
    fn missing_data_is_malformed() {
        let e = verify_identity(Identity::LemmaLp, &IdentityInstance::default()).unwrap_err();
        assert!(matches!(e, FoliationError::Malformed(_)));
    }
}
