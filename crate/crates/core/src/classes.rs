//! Characteristic-class representatives, the S¹ twist and fiber integration.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::cdga::{wedge_sign, AlgebraError, FormExpr, RuleSet};
use crate::foliation::{
    lp_representative, Category, ChartFoliation, DeformationData, FoliationError, VectorValuedForm,
};
use crate::scalar::{GaussRational, Monomial, Polynomial, Scalar};

/// Sign σ in π_!FLK(F°; e_m) = σ·(−m)·DBott(F). With the transversely holomorphic
/// constant 2π√−1·c = −1 and dt/t factored to the left this comes out as +1; the
/// same σ appears in the chain-level identity FLK° = π*FLK + σ·m·(dt/t)∧DBott.
pub const PROP31_SIGN: i64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassError {
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("circle coordinate `{0}` is not declared together with d{0}")]
    NoCircleCoordinate(String),
    #[error("coefficient is not a Laurent polynomial in {t}: {coef}")]
    UnsupportedCoefficient { t: String, coef: String },
    #[error("twisted chart fails the structure equation: {0}")]
    TwistResidual(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Bott,
    Dbott,
    Flk,
    LpImage,
    /// π_! of an FLK representative, with 2π√−1·c absorbed.
    FlkFiber,
}

impl ClassKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassKind::Bott => "bott",
            ClassKind::Dbott => "dbott",
            ClassKind::Flk => "flk",
            ClassKind::LpImage => "lp-image",
            ClassKind::FlkFiber => "flk-fiber",
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassKind {
    type Err = ClassError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bott" => ClassKind::Bott,
            "dbott" => ClassKind::Dbott,
            "flk" => ClassKind::Flk,
            "lp-image" => ClassKind::LpImage,
            "flk-fiber" => ClassKind::FlkFiber,
            other => return Err(ClassError::Unsupported(format!("unknown class kind `{other}`"))),
        })
    }
}

/// A representative `c^{c_power}·rep`; the constant c stays symbolic.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassRep {
    pub kind: ClassKind,
    pub q: usize,
    pub category: Category,
    pub c_power: u32,
    pub rep: FormExpr,
    pub twist_index: Option<i64>,
}

impl ClassRep {
    fn new(
        kind: ClassKind,
        q: usize,
        category: Category,
        c_power: u32,
        rep: FormExpr,
        twist_index: Option<i64>,
    ) -> Self {
        if let Some(deg) = kind.expected_degree(q) {
            assert!(
                rep.is_zero() || rep.is_homogeneous_of(deg),
                "{kind} representative must have degree {deg}, got {:?}",
                rep.degree()
            );
        }
        ClassRep { kind, q, category, c_power, rep, twist_index }
    }

    /// Degree of the form part, `None` for the zero form.
    pub fn degree(&self) -> Option<usize> {
        self.rep.degree()
    }

    /// c^{c_power} as a complex number.
    pub fn constant(&self) -> Complex64 {
        normalization_constant(self.category).powu(self.c_power)
    }
}

impl ClassKind {
    fn expected_degree(self, q: usize) -> Option<usize> {
        match self {
            ClassKind::Bott | ClassKind::Dbott | ClassKind::FlkFiber => Some(2 * q + 1),
            ClassKind::Flk => Some(2 * q + 2),
            ClassKind::LpImage => None,
        }
    }
}

/// c = −1/2π for real foliations, −1/(2π√−1) for transversely holomorphic ones.
pub fn normalization_constant(category: Category) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    match category {
        Category::Real => Complex64::new(-1.0 / two_pi, 0.0),
        Category::Holomorphic => Complex64::new(0.0, 1.0 / two_pi),
    }
}

/// 2π√−1·c, exact: −1 for holomorphic and −√−1 for real.
fn residue_factor(category: Category) -> GaussRational {
    match category {
        Category::Holomorphic => GaussRational::from_int(-1),
        Category::Real => -GaussRational::i(),
    }
}

/// θ∧(dθ)^q with θ = tr τ.
pub fn bott_rep(chart: &ChartFoliation) -> ClassRep {
    let q = chart.q();
    let theta = chart.theta();
    let rep = &theta * &theta.exterior_d().wedge_pow(q as u32);
    ClassRep::new(ClassKind::Bott, q, chart.category(), q as u32 + 1, rep, chart.twist_index())
}

/// θ̇∧(dθ)^q.
pub fn dbott_rep(chart: &ChartFoliation, deformation: &DeformationData) -> ClassRep {
    let q = chart.q();
    let rep = &deformation.theta_dot() * &chart.theta().exterior_d().wedge_pow(q as u32);
    ClassRep::new(ClassKind::Dbott, q, chart.category(), q as u32 + 1, rep, chart.twist_index())
}

/// θ̇∧θ^e∧(dθ)^q, using the chart's trivialization form.
pub fn flk_rep(chart: &ChartFoliation, deformation: &DeformationData) -> ClassRep {
    let q = chart.q();
    let rep = &(&deformation.theta_dot() * &chart.theta_e()) * &chart.theta().exterior_d().wedge_pow(q as u32);
    ClassRep::new(ClassKind::Flk, q, chart.category(), q as u32 + 2, rep, chart.twist_index())
}

/// The projective-obstruction image of a section, normalized like an FLK class.
pub fn lp_image_rep(chart: &ChartFoliation, c: &VectorValuedForm) -> Result<ClassRep, ClassError> {
    let rep = lp_representative(chart, c)?;
    Ok(ClassRep::new(ClassKind::LpImage, chart.q(), chart.category(), chart.q() as u32 + 2, rep, chart.twist_index()))
}

struct Circle {
    t: usize,
    dt: usize,
}

fn circle(chart_universe: &crate::cdga::Universe, t: &str) -> Result<Circle, ClassError> {
    let missing = || ClassError::NoCircleCoordinate(t.to_string());
    let tid = chart_universe.scalar_id(t).map_err(|_| missing())?;
    let dt = chart_universe.linked_generator(tid).ok_or_else(missing)?;
    Ok(Circle { t: tid, dt })
}

fn dlog(universe: &std::sync::Arc<crate::cdga::Universe>, c: &Circle) -> FormExpr {
    let inv_t = Scalar::var(c.t).inv().expect("t is a nonzero variable");
    FormExpr::monomial(universe, 1 << c.dt, inv_t)
}

fn t_power(c: &Circle, m: i64) -> Scalar {
    Scalar::var(c.t).pow(m as i32).expect("t is a nonzero variable")
}

/// Pulls the chart back to M×S¹ and changes the trivialization by t^m: ω¹ ↦ t^mω¹,
/// with τ conjugated by diag(t^m, 1, …, 1), so θ ↦ θ − m·dt/t. The structure
/// equation of the result is checked, after `rules` if given.
pub fn s1_twist(
    chart: &ChartFoliation,
    m: i64,
    t: &str,
    rules: Option<&RuleSet>,
) -> Result<ChartFoliation, ClassError> {
    let u = chart.universe();
    let c = circle(u, t)?;
    if m == 0 {
        return Ok(chart.clone());
    }
    let q = chart.q();
    let up = t_power(&c, m);
    let down = t_power(&c, -m);
    let shift = dlog(u, &c).scale_const(&GaussRational::from_int(-m));
    let mut tau = chart.tau().to_vec();
    for j in 1..q {
        tau[0][j] = tau[0][j].scale(&up);
        tau[j][0] = tau[j][0].scale(&down);
    }
    tau[0][0] = &tau[0][0] + &shift;
    let mut omega = chart.omega().to_vec();
    omega[0] = omega[0].scale(&up);
    let twisted = chart.clone().with_twist(tau, omega, &shift, m);
    for r in twisted.structure_residual() {
        let r = match rules {
            Some(rs) => rs.apply(&r)?,
            None => r,
        };
        if !r.is_zero() {
            return Err(ClassError::TwistResidual(r.render()));
        }
    }
    Ok(twisted)
}

/// Transports a deformation of `chart` to `s1_twist(chart, m, t)`: the gauge change is
/// independent of the parameter, so ω̇ and τ̇ are conjugated without a shift.
pub fn twist_deformation(
    chart: &ChartFoliation,
    deformation: &DeformationData,
    m: i64,
    t: &str,
    rules: Option<&RuleSet>,
) -> Result<(ChartFoliation, DeformationData), ClassError> {
    let twisted = s1_twist(chart, m, t, rules)?;
    if m == 0 {
        return Ok((twisted, deformation.clone()));
    }
    let c = circle(chart.universe(), t)?;
    let up = t_power(&c, m);
    let down = t_power(&c, -m);
    let q = chart.q();
    let mut tau_dot = deformation.tau_dot().to_vec();
    for j in 1..q {
        tau_dot[0][j] = tau_dot[0][j].scale(&up);
        tau_dot[j][0] = tau_dot[j][0].scale(&down);
    }
    let mut omega_dot = deformation.omega_dot().to_vec();
    omega_dot[0] = omega_dot[0].scale(&up);
    let d = DeformationData::new(&twisted, omega_dot, tau_dot)?;
    Ok((twisted, d))
}

/// Result of integrating along the S¹ fiber: π_!a = 2π√−1·residue.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberIntegral {
    pub residue: FormExpr,
}

impl FiberIntegral {
    pub fn factor() -> Complex64 {
        Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    }
}

/// Splits each dt-term as t^k·(dt/t)∧β with dt moved to the front and keeps the
/// k = 0 part. Coefficients may depend on t only through powers of t.
pub fn fiber_integrate(a: &FormExpr, t: &str) -> Result<FiberIntegral, ClassError> {
    let u = a.universe();
    let c = circle(u, t)?;
    let t_base = Polynomial::var(c.t);
    let mut residue = FormExpr::zero(u);
    for (mask, coef) in a.terms() {
        let mut t_exp = 0u32;
        let mut rest_den = Vec::new();
        for (base, e) in coef.denominator_factors() {
            if *base == t_base {
                t_exp = e;
            } else if base.contains_var(c.t) {
                return Err(ClassError::UnsupportedCoefficient {
                    t: t.into(),
                    coef: coef.render(&|v| u.scalar_name(v).to_string()),
                });
            } else {
                rest_den.push((base.clone(), e));
            }
        }
        if mask & (1 << c.dt) == 0 || t_exp == 0 {
            continue;
        }
        // coef·t = N·t^{1−e}/D; the t⁰ part comes from the t^{e−1} part of N
        let key = Monomial::var_pow(c.t, t_exp - 1);
        let Some(inner) = coef.numerator().split_by(|v| v == c.t).remove(&key) else {
            continue;
        };
        let value = Scalar::from_parts(inner, rest_den).expect("denominator bases are nonzero");
        let rest = mask & !(1 << c.dt);
        let negative = wedge_sign(1 << c.dt, rest).expect("dt appears once");
        let value = if negative { value.neg() } else { value };
        residue = &residue + &FormExpr::monomial(u, rest, value);
    }
    Ok(FiberIntegral { residue })
}

/// π_! of an FLK representative: c^{p}·2π√−1·residue = c^{p−1}·(2π√−1·c)·residue.
pub fn fiber_integrate_rep(rep: &ClassRep, t: &str) -> Result<ClassRep, ClassError> {
    if rep.kind != ClassKind::Flk {
        return Err(ClassError::Unsupported(format!("fiber integration of a {} representative", rep.kind)));
    }
    let fi = fiber_integrate(&rep.rep, t)?;
    let form = fi.residue.scale_const(&residue_factor(rep.category));
    Ok(ClassRep::new(ClassKind::FlkFiber, rep.q, rep.category, rep.c_power - 1, form, rep.twist_index))
}

#[derive(Clone, Debug)]
pub struct Prop31Report {
    pub q: usize,
    pub m: i64,
    pub sigma: i64,
    pub flk_twisted: ClassRep,
    pub flk: ClassRep,
    pub dbott: ClassRep,
    pub flk_fiber: ClassRep,
    /// FLK° − π*FLK − σ·m·(dt/t)∧DBott.
    pub symbolic_difference: FormExpr,
    /// π_!FLK° − σ·(−m)·DBott, normalization constants included.
    pub fiber_difference: FormExpr,
}

impl Prop31Report {
    pub fn passed(&self) -> bool {
        self.symbolic_difference.is_zero() && self.fiber_difference.is_zero()
    }
}

/// Twists by t^m and compares the FLK class of the twisted foliation with DBott.
pub fn verify_prop31(
    chart: &ChartFoliation,
    deformation: &DeformationData,
    m: i64,
    t: &str,
    rules: Option<&RuleSet>,
) -> Result<Prop31Report, ClassError> {
    if chart.category() != Category::Holomorphic {
        return Err(ClassError::Unsupported(
            "the twist formula is stated for transversely holomorphic foliations".into(),
        ));
    }
    let u = chart.universe();
    let c = circle(u, t)?;
    let (twisted, tdef) = twist_deformation(chart, deformation, m, t, rules)?;
    let flk_twisted = flk_rep(&twisted, &tdef);
    let flk = flk_rep(chart, deformation);
    let dbott = dbott_rep(chart, deformation);
    let k = GaussRational::from_int(PROP31_SIGN * m);
    let expected = &flk.rep + &(&dlog(u, &c) * &dbott.rep).scale_const(&k);
    let mut symbolic_difference = &flk_twisted.rep - &expected;
    if let Some(rs) = rules {
        symbolic_difference = rs.apply(&symbolic_difference)?;
    }
    let flk_fiber = fiber_integrate_rep(&flk_twisted, t)?;
    let mut fiber_difference = &flk_fiber.rep + &dbott.rep.scale_const(&k);
    if let Some(rs) = rules {
        fiber_difference = rs.apply(&fiber_difference)?;
    }
    Ok(Prop31Report {
        q: chart.q(),
        m,
        sigma: PROP31_SIGN,
        flk_twisted,
        flk,
        dbott,
        flk_fiber,
        symbolic_difference,
        fiber_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::Universe;
    use crate::foliation::GenericChart;
    use std::sync::Arc;

    fn one_dim(theta: &str) -> (Arc<Universe>, ChartFoliation) {
        let u = Universe::builder().transverse_coordinate("y").coordinate("f").coordinate("x").build().unwrap();
        let ch = ChartFoliation::new(
            &u,
            Category::Real,
            vec![vec![FormExpr::parse(&u, theta).unwrap()]],
            vec![FormExpr::parse(&u, "dy").unwrap()],
        )
        .unwrap();
        (u, ch)
    }

    /// ω = z2 dz1 − λ z1 dz2 with its connection, plus a circle coordinate t.
    fn s3_chart() -> (Arc<Universe>, ChartFoliation, DeformationData) {
        let u = Universe::builder()
            .coordinate("z1")
            .coordinate("z2")
            .coordinate("zb1")
            .coordinate("zb2")
            .coordinate("t")
            .parameter("lambda")
            .build()
            .unwrap();
        let eta = "-(lambda + 1)*(zb1*dz1 + zb2*dz2)/(lambda*z1*zb1 + z2*zb2)";
        let ch = ChartFoliation::new(
            &u,
            Category::Holomorphic,
            vec![vec![FormExpr::parse(&u, eta).unwrap()]],
            vec![FormExpr::parse(&u, "z2*dz1 - lambda*z1*dz2").unwrap()],
        )
        .unwrap();
        let d = DeformationData::parameter_derivative(&ch, "lambda").unwrap();
        (u, ch, d)
    }

    #[test]
    fn trivial_bott_examples() {
        let (_, ch) = one_dim("dy");
        assert!(bott_rep(&ch).rep.is_zero());
        let (_, ch) = one_dim("f*dy");
        let b = bott_rep(&ch);
        assert!(b.rep.is_zero());
        assert_eq!((b.kind, b.c_power), (ClassKind::Bott, 2));
    }

    #[test]
    fn zero_deformation_gives_zero() {
        let (u, ch) = one_dim("f*dy");
        let zero = DeformationData::new(&ch, vec![FormExpr::zero(&u)], vec![vec![FormExpr::zero(&u)]]).unwrap();
        assert!(dbott_rep(&ch, &zero).rep.is_zero());
        let flk = flk_rep(&ch, &zero);
        assert!(flk.rep.is_zero());
        assert_eq!(flk.c_power, 3);
    }

    #[test]
    fn representatives_are_linear_in_theta_dot() {
        let g = GenericChart::new(1, 5).unwrap();
        let d2 = DeformationData::new(
            &g.chart,
            g.deformation.omega_dot().iter().map(|w| w.scale_const(&GaussRational::from_int(2))).collect(),
            g.deformation
                .tau_dot()
                .iter()
                .map(|r| r.iter().map(|x| x.scale_const(&GaussRational::from_int(2))).collect())
                .collect(),
        )
        .unwrap();
        let two = GaussRational::from_int(2);
        assert_eq!(dbott_rep(&g.chart, &d2).rep, dbott_rep(&g.chart, &g.deformation).rep.scale_const(&two));
        assert_eq!(flk_rep(&g.chart, &d2).rep, flk_rep(&g.chart, &g.deformation).rep.scale_const(&two));
    }

    #[test]
    fn s3_degrees_and_dimension() {
        let (_, ch, d) = s3_chart();
        assert_eq!(bott_rep(&ch).degree(), Some(3));
        assert_eq!(dbott_rep(&ch, &d).degree(), Some(3));
        // θ̇ and θ are both multiples of z̄1dz1 + z̄2dz2
        assert!(flk_rep(&ch, &d).rep.is_zero());
    }

    #[test]
    fn twist_by_zero_is_identity() {
        let (_, ch, _) = s3_chart();
        let tw = s1_twist(&ch, 0, "t", None).unwrap();
        assert_eq!(tw.theta(), ch.theta());
        assert_eq!(tw.omega(), ch.omega());
    }

    #[test]
    fn twists_compose() {
        let (u, ch, _) = s3_chart();
        let a = s1_twist(&s1_twist(&ch, 2, "t", None).unwrap(), -5, "t", None).unwrap();
        let expected = &ch.theta() + &FormExpr::parse(&u, "3*dt/t").unwrap();
        assert_eq!(a.theta(), expected);
        assert_eq!(a.twist_index(), Some(-3));
        assert_eq!(a.theta().exterior_d(), ch.theta().exterior_d());
        assert_eq!(a.omega()[0], FormExpr::parse(&u, "t^-3*(z2*dz1 - lambda*z1*dz2)").unwrap());
    }

    #[test]
    fn twist_needs_circle() {
        let (_, ch) = one_dim("f*dy");
        assert_eq!(s1_twist(&ch, 1, "t", None).unwrap_err(), ClassError::NoCircleCoordinate("t".into()));
    }

    #[test]
    fn twist_in_codimension_two_keeps_structure() {
        let u = Universe::builder()
            .transverse_coordinate("y1")
            .transverse_coordinate("y2")
            .coordinate("x")
            .coordinate("t")
            .build()
            .unwrap();
        let p = |s: &str| FormExpr::parse(&u, s).unwrap();
        let tau = vec![vec![p("x*dy1"), p("y1*dy2")], vec![p("y1*dy1"), p("dy2")]];
        let ch = ChartFoliation::new(&u, Category::Real, tau, vec![p("dy1"), p("dy2")]).unwrap();
        assert!(ch.structure_residual().iter().all(|r| r.is_zero()));
        let tw = s1_twist(&ch, 2, "t", None).unwrap();
        assert_eq!(tw.tau()[0][1], p("t^2*y1*dy2"));
        assert_eq!(tw.tau()[1][0], p("t^-2*y1*dy1"));
        assert_eq!(tw.theta(), p("x*dy1 + dy2 - 2*dt/t"));
    }

    #[test]
    fn fiber_integration_examples() {
        let u = Universe::builder().coordinate("x").coordinate("t").build().unwrap();
        let p = |s: &str| FormExpr::parse(&u, s).unwrap();
        assert!(fiber_integrate(&p("x^2*dx"), "t").unwrap().residue.is_zero());
        assert_eq!(fiber_integrate(&p("dt/t*x*dx"), "t").unwrap().residue, p("x*dx"));
        assert!(fiber_integrate(&p("t*(dt/t)*dx"), "t").unwrap().residue.is_zero());
        // Laurent coefficients: only t^{-1} in front of dt survives
        assert_eq!(fiber_integrate(&p("(t^2 + x*t + 3)/t^2*dt"), "t").unwrap().residue, p("x"));
        // dt moved to the front picks up a sign
        assert_eq!(fiber_integrate(&p("dx*dt/t"), "t").unwrap().residue, p("-dx"));
        let err = fiber_integrate(&p("dt/(t + 1)"), "t").unwrap_err();
        assert!(matches!(err, ClassError::UnsupportedCoefficient { .. }));
    }

    #[test]
    fn fiber_integration_kills_pullbacks_and_inverts_vol() {
        let u = Universe::builder().coordinate("x").coordinate("y").coordinate("t").build().unwrap();
        let p = |s: &str| FormExpr::parse(&u, s).unwrap();
        let alpha = p("x*y*dx + y^2/(1 + x)*dy");
        assert!(fiber_integrate(&alpha, "t").unwrap().residue.is_zero());
        // vol = dt/(2π√−1 t); with vol on the left π_!(vol∧α) = α
        let fi = fiber_integrate(&(&p("dt/t") * &alpha), "t").unwrap();
        assert_eq!(fi.residue, alpha);
    }

    #[test]
    fn twist_formula_on_s3() {
        let (_, ch, d) = s3_chart();
        for m in [-1, 0, 1, 2] {
            let r = verify_prop31(&ch, &d, m, "t", None).unwrap();
            assert!(r.passed(), "m={m}: {} | {}", r.symbolic_difference, r.fiber_difference);
            assert_eq!(r.sigma, 1);
            assert_eq!(r.flk_fiber.rep, r.dbott.rep.scale_const(&GaussRational::from_int(-m)));
            assert_eq!(r.flk_fiber.c_power, 2);
            if m == 0 {
                assert_eq!(r.flk_twisted.rep, r.flk.rep);
                assert!(r.flk_fiber.rep.is_zero());
            }
        }
    }

    #[test]
    fn twist_rejects_real_category() {
        let (_, ch) = one_dim("f*dy");
        let z =
            DeformationData::new(&ch, vec![FormExpr::zero(ch.universe())], vec![vec![FormExpr::zero(ch.universe())]])
                .unwrap();
        assert!(matches!(verify_prop31(&ch, &z, 1, "t", None), Err(ClassError::Unsupported(_))));
    }

    #[test]
    fn kinds_round_trip() {
        for k in [ClassKind::Bott, ClassKind::Dbott, ClassKind::Flk, ClassKind::LpImage, ClassKind::FlkFiber] {
            assert_eq!(k.name().parse::<ClassKind>().unwrap(), k);
        }
    }

    #[test]
    fn constants() {
        let c = normalization_constant(Category::Holomorphic);
        assert!((c * FiberIntegral::factor() + 1.0).norm() < 1e-15);
        let c = normalization_constant(Category::Real);
        assert!((c * FiberIntegral::factor() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }
}
