//! Seeded generic instances for the chain-level identities.

use std::sync::Arc;

use super::{covariant_d, Category, ChartFoliation, DeformationData, FoliationError, VectorValuedForm};
use crate::cdga::{FormExpr, Universe};
use crate::random::{random_form, random_poly, rng, PolyShape};
use crate::scalar::{GaussRational, Monomial, Scalar};

/// A torsion-free chart in codimension q with θ = Σ f_i dy^i and a deformation.
///
/// The universe holds transverse coordinates `y1..yq`, leaf coordinates `x1, x2`
/// and symbols `f1..fq` whose differentials `df1..dfq` are free generators. The
/// connection is τ^i_j = Σ_k Γ^i_{jk} dy^k with Γ symmetric in (j, k), so it is
/// compatible with ω = (dy¹, …, dy^q); Γ^1_{1k} absorbs f_k so that tr τ = θ.
/// θ^e = θ + dφ/φ for a random polynomial φ, so θ^e∧(dθ)^q does not vanish.
/// The deformation ω̇ is a sum of pieces each of which keeps dω̇ + τ∧ω̇ inside I₁:
/// leafwise forms with transverse-only coefficients, d_F-exact pieces, and
/// transverse pieces. τ̇ is then solved for.
#[derive(Clone, Debug)]
pub struct GenericChart {
    pub chart: ChartFoliation,
    pub deformation: DeformationData,
    /// The section g with ω̇ containing dg + τg; used as a primitive witness.
    pub primitive: VectorValuedForm,
}

impl GenericChart {
    pub fn new(q: usize, seed: u64) -> Result<Self, FoliationError> {
        if q == 0 {
            return Err(FoliationError::Precondition("codimension must be positive".into()));
        }
        let mut b = Universe::builder();
        for i in 1..=q {
            b.transverse_coordinate(&format!("y{i}"));
        }
        b.coordinate("x1").coordinate("x2");
        for i in 1..=q {
            b.coordinate(&format!("f{i}"));
        }
        let u = b.build()?;
        let mut r = rng(seed ^ (q as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));

        let y: Vec<usize> = (1..=q).map(|i| u.scalar_id(&format!("y{i}"))).collect::<Result<_, _>>()?;
        let x: Vec<usize> = ["x1", "x2"].iter().map(|n| u.scalar_id(n)).collect::<Result<_, _>>()?;
        let f: Vec<usize> = (1..=q).map(|i| u.scalar_id(&format!("f{i}"))).collect::<Result<_, _>>()?;
        let dy: Vec<usize> = (1..=q).map(|i| u.generator_id(&format!("dy{i}"))).collect::<Result<_, _>>()?;
        let dx: Vec<usize> = ["dx1", "dx2"].iter().map(|n| u.generator_id(n)).collect::<Result<_, _>>()?;
        let xy: Vec<usize> = y.iter().chain(&x).copied().collect();

        let small = PolyShape { max_terms: 2, max_degree: 1, coef: 2 };
        // gamma[i][j][k], symmetric in (j, k)
        let mut gamma = vec![vec![vec![Scalar::zero(); q]; q]; q];
        for (i, gi) in gamma.iter_mut().enumerate() {
            for j in 0..q {
                for k in j..q {
                    if i == 0 && (j == 0 || k == 0) {
                        continue;
                    }
                    let p = Scalar::from_poly(random_poly(&mut r, &xy, small));
                    gi[j][k] = p.clone();
                    gi[k][j] = p;
                }
            }
        }
        for k in 0..q {
            let mut v = Scalar::var(f[k]);
            for (i, gi) in gamma.iter().enumerate().skip(1) {
                v = v.sub(&gi[i][k]);
            }
            gamma[0][0][k] = v.clone();
            gamma[0][k][0] = v;
        }
        let tau: Vec<Vec<FormExpr>> = (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| {
                        (0..q).fold(FormExpr::zero(&u), |acc, k| {
                            &acc + &FormExpr::monomial(&u, 1 << dy[k], gamma[i][j][k].clone())
                        })
                    })
                    .collect()
            })
            .collect();
        let omega: Vec<FormExpr> = dy.iter().map(|&g| FormExpr::monomial(&u, 1 << g, Scalar::one())).collect();
        let names: Vec<String> = (1..=q).map(|i| format!("dy{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let chart = ChartFoliation::new(&u, Category::Real, tau, omega)?.with_transverse_coframe(&refs)?;
        // θ^e = θ + dφ/φ for a trivialization differing from ∂/∂y¹∧⋯∧∂/∂y^q by φ
        // φ = 1 + x1 + 2 x2 + y1·p, so the leaf part of dφ never cancels
        let mut phi = random_poly(&mut r, &xy, small).mul_monomial(&Monomial::var(y[0]), &GaussRational::one());
        phi.add_term(Monomial::one(), &GaussRational::one());
        phi.add_term(Monomial::var(x[0]), &GaussRational::one());
        phi.add_term(Monomial::var(x[1]), &GaussRational::from_int(2));
        let phi = FormExpr::scalar(&u, Scalar::from_poly(phi));
        let dlog = phi.exterior_d().scale(
            &phi.scalar_part()
                .inv()
                .ok_or_else(|| FoliationError::Precondition("generated trivialization factor vanishes".into()))?,
        );
        let theta_e = &chart.theta() + &dlog;
        let chart = chart.with_trivialization_form(theta_e)?;

        let g: Vec<FormExpr> = (0..q)
            .map(|_| {
                FormExpr::scalar(&u, Scalar::from_poly(random_poly(&mut r, &xy, PolyShape { max_degree: 2, ..small })))
            })
            .collect();
        let primitive = VectorValuedForm::new(g.clone())?;
        let mut omega_dot = Vec::with_capacity(q);
        for i in 0..q {
            let leafwise = random_form(&mut r, &u, 1, &y, &dx, small, false);
            let transverse = random_form(&mut r, &u, 1, &xy, &dy, small, false);
            let mut exact = g[i].exterior_d();
            for j in 0..q {
                exact = &exact + &(&chart.tau()[i][j] * &g[j]);
            }
            omega_dot.push(&(&leafwise + &exact) + &transverse);
        }
        let deformation = DeformationData::from_omega_dot(&chart, omega_dot)?;
        Ok(GenericChart { chart, deformation, primitive })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        self.chart.universe()
    }

    /// ω̇ as a d_F-closed section.
    pub fn closed_section(&self) -> Result<VectorValuedForm, FoliationError> {
        VectorValuedForm::new(self.deformation.omega_dot().to_vec())
    }

    /// d_F of the primitive: a d_F-exact section.
    pub fn exact_section(&self) -> Result<VectorValuedForm, FoliationError> {
        covariant_d(&self.primitive, &self.chart)
    }
}

/// Generic η, η̇ on coordinates `u1..u_{2q+2}` together with the circle coordinate
/// `t` and a symbolic twist index `m`.
#[derive(Clone, Debug)]
pub struct GenericTwist {
    pub universe: Arc<Universe>,
    pub q: usize,
    pub eta: FormExpr,
    pub eta_dot: FormExpr,
}

impl GenericTwist {
    pub fn new(q: usize, seed: u64) -> Result<Self, FoliationError> {
        let n = 2 * q + 2;
        let mut b = Universe::builder();
        for i in 1..=n {
            b.coordinate(&format!("u{i}"));
        }
        b.coordinate("t").parameter("m");
        let u = b.build()?;
        let vars: Vec<usize> = (1..=n).map(|i| u.scalar_id(&format!("u{i}"))).collect::<Result<_, _>>()?;
        let gens: Vec<usize> = (1..=n).map(|i| u.generator_id(&format!("du{i}"))).collect::<Result<_, _>>()?;
        let mut r = rng(seed ^ 0xA5A5_0000 ^ q as u64);
        let shape = PolyShape { max_terms: 3, max_degree: 1, coef: 3 };
        let eta = random_form(&mut r, &u, 1, &vars, &gens, shape, false);
        let eta_dot = random_form(&mut r, &u, 1, &vars, &gens, shape, false);
        Ok(GenericTwist { universe: u, q, eta, eta_dot })
    }
}
