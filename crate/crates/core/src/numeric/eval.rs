use num_complex::Complex64;
use rayon::prelude::*;

use super::{Jet, NumericError, ParamManifold, QuadratureSpec};
use crate::cdga::FormExpr;
use crate::classes::ClassRep;
use crate::scalar::{Polynomial, Scalar};

/// Denominators below this magnitude count as vanishing.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(Complex64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    fn new(p: &Polynomial) -> Self {
        CompiledPoly { terms: p.terms().map(|(m, c)| (c.to_complex(), m.factors().collect())).collect() }
    }

    fn eval(&self, values: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(c, f)| f.iter().fold(*c, |acc, &(v, e)| acc * values[v].powu(e))).sum()
    }
}

#[derive(Clone, Debug)]
struct CompiledScalar {
    num: CompiledPoly,
    dens: Vec<(CompiledPoly, u32)>,
    original: Scalar,
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    generators: Vec<usize>,
    coef: CompiledScalar,
}

/// A homogeneous form prepared for repeated pullback evaluation on one manifold.
pub struct CompiledForm<'m> {
    manifold: &'m ParamManifold,
    degree: usize,
    /// per scalar id: where its value comes from
    sources: Vec<Source<'m>>,
    /// per generator id: the scalar whose gradient is its pullback
    generator_symbol: Vec<Option<usize>>,
    terms: Vec<CompiledTerm>,
    names: Vec<String>,
}

#[derive(Clone)]
enum Source<'m> {
    Unused,
    Coordinate(&'m super::CoordinateFn),
    Parameter(Complex64),
}

impl<'m> CompiledForm<'m> {
    pub fn new(a: &FormExpr, manifold: &'m ParamManifold) -> Result<Self, NumericError> {
        let u = a.universe();
        let degree = match a.degree() {
            Some(d) => d,
            None if a.is_zero() => 0,
            None => return Err(NumericError::NotHomogeneous(a.render())),
        };
        let mut needed = vec![false; u.num_scalars()];
        let mut generator_symbol = vec![None; u.num_generators()];
        let mut terms = Vec::new();
        for (mask, coef) in a.terms() {
            for v in coef.variables() {
                needed[v] = true;
            }
            let generators: Vec<usize> = (0..64).filter(|g| mask & (1 << g) != 0).collect();
            for &g in &generators {
                let s = u.linked_symbol(g).ok_or_else(|| NumericError::Unassigned(u.generator_name(g).to_string()))?;
                needed[s] = true;
                generator_symbol[g] = Some(s);
            }
            let coef = CompiledScalar {
                num: CompiledPoly::new(coef.numerator()),
                dens: coef.denominator_factors().map(|(b, e)| (CompiledPoly::new(b), e)).collect(),
                original: coef.clone(),
            };
            terms.push(CompiledTerm { generators, coef });
        }
        let mut sources = vec![Source::Unused; u.num_scalars()];
        for (v, &need) in needed.iter().enumerate() {
            if !need {
                continue;
            }
            let name = u.scalar_name(v);
            sources[v] = if let Some(f) = manifold.coordinate(name) {
                Source::Coordinate(f)
            } else if let Some(p) = manifold.parameter(name) {
                Source::Parameter(p)
            } else {
                return Err(NumericError::Unassigned(name.to_string()));
            };
        }
        let names = (0..u.num_scalars()).map(|v| u.scalar_name(v).to_string()).collect();
        Ok(CompiledForm { manifold, degree, sources, generator_symbol, terms, names })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn jets(&self, point: &[f64]) -> Vec<Option<Jet>> {
        let n = self.manifold.dimension();
        self.sources
            .iter()
            .map(|s| match s {
                Source::Unused => None,
                Source::Coordinate(f) => Some(f(point)),
                Source::Parameter(p) => Some(Jet { value: *p, grad: vec![Complex64::new(0.0, 0.0); n] }),
            })
            .collect()
    }

    fn coefficient(&self, c: &CompiledScalar, values: &[Complex64], point: &[f64]) -> Result<Complex64, NumericError> {
        let mut den = Complex64::new(1.0, 0.0);
        for (b, e) in &c.dens {
            let v = b.eval(values);
            if v.norm() < SINGULAR_TOLERANCE {
                return Err(NumericError::Singular {
                    scalar: c.original.render(&|v| self.names[v].clone()),
                    point: point.to_vec(),
                });
            }
            den *= v.powu(*e);
        }
        Ok(c.num.eval(values) / den)
    }

    /// Pullback coefficients against the k-subsets of the parameter axes, in
    /// lexicographic order of the subsets.
    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<Complex64>, NumericError> {
        let n = self.manifold.dimension();
        let subsets = subsets(n, self.degree);
        let jets = self.jets(point);
        let values: Vec<Complex64> =
            jets.iter().map(|j| j.as_ref().map_or(Complex64::new(0.0, 0.0), |j| j.value)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); subsets.len()];
        if subsets.is_empty() {
            return Ok(out);
        }
        for t in &self.terms {
            let c = self.coefficient(&t.coef, &values, point)?;
            let rows: Vec<&[Complex64]> = t
                .generators
                .iter()
                .map(|&g| jets[self.generator_symbol[g].expect("linked")].as_ref().expect("needed").grad.as_slice())
                .collect();
            for (slot, cols) in out.iter_mut().zip(&subsets) {
                let m: Vec<Vec<Complex64>> = rows.iter().map(|r| cols.iter().map(|&k| r[k]).collect()).collect();
                *slot += c * det(m);
            }
        }
        Ok(out)
    }

    /// Pullback coefficient of a top-degree form against d(axis 1)∧⋯∧d(axis n).
    fn top(&self, point: &[f64]) -> Result<Complex64, NumericError> {
        Ok(self.evaluate(point)?[0])
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let Some(p) = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm())) else {
            break;
        };
        if m[p][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[r][k] -= f * v;
            }
        }
    }
    d
}

/// Pullback of `a` at one point; see [`CompiledForm::evaluate`].
pub fn evaluate_form(a: &FormExpr, point: &[f64], manifold: &ParamManifold) -> Result<Vec<Complex64>, NumericError> {
    if point.len() != manifold.dimension() {
        return Err(NumericError::DegreeMismatch { expected: manifold.dimension(), got: point.len() });
    }
    CompiledForm::new(a, manifold)?.evaluate(point)
}

/// Σ weights × top pullback coefficient × orientation, reduced in a fixed order.
pub fn integrate(a: &FormExpr, manifold: &ParamManifold, quad: &QuadratureSpec) -> Result<Complex64, NumericError> {
    let n = manifold.dimension();
    let rules = quad.rules(manifold.axes())?;
    if a.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let compiled = CompiledForm::new(a, manifold)?;
    if compiled.degree() != n {
        return Err(NumericError::DegreeMismatch { expected: n, got: compiled.degree() });
    }
    let (first, rest) = rules.split_first().expect("manifold has at least one axis");
    let partials: Vec<Complex64> = (0..first.nodes.len())
        .into_par_iter()
        .map(|i0| -> Result<Complex64, NumericError> {
            let mut idx = vec![0usize; rest.len()];
            let mut point = vec![0.0; n];
            point[0] = first.nodes[i0];
            let mut sum = Complex64::new(0.0, 0.0);
            loop {
                let mut w = first.weights[i0];
                for (k, r) in rest.iter().enumerate() {
                    point[k + 1] = r.nodes[idx[k]];
                    w *= r.weights[idx[k]];
                }
                sum += w * compiled.top(&point)?;
                // odometer over the remaining axes
                let mut k = rest.len();
                loop {
                    if k == 0 {
                        return Ok(sum);
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < rest[k].nodes.len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let total: Complex64 = partials.iter().sum();
    Ok(total * manifold.orientation())
}

/// c^{c_power}·∫ rep.
pub fn class_coefficient(
    rep: &ClassRep,
    manifold: &ParamManifold,
    quad: &QuadratureSpec,
) -> Result<Complex64, NumericError> {
    Ok(rep.constant() * integrate(&rep.rep, manifold, quad)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::Universe;
    use crate::models::{s3_universe, s3_volume_form};
    use crate::random::{random_form, rng, PolyShape};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn subsets_in_order() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(3, 4).is_empty());
    }

    #[test]
    fn determinant() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(det(vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]), c(-1.0));
        assert!(
            (det(vec![vec![c(2.0), c(1.0), c(0.0)], vec![c(1.0), c(3.0), c(1.0)], vec![c(0.0), c(1.0), c(4.0)]])
                - c(18.0))
            .norm()
                < 1e-12
        );
    }

    #[test]
    fn inverse_h_at_a_point() {
        let u = s3_universe().unwrap();
        let a = FormExpr::parse(&u, "1/(lambda*z1*zb1 + z2*zb2)").unwrap();
        let m = ParamManifold::s3().with_parameter("lambda", Complex64::new(2.0, 0.0));
        let v = evaluate_form(&a, &[FRAC_PI_4, 0.0, 0.0], &m).unwrap();
        assert_eq!(v.len(), 1);
        // h = 2·½ + ½
        assert!((v[0] - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pullback_of_dz1_matches_finite_differences() {
        let u = s3_universe().unwrap();
        let m = ParamManifold::s3();
        let a = FormExpr::parse(&u, "dz1").unwrap();
        let p = [0.7, 0.3, 1.9];
        let v = evaluate_form(&a, &p, &m).unwrap();
        let z1 = m.coordinate("z1").unwrap();
        for k in 0..3 {
            let h = 1e-6;
            let (mut a, mut b) = (p, p);
            a[k] += h;
            b[k] -= h;
            let fd = (z1(&a).value - z1(&b).value) / (2.0 * h);
            assert!((v[k] - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn degree_four_on_s3_is_empty() {
        let u = s3_universe().unwrap();
        let a = FormExpr::parse(&u, "dz1*dz2*dzb1*dzb2").unwrap();
        assert!(evaluate_form(&a, &[0.1, 0.2, 0.3], &ParamManifold::s3()).unwrap().is_empty());
    }

    #[test]
    fn singular_denominator_is_reported() {
        let u = s3_universe().unwrap();
        let a = FormExpr::parse(&u, "dz1/(lambda*z1*zb1 + z2*zb2)").unwrap();
        let m = ParamManifold::s3().with_parameter("lambda", Complex64::new(-1.0, 0.0));
        match evaluate_form(&a, &[FRAC_PI_4, 0.0, 0.0], &m) {
            Err(NumericError::Singular { scalar, .. }) => assert!(scalar.contains("lambda"), "{scalar}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unassigned_symbol() {
        let u = Universe::builder().coordinate("w").build().unwrap();
        let a = FormExpr::parse(&u, "w").unwrap();
        assert_eq!(
            evaluate_form(&a, &[0.0; 3], &ParamManifold::s3()).unwrap_err(),
            NumericError::Unassigned("w".into())
        );
    }

    #[test]
    fn volume_of_s3() {
        let u = s3_universe().unwrap();
        let vol = s3_volume_form(&u).unwrap();
        let q = QuadratureSpec::uniform(3, 16).unwrap();
        let v = integrate(&vol, &ParamManifold::s3(), &q).unwrap();
        assert!((v - Complex64::new(2.0 * PI * PI, 0.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn residue_on_s1() {
        let u = Universe::builder().coordinate("t").build().unwrap();
        let a = FormExpr::parse(&u, "dt/t").unwrap();
        let v = integrate(&a, &ParamManifold::s1(), &QuadratureSpec::uniform(1, 8).unwrap()).unwrap();
        assert!((v - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn stokes_on_s3() {
        let u = s3_universe().unwrap();
        let vars: Vec<usize> = ["z1", "z2", "zb1", "zb2"].iter().map(|n| u.scalar_id(n).unwrap()).collect();
        let gens: Vec<usize> = ["dz1", "dz2", "dzb1", "dzb2"].iter().map(|n| u.generator_id(n).unwrap()).collect();
        let q = QuadratureSpec::uniform(3, 16).unwrap();
        let mut r = rng(3);
        for _ in 0..4 {
            let beta = random_form(&mut r, &u, 2, &vars, &gens, PolyShape::default(), false);
            let v = integrate(&beta.exterior_d(), &ParamManifold::s3(), &q).unwrap();
            assert!(v.norm() < 1e-8, "{v}");
        }
    }

    #[test]
    fn integration_is_bit_reproducible() {
        let u = s3_universe().unwrap();
        let vol = s3_volume_form(&u).unwrap();
        let q = QuadratureSpec::uniform(3, 12).unwrap();
        let a = integrate(&vol, &ParamManifold::s3(), &q).unwrap();
        let b = integrate(&vol, &ParamManifold::s3(), &q).unwrap();
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn wrong_degree() {
        let u = s3_universe().unwrap();
        let a = FormExpr::parse(&u, "dz1*dz2").unwrap();
        let e = integrate(&a, &ParamManifold::s3(), &QuadratureSpec::uniform(3, 4).unwrap()).unwrap_err();
        assert_eq!(e, NumericError::DegreeMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn random_points_in_box() {
        let m = ParamManifold::s3();
        let mut r = rng(1);
        for _ in 0..10 {
            let p = m.random_point(&mut r);
            assert!(p.iter().zip(m.axes()).all(|(x, a)| *x >= a.lo && *x < a.hi));
        }
    }
}
