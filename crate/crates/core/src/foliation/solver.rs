use std::collections::BTreeMap;

use super::FoliationError;
use crate::cdga::{FormExpr, RuleSet};
use crate::scalar::{Polynomial, Scalar};

/// Finds η in the span of `ansatz` with `dω + η∧ω = 0`.
///
/// The unknown coefficients range over functions of the parameters (symbols with
/// zero differential). Each equation is cleared of denominators and split by
/// monomials in the remaining symbols, giving a linear system over the parameter
/// field. Free unknowns are set to zero. If `rules` is given, the cleared equations
/// are reduced by it first, so relations such as the sphere equation may be used.
pub fn solve_connection(
    omega: &FormExpr,
    ansatz: &[FormExpr],
    rules: Option<&RuleSet>,
) -> Result<FormExpr, FoliationError> {
    if !omega.is_homogeneous_of(1) {
        return Err(FoliationError::WrongDegree { what: "omega".into(), degree: 1 });
    }
    for a in ansatz {
        if !a.same_universe(omega) {
            return Err(crate::cdga::AlgebraError::UniverseMismatch.into());
        }
        if !a.is_homogeneous_of(1) {
            return Err(FoliationError::WrongDegree { what: "ansatz candidate".into(), degree: 1 });
        }
    }
    let u = omega.universe();
    let d_omega = omega.exterior_d();
    let columns: Vec<FormExpr> = ansatz.iter().map(|a| a * omega).collect();

    let mut masks: Vec<u64> = d_omega.terms().map(|(m, _)| m).collect();
    for c in &columns {
        masks.extend(c.terms().map(|(m, _)| m));
    }
    masks.sort_unstable();
    masks.dedup();

    let is_param = |v: usize| u.is_parameter(v);
    let mut rows: Vec<(Vec<Scalar>, Scalar)> = Vec::new();
    for &mask in &masks {
        let entries: Vec<Scalar> = columns.iter().map(|c| c.coefficient(mask)).collect();
        let rhs = d_omega.coefficient(mask).neg();
        // clear denominators with the product of all distinct bases at max power
        let mut bases: BTreeMap<Polynomial, u32> = BTreeMap::new();
        for s in entries.iter().chain(std::iter::once(&rhs)) {
            for (b, e) in s.denominator_factors() {
                let slot = bases.entry(b.clone()).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
        let den = bases.iter().fold(Polynomial::one(), |acc, (b, &e)| acc.mul(&b.pow(e)));
        let clear = |s: &Scalar| -> Result<Polynomial, FoliationError> {
            let p = s.mul(&Scalar::from_poly(den.clone()));
            let p = p.as_polynomial().cloned().ok_or_else(|| {
                FoliationError::Precondition("could not clear denominators in connection equation".into())
            })?;
            Ok(match rules {
                Some(r) => r.normalize_poly(&p),
                None => p,
            })
        };
        let cleared: Vec<Polynomial> = entries.iter().map(clear).collect::<Result<_, _>>()?;
        let cleared_rhs = clear(&rhs)?;
        // split by monomials in the non-parameter symbols
        let mut split: BTreeMap<crate::scalar::Monomial, (Vec<Scalar>, Scalar)> = BTreeMap::new();
        let n = ansatz.len();
        for (k, p) in cleared.iter().enumerate() {
            for (outer, inner) in p.split_by(|v| !is_param(v)) {
                split.entry(outer).or_insert_with(|| (vec![Scalar::zero(); n], Scalar::zero())).0[k] =
                    Scalar::from_poly(inner);
            }
        }
        for (outer, inner) in cleared_rhs.split_by(|v| !is_param(v)) {
            split.entry(outer).or_insert_with(|| (vec![Scalar::zero(); n], Scalar::zero())).1 =
                Scalar::from_poly(inner);
        }
        rows.extend(split.into_values());
    }

    let (solution, consistent) = gauss_solve(rows, ansatz.len());
    let mut eta = FormExpr::zero(u);
    for (a, x) in ansatz.iter().zip(&solution) {
        eta = &eta + &a.scale(x);
    }
    let mut residual = &d_omega + &(&eta * omega);
    if let Some(r) = rules {
        residual = r.apply(&residual)?;
    }
    if !consistent || !residual.is_zero() {
        return Err(FoliationError::NoSolution { residual: residual.render() });
    }
    Ok(eta)
}

/// Row reduction over the rational-function field. Returns a particular solution
/// (free unknowns zero) and whether the system is consistent.
fn gauss_solve(mut rows: Vec<(Vec<Scalar>, Scalar)>, n: usize) -> (Vec<Scalar>, bool) {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].0[col].inv().expect("pivot is nonzero");
        let (prow, prhs) = {
            let (a, b) = &rows[r];
            (a.iter().map(|x| x.mul(&inv)).collect::<Vec<_>>(), b.mul(&inv))
        };
        rows[r] = (prow.clone(), prhs.clone());
        for i in 0..rows.len() {
            if i == r || rows[i].0[col].is_zero() {
                continue;
            }
            let factor = rows[i].0[col].clone();
            for (k, pk) in prow.iter().enumerate().skip(col) {
                if !pk.is_zero() {
                    rows[i].0[k] = rows[i].0[k].sub(&pk.mul(&factor));
                }
            }
            rows[i].1 = rows[i].1.sub(&prhs.mul(&factor));
        }
        pivots.push((r, col));
        r += 1;
    }
    let consistent = rows[r..].iter().all(|(_, b)| b.is_zero());
    let mut x = vec![Scalar::zero(); n];
    for &(row, col) in &pivots {
        x[col] = rows[row].1.clone();
    }
    (x, consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::Universe;

    #[test]
    fn closed_form_admits_zero() {
        let u = Universe::builder().coordinate("y").build().unwrap();
        let omega = FormExpr::parse(&u, "dy").unwrap();
        let eta = solve_connection(&omega, &[], None).unwrap();
        assert!(eta.is_zero());
    }

    #[test]
    fn two_parameter_family_on_c2() {
        let u = Universe::builder()
            .coordinate("z1")
            .coordinate("z2")
            .coordinate("zb1")
            .coordinate("zb2")
            .parameter("lambda1")
            .parameter("lambda2")
            .build()
            .unwrap();
        let h = "(lambda1*z1*zb1 + lambda2*z2*zb2)";
        let omega = FormExpr::parse(&u, "lambda2*z2*dz1 - lambda1*z1*dz2").unwrap();
        let ansatz = [
            FormExpr::parse(&u, &format!("zb1*dz1/{h}")).unwrap(),
            FormExpr::parse(&u, &format!("zb2*dz2/{h}")).unwrap(),
        ];
        let eta = solve_connection(&omega, &ansatz, None).unwrap();
        let expected = FormExpr::parse(&u, &format!("-(lambda1 + lambda2)*(zb1*dz1 + zb2*dz2)/{h}")).unwrap();
        assert_eq!(eta, expected);
        assert!((&omega.exterior_d() + &(&eta * &omega)).is_zero());
    }

    #[test]
    fn monomial_form() {
        let u = Universe::builder().coordinate("z1").coordinate("z2").build().unwrap();
        let omega = FormExpr::parse(&u, "z1*dz2").unwrap();
        let eta = solve_connection(&omega, &[FormExpr::parse(&u, "dz1/z1").unwrap()], None).unwrap();
        assert_eq!(eta, FormExpr::parse(&u, "-dz1/z1").unwrap());
    }

    #[test]
    fn insufficient_ansatz_reports_residual() {
        let u = Universe::builder().coordinate("z1").coordinate("z2").build().unwrap();
        let omega = FormExpr::parse(&u, "z1*dz2").unwrap();
        let e = solve_connection(&omega, &[FormExpr::parse(&u, "dz2").unwrap()], None).unwrap_err();
        match e {
            FoliationError::NoSolution { residual } => assert_eq!(residual, "dz1*dz2"),
            other => panic!("{other:?}"),
        }
    }
}
