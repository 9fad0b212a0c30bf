//! Seeded random polynomials and forms for property checks and generic instances.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cdga::{FormExpr, Universe};
use crate::scalar::{GaussRational, Monomial, Polynomial, Scalar};

/// Shape of random polynomials: at most `max_terms` terms of total degree at most
/// `max_degree`, integer coefficients in `-coef..=coef` (zero excluded).
#[derive(Clone, Copy, Debug)]
pub struct PolyShape {
    pub max_terms: usize,
    pub max_degree: u32,
    pub coef: i64,
}

impl Default for PolyShape {
    fn default() -> Self {
        PolyShape { max_terms: 3, max_degree: 2, coef: 3 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero_coef<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    let v = rng.gen_range(1..=bound.max(1));
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

pub fn random_monomial<R: Rng>(rng: &mut R, vars: &[usize], max_degree: u32) -> Monomial {
    let mut m = Monomial::one();
    if vars.is_empty() {
        return m;
    }
    let deg = rng.gen_range(0..=max_degree);
    for _ in 0..deg {
        m = m.mul(&Monomial::var(vars[rng.gen_range(0..vars.len())]));
    }
    m
}

pub fn random_poly<R: Rng>(rng: &mut R, vars: &[usize], shape: PolyShape) -> Polynomial {
    let n = rng.gen_range(1..=shape.max_terms.max(1));
    let mut p = Polynomial::zero();
    for _ in 0..n {
        let m = random_monomial(rng, vars, shape.max_degree);
        p.add_term(m, &GaussRational::from_int(nonzero_coef(rng, shape.coef)));
    }
    p
}

/// A random homogeneous form of degree `degree` built from the given degree-0
/// variables and degree-1 generators. With `with_denominator` some coefficients get
/// a random denominator of the form `1 + p` with `p` having no constant term, so it
/// never vanishes identically.
pub fn random_form<R: Rng>(
    rng: &mut R,
    universe: &Arc<Universe>,
    degree: usize,
    vars: &[usize],
    generators: &[usize],
    shape: PolyShape,
    with_denominator: bool,
) -> FormExpr {
    let mut acc = FormExpr::zero(universe);
    if degree > generators.len() {
        return acc;
    }
    let n = rng.gen_range(1..=shape.max_terms.max(1));
    for _ in 0..n {
        let mut chosen: Vec<usize> = generators.to_vec();
        // partial Fisher–Yates
        for k in 0..degree {
            let j = rng.gen_range(k..chosen.len());
            chosen.swap(k, j);
        }
        let mask = chosen[..degree].iter().fold(0u64, |m, &g| m | (1 << g));
        let mut coef = Scalar::from_poly(random_poly(rng, vars, shape));
        if with_denominator && !vars.is_empty() && rng.gen_bool(0.5) {
            let mut den = Polynomial::one();
            let v = vars[rng.gen_range(0..vars.len())];
            den.add_term(Monomial::var(v), &GaussRational::from_int(nonzero_coef(rng, shape.coef)));
            coef = coef.div(&Scalar::from_poly(den)).expect("1 + k*x is nonzero");
        }
        acc = &acc + &FormExpr::monomial(universe, mask, coef);
    }
    acc
}
