//! Degree-0 rewrite rules `monomial -> polynomial`.
//!
//! Rules must strictly decrease graded-lex order, which makes rewriting terminate.
//! Confluence is checked on all critical pairs (overlapping left sides) whose lcm
//! has total degree at most the configured bound.

use std::sync::Arc;

use super::{parse, AlgebraError, FormExpr, Universe};
use crate::scalar::{Monomial, Polynomial, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteRule {
    pub lhs: Monomial,
    pub rhs: Polynomial,
}

impl RewriteRule {
    pub fn new(lhs: Monomial, rhs: Polynomial) -> Result<Self, AlgebraError> {
        if lhs.is_one() {
            return Err(AlgebraError::InvalidRuleLhs("1".into()));
        }
        if let Some((m, _)) = rhs.terms().find(|(m, _)| m.cmp_grlex(&lhs) != std::cmp::Ordering::Less) {
            return Err(AlgebraError::NonTerminating(format!("{} -> {} (term {})", lhs_str(&lhs), rhs, lhs_str(m))));
        }
        Ok(RewriteRule { lhs, rhs })
    }

    /// Parses `"lhs -> rhs"`.
    pub fn parse(universe: &Universe, text: &str) -> Result<Self, AlgebraError> {
        let (l, r) = text
            .split_once("->")
            .ok_or_else(|| AlgebraError::Parse { pos: 0, msg: format!("rule `{text}` has no `->`") })?;
        let lhs = parse::parse_scalar(universe, l)?;
        let lhs = match lhs.as_polynomial().and_then(|p| p.as_term().map(|(m, c)| (m.clone(), c.is_one()))) {
            Some((m, true)) => m,
            _ => return Err(AlgebraError::InvalidRuleLhs(l.trim().to_string())),
        };
        let rhs = parse::parse_scalar(universe, r)?;
        let rhs = rhs.as_polynomial().ok_or_else(|| AlgebraError::Parse {
            pos: 0,
            msg: format!("rule right side `{}` must be a polynomial", r.trim()),
        })?;
        RewriteRule::new(lhs, rhs.clone()).map_err(|e| match e {
            AlgebraError::NonTerminating(_) => AlgebraError::NonTerminating(format!("{} -> {}", l.trim(), r.trim())),
            other => other,
        })
    }
}

fn lhs_str(m: &Monomial) -> String {
    Polynomial::term(m.clone(), crate::scalar::GaussRational::one()).to_string()
}

/// A checked, terminating and confluent rule set.
#[derive(Clone, Debug)]
pub struct RuleSet {
    universe: Arc<Universe>,
    rules: Vec<RewriteRule>,
}

impl RuleSet {
    pub const DEFAULT_DEGREE_BOUND: u32 = 8;

    pub fn new(universe: &Arc<Universe>, rules: Vec<RewriteRule>, degree_bound: u32) -> Result<Self, AlgebraError> {
        let set = RuleSet { universe: Arc::clone(universe), rules };
        set.check_confluent(degree_bound)?;
        Ok(set)
    }

    pub fn parse(universe: &Arc<Universe>, texts: &[&str], degree_bound: u32) -> Result<Self, AlgebraError> {
        let rules = texts.iter().map(|t| RewriteRule::parse(universe, t)).collect::<Result<_, _>>()?;
        RuleSet::new(universe, rules, degree_bound)
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Fully reduces a polynomial. Terminates because every step replaces a term by
    /// terms strictly smaller in a well-order.
    pub fn normalize_poly(&self, p: &Polynomial) -> Polynomial {
        let mut todo = p.clone();
        let mut done = Polynomial::zero();
        'outer: while let Some((m, c)) =
            todo.terms().max_by(|a, b| a.0.cmp_grlex(b.0)).map(|(m, c)| (m.clone(), c.clone()))
        {
            todo = todo.sub(&Polynomial::term(m.clone(), c.clone()));
            for r in &self.rules {
                if r.lhs.divides(&m) {
                    todo = todo.add(&r.rhs.mul_monomial(&r.lhs.quotient_of(&m), &c));
                    continue 'outer;
                }
            }
            done.add_term(m, &c);
        }
        done
    }

    pub fn normalize_scalar(&self, s: &Scalar) -> Result<Scalar, AlgebraError> {
        if self.rules.is_empty() {
            return Ok(s.clone());
        }
        s.map_polys(|p| self.normalize_poly(p)).ok_or(AlgebraError::RewriteSingular)
    }

    pub fn apply(&self, a: &FormExpr) -> Result<FormExpr, AlgebraError> {
        if !Arc::ptr_eq(a.universe(), &self.universe) && a.universe().id() != self.universe.id() {
            return Err(AlgebraError::UniverseMismatch);
        }
        a.try_map_coefficients(|c| self.normalize_scalar(c))
    }

    fn check_confluent(&self, bound: u32) -> Result<(), AlgebraError> {
        let name = self.universe.scalar_namer();
        for (a, ra) in self.rules.iter().enumerate() {
            for rb in &self.rules[a + 1..] {
                // coprime left sides always resolve
                if ra.lhs.gcd(&rb.lhs).is_one() {
                    continue;
                }
                let l = ra.lhs.lcm(&rb.lhs);
                if l.degree() > bound {
                    continue;
                }
                let one = crate::scalar::GaussRational::one();
                let left = self.normalize_poly(&ra.rhs.mul_monomial(&ra.lhs.quotient_of(&l), &one));
                let right = self.normalize_poly(&rb.rhs.mul_monomial(&rb.lhs.quotient_of(&l), &one));
                if left != right {
                    return Err(AlgebraError::NotConfluent {
                        overlap: Polynomial::term(l, one).render(&name),
                        left: left.render(&name),
                        right: right.render(&name),
                    });
                }
            }
        }
        Ok(())
    }
}
