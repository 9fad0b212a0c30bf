//! Sparse multivariate polynomials over ℚ(i).
//!
//! Variables are small integer ids handed out by a [`Universe`](crate::cdga::Universe).
//! Monomials are dense exponent vectors with trailing zeros trimmed, so the derived
//! `Ord` on the vector is exactly lexicographic order with variable 0 largest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::GaussRational;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(id: usize) -> Self {
        Self::var_pow(id, 1)
    }

    pub fn var_pow(id: usize, exp: u32) -> Self {
        let mut v = vec![0; id + 1];
        v[id] = exp;
        Monomial(v).trimmed()
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, id: usize) -> u32 {
        self.0.get(id).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Iterates `(variable, exponent)` over the variables actually present.
    pub fn factors(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let v = (0..n).map(|i| self.exponent(i) + other.exponent(i)).collect();
        Monomial(v)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let v = (0..other.0.len()).map(|i| other.0[i] - self.exponent(i)).collect();
        Monomial(v).trimmed()
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial((0..n).map(|i| self.exponent(i).max(other.exponent(i))).collect())
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().min(other.0.len());
        Monomial((0..n).map(|i| self.0[i].min(other.0[i])).collect()).trimmed()
    }

    /// Graded lexicographic comparison: total degree first, then lex.
    pub fn cmp_grlex(&self, other: &Monomial) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.cmp(other))
    }
}

/// A polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, GaussRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(GaussRational::one())
    }

    pub fn constant(c: GaussRational) -> Self {
        Polynomial::term(Monomial::one(), c)
    }

    pub fn var(id: usize) -> Self {
        Polynomial::term(Monomial::var(id), GaussRational::one())
    }

    pub fn term(m: Monomial, c: GaussRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, GaussRational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in iter {
            p.add_term(m, &c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.terms.len() {
            0 => Some(GaussRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// Single-term polynomial, as `(monomial, coefficient)`.
    pub fn as_term(&self) -> Option<(&Monomial, &GaussRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    /// Leading term in lex order.
    pub fn leading(&self) -> Option<(&Monomial, &GaussRational)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> GaussRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(var)).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.factors().map(|(v, _)| v)).collect()
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    pub fn add_term(&mut self, m: Monomial, c: &GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &GaussRational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial, k: &GaussRational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c * k)).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        let (lm, lc) = divisor.leading()?;
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.inv()?));
        }
        let lc_inv = lc.inv()?;
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((rm, rc)) = rem.leading() {
            if !lm.divides(rm) {
                return None;
            }
            let qm = lm.quotient_of(rm);
            let qc = rc * &lc_inv;
            rem = rem.sub(&divisor.mul_monomial(&qm, &qc));
            quot.add_term(qm, &qc);
        }
        Some(quot)
    }

    /// Formal partial derivative in `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[var] -= 1;
            out.add_term(Monomial::from_exponents(exps), &(c * &GaussRational::from_int(e as i64)));
        }
        out
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    pub fn div_monomial(&self, mono: &Monomial) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (mono.quotient_of(m), c.clone())).collect() }
    }

    /// Splits `self = lc · monic` with the leading coefficient of `monic` equal to one.
    pub fn monic(&self) -> (GaussRational, Polynomial) {
        match self.leading() {
            None => (GaussRational::zero(), Polynomial::zero()),
            Some((_, lc)) => {
                let lc = lc.clone();
                let inv = lc.inv().expect("leading coefficient is nonzero");
                (lc, self.scale(&inv))
            }
        }
    }

    /// Substitutes polynomials for variables.
    pub fn substitute(&self, var: usize, value: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                out.add_term(m.clone(), c);
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[var] = 0;
            let rest = Polynomial::term(Monomial::from_exponents(exps), c.clone());
            out = out.add(&rest.mul(&value.pow(e)));
        }
        out
    }

    /// Splits into coefficients of monomials in the variables accepted by `is_outer`;
    /// the coefficients are polynomials in the remaining variables.
    pub fn split_by(&self, is_outer: impl Fn(usize) -> bool) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut outer = vec![0; m.exponents().len()];
            let mut inner = vec![0; m.exponents().len()];
            for (v, e) in m.factors() {
                if is_outer(v) {
                    outer[v] = e;
                } else {
                    inner[v] = e;
                }
            }
            out.entry(Monomial::from_exponents(outer)).or_default().add_term(Monomial::from_exponents(inner), c);
        }
        out
    }

    /// Renders with the given variable names, in descending lex order.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> =
                m.factors().map(|(v, e)| if e == 1 { name(v) } else { format!("{}^{}", name(v), e) }).collect();
            let negative = c.is_real() && c.re < num_rational::BigRational::from_integer(0.into());
            let (sign, mag) = if negative { ("-", -c) } else { ("+", c.clone()) };
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => out.push_str(&mag.to_string()),
                (false, true) => out.push_str(&mono.join("*")),
                (false, false) => out.push_str(&format!("{}*{}", mag, mono.join("*"))),
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| format!("x{v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(i)
    }

    #[test]
    fn lex_order_matches_vec_order() {
        // x0 > x1^5 > x1 > 1
        let a = Monomial::var(0);
        let b = Monomial::var_pow(1, 5);
        let c = Monomial::var(1);
        assert!(a > b && b > c && c > Monomial::one());
        // multiplicative: a > b implies a*m > b*m
        let m = Monomial::var_pow(2, 3);
        assert!(a.mul(&m) > b.mul(&m));
    }

    #[test]
    fn exact_division_and_remainder() {
        let h = x(0).mul(&x(1)).add(&x(2).mul(&x(3)));
        let p = h.mul(&h).mul(&x(0).add(&Polynomial::one()));
        let q = p.div_exact(&h).unwrap();
        assert_eq!(q, h.mul(&x(0).add(&Polynomial::one())));
        assert!(p.add(&Polynomial::one()).div_exact(&h).is_none());
    }

    #[test]
    fn derivative_power_rule() {
        let p = x(0).pow(3).mul(&x(1));
        let d = p.derivative(0);
        assert_eq!(d, x(0).pow(2).mul(&x(1)).scale(&GaussRational::from_int(3)));
        assert!(p.derivative(5).is_zero());
    }

    #[test]
    fn render_signs() {
        let p = x(0).sub(&x(1).scale(&GaussRational::from_int(2))).sub(&Polynomial::one());
        assert_eq!(p.to_string(), "x0 - 2*x1 - 1");
    }
}
