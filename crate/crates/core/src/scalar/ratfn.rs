//! Exact rational functions in degree-0 symbols.
//!
//! A [`Scalar`] is `numerator / Π baseᵢ^eᵢ`. Each base is a monic, non-constant
//! polynomial that is not a bare monomial; monomial factors are split into one base
//! per variable. Distinct bases are treated as coprime for the purpose of forming
//! common denominators, which keeps sums from squaring their denominators. That is
//! always correct (a common multiple is a common multiple) but does not make the
//! representation canonical, so equality is decided by cross-multiplication.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{GaussRational, Monomial, Polynomial};

#[derive(Clone, Debug, Default)]
pub struct Scalar {
    num: Polynomial,
    den: BTreeMap<Polynomial, u32>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_poly(Polynomial::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::constant(GaussRational::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::constant(GaussRational::from_ratio(num, den))
    }

    pub fn constant(c: GaussRational) -> Self {
        Scalar::from_poly(Polynomial::constant(c))
    }

    pub fn var(id: usize) -> Self {
        Scalar::from_poly(Polynomial::var(id))
    }

    pub fn from_poly(num: Polynomial) -> Self {
        Scalar { num, den: BTreeMap::new() }
    }

    /// Builds `num / Π factorᵢ^eᵢ`. Returns `None` if any factor is the zero polynomial.
    pub fn from_parts(num: Polynomial, factors: impl IntoIterator<Item = (Polynomial, u32)>) -> Option<Self> {
        let mut s = Scalar { num, den: BTreeMap::new() };
        for (p, e) in factors {
            s.push_factor(p, e)?;
        }
        s.cancel();
        Some(s)
    }

    fn push_factor(&mut self, p: Polynomial, e: u32) -> Option<()> {
        if e == 0 {
            return Some(());
        }
        if p.is_zero() {
            return None;
        }
        if let Some(c) = p.as_constant() {
            self.num = self.num.scale(&c.inv()?.pow(e));
            return Some(());
        }
        let content = p.monomial_content();
        for (v, k) in content.factors() {
            *self.den.entry(Polynomial::var(v)).or_insert(0) += k * e;
        }
        let rest = p.div_monomial(&content);
        let (lc, monic) = rest.monic();
        self.num = self.num.scale(&lc.inv()?.pow(e));
        if !monic.is_one() {
            *self.den.entry(monic).or_insert(0) += e;
        }
        Some(())
    }

    /// Cancels denominator bases that divide the numerator exactly.
    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let bases: Vec<Polynomial> = self.den.keys().cloned().collect();
        for base in bases {
            let mut e = self.den[&base];
            while e > 0 {
                let q = match base.as_term() {
                    Some((m, _)) => {
                        if m.divides(&self.num.monomial_content()) {
                            Some(self.num.div_monomial(m))
                        } else {
                            None
                        }
                    }
                    None => self.num.div_exact(&base),
                };
                match q {
                    Some(q) => {
                        self.num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e == 0 {
                self.den.remove(&base);
            } else {
                self.den.insert(base, e);
            }
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    /// Denominator factors `(base, exponent)`; the denominator is their product.
    pub fn denominator_factors(&self) -> impl Iterator<Item = (&Polynomial, u32)> {
        self.den.iter().map(|(b, &e)| (b, e))
    }

    pub fn denominator(&self) -> Polynomial {
        self.den.iter().fold(Polynomial::one(), |acc, (b, &e)| acc.mul(&b.pow(e)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.den.is_empty().then_some(&self.num)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<GaussRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut vars = self.num.variables();
        for b in self.den.keys() {
            vars.extend(b.variables());
        }
        vars
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.num.contains_var(var) || self.den.keys().any(|b| b.contains_var(var))
    }

    fn lift(&self, target: &BTreeMap<Polynomial, u32>) -> Polynomial {
        let mut out = self.num.clone();
        for (b, &e) in target {
            let have = self.den.get(b).copied().unwrap_or(0);
            if e > have {
                out = out.mul(&b.pow(e - have));
            }
        }
        out
    }

    fn common_den(&self, other: &Scalar) -> BTreeMap<Polynomial, u32> {
        let mut den = self.den.clone();
        for (b, &e) in &other.den {
            let slot = den.entry(b.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        den
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            let mut s = Scalar { num: self.num.add(&other.num), den: self.den.clone() };
            s.cancel();
            return s;
        }
        let den = self.common_den(other);
        let mut s = Scalar { num: self.lift(&den).add(&other.lift(&den)), den };
        s.cancel();
        s
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, k: &GaussRational) -> Scalar {
        if k.is_zero() {
            return Scalar::zero();
        }
        Scalar { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        if self.is_zero() || other.is_zero() {
            return Scalar::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut den = self.den.clone();
        for (b, &e) in &other.den {
            *den.entry(b.clone()).or_insert(0) += e;
        }
        let mut s = Scalar { num: self.num.mul(&other.num), den };
        s.cancel();
        s
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        let num = self.denominator();
        Scalar::from_parts(num, [(self.num.clone(), 1)])
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        Some(self.mul(&other.inv()?))
    }

    pub fn pow(&self, exp: i32) -> Option<Scalar> {
        let base = if exp < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    /// Formal partial derivative in `var` by the quotient rule.
    pub fn derivative(&self, var: usize) -> Scalar {
        if self.is_zero() {
            return Scalar::zero();
        }
        let moving: Vec<(&Polynomial, u32, Polynomial)> = self
            .den
            .iter()
            .filter_map(|(b, &e)| {
                let db = b.derivative(var);
                (!db.is_zero()).then_some((b, e, db))
            })
            .collect();
        let dnum = self.num.derivative(var);
        if moving.is_empty() {
            let mut s = Scalar { num: dnum, den: self.den.clone() };
            s.cancel();
            return s;
        }
        // d(n / Π b^e) = (n' Π_S b − n Σ_S e·b' Π_{S∖b} b) / (Π b^e · Π_S b)
        let prod_all = moving.iter().fold(Polynomial::one(), |acc, (b, _, _)| acc.mul(b));
        let mut num = dnum.mul(&prod_all);
        for (i, (_, e, db)) in moving.iter().enumerate() {
            let others = moving
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Polynomial::one(), |acc, (_, (b, _, _))| acc.mul(b));
            let term = self.num.mul(db).mul(&others).scale(&GaussRational::from_int(*e as i64));
            num = num.sub(&term);
        }
        let mut den = self.den.clone();
        for (b, _, _) in &moving {
            *den.get_mut(*b).expect("moving base present") += 1;
        }
        let mut s = Scalar { num, den };
        s.cancel();
        s
    }

    /// Applies `f` to the numerator and every denominator base, then renormalizes.
    /// Returns `None` if some base maps to zero.
    pub fn map_polys(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Option<Scalar> {
        Scalar::from_parts(f(&self.num), self.den.iter().map(|(b, &e)| (f(b), e)))
    }

    /// Substitutes a scalar for a variable.
    pub fn substitute(&self, var: usize, value: &Scalar) -> Option<Scalar> {
        if !self.depends_on(var) {
            return Some(self.clone());
        }
        let sub_poly = |p: &Polynomial| -> Option<Scalar> {
            let mut acc = Scalar::zero();
            for (m, c) in p.terms() {
                let e = m.exponent(var);
                let mut exps = m.exponents().to_vec();
                if e > 0 {
                    exps[var] = 0;
                }
                let rest = Scalar::from_poly(Polynomial::term(Monomial::from_exponents(exps), c.clone()));
                acc = acc.add(&rest.mul(&value.pow(e as i32)?));
            }
            Some(acc)
        };
        let mut out = sub_poly(&self.num)?;
        for (b, &e) in &self.den {
            out = out.div(&sub_poly(b)?.pow(e as i32)?)?;
        }
        Some(out)
    }

    /// Renders in the manifest expression grammar.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        let num = self.num.render(name);
        if self.den.is_empty() {
            return num;
        }
        let num = if self.num.len() > 1 { format!("({num})") } else { num };
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(b, &e)| {
                let r = b.render(name);
                let r = if b.len() > 1 { format!("({r})") } else { r };
                if e == 1 {
                    r
                } else {
                    format!("{r}^{e}")
                }
            })
            .collect();
        if den.len() == 1 {
            format!("{num}/{}", den[0])
        } else {
            format!("{num}/({})", den.join("*"))
        }
    }
}

impl PartialEq for Scalar {
    /// Cross-multiplication over the common denominator; never compares floats.
    fn eq(&self, other: &Scalar) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        let den = self.common_den(other);
        self.lift(&den) == other.lift(&den)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<GaussRational> for Scalar {
    fn from(c: GaussRational) -> Self {
        Scalar::constant(c)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| format!("x{v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Scalar {
        Scalar::var(i)
    }

    #[test]
    fn zero_has_trivial_denominator() {
        let a = x(0).div(&x(1)).unwrap();
        let z = a.sub(&a);
        assert!(z.is_zero());
        assert!(z.is_polynomial());
    }

    #[test]
    fn sum_uses_max_exponent_denominator() {
        let h = Scalar::from_poly(Polynomial::var(0).add(&Polynomial::var(1)));
        let a = h.pow(-2).unwrap();
        let b = h.pow(-3).unwrap();
        let s = a.add(&b);
        let (_, e) = s.denominator_factors().next().unwrap();
        assert_eq!(e, 3);
        assert_eq!(s.mul(&h.pow(3).unwrap()), h.add(&Scalar::one()));
    }

    #[test]
    fn cancellation_of_exact_factors() {
        let h = Scalar::from_poly(Polynomial::var(0).mul(&Polynomial::var(1)).add(&Polynomial::one()));
        let q = h.mul(&x(2)).div(&h).unwrap();
        assert!(q.is_polynomial());
        assert_eq!(q, x(2));
        let r = x(0).mul(&x(1)).div(&x(0)).unwrap();
        assert_eq!(r.numerator(), &Polynomial::var(1));
        assert!(r.is_polynomial());
    }

    #[test]
    fn quotient_rule_against_hand_derivation() {
        // d/dx0 of 1/(x0*x1 + x2) = -x1/(x0*x1 + x2)^2
        let h = Scalar::from_poly(Polynomial::var(0).mul(&Polynomial::var(1)).add(&Polynomial::var(2)));
        let d = h.inv().unwrap().derivative(0);
        let expected = x(1).neg().div(&h.pow(2).unwrap()).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let a = x(0).div(&x(1)).unwrap();
        let b = x(0).mul(&x(2)).div(&x(1).mul(&x(2))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, x(0));
    }

    #[test]
    fn inverse_of_zero_is_none() {
        assert!(Scalar::zero().inv().is_none());
        assert!(Scalar::from_parts(Polynomial::one(), [(Polynomial::zero(), 1)]).is_none());
    }
}
