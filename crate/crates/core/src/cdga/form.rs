//! Differential forms with exact rational-function coefficients.
//!
//! A monomial in the odd generators is a `u64` bitmask; bit `i` is the generator with
//! declaration index `i`. The normal form of a monomial lists its generators in
//! ascending index order, so a product's sign is the parity of the sorting
//! permutation and repeated generators vanish.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{parse, AlgebraError, Universe};
use crate::scalar::{GaussRational, Scalar};

pub(crate) type Terms = BTreeMap<u64, Scalar>;

/// Sign of `a ∧ b` relative to the sorted monomial `a | b`: `Some(false)` for `+`,
/// `Some(true)` for `−`, `None` when the product vanishes.
pub(crate) fn wedge_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // generators of `a` with larger index must move past generator j
        swaps += (a >> j).count_ones();
    }
    Some(swaps % 2 == 1)
}

pub(crate) fn add_into(t: &mut Terms, mask: u64, s: Scalar) {
    if s.is_zero() {
        return;
    }
    match t.entry(mask) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(s);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().add(&s);
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

pub(crate) fn wedge_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (&ma, ca) in a {
        for (&mb, cb) in b {
            if let Some(neg) = wedge_sign(ma, mb) {
                let c = ca.mul(cb);
                add_into(&mut out, ma | mb, if neg { c.neg() } else { c });
            }
        }
    }
    out
}

/// `d` applied termwise with graded Leibniz and the declared generator differentials.
pub(crate) fn exterior_d_terms(u: &Universe, t: &Terms) -> Terms {
    let mut out = Terms::new();
    for (&mask, coef) in t {
        for v in coef.variables() {
            let dv = &u.scalars[v].differential;
            if dv.is_empty() {
                continue;
            }
            let partial = coef.derivative(v);
            if partial.is_zero() {
                continue;
            }
            for (&mg, cg) in dv {
                if let Some(neg) = wedge_sign(mg, mask) {
                    let c = partial.mul(cg);
                    add_into(&mut out, mg | mask, if neg { c.neg() } else { c });
                }
            }
        }
        let mut rest = mask;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let dg = &u.generators[g].differential;
            if dg.is_empty() {
                continue;
            }
            let below = mask & ((1u64 << g) - 1);
            let above = mask & !((1u64 << (g + 1)) - 1);
            let position_odd = below.count_ones() % 2 == 1;
            for (&m2, c2) in dg {
                let Some(n1) = wedge_sign(below, m2) else { continue };
                let Some(n2) = wedge_sign(below | m2, above) else { continue };
                let c = coef.mul(c2);
                let neg = n1 ^ n2 ^ position_odd;
                add_into(&mut out, below | m2 | above, if neg { c.neg() } else { c });
            }
        }
    }
    out
}

pub(crate) fn render_terms(u: &Universe, t: &Terms) -> String {
    if t.is_empty() {
        return "0".to_string();
    }
    let namer = u.scalar_namer();
    let parts: Vec<String> = t
        .iter()
        .map(|(&mask, c)| {
            let gens: Vec<&str> = (0..64).filter(|i| mask & (1 << i) != 0).map(|i| u.generator_name(i)).collect();
            let coef = c.render(&namer);
            if gens.is_empty() {
                format!("({coef})")
            } else if c.is_one() {
                gens.join("*")
            } else {
                format!("({coef})*{}", gens.join("*"))
            }
        })
        .collect();
    parts.join(" + ")
}

/// An element of the free graded-commutative algebra over a [`Universe`], in normal form.
#[derive(Clone)]
pub struct FormExpr {
    universe: Arc<Universe>,
    terms: Terms,
}

impl FormExpr {
    pub(crate) fn from_terms(universe: &Arc<Universe>, terms: Terms) -> Self {
        FormExpr { universe: Arc::clone(universe), terms }
    }

    pub fn zero(universe: &Arc<Universe>) -> Self {
        FormExpr::from_terms(universe, Terms::new())
    }

    pub fn one(universe: &Arc<Universe>) -> Self {
        FormExpr::scalar(universe, Scalar::one())
    }

    pub fn scalar(universe: &Arc<Universe>, s: Scalar) -> Self {
        let mut terms = Terms::new();
        add_into(&mut terms, 0, s);
        FormExpr::from_terms(universe, terms)
    }

    /// A single named symbol of either degree.
    pub fn symbol(universe: &Arc<Universe>, name: &str) -> Result<Self, AlgebraError> {
        match universe.lookup(name) {
            Some(super::SymbolRef::Scalar(s)) => Ok(FormExpr::scalar(universe, Scalar::var(s))),
            Some(super::SymbolRef::Generator(g)) => Ok(FormExpr::monomial(universe, 1 << g, Scalar::one())),
            None => Err(AlgebraError::Undeclared(name.to_string())),
        }
    }

    /// Parses an expression in the manifest grammar.
    pub fn parse(universe: &Arc<Universe>, text: &str) -> Result<Self, AlgebraError> {
        Ok(FormExpr::from_terms(universe, parse::parse_terms(universe, text, true)?))
    }

    pub fn monomial(universe: &Arc<Universe>, mask: u64, coef: Scalar) -> Self {
        FormExpr::scalar(universe, coef).with_mask(mask)
    }

    fn with_mask(mut self, mask: u64) -> Self {
        self.terms = self.terms.into_iter().map(|(m, c)| (m | mask, c)).collect();
        self
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn same_universe(&self, other: &FormExpr) -> bool {
        Arc::ptr_eq(&self.universe, &other.universe) || self.universe.id() == other.universe.id()
    }

    fn check_universe(&self, other: &FormExpr) -> Result<(), AlgebraError> {
        if self.same_universe(other) {
            Ok(())
        } else {
            Err(AlgebraError::UniverseMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(monomial bitmask, coefficient)` pairs in normal-form order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Scalar)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    /// The degree if the form is nonzero and homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|m| m.count_ones() as usize);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// True for the zero form and for forms homogeneous of degree `deg`.
    pub fn is_homogeneous_of(&self, deg: usize) -> bool {
        self.terms.keys().all(|m| m.count_ones() as usize == deg)
    }

    /// The degree-0 part as a scalar.
    pub fn scalar_part(&self) -> Scalar {
        self.terms.get(&0).cloned().unwrap_or_default()
    }

    pub fn coefficient(&self, mask: u64) -> Scalar {
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn checked_add(&self, other: &FormExpr) -> Result<FormExpr, AlgebraError> {
        self.check_universe(other)?;
        let mut terms = self.terms.clone();
        for (&m, c) in &other.terms {
            add_into(&mut terms, m, c.clone());
        }
        Ok(FormExpr::from_terms(&self.universe, terms))
    }

    pub fn scale(&self, k: &Scalar) -> FormExpr {
        if k.is_zero() {
            return FormExpr::zero(&self.universe);
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|(&m, c)| {
                let p = c.mul(k);
                (!p.is_zero()).then_some((m, p))
            })
            .collect();
        FormExpr::from_terms(&self.universe, terms)
    }

    pub fn scale_const(&self, k: &GaussRational) -> FormExpr {
        self.scale(&Scalar::constant(k.clone()))
    }

    /// The graded-commutative product.
    pub fn wedge(&self, other: &FormExpr) -> Result<FormExpr, AlgebraError> {
        self.check_universe(other)?;
        Ok(FormExpr::from_terms(&self.universe, wedge_terms(&self.terms, &other.terms)))
    }

    /// `self ∧ self ∧ ⋯` (`k` factors); `k = 0` gives 1.
    pub fn wedge_pow(&self, k: u32) -> FormExpr {
        let mut acc = FormExpr::one(&self.universe);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// The exterior derivative.
    pub fn exterior_d(&self) -> FormExpr {
        FormExpr::from_terms(&self.universe, exterior_d_terms(&self.universe, &self.terms))
    }

    /// Drops every term with at least `k` transverse generators (reduction modulo I_k).
    pub fn reduce_mod_ideal(&self, k: i64) -> Result<FormExpr, AlgebraError> {
        if k <= 0 {
            return Err(AlgebraError::InvalidIdealIndex(k));
        }
        let mask = self.universe.transverse_mask();
        let terms = self
            .terms
            .iter()
            .filter(|(&m, _)| ((m & mask).count_ones() as i64) < k)
            .map(|(&m, c)| (m, c.clone()))
            .collect();
        Ok(FormExpr::from_terms(&self.universe, terms))
    }

    /// Number of transverse generators in the least-transverse term; `None` for zero.
    pub fn transverse_order(&self) -> Option<u32> {
        let mask = self.universe.transverse_mask();
        self.terms.keys().map(|m| (m & mask).count_ones()).min()
    }

    /// Formal derivative in a parameter, acting on coefficients only.
    pub fn param_derivative(&self, param: &str) -> Result<FormExpr, AlgebraError> {
        let id = match self.universe.lookup(param) {
            Some(super::SymbolRef::Scalar(s)) if self.universe.is_parameter(s) => s,
            Some(_) => return Err(AlgebraError::NotAParameter(param.to_string())),
            None => return Err(AlgebraError::Undeclared(param.to_string())),
        };
        let mut terms = Terms::new();
        for (&m, c) in &self.terms {
            add_into(&mut terms, m, c.derivative(id));
        }
        Ok(FormExpr::from_terms(&self.universe, terms))
    }

    /// Applies a fallible map to every coefficient.
    pub fn try_map_coefficients<E>(&self, f: impl Fn(&Scalar) -> Result<Scalar, E>) -> Result<FormExpr, E> {
        let mut terms = Terms::new();
        for (&m, c) in &self.terms {
            add_into(&mut terms, m, f(c)?);
        }
        Ok(FormExpr::from_terms(&self.universe, terms))
    }

    /// Keeps only the terms whose monomial satisfies `keep`.
    pub fn filter_terms(&self, keep: impl Fn(u64) -> bool) -> FormExpr {
        let terms = self.terms.iter().filter(|(&m, _)| keep(m)).map(|(&m, c)| (m, c.clone())).collect();
        FormExpr::from_terms(&self.universe, terms)
    }

    /// Substitutes a scalar for a degree-0 symbol in every coefficient.
    pub fn substitute(&self, symbol: &str, value: &Scalar) -> Result<FormExpr, AlgebraError> {
        let id = self.universe.scalar_id(symbol)?;
        self.try_map_coefficients(|c| c.substitute(id, value).ok_or(AlgebraError::DivisionByZero))
    }

    pub fn render(&self) -> String {
        render_terms(&self.universe, &self.terms)
    }
}

impl PartialEq for FormExpr {
    /// Equal iff the normal form of the difference is empty.
    fn eq(&self, other: &FormExpr) -> bool {
        self.same_universe(other) && (self - other).is_zero()
    }
}

impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormExpr({})", self.render())
    }
}

// The operator impls panic on mixed universes; use `checked_add` / `wedge` to get an error.

impl Add for &FormExpr {
    type Output = FormExpr;
    fn add(self, rhs: &FormExpr) -> FormExpr {
        self.checked_add(rhs).expect("FormExpr addition across universes")
    }
}

impl Sub for &FormExpr {
    type Output = FormExpr;
    fn sub(self, rhs: &FormExpr) -> FormExpr {
        self.checked_add(&-rhs).expect("FormExpr subtraction across universes")
    }
}

impl Neg for &FormExpr {
    type Output = FormExpr;
    fn neg(self) -> FormExpr {
        let terms = self.terms.iter().map(|(&m, c)| (m, c.neg())).collect();
        FormExpr::from_terms(&self.universe, terms)
    }
}

/// Wedge product.
impl Mul for &FormExpr {
    type Output = FormExpr;
    fn mul(self, rhs: &FormExpr) -> FormExpr {
        self.wedge(rhs).expect("FormExpr wedge across universes")
    }
}
