//! Generator universes: the declared symbols of a free graded-commutative algebra.
//!
//! Degree-0 symbols (coordinates, local functions, parameters) become polynomial
//! variables inside [`Scalar`] coefficients. Degree-1 generators are the odd
//! exterior generators; at most 64 are supported so that a monomial is a bitmask.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::form::{exterior_d_terms, Terms};
use super::parse;
use super::AlgebraError;
use crate::scalar::Scalar;

/// A declaration as written by a user or a manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorDecl {
    pub name: String,
    pub degree: u32,
    pub transverse: bool,
    /// Expression for `d(name)`. `None` means the default: the linked degree-1
    /// generator `d<name>` for degree-0 symbols if one is declared, otherwise zero.
    pub differential: Option<String>,
    pub conjugate_partner: Option<String>,
}

impl GeneratorDecl {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        GeneratorDecl { name: name.into(), degree, transverse: false, differential: None, conjugate_partner: None }
    }

    pub fn transverse(mut self, flag: bool) -> Self {
        self.transverse = flag;
        self
    }

    pub fn differential(mut self, expr: impl Into<String>) -> Self {
        self.differential = Some(expr.into());
        self
    }

    pub fn conjugate(mut self, partner: impl Into<String>) -> Self {
        self.conjugate_partner = Some(partner.into());
        self
    }
}

/// Resolved name of a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolRef {
    Scalar(usize),
    Generator(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct ScalarSymbol {
    pub(crate) name: String,
    pub(crate) differential: Terms,
    pub(crate) conjugate: Option<usize>,
    pub(crate) linked_generator: Option<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct OddGenerator {
    pub(crate) name: String,
    pub(crate) transverse: bool,
    pub(crate) differential: Terms,
    pub(crate) conjugate: Option<usize>,
    pub(crate) linked_symbol: Option<usize>,
}

#[derive(Debug)]
pub struct Universe {
    id: u64,
    pub(crate) scalars: Vec<ScalarSymbol>,
    pub(crate) generators: Vec<OddGenerator>,
    by_name: HashMap<String, SymbolRef>,
    decls: Vec<GeneratorDecl>,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

const RESERVED: &[&str] = &["i", "d", "wedge"];

impl Universe {
    pub fn builder() -> UniverseBuilder {
        UniverseBuilder::default()
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolRef> {
        self.by_name.get(name).copied()
    }

    pub fn scalar_id(&self, name: &str) -> Result<usize, AlgebraError> {
        match self.lookup(name) {
            Some(SymbolRef::Scalar(i)) => Ok(i),
            _ => Err(AlgebraError::Undeclared(name.to_string())),
        }
    }

    pub fn generator_id(&self, name: &str) -> Result<usize, AlgebraError> {
        match self.lookup(name) {
            Some(SymbolRef::Generator(i)) => Ok(i),
            _ => Err(AlgebraError::Undeclared(name.to_string())),
        }
    }

    pub fn scalar_name(&self, id: usize) -> &str {
        &self.scalars[id].name
    }

    pub fn generator_name(&self, id: usize) -> &str {
        &self.generators[id].name
    }

    pub fn num_scalars(&self) -> usize {
        self.scalars.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// A degree-0 symbol with vanishing differential.
    pub fn is_parameter(&self, id: usize) -> bool {
        self.scalars[id].differential.is_empty()
    }

    pub fn is_transverse(&self, generator: usize) -> bool {
        self.generators[generator].transverse
    }

    pub fn transverse_mask(&self) -> u64 {
        self.generators.iter().enumerate().filter(|(_, g)| g.transverse).fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn scalar_conjugate(&self, id: usize) -> Option<usize> {
        self.scalars[id].conjugate
    }

    pub fn generator_conjugate(&self, id: usize) -> Option<usize> {
        self.generators[id].conjugate
    }

    /// The degree-0 symbol whose differential is exactly this generator.
    pub fn linked_symbol(&self, generator: usize) -> Option<usize> {
        self.generators[generator].linked_symbol
    }

    pub fn linked_generator(&self, scalar: usize) -> Option<usize> {
        self.scalars[scalar].linked_generator
    }

    /// The declarations this universe was built from, in order.
    pub fn declarations(&self) -> &[GeneratorDecl] {
        &self.decls
    }

    pub(crate) fn scalar_namer(&self) -> impl Fn(usize) -> String + '_ {
        move |v| self.scalars[v].name.clone()
    }
}

/// Collects declarations and validates them into a [`Universe`].
#[derive(Default, Clone, Debug)]
pub struct UniverseBuilder {
    decls: Vec<GeneratorDecl>,
    conjugates: Vec<(String, String)>,
}

impl UniverseBuilder {
    pub fn declare(&mut self, decl: GeneratorDecl) -> &mut Self {
        self.decls.push(decl);
        self
    }

    /// A coordinate `name` with its differential generator `d<name>`.
    pub fn coordinate(&mut self, name: &str) -> &mut Self {
        self.declare(GeneratorDecl::new(name, 0));
        self.declare(GeneratorDecl::new(format!("d{name}"), 1))
    }

    /// A coordinate whose differential is a transverse generator.
    pub fn transverse_coordinate(&mut self, name: &str) -> &mut Self {
        self.declare(GeneratorDecl::new(name, 0));
        self.declare(GeneratorDecl::new(format!("d{name}"), 1).transverse(true))
    }

    /// A degree-0 symbol with zero differential.
    pub fn parameter(&mut self, name: &str) -> &mut Self {
        self.declare(GeneratorDecl::new(name, 0).differential("0"))
    }

    /// Declares `a` and `b` as conjugate partners; linked differentials are paired too.
    pub fn conjugates(&mut self, a: &str, b: &str) -> &mut Self {
        self.conjugates.push((a.to_string(), b.to_string()));
        self
    }

    pub fn build(&self) -> Result<Arc<Universe>, AlgebraError> {
        let mut by_name = HashMap::new();
        let mut scalars = Vec::new();
        let mut generators = Vec::new();
        for decl in &self.decls {
            if RESERVED.contains(&decl.name.as_str()) {
                return Err(AlgebraError::Reserved(decl.name.clone()));
            }
            if !parse::is_identifier(&decl.name) {
                return Err(AlgebraError::Parse { pos: 0, msg: format!("invalid identifier `{}`", decl.name) });
            }
            let r = match decl.degree {
                0 => {
                    scalars.push(ScalarSymbol {
                        name: decl.name.clone(),
                        differential: Terms::new(),
                        conjugate: None,
                        linked_generator: None,
                    });
                    SymbolRef::Scalar(scalars.len() - 1)
                }
                1 => {
                    generators.push(OddGenerator {
                        name: decl.name.clone(),
                        transverse: decl.transverse,
                        differential: Terms::new(),
                        conjugate: None,
                        linked_symbol: None,
                    });
                    SymbolRef::Generator(generators.len() - 1)
                }
                degree => return Err(AlgebraError::InvalidDegree { name: decl.name.clone(), degree }),
            };
            if by_name.insert(decl.name.clone(), r).is_some() {
                return Err(AlgebraError::Duplicate(decl.name.clone()));
            }
        }
        if generators.len() > 64 {
            return Err(AlgebraError::TooManyGenerators(generators.len()));
        }

        let mut pairs: Vec<(String, String)> = self
            .decls
            .iter()
            .filter_map(|d| d.conjugate_partner.as_ref().map(|p| (d.name.clone(), p.clone())))
            .collect();
        pairs.extend(self.conjugates.iter().cloned());

        let mut universe = Universe {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            scalars,
            generators,
            by_name,
            decls: self.decls.clone(),
        };

        // Default links: degree-0 `x` gets d x = `dx` when `dx` exists.
        for decl in self.decls.iter().filter(|d| d.degree == 0 && d.differential.is_none()) {
            let s = universe.scalar_id(&decl.name)?;
            if let Some(SymbolRef::Generator(g)) = universe.lookup(&format!("d{}", decl.name)) {
                universe.scalars[s].differential.insert(1 << g, Scalar::one());
            }
        }
        for decl in self.decls.iter().filter(|d| d.differential.is_some()) {
            let text = decl.differential.as_deref().unwrap_or("0");
            let terms = parse::parse_terms(&universe, text, false)?;
            let expected = decl.degree as usize + 1;
            if terms.keys().any(|m| m.count_ones() as usize != expected) {
                return Err(AlgebraError::DifferentialDegree { name: decl.name.clone(), expected });
            }
            match universe.lookup(&decl.name) {
                Some(SymbolRef::Scalar(s)) => universe.scalars[s].differential = terms,
                Some(SymbolRef::Generator(g)) => universe.generators[g].differential = terms,
                None => unreachable!("declared above"),
            }
        }
        for s in 0..universe.scalars.len() {
            let d = &universe.scalars[s].differential;
            if d.len() == 1 {
                let (&mask, coef) = d.iter().next().expect("one term");
                if mask.count_ones() == 1 && coef.is_one() {
                    let g = mask.trailing_zeros() as usize;
                    if universe.generators[g].linked_symbol.is_none() {
                        universe.generators[g].linked_symbol = Some(s);
                        universe.scalars[s].linked_generator = Some(g);
                    }
                }
            }
        }

        for (a, b) in pairs {
            let (ra, rb) = match (universe.lookup(&a), universe.lookup(&b)) {
                (Some(ra), Some(rb)) => (ra, rb),
                (None, _) => return Err(AlgebraError::Undeclared(a)),
                (_, None) => return Err(AlgebraError::Undeclared(b)),
            };
            match (ra, rb) {
                (SymbolRef::Scalar(x), SymbolRef::Scalar(y)) => {
                    universe.scalars[x].conjugate = Some(y);
                    universe.scalars[y].conjugate = Some(x);
                    if let (Some(gx), Some(gy)) =
                        (universe.scalars[x].linked_generator, universe.scalars[y].linked_generator)
                    {
                        universe.generators[gx].conjugate = Some(gy);
                        universe.generators[gy].conjugate = Some(gx);
                    }
                }
                (SymbolRef::Generator(x), SymbolRef::Generator(y)) => {
                    universe.generators[x].conjugate = Some(y);
                    universe.generators[y].conjugate = Some(x);
                }
                _ => {
                    return Err(AlgebraError::Parse {
                        pos: 0,
                        msg: format!("conjugate pair `{a}`/`{b}` mixes degrees"),
                    })
                }
            }
        }

        // d∘d must vanish on every generator.
        for s in 0..universe.scalars.len() {
            let dd = exterior_d_terms(&universe, &universe.scalars[s].differential);
            if !dd.is_empty() {
                return Err(AlgebraError::DifferentialNotClosed {
                    name: universe.scalars[s].name.clone(),
                    residual: super::form::render_terms(&universe, &dd),
                });
            }
        }
        for g in 0..universe.generators.len() {
            let dd = exterior_d_terms(&universe, &universe.generators[g].differential);
            if !dd.is_empty() {
                return Err(AlgebraError::DifferentialNotClosed {
                    name: universe.generators[g].name.clone(),
                    residual: super::form::render_terms(&universe, &dd),
                });
            }
        }
        Ok(Arc::new(universe))
    }
}
