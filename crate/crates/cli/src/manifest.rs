//! Manifest schema and its resolution into symbolic and numeric objects.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use folchar_core::cdga::{FormExpr, GeneratorDecl, RuleSet, Universe};
use folchar_core::foliation::{solve_connection, Category, ChartFoliation, DeformationData};
use folchar_core::numeric::ParamManifold;
use num_complex::Complex64;
use serde::Deserialize;

use crate::InputError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    /// Explicit declarations.
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    /// Shorthand: `x` together with `dx`.
    #[serde(default)]
    pub coordinates: Vec<String>,
    /// Shorthand: `y` together with a transverse `dy`.
    #[serde(default)]
    pub transverse_coordinates: Vec<String>,
    /// Shorthand: degree-0 symbols with zero differential.
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub conjugates: Vec<[String; 2]>,
    /// Rewrite rules `lhs -> rhs` applied to degree-0 coefficients.
    #[serde(default)]
    pub rules: Vec<String>,
    #[serde(default)]
    pub rule_degree_bound: Option<u32>,
    #[serde(default)]
    pub charts: Vec<ChartSpec>,
    #[serde(default)]
    pub deformations: Vec<DeformationSpec>,
    #[serde(default)]
    pub manifolds: Vec<ManifoldSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: u32,
    #[serde(default)]
    pub transverse: bool,
    #[serde(default)]
    pub differential: Option<String>,
    #[serde(default)]
    pub conjugate: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Matrix(Vec<Vec<String>>),
    /// Solve dω + η∧ω = 0 for q = 1 with η in the span of the given 1-forms.
    Solve {
        solve: Vec<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    pub q: usize,
    pub category: String,
    pub tau: TauSpec,
    pub omega: Vec<String>,
    /// Names of the transverse coframe dy¹..dy^q.
    #[serde(default)]
    pub coframe: Option<Vec<String>>,
    /// θ^e; defaults to θ = tr τ.
    #[serde(default)]
    pub theta_e: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauDotSpec {
    Matrix(Vec<Vec<String>>),
    /// `"solve"`: complete ω̇ against the transverse coframe.
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    pub name: String,
    pub chart: String,
    /// Differentiate the chart's own data in this parameter.
    #[serde(default)]
    pub parameter: Option<String>,
    #[serde(default)]
    pub omega_dot: Option<Vec<String>>,
    #[serde(default)]
    pub tau_dot: Option<TauDotSpec>,
    /// Skip the deformation-relation check.
    #[serde(default)]
    pub unchecked: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub name: String,
    /// One of `s3`, `s1`, `s3xs1`.
    pub builtin: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, ComplexValue>,
    /// Built-in coordinate name to manifest symbol name.
    #[serde(default)]
    pub rename: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Run a named identity on seeded generic instances, or on a manifest chart.
    Check {
        identity: String,
        #[serde(default)]
        q: Option<usize>,
        #[serde(default)]
        seeds: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        chart: Option<String>,
        #[serde(default)]
        deformation: Option<String>,
    },
    /// Integrate a class representative; with `m` the chart is twisted first.
    Class {
        class: String,
        #[serde(default)]
        chart: Option<String>,
        #[serde(default)]
        deformation: Option<String>,
        #[serde(default)]
        manifold: Option<String>,
        #[serde(default)]
        m: Option<i64>,
        #[serde(default)]
        circle: Option<String>,
        #[serde(default)]
        expect: Option<ComplexValue>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    /// Twist formula check, symbolic and (with a manifold) numeric.
    Prop31 {
        m: i64,
        #[serde(default)]
        chart: Option<String>,
        #[serde(default)]
        deformation: Option<String>,
        #[serde(default)]
        manifold: Option<String>,
        #[serde(default)]
        circle: Option<String>,
        #[serde(default)]
        expect: Option<ComplexValue>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    Sweep {
        #[serde(default = "default_parameter")]
        parameter: String,
        start: f64,
        stop: f64,
        steps: usize,
        #[serde(default)]
        m: Vec<i64>,
        #[serde(default)]
        chart: Option<String>,
        #[serde(default)]
        deformation: Option<String>,
        #[serde(default)]
        manifold: Option<String>,
        #[serde(default)]
        circle: Option<String>,
        /// Upper bound for successive differences of the fiber-integrated FLK column.
        #[serde(default)]
        max_step: Option<f64>,
    },
}

fn default_parameter() -> String {
    "lambda".into()
}

pub const DEFAULT_CIRCLE: &str = "t";
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        Manifest::from_json(&text)
    }
}

/// A validated manifest: every expression parsed, every chart and deformation built.
#[derive(Debug)]
pub struct Model {
    pub manifest: Manifest,
    pub universe: Arc<Universe>,
    pub rules: Option<RuleSet>,
    pub charts: BTreeMap<String, ChartFoliation>,
    pub deformations: BTreeMap<String, (String, DeformationData)>,
    pub manifolds: BTreeMap<String, ParamManifold>,
}

fn ctx<E: std::fmt::Display>(what: impl std::fmt::Display) -> impl FnOnce(E) -> InputError {
    move |e| InputError(format!("{what}: {e}"))
}

impl Model {
    pub fn build(manifest: Manifest) -> Result<Self, InputError> {
        let mut b = Universe::builder();
        for name in &manifest.coordinates {
            b.coordinate(name);
        }
        for name in &manifest.transverse_coordinates {
            b.transverse_coordinate(name);
        }
        for name in &manifest.parameters {
            b.parameter(name);
        }
        for g in &manifest.generators {
            let mut d = GeneratorDecl::new(&g.name, g.degree).transverse(g.transverse);
            if let Some(diff) = &g.differential {
                d = d.differential(diff);
            }
            if let Some(p) = &g.conjugate {
                d = d.conjugate(p);
            }
            b.declare(d);
        }
        for [a, c] in &manifest.conjugates {
            b.conjugates(a, c);
        }
        let universe = b.build().map_err(ctx("generators"))?;
        let u = &universe;

        let rules = if manifest.rules.is_empty() {
            None
        } else {
            let refs: Vec<&str> = manifest.rules.iter().map(|s| s.as_str()).collect();
            let bound = manifest.rule_degree_bound.unwrap_or(RuleSet::DEFAULT_DEGREE_BOUND);
            Some(RuleSet::parse(u, &refs, bound).map_err(ctx("rules"))?)
        };

        let parse = |what: String, text: &str| FormExpr::parse(u, text).map_err(ctx(what));

        let mut charts = BTreeMap::new();
        for c in &manifest.charts {
            let category: Category = c.category.parse().map_err(ctx(format!("chart `{}`", c.name)))?;
            let omega = c
                .omega
                .iter()
                .enumerate()
                .map(|(i, s)| parse(format!("chart `{}`, omega[{i}]", c.name), s))
                .collect::<Result<Vec<_>, _>>()?;
            if omega.len() != c.q {
                return Err(InputError(format!("chart `{}`: omega has {} entries, q = {}", c.name, omega.len(), c.q)));
            }
            let tau = match &c.tau {
                TauSpec::Matrix(rows) => rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, s)| parse(format!("chart `{}`, tau[{i}][{j}]", c.name), s))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                TauSpec::Solve { solve } => {
                    if c.q != 1 {
                        return Err(InputError(format!("chart `{}`: tau solve needs q = 1", c.name)));
                    }
                    let ansatz = solve
                        .iter()
                        .enumerate()
                        .map(|(k, s)| parse(format!("chart `{}`, ansatz[{k}]", c.name), s))
                        .collect::<Result<Vec<_>, _>>()?;
                    let eta = solve_connection(&omega[0], &ansatz, rules.as_ref())
                        .map_err(ctx(format!("chart `{}`, connection", c.name)))?;
                    vec![vec![eta]]
                }
            };
            let mut chart = ChartFoliation::new(u, category, tau, omega).map_err(ctx(format!("chart `{}`", c.name)))?;
            if let Some(cf) = &c.coframe {
                let refs: Vec<&str> = cf.iter().map(|s| s.as_str()).collect();
                chart = chart.with_transverse_coframe(&refs).map_err(ctx(format!("chart `{}`, coframe", c.name)))?;
            }
            if let Some(te) = &c.theta_e {
                let te = parse(format!("chart `{}`, theta_e", c.name), te)?;
                chart = chart.with_trivialization_form(te).map_err(ctx(format!("chart `{}`, theta_e", c.name)))?;
            }
            if charts.insert(c.name.clone(), chart).is_some() {
                return Err(InputError(format!("duplicate chart `{}`", c.name)));
            }
        }

        let mut deformations = BTreeMap::new();
        for d in &manifest.deformations {
            let what = format!("deformation `{}`", d.name);
            let chart =
                charts.get(&d.chart).ok_or_else(|| InputError(format!("{what}: unknown chart `{}`", d.chart)))?;
            let data = match (&d.parameter, &d.omega_dot) {
                (Some(p), None) => DeformationData::parameter_derivative(chart, p).map_err(ctx(&what))?,
                (None, Some(w)) => {
                    let omega_dot = w
                        .iter()
                        .enumerate()
                        .map(|(i, s)| parse(format!("{what}, omega_dot[{i}]"), s))
                        .collect::<Result<Vec<_>, _>>()?;
                    match &d.tau_dot {
                        Some(TauDotSpec::Keyword(k)) if k == "solve" => {
                            DeformationData::from_omega_dot(chart, omega_dot).map_err(ctx(&what))?
                        }
                        Some(TauDotSpec::Matrix(rows)) => {
                            let tau_dot = rows
                                .iter()
                                .enumerate()
                                .map(|(i, row)| {
                                    row.iter()
                                        .enumerate()
                                        .map(|(j, s)| parse(format!("{what}, tau_dot[{i}][{j}]"), s))
                                        .collect::<Result<Vec<_>, _>>()
                                })
                                .collect::<Result<Vec<_>, _>>()?;
                            if d.unchecked {
                                DeformationData::unchecked(chart, omega_dot, tau_dot).map_err(ctx(&what))?
                            } else {
                                DeformationData::new(chart, omega_dot, tau_dot).map_err(ctx(&what))?
                            }
                        }
                        Some(TauDotSpec::Keyword(k)) => {
                            return Err(InputError(format!("{what}: tau_dot must be a matrix or \"solve\", got `{k}`")))
                        }
                        None => return Err(InputError(format!("{what}: omega_dot needs tau_dot"))),
                    }
                }
                _ => return Err(InputError(format!("{what}: give exactly one of `parameter` or `omega_dot`"))),
            };
            if deformations.insert(d.name.clone(), (d.chart.clone(), data)).is_some() {
                return Err(InputError(format!("duplicate deformation `{}`", d.name)));
            }
        }

        let mut manifolds = BTreeMap::new();
        for m in &manifest.manifolds {
            let what = format!("manifold `{}`", m.name);
            let mut man = ParamManifold::builtin(&m.builtin)
                .ok_or_else(|| InputError(format!("{what}: unknown built-in `{}`", m.builtin)))?;
            for (from, to) in &m.rename {
                man.rename(from, to).map_err(ctx(&what))?;
            }
            for (p, v) in &m.parameters {
                match universe.scalar_id(p) {
                    Ok(id) if universe.is_parameter(id) => {}
                    _ => return Err(InputError(format!("{what}: `{p}` is not a declared parameter"))),
                }
                man.set_parameter(p, v.value());
            }
            if manifolds.insert(m.name.clone(), man).is_some() {
                return Err(InputError(format!("duplicate manifold `{}`", m.name)));
            }
        }

        let model = Model { manifest, universe, rules, charts, deformations, manifolds };
        model.validate_tasks()?;
        Ok(model)
    }

    fn validate_tasks(&self) -> Result<(), InputError> {
        use folchar_core::classes::ClassKind;
        use folchar_core::foliation::Identity;
        for (i, t) in self.manifest.tasks.iter().enumerate() {
            let what = format!("task {i}");
            match t {
                TaskSpec::Check { identity, chart, deformation, q, .. } => {
                    identity.parse::<Identity>().map_err(ctx(&what))?;
                    if chart.is_some() || deformation.is_some() {
                        self.chart(chart.as_deref()).map_err(ctx(&what))?;
                    } else if q.is_none() {
                        return Err(InputError(format!("{what}: check needs `q` or a chart")));
                    }
                }
                TaskSpec::Class { class, chart, deformation, manifold, .. } => {
                    let kind: ClassKind = class.parse().map_err(ctx(&what))?;
                    if !matches!(kind, ClassKind::Bott | ClassKind::Dbott | ClassKind::Flk) {
                        return Err(InputError(format!("{what}: class must be bott, dbott or flk")));
                    }
                    let (name, _) = self.chart(chart.as_deref()).map_err(ctx(&what))?;
                    if kind != ClassKind::Bott {
                        self.deformation(deformation.as_deref(), name).map_err(ctx(&what))?;
                    }
                    self.manifold(manifold.as_deref()).map_err(ctx(&what))?;
                }
                TaskSpec::Prop31 { chart, deformation, manifold, .. } => {
                    let (name, _) = self.chart(chart.as_deref()).map_err(ctx(&what))?;
                    self.deformation(deformation.as_deref(), name).map_err(ctx(&what))?;
                    if manifold.is_some() {
                        self.manifold(manifold.as_deref()).map_err(ctx(&what))?;
                    }
                }
                TaskSpec::Sweep { parameter, chart, deformation, manifold, steps, .. } => {
                    let (name, _) = self.chart(chart.as_deref()).map_err(ctx(&what))?;
                    self.deformation(deformation.as_deref(), name).map_err(ctx(&what))?;
                    self.manifold(manifold.as_deref()).map_err(ctx(&what))?;
                    self.check_parameter(parameter).map_err(ctx(&what))?;
                    if *steps == 0 {
                        return Err(InputError(format!("{what}: steps must be positive")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_parameter(&self, name: &str) -> Result<(), InputError> {
        match self.universe.scalar_id(name) {
            Ok(id) if self.universe.is_parameter(id) => Ok(()),
            _ => Err(InputError(format!("`{name}` is not a declared parameter"))),
        }
    }

    /// The named chart, or the only one.
    pub fn chart(&self, name: Option<&str>) -> Result<(&str, &ChartFoliation), InputError> {
        pick(&self.charts, name, "chart")
    }

    /// The named deformation, or the only one attached to `chart`.
    pub fn deformation(&self, name: Option<&str>, chart: &str) -> Result<&DeformationData, InputError> {
        match name {
            Some(n) => {
                let (c, d) =
                    self.deformations.get(n).ok_or_else(|| InputError(format!("unknown deformation `{n}`")))?;
                if c != chart {
                    return Err(InputError(format!("deformation `{n}` belongs to chart `{c}`, not `{chart}`")));
                }
                Ok(d)
            }
            None => {
                let mut it = self.deformations.values().filter(|(c, _)| c == chart);
                match (it.next(), it.next()) {
                    (Some((_, d)), None) => Ok(d),
                    (None, _) => Err(InputError(format!("chart `{chart}` has no deformation"))),
                    _ => Err(InputError(format!("chart `{chart}` has several deformations; name one"))),
                }
            }
        }
    }

    pub fn manifold(&self, name: Option<&str>) -> Result<&ParamManifold, InputError> {
        pick(&self.manifolds, name, "manifold").map(|(_, m)| m)
    }
}

fn pick<'a, T>(map: &'a BTreeMap<String, T>, name: Option<&str>, what: &str) -> Result<(&'a str, &'a T), InputError> {
    match name {
        Some(n) => map
            .get_key_value(n)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| InputError(format!("unknown {what} `{n}`"))),
        None if map.len() == 1 => {
            let (k, v) = map.iter().next().expect("one entry");
            Ok((k.as_str(), v))
        }
        None if map.is_empty() => Err(InputError(format!("manifest declares no {what}"))),
        None => Err(InputError(format!("several {what}s declared; name one"))),
    }
}
