use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::NumericError;

/// Value and partial derivatives along the parameter axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub grad: Vec<Complex64>,
}

pub type CoordinateFn = Arc<dyn Fn(&[f64]) -> Jet + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

/// A parametrized closed manifold: a box of parameter axes, complex-valued
/// coordinate functions on it, values for free parameters and an orientation sign.
#[derive(Clone)]
pub struct ParamManifold {
    name: String,
    axes: Vec<Axis>,
    coordinates: BTreeMap<String, CoordinateFn>,
    parameters: BTreeMap<String, Complex64>,
    orientation: f64,
}

impl fmt::Debug for ParamManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamManifold")
            .field("name", &self.name)
            .field("axes", &self.axes)
            .field("coordinates", &self.coordinates.keys().collect::<Vec<_>>())
            .field("parameters", &self.parameters)
            .field("orientation", &self.orientation)
            .finish()
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl ParamManifold {
    pub fn new(name: impl Into<String>, axes: Vec<Axis>, orientation: f64) -> Self {
        ParamManifold {
            name: name.into(),
            axes,
            coordinates: BTreeMap::new(),
            parameters: BTreeMap::new(),
            orientation: orientation.signum(),
        }
    }

    /// S³ = {(cos ξ·e^{iφ₁}, sin ξ·e^{iφ₂})} with z1, z2, zb1, zb2 assigned.
    /// The orientation sign makes ½α∧dα integrate to +2π².
    pub fn s3() -> Self {
        let axes = vec![
            Axis { name: "xi".into(), lo: 0.0, hi: FRAC_PI_2, periodic: false },
            Axis { name: "phi1".into(), lo: 0.0, hi: 2.0 * PI, periodic: true },
            Axis { name: "phi2".into(), lo: 0.0, hi: 2.0 * PI, periodic: true },
        ];
        let mut m = ParamManifold::new("s3", axes, -1.0);
        let z1 = |p: &[f64]| {
            let (s, c) = p[0].sin_cos();
            let e = cis(p[1]);
            Jet { value: c * e, grad: vec![-s * e, I * c * e, ZERO] }
        };
        let z2 = |p: &[f64]| {
            let (s, c) = p[0].sin_cos();
            let e = cis(p[2]);
            Jet { value: s * e, grad: vec![c * e, ZERO, I * s * e] }
        };
        m.assign_with_conjugate("z1", "zb1", Arc::new(z1));
        m.assign_with_conjugate("z2", "zb2", Arc::new(z2));
        m
    }

    /// S¹ = {t = e^{iψ}}, with tb = 1/t.
    pub fn s1() -> Self {
        let axes = vec![Axis { name: "psi".into(), lo: 0.0, hi: 2.0 * PI, periodic: true }];
        let mut m = ParamManifold::new("s1", axes, 1.0);
        m.assign_with_conjugate(
            "t",
            "tb",
            Arc::new(|p: &[f64]| {
                let e = cis(p[0]);
                Jet { value: e, grad: vec![I * e] }
            }),
        );
        m
    }

    /// S³×S¹, oriented so that ∫_{S³×S¹} (dt/t)∧β = 2π√−1·∫_{S³} β.
    pub fn s3xs1() -> Self {
        ParamManifold::product("s3xs1", &ParamManifold::s3(), &ParamManifold::s1())
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "s3" => Some(ParamManifold::s3()),
            "s1" => Some(ParamManifold::s1()),
            "s3xs1" => Some(ParamManifold::s3xs1()),
            _ => None,
        }
    }

    /// base × fiber with axes in that order and the fiber-first orientation.
    pub fn product(name: impl Into<String>, base: &ParamManifold, fiber: &ParamManifold) -> Self {
        let nb = base.dimension();
        let nf = fiber.dimension();
        let mut axes = base.axes.clone();
        axes.extend(fiber.axes.iter().cloned());
        let sign = base.orientation * fiber.orientation * if (nb * nf) % 2 == 1 { -1.0 } else { 1.0 };
        let mut m = ParamManifold::new(name, axes, sign);
        for (k, f) in &base.coordinates {
            let f = Arc::clone(f);
            m.coordinates.insert(
                k.clone(),
                Arc::new(move |p: &[f64]| {
                    let mut j = f(&p[..nb]);
                    j.grad.resize(nb + nf, ZERO);
                    j
                }),
            );
        }
        for (k, f) in &fiber.coordinates {
            let f = Arc::clone(f);
            m.coordinates.insert(
                k.clone(),
                Arc::new(move |p: &[f64]| {
                    let j = f(&p[nb..]);
                    let mut grad = vec![ZERO; nb];
                    grad.extend(j.grad);
                    Jet { value: j.value, grad }
                }),
            );
        }
        m.parameters = base.parameters.clone();
        m.parameters.extend(fiber.parameters.clone());
        m
    }

    pub fn assign(&mut self, symbol: &str, f: CoordinateFn) -> &mut Self {
        self.coordinates.insert(symbol.to_string(), f);
        self
    }

    /// Assigns `symbol` and its conjugate `partner`, evaluated as the complex conjugate.
    pub fn assign_with_conjugate(&mut self, symbol: &str, partner: &str, f: CoordinateFn) -> &mut Self {
        let g = Arc::clone(&f);
        self.coordinates.insert(symbol.to_string(), f);
        self.coordinates.insert(
            partner.to_string(),
            Arc::new(move |p: &[f64]| {
                let j = g(p);
                Jet { value: j.value.conj(), grad: j.grad.iter().map(|z| z.conj()).collect() }
            }),
        );
        self
    }

    /// Renames an assigned coordinate, so manifests can use their own symbol names.
    pub fn rename(&mut self, from: &str, to: &str) -> Result<&mut Self, NumericError> {
        let f = self.coordinates.remove(from).ok_or_else(|| NumericError::Unassigned(from.to_string()))?;
        self.coordinates.insert(to.to_string(), f);
        Ok(self)
    }

    pub fn with_parameter(mut self, name: &str, value: Complex64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn set_parameter(&mut self, name: &str, value: Complex64) {
        self.parameters.insert(name.to_string(), value);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn parameters(&self) -> &BTreeMap<String, Complex64> {
        &self.parameters
    }

    pub fn parameter(&self, name: &str) -> Option<Complex64> {
        self.parameters.get(name).copied()
    }

    pub fn coordinate(&self, name: &str) -> Option<&CoordinateFn> {
        self.coordinates.get(name)
    }

    pub fn coordinate_names(&self) -> impl Iterator<Item = &str> {
        self.coordinates.keys().map(|s| s.as_str())
    }

    /// A uniformly drawn point of the parameter box (not of the Riemannian measure).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.axes.iter().map(|a| rng.gen_range(a.lo..a.hi)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(m: &ParamManifold, sym: &str, p: &[f64]) -> Vec<Complex64> {
        let f = m.coordinate(sym).unwrap();
        let h = 1e-6;
        (0..p.len())
            .map(|k| {
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[k] += h;
                b[k] -= h;
                (f(&a).value - f(&b).value) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn jets_match_finite_differences() {
        let m = ParamManifold::s3xs1();
        let p = [0.4, 1.1, -2.3, 0.7];
        for sym in ["z1", "z2", "zb1", "zb2", "t", "tb"] {
            let exact = m.coordinate(sym).unwrap()(&p).grad;
            for (e, fd) in exact.iter().zip(finite_difference(&m, sym, &p)) {
                assert!((e - fd).norm() < 1e-8, "{sym}: {e} vs {fd}");
            }
        }
    }

    #[test]
    fn conjugates_and_sphere() {
        let m = ParamManifold::s3();
        let p = [0.3, 2.0, 5.0];
        let v = |s: &str| m.coordinate(s).unwrap()(&p).value;
        assert_eq!(v("zb1"), v("z1").conj());
        assert!(((v("z1") * v("zb1") + v("z2") * v("zb2")).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_orientation() {
        assert_eq!(ParamManifold::s3xs1().orientation(), 1.0);
        assert_eq!(ParamManifold::s3xs1().dimension(), 4);
    }
}
