//! Curved Riccati, diffusion, Kummer–Schwarz and Ermakov systems, with the
//! coordinate changes that carry them onto the curved I₄ and P₂ classes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class_i4::{i4_F2, i4_fields, i4_hamiltonian_gradients, i4_hamiltonians, i4_weight};
use crate::class_p2::{p2_F2, p2_fields, p2_hamiltonian_gradients, p2_hamiltonians, p2_weight, P2Variant};
use crate::dynamics::{rk4_fixed, CoefficientSet, TimeFunction};
use crate::error::{domain, Error, Result};
use crate::fields::{map_jacobian_fd, Point, TangentVector};
use crate::ktrig::{ck, one_minus_cc_over_k, sk, vk, KappaSignature, POLE_TOLERANCE};
use crate::symplectic::LieHamiltonSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Application {
    SplitComplexRiccati,
    DiffusionRiccati,
    KummerSchwarzNeg,
    ErmakovNeg,
    KummerSchwarzPos,
    ErmakovPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParentClass {
    I4,
    P2,
}

/// Sign class of the Kummer–Schwarz / Ermakov constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    NegC,
    PosC,
}

impl Application {
    pub const ALL: [Application; 6] = [
        Application::SplitComplexRiccati,
        Application::DiffusionRiccati,
        Application::KummerSchwarzNeg,
        Application::ErmakovNeg,
        Application::KummerSchwarzPos,
        Application::ErmakovPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Application::SplitComplexRiccati => "sc_riccati",
            Application::DiffusionRiccati => "diffusion",
            Application::KummerSchwarzNeg => "ks_neg",
            Application::ErmakovNeg => "ermakov_neg",
            Application::KummerSchwarzPos => "ks_pos",
            Application::ErmakovPos => "ermakov_pos",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn parent(self) -> ParentClass {
        match self {
            Application::KummerSchwarzPos | Application::ErmakovPos => ParentClass::P2,
            _ => ParentClass::I4,
        }
    }

    pub fn needs_lambda(self) -> bool {
        !matches!(self, Application::SplitComplexRiccati | Application::DiffusionRiccati)
    }

    pub fn kummer_schwarz(class: SignClass) -> Self {
        match class {
            SignClass::NegC => Application::KummerSchwarzNeg,
            SignClass::PosC => Application::KummerSchwarzPos,
        }
    }

    pub fn ermakov(class: SignClass) -> Self {
        match class {
            SignClass::NegC => Application::ErmakovNeg,
            SignClass::PosC => Application::ErmakovPos,
        }
    }
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// λ of the Kummer–Schwarz and Ermakov systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

impl ModelParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda != 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and nonzero, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    /// c = −1/(4λ²), −λ⁴/4, 1/λ², λ⁴; zero for the Riccati systems.
    pub fn c(&self, app: Application) -> f64 {
        let l2 = self.lambda * self.lambda;
        match app {
            Application::KummerSchwarzNeg => -0.25 / l2,
            Application::ErmakovNeg => -0.25 * l2 * l2,
            Application::KummerSchwarzPos => 1.0 / l2,
            Application::ErmakovPos => l2 * l2,
            _ => 0.0,
        }
    }

    /// The positive λ realizing a given c.
    pub fn from_c(app: Application, c: f64) -> Result<Self> {
        let bad = || Err(Error::InvalidArgument(format!("c = {c} has the wrong sign for {app}")));
        let lambda = match app {
            Application::KummerSchwarzNeg if c < 0.0 => 0.5 / (-c).sqrt(),
            Application::ErmakovNeg if c < 0.0 => (-4.0 * c).powf(0.25),
            Application::KummerSchwarzPos if c > 0.0 => 1.0 / c.sqrt(),
            Application::ErmakovPos if c > 0.0 => c.powf(0.25),
            Application::SplitComplexRiccati | Application::DiffusionRiccati => 1.0,
            _ => return bad(),
        };
        Self::new(lambda)
    }
}

pub type PointMap = Arc<dyn Fn(Point) -> Result<Point> + Send + Sync>;
pub type DomainPredicate = Arc<dyn Fn(Point) -> bool + Send + Sync>;

/// A change of variables onto a canonical class, with its inverse on a fixed sheet.
#[derive(Clone)]
pub struct CoordinateChange {
    pub name: String,
    /// Which root the inverse takes.
    pub sheet: &'static str,
    pub forward: PointMap,
    pub inverse: PointMap,
    pub source_domain: DomainPredicate,
    pub target_domain: DomainPredicate,
}

impl fmt::Debug for CoordinateChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordinateChange").field("name", &self.name).field("sheet", &self.sheet).finish()
    }
}

impl CoordinateChange {
    pub fn identity() -> Self {
        CoordinateChange {
            name: "identity".into(),
            sheet: "single-valued",
            forward: Arc::new(Ok),
            inverse: Arc::new(Ok),
            source_domain: Arc::new(|_| true),
            target_domain: Arc::new(|_| true),
        }
    }

    /// ‖inverse(forward(p)) − p‖∞.
    pub fn round_trip_residual(&self, p: Point) -> Result<f64> {
        let q = (self.inverse)((self.forward)(p)?)?;
        Ok((q[0] - p[0]).abs().max((q[1] - p[1]).abs()))
    }
}

pub type FieldTriple<'a> = &'a dyn Fn(Point) -> Result<[TangentVector; 3]>;

/// max over i of ‖dΦ(Xᵢ)(p) − Xᵢ′(Φ(p))‖, dΦ by central differences.
pub fn pushforward_residual(map: &CoordinateChange, source: FieldTriple, target: FieldTriple, p: Point) -> Result<f64> {
    if !(map.source_domain)(p) {
        return Err(domain(format!("({}, {}) outside the source domain of {}", p[0], p[1], map.name)));
    }
    let fwd = |q: Point| {
        if !(map.source_domain)(q) {
            return Err(domain("difference stencil leaves the source domain"));
        }
        (map.forward)(q)
    };
    let j = map_jacobian_fd(&fwd, p)?;
    let xs = source(p)?;
    let xt = target((map.forward)(p)?)?;
    let mut worst = 0.0f64;
    for (s, t) in xs.iter().zip(xt.iter()) {
        let push = TangentVector::new(j[0][0] * s.vx + j[0][1] * s.vy, j[1][0] * s.vx + j[1][1] * s.vy);
        worst = worst.max(push.sub(*t).norm());
    }
    Ok(worst)
}

fn require_nonzero(v: f64, what: &str) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(domain(format!("{what} must be finite and nonzero, got {v}")));
    }
    Ok(v)
}

fn require_sine(s: f64, what: &str) -> Result<f64> {
    if !(s.abs() > 1e-13) {
        return Err(domain(format!("{what} vanishes")));
    }
    Ok(s)
}

fn require_cosine(c: f64, kappa: f64, u: f64) -> Result<f64> {
    if c.abs() < POLE_TOLERANCE {
        return Err(Error::Pole { kappa, u });
    }
    Ok(c)
}

/// One application at fixed curvature and λ. I₄ applications read only `kappas.kappa1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppSystem {
    pub app: Application,
    pub kappas: KappaSignature,
    pub params: ModelParams,
}

impl AppSystem {
    pub fn new(app: Application, kappas: KappaSignature, params: ModelParams) -> Result<Self> {
        kappas.validate()?;
        ModelParams::new(params.lambda)?;
        Ok(Self { app, kappas, params })
    }

    pub fn i4(app: Application, kappa: f64, params: ModelParams) -> Result<Self> {
        Self::new(app, KappaSignature::new(kappa, 0.0), params)
    }

    fn kappa(&self) -> f64 {
        self.kappas.kappa1
    }

    fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn c(&self) -> f64 {
        self.params.c(self.app)
    }

    /// Scale s with h_app = s·(h_class ∘ Φ) and ω_app = s·Φ*ω_class.
    pub fn hamiltonian_scale(&self) -> f64 {
        let l2 = self.lambda() * self.lambda();
        match self.app {
            Application::ErmakovNeg => 0.5 * l2,
            Application::ErmakovPos => -0.5 * l2,
            _ => 1.0,
        }
    }

    pub fn in_source_domain(&self, p: Point) -> bool {
        let [u, v] = p;
        if !(u.is_finite() && v.is_finite()) {
            return false;
        }
        match self.app {
            Application::SplitComplexRiccati => v != 0.0,
            Application::DiffusionRiccati => v > 0.0,
            Application::KummerSchwarzNeg | Application::KummerSchwarzPos => u != 0.0,
            Application::ErmakovNeg | Application::ErmakovPos => u * self.lambda() > 0.0,
        }
    }

    pub fn in_target_domain(&self, q: Point) -> bool {
        let [x, y] = q;
        if !(x.is_finite() && y.is_finite()) {
            return false;
        }
        match self.app {
            Application::SplitComplexRiccati | Application::KummerSchwarzNeg => x != y,
            Application::DiffusionRiccati | Application::ErmakovNeg => x > y,
            Application::KummerSchwarzPos => y != 0.0,
            Application::ErmakovPos => y > 0.0,
        }
    }

    pub fn sheet(&self) -> &'static str {
        match self.app {
            Application::DiffusionRiccati => "v = +sqrt((x - y)/2)",
            Application::ErmakovNeg => "u = +lambda/sqrt(x - y)",
            Application::ErmakovPos => "y = +lambda^2/u^2, u = +lambda/sqrt(y)",
            _ => "single-valued",
        }
    }

    /// Φ: application variables (u, v) → class variables (x, y).
    pub fn forward(&self, p: Point) -> Result<Point> {
        let [u, v] = p;
        let l = self.lambda();
        Ok(match self.app {
            Application::SplitComplexRiccati => [u + v, u - v],
            Application::DiffusionRiccati => [2.0 * u + v * v, 2.0 * u - v * v],
            Application::KummerSchwarzNeg => {
                require_nonzero(u, "u")?;
                [v / (2.0 * u) + u / (2.0 * l), v / (2.0 * u) - u / (2.0 * l)]
            }
            Application::ErmakovNeg => {
                require_nonzero(u, "u")?;
                let b = l * l / (2.0 * u * u);
                [-v / u + b, -v / u - b]
            }
            Application::KummerSchwarzPos => {
                require_nonzero(u, "u")?;
                [v / (2.0 * u), u / l]
            }
            Application::ErmakovPos => {
                require_nonzero(u, "u")?;
                [-v / u, l * l / (u * u)]
            }
        })
    }

    /// Φ⁻¹ on the declared sheet.
    pub fn inverse(&self, q: Point) -> Result<Point> {
        let [x, y] = q;
        let l = self.lambda();
        if !self.in_target_domain(q) {
            return Err(domain(format!("({x}, {y}) outside the target domain of {}", self.app)));
        }
        Ok(match self.app {
            Application::SplitComplexRiccati => [0.5 * (x + y), 0.5 * (x - y)],
            Application::DiffusionRiccati => [0.25 * (x + y), (0.5 * (x - y)).sqrt()],
            Application::KummerSchwarzNeg => [l * (x - y), l * (x * x - y * y)],
            Application::ErmakovNeg => {
                let u = l / (x - y).sqrt();
                [u, -0.5 * u * (x + y)]
            }
            Application::KummerSchwarzPos => [l * y, 2.0 * l * x * y],
            Application::ErmakovPos => {
                let r = y.sqrt();
                [l / r, -l * x / r]
            }
        })
    }

    /// J[i][j] = ∂Φⁱ/∂pʲ in closed form.
    pub fn jacobian(&self, p: Point) -> Result<[[f64; 2]; 2]> {
        let [u, v] = p;
        let l = self.lambda();
        Ok(match self.app {
            Application::SplitComplexRiccati => [[1.0, 1.0], [1.0, -1.0]],
            Application::DiffusionRiccati => [[2.0, 2.0 * v], [2.0, -2.0 * v]],
            Application::KummerSchwarzNeg => {
                require_nonzero(u, "u")?;
                let a = -v / (2.0 * u * u);
                let i = 1.0 / (2.0 * u);
                [[a + 0.5 / l, i], [a - 0.5 / l, i]]
            }
            Application::ErmakovNeg => {
                require_nonzero(u, "u")?;
                let a = v / (u * u);
                let b = l * l / (u * u * u);
                [[a - b, -1.0 / u], [a + b, -1.0 / u]]
            }
            Application::KummerSchwarzPos => {
                require_nonzero(u, "u")?;
                [[-v / (2.0 * u * u), 1.0 / (2.0 * u)], [1.0 / l, 0.0]]
            }
            Application::ErmakovPos => {
                require_nonzero(u, "u")?;
                [[v / (u * u), -1.0 / u], [-2.0 * l * l / (u * u * u), 0.0]]
            }
        })
    }

    pub fn coordinate_change(&self) -> CoordinateChange {
        let (a, b, c, d) = (*self, *self, *self, *self);
        CoordinateChange {
            name: self.app.name().to_string(),
            sheet: self.sheet(),
            forward: Arc::new(move |p| a.forward(p)),
            inverse: Arc::new(move |q| b.inverse(q)),
            source_domain: Arc::new(move |p| c.in_source_domain(p)),
            target_domain: Arc::new(move |q| d.in_target_domain(q)),
        }
    }

    /// The quoted curved vector fields.
    pub fn curved_fields(&self, p: Point) -> Result<[TangentVector; 3]> {
        let [u, v] = p;
        let l = self.lambda();
        let l2 = l * l;
        let t = TangentVector::new;
        let f = match self.app {
            Application::SplitComplexRiccati => {
                let k = self.kappa();
                let (cu, su, cv, sv) = (ck(k, u), sk(k, u), ck(k, v), sk(k, v));
                [t(1.0, 0.0), t(cv * su, cu * sv), t(2.0 * one_minus_cc_over_k(k, u, v), 2.0 * su * sv)]
            }
            Application::DiffusionRiccati => {
                let k = self.kappa();
                require_nonzero(v, "v")?;
                let (a, b) = (2.0 * u, v * v);
                let (ca, sa, cb, sb) = (ck(k, a), sk(k, a), ck(k, b), sk(k, b));
                [
                    t(0.5, 0.0),
                    t(0.5 * cb * sa, ca * sb / (2.0 * v)),
                    t(one_minus_cc_over_k(k, a, b), sa * sb / v),
                ]
            }
            Application::KummerSchwarzNeg => {
                let k = self.kappa();
                require_nonzero(u, "u")?;
                let (a, b) = (u / (2.0 * l), v / (2.0 * u));
                let (ca, sa, cb, sb) = (ck(k, a), sk(k, a), ck(k, b), sk(k, b));
                let r = l * v / u;
                [
                    t(0.0, 2.0 * u),
                    t(2.0 * l * sa * cb, 2.0 * (u * ca * sb + r * sa * cb)),
                    t(4.0 * l * sa * sb, 4.0 * (u * one_minus_cc_over_k(k, a, b) + r * sa * sb)),
                ]
            }
            Application::ErmakovNeg => {
                let k = self.kappa();
                require_nonzero(u, "u")?;
                let (a, b) = (v / u, l2 / (2.0 * u * u));
                let (ca, sa, cb, sb) = (ck(k, a), sk(k, a), ck(k, b), sk(k, b));
                let (u3, u2v) = (u * u * u / l2, u * u * v / l2);
                [
                    t(0.0, -u),
                    t(-u3 * ca * sb, u * sa * cb - u2v * ca * sb),
                    t(2.0 * u3 * sa * sb, 2.0 * u2v * sa * sb - 2.0 * u * one_minus_cc_over_k(k, a, b)),
                ]
            }
            Application::KummerSchwarzPos => {
                let (k1, k2, k12) = (self.kappas.kappa1, self.kappas.kappa2, self.kappas.product());
                require_nonzero(u, "u")?;
                let (a, b) = (v / (2.0 * u), u / l);
                let (c1, s1, v1) = (ck(k1, a), sk(k1, a), vk(k1, a));
                let (c12, s12, v12) = (ck(k12, b), sk(k12, b), vk(k12, b));
                require_cosine(c12, k12, b)?;
                let r = l * v / u;
                [
                    t(0.0, 2.0 * u),
                    t(l * c1 * s12, 2.0 * u * s1 / c12 + r * c1 * s12),
                    t(2.0 * l * s1 * s12, 4.0 * u * (v1 - k2 * v12) / c12 + 2.0 * r * s1 * s12),
                ]
            }
            Application::ErmakovPos => {
                let (k1, k2, k12) = (self.kappas.kappa1, self.kappas.kappa2, self.kappas.product());
                require_nonzero(u, "u")?;
                let (a, b) = (v / u, l2 / (u * u));
                let (c1, s1, v1) = (ck(k1, a), sk(k1, a), vk(k1, a));
                let (c12, s12, v12) = (ck(k12, b), sk(k12, b), vk(k12, b));
                require_cosine(c12, k12, b)?;
                let (u3, u2v) = (u * u * u / l2, u * u * v / l2);
                [
                    t(0.0, -u),
                    t(-0.5 * u3 * c1 * s12, u * s1 / c12 - 0.5 * u2v * c1 * s12),
                    t(u3 * s1 * s12, -2.0 * u * (v1 - k2 * v12) / c12 + u2v * s1 * s12),
                ]
            }
        };
        for x in &f {
            x.checked("application field")?;
        }
        Ok(f)
    }

    /// The Euclidean fields the curved ones contract to, with this system's c.
    pub fn euclidean_fields(&self, p: Point) -> Result<[TangentVector; 3]> {
        let [u, v] = p;
        let c = self.c();
        let t = TangentVector::new;
        Ok(match self.app {
            Application::SplitComplexRiccati => [t(1.0, 0.0), t(u, v), t(u * u + v * v, 2.0 * u * v)],
            Application::DiffusionRiccati => {
                [t(0.5, 0.0), t(u, 0.5 * v), t(0.5 * (4.0 * u * u + v.powi(4)), 2.0 * u * v)]
            }
            Application::KummerSchwarzNeg | Application::KummerSchwarzPos => {
                require_nonzero(u, "u")?;
                [t(0.0, 2.0 * u), t(u, 2.0 * v), t(v, 1.5 * v * v / u - 2.0 * c * u.powi(3))]
            }
            Application::ErmakovNeg | Application::ErmakovPos => {
                require_nonzero(u, "u")?;
                [t(0.0, -u), t(-0.5 * u, 0.5 * v), t(v, c / u.powi(3))]
            }
        })
    }

    /// Fields of the parent class at class coordinates q.
    pub fn class_fields(&self, q: Point) -> Result<[TangentVector; 3]> {
        match self.app.parent() {
            ParentClass::I4 => Ok(i4_fields(self.kappa(), q)),
            ParentClass::P2 => p2_fields(self.kappas, q, P2Variant::TimeLike),
        }
    }

    /// Euclidean fields of the parent class (κ = 0, resp. 𝕜 = (0, 1)).
    pub fn euclidean_class_fields(&self, q: Point) -> Result<[TangentVector; 3]> {
        match self.app.parent() {
            ParentClass::I4 => Ok(i4_fields(0.0, q)),
            ParentClass::P2 => p2_fields(KappaSignature::new(0.0, 1.0), q, P2Variant::TimeLike),
        }
    }

    fn class_hamiltonians(&self, q: Point) -> Result<[f64; 3]> {
        match self.app.parent() {
            ParentClass::I4 => i4_hamiltonians(self.kappa(), q),
            ParentClass::P2 => p2_hamiltonians(self.kappas, q),
        }
    }

    fn class_gradients(&self, q: Point) -> Result<[[f64; 2]; 3]> {
        match self.app.parent() {
            ParentClass::I4 => i4_hamiltonian_gradients(self.kappa(), q),
            ParentClass::P2 => p2_hamiltonian_gradients(self.kappas, q),
        }
    }

    fn class_weight(&self, q: Point) -> Result<f64> {
        match self.app.parent() {
            ParentClass::I4 => i4_weight(self.kappa(), q),
            ParentClass::P2 => p2_weight(self.kappas, q),
        }
    }

    /// The quoted weight W with ω = W du∧dv.
    pub fn curved_weight(&self, p: Point) -> Result<f64> {
        let [u, v] = p;
        let l = self.lambda();
        let l2 = l * l;
        match self.app {
            Application::SplitComplexRiccati => {
                let s = require_sine(sk(self.kappa(), v), "S(v)")?;
                Ok(-0.5 / (s * s))
            }
            Application::DiffusionRiccati => {
                let s = require_sine(sk(self.kappa(), v * v), "S(v^2)")?;
                Ok(-2.0 * v / (s * s))
            }
            Application::KummerSchwarzNeg => {
                require_nonzero(u, "u")?;
                let s = require_sine(sk(self.kappa(), u / (2.0 * l)), "S(u/2lambda)")?;
                Ok(1.0 / (8.0 * l * u * s * s))
            }
            Application::ErmakovNeg => {
                require_nonzero(u, "u")?;
                let s = require_sine(sk(self.kappa(), l2 / (2.0 * u * u)), "S(lambda^2/2u^2)")?;
                Ok(l2 * l2 / (4.0 * u.powi(4) * s * s))
            }
            Application::KummerSchwarzPos => {
                require_nonzero(u, "u")?;
                let k12 = self.kappas.product();
                let s = require_sine(sk(k12, u / l), "S(u/lambda)")?;
                Ok(-ck(k12, u / l) / (2.0 * l * u * s * s))
            }
            Application::ErmakovPos => {
                require_nonzero(u, "u")?;
                let k12 = self.kappas.product();
                let b = l2 / (u * u);
                let s = require_sine(sk(k12, b), "S(lambda^2/u^2)")?;
                Ok(l2 * l2 * ck(k12, b) / (u.powi(4) * s * s))
            }
        }
    }

    /// The quoted Hamiltonians.
    pub fn curved_hamiltonians(&self, p: Point) -> Result<[f64; 3]> {
        let [u, v] = p;
        let l = self.lambda();
        let l2 = l * l;
        let i4 = |a: f64, d: f64, scale: f64| -> Result<[f64; 3]> {
            // h₁ = 1/(2T(d)), h₂ = S(a)/(2S(d)), h₃ = (C(d) − C(a))/(κS(d)).
            let k = self.kappa();
            let sd = require_sine(sk(k, d), "half-difference sine")?;
            Ok([
                scale * ck(k, d) / (2.0 * sd),
                scale * sk(k, a) / (2.0 * sd),
                scale * (vk(k, a) - vk(k, d)) / sd,
            ])
        };
        let p2 = |a: f64, b: f64, scale: f64| -> Result<[f64; 3]> {
            let k = self.kappas;
            let k12 = k.product();
            let s12 = require_sine(sk(k12, b), "S(y)")?;
            let c12 = ck(k12, b);
            let n = vk(k.kappa1, a) + k.kappa2 * ck(k.kappa1, a) * vk(k12, b);
            Ok([-scale / s12, -scale * sk(k.kappa1, a) * c12 / s12, -2.0 * scale * n / s12])
        };
        match self.app {
            Application::SplitComplexRiccati => i4(u, v, 1.0),
            Application::DiffusionRiccati => i4(2.0 * u, v * v, 1.0),
            Application::KummerSchwarzNeg => {
                require_nonzero(u, "u")?;
                i4(v / (2.0 * u), u / (2.0 * l), 1.0)
            }
            Application::ErmakovNeg => {
                require_nonzero(u, "u")?;
                // h₂ carries S(v/u) with a minus sign: the class argument is −v/u.
                i4(-v / u, l2 / (2.0 * u * u), 0.5 * l2)
            }
            Application::KummerSchwarzPos => {
                require_nonzero(u, "u")?;
                p2(v / (2.0 * u), u / l, 1.0)
            }
            Application::ErmakovPos => {
                require_nonzero(u, "u")?;
                p2(-v / u, l2 / (u * u), -0.5 * l2)
            }
        }
    }

    /// ∇h = s·Jᵀ ∇h_class(Φ(p)).
    pub fn curved_hamiltonian_gradients(&self, p: Point) -> Result<[[f64; 2]; 3]> {
        let j = self.jacobian(p)?;
        let g = self.class_gradients(self.forward(p)?)?;
        let s = self.hamiltonian_scale();
        Ok(g.map(|gc| [s * (j[0][0] * gc[0] + j[1][0] * gc[1]), s * (j[0][1] * gc[0] + j[1][1] * gc[1])]))
    }

    /// s·(h_class ∘ Φ): the second route to [`Self::curved_hamiltonians`].
    pub fn transported_hamiltonians(&self, p: Point) -> Result<[f64; 3]> {
        let s = self.hamiltonian_scale();
        Ok(self.class_hamiltonians(self.forward(p)?)?.map(|h| s * h))
    }

    /// s·det J·W_class(Φ(p)): the second route to [`Self::curved_weight`].
    pub fn transported_weight(&self, p: Point) -> Result<f64> {
        let j = self.jacobian(p)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        Ok(self.hamiltonian_scale() * det * self.class_weight(self.forward(p)?)?)
    }

    /// F⁽²⁾ of two copies, transported from the class: s²·F_class(Φ(p₁), Φ(p₂)).
    #[allow(non_snake_case)]
    pub fn F2(&self, p1: Point, p2: Point) -> Result<f64> {
        let s = self.hamiltonian_scale();
        let (q1, q2) = (self.forward(p1)?, self.forward(p2)?);
        let f = match self.app.parent() {
            ParentClass::I4 => i4_F2(self.kappa(), q1, q2)?,
            ParentClass::P2 => p2_F2(self.kappas, q1, q2)?,
        };
        Ok(s * s * f)
    }

    /// Σ bᵢXᵢ(p) with the quoted curved fields.
    pub fn rhs_b(&self, b: [f64; 3], p: Point) -> Result<[f64; 2]> {
        let x = self.curved_fields(p)?;
        Ok([
            b[0] * x[0].vx + b[1] * x[1].vx + b[2] * x[2].vx,
            b[0] * x[0].vy + b[1] * x[1].vy + b[2] * x[2].vy,
        ])
    }

    /// Coefficient slots of this system: b for the Riccati one; (−2b, 2c, 2a)
    /// for diffusion; (η, 0, 1) for Kummer–Schwarz; (Ω², 0, 1) for Ermakov.
    /// `coeffs` holds (b₁, b₂, b₃), (a, b, c), (η, ·, ·) or (Ω, ·, ·) respectively.
    pub fn slots(&self, coeffs: &CoefficientSet, t: f64) -> [f64; 3] {
        let e = coeffs.eval(t);
        match self.app {
            Application::SplitComplexRiccati => e,
            Application::DiffusionRiccati => [-2.0 * e[1], 2.0 * e[2], 2.0 * e[0]],
            Application::KummerSchwarzNeg | Application::KummerSchwarzPos => [e[0], 0.0, 1.0],
            Application::ErmakovNeg | Application::ErmakovPos => [e[0] * e[0], 0.0, 1.0],
        }
    }

    pub fn rhs(&self, coeffs: &CoefficientSet, t: f64, p: Point) -> Result<[f64; 2]> {
        self.rhs_b(self.slots(coeffs, t), p)
    }

    /// A box of (u, v) away from poles for every normalized curvature of magnitude ≤ 1.
    pub fn sample_box(&self) -> [[f64; 2]; 2] {
        let l = self.lambda();
        let scale = |r: [f64; 2], f: f64| {
            let (a, b) = (r[0] * f, r[1] * f);
            [a.min(b), a.max(b)]
        };
        match self.app {
            Application::SplitComplexRiccati => [[-1.0, 1.0], [0.3, 1.2]],
            Application::DiffusionRiccati => [[-0.7, 0.7], [0.5, 1.2]],
            Application::KummerSchwarzNeg => [scale([0.5, 1.5], l), scale([-1.0, 1.0], l.abs())],
            Application::ErmakovNeg => [scale([0.7, 2.0], l), scale([-1.0, 1.0], l.abs())],
            Application::KummerSchwarzPos => [scale([0.3, 1.2], l), scale([-1.0, 1.0], l.abs())],
            Application::ErmakovPos => [scale([1.0, 2.0], l), scale([-1.0, 1.0], l.abs())],
        }
    }
}

impl LieHamiltonSystem for AppSystem {
    fn label(&self) -> String {
        match self.app.parent() {
            ParentClass::I4 => format!("{}(kappa={})", self.app, self.kappa()),
            ParentClass::P2 => format!("{}({})", self.app, self.kappas.label()),
        }
    }

    fn fields(&self, p: Point) -> Result<[TangentVector; 3]> {
        self.curved_fields(p)
    }

    fn weight(&self, p: Point) -> Result<f64> {
        self.curved_weight(p)
    }

    fn hamiltonians(&self, p: Point) -> Result<[f64; 3]> {
        self.curved_hamiltonians(p)
    }

    fn hamiltonian_gradients(&self, p: Point) -> Result<[[f64; 2]; 3]> {
        self.curved_hamiltonian_gradients(p)
    }

    fn algebra_kappa(&self) -> f64 {
        self.kappas.kappa1
    }

    /// s² times the class value.
    fn casimir_value(&self) -> f64 {
        let s = self.hamiltonian_scale();
        let base = match self.app.parent() {
            ParentClass::I4 => -0.25,
            ParentClass::P2 => self.kappas.kappa2,
        };
        s * s * base
    }
}

pub fn sc_riccati_rhs(kappa: f64, coeffs: &CoefficientSet, t: f64, p: Point) -> Result<[f64; 2]> {
    AppSystem::i4(Application::SplitComplexRiccati, kappa, ModelParams::default())?.rhs(coeffs, t, p)
}

pub fn diffusion_rhs(kappa: f64, a: &TimeFunction, b: &TimeFunction, c: &TimeFunction, t: f64, p: Point) -> Result<[f64; 2]> {
    let coeffs = CoefficientSet::new(a.clone(), b.clone(), c.clone());
    AppSystem::i4(Application::DiffusionRiccati, kappa, ModelParams::default())?.rhs(&coeffs, t, p)
}

pub fn ks_rhs(class: SignClass, kappas: KappaSignature, params: ModelParams, eta: &TimeFunction, t: f64, p: Point) -> Result<[f64; 2]> {
    let sys = AppSystem::new(Application::kummer_schwarz(class), kappas, params)?;
    require_nonzero(p[0], "u")?;
    sys.rhs_b([eta.eval(t), 0.0, 1.0], p)
}

/// Ω(t) enters squared.
pub fn ermakov_rhs(class: SignClass, kappas: KappaSignature, params: ModelParams, omega: &TimeFunction, t: f64, p: Point) -> Result<[f64; 2]> {
    let sys = AppSystem::new(Application::ermakov(class), kappas, params)?;
    require_nonzero(p[0], "u")?;
    let w = omega.eval(t);
    sys.rhs_b([w * w, 0.0, 1.0], p)
}

/// First-order truncation in κ of the c < 0 Ermakov system, written through c.
pub fn ermakov_perturbed_rhs(kappa: f64, c: f64, omega_sq: f64, p: Point) -> Result<[f64; 2]> {
    let [u, v] = p;
    require_nonzero(u, "u")?;
    let (u2, v2) = (u * u, v * v);
    let u3 = u2 * u;
    Ok([
        v + kappa / 6.0 * (c * v / (u2 * u2) - v2 * v / u2),
        -omega_sq * u + c / u3 + kappa / 12.0 * (c * c / (u3 * u2 * u2) - 4.0 * c * v2 / (u3 * u2) - v2 * v2 / u3),
    ])
}

/// The two-copy invariant of the curved c < 0 Ermakov system, in its quoted form
/// (λ⁴/8)(C(A) − C(B))/(κS(b₁)S(b₂)), A = b₁ + b₂, bᵢ = λ²/(2uᵢ²), B = v₂/u₂ − v₁/u₁.
pub fn milne_pinney_invariant(kappa: f64, params: ModelParams, p1: Point, p2: Point) -> Result<f64> {
    let ([u1, v1], [u2, v2]) = (p1, p2);
    require_nonzero(u1, "u1")?;
    require_nonzero(u2, "u2")?;
    let l2 = params.lambda * params.lambda;
    let (b1, b2) = (l2 / (2.0 * u1 * u1), l2 / (2.0 * u2 * u2));
    let big_b = v2 / u2 - v1 / u1;
    let s1 = require_sine(sk(kappa, b1), "S(b1)")?;
    let s2 = require_sine(sk(kappa, b2), "S(b2)")?;
    Ok(l2 * l2 / 8.0 * (vk(kappa, big_b) - vk(kappa, b1 + b2)) / (s1 * s2))
}

/// The κ = 0 Milne–Pinney invariant ¼(u₁v₂ − u₂v₁)² + (c/4)(u₁²/u₂² + u₂²/u₁²) + c/2.
pub fn milne_pinney_flat(c: f64, p1: Point, p2: Point) -> Result<f64> {
    let ([u1, v1], [u2, v2]) = (p1, p2);
    require_nonzero(u1, "u1")?;
    require_nonzero(u2, "u2")?;
    let w = u1 * v2 - u2 * v1;
    let r = (u1 * u1) / (u2 * u2);
    Ok(0.25 * w * w + 0.25 * c * (r + 1.0 / r) + 0.5 * c)
}

/// Residual of ξ̈ = (d/dt log|b₃|)ξ̇ − Aξ + b₃²κ₂/ξ³ on ξ = y^(−1/2), from three samples of ξ
/// spaced by h around t.
pub fn reduction_residual_from_samples(kappa2: f64, coeffs: &CoefficientSet, t: f64, h: f64, xi: [f64; 3]) -> Result<f64> {
    let b = coeffs.eval(t);
    let db = coeffs
        .derivative()
        .ok_or_else(|| Error::InvalidArgument("coefficients are not differentiable".into()))?
        .eval(t);
    if b[2] == 0.0 {
        return Err(domain(format!("b3 vanishes at t = {t}")));
    }
    let a = b[0] * b[2] - 0.25 * b[1] * b[1] + 0.5 * db[1] - b[1] * db[2] / (2.0 * b[2]);
    let [xm, x0, xp] = xi;
    let d1 = (xp - xm) / (2.0 * h);
    let d2 = (xp - 2.0 * x0 + xm) / (h * h);
    let rhs = db[2] / b[2] * d1 - a * x0 + b[2] * b[2] * kappa2 / x0.powi(3);
    Ok((d2 - rhs).abs())
}

fn xi_of(s: &[f64; 2], t: f64) -> Result<f64> {
    if !(s[1] > 0.0) {
        return Err(domain(format!("y = {} <= 0 at t = {t}", s[1])));
    }
    Ok(1.0 / s[1].sqrt())
}

/// Reduction residual at a state of a flat complex Riccati solution: neighbours at
/// t ± h come from short RK4 integrations of the same system through `state`.
pub fn complex_riccati_reduction_residual(kappa2: f64, coeffs: &CoefficientSet, t: f64, state: Point, h: f64) -> Result<f64> {
    if !coeffs.is_analytic() {
        return Err(Error::InvalidArgument("reduction check needs analytic coefficient presets".into()));
    }
    let k = KappaSignature::new(0.0, kappa2);
    let f = |tt: f64, s: &[f64; 2]| crate::class_p2::p2_rhs(k, coeffs, tt, *s);
    let n = 4;
    let fwd = rk4_fixed(f, t, state, h / n as f64, n)?;
    let bwd = rk4_fixed(f, t, state, -h / n as f64, n)?;
    let xi = [xi_of(&bwd, t - h)?, xi_of(&state, t)?, xi_of(&fwd, t + h)?];
    reduction_residual_from_samples(kappa2, coeffs, t, h, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sys(app: Application, k1: f64, k2: f64) -> AppSystem {
        AppSystem::new(app, KappaSignature::new(k1, k2), ModelParams::new(0.8).unwrap()).unwrap()
    }

    #[test]
    fn c_lambda_relations() {
        let p = ModelParams::new(2.0).unwrap();
        assert_eq!(p.c(Application::KummerSchwarzNeg), -1.0 / 16.0);
        assert_eq!(p.c(Application::ErmakovNeg), -4.0);
        assert_eq!(p.c(Application::KummerSchwarzPos), 0.25);
        assert_eq!(p.c(Application::ErmakovPos), 16.0);
        for app in Application::ALL.into_iter().filter(|a| a.needs_lambda()) {
            let c = p.c(app);
            assert!((ModelParams::from_c(app, c).unwrap().c(app) - c).abs() < 1e-14);
            assert!(ModelParams::from_c(app, -c).is_err());
        }
        assert!(ModelParams::new(0.0).is_err());
    }

    #[test]
    fn forward_map_examples() {
        let s = AppSystem::i4(Application::SplitComplexRiccati, 0.0, ModelParams::default()).unwrap();
        assert_eq!(s.forward([1.0, 2.0]).unwrap(), [3.0, -1.0]);
    }

    #[test]
    fn rhs_examples() {
        let sc = AppSystem::i4(Application::SplitComplexRiccati, 1.0, ModelParams::default()).unwrap();
        let r = sc.rhs_b([0.0, 0.0, 1.0], [0.0, PI / 2.0]).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-15);
        let z = TimeFunction::constant(0.0);
        let one = TimeFunction::constant(1.0);
        let r = diffusion_rhs(1.0, &one, &z, &z, 0.0, [PI / 4.0, 1.0]).unwrap();
        assert!((r[0] - 2.0 * (1.0 - (PI / 2.0).cos() * 1f64.cos())).abs() < 1e-14);
        let (a, b, c) = (0.3, -0.4, 0.7);
        let (u, v) = (0.2, 0.9);
        let r = diffusion_rhs(0.0, &TimeFunction::constant(a), &TimeFunction::constant(b), &TimeFunction::constant(c), 0.0, [u, v]).unwrap();
        assert!((r[0] - (-b + 2.0 * c * u + 4.0 * a * u * u + a * v.powi(4))).abs() < 1e-14);
        assert!((r[1] - (c * v + 4.0 * a * u * v)).abs() < 1e-14);
        assert!(diffusion_rhs(0.0, &one, &z, &z, 0.0, [0.1, 0.0]).is_err());
        let ks = ks_rhs(SignClass::NegC, KappaSignature::new(1.0, 0.0), ModelParams::default(), &z, 0.0, [0.7, 0.0]).unwrap();
        assert_eq!(ks[0], 0.0);
        let u = 0.9;
        let er = ermakov_rhs(SignClass::NegC, KappaSignature::new(1.0, 0.0), ModelParams::default(), &z, 0.0, [u, 0.0]).unwrap();
        assert_eq!(er[0], 0.0);
        assert!((er[1] + 2.0 * u * (1.0 - (0.5 / (u * u)).cos())).abs() < 1e-14);
    }

    #[test]
    fn flat_systems_are_the_euclidean_ones() {
        for app in Application::ALL {
            let s = match app.parent() {
                ParentClass::I4 => sys(app, 0.0, 0.0),
                ParentClass::P2 => sys(app, 0.0, 1.0),
            };
            let [[u0, u1], [v0, v1]] = s.sample_box();
            let p = [0.4 * u0 + 0.6 * u1, 0.7 * v0 + 0.3 * v1];
            let a = s.curved_fields(p).unwrap();
            let b = s.euclidean_fields(p).unwrap();
            for i in 0..3 {
                assert!(a[i].sub(b[i]).norm() < 1e-12, "{app} field {i}");
            }
        }
    }

    #[test]
    fn quoted_and_transported_data_agree() {
        for app in Application::ALL {
            for (k1, k2) in [(0.7, 0.0), (-1.0, 1.0), (0.5, -1.0)] {
                let s = sys(app, k1, k2);
                let [[u0, u1], [v0, v1]] = s.sample_box();
                let p = [0.35 * u0 + 0.65 * u1, 0.2 * v0 + 0.8 * v1];
                let h = s.curved_hamiltonians(p).unwrap();
                let ht = s.transported_hamiltonians(p).unwrap();
                for i in 0..3 {
                    assert!((h[i] - ht[i]).abs() < 1e-12 * (1.0 + h[i].abs()), "{app} h{i}: {} vs {}", h[i], ht[i]);
                }
                let (w, wt) = (s.curved_weight(p).unwrap(), s.transported_weight(p).unwrap());
                assert!((w - wt).abs() < 1e-12 * (1.0 + w.abs()), "{app} weight");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for app in Application::ALL {
            let s = sys(app, 0.0, 1.0);
            let [[u0, u1], [v0, v1]] = s.sample_box();
            let p = [0.5 * (u0 + u1), 0.25 * v0 + 0.75 * v1];
            assert!(s.coordinate_change().round_trip_residual(p).unwrap() < 1e-12, "{app}");
        }
    }

    #[test]
    fn identity_pushforward_vanishes() {
        let id = CoordinateChange::identity();
        let f = |p: Point| Ok([TangentVector::new(1.0, p[0]), TangentVector::new(p[1], 0.0), TangentVector::new(p[0] * p[1], 1.0)]);
        assert!(pushforward_residual(&id, &f, &f, [0.3, -0.4]).unwrap() < 1e-9);
    }

    #[test]
    fn milne_pinney_examples() {
        let p = ModelParams::new(1.3).unwrap();
        let c = p.c(Application::ErmakovNeg);
        let s = [0.9, 0.4];
        assert!((milne_pinney_flat(c, s, s).unwrap() - c).abs() < 1e-14);
        assert!((milne_pinney_invariant(0.0, p, s, s).unwrap() - c).abs() < 1e-13);
        let sys = AppSystem::i4(Application::ErmakovNeg, 0.0, p).unwrap();
        assert!((sys.casimir_value() - c / 4.0).abs() < 1e-15);
        let (a, b) = ([0.9, 0.4], [1.4, -0.3]);
        let f0 = milne_pinney_flat(c, a, b).unwrap();
        assert!((milne_pinney_invariant(0.0, p, a, b).unwrap() - f0).abs() < 1e-12);
        for k in [-1.0, 0.5, 1.0] {
            let sys = AppSystem::i4(Application::ErmakovNeg, k, p).unwrap();
            let q = milne_pinney_invariant(k, p, a, b).unwrap();
            assert!((q - sys.F2(a, b).unwrap()).abs() < 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn ermakov_perturbation_example() {
        let r = ermakov_perturbed_rhs(0.1, -1.0, 0.0, [1.0, 1.0]).unwrap();
        assert!((r[0] - (1.0 + 0.1 / 6.0 * -2.0)).abs() < 1e-15);
        let f = ermakov_perturbed_rhs(0.0, -0.5, 0.3, [1.1, 0.4]).unwrap();
        assert!((f[1] - (-0.3 * 1.1 - 0.5 / 1.1f64.powi(3))).abs() < 1e-15);
    }

    #[test]
    fn reduction_rejects_bad_inputs() {
        let c = CoefficientSet::constant([0.2, 0.1, 0.0]);
        assert!(complex_riccati_reduction_residual(1.0, &c, 0.0, [0.0, 1.0], 1e-3).is_err());
        let pl = CoefficientSet::new(
            TimeFunction::PiecewiseLinear { points: vec![[0.0, 0.0], [1.0, 1.0]] },
            TimeFunction::constant(0.0),
            TimeFunction::constant(1.0),
        );
        assert!(complex_riccati_reduction_residual(1.0, &pl, 0.5, [0.0, 1.0], 1e-3).is_err());
        let c = CoefficientSet::constant([0.2, 0.1, 0.5]);
        assert!(complex_riccati_reduction_residual(1.0, &c, 0.0, [0.0, -1.0], 1e-3).is_err());
    }
}
