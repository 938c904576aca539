//! The curved P₂ class on the nine spaces S²[κ₁],κ₂.

use serde::{Deserialize, Serialize};

use crate::class_i4::{Branch, SuperpositionConstants};
use crate::dynamics::CoefficientSet;
use crate::error::{domain, Error, Result};
use crate::fields::{Point, TangentVector};
use crate::ktrig::{atk, ck, sk, vk, KappaSignature, POLE_TOLERANCE};
use crate::symplectic::{LieHamiltonSystem, ScalarField, SymplecticWeight};

/// Parallel-I coordinates (x, y), or (x′, y′) for the space-like variant.
pub type P2State = Point;

/// Guard on |S_{κ₁κ₂}(y)|.
pub const AXIS_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P2Variant {
    /// Built on P₁ along the first geodesic.
    TimeLike,
    /// Built on P₂ along the second geodesic, in type-II coordinates.
    SpaceLike,
}

fn nonzero(v: f64, what: &str) -> Result<f64> {
    if !v.is_finite() || v.abs() < 1e-14 {
        return Err(Error::DegenerateConfiguration(format!("{what} vanishes")));
    }
    Ok(v)
}

pub fn p2_fields(k: KappaSignature, s: P2State, variant: P2Variant) -> Result<[TangentVector; 3]> {
    let (k1, k2, k12) = (k.kappa1, k.kappa2, k.product());
    let [x, y] = s;
    let (c1, s1, v1) = (ck(k1, x), sk(k1, x), vk(k1, x));
    let (c12, s12, v12) = (ck(k12, y), sk(k12, y), vk(k12, y));
    let f = match variant {
        P2Variant::TimeLike => {
            if c12.abs() < POLE_TOLERANCE {
                return Err(Error::Pole { kappa: k12, u: y });
            }
            [
                TangentVector::new(1.0, 0.0),
                TangentVector::new(s1 / c12, c1 * s12),
                TangentVector::new(2.0 * (v1 - k2 * v12) / c12, 2.0 * s1 * s12),
            ]
        }
        P2Variant::SpaceLike => {
            if c1.abs() < POLE_TOLERANCE {
                return Err(Error::Pole { kappa: k1, u: x });
            }
            [
                TangentVector::new(0.0, 1.0),
                TangentVector::new(s1 * c12, s12 / c1),
                TangentVector::new(2.0 * k2 * s1 * s12, -2.0 * (v1 - k2 * v12) / c1),
            ]
        }
    };
    for v in &f {
        v.checked("P2 field")?;
    }
    Ok(f)
}

/// The structure constant c in [X₁,X₃] = 2cX₂: 1 time-like, κ₂ space-like.
pub fn p2_c13(k: KappaSignature, variant: P2Variant) -> f64 {
    match variant {
        P2Variant::TimeLike => 1.0,
        P2Variant::SpaceLike => k.kappa2,
    }
}

pub fn p2_rhs_b(k: KappaSignature, b: [f64; 3], s: P2State) -> Result<[f64; 2]> {
    let x = p2_fields(k, s, P2Variant::TimeLike)?;
    Ok([
        b[0] * x[0].vx + b[1] * x[1].vx + b[2] * x[2].vx,
        b[0] * x[0].vy + b[1] * x[1].vy + b[2] * x[2].vy,
    ])
}

pub fn p2_rhs(k: KappaSignature, coeffs: &CoefficientSet, t: f64, s: P2State) -> Result<[f64; 2]> {
    p2_rhs_b(k, coeffs.eval(t), s)
}

/// First-order truncation in (κ₁, κ₂) around the Galilean system.
pub fn p2_perturbed_rhs_b(k: KappaSignature, b: [f64; 3], s: P2State) -> [f64; 2] {
    let (k1, k2) = (k.kappa1, k.kappa2);
    let [x, y] = s;
    let x2 = x * x;
    [
        b[0] + b[1] * x + b[2] * x2 - k1 / 12.0 * (2.0 * b[1] * x2 * x + b[2] * x2 * x2) - k2 * b[2] * y * y,
        b[1] * y + 2.0 * b[2] * x * y - k1 / 6.0 * (3.0 * b[1] * x2 * y + 2.0 * b[2] * x2 * x * y),
    ]
}

pub fn p2_perturbed_rhs(k: KappaSignature, coeffs: &CoefficientSet, t: f64, s: P2State) -> [f64; 2] {
    p2_perturbed_rhs_b(k, coeffs.eval(t), s)
}

fn axis_sine(k: KappaSignature, y: f64) -> Result<f64> {
    let s12 = sk(k.product(), y);
    if !(s12.abs() > AXIS_GUARD) {
        return Err(domain(format!("P2 state on the axis y = {y}")));
    }
    Ok(s12)
}

/// W = C_{κ₁κ₂}(y)/S²_{κ₁κ₂}(y).
pub fn p2_weight(k: KappaSignature, s: P2State) -> Result<f64> {
    let s12 = axis_sine(k, s[1])?;
    Ok(ck(k.product(), s[1]) / (s12 * s12))
}

pub fn p2_symplectic(k: KappaSignature) -> SymplecticWeight {
    SymplecticWeight::new(move |p| p2_weight(k, p))
}

/// (1 − C_{κ₁}(x)C_{κ₁κ₂}(y))/κ₁ = V₁(x) + κ₂C₁(x)V₁₂(y).
fn n_term(k: KappaSignature, x: f64, y: f64) -> f64 {
    vk(k.kappa1, x) + k.kappa2 * ck(k.kappa1, x) * vk(k.product(), y)
}

/// h₁ = −1/S₁₂(y), h₂ = −S₁(x)/T₁₂(y), h₃ = 2(C₁(x)C₁₂(y) − 1)/(κ₁S₁₂(y)).
pub fn p2_hamiltonians(k: KappaSignature, s: P2State) -> Result<[f64; 3]> {
    let [x, y] = s;
    let s12 = axis_sine(k, y)?;
    let c12 = ck(k.product(), y);
    Ok([-1.0 / s12, -sk(k.kappa1, x) * c12 / s12, -2.0 * n_term(k, x, y) / s12])
}

pub fn p2_hamiltonian_gradients(k: KappaSignature, s: P2State) -> Result<[[f64; 2]; 3]> {
    let [x, y] = s;
    let s12 = axis_sine(k, y)?;
    let (c1, s1) = (ck(k.kappa1, x), sk(k.kappa1, x));
    let c12 = ck(k.product(), y);
    let q = 1.0 / (s12 * s12);
    let n = n_term(k, x, y);
    Ok([
        [0.0, c12 * q],
        [-c1 * c12 / s12, s1 * q],
        [-2.0 * s1 * c12 / s12, -2.0 * k.kappa2 * c1 + 2.0 * n * c12 * q],
    ])
}

pub fn p2_hamiltonian_fields(k: KappaSignature) -> [ScalarField; 3] {
    let make = |i: usize| {
        ScalarField::with_gradient(
            move |p| Ok(p2_hamiltonians(k, p)?[i]),
            move |p| Ok(p2_hamiltonian_gradients(k, p)?[i]),
        )
    };
    [make(0), make(1), make(2)]
}

/// The one-copy Casimir value κ₂.
#[allow(non_snake_case)]
pub fn p2_F1(k: KappaSignature) -> f64 {
    k.kappa2
}

/// 2(κ₂ + (1 − C₁(x₁−x₂)C₁₂(y₁)C₁₂(y₂))/(κ₁S₁₂(y₁)S₁₂(y₂))), with the
/// quotient by κ₁ expanded through versed sines.
#[allow(non_snake_case)]
pub fn p2_F2(k: KappaSignature, s1: P2State, s2: P2State) -> Result<f64> {
    let (sy1, sy2) = (axis_sine(k, s1[1])?, axis_sine(k, s2[1])?);
    let k1 = k.kappa1;
    let a = vk(k1, s1[0] - s2[0]);
    let b = k.kappa2 * vk(k.product(), s1[1]);
    let d = k.kappa2 * vk(k.product(), s2[1]);
    let q = a + b + d - k1 * (a * b + a * d + b * d) + k1 * k1 * a * b * d;
    Ok(2.0 * (k.kappa2 + q / (sy1 * sy2)))
}

#[allow(non_snake_case)]
pub fn p2_F2_13(k: KappaSignature, _s1: P2State, s2: P2State, s3: P2State) -> Result<f64> {
    p2_F2(k, s3, s2)
}

#[allow(non_snake_case)]
pub fn p2_F2_23(k: KappaSignature, s1: P2State, _s2: P2State, s3: P2State) -> Result<f64> {
    p2_F2(k, s1, s3)
}

/// F⁽³⁾ = F + F₁₃ + F₂₃ − 3κ₂.
#[allow(non_snake_case)]
pub fn p2_F3(k: KappaSignature, s1: P2State, s2: P2State, s3: P2State) -> Result<f64> {
    Ok(p2_F2(k, s1, s2)? + p2_F2_13(k, s1, s2, s3)? + p2_F2_23(k, s1, s2, s3)? - 3.0 * k.kappa2)
}

/// (μ₁, μ₂, μ₃) = (F, F₂₃, F₁₃).
pub fn p2_constants(k: KappaSignature, s1: P2State, s2: P2State, s3: P2State) -> Result<SuperpositionConstants> {
    Ok(SuperpositionConstants {
        mu1: p2_F2(k, s1, s2)?,
        mu2: p2_F2_23(k, s1, s2, s3)?,
        mu3: p2_F2(k, s2, s3)?,
    })
}

fn require_off_axis(s: P2State, what: &str) -> Result<()> {
    if s[1] == 0.0 || !s[1].is_finite() {
        return Err(domain(format!("{what} has y = {}", s[1])));
    }
    Ok(())
}

/// Flat-space rule (κ₁ = 0): y₁ from the quoted quadratic, then x₁ = x₂ ± √(μ₁y₁y₂ − κ₂(y₁+y₂)²).
pub fn p2_superpose_flat(
    kappa2: f64,
    s2: P2State,
    s3: P2State,
    mu1: f64,
    mu2: f64,
    y_branch: Branch,
    x_branch: Branch,
) -> Result<P2State> {
    require_off_axis(s2, "second particular solution")?;
    require_off_axis(s3, "third particular solution")?;
    let k = KappaSignature::new(0.0, kappa2);
    let mu3 = p2_F2(k, s2, s3)?;
    let ([x2, y2], [_, y3]) = (s2, s3);
    let sum = mu1 + mu2 + mu3;
    let a = -2.0 * kappa2 * sum + 8.0 * kappa2 * kappa2;
    let b = -mu1 * mu2 * mu3 + kappa2 * sum * sum - 8.0 * kappa2 * kappa2 * sum + 16.0 * kappa2.powi(3);
    let rad = y2 * y2 * y3 * y3 * b * (kappa2 * (y2 + y3).powi(2) - mu3 * y2 * y3);
    if rad < 0.0 {
        return Err(Error::NoRealSolution(format!("y-rule radicand {rad:e} < 0")));
    }
    let den = nonzero(
        mu1 * (mu1 - 4.0 * kappa2) * y2 * y2 + mu2 * (mu2 - 4.0 * kappa2) * y3 * y3
            - 2.0 * (mu1 * mu2 + a) * y2 * y3,
        "y-rule denominator",
    )?;
    let y1 = (y2 * y3 * ((mu1 * mu3 + a) * y2 + (mu2 * mu3 + a) * y3) + y_branch.sign() * 2.0 * rad.sqrt()) / den;
    let xr = mu1 * y1 * y2 - kappa2 * (y1 + y2).powi(2);
    if xr < 0.0 {
        return Err(Error::NoRealSolution(format!("x-rule radicand {xr:e} < 0")));
    }
    Ok([x2 + x_branch.sign() * xr.sqrt(), y1])
}

/// Every (y, x) branch pair of the flat rule that satisfies both μ-equations to `tol`.
pub fn p2_superpose_flat_candidates(
    kappa2: f64,
    s2: P2State,
    s3: P2State,
    mu1: f64,
    mu2: f64,
    tol: f64,
) -> Vec<(Branch, Branch, P2State)> {
    let k = KappaSignature::new(0.0, kappa2);
    let mut out = Vec::new();
    for yb in Branch::BOTH {
        for xb in Branch::BOTH {
            let Ok(s1) = p2_superpose_flat(kappa2, s2, s3, mu1, mu2, yb, xb) else { continue };
            let ok = match (p2_F2(k, s1, s2), p2_F2(k, s1, s3)) {
                (Ok(f), Ok(g)) => (f - mu1).abs() <= tol * (1.0 + mu1.abs()) && (g - mu2).abs() <= tol * (1.0 + mu2.abs()),
                _ => false,
            };
            if ok {
                out.push((yb, xb, s1));
            }
        }
    }
    out
}

/// The closed Galilean rule; the branch pairs x₁± with y₁∓.
pub fn p2_superpose_galilean(s2: P2State, s3: P2State, mu1: f64, mu2: f64, branch: Branch) -> Result<P2State> {
    require_off_axis(s2, "second particular solution")?;
    require_off_axis(s3, "third particular solution")?;
    let ([x2, y2], [x3, y3]) = (s2, s3);
    let p = mu1 * mu2 * y2 * y3;
    if p < 0.0 {
        return Err(Error::NoRealSolution(format!("μ₁μ₂y₂y₃ = {p:e} < 0")));
    }
    let r = p.sqrt();
    let den = nonzero(mu1 * y2 - mu2 * y3, "Galilean denominator")?;
    let sg = branch.sign();
    let x1 = (mu1 * x3 * y2 - mu2 * x2 * y3 + sg * (x2 - x3) * r) / den;
    let y1 = (x2 - x3).powi(2) * (mu1 * y2 + mu2 * y3 - sg * 2.0 * r) / (den * den);
    Ok([x1, y1])
}

/// Non-relativistic rule (κ₂ = 0) through T_{κ₁}(½x₁) and y₁ = 4S²(½(x₁−x₂))/(μ₁y₂).
pub fn p2_superpose_nonrel(
    kappa1: f64,
    s2: P2State,
    s3: P2State,
    mu1: f64,
    mu2: f64,
    branch: Branch,
) -> Result<P2State> {
    require_off_axis(s2, "second particular solution")?;
    require_off_axis(s3, "third particular solution")?;
    let ([x2, y2], [x3, y3]) = (s2, s3);
    let den_mu = nonzero(mu1 * y2, "μ₁y₂")?;
    let ratio = mu2 * y3 / den_mu;
    if ratio < 0.0 {
        return Err(domain(format!(
            "μ₂y₃/(μ₁y₂) = {ratio:e} < 0: the square roots are not real"
        )));
    }
    let r = branch.sign() * ratio.sqrt();
    let (c2, sn2) = (ck(kappa1, 0.5 * x2), sk(kappa1, 0.5 * x2));
    let (c3, sn3) = (ck(kappa1, 0.5 * x3), sk(kappa1, 0.5 * x3));
    let num = sn3 + r * sn2;
    let den = c3 + r * c2;
    if den.abs() < 1e-14 && num.abs() < 1e-14 {
        return Err(Error::DegenerateConfiguration("x-rule is 0/0".into()));
    }
    let x1 = if den.abs() < POLE_TOLERANCE {
        // T(½x₁) at its pole: ½x₁ is a quarter period.
        let q = std::f64::consts::FRAC_PI_2 / kappa1.max(f64::MIN_POSITIVE).sqrt();
        2.0 * q * num.signum()
    } else {
        2.0 * atk(kappa1, num / den)?
    };
    let sh = sk(kappa1, 0.5 * (x1 - x2));
    Ok([x1, 4.0 * sh * sh / den_mu])
}

/// The class as a [`LieHamiltonSystem`] (time-like variant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2System {
    pub kappas: KappaSignature,
}

impl LieHamiltonSystem for P2System {
    fn label(&self) -> String {
        format!("class_p2({})", self.kappas.label())
    }

    fn fields(&self, p: Point) -> Result<[TangentVector; 3]> {
        p2_fields(self.kappas, p, P2Variant::TimeLike)
    }

    fn weight(&self, p: Point) -> Result<f64> {
        p2_weight(self.kappas, p)
    }

    fn hamiltonians(&self, p: Point) -> Result<[f64; 3]> {
        p2_hamiltonians(self.kappas, p)
    }

    fn hamiltonian_gradients(&self, p: Point) -> Result<[[f64; 2]; 3]> {
        p2_hamiltonian_gradients(self.kappas, p)
    }

    fn algebra_kappa(&self) -> f64 {
        self.kappas.kappa1
    }

    fn casimir_value(&self) -> f64 {
        self.kappas.kappa2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_i4::casimir;
    use std::f64::consts::PI;

    fn k(a: f64, b: f64) -> KappaSignature {
        KappaSignature::new(a, b)
    }

    #[test]
    fn field_examples() {
        let f = p2_fields(k(0.0, 1.0), [1.5, 0.5], P2Variant::TimeLike).unwrap();
        assert_eq!(f[1], TangentVector::new(1.5, 0.5));
        assert_eq!(f[2], TangentVector::new(2.25 - 0.25, 1.5));
        let g = p2_fields(k(0.0, 0.0), [1.5, 0.5], P2Variant::TimeLike).unwrap();
        assert_eq!(g[2], TangentVector::new(2.25, 1.5));
        let s = p2_fields(k(1.0, 1.0), [PI / 2.0, 0.0], P2Variant::TimeLike).unwrap();
        assert!((s[1].vx - 1.0).abs() < 1e-15 && (s[2].vx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_examples() {
        let kk = k(0.3, -0.8);
        assert_eq!(p2_rhs_b(kk, [1.0, 0.0, 0.0], [0.4, 0.2]).unwrap(), [1.0, 0.0]);
        let r = p2_rhs_b(k(1.0, 1.0), [0.0, 1.0, 0.0], [PI / 2.0, PI / 4.0]).unwrap();
        assert!((r[0] - 2f64.sqrt()).abs() < 1e-14);
        let (x, y, k2) = (0.7, -0.4, -1.0);
        let b = [0.2, -0.3, 0.5];
        let r = p2_rhs_b(k(0.0, k2), b, [x, y]).unwrap();
        let flat = [b[0] + b[1] * x + b[2] * (x * x - k2 * y * y), b[1] * y + 2.0 * b[2] * x * y];
        assert!((r[0] - flat[0]).abs() < 1e-15 && (r[1] - flat[1]).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_examples() {
        let h = p2_hamiltonians(k(0.0, 1.0), [1.0, 2.0]).unwrap();
        assert_eq!(h, [-0.5, -0.5, -2.5]);
        let (x, y) = (0.4f64, 0.9f64);
        let h = p2_hamiltonians(k(1.0, 1.0), [x, y]).unwrap();
        assert!((h[2] - 2.0 * (x.cos() * y.cos() - 1.0) / y.sin()).abs() < 1e-14);
        assert_eq!(p2_weight(k(-1.0, 0.0), [x, y]).unwrap(), 1.0 / (y * y));
        assert!(p2_hamiltonians(k(1.0, 1.0), [0.3, 0.0]).is_err());
    }

    #[test]
    fn f2_examples() {
        for kk in KappaSignature::normalized() {
            assert_eq!(p2_F1(kk), kk.kappa2);
            let s = [0.3, 0.6];
            assert!((p2_F2(kk, s, s).unwrap() - 4.0 * kk.kappa2).abs() < 1e-13);
        }
        let (s1, s2) = ([0.3, 0.6], [-0.5, 1.1]);
        for k2 in [-1.0, 0.0, 1.0] {
            let f = p2_F2(k(0.0, k2), s1, s2).unwrap();
            let flat = ((s1[0] - s2[0]).powi(2) + k2 * (s1[1] + s2[1]).powi(2)) / (s1[1] * s2[1]);
            assert!((f - flat).abs() < 1e-14);
        }
    }

    #[test]
    fn f2_is_the_casimir_of_the_sum() {
        let kk = k(-0.7, 0.4);
        let (a, b) = ([0.3, 0.6], [-0.5, 1.1]);
        let (ha, hb) = (p2_hamiltonians(kk, a).unwrap(), p2_hamiltonians(kk, b).unwrap());
        let c = casimir(kk.kappa1, ha[0] + hb[0], ha[1] + hb[1], ha[2] + hb[2]);
        assert!((c - p2_F2(kk, a, b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn flat_round_trip_example() {
        let (s1, s2, s3) = ([0.5, 1.5], [1.0, 1.0], [2.0, 2.0]);
        let c = p2_constants(k(0.0, 1.0), s1, s2, s3).unwrap();
        assert!((c.mu1 - 13.0 / 3.0).abs() < 1e-14 && (c.mu3 - 5.0).abs() < 1e-14);
        let cands = p2_superpose_flat_candidates(1.0, s2, s3, c.mu1, c.mu2, 1e-8);
        assert!(cands.iter().any(|(_, _, s)| (s[0] - 0.5).abs() < 1e-10 && (s[1] - 1.5).abs() < 1e-10));
        assert!(p2_superpose_flat(1.0, [1.0, 0.0], s3, 1.0, 1.0, Branch::Plus, Branch::Plus).is_err());
    }

    #[test]
    fn galilean_rules_agree() {
        let (s1, s2, s3) = ([0.4, 0.8], [1.0, 0.5], [-0.7, 1.3]);
        let c = p2_constants(k(0.0, 0.0), s1, s2, s3).unwrap();
        let near = |s: P2State| (s[0] - s1[0]).abs() < 1e-10 && (s[1] - s1[1]).abs() < 1e-10;
        let g: Vec<_> = Branch::BOTH.iter().filter_map(|b| p2_superpose_galilean(s2, s3, c.mu1, c.mu2, *b).ok()).collect();
        assert!(g.iter().any(|s| near(*s)));
        let n: Vec<_> = Branch::BOTH.iter().filter_map(|b| p2_superpose_nonrel(0.0, s2, s3, c.mu1, c.mu2, *b).ok()).collect();
        assert!(n.iter().any(|s| near(*s)));
        let f = p2_superpose_flat_candidates(0.0, s2, s3, c.mu1, c.mu2, 1e-8);
        assert!(f.iter().any(|(_, _, s)| near(*s)));
    }

    #[test]
    fn nonrel_symmetric_collapse() {
        let s = [0.6, 0.9];
        let x = p2_superpose_nonrel(1.0, s, s, 2.0, 2.0, Branch::Plus).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn perturbation_example() {
        let r = p2_perturbed_rhs_b(k(0.1, 0.0), [0.0, 0.0, 1.0], [1.0, 1.0]);
        assert!((r[1] - (2.0 - 0.1 / 6.0 * 2.0)).abs() < 1e-14);
        let b = [0.3, -0.2, 0.6];
        let s = [0.4, 0.7];
        let exact = p2_rhs_b(k(0.0, 0.0), b, s).unwrap();
        let approx = p2_perturbed_rhs_b(k(0.0, 0.0), b, s);
        assert!((exact[0] - approx[0]).abs() < 1e-15 && (exact[1] - approx[1]).abs() < 1e-15);
    }
}
