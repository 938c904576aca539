//! The curved I₄ class on S¹[κ] × S¹[κ]: coupled curved Riccati equations.

use serde::{Deserialize, Serialize};

use crate::dynamics::CoefficientSet;
use crate::error::{domain, Error, Result};
use crate::fields::{Point, TangentVector};
use crate::ktrig::{atk, ck, sk, tk, vk, wrap_angle};
use crate::symplectic::{LieHamiltonSystem, ScalarField, SymplecticWeight};

/// (x, y), one coordinate on each factor.
pub type I4State = Point;

/// Guard on |S_κ(½(x − y))|.
pub const DIAGONAL_GUARD: f64 = 1e-13;

/// Particular solutions closer than this in both coordinates are degenerate.
pub const COINCIDENCE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// X₁ = ∂x + ∂y, X₂ = S(x)∂x + S(y)∂y, X₃ = 2V(x)∂x + 2V(y)∂y.
pub fn i4_fields(kappa: f64, s: I4State) -> [TangentVector; 3] {
    let [x, y] = s;
    [
        TangentVector::new(1.0, 1.0),
        TangentVector::new(sk(kappa, x), sk(kappa, y)),
        TangentVector::new(2.0 * vk(kappa, x), 2.0 * vk(kappa, y)),
    ]
}

/// The curved Riccati right-hand side b₁ + b₂S(x) + 2b₃V(x).
pub fn riccati_rhs(kappa: f64, b: [f64; 3], x: f64) -> f64 {
    b[0] + b[1] * sk(kappa, x) + 2.0 * b[2] * vk(kappa, x)
}

pub fn i4_rhs_b(kappa: f64, b: [f64; 3], s: I4State) -> [f64; 2] {
    [riccati_rhs(kappa, b, s[0]), riccati_rhs(kappa, b, s[1])]
}

pub fn i4_rhs(kappa: f64, coeffs: &CoefficientSet, t: f64, s: I4State) -> [f64; 2] {
    i4_rhs_b(kappa, coeffs.eval(t), s)
}

/// The quartic truncation in κ of the curved Riccati right-hand side.
pub fn riccati_perturbed_rhs(kappa: f64, b: [f64; 3], x: f64) -> f64 {
    let x2 = x * x;
    b[0] + b[1] * x + b[2] * x2 - kappa / 12.0 * (2.0 * b[1] * x2 * x + b[2] * x2 * x2)
}

pub fn i4_perturbed_rhs_b(kappa: f64, b: [f64; 3], s: I4State) -> [f64; 2] {
    [riccati_perturbed_rhs(kappa, b, s[0]), riccati_perturbed_rhs(kappa, b, s[1])]
}

pub fn i4_perturbed_rhs(kappa: f64, coeffs: &CoefficientSet, t: f64, s: I4State) -> [f64; 2] {
    i4_perturbed_rhs_b(kappa, coeffs.eval(t), s)
}

fn half_difference_sine(kappa: f64, s: I4State) -> Result<f64> {
    let d = 0.5 * (s[0] - s[1]);
    let sd = sk(kappa, d);
    if !(sd.abs() > DIAGONAL_GUARD) {
        return Err(domain(format!(
            "I4 state ({}, {}) is on the diagonal x = y",
            s[0], s[1]
        )));
    }
    Ok(sd)
}

/// W = 1/(4S²(½(x − y))).
pub fn i4_weight(kappa: f64, s: I4State) -> Result<f64> {
    let sd = half_difference_sine(kappa, s)?;
    Ok(0.25 / (sd * sd))
}

pub fn i4_symplectic(kappa: f64) -> SymplecticWeight {
    SymplecticWeight::new(move |p| i4_weight(kappa, p))
}

/// h₁ = 1/(2T(d)), h₂ = S(½(x+y))/(2S(d)), h₃ = 2S(½x)S(½y)/S(d), d = ½(x − y).
pub fn i4_hamiltonians(kappa: f64, s: I4State) -> Result<[f64; 3]> {
    let sd = half_difference_sine(kappa, s)?;
    let [x, y] = s;
    let d = 0.5 * (x - y);
    Ok([
        ck(kappa, d) / (2.0 * sd),
        sk(kappa, 0.5 * (x + y)) / (2.0 * sd),
        2.0 * sk(kappa, 0.5 * x) * sk(kappa, 0.5 * y) / sd,
    ])
}

/// Exact gradients of the three Hamiltonians.
pub fn i4_hamiltonian_gradients(kappa: f64, s: I4State) -> Result<[[f64; 2]; 3]> {
    let sd = half_difference_sine(kappa, s)?;
    let [x, y] = s;
    let q = 0.25 / (sd * sd);
    let sx = sk(kappa, 0.5 * x);
    let sy = sk(kappa, 0.5 * y);
    Ok([
        [-q, q],
        [-sk(kappa, y) * q, sk(kappa, x) * q],
        [-4.0 * sy * sy * q, 4.0 * sx * sx * q],
    ])
}

/// The three Hamiltonians as scalar fields with exact gradients.
pub fn i4_hamiltonian_fields(kappa: f64) -> [ScalarField; 3] {
    let make = |i: usize| {
        ScalarField::with_gradient(
            move |p| Ok(i4_hamiltonians(kappa, p)?[i]),
            move |p| Ok(i4_hamiltonian_gradients(kappa, p)?[i]),
        )
    };
    [make(0), make(1), make(2)]
}

/// v₁v₃ − v₂² − ¼κv₃².
pub fn casimir(kappa: f64, v1: f64, v2: f64, v3: f64) -> f64 {
    v1 * v3 - v2 * v2 - 0.25 * kappa * v3 * v3
}

/// Constant of the prolongation to two copies.
#[allow(non_snake_case)]
pub fn i4_F2(kappa: f64, s1: I4State, s2: I4State) -> Result<f64> {
    let d1 = half_difference_sine(kappa, s1)?;
    let d2 = half_difference_sine(kappa, s2)?;
    let n = sk(kappa, 0.5 * (s2[0] - s1[1])) * sk(kappa, 0.5 * (s1[0] - s2[1]));
    Ok(-n / (d1 * d2))
}

/// The same constant written through T_κ(½·) of the four coordinates.
#[allow(non_snake_case)]
pub fn i4_F2_tangent_form(kappa: f64, s1: I4State, s2: I4State) -> Result<f64> {
    let t = |u: f64| tk(kappa, 0.5 * u);
    let (x1, y1, x2, y2) = (t(s1[0])?, t(s1[1])?, t(s2[0])?, t(s2[1])?);
    let den = (x1 - y1) * (x2 - y2);
    if den.abs() < DIAGONAL_GUARD {
        return Err(domain("coincident coordinates in the tangent form"));
    }
    Ok(-(x2 - y1) * (x1 - y2) / den)
}

/// F₁₃ = S₁₃(F): copies 1 and 3 exchanged.
#[allow(non_snake_case)]
pub fn i4_F2_13(kappa: f64, _s1: I4State, s2: I4State, s3: I4State) -> Result<f64> {
    i4_F2(kappa, s3, s2)
}

/// F₂₃ = S₂₃(F): copies 2 and 3 exchanged.
#[allow(non_snake_case)]
pub fn i4_F2_23(kappa: f64, s1: I4State, _s2: I4State, s3: I4State) -> Result<f64> {
    i4_F2(kappa, s1, s3)
}

/// F⁽³⁾ = F + F₁₃ + F₂₃ + ¾.
#[allow(non_snake_case)]
pub fn i4_F3(kappa: f64, s1: I4State, s2: I4State, s3: I4State) -> Result<f64> {
    Ok(i4_F2(kappa, s1, s2)? + i4_F2_13(kappa, s1, s2, s3)? + i4_F2_23(kappa, s1, s2, s3)? + 0.75)
}

/// The constants (μ₁, μ₂, μ₃) with F = −μ₁, F₂₃ = −μ₂, F₁₃ = −μ₃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionConstants {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

pub fn i4_constants(kappa: f64, s1: I4State, s2: I4State, s3: I4State) -> Result<SuperpositionConstants> {
    Ok(SuperpositionConstants {
        mu1: -i4_F2(kappa, s1, s2)?,
        mu2: -i4_F2_23(kappa, s1, s2, s3)?,
        mu3: mu3_from_particulars(kappa, s2, s3)?,
    })
}

fn mu3_from_particulars(kappa: f64, s2: I4State, s3: I4State) -> Result<f64> {
    Ok(-i4_F2(kappa, s3, s2)?)
}

/// A reconstructed state with the data that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionData {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub branch: Branch,
    pub xi: f64,
    pub state: [f64; 2],
    /// max(|F + μ₁|, |F₂₃ + μ₂|) at the reconstructed state.
    pub residual: f64,
}

fn check_particulars(s2: I4State, s3: I4State) -> Result<()> {
    if (s2[0] - s3[0]).abs() < COINCIDENCE_GUARD && (s2[1] - s3[1]).abs() < COINCIDENCE_GUARD {
        return Err(Error::DegenerateConfiguration(
            "particular solutions coincide".into(),
        ));
    }
    Ok(())
}

fn nonzero(v: f64, what: &str) -> Result<f64> {
    if !v.is_finite() || v.abs() < 1e-14 {
        return Err(Error::DegenerateConfiguration(format!("{what} vanishes")));
    }
    Ok(v)
}

/// The discriminant and the two tangent-form values of y₁ (before the ± is applied).
fn y_rule(tx2: f64, ty2: f64, tx3: f64, ty3: f64, mu1: f64, mu2: f64, mu3: f64) -> (f64, f64, f64) {
    let d2 = tx2 - ty2;
    let d3 = tx3 - ty3;
    let dx = tx2 - tx3;
    let dy = ty2 - ty3;
    let xi = dx * dx * dy * dy + (mu1 * mu1 + mu2 * mu2 - 2.0 * mu1 * mu2 * mu3) * d2 * d2 * d3 * d3
        - 2.0 * (mu1 + mu2 - mu1 * mu2) * d2 * d3 * dx * dy;
    let num = (tx2 + tx3) * dy + mu1 * d2 * (tx3 + ty3) - mu2 * d3 * (tx2 + ty2);
    let den = mu1 * d2 - mu2 * d3 + dy;
    (xi, num, den)
}

/// x₁ from the first constant, all in tangent form.
fn x_rule(tx2: f64, ty2: f64, ty1: f64, mu1: f64) -> Result<f64> {
    let den = nonzero(mu1 * (tx2 - ty2) - (tx2 - ty1), "x-rule denominator")?;
    Ok((mu1 * (tx2 - ty2) * ty1 - (tx2 - ty1) * ty2) / den)
}

/// General solution from two particular solutions and (μ₁, μ₂); μ₃ is recomputed.
pub fn i4_superpose_detailed(
    kappa: f64,
    s2: I4State,
    s3: I4State,
    mu1: f64,
    mu2: f64,
    branch: Branch,
) -> Result<SuperpositionData> {
    check_particulars(s2, s3)?;
    let mu3 = mu3_from_particulars(kappa, s2, s3)?;
    let t = |u: f64| tk(kappa, 0.5 * u);
    let (tx2, ty2, tx3, ty3) = (t(s2[0])?, t(s2[1])?, t(s3[0])?, t(s3[1])?);
    let (xi, num, den) = y_rule(tx2, ty2, tx3, ty3, mu1, mu2, mu3);
    if xi < 0.0 {
        return Err(Error::NoRealSolution(format!("discriminant {xi:e} < 0")));
    }
    let den = nonzero(den, "y-rule denominator")?;
    let ty1 = 0.5 * (num + branch.sign() * xi.sqrt()) / den;
    let tx1 = x_rule(tx2, ty2, ty1, mu1)?;
    let state = [2.0 * atk(kappa, tx1)?, 2.0 * atk(kappa, ty1)?];
    let residual = (i4_F2(kappa, state, s2)? + mu1)
        .abs()
        .max((i4_F2(kappa, state, s3)? + mu2).abs());
    Ok(SuperpositionData { mu1, mu2, mu3, branch, xi, state, residual })
}

pub fn i4_superpose(
    kappa: f64,
    s2: I4State,
    s3: I4State,
    mu1: f64,
    mu2: f64,
    branch: Branch,
) -> Result<I4State> {
    Ok(i4_superpose_detailed(kappa, s2, s3, mu1, mu2, branch)?.state)
}

/// The closed κ = 0 rule written directly in the coordinates.
pub fn i4_superpose_flat(s2: I4State, s3: I4State, mu1: f64, mu2: f64, branch: Branch) -> Result<I4State> {
    check_particulars(s2, s3)?;
    let mu3 = mu3_from_particulars(0.0, s2, s3)?;
    let ([x2, y2], [x3, y3]) = (s2, s3);
    let xi = (x2 - x3).powi(2) * (y2 - y3).powi(2)
        + (mu1 * mu1 + mu2 * mu2 - 2.0 * mu1 * mu2 * mu3) * (x2 - y2).powi(2) * (x3 - y3).powi(2)
        - 2.0 * (mu1 + mu2 - mu1 * mu2) * (x2 - y2) * (x3 - y3) * (x2 - x3) * (y2 - y3);
    if xi < 0.0 {
        return Err(Error::NoRealSolution(format!("discriminant {xi:e} < 0")));
    }
    let den = nonzero(2.0 * (mu1 * (x2 - y2) - mu2 * (x3 - y3) + (y2 - y3)), "y-rule denominator")?;
    let y1 = ((x2 + x3) * (y2 - y3) + mu1 * (x2 - y2) * (x3 + y3) - mu2 * (x3 - y3) * (x2 + y2)
        + branch.sign() * xi.sqrt())
        / den;
    let dx = nonzero(mu1 * (x2 - y2) - (x2 - y1), "x-rule denominator")?;
    Ok([(mu1 * (x2 - y2) * y1 - (x2 - y1) * y2) / dx, y1])
}

fn wrapped_distance(kappa: f64, a: I4State, b: I4State) -> f64 {
    let d = |u: f64, v: f64| wrap_angle(kappa, u - v).abs();
    d(a[0], b[0]).max(d(a[1], b[1]))
}

/// The branch whose reconstruction lands nearest to `seed`.
pub fn select_branch(
    kappa: f64,
    s2: I4State,
    s3: I4State,
    mu1: f64,
    mu2: f64,
    seed: I4State,
) -> Result<Branch> {
    let mut best: Option<(f64, Branch)> = None;
    let mut last_err = None;
    for b in Branch::BOTH {
        match i4_superpose(kappa, s2, s3, mu1, mu2, b) {
            Ok(s) => {
                let d = wrapped_distance(kappa, s, seed);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, b));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.map(|(_, b)| b)
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::NoRealSolution("no branch".into())))
}

/// Riccati rule: T(½x̃) from three particular solutions and μ₁.
pub fn riccati_superpose(kappa: f64, xt1: f64, xt2: f64, xt3: f64, mu1: f64) -> Result<f64> {
    let t = |u: f64| tk(kappa, 0.5 * u);
    let (t1, t2, t3) = (t(xt1)?, t(xt2)?, t(xt3)?);
    let den = nonzero(mu1 * (t2 - t1) + (t3 - t2), "Riccati rule denominator")?;
    let tt = (mu1 * (t2 - t1) * t3 + (t3 - t2) * t1) / den;
    Ok(2.0 * atk(kappa, tt)?)
}

/// The classic flat rule, written in the coordinates themselves.
pub fn riccati_superpose_flat(xt1: f64, xt2: f64, xt3: f64, mu1: f64) -> Result<f64> {
    let den = nonzero(mu1 * (xt2 - xt1) + (xt3 - xt2), "Riccati rule denominator")?;
    Ok((mu1 * (xt2 - xt1) * xt3 + (xt3 - xt2) * xt1) / den)
}

/// The μ₁ that reproduces x̃ from the three particular solutions.
pub fn riccati_mu(kappa: f64, x: f64, xt1: f64, xt2: f64, xt3: f64) -> Result<f64> {
    let t = |u: f64| tk(kappa, 0.5 * u);
    let (tt, t1, t2, t3) = (t(x)?, t(xt1)?, t(xt2)?, t(xt3)?);
    let den = nonzero((t2 - t1) * (tt - t3), "Riccati constant denominator")?;
    Ok((t3 - t2) * (t1 - tt) / den)
}

/// The class as a [`LieHamiltonSystem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I4System {
    pub kappa: f64,
}

impl LieHamiltonSystem for I4System {
    fn label(&self) -> String {
        format!("class_i4(kappa={})", self.kappa)
    }

    fn fields(&self, p: Point) -> Result<[TangentVector; 3]> {
        Ok(i4_fields(self.kappa, p))
    }

    fn weight(&self, p: Point) -> Result<f64> {
        i4_weight(self.kappa, p)
    }

    fn hamiltonians(&self, p: Point) -> Result<[f64; 3]> {
        i4_hamiltonians(self.kappa, p)
    }

    fn hamiltonian_gradients(&self, p: Point) -> Result<[[f64; 2]; 3]> {
        i4_hamiltonian_gradients(self.kappa, p)
    }

    fn algebra_kappa(&self) -> f64 {
        self.kappa
    }

    fn casimir_value(&self) -> f64 {
        -0.25
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn field_examples() {
        let f = i4_fields(0.0, [1.5, -2.0]);
        assert_eq!(f[1], TangentVector::new(1.5, -2.0));
        assert_eq!(f[2], TangentVector::new(2.25, 4.0));
        let f = i4_fields(1.0, [PI / 2.0, 0.0]);
        assert!((f[1].vx - 1.0).abs() < 1e-15 && (f[2].vx - 2.0).abs() < 1e-15);
        let f = i4_fields(-1.0, [1.0, 0.0]);
        assert!((f[2].vx - 1.0861612696304874).abs() < 1e-14);
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(i4_rhs_b(0.7, [1.0, 0.0, 0.0], [0.3, 2.0]), [1.0, 1.0]);
        let r = i4_rhs_b(0.0, [0.5, -1.0, 2.0], [1.5, -0.5]);
        assert_eq!(r, [0.5 - 1.5 + 2.0 * 2.25, 0.5 + 0.5 + 2.0 * 0.25]);
        assert!((i4_rhs_b(1.0, [0.0, 0.0, 1.0], [PI, 0.0])[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_examples() {
        let h = i4_hamiltonians(0.0, [2.0, 0.0]).unwrap();
        assert_eq!(h, [0.5, 0.5, 0.0]);
        assert!(i4_hamiltonians(0.5, [1.0, 1.0]).is_err());
        let (x, y) = (1.0f64, 2.0f64);
        let h = i4_hamiltonians(1.0, [x, y]).unwrap();
        assert!((h[0] - 1.0 / (2.0 * (0.5 * (x - y)).tan())).abs() < 1e-14);
    }

    #[test]
    fn casimir_examples() {
        assert_eq!(casimir(0.3, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(casimir(0.0, 1.0, 2.0, 3.0), -1.0);
        for kappa in [-1.0, 0.0, 0.4] {
            let h = i4_hamiltonians(kappa, [0.9, -0.4]).unwrap();
            assert!((casimir(kappa, h[0], h[1], h[2]) + 0.25).abs() < 1e-13);
        }
    }

    #[test]
    fn f2_examples() {
        let s = [0.7, -0.2];
        assert!((i4_F2(0.8, s, s).unwrap() + 1.0).abs() < 1e-14);
        assert!((i4_F2(0.0, [2.0, 0.0], [1.0, 3.0]).unwrap() + 0.25).abs() < 1e-15);
        let (a, b) = ([0.3, 1.1], [-0.5, 0.6]);
        assert!((i4_F2(-0.6, a, b).unwrap() - i4_F2(-0.6, b, a).unwrap()).abs() < 1e-14);
        assert!((i4_F2(-0.6, a, b).unwrap() - i4_F2_tangent_form(-0.6, a, b).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn flat_round_trip_example() {
        let (s1, s2, s3) = ([5.0, 4.0], [1.0, 0.0], [3.0, 2.0]);
        let c = i4_constants(0.0, s1, s2, s3).unwrap();
        assert_eq!((c.mu1, c.mu2, c.mu3), (-15.0, -3.0, -3.0));
        let hits = Branch::BOTH
            .iter()
            .filter_map(|b| i4_superpose_flat(s2, s3, c.mu1, c.mu2, *b).ok())
            .filter(|r| (r[0] - 5.0).abs() < 1e-12 && (r[1] - 4.0).abs() < 1e-12)
            .count();
        assert!(hits >= 1);
        let b = select_branch(0.0, s2, s3, c.mu1, c.mu2, s1).unwrap();
        let r = i4_superpose(0.0, s2, s3, c.mu1, c.mu2, b).unwrap();
        assert!((r[0] - 5.0).abs() < 1e-12 && (r[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_particulars() {
        assert!(i4_superpose(0.5, [1.0, 1.0], [2.0, 0.0], 1.0, 1.0, Branch::Plus).is_err());
        let e = i4_superpose(0.5, [1.0, 0.0], [1.0, 0.0], 1.0, 1.0, Branch::Plus).unwrap_err();
        assert!(matches!(e, Error::DegenerateConfiguration(_)));
    }

    #[test]
    fn riccati_examples() {
        assert!((riccati_superpose(0.0, 0.0, 1.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((riccati_superpose(0.9, 0.3, 1.0, 2.0, 0.0).unwrap() - 0.3).abs() < 1e-14);
        let mu = riccati_mu(1.0, 0.5, 0.1, 0.9, -1.2).unwrap();
        assert!((riccati_superpose(1.0, 0.1, 0.9, -1.2, mu).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn perturbation_example() {
        let r = riccati_perturbed_rhs(0.1, [0.0, 1.0, 0.0], 2.0);
        assert!((r - (2.0 - 0.1 / 12.0 * 16.0)).abs() < 1e-14);
        assert!((riccati_perturbed_rhs(0.0, [0.3, 0.2, 0.1], 1.5) - 0.825).abs() < 1e-15);
    }
}
