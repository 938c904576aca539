//! Conformal generators of the 2D and 1D Cayley–Klein spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{combine, jacobian_fd, relative_residual, Point, TangentVector, VectorField};
use crate::geometry::{metric_at, Chart, GeoPoint};
use crate::ktrig::{ck, sk, vk, KappaSignature, POLE_TOLERANCE};

pub use crate::fields::lie_bracket_numeric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConformalGenerator {
    P1,
    P2,
    J12,
    G1,
    G2,
    D,
}

impl ConformalGenerator {
    pub const ALL: [ConformalGenerator; 6] = [
        ConformalGenerator::P1,
        ConformalGenerator::P2,
        ConformalGenerator::J12,
        ConformalGenerator::G1,
        ConformalGenerator::G2,
        ConformalGenerator::D,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConformalGenerator::P1 => "P1",
            ConformalGenerator::P2 => "P2",
            ConformalGenerator::J12 => "J12",
            ConformalGenerator::G1 => "G1",
            ConformalGenerator::G2 => "G2",
            ConformalGenerator::D => "D",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConformalGenerator1D {
    P1,
    G1,
    D,
}

impl ConformalGenerator1D {
    pub const ALL: [ConformalGenerator1D; 3] =
        [ConformalGenerator1D::P1, ConformalGenerator1D::G1, ConformalGenerator1D::D];

    pub fn name(&self) -> &'static str {
        match self {
            ConformalGenerator1D::P1 => "P1",
            ConformalGenerator1D::G1 => "G1",
            ConformalGenerator1D::D => "D",
        }
    }
}

fn parallel_i(p: GeoPoint) -> Result<Point> {
    if p.chart != Chart::ParallelI {
        return Err(Error::InvalidArgument(format!(
            "conformal fields are given in the parallel-I chart, got {:?}",
            p.chart
        )));
    }
    Ok([p.a, p.b])
}

/// Field components at (x, y) in the parallel-I chart.
pub fn conf_field_xy(k: KappaSignature, gen: ConformalGenerator, p: Point) -> Result<TangentVector> {
    let (k1, k2, k12) = (k.kappa1, k.kappa2, k.product());
    let [x, y] = p;
    let (c1, s1, v1) = (ck(k1, x), sk(k1, x), vk(k1, x));
    let (c12, s12, v12) = (ck(k12, y), sk(k12, y), vk(k12, y));
    let needs_c12 = !matches!(gen, ConformalGenerator::P1);
    if needs_c12 && c12.abs() < POLE_TOLERANCE {
        return Err(Error::Pole { kappa: k12, u: y });
    }
    let t12 = s12 / c12;
    let v = match gen {
        ConformalGenerator::P1 => TangentVector::new(-1.0, 0.0),
        ConformalGenerator::P2 => TangentVector::new(-k12 * s1 * t12, -c1),
        ConformalGenerator::J12 => TangentVector::new(k2 * c1 * t12, -s1),
        ConformalGenerator::G1 => TangentVector::new((v1 - k2 * v12) / c12, s1 * s12),
        ConformalGenerator::G2 => TangentVector::new(k2 * s1 * t12, -(v1 - k2 * v12)),
        ConformalGenerator::D => TangentVector::new(-s1 / c12, -c1 * s12),
    };
    v.checked(gen.name())
}

pub fn conf_field(k: KappaSignature, gen: ConformalGenerator, p: GeoPoint) -> Result<TangentVector> {
    conf_field_xy(k, gen, parallel_i(p)?)
}

/// μ with ℒ_X g = μ g: 0, −2x⁰, 2x¹, 2κ₂x² in ambient terms.
pub fn conf_factor_xy(k: KappaSignature, gen: ConformalGenerator, p: Point) -> f64 {
    let (k1, k12) = (k.kappa1, k.product());
    let [x, y] = p;
    match gen {
        ConformalGenerator::P1 | ConformalGenerator::P2 | ConformalGenerator::J12 => 0.0,
        ConformalGenerator::D => -2.0 * ck(k1, x) * ck(k12, y),
        ConformalGenerator::G1 => 2.0 * sk(k1, x) * ck(k12, y),
        ConformalGenerator::G2 => 2.0 * k.kappa2 * sk(k12, y),
    }
}

pub fn conf_factor(k: KappaSignature, gen: ConformalGenerator, p: GeoPoint) -> Result<f64> {
    Ok(conf_factor_xy(k, gen, parallel_i(p)?))
}

/// The right-hand side of [a, b] as a linear combination of generators.
pub fn expected_bracket(
    k: KappaSignature,
    a: ConformalGenerator,
    b: ConformalGenerator,
) -> Vec<(f64, ConformalGenerator)> {
    use ConformalGenerator::*;
    let (k1, k2) = (k.kappa1, k.kappa2);
    let forward = |a, b| -> Option<Vec<(f64, ConformalGenerator)>> {
        Some(match (a, b) {
            (P1, P2) => vec![(k1, J12)],
            (P1, J12) => vec![(-1.0, P2)],
            (P1, G1) => vec![(1.0, D)],
            (P1, G2) => vec![(-1.0, J12)],
            (P1, D) => vec![(-1.0, P1), (-k1, G1)],
            (P2, J12) => vec![(k2, P1)],
            (P2, G1) => vec![(1.0, J12)],
            (P2, G2) => vec![(k2, D)],
            (P2, D) => vec![(-1.0, P2), (-k1, G2)],
            (J12, G1) => vec![(1.0, G2)],
            (J12, G2) => vec![(-k2, G1)],
            (J12, D) => vec![],
            (G1, G2) => vec![],
            (G1, D) => vec![(1.0, G1)],
            (G2, D) => vec![(1.0, G2)],
            _ => return None,
        })
    };
    if a == b {
        return vec![];
    }
    match forward(a, b) {
        Some(v) => v,
        None => forward(b, a)
            .expect("every unordered pair is listed")
            .into_iter()
            .map(|(c, g)| (-c, g))
            .collect(),
    }
}

/// Relative residual ‖[a,b]_num − expected‖/(1 + ‖expected‖) at p.
pub fn bracket_residual(
    k: KappaSignature,
    a: ConformalGenerator,
    b: ConformalGenerator,
    p: Point,
) -> Result<f64> {
    let fa = |q: Point| conf_field_xy(k, a, q);
    let fb = |q: Point| conf_field_xy(k, b, q);
    let num = lie_bracket_numeric(&fa, &fb, p)?;
    let mut terms = Vec::new();
    for (c, g) in expected_bracket(k, a, b) {
        terms.push((c, conf_field_xy(k, g, p)?));
    }
    Ok(relative_residual(num, combine(&terms)))
}

/// Outcome of a conformal Killing check at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KillingReport {
    pub residual: f64,
    /// Only the (x, x) component was checked because κ₂ = 0.
    pub restricted: bool,
}

/// max |ℒ_X g − μ g| in the parallel-I chart, all derivatives by central differences.
pub fn killing_residual(
    k: KappaSignature,
    x: &dyn VectorField,
    mu: &dyn Fn(Point) -> f64,
    p: Point,
) -> Result<KillingReport> {
    let metric = |q: Point| metric_at(k, GeoPoint::parallel_i(q[0], q[1]));
    let h = crate::fields::fd_step(p);
    let mut dg = [[[0.0; 2]; 2]; 2];
    for axis in 0..2 {
        let mut qp = p;
        let mut qm = p;
        qp[axis] += h;
        qm[axis] -= h;
        let (gp, gm) = (metric(qp), metric(qm));
        for i in 0..2 {
            for j in 0..2 {
                dg[axis][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let g = metric(p);
    let xv = x.eval(p)?.as_array();
    let jx = jacobian_fd(x, p)?;
    let m = mu(p);
    let restricted = k.kappa2 == 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if restricted && (i, j) != (0, 0) {
                continue;
            }
            let mut lie = xv[0] * dg[0][i][j] + xv[1] * dg[1][i][j];
            for l in 0..2 {
                lie += g[l][j] * jx[l][i] + g[i][l] * jx[l][j];
            }
            worst = worst.max((lie - m * g[i][j]).abs());
        }
    }
    Ok(KillingReport { residual: worst, restricted })
}

/// The three generators on the 1D space: P₁ = −∂x, G₁ = V(x)∂x, D = −S(x)∂x.
pub fn conf_field_1d(kappa: f64, gen: ConformalGenerator1D, x: f64) -> f64 {
    match gen {
        ConformalGenerator1D::P1 => -1.0,
        ConformalGenerator1D::G1 => vk(kappa, x),
        ConformalGenerator1D::D => -sk(kappa, x),
    }
}

/// Conformal factor 2X′ of the 1D generators for the metric dx².
pub fn conf_factor_1d(kappa: f64, gen: ConformalGenerator1D, x: f64) -> f64 {
    match gen {
        ConformalGenerator1D::P1 => 0.0,
        ConformalGenerator1D::G1 => 2.0 * sk(kappa, x),
        ConformalGenerator1D::D => -2.0 * ck(kappa, x),
    }
}

pub fn expected_bracket_1d(
    kappa: f64,
    a: ConformalGenerator1D,
    b: ConformalGenerator1D,
) -> Vec<(f64, ConformalGenerator1D)> {
    use ConformalGenerator1D::*;
    let forward = |a, b| -> Option<Vec<(f64, ConformalGenerator1D)>> {
        Some(match (a, b) {
            (D, P1) => vec![(1.0, P1), (kappa, G1)],
            (D, G1) => vec![(-1.0, G1)],
            (P1, G1) => vec![(1.0, D)],
            _ => return None,
        })
    };
    if a == b {
        return vec![];
    }
    match forward(a, b) {
        Some(v) => v,
        None => forward(b, a)
            .expect("every unordered pair is listed")
            .into_iter()
            .map(|(c, g)| (-c, g))
            .collect(),
    }
}

/// The 1D bracket check, embedding the line as vector fields on the plane.
pub fn bracket_residual_1d(kappa: f64, a: ConformalGenerator1D, b: ConformalGenerator1D, x: f64) -> Result<f64> {
    let lift = |g: ConformalGenerator1D| move |q: Point| Ok(TangentVector::new(conf_field_1d(kappa, g, q[0]), 0.0));
    let (fa, fb) = (lift(a), lift(b));
    let num = lie_bracket_numeric(&fa, &fb, [x, 0.0])?;
    let exp: f64 = expected_bracket_1d(kappa, a, b)
        .into_iter()
        .map(|(c, g)| c * conf_field_1d(kappa, g, x))
        .sum();
    Ok(relative_residual(num, TangentVector::new(exp, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_examples() {
        let e = KappaSignature::new(0.0, 1.0);
        let p1 = conf_field_xy(e, ConformalGenerator::P1, [0.3, -2.0]).unwrap();
        assert_eq!(p1, TangentVector::new(-1.0, 0.0));
        let d = conf_field_xy(e, ConformalGenerator::D, [3.0, 4.0]).unwrap();
        assert!((d.vx + 3.0).abs() < 1e-15 && (d.vy + 4.0).abs() < 1e-15);
        let g = conf_field_xy(e, ConformalGenerator::G1, [1.0, 2.0]).unwrap();
        assert!((g.vx + 1.5).abs() < 1e-15 && (g.vy - 2.0).abs() < 1e-15);
    }

    #[test]
    fn factors() {
        for k in KappaSignature::normalized() {
            let o = conf_factor_xy(k, ConformalGenerator::D, [0.0, 0.0]);
            assert_eq!(o, -2.0);
        }
        let k = KappaSignature::new(1.0, 0.0);
        assert_eq!(conf_factor_xy(k, ConformalGenerator::G2, [0.5, 0.5]), 0.0);
        assert_eq!(conf_factor_xy(k, ConformalGenerator::P1, [0.5, 0.5]), 0.0);
    }

    #[test]
    fn bracket_table_is_antisymmetric() {
        let k = KappaSignature::new(0.4, -1.2);
        for a in ConformalGenerator::ALL {
            for b in ConformalGenerator::ALL {
                let ab = expected_bracket(k, a, b);
                let ba = expected_bracket(k, b, a);
                assert_eq!(ab.len(), ba.len());
                for ((c1, g1), (c2, g2)) in ab.iter().zip(&ba) {
                    assert_eq!(g1, g2);
                    assert_eq!(*c1, -*c2);
                }
            }
        }
    }

    #[test]
    fn sphere_brackets_at_a_point() {
        let k = KappaSignature::new(1.0, 1.0);
        for a in ConformalGenerator::ALL {
            for b in ConformalGenerator::ALL {
                let r = bracket_residual(k, a, b, [0.4, -0.3]).unwrap();
                assert!(r < 1e-6, "[{}, {}] residual {r}", a.name(), b.name());
            }
        }
    }

    #[test]
    fn one_dimensional_brackets() {
        for kappa in [-1.0, 0.0, 0.7] {
            for a in ConformalGenerator1D::ALL {
                for b in ConformalGenerator1D::ALL {
                    assert!(bracket_residual_1d(kappa, a, b, 0.6).unwrap() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn killing_examples() {
        let s = KappaSignature::new(1.0, 1.0);
        let d = |q: Point| conf_field_xy(s, ConformalGenerator::D, q);
        let mu = |q: Point| conf_factor_xy(s, ConformalGenerator::D, q);
        assert!(killing_residual(s, &d, &mu, [0.3, 0.2]).unwrap().residual < 1e-7);
        let e = KappaSignature::new(0.0, 1.0);
        let shear = |q: Point| Ok(TangentVector::new(q[1], 0.0));
        let zero = |_: Point| 0.0;
        assert!(killing_residual(e, &shear, &zero, [0.3, 0.2]).unwrap().residual > 1e-3);
        let g = KappaSignature::new(0.0, 0.0);
        let p1 = |q: Point| conf_field_xy(g, ConformalGenerator::P1, q);
        assert!(killing_residual(g, &p1, &zero, [0.3, 0.2]).unwrap().restricted);
    }

    #[test]
    fn non_parallel_chart_rejected() {
        let k = KappaSignature::new(1.0, 1.0);
        let p = GeoPoint::new(Chart::Polar, 0.3, 0.1);
        assert!(conf_field(k, ConformalGenerator::P1, p).is_err());
    }
}
