//! Tangent vectors, vector-field evaluators and central differences.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A point of a two-dimensional chart.
pub type Point = [f64; 2];

/// Value of a vector field at a point, in the components of the active chart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub vx: f64,
    pub vy: f64,
}

impl TangentVector {
    pub const ZERO: TangentVector = TangentVector { vx: 0.0, vy: 0.0 };

    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn norm(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite()
    }

    pub fn scale(self, a: f64) -> Self {
        Self::new(a * self.vx, a * self.vy)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.vx + o.vx, self.vy + o.vy)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.vx - o.vx, self.vy - o.vy)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.vx, self.vy]
    }

    pub(crate) fn checked(self, what: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(domain(format!("{what} is not finite ({}, {})", self.vx, self.vy)))
        }
    }
}

impl From<[f64; 2]> for TangentVector {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

/// Anything that can be evaluated as a vector field on a chart.
pub trait VectorField {
    fn eval(&self, p: Point) -> Result<TangentVector>;
}

impl<F> VectorField for F
where
    F: Fn(Point) -> Result<TangentVector>,
{
    fn eval(&self, p: Point) -> Result<TangentVector> {
        self(p)
    }
}

/// Finite-difference step used throughout: 1e−6·max(1, |p|).
pub fn fd_step(p: Point) -> f64 {
    1e-6 * p[0].hypot(p[1]).max(1.0)
}

fn shifted(p: Point, axis: usize, h: f64) -> Point {
    let mut q = p;
    q[axis] += h;
    q
}

/// Central-difference Jacobian, `J[i][j] = ∂ⱼXⁱ`.
pub fn jacobian_fd(x: &dyn VectorField, p: Point) -> Result<[[f64; 2]; 2]> {
    let h = fd_step(p);
    let mut j = [[0.0; 2]; 2];
    for axis in 0..2 {
        let fp = x.eval(shifted(p, axis, h))?;
        let fm = x.eval(shifted(p, axis, -h))?;
        j[0][axis] = (fp.vx - fm.vx) / (2.0 * h);
        j[1][axis] = (fp.vy - fm.vy) / (2.0 * h);
    }
    Ok(j)
}

/// Central-difference Jacobian of a point map.
pub fn map_jacobian_fd(f: &dyn Fn(Point) -> Result<Point>, p: Point) -> Result<[[f64; 2]; 2]> {
    let g = |q: Point| f(q).map(TangentVector::from);
    jacobian_fd(&g, p)
}

/// Central-difference gradient of a scalar function.
pub fn gradient_fd(f: &dyn Fn(Point) -> Result<f64>, p: Point) -> Result<[f64; 2]> {
    let h = fd_step(p);
    let mut g = [0.0; 2];
    for axis in 0..2 {
        g[axis] = (f(shifted(p, axis, h))? - f(shifted(p, axis, -h))?) / (2.0 * h);
    }
    Ok(g)
}

/// `[X,Y]ⁱ = Xʲ∂ⱼYⁱ − Yʲ∂ⱼXⁱ` with central differences.
pub fn lie_bracket_numeric(x: &dyn VectorField, y: &dyn VectorField, p: Point) -> Result<TangentVector> {
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    let jx = jacobian_fd(x, p)?;
    let jy = jacobian_fd(y, p)?;
    let comp = |i: usize| {
        xv.vx * jy[i][0] + xv.vy * jy[i][1] - (yv.vx * jx[i][0] + yv.vy * jx[i][1])
    };
    TangentVector::new(comp(0), comp(1)).checked("Lie bracket")
}

/// A linear combination Σ cᵢXᵢ evaluated at p.
pub fn combine(terms: &[(f64, TangentVector)]) -> TangentVector {
    terms
        .iter()
        .fold(TangentVector::ZERO, |acc, (c, v)| acc.add(v.scale(*c)))
}

/// Relative residual ‖a − b‖/(1 + ‖b‖).
pub fn relative_residual(a: TangentVector, b: TangentVector) -> f64 {
    a.sub(b).norm() / (1.0 + b.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(p: Point) -> Result<TangentVector> {
        Ok(TangentVector::new(-p[1], p[0]))
    }

    fn dil(p: Point) -> Result<TangentVector> {
        Ok(TangentVector::new(p[0], p[1]))
    }

    fn quad(p: Point) -> Result<TangentVector> {
        Ok(TangentVector::new(p[0] * p[0], p[0] * p[1]))
    }

    #[test]
    fn self_bracket_vanishes() {
        let b = lie_bracket_numeric(&quad, &quad, [0.4, -1.3]).unwrap();
        assert!(b.norm() < 1e-9);
    }

    #[test]
    fn rotation_commutes_with_dilation() {
        let b = lie_bracket_numeric(&rot, &dil, [0.7, 2.1]).unwrap();
        assert!(b.norm() < 1e-8);
    }

    #[test]
    fn bracket_against_hand_computation() {
        // [∂x, x²∂x + xy∂y] = 2x∂x + y∂y
        let dx = |_: Point| Ok(TangentVector::new(1.0, 0.0));
        let p = [1.5, -0.5];
        let b = lie_bracket_numeric(&dx, &quad, p).unwrap();
        assert!((b.vx - 3.0).abs() < 1e-8 && (b.vy + 0.5).abs() < 1e-8);
    }

    #[test]
    fn gradient_of_quadratic() {
        let f = |p: Point| Ok(p[0] * p[0] + 3.0 * p[0] * p[1]);
        let g = gradient_fd(&f, [2.0, 1.0]).unwrap();
        assert!((g[0] - 7.0).abs() < 1e-8 && (g[1] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn errors_propagate_from_stencil() {
        let bad = |p: Point| {
            if p[0] > 0.0 {
                Err(domain("right half-plane"))
            } else {
                Ok(TangentVector::ZERO)
            }
        };
        assert!(jacobian_fd(&bad, [0.0, 0.0]).is_err());
    }
}
