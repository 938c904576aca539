//! Area forms ω = W dx∧dy, Hamiltonian fields and Poisson brackets in 2D.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{
    combine, fd_step, gradient_fd, lie_bracket_numeric, relative_residual, Point, TangentVector,
    VectorField,
};

/// |W| below this is a degenerate form.
pub const DEGENERACY_TOLERANCE: f64 = 1e-13;

pub type ScalarFn = Arc<dyn Fn(Point) -> Result<f64> + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(Point) -> Result<[f64; 2]> + Send + Sync>;

/// The coefficient W of ω = W dx∧dy.
#[derive(Clone)]
pub struct SymplecticWeight {
    w: ScalarFn,
}

impl SymplecticWeight {
    pub fn new(w: impl Fn(Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { w: Arc::new(w) }
    }

    /// The canonical form du∧dv.
    pub fn canonical() -> Self {
        Self::new(|_| Ok(1.0))
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        let w = (self.w)(p)?;
        if !w.is_finite() || w.abs() < DEGENERACY_TOLERANCE {
            return Err(Error::SymplecticDegeneracy(w));
        }
        Ok(w)
    }
}

/// A scalar function with an optional exact gradient.
#[derive(Clone)]
pub struct ScalarField {
    f: ScalarFn,
    grad: Option<GradientFn>,
}

impl ScalarField {
    pub fn new(f: impl Fn(Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), grad: None }
    }

    pub fn with_gradient(
        f: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
        g: impl Fn(Point) -> Result<[f64; 2]> + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), grad: Some(Arc::new(g)) }
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        (self.f)(p)
    }

    pub fn has_exact_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn gradient(&self, p: Point) -> Result<[f64; 2]> {
        match &self.grad {
            Some(g) => g(p),
            None => gradient_fd(&*self.f, p),
        }
    }
}

/// X_h = (∂_y h, −∂_x h)/W, the field with ι_Xω = dh.
pub fn ham_vector_field(w: &SymplecticWeight, h: &ScalarField, p: Point) -> Result<TangentVector> {
    let wv = w.eval(p)?;
    let g = h.gradient(p)?;
    TangentVector::new(g[1] / wv, -g[0] / wv).checked("Hamiltonian vector field")
}

/// {f, g} = (∂_x f ∂_y g − ∂_y f ∂_x g)/W.
pub fn poisson(w: &SymplecticWeight, f: &ScalarField, g: &ScalarField, p: Point) -> Result<f64> {
    let wv = w.eval(p)?;
    let (a, b) = (f.gradient(p)?, g.gradient(p)?);
    Ok(poisson_from_gradients(wv, a, b))
}

pub fn poisson_from_gradients(w: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]) / w
}

/// ∂_x(WXˣ) + ∂_y(WXʸ), which vanishes iff ℒ_X ω = 0.
pub fn invariance_residual(w: &SymplecticWeight, x: &dyn VectorField, p: Point) -> Result<f64> {
    let h = fd_step(p);
    let flux = |q: Point, axis: usize| -> Result<f64> {
        let v = x.eval(q)?.as_array();
        Ok(w.eval(q)? * v[axis])
    };
    let mut div = 0.0;
    for axis in 0..2 {
        let mut qp = p;
        let mut qm = p;
        qp[axis] += h;
        qm[axis] -= h;
        div += (flux(qp, axis)? - flux(qm, axis)?) / (2.0 * h);
    }
    Ok(div.abs())
}

/// Components of ι_Xω − dh from raw values: ι_Xω = −WXʸ dx + WXˣ dy.
pub fn pairing_residual(w: f64, x: TangentVector, grad: [f64; 2]) -> f64 {
    (-w * x.vy - grad[0]).abs().max((w * x.vx - grad[1]).abs())
}

/// max-abs component of ι_Xω − dh at p.
pub fn hamiltonian_residual(
    w: &SymplecticWeight,
    x: &dyn VectorField,
    h: &ScalarField,
    p: Point,
) -> Result<f64> {
    Ok(pairing_residual(w.eval(p)?, x.eval(p)?, h.gradient(p)?))
}

/// |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| with inner brackets differentiated numerically.
pub fn jacobi_residual(
    w: &SymplecticWeight,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    p: Point,
) -> Result<f64> {
    let inner = |a: &ScalarField, b: &ScalarField| {
        let (w, a, b) = (w.clone(), a.clone(), b.clone());
        ScalarField::new(move |q| poisson(&w, &a, &b, q))
    };
    let t1 = poisson(w, f, &inner(g, h), p)?;
    let t2 = poisson(w, g, &inner(h, f), p)?;
    let t3 = poisson(w, h, &inner(f, g), p)?;
    Ok((t1 + t2 + t3).abs())
}

/// Worst relative residual of [X₁,X₂] = X₁ − ½κX₃, [X₁,X₃] = 2c X₂,
/// [X₂,X₃] = X₃ for a field triple, with numeric brackets.
pub fn vg_bracket_residual(
    fields: &dyn Fn(Point) -> Result<[TangentVector; 3]>,
    kappa: f64,
    c13: f64,
    p: Point,
) -> Result<f64> {
    let x = fields(p)?;
    let field = |i: usize| move |q: Point| Ok::<_, Error>(fields(q)?[i]);
    let (f0, f1, f2) = (field(0), field(1), field(2));
    let b12 = lie_bracket_numeric(&f0, &f1, p)?;
    let b13 = lie_bracket_numeric(&f0, &f2, p)?;
    let b23 = lie_bracket_numeric(&f1, &f2, p)?;
    let r12 = relative_residual(b12, combine(&[(1.0, x[0]), (-0.5 * kappa, x[2])]));
    let r13 = relative_residual(b13, x[1].scale(2.0 * c13));
    let r23 = relative_residual(b23, x[2]);
    Ok(r12.max(r13).max(r23))
}

/// A Lie–Hamilton system with three fields closing on the sl(2) relations
/// {h₁,h₂} = −h₁ + ½κh₃, {h₁,h₃} = −2h₂, {h₂,h₃} = −h₃.
pub trait LieHamiltonSystem: Send + Sync {
    fn label(&self) -> String;

    fn fields(&self, p: Point) -> Result<[TangentVector; 3]>;

    fn weight(&self, p: Point) -> Result<f64>;

    fn hamiltonians(&self, p: Point) -> Result<[f64; 3]>;

    fn hamiltonian_gradients(&self, p: Point) -> Result<[[f64; 2]; 3]>;

    /// The κ of the Poisson relations.
    fn algebra_kappa(&self) -> f64;

    /// Value of the Casimir on the realized Hamiltonians.
    fn casimir_value(&self) -> f64;

    fn casimir_at(&self, p: Point) -> Result<f64> {
        let h = self.hamiltonians(p)?;
        Ok(crate::class_i4::casimir(self.algebra_kappa(), h[0], h[1], h[2]))
    }

    /// Worst ι_{Xᵢ}ω − dhᵢ residual over the three pairs.
    fn pairing_residual(&self, p: Point) -> Result<f64> {
        let w = self.weight(p)?;
        if w.abs() < DEGENERACY_TOLERANCE {
            return Err(Error::SymplecticDegeneracy(w));
        }
        let x = self.fields(p)?;
        let g = self.hamiltonian_gradients(p)?;
        Ok((0..3).map(|i| pairing_residual(w, x[i], g[i])).fold(0.0, f64::max))
    }

    /// Worst deviation of the three Poisson brackets from the sl(2) relations.
    fn poisson_residual(&self, p: Point) -> Result<f64> {
        let w = self.weight(p)?;
        let g = self.hamiltonian_gradients(p)?;
        let h = self.hamiltonians(p)?;
        let k = self.algebra_kappa();
        let b = |i: usize, j: usize| poisson_from_gradients(w, g[i], g[j]);
        let r12 = (b(0, 1) - (-h[0] + 0.5 * k * h[2])).abs();
        let r13 = (b(0, 2) + 2.0 * h[1]).abs();
        let r23 = (b(1, 2) + h[2]).abs();
        Ok(r12.max(r13).max(r23))
    }

    /// Σ bᵢXᵢ(p).
    fn rhs(&self, b: [f64; 3], p: Point) -> Result<[f64; 2]> {
        let x = self.fields(p)?;
        Ok([
            b[0] * x[0].vx + b[1] * x[1].vx + b[2] * x[2].vx,
            b[0] * x[0].vy + b[1] * x[1].vy + b[2] * x[2].vy,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ermakov(c: f64) -> [ScalarField; 3] {
        [
            ScalarField::with_gradient(|p| Ok(0.5 * p[0] * p[0]), |p| Ok([p[0], 0.0])),
            ScalarField::with_gradient(|p| Ok(-0.5 * p[0] * p[1]), |p| Ok([-0.5 * p[1], -0.5 * p[0]])),
            ScalarField::with_gradient(
                move |p| Ok(0.5 * (p[1] * p[1] + c / (p[0] * p[0]))),
                move |p| Ok([-c / p[0].powi(3), p[1]]),
            ),
        ]
    }

    #[test]
    fn bracket_sign_convention_from_ermakov() {
        let w = SymplecticWeight::canonical();
        let [h1, h2, h3] = ermakov(1.0);
        let p = [1.0, 2.0];
        let b13 = poisson(&w, &h1, &h3, p).unwrap();
        assert!((b13 - 2.0).abs() < 1e-14);
        assert!((b13 + 2.0 * h2.value(p).unwrap()).abs() < 1e-14);
        let b12 = poisson(&w, &h1, &h2, p).unwrap();
        assert!((b12 + h1.value(p).unwrap()).abs() < 1e-14);
        let b23 = poisson(&w, &h2, &h3, p).unwrap();
        assert!((b23 + h3.value(p).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_field_examples() {
        let w = SymplecticWeight::canonical();
        let [h1, _, _] = ermakov(1.0);
        let x = ham_vector_field(&w, &h1, [1.7, 0.3]).unwrap();
        assert!(x.vx.abs() < 1e-15 && (x.vy + 1.7).abs() < 1e-15);
        let k = ScalarField::new(|_| Ok(4.0));
        assert!(ham_vector_field(&w, &k, [0.2, 0.1]).unwrap().norm() < 1e-9);
        let wy = SymplecticWeight::new(|p| Ok(1.0 / (p[1] * p[1])));
        let h = ScalarField::with_gradient(|p| Ok(-1.0 / p[1]), |p| Ok([0.0, 1.0 / (p[1] * p[1])]));
        let x = ham_vector_field(&wy, &h, [1.0, 2.0]).unwrap();
        assert!((x.vx - 1.0).abs() < 1e-15 && x.vy.abs() < 1e-15);
    }

    #[test]
    fn degenerate_weight_is_an_error() {
        let w = SymplecticWeight::new(|_| Ok(0.0));
        let h = ScalarField::new(|p| Ok(p[0]));
        assert!(matches!(ham_vector_field(&w, &h, [0.0, 0.0]), Err(Error::SymplecticDegeneracy(_))));
    }

    #[test]
    fn invariance_examples() {
        let w = SymplecticWeight::new(|p| Ok(1.0 / ((p[0] - p[1]) * (p[0] - p[1]))));
        let dil = |p: Point| Ok(TangentVector::new(p[0], p[1]));
        assert!(invariance_residual(&w, &dil, [2.0, 0.5]).unwrap() < 1e-7);
        let flat = SymplecticWeight::canonical();
        assert!((invariance_residual(&flat, &dil, [2.0, 0.5]).unwrap() - 2.0).abs() < 1e-7);
        let h = ScalarField::with_gradient(|p| Ok(p[0].sin() * p[1]), |p| Ok([p[0].cos() * p[1], p[0].sin()]));
        let xh = |p: Point| ham_vector_field(&w, &h, p);
        assert!(invariance_residual(&w, &xh, [1.0, 0.2]).unwrap() < 1e-7);
    }

    #[test]
    fn jacobi_on_curved_weight() {
        let w = SymplecticWeight::new(|p| Ok(1.0 + 0.3 * p[0] * p[0] + p[1].cos().powi(2)));
        let f = ScalarField::new(|p| Ok(p[0] * p[1]));
        let g = ScalarField::new(|p| Ok(p[0].sin()));
        let h = ScalarField::new(|p| Ok(p[1] * p[1] + p[0]));
        assert!(jacobi_residual(&w, &f, &g, &h, [0.4, -0.7]).unwrap() < 1e-6);
    }
}
