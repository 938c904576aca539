//! κ-dependent trigonometry: C_κ, S_κ, T_κ, V_κ and their inverses.
//!
//! All functions are total in κ. Below `|κ|u² < SERIES_THRESHOLD` the
//! closed forms are replaced by a four-term Taylor series in κ, so every
//! function is smooth through κ = 0.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Switch between closed form and series, in units of |κ|u².
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// |C_κ(u)| below this is treated as a pole of T_κ.
pub const POLE_TOLERANCE: f64 = 1e-13;

/// The pair (κ₁, κ₂): curvature and signature of a 2D Cayley–Klein space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSignature {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl KappaSignature {
    pub const fn new(kappa1: f64, kappa2: f64) -> Self {
        Self { kappa1, kappa2 }
    }

    /// κ₁κ₂, the parameter of the second geodesic direction.
    pub fn product(&self) -> f64 {
        self.kappa1 * self.kappa2
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa1.is_finite() && self.kappa2.is_finite() {
            Ok(())
        } else {
            Err(domain(format!("non-finite kappa signature {self:?}")))
        }
    }

    /// The nine normalized spaces, κᵢ ∈ {1, 0, −1}, rows ordered by κ₂.
    pub fn normalized() -> [KappaSignature; 9] {
        let mut out = [KappaSignature::new(0.0, 0.0); 9];
        let mut i = 0;
        for k2 in [1.0, 0.0, -1.0] {
            for k1 in [1.0, 0.0, -1.0] {
                out[i] = KappaSignature::new(k1, k2);
                i += 1;
            }
        }
        out
    }

    /// Conventional name of a normalized space.
    pub fn space_name(&self) -> Option<&'static str> {
        let s = |v: f64| {
            if v == 1.0 {
                Some(1)
            } else if v == 0.0 {
                Some(0)
            } else if v == -1.0 {
                Some(-1)
            } else {
                None
            }
        };
        Some(match (s(self.kappa1)?, s(self.kappa2)?) {
            (1, 1) => "sphere",
            (0, 1) => "euclidean",
            (-1, 1) => "hyperbolic",
            (1, 0) => "oscillating_newton_hooke",
            (0, 0) => "galilean",
            (-1, 0) => "expanding_newton_hooke",
            (1, -1) => "anti_de_sitter",
            (0, -1) => "minkowski",
            (-1, -1) => "de_sitter",
            _ => unreachable!(),
        })
    }

    pub fn label(&self) -> String {
        match self.space_name() {
            Some(n) => n.to_string(),
            None => format!("k=({},{})", self.kappa1, self.kappa2),
        }
    }
}

#[inline]
fn use_series(kappa: f64, u: f64) -> bool {
    (kappa * u * u).abs() < SERIES_THRESHOLD
}

/// κ-cosine.
pub fn ck(kappa: f64, u: f64) -> f64 {
    if use_series(kappa, u) {
        let z = kappa * u * u;
        1.0 - 0.5 * z * (1.0 - z / 12.0 * (1.0 - z / 30.0))
    } else if kappa > 0.0 {
        (kappa.sqrt() * u).cos()
    } else {
        ((-kappa).sqrt() * u).cosh()
    }
}

/// κ-sine.
pub fn sk(kappa: f64, u: f64) -> f64 {
    if use_series(kappa, u) {
        let z = kappa * u * u;
        u * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0)))
    } else if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * u).sin() / r
    } else {
        let r = (-kappa).sqrt();
        (r * u).sinh() / r
    }
}

/// κ-versed sine (1 − C_κ(u))/κ, evaluated as 2S_κ²(u/2) away from the series
/// regime so that no cancellation occurs for small κ.
pub fn vk(kappa: f64, u: f64) -> f64 {
    if use_series(kappa, u) {
        let z = kappa * u * u;
        0.5 * u * u * (1.0 - z / 12.0 * (1.0 - z / 30.0 * (1.0 - z / 56.0)))
    } else {
        let s = sk(kappa, 0.5 * u);
        2.0 * s * s
    }
}

/// κ-tangent; errors at the poles of S/C.
pub fn tk(kappa: f64, u: f64) -> Result<f64> {
    if !(kappa.is_finite() && u.is_finite()) {
        return Err(domain(format!("tk({kappa}, {u}): non-finite input")));
    }
    let c = ck(kappa, u);
    if c.abs() < POLE_TOLERANCE {
        return Err(Error::Pole { kappa, u });
    }
    Ok(sk(kappa, u) / c)
}

/// All four functions at once, with input validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTrig {
    pub c: f64,
    pub s: f64,
    pub v: f64,
    /// `None` at a pole of the tangent.
    pub t: Option<f64>,
}

impl KTrig {
    pub fn checked(kappa: f64, u: f64) -> Result<Self> {
        if !(kappa.is_finite() && u.is_finite()) {
            return Err(domain(format!("kappa-trig at ({kappa}, {u}): non-finite input")));
        }
        let c = ck(kappa, u);
        let s = sk(kappa, u);
        Ok(Self {
            c,
            s,
            v: vk(kappa, u),
            t: (c.abs() >= POLE_TOLERANCE).then(|| s / c),
        })
    }
}

/// Derivatives with respect to u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTrigDerivatives {
    pub dc: f64,
    pub ds: f64,
    pub dt: f64,
    pub dv: f64,
}

/// dC = −κS, dS = C, dT = 1/C², dV = S.
pub fn ck_derivatives(kappa: f64, u: f64) -> Result<KTrigDerivatives> {
    let k = KTrig::checked(kappa, u)?;
    if k.t.is_none() {
        return Err(Error::Pole { kappa, u });
    }
    Ok(KTrigDerivatives {
        dc: -kappa * k.s,
        ds: k.c,
        dt: 1.0 / (k.c * k.c),
        dv: k.s,
    })
}

/// (1 − C_κ(a)C_κ(b))/κ = V(a) + V(b) − κV(a)V(b), finite at κ = 0.
pub fn one_minus_cc_over_k(kappa: f64, a: f64, b: f64) -> f64 {
    let va = vk(kappa, a);
    let vb = vk(kappa, b);
    va + vb - kappa * va * vb
}

/// (C_κ(a) − C_κ(b))/κ = V(b) − V(a).
pub fn cos_diff_over_k(kappa: f64, a: f64, b: f64) -> f64 {
    vk(kappa, b) - vk(kappa, a)
}

/// Inverse of the κ-tangent on its principal branch.
pub fn atk(kappa: f64, t: f64) -> Result<f64> {
    if !(kappa.is_finite() && t.is_finite()) {
        return Err(domain(format!("atk({kappa}, {t}): non-finite input")));
    }
    let z = kappa * t * t;
    if z.abs() < SERIES_THRESHOLD {
        return Ok(t * (1.0 - z / 3.0 + z * z / 5.0 - z * z * z / 7.0));
    }
    if kappa > 0.0 {
        let r = kappa.sqrt();
        Ok((r * t).atan() / r)
    } else {
        let r = (-kappa).sqrt();
        let w = r * t;
        if w.abs() >= 1.0 {
            return Err(Error::NoRealSolution(format!(
                "kappa-tangent value {t} outside the range of T_{kappa}"
            )));
        }
        Ok(w.atanh() / r)
    }
}

/// Inverse of the κ-sine, principal branch.
pub fn ask(kappa: f64, s: f64) -> Result<f64> {
    if !(kappa.is_finite() && s.is_finite()) {
        return Err(domain(format!("ask({kappa}, {s}): non-finite input")));
    }
    let z = kappa * s * s;
    if z.abs() < SERIES_THRESHOLD {
        return Ok(s * (1.0 + z / 6.0 + 3.0 * z * z / 40.0 + 15.0 * z * z * z / 336.0));
    }
    if kappa > 0.0 {
        let r = kappa.sqrt();
        let w = r * s;
        if w.abs() > 1.0 {
            return Err(Error::NoRealSolution(format!(
                "kappa-sine value {s} outside the range of S_{kappa}"
            )));
        }
        Ok(w.asin() / r)
    } else {
        let r = (-kappa).sqrt();
        Ok((r * s).asinh() / r)
    }
}

/// The argument u with (C_κ(u), S_κ(u)) ∝ (c, s).
///
/// For κ > 0 this covers the full period (−π/√κ, π/√κ]. For κ ≤ 0 only the
/// branch with c > 0 exists; c ≤ 0 is reported as a chart error.
pub fn arg_k(kappa: f64, c: f64, s: f64) -> Result<f64> {
    if !(kappa.is_finite() && c.is_finite() && s.is_finite()) {
        return Err(domain("arg_k: non-finite input"));
    }
    if kappa > 0.0 {
        let r = kappa.sqrt();
        return Ok((r * s).atan2(c) / r);
    }
    if c <= 0.0 {
        return Err(Error::DegenerateChart(format!(
            "cosine component {c} is not positive for kappa = {kappa}"
        )));
    }
    if kappa == 0.0 {
        return Ok(s / c);
    }
    // Normalize so that c² + κs² = 1 before inverting the sine.
    let n = (c * c + kappa * s * s).sqrt();
    if !(n > 0.0) {
        return Err(Error::DegenerateChart(format!(
            "(c, s) = ({c}, {s}) is not on the unit kappa-circle"
        )));
    }
    ask(kappa, s / n)
}

/// Wraps an angle of a compact direction into (−π/√κ, π/√κ]; identity for κ ≤ 0.
pub fn wrap_angle(kappa: f64, a: f64) -> f64 {
    if kappa <= 0.0 || !a.is_finite() {
        return a;
    }
    let half = std::f64::consts::PI / kappa.sqrt();
    let period = 2.0 * half;
    let mut w = (a + half).rem_euclid(period) - half;
    if w <= -half {
        w += period;
    }
    w
}

/// Outcome of evaluating the full list of identities at one (κ, u, v).
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub max_residual: f64,
    pub residuals: Vec<(&'static str, f64)>,
    /// Identities not evaluated because an argument sits on a pole or the
    /// form divides by a vanishing quantity.
    pub skipped: Vec<&'static str>,
}

fn absdiff(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs()
}

/// Residuals of the Pythagorean, double-angle, half-angle, half-tangent,
/// addition and sum/difference identities at (κ, u, v).
///
pub fn identity_residuals(kappa: f64, u: f64, v: f64) -> Result<IdentityReport> {
    let a = KTrig::checked(kappa, u)?;
    let b = KTrig::checked(kappa, v)?;
    let k = kappa;
    let mut res: Vec<(&'static str, f64)> = Vec::with_capacity(40);
    let mut skipped = Vec::new();
    // Forms that divide by κ lose digits for tiny |κ|; below this they are
    // skipped and only their κ-safe counterparts are checked.
    const DIVIDE_BY_KAPPA_MIN: f64 = 1e-3;
    const NEAR_POLE: f64 = 1e-6;
    let t_ok = |x: f64| ck(k, x).abs() > NEAR_POLE;

    res.push(("pythagorean(u)", absdiff(a.c * a.c + k * a.s * a.s, 1.0)));
    res.push(("pythagorean(v)", absdiff(b.c * b.c + k * b.s * b.s, 1.0)));

    // double angle
    let u2 = 2.0 * u;
    res.push(("C(2u)", absdiff(ck(k, u2), a.c * a.c - k * a.s * a.s)));
    res.push(("S(2u)", absdiff(sk(k, u2), 2.0 * a.s * a.c)));
    res.push(("V(2u)=2S^2", absdiff(vk(k, u2), 2.0 * a.s * a.s)));
    res.push(("V(2u)=4V-2kV^2", absdiff(vk(k, u2), 4.0 * a.v - 2.0 * k * a.v * a.v)));
    if t_ok(u) && t_ok(u2) {
        let t = a.s / a.c;
        res.push(("T(2u)", absdiff(tk(k, u2)?, 2.0 * t / (1.0 - k * t * t))));
    } else {
        skipped.push("T(2u)");
    }

    // half angle
    let h = KTrig::checked(k, 0.5 * u)?;
    res.push(("C^2(u/2)=(1+C)/2", absdiff(h.c * h.c, 0.5 * (1.0 + a.c))));
    res.push(("C^2(u/2)=1-kV/2", absdiff(h.c * h.c, 1.0 - 0.5 * k * a.v)));
    res.push(("S^2(u/2)=V/2", absdiff(h.s * h.s, 0.5 * a.v)));
    if k.abs() >= DIVIDE_BY_KAPPA_MIN {
        res.push(("S^2(u/2)=(1-C)/(2k)", absdiff(h.s * h.s, (1.0 - a.c) / (2.0 * k))));
    } else {
        skipped.push("S^2(u/2)=(1-C)/(2k)");
    }
    if t_ok(0.5 * u) {
        let th = h.s / h.c;
        if (1.0 + a.c).abs() > NEAR_POLE {
            res.push(("T(u/2)=S/(1+C)", absdiff(th, a.s / (1.0 + a.c))));
        } else {
            skipped.push("T(u/2)=S/(1+C)");
        }
        if a.s.abs() > NEAR_POLE {
            res.push(("T(u/2)=V/S", absdiff(th, a.v / a.s)));
            if k.abs() >= DIVIDE_BY_KAPPA_MIN {
                res.push(("T(u/2)=(1-C)/(kS)", absdiff(th, (1.0 - a.c) / (k * a.s))));
            } else {
                skipped.push("T(u/2)=(1-C)/(kS)");
            }
        } else {
            skipped.push("T(u/2)=V/S");
            skipped.push("T(u/2)=(1-C)/(kS)");
        }

        // rational forms in t = T(u/2)
        let d = 1.0 + k * th * th;
        res.push(("C=(1-kt^2)/(1+kt^2)", absdiff(a.c, (1.0 - k * th * th) / d)));
        res.push(("S=2t/(1+kt^2)", absdiff(a.s, 2.0 * th / d)));
        res.push(("V=2t^2/(1+kt^2)", absdiff(a.v, 2.0 * th * th / d)));
        if t_ok(u) {
            res.push(("T=2t/(1-kt^2)", absdiff(a.s / a.c, 2.0 * th / (1.0 - k * th * th))));
        } else {
            skipped.push("T=2t/(1-kt^2)");
        }
    } else {
        for name in [
            "T(u/2)=S/(1+C)",
            "T(u/2)=V/S",
            "T(u/2)=(1-C)/(kS)",
            "C=(1-kt^2)/(1+kt^2)",
            "S=2t/(1+kt^2)",
            "V=2t^2/(1+kt^2)",
            "T=2t/(1-kt^2)",
        ] {
            skipped.push(name);
        }
    }

    // addition
    let (p, m) = (u + v, u - v);
    let (cp, cm) = (ck(k, p), ck(k, m));
    let (sp, sm) = (sk(k, p), sk(k, m));
    let (vp, vm) = (vk(k, p), vk(k, m));
    res.push(("C(u+v)", absdiff(cp, a.c * b.c - k * a.s * b.s)));
    res.push(("C(u-v)", absdiff(cm, a.c * b.c + k * a.s * b.s)));
    res.push(("S(u+v)", absdiff(sp, a.s * b.c + b.s * a.c)));
    res.push(("S(u-v)", absdiff(sm, a.s * b.c - b.s * a.c)));
    let vsum = a.v + b.v - k * a.v * b.v;
    res.push(("V(u+v)", absdiff(vp, vsum + a.s * b.s)));
    res.push(("V(u-v)", absdiff(vm, vsum - a.s * b.s)));
    if t_ok(u) && t_ok(v) {
        let (ta, tb) = (a.s / a.c, b.s / b.c);
        if t_ok(p) {
            res.push(("T(u+v)", absdiff(sp / cp, (ta + tb) / (1.0 - k * ta * tb))));
        } else {
            skipped.push("T(u+v)");
        }
        if t_ok(m) {
            res.push(("T(u-v)", absdiff(sm / cm, (ta - tb) / (1.0 + k * ta * tb))));
        } else {
            skipped.push("T(u-v)");
        }
    } else {
        skipped.push("T(u+v)");
        skipped.push("T(u-v)");
    }

    // sum and difference
    res.push(("C(u+v)+C(u-v)", absdiff(cp + cm, 2.0 * a.c * b.c)));
    res.push(("C(u+v)-C(u-v)", absdiff(cp - cm, -2.0 * k * a.s * b.s)));
    res.push(("S(u+v)+S(u-v)", absdiff(sp + sm, 2.0 * a.s * b.c)));
    res.push(("S(u+v)-S(u-v)", absdiff(sp - sm, 2.0 * a.c * b.s)));
    res.push(("V(u+v)+V(u-v)", absdiff(vp + vm, 2.0 * vsum)));
    res.push(("V(u+v)-V(u-v)", absdiff(vp - vm, 2.0 * a.s * b.s)));

    let max_residual = res.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(IdentityReport {
        max_residual,
        residuals: res,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Plain power series of cosh, summed until the terms vanish.
    fn cosh_series(x: f64) -> f64 {
        let (mut term, mut sum, mut n) = (1.0f64, 1.0f64, 0.0f64);
        while term.abs() > 1e-18 {
            n += 2.0;
            term *= x * x / (n * (n - 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn parabolic_values() {
        assert_eq!(ck(0.0, 3.7), 1.0);
        assert_eq!(sk(0.0, 2.5), 2.5);
        assert_eq!(tk(0.0, 2.5).unwrap(), 2.5);
        assert_eq!(vk(0.0, 3.0), 4.5);
    }

    #[test]
    fn circular_values() {
        assert_abs_diff_eq!(ck(1.0, PI / 2.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vk(1.0, PI), 2.0, epsilon = 1e-15);
        assert!(matches!(tk(1.0, PI / 2.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn hyperbolic_cosine_matches_series() {
        let reference = cosh_series(1.0);
        assert_abs_diff_eq!(reference, 1.5430806348152437, epsilon = 1e-14);
        assert_abs_diff_eq!(ck(-1.0, 1.0), reference, epsilon = 1e-14);
    }

    #[test]
    fn nan_is_rejected() {
        assert!(KTrig::checked(1.0, f64::NAN).is_err());
        assert!(tk(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_abs_diff_eq!(ck_derivatives(1.0, 0.0).unwrap().dc, 0.0);
        assert_abs_diff_eq!(ck_derivatives(-1.0, 0.0).unwrap().ds, 1.0);
        assert_abs_diff_eq!(ck_derivatives(0.0, 2.0).unwrap().dv, 2.0);
    }

    #[test]
    fn identity_examples() {
        for (k, u, v) in [(1.0, 0.3, 1.1), (0.0, 5.0, -2.0), (-0.37, 0.9, 0.4)] {
            let r = identity_residuals(k, u, v).unwrap();
            assert!(r.max_residual <= 1e-12, "{k} {u} {v}: {r:?}");
        }
    }

    #[test]
    fn half_angle_tangent_skips_at_zero_sine() {
        let r = identity_residuals(1.0, 0.0, 0.4).unwrap();
        assert!(r.skipped.contains(&"T(u/2)=V/S"));
    }

    #[test]
    fn series_switch_is_continuous() {
        for k in [1.0, -1.0, 0.3, -2.5] {
            // u² k just on either side of the threshold
            let u_edge = (SERIES_THRESHOLD / f64::abs(k)).sqrt();
            let below = u_edge * (1.0 - 1e-9);
            let above = u_edge * (1.0 + 1e-9);
            for f in [ck, sk, vk] {
                let lo = f(k, below);
                let hi = f(k, above);
                assert!((lo - hi).abs() <= 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn inverses() {
        for k in [1.0, 0.5, 0.0, -0.5, -1.0, 1e-12] {
            for u in [-1.2, -0.3, 0.0, 0.4, 1.1] {
                let t = tk(k, u).unwrap();
                assert_abs_diff_eq!(atk(k, t).unwrap(), u, epsilon = 1e-12);
                assert_abs_diff_eq!(ask(k, sk(k, u)).unwrap(), u, epsilon = 1e-12);
                assert_abs_diff_eq!(arg_k(k, ck(k, u), sk(k, u)).unwrap(), u, epsilon = 1e-12);
            }
        }
        // beyond a quarter turn on the circle
        assert_abs_diff_eq!(arg_k(1.0, ck(1.0, 2.8), sk(1.0, 2.8)).unwrap(), 2.8, epsilon = 1e-12);
        assert!(atk(-1.0, 1.5).is_err());
    }

    #[test]
    fn wrapping() {
        assert_abs_diff_eq!(wrap_angle(1.0, 3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(1.0, PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(1.0, -PI), PI, epsilon = 1e-12);
        assert_eq!(wrap_angle(-1.0, 10.0), 10.0);
        assert_abs_diff_eq!(wrap_angle(4.0, 2.0), 2.0 - PI, epsilon = 1e-12);
    }

    #[test]
    fn kappa_safe_combinations() {
        for k in [1.0, 0.2, 1e-9, 0.0, -0.7] {
            let (a, b) = (0.8, -0.35);
            let lhs = one_minus_cc_over_k(k, a, b);
            if k.abs() > 1e-3 {
                assert_abs_diff_eq!(lhs, (1.0 - ck(k, a) * ck(k, b)) / k, epsilon = 1e-12);
                assert_abs_diff_eq!(
                    cos_diff_over_k(k, a, b),
                    (ck(k, a) - ck(k, b)) / k,
                    epsilon = 1e-12
                );
            } else {
                assert_abs_diff_eq!(lhs, 0.5 * (a * a + b * b), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn normalized_presets() {
        let all = KappaSignature::normalized();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0].space_name(), Some("sphere"));
        assert_eq!(all[4].space_name(), Some("galilean"));
        assert_eq!(all[8].space_name(), Some("de_sitter"));
        assert_eq!(KappaSignature::new(0.5, 1.0).space_name(), None);
    }
}
