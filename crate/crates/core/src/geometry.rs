//! Ambient model, geodesic charts, metrics and isometry subgroups.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ktrig::{arg_k, ck, sk, wrap_angle, KappaSignature};

/// Tolerance for the Σ constraint on points claimed to lie on the space.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

const INVERSION_TOLERANCE: f64 = 1e-12;

/// Weierstrass coordinates (x⁰, x¹, x²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
}

impl AmbientPoint {
    pub const ORIGIN: AmbientPoint = AmbientPoint { x0: 1.0, x1: 0.0, x2: 0.0 };

    pub fn as_array(&self) -> [f64; 3] {
        [self.x0, self.x1, self.x2]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self { x0: a[0], x1: a[1], x2: a[2] }
    }

    fn distance(&self, o: &AmbientPoint) -> f64 {
        (self.x0 - o.x0)
            .abs()
            .max((self.x1 - o.x1).abs())
            .max((self.x2 - o.x2).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// (x, y)
    ParallelI,
    /// (x′, y′)
    ParallelII,
    /// (r, φ)
    Polar,
}

/// A point in one of the three geodesic charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub chart: Chart,
    pub a: f64,
    pub b: f64,
}

impl GeoPoint {
    pub const fn new(chart: Chart, a: f64, b: f64) -> Self {
        Self { chart, a, b }
    }

    pub const fn parallel_i(x: f64, y: f64) -> Self {
        Self::new(Chart::ParallelI, x, y)
    }

    /// Curvature parameters of the two coordinate directions.
    fn direction_kappas(chart: Chart, k: KappaSignature) -> (f64, f64) {
        match chart {
            Chart::ParallelI | Chart::ParallelII => (k.kappa1, k.product()),
            Chart::Polar => (k.kappa1, k.kappa2),
        }
    }

    /// The same point with compact coordinates wrapped to their principal period.
    pub fn wrapped(&self, k: KappaSignature) -> GeoPoint {
        let (ka, kb) = Self::direction_kappas(self.chart, k);
        GeoPoint::new(self.chart, wrap_angle(ka, self.a), wrap_angle(kb, self.b))
    }
}

/// x⁰² + κ₁x¹² + κ₁κ₂x²² − 1, or x⁰ − 1 on the flat affine model.
pub fn constraint_residual(k: KappaSignature, q: AmbientPoint) -> f64 {
    if k.kappa1 == 0.0 {
        return (q.x0 - 1.0).abs();
    }
    (q.x0 * q.x0 + k.kappa1 * q.x1 * q.x1 + k.product() * q.x2 * q.x2 - 1.0).abs()
}

pub fn to_ambient(k: KappaSignature, p: GeoPoint) -> Result<AmbientPoint> {
    k.validate()?;
    if !(p.a.is_finite() && p.b.is_finite()) {
        return Err(domain(format!("non-finite chart coordinates ({}, {})", p.a, p.b)));
    }
    let (k1, k2, k12) = (k.kappa1, k.kappa2, k.product());
    let q = match p.chart {
        Chart::ParallelI => {
            let (x, y) = (p.a, p.b);
            AmbientPoint { x0: ck(k1, x) * ck(k12, y), x1: sk(k1, x) * ck(k12, y), x2: sk(k12, y) }
        }
        Chart::ParallelII => {
            let (x, y) = (p.a, p.b);
            AmbientPoint { x0: ck(k1, x) * ck(k12, y), x1: sk(k1, x), x2: ck(k1, x) * sk(k12, y) }
        }
        Chart::Polar => {
            let (r, f) = (p.a, p.b);
            AmbientPoint { x0: ck(k1, r), x1: sk(k1, r) * ck(k2, f), x2: sk(k1, r) * sk(k2, f) }
        }
    };
    Ok(q)
}

fn invert_closed_form(k: KappaSignature, q: AmbientPoint, chart: Chart) -> Result<GeoPoint> {
    let (k1, k2, k12) = (k.kappa1, k.kappa2, k.product());
    match chart {
        Chart::ParallelI => {
            let c12 = (q.x0 * q.x0 + k1 * q.x1 * q.x1).max(0.0).sqrt();
            if c12 < INVERSION_TOLERANCE {
                return Err(Error::DegenerateChart(
                    "parallel-I chart is singular where C(y) vanishes".into(),
                ));
            }
            let y = arg_k(k12, c12, q.x2)?;
            let x = arg_k(k1, q.x0 / c12, q.x1 / c12)?;
            Ok(GeoPoint::new(chart, x, y))
        }
        Chart::ParallelII => {
            let c1 = (q.x0 * q.x0 + k12 * q.x2 * q.x2).max(0.0).sqrt();
            if c1 < INVERSION_TOLERANCE {
                return Err(Error::DegenerateChart(
                    "parallel-II chart is singular where C(x') vanishes".into(),
                ));
            }
            let x = arg_k(k1, c1, q.x1)?;
            let y = arg_k(k12, q.x0 / c1, q.x2 / c1)?;
            Ok(GeoPoint::new(chart, x, y))
        }
        Chart::Polar => {
            let rad = q.x1 * q.x1 + k2 * q.x2 * q.x2;
            if rad < 0.0 {
                return Err(Error::DegenerateChart(format!(
                    "point outside the polar chart (x1² + κ₂x2² = {rad:e})"
                )));
            }
            let mut s1 = rad.sqrt();
            if s1 < INVERSION_TOLERANCE {
                return Err(Error::DegenerateChart("polar angle undefined at the origin".into()));
            }
            // Without a full circle of angles the sign of r carries the side.
            if k2 <= 0.0 && q.x1 < 0.0 {
                s1 = -s1;
            }
            let r = arg_k(k1, q.x0, s1)?;
            let f = arg_k(k2, q.x1 / s1, q.x2 / s1)?;
            Ok(GeoPoint::new(chart, r, f))
        }
    }
}

/// Gauss–Newton polish of a chart inversion against the ambient target.
fn polish(k: KappaSignature, q: AmbientPoint, mut p: GeoPoint) -> Result<GeoPoint> {
    for _ in 0..20 {
        let r0 = to_ambient(k, p)?;
        let res = [q.x0 - r0.x0, q.x1 - r0.x1, q.x2 - r0.x2];
        if r0.distance(&q) < INVERSION_TOLERANCE {
            break;
        }
        let h = 1e-7 * p.a.abs().max(p.b.abs()).max(1.0);
        let mut jac = [[0.0; 2]; 3];
        for (col, (da, db)) in [(h, 0.0), (0.0, h)].into_iter().enumerate() {
            let fp = to_ambient(k, GeoPoint::new(p.chart, p.a + da, p.b + db))?.as_array();
            let fm = to_ambient(k, GeoPoint::new(p.chart, p.a - da, p.b - db))?.as_array();
            for row in 0..3 {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        // Normal equations for the 3×2 least-squares step.
        let mut n = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for row in 0..3 {
            for i in 0..2 {
                g[i] += jac[row][i] * res[row];
                for j in 0..2 {
                    n[i][j] += jac[row][i] * jac[row][j];
                }
            }
        }
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        if det.abs() < 1e-24 {
            return Err(Error::DegenerateChart("singular Jacobian during chart inversion".into()));
        }
        let da = (n[1][1] * g[0] - n[0][1] * g[1]) / det;
        let db = (n[0][0] * g[1] - n[1][0] * g[0]) / det;
        p = GeoPoint::new(p.chart, p.a + da, p.b + db);
    }
    Ok(p)
}

/// Chart coordinates of an ambient point.
pub fn from_ambient(k: KappaSignature, q: AmbientPoint, chart: Chart) -> Result<GeoPoint> {
    k.validate()?;
    let p = invert_closed_form(k, q, chart)?;
    if to_ambient(k, p)?.distance(&q) < INVERSION_TOLERANCE {
        return Ok(p);
    }
    let p = polish(k, q, p)?;
    let miss = to_ambient(k, p)?.distance(&q);
    if miss > 1e-10 {
        return Err(Error::DegenerateChart(format!(
            "chart inversion did not converge (ambient miss {miss:e})"
        )));
    }
    Ok(p)
}

pub fn convert_chart(k: KappaSignature, p: GeoPoint, target: Chart) -> Result<GeoPoint> {
    if p.chart == target {
        return Ok(p);
    }
    from_ambient(k, to_ambient(k, p)?, target)
}

/// The metric in chart components; rank one when κ₂ = 0.
pub fn metric_at(k: KappaSignature, p: GeoPoint) -> [[f64; 2]; 2] {
    let g11 = match p.chart {
        Chart::ParallelI => {
            let c = ck(k.product(), p.b);
            return [[c * c, 0.0], [0.0, k.kappa2]];
        }
        Chart::ParallelII => {
            let c = ck(k.kappa1, p.a);
            k.kappa2 * c * c
        }
        Chart::Polar => {
            let s = sk(k.kappa1, p.a);
            k.kappa2 * s * s
        }
    };
    [[1.0, 0.0], [0.0, g11]]
}

/// Pullback of the ambient form (dx⁰² + κ₁dx¹² + κ₁κ₂dx²²)/κ₁ along
/// [`to_ambient`], with a central-difference Jacobian.
pub fn pullback_metric_fd(k: KappaSignature, p: GeoPoint) -> Result<[[f64; 2]; 2]> {
    if k.kappa1 == 0.0 {
        return Err(Error::InvalidArgument(
            "the ambient pullback needs kappa1 != 0".into(),
        ));
    }
    let h = 1e-6 * p.a.abs().max(p.b.abs()).max(1.0);
    let mut jac = [[0.0; 2]; 3];
    for (col, (da, db)) in [(h, 0.0), (0.0, h)].into_iter().enumerate() {
        let fp = to_ambient(k, GeoPoint::new(p.chart, p.a + da, p.b + db))?.as_array();
        let fm = to_ambient(k, GeoPoint::new(p.chart, p.a - da, p.b - db))?.as_array();
        for row in 0..3 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    let d = [1.0, k.kappa1, k.product()];
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = (0..3).map(|r| d[r] * jac[r][i] * jac[r][j]).sum::<f64>() / k.kappa1;
        }
    }
    Ok(g)
}

/// Ambient coordinates (x⁰, x¹) of the one-dimensional space.
pub fn to_ambient_1d(kappa: f64, x: f64) -> [f64; 2] {
    [ck(kappa, x), sk(kappa, x)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    P1,
    P2,
    J12,
}

/// A 3×3 matrix acting on ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub m: [[f64; 3]; 3],
}

impl GroupElement {
    pub const IDENTITY: GroupElement =
        GroupElement { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    pub fn compose(&self, o: &GroupElement) -> GroupElement {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|l| self.m[i][l] * o.m[l][j]).sum();
            }
        }
        GroupElement { m }
    }

    pub fn apply(&self, q: AmbientPoint) -> AmbientPoint {
        let v = q.as_array();
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.m[i][j] * v[j]).sum();
        }
        AmbientPoint::from_array(out)
    }

    /// max |mᵀ𝕀m − 𝕀| with 𝕀 = diag(1, κ₁, κ₁κ₂).
    pub fn isometry_residual(&self, k: KappaSignature) -> f64 {
        let d = [1.0, k.kappa1, k.product()];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|l| self.m[l][i] * d[l] * self.m[l][j]).sum();
                let target = if i == j { d[i] } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

pub fn one_param_subgroup(k: KappaSignature, gen: Generator, param: f64) -> GroupElement {
    let (k1, k2, k12) = (k.kappa1, k.kappa2, k.product());
    let m = match gen {
        Generator::P1 => {
            let (c, s) = (ck(k1, param), sk(k1, param));
            [[c, -k1 * s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        }
        Generator::P2 => {
            let (c, s) = (ck(k12, param), sk(k12, param));
            [[c, 0.0, -k12 * s], [0.0, 1.0, 0.0], [s, 0.0, c]]
        }
        Generator::J12 => {
            let (c, s) = (ck(k2, param), sk(k2, param));
            [[1.0, 0.0, 0.0], [0.0, c, -k2 * s], [0.0, s, c]]
        }
    };
    GroupElement { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn ambient_examples() {
        let s = KappaSignature::new(1.0, 1.0);
        let o = to_ambient(s, GeoPoint::parallel_i(0.0, 0.0)).unwrap();
        assert!(close(o.as_array(), [1.0, 0.0, 0.0], 1e-15));
        let q = to_ambient(s, GeoPoint::parallel_i(PI / 2.0, 0.0)).unwrap();
        assert!(close(q.as_array(), [0.0, 1.0, 0.0], 1e-15));
        let h = KappaSignature::new(-1.0, -1.0);
        let q = to_ambient(h, GeoPoint::new(Chart::Polar, 0.0, 1.2)).unwrap();
        assert!(close(q.as_array(), [1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn the_three_charts_share_the_origin_geodesic() {
        for k in KappaSignature::normalized() {
            let p = GeoPoint::parallel_i(0.8, 0.0);
            let r = convert_chart(k, p, Chart::Polar).unwrap();
            assert!((r.a - 0.8).abs() < 1e-12 && r.b.abs() < 1e-12, "{k:?} {r:?}");
            let r2 = convert_chart(k, p, Chart::ParallelII).unwrap();
            assert!((r2.a - 0.8).abs() < 1e-12 && r2.b.abs() < 1e-12);
        }
    }

    #[test]
    fn euclidean_parallel_charts_coincide() {
        let k = KappaSignature::new(0.0, 1.0);
        let q = convert_chart(k, GeoPoint::parallel_i(1.3, -0.4), Chart::ParallelII).unwrap();
        assert!((q.a - 1.3).abs() < 1e-14 && (q.b + 0.4).abs() < 1e-14);
    }

    #[test]
    fn sphere_quarter_turn_in_polar() {
        let k = KappaSignature::new(1.0, 1.0);
        let q = convert_chart(k, GeoPoint::parallel_i(PI / 2.0, 0.0), Chart::Polar).unwrap();
        assert!((q.a - PI / 2.0).abs() < 1e-12 && q.b.abs() < 1e-12);
    }

    #[test]
    fn polar_origin_is_degenerate() {
        let k = KappaSignature::new(1.0, 1.0);
        let e = convert_chart(k, GeoPoint::parallel_i(0.0, 0.0), Chart::Polar).unwrap_err();
        assert!(matches!(e, Error::DegenerateChart(_)));
    }

    #[test]
    fn metric_examples() {
        let e = KappaSignature::new(0.0, 1.0);
        assert_eq!(metric_at(e, GeoPoint::parallel_i(3.0, -2.0)), [[1.0, 0.0], [0.0, 1.0]]);
        let ads = KappaSignature::new(1.0, -1.0);
        let g = metric_at(ads, GeoPoint::parallel_i(0.2, 0.7));
        assert!((g[0][0] - 0.7f64.cosh().powi(2)).abs() < 1e-14 && g[1][1] == -1.0);
        let nh = KappaSignature::new(-1.0, 0.0);
        assert_eq!(metric_at(nh, GeoPoint::parallel_i(0.2, 0.7)), [[1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn subgroup_examples() {
        let k = KappaSignature::new(0.0, 1.0);
        assert_eq!(one_param_subgroup(k, Generator::J12, 0.0), GroupElement::IDENTITY);
        let g = one_param_subgroup(k, Generator::P1, 2.5);
        assert_eq!(g.m, [[1.0, 0.0, 0.0], [2.5, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let r = one_param_subgroup(KappaSignature::new(1.0, 1.0), Generator::J12, 0.3);
        assert!((r.m[1][1] - 0.3f64.cos()).abs() < 1e-15 && (r.m[2][1] - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn chart_parametrizations_are_subgroup_orbits() {
        let k = KappaSignature::new(-0.6, 1.4);
        let (a, b) = (0.5, -0.3);
        let g1 = one_param_subgroup(k, Generator::P1, a).compose(&one_param_subgroup(k, Generator::P2, b));
        let q = g1.apply(AmbientPoint::ORIGIN);
        assert!(close(q.as_array(), to_ambient(k, GeoPoint::parallel_i(a, b)).unwrap().as_array(), 1e-14));
        let g2 = one_param_subgroup(k, Generator::J12, b).compose(&one_param_subgroup(k, Generator::P1, a));
        let q = g2.apply(AmbientPoint::ORIGIN);
        let polar = to_ambient(k, GeoPoint::new(Chart::Polar, a, b)).unwrap();
        assert!(close(q.as_array(), polar.as_array(), 1e-14));
    }

    #[test]
    fn wrapping_only_touches_compact_directions() {
        let s = KappaSignature::new(1.0, 1.0);
        let p = GeoPoint::parallel_i(3.0 * PI / 2.0, 0.1).wrapped(s);
        assert!((p.a + PI / 2.0).abs() < 1e-14);
        let h = KappaSignature::new(-1.0, 1.0);
        assert_eq!(GeoPoint::parallel_i(7.0, 0.1).wrapped(h).a, 7.0);
    }
}
