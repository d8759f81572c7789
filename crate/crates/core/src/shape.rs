//! Closed-form limit shapes, interface directions and CLT rates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Left and right densities `(λ, ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityPair<T = f64> {
    lambda: T,
    rho: T,
}

impl<T: Scalar> DensityPair<T> {
    pub fn new(lambda: T, rho: T) -> Result<Self> {
        let (zero, one) = (T::zero(), T::one());
        if !(lambda > zero && lambda <= one) {
            return Err(Error::Parameter(format!("lambda = {lambda} must lie in (0, 1]")));
        }
        if !(rho >= zero && rho < one) {
            return Err(Error::Parameter(format!("rho = {rho} must lie in [0, 1)")));
        }
        Ok(DensityPair { lambda, rho })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// `λ/(1-λ)`, infinite at `λ = 1`.
    pub fn d_lambda(&self) -> T {
        if self.lambda == T::one() {
            T::infinity()
        } else {
            self.lambda / (T::one() - self.lambda)
        }
    }

    /// `ρ/(1-ρ)`.
    pub fn d_rho(&self) -> T {
        self.rho / (T::one() - self.rho)
    }

    /// Shock direction `λρ/((1-λ)(1-ρ))`.
    pub fn w_star(&self) -> T {
        if self.rho == T::zero() {
            T::zero()
        } else {
            self.d_lambda() * self.d_rho()
        }
    }
}

fn check_point<T: Scalar>(x: T, y: T) -> Result<()> {
    if !(x >= T::zero() && y >= T::zero()) {
        return Err(Error::Domain(format!("({x}, {y}) has a negative coordinate")));
    }
    Ok(())
}

/// `μ(z) = (√x + √y)²`.
pub fn mu<T: Scalar>(x: T, y: T) -> Result<T> {
    check_point(x, y)?;
    Ok(x + y + T::of(2.0) * (x * y).sqrt())
}

// x/(1-d) + y/d with 0/0 read as 0.
fn linear<T: Scalar>(x: T, y: T, d: T) -> T {
    let a = if x == T::zero() { T::zero() } else { x / (T::one() - d) };
    let b = if y == T::zero() { T::zero() } else { y / d };
    a + b
}

/// Which branch of the shape function applies on a ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Curved,
    LeftLinear,
    RightLinear,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Curved => "curved",
            Regime::LeftLinear => "left-linear",
            Regime::RightLinear => "right-linear",
        }
    }
}

/// `p`, its two halves and the regime of a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeValue<T = f64> {
    pub p: T,
    pub regime: Regime,
    pub p1: T,
    pub p2: T,
}

/// The shape function at `z = (x, y)`.
pub fn shape_p<T: Scalar>(x: T, y: T, d: &DensityPair<T>) -> Result<ShapeValue<T>> {
    check_point(x, y)?;
    if x == T::zero() && y == T::zero() {
        return Err(Error::Domain("p is undefined at the origin".into()));
    }
    let w = if x == T::zero() { T::infinity() } else { y / x };
    let m = mu(x, y)?;
    let (dl2, dr2) = (d.d_lambda() * d.d_lambda(), d.d_rho() * d.d_rho());
    let p1 = if w <= dl2 { m } else { linear(x, y, d.lambda) };
    let p2 = if w >= dr2 { m } else { linear(x, y, d.rho) };
    let regime = if dr2 <= w && w <= dl2 {
        Regime::Curved
    } else if w >= dl2.max(d.w_star()) {
        Regime::LeftLinear
    } else {
        Regime::RightLinear
    };
    Ok(ShapeValue { p: p1.max(p2), regime, p1, p2 })
}

/// Points of `{p = 1}` on `count` equally spaced angles in `[0, π/2]`.
pub fn unit_curve<T: Scalar>(d: &DensityPair<T>, count: usize) -> Vec<(T, T, T, Regime)> {
    let quarter = T::of(std::f64::consts::FRAC_PI_2);
    (0..count)
        .map(|i| {
            let a = if count == 1 { T::zero() } else { quarter * T::of(i as f64) / T::of((count - 1) as f64) };
            let (s, c) = a.sin_cos();
            let (x, y) = (c.max(T::zero()), s.max(T::zero()));
            let v = shape_p(x, y, d).expect("unit directions are valid");
            (a, x / v.p, y / v.p, v.regime)
        })
        .collect()
}

/// Limit direction of the competition interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DirectionPrediction<T = f64> {
    /// `λ <= ρ`: `tan θ` is almost surely this constant.
    Deterministic(T),
    /// `λ > ρ`: `tan θ` is random with support in this interval.
    Interval(T, T),
}

pub fn direction_predictions<T: Scalar>(d: &DensityPair<T>) -> DirectionPrediction<T> {
    if d.lambda <= d.rho {
        DirectionPrediction::Deterministic(d.w_star())
    } else {
        let (dl, dr) = (d.d_lambda(), d.d_rho());
        DirectionPrediction::Interval(dr * dr, dl * dl)
    }
}

/// `tan θ = ((1-U)/(1+U))²`.
pub fn tan_from_u<T: Scalar>(u: T) -> Result<T> {
    if !(u > -T::one() && u < T::one()) {
        return Err(Error::Domain(format!("U = {u} must lie in (-1, 1)")));
    }
    let r = (T::one() - u) / (T::one() + u);
    Ok(r * r)
}

/// `U = (1-√tanθ)/(1+√tanθ)`.
pub fn u_from_tan<T: Scalar>(tan: T) -> Result<T> {
    if !(tan > T::zero() && tan < T::infinity()) {
        return Err(Error::Domain(format!("tan θ = {tan} must lie in (0, ∞)")));
    }
    let s = tan.sqrt();
    Ok((T::one() - s) / (T::one() + s))
}

/// The point `(I, J) = ((1+U)²/4, (1-U)²/4)` on `√I + √J = 1`.
pub fn ij_from_u<T: Scalar>(u: T) -> Result<(T, T)> {
    tan_from_u(u)?;
    let four = T::of(4.0);
    let (a, b) = (T::one() + u, T::one() - u);
    Ok((a * a / four, b * b / four))
}

/// Rates of the Gaussian limit of `ψ(t)` in the shock phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CltMoments {
    pub mean_i: f64,
    pub mean_j: f64,
    pub var_i: f64,
    pub var_j: f64,
    pub cov: f64,
    /// Set when `ρ - λ < 1e-6`: the rates blow up as `λ → ρ`.
    pub divergent: bool,
}

pub fn clt_moments(d: &DensityPair<f64>) -> Result<CltMoments> {
    let (l, r) = (d.lambda, d.rho);
    if l >= r {
        return Err(Error::Domain(format!("CLT rates need lambda < rho, got {l} >= {r}")));
    }
    let gap = r - l;
    let mix = r * (1.0 - l) + l * (1.0 - r);
    Ok(CltMoments {
        mean_i: (1.0 - r) * (1.0 - l),
        mean_j: r * l,
        var_i: (1.0 - r) * (1.0 - l) * mix / gap,
        var_j: l * r * mix / gap,
        cov: -2.0 * l * (1.0 - l) * r * (1.0 - r) / gap,
        divergent: gap < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(l: f64, r: f64) -> DensityPair {
        DensityPair::new(l, r).unwrap()
    }

    #[test]
    fn rost_values() {
        assert_eq!(mu(7.0, 7.0).unwrap(), 28.0);
        assert_eq!(mu(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(mu(4.0, 1.0).unwrap(), 9.0);
        assert!(mu(-1.0, 1.0).is_err());
    }

    #[test]
    fn shape_branches() {
        let d = pair(0.5, 0.2);
        let v = shape_p(1.0, 1.0, &d).unwrap();
        assert_eq!((v.p, v.regime), (4.0, Regime::Curved));
        let v = shape_p(1.0, 0.01, &d).unwrap();
        assert!((v.p - 1.30).abs() < 1e-12);
        assert_eq!(v.regime, Regime::RightLinear);
        assert!(shape_p(0.0, 0.0, &d).is_err());
        let v = shape_p(0.0, 1.0, &d).unwrap();
        assert_eq!((v.p, v.regime), (2.0, Regime::LeftLinear));
    }

    #[test]
    fn equal_densities_meet_on_one_ray() {
        let d = pair(0.3, 0.3);
        let w = d.d_rho() * d.d_rho();
        let v = shape_p(1.0, w, &d).unwrap();
        assert!((linear(1.0, w, 0.3) - mu(1.0, w).unwrap()).abs() < 1e-12);
        assert!((v.p1 - v.p2).abs() < 1e-12);
    }

    #[test]
    fn pure_quadrant_is_curved_everywhere() {
        let d = pair(1.0, 0.0);
        for (x, y) in [(1.0, 0.0), (0.0, 1.0), (0.3, 2.0)] {
            let v = shape_p(x, y, &d).unwrap();
            assert_eq!(v.regime, Regime::Curved);
            assert_eq!(v.p, mu(x, y).unwrap());
        }
    }

    #[test]
    fn directions() {
        match direction_predictions(&pair(0.3, 0.6)) {
            DirectionPrediction::Deterministic(t) => assert!((t - 9.0 / 14.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        match direction_predictions(&pair(0.8, 0.2)) {
            DirectionPrediction::Interval(a, b) => {
                assert!((a - 1.0 / 16.0).abs() < 1e-12 && (b - 16.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let d = pair(0.4, 0.4);
        assert!((d.w_star() - d.d_rho() * d.d_rho()).abs() < 1e-15);
    }

    #[test]
    fn u_maps() {
        assert_eq!(tan_from_u(0.0).unwrap(), 1.0);
        assert_eq!(ij_from_u(0.0).unwrap(), (0.25, 0.25));
        let rho: f64 = 0.3;
        let t = tan_from_u(1.0 - 2.0 * rho).unwrap();
        assert!((t - (rho / (1.0 - rho)).powi(2)).abs() < 1e-12);
        assert!(tan_from_u(1.0).is_err() && tan_from_u(-1.0).is_err());
        assert!(u_from_tan(0.0).is_err());
    }

    #[test]
    fn clt_rates() {
        let m = clt_moments(&pair(0.2, 0.6)).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(m.mean_i, 0.32) && close(m.mean_j, 0.12));
        assert!(close(m.var_i, 0.448) && close(m.var_j, 0.168) && close(m.cov, -0.192));
        assert!(!m.divergent);
        assert!(clt_moments(&pair(0.6, 0.2)).is_err());
        assert!(clt_moments(&pair(0.5, 0.5 + 1e-7)).unwrap().divergent);
    }

    #[test]
    fn f32_shape() {
        let d = DensityPair::<f32>::new(0.5, 0.2).unwrap();
        assert_eq!(shape_p(1.0f32, 1.0, &d).unwrap().p, 4.0);
    }
}
