//! Evaluatable conformal maps.
//!
//! A [`ConformalMap`] is either a composition of closed-form primitives
//! (Moebius, Koebe, Cayley, disc-to-strip, powers, spiral warps, affine) or
//! a numerically fitted Riemann map (see [`crate::zipper`]). All maps expose
//! forward evaluation, inverse, and derivative; closed-form inverses are
//! symbolic, the fitted backend inverts its welding chain step by step.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypgeo::{spiral_coords, wrap_angle, MobiusMap};
use crate::zipper::ZipperMap;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Complex tangent, stable for large `|Im|` (saturates to +-i).
pub(crate) fn tan_stable(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if b.abs() > 20.0 {
        // tan(a+ib) -> sign(b) i, with exponentially small correction.
        let s = b.signum();
        let e = (-2.0 * b.abs()).exp();
        let corr = 2.0 * e * c64((2.0 * a).sin(), s * (2.0 * a).cos());
        return c64(0.0, s) + corr;
    }
    let den = (2.0 * a).cos() + (2.0 * b).cosh();
    c64((2.0 * a).sin() / den, (2.0 * b).sinh() / den)
}

/// Logarithm with the branch centered at angle `center`: the imaginary part
/// lies in `(center - pi, center + pi]`.
fn log_branch(z: Complex64, center: f64) -> Complex64 {
    let theta = center + wrap_angle(z.arg() - center);
    c64(z.norm().ln(), theta)
}

/// Closed-form map primitives. Compositions apply them first-to-last.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Primitive {
    /// `z -> (az+b)/(cz+d)`.
    Mobius(MobiusMap),
    /// Koebe map `z -> z/(1-z)^2`: disc onto the plane minus `(-inf,-1/4]`.
    Koebe,
    /// Cayley transform `z -> (1+z)/(1-z)`: disc onto `{Re > 0}`.
    Cayley,
    /// Disc onto the vertical strip `{0 < Re < rho}`:
    /// `z -> rho/2 + (2 rho / pi) atan(z)`.
    StripMap { rho: f64 },
    /// `z -> z^p` (real exponent) between sectors centered at
    /// `source_center` and `p * source_center`.
    Power { exponent: f64, source_center: f64 },
    /// Straight sector centered `theta0`, half-amplitude `alpha`, onto the
    /// spirallike sector `Spir[mu, 2 alpha, theta0]`; the complex power
    /// `v -> v^{1/(1 - i Im mu / Re mu)}` with branches pinned by the
    /// sector's angular interval.
    SpiralWarp {
        mu: Complex64,
        theta0: f64,
        alpha: f64,
    },
    /// `z -> a z + b`.
    Affine { a: Complex64, b: Complex64 },
}

impl Primitive {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            Primitive::Mobius(m) => m.apply(z),
            Primitive::Koebe => {
                let d = c64(1.0, 0.0) - z;
                z / (d * d)
            }
            Primitive::Cayley => (c64(1.0, 0.0) + z) / (c64(1.0, 0.0) - z),
            Primitive::StripMap { rho } => {
                c64(rho / 2.0, 0.0) + z.atan() * (2.0 * rho / std::f64::consts::PI)
            }
            Primitive::Power {
                exponent,
                source_center,
            } => (log_branch(z, *source_center) * *exponent).exp(),
            Primitive::SpiralWarp { mu, theta0, alpha } => {
                let lg = log_branch(z, *theta0);
                let theta = lg.im;
                if (theta - theta0).abs() > alpha + 1e-9 {
                    return Err(Error::OutsideDomain(
                        "point outside the sector's angular interval".into(),
                    ));
                }
                let s = mu.im / mu.re;
                let t = (lg.re - theta * s) * mu.re / mu.norm_sqr();
                (mu * t + I * theta).exp()
            }
            Primitive::Affine { a, b } => a * z + b,
        })
    }

    fn inverse(&self, w: Complex64) -> Result<Complex64> {
        Ok(match self {
            Primitive::Mobius(m) => m.inverse().apply(w),
            Primitive::Koebe => {
                if w.norm() == 0.0 {
                    return Ok(c64(0.0, 0.0));
                }
                // w z^2 - (2w+1) z + w = 0; the root inside the disc.
                let disc = (c64(4.0, 0.0) * w + 1.0).sqrt();
                (c64(2.0, 0.0) * w + 1.0 - disc) / (c64(2.0, 0.0) * w)
            }
            Primitive::Cayley => (w - 1.0) / (w + 1.0),
            Primitive::StripMap { rho } => {
                let arg = (w - rho / 2.0) * std::f64::consts::PI / (2.0 * rho);
                tan_stable(arg)
            }
            Primitive::Power {
                exponent,
                source_center,
            } => (log_branch(w, source_center * exponent) / *exponent).exp(),
            Primitive::SpiralWarp { mu, theta0, alpha } => {
                let (t, theta_abs) = spiral_coords(*mu, w)?;
                let rel = wrap_angle(theta_abs - theta0);
                if rel.abs() > alpha + 1e-9 {
                    return Err(Error::OutsideDomain(
                        "point outside the spirallike sector".into(),
                    ));
                }
                // spiral_coords returns t with w = exp(-mu t + i theta);
                // the sector's defining parameter is -t.
                let s = mu.im / mu.re;
                let lnrho = -t * mu.norm_sqr() / mu.re + (theta0 + rel) * s;
                c64(lnrho, theta0 + rel).exp()
            }
            Primitive::Affine { a, b } => (w - b) / a,
        })
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            Primitive::Mobius(m) => m.derivative(z),
            Primitive::Koebe => {
                let d = c64(1.0, 0.0) - z;
                (c64(1.0, 0.0) + z) / (d * d * d)
            }
            Primitive::Cayley => {
                let d = c64(1.0, 0.0) - z;
                c64(2.0, 0.0) / (d * d)
            }
            Primitive::StripMap { rho } => {
                c64(2.0 * rho / std::f64::consts::PI, 0.0) / (c64(1.0, 0.0) + z * z)
            }
            Primitive::Power { exponent, .. } => {
                let w = self.eval(z)?;
                w * *exponent / z
            }
            Primitive::SpiralWarp { mu, .. } => {
                let w = self.eval(z)?;
                let s = mu.im / mu.re;
                let gamma = c64(1.0, s) / (1.0 + s * s);
                w * gamma / z
            }
            Primitive::Affine { a, .. } => *a,
        })
    }
}

/// Map backend: closed-form pipeline or fitted welding chain.
#[derive(Debug, Clone)]
pub enum Backend {
    Closed(Vec<Primitive>),
    Numeric(Box<ZipperMap>),
}

/// An evaluatable univalent map with inverse and derivative.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    backend: Backend,
    label: String,
}

impl ConformalMap {
    pub fn closed(label: impl Into<String>, steps: Vec<Primitive>) -> Self {
        Self {
            backend: Backend::Closed(steps),
            label: label.into(),
        }
    }

    pub fn numeric(label: impl Into<String>, map: ZipperMap) -> Self {
        Self {
            backend: Backend::Numeric(Box::new(map)),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.backend, Backend::Closed(_))
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match &self.backend {
            Backend::Closed(steps) => {
                let mut v = z;
                for p in steps {
                    v = p.eval(v)?;
                }
                Ok(v)
            }
            Backend::Numeric(m) => m.eval(z),
        }
    }

    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        match &self.backend {
            Backend::Closed(steps) => {
                let mut v = w;
                for p in steps.iter().rev() {
                    v = p.inverse(v)?;
                }
                Ok(v)
            }
            Backend::Numeric(m) => m.inverse(w),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        match &self.backend {
            Backend::Closed(steps) => {
                let mut v = z;
                let mut d = c64(1.0, 0.0);
                for p in steps {
                    d *= p.derivative(v)?;
                    v = p.eval(v)?;
                }
                Ok(d)
            }
            Backend::Numeric(m) => m.derivative(z),
        }
    }

    /// `self` after `other` (apply `other` first).
    pub fn compose_after(&self, other: &ConformalMap) -> Result<ConformalMap> {
        match (&other.backend, &self.backend) {
            (Backend::Closed(a), Backend::Closed(b)) => {
                let mut steps = a.clone();
                steps.extend(b.iter().cloned());
                Ok(ConformalMap::closed(
                    format!("{} . {}", self.label, other.label),
                    steps,
                ))
            }
            _ => Err(Error::InvalidParam(
                "only closed-form maps compose symbolically".into(),
            )),
        }
    }
}

/// Closed-form catalog.
pub mod catalog {
    use super::*;

    /// Koebe map: disc onto the plane minus `(-inf, -1/4]`.
    pub fn koebe() -> ConformalMap {
        ConformalMap::closed("koebe", vec![Primitive::Koebe])
    }

    /// Cayley transform: disc onto the right half-plane.
    pub fn cayley() -> ConformalMap {
        ConformalMap::closed("cayley", vec![Primitive::Cayley])
    }

    /// Disc onto the vertical strip `{0 < Re < rho}`.
    pub fn strip_map(rho: f64) -> Result<ConformalMap> {
        if !(rho > 0.0) {
            return Err(Error::InvalidParam("strip width must be positive".into()));
        }
        Ok(ConformalMap::closed(
            format!("strip_map({rho})"),
            vec![Primitive::StripMap { rho }],
        ))
    }

    /// Disc onto the vertical strip `{a1 < Re < a2}`.
    pub fn strip_interval_map(a1: f64, a2: f64) -> Result<ConformalMap> {
        if !(a2 > a1) {
            return Err(Error::InvalidParam("empty strip".into()));
        }
        Ok(ConformalMap::closed(
            format!("strip_map({a1},{a2})"),
            vec![
                Primitive::StripMap { rho: a2 - a1 },
                Primitive::Affine {
                    a: c64(1.0, 0.0),
                    b: c64(a1, 0.0),
                },
            ],
        ))
    }

    /// Right half-plane onto the straight sector `{|arg| < alpha}`.
    pub fn sector_power(alpha: f64) -> Result<ConformalMap> {
        if !(alpha > 0.0 && alpha <= std::f64::consts::PI) {
            return Err(Error::InvalidParam(
                "sector half-amplitude must lie in (0, pi]".into(),
            ));
        }
        Ok(ConformalMap::closed(
            format!("sector_power({alpha})"),
            vec![Primitive::Power {
                exponent: 2.0 * alpha / std::f64::consts::PI,
                source_center: 0.0,
            }],
        ))
    }

    /// Straight sector `{|arg - theta0| < alpha}` onto
    /// `Spir[mu, 2 alpha, theta0]`.
    pub fn spiral_power(mu: Complex64, alpha: f64, theta0: f64) -> Result<ConformalMap> {
        if mu.re <= 0.0 {
            return Err(Error::InvalidParam("Re mu must be positive".into()));
        }
        Ok(ConformalMap::closed(
            format!("spiral_power({mu},{alpha},{theta0})"),
            vec![Primitive::SpiralWarp { mu, theta0, alpha }],
        ))
    }

    /// `z -> a z + b`.
    pub fn affine(a: Complex64, b: Complex64) -> Result<ConformalMap> {
        if a.norm() == 0.0 {
            return Err(Error::InvalidParam("degenerate affine map".into()));
        }
        Ok(ConformalMap::closed(
            "affine",
            vec![Primitive::Affine { a, b }],
        ))
    }

    /// Disc onto the spirallike sector `Spir[mu, 2 alpha, theta0]`.
    pub fn disc_to_spiral_sector(
        mu: Complex64,
        two_alpha: f64,
        theta0: f64,
    ) -> Result<ConformalMap> {
        let alpha = two_alpha / 2.0;
        if !(alpha > 0.0 && alpha <= std::f64::consts::PI + 1e-12) {
            return Err(Error::InvalidParam("amplitude must lie in (0, 2 pi]".into()));
        }
        let alpha = alpha.min(std::f64::consts::PI);
        Ok(ConformalMap::closed(
            format!("disc_to_spiral_sector({mu},{two_alpha},{theta0})"),
            vec![
                Primitive::Cayley,
                Primitive::Power {
                    exponent: 2.0 * alpha / std::f64::consts::PI,
                    source_center: 0.0,
                },
                Primitive::Affine {
                    a: Complex64::from_polar(1.0, theta0),
                    b: c64(0.0, 0.0),
                },
                Primitive::SpiralWarp { mu, theta0, alpha },
            ],
        ))
    }

    /// Disc onto the plane minus the vertical slit `{Re = x, Im <= top}`,
    /// normalized with anchor `x + i(top+1)` and positive derivative at 0.
    pub fn slit_plane_map(x: f64, top: f64) -> ConformalMap {
        ConformalMap::closed(
            format!("slit_plane_map({x},{top})"),
            vec![
                Primitive::Affine {
                    a: c64(0.0, -1.0),
                    b: c64(0.0, 0.0),
                },
                Primitive::Koebe,
                Primitive::Affine {
                    a: c64(0.0, 4.0),
                    b: c64(x, top + 1.0),
                },
            ],
        )
    }

    /// A catalog map by name, for the CLI `koenigs` field.
    pub fn by_name(name: &str, args: &[f64]) -> Result<ConformalMap> {
        match (name, args) {
            ("koebe", []) => Ok(koebe()),
            ("cayley", []) => Ok(cayley()),
            ("strip_map", [rho]) => strip_map(*rho),
            ("strip_map", [a1, a2]) => strip_interval_map(*a1, *a2),
            ("slit_plane_map", [x, top]) => Ok(slit_plane_map(*x, *top)),
            ("spiral_sector", [mu_re, mu_im, two_alpha, theta0]) => {
                disc_to_spiral_sector(c64(*mu_re, *mu_im), *two_alpha, *theta0)
            }
            _ => Err(Error::InvalidParam(format!(
                "unknown catalog map '{name}' with {} arguments",
                args.len()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::{dist_halfplane, dist_spirallike_sector, dist_strip_interval, omega};
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn koebe_values() {
        let k = catalog::koebe();
        assert!((k.eval(c64(0.5, 0.0)).unwrap() - c64(2.0, 0.0)).norm() < 1e-12);
        assert!((k.eval(c64(0.0, 0.0)).unwrap()).norm() < 1e-15);
        // Radial boundary value: the slit tip.
        assert!((k.eval(c64(-1.0, 0.0)).unwrap() - c64(-0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn koebe_inverse_quadratic_oracle() {
        // Oracle: direct quadratic solve of w z^2 - (2w+1) z + w = 0 for w = 2.
        let w = c64(2.0, 0.0);
        let a = w;
        let b = -(c64(2.0, 0.0) * w + 1.0);
        let cc = w;
        let disc = (b * b - c64(4.0, 0.0) * a * cc).sqrt();
        let r1 = (-b - disc) / (c64(2.0, 0.0) * a);
        let r2 = (-b + disc) / (c64(2.0, 0.0) * a);
        let oracle = if r1.norm() < 1.0 { r1 } else { r2 };
        assert!((oracle - c64(0.5, 0.0)).norm() < 1e-12);

        let k = catalog::koebe();
        assert!((k.inverse(w).unwrap() - oracle).norm() < 1e-12);
    }

    #[test]
    fn koebe_derivative_normalized() {
        let k = catalog::koebe();
        assert!((k.derivative(c64(0.0, 0.0)).unwrap() - c64(1.0, 0.0)).norm() < 1e-12);
        // h'(1/2) = (1+z)/(1-z)^3 = 12.
        assert!((k.derivative(c64(0.5, 0.0)).unwrap() - c64(12.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn strip_round_trip_example() {
        let m = catalog::strip_map(1.0).unwrap();
        let w = c64(0.5, 3.0);
        let back = m.eval(m.inverse(w).unwrap()).unwrap();
        assert!((back - w).norm() < 1e-9, "{back}");
        // Moderately deep points stay strictly inside the disc.
        let z = m.inverse(c64(0.25, -4.0)).unwrap();
        assert!(z.norm() < 1.0);
        assert!((z - c64(0.0, -1.0)).norm() < 1e-4);
        // Far beyond representable clearance the stable tangent saturates.
        let z = m.inverse(c64(0.25, -2000.0)).unwrap();
        assert!((z - c64(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn slit_plane_map_image_and_normalization() {
        let h = catalog::slit_plane_map(1.0, 0.0);
        assert!((h.eval(c64(0.0, 0.0)).unwrap() - c64(1.0, 1.0)).norm() < 1e-12);
        let d0 = h.derivative(c64(0.0, 0.0)).unwrap();
        assert!(d0.im.abs() < 1e-12 && d0.re > 0.0);
        // Image avoids the slit and covers points on both sides of it.
        let dom = crate::domains::StarlikeAtInfinityDomain::slit_plane(1.0, 0.0);
        for &z in &[
            c64(0.3, 0.4),
            c64(-0.7, 0.2),
            c64(0.0, -0.9),
            c64(0.9, 0.0),
            c64(-0.3, -0.8),
        ] {
            let w = h.eval(z).unwrap();
            assert!(dom.contains(w).unwrap(), "h({z}) = {w} not in slit plane");
            let back = h.inverse(w).unwrap();
            assert!((back - z).norm() < 1e-9);
        }
    }

    #[test]
    fn hyperbolic_isometry_strip_halfplane_sector() {
        let pts = [c64(0.2, 0.3), c64(-0.5, 0.1), c64(0.0, -0.6), c64(0.7, 0.2)];
        let strip = catalog::strip_interval_map(1.0, 3.0).unwrap();
        let cay = catalog::cayley();
        let mu = c64(1.0, 0.5);
        let sector = catalog::disc_to_spiral_sector(mu, 1.5 * PI, 0.3).unwrap();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = omega(pts[i], pts[j]).unwrap();
                let ds = dist_strip_interval(
                    1.0,
                    3.0,
                    strip.eval(pts[i]).unwrap(),
                    strip.eval(pts[j]).unwrap(),
                )
                .unwrap();
                assert!((d - ds).abs() < 1e-9, "strip {d} vs {ds}");
                let dh =
                    dist_halfplane(cay.eval(pts[i]).unwrap(), cay.eval(pts[j]).unwrap()).unwrap();
                assert!((d - dh).abs() < 1e-9, "halfplane {d} vs {dh}");
                let dsp = dist_spirallike_sector(
                    mu,
                    0.75 * PI,
                    0.3,
                    sector.eval(pts[i]).unwrap(),
                    sector.eval(pts[j]).unwrap(),
                )
                .unwrap();
                assert!((d - dsp).abs() < 1e-9, "sector {d} vs {dsp}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let maps = vec![
            catalog::koebe(),
            catalog::cayley(),
            catalog::strip_map(2.0).unwrap(),
            catalog::slit_plane_map(1.0, 0.0),
            catalog::disc_to_spiral_sector(c64(1.0, 1.0), PI, 0.0).unwrap(),
        ];
        let h = 1e-6;
        for m in &maps {
            for &z in &[c64(0.1, 0.2), c64(-0.4, 0.3), c64(0.2, -0.5)] {
                let d = m.derivative(z).unwrap();
                let fd = (m.eval(z + c64(h, 0.0)).unwrap() - m.eval(z - c64(h, 0.0)).unwrap())
                    / (2.0 * h);
                assert!(
                    (d - fd).norm() <= 1e-6 * (1.0 + d.norm()),
                    "{}: {d} vs {fd}",
                    m.label()
                );
            }
        }
    }

    proptest! {
        #[test]
        fn round_trips(zr in -0.85f64..0.85, zi in -0.85f64..0.85) {
            let z = c64(zr, zi);
            prop_assume!(z.norm() < 0.9);
            for m in [
                catalog::koebe(),
                catalog::cayley(),
                catalog::strip_map(1.0).unwrap(),
                catalog::slit_plane_map(1.0, 0.0),
                catalog::disc_to_spiral_sector(c64(2.0, -1.0), 1.2 * PI, -0.7).unwrap(),
            ] {
                let w = m.eval(z).unwrap();
                let back = m.inverse(w).unwrap();
                prop_assert!((back - z).norm() < 1e-9, "{}: {} -> {} -> {}", m.label(), z, w, back);
                let d = m.derivative(z).unwrap();
                prop_assert!(d.norm() > 0.0);
            }
        }
    }
}
