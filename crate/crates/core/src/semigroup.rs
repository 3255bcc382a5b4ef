//! Semigroup engine: canonical models, orbit evolution, backward-invariant
//! sets, petals, and pre-models.
//!
//! A [`SemigroupModel`] packages the semigroup type, the Koenigs image
//! (a comb or spirallike domain), and an evaluatable Koenigs map `h`. The
//! semigroup itself is `phi_t = h^{-1} . psi_t . h` where `psi_t` is the
//! model action `w + it` (non-elliptic) or `e^{-mu t} w` (elliptic).

use num_complex::Complex64;

use crate::confmap::{catalog, ConformalMap};
use crate::domains::{
    petal_shape_type, HalfPlaneGeometry, HalfPlaneSide, LineStatus, ModelDomain, PetalGeometry,
    SpiralStatus, SpirallikeSlitDomain, StarlikeAtInfinityDomain,
};
use crate::error::{Error, Result};
use crate::hypgeo::{
    omega, omega_from_deviations, spiral_coords, wrap_angle, MobiusMap, StolzRegion,
};
use crate::par;
use crate::zipper;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Semigroup type tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Interior Denjoy-Wolff point, spectral value `mu` (`Re mu > 0`);
    /// model action `w -> e^{-mu t} w`.
    Elliptic { mu: Complex64 },
    /// Boundary Denjoy-Wolff point with dilation `lambda > 0`; the Koenigs
    /// image spans a width `pi/lambda` strip; action `w -> w + it`.
    Hyperbolic { lambda: f64 },
    /// Parabolic of positive hyperbolic step: image inside a half-plane.
    ParabolicPositive { side: HalfPlaneSide },
    /// Parabolic of zero hyperbolic step: image unbounded both ways.
    ParabolicZero,
}

impl ModelKind {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, ModelKind::Elliptic { .. })
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(
            self,
            ModelKind::ParabolicPositive { .. } | ModelKind::ParabolicZero
        )
    }
}

/// Canonical model of a semigroup: kind, Koenigs image, Koenigs map, and the
/// Denjoy-Wolff point.
#[derive(Debug, Clone)]
pub struct SemigroupModel {
    pub kind: ModelKind,
    pub domain: ModelDomain,
    pub koenigs: ConformalMap,
    pub tau: Complex64,
}

/// Infers the semigroup kind from the Koenigs image geometry.
pub fn infer_kind(domain: &ModelDomain) -> ModelKind {
    match domain {
        ModelDomain::Spirallike(d) => ModelKind::Elliptic { mu: d.mu },
        ModelDomain::Starlike(d) => {
            if let Some((lo, hi)) = d.bounding_strip() {
                return ModelKind::Hyperbolic {
                    lambda: std::f64::consts::PI / (hi - lo),
                };
            }
            let pieces = d.profile().pieces();
            let first_blocked = matches!(
                pieces.first(),
                Some(crate::domains::ProfilePiece::Blocked { .. })
            );
            let last_blocked = matches!(
                pieces.last(),
                Some(crate::domains::ProfilePiece::Blocked { .. })
            );
            match (first_blocked, last_blocked) {
                (true, true) => {
                    // Bounded strip without the explicit tag.
                    ModelKind::Hyperbolic { lambda: 1.0 }
                }
                (true, false) => ModelKind::ParabolicPositive {
                    side: HalfPlaneSide::Right,
                },
                (false, true) => ModelKind::ParabolicPositive {
                    side: HalfPlaneSide::Left,
                },
                (false, false) => ModelKind::ParabolicZero,
            }
        }
    }
}

impl SemigroupModel {
    /// Builds and sample-checks a model.
    pub fn new(
        kind: ModelKind,
        domain: ModelDomain,
        koenigs: ConformalMap,
        tau: Complex64,
    ) -> Result<Self> {
        match (&kind, &domain) {
            (ModelKind::Elliptic { .. }, ModelDomain::Spirallike(_)) => {}
            (ModelKind::Elliptic { .. }, _) => {
                return Err(Error::Construction(
                    "elliptic models need a spirallike image".into(),
                ))
            }
            (_, ModelDomain::Starlike(_)) => {}
            _ => {
                return Err(Error::Construction(
                    "non-elliptic models need a starlike-at-infinity image".into(),
                ))
            }
        }
        let model = Self {
            kind,
            domain,
            koenigs,
            tau,
        };
        model.check_forward_invariance(24)?;
        Ok(model)
    }

    fn check_forward_invariance(&self, samples: usize) -> Result<()> {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut done = 0;
        let mut tries = 0;
        while done < samples && tries < samples * 200 {
            tries += 1;
            let z = Complex64::from_polar(0.9 * rnd(), 2.0 * std::f64::consts::PI * rnd());
            let w = match self.koenigs.eval(z) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if !matches!(self.domain.contains(w), Ok(true)) {
                continue;
            }
            let t = 5.0 * rnd();
            if !matches!(self.domain.contains(self.psi(w, t)), Ok(true)) {
                return Err(Error::Construction(format!(
                    "model action leaves the Koenigs image at w = {w}, t = {t}"
                )));
            }
            done += 1;
        }
        Ok(())
    }

    /// Model action upstairs.
    pub fn psi(&self, w: Complex64, t: f64) -> Complex64 {
        match self.kind {
            ModelKind::Elliptic { mu } => (-mu * t).exp() * w,
            _ => w + I * t,
        }
    }

    /// The Koebe model: elliptic with `mu = 1`, Koenigs image the plane
    /// minus `(-inf, -1/4]`.
    pub fn koebe() -> Self {
        Self {
            kind: ModelKind::Elliptic { mu: c64(1.0, 0.0) },
            domain: ModelDomain::Spirallike(SpirallikeSlitDomain::koebe_image()),
            koenigs: catalog::koebe(),
            tau: c64(0.0, 0.0),
        }
    }

    /// Hyperbolic group with dilation `lambda`: Koenigs image the full
    /// width-`pi/lambda` strip. Used as a closed-form rate fixture.
    pub fn strip_group(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam("lambda must be positive".into()));
        }
        let rho = std::f64::consts::PI / lambda;
        Ok(Self {
            kind: ModelKind::Hyperbolic { lambda },
            domain: ModelDomain::Starlike(StarlikeAtInfinityDomain::strip(0.0, rho)),
            koenigs: catalog::strip_map(rho)?,
            tau: c64(0.0, 1.0),
        })
    }

    /// Elliptic group restricted to the spirallike sector
    /// `Spir[mu, 2 alpha, theta0]`.
    pub fn sector_group(mu: Complex64, two_alpha: f64, theta0: f64) -> Result<Self> {
        let sector = crate::domains::SpirallikeSector::new(mu, two_alpha, theta0)?;
        Ok(Self {
            kind: ModelKind::Elliptic { mu },
            domain: ModelDomain::Spirallike(SpirallikeSlitDomain::new(
                mu,
                vec![],
                Some(sector),
            )?),
            koenigs: catalog::disc_to_spiral_sector(mu, two_alpha, theta0)?,
            tau: c64(0.0, 0.0),
        })
    }

    /// Parabolic (zero hyperbolic step) model on the plane minus one
    /// vertical slit, with a closed-form Koenigs map.
    pub fn slit_plane_model(x: f64, top: f64) -> Self {
        Self {
            kind: ModelKind::ParabolicZero,
            domain: ModelDomain::Starlike(StarlikeAtInfinityDomain::slit_plane(x, top)),
            koenigs: catalog::slit_plane_map(x, top),
            tau: c64(0.0, 1.0),
        }
    }

    /// Model over a comb domain with a numerically fitted Koenigs map.
    pub fn comb_model(
        domain: StarlikeAtInfinityDomain,
        anchor: Complex64,
        resolution: usize,
    ) -> Result<Self> {
        let koenigs = zipper::fit_numeric_map(&domain, anchor, resolution)?;
        let kind = infer_kind(&ModelDomain::Starlike(domain.clone()));
        // The Denjoy-Wolff point is the landing point of the upward ray.
        let mut tau = c64(0.0, 1.0);
        for t in [5.0, 20.0, 80.0] {
            if let Ok(z) = koenigs.inverse(anchor + I * t) {
                if z.norm() > 0.0 {
                    tau = z / z.norm();
                }
            }
        }
        Ok(Self {
            kind,
            domain: ModelDomain::Starlike(domain),
            koenigs,
            tau,
        })
    }

    /// Forward evolution `phi_t(z) = h^{-1}(psi_t(h(z)))`, `t >= 0`.
    pub fn evolve(&self, z: Complex64, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Err(Error::InvalidParam(
                "evolve needs t >= 0; use evolve_signed inside a petal".into(),
            ));
        }
        self.evolve_signed(z, t)
    }

    /// Evolution for any real `t`; for `t < 0` the result is only meaningful
    /// while the backward orbit stays inside the Koenigs image (checked).
    pub fn evolve_signed(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let w = self.koenigs.eval(z)?;
        let wt = self.psi(w, t);
        if t < 0.0 && !matches!(self.domain.contains(wt), Ok(true)) {
            return Err(Error::OutsideDomain(format!(
                "backward evolution exits the Koenigs image at t = {t}"
            )));
        }
        self.koenigs.inverse(wt)
    }

    /// Infinitesimal generator: `i/h'(z)` (non-elliptic) or
    /// `-mu h(z)/h'(z)` (elliptic), from differentiating the model relation
    /// at `t = 0`.
    pub fn generator_eval(&self, z: Complex64) -> Result<Complex64> {
        let d = self.koenigs.derivative(z)?;
        if d.norm() < 1e-300 {
            return Err(Error::Numeric("Koenigs derivative underflow".into()));
        }
        match self.kind {
            ModelKind::Elliptic { mu } => {
                let h = self.koenigs.eval(z)?;
                Ok(-mu * h / d)
            }
            _ => Ok(I / d),
        }
    }
}

/// Orbit sample: time, disc point, model coordinate, and (when available)
/// the stable boundary deviation `1 - conj(sigma) z`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitSample {
    pub t: f64,
    pub z: Complex64,
    pub w: Option<Complex64>,
    pub dev: Option<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitDirection {
    Forward,
    Backward,
}

/// Sampled trajectory.
#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub direction: OrbitDirection,
    pub samples: Vec<OrbitSample>,
    /// Set when the integrator halted at the boundary tolerance.
    pub landed: bool,
    /// Landing-direction hint used for stable deviations.
    pub sigma_hint: Option<Complex64>,
}

impl OrbitTrace {
    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.t - a.t).abs(),
            _ => 0.0,
        }
    }
}

/// Integration configuration.
#[derive(Debug, Clone, Copy)]
pub struct OrbitConfig {
    pub tol: f64,
    /// Halt when `1 - |z|` drops below this.
    pub boundary_tol: f64,
    pub max_steps: usize,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            boundary_tol: 1e-8,
            max_steps: 200_000,
        }
    }
}

/// Adaptive Dormand-Prince 5(4) integration of `dz/dt = (+-) G(z)`.
///
/// Backward integration is refused unless the start lies in the interior of
/// the backward invariant set (finite exit times make the flow leave the
/// disc in finite time).
pub fn integrate_orbit(
    model: &SemigroupModel,
    z0: Complex64,
    t0: f64,
    t1: f64,
    cfg: OrbitConfig,
) -> Result<OrbitTrace> {
    crate::hypgeo::require_disc_point(z0)?;
    let backward = t1 < t0;
    if backward {
        match backward_invariant_membership(model, z0)? {
            WSetVerdict::Interior => {}
            v => {
                return Err(Error::OutsideDomain(format!(
                    "backward integration refused: start point is {v:?} of the backward set"
                )))
            }
        }
    }
    let sign = if backward { -1.0 } else { 1.0 };
    let span = (t1 - t0).abs();
    let mut samples = vec![OrbitSample {
        t: t0,
        z: z0,
        w: model.koenigs.eval(z0).ok(),
        dev: None,
    }];
    if span == 0.0 {
        return Ok(OrbitTrace {
            direction: if backward {
                OrbitDirection::Backward
            } else {
                OrbitDirection::Forward
            },
            samples,
            landed: false,
            sigma_hint: None,
        });
    }

    // Dormand-Prince coefficients.
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let f = |z: Complex64| -> Result<Complex64> { Ok(model.generator_eval(z)? * sign) };
    let mut t = 0.0_f64;
    let mut z = z0;
    let mut h = (span / 100.0).min(0.1).max(1e-6);
    let mut landed = false;
    let mut steps = 0;
    while t < span {
        if steps > cfg.max_steps {
            return Err(Error::Numeric(format!(
                "orbit integration exceeded {} steps (partial trace to t = {t})",
                cfg.max_steps
            )));
        }
        steps += 1;
        h = h.min(span - t);
        let mut k = [c64(0.0, 0.0); 7];
        k[0] = f(z)?;
        let mut failed = false;
        for i in 0..6 {
            let mut zi = z;
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                zi += *kj * (A[i][j] * h);
            }
            if zi.norm() >= 1.0 {
                failed = true;
                break;
            }
            k[i + 1] = f(zi)?;
        }
        if failed {
            h *= 0.5;
            if h < 1e-14 {
                landed = true;
                break;
            }
            continue;
        }
        let mut z5 = z;
        let mut z4 = z;
        for (j, kj) in k.iter().enumerate() {
            z5 += *kj * (B5[j] * h);
            z4 += *kj * (B4[j] * h);
        }
        let err = (z5 - z4).norm();
        let tolerance = cfg.tol * (1.0 + z.norm());
        if err > tolerance {
            h *= 0.9 * (tolerance / err).powf(0.2).clamp(0.1, 1.0);
            if h < 1e-14 {
                return Err(Error::Numeric(format!(
                    "step size collapse at t = {t} (partial trace kept)"
                )));
            }
            continue;
        }
        t += h;
        z = z5;
        samples.push(OrbitSample {
            t: t0 + sign * t,
            z,
            w: model.koenigs.eval(z).ok(),
            dev: None,
        });
        if 1.0 - z.norm() < cfg.boundary_tol {
            landed = true;
            break;
        }
        if err > 0.0 {
            h *= 0.9 * (tolerance / err).powf(0.2).clamp(0.5, 5.0);
        } else {
            h *= 2.0;
        }
    }
    Ok(OrbitTrace {
        direction: if backward {
            OrbitDirection::Backward
        } else {
            OrbitDirection::Forward
        },
        samples,
        landed,
        sigma_hint: None,
    })
}

/// Handle to the maximal invariant curve through a point.
#[derive(Debug, Clone)]
pub struct MaximalInvariantCurveHandle {
    /// Lower parameter bound (`None` encodes `-infinity`).
    pub a: Option<f64>,
    /// Starting-point estimate on the unit circle.
    pub start_point: Option<Complex64>,
    /// Model coordinate of the curve at parameter 0.
    pub w0: Complex64,
}

/// Computes the maximal invariant curve through `z0`: the exit parameter
/// `a = inf { t < 0 : psi_t(h(z0))` stays in the image `}`, found by a
/// bracketed scan plus bisection on model-coordinate membership, with an
/// exact geometric certificate (unobstructed line/spiral) for `a = -inf`.
pub fn maximal_invariant_curve(
    model: &SemigroupModel,
    z0: Complex64,
) -> Result<MaximalInvariantCurveHandle> {
    if (z0 - model.tau).norm() < 1e-14 {
        return Err(Error::InvalidParam(
            "the Denjoy-Wolff point has no maximal invariant curve".into(),
        ));
    }
    let w0 = model.koenigs.eval(z0)?;
    let a = backward_exit_time(model, w0)?;
    let start_point = match a {
        Some(a) => {
            let probe = model.psi(w0, a + 1e-9 * (1.0 + a.abs()));
            model
                .koenigs
                .inverse(probe)
                .ok()
                .map(|z| if z.norm() > 0.0 { z / z.norm() } else { z })
        }
        None => {
            let mut p = None;
            for t in [-10.0, -25.0, -60.0] {
                let wt = model.psi(w0, t);
                if let Ok(z) = model.koenigs.inverse(wt) {
                    if z.norm() > 0.2 {
                        p = Some(z / z.norm());
                    }
                }
            }
            p
        }
    };
    Ok(MaximalInvariantCurveHandle { a, start_point, w0 })
}

/// Exit parameter of the backward ray/spiral below `w0`, or `None` with a
/// geometric certificate that it never exits.
fn backward_exit_time(model: &SemigroupModel, w0: Complex64) -> Result<Option<f64>> {
    match (&model.kind, &model.domain) {
        (ModelKind::Elliptic { mu }, ModelDomain::Spirallike(d)) => {
            let (_, theta) = spiral_coords(*mu, w0)?;
            match d.spiral_status(theta) {
                SpiralStatus::FullSpiral => Ok(None),
                SpiralStatus::Truncated(cut) => {
                    if w0.norm() >= cut {
                        Err(Error::OutsideDomain(
                            "point sits on an obstructed spiral".into(),
                        ))
                    } else {
                        // |e^{-mu t} w0| = cut at t = ln(|w0|/cut)/Re mu < 0.
                        Ok(Some((w0.norm() / cut).ln() / mu.re))
                    }
                }
                SpiralStatus::Disjoint => Err(Error::OutsideDomain(
                    "point's spiral misses the image".into(),
                )),
            }
        }
        (_, ModelDomain::Starlike(d)) => match d.vertical_line_status(w0.re) {
            LineStatus::FullLine => Ok(None),
            LineStatus::HalfLine(_) => {
                // Bracketed scan + bisection on membership of w0 + i t.
                let inside = |t: f64| matches!(d.contains(w0 + I * t), Ok(true));
                if !inside(0.0) {
                    return Err(Error::OutsideDomain("start point not in the image".into()));
                }
                let mut step = 1.0;
                let mut lo = 0.0; // still inside at -lo
                let horizon = 1e12;
                let hi = loop {
                    let t = lo + step;
                    if !inside(-t) {
                        break t;
                    }
                    lo = t;
                    step *= 2.0;
                    if lo > horizon {
                        return Err(Error::Indeterminate(
                            "no exit found below the scan horizon and no certificate".into(),
                        ));
                    }
                };
                let (mut lo, mut hi) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if inside(-mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-12 * (1.0 + hi) {
                        break;
                    }
                }
                Ok(Some(-0.5 * (lo + hi)))
            }
            LineStatus::Disjoint => Err(Error::OutsideDomain(
                "point's vertical line misses the image".into(),
            )),
        },
        _ => Err(Error::Construction("inconsistent model".into())),
    }
}

/// Verdict of the backward-invariant-set membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WSetVerdict {
    Interior,
    Boundary,
    Outside,
}

/// Classifies `z` against the backward invariant set: interior iff the
/// model coordinate lies in a detected petal; boundary iff it sits (within
/// tolerance) on a petal-boundary line/spiral or on a full column outside
/// every petal; outside iff the exit time is finite.
pub fn backward_invariant_membership(
    model: &SemigroupModel,
    z: Complex64,
) -> Result<WSetVerdict> {
    let w = model.koenigs.eval(z)?;
    let tol = 1e-9;
    let petals = find_petals_geometry(model);
    for p in &petals {
        if petal_contains_upstairs(model, &p.geometry, w)? {
            return Ok(WSetVerdict::Interior);
        }
    }
    for p in &petals {
        if near_petal_boundary(model, &p.geometry, w, tol) {
            return Ok(WSetVerdict::Boundary);
        }
    }
    match backward_exit_time(model, w)? {
        None => Ok(WSetVerdict::Boundary),
        Some(_) => Ok(WSetVerdict::Outside),
    }
}

fn petal_contains_upstairs(
    model: &SemigroupModel,
    g: &PetalGeometry,
    w: Complex64,
) -> Result<bool> {
    Ok(match g {
        PetalGeometry::Strip { a1, a2 } => w.re > *a1 && w.re < *a2,
        PetalGeometry::HalfPlane(h) => match h.side {
            HalfPlaneSide::Right => w.re > h.a,
            HalfPlaneSide::Left => w.re < h.a,
        },
        PetalGeometry::Sector(s) => {
            let _ = model;
            s.contains(w)
        }
    })
}

fn near_petal_boundary(
    model: &SemigroupModel,
    g: &PetalGeometry,
    w: Complex64,
    tol: f64,
) -> bool {
    match g {
        PetalGeometry::Strip { a1, a2 } => {
            let d = match &model.domain {
                ModelDomain::Starlike(dom) => dom,
                _ => return false,
            };
            for a in [*a1, *a2] {
                if (w.re - a).abs() < tol {
                    match d.vertical_line_status(a) {
                        LineStatus::FullLine => return true,
                        LineStatus::HalfLine(r) => {
                            if w.im > r - tol {
                                return true;
                            }
                        }
                        LineStatus::Disjoint => {}
                    }
                }
            }
            false
        }
        PetalGeometry::HalfPlane(h) => {
            let d = match &model.domain {
                ModelDomain::Starlike(dom) => dom,
                _ => return false,
            };
            (w.re - h.a).abs() < tol
                && match d.vertical_line_status(h.a) {
                    LineStatus::FullLine => true,
                    LineStatus::HalfLine(r) => w.im > r - tol,
                    LineStatus::Disjoint => false,
                }
        }
        PetalGeometry::Sector(s) => {
            let d = match &model.domain {
                ModelDomain::Spirallike(dom) => dom,
                _ => return false,
            };
            if w.norm() == 0.0 {
                return false;
            }
            let (_, theta) = match spiral_coords(s.mu, w) {
                Ok(v) => v,
                Err(_) => return false,
            };
            for edge in [s.theta0 - s.alpha, s.theta0 + s.alpha] {
                if wrap_angle(theta - edge).abs() * w.norm().max(1.0) < tol {
                    match d.spiral_status(edge) {
                        SpiralStatus::FullSpiral => return true,
                        SpiralStatus::Truncated(cut) => {
                            if w.norm() < cut + tol {
                                return true;
                            }
                        }
                        SpiralStatus::Disjoint => {}
                    }
                }
            }
            false
        }
    }
}

/// Petal kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PetalKind {
    Hyperbolic,
    Parabolic,
}

/// A petal: kind, upstairs geometry, repelling data, and boundary shape.
#[derive(Debug, Clone)]
pub struct Petal {
    pub kind: PetalKind,
    pub geometry: PetalGeometry,
    /// Repelling spectral value (hyperbolic petals only, always negative).
    pub lambda_rep: Option<f64>,
    /// Boundary shape class 1..5.
    pub shape_type: u8,
    /// Estimated repelling fixed point on the unit circle.
    pub sigma: Option<Complex64>,
}

/// Geometric petal detection (no Koenigs evaluation): maximal strips and
/// half-planes of comb images, maximal sectors of spirallike images, with
/// the spectral values `-pi/rho` and `-|mu|^2 pi / (beta Re mu)`.
pub fn find_petals_geometry(model: &SemigroupModel) -> Vec<Petal> {
    let mut petals = Vec::new();
    match &model.domain {
        ModelDomain::Starlike(d) => {
            for (a1, a2) in d.maximal_strips() {
                let lambda = -std::f64::consts::PI / (a2 - a1);
                let geometry = PetalGeometry::Strip { a1, a2 };
                let shape = petal_shape_type(&model.domain, &geometry).unwrap_or(0);
                petals.push(Petal {
                    kind: PetalKind::Hyperbolic,
                    geometry,
                    lambda_rep: Some(lambda),
                    shape_type: shape,
                    sigma: None,
                });
            }
            for h in d.maximal_half_planes() {
                let geometry = PetalGeometry::HalfPlane(h);
                // Only parabolic semigroups carry parabolic petals.
                if !model.kind.is_parabolic() {
                    continue;
                }
                let shape = petal_shape_type(&model.domain, &geometry).unwrap_or(0);
                petals.push(Petal {
                    kind: PetalKind::Parabolic,
                    geometry,
                    lambda_rep: None,
                    shape_type: shape,
                    sigma: None,
                });
            }
        }
        ModelDomain::Spirallike(d) => {
            for s in d.maximal_spirallike_sectors() {
                let beta = s.amplitude();
                let lambda = -d.mu.norm_sqr() * std::f64::consts::PI / (beta * d.mu.re);
                let geometry = PetalGeometry::Sector(s);
                let shape = petal_shape_type(&model.domain, &geometry).unwrap_or(0);
                petals.push(Petal {
                    kind: PetalKind::Hyperbolic,
                    geometry,
                    lambda_rep: Some(lambda),
                    shape_type: shape,
                    sigma: None,
                });
            }
        }
    }
    petals
}

/// Petal detection with repelling-point estimates: the geometric petals,
/// each annotated with `sigma` obtained by tracking `h^{-1}` along the
/// petal's central backward ray (edges may land at non-fixed points, the
/// central geodesic cannot).
pub fn find_petals(model: &SemigroupModel) -> Vec<Petal> {
    let mut petals = find_petals_geometry(model);
    for p in &mut petals {
        p.sigma = estimate_sigma(model, &p.geometry);
    }
    petals
}

fn estimate_sigma(model: &SemigroupModel, g: &PetalGeometry) -> Option<Complex64> {
    let deep = if model.koenigs.is_closed_form() {
        [4.0, 10.0, 24.0]
    } else {
        [2.0, 4.0, 7.0]
    };
    let mut sigma = None;
    match g {
        PetalGeometry::Strip { a1, a2 } => {
            let c = 0.5 * (a1 + a2);
            for s in deep {
                if let Ok(z) = model.koenigs.inverse(c64(c, -s)) {
                    if z.norm() > 0.3 {
                        sigma = Some(z / z.norm());
                    }
                }
            }
        }
        PetalGeometry::HalfPlane(_) => return None,
        PetalGeometry::Sector(s) => {
            let mu = s.mu;
            for t in deep {
                // Backward along the central spiral: w = exp(mu t + i theta0).
                let w = (mu * t + I * s.theta0).exp();
                if let Ok(z) = model.koenigs.inverse(w) {
                    if z.norm() > 0.3 {
                        sigma = Some(z / z.norm());
                    }
                }
            }
        }
    }
    sigma
}

/// Backward orbit through a petal, sampled at `n` equally spaced times on
/// `[0, span]`, carried in model coordinates with stable boundary deviations
/// where the Koenigs map supports them.
pub fn backward_orbit_trace(
    model: &SemigroupModel,
    z0: Complex64,
    span: f64,
    n: usize,
) -> Result<OrbitTrace> {
    let w0 = model.koenigs.eval(z0)?;
    if backward_exit_time(model, w0)?.is_some() {
        return Err(Error::OutsideDomain(
            "backward orbit not defined for all negative times (finite exit)".into(),
        ));
    }
    let sigma_hint = find_petals(model)
        .into_iter()
        .find(|p| matches!(petal_contains_upstairs(model, &p.geometry, w0), Ok(true)))
        .and_then(|p| p.sigma);
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = span * i as f64 / n as f64;
        let wt = model.psi(w0, -t);
        let dev = stable_deviation(model, wt, sigma_hint);
        let z = match dev {
            Some(u) => sigma_hint.unwrap() * (c64(1.0, 0.0) - u),
            None => model.koenigs.inverse(wt)?,
        };
        samples.push(OrbitSample {
            t,
            z,
            w: Some(wt),
            dev,
        });
    }
    Ok(OrbitTrace {
        direction: OrbitDirection::Backward,
        samples,
        landed: false,
        sigma_hint,
    })
}

/// Stable deviation `1 - conj(sigma) h^{-1}(W)` for Koenigs maps with a
/// closed-form tail expansion (currently the Koebe map, whose inverse
/// satisfies `1 - z = (sqrt(4W+1) - 1)/(2W)` exactly).
fn stable_deviation(
    model: &SemigroupModel,
    w: Complex64,
    sigma: Option<Complex64>,
) -> Option<Complex64> {
    let sigma = sigma?;
    if model.koenigs.label() != "koebe" || (sigma - c64(1.0, 0.0)).norm() > 1e-9 {
        return None;
    }
    if w.norm() < 1.0 {
        return None;
    }
    let disc = (c64(4.0, 0.0) * w + 1.0).sqrt();
    Some((disc - 1.0) / (c64(2.0, 0.0) * w))
}

/// Hyperbolic-step estimate of a backward trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEstimate {
    Finite(f64),
    /// Windowed values grew monotonically beyond the growth threshold.
    Diverging,
}

/// Estimates the hyperbolic step `limsup omega(gamma(t), gamma(t+1))` as the
/// max over the tail window `[T/2, T-1]`.
///
/// Deep samples with stable deviations use the boundary-deviation form of
/// the disc metric; traces over numeric Koenigs maps fall back to the exact
/// conformal invariance `omega(gamma(t), gamma(t+1)) = k_Omega(w_t, w_{t+1})`
/// evaluated through locally re-anchored fits.
pub fn hyperbolic_step(model: &SemigroupModel, trace: &OrbitTrace) -> Result<StepEstimate> {
    let span = trace.span();
    if trace.direction != OrbitDirection::Backward || span < 20.0 {
        return Err(Error::InsufficientData(
            "hyperbolic step needs a backward trace covering [0, T], T >= 20".into(),
        ));
    }
    let n_window = 8usize;
    let ts: Vec<f64> = (0..n_window)
        .map(|i| span / 2.0 + (span / 2.0 - 1.0) * i as f64 / (n_window - 1) as f64)
        .collect();
    let w0 = trace.samples[0]
        .w
        .ok_or_else(|| Error::InsufficientData("trace lacks model coordinates".into()))?;
    let mut vals = Vec::with_capacity(ts.len());
    for &t in &ts {
        let wa = model.psi(w0, -t);
        let wb = model.psi(w0, -(t + 1.0));
        let step = match (
            stable_deviation(model, wa, trace.sigma_hint),
            stable_deviation(model, wb, trace.sigma_hint),
        ) {
            (Some(ua), Some(ub)) => omega_from_deviations(ua, ub),
            _ => match (&model.domain, model.koenigs.is_closed_form()) {
                (_, true) => {
                    let za = model.koenigs.inverse(wa)?;
                    let zb = model.koenigs.inverse(wb)?;
                    omega(za, zb)?
                }
                (ModelDomain::Starlike(d), false) => zipper::comb_metric_local(d, wa, wb, 900)?,
                _ => {
                    return Err(Error::Numeric(
                        "no stable step evaluation path for this model".into(),
                    ))
                }
            },
        };
        vals.push(step);
    }
    // Divergence flag: strictly growing tail well beyond its head.
    let grew = vals.windows(2).all(|w| w[1] > w[0]);
    if grew && vals[vals.len() - 1] > 4.0 * vals[0].max(1.0) {
        return Ok(StepEstimate::Diverging);
    }
    Ok(StepEstimate::Finite(
        vals.into_iter().fold(f64::NEG_INFINITY, f64::max),
    ))
}

/// Landing verdicts for backward orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandingVerdict {
    RepellingTarget,
    DwTangential,
    InteriorConstant,
}

/// Landing analysis report.
#[derive(Debug, Clone)]
pub struct LandingReport {
    pub sigma_hat: Complex64,
    /// Tail average of `Arg(1 - conj(sigma) gamma(t))`; `None` when the
    /// approach is tangential (|slope| at pi/2 within tolerance).
    pub slope: Option<f64>,
    pub verdict: LandingVerdict,
    /// Tangential-orbit invariant `|tau - gamma|^2 / (1 - |gamma|^2)`.
    pub r_hat: Option<f64>,
}

/// Analyzes the landing of a backward trace.
pub fn landing_analysis(model: &SemigroupModel, trace: &OrbitTrace) -> Result<LandingReport> {
    let n = trace.samples.len();
    if n < 8 {
        return Err(Error::InsufficientData("trace too short".into()));
    }
    let tail = &trace.samples[n - n / 4 - 1..];
    // Constant interior orbit?
    let first = trace.samples[0].z;
    let spread = trace
        .samples
        .iter()
        .map(|s| (s.z - first).norm())
        .fold(0.0, f64::max);
    if spread < 1e-12 && first.norm() < 0.999 {
        return Ok(LandingReport {
            sigma_hat: model.tau,
            slope: None,
            verdict: LandingVerdict::InteriorConstant,
            r_hat: None,
        });
    }
    let zt = tail.last().unwrap().z;
    if zt.norm() < 0.99 {
        return Err(Error::Indeterminate(
            "tail has not stabilized near the boundary".into(),
        ));
    }
    let sigma_hat = zt / zt.norm();
    // Slope from deviations when available.
    let mut slopes = Vec::new();
    for s in tail {
        let u = match s.dev {
            Some(u) => u,
            None => c64(1.0, 0.0) - sigma_hat.conj() * s.z,
        };
        if u.norm() > 0.0 {
            slopes.push(u.arg());
        }
    }
    if slopes.is_empty() {
        return Err(Error::Indeterminate("no usable tail samples".into()));
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let var = slopes
        .iter()
        .map(|s| (s - mean).powi(2))
        .sum::<f64>()
        .sqrt()
        / slopes.len() as f64;
    if var > 0.2 {
        return Err(Error::Indeterminate(
            "approach angle did not stabilize".into(),
        ));
    }
    let tangential = mean.abs() > std::f64::consts::FRAC_PI_2 - 0.05;
    let near_tau = (sigma_hat - model.tau).norm() < 1e-3;
    if near_tau || tangential {
        let r_hat = tail
            .iter()
            .map(|s| {
                let num = (model.tau - s.z).norm_sqr();
                let den = 1.0 - s.z.norm_sqr();
                num / den
            })
            .last();
        return Ok(LandingReport {
            sigma_hat: model.tau,
            slope: None,
            verdict: LandingVerdict::DwTangential,
            r_hat,
        });
    }
    Ok(LandingReport {
        sigma_hat,
        slope: Some(mean),
        verdict: LandingVerdict::RepellingTarget,
        r_hat: None,
    })
}

/// Pre-model at a repelling fixed point: the hyperbolic group `eta_t` with
/// Denjoy-Wolff point `-sigma`, fixed point `sigma`, spectral value
/// `-lambda_rep`, intertwined into the semigroup by `g = h^{-1} . m`, where
/// `m` maps the disc onto the petal's upstairs geometry and conjugates
/// `eta_t` to the model action.
#[derive(Debug, Clone)]
pub struct PreModel {
    pub sigma: Complex64,
    pub lambda_rep: f64,
    /// Disc onto the petal's upstairs geometry, `m(sigma-end) = ` repelling
    /// end.
    pub coordinate: ConformalMap,
    /// Largest intertwining residual observed on the verification grid.
    pub intertwining_residual: f64,
    /// Max `|Arg((1 - conj(s) g(z))/(1 - conj(s) z))|` over the Stolz probe.
    pub semiconformality_defect: f64,
}

impl PreModel {
    /// The group element `eta_t`.
    pub fn eta(&self, t: f64) -> MobiusMap {
        MobiusMap::hyperbolic_fixing(self.sigma, (-self.lambda_rep * t).exp())
            .expect("valid premodel group")
    }

    /// Intertwining map `g(z) = h^{-1}(m(z))`.
    pub fn g(&self, model: &SemigroupModel, z: Complex64) -> Result<Complex64> {
        model.koenigs.inverse(self.coordinate.eval(z)?)
    }

    /// Upstairs coordinate of `g`: `h(g(z)) = m(z)` by construction.
    pub fn g_upstairs(&self, z: Complex64) -> Result<Complex64> {
        self.coordinate.eval(z)
    }
}

/// Builds the pre-model for a hyperbolic petal.
pub fn build_premodel(model: &SemigroupModel, petal: &Petal) -> Result<PreModel> {
    if petal.kind != PetalKind::Hyperbolic {
        return Err(Error::InvalidParam(
            "pre-models exist only for hyperbolic petals".into(),
        ));
    }
    let lambda_rep = petal
        .lambda_rep
        .ok_or_else(|| Error::Construction("hyperbolic petal without spectral value".into()))?;
    let sigma = petal
        .sigma
        .ok_or_else(|| Error::Construction("petal lacks a repelling-point estimate".into()))?;
    let sigma = sigma / sigma.norm();

    let coordinate = match &petal.geometry {
        PetalGeometry::Strip { a1, a2 } => {
            // Rotate sigma to the bottom end (-i) of the strip chart.
            let rot = catalog::affine(-I / sigma, c64(0.0, 0.0))?;
            catalog::strip_interval_map(*a1, *a2)?.compose_after(&rot)?
        }
        PetalGeometry::Sector(s) => {
            // Rotate sigma to +1 = the repelling end of the sector chart.
            let rot = catalog::affine(c64(1.0, 0.0) / sigma, c64(0.0, 0.0))?;
            catalog::disc_to_spiral_sector(s.mu, s.amplitude(), s.theta0)?.compose_after(&rot)?
        }
        PetalGeometry::HalfPlane(_) => {
            return Err(Error::InvalidParam(
                "parabolic petals have no pre-model".into(),
            ))
        }
    };
    let pm = PreModel {
        sigma,
        lambda_rep,
        coordinate,
        intertwining_residual: 0.0,
        semiconformality_defect: 0.0,
    };

    // Intertwining residual g(eta_t(z)) = phi_t(g(z)) on a grid.
    let tol = if model.koenigs.is_closed_form() {
        1e-6
    } else {
        1e-3
    };
    let mut residual: f64 = 0.0;
    for &t in &[0.0, 0.5, 1.5] {
        let eta = pm.eta(t);
        for &z in &[
            c64(0.0, 0.0),
            c64(0.4, 0.2),
            c64(-0.3, 0.5),
            c64(0.1, -0.6),
            c64(-0.5, -0.2),
        ] {
            let lhs = pm.g(model, eta.apply(z))?;
            let rhs = model.evolve(pm.g(model, z)?, t)?;
            residual = residual.max((lhs - rhs).norm());
        }
    }
    if residual > tol {
        return Err(Error::Construction(format!(
            "pre-model intertwining residual {residual:e} exceeds {tol:e}"
        )));
    }
    // Semi-conformality at sigma on a Stolz sample.
    let mut defect: f64 = 0.0;
    for &rho in &[1e-2, 1e-3, 1e-4] {
        for &beta in &[-0.9, -0.4, 0.0, 0.4, 0.9] {
            let z = sigma * (c64(1.0, 0.0) - Complex64::from_polar(rho, beta));
            if let Ok(gz) = pm.g(model, z) {
                let num = c64(1.0, 0.0) - sigma.conj() * gz;
                let den = c64(1.0, 0.0) - sigma.conj() * z;
                if num.norm() > 0.0 {
                    let ratio_arg = (num / den).arg().abs();
                    if rho <= 1e-3 {
                        defect = defect.max(ratio_arg);
                    }
                }
            }
        }
    }
    Ok(PreModel {
        intertwining_residual: residual,
        semiconformality_defect: defect,
        ..pm
    })
}

/// Result of the Stolz inclusion probe.
#[derive(Debug, Clone, Copy)]
pub struct StolzProbe {
    /// Largest tested epsilon with all samples inside the petal (0 on
    /// failure).
    pub epsilon: f64,
    pub counterexample: Option<Complex64>,
    pub samples_tested: usize,
}

/// Probes the inclusion `S(sigma, M) /\ {|z - sigma| < eps} <= petal` over a
/// dyadic epsilon schedule.
pub fn stolz_inclusion_probe(
    model: &SemigroupModel,
    petal: &Petal,
    m: f64,
    samples: usize,
) -> Result<StolzProbe> {
    if petal.kind != PetalKind::Hyperbolic {
        return Err(Error::InvalidParam(
            "Stolz probe needs a hyperbolic petal".into(),
        ));
    }
    let sigma = petal
        .sigma
        .ok_or_else(|| Error::Construction("petal lacks a sigma estimate".into()))?;
    let sigma = sigma / sigma.norm();
    let region = StolzRegion::new(sigma, m)?;
    let mut last_counter = None;
    for j in -1..20 {
        let eps = 2.0f64.powi(-j);
        let pts = stolz_samples(sigma, m, eps, samples);
        let bad = par::find_violation(&pts, |z| {
            region.contains(*z)
                && match model.koenigs.eval(*z) {
                    Ok(w) => {
                        matches!(petal_contains_upstairs(model, &petal.geometry, w), Ok(true))
                    }
                    Err(_) => false,
                }
        });
        match bad {
            None => {
                return Ok(StolzProbe {
                    epsilon: eps,
                    counterexample: None,
                    samples_tested: pts.len(),
                })
            }
            Some(z) => last_counter = Some(z),
        }
    }
    Ok(StolzProbe {
        epsilon: 0.0,
        counterexample: last_counter,
        samples_tested: samples,
    })
}

/// Deterministic Stolz-region samples within `eps` of the vertex.
fn stolz_samples(sigma: Complex64, m: f64, eps: f64, n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n);
    let rows = (n as f64).sqrt().ceil() as usize;
    for i in 0..rows {
        // Radial depth, geometric toward the vertex.
        let rho = eps * 0.5f64.powf(8.0 * (i as f64 + 0.5) / rows as f64);
        for j in 0..rows {
            let beta = -1.5 + 3.0 * (j as f64 + 0.5) / rows as f64;
            let z = sigma * (c64(1.0, 0.0) - Complex64::from_polar(rho, beta));
            if z.norm() < 1.0 && (sigma - z).norm() < m * (1.0 - z.norm()) {
                pts.push(z);
            }
        }
    }
    pts
}

/// Closed-form automorphism-group fixtures (backward-orbit reference cases).
pub mod groups {
    use super::*;

    /// Hyperbolic group fixing `+-sigma` with repelling spectral value
    /// `lambda < 0` at `sigma` (Denjoy-Wolff point `-sigma`).
    #[derive(Debug, Clone, Copy)]
    pub struct HyperbolicGroup {
        pub sigma: Complex64,
        pub lambda: f64,
    }

    impl HyperbolicGroup {
        pub fn map(&self, t: f64) -> MobiusMap {
            MobiusMap::hyperbolic_fixing(self.sigma, (-self.lambda * t).exp())
                .expect("valid group")
        }

        pub fn apply(&self, z: Complex64, t: f64) -> Complex64 {
            self.map(t).apply(z)
        }
    }

    /// Parabolic group with Denjoy-Wolff point `tau`: conjugate of a real
    /// translation on the upper half-plane.
    #[derive(Debug, Clone, Copy)]
    pub struct ParabolicGroup {
        pub tau: Complex64,
    }

    impl ParabolicGroup {
        /// `C(z) = i (tau + z)/(tau - z)` maps the disc onto the upper
        /// half-plane with `tau -> infinity`.
        fn chart(&self) -> MobiusMap {
            MobiusMap::new(
                c64(0.0, 1.0),
                c64(0.0, 1.0) * self.tau,
                c64(-1.0, 0.0),
                self.tau,
            )
            .expect("valid chart")
        }

        pub fn apply(&self, z: Complex64, t: f64) -> Complex64 {
            let c = self.chart();
            c.inverse().apply(c.apply(z) + t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evolve_identity_at_zero() {
        let m = SemigroupModel::koebe();
        let z = c64(0.3, 0.4);
        assert!((m.evolve(z, 0.0).unwrap() - z).norm() < 1e-12);
    }

    #[test]
    fn evolve_koebe_log2_example() {
        // h(1/2) = 2, e^{-ln 2} * 2 = 1, and the disc root of w/(1-w)^2 = 1
        // is (3 - sqrt 5)/2.
        let m = SemigroupModel::koebe();
        let got = m.evolve(c64(0.5, 0.0), 2.0f64.ln()).unwrap();
        let expect = (3.0 - 5.0f64.sqrt()) / 2.0;
        assert!((got - c64(expect, 0.0)).norm() < 1e-12, "{got}");
    }

    #[test]
    fn generator_examples() {
        let m = SemigroupModel::koebe();
        // tau = 0 is a rest point.
        assert!(m.generator_eval(c64(0.0, 0.0)).unwrap().norm() < 1e-14);
        // G(1/2) = -h/h' = -2/12.
        let g = m.generator_eval(c64(0.5, 0.0)).unwrap();
        assert!((g - c64(-1.0 / 6.0, 0.0)).norm() < 1e-12, "{g}");
    }

    #[test]
    fn semigroup_law_samples() {
        let models = [
            SemigroupModel::koebe(),
            SemigroupModel::slit_plane_model(1.0, 0.0),
            SemigroupModel::strip_group(1.0).unwrap(),
        ];
        let mut state = 42u64;
        let mut rnd = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for m in &models {
            for _ in 0..50 {
                let z = Complex64::from_polar(0.8 * rnd(), 2.0 * std::f64::consts::PI * rnd());
                let (s, t) = (5.0 * rnd(), 5.0 * rnd());
                let a = m.evolve(z, s + t).unwrap();
                let b = m.evolve(m.evolve(z, s).unwrap(), t).unwrap();
                assert!((a - b).norm() <= 1e-9, "{} at z={z}", m.koenigs.label());
            }
        }
    }

    #[test]
    fn ode_matches_model_koebe() {
        let m = SemigroupModel::koebe();
        let z0 = c64(-0.5, 0.0);
        let trace = integrate_orbit(&m, z0, 0.0, 5.0, OrbitConfig::default()).unwrap();
        for s in &trace.samples {
            let exact = m.evolve(z0, s.t).unwrap();
            assert!((s.z - exact).norm() < 1e-6, "t={} {} vs {exact}", s.t, s.z);
        }
        // Forward orbit tends to tau = 0.
        assert!(trace.samples.last().unwrap().z.norm() < 0.1);
    }

    #[test]
    fn backward_integration_lands_at_sigma() {
        let m = SemigroupModel::koebe();
        let trace = integrate_orbit(&m, c64(0.0, 0.5), 0.0, -14.0, OrbitConfig::default()).unwrap();
        let z = trace.samples.last().unwrap().z;
        assert!(z.norm() > 0.99, "|z| = {}", z.norm());
        assert!((z / z.norm() - c64(1.0, 0.0)).norm() < 1e-2, "landing {z}");
    }

    #[test]
    fn backward_integration_refused_outside() {
        // -1/2 sits on the petal slit: boundary of the backward set.
        let m = SemigroupModel::koebe();
        let r = integrate_orbit(&m, c64(-0.5, 0.0), 0.0, -5.0, OrbitConfig::default());
        assert!(r.is_err());
    }

    #[test]
    fn maximal_curve_koebe_exit_time() {
        let m = SemigroupModel::koebe();
        // h(z0) = -1/8 on the slit spiral below the cutoff: a = -ln 2.
        let z0 = m.koenigs.inverse(c64(-0.125, 0.0)).unwrap();
        let h = maximal_invariant_curve(&m, z0).unwrap();
        let a = h.a.expect("finite exit");
        assert!((a - (-(2.0f64.ln()))).abs() < 1e-9, "a = {a}");
        // Off-spiral interior point: full backward ray.
        let z1 = m.koenigs.inverse(c64(0.0, 0.5)).unwrap();
        assert!(maximal_invariant_curve(&m, z1).unwrap().a.is_none());
    }

    #[test]
    fn backward_membership_koebe_trichotomy() {
        let m = SemigroupModel::koebe();
        assert_eq!(
            backward_invariant_membership(&m, c64(0.0, 0.5)).unwrap(),
            WSetVerdict::Interior
        );
        assert_eq!(
            backward_invariant_membership(&m, c64(-0.5, 0.0)).unwrap(),
            WSetVerdict::Boundary
        );
    }

    #[test]
    fn koebe_petal_detection() {
        let m = SemigroupModel::koebe();
        let petals = find_petals(&m);
        assert_eq!(petals.len(), 1);
        let p = &petals[0];
        assert_eq!(p.kind, PetalKind::Hyperbolic);
        assert_eq!(p.shape_type, 1);
        let lam = p.lambda_rep.unwrap();
        assert!((lam - (-0.5)).abs() < 1e-12, "lambda_rep = {lam}");
        let sigma = p.sigma.unwrap();
        assert!((sigma - c64(1.0, 0.0)).norm() < 1e-6, "sigma = {sigma}");
    }

    #[test]
    fn koebe_hyperbolic_step_quarter() {
        let m = SemigroupModel::koebe();
        let z0 = m.koenigs.inverse(c64(0.5, 0.0)).unwrap();
        let trace = backward_orbit_trace(&m, z0, 40.0, 40).unwrap();
        match hyperbolic_step(&m, &trace).unwrap() {
            StepEstimate::Finite(v) => {
                assert!((v - 0.25).abs() <= 0.02 * 0.25, "step = {v}");
            }
            StepEstimate::Diverging => panic!("unexpected divergence"),
        }
    }

    #[test]
    fn landing_analysis_koebe_backward() {
        let m = SemigroupModel::koebe();
        let z0 = c64(0.0, 0.5);
        let trace = backward_orbit_trace(&m, z0, 60.0, 80).unwrap();
        let rep = landing_analysis(&m, &trace).unwrap();
        assert_eq!(rep.verdict, LandingVerdict::RepellingTarget);
        assert!((rep.sigma_hat - c64(1.0, 0.0)).norm() < 1e-6);
        let slope = rep.slope.unwrap();
        assert!(slope.abs() < std::f64::consts::FRAC_PI_2 - 0.05);
    }

    #[test]
    fn parabolic_group_backward_invariant_constant() {
        let g = groups::ParabolicGroup { tau: c64(1.0, 0.0) };
        let z0 = c64(0.2, 0.1);
        let r0 = {
            let z = z0;
            (g.tau - z).norm_sqr() / (1.0 - z.norm_sqr())
        };
        for t in [1.0, 5.0, 20.0, 60.0] {
            let z = g.apply(z0, -t);
            let r = (g.tau - z).norm_sqr() / (1.0 - z.norm_sqr());
            assert!(((r - r0) / r0).abs() < 1e-6, "t={t}: {r} vs {r0}");
        }
    }

    #[test]
    fn premodel_koebe_image_is_petal() {
        let m = SemigroupModel::koebe();
        let petal = find_petals(&m).remove(0);
        let pm = build_premodel(&m, &petal).unwrap();
        assert!(pm.intertwining_residual <= 1e-6);
        assert!((pm.eta(0.0).apply(c64(0.3, 0.2)) - c64(0.3, 0.2)).norm() < 1e-12);
        // eta_t'(sigma) = e^{-lambda t}.
        let t = 0.7;
        let d = pm.eta(t).derivative(pm.sigma).norm();
        assert!((d - (0.5 * t).exp()).abs() < 1e-9);
        // g(D) = D \ (-1, 0]: image points avoid the slit, slit points are
        // not hit.
        let mut state = 7u64;
        let mut rnd = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let z = Complex64::from_polar(0.95 * rnd(), 2.0 * std::f64::consts::PI * rnd());
            let gz = pm.g(&m, z).unwrap();
            assert!(gz.norm() < 1.0);
            let on_slit = gz.im.abs() < 1e-9 && gz.re <= 0.0 && gz.re > -1.0;
            assert!(!on_slit, "g({z}) = {gz} on the excised slit");
        }
        assert!(pm.semiconformality_defect < 0.2);
    }

    #[test]
    fn stolz_probe_koebe() {
        let m = SemigroupModel::koebe();
        let petal = find_petals(&m).remove(0);
        let probe = stolz_inclusion_probe(&m, &petal, 2.0, 400).unwrap();
        assert!(probe.epsilon > 0.0);
        assert!(probe.counterexample.is_none());
        // Degenerate aperture: nearly empty region passes trivially.
        let probe = stolz_inclusion_probe(&m, &petal, 1.0 + 1e-9, 400).unwrap();
        assert!(probe.epsilon > 0.0);
        // Parabolic petal input is a precondition error.
        let slit = SemigroupModel::slit_plane_model(1.0, 0.0);
        let pp = find_petals(&slit)
            .into_iter()
            .find(|p| p.kind == PetalKind::Parabolic)
            .unwrap();
        assert!(stolz_inclusion_probe(&slit, &pp, 2.0, 10).is_err());
    }
}
