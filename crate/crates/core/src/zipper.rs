//! Numeric Riemann maps for comb domains via geodesic welding.
//!
//! The fitter first applies a closed-form "precap" that compactifies the
//! domain's unbounded ends (strip-to-disc for bounded-strip combs, Cayley
//! for half-plane-bounded ones, an exact square-root unfolding for the
//! single-slit plane). The precapped boundary is traced in prime-end order
//! as a polyline, truncated at `t_box` in the original coordinates (the
//! truncated tails sit behind exponentially thin channels, so the induced
//! map error at interior points is far below the fit tolerance), and then
//! unrolled onto the real line by a chain of elementary slit maps: each step
//! composes a real Moebius map `z -> z/(1 - z/c)` with the vertical slit map
//! `z -> sqrt(z^2 + h^2)`, welding one boundary point onto `R` along a
//! hyperbolic geodesic. A final corner map closes the curve and a Moebius
//! normalization pins `map(0) = anchor` with positive real derivative.
//!
//! Forward evaluation, inverse, and point construction all cost `O(n)`
//! elementary closed forms for `n` boundary points; building the chain is
//! `O(n^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::confmap::{catalog, ConformalMap, Primitive};
use crate::domains::{ProfilePiece, ProfileValue, StarlikeAtInfinityDomain};
use crate::error::{Error, Result};
use crate::hypgeo::omega;
use crate::par;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One welding step: Moebius foot `c` (`None` for a vertical geodesic) and
/// slit height `h`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeldStep {
    pub c: Option<f64>,
    pub h: f64,
}

impl WeldStep {
    #[inline]
    fn forward(&self, z: Complex64) -> Complex64 {
        let u = match self.c {
            Some(c) => z / (1.0 - z / c),
            None => z,
        };
        vertical_slit(u, self.h)
    }

    /// Forward step for a tracked point that may sit at infinity
    /// (`None`) or at very large magnitude.
    #[inline]
    fn forward_inf(&self, z: Option<Complex64>) -> Option<Complex64> {
        match z {
            Some(z) if z.norm() > 1e120 => match self.c {
                Some(c) => Some(vertical_slit(c64(-c, 0.0), self.h)),
                None => Some(z),
            },
            Some(z) => Some(self.forward(z)),
            None => self.c.map(|c| vertical_slit(c64(-c, 0.0), self.h)),
        }
    }

    #[inline]
    fn backward(&self, w: Complex64) -> Complex64 {
        let u = vertical_slit_inv(w, self.h);
        match self.c {
            Some(c) => u / (1.0 + u / c),
            None => u,
        }
    }
}

/// `sqrt(z^2 + h^2)` with the branch asymptotic to `z` at infinity in the
/// upper half-plane; maps `H \ (0, ih]` onto `H`.
#[inline]
fn vertical_slit(z: Complex64, h: f64) -> Complex64 {
    if z.norm() == 0.0 {
        return c64(0.0, 0.0);
    }
    let r = h / z.norm();
    if r > 1e8 {
        // Deep in the slit's shadow scale-wise: sqrt(z^2+h^2) ~ (+-)h; pick
        // the branch continuous with the generic formula.
        let t = (c64(1.0, 0.0) + (z / h) * (z / h)).sqrt();
        return t * h;
    }
    let q = h / z;
    z * (c64(1.0, 0.0) + q * q).sqrt()
}

/// Inverse of [`vertical_slit`]: `sqrt(w^2 - h^2)`, `H -> H \ (0, ih]`.
#[inline]
fn vertical_slit_inv(w: Complex64, h: f64) -> Complex64 {
    if w.norm() == 0.0 {
        return c64(0.0, 0.0);
    }
    let q = h / w;
    w * (c64(1.0, 0.0) - q * q).sqrt()
}

/// Fitted Riemann map from the unit disc onto a comb domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZipperMap {
    /// Closed-form chart: unit disc onto the precap coordinate patch
    /// (applied forward when going toward the target domain).
    pub chart: Vec<Primitive>,
    /// First two boundary points of the welding chain (precap coordinates).
    pub p0: Complex64,
    pub p1: Complex64,
    pub steps: Vec<WeldStep>,
    /// Foot of the final corner map (image of `p0` on the real axis).
    pub q: f64,
    /// Image of the anchor in the final upper half-plane.
    pub anchor_hp: Complex64,
    /// Input rotation fixing a positive real derivative at 0.
    pub rotation: Complex64,
    /// Anchor in target-domain coordinates: `eval(0) = anchor`.
    pub anchor: Complex64,
    /// Schema version for serialized caches.
    pub version: u32,
}

impl ZipperMap {
    /// Welding chain in precap coordinates: precap patch -> upper half-plane.
    fn weld(&self, z: Complex64) -> Complex64 {
        let mut v = c64(0.0, 1.0) * ((z - self.p1) / (z - self.p0)).sqrt();
        for s in &self.steps {
            v = s.forward(v);
        }
        // Final corner map: the closing geodesic arch over [0, q] maps to a
        // vertical ray, the domain to a quarter-plane, then a square (with a
        // sign so the image is the upper half-plane for either sign of q).
        let m = v / (1.0 - v / self.q);
        let w = m * m;
        if self.q > 0.0 {
            -w
        } else {
            w
        }
    }

    fn unweld(&self, w: Complex64) -> Complex64 {
        let u = if self.q > 0.0 {
            // Second-quadrant square root.
            -(-w).sqrt()
        } else {
            w.sqrt()
        };
        let mut v = u / (1.0 + u / self.q);
        for s in self.steps.iter().rev() {
            v = s.backward(v);
        }
        // Invert the base map: v = i sqrt((z - p1)/(z - p0)).
        let rho = -(v * v);
        (self.p1 - self.p0 * rho) / (c64(1.0, 0.0) - rho)
    }

    /// Disc -> target domain.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let z = self.rotation * z;
        // Moebius H -> D with anchor_hp -> 0: N(w) = (w - a)/(w - conj a).
        let a = self.anchor_hp;
        let w_hp = (a - a.conj() * z) / (c64(1.0, 0.0) - z);
        let pre = self.unweld(w_hp);
        let mut v = pre;
        for p in &self.chart {
            v = eval_primitive(p, v)?;
        }
        Ok(v)
    }

    /// Target domain -> disc.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        let mut v = w;
        for p in self.chart.iter().rev() {
            v = inverse_primitive(p, v)?;
        }
        let w_hp = self.weld(v);
        let a = self.anchor_hp;
        let z = (w_hp - a) / (w_hp - a.conj());
        Ok(z * self.rotation.conj())
    }

    /// Central finite-difference derivative (holomorphic, so a real step
    /// recovers the complex derivative).
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let h = 1e-6 * (1.0 - z.norm()).max(1e-3);
        let f1 = self.eval(z + c64(h, 0.0))?;
        let f0 = self.eval(z - c64(h, 0.0))?;
        Ok((f1 - f0) / (2.0 * h))
    }
}

fn eval_primitive(p: &Primitive, z: Complex64) -> Result<Complex64> {
    ConformalMap::closed("step", vec![p.clone()]).eval(z)
}

fn inverse_primitive(p: &Primitive, w: Complex64) -> Result<Complex64> {
    ConformalMap::closed("step", vec![p.clone()]).inverse(w)
}

/// Fit configuration.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    /// Approximate number of boundary points in the welding chain.
    pub resolution: usize,
    /// Truncation depth/extent for unbounded boundary parts (original
    /// coordinates). Accuracy parameter; tails behind thin channels are cut
    /// here.
    pub t_box: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            resolution: 1400,
            t_box: 1e3,
        }
    }
}

/// Fits a Riemann map from the unit disc onto `domain` with `map(0) =
/// anchor` and positive real derivative at 0.
pub fn fit_numeric_map(
    domain: &StarlikeAtInfinityDomain,
    anchor: Complex64,
    resolution: usize,
) -> Result<ConformalMap> {
    fit_with_config(
        domain,
        anchor,
        FitConfig {
            resolution,
            ..FitConfig::default()
        },
    )
}

/// [`fit_numeric_map`] with explicit truncation control.
pub fn fit_with_config(
    domain: &StarlikeAtInfinityDomain,
    anchor: Complex64,
    cfg: FitConfig,
) -> Result<ConformalMap> {
    if !matches!(domain.contains(anchor), Ok(true)) {
        return Err(Error::InvalidParam(
            "anchor must lie strictly inside the domain".into(),
        ));
    }
    let chart = choose_chart(domain)?;
    let strip_mode = domain.bounding_strip().is_some()
        || matches!(chart.first(), Some(Primitive::StripMap { .. }));
    let candidates = boundary_candidates(domain, cfg.t_box, strip_mode, cfg.resolution)?;
    // Map candidates to precap coordinates.
    let chart_map = ConformalMap::closed("chart", chart.clone());
    let mut pre: Vec<Complex64> = Vec::with_capacity(candidates.len());
    for w in &candidates {
        pre.push(chart_map.inverse(*w)?);
    }
    dedup_consecutive(&mut pre, 1e-13);
    let poly = decimate(&pre, cfg.resolution);
    if poly.len() < 8 {
        return Err(Error::Fit {
            reason: "boundary polyline too short".into(),
            residual: f64::NAN,
        });
    }
    let anchor_pre = chart_map.inverse(anchor)?;

    // The walk orientation depends on the precap; try both and keep the one
    // that normalizes the anchor.
    let ok = |m: &ZipperMap| match m.eval(c64(0.0, 0.0)) {
        Ok(w) => (w - anchor).norm() < 1e-6 * (1.0 + anchor.norm()),
        Err(_) => false,
    };
    let zm = match build_welding(&poly, anchor_pre, chart.clone(), anchor) {
        Ok(m) if ok(&m) => m,
        _ => {
            let mut rev = poly.clone();
            rev.reverse();
            let m = build_welding(&rev, anchor_pre, chart, anchor)?;
            if !ok(&m) {
                return Err(Error::Fit {
                    reason: "welding chain failed to normalize the anchor".into(),
                    residual: f64::NAN,
                });
            }
            m
        }
    };

    // Round-trip residual on an interior grid.
    let mut residual: f64 = 0.0;
    for &z in &interior_grid(12, 0.1) {
        if let Ok(w) = zm.eval(z) {
            if let Ok(back) = zm.inverse(w) {
                residual = residual.max((back - z).norm());
                continue;
            }
        }
        residual = f64::INFINITY;
    }
    if !(residual < 1e-6) {
        return Err(Error::Fit {
            reason: "forward/inverse round trip failed on the interior grid".into(),
            residual,
        });
    }
    Ok(ConformalMap::numeric(
        format!("fitted({} pts)", poly.len()),
        zm,
    ))
}

fn build_welding(
    poly: &[Complex64],
    anchor_pre: Complex64,
    chart: Vec<Primitive>,
    anchor: Complex64,
) -> Result<ZipperMap> {
    let p0 = poly[0];
    let p1 = poly[1];
    let base = |z: Complex64| c64(0.0, 1.0) * ((z - p1) / (z - p0)).sqrt();
    let mut steps: Vec<WeldStep> = Vec::with_capacity(poly.len());
    // Tracked image of p0 (starts at infinity under the base map).
    let mut q_img: Option<Complex64> = None;
    let mut anchor_img = base(anchor_pre);

    for &p in &poly[2..] {
        let mut w = base(p);
        for s in &steps {
            w = s.forward(w);
        }
        let scale = w.norm();
        if scale < 1e-13 {
            continue; // coincides with the current welding origin
        }
        let im = w.im.max(1e-13 * scale);
        let w = c64(w.re, im);
        let step = if w.re.abs() < 1e-9 * scale {
            WeldStep { c: None, h: w.im }
        } else {
            let c = w.norm_sqr() / w.re;
            if !c.is_finite() {
                WeldStep { c: None, h: w.im }
            } else {
                let m = w / (1.0 - w / c);
                WeldStep {
                    c: Some(c),
                    h: m.im.abs().max(m.norm() * 1e-15),
                }
            }
        };
        q_img = step.forward_inf(q_img);
        anchor_img = step.forward(anchor_img);
        steps.push(step);
    }

    let q = match q_img {
        Some(v) => v.re,
        None => {
            return Err(Error::Fit {
                reason: "degenerate welding chain (base point stayed at infinity)".into(),
                residual: f64::NAN,
            })
        }
    };
    if q == 0.0 || !q.is_finite() {
        return Err(Error::Fit {
            reason: format!("degenerate final corner foot (q = {q})"),
            residual: f64::NAN,
        });
    }
    let m = anchor_img / (1.0 - anchor_img / q);
    let anchor_hp = if q > 0.0 { -(m * m) } else { m * m };
    if anchor_hp.im <= 0.0 {
        return Err(Error::Fit {
            reason: "anchor left the upper half-plane during welding".into(),
            residual: f64::NAN,
        });
    }
    let mut zm = ZipperMap {
        chart,
        p0,
        p1,
        steps,
        q,
        anchor_hp,
        rotation: c64(1.0, 0.0),
        anchor,
        version: 1,
    };
    // Fix the derivative direction at 0.
    let h = 1e-6;
    let d = (zm.eval(c64(h, 0.0))? - zm.eval(c64(-h, 0.0))?) / (2.0 * h);
    if d.norm() == 0.0 || !d.re.is_finite() {
        return Err(Error::Fit {
            reason: "vanishing derivative at the anchor".into(),
            residual: f64::NAN,
        });
    }
    zm.rotation = Complex64::from_polar(1.0, -d.arg());
    Ok(zm)
}

/// Precap chart: closed-form map from the unit disc onto the coordinate
/// patch holding the domain (strip, half-plane, or the slit plane itself).
fn choose_chart(domain: &StarlikeAtInfinityDomain) -> Result<Vec<Primitive>> {
    if let Some((lo, hi)) = domain.bounding_strip() {
        return Ok(vec![
            Primitive::StripMap { rho: hi - lo },
            Primitive::Affine {
                a: c64(1.0, 0.0),
                b: c64(lo, 0.0),
            },
        ]);
    }
    let pieces = domain.profile().pieces();
    let first_blocked = matches!(pieces.first(), Some(ProfilePiece::Blocked { .. }));
    let last_blocked = matches!(pieces.last(), Some(ProfilePiece::Blocked { .. }));
    if first_blocked && last_blocked {
        let lo = pieces.first().and_then(|p| match p {
            ProfilePiece::Blocked { b, .. } => Some(*b),
            _ => None,
        });
        let hi = pieces.last().and_then(|p| match p {
            ProfilePiece::Blocked { a, .. } => Some(*a),
            _ => None,
        });
        if let (Some(lo), Some(hi)) = (lo, hi) {
            return Ok(vec![
                Primitive::StripMap { rho: hi - lo },
                Primitive::Affine {
                    a: c64(1.0, 0.0),
                    b: c64(lo, 0.0),
                },
            ]);
        }
    }
    if first_blocked {
        // Domain inside {Re > a}.
        let a = match pieces.first().unwrap() {
            ProfilePiece::Blocked { b, .. } => *b,
            _ => unreachable!(),
        };
        return Ok(vec![
            Primitive::Cayley,
            Primitive::Affine {
                a: c64(1.0, 0.0),
                b: c64(a, 0.0),
            },
        ]);
    }
    if last_blocked {
        // Domain inside {Re < a}: mirror through the Cayley map.
        let a = match pieces.last().unwrap() {
            ProfilePiece::Blocked { a, .. } => *a,
            _ => unreachable!(),
        };
        return Ok(vec![
            Primitive::Cayley,
            Primitive::Affine {
                a: c64(-1.0, 0.0),
                b: c64(a, 0.0),
            },
        ]);
    }
    // Fully unbounded in x: supported for a single vertical slit, which the
    // square-root unfolding maps exactly.
    let slits: Vec<(f64, f64)> = pieces
        .iter()
        .filter_map(|p| match p {
            ProfilePiece::Slit { x, top } => Some((*x, *top)),
            _ => None,
        })
        .collect();
    let curves = pieces
        .iter()
        .any(|p| matches!(p, ProfilePiece::Curve { .. }));
    if slits.len() == 1 && !curves {
        let (x, top) = slits[0];
        if let crate::confmap::Backend::Closed(steps) = catalog::slit_plane_map(x, top).backend() {
            return Ok(steps.clone());
        }
        unreachable!();
    }
    Err(Error::InvalidParam(
        "unsupported fit geometry: no bounding strip or half-plane, and not a single-slit plane"
            .into(),
    ))
}

/// Dense boundary candidates in original coordinates, traced in prime-end
/// order with the domain on the left, truncated at `t_box`.
///
/// In strip mode (bounding strip present) the gaps between teeth get a
/// synthetic floor at depth `-t_box`; the strip precap compactifies those
/// depths exponentially, so the floor perturbs the map below any tolerance.
/// Without a strip every candidate must sit on the true boundary: the chain
/// runs through the single compactified end and the polyline closes across
/// it with a short chord.
fn boundary_candidates(
    domain: &StarlikeAtInfinityDomain,
    t_box: f64,
    strip_mode: bool,
    resolution: usize,
) -> Result<Vec<Complex64>> {
    let pieces = domain.profile().pieces();
    let mut out: Vec<Complex64> = Vec::new();
    // Strip precaps compactify depth exponentially; Moebius/square-root
    // precaps only polynomially, so push the truncation much further there
    // (the exponential ordinate spread keeps the point count unchanged).
    let t_box = if strip_mode { t_box } else { t_box.max(1e7) };
    let y_cut = -t_box;
    let per_piece = resolution.max(900);

    // Exponentially spread ordinates between lo and hi.
    let spread = |lo: f64, hi: f64, n: usize, rev: bool| -> Vec<f64> {
        let a = lo.asinh();
        let b = hi.asinh();
        let mut v: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (a + t * (b - a)).sinh()
            })
            .collect();
        if rev {
            v.reverse();
        }
        v
    };

    let left_edge = pieces.iter().find_map(|p| match p {
        ProfilePiece::Blocked { a, b } if *a == f64::NEG_INFINITY => Some(*b),
        _ => None,
    });
    let right_edge = pieces.iter().rev().find_map(|p| match p {
        ProfilePiece::Blocked { a, b } if *b == f64::INFINITY => Some(*a),
        _ => None,
    });

    let wall_base = |x: f64| match domain.profile().value(x) {
        ProfileValue::Finite(v) => v.max(y_cut),
        _ => y_cut,
    };

    if let Some(xl) = left_edge {
        for y in spread(wall_base(xl + 1e-12), t_box, per_piece, true) {
            out.push(c64(xl, y));
        }
    }

    // Lower boundary left to right.
    for p in pieces.iter() {
        match p {
            ProfilePiece::Blocked { .. } => {}
            ProfilePiece::Free { a, b } => {
                if strip_mode {
                    // Synthetic floor at the truncation depth.
                    let n = per_piece / 2;
                    for i in 0..=n {
                        let t = i as f64 / n as f64;
                        // Cluster near the ends (tooth roots).
                        let scl = 0.5 - 0.5 * (std::f64::consts::PI * t).cos();
                        out.push(c64(a + scl * (b - a), y_cut));
                    }
                } else if a.is_finite() && b.is_finite() {
                    return Err(Error::InvalidParam(
                        "unsupported fit geometry: interior free column without a bounding strip"
                            .into(),
                    ));
                }
            }
            ProfilePiece::Slit { x, top } => {
                // A slit side is exposed when the neighbouring piece dips
                // below the top near the junction.
                let exposed = |left: bool| -> bool {
                    let probe = if left { x - 1e-9 } else { x + 1e-9 };
                    match domain.profile().value(probe) {
                        ProfileValue::NegInf => true,
                        ProfileValue::Finite(v) => v < *top - 1e-12,
                        ProfileValue::PosInf => false,
                    }
                };
                let (el, er) = (exposed(true), exposed(false));
                // Both sides exposed: offset them so the precap chart can
                // tell the two prime-end sides of the slit apart.
                let fat = if el && er { 1e-9 * (1.0 + x.abs()) } else { 0.0 };
                if el {
                    for y in spread(y_cut, *top, per_piece, false) {
                        out.push(c64(x - fat, y));
                    }
                }
                out.push(c64(*x, *top));
                if er {
                    for y in spread(y_cut, *top, per_piece, true) {
                        out.push(c64(x + fat, y));
                    }
                }
            }
            ProfilePiece::Curve { a, b, samples } => {
                // Left asymptotic margin: wall descends toward the left edge.
                let (x0, _) = samples[0];
                if x0 > *a {
                    for y in spread(y_cut, samples[0].1.max(y_cut), per_piece / 3, false) {
                        out.push(c64(*a + (x0 - *a) * 1e-6, y));
                    }
                }
                // Wall polyline, clipped at the truncation depth, resampled.
                let mut prev: Option<(f64, f64)> = None;
                for &(x, y) in samples {
                    let yc = y.max(y_cut);
                    if let Some((px, py)) = prev {
                        let n = 6;
                        for i in 1..=n {
                            let t = i as f64 / n as f64;
                            out.push(c64(px + t * (x - px), (py + t * (yc - py)).max(y_cut)));
                        }
                    } else {
                        out.push(c64(x, yc));
                    }
                    prev = Some((x, yc));
                }
                // Right asymptotic margin.
                let (x1, y1) = *samples.last().unwrap();
                if x1 < *b {
                    for y in spread(y_cut, y1.max(y_cut), per_piece / 3, true) {
                        out.push(c64(*b - (*b - x1) * 1e-6, y));
                    }
                }
            }
        }
    }

    if let Some(xr) = right_edge {
        for y in spread(wall_base(xr - 1e-12), t_box, per_piece, false) {
            out.push(c64(xr, y));
        }
    }

    if out.len() < 8 {
        return Err(Error::Fit {
            reason: "boundary trace produced too few candidates".into(),
            residual: f64::NAN,
        });
    }
    Ok(out)
}

fn dedup_consecutive(pts: &mut Vec<Complex64>, tol: f64) {
    pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
}

/// Keeps roughly `target` points, near-uniform in chord length, keeping
/// genuine corners and never emitting near-coincident neighbours.
fn decimate(pts: &[Complex64], target: usize) -> Vec<Complex64> {
    let total: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let step = total / target.max(8) as f64;
    let min_sep = 0.05 * step;
    let mut out = vec![pts[0]];
    for i in 1..pts.len() {
        let last = *out.last().unwrap();
        let d = (pts[i] - last).norm();
        if d < min_sep {
            continue;
        }
        let corner = i + 1 < pts.len() && {
            let u = pts[i] - last;
            let v = pts[i + 1] - pts[i];
            v.norm() >= min_sep && (u.conj() * v).re < 0.5 * u.norm() * v.norm()
        };
        if d >= step || corner {
            out.push(pts[i]);
        }
    }
    // Rotate the closed loop so the welding base sits on a well-resolved
    // stretch: maximize the smaller of the two gaps adjacent to the start.
    let n = out.len();
    if n >= 8 {
        let gap = |i: usize| (out[(i + 1) % n] - out[i]).norm();
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let v = gap(prev).min(gap(i));
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        out.rotate_left(best);
    }
    out
}

/// Disc grid with boundary clearance (radius up to `1 - clearance`).
pub fn interior_grid(n: usize, clearance: f64) -> Vec<Complex64> {
    let mut pts = Vec::new();
    let rmax = 1.0 - clearance;
    for i in 0..n {
        let r = rmax * (i as f64 + 0.5) / n as f64;
        let m = (4 + i * 6).max(6);
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            pts.push(Complex64::from_polar(r, th));
        }
    }
    pts
}

/// Max pointwise deviation between a fitted map `a` and a reference map `b`
/// (both disc-normalized with the same anchor).
///
/// Measured in disc coordinates through the inverse maps, over target-domain
/// grid points with boundary clearance at least `clearance`, inside the box
/// `|w - anchor| <= box_radius`, and with reference preimage `|z| <= 0.95`
/// (both coordinates keep their own clearance, so the absolute tolerance is
/// scale-free). Additionally checks the forward direction on disc points
/// whose reference images stay within the box.
pub fn max_deviation(
    a: &ConformalMap,
    b: &ConformalMap,
    domain: &StarlikeAtInfinityDomain,
    anchor: Complex64,
    clearance: f64,
    box_radius: f64,
) -> Result<f64> {
    let mut targets = Vec::new();
    let n = 40;
    for i in 0..=n {
        for j in 0..=n {
            let w = anchor
                + c64(
                    box_radius * (2.0 * i as f64 / n as f64 - 1.0),
                    box_radius * (2.0 * j as f64 / n as f64 - 1.0),
                );
            if matches!(domain.contains(w), Ok(true))
                && domain.boundary_distance_lower(w) >= clearance
                && matches!(b.inverse(w), Ok(z) if z.norm() <= 0.95)
            {
                targets.push(w);
            }
        }
    }
    let inv_devs = par::map_collect(&targets, |w| match (a.inverse(*w), b.inverse(*w)) {
        (Ok(za), Ok(zb)) => (za - zb).norm(),
        _ => f64::INFINITY,
    });
    let mut worst = inv_devs.into_iter().fold(0.0, f64::max);
    let fwd_grid = interior_grid(14, 0.05);
    let fwd_devs = par::map_collect(&fwd_grid, |z| match (a.eval(*z), b.eval(*z)) {
        (Ok(wa), Ok(wb)) => {
            if (wb - anchor).norm() <= box_radius {
                (wa - wb).norm()
            } else {
                0.0
            }
        }
        _ => f64::INFINITY,
    });
    worst = worst.max(fwd_devs.into_iter().fold(0.0, f64::max));
    Ok(worst)
}

/// Hyperbolic distance inside a comb domain through a locally re-anchored
/// fit: the map is fitted with anchor at the pair's midpoint (truncation
/// adjusted to the local depth), then the distance is read off in the disc.
pub fn comb_metric_local(
    domain: &StarlikeAtInfinityDomain,
    w1: Complex64,
    w2: Complex64,
    resolution: usize,
) -> Result<f64> {
    let mid = (w1 + w2) / 2.0;
    if !matches!(domain.contains(mid), Ok(true)) {
        return Err(Error::InvalidParam(
            "midpoint of the pair leaves the domain".into(),
        ));
    }
    let depth = w1.im.min(w2.im).min(0.0).abs();
    let cfg = FitConfig {
        resolution,
        t_box: depth + 1e3,
    };
    let map = fit_with_config(domain, mid, cfg)?;
    let z1 = map.inverse(w1)?;
    let z2 = map.inverse(w2)?;
    omega(z1, z2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::StarlikeAtInfinityDomain;

    #[test]
    fn vertical_slit_maps_boundary_to_real_axis() {
        let h = 1.0;
        // Points on the slit map to the real axis.
        for y in [0.25, 0.5, 0.9] {
            let w = vertical_slit(c64(1e-14, y), h);
            assert!(w.im.abs() < 1e-6, "slit point -> {w}");
        }
        // Real points stay real, interior stays upper.
        let w = vertical_slit(c64(2.0, 0.0), h);
        assert!((w - c64(5.0f64.sqrt(), 0.0)).norm() < 1e-12);
        let w = vertical_slit(c64(0.3, 0.7), h);
        assert!(w.im > 0.0);
        // Round trip.
        for z in [c64(0.4, 0.2), c64(-1.0, 1.5), c64(0.01, 2.0)] {
            let back = vertical_slit_inv(vertical_slit(z, h), h);
            assert!((back - z).norm() < 1e-10, "{z} -> {back}");
        }
    }

    #[test]
    fn fit_strip_matches_catalog() {
        let dom = StarlikeAtInfinityDomain::strip(0.0, 1.0);
        let anchor = c64(0.5, 0.0);
        let fit = fit_numeric_map(&dom, anchor, 800).unwrap();
        let exact = catalog::strip_map(1.0).unwrap();
        let err = max_deviation(&fit, &exact, &dom, anchor, 0.05, 15.0).unwrap();
        assert!(err <= 1e-3, "strip fit error {err}");
    }

    #[test]
    fn fit_half_plane_matches_cayley() {
        let dom = StarlikeAtInfinityDomain::right_half_plane(0.0);
        let anchor = c64(1.0, 0.0);
        let fit = fit_numeric_map(&dom, anchor, 800).unwrap();
        let exact = catalog::cayley();
        let err = max_deviation(&fit, &exact, &dom, anchor, 0.05, 15.0).unwrap();
        assert!(err <= 1e-3, "half-plane fit error {err}");
    }

    #[test]
    fn fit_slit_plane_matches_closed_form() {
        let dom = StarlikeAtInfinityDomain::slit_plane(1.0, 0.0);
        let anchor = c64(1.0, 1.0);
        let fit = fit_numeric_map(&dom, anchor, 2400).unwrap();
        let exact = catalog::slit_plane_map(1.0, 0.0);
        let err = max_deviation(&fit, &exact, &dom, anchor, 0.05, 12.0).unwrap();
        assert!(err <= 1e-3, "slit plane fit error {err}");
    }

    #[test]
    fn local_metric_agrees_with_strip_formula() {
        // For the pure strip the local fit must reproduce the exact metric.
        let dom = StarlikeAtInfinityDomain::strip(-1.0, 1.0);
        let d = comb_metric_local(&dom, c64(0.0, 0.0), c64(0.0, -1.0), 700).unwrap();
        let exact = std::f64::consts::PI / 4.0;
        assert!((d - exact).abs() < 2e-3, "{d} vs {exact}");
    }
}
