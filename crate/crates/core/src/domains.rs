//! Canonical model-plane domains and their petal geometry.
//!
//! Non-elliptic Koenigs images are represented as comb graphs
//! `Omega = {x + iy : y > f(x)}` for an upper semicontinuous profile
//! `f : R -> [-inf, +inf]` built from pieces: `free` (`f = -inf`), `blocked`
//! (`f = +inf`), `slit` (a single abscissa with a finite top), and `curve`
//! (a sampled finite wall, interpolated linearly). Every starlike-at-infinity
//! domain used here fits this normal form, and it turns maximal-strip
//! detection into an interval scan over `{f = -inf}`.
//!
//! Elliptic Koenigs images are spirallike slit domains: the plane minus
//! finitely many (possibly truncated) logarithmic-spiral slits, optionally
//! restricted to an enclosing spirallike sector.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypgeo::{spiral_coords, wrap_angle, BOUNDARY_TOL};

/// Value of a comb profile at an abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileValue {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ProfileValue {
    fn max(self, other: ProfileValue) -> ProfileValue {
        use ProfileValue::*;
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(a.max(b)),
            (Finite(a), NegInf) | (NegInf, Finite(a)) => Finite(a),
            (NegInf, NegInf) => NegInf,
        }
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, ProfileValue::NegInf)
    }
}

/// One piece of a comb profile. Interval pieces carry open intervals that
/// tile the line; slits sit at the junctions between them.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfilePiece {
    /// `f = -inf` on `(a, b)`.
    Free { a: f64, b: f64 },
    /// `f = +inf` on `(a, b)`.
    Blocked { a: f64, b: f64 },
    /// Single abscissa with `f(x) = top`.
    Slit { x: f64, top: f64 },
    /// Finite wall on `(a, b)`, piecewise linear through `samples`.
    ///
    /// Samples must be sorted by abscissa inside `[a, b]`. If the sample
    /// hull starts (ends) strictly inside the interval, the uncovered margin
    /// is an asymptotic wall: the profile tends to `-inf` toward that edge.
    Curve {
        a: f64,
        b: f64,
        samples: Vec<(f64, f64)>,
    },
}

impl ProfilePiece {
    fn interval(&self) -> Option<(f64, f64)> {
        match self {
            ProfilePiece::Free { a, b }
            | ProfilePiece::Blocked { a, b }
            | ProfilePiece::Curve { a, b, .. } => Some((*a, *b)),
            ProfilePiece::Slit { .. } => None,
        }
    }

    /// One-sided limsup of the profile approaching the given interval edge
    /// from inside this piece.
    fn edge_limsup(&self, left_edge: bool) -> ProfileValue {
        match self {
            ProfilePiece::Free { .. } => ProfileValue::NegInf,
            ProfilePiece::Blocked { .. } => ProfileValue::PosInf,
            ProfilePiece::Slit { top, .. } => ProfileValue::Finite(*top),
            ProfilePiece::Curve { a, b, samples } => {
                if left_edge {
                    let (x0, y0) = samples[0];
                    if x0 > *a {
                        ProfileValue::NegInf
                    } else {
                        ProfileValue::Finite(y0)
                    }
                } else {
                    let (x1, y1) = *samples.last().unwrap();
                    if x1 < *b {
                        ProfileValue::NegInf
                    } else {
                        ProfileValue::Finite(y1)
                    }
                }
            }
        }
    }
}

/// Comb profile: ordered pieces tiling the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct CombProfile {
    pieces: Vec<ProfilePiece>,
}

impl CombProfile {
    /// Validates and normalizes a piece list. Interval pieces must tile R in
    /// order (first start `-inf`, last end `+inf`, ends matching starts);
    /// slits must sit exactly at a junction, at most one per junction, with
    /// top at or above both one-sided limsups (upper semicontinuity / open
    /// domain check).
    pub fn new(mut pieces: Vec<ProfilePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParam("empty profile".into()));
        }
        pieces.sort_by(|p, q| {
            let kp = p.interval().map(|(a, _)| a).unwrap_or_else(|| slit_x(p));
            let kq = q.interval().map(|(a, _)| a).unwrap_or_else(|| slit_x(q));
            kp.partial_cmp(&kq)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| slit_order(p).cmp(&slit_order(q)))
        });
        // Check interval chain.
        let intervals: Vec<(f64, f64)> = pieces.iter().filter_map(|p| p.interval()).collect();
        if intervals.is_empty() {
            return Err(Error::InvalidParam("profile has no interval pieces".into()));
        }
        if intervals[0].0 != f64::NEG_INFINITY {
            return Err(Error::InvalidParam("profile must start at -infinity".into()));
        }
        if intervals.last().unwrap().1 != f64::INFINITY {
            return Err(Error::InvalidParam("profile must end at +infinity".into()));
        }
        for w in intervals.windows(2) {
            if !(w[0].1 == w[1].0 && w[0].0 < w[0].1) {
                return Err(Error::InvalidParam(format!(
                    "interval pieces must tile the line without gaps or overlap: ({}, {}) then ({}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        {
            let last = intervals.last().unwrap();
            if !(last.0 < last.1) {
                return Err(Error::InvalidParam("degenerate final interval".into()));
            }
        }
        // Validate curves.
        for p in &pieces {
            if let ProfilePiece::Curve { a, b, samples } = p {
                if samples.is_empty() {
                    return Err(Error::InvalidParam("curve piece without samples".into()));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(x, y) in samples {
                    if !(x >= *a && x <= *b) || !y.is_finite() || x < prev {
                        return Err(Error::InvalidParam(
                            "curve samples must be sorted and lie inside the piece".into(),
                        ));
                    }
                    prev = x;
                }
            }
        }
        let profile = Self { pieces };
        // Slit placement and upper semicontinuity.
        for p in &profile.pieces {
            if let ProfilePiece::Slit { x, top } = p {
                if !x.is_finite() || !top.is_finite() {
                    return Err(Error::InvalidParam("slit needs finite position".into()));
                }
                let (l, r) = profile.junction_limsups(*x)?;
                let top_v = ProfileValue::Finite(*top);
                if top_v.max(l) != top_v || top_v.max(r) != top_v {
                    return Err(Error::InvalidParam(format!(
                        "slit top at x = {x} lies below an adjacent wall; the domain would not be open"
                    )));
                }
            }
        }
        Ok(profile)
    }

    pub fn pieces(&self) -> &[ProfilePiece] {
        &self.pieces
    }

    fn junction_limsups(&self, x: f64) -> Result<(ProfileValue, ProfileValue)> {
        let mut left = None;
        let mut right = None;
        for p in &self.pieces {
            if let Some((a, b)) = p.interval() {
                if b == x {
                    left = Some(p.edge_limsup(false));
                }
                if a == x {
                    right = Some(p.edge_limsup(true));
                }
            }
        }
        match (left, right) {
            (Some(l), Some(r)) => Ok((l, r)),
            _ => Err(Error::InvalidParam(format!(
                "slit at x = {x} is not at a junction of interval pieces"
            ))),
        }
    }

    /// Profile value at `x` (junction rule: declared slit top, otherwise the
    /// larger one-sided limsup).
    pub fn value(&self, x: f64) -> ProfileValue {
        for p in &self.pieces {
            if let ProfilePiece::Slit { x: xs, top } = p {
                if *xs == x {
                    return ProfileValue::Finite(*top);
                }
            }
        }
        for p in &self.pieces {
            if let Some((a, b)) = p.interval() {
                if x > a && x < b {
                    return match p {
                        ProfilePiece::Free { .. } => ProfileValue::NegInf,
                        ProfilePiece::Blocked { .. } => ProfileValue::PosInf,
                        ProfilePiece::Curve { samples, .. } => curve_value(samples, x),
                        ProfilePiece::Slit { .. } => unreachable!(),
                    };
                }
            }
        }
        // x is a junction without a slit.
        match self.junction_limsups(x) {
            Ok((l, r)) => l.max(r),
            Err(_) => ProfileValue::PosInf,
        }
    }

    fn slits(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pieces.iter().filter_map(|p| match p {
            ProfilePiece::Slit { x, top } => Some((*x, *top)),
            _ => None,
        })
    }
}

fn slit_x(p: &ProfilePiece) -> f64 {
    match p {
        ProfilePiece::Slit { x, .. } => *x,
        _ => unreachable!(),
    }
}

fn slit_order(p: &ProfilePiece) -> u8 {
    matches!(p, ProfilePiece::Slit { .. }) as u8
}

fn curve_value(samples: &[(f64, f64)], x: f64) -> ProfileValue {
    let (x0, _) = samples[0];
    let (x1, _) = *samples.last().unwrap();
    if x < x0 || x > x1 {
        // Uncovered margin: asymptotic wall.
        return ProfileValue::NegInf;
    }
    let idx = samples.partition_point(|&(sx, _)| sx <= x);
    if idx == 0 {
        return ProfileValue::Finite(samples[0].1);
    }
    if idx >= samples.len() {
        return ProfileValue::Finite(samples[samples.len() - 1].1);
    }
    let (xa, ya) = samples[idx - 1];
    let (xb, yb) = samples[idx];
    if xb == xa {
        return ProfileValue::Finite(ya.max(yb));
    }
    let t = (x - xa) / (xb - xa);
    ProfileValue::Finite(ya + t * (yb - ya))
}

/// Status of a vertical line `{Re w = x}` against a comb domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineStatus {
    /// The line misses the domain entirely.
    Disjoint,
    /// Exactly `{Im w > r}` lies inside.
    HalfLine(f64),
    /// The whole line lies inside.
    FullLine,
}

/// Side of a maximal half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlaneSide {
    Left,
    Right,
}

/// Maximal half-plane `{Re w > a}` (right) or `{Re w < a}` (left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneGeometry {
    pub side: HalfPlaneSide,
    pub a: f64,
}

/// A domain `{y > f(x)}`, starlike at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct StarlikeAtInfinityDomain {
    profile: CombProfile,
    bounding_strip: Option<(f64, f64)>,
}

impl StarlikeAtInfinityDomain {
    pub fn new(profile: CombProfile, bounding_strip: Option<(f64, f64)>) -> Result<Self> {
        if let Some((lo, hi)) = bounding_strip {
            if !(lo < hi) {
                return Err(Error::InvalidParam("empty bounding strip".into()));
            }
        }
        Ok(Self {
            profile,
            bounding_strip,
        })
    }

    /// Builds a domain from pieces covering only `[lo, hi]`; blocked tails
    /// are added automatically.
    pub fn bounded(mut pieces: Vec<ProfilePiece>, lo: f64, hi: f64) -> Result<Self> {
        pieces.push(ProfilePiece::Blocked {
            a: f64::NEG_INFINITY,
            b: lo,
        });
        pieces.push(ProfilePiece::Blocked {
            a: hi,
            b: f64::INFINITY,
        });
        Self::new(CombProfile::new(pieces)?, Some((lo, hi)))
    }

    /// The full plane minus a single vertical slit `{Re = x, Im <= top}`.
    pub fn slit_plane(x: f64, top: f64) -> Self {
        let pieces = vec![
            ProfilePiece::Free {
                a: f64::NEG_INFINITY,
                b: x,
            },
            ProfilePiece::Slit { x, top },
            ProfilePiece::Free {
                a: x,
                b: f64::INFINITY,
            },
        ];
        Self::new(CombProfile::new(pieces).unwrap(), None).unwrap()
    }

    /// The vertical strip `{lo < Re w < hi}`.
    pub fn strip(lo: f64, hi: f64) -> Self {
        Self::bounded(vec![ProfilePiece::Free { a: lo, b: hi }], lo, hi).unwrap()
    }

    /// The half-plane `{Re w > a}`.
    pub fn right_half_plane(a: f64) -> Self {
        let pieces = vec![
            ProfilePiece::Blocked {
                a: f64::NEG_INFINITY,
                b: a,
            },
            ProfilePiece::Free {
                a,
                b: f64::INFINITY,
            },
        ];
        Self::new(CombProfile::new(pieces).unwrap(), None).unwrap()
    }

    pub fn profile(&self) -> &CombProfile {
        &self.profile
    }

    pub fn bounding_strip(&self) -> Option<(f64, f64)> {
        self.bounding_strip
    }

    /// Exact membership. A query within [`BOUNDARY_TOL`] of a slit (but not
    /// exactly on its abscissa) is ambiguous and rejected.
    pub fn contains(&self, w: Complex64) -> Result<bool> {
        for (xs, top) in self.profile.slits() {
            let dx = (w.re - xs).abs();
            if dx > 0.0 && dx < BOUNDARY_TOL && w.im <= top + BOUNDARY_TOL {
                return Err(Error::BoundaryProximity {
                    what: format!("slit at Re = {xs}"),
                    tol: BOUNDARY_TOL,
                });
            }
        }
        Ok(match self.profile.value(w.re) {
            ProfileValue::NegInf => true,
            ProfileValue::PosInf => false,
            ProfileValue::Finite(f) => w.im > f,
        })
    }

    /// Maximal vertical strips `{a1 < Re < a2}` contained in the domain,
    /// sorted by left edge. Runs of `{f = -inf}` extending to infinity are
    /// half-planes and excluded here.
    pub fn maximal_strips(&self) -> Vec<(f64, f64)> {
        self.neg_inf_runs()
            .into_iter()
            .filter(|&(a, b)| a.is_finite() && b.is_finite())
            .collect()
    }

    /// Maximal half-planes (at most two).
    pub fn maximal_half_planes(&self) -> Vec<HalfPlaneGeometry> {
        let mut out = Vec::new();
        for (a, b) in self.neg_inf_runs() {
            if a == f64::NEG_INFINITY && b == f64::INFINITY {
                // Whole plane: no maximal half-plane exists.
                continue;
            }
            if a == f64::NEG_INFINITY {
                out.push(HalfPlaneGeometry {
                    side: HalfPlaneSide::Left,
                    a: b,
                });
            } else if b == f64::INFINITY {
                out.push(HalfPlaneGeometry {
                    side: HalfPlaneSide::Right,
                    a,
                });
            }
        }
        out
    }

    /// Maximal open runs of `f = -inf`: free pieces merged across junctions
    /// whose value is `-inf`. A slit with finite top splits two abutting
    /// free pieces into distinct runs.
    fn neg_inf_runs(&self) -> Vec<(f64, f64)> {
        let mut runs: Vec<(f64, f64)> = Vec::new();
        for p in self.profile.pieces() {
            if let ProfilePiece::Free { a, b } = p {
                match runs.last_mut() {
                    Some((_, prev_b)) if *prev_b == *a && self.profile.value(*a).is_neg_inf() => {
                        *prev_b = *b;
                    }
                    _ => runs.push((*a, *b)),
                }
            }
        }
        runs
    }

    /// Status of the vertical line at `x`.
    pub fn vertical_line_status(&self, x: f64) -> LineStatus {
        match self.profile.value(x) {
            ProfileValue::PosInf => LineStatus::Disjoint,
            ProfileValue::NegInf => LineStatus::FullLine,
            ProfileValue::Finite(r) => LineStatus::HalfLine(r),
        }
    }

    /// Connected horizontal section of the domain through `(x0, y)`:
    /// the maximal interval around `x0` with `f < y`. Returns `None` when
    /// `(x0, y)` itself is not inside.
    pub fn horizontal_section(&self, x0: f64, y: f64) -> Option<(f64, f64)> {
        if !matches!(self.contains(Complex64::new(x0, y)), Ok(true)) {
            return None;
        }
        let lo = self.section_scan(x0, y, false);
        let hi = self.section_scan(x0, y, true);
        Some((lo, hi))
    }

    fn section_scan(&self, x0: f64, y: f64, rightward: bool) -> f64 {
        let mut x = x0;
        loop {
            // Enclosing or adjacent interval piece extending past x in the
            // scan direction.
            let mut hit: Option<&ProfilePiece> = None;
            for p in self.profile.pieces() {
                if let Some((a, b)) = p.interval() {
                    let extends = if rightward {
                        x >= a && x < b
                    } else {
                        x > a && x <= b
                    };
                    if extends {
                        hit = Some(p);
                        break;
                    }
                }
            }
            let p = match hit {
                Some(p) => p,
                None => return if rightward { f64::INFINITY } else { f64::NEG_INFINITY },
            };
            let (a, b) = p.interval().unwrap();
            let edge = if rightward { b } else { a };
            match p {
                ProfilePiece::Blocked { .. } => return x,
                ProfilePiece::Curve { samples, .. } => {
                    if let Some(cx) = curve_crossing(samples, x, edge, y, rightward) {
                        return cx;
                    }
                }
                _ => {}
            }
            if !edge.is_finite() {
                return edge;
            }
            // Wall at the junction itself?
            let stops = match self.profile.value(edge) {
                ProfileValue::PosInf => true,
                ProfileValue::Finite(f) => f >= y,
                ProfileValue::NegInf => false,
            };
            if stops {
                return edge;
            }
            x = edge;
        }
    }

    /// Euclidean distance from `w` to the domain boundary, underestimated:
    /// curve margins are replaced by vertical rays at the interval edge.
    /// Slits, blocked edges and curve polylines are exact.
    pub fn boundary_distance_lower(&self, w: Complex64) -> f64 {
        let mut d = f64::INFINITY;
        for p in self.profile.pieces() {
            match p {
                ProfilePiece::Free { .. } => {}
                ProfilePiece::Slit { x, top } => {
                    d = d.min(dist_to_vertical_ray(w, *x, *top));
                }
                ProfilePiece::Blocked { a, b } => {
                    if a.is_finite() {
                        d = d.min((w.re - a).abs());
                    }
                    if b.is_finite() {
                        d = d.min((w.re - b).abs());
                    }
                }
                ProfilePiece::Curve { a, b, samples } => {
                    for seg in samples.windows(2) {
                        d = d.min(dist_to_segment(w, seg[0], seg[1]));
                    }
                    if samples.len() == 1 {
                        let (x, yv) = samples[0];
                        d = d.min((w - Complex64::new(x, yv)).norm());
                    }
                    // Asymptotic margins as vertical rays.
                    let (x0, y0) = samples[0];
                    if x0 > *a {
                        d = d.min(dist_to_vertical_ray(w, *a, y0));
                    }
                    let (x1, y1) = *samples.last().unwrap();
                    if x1 < *b {
                        d = d.min(dist_to_vertical_ray(w, *b, y1));
                    }
                }
            }
        }
        d
    }
}

fn dist_to_vertical_ray(w: Complex64, x: f64, top: f64) -> f64 {
    let dx = w.re - x;
    if w.im <= top {
        dx.abs()
    } else {
        (dx * dx + (w.im - top) * (w.im - top)).sqrt()
    }
}

fn dist_to_segment(w: Complex64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let pa = Complex64::new(a.0, a.1);
    let pb = Complex64::new(b.0, b.1);
    let ab = pb - pa;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (w - pa).norm();
    }
    let t = (((w - pa).conj() * ab).re / len2).clamp(0.0, 1.0);
    (w - (pa + ab * t)).norm()
}

/// First abscissa beyond `from` (toward `edge`) where the interpolated wall
/// reaches height `y`, if any.
fn curve_crossing(samples: &[(f64, f64)], from: f64, edge: f64, y: f64, rightward: bool) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut consider = |x: f64, best: &mut Option<f64>| {
        let better = match best {
            None => true,
            Some(bx) => {
                if rightward {
                    x < *bx
                } else {
                    x > *bx
                }
            }
        };
        if better {
            *best = Some(x);
        }
    };
    let in_scan = |x: f64| {
        if rightward {
            x > from && x <= edge.max(from)
        } else {
            x < from && x >= edge.min(from)
        }
    };
    for seg in samples.windows(2) {
        let (xa, ya) = seg[0];
        let (xb, yb) = seg[1];
        if xb == xa {
            if ya.max(yb) >= y && in_scan(xa) {
                consider(xa, &mut best);
            }
            continue;
        }
        if (ya >= y) == (yb >= y) {
            if ya >= y {
                // Whole segment blocks: wall starts at its near end.
                let near = if rightward { xa.max(from) } else { xb.min(from) };
                if in_scan(near) || near == from {
                    consider(if rightward { xa } else { xb }, &mut best);
                }
            }
            continue;
        }
        let t = (y - ya) / (yb - ya);
        let x = xa + t * (xb - xa);
        if in_scan(x) {
            consider(x, &mut best);
        }
    }
    if samples.len() == 1 && samples[0].1 >= y && in_scan(samples[0].0) {
        consider(samples[0].0, &mut best);
    }
    best
}

/// Spirallike sector `Spir[mu, 2 alpha, theta0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpirallikeSector {
    pub mu: Complex64,
    /// Half-amplitude, in `(0, pi]`.
    pub alpha: f64,
    /// Center angle, in `[-pi, pi)`.
    pub theta0: f64,
}

impl SpirallikeSector {
    pub fn new(mu: Complex64, two_alpha: f64, theta0: f64) -> Result<Self> {
        if mu.re <= 0.0 {
            return Err(Error::InvalidParam("Re mu must be positive".into()));
        }
        if !(two_alpha > 0.0 && two_alpha <= 2.0 * std::f64::consts::PI + 1e-12) {
            return Err(Error::InvalidParam("amplitude must lie in (0, 2 pi]".into()));
        }
        Ok(Self {
            mu,
            alpha: (two_alpha / 2.0).min(std::f64::consts::PI),
            theta0: wrap_angle(theta0),
        })
    }

    pub fn amplitude(&self) -> f64 {
        2.0 * self.alpha
    }

    pub fn contains(&self, w: Complex64) -> bool {
        match spiral_coords(self.mu, w) {
            Ok((_, theta)) => wrap_angle(theta - self.theta0).abs() < self.alpha,
            Err(_) => false,
        }
    }
}

/// Truncated spiral slit `{e^{-mu s} c : s <= s_max}` (`s_max = +inf` gives
/// the full spiral through `c`, together with the origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralSlit {
    pub anchor: Complex64,
    pub s_max: f64,
}

impl SpiralSlit {
    pub fn full(anchor: Complex64) -> Self {
        Self {
            anchor,
            s_max: f64::INFINITY,
        }
    }

    /// Angle of the carrying spiral in `[-pi, pi)` (the mu-spirallike
    /// argument of the anchor).
    pub fn angle(&self, mu: Complex64) -> f64 {
        spiral_coords(mu, self.anchor)
            .map(|(_, th)| th)
            .unwrap_or(0.0)
    }

    /// Smallest blocked modulus: the slit occupies `{|w| >= cut}` along its
    /// spiral. Zero for a full spiral.
    pub fn cut_modulus(&self, mu: Complex64) -> f64 {
        if self.s_max.is_infinite() {
            0.0
        } else {
            self.anchor.norm() * (-self.s_max * mu.re).exp()
        }
    }
}

/// Status of the spiral `spir_mu[e^{i theta}]` against a spirallike domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpiralStatus {
    Disjoint,
    /// Exactly the inner part `{|w| < a}` of the spiral lies inside.
    Truncated(f64),
    FullSpiral,
}

/// The plane (or a sector) minus finitely many spiral slits; model domain of
/// an elliptic semigroup with spectral value `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpirallikeSlitDomain {
    pub mu: Complex64,
    pub obstructions: Vec<SpiralSlit>,
    pub sector: Option<SpirallikeSector>,
}

const ANGLE_TOL: f64 = 1e-12;

impl SpirallikeSlitDomain {
    pub fn new(
        mu: Complex64,
        obstructions: Vec<SpiralSlit>,
        sector: Option<SpirallikeSector>,
    ) -> Result<Self> {
        if mu.re <= 0.0 {
            return Err(Error::InvalidParam("Re mu must be positive".into()));
        }
        if let Some(s) = &sector {
            if (s.mu - mu).norm() > 1e-12 {
                return Err(Error::InvalidParam(
                    "enclosing sector must share the domain's mu".into(),
                ));
            }
        }
        Ok(Self {
            mu,
            obstructions,
            sector,
        })
    }

    /// The Koebe image: the plane minus the ray `(-inf, -1/4]`, as a
    /// spirallike slit domain for `mu = 1`.
    pub fn koebe_image() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            vec![SpiralSlit {
                anchor: Complex64::new(-0.25, 0.0),
                s_max: 0.0,
            }],
            None,
        )
        .unwrap()
    }

    pub fn contains(&self, w: Complex64) -> Result<bool> {
        if w == Complex64::new(0.0, 0.0) {
            let full_spiral = self.obstructions.iter().any(|o| o.s_max.is_infinite());
            return Ok(!full_spiral && self.sector.is_none());
        }
        let (_, theta) = spiral_coords(self.mu, w)?;
        if let Some(s) = &self.sector {
            if wrap_angle(theta - s.theta0).abs() >= s.alpha {
                return Ok(false);
            }
        }
        for o in &self.obstructions {
            let dth = wrap_angle(theta - o.angle(self.mu)).abs();
            let cut = o.cut_modulus(self.mu);
            if dth == 0.0 {
                if w.norm() >= cut {
                    return Ok(false);
                }
            } else if dth * w.norm() < BOUNDARY_TOL && w.norm() >= cut - BOUNDARY_TOL {
                return Err(Error::BoundaryProximity {
                    what: format!("spiral slit at angle {}", o.angle(self.mu)),
                    tol: BOUNDARY_TOL,
                });
            }
        }
        Ok(true)
    }

    /// Status of the spiral at angle `theta`.
    pub fn spiral_status(&self, theta: f64) -> SpiralStatus {
        let theta = wrap_angle(theta);
        if let Some(s) = &self.sector {
            if wrap_angle(theta - s.theta0).abs() >= s.alpha {
                return SpiralStatus::Disjoint;
            }
        }
        let mut cut = f64::INFINITY;
        for o in &self.obstructions {
            if wrap_angle(theta - o.angle(self.mu)).abs() <= ANGLE_TOL {
                cut = cut.min(o.cut_modulus(self.mu));
            }
        }
        if cut.is_infinite() {
            SpiralStatus::FullSpiral
        } else if cut <= 0.0 {
            SpiralStatus::Disjoint
        } else {
            SpiralStatus::Truncated(cut)
        }
    }

    /// Maximal spirallike sectors of the domain.
    ///
    /// In spiral-angle coordinates every obstruction blocks its angle (a
    /// truncated slit still prevents the full spiral line from lying inside),
    /// so candidate sectors are the angular gaps between consecutive
    /// obstruction angles, intersected with the enclosing sector when
    /// present. Amplitudes are capped at `2 pi`.
    pub fn maximal_spirallike_sectors(&self) -> Vec<SpirallikeSector> {
        let mut angles: Vec<f64> = self.obstructions.iter().map(|o| o.angle(self.mu)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles.dedup_by(|a, b| (*a - *b).abs() <= ANGLE_TOL);

        let mk = |center: f64, amplitude: f64| {
            SpirallikeSector::new(self.mu, amplitude, wrap_angle(center)).ok()
        };

        match &self.sector {
            None => {
                if angles.is_empty() {
                    // Whole plane: no maximal sector.
                    return Vec::new();
                }
                if angles.len() == 1 {
                    return mk(angles[0] + std::f64::consts::PI, 2.0 * std::f64::consts::PI)
                        .into_iter()
                        .collect();
                }
                let mut out = Vec::new();
                for i in 0..angles.len() {
                    let a = angles[i];
                    let b = if i + 1 < angles.len() {
                        angles[i + 1]
                    } else {
                        angles[0] + 2.0 * std::f64::consts::PI
                    };
                    if b - a > ANGLE_TOL {
                        out.extend(mk(0.5 * (a + b), b - a));
                    }
                }
                out
            }
            Some(s) => {
                let lo = s.theta0 - s.alpha;
                let hi = s.theta0 + s.alpha;
                let mut cuts: Vec<f64> = angles
                    .iter()
                    .map(|&a| {
                        let mut v = a;
                        while v < lo {
                            v += 2.0 * std::f64::consts::PI;
                        }
                        while v >= lo + 2.0 * std::f64::consts::PI {
                            v -= 2.0 * std::f64::consts::PI;
                        }
                        v
                    })
                    .filter(|&v| v > lo + ANGLE_TOL && v < hi - ANGLE_TOL)
                    .collect();
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut edges = vec![lo];
                edges.extend(cuts);
                edges.push(hi);
                let mut out = Vec::new();
                for w in edges.windows(2) {
                    if w[1] - w[0] > ANGLE_TOL {
                        out.extend(mk(0.5 * (w[0] + w[1]), w[1] - w[0]));
                    }
                }
                out
            }
        }
    }
}

/// Model-plane domain of a canonical model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelDomain {
    Starlike(StarlikeAtInfinityDomain),
    Spirallike(SpirallikeSlitDomain),
}

impl ModelDomain {
    pub fn contains(&self, w: Complex64) -> Result<bool> {
        match self {
            ModelDomain::Starlike(d) => d.contains(w),
            ModelDomain::Spirallike(d) => d.contains(w),
        }
    }
}

/// Upstairs geometry of a petal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PetalGeometry {
    /// `{a1 < Re w < a2}` in a non-elliptic model.
    Strip { a1: f64, a2: f64 },
    /// Maximal half-plane in a parabolic model.
    HalfPlane(HalfPlaneGeometry),
    /// Maximal spirallike sector in an elliptic model.
    Sector(SpirallikeSector),
}

/// Petal classification per the five boundary shapes.
///
/// The type is decided from the statuses of the petal's boundary lines (or
/// edge spirals) inside the Koenigs image:
/// 1. elliptic petal of full amplitude `2 pi` (slit complement),
/// 2. one boundary arc inside the disc plus an arc of the unit circle,
/// 3. two inner arcs joining the Denjoy-Wolff point and the repelling point,
/// 4. two inner arcs meeting only at the Denjoy-Wolff point,
/// 5. a Jordan curve touching the unit circle only at the Denjoy-Wolff point.
pub fn petal_shape_type(domain: &ModelDomain, geometry: &PetalGeometry) -> Result<u8> {
    match (domain, geometry) {
        (ModelDomain::Starlike(d), PetalGeometry::Strip { a1, a2 }) => {
            let s1 = d.vertical_line_status(*a1);
            let s2 = d.vertical_line_status(*a2);
            use LineStatus::*;
            Ok(match (s1, s2) {
                (FullLine, FullLine) => 3,
                (FullLine, Disjoint) | (Disjoint, FullLine) => 2,
                (FullLine, HalfLine(_)) | (HalfLine(_), FullLine) => 4,
                (HalfLine(_), HalfLine(_)) => 4,
                (HalfLine(_), Disjoint) | (Disjoint, HalfLine(_)) => 2,
                (Disjoint, Disjoint) => {
                    return Err(Error::Construction(
                        "both strip edges miss the image: the semigroup is a group".into(),
                    ))
                }
            })
        }
        (ModelDomain::Starlike(d), PetalGeometry::HalfPlane(h)) => {
            match d.vertical_line_status(h.a) {
                LineStatus::FullLine => Ok(5),
                LineStatus::HalfLine(_) => Ok(2),
                LineStatus::Disjoint => Err(Error::Construction(
                    "half-plane edge misses the image: the semigroup is a group".into(),
                )),
            }
        }
        (ModelDomain::Spirallike(d), PetalGeometry::Sector(s)) => {
            if s.amplitude() >= 2.0 * std::f64::consts::PI - ANGLE_TOL {
                return match d.spiral_status(s.theta0 + s.alpha) {
                    SpiralStatus::Disjoint => Err(Error::Construction(
                        "full-amplitude sector with empty edge spiral".into(),
                    )),
                    _ => Ok(1),
                };
            }
            let e1 = d.spiral_status(s.theta0 - s.alpha);
            let e2 = d.spiral_status(s.theta0 + s.alpha);
            use SpiralStatus::*;
            Ok(match (e1, e2) {
                (FullSpiral, FullSpiral) => 3,
                (Truncated(_), FullSpiral)
                | (FullSpiral, Truncated(_))
                | (Truncated(_), Truncated(_)) => 4,
                _ => {
                    return Err(Error::Construction(
                        "sector edge spiral misses the image: the semigroup is a group".into(),
                    ))
                }
            })
        }
        _ => Err(Error::InvalidParam(
            "petal geometry does not match the domain kind".into(),
        )),
    }
}

#[cfg(test)]
pub(crate) mod test_domains {
    use super::*;

    /// The width-3 comb with a central free strip (1,2), hyperbola walls on
    /// (0,1) and (2,3), and the full lines at Re = 1, 2 inside.
    pub fn example_type3() -> StarlikeAtInfinityDomain {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let n = 4000;
        for i in 0..n {
            // Cluster samples toward the asymptotes at x -> 1^- and 2^+.
            let t = (i as f64 + 1.0) / n as f64;
            let x = 1.0 - t.powi(3);
            if x > 0.0 && x < 1.0 {
                left.push((x, x / (x - 1.0)));
            }
            let xr = 2.0 + t.powi(3);
            if xr > 2.0 && xr < 3.0 {
                right.push((xr, (xr - 3.0) / (xr - 2.0)));
            }
        }
        left.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        right.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        StarlikeAtInfinityDomain::bounded(
            vec![
                ProfilePiece::Curve {
                    a: 0.0,
                    b: 1.0,
                    samples: left,
                },
                ProfilePiece::Free { a: 1.0, b: 2.0 },
                ProfilePiece::Curve {
                    a: 2.0,
                    b: 3.0,
                    samples: right,
                },
            ],
            0.0,
            3.0,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_domains::example_type3;
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contains_slit_plane() {
        let d = StarlikeAtInfinityDomain::slit_plane(1.0, 0.0);
        assert!(d.contains(c(1.0, 1.0)).unwrap());
        assert!(!d.contains(c(1.0, -1.0)).unwrap());
        assert!(d.contains(c(0.5, -100.0)).unwrap());
        assert!(d.contains(c(1.0, 1e-9)).unwrap());
        assert!(d.contains(c(1.0 + 1e-13, 5.0)).unwrap());
        assert!(d.contains(c(1.0 + 1e-13, -5.0)).is_err());
    }

    #[test]
    fn type3_contains_examples() {
        let d = example_type3();
        assert!(d.contains(c(1.5, 0.0)).unwrap());
        assert!(d.contains(c(1.0, -100.0)).unwrap());
        assert!(d.contains(c(0.5, 0.0)).unwrap());
        assert!(!d.contains(c(0.5, -2.0)).unwrap()); // wall at y = -1
        assert!(!d.contains(c(-0.5, 0.0)).unwrap());
    }

    #[test]
    fn maximal_strips_examples() {
        let t3 = example_type3();
        let strips = t3.maximal_strips();
        assert_eq!(strips.len(), 1);
        assert!((strips[0].0 - 1.0).abs() < 1e-12 && (strips[0].1 - 2.0).abs() < 1e-12);

        let plane = StarlikeAtInfinityDomain::new(
            CombProfile::new(vec![ProfilePiece::Free {
                a: f64::NEG_INFINITY,
                b: f64::INFINITY,
            }])
            .unwrap(),
            None,
        )
        .unwrap();
        assert!(plane.maximal_strips().is_empty());
        assert!(plane.maximal_half_planes().is_empty());
    }

    #[test]
    fn comb_with_two_slits_has_central_strip() {
        let pieces = vec![
            ProfilePiece::Free {
                a: f64::NEG_INFINITY,
                b: -2.0,
            },
            ProfilePiece::Slit { x: -2.0, top: 0.0 },
            ProfilePiece::Free { a: -2.0, b: 2.0 },
            ProfilePiece::Slit { x: 2.0, top: 0.0 },
            ProfilePiece::Free {
                a: 2.0,
                b: f64::INFINITY,
            },
        ];
        let d = StarlikeAtInfinityDomain::new(CombProfile::new(pieces).unwrap(), None).unwrap();
        assert_eq!(d.maximal_strips(), vec![(-2.0, 2.0)]);
        assert_eq!(d.maximal_half_planes().len(), 2);
    }

    #[test]
    fn slit_plane_halfplanes() {
        let d = StarlikeAtInfinityDomain::slit_plane(1.0, 0.0);
        let hps = d.maximal_half_planes();
        assert_eq!(hps.len(), 2);
        assert!(hps
            .iter()
            .any(|h| h.side == HalfPlaneSide::Left && (h.a - 1.0).abs() < 1e-12));
        assert!(hps
            .iter()
            .any(|h| h.side == HalfPlaneSide::Right && (h.a - 1.0).abs() < 1e-12));
        assert!(d.maximal_strips().is_empty());
    }

    #[test]
    fn vertical_line_statuses() {
        let t3 = example_type3();
        assert_eq!(t3.vertical_line_status(1.0), LineStatus::FullLine);
        assert_eq!(t3.vertical_line_status(1.5), LineStatus::FullLine);
        match t3.vertical_line_status(0.5) {
            LineStatus::HalfLine(r) => assert!((r - (-1.0)).abs() < 1e-6),
            s => panic!("expected half line, got {s:?}"),
        }
        assert_eq!(t3.vertical_line_status(-1.0), LineStatus::Disjoint);

        let s = StarlikeAtInfinityDomain::strip(0.0, 3.0);
        assert_eq!(s.vertical_line_status(-1.0), LineStatus::Disjoint);
    }

    #[test]
    fn usc_junction_validation_rejects_low_slit() {
        let pieces = vec![
            ProfilePiece::Curve {
                a: f64::NEG_INFINITY,
                b: 0.0,
                samples: vec![(-1.0, 5.0), (0.0, 5.0)],
            },
            ProfilePiece::Slit { x: 0.0, top: 0.0 },
            ProfilePiece::Free {
                a: 0.0,
                b: f64::INFINITY,
            },
        ];
        assert!(CombProfile::new(pieces).is_err());
    }

    #[test]
    fn horizontal_sections() {
        let pieces = vec![
            ProfilePiece::Free {
                a: f64::NEG_INFINITY,
                b: -1.0,
            },
            ProfilePiece::Slit { x: -1.0, top: 0.0 },
            ProfilePiece::Free { a: -1.0, b: 1.0 },
            ProfilePiece::Slit { x: 1.0, top: 0.0 },
            ProfilePiece::Free {
                a: 1.0,
                b: f64::INFINITY,
            },
        ];
        let d = StarlikeAtInfinityDomain::new(CombProfile::new(pieces).unwrap(), None).unwrap();
        let (lo, hi) = d.horizontal_section(0.0, -3.0).unwrap();
        assert!((lo - (-1.0)).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let (lo, hi) = d.horizontal_section(0.0, 3.0).unwrap();
        assert!(lo.is_infinite() && hi.is_infinite());
    }

    #[test]
    fn type3_horizontal_sections_narrow_with_depth() {
        let d = example_type3();
        let (lo, hi) = d.horizontal_section(1.5, -50.0).unwrap();
        // Walls hug x = 1 and x = 2 like 1/(|y|+1).
        assert!(lo > 0.9 && lo < 1.0, "lo = {lo}");
        assert!(hi > 2.0 && hi < 2.1, "hi = {hi}");
    }

    #[test]
    fn spirallike_koebe_statuses() {
        let k = SpirallikeSlitDomain::koebe_image();
        assert!(k.contains(c(0.0, 0.0)).unwrap());
        assert!(k.contains(c(-0.2, 0.0)).unwrap());
        assert!(!k.contains(c(-0.3, 0.0)).unwrap());
        match k.spiral_status(-std::f64::consts::PI) {
            SpiralStatus::Truncated(a) => assert!((a - 0.25).abs() < 1e-12),
            s => panic!("expected truncated, got {s:?}"),
        }
        assert_eq!(k.spiral_status(0.0), SpiralStatus::FullSpiral);

        let sectors = k.maximal_spirallike_sectors();
        assert_eq!(sectors.len(), 1);
        assert!((sectors[0].amplitude() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(sectors[0].theta0.abs() < 1e-12);
    }

    #[test]
    fn sector_domain_is_its_own_maximal_sector() {
        let mu = c(1.0, 0.0);
        let sect = SpirallikeSector::new(mu, std::f64::consts::PI, 0.0).unwrap();
        let d = SpirallikeSlitDomain::new(mu, vec![], Some(sect)).unwrap();
        let got = d.maximal_spirallike_sectors();
        assert_eq!(got.len(), 1);
        assert!((got[0].amplitude() - sect.amplitude()).abs() < 1e-12);
        assert!((got[0].theta0 - sect.theta0).abs() < 1e-12);
        assert_eq!(
            d.spiral_status(3.0 * std::f64::consts::PI / 4.0),
            SpiralStatus::Disjoint
        );
    }

    #[test]
    fn two_full_slits_give_two_half_sectors() {
        let mu = c(1.0, 0.0);
        let d = SpirallikeSlitDomain::new(
            mu,
            vec![SpiralSlit::full(c(1.0, 0.0)), SpiralSlit::full(c(-1.0, 0.0))],
            None,
        )
        .unwrap();
        // Oracle: dense angular scan of blocked angles decomposes the circle.
        let mut blocked = Vec::new();
        let n = 10000;
        for i in 0..n {
            let th = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            if matches!(d.spiral_status(th), SpiralStatus::Disjoint) {
                blocked.push(th);
            }
        }
        assert_eq!(blocked.len(), 2);
        let sectors = d.maximal_spirallike_sectors();
        assert_eq!(sectors.len(), 2);
        for s in &sectors {
            assert!((s.amplitude() - std::f64::consts::PI).abs() < 1e-12);
            assert!((s.theta0.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_types_for_known_geometries() {
        let t3 = ModelDomain::Starlike(example_type3());
        let g = PetalGeometry::Strip { a1: 1.0, a2: 2.0 };
        assert_eq!(petal_shape_type(&t3, &g).unwrap(), 3);

        let k = ModelDomain::Spirallike(SpirallikeSlitDomain::koebe_image());
        let sect = SpirallikeSlitDomain::koebe_image().maximal_spirallike_sectors()[0];
        assert_eq!(petal_shape_type(&k, &PetalGeometry::Sector(sect)).unwrap(), 1);
    }

    #[test]
    fn starlike_invariance_samples() {
        let t3 = example_type3();
        let mut rng_state = 123456789u64;
        let mut rnd = || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut tried = 0;
        while tried < 1000 {
            let w = c(3.0 * rnd(), 20.0 * rnd() - 10.0);
            if matches!(t3.contains(w), Ok(true)) {
                let t = 10.0 * rnd();
                assert!(t3.contains(w + c(0.0, t)).unwrap(), "w={w} t={t}");
                tried += 1;
            }
        }
    }

    #[test]
    fn spirallike_invariance_samples() {
        let k = SpirallikeSlitDomain::koebe_image();
        let mu = k.mu;
        let mut rng_state = 987654321u64;
        let mut rnd = || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut tried = 0;
        while tried < 1000 {
            let w = c(8.0 * rnd() - 4.0, 8.0 * rnd() - 4.0);
            if w.norm() > 1e-6 && matches!(k.contains(w), Ok(true)) {
                let t = 10.0 * rnd();
                let moved = (-mu * t).exp() * w;
                assert!(k.contains(moved).unwrap(), "w={w} t={t}");
                tried += 1;
            }
        }
    }

    #[test]
    fn strips_disjoint_and_not_in_halfplanes() {
        let pieces = vec![
            ProfilePiece::Free {
                a: f64::NEG_INFINITY,
                b: 0.0,
            },
            ProfilePiece::Slit { x: 0.0, top: 1.0 },
            ProfilePiece::Free { a: 0.0, b: 1.0 },
            ProfilePiece::Slit { x: 1.0, top: 0.0 },
            ProfilePiece::Free { a: 1.0, b: 3.0 },
            ProfilePiece::Slit { x: 3.0, top: -2.0 },
            ProfilePiece::Free {
                a: 3.0,
                b: f64::INFINITY,
            },
        ];
        let d = StarlikeAtInfinityDomain::new(CombProfile::new(pieces).unwrap(), None).unwrap();
        let strips = d.maximal_strips();
        assert_eq!(strips, vec![(0.0, 1.0), (1.0, 3.0)]);
        let hps = d.maximal_half_planes();
        for (a1, a2) in &strips {
            for h in &hps {
                let inside = match h.side {
                    HalfPlaneSide::Right => *a1 >= h.a,
                    HalfPlaneSide::Left => *a2 <= h.a,
                };
                assert!(!inside, "strip ({a1},{a2}) inside half-plane {h:?}");
            }
        }
    }
}
