//! Voronoi cells of the three roots of a cubic, the canonical form with roots
//! `{-1, 1, w}`, and executable checks of the critical-point cell theorems.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::basic_family::BOUNDARY_TOL;
use crate::poly::{
    cardano_oracle, complex_sqrt_decomposed, critical_points, PolyError, Polynomial,
};

/// `b` below this (relative to the pairing's half-gap) means collinear roots.
pub const COLLINEAR_TOL: f64 = 1e-12;
/// Half-width of the band around `b = √3` that the strong classification excludes.
pub const SQRT3_TOL: f64 = 1e-9;
/// `a` at or below this counts as `a = 0`.
pub const A_ZERO_TOL: f64 = 1e-12;
/// Barycentric slack for the convex-hull test.
pub const HULL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoronoiError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("roots are collinear (b = {0:e})")]
    Collinear(f64),
    #[error("roots {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("invalid pairing ({0}, {1})")]
    Pairing(usize, usize),
    #[error("canonical parameter out of range: a = {a}, b = {b}")]
    Parameters { a: f64, b: f64 },
}

/// Cell of a point: the index of its strictly nearest root, or a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Root(usize),
    Boundary,
}

impl Cell {
    pub fn root(self) -> Option<usize> {
        match self {
            Cell::Root(i) => Some(i),
            Cell::Boundary => None,
        }
    }
}

pub fn nearest_root(point: Complex64, roots: &[Complex64; 3]) -> Cell {
    let mut order = [0usize, 1, 2];
    let dist = roots.map(|r| (r - point).norm());
    order.sort_by(|&i, &j| dist[i].total_cmp(&dist[j]));
    let (near, second) = (dist[order[0]], dist[order[1]]);
    if second == 0.0 || (second - near) / second < BOUNDARY_TOL {
        Cell::Boundary
    } else {
        Cell::Root(order[0])
    }
}

/// `z ↦ scale·z + shift`, followed by complex conjugation when `conjugate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub scale: Complex64,
    pub shift: Complex64,
    pub conjugate: bool,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        scale: Complex64::new(1.0, 0.0),
        shift: Complex64::new(0.0, 0.0),
        conjugate: false,
    };

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let u = self.scale * z + self.shift;
        if self.conjugate {
            u.conj()
        } else {
            u
        }
    }

    pub fn invert(&self, z: Complex64) -> Complex64 {
        let u = if self.conjugate { z.conj() } else { z };
        (u - self.shift) / self.scale
    }
}

/// Cubic with roots `{-1, 1, w}`, `w = a + ib`, `a ≥ 0`, `b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCubic {
    pub w: Complex64,
    pub a: f64,
    pub b: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// Original coordinates to canonical ones.
    pub transform: Transform,
    /// `labels[k]` is the original index of canonical root `k` (order `-1, 1, w`).
    pub labels: [usize; 3],
}

impl CanonicalCubic {
    pub fn from_parameters(a: f64, b: f64) -> Result<Self, VoronoiError> {
        if !(a >= 0.0 && a.is_finite() && b.is_finite()) || b < 0.0 {
            return Err(VoronoiError::Parameters { a, b });
        }
        if b < COLLINEAR_TOL {
            return Err(VoronoiError::Collinear(b));
        }
        let s = a * a - b * b + 3.0;
        let d = 2.0 * a * b;
        let (big_a, big_b) = complex_sqrt_decomposed(s, d)?;
        Ok(CanonicalCubic {
            w: Complex64::new(a, b),
            a,
            b,
            c1: Complex64::new((a + big_a) / 3.0, (b + big_b) / 3.0),
            c2: Complex64::new((a - big_a) / 3.0, (b - big_b) / 3.0),
            transform: Transform::IDENTITY,
            labels: [0, 1, 2],
        })
    }

    /// Similarity sending `roots[pairing.0]` to −1 and `roots[pairing.1]` to 1,
    /// then negating and/or conjugating so the third root has `a ≥ 0`, `b ≥ 0`.
    pub fn canonicalize(
        roots: &[Complex64; 3],
        pairing: (usize, usize),
    ) -> Result<Self, VoronoiError> {
        let (i, j) = pairing;
        if i > 2 || j > 2 || i == j {
            return Err(VoronoiError::Pairing(i, j));
        }
        let k = 3 - i - j;
        for (x, y) in [(i, j), (i, k), (j, k)] {
            if roots[x] == roots[y] {
                return Err(VoronoiError::Coincident(x.min(y), x.max(y)));
            }
        }
        let half = (roots[j] - roots[i]) / 2.0;
        let mid = (roots[i] + roots[j]) / 2.0;
        let mut scale = half.inv();
        let mut labels = [i, j, k];
        let mut w = (roots[k] - mid) * scale;
        if w.re < 0.0 {
            scale = -scale;
            w = -w;
            labels.swap(0, 1);
        }
        let conjugate = w.im < 0.0;
        if conjugate {
            w = w.conj();
        }
        let mut canon = Self::from_parameters(w.re.max(0.0), w.im.abs())?;
        canon.transform = Transform {
            scale,
            shift: -mid * scale,
            conjugate,
        };
        canon.labels = labels;
        Ok(canon)
    }

    /// Canonical form pairing the two roots that are farthest apart.
    pub fn from_roots(roots: &[Complex64; 3]) -> Result<Self, VoronoiError> {
        Self::canonicalize(roots, widest_pair(roots))
    }

    pub fn roots(&self) -> [Complex64; 3] {
        [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), self.w]
    }

    /// `(z² − 1)(z − w)`.
    pub fn polynomial(&self) -> Polynomial {
        Polynomial::from_roots(&self.roots())
    }

    pub fn critical_points(&self) -> [Complex64; 2] {
        [self.c1, self.c2]
    }
}

pub fn widest_pair(roots: &[Complex64; 3]) -> (usize, usize) {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut best = pairs[0];
    for &(x, y) in &pairs[1..] {
        if (roots[x] - roots[y]).norm() > (roots[best.0] - roots[best.1]).norm() {
            best = (x, y);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem2Case {
    APositive,
    AZeroBSmall,
    AZeroBLarge,
    ExcludedBSqrt3,
    ExcludedCollinear,
}

impl Theorem2Case {
    pub const ALL: [Theorem2Case; 5] = [
        Theorem2Case::APositive,
        Theorem2Case::AZeroBSmall,
        Theorem2Case::AZeroBLarge,
        Theorem2Case::ExcludedBSqrt3,
        Theorem2Case::ExcludedCollinear,
    ];

    pub fn of(a: f64, b: f64) -> Self {
        let sqrt3 = 3f64.sqrt();
        if b < COLLINEAR_TOL {
            Theorem2Case::ExcludedCollinear
        } else if (b - sqrt3).abs() < SQRT3_TOL {
            Theorem2Case::ExcludedBSqrt3
        } else if a > A_ZERO_TOL {
            Theorem2Case::APositive
        } else if b < sqrt3 {
            Theorem2Case::AZeroBSmall
        } else {
            Theorem2Case::AZeroBLarge
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem2Case::APositive => "a-positive",
            Theorem2Case::AZeroBSmall => "a-zero-b-small",
            Theorem2Case::AZeroBLarge => "a-zero-b-large",
            Theorem2Case::ExcludedBSqrt3 => "excluded-b-sqrt3",
            Theorem2Case::ExcludedCollinear => "excluded-collinear",
        }
    }

    pub fn is_excluded(self) -> bool {
        matches!(
            self,
            Theorem2Case::ExcludedBSqrt3 | Theorem2Case::ExcludedCollinear
        )
    }
}

impl fmt::Display for Theorem2Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cells of the two critical points. Root indices use the canonical order
/// `(-1, 1, w)` unless the verdict was mapped back with [`classify_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoronoiVerdict {
    pub c1: Cell,
    pub c2: Cell,
    pub strong: bool,
    pub case: Theorem2Case,
}

impl VoronoiVerdict {
    fn new(c1: Cell, c2: Cell, case: Theorem2Case) -> Self {
        VoronoiVerdict {
            c1,
            c2,
            strong: c1 != Cell::Boundary && c2 != Cell::Boundary,
            case,
        }
    }

    /// At least one critical point has the Voronoi property.
    pub fn has_voronoi_point(&self) -> bool {
        self.c1 != Cell::Boundary || self.c2 != Cell::Boundary
    }
}

fn canonical_label(cell: Cell) -> &'static str {
    match cell {
        Cell::Root(0) => "-1",
        Cell::Root(1) => "1",
        Cell::Root(_) => "w",
        Cell::Boundary => "boundary",
    }
}

impl fmt::Display for VoronoiVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "case={} c1->{} c2->{} strong={}",
            self.case,
            canonical_label(self.c1),
            canonical_label(self.c2),
            self.strong
        )
    }
}

pub fn classify(c: &CanonicalCubic) -> VoronoiVerdict {
    let roots = c.roots();
    VoronoiVerdict::new(
        nearest_root(c.c1, &roots),
        nearest_root(c.c2, &roots),
        Theorem2Case::of(c.a, c.b),
    )
}

/// Verdict in the original root labels. Collinear roots get the
/// `excluded-collinear` case with cells computed directly.
pub fn classify_roots(roots: &[Complex64; 3]) -> Result<VoronoiVerdict, VoronoiError> {
    match CanonicalCubic::from_roots(roots) {
        Ok(canon) => {
            let v = classify(&canon);
            let back = |cell: Cell| match cell {
                Cell::Root(k) => Cell::Root(canon.labels[k]),
                Cell::Boundary => Cell::Boundary,
            };
            Ok(VoronoiVerdict {
                c1: back(v.c1),
                c2: back(v.c2),
                ..v
            })
        }
        Err(VoronoiError::Collinear(_)) => {
            let p = Polynomial::from_roots(roots);
            let cp = critical_points(&p)?;
            Ok(VoronoiVerdict::new(
                nearest_root(cp.r1, roots),
                nearest_root(cp.r2, roots),
                Theorem2Case::ExcludedCollinear,
            ))
        }
        Err(e) => Err(e),
    }
}

/// Closed convex hull membership, with a segment test for collinear roots.
pub fn in_convex_hull(point: Complex64, roots: &[Complex64; 3]) -> bool {
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let (i, j) = widest_pair(roots);
    let span = roots[j] - roots[i];
    let diam = span.norm();
    if diam == 0.0 {
        return (point - roots[0]).norm() <= HULL_TOL;
    }
    let [r0, r1, r2] = *roots;
    let area = cross(r1 - r0, r2 - r0);
    if area.abs() <= COLLINEAR_TOL * diam * diam {
        let rel = (point - roots[i]) / span;
        return rel.re >= -HULL_TOL && rel.re <= 1.0 + HULL_TOL && rel.im.abs() <= HULL_TOL;
    }
    let l0 = cross(r1 - point, r2 - point) / area;
    let l1 = cross(r2 - point, r0 - point) / area;
    let l2 = 1.0 - l0 - l1;
    [l0, l1, l2].iter().all(|&l| l >= -HULL_TOL)
}

/// Both critical points lie in the convex hull of the roots.
pub fn gauss_lucas_check(p: &Polynomial) -> Result<bool, PolyError> {
    let roots = cardano_oracle(p)?;
    let points = match critical_points(p) {
        Ok(q) => [q.r1, q.r2],
        Err(PolyError::RepeatedCriticalPoint(c)) => [c, c],
        Err(e) => return Err(e),
    };
    Ok(points.iter().all(|&c| in_convex_hull(c, &roots)))
}

/// `A`, `B` with `A + iB = √(w² + 3)`.
fn sqrt_parts(c: &CanonicalCubic) -> Result<(f64, f64), PolyError> {
    let (a, b) = (c.a, c.b);
    complex_sqrt_decomposed(a * a - b * b + 3.0, 2.0 * a * b)
}

/// Distances from `c2` to `w` and to −1, via their closed forms.
pub fn theorem2_distance_gap(c: &CanonicalCubic) -> Result<(f64, f64), VoronoiError> {
    if (c.b - 3f64.sqrt()).abs() < SQRT3_TOL {
        return Err(VoronoiError::Parameters { a: c.a, b: c.b });
    }
    let (a, b) = (c.a, c.b);
    let (big_a, big_b) = sqrt_parts(c)?;
    let d1 = ((2.0 * a + big_a).powi(2) + (2.0 * b + big_b).powi(2)).sqrt() / 3.0;
    let d2 = ((a - big_a + 3.0).powi(2) + (big_b - b).powi(2)).sqrt() / 3.0;
    Ok((d1, d2))
}

/// `a² + b² + 2aA + 2bB + 2A − (2a + 3)`; positive exactly when `d1 > d2`.
pub fn distance_gap_margin(c: &CanonicalCubic) -> Result<f64, PolyError> {
    let (a, b) = (c.a, c.b);
    let (big_a, big_b) = sqrt_parts(c)?;
    Ok(a * a + b * b + 2.0 * a * big_a + 2.0 * b * big_b + 2.0 * big_a - (2.0 * a + 3.0))
}

/// Outcome of every theorem check on one canonical instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit {
    pub verdict: VoronoiVerdict,
    /// `None` when the case is excluded.
    pub theorem1: Option<bool>,
    pub theorem2: Option<bool>,
    pub gap_margin: Option<bool>,
    pub gauss_lucas: bool,
    /// `|3·c1·c2 + 1|`.
    pub product_residual: f64,
}

impl Audit {
    pub fn violations(&self) -> usize {
        [
            self.theorem1,
            self.theorem2,
            self.gap_margin,
            Some(self.gauss_lucas),
        ]
        .iter()
        .filter(|x| **x == Some(false))
        .count()
    }
}

pub fn audit(c: &CanonicalCubic) -> Result<Audit, VoronoiError> {
    let verdict = classify(c);
    let (minus, plus, w) = (Cell::Root(0), Cell::Root(1), Cell::Root(2));
    let theorem2 = match verdict.case {
        Theorem2Case::APositive => Some(verdict.c2 == minus),
        Theorem2Case::AZeroBSmall => Some(verdict.c2 == minus && verdict.c1 == plus),
        Theorem2Case::AZeroBLarge => Some(verdict.c1 == w),
        _ => None,
    };
    let excluded = verdict.case.is_excluded();
    let gap_margin = if excluded {
        None
    } else {
        Some(distance_gap_margin(c)? > 0.0)
    };
    Ok(Audit {
        verdict,
        theorem1: (!excluded).then(|| verdict.has_voronoi_point()),
        theorem2,
        gap_margin,
        gauss_lucas: gauss_lucas_check(&c.polynomial())?,
        product_residual: (3.0 * c.c1 * c.c2 + 1.0).norm(),
    })
}
