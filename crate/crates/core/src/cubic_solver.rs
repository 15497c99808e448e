//! Cubic solver: basic sequences at both critical points advanced in
//! lockstep, the first to settle gives a root, the rest come from deflation.

use std::fmt;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::basic_family::{
    BasicSequenceState, IterationError, Tracker, DEFAULT_M_CAP, DEFAULT_TOL,
};
use crate::poly::{critical_points, deflate, solve_quadratic, PolyError, Polynomial};

pub const FIRST_ROOT_POLISH: usize = 5;
pub const OTHER_ROOT_POLISH: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Iteration(#[from] IterationError),
    #[error("neither basic sequence converged within m = {m_cap}")]
    NoConvergence {
        m_cap: usize,
        /// Terms produced at the first and at the second critical point.
        histories: [Vec<Complex64>; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootSource {
    CriticalPoint1,
    CriticalPoint2,
    PureRadical,
}

impl RootSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RootSource::CriticalPoint1 => "critical-point-1",
            RootSource::CriticalPoint2 => "critical-point-2",
            RootSource::PureRadical => "pure-radical",
        }
    }
}

impl fmt::Display for RootSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Sorted by real part, then imaginary part.
    pub roots: [Complex64; 3],
    /// `|p(root)|` on the input polynomial.
    pub residuals: [f64; 3],
    pub source: RootSource,
    /// `m` at which the winning sequence stopped (both sequences share it).
    pub terms_used: usize,
    /// Newton steps spent polishing, over all three roots.
    pub polished_iters: usize,
    /// The first root before polishing.
    pub first_root: Complex64,
    /// Both sequences settled at the same `m`; the smaller residual won.
    pub tie: bool,
}

impl Serialize for SolveReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Root {
            re: f64,
            im: f64,
        }
        let roots: Vec<Root> = self
            .roots
            .iter()
            .map(|z| Root { re: z.re, im: z.im })
            .collect();
        let mut s = serializer.serialize_struct("SolveReport", if self.tie { 6 } else { 5 })?;
        s.serialize_field("roots", &roots)?;
        s.serialize_field("residuals", &self.residuals)?;
        s.serialize_field("source", self.source.as_str())?;
        s.serialize_field("terms_used", &self.terms_used)?;
        s.serialize_field("polished_iters", &self.polished_iters)?;
        if self.tie {
            s.serialize_field("tie", &true)?;
        }
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polish {
    pub z: Complex64,
    pub iters: usize,
    /// `p'` vanished at `z`, which was returned unmodified.
    pub derivative_vanished: bool,
}

/// Newton steps until a step is below `1e-14·(1 + |z|)` or `max_iters` steps.
pub fn polish(p: &Polynomial, z0: Complex64, max_iters: usize) -> Polish {
    let dp = p.derivative();
    let mut z = z0;
    for k in 0..max_iters {
        let value = p.evaluate(z);
        if value == Complex64::new(0.0, 0.0) {
            return Polish {
                z,
                iters: k,
                derivative_vanished: false,
            };
        }
        let slope = dp
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |d| d.evaluate(z));
        if slope == Complex64::new(0.0, 0.0) {
            return Polish {
                z,
                iters: k,
                derivative_vanished: true,
            };
        }
        let step = value / slope;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Polish {
                z,
                iters: k,
                derivative_vanished: true,
            };
        }
        z -= step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            return Polish {
                z,
                iters: k + 1,
                derivative_vanished: false,
            };
        }
    }
    Polish {
        z,
        iters: max_iters,
        derivative_vanished: false,
    }
}

fn sort_roots(roots: &mut [Complex64; 3]) {
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

fn finish(
    p: &Polynomial,
    mut roots: [Complex64; 3],
    source: RootSource,
    terms_used: usize,
    polished_iters: usize,
    first_root: Complex64,
    tie: bool,
) -> SolveReport {
    sort_roots(&mut roots);
    SolveReport {
        roots,
        residuals: roots.map(|z| p.evaluate(z).norm()),
        source,
        terms_used,
        polished_iters,
        first_root,
        tie,
    }
}

/// Roots of a monic cubic whose derivative has a double root: after the
/// shift `z = y − a2/3` it reads `y³ + q0`.
fn pure_radical(p: &Polynomial, monic: &Polynomial) -> SolveReport {
    let shift = -monic.coefficients()[2] / 3.0;
    let q0 = monic.evaluate(shift);
    let target = -q0;
    let radius = target.norm().cbrt();
    let angle = target.arg() / 3.0;
    let third = std::f64::consts::TAU / 3.0;
    let roots =
        [0.0, 1.0, -1.0].map(|k: f64| Complex64::from_polar(radius, angle + k * third) + shift);
    finish(p, roots, RootSource::PureRadical, 0, 0, roots[0], false)
}

struct Lane {
    state: BasicSequenceState,
    tracker: Tracker,
    alive: bool,
}

impl Lane {
    fn new(p: &Polynomial, seed: Complex64) -> Result<Self, PolyError> {
        Ok(Lane {
            state: BasicSequenceState::new(p, seed)?,
            tracker: Tracker::default(),
            alive: true,
        })
    }

    /// Pushes the current term; true when this sequence has just converged.
    fn test(&mut self, tol: f64) -> bool {
        if !self.alive {
            return false;
        }
        let hit = self.tracker.push(self.state.term(), tol);
        if !hit && (!self.state.is_finite() || self.tracker.stalled()) {
            self.alive = false;
        }
        hit
    }
}

/// Solves a cubic. `tol` is the successive-difference tolerance of the
/// basic sequences, `m_cap` the largest `m` either sequence may reach.
pub fn solve(p: &Polynomial, tol: f64, m_cap: usize) -> Result<SolveReport, SolveError> {
    if p.degree() != 3 {
        return Err(PolyError::WrongDegree {
            expected: 3,
            found: p.degree(),
        }
        .into());
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(IterationError::Tolerance(tol).into());
    }
    if m_cap < 3 {
        return Err(IterationError::Cap { cap: m_cap, min: 3 }.into());
    }
    let monic = p.monic();
    let seeds = match critical_points(&monic) {
        Ok(q) => [q.r1, q.r2],
        Err(PolyError::RepeatedCriticalPoint(_)) => return Ok(pure_radical(p, &monic)),
        Err(e) => return Err(e.into()),
    };

    let mut lanes = [Lane::new(&monic, seeds[0])?, Lane::new(&monic, seeds[1])?];
    let (winner, tie) = loop {
        let hits = [lanes[0].test(tol), lanes[1].test(tol)];
        match hits {
            [true, true] => {
                let res = lanes
                    .each_ref()
                    .map(|l| p.evaluate(l.tracker.last().unwrap()).norm());
                break (if res[1] < res[0] { 1 } else { 0 }, true);
            }
            [true, false] => break (0, false),
            [false, true] => break (1, false),
            [false, false] => {}
        }
        if lanes.iter().all(|l| !l.alive) || lanes[0].state.m() >= m_cap {
            let [a, b] = lanes;
            return Err(SolveError::NoConvergence {
                m_cap,
                histories: [a.tracker.history, b.tracker.history],
            });
        }
        for lane in lanes.iter_mut() {
            lane.state.advance();
        }
    };

    let terms_used = lanes[winner].state.m();
    let first_root = lanes[winner].tracker.last().unwrap();
    let source = if winner == 0 {
        RootSource::CriticalPoint1
    } else {
        RootSource::CriticalPoint2
    };

    let first = polish(p, first_root, FIRST_ROOT_POLISH);
    let quadratic = deflate(&monic, first.z)?.quotient;
    let rest = solve_quadratic(&quadratic)?;
    let second = polish(p, rest.r1, OTHER_ROOT_POLISH);
    let third = polish(p, rest.r2, OTHER_ROOT_POLISH);
    Ok(finish(
        p,
        [first.z, second.z, third.z],
        source,
        terms_used,
        first.iters + second.iters + third.iters,
        first_root,
        tie,
    ))
}

/// [`solve`] with the default tolerance and cap.
pub fn solve_default(p: &Polynomial) -> Result<SolveReport, SolveError> {
    solve(p, DEFAULT_TOL, DEFAULT_M_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cardano_oracle;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn worked_example() {
        let p: Polynomial = "2,-2,0,1".parse().unwrap();
        let report = solve(&p, 1e-10, 500).unwrap();
        assert_eq!(report.source, RootSource::CriticalPoint2);
        assert!((report.first_root.re + 1.7693).abs() < 1e-4);
        let expected = [
            c(-1.7692923542386314, 0.0),
            c(0.8846461771193157, -0.5897428050222055),
            c(0.8846461771193157, 0.5897428050222055),
        ];
        for (got, want) in report.roots.iter().zip(expected) {
            assert!((got - want).norm() < 1e-14, "{got} vs {want}");
        }
        assert!(report.residuals.iter().all(|&r| r < 1e-12));
        assert!(!report.tie);
    }

    #[test]
    fn pure_radical_path() {
        let p: Polynomial = "-8,0,0,1".parse().unwrap();
        let report = solve_default(&p).unwrap();
        assert_eq!(report.source, RootSource::PureRadical);
        let s3 = 3f64.sqrt();
        let expected = [c(-1.0, -s3), c(-1.0, s3), c(2.0, 0.0)];
        for (got, want) in report.roots.iter().zip(expected) {
            assert!((got - want).norm() < 1e-14, "{got}");
        }
        // (z - 1)^3 after a shift
        let cube: Polynomial = "-1,3,-3,1".parse().unwrap();
        let report = solve_default(&cube).unwrap();
        assert!(report.roots.iter().all(|z| (z - 1.0).norm() < 1e-15));
    }

    #[test]
    fn non_monic_input() {
        let p: Polynomial = "2,-2,0,1".parse().unwrap();
        let scaled = p.scaled(c(-3.0, 2.0)).unwrap();
        let a = solve_default(&p).unwrap();
        let b = solve_default(&scaled).unwrap();
        for (x, y) in a.roots.iter().zip(b.roots.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_cardano_on_a_complex_cubic() {
        let roots = [c(0.3, -0.2), c(-0.7, 0.5), c(0.1, 0.9)];
        let p = Polynomial::from_roots(&roots);
        let report = solve_default(&p).unwrap();
        let mut oracle = cardano_oracle(&p).unwrap();
        sort_roots(&mut oracle);
        for (x, y) in report.roots.iter().zip(oracle) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn polish_examples() {
        let p: Polynomial = "2,-2,0,1".parse().unwrap();
        let root = c(-1.7692923542386314, 0.0);
        let at_root = polish(&p, root, 5);
        assert!((at_root.z - root).norm() < 1e-15 && at_root.iters <= 1);
        let near = polish(&p, c(-1.77, 0.0), 5);
        assert!((near.z - root).norm() < 1e-15);
        assert!(p.evaluate(near.z).norm() < 1e-12);
        let cycle = polish(&p, c(0.0, 0.0), 2);
        assert_eq!(
            cycle,
            Polish {
                z: c(0.0, 0.0),
                iters: 2,
                derivative_vanished: false
            }
        );
        let stuck = polish(&"-1,0,1".parse().unwrap(), c(0.0, 0.0), 3);
        assert!(stuck.derivative_vanished && stuck.z == c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p: Polynomial = "2,-2,0,1".parse().unwrap();
        assert!(matches!(solve(&p, 0.0, 500), Err(SolveError::Iteration(_))));
        assert!(matches!(solve(&p, 1e-10, 2), Err(SolveError::Iteration(_))));
        assert!(matches!(
            solve(&"1,2".parse().unwrap(), 1e-10, 500),
            Err(SolveError::Poly(_))
        ));
    }

    #[test]
    fn tiny_cap_reports_both_histories() {
        let p: Polynomial = "2,-2,0,1".parse().unwrap();
        match solve(&p, 1e-10, 3) {
            Err(SolveError::NoConvergence { m_cap, histories }) => {
                assert_eq!(m_cap, 3);
                assert!(!histories[0].is_empty() && !histories[1].is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_shape() {
        let report = solve_default(&"-8,0,0,1".parse().unwrap()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["source"], "pure-radical");
        assert_eq!(json["roots"].as_array().unwrap().len(), 3);
        assert_eq!(json["roots"][2]["re"], 2.0);
        assert!(json.get("tie").is_none());
        assert_eq!(json.as_object().unwrap().len(), 5);
    }
}
