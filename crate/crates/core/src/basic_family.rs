//! The basic family of iteration functions and the basic sequence.
//!
//! For a fixed seed ξ the member `B_m(ξ) = ξ - p(ξ) D_{m-2}(ξ) / D_{m-1}(ξ)`
//! only needs the scalar sequence `D_m(ξ)`, which for a monic cubic obeys
//!
//! ```text
//! d_m = p'(ξ) d_{m-1} - 0.5 p(ξ) p''(ξ) d_{m-2} + p(ξ)^2 d_{m-3},
//! d_0 = 1, d_{-1} = d_{-2} = 0.
//! ```
//!
//! The recurrence is linear and homogeneous, so the three-term window can be
//! renormalized at will without changing any ratio. [`BasicSequenceState`]
//! does that whenever the window leaves `[1e-100, 1e100]` in magnitude.

use num_complex::Complex64;
use thiserror::Error;

use crate::poly::{format_complex, PolyError, Polynomial};

pub const RESCALE_ABOVE: f64 = 1e100;
pub const RESCALE_BELOW: f64 = 1e-100;
pub const DEFAULT_M_CAP: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Number of trailing history terms kept in text records.
pub const RECORD_HISTORY: usize = 32;

/// Relative gap below which two root distances count as a tie.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IterationError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("iteration cap {cap} is below the minimum {min}")]
    Cap { cap: usize, min: usize },
    #[error("B_{0} has no closed form here; only Newton (2) and Halley (3) are available")]
    Member(usize),
    #[error("point is equidistant from its two nearest roots")]
    Boundary,
}

/// Rolling window of the cubic `d_m` recurrence at a fixed seed.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSequenceState {
    xi: Complex64,
    p0: Complex64,
    p1: Complex64,
    p2: Complex64,
    /// `(d_{m-1}, d_{m-2}, d_{m-3})`, up to the accumulated scale factor.
    window: [Complex64; 3],
    m: usize,
    rescale_count: u32,
    /// Natural log of the product of all divisors applied to the window.
    log_scale: f64,
}

impl BasicSequenceState {
    /// Starts the recurrence at `m = 2` for the monic normalization of `p`.
    /// `B_m` does not depend on the leading coefficient, so nothing is lost.
    pub fn new(p: &Polynomial, xi: Complex64) -> Result<Self, PolyError> {
        if p.degree() != 3 {
            return Err(PolyError::WrongDegree {
                expected: 3,
                found: p.degree(),
            });
        }
        let d = p.monic().derivatives_up_to(xi, 2)?;
        Ok(BasicSequenceState {
            xi,
            p0: d[0],
            p1: d[1],
            p2: d[2],
            window: [d[1], Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            m: 2,
            rescale_count: 0,
            log_scale: 0.0,
        })
    }

    pub fn seed(&self) -> Complex64 {
        self.xi
    }

    /// Index of the member that [`term`](Self::term) evaluates.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn window(&self) -> [Complex64; 3] {
        self.window
    }

    pub fn rescale_count(&self) -> u32 {
        self.rescale_count
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `d_{m-1-k}` with all rescaling undone. Overflows for long runs; meant
    /// for short cross-checks.
    pub fn unscaled(&self, k: usize) -> Complex64 {
        self.window[k] * self.log_scale.exp()
    }

    /// `B_m(ξ)`, or `None` when `d_{m-1}` vanishes and the ratio is undefined.
    pub fn term(&self) -> Option<Complex64> {
        if self.p0 == Complex64::new(0.0, 0.0) {
            return Some(self.xi);
        }
        let b = self.xi - self.p0 * (self.window[1] / self.window[0]);
        (b.re.is_finite() && b.im.is_finite()).then_some(b)
    }

    pub fn is_finite(&self) -> bool {
        self.window
            .iter()
            .all(|w| w.re.is_finite() && w.im.is_finite())
    }

    /// One application of the recurrence: `m` advances by one.
    pub fn advance(&mut self) {
        let mut next = self.recur();
        if !(next.re.is_finite() && next.im.is_finite()) && self.is_finite() {
            let mag = self.magnitude();
            self.divide(mag);
            next = self.recur();
        }
        self.window = [next, self.window[0], self.window[1]];
        self.m += 1;
        let mag = self.magnitude();
        if mag > RESCALE_ABOVE || (mag < RESCALE_BELOW && mag > 0.0) {
            self.divide(mag);
        }
    }

    /// Multiplies the window by `factor`. The sequence of `B_m` is unchanged.
    pub fn scale_window(&mut self, factor: f64) {
        for w in &mut self.window {
            *w *= factor;
        }
        self.log_scale -= factor.ln();
    }

    fn recur(&self) -> Complex64 {
        let [d1, d2, d3] = self.window;
        self.p1 * d1 - 0.5 * self.p0 * self.p2 * d2 + self.p0 * self.p0 * d3
    }

    fn magnitude(&self) -> f64 {
        self.window.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    fn divide(&mut self, mag: f64) {
        for w in &mut self.window {
            *w /= mag;
        }
        self.log_scale += mag.ln();
        self.rescale_count += 1;
    }
}

/// State-in/state-out form of [`BasicSequenceState::advance`].
pub fn d_step_cubic(mut state: BasicSequenceState) -> BasicSequenceState {
    state.advance();
    state
}

/// `D_m(z)` from the full-degree recurrence
/// `D_m = sum_{i=1..n} (-1)^(i-1) p^(i-1) p^(i)/i! D_{m-i}`, with `D_0 = 1`
/// and `D_k = 0` for negative `k`. No rescaling; meant for small `m`.
pub fn general_d(p: &Polynomial, z: Complex64, m: i64) -> Complex64 {
    if m < 0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = p.degree();
    let pz = p.evaluate(z);
    // coef[i] = (-1)^(i-1) p(z)^(i-1) p^(i)(z) / i!, for i = 1..=n
    let mut coef = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut derivative = p.derivative();
    let mut factorial = 1.0;
    let mut power = Complex64::new(1.0, 0.0);
    for (i, slot) in coef.iter_mut().enumerate().skip(1) {
        factorial *= i as f64;
        let dp = derivative.take().expect("order within degree");
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        *slot = sign * power * dp.evaluate(z) / factorial;
        power *= pz;
        derivative = dp.derivative();
    }
    let m = m as usize;
    let mut d = vec![Complex64::new(0.0, 0.0); m + 1];
    d[0] = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        d[k] = (1..=n.min(k)).map(|i| coef[i] * d[k - i]).sum();
    }
    d[m]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    SuccessiveDiffBelowTol,
    MCapReached,
    NonFiniteRatio,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::SuccessiveDiffBelowTol => "successive-diff-below-tol",
            StopReason::MCapReached => "m-cap-reached",
            StopReason::NonFiniteRatio => "non-finite-ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Last term produced.
    pub limit: Complex64,
    /// Final `m` for the basic sequence; iteration count for a fixed-point run.
    pub terms_used: usize,
    pub history: Vec<Complex64>,
    pub stop_reason: StopReason,
    /// `|p(limit)|`, diagnostic only.
    pub residual: f64,
}

impl ConvergenceReport {
    /// `key=value` lines; history keeps the last `max_history` terms.
    pub fn to_record(&self, max_history: usize) -> String {
        let skip = self.history.len().saturating_sub(max_history);
        let history: Vec<String> = self.history[skip..]
            .iter()
            .map(|&z| format_complex(z))
            .collect();
        format!(
            "converged={}\nlimit={}\nterms_used={}\nstop_reason={}\nresidual={:e}\nhistory={}\n",
            self.converged,
            format_complex(self.limit),
            self.terms_used,
            self.stop_reason.as_str(),
            self.residual,
            history.join(","),
        )
    }
}

/// Successive-difference bookkeeping shared by the basic sequence and the
/// interlaced solver.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tracker {
    pub history: Vec<Complex64>,
    undefined_run: usize,
}

impl Tracker {
    /// Records a term; true once it lies within `tol` of the previous term.
    pub fn push(&mut self, term: Option<Complex64>, tol: f64) -> bool {
        let Some(b) = term else {
            self.undefined_run += 1;
            return false;
        };
        self.undefined_run = 0;
        let hit = self
            .history
            .last()
            .is_some_and(|prev| (b - prev).norm() < tol);
        self.history.push(b);
        hit
    }

    /// The recurrence cannot produce three vanishing `d_{m-1}` in a row unless
    /// the window has gone non-finite.
    pub fn stalled(&self) -> bool {
        self.undefined_run >= 3
    }

    pub fn last(&self) -> Option<Complex64> {
        self.history.last().copied()
    }
}

fn check_tol(tol: f64) -> Result<(), IterationError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(IterationError::Tolerance(tol))
    }
}

/// Streams `B_2(ξ), B_3(ξ), ...` until two successive terms agree to `tol`,
/// `m` reaches `m_cap`, or the ratio stops being defined.
pub fn basic_sequence(
    p: &Polynomial,
    xi: Complex64,
    tol: f64,
    m_cap: usize,
) -> Result<ConvergenceReport, IterationError> {
    check_tol(tol)?;
    if m_cap < 3 {
        return Err(IterationError::Cap { cap: m_cap, min: 3 });
    }
    let mut state = BasicSequenceState::new(p, xi)?;
    let mut tracker = Tracker::default();
    let stop_reason = loop {
        if tracker.push(state.term(), tol) {
            break StopReason::SuccessiveDiffBelowTol;
        }
        if !state.is_finite() || tracker.stalled() {
            break StopReason::NonFiniteRatio;
        }
        if state.m() >= m_cap {
            break StopReason::MCapReached;
        }
        state.advance();
    };
    let limit = tracker.last().unwrap_or(xi);
    Ok(ConvergenceReport {
        converged: stop_reason == StopReason::SuccessiveDiffBelowTol,
        limit,
        terms_used: state.m(),
        history: tracker.history,
        stop_reason,
        residual: p.evaluate(limit).norm(),
    })
}

/// One step of Newton (`member = 2`) or Halley (`member = 3`).
/// `None` when the step's denominator vanishes or the result is not finite.
pub fn member_step(p: &Polynomial, member: usize, z: Complex64) -> Option<Complex64> {
    let order = 2.min(p.degree());
    let d = p.derivatives_up_to(z, order).ok()?;
    let zero = Complex64::new(0.0, 0.0);
    if d[0] == zero {
        return Some(z);
    }
    let p1 = *d.get(1).unwrap_or(&zero);
    let p2 = *d.get(2).unwrap_or(&zero);
    let next = match member {
        2 => {
            if p1 == zero {
                return None;
            }
            z - d[0] / p1
        }
        3 => {
            let denom = 2.0 * p1 * p1 - d[0] * p2;
            if denom == zero {
                return None;
            }
            z - 2.0 * d[0] * p1 / denom
        }
        _ => return None,
    };
    (next.re.is_finite() && next.im.is_finite()).then_some(next)
}

/// Fixed-point iteration `z_{k+1} = B_m(z_k)` for Newton or Halley.
///
/// `terms_used` counts the steps taken before the one that moved less than
/// `tol`, so a seed that is already a root reports 0. History starts with `z0`.
pub fn fixed_point_member(
    p: &Polynomial,
    member: usize,
    z0: Complex64,
    tol: f64,
    iter_cap: usize,
) -> Result<ConvergenceReport, IterationError> {
    if member != 2 && member != 3 {
        return Err(IterationError::Member(member));
    }
    check_tol(tol)?;
    let mut z = z0;
    let mut history = vec![z0];
    let mut outcome = (StopReason::MCapReached, iter_cap);
    for k in 0..iter_cap {
        match member_step(p, member, z) {
            None => {
                outcome = (StopReason::NonFiniteRatio, k);
                break;
            }
            Some(next) => {
                history.push(next);
                let moved = (next - z).norm();
                z = next;
                if moved < tol {
                    outcome = (StopReason::SuccessiveDiffBelowTol, k);
                    break;
                }
            }
        }
    }
    Ok(ConvergenceReport {
        converged: outcome.0 == StopReason::SuccessiveDiffBelowTol,
        limit: z,
        terms_used: outcome.1,
        history,
        stop_reason: outcome.0,
        residual: p.evaluate(z).norm(),
    })
}

/// Distance from `w` to its nearest root over the distance to the second nearest.
pub fn rate_ratio(roots: &[Complex64; 3], w: Complex64) -> Result<f64, IterationError> {
    let mut dist = roots.map(|r| (r - w).norm());
    dist.sort_by(f64::total_cmp);
    if dist[1] == 0.0 || (dist[1] - dist[0]) / dist[1] < BOUNDARY_TOL {
        return Err(IterationError::Boundary);
    }
    Ok(dist[0] / dist[1])
}

/// Empirical order `ln e_{k+1} / ln e_k` from the last pair of errors that
/// both lie in `(floor, 1)`. Errors at or under `floor` are rounding noise.
pub fn empirical_order(errors: &[f64], floor: f64) -> Option<f64> {
    errors
        .windows(2)
        .rfind(|w| w.iter().all(|&e| e > floor && e < 1.0))
        .map(|w| w[1].ln() / w[0].ln())
}

/// Computational order of convergence from a run of errors `e_0, e_1, ...`.
///
/// The run is cut at the first error that is zero, not below 1, or smaller
/// than `rel_floor * e_prev` (the iterate is then dominated by rounding of
/// order `eps * e_prev`). The last three kept errors give
/// `ln(e2/e1) / ln(e1/e0)`, which is free of the asymptotic constant; with
/// only two kept errors the estimate falls back to `ln e1 / ln e0`.
pub fn computational_order(errors: &[f64], rel_floor: f64) -> Option<f64> {
    let mut n = 0;
    while n < errors.len() {
        let e = errors[n];
        let ok = e > 0.0 && e < 1.0 && (n == 0 || e > rel_floor * errors[n - 1]);
        if !ok {
            break;
        }
        n += 1;
    }
    match n {
        0 | 1 => None,
        2 => Some(errors[1].ln() / errors[0].ln()),
        _ => {
            let (e0, e1, e2) = (errors[n - 3], errors[n - 2], errors[n - 1]);
            Some((e2 / e1).ln() / (e1 / e0).ln())
        }
    }
}

/// Least-squares slope of `ln e_m` against `m`.
pub fn log_error_slope(errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0)
        .map(|(k, e)| (k as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{cardano_oracle, critical_points};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_cubic() -> Polynomial {
        "2,-2,0,1".parse().unwrap()
    }

    const REAL_ROOT: f64 = -1.7692923542386314;

    #[test]
    fn initial_window() {
        let p = sample_cubic();
        let s = BasicSequenceState::new(&p, c(3.0, 0.0)).unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.window(), [c(25.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        // B_2 is Newton
        assert_eq!(s.term(), member_step(&p, 2, c(3.0, 0.0)));
    }

    #[test]
    fn seed_at_root_is_fixed() {
        let p = Polynomial::from_roots(&[c(2.0, 0.0), c(-1.0, 1.0), c(0.0, -3.0)]);
        let mut s = BasicSequenceState::new(&p, c(2.0, 0.0)).unwrap();
        let lead = s.window()[0];
        for _ in 0..5 {
            assert_eq!(s.term(), Some(c(2.0, 0.0)));
            let before = s.window()[0];
            s.advance();
            assert_eq!(s.window()[0], lead * before);
        }
    }

    #[test]
    fn first_step_at_critical_point() {
        let p = sample_cubic();
        let xi = c(-(2.0f64 / 3.0).sqrt(), 0.0);
        let s = BasicSequenceState::new(&p, xi).unwrap();
        let d = p.derivatives_up_to(xi, 2).unwrap();
        assert!(d[1].norm() < 1e-15);
        let s = d_step_cubic(s);
        let expected = -0.5 * d[0] * d[2];
        assert!((s.window()[0] - expected).norm() < 1e-14 * expected.norm());
        assert_eq!(s.window()[1], d[1]);
        assert_eq!(s.window()[2], c(1.0, 0.0));
    }

    #[test]
    fn steps_reproduce_general_recurrence() {
        let p = sample_cubic();
        let z = c(0.3, 0.7);
        let mut s = BasicSequenceState::new(&p, z).unwrap();
        assert_eq!(general_d(&p, z, 0), c(1.0, 0.0));
        assert_eq!(general_d(&p, z, -1), c(0.0, 0.0));
        assert_eq!(general_d(&p, z, -2), c(0.0, 0.0));
        let d1 = p.derivatives_up_to(z, 1).unwrap()[1];
        assert!((general_d(&p, z, 1) - d1).norm() < 1e-15 * d1.norm());
        for m in 2..=4 {
            s.advance();
            let oracle = general_d(&p, z, m);
            assert!(
                (s.unscaled(0) - oracle).norm() < 1e-13 * oracle.norm(),
                "m = {m}"
            );
        }
    }

    #[test]
    fn general_d_matches_rescaled_steps_at_m5() {
        let p = sample_cubic();
        let z = c(3.0, 0.0);
        let mut s = BasicSequenceState::new(&p, z).unwrap();
        while s.m() <= 5 {
            s.advance();
        }
        // window[0] now holds d_5
        let oracle = general_d(&p, z, 5);
        assert!((s.unscaled(0) - oracle).norm() < 1e-12 * oracle.norm());
    }

    #[test]
    fn general_d_handles_higher_degree() {
        // p = z^4: p' = 4z^3, so D_1 = 4z^3 and D_2 = D_1^2 - p * 6z^2 = 16z^6 - 6z^6
        let p = Polynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let z = c(1.5, 0.0);
        assert!((general_d(&p, z, 2) - c(10.0 * 1.5f64.powi(6), 0.0)).norm() < 1e-9);
    }

    #[test]
    fn rescaling_keeps_window_finite() {
        let p = Polynomial::from_roots(&[c(1e30, 0.0), c(-1e30, 1.0), c(0.0, 1e30)]);
        let mut s = BasicSequenceState::new(&p, c(1.0, 1.0)).unwrap();
        for _ in 0..200 {
            s.advance();
            assert!(s.is_finite());
        }
        assert!(s.rescale_count() > 0);

        let tiny = Polynomial::from_roots(&[c(1e-30, 0.0), c(-1e-30, 0.0), c(0.0, 2e-30)]);
        let mut s = BasicSequenceState::new(&tiny, c(1e-31, 3e-31)).unwrap();
        for _ in 0..200 {
            s.advance();
            assert!(s.is_finite());
            assert!(s.window()[0].norm() > 0.0);
        }
        assert!(s.rescale_count() > 0);
    }

    #[test]
    fn window_scaling_leaves_terms_unchanged() {
        let p = sample_cubic();
        let xi = c(-0.8, 0.1);
        let mut a = BasicSequenceState::new(&p, xi).unwrap();
        let mut b = a.clone();
        b.scale_window(1024.0);
        for _ in 0..60 {
            assert_eq!(a.term(), b.term());
            a.advance();
            b.advance();
        }
    }

    #[test]
    fn basic_sequence_worked_example() {
        let p = sample_cubic();
        let xi = c(-(2.0f64 / 3.0).sqrt(), 0.0);
        let r = basic_sequence(&p, xi, 1e-10, 400).unwrap();
        assert!(r.converged);
        assert_eq!(r.stop_reason, StopReason::SuccessiveDiffBelowTol);
        assert!((r.limit.re - (-1.7693)).abs() < 5e-5);
        assert!((r.limit - c(REAL_ROOT, 0.0)).norm() < 1e-9);
        let n = r.history.len();
        assert!((r.history[n - 1] - r.history[n - 2]).norm() < 1e-10);
    }

    #[test]
    fn basic_sequence_at_root_stops_immediately() {
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)]);
        let r = basic_sequence(&p, c(1.0, 0.0), 1e-12, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.limit, c(1.0, 0.0));
        assert_eq!(r.terms_used, 3);
    }

    #[test]
    fn basic_sequence_from_canonical_critical_point() {
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)]);
        let cp = critical_points(&p).unwrap();
        assert!((cp.r1 - c(0.0, 1.0)).norm() < 1e-15);
        let r = basic_sequence(&p, cp.r1, 1e-12, DEFAULT_M_CAP).unwrap();
        assert!(r.converged);
        assert!((r.limit - c(0.0, 2.0)).norm() < 1e-9);
        assert!(p.evaluate(r.limit).norm() < 1e-8);
    }

    #[test]
    fn basic_sequence_at_exact_critical_point_skips_undefined_newton_term() {
        // p = z^3 - 3z + 1 has p'(1) = 0 exactly, so B_2(1) is undefined
        let p = Polynomial::from_real(&[1.0, -3.0, 0.0, 1.0]).unwrap();
        let r = basic_sequence(&p, c(1.0, 0.0), 1e-12, DEFAULT_M_CAP).unwrap();
        assert!(r.converged);
        assert!(p.evaluate(r.limit).norm() < 1e-10);
    }

    #[test]
    fn basic_sequence_on_boundary_hits_cap() {
        // 0 is equidistant from the roots -1 and 1
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 5.0)]);
        let r = basic_sequence(&p, c(0.0, 0.0), 1e-12, 50).unwrap();
        assert!(!r.converged);
        assert_eq!(r.stop_reason, StopReason::MCapReached);
        assert_eq!(r.terms_used, 50);
    }

    #[test]
    fn basic_sequence_parameter_errors() {
        let p = sample_cubic();
        assert_eq!(
            basic_sequence(&p, c(0.0, 0.0), 0.0, 10),
            Err(IterationError::Tolerance(0.0))
        );
        assert_eq!(
            basic_sequence(&p, c(0.0, 0.0), 1e-3, 2),
            Err(IterationError::Cap { cap: 2, min: 3 })
        );
        let quad = Polynomial::from_real(&[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            basic_sequence(&quad, c(0.0, 0.0), 1e-3, 10),
            Err(IterationError::Poly(PolyError::WrongDegree { .. }))
        ));
    }

    #[test]
    fn newton_cycle_on_sample_cubic() {
        let p = sample_cubic();
        let r = fixed_point_member(&p, 2, c(0.0, 0.0), 1e-10, 40).unwrap();
        assert!(!r.converged);
        assert_eq!(r.stop_reason, StopReason::MCapReached);
        for (k, z) in r.history.iter().enumerate() {
            assert_eq!(*z, c((k % 2) as f64, 0.0));
        }
    }

    #[test]
    fn newton_and_halley_converge_from_minus_two() {
        let p = sample_cubic();
        for member in [2, 3] {
            let r = fixed_point_member(&p, member, c(-2.0, 0.0), 1e-12, 50).unwrap();
            assert!(r.converged);
            assert!(p.evaluate(r.limit).norm() < 1e-10);
            assert!((r.limit.re - REAL_ROOT).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_edge_cases() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let r = fixed_point_member(&p, 2, c(2.0, 0.0), 1e-12, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.terms_used, 0);
        assert_eq!(r.limit, c(2.0, 0.0));

        // p'(z) = 3z^2 - 2 vanishes at sqrt(2/3) only approximately; use z^3 - 3z + 1 at z = 1
        let q = Polynomial::from_real(&[1.0, -3.0, 0.0, 1.0]).unwrap();
        let r = fixed_point_member(&q, 2, c(1.0, 0.0), 1e-12, 10).unwrap();
        assert_eq!(r.stop_reason, StopReason::NonFiniteRatio);
        assert!(!r.converged);

        assert_eq!(
            fixed_point_member(&q, 4, c(1.0, 0.0), 1e-12, 10),
            Err(IterationError::Member(4))
        );
    }

    #[test]
    fn rate_ratio_examples() {
        let roots = cardano_oracle(&sample_cubic()).unwrap();
        let r = rate_ratio(&roots, c(-(2.0f64 / 3.0).sqrt(), 0.0)).unwrap();
        // distances 0.95280 and 1.80047 from the 40-digit roots
        assert!((r - 0.9527957733109054 / 1.8004675113234771).abs() < 1e-12);
        assert!((r - 0.529).abs() < 5e-4);

        assert_eq!(rate_ratio(&roots, roots[1]).unwrap(), 0.0);

        let roots = [c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)];
        let r = rate_ratio(&roots, c(0.0, 1.0)).unwrap();
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(
            rate_ratio(&roots, c(0.0, 0.0)),
            Err(IterationError::Boundary)
        );
    }

    #[test]
    fn record_format() {
        let p = sample_cubic();
        let r = fixed_point_member(&p, 2, c(0.0, 0.0), 1e-10, 40).unwrap();
        let rec = r.to_record(4);
        let lines: Vec<&str> = rec.lines().collect();
        assert_eq!(lines[0], "converged=false");
        assert_eq!(lines[1], "limit=0");
        assert_eq!(lines[2], "terms_used=40");
        assert_eq!(lines[3], "stop_reason=m-cap-reached");
        assert_eq!(lines[4], "residual=2e0");
        assert_eq!(lines[5], "history=1,0,1,0");
    }

    #[test]
    fn order_and_slope_helpers() {
        // e_{k+1} = e_k^2
        let errs = [1e-1, 1e-2, 1e-4, 1e-8, 1e-16, 1e-17];
        let q = empirical_order(&errs, 1e-14).unwrap();
        assert!((q - 2.0).abs() < 1e-12);
        let geometric: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        assert!((log_error_slope(&geometric).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(log_error_slope(&[1.0]), None);
    }

    #[test]
    fn computational_order_cancels_the_constant() {
        // e_{k+1} = 50 e_k^3 from e_0 = 1e-2
        let mut errs = vec![1e-2];
        for _ in 0..4 {
            let e = *errs.last().unwrap();
            errs.push(50.0 * e * e * e);
        }
        let q = computational_order(&errs, 1e-10).unwrap();
        assert!((q - 3.0).abs() < 1e-9, "{q}");
        assert_eq!(computational_order(&[0.5], 1e-10), None);
        assert!((computational_order(&[1e-2, 1e-4], 1e-10).unwrap() - 2.0).abs() < 1e-12);
    }
}
