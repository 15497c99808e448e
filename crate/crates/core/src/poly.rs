//! Complex-coefficient polynomials.
//!
//! Coefficients are stored constant term first. Besides evaluation and
//! derivatives this module carries the low-degree machinery the cubic solver
//! leans on: a cancellation-free quadratic formula, the critical points of a
//! cubic, synthetic-division deflation, and a closed-form radical solver that
//! the test suites use as an independent oracle.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Relative band below which the discriminant of p' counts as zero.
pub const REPEATED_CRITICAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("polynomial has no nonzero coefficient")]
    Zero,
    #[error("polynomial has a non-finite coefficient")]
    NonFinite,
    #[error("expected a polynomial of degree {expected}, found degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error("derivative order {requested} exceeds degree {degree}")]
    DerivativeOrder { requested: usize, degree: usize },
    #[error("imaginary part {0} is negative; conjugate before taking the square root")]
    InvalidBranch(f64),
    #[error("critical points coincide at {}", format_complex(*.0))]
    RepeatedCriticalPoint(Complex64),
    #[error("malformed coefficient `{0}`")]
    Parse(String),
}

/// A polynomial with complex coefficients and a nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from coefficients, constant term first. Trailing
    /// zero coefficients are dropped so the degree is honest.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(PolyError::NonFinite);
        }
        while coeffs
            .last()
            .is_some_and(|c| *c == Complex64::new(0.0, 0.0))
        {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(PolyError::Zero);
        }
        Ok(Polynomial { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            coeffs = mul_by_linear(&coeffs, r);
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    /// Largest coefficient magnitude. Relative tolerances are measured against it.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn monic(&self) -> Self {
        let lead = self.leading();
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        *coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self, PolyError> {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// The polynomial z ↦ p(z − t), whose roots are those of p moved by +t.
    pub fn translated(&self, t: Complex64) -> Self {
        let mut acc = vec![self.leading()];
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = mul_by_linear(&acc, t);
            acc[0] += c;
        }
        Polynomial { coeffs: acc }
    }

    /// Formal derivative, by the power rule. `None` for constants.
    pub fn derivative(&self) -> Option<Self> {
        if self.degree() == 0 {
            return None;
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        Some(Polynomial { coeffs })
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `[p(z), p'(z), ..., p^(k)(z)]`, all from one Horner-style sweep.
    pub fn derivatives_up_to(&self, z: Complex64, k: usize) -> Result<Vec<Complex64>, PolyError> {
        let n = self.degree();
        if k > n {
            return Err(PolyError::DerivativeOrder {
                requested: k,
                degree: n,
            });
        }
        // taylor[i] accumulates p^(i)(z) / i!
        let mut taylor = vec![Complex64::new(0.0, 0.0); k + 1];
        taylor[0] = self.coeffs[n];
        for j in (0..n).rev() {
            for i in (1..=k.min(n - j)).rev() {
                taylor[i] = taylor[i] * z + taylor[i - 1];
            }
            taylor[0] = taylor[0] * z + self.coeffs[j];
        }
        let mut factorial = 1.0;
        for (i, t) in taylor.iter_mut().enumerate().skip(1) {
            factorial *= i as f64;
            *t *= factorial;
        }
        Ok(taylor)
    }
}

fn mul_by_linear(coeffs: &[Complex64], r: Complex64) -> Vec<Complex64> {
    // (z - r) * q(z)
    let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        out[k + 1] += c;
        out[k] -= r * c;
    }
    out
}

/// Formats a complex scalar as `re` or `re+imi` / `re-imi`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `re`, `re+imi`, `re-imi`, or a bare imaginary `imi`.
pub fn parse_complex(token: &str) -> Result<Complex64, PolyError> {
    let bad = || PolyError::Parse(token.to_string());
    let t = token.trim();
    let real = |s: &str| -> Result<f64, PolyError> {
        let v: f64 = s.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(real(t)?, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => real(s)?,
    };
    Ok(Complex64::new(re, im))
}

impl FromStr for Polynomial {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coeffs = s
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()?;
        Polynomial::new(coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|&c| format_complex(c)).collect();
        f.write_str(&parts.join(","))
    }
}

/// Square root of `s + i d` for `d >= 0`, as the pair `(A, B)` with
/// `A, B >= 0` and `(A + iB)^2 = s + id`.
///
/// The larger of the two components comes from the half-angle formula; the
/// smaller is recovered from `2AB = d` so it never loses digits to
/// cancellation in `|s+id| - |s|`.
pub fn complex_sqrt_decomposed(s: f64, d: f64) -> Result<(f64, f64), PolyError> {
    if d < 0.0 || d.is_nan() {
        return Err(PolyError::InvalidBranch(d));
    }
    let modulus = s.hypot(d);
    if s >= 0.0 {
        let a = ((modulus + s) / 2.0).sqrt();
        let b = if a > 0.0 { d / (2.0 * a) } else { 0.0 };
        Ok((a, b))
    } else {
        let b = ((modulus - s) / 2.0).sqrt();
        Ok((d / (2.0 * b), b))
    }
}

/// Principal square root built on [`complex_sqrt_decomposed`]: inputs in the
/// lower half-plane are conjugated in and out.
pub fn complex_sqrt(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        let (a, b) = complex_sqrt_decomposed(z.re, z.im).expect("upper half-plane");
        Complex64::new(a, b)
    } else {
        let (a, b) =
            complex_sqrt_decomposed(z.re, -z.im).expect("conjugated into upper half-plane");
        Complex64::new(a, -b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRoots {
    pub r1: Complex64,
    pub r2: Complex64,
    pub discriminant: Complex64,
}

/// Both roots of a degree-2 polynomial without catastrophic cancellation.
///
/// `r1` comes from the branch where `b` and the square root of the
/// discriminant add constructively; `r2` from the product `r1 r2 = c/a`.
pub fn solve_quadratic(q: &Polynomial) -> Result<QuadraticRoots, PolyError> {
    if q.degree() != 2 {
        return Err(PolyError::WrongDegree {
            expected: 2,
            found: q.degree(),
        });
    }
    let [c, b, a] = [q.coeffs[0], q.coeffs[1], q.coeffs[2]];
    let discriminant = b * b - 4.0 * a * c;
    let root = complex_sqrt(discriminant);
    let sum = if (b.conj() * root).re >= 0.0 {
        b + root
    } else {
        b - root
    };
    let half = -0.5 * sum;
    let (r1, r2) = if half == Complex64::new(0.0, 0.0) {
        // b = 0 and b^2 = 4ac, so c = 0 as well
        (half, half)
    } else {
        (half / a, c / half)
    };
    Ok(QuadraticRoots {
        r1,
        r2,
        discriminant,
    })
}

/// Solutions of p'(z) = 0 for a cubic p.
///
/// `r1` is the critical point with the larger imaginary part, ties broken by
/// the larger real part. A discriminant of p' below
/// `REPEATED_CRITICAL_TOL * scale(p')^2` is reported as
/// [`PolyError::RepeatedCriticalPoint`].
pub fn critical_points(p: &Polynomial) -> Result<QuadraticRoots, PolyError> {
    if p.degree() != 3 {
        return Err(PolyError::WrongDegree {
            expected: 3,
            found: p.degree(),
        });
    }
    let dp = p.derivative().expect("cubic has a derivative");
    let scale = dp.scale();
    let mut roots = solve_quadratic(&dp)?;
    if roots.discriminant.norm() < REPEATED_CRITICAL_TOL * scale * scale {
        let at = -dp.coeffs[1] / (2.0 * dp.coeffs[2]);
        return Err(PolyError::RepeatedCriticalPoint(at));
    }
    let tie = 4.0 * f64::EPSILON * (roots.r1.norm() + roots.r2.norm());
    let gap = roots.r1.im - roots.r2.im;
    if gap < -tie || (gap.abs() <= tie && roots.r1.re < roots.r2.re) {
        std::mem::swap(&mut roots.r1, &mut roots.r2);
    }
    Ok(roots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deflation {
    pub quotient: Polynomial,
    /// p(r), the discarded remainder of the division.
    pub remainder: Complex64,
}

/// Divides `(z - r)` out of `p` by synthetic division.
pub fn deflate(p: &Polynomial, r: Complex64) -> Result<Deflation, PolyError> {
    let n = p.degree();
    if n == 0 {
        return Err(PolyError::WrongDegree {
            expected: 1,
            found: 0,
        });
    }
    let mut quotient = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = p.coeffs[n];
    for k in (0..n).rev() {
        quotient[k] = carry;
        carry = p.coeffs[k] + carry * r;
    }
    Ok(Deflation {
        quotient: Polynomial { coeffs: quotient },
        remainder: carry,
    })
}

/// All three roots of a cubic in closed form.
///
/// The cubic is depressed to `t^3 + P t + Q`. Real cubics with three real
/// roots go through the trigonometric form; other real cubics through the
/// real radical form with the sign chosen to avoid cancellation; complex
/// cubics through the complex radical form with the larger-magnitude branch
/// of `u^3`. Only the standard library's complex `sqrt`/`cbrt` are used here
/// so the oracle shares no code with the iterative solver.
pub fn cardano_oracle(p: &Polynomial) -> Result<[Complex64; 3], PolyError> {
    if p.degree() != 3 {
        return Err(PolyError::WrongDegree {
            expected: 3,
            found: p.degree(),
        });
    }
    let m = p.monic();
    let (a2, a1, a0) = (m.coeffs[2], m.coeffs[1], m.coeffs[0]);
    let shift = -a2 / 3.0;
    let pp = a1 - a2 * a2 / 3.0;
    let qq = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;

    let depressed = if m.is_real() {
        real_depressed_roots(pp.re, qq.re)
    } else {
        complex_depressed_roots(pp, qq)
    };
    Ok(depressed.map(|t| t + shift))
}

fn real_depressed_roots(p: f64, q: f64) -> [Complex64; 3] {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc < 0.0 {
        // three distinct real roots; p < 0 here
        let amp = 2.0 * (-p / 3.0).sqrt();
        let cos_arg = ((3.0 * q) / (p * amp)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(amp * (phi - third * k).cos(), 0.0))
    } else {
        let big = -(q.signum()) * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let re = -(big + small) / 2.0;
        let im = 3f64.sqrt() / 2.0 * (big - small);
        [
            Complex64::new(big + small, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    }
}

fn complex_depressed_roots(p: Complex64, q: Complex64) -> [Complex64; 3] {
    let root = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let plus = -q / 2.0 + root;
    let minus = -q / 2.0 - root;
    let cube = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    let u = cube.cbrt();
    let v = if u == Complex64::new(0.0, 0.0) {
        u
    } else {
        -p / (3.0 * u)
    };
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let omega2 = omega.conj();
    [u + v, omega * u + omega2 * v, omega2 * u + omega * v]
}
