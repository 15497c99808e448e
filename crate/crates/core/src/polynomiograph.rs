//! Escape-time pictures of root basins for Newton, Halley and the basic
//! sequence, written as binary PPM.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::basic_family::{basic_sequence, member_step};
use crate::poly::{cardano_oracle, PolyError, Polynomial};
use crate::voronoi::{nearest_root, Cell};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MEMBER_CAP: usize = 100;
pub const DEFAULT_BASIC_CAP: usize = 300;
/// Roots closer than this (relative to the largest root, plus one) count as repeated.
pub const REPEATED_ROOT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("polynomial has a repeated root")]
    RepeatedRoot,
    #[error("invalid render setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    Halley,
    BasicSequence,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Halley => "halley",
            Method::BasicSequence => "basic",
        }
    }

    pub fn default_cap(self) -> usize {
        match self {
            Method::BasicSequence => DEFAULT_BASIC_CAP,
            _ => DEFAULT_MEMBER_CAP,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "newton" => Ok(Method::Newton),
            "halley" => Ok(Method::Halley),
            "basic" | "basic-sequence" => Ok(Method::BasicSequence),
            other => Err(format!(
                "unknown method `{other}` (expected newton, halley or basic)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub roots: [[u8; 3]; 3],
    pub dark: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            roots: [[255, 0, 0], [0, 255, 0], [0, 0, 255]],
            dark: [0, 0, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub center: Complex64,
    /// Half the width of the window along the real axis; the height follows
    /// from the pixel aspect ratio.
    pub half_width: f64,
    pub pixels_x: usize,
    pub pixels_y: usize,
    pub method: Method,
    pub tol: f64,
    pub cap: usize,
    pub palette: Palette,
}

impl RenderConfig {
    pub fn new(
        method: Method,
        center: Complex64,
        half_width: f64,
        pixels_x: usize,
        pixels_y: usize,
    ) -> Self {
        RenderConfig {
            center,
            half_width,
            pixels_x,
            pixels_y,
            method,
            tol: DEFAULT_TOL,
            cap: method.default_cap(),
            palette: Palette::default(),
        }
    }

    pub fn half_height(&self) -> f64 {
        self.half_width * self.pixels_y as f64 / self.pixels_x as f64
    }

    /// Complex coordinate of a pixel center; row 0 is the top.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let step = 2.0 * self.half_width / self.pixels_x as f64;
        Complex64::new(
            self.center.re - self.half_width + (col as f64 + 0.5) * step,
            self.center.im + self.half_height() - (row as f64 + 0.5) * step,
        )
    }

    fn validate(&self) -> Result<(), RenderError> {
        let bad = |msg: &str| Err(RenderError::Config(msg.to_string()));
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return bad("half-width must be positive");
        }
        if self.pixels_x == 0 || self.pixels_y == 0 {
            return bad("image size must be positive");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tolerance must be positive");
        }
        let min_cap = if self.method == Method::BasicSequence {
            3
        } else {
            1
        };
        if self.cap < min_cap {
            return Err(RenderError::Config(format!(
                "cap must be at least {min_cap}"
            )));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return bad("center must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    /// Reference root reached, `None` when the seed diverged.
    pub root: Option<u8>,
    pub steps: u32,
}

impl Pixel {
    pub fn diverged(&self) -> bool {
        self.root.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomiograph {
    pub config: RenderConfig,
    /// Sorted by real part, then imaginary part.
    pub roots: [Complex64; 3],
    /// Row-major, row 0 at the top.
    pub pixels: Vec<Pixel>,
}

impl Polynomiograph {
    pub fn pixel(&self, col: usize, row: usize) -> Pixel {
        self.pixels[row * self.config.pixels_x + col]
    }
}

/// Reference roots of a cubic with distinct roots, in sorted order.
pub fn reference_roots(p: &Polynomial) -> Result<[Complex64; 3], RenderError> {
    let mut roots = cardano_oracle(p)?;
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let size = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for i in 0..3 {
        for j in i + 1..3 {
            if (roots[i] - roots[j]).norm() < REPEATED_ROOT_TOL * size {
                return Err(RenderError::RepeatedRoot);
            }
        }
    }
    Ok(roots)
}

fn within(z: Complex64, roots: &[Complex64; 3], tol: f64) -> Option<u8> {
    (0..3)
        .find(|&k| (z - roots[k]).norm() < tol)
        .map(|k| k as u8)
}

/// Outcome for a single seed.
pub fn render_point(
    p: &Polynomial,
    roots: &[Complex64; 3],
    cfg: &RenderConfig,
    seed: Complex64,
) -> Pixel {
    if let Some(k) = within(seed, roots, cfg.tol) {
        return Pixel {
            root: Some(k),
            steps: 0,
        };
    }
    let diverged = Pixel {
        root: None,
        steps: cfg.cap as u32,
    };
    match cfg.method {
        Method::Newton | Method::Halley => {
            let member = if cfg.method == Method::Newton { 2 } else { 3 };
            let mut z = seed;
            for k in 1..=cfg.cap {
                match member_step(p, member, z) {
                    Some(next) => z = next,
                    None => return diverged,
                }
                if let Some(r) = within(z, roots, cfg.tol) {
                    return Pixel {
                        root: Some(r),
                        steps: k as u32,
                    };
                }
            }
            diverged
        }
        Method::BasicSequence => match basic_sequence(p, seed, cfg.tol, cfg.cap) {
            Ok(report) if report.converged => match nearest_root(report.limit, roots) {
                Cell::Root(k) => Pixel {
                    root: Some(k as u8),
                    steps: report.terms_used as u32,
                },
                Cell::Boundary => diverged,
            },
            _ => diverged,
        },
    }
}

/// Renders every pixel; rows run in parallel and the result does not depend
/// on the schedule.
pub fn render(p: &Polynomial, cfg: &RenderConfig) -> Result<Polynomiograph, RenderError> {
    if p.degree() != 3 {
        return Err(PolyError::WrongDegree {
            expected: 3,
            found: p.degree(),
        }
        .into());
    }
    cfg.validate()?;
    let roots = reference_roots(p)?;
    let pixels: Vec<Pixel> = (0..cfg.pixels_y)
        .into_par_iter()
        .flat_map_iter(|row| (0..cfg.pixels_x).map(move |col| (col, row)))
        .map(|(col, row)| render_point(p, &roots, cfg, cfg.pixel_center(col, row)))
        .collect();
    Ok(Polynomiograph {
        config: cfg.clone(),
        roots,
        pixels,
    })
}

pub fn measure_divergence_fraction(g: &Polynomiograph) -> f64 {
    if g.pixels.is_empty() {
        return 0.0;
    }
    g.pixels.iter().filter(|px| px.diverged()).count() as f64 / g.pixels.len() as f64
}

/// Binary PPM (P6). Converged pixels take their root's color at brightness
/// `1 - steps/cap`; diverged pixels take the dark color.
pub fn encode_image(g: &Polynomiograph) -> Vec<u8> {
    let cfg = &g.config;
    let mut out = format!("P6\n{} {}\n255\n", cfg.pixels_x, cfg.pixels_y).into_bytes();
    out.reserve(3 * g.pixels.len());
    for px in &g.pixels {
        match px.root {
            None => out.extend_from_slice(&cfg.palette.dark),
            Some(k) => {
                let brightness = (1.0 - px.steps as f64 / cfg.cap as f64).clamp(0.0, 1.0);
                let base = cfg.palette.roots[k as usize % 3];
                out.extend(
                    base.iter()
                        .map(|&ch| (ch as f64 * brightness).round() as u8),
                );
            }
        }
    }
    out
}
