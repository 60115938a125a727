//! Symbols of the factorized one-way system for a stratified medium.
//!
//! The state is `U = (p, w)` and the eigenvector matrix is
//! `P0 = [[rho, rho], [gamma, -gamma]]`, so `p = rho (V+ + V-)`.
//! Vertical slowness `gamma` solves `gamma^2 = 1/c^2 - kx^2/omega^2`.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::Epsilon;

/// Relative width of the glancing band around `kx^2 = omega^2 / c^2`.
pub const GLANCING_RTOL: f64 = 1e-9;

/// Smallest admissible `|gamma|`, in units of `1/c`.
pub const GAMMA_FLOOR: f64 = 1e-4;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("vertical slowness {0} is below the glancing floor")]
    BelowFloor(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Hyperbolic,
    Elliptic,
    Glancing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// Vertical slowness at one `(c, kx, omega)` together with its region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlownessSample {
    pub gamma0: Complex64,
    pub region: Region,
    pub c: f64,
    pub kx: f64,
    pub omega: f64,
    /// Imaginary frequency shift; the sample is evaluated at `omega - i damping`.
    pub damping: f64,
    /// Set when `gamma0` was raised to the floor.
    pub floored: bool,
}

impl SlownessSample {
    pub fn complex_omega(&self) -> Complex64 {
        Complex64::new(self.omega, -self.damping)
    }

    /// Vertical wavenumber `(omega - i eta) gamma0`, with `Im <= 0`.
    pub fn kz(&self) -> Complex64 {
        self.complex_omega() * self.gamma0
    }

    /// Phase factor `exp(-i dz kz)` of one step of length `dz`.
    pub fn phase(&self, dz: f64) -> Complex64 {
        (Complex64::new(0.0, -dz) * self.kz()).exp()
    }

    pub fn is_floor_violation(&self) -> bool {
        self.floored
    }
}

/// Slowness at a real frequency.
pub fn classify_and_slowness(c: f64, kx: f64, omega: f64) -> Result<SlownessSample, SymbolError> {
    slowness(c, kx, omega, 0.0)
}

/// Slowness at the complex frequency `omega - i damping`. The region is
/// classified on the real frequency; the branch keeps `Im(kz) <= 0`.
pub fn slowness(c: f64, kx: f64, omega: f64, damping: f64) -> Result<SlownessSample, SymbolError> {
    if !(omega > 0.0) {
        return Err(SymbolError::NonPositiveFrequency(omega));
    }
    if !(c > 0.0) {
        return Err(SymbolError::NonPositiveSpeed(c));
    }
    let k2 = (omega / c).powi(2);
    let diff = k2 - kx * kx;
    let region = if diff.abs() <= GLANCING_RTOL * k2 {
        Region::Glancing
    } else if diff > 0.0 {
        Region::Hyperbolic
    } else {
        Region::Elliptic
    };
    let w = Complex64::new(omega, -damping);
    let mut kz = (w * w / (c * c) - kx * kx).sqrt();
    if kz.im > 0.0 {
        kz = -kz;
    }
    let mut gamma0 = if damping == 0.0 {
        match region {
            Region::Hyperbolic => Complex64::new((1.0 / (c * c) - (kx / omega).powi(2)).sqrt(), 0.0),
            Region::Elliptic => Complex64::new(0.0, -((kx / omega).powi(2) - 1.0 / (c * c)).sqrt()),
            Region::Glancing => kz / w,
        }
    } else {
        kz / w
    };
    let floor = GAMMA_FLOOR / c;
    let mut floored = false;
    if !(gamma0.norm() >= floor) {
        gamma0 = Complex64::new(floor, 0.0);
        floored = true;
    }
    Ok(SlownessSample {
        gamma0,
        region,
        c,
        kx,
        omega,
        damping,
        floored,
    })
}

/// `P0 = [[rho, rho], [gamma, -gamma]]`.
pub fn p0(gamma: Complex64, rho: f64) -> Mat2 {
    let r = Complex64::new(rho, 0.0);
    [[r, r], [gamma, -gamma]]
}

/// Explicit inverse `[[1/(2 rho), 1/(2 gamma)], [1/(2 rho), -1/(2 gamma)]]`.
pub fn p0_inv(gamma: Complex64, rho: f64) -> Mat2 {
    let a = Complex64::new(0.5 / rho, 0.0);
    let b = 0.5 / gamma;
    [[a, b], [a, -b]]
}

/// Symbol of the first-order operator whose eigenvalues are `+-gamma`.
pub fn l_sharp_symbol(c: f64, kx: f64, omega: Complex64, rho: f64) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    let lower = (Complex64::new(1.0 / (c * c), 0.0) - kx * kx / (omega * omega)) / rho;
    [[z, Complex64::new(rho, 0.0)], [lower, z]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn apply(m: &Mat2, u: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * u[0] + m[0][1] * u[1],
        m[1][0] * u[0] + m[1][1] * u[1],
    ]
}

/// `(V+, V-) = P0^{-1} U`. A floored sample yields zeros and `true`.
pub fn decompose(u: [Complex64; 2], sample: &SlownessSample, rho: f64) -> ([Complex64; 2], bool) {
    if sample.floored {
        return ([Complex64::new(0.0, 0.0); 2], true);
    }
    (apply(&p0_inv(sample.gamma0, rho), u), false)
}

/// `U = P0 V`.
pub fn compose(v: [Complex64; 2], sample: &SlownessSample, rho: f64) -> [Complex64; 2] {
    apply(&p0(sample.gamma0, rho), v)
}

/// Discrete transmission and reflection symbols at one interface, both
/// already multiplied by the depth step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSymbols {
    pub t0_dz: Complex64,
    pub r0_dz: Complex64,
}

/// `t0_dz = -ln(gamma_below / gamma_above) / 2` and `r0_dz = -t0_dz`.
pub fn interface_symbols(
    gamma_above: Complex64,
    gamma_below: Complex64,
) -> Result<InterfaceSymbols, SymbolError> {
    for g in [gamma_above, gamma_below] {
        if !(g.norm() > 0.0) || !g.is_finite() {
            return Err(SymbolError::BelowFloor(g));
        }
    }
    if gamma_above == gamma_below {
        let z = Complex64::new(0.0, 0.0);
        return Ok(InterfaceSymbols { t0_dz: z, r0_dz: z });
    }
    let t0_dz = -0.5 * (gamma_below / gamma_above).ln();
    Ok(InterfaceSymbols {
        t0_dz,
        r0_dz: -t0_dz,
    })
}

/// Angular dip filter on the propagation angle `asin(|kx| c / omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTaper {
    /// Degrees.
    pub cutoff: f64,
    /// Degrees.
    pub width: f64,
}

impl AngleTaper {
    pub fn new(cutoff: f64, width: f64) -> Self {
        Self { cutoff, width }
    }

    fn angle(kx: f64, c: f64, omega: f64) -> Option<f64> {
        let s = kx.abs() * c / omega;
        (s < 1.0).then(|| s.asin().to_degrees())
    }

    /// Smooth factor: 1 below `cutoff - width`, 0 above `cutoff`, cosine ramp
    /// between.
    pub fn factor(&self, kx: f64, c: f64, omega: f64) -> f64 {
        let Some(theta) = Self::angle(kx, c, omega) else {
            return 0.0;
        };
        let start = self.cutoff - self.width;
        if theta <= start {
            1.0
        } else if theta >= self.cutoff {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (theta - start) / self.width).cos())
        }
    }

    /// Hard pass/stop decision used at every depth step: stops the band
    /// `|gamma0| c <= cos(cutoff)` on both sides of glancing, so propagating
    /// components beyond the cutoff angle and barely evanescent ones are cut
    /// while deeper evanescent ones pass and decay by the branch of `gamma0`.
    pub fn passes(&self, kx: f64, c: f64, omega: f64) -> bool {
        let s = kx.abs() * c / omega;
        (1.0 - s * s).abs().sqrt() > self.cutoff.to_radians().cos()
    }
}

/// One depth step of the propagator: phase shift, the transmission
/// exponential when `epsilon = 1`, and the hard angular mask.
pub fn propagator_step(
    field: Complex64,
    sample: &SlownessSample,
    dz: f64,
    direction: Direction,
    epsilon: Epsilon,
    t0_dz: Complex64,
    taper: &AngleTaper,
) -> Complex64 {
    if !taper.passes(sample.kx, sample.c, sample.omega) {
        return Complex64::new(0.0, 0.0);
    }
    let mut out = field * sample.phase(dz);
    if epsilon == Epsilon::One {
        out *= match direction {
            Direction::Down => t0_dz.exp(),
            Direction::Up => (-t0_dz).exp(),
        };
    }
    out
}
