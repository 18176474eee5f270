//! Numerical kernel for verifying explicit quasi-homogeneous WDVV
//! prepotentials on genus-0 and genus-1 Hurwitz spaces.
//!
//! The library is organized bottom-up:
//!
//! * [`special_fn`] — Jacobi θ₁ jets, Eisenstein series E₂/E₄/E₆ (plain and
//!   q-deformed) with term-wise derivatives, and Weierstrass ℘, ℘′, ℘″, ζ, σ
//!   on an arbitrary lattice via the θ₁ closed forms.
//! * [`numdiff`] — gradients, Hessians and third-derivative tensors of
//!   holomorphic functions of N complex variables by central finite
//!   differences with Richardson extrapolation.
//! * [`hurwitz_g0`] — genus-0 rational coverings, critical data, the three
//!   flat-coordinate charts, residue Gram pairings and the generic
//!   prepotential assembler.
//! * [`prepotential_zoo`] — closed-form evaluators for every explicit
//!   prepotential family, bundled with verification metadata (η, unit field,
//!   Euler data, degree, quadratic correction).
//! * [`wdvv_verifier`] — generalized WDVV associativity, η-recovery,
//!   Euler quasi-homogeneity and Hessian-consistency checks.
//! * [`identity_suite`] — Chazy, Ramanujan/q-Ramanujan, Weierstrass and
//!   e_j-ODE identity residuals, plus genus-1 flat-coordinate cross-checks.
//! * [`campaign`] / [`report`] — seeded batch verification drivers and the
//!   machine-readable report they produce.
//!
//! All evaluators are pure functions; campaigns over sample points can run
//! data-parallel (rayon, feature `parallel`, default on) or sequentially
//! (see [`exec`]).

pub mod campaign;
pub mod exec;
pub mod hurwitz_g0;
pub mod identity_suite;
pub mod numdiff;
pub mod prepotential_zoo;
pub mod report;
pub mod sample;
pub mod special_fn;
pub mod wdvv_verifier;

/// Double-precision complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Convenience constructor for [`C64`].
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Parses a complex literal of the form `a+bi` (either part optional):
/// `"0.2+0.1i"`, `"-0.3i"`, `"1.5"`, `"i"`.
pub fn parse_c64(s: &str) -> Option<C64> {
    let s: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if !s.ends_with('i') {
        return s.parse::<f64>().ok().map(|re| c64(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    // split at the last +/- that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-')
            && bytes[k - 1] != b'e'
            && bytes[k - 1] != b'E'
        {
            split = Some(k);
            break;
        }
    }
    let parse_imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok(),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = parse_imag(&body[k..])?;
            Some(c64(re, im))
        }
        None => parse_imag(body).map(|im| c64(0.0, im)),
    }
}

#[cfg(test)]
mod lib_tests {
    use super::*;

    #[test]
    fn complex_literal_parsing() {
        assert_eq!(parse_c64("0.2+0.1i"), Some(c64(0.2, 0.1)));
        assert_eq!(parse_c64("-0.3-0.2i"), Some(c64(-0.3, -0.2)));
        assert_eq!(parse_c64("1.5"), Some(c64(1.5, 0.0)));
        assert_eq!(parse_c64("0.5i"), Some(c64(0.0, 0.5)));
        assert_eq!(parse_c64("i"), Some(c64(0.0, 1.0)));
        assert_eq!(parse_c64("-i"), Some(c64(0.0, -1.0)));
        assert_eq!(parse_c64("1e-3+2e-4i"), Some(c64(1e-3, 2e-4)));
        assert_eq!(parse_c64("0+0.5i"), Some(c64(0.0, 0.5)));
        assert_eq!(parse_c64(""), None);
        assert_eq!(parse_c64("xyz"), None);
    }
}

/// Crate version string (embedded in reports).
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
