//! Jacobi θ₁, Eisenstein series and Weierstrass elliptic functions.
//!
//! Conventions (pinned by the identity suite rather than asserted):
//!
//! * θ₁(u|τ) = 2 Σ_{n≥0} (−1)ⁿ e^{iπτ(n+½)²} sin((2n+1)πu), the odd Jacobi
//!   theta function on the lattice ℤ + τℤ (periods 1 and τ).
//! * E₂(τ) = 1 − 24 Σ σ₁(N) q^N, E₄ = 1 + 240 Σ σ₃(N) q^N,
//!   E₆ = 1 − 504 Σ σ₅(N) q^N with nome q = e^{2πiτ}; τ-derivatives are
//!   term-wise (d q^N/dτ = 2πiN q^N).
//! * ℘, ζ, σ on the lattice 2ω₁ℤ + 2ω₂ℤ are reduced to ℤ + τℤ by homogeneity
//!   (℘(αu; 2αω₁, 2αω₂) = α⁻²℘(u)) and evaluated through the θ₁ closed form
//!   σ(z|τ) = e^{η₁z²} θ₁(z|τ)/θ₁′(0|τ), ζ = σ′/σ, ℘ = −ζ′, with
//!   η₁ = ζ(½|τ) = π²E₂(τ)/6.
//! * q-deformed Eisenstein series:
//!   E_{q,2}(τ_q) = E₂(τ)/(1−qτ_q)² − 6iq/(π(1−qτ_q)) and
//!   E_{q,2k}(τ_q) = E_{2k}(τ)/(1−qτ_q)^{2k} (k = 2, 3), where
//!   τ = τ_q/(1−qτ_q).

use crate::{c64, C64, I};
use std::f64::consts::PI;
use thiserror::Error;

/// Errors raised by special-function evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecialFnError {
    /// The series did not satisfy its stopping rule within `max_terms`.
    #[error("series did not converge within {0} terms")]
    NonConvergent(usize),
    /// An input lies outside the admissible domain.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The evaluation point is within the pole guard of a lattice point.
    #[error("argument within pole guard of a lattice point")]
    PoleError,
}

pub type Result<T> = std::result::Result<T, SpecialFnError>;

/// A point τ in the upper half-plane together with its nome q = e^{2πiτ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularPoint {
    pub tau: C64,
    /// Nome q = exp(2πi·τ); |q| < 1 by construction.
    pub nome: C64,
}

impl ModularPoint {
    /// Builds a modular point, checking Im τ > 0.
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.is_finite() {
            return Err(SpecialFnError::DomainError(format!(
                "modulus must satisfy Im tau > 0, got {tau}"
            )));
        }
        let nome = (c64(0.0, 2.0 * PI) * tau).exp();
        Ok(ModularPoint { tau, nome })
    }
}

/// Truncation control for all series in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative term threshold for the stopping rule.
    pub rel_tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-16,
            max_terms: 1200,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_terms < 8 {
            return Err(SpecialFnError::DomainError(
                "SeriesControl requires rel_tol > 0 and max_terms >= 8".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Jacobi θ₁
// ---------------------------------------------------------------------------

/// θ₁(u|τ) and its u-derivatives up to `order` (≤ 3).
///
/// Returns `(θ₁, θ₁′, …, θ₁^(order))`. Truncation stops once the magnitude of
/// the last included term drops below `rel_tol` times the running partial-sum
/// magnitude for 3 consecutive terms (safety tail against accidentally small
/// terms of the alternating series).
pub fn theta1_jet(u: C64, m: &ModularPoint, order: usize, ctl: &SeriesControl) -> Result<Vec<C64>> {
    if order > 3 {
        return Err(SpecialFnError::DomainError(format!(
            "theta1_jet supports order <= 3, got {order}"
        )));
    }
    theta1_jet_impl(u, m, order, ctl)
}

/// Internal jet evaluator without the public order cap (℘″ needs θ₁⁗).
pub(crate) fn theta1_jet_impl(
    u: C64,
    m: &ModularPoint,
    order: usize,
    ctl: &SeriesControl,
) -> Result<Vec<C64>> {
    ctl.validate()?;
    debug_assert!(order <= 5);
    let mut sums = vec![C64::default(); order + 1];
    let mut small_streak = 0usize;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        // 2·(−1)ⁿ e^{iπτ(n+½)²}
        let amp = {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            c64(2.0 * sign, 0.0) * (I * PI * m.tau * (nf + 0.5) * (nf + 0.5)).exp()
        };
        let a = (2.0 * nf + 1.0) * PI;
        let au = a * u;
        let (s, c) = (au.sin(), au.cos());
        let mut term_mag = 0.0f64;
        let mut pow = 1.0f64;
        for (k, sum) in sums.iter_mut().enumerate() {
            // d^k/du^k sin(au) = a^k · cycle(sin, cos, −sin, −cos)
            let trig = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            let term = amp * pow * trig;
            *sum += term;
            term_mag = term_mag.max(term.norm());
            pow *= a;
        }
        let scale = sums.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        if term_mag < ctl.rel_tol * scale {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sums);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(SpecialFnError::NonConvergent(ctl.max_terms))
}

// ---------------------------------------------------------------------------
// Eisenstein series
// ---------------------------------------------------------------------------

/// Which Eisenstein series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eisenstein {
    E2,
    E4,
    E6,
}

impl Eisenstein {
    /// (power p in σ_p, multiplier in front of the Lambert sum)
    fn series_data(self) -> (u32, f64) {
        match self {
            Eisenstein::E2 => (1, -24.0),
            Eisenstein::E4 => (3, 240.0),
            Eisenstein::E6 => (5, -504.0),
        }
    }
}

/// σ_p(n) = Σ_{d|n} d^p as f64 (n stays small enough for exactness).
fn sigma_p(n: usize, p: u32) -> f64 {
    let mut s = 0.0f64;
    let mut d = 1usize;
    while d * d <= n {
        if n % d == 0 {
            s += (d as f64).powi(p as i32);
            let e = n / d;
            if e != d {
                s += (e as f64).powi(p as i32);
            }
        }
        d += 1;
    }
    s
}

/// E_{2k}(τ) or one of its term-wise τ-derivatives of order `deriv_order` ≤ 3.
pub fn eisenstein(
    m: &ModularPoint,
    which: Eisenstein,
    deriv_order: usize,
    ctl: &SeriesControl,
) -> Result<C64> {
    if deriv_order > 3 {
        return Err(SpecialFnError::DomainError(format!(
            "eisenstein supports deriv_order <= 3, got {deriv_order}"
        )));
    }
    ctl.validate()?;
    let (p, mult) = which.series_data();
    let mut sum = if deriv_order == 0 {
        c64(1.0, 0.0)
    } else {
        C64::default()
    };
    let mut qn = c64(1.0, 0.0);
    let mut small_streak = 0usize;
    for n in 1..=ctl.max_terms {
        qn *= m.nome;
        // term: mult·σ_p(n)·(2πin)^k·q^n
        let mut term = qn * (mult * sigma_p(n, p));
        for _ in 0..deriv_order {
            term *= c64(0.0, 2.0 * PI * n as f64);
        }
        sum += term;
        let scale = sum.norm().max(1.0);
        if term.norm() < ctl.rel_tol * scale {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(SpecialFnError::NonConvergent(ctl.max_terms))
}

/// Jet (value and τ-derivatives up to `order`) of an Eisenstein series.
pub(crate) fn eisenstein_jet(
    m: &ModularPoint,
    which: Eisenstein,
    order: usize,
    ctl: &SeriesControl,
) -> Result<Vec<C64>> {
    (0..=order)
        .map(|k| eisenstein(m, which, k, ctl))
        .collect()
}

// ---------------------------------------------------------------------------
// q-deformed Eisenstein series
// ---------------------------------------------------------------------------

/// The transformed modular point τ = τ_q/(1−q·τ_q) and the factor
/// s = 1/(1−q·τ_q) of the deformation.
fn q_transform(tau_q: C64, qparam: C64) -> Result<(ModularPoint, C64)> {
    let denom = c64(1.0, 0.0) - qparam * tau_q;
    if denom.norm() < 1e-14 {
        return Err(SpecialFnError::DomainError(
            "q-deformation singular: 1 - q·tau_q = 0".into(),
        ));
    }
    let s = denom.inv();
    let inner = ModularPoint::new(tau_q * s).map_err(|_| {
        SpecialFnError::DomainError(
            "transformed modulus tau_q/(1 - q·tau_q) left the upper half-plane".into(),
        )
    })?;
    Ok((inner, s))
}

/// E_{q,2k}(τ_q) and its τ_q-derivative (`deriv_order` ≤ 1).
///
/// E_{q,2} = s²E₂(τ) − 6iq s/π, E_{q,4} = s⁴E₄(τ), E_{q,6} = s⁶E₆(τ) with
/// s = 1/(1−qτ_q), τ = sτ_q; derivatives by the chain rule on the term-wise
/// inner derivatives (ds/dτ_q = qs², dτ/dτ_q = s²).
pub fn eisenstein_q(
    tau_q: C64,
    qparam: C64,
    which: Eisenstein,
    deriv_order: usize,
    ctl: &SeriesControl,
) -> Result<C64> {
    if deriv_order > 1 {
        return Err(SpecialFnError::DomainError(format!(
            "eisenstein_q supports deriv_order <= 1, got {deriv_order}"
        )));
    }
    Ok(eisenstein_q_jet(tau_q, qparam, which, deriv_order, ctl)?[deriv_order])
}

/// Jet of the deformed series in τ_q up to `order` (≤ 3 for E₂, ≤ 2 for
/// E₄/E₆); the higher orders feed the deformed Chazy/Ramanujan residuals.
pub(crate) fn eisenstein_q_jet(
    tau_q: C64,
    qparam: C64,
    which: Eisenstein,
    order: usize,
    ctl: &SeriesControl,
) -> Result<Vec<C64>> {
    let (inner, s) = q_transform(tau_q, qparam)?;
    let q = qparam;
    let e = eisenstein_jet(&inner, which, order, ctl)?;
    let sp = |k: i32| s.powi(k);
    let mut out = Vec::with_capacity(order + 1);
    match which {
        Eisenstein::E2 => {
            let c = -6.0 * I / PI; // coefficient of the inhomogeneous term
            out.push(sp(2) * e[0] + c * q * s);
            if order >= 1 {
                out.push(2.0 * q * sp(3) * e[0] + sp(4) * e[1] + c * q * q * sp(2));
            }
            if order >= 2 {
                out.push(
                    6.0 * q * q * sp(4) * e[0]
                        + 6.0 * q * sp(5) * e[1]
                        + sp(6) * e[2]
                        + 2.0 * c * q.powi(3) * sp(3),
                );
            }
            if order >= 3 {
                out.push(
                    24.0 * q.powi(3) * sp(5) * e[0]
                        + 36.0 * q * q * sp(6) * e[1]
                        + 12.0 * q * sp(7) * e[2]
                        + sp(8) * e[3]
                        + 6.0 * c * q.powi(4) * sp(4),
                );
            }
        }
        Eisenstein::E4 => {
            out.push(sp(4) * e[0]);
            if order >= 1 {
                out.push(4.0 * q * sp(5) * e[0] + sp(6) * e[1]);
            }
            if order >= 2 {
                out.push(20.0 * q * q * sp(6) * e[0] + 10.0 * q * sp(7) * e[1] + sp(8) * e[2]);
            }
            if order >= 3 {
                return Err(SpecialFnError::DomainError(
                    "E_{q,4} jet implemented up to order 2".into(),
                ));
            }
        }
        Eisenstein::E6 => {
            out.push(sp(6) * e[0]);
            if order >= 1 {
                out.push(6.0 * q * sp(7) * e[0] + sp(8) * e[1]);
            }
            if order >= 2 {
                out.push(42.0 * q * q * sp(8) * e[0] + 14.0 * q * sp(9) * e[1] + sp(10) * e[2]);
            }
            if order >= 3 {
                return Err(SpecialFnError::DomainError(
                    "E_{q,6} jet implemented up to order 2".into(),
                ));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Weierstrass functions
// ---------------------------------------------------------------------------

/// Half-periods (ω₁, ω₂) with derived modulus, invariants and lattice data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeFrame {
    pub omega1: C64,
    pub omega2: C64,
    /// τ = ω₂/ω₁ (Im τ > 0).
    pub tau: C64,
    /// η₁ = ζ(ω₁) = π²E₂(τ)/(12ω₁).
    pub eta1: C64,
    pub g2: C64,
    pub g3: C64,
    /// e₁ = ℘(ω₁), e₂ = ℘(ω₂), e₃ = ℘(ω₁+ω₂).
    pub e1: C64,
    pub e2: C64,
    pub e3: C64,
}

/// Which Weierstrass function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weierstrass {
    P,
    Pprime,
    Pdoubleprime,
    Zeta,
    Sigma,
}

/// Fraction of |2ω₁| used as the default guard radius around lattice points.
pub const POLE_GUARD: f64 = 1e-8;

/// Distance from z to the nearest point of ℤ + τℤ (normalized lattice).
fn normalized_lattice_distance(z: C64, tau: C64) -> f64 {
    let y = z.im / tau.im;
    let x = z.re - y * tau.re;
    let fx = x - x.round();
    let fy = y - y.round();
    // check the 3×3 neighborhood of the rounded lattice point
    let mut best = f64::INFINITY;
    for dx in -1..=1 {
        for dy in -1..=1 {
            let d = c64(fx - dx as f64, 0.0) + (fy - dy as f64) * tau;
            best = best.min(d.norm());
        }
    }
    best
}

/// Normalized-lattice (periods 1 and τ) jets of log θ₁ used by ζ/℘.
/// Returns (θ-jet to order 4, η₁ = π²E₂(τ)/6).
fn normalized_data(tau: C64, ctl: &SeriesControl) -> Result<(ModularPoint, C64)> {
    let m = ModularPoint::new(tau)?;
    let e2 = eisenstein(&m, Eisenstein::E2, 0, ctl)?;
    Ok((m, PI * PI / 6.0 * e2))
}

/// Weierstrass ℘, ℘′, ℘″, ζ or σ at `u` on the lattice 2ω₁ℤ + 2ω₂ℤ.
pub fn weierstrass(u: C64, frame: &LatticeFrame, which: Weierstrass, ctl: &SeriesControl) -> Result<C64> {
    let alpha = (2.0 * frame.omega1).inv(); // rescale to periods 1 and τ
    let z = u * alpha;
    if which != Weierstrass::Sigma && normalized_lattice_distance(z, frame.tau) < POLE_GUARD {
        return Err(SpecialFnError::PoleError);
    }
    let (m, eta1n) = normalized_data(frame.tau, ctl)?;
    let jet = theta1_jet_impl(z, &m, 4, ctl)?;
    if which == Weierstrass::Sigma {
        let jet0 = theta1_jet_impl(C64::default(), &m, 1, ctl)?;
        let sigma_n = (eta1n * z * z).exp() * jet[0] / jet0[1];
        return Ok(sigma_n / alpha);
    }
    if jet[0].norm() == 0.0 {
        return Err(SpecialFnError::PoleError);
    }
    // R_k = θ₁^(k)(z)/θ₁(z); log-derivative chain for ζ, ℘, ℘′, ℘″.
    let r1 = jet[1] / jet[0];
    let r2 = jet[2] / jet[0];
    let r3 = jet[3] / jet[0];
    let r4 = jet[4] / jet[0];
    let l1 = r1;
    let l2 = r2 - r1 * r1;
    let l3 = r3 - 3.0 * r1 * r2 + 2.0 * r1.powu(3);
    let l4 = r4 - 4.0 * r1 * r3 - 3.0 * r2 * r2 + 12.0 * r1 * r1 * r2 - 6.0 * r1.powu(4);
    let value_n = match which {
        Weierstrass::Zeta => 2.0 * eta1n * z + l1,
        Weierstrass::P => -(2.0 * eta1n + l2),
        Weierstrass::Pprime => -l3,
        Weierstrass::Pdoubleprime => -l4,
        Weierstrass::Sigma => unreachable!(),
    };
    let power = match which {
        Weierstrass::Zeta => 1,
        Weierstrass::P => 2,
        Weierstrass::Pprime => 3,
        Weierstrass::Pdoubleprime => 4,
        Weierstrass::Sigma => unreachable!(),
    };
    Ok(value_n * alpha.powu(power))
}

/// Builds a [`LatticeFrame`] from half-periods: g₂ = π⁴E₄(τ)/(12ω₁⁴),
/// g₃ = π⁶E₆(τ)/(216ω₁⁶), η₁ = π²E₂(τ)/(12ω₁), e_j by ℘ at half-periods.
pub fn lattice_invariants(omega1: C64, omega2: C64, ctl: &SeriesControl) -> Result<LatticeFrame> {
    if omega1.norm() == 0.0 {
        return Err(SpecialFnError::DomainError("omega1 must be nonzero".into()));
    }
    let tau = omega2 / omega1;
    let m = ModularPoint::new(tau)
        .map_err(|_| SpecialFnError::DomainError("Im(omega2/omega1) must be > 0".into()))?;
    let e2 = eisenstein(&m, Eisenstein::E2, 0, ctl)?;
    let e4 = eisenstein(&m, Eisenstein::E4, 0, ctl)?;
    let e6 = eisenstein(&m, Eisenstein::E6, 0, ctl)?;
    let g2 = PI.powi(4) / 12.0 * e4 / omega1.powu(4);
    let g3 = PI.powi(6) / 216.0 * e6 / omega1.powu(6);
    let disc = g2.powu(3) - 27.0 * g3 * g3;
    if disc.norm() < 1e-12 * g2.norm().powi(3).max(1e-30) {
        return Err(SpecialFnError::DomainError(
            "degenerate lattice: g2^3 - 27 g3^2 ~ 0".into(),
        ));
    }
    let eta1 = PI * PI / 12.0 * e2 / omega1;
    let mut frame = LatticeFrame {
        omega1,
        omega2,
        tau,
        eta1,
        g2,
        g3,
        e1: C64::default(),
        e2: C64::default(),
        e3: C64::default(),
    };
    frame.e1 = weierstrass(omega1, &frame, Weierstrass::P, ctl)?;
    frame.e2 = weierstrass(omega2, &frame, Weierstrass::P, ctl)?;
    frame.e3 = weierstrass(omega1 + omega2, &frame, Weierstrass::P, ctl)?;
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn theta1_odd_and_zero_at_origin() {
        let m = ModularPoint::new(c64(0.1, 0.9)).unwrap();
        let v0 = theta1_jet(C64::default(), &m, 0, &ctl()).unwrap()[0];
        assert!(v0.norm() < 1e-15);
        let u = c64(0.23, -0.11);
        let a = theta1_jet(u, &m, 0, &ctl()).unwrap()[0];
        let b = theta1_jet(-u, &m, 0, &ctl()).unwrap()[0];
        assert_relative_eq!((a + b).norm(), 0.0, epsilon = 1e-13 * a.norm());
    }

    #[test]
    fn theta1_quasi_periodicity() {
        let m = ModularPoint::new(c64(-0.2, 1.1)).unwrap();
        let u = c64(0.31, 0.07);
        let t = theta1_jet(u, &m, 0, &ctl()).unwrap()[0];
        let t1 = theta1_jet(u + 1.0, &m, 0, &ctl()).unwrap()[0];
        assert_relative_eq!((t1 + t).norm(), 0.0, epsilon = 1e-10 * t.norm());
        let tt = theta1_jet(u + m.tau, &m, 0, &ctl()).unwrap()[0];
        let factor = -((-I * PI * m.tau - 2.0 * I * PI * u).exp());
        assert_relative_eq!((tt - factor * t).norm(), 0.0, epsilon = 1e-10 * tt.norm());
    }

    #[test]
    fn eisenstein_constant_terms_at_small_nome() {
        // q → 0 limit: far up the imaginary axis every series tends to 1.
        let m = ModularPoint::new(c64(0.0, 40.0)).unwrap();
        for which in [Eisenstein::E2, Eisenstein::E4, Eisenstein::E6] {
            let v = eisenstein(&m, which, 0, &ctl()).unwrap();
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-13);
            assert!(v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn eisenstein_e2_at_i_is_3_over_pi() {
        // E₂(i) = 3/π, a classical special value.
        let m = ModularPoint::new(c64(0.0, 1.0)).unwrap();
        let v = eisenstein(&m, Eisenstein::E2, 0, &ctl()).unwrap();
        assert_relative_eq!(v.re, 3.0 / PI, epsilon = 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn eisenstein_derivative_matches_finite_difference() {
        let tau = c64(0.13, 0.82);
        let h = 1e-5;
        for which in [Eisenstein::E2, Eisenstein::E4, Eisenstein::E6] {
            let d = eisenstein(&ModularPoint::new(tau).unwrap(), which, 1, &ctl()).unwrap();
            let p = eisenstein(&ModularPoint::new(tau + h).unwrap(), which, 0, &ctl()).unwrap();
            let mm = eisenstein(&ModularPoint::new(tau - h).unwrap(), which, 0, &ctl()).unwrap();
            let fd = (p - mm) / (2.0 * h);
            assert_relative_eq!((d - fd).norm(), 0.0, epsilon = 1e-7 * d.norm().max(1.0));
        }
    }

    #[test]
    fn eisenstein_q_reduces_at_zero_deformation() {
        let tau_q = c64(0.2, 0.9);
        for which in [Eisenstein::E2, Eisenstein::E4, Eisenstein::E6] {
            let plain =
                eisenstein(&ModularPoint::new(tau_q).unwrap(), which, 0, &ctl()).unwrap();
            let def = eisenstein_q(tau_q, C64::default(), which, 0, &ctl()).unwrap();
            assert_relative_eq!((plain - def).norm(), 0.0, epsilon = 1e-14 * plain.norm());
        }
    }

    #[test]
    fn eisenstein_q_jet_matches_finite_difference() {
        let tau_q = c64(0.0, 0.3);
        let q = c64(0.1, 0.2);
        let h = 1e-5;
        for (which, max_ord) in [(Eisenstein::E2, 3), (Eisenstein::E4, 2), (Eisenstein::E6, 2)] {
            for k in 1..=max_ord {
                let jet = eisenstein_q_jet(tau_q, q, which, k, &ctl()).unwrap();
                let lo = eisenstein_q_jet(tau_q - h, q, which, k - 1, &ctl()).unwrap();
                let hi = eisenstein_q_jet(tau_q + h, q, which, k - 1, &ctl()).unwrap();
                let fd = (hi[k - 1] - lo[k - 1]) / (2.0 * h);
                assert_relative_eq!(
                    (jet[k] - fd).norm(),
                    0.0,
                    epsilon = 1e-6 * jet[k].norm().max(1.0)
                );
            }
        }
    }

    #[test]
    fn weierstrass_ode_and_oddness() {
        let frame = lattice_invariants(c64(0.5, 0.1), c64(-0.1, 0.6), &ctl()).unwrap();
        let u = c64(0.21, 0.13);
        let p = weierstrass(u, &frame, Weierstrass::P, &ctl()).unwrap();
        let pp = weierstrass(u, &frame, Weierstrass::Pprime, &ctl()).unwrap();
        let lhs = pp * pp;
        let rhs = 4.0 * p.powu(3) - frame.g2 * p - frame.g3;
        assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-10 * lhs.norm().max(1.0));
        let z1 = weierstrass(u, &frame, Weierstrass::Zeta, &ctl()).unwrap();
        let z2 = weierstrass(-u, &frame, Weierstrass::Zeta, &ctl()).unwrap();
        assert!((z1 + z2).norm() < 1e-11 * z1.norm().max(1.0));
    }

    #[test]
    fn weierstrass_second_derivative_law() {
        let frame = lattice_invariants(c64(0.55, 0.0), c64(0.05, 0.45), &ctl()).unwrap();
        let u = c64(0.4, 0.21);
        let p = weierstrass(u, &frame, Weierstrass::P, &ctl()).unwrap();
        let pdd = weierstrass(u, &frame, Weierstrass::Pdoubleprime, &ctl()).unwrap();
        let rhs = 6.0 * p * p - frame.g2 / 2.0;
        assert_relative_eq!((pdd - rhs).norm(), 0.0, epsilon = 1e-10 * pdd.norm().max(1.0));
    }

    #[test]
    fn lattice_invariants_scaling_and_sum_of_ej() {
        let ctl = ctl();
        let f1 = lattice_invariants(c64(0.5, 0.0), c64(0.0, 0.5), &ctl).unwrap();
        let alpha = c64(1.3, 0.4);
        let f2 = lattice_invariants(alpha * f1.omega1, alpha * f1.omega2, &ctl).unwrap();
        assert_relative_eq!(
            (f2.g2 - f1.g2 / alpha.powu(4)).norm(),
            0.0,
            epsilon = 1e-12 * f1.g2.norm()
        );
        assert_relative_eq!(
            (f2.g3 - f1.g3 / alpha.powu(6)).norm(),
            0.0,
            epsilon = 1e-12 * f1.g3.norm().max(1.0)
        );
        let sum = f1.e1 + f1.e2 + f1.e3;
        assert!(sum.norm() < 1e-10 * f1.e1.norm().max(1.0));
        // square lattice: e₂ = −e₁ and e₃ = 0
        assert!((f1.e2 + f1.e1).norm() < 1e-10 * f1.e1.norm());
        assert!(f1.e3.norm() < 1e-10 * f1.e1.norm());
    }

    #[test]
    fn legendre_relation() {
        let ctl = ctl();
        let frame = lattice_invariants(c64(0.6, -0.1), c64(0.2, 0.7), &ctl).unwrap();
        let z1 = weierstrass(frame.omega1, &frame, Weierstrass::Zeta, &ctl).unwrap();
        let z2 = weierstrass(frame.omega2, &frame, Weierstrass::Zeta, &ctl).unwrap();
        let resid = frame.omega2 * z1 - frame.omega1 * z2 - I * PI / 2.0;
        assert!(resid.norm() < 1e-11);
        // ζ(ω₁) agrees with the frame's Eisenstein-route η₁
        assert!((z1 - frame.eta1).norm() < 1e-11 * z1.norm().max(1.0));
    }

    #[test]
    fn pole_guard_triggers() {
        let ctl = ctl();
        let frame = lattice_invariants(c64(0.5, 0.0), c64(0.0, 0.5), &ctl).unwrap();
        let near_pole = c64(1e-12, 0.0);
        assert_eq!(
            weierstrass(near_pole, &frame, Weierstrass::P, &ctl),
            Err(SpecialFnError::PoleError)
        );
        // σ is entire: same point must evaluate fine (to ~0)
        let s = weierstrass(near_pole, &frame, Weierstrass::Sigma, &ctl).unwrap();
        assert!(s.norm() < 1e-10);
    }
}
