//! Standalone identity residuals: Chazy, Ramanujan and q-Ramanujan systems,
//! the Weierstrass function suite, the e_j ODE, and the genus-1
//! flat-coordinate cross-relations.
//!
//! Every residual here is exact mathematics evaluated numerically; the
//! declared tolerances split into series-only identities (1e-9/1e-10) and
//! finite-difference-assisted identities (1e-6).

use crate::special_fn::{
    eisenstein_jet, eisenstein_q_jet, lattice_invariants, theta1_jet_impl, weierstrass,
    Eisenstein, LatticeFrame, ModularPoint, SeriesControl, SpecialFnError, Weierstrass,
};
use crate::{c64, C64, I};
use std::f64::consts::PI;

pub type Result<T> = std::result::Result<T, SpecialFnError>;

/// One identity evaluation, for report plumbing.
#[derive(Debug, Clone)]
pub struct IdentityResult {
    pub identity_id: String,
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityResult {
    pub fn new(id: impl Into<String>, inputs: impl Into<String>, residual: f64, tol: f64) -> Self {
        IdentityResult {
            identity_id: id.into(),
            inputs: inputs.into(),
            residual,
            tolerance: tol,
            pass: residual.is_finite() && residual <= tol,
        }
    }
}

fn rel(lhs: C64, rhs: C64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0)
}

/// E₂ jet to third order, plain (deformed = None) or q-deformed (the
/// modulus argument is then read as τ_q).
fn e2_jet3(tau: C64, deformed: Option<C64>, ctl: &SeriesControl) -> Result<Vec<C64>> {
    match deformed {
        Some(q) => eisenstein_q_jet(tau, q, Eisenstein::E2, 3, ctl),
        None => {
            let mp = ModularPoint::new(tau)?;
            eisenstein_jet(&mp, Eisenstein::E2, 3, ctl)
        }
    }
}

/// Chazy residual |E₂‴ − 2iπE₂E₂″ + 3iπ(E₂′)²|, normalized by the largest
/// term magnitude. `deformed = Some(q)` checks the q-Chazy equation at τ_q.
pub fn chazy_residual(tau: C64, deformed: Option<C64>, ctl: &SeriesControl) -> Result<f64> {
    let jet = e2_jet3(tau, deformed, ctl)?;
    let t1 = jet[3];
    let t2 = -2.0 * I * PI * jet[0] * jet[2];
    let t3 = 3.0 * I * PI * jet[1] * jet[1];
    let scale = t1.norm().max(t2.norm()).max(t3.norm()).max(1.0);
    Ok((t1 + t2 + t3).norm() / scale)
}

/// Ramanujan system residuals (r₂, r₄, r₆); `deformed = Some(q)` checks the
/// q-Ramanujan system at τ_q with the deformed series E_{q,2k}.
pub fn ramanujan_residuals(
    tau: C64,
    deformed: Option<C64>,
    ctl: &SeriesControl,
) -> Result<[f64; 3]> {
    let two_i_pi = 2.0 * I * PI;
    let (e2, d2, e4, d4, e6, d6) = match deformed {
        Some(q) => {
            let j2 = eisenstein_q_jet(tau, q, Eisenstein::E2, 1, ctl)?;
            let j4 = eisenstein_q_jet(tau, q, Eisenstein::E4, 1, ctl)?;
            let j6 = eisenstein_q_jet(tau, q, Eisenstein::E6, 1, ctl)?;
            (j2[0], j2[1], j4[0], j4[1], j6[0], j6[1])
        }
        None => {
            let mp = ModularPoint::new(tau)?;
            let j2 = eisenstein_jet(&mp, Eisenstein::E2, 1, ctl)?;
            let j4 = eisenstein_jet(&mp, Eisenstein::E4, 1, ctl)?;
            let j6 = eisenstein_jet(&mp, Eisenstein::E6, 1, ctl)?;
            (j2[0], j2[1], j4[0], j4[1], j6[0], j6[1])
        }
    };
    Ok([
        rel(d2 / two_i_pi, (e2 * e2 - e4) / 12.0),
        rel(d4 / two_i_pi, (e2 * e4 - e6) / 3.0),
        rel(d6 / two_i_pi, (e2 * e6 - e4 * e4) / 2.0),
    ])
}

/// Residuals of the Weierstrass identity suite at (frame, u, v).
#[derive(Debug, Clone)]
pub struct WeierstrassResiduals {
    /// (℘′)² = 4℘³ − g₂℘ − g₃.
    pub p_ode: f64,
    /// ℘″ = 6℘² − g₂/2.
    pub p_second_law: f64,
    /// ζ(ω₁)ω₂ − ζ(ω₂)ω₁ = iπ/2.
    pub legendre: f64,
    /// ℘(u+v) = −℘(u) − ℘(v) + ¼((℘′u−℘′v)/(℘u−℘v))².
    pub addition_p: f64,
    /// ζ(u+v) = ζ(u) + ζ(v) + ½(℘′u−℘′v)/(℘u−℘v).
    pub addition_zeta: f64,
    /// ζ(u+2ω_j) = ζ(u) + 2ζ(ω_j), j = 1, 2.
    pub zeta_quasi_periodicity: f64,
    /// θ-only η₁: −θ₁‴(0)/(6θ₁′(0)) = π²E₂(τ)/6 on the normalized lattice.
    pub zeta_e2: f64,
    /// θ-only g₂ = 12℘² − 2℘″ and g₃ = 4℘³ − g₂℘ − (℘′)² against the
    /// Eisenstein closed forms π⁴E₄/(12ω₁⁴) and π⁶E₆/(216ω₁⁶).
    pub g2_g3_e46: f64,
}

impl WeierstrassResiduals {
    pub fn max(&self) -> f64 {
        [
            self.p_ode,
            self.p_second_law,
            self.legendre,
            self.addition_p,
            self.addition_zeta,
            self.zeta_quasi_periodicity,
            self.zeta_e2,
            self.g2_g3_e46,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("p-ode", self.p_ode),
            ("p-second-law", self.p_second_law),
            ("legendre", self.legendre),
            ("addition-p", self.addition_p),
            ("addition-zeta", self.addition_zeta),
            ("zeta-quasi-periodicity", self.zeta_quasi_periodicity),
            ("zeta-E2", self.zeta_e2),
            ("g2-g3-E46", self.g2_g3_e46),
        ]
    }
}

/// Evaluates the Weierstrass identity suite; `u`, `v`, `u±v` must stay away
/// from lattice points (PoleError otherwise).
pub fn weierstrass_suite(
    frame: &LatticeFrame,
    u: C64,
    v: C64,
    ctl: &SeriesControl,
) -> Result<WeierstrassResiduals> {
    let p = |z: C64| weierstrass(z, frame, Weierstrass::P, ctl);
    let pp = |z: C64| weierstrass(z, frame, Weierstrass::Pprime, ctl);
    let zeta = |z: C64| weierstrass(z, frame, Weierstrass::Zeta, ctl);

    let (pu, ppu) = (p(u)?, pp(u)?);
    let ppu2 = weierstrass(u, frame, Weierstrass::Pdoubleprime, ctl)?;
    let (pv, ppv) = (p(v)?, pp(v)?);
    let (g2, g3) = (frame.g2, frame.g3);

    let p_ode = rel(ppu * ppu, 4.0 * pu.powu(3) - g2 * pu - g3);
    let p_second_law = rel(ppu2, 6.0 * pu * pu - g2 / 2.0);
    let legendre = rel(
        zeta(frame.omega1)? * frame.omega2 - zeta(frame.omega2)? * frame.omega1,
        I * PI / 2.0,
    );

    let diff = pu - pv;
    if diff.norm() == 0.0 {
        return Err(SpecialFnError::DomainError(
            "addition theorems need p(u) != p(v)".into(),
        ));
    }
    let slope = (ppu - ppv) / diff;
    let addition_p = rel(p(u + v)?, -pu - pv + 0.25 * slope * slope);
    let addition_zeta = rel(zeta(u + v)?, zeta(u)? + zeta(v)? + 0.5 * slope);

    let zq1 = rel(zeta(u + 2.0 * frame.omega1)?, zeta(u)? + 2.0 * zeta(frame.omega1)?);
    let zq2 = rel(zeta(u + 2.0 * frame.omega2)?, zeta(u)? + 2.0 * zeta(frame.omega2)?);
    let zeta_quasi_periodicity = zq1.max(zq2);

    // θ-only cross-checks on the normalized lattice ℤ + τℤ
    let mp = ModularPoint::new(frame.tau)?;
    let theta0 = theta1_jet_impl(C64::default(), &mp, 4, ctl)?;
    let eta1_theta = -theta0[3] / (6.0 * theta0[1]);
    let e2 = eisenstein_jet(&mp, Eisenstein::E2, 0, ctl)?[0];
    let zeta_e2 = rel(eta1_theta, PI * PI / 6.0 * e2);

    // ℘, ℘′, ℘″ on the normalized lattice from θ jets alone (η₁ θ-only)
    let zn = u / (2.0 * frame.omega1);
    let theta_z = theta1_jet_impl(zn, &mp, 4, ctl)?;
    if theta_z[0].norm() == 0.0 {
        return Err(SpecialFnError::PoleError);
    }
    let r1 = theta_z[1] / theta_z[0];
    let r2 = theta_z[2] / theta_z[0];
    let r3 = theta_z[3] / theta_z[0];
    let r4 = theta_z[4] / theta_z[0];
    let l2 = r2 - r1 * r1;
    let l3 = r3 - 3.0 * r1 * r2 + 2.0 * r1.powu(3);
    let l4 = r4 - 4.0 * r1 * r3 - 3.0 * r2 * r2 + 12.0 * r1 * r1 * r2 - 6.0 * r1.powu(4);
    let p_n = -(2.0 * eta1_theta + l2);
    let pp_n = -l3;
    let ppp_n = -l4;
    let g2_theta = 12.0 * p_n * p_n - 2.0 * ppp_n;
    let g3_theta = 4.0 * p_n.powu(3) - g2_theta * p_n - pp_n * pp_n;
    let e4 = eisenstein_jet(&mp, Eisenstein::E4, 0, ctl)?[0];
    let e6 = eisenstein_jet(&mp, Eisenstein::E6, 0, ctl)?[0];
    let g2_g3_e46 = rel(g2_theta, 4.0 / 3.0 * PI.powi(4) * e4)
        .max(rel(g3_theta, 8.0 / 27.0 * PI.powi(6) * e6));

    Ok(WeierstrassResiduals {
        p_ode,
        p_second_law,
        legendre,
        addition_p,
        addition_zeta,
        zeta_quasi_periodicity,
        zeta_e2,
        g2_g3_e46,
    })
}

/// e_j(τ) = ℘(half-period j | ℤ+τℤ), j ∈ {1,2,3} (half-periods ½, τ/2,
/// (1+τ)/2).
pub fn ej_of_tau(tau: C64, j: usize, ctl: &SeriesControl) -> Result<C64> {
    let frame = lattice_invariants(c64(0.5, 0.0), tau / 2.0, ctl)?;
    match j {
        1 => Ok(frame.e1),
        2 => Ok(frame.e2),
        3 => Ok(frame.e3),
        _ => Err(SpecialFnError::DomainError(format!(
            "half-period index must be 1, 2 or 3, got {j}"
        ))),
    }
}

/// Residual of e_j′(τ)/(2iπ) = −e_j²/(2π²) + E₂e_j/6 + π²E₄/9, with the
/// τ-derivative by central finite differences (FD-limited accuracy).
pub fn ej_ode_residual(tau: C64, j: usize, ctl: &SeriesControl) -> Result<f64> {
    let h = 1e-4;
    let ejp = ej_of_tau(tau + h, j, ctl)?;
    let ejm = ej_of_tau(tau - h, j, ctl)?;
    let dej = (ejp - ejm) / (2.0 * h);
    let ej = ej_of_tau(tau, j, ctl)?;
    let mp = ModularPoint::new(tau)?;
    let e2 = eisenstein_jet(&mp, Eisenstein::E2, 0, ctl)?[0];
    let e4 = eisenstein_jet(&mp, Eisenstein::E4, 0, ctl)?[0];
    Ok(rel(
        dej / (2.0 * I * PI),
        -ej * ej / (2.0 * PI * PI) + e2 * ej / 6.0 + PI * PI / 9.0 * e4,
    ))
}

/// The three genus-1 flat-coordinate charts of the elliptic 3D family at
/// (ω₁, τ, c), with internal drift residuals against the Eisenstein route.
#[derive(Debug, Clone)]
pub struct Genus1FlatCoords {
    pub t: [C64; 3],
    pub x: [C64; 3],
    pub y: [C64; 3],
    /// x₂ − t₃ − π²/2·t₂²E₂(τ).
    pub resid_x2: f64,
    /// x₃ − iπ³/3·t₂³E₂′(τ).
    pub resid_x3: f64,
    /// y₃ + π⁴/6·t₂⁴E₂″(τ).
    pub resid_y3: f64,
}

/// Computes the t/x/y charts from the printed closed forms (ζ/g₂/g₃ route)
/// and their consistency residuals against the Eisenstein route. The y₁
/// coordinate adopts the normalization λ(P₀) = 0.
pub fn genus1_flat_coords(
    omega1: C64,
    tau: C64,
    c: C64,
    ctl: &SeriesControl,
) -> Result<Genus1FlatCoords> {
    if omega1.norm() == 0.0 {
        return Err(SpecialFnError::DomainError("omega1 must be nonzero".into()));
    }
    let frame = lattice_invariants(omega1, tau * omega1, ctl)?;
    let zw = weierstrass(omega1, &frame, Weierstrass::Zeta, ctl)?;
    let (g2, g3) = (frame.g2, frame.g3);
    let sqrt2 = std::f64::consts::SQRT_2;

    let t1 = tau / (2.0 * I * PI);
    let t2 = (sqrt2 * omega1).inv();
    let t3 = -zw / omega1 + c;
    let x1 = t2;
    let x2 = 2.0 * zw / omega1 + c;
    let x3 = sqrt2 / 6.0 * g2 * omega1 - 2.0 * sqrt2 * zw * zw / omega1;
    let y1 = t3;
    let y2 = x3;
    let y3 = g3 * omega1 * omega1 - g2 * omega1 * zw + 4.0 * zw.powu(3) / omega1;

    let mp = ModularPoint::new(tau)?;
    let jet = eisenstein_jet(&mp, Eisenstein::E2, 2, ctl)?;
    let resid_x2 = rel(x2, t3 + PI * PI / 2.0 * t2 * t2 * jet[0]);
    let resid_x3 = rel(x3, I * PI.powi(3) / 3.0 * t2.powu(3) * jet[1]);
    let resid_y3 = rel(y3, -PI.powi(4) / 6.0 * t2.powu(4) * jet[2]);

    Ok(Genus1FlatCoords {
        t: [t1, t2, t3],
        x: [x1, x2, x3],
        y: [y1, y2, y3],
        resid_x2,
        resid_x3,
        resid_y3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn chazy_holds_at_sample_moduli() {
        for tau in [c64(0.0, 0.8), c64(0.3, 1.1), c64(-0.2, 0.9)] {
            let r = chazy_residual(tau, None, &ctl()).unwrap();
            assert!(r < 1e-9, "chazy at {tau}: {r}");
        }
    }

    #[test]
    fn chazy_q_zero_is_bit_identical() {
        let tau = c64(0.1, 0.9);
        let plain = chazy_residual(tau, None, &ctl()).unwrap();
        let deformed = chazy_residual(tau, Some(C64::default()), &ctl()).unwrap();
        assert_eq!(plain.to_bits(), deformed.to_bits());
    }

    #[test]
    fn chazy_q_deformed() {
        let r = chazy_residual(c64(0.05, 0.85), Some(c64(0.2, 0.1)), &ctl()).unwrap();
        assert!(r < 1e-9, "q-chazy: {r}");
    }

    #[test]
    fn ramanujan_at_i() {
        let rs = ramanujan_residuals(c64(0.0, 1.0), None, &ctl()).unwrap();
        for (k, r) in rs.iter().enumerate() {
            assert!(*r < 1e-10, "ramanujan {k}: {r}");
        }
    }

    #[test]
    fn q_ramanujan() {
        let rs = ramanujan_residuals(c64(0.1, 0.9), Some(c64(0.15, -0.1)), &ctl()).unwrap();
        for (k, r) in rs.iter().enumerate() {
            assert!(*r < 1e-9, "q-ramanujan {k}: {r}");
        }
        // continuity near q = 0: tiny deformation stays near the plain case
        let plain = ramanujan_residuals(c64(0.1, 0.9), None, &ctl()).unwrap();
        let tiny = ramanujan_residuals(c64(0.1, 0.9), Some(c64(1e-6, 0.0)), &ctl()).unwrap();
        for (a, b) in plain.iter().zip(&tiny) {
            assert!(*b <= 10.0 * a.max(1e-12), "continuity: {a} vs {b}");
        }
    }

    #[test]
    fn e2_fd_derivative_matches_termwise() {
        let tau = c64(0.1, 0.95);
        let h = 1e-4;
        let e2 = |t: C64| {
            let mp = ModularPoint::new(t).unwrap();
            eisenstein_jet(&mp, Eisenstein::E2, 0, &ctl()).unwrap()[0]
        };
        let fd = (e2(tau + h) - e2(tau - h)) / (2.0 * h);
        let mp = ModularPoint::new(tau).unwrap();
        let term = eisenstein_jet(&mp, Eisenstein::E2, 1, &ctl()).unwrap()[1];
        assert!(rel(fd, term) < 1e-7, "{}", rel(fd, term));
    }

    #[test]
    fn q_one_deformation_is_undeformed_e2() {
        // integer deformation parameter leaves E₂ invariant (spot check)
        let tau_q = c64(0.1, 0.8);
        let j = eisenstein_q_jet(tau_q, c64(1.0, 0.0), Eisenstein::E2, 0, &ctl()).unwrap();
        let mp = ModularPoint::new(tau_q).unwrap();
        let plain = eisenstein_jet(&mp, Eisenstein::E2, 0, &ctl()).unwrap()[0];
        assert!(rel(j[0], plain) < 1e-9, "{}", rel(j[0], plain));
    }

    #[test]
    fn weierstrass_suite_residuals() {
        let frame = lattice_invariants(c64(0.5, 0.1), c64(0.1, 0.6), &ctl()).unwrap();
        let u = c64(0.21, 0.13);
        let v = c64(-0.12, 0.19);
        let res = weierstrass_suite(&frame, u, v, &ctl()).unwrap();
        assert!(res.p_ode < 1e-10, "p_ode {}", res.p_ode);
        assert!(res.p_second_law < 1e-10, "p2 {}", res.p_second_law);
        assert!(res.legendre < 1e-10, "legendre {}", res.legendre);
        assert!(res.addition_p < 1e-9, "add_p {}", res.addition_p);
        assert!(res.addition_zeta < 1e-9, "add_zeta {}", res.addition_zeta);
        assert!(
            res.zeta_quasi_periodicity < 1e-10,
            "zq {}",
            res.zeta_quasi_periodicity
        );
        assert!(res.zeta_e2 < 1e-10, "zeta_e2 {}", res.zeta_e2);
        assert!(res.g2_g3_e46 < 1e-9, "g2g3 {}", res.g2_g3_e46);
    }

    #[test]
    fn ej_ode_and_trace() {
        let tau = c64(0.0, 1.2);
        for j in 1..=3 {
            let r = ej_ode_residual(tau, j, &ctl()).unwrap();
            assert!(r < 1e-6, "e_{j} ODE: {r}");
        }
        let sum: C64 = (1..=3).map(|j| ej_of_tau(tau, j, &ctl()).unwrap()).sum();
        assert!(sum.norm() < 1e-10, "sum e_j = {sum}");
    }

    #[test]
    fn ej_permutation_under_tau_shift() {
        // τ → τ+1 maps the nome q → −q... at the level of half-periods it
        // permutes e₂ and e₃ while fixing e₁
        let tau = c64(0.15, 1.05);
        let e = |j: usize, t: C64| ej_of_tau(t, j, &ctl()).unwrap();
        assert!((e(1, tau + 1.0) - e(1, tau)).norm() < 1e-9);
        assert!((e(2, tau + 1.0) - e(3, tau)).norm() < 1e-9);
        assert!((e(3, tau + 1.0) - e(2, tau)).norm() < 1e-9);
    }

    #[test]
    fn flat_coords_example_at_square_lattice() {
        // ω₁ = ½, τ = i, c = 1: t₂ = √2 and t₃ = c − π²t₂²E₂(i)/6 with
        // E₂(i) = 3/π, so t₃ = 1 − π
        let fc = genus1_flat_coords(c64(0.5, 0.0), c64(0.0, 1.0), c64(1.0, 0.0), &ctl()).unwrap();
        assert!((fc.t[1] - std::f64::consts::SQRT_2).norm() < 1e-12, "{}", fc.t[1]);
        let expect_t3 = 1.0 - PI;
        assert!((fc.t[2] - expect_t3).norm() < 1e-10, "{} vs {expect_t3}", fc.t[2]);
        assert_eq!(fc.y[1], fc.x[2]);
    }

    #[test]
    fn flat_coords_cross_relations_vanish() {
        let fc = genus1_flat_coords(c64(0.45, 0.08), c64(0.12, 0.95), c64(0.3, -0.2), &ctl())
            .unwrap();
        assert!(fc.resid_x2 < 1e-10, "x2 {}", fc.resid_x2);
        assert!(fc.resid_x3 < 1e-9, "x3 {}", fc.resid_x3);
        assert!(fc.resid_y3 < 1e-9, "y3 {}", fc.resid_y3);
    }
}
