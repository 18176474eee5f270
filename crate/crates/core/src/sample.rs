//! Seeded sampling of admissible inputs for verification campaigns.
//!
//! All samplers draw from documented boxes that sit strictly inside the
//! domain of the corresponding evaluator, so campaign failures always point
//! at the mathematics, never at domain violations:
//!
//! * Modulus coordinates t (with τ = 2iπt) are drawn with
//!   Re t ∈ [0.12, 0.20], |Im t| ≤ 0.02, so Im τ ∈ [0.75, 1.26].
//! * Bare moduli τ for the identity suites live in Re τ ∈ [−0.4, 0.4],
//!   Im τ ∈ [0.8, 1.3].
//! * θ-function arguments keep away from lattice points; logarithm arguments
//!   keep positive real part; covering data keeps pairwise distances above
//!   the admissibility margin.
//! * The elliptic x- and y-chart families are sampled through the forward
//!   maps from (τ, t₂), keeping arg t₂ ∈ (−π/4, π/4) so the quartic-root
//!   branch in the y-chart evaluator is the principal one.

use crate::hurwitz_g0::{
    critical_data, phi0_to_phi2mj, phi0_to_phij, HurwitzError, RationalCovering,
};
use crate::prepotential_zoo::{FamilyId, ZooError};
use crate::special_fn::{eisenstein_jet, Eisenstein, ModularPoint, SeriesControl};
use crate::{c64, C64, I};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Deterministic generator for a (seed, stream) pair. Distinct campaign
/// stages use distinct streams so adding samples to one check never shifts
/// another check's draws.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn unif(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn cbox(rng: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64)) -> C64 {
    c64(unif(rng, re.0, re.1), unif(rng, im.0, im.1))
}

/// Modulus coordinate t with τ = 2iπt in the documented admissible band.
pub fn sample_modulus_coord(rng: &mut ChaCha8Rng) -> C64 {
    cbox(rng, (0.12, 0.20), (-0.02, 0.02))
}

/// Bare modulus τ for the identity suites (Chazy, Ramanujan, e_j, lattices).
pub fn sample_tau(rng: &mut ChaCha8Rng) -> C64 {
    cbox(rng, (-0.4, 0.4), (0.8, 1.3))
}

/// A point in a family's own flat chart, plus a Newton seed for evaluators
/// that must invert a modular function internally.
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub coords: Vec<C64>,
    pub tau_seed: Option<C64>,
}

/// Base-chart genus-0 sample: t₁..t_m pairwise distinct with distinct
/// exponentials, v-coordinates in a positive-real-part box, and the residual
/// weight 1 − Σv bounded away from its singular stratum (the evaluators
/// carry a (1 − Σv)·log(1 − Σv) term, and the widest verifier stencils move
/// Σv by up to ~0.1).
fn sample_g0_base(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    loop {
        let mut t = Vec::with_capacity(2 * m);
        for _ in 0..m {
            t.push(cbox(rng, (-0.6, 0.6), (-0.5, 0.5)));
        }
        for _ in 0..m {
            t.push(cbox(rng, (0.15, 0.45), (-0.1, 0.1)));
        }
        let vsum: C64 = t[m..].iter().sum();
        if (c64(1.0, 0.0) - vsum).norm() < 0.2 {
            continue;
        }
        let ok = (0..m).all(|k| {
            (0..k).all(|s| {
                (t[k] - t[s]).norm() > 0.15 && (t[k].exp() - t[s].exp()).norm() > 0.1
            })
        });
        if ok {
            return t;
        }
    }
}

/// Sample an admissible point for `fam` in its own chart.
pub fn sample_point(
    fam: &FamilyId,
    rng: &mut ChaCha8Rng,
    ctl: &SeriesControl,
) -> Result<SamplePoint, ZooError> {
    let plain = |coords: Vec<C64>| SamplePoint {
        coords,
        tau_seed: None,
    };
    match fam {
        FamilyId::G0Phi0 { m } => Ok(plain(sample_g0_base(rng, *m))),
        FamilyId::G0M2Remark { .. } => Ok(plain(sample_g0_base(rng, 2))),
        FamilyId::G0PhiJ { m, j } => {
            let t = sample_g0_base(rng, *m);
            let x = phi0_to_phij(&t, *m, *j).map_err(hurwitz_to_zoo)?;
            Ok(plain(x))
        }
        FamilyId::G0Phi2mJ { m, j } => {
            let t = sample_g0_base(rng, *m);
            let y = phi0_to_phi2mj(&t, *m, *j).map_err(hurwitz_to_zoo)?;
            Ok(plain(y))
        }
        FamilyId::G1Holo { m } | FamilyId::G1HoloQ { m, .. } => {
            Ok(plain(sample_g1_holo(rng, *m)))
        }
        FamilyId::G1HoloM1 => Ok(plain(sample_g1_holo(rng, 1))),
        FamilyId::G13dPhi1 | FamilyId::G13dQPhi1 { .. } => Ok(plain(vec![
            sample_modulus_coord(rng),
            cbox(rng, (0.15, 0.45), (-0.1, 0.1)),
            cbox(rng, (-0.5, 0.5), (-0.5, 0.5)),
        ])),
        FamilyId::G13dPhi2 => {
            let (tau, t2) = sample_tau_t2(rng);
            let mp = ModularPoint::new(tau)?;
            let jet = eisenstein_jet(&mp, Eisenstein::E2, 1, ctl)?;
            let x3 = I * PI.powi(3) / 3.0 * t2.powu(3) * jet[1];
            Ok(SamplePoint {
                coords: vec![t2, cbox(rng, (-0.5, 0.5), (-0.5, 0.5)), x3],
                tau_seed: Some(tau),
            })
        }
        FamilyId::G13dPhi3 => {
            let (tau, t2) = sample_tau_t2(rng);
            let mp = ModularPoint::new(tau)?;
            let jet = eisenstein_jet(&mp, Eisenstein::E2, 2, ctl)?;
            let y2 = I * PI.powi(3) / 3.0 * t2.powu(3) * jet[1];
            let y3 = -PI.powi(4) / 6.0 * t2.powu(4) * jet[2];
            Ok(SamplePoint {
                coords: vec![cbox(rng, (-0.5, 0.5), (-0.5, 0.5)), y2, y3],
                tau_seed: Some(tau),
            })
        }
    }
}

/// (τ, t₂) pair for the elliptic x/y charts: t₂ nearly positive-real so the
/// principal quartic root used by the y-chart evaluator matches.
///
/// The modulus is kept in the low-Im part of the strip (Im τ ∈ [0.75, 0.94])
/// and t₂ away from zero: E₂′ and E₂″ decay like e^{−2π·Im τ}, so higher
/// moduli (or small t₂) make the chart inversions τ(x₃), τ(y₂, y₃) extremely
/// sensitive (|dτ/dx₃| ∝ 1/(|t₂|³|E₂″|) reaches ~50 at the top of the full
/// strip), which wrecks finite-difference conditioning and Newton stability.
fn sample_tau_t2(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let tau = 2.0 * I * PI * cbox(rng, (0.12, 0.15), (-0.02, 0.02));
    let t2 = cbox(rng, (0.25, 0.45), (-0.03, 0.03));
    (tau, t2)
}

/// Coordinates (t₀, t₁..t_m, t_{m+1}..t_{2m+1}) for the genus-1 holomorphic
/// families: modulus box, distinct θ-arguments off the lattice, and
/// positive-real-part weights (log arguments, nonzero sum).
fn sample_g1_holo(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    loop {
        let mut t = Vec::with_capacity(2 * m + 2);
        t.push(sample_modulus_coord(rng));
        for _ in 0..m {
            t.push(cbox(rng, (0.1, 0.4), (-0.08, 0.08)));
        }
        for _ in 0..(m + 1) {
            t.push(cbox(rng, (0.15, 0.45), (-0.1, 0.1)));
        }
        let args_ok = (1..=m).all(|k| {
            t[k].norm() > 0.05 && (1..k).all(|s| (t[k] - t[s]).norm() > 0.06)
        });
        if args_ok {
            return t;
        }
    }
}

fn hurwitz_to_zoo(e: HurwitzError) -> ZooError {
    ZooError::DomainError(format!("chart sampling: {e}"))
}

/// Random admissible covering of degree m+1 with well-separated simple
/// critical values; retries draws until both the covering constructor and
/// the critical-data solver accept.
pub fn sample_covering(m: usize, rng: &mut ChaCha8Rng) -> Result<RationalCovering, HurwitzError> {
    for _ in 0..200 {
        let mut a = Vec::with_capacity(m);
        for k in 0..m {
            let theta = 2.0 * PI * (k as f64 + unif(rng, 0.12, 0.88)) / m as f64;
            let r = unif(rng, 0.7, 1.4);
            a.push(r * (I * theta).exp());
        }
        let mut tail = Vec::with_capacity(m);
        let mut bsum = C64::default();
        for _ in 0..m {
            let bk = cbox(rng, (0.1, 0.5), (-0.1, 0.1));
            bsum += bk;
            tail.push(bk);
        }
        // rescale the residues so b₀ = 1 − Σ_k b_k stays well away from zero
        let target = cbox(rng, (0.35, 0.65), (-0.08, 0.08));
        let scale = target / bsum;
        let mut b = Vec::with_capacity(m + 1);
        b.push(c64(1.0, 0.0) - target);
        for bk in &mut tail {
            *bk *= scale;
        }
        b.extend_from_slice(&tail);
        let cov = match RationalCovering::new(a, b) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if critical_data(&cov, 1e-10).is_ok() {
            return Ok(cov);
        }
    }
    Err(HurwitzError::DegenerateCovering(
        "no admissible covering found in 200 draws".into(),
    ))
}

/// Torus points (u, v) for the Weierstrass suite on a frame with
/// half-periods ω₁, ω₂: interior lattice fractions keeping u, v, u±v and
/// the quasi-periodicity shifts away from poles, and ℘(u) ≠ ℘(v).
pub fn sample_torus_pair(rng: &mut ChaCha8Rng, omega1: C64, omega2: C64) -> (C64, C64) {
    loop {
        let au = unif(rng, 0.12, 0.38);
        let bu = unif(rng, 0.12, 0.38);
        let av = unif(rng, 0.55, 0.82);
        let bv = unif(rng, 0.12, 0.38);
        let u = 2.0 * (au * omega1 + bu * omega2);
        let v = 2.0 * (av * omega1 + bv * omega2);
        // u ± v must avoid lattice points: fractional parts bounded away
        let s1 = (au + av).fract();
        let s2 = (bu + bv).fract();
        let d1 = (au - av).rem_euclid(1.0);
        let d2 = (bu - bv).rem_euclid(1.0);
        let margin = |x: f64| x.min(1.0 - x) > 0.05;
        // ℘(u) = ℘(v) iff u ≡ ±v; both branches are excluded by the margins
        if margin(s1) && margin(s2) && margin(d1) && margin(d2) {
            return (u, v);
        }
    }
}

/// Lattice half-periods for the Weierstrass campaigns: ω₁ near ½ with a
/// mild tilt, ω₂ = τω₁ with τ from the identity-suite box.
pub fn sample_lattice(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let omega1 = cbox(rng, (0.4, 0.6), (-0.08, 0.08));
    let tau = sample_tau(rng);
    (omega1, tau * omega1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prepotential_zoo::eval_prepotential;

    #[test]
    fn sampling_is_deterministic() {
        let ctl = SeriesControl::default();
        let fam = FamilyId::G13dPhi1;
        let a = sample_point(&fam, &mut rng_for(7, 3), &ctl).unwrap();
        let b = sample_point(&fam, &mut rng_for(7, 3), &ctl).unwrap();
        assert_eq!(a.coords, b.coords);
        let c = sample_point(&fam, &mut rng_for(8, 3), &ctl).unwrap();
        assert_ne!(a.coords, c.coords);
    }

    #[test]
    fn sampled_points_are_evaluable() {
        let ctl = SeriesControl::default();
        let fams = [
            FamilyId::G0Phi0 { m: 2 },
            FamilyId::G0PhiJ { m: 2, j: 1 },
            FamilyId::G0Phi2mJ { m: 3, j: 2 },
            FamilyId::G1Holo { m: 2 },
            FamilyId::G13dPhi1,
            FamilyId::G13dPhi2,
            FamilyId::G13dPhi3,
        ];
        let mut rng = rng_for(11, 0);
        for fam in &fams {
            for _ in 0..3 {
                let p = sample_point(fam, &mut rng, &ctl).unwrap();
                let val = crate::prepotential_zoo::eval_prepotential_seeded(
                    fam,
                    &p.coords,
                    &ctl,
                    p.tau_seed,
                );
                assert!(val.is_ok(), "{fam:?}: {val:?}");
                assert!(val.unwrap().norm().is_finite());
            }
        }
        let q = c64(0.2, 0.1);
        let famq = FamilyId::G13dQPhi1 { q };
        let p = sample_point(&famq, &mut rng, &ctl).unwrap();
        assert!(eval_prepotential(&famq, &p.coords, &ctl).is_ok());
    }

    #[test]
    fn sampled_coverings_are_admissible() {
        let mut rng = rng_for(3, 9);
        for m in [2usize, 3, 4] {
            let cov = sample_covering(m, &mut rng).unwrap();
            assert_eq!(cov.m, m);
            let bd = critical_data(&cov, 1e-10).unwrap();
            assert_eq!(bd.alpha.len(), 2 * m);
        }
    }

    #[test]
    fn torus_pairs_stay_off_poles() {
        let mut rng = rng_for(5, 1);
        let (w1, w2) = sample_lattice(&mut rng);
        let ctl = SeriesControl::default();
        let frame = crate::special_fn::lattice_invariants(w1, w2, &ctl).unwrap();
        for _ in 0..10 {
            let (u, v) = sample_torus_pair(&mut rng, w1, w2);
            let res = crate::identity_suite::weierstrass_suite(&frame, u, v, &ctl);
            assert!(res.is_ok(), "{res:?}");
        }
    }
}
