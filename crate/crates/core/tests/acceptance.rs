//! Acceptance gate: twelve numbered criteria, each printing one PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`). Every
//! tolerance is pinned here, independent of the campaign defaults.

use rand::Rng;
use wdvv_lab_core::campaign::{deriv_spec_for, run_hurwitz, run_selftest, CampaignConfig};
use wdvv_lab_core::identity_suite::{
    chazy_residual, ej_ode_residual, ramanujan_residuals, weierstrass_suite,
};
use wdvv_lab_core::prepotential_zoo::{eval_prepotential, FamilyId};
use wdvv_lab_core::sample::{
    rng_for, sample_lattice, sample_point, sample_tau, sample_torus_pair,
};
use wdvv_lab_core::special_fn::{lattice_invariants, SeriesControl};
use wdvv_lab_core::wdvv_verifier::{
    check_associativity, check_eta_recovery, check_hessian_consistency, check_quasihomogeneity,
};
use wdvv_lab_core::{c64, C64};

const SEED: u64 = 20260823;

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

/// Runs `body`, prints the single criterion line, and propagates failure.
fn criterion(id: u32, label: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("ACCEPTANCE {id:2}: PASS — {label}"),
        Err(e) => {
            println!("ACCEPTANCE {id:2}: FAIL — {label}: {e}");
            panic!("criterion {id} failed: {e}");
        }
    }
}

fn max_over_samples(
    fam: &FamilyId,
    n_points: usize,
    stream: u64,
    mut f: impl FnMut(&FamilyId, &[C64], Option<C64>) -> Result<f64, String>,
) -> Result<f64, String> {
    let ctl = ctl();
    let mut rng = rng_for(SEED, stream);
    let mut worst = 0.0f64;
    for i in 0..n_points {
        let pt = sample_point(fam, &mut rng, &ctl)
            .map_err(|e| format!("{} sample {i}: {e}", fam.name()))?;
        let r = f(fam, &pt.coords, pt.tau_seed)
            .map_err(|e| format!("{} sample {i}: {e}", fam.name()))?;
        if !r.is_finite() {
            return Err(format!("{} sample {i}: non-finite residual", fam.name()));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

fn assoc_of(fam: &FamilyId, t: &[C64], hint: Option<C64>) -> Result<f64, String> {
    check_associativity(fam, t, &deriv_spec_for(fam), &ctl(), hint).map_err(|e| e.to_string())
}

fn eta_of(fam: &FamilyId, t: &[C64], hint: Option<C64>) -> Result<f64, String> {
    check_eta_recovery(fam, t, &deriv_spec_for(fam), &ctl(), hint).map_err(|e| e.to_string())
}

fn homog_of(fam: &FamilyId, t: &[C64], hint: Option<C64>) -> Result<f64, String> {
    check_quasihomogeneity(fam, t, &deriv_spec_for(fam), &ctl(), hint).map_err(|e| e.to_string())
}

fn require(worst: f64, tol: f64, what: &str) -> Result<(), String> {
    if worst <= tol {
        Ok(())
    } else {
        Err(format!("{what}: worst residual {worst:e} > {tol:e}"))
    }
}

#[test]
fn criterion_01_base_chart_wdvv_and_eta() {
    criterion(1, "base-chart WDVV and unit contraction, m ∈ {2,3}", || {
        for m in [2usize, 3] {
            let fam = FamilyId::G0Phi0 { m };
            let a = max_over_samples(&fam, 20, 101, assoc_of)?;
            require(a, 1e-5, &format!("associativity m={m}"))?;
            let e = max_over_samples(&fam, 20, 102, eta_of)?;
            require(e, 1e-5, &format!("eta recovery m={m}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_02_dual_chart_wdvv_and_unit_slice() {
    criterion(2, "x/y-chart WDVV and unit-slice η (m=2, j=1,2)", || {
        for j in [1usize, 2] {
            for fam in [FamilyId::G0PhiJ { m: 2, j }, FamilyId::G0Phi2mJ { m: 2, j }] {
                let a = max_over_samples(&fam, 20, 200 + j as u64, assoc_of)?;
                require(a, 1e-5, &format!("associativity {}", fam.name()))?;
                let e = max_over_samples(&fam, 20, 210 + j as u64, eta_of)?;
                require(e, 1e-7, &format!("unit slice {}", fam.name()))?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_03_euler_homogeneity() {
    criterion(3, "Euler quasi-homogeneity across the printed families", || {
        let fams = [
            FamilyId::G0Phi0 { m: 2 },
            FamilyId::G0Phi0 { m: 3 },
            FamilyId::G0PhiJ { m: 2, j: 1 },
            FamilyId::G0PhiJ { m: 2, j: 2 },
            FamilyId::G0Phi2mJ { m: 2, j: 1 },
            FamilyId::G0Phi2mJ { m: 2, j: 2 },
            FamilyId::G1Holo { m: 1 },
            FamilyId::G1Holo { m: 2 },
        ];
        for (k, fam) in fams.iter().enumerate() {
            let h = max_over_samples(fam, 20, 300 + k as u64, homog_of)?;
            require(h, 1e-6, &format!("homogeneity {}", fam.name()))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_04_theta_prepotential() {
    criterion(4, "genus-1 θ-prepotential WDVV, η, and m=1 specialization", || {
        for m in [1usize, 2] {
            let fam = FamilyId::G1Holo { m };
            let a = max_over_samples(&fam, 20, 400 + m as u64, assoc_of)?;
            require(a, 1e-5, &format!("associativity m={m}"))?;
            let e = max_over_samples(&fam, 20, 410 + m as u64, eta_of)?;
            require(e, 1e-7, &format!("eta recovery m={m}"))?;
        }
        let ctl = ctl();
        let mut rng = rng_for(SEED, 420);
        let general = FamilyId::G1Holo { m: 1 };
        for i in 0..10 {
            let pt = sample_point(&general, &mut rng, &ctl).map_err(|e| e.to_string())?;
            let a = eval_prepotential(&general, &pt.coords, &ctl).map_err(|e| e.to_string())?;
            let b = eval_prepotential(&FamilyId::G1HoloM1, &pt.coords, &ctl)
                .map_err(|e| e.to_string())?;
            let rel = (a - b).norm() / a.norm().max(1.0);
            require(rel, 1e-10, &format!("pointwise match sample {i}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_05_three_dim_family_and_chazy() {
    criterion(5, "3D t-chart WDVV, Hessian closed form, Chazy equation", || {
        let fam = FamilyId::G13dPhi1;
        let a = max_over_samples(&fam, 20, 500, assoc_of)?;
        require(a, 1e-6, "associativity")?;
        let h = max_over_samples(&fam, 20, 501, |f, t, hint| {
            check_hessian_consistency(f, t, &deriv_spec_for(f), &ctl(), hint)
                .map_err(|e| e.to_string())
        })?;
        require(h, 1e-6, "Hessian consistency")?;
        let ctl = ctl();
        let mut rng = rng_for(SEED, 502);
        for i in 0..20 {
            let tau = sample_tau(&mut rng);
            let r = chazy_residual(tau, None, &ctl).map_err(|e| e.to_string())?;
            require(r, 1e-9, &format!("Chazy at modulus {i}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_06_ramanujan_systems() {
    criterion(6, "Ramanujan system and its q-deformation", || {
        let ctl = ctl();
        let mut rng = rng_for(SEED, 600);
        for i in 0..50 {
            let tau = sample_tau(&mut rng);
            let rs = ramanujan_residuals(tau, None, &ctl).map_err(|e| e.to_string())?;
            for (k, r) in rs.iter().enumerate() {
                require(*r, 1e-10, &format!("Ramanujan eq {k} at modulus {i}"))?;
            }
        }
        let mut rng = rng_for(SEED, 601);
        for i in 0..20 {
            let tau = sample_tau(&mut rng);
            // first pair pins the q = 0 degeneration
            let q = if i == 0 {
                C64::default()
            } else {
                c64(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25))
            };
            let rs = ramanujan_residuals(tau, Some(q), &ctl).map_err(|e| e.to_string())?;
            for (k, r) in rs.iter().enumerate() {
                require(*r, 1e-9, &format!("q-Ramanujan eq {k} at pair {i}"))?;
            }
            if i == 0 {
                let plain = ramanujan_residuals(tau, None, &ctl).map_err(|e| e.to_string())?;
                for k in 0..3 {
                    require((rs[k] - plain[k]).abs(), 0.0, "q = 0 degeneration")?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_07_weierstrass_suite() {
    criterion(7, "Weierstrass/θ identity suite on 100 samples", || {
        let ctl = ctl();
        let mut rng = rng_for(SEED, 700);
        for i in 0..100 {
            let (omega1, omega2) = sample_lattice(&mut rng);
            let frame = lattice_invariants(omega1, omega2, &ctl).map_err(|e| e.to_string())?;
            let (u, v) = sample_torus_pair(&mut rng, omega1, omega2);
            let res = weierstrass_suite(&frame, u, v, &ctl).map_err(|e| e.to_string())?;
            for (name, r) in res.entries() {
                // the two addition theorems and the invariant cross-check mix
                // independently rounded factors; everything else is series-only
                let tol = match name {
                    "addition-p" | "addition-zeta" | "g2-g3-E46" => 1e-9,
                    _ => 1e-10,
                };
                require(r, tol, &format!("{name} at sample {i}"))?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_08_gram_duality_residues() {
    criterion(8, "Gram pairings: anti-identity and 1+δ for m ∈ {2,3,4}", || {
        let cfg = CampaignConfig::new(SEED, 10);
        let report = run_hurwitz(&cfg, &ctl());
        let mut seen = 0usize;
        for rec in &report.records {
            match rec.check_id.as_str() {
                "gram-eta" | "gram-intersection" => {
                    seen += 1;
                    require(rec.residual, 1e-9, &format!("{} {}", rec.check_id, rec.family))?;
                }
                _ => {}
            }
        }
        if seen < 60 {
            return Err(format!("expected ≥60 gram records, found {seen}"));
        }
        Ok(())
    });
}

#[test]
fn criterion_09_chart_machinery() {
    criterion(9, "sum rules, λ-Jacobian, generic-assembler agreement", || {
        let cfg = CampaignConfig::new(SEED, 10);
        let report = run_hurwitz(&cfg, &ctl());
        let mut counts = [0usize; 3];
        for rec in &report.records {
            let (slot, tol) = match rec.check_id.as_str() {
                "sum-rules" => (0, 1e-10),
                "lambda-jacobian" => (1, 1e-5),
                id if id.starts_with("assembler-") => (2, 1e-5),
                _ => continue,
            };
            counts[slot] += 1;
            require(rec.residual, tol, &format!("{} {}", rec.check_id, rec.family))?;
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(format!("missing record groups: counts {counts:?}"));
        }
        Ok(())
    });
}

#[test]
fn criterion_10_q_deformed_three_dim() {
    criterion(10, "q-deformed 3D chart WDVV and q = 0 reduction", || {
        for q in [C64::default(), c64(0.2, 0.1)] {
            let fam = FamilyId::G13dQPhi1 { q };
            let a = max_over_samples(&fam, 20, 1000 + (q.norm() * 10.0) as u64, assoc_of)?;
            require(a, 1e-5, &format!("associativity q={q}"))?;
        }
        let ctl = ctl();
        let mut rng = rng_for(SEED, 1002);
        let plain = FamilyId::G13dPhi1;
        let zero = FamilyId::G13dQPhi1 { q: C64::default() };
        for i in 0..10 {
            let pt = sample_point(&plain, &mut rng, &ctl).map_err(|e| e.to_string())?;
            let a = eval_prepotential(&plain, &pt.coords, &ctl).map_err(|e| e.to_string())?;
            let b = eval_prepotential(&zero, &pt.coords, &ctl).map_err(|e| e.to_string())?;
            let rel = (a - b).norm() / a.norm().max(1.0);
            require(rel, 1e-13, &format!("q = 0 reduction sample {i}"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_11_half_period_ode() {
    criterion(11, "half-period value ODE for each branch point", || {
        let ctl = ctl();
        for j in 1usize..=3 {
            let mut rng = rng_for(SEED, 1100 + j as u64);
            for i in 0..20 {
                let tau = sample_tau(&mut rng);
                let r = ej_ode_residual(tau, j, &ctl).map_err(|e| e.to_string())?;
                require(r, 1e-6, &format!("e_{j} ODE at modulus {i}"))?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_12_selftest_determinism() {
    criterion(12, "selftest determinism (identical reports modulo timing)", || {
        let cfg = CampaignConfig::new(SEED, 2);
        let ctl = ctl();
        let a = run_selftest(&cfg, &ctl);
        let b = run_selftest(&cfg, &ctl);
        if !a.all_pass() {
            return Err("first selftest run has failures".into());
        }
        if a.deterministic_json() != b.deterministic_json() {
            return Err("reports differ beyond timing fields".into());
        }
        Ok(())
    });
}
