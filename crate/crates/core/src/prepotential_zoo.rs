//! Closed-form evaluators for every explicit prepotential family, with the
//! verification metadata (flat metric η, unit field, Euler data, degree ν,
//! quadratic correction Q) each family carries.
//!
//! Family catalogue (coordinate vectors are 0-based; the 1-based/0-based
//! index layouts quoted below follow each family's printed display):
//!
//! * `G0_Phi0(m)` — genus-0, t-chart, indices 1…2m:
//!   F = Σ t_{2m+1−k}e^{t_k} + ½Σ(t_{2m+1−k})²(t_k + log t_{2m+1−k})
//!     + ½Σ_{s≠k} t_{2m+1−k}t_{2m+1−s} log(e^{t_s}−e^{t_k}).
//! * `G0_PhiJ(m,j)` / `G0_Phi2mJ(m,j)` — genus-0 x-/y-charts of the third-
//!   and second-kind differentials.
//! * `G0_M2_Remark(F1|F2|F3)` — the printed m = 2 specializations (j = 1).
//! * `G1_Holo(m)` — genus-1 θ₁ family, indices 0…2m+1, modulus τ = 2iπt₀.
//! * `G1_Holo_M1` — the printed m = 1 specialization of `G1_Holo`.
//! * `G1_3D_Phi1/Phi2/Phi3` — the 3-dimensional elliptic family; Phi2/Phi3
//!   require the inverse functions (E₂′)⁻¹ and χ⁻¹ with
//!   χ = (E₂″)³/(E₂′)⁴, computed by damped Newton iteration.
//! * `G1_3D_QPhi1(q)` / `G1_Holo_Q(m,q)` — one-parameter q-deformations
//!   reducing to the undeformed families at q = 0.
//!
//! The branch convention log(−1) = +iπ is fixed throughout.

use crate::special_fn::{
    eisenstein_jet, eisenstein_q_jet, theta1_jet, Eisenstein, ModularPoint, SeriesControl,
    SpecialFnError,
};
use crate::{c64, C64, I};
use std::f64::consts::PI;
use thiserror::Error;

/// Errors raised by prepotential evaluation.
#[derive(Debug, Clone, Error)]
pub enum ZooError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("inverse-function Newton solve failed: {0}")]
    InversionError(String),
}

impl From<SpecialFnError> for ZooError {
    fn from(e: SpecialFnError) -> Self {
        ZooError::DomainError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ZooError>;

/// Printed m = 2 specialization selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M2Variant {
    F1,
    F2,
    F3,
}

/// Identifier of an explicit prepotential family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyId {
    G0Phi0 { m: usize },
    G0PhiJ { m: usize, j: usize },
    G0Phi2mJ { m: usize, j: usize },
    G0M2Remark { variant: M2Variant },
    G1Holo { m: usize },
    G1HoloM1,
    G13dPhi1,
    G13dPhi2,
    G13dPhi3,
    G13dQPhi1 { q: C64 },
    G1HoloQ { m: usize, q: C64 },
}

impl FamilyId {
    /// Dimension N of the family's coordinate vector.
    pub fn n(&self) -> usize {
        match self {
            FamilyId::G0Phi0 { m } | FamilyId::G0PhiJ { m, .. } | FamilyId::G0Phi2mJ { m, .. } => {
                2 * m
            }
            FamilyId::G0M2Remark { .. } => 4,
            FamilyId::G1Holo { m } | FamilyId::G1HoloQ { m, .. } => 2 * m + 2,
            FamilyId::G1HoloM1 => 4,
            FamilyId::G13dPhi1
            | FamilyId::G13dPhi2
            | FamilyId::G13dPhi3
            | FamilyId::G13dQPhi1 { .. } => 3,
        }
    }

    fn validate(&self) -> Result<()> {
        let check_m = |m: usize| {
            if m < 2 {
                Err(ZooError::DomainError("family requires m >= 2".into()))
            } else {
                Ok(())
            }
        };
        let check_j = |m: usize, j: usize| {
            if j == 0 || j > m {
                Err(ZooError::DomainError(format!(
                    "differential index j must lie in 1..={m}, got {j}"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            FamilyId::G0Phi0 { m } => check_m(m),
            FamilyId::G0PhiJ { m, j } | FamilyId::G0Phi2mJ { m, j } => {
                check_m(m)?;
                check_j(m, j)
            }
            FamilyId::G1Holo { m } | FamilyId::G1HoloQ { m, .. } => {
                if m == 0 {
                    Err(ZooError::DomainError("family requires m >= 1".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Canonical display name, parseable by [`FamilyId::parse`].
    pub fn name(&self) -> String {
        let fmt_c = |z: C64| format!("{}{}{}i", z.re, if z.im < 0.0 { "" } else { "+" }, z.im);
        match self {
            FamilyId::G0Phi0 { m } => format!("G0_Phi0({m})"),
            FamilyId::G0PhiJ { m, j } => format!("G0_PhiJ({m},{j})"),
            FamilyId::G0Phi2mJ { m, j } => format!("G0_Phi2mJ({m},{j})"),
            FamilyId::G0M2Remark { variant } => format!("G0_M2_Remark({variant:?})"),
            FamilyId::G1Holo { m } => format!("G1_Holo({m})"),
            FamilyId::G1HoloM1 => "G1_Holo_M1".into(),
            FamilyId::G13dPhi1 => "G1_3D_Phi1".into(),
            FamilyId::G13dPhi2 => "G1_3D_Phi2".into(),
            FamilyId::G13dPhi3 => "G1_3D_Phi3".into(),
            FamilyId::G13dQPhi1 { q } => format!("G1_3D_QPhi1({})", fmt_c(*q)),
            FamilyId::G1HoloQ { m, q } => format!("G1_Holo_Q({m},{})", fmt_c(*q)),
        }
    }

    /// Parses a family name like `G0_PhiJ(2,1)` or `G1_3D_QPhi1(0.2+0.1i)`.
    pub fn parse(s: &str) -> Option<FamilyId> {
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(p) => {
                let tail = s.strip_suffix(')')?;
                (&s[..p], tail[p + 1..].split(',').collect::<Vec<_>>())
            }
            None => (s, Vec::new()),
        };
        let arg_usize = |i: usize| args.get(i).and_then(|a| a.trim().parse::<usize>().ok());
        let arg_c64 = |i: usize| args.get(i).and_then(|a| crate::parse_c64(a.trim()));
        let fam = match head {
            "G0_Phi0" => FamilyId::G0Phi0 { m: arg_usize(0)? },
            "G0_PhiJ" => FamilyId::G0PhiJ {
                m: arg_usize(0)?,
                j: arg_usize(1)?,
            },
            "G0_Phi2mJ" => FamilyId::G0Phi2mJ {
                m: arg_usize(0)?,
                j: arg_usize(1)?,
            },
            "G0_M2_Remark" => {
                let v = match args.first().map(|a| a.trim()) {
                    Some("F1") => M2Variant::F1,
                    Some("F2") => M2Variant::F2,
                    Some("F3") => M2Variant::F3,
                    _ => return None,
                };
                FamilyId::G0M2Remark { variant: v }
            }
            "G1_Holo" => FamilyId::G1Holo { m: arg_usize(0)? },
            "G1_Holo_M1" => FamilyId::G1HoloM1,
            "G1_3D_Phi1" => FamilyId::G13dPhi1,
            "G1_3D_Phi2" => FamilyId::G13dPhi2,
            "G1_3D_Phi3" => FamilyId::G13dPhi3,
            "G1_3D_QPhi1" => FamilyId::G13dQPhi1 { q: arg_c64(0)? },
            "G1_Holo_Q" => FamilyId::G1HoloQ {
                m: arg_usize(0)?,
                q: arg_c64(1)?,
            },
            _ => return None,
        };
        fam.validate().ok()?;
        Some(fam)
    }
}

/// Unit vector field of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitField {
    /// e = ∂ in a fixed coordinate direction (0-based index).
    Direction(usize),
    /// Non-constant coefficients f_α(t) (the `G0_Phi0` family); obtain them
    /// from [`unit_coefficients`].
    Coefficients,
}

/// Verification metadata of a family.
#[derive(Debug, Clone)]
pub struct FamilyMetadata {
    pub n: usize,
    pub unit: UnitField,
    /// Per-coordinate Euler data (d_α, r_α) with E.t_α = d_α t_α + r_α.
    pub euler: Vec<(f64, C64)>,
    /// Quasi-homogeneity degree ν: E.F = νF + Q(t).
    pub degree: f64,
}

impl FamilyMetadata {
    /// η entry (0-based); all families carry the anti-identity.
    pub fn eta_entry(&self, i: usize, j: usize) -> f64 {
        if i + j == self.n - 1 {
            1.0
        } else {
            0.0
        }
    }

    /// Dense anti-identity η as a row-major matrix.
    pub fn eta(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.eta_entry(i, j)).collect())
            .collect()
    }
}

/// Metadata of `fam`: dimension, unit field, Euler data, degree.
pub fn family_metadata(fam: &FamilyId) -> Result<FamilyMetadata> {
    fam.validate()?;
    let n = fam.n();
    let one = c64(1.0, 0.0);
    let meta = match *fam {
        FamilyId::G0Phi0 { m } => {
            let mut euler = vec![(0.0, one); m];
            euler.extend(vec![(1.0, C64::default()); m]);
            FamilyMetadata {
                n,
                unit: UnitField::Coefficients,
                euler,
                degree: 2.0,
            }
        }
        FamilyId::G0PhiJ { m, j } => {
            // E.x_{j,s} = 1 + δ_{js}, E.x_{j,2m+1−s} = x_{j,2m+1−s}
            let mut euler = Vec::with_capacity(n);
            for s in 1..=m {
                euler.push((0.0, if s == j { 2.0 * one } else { one }));
            }
            euler.extend(vec![(1.0, C64::default()); m]);
            FamilyMetadata {
                n,
                unit: UnitField::Direction(2 * m - j),
                euler,
                degree: 2.0,
            }
        }
        FamilyId::G0Phi2mJ { m, j } => {
            // E.y_{j,s} = y_{j,s}, E.y_{j,2m+1−s} = 2y_{j,2m+1−s}
            let mut euler = vec![(1.0, C64::default()); m];
            euler.extend(vec![(2.0, C64::default()); m]);
            FamilyMetadata {
                n,
                unit: UnitField::Direction(j - 1),
                euler,
                degree: 4.0,
            }
        }
        FamilyId::G0M2Remark { variant } => {
            let base = match variant {
                M2Variant::F1 => FamilyId::G0Phi0 { m: 2 },
                M2Variant::F2 => FamilyId::G0PhiJ { m: 2, j: 1 },
                M2Variant::F3 => FamilyId::G0Phi2mJ { m: 2, j: 1 },
            };
            family_metadata(&base)?
        }
        FamilyId::G1Holo { m } | FamilyId::G1HoloQ { m, .. } => {
            // E = Σ_{k=0}^m t_{2m+1−k} ∂_{t_{2m+1−k}}
            let mut euler = vec![(0.0, C64::default()); m + 1];
            euler.extend(vec![(1.0, C64::default()); m + 1]);
            FamilyMetadata {
                n,
                unit: UnitField::Direction(2 * m + 1),
                euler,
                degree: 2.0,
            }
        }
        FamilyId::G1HoloM1 => family_metadata(&FamilyId::G1Holo { m: 1 })?,
        FamilyId::G13dPhi1 | FamilyId::G13dQPhi1 { .. } => FamilyMetadata {
            n,
            unit: UnitField::Direction(2),
            euler: vec![(0.0, C64::default()), (0.5, C64::default()), (1.0, C64::default())],
            degree: 2.0,
        },
        FamilyId::G13dPhi2 => FamilyMetadata {
            n,
            unit: UnitField::Direction(1),
            euler: vec![(0.5, C64::default()), (1.0, C64::default()), (1.5, C64::default())],
            degree: 3.0,
        },
        FamilyId::G13dPhi3 => FamilyMetadata {
            n,
            unit: UnitField::Direction(0),
            euler: vec![(1.0, C64::default()), (1.5, C64::default()), (2.0, C64::default())],
            degree: 4.0,
        },
    };
    Ok(meta)
}

/// Unit-field coefficients f_α(t) with e = Σ f_α ∂_α. Constant-direction
/// families return the indicator vector.
pub fn unit_coefficients(fam: &FamilyId, t: &[C64]) -> Result<Vec<C64>> {
    let meta = family_metadata(fam)?;
    check_len(fam, t)?;
    match meta.unit {
        UnitField::Direction(idx) => {
            let mut e = vec![C64::default(); meta.n];
            e[idx] = c64(1.0, 0.0);
            Ok(e)
        }
        UnitField::Coefficients => {
            let m = meta.n / 2;
            Ok(crate::hurwitz_g0::phi0_unit_components(t, m))
        }
    }
}

/// Quadratic correction Q(t) in E.F = νF + Q(t).
pub fn quadratic_correction(fam: &FamilyId, t: &[C64]) -> Result<C64> {
    fam.validate()?;
    check_len(fam, t)?;
    // helper: c_diag·Σv_k² + ½Σ_{s≠k}v_kv_s over the listed components
    let quad = |v: &[C64], c_diag: f64| -> C64 {
        let sum: C64 = v.iter().sum();
        let sum_sq: C64 = v.iter().map(|z| z * z).sum();
        c_diag * sum_sq + 0.5 * (sum * sum - sum_sq)
    };
    match *fam {
        FamilyId::G0Phi0 { m } | FamilyId::G0PhiJ { m, .. } | FamilyId::G0Phi2mJ { m, .. } => {
            // high coordinates t_{2m+1−k} = vec indices m..2m
            Ok(quad(&t[m..], 1.0))
        }
        FamilyId::G0M2Remark { .. } => Ok(quad(&t[2..], 1.0)),
        FamilyId::G1Holo { m } | FamilyId::G1HoloQ { m, .. } => {
            // ½Σ(t_{2m+1−k})² + ½(Σt_{2m+1−k})², k = 1..m (indices m+1..2m+1)
            let v = &t[m + 1..2 * m + 1];
            let sum: C64 = v.iter().sum();
            let sum_sq: C64 = v.iter().map(|z| z * z).sum();
            Ok(0.5 * sum_sq + 0.5 * sum * sum)
        }
        FamilyId::G1HoloM1 => Ok(t[2] * t[2]),
        FamilyId::G13dPhi1
        | FamilyId::G13dPhi2
        | FamilyId::G13dPhi3
        | FamilyId::G13dQPhi1 { .. } => Ok(C64::default()),
    }
}

fn check_len(fam: &FamilyId, t: &[C64]) -> Result<()> {
    if t.len() != fam.n() {
        return Err(ZooError::DomainError(format!(
            "family {} expects {} coordinates, got {}",
            fam.name(),
            fam.n(),
            t.len()
        )));
    }
    Ok(())
}

fn ln_checked(z: C64, what: &str) -> Result<C64> {
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(ZooError::DomainError(format!(
            "log argument invalid in {what}"
        )));
    }
    Ok(z.ln())
}

/// Evaluates the closed-form prepotential of `fam` at `t`.
///
/// Inverse-function families (`G1_3D_Phi2`/`Phi3`) seed their Newton solve
/// from a small list of upper-half-plane trial moduli; use
/// [`eval_prepotential_seeded`] to supply a known-good seed.
pub fn eval_prepotential(fam: &FamilyId, t: &[C64], ctl: &SeriesControl) -> Result<C64> {
    eval_prepotential_seeded(fam, t, ctl, None)
}

/// [`eval_prepotential`] with an explicit Newton seed for the inverse
/// functions (E₂′)⁻¹ / χ⁻¹ (ignored by closed-form families).
pub fn eval_prepotential_seeded(
    fam: &FamilyId,
    t: &[C64],
    ctl: &SeriesControl,
    tau_seed: Option<C64>,
) -> Result<C64> {
    fam.validate()?;
    check_len(fam, t)?;
    match *fam {
        FamilyId::G0Phi0 { m } => g0_phi0(t, m),
        FamilyId::G0PhiJ { m, j } => g0_phij(t, m, j),
        FamilyId::G0Phi2mJ { m, j } => g0_phi2mj(t, m, j),
        FamilyId::G0M2Remark { variant } => g0_m2_remark(t, variant),
        FamilyId::G1Holo { m } => g1_holo(t, m, C64::default(), ctl),
        FamilyId::G1HoloM1 => g1_holo_m1(t, ctl),
        FamilyId::G13dPhi1 => g1_3d_phi1(t, C64::default(), ctl),
        FamilyId::G13dQPhi1 { q } => g1_3d_phi1(t, q, ctl),
        FamilyId::G13dPhi2 => g1_3d_phi2(t, C64::default(), ctl, tau_seed),
        FamilyId::G13dPhi3 => g1_3d_phi3(t, C64::default(), ctl, tau_seed),
        FamilyId::G1HoloQ { m, q } => g1_holo(t, m, q, ctl),
    }
}

// ---------------------------------------------------------------------------
// Genus-0 families
// ---------------------------------------------------------------------------

/// t-chart prepotential, indices 1…2m (`t[α−1]`).
fn g0_phi0(t: &[C64], m: usize) -> Result<C64> {
    let lo = |k: usize| t[k - 1];
    let hi = |k: usize| t[2 * m - k]; // t_{2m+1−k}
    let mut f = C64::default();
    for k in 1..=m {
        f += hi(k) * lo(k).exp();
        f += 0.5 * hi(k) * hi(k) * (lo(k) + ln_checked(hi(k), "log(t_{2m+1-k})")?);
        for s in 1..=m {
            if s != k {
                f += 0.5
                    * hi(k)
                    * hi(s)
                    * ln_checked(lo(s).exp() - lo(k).exp(), "log(e^{t_s} - e^{t_k})")?;
            }
        }
    }
    Ok(f)
}

/// x-chart prepotential of the third-kind differential φ_j.
fn g0_phij(x: &[C64], m: usize, j: usize) -> Result<C64> {
    let lo = |k: usize| x[k - 1]; // x_{j,k}
    let hi = |k: usize| x[2 * m - k]; // x_{j,2m+1−k}
    let mut f = 0.5 * lo(j) * hi(j) * hi(j) + lo(j).exp();
    for k in 1..=m {
        if k == j {
            continue;
        }
        f += hi(j) * hi(k) * lo(k);
        f += hi(k) * (lo(k).exp() - (lo(j) - lo(k)).exp());
        f += 0.5 * hi(k) * hi(k) * (lo(k) + ln_checked(hi(k), "log(x_{j,2m+1-k})")?);
        for s in 1..=m {
            if s != j && s != k {
                f += 0.5
                    * hi(k)
                    * hi(s)
                    * ln_checked(lo(s).exp() - lo(k).exp(), "log(e^{x_{j,s}} - e^{x_{j,k}})")?;
            }
        }
    }
    Ok(f)
}

/// y-chart prepotential of the second-kind differential φ_{2m+1−j}.
fn g0_phi2mj(y: &[C64], m: usize, j: usize) -> Result<C64> {
    let lo = |k: usize| y[k - 1]; // y_{j,k}
    let hi = |k: usize| y[2 * m - k]; // y_{j,2m+1−k}
    let hi_sum: C64 = (1..=m).map(hi).sum();
    let mut f = 0.5 * lo(j) * lo(j) * hi(j)
        + 0.5 * hi_sum * hi_sum * ln_checked(hi_sum, "log(sum y_{j,2m+1-r})")?;
    for k in 1..=m {
        if k != j {
            f += lo(j) * lo(k) * hi(k);
            f -= 0.5 * lo(k) * lo(k) * hi(k);
            f += 0.5 * hi(k) * hi(k) * ln_checked(hi(k), "log(y_{j,2m+1-k})")?;
        }
        for s in 1..=m {
            if s != j {
                f -= hi(k) * hi(s) * ln_checked(lo(s), "log(y_{j,s})")?;
            }
        }
    }
    for k in 1..=m {
        if k == j {
            continue;
        }
        for s in 1..=m {
            if s == j || s == k {
                continue;
            }
            f += 0.5 * hi(k) * hi(s) * ln_checked(lo(s) - lo(k), "log(y_{j,s} - y_{j,k})")?;
            let denom = lo(k) - lo(s);
            if denom.norm() == 0.0 {
                return Err(ZooError::DomainError(
                    "coinciding y_{j,k} = y_{j,s}".into(),
                ));
            }
            f -= lo(k) * hi(k) * hi(s) / (12.0 * denom);
        }
    }
    Ok(f)
}

/// The printed m = 2 specializations (coordinates as displayed).
fn g0_m2_remark(t: &[C64], variant: M2Variant) -> Result<C64> {
    let (t1, t2, t3, t4) = (t[0], t[1], t[2], t[3]);
    match variant {
        M2Variant::F1 => Ok(t4 * t1.exp()
            + t3 * t2.exp()
            + 0.5
                * (t4 * t4 * t1
                    + t4 * t4 * ln_checked(t4, "log t4")?
                    + t3 * t3 * t2
                    + t3 * t3 * ln_checked(t3, "log t3")?)
            + t3 * t4 * ln_checked(t1.exp() - t2.exp(), "log(e^t1 - e^t2)")?
            + 0.5 * (I * PI) * t3 * t4),
        M2Variant::F2 => Ok(0.5 * t1 * t4 * t4
            + t2 * t3 * t4
            + t1.exp()
            + t3 * t2.exp()
            - t3 * (t1 - t2).exp()
            + 0.5 * t3 * t3 * t2
            + 0.5 * t3 * t3 * ln_checked(t3, "log x3")?),
        M2Variant::F3 => Ok(0.5 * t1 * t1 * t4
            + t1 * t2 * t3
            - 0.5 * t2 * t2 * t3
            + 0.5 * (t3 + t4) * (t3 + t4) * ln_checked(t3 + t4, "log(y3 + y4)")?
            + 0.5 * t3 * t3 * ln_checked(t3, "log y3")?
            - (t3 + t4) * t3 * ln_checked(t2, "log y2")?),
    }
}

// ---------------------------------------------------------------------------
// Genus-1 θ₁ families (plain and q-deformed)
// ---------------------------------------------------------------------------

/// The q-deformed genus-1 θ₁ prepotential; q = 0 is the undeformed family.
/// Coordinates t[0..2m+2] with modulus coordinate t₀ and D = 1 − 2iπq·t₀.
fn g1_holo(t: &[C64], m: usize, q: C64, ctl: &SeriesControl) -> Result<C64> {
    let d = c64(1.0, 0.0) - 2.0 * I * PI * q * t[0];
    if d.norm() < 1e-14 {
        return Err(ZooError::DomainError(
            "q-deformation singular: 1 - 2i*pi*q*t0 = 0".into(),
        ));
    }
    let tau = 2.0 * I * PI * t[0] / d;
    let mp = ModularPoint::new(tau)
        .map_err(|_| ZooError::DomainError("modulus 2i*pi*t0/(1-2i*pi*q*t0) not in upper half-plane".into()))?;
    let theta0 = theta1_jet(C64::default(), &mp, 1, ctl)?;
    let theta_prime0 = theta0[1];
    if theta_prime0.norm() == 0.0 {
        return Err(ZooError::DomainError("theta1'(0) vanished".into()));
    }
    let lo = |k: usize| t[k]; // t_k, k = 1..m
    let hi = |k: usize| t[2 * m + 1 - k]; // t_{2m+1−k}
    let top = t[2 * m + 1];
    let theta_at = |u: C64| -> Result<C64> {
        let v = theta1_jet(u, &mp, 0, ctl)?[0];
        if v.norm() == 0.0 {
            return Err(ZooError::DomainError("theta1 vanished at a coordinate".into()));
        }
        Ok(v)
    };
    let cross: C64 = (1..=m).map(|k| lo(k) * hi(k)).sum();
    let hi_sum: C64 = (1..=m).map(hi).sum();
    let mut f = 0.5 * top * top * t[0] + top * cross - I * PI * q / d * cross * cross;
    f += 0.5 * hi_sum * hi_sum * ln_checked(hi_sum / d, "log(sum t_{2m+1-r}/D)")?;
    for k in 1..=m {
        f += 0.5 * hi(k) * hi(k) * ln_checked(hi(k) / d, "log(t_{2m+1-k}/D)")?;
        f -= hi(k) * hi(k) * ln_checked(theta_at(lo(k) / d)? / theta_prime0, "log theta ratio")?;
    }
    for j in 1..=m {
        for k in 1..=m {
            if j != k {
                let num = theta_prime0 * theta_at((lo(j) - lo(k)) / d)?;
                let den = theta_at(lo(j) / d)? * theta_at(lo(k) / d)?;
                f += 0.5 * hi(j) * hi(k) * ln_checked(num / den, "log theta cross ratio")?;
                f += 0.25 * (I * PI) * hi(j) * hi(k);
            }
            f -= 0.75 * (1.0 + if j == k { 1.0 } else { 0.0 }) * hi(j) * hi(k);
        }
    }
    Ok(f)
}

/// The printed m = 1 specialization of the genus-1 θ₁ family.
fn g1_holo_m1(t: &[C64], ctl: &SeriesControl) -> Result<C64> {
    let (t0, t1, t2, t3) = (t[0], t[1], t[2], t[3]);
    let mp = ModularPoint::new(2.0 * I * PI * t0)
        .map_err(|_| ZooError::DomainError("modulus 2i*pi*t0 not in upper half-plane".into()))?;
    let th1 = theta1_jet(t1, &mp, 0, ctl)?[0];
    let th0 = theta1_jet(C64::default(), &mp, 1, ctl)?[1];
    Ok(0.5 * t3 * t3 * t0 + t1 * t2 * t3 + t2 * t2 * ln_checked(t2, "log t2")?
        - t2 * t2 * ln_checked(th1 / th0, "log theta ratio")?
        - 1.5 * t2 * t2)
}

// ---------------------------------------------------------------------------
// 3-dimensional elliptic family
// ---------------------------------------------------------------------------

/// E₂ jet (value and τ-derivatives) at τ, plain (q = 0) or q-deformed.
fn e2_jet(tau: C64, q: C64, order: usize, ctl: &SeriesControl) -> Result<Vec<C64>> {
    if q.norm() == 0.0 {
        let mp = ModularPoint::new(tau)
            .map_err(|_| ZooError::DomainError("modulus not in upper half-plane".into()))?;
        Ok(eisenstein_jet(&mp, Eisenstein::E2, order, ctl)?)
    } else {
        Ok(eisenstein_q_jet(tau, q, Eisenstein::E2, order, ctl)?)
    }
}

/// F = ½t₃²t₁ + ½t₂²t₃ + (π²/24)t₂⁴E₂(2iπt₁), plain or q-deformed E₂.
fn g1_3d_phi1(t: &[C64], q: C64, ctl: &SeriesControl) -> Result<C64> {
    let tau = 2.0 * I * PI * t[0];
    let e2 = e2_jet(tau, q, 0, ctl)?[0];
    Ok(0.5 * t[2] * t[2] * t[0] + 0.5 * t[1] * t[1] * t[2] + PI * PI / 24.0 * t[1].powu(4) * e2)
}

const NEWTON_SEEDS: [C64; 5] = [
    C64::new(0.0, 0.9),
    C64::new(0.15, 1.0),
    C64::new(-0.15, 1.0),
    C64::new(0.1, 0.75),
    C64::new(0.0, 1.3),
];

/// Damped Newton for g(τ) = 0 restricted to the upper half-plane.
fn newton_tau(
    g: &dyn Fn(C64) -> Result<(C64, C64)>,
    seed: C64,
    scale: f64,
    what: &str,
) -> Result<C64> {
    let mut tau = seed;
    let (mut res, mut dres) = g(tau)?;
    for _ in 0..60 {
        // drive to the roundoff floor: stencil differentiation through this
        // solve amplifies any systematic solver slack by 1/h³
        if res.norm() <= 1e-14 * scale {
            return Ok(tau);
        }
        let prev = res.norm();
        if dres.norm() == 0.0 {
            return Err(ZooError::InversionError(format!(
                "vanishing derivative in {what}"
            )));
        }
        let mut step = res / dres;
        let mut tries = 0;
        loop {
            let cand = tau - step;
            if cand.im > 0.05 {
                if let Ok((r2, d2)) = g(cand) {
                    if r2.norm() <= res.norm() || tries >= 10 {
                        tau = cand;
                        res = r2;
                        dres = d2;
                        break;
                    }
                }
            }
            if tries >= 10 {
                return Err(ZooError::InversionError(format!(
                    "step damping exhausted in {what}"
                )));
            }
            step /= 2.0;
            tries += 1;
        }
        // stalled at the floor: accept once the residual is already tiny
        if res.norm() > 0.25 * prev && res.norm() <= 1e-11 * scale {
            return Ok(tau);
        }
    }
    if res.norm() <= 1e-9 * scale {
        Ok(tau)
    } else {
        Err(ZooError::InversionError(format!("no convergence in {what}")))
    }
}

fn newton_tau_multi(
    g: &dyn Fn(C64) -> Result<(C64, C64)>,
    seed: Option<C64>,
    scale: f64,
    what: &str,
) -> Result<C64> {
    if let Some(s) = seed {
        return newton_tau(g, s, scale, what);
    }
    let mut last = ZooError::InversionError(format!("no seed converged in {what}"));
    for s in NEWTON_SEEDS {
        match newton_tau(g, s, scale, what) {
            Ok(tau) => return Ok(tau),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// τ = (E₂′)⁻¹(target), by damped Newton (g′ = E₂″).
fn inverse_e2_prime(target: C64, q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    let g = |tau: C64| -> Result<(C64, C64)> {
        let jet = e2_jet(tau, q, 2, ctl)?;
        Ok((jet[1] - target, jet[2]))
    };
    newton_tau_multi(&g, seed, target.norm().max(1.0), "(E2')^{-1}")
}

/// τ = χ⁻¹(target) with χ = (E₂″)³/(E₂′)⁴.
fn inverse_chi(target: C64, q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    let g = |tau: C64| -> Result<(C64, C64)> {
        let jet = e2_jet(tau, q, 3, ctl)?;
        let (d1, d2, d3) = (jet[1], jet[2], jet[3]);
        if d1.norm() == 0.0 {
            return Err(ZooError::InversionError("E2' vanished in chi".into()));
        }
        let chi = d2.powu(3) / d1.powu(4);
        let chi_prime = 3.0 * d2 * d2 * d3 / d1.powu(4) - 4.0 * d2.powu(4) / d1.powu(5);
        Ok((chi - target, chi_prime))
    };
    newton_tau_multi(&g, seed, target.norm().max(1.0), "chi^{-1}")
}

/// x-chart prepotential of the 3D family, via τ = (E₂′)⁻¹(3x₃/(iπ³x₁³)).
/// `q` deforms every Eisenstein evaluation (q = 0: the undeformed chart).
fn g1_3d_phi2(x: &[C64], q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x1.norm() == 0.0 {
        return Err(ZooError::DomainError("x1 must be nonzero".into()));
    }
    let target = 3.0 * x3 / (I * PI.powi(3) * x1.powu(3));
    let tau = inverse_e2_prime(target, q, ctl, seed)?;
    let jet = e2_jet(tau, q, 2, ctl)?;
    // E₂ coefficient 2π²/15 follows from t₃ = x₂ − (π²/2)x₁²E₂(τ); the
    // Hessian relations ∂₁∂₃F = t₃ and ∂₃²F = τ/(2iπ) pin it down, and the
    // associativity equations fail for any other value.
    Ok(x2.powu(3) / 6.0 + x1 * x2 * x3 + x3 * x3 / (4.0 * I * PI) * tau
        - 2.0 * PI * PI / 15.0 * x1.powu(3) * x3 * jet[0]
        - PI.powi(4) / 180.0 * x1.powu(6) * jet[2])
}

/// y-chart prepotential of the 3D family, via τ = χ⁻¹(−(8/3)y₃³/y₂⁴).
///
/// The fourth root (−6y₃)^{1/4}(E₂″)^{−1/4} = πt₂ is taken on the principal
/// branch; callers must keep t₂ in the wedge |arg t₂| < π/4 (the sampler's
/// documented box does).
fn g1_3d_phi3(y: &[C64], q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    let (y1, y2, y3) = (y[0], y[1], y[2]);
    if y2.norm() == 0.0 || y3.norm() == 0.0 {
        return Err(ZooError::DomainError("y2, y3 must be nonzero".into()));
    }
    let target = -8.0 / 3.0 * y3.powu(3) / y2.powu(4);
    let tau = inverse_chi(target, q, ctl, seed)?;
    let jet = e2_jet(tau, q, 2, ctl)?;
    if jet[2].norm() == 0.0 {
        return Err(ZooError::DomainError("E2'' vanished".into()));
    }
    // t2 = ((−6y₃)/E₂″)^{1/4}/π, principal branch
    let t2 = (-6.0 * y3 / jet[2]).powf(0.25) / PI;
    // E₂ coefficient 9π²/80 = (9/40)·(π²/2) from x₂ = t₃ + (π²/2)t₂²E₂(τ),
    // mirroring the 2π²/15 coefficient in the x-chart.
    Ok(0.5 * y1 * y2 * y2 + 0.5 * y1 * y1 * y3 + y3 * y3 / (4.0 * I * PI) * tau
        + 27.0 / 40.0 * y2 * y3 * t2
        + 9.0 * PI * PI / 80.0 * y2 * y2 * t2 * t2 * jet[0])
}

/// The internal modulus τ the inverse-function families (Phi2/Phi3 charts)
/// solve for at `t`; `None` for families without an internal inversion.
///
/// Verifiers solve this once per campaign point and reuse the result as the
/// Newton seed for every stencil evaluation, pinning all of them to one
/// branch of the multivalued inverse. A `seed` pins the Newton start (and
/// thereby the branch); without one every catalogued seed is tried.
pub fn internal_modulus(
    fam: &FamilyId,
    t: &[C64],
    ctl: &SeriesControl,
    seed: Option<C64>,
) -> Result<Option<C64>> {
    match fam {
        FamilyId::G13dPhi2 => {
            if t[0].norm() == 0.0 {
                return Err(ZooError::DomainError("x1 must be nonzero".into()));
            }
            let target = 3.0 * t[2] / (I * PI.powi(3) * t[0].powu(3));
            inverse_e2_prime(target, C64::default(), ctl, seed).map(Some)
        }
        FamilyId::G13dPhi3 => {
            if t[1].norm() == 0.0 || t[2].norm() == 0.0 {
                return Err(ZooError::DomainError("y2, y3 must be nonzero".into()));
            }
            let target = -8.0 / 3.0 * t[2].powu(3) / t[1].powu(4);
            inverse_chi(target, C64::default(), ctl, seed).map(Some)
        }
        _ => Ok(None),
    }
}

/// q-deformed x-chart evaluator (reuses the Phi2 code path with E_{q,·}).
pub fn g1_3d_qphi2(x: &[C64], q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    g1_3d_phi2(x, q, ctl, seed)
}

/// q-deformed y-chart evaluator (reuses the Phi3 code path with E_{q,·}).
pub fn g1_3d_qphi3(y: &[C64], q: C64, ctl: &SeriesControl, seed: Option<C64>) -> Result<C64> {
    g1_3d_phi3(y, q, ctl, seed)
}
