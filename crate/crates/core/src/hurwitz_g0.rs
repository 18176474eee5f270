//! Genus-0 Hurwitz-space kernel.
//!
//! A rational branched covering λ(z) = b₀/z + Σ_{k=1}^m b_k/(z−a_k) with
//! Σ b_k = 1 and a₀ = 0 has critical points at the 2m roots of the monic
//! polynomial f_{2m}(z) = Σ_k b_k Π_{j≠k}(z−a_j)² and branch points
//! λ_j = λ(α_j). This module computes:
//!
//! * critical data (roots by Durand–Kerner simultaneous iteration plus
//!   per-root Newton polish);
//! * the three flat-coordinate charts: the t-chart of φ₀ = −dz/z, the
//!   x-chart of φ_j = dz/(z−a_j) − dz/z and the y-chart of
//!   φ_{2m+1−j} = b_j dz/(z−a_j)², together with the Phi0 → x/y chart maps
//!   as pure functions of the t-chart and their Newton inverses;
//! * residue Gram pairings Σ_j (β₁λ_j+β₂) f_A(α_j)f_B(α_j)/λ″(α_j)
//!   (branch-free: only products of differential coefficients appear);
//! * the finite-difference check of ∂λ_j/∂t^A against the closed-form ratio
//!   f_{A′}(α_j)/f_ω(α_j);
//! * the generic prepotential assembler for the φ₀/φ_j/φ_{2m+1−j} families.
//!
//! The symbol log(−1) is fixed to +iπ throughout (principal branch).

use crate::{c64, C64};
use nalgebra::DMatrix;
use thiserror::Error;

/// Errors raised by the genus-0 kernel.
#[derive(Debug, Clone, Error)]
pub enum HurwitzError {
    #[error("degenerate covering: {0}")]
    DegenerateCovering(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("chart Jacobian numerically rank-deficient")]
    SingularJacobian,
    #[error("Newton inversion failed: {0}")]
    InversionError(String),
}

pub type Result<T> = std::result::Result<T, HurwitzError>;

/// Minimal admissible separation (relative to data scale) between roots and
/// between branch points.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Coverings
// ---------------------------------------------------------------------------

/// The covering λ(z) = b₀/z + Σ_{k=1}^m b_k/(z−a_k), with Σ_{k=0}^m b_k = 1.
#[derive(Debug, Clone)]
pub struct RationalCovering {
    pub m: usize,
    /// Poles a₁…a_m (a₀ = 0 implicit).
    pub a: Vec<C64>,
    /// Residues b₀…b_m.
    pub b: Vec<C64>,
}

impl RationalCovering {
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        let m = a.len();
        if m < 2 {
            return Err(HurwitzError::DomainError("need m >= 2 poles".into()));
        }
        if b.len() != m + 1 {
            return Err(HurwitzError::DomainError(format!(
                "need {} residues b_0..b_m, got {}",
                m + 1,
                b.len()
            )));
        }
        let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        for (i, ai) in a.iter().enumerate() {
            if ai.norm() < ADMISSIBILITY_MARGIN * scale {
                return Err(HurwitzError::DegenerateCovering(format!(
                    "pole a_{} too close to 0",
                    i + 1
                )));
            }
            for (j, aj) in a.iter().enumerate().skip(i + 1) {
                if (ai - aj).norm() < ADMISSIBILITY_MARGIN * scale {
                    return Err(HurwitzError::DegenerateCovering(format!(
                        "poles a_{} and a_{} collide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if b.iter().any(|bk| bk.norm() == 0.0) {
            return Err(HurwitzError::DegenerateCovering("zero residue".into()));
        }
        let sum: C64 = b.iter().sum();
        if (sum - 1.0).norm() > 1e-10 {
            return Err(HurwitzError::DomainError(format!(
                "residues must satisfy sum b_k = 1, got {sum}"
            )));
        }
        Ok(RationalCovering { m, a, b })
    }

    /// All poles including a₀ = 0, in the order a₀, a₁, …, a_m.
    fn poles(&self) -> Vec<C64> {
        let mut p = Vec::with_capacity(self.m + 1);
        p.push(C64::default());
        p.extend_from_slice(&self.a);
        p
    }

    /// λ(z).
    pub fn lambda(&self, z: C64) -> C64 {
        self.poles()
            .iter()
            .zip(&self.b)
            .map(|(ak, bk)| bk / (z - ak))
            .sum()
    }

    /// λ″(z) = 2b₀/z³ + Σ 2b_k/(z−a_k)³.
    pub fn lambda_second(&self, z: C64) -> C64 {
        self.poles()
            .iter()
            .zip(&self.b)
            .map(|(ak, bk)| 2.0 * bk / (z - ak).powu(3))
            .sum()
    }

    /// Monic coefficient vector (low to high) of
    /// f_{2m}(z) = Σ_k b_k Π_{j≠k}(z−a_j)².
    pub fn f2m_coeffs(&self) -> Vec<C64> {
        let poles = self.poles();
        let mut acc = vec![C64::default(); 2 * self.m + 1];
        for (k, bk) in self.b.iter().enumerate() {
            let mut poly = vec![c64(1.0, 0.0)];
            for (j, aj) in poles.iter().enumerate() {
                if j != k {
                    // multiply by (z − a_j)²
                    let lin = [-aj, c64(1.0, 0.0)];
                    poly = poly_mul(&poly, &lin);
                    poly = poly_mul(&poly, &lin);
                }
            }
            for (c, p) in acc.iter_mut().zip(&poly) {
                *c += bk * p;
            }
        }
        // leading coefficient is Σ b_k = 1; normalize exactly to monic
        let lead = acc[2 * self.m];
        for c in &mut acc {
            *c /= lead;
        }
        acc
    }
}

fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); p.len() + q.len() - 1];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::default(), |acc, c| acc * z + c)
}

fn poly_eval_deriv(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C64::default(), |acc, (k, c)| acc * z + c * k as f64)
}

// ---------------------------------------------------------------------------
// Critical data
// ---------------------------------------------------------------------------

/// Critical points, branch points and λ″ values of a covering.
#[derive(Debug, Clone)]
pub struct BranchData {
    /// 2m critical points (roots of f_{2m}).
    pub alpha: Vec<C64>,
    /// Branch points λ_j = λ(α_j).
    pub lambda: Vec<C64>,
    /// λ″(α_j) (all nonzero: simple critical points).
    pub lambda2nd: Vec<C64>,
}

/// Durand–Kerner simultaneous iteration on a monic coefficient vector.
fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    // perturbed roots of unity: avoids symmetric stalls
    let mut z: Vec<C64> = (0..n)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64 + 0.3517) / n as f64;
            radius * c64(angle.cos(), angle.sin()) * c64(1.0, 0.07)
        })
        .collect();
    for _ in 0..400 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = c64(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = poly_eval(coeffs, z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-14 {
            break;
        }
    }
    z
}

fn newton_polish(coeffs: &[C64], mut z: C64) -> C64 {
    for _ in 0..40 {
        let f = poly_eval(coeffs, z);
        let df = poly_eval_deriv(coeffs, z);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() < 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Computes the critical points of `cov` and the associated branch data.
pub fn critical_data(cov: &RationalCovering, root_tol: f64) -> Result<BranchData> {
    let coeffs = cov.f2m_coeffs();
    let poly_scale = coeffs.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let mut alpha = durand_kerner(&coeffs);
    for z in &mut alpha {
        *z = newton_polish(&coeffs, *z);
    }
    // deterministic ordering: by argument, then modulus
    alpha.sort_by(|p, q| {
        p.arg()
            .partial_cmp(&q.arg())
            .unwrap()
            .then(p.norm().partial_cmp(&q.norm()).unwrap())
    });
    let scale = alpha.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for (i, ai) in alpha.iter().enumerate() {
        if poly_eval(&coeffs, *ai).norm() > root_tol * poly_scale {
            return Err(HurwitzError::DegenerateCovering(format!(
                "root {i} failed to converge to tolerance"
            )));
        }
        if ai.norm() < 10.0 * root_tol * scale {
            return Err(HurwitzError::DegenerateCovering(
                "critical point at the puncture z = 0".into(),
            ));
        }
        for aj in alpha.iter().skip(i + 1) {
            if (ai - aj).norm() < 10.0 * root_tol * scale {
                return Err(HurwitzError::DegenerateCovering(
                    "colliding critical points".into(),
                ));
            }
        }
    }
    let lambda: Vec<C64> = alpha.iter().map(|&z| cov.lambda(z)).collect();
    let lscale = lambda.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for (i, li) in lambda.iter().enumerate() {
        for lj in lambda.iter().skip(i + 1) {
            if (li - lj).norm() < ADMISSIBILITY_MARGIN * lscale {
                return Err(HurwitzError::DegenerateCovering(
                    "colliding branch points".into(),
                ));
            }
        }
    }
    let lambda2nd: Vec<C64> = alpha.iter().map(|&z| cov.lambda_second(z)).collect();
    if lambda2nd
        .iter()
        .any(|l| l.norm() < ADMISSIBILITY_MARGIN * lscale)
    {
        return Err(HurwitzError::DegenerateCovering(
            "non-simple critical point (lambda'' ~ 0)".into(),
        ));
    }
    Ok(BranchData {
        alpha,
        lambda,
        lambda2nd,
    })
}

// ---------------------------------------------------------------------------
// Flat charts
// ---------------------------------------------------------------------------

/// Which flat-coordinate chart (j is the 1-based differential index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartId {
    /// t-chart of φ₀ = −dz/z.
    Phi0,
    /// x-chart of φ_j (third kind), j ∈ 1…m.
    PhiJ(usize),
    /// y-chart of φ_{2m+1−j} (second kind), j ∈ 1…m.
    Phi2mJ(usize),
}

/// A complex coordinate vector of length 2m with the printed 1-based index
/// layout: `coords[α−1]` holds coordinate α.
#[derive(Debug, Clone)]
pub struct FlatChart {
    pub chart_id: ChartId,
    pub m: usize,
    pub coords: Vec<C64>,
}

impl FlatChart {
    /// Coordinate α (1-based display index).
    pub fn coord(&self, alpha: usize) -> C64 {
        self.coords[alpha - 1]
    }
}

fn ln_checked(z: C64, what: &str) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(HurwitzError::DomainError(format!(
            "log argument vanishes in {what}"
        )));
    }
    Ok(z.ln())
}

/// The t-chart (g0-phi0-c): t_s = log(b₀) − log(a_s), t_{2m+1−s} = −b_s/a_s.
fn phi0_chart(cov: &RationalCovering) -> Result<Vec<C64>> {
    let m = cov.m;
    let mut t = vec![C64::default(); 2 * m];
    let log_b0 = ln_checked(cov.b[0], "log(b_0)")?;
    for s in 1..=m {
        t[s - 1] = log_b0 - ln_checked(cov.a[s - 1], "log(a_s)")?;
        t[2 * m - s] = -cov.b[s] / cov.a[s - 1];
    }
    Ok(t)
}

/// Phi0 → PhiJ chart map (g0-phik-c), a pure function of the t-chart.
pub fn phi0_to_phij(t: &[C64], m: usize, j: usize) -> Result<Vec<C64>> {
    debug_assert_eq!(t.len(), 2 * m);
    let mut x = vec![C64::default(); 2 * m];
    let etj = t[j - 1].exp();
    let mut v_sum = C64::default(); // Σ_s t_{2m+1−s}
    let mut cross_sum = C64::default(); // Σ_{s≠j} x_{j,2m+1−s}
    for s in 1..=m {
        v_sum += t[2 * m - s];
        if s == j {
            x[j - 1] = t[j - 1] + ln_checked(t[2 * m - j], "log(t_{2m+1-j})")?;
        } else {
            let ets = t[s - 1].exp();
            x[s - 1] = ln_checked(ets - etj, "log(e^{t_s} - e^{t_j})")?;
            let val = t[2 * m - s] * ets / (ets - etj);
            x[2 * m - s] = val;
            cross_sum += val;
        }
    }
    x[2 * m - j] = etj + v_sum - cross_sum;
    Ok(x)
}

/// Phi0 → Phi2mJ chart map (g0-phim+k-c), a pure function of the t-chart.
pub fn phi0_to_phi2mj(t: &[C64], m: usize, j: usize) -> Result<Vec<C64>> {
    debug_assert_eq!(t.len(), 2 * m);
    let mut y = vec![C64::default(); 2 * m];
    let etj = t[j - 1].exp();
    let vj = t[2 * m - j];
    let mut second_sum = C64::default(); // Σ_{s≠j} y_{j,2m+1−s}
    for s in 1..=m {
        if s == j {
            continue;
        }
        let ets = t[s - 1].exp();
        let diff = etj - ets;
        if diff.norm() == 0.0 {
            return Err(HurwitzError::DomainError(
                "coinciding exponentials e^{t_j} = e^{t_s}".into(),
            ));
        }
        y[s - 1] = vj * etj / diff;
        let val = vj * t[2 * m - s] * (t[j - 1] + t[s - 1]).exp() / (diff * diff);
        y[2 * m - s] = val;
        second_sum += val;
    }
    // y_{j,j} = x_{j,2m+1−j}
    let x = phi0_to_phij(t, m, j)?;
    y[j - 1] = x[2 * m - j];
    y[2 * m - j] = vj * etj - second_sum;
    Ok(y)
}

/// Generic damped 1-D Newton used by the chart inversions.
fn newton_scalar(
    mut w: C64,
    mut g: impl FnMut(C64) -> (C64, C64),
    what: &str,
) -> Result<C64> {
    let (mut res, mut dres) = g(w);
    for _ in 0..50 {
        if res.norm() < 1e-13 * w.norm().max(1.0) {
            return Ok(w);
        }
        if dres.norm() == 0.0 {
            return Err(HurwitzError::InversionError(format!(
                "vanishing derivative in {what}"
            )));
        }
        let mut step = res / dres;
        // damping: halve the step while the residual grows
        let mut tries = 0;
        loop {
            let cand = w - step;
            let (r2, d2) = g(cand);
            if r2.norm() <= res.norm() || tries >= 8 {
                w = cand;
                res = r2;
                dres = d2;
                break;
            }
            step /= 2.0;
            tries += 1;
        }
    }
    if res.norm() < 1e-10 * w.norm().max(1.0) {
        Ok(w)
    } else {
        Err(HurwitzError::InversionError(format!(
            "no convergence in {what}"
        )))
    }
}

/// PhiJ → Phi0 inverse chart map; `w_seed` seeds the Newton solve for
/// w = e^{t_j} (any point near the generating t-chart works).
pub fn phij_to_phi0(x: &[C64], m: usize, j: usize, w_seed: C64) -> Result<Vec<C64>> {
    debug_assert_eq!(x.len(), 2 * m);
    let exjj = x[j - 1].exp();
    let g = |w: C64| {
        // residual of x_{j,2m+1−j} = w + Σ_s t_{2m+1−s} − Σ_{s≠j} x_{j,2m+1−s}
        let mut r = w + exjj / w - x[2 * m - j];
        let mut dr = c64(1.0, 0.0) - exjj / (w * w);
        for s in 1..=m {
            if s == j {
                continue;
            }
            let e = x[s - 1].exp();
            r += x[2 * m - s] * e / (e + w) - x[2 * m - s];
            dr -= x[2 * m - s] * e / ((e + w) * (e + w));
        }
        (r, dr)
    };
    let w = newton_scalar(w_seed, g, "PhiJ chart inversion")?;
    let mut t = vec![C64::default(); 2 * m];
    t[j - 1] = w.ln();
    t[2 * m - j] = exjj / w;
    for s in 1..=m {
        if s == j {
            continue;
        }
        let e = x[s - 1].exp();
        t[s - 1] = ln_checked(e + w, "inverse chart log")?;
        t[2 * m - s] = x[2 * m - s] * e / (e + w);
    }
    Ok(t)
}

/// Phi2mJ → Phi0 inverse chart map; `w_seed` seeds the Newton solve for
/// w = e^{t_j}.
pub fn phi2mj_to_phi0(y: &[C64], m: usize, j: usize, w_seed: C64) -> Result<Vec<C64>> {
    debug_assert_eq!(y.len(), 2 * m);
    // A = Σ_s y_{j,2m+1−s} = t_{2m+1−j} e^{t_j} (sum rule g0-R2)
    let a_tot: C64 = (1..=m).map(|s| y[2 * m - s]).sum();
    let g = |w: C64| {
        let mut r = w + a_tot / w - y[j - 1];
        let mut dr = c64(1.0, 0.0) - a_tot / (w * w);
        for s in 1..=m {
            if s == j {
                continue;
            }
            // Σ_s t_{2m+1−s} − Σ_{s≠j} x_{j,2m+1−s} contribution for s ≠ j:
            // t_{2m+1−s} = y_{j,2m+1−s}·A/(y_{j,s}(y_{j,s}w − A)),
            // x_{j,2m+1−s} = −y_{j,2m+1−s}/y_{j,s}
            let ys = y[s - 1];
            let denom = ys * w - a_tot;
            r += y[2 * m - s] * a_tot / (ys * denom) + y[2 * m - s] / ys;
            dr -= y[2 * m - s] * a_tot / (denom * denom);
        }
        (r, dr)
    };
    let w = newton_scalar(w_seed, g, "Phi2mJ chart inversion")?;
    let mut t = vec![C64::default(); 2 * m];
    t[j - 1] = w.ln();
    t[2 * m - j] = a_tot / w;
    for s in 1..=m {
        if s == j {
            continue;
        }
        let ys = y[s - 1];
        let ets = w - a_tot / ys;
        t[s - 1] = ln_checked(ets, "inverse chart log")?;
        t[2 * m - s] = y[2 * m - s] * a_tot / (ys * ys * ets);
    }
    Ok(t)
}

/// Computes a flat chart of the covering by the closed forms.
pub fn flat_chart(cov: &RationalCovering, chart_id: ChartId) -> Result<FlatChart> {
    let m = cov.m;
    let t = phi0_chart(cov)?;
    let coords = match chart_id {
        ChartId::Phi0 => t,
        ChartId::PhiJ(j) => {
            check_j(j, m)?;
            phi0_to_phij(&t, m, j)?
        }
        ChartId::Phi2mJ(j) => {
            check_j(j, m)?;
            phi0_to_phi2mj(&t, m, j)?
        }
    };
    Ok(FlatChart {
        chart_id,
        m,
        coords,
    })
}

fn check_j(j: usize, m: usize) -> Result<()> {
    if j == 0 || j > m {
        return Err(HurwitzError::DomainError(format!(
            "differential index j must lie in 1..={m}, got {j}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gram pairings
// ---------------------------------------------------------------------------

/// A primary differential: φ₀ = −dz/z, φ_k = dz/(z−a_k) − dz/z (third kind,
/// degree 0) or φ_{2m+1−k} = b_k dz/(z−a_k)² (second kind, degree 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferentialId {
    Phi0,
    /// φ_k, k ∈ 1…m.
    Third(usize),
    /// φ_{2m+1−k}, k ∈ 1…m.
    Second(usize),
}

impl DifferentialId {
    /// Rational coefficient f(z) with φ = f(z) dz.
    pub fn coeff(self, cov: &RationalCovering, z: C64) -> C64 {
        match self {
            DifferentialId::Phi0 => -z.inv(),
            DifferentialId::Third(k) => (z - cov.a[k - 1]).inv() - z.inv(),
            DifferentialId::Second(k) => cov.b[k] / (z - cov.a[k - 1]).powu(2),
        }
    }

    /// The differential dual to the chart coordinate with 1-based index α.
    fn dual_of_coordinate(alpha: usize, m: usize) -> DifferentialId {
        if alpha <= m {
            DifferentialId::Second(alpha)
        } else {
            DifferentialId::Third(2 * m + 1 - alpha)
        }
    }
}

/// Residue Gram pairing Σ_j (β₁λ_j + β₂)·f_A(α_j) f_B(α_j)/λ″(α_j).
///
/// β = (0,1) gives the flat metric η (anti-identity in the dual pairs);
/// β = (1,0) gives the intersection form g.
pub fn gram_pairing(
    cov: &RationalCovering,
    bd: &BranchData,
    a_id: DifferentialId,
    b_id: DifferentialId,
    beta: (C64, C64),
) -> Result<C64> {
    if beta.1.norm() == 0.0 && bd.lambda.iter().any(|l| l.norm() == 0.0) {
        return Err(HurwitzError::DomainError(
            "intersection form undefined: some branch point vanishes".into(),
        ));
    }
    Ok(bd
        .alpha
        .iter()
        .zip(bd.lambda.iter().zip(&bd.lambda2nd))
        .map(|(&alpha, (&lam, &l2))| {
            (beta.0 * lam + beta.1) * a_id.coeff(cov, alpha) * b_id.coeff(cov, alpha) / l2
        })
        .sum())
}

// ---------------------------------------------------------------------------
// λ-Jacobian residual
// ---------------------------------------------------------------------------

/// Chart coordinates as a function of the moduli (a₁…a_m, b₁…b_m), with
/// b₀ = 1 − Σ b_k eliminated.
fn chart_of_params(params: &[C64], m: usize, chart_id: ChartId) -> Result<Vec<C64>> {
    let a = params[..m].to_vec();
    let mut b = Vec::with_capacity(m + 1);
    let sum: C64 = params[m..].iter().sum();
    b.push(c64(1.0, 0.0) - sum);
    b.extend_from_slice(&params[m..]);
    let cov = RationalCovering::new(a, b)?;
    Ok(flat_chart(&cov, chart_id)?.coords)
}

/// Branch points as functions of the moduli, with roots continued by Newton
/// from `base_alpha` (keeps the j-labeling coherent across perturbations).
fn lambda_of_params(params: &[C64], m: usize, base_alpha: &[C64]) -> Result<Vec<C64>> {
    let a = params[..m].to_vec();
    let mut b = Vec::with_capacity(m + 1);
    let sum: C64 = params[m..].iter().sum();
    b.push(c64(1.0, 0.0) - sum);
    b.extend_from_slice(&params[m..]);
    let cov = RationalCovering::new(a, b)?;
    let coeffs = cov.f2m_coeffs();
    Ok(base_alpha
        .iter()
        .map(|&z0| cov.lambda(newton_polish(&coeffs, z0)))
        .collect())
}

/// Finite-difference check of the closed-form derivative rule
/// ∂λ_j/∂t^A = f_{A′}(α_j)/f_ω(α_j). Returns the max relative residual.
pub fn lambda_jacobian_residual(cov: &RationalCovering, chart_id: ChartId) -> Result<f64> {
    let m = cov.m;
    let n = 2 * m;
    let bd = critical_data(cov, 1e-12)?;
    let mut params: Vec<C64> = cov.a.clone();
    params.extend_from_slice(&cov.b[1..]);

    // FD Jacobians over the moduli
    let mut jac_t = DMatrix::<C64>::zeros(n, n); // (A, r) = ∂t^A/∂p_r
    let mut jac_l = DMatrix::<C64>::zeros(n, n); // (j, r) = ∂λ_j/∂p_r
    for r in 0..n {
        let h = 1e-6 * params[r].norm().max(1.0);
        let mut pp = params.clone();
        pp[r].re += h;
        let mut pm = params.clone();
        pm[r].re -= h;
        let tp = chart_of_params(&pp, m, chart_id)?;
        let tm = chart_of_params(&pm, m, chart_id)?;
        let lp = lambda_of_params(&pp, m, &bd.alpha)?;
        let lm = lambda_of_params(&pm, m, &bd.alpha)?;
        for a in 0..n {
            jac_t[(a, r)] = (tp[a] - tm[a]) / (2.0 * h);
        }
        for j in 0..n {
            jac_l[(j, r)] = (lp[j] - lm[j]) / (2.0 * h);
        }
    }

    // condition check via the Hadamard ratio |det| / Π row-norms ∈ (0, 1]
    let jt_t = jac_t.transpose();
    let lu = jt_t.clone().lu();
    let det = lu.determinant();
    let hadamard: f64 = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| jt_t[(r, c)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .product();
    if det.norm() < 1e-12 * hadamard.max(1e-300) {
        return Err(HurwitzError::SingularJacobian);
    }

    // denominator differential of the chart
    let omega = match chart_id {
        ChartId::Phi0 => DifferentialId::Phi0,
        ChartId::PhiJ(j) => DifferentialId::Third(j),
        ChartId::Phi2mJ(j) => DifferentialId::Second(j),
    };

    let mut max_resid = 0.0f64;
    for j in 0..n {
        // solve J_tᵀ · v = (∂λ_j/∂p)ᵀ for v = ∂λ_j/∂t
        let rhs = nalgebra::DVector::<C64>::from_iterator(n, (0..n).map(|r| jac_l[(j, r)]));
        let v = lu
            .solve(&rhs)
            .ok_or(HurwitzError::SingularJacobian)?;
        for alpha_idx in 1..=n {
            let dual = DifferentialId::dual_of_coordinate(alpha_idx, m);
            let closed = dual.coeff(cov, bd.alpha[j]) / omega.coeff(cov, bd.alpha[j]);
            let resid = (v[alpha_idx - 1] - closed).norm() / closed.norm().max(1.0);
            max_resid = max_resid.max(resid);
        }
    }
    Ok(max_resid)
}

/// Components of the unit field e = Σ_j ∂_{λ_j} in the Phi0 chart
/// (g0-eE-phi0): e(t_s) = e^{−t_s}/(1−Σ t_{2m+1−r}e^{−t_r}),
/// e(t_{2m+1−s}) = −t_{2m+1−s}e^{−t_s}/(1−Σ t_{2m+1−r}e^{−t_r}).
pub fn phi0_unit_components(t: &[C64], m: usize) -> Vec<C64> {
    let denom: C64 = c64(1.0, 0.0)
        - (1..=m)
            .map(|r| t[2 * m - r] * (-t[r - 1]).exp())
            .sum::<C64>();
    let mut e = vec![C64::default(); 2 * m];
    for s in 1..=m {
        let w = (-t[s - 1]).exp() / denom;
        e[s - 1] = w;
        e[2 * m - s] = -t[2 * m - s] * w;
    }
    e
}

/// FD-vs-closed-form consistency of e = Σ_j ∂_{λ_j} in the Phi0 chart:
/// returns max_j |Σ_A (∂λ_j/∂t^A)·e^A − 1|.
pub fn unit_action_residual(cov: &RationalCovering) -> Result<f64> {
    let m = cov.m;
    let bd = critical_data(cov, 1e-12)?;
    let t = phi0_chart(cov)?;
    let e = phi0_unit_components(&t, m);
    let omega = DifferentialId::Phi0;
    let mut max_resid = 0.0f64;
    for j in 0..2 * m {
        let mut sum = C64::default();
        for alpha_idx in 1..=2 * m {
            let dual = DifferentialId::dual_of_coordinate(alpha_idx, m);
            let dl = dual.coeff(cov, bd.alpha[j]) / omega.coeff(cov, bd.alpha[j]);
            sum += dl * e[alpha_idx - 1];
        }
        max_resid = max_resid.max((sum - 1.0).norm());
    }
    Ok(max_resid)
}

// ---------------------------------------------------------------------------
// Generic prepotential assembler
// ---------------------------------------------------------------------------

/// Which family the assembler builds (differential φ₀, φ_j or
/// φ_{2m+1−j}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyChoice {
    Phi0,
    PhiJ(usize),
    Phi2mJ(usize),
}

/// The generic prepotential formula (g0-prep), assembled from the
/// cross-chart entries x_{k,s}, x_{k,2m+1−s}, y_{k,2m+1−s} (as functions of
/// the Phi0 chart `t`) and the Euler actions of the chosen family.
pub fn generic_prepotential(t: &[C64], m: usize, family: FamilyChoice) -> Result<C64> {
    debug_assert_eq!(t.len(), 2 * m);
    // cross-chart tables, 1-based in (k, s)
    let mut xx = vec![vec![C64::default(); m + 1]; m + 1]; // x_{k,s}
    let mut x2 = vec![vec![C64::default(); m + 1]; m + 1]; // x_{k,2m+1−s}
    let mut y2 = vec![vec![C64::default(); m + 1]; m + 1]; // y_{k,2m+1−s}
    for k in 1..=m {
        let xk = phi0_to_phij(t, m, k)?;
        let yk = phi0_to_phi2mj(t, m, k)?;
        for s in 1..=m {
            xx[k][s] = xk[s - 1];
            x2[k][s] = xk[2 * m - s];
            y2[k][s] = yk[2 * m - s];
        }
    }
    // Euler actions on the family's own chart coordinates
    let (d, e_low, e_high): (f64, Vec<C64>, Vec<C64>) = match family {
        FamilyChoice::Phi0 => {
            let e_low = vec![c64(1.0, 0.0); m + 1];
            let mut e_high = vec![C64::default(); m + 1];
            for (k, slot) in e_high.iter_mut().enumerate().skip(1) {
                *slot = t[2 * m - k];
            }
            (0.0, e_low, e_high)
        }
        FamilyChoice::PhiJ(j) => {
            check_j(j, m)?;
            let mut e_low = vec![c64(1.0, 0.0); m + 1];
            e_low[j] = c64(2.0, 0.0);
            let mut e_high = vec![C64::default(); m + 1];
            for (k, slot) in e_high.iter_mut().enumerate().skip(1) {
                *slot = x2[j][k];
            }
            (0.0, e_low, e_high)
        }
        FamilyChoice::Phi2mJ(j) => {
            check_j(j, m)?;
            // y_{j,s} = x_{s,2m+1−j} (s ≠ j), y_{j,j} = x_{j,2m+1−j}
            let mut e_low = vec![C64::default(); m + 1];
            for (s, slot) in e_low.iter_mut().enumerate().skip(1) {
                *slot = x2[s][j];
            }
            let mut e_high = vec![C64::default(); m + 1];
            for (k, slot) in e_high.iter_mut().enumerate().skip(1) {
                *slot = 2.0 * y2[j][k];
            }
            (1.0, e_low, e_high)
        }
    };
    let c1 = 1.0 / (2.0 * (1.0 + d) * (2.0 + d));
    let c2 = (2.0 * d + 3.0) / (2.0 * (1.0 + d) * (1.0 + d) * (2.0 + d));
    let c3 = 1.0 / (2.0 * (1.0 + d) * (1.0 + d));
    let mut f = C64::default();
    for k in 1..=m {
        for s in 1..=m {
            f += c1 * e_low[k] * e_low[s] * y2[k][s];
            f += c2 * e_low[s] * e_high[k] * x2[k][s];
            f += c3 * e_high[k] * e_high[s] * xx[k][s];
        }
    }
    Ok(f)
}
