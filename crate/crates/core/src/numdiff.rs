//! Finite-difference derivative tensors of holomorphic functions ℂᴺ → ℂ.
//!
//! Central differences, composed per variable for mixed partials, with
//! Richardson extrapolation across step halvings. Steps are taken along the
//! real axis of each complex coordinate (holomorphy makes the direction
//! immaterial; a fixed choice keeps stencils reproducible) and scale as
//! h_α = base_step · max(1, |t_α|).

use crate::C64;
use std::collections::HashMap;
use thiserror::Error;

/// Errors raised while assembling a derivative tensor.
#[derive(Debug, Clone, Error)]
pub enum NumDiffError {
    /// The evaluator failed on a stencil node.
    #[error("stencil node evaluation failed: {0}")]
    StencilError(String),
    /// Richardson levels disagree beyond the requested stability tolerance.
    #[error("Richardson levels disagree: estimate {estimate:e} > 10x tolerance {tolerance:e}")]
    UnstableError { estimate: f64, tolerance: f64 },
    /// Invalid differentiation request.
    #[error("invalid derivative spec: {0}")]
    BadSpec(String),
}

pub type Result<T> = std::result::Result<T, NumDiffError>;

/// Step-size and extrapolation policy.
#[derive(Debug, Clone, Copy)]
pub struct DerivSpec {
    /// Relative base step (0 < base_step < 0.1).
    pub base_step: f64,
    /// Richardson levels (1 = plain central differences, 2–3 = extrapolated).
    pub richardson_levels: usize,
    /// If set, raise [`NumDiffError::UnstableError`] when the Richardson
    /// error estimate exceeds 10× this tolerance.
    pub stability_tol: Option<f64>,
}

impl Default for DerivSpec {
    fn default() -> Self {
        DerivSpec {
            base_step: 1e-3,
            richardson_levels: 2,
            stability_tol: None,
        }
    }
}

impl DerivSpec {
    fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step < 0.1) {
            return Err(NumDiffError::BadSpec(format!(
                "base_step must lie in (0, 0.1), got {}",
                self.base_step
            )));
        }
        if !(1..=3).contains(&self.richardson_levels) {
            return Err(NumDiffError::BadSpec(format!(
                "richardson_levels must be 1..=3, got {}",
                self.richardson_levels
            )));
        }
        Ok(())
    }
}

/// A rank-`order` symmetric tensor over N complex variables, stored dense in
/// row-major layout, plus accuracy diagnostics.
#[derive(Debug, Clone)]
pub struct DerivTensor {
    pub n: usize,
    pub order: usize,
    /// Dense entries, length n^order, index (i₁,…,i_k) ↦ Σ i_j·n^(k−j).
    pub entries: Vec<C64>,
    /// Max relative disagreement between index permutations before
    /// symmetrization.
    pub asymmetry: f64,
    /// Max Richardson error estimate over all entries (difference between
    /// the two finest extrapolation levels).
    pub richardson_estimate: f64,
}

impl DerivTensor {
    /// Entry accessor by multi-index.
    pub fn get(&self, idx: &[usize]) -> C64 {
        debug_assert_eq!(idx.len(), self.order);
        let mut flat = 0usize;
        for &i in idx {
            flat = flat * self.n + i;
        }
        self.entries[flat]
    }
}

/// Memoizing evaluator over stencil nodes. Offsets are exact integer
/// multiples of h_α/2^(levels−1), so keys are exact.
struct StencilCache<'a> {
    f: &'a dyn Fn(&[C64]) -> std::result::Result<C64, String>,
    point: &'a [C64],
    /// Finest step per variable (h_α / 2^(levels−1)).
    fine_step: Vec<f64>,
    cache: HashMap<Vec<i32>, C64>,
}

impl<'a> StencilCache<'a> {
    fn eval(&mut self, offsets: &[i32]) -> Result<C64> {
        if let Some(v) = self.cache.get(offsets) {
            return Ok(*v);
        }
        let mut p = self.point.to_vec();
        for (i, &k) in offsets.iter().enumerate() {
            p[i].re += k as f64 * self.fine_step[i];
        }
        let v = (self.f)(&p).map_err(NumDiffError::StencilError)?;
        self.cache.insert(offsets.to_vec(), v);
        Ok(v)
    }
}

/// Nested central difference for the ordered multi-index `idx`, with each
/// variable stepped by `step_units · fine_step` offset units.
fn nested_central(
    cache: &mut StencilCache<'_>,
    idx: &[usize],
    step_units: i32,
) -> Result<C64> {
    let k = idx.len();
    let mut sum = C64::default();
    let n_vars = cache.point.len();
    // iterate over sign patterns ε ∈ {−1,+1}^k
    for mask in 0..(1u32 << k) {
        let mut offsets = vec![0i32; n_vars];
        let mut parity = 1.0f64;
        for (j, &var) in idx.iter().enumerate() {
            let sign = if mask & (1 << j) != 0 { 1 } else { -1 };
            if sign < 0 {
                parity = -parity;
            }
            offsets[var] += sign * step_units;
        }
        sum += parity * cache.eval(&offsets)?;
    }
    let mut denom = 1.0f64;
    for &var in idx {
        denom *= 2.0 * step_units as f64 * cache.fine_step[var];
    }
    Ok(sum / denom)
}

/// Richardson-extrapolated entry for the ordered multi-index `idx`.
/// Returns (value, error estimate).
fn entry(cache: &mut StencilCache<'_>, idx: &[usize], levels: usize) -> Result<(C64, f64)> {
    // T(h), T(h/2), …: step units 2^(levels−1), …, 1 on the fine grid
    let mut row: Vec<C64> = (0..levels)
        .map(|l| nested_central(cache, idx, 1 << (levels - 1 - l)))
        .collect::<Result<_>>()?;
    // Romberg on h-halving for O(h²) central stencils
    let mut err = 0.0f64;
    for level in 1..levels {
        let factor = 4.0f64.powi(level as i32);
        for i in (level..levels).rev() {
            row[i] = (factor * row[i] - row[i - 1]) / (factor - 1.0);
        }
        err = (row[levels - 1] - row[levels - 2]).norm();
    }
    if levels == 1 {
        err = f64::NAN; // no estimate available without extrapolation
    }
    Ok((row[levels - 1], err))
}

/// Derivative tensor of order 1, 2 or 3 at `point`.
///
/// The evaluator returns `Err(message)` for domain failures, which surface
/// as [`NumDiffError::StencilError`]. The returned tensor is fully
/// symmetrized; the pre-symmetrization disagreement across index
/// permutations is reported in `asymmetry`.
pub fn derivative_tensor(
    f: &dyn Fn(&[C64]) -> std::result::Result<C64, String>,
    point: &[C64],
    order: usize,
    spec: &DerivSpec,
) -> Result<DerivTensor> {
    spec.validate()?;
    if !(1..=3).contains(&order) {
        return Err(NumDiffError::BadSpec(format!(
            "order must be 1..=3, got {order}"
        )));
    }
    let n = point.len();
    let fine_step: Vec<f64> = point
        .iter()
        .map(|t| spec.base_step * t.norm().max(1.0) / (1 << (spec.richardson_levels - 1)) as f64)
        .collect();
    let mut cache = StencilCache {
        f,
        point,
        fine_step,
        cache: HashMap::new(),
    };

    let total = n.pow(order as u32);
    let mut raw = vec![C64::default(); total];
    let mut max_est = 0.0f64;
    let mut idx = vec![0usize; order];
    for flat in 0..total {
        let mut rem = flat;
        for slot in (0..order).rev() {
            idx[slot] = rem % n;
            rem /= n;
        }
        let (v, est) = entry(&mut cache, &idx, spec.richardson_levels)?;
        raw[flat] = v;
        if est.is_finite() {
            max_est = max_est.max(est);
        }
    }

    // symmetrize and measure the pre-symmetrization asymmetry
    let mut entries = vec![C64::default(); total];
    let mut asym = 0.0f64;
    let mut idx = vec![0usize; order];
    for flat in 0..total {
        let mut rem = flat;
        for slot in (0..order).rev() {
            idx[slot] = rem % n;
            rem /= n;
        }
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        // average over all permutations == average over distinct ordered
        // tuples with the same sorted index (each appears equally often)
        let perms = permutations_of(&sorted);
        let mut avg = C64::default();
        for p in &perms {
            let mut pf = 0usize;
            for &i in p {
                pf = pf * n + i;
            }
            avg += raw[pf];
        }
        avg /= perms.len() as f64;
        let scale = avg.norm().max(1.0);
        asym = asym.max((raw[flat] - avg).norm() / scale);
        entries[flat] = avg;
    }

    if let Some(tol) = spec.stability_tol {
        if max_est > 10.0 * tol {
            return Err(NumDiffError::UnstableError {
                estimate: max_est,
                tolerance: tol,
            });
        }
    }

    Ok(DerivTensor {
        n,
        order,
        entries,
        asymmetry: asym,
        richardson_estimate: max_est,
    })
}

/// All distinct permutations of a (short, possibly repeating) index list.
fn permutations_of(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = sorted.to_vec();
    loop {
        out.push(current.clone());
        // next_permutation
        let k = current.len();
        let mut i = k.wrapping_sub(2);
        while i != usize::MAX && current[i] >= current[i + 1] {
            i = i.wrapping_sub(1);
        }
        if i == usize::MAX {
            break;
        }
        let mut j = k - 1;
        while current[j] <= current[i] {
            j -= 1;
        }
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}
