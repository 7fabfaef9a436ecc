//! Eigenstates of the annihilation operator: construction, overlaps, and
//! the label-continuity identity.
//!
//! A state with label `z` has unnormalized coefficients `z^n / sqrt([n]!)`;
//! the squared norm of the unnormalized state is `exp_q(|z|^2)`, so the
//! normalization constant is its reciprocal square root (reciprocal
//! semantics, never the series at a negated argument). Truncation is chosen
//! adaptively so the neglected l2 amplitude stays below the requested
//! tolerance; for a phase spectrum the positivity window is finite and the
//! sum over the whole window is exact, with trailing negligible levels
//! trimmed against the same tolerance.
//!
//! The eigenvalue relation `a|state> = z|state>` holds row by row below the
//! top occupied level; the top level is the truncation edge where a finite
//! ladder cannot close, so residuals are measured on the interior rows
//! only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockOperatorSet;
use crate::qalgebra::{exp_q, SpectrumSequence, BOX_ZERO_TOL, MAX_SERIES_ORDER};

/// Series tolerance used when overlaps evaluate the deformed exponential.
const OVERLAP_SERIES_TOL: f64 = 1e-14;

/// A normalized, adaptively truncated coherent state.
#[derive(Debug, Clone)]
pub struct CoherentState {
    z: Complex64,
    sequence: SpectrumSequence,
    coeffs: Vec<Complex64>,
    norm_const: f64,
    tail_bound: f64,
}

impl CoherentState {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn sequence(&self) -> &SpectrumSequence {
        &self.sequence
    }

    /// Top occupied level; the state spans `|0>..|n_max>`.
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Normalized coefficients, `coeffs[n] = N z^n / sqrt([n]!)`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Normalization constant `N = exp_q(|z|^2)^{-1/2}`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Rigorous bound on the l2 amplitude of the neglected component.
    /// Zero when the spectrum terminated and the state is exact.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

/// Builds the normalized state for label `z` with neglected l2 amplitude
/// below `tolerance`.
pub fn build_state(
    sequence: &SpectrumSequence,
    z: Complex64,
    tolerance: f64,
) -> Result<CoherentState> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let x = z.norm_sqr();
    // Mass series terms t_n = x^n / [n]!, summed either to geometric
    // domination (monotone spectra) or across the finite phase window.
    let mut terms = vec![1.0_f64];
    let mut boxes = vec![0.0_f64];
    let mut extra_tail = 0.0_f64;
    let mut terminated = false;
    let mut n = 0usize;
    loop {
        n += 1;
        if n > MAX_SERIES_ORDER {
            return Err(Error::NoConvergence {
                max_order: MAX_SERIES_ORDER,
                tail: *terms.last().unwrap(),
            });
        }
        let b = sequence.box_value(n)?;
        if b.abs() <= BOX_ZERO_TOL {
            terminated = true;
            break;
        }
        if b < 0.0 {
            return Err(Error::PositivityViolation { n, value: b });
        }
        let t = terms[n - 1] * x / b;
        terms.push(t);
        boxes.push(b);
        let b_next = sequence.box_value(n + 1)?;
        if b_next > 2.0 * x {
            let tail = 2.0 * t * x / b_next;
            let sum: f64 = terms.iter().sum();
            if tail <= tolerance * tolerance * sum {
                extra_tail = tail;
                break;
            }
        }
    }
    let sum: f64 = terms.iter().sum();

    // Trim trailing negligible levels against the same mass budget.
    let budget = tolerance * tolerance * sum;
    let mut kept = terms.len() - 1;
    let mut tail_mass = extra_tail;
    while kept > 0 && tail_mass + terms[kept] <= budget {
        tail_mass += terms[kept];
        kept -= 1;
    }

    let norm_const = 1.0 / sum.sqrt();
    let mut coeffs = Vec::with_capacity(kept + 1);
    coeffs.push(Complex64::new(norm_const, 0.0));
    for k in 1..=kept {
        let prev = coeffs[k - 1];
        coeffs.push(prev * z / boxes[k].sqrt());
    }
    let tail_bound = if terminated && tail_mass == 0.0 {
        0.0
    } else {
        (tail_mass / sum).sqrt()
    };
    Ok(CoherentState {
        z,
        sequence: *sequence,
        coeffs,
        norm_const,
        tail_bound,
    })
}

/// Relative l2 residual of `a|state> - z|state>` over the interior rows of
/// the shared truncation (the state's top level is excluded as the
/// truncation edge).
pub fn eigen_residual(state: &CoherentState, ops: &FockOperatorSet) -> Result<f64> {
    if state.sequence != *ops.sequence() {
        return Err(Error::SequenceMismatch);
    }
    let levels = state.coeffs.len();
    if ops.n_max() < levels {
        return Err(Error::DimensionMismatch {
            required: levels,
            actual: ops.n_max(),
        });
    }
    let dim = ops.n_max();
    let mut v = ndarray::Array1::<Complex64>::zeros(dim);
    for (n, c) in state.coeffs.iter().enumerate() {
        v[n] = *c;
    }
    let av = ops.a().dot(&v);
    let mut num = 0.0_f64;
    for r in 0..levels.saturating_sub(1) {
        num += (av[r] - state.z * v[r]).norm_sqr();
    }
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(num.sqrt() / norm)
}

/// Overlap `<s1|s2> = N N' exp_q(conj(z) z')`.
pub fn overlap(s1: &CoherentState, s2: &CoherentState) -> Result<Complex64> {
    if s1.sequence != s2.sequence {
        return Err(Error::SequenceMismatch);
    }
    let kernel = exp_q(&s1.sequence, s1.z.conj() * s2.z, OVERLAP_SERIES_TOL)?;
    Ok(kernel * s1.norm_const * s2.norm_const)
}

/// Both sides of the continuity identity:
/// `lhs = || s1 - s2 ||^2` and `rhs = 2 (1 - Re <s1|s2>)`.
///
/// The two agree up to the combined truncation tails, which is what makes
/// label continuity a computable statement.
pub fn continuity_gap(s1: &CoherentState, s2: &CoherentState) -> Result<(f64, f64)> {
    if s1.sequence != s2.sequence {
        return Err(Error::SequenceMismatch);
    }
    let len = s1.coeffs.len().max(s2.coeffs.len());
    let zero = Complex64::new(0.0, 0.0);
    let mut lhs = 0.0_f64;
    for n in 0..len {
        let a = s1.coeffs.get(n).copied().unwrap_or(zero);
        let b = s2.coeffs.get(n).copied().unwrap_or(zero);
        lhs += (a - b).norm_sqr();
    }
    let rhs = 2.0 * (1.0 - overlap(s1, s2)?.re);
    Ok((lhs, rhs))
}
