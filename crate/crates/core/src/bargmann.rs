//! Analytic symbols and the reproducing-kernel structure of the deformed
//! state space.
//!
//! A state with amplitudes `<n|psi>` corresponds to the entire function
//! `psi(z) = Σ z^n <n|psi> / sqrt([n]!)`. Against a certified weight table
//! the angular integrals collapse exactly (the phase integral is a
//! Kronecker delta), so every two-dimensional integral over the label
//! plane reduces to radial moments of the weight: with
//! `s_n = π ∫ x^n W(x) dx / [n]!` (equal to one for exact moments),
//!
//! - reconstruction multiplies each amplitude by `s_n`,
//! - inner products pick up `s_n` per level,
//! - the kernel identity reproduces `psi(conj(z))` with each term scaled
//!   by `s_n`.
//!
//! Deviations are therefore bounded by the certified moment errors, which
//! is what ties every check in this module back to the weight report. A
//! request that needs levels beyond the certified range is refused rather
//! than silently extrapolated.

use num_complex::Complex64;

use crate::coherent::{build_state, CoherentState};
use crate::error::{Error, Result};
use crate::measure::{table_moment, WeightTable};
use crate::qalgebra::{q_factorial, SpectrumSequence};
use std::f64::consts::PI;

/// Relative amplitude below which a level does not count toward the
/// certification requirement.
const OCCUPANCY_FLOOR: f64 = 1e-5;

/// A state in its analytic-symbol representation.
#[derive(Debug, Clone)]
pub struct AnalyticSymbol {
    amplitudes: Vec<Complex64>,
    sequence: SpectrumSequence,
}

impl AnalyticSymbol {
    pub fn new(amplitudes: Vec<Complex64>, sequence: SpectrumSequence) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("empty amplitude vector".into()));
        }
        Ok(AnalyticSymbol {
            amplitudes,
            sequence,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn sequence(&self) -> &SpectrumSequence {
        &self.sequence
    }

    /// Evaluates the symbol at `z`. See [`to_symbol`].
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        to_symbol(&self.amplitudes, &self.sequence, z)
    }
}

/// Symbol value `psi(z) = Σ z^n a_n / sqrt([n]!)` of a finite amplitude
/// vector (the sum is finite, hence exact up to round-off).
pub fn to_symbol(
    amplitudes: &[Complex64],
    sequence: &SpectrumSequence,
    z: Complex64,
) -> Result<Complex64> {
    let top = amplitudes.len() - 1;
    let table = q_factorial(sequence, top)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut z_pow = Complex64::new(1.0, 0.0);
    for (n, a) in amplitudes.iter().enumerate() {
        acc += z_pow * a / table.value(n).sqrt();
        z_pow *= z;
    }
    Ok(acc)
}

/// Highest level whose amplitude is non-negligible relative to the vector
/// norm; levels below the floor do not require certified moments.
fn occupancy(amplitudes: &[Complex64]) -> usize {
    let norm = amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    amplitudes
        .iter()
        .enumerate()
        .rev()
        .find(|(_, a)| a.norm() > OCCUPANCY_FLOOR * norm)
        .map(|(n, _)| n)
        .unwrap_or(0)
}

/// Radial projector scales `s_n = π S_n / [n]!` for `n = 0..=n_top`,
/// gated on the table's certification.
fn weighted_projectors(
    table: &WeightTable,
    sequence: &SpectrumSequence,
    n_top: usize,
    required_occupancy: usize,
    tolerance: f64,
) -> Result<Vec<f64>> {
    match table.certified_rel_error(required_occupancy) {
        Some(err) if err <= tolerance => {}
        Some(_) | None => {
            let certified = table
                .moment_report()
                .iter()
                .map(|c| c.n)
                .max()
                .map(|n| n + 1)
                .unwrap_or(0);
            return Err(Error::MomentQualityTooLow {
                required: required_occupancy,
                certified,
                tolerance,
            });
        }
    }
    let factorials = q_factorial(sequence, n_top)?;
    let mut scales = Vec::with_capacity(n_top + 1);
    for n in 0..=n_top {
        let s = table_moment(table, n)?;
        scales.push(PI * s / factorials.value(n));
    }
    Ok(scales)
}

/// Reconstructs Fock amplitudes from the symbol through the resolution of
/// unity: each amplitude returns scaled by the achieved moment ratio.
pub fn reconstruct(
    amplitudes: &[Complex64],
    table: &WeightTable,
    sequence: &SpectrumSequence,
    tolerance: f64,
) -> Result<Vec<Complex64>> {
    let n_top = amplitudes.len() - 1;
    let scales = weighted_projectors(table, sequence, n_top, occupancy(amplitudes), tolerance)?;
    Ok(amplitudes
        .iter()
        .zip(&scales)
        .map(|(a, s)| a * s)
        .collect())
}

/// Inner product `<psi1|psi2>` evaluated through the weight measure
/// (radial quadrature per level), to be compared against the Fock-space
/// dot product.
pub fn symbol_inner_product(
    psi1: &[Complex64],
    psi2: &[Complex64],
    table: &WeightTable,
    sequence: &SpectrumSequence,
    tolerance: f64,
) -> Result<Complex64> {
    let n_top = psi1.len().max(psi2.len()) - 1;
    let required = occupancy(psi1).max(occupancy(psi2));
    let scales = weighted_projectors(table, sequence, n_top, required, tolerance)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = zero;
    for n in 0..=n_top {
        let a = psi1.get(n).copied().unwrap_or(zero);
        let b = psi2.get(n).copied().unwrap_or(zero);
        acc += a.conj() * b * scales[n];
    }
    Ok(acc)
}

/// Right-hand side of the reproducing identity: the kernel integral
/// evaluated by radial quadrature, which must return `psi(conj(z))`.
pub fn kernel_reproduce(
    amplitudes: &[Complex64],
    table: &WeightTable,
    sequence: &SpectrumSequence,
    z: Complex64,
    tolerance: f64,
) -> Result<Complex64> {
    let n_top = amplitudes.len() - 1;
    let scales = weighted_projectors(table, sequence, n_top, occupancy(amplitudes), tolerance)?;
    let factorials = q_factorial(sequence, n_top)?;
    let zc = z.conj();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for (n, a) in amplitudes.iter().enumerate() {
        acc += pow * a * scales[n] / factorials.value(n).sqrt();
        pow *= zc;
    }
    Ok(acc)
}

/// Report of an overcompleteness check at one label.
#[derive(Debug, Clone)]
pub struct OvercompletenessReport {
    /// l2 distance between the directly built state and its expansion
    /// through the weight measure.
    pub deviation: f64,
    /// Top level of the state used for the check.
    pub state_n_max: usize,
    /// The state's own truncation tail bound.
    pub tail_bound: f64,
}

/// Expands the coherent state at `z_prime` through the resolution of unity
/// and reports the deviation from the directly built state; small
/// deviation certifies the linear dependence of the state family.
pub fn overcompleteness_check(
    z_prime: Complex64,
    table: &WeightTable,
    sequence: &SpectrumSequence,
    state_tolerance: f64,
    moment_tolerance: f64,
) -> Result<OvercompletenessReport> {
    let state: CoherentState = build_state(sequence, z_prime, state_tolerance)?;
    let expanded = reconstruct(state.coeffs(), table, sequence, moment_tolerance)?;
    let deviation = state
        .coeffs()
        .iter()
        .zip(&expanded)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(OvercompletenessReport {
        deviation,
        state_n_max: state.n_max(),
        tail_bound: state.tail_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::bosonic_table;
    use crate::qalgebra::Deformation;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn bosonic() -> SpectrumSequence {
        SpectrumSequence::linear(Deformation::classical())
    }

    fn phase_symmetric(theta: f64) -> SpectrumSequence {
        SpectrumSequence::symmetric(Deformation::phase(theta).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(dim: usize, n: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); dim];
        v[n] = c(1.0, 0.0);
        v
    }

    #[test]
    fn symbol_of_vacuum_is_constant_one() {
        let s = to_symbol(&basis(1, 0), &bosonic(), c(0.83, -2.1)).unwrap();
        assert!((s - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symbol_of_first_level_is_z() {
        let z = c(0.4, 0.9);
        let s = to_symbol(&basis(2, 1), &phase_symmetric(PI / 6.0), z).unwrap();
        assert!((s - z).norm() < 1e-15);
    }

    #[test]
    fn symbol_superposition_example() {
        // (|0> + |2>)/sqrt(2) at z = 1 with [2]! = sqrt(3).
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let mut amps = basis(3, 0);
        amps[0] = c(inv_sqrt2, 0.0);
        amps[2] = c(inv_sqrt2, 0.0);
        let s = to_symbol(&amps, &phase_symmetric(PI / 6.0), c(1.0, 0.0)).unwrap();
        let want = (1.0 + 1.0 / 3.0_f64.powf(0.25)) * inv_sqrt2;
        assert_relative_eq!(s.re, want, epsilon = 1e-13);
        assert!(s.im.abs() < 1e-15);
    }

    #[test]
    fn symbol_is_linear_in_amplitudes() {
        let seq = phase_symmetric(PI / 12.0);
        let z = c(0.3, 0.7);
        let a = vec![c(0.2, 0.1), c(-0.5, 0.4), c(0.3, 0.0)];
        let b = vec![c(0.9, -0.2), c(0.0, 0.3), c(-0.1, 0.6)];
        let lam = c(1.3, -0.8);
        let combo: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + lam * y).collect();
        let lhs = to_symbol(&combo, &seq, z).unwrap();
        let rhs = to_symbol(&a, &seq, z).unwrap() + lam * to_symbol(&b, &seq, z).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn reconstruct_identity_states_on_closed_form_weight() {
        let table = bosonic_table(64.0, 6401, 16).unwrap();
        let seq = bosonic();
        for n in [0usize, 3] {
            let amps = basis(n + 1, n);
            let rec = reconstruct(&amps, &table, &seq, 1e-6).unwrap();
            for (k, v) in rec.iter().enumerate() {
                let want = if k == n { 1.0 } else { 0.0 };
                assert!(
                    (v - c(want, 0.0)).norm() < 1e-7,
                    "level {k}: {v} vs {want}"
                );
            }
        }
    }

    #[test]
    fn reconstruct_refuses_uncertified_levels() {
        let table = bosonic_table(60.0, 6001, 4).unwrap();
        let amps = basis(9, 8);
        match reconstruct(&amps, &table, &bosonic(), 1e-6) {
            Err(Error::MomentQualityTooLow {
                required,
                certified,
                ..
            }) => {
                assert_eq!(required, 8);
                assert_eq!(certified, 5);
            }
            other => panic!("expected MomentQualityTooLow, got {other:?}"),
        }
    }

    #[test]
    fn inner_product_matches_fock_side() {
        let table = bosonic_table(64.0, 6401, 16).unwrap();
        let seq = bosonic();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        // psi = (|0> + i|1>)/sqrt(2): norm 1.
        let psi = vec![c(inv_sqrt2, 0.0), c(0.0, inv_sqrt2)];
        let n = symbol_inner_product(&psi, &psi, &table, &seq, 1e-6).unwrap();
        assert_relative_eq!(n.re, 1.0, epsilon = 1e-8);
        assert!(n.im.abs() < 1e-10);

        // Orthogonality of distinct levels survives the measure route.
        let o = symbol_inner_product(&basis(2, 0), &basis(2, 1), &table, &seq, 1e-6).unwrap();
        assert!(o.norm() < 1e-10);
    }

    #[test]
    fn kernel_reproduces_symbols_bosonic() {
        let table = bosonic_table(64.0, 6401, 16).unwrap();
        let seq = bosonic();
        let z = c(0.7, 0.2);
        // Constant symbol.
        let k0 = kernel_reproduce(&basis(1, 0), &table, &seq, z, 1e-6).unwrap();
        assert!((k0 - c(1.0, 0.0)).norm() < 1e-8);
        // psi = z at z = 1.
        let k1 = kernel_reproduce(&basis(2, 1), &table, &seq, c(1.0, 0.0), 1e-6).unwrap();
        let want = to_symbol(&basis(2, 1), &seq, c(1.0, 0.0)).unwrap();
        assert!((k1 - want).norm() < 1e-7);
    }

    #[test]
    fn overcompleteness_bosonic_labels() {
        let table = bosonic_table(64.0, 6401, 16).unwrap();
        let seq = bosonic();
        let r0 = overcompleteness_check(c(0.0, 0.0), &table, &seq, 1e-10, 1e-6).unwrap();
        assert!(r0.deviation <= 1e-8);
        let r1 = overcompleteness_check(c(1.0, 0.0), &table, &seq, 1e-8, 1e-6).unwrap();
        assert!(r1.deviation <= 1e-6, "deviation {}", r1.deviation);
    }

    #[test]
    fn occupancy_ignores_negligible_tails() {
        let mut amps = basis(12, 2);
        amps[11] = c(1e-9, 0.0);
        assert_eq!(occupancy(&amps), 2);
    }
}
