//! Truncated Fock-space matrix realizations and algebra residual checks.
//!
//! On the basis `|0>, ..., |dim-1>` the ladder operators act as
//! `a|n> = sqrt(box(n)) |n-1>` and `a+|n> = sqrt(box(n+1)) |n+1>`, with the
//! diagonal operators `delta = a+ a` and
//! `delta_prime = diag(box(n+1) - q box(n))`. The defining relation
//! `a a+ - q a+ a = delta_prime` and its symmetric-spectrum specialization
//! `A A+ - Q A+ A = Q^{-N}` are verified by computing the residual matrix
//! and taking the maximum entry over all rows except the last: the top
//! level of any finite truncation cannot satisfy the ladder relations, so
//! the final row is excluded by policy rather than measured.
//!
//! [`FMap`] carries the diagonal change of operators `A = F a`,
//! `A+ = alpha a+ F` that transports one spectrum onto the symmetric
//! `Q`-spectrum; its entries satisfy
//! `sqrt([n+1]_Q) = f_n sqrt(box(n+1))`, which requires every `box(n+1)`
//! to be invertible and the ratio under the square root to stay positive.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qalgebra::{q_factorial, Deformation, SpectrumSequence, BOX_ZERO_TOL};

/// Dense truncated realizations of the generators.
#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    n_max: usize,
    sequence: SpectrumSequence,
    a: Array2<Complex64>,
    a_dag: Array2<Complex64>,
    delta: Array2<Complex64>,
    delta_prime: Array2<Complex64>,
    number: Array2<Complex64>,
}

impl FockOperatorSet {
    /// Truncation dimension (the basis runs `|0>..|n_max-1>`).
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sequence(&self) -> &SpectrumSequence {
        &self.sequence
    }

    /// Annihilation operator.
    pub fn a(&self) -> &Array2<Complex64> {
        &self.a
    }

    /// Creation operator (conjugate transpose of `a`).
    pub fn a_dag(&self) -> &Array2<Complex64> {
        &self.a_dag
    }

    /// `delta = a+ a`, diagonal with entries `box(n)`.
    pub fn delta(&self) -> &Array2<Complex64> {
        &self.delta
    }

    /// `delta_prime`, diagonal with entries `box(n+1) - q box(n)`.
    pub fn delta_prime(&self) -> &Array2<Complex64> {
        &self.delta_prime
    }

    /// Number operator `N = diag(n)`.
    pub fn number(&self) -> &Array2<Complex64> {
        &self.number
    }
}

/// Builds the truncated operator set for a spectrum.
///
/// The positivity gate covers every level that ends up under a square root
/// (`box(1)..box(n_max-1)`); the top `delta_prime` entry uses `box(n_max)`
/// linearly, so a vanishing box there is legal and simply closes the
/// spectrum at the truncation edge.
pub fn build_operators(sequence: &SpectrumSequence, n_max: usize) -> Result<FockOperatorSet> {
    if n_max < 2 {
        return Err(Error::InvalidInput(format!(
            "operator truncation needs n_max >= 2, got {n_max}"
        )));
    }
    // Gate the square-root range.
    q_factorial(sequence, n_max - 1)?;
    let boxes: Vec<f64> = (0..=n_max)
        .map(|n| sequence.box_value(n))
        .collect::<Result<_>>()?;
    let q = sequence.deformation().q();

    let mut a = Array2::zeros((n_max, n_max));
    for n in 1..n_max {
        a[(n - 1, n)] = Complex64::new(boxes[n].sqrt(), 0.0);
    }
    let a_dag = conjugate_transpose(&a);
    let mut delta = Array2::zeros((n_max, n_max));
    let mut delta_prime = Array2::zeros((n_max, n_max));
    let mut number = Array2::zeros((n_max, n_max));
    for n in 0..n_max {
        delta[(n, n)] = Complex64::new(boxes[n], 0.0);
        delta_prime[(n, n)] = Complex64::new(boxes[n + 1], 0.0) - q * boxes[n];
        number[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    Ok(FockOperatorSet {
        n_max,
        sequence: *sequence,
        a,
        a_dag,
        delta,
        delta_prime,
        number,
    })
}

fn conjugate_transpose(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

/// Maximum absolute entry over all rows except the last (the truncation
/// edge, excluded by policy).
fn max_abs_excluding_edge(m: &Array2<Complex64>) -> f64 {
    let rows = m.nrows();
    let mut max = 0.0_f64;
    for i in 0..rows.saturating_sub(1) {
        for j in 0..m.ncols() {
            max = max.max(m[(i, j)].norm());
        }
    }
    max
}

/// Residual of the deformed commutation relation
/// `a a+ - q a+ a - delta_prime` over the interior rows.
pub fn verify_qmutator(ops: &FockOperatorSet, q: Complex64) -> f64 {
    let m = ops.a.dot(&ops.a_dag) - ops.a_dag.dot(&ops.a).mapv(|v| v * q) - &ops.delta_prime;
    max_abs_excluding_edge(&m)
}

/// Residual of `A A+ - Q A+ A - Q^{-N}` over the interior rows.
///
/// Meaningful for operators built from the symmetric spectrum with
/// deformation `Q`, for which `box(n+1) - Q box(n) = Q^{-n}` holds exactly.
pub fn verify_q_oscillator(ops: &FockOperatorSet, q: Complex64) -> f64 {
    let dim = ops.n_max;
    let mut m = ops.a.dot(&ops.a_dag) - ops.a_dag.dot(&ops.a).mapv(|v| v * q);
    for n in 0..dim {
        m[(n, n)] -= q.powi(-(n as i32));
    }
    max_abs_excluding_edge(&m)
}

/// Residuals of the two mixed relations
/// `a delta - q delta a = delta_prime a` and
/// `delta a+ - q a+ delta = a+ delta_prime`, same edge policy.
pub fn verify_mixed_qmutators(ops: &FockOperatorSet, q: Complex64) -> (f64, f64) {
    let lower = ops.a.dot(&ops.delta)
        - ops.delta.dot(&ops.a).mapv(|v| v * q)
        - ops.delta_prime.dot(&ops.a);
    let raise = ops.delta.dot(&ops.a_dag)
        - ops.a_dag.dot(&ops.delta).mapv(|v| v * q)
        - ops.a_dag.dot(&ops.delta_prime);
    (
        max_abs_excluding_edge(&lower),
        max_abs_excluding_edge(&raise),
    )
}

/// Diagonal operator map transporting a source spectrum onto the symmetric
/// `Q`-oscillator.
#[derive(Debug, Clone)]
pub struct FMap {
    alpha: Complex64,
    f: Vec<f64>,
    target: Deformation,
    source: SpectrumSequence,
}

impl FMap {
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// Diagonal entries `f_n`, `n = 0..n_max-1`.
    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    pub fn target(&self) -> &Deformation {
        &self.target
    }

    pub fn source(&self) -> &SpectrumSequence {
        &self.source
    }

    /// Applies the map to a source operator set, returning
    /// `(A, A+) = (F a, alpha a+ F)`.
    pub fn mapped_operators(
        &self,
        ops: &FockOperatorSet,
    ) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
        if ops.n_max > self.f.len() {
            return Err(Error::DimensionMismatch {
                required: ops.n_max,
                actual: self.f.len(),
            });
        }
        let dim = ops.n_max;
        let mut f_mat = Array2::zeros((dim, dim));
        for n in 0..dim {
            f_mat[(n, n)] = Complex64::new(self.f[n], 0.0);
        }
        let a_mapped = f_mat.dot(&ops.a);
        let a_dag_mapped = ops.a_dag.dot(&f_mat).mapv(|v| v * self.alpha);
        Ok((a_mapped, a_dag_mapped))
    }
}

/// Solves `sqrt([n+1]_Q) = f_n sqrt(box(n+1))` for `n = 0..n_max-1`.
///
/// Fails with `NotInvertible` when a source box vanishes and with
/// `NegativeRatio` when the square-root argument leaves the positive axis
/// (either spectrum past its positivity window).
pub fn build_fmap(
    source: &SpectrumSequence,
    target: &Deformation,
    alpha: Complex64,
    n_max: usize,
) -> Result<FMap> {
    let target_seq = SpectrumSequence::symmetric(*target)?;
    let mut f = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let rho = source.box_value(n + 1)?;
        if rho.abs() <= BOX_ZERO_TOL {
            return Err(Error::NotInvertible { n });
        }
        let target_box = target_seq.box_value(n + 1)?;
        let ratio = target_box / rho;
        if ratio < 0.0 {
            return Err(Error::NegativeRatio { n, ratio });
        }
        f.push(ratio.sqrt());
    }
    Ok(FMap {
        alpha,
        f,
        target: *target,
        source: *source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::Deformation;
    use approx::assert_relative_eq;
    use ndarray::Array1;
    use std::f64::consts::PI;

    fn bosonic() -> SpectrumSequence {
        SpectrumSequence::linear(Deformation::classical())
    }

    fn phase_symmetric(theta: f64) -> SpectrumSequence {
        SpectrumSequence::symmetric(Deformation::phase(theta).unwrap()).unwrap()
    }

    fn basis_vector(dim: usize, n: usize) -> Array1<Complex64> {
        let mut v = Array1::zeros(dim);
        v[n] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn annihilation_lowers_level_one_to_vacuum() {
        let ops = build_operators(&phase_symmetric(1.3), 2).unwrap();
        let out = ops.a().dot(&basis_vector(2, 1));
        assert_relative_eq!(out[0].re, 1.0, epsilon = 1e-14);
        assert!(out[1].norm() < 1e-15);
    }

    #[test]
    fn creation_is_bosonic_ladder_for_linear() {
        let ops = build_operators(&bosonic(), 5).unwrap();
        let out = ops.a_dag().dot(&basis_vector(5, 2));
        assert_relative_eq!(out[3].re, 3.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn delta_diagonal_matches_box_table() {
        let seq = phase_symmetric(PI / 6.0);
        let ops = build_operators(&seq, 4).unwrap();
        let expected = [0.0, 1.0, 3.0_f64.sqrt(), 2.0];
        let product = ops.a_dag().dot(ops.a());
        for (n, want) in expected.iter().enumerate() {
            assert_relative_eq!(ops.delta()[(n, n)].re, *want, epsilon = 1e-12);
            // Oracle: diagonal of the actual product a+ a.
            assert_relative_eq!(product[(n, n)].re, *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn adjointness_is_exact() {
        let ops = build_operators(&phase_symmetric(PI / 12.0), 8).unwrap();
        let t = ops.a().t().mapv(|v| v.conj());
        assert_eq!(ops.a_dag(), &t);
    }

    #[test]
    fn delta_spectrum_is_box_multiset() {
        let seq = phase_symmetric(PI / 12.0);
        let ops = build_operators(&seq, 9).unwrap();
        // a+ a is structurally diagonal, so its spectrum is its diagonal.
        let product = ops.a_dag().dot(ops.a());
        for i in 0..9 {
            for j in 0..9 {
                if i != j {
                    assert!(product[(i, j)].norm() < 1e-14);
                }
            }
            assert_relative_eq!(
                product[(i, i)].re,
                seq.box_value(i).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn qmutator_residual_bosonic() {
        let ops = build_operators(&bosonic(), 8).unwrap();
        assert!(verify_qmutator(&ops, Complex64::new(1.0, 0.0)) <= 1e-13);
    }

    #[test]
    fn qmutator_residual_phase() {
        let seq = phase_symmetric(PI / 6.0);
        let ops = build_operators(&seq, 5).unwrap();
        let q = seq.deformation().q();
        assert!(verify_qmutator(&ops, q) <= 1e-13);
    }

    #[test]
    fn qmutator_negative_control() {
        // Replacing delta_prime by the identity must blow the residual up
        // to O(1).
        let seq = phase_symmetric(PI / 6.0);
        let mut ops = build_operators(&seq, 5).unwrap();
        ops.delta_prime = Array2::eye(5);
        let q = seq.deformation().q();
        assert!(verify_qmutator(&ops, q) > 0.1);
    }

    #[test]
    fn q_oscillator_residual_bosonic_identity() {
        let seq = SpectrumSequence::symmetric(Deformation::classical()).unwrap();
        let ops = build_operators(&seq, 6).unwrap();
        assert!(verify_q_oscillator(&ops, Complex64::new(1.0, 0.0)) <= 1e-13);
    }

    #[test]
    fn q_oscillator_residual_phase() {
        let seq = phase_symmetric(PI / 8.0);
        let ops = build_operators(&seq, 6).unwrap();
        let q = seq.deformation().q();
        assert!(verify_q_oscillator(&ops, q) <= 1e-12);

        // Oracle: the per-entry identity box(n+1) - Q box(n) = Q^{-n}.
        for n in 0..6 {
            let lhs = Complex64::new(seq.box_value(n + 1).unwrap(), 0.0)
                - q * seq.box_value(n).unwrap();
            let rhs = q.powi(-(n as i32));
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn q_oscillator_negative_control_wrong_sign() {
        let seq = phase_symmetric(PI / 8.0);
        let ops = build_operators(&seq, 6).unwrap();
        let q = seq.deformation().q();
        // Flip the sign of the Q^{-N} term by hand.
        let mut m = ops.a().dot(ops.a_dag()) - ops.a_dag().dot(ops.a()).mapv(|v| v * q);
        for n in 0..6 {
            m[(n, n)] += q.powi(-(n as i32));
        }
        assert!(max_abs_excluding_edge(&m) > 0.5);
    }

    #[test]
    fn mixed_qmutator_residuals_vanish() {
        for (seq, dim) in [
            (bosonic(), 9),
            (phase_symmetric(PI / 6.0), 5),
            (phase_symmetric(PI / 12.0), 11),
        ] {
            let q = seq.deformation().q();
            let ops = build_operators(&seq, dim).unwrap();
            let (lower, raise) = verify_mixed_qmutators(&ops, q);
            assert!(lower <= 1e-12, "lower residual {lower}");
            assert!(raise <= 1e-12, "raise residual {raise}");
        }
    }

    #[test]
    fn truncation_locality_of_residuals() {
        // Leading rows of the residual matrix are unchanged when the
        // truncation grows.
        let seq = phase_symmetric(PI / 12.0);
        let q = seq.deformation().q();
        let small = build_operators(&seq, 7).unwrap();
        let large = build_operators(&seq, 11).unwrap();
        let rs = small.a().dot(small.a_dag())
            - small.a_dag().dot(small.a()).mapv(|v| v * q)
            - small.delta_prime();
        let rl = large.a().dot(large.a_dag())
            - large.a_dag().dot(large.a()).mapv(|v| v * q)
            - large.delta_prime();
        for i in 0..6 {
            for j in 0..7 {
                assert!((rs[(i, j)] - rl[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn fmap_to_itself_is_identity() {
        let target = Deformation::phase(PI / 8.0).unwrap();
        let seq = SpectrumSequence::symmetric(target).unwrap();
        let map = build_fmap(&seq, &target, Complex64::new(1.0, 0.0), 6).unwrap();
        for f in map.f_values() {
            assert_relative_eq!(*f, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn fmap_from_linear_matches_elementwise_constraint() {
        let target = Deformation::phase(PI / 8.0).unwrap();
        let target_seq = SpectrumSequence::symmetric(target).unwrap();
        let source = bosonic();
        let map = build_fmap(&source, &target, Complex64::new(1.0, 0.0), 7).unwrap();
        for (n, f) in map.f_values().iter().enumerate() {
            // Oracle: f_n = sqrt([n+1]_Q / (n+1)).
            let want = (target_seq.box_value(n + 1).unwrap() / (n as f64 + 1.0)).sqrt();
            assert_relative_eq!(*f, want, epsilon = 1e-13);
            // And the defining constraint itself.
            let lhs = target_seq.box_value(n + 1).unwrap().sqrt();
            let rhs = f * source.box_value(n + 1).unwrap().sqrt();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn fmap_not_invertible_at_sine_zero() {
        // Source boxes vanish at n+1 = 4 for theta = pi/4; the sine-zero
        // scan pins the failure to f_3.
        let source = phase_symmetric(PI / 4.0);
        match build_fmap(
            &source,
            &Deformation::real(1.2).unwrap(),
            Complex64::new(1.0, 0.0),
            5,
        ) {
            Err(Error::NotInvertible { n }) => assert_eq!(n, 3),
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn fmap_negative_ratio_detected() {
        // Target boxes go negative past the window while the linear source
        // stays positive.
        let target = Deformation::phase(PI / 8.0).unwrap();
        match build_fmap(&bosonic(), &target, Complex64::new(1.0, 0.0), 12) {
            Err(Error::NegativeRatio { n, .. }) => assert_eq!(n, 8),
            other => panic!("expected NegativeRatio, got {other:?}"),
        }
    }

    #[test]
    fn mapped_operators_satisfy_target_relation() {
        let target = Deformation::phase(PI / 8.0).unwrap();
        let source = bosonic();
        let dim = 7;
        let ops = build_operators(&source, dim).unwrap();
        let map = build_fmap(&source, &target, Complex64::new(1.0, 0.0), dim).unwrap();
        let (a, a_dag) = map.mapped_operators(&ops).unwrap();
        let q = target.q();
        let mut m = a.dot(&a_dag) - a_dag.dot(&a).mapv(|v| v * q);
        for n in 0..dim {
            m[(n, n)] -= q.powi(-(n as i32));
        }
        assert!(max_abs_excluding_edge(&m) <= 1e-12);
    }
}
