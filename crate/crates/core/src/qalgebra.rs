//! Box functions, deformed factorials, and the deformed exponential.
//!
//! A spectrum sequence assigns to each level `n` a real value `box(n)`
//! (written `[n]` below). The four families are
//!
//! - `Linear`:    `[n] = n`
//! - `ArikCoon`:  `[n] = (1 - q^n) / (1 - q)` for real `q`
//! - `Symmetric`: `[n] = (q^n - q^-n) / (q - q^-1)`, which for a phase
//!   `q = e^{iθ}` reduces to `sin(nθ)/sin(θ)` and for real `q` to
//!   `sinh(n ln q)/sinh(ln q)`
//! - `Fibonacci`: `[n] = F_n` (undeformed)
//!
//! Running products `[n]! = [n][n-1]⋯[1]` (with `[0]! = 1`) feed the ladder
//! coefficients and the deformed exponential `exp_q(x) = Σ x^n/[n]!`.
//!
//! Two domain facts drive the design here. First, every square root in the
//! ladder realization needs `box(n) > 0`, so factorial tables enforce a
//! strict positivity gate and report the first offending level. Second, for
//! a phase `q = e^{iθ}` with `θ = π/m` the value `box(m)` vanishes: the
//! spectrum terminates and the exponential series becomes the exact finite
//! sum over the surviving levels. Termination is not an error for series
//! evaluation, while the factorial table (which backs the square-root
//! paths) still fails fast.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this value a box entry counts as vanished (spectrum terminated).
pub const BOX_ZERO_TOL: f64 = 1e-12;

/// Hard cap on adaptive series order before reporting `NoConvergence`.
pub const MAX_SERIES_ORDER: usize = 100_000;

/// Deformation parameter kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationKind {
    /// `q = 1` exactly; all box functions reduce to their classical limit.
    Classical,
    /// Real `q > 0`, `q != 1`.
    RealQ,
    /// `q = e^{iθ}` with `θ ∈ (0, π)`.
    PhaseQ,
}

/// A validated deformation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformation {
    kind: DeformationKind,
    value: Complex64,
    phase_angle: f64,
}

impl Deformation {
    /// The undeformed case `q = 1`.
    pub fn classical() -> Self {
        Deformation {
            kind: DeformationKind::Classical,
            value: Complex64::new(1.0, 0.0),
            phase_angle: 0.0,
        }
    }

    /// Real deformation `q > 0`, `q != 1`.
    pub fn real(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::InvalidDeformation(format!(
                "real q must be positive and finite, got {q}"
            )));
        }
        if q == 1.0 {
            return Err(Error::InvalidDeformation(
                "real q = 1 must use the classical kind".into(),
            ));
        }
        Ok(Deformation {
            kind: DeformationKind::RealQ,
            value: Complex64::new(q, 0.0),
            phase_angle: 0.0,
        })
    }

    /// Phase deformation `q = e^{iθ}` with `θ ∈ (0, π)`.
    ///
    /// Conjugate phases produce identical symmetric box values, so the upper
    /// half range loses nothing. Angles indistinguishable from `0` or `π`
    /// are rejected because `sin θ` would vanish.
    pub fn phase(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::PI {
            return Err(Error::InvalidDeformation(format!(
                "phase angle must lie strictly inside (0, pi), got {theta}"
            )));
        }
        if theta.sin().abs() < 1e-14 {
            return Err(Error::RootOfUnity { n: 1 });
        }
        Ok(Deformation {
            kind: DeformationKind::PhaseQ,
            value: Complex64::from_polar(1.0, theta),
            phase_angle: theta,
        })
    }

    pub fn kind(&self) -> DeformationKind {
        self.kind
    }

    /// The complex parameter `q` itself.
    pub fn q(&self) -> Complex64 {
        self.value
    }

    /// Phase angle θ in radians (meaningful for `PhaseQ` only).
    pub fn phase_angle(&self) -> f64 {
        self.phase_angle
    }

    /// Fails with the offending level if `sin(nθ)` vanishes for some
    /// `1 <= n <= n_max`, i.e. the phase is a root of unity below the
    /// requested truncation order. Non-phase deformations always pass.
    pub fn ensure_no_root_of_unity(&self, n_max: usize) -> Result<()> {
        if self.kind != DeformationKind::PhaseQ {
            return Ok(());
        }
        for n in 1..=n_max {
            if (n as f64 * self.phase_angle).sin().abs() < BOX_ZERO_TOL {
                return Err(Error::RootOfUnity { n });
            }
        }
        Ok(())
    }
}

/// Spectrum families producing the `box(n)` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Linear,
    ArikCoon,
    Symmetric,
    Fibonacci,
}

/// A spectrum family paired with its deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSequence {
    kind: SequenceKind,
    deformation: Deformation,
}

impl SpectrumSequence {
    /// Pairs a family with a deformation, rejecting meaningless combinations.
    pub fn new(kind: SequenceKind, deformation: Deformation) -> Result<Self> {
        if kind == SequenceKind::Fibonacci && deformation.kind() != DeformationKind::Classical {
            return Err(Error::InvalidDeformation(
                "the Fibonacci sequence carries no deformation".into(),
            ));
        }
        Ok(SpectrumSequence { kind, deformation })
    }

    pub fn linear(deformation: Deformation) -> Self {
        SpectrumSequence {
            kind: SequenceKind::Linear,
            deformation,
        }
    }

    pub fn arik_coon(deformation: Deformation) -> Result<Self> {
        Self::new(SequenceKind::ArikCoon, deformation)
    }

    pub fn symmetric(deformation: Deformation) -> Result<Self> {
        Self::new(SequenceKind::Symmetric, deformation)
    }

    pub fn fibonacci() -> Self {
        SpectrumSequence {
            kind: SequenceKind::Fibonacci,
            deformation: Deformation::classical(),
        }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn deformation(&self) -> &Deformation {
        &self.deformation
    }

    /// The box value `[n]` as a real number.
    ///
    /// For the phase-symmetric pair this is `sin(nθ)/sin(θ)` evaluated in
    /// real arithmetic; the classical kind returns the `q -> 1` limit
    /// directly instead of dividing a removable singularity. Combinations
    /// whose values are genuinely complex (phase + Arik-Coon) are rejected.
    pub fn box_value(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        match (self.kind, self.deformation.kind()) {
            (SequenceKind::Linear, _) => Ok(nf),
            (SequenceKind::Fibonacci, _) => Ok(fibonacci(n)),
            (SequenceKind::ArikCoon, DeformationKind::Classical) => Ok(nf),
            (SequenceKind::ArikCoon, DeformationKind::RealQ) => {
                let q = self.deformation.q().re;
                // (1 - q^n)/(1 - q); both signs of ln q are safe here.
                Ok((1.0 - q.powi(n as i32)) / (1.0 - q))
            }
            (SequenceKind::ArikCoon, DeformationKind::PhaseQ) => Err(Error::NonRealValue(
                "Arik-Coon box values are complex for a phase deformation".into(),
            )),
            (SequenceKind::Symmetric, DeformationKind::Classical) => Ok(nf),
            (SequenceKind::Symmetric, DeformationKind::RealQ) => {
                let log_q = self.deformation.q().re.ln();
                Ok((nf * log_q).sinh() / log_q.sinh())
            }
            (SequenceKind::Symmetric, DeformationKind::PhaseQ) => {
                let theta = self.deformation.phase_angle();
                Ok((nf * theta).sin() / theta.sin())
            }
        }
    }

    /// True when box values are monotone non-decreasing in `n`, which holds
    /// for every family except the phase-symmetric one (a sine arch).
    fn monotone_boxes(&self) -> bool {
        !(self.kind == SequenceKind::Symmetric
            && self.deformation.kind() == DeformationKind::PhaseQ)
    }
}

fn fibonacci(n: usize) -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    for _ in 0..n {
        let next = a + b;
        a = b;
        b = next;
    }
    a
}

/// Deformed factorials `[n]!` up to a truncation order, kept in both linear
/// and log form so ratios stay usable after the linear values saturate.
#[derive(Debug, Clone)]
pub struct QFactorialTable {
    n_max: usize,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

/// Builds the factorial table `values[n] = [n]!` for `0 <= n <= n_max`.
///
/// Enforces the positivity gate: every `box(n)` in range must be strictly
/// positive, otherwise the ladder square roots downstream would leave the
/// reals. The error names the first offending level; for a phase `θ` this
/// triggers as soon as `n_max >= π/θ`.
pub fn q_factorial(sequence: &SpectrumSequence, n_max: usize) -> Result<QFactorialTable> {
    let mut values = Vec::with_capacity(n_max + 1);
    let mut log_values = Vec::with_capacity(n_max + 1);
    values.push(1.0);
    log_values.push(0.0);
    for n in 1..=n_max {
        let b = sequence.box_value(n)?;
        if b <= BOX_ZERO_TOL {
            return Err(Error::PositivityViolation { n, value: b });
        }
        values.push(values[n - 1] * b);
        log_values.push(log_values[n - 1] + b.ln());
    }
    Ok(QFactorialTable {
        n_max,
        values,
        log_values,
    })
}

impl QFactorialTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `[n]!` in linear form. May saturate to infinity for fast-growing
    /// spectra; `log_value` stays finite.
    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// `ln [n]!`.
    pub fn log_value(&self, n: usize) -> f64 {
        self.log_values[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }
}

/// Outcome of an adaptive series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesEval {
    /// Value of the truncated sum.
    pub value: Complex64,
    /// Highest order included in the sum.
    pub order: usize,
    /// Rigorous bound on the absolute value of the neglected tail.
    /// Zero when the spectrum terminated and the sum is exact.
    pub tail_bound: f64,
    /// True when a vanishing box value closed the spectrum.
    pub terminated: bool,
}

/// Deformed exponential `exp_q(x) = Σ_n x^n / [n]!` with value, truncation
/// order, and tail bound reported.
///
/// Truncation policy: for monotone spectra the sum stops once the next box
/// exceeds `2|x|` and the doubled first neglected term falls below
/// `tolerance` (the remaining terms are then dominated by a geometric
/// series of ratio ≤ 1/2). A phase-symmetric spectrum is summed across its
/// entire positivity window: the window is finite, and when `sin(nθ)`
/// vanishes at the window edge the series terminates exactly. A negative
/// box before termination means the spectrum itself is broken and is
/// reported as a positivity violation.
pub fn exp_q_eval(
    sequence: &SpectrumSequence,
    x: Complex64,
    tolerance: f64,
) -> Result<SeriesEval> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let abs_x = x.norm();
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let monotone = sequence.monotone_boxes();
    for n in 1..=MAX_SERIES_ORDER {
        let b = sequence.box_value(n)?;
        if b.abs() <= BOX_ZERO_TOL {
            // Spectrum closed: every later term carries a vanishing
            // factorial in its denominator, but the state space itself ends
            // here, so the finite sum is the exact object.
            return Ok(SeriesEval {
                value: sum,
                order: n - 1,
                tail_bound: 0.0,
                terminated: true,
            });
        }
        if b < 0.0 {
            return Err(Error::PositivityViolation { n, value: b });
        }
        term *= x / b;
        sum += term;
        if monotone {
            let b_next = sequence.box_value(n + 1)?;
            if b_next > 2.0 * abs_x {
                let tail = 2.0 * term.norm() * abs_x / b_next;
                if tail < tolerance {
                    return Ok(SeriesEval {
                        value: sum,
                        order: n,
                        tail_bound: tail,
                        terminated: false,
                    });
                }
            }
        }
    }
    Err(Error::NoConvergence {
        max_order: MAX_SERIES_ORDER,
        tail: term.norm(),
    })
}

/// Deformed exponential, value only. See [`exp_q_eval`].
pub fn exp_q(sequence: &SpectrumSequence, x: Complex64, tolerance: f64) -> Result<Complex64> {
    exp_q_eval(sequence, x, tolerance).map(|e| e.value)
}

/// Reciprocal deformed exponential `1 / exp_q(x)`.
///
/// This is the meaning of every `exp_q` of a negated argument in the state
/// constructions: the deformed exponential is not additive, so the
/// reciprocal is never the series evaluated at `-x`.
pub fn exp_q_reciprocal(
    sequence: &SpectrumSequence,
    x: Complex64,
    tolerance: f64,
) -> Result<Complex64> {
    let value = exp_q(sequence, x, tolerance)?;
    let magnitude = value.norm();
    if magnitude <= tolerance {
        return Err(Error::DivisionByZero { magnitude });
    }
    Ok(value.inv())
}
