//! Numerical toolkit for generalized deformed harmonic oscillators and
//! their coherent states.
//!
//! The crate builds truncated Fock-space realizations of deformed
//! oscillator algebras defined by a spectrum sequence `box(n)` and a
//! deformation parameter `q` (classical, real, or a phase `e^{iθ}`),
//! constructs the eigenstates of the annihilation operator, and verifies
//! the three coherent-state conditions by explicit computation:
//!
//! 1. normalizability, via the deformed exponential and its reciprocal;
//! 2. label continuity, via the overlap identity;
//! 3. resolution of unity, via the power-moment problem for the radial
//!    weight, solved through a damped Fourier inversion of the moment
//!    transform and certified by quadrature of the recovered moments.
//!
//! Modules follow the pipeline: [`qalgebra`] (box functions, factorials,
//! deformed exponential), [`fock`] (operator matrices and algebra
//! residuals), [`coherent`] (states, overlaps, continuity), [`measure`]
//! (weight construction and moment certification), [`bargmann`] (analytic
//! symbols, reproducing kernel, overcompleteness).

pub mod bargmann;
pub mod coherent;
pub mod error;
pub mod fock;
pub mod measure;
pub mod qalgebra;

pub use error::{Error, Result};
pub use qalgebra::{Deformation, DeformationKind, SequenceKind, SpectrumSequence};
