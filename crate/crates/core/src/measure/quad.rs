//! Filon-type quadrature for damped Fourier integrals.
//!
//! Evaluates `∫ g(y) e^{-ixy} dy` for a smooth decaying `g` and arbitrary
//! frequency `x`. The smooth factor is interpolated by cubics on adaptively
//! refined panels; the oscillatory factor is integrated exactly against
//! each cubic, so panel refinement depends only on `g` and one panel set
//! serves every frequency.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Panel {
    a: f64,
    h: f64,
    /// Power-basis coefficients (in `s = (y - a)/h`) of the interpolating
    /// cubic through the four panel nodes.
    coeffs: [Complex64; 4],
}

/// Adaptive panel decomposition of `[a, b]` for one smooth integrand.
#[derive(Debug, Clone)]
pub(crate) struct PanelSet {
    panels: Vec<Panel>,
}

/// Cubic through `(s_i, g_i)` at `s = 0, 1/3, 2/3, 1`, in the power basis.
fn cubic_coeffs(g: &[Complex64; 4]) -> [Complex64; 4] {
    let c0 = g[0];
    let c1 = (-11.0 * g[0] + 18.0 * g[1] - 9.0 * g[2] + 2.0 * g[3]) / 2.0;
    let c2 = (18.0 * g[0] - 45.0 * g[1] + 36.0 * g[2] - 9.0 * g[3]) / 2.0;
    let c3 = (-9.0 * g[0] + 27.0 * g[1] - 27.0 * g[2] + 9.0 * g[3]) / 2.0;
    [c0, c1, c2, c3]
}

fn eval_cubic(c: &[Complex64; 4], s: f64) -> Complex64 {
    c[0] + s * (c[1] + s * (c[2] + s * c[3]))
}

/// Moments `J_k(w) = ∫_0^1 s^k e^{-iws} ds` for `k = 0..3`.
///
/// Small `|w|` uses the Taylor series (the recurrence divides by `iw`);
/// otherwise the integration-by-parts recurrence.
fn oscillatory_moments(w: f64) -> [Complex64; 4] {
    if w.abs() < 0.5 {
        let miw = Complex64::new(0.0, -w);
        let mut j = [Complex64::new(0.0, 0.0); 4];
        for (k, jk) in j.iter_mut().enumerate() {
            let mut pow = Complex64::new(1.0, 0.0);
            let mut fact = 1.0_f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..18 {
                if m > 0 {
                    pow *= miw;
                    fact *= m as f64;
                }
                acc += pow / (fact * (k + m + 1) as f64);
            }
            *jk = acc;
        }
        j
    } else {
        let iw = Complex64::new(0.0, w);
        let e = Complex64::new(0.0, -w).exp();
        let mut j = [Complex64::new(0.0, 0.0); 4];
        j[0] = (Complex64::new(1.0, 0.0) - e) / iw;
        for k in 1..4 {
            j[k] = (k as f64 * j[k - 1] - e) / iw;
        }
        j
    }
}

impl PanelSet {
    /// Builds panels so the cubic interpolation error of `g` stays below
    /// `tol_per_unit` everywhere (total integral error is then bounded by
    /// `tol_per_unit * (b - a)` for any frequency).
    pub(crate) fn build<F>(g: F, a: f64, b: f64, tol_per_unit: f64, max_panels: usize) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let initial = 32usize;
        let h0 = (b - a) / initial as f64;
        let mut queue: Vec<(f64, f64)> = (0..initial)
            .rev()
            .map(|i| (a + i as f64 * h0, h0))
            .collect();
        let mut panels = Vec::new();
        let mut work = 0usize;
        while let Some((pa, ph)) = queue.pop() {
            work += 1;
            if work > max_panels {
                return Err(Error::QuadratureFailure { budget: max_panels });
            }
            let nodes = [
                g(pa),
                g(pa + ph / 3.0),
                g(pa + 2.0 * ph / 3.0),
                g(pa + ph),
            ];
            let coeffs = cubic_coeffs(&nodes);
            let mut err = 0.0_f64;
            for s in [1.0 / 6.0, 0.5, 5.0 / 6.0] {
                err = err.max((eval_cubic(&coeffs, s) - g(pa + s * ph)).norm());
            }
            if err <= tol_per_unit || ph <= 1e-9 * (b - a) {
                panels.push(Panel { a: pa, h: ph, coeffs });
            } else {
                queue.push((pa + ph / 2.0, ph / 2.0));
                queue.push((pa, ph / 2.0));
            }
        }
        panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
        Ok(PanelSet { panels })
    }

    pub(crate) fn len(&self) -> usize {
        self.panels.len()
    }

    /// `∫ g(y) e^{-ixy} dy` over the panel range.
    pub(crate) fn fourier_integral(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &self.panels {
            let w = x * p.h;
            let j = oscillatory_moments(w);
            let mut panel = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                panel += p.coeffs[k] * j[k];
            }
            let carrier = Complex64::new(0.0, -x * p.a).exp();
            acc += carrier * panel * p.h;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let f = |s: f64| Complex64::new(2.0 - s + 3.0 * s * s - 0.5 * s * s * s, 0.5 * s * s);
        let nodes = [f(0.0), f(1.0 / 3.0), f(2.0 / 3.0), f(1.0)];
        let c = cubic_coeffs(&nodes);
        for s in [0.1, 0.35, 0.62, 0.99] {
            assert!((eval_cubic(&c, s) - f(s)).norm() < 1e-13);
        }
    }

    #[test]
    fn moments_match_series_and_recurrence_at_crossover() {
        // Both branches must agree near |w| = 0.5.
        for w in [0.49, 0.51, -0.49, -0.51] {
            let j_series = {
                let miw = Complex64::new(0.0, -w);
                let mut j = [Complex64::new(0.0, 0.0); 4];
                for (k, jk) in j.iter_mut().enumerate() {
                    let mut pow = Complex64::new(1.0, 0.0);
                    let mut fact = 1.0;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..25 {
                        if m > 0 {
                            pow *= miw;
                            fact *= m as f64;
                        }
                        acc += pow / (fact * (k + m + 1) as f64);
                    }
                    *jk = acc;
                }
                j
            };
            let j_impl = oscillatory_moments(w);
            for k in 0..4 {
                assert!((j_series[k] - j_impl[k]).norm() < 1e-13, "w={w} k={k}");
            }
        }
    }

    #[test]
    fn gaussian_fourier_transform_is_recovered() {
        // ∫ e^{-y^2/2} e^{-ixy} dy = sqrt(2 pi) e^{-x^2/2}.
        let g = |y: f64| Complex64::new((-0.5 * y * y).exp(), 0.0);
        let panels = PanelSet::build(g, -12.0, 12.0, 1e-12, 100_000).unwrap();
        let root = (2.0 * std::f64::consts::PI).sqrt();
        for x in [0.0, 0.7, 2.0, 5.5] {
            let got = panels.fourier_integral(x);
            assert_relative_eq!(got.re, root * (-0.5 * x * x).exp(), epsilon = 1e-9);
            assert!(got.im.abs() < 1e-10);
        }
    }

    #[test]
    fn refinement_budget_is_enforced() {
        let g = |y: f64| Complex64::new((y * 40.0).sin(), 0.0);
        match PanelSet::build(g, -10.0, 10.0, 1e-14, 40) {
            Err(Error::QuadratureFailure { budget }) => assert_eq!(budget, 40),
            other => panic!("expected QuadratureFailure, got {other:?}"),
        }
    }
}
