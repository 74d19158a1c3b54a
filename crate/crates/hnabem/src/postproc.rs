//! Boundary-solution reconstruction, near- and far-field evaluation, the
//! Babinet aperture correspondence, and the error metrics used by the
//! convergence studies.
//!
//! The solved density is `v_p(s) = Psi(s) + sum_n a_n phi_n(s)`; the
//! scattered field is `u_p^s = -S v_p` and the far-field pattern is
//! `u_p^inf(theta) = -int_Gamma exp(-i k s cos theta) v_p(s) ds`, whose
//! modulus is bounded by the L1 norm of `v_p`.

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::IncidentWave;
use crate::hna_space::{HnaSpace, WaveDirection};
use crate::osciquad::{integrate, GeneralOscIntegral, OsciQuadError, QuadParams};
use crate::specfun::{
    gauss_rule, hankel_h0_scaled, legendre_normalized_complex, RuleKind, SpecFunError,
};

#[derive(Debug, Error)]
pub enum PostprocError {
    #[error("point s = {0} is not on the screen")]
    OffScreen(f64),
    #[error("field point ({0}, {1}) lies on the screen closure")]
    OnScreen(f64, f64),
    #[error("Babinet correspondence needs d2 < 0 (got grazing incidence)")]
    BabinetGrazing,
    #[error("reference solution has zero norm")]
    ZeroReference,
    #[error("solutions live on different screens")]
    ScreenMismatch,
    #[error(transparent)]
    Quad(#[from] OsciQuadError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// A solved boundary density `v_p = Psi + sum a_n phi_n`.
#[derive(Debug, Clone)]
pub struct BoundarySolution {
    pub space: HnaSpace,
    pub incident: IncidentWave,
    pub coefficients: DVector<Complex64>,
}

/// A sentinel "singularity at minus infinity" for integrals with an entire
/// prefactor; it keeps the four-case classifier on the non-singular branches
/// (plain Gauss or pure steepest descent).
const NO_SINGULARITY: f64 = -1e6;

impl BoundarySolution {
    pub fn new(
        space: HnaSpace,
        incident: IncidentWave,
        coefficients: DVector<Complex64>,
    ) -> Self {
        assert_eq!(space.basis.len(), coefficients.len());
        BoundarySolution {
            space,
            incident,
            coefficients,
        }
    }

    /// `v_p(s)`; `s` must lie inside one of the screen's open intervals.
    pub fn eval_boundary(&self, s: f64) -> Result<Complex64, PostprocError> {
        if !self.space.screen.contains(s) {
            return Err(PostprocError::OffScreen(s));
        }
        Ok(self.eval_unchecked(s))
    }

    /// `v_p(s)` without the domain check (quadrature may touch endpoints).
    fn eval_unchecked(&self, s: f64) -> Complex64 {
        let mut v = self.incident.eval_psi(s);
        for (n, basis) in self.space.basis.iter().enumerate() {
            if basis.a <= s && s <= basis.b {
                v += self.coefficients[n] * basis.eval(self.space.k, s);
            }
        }
        v
    }

    /// The non-oscillatory amplitude `v_{j,p}^{+-}(s)`: the coefficient sum
    /// of the chosen direction's mesh on segment `j`, i.e. the factor
    /// multiplying `exp(+-iks)` in `v_p - Psi` there. Zero outside segment
    /// `j`.
    pub fn extract_amplitude(&self, j: usize, direction: WaveDirection, s: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for (n, basis) in self.space.basis.iter().enumerate() {
            if basis.segment == j && basis.direction == direction {
                v += self.coefficients[n] * basis.eval_amplitude(s);
            }
        }
        v
    }

    /// Piecewise-smoothness breakpoints of `v_p` on segment `j`: the union
    /// of both meshes' points.
    fn breakpoints(&self, j: usize) -> Vec<f64> {
        let [plus, minus] = &self.space.meshes[j];
        let mut pts: Vec<f64> = plus
            .points
            .iter()
            .chain(minus.points.iter())
            .copied()
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Composite 20-point Gauss nodes and weights over all segments, with
    /// every smoothness piece split so no panel exceeds `max_len`.
    fn quadrature_grid(&self, max_len: f64) -> Result<Vec<(f64, f64)>, PostprocError> {
        let rule = gauss_rule(RuleKind::Legendre, 20)?;
        let mut grid = Vec::new();
        for j in 0..self.space.screen.segment_count() {
            let bps = self.breakpoints(j);
            for pair in bps.windows(2) {
                let (c, d) = (pair[0], pair[1]);
                let m = ((d - c) / max_len).ceil().max(1.0) as usize;
                let h = (d - c) / m as f64;
                for i in 0..m {
                    let lo = c + h * i as f64;
                    for (&x, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
                        grid.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
                    }
                }
            }
        }
        Ok(grid)
    }

    /// `||v_p||_{L1(Gamma)}` on the mesh refined to at most one wavelength
    /// per panel.
    pub fn l1_norm(&self) -> Result<f64, PostprocError> {
        let grid = self.quadrature_grid(2.0 * std::f64::consts::PI / self.space.k)?;
        Ok(grid
            .iter()
            .map(|&(s, w)| w * self.eval_unchecked(s).norm())
            .sum())
    }

    /// Far-field pattern `u_p^inf(theta) = -int exp(-i k s cos theta)
    /// v_p(s) ds`, each term evaluated by the four-case quadrature (the
    /// physical-optics term by its closed form).
    pub fn far_field(&self, theta: f64, params: &QuadParams) -> Result<Complex64, PostprocError> {
        let k = self.space.k;
        let cos = theta.cos();
        let mut total = self.psi_far_field(theta);
        for (n, basis) in self.space.basis.iter().enumerate() {
            let coeff = self.coefficients[n];
            if coeff.norm() == 0.0 {
                continue;
            }
            // -a_n int_a^b L(s) exp(i k (sign - cos theta) s) ds; reverse
            // the interval when the phase coefficient is negative so the
            // canonical form's alpha stays nonnegative.
            let (a, b, q) = (basis.a, basis.b, basis.degree);
            let beta = basis.direction.sign() - cos;
            let (alpha, anchor, flip) = if beta >= 0.0 {
                (beta, a, 1.0)
            } else {
                (-beta, b, -1.0)
            };
            let constant = -coeff * Complex64::from_polar(1.0, k * beta * anchor);
            let integral = GeneralOscIntegral {
                prefactor: move |t: Complex64| {
                    Ok(constant * legendre_normalized_complex(q, a, b, anchor + flip * t))
                },
                k,
                t_len: b - a,
                alpha,
                t0: NO_SINGULARITY,
                has_log_singularity: false,
                polynomial_growth: true,
            };
            total += integrate(&integral, params)?;
        }
        Ok(total)
    }

    /// The physical-optics contribution to the far field, in closed form:
    /// `2 i k |d2| sum_j (exp(i k beta s_{2j}) - exp(i k beta s_{2j-1})) /
    /// (i k beta)` with `beta = d1 - cos theta` (segment lengths at
    /// `beta = 0`).
    pub fn psi_far_field(&self, theta: f64) -> Complex64 {
        let k = self.space.k;
        let d = self.incident.d;
        let amp = 2.0 * Complex64::i() * k * d.1.abs();
        let beta = d.0 - theta.cos();
        let mut total = Complex64::new(0.0, 0.0);
        for &(lo, hi) in self.space.screen.endpoints() {
            // Phase-extracted segment integral, exact also as beta -> 0:
            // int_lo^hi exp(i k beta s) ds
            //   = (hi - lo) exp(i k beta (lo+hi)/2) sinc(k beta (hi-lo)/2).
            let half = 0.5 * k * beta * (hi - lo);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            total += (hi - lo)
                * Complex64::from_polar(1.0, 0.5 * k * beta * (lo + hi))
                * sinc;
        }
        amp * total
    }

    /// Scattered field `u_p^s(x) = -int Phi(x, y) v_p(y) ds(y)` with
    /// `Phi = (i/4) H0^(1)(k |x - y|)`, by composite Gauss panels no longer
    /// than half a wavelength, graded dyadically toward the projection of
    /// `x` onto the screen line until each panel is shorter than its
    /// distance to `x`.
    pub fn near_field(&self, x: [f64; 2]) -> Result<Complex64, PostprocError> {
        let k = self.space.k;
        // Reject points on (or numerically on) the screen closure.
        if x[1].abs() < 1e-12 && self.space.screen.endpoints().iter().any(|&(lo, hi)| {
            x[0] >= lo - 1e-12 && x[0] <= hi + 1e-12
        }) {
            return Err(PostprocError::OnScreen(x[0], x[1]));
        }
        let rule = gauss_rule(RuleKind::Legendre, 20)?;
        let max_len = std::f64::consts::PI / k;
        let dist = |c: f64, d: f64| -> f64 {
            // Distance from x to the panel [c, d] on the line x2 = 0.
            let px = x[0].clamp(c, d);
            ((x[0] - px).powi(2) + x[1] * x[1]).sqrt()
        };
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..self.space.screen.segment_count() {
            let bps = self.breakpoints(j);
            let mut stack: Vec<(f64, f64)> = bps.windows(2).map(|p| (p[0], p[1])).collect();
            while let Some((c, d)) = stack.pop() {
                let len = d - c;
                if len > max_len || len > dist(c, d) {
                    let mid = 0.5 * (c + d);
                    stack.push((c, mid));
                    stack.push((mid, d));
                    continue;
                }
                for (&t, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
                    let s = c + 0.5 * len * (t + 1.0);
                    let r = ((x[0] - s).powi(2) + x[1] * x[1]).sqrt();
                    let phi = 0.25
                        * Complex64::i()
                        * hankel_h0_scaled(Complex64::new(k * r, 0.0))?
                        * Complex64::from_polar(1.0, k * r);
                    total -= 0.5 * len * w * phi * self.eval_unchecked(s);
                }
            }
        }
        Ok(total)
    }

    /// Total field `u_p(x) = u^i(x) + u_p^s(x)`.
    pub fn total_field(&self, x: [f64; 2]) -> Result<Complex64, PostprocError> {
        Ok(self.incident.eval_incident(x) + self.near_field(x)?)
    }
}

/// The Babinet correspondence: given the *total* field `u` of the screen
/// problem at `x`, the complementary aperture problem's field is
/// `u' = u^r + u` in the upper half-plane and `u' = u^i - u` in the lower,
/// where `u^r` is the plane wave with reflected direction `(d1, -d2)`.
pub fn babinet_aperture(
    u: Complex64,
    x: [f64; 2],
    incident: &IncidentWave,
) -> Result<Complex64, PostprocError> {
    if incident.d.1 >= 0.0 {
        return Err(PostprocError::BabinetGrazing);
    }
    let k = incident.k;
    if x[1] > 0.0 {
        let ur = Complex64::from_polar(1.0, k * (x[0] * incident.d.0 - x[1] * incident.d.1));
        Ok(ur + u)
    } else {
        Ok(incident.eval_incident(x) - u)
    }
}

/// Merged quadrature grid of two solutions on the same screen: the union of
/// all four meshes' points, refined so no panel exceeds one wavelength, with
/// 20 Gauss points per panel.
fn merged_grid(
    sol: &BoundarySolution,
    reference: &BoundarySolution,
) -> Result<Vec<(f64, f64)>, PostprocError> {
    if sol.space.screen != reference.space.screen {
        return Err(PostprocError::ScreenMismatch);
    }
    let k = sol.space.k.max(reference.space.k);
    let max_len = 2.0 * std::f64::consts::PI / k;
    let rule = gauss_rule(RuleKind::Legendre, 20)?;
    let mut grid = Vec::new();
    for j in 0..sol.space.screen.segment_count() {
        let mut bps = sol.breakpoints(j);
        bps.extend(reference.breakpoints(j));
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        for pair in bps.windows(2) {
            let (c, d) = (pair[0], pair[1]);
            if d - c <= 0.0 {
                continue;
            }
            let m = ((d - c) / max_len).ceil().max(1.0) as usize;
            let h = (d - c) / m as f64;
            for i in 0..m {
                let lo = c + h * i as f64;
                for (&x, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
                    grid.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
                }
            }
        }
    }
    Ok(grid)
}

/// Relative L1 boundary error `||v_p - v_ref||_{L1} / ||v_ref||_{L1}`.
pub fn rel_l1_error(
    sol: &BoundarySolution,
    reference: &BoundarySolution,
) -> Result<f64, PostprocError> {
    let grid = merged_grid(sol, reference)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(s, w) in &grid {
        let r = reference.eval_unchecked(s);
        num += w * (sol.eval_unchecked(s) - r).norm();
        den += w * r.norm();
    }
    if den == 0.0 {
        return Err(PostprocError::ZeroReference);
    }
    Ok(num / den)
}

/// Relative near-field L-infinity error on the circle of radius 1 centred at
/// `(0.5, 0)`, sampled at `samples` angles.
pub fn near_field_linf_error(
    sol: &BoundarySolution,
    reference: &BoundarySolution,
    samples: usize,
) -> Result<f64, PostprocError> {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..samples {
        let t = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / samples as f64;
        let x = [0.5 + t.cos(), t.sin()];
        let r = reference.near_field(x)?;
        num = num.max((sol.near_field(x)? - r).norm());
        den = den.max(r.norm());
    }
    if den == 0.0 {
        return Err(PostprocError::ZeroReference);
    }
    Ok(num / den)
}

/// Relative far-field L-infinity error on a uniform theta grid.
pub fn far_field_linf_error(
    sol: &BoundarySolution,
    reference: &BoundarySolution,
    samples: usize,
    params: &QuadParams,
) -> Result<f64, PostprocError> {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let r = reference.far_field(theta, params)?;
        num = num.max((sol.far_field(theta, params)? - r).norm());
        den = den.max(r.norm());
    }
    if den == 0.0 {
        return Err(PostprocError::ZeroReference);
    }
    Ok(num / den)
}

/// The large-`r` asymptotic of the scattered field,
/// `u^inf(theta) exp(i (k r + pi/4)) / (2 sqrt(2 pi k r))`, used for
/// near/far consistency checks.
pub fn far_field_asymptotic(
    sol: &BoundarySolution,
    x: [f64; 2],
    params: &QuadParams,
) -> Result<Complex64, PostprocError> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let theta = x[1].atan2(x[0]).rem_euclid(2.0 * std::f64::consts::PI);
    let k = sol.space.k;
    let u_inf = sol.far_field(theta, params)?;
    Ok(u_inf * Complex64::from_polar(1.0, k * r + std::f64::consts::FRAC_PI_4)
        / (2.0 * (2.0 * std::f64::consts::PI * k * r).sqrt()))
}
