//! The hybrid numerical-asymptotic approximation space `V_N`.
//!
//! On every screen segment two overlapping geometrically graded meshes carry
//! piecewise polynomials multiplied by the oscillatory factors `exp(+iks)`
//! and `exp(-iks)`; the polynomial amplitudes are the non-oscillatory
//! unknowns. The `exp(+iks)` mesh is graded toward the segment's *left*
//! endpoint (where the `+` diffracted amplitude is singular) and the
//! `exp(-iks)` mesh toward the right endpoint. Basis functions are
//! L2-normalized Legendre polynomials on single elements times the wave
//! factor.

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Screen;
use crate::specfun::legendre_normalized;

#[derive(Debug, Error)]
pub enum HnaSpaceError {
    #[error("grading parameter must satisfy 0 < sigma < 1/2, got {0}")]
    BadSigma(f64),
    #[error("layer count must be >= 1, got {0}")]
    BadLayers(usize),
    #[error("wavenumber must be positive, got {0}")]
    BadWavenumber(f64),
    #[error("basis index {index} out of range (N = {n})")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Reference graded mesh on `[0, 1]`: `x_0 = 0`, `x_i = sigma^(l-i)` for
/// `i = 1..l`. Strictly increasing with ratio `x_i / x_{i+1} = sigma`.
pub fn graded_mesh(sigma: f64, l: usize) -> Result<Vec<f64>, HnaSpaceError> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(HnaSpaceError::BadSigma(sigma));
    }
    if l < 1 {
        return Err(HnaSpaceError::BadLayers(l));
    }
    let mut points = Vec::with_capacity(l + 1);
    points.push(0.0);
    for i in 1..=l {
        points.push(sigma.powi((l - i) as i32));
    }
    Ok(points)
}

/// Degree vector for maximum degree `p` over `l` layers:
/// `(p)_i = p - floor((l+1-i) p / l)` for `i < l`, and `(p)_l = p`.
/// Nondecreasing, so the largest element carries the full degree.
pub fn degree_vector(p: usize, l: usize) -> Vec<usize> {
    (1..=l)
        .map(|i| {
            if i == l {
                p
            } else {
                p - (l + 1 - i) * p / l
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveDirection {
    /// Factor `exp(+iks)`, mesh graded toward the segment's left endpoint.
    Plus,
    /// Factor `exp(-iks)`, mesh graded toward the right endpoint.
    Minus,
}

impl WaveDirection {
    pub fn sign(self) -> f64 {
        match self {
            WaveDirection::Plus => 1.0,
            WaveDirection::Minus => -1.0,
        }
    }
}

/// One basis function: an L2-normalized Legendre polynomial of the given
/// degree on the support element `[a, b]`, times `exp(+-iks)`.
#[derive(Debug, Clone, Copy)]
pub struct BasisFunction {
    pub segment: usize,
    pub direction: WaveDirection,
    pub a: f64,
    pub b: f64,
    pub degree: usize,
}

impl BasisFunction {
    /// Value at `s` (zero outside the support element).
    pub fn eval(&self, k: f64, s: f64) -> Complex64 {
        if s < self.a || s > self.b {
            return Complex64::new(0.0, 0.0);
        }
        legendre_normalized(self.degree, self.a, self.b, s)
            * Complex64::from_polar(1.0, self.direction.sign() * k * s)
    }

    /// The non-oscillatory polynomial factor alone (without `exp(+-iks)`),
    /// zero outside the support element.
    pub fn eval_amplitude(&self, s: f64) -> f64 {
        if s < self.a || s > self.b {
            return 0.0;
        }
        legendre_normalized(self.degree, self.a, self.b, s)
    }
}

/// Mesh points of one direction on one segment, ascending.
#[derive(Debug, Clone)]
pub struct SegmentMesh {
    pub direction: WaveDirection,
    pub points: Vec<f64>,
    /// Degree of the element `[points[i], points[i+1]]`.
    pub degrees: Vec<usize>,
}

/// The assembled approximation space.
#[derive(Debug, Clone)]
pub struct HnaSpace {
    pub screen: Screen,
    pub k: f64,
    pub p: usize,
    pub sigma: f64,
    pub l: usize,
    /// Ordered basis: segments ascending, `+` before `-`, elements
    /// smallest-to-largest, degree ascending. The order is part of the
    /// contract (deterministic assembly and reproducible SVD inputs).
    pub basis: Vec<BasisFunction>,
    /// Per segment, the `+` and `-` meshes (in that order).
    pub meshes: Vec<[SegmentMesh; 2]>,
}

/// Default layer count `l = 2 (p + 1)`.
pub fn default_layers(p: usize) -> usize {
    2 * (p + 1)
}

/// Builds `V_N` on the given screen.
pub fn build_space(
    screen: &Screen,
    k: f64,
    p: usize,
    sigma: f64,
    l: usize,
) -> Result<HnaSpace, HnaSpaceError> {
    if !(k > 0.0) {
        return Err(HnaSpaceError::BadWavenumber(k));
    }
    let reference = graded_mesh(sigma, l)?;
    let degrees = degree_vector(p, l);

    let mut basis = Vec::new();
    let mut meshes = Vec::new();
    for (j, &(lo, hi)) in screen.endpoints().iter().enumerate() {
        let len = hi - lo;
        // `+` mesh: graded toward lo; ascending elements are
        // smallest-to-largest, so the reference degree vector applies
        // directly and the largest element (index l) carries degree p.
        let plus_points: Vec<f64> = reference.iter().map(|&x| lo + len * x).collect();
        // `-` mesh: mirror image, graded toward hi; ascending elements run
        // largest-to-smallest, so the degree vector is reversed.
        let minus_points: Vec<f64> = reference.iter().rev().map(|&x| hi - len * x).collect();
        let minus_degrees: Vec<usize> = degrees.iter().rev().copied().collect();

        for i in 0..l {
            let (a, b) = (plus_points[i], plus_points[i + 1]);
            for q in 0..=degrees[i] {
                basis.push(BasisFunction {
                    segment: j,
                    direction: WaveDirection::Plus,
                    a,
                    b,
                    degree: q,
                });
            }
        }
        // Elements smallest-to-largest for the `-` mesh means right-to-left.
        for i in (0..l).rev() {
            let (a, b) = (minus_points[i], minus_points[i + 1]);
            for q in 0..=minus_degrees[i] {
                basis.push(BasisFunction {
                    segment: j,
                    direction: WaveDirection::Minus,
                    a,
                    b,
                    degree: q,
                });
            }
        }
        meshes.push([
            SegmentMesh {
                direction: WaveDirection::Plus,
                points: plus_points,
                degrees: degrees.clone(),
            },
            SegmentMesh {
                direction: WaveDirection::Minus,
                points: minus_points,
                degrees: minus_degrees,
            },
        ]);
    }
    Ok(HnaSpace {
        screen: screen.clone(),
        k,
        p,
        sigma,
        l,
        basis,
        meshes,
    })
}

impl HnaSpace {
    /// Dimension `N = 2 N_Gamma sum_i [(p)_i + 1]`.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Value of the `n`th basis function (0-based) at `s`.
    pub fn eval_basis(&self, n: usize, s: f64) -> Result<Complex64, HnaSpaceError> {
        self.basis
            .get(n)
            .map(|b| b.eval(self.k, s))
            .ok_or(HnaSpaceError::IndexOutOfRange {
                index: n,
                n: self.basis.len(),
            })
    }

    /// Text table `segment direction element_lo element_hi degree`, one row
    /// per basis function, for test introspection.
    pub fn summary(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for b in &self.basis {
            let dir = match b.direction {
                WaveDirection::Plus => '+',
                WaveDirection::Minus => '-',
            };
            writeln!(
                out,
                "{} {} {:.16e} {:.16e} {}",
                b.segment, dir, b.a, b.b, b.degree
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cantor_prefractal;

    #[test]
    fn graded_mesh_examples() {
        let m = graded_mesh(0.15, 2).unwrap();
        assert_eq!(m, vec![0.0, 0.15, 1.0]);
        let m = graded_mesh(0.15, 3).unwrap();
        assert!((m[1] - 0.0225).abs() < 1e-16);
        assert_eq!(&m[2..], &[0.15, 1.0]);
        assert_eq!(graded_mesh(0.15, 1).unwrap(), vec![0.0, 1.0]);
        assert!(graded_mesh(0.5, 2).is_err());
        assert!(graded_mesh(0.0, 2).is_err());
        assert!(graded_mesh(0.15, 0).is_err());
        // Ratio invariant.
        let m = graded_mesh(0.21, 7).unwrap();
        for i in 1..6 {
            assert!((m[i] / m[i + 1] - 0.21).abs() < 1e-14);
        }
    }

    #[test]
    fn degree_vector_examples() {
        assert_eq!(degree_vector(2, 4), vec![0, 1, 1, 2]);
        assert_eq!(degree_vector(3, 2), vec![0, 3]);
        assert_eq!(degree_vector(0, 5), vec![0, 0, 0, 0, 0]);
        for p in 0..=8 {
            let l = default_layers(p);
            let d = degree_vector(p, l);
            assert_eq!(*d.last().unwrap(), p);
            assert!(d.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn dimension_formula() {
        for n_gamma_level in [0u32, 1, 2] {
            let screen = cantor_prefractal(n_gamma_level);
            for p in 0..=8usize {
                let l = default_layers(p);
                let space = build_space(&screen, 64.0, p, 0.15, l).unwrap();
                let per_layer: usize = degree_vector(p, l).iter().map(|&q| q + 1).sum();
                let want = 2 * screen.segment_count() * per_layer;
                assert_eq!(space.dimension(), want, "level {n_gamma_level}, p = {p}");
            }
        }
        // Explicit examples.
        let unit = cantor_prefractal(0);
        let s = build_space(&unit, 64.0, 1, 0.15, 4).unwrap();
        assert_eq!(s.dimension(), 14);
        let s = build_space(&unit, 64.0, 0, 0.15, 2).unwrap();
        assert_eq!(s.dimension(), 4);
    }

    #[test]
    fn mesh_overlap_and_grading() {
        let screen = cantor_prefractal(1);
        let (sigma, l) = (0.15, 6);
        let space = build_space(&screen, 128.0, 2, sigma, l).unwrap();
        for (j, &(lo, hi)) in screen.endpoints().iter().enumerate() {
            let len = hi - lo;
            let [plus, minus] = &space.meshes[j];
            // Two largest elements intersect in an interval of length
            // L (1 - 2 sigma): [lo + sigma L, hi - sigma L].
            let plus_largest = (plus.points[l - 1], plus.points[l]);
            let minus_largest = (minus.points[0], minus.points[1]);
            let inter_lo = plus_largest.0.max(minus_largest.0);
            let inter_hi = plus_largest.1.min(minus_largest.1);
            assert!((inter_hi - inter_lo - len * (1.0 - 2.0 * sigma)).abs() < 1e-14);
            // Smallest elements have length L sigma^(l-1) and touch the
            // grading endpoint.
            let smallest_plus = plus.points[1] - plus.points[0];
            assert!((smallest_plus - len * sigma.powi((l - 1) as i32)).abs() < 1e-14);
            assert_eq!(plus.points[0], lo);
            let smallest_minus = minus.points[l] - minus.points[l - 1];
            assert!((smallest_minus - len * sigma.powi((l - 1) as i32)).abs() < 1e-14);
            assert_eq!(minus.points[l], hi);
            // Largest elements carry degree p.
            assert_eq!(*plus.degrees.last().unwrap(), 2);
            assert_eq!(minus.degrees[0], 2);
        }
    }

    #[test]
    fn basis_normalization_and_orthogonality() {
        let screen = cantor_prefractal(0);
        let p = 3;
        let space = build_space(&screen, 32.0, p, 0.15, default_layers(p)).unwrap();
        // Products of two basis amplitudes are polynomials of degree <= 2p,
        // so an interpolatory rule on 2p+1 nodes integrates them exactly.
        // The rule is built on the *representable* nodes s_j = fl(a + t_j L):
        // on elements of length ~1e-6 near s = 1, rounding s_j perturbs the
        // reference coordinate by ~1e-10, which would dominate a standard
        // Gauss sum; the offsets s_j - a are exact (Sterbenz), so weights
        // solved from the actual nodes restore full accuracy.
        let m = 2 * p + 1;
        let integrate = |f: &dyn Fn(f64) -> Complex64, a: f64, b: f64| {
            let len = b - a;
            let s: Vec<f64> = (0..m)
                .map(|j| {
                    let t = 0.5
                        * (1.0 - (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos());
                    a + t * len
                })
                .collect();
            let v: Vec<f64> = s.iter().map(|&sj| (sj - a) / len).collect();
            // Solve V^T w = moments for weights on [0,1] (m <= 7; Chebyshev
            // spacing keeps the Vandermonde well conditioned).
            let vmat = nalgebra::DMatrix::from_fn(m, m, |i, j| v[j].powi(i as i32));
            let mom = nalgebra::DVector::from_fn(m, |i, _| 1.0 / (i as f64 + 1.0));
            let w = vmat.lu().solve(&mom).unwrap();
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..m {
                sum += w[j] * f(s[j]);
            }
            len * sum
        };
        // ||phi_n||^2 = 1 for all n.
        for (n, b) in space.basis.iter().enumerate() {
            let norm2 = integrate(
                &|s| {
                    let v = space.eval_basis(n, s).unwrap();
                    Complex64::new(v.norm_sqr(), 0.0)
                },
                b.a,
                b.b,
            );
            assert!((norm2.re - 1.0).abs() < 1e-12, "n = {n}");
            // Zero outside support.
            assert_eq!(b.eval(space.k, b.a - 1e-9), Complex64::new(0.0, 0.0));
        }
        // Same element, same direction, different degrees: orthogonal
        // (|exp(iks)|^2 = 1 cancels the oscillation).
        for (n1, b1) in space.basis.iter().enumerate() {
            for (n2, b2) in space.basis.iter().enumerate().skip(n1 + 1) {
                if b1.a == b2.a && b1.b == b2.b && b1.direction == b2.direction {
                    let ip = integrate(
                        &|s| {
                            space.eval_basis(n1, s).unwrap()
                                * space.eval_basis(n2, s).unwrap().conj()
                        },
                        b1.a,
                        b1.b,
                    );
                    assert!(ip.norm() < 1e-12, "n1 = {n1}, n2 = {n2}");
                }
            }
        }
        // Degree-0 magnitude is 1/sqrt(b-a) inside the element.
        let b0 = &space.basis[0];
        let mid = 0.5 * (b0.a + b0.b);
        assert!(
            (b0.eval(space.k, mid).norm() - 1.0 / (b0.b - b0.a).sqrt()).abs() < 1e-13
        );
    }
}
