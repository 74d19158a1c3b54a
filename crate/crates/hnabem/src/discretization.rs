//! Collocation-point placement, transformation of the boundary integrals to
//! canonical oscillatory form, and assembly of the weighted rectangular
//! system.
//!
//! Every entry of the system matrix is the single-layer potential of a basis
//! function evaluated at a collocation point,
//! `S phi_n(c_m) = int (i/4) H0^(1)(k |c_m - s|) phi_n(s) ds`.
//! Extracting the kernel's outgoing phase `exp(i k |c_m - s|)` and the basis
//! factor `exp(+-i k s)` reduces each entry to one or two canonical integrals
//! `int_0^T F(t) exp(i k alpha t) dt` with `alpha in {0, 2}` (or `1 +- d1`
//! for the physical-optics term) and a non-oscillatory, log-singular `F`,
//! evaluated by the fixed-budget four-case quadrature.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{IncidentWave, Screen};
use crate::hna_space::{BasisFunction, HnaSpace, WaveDirection};
use crate::osciquad::{integrate, BoxedPrefactor, GeneralOscIntegral, OsciQuadError, QuadParams};
use crate::specfun::{hankel_h0_scaled, legendre_normalized_complex};

#[derive(Debug, Error)]
pub enum DiscretizationError {
    #[error("oversampling parameter must be >= 1, got {0}")]
    BadOversampling(f64),
    #[error("quadrature failed for matrix entry ({m}, {n}): {source}")]
    Entry {
        m: usize,
        n: usize,
        source: OsciQuadError,
    },
    #[error("quadrature failed for right-hand side entry {m}: {source}")]
    Rhs {
        m: usize,
        source: OsciQuadError,
    },
}

/// Which element a collocation point was allocated to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementRef {
    /// Element index (0-based, ascending) of the `+` mesh, excluding its
    /// largest element.
    Plus(usize),
    /// Element index of the `-` mesh, excluding its largest element.
    Minus(usize),
    /// The intersection of the two largest elements, which receives a joint
    /// allocation (the points are attributed half to each mesh for counting).
    Merged,
}

#[derive(Debug, Clone, Copy)]
pub struct CollocPoint {
    /// Position on the screen line, strictly interior to its segment.
    pub s: f64,
    /// Density weight `w_m > 0`.
    pub weight: f64,
    pub segment: usize,
    pub element: ElementRef,
    /// Index within the element's ascending node list.
    pub local_index: usize,
}

/// The collocation points with density weights; `M >= C_OS N`, with equality
/// when `C_OS` is an integer.
#[derive(Debug, Clone)]
pub struct CollocationSet {
    pub points: Vec<CollocPoint>,
    pub c_os: f64,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// First-kind Chebyshev nodes `(a+b)/2 + (b-a)/2 cos(pi (l - 1/2) / m)`,
/// sorted ascending (the formula as printed yields them descending).
pub fn chebyshev_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes: Vec<f64> = (1..=m)
        .map(|l| mid + half * (std::f64::consts::PI * (l as f64 - 0.5) / m as f64).cos())
        .collect();
    nodes.reverse();
    nodes
}

/// Density weights for sorted nodes within `[a, b]`: each point gets half the
/// gap to each neighbor, with the end gaps to `a` and `b` assigned whole.
/// They telescope to `sum w = b - a`. A single point gets `w = b - a`.
pub fn collocation_weights(a: f64, b: f64, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    assert!(m > 0 && nodes.windows(2).all(|w| w[0] < w[1]));
    if m == 1 {
        return vec![b - a];
    }
    (0..m)
        .map(|l| {
            let left = if l == 0 {
                nodes[0] - a
            } else {
                0.5 * (nodes[l] - nodes[l - 1])
            };
            let right = if l == m - 1 {
                b - nodes[m - 1]
            } else {
                0.5 * (nodes[l + 1] - nodes[l])
            };
            left + right
        })
        .collect()
}

/// Allocates `ceil(C_OS (q + 1))` Chebyshev nodes per element, except the two
/// largest elements of each segment, which jointly receive
/// `2 ceil(C_OS (p + 1))` nodes on their intersection (separate allocations
/// there could place two points arbitrarily close together).
///
/// `C_OS = 1` (the square system) is accepted for instability studies;
/// values below 1 are rejected.
pub fn collocation_points(
    space: &HnaSpace,
    c_os: f64,
) -> Result<CollocationSet, DiscretizationError> {
    if !(c_os >= 1.0) || !c_os.is_finite() {
        return Err(DiscretizationError::BadOversampling(c_os));
    }
    let count = |q: usize| (c_os * (q as f64 + 1.0)).ceil() as usize;
    let l = space.l;
    let mut points = Vec::new();
    for (j, meshes) in space.meshes.iter().enumerate() {
        let [plus, minus] = meshes;
        let push =
            |a: f64, b: f64, m: usize, element: ElementRef, points: &mut Vec<CollocPoint>| {
                let nodes = chebyshev_nodes(a, b, m);
                let weights = collocation_weights(a, b, &nodes);
                for (i, (&s, &w)) in nodes.iter().zip(weights.iter()).enumerate() {
                    points.push(CollocPoint {
                        s,
                        weight: w,
                        segment: j,
                        element,
                        local_index: i,
                    });
                }
            };
        // `+` mesh, all but the largest element; covers [lo, lo + sigma L].
        for i in 0..l - 1 {
            push(
                plus.points[i],
                plus.points[i + 1],
                count(plus.degrees[i]),
                ElementRef::Plus(i),
                &mut points,
            );
        }
        // Joint allocation on the largest-element intersection
        // [lo + sigma L, hi - sigma L].
        push(
            plus.points[l - 1],
            minus.points[1],
            2 * count(space.p),
            ElementRef::Merged,
            &mut points,
        );
        // `-` mesh, all but the largest element; covers [hi - sigma L, hi].
        for i in 1..l {
            push(
                minus.points[i],
                minus.points[i + 1],
                count(minus.degrees[i]),
                ElementRef::Minus(i),
                &mut points,
            );
        }
    }
    Ok(CollocationSet { points, c_os })
}

/// One or two canonical integrals whose values sum to `S phi_n(c_m)`.
///
/// Case A (`c_m <= a`): translation `s = a + t`; Case B (`c_m >= b`):
/// reflection `s = b - t` (which lands back in Case A's form); Case C
/// (`a < c_m < b`): split at `c_m` into a Case-B piece on `[a, c_m]` and a
/// Case-A piece on `[c_m, b]`, each with `t0 = 0`.
pub fn transform_matrix_integral(
    basis: &BasisFunction,
    k: f64,
    c_m: f64,
) -> Vec<GeneralOscIntegral<BoxedPrefactor>> {
    let (a, b) = (basis.a, basis.b);
    if c_m <= a {
        vec![case_a(basis, k, c_m, a, b)]
    } else if c_m >= b {
        vec![case_b(basis, k, c_m, a, b)]
    } else {
        vec![case_b(basis, k, c_m, a, c_m), case_a(basis, k, c_m, c_m, b)]
    }
}

/// `int_u^v (i/4) H0(k (s - c_m)) phi(s) ds` with `c_m <= u`, as a canonical
/// integral via `s = u + t`: the combined phase is
/// `exp(i k (1 + sign) t) exp(i k (u + sign u - c_m))`, so `alpha = 2` for
/// the `+` direction and `0` for `-`.
fn case_a(
    basis: &BasisFunction,
    k: f64,
    c_m: f64,
    u: f64,
    v: f64,
) -> GeneralOscIntegral<BoxedPrefactor> {
    let sign = basis.direction.sign();
    let (a, b, q) = (basis.a, basis.b, basis.degree);
    let constant =
        0.25 * Complex64::i() * Complex64::from_polar(1.0, k * (u + sign * u - c_m));
    let shift = u - c_m; // >= 0; singularity of the Hankel factor at t = -shift
    GeneralOscIntegral {
        prefactor: Box::new(move |t: Complex64| {
            Ok(constant
                * hankel_h0_scaled(k * (t + shift))?
                * legendre_normalized_complex(q, a, b, t + u))
        }),
        k,
        t_len: v - u,
        alpha: 1.0 + sign,
        t0: c_m - u,
        has_log_singularity: true,
        polynomial_growth: true,
    }
}

/// `int_u^v (i/4) H0(k (c_m - s)) phi(s) ds` with `c_m >= v`, reflected by
/// `s = v - t`: the combined phase is `exp(i k (1 - sign) t)
/// exp(i k (c_m - v + sign v))`, so `alpha = 0` for `+` and `2` for `-`.
fn case_b(
    basis: &BasisFunction,
    k: f64,
    c_m: f64,
    u: f64,
    v: f64,
) -> GeneralOscIntegral<BoxedPrefactor> {
    let sign = basis.direction.sign();
    let (a, b, q) = (basis.a, basis.b, basis.degree);
    let constant =
        0.25 * Complex64::i() * Complex64::from_polar(1.0, k * (c_m - v + sign * v));
    let shift = c_m - v; // >= 0; singularity at t = -shift
    GeneralOscIntegral {
        prefactor: Box::new(move |t: Complex64| {
            Ok(constant
                * hankel_h0_scaled(k * (t + shift))?
                * legendre_normalized_complex(q, a, b, v - t))
        }),
        k,
        t_len: v - u,
        alpha: 1.0 - sign,
        t0: v - c_m,
        has_log_singularity: true,
        polynomial_growth: true,
    }
}

/// The canonical integrals making up the physical-optics term
/// `S Psi(c_m) = (k |d2| / 2) sum_j int_{segment j} exp(i k d1 s)
/// H0(k |c_m - s|) ds` (the `-2ik|d2|` of `Psi` times `i/4` of the kernel).
/// Segments left of `c_m` are reflected, segments containing `c_m` are split
/// at it; the oscillation coefficients are `1 + d1` and `1 - d1`.
pub fn transform_spsi_integrals(
    screen: &Screen,
    incident: &IncidentWave,
    c_m: f64,
) -> Vec<GeneralOscIntegral<BoxedPrefactor>> {
    let k = incident.k;
    let d1 = incident.d.0;
    let scale = 0.5 * k * incident.d.1.abs();
    let mut out = Vec::new();
    if scale == 0.0 {
        return out;
    }
    // Case-A piece on [u, v] with c_m <= u: s = u + t.
    let piece_right = |u: f64, v: f64| {
        let constant = scale * Complex64::from_polar(1.0, k * (u * (1.0 + d1) - c_m));
        let shift = u - c_m;
        GeneralOscIntegral {
            prefactor: Box::new(move |t: Complex64| {
                Ok(constant * hankel_h0_scaled(k * (t + shift))?)
            }) as BoxedPrefactor,
            k,
            t_len: v - u,
            alpha: 1.0 + d1,
            t0: c_m - u,
            has_log_singularity: true,
            polynomial_growth: false,
        }
    };
    // Case-B piece on [u, v] with c_m >= v: s = v - t.
    let piece_left = |u: f64, v: f64| {
        let constant = scale * Complex64::from_polar(1.0, k * (c_m - v * (1.0 - d1)));
        let shift = c_m - v;
        GeneralOscIntegral {
            prefactor: Box::new(move |t: Complex64| {
                Ok(constant * hankel_h0_scaled(k * (t + shift))?)
            }) as BoxedPrefactor,
            k,
            t_len: v - u,
            alpha: 1.0 - d1,
            t0: v - c_m,
            has_log_singularity: true,
            polynomial_growth: false,
        }
    };
    for &(lo, hi) in screen.endpoints() {
        if c_m <= lo {
            out.push(piece_right(lo, hi));
        } else if c_m >= hi {
            out.push(piece_left(lo, hi));
        } else {
            out.push(piece_left(lo, c_m));
            out.push(piece_right(c_m, hi));
        }
    }
    out
}

/// `S Psi(c_m)` by the four-case quadrature; identically zero at grazing
/// incidence.
pub fn eval_spsi(
    screen: &Screen,
    incident: &IncidentWave,
    c_m: f64,
    params: &QuadParams,
) -> Result<Complex64, OsciQuadError> {
    let mut total = Complex64::new(0.0, 0.0);
    for integral in transform_spsi_integrals(screen, incident, c_m) {
        total += integrate(&integral, params)?;
    }
    Ok(total)
}

/// The weighted rectangular collocation system `A a = b` with
/// `A_{m,n} = sqrt(w_m) S phi_n(c_m)` and
/// `b_m = sqrt(w_m) (u^i(c_m) - S Psi(c_m))`.
#[derive(Debug, Clone)]
pub struct WeightedSystem {
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
    pub collocation: CollocationSet,
    pub space: HnaSpace,
}

impl WeightedSystem {
    /// Text dump `m n re im` per matrix entry followed by `m re im` per
    /// right-hand-side entry, for offline solver cross-checks.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(out, "# matrix {} {}", self.a.nrows(), self.a.ncols()).unwrap();
        for m in 0..self.a.nrows() {
            for n in 0..self.a.ncols() {
                let z = self.a[(m, n)];
                writeln!(out, "{m} {n} {:.16e} {:.16e}", z.re, z.im).unwrap();
            }
        }
        writeln!(out, "# rhs {}", self.b.len()).unwrap();
        for m in 0..self.b.len() {
            writeln!(out, "{m} {:.16e} {:.16e}", self.b[m].re, self.b[m].im).unwrap();
        }
        out
    }
}

/// One assembled row: the matrix entries and the right-hand side value,
/// already scaled by `sqrt(w_m)`. Pure in its inputs, so rows may be computed
/// in any order or concurrently; results are written, never accumulated, and
/// are bit-identical regardless of schedule.
fn assemble_row(
    space: &HnaSpace,
    incident: &IncidentWave,
    point: &CollocPoint,
    m: usize,
    params: &QuadParams,
) -> Result<(Vec<Complex64>, Complex64), DiscretizationError> {
    let sw = point.weight.sqrt();
    let c_m = point.s;
    let mut row = Vec::with_capacity(space.basis.len());
    for (n, basis) in space.basis.iter().enumerate() {
        let mut entry = Complex64::new(0.0, 0.0);
        for integral in transform_matrix_integral(basis, space.k, c_m) {
            entry += integrate(&integral, params)
                .map_err(|source| DiscretizationError::Entry { m, n, source })?;
        }
        row.push(sw * entry);
    }
    let spsi = eval_spsi(&space.screen, incident, c_m, params)
        .map_err(|source| DiscretizationError::Rhs { m, source })?;
    let rhs = sw * (incident.eval_incident([c_m, 0.0]) - spsi);
    Ok((row, rhs))
}

/// Assembles the weighted system, one row per collocation point. Rows are
/// computed in parallel when the `parallel` feature is enabled; the
/// sequential path below is always compiled and produces bit-identical
/// results.
pub fn assemble(
    space: &HnaSpace,
    incident: &IncidentWave,
    collocation: &CollocationSet,
    params: &QuadParams,
) -> Result<WeightedSystem, DiscretizationError> {
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        collocation
            .points
            .par_iter()
            .enumerate()
            .map(|(m, pt)| assemble_row(space, incident, pt, m, params))
            .collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows = assemble_rows_sequential(space, incident, collocation, params)?;
    Ok(rows_to_system(space, collocation, rows))
}

/// Sequential assembly of the same rows; public so benchmarks can compare
/// the two paths within one build.
pub fn assemble_sequential(
    space: &HnaSpace,
    incident: &IncidentWave,
    collocation: &CollocationSet,
    params: &QuadParams,
) -> Result<WeightedSystem, DiscretizationError> {
    let rows = assemble_rows_sequential(space, incident, collocation, params)?;
    Ok(rows_to_system(space, collocation, rows))
}

fn assemble_rows_sequential(
    space: &HnaSpace,
    incident: &IncidentWave,
    collocation: &CollocationSet,
    params: &QuadParams,
) -> Result<Vec<(Vec<Complex64>, Complex64)>, DiscretizationError> {
    collocation
        .points
        .iter()
        .enumerate()
        .map(|(m, pt)| assemble_row(space, incident, pt, m, params))
        .collect()
}

fn rows_to_system(
    space: &HnaSpace,
    collocation: &CollocationSet,
    rows: Vec<(Vec<Complex64>, Complex64)>,
) -> WeightedSystem {
    let m = rows.len();
    let n = space.basis.len();
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (i, (row, rhs)) in rows.into_iter().enumerate() {
        for (j, z) in row.into_iter().enumerate() {
            a[(i, j)] = z;
        }
        b[i] = rhs;
    }
    WeightedSystem {
        a,
        b,
        collocation: collocation.clone(),
        space: space.clone(),
    }
}
