//! Construction of the generalized log-weight Gaussian rules.
//!
//! An `n`-point rule that integrates `span{phi_j, phi_j log x : j < n}`
//! exactly solves a `2n`-equation moment system. In its raw form the system
//! is hopeless for larger `n`: the functions `x^j` and `x^j log x` become
//! numerically dependent long before `j` reaches 40 (the singular values of
//! the family decay geometrically), so Newton-type iterations on the raw
//! moment equations stall on a curved, extremely anisotropic valley at *any*
//! working precision. The construction here reformulates the conditions in
//! an orthonormalized function basis, where the same geometry becomes
//! well-posed:
//!
//! 1. Sample all `2n` basis functions on a fine graded composite grid and
//!    QR-factorize the weighted sample matrix with column pivoting (in
//!    double-double), keeping the `K` directions whose diagonal `R_ii`
//!    exceeds `1e-20 R_00`. The kept columns of `P R^{-1}` are coefficient
//!    vectors of near-orthonormal functions `u_i` spanning the family.
//! 2. Express the exact integral of each `u_i` through the closed-form
//!    moments of the raw basis.
//! 3. Run Levenberg-Marquardt on the nodes and weights against the `K`
//!    conditions `sum_l w_l u_i(x_l) = int u_i`, with per-condition
//!    tolerances proportional to the direction's significance: a residual
//!    `eps` in direction `i` perturbs the raw moments by only
//!    `(R_ii/R_00) eps`, so weak directions need proportionally less
//!    accuracy. Under the same scaling the double-double evaluation noise of
//!    `u_i` stays ~13 orders below its tolerance, so conditions are
//!    evaluated in double-double while the (error-tolerant) step computation
//!    runs in plain `f64`.
//!
//! The converged rule is flat in the residual landscape, so rounding nodes
//! and weights to `f64` preserves the moment contract; rules for the
//! standard sizes are therefore cached as static tables
//! ([`tables`](crate::logrule_tables)) and everything else is constructed on
//! first use. The unit-interval family converges at every size used here;
//! the half-line family converges only for small `n` (its contract is
//! relative to moments growing like `j!`, which shrinks the attraction
//! basin until the iteration lands in nearby local minima), so larger
//! half-line sizes use a graded composite Gauss-Legendre rule meeting the
//! same integration contract (more points, no construction risk).

use nalgebra::DMatrix;

use crate::ddouble::{Dd, GAMMA};
use crate::logrule_tables;
use crate::specfun::gauss_legendre;

/// Which generalized family to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GenKind {
    /// `int_0^1 [f0(x) + f1(x) log x] dx`.
    LegendreLog,
    /// `int_0^inf [f(x) log x + g(x)] e^(-x) dx`.
    LaguerreLog,
}

/// Returns the n-point generalized rule, or a composite substitute meeting
/// the same integration contract if the n-point construction fails.
///
/// Resolution order: static table, then on-the-fly construction (the result
/// is cached by the caller), then the composite fallback.
pub(crate) fn generalized_rule(kind: GenKind, n: usize) -> (Vec<f64>, Vec<f64>) {
    if let Some((x, w)) = logrule_tables::lookup(kind, n) {
        return (x.to_vec(), w.to_vec());
    }
    // The half-line construction converges only for small point counts: its
    // moment contract is relative to moments growing like j!, which shrinks
    // the attraction basin of the true rule until Levenberg-Marquardt lands
    // in nearby local minima. Larger sizes go straight to the (permitted,
    // documented) composite rule, which meets the same contract.
    let built = match kind {
        GenKind::LegendreLog => solve_rule(&LegLog { n }),
        GenKind::LaguerreLog if n < 5 => solve_rule(&LagLog { n }),
        GenKind::LaguerreLog => Err(String::new()),
    };
    match built {
        Ok(rule) => rule,
        Err(_) => composite_rule(kind, n),
    }
}

/// Relative-error audit of a delivered rule against the family's closed-form
/// moments, evaluated in double-double, for all degrees `j < deg`. For
/// `LegendreLog` this checks `x^j` and `x^j log x` against `1/(j+1)` and
/// `-1/(j+1)^2`; for `LaguerreLog` against `j!` and `j! (H_j - gamma)`.
/// An n-point generalized rule carries 2n conditions and covers `deg = n`.
pub(crate) fn max_rel_moment_error(
    kind: GenKind,
    deg: usize,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let xs: Vec<Dd> = nodes.iter().map(|&x| Dd::from_f64(x)).collect();
    let ws: Vec<Dd> = weights.iter().map(|&w| Dd::from_f64(w)).collect();
    let lxs: Vec<Dd> = xs.iter().map(|x| x.ln()).collect();
    let mut pow: Vec<Dd> = vec![Dd::ONE; xs.len()];
    let mut maxrel = 0.0f64;
    let mut fact = Dd::ONE;
    let mut harmonic = Dd::ZERO;
    for j in 0..deg {
        if j > 0 {
            fact = fact * Dd::from_f64(j as f64);
            harmonic = harmonic + Dd::from_f64(j as f64).recip();
        }
        let mut plain = Dd::ZERO;
        let mut logm = Dd::ZERO;
        for l in 0..xs.len() {
            plain = plain + ws[l] * pow[l];
            logm = logm + ws[l] * pow[l] * lxs[l];
            pow[l] = pow[l] * xs[l];
        }
        let (plain_exact, log_exact) = match kind {
            GenKind::LegendreLog => {
                let jp1 = Dd::from_f64((j + 1) as f64);
                (jp1.recip(), -(jp1 * jp1).recip())
            }
            GenKind::LaguerreLog => (fact, fact * (harmonic - GAMMA)),
        };
        let rel = |got: Dd, want: Dd| ((got - want) / want).abs().hi;
        maxrel = maxrel.max(rel(plain, plain_exact));
        if log_exact.abs().hi > 0.0 {
            maxrel = maxrel.max(rel(logm, log_exact));
        }
    }
    maxrel
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// A generalized log-weight family presented to the solver through a common
/// interface: `2n` basis functions `f_c`, their closed-form integrals
/// against the condition measure, a fine grid resolving all of them (with
/// plain Lebesgue panel weights, used only for orthonormalization), seed
/// nodes, and the map from internal weight variables to delivered weights.
trait Family {
    fn n(&self) -> usize;
    /// Exclusive upper bound for feasible nodes.
    fn upper_bound(&self) -> f64;
    /// `f_c(x)` and `f_c'(x)` for `c < 2n`, `x > 0`.
    fn basis(&self, x: Dd, fv: &mut [Dd], fd: &mut [Dd]);
    /// `int f_c dmu` for the condition measure `mu`, in closed form.
    fn raw_moments(&self) -> Vec<Dd>;
    /// Composite fine grid `(point, panel weight)`.
    fn grid(&self) -> Vec<(f64, f64)>;
    fn seed_nodes(&self) -> Result<Vec<f64>, String>;
    /// Delivered rule weights from internal weight variables.
    fn external_weights(&self, nodes: &[Dd], v: &[Dd]) -> Vec<f64>;
}

/// `int_0^1 [f0 + f1 log x] dx`: basis `P~_j(x)`, `P~_j(x) log x` with
/// `P~_j` the shifted Legendre polynomials; the condition measure is
/// Lebesgue on [0,1] and the weight variables are the rule weights.
struct LegLog {
    n: usize,
}

impl Family for LegLog {
    fn n(&self) -> usize {
        self.n
    }

    fn upper_bound(&self) -> f64 {
        1.0
    }

    fn basis(&self, x: Dd, fv: &mut [Dd], fd: &mut [Dd]) {
        let n = self.n;
        shifted_legendre_all_dd(n, x, &mut fv[..n], &mut fd[..n]);
        let lx = x.ln();
        for j in 0..n {
            fv[n + j] = fv[j] * lx;
            fd[n + j] = fd[j] * lx + fv[j] / x;
        }
    }

    /// `int P~_j = delta_j0`; `int P~_j log x = -1` for j = 0 and
    /// `(-1)^(j+1)/(j(j+1))` otherwise.
    fn raw_moments(&self) -> Vec<Dd> {
        let n = self.n;
        let mut m = vec![Dd::ZERO; 2 * n];
        m[0] = Dd::ONE;
        m[n] = -Dd::ONE;
        for j in 1..n {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            m[n + j] = Dd::from_f64(sign) / Dd::from_f64((j * (j + 1)) as f64);
        }
        m
    }

    fn grid(&self) -> Vec<(f64, f64)> {
        unit_graded_grid(self.n.max(40))
    }

    /// Nodes of the Gauss rule for the weight `1 - log x` on [0,1]: the
    /// classical seed for this family (the weight reproduces both moment
    /// flavors of the constant, and its Gauss nodes interlace the target's).
    fn seed_nodes(&self) -> Result<Vec<f64>, String> {
        gauss_one_minus_log_nodes(self.n)
    }

    fn external_weights(&self, _nodes: &[Dd], v: &[Dd]) -> Vec<f64> {
        v.iter().map(|w| w.to_f64()).collect()
    }
}

/// `int_0^inf [f log x + g] e^(-x) dx`: basis `e^(-x/2) L_j(x)` and
/// `e^(-x/2) L_j(x) log x` (the half-exponential keeps samples O(1) across
/// the whole support); the condition measure is `e^(-x/2) dx` and the weight
/// variables are `v_l = w_l e^(x_l/2)`.
struct LagLog {
    n: usize,
}

impl Family for LagLog {
    fn n(&self) -> usize {
        self.n
    }

    fn upper_bound(&self) -> f64 {
        f64::INFINITY
    }

    fn basis(&self, x: Dd, fv: &mut [Dd], fd: &mut [Dd]) {
        let n = self.n;
        laguerre_all_dd(n, x, &mut fv[..n], &mut fd[..n]);
        let e = (-x * Dd::from_f64(0.5)).exp();
        let half = Dd::from_f64(0.5);
        for j in 0..n {
            fd[j] = e * (fd[j] - half * fv[j]);
            fv[j] = e * fv[j];
        }
        let lx = x.ln();
        for j in 0..n {
            fv[n + j] = fv[j] * lx;
            fd[n + j] = fd[j] * lx + fv[j] / x;
        }
    }

    /// `int L_j e^(-x) = delta_j0`; `int L_j log x e^(-x) = -gamma` for
    /// j = 0 and `-1/j` otherwise.
    fn raw_moments(&self) -> Vec<Dd> {
        let n = self.n;
        let mut m = vec![Dd::ZERO; 2 * n];
        m[0] = Dd::ONE;
        m[n] = -GAMMA;
        for j in 1..n {
            m[n + j] = -Dd::from_f64(j as f64).recip();
        }
        m
    }

    fn grid(&self) -> Vec<(f64, f64)> {
        let q = self.n.max(40);
        let mut grid = unit_graded_grid(q);
        // Linear panels of length 4 out to where the largest weighted basis
        // function e^(-x/2) x^(n-1)/(n-1)! has decayed below ~1e-35 and can
        // no longer influence directions kept by the QR threshold.
        let n = self.n;
        let mut lnfact = 0.0f64;
        for j in 2..n {
            lnfact += (j as f64).ln();
        }
        let deg = n.max(2) as f64 - 1.0;
        let mut a = 1.0f64;
        loop {
            let b = a + 4.0;
            push_panel(&mut grid, a, b, q);
            a = b;
            // The decay test is meaningful only past the peak at 2(n-1);
            // before it the basis function is still growing.
            if a >= 2.0 * deg && -0.5 * a + deg * a.ln() - lnfact < -80.6 {
                break;
            }
        }
        grid
    }

    /// Nodes of the Gauss rule for the weight `(c - log x) e^(-x)` with
    /// `c = log(4n) + 2`, the half-line analogue of the `1 - log x` seed
    /// (`c` keeps the weight positive across the Gaussian support). Falls
    /// back to plain Gauss-Laguerre nodes if the moment algorithm loses
    /// positivity.
    fn seed_nodes(&self) -> Result<Vec<f64>, String> {
        let n = self.n;
        let c = (4.0 * n as f64).ln() + 2.0;
        let n2 = 2 * n;
        // Modified moments against monic Laguerre (-1)^j j! L_j:
        // m_0 = c + gamma, m_j = (-1)^j j!/j.
        let mut m = vec![Dd::ZERO; n2];
        m[0] = Dd::from_f64(c) + GAMMA;
        let mut fact = Dd::ONE; // (j-1)! running
        for j in 1..n2 {
            if j > 1 {
                fact = fact * Dd::from_f64((j - 1) as f64);
            }
            m[j] = if j % 2 == 0 { fact } else { -fact };
        }
        let a: Vec<Dd> = (0..n2).map(|j| Dd::from_f64(2.0 * j as f64 + 1.0)).collect();
        let b: Vec<Dd> = (0..n2).map(|j| Dd::from_f64((j * j) as f64)).collect();
        match modified_chebyshev(n, &m, &a, &b).map(|(al, be)| jacobi_nodes(&al, &be)) {
            Ok(nodes) if nodes.iter().all(|&x| x > 0.0) => Ok(nodes),
            _ => {
                let (x, _) = crate::specfun::golub_welsch_laguerre(n, 0.0, 1.0)?;
                Ok(x)
            }
        }
    }

    fn external_weights(&self, nodes: &[Dd], v: &[Dd]) -> Vec<f64> {
        nodes
            .iter()
            .zip(v.iter())
            .map(|(&x, &vl)| (vl * (-x * Dd::from_f64(0.5)).exp()).to_f64())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Appends a `q`-point Gauss-Legendre panel on `[a,b]` as (point, weight).
fn push_panel(grid: &mut Vec<(f64, f64)>, a: f64, b: f64, q: usize) {
    let (gx, gw) = gauss_legendre(q);
    for (&t, &w) in gx.iter().zip(gw.iter()) {
        grid.push((a + (b - a) * 0.5 * (t + 1.0), (b - a) * 0.5 * w));
    }
}

/// Ratio-4 graded panels covering (0, 1] down to 4^-36, resolving the
/// logarithmic endpoint: on each panel `log x` is an analytic O(1) function,
/// and what lies below the innermost panel is beyond double-double.
fn unit_graded_grid(q: usize) -> Vec<(f64, f64)> {
    let mut grid = Vec::with_capacity(36 * q);
    for i in 0..36 {
        let b = 4.0f64.powi(-i);
        let a = if i == 35 { 0.0 } else { b / 4.0 };
        push_panel(&mut grid, a, b, q);
    }
    grid
}

// ---------------------------------------------------------------------------
// Double-double basis evaluations
// ---------------------------------------------------------------------------

/// Shifted Legendre values/derivatives `P_j(2x-1)`, `d/dx P_j(2x-1)`,
/// j < n.
fn shifted_legendre_all_dd(n: usize, x: Dd, values: &mut [Dd], derivs: &mut [Dd]) {
    let u = Dd::from_f64(2.0) * x - Dd::ONE;
    let two = Dd::from_f64(2.0);
    values[0] = Dd::ONE;
    derivs[0] = Dd::ZERO;
    if n == 1 {
        return;
    }
    values[1] = u;
    derivs[1] = two;
    let mut d_prev = Dd::ZERO;
    let mut d = Dd::ONE;
    for j in 1..n - 1 {
        let jf = Dd::from_f64(j as f64);
        let a = Dd::from_f64(2.0 * j as f64 + 1.0);
        let c = Dd::from_f64(j as f64 + 1.0);
        values[j + 1] = (a * u * values[j] - jf * values[j - 1]) / c;
        let d_next = (a * (values[j] + u * d) - jf * d_prev) / c;
        derivs[j + 1] = two * d_next;
        d_prev = d;
        d = d_next;
    }
}

/// Laguerre values/derivatives `L_j(x)` for j < n.
fn laguerre_all_dd(n: usize, x: Dd, values: &mut [Dd], derivs: &mut [Dd]) {
    values[0] = Dd::ONE;
    derivs[0] = Dd::ZERO;
    if n == 1 {
        return;
    }
    values[1] = Dd::ONE - x;
    derivs[1] = -Dd::ONE;
    for j in 1..n - 1 {
        let jf = Dd::from_f64(j as f64);
        let a = Dd::from_f64(2.0 * j as f64 + 1.0) - x;
        let c = Dd::from_f64(j as f64 + 1.0);
        values[j + 1] = (a * values[j] - jf * values[j - 1]) / c;
        // L_{j+1}' = L_j' - L_j
        derivs[j + 1] = derivs[j] - values[j];
    }
}

// ---------------------------------------------------------------------------
// Seeds: modified Chebyshev + Jacobi-matrix eigenvalues
// ---------------------------------------------------------------------------

/// Gautschi's modified Chebyshev algorithm in double-double: recurrence
/// coefficients `(alpha, beta)` of the first `n` orthogonal polynomials of a
/// measure, from its `2n` modified moments `m` against a reference monic
/// family with recurrence coefficients `(a, b)`.
fn modified_chebyshev(
    n: usize,
    m: &[Dd],
    a: &[Dd],
    b: &[Dd],
) -> Result<(Vec<f64>, Vec<f64>), String> {
    let n2 = 2 * n;
    let mut alpha = vec![Dd::ZERO; n];
    let mut beta = vec![Dd::ZERO; n];
    let mut sig_prev2 = vec![Dd::ZERO; n2 + 1];
    let mut sig_prev: Vec<Dd> = m.to_vec();
    sig_prev.push(Dd::ZERO);
    alpha[0] = a[0] + m[1] / m[0];
    beta[0] = m[0];
    for k in 1..n {
        let mut sig = vec![Dd::ZERO; n2 + 1];
        for l in k..n2 - k {
            sig[l] = sig_prev[l + 1] - (alpha[k - 1] - a[l]) * sig_prev[l]
                - beta[k - 1] * sig_prev2[l]
                + b[l] * sig_prev[l - 1];
        }
        if sig[k].hi == 0.0 || sig_prev[k - 1].hi == 0.0 {
            return Err("modified Chebyshev breakdown".into());
        }
        alpha[k] = a[k] + sig[k + 1] / sig[k] - sig_prev[k] / sig_prev[k - 1];
        beta[k] = sig[k] / sig_prev[k - 1];
        if beta[k].hi <= 0.0 {
            return Err(format!("modified Chebyshev lost positivity at k={k}"));
        }
        sig_prev2 = sig_prev;
        sig_prev = sig;
    }
    Ok((
        alpha.iter().map(|q| q.to_f64()).collect(),
        beta.iter().map(|q| q.to_f64()).collect(),
    ))
}

/// Eigenvalues (ascending) of the symmetric Jacobi matrix built from
/// recurrence coefficients; these are the Gauss nodes of the measure.
fn jacobi_nodes(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = alpha[i];
        if i > 0 {
            let s = beta[i].max(0.0).sqrt();
            jac[(i, i - 1)] = s;
            jac[(i - 1, i)] = s;
        }
    }
    let mut ev: Vec<f64> = jac.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Nodes of the n-point Gauss rule for the weight `1 - log x` on [0,1], via
/// modified moments against monic shifted Legendre.
fn gauss_one_minus_log_nodes(n: usize) -> Result<Vec<f64>, String> {
    let n2 = 2 * n;
    // Raw modified moments against (normalized) shifted Legendre:
    // m_0 = 2, m_j = (-1)^j/(j(j+1)); monic rescale by (j!)^2/(2j)!.
    let mut m = vec![Dd::ZERO; n2];
    m[0] = Dd::from_f64(2.0);
    let mut scale = Dd::ONE;
    for j in 1..n2 {
        let jf = j as f64;
        scale = scale * Dd::from_f64(jf * jf)
            / Dd::from_f64((2.0 * jf) * (2.0 * jf - 1.0));
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        m[j] = Dd::from_f64(sign) / Dd::from_f64((j * (j + 1)) as f64) * scale;
    }
    let a: Vec<Dd> = vec![Dd::from_f64(0.5); n2];
    let b: Vec<Dd> = (0..n2)
        .map(|j| {
            let jf = (j * j) as f64;
            Dd::from_f64(jf) / Dd::from_f64(4.0 * (4.0 * jf - 1.0))
        })
        .collect();
    let (alpha, beta) = modified_chebyshev(n, &m, &a, &b)?;
    let nodes = jacobi_nodes(&alpha, &beta);
    if nodes.iter().any(|&x| x <= 0.0 || x >= 1.0) {
        return Err("seed nodes left (0,1)".into());
    }
    Ok(nodes)
}

// ---------------------------------------------------------------------------
// Orthonormalized conditions
// ---------------------------------------------------------------------------

/// The orthonormalized moment conditions: coefficients of the kept
/// near-orthonormal functions `u_i` in the raw basis, their exact integrals,
/// and per-condition tolerances.
struct Conditions {
    nf: usize,
    k: usize,
    /// `coef[i][c]`: coefficient of `f_c` in `u_i`.
    coef: Vec<Vec<Dd>>,
    /// Exact integrals of `u_i` against the condition measure.
    iu: Vec<Dd>,
    /// Acceptance tolerance per condition.
    tol: Vec<f64>,
}

impl Conditions {
    /// Column-pivoted MGS2 QR of the weighted sample matrix on the family's
    /// fine grid, truncated at `R_ii < drop * R_00`. The drop threshold is
    /// family-dependent: the half-line contract is relative to moments that
    /// grow like `j!`, which amplifies quadrature residuals expressed in the
    /// Laguerre frame by about `2^j`, so directions that are negligible on
    /// the unit interval still carry weight there and almost the full set
    /// must be retained (double-double sampling keeps them meaningful).
    fn build(fam: &dyn Family) -> Result<Conditions, String> {
        let n = fam.n();
        let drop = if fam.upper_bound().is_finite() { 1e-20 } else { 1e-27 };
        let nf = 2 * n;
        let grid = fam.grid();
        let p0 = grid.len();

        // Weighted samples, column-major: cols[c][m] = sqrt(rho_m) f_c(t_m).
        let mut cols = vec![vec![Dd::ZERO; p0]; nf];
        {
            let mut fv = vec![Dd::ZERO; nf];
            let mut fd = vec![Dd::ZERO; nf];
            for (mi, &(t, rho)) in grid.iter().enumerate() {
                fam.basis(Dd::from_f64(t), &mut fv, &mut fd);
                let s = Dd::from_f64(rho).sqrt();
                for c in 0..nf {
                    cols[c][mi] = s * fv[c];
                }
            }
        }

        let dot = |a: &[Dd], b: &[Dd]| -> Dd {
            let mut s = Dd::ZERO;
            for (x, y) in a.iter().zip(b.iter()) {
                s = s + *x * *y;
            }
            s
        };

        let mut perm: Vec<usize> = (0..nf).collect();
        let mut r = vec![vec![Dd::ZERO; nf]; nf];
        let mut qcols: Vec<Vec<Dd>> = Vec::with_capacity(nf);
        let mut norms2: Vec<f64> = cols.iter().map(|c| dot(c, c).hi).collect();
        let mut k = nf;
        for i in 0..nf {
            let pi = (i..nf)
                .max_by(|&p, &q| {
                    norms2[p]
                        .partial_cmp(&norms2[q])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            cols.swap(i, pi);
            perm.swap(i, pi);
            norms2.swap(i, pi);
            // Accumulated R entries move with their columns.
            for row in r.iter_mut().take(i) {
                row.swap(i, pi);
            }
            let mut v = std::mem::take(&mut cols[i]);
            for _ in 0..2 {
                for j2 in 0..i {
                    let d = dot(&qcols[j2], &v);
                    r[j2][i] = r[j2][i] + d;
                    for (ve, qe) in v.iter_mut().zip(qcols[j2].iter()) {
                        *ve = *ve - d * *qe;
                    }
                }
            }
            let nv = dot(&v, &v).sqrt();
            r[i][i] = nv;
            if nv.hi < drop * r[0][0].hi {
                k = i;
                break;
            }
            let inv = nv.recip();
            for ve in v.iter_mut() {
                *ve = *ve * inv;
            }
            qcols.push(v);
            for c in i + 1..nf {
                let d = dot(&qcols[i], &cols[c]);
                r[i][c] = d;
                for (ce, qe) in cols[c].iter_mut().zip(qcols[i].iter()) {
                    *ce = *ce - d * *qe;
                }
                norms2[c] = dot(&cols[c], &cols[c]).hi;
            }
        }
        if k == 0 {
            return Err("orthonormalization produced no conditions".into());
        }

        // coef = P R^{-1} (back-substitution per kept column).
        let mut coef = vec![vec![Dd::ZERO; nf]; k];
        for i in 0..k {
            let mut y = vec![Dd::ZERO; i + 1];
            for row in (0..=i).rev() {
                let mut s = if row == i { Dd::ONE } else { Dd::ZERO };
                for c in row + 1..=i {
                    s = s - r[row][c] * y[c];
                }
                y[row] = s / r[row][row];
            }
            for (row, &yv) in y.iter().enumerate() {
                coef[i][perm[row]] = yv;
            }
        }

        let m_raw = fam.raw_moments();
        let iu: Vec<Dd> = coef
            .iter()
            .map(|ci| {
                let mut s = Dd::ZERO;
                for (c, &mc) in ci.iter().zip(m_raw.iter()) {
                    s = s + *c * mc;
                }
                s
            })
            .collect();
        let r00 = r[0][0].hi;
        let tol: Vec<f64> = (0..k)
            .map(|i| (1e-17 * r00 / r[i][i].hi).max(1e-24))
            .collect();
        Ok(Conditions { nf, k, coef, iu, tol })
    }


    /// `u_i(x)` and `u_i'(x)` for the first `k_act` conditions.
    fn u_vals_ders(&self, fam: &dyn Family, k_act: usize, x: Dd, uv: &mut [Dd], ud: &mut [Dd]) {
        let mut fv = vec![Dd::ZERO; self.nf];
        let mut fd = vec![Dd::ZERO; self.nf];
        fam.basis(x, &mut fv, &mut fd);
        for i in 0..k_act {
            let ci = &self.coef[i];
            let mut sv = Dd::ZERO;
            let mut sd = Dd::ZERO;
            for c in 0..self.nf {
                sv = sv + ci[c] * fv[c];
                sd = sd + ci[c] * fd[c];
            }
            uv[i] = sv;
            ud[i] = sd;
        }
    }

    /// Residuals `sum_l v_l u_i(x_l) - int u_i` of the first `k_act`
    /// conditions.
    fn residual(&self, fam: &dyn Family, k_act: usize, xs: &[Dd], v: &[Dd]) -> Vec<Dd> {
        let mut g: Vec<Dd> = self.iu[..k_act].iter().map(|&q| -q).collect();
        let mut uv = vec![Dd::ZERO; k_act];
        let mut ud = vec![Dd::ZERO; k_act];
        for (&x, &vl) in xs.iter().zip(v.iter()) {
            self.u_vals_ders(fam, k_act, x, &mut uv, &mut ud);
            for i in 0..k_act {
                g[i] = g[i] + vl * uv[i];
            }
        }
        g
    }
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt driver
// ---------------------------------------------------------------------------

/// Interpolatory weight variables from the first n (log-free) conditions:
/// solves `V v = m` with `V[j][l] = f_j(x_l)` in double-double.
fn interpolatory_weights(fam: &dyn Family, xs: &[Dd]) -> Result<Vec<Dd>, String> {
    let n = fam.n();
    let mut v = vec![vec![Dd::ZERO; n]; n];
    let mut fv = vec![Dd::ZERO; 2 * n];
    let mut fd = vec![Dd::ZERO; 2 * n];
    for (l, &x) in xs.iter().enumerate() {
        fam.basis(x, &mut fv, &mut fd);
        for j in 0..n {
            v[j][l] = fv[j];
        }
    }
    let rhs = &fam.raw_moments()[..n];
    let lu = lu_factor_dd(v)?;
    Ok(lu.solve(rhs))
}

/// Least-squares solve of `[J; sqrt(mu) I] d = [g; 0]` by MGS2 QR in f64.
/// The step only steers the double-double residual iteration, so f64
/// accuracy suffices (an O(1e-12) relative step error still contracts the
/// residual by ~12 orders per Gauss-Newton step near the solution).
fn lm_step_f64(j: &[Vec<f64>], gs: &[f64], mu: f64) -> Option<Vec<f64>> {
    let k = j.len();
    let nvar = j[0].len();
    let m = k + nvar;
    let smu = mu.sqrt();
    let mut cols = vec![vec![0.0f64; m]; nvar];
    for (c, col) in cols.iter_mut().enumerate() {
        for (i, row) in j.iter().enumerate() {
            col[i] = row[c];
        }
        col[k + c] = smu;
    }
    let mut rhs = vec![0.0f64; m];
    rhs[..k].copy_from_slice(gs);
    let mut r = vec![vec![0.0f64; nvar]; nvar];
    let mut qb = vec![0.0f64; nvar];
    let mut qcols: Vec<Vec<f64>> = Vec::with_capacity(nvar);
    for i in 0..nvar {
        let mut v = std::mem::take(&mut cols[i]);
        for _ in 0..2 {
            for j2 in 0..i {
                let d: f64 = qcols[j2].iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                r[j2][i] += d;
                for (ve, qe) in v.iter_mut().zip(qcols[j2].iter()) {
                    *ve -= d * qe;
                }
            }
        }
        let nv = v.iter().map(|q| q * q).sum::<f64>().sqrt();
        if !(nv > 0.0) || !nv.is_finite() {
            return None;
        }
        r[i][i] = nv;
        for ve in v.iter_mut() {
            *ve /= nv;
        }
        let d: f64 = v.iter().zip(rhs.iter()).map(|(a, b)| a * b).sum();
        for (re, qe) in rhs.iter_mut().zip(v.iter()) {
            *re -= d * qe;
        }
        qb[i] = d;
        qcols.push(v);
    }
    let mut d = vec![0.0f64; nvar];
    for row in (0..nvar).rev() {
        let mut s = qb[row];
        for c in row + 1..nvar {
            s -= r[row][c] * d[c];
        }
        d[row] = s / r[row][row];
        if !d[row].is_finite() {
            return None;
        }
    }
    Some(d)
}

/// Least-squares solve of `[J; sqrt(mu) I] d = [g; 0]` by MGS2 QR in
/// double-double, used when f64 steps stall: near the half-line rule the
/// Jacobian condition number exceeds 1/eps_f64 and f64 step directions are
/// dominated by rounding.
fn lm_step_dd(j: &[Vec<Dd>], gs: &[Dd], mu: f64) -> Option<Vec<Dd>> {
    let k = j.len();
    let nvar = j[0].len();
    let m = k + nvar;
    let smu = Dd::from_f64(mu).sqrt();
    let mut cols = vec![vec![Dd::ZERO; m]; nvar];
    for (c, col) in cols.iter_mut().enumerate() {
        for (i, row) in j.iter().enumerate() {
            col[i] = row[c];
        }
        col[k + c] = smu;
    }
    let mut rhs = vec![Dd::ZERO; m];
    rhs[..k].copy_from_slice(gs);
    let mut r = vec![vec![Dd::ZERO; nvar]; nvar];
    let mut qb = vec![Dd::ZERO; nvar];
    let mut qcols: Vec<Vec<Dd>> = Vec::with_capacity(nvar);
    for i in 0..nvar {
        let mut v = std::mem::take(&mut cols[i]);
        for _ in 0..2 {
            for j2 in 0..i {
                let mut d = Dd::ZERO;
                for (a, b) in qcols[j2].iter().zip(v.iter()) {
                    d = d + *a * *b;
                }
                r[j2][i] = r[j2][i] + d;
                for (ve, qe) in v.iter_mut().zip(qcols[j2].iter()) {
                    *ve = *ve - d * *qe;
                }
            }
        }
        let mut nv2 = Dd::ZERO;
        for q in v.iter() {
            nv2 = nv2 + *q * *q;
        }
        if !(nv2.hi > 0.0) || !nv2.hi.is_finite() {
            return None;
        }
        let nv = nv2.sqrt();
        r[i][i] = nv;
        let inv = nv.recip();
        for ve in v.iter_mut() {
            *ve = *ve * inv;
        }
        let mut d = Dd::ZERO;
        for (a, b) in v.iter().zip(rhs.iter()) {
            d = d + *a * *b;
        }
        for (re, qe) in rhs.iter_mut().zip(v.iter()) {
            *re = *re - d * *qe;
        }
        qb[i] = d;
        qcols.push(v);
    }
    let mut d = vec![Dd::ZERO; nvar];
    for row in (0..nvar).rev() {
        let mut sacc = qb[row];
        for c in row + 1..nvar {
            sacc = sacc - r[row][c] * d[c];
        }
        d[row] = sacc / r[row][row];
        if !d[row].hi.is_finite() {
            return None;
        }
    }
    Some(d)
}

/// Full construction of one generalized rule: orthonormalize the condition
/// system, seed nodes and weights, run Levenberg-Marquardt, and audit.
/// Conditions and residuals are evaluated in double-double; the step solve
/// runs in f64, whose O(1e-12) relative step error still contracts the
/// residual by many orders per Gauss-Newton step near the rule. Returns the
/// f64-rounded rule only if the delivered (rounded) rule meets the moment
/// contract with margin.
fn solve_rule(fam: &dyn Family) -> Result<(Vec<f64>, Vec<f64>), String> {
    let n = fam.n();
    let nvar = 2 * n;
    let upper = fam.upper_bound();
    let cond = Conditions::build(fam)?;
    let k = cond.k;

    let mut xs: Vec<Dd> = fam
        .seed_nodes()?
        .into_iter()
        .map(Dd::from_f64)
        .collect();
    let mut v = interpolatory_weights(fam, &xs)?;
    // The interpolatory seed weights can dip negative when the seed nodes
    // are imperfect; project onto the physical branch (the iteration
    // enforces positive weights throughout).
    let vmed = {
        let mut mags: Vec<f64> = v.iter().map(|q| q.hi.abs()).collect();
        mags.sort_by(|p, q| p.partial_cmp(q).unwrap());
        mags[mags.len() / 2].max(f64::MIN_POSITIVE)
    };
    for q in v.iter_mut() {
        if q.hi <= 0.0 {
            *q = Dd::from_f64(1e-3 * vmed);
        }
    }

    let kind = if upper.is_finite() {
        GenKind::LegendreLog
    } else {
        GenKind::LaguerreLog
    };
    // The delivered-rule audit is the actual acceptance criterion; the
    // per-condition tolerances are a cheap sufficient condition for it.
    const AUDIT_TOL: f64 = 1e-13;
    let audit_now = |xs: &[Dd], v: &[Dd]| -> f64 {
        let nodes: Vec<f64> = xs.iter().map(|x| x.to_f64()).collect();
        let weights = fam.external_weights(xs, v);
        max_rel_moment_error(kind, n, &nodes, &weights)
    };

    let distinct_feasible = |xs: &[Dd]| -> bool {
        if !xs.iter().all(|x| x.hi > 0.0 && x.hi < upper) {
            return false;
        }
        let mut f: Vec<f64> = xs.iter().map(|x| x.hi).collect();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        f.windows(2).all(|p| p[0] != p[1])
    };

    const MAX_ITERS: usize = 20_000;
    let mut mu = 1e-2;
    let mut g = cond.residual(fam, k, &xs, &v);
    let mut uv = vec![Dd::ZERO; k];
    let mut ud = vec![Dd::ZERO; k];
    // Condition rows are equilibrated by their first-iteration Jacobian row
    // norms, frozen for the whole descent: a fixed metric keeps the merit
    // function phi monotone-comparable across iterations (a drifting,
    // per-iteration rescaling lets phi "descend" while the residual does
    // not).
    let mut scale: Vec<f64> = vec![1.0; k];
    let mut best_phi = f64::INFINITY;
    let mut best_iter = 0usize;
    // f64 steps are an order of magnitude cheaper and usually suffice;
    // escalate to double-double steps the first time the f64 iteration
    // stalls instead of giving up.
    let mut dd_steps = false;
    for iter in 0..MAX_ITERS {
        if g
            .iter()
            .zip(cond.tol.iter())
            .all(|(gi, &ti)| gi.abs().hi < ti)
        {
            break;
        }
        if iter % 25 == 0 && iter > 0 && audit_now(&xs, &v) <= AUDIT_TOL {
            break;
        }
        // Jacobian in relative coordinates (updates x(1-d), v(1-d)), kept
        // in double-double: the step solve needs full-precision entries
        // once the condition number passes 1/eps_f64.
        let mut jmat = vec![vec![Dd::ZERO; nvar]; k];
        for l in 0..n {
            cond.u_vals_ders(fam, k, xs[l], &mut uv, &mut ud);
            for (i, row) in jmat.iter_mut().enumerate() {
                row[l] = v[l] * ud[i] * xs[l];
                row[n + l] = v[l] * uv[i];
            }
        }
        if iter == 0 {
            for i in 0..k {
                let s = jmat[i].iter().map(|q| q.hi * q.hi).sum::<f64>().sqrt();
                scale[i] = if s > 0.0 { s } else { 1.0 };
            }
        }
        let mut gs = vec![Dd::ZERO; k];
        for i in 0..k {
            let inv = Dd::from_f64(scale[i]).recip();
            for e in jmat[i].iter_mut() {
                *e = *e * inv;
            }
            gs[i] = g[i] * inv;
        }
        let phi = gs.iter().map(|q| q.hi * q.hi).sum::<f64>().sqrt();
        if phi < best_phi * (1.0 - 1e-4) {
            best_phi = phi;
            best_iter = iter;
        } else if iter > best_iter + 800 {
            if dd_steps {
                return Err(format!("stagnated at phi={phi:.3e} after {iter} iterations"));
            }
            dd_steps = true;
            best_phi = f64::INFINITY;
            best_iter = iter;
        }

        let mut stepped = false;
        'damping: while mu < 1e30 {
            let d: Option<Vec<f64>> = if dd_steps {
                lm_step_dd(&jmat, &gs, mu).map(|d| d.into_iter().map(|q| q.to_f64()).collect())
            } else {
                let jf: Vec<Vec<f64>> = jmat
                    .iter()
                    .map(|row| row.iter().map(|q| q.hi).collect())
                    .collect();
                let gf: Vec<f64> = gs.iter().map(|q| q.hi).collect();
                lm_step_f64(&jf, &gf, mu)
            };
            if let Some(d) = d {
                // Fractional backtracking along the step: a partial step
                // often descends where the full Gauss-Newton step leaves
                // the locally linear regime and overshoots.
                for &alpha in &[1.0, 0.5, 0.25, 0.1] {
                    let cx: Vec<Dd> = (0..n)
                        .map(|l| xs[l] * (Dd::ONE - Dd::from_f64(alpha * d[l])))
                        .collect();
                    if !distinct_feasible(&cx) {
                        continue;
                    }
                    let cv: Vec<Dd> = (0..n)
                        .map(|l| v[l] * (Dd::ONE - Dd::from_f64(alpha * d[n + l])))
                        .collect();
                    // Stay on the physical branch: the true generalized
                    // Gauss rule has strictly positive weights.
                    if !cv.iter().all(|w| w.hi > 0.0) {
                        continue;
                    }
                    let cg = cond.residual(fam, k, &cx, &cv);
                    let cphi = cg
                        .iter()
                        .zip(scale.iter())
                        .map(|(q, &sc)| (q.hi / sc) * (q.hi / sc))
                        .sum::<f64>()
                        .sqrt();
                    if cphi < phi {
                        xs = cx;
                        v = cv;
                        g = cg;
                        mu = (mu * 0.25).max(1e-18);
                        stepped = true;
                        break 'damping;
                    }
                }
            }
            mu *= 8.0;
        }
        if !stepped {
            if dd_steps {
                return Err(format!("no descent step at phi={phi:.3e}, iteration {iter}"));
            }
            dd_steps = true;
            mu = 1e-2;
        }
    }

    let nodes: Vec<f64> = xs.iter().map(|x| x.to_f64()).collect();
    let weights = fam.external_weights(&xs, &v);
    let audit = max_rel_moment_error(kind, n, &nodes, &weights);
    if audit <= AUDIT_TOL {
        Ok((nodes, weights))
    } else {
        Err(format!("converged iterate fails moment audit: {audit:.3e}"))
    }
}

// ---------------------------------------------------------------------------
// Composite fallback
// ---------------------------------------------------------------------------

/// Graded composite Gauss-Legendre rule meeting the same integration
/// contract as the n-point generalized rule (more points, no construction
/// risk): ratio-4 panels isolate the logarithmic endpoint so that each panel
/// sees an analytic integrand, and panel order `max(n,16)+8` integrates the
/// polynomial part exactly with the log part far below 1e-13.
pub(crate) fn composite_rule(kind: GenKind, n: usize) -> (Vec<f64>, Vec<f64>) {
    let q = n.max(16) + 8;
    let mut grid: Vec<(f64, f64)> = Vec::new();
    for i in 0..35 {
        let b = 4.0f64.powi(-i);
        push_panel(&mut grid, b / 4.0, b, q);
    }
    match kind {
        GenKind::LegendreLog => grid.into_iter().unzip(),
        GenKind::LaguerreLog => {
            // Extend across the exponential support and fold e^(-x) into the
            // weights; the tail is cut where x^(2n-1) e^(-x) drops 15 orders
            // below its integral (2n-1)!.
            let mut lnfact = 0.0f64;
            for j in 2..2 * n {
                lnfact += (j as f64).ln();
            }
            let deg = (2 * n - 1).max(1) as f64;
            let mut a = 1.0f64;
            loop {
                let b = a + 4.0;
                push_panel(&mut grid, a, b, q);
                a = b;
                // The decay test is meaningful only past the peak at
                // 2n-1; before it the monomial is still growing.
                if a >= deg && -a + deg * a.ln() - lnfact < -36.0 {
                    break;
                }
            }
            grid.into_iter().map(|(x, w)| (x, w * (-x).exp())).unzip()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The composite fallback is an independent construction, so it doubles
    /// as an oracle for the moment identities.
    #[test]
    fn composite_meets_contract() {
        for n in [4usize, 20, 40] {
            let (x, w) = composite_rule(GenKind::LegendreLog, n);
            let err = max_rel_moment_error(GenKind::LegendreLog, n, &x, &w);
            assert!(err < 1e-13, "legendre-log composite n={n}: {err:.3e}");
            let (x, w) = composite_rule(GenKind::LaguerreLog, n);
            let err = max_rel_moment_error(GenKind::LaguerreLog, n, &x, &w);
            assert!(err < 1e-13, "laguerre-log composite n={n}: {err:.3e}");
        }
    }

    /// Constructed (non-tabulated) rules meet the moment contract; sizes
    /// kept small so the test stays fast. The half-line family is only
    /// constructed below the `generalized_rule` cutoff (larger sizes use the
    /// composite rule), so only those sizes are exercised here.
    #[test]
    fn constructed_rules_meet_contract() {
        for n in [4usize, 10] {
            let (x, w) = solve_rule(&LegLog { n }).expect("unit-interval construction");
            let err = max_rel_moment_error(GenKind::LegendreLog, n, &x, &w);
            assert!(err < 1e-13, "legendre-log n={n}: {err:.3e}");
        }
        let (x, w) = solve_rule(&LagLog { n: 4 }).expect("half-line construction");
        let err = max_rel_moment_error(GenKind::LaguerreLog, 4, &x, &w);
        assert!(err < 1e-13, "laguerre-log n=4: {err:.3e}");
    }

    /// Tabulated rules meet the moment contract (the audit recomputes the
    /// closed-form moments in double-double, independent of construction).
    #[test]
    fn tabulated_rules_meet_contract() {
        for (kind, n) in [(GenKind::LegendreLog, 40usize), (GenKind::LegendreLog, 80)] {
            let (x, w) = logrule_tables::lookup(kind, n).expect("table present");
            assert_eq!(x.len(), n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!(w.iter().all(|&q| q > 0.0));
            let err = max_rel_moment_error(kind, n, x, w);
            assert!(err < 1e-13, "{kind:?} n={n}: {err:.3e}");
        }
    }

    /// Construction timing/convergence probe across sizes; diagnostic only.
    #[test]
    #[ignore]
    fn probe_construction() {
        for n in [4usize, 10, 20, 40, 80] {
            for (name, fam) in [
                ("leg", &LegLog { n } as &dyn Family),
                ("lag", &LagLog { n } as &dyn Family),
            ] {
                let kind = if name == "leg" {
                    GenKind::LegendreLog
                } else {
                    GenKind::LaguerreLog
                };
                let t0 = std::time::Instant::now();
                match solve_rule(fam) {
                    Ok((x, w)) => {
                        let audit = max_rel_moment_error(kind, n, &x, &w);
                        eprintln!("{name} n={n}: OK in {:?}, audit {audit:.3e}", t0.elapsed());
                    }
                    Err(e) => eprintln!("{name} n={n}: FAIL in {:?}: {e}", t0.elapsed()),
                }
            }
        }
    }

    /// Regenerates `logrule_tables.rs`. Run manually after changing the
    /// construction:
    /// `cargo test --release -p hnabem regenerate_rule_tables -- --ignored`
    #[test]
    #[ignore]
    fn regenerate_rule_tables() {
        use std::fmt::Write as _;
        let mut consts = String::new();
        let mut arms = String::new();
        for n in [40usize, 80] {
            let (x, w) = solve_rule(&LegLog { n }).expect("construction failed");
            let err = max_rel_moment_error(GenKind::LegendreLog, n, &x, &w);
            assert!(err < 1e-13, "n={n}: audit {err:.3e}");
            for (tag, vals) in [("X", &x), ("W", &w)] {
                writeln!(consts, "#[rustfmt::skip]").unwrap();
                writeln!(consts, "const LEG{n}_{tag}: [f64; {n}] = [").unwrap();
                for v in vals {
                    writeln!(consts, "    {v:?},").unwrap();
                }
                writeln!(consts, "];\n").unwrap();
            }
            writeln!(
                arms,
                "        (GenKind::LegendreLog, {n}) => Some((&LEG{n}_X, &LEG{n}_W)),"
            )
            .unwrap();
        }
        let header = "\
//! Precomputed generalized log-weight Gaussian rules.
//!
//! The construction in [`logrule`](crate::logrule) is deterministic but
//! iterative; for the sizes reached by the default configurations the
//! converged rules are cached here as `f64` tables (the residual landscape
//! is flat enough that rounding to `f64` preserves the moment contract,
//! which `tabulated_rules_meet_contract` audits directly on these tables).
//! Generated by the ignored test `regenerate_rule_tables` in `logrule`.

use crate::logrule::GenKind;

";
        let footer = "\
/// Returns the cached `n`-point rule of the given kind, if tabulated.
pub(crate) fn lookup(kind: GenKind, n: usize) -> Option<(&'static [f64], &'static [f64])> {
    match (kind, n) {
";
        let file = format!("{header}{consts}{footer}{arms}        _ => None,\n    }}\n}}\n");
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/src/logrule_tables.rs");
        std::fs::write(path, file).expect("write tables");
    }

    #[test]
    fn seed_nodes_interlace_unit_interval() {
        let nodes = gauss_one_minus_log_nodes(40).unwrap();
        assert_eq!(nodes.len(), 40);
        assert!(nodes.windows(2).all(|p| p[0] < p[1]));
        // The 1 - log x weight pulls the first node below plain
        // Gauss-Legendre's (~8.8e-4 at n=40); the independently computed
        // value is 7.3729606e-4.
        assert!(nodes[0] > 0.0 && nodes[0] < 8.8e-4);
        assert!((nodes[0] - 7.372960623877e-4).abs() < 1e-9);
        assert!(nodes[39] < 1.0);
    }
}

// ---------------------------------------------------------------------------
// Double-double LU (used for interpolatory seed weights)
// ---------------------------------------------------------------------------

/// LU factors (with partial pivoting) of a dense double-double matrix.
pub(crate) struct LuFactorsDd {
    a: Vec<Vec<Dd>>,
    piv: Vec<usize>,
}

impl LuFactorsDd {
    pub(crate) fn solve(&self, b: &[Dd]) -> Vec<Dd> {
        let m = b.len();
        let mut x: Vec<Dd> = self.piv.iter().map(|&p| b[p]).collect();
        for col in 0..m {
            for row in col + 1..m {
                let f = self.a[row][col];
                if f.hi != 0.0 {
                    x[row] = x[row] - f * x[col];
                }
            }
        }
        for col in (0..m).rev() {
            let mut s = x[col];
            for k in col + 1..m {
                s = s - self.a[col][k] * x[k];
            }
            x[col] = s / self.a[col][col];
        }
        x
    }
}

/// Factors a dense double-double matrix by LU with partial pivoting. The
/// multipliers are stored in the strict lower triangle.
pub(crate) fn lu_factor_dd(mut a: Vec<Vec<Dd>>) -> Result<LuFactorsDd, String> {
    let m = a.len();
    let mut piv: Vec<usize> = (0..m).collect();
    for col in 0..m {
        let p = (col..m)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[p][col].hi == 0.0 {
            return Err("singular matrix in LU factorization".into());
        }
        a.swap(col, p);
        piv.swap(col, p);
        let d = a[col][col];
        for row in col + 1..m {
            let f = a[row][col] / d;
            a[row][col] = f;
            if f.hi == 0.0 {
                continue;
            }
            for k in col + 1..m {
                a[row][k] = a[row][k] - f * a[col][k];
            }
        }
    }
    Ok(LuFactorsDd { a, piv })
}
