//! Hybrid numerical-asymptotic collocation BEM for high-frequency 2D acoustic
//! scattering by colinear sound-soft screens.
//!
//! The solver approximates the normal-derivative jump on the screen by a
//! product of piecewise polynomials on overlapping graded meshes with the
//! oscillatory factors `exp(±iks)`, collocates the single-layer integral
//! equation at weighted Chebyshev points with oversampling, and solves the
//! resulting rectangular system by a truncated-SVD pseudo-inverse. All BEM
//! integrals are reduced to a canonical oscillatory/singular form and
//! evaluated at frequency-independent cost by numerical steepest descent
//! combined with generalized (log-weight) Gaussian quadrature.

mod ddouble;
mod logrule;
mod logrule_tables;

pub mod discretization;
pub mod geometry;
pub mod hna_space;
pub mod lsq;
pub mod osciquad;
pub mod postproc;
pub mod solve;
pub mod specfun;





