//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by solvers, transforms and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// Two kernels that must live on one grid do not.
    #[error("grid mismatch: left has t_end={left_t_end}, n_steps={left_n}; right has t_end={right_t_end}, n_steps={right_n}")]
    GridMismatch {
        left_t_end: f64,
        left_n: usize,
        right_t_end: f64,
        right_n: usize,
    },

    /// Iterated convolution power must be at least 1; the identity element
    /// of the convolution algebra is not representable on a sample grid.
    #[error("iterated convolution power must be >= 1, got {0}")]
    ZeroConvolutionPower(usize),

    /// The implicit diagonal step of the resolvent march degenerates.
    #[error("resolvent march diagonal 1 + w0*dt*k(0) = {diagonal:.3e} is too close to zero (dt={dt:.3e}, k(0)={k0:.3e}); refine the grid")]
    ResolventDiagonal { dt: f64, k0: f64, diagonal: f64 },

    /// Named trigonometric identity not in the catalog.
    #[error("unknown trigonometric identity '{0}' (expected one of sc, ssc, cc, scc)")]
    UnknownIdentity(String),

    /// A kernel operation needed closed-form derivatives that the kernel
    /// does not carry.
    #[error("closed-form derivative of order {order} unavailable for kernel '{kernel}'")]
    DerivativeUnavailable { kernel: String, order: usize },

    /// The memory kernel violates the hypothesis of the second-order
    /// reduction: N(0) must be positive unless N vanishes identically.
    #[error("memory kernel has N(0) = {n0:.3e} but is not identically zero; the second-order reduction requires N(0) > 0")]
    DegenerateKernel { n0: f64 },

    /// Boundary selection produced no active boundary nodes.
    #[error("active boundary selection is empty")]
    EmptyBoundary,

    /// Rectangle eigenvalue cutoff excludes even the ground mode.
    #[error("eigenvalue cutoff {cutoff:.6} lies below the ground eigenvalue {ground:.6}")]
    CutoffBelowGround { cutoff: f64, ground: f64 },

    /// Spectral Sobolev norms are only defined for s in {-1, 0, 1}.
    #[error("Sobolev index {0} outside supported set {{-1, 0, 1}}")]
    UnsupportedSobolevIndex(i32),

    /// Explicit central scheme would be unstable on this grid.
    #[error("time step {dt:.3e} violates the stability bound dt*omega < 2 for omega={omega:.3} (use dt <= {suggested:.3e})")]
    CflViolation { dt: f64, omega: f64, suggested: f64 },

    /// The convolution series for the reconstruction kernel did not decay.
    #[error("reconstruction kernel series did not fall below {tolerance:.3e} within {k_max} terms (last term {last:.3e}); shorten the horizon or shrink the kernel")]
    SeriesDiverged {
        k_max: usize,
        tolerance: f64,
        last: f64,
    },

    /// Unregularized least squares on a numerically rank-deficient map.
    #[error("input map is numerically rank deficient (sigma_min/sigma_max = {ratio:.3e} < {threshold:.3e}); regularize or enlarge the control horizon")]
    IllConditioned { ratio: f64, threshold: f64 },

    /// Configuration file problems, with the offending field when known.
    #[error("config error: {0}")]
    Config(String),

    /// Unknown built-in experiment name.
    #[error("unknown experiment '{0}'; run `list` for the catalog")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
