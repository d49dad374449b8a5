//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or field value is outside its admissible range.
    #[error("invalid {what}: {value} (admissible: {expected})")]
    InvalidInput {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// An updated occupation probability left [0, 1] by more than the
    /// round-off tolerance. All collision rules preserve the range
    /// analytically, so this signals a model or caller bug.
    #[error("occupation probability out of range at site {site}: {channel} = {value:e} (collision rules preserve [0,1]; this is a bug, not a state to clamp)")]
    RangeViolation {
        site: usize,
        channel: &'static str,
        value: f64,
    },

    /// Gate failed the unitarity check.
    #[error("matrix is not unitary: max |U†U - I| = {defect:e} exceeds {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },

    /// Relaxation eigenvalue vanished; the collision Jacobian has no
    /// generalized inverse on its non-conserved subspace.
    #[error("degenerate collision Jacobian: lambda_2 = {lambda2:e}")]
    SingularJacobian { lambda2: f64 },

    /// Equilibrium sits on the boundary of \[0,1\]^2 where the quantum
    /// Jacobian's square-root denominators vanish.
    #[error("equilibrium on the domain boundary at rho = {rho}: d = ({d_plus}, {d_minus})")]
    BoundaryEquilibrium { rho: f64, d_plus: f64, d_minus: f64 },

    /// Requested operation is not defined for this collision model.
    #[error("operation not defined for model {model}: {what}")]
    UnsupportedModel {
        model: &'static str,
        what: &'static str,
    },

    /// Explicit stability bound cannot be met with a reasonable sub-step.
    #[error("CFL refusal: lattice step {dt} needs {substeps_required} sub-steps (limit {substeps_limit}); admissible PDE step is {dt_admissible:e}")]
    CflViolation {
        dt: f64,
        dt_admissible: f64,
        substeps_required: u64,
        substeps_limit: u64,
    },

    /// EFT coefficients blew up (density crossed a pole of the
    /// coefficient functions).
    #[error("EFT coefficient singularity at site {site}: rho = {rho} (|lambda_2| = {lambda2:e})")]
    EftSingularity { site: usize, rho: f64, lambda2: f64 },

    /// Malformed snapshot or dump file.
    #[error("bad file format: {0}")]
    BadFormat(String),
}
