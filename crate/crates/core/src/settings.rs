//! Numerical knobs shared by the algorithms.
//!
//! Tolerances are stored as `f64` and converted to the working type when
//! used; they are relative unless stated otherwise.

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    /// Longest orbit any routine may compute.
    pub orbit_cap: usize,
    /// Iterates examined by entry, return and niceness searches.
    pub horizon: usize,
    /// Deepest principal nest level computed.
    pub nest_cap: usize,
    /// Absolute tolerance for validation checks (fixing −1, evenness, range).
    pub eval_tol: f64,
    /// Slack allowed outside [−1, 1] before an orbit counts as escaped.
    pub escape_tol: f64,
    /// Sign-scan cells used for root isolation on [−1, 1].
    pub scan_cells: usize,
    /// Relative margin for disjointness and strict containment tests.
    pub boundary_margin: f64,
    /// Relative tolerance for matching interval endpoints.
    pub isolation_tol: f64,
    /// Relative distance at which a boundary orbit is considered to have
    /// landed on a boundary point (and stops being followed).
    pub snap_tol: f64,
    /// Largest renormalization period scanned.
    pub max_period: usize,
    /// Dense sample size for validation and tower comparisons.
    pub samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            orbit_cap: 1 << 22,
            horizon: 4096,
            nest_cap: 512,
            eval_tol: 1e-9,
            escape_tol: 1e-9,
            scan_cells: 4096,
            boundary_margin: 1e-10,
            isolation_tol: 1e-12,
            snap_tol: 1e-7,
            max_period: 12,
            samples: 257,
        }
    }
}

impl Settings {
    /// Defaults with the period cap scaled for type-N maps.
    pub fn for_type(n_type: usize) -> Self {
        Settings {
            max_period: (12 / n_type.max(1)).max(2),
            ..Settings::default()
        }
    }
}
