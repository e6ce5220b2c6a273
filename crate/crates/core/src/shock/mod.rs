//! Hugoniot loci of extremal families and the hypotheses checked along them.

pub mod continuation;
pub mod diperna;
pub mod geometry;
pub mod hypotheses;

pub use continuation::{hugoniot_locus, trace_locus, uniform_nodes, ContinuationOptions, Family, ShockCurvePoint, Tracer};
pub use diperna::{dissipation, fit_diperna_bounds, verify_diperna, DipernaFit};
pub use geometry::{gamma_a, in_r_a, r_a_geometry, scan_containment, ContainmentScan, RaGeometry};
pub use hypotheses::{check_liu_strength, check_admissibility, LiuStrengthReport, AdmissibilityReport};
