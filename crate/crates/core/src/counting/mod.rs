//! Counting rational points on the periodic set and bounding Galois orbits
//! of torsion points.

pub mod divpoly;
pub mod enumerate;
pub mod modp;
pub mod orbits;
pub mod probe;

pub use divpoly::{division_polynomial, primitive_division_polynomial, QPoly, UnivariateIntPoly};
pub use enumerate::{
    counting_table, counts_csv, enumerate_rational_points, exact_order_counts, fit_exponent, merge_shards, mobius, shard_plan,
    ClassifiedPoint, CountRecord, CountingTable, DivisibilityCheck, ExactOrderCount,
};
pub use orbits::{default_primes, orbit_degree_lower_bound, orbits_csv, product_orbit_bound, OrbitBoundRecord};
pub use probe::{uniform_intersection_bound_probe, uniform_intersection_bound_probe_with, CurveProbe, ProbeBall, ProbeOptions, ProbeResult};
