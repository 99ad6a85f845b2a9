//! Branches of algebraic curves at infinity, their directions, and the
//! translated curves obtained by reparametrizing a branch along a line.

pub mod newton;
pub mod poly;
pub mod translate;

pub use newton::{
    branch_of_space_curve, branch_residual, convergence_radius, is_squarefree_in_y, linear_branch_direction, log_log_slope,
    newton_polygon_at_infinity, predicted_residual_exponent, puiseux_determinations, puiseux_expand, BranchDirection,
    LeadingCoefficient, NewtonEdge, PairRelation, PuiseuxBranch, PuiseuxTerm, ResidualSeries, SpaceBranch,
};
pub use poly::{BivariatePoly, ExactBivariate, NumericBivariate, PolyCoeff};
pub use translate::{implicitize_branch, implicitize_pair, translate_branch, SeriesTerm, TruncatedSeries, NULLSPACE_TOLERANCE};

/// Serde adapter writing `Rational64` as `"p/q"`.
pub mod r64_str {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&r.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational64>, D::Error> {
            Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
        }
    }
}
