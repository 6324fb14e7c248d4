//! Artin-Schreier covers of the projective line in characteristic p, their
//! degeneration over a disc, Hurwitz trees, exact differential forms and the
//! stratification of the moduli space of Artin-Schreier curves.

pub mod algebra;
pub mod cli;
pub mod forms;
pub mod moduli;
pub mod swan;
pub mod tree;
pub mod valuation;

/// Exact rationals used for depths, radii and thicknesses.
pub type Q = num_rational::Ratio<i64>;

pub(crate) fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}
