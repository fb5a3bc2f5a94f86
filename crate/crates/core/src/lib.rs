//! Partition rank, Schmidt rank, bias and singular-locus counting for
//! multilinear and homogeneous forms over finite fields, the integers and
//! the rationals, together with rank-descent and embedding tools.

pub mod audit;
pub mod bias;
pub mod corpus;
pub mod descent;
pub mod error;
pub mod field;
pub mod forms;
pub mod geometry;
pub mod json;
pub mod linalg;
pub mod rank;
pub mod ring;
pub mod universality;

pub use error::{Error, Result};
pub use field::{FiniteField, Fq};
pub use forms::{FormCollection, HomogeneousForm, LinearMapTuple, MultilinearForm};
pub use ring::{AnyRing, CoeffRing, Integers, Rationals};
