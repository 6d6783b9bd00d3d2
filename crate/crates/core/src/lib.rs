//! Construction and numerical verification of a family of switched linear
//! systems: a planar pair of Hurwitz matrices whose worst-case switching law
//! is periodic and norm-preserving, its four-matrix Kronecker lift, and the
//! switching-law simulation used to separate periodic from quasi-periodic
//! behaviour.

pub mod error;
pub mod lift;
pub mod planar;
pub mod simcore;
pub mod smallmat;

pub use error::{Error, Result};
