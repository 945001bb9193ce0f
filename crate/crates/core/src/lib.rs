//! Finite-section models of doubly commuting contraction tuples and of the
//! Hardy space over the Hilbert multidisk.
//!
//! Everything is dense and double precision. Infinite-dimensional objects are
//! cut at a total polynomial degree `d`, and every verifier reports the degree
//! cutoff on which its answer is exact (up to roundoff) together with any
//! truncation tail it could not remove.

pub mod charfn;
pub mod contraction;
pub mod dilation;
pub mod error;
pub mod hardy;
pub mod linops;
pub mod modules;
pub mod random;

pub use contraction::{BlaschkeProduct, ContractionTuple, MoebiusPoint, ValidationReport};
pub use error::{Error, Result};
pub use hardy::{HardyBasis, HardyOperator, HardyVector, KernelPoint, MatPoly, MultiIndex};
pub use linops::{ComplexMatrix, ComplexVector, Subspace, C64};
pub use modules::{InnerSymbol, QuotientHandle, SubmoduleHandle};
