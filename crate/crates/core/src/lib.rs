//! Wavelet filter banks as polynomial loops: factorization, the induced
//! Cuntz-algebra representations, local cascades and classification of the
//! two-angle genus-3 family.

pub mod cascade;
pub mod cuntzrep;
pub mod error;
pub mod filterbank;
pub mod linalg;
pub mod loopgroup;
pub mod polyalg;
pub mod waveclass;

pub use error::{Error, Result};
pub use filterbank::FilterBank;
pub use loopgroup::{MatrixLoop, TwoParamPoint};
pub use polyalg::ComplexPoly;
