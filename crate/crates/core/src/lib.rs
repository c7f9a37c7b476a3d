//! Codec quality evaluation toolkit.
//!
//! The crate covers the full HEVC-versus-VVC style assessment chain:
//!
//! * [`catalog`]: scene tables, encode manifests and the processed-sequence catalog.
//! * [`frame`] and [`metrics`]: raw planar / Y4M ingestion, luma PSNR, SSIM,
//!   MS-SSIM, SI/TI and VMAF log ingestion.
//! * [`subjective`]: DSCQS differential scores, BT.500 observer screening,
//!   P.913 bias removal, DMOS with confidence intervals and Welch t-tests.
//! * [`bd`]: Bjontegaard delta rate and quality, including confidence-limit variants.
//! * [`correlation`]: logistic mapping and SROCC/PLCC/KROCC/RMSE.
//! * [`session`]: DSCQS session planning and the vote log format.
//! * [`pipeline`]: the end-to-end report bundle and plot series.

pub mod bd;
pub mod catalog;
pub mod correlation;
mod error;
pub mod frame;
pub mod metrics;
pub mod pipeline;
pub(crate) mod serde_util;
pub mod session;
pub mod special;
pub mod subjective;
pub mod synthetic;
pub mod table;

pub use error::{Error, Result};
