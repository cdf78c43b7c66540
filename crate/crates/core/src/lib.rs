//! Intrinsic reference basis (IRB) decomposition of density operators and
//! simulation of IRB-selective Lindblad dynamics.
//!
//! Every numerical routine is generic over the scalar type through
//! [`Real`]; the `*F64` / `*F32` aliases below name the concrete types.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod matrix;
pub mod scalar;

pub mod density;
pub mod irb;
pub mod io;
pub mod diagnostics;
pub mod dynamics;
pub mod classicalization;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub use classicalization::{ArrowReport, ClassicalityVerdict, EpsilonScan, FrameConsistencyReport, RobustnessReport};
pub use density::{DensityOperator, HermitianObservable};
pub use diagnostics::{DiagnosticOptions, DiagnosticsReport};
pub use dynamics::{Channel, GkslGenerator, RateMatrix, SelectivityCertificate, Trajectory};
pub use irb::{BlockPartition, IrbFrame, RealSplit};
pub use linalg::SpectralDecomposition;
pub use matrix::{CMatrix, Matrix, RMatrix};

pub type DensityOperatorF64 = DensityOperator<f64>;
pub type DensityOperatorF32 = DensityOperator<f32>;
pub type HermitianObservableF64 = HermitianObservable<f64>;
pub type HermitianObservableF32 = HermitianObservable<f32>;
pub type IrbFrameF64 = IrbFrame<f64>;
pub type IrbFrameF32 = IrbFrame<f32>;
pub type DiagnosticsReportF64 = DiagnosticsReport<f64>;
pub type DiagnosticsReportF32 = DiagnosticsReport<f32>;
pub type GkslGeneratorF64 = GkslGenerator<f64>;
pub type GkslGeneratorF32 = GkslGenerator<f32>;
pub type RateMatrixF64 = RateMatrix<f64>;
pub type RateMatrixF32 = RateMatrix<f32>;
pub type SelectivityCertificateF64 = SelectivityCertificate<f64>;
pub type SelectivityCertificateF32 = SelectivityCertificate<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type ClassicalityVerdictF64 = ClassicalityVerdict<f64>;
pub type ClassicalityVerdictF32 = ClassicalityVerdict<f32>;
pub type FrameConsistencyReportF64 = FrameConsistencyReport<f64>;
pub type FrameConsistencyReportF32 = FrameConsistencyReport<f32>;
