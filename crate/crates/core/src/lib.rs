//! URDF parsing, validation and corpus analysis.

pub mod bundle;
pub mod compare;
pub mod corpus;
pub mod dedup;
pub mod kinematics;
pub mod model;
pub mod report;
pub mod validate;

pub use kinematics::{
    build_tree, fk_equivalent, forward_kinematics, FkComparison, FkOptions, JointConfig,
    KinematicTree, Transform, TreeError,
};
pub use model::{line_count, parse_urdf, ParseFailure, RobotModel};
pub use validate::{kinematic_sanity, validate, Code, Diagnostic, Severity, Validation};
pub use corpus::{analyze_corpus, BundleAnalysis, CorpusAnalysis};
pub use report::{emit, Format, ReportTable};
