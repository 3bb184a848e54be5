//! Two-stage Steiner forest routing with pipe types: instance data, a plain
//! MILP container with LP-format export, the six flow formulations, seeded
//! instance generators and an exhaustive reference solver for tiny cases.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

mod error;
pub mod graph;
pub mod instances;
pub mod lp_format;
pub mod milp;
pub mod models;
pub mod oracle;
pub mod unionfind;

pub use error::{InstanceError, ModelError};
pub use graph::{
    cost, validate_feasible, ArcIdx, EdgeIdx, EdgePipeSet, Feasibility, Graph, Instance, PipeCatalog, PipeIdx,
    TerminalGroups, TwoStageInstance, VertexIdx,
};
pub use milp::{
    relax, ConId, Constraint, MilpModel, MilpSolution, Sense, SolveStatus, VarId, VarKind, Variable,
    FEASIBILITY_TOLERANCE, INTEGRALITY_TOLERANCE,
};
pub use models::{build, BuiltModel, Flow, ModelKind, Optimization, SizeStats, Stage};
pub use oracle::{brute_force, OracleError, OracleSolution};
