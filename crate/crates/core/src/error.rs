use thiserror::Error;

/// Invalid instance data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("vertex labels must be positive and strictly increasing")]
    BadLabels,
    #[error("edge refers to unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("catalog needs at least one pipe type")]
    NoPipeTypes,
    #[error("edge {edge} lists {found} pipe costs, expected {expected}")]
    CostRowLength { edge: usize, expected: usize, found: usize },
    #[error("cost of pipe {pipe} on edge {edge} must be positive and finite, got {value}")]
    NonPositiveCost { pipe: usize, edge: usize, value: f64 },
    #[error("pipe catalog covers {costed} edges but the graph has {edges}")]
    CatalogMismatch { edges: usize, costed: usize },
    #[error("pipe type {0} out of range")]
    PipeOutOfRange(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("instance has no terminal groups")]
    NoGroups,
    #[error("terminal group {0} has fewer than two vertices")]
    SmallGroup(usize),
    #[error("vertex index {0} belongs to more than one terminal group")]
    OverlappingGroups(usize),
    #[error("terminal group {0} out of range")]
    GroupOutOfRange(usize),
    #[error("no feasible pipe types")]
    NoFeasiblePipes,
    #[error("no admissible edges")]
    NoAdmissibleEdges,
    #[error("terminal group {0} is not connected through admissible edges")]
    DisconnectedGroup(usize),
    #[error("cost multiplier must be finite and at least 1, got {0}")]
    BadMultiplier(f64),
    #[error("scenario {scenario} multiplier must exceed 1, got {value}")]
    ScenarioMultiplier { scenario: usize, value: f64 },
    #[error("at least one scenario is required")]
    NoScenarios,
    #[error("scenario {0} does not share the first stage's graph and pipe catalog")]
    ForeignScenario(usize),
    #[error("scenario probabilities must be non-negative, one per scenario, and sum to 1")]
    BadProbabilities,
}

/// Errors raised while building or editing a [`crate::milp::MilpModel`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(alloc::string::String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(alloc::string::String),
    #[error("unknown variable handle {0}")]
    UnknownVariable(usize),
    #[error("invalid bounds [{lower}, {upper}] for `{name}`")]
    InvalidBounds { name: alloc::string::String, lower: f64, upper: f64 },
    #[error("coefficient for `{0}` is not finite")]
    NonFinite(alloc::string::String),
}
