use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph order {0} exceeds the supported maximum of 64")]
    TooLarge(usize),
    #[error("vertex {vertex} out of range for order {order}")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("mapping is not a permutation")]
    NotAPermutation,
    #[error("{0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("literal 0 is not a literal")]
    ZeroLiteral,
    #[error("empty clause")]
    EmptyClause,
    #[error("variable {var} exceeds declared count {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("assignment covers {got} variables, formula declares {expected}")]
    AssignmentSize { got: usize, expected: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("brute-force oracle supports at most {limit} edges, graph has {edges}")]
    OracleBudget { edges: usize, limit: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("clause {index} has fewer than two variables; propagate units first")]
    ShortClause { index: usize },
    #[error("permutation maps a literal vertex to a clause vertex")]
    NotColorPreserving,
    #[error("literal permutation violates complement consistency at variable {0}")]
    Inconsistent(u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SbpError {
    #[error("plan mode is {found}, expected {expected}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("permutation over {found} variables, formula has {expected}")]
    PermutationSize { expected: u32, found: u32 },
    #[error("chain length {k} exceeds brute-force budget {limit}")]
    ChainBudget { k: usize, limit: usize },
    #[error("chain input slice has length {got}, expected {expected}")]
    ChainShape { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("projection variable {var} outside 1..={num_vars}")]
    ProjectionOutOfRange { var: u32, num_vars: u32 },
    #[error("projection set is empty")]
    EmptyProjection,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("model does not assign edge variable {0}")]
    MissingVariable(u32),
    #[error("no variable maps to edge {0:?}")]
    UnmappedEdge((usize, usize)),
    #[error("canonical form supports at most {limit} vertices, graph has {order}")]
    CanonicalBudget { order: usize, limit: usize },
    #[error("coloring has {got} entries, graph has {expected} edges")]
    Length { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Pipeline stage, used to tag failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Config,
    Encode,
    Symmetry,
    Sbp,
    Allsat,
    Coloring,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Encode => "encode",
            Stage::Symmetry => "symmetries",
            Stage::Sbp => "sbp",
            Stage::Allsat => "allsat",
            Stage::Coloring => "coloring",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, err: impl std::fmt::Display) -> Self {
        PipelineError {
            stage,
            message: err.to_string(),
        }
    }
}
