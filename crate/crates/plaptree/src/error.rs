use thiserror::Error;

/// Errors raised while building or transforming a tree.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("no root entry: every vertex names a parent")]
    NoRoot,
    #[error("multiple root entries: {0:?} and {1:?}")]
    MultipleRoots(String, String),
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("unknown parent {parent:?} referenced by vertex {child:?}")]
    UnknownParent { child: String, parent: String },
    #[error("vertex {0:?} is unreachable from the root (cyclic or disconnected input)")]
    Unreachable(String),
    #[error("nonpositive or nonfinite weight {value} on vertex {id:?}")]
    BadWeight { id: String, value: f64 },
    #[error("missing edge weight on non-root vertex {0:?}")]
    MissingEdgeWeight(String),
    #[error("root vertex {0:?} must not carry an edge weight")]
    RootEdgeWeight(String),
    #[error("the root must have at least one child")]
    ChildlessRoot,
    #[error("level {m} out of range 1..={max}")]
    LevelOutOfRange { m: u32, max: u32 },
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),
    #[error("parameter {name} = {value} outside {range}")]
    BadParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("derived weight overflowed to a nonfinite value at vertex {0:?}")]
    NonFinite(String),
}
