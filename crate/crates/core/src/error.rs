use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("not an ultrametric: {0} violating triple(s)")]
    NotUltrametric(usize),

    #[error("empty space")]
    EmptySpace,

    #[error("invalid ball isometry: {0}")]
    InvalidBallIsometry(String),

    #[error("invalid tree system: {0}")]
    InvalidTree(String),

    #[error("procedural tree system `{0}` must be unfolded to a finite depth first")]
    NeedsTruncation(String),

    #[error("level {requested} is beyond the {available} level(s) described")]
    BeyondDepth { requested: usize, available: usize },

    #[error("invalid cuts: {0}")]
    InvalidCuts(String),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("presentation is not eventually periodic")]
    NotEventuallyPeriodic,

    #[error("period matrix is not primitive")]
    NotPrimitive,

    #[error("tree system is not locally rigid")]
    NotLocallyRigid,

    #[error("level {level} lies above the rigidity level {epsilon}")]
    AboveRigidityLevel { level: usize, epsilon: usize },

    #[error("points belong to different trees")]
    DifferentTrees,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("germs are not composable")]
    NotComposable,

    #[error("invalid prefix map: {0}")]
    InvalidPrefixMap(String),

    #[error("{0}")]
    Incompatible(String),
}
