//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot parse rational: {0}")]
    BadRational(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("{0} does not divide {1}")]
    NotASubgroup(u64, u64),
    #[error("no field action for cyclic groups of order {0} > 2")]
    UnsupportedExtension(u64),
}

#[derive(Debug, Error)]
pub enum QuiverError {
    #[error("matrix is not skew-symmetrizable for the given weights")]
    NotSkewSymmetrizable,
    #[error("quiver has a 2-cycle between {0} and {1}, not matrix-representable")]
    TwoCycle(String, String),
    #[error("quiver has a 2-cycle through vertex {0}")]
    TwoCycleAt(String),
    #[error("unknown vertex: {0}")]
    UnknownVertex(String),
    #[error("unknown arrow: {0}")]
    UnknownArrow(String),
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("arrow {0} is a loop")]
    Loop(String),
    #[error("arrow label for {arrow} has modulus {got}, expected {want}")]
    BadLabelModulus { arrow: String, got: u64, want: u64 },
    #[error("arrows {0} and {1} are not composable through a common vertex")]
    NotComposable(String, String),
    #[error("restriction to an empty vertex set")]
    EmptyRestriction,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("arrows do not compose: {0} then {1}")]
    NonComposable(String, String),
    #[error("v placed at a weight-1 slot (vertex {0})")]
    VAtWeightOne(String),
    #[error("term is not a cycle: starts at {0}, ends at {1}")]
    NotCyclic(String, String),
    #[error("element is not supported in e_{0} .. e_{1}")]
    WrongSupport(String, String),
    #[error("unknown arrow: {0}")]
    UnknownArrow(String),
    #[error("unknown vertex: {0}")]
    UnknownVertex(String),
    #[error("arrow image for {arrow} is not supported in e_{head} m e_{tail}")]
    BadImageSupport { arrow: String, head: String, tail: String },
    #[error("arrow image for {0} is not isotypic for the arrow's label")]
    BadImageIsotype(String),
    #[error("substitution is not invertible")]
    NotInvertible,
    #[error("vertex twists are not allowed in a right-equivalence witness")]
    TwistedWitness,
    #[error("parse error in element text: {0}")]
    Parse(String),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Error)]
pub enum SpError {
    #[error("potential has a term through vertex {0} that cannot avoid it at both ends")]
    StuckAt(String),
    #[error("premutation requires 2-acyclicity at {0}")]
    TwoCycleAt(String),
    #[error("zero scalar supplied for puncture {0}")]
    ZeroScalar(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("unknown puzzle piece kind: {0}")]
    UnknownPieceKind(String),
    #[error("unknown side reference: {0}")]
    UnknownSide(String),
    #[error("side {0} matched twice")]
    SideMatchedTwice(String),
    #[error("matching glues two sides of the same piece side: {0}")]
    SelfMatch(String),
    #[error("assembled surface is a sphere with fewer than 7 marked points")]
    SmallSphere,
    #[error("gluing produced an inconsistent or non-orientable identification at {0}")]
    BadGluing(String),
    #[error("unknown arc: {0}")]
    UnknownArc(String),
    #[error("unknown puncture: {0}")]
    UnknownPuncture(String),
    #[error("unknown orbifold point: {0}")]
    UnknownOrbifold(String),
    #[error("arc {0} is not flippable in this configuration: {1}")]
    NotFlippable(String, String),
    #[error("scalar for puncture {0} must be nonzero")]
    ZeroScalar(String),
    #[error("arcs {0}, {1} do not form a self-folded triangle")]
    NotSelfFolded(String, String),
    #[error(transparent)]
    Sp(#[from] SpError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}
