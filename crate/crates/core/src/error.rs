use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("missing header line")]
    MissingHeader,
    #[error("malformed input on line {line}: {content:?}")]
    Malformed { line: usize, content: String },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge {edge} has non-positive weight {weight}")]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("header declares {expected} edges, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StringError {
    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: u32, alphabet: u32 },
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },
    #[error("unknown string id {0}")]
    UnknownId(u32),
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected an unweighted graph")]
    WeightedInput,
    #[error("expected a weighted graph")]
    UnweightedInput,
    #[error("epsilon {0} outside (0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("bounded mode needs every weight >= 1, found {0}")]
    WeightBelowOne(f64),
    #[error("weight bound {bound} is below the largest weight {max}")]
    WeightBoundTooSmall { bound: f64, max: f64 },
    #[error("shift set must be finite and strictly increasing")]
    InvalidShifts,
    #[error("oracle was built without the Wiener pattern variant")]
    MissingWienerData,
    #[error("edge {tail}->{head} is not present")]
    AbsentEdge { tail: usize, head: usize },
    #[error("edge id {0} is not present")]
    AbsentEdgeId(usize),
    #[error("min-finding view returned a set that did not shrink at index {0}")]
    InconsistentView(usize),
    #[error("deterministic probe bound {bound} exceeded ({probes} probes) after {reseeds} reseeds")]
    ProbeBoundExceeded { probes: usize, bound: usize, reseeds: usize },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("not an oracle file")]
    BadMagic,
    #[error("unsupported oracle file version {0}")]
    BadVersion(u32),
    #[error("unknown oracle kind tag {0}")]
    BadKind(u8),
    #[error("corrupt payload: {0}")]
    Payload(#[from] bincode::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
