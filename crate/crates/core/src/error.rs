use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({re}, {im}) is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },
    #[error("|a|^2 - |b|^2 = {det}, expected 1")]
    NotInSu11 { det: f64 },
    #[error("{{{p},{q}}} is not hyperbolic: (p-2)(q-2) <= 4")]
    NonHyperbolicPattern { p: usize, q: usize },
    #[error("point pairs are not congruent: source distance {from}, target distance {to}")]
    DistanceMismatch { from: f64, to: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuchsianError {
    #[error("invalid Bravais signature {{{p_b},{q_b}}} for genus {genus}: {reason}")]
    InvalidSignature {
        p_b: usize,
        q_b: usize,
        genus: usize,
        reason: String,
    },
    #[error("relator residual {residual:e} exceeds tolerance")]
    RelatorViolation { residual: f64 },
    #[error("side pairing {generator} misses its target edge by {error:e}")]
    SidePairingMismatch { generator: usize, error: f64 },
    #[error("angle sum {sum} at vertex class {class} differs from 2π")]
    AngleCondition { class: usize, sum: f64 },
    #[error("generator {generator} is not a hyperbolic translation")]
    NotTranslation { generator: usize },
    #[error("could not express generator {generator} as a word in the independent generators")]
    DependentWordNotFound { generator: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuotientError {
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("generator {generator}: {reason}")]
    InvalidPermutation { generator: usize, reason: String },
    #[error("relator evaluates to a non-identity permutation (moves coset {moved})")]
    RelatorNotIdentity { moved: usize },
    #[error("action is not transitive: orbit of coset 1 has size {orbit} of {index}")]
    NotTransitive { orbit: usize, index: usize },
    #[error(
        "action is not regular: generated group order exceeds index {index} (element moving coset {witness} found)"
    )]
    NotRegular { index: usize, witness: usize },
    #[error("signature mismatch: {left} vs {right}")]
    SignatureMismatch { left: String, right: String },
    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: i64, max: usize },
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error(
        "unit cell coverage failed: {found} sites found, {expected} expected after {generated} generated vertices"
    )]
    CoverageFailure {
        found: usize,
        expected: usize,
        generated: usize,
    },
    #[error("degree violation at vertices {vertices:?} (expected degree {expected})")]
    DegreeViolation { vertices: Vec<usize>, expected: usize },
    #[error("non-integer count: {what}")]
    NonIntegerCount { what: String },
    #[error("edge {edge} lies in {count} faces, expected 2")]
    NotTwoManifold { edge: usize, count: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph parse error: {0}")]
    ParseError(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("basis incomplete: no admissible cycle for slot {slot}")]
    BasisIncomplete { slot: usize },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CssError {
    #[error("logical pairing matrix is singular (rank {rank} of {expected})")]
    PairingDegenerate { rank: usize, expected: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("syndrome has an odd number of defects ({0})")]
    OddDefectCount(usize),
    #[error("error and correction do not close into a cycle ({0} defects remain)")]
    ResidualHasSyndrome(usize),
    #[error("defect {0} cannot reach any partner")]
    Unreachable(usize),
    #[error("logical parity and stabilizer-span classification disagree")]
    ClassificationMismatch,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Css(#[from] CssError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Name of the innermost error variant, as printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Geometry(e) => geometry_name(e),
            Error::Fuchsian(e) => fuchsian_name(e),
            Error::Quotient(e) => quotient_name(e),
            Error::Lattice(e) => lattice_name(e),
            Error::Cycle(e) => match e {
                CycleError::Disconnected => "Disconnected",
                CycleError::BasisIncomplete { .. } => "BasisIncomplete",
                CycleError::InvariantViolation(_) => "InvariantViolation",
            },
            Error::Css(e) => match e {
                CssError::PairingDegenerate { .. } => "PairingDegenerate",
                CssError::DimensionMismatch { .. } => "DimensionMismatch",
                CssError::InvariantViolation(_) => "InvariantViolation",
            },
            Error::Decode(e) => match e {
                DecodeError::OddDefectCount(_) => "OddDefectCount",
                DecodeError::ResidualHasSyndrome(_) => "ResidualHasSyndrome",
                DecodeError::Unreachable(_) => "Unreachable",
                DecodeError::ClassificationMismatch => "ClassificationMismatch",
            },
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::InsufficientData(_) => "InsufficientData",
            Error::Io { .. } => "IoError",
        }
    }
}

fn geometry_name(e: &GeometryError) -> &'static str {
    match e {
        GeometryError::OutsideDisk { .. } => "OutsideDisk",
        GeometryError::NotInSu11 { .. } => "NotInSu11",
        GeometryError::NonHyperbolicPattern { .. } => "NonHyperbolicPattern",
        GeometryError::DistanceMismatch { .. } => "DistanceMismatch",
    }
}

fn fuchsian_name(e: &FuchsianError) -> &'static str {
    match e {
        FuchsianError::InvalidSignature { .. } => "InvalidSignature",
        FuchsianError::RelatorViolation { .. } => "RelatorViolation",
        FuchsianError::SidePairingMismatch { .. } => "SidePairingMismatch",
        FuchsianError::AngleCondition { .. } => "AngleCondition",
        FuchsianError::NotTranslation { .. } => "NotTranslation",
        FuchsianError::DependentWordNotFound { .. } => "DependentWordNotFound",
        FuchsianError::Geometry(g) => geometry_name(g),
    }
}

fn quotient_name(e: &QuotientError) -> &'static str {
    match e {
        QuotientError::ParseError(_) => "ParseError",
        QuotientError::InvalidPermutation { .. } => "InvalidPermutation",
        QuotientError::RelatorNotIdentity { .. } => "RelatorNotIdentity",
        QuotientError::NotTransitive { .. } => "NotTransitive",
        QuotientError::NotRegular { .. } => "NotRegular",
        QuotientError::SignatureMismatch { .. } => "SignatureMismatch",
        QuotientError::IndexOutOfRange { .. } => "IndexOutOfRange",
        QuotientError::Fuchsian(f) => fuchsian_name(f),
    }
}

fn lattice_name(e: &LatticeError) -> &'static str {
    match e {
        LatticeError::CoverageFailure { .. } => "CoverageFailure",
        LatticeError::DegreeViolation { .. } => "DegreeViolation",
        LatticeError::NonIntegerCount { .. } => "NonIntegerCount",
        LatticeError::NotTwoManifold { .. } => "NotTwoManifold",
        LatticeError::Disconnected => "Disconnected",
        LatticeError::ParseError(_) => "ParseError",
        LatticeError::CountMismatch(_) => "CountMismatch",
        LatticeError::Geometry(g) => geometry_name(g),
        LatticeError::Fuchsian(f) => fuchsian_name(f),
        LatticeError::Quotient(q) => quotient_name(q),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
