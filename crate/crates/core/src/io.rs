//! Oracle files.
//!
//! Layout: the 4 bytes `MFDO`, a little-endian `u32` format version, one kind
//! byte, then the oracle as a bincode payload (little-endian, fixed-width
//! integers).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use bincode::Options;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::approx::ApproxOracle;
use crate::decremental::BottleneckOracle;
use crate::error::IoError;
use crate::graph::{Dist, VertexId};
use crate::unweighted::UnweightedOracle;
use crate::weighted::WeightedOracle;

pub const MAGIC: &[u8; 4] = b"MFDO";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Unweighted,
    Weighted,
    Bottleneck,
    Approx,
}

impl OracleKind {
    pub fn tag(self) -> u8 {
        match self {
            OracleKind::Unweighted => 1,
            OracleKind::Weighted => 2,
            OracleKind::Bottleneck => 3,
            OracleKind::Approx => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self, IoError> {
        Ok(match tag {
            1 => OracleKind::Unweighted,
            2 => OracleKind::Weighted,
            3 => OracleKind::Bottleneck,
            4 => OracleKind::Approx,
            t => return Err(IoError::BadKind(t)),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Unweighted => "unweighted",
            OracleKind::Weighted => "weighted",
            OracleKind::Bottleneck => "bottleneck",
            OracleKind::Approx => "approx",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyOracle {
    Unweighted(UnweightedOracle),
    Weighted(WeightedOracle),
    Bottleneck(BottleneckOracle),
    Approx(ApproxOracle),
}

/// How weighted oracles pick boundary candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryMode {
    Randomized,
    Deterministic,
}

impl AnyOracle {
    pub fn kind(&self) -> OracleKind {
        match self {
            AnyOracle::Unweighted(_) => OracleKind::Unweighted,
            AnyOracle::Weighted(_) => OracleKind::Weighted,
            AnyOracle::Bottleneck(_) => OracleKind::Bottleneck,
            AnyOracle::Approx(_) => OracleKind::Approx,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyOracle::Unweighted(o) => o.n(),
            AnyOracle::Weighted(o) => o.n(),
            AnyOracle::Bottleneck(o) => o.n(),
            AnyOracle::Approx(o) => o.n(),
        }
    }

    /// Answer and probe count.
    pub fn query(&self, u: VertexId, v: VertexId, mode: QueryMode, rng: &mut impl Rng) -> (Dist, usize) {
        match self {
            AnyOracle::Unweighted(o) => (o.query(u, v), 0),
            AnyOracle::Weighted(o) => {
                let a = match mode {
                    QueryMode::Randomized => o.query_randomized_probes(u, v, rng),
                    QueryMode::Deterministic => o.query_deterministic_probes(u, v),
                };
                (a.dist, a.probes)
            }
            AnyOracle::Bottleneck(o) => {
                let a = o.query_probes(u, v);
                (a.dist, a.probes)
            }
            AnyOracle::Approx(o) => {
                let a = o.query_terms(u, v);
                (a.estimate, a.terms)
            }
        }
    }
}

fn codec() -> impl Options {
    bincode::DefaultOptions::new().with_fixint_encoding().with_little_endian()
}

pub fn write_oracle(mut w: impl Write, oracle: &AnyOracle) -> Result<(), IoError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[oracle.kind().tag()])?;
    let c = codec();
    match oracle {
        AnyOracle::Unweighted(o) => c.serialize_into(&mut w, o)?,
        AnyOracle::Weighted(o) => c.serialize_into(&mut w, o)?,
        AnyOracle::Bottleneck(o) => c.serialize_into(&mut w, o)?,
        AnyOracle::Approx(o) => c.serialize_into(&mut w, o)?,
    }
    w.flush()?;
    Ok(())
}

pub fn read_oracle(mut r: impl Read) -> Result<AnyOracle, IoError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| IoError::BadMagic)?;
    if &magic != MAGIC {
        return Err(IoError::BadMagic);
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != VERSION {
        return Err(IoError::BadVersion(version));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let kind = OracleKind::from_tag(tag[0])?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let c = codec();
    Ok(match kind {
        OracleKind::Unweighted => AnyOracle::Unweighted(c.deserialize(&payload)?),
        OracleKind::Weighted => AnyOracle::Weighted(c.deserialize(&payload)?),
        OracleKind::Bottleneck => AnyOracle::Bottleneck(c.deserialize(&payload)?),
        OracleKind::Approx => AnyOracle::Approx(c.deserialize(&payload)?),
    })
}

pub fn save_oracle(path: impl AsRef<Path>, oracle: &AnyOracle) -> Result<(), IoError> {
    write_oracle(BufWriter::new(File::create(path)?), oracle)
}

pub fn load_oracle(path: impl AsRef<Path>) -> Result<AnyOracle, IoError> {
    read_oracle(BufReader::new(File::open(path)?))
}
