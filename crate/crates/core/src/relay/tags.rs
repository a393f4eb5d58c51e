//! Detector time tags and their on-disk formats.
//!
//! The binary dump is `b"QRTT"`, a little-endian `u16` version, a 32-byte
//! SHA-256 digest of the configuration that produced the stream, then one
//! 9-byte record per tag: `u8` channel index followed by `u64` time in ps.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TAG_MAGIC: &[u8; 4] = b"QRTT";
pub const TAG_FORMAT_VERSION: u16 = 1;

/// Detector channel. D1 and D2 form the Bell-state measurement, D3 and D4
/// are Bob's two polarization outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    D1,
    D2,
    D3,
    D4,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::D1, Channel::D2, Channel::D3, Channel::D4];

    pub fn index(self) -> u8 {
        match self {
            Channel::D1 => 0,
            Channel::D2 => 1,
            Channel::D3 => 2,
            Channel::D4 => 3,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        Self::ALL
            .get(i as usize)
            .copied()
            .ok_or_else(|| Error::Format(format!("channel index {i} out of range")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::D1 => "D1",
            Channel::D2 => "D2",
            Channel::D3 => "D3",
            Channel::D4 => "D4",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "D1" | "0" => Ok(Channel::D1),
            "D2" | "1" => Ok(Channel::D2),
            "D3" | "2" => Ok(Channel::D3),
            "D4" | "3" => Ok(Channel::D4),
            other => Err(Error::Format(format!("unknown channel {other:?}"))),
        }
    }
}

/// One detection event. Ordering is by time, ties broken by channel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeTag {
    pub t_ps: i64,
    pub channel: Channel,
}

impl TimeTag {
    pub fn new(channel: Channel, t_ps: i64) -> Self {
        Self { t_ps, channel }
    }
}

impl PartialOrd for TimeTag {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeTag {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.t_ps, self.channel).cmp(&(other.t_ps, other.channel))
    }
}

pub fn is_sorted(tags: &[TimeTag]) -> bool {
    tags.windows(2).all(|w| w[0] <= w[1])
}

/// SHA-256 digest of a serialized configuration.
pub fn config_hash(serialized: &[u8]) -> [u8; 32] {
    Sha256::digest(serialized).into()
}

/// Streaming writer for the binary tag format.
pub struct TagWriter<W: Write> {
    inner: W,
    last: Option<TimeTag>,
    written: u64,
}

impl<W: Write> TagWriter<W> {
    pub fn new(mut inner: W, hash: &[u8; 32]) -> Result<Self> {
        inner.write_all(TAG_MAGIC)?;
        inner.write_all(&TAG_FORMAT_VERSION.to_le_bytes())?;
        inner.write_all(hash)?;
        Ok(Self { inner, last: None, written: 0 })
    }

    /// Appends tags; they must continue the ascending order of previous calls.
    pub fn write(&mut self, tags: &[TimeTag]) -> Result<()> {
        let mut buf = Vec::with_capacity(tags.len() * 9);
        for tag in tags {
            if tag.t_ps < 0 {
                return Err(Error::Precondition(format!("negative time tag {}", tag.t_ps)));
            }
            if self.last.is_some_and(|l| l > *tag) {
                return Err(Error::Precondition("tags written out of order".into()));
            }
            self.last = Some(*tag);
            buf.push(tag.channel.index());
            buf.extend_from_slice(&(tag.t_ps as u64).to_le_bytes());
        }
        self.inner.write_all(&buf)?;
        self.written += tags.len() as u64;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Reads a whole binary dump, returning the configuration digest and tags.
pub fn read_tags_binary<R: Read>(mut reader: R) -> Result<([u8; 32], Vec<TimeTag>)> {
    let mut head = [0u8; 38];
    reader.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
    if &head[0..4] != TAG_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != TAG_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut hash = [0u8; 32];
    hash.copy_from_slice(&head[6..38]);
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    if body.len() % 9 != 0 {
        return Err(Error::Format("trailing partial record".into()));
    }
    let tags = body
        .chunks_exact(9)
        .map(|rec| {
            let ch = Channel::from_index(rec[0])?;
            let t = u64::from_le_bytes(rec[1..9].try_into().expect("8-byte slice"));
            let t = i64::try_from(t).map_err(|_| Error::Format("time overflows i64".into()))?;
            Ok(TimeTag::new(ch, t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((hash, tags))
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    channel: String,
    t_ps: i64,
}

pub fn write_tags_csv<W: Write>(writer: W, tags: &[TimeTag]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for tag in tags {
        w.serialize(CsvRow { channel: tag.channel.name().to_string(), t_ps: tag.t_ps })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tags_csv<R: Read>(reader: R) -> Result<Vec<TimeTag>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(TimeTag::new(Channel::parse(&row.channel)?, row.t_ps))
        })
        .collect()
}
