//! Reading and writing hypergraphs, partitions and run records.
//!
//! Parsers work line by line on any [`BufRead`], so the result does not
//! depend on how the input stream is chunked.

mod hmetis;
mod metis;
mod record;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::hypergraph::{Hypergraph, HypergraphError};

pub use hmetis::{parse_hmetis, write_hmetis};
pub use metis::parse_metis_graph;
pub use record::{format_hash, PhaseHash, PhaseTimes, RunRecord};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {kind}")]
    Syntax { line: usize, kind: SyntaxError },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("missing header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("unsupported format code {0}")]
    BadFormat(String),
    #[error("expected a positive integer, found {0:?}")]
    BadNumber(String),
    #[error("pin {pin} out of range 1..={max}")]
    PinOutOfRange { pin: u64, max: usize },
    #[error("vertex {vertex} out of range 1..={max}")]
    VertexOutOfRange { vertex: u64, max: usize },
    #[error("duplicate pin {0}")]
    DuplicatePin(u64),
    #[error("empty hyperedge")]
    EmptyEdge,
    #[error("weight must be positive, found {0}")]
    NonPositiveWeight(i64),
    #[error("file ends early: expected {expected} more {what}")]
    Truncated { what: &'static str, expected: usize },
    #[error("unexpected trailing data")]
    TrailingData,
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("neighbor {0} listed twice")]
    DuplicateNeighbor(usize),
    #[error("adjacency is not symmetric: {0}")]
    Asymmetric(String),
    #[error("header announces {expected} edges but the adjacency lists contain {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("missing weight for neighbor {0}")]
    MissingEdgeWeight(usize),
    #[error("block ID {0:?} is not a non-negative integer")]
    BadBlock(String),
}

/// Input file formats understood by [`read_hypergraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Hmetis,
    Metis,
}

impl Format {
    /// `.hgr` is hMetis, `.graph` and `.metis` are Metis graphs.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "hgr" => Some(Format::Hmetis),
            "graph" | "metis" => Some(Format::Metis),
            _ => None,
        }
    }
}

pub fn read_hypergraph(path: &Path, format: Format) -> Result<Hypergraph, ParseError> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        Format::Hmetis => parse_hmetis(reader),
        Format::Metis => parse_metis_graph(reader),
    }
}

/// Iterator over `(line number, trimmed content)`, skipping `%` comments.
pub(crate) struct Lines<R> {
    reader: R,
    buf: String,
    line: usize,
    skip_blank: bool,
}

impl<R: BufRead> Lines<R> {
    pub(crate) fn new(reader: R, skip_blank: bool) -> Self {
        Self {
            reader,
            buf: String::new(),
            line: 0,
            skip_blank,
        }
    }

    pub(crate) fn line(&self) -> usize {
        self.line
    }

    /// Next meaningful line, or `None` at end of input.
    pub(crate) fn next_line(&mut self) -> Result<Option<(usize, &str)>, ParseError> {
        loop {
            self.buf.clear();
            if self.reader.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let t = self.buf.trim();
            if t.starts_with('%') || (self.skip_blank && t.is_empty()) {
                continue;
            }
            let t = self.buf.trim();
            return Ok(Some((self.line, t)));
        }
    }

    /// Fails if any non-comment, non-blank content remains.
    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        loop {
            self.buf.clear();
            if self.reader.read_line(&mut self.buf)? == 0 {
                return Ok(());
            }
            self.line += 1;
            let t = self.buf.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Err(syntax(self.line, SyntaxError::TrailingData));
            }
        }
    }
}

pub(crate) fn syntax(line: usize, kind: SyntaxError) -> ParseError {
    ParseError::Syntax { line, kind }
}

pub(crate) fn parse_u64(line: usize, token: &str) -> Result<u64, ParseError> {
    token
        .parse()
        .map_err(|_| syntax(line, SyntaxError::BadNumber(token.to_string())))
}

pub(crate) fn parse_weight(line: usize, token: &str) -> Result<i64, ParseError> {
    let w: i64 = token
        .parse()
        .map_err(|_| syntax(line, SyntaxError::BadNumber(token.to_string())))?;
    if w <= 0 {
        return Err(syntax(line, SyntaxError::NonPositiveWeight(w)));
    }
    Ok(w)
}

/// One block ID per line, in vertex order.
pub fn write_partition<W: Write>(mut out: W, assignment: &[usize]) -> io::Result<()> {
    let mut buf = String::with_capacity(assignment.len() * 3);
    for &b in assignment {
        buf.push_str(&b.to_string());
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    out.flush()
}

pub fn read_partition<R: BufRead>(reader: R) -> Result<Vec<usize>, ParseError> {
    let mut lines = Lines::new(reader, true);
    let mut assignment = Vec::new();
    while let Some((line, t)) = lines.next_line()? {
        let b = t
            .parse()
            .map_err(|_| syntax(line, SyntaxError::BadBlock(t.to_string())))?;
        assignment.push(b);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_round_trip() {
        let mut out = Vec::new();
        write_partition(&mut out, &[0, 0, 1, 1]).unwrap();
        assert_eq!(out, b"0\n0\n1\n1\n");
        assert_eq!(read_partition(&out[..]).unwrap(), vec![0, 0, 1, 1]);
        let err = read_partition(&b"0\nx\n"[..]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn format_detection() {
        assert_eq!(
            Format::from_path(Path::new("a/b.hgr")),
            Some(Format::Hmetis)
        );
        assert_eq!(Format::from_path(Path::new("x.graph")), Some(Format::Metis));
        assert_eq!(Format::from_path(Path::new("x.metis")), Some(Format::Metis));
        assert_eq!(Format::from_path(Path::new("x.txt")), None);
    }
}
