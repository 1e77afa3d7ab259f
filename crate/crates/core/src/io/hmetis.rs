use std::io::{self, BufRead, Write};

use super::{parse_u64, parse_weight, syntax, Lines, ParseError, SyntaxError};
use crate::hypergraph::Hypergraph;

/// Parses the hMetis hypergraph format.
///
/// Header `|E| |V| [fmt]` with fmt 1 (edge weights lead each edge line),
/// 10 (one vertex weight line per vertex after the edges) or 11 (both).
/// Pins are 1-based in the file and 0-based in the result.
pub fn parse_hmetis<R: BufRead>(reader: R) -> Result<Hypergraph, ParseError> {
    let mut lines = Lines::new(reader, true);
    let (line, header) = lines
        .next_line()?
        .ok_or_else(|| syntax(1, SyntaxError::MissingHeader))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if !(2..=3).contains(&tokens.len()) {
        return Err(syntax(line, SyntaxError::BadHeader(header.to_string())));
    }
    let num_edges = parse_u64(line, tokens[0])? as usize;
    let num_vertices = parse_u64(line, tokens[1])? as usize;
    let (edge_weights, vertex_weights) = match tokens.get(2).copied() {
        None | Some("0") => (false, false),
        Some("1") => (true, false),
        Some("10") => (false, true),
        Some("11") => (true, true),
        Some(other) => return Err(syntax(line, SyntaxError::BadFormat(other.to_string()))),
    };

    let mut ew = Vec::with_capacity(num_edges);
    let mut offsets = Vec::with_capacity(num_edges + 1);
    offsets.push(0);
    let mut pins: Vec<usize> = Vec::new();
    let mut seen = vec![usize::MAX; num_vertices];
    for e in 0..num_edges {
        let (line, text) = match lines.next_line()? {
            Some(x) => x,
            None => {
                return Err(syntax(
                    lines.line() + 1,
                    SyntaxError::Truncated {
                        what: "hyperedge lines",
                        expected: num_edges - e,
                    },
                ))
            }
        };
        let mut tokens = text.split_whitespace();
        ew.push(if edge_weights {
            parse_weight(line, tokens.next().unwrap_or(""))?
        } else {
            1
        });
        for t in tokens {
            let p = parse_u64(line, t)?;
            if p == 0 || p as usize > num_vertices {
                return Err(syntax(
                    line,
                    SyntaxError::PinOutOfRange {
                        pin: p,
                        max: num_vertices,
                    },
                ));
            }
            let v = p as usize - 1;
            if seen[v] == e {
                return Err(syntax(line, SyntaxError::DuplicatePin(p)));
            }
            seen[v] = e;
            pins.push(v);
        }
        if pins.len() == *offsets.last().unwrap() {
            return Err(syntax(line, SyntaxError::EmptyEdge));
        }
        offsets.push(pins.len());
    }

    let mut vw = Vec::with_capacity(num_vertices);
    if vertex_weights {
        for v in 0..num_vertices {
            let (line, text) = match lines.next_line()? {
                Some(x) => x,
                None => {
                    return Err(syntax(
                        lines.line() + 1,
                        SyntaxError::Truncated {
                            what: "vertex weight lines",
                            expected: num_vertices - v,
                        },
                    ))
                }
            };
            let mut tokens = text.split_whitespace();
            vw.push(parse_weight(line, tokens.next().unwrap_or(""))?);
            if tokens.next().is_some() {
                return Err(syntax(line, SyntaxError::TrailingData));
            }
        }
    } else {
        vw.resize(num_vertices, 1);
    }
    lines.expect_end()?;
    Ok(Hypergraph::from_csr(vw, ew, offsets, pins)?)
}

/// Writes `hg` in hMetis format, always with both weight kinds (fmt 11).
pub fn write_hmetis<W: Write>(mut out: W, hg: &Hypergraph) -> io::Result<()> {
    let mut buf = format!("{} {} 11\n", hg.num_edges(), hg.num_vertices());
    for e in 0..hg.num_edges() {
        buf.push_str(&hg.edge_weight(e).to_string());
        for &v in hg.pins(e) {
            buf.push(' ');
            buf.push_str(&(v + 1).to_string());
        }
        buf.push('\n');
    }
    for v in 0..hg.num_vertices() {
        buf.push_str(&hg.vertex_weight(v).to_string());
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    out.flush()
}
