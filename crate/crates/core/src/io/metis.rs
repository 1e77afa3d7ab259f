use std::io::BufRead;

use super::{parse_u64, parse_weight, syntax, Lines, ParseError, SyntaxError};
use crate::hypergraph::Hypergraph;

/// Parses a Metis graph; every undirected edge becomes one hyperedge of
/// size 2, so the connectivity metric equals the edge cut.
///
/// Header `n m [fmt [ncon]]` where fmt is `001` (edge weights), `010`
/// (vertex weights) or `011`. Blank lines are vertices without neighbors.
/// Each edge is kept once, in the order it first appears from its smaller
/// endpoint.
pub fn parse_metis_graph<R: BufRead>(reader: R) -> Result<Hypergraph, ParseError> {
    let mut lines = Lines::new(reader, false);
    let (line, header) = loop {
        match lines.next_line()? {
            None => return Err(syntax(1, SyntaxError::MissingHeader)),
            Some((_, "")) => continue,
            Some((line, text)) => break (line, text.to_string()),
        }
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if !(2..=4).contains(&tokens.len()) {
        return Err(syntax(line, SyntaxError::BadHeader(header.clone())));
    }
    let n = parse_u64(line, tokens[0])? as usize;
    let m = parse_u64(line, tokens[1])? as usize;
    let fmt = tokens.get(2).copied().unwrap_or("0");
    if fmt.len() > 3 || !fmt.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(syntax(line, SyntaxError::BadFormat(fmt.to_string())));
    }
    let fmt = format!("{fmt:0>3}");
    if fmt.as_bytes()[0] == b'1' {
        return Err(syntax(
            line,
            SyntaxError::BadFormat(format!("{fmt} (vertex sizes)")),
        ));
    }
    let vertex_weights = fmt.as_bytes()[1] == b'1';
    let edge_weights = fmt.as_bytes()[2] == b'1';
    if let Some(&ncon) = tokens.get(3) {
        if ncon != "1" {
            return Err(syntax(line, SyntaxError::BadFormat(format!("ncon {ncon}"))));
        }
    }

    let mut vw = Vec::with_capacity(n);
    // (smaller endpoint, larger endpoint, weight, line)
    let mut forward: Vec<(usize, usize, i64)> = Vec::with_capacity(m);
    let mut backward: Vec<(usize, usize, i64, usize)> = Vec::with_capacity(m);
    let mut seen = vec![usize::MAX; n];
    for u in 0..n {
        let (line, text) = match lines.next_line()? {
            Some(x) => x,
            None => {
                return Err(syntax(
                    lines.line() + 1,
                    SyntaxError::Truncated {
                        what: "vertex lines",
                        expected: n - u,
                    },
                ))
            }
        };
        let mut tokens = text.split_whitespace();
        vw.push(if vertex_weights {
            parse_weight(line, tokens.next().unwrap_or(""))?
        } else {
            1
        });
        while let Some(t) = tokens.next() {
            let x = parse_u64(line, t)?;
            if x == 0 || x as usize > n {
                return Err(syntax(
                    line,
                    SyntaxError::VertexOutOfRange { vertex: x, max: n },
                ));
            }
            let v = x as usize - 1;
            let w = if edge_weights {
                let t = tokens
                    .next()
                    .ok_or_else(|| syntax(line, SyntaxError::MissingEdgeWeight(x as usize)))?;
                parse_weight(line, t)?
            } else {
                1
            };
            if v == u {
                return Err(syntax(line, SyntaxError::SelfLoop(u + 1)));
            }
            if seen[v] == u {
                return Err(syntax(line, SyntaxError::DuplicateNeighbor(v + 1)));
            }
            seen[v] = u;
            if u < v {
                forward.push((u, v, w));
            } else {
                backward.push((v, u, w, line));
            }
        }
    }
    lines.expect_end()?;

    let mut fwd_sorted = forward.clone();
    fwd_sorted.sort_unstable();
    backward.sort_unstable();
    let mut i = 0;
    for &(a, b, w, line) in &backward {
        match fwd_sorted.get(i) {
            Some(&f) if f == (a, b, w) => i += 1,
            _ => {
                return Err(syntax(
                    line,
                    SyntaxError::Asymmetric(format!(
                        "vertex {} lists {} (weight {w}) but not vice versa",
                        b + 1,
                        a + 1
                    )),
                ))
            }
        }
    }
    if let Some(&(a, b, _)) = fwd_sorted.get(i) {
        return Err(syntax(
            lines.line(),
            SyntaxError::Asymmetric(format!(
                "vertex {} lists {} but not vice versa",
                a + 1,
                b + 1
            )),
        ));
    }
    if forward.len() != m {
        return Err(syntax(
            line,
            SyntaxError::EdgeCountMismatch {
                expected: m,
                found: forward.len(),
            },
        ));
    }

    let ew = forward.iter().map(|&(_, _, w)| w).collect();
    let pins = forward.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    let offsets = (0..=forward.len()).map(|i| 2 * i).collect();
    Ok(Hypergraph::from_csr(vw, ew, offsets, pins)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Hypergraph, ParseError> {
        parse_metis_graph(s.as_bytes())
    }

    fn kind(r: Result<Hypergraph, ParseError>) -> SyntaxError {
        match r {
            Err(ParseError::Syntax { kind, .. }) => kind,
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn triangle() {
        let hg = parse("3 3\n2 3\n1 3\n1 2\n").unwrap();
        assert_eq!(hg.num_edges(), 3);
        assert_eq!(hg.pins(0), &[0, 1]);
        assert_eq!(hg.pins(1), &[0, 2]);
        assert_eq!(hg.pins(2), &[1, 2]);
        assert!((0..3).all(|e| hg.edge_size(e) == 2));
    }

    #[test]
    fn weights_and_isolated_vertices() {
        let hg = parse("4 2 001\n2 5\n1 5 3 7\n2 7\n\n").unwrap();
        assert_eq!(hg.num_vertices(), 4);
        assert_eq!(hg.edge_weights(), &[5, 7]);
        let hg = parse("3 1 11 1\n4 2 9\n6 1 9\n8\n").unwrap();
        assert_eq!(hg.vertex_weights(), &[4, 6, 8]);
        assert_eq!(hg.edge_weights(), &[9]);
        let hg = parse("% c\n2 1 010\n3 2\n4 1\n").unwrap();
        assert_eq!(hg.vertex_weights(), &[3, 4]);
    }

    #[test]
    fn malformed_graphs() {
        assert!(matches!(
            kind(parse("2 1\n2\n\n")),
            SyntaxError::Asymmetric(_)
        ));
        assert!(matches!(
            kind(parse("2 1 1\n2 3\n1 4\n")),
            SyntaxError::Asymmetric(_)
        ));
        assert_eq!(kind(parse("2 1\n1\n\n")), SyntaxError::SelfLoop(1));
        assert_eq!(
            kind(parse("2 1\n2 2\n1\n")),
            SyntaxError::DuplicateNeighbor(2)
        );
        assert_eq!(
            kind(parse("2 2\n2\n1\n")),
            SyntaxError::EdgeCountMismatch {
                expected: 2,
                found: 1
            }
        );
        assert_eq!(
            kind(parse("3 1\n2\n1\n")),
            SyntaxError::Truncated {
                what: "vertex lines",
                expected: 1
            }
        );
        assert!(matches!(
            kind(parse("2 1 100\n2\n1\n")),
            SyntaxError::BadFormat(_)
        ));
        assert_eq!(
            kind(parse("2 1 1\n2\n1 1\n")),
            SyntaxError::MissingEdgeWeight(2)
        );
    }
}
