use rayon::prelude::*;

use crate::hypergraph::{Fraction, GainScratch, PartitionState, Weight};

/// A proposed move with the gain it has in the current partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub vertex: usize,
    pub to: usize,
    pub gain: Weight,
}

/// For every unlocked vertex, the block with the highest gain (ties to the
/// smaller block ID). The vertex is kept if `gain ≥ −τ · Σ ω(e)` over
/// incident edges with another pin in its block. Balance is ignored.
/// Vertices without any edge to another pin are skipped. The result is
/// sorted by vertex.
pub fn move_candidates(state: &PartitionState<'_>, tau: Fraction, locked: &[bool]) -> Vec<Candidate> {
    let k = state.k();
    (0..state.hypergraph().num_vertices())
        .into_par_iter()
        .filter(|&v| !locked.get(v).copied().unwrap_or(false))
        .map_init(
            || GainScratch::new(k),
            |scratch, v| {
                let profile = state.gain_profile(v, scratch);
                // Adjacent blocks always beat non-adjacent ones, which all
                // share the gain −internal.
                let (to, connection) = match state
                    .adjacent_blocks(scratch)
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                {
                    Some(best) => best,
                    None if profile.internal > 0 && k > 1 => (usize::from(state.block(v) == 0), 0),
                    None => return None,
                };
                let gain = profile.gain(connection);
                let threshold = tau.num() as i128 * profile.internal as i128;
                (gain as i128 * tau.den() as i128 >= -threshold).then_some(Candidate { vertex: v, to, gain })
            },
        )
        .flatten_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::running_example;
    use crate::hypergraph::{BalanceConstraint, Hypergraph};

    fn state(hg: &Hypergraph, a: Vec<usize>) -> PartitionState<'_> {
        PartitionState::new(hg, BalanceConstraint::uniform(hg.total_vertex_weight(), 2, Fraction::ONE), a).unwrap()
    }

    fn frac(s: &str) -> Fraction {
        s.parse().unwrap()
    }

    #[test]
    fn temperature_filter() {
        let hg = running_example();
        let s = state(&hg, vec![0, 0, 1, 1]);
        let at = |tau: &str| -> Vec<(usize, Weight)> {
            move_candidates(&s, frac(tau), &[])
                .iter()
                .map(|c| (c.vertex, c.gain))
                .collect()
        };
        // 0, 1 and 2 can switch sides at gain 0 (e0 stays cut)
        assert_eq!(at("0"), vec![(0, 0), (1, 0), (2, 0)]);
        // vertex 3: gain −1 towards block 0, penalty base ω(e1) = 1
        assert_eq!(at("1"), vec![(0, 0), (1, 0), (2, 0), (3, -1)]);
        assert_eq!(at("0.5"), vec![(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn isolated_and_locked_vertices_are_skipped() {
        let hg = Hypergraph::unweighted(3, &[vec![0, 1]]).unwrap();
        let s = state(&hg, vec![0, 1, 0]);
        let c = move_candidates(&s, Fraction::ZERO, &[]);
        assert_eq!(c.iter().map(|c| c.vertex).collect::<Vec<_>>(), vec![0, 1]);
        let c = move_candidates(&s, Fraction::ZERO, &[true, false, false]);
        assert_eq!(c.iter().map(|c| c.vertex).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn ties_prefer_smaller_block() {
        // vertex 0 in block 2 has one edge into block 0 and one into block 1;
        // both moves free one edge and cut the other
        let hg = Hypergraph::unweighted(3, &[vec![0, 1], vec![0, 2]]).unwrap();
        let s = PartitionState::new(
            &hg,
            BalanceConstraint::uniform(3, 3, Fraction::ONE),
            vec![2, 1, 0],
        )
        .unwrap();
        let c = move_candidates(&s, Fraction::ZERO, &[]);
        assert_eq!(c[0], Candidate { vertex: 0, to: 0, gain: 1 });
    }
}
