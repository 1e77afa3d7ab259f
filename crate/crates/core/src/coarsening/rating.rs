use crate::hypergraph::{Hypergraph, Weight};

/// Above this common denominator ratings fall back to fixed point.
const MAX_EXACT_DENOMINATOR: u128 = 1 << 40;

/// Heavy-edge rating `num / den` of one candidate cluster. All ratings
/// computed for the same vertex share `den`.
#[derive(Debug, Clone, Copy)]
pub struct Rating {
    pub num: u128,
    pub den: u128,
}

impl Rating {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RatingOptions {
    /// Count each hyperedge once per cluster (true) or once per pin in the
    /// cluster (the historical behaviour, kept for ablations).
    pub once_per_edge: bool,
    /// Hyperedges with more pins are ignored.
    pub max_edge_size: usize,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Scratch buffer reused across rating calls.
#[derive(Debug, Default)]
pub struct RatingScratch {
    contributions: Vec<(usize, usize, u128)>,
}

/// Best cluster for `u` by Σ ω(e)·[e ∩ C ≠ ∅] / (|e| − 1) over the incident
/// edges. Ratings are exact rationals over the least common multiple of the
/// `|e| − 1`. Clusters that would exceed `max_cluster_weight` are skipped;
/// ties go to the smaller cluster ID.
pub fn heavy_edge_rating(
    hg: &Hypergraph,
    u: usize,
    cluster: &[usize],
    cluster_weights: &[Weight],
    max_cluster_weight: Weight,
    options: RatingOptions,
    scratch: &mut RatingScratch,
) -> Option<(usize, Rating)> {
    let rated = |e: usize| (2..=options.max_edge_size).contains(&hg.edge_size(e));
    let mut den: u128 = 1;
    for &e in hg.incident_edges(u) {
        if rated(e) {
            let d = (hg.edge_size(e) - 1) as u128;
            den = den / gcd(den, d) * d;
            if den > MAX_EXACT_DENOMINATOR {
                den = MAX_EXACT_DENOMINATOR;
                break;
            }
        }
    }
    let own = cluster[u];
    let weight_u = hg.vertex_weight(u);
    let buf = &mut scratch.contributions;
    buf.clear();
    for &e in hg.incident_edges(u) {
        if !rated(e) {
            continue;
        }
        let term = hg.edge_weight(e) as u128 * den / (hg.edge_size(e) - 1) as u128;
        for &v in hg.pins(e) {
            let c = cluster[v];
            if c != own && cluster_weights[c] + weight_u <= max_cluster_weight {
                buf.push((c, e, term));
            }
        }
    }
    buf.sort_unstable();
    if options.once_per_edge {
        buf.dedup_by_key(|&mut (c, e, _)| (c, e));
    }
    let mut best: Option<(usize, u128)> = None;
    let mut i = 0;
    while i < buf.len() {
        let c = buf[i].0;
        let mut sum = 0;
        while i < buf.len() && buf[i].0 == c {
            sum += buf[i].2;
            i += 1;
        }
        // clusters arrive in ascending order, so strict > keeps the smaller ID on ties
        if best.is_none_or(|(_, b)| sum > b) {
            best = Some((c, sum));
        }
    }
    best.map(|(c, num)| (c, Rating { num, den }))
}
