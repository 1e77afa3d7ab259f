use super::{Fraction, Weight};

/// Per-block weight limits.
///
/// The uniform k-way constraint uses `L_max = ⌊(1+ε)·⌈c(V)/k⌉⌋` for every
/// block. Recursive bipartitioning needs unequal limits, so the limits are
/// stored per block together with the perfect weight and the slack
/// `ε·⌈c(V)/k⌉` that sizes the rebalancing deadzone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceConstraint {
    max: Vec<Weight>,
    perfect: Vec<Weight>,
    slack_num: Vec<i128>,
    slack_den: i128,
}

impl BalanceConstraint {
    pub fn uniform(total_weight: Weight, k: usize, epsilon: Fraction) -> Self {
        assert!(k >= 1);
        let perfect = (total_weight + k as Weight - 1) / k as Weight;
        let max = perfect + epsilon.mul_floor(perfect);
        Self {
            max: vec![max; k],
            perfect: vec![perfect; k],
            slack_num: vec![epsilon.num() as i128 * perfect as i128; k],
            slack_den: epsilon.den() as i128,
        }
    }

    /// Explicit limits; the deadzone slack of block `i` is `max[i] - perfect[i]`.
    pub fn per_block(max: Vec<Weight>, perfect: Vec<Weight>) -> Self {
        assert_eq!(max.len(), perfect.len());
        let slack_num = max
            .iter()
            .zip(&perfect)
            .map(|(&m, &p)| (m - p).max(0) as i128)
            .collect();
        Self {
            max,
            perfect,
            slack_num,
            slack_den: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.max.len()
    }

    #[inline]
    pub fn max_weight(&self, block: usize) -> Weight {
        self.max[block]
    }

    #[inline]
    pub fn perfect_weight(&self, block: usize) -> Weight {
        self.perfect[block]
    }

    pub fn max_weights(&self) -> &[Weight] {
        &self.max
    }

    /// ⌊perfect + scale·slack⌋: the weight a block may reach when its limit is
    /// widened by `scale`.
    pub fn scaled_limit(&self, block: usize, scale: Fraction) -> Weight {
        let extra =
            scale.num() as i128 * self.slack_num[block] / (scale.den() as i128 * self.slack_den);
        self.perfect[block] + extra as Weight
    }

    /// A block is in the deadzone if `weight ≥ max − d·slack`. Overloaded
    /// blocks are always in it.
    pub fn in_deadzone(&self, block: usize, weight: Weight, deadzone_factor: Fraction) -> bool {
        let gap = (self.max[block] - weight) as i128;
        gap * deadzone_factor.den() as i128 * self.slack_den
            <= deadzone_factor.num() as i128 * self.slack_num[block]
    }

    pub fn is_balanced(&self, weights: &[Weight]) -> bool {
        weights.iter().zip(&self.max).all(|(w, m)| w <= m)
    }
}
