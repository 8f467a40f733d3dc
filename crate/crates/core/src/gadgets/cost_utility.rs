use crate::model::{CostProcess, CostUtility, CostUtilityProcess};

/// Every cost `k` becomes cost `k` and utility `k`, so `K = T` almost surely
/// iff cost stays at most `T` and utility reaches at least `T` almost surely.
pub fn qualitative_to_cost_utility(process: &CostProcess) -> CostUtilityProcess {
    process.map_weights(|k| CostUtility { cost: k.clone(), utility: k.clone() })
}
