//! Restricted rejection sampling.
//!
//! One attempt draws `Y ~ Q` and `U ~ Unif[0, 1]`, finds the region `i` of `Y`
//! and accepts when `U ≤ RN(Y) / C_{i+1}`, where `C_{i+1}` is the right end
//! of region `i`. Accepted region-`i` draws are exact samples of `P`
//! restricted to that region. The last region has `C_R = ∞` and never
//! accepts.

use rand::Rng;

use crate::error::Result;
use crate::model::{TargetModel, VariationalModel};
use crate::partition::RegionMap;

/// A single attempt. Returns the region and the sample on acceptance.
pub fn rejection_attempt<T, Q, R>(
    map: &RegionMap<'_, T, Q>,
    rng: &mut R,
) -> Result<Option<(usize, T::State)>>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
    R: Rng + ?Sized,
{
    let y = map.proposal.sample(rng);
    let u: f64 = rng.random();
    let log_rn = map.log_rn(&y)?;
    let region = map.partition.region_index_log(log_rn)?;
    let log_c = map.partition.log_upper(region);
    if log_c.is_infinite() {
        return Ok(None);
    }
    // u == 0 gives -inf and always accepts, matching U ≤ ratio.
    if u.ln() <= log_rn - log_c {
        Ok(Some((region, y)))
    } else {
        Ok(None)
    }
}
