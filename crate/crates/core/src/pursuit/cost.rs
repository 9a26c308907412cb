use crate::error::{Error, Result};

/// Number of children kept out of `k` at retention fraction `alpha`.
pub fn retained_children(alpha: f64, k: usize) -> usize {
    // the small offset keeps products like 0.1 * 30 from rounding up to 4
    ((alpha * k as f64 - 1e-9).ceil() as usize).clamp(1, k.max(1))
}

/// Centroid comparisons made by one tree descent on a tree with exactly the
/// given branching: `k1 + r1*k2 + r1*r2*k3 + ...` where `r_i = ceil(alpha * k_i)`
/// children survive at level `i`. This is the integer form of
/// `sum_i alpha^(i-1) * prod_{j<=i} k_j`. Atom comparisons in the kept
/// bottom-level nodes are not included.
pub fn predicted_ip_count(branching: &[usize], alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let mut explored: u64 = 1;
    let mut total: u64 = 0;
    for &k in branching {
        total += explored * k as u64;
        explored *= retained_children(alpha, k) as u64;
    }
    Ok(total)
}
