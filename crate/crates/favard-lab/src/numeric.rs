//! Small numeric helpers shared across modules.

/// Sums a slice by recursive halving.
///
/// The summation tree depends only on the slice length, never on thread
/// scheduling, so parallel pipelines that collect per-task values into a
/// fixed-order buffer and reduce with this function get bit-identical
/// results for any worker count.  The tree also keeps rounding error at
/// O(log n) ulps instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Exact power `4^e` for the scale indices used throughout.
///
/// Powers of four are dyadic, so for any |e| small enough to stay in
/// range the result is exact and comparisons against it are exact.
pub fn pow4(e: i32) -> f64 {
    4.0f64.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_sequential_on_small_inputs() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(pairwise_sum(&xs), 15.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[7.5]), 7.5);
    }

    #[test]
    fn pairwise_is_split_invariant_for_the_lengths_we_use() {
        // Same data, same length, must give the identical bit pattern.
        let xs: Vec<f64> = (0..1023).map(|i| (i as f64 * 0.1).sin()).collect();
        let a = pairwise_sum(&xs);
        let b = pairwise_sum(&xs);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pow4_is_exact_at_the_indices_we_compare_against() {
        assert_eq!(pow4(0), 1.0);
        assert_eq!(pow4(1), 4.0);
        assert_eq!(pow4(-2), 0.0625);
        assert_eq!(pow4(-13), 1.0 / 67108864.0);
    }
}
