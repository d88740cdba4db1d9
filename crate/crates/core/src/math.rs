//! Integer logarithms and the closed-form bounds built from them.

/// Smallest `k` with `2^k >= x`. `ceil_log2(1) == 0`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1, "ceil_log2 of zero");
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Largest `k` with `2^k <= x`.
pub fn floor_log2(x: usize) -> usize {
    assert!(x >= 1, "floor_log2 of zero");
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

/// `odd * (odd - 2) * ... * 1`. Tops of 0 or 1 give 1.
pub fn double_factorial(odd: usize) -> u64 {
    let mut acc = 1u64;
    let mut k = odd;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    acc
}

/// `floor(log2(n / 2))` for `n >= 2`.
pub(crate) fn delta(n: usize) -> usize {
    floor_log2(n) - 1
}

/// Minimum diameter over T-trees with `n` leaves; valid for `n >= 2`.
pub(crate) fn min_diameter(n: usize) -> usize {
    let d = delta(n);
    d + ceil_log2(n - (1 << d)) + 1
}

/// Smallest achievable latency, `ceil(log2(n-1))`, for `n >= 2`.
pub fn min_latency(n: usize) -> usize {
    ceil_log2(n - 1)
}

/// Latency reached by complexity-optimal structures, `d_min(n) - 1`, for `n >= 2`.
pub fn saturation_latency(n: usize) -> usize {
    min_diameter(n) - 1
}

/// `n * ceil(log2 n) - 2`, the upper bound on synthesized complexity.
pub fn complexity_upper_bound(n: usize) -> usize {
    n * ceil_log2(n) - 2
}
