//! Trapezoid weights on monotone axes.

/// Trapezoid weights for an arbitrary strictly increasing axis.
pub fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    for k in 0..n - 1 {
        let half = 0.5 * (axis[k + 1] - axis[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    w
}

/// Indices of the half-resolution sub-grid: every other node plus the last
/// node, so the sub-grid spans exactly the same interval.
pub fn coarse_indices(n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if n > 0 && *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}

/// Integrates samples on an axis.
pub fn integrate(axis: &[f64], values: &[f64]) -> f64 {
    trapezoid_weights(axis)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}
