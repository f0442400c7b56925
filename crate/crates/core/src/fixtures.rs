//! Standard test signals.

/// Jump locations of the Donoho–Johnstone "blocks" signal.
pub const BLOCKS_BREAKPOINTS: [f64; 11] = [
    0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];

/// Jump heights of the "blocks" signal.
pub const BLOCKS_HEIGHTS: [f64; 11] = [
    4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2,
];

/// Piecewise-constant "blocks" test signal sampled at `t_i = i / n`,
/// `i = 1..=n`: `sum_j h_j (1 + sign(t - t_j)) / 2`.
pub fn blocks(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            BLOCKS_BREAKPOINTS
                .iter()
                .zip(BLOCKS_HEIGHTS)
                .map(|(&pos, h)| {
                    let sign = if t > pos {
                        1.0
                    } else if t < pos {
                        -1.0
                    } else {
                        0.0
                    };
                    (1.0 + sign) * h / 2.0
                })
                .sum()
        })
        .collect()
}

/// Population standard deviation.
pub fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_shape() {
        let b = blocks(2048);
        assert_eq!(b.len(), 2048);
        // before the first jump the signal is zero
        assert_eq!(b[0], 0.0);
        // after the last jump: sum of all heights
        let total: f64 = BLOCKS_HEIGHTS.iter().sum();
        assert!((b[2047] - total).abs() < 1e-12);
        // t = 0.25 falls exactly on a breakpoint (i = 512): half step
        let before = b[510];
        let after = b[512];
        assert!((b[511] - 0.5 * (before + after)).abs() < 1e-12);
        let distinct: std::collections::BTreeSet<i64> =
            b.iter().map(|v| (v * 1e6).round() as i64).collect();
        assert!(distinct.len() >= 12);
    }
}
