//! Summary statistics over a distance vector.

/// Distances at or below this count as zero.
pub const EPSILON: f64 = 1e-9;

/// Share of rows with distance above `eps`.
pub fn proportion_diff(h: &[f64], eps: f64) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    h.iter().filter(|x| **x > eps).count() as f64 / h.len() as f64
}

/// Mean over rows with distance above `eps`; 0 when there are none.
pub fn avg_distance(h: &[f64], eps: f64) -> f64 {
    let (sum, count) = h
        .iter()
        .filter(|x| **x > eps)
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(proportion_diff(&[0.0, 0.0], EPSILON), 0.0);
        assert_eq!(proportion_diff(&[0.1, 0.3], EPSILON), 1.0);
        assert_eq!(proportion_diff(&[0.0, 0.3], EPSILON), 0.5);
        assert_eq!(avg_distance(&[0.0, 0.0], EPSILON), 0.0);
        assert_eq!(avg_distance(&[0.0, 0.4], EPSILON), 0.4);
        assert!((avg_distance(&[0.0, 0.2, 0.6], EPSILON) - 0.4).abs() < 1e-15);
        assert_eq!(proportion_diff(&[], EPSILON), 0.0);
    }
}
