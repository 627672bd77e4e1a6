//! Learning-curve metrics used by the desk-scale trend checks.
//!
//! Curves are indexed by epoch starting at 1: `curve[i]` belongs to epoch
//! `i + 1`.

use fars_core::rl::train::{smooth, EpochStats};

/// Width of the trailing moving average applied to gates-passed curves.
pub const SMOOTHING_WINDOW: usize = 10;

/// Smoothed mean-gates-passed curve of one run.
pub fn gates_curve(history: &[EpochStats]) -> Vec<f64> {
    let raw: Vec<f64> = history.iter().map(|s| s.mean_gates_passed).collect();
    smooth(&raw, SMOOTHING_WINDOW)
}

/// Element-wise mean of equally long curves.
pub fn mean_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    assert!(curves.iter().all(|c| c.len() == first.len()), "curves differ in length");
    (0..first.len()).map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64).collect()
}

/// Largest epoch-over-epoch decrease between consecutive epochs `e, e + 1`
/// with `e >= from_epoch`, with the epoch where it starts. `None` when the
/// curve never decreases there.
pub fn largest_drop_from(curve: &[f64], from_epoch: usize) -> Option<(usize, f64)> {
    let start = from_epoch.max(1) - 1;
    (start..curve.len().saturating_sub(1))
        .map(|i| (i + 1, curve[i] - curve[i + 1]))
        .filter(|&(_, drop)| drop > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// First epoch at which the curve reaches `fraction` of its final value.
/// `None` for an empty curve or a non-positive final value, where the
/// threshold says nothing about learning speed.
pub fn epochs_to_fraction(curve: &[f64], fraction: f64) -> Option<usize> {
    let last = *curve.last()?;
    if last <= 0.0 {
        return None;
    }
    curve.iter().position(|&x| x >= fraction * last).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drops_are_located_and_sized() {
        let curve = [0.0, 1.0, 0.5, 0.6, 0.2, 0.9];
        assert_eq!(largest_drop_from(&curve, 1), Some((2, 0.5)));
        let (epoch, drop) = largest_drop_from(&curve, 3).unwrap();
        assert_eq!(epoch, 4);
        assert!((drop - 0.4).abs() < 1e-12);
        assert_eq!(largest_drop_from(&curve, 5), None);
        assert_eq!(largest_drop_from(&[1.0, 2.0, 2.0, 3.0], 1), None);
        assert_eq!(largest_drop_from(&[], 20), None);
    }

    #[test]
    fn fraction_thresholds() {
        assert_eq!(epochs_to_fraction(&[0.0, 1.0, 3.0, 4.0, 3.9], 0.9), Some(4));
        assert_eq!(epochs_to_fraction(&[0.0, 0.0], 0.9), None);
        assert_eq!(epochs_to_fraction(&[], 0.9), None);
        assert_eq!(epochs_to_fraction(&[5.0, 1.0], 0.9), Some(1));
    }

    #[test]
    fn mean_of_curves() {
        assert_eq!(mean_curve(&[vec![1.0, 2.0], vec![3.0, 6.0]]), vec![2.0, 4.0]);
        assert!(mean_curve(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn sorted_curves_never_drop(mut xs in prop::collection::vec(0.0f64..6.0, 0..200), from in 1usize..50) {
            xs.sort_by(f64::total_cmp);
            prop_assert_eq!(largest_drop_from(&xs, from), None);
        }

        #[test]
        fn threshold_epoch_is_the_first_crossing(xs in prop::collection::vec(0.0f64..6.0, 1..200), frac in 0.05f64..1.0) {
            match epochs_to_fraction(&xs, frac) {
                None => prop_assert!(*xs.last().unwrap() <= 0.0),
                Some(e) => {
                    let target = frac * xs[xs.len() - 1];
                    prop_assert!(e >= 1 && e <= xs.len());
                    prop_assert!(xs[e - 1] >= target);
                    prop_assert!(xs[..e - 1].iter().all(|&x| x < target));
                }
            }
        }

        #[test]
        fn drop_is_a_real_decrease(xs in prop::collection::vec(-1.0f64..6.0, 0..100), from in 1usize..20) {
            if let Some((e, d)) = largest_drop_from(&xs, from) {
                prop_assert!(e >= from && d > 0.0);
                prop_assert_eq!(xs[e - 1] - xs[e], d);
            }
        }
    }
}
