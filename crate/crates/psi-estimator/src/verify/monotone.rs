//! Two equivalent views of order structure on a sampled function: absence
//! of peaks and valleys, and quasi-affinity (every middle value lies
//! within the span of its neighbors). Both are kept as separate routines
//! so they can cross-validate each other on identical inputs.

/// Finds indices `i < j < k` where `values[j]` leaves the closed span of
/// `values[i]` and `values[k]` by more than `tol` (a peak or a valley).
/// Returns `None` when the sequence is monotone up to `tol`.
///
/// Runs in linear time by comparing each point against the running prefix
/// extrema and precomputed suffix extrema.
pub fn monotone_violation(values: &[f64], tol: f64) -> Option<(usize, usize, usize)> {
    let n = values.len();
    if n < 3 {
        return None;
    }

    // suffix_min[j] / suffix_max[j]: extreme values over values[j..].
    let mut suffix_min_idx = vec![0usize; n];
    let mut suffix_max_idx = vec![0usize; n];
    suffix_min_idx[n - 1] = n - 1;
    suffix_max_idx[n - 1] = n - 1;
    for j in (0..n - 1).rev() {
        suffix_min_idx[j] = if values[j] < values[suffix_min_idx[j + 1]] {
            j
        } else {
            suffix_min_idx[j + 1]
        };
        suffix_max_idx[j] = if values[j] > values[suffix_max_idx[j + 1]] {
            j
        } else {
            suffix_max_idx[j + 1]
        };
    }

    let mut prefix_min_idx = 0usize;
    let mut prefix_max_idx = 0usize;
    for j in 1..n - 1 {
        // Peak: some earlier value and some later value both sit more than
        // tol below values[j].
        let left_min = values[prefix_min_idx];
        let right_min = values[suffix_min_idx[j + 1]];
        if values[j] > left_min + tol && values[j] > right_min + tol {
            return Some((prefix_min_idx, j, suffix_min_idx[j + 1]));
        }
        // Valley: symmetric.
        let left_max = values[prefix_max_idx];
        let right_max = values[suffix_max_idx[j + 1]];
        if values[j] < left_max - tol && values[j] < right_max - tol {
            return Some((prefix_max_idx, j, suffix_max_idx[j + 1]));
        }
        if values[j] < values[prefix_min_idx] {
            prefix_min_idx = j;
        }
        if values[j] > values[prefix_max_idx] {
            prefix_max_idx = j;
        }
    }
    None
}

/// True when the sampled sequence has no peak or valley deeper than `tol`.
pub fn is_monotone_sampled(values: &[f64], tol: f64) -> bool {
    monotone_violation(values, tol).is_none()
}

/// True when for every `i < j < k` the middle value lies within
/// `[min(values[i], values[k]) - tol, max(values[i], values[k]) + tol]`.
/// This is the definition checked literally, in cubic time; it agrees with
/// [`is_monotone_sampled`] on every input.
pub fn is_quasi_affine_sampled(values: &[f64], tol: f64) -> bool {
    let n = values.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let lo = values[i].min(values[k]);
                let hi = values[i].max(values[k]);
                if values[j] > hi + tol || values[j] < lo - tol {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_sequences_pass() {
        assert!(is_monotone_sampled(&[1.0, 2.0, 3.0, 4.0], 0.0));
        assert!(is_monotone_sampled(&[4.0, 3.0, 2.0, 1.0], 0.0));
        assert!(is_monotone_sampled(&[1.0, 1.0, 1.0], 0.0));
        assert!(is_monotone_sampled(&[], 0.0));
        assert!(is_monotone_sampled(&[5.0, 5.0], 0.0));
    }

    #[test]
    fn peaks_and_valleys_are_caught_with_indices() {
        let (i, j, k) = monotone_violation(&[0.0, 5.0, 1.0], 0.5).unwrap();
        assert!(i < j && j < k);
        assert_eq!(j, 1);
        let (i, j, k) = monotone_violation(&[3.0, -2.0, 3.0], 0.5).unwrap();
        assert_eq!((i, j, k), (0, 1, 2));
        assert!(monotone_violation(&[0.0, 1.0, 0.9, 2.0], 0.2).is_none());
        assert!(monotone_violation(&[0.0, 1.0, 0.7, 2.0], 0.2).is_some());
    }

    #[test]
    fn tolerance_absorbs_shallow_wiggles() {
        let wiggly = [0.0, 1.0, 0.999, 2.0, 1.9995, 3.0];
        assert!(is_monotone_sampled(&wiggly, 1e-2));
        assert!(!is_monotone_sampled(&wiggly, 1e-5));
        assert_eq!(
            is_quasi_affine_sampled(&wiggly, 1e-2),
            is_monotone_sampled(&wiggly, 1e-2)
        );
        assert_eq!(
            is_quasi_affine_sampled(&wiggly, 1e-5),
            is_monotone_sampled(&wiggly, 1e-5)
        );
    }

    #[test]
    fn the_two_routes_agree_on_edge_shapes() {
        for (seq, tol) in [
            (vec![1.0, 1.0, 1.0, 1.0], 0.0),
            (vec![1.0, 2.0, 2.0, 1.0], 0.0),
            (vec![2.0, 1.0, 1.0, 2.0], 0.0),
            (vec![0.0, 0.0, 1.0, 0.0, 0.0], 0.5),
            (vec![1.0, 0.5, 0.75, 0.25], 0.1),
        ] {
            assert_eq!(
                is_monotone_sampled(&seq, tol),
                is_quasi_affine_sampled(&seq, tol),
                "disagreement on {seq:?} at tol {tol}"
            );
        }
    }
}
