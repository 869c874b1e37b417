/// Buckets values into deciles 1..=10 by rank. Decile 1 holds the smallest
/// values, or the largest when `descending`. Ties keep input order, and
/// bucket sizes differ by at most one.
pub fn assign_deciles(values: &[f64], descending: bool) -> Vec<u8> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    if descending {
        idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    } else {
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    }
    let mut out = vec![0u8; n];
    for (pos, &i) in idx.iter().enumerate() {
        out[i] = (pos * 10 / n + 1) as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sizes(d: &[u8]) -> Vec<usize> {
        (1..=10).map(|k| d.iter().filter(|&&v| v == k).count()).collect()
    }

    #[test]
    fn bucket_sizes() {
        for n in [10usize, 23, 100, 101] {
            let v: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64).collect();
            let s = sizes(&assign_deciles(&v, false));
            assert_eq!(s.iter().sum::<usize>(), n);
            let (lo, hi) = (s.iter().min().unwrap(), s.iter().max().unwrap());
            assert!(hi - lo <= 1, "n={n}: {s:?}");
        }
        let s = sizes(&assign_deciles(&(0..100).map(f64::from).collect::<Vec<_>>(), true));
        assert_eq!(s, vec![10; 10]);
    }

    #[test]
    fn ten_values_one_each() {
        let v = [0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 0.0];
        assert_eq!(assign_deciles(&v, false), vec![6, 2, 10, 4, 8, 3, 9, 5, 7, 1]);
        assert_eq!(assign_deciles(&v, true), vec![5, 9, 1, 7, 3, 8, 2, 6, 4, 10]);
    }

    #[test]
    fn ties_are_stable() {
        let d = assign_deciles(&[1.0; 20], false);
        assert_eq!(d[0], 1);
        assert_eq!(d[1], 1);
        assert_eq!(d[19], 10);
    }

    proptest! {
        #[test]
        fn scale_invariant(v in proptest::collection::vec(-1e3f64..1e3, 1..80), k in 0.01f64..100.0) {
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            prop_assert_eq!(assign_deciles(&v, false), assign_deciles(&scaled, false));
        }
    }
}
