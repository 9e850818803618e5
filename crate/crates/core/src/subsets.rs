//! Fixed-size subset enumeration in colexicographic order.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n`, each yielded as a sorted index list, in
/// colexicographic order (`{0,1}, {0,2}, {1,2}, {0,3}, ...`).
#[derive(Debug, Clone)]
pub struct ColexSubsets {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl ColexSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        ColexSubsets {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for ColexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        // smallest position that can move up without colliding with its successor
        let mut j = 0;
        while j < k {
            let limit = if j + 1 < k {
                self.current[j + 1]
            } else {
                self.n
            };
            if self.current[j] + 1 < limit {
                break;
            }
            j += 1;
        }
        if j == k {
            self.done = true;
        } else {
            self.current[j] += 1;
            for (i, slot) in self.current.iter_mut().take(j).enumerate() {
                *slot = i;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_order_small() {
        let got: Vec<_> = ColexSubsets::new(4, 2).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 3],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn counts_match_binomial() {
        for n in 0..9 {
            for k in 0..=n + 1 {
                assert_eq!(
                    ColexSubsets::new(n, k).count() as u128,
                    binomial(n, k),
                    "{n} {k}"
                );
            }
        }
        assert_eq!(binomial(52, 5), 2_598_960);
    }

    #[test]
    fn empty_subset_is_yielded_once() {
        assert_eq!(
            ColexSubsets::new(3, 0).collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
    }
}
