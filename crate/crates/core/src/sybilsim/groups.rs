use rand::seq::SliceRandom;
use rand::Rng;

/// A random partition of identities `0..n` into verification groups.
#[derive(Clone, Debug)]
pub struct Partition {
    members: Vec<usize>,
    bounds: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.bounds.windows(2).map(|w| &self.members[w[0]..w[1]])
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.iter().map(<[usize]>::to_vec).collect()
    }
}

/// Uniform random partition into groups of `g`. The `n mod g` leftover
/// identities are spread one each over the final groups (size `g + 1`), so no
/// identity is ever alone. With fewer than `g` identities everyone shares a
/// single group.
pub fn assign_groups<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Partition {
    assert!(g >= 1, "group size must be positive");
    let mut members: Vec<usize> = (0..n).collect();
    members.shuffle(rng);

    let q = n / g;
    let mut sizes = if q == 0 { vec![n] } else { vec![g; q] };
    if q > 0 {
        for i in 0..n % g {
            let slot = sizes.len() - 1 - (i % sizes.len());
            sizes[slot] += 1;
        }
    }
    let mut bounds = Vec::with_capacity(sizes.len() + 1);
    bounds.push(0);
    for s in sizes.into_iter().filter(|&s| s > 0) {
        bounds.push(bounds.last().unwrap() + s);
    }
    Partition { members, bounds }
}

/// Probability that a given Sybil lands in an all-Sybil group of size `g`
/// when `s` of `h + s` identities are Sybils: `∏_{i=1}^{g-1} (s-i)/(h+s-i)`.
pub fn lucky_fraction_exact(h: usize, s: usize, g: usize) -> f64 {
    if s < g || h + s < g {
        return 0.0;
    }
    (1..g)
        .map(|i| (s - i) as f64 / (h + s - i) as f64)
        .product()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn sizes_and_remainders() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = assign_groups(10, 2, &mut rng);
        assert_eq!(p.iter().map(<[usize]>::len).collect::<Vec<_>>(), vec![2; 5]);
        let p = assign_groups(9, 2, &mut rng);
        assert_eq!(
            p.iter().map(<[usize]>::len).collect::<Vec<_>>(),
            vec![2, 2, 2, 3]
        );
        let p = assign_groups(11, 4, &mut rng);
        assert_eq!(p.iter().map(<[usize]>::len).collect::<Vec<_>>(), vec![5, 6]);
        let p = assign_groups(3, 4, &mut rng);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn partition_covers_everyone_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = assign_groups(1001, 4, &mut rng);
        let mut all: Vec<usize> = p.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1001).collect::<Vec<_>>());
    }

    #[test]
    fn pairing_probability_matches_matching_formula() {
        // P(identities 0 and 1 share a pair) = 1/(n-1) for a uniform perfect matching
        let n = 20;
        let trials = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hits = (0..trials)
            .filter(|_| {
                assign_groups(n, 2, &mut rng)
                    .iter()
                    .any(|g| g.contains(&0) && g.contains(&1))
            })
            .count() as f64;
        let p = 1.0 / (n - 1) as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (hits - trials as f64 * p).abs() < 3.0 * sigma,
            "hits={hits}"
        );
    }

    #[test]
    fn exact_formula_values() {
        let total = 1_000_000;
        let s = total / 10;
        let pairs = lucky_fraction_exact(total - s, s, 2);
        assert!((pairs - 0.0999991).abs() < 1e-6, "{pairs}");
        let quads = lucky_fraction_exact(total - s, s, 4);
        assert!((quads - 9.999460e-4).abs() < 1e-9, "{quads}");
        assert_eq!(lucky_fraction_exact(100, 0, 2), 0.0);
        assert_eq!(lucky_fraction_exact(0, 2, 2), 1.0);
    }
}
