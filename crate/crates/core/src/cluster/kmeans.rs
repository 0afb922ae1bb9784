use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_input, nearest, real, sq_dist, ClusterError, Fit, Limits, Partition, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMeansInit {
    /// D²-weighted seeding.
    PlusPlus,
    /// Uniform sampling without replacement.
    Random,
}

pub fn kmeans<T: Real>(
    points: &[Vec<T>],
    n: usize,
    init: KMeansInit,
    seed: u64,
    limits: &Limits,
) -> Result<Partition<T>, ClusterError> {
    kmeans_fit(points, n, init, seed, limits).map(|f| f.partition)
}

/// Lloyd iterations until the assignment is a fixpoint or the iteration
/// limit is hit. `trace` holds the within-cluster sum of squares after each
/// centroid update.
pub fn kmeans_fit<T: Real>(
    points: &[Vec<T>],
    n: usize,
    init: KMeansInit,
    seed: u64,
    limits: &Limits,
) -> Result<Fit<T>, ClusterError> {
    let d = check_input(points, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = match init {
        KMeansInit::PlusPlus => plus_plus(points, n, &mut rng),
        KMeansInit::Random => index::sample(&mut rng, points.len(), n)
            .into_iter()
            .map(|i| points[i].clone())
            .collect(),
    };

    let mut assignment = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    for _ in 0..limits.max_iterations.max(1) {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
        reseed_empty(points, &mut assignment, &centers, n);
        centers = means(points, &assignment, n, d);
        trace.push(wcss(points, &assignment, &centers));
    }
    Ok(Fit {
        partition: Partition::from_labels(&assignment, points),
        centers,
        trace,
    })
}

fn plus_plus<T: Real>(points: &[Vec<T>], n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let m = points.len();
    let mut chosen = vec![false; m];
    let first = rng.gen_range(0..m);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<T> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centers.len() < n {
        let total = d2.iter().fold(T::zero(), |a, &b| a + b);
        let pick = if total > T::zero() {
            let target = real::<T>(rng.gen::<f64>()) * total;
            let mut acc = T::zero();
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > T::zero() {
                    acc = acc + w;
                    pick = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            pick.expect("positive total weight")
        } else {
            chosen.iter().position(|c| !c).expect("n <= points")
        };
        chosen[pick] = true;
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &points[pick]));
        }
        centers.push(points[pick].clone());
    }
    centers
}

/// Gives every empty cluster the point farthest from its own center, taken
/// from clusters with at least two members.
fn reseed_empty<T: Real>(points: &[Vec<T>], assignment: &mut [usize], centers: &[Vec<T>], n: usize) {
    let mut counts = vec![0usize; n];
    for &c in assignment.iter() {
        counts[c] += 1;
    }
    for j in 0..n {
        if counts[j] > 0 {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            if counts[c] < 2 {
                continue;
            }
            let d = sq_dist(p, &centers[c]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("n <= points leaves a donor cluster");
        counts[assignment[i]] -= 1;
        assignment[i] = j;
        counts[j] = 1;
    }
}

fn means<T: Real>(points: &[Vec<T>], assignment: &[usize], n: usize, d: usize) -> Vec<Vec<T>> {
    let mut sums = vec![vec![T::zero(); d]; n];
    let mut counts = vec![0usize; n];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for (s, &x) in sums[c].iter_mut().zip(p) {
            *s = *s + x;
        }
    }
    for (s, &k) in sums.iter_mut().zip(&counts) {
        let k = real::<T>(k as f64);
        for x in s.iter_mut() {
            *x = *x / k;
        }
    }
    sums
}

/// Within-cluster sum of squared distances.
pub fn wcss<T: Real>(points: &[Vec<T>], assignment: &[usize], centers: &[Vec<T>]) -> T {
    points
        .iter()
        .zip(assignment)
        .fold(T::zero(), |acc, (p, &c)| acc + sq_dist(p, &centers[c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sets(p: &Partition<f64>) -> Vec<Vec<usize>> {
        let mut m = p.members();
        m.sort();
        m
    }

    #[test]
    fn separated_pairs() {
        let pts: Vec<Vec<f64>> = [0.0, 0.1, 10.0, 10.1].iter().map(|&x| vec![x]).collect();
        for init in [KMeansInit::PlusPlus, KMeansInit::Random] {
            for seed in 0..20 {
                let p = kmeans(&pts, 2, init, seed, &Limits::default()).unwrap();
                assert_eq!(sets(&p), [vec![0, 1], vec![2, 3]], "seed {seed}");
            }
        }
    }

    #[test]
    fn extreme_cluster_counts() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let all = kmeans_fit(&pts, 7, KMeansInit::PlusPlus, 3, &Limits::default()).unwrap();
        assert_eq!(all.partition.n, 7);
        assert_eq!(*all.trace.last().unwrap(), 0.0);
        let one = kmeans(&pts, 1, KMeansInit::Random, 3, &Limits::default()).unwrap();
        assert_eq!(one.assignment, [0; 7]);
        assert!(kmeans(&pts, 8, KMeansInit::Random, 3, &Limits::default()).is_err());
    }

    #[test]
    fn duplicate_points_still_fill_clusters() {
        let pts = vec![vec![1.0], vec![1.0], vec![1.0], vec![4.0]];
        let p = kmeans(&pts, 3, KMeansInit::PlusPlus, 0, &Limits::default()).unwrap();
        assert!(p.n >= 2);
        assert_eq!(p.assignment.len(), 4);
    }

    fn brute_force_optimum(pts: &[Vec<f64>], n: usize) -> f64 {
        let m = pts.len();
        let mut best = f64::INFINITY;
        let mut labels = vec![0usize; m];
        loop {
            let mut used = vec![false; n];
            labels.iter().for_each(|&l| used[l] = true);
            if used.iter().all(|&u| u) {
                let d = pts[0].len();
                let mut centers = vec![vec![0.0; d]; n];
                let mut counts = vec![0.0; n];
                for (p, &l) in pts.iter().zip(&labels) {
                    counts[l] += 1.0;
                    for k in 0..d {
                        centers[l][k] += p[k];
                    }
                }
                for l in 0..n {
                    centers[l].iter_mut().for_each(|x| *x /= counts[l]);
                }
                best = best.min(wcss(pts, &labels, &centers));
            }
            let mut i = 0;
            while i < m {
                labels[i] += 1;
                if labels[i] < n {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
            if i == m {
                return best;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn objective_never_increases(
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..40),
            n in 1usize..6,
            seed in any::<u64>(),
        ) {
            let n = n.min(pts.len());
            for init in [KMeansInit::PlusPlus, KMeansInit::Random] {
                let fit = kmeans_fit(&pts, n, init, seed, &Limits::default()).unwrap();
                for w in fit.trace.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
                }
                let p = &fit.partition;
                prop_assert!(p.assignment.iter().all(|&c| c < p.n));
                prop_assert_eq!(p.members().iter().filter(|m| m.is_empty()).count(), 0);
            }
        }

        #[test]
        fn some_restart_reaches_the_optimum(
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..=8),
            n in 1usize..=3,
        ) {
            let best = brute_force_optimum(&pts, n);
            let reached = (0..50u64).any(|seed| {
                let fit = kmeans_fit(&pts, n, KMeansInit::PlusPlus, seed, &Limits::default()).unwrap();
                let obj = wcss(&pts, &fit.partition.assignment, &{
                    let members = fit.partition.members();
                    members.iter().map(|m| {
                        let mut c = vec![0.0; 2];
                        for &i in m { c[0] += pts[i][0]; c[1] += pts[i][1]; }
                        c.iter().map(|x| x / m.len() as f64).collect::<Vec<_>>()
                    }).collect::<Vec<_>>()
                });
                (obj - best).abs() <= 1e-9
            });
            prop_assert!(reached);
        }
    }
}
