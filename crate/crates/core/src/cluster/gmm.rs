use super::eigen::symmetric_eigen;
use super::kmeans::{kmeans_fit, KMeansInit};
use super::{check_input, real, ClusterError, Fit, Limits, Partition, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariance {
    Full,
    Diagonal,
}

/// Covariance stored by its principal axes so that densities need no
/// explicit inverse.
#[derive(Debug, Clone)]
enum Shape<T> {
    Full { axes: Vec<Vec<T>>, variances: Vec<T> },
    Diagonal(Vec<T>),
}

impl<T: Real> Shape<T> {
    fn log_det(&self) -> T {
        let vars = match self {
            Shape::Full { variances, .. } | Shape::Diagonal(variances) => variances,
        };
        vars.iter().fold(T::zero(), |acc, v| acc + v.ln())
    }

    fn mahalanobis(&self, diff: &[T]) -> T {
        match self {
            Shape::Full { axes, variances } => axes.iter().zip(variances).fold(T::zero(), |acc, (u, &v)| {
                let proj = u.iter().zip(diff).fold(T::zero(), |s, (&a, &b)| s + a * b);
                acc + proj * proj / v
            }),
            Shape::Diagonal(variances) => diff
                .iter()
                .zip(variances)
                .fold(T::zero(), |acc, (&x, &v)| acc + x * x / v),
        }
    }
}

#[derive(Debug, Clone)]
struct Component<T> {
    log_weight: T,
    mean: Vec<T>,
    shape: Shape<T>,
}

pub fn gmm_em<T: Real>(
    points: &[Vec<T>],
    n: usize,
    covariance: Covariance,
    seed: u64,
    limits: &Limits,
) -> Result<Partition<T>, ClusterError> {
    gmm_em_fit(points, n, covariance, seed, limits).map(|f| f.partition)
}

/// EM for a Gaussian mixture, started from a k-means++ partition with the
/// same seed. Variances (eigenvalues for full covariance) are clamped from
/// below at `covariance_floor`, which is the exact constrained M-step, so
/// the log-likelihood in `trace` never decreases. Components whose weight
/// underflows to zero are dropped.
pub fn gmm_em_fit<T: Real>(
    points: &[Vec<T>],
    n: usize,
    covariance: Covariance,
    seed: u64,
    limits: &Limits,
) -> Result<Fit<T>, ClusterError> {
    check_input(points, n)?;
    let start = kmeans_fit(points, n, KMeansInit::PlusPlus, seed, limits)?;
    let hard: Vec<Vec<T>> = start
        .partition
        .assignment
        .iter()
        .map(|&c| (0..start.partition.n).map(|k| if k == c { T::one() } else { T::zero() }).collect())
        .collect();
    let floor = real::<T>(limits.covariance_floor);
    let tolerance = real::<T>(limits.tolerance);

    let mut components = m_step(points, &hard, covariance, floor);
    let (mut ll, mut resp) = e_step(points, &components);
    let mut trace = vec![ll];
    for _ in 0..limits.max_iterations {
        components = m_step(points, &resp, covariance, floor);
        let (next_ll, next_resp) = e_step(points, &components);
        trace.push(next_ll);
        let improvement = next_ll - ll;
        ll = next_ll;
        resp = next_resp;
        if improvement < tolerance {
            break;
        }
    }

    let labels: Vec<usize> = resp
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, r[0]), |best, (k, &x)| if x > best.1 { (k, x) } else { best })
                .0
        })
        .collect();
    Ok(Fit {
        partition: Partition::from_labels(&labels, points),
        centers: components.into_iter().map(|c| c.mean).collect(),
        trace,
    })
}

fn e_step<T: Real>(points: &[Vec<T>], components: &[Component<T>]) -> (T, Vec<Vec<T>>) {
    let d = points[0].len();
    let log_norm = real::<T>(d as f64 * (2.0 * std::f64::consts::PI).ln());
    let half = real::<T>(0.5);
    let log_dets: Vec<T> = components.iter().map(|c| c.shape.log_det()).collect();
    let mut total = T::zero();
    let mut resp = Vec::with_capacity(points.len());
    let mut diff = vec![T::zero(); d];
    for p in points {
        let logs: Vec<T> = components
            .iter()
            .zip(&log_dets)
            .map(|(c, &ld)| {
                for ((o, &x), &mu) in diff.iter_mut().zip(p).zip(&c.mean) {
                    *o = x - mu;
                }
                c.log_weight - half * (log_norm + ld + c.shape.mahalanobis(&diff))
            })
            .collect();
        let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
        let sum = logs.iter().fold(T::zero(), |acc, &l| acc + (l - top).exp());
        let lse = top + sum.ln();
        total = total + lse;
        resp.push(logs.iter().map(|&l| (l - lse).exp()).collect());
    }
    (total, resp)
}

fn m_step<T: Real>(points: &[Vec<T>], resp: &[Vec<T>], covariance: Covariance, floor: T) -> Vec<Component<T>> {
    let m = real::<T>(points.len() as f64);
    let d = points[0].len();
    let k = resp[0].len();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let nk = resp.iter().fold(T::zero(), |acc, r| acc + r[j]);
        let weight = nk / m;
        if weight == T::zero() {
            continue;
        }
        let mut mean = vec![T::zero(); d];
        for (p, r) in points.iter().zip(resp) {
            if r[j] != T::zero() {
                for (s, &x) in mean.iter_mut().zip(p) {
                    *s = *s + r[j] * x;
                }
            }
        }
        mean.iter_mut().for_each(|s| *s = *s / nk);

        let shape = match covariance {
            Covariance::Diagonal => {
                let mut vars = vec![T::zero(); d];
                for (p, r) in points.iter().zip(resp) {
                    if r[j] != T::zero() {
                        for ((v, &x), &mu) in vars.iter_mut().zip(p).zip(&mean) {
                            *v = *v + r[j] * (x - mu) * (x - mu);
                        }
                    }
                }
                Shape::Diagonal(vars.into_iter().map(|v| (v / nk).max(floor)).collect())
            }
            Covariance::Full => {
                let mut scatter = vec![vec![T::zero(); d]; d];
                let mut diff = vec![T::zero(); d];
                for (p, r) in points.iter().zip(resp) {
                    if r[j] == T::zero() {
                        continue;
                    }
                    for ((o, &x), &mu) in diff.iter_mut().zip(p).zip(&mean) {
                        *o = x - mu;
                    }
                    for a in 0..d {
                        let ra = r[j] * diff[a];
                        for b in a..d {
                            scatter[a][b] = scatter[a][b] + ra * diff[b];
                        }
                    }
                }
                for a in 0..d {
                    for b in a..d {
                        let s = scatter[a][b] / nk;
                        scatter[a][b] = s;
                        scatter[b][a] = s;
                    }
                }
                let (vals, axes) = symmetric_eigen(scatter);
                Shape::Full {
                    axes,
                    variances: vals.into_iter().map(|v| v.max(floor)).collect(),
                }
            }
        };
        out.push(Component {
            log_weight: weight.ln(),
            mean,
            shape,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::kmeans;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(p: &Partition<f64>) -> Vec<Vec<usize>> {
        let mut m = p.members();
        m.sort();
        m
    }

    #[test]
    fn separated_data_matches_kmeans() {
        let pts: Vec<Vec<f64>> = [0.0, 0.1, 10.0, 10.1].iter().map(|&x| vec![x]).collect();
        let limits = Limits::default();
        for cov in [Covariance::Full, Covariance::Diagonal] {
            for seed in 0..10 {
                let g = gmm_em(&pts, 2, cov, seed, &limits).unwrap();
                let k = kmeans(&pts, 2, KMeansInit::PlusPlus, seed, &limits).unwrap();
                assert_eq!(sorted(&g), sorted(&k));
                assert_eq!(sorted(&g), [vec![0, 1], vec![2, 3]]);
            }
        }
    }

    #[test]
    fn single_component_takes_everything() {
        let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![(i % 3) as f64, (i / 3) as f64 * 0.5]).collect();
        let comps = m_step(&pts, &vec![vec![1.0]; 9], Covariance::Full, 1e-6);
        let (_, resp) = e_step(&pts, &comps);
        assert!(resp.iter().all(|r| r == &[1.0]));
        let p = gmm_em(&pts, 1, Covariance::Diagonal, 4, &Limits::default()).unwrap();
        assert_eq!(p.assignment, [0; 9]);
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..12 {
            let m = rng.gen_range(5..80);
            let d = rng.gen_range(1..8);
            let n = rng.gen_range(1..=m.min(6));
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..d).map(|_| (i % 3) as f64 * 2.0 + rng.gen_range(-1.0..1.0)).collect())
                .collect();
            for cov in [Covariance::Full, Covariance::Diagonal] {
                let fit = gmm_em_fit(&pts, n, cov, case, &Limits::default()).unwrap();
                for w in fit.trace.windows(2) {
                    assert!(w[1] >= w[0] - 1e-9, "case {case} {cov:?}: {} < {}", w[1], w[0]);
                }
            }
        }
    }

    #[test]
    fn constant_dimensions_hit_the_floor() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 1.0, 1.0]).collect();
        let fit = gmm_em_fit(&pts, 2, Covariance::Full, 0, &Limits::default()).unwrap();
        assert!(fit.trace.iter().all(|x| x.is_finite()));
        assert_eq!(fit.partition.n, 2);
    }
}
