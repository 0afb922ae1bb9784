use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_input, nearest, sq_dist, ClusterError, Partition, Real};

/// Farthest-first traversal from `first`: each further center maximizes
/// the distance to its nearest chosen center, ties to the lowest index.
pub fn farthest_first_centers<T: Real>(points: &[Vec<T>], n: usize, first: usize) -> Vec<usize> {
    let mut centers = vec![first];
    let mut chosen = vec![false; points.len()];
    chosen[first] = true;
    let mut d2: Vec<T> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centers.len() < n.min(points.len()) {
        let mut best: Option<usize> = None;
        for (i, &d) in d2.iter().enumerate() {
            if !chosen[i] && best.is_none_or(|b| d > d2[b]) {
                best = Some(i);
            }
        }
        let next = best.expect("unchosen point remains");
        chosen[next] = true;
        centers.push(next);
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &points[next]));
        }
    }
    centers
}

/// First center uniform by `seed`; every center owns itself, other points
/// join their nearest center.
pub fn farthest_first<T: Real>(points: &[Vec<T>], n: usize, seed: u64) -> Result<Partition<T>, ClusterError> {
    check_input(points, n)?;
    let first = ChaCha8Rng::seed_from_u64(seed).gen_range(0..points.len());
    let centers = farthest_first_centers(points, n, first);
    let coords: Vec<Vec<T>> = centers.iter().map(|&c| points[c].clone()).collect();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &coords).0).collect();
    for (id, &c) in centers.iter().enumerate() {
        labels[c] = id;
    }
    Ok(Partition::from_labels(&labels, points))
}
