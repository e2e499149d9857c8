//! Seeded k-means (k-means++ seeding, Lloyd iterations, best of several
//! restarts) and silhouette-based selection of k.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;

pub const RESTARTS: usize = 10;
const MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(points: &[Vec<f64>]) -> Result<usize, StatsError> {
    let d = points.first().map(Vec::len).unwrap_or(0);
    if points.is_empty() || d == 0 {
        return Err(StatsError::InvalidArgument("need at least one point with d >= 1".into()));
    }
    if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
        return Err(StatsError::InvalidArgument("points must share one dimension and be finite".into()));
    }
    Ok(d)
}

fn distinct_points(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points.iter().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let idx = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in nearest.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        let c = points[idx].clone();
        for (slot, p) in nearest.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (best, d) = centroids
                .iter()
                .enumerate()
                .map(|(j, c)| (j, sq_dist(p, c)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            inertia += d;
            best
        })
        .collect();
    (labels, inertia)
}

fn lloyd(points: &[Vec<f64>], k: usize, seed: u64) -> KMeansFit {
    let d = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let (mut labels, mut inertia) = assign(points, &centroids);
    let mut trace = vec![inertia];
    for _ in 0..MAX_ITER {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            // an empty cluster keeps its previous centroid
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let (next, next_inertia) = assign(points, &centroids);
        trace.push(next_inertia);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    KMeansFit {
        k,
        assignments: labels,
        centroids,
        inertia,
        inertia_trace: trace,
    }
}

/// Best-of-[`RESTARTS`] k-means. Deterministic for a fixed seed; ties in
/// inertia go to the lowest restart index.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit, StatsError> {
    validate(points)?;
    if k == 0 || k > points.len() {
        return Err(StatsError::InvalidArgument(format!(
            "k = {k} must be in 1..={}",
            points.len()
        )));
    }
    if distinct_points(points) < k {
        return Err(StatsError::InvalidArgument(format!(
            "only {} distinct points for k = {k}",
            distinct_points(points)
        )));
    }
    let fits: Vec<KMeansFit> = (0..RESTARTS as u64)
        .into_par_iter()
        .map(|r| lloyd(points, k, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r)))
        .collect();
    let best = fits
        .into_iter()
        .reduce(|best, f| if f.inertia < best.inertia { f } else { best })
        .expect("at least one restart");
    Ok(best)
}

/// Mean silhouette width (Euclidean). Points in singleton clusters, and
/// points whose cohesion and separation are both zero, score 0.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Result<f64, StatsError> {
    validate(points)?;
    if labels.len() != points.len() {
        return Err(StatsError::LengthMismatch(points.len(), labels.len()));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(StatsError::Undefined("silhouette needs at least two non-empty clusters".into()));
    }
    let n = points.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += sq_dist(&points[i], &points[j]).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom <= 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .sum();
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub silhouette: f64,
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub k_best: usize,
    /// One entry per k; the inertia column is the elbow curve.
    pub candidates: Vec<KCandidate>,
}

/// Picks the k with the highest mean silhouette over `k_range`.
pub fn select_k(
    points: &[Vec<f64>],
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<KSelection, StatsError> {
    validate(points)?;
    let n = points.len();
    if *k_range.start() < 2 || *k_range.end() > n.saturating_sub(1) || k_range.is_empty() {
        return Err(StatsError::InvalidArgument(format!(
            "k range {k_range:?} must lie within [2, {}]",
            n.saturating_sub(1)
        )));
    }
    let mut candidates = Vec::new();
    for k in k_range {
        let fit = kmeans(points, k, seed)?;
        candidates.push(KCandidate {
            k,
            silhouette: silhouette(points, &fit.assignments)?,
            inertia: fit.inertia,
        });
    }
    let k_best = candidates
        .iter()
        .fold(None::<&KCandidate>, |best, c| match best {
            Some(b) if b.silhouette >= c.silhouette => Some(b),
            _ => Some(c),
        })
        .map(|c| c.k)
        .expect("non-empty range");
    Ok(KSelection { k_best, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..30 {
                pts.push(vec![center[0] + rng.gen_range(-1.0..1.0), center[1] + rng.gen_range(-1.0..1.0)]);
                truth.push(c);
            }
        }
        (pts, truth)
    }

    #[test]
    fn recovers_planted_blobs() {
        let (pts, truth) = blobs(7);
        let fit = kmeans(&pts, 3, 42).unwrap();
        // same partition up to relabeling: labels agree within each true blob
        for c in 0..3 {
            let labels: Vec<usize> = (0..pts.len()).filter(|&i| truth[i] == c).map(|i| fit.assignments[i]).collect();
            assert!(labels.iter().all(|&l| l == labels[0]));
        }
        let sel = select_k(&pts, 2..=6, 1).unwrap();
        assert_eq!(sel.k_best, 3);
        assert_eq!(sel.candidates.len(), 5);
    }

    #[test]
    fn k1_centroid_is_mean() {
        let (pts, _) = blobs(3);
        let fit = kmeans(&pts, 1, 0).unwrap();
        let n = pts.len() as f64;
        for dim in 0..2 {
            let m: f64 = pts.iter().map(|p| p[dim]).sum::<f64>() / n;
            assert!((fit.centroids[0][dim] - m).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_point_has_zero_inertia() {
        let pts = vec![vec![1.5, -2.0]; 8];
        let fit = kmeans(&pts, 1, 9).unwrap();
        assert_eq!(fit.inertia, 0.0);
        assert!(kmeans(&pts, 2, 9).is_err());
    }

    #[test]
    fn inertia_never_increases() {
        let (pts, _) = blobs(11);
        for seed in 0..20 {
            let fit = kmeans(&pts, 4, seed).unwrap();
            assert!(fit.inertia_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let (pts, _) = blobs(5);
        assert_eq!(kmeans(&pts, 3, 77).unwrap(), kmeans(&pts, 3, 77).unwrap());
        assert_eq!(select_k(&pts, 2..=5, 3).unwrap(), select_k(&pts, 2..=5, 3).unwrap());
    }

    #[test]
    fn duplicated_blobs_silhouette_is_one() {
        let mut pts = vec![vec![0.0, 0.0]; 10];
        pts.extend(vec![vec![3.0, 4.0]; 10]);
        let sel = select_k(&pts, 2..=2, 0).unwrap();
        assert!((sel.candidates[0].silhouette - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_larger_than_n() {
        assert!(kmeans(&[vec![1.0]], 2, 0).is_err());
        assert!(select_k(&[vec![1.0], vec![2.0], vec![3.0]], 2..=3, 0).is_err());
    }
}
