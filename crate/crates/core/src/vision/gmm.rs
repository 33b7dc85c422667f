//! Full-covariance Gaussian mixtures over RGB colours.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse(m: &Mat3, d: f64) -> Mat3 {
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [c(1, 1, 2, 2) / d, -c(0, 1, 2, 2) / d, c(0, 1, 1, 2) / d],
        [-c(1, 0, 2, 2) / d, c(0, 0, 2, 2) / d, -c(0, 0, 1, 2) / d],
        [c(1, 0, 2, 1) / d, -c(0, 0, 2, 1) / d, c(0, 0, 1, 1) / d],
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec3,
    pub cov: Mat3,
    inv: Mat3,
    log_det: f64,
}

impl Component {
    /// Negative log of `weight · N(z; mean, cov)`.
    pub fn cost(&self, z: &Vec3) -> f64 {
        let d = [z[0] - self.mean[0], z[1] - self.mean[1], z[2] - self.mean[2]];
        let mut q = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                q += d[r] * self.inv[r][c] * d[c];
            }
        }
        -self.weight.ln() + 0.5 * (self.log_det + q) + 1.5 * LN_2PI
    }

    fn trace_inv(&self) -> f64 {
        self.inv[0][0] + self.inv[1][1] + self.inv[2][2]
    }
}

/// Mixture whose covariances carry a ridge prior: each is `(S + λI) / n`
/// for scatter `S` over `n` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Gmm {
    pub components: Vec<Component>,
    pub ridge: f64,
}

impl Gmm {
    /// Smallest per-pixel cost and the component achieving it.
    pub fn best(&self, z: &Vec3) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, c) in self.components.iter().enumerate() {
            let v = c.cost(z);
            if v < best.0 {
                best = (v, k);
            }
        }
        best
    }

    /// Prior term paired with the ridge: `λ/2 · Σ_k tr(Σ_k⁻¹)`.
    pub fn prior_energy(&self) -> f64 {
        0.5 * self.ridge * self.components.iter().map(Component::trace_inv).sum::<f64>()
    }

    /// Fits one component per cluster id in `assign` (`0..k`); clusters
    /// with no samples are dropped.
    pub fn fit(samples: &[Vec3], assign: &[usize], k: usize, ridge: f64) -> Gmm {
        let total = samples.len() as f64;
        let mut components = Vec::with_capacity(k);
        for c in 0..k {
            let members: Vec<&Vec3> = samples.iter().zip(assign).filter(|(_, &a)| a == c).map(|(s, _)| s).collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len() as f64;
            let mut mean = [0.0; 3];
            for s in &members {
                for d in 0..3 {
                    mean[d] += s[d];
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            let mut cov = [[0.0; 3]; 3];
            for s in &members {
                for r in 0..3 {
                    for q in 0..3 {
                        cov[r][q] += (s[r] - mean[r]) * (s[q] - mean[q]);
                    }
                }
            }
            for (r, row) in cov.iter_mut().enumerate() {
                row[r] += ridge;
                row.iter_mut().for_each(|v| *v /= n);
            }
            let d = det(&cov);
            components.push(Component { weight: n / total, mean, cov, inv: inverse(&cov, d), log_det: d.ln() });
        }
        Gmm { components, ridge }
    }
}

/// k-means++ seeding then Lloyd iterations; deterministic in `seed`.
/// Returns the cluster id of each sample.
pub fn kmeans(samples: &[Vec3], k: usize, iterations: usize, seed: u64) -> Vec<usize> {
    let n = samples.len();
    if n == 0 || k <= 1 {
        return vec![0; n];
    }
    let d2 = |a: &Vec3, b: &Vec3| (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centres = vec![samples[rng.random_range(0..n)]];
    let mut nearest: Vec<f64> = samples.iter().map(|s| d2(s, &centres[0])).collect();
    while centres.len() < k {
        let total: f64 = nearest.iter().sum();
        if total == 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, &d) in nearest.iter().enumerate() {
            if target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        let c = samples[pick];
        for (s, m) in samples.iter().zip(nearest.iter_mut()) {
            *m = m.min(d2(s, &c));
        }
        centres.push(c);
    }
    let mut assign = vec![0usize; n];
    for _ in 0..iterations {
        let mut changed = false;
        for (s, a) in samples.iter().zip(assign.iter_mut()) {
            let mut best = (f64::INFINITY, 0);
            for (ci, c) in centres.iter().enumerate() {
                let d = d2(s, c);
                if d < best.0 {
                    best = (d, ci);
                }
            }
            changed |= *a != best.1;
            *a = best.1;
        }
        let mut sums = vec![[0.0f64; 4]; centres.len()];
        for (s, &a) in samples.iter().zip(&assign) {
            for d in 0..3 {
                sums[a][d] += s[d];
            }
            sums[a][3] += 1.0;
        }
        for (c, s) in centres.iter_mut().zip(&sums) {
            if s[3] > 0.0 {
                *c = [s[0] / s[3], s[1] / s[3], s[2] / s[3]];
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_matches_closed_form() {
        let samples = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [2.0, 4.0, 6.0]];
        let g = Gmm::fit(&samples, &[0; 4], 1, 1.0);
        let c = &g.components[0];
        assert_eq!(c.mean, [1.0, 2.0, 1.5]);
        // scatter of x is 4, plus ridge 1, over 4 samples
        assert!((c.cov[0][0] - 1.25).abs() < 1e-12);
        assert_eq!(c.weight, 1.0);
        let z = [1.0, 2.0, 1.5];
        let expect = 0.5 * det(&c.cov).ln() + 1.5 * LN_2PI;
        assert!((c.cost(&z) - expect).abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn inverse_is_inverse() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = inverse(&m, det(&m));
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| m[r][k] * inv[k][c]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kmeans_separates_clusters() {
        let mut samples = vec![[0.0, 0.0, 0.0]; 10];
        samples.extend(vec![[200.0, 10.0, 10.0]; 7]);
        let a = kmeans(&samples, 2, 10, 3);
        assert!(a[..10].iter().all(|&x| x == a[0]));
        assert!(a[10..].iter().all(|&x| x == a[10]));
        assert_ne!(a[0], a[10]);
        assert_eq!(a, kmeans(&samples, 2, 10, 3));
    }
}
