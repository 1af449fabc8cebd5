//! Reference computations used as test oracles. Deliberately naive.
#![allow(dead_code)]

/// P(score⁺ > score⁻) + ½·P(tie), by enumerating every positive/negative pair.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; v.len()];
    for i in 0..v.len() {
        let below = v.iter().filter(|&&x| x < v[i]).count() as f64;
        let equal = v.iter().filter(|&&x| x == v[i]).count() as f64;
        ranks[i] = below + (equal + 1.0) / 2.0;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Coefficient of determination of the least-squares line through (x, y).
pub fn linear_r2(x: &[f64], y: &[f64]) -> f64 {
    pearson(x, y).powi(2)
}

/// Column z-scores with the population standard deviation; constant columns
/// map to 0.
pub fn zscore(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mut out = rows.to_vec();
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
            1.0
        } else {
            var.sqrt()
        };
        for r in out.iter_mut() {
            r[j] = (r[j] - mean) / sd;
        }
    }
    out
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Minority rows `q ≠ p` within the `k`-th smallest distance of `p` (ties at
/// the boundary included).
pub fn knn_candidates(z: &[Vec<f64>], minority: &[usize], p: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = minority
        .iter()
        .filter(|&&q| q != p)
        .map(|&q| (sq_dist(&z[p], &z[q]), q))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let k = k.min(d.len());
    let cutoff = d[k - 1].0;
    d.into_iter()
        .filter(|&(dist, _)| dist <= cutoff * (1.0 + 1e-12))
        .map(|(_, q)| q)
        .collect()
}

/// `Some(u)` if `s = p + u·(q − p)` for some `u ∈ [0, 1]`, within `tol`.
pub fn segment_parameter(s: &[f64], p: &[f64], q: &[f64], tol: f64) -> Option<f64> {
    let dir: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    let u = if len2 == 0.0 {
        0.0
    } else {
        s.iter()
            .zip(p)
            .zip(&dir)
            .map(|((si, pi), di)| (si - pi) * di)
            .sum::<f64>()
            / len2
    };
    if !(-tol..=1.0 + tol).contains(&u) {
        return None;
    }
    let resid = s
        .iter()
        .zip(p)
        .zip(&dir)
        .map(|((si, pi), di)| (si - pi - u * di).abs())
        .fold(0.0, f64::max);
    (resid <= tol).then_some(u)
}

/// Small LCG so tests can generate inputs without going through the crate.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    pub fn uniform(&mut self) -> f64 {
        self.next_u64() as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
