//! Ward's minimum-variance agglomerative clustering for one-dimensional data.
//!
//! Clusters are tracked by size and mean only. The cost of merging `A` and `B`
//! is the increase in total within-cluster sum of squares,
//! `n_A n_B / (n_A + n_B) * (mean_A - mean_B)^2`.

use serde::{Deserialize, Serialize};

use crate::composition::Composition;
use crate::error::{ClassifyError, Result};

/// One agglomeration step. Leaves are clusters `0..n`; the cluster created by
/// merge `i` gets id `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub cost: f64,
    /// Size of the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_count: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Indices of merges whose cost is lower than the previous merge's.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.merges
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].cost < w[0].cost)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

pub fn ward_linkage(values: &[f64]) -> Result<Dendrogram> {
    if values.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFinite(i));
    }
    let n = values.len();
    // (cluster id, size, mean) for the active clusters, ordered by id
    let mut active: Vec<(usize, usize, f64)> =
        values.iter().enumerate().map(|(i, &v)| (i, 1, v)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    while active.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let cost = ward_increase(active[i].1, active[i].2, active[j].1, active[j].2);
                if cost < best.2 {
                    best = (i, j, cost);
                }
            }
        }
        let (i, j, cost) = best;
        let (id_a, size_a, mean_a) = active[i];
        let (id_b, size_b, mean_b) = active[j];
        let size = size_a + size_b;
        let mean = (size_a as f64 * mean_a + size_b as f64 * mean_b) / size as f64;
        merges.push(Merge {
            left: id_a,
            right: id_b,
            cost,
            size,
        });
        active.remove(j);
        active.remove(i);
        // new ids are larger than every active id, so pushing keeps id order
        active.push((n + merges.len() - 1, size, mean));
    }

    Ok(Dendrogram {
        leaf_count: n,
        merges,
    })
}

#[inline]
pub fn ward_increase(size_a: usize, mean_a: f64, size_b: usize, mean_b: f64) -> f64 {
    let (na, nb) = (size_a as f64, size_b as f64);
    na * nb / (na + nb) * (mean_a - mean_b).powi(2)
}

/// A flat clustering read off the dendrogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clusters {
    /// Leaf indices per cluster, clusters ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster sizes left to right, when every cluster is a contiguous run of
    /// indices (always the case for sorted 1-d input in practice, not in general).
    pub composition: Option<Composition>,
}

/// Undo the last `k - 1` merges.
pub fn cut(d: &Dendrogram, k: usize) -> Result<Clusters> {
    let n = d.leaf_count;
    if k == 0 || k > n {
        return Err(ClassifyError::KOutOfRange { k, n });
    }
    // union-find over the first n - k merges
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, m) in d.merges.iter().take(n - k).enumerate() {
        let id = n + i;
        parent[m.left] = id;
        parent[m.right] = id;
    }
    let mut roots: Vec<(usize, Vec<usize>)> = Vec::new();
    for leaf in 0..n {
        let r = find(&mut parent, leaf);
        match roots.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(leaf),
            None => roots.push((r, vec![leaf])),
        }
    }
    let clusters: Vec<Vec<usize>> = roots.into_iter().map(|(_, m)| m).collect();
    let contiguous = clusters
        .iter()
        .scan(0usize, |next, c| {
            let ok = c[0] == *next && c.windows(2).all(|w| w[1] == w[0] + 1);
            *next += c.len();
            Some(ok)
        })
        .all(|ok| ok);
    let composition = contiguous.then(|| {
        Composition::new(clusters.iter().map(Vec::len).collect()).expect("non-empty clusters")
    });
    Ok(Clusters {
        clusters,
        composition,
    })
}

/// Total within-cluster sum of squares of `values` under `clusters`.
pub fn within_ss(values: &[f64], clusters: &[Vec<usize>]) -> f64 {
    clusters
        .iter()
        .map(|c| {
            let mean = c.iter().map(|&i| values[i]).sum::<f64>() / c.len() as f64;
            c.iter().map(|&i| (values[i] - mean).powi(2)).sum::<f64>()
        })
        .sum()
}
