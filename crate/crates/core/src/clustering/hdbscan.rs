//! HDBSCAN: density-based hierarchical clustering with excess-of-mass
//! cluster selection.
//!
//! Pipeline: core distances, mutual-reachability graph, Prim MST, single
//! linkage hierarchy, condensed tree, stability-based flat clustering.
//! Merges at exactly equal heights are collapsed into one multi-way node, so
//! the hierarchy does not depend on how ties in the MST were broken.

use alloc::vec;
use alloc::vec::Vec;

use super::ClusteringError;
use crate::matrix::{squared_distance, Matrix};

/// Density level assigned to zero distances.
const LAMBDA_MAX: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct HdbscanResult {
    /// Cluster id per point; `-1` marks noise.
    pub labels: Vec<i64>,
    /// Per cluster, the member with the smallest summed mutual-reachability
    /// distance to the other members.
    pub cluster_medoids: Vec<usize>,
    pub stabilities: Vec<f64>,
}

impl HdbscanResult {
    pub fn num_clusters(&self) -> usize {
        self.cluster_medoids.len()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }
}

struct Dendrogram {
    /// Merge height; unused for leaves.
    height: Vec<f64>,
    children: Vec<Vec<usize>>,
    size: Vec<usize>,
}

struct CondensedCluster {
    birth: f64,
    stability: f64,
    children: Vec<usize>,
    /// Points that leave the hierarchy directly from this cluster.
    points: Vec<usize>,
}

fn lambda(height: f64) -> f64 {
    if height > 0.0 {
        (1.0 / height).min(LAMBDA_MAX)
    } else {
        LAMBDA_MAX
    }
}

fn distance_matrix(points: &Matrix) -> Vec<f64> {
    let n = points.rows();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = libm::sqrt(squared_distance(points.row(i), points.row(j)));
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Distance to the `min_samples`-th nearest point, counting the point itself.
fn core_distances(dist: &[f64], n: usize, min_samples: usize) -> Vec<f64> {
    let k = min_samples.min(n) - 1;
    (0..n)
        .map(|i| {
            let mut row = dist[i * n..(i + 1) * n].to_vec();
            row.sort_by(f64::total_cmp);
            row[k]
        })
        .collect()
}

/// Prim's algorithm on the dense graph; ties go to the lowest vertex index.
fn minimum_spanning_tree(weights: &[f64], n: usize) -> Vec<(usize, usize, f64)> {
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    key[0] = 0.0;
    for _ in 0..n {
        let mut v = usize::MAX;
        for u in 0..n {
            if !in_tree[u] && (v == usize::MAX || key[u] < key[v]) {
                v = u;
            }
        }
        in_tree[v] = true;
        if parent[v] != usize::MAX {
            edges.push((parent[v], v, key[v]));
        }
        for u in 0..n {
            let w = weights[v * n + u];
            if !in_tree[u] && w < key[u] {
                key[u] = w;
                parent[u] = v;
            }
        }
    }
    edges
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn single_linkage(mut edges: Vec<(usize, usize, f64)>, n: usize) -> Dendrogram {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut tree = Dendrogram { height: vec![0.0; n], children: vec![Vec::new(); n], size: vec![1; n] };
    let mut uf: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    for (a, b, w) in edges {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        let mut children = Vec::new();
        for node in [node_of[ra], node_of[rb]] {
            if !tree.children[node].is_empty() && tree.height[node] == w {
                let absorbed = core::mem::take(&mut tree.children[node]);
                children.extend(absorbed);
            } else {
                children.push(node);
            }
        }
        let id = tree.height.len();
        tree.size.push(children.iter().map(|&c| tree.size[c]).sum());
        tree.height.push(w);
        tree.children.push(children);
        uf[rb] = ra;
        node_of[ra] = id;
    }
    tree
}

fn leaves_under(tree: &Dendrogram, node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if tree.children[x].is_empty() {
            out.push(x);
        } else {
            stack.extend(tree.children[x].iter().rev());
        }
    }
}

fn condense(tree: &Dendrogram, root: usize, min_cluster_size: usize) -> Vec<CondensedCluster> {
    let mut clusters = vec![CondensedCluster { birth: 0.0, stability: 0.0, children: Vec::new(), points: Vec::new() }];
    let mut stack = vec![(root, 0usize)];
    while let Some((node, cid)) = stack.pop() {
        if tree.children[node].is_empty() {
            let c = &mut clusters[cid];
            c.stability += LAMBDA_MAX - c.birth;
            c.points.push(node);
            continue;
        }
        let level = lambda(tree.height[node]);
        let children = &tree.children[node];
        let big = children.iter().filter(|&&c| tree.size[c] >= min_cluster_size).count();
        let mut pending = Vec::new();
        for &child in children {
            let size = tree.size[child];
            if size >= min_cluster_size && big == 1 {
                // The only large child carries the cluster on.
                pending.push((child, cid));
                continue;
            }
            let gain = size as f64 * (level - clusters[cid].birth);
            clusters[cid].stability += gain;
            if size >= min_cluster_size {
                let new_id = clusters.len();
                clusters.push(CondensedCluster {
                    birth: level,
                    stability: 0.0,
                    children: Vec::new(),
                    points: Vec::new(),
                });
                clusters[cid].children.push(new_id);
                pending.push((child, new_id));
            } else {
                let mut fallen = Vec::new();
                leaves_under(tree, child, &mut fallen);
                clusters[cid].points.extend(fallen);
            }
        }
        stack.extend(pending.into_iter().rev());
    }
    clusters
}

/// Excess-of-mass selection. The root competes only when it never splits,
/// in which case it is the single cluster.
fn select_clusters(clusters: &[CondensedCluster]) -> Vec<bool> {
    let n = clusters.len();
    let mut selected = vec![false; n];
    let mut subtree = vec![0.0; n];
    for c in (0..n).rev() {
        let own = clusters[c].stability;
        if clusters[c].children.is_empty() {
            selected[c] = true;
            subtree[c] = own;
            continue;
        }
        let below: f64 = clusters[c].children.iter().map(|&ch| subtree[ch]).sum();
        if below > own || c == 0 {
            subtree[c] = below;
        } else {
            subtree[c] = own;
            selected[c] = true;
            let mut stack = clusters[c].children.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(clusters[d].children.iter().copied());
            }
        }
    }
    selected
}

fn members(clusters: &[CondensedCluster], c: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![c];
    while let Some(x) = stack.pop() {
        out.extend(clusters[x].points.iter().copied());
        stack.extend(clusters[x].children.iter().copied());
    }
    out.sort_unstable();
    out
}

pub fn hdbscan(points: &Matrix, min_cluster_size: usize, min_samples: usize) -> Result<HdbscanResult, ClusteringError> {
    if min_cluster_size < 2 || min_samples < 1 {
        return Err(ClusteringError::InvalidParameter("HDBSCAN needs min_cluster_size >= 2 and min_samples >= 1"));
    }
    let n = points.rows();
    if n < min_cluster_size {
        return Err(ClusteringError::TooFewPoints { points: n, required: min_cluster_size });
    }

    let dist = distance_matrix(points);
    let core = core_distances(&dist, n, min_samples);
    let mut reach = dist;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = &mut reach[i * n + j];
                *v = v.max(core[i]).max(core[j]);
            }
        }
    }

    let tree = single_linkage(minimum_spanning_tree(&reach, n), n);
    let root = tree.height.len() - 1;
    let condensed = condense(&tree, root, min_cluster_size);
    let selected = select_clusters(&condensed);

    let mut labels = vec![-1i64; n];
    let mut cluster_medoids = Vec::new();
    let mut stabilities = Vec::new();
    for (c, _) in selected.iter().enumerate().filter(|(_, s)| **s) {
        let id = cluster_medoids.len() as i64;
        let group = members(&condensed, c);
        for &p in &group {
            labels[p] = id;
        }
        let medoid = group
            .iter()
            .map(|&p| {
                let cost: f64 = group.iter().map(|&q| reach[p * n + q]).sum();
                (p, cost)
            })
            .fold((usize::MAX, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
            .0;
        cluster_medoids.push(medoid);
        stabilities.push(condensed[c].stability);
    }

    Ok(HdbscanResult { labels, cluster_medoids, stabilities })
}
