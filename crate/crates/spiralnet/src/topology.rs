//! Sensor deployment and cluster structure.
//!
//! Nodes are placed uniformly at random in the unit square, partitioned into
//! equally sized clusters, and each cluster gets a head plus a fixed traversal
//! path used by the incremental pass. Everything here is a pure function of
//! `(n, n_clusters, seed)`: ties are broken by lowest index so an instance is
//! bit-reproducible.
//!
//! Clusters are laid out on a grid of equal-area cells enumerated in
//! serpentine (boustrophedon) order, so clusters with adjacent indices are
//! geographically adjacent. The ring exchange walks cluster indices, which
//! makes each inter-cluster hop a short one — the shape that gives the
//! inter-cluster transport cost its O(sqrt(n_clusters)) growth.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sensor location in the unit square, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct NodePosition {
    pub x: f64,
    pub y: f64,
}

impl NodePosition {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for NodePosition {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl From<NodePosition> for [f64; 2] {
    fn from(p: NodePosition) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance in meters.
pub fn distance(a: NodePosition, b: NodePosition) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// A fully built deployment: positions, balanced clusters, heads, and the
/// per-cluster traversal paths (head first, every member exactly once).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub n: usize,
    pub n_clusters: usize,
    /// Members per cluster (`n / n_clusters`).
    pub cluster_size: usize,
    pub positions: Vec<NodePosition>,
    /// Cluster index of each node.
    pub cluster_of: Vec<usize>,
    /// Head node index of each cluster.
    pub heads: Vec<usize>,
    /// Traversal order per cluster, starting at the head.
    pub paths: Vec<Vec<usize>>,
}

impl NetworkInstance {
    /// Builds the instance for `(n, n_clusters, seed)`.
    pub fn generate(n: usize, n_clusters: usize, seed: u64) -> Result<Self> {
        let positions = place_nodes(n, seed)?;
        let cluster_of = assign_clusters(&positions, n_clusters)?;
        let (heads, paths) = select_heads_and_paths(&positions, &cluster_of, n_clusters)?;
        Ok(Self {
            n,
            n_clusters,
            cluster_size: n / n_clusters,
            positions,
            cluster_of,
            heads,
            paths,
        })
    }

    /// Node indices of one cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.cluster_of[i] == cluster).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    /// Checks the structural invariants: coordinates in the unit square,
    /// balanced clusters, and paths that are head-anchored permutations of
    /// their cluster's members.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n_clusters == 0 || !self.n.is_multiple_of(self.n_clusters) {
            return Err(Error::InvalidSize(format!(
                "n = {} must be a positive multiple of n_clusters = {}",
                self.n, self.n_clusters
            )));
        }
        if self.cluster_size != self.n / self.n_clusters
            || self.positions.len() != self.n
            || self.cluster_of.len() != self.n
            || self.heads.len() != self.n_clusters
            || self.paths.len() != self.n_clusters
        {
            return Err(Error::InvalidInstance("field lengths disagree".into()));
        }
        for p in &self.positions {
            if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                return Err(Error::InvalidInstance(format!(
                    "position ({}, {}) outside the unit square",
                    p.x, p.y
                )));
            }
        }
        for j in 0..self.n_clusters {
            let members = self.members(j);
            if members.len() != self.cluster_size {
                return Err(Error::InvalidInstance(format!(
                    "cluster {j} has {} members, expected {}",
                    members.len(),
                    self.cluster_size
                )));
            }
            let path = &self.paths[j];
            if path.first() != Some(&self.heads[j]) {
                return Err(Error::InvalidInstance(format!(
                    "path of cluster {j} does not start at its head"
                )));
            }
            let mut sorted = path.clone();
            sorted.sort_unstable();
            if sorted != members {
                return Err(Error::InvalidInstance(format!(
                    "path of cluster {j} is not a permutation of its members"
                )));
            }
        }
        Ok(())
    }
}

/// Draws `n` positions i.i.d. uniform on the closed unit square.
pub fn place_nodes(n: usize, seed: u64) -> Result<Vec<NodePosition>> {
    if n == 0 {
        return Err(Error::InvalidSize("cannot place 0 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let x = rng.random_range(0.0..=1.0);
            let y = rng.random_range(0.0..=1.0);
            NodePosition { x, y }
        })
        .collect())
}

/// Grid used for clustering: `cols` x `rows` equal-area cells, `cols` =
/// ceil(sqrt(n_clusters)), enough cells to hold every cluster.
fn grid_dims(n_clusters: usize) -> (usize, usize) {
    let cols = (n_clusters as f64).sqrt().ceil() as usize;
    let rows = n_clusters.div_ceil(cols);
    (cols, rows)
}

/// Serpentine enumeration: even rows left to right, odd rows right to left.
fn serpentine_index(row: usize, col: usize, cols: usize) -> usize {
    let c = if row.is_multiple_of(2) { col } else { cols - 1 - col };
    row * cols + c
}

fn cell_center(index: usize, cols: usize, rows: usize) -> NodePosition {
    let row = index / cols;
    let c = index % cols;
    let col = if row.is_multiple_of(2) { c } else { cols - 1 - c };
    NodePosition {
        x: (col as f64 + 0.5) / cols as f64,
        y: (row as f64 + 0.5) / rows as f64,
    }
}

/// Partitions nodes into `n_clusters` balanced clusters.
///
/// Each node starts in the grid cell that contains it; nodes in surplus cells
/// (grids may have more cells than clusters) start unassigned. Nodes are then
/// reassigned in node-index order from over-full cells to the nearest
/// under-full cell center until every cluster holds exactly `n / n_clusters`
/// members.
pub fn assign_clusters(positions: &[NodePosition], n_clusters: usize) -> Result<Vec<usize>> {
    let n = positions.len();
    if n == 0 || n_clusters == 0 || !n.is_multiple_of(n_clusters) {
        return Err(Error::InvalidSize(format!(
            "n = {n} must be a positive multiple of n_clusters = {n_clusters}"
        )));
    }
    let target = n / n_clusters;
    let (cols, rows) = grid_dims(n_clusters);

    let mut assigned: Vec<Option<usize>> = positions
        .iter()
        .map(|p| {
            let col = ((p.x * cols as f64) as usize).min(cols - 1);
            let row = ((p.y * rows as f64) as usize).min(rows - 1);
            let cell = serpentine_index(row, col, cols);
            (cell < n_clusters).then_some(cell)
        })
        .collect();
    let centers: Vec<NodePosition> = (0..n_clusters).map(|j| cell_center(j, cols, rows)).collect();
    let mut sizes = vec![0usize; n_clusters];
    for &a in assigned.iter().flatten() {
        sizes[a] += 1;
    }

    loop {
        let balanced =
            assigned.iter().all(Option::is_some) && sizes.iter().all(|&s| s == target);
        if balanced {
            break;
        }
        let mut moved = false;
        for i in 0..n {
            let over = match assigned[i] {
                None => true,
                Some(j) => sizes[j] > target,
            };
            if !over {
                continue;
            }
            let dest = (0..n_clusters)
                .filter(|&j| sizes[j] < target)
                .min_by(|&a, &b| {
                    distance(positions[i], centers[a])
                        .partial_cmp(&distance(positions[i], centers[b]))
                        .expect("finite distances")
                        .then(a.cmp(&b))
                });
            let Some(dest) = dest else { continue };
            if let Some(src) = assigned[i] {
                sizes[src] -= 1;
            }
            assigned[i] = Some(dest);
            sizes[dest] += 1;
            moved = true;
        }
        // Every pass with residual imbalance moves at least one node, so the
        // total excess shrinks strictly and the loop terminates.
        if !moved {
            return Err(Error::InvalidInstance("cluster rebalancing stalled".into()));
        }
    }
    Ok(assigned.into_iter().map(|a| a.expect("assigned")).collect())
}

/// Picks each cluster's head (member nearest the cluster centroid) and builds
/// the traversal path (greedy nearest neighbour from the head). Ties go to
/// the lowest node index.
pub fn select_heads_and_paths(
    positions: &[NodePosition],
    cluster_of: &[usize],
    n_clusters: usize,
) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for (i, &j) in cluster_of.iter().enumerate() {
        if j >= n_clusters {
            return Err(Error::InvalidInstance(format!(
                "node {i} assigned to cluster {j}, but there are only {n_clusters} clusters"
            )));
        }
        members[j].push(i);
    }

    let mut heads = Vec::with_capacity(n_clusters);
    let mut paths = Vec::with_capacity(n_clusters);
    for (j, cluster) in members.iter().enumerate() {
        if cluster.is_empty() {
            return Err(Error::InvalidInstance(format!("cluster {j} is empty")));
        }
        let centroid = NodePosition {
            x: cluster.iter().map(|&i| positions[i].x).sum::<f64>() / cluster.len() as f64,
            y: cluster.iter().map(|&i| positions[i].y).sum::<f64>() / cluster.len() as f64,
        };
        let head = *cluster
            .iter()
            .min_by(|&&a, &&b| {
                distance(positions[a], centroid)
                    .partial_cmp(&distance(positions[b], centroid))
                    .expect("finite distances")
                    .then(a.cmp(&b))
            })
            .expect("non-empty cluster");

        let mut path = vec![head];
        let mut remaining: Vec<usize> = cluster.iter().copied().filter(|&i| i != head).collect();
        let mut current = head;
        while !remaining.is_empty() {
            let next = *remaining
                .iter()
                .min_by(|&&a, &&b| {
                    distance(positions[current], positions[a])
                        .partial_cmp(&distance(positions[current], positions[b]))
                        .expect("finite distances")
                        .then(a.cmp(&b))
                })
                .expect("non-empty remaining");
            remaining.retain(|&i| i != next);
            path.push(next);
            current = next;
        }
        heads.push(head);
        paths.push(path);
    }
    Ok((heads, paths))
}
