//! Open-cluster decomposition via union-find.

use crate::config::BondConfiguration;

/// Plain union-find with union by rank and path compression.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
        self.rank.clear();
        self.rank.resize(n, 0);
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (hi, lo) = if self.rank[ra as usize] >= self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo as usize] = hi;
        if self.rank[hi as usize] == self.rank[lo as usize] {
            self.rank[hi as usize] += 1;
        }
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Finalized site -> cluster-id map.
///
/// Ids are assigned by first occurrence in site-index order, so re-running
/// on the same configuration gives the same ids.
#[derive(Debug, Clone)]
pub struct ClusterPartition {
    pub cluster_of: Vec<u32>,
    pub sizes: Vec<u32>,
}

impl ClusterPartition {
    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn same_cluster(&self, a: usize, b: usize) -> bool {
        self.cluster_of[a] == self.cluster_of[b]
    }

    /// Site indices of the cluster containing `site`, in index order.
    pub fn members(&self, site: usize) -> Vec<usize> {
        let id = self.cluster_of[site];
        (0..self.cluster_of.len())
            .filter(|&s| self.cluster_of[s] == id)
            .collect()
    }
}

/// Partition the box sites by open-edge connectivity.
pub fn build_clusters(config: &BondConfiguration) -> ClusterPartition {
    let n = config.lattice.n_sites();
    let mut uf = UnionFind::new(n);
    for (e, edge) in config.lattice.edges().iter().enumerate() {
        if config.open[e] {
            uf.union(edge.a, edge.b);
        }
    }
    finalize(&mut uf, n)
}

pub fn finalize(uf: &mut UnionFind, n: usize) -> ClusterPartition {
    let mut cluster_of = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        let root = uf.find(s as u32) as usize;
        if cluster_of[root] == u32::MAX {
            cluster_of[root] = sizes.len() as u32;
            sizes.push(0);
        }
        cluster_of[s] = cluster_of[root];
        sizes[cluster_of[s] as usize] += 1;
    }
    ClusterPartition { cluster_of, sizes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeBox;

    fn bfs_components(config: &BondConfiguration) -> Vec<u32> {
        let n = config.lattice.n_sites();
        let mut comp = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut queue = Vec::new();
        for s in 0..n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = next;
            queue.push(s);
            while let Some(u) = queue.pop() {
                for (ei, v) in config.lattice.incident(u) {
                    if config.open[*ei as usize] && comp[*v as usize] == u32::MAX {
                        comp[*v as usize] = next;
                        queue.push(*v as usize);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    #[test]
    fn all_closed_gives_singletons() {
        let b = LatticeBox::new(&[0, 0], &[3, 3]).unwrap();
        let c = BondConfiguration::empty(&b, 0.5);
        let p = build_clusters(&c);
        assert_eq!(p.n_clusters(), b.n_sites());
        assert!(p.sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn all_open_gives_one_cluster() {
        let b = LatticeBox::new(&[0, 0], &[3, 3]).unwrap();
        let c = BondConfiguration::full(&b, 0.5);
        let p = build_clusters(&c);
        assert_eq!(p.n_clusters(), 1);
    }

    #[test]
    fn matches_bfs_on_random_configurations() {
        let b = LatticeBox::new(&[0, 0], &[3, 3]).unwrap();
        for trial in 0..200 {
            let c = BondConfiguration::sample(0.5, &b, 2024, trial).unwrap();
            let p = build_clusters(&c);
            let bfs = bfs_components(&c);
            // same partition = ids agree as relabelings in both directions
            for s in 0..b.n_sites() {
                for t in 0..b.n_sites() {
                    assert_eq!(
                        p.cluster_of[s] == p.cluster_of[t],
                        bfs[s] == bfs[t],
                        "trial {trial}, sites {s} {t}"
                    );
                }
            }
        }
    }

    #[test]
    fn ids_stable_across_runs() {
        let b = LatticeBox::new(&[0, 0], &[4, 4]).unwrap();
        let c = BondConfiguration::sample(0.45, &b, 7, 3).unwrap();
        let p1 = build_clusters(&c);
        let p2 = build_clusters(&c);
        assert_eq!(p1.cluster_of, p2.cluster_of);
    }
}
