//! Unit-vertex-capacity maximum flow on the open subgraph.
//!
//! Deciding whether a site is joined to three targets by open self-avoiding
//! paths that are pairwise disjoint away from the start is a Menger-type
//! question: split every vertex into an in/out pair with a capacity-one arc,
//! give open edges capacity one in both directions, attach the three targets
//! to a super sink, and ask for flow value three out of the start.

use crate::config::BondConfiguration;
use crate::lattice::Site;

#[derive(Debug, Clone)]
pub struct PathSet {
    pub k: Site,
    pub targets: [Site; 3],
    /// `paths[i]` runs from `k` to `targets[i]`, sites inclusive.
    pub paths: [Vec<Site>; 3],
}

const NO_ARC: u32 = u32::MAX;

/// Flow network over one open cluster, reusable across start sites.
pub struct ClusterFlow {
    /// box site index -> local vertex id (u32::MAX if not in cluster)
    pub local_of: Vec<u32>,
    /// local vertex id -> box site index
    pub site_of: Vec<u32>,
    // arc arrays (paired: arc ^ 1 is the reverse)
    to: Vec<u32>,
    next: Vec<u32>,
    head: Vec<u32>,
    base_cap: Vec<u8>,
    cap: Vec<u8>,
    /// arc id of in(v) -> out(v) for each local v
    vertex_arc: Vec<u32>,
    base_arcs: usize,
    n_nodes: usize,
}

#[inline]
fn node_in(v: u32) -> u32 {
    2 * v
}

#[inline]
fn node_out(v: u32) -> u32 {
    2 * v + 1
}

impl ClusterFlow {
    /// Build the split-vertex network over the sites of one cluster.
    pub fn new(config: &BondConfiguration, members: &[usize]) -> Self {
        let n_box = config.lattice.n_sites();
        let mut local_of = vec![u32::MAX; n_box];
        let mut site_of = Vec::with_capacity(members.len());
        for (i, &s) in members.iter().enumerate() {
            local_of[s] = i as u32;
            site_of.push(s as u32);
        }
        let nv = members.len();
        let n_nodes = 2 * nv + 1; // +1 for the sink
        let mut g = ClusterFlow {
            local_of,
            site_of,
            to: Vec::new(),
            next: Vec::new(),
            head: vec![NO_ARC; n_nodes],
            base_cap: Vec::new(),
            cap: Vec::new(),
            vertex_arc: Vec::with_capacity(nv),
            base_arcs: 0,
            n_nodes,
        };
        for v in 0..nv as u32 {
            let a = g.push_arc(node_in(v), node_out(v), 1);
            g.vertex_arc.push(a);
        }
        for (ei, e) in config.lattice.edges().iter().enumerate() {
            if !config.open[ei] {
                continue;
            }
            let (la, lb) = (g.local_of[e.a as usize], g.local_of[e.b as usize]);
            if la == u32::MAX || lb == u32::MAX {
                continue;
            }
            g.push_arc(node_out(la), node_in(lb), 1);
            g.push_arc(node_out(lb), node_in(la), 1);
        }
        g.base_arcs = g.to.len();
        g
    }

    fn push_arc(&mut self, from: u32, to: u32, cap: u8) -> u32 {
        let id = self.to.len() as u32;
        self.to.push(to);
        self.next.push(self.head[from as usize]);
        self.head[from as usize] = id;
        self.base_cap.push(cap);
        self.to.push(from);
        self.next.push(self.head[to as usize]);
        self.head[to as usize] = id + 1;
        self.base_cap.push(0);
        id
    }

    fn sink(&self) -> u32 {
        (self.n_nodes - 1) as u32
    }

    /// Maximum number of open paths from `k` to the targets, disjoint except
    /// at `k`, capped at 3. All arguments are box site indices that must lie
    /// in this cluster. Returns the flow value.
    pub fn triple_flow(&mut self, k: usize, targets: [usize; 3]) -> u32 {
        self.prepare(k, targets);
        let mut flow = 0;
        while flow < 3 && self.augment(node_out(self.local_of[k])) {
            flow += 1;
        }
        flow
    }

    /// Like `triple_flow`, but extracts the three witness paths (as box site
    /// indices, from `k` to each target) when the flow value reaches 3.
    pub fn triple_paths(&mut self, k: usize, targets: [usize; 3]) -> Option<[Vec<usize>; 3]> {
        if self.triple_flow(k, targets) < 3 {
            return None;
        }
        let kv = self.local_of[k];
        let mut out: [Vec<usize>; 3] = Default::default();
        for _ in 0..3 {
            let mut path = vec![k];
            let mut node = node_out(kv);
            let target_local = loop {
                // unique flow-carrying arc out of `node`
                let mut a = self.head[node as usize];
                let mut chosen = NO_ARC;
                while a != NO_ARC {
                    if a % 2 == 0 && self.cap[a as usize] < self.base_cap[a as usize] {
                        chosen = a;
                        break;
                    }
                    a = self.next[a as usize];
                }
                debug_assert_ne!(chosen, NO_ARC, "flow conservation violated");
                self.cap[chosen as usize] += 1; // consume
                let nxt = self.to[chosen as usize];
                if nxt == self.sink() {
                    break node / 2;
                }
                if nxt % 2 == 0 {
                    // arrived at in(v): record the site
                    path.push(self.site_of[(nxt / 2) as usize] as usize);
                }
                node = nxt;
            };
            let site = self.site_of[target_local as usize] as usize;
            let slot = targets.iter().position(|&t| t == site).expect("sink arc");
            out[slot] = path;
        }
        Some(out)
    }

    fn prepare(&mut self, k: usize, targets: [usize; 3]) {
        // Drop the previous run's sink arcs. They were appended last, so
        // rewinding the head pointers of their endpoints is enough.
        while self.to.len() > self.base_arcs {
            let rev = self.to.len() - 1;
            let fwd = rev - 1;
            let from = self.to[rev] as usize;
            let to = self.to[fwd] as usize;
            self.head[to] = self.next[rev];
            self.head[from] = self.next[fwd];
            self.to.truncate(fwd);
            self.next.truncate(fwd);
            self.base_cap.truncate(fwd);
        }
        self.cap.clear();
        self.cap.extend_from_slice(&self.base_cap);
        for t in targets {
            let lt = self.local_of[t];
            self.push_arc(node_out(lt), self.sink(), 1);
        }
        self.cap.resize(self.base_cap.len(), 0);
        self.cap[self.base_arcs..].copy_from_slice(&self.base_cap[self.base_arcs..]);
        // forbid routing through k as an interior vertex
        let ka = self.vertex_arc[self.local_of[k] as usize] as usize;
        self.cap[ka] = 0;
    }

    fn augment(&mut self, source: u32) -> bool {
        let mut parent = vec![NO_ARC; self.n_nodes];
        let mut queue = std::collections::VecDeque::new();
        parent[source as usize] = NO_ARC - 1; // mark visited
        queue.push_back(source);
        let sink = self.sink();
        'bfs: while let Some(u) = queue.pop_front() {
            let mut a = self.head[u as usize];
            while a != NO_ARC {
                let v = self.to[a as usize];
                if self.cap[a as usize] > 0 && parent[v as usize] == NO_ARC {
                    parent[v as usize] = a;
                    if v == sink {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
                a = self.next[a as usize];
            }
        }
        if parent[sink as usize] == NO_ARC {
            return false;
        }
        let mut v = sink;
        while v != source {
            let a = parent[v as usize];
            self.cap[a as usize] -= 1;
            self.cap[(a ^ 1) as usize] += 1;
            v = self.to[(a ^ 1) as usize];
        }
        true
    }
}
