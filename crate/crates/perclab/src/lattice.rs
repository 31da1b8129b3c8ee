//! Finite boxes of `Z^d` and their canonical edge ordering.
//!
//! Sites are addressed two ways: by coordinates (`&[i64]`) at the API
//! boundary and by dense indices (`usize`) in hot loops. The site index
//! order is lexicographic in the coordinates (first axis most significant),
//! and the edge order is lexicographic by lower endpoint, then axis. Both
//! orders are pure functions of the box, so anything serialized against
//! them replays bit-exactly.

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Site = Vec<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Lower endpoint (site index).
    pub a: u32,
    /// Upper endpoint, `a + e_axis`.
    pub b: u32,
    pub axis: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
    lens: Vec<usize>,
    strides: Vec<usize>,
    n_sites: usize,
    edges: Vec<Edge>,
    /// CSR adjacency: for each site, (edge index, other endpoint).
    adj_head: Vec<u32>,
    adj: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct BoxCorners {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Serialize for LatticeBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BoxCorners {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = BoxCorners::deserialize(d)?;
        LatticeBox::new(&c.lo, &c.hi).map_err(D::Error::custom)
    }
}

impl LatticeBox {
    pub fn new(lo: &[i64], hi: &[i64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "box needs matching corners with d >= 2, got d = {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter(
                "box lower corner must be componentwise <= upper corner".into(),
            ));
        }
        let lens: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .collect();
        let mut strides = vec![0usize; lens.len()];
        let mut acc = 1usize;
        for a in (0..lens.len()).rev() {
            strides[a] = acc;
            acc = acc
                .checked_mul(lens[a])
                .ok_or_else(|| Error::InvalidParameter("box too large".into()))?;
        }
        let n_sites = acc;
        if n_sites > u32::MAX as usize / 2 {
            return Err(Error::InvalidParameter("box too large".into()));
        }

        let d = lens.len();
        let mut edges = Vec::new();
        let mut coords = vec![0usize; d];
        for idx in 0..n_sites {
            let mut rem = idx;
            for a in 0..d {
                coords[a] = rem / strides[a];
                rem %= strides[a];
            }
            for a in 0..d {
                if coords[a] + 1 < lens[a] {
                    edges.push(Edge {
                        a: idx as u32,
                        b: (idx + strides[a]) as u32,
                        axis: a as u8,
                    });
                }
            }
        }

        let mut deg = vec![0u32; n_sites + 1];
        for e in &edges {
            deg[e.a as usize + 1] += 1;
            deg[e.b as usize + 1] += 1;
        }
        for i in 0..n_sites {
            deg[i + 1] += deg[i];
        }
        let adj_head = deg.clone();
        let mut fill = deg;
        let mut adj = vec![(0u32, 0u32); edges.len() * 2];
        for (ei, e) in edges.iter().enumerate() {
            adj[fill[e.a as usize] as usize] = (ei as u32, e.b);
            fill[e.a as usize] += 1;
            adj[fill[e.b as usize] as usize] = (ei as u32, e.a);
            fill[e.b as usize] += 1;
        }

        Ok(LatticeBox {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            lens,
            strides,
            n_sites,
            edges,
            adj_head,
            adj,
        })
    }

    /// Smallest box containing all `sites` padded by `margin` on every side.
    pub fn hull_with_margin(sites: &[&[i64]], margin: i64) -> Result<Self> {
        let d = sites
            .first()
            .ok_or_else(|| Error::InvalidParameter("hull of no sites".into()))?
            .len();
        let mut lo = sites[0].to_vec();
        let mut hi = sites[0].to_vec();
        for s in sites {
            if s.len() != d {
                return Err(Error::InvalidParameter("mixed dimensions".into()));
            }
            for a in 0..d {
                lo[a] = lo[a].min(s[a]);
                hi[a] = hi[a].max(s[a]);
            }
        }
        for a in 0..d {
            lo[a] -= margin;
            hi[a] += margin;
        }
        Self::new(&lo, &hi)
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lo
    }

    pub fn upper(&self) -> &[i64] {
        &self.hi
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges incident to `site`, as (edge index, other endpoint).
    pub fn incident(&self, site: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_head[site] as usize..self.adj_head[site + 1] as usize]
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.lo.len()
            && site
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn index_of(&self, site: &[i64]) -> Result<usize> {
        if !self.contains(site) {
            return Err(Error::SiteOutsideBox {
                site: site.to_vec(),
            });
        }
        let mut idx = 0usize;
        for a in 0..self.lo.len() {
            idx += (site[a] - self.lo[a]) as usize * self.strides[a];
        }
        Ok(idx)
    }

    pub fn coords_of(&self, idx: usize, out: &mut [i64]) {
        let mut rem = idx;
        for a in 0..self.lo.len() {
            out[a] = self.lo[a] + (rem / self.strides[a]) as i64;
            rem %= self.strides[a];
        }
    }

    pub fn site_vec(&self, idx: usize) -> Site {
        let mut out = vec![0i64; self.lo.len()];
        self.coords_of(idx, &mut out);
        out
    }

    /// Coordinate of site `idx` along `axis` without materializing the site.
    pub fn coord(&self, idx: usize, axis: usize) -> i64 {
        self.lo[axis] + ((idx / self.strides[axis]) % self.lens[axis]) as i64
    }

    /// Neighbor of `idx` one step along `axis` (`dir` = +1 or -1), if inside.
    pub fn step(&self, idx: usize, axis: usize, dir: i64) -> Option<usize> {
        let c = (idx / self.strides[axis]) % self.lens[axis];
        if dir > 0 {
            (c + 1 < self.lens[axis]).then(|| idx + self.strides[axis])
        } else {
            (c > 0).then(|| idx - self.strides[axis])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_count_matches_axis_sum() {
        let b = LatticeBox::new(&[0, 0], &[3, 2]).unwrap();
        // 4x3 sites: horizontal 3*3, vertical 4*2
        assert_eq!(b.n_sites(), 12);
        assert_eq!(b.n_edges(), 9 + 8);
    }

    #[test]
    fn canonical_order_is_lex_by_lower_endpoint_then_axis() {
        let b = LatticeBox::new(&[0, 0], &[1, 1]).unwrap();
        let named: Vec<(Site, Site)> = b
            .edges()
            .iter()
            .map(|e| (b.site_vec(e.a as usize), b.site_vec(e.b as usize)))
            .collect();
        assert_eq!(
            named,
            vec![
                (vec![0, 0], vec![1, 0]),
                (vec![0, 0], vec![0, 1]),
                (vec![0, 1], vec![1, 1]),
                (vec![1, 0], vec![1, 1]),
            ]
        );
    }

    #[test]
    fn index_roundtrip_and_step() {
        let b = LatticeBox::new(&[-2, 1, 0], &[1, 3, 2]).unwrap();
        for idx in 0..b.n_sites() {
            let s = b.site_vec(idx);
            assert_eq!(b.index_of(&s).unwrap(), idx);
            for a in 0..3 {
                assert_eq!(b.coord(idx, a), s[a]);
                if let Some(j) = b.step(idx, a, 1) {
                    let mut t = s.clone();
                    t[a] += 1;
                    assert_eq!(b.index_of(&t).unwrap(), j);
                }
            }
        }
    }

    #[test]
    fn degenerate_box_has_no_edges_along_flat_axis() {
        let b = LatticeBox::new(&[0, 0], &[4, 0]).unwrap();
        assert_eq!(b.n_edges(), 4);
        assert!(b.edges().iter().all(|e| e.axis == 0));
    }
}
