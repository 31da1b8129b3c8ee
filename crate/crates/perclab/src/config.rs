//! Sampled (or explicitly constructed) bond configurations.

use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::rng;
use std::io::{Read, Write};

/// Seed provenance of a sampled configuration; absent for enumerated or
/// hand-built ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedInfo {
    pub master_seed: u64,
    pub trial: u64,
}

/// One open/closed assignment on the edges of a finite box.
///
/// The indicator order is the box's canonical edge order, so a dumped
/// configuration is bit-exact reproducible from `(box, p, seed, trial)`.
#[derive(Debug, Clone)]
pub struct BondConfiguration {
    pub lattice: LatticeBox,
    pub open: Vec<bool>,
    pub p: f64,
    pub seed: Option<SeedInfo>,
}

impl BondConfiguration {
    /// Draw every edge independently with probability `p`, keyed by
    /// `(master_seed, trial, edge index)`.
    pub fn sample(p: f64, lattice: &LatticeBox, master_seed: u64, trial: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        let open = (0..lattice.n_edges())
            .map(|e| rng::edge_open(master_seed, trial, e as u64, p))
            .collect();
        Ok(BondConfiguration {
            lattice: lattice.clone(),
            open,
            p,
            seed: Some(SeedInfo { master_seed, trial }),
        })
    }

    /// All edges closed.
    pub fn empty(lattice: &LatticeBox, p: f64) -> Self {
        BondConfiguration {
            lattice: lattice.clone(),
            open: vec![false; lattice.n_edges()],
            p,
            seed: None,
        }
    }

    /// All edges open.
    pub fn full(lattice: &LatticeBox, p: f64) -> Self {
        BondConfiguration {
            lattice: lattice.clone(),
            open: vec![true; lattice.n_edges()],
            p,
            seed: None,
        }
    }

    /// Open the edge between two adjacent sites (coordinates).
    pub fn open_edge_between(&mut self, a: &[i64], b: &[i64]) -> Result<()> {
        let ia = self.lattice.index_of(a)? as u32;
        let ib = self.lattice.index_of(b)? as u32;
        let (lo, hi) = if ia < ib { (ia, ib) } else { (ib, ia) };
        for (ei, other) in self.lattice.incident(lo as usize) {
            if *other == hi {
                self.open[*ei as usize] = true;
                return Ok(());
            }
        }
        Err(Error::InvalidParameter(format!(
            "{a:?} and {b:?} are not nearest neighbors"
        )))
    }

    /// Open every edge along the straight axis path between two sites that
    /// differ in a single coordinate.
    pub fn open_segment(&mut self, from: &[i64], to: &[i64]) -> Result<()> {
        let diff: Vec<usize> = (0..from.len()).filter(|&a| from[a] != to[a]).collect();
        if diff.len() > 1 {
            return Err(Error::InvalidParameter(
                "segment endpoints must differ along one axis".into(),
            ));
        }
        if diff.is_empty() {
            return Ok(());
        }
        let axis = diff[0];
        let step = if to[axis] > from[axis] { 1 } else { -1 };
        let mut cur = from.to_vec();
        while cur[axis] != to[axis] {
            let mut nxt = cur.clone();
            nxt[axis] += step;
            self.open_edge_between(&cur, &nxt)?;
            cur = nxt;
        }
        Ok(())
    }

    pub fn n_open(&self) -> usize {
        self.open.iter().filter(|o| **o).count()
    }

    /// Binary dump. Layout (little endian):
    /// magic `PLC1`, u32 d, d x (i64 lo, i64 hi), f64 p, u8 has_seed,
    /// [u64 master_seed, u64 trial], u64 n_bits, then ceil(n_bits/8) bytes,
    /// least significant bit first within each byte, canonical edge order.
    pub fn dump<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"PLC1")?;
        let d = self.lattice.dimension() as u32;
        w.write_all(&d.to_le_bytes())?;
        for a in 0..d as usize {
            w.write_all(&self.lattice.lower()[a].to_le_bytes())?;
            w.write_all(&self.lattice.upper()[a].to_le_bytes())?;
        }
        w.write_all(&self.p.to_le_bytes())?;
        match self.seed {
            Some(s) => {
                w.write_all(&[1u8])?;
                w.write_all(&s.master_seed.to_le_bytes())?;
                w.write_all(&s.trial.to_le_bytes())?;
            }
            None => w.write_all(&[0u8])?,
        }
        let nbits = self.open.len() as u64;
        w.write_all(&nbits.to_le_bytes())?;
        let mut buf = vec![0u8; self.open.len().div_ceil(8)];
        for (i, &o) in self.open.iter().enumerate() {
            if o {
                buf[i / 8] |= 1 << (i % 8);
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        fn read_exact<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)?;
            Ok(b)
        }
        let magic = read_exact::<4, _>(r)?;
        if &magic != b"PLC1" {
            return Err(Error::MalformedDump("bad magic".into()));
        }
        let d = u32::from_le_bytes(read_exact::<4, _>(r)?) as usize;
        if d < 2 || d > 16 {
            return Err(Error::MalformedDump(format!("implausible dimension {d}")));
        }
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for a in 0..d {
            lo[a] = i64::from_le_bytes(read_exact::<8, _>(r)?);
            hi[a] = i64::from_le_bytes(read_exact::<8, _>(r)?);
        }
        let p = f64::from_le_bytes(read_exact::<8, _>(r)?);
        let has_seed = read_exact::<1, _>(r)?[0];
        let seed = match has_seed {
            0 => None,
            1 => Some(SeedInfo {
                master_seed: u64::from_le_bytes(read_exact::<8, _>(r)?),
                trial: u64::from_le_bytes(read_exact::<8, _>(r)?),
            }),
            _ => return Err(Error::MalformedDump("bad seed flag".into())),
        };
        let lattice =
            LatticeBox::new(&lo, &hi).map_err(|e| Error::MalformedDump(e.to_string()))?;
        let nbits = u64::from_le_bytes(read_exact::<8, _>(r)?) as usize;
        if nbits != lattice.n_edges() {
            return Err(Error::MalformedDump(format!(
                "bit count {nbits} does not match box edge count {}",
                lattice.n_edges()
            )));
        }
        let mut buf = vec![0u8; nbits.div_ceil(8)];
        r.read_exact(&mut buf)?;
        let open = (0..nbits).map(|i| buf[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(BondConfiguration {
            lattice,
            open,
            p,
            seed,
        })
    }
}
