//! Shortest paths on an explicit realisation of the edge weights.
//!
//! Single sources use the dense `O(n²)` Dijkstra. All-pairs work presorts
//! every adjacency list once and then runs Spira's lazy variant from each
//! source: a settled vertex only offers its cheapest edge to a site that is
//! still unsettled, so most of the `n²` edges are never touched.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::edges::EdgeWeightSample;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{Site, TorusConfig};

/// Largest torus for a single-source oracle run.
pub const ORACLE_CAP: usize = 4096;
/// Largest torus for all-pairs work.
pub const ALL_PAIRS_CAP: usize = 1024;

fn check_cap(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n > cap {
        return Err(Error::TooLarge { what, n, cap });
    }
    Ok(())
}

/// First-passage distances from `source` to every site, by site index.
pub fn dijkstra_oracle<F: Real>(source: &Site, cfg: &TorusConfig<F>, seed: u64) -> Result<Vec<F>> {
    check_cap(cfg.volume(), ORACLE_CAP, "oracle torus volume")?;
    let src = cfg.index_of(source.coords())?;
    Ok(dense_dijkstra(&EdgeWeightSample::new(cfg, seed), src))
}

fn dense_dijkstra<F: Real>(w: &EdgeWeightSample<F>, src: usize) -> Vec<F> {
    let n = w.config().volume();
    let mut dist = vec![F::infinity(); n];
    let mut done = vec![false; n];
    dist[src] = F::zero();
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = F::infinity();
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < best {
                best = d;
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if !done[v] {
                let nd = best + w.weight(u, v);
                if nd < dist[v] {
                    dist[v] = nd;
                }
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy)]
struct Offer<F> {
    cost: F,
    from: u32,
}

impl<F: Real> PartialEq for Offer<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<F: Real> Eq for Offer<F> {}
impl<F: Real> PartialOrd for Offer<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Real> Ord for Offer<F> {
    // Min-heap on cost.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.from.cmp(&self.from))
    }
}

/// One sampled weight realisation with sorted adjacency, for all-pairs
/// distances.
#[derive(Debug, Clone)]
pub struct OracleRealization<F> {
    weights: EdgeWeightSample<F>,
    // Row u holds the n - 1 edges at u by increasing weight.
    adj: Vec<(F, u32)>,
}

impl<F: Real> OracleRealization<F> {
    pub fn new(cfg: &TorusConfig<F>, seed: u64) -> Result<Self> {
        let n = cfg.volume();
        check_cap(n, ALL_PAIRS_CAP, "all-pairs torus volume")?;
        let weights = EdgeWeightSample::new(cfg, seed);
        let mut adj = Vec::with_capacity(n * (n - 1));
        for u in 0..n {
            let start = adj.len();
            adj.extend((0..n).filter(|&v| v != u).map(|v| (weights.weight(u, v), v as u32)));
            adj[start..].sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        }
        Ok(Self { weights, adj })
    }

    pub fn weights(&self) -> &EdgeWeightSample<F> {
        &self.weights
    }

    fn row(&self, u: usize) -> &[(F, u32)] {
        let k = self.weights.config().volume() - 1;
        &self.adj[u * k..(u + 1) * k]
    }

    /// Distances from `src` to every site, by site index.
    pub fn distances_from(&self, src: usize) -> Vec<F> {
        let n = self.weights.config().volume();
        let mut dist = vec![F::infinity(); n];
        let mut settled = vec![false; n];
        let mut cursor = vec![0usize; n];
        let mut heap = BinaryHeap::with_capacity(n);
        dist[src] = F::zero();
        settled[src] = true;
        let mut remaining = n - 1;

        let offer = |u: usize, cursor: &mut [usize], settled: &[bool], heap: &mut BinaryHeap<Offer<F>>, du: F| {
            let row = self.row(u);
            let mut c = cursor[u];
            while c < row.len() && settled[row[c].1 as usize] {
                c += 1;
            }
            cursor[u] = c;
            if c < row.len() {
                heap.push(Offer {
                    cost: du + row[c].0,
                    from: u as u32,
                });
            }
        };
        offer(src, &mut cursor, &settled, &mut heap, F::zero());
        while remaining > 0 {
            let Some(Offer { cost, from }) = heap.pop() else {
                break;
            };
            let u = from as usize;
            let v = self.row(u)[cursor[u]].1 as usize;
            if !settled[v] {
                settled[v] = true;
                dist[v] = cost;
                remaining -= 1;
                offer(v, &mut cursor, &settled, &mut heap, cost);
            }
            cursor[u] += 1;
            offer(u, &mut cursor, &settled, &mut heap, dist[u]);
        }
        dist
    }

    pub fn eccentricity(&self, src: usize) -> F {
        self.distances_from(src)
            .into_iter()
            .fold(F::zero(), |a, b| if b > a { b } else { a })
    }

    /// `max_{u,v} d(u, v)`.
    pub fn diameter(&self) -> F {
        let n = self.weights.config().volume();
        (0..n)
            .map(|s| self.eccentricity(s))
            .fold(F::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Diameter of the first-passage metric on one realisation.
pub fn diameter_exact<F: Real>(cfg: &TorusConfig<F>, seed: u64) -> Result<F> {
    Ok(OracleRealization::new(cfg, seed)?.diameter())
}
