//! Connected components and holes of superlevel sets on node grids.

use serde::{Deserialize, Serialize};

use super::grid::ScalarField2D;

#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        a
    }
}

/// Component and hole counts of a superlevel set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub components: usize,
    pub holes: usize,
}

impl Topology {
    pub fn simply_connected(self) -> bool {
        self.components == 1 && self.holes == 0
    }
}

/// Components of `{φ > t} ∩ Ω` (4-connected) and holes: 8-connected
/// components of the complement, taken over the whole grid, that do not touch
/// the grid frame. Opposite connectivities keep the two counts consistent.
pub fn grid_topology(phi: &ScalarField2D, t: f64) -> Topology {
    let grid = phi.grid();
    let n = grid.resolution();
    let inside = grid.inside();
    let v = phi.values();
    let member: Vec<bool> = (0..n * n).map(|k| inside[k] && v[k] > t).collect();

    let mut fg = DisjointSet::new(n * n);
    let mut bg = DisjointSet::new(n * n);
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if member[k] {
                if i + 1 < n && member[k + 1] {
                    fg.union(k, k + 1);
                }
                if j + 1 < n && member[k + n] {
                    fg.union(k, k + n);
                }
            } else {
                let mut link = |other: usize| {
                    if !member[other] {
                        bg.union(k, other);
                    }
                };
                if i + 1 < n {
                    link(k + 1);
                }
                if j + 1 < n {
                    link(k + n);
                    if i + 1 < n {
                        link(k + n + 1);
                    }
                    if i > 0 {
                        link(k + n - 1);
                    }
                }
            }
        }
    }

    let mut fg_roots = std::collections::HashSet::new();
    let mut bg_roots = std::collections::HashSet::new();
    let mut frame_roots = std::collections::HashSet::new();
    for k in 0..n * n {
        if member[k] {
            fg_roots.insert(fg.find(k));
        } else {
            let r = bg.find(k);
            bg_roots.insert(r);
            let (i, j) = (k % n, k / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                frame_roots.insert(r);
            }
        }
    }
    Topology {
        components: fg_roots.len(),
        holes: bg_roots.difference(&frame_roots).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::grid::Grid2D;
    use std::sync::Arc;

    #[test]
    fn union_find_basics() {
        let mut d = DisjointSet::new(5);
        d.union(0, 1);
        d.union(3, 4);
        assert_eq!(d.find(0), d.find(1));
        assert_ne!(d.find(1), d.find(3));
        d.union(1, 4);
        assert_eq!(d.find(0), d.find(3));
        assert_ne!(d.find(2), d.find(0));
    }

    #[test]
    fn ball_annulus_and_two_humps() {
        let g = Arc::new(Grid2D::disc(1.0, 101).unwrap());
        let ball = ScalarField2D::radial(g.clone(), |r| -r).unwrap();
        assert_eq!(grid_topology(&ball, -0.5), Topology { components: 1, holes: 0 });

        let ring = ScalarField2D::radial(g.clone(), |r| -(r - 0.5).abs()).unwrap();
        assert_eq!(grid_topology(&ring, -0.2), Topology { components: 1, holes: 1 });

        let humps = ScalarField2D::from_fn(g, |x, y| {
            (-((x - 0.45).powi(2) + y * y) / 0.02).exp() + (-((x + 0.45).powi(2) + y * y) / 0.02).exp()
        })
        .unwrap();
        assert_eq!(grid_topology(&humps, 0.5), Topology { components: 2, holes: 0 });
        assert_eq!(grid_topology(&humps, 2.0), Topology { components: 0, holes: 0 });
    }

    #[test]
    fn annulus_domain_hole_counts() {
        let g = Arc::new(Grid2D::annulus(0.3, 1.0, 81).unwrap());
        let phi = ScalarField2D::radial(g, |r| -(r - 0.6).abs()).unwrap();
        // a ring around the excluded disc is not simply connected
        assert_eq!(grid_topology(&phi, -0.2), Topology { components: 1, holes: 1 });
    }
}
