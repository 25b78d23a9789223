//! Signed-permutation symmetries of the cubic grid.
//!
//! The grid, the Maxwellian, and the hard-sphere kernel are all invariant
//! under the 48 signed permutations of the coordinate axes. Collision-matrix
//! rows therefore only need to be assembled on one representative per node
//! orbit and can be replicated to the rest of the grid by exact index
//! permutations, which is also what makes parity commutation exact.

use crate::grid::VelocityGrid;
use crate::real::Real;

/// One signed permutation `(sigma v)_d = sign[d] * v[perm[d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPerm {
    pub perm: [usize; 3],
    pub neg: [bool; 3],
}

impl SignedPerm {
    /// Identity element.
    pub const IDENTITY: SignedPerm = SignedPerm {
        perm: [0, 1, 2],
        neg: [false, false, false],
    };

    /// Apply to a velocity vector.
    #[inline]
    pub fn apply_vec<T: Real>(&self, v: [T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for d in 0..3 {
            let x = v[self.perm[d]];
            out[d] = if self.neg[d] { -x } else { x };
        }
        out
    }

    /// Apply to a node's axis-index triple, exactly.
    #[inline]
    pub fn apply_axes(&self, n: usize, idx: (usize, usize, usize)) -> (usize, usize, usize) {
        let arr = [idx.0, idx.1, idx.2];
        let mut out = [0usize; 3];
        for d in 0..3 {
            let k = arr[self.perm[d]];
            out[d] = if self.neg[d] { n - 1 - k } else { k };
        }
        (out[0], out[1], out[2])
    }

    /// Group inverse.
    pub fn inverse(&self) -> SignedPerm {
        let mut perm = [0usize; 3];
        let mut neg = [false; 3];
        for d in 0..3 {
            perm[self.perm[d]] = d;
            neg[self.perm[d]] = self.neg[d];
        }
        SignedPerm { perm, neg }
    }

    /// Composition `self` after `first`.
    pub fn compose(&self, first: &SignedPerm) -> SignedPerm {
        let mut perm = [0usize; 3];
        let mut neg = [false; 3];
        for d in 0..3 {
            perm[d] = first.perm[self.perm[d]];
            neg[d] = self.neg[d] ^ first.neg[self.perm[d]];
        }
        SignedPerm { perm, neg }
    }

    /// Image of the coordinate function `v -> v[d]` under composition with
    /// this element: `(sigma v)[d] = sign * v[axis]`.
    #[inline]
    pub fn coordinate_image(&self, d: usize) -> (usize, f64) {
        (self.perm[d], if self.neg[d] { -1.0 } else { 1.0 })
    }
}

/// The full 48-element group, with per-element node-index maps for a grid.
#[derive(Debug)]
pub struct CubeGroup {
    pub elements: Vec<SignedPerm>,
    /// `index_maps[e][i]` is the flat node index of element `e` applied to
    /// node `i`.
    pub index_maps: Vec<Vec<u32>>,
}

/// Orbit decomposition of the grid nodes under the cube group.
#[derive(Debug)]
pub struct OrbitTable {
    /// Flat indices of the orbit representatives.
    pub reps: Vec<usize>,
    /// For each node, the position of its representative in `reps`.
    pub rep_slot: Vec<u32>,
    /// For each node `i`, the element id `e` with `elements[e](i) = rep(i)`.
    pub canon_elem: Vec<u8>,
}

fn all_perms() -> [[usize; 3]; 6] {
    [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
}

impl CubeGroup {
    /// Enumerate the 48 elements and their exact node-index maps.
    pub fn for_grid<T: Real>(grid: &VelocityGrid<T>) -> CubeGroup {
        let mut elements = Vec::with_capacity(48);
        for perm in all_perms() {
            for bits in 0..8u8 {
                elements.push(SignedPerm {
                    perm,
                    neg: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0],
                });
            }
        }
        let n = grid.n;
        let len = grid.len();
        let mut index_maps = Vec::with_capacity(elements.len());
        for el in &elements {
            let mut map = vec![0u32; len];
            for (i, m) in map.iter_mut().enumerate() {
                let idx = grid.unindex(i);
                let (a, b, c) = el.apply_axes(n, idx);
                *m = grid.index(a, b, c) as u32;
            }
            index_maps.push(map);
        }
        CubeGroup {
            elements,
            index_maps,
        }
    }

    /// Orbit decomposition with deterministic canonical representatives.
    ///
    /// A node's representative has all coordinates positive and sorted in
    /// increasing magnitude; the canonicalizing element is found by scanning
    /// the element list in a fixed order.
    pub fn orbits<T: Real>(&self, grid: &VelocityGrid<T>) -> OrbitTable {
        let n = grid.n;
        let len = grid.len();
        // Signed half-step coordinate of an axis index: odd integers
        // symmetric around zero, so magnitude sorting is exact.
        let half_step = |k: usize| 2 * k as i64 - (n as i64 - 1);
        let canonical_index = |i: usize| -> usize {
            let (ix, iy, iz) = grid.unindex(i);
            let mut t = [half_step(ix).abs(), half_step(iy).abs(), half_step(iz).abs()];
            t.sort_unstable();
            let back = |m: i64| ((m + n as i64 - 1) / 2) as usize;
            grid.index(back(t[0]), back(t[1]), back(t[2]))
        };

        let mut reps = Vec::new();
        let mut slot_of_rep = vec![u32::MAX; len];
        let mut rep_slot = vec![0u32; len];
        let mut canon_elem = vec![0u8; len];
        for i in 0..len {
            let rep = canonical_index(i);
            if slot_of_rep[rep] == u32::MAX {
                slot_of_rep[rep] = reps.len() as u32;
                reps.push(rep);
            }
            rep_slot[i] = slot_of_rep[rep];
            let mut found = false;
            for (e, map) in self.index_maps.iter().enumerate() {
                if map[i] as usize == rep {
                    canon_elem[i] = e as u8;
                    found = true;
                    break;
                }
            }
            assert!(found, "every node must reach its representative");
        }
        OrbitTable {
            reps,
            rep_slot,
            canon_elem,
        }
    }
}
