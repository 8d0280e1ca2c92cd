//! Honeycomb lattice geometry: primitive and dual basis, the K corner of the
//! Brillouin zone, the 2π/3 rotation acting on Fourier indices, and the
//! rotation-closed truncated index sets all fields live on.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Primitive vectors, dual basis, Dirac point and rotation matrix of the
/// honeycomb lattice, in dimensionless lattice units.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    pub r1: Vec2,
    pub r2: Vec2,
    pub k1: Vec2,
    pub k2: Vec2,
    /// Brillouin-zone corner K = (0, 4π/3).
    pub k_point: Vec2,
    /// Counterclockwise rotation by 2π/3, row-major.
    pub rotation: [[f64; 2]; 2],
    pub cell_area: f64,
}

impl LatticeBasis {
    pub fn honeycomb() -> Self {
        let s3 = 3.0_f64.sqrt();
        let r1 = [s3 / 2.0, 0.5];
        let r2 = [s3 / 2.0, -0.5];
        let (k1, k2) = dual_basis(r1, r2);
        LatticeBasis {
            r1,
            r2,
            k1,
            k2,
            k_point: [0.0, 4.0 * PI / 3.0],
            rotation: [[-0.5, -s3 / 2.0], [s3 / 2.0, -0.5]],
            cell_area: cross(r1, r2).abs(),
        }
    }

    /// Dual-lattice vector m1·k1 + m2·k2.
    pub fn g_vector(&self, idx: FourierIndex) -> Vec2 {
        [
            idx.m1 as f64 * self.k1[0] + idx.m2 as f64 * self.k2[0],
            idx.m1 as f64 * self.k1[1] + idx.m2 as f64 * self.k2[1],
        ]
    }

    /// Plane-wave momentum K + m1·k1 + m2·k2 carried by the index.
    pub fn momentum(&self, idx: FourierIndex) -> Vec2 {
        let g = self.g_vector(idx);
        [self.k_point[0] + g[0], self.k_point[1] + g[1]]
    }

    pub fn momentum_sq(&self, idx: FourierIndex) -> f64 {
        let p = self.momentum(idx);
        dot(p, p)
    }

    /// Momentum at a Bloch parameter displaced from K by `offset`
    /// (dispersion sweeps near the Dirac point).
    pub fn momentum_sq_at(&self, offset: Vec2, idx: FourierIndex) -> f64 {
        let g = self.g_vector(idx);
        let p = [
            self.k_point[0] + offset[0] + g[0],
            self.k_point[1] + offset[1] + g[1],
        ];
        dot(p, p)
    }

    /// Apply the transpose of the rotation matrix to a vector.
    pub fn rotate_transpose(&self, v: Vec2) -> Vec2 {
        let r = &self.rotation;
        [r[0][0] * v[0] + r[1][0] * v[1], r[0][1] * v[0] + r[1][1] * v[1]]
    }
}

/// Dual basis of the canonical primitive vectors; rᵢ·kⱼ = 2π δᵢⱼ.
pub fn dual_basis(r1: Vec2, r2: Vec2) -> (Vec2, Vec2) {
    let det = cross(r1, r2);
    let f = 2.0 * PI / det;
    let k1 = [r2[1] * f, -r2[0] * f];
    let k2 = [-r1[1] * f, r1[0] * f];
    (k1, k2)
}

/// Integer label of the plane wave e^{i(K + m1·k1 + m2·k2)·x}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourierIndex {
    pub m1: i32,
    pub m2: i32,
}

impl FourierIndex {
    pub fn new(m1: i32, m2: i32) -> Self {
        FourierIndex { m1, m2 }
    }
}

/// Index image of the rotation on K-shifted momenta:
/// Rᵗ(K + m1·k1 + m2·k2) = K + (−m2)·k1 + (m1−m2+1)·k2.
pub fn rotate_index(idx: FourierIndex) -> FourierIndex {
    FourierIndex::new(-idx.m2, idx.m1 - idx.m2 + 1)
}

/// Zero-offset analogue for plain dual-lattice frequencies (potentials):
/// Rᵗ(m1·k1 + m2·k2) = (−m2)·k1 + (m1−m2)·k2.
pub fn rotate_dual_index(idx: FourierIndex) -> FourierIndex {
    FourierIndex::new(-idx.m2, idx.m1 - idx.m2)
}

/// Truncated, rotation-closed set of Fourier indices with a deterministic
/// lexicographic ordering. Closure under `rotate_index` makes the discrete
/// rotation operator an exact permutation of the basis.
#[derive(Debug)]
pub struct IndexSet {
    indices: Vec<FourierIndex>,
    positions: HashMap<FourierIndex, usize>,
    rotation_perm: Vec<usize>,
    cutoff: u32,
}

impl IndexSet {
    /// All indices with max(|m1|,|m2|) ≤ cutoff, completed to full rotation orbits.
    pub fn build(cutoff: u32) -> Result<Arc<IndexSet>> {
        if cutoff == 0 {
            return Err(Error::CutoffTooSmall);
        }
        let n = cutoff as i32;
        let mut set = BTreeSet::new();
        for m1 in -n..=n {
            for m2 in -n..=n {
                set.insert(FourierIndex::new(m1, m2));
            }
        }
        // Orbit completion. rotate_index has no fixed points, so every orbit
        // has exactly three members.
        let mut work: Vec<FourierIndex> = set.iter().copied().collect();
        while let Some(idx) = work.pop() {
            let r = rotate_index(idx);
            if set.insert(r) {
                work.push(r);
            }
        }
        let indices: Vec<FourierIndex> = set.into_iter().collect();
        let positions: HashMap<FourierIndex, usize> =
            indices.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let rotation_perm = indices
            .iter()
            .map(|&m| positions[&rotate_index(m)])
            .collect();
        Ok(Arc::new(IndexSet {
            indices,
            positions,
            rotation_perm,
            cutoff,
        }))
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn indices(&self) -> &[FourierIndex] {
        &self.indices
    }

    pub fn index(&self, i: usize) -> FourierIndex {
        self.indices[i]
    }

    pub fn position(&self, idx: FourierIndex) -> Option<usize> {
        self.positions.get(&idx).copied()
    }

    pub fn contains(&self, idx: FourierIndex) -> bool {
        self.positions.contains_key(&idx)
    }

    /// Position of rotate_index(indices[i]).
    pub fn rotation_perm(&self) -> &[usize] {
        &self.rotation_perm
    }

    /// Largest |m1| or |m2| over the set; bounds the frequency range a grid
    /// must resolve without wraparound collisions.
    pub fn max_component(&self) -> i32 {
        self.indices
            .iter()
            .map(|m| m.m1.abs().max(m.m2.abs()))
            .max()
            .unwrap_or(0)
    }
}
