use std::collections::HashMap;

use crate::geometry::{Aabb, Vec3};

pub type VoxelKey = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelState {
    pub observed: bool,
    /// Time of the latest observation, seconds.
    pub timestamp: f64,
}

/// Sparse record of which world voxels the camera has already looked at.
/// Only touched voxels are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelObservationMap {
    voxel_size: f64,
    cells: HashMap<VoxelKey, VoxelState>,
}

impl VoxelObservationMap {
    pub fn new(voxel_size: f64) -> Self {
        assert!(voxel_size > 0.0, "voxel size must be positive");
        Self {
            voxel_size,
            cells: HashMap::new(),
        }
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn clear(&mut self) {
        self.cells.clear();
    }

    pub fn key_of(&self, p: &Vec3) -> VoxelKey {
        [
            (p.x / self.voxel_size).floor() as i64,
            (p.y / self.voxel_size).floor() as i64,
            (p.z / self.voxel_size).floor() as i64,
        ]
    }

    pub fn center_of(&self, k: VoxelKey) -> Vec3 {
        Vec3::new(
            (k[0] as f64 + 0.5) * self.voxel_size,
            (k[1] as f64 + 0.5) * self.voxel_size,
            (k[2] as f64 + 0.5) * self.voxel_size,
        )
    }

    pub fn get(&self, k: VoxelKey) -> Option<&VoxelState> {
        self.cells.get(&k)
    }

    pub fn is_observed(&self, k: VoxelKey) -> bool {
        self.cells.get(&k).is_some_and(|s| s.observed)
    }

    pub fn mark(&mut self, k: VoxelKey, time: f64) {
        self.cells.insert(
            k,
            VoxelState {
                observed: true,
                timestamp: time,
            },
        );
    }

    /// Keys of all voxels intersecting `aabb`.
    pub fn keys_in(&self, aabb: &Aabb) -> impl Iterator<Item = VoxelKey> {
        let lo = self.key_of(&aabb.min);
        let hi = self.key_of(&aabb.max);
        (lo[0]..=hi[0]).flat_map(move |x| (lo[1]..=hi[1]).flat_map(move |y| (lo[2]..=hi[2]).map(move |z| [x, y, z])))
    }
}
