//! Voronoi cells of a net in the tube quotient, their lattices, and their
//! intersection with the drilled region `X`.

pub mod cell;
pub mod clip;
pub mod polytope;
pub mod registry;
pub mod verify;

use serde::{Deserialize, Serialize};

/// The orbit element `g^n x_j` of a net point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub j: u32,
    pub n: i32,
}

impl Generator {
    pub fn new(j: usize, n: i64) -> Self {
        Generator { j: j as u32, n: n as i32 }
    }

    pub fn shifted(self, s: i32) -> Self {
        Generator { j: self.j, n: self.n + s }
    }
}

/// Source of a polytope face: a bounding-box side or a bisector with a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaneId {
    Bound(u8),
    Gen(Generator),
}

pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
