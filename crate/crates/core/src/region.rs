use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six in-vehicle gaze regions. Declaration order is the class order used
/// for probability vectors and confusion-matrix axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GazeRegion {
    Road,
    CenterStack,
    InstrumentCluster,
    RearviewMirror,
    Left,
    Right,
}

pub const NUM_REGIONS: usize = 6;

impl GazeRegion {
    pub const ALL: [GazeRegion; NUM_REGIONS] = [
        GazeRegion::Road,
        GazeRegion::CenterStack,
        GazeRegion::InstrumentCluster,
        GazeRegion::RearviewMirror,
        GazeRegion::Left,
        GazeRegion::Right,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Option<GazeRegion> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GazeRegion::Road => "Road",
            GazeRegion::CenterStack => "CenterStack",
            GazeRegion::InstrumentCluster => "InstrumentCluster",
            GazeRegion::RearviewMirror => "RearviewMirror",
            GazeRegion::Left => "Left",
            GazeRegion::Right => "Right",
        }
    }
}

impl fmt::Display for GazeRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRegion(pub String);

impl fmt::Display for UnknownRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown gaze region `{}`", self.0)
    }
}

impl std::error::Error for UnknownRegion {}

impl FromStr for GazeRegion {
    type Err = UnknownRegion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRegion(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_indices() {
        assert_eq!(GazeRegion::Road.index(), 0);
        assert_eq!(GazeRegion::CenterStack.index(), 1);
        assert_eq!(GazeRegion::Right.index(), 5);
        assert_eq!(GazeRegion::from_index(6), None);
    }

    #[test]
    fn index_round_trip() {
        for (i, r) in GazeRegion::ALL.iter().enumerate() {
            assert_eq!(r.index(), i);
            assert_eq!(GazeRegion::from_index(i), Some(*r));
            assert_eq!(r.name().parse::<GazeRegion>(), Ok(*r));
        }
        assert!("Rearview".parse::<GazeRegion>().is_err());
    }
}
