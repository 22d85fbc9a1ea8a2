//! Persistence diagrams and the diagonal-augmentation step.
//!
//! A persistence diagram is a finite multiset of points `(birth, death)`
//! with `birth <= death`. The diagonal `{(t, t)}` is never stored: it is
//! an implicit part of every diagram and only materialises as flagged
//! padding points when two diagrams are augmented to a common size so
//! that a bijection between them exists.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num;

/// A single birth/death pair.
///
/// Zero-persistence points (`birth == death`) are permitted — degenerate
/// fields produce them — but they carry no off-diagonal content and are
/// removed by any pruning pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    /// Builds a point, rejecting non-finite coordinates and points below
    /// the diagonal.
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::NonFinite(String::from("diagram point")));
        }
        if birth > death {
            return Err(Error::BelowDiagonal { birth, death });
        }
        Ok(DiagramPoint { birth, death })
    }

    /// Lifetime of the feature: `death - birth`.
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Euclidean distance to another point.
    pub fn distance(&self, other: &DiagramPoint) -> f64 {
        num::norm2(self.birth - other.birth, self.death - other.death)
    }
}

/// Marks whether an augmented point is original content or diagonal padding.
///
/// Flags are assigned by construction during augmentation and are never
/// inferred from `birth == death`, so an explicit zero-persistence input
/// point stays `OffDiagonal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFlag {
    OffDiagonal,
    Diagonal,
}

/// A finite multiset of diagram points with an optional label
/// (typically the source file or dataset name).
///
/// Point order is preserved from construction; no sorting is applied.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    points: Vec<DiagramPoint>,
    pub label: Option<String>,
}

impl PersistenceDiagram {
    /// Builds a diagram from points, validating each one.
    pub fn new(points: Vec<DiagramPoint>) -> Result<Self> {
        for p in &points {
            // Re-run the point validation so diagrams built from raw
            // struct literals are still checked.
            DiagramPoint::new(p.birth, p.death)?;
        }
        Ok(PersistenceDiagram {
            points,
            label: None,
        })
    }

    /// Builds a diagram from `(birth, death)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(b, d)| DiagramPoint::new(b, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(PersistenceDiagram {
            points,
            label: None,
        })
    }

    /// The empty diagram.
    pub fn empty() -> Self {
        PersistenceDiagram {
            points: Vec::new(),
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Orthogonal projection of a point onto the diagonal:
/// `(b, d) -> ((b + d) / 2, (b + d) / 2)`.
pub fn project_to_diagonal(p: &DiagramPoint) -> DiagramPoint {
    let mid = 0.5 * (p.birth + p.death);
    DiagramPoint {
        birth: mid,
        death: mid,
    }
}

/// One flagged point of an augmented diagram.
pub type FlaggedPoint = (DiagramPoint, PointFlag);

/// Two diagrams padded to a common size with flagged diagonal copies.
///
/// `left = X ∪ Δ_Y` and `right = Y ∪ Δ_X`, where `Δ_Z` is the multiset of
/// diagonal projections of `Z`'s points. Original points come first and
/// keep their order; the diagonal copies follow in the other diagram's
/// point order. Both sides have exactly `|X| + |Y|` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub left: Vec<FlaggedPoint>,
    pub right: Vec<FlaggedPoint>,
}

impl AugmentedPair {
    /// Common size of both sides.
    pub fn size(&self) -> usize {
        self.left.len()
    }
}

/// Augments two diagrams to a common size by adjoining, to each side, the
/// diagonal projections of the other side's points.
pub fn augment(x: &PersistenceDiagram, y: &PersistenceDiagram) -> AugmentedPair {
    let size = x.len() + y.len();
    let mut left = Vec::with_capacity(size);
    let mut right = Vec::with_capacity(size);
    for p in x.points() {
        left.push((*p, PointFlag::OffDiagonal));
    }
    for p in y.points() {
        left.push((project_to_diagonal(p), PointFlag::Diagonal));
    }
    for p in y.points() {
        right.push((*p, PointFlag::OffDiagonal));
    }
    for p in x.points() {
        right.push((project_to_diagonal(p), PointFlag::Diagonal));
    }
    AugmentedPair { left, right }
}

/// Removes every point with persistence at most `epsilon`
/// (keeps `death - birth > epsilon`), preserving point order.
pub fn prune(x: &PersistenceDiagram, epsilon: f64) -> Result<PersistenceDiagram> {
    if !epsilon.is_finite() {
        return Err(Error::NonFinite(String::from("prune threshold")));
    }
    if epsilon < 0.0 {
        return Err(Error::NegativeThreshold(epsilon));
    }
    let points = x
        .points()
        .iter()
        .copied()
        .filter(|p| p.persistence() > epsilon)
        .collect();
    Ok(PersistenceDiagram {
        points,
        label: x.label.clone(),
    })
}
