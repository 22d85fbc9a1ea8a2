//! Persistence of superlevel-set components of a sampled scalar field.
//!
//! Vertices are swept in decreasing value order while a union-find
//! structure tracks connected components of the superlevel set. A
//! component is born at a local maximum; when two components meet at a
//! vertex, the one with the smaller maximum dies there (elder rule) and
//! emits the pair `(merge value, that maximum)`. The global maximum never
//! dies at a merge and is paired with the global minimum at the end, so a
//! grid always yields exactly one pair per local maximum.
//!
//! Ties are resolved by a simulated strict total order: vertices compare
//! by `(value, linear index)` with the lower index acting as the larger
//! vertex, so no two vertices ever compare equal.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

/// Which vertices count as adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// All grid neighbours whose every coordinate differs by at most one:
    /// 8 neighbours in 2D, 26 in 3D. The default.
    #[default]
    Full,
    /// Axis-aligned neighbours only: 4 in 2D, 6 in 3D.
    Axis,
}

/// A scalar field sampled on a regular 1-, 2- or 3-dimensional grid,
/// stored row-major (last dimension fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl ScalarGrid {
    /// Builds a grid, validating dimensionality (1 to 3, all extents
    /// positive), the value count and that every sample is finite.
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidArgument(String::from(
                "grid must have 1, 2 or 3 dimensions",
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(String::from(
                "grid dimensions must be positive",
            )));
        }
        let expected: usize = dims.iter().product();
        if values.len() != expected {
            return Err(Error::SizeMismatch(String::from(
                "grid value count must equal the product of its dimensions",
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(String::from("grid values")));
        }
        Ok(ScalarGrid { dims, values })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mutable sample access by linear index (used by the synthetic
    /// ensemble generator to plant outlier spikes).
    pub fn set(&mut self, index: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(String::from("grid value")));
        }
        self.values[index] = value;
        Ok(())
    }
}

/// `true` when vertex `a` outranks vertex `b` in the simulated strict
/// order: larger value wins, equal values fall back to the smaller index.
fn outranks(values: &[f64], a: usize, b: usize) -> bool {
    values[a] > values[b] || (values[a] == values[b] && a < b)
}

/// Enumerates the in-bounds neighbours of `index` into `out`.
fn neighbors(dims: &[usize], connectivity: Connectivity, index: usize, out: &mut Vec<usize>) {
    out.clear();
    let nd = dims.len();
    let mut coords = [0_usize; 3];
    let mut rest = index;
    for axis in (0..nd).rev() {
        coords[axis] = rest % dims[axis];
        rest /= dims[axis];
    }
    // Offsets in {-1, 0, 1}^nd, skipping the origin; for axis
    // connectivity only one coordinate may vary.
    let mut offset = [-1_i64; 3];
    loop {
        let nonzero = (0..nd).filter(|&a| offset[a] != 0).count();
        let admissible = match connectivity {
            Connectivity::Full => nonzero > 0,
            Connectivity::Axis => nonzero == 1,
        };
        if admissible {
            let mut ok = true;
            let mut linear = 0_usize;
            for axis in 0..nd {
                let c = coords[axis] as i64 + offset[axis];
                if c < 0 || c >= dims[axis] as i64 {
                    ok = false;
                    break;
                }
                linear = linear * dims[axis] + c as usize;
            }
            if ok {
                out.push(linear);
            }
        }
        // Advance the offset counter.
        let mut axis = nd;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if offset[axis] < 1 {
                offset[axis] += 1;
                break;
            }
            offset[axis] = -1;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    /// Vertex holding the component's maximum, tracked per root.
    max_vertex: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            max_vertex: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }
}

/// Extracts the maxima persistence pairs of a scalar grid.
///
/// Each emitted point is `(birth, death) = (merge value, component
/// maximum)`; the global pair `(global minimum, global maximum)` comes
/// last. The diagram has exactly one point per local maximum of the field
/// (under the tie-broken order), and a constant field yields the single
/// zero-persistence pair `(c, c)`.
pub fn extract_max_pairs(
    grid: &ScalarGrid,
    connectivity: Connectivity,
) -> Result<PersistenceDiagram> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(String::from(
            "cannot extract pairs from an empty grid",
        )));
    }
    let values = grid.values();
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut uf = UnionFind::new(n);
    let mut processed = vec![false; n];
    let mut pairs: Vec<DiagramPoint> = Vec::new();
    let mut nbrs: Vec<usize> = Vec::new();

    for &v in &order {
        processed[v] = true;
        neighbors(grid.dims(), connectivity, v, &mut nbrs);
        let mut home: Option<usize> = None;
        for i in 0..nbrs.len() {
            let u = nbrs[i];
            if !processed[u] {
                continue;
            }
            let root = uf.find(u);
            match home {
                None => {
                    // First processed neighbour: v joins that component.
                    uf.parent[v] = root;
                    home = Some(root);
                }
                Some(current) if current != root => {
                    // v bridges two components: the one whose maximum is
                    // outranked dies here.
                    let (survivor, dying) =
                        if outranks(values, uf.max_vertex[current], uf.max_vertex[root]) {
                            (current, root)
                        } else {
                            (root, current)
                        };
                    pairs.push(DiagramPoint {
                        birth: values[v],
                        death: values[uf.max_vertex[dying]],
                    });
                    uf.parent[dying] = survivor;
                    home = Some(survivor);
                }
                Some(_) => {}
            }
        }
        // No processed neighbour: v is a local maximum and founds a
        // component (its own parent and maximum already point to itself).
    }

    // The surviving component's maximum is the global maximum; pair it
    // with the global minimum.
    let global_max = order[0];
    let global_min = order[n - 1];
    pairs.push(DiagramPoint {
        birth: values[global_min],
        death: values[global_max],
    });
    PersistenceDiagram::new(pairs)
}

/// Keeps the `k` most persistent points of a diagram.
///
/// Ties in persistence are broken toward smaller birth (then input
/// order); kept points preserve their relative order. Returns
/// `min(k, |x|)` points.
pub fn threshold_top_k(x: &PersistenceDiagram, k: usize) -> PersistenceDiagram {
    let points = x.points();
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[b]
            .persistence()
            .total_cmp(&points[a].persistence())
            .then(points[a].birth.total_cmp(&points[b].birth))
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx.sort_unstable();
    let kept = idx.into_iter().map(|i| points[i]).collect();
    let mut out = PersistenceDiagram::new(kept).expect("points of a valid diagram stay valid");
    out.label = x.label.clone();
    out
}
