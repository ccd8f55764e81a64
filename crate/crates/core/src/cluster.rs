//! Reachability clusters on finite boxes.
//!
//! The forward cluster of a site holds everything reachable by following
//! arrows; the backward cluster holds everything that can reach the site.
//! Searches are truncated to a box, so computed clusters are subsets of
//! their infinite-lattice counterparts; `touched_boundary` records whether
//! the truncation was ever visible to the search.

use crate::env::EnvironmentField;
use crate::error::{DreError, Result};
use crate::lattice::{BitSet, LatticeBox};
use crate::model::Direction;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ClusterKind {
    Forward,
    Backward,
    Mutual,
}

impl ClusterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClusterKind::Forward => "forward",
            ClusterKind::Backward => "backward",
            ClusterKind::Mutual => "mutual",
        }
    }
}

/// Membership bitmap of one cluster over a search box.
#[derive(Clone, Debug)]
pub struct Cluster {
    kind: ClusterKind,
    origin: Vec<i64>,
    bbox: LatticeBox,
    members: BitSet,
    member_count: usize,
    touched_boundary: bool,
}

impl Cluster {
    pub fn kind(&self) -> ClusterKind {
        self.kind
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn search_box(&self) -> &LatticeBox {
        &self.bbox
    }

    pub fn member_count(&self) -> usize {
        self.member_count
    }

    /// True when the search saw an arrow crossing the box face, so the
    /// box-truncated cluster may be missing members.
    pub fn touched_boundary(&self) -> bool {
        self.touched_boundary
    }

    #[inline]
    pub fn contains_index(&self, idx: usize) -> bool {
        self.members.get(idx)
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        self.bbox.index_of(site).is_some_and(|i| self.members.get(i))
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    /// Member sites in index order.
    pub fn iter_members(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.members.iter_ones().map(|idx| {
            let mut site = vec![0i64; self.bbox.dim()];
            self.bbox.site_of(idx, &mut site);
            site
        })
    }

}

fn check_inputs(field: &EnvironmentField, origin: &[i64], bbox: &LatticeBox) -> Result<()> {
    bbox.check_volume()?;
    if bbox.dim() != field.spec().dim() {
        return Err(DreError::InvalidInput(format!(
            "box dimension {} does not match model dimension {}",
            bbox.dim(),
            field.spec().dim()
        )));
    }
    if !bbox.contains(origin) {
        return Err(DreError::InvalidInput(format!(
            "origin {origin:?} outside box {:?}..{:?}",
            bbox.lo(),
            bbox.hi()
        )));
    }
    Ok(())
}

/// Sites reachable from the origin by following arrows, within the box.
pub fn forward_cluster(
    field: &EnvironmentField,
    origin: &[i64],
    bbox: &LatticeBox,
) -> Result<Cluster> {
    check_inputs(field, origin, bbox)?;
    let dim = bbox.dim();
    let mut members = BitSet::new(bbox.len());
    let mut touched = false;
    let mut stack = vec![bbox.index_of(origin).unwrap()];
    members.set(stack[0]);
    let mut count = 1usize;
    let mut site = vec![0i64; dim];
    while let Some(idx) = stack.pop() {
        bbox.site_of(idx, &mut site);
        let arrows = field.env_at(&site);
        for dir in arrows.iter() {
            let axis = dir.axis();
            let coord = site[axis - 1] + dir.offset();
            let (lo, hi) = bbox.axis_range(axis);
            if coord < lo || coord > hi {
                touched = true;
                continue;
            }
            let nidx = if dir.is_negative() {
                idx - bbox.stride(axis)
            } else {
                idx + bbox.stride(axis)
            };
            if !members.get(nidx) {
                members.set(nidx);
                count += 1;
                stack.push(nidx);
            }
        }
    }
    Ok(Cluster {
        kind: ClusterKind::Forward,
        origin: origin.to_vec(),
        bbox: bbox.clone(),
        members,
        member_count: count,
        touched_boundary: touched,
    })
}

/// Sites that reach the origin by following arrows, within the box. A site
/// joins when one of its arrows lands on a member; candidates outside the
/// box count as boundary contact because they go unexamined.
pub fn backward_cluster(
    field: &EnvironmentField,
    origin: &[i64],
    bbox: &LatticeBox,
) -> Result<Cluster> {
    check_inputs(field, origin, bbox)?;
    let dim = bbox.dim();
    let mut members = BitSet::new(bbox.len());
    let mut touched = false;
    let mut stack = vec![bbox.index_of(origin).unwrap()];
    members.set(stack[0]);
    let mut count = 1usize;
    let mut site = vec![0i64; dim];
    let mut prev = vec![0i64; dim];
    while let Some(idx) = stack.pop() {
        bbox.site_of(idx, &mut site);
        // in-neighbors: y = x - e with e in the arrow set of y
        for axis in 1..=dim {
            for negative in [false, true] {
                let dir = Direction::new(axis, negative);
                let coord = site[axis - 1] - dir.offset();
                let (lo, hi) = bbox.axis_range(axis);
                if coord < lo || coord > hi {
                    touched = true;
                    continue;
                }
                let nidx = if dir.is_negative() {
                    idx + bbox.stride(axis)
                } else {
                    idx - bbox.stride(axis)
                };
                if members.get(nidx) {
                    continue;
                }
                prev.copy_from_slice(&site);
                prev[axis - 1] = coord;
                if field.env_at(&prev).contains(dir) {
                    members.set(nidx);
                    count += 1;
                    stack.push(nidx);
                }
            }
        }
    }
    Ok(Cluster {
        kind: ClusterKind::Backward,
        origin: origin.to_vec(),
        bbox: bbox.clone(),
        members,
        member_count: count,
        touched_boundary: touched,
    })
}

/// Intersection of the forward and backward clusters of the origin.
pub fn mutual_cluster(
    field: &EnvironmentField,
    origin: &[i64],
    bbox: &LatticeBox,
) -> Result<Cluster> {
    let fwd = forward_cluster(field, origin, bbox)?;
    let bwd = backward_cluster(field, origin, bbox)?;
    let mut members = fwd.members;
    members.intersect_with(&bwd.members);
    let member_count = members.count_ones();
    Ok(Cluster {
        kind: ClusterKind::Mutual,
        origin: origin.to_vec(),
        bbox: bbox.clone(),
        members,
        member_count,
        touched_boundary: fwd.touched_boundary || bwd.touched_boundary,
    })
}

/// Close the membership along axis-1 rays: sign +1 adds every site above
/// the lowest member of each line, sign -1 every site below the highest,
/// clipped to the box.
pub fn ray_closure(cluster: &Cluster, sign: i8) -> Result<Cluster> {
    if sign != 1 && sign != -1 {
        return Err(DreError::InvalidInput(format!("ray sign {sign}, want +1 or -1")));
    }
    let bbox = &cluster.bbox;
    let n1 = bbox.extent(1);
    let lines = bbox.len() / n1;
    let mut members = cluster.members.clone();
    for line in 0..lines {
        let base = line * n1;
        if sign == 1 {
            let mut seen = false;
            for k in 0..n1 {
                if seen {
                    members.set(base + k);
                } else if members.get(base + k) {
                    seen = true;
                }
            }
        } else {
            let mut seen = false;
            for k in (0..n1).rev() {
                if seen {
                    members.set(base + k);
                } else if members.get(base + k) {
                    seen = true;
                }
            }
        }
    }
    let member_count = members.count_ones();
    Ok(Cluster {
        kind: cluster.kind,
        origin: cluster.origin.clone(),
        bbox: bbox.clone(),
        members,
        member_count,
        touched_boundary: cluster.touched_boundary,
    })
}

/// One 4-connected component of a planar slice.
#[derive(Clone, Debug)]
pub struct SliceComponent {
    /// Cells as (axis-1 coordinate, slice-axis coordinate).
    pub cells: Vec<(i64, i64)>,
    /// Component touches the box face in either plane axis, so it may
    /// continue outside the box.
    pub touches_boundary: bool,
}

/// Cluster membership restricted to one (axis 1, axis i) plane.
#[derive(Clone, Debug)]
pub struct Slice {
    pub plane_axis: usize,
    /// The site fixing the remaining coordinates.
    pub through: Vec<i64>,
    pub components: Vec<SliceComponent>,
    pub cell_count: usize,
}

/// Cut the cluster along the plane spanned by axis 1 and `plane_axis`
/// through the given site, and split it into 4-connected components.
pub fn slice(cluster: &Cluster, plane_axis: usize, through: &[i64]) -> Result<Slice> {
    let bbox = &cluster.bbox;
    let dim = bbox.dim();
    if plane_axis < 2 || plane_axis > dim {
        return Err(DreError::InvalidInput(format!(
            "plane axis {plane_axis} must lie in 2..={dim}"
        )));
    }
    if !bbox.contains(through) {
        return Err(DreError::InvalidInput(format!("plane site {through:?} outside box")));
    }
    let (lo1, _) = bbox.axis_range(1);
    let (loi, _) = bbox.axis_range(plane_axis);
    let na = bbox.extent(1);
    let nb = bbox.extent(plane_axis);

    let mut grid = BitSet::new(na * nb);
    let mut site = through.to_vec();
    let mut cell_count = 0usize;
    for b in 0..nb {
        site[plane_axis - 1] = loi + b as i64;
        for a in 0..na {
            site[0] = lo1 + a as i64;
            if cluster.contains(&site) {
                grid.set(b * na + a);
                cell_count += 1;
            }
        }
    }

    // flood fill over the plane grid
    let mut seen = BitSet::new(na * nb);
    let mut components = Vec::new();
    for start in 0..na * nb {
        if !grid.get(start) || seen.get(start) {
            continue;
        }
        let mut cells = Vec::new();
        let mut touches = false;
        let mut stack = vec![start];
        seen.set(start);
        while let Some(cell) = stack.pop() {
            let (a, b) = (cell % na, cell / na);
            if a == 0 || a == na - 1 || b == 0 || b == nb - 1 {
                touches = true;
            }
            cells.push((lo1 + a as i64, loi + b as i64));
            let mut push = |n: usize| {
                if grid.get(n) && !seen.get(n) {
                    seen.set(n);
                    stack.push(n);
                }
            };
            if a > 0 {
                push(cell - 1);
            }
            if a + 1 < na {
                push(cell + 1);
            }
            if b > 0 {
                push(cell - na);
            }
            if b + 1 < nb {
                push(cell + na);
            }
        }
        cells.sort_unstable();
        components.push(SliceComponent { cells, touches_boundary: touches });
    }
    components.sort_by(|x, y| x.cells.first().cmp(&y.cells.first()));
    Ok(Slice { plane_axis, through: through.to_vec(), components, cell_count })
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SemiFiniteVerdict {
    /// Every planar component is strictly interior to the box.
    SemiFiniteWithinWindow,
    /// Some component touches the box, so the window cannot decide.
    Undetermined,
}

/// A planar component that touches the box face.
#[derive(Clone, Debug)]
pub struct BoundaryComponent {
    pub plane_axis: usize,
    pub through: Vec<i64>,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct SemiFiniteReport {
    pub verdict: SemiFiniteVerdict,
    pub total_components: usize,
    pub boundary_components: Vec<BoundaryComponent>,
}

/// Check every (axis 1, axis i) plane of the box: the cluster is
/// semi-finite within the window when no planar component reaches the box
/// face.
pub fn semi_finite_check(cluster: &Cluster) -> Result<SemiFiniteReport> {
    let bbox = &cluster.bbox;
    let dim = bbox.dim();
    let mut total = 0usize;
    let mut boundary = Vec::new();
    for plane_axis in 2..=dim {
        // enumerate the remaining coordinates
        let rest: Vec<usize> = (2..=dim).filter(|a| *a != plane_axis).collect();
        let mut through = bbox.lo().to_vec();
        loop {
            let s = slice(cluster, plane_axis, &through)?;
            total += s.components.len();
            for c in &s.components {
                if c.touches_boundary {
                    boundary.push(BoundaryComponent {
                        plane_axis,
                        through: through.clone(),
                        size: c.cells.len(),
                    });
                }
            }
            // odometer over the rest axes
            let mut done = true;
            for &axis in &rest {
                let (lo, hi) = bbox.axis_range(axis);
                if through[axis - 1] < hi {
                    through[axis - 1] += 1;
                    done = false;
                    break;
                }
                through[axis - 1] = lo;
            }
            if done {
                break;
            }
        }
    }
    let verdict = if boundary.is_empty() {
        SemiFiniteVerdict::SemiFiniteWithinWindow
    } else {
        SemiFiniteVerdict::Undetermined
    };
    Ok(SemiFiniteReport { verdict, total_components: total, boundary_components: boundary })
}

#[derive(Clone, Debug)]
pub struct ComplementReport {
    pub component_count: usize,
    /// Sizes of the 2d-connected complement components, in discovery order.
    pub component_sizes: Vec<usize>,
    /// Vacuously true when the complement is empty.
    pub all_touch_boundary: bool,
}

/// Split the in-box complement of the cluster into 2d-connected components
/// and record whether each one reaches the box face.
pub fn complement_connectivity(cluster: &Cluster) -> ComplementReport {
    let bbox = &cluster.bbox;
    let dim = bbox.dim();
    let mut seen = cluster.members.clone(); // members count as visited
    let mut sizes = Vec::new();
    let mut all_touch = true;
    let mut site = vec![0i64; dim];
    for start in 0..bbox.len() {
        if seen.get(start) {
            continue;
        }
        let mut size = 0usize;
        let mut touches = false;
        let mut stack = vec![start];
        seen.set(start);
        while let Some(idx) = stack.pop() {
            size += 1;
            bbox.site_of(idx, &mut site);
            if bbox.is_boundary(&site) {
                touches = true;
            }
            for axis in 1..=dim {
                let (lo, hi) = bbox.axis_range(axis);
                let c = site[axis - 1];
                if c > lo {
                    let n = idx - bbox.stride(axis);
                    if !seen.get(n) {
                        seen.set(n);
                        stack.push(n);
                    }
                }
                if c < hi {
                    let n = idx + bbox.stride(axis);
                    if !seen.get(n) {
                        seen.set(n);
                        stack.push(n);
                    }
                }
            }
        }
        sizes.push(size);
        all_touch &= touches;
    }
    ComplementReport {
        component_count: sizes.len(),
        component_sizes: sizes,
        all_touch_boundary: all_touch,
    }
}

/// A violation of the segment-filling property: the line through
/// `transverse` is solid on [k1, k2] and the neighboring line along `dir`
/// holds both endpoints, yet has a hole between them.
#[derive(Clone, Debug)]
pub struct SegmentViolation {
    pub transverse: Vec<i64>,
    pub dir: Direction,
    pub k1: i64,
    pub k2: i64,
}

/// Exhaustive in-box check of the segment-filling property over every
/// axis-1 line and every transverse direction.
pub fn segment_property_check(cluster: &Cluster) -> Vec<SegmentViolation> {
    let bbox = &cluster.bbox;
    let dim = bbox.dim();
    let n1 = bbox.extent(1);
    let (lo1, _) = bbox.axis_range(1);
    let lines = bbox.len() / n1;
    let mut violations = Vec::new();
    let mut site = vec![0i64; dim];
    for line in 0..lines {
        let base = line * n1;
        bbox.site_of(base, &mut site);
        for axis in 2..=dim {
            for negative in [false, true] {
                let dir = Direction::new(axis, negative);
                let ncoord = site[axis - 1] + dir.offset();
                let (lo, hi) = bbox.axis_range(axis);
                if ncoord < lo || ncoord > hi {
                    continue;
                }
                let nbase = if negative { base - bbox.stride(axis) } else { base + bbox.stride(axis) };
                // walk maximal solid runs of the source line
                let mut k = 0usize;
                while k < n1 {
                    if !cluster.members.get(base + k) {
                        k += 1;
                        continue;
                    }
                    let mut end = k;
                    while end + 1 < n1 && cluster.members.get(base + end + 1) {
                        end += 1;
                    }
                    // neighbor bits within [k, end] must be contiguous
                    let mut first = None;
                    let mut last = 0usize;
                    for j in k..=end {
                        if cluster.members.get(nbase + j) {
                            if first.is_none() {
                                first = Some(j);
                            }
                            last = j;
                        }
                    }
                    if let Some(f) = first {
                        for j in f..=last {
                            if !cluster.members.get(nbase + j) {
                                let mut t = site.clone();
                                t[0] = 0;
                                violations.push(SegmentViolation {
                                    transverse: t,
                                    dir,
                                    k1: lo1 + f as i64,
                                    k2: lo1 + last as i64,
                                });
                                break;
                            }
                        }
                    }
                    k = end + 1;
                }
            }
        }
    }
    violations
}

/// A constructed origin-to-target-line path; `complete` is false when the
/// construction ran off the box, in which case `sites` holds the partial
/// path.
#[derive(Clone, Debug)]
pub struct WitnessPath {
    pub sites: Vec<Vec<i64>>,
    pub complete: bool,
    /// Endpoint offset along axis 1: endpoint = target + shift * e1.
    pub shift: Option<i64>,
}

/// Build an explicit arrow path from the origin to some site on the
/// axis-1 line of the target.
///
/// Works in two phases. Phase one walks each target coordinate that is
/// both nonnegative (relative to the origin) and available in the common E
/// core: Omega_+ sites step along that axis, Omega_- sites step down
/// axis 1. Phase two settles the remaining coordinates: Omega_+ sites step
/// up axis 1, Omega_- sites step toward the target along the lowest
/// unsettled axis.
pub fn witness_path(
    field: &EnvironmentField,
    origin: &[i64],
    target: &[i64],
    bbox: &LatticeBox,
) -> Result<WitnessPath> {
    let spec = field.spec();
    let report = spec.check_condition1();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "witness path needs condition 1; failed: {}",
            report.failure_summary()
        )));
    }
    let p = spec.p();
    if p.is_zero() || p.is_one() {
        return Err(DreError::InvalidInput(
            "witness path needs p strictly between 0 and 1".into(),
        ));
    }
    if !bbox.contains(origin) || !bbox.contains(target) {
        return Err(DreError::InvalidInput("origin and target must lie in the box".into()));
    }
    let dim = spec.dim();
    let core = spec.e_inter();
    let phase1: Vec<usize> = (2..=dim)
        .filter(|&j| target[j - 1] >= origin[j - 1] && core.contains(Direction::positive(j)))
        .collect();
    let phase2: Vec<usize> = (2..=dim).filter(|j| !phase1.contains(j)).collect();

    let mut cur = origin.to_vec();
    let mut sites = vec![cur.clone()];
    let step = |cur: &mut Vec<i64>, sites: &mut Vec<Vec<i64>>, dir: Direction| -> bool {
        debug_assert!(field.env_at(cur).contains(dir), "step {dir} unavailable at {cur:?}");
        dir.advance(cur);
        if !bbox.contains(cur) {
            return false;
        }
        sites.push(cur.clone());
        true
    };

    for &j in &phase1 {
        while cur[j - 1] != target[j - 1] {
            let dir = if field.is_omega_plus(&cur) {
                Direction::positive(j)
            } else {
                Direction::negative(1)
            };
            if !step(&mut cur, &mut sites, dir) {
                return Ok(WitnessPath { sites, complete: false, shift: None });
            }
        }
    }
    loop {
        let pending = phase2.iter().find(|&&j| cur[j - 1] != target[j - 1]);
        let Some(&j) = pending else { break };
        let dir = if field.is_omega_plus(&cur) {
            Direction::positive(1)
        } else {
            Direction::new(j, cur[j - 1] > target[j - 1])
        };
        if !step(&mut cur, &mut sites, dir) {
            return Ok(WitnessPath { sites, complete: false, shift: None });
        }
    }
    let shift = cur[0] - target[0];
    Ok(WitnessPath { sites, complete: true, shift: Some(shift) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ExplicitEnvironment;
    use crate::fixed::Prob;
    use crate::model::{EdgeSet, ModelSpec};

    fn prob(s: &str) -> Prob {
        Prob::from_decimal_str(s).unwrap()
    }

    #[test]
    fn forward_cluster_all_positive() {
        // p = 1 half-orthant: the forward cluster of the origin is the
        // nonnegative orthant.
        let field = EnvironmentField::new(ModelSpec::half_orthant(2, Prob::ONE), 1);
        let bbox = LatticeBox::cube(2, -4, 4).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        for x in -4..=4i64 {
            for y in -4..=4i64 {
                assert_eq!(c.contains(&[x, y]), x >= 0 && y >= 0, "({x},{y})");
            }
        }
        assert!(c.touched_boundary());
        assert_eq!(c.member_count(), 25);
    }

    #[test]
    fn forward_cluster_single_axis() {
        // Omega_+ points only along +1; at p = 1 the cluster is one ray.
        let e = EdgeSet::from_dirs(2, &[Direction::positive(1)]);
        let spec = ModelSpec::two_valued(2, e, EdgeSet::full(2), Prob::ONE).unwrap();
        let field = EnvironmentField::new(spec, 1);
        let bbox = LatticeBox::cube(2, -3, 3).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        let members: Vec<_> = c.iter_members().collect();
        assert_eq!(members, vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![3, 0]]);
    }

    #[test]
    fn backward_cluster_is_dual_to_forward() {
        let field = EnvironmentField::new(ModelSpec::orthant(2, prob("0.6")), 17);
        let bbox = LatticeBox::cube(2, -3, 3).unwrap();
        let origin = [0i64, 0];
        let bwd = backward_cluster(&field, &origin, &bbox).unwrap();
        // y reaches the origin within the box iff the forward cluster of y
        // (same box) holds the origin
        let mut site = vec![0i64; 2];
        for idx in 0..bbox.len() {
            bbox.site_of(idx, &mut site);
            let fwd = forward_cluster(&field, &site, &bbox).unwrap();
            assert_eq!(
                bwd.contains(&site),
                fwd.contains(&origin),
                "duality at {site:?}"
            );
        }
    }

    #[test]
    fn mutual_cluster_intersects() {
        let field = EnvironmentField::new(ModelSpec::orthant(2, prob("0.5")), 4);
        let bbox = LatticeBox::cube(2, -5, 5).unwrap();
        let f = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        let b = backward_cluster(&field, &[0, 0], &bbox).unwrap();
        let m = mutual_cluster(&field, &[0, 0], &bbox).unwrap();
        let mut site = vec![0i64; 2];
        for idx in 0..bbox.len() {
            bbox.site_of(idx, &mut site);
            assert_eq!(m.contains(&site), f.contains(&site) && b.contains(&site));
        }
    }

    #[test]
    fn ray_closure_fills_upward() {
        let field = EnvironmentField::new(ModelSpec::orthant(2, prob("0.5")), 8);
        let bbox = LatticeBox::cube(2, -4, 4).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        let r = ray_closure(&c, 1).unwrap();
        // contains the cluster, upward closed, idempotent
        assert!(c.members().is_subset_of(r.members()));
        for y in -4..=4i64 {
            let mut seen = false;
            for x in -4..=4i64 {
                if r.contains(&[x, y]) {
                    seen = true;
                } else {
                    assert!(!seen, "hole above a member at ({x},{y})");
                }
            }
        }
        let rr = ray_closure(&r, 1).unwrap();
        assert_eq!(rr.members(), r.members());
        assert!(ray_closure(&c, 0).is_err());
    }

    #[test]
    fn slice_components_and_boundary_flags() {
        // hand-built plane: pin a 2x1 bar and an isolated far cell
        let spec = ModelSpec::orthant(2, Prob::ONE);
        let field = EnvironmentField::new(spec, 1);
        let bbox = LatticeBox::cube(2, -3, 3).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        let s = slice(&c, 2, &[0, 0]).unwrap();
        // p = 1 orthant: slice is the upper-right quadrant, one component
        assert_eq!(s.components.len(), 1);
        assert!(s.components[0].touches_boundary);
        assert_eq!(s.cell_count, 16);
    }

    #[test]
    fn complement_of_quadrant() {
        let field = EnvironmentField::new(ModelSpec::half_orthant(2, Prob::ONE), 1);
        let bbox = LatticeBox::cube(2, -4, 4).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        let rep = complement_connectivity(&c);
        assert_eq!(rep.component_count, 1);
        assert!(rep.all_touch_boundary);
        assert_eq!(rep.component_sizes, vec![81 - 25]);
    }

    #[test]
    fn segment_property_detects_planted_hole() {
        // membership built by hand through a pinned environment is
        // overkill; instead check the detector on a synthetic cluster
        let spec = ModelSpec::orthant(2, Prob::ONE);
        let field = EnvironmentField::new(spec, 1);
        let bbox = LatticeBox::cube(2, 0, 4).unwrap();
        let mut c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        assert!(segment_property_check(&c).is_empty());
        // plant a hole: line y=1 keeps k=0 and k=4 but loses k=2
        let kill = bbox.index_of(&[2, 1]).unwrap();
        c.members.clear(kill);
        let v = segment_property_check(&c);
        assert!(!v.is_empty());
        assert!(v.iter().any(|s| s.dir == Direction::positive(2) && s.k1 <= 2 && 2 <= s.k2));
    }

    #[test]
    fn witness_path_requires_condition1_and_open_p() {
        let bbox = LatticeBox::cube(2, -10, 10).unwrap();
        let bad = ModelSpec::two_valued(
            2,
            EdgeSet::from_dirs(2, &[Direction::positive(2)]),
            EdgeSet::full(2),
            prob("0.5"),
        )
        .unwrap();
        let field = EnvironmentField::new(bad, 1);
        assert!(witness_path(&field, &[0, 0], &[1, 1], &bbox).is_err());

        let field = EnvironmentField::new(ModelSpec::orthant(2, Prob::ONE), 1);
        assert!(witness_path(&field, &[0, 0], &[1, 1], &bbox).is_err());
    }

    #[test]
    fn witness_path_reaches_target_line() {
        let field = EnvironmentField::new(ModelSpec::orthant(3, prob("0.5")), 9);
        let bbox = LatticeBox::cube(3, -300, 300).unwrap();
        let target = [3i64, 2, 1];
        let w = witness_path(&field, &[0, 0, 0], &target, &bbox).unwrap();
        assert!(w.complete);
        let end = w.sites.last().unwrap();
        assert_eq!(end[1], target[1]);
        assert_eq!(end[2], target[2]);
        assert_eq!(end[0], target[0] + w.shift.unwrap());
        // every step follows an arrow of the environment
        for pair in w.sites.windows(2) {
            let arrows = field.env_at(&pair[0]);
            let found = arrows.iter().any(|d| {
                let mut nxt = pair[0].clone();
                d.advance(&mut nxt);
                nxt == pair[1]
            });
            assert!(found, "step {:?} -> {:?} not an arrow", pair[0], pair[1]);
        }
        // self-avoiding
        let mut uniq = w.sites.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), w.sites.len());
    }

    #[test]
    fn witness_path_trivial_target() {
        let field = EnvironmentField::new(ModelSpec::orthant(2, prob("0.5")), 9);
        let bbox = LatticeBox::cube(2, -10, 10).unwrap();
        let w = witness_path(&field, &[0, 0], &[0, 0], &bbox).unwrap();
        assert!(w.complete);
        assert_eq!(w.shift, Some(0));
        assert_eq!(w.sites, vec![vec![0, 0]]);
    }

    #[test]
    fn pinned_environment_cluster() {
        // tiny deterministic check of pins driving reachability: a wall of
        // Omega_- sites blocks the orthant cluster
        let spec = ModelSpec::orthant(2, Prob::HALF);
        let explicit = ExplicitEnvironment::new(
            spec,
            vec![vec![0, 0]],
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        let field = EnvironmentField::from_explicit(&explicit, 123).unwrap();
        let bbox = LatticeBox::new(vec![0, 0], vec![1, 1]).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        // origin steps to (1,0) and (0,1); both are Omega_- and point
        // negatively, looping back inside the box or out of it
        assert!(c.contains(&[1, 0]) && c.contains(&[0, 1]));
        assert!(!c.contains(&[1, 1]));
    }
}
