//! Blocking surfaces: side functions, their closure, clause-by-clause
//! verification, and the member-bound check.
//!
//! A side function picks one point on each axis-1 line of a window. The
//! point set, together with connecting segments where the picked height
//! jumps between neighboring lines, forms a surface that certifies the
//! forward cluster of the origin cannot escape downward past it.

use std::collections::BTreeSet;

use crate::cluster::forward_cluster;
use crate::env::EnvironmentField;
use crate::error::{DreError, Result};
use crate::fields::{LField, RField, Stability};
use crate::lattice::{LatticeBox, TransverseWindow};
use crate::model::Direction;

/// One stored value per axis-1 line: the absolute axis-1 coordinate of the
/// picked point. The value at a concrete site x on the line is then
/// `stored - x_1`, which bakes in the shift identity w(y + k e_1) =
/// w(y) - k. None marks a line without evidence.
#[derive(Clone, Debug)]
pub struct SideFunction {
    window: TransverseWindow,
    values: Vec<Option<i64>>,
}

impl SideFunction {
    pub fn new(window: TransverseWindow, values: Vec<Option<i64>>) -> Result<SideFunction> {
        if window.axis() != 1 {
            return Err(DreError::InvalidInput(format!(
                "side functions live on axis-1 lines, window axis is {}",
                window.axis()
            )));
        }
        if values.len() != window.len() {
            return Err(DreError::InvalidInput(format!(
                "{} values for a window of {} lines",
                values.len(),
                window.len()
            )));
        }
        Ok(SideFunction { window, values })
    }

    pub fn constant(window: TransverseWindow, value: i64) -> Result<SideFunction> {
        let n = window.len();
        SideFunction::new(window, vec![Some(value); n])
    }

    pub fn window(&self) -> &TransverseWindow {
        &self.window
    }

    /// Stored value of the line: w at the representative with axis-1
    /// coordinate 0.
    pub fn value(&self, line: usize) -> Option<i64> {
        self.values[line]
    }

    /// w at an arbitrary site, None when the line is outside the window or
    /// carries no value.
    pub fn w_at(&self, site: &[i64]) -> Option<i64> {
        let line = self.window.line_of_site(site)?;
        Some(self.values[line]? - site[0])
    }

    /// The picked point of the line.
    pub fn point(&self, line: usize) -> Option<Vec<i64>> {
        self.values[line].map(|s| self.window.site_at(line, s))
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_fully_defined(&self) -> bool {
        self.defined_count() == self.values.len()
    }

    /// Shift one line's value; diagnostic hook for perturbation tests.
    pub fn bump(&mut self, line: usize, delta: i64) {
        if let Some(v) = self.values[line].as_mut() {
            *v += delta;
        }
    }
}

/// Extract a side function from the stable entries of an L field.
pub fn side_function_from_lfield(lf: &LField) -> Result<SideFunction> {
    if lf.axis() != 1 {
        return Err(DreError::InvalidInput("side functions need an axis-1 field".into()));
    }
    let values: Vec<Option<i64>> = (0..lf.len())
        .map(|line| match lf.status(line) {
            Stability::Stable => lf.value(line),
            Stability::WindowLimited => None,
        })
        .collect();
    if values.iter().all(|v| v.is_none()) {
        return Err(DreError::InvalidInput("no barrier evidence at this depth".into()));
    }
    SideFunction::new(lf.window().clone(), values)
}

/// Extract a side function from the stable entries of an R field, one step
/// above each line's highest backward-cluster member.
pub fn side_function_from_rfield(rf: &RField) -> Result<SideFunction> {
    if rf.axis() != 1 {
        return Err(DreError::InvalidInput("side functions need an axis-1 field".into()));
    }
    let values: Vec<Option<i64>> = (0..rf.len())
        .map(|line| match rf.status(line) {
            Stability::Stable => rf.value(line).map(|r| r + 1),
            Stability::WindowLimited => None,
        })
        .collect();
    if values.iter().all(|v| v.is_none()) {
        return Err(DreError::InvalidInput("no barrier evidence at this depth".into()));
    }
    SideFunction::new(rf.window().clone(), values)
}

/// The closed surface: picked points plus connecting segments.
#[derive(Clone, Debug)]
pub struct BarrierClosure {
    /// Distinct surface sites, sorted.
    pub sites: Vec<Vec<i64>>,
    /// All window lines carry values and no needed neighbor value was
    /// missing.
    pub window_complete: bool,
    /// Line/direction pairs whose neighbor line falls outside the window,
    /// so the segment guard could not be evaluated there.
    pub boundary_pairs: usize,
}

fn closure_dirs(field: &EnvironmentField) -> Vec<Direction> {
    let spec = field.spec();
    let dirs = spec.e_union().minus(&spec.e_inter());
    dirs.iter().filter(|d| *d != Direction::negative(1)).collect()
}

fn segment_dirs(field: &EnvironmentField) -> Vec<Direction> {
    let spec = field.spec();
    spec.e_union()
        .iter()
        .filter(|d| d.axis() != 1)
        .collect()
}

/// Collect the surface: for each line the picked point, and for each
/// line/direction pair whose neighbor value within the window is strictly
/// higher, the vertical segment between the two picked heights.
///
/// Segments are built for arrow directions outside the common core (the
/// verification clauses sweep the wider set of all non-axis directions;
/// see `verify_barrier`).
pub fn barrier_closure(w: &SideFunction, field: &EnvironmentField) -> BarrierClosure {
    let window = w.window();
    let dirs = closure_dirs(field);
    let mut sites: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut complete = w.is_fully_defined();
    let mut boundary_pairs = 0usize;
    for line in 0..window.len() {
        let Some(s) = w.value(line) else { continue };
        sites.insert(window.site_at(line, s));
        for &dir in &dirs {
            let Some(nline) = window.neighbor(line, dir) else {
                boundary_pairs += 1;
                continue;
            };
            let Some(ns) = w.value(nline) else {
                complete = false;
                continue;
            };
            if ns > s {
                for k in s..ns {
                    sites.insert(window.site_at(line, k));
                }
            }
        }
    }
    BarrierClosure { sites: sites.into_iter().collect(), window_complete: complete, boundary_pairs }
}

/// Clause-by-clause verification outcome.
#[derive(Clone, Debug)]
pub struct BarrierCheckReport {
    /// The shift identity holds by representation.
    pub s1_ok: bool,
    /// Picked points that are not Omega_+ sites.
    pub s2_violations: Vec<Vec<i64>>,
    /// Segment sites that are not Omega_+ or still carry the crossing
    /// arrow.
    pub s3_violations: Vec<(Vec<i64>, Direction)>,
    /// Distinct surface sites examined.
    pub closure_size: usize,
    /// No window line or needed neighbor value was missing.
    pub window_complete: bool,
    /// Line/direction pairs skipped because the neighbor line lies outside
    /// the window.
    pub boundary_pairs: usize,
}

impl BarrierCheckReport {
    pub fn pass(&self) -> bool {
        self.s1_ok
            && self.s2_violations.is_empty()
            && self.s3_violations.is_empty()
            && self.window_complete
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verdict: {}\n", if self.pass() { "pass" } else { "fail" }));
        out.push_str("shift identity: by representation\n");
        out.push_str(&format!("point violations: {}\n", self.s2_violations.len()));
        out.push_str(&format!("segment violations: {}\n", self.s3_violations.len()));
        out.push_str(&format!("surface sites examined: {}\n", self.closure_size));
        out.push_str(&format!(
            "window complete: {} (edge pairs skipped: {})\n",
            self.window_complete, self.boundary_pairs
        ));
        for v in &self.s2_violations {
            out.push_str(&format!("point violation at {v:?}\n"));
        }
        for (v, d) in &self.s3_violations {
            out.push_str(&format!("segment violation at {v:?} direction {d}\n"));
        }
        out
    }

    /// One row per violation: clause, site, direction.
    pub fn violations_csv(&self) -> String {
        let mut out = String::from("clause,site,direction\n");
        for v in &self.s2_violations {
            let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("point,{},\n", coords.join(" ")));
        }
        for (v, d) in &self.s3_violations {
            let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("segment,{},{d}\n", coords.join(" ")));
        }
        out
    }
}

/// Check the surface clauses against the environment.
///
/// The picked point of every line must be an Omega_+ site. For every
/// non-axis arrow direction and every line whose neighbor value within the
/// window is strictly higher, the sites strictly between the two heights
/// must be Omega_+ and must not carry that direction. Only the Omega
/// label and (on Omega_+ sites) the drawn arrow set are ever read, so the
/// outcome is independent of the model's Omega_- arrow assignment.
pub fn verify_barrier(w: &SideFunction, field: &EnvironmentField) -> BarrierCheckReport {
    let window = w.window();
    let dirs = segment_dirs(field);
    let mut s2 = Vec::new();
    let mut s3 = Vec::new();
    let mut examined: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut complete = w.is_fully_defined();
    let mut boundary_pairs = 0usize;
    for line in 0..window.len() {
        let Some(s) = w.value(line) else { continue };
        let point = window.site_at(line, s);
        if !field.is_omega_plus(&point) {
            s2.push(point.clone());
        }
        examined.insert(point);
        for &dir in &dirs {
            let Some(nline) = window.neighbor(line, dir) else {
                boundary_pairs += 1;
                continue;
            };
            let Some(ns) = w.value(nline) else {
                complete = false;
                continue;
            };
            if ns <= s {
                continue;
            }
            for k in s..ns {
                let site = window.site_at(line, k);
                // label first: the arrow set is only read on Omega_+ sites
                if !field.is_omega_plus(&site) || field.env_at(&site).contains(dir) {
                    s3.push((site.clone(), dir));
                }
                examined.insert(site);
            }
        }
    }
    BarrierCheckReport {
        s1_ok: true,
        s2_violations: s2,
        s3_violations: s3,
        closure_size: examined.len(),
        window_complete: complete,
        boundary_pairs,
    }
}

#[derive(Clone, Debug)]
pub struct BoundCheckReport {
    /// Cluster members whose line carries a value.
    pub checked: usize,
    /// Cluster members on lines outside the window or without a value.
    pub skipped_off_window: usize,
    /// Members strictly below their line's picked point.
    pub violations: Vec<Vec<i64>>,
}

impl BoundCheckReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify the surface, then recompute the forward cluster of `origin` in
/// the box and check that no member sits strictly before its line's picked
/// point (w(x) <= 0 for every member x).
pub fn barrier_bound_check(
    w: &SideFunction,
    field: &EnvironmentField,
    origin: &[i64],
    bbox: &LatticeBox,
) -> Result<BoundCheckReport> {
    let report = field.spec().check_condition2();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "bound check needs condition 2; failed: {}",
            report.failure_summary()
        )));
    }
    let check = verify_barrier(w, field);
    if !check.pass() {
        return Err(DreError::InvalidInput(
            "surface verification failed; bound check refused".into(),
        ));
    }
    match w.w_at(origin) {
        Some(v) if v <= 0 => {}
        Some(v) => {
            return Err(DreError::InvalidInput(format!(
                "picked point sits {v} above the origin; bound check needs w(origin) <= 0"
            )));
        }
        None => {
            return Err(DreError::InvalidInput(
                "origin line carries no value; bound check refused".into(),
            ));
        }
    }
    let cluster = forward_cluster(field, origin, bbox)?;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut violations = Vec::new();
    for site in cluster.iter_members() {
        match w.w_at(&site) {
            Some(v) => {
                checked += 1;
                if v > 0 {
                    violations.push(site);
                }
            }
            None => skipped += 1,
        }
    }
    Ok(BoundCheckReport { checked, skipped_off_window: skipped, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ExplicitEnvironment;
    use crate::fields::{l_field, r_field};
    use crate::fixed::Prob;
    use crate::model::{EdgeSet, ModelSpec};

    fn prob(s: &str) -> Prob {
        Prob::from_decimal_str(s).unwrap()
    }

    #[test]
    fn shift_identity_by_representation() {
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let w = SideFunction::constant(window.clone(), 3).unwrap();
        assert_eq!(w.w_at(&[0, 1]), Some(3));
        assert_eq!(w.w_at(&[5, 1]), Some(-2));
        assert_eq!(w.w_at(&[0, 9]), None);
        assert_eq!(w.point(window.index_of(&[1]).unwrap()), Some(vec![3, 1]));
    }

    #[test]
    fn flat_pinned_surface_passes() {
        // pin the picked points Omega_+; a constant side function has no
        // segments, so those are the only sites read
        let spec = ModelSpec::half_orthant(2, Prob::HALF);
        let pins: Vec<Vec<i64>> = (-3..=3).map(|j| vec![0, j]).collect();
        let explicit = ExplicitEnvironment::new(spec, pins, vec![]).unwrap();
        let field = EnvironmentField::from_explicit(&explicit, 5).unwrap();
        let window = TransverseWindow::centered(2, 1, 3).unwrap();
        let w = SideFunction::constant(window, 0).unwrap();
        let report = verify_barrier(&w, &field);
        assert!(report.pass(), "{}", report.to_text());
        assert_eq!(report.closure_size, 7);
        // the closure is exactly the picked points
        let closure = barrier_closure(&w, &field);
        assert_eq!(closure.sites.len(), 7);
        assert!(closure.window_complete);
    }

    #[test]
    fn closure_segment_spans_height_jump() {
        // two arrow-set values make the segment direction set nonempty
        let e1 = EdgeSet::from_dirs(2, &[Direction::positive(1)]);
        let e12 = EdgeSet::from_dirs(2, &[Direction::positive(1), Direction::positive(2)]);
        let spec = ModelSpec::new(
            2,
            vec![e1, e12],
            vec![EdgeSet::full(2)],
            vec![prob("0.5"), prob("0.5")],
            vec![Prob::ONE],
            prob("0.5"),
        )
        .unwrap();
        let field = EnvironmentField::new(spec, 1);
        let window = TransverseWindow::new(2, 1, vec![0], vec![1]).unwrap();
        let line0 = window.index_of(&[0]).unwrap();
        let line1 = window.index_of(&[1]).unwrap();
        let mut values = vec![None; 2];
        values[line0] = Some(0);
        values[line1] = Some(3);
        let w = SideFunction::new(window, values).unwrap();
        let closure = barrier_closure(&w, &field);
        let expect: Vec<Vec<i64>> = vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![3, 1]]
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(closure.sites, expect);
        assert!(closure.window_complete);
        // line 1 has no +2 neighbor inside the window
        assert_eq!(closure.boundary_pairs, 1);
    }

    #[test]
    fn missing_value_blocks_completeness() {
        let spec = ModelSpec::half_orthant(2, prob("0.9"));
        let field = EnvironmentField::new(spec, 3);
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let mut values = vec![Some(0); 5];
        values[2] = None;
        let w = SideFunction::new(window, values).unwrap();
        let report = verify_barrier(&w, &field);
        assert!(!report.window_complete);
        assert!(!report.pass());
    }

    #[test]
    fn extracted_surfaces_pass_when_fully_stable() {
        let mut fully_stable = 0;
        for seed in 1..=6u64 {
            let spec = ModelSpec::half_orthant(2, prob("0.85"));
            let field = EnvironmentField::new(spec, seed);
            let window = TransverseWindow::centered(2, 1, 5).unwrap();
            let lf = l_field(&field, &[0, 0], &window, &[60, 90]).unwrap();
            let w = match side_function_from_lfield(&lf) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if !w.is_fully_defined() {
                continue;
            }
            fully_stable += 1;
            let report = verify_barrier(&w, &field);
            assert!(report.pass(), "seed {seed}: {}", report.to_text());
            assert!(w.w_at(&[0, 0]).unwrap() <= 0, "seed {seed}");
            let bbox = LatticeBox::new(vec![-90, -50], vec![90, 50]).unwrap();
            let bound = barrier_bound_check(&w, &field, &[0, 0], &bbox).unwrap();
            assert!(bound.pass(), "seed {seed}: {} violations", bound.violations.len());
            assert!(bound.checked > 0);
        }
        assert!(fully_stable >= 3, "only {fully_stable}/6 samples fully stable");
    }

    #[test]
    fn rfield_surface_one_above_passes() {
        let mut fully_stable = 0;
        for seed in 1..=6u64 {
            let spec = ModelSpec::half_orthant(2, prob("0.85"));
            let field = EnvironmentField::new(spec, seed);
            let window = TransverseWindow::centered(2, 1, 5).unwrap();
            let rf = r_field(&field, &[0, 0], &window, &[60, 90]).unwrap();
            let w = match side_function_from_rfield(&rf) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if !w.is_fully_defined() {
                continue;
            }
            fully_stable += 1;
            let report = verify_barrier(&w, &field);
            assert!(report.pass(), "seed {seed}: {}", report.to_text());
        }
        assert!(fully_stable >= 3, "only {fully_stable}/6 samples fully stable");
    }

    #[test]
    fn mutation_near_equal_pair_breaks_surface() {
        let mut tried = 0;
        for seed in 1..=8u64 {
            let spec = ModelSpec::half_orthant(2, prob("0.85"));
            let field = EnvironmentField::new(spec, seed);
            let window = TransverseWindow::centered(2, 1, 5).unwrap();
            let lf = l_field(&field, &[0, 0], &window, &[60, 90]).unwrap();
            let Ok(w) = side_function_from_lfield(&lf) else { continue };
            if !w.is_fully_defined() || !verify_barrier(&w, &field).pass() {
                continue;
            }
            // find two neighboring lines picking the same height and raise
            // the upper one; the lower line's point then falls inside the
            // new segment and carries the crossing arrow
            let up = Direction::positive(2);
            let pair = (0..w.window().len()).find(|&line| {
                w.window()
                    .neighbor(line, up)
                    .is_some_and(|n| w.value(line) == w.value(n))
            });
            let Some(line) = pair else { continue };
            tried += 1;
            let upper = w.window().neighbor(line, up).unwrap();
            let mut bad = w.clone();
            bad.bump(upper, 1);
            let report = verify_barrier(&bad, &field);
            assert!(!report.pass(), "seed {seed} survived the bump");
            assert!(
                !report.s2_violations.is_empty() || !report.s3_violations.is_empty(),
                "seed {seed}: failure must be a clause violation, not incompleteness"
            );
        }
        assert!(tried >= 3, "only {tried}/8 samples offered an equal pair");
    }

    #[test]
    fn bound_check_gates() {
        // condition 2 holds for the half-orthant; a surface failing its
        // point clause must be rejected before any bound claim
        let spec = ModelSpec::half_orthant(2, prob("0.5"));
        let pins_minus: Vec<Vec<i64>> = (-2..=2).map(|j| vec![0, j]).collect();
        let explicit = ExplicitEnvironment::new(spec, vec![], pins_minus).unwrap();
        let field = EnvironmentField::from_explicit(&explicit, 9).unwrap();
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let w = SideFunction::constant(window, 0).unwrap();
        let bbox = LatticeBox::cube(2, -5, 5).unwrap();
        assert!(barrier_bound_check(&w, &field, &[0, 0], &bbox).is_err());

        // orthant fails the single-full-F-set clause
        let spec = ModelSpec::orthant(2, prob("0.5"));
        let field = EnvironmentField::new(spec, 9);
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let w = SideFunction::constant(window, 0).unwrap();
        assert!(matches!(
            barrier_bound_check(&w, &field, &[0, 0], &bbox),
            Err(DreError::ConditionFailed(_))
        ));
    }

    #[test]
    fn bound_check_quadrant() {
        // all sites Omega_+: the forward cluster is the quadrant and the
        // zero surface bounds it exactly
        let spec = ModelSpec::half_orthant(2, Prob::ONE);
        let field = EnvironmentField::new(spec, 1);
        let window = TransverseWindow::centered(2, 1, 4).unwrap();
        let w = SideFunction::constant(window, 0).unwrap();
        let bbox = LatticeBox::cube(2, -4, 4).unwrap();
        let rep = barrier_bound_check(&w, &field, &[0, 0], &bbox).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.checked, 25);
        assert_eq!(rep.skipped_off_window, 0);
    }

    #[test]
    fn no_evidence_is_an_error() {
        // deep subcritical: nothing stabilizes at toy depths
        let spec = ModelSpec::half_orthant(2, prob("0.1"));
        let field = EnvironmentField::new(spec, 2);
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let lf = l_field(&field, &[0, 0], &window, &[10, 20]).unwrap();
        match side_function_from_lfield(&lf) {
            Err(DreError::InvalidInput(msg)) => {
                assert!(msg.contains("no barrier evidence"));
            }
            other => panic!("expected no-evidence error, got {other:?}"),
        }
    }
}
