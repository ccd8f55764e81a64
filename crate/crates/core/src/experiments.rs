//! Monte-Carlo harnesses: coupled equality tests, inclusion suites,
//! critical-point scans, forward/backward comparison, and the directional
//! slope table.
//!
//! Samples are parallel; every aggregate is reduced in sample order so
//! repeated runs produce byte-identical output.

use rayon::prelude::*;

use crate::barrier::{side_function_from_lfield, verify_barrier};
use crate::cluster::{forward_cluster, ray_closure};
use crate::env::{mix64, EnvironmentField};
use crate::error::{DreError, Result};
use crate::fields::{l_field, l_field_with_cluster, r_field, Stability};
use crate::fixed::Prob;
use crate::lattice::{LatticeBox, TransverseWindow};
use crate::model::ModelSpec;
use crate::stats::{bootstrap_crossing_ci, crossing, isotonic_nondecreasing, CrossingCi};

/// Seed for the i-th sample of a run: mix64(base XOR mix64(i+1)). Samples
/// are exchangeable and independent of the worker schedule.
pub fn sample_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ mix64(index.wrapping_add(1)))
}

/// Seed for the bootstrap resampler, off the sample stream.
fn bootstrap_seed(base: u64) -> u64 {
    mix64(base ^ 0x626f_6f74_7374_7261)
}

fn format_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------
// coupled equality test

/// Per-sample outcome of the coupled comparison.
#[derive(Clone, Debug)]
pub struct CouplingVerdict {
    pub seed: u64,
    /// Field values agree on every line stable in both runs.
    pub l_equal: bool,
    /// Upward ray closure of the model cluster equals the relaxed-model
    /// cluster on every line stable in both runs.
    pub ray_equal: bool,
    pub compared_lines: usize,
    pub skipped_lines: usize,
}

#[derive(Clone, Debug)]
pub struct Theorem1Report {
    pub verdicts: Vec<CouplingVerdict>,
}

impl Theorem1Report {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.l_equal && v.ray_equal)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,l_equal,ray_equal,compared_lines,skipped_lines\n");
        for v in &self.verdicts {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                v.seed, v.l_equal, v.ray_equal, v.compared_lines, v.skipped_lines
            ));
        }
        out
    }
}

/// Couple the model with its relaxed form (all backward arrow sets filled
/// in) through a shared seed and compare: field values on mutually stable
/// lines, and ray-closed cluster membership on those same lines.
pub fn theorem1_test(
    spec: &ModelSpec,
    window: &TransverseWindow,
    depths: &[i64],
    samples: usize,
    base_seed: u64,
) -> Result<Theorem1Report> {
    let report = spec.check_condition1();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "coupled comparison needs condition 1; failed: {}",
            report.failure_summary()
        )));
    }
    if spec.p().is_zero() {
        return Err(DreError::InvalidInput(
            "coupled comparison needs p > 0; at p = 0 the two models genuinely differ".into(),
        ));
    }
    if window.axis() != 1 {
        return Err(DreError::InvalidInput("coupled comparison sweeps axis 1".into()));
    }
    let starred = spec.starred();
    let origin = vec![0i64; spec.dim()];
    let verdicts: Vec<CouplingVerdict> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<CouplingVerdict> {
            let seed = sample_seed(base_seed, i as u64);
            let field = EnvironmentField::new(spec.clone(), seed);
            let field_star = EnvironmentField::new(starred.clone(), seed);
            let (lf, cluster) = l_field_with_cluster(&field, &origin, window, depths)?;
            let (lf_star, cluster_star) =
                l_field_with_cluster(&field_star, &origin, window, depths)?;
            let mut l_equal = true;
            let mut ray_equal = true;
            let mut compared = 0usize;
            let mut skipped = 0usize;
            let closed = ray_closure(&cluster, 1)?;
            let bbox = closed.search_box();
            let (alo, ahi) = bbox.axis_range(1);
            let mut t = vec![0i64; window.dim() - 1];
            for line in 0..window.len() {
                let both_stable = lf.status(line) == Stability::Stable
                    && lf_star.status(line) == Stability::Stable;
                if !both_stable {
                    skipped += 1;
                    continue;
                }
                compared += 1;
                if lf.value(line) != lf_star.value(line) {
                    l_equal = false;
                }
                window.coords_of(line, &mut t);
                for k in alo..=ahi {
                    let site = window.embed(&t, k);
                    if closed.contains(&site) != cluster_star.contains(&site) {
                        ray_equal = false;
                        break;
                    }
                }
            }
            Ok(CouplingVerdict { seed, l_equal, ray_equal, compared_lines: compared, skipped_lines: skipped })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Theorem1Report { verdicts })
}

// ---------------------------------------------------------------------
// inclusion suite

#[derive(Clone, Debug)]
pub struct InclusionViolation {
    pub seed: u64,
    pub relation: &'static str,
    pub site: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub samples: usize,
    pub violations: Vec<InclusionViolation>,
}

impl InclusionReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,relation,site\n");
        for v in &self.violations {
            let coords: Vec<String> = v.site.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("{},{},{}\n", v.seed, v.relation, coords.join(" ")));
        }
        out
    }
}

/// Under a shared seed, the two-valued lower bound sits inside the model,
/// the model inside the two-valued upper bound, and the model inside its
/// relaxed form; checked on forward-cluster membership, zero tolerance.
pub fn inclusion_suite(
    spec: &ModelSpec,
    bbox: &LatticeBox,
    samples: usize,
    base_seed: u64,
) -> Result<InclusionReport> {
    let report = spec.check_condition1();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "inclusion suite needs condition 1; failed: {}",
            report.failure_summary()
        )));
    }
    let minimal = spec.minimal_two_valued()?;
    let maximal = spec.maximal_two_valued();
    let starred = spec.starred();
    let origin = vec![0i64; spec.dim()];
    let per_sample: Vec<Vec<InclusionViolation>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<InclusionViolation>> {
            let seed = sample_seed(base_seed, i as u64);
            let mut out = Vec::new();
            let run = |m: &ModelSpec| -> Result<_> {
                let field = EnvironmentField::new(m.clone(), seed);
                forward_cluster(&field, &origin, bbox)
            };
            let c_min = run(&minimal)?;
            let c_spec = run(spec)?;
            let c_max = run(&maximal)?;
            let c_star = run(&starred)?;
            let record = |idx: usize, relation: &'static str, out: &mut Vec<InclusionViolation>| {
                let mut s = vec![0i64; bbox.dim()];
                bbox.site_of(idx, &mut s);
                out.push(InclusionViolation { seed, relation, site: s });
            };
            if let Some(idx) = c_min.members().first_diff_not_in(c_spec.members()) {
                record(idx, "lower-bound-within-model", &mut out);
            }
            if let Some(idx) = c_spec.members().first_diff_not_in(c_max.members()) {
                record(idx, "model-within-upper-bound", &mut out);
            }
            if let Some(idx) = c_spec.members().first_diff_not_in(c_star.members()) {
                record(idx, "model-within-relaxed", &mut out);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InclusionReport { samples, violations: per_sample.into_iter().flatten().collect() })
}

// ---------------------------------------------------------------------
// critical-point scan

#[derive(Clone, Debug)]
struct SampleStats {
    barrier: bool,
    origin_stable: bool,
    stable_coverage: f64,
    escape_rate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub p: Prob,
    pub samples: usize,
    /// Samples with a fully-defined extracted side function that verifies
    /// and sits at or below the origin.
    pub barrier_found: usize,
    pub origin_stable: usize,
    pub mean_stable_coverage: f64,
    pub mean_escape_rate: Option<f64>,
}

impl ScanRow {
    pub fn barrier_fraction(&self) -> f64 {
        self.barrier_found as f64 / self.samples as f64
    }

    pub fn origin_fraction(&self) -> f64 {
        self.origin_stable as f64 / self.samples as f64
    }

    /// Normal-approximation 95% half-width for a count fraction.
    pub fn fraction_half_width(count: usize, n: usize) -> f64 {
        let f = count as f64 / n as f64;
        1.96 * (f * (1.0 - f) / n as f64).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub base_seed: u64,
    pub rows: Vec<ScanRow>,
    /// Isotonic fit of the barrier fractions over the grid.
    pub fitted: Vec<f64>,
    pub crossing: Option<CrossingCi>,
    pub warnings: Vec<String>,
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "p,samples,barrier_fraction,fitted_barrier_fraction,origin_stable_fraction,\
             mean_stable_coverage,mean_escape_rate,barrier_ci_half_width,origin_ci_half_width\n",
        );
        for (row, fit) in self.rows.iter().zip(&self.fitted) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.p.to_f64(),
                row.samples,
                row.barrier_fraction(),
                fit,
                row.origin_fraction(),
                row.mean_stable_coverage,
                format_opt(row.mean_escape_rate),
                ScanRow::fraction_half_width(row.barrier_found, row.samples),
                ScanRow::fraction_half_width(row.origin_stable, row.samples),
            ));
        }
        out
    }
}

fn scan_sample(
    spec: &ModelSpec,
    p: Prob,
    seed: u64,
    window: &TransverseWindow,
    depths: &[i64],
    origin: &[i64],
) -> Result<SampleStats> {
    let field = EnvironmentField::new(spec.with_p(p), seed);
    let lf = l_field(&field, origin, window, depths)?;
    let origin_line = window
        .line_of_site(origin)
        .ok_or_else(|| DreError::InvalidInput("window must contain the origin line".into()))?;
    let origin_stable = lf.status(origin_line) == Stability::Stable;
    let stable_coverage = lf.stable_count() as f64 / lf.len() as f64;
    let barrier = match side_function_from_lfield(&lf) {
        Ok(w) => {
            w.is_fully_defined()
                && verify_barrier(&w, &field).pass()
                && w.w_at(origin).is_some_and(|v| v <= 0)
        }
        Err(_) => false,
    };
    Ok(SampleStats { barrier, origin_stable, stable_coverage, escape_rate: lf.escape_rate() })
}

fn reduce_rows(
    grid: &[Prob],
    samples: usize,
    stats: Vec<SampleStats>, // indexed p-major, sample-minor
) -> Vec<ScanRow> {
    grid.iter()
        .enumerate()
        .map(|(pi, &p)| {
            let chunk = &stats[pi * samples..(pi + 1) * samples];
            let barrier_found = chunk.iter().filter(|s| s.barrier).count();
            let origin_stable = chunk.iter().filter(|s| s.origin_stable).count();
            let mean_stable_coverage =
                chunk.iter().map(|s| s.stable_coverage).sum::<f64>() / samples as f64;
            let rates: Vec<f64> = chunk.iter().filter_map(|s| s.escape_rate).collect();
            let mean_escape_rate = if rates.is_empty() {
                None
            } else {
                Some(rates.iter().sum::<f64>() / rates.len() as f64)
            };
            ScanRow { p, samples, barrier_found, origin_stable, mean_stable_coverage, mean_escape_rate }
        })
        .collect()
}

fn check_scan_inputs(spec: &ModelSpec, grid: &[Prob], samples: usize) -> Result<()> {
    let report = spec.check_condition2();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "scan needs condition 2; failed: {}",
            report.failure_summary()
        )));
    }
    if grid.is_empty() || samples == 0 {
        return Err(DreError::InvalidInput("scan needs a grid and samples".into()));
    }
    if grid.iter().any(|p| p.is_zero() || p.is_one()) {
        return Err(DreError::InvalidInput("scan grid must stay strictly inside (0,1)".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DreError::InvalidInput("scan grid must increase strictly".into()));
    }
    Ok(())
}

/// Sweep the grid of label probabilities and report, per point, how often
/// a complete verified blocking surface exists in the window; fit the
/// fraction curve monotone and extract its 50% crossing with a bootstrap
/// interval.
pub fn pc_scan(
    spec: &ModelSpec,
    grid: &[Prob],
    window: &TransverseWindow,
    depths: &[i64],
    samples: usize,
    base_seed: u64,
) -> Result<ScanResult> {
    check_scan_inputs(spec, grid, samples)?;
    let origin = vec![0i64; spec.dim()];
    let jobs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|pi| (0..samples).map(move |si| (pi, si))).collect();
    let stats: Vec<SampleStats> = jobs
        .into_par_iter()
        .map(|(pi, si)| {
            scan_sample(spec, grid[pi], sample_seed(base_seed, si as u64), window, depths, &origin)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = reduce_rows(grid, samples, stats);

    let grid_f: Vec<f64> = grid.iter().map(|p| p.to_f64()).collect();
    let fractions: Vec<f64> = rows.iter().map(|r| r.barrier_fraction()).collect();
    let weights = vec![samples as f64; grid.len()];
    let fitted = isotonic_nondecreasing(&fractions, &weights)?;
    let mut warnings = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let sd = (fitted[i] * (1.0 - fitted[i]) / samples as f64).sqrt().max(1.0 / samples as f64);
        if (fractions[i] - fitted[i]).abs() > 2.5 * sd {
            warnings.push(format!(
                "raw fraction {} at p={} sits {:.1} noise units off the monotone fit",
                fractions[i],
                row.p.to_f64(),
                (fractions[i] - fitted[i]).abs() / sd
            ));
        }
    }
    let successes: Vec<usize> = rows.iter().map(|r| r.barrier_found).collect();
    let totals = vec![samples; grid.len()];
    let crossing =
        bootstrap_crossing_ci(&grid_f, &successes, &totals, 0.5, 1000, bootstrap_seed(base_seed))?;
    Ok(ScanResult { base_seed, rows, fitted, crossing, warnings })
}

// ---------------------------------------------------------------------
// forward/backward comparison

#[derive(Clone, Debug)]
pub struct TransitionCompareRow {
    pub p: Prob,
    pub samples: usize,
    /// Samples whose origin-line top value is stable and finite.
    pub r_origin_stable: usize,
}

#[derive(Clone, Debug)]
pub struct TransitionCompareReport {
    pub forward: ScanResult,
    pub backward_rows: Vec<TransitionCompareRow>,
    pub backward_crossing: Option<CrossingCi>,
    /// Forward minus backward 50% crossing.
    pub crossing_gap: Option<f64>,
    /// The two bootstrap intervals intersect.
    pub ci_overlap: Option<bool>,
}

impl TransitionCompareReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("p,samples,barrier_fraction,r_origin_stable_fraction\n");
        for (f, b) in self.forward.rows.iter().zip(&self.backward_rows) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                f.p.to_f64(),
                f.samples,
                f.barrier_fraction(),
                b.r_origin_stable as f64 / b.samples as f64,
            ));
        }
        out
    }
}

/// Run the forward scan and, per grid point, the backward sweep; compare
/// the 50% crossings of the two stability curves.
pub fn backward_transition_compare(
    spec: &ModelSpec,
    grid: &[Prob],
    window: &TransverseWindow,
    depths: &[i64],
    samples: usize,
    base_seed: u64,
) -> Result<TransitionCompareReport> {
    check_scan_inputs(spec, grid, samples)?;
    let forward = pc_scan(spec, grid, window, depths, samples, base_seed)?;
    let origin = vec![0i64; spec.dim()];
    let jobs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|pi| (0..samples).map(move |si| (pi, si))).collect();
    let stable: Vec<bool> = jobs
        .into_par_iter()
        .map(|(pi, si)| -> Result<bool> {
            let seed = sample_seed(base_seed, si as u64);
            let field = EnvironmentField::new(spec.with_p(grid[pi]), seed);
            let rf = r_field(&field, &origin, window, depths)?;
            let line = window
                .line_of_site(&origin)
                .ok_or_else(|| DreError::InvalidInput("window must contain the origin line".into()))?;
            Ok(rf.status(line) == Stability::Stable)
        })
        .collect::<Result<Vec<_>>>()?;
    let backward_rows: Vec<TransitionCompareRow> = grid
        .iter()
        .enumerate()
        .map(|(pi, &p)| TransitionCompareRow {
            p,
            samples,
            r_origin_stable: stable[pi * samples..(pi + 1) * samples]
                .iter()
                .filter(|b| **b)
                .count(),
        })
        .collect();
    let grid_f: Vec<f64> = grid.iter().map(|p| p.to_f64()).collect();
    let successes: Vec<usize> = backward_rows.iter().map(|r| r.r_origin_stable).collect();
    let totals = vec![samples; grid.len()];
    let backward_crossing = bootstrap_crossing_ci(
        &grid_f,
        &successes,
        &totals,
        0.5,
        1000,
        bootstrap_seed(base_seed ^ 0x4241_434b),
    )?;
    let crossing_gap = match (&forward.crossing, &backward_crossing) {
        (Some(f), Some(b)) => match (f.point, b.point) {
            (Some(fp), Some(bp)) => Some(fp - bp),
            _ => None,
        },
        _ => None,
    };
    let ci_overlap = match (&forward.crossing, &backward_crossing) {
        (Some(f), Some(b)) => Some(f.overlaps(b)),
        _ => None,
    };
    Ok(TransitionCompareReport { forward, backward_rows, backward_crossing, crossing_gap, ci_overlap })
}

// ---------------------------------------------------------------------
// directional slope table

#[derive(Clone, Debug)]
pub struct ZetaRow {
    pub n: i64,
    pub total_samples: usize,
    pub stable_samples: usize,
    pub mean_slope: Option<f64>,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ZetaTable {
    pub v: Vec<i64>,
    pub rows: Vec<ZetaRow>,
}

impl ZetaTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,total_samples,stable_samples,mean_slope,stderr\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                r.total_samples,
                r.stable_samples,
                format_opt(r.mean_slope),
                format_opt(r.stderr),
            ));
        }
        out
    }
}

/// Estimate the per-step slope of the field value along the ray n*v: for
/// each n, sweep the single line through n*v and average value/n over the
/// samples where it stabilizes. Purely descriptive output.
pub fn zeta_estimate(
    spec: &ModelSpec,
    v: &[i64],
    n_list: &[i64],
    depths: &[i64],
    samples: usize,
    base_seed: u64,
) -> Result<ZetaTable> {
    let report = spec.check_condition1();
    if !report.pass() {
        return Err(DreError::ConditionFailed(format!(
            "slope table needs condition 1; failed: {}",
            report.failure_summary()
        )));
    }
    if v.len() != spec.dim() - 1 {
        return Err(DreError::InvalidInput(format!(
            "direction needs {} transverse coordinates, got {}",
            spec.dim() - 1,
            v.len()
        )));
    }
    if n_list.is_empty() || n_list[0] < 1 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DreError::InvalidInput(
            "n list must be strictly increasing and start at 1 or above".into(),
        ));
    }
    let origin = vec![0i64; spec.dim()];
    let jobs: Vec<(usize, usize)> =
        (0..n_list.len()).flat_map(|ni| (0..samples).map(move |si| (ni, si))).collect();
    let values: Vec<Option<i64>> = jobs
        .into_par_iter()
        .map(|(ni, si)| -> Result<Option<i64>> {
            let n = n_list[ni];
            let t: Vec<i64> = v.iter().map(|c| c * n).collect();
            let window = TransverseWindow::new(spec.dim(), 1, t.clone(), t)?;
            let field = EnvironmentField::new(spec.clone(), sample_seed(base_seed, si as u64));
            let lf = l_field(&field, &origin, &window, depths)?;
            Ok(match lf.status(0) {
                Stability::Stable => lf.value(0),
                Stability::WindowLimited => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let chunk = &values[ni * samples..(ni + 1) * samples];
            let slopes: Vec<f64> =
                chunk.iter().filter_map(|v| v.map(|x| x as f64 / n as f64)).collect();
            let (mean_slope, stderr) = match crate::stats::mean_and_stderr(&slopes) {
                Some((m, s)) => (Some(m), Some(s)),
                None => (None, None),
            };
            ZetaRow {
                n,
                total_samples: samples,
                stable_samples: slopes.len(),
                mean_slope,
                stderr,
            }
        })
        .collect();
    Ok(ZetaTable { v: v.to_vec(), rows })
}

/// Convenience: the monotone-fit crossing of an arbitrary fraction curve.
pub fn fraction_crossing(grid: &[f64], fractions: &[f64], level: f64) -> Result<Option<f64>> {
    let fitted = isotonic_nondecreasing(fractions, &vec![1.0; fractions.len()])?;
    Ok(crossing(grid, &fitted, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, EdgeSet};

    fn prob(s: &str) -> Prob {
        Prob::from_decimal_str(s).unwrap()
    }

    #[test]
    fn sample_seeds_are_spread_out() {
        let a = sample_seed(1, 0);
        let b = sample_seed(1, 1);
        let c = sample_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, sample_seed(1, 0));
    }

    #[test]
    fn coupled_test_passes_on_orthant() {
        let spec = ModelSpec::orthant(2, prob("0.7"));
        let window = TransverseWindow::centered(2, 1, 5).unwrap();
        let report = theorem1_test(&spec, &window, &[30, 50], 10, 42).unwrap();
        assert!(report.all_pass(), "{}", report.to_csv());
        assert!(report.verdicts.iter().any(|v| v.compared_lines > 0));
    }

    #[test]
    fn coupled_test_trivial_at_p1() {
        let spec = ModelSpec::orthant(2, Prob::ONE);
        let window = TransverseWindow::centered(2, 1, 3).unwrap();
        let report = theorem1_test(&spec, &window, &[10, 20], 3, 7).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn coupled_test_rejects_p0_and_condition_failures() {
        let spec = ModelSpec::orthant(2, Prob::ZERO);
        let window = TransverseWindow::centered(2, 1, 3).unwrap();
        assert!(theorem1_test(&spec, &window, &[10, 20], 1, 7).is_err());

        let bad = ModelSpec::two_valued(
            2,
            EdgeSet::from_dirs(2, &[Direction::positive(2)]),
            EdgeSet::full(2),
            prob("0.5"),
        )
        .unwrap();
        assert!(theorem1_test(&bad, &window, &[10, 20], 1, 7).is_err());
    }

    #[test]
    fn inclusions_hold_on_multivalued_spec() {
        let e1 = EdgeSet::from_dirs(2, &[Direction::positive(1)]);
        let e12 = EdgeSet::from_dirs(2, &[Direction::positive(1), Direction::positive(2)]);
        let f1 = EdgeSet::from_dirs(
            2,
            &[Direction::positive(2), Direction::negative(1), Direction::negative(2)],
        );
        let spec = ModelSpec::new(
            2,
            vec![e1, e12],
            vec![f1, EdgeSet::full(2)],
            vec![prob("0.5"), prob("0.5")],
            vec![prob("0.3"), prob("0.7")],
            prob("0.5"),
        )
        .unwrap();
        let bbox = LatticeBox::cube(2, -8, 8).unwrap();
        let report = inclusion_suite(&spec, &bbox, 25, 99).unwrap();
        assert!(report.pass(), "{}", report.to_csv());
    }

    #[test]
    fn scan_detects_transition() {
        let spec = ModelSpec::half_orthant(2, Prob::HALF);
        let grid: Vec<Prob> = ["0.2", "0.5", "0.8"].iter().map(|s| prob(s)).collect();
        let window = TransverseWindow::centered(2, 1, 3).unwrap();
        let result = pc_scan(&spec, &grid, &window, &[40, 80], 20, 5).unwrap();
        assert_eq!(result.rows.len(), 3);
        assert!(result.rows[0].barrier_fraction() < result.rows[2].barrier_fraction());
        assert!(result.rows[2].barrier_fraction() > 0.8, "{}", result.to_csv());
        assert!(result.fitted.windows(2).all(|w| w[0] <= w[1]));
        // determinism
        let again = pc_scan(&spec, &grid, &window, &[40, 80], 20, 5).unwrap();
        assert_eq!(result.to_csv(), again.to_csv());
    }

    #[test]
    fn scan_rejects_bad_inputs() {
        let spec = ModelSpec::half_orthant(2, Prob::HALF);
        let window = TransverseWindow::centered(2, 1, 3).unwrap();
        let orthant = ModelSpec::orthant(2, Prob::HALF);
        assert!(pc_scan(&orthant, &[prob("0.5")], &window, &[10, 20], 2, 1).is_err());
        assert!(pc_scan(&spec, &[Prob::ONE], &window, &[10, 20], 2, 1).is_err());
        assert!(pc_scan(&spec, &[prob("0.5"), prob("0.4")], &window, &[10, 20], 2, 1).is_err());
        assert!(pc_scan(&spec, &[], &window, &[10, 20], 2, 1).is_err());
    }

    #[test]
    fn backward_compare_produces_overlapping_crossings() {
        let spec = ModelSpec::half_orthant(2, Prob::HALF);
        let grid: Vec<Prob> =
            ["0.3", "0.45", "0.6", "0.75", "0.9"].iter().map(|s| prob(s)).collect();
        let window = TransverseWindow::centered(2, 1, 2).unwrap();
        let report = backward_transition_compare(&spec, &grid, &window, &[40, 80], 30, 11).unwrap();
        assert_eq!(report.backward_rows.len(), 5);
        // dense labels upward: backward tops stabilize
        let last = report.backward_rows.last().unwrap();
        assert!(last.r_origin_stable as f64 / last.samples as f64 > 0.8);
        if let Some(overlap) = report.ci_overlap {
            assert!(overlap, "gap {:?}", report.crossing_gap);
        }
    }

    #[test]
    fn slope_table_origin_direction_nonpositive() {
        let spec = ModelSpec::orthant(2, prob("0.8"));
        let table = zeta_estimate(&spec, &[0], &[1, 2, 4], &[30, 50], 10, 3).unwrap();
        for row in &table.rows {
            assert_eq!(row.total_samples, 10);
            if let Some(m) = row.mean_slope {
                assert!(m <= 0.0, "n={} slope {m}", row.n);
            }
        }
    }

    #[test]
    fn slope_table_validates_direction() {
        let spec = ModelSpec::orthant(2, prob("0.8"));
        assert!(zeta_estimate(&spec, &[0, 0], &[1, 2], &[10, 20], 2, 3).is_err());
        assert!(zeta_estimate(&spec, &[0], &[2, 1], &[10, 20], 2, 3).is_err());
        assert!(zeta_estimate(&spec, &[0], &[], &[10, 20], 2, 3).is_err());
    }
}
