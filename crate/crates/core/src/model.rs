//! Arrow sets and model parameters.
//!
//! A model on Z^d assigns every site an arrow set drawn from k candidate
//! "E" sets (weights `r`, picked with probability `p`) or l candidate "F"
//! sets (weights `q`, picked with probability `1 - p`). Sites that drew an
//! E set form the Omega_+ region, the rest Omega_-.

use crate::error::{DreError, Result};
use crate::fixed::{Prob, UNIT};

/// Largest supported lattice dimension; arrow sets pack into a u32 mask.
pub const MAX_DIM: usize = 16;

/// One of the 2d unit arrows on Z^d. Axes are 1-based.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Direction {
    axis: u8,
    negative: bool,
}

impl Direction {
    pub fn new(axis: usize, negative: bool) -> Direction {
        assert!(axis >= 1 && axis <= MAX_DIM, "axis {axis} out of range");
        Direction { axis: axis as u8, negative }
    }

    pub fn positive(axis: usize) -> Direction {
        Direction::new(axis, false)
    }

    pub fn negative(axis: usize) -> Direction {
        Direction::new(axis, true)
    }

    pub fn axis(&self) -> usize {
        self.axis as usize
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn flipped(&self) -> Direction {
        Direction { axis: self.axis, negative: !self.negative }
    }

    /// Signed unit step along this direction.
    #[inline]
    pub fn offset(&self) -> i64 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// Apply the step in place.
    #[inline]
    pub fn advance(&self, site: &mut [i64]) {
        site[self.axis as usize - 1] += self.offset();
    }

    #[inline]
    fn bit(&self, dim: usize) -> u32 {
        let idx = (self.axis as usize - 1) + if self.negative { dim } else { 0 };
        1 << idx
    }

    /// Parse a token like "+1" or "-2".
    pub fn parse(tok: &str, dim: usize) -> Result<Direction> {
        let bad = || DreError::Parse(format!("bad direction token {tok:?}"));
        let (sign, num) = tok.split_at(1);
        let negative = match sign {
            "+" => false,
            "-" => true,
            _ => return Err(bad()),
        };
        let axis: usize = num.parse().map_err(|_| bad())?;
        if axis < 1 || axis > dim {
            return Err(DreError::Parse(format!(
                "direction {tok:?} outside dimension {dim}"
            )));
        }
        Ok(Direction::new(axis, negative))
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", if self.negative { '-' } else { '+' }, self.axis)
    }
}

/// A subset of the 2d unit arrows, packed into a bitmask.
///
/// Bit layout: bits 0..d are +1..+d, bits d..2d are -1..-d. Sets remember
/// their dimension so set algebra can reject mismatched operands.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    dim: u8,
    bits: u32,
}

impl EdgeSet {
    pub fn empty(dim: usize) -> EdgeSet {
        assert!(dim >= 1 && dim <= MAX_DIM, "dimension {dim} out of range");
        EdgeSet { dim: dim as u8, bits: 0 }
    }

    /// All 2d arrows.
    pub fn full(dim: usize) -> EdgeSet {
        let mut s = EdgeSet::empty(dim);
        s.bits = (1u32 << (2 * dim)) - 1;
        s
    }

    /// The d positive arrows {+1, ..., +d}.
    pub fn all_positive(dim: usize) -> EdgeSet {
        let mut s = EdgeSet::empty(dim);
        s.bits = (1u32 << dim) - 1;
        s
    }

    /// The d negative arrows {-1, ..., -d}.
    pub fn all_negative(dim: usize) -> EdgeSet {
        let mut s = EdgeSet::empty(dim);
        s.bits = ((1u32 << dim) - 1) << dim;
        s
    }

    pub fn from_dirs(dim: usize, dirs: &[Direction]) -> EdgeSet {
        let mut s = EdgeSet::empty(dim);
        for d in dirs {
            s.insert(*d);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn insert(&mut self, d: Direction) {
        assert!(d.axis() <= self.dim(), "direction {d} outside dimension {}", self.dim);
        self.bits |= d.bit(self.dim());
    }

    #[inline]
    pub fn contains(&self, d: Direction) -> bool {
        d.axis() <= self.dim() && self.bits & d.bit(self.dim()) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        self.check(other);
        EdgeSet { dim: self.dim, bits: self.bits | other.bits }
    }

    pub fn intersect(&self, other: &EdgeSet) -> EdgeSet {
        self.check(other);
        EdgeSet { dim: self.dim, bits: self.bits & other.bits }
    }

    pub fn minus(&self, other: &EdgeSet) -> EdgeSet {
        self.check(other);
        EdgeSet { dim: self.dim, bits: self.bits & !other.bits }
    }

    /// Complement within the full arrow set of this dimension.
    pub fn complement(&self) -> EdgeSet {
        EdgeSet::full(self.dim()).minus(self)
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.check(other);
        self.bits & !other.bits == 0
    }

    /// Arrows in canonical order: +1..+d then -1..-d.
    pub fn iter(&self) -> impl Iterator<Item = Direction> + '_ {
        let dim = self.dim();
        (0..2 * dim).filter_map(move |idx| {
            if self.bits & (1 << idx) != 0 {
                Some(Direction::new(idx % dim + 1, idx >= dim))
            } else {
                None
            }
        })
    }

    fn check(&self, other: &EdgeSet) {
        assert_eq!(self.dim, other.dim, "mixed-dimension arrow sets");
    }
}

impl std::fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, d) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

impl std::fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EdgeSet{self}")
    }
}

/// Intersections and unions of the two candidate lists.
#[derive(Copy, Clone, Debug)]
pub struct DerivedSets {
    pub e_inter: EdgeSet,
    pub e_union: EdgeSet,
    pub f_inter: EdgeSet,
    pub f_union: EdgeSet,
}

/// One named clause of a structural condition check.
#[derive(Clone, Debug)]
pub struct Clause {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

/// Every clause is evaluated, pass or fail, so diagnostics can list all
/// problems at once.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub clauses: Vec<Clause>,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.ok)
    }

    pub fn failure_summary(&self) -> String {
        self.failed()
            .map(|c| c.name)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Full parameter set of a model: candidate arrow sets, their weights, and
/// the Omega_+ probability p.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    dim: usize,
    e_sets: Vec<EdgeSet>,
    f_sets: Vec<EdgeSet>,
    r: Vec<Prob>,
    q: Vec<Prob>,
    p: Prob,
    // cumulative numerators; cum[i] = sum of weights 0..=i, last is 2^64
    r_cum: Vec<u128>,
    q_cum: Vec<u128>,
}

impl ModelSpec {
    pub fn new(
        dim: usize,
        e_sets: Vec<EdgeSet>,
        f_sets: Vec<EdgeSet>,
        r: Vec<Prob>,
        q: Vec<Prob>,
        p: Prob,
    ) -> Result<ModelSpec> {
        if dim < 2 || dim > MAX_DIM {
            return Err(DreError::InvalidModel(format!(
                "dimension {dim} outside supported range 2..={MAX_DIM}"
            )));
        }
        if e_sets.is_empty() || f_sets.is_empty() {
            return Err(DreError::InvalidModel("empty candidate set list".into()));
        }
        if e_sets.len() != r.len() {
            return Err(DreError::InvalidModel(format!(
                "{} E sets but {} r weights",
                e_sets.len(),
                r.len()
            )));
        }
        if f_sets.len() != q.len() {
            return Err(DreError::InvalidModel(format!(
                "{} F sets but {} q weights",
                f_sets.len(),
                q.len()
            )));
        }
        for s in e_sets.iter().chain(f_sets.iter()) {
            if s.dim() != dim {
                return Err(DreError::InvalidModel(format!(
                    "arrow set {s} has dimension {}, model has {dim}",
                    s.dim()
                )));
            }
        }
        let r_cum = cumulative(&r, "r")?;
        let q_cum = cumulative(&q, "q")?;
        Ok(ModelSpec { dim, e_sets, f_sets, r, q, p, r_cum, q_cum })
    }

    /// Two-valued model: one E set, one F set.
    pub fn two_valued(dim: usize, e: EdgeSet, f: EdgeSet, p: Prob) -> Result<ModelSpec> {
        ModelSpec::new(dim, vec![e], vec![f], vec![Prob::ONE], vec![Prob::ONE], p)
    }

    /// Omega_+ sites point along every positive axis, Omega_- sites along
    /// every negative axis.
    pub fn orthant(dim: usize, p: Prob) -> ModelSpec {
        ModelSpec::two_valued(dim, EdgeSet::all_positive(dim), EdgeSet::all_negative(dim), p)
            .expect("orthant parameters are always valid")
    }

    /// Omega_+ sites point along every positive axis, Omega_- sites
    /// everywhere.
    pub fn half_orthant(dim: usize, p: Prob) -> ModelSpec {
        ModelSpec::two_valued(dim, EdgeSet::all_positive(dim), EdgeSet::full(dim), p)
            .expect("half-orthant parameters are always valid")
    }

    pub fn with_p(&self, p: Prob) -> ModelSpec {
        let mut s = self.clone();
        s.p = p;
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn e_sets(&self) -> &[EdgeSet] {
        &self.e_sets
    }

    pub fn f_sets(&self) -> &[EdgeSet] {
        &self.f_sets
    }

    pub fn r(&self) -> &[Prob] {
        &self.r
    }

    pub fn q(&self) -> &[Prob] {
        &self.q
    }

    pub fn p(&self) -> Prob {
        self.p
    }

    pub fn is_two_valued(&self) -> bool {
        self.e_sets.len() == 1 && self.f_sets.len() == 1
    }

    pub fn e_inter(&self) -> EdgeSet {
        self.e_sets.iter().fold(EdgeSet::full(self.dim), |a, s| a.intersect(s))
    }

    pub fn e_union(&self) -> EdgeSet {
        self.e_sets.iter().fold(EdgeSet::empty(self.dim), |a, s| a.union(s))
    }

    pub fn f_inter(&self) -> EdgeSet {
        self.f_sets.iter().fold(EdgeSet::full(self.dim), |a, s| a.intersect(s))
    }

    pub fn f_union(&self) -> EdgeSet {
        self.f_sets.iter().fold(EdgeSet::empty(self.dim), |a, s| a.union(s))
    }

    pub fn derived_sets(&self) -> DerivedSets {
        DerivedSets {
            e_inter: self.e_inter(),
            e_union: self.e_union(),
            f_inter: self.f_inter(),
            f_union: self.f_union(),
        }
    }

    /// d >= 2; +1 lies in every E set; every E arrow is positive; the F
    /// sets jointly guarantee every arrow outside the common E core.
    pub fn check_condition1(&self) -> ConditionReport {
        let ds = self.derived_sets();
        let e1 = Direction::positive(1);
        let needed = EdgeSet::full(self.dim).minus(&ds.e_inter);
        ConditionReport {
            clauses: vec![
                Clause {
                    name: "dim_at_least_2",
                    ok: self.dim >= 2,
                    detail: format!("dimension = {}", self.dim),
                },
                Clause {
                    name: "e1_in_every_e_set",
                    ok: ds.e_inter.contains(e1),
                    detail: format!("common E core = {}", ds.e_inter),
                },
                Clause {
                    name: "e_union_all_positive",
                    ok: ds.e_union.is_subset_of(&EdgeSet::all_positive(self.dim)),
                    detail: format!("E union = {}", ds.e_union),
                },
                Clause {
                    name: "f_core_covers_rest",
                    ok: needed.is_subset_of(&ds.f_inter),
                    detail: format!("F core = {}, required = {}", ds.f_inter, needed),
                },
            ],
        }
    }

    /// The E clauses of condition 1, plus: exactly one F set and it holds
    /// all 2d arrows.
    pub fn check_condition2(&self) -> ConditionReport {
        let mut report = self.check_condition1();
        report.clauses.truncate(3); // keep the E-side clauses only
        report.clauses.push(Clause {
            name: "single_f_set",
            ok: self.f_sets.len() == 1,
            detail: format!("{} F sets", self.f_sets.len()),
        });
        report.clauses.push(Clause {
            name: "f_set_is_full",
            ok: self.f_sets.len() == 1 && self.f_sets[0] == EdgeSet::full(self.dim),
            detail: format!("F sets = {:?}", self.f_sets),
        });
        report
    }

    /// Same E side, but Omega_- sites get all 2d arrows.
    pub fn starred(&self) -> ModelSpec {
        ModelSpec::new(
            self.dim,
            self.e_sets.clone(),
            vec![EdgeSet::full(self.dim)],
            self.r.clone(),
            vec![Prob::ONE],
            self.p,
        )
        .expect("starred variant of a valid model is valid")
    }

    /// Two-valued lower bound: Omega_+ keeps only the common E core,
    /// Omega_- keeps only the arrows outside it. Requires condition 1.
    pub fn minimal_two_valued(&self) -> Result<ModelSpec> {
        let report = self.check_condition1();
        if !report.pass() {
            return Err(DreError::ConditionFailed(format!(
                "minimal two-valued form needs condition 1; failed: {}",
                report.failure_summary()
            )));
        }
        let core = self.e_inter();
        ModelSpec::two_valued(self.dim, core, core.complement(), self.p)
    }

    /// Two-valued upper bound: all positive arrows on Omega_+, everything
    /// on Omega_-.
    pub fn maximal_two_valued(&self) -> ModelSpec {
        ModelSpec::half_orthant(self.dim, self.p)
    }

    /// Index of the E set drawn by the second per-site variate.
    #[inline]
    pub(crate) fn e_index(&self, hv: u64) -> usize {
        pick(&self.r_cum, hv)
    }

    /// Index of the F set drawn by the second per-site variate.
    #[inline]
    pub(crate) fn f_index(&self, hv: u64) -> usize {
        pick(&self.q_cum, hv)
    }

    /// Deterministic one-line form used for digests and golden files.
    pub fn canonical_string(&self) -> String {
        let sets = |v: &[EdgeSet]| {
            v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        };
        let probs = |v: &[Prob]| {
            v.iter().map(|p| p.canonical()).collect::<Vec<_>>().join(",")
        };
        format!(
            "d={};E=[{}];F=[{}];r=[{}];q=[{}];p={}",
            self.dim,
            sets(&self.e_sets),
            sets(&self.f_sets),
            probs(&self.r),
            probs(&self.q),
            self.p.canonical()
        )
    }
}

fn cumulative(weights: &[Prob], label: &str) -> Result<Vec<u128>> {
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc: u128 = 0;
    for w in weights {
        acc += w.numerator();
        cum.push(acc);
    }
    if acc != UNIT {
        return Err(DreError::InvalidModel(format!(
            "{label} weights sum to {acc:#x}, want exactly 2^64"
        )));
    }
    Ok(cum)
}

#[inline]
fn pick(cum: &[u128], hv: u64) -> usize {
    let hv = hv as u128;
    for (i, &c) in cum.iter().enumerate() {
        if hv < c {
            return i;
        }
    }
    // unreachable: last cumulative is 2^64 > any u64
    cum.len() - 1
}
