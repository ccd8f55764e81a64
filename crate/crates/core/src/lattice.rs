//! Boxes of lattice sites and the indexing used by the search routines.

use crate::error::{DreError, Result};
use crate::model::Direction;

/// Hard cap on box volume for operations that allocate per site.
pub const MAX_BOX_SITES: usize = 1 << 28;

/// An axis-aligned box of sites, inclusive on both ends.
///
/// Sites are addressed by a linear index with axis 1 varying fastest, so
/// the sites of one axis-1 line occupy a contiguous index range.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticeBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<LatticeBox> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(DreError::InvalidInput(format!(
                "box bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        let mut strides = Vec::with_capacity(lo.len());
        let mut len: usize = 1;
        for (a, b) in lo.iter().zip(&hi) {
            if a > b {
                return Err(DreError::InvalidInput(format!("box range {a}..={b} is empty")));
            }
            let extent = (b - a) as u128 + 1;
            strides.push(len);
            let next = (len as u128).checked_mul(extent).unwrap_or(u128::MAX);
            if next > usize::MAX as u128 {
                return Err(DreError::Resource("box volume overflows".into()));
            }
            len = next as usize;
        }
        Ok(LatticeBox { lo, hi, strides, len })
    }

    /// Cube with the same inclusive range on every axis.
    pub fn cube(dim: usize, lo: i64, hi: i64) -> Result<LatticeBox> {
        LatticeBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty ranges
    }

    /// Inclusive range of the 1-based axis.
    pub fn axis_range(&self, axis: usize) -> (i64, i64) {
        (self.lo[axis - 1], self.hi[axis - 1])
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis - 1] - self.lo[axis - 1]) as usize + 1
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis - 1]
    }

    #[inline]
    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.lo.len()
            && site
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| a <= x && x <= b)
    }

    #[inline]
    pub fn index_of(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let mut idx = 0;
        for ((x, a), s) in site.iter().zip(&self.lo).zip(&self.strides) {
            idx += (x - a) as usize * s;
        }
        Some(idx)
    }

    /// Reconstruct coordinates from a linear index.
    #[inline]
    pub fn site_of(&self, mut idx: usize, out: &mut [i64]) {
        debug_assert!(idx < self.len);
        for axis in (0..self.lo.len()).rev() {
            let s = self.strides[axis];
            out[axis] = self.lo[axis] + (idx / s) as i64;
            idx %= s;
        }
    }

    /// True when the site sits on any face of the box.
    pub fn is_boundary(&self, site: &[i64]) -> bool {
        site.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .any(|(x, (a, b))| x == a || x == b)
    }

    pub fn check_volume(&self) -> Result<()> {
        if self.len > MAX_BOX_SITES {
            return Err(DreError::Resource(format!(
                "box has {} sites, cap is {MAX_BOX_SITES}",
                self.len
            )));
        }
        Ok(())
    }
}

/// Plain bitset over box indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> BitSet {
        BitSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// First index present in self but not in other.
    pub fn first_diff_not_in(&self, other: &BitSet) -> Option<usize> {
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let extra = a & !b;
            if extra != 0 {
                return Some(w * 64 + extra.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }
}

/// A rectangle of axis-parallel lines: one entry per site of the hyperplane
/// {x_axis = 0} with the remaining coordinates in the given inclusive
/// ranges. Transverse coordinates are listed in axis order with the line
/// axis skipped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransverseWindow {
    dim: usize,
    axis: usize,
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl TransverseWindow {
    pub fn new(dim: usize, axis: usize, lo: Vec<i64>, hi: Vec<i64>) -> Result<TransverseWindow> {
        if axis < 1 || axis > dim {
            return Err(DreError::InvalidInput(format!("axis {axis} outside dimension {dim}")));
        }
        if lo.len() != dim - 1 || hi.len() != dim - 1 {
            return Err(DreError::InvalidInput(format!(
                "window needs {} transverse ranges, got {} and {}",
                dim - 1,
                lo.len(),
                hi.len()
            )));
        }
        let mut strides = Vec::with_capacity(lo.len());
        let mut len: usize = 1;
        for (a, b) in lo.iter().zip(&hi) {
            if a > b {
                return Err(DreError::InvalidInput(format!("window range {a}..={b} is empty")));
            }
            strides.push(len);
            len = len
                .checked_mul((b - a) as usize + 1)
                .ok_or_else(|| DreError::Resource("window volume overflows".into()))?;
        }
        if len > MAX_BOX_SITES {
            return Err(DreError::Resource(format!("window has {len} lines, cap is {MAX_BOX_SITES}")));
        }
        Ok(TransverseWindow { dim, axis, lo, hi, strides, len })
    }

    /// Symmetric window [-radius, radius] on every transverse axis.
    pub fn centered(dim: usize, axis: usize, radius: i64) -> Result<TransverseWindow> {
        if radius < 0 {
            return Err(DreError::InvalidInput(format!("negative window radius {radius}")));
        }
        TransverseWindow::new(dim, axis, vec![-radius; dim - 1], vec![radius; dim - 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    /// Number of lines.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The lattice axis of the j-th transverse coordinate (1-based j).
    pub fn transverse_axis(&self, j: usize) -> usize {
        if j < self.axis {
            j
        } else {
            j + 1
        }
    }

    pub fn index_of(&self, t: &[i64]) -> Option<usize> {
        if t.len() != self.lo.len() {
            return None;
        }
        let mut idx = 0;
        for ((x, (a, b)), s) in t.iter().zip(self.lo.iter().zip(&self.hi)).zip(&self.strides) {
            if x < a || x > b {
                return None;
            }
            idx += (x - a) as usize * s;
        }
        Some(idx)
    }

    pub fn coords_of(&self, mut idx: usize, out: &mut [i64]) {
        debug_assert!(idx < self.len);
        for j in (0..self.lo.len()).rev() {
            let s = self.strides[j];
            out[j] = self.lo[j] + (idx / s) as i64;
            idx %= s;
        }
    }

    /// Full lattice site for the idx-th line at position k along the axis.
    pub fn site_at(&self, idx: usize, k: i64) -> Vec<i64> {
        let mut t = vec![0i64; self.lo.len()];
        self.coords_of(idx, &mut t);
        self.embed(&t, k)
    }

    /// Insert the axis coordinate into transverse coordinates.
    pub fn embed(&self, t: &[i64], k: i64) -> Vec<i64> {
        let mut site = Vec::with_capacity(self.dim);
        site.extend_from_slice(&t[..self.axis - 1]);
        site.push(k);
        site.extend_from_slice(&t[self.axis - 1..]);
        site
    }

    /// Drop the axis coordinate of a full site.
    pub fn transverse_of(&self, site: &[i64]) -> Vec<i64> {
        let mut t = Vec::with_capacity(self.dim - 1);
        t.extend_from_slice(&site[..self.axis - 1]);
        t.extend_from_slice(&site[self.axis..]);
        t
    }

    /// Index of the line one step along `dir`, or None when the step leaves
    /// the window. `dir` must not lie on the window axis.
    pub fn neighbor(&self, idx: usize, dir: Direction) -> Option<usize> {
        debug_assert_ne!(dir.axis(), self.axis);
        let mut t = vec![0i64; self.lo.len()];
        self.coords_of(idx, &mut t);
        let j = if dir.axis() < self.axis { dir.axis() } else { dir.axis() - 1 };
        t[j - 1] += dir.offset();
        self.index_of(&t)
    }

    /// Index of the line containing the all-zero transverse coordinates.
    pub fn origin_index(&self) -> Option<usize> {
        self.index_of(&vec![0; self.lo.len()])
    }

    /// Index of the line through the given full site.
    pub fn line_of_site(&self, site: &[i64]) -> Option<usize> {
        self.index_of(&self.transverse_of(site))
    }
}
