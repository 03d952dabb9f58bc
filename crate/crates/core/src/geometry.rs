//! Integer set algebra for array geometries: position sets, sum co-arrays,
//! intrinsic apodization, the SCOBA/SCOBAR sparse constructions and the
//! closed-form element/aperture optimizers.
//!
//! Positions are grid indices; the physical location of index `n` is `n * d`
//! where `d` is the element pitch. All operations here are pure integer math
//! and are safe to call concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Position sets
// ---------------------------------------------------------------------------

/// A set of element positions on the pitch grid, kept sorted and distinct.
///
/// An optional pitch (meters) can be attached for aperture computations; the
/// pure set operations ignore it and propagate it unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSet {
    positions: Vec<i64>,
    pitch_m: Option<f64>,
}

impl PositionSet {
    /// Build a set from arbitrary indices; duplicates are removed.
    pub fn new(mut positions: Vec<i64>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        Self { positions, pitch_m: None }
    }

    pub fn with_pitch(mut self, pitch_m: f64) -> Self {
        self.pitch_m = Some(pitch_m);
        self
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn pitch_m(&self) -> Option<f64> {
        self.pitch_m
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.positions.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.positions.last().copied()
    }

    /// Index span `max - min` (0 for a single element).
    pub fn span(&self) -> i64 {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn contains(&self, p: i64) -> bool {
        self.positions.binary_search(&p).is_ok()
    }

    pub fn is_subset_of(&self, other: &PositionSet) -> bool {
        self.positions.iter().all(|p| other.contains(*p))
    }

    pub fn is_strict_subset_of(&self, other: &PositionSet) -> bool {
        self.len() < other.len() && self.is_subset_of(other)
    }

    /// Union of two sets; the pitch of `self` wins when both carry one.
    pub fn union(&self, other: &PositionSet) -> PositionSet {
        let mut v = self.positions.clone();
        v.extend_from_slice(&other.positions);
        let mut out = PositionSet::new(v);
        out.pitch_m = self.pitch_m.or(other.pitch_m);
        out
    }
}

/// The full uniform linear array of `2N-1` elements, `{-(N-1), ..., N-1}`.
pub fn make_ula(n: u32) -> Result<PositionSet> {
    if n == 0 {
        return Err(Error::invalid("make_ula: N must be >= 1"));
    }
    let n = i64::from(n);
    Ok(PositionSet::new(((-(n - 1))..n).collect()))
}

// ---------------------------------------------------------------------------
// Apodization vectors
// ---------------------------------------------------------------------------

/// A weight vector indexed by grid position: entry `k` applies to position
/// `offset + k`. Dense over its span; positions outside read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ApodizationVector {
    offset: i64,
    values: Vec<f64>,
}

impl ApodizationVector {
    pub fn new(offset: i64, values: Vec<f64>) -> Self {
        Self { offset, values }
    }

    pub fn offset(&self) -> i64 {
        self.offset
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

    /// Weight at an absolute grid position (zero outside the stored span).
    pub fn at(&self, position: i64) -> f64 {
        let k = position - self.offset;
        if k < 0 || k as usize >= self.values.len() {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    /// Iterate `(position, value)` pairs over the stored span.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, v)| (self.offset + k as i64, *v))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Unity weight on every member of `set`, zero on the holes in between.
    pub fn unity_on(set: &PositionSet) -> Self {
        let lo = set.min().unwrap_or(0);
        let mut values = vec![0.0; set.span() as usize + 1];
        for &p in set.positions() {
            values[(p - lo) as usize] = 1.0;
        }
        Self { offset: lo, values }
    }
}

/// Intrinsic apodization: the discrete self-convolution of the indicator
/// vector of `set`. Entry at co-array position `n` counts the ordered pairs
/// `(i, j)` in the set with `i + j = n`.
pub fn intrinsic_apodization(set: &PositionSet) -> Result<ApodizationVector> {
    if set.is_empty() {
        return Err(Error::invalid("intrinsic_apodization: empty position set"));
    }
    let lo = set.min().unwrap();
    let len = set.span() as usize + 1;
    let mut indicator = vec![0.0f64; len];
    for &p in set.positions() {
        indicator[(p - lo) as usize] = 1.0;
    }
    // Self-convolution of the indicator, dense over [2*lo, 2*hi].
    let mut conv = vec![0.0f64; 2 * len - 1];
    for (i, a) in indicator.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (j, b) in indicator.iter().enumerate() {
            conv[i + j] += a * b;
        }
    }
    Ok(ApodizationVector::new(2 * lo, conv))
}

// ---------------------------------------------------------------------------
// Sum co-arrays
// ---------------------------------------------------------------------------

/// The sum co-array of a position set: the distinct pairwise sums together
/// with the multiplicity (ordered-pair count) of each sum position.
#[derive(Debug, Clone, PartialEq)]
pub struct SumCoArray {
    pub sumset: PositionSet,
    pub multiplicity: ApodizationVector,
}

/// Compute the sum co-array by direct enumeration of all `|J|^2` ordered
/// pairs (self-pairs included).
pub fn sumset(set: &PositionSet) -> Result<SumCoArray> {
    if set.is_empty() {
        return Err(Error::invalid("sumset: empty position set"));
    }
    let lo = 2 * set.min().unwrap();
    let hi = 2 * set.max().unwrap();
    let mut counts = vec![0u64; (hi - lo) as usize + 1];
    for &i in set.positions() {
        for &j in set.positions() {
            counts[(i + j - lo) as usize] += 1;
        }
    }
    let positions: Vec<i64> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(k, _)| lo + k as i64)
        .collect();
    let mut sums = PositionSet::new(positions);
    sums.pitch_m = set.pitch_m;
    let multiplicity = ApodizationVector::new(lo, counts.into_iter().map(|c| c as f64).collect());
    Ok(SumCoArray { sumset: sums, multiplicity })
}

/// `J` is a sparse array with respect to `I` when it is a strict subset of
/// `I` whose sum co-array still covers all of `I`.
pub fn is_sparse_array(thinned: &PositionSet, full: &PositionSet) -> bool {
    if thinned.is_empty() || full.is_empty() {
        return false;
    }
    if !thinned.is_strict_subset_of(full) {
        return false;
    }
    match sumset(thinned) {
        Ok(co) => full.is_subset_of(&co.sumset),
        Err(_) => false,
    }
}

// ---------------------------------------------------------------------------
// Sparse designs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignVariant {
    Scoba,
    Scobar,
}

impl std::fmt::Display for DesignVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DesignVariant::Scoba => write!(f, "scoba"),
            DesignVariant::Scobar => write!(f, "scobar"),
        }
    }
}

/// A sparse receive-array design for a reference full array of `2N-1`
/// elements, parameterized by the factorization `N = A * B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    pub variant: DesignVariant,
    pub n: u32,
    pub a: u32,
    pub b: u32,
    pub elements: PositionSet,
    pub element_count: usize,
    pub sumset: SumCoArray,
}

fn check_factorization(n: u32, a: u32, b: u32) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::invalid("design parameters A and B must be >= 1"));
    }
    if u64::from(a) * u64::from(b) != u64::from(n) {
        return Err(Error::invalid(format!(
            "design requires A*B = N, got {a}*{b} != {n}"
        )));
    }
    Ok(())
}

fn scoba_positions(a: u32, b: u32) -> PositionSet {
    let (a, b) = (i64::from(a), i64::from(b));
    let inner: Vec<i64> = ((-(a - 1))..a).collect();
    let outer: Vec<i64> = ((-(b - 1))..b).map(|k| k * a).collect();
    PositionSet::new(inner).union(&PositionSet::new(outer))
}

fn scobar_positions(n: u32, a: u32, b: u32) -> PositionSet {
    let (ni, ai) = (i64::from(n), i64::from(a));
    let edges: Vec<i64> = ((ni - ai)..ni).flat_map(|p| [p, -p]).collect();
    scoba_positions(a, b).union(&PositionSet::new(edges))
}

/// SCOBA geometry `U`: a dense block of `2A-1` central elements plus `2B-1`
/// elements at multiples of `A`. Uses `2A+2B-3` elements and its sum
/// co-array covers the full `2N-1` array.
pub fn build_scoba(n: u32, a: u32, b: u32) -> Result<SparseDesign> {
    check_factorization(n, a, b)?;
    let elements = scoba_positions(a, b);
    let co = sumset(&elements)?;
    debug_assert_eq!(elements.len(), (2 * (a + b)) as usize - 3);
    Ok(SparseDesign {
        variant: DesignVariant::Scoba,
        n,
        a,
        b,
        element_count: elements.len(),
        sumset: co,
        elements,
    })
}

/// SCOBAR geometry `V`: the SCOBA set plus two edge blocks of `A` elements
/// at `|n| = N-A ... N-1`. Uses `4A+2B-5` elements (for `B > 1`) and its sum
/// co-array equals that of the full array.
pub fn build_scobar(n: u32, a: u32, b: u32) -> Result<SparseDesign> {
    check_factorization(n, a, b)?;
    if b <= 1 {
        return Err(Error::invalid(
            "build_scobar: B must be > 1 (B = 1 degenerates to the full array)",
        ));
    }
    let elements = scobar_positions(n, a, b);
    let co = sumset(&elements)?;
    debug_assert_eq!(elements.len(), (4 * a + 2 * b) as usize - 5);
    Ok(SparseDesign {
        variant: DesignVariant::Scobar,
        n,
        a,
        b,
        element_count: elements.len(),
        sumset: co,
        elements,
    })
}

impl SparseDesign {
    pub fn build(variant: DesignVariant, n: u32, a: u32, b: u32) -> Result<Self> {
        match variant {
            DesignVariant::Scoba => build_scoba(n, a, b),
            DesignVariant::Scobar => build_scobar(n, a, b),
        }
    }

    /// Serializable document form (the `design` subcommand's JSON output).
    pub fn to_document(&self) -> DesignDocument {
        DesignDocument {
            variant: self.variant,
            n: self.n,
            a: self.a,
            b: self.b,
            positions: self.elements.positions().to_vec(),
            element_count: self.element_count,
            sumset: self.sumset.sumset.positions().to_vec(),
            intrinsic: self
                .sumset
                .multiplicity
                .values()
                .iter()
                .map(|v| *v as i64)
                .collect(),
            offset: self.sumset.multiplicity.offset(),
        }
    }
}

/// JSON document describing a sparse design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignDocument {
    pub variant: DesignVariant,
    pub n: u32,
    pub a: u32,
    pub b: u32,
    pub positions: Vec<i64>,
    pub element_count: usize,
    pub sumset: Vec<i64>,
    pub intrinsic: Vec<i64>,
    pub offset: i64,
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

/// Result of a design optimization: every optimal `(A, B)` pair with the
/// canonical choice first, the achieved objective value, and whether the
/// outcome is the degenerate fully-populated array (prime `N`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignOptimum {
    pub pairs: Vec<(u32, u32)>,
    pub objective: u64,
    pub degenerate: bool,
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

fn is_prime(n: u64) -> bool {
    n >= 2 && divisors(n).len() == 2
}

fn scoba_count(a: u32, b: u32) -> u64 {
    2 * (u64::from(a) + u64::from(b)) - 3
}

fn scobar_count(a: u32, b: u32) -> u64 {
    4 * u64::from(a) + 2 * u64::from(b) - 5
}

/// Minimal-element SCOBA parameters: over all factorizations `A*B = N`, the
/// element count `2(A+B)-3` is minimized by the divisor pair straddling
/// `sqrt(N)`. Returns both orders when they differ, the `A <= B` pair first.
/// For prime `N` the only factorizations are `(1, N)` and `(N, 1)`, which
/// populate the full array; these are returned flagged as degenerate.
pub fn optimize_scoba(n: u32) -> Result<DesignOptimum> {
    if n < 2 {
        return Err(Error::invalid("optimize_scoba: N must be >= 2"));
    }
    let nn = u64::from(n);
    if is_prime(nn) {
        return Ok(DesignOptimum {
            pairs: vec![(1, n), (n, 1)],
            objective: scoba_count(1, n),
            degenerate: true,
        });
    }
    let divs = divisors(nn);
    // Largest divisor <= sqrt(N) and its cofactor (smallest >= sqrt(N)).
    let a = *divs.iter().filter(|d| **d * **d <= nn).max().unwrap() as u32;
    let b = (nn / u64::from(a)) as u32;
    let pairs = if a == b { vec![(a, b)] } else { vec![(a, b), (b, a)] };
    Ok(DesignOptimum { pairs, objective: scoba_count(a, b), degenerate: false })
}

/// Minimal-element SCOBAR parameters: minimizes `2(2A+B)-5` over `A*B = N`
/// with `B > 1`. Writing `M = 2A`, this is the divisor-pair problem for
/// `M*B = 2N` restricted to even `M`; of the pair straddling `sqrt(2N)`, at
/// least one orientation has even `M` (their product is even), giving one or
/// two closed-form optima. Ties are ordered by `(|2A-B|, |A-B|, A)`: the
/// first key is the documented criterion, the second discriminates the
/// two-optima case where the first is always a tie.
pub fn optimize_scobar(n: u32) -> Result<DesignOptimum> {
    if n < 2 {
        return Err(Error::invalid("optimize_scobar: N must be >= 2"));
    }
    let nn = u64::from(n);
    if is_prime(nn) {
        return Ok(DesignOptimum {
            pairs: vec![(1, n)],
            objective: scobar_count(1, n),
            degenerate: true,
        });
    }
    let two_n = 2 * nn;
    let divs = divisors(two_n);
    let m_lo = *divs.iter().filter(|d| **d * **d <= two_n).max().unwrap();
    let m_hi = two_n / m_lo;

    let mut pairs: Vec<(u32, u32)> = Vec::new();
    if m_lo == m_hi {
        // 2N is a perfect square; sqrt(2N) is even whenever N is an integer
        // factor of it squared (N odd would make 2N = 2 mod 4, not a square).
        pairs.push(((m_lo / 2) as u32, m_hi as u32));
    } else {
        if m_lo % 2 == 0 {
            pairs.push(((m_lo / 2) as u32, m_hi as u32));
        }
        if m_hi % 2 == 0 {
            pairs.push(((m_hi / 2) as u32, m_lo as u32));
        }
    }
    // B > 1 always holds here: both candidates' B values are divisors of 2N
    // no smaller than 2 for N >= 2.
    debug_assert!(pairs.iter().all(|(_, b)| *b > 1));
    let objective = scobar_count(pairs[0].0, pairs[0].1);
    debug_assert!(pairs.iter().all(|(a, b)| scobar_count(*a, *b) == objective));
    pairs.sort_by_key(|(a, b)| {
        let (a, b) = (i64::from(*a), i64::from(*b));
        ((2 * a - b).abs(), (a - b).abs(), a)
    });
    Ok(DesignOptimum { pairs, objective, degenerate: false })
}

/// SCOBA parameters minimizing the physical aperture `2A(B-1)d`: take the
/// largest non-trivial divisor of `N` as `A`. Requires a composite `N`.
pub fn minimize_aperture(n: u32) -> Result<(u32, u32)> {
    if n < 4 || is_prime(u64::from(n)) {
        return Err(Error::NoNontrivialDivisor(u64::from(n)));
    }
    let nn = u64::from(n);
    let a = *divisors(nn).iter().filter(|d| **d > 1 && **d < nn).max().unwrap();
    Ok((a as u32, (nn / a) as u32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignObjective {
    ElementCount,
    Aperture,
}

/// Exhaustive search over all factor pairs of `N`, measuring the objective
/// on the constructed element set rather than the closed forms. Test oracle
/// for the optimizers above.
pub fn brute_force_design_optimum(
    n: u32,
    variant: DesignVariant,
    objective: DesignObjective,
) -> Result<(u32, u32, u64)> {
    if n < 2 {
        return Err(Error::invalid("brute_force_design_optimum: N must be >= 2"));
    }
    let nn = u64::from(n);
    let mut best: Option<(u32, u32, u64)> = None;
    for a in divisors(nn) {
        let b = nn / a;
        let (a, b) = (a as u32, b as u32);
        let needs_b_gt_1 =
            variant == DesignVariant::Scobar || objective == DesignObjective::Aperture;
        if needs_b_gt_1 && b <= 1 {
            continue;
        }
        let elements = match variant {
            DesignVariant::Scoba => scoba_positions(a, b),
            DesignVariant::Scobar => scobar_positions(n, a, b),
        };
        let value = match objective {
            DesignObjective::ElementCount => elements.len() as u64,
            DesignObjective::Aperture => elements.span() as u64,
        };
        if best.is_none_or(|(_, _, v)| value < v) {
            best = Some((a, b, value));
        }
    }
    best.ok_or(Error::NoNontrivialDivisor(nn))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ula_construction() {
        assert_eq!(make_ula(1).unwrap().positions(), &[0]);
        assert_eq!(make_ula(3).unwrap().positions(), &[-2, -1, 0, 1, 2]);
        let u9 = make_ula(9).unwrap();
        assert_eq!(u9.len(), 17);
        assert_eq!((u9.min().unwrap(), u9.max().unwrap()), (-8, 8));
        assert!(make_ula(0).is_err());
    }

    #[test]
    fn sumset_singleton_and_triangle() {
        let s = sumset(&PositionSet::new(vec![0])).unwrap();
        assert_eq!(s.sumset.positions(), &[0]);
        assert_eq!(s.multiplicity.at(0), 1.0);

        let s = sumset(&PositionSet::new(vec![-1, 0, 1])).unwrap();
        assert_eq!(s.sumset.positions(), &[-2, -1, 0, 1, 2]);
        assert_eq!(s.multiplicity.values(), &[1.0, 2.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn sumset_of_scoba_9_3_3() {
        let u = build_scoba(9, 3, 3).unwrap();
        assert_eq!(u.elements.positions(), &[-6, -3, -2, -1, 0, 1, 2, 3, 6]);
        let mut expected: Vec<i64> = vec![-12, -9];
        expected.extend(-8..=8);
        expected.extend([9, 12]);
        assert_eq!(u.sumset.sumset.positions(), expected.as_slice());
    }

    #[test]
    fn intrinsic_matches_multiplicity_and_triangle_law() {
        for set in [
            PositionSet::new(vec![-1, 0, 1]),
            PositionSet::new(vec![0, 2]),
            make_ula(7).unwrap(),
            build_scoba(12, 3, 4).unwrap().elements,
        ] {
            let a = intrinsic_apodization(&set).unwrap();
            let s = sumset(&set).unwrap();
            assert_eq!(a, s.multiplicity);
            let total: f64 = a.sum();
            assert_eq!(total, (set.len() * set.len()) as f64);
        }
        // Full 2N-1 ULA: value (2N-1)-|n| at co-array index n.
        let n = 9i64;
        let a = intrinsic_apodization(&make_ula(n as u32).unwrap()).unwrap();
        for p in -2 * (n - 1)..=2 * (n - 1) {
            assert_eq!(a.at(p), ((2 * n - 1) - p.abs()) as f64);
        }
        // Holes count as zero.
        let a = intrinsic_apodization(&PositionSet::new(vec![0, 2])).unwrap();
        assert_eq!(a.offset(), 0);
        assert_eq!(a.values(), &[1.0, 0.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn sparse_array_definition() {
        let i = make_ula(9).unwrap();
        assert!(!is_sparse_array(&i, &i));
        let u = build_scoba(9, 3, 3).unwrap();
        assert!(is_sparse_array(&u.elements, &i));
        assert!(!is_sparse_array(
            &PositionSet::new(vec![0]),
            &PositionSet::new(vec![-1, 0, 1])
        ));
    }

    #[test]
    fn scoba_element_counts() {
        assert_eq!(build_scoba(4, 2, 2).unwrap().elements.positions(), &[-2, -1, 0, 1, 2]);
        assert_eq!(build_scoba(64, 8, 8).unwrap().element_count, 29);
        assert!(build_scoba(64, 4, 8).is_err());
    }

    #[test]
    fn scobar_geometry() {
        let v = build_scobar(9, 3, 3).unwrap();
        assert_eq!(v.element_count, 13);
        assert_eq!(
            v.elements.positions(),
            &[-8, -7, -6, -3, -2, -1, 0, 1, 2, 3, 6, 7, 8]
        );
        // S_V = S_I = {-2(N-1), ..., 2(N-1)}
        let full_co: Vec<i64> = (-16..=16).collect();
        assert_eq!(v.sumset.sumset.positions(), full_co.as_slice());
        assert_eq!(build_scobar(64, 8, 8).unwrap().element_count, 43);
        assert!(build_scobar(9, 9, 1).is_err());
    }

    #[test]
    fn scoba_coarray_covers_full_array() {
        for (n, a, b) in [(9u32, 3u32, 3u32), (12, 3, 4), (12, 6, 2), (64, 8, 8), (33, 3, 11)] {
            let d = build_scoba(n, a, b).unwrap();
            assert!(make_ula(n).unwrap().is_subset_of(&d.sumset.sumset), "N={n} A={a} B={b}");
        }
    }

    #[test]
    fn optimizer_scoba_cases() {
        let o = optimize_scoba(16).unwrap();
        assert_eq!(o.pairs, vec![(4, 4)]);
        assert!(!o.degenerate);

        let o = optimize_scoba(12).unwrap();
        assert_eq!(o.pairs, vec![(3, 4), (4, 3)]);
        assert_eq!(o.objective, 11);

        let o = optimize_scoba(7).unwrap();
        assert!(o.degenerate);
        assert_eq!(o.pairs[0], (1, 7));
        assert_eq!(o.objective, 13); // 2N-1: fully populated

        assert!(optimize_scoba(1).is_err());
    }

    #[test]
    fn optimizer_scobar_cases() {
        let o = optimize_scobar(8).unwrap();
        assert_eq!(o.pairs, vec![(2, 4)]);
        assert_eq!(o.objective, 11);

        let o = optimize_scobar(64).unwrap();
        assert_eq!(o.objective, 43);
        assert_eq!(o.pairs, vec![(8, 8), (4, 16)]);

        let o = optimize_scobar(6).unwrap();
        assert_eq!(o.pairs, vec![(2, 3)]);
        assert_eq!(o.objective, 9);

        let o = optimize_scobar(7).unwrap();
        assert!(o.degenerate);
        assert_eq!(o.pairs, vec![(1, 7)]);
    }

    #[test]
    fn aperture_optimizer() {
        assert_eq!(minimize_aperture(12).unwrap(), (6, 2));
        assert_eq!(minimize_aperture(9).unwrap(), (3, 3));
        assert_eq!(minimize_aperture(10).unwrap(), (5, 2));
        assert!(matches!(minimize_aperture(7), Err(Error::NoNontrivialDivisor(7))));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_design_optimum(16, DesignVariant::Scoba, DesignObjective::ElementCount)
                .unwrap(),
            (4, 4, 13)
        );
        assert_eq!(
            brute_force_design_optimum(8, DesignVariant::Scobar, DesignObjective::ElementCount)
                .unwrap(),
            (2, 4, 11)
        );
        // N=12 aperture: span 2*6*(2-1) = 12 vs full-array span 22.
        assert_eq!(
            brute_force_design_optimum(12, DesignVariant::Scoba, DesignObjective::Aperture)
                .unwrap(),
            (6, 2, 12)
        );
    }

    #[test]
    fn design_document_roundtrip() {
        let doc = build_scoba(9, 3, 3).unwrap().to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: DesignDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.positions, doc.positions);
        assert_eq!(back.element_count, 9);
        assert_eq!(back.offset, -12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Sum of the intrinsic apodization is |J|^2; symmetric sets give
            // symmetric apodization.
            #[test]
            fn intrinsic_mass_and_symmetry(mut pos in proptest::collection::vec(-40i64..=40, 1..24)) {
                pos.extend(pos.clone().iter().map(|p| -p)); // force symmetry
                let set = PositionSet::new(pos);
                let a = intrinsic_apodization(&set).unwrap();
                prop_assert_eq!(a.sum(), (set.len() * set.len()) as f64);
                let v = a.values();
                for k in 0..v.len() {
                    prop_assert_eq!(v[k], v[v.len() - 1 - k]);
                }
            }

            // Polynomial-product coefficients equal the discrete linear
            // convolution of the coefficient sequences.
            #[test]
            fn polynomial_product_is_convolution(
                a in proptest::collection::vec(-9i64..=9, 1..12),
                b in proptest::collection::vec(-9i64..=9, 1..12),
            ) {
                let conv = {
                    let mut c = vec![0i64; a.len() + b.len() - 1];
                    for (i, x) in a.iter().enumerate() {
                        for (j, y) in b.iter().enumerate() {
                            c[i + j] += x * y;
                        }
                    }
                    c
                };
                // Independent route: evaluate both polynomials at several
                // integer points and compare against the product polynomial
                // defined by `conv` (a degree-(L-1) polynomial is pinned by
                // L evaluations).
                let eval = |coef: &[i64], x: i128| -> i128 {
                    coef.iter().rev().fold(0i128, |acc, c| acc * x + i128::from(*c))
                };
                for x in -(conv.len() as i128)..=(conv.len() as i128) {
                    prop_assert_eq!(eval(&a, x) * eval(&b, x), eval(&conv, x));
                }
            }

            // SCOBA co-array always covers the full array it thins.
            #[test]
            fn scoba_coarray_coverage(a in 1u32..=12, b in 1u32..=12) {
                let n = a * b;
                let d = build_scoba(n, a, b).unwrap();
                prop_assert!(make_ula(n).unwrap().is_subset_of(&d.sumset.sumset));
                prop_assert_eq!(d.element_count as u64, 2 * (u64::from(a) + u64::from(b)) - 3);
            }

            // SCOBAR co-array equals the full array's co-array.
            #[test]
            fn scobar_coarray_equality(a in 1u32..=10, b in 2u32..=10) {
                let n = a * b;
                let d = build_scobar(n, a, b).unwrap();
                let full: Vec<i64> = (-2 * (i64::from(n) - 1)..=2 * (i64::from(n) - 1)).collect();
                prop_assert_eq!(d.sumset.sumset.positions(), full.as_slice());
                prop_assert_eq!(d.element_count as u64, 4 * u64::from(a) + 2 * u64::from(b) - 5);
            }
        }
    }
}
