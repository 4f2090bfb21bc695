//! Finite Abelian metric groups and dense subsets.
//!
//! A group is a product of cyclic factors. Two invariant metrics are
//! supported: the ℓ∞ product of per-coordinate circle distances
//! (`cyclic-quotient`), and the first-difference ultrametric on products
//! of ℤ₂ (`dyadic-ultrametric`). Norms are exact integers in both cases:
//! grid units for the quotient metric, and 2^(dim−k) for a dyadic element
//! whose first nonzero coordinate is k, so that larger integers always
//! mean larger norms and no comparison ever touches floating point.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default refusal threshold for |G|.
pub const DEFAULT_ELEMENT_LIMIT: usize = 1 << 30;

/// Which invariant metric a group carries.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    /// ℓ∞ of per-coordinate circle distances min(c, m−c).
    #[serde(rename = "cyclic")]
    CyclicQuotient,
    /// ‖x‖ = 2^(−k) with k the first nonzero coordinate; requires every
    /// modulus to be 2. Stored scaled by 2^dim so values stay integral.
    #[serde(rename = "dyadic")]
    DyadicUltrametric,
}

/// Shape of a group: cyclic factor orders plus the metric choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub moduli: Vec<u64>,
    pub metric: MetricKind,
}

impl GroupSpec {
    pub fn cyclic(moduli: Vec<u64>) -> Self {
        GroupSpec { moduli, metric: MetricKind::CyclicQuotient }
    }

    pub fn dyadic(dim: usize) -> Self {
        GroupSpec { moduli: vec![2; dim], metric: MetricKind::DyadicUltrametric }
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.metric {
            MetricKind::CyclicQuotient => {
                write!(f, "Z:")?;
                for (i, m) in self.moduli.iter().enumerate() {
                    if i > 0 {
                        write!(f, "x")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
            MetricKind::DyadicUltrametric => write!(f, "Z2^{}", self.moduli.len()),
        }
    }
}

/// A group element, stored as residues `coords[i] ∈ [0, moduli[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem {
    pub coords: Vec<u64>,
}

impl Elem {
    pub fn new(coords: Vec<u64>) -> Self {
        Elem { coords }
    }
}

impl std::fmt::Display for Elem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Exact norm magnitude. Grid units on cyclic-quotient groups; on dyadic
/// cubes the value is ‖x‖·2^dim, i.e. 2^(dim−k) for first nonzero
/// coordinate k and 0 for the identity. Ordering always agrees with the
/// metric, so balls and spacing tests compare plain integers.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Norm(pub u64);

/// A finite Abelian metric group with a fixed element enumeration.
///
/// Elements are numbered in row-major mixed-radix order (last coordinate
/// fastest); the index ↔ coords bijection is shared by every module and
/// all set files.
#[derive(Clone, Debug)]
pub struct Group {
    spec: GroupSpec,
    strides: Vec<usize>,
    size: usize,
    all_two: bool,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Group {}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.spec.fmt(f)
    }
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        Self::with_element_limit(spec, DEFAULT_ELEMENT_LIMIT)
    }

    /// Build a group with an explicit size guard instead of the default.
    pub fn with_element_limit(spec: GroupSpec, limit: usize) -> Result<Self> {
        if spec.moduli.is_empty() {
            return Err(Error::Input("group needs at least one cyclic factor".into()));
        }
        if let Some(&m) = spec.moduli.iter().find(|&&m| m < 2) {
            return Err(Error::Input(format!("modulus {m} < 2")));
        }
        if spec.metric == MetricKind::DyadicUltrametric && spec.moduli.iter().any(|&m| m != 2) {
            return Err(Error::Input("dyadic-ultrametric requires every modulus = 2".into()));
        }
        let mut size: usize = 1;
        for &m in &spec.moduli {
            size = size
                .checked_mul(m as usize)
                .filter(|&s| s <= limit)
                .ok_or_else(|| {
                    Error::SizeGuard(format!("|G| exceeds element limit {limit}"))
                })?;
        }
        let dim = spec.moduli.len();
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * spec.moduli[i + 1] as usize;
        }
        let all_two = spec.moduli.iter().all(|&m| m == 2);
        Ok(Group { spec, strides, size, all_two })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn metric(&self) -> MetricKind {
        self.spec.metric
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.spec.moduli.len()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.spec.moduli
    }

    /// Index stride of one step along `axis` in the canonical enumeration.
    pub(crate) fn strides_for_axis(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn identity(&self) -> Elem {
        Elem::new(vec![0; self.dim()])
    }

    /// Validates residues and wraps them into an element of this group.
    pub fn elem(&self, coords: Vec<u64>) -> Result<Elem> {
        self.check_elem_raw(&coords)?;
        Ok(Elem::new(coords))
    }

    fn check_elem_raw(&self, coords: &[u64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::Input(format!(
                "element has {} coordinates, group {} needs {}",
                coords.len(),
                self,
                self.dim()
            )));
        }
        for (c, &m) in coords.iter().zip(&self.spec.moduli) {
            if *c >= m {
                return Err(Error::Input(format!("coordinate {c} out of range for modulus {m}")));
            }
        }
        Ok(())
    }

    fn check_elem(&self, e: &Elem) -> Result<()> {
        self.check_elem_raw(&e.coords)
    }

    pub fn index_of(&self, e: &Elem) -> usize {
        debug_assert!(self.check_elem(e).is_ok());
        e.coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn elem_at(&self, mut index: usize) -> Elem {
        debug_assert!(index < self.size);
        let mut coords = vec![0u64; self.dim()];
        for (c, &s) in coords.iter_mut().zip(&self.strides) {
            *c = (index / s) as u64;
            index %= s;
        }
        Elem::new(coords)
    }

    /// Componentwise modular sum; errors on elements that do not belong
    /// to this group.
    pub fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.check_elem(a)?;
        self.check_elem(b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.spec.moduli)
            .map(|((&x, &y), &m)| (x + y) % m)
            .collect();
        Ok(Elem::new(coords))
    }

    pub fn neg(&self, a: &Elem) -> Result<Elem> {
        self.check_elem(a)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.spec.moduli)
            .map(|(&x, &m)| (m - x) % m)
            .collect();
        Ok(Elem::new(coords))
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub fn add_index(&self, i: usize, j: usize) -> usize {
        if self.all_two {
            return i ^ j;
        }
        if self.dim() == 1 {
            let m = self.spec.moduli[0] as usize;
            return (i + j) % m;
        }
        let mut out = 0usize;
        let (mut i, mut j) = (i, j);
        for (&m, &s) in self.spec.moduli.iter().zip(&self.strides) {
            let m = m as usize;
            let ci = i / s;
            let cj = j / s;
            i %= s;
            j %= s;
            out += (ci + cj) % m * s;
        }
        out
    }

    pub fn neg_index(&self, i: usize) -> usize {
        if self.all_two {
            return i;
        }
        if self.dim() == 1 {
            let m = self.spec.moduli[0] as usize;
            return (m - i) % m;
        }
        let mut out = 0usize;
        let mut i = i;
        for (&m, &s) in self.spec.moduli.iter().zip(&self.strides) {
            let m = m as usize;
            let c = i / s;
            i %= s;
            out += (m - c) % m * s;
        }
        out
    }

    pub fn sub_index(&self, i: usize, j: usize) -> usize {
        if self.all_two {
            return i ^ j;
        }
        if self.dim() == 1 {
            let m = self.spec.moduli[0] as usize;
            return (i + m - j) % m;
        }
        self.add_index(i, self.neg_index(j))
    }

    pub fn norm(&self, e: &Elem) -> Norm {
        debug_assert!(self.check_elem(e).is_ok());
        match self.spec.metric {
            MetricKind::CyclicQuotient => Norm(
                e.coords
                    .iter()
                    .zip(&self.spec.moduli)
                    .map(|(&c, &m)| c.min(m - c))
                    .max()
                    .unwrap_or(0),
            ),
            MetricKind::DyadicUltrametric => self.norm_index(self.index_of(e)),
        }
    }

    pub fn norm_index(&self, i: usize) -> Norm {
        debug_assert!(i < self.size);
        match self.spec.metric {
            MetricKind::CyclicQuotient => {
                if self.dim() == 1 {
                    let m = self.spec.moduli[0];
                    let c = i as u64;
                    return Norm(c.min(m - c));
                }
                let mut i = i;
                let mut best = 0u64;
                for (&m, &s) in self.spec.moduli.iter().zip(&self.strides) {
                    let c = (i / s) as u64;
                    i %= s;
                    best = best.max(c.min(m - c));
                }
                Norm(best)
            }
            // Row-major order puts coordinate 0 on the top bit, so the
            // first nonzero coordinate is the leading set bit.
            MetricKind::DyadicUltrametric => {
                if i == 0 {
                    Norm(0)
                } else {
                    Norm(1u64 << (usize::BITS - 1 - i.leading_zeros() + 1))
                }
            }
        }
    }

    pub fn dist_index(&self, i: usize, j: usize) -> Norm {
        self.norm_index(self.sub_index(i, j))
    }

    /// Largest attainable norm.
    pub fn diameter(&self) -> Norm {
        match self.spec.metric {
            MetricKind::CyclicQuotient => {
                Norm(self.spec.moduli.iter().map(|&m| m / 2).max().unwrap_or(0))
            }
            MetricKind::DyadicUltrametric => Norm(1u64 << self.dim()),
        }
    }

    /// Dyadic level k of a norm value (‖x‖ = 2^(−k)); `None` for the
    /// identity norm or on cyclic groups.
    pub fn dyadic_level(&self, n: Norm) -> Option<u32> {
        match self.spec.metric {
            MetricKind::CyclicQuotient => None,
            MetricKind::DyadicUltrametric => {
                if n.0 == 0 {
                    None
                } else {
                    Some(self.dim() as u32 - (n.0.trailing_zeros()))
                }
            }
        }
    }

    /// Open ball {g : ‖g‖ < r} around the identity.
    pub fn ball(&self, r: Norm) -> DenseSet {
        let mut out = DenseSet::empty(self.clone());
        match self.spec.metric {
            MetricKind::CyclicQuotient => {
                for i in 0..self.size {
                    if self.norm_index(i) < r {
                        out.insert_index(i);
                    }
                }
            }
            MetricKind::DyadicUltrametric => {
                for i in 0..self.dyadic_ball_count(r) {
                    out.insert_index(i);
                }
            }
        }
        out
    }

    /// Number of elements with norm < r on a dyadic cube; they occupy the
    /// contiguous index range [0, count) and form a subgroup.
    pub(crate) fn dyadic_ball_count(&self, r: Norm) -> usize {
        debug_assert_eq!(self.spec.metric, MetricKind::DyadicUltrametric);
        if r.0 == 0 {
            return 0;
        }
        let mut u = 1usize;
        while (2 * u as u64) < r.0 && u < self.size {
            u *= 2;
        }
        u
    }

    /// {g : r_lo ≤ ‖g‖ < r_hi}.
    pub fn annulus(&self, r_lo: Norm, r_hi: Norm) -> Result<DenseSet> {
        if r_lo > r_hi {
            return Err(Error::Input(format!("annulus needs r_lo ≤ r_hi, got {} > {}", r_lo.0, r_hi.0)));
        }
        let hi = self.ball(r_hi);
        let lo = self.ball(r_lo);
        Ok(hi.minus(&lo))
    }

    pub fn empty_set(&self) -> DenseSet {
        DenseSet::empty(self.clone())
    }

    pub fn full_set(&self) -> DenseSet {
        let mut s = DenseSet::empty(self.clone());
        for w in s.words.iter_mut() {
            *w = !0u64;
        }
        s.mask_tail();
        s
    }

    /// Visit the indices of the open ball of radius `r` around `center`.
    pub(crate) fn for_ball_around(&self, center: usize, r: Norm, mut f: impl FnMut(usize)) {
        if r.0 == 0 {
            return;
        }
        match self.spec.metric {
            MetricKind::CyclicQuotient => {
                let h = r.0 - 1;
                // Per-axis lists of residue·stride around the center.
                let mut axis: Vec<Vec<usize>> = Vec::with_capacity(self.dim());
                let mut idx = center;
                for (&m, &s) in self.spec.moduli.iter().zip(&self.strides) {
                    let c = (idx / s) as u64;
                    idx %= s;
                    let mut vals = Vec::new();
                    if 2 * h + 1 >= m {
                        for v in 0..m {
                            vals.push(v as usize * s);
                        }
                    } else {
                        for d in 0..=2 * h {
                            let v = (c + m - h + d) % m;
                            vals.push(v as usize * s);
                        }
                    }
                    axis.push(vals);
                }
                let mut counters = vec![0usize; axis.len()];
                loop {
                    let sum: usize = counters.iter().zip(&axis).map(|(&k, a)| a[k]).sum();
                    f(sum);
                    let mut carry = axis.len();
                    while carry > 0 {
                        counters[carry - 1] += 1;
                        if counters[carry - 1] < axis[carry - 1].len() {
                            break;
                        }
                        counters[carry - 1] = 0;
                        carry -= 1;
                    }
                    if carry == 0 {
                        return;
                    }
                }
            }
            MetricKind::DyadicUltrametric => {
                let u = self.dyadic_ball_count(r);
                let base = center & !(u - 1);
                for i in base..base + u {
                    f(i);
                }
            }
        }
    }

    /// Deterministic greedy completion of `seeds` to a maximal
    /// `spacing`-separated subset of `region`: candidates are scanned in
    /// ascending canonical index order after the seeds.
    pub fn maximal_separated(
        &self,
        region: &DenseSet,
        spacing: Norm,
        seeds: &[Elem],
    ) -> Result<DenseSet> {
        if region.group() != self {
            return Err(Error::Input("region belongs to a different group".into()));
        }
        let seed_idx: Vec<usize> = seeds
            .iter()
            .map(|e| {
                self.check_elem(e)?;
                Ok(self.index_of(e))
            })
            .collect::<Result<_>>()?;
        for &i in &seed_idx {
            if !region.contains_index(i) {
                return Err(Error::Input(format!("seed {} outside the region", self.elem_at(i))));
            }
        }
        for (k, &i) in seed_idx.iter().enumerate() {
            for &j in &seed_idx[..k] {
                if i == j || self.dist_index(i, j) < spacing {
                    return Err(Error::Input(format!(
                        "seeds {} and {} closer than the spacing",
                        self.elem_at(j),
                        self.elem_at(i)
                    )));
                }
            }
        }

        let mut chosen = DenseSet::empty(self.clone());
        let mut blocked = DenseSet::empty(self.clone());
        let take = |p: usize, chosen: &mut DenseSet, blocked: &mut DenseSet| {
            chosen.insert_index(p);
            self.for_ball_around(p, spacing, |q| blocked.insert_index(q));
        };
        for &i in &seed_idx {
            take(i, &mut chosen, &mut blocked);
        }
        for i in region.iter_indices() {
            if !blocked.contains_index(i) {
                take(i, &mut chosen, &mut blocked);
            }
        }
        Ok(chosen)
    }
}

/// A subset of a group stored as a bit per element of the canonical
/// enumeration.
#[derive(Clone)]
pub struct DenseSet {
    group: Group,
    words: Vec<u64>,
}

impl std::fmt::Debug for DenseSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DenseSet({}, |A|={})", self.group, self.cardinality())
    }
}

impl PartialEq for DenseSet {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.words == other.words
    }
}

impl Eq for DenseSet {}

impl DenseSet {
    pub fn empty(group: Group) -> Self {
        let nwords = group.size().div_ceil(64);
        DenseSet { group, words: vec![0; nwords] }
    }

    pub fn from_indices(group: Group, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(group);
        for i in indices {
            s.insert_index(i);
        }
        s
    }

    pub fn from_elems(group: Group, elems: &[Elem]) -> Result<Self> {
        let mut s = Self::empty(group);
        for e in elems {
            s.group.check_elem(e)?;
            let i = s.group.index_of(e);
            s.insert_index(i);
        }
        Ok(s)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn mask_tail(&mut self) {
        let n = self.group.size();
        if !n.is_multiple_of(64) {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (n % 64)) - 1;
        }
    }

    pub fn insert_index(&mut self, i: usize) {
        debug_assert!(i < self.group.size());
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove_index(&mut self, i: usize) {
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.contains_index(self.group.index_of(e))
    }

    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.cardinality() == self.group.size()
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
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

    pub fn elems(&self) -> Vec<Elem> {
        self.iter_indices().map(|i| self.group.elem_at(i)).collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        DenseSet { group: self.group.clone(), words }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        debug_assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        DenseSet { group: self.group.clone(), words }
    }

    pub fn minus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.group, other.group);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        DenseSet { group: self.group.clone(), words }
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        debug_assert_eq!(self.group, other.group);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// {g + a : a ∈ A}. Cardinality is preserved.
    pub fn translate(&self, g: &Elem) -> Self {
        self.translate_index(self.group.index_of(g))
    }

    pub fn translate_index(&self, g: usize) -> Self {
        let mut out = DenseSet::empty(self.group.clone());
        for i in self.iter_indices() {
            out.insert_index(self.group.add_index(g, i));
        }
        out
    }

    /// {−a : a ∈ A}.
    pub fn negate(&self) -> Self {
        let mut out = DenseSet::empty(self.group.clone());
        for i in self.iter_indices() {
            out.insert_index(self.group.neg_index(i));
        }
        out
    }

    /// Density |A|/|G| as a report value; never used in any exact check.
    pub fn density(&self) -> f64 {
        self.cardinality() as f64 / self.group.size() as f64
    }
}
