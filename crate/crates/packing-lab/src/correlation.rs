//! Difference sets, translate-intersection tables and coverage checks.
//!
//! The central object is the correlation table `values[g] = |A ∩ (g+B)|`.
//! It is computed either by direct counting over element pairs or by a
//! transform (multidimensional FFT on cyclic products, Walsh–Hadamard on
//! products of ℤ₂). Transform outputs are integers recovered by rounding;
//! every transform call runs a sampled verification pass against direct
//! counting because this kernel is correctness-critical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::group::{DenseSet, Group, MetricKind, Norm};
use crate::{Error, Result};

/// Pair-product limit above which the naive method refuses to run.
pub const NAIVE_PAIR_GUARD: u64 = 1 << 32;
/// |G| limit for the FFT path (memory bound: two complex buffers).
pub const TRANSFORM_SIZE_LIMIT: usize = 1 << 24;
/// Dimension limit for the integer Walsh–Hadamard path; intermediate
/// magnitudes are bounded by |G|·|A|·|B| ≤ 2^(3·dim), which must fit i64.
pub const WHT_MAX_DIM: usize = 20;
/// Below this pair product, `Auto` prefers direct counting.
const AUTO_NAIVE_THRESHOLD: u64 = 1 << 22;
/// Sampled g's checked against direct counting after every transform.
const VERIFY_SAMPLES: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Naive,
    Transform,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "naive" => Ok(Method::Naive),
            "transform" => Ok(Method::Transform),
            other => Err(Error::Input(format!("unknown correlation method `{other}`"))),
        }
    }
}

/// Integer table `g ↦ |A ∩ (g+B)|` over the whole group.
#[derive(Clone, Debug)]
pub struct CorrTable {
    group: Group,
    values: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrSummary {
    pub min: i64,
    pub max: i64,
    pub argmin: usize,
    pub argmax: usize,
    pub sum: i64,
}

impl CorrTable {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value_at(&self, g: usize) -> i64 {
        self.values[g]
    }

    pub fn min(&self) -> i64 {
        *self.values.iter().min().expect("nonempty group")
    }

    /// `{g : values[g] > 0}`; for a table of (A,B) this is the set A − B.
    pub fn support(&self) -> DenseSet {
        let mut s = DenseSet::empty(self.group.clone());
        for (g, &v) in self.values.iter().enumerate() {
            if v > 0 {
                s.insert_index(g);
            }
        }
        s
    }

    pub fn summary(&self) -> CorrSummary {
        let (argmin, &min) =
            self.values.iter().enumerate().min_by_key(|&(i, &v)| (v, i)).expect("nonempty");
        let (argmax, &max) =
            self.values.iter().enumerate().max_by_key(|&(i, &v)| (v, -(i as i64))).expect("nonempty");
        CorrSummary { min, max, argmin, argmax, sum: self.values.iter().sum() }
    }
}

/// `values[g] = |A ∩ (g+B)|`, exactly.
pub fn cross_correlation(a: &DenseSet, b: &DenseSet, method: Method) -> Result<CorrTable> {
    if a.group() != b.group() {
        return Err(Error::Input("cross_correlation needs sets over the same group".into()));
    }
    let group = a.group().clone();
    let pairs = a.cardinality() as u64 * b.cardinality() as u64;
    let use_transform = match method {
        Method::Naive => false,
        Method::Transform => true,
        Method::Auto => pairs > AUTO_NAIVE_THRESHOLD && transform_fits(&group),
    };
    let values = if use_transform {
        transform_correlation(&group, a, b)?
    } else {
        if pairs > NAIVE_PAIR_GUARD {
            return Err(Error::SizeGuard(format!(
                "naive correlation over {pairs} element pairs exceeds the guard; use the transform method"
            )));
        }
        naive_correlation(&group, a, b)
    };
    Ok(CorrTable { group, values })
}

pub fn autocorrelation(a: &DenseSet, method: Method) -> Result<CorrTable> {
    cross_correlation(a, a, method)
}

fn transform_fits(group: &Group) -> bool {
    if group.moduli().iter().all(|&m| m == 2) {
        group.dim() <= WHT_MAX_DIM
    } else {
        group.size() <= TRANSFORM_SIZE_LIMIT
    }
}

fn naive_correlation(group: &Group, a: &DenseSet, b: &DenseSet) -> Vec<i64> {
    let mut values = vec![0i64; group.size()];
    let ai: Vec<usize> = a.iter_indices().collect();
    let bi: Vec<usize> = b.iter_indices().collect();
    // values[x − y] += 1 over all (x, y) ∈ A × B: x = g + y ⟺ g = x − y.
    if group.dim() == 1 {
        let m = group.size();
        for &x in &ai {
            for &y in &bi {
                values[(x + m - y) % m] += 1;
            }
        }
    } else if group.moduli().iter().all(|&m| m == 2) {
        for &x in &ai {
            for &y in &bi {
                values[x ^ y] += 1;
            }
        }
    } else {
        for &x in &ai {
            for &y in &bi {
                values[group.sub_index(x, y)] += 1;
            }
        }
    }
    values
}

fn transform_correlation(group: &Group, a: &DenseSet, b: &DenseSet) -> Result<Vec<i64>> {
    let values = if group.moduli().iter().all(|&m| m == 2) {
        if group.dim() > WHT_MAX_DIM {
            return Err(Error::SizeGuard(format!(
                "Walsh–Hadamard path is limited to dimension {WHT_MAX_DIM} to keep i64 arithmetic exact"
            )));
        }
        wht_correlation(group, a, b)?
    } else {
        if group.size() > TRANSFORM_SIZE_LIMIT {
            return Err(Error::SizeGuard(format!(
                "FFT path is limited to |G| ≤ {TRANSFORM_SIZE_LIMIT}"
            )));
        }
        fft_correlation(group, a, b)?
    };
    verify_table(group, a, b, &values)?;
    Ok(values)
}

/// Double-counting identity plus a sampled comparison against direct
/// counting; any mismatch is precision loss and aborts the computation.
fn verify_table(group: &Group, a: &DenseSet, b: &DenseSet, values: &[i64]) -> Result<()> {
    let total: i64 = values.iter().sum();
    let expect = a.cardinality() as i64 * b.cardinality() as i64;
    if total != expect {
        return Err(Error::Verification(format!(
            "correlation sum {total} differs from |A||B| = {expect}"
        )));
    }
    let bi: Vec<usize> = b.iter_indices().collect();
    let ai: Vec<usize> = a.iter_indices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..VERIFY_SAMPLES {
        let g = rng.gen_range(0..group.size());
        let direct = if bi.len() <= ai.len() {
            bi.iter().filter(|&&y| a.contains_index(group.add_index(g, y))).count()
        } else {
            ai.iter().filter(|&&x| b.contains_index(group.sub_index(x, g))).count()
        } as i64;
        if direct != values[g] {
            return Err(Error::Verification(format!(
                "transform value {} at g={} disagrees with direct count {}",
                values[g], g, direct
            )));
        }
    }
    Ok(())
}

fn indicator_complex(group: &Group, s: &DenseSet) -> Vec<Complex<f64>> {
    let mut v = vec![Complex::new(0.0, 0.0); group.size()];
    for i in s.iter_indices() {
        v[i] = Complex::new(1.0, 0.0);
    }
    v
}

/// In-place multidimensional DFT, one axis at a time.
fn fft_all_axes(
    data: &mut [Complex<f64>],
    group: &Group,
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    for axis in 0..group.dim() {
        let m = group.moduli()[axis] as usize;
        if m == 1 {
            continue;
        }
        let stride = group.strides_for_axis(axis);
        let outer = group.size() / (m * stride);
        let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for p in 0..outer {
            for q in 0..stride {
                let base = p * m * stride + q;
                for (c, slot) in buf.iter_mut().enumerate() {
                    *slot = data[base + c * stride];
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (c, &v) in buf.iter().enumerate() {
                    data[base + c * stride] = v;
                }
            }
        }
    }
}

fn fft_correlation(group: &Group, a: &DenseSet, b: &DenseSet) -> Result<Vec<i64>> {
    let mut planner = FftPlanner::new();
    let mut fa = indicator_complex(group, a);
    fft_all_axes(&mut fa, group, &mut planner, false);
    if a.words() == b.words() {
        for v in fa.iter_mut() {
            *v = Complex::new(v.norm_sqr(), 0.0);
        }
    } else {
        let mut fb = indicator_complex(group, b);
        fft_all_axes(&mut fb, group, &mut planner, false);
        for (va, vb) in fa.iter_mut().zip(&fb) {
            *va *= vb.conj();
        }
    }
    fft_all_axes(&mut fa, group, &mut planner, true);
    let scale = group.size() as f64;
    let mut values = Vec::with_capacity(group.size());
    for v in &fa {
        let re = v.re / scale;
        let rounded = re.round();
        if (re - rounded).abs() > 0.25 || (v.im / scale).abs() > 0.25 {
            return Err(Error::Verification(format!(
                "FFT output {re} too far from an integer; force the naive method"
            )));
        }
        values.push(rounded as i64);
    }
    Ok(values)
}

fn wht_in_place(data: &mut [i64]) {
    let n = data.len();
    let mut dist = 1;
    while dist < n {
        for block in (0..n).step_by(2 * dist) {
            for i in block..block + dist {
                let (x, y) = (data[i], data[i + dist]);
                data[i] = x + y;
                data[i + dist] = x - y;
            }
        }
        dist *= 2;
    }
}

fn wht_correlation(group: &Group, a: &DenseSet, b: &DenseSet) -> Result<Vec<i64>> {
    let n = group.size();
    let mut fa = vec![0i64; n];
    for i in a.iter_indices() {
        fa[i] = 1;
    }
    wht_in_place(&mut fa);
    if a.words() == b.words() {
        for v in fa.iter_mut() {
            *v *= *v;
        }
    } else {
        let mut fb = vec![0i64; n];
        for i in b.iter_indices() {
            fb[i] = 1;
        }
        wht_in_place(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= *y;
        }
    }
    wht_in_place(&mut fa);
    let n_i = n as i64;
    for v in fa.iter_mut() {
        if *v % n_i != 0 {
            return Err(Error::Verification(
                "Walsh–Hadamard output not divisible by |G|".into(),
            ));
        }
        *v /= n_i;
    }
    Ok(fa)
}

/// A − A = {a − a′ : a, a′ ∈ A}. Contains 0 and is closed under negation.
pub fn difference_set(a: &DenseSet) -> Result<DenseSet> {
    if a.is_empty() {
        return Err(Error::Input("difference_set of the empty set".into()));
    }
    let group = a.group().clone();
    let card = a.cardinality() as u64;
    let out = if card * card <= AUTO_NAIVE_THRESHOLD {
        let idx: Vec<usize> = a.iter_indices().collect();
        let mut out = DenseSet::empty(group.clone());
        for &x in &idx {
            for &y in &idx {
                out.insert_index(group.sub_index(x, y));
            }
        }
        out
    } else {
        autocorrelation(a, Method::Auto)?.support()
    };
    #[cfg(debug_assertions)]
    if card * card <= 1 << 25 {
        let direct = {
            let idx: Vec<usize> = a.iter_indices().collect();
            let mut d = DenseSet::empty(group.clone());
            for &x in &idx {
                for &y in &idx {
                    d.insert_index(group.sub_index(x, y));
                }
            }
            d
        };
        assert_eq!(out, direct, "difference set disagrees with autocorrelation support");
    }
    Ok(out)
}

/// A + B, as the support of a convolution when the direct product of
/// cardinalities is too large to enumerate.
pub fn sumset(a: &DenseSet, b: &DenseSet) -> Result<DenseSet> {
    if a.group() != b.group() {
        return Err(Error::Input("sumset needs sets over the same group".into()));
    }
    let group = a.group().clone();
    let pairs = a.cardinality() as u64 * b.cardinality() as u64;
    if pairs <= AUTO_NAIVE_THRESHOLD {
        let ai: Vec<usize> = a.iter_indices().collect();
        let bi: Vec<usize> = b.iter_indices().collect();
        let mut out = DenseSet::empty(group.clone());
        for &x in &ai {
            for &y in &bi {
                out.insert_index(group.add_index(x, y));
            }
        }
        Ok(out)
    } else {
        // |A ∩ (g − B)| > 0 ⟺ g ∈ A + B.
        Ok(cross_correlation(a, &b.negate(), Method::Auto)?.support())
    }
}

/// Per(A) = {g : g + A = A}. Candidates are exactly the g with full
/// autocorrelation value |A|, which is both necessary and sufficient.
pub fn period_subgroup(a: &DenseSet) -> Result<DenseSet> {
    if a.is_empty() {
        return Err(Error::Input("period_subgroup of the empty set".into()));
    }
    let table = autocorrelation(a, Method::Auto)?;
    let full = a.cardinality() as i64;
    let mut out = DenseSet::empty(a.group().clone());
    for (g, &v) in table.values().iter().enumerate() {
        if v == full {
            out.insert_index(g);
        }
    }
    Ok(out)
}

/// A + open ball(r) around the identity; r = 0 gives the empty set.
pub fn dilate(a: &DenseSet, r: Norm) -> DenseSet {
    let group = a.group().clone();
    if r.0 == 0 {
        return DenseSet::empty(group);
    }
    match group.metric() {
        MetricKind::CyclicQuotient => {
            let h = r.0 - 1;
            if h == 0 {
                return a.clone();
            }
            let mut cur = a.clone();
            for axis in 0..group.dim() {
                cur = dilate_axis(&cur, axis, h);
            }
            cur
        }
        MetricKind::DyadicUltrametric => {
            let u = group.dyadic_ball_count(r);
            let mut out = DenseSet::empty(group.clone());
            let mut base = 0;
            while base < group.size() {
                if (base..base + u).any(|i| a.contains_index(i)) {
                    for i in base..base + u {
                        out.insert_index(i);
                    }
                }
                base += u;
            }
            out
        }
    }
}

/// Circular window-OR of halfwidth `h` along one axis, via nearest
/// set-bit distances in two sweeps per direction.
fn dilate_axis(a: &DenseSet, axis: usize, h: u64) -> DenseSet {
    let group = a.group().clone();
    let m = group.moduli()[axis] as usize;
    let stride = group.strides_for_axis(axis);
    let outer = group.size() / (m * stride);
    let mut out = DenseSet::empty(group.clone());
    if 2 * h + 1 >= m as u64 {
        for p in 0..outer {
            for q in 0..stride {
                let base = p * m * stride + q;
                if (0..m).any(|c| a.contains_index(base + c * stride)) {
                    for c in 0..m {
                        out.insert_index(base + c * stride);
                    }
                }
            }
        }
        return out;
    }
    let big = u64::MAX / 2;
    let mut fwd = vec![0u64; m];
    let mut bwd = vec![0u64; m];
    for p in 0..outer {
        for q in 0..stride {
            let base = p * m * stride + q;
            let mut any = false;
            let mut d = big;
            for pass in 0..2 {
                for (c, slot) in fwd.iter_mut().enumerate() {
                    if a.contains_index(base + c * stride) {
                        d = 0;
                        any = true;
                    } else {
                        d = d.saturating_add(1);
                    }
                    *slot = if pass == 1 { (*slot).min(d) } else { d };
                }
            }
            if !any {
                continue;
            }
            let mut d = big;
            for pass in 0..2 {
                for (c, slot) in bwd.iter_mut().enumerate().rev() {
                    if a.contains_index(base + c * stride) {
                        d = 0;
                    } else {
                        d = d.saturating_add(1);
                    }
                    *slot = if pass == 1 { (*slot).min(d) } else { d };
                }
            }
            for (c, (f, b)) in fwd.iter().zip(&bwd).enumerate() {
                if *f.min(b) <= h {
                    out.insert_index(base + c * stride);
                }
            }
        }
    }
    out
}

/// True iff every point of G lies within the closed δ-ball of A,
/// i.e. A + ball(δ+1) = G. δ = 0 demands A = G exactly.
pub fn covers(a: &DenseSet, delta: Norm) -> bool {
    dilate(a, Norm(delta.0 + 1)).is_full()
}

/// ⌊|G| / |A|⌋ — translates of A partition at most |G| points, so this
/// bounds the t = 0 packing index from above.
pub fn counting_bound(a: &DenseSet) -> Result<u64> {
    if a.is_empty() {
        return Err(Error::Input("counting_bound of the empty set".into()));
    }
    Ok(a.group().size() as u64 / a.cardinality() as u64)
}

/// Largest r with ball(r) ⊆ A − A; at least 1 grid unit since 0 ∈ A − A.
pub fn neighborhood_radius(a: &DenseSet) -> Result<Norm> {
    let d = difference_set(a)?;
    let group = a.group();
    if d.is_full() {
        return Ok(Norm(group.diameter().0 + 1));
    }
    let mut best = u64::MAX;
    for g in 0..group.size() {
        if !d.contains_index(g) {
            best = best.min(group.norm_index(g).0);
        }
    }
    Ok(Norm(best))
}

/// Upper bound for the t = 0 packing index from the neighborhood radius:
/// any family S of pairwise disjoint translates of A is r-separated, so
/// the translates of a test box T with T − T ⊆ ball(r) by S are pairwise
/// disjoint and |S| ≤ ⌊|G|/|T|⌋. On dyadic cubes T is the ball itself (a
/// subgroup) and the bound is its exact index.
pub fn neighborhood_bound(a: &DenseSet) -> Result<u64> {
    let r = neighborhood_radius(a)?;
    let group = a.group();
    let t_size: u64 = match group.metric() {
        MetricKind::CyclicQuotient => group.moduli().iter().map(|&m| m.min(r.0)).product(),
        MetricKind::DyadicUltrametric => group.dyadic_ball_count(r) as u64,
    };
    Ok(group.size() as u64 / t_size)
}
