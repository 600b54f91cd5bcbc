//! Multivariate distribution functions and the rectangle volume operator.
//!
//! The volume of a half-open box `]a, b]` under `F` is the signed sum of `F`
//! over the `2^d` corners of the box: the corner selected by `eps` in
//! `{0,1}^d` takes `a_i` where `eps_i = 1` and `b_i` where `eps_i = 0`, with
//! sign `(-1)^(eps_1 + ... + eps_d)`. A function is a df when it is
//! right-continuous and every such volume is non-negative.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::GridMass;
use crate::monotone::{Knot, MonotoneFn};
use crate::scalar::{ExtScalar, Scalar};

/// A point of the extended space, one coordinate per axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<ExtScalar>);

impl Point {
    pub fn new(coords: Vec<ExtScalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Point(coords))
    }

    pub fn finite(coords: &[Scalar]) -> Result<Self> {
        Point::new(coords.iter().map(ExtScalar::from).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<ExtScalar> {
        self.0
    }
}

impl Deref for Point {
    type Target = [ExtScalar];

    fn deref(&self) -> &[ExtScalar] {
        &self.0
    }
}

/// The half-open box `]a, b]` with `a <= b` componentwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cuboid {
    a: Point,
    b: Point,
}

impl Cuboid {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        if let Some(axis) = a.iter().zip(b.iter()).position(|(lo, hi)| lo > hi) {
            return Err(Error::UnorderedCuboid { axis });
        }
        Ok(Cuboid { a, b })
    }

    pub fn from_finite(a: &[Scalar], b: &[Scalar]) -> Result<Self> {
        Cuboid::new(Point::finite(a)?, Point::finite(b)?)
    }

    pub fn lower(&self) -> &Point {
        &self.a
    }

    pub fn upper(&self) -> &Point {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Cut along `axis` at `m`, which must lie in `[a_axis, b_axis]`.
    pub fn split(&self, axis: usize, m: &ExtScalar) -> Result<(Cuboid, Cuboid)> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                index: axis,
                dim: self.dim(),
            });
        }
        let mut mid_hi = self.b.0.clone();
        mid_hi[axis] = m.clone();
        let mut mid_lo = self.a.0.clone();
        mid_lo[axis] = m.clone();
        Ok((
            Cuboid::new(self.a.clone(), Point(mid_hi))?,
            Cuboid::new(Point(mid_lo), self.b.clone())?,
        ))
    }
}

/// Anything that can be evaluated as a function on the extended space.
pub trait DistributionFunction {
    fn dim(&self) -> usize;

    /// Evaluation at a point of the right dimension; callers check the length.
    fn eval_unchecked(&self, t: &[ExtScalar]) -> Scalar;

    /// Sorted distinct abscissas along `axis` where the function may bend or
    /// jump.
    fn breakpoints(&self, axis: usize) -> Vec<Scalar>;

    fn eval(&self, t: &[ExtScalar]) -> Result<Scalar> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        Ok(self.eval_unchecked(t))
    }
}

/// Signed sum of `F` over the `2^d` corners of `]a, b]`.
pub fn volume<D: DistributionFunction + ?Sized>(f: &D, cuboid: &Cuboid) -> Result<Scalar> {
    let d = f.dim();
    if cuboid.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: cuboid.dim(),
        });
    }
    let mut total = Scalar::zero();
    let mut corner = cuboid.b.0.clone();
    for eps in 0u64..(1u64 << d) {
        for (i, c) in corner.iter_mut().enumerate() {
            *c = if eps >> i & 1 == 1 {
                cuboid.a[i].clone()
            } else {
                cuboid.b[i].clone()
            };
        }
        let value = f.eval_unchecked(&corner);
        if eps.count_ones() % 2 == 0 {
            total = total + value;
        } else {
            total = total - value;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Family {
    Empirical { rows: Vec<Vec<Scalar>> },
    Product { margins: Vec<MonotoneFn> },
    Comonotone { margins: Vec<MonotoneFn> },
    Countermonotone { margins: Vec<MonotoneFn> },
    Grid { masses: Vec<GridMass> },
}

/// One of the concrete df families; see [`crate::families`] for constructors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultivariateDf {
    pub(crate) dim: usize,
    pub(crate) family: Family,
}

fn le_ext(value: &Scalar, t: &ExtScalar) -> bool {
    t.cmp_scalar(value).is_ge()
}

impl MultivariateDf {
    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Empirical { .. } => "empirical",
            Family::Product { .. } => "product",
            Family::Comonotone { .. } => "comonotone",
            Family::Countermonotone { .. } => "countermonotone",
            Family::Grid { .. } => "grid",
        }
    }

    pub fn rows(&self) -> Option<&[Vec<Scalar>]> {
        match &self.family {
            Family::Empirical { rows } => Some(rows),
            _ => None,
        }
    }

    pub fn masses(&self) -> Option<&[GridMass]> {
        match &self.family {
            Family::Grid { masses } => Some(masses),
            _ => None,
        }
    }

    /// Stored margins of the product, comonotone and countermonotone families.
    pub fn stored_margins(&self) -> Option<&[MonotoneFn]> {
        match &self.family {
            Family::Product { margins }
            | Family::Comonotone { margins }
            | Family::Countermonotone { margins } => Some(margins),
            _ => None,
        }
    }

    /// `F(t)` with dimension check.
    pub fn df_eval(&self, t: &Point) -> Result<Scalar> {
        DistributionFunction::eval(self, t)
    }

    /// The `axis`-th margin (0-based) as an exact piecewise function.
    pub fn margin(&self, axis: usize) -> Result<MonotoneFn> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                index: axis,
                dim: self.dim,
            });
        }
        match &self.family {
            Family::Product { margins }
            | Family::Comonotone { margins }
            | Family::Countermonotone { margins } => Ok(margins[axis].clone()),
            Family::Empirical { rows } => {
                let weight = Scalar::new(1, rows.len() as i64);
                step_margin(rows.iter().map(|r| (r[axis].clone(), weight.clone())))
            }
            Family::Grid { masses } => step_margin(
                masses
                    .iter()
                    .map(|m| (m.point[axis].clone(), m.mass.clone())),
            ),
        }
    }

    /// Every margin has limits 0 and 1.
    pub fn is_cdf(&self) -> bool {
        (0..self.dim).all(|i| self.margin(i).map(|m| m.is_cdf()).unwrap_or(false))
    }
}

/// Step function with jumps of the given sizes, ties aggregated.
fn step_margin(atoms: impl Iterator<Item = (Scalar, Scalar)>) -> Result<MonotoneFn> {
    let mut atoms: Vec<(Scalar, Scalar)> = atoms.collect();
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut knots: Vec<Knot> = Vec::new();
    let mut cumulative = Scalar::zero();
    for (x, w) in atoms {
        let next = &cumulative + &w;
        match knots.last_mut() {
            Some(last) if last.x == x => last.value = next.clone(),
            _ => knots.push(Knot::new(x, cumulative.clone(), next.clone())),
        }
        cumulative = next;
    }
    MonotoneFn::new(knots)
}

impl DistributionFunction for MultivariateDf {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_unchecked(&self, t: &[ExtScalar]) -> Scalar {
        match &self.family {
            Family::Empirical { rows } => {
                let hits = rows
                    .iter()
                    .filter(|r| r.iter().zip(t).all(|(v, ti)| le_ext(v, ti)))
                    .count();
                Scalar::new(hits as i64, rows.len() as i64)
            }
            Family::Grid { masses } => masses
                .iter()
                .filter(|m| m.point.iter().zip(t).all(|(v, ti)| le_ext(v, ti)))
                .map(|m| &m.mass)
                .sum(),
            Family::Product { margins } => margins
                .iter()
                .zip(t)
                .fold(Scalar::one(), |acc, (m, ti)| acc * m.eval(ti)),
            Family::Comonotone { margins } => margins
                .iter()
                .zip(t)
                .map(|(m, ti)| m.eval(ti))
                .min()
                .expect("dimension is at least 1"),
            Family::Countermonotone { margins } => {
                let sum = margins[0].eval(&t[0]) + margins[1].eval(&t[1]) - Scalar::one();
                sum.max(Scalar::zero())
            }
        }
    }

    fn breakpoints(&self, axis: usize) -> Vec<Scalar> {
        let mut points: Vec<Scalar> = match &self.family {
            Family::Empirical { rows } => rows.iter().map(|r| r[axis].clone()).collect(),
            Family::Grid { masses } => masses.iter().map(|m| m.point[axis].clone()).collect(),
            Family::Product { margins }
            | Family::Comonotone { margins }
            | Family::Countermonotone { margins } => {
                margins[axis].knots().iter().map(|k| k.x.clone()).collect()
            }
        };
        points.sort();
        points.dedup();
        points
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolumeCheck {
    pub cuboid: Cuboid,
    pub volume: Scalar,
    pub nonneg: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitCheck {
    pub point: Point,
    pub value: Scalar,
    pub expected: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RightContinuityCheck {
    pub point: Point,
    pub axis: usize,
    pub delta_used: Scalar,
    pub value_at: Scalar,
    pub value_right: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DfReport {
    pub volume_checks: Vec<VolumeCheck>,
    pub limit_checks: Vec<LimitCheck>,
    pub right_continuity_checks: Vec<RightContinuityCheck>,
    pub pass: bool,
}

impl DfReport {
    pub fn negative_volumes(&self) -> impl Iterator<Item = &VolumeCheck> {
        self.volume_checks.iter().filter(|c| !c.nonneg)
    }
}

/// Seeded generator of random cuboids.
///
/// Each axis draws two integers `k` uniformly from `0..=1000` with ChaCha8
/// seeded by `seed_from_u64(seed)`, sorts them, and maps `k` to
/// `lo + (hi - lo) * k / 1000`. On the unit cube the corners are `k/1000`.
pub struct CuboidSampler {
    rng: ChaCha8Rng,
    bounds: Vec<(Scalar, Scalar)>,
}

impl CuboidSampler {
    pub fn new(seed: u64, bounds: Vec<(Scalar, Scalar)>) -> Self {
        CuboidSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bounds,
        }
    }

    pub fn unit(seed: u64, dim: usize) -> Self {
        CuboidSampler::new(seed, vec![(Scalar::zero(), Scalar::one()); dim])
    }

    pub fn next_cuboid(&mut self) -> Cuboid {
        let mut a = Vec::with_capacity(self.bounds.len());
        let mut b = Vec::with_capacity(self.bounds.len());
        for (lo, hi) in &self.bounds {
            let k1: i64 = self.rng.gen_range(0..=1000);
            let k2: i64 = self.rng.gen_range(0..=1000);
            let (k1, k2) = (k1.min(k2), k1.max(k2));
            let span = hi - lo;
            a.push(lo + &span * Scalar::new(k1, 1000));
            b.push(lo + &span * Scalar::new(k2, 1000));
        }
        Cuboid::from_finite(&a, &b).expect("corners sorted per axis")
    }
}

/// Per-axis `[min, max]` of the breakpoints, widened by 1 when degenerate.
pub fn breakpoint_bounds<D: DistributionFunction + ?Sized>(f: &D) -> Vec<(Scalar, Scalar)> {
    (0..f.dim())
        .map(|axis| {
            let bp = f.breakpoints(axis);
            match (bp.first(), bp.last()) {
                (Some(lo), Some(hi)) if lo < hi => (lo.clone(), hi.clone()),
                (Some(x), _) => (x - Scalar::one(), x + Scalar::one()),
                _ => (-Scalar::one(), Scalar::one()),
            }
        })
        .collect()
}

const MAX_STRUCTURAL_CELLS: usize = 512;
const MAX_PROBE_POINTS: usize = 1024;

/// Indices `0..total` thinned to at most `cap` by an even stride.
fn strided(total: usize, cap: usize) -> Vec<usize> {
    if total <= cap {
        (0..total).collect()
    } else {
        (0..cap).map(|j| j * total / cap).collect()
    }
}

/// Decode a flat index into one index per axis, first axis slowest.
fn unflatten(mut flat: usize, lens: &[usize]) -> Vec<usize> {
    let mut out = vec![0; lens.len()];
    for (i, len) in lens.iter().enumerate().rev() {
        out[i] = flat % len;
        flat /= len;
    }
    out
}

/// Half the smallest positive gap between consecutive breakpoints; 1 if none.
fn probe_delta(breakpoints: &[Scalar]) -> Scalar {
    breakpoints
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .map(|gap| gap / Scalar::from(2))
        .unwrap_or_else(Scalar::one)
}

/// Right limit of `h -> F(t + h e_axis)` at `h = 0`, by affine extrapolation
/// once successive halvings have stayed collinear for a while.
fn right_limit<D: DistributionFunction + ?Sized>(
    f: &D,
    t: &[ExtScalar],
    axis: usize,
    delta: &Scalar,
) -> (Scalar, Scalar) {
    let base = t[axis].finite().expect("probe points are finite").clone();
    let at = |h: &Scalar| {
        let mut p = t.to_vec();
        p[axis] = ExtScalar::Finite(&base + h);
        f.eval_unchecked(&p)
    };
    // A kink of a min/max of affine pieces can sit anywhere below delta, so a
    // single collinear triple is not enough. Accept the extrapolation only
    // after it has been stable for STABLE consecutive halvings.
    const STABLE: usize = 8;
    let two = Scalar::from(2);
    let mut hs = vec![delta.clone()];
    let mut gs = vec![at(delta)];
    let mut run = 0;
    for _ in 0..64 {
        let h = hs.last().unwrap() / &two;
        gs.push(at(&h));
        hs.push(h);
        let n = gs.len();
        if n < 3 {
            continue;
        }
        let (g0, g1, g2) = (&gs[n - 3], &gs[n - 2], &gs[n - 1]);
        if g0 - g1 == (g1 - g2) * &two {
            run += 1;
            if run >= STABLE {
                return (g1 * &two - g0, hs[n - 3].clone());
            }
        } else {
            run = 0;
        }
    }
    (gs.pop().unwrap(), hs.pop().unwrap())
}

/// Checks non-negative volumes, the limit conditions and right-continuity.
///
/// Volumes are taken on `n_cuboids` seeded random boxes inside the
/// breakpoint bounds and on the cells of the structural grid (breakpoints,
/// their midpoints and one unit beyond each end). Right-continuity is probed
/// at grid points of the breakpoints along every axis.
pub fn check_df_axioms<D: DistributionFunction + ?Sized>(
    f: &D,
    n_cuboids: usize,
    seed: u64,
) -> DfReport {
    let d = f.dim();
    let mut volume_checks = Vec::new();
    let mut push_volume = |cuboid: Cuboid| {
        let volume = volume(f, &cuboid).expect("cuboid built for this dimension");
        volume_checks.push(VolumeCheck {
            nonneg: !volume.is_negative(),
            cuboid,
            volume,
        });
    };

    let mut sampler = CuboidSampler::new(seed, breakpoint_bounds(f));
    for _ in 0..n_cuboids {
        push_volume(sampler.next_cuboid());
    }

    let axes: Vec<Vec<Scalar>> = (0..d)
        .map(|axis| {
            let bp = f.breakpoints(axis);
            let mut pts = bp.clone();
            pts.extend(bp.windows(2).map(|w| w[0].midpoint(&w[1])));
            if let (Some(lo), Some(hi)) = (bp.first(), bp.last()) {
                pts.push(lo - Scalar::one());
                pts.push(hi + Scalar::one());
            }
            pts.sort();
            pts.dedup();
            pts
        })
        .collect();
    if axes.iter().all(|a| a.len() >= 2) {
        let lens: Vec<usize> = axes.iter().map(|a| a.len() - 1).collect();
        let total = lens.iter().product();
        for flat in strided(total, MAX_STRUCTURAL_CELLS) {
            let idx = unflatten(flat, &lens);
            let a: Vec<Scalar> = idx
                .iter()
                .zip(&axes)
                .map(|(&j, ax)| ax[j].clone())
                .collect();
            let b: Vec<Scalar> = idx
                .iter()
                .zip(&axes)
                .map(|(&j, ax)| ax[j + 1].clone())
                .collect();
            push_volume(Cuboid::from_finite(&a, &b).expect("consecutive grid points"));
        }
    }

    let mut limit_checks = Vec::new();
    let mut push_limit = |coords: Vec<ExtScalar>, expected: Scalar| {
        let value = f.eval_unchecked(&coords);
        limit_checks.push(LimitCheck {
            holds: value == expected,
            point: Point(coords),
            value,
            expected,
        });
    };
    for axis in 0..d {
        let mut coords = vec![ExtScalar::PosInf; d];
        coords[axis] = ExtScalar::NegInf;
        push_limit(coords, Scalar::zero());
    }
    push_limit(vec![ExtScalar::NegInf; d], Scalar::zero());
    push_limit(vec![ExtScalar::PosInf; d], Scalar::one());

    let mut right_continuity_checks = Vec::new();
    let breakpoints: Vec<Vec<Scalar>> = (0..d).map(|axis| f.breakpoints(axis)).collect();
    if breakpoints.iter().all(|b| !b.is_empty()) {
        let lens: Vec<usize> = breakpoints.iter().map(Vec::len).collect();
        let total = lens.iter().product();
        let deltas: Vec<Scalar> = breakpoints.iter().map(|b| probe_delta(b)).collect();
        for flat in strided(total, MAX_PROBE_POINTS) {
            let idx = unflatten(flat, &lens);
            let t: Vec<ExtScalar> = idx
                .iter()
                .zip(&breakpoints)
                .map(|(&j, bp)| ExtScalar::from(&bp[j]))
                .collect();
            let value_at = f.eval_unchecked(&t);
            for (axis, delta) in deltas.iter().enumerate() {
                let (value_right, delta_used) = right_limit(f, &t, axis, delta);
                right_continuity_checks.push(RightContinuityCheck {
                    holds: value_right == value_at,
                    point: Point(t.clone()),
                    axis,
                    delta_used,
                    value_at: value_at.clone(),
                    value_right,
                });
            }
        }
    }

    let pass = volume_checks.iter().all(|c| c.nonneg)
        && limit_checks.iter().all(|c| c.holds)
        && right_continuity_checks.iter().all(|c| c.holds);
    DfReport {
        volume_checks,
        limit_checks,
        right_continuity_checks,
        pass,
    }
}
