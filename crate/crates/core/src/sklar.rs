//! Copula extraction through right-limit quantiles, and the verification
//! suite around it.
//!
//! For a cdf `F` with margins `F_1, ..., F_d` the extracted copula is
//!
//! ```text
//! C(s_1, ..., s_d) = F(F_1^-1(s_1 + 0), ..., F_d^-1(s_d + 0))
//! ```
//!
//! where `F_i^-1(s + 0) = inf { x : F_i(x) > s }`, which is `+inf` at `s = 1`.
//! Every check compares exact rationals; failures are returned as report
//! entries with the offending point, never as errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::monotone::MonotoneFn;
use crate::mvdf::{volume, CuboidSampler, DistributionFunction, MultivariateDf};
use crate::scalar::{grid, ExtScalar, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Copula {
    source: MultivariateDf,
    margins: Vec<MonotoneFn>,
}

impl Copula {
    pub fn dim(&self) -> usize {
        self.margins.len()
    }

    pub fn source(&self) -> &MultivariateDf {
        &self.source
    }

    pub fn margins(&self) -> &[MonotoneFn] {
        &self.margins
    }

    /// `C(s)` for `s` in the unit cube.
    pub fn eval(&self, s: &[Scalar]) -> Result<Scalar> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: s.len(),
            });
        }
        if let Some(axis) = s.iter().position(|v| v.is_negative() || *v > Scalar::one()) {
            return Err(Error::OutsideUnitCube {
                axis,
                value: s[axis].to_string(),
            });
        }
        Ok(self.compose(s))
    }

    fn compose(&self, s: &[Scalar]) -> Scalar {
        let quantiles: Vec<ExtScalar> = self
            .margins
            .iter()
            .zip(s)
            .map(|(m, v)| m.gen_inverse_right(v).expect("cdf margin, level in [0, 1]"))
            .collect();
        self.source.eval_unchecked(&quantiles)
    }

    /// `C(1, ..., s, ..., 1)` with `s` in slot `axis`.
    pub fn section(&self, axis: usize, s: &Scalar) -> Result<Scalar> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                index: axis,
                dim: self.dim(),
            });
        }
        let mut point = vec![Scalar::one(); self.dim()];
        point[axis] = s.clone();
        self.eval(&point)
    }

    /// Levels in `[0, 1]` where the margins jump or bend, together with 0 and 1.
    fn levels(&self, axis: usize) -> Vec<Scalar> {
        let mut levels = self.margins[axis].critical_levels();
        levels.push(Scalar::zero());
        levels.push(Scalar::one());
        levels.sort();
        levels.dedup();
        levels
    }
}

/// As a function on the whole extended space: zero below the cube in any
/// coordinate, and coordinates above 1 act as 1.
impl DistributionFunction for Copula {
    fn dim(&self) -> usize {
        self.margins.len()
    }

    fn eval_unchecked(&self, t: &[ExtScalar]) -> Scalar {
        let mut s = Vec::with_capacity(t.len());
        for v in t {
            match v {
                ExtScalar::NegInf => return Scalar::zero(),
                ExtScalar::Finite(x) if x.is_negative() => return Scalar::zero(),
                ExtScalar::Finite(x) if *x <= Scalar::one() => s.push(x.clone()),
                _ => s.push(Scalar::one()),
            }
        }
        self.compose(&s)
    }

    fn breakpoints(&self, axis: usize) -> Vec<Scalar> {
        self.levels(axis)
    }
}

/// Builds the copula of a cdf. Evaluation is lazy.
pub fn extract_copula(f: &MultivariateDf) -> Result<Copula> {
    let margins = (0..DistributionFunction::dim(f))
        .map(|i| f.margin(i))
        .collect::<Result<Vec<_>>>()?;
    for (axis, m) in margins.iter().enumerate() {
        if !m.is_cdf() {
            return Err(Error::NotCdf {
                axis,
                lo: Box::new(m.lower_limit().clone()),
                hi: Box::new(m.upper_limit().clone()),
            });
        }
    }
    Ok(Copula {
        source: f.clone(),
        margins,
    })
}

pub fn copula_eval(c: &Copula, s: &[Scalar]) -> Result<Scalar> {
    c.eval(s)
}

/// Verification grid: `m + 1` points per axis, merged with the structural
/// breakpoints of the object under test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    resolution: u32,
    bounds: Option<Vec<(Scalar, Scalar)>>,
}

impl GridSpec {
    pub fn new(resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidFamily(
                "grid resolution must be at least 1".into(),
            ));
        }
        Ok(GridSpec {
            resolution,
            bounds: None,
        })
    }

    /// Explicit per-axis bounding box for sweeps over the data space.
    pub fn with_bounds(mut self, bounds: Vec<(Scalar, Scalar)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    fn axis(&self, lo: &Scalar, hi: &Scalar, breakpoints: &[Scalar]) -> Vec<Scalar> {
        let mut pts = grid(lo, hi, self.resolution);
        pts.extend(breakpoints.iter().filter(|b| *b >= lo && *b <= hi).cloned());
        pts.sort();
        pts.dedup();
        pts
    }
}

/// Visit the Cartesian product of `axes` in lexicographic order.
fn for_each_point(axes: &[Vec<Scalar>], mut visit: impl FnMut(&[Scalar])) {
    if axes.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    let mut point: Vec<Scalar> = axes.iter().map(|a| a[0].clone()).collect();
    loop {
        visit(&point);
        let mut axis = axes.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                point[axis] = axes[axis][idx[axis]].clone();
                break;
            }
            idx[axis] = 0;
            point[axis] = axes[axis][0].clone();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Which sub-check failed, for reports that bundle several.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<&'static str>,
    pub point: Vec<ExtScalar>,
    /// Upper corner when the witness is a cuboid (`point` is the lower one).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<ExtScalar>>,
    pub expected: Scalar,
    pub got: Scalar,
    pub deviation: Scalar,
}

impl Violation {
    fn at(point: &[Scalar], expected: Scalar, got: Scalar) -> Self {
        Violation {
            kind: None,
            point: point.iter().map(ExtScalar::from).collect(),
            upper: None,
            deviation: (&got - &expected).abs(),
            expected,
            got,
        }
    }

    fn kind(mut self, kind: &'static str) -> Self {
        self.kind = Some(kind);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub check: String,
    pub points_tested: usize,
    pub violations: Vec<Violation>,
    pub max_deviation: Scalar,
    pub pass: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    check: &'a str,
    points: usize,
    pass: bool,
    max_deviation: &'a Scalar,
    violations: &'a [Violation],
    truncated: bool,
}

impl CheckReport {
    fn new(check: &str, points_tested: usize, violations: Vec<Violation>) -> Self {
        let max_deviation = violations
            .iter()
            .map(|v| v.deviation.clone())
            .max()
            .unwrap_or_else(Scalar::zero);
        CheckReport {
            check: check.into(),
            points_tested,
            pass: violations.is_empty(),
            violations,
            max_deviation,
        }
    }

    /// Violations of one sub-check.
    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.kind == Some(kind))
    }

    /// Report JSON with at most `max_witnesses` violations.
    pub fn to_json(&self, max_witnesses: usize) -> serde_json::Value {
        let shown = self.violations.len().min(max_witnesses);
        serde_json::to_value(ReportJson {
            check: &self.check,
            points: self.points_tested,
            pass: self.pass,
            max_deviation: &self.max_deviation,
            violations: &self.violations[..shown],
            truncated: shown < self.violations.len(),
        })
        .expect("report serializes")
    }
}

/// Compares `F(x)` with `C(F_1(x_1), ..., F_d(x_d))` on the grid.
///
/// Without explicit bounds the grid spans each axis's breakpoints widened by
/// one unit on both sides.
pub fn verify_sklar_identity(f: &MultivariateDf, spec: &GridSpec) -> Result<CheckReport> {
    let copula = extract_copula(f)?;
    let d = DistributionFunction::dim(f);
    let bounds = match &spec.bounds {
        Some(b) if b.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            })
        }
        Some(b) => b.clone(),
        None => (0..d)
            .map(|axis| {
                let bp = f.breakpoints(axis);
                let lo = bp.first().cloned().unwrap_or_else(Scalar::zero);
                let hi = bp.last().cloned().unwrap_or_else(Scalar::zero);
                (lo - Scalar::one(), hi + Scalar::one())
            })
            .collect(),
    };
    let axes: Vec<Vec<Scalar>> = bounds
        .iter()
        .enumerate()
        .map(|(axis, (lo, hi))| spec.axis(lo, hi, &f.breakpoints(axis)))
        .collect();
    let mut violations = Vec::new();
    let mut points = 0;
    for_each_point(&axes, |x| {
        points += 1;
        let ext: Vec<ExtScalar> = x.iter().map(ExtScalar::from).collect();
        let direct = f.eval_unchecked(&ext);
        let levels: Vec<Scalar> = copula
            .margins
            .iter()
            .zip(x)
            .map(|(m, xi)| m.eval_at(xi))
            .collect();
        let composed = copula.compose(&levels);
        if composed != direct {
            violations.push(Violation::at(x, direct, composed));
        }
    });
    Ok(CheckReport::new("sklar", points, violations))
}

/// Compares each section `C_i(s)` with `s` on `[0, 1]`.
pub fn verify_uniform_margins(c: &Copula, spec: &GridSpec) -> CheckReport {
    let mut violations = Vec::new();
    let mut points = 0;
    for axis in 0..c.dim() {
        for s in spec.axis(&Scalar::zero(), &Scalar::one(), &c.levels(axis)) {
            points += 1;
            let mut point = vec![Scalar::one(); c.dim()];
            point[axis] = s.clone();
            let got = c.compose(&point);
            if got != s {
                violations.push(Violation::at(&point, s, got));
            }
        }
    }
    CheckReport::new("margins", points, violations)
}

/// Checks that `C` is d-increasing on random cuboids, grounded on the grid
/// faces, and inside the Frechet-Hoeffding envelope on the grid.
pub fn verify_copula_axioms(
    c: &Copula,
    n_cuboids: usize,
    seed: u64,
    spec: &GridSpec,
) -> CheckReport {
    let d = c.dim();
    let mut violations = Vec::new();
    let mut points = 0;

    let mut sampler = CuboidSampler::unit(seed, d);
    for _ in 0..n_cuboids {
        points += 1;
        let cuboid = sampler.next_cuboid();
        let vol = volume(c, &cuboid).expect("cuboid matches dimension");
        if vol.is_negative() {
            violations.push(Violation {
                kind: Some("volume"),
                point: cuboid.lower().to_vec(),
                upper: Some(cuboid.upper().to_vec()),
                expected: Scalar::zero(),
                deviation: -&vol,
                got: vol,
            });
        }
    }

    let axes: Vec<Vec<Scalar>> = (0..d)
        .map(|axis| spec.axis(&Scalar::zero(), &Scalar::one(), &c.levels(axis)))
        .collect();
    let slack = Scalar::from(d as i64 - 1);
    for_each_point(&axes, |s| {
        points += 1;
        let value = c.compose(s);
        if s.iter().any(Scalar::is_zero) && !value.is_zero() {
            violations.push(Violation::at(s, Scalar::zero(), value.clone()).kind("grounded"));
        }
        let upper = s.iter().min().expect("dimension >= 1").clone();
        let lower = (s.iter().sum::<Scalar>() - &slack).max(Scalar::zero());
        if value > upper {
            violations.push(Violation::at(s, upper, value.clone()).kind("upper_bound"));
        }
        if value < lower {
            violations.push(Violation::at(s, lower, value).kind("lower_bound"));
        }
    });
    CheckReport::new("copula", points, violations)
}
