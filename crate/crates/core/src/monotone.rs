//! Non-decreasing right-continuous functions on the real line.
//!
//! A [`MonotoneFn`] is stored as an ordered list of [`Knot`]s. Between two
//! consecutive knots the function is affine on the closed-left interval
//! `[x_k, x_{k+1})`, running from `value_k` up to `left_{k+1}`; at a knot it may
//! jump from `left_k` to `value_k`. To the left of the first knot it is the
//! constant `c = knots[0].left`, to the right of the last knot the constant
//! `d = knots[last].value`. Right-continuity is therefore structural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ExtScalar, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Knot {
    pub x: Scalar,
    /// Limit from the left at `x`.
    pub left: Scalar,
    /// Value at `x`.
    pub value: Scalar,
}

impl Knot {
    pub fn new(x: Scalar, left: Scalar, value: Scalar) -> Self {
        Knot { x, left, value }
    }

    /// A knot where the function is continuous.
    pub fn continuous(x: Scalar, value: Scalar) -> Self {
        Knot {
            x,
            left: value.clone(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneFn {
    knots: Vec<Knot>,
}

impl MonotoneFn {
    /// Validates the knot list. Errors name the first offending knot.
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidKnot {
                index: 0,
                reason: "at least one knot is required".into(),
            });
        }
        for (index, knot) in knots.iter().enumerate() {
            if knot.left > knot.value {
                return Err(Error::InvalidKnot {
                    index,
                    reason: format!("left limit {} exceeds value {}", knot.left, knot.value),
                });
            }
            if index > 0 {
                let prev = &knots[index - 1];
                if knot.x <= prev.x {
                    return Err(Error::InvalidKnot {
                        index,
                        reason: format!(
                            "abscissa {} does not exceed previous abscissa {}",
                            knot.x, prev.x
                        ),
                    });
                }
                if prev.value > knot.left {
                    return Err(Error::InvalidKnot {
                        index,
                        reason: format!(
                            "left limit {} is below the previous value {}",
                            knot.left, prev.value
                        ),
                    });
                }
            }
        }
        Ok(MonotoneFn { knots })
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// `c`, the infimum of the function (its limit at `-inf`).
    pub fn lower_limit(&self) -> &Scalar {
        &self.knots[0].left
    }

    /// `d`, the supremum of the function (its limit at `+inf`).
    pub fn upper_limit(&self) -> &Scalar {
        &self.knots[self.knots.len() - 1].value
    }

    /// Whether the limits are exactly 0 and 1.
    pub fn is_cdf(&self) -> bool {
        self.lower_limit().is_zero() && *self.upper_limit() == Scalar::one()
    }

    /// No knot carries a jump.
    pub fn is_continuous(&self) -> bool {
        self.knots.iter().all(|k| k.left == k.value)
    }

    /// Lower end-point: `inf { x : G(x) > c }`, `+inf` for a constant function.
    pub fn lep(&self) -> ExtScalar {
        self.gen_inverse_right(self.lower_limit())
            .expect("c is in the inverse domain")
    }

    /// Upper end-point: `sup { x : G(x) < d }`, `-inf` for a constant function.
    pub fn uep(&self) -> ExtScalar {
        self.gen_inverse(self.upper_limit())
            .expect("d is in the inverse domain")
    }

    /// Largest `k` with `x_k <= x`.
    fn segment_index(&self, x: &Scalar) -> Option<usize> {
        let idx = self.knots.partition_point(|k| k.x <= *x);
        idx.checked_sub(1)
    }

    /// Slope of the affine piece on `[x_k, x_{k+1})`.
    fn slope(&self, k: usize) -> Scalar {
        let a = &self.knots[k];
        let b = &self.knots[k + 1];
        (&b.left - &a.value) / (&b.x - &a.x)
    }

    pub fn eval(&self, x: &ExtScalar) -> Scalar {
        match x {
            ExtScalar::NegInf => self.lower_limit().clone(),
            ExtScalar::PosInf => self.upper_limit().clone(),
            ExtScalar::Finite(x) => self.eval_at(x),
        }
    }

    pub fn eval_at(&self, x: &Scalar) -> Scalar {
        match self.segment_index(x) {
            None => self.lower_limit().clone(),
            Some(k) if k + 1 == self.knots.len() => self.upper_limit().clone(),
            Some(k) => {
                let a = &self.knots[k];
                &a.value + self.slope(k) * (x - &a.x)
            }
        }
    }

    /// `G(x - 0)`.
    pub fn eval_left(&self, x: &Scalar) -> Scalar {
        match self.knots.binary_search_by(|k| k.x.cmp(x)) {
            Ok(i) => self.knots[i].left.clone(),
            Err(_) => self.eval_at(x),
        }
    }

    fn check_domain(&self, u: &Scalar) -> Result<()> {
        if u < self.lower_limit() || u > self.upper_limit() {
            return Err(Error::Domain {
                u: Box::new(u.clone()),
                lo: Box::new(self.lower_limit().clone()),
                hi: Box::new(self.upper_limit().clone()),
            });
        }
        Ok(())
    }

    /// Generalized inverse `inf { x : G(x) >= u }` for `c <= u <= d`.
    ///
    /// At `u = c` the defining set is the whole line and the result is `-inf`.
    pub fn gen_inverse(&self, u: &Scalar) -> Result<ExtScalar> {
        self.check_domain(u)?;
        if u == self.lower_limit() {
            return Ok(ExtScalar::NegInf);
        }
        Ok(self.first_crossing(u, |level| level >= u))
    }

    /// Right limit of the generalized inverse, `inf { x : G(x) > u }`, for
    /// `c <= u <= d`. The set is empty at `u = d` and the result is `+inf`.
    pub fn gen_inverse_right(&self, u: &Scalar) -> Result<ExtScalar> {
        self.check_domain(u)?;
        if u == self.upper_limit() {
            return Ok(ExtScalar::PosInf);
        }
        Ok(self.first_crossing(u, |level| level > u))
    }

    /// Infimum of `{ x : hit(G(x)) }` where `hit` is `>= u` or `> u` and `u`
    /// is strictly above `c`, or strictly below `d` for the strict form. The
    /// set is then a non-empty up-set starting at or after the first knot.
    fn first_crossing(&self, u: &Scalar, hit: impl Fn(&Scalar) -> bool) -> ExtScalar {
        for (k, knot) in self.knots.iter().enumerate() {
            if k > 0 {
                let prev = &self.knots[k - 1];
                // On [x_{k-1}, x_k) the function climbs affinely from
                // prev.value (which missed) towards knot.left.
                if hit(&knot.left) && knot.left > prev.value {
                    let t = &prev.x
                        + (u - &prev.value) * (&knot.x - &prev.x) / (&knot.left - &prev.value);
                    return ExtScalar::Finite(t);
                }
            }
            if hit(&knot.value) {
                return ExtScalar::Finite(knot.x.clone());
            }
        }
        unreachable!("level {u} is attained by construction of the domain")
    }

    /// Sorted distinct levels `left_k` and `value_k`.
    pub fn critical_levels(&self) -> Vec<Scalar> {
        let mut levels: Vec<Scalar> = self
            .knots
            .iter()
            .flat_map(|k| [k.left.clone(), k.value.clone()])
            .collect();
        levels.sort();
        levels.dedup();
        levels
    }

    /// Exact left limit `G^-1(u - 0)` for `c < u <= d`.
    ///
    /// Below `u` the nearest critical level `L` bounds an interval `(L, u)` on
    /// which the inverse is affine (inside a rising piece) or constant (across
    /// a jump). The limit is read off at the midpoint `u - delta` and
    /// extrapolated with the exact slope.
    pub fn gen_inverse_left_limit(&self, u: &Scalar) -> Result<ExtScalar> {
        self.check_domain(u)?;
        if u == self.lower_limit() {
            return Err(Error::Domain {
                u: Box::new(u.clone()),
                lo: Box::new(self.lower_limit().clone()),
                hi: Box::new(self.upper_limit().clone()),
            });
        }
        let below = self
            .critical_levels()
            .into_iter()
            .rfind(|l| l < u)
            .expect("c is a critical level below u");
        let delta = (u - &below) / Scalar::from(2);
        let probe = u - &delta;
        let x = match self.gen_inverse(&probe)? {
            ExtScalar::Finite(x) => x,
            other => unreachable!("inverse strictly above c is finite, got {other}"),
        };
        if self.eval_at(&x) > probe {
            // jump of G at x covers (L, u)
            return Ok(ExtScalar::Finite(x));
        }
        let k = self
            .segment_index(&x)
            .expect("probe level lies inside a rising piece");
        Ok(ExtScalar::Finite(x + delta / self.slope(k)))
    }

    /// `G(y) > G(x)` for every `y > x`.
    pub fn is_right_increase_point(&self, x: &Scalar) -> bool {
        match self.segment_index(x) {
            None => false,
            Some(k) if k + 1 == self.knots.len() => false,
            Some(k) => self.slope(k).is_positive(),
        }
    }

    /// Computes `G^-1(G(x) + 0)` for every `x` and compares it with `x`.
    ///
    /// The result is always `>= x`; equality holds exactly at points of right
    /// increase. Points outside `[lep, uep)` are evaluated but flagged as out
    /// of domain: at `x >= uep` the level `G(x)` is `d` and its right limit is
    /// `+inf`.
    pub fn ff_check(&self, xs: &[Scalar]) -> Vec<FfResult> {
        let (lep, uep) = (self.lep(), self.uep());
        xs.iter()
            .map(|x| {
                let lhs = self
                    .gen_inverse_right(&self.eval_at(x))
                    .expect("G(x) lies in [c, d]");
                assert!(lhs.cmp_scalar(x).is_ge(), "right-limit inverse below x");
                let ext = ExtScalar::from(x);
                FfResult {
                    holds: lhs == ext,
                    in_domain: lep <= ext && ext < uep,
                    point: x.clone(),
                    lhs,
                    rhs: ext,
                }
            })
            .collect()
    }

    /// Runs inequalities (A), (B), left-continuity of the inverse and the
    /// right-limit identity over the supplied levels and abscissas.
    pub fn lemma_report(&self, us: &[Scalar], xs: &[Scalar]) -> Result<LemmaReport> {
        for u in us {
            self.check_domain(u)?;
        }
        let mut checks_a = Vec::with_capacity(us.len());
        let mut left_continuity = Vec::with_capacity(us.len());
        for u in us {
            let inv = self.gen_inverse(u)?;
            let lhs = ExtScalar::Finite(self.eval(&inv));
            let rhs = ExtScalar::from(u);
            checks_a.push(LemmaCheck {
                holds: lhs >= rhs,
                point: u.clone(),
                lhs,
                rhs,
            });
            if u > self.lower_limit() {
                let lhs = self.gen_inverse_left_limit(u)?;
                left_continuity.push(LemmaCheck {
                    holds: lhs == inv,
                    point: u.clone(),
                    lhs,
                    rhs: inv,
                });
            }
        }
        let checks_b: Vec<LemmaCheck> = xs
            .iter()
            .map(|x| {
                let lhs = self.gen_inverse(&self.eval_at(x)).expect("G(x) in [c, d]");
                let rhs = ExtScalar::from(x);
                LemmaCheck {
                    holds: lhs <= rhs,
                    point: x.clone(),
                    lhs,
                    rhs,
                }
            })
            .collect();
        let ff_results = self.ff_check(xs);
        let ff_witnesses = ff_results
            .iter()
            .filter(|r| r.in_domain && !r.holds)
            .map(|r| FfWitness {
                x: r.point.clone(),
                lhs: r.lhs.clone(),
            })
            .collect();
        Ok(LemmaReport {
            pass_a: checks_a.iter().all(|c| c.holds),
            pass_b: checks_b.iter().all(|c| c.holds),
            pass_leftcont: left_continuity.iter().all(|c| c.holds),
            checks_a,
            checks_b,
            left_continuity,
            ff_results,
            ff_witnesses,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub point: Scalar,
    pub lhs: ExtScalar,
    pub rhs: ExtScalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FfResult {
    pub point: Scalar,
    pub lhs: ExtScalar,
    pub rhs: ExtScalar,
    pub holds: bool,
    /// `lep <= x < uep`.
    pub in_domain: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FfWitness {
    pub x: Scalar,
    pub lhs: ExtScalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub checks_a: Vec<LemmaCheck>,
    pub checks_b: Vec<LemmaCheck>,
    pub left_continuity: Vec<LemmaCheck>,
    pub ff_results: Vec<FfResult>,
    pub ff_witnesses: Vec<FfWitness>,
    pub pass_a: bool,
    pub pass_b: bool,
    pub pass_leftcont: bool,
}

impl LemmaReport {
    /// All checks hold and no in-domain point violates the right-limit identity.
    pub fn pass(&self) -> bool {
        self.pass_a && self.pass_b && self.pass_leftcont && self.ff_witnesses.is_empty()
    }
}
