//! Validated constructors for the concrete df families.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::monotone::MonotoneFn;
use crate::mvdf::{Family, MultivariateDf};
use crate::scalar::Scalar;

/// An atom of a finite discrete distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridMass {
    pub point: Vec<Scalar>,
    pub mass: Scalar,
}

impl GridMass {
    pub fn new(point: Vec<Scalar>, mass: Scalar) -> Self {
        GridMass { point, mass }
    }
}

fn check_cdf_margins(margins: &[MonotoneFn]) -> Result<()> {
    if margins.is_empty() {
        return Err(Error::InvalidFamily(
            "at least one margin is required".into(),
        ));
    }
    for (axis, m) in margins.iter().enumerate() {
        if !m.is_cdf() {
            return Err(Error::NotCdf {
                axis,
                lo: Box::new(m.lower_limit().clone()),
                hi: Box::new(m.upper_limit().clone()),
            });
        }
    }
    Ok(())
}

impl MultivariateDf {
    /// `F(t) = #{rows <= t} / n`. Duplicate rows simply add their weight.
    pub fn empirical(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = rows
            .first()
            .ok_or_else(|| Error::InvalidFamily("empirical df needs at least one row".into()))?
            .len();
        if dim == 0 {
            return Err(Error::InvalidFamily(
                "rows must have at least one column".into(),
            ));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: dim,
                found: r.len(),
            });
        }
        Ok(MultivariateDf {
            dim,
            family: Family::Empirical { rows },
        })
    }

    /// Independence: `F(t) = F_1(t_1) * ... * F_d(t_d)`.
    pub fn product(margins: Vec<MonotoneFn>) -> Result<Self> {
        check_cdf_margins(&margins)?;
        Ok(MultivariateDf {
            dim: margins.len(),
            family: Family::Product { margins },
        })
    }

    /// Upper bound: `F(t) = min_i F_i(t_i)`.
    pub fn comonotone(margins: Vec<MonotoneFn>) -> Result<Self> {
        check_cdf_margins(&margins)?;
        Ok(MultivariateDf {
            dim: margins.len(),
            family: Family::Comonotone { margins },
        })
    }

    /// Lower bound `F(t) = max(F_1(t_1) + F_2(t_2) - 1, 0)`; a df only for `d = 2`.
    pub fn countermonotone(margins: Vec<MonotoneFn>) -> Result<Self> {
        if margins.len() != 2 {
            return Err(Error::InvalidFamily(format!(
                "countermonotone df exists only in dimension 2, got {}",
                margins.len()
            )));
        }
        check_cdf_margins(&margins)?;
        Ok(MultivariateDf {
            dim: 2,
            family: Family::Countermonotone { margins },
        })
    }

    /// `F(t) = sum of masses at support points <= t`.
    pub fn grid(masses: Vec<GridMass>) -> Result<Self> {
        let dim = masses
            .first()
            .ok_or_else(|| Error::InvalidFamily("grid df needs at least one mass".into()))?
            .point
            .len();
        if dim == 0 {
            return Err(Error::InvalidFamily(
                "support points need at least one coordinate".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, m) in masses.iter().enumerate() {
            if m.point.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.point.len(),
                });
            }
            if m.mass.is_negative() {
                return Err(Error::InvalidFamily(format!(
                    "mass {i} is negative: {}",
                    m.mass
                )));
            }
            if !seen.insert(&m.point) {
                return Err(Error::InvalidFamily(format!(
                    "mass {i} repeats support point {:?}",
                    m.point
                )));
            }
        }
        let total: Scalar = masses.iter().map(|m| &m.mass).sum();
        if total != Scalar::one() {
            return Err(Error::InvalidFamily(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(MultivariateDf {
            dim,
            family: Family::Grid { masses },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::Knot;
    use crate::mvdf::{check_df_axioms, volume, Cuboid, DistributionFunction};
    use crate::scalar::{q, ExtScalar};

    fn unif() -> MonotoneFn {
        MonotoneFn::new(vec![
            Knot::continuous(q(0, 1), q(0, 1)),
            Knot::continuous(q(1, 1), q(1, 1)),
        ])
        .unwrap()
    }

    fn bern() -> MonotoneFn {
        MonotoneFn::new(vec![
            Knot::new(q(0, 1), q(0, 1), q(1, 2)),
            Knot::new(q(1, 1), q(1, 2), q(1, 1)),
        ])
        .unwrap()
    }

    fn at(f: &MultivariateDf, t: &[Scalar]) -> Scalar {
        let t: Vec<ExtScalar> = t.iter().map(ExtScalar::from).collect();
        f.eval(&t).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let f = MultivariateDf::empirical(vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]])
            .unwrap();
        assert_eq!(at(&f, &[q(1, 2), q(1, 2)]), q(1, 2));
        let step = MultivariateDf::empirical(vec![vec![q(0, 1)]]).unwrap();
        assert_eq!(at(&step, &[q(-1, 100)]), q(0, 1));
        assert_eq!(at(&step, &[q(0, 1)]), q(1, 1));
        let dup = MultivariateDf::empirical(vec![vec![q(0, 1), q(0, 1)]; 2]).unwrap();
        assert_eq!(at(&dup, &[q(0, 1), q(0, 1)]), q(1, 1));
        assert!(MultivariateDf::empirical(vec![]).is_err());
        assert!(matches!(
            MultivariateDf::empirical(vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1)]]),
            Err(Error::RaggedRow {
                row: 2,
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn product_examples() {
        let f = MultivariateDf::product(vec![unif(), unif()]).unwrap();
        assert_eq!(at(&f, &[q(1, 2), q(1, 2)]), q(1, 4));
        let f = MultivariateDf::product(vec![bern(), bern()]).unwrap();
        assert_eq!(at(&f, &[q(1, 2), q(1, 2)]), q(1, 4));
        let f = MultivariateDf::product(vec![unif()]).unwrap();
        assert_eq!(at(&f, &[q(2, 7)]), q(2, 7));
        let half = MonotoneFn::new(vec![Knot::new(q(0, 1), q(0, 1), q(1, 2))]).unwrap();
        assert!(matches!(
            MultivariateDf::product(vec![unif(), half]),
            Err(Error::NotCdf { axis: 1, .. })
        ));
    }

    #[test]
    fn comonotone_examples() {
        let f = MultivariateDf::comonotone(vec![unif(), unif()]).unwrap();
        assert_eq!(at(&f, &[q(3, 10), q(7, 10)]), q(3, 10));
        let f = MultivariateDf::comonotone(vec![bern(), bern()]).unwrap();
        assert_eq!(at(&f, &[q(1, 2), q(1, 2)]), q(1, 2));
        let f = MultivariateDf::comonotone(vec![unif(), unif(), unif()]).unwrap();
        let c = Cuboid::from_finite(&vec![q(1, 5); 3], &vec![q(3, 5); 3]).unwrap();
        // 8-corner sum: 0.6 - 3*0.2 + 3*0.2 - 0.2
        assert_eq!(volume(&f, &c).unwrap(), q(2, 5));
    }

    #[test]
    fn comonotone_kink_below_probe_step() {
        // min(1/8, h) along axis 1 at (0, -1): constant for the first probes
        let m1 = MonotoneFn::new(vec![
            Knot::new(q(0, 1), q(0, 1), q(1, 8)),
            Knot::new(q(1, 4), q(1, 8), q(1, 1)),
        ])
        .unwrap();
        let m2 = MonotoneFn::new(vec![
            Knot::continuous(q(-1, 1), q(0, 1)),
            Knot::continuous(q(0, 1), q(1, 1)),
            Knot::continuous(q(7, 4), q(1, 1)),
        ])
        .unwrap();
        let f = MultivariateDf::comonotone(vec![m1, m2]).unwrap();
        assert!(check_df_axioms(&f, 20, 7).pass);
    }

    #[test]
    fn countermonotone_examples() {
        let f = MultivariateDf::countermonotone(vec![unif(), unif()]).unwrap();
        assert_eq!(at(&f, &[q(7, 10), q(7, 10)]), q(2, 5));
        assert_eq!(at(&f, &[q(3, 10), q(3, 10)]), q(0, 1));
        assert!(MultivariateDf::countermonotone(vec![unif(), unif(), unif()]).is_err());
        assert!(MultivariateDf::countermonotone(vec![unif()]).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = MultivariateDf::grid(vec![
            GridMass::new(vec![q(0, 1), q(0, 1)], q(1, 2)),
            GridMass::new(vec![q(1, 1), q(1, 1)], q(1, 2)),
        ])
        .unwrap();
        let e = MultivariateDf::empirical(vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]])
            .unwrap();
        for i in -2..6 {
            for j in -2..6 {
                let t = [q(i, 3), q(j, 3)];
                assert_eq!(at(&g, &t), at(&e, &t));
            }
        }
        let anti = MultivariateDf::grid(vec![
            GridMass::new(vec![q(0, 1), q(1, 1)], q(1, 2)),
            GridMass::new(vec![q(1, 1), q(0, 1)], q(1, 2)),
        ])
        .unwrap();
        assert_eq!(at(&anti, &[q(1, 2), q(1, 2)]), q(0, 1));
        let point =
            MultivariateDf::grid(vec![GridMass::new(vec![q(0, 1), q(0, 1)], q(1, 1))]).unwrap();
        assert_eq!(at(&point, &[q(0, 1), q(0, 1)]), q(1, 1));
    }

    #[test]
    fn grid_rejections() {
        assert!(MultivariateDf::grid(vec![GridMass::new(vec![q(0, 1)], q(1, 2))]).is_err());
        assert!(MultivariateDf::grid(vec![
            GridMass::new(vec![q(0, 1)], q(3, 2)),
            GridMass::new(vec![q(1, 1)], q(-1, 2)),
        ])
        .is_err());
        assert!(MultivariateDf::grid(vec![
            GridMass::new(vec![q(0, 1)], q(1, 2)),
            GridMass::new(vec![q(0, 1)], q(1, 2)),
        ])
        .is_err());
    }

    #[test]
    fn grid_margin_accumulates_along_axis() {
        let g = MultivariateDf::grid(
            [(0, 0), (0, 1), (1, 0), (1, 1)]
                .iter()
                .map(|&(a, b)| GridMass::new(vec![q(a, 1), q(b, 1)], q(1, 4)))
                .collect(),
        )
        .unwrap();
        assert_eq!(g.margin(1).unwrap(), bern());
        assert_eq!(g.margin(0).unwrap(), bern());
    }

    #[test]
    fn stored_margins_are_returned() {
        for f in [
            MultivariateDf::product(vec![unif(), bern()]).unwrap(),
            MultivariateDf::comonotone(vec![unif(), bern()]).unwrap(),
            MultivariateDf::countermonotone(vec![unif(), bern()]).unwrap(),
        ] {
            assert_eq!(f.margin(0).unwrap(), unif());
            assert_eq!(f.margin(1).unwrap(), bern());
            assert!(check_df_axioms(&f, 50, 3).pass, "{}", f.family_name());
        }
    }
}
