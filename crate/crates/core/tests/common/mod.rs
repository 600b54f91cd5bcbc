#![allow(dead_code)]

use exact_copula::{q, Knot, MonotoneFn, Scalar};
use proptest::prelude::*;

/// Random monotone functions mixing jumps, flats and rising pieces, with
/// knots and levels on denominators up to 100.
pub fn monotone_fn() -> impl Strategy<Value = MonotoneFn> {
    (1usize..6, 1i64..=100, 1i64..=100).prop_flat_map(|(n, xden, yden)| {
        (
            -50i64..50,
            prop::collection::vec(1i64..60, n - 1),
            prop::collection::vec(0i64..=yden, 2 * n),
        )
            .prop_map(move |(x0, gaps, mut levels)| {
                levels.sort();
                let mut x = x0;
                let mut knots = Vec::with_capacity(n);
                for k in 0..n {
                    if k > 0 {
                        x += gaps[k - 1];
                    }
                    knots.push(Knot::new(
                        q(x, xden),
                        q(levels[2 * k], yden),
                        q(levels[2 * k + 1], yden),
                    ));
                }
                MonotoneFn::new(knots).expect("sorted levels give a valid function")
            })
    })
}

/// Knot abscissas, a unit margin on each side, and a fine uniform grid
/// between them.
pub fn x_grid(g: &MonotoneFn, per_gap: i64) -> Vec<Scalar> {
    let knots = g.knots();
    let lo = &knots[0].x - Scalar::one();
    let hi = &knots[knots.len() - 1].x + Scalar::one();
    let steps = per_gap * (knots.len() as i64 + 2);
    let mut xs: Vec<Scalar> = (0..=steps)
        .map(|i| &lo + (&hi - &lo) * q(i, steps))
        .collect();
    xs.extend(knots.iter().map(|k| k.x.clone()));
    xs.sort();
    xs.dedup();
    xs
}

/// Random cdfs with `n` knots; `continuous` forbids jumps.
pub fn cdf_margin(continuous: bool) -> impl Strategy<Value = MonotoneFn> {
    (2usize..5, 1i64..=20).prop_flat_map(move |(n, den)| {
        (
            -10i64..10,
            prop::collection::vec(1i64..8, n - 1),
            prop::collection::vec(0i64..=den, 2 * n - 2),
        )
            .prop_map(move |(x0, gaps, inner)| {
                let mut levels = vec![0];
                levels.extend(inner);
                levels.push(den);
                levels.sort();
                let mut x = x0;
                let knots = (0..n)
                    .map(|k| {
                        if k > 0 {
                            x += gaps[k - 1];
                        }
                        let value = if continuous && k == 0 {
                            q(0, 1)
                        } else {
                            q(levels[2 * k + 1], den)
                        };
                        let left = if continuous {
                            value.clone()
                        } else {
                            q(levels[2 * k], den)
                        };
                        Knot::new(q(x, 4), left, value)
                    })
                    .collect();
                MonotoneFn::new(knots).unwrap()
            })
    })
}

/// Rows of small rationals: quarters in [-2, 2].
pub fn rows(dim: usize, max_rows: usize) -> impl Strategy<Value = Vec<Vec<Scalar>>> {
    prop::collection::vec(prop::collection::vec(-8i64..=8, dim), 1..max_rows).prop_map(|rows| {
        rows.into_iter()
            .map(|r| r.into_iter().map(|v| q(v, 4)).collect())
            .collect()
    })
}
