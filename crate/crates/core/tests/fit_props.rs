//! Checks the stochastic parameter fitter against an exact linear
//! least-squares oracle: on models that are linear in their parameters the
//! evolutionary search must reach the algebraic optimum, and on models with
//! partial domains it must route around non-finite trial points.

use eqgram::expr::{canonicalize, CanonicalForm, Expression, FuncKind};
use eqgram::fit::{fit_parameters, Dataset, FitConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One entry per basis function: how to build it symbolically and how to
/// evaluate it numerically on an `(x, y)` row.
const BASES: [(fn() -> Expression, fn(f64, f64) -> f64); 6] = [
    (|| Expression::variable("x"), |x, _| x),
    (|| Expression::variable("y"), |_, y| y),
    (
        || Expression::Product(vec![(2, Expression::variable("x"))]),
        |x, _| x * x,
    ),
    (
        || Expression::Function(FuncKind::Sin, Box::new(Expression::variable("x"))),
        |x, _| x.sin(),
    ),
    (
        || {
            Expression::Product(vec![
                (1, Expression::variable("x")),
                (1, Expression::variable("y")),
            ])
        },
        |x, y| x * y,
    ),
    (|| Expression::integer(1), |_, _| 1.0),
];

/// Solves the `k x k` system `m a = b` by Gaussian elimination with partial
/// pivoting. Panics on a singular system; the generated designs are
/// well-conditioned by construction.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-12, "singular normal equations");
        for row in col + 1..k {
            let factor = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= factor * m[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut a = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in col + 1..k {
            acc -= m[col][c] * a[c];
        }
        a[col] = acc / m[col][col];
    }
    a
}

struct Instance {
    form: CanonicalForm,
    dataset: Dataset,
    /// Normalized root-mean-square error at the exact least-squares optimum.
    oracle_error: f64,
}

fn build_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 2 + (rng.gen_range(0..2) as usize);
    let mut pool: Vec<usize> = (0..BASES.len()).collect();
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let chosen = &pool[..k];
    let true_params: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();

    let n_rows = 40;
    let mut rows = Vec::with_capacity(n_rows);
    let mut design = Vec::with_capacity(n_rows);
    let mut target = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let x = rng.gen_range(1.0..5.0);
        let y = rng.gen_range(1.0..5.0);
        let features: Vec<f64> = chosen.iter().map(|&b| (BASES[b].1)(x, y)).collect();
        let noise = rng.gen_range(-0.05..0.05);
        let v: f64 =
            features.iter().zip(&true_params).map(|(f, p)| f * p).sum::<f64>() + noise;
        rows.push(vec![x, y, v]);
        design.push(features);
        target.push(v);
    }

    let terms: Vec<(eqgram::expr::Sign, Expression)> = chosen
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            (
                eqgram::expr::Sign::Plus,
                Expression::Product(vec![(1, Expression::parameter(j)), (1, (BASES[b].0)())]),
            )
        })
        .collect();
    let form = canonicalize(&Expression::Sum(terms));
    assert_eq!(form.n_parameters, k, "instance lost a parameter: {}", form.key);

    let dataset = Dataset::new(
        vec!["x".into(), "y".into(), "v".into()],
        rows,
        "v",
    )
    .unwrap();

    // Normal equations for the least-squares coefficients.
    let mut gram = vec![vec![0.0; k]; k];
    let mut moment = vec![0.0; k];
    for (features, &v) in design.iter().zip(&target) {
        for i in 0..k {
            for j in 0..k {
                gram[i][j] += features[i] * features[j];
            }
            moment[i] += features[i] * v;
        }
    }
    let coeffs = solve(gram, moment);
    for &c in &coeffs {
        assert!(c.abs() < 8.0, "least-squares optimum too close to the box edge");
    }
    let ssr: f64 = design
        .iter()
        .zip(&target)
        .map(|(features, &v)| {
            let predicted: f64 =
                features.iter().zip(&coeffs).map(|(f, c)| f * c).sum();
            (v - predicted) * (v - predicted)
        })
        .sum();
    let sigma = dataset.target_std();
    Instance {
        form,
        dataset,
        oracle_error: (ssr / n_rows as f64).sqrt() / sigma,
    }
}

#[test]
fn evolutionary_fit_matches_linear_least_squares() {
    for seed in 0..20u64 {
        let instance = build_instance(9000 + seed);
        let fit =
            fit_parameters(&instance.form, &instance.dataset, &FitConfig::default()).unwrap();
        let slack = 1e-6 * (1.0 + instance.oracle_error);
        assert!(
            fit.error <= instance.oracle_error + slack,
            "seed {}: fitted {} worse than oracle {} for {}",
            seed,
            fit.error,
            instance.oracle_error,
            instance.form.key
        );
        assert!(
            fit.error >= instance.oracle_error - slack,
            "seed {}: fitted {} below the algebraic optimum {} for {}",
            seed,
            fit.error,
            instance.oracle_error,
            instance.form.key
        );
    }
}

#[test]
fn fitter_handles_partial_domains() {
    // sqrt(C0 - x) is undefined for C0 < x, so much of the search box maps
    // to an infinite score; the fitter must still locate C0 = 6.
    let model = Expression::Function(
        FuncKind::Sqrt,
        Box::new(Expression::Sum(vec![
            (eqgram::expr::Sign::Plus, Expression::parameter(0)),
            (eqgram::expr::Sign::Minus, Expression::variable("x")),
        ])),
    );
    let form = canonicalize(&model);
    assert_eq!(form.key, "sqrt(C0-x)");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rows: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let x: f64 = rng.gen_range(1.0..5.0);
            vec![x, (6.0 - x).sqrt()]
        })
        .collect();
    let dataset = Dataset::new(vec!["x".into(), "v".into()], rows, "v").unwrap();
    let fit = fit_parameters(&form, &dataset, &FitConfig::default()).unwrap();
    assert!(fit.error < 1e-6, "error {} params {:?}", fit.error, fit.params);
    assert!((fit.params[0] - 6.0).abs() < 1e-3);
}

#[test]
fn tighter_budgets_still_reach_the_optimum_on_easy_problems() {
    // The acceptance-style budget: smaller population and generation caps
    // must not change the answer on a two-parameter line.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let x = rng.gen_range(1.0..5.0);
            vec![x, 2.5 * x - 1.25]
        })
        .collect();
    let dataset = Dataset::new(vec!["x".into(), "v".into()], rows, "v").unwrap();
    let model = Expression::Sum(vec![
        (eqgram::expr::Sign::Plus, Expression::parameter(0)),
        (
            eqgram::expr::Sign::Plus,
            Expression::Product(vec![
                (1, Expression::parameter(1)),
                (1, Expression::variable("x")),
            ]),
        ),
    ]);
    let form = canonicalize(&model);
    let config = FitConfig {
        population_factor: 5,
        max_generations: 300,
        stagnation_window: 40,
        target_error: 1e-11,
        ..FitConfig::default()
    };
    let fit = fit_parameters(&form, &dataset, &config).unwrap();
    assert!(fit.error < 1e-9, "error {}", fit.error);
    assert!(fit.converged);
    assert!((fit.params[0] + 1.25).abs() < 1e-4);
    assert!((fit.params[1] - 2.5).abs() < 1e-4);
}
