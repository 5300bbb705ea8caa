//! Nelder–Mead downhill simplex over an unconstrained space.
//!
//! Infeasible points are expressed by returning `f64::INFINITY` from the objective; the
//! simplex never moves its best vertex onto such a point.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Convergence when every vertex is within this max-norm distance of the best one.
    pub diameter_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iter: 5000,
            diameter_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

fn diameter(simplex: &[Vertex]) -> f64 {
    let best = &simplex[0].x;
    simplex[1..]
        .iter()
        .flat_map(|v| v.x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| ai + t * (bi - ai))
        .collect()
}

/// Minimizes `objective` from `start`, building the initial simplex with one axis step per
/// coordinate. Steps landing on infeasible points are halved (up to 30 times).
pub fn minimize<F>(
    mut objective: F,
    start: &[f64],
    steps: &[f64],
    options: &SimplexOptions,
) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    assert_eq!(dim, steps.len(), "one step per coordinate");
    let mut eval = |x: &[f64]| {
        let f = objective(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    };

    let mut simplex = Vec::with_capacity(dim + 1);
    let f0 = eval(start);
    simplex.push(Vertex {
        x: start.to_vec(),
        f: f0,
    });
    for i in 0..dim {
        let mut step = steps[i];
        let mut x = start.to_vec();
        x[i] += step;
        let mut f = eval(&x);
        let mut tries = 0;
        while !f.is_finite() && tries < 30 {
            step *= -0.5;
            x[i] = start[i] + step;
            f = eval(&x);
            tries += 1;
        }
        simplex.push(Vertex { x, f });
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        if diameter(&simplex) < options.diameter_tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        iterations += 1;

        let worst = dim;
        let mut centroid = vec![0.0; dim];
        for v in &simplex[..worst] {
            for (c, xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi / dim as f64;
            }
        }

        let reflected = affine(&centroid, &simplex[worst].x, -REFLECT);
        let fr = eval(&reflected);
        if fr < simplex[0].f {
            let expanded = affine(&centroid, &simplex[worst].x, -EXPAND);
            let fe = eval(&expanded);
            simplex[worst] = if fe < fr {
                Vertex { x: expanded, f: fe }
            } else {
                Vertex {
                    x: reflected,
                    f: fr,
                }
            };
            continue;
        }
        if fr < simplex[worst - 1].f {
            simplex[worst] = Vertex {
                x: reflected,
                f: fr,
            };
            continue;
        }
        let (contracted, fc) = if fr < simplex[worst].f {
            let x = affine(&centroid, &reflected, CONTRACT);
            let f = eval(&x);
            (x, f)
        } else {
            let x = affine(&centroid, &simplex[worst].x, CONTRACT);
            let f = eval(&x);
            (x, f)
        };
        if fc < fr.min(simplex[worst].f) {
            simplex[worst] = Vertex {
                x: contracted,
                f: fc,
            };
            continue;
        }
        let best = simplex[0].x.clone();
        for v in simplex[1..].iter_mut() {
            v.x = affine(&best, &v.x, SHRINK);
            v.f = eval(&v.x);
        }
    }

    let best = simplex.swap_remove(0);
    SimplexOutcome {
        best: best.x,
        value: best.f,
        iterations,
        converged,
    }
}
