//! Deterministic Nelder-Mead simplex minimizer.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// Relative spread of function values at which the search stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fresh-simplex restarts from the best point after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            tolerance: 1e-8,
            max_iterations: 5000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best function value after each iteration.
    pub trace: Vec<f64>,
}

fn converged(values: &[f64], tol: f64) -> bool {
    let best = values[0];
    let worst = values[values.len() - 1];
    if !best.is_finite() || !worst.is_finite() {
        return false;
    }
    (worst - best).abs() <= tol * (best.abs() + tol)
}

/// Minimizes `f` starting from `x0`. Non-finite values are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let dim = x0.len();
    if dim == 0 {
        let fx = eval(x0);
        return NelderMeadResult {
            x: Vec::new(),
            fx,
            iterations: 0,
            converged: true,
            trace: vec![fx],
        };
    }

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut is_converged = false;

    for round in 0..=cfg.restarts {
        let mut simplex: Vec<Vec<f64>> = vec![best_x.clone()];
        for i in 0..dim {
            let mut v = best_x.clone();
            v[i] += cfg.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
        let start_f = best_f;
        let mut round_converged = false;

        while iterations < cfg.max_iterations {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if converged(&values, cfg.tolerance) {
                round_converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
            } else if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
            } else {
                let (contracted, fc) = if fr < values[dim] {
                    let c = along(-0.5);
                    let fc = eval(&c);
                    (c, fc)
                } else {
                    let c = along(0.5);
                    let fc = eval(&c);
                    (c, fc)
                };
                if fc < values[dim].min(fr) {
                    simplex[dim] = contracted;
                    values[dim] = fc;
                } else {
                    let best = simplex[0].clone();
                    for i in 1..=dim {
                        simplex[i] = best
                            .iter()
                            .zip(&simplex[i])
                            .map(|(b, v)| b + 0.5 * (v - b))
                            .collect();
                        values[i] = eval(&simplex[i]);
                    }
                }
            }

            let (idx, &fmin) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty simplex");
            if fmin < best_f {
                best_f = fmin;
                best_x = simplex[idx].clone();
            }
            trace.push(best_f);
        }

        if !round_converged {
            break;
        }
        let improvement = start_f - best_f;
        if round > 0 && improvement <= cfg.tolerance * (best_f.abs() + cfg.tolerance) {
            is_converged = true;
            break;
        }
        is_converged = true;
    }

    NelderMeadResult {
        x: best_x,
        fx: best_f,
        iterations,
        converged: is_converged && best_f.is_finite(),
        trace,
    }
}
