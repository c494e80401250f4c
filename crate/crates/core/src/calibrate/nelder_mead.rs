use alloc::vec;
use alloc::vec::Vec;

/// Outcome of one Nelder–Mead run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub initial_step: f64,
    pub diameter_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { initial_step: 0.5, diameter_tol: 1e-4, max_evaluations: 600 }
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in simplex {
        for b in simplex {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            worst = worst.max(d);
        }
    }
    libm::sqrt(worst)
}

impl NelderMead {
    /// Minimizes `f` from `start` with standard coefficients
    /// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, start: &[f64]) -> Minimum {
        let n = start.len();
        let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
        for k in 0..n {
            let mut p = start.to_vec();
            p[k] += self.initial_step;
            simplex.push(p);
        }
        let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
        let mut evaluations = n + 1;
        let mut converged = false;
        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
            simplex = order.iter().map(|&k| simplex[k].clone()).collect();
            values = order.iter().map(|&k| values[k]).collect();
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            if evaluations >= self.max_evaluations {
                break;
            }
            let mut centroid = vec![0.0; n];
            for p in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / n as f64;
                }
            }
            let along =
                |coef: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + coef * (c - w)).collect() };
            let reflected = along(1.0);
            let f_r = f(&reflected);
            evaluations += 1;
            if f_r < values[0] {
                let expanded = along(2.0);
                let f_e = f(&expanded);
                evaluations += 1;
                if f_e < f_r {
                    simplex[n] = expanded;
                    values[n] = f_e;
                } else {
                    simplex[n] = reflected;
                    values[n] = f_r;
                }
                continue;
            }
            if f_r < values[n - 1] {
                simplex[n] = reflected;
                values[n] = f_r;
                continue;
            }
            let (contracted, f_c) = if f_r < values[n] {
                let c = along(0.5);
                let v = f(&c);
                (c, v)
            } else {
                let c = along(-0.5);
                let v = f(&c);
                (c, v)
            };
            evaluations += 1;
            if f_c < values[n].min(f_r) {
                simplex[n] = contracted;
                values[n] = f_c;
                continue;
            }
            let best = simplex[0].clone();
            for k in 1..=n {
                let p: Vec<f64> = best.iter().zip(&simplex[k]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                values[k] = f(&p);
                simplex[k] = p;
            }
            evaluations += n;
        }
        Minimum { point: simplex[0].clone(), value: values[0], evaluations, converged }
    }
}
