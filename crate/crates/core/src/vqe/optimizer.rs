//! Derivative-free minimisers: Nelder–Mead for exact objectives and SPSA
//! for noisy ones.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { reflection: 1.0, expansion: 2.0, contraction: 0.5, shrink: 0.5, initial_step: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spsa {
    pub a: f64,
    pub big_a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for Spsa {
    fn default() -> Self {
        Self { a: 0.1, big_a: 10.0, c: 0.1, alpha: 0.602, gamma: 0.101 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            let s: f64 = simplex[i].iter().zip(&simplex[j]).map(|(a, b)| (a - b).powi(2)).sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

impl NelderMead {
    /// Minimises `f` from `x0`. Stops when the simplex diameter drops below
    /// `tol` (converged) or after `max_evals` evaluations.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], max_evals: usize, tol: f64) -> Result<OptOutcome>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
            *evals += 1;
            f(x)
        };

        let mut simplex = vec![x0.to_vec()];
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values = Vec::with_capacity(n + 1);
        for v in &simplex {
            values.push(eval(v, &mut evals)?);
        }

        let mut history = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        loop {
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
            values = idx.iter().map(|&i| values[i]).collect();
            if iterations > 0 {
                history.push(values[0]);
            }
            if diameter(&simplex) < tol {
                converged = true;
                break;
            }
            if evals >= max_evals {
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
                .collect();
            let toward = |coef: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + coef * (c - w)).collect()
            };

            let xr = toward(self.reflection);
            let fr = eval(&xr, &mut evals)?;
            if fr < values[0] {
                let xe = toward(self.reflection * self.expansion);
                let fe = eval(&xe, &mut evals)?;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = toward(self.reflection * self.contraction);
                let fc = eval(&xc, &mut evals)?;
                (xc, fc)
            } else {
                let xc = toward(-self.contraction);
                let fc = eval(&xc, &mut evals)?;
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=n {
                let v: Vec<f64> = best.iter().zip(&simplex[i]).map(|(b, x)| b + self.shrink * (x - b)).collect();
                values[i] = eval(&v, &mut evals)?;
                simplex[i] = v;
            }
        }
        Ok(OptOutcome {
            x: simplex[0].clone(),
            fx: values[0],
            evaluations: evals,
            iterations,
            converged,
            history,
        })
    }
}

impl Spsa {
    /// Simultaneous-perturbation descent. Converged when a parameter step
    /// is shorter than `tol`. The returned point is the best one seen.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], max_evals: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<OptOutcome>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let mut x = x0.to_vec();
        let mut best_x = x.clone();
        let mut best = f(&x)?;
        let mut evals = 1usize;
        let mut history = Vec::new();
        let mut k = 0usize;
        let mut converged = false;
        while evals + 3 <= max_evals {
            k += 1;
            let ak = self.a / (k as f64 + self.big_a).powf(self.alpha);
            let ck = self.c / (k as f64).powf(self.gamma);
            let delta: Vec<f64> = (0..x.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
            let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
            let diff = f(&plus)? - f(&minus)?;
            if !diff.is_finite() {
                evals += 2;
                continue;
            }
            let mut step2 = 0.0;
            for (v, d) in x.iter_mut().zip(&delta) {
                let s = ak * diff / (2.0 * ck * d);
                *v -= s;
                step2 += s * s;
            }
            let fx = f(&x)?;
            evals += 3;
            if fx < best {
                best = fx;
                best_x = x.clone();
            }
            history.push(best);
            if step2.sqrt() < tol {
                converged = true;
                break;
            }
        }
        Ok(OptOutcome { x: best_x, fx: best, evaluations: evals, iterations: k, converged, history })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rosenbrock(x: &[f64]) -> Result<f64> {
        Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2))
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let out = NelderMead::default().minimize(rosenbrock, &[-1.2, 1.0], 20_000, 1e-10).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nelder_mead_reports_budget_exhaustion() {
        let out = NelderMead::default().minimize(rosenbrock, &[-1.2, 1.0], 30, 1e-12).unwrap();
        assert!(!out.converged);
        assert!(out.evaluations <= 34);
    }

    #[test]
    fn spsa_descends_a_noisy_quadratic() {
        let mut noise = ChaCha8Rng::seed_from_u64(5);
        let f = |x: &[f64]| -> Result<f64> {
            let e: f64 = x.iter().map(|v| (v - 0.3).powi(2)).sum();
            Ok(e + 1e-4 * (noise.random::<f64>() - 0.5))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = Spsa::default().minimize(f, &[1.0, -0.5, 0.8], 6000, 1e-9, &mut rng).unwrap();
        assert!(out.fx < 1e-3, "fx = {}", out.fx);
    }
}
