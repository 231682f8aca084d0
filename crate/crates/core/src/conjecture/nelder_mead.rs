//! Derivative-free Nelder–Mead minimization with an evaluation budget.

/// Standard reflection/expansion/contraction/shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

struct Counted<'a, F: FnMut(&[f64]) -> f64> {
    f: &'a mut F,
    evaluations: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        v
    }
}

/// Minimizes `f` from `x0`, re-seeding a fresh simplex of size `step` around the
/// incumbent whenever the simplex collapses, until `budget` evaluations are spent.
/// The starting point is always evaluated, even with a zero budget.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64, budget: usize) -> Minimum {
    let n = x0.len();
    let mut c = Counted { f: &mut f, evaluations: 0, best: None };
    c.eval(x0);
    let mut center = x0.to_vec();
    let mut scale = step;
    'outer: while c.evaluations < budget {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = c.best.as_ref().map(|(_, v)| *v).unwrap_or(f64::INFINITY);
        simplex.push((center.clone(), f0));
        for i in 0..n {
            if c.evaluations >= budget {
                break 'outer;
            }
            let mut p = center.clone();
            p[i] += scale;
            let v = c.eval(&p);
            simplex.push((p, v));
        }
        loop {
            if c.evaluations >= budget {
                break 'outer;
            }
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (simplex[0].1, simplex[n].1);
            let spread = simplex.iter().skip(1).map(|(p, _)| dist(p, &simplex[0].0)).fold(0.0, f64::max);
            if (hi - lo).abs() <= 1e-15 * (lo.abs() + 1e-300) || spread < 1e-12 {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (p, _) in &simplex[..n] {
                for (c_, x) in centroid.iter_mut().zip(p) {
                    *c_ += x / n as f64;
                }
            }
            let worst = simplex[n].0.clone();
            let reflected = lerp(&centroid, &worst, -ALPHA);
            let fr = c.eval(&reflected);
            if fr < simplex[0].1 {
                if c.evaluations >= budget {
                    simplex[n] = (reflected, fr);
                    break 'outer;
                }
                let expanded = lerp(&centroid, &worst, -GAMMA);
                let fe = c.eval(&expanded);
                simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (reflected, fr);
            } else {
                if c.evaluations >= budget {
                    break 'outer;
                }
                let (target, ft) = if fr < simplex[n].1 { (reflected, fr) } else { (worst, simplex[n].1) };
                let contracted = lerp(&centroid, &target, RHO);
                let fc = c.eval(&contracted);
                if fc < ft {
                    simplex[n] = (contracted, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        if c.evaluations >= budget {
                            break 'outer;
                        }
                        let p = lerp(&best, &item.0, SIGMA);
                        let v = c.eval(&p);
                        *item = (p, v);
                    }
                }
            }
        }
        center = c.best.as_ref().expect("evaluated").0.clone();
        scale *= 0.5;
        if scale < 1e-6 {
            scale = step;
        }
    }
    let (x, value) = c.best.expect("at least one evaluation");
    Minimum { x, value, evaluations: c.evaluations }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
