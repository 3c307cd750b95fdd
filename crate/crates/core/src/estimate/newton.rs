use super::{check_weight_margins, effective_weights, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::model::{normalize, ContingencyTable, Design, JSet, ThetaVector};
use crate::scalar::{max_abs, pairwise_sum, Real};

#[derive(Clone, Debug)]
pub struct NewtonFit<T> {
    pub theta: ThetaVector<T>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Objective value, gradient and (when requested) the negated Hessian.
pub(crate) struct Evaluation<T> {
    pub value: T,
    pub gradient: Vec<T>,
    pub curvature: Option<Matrix<T>>,
}

/// Damped Newton ascent on a concave objective starting from zero.
pub(crate) fn damped_newton<T, F>(
    dim: usize,
    cfg: &SolverConfig,
    mut eval: F,
) -> Result<(Vec<T>, usize, f64)>
where
    T: Real,
    F: FnMut(&[T], bool) -> Evaluation<T>,
{
    let mut theta = vec![T::zero(); dim];
    let mut current = eval(&theta, true);
    let tol = T::lit(cfg.newton_tolerance);
    let limit = T::lit(cfg.divergence_threshold);
    for iteration in 0..cfg.newton_max_iterations {
        let gnorm = max_abs(&current.gradient);
        if gnorm < tol {
            return Ok((theta, iteration, gnorm.as_f64()));
        }
        let curvature = current.curvature.take().expect("curvature requested");
        let step = Cholesky::new(&curvature)?.solve(&current.gradient);
        let slack = T::lit(1e-12) * T::one().max(current.value.abs());
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..=50 {
            let candidate: Vec<T> = theta.iter().zip(&step).map(|(&t, &s)| t + alpha * s).collect();
            let trial = eval(&candidate, false);
            if trial.value >= current.value - slack {
                accepted = Some(candidate);
                break;
            }
            alpha /= T::lit(2.0);
        }
        let Some(next) = accepted else {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual: gnorm.as_f64(),
                vertex: None,
            });
        };
        theta = next;
        if max_abs(&theta) > limit {
            return Err(Error::nonexistence(format!(
                "parameter magnitude exceeded {} during Newton iterations",
                cfg.divergence_threshold
            )));
        }
        current = eval(&theta, true);
    }
    Err(Error::NonConvergence {
        iterations: cfg.newton_max_iterations,
        residual: max_abs(&current.gradient).as_f64(),
        vertex: None,
    })
}

/// Global maximum likelihood by damped Newton on `⟨θ, t⟩/N − k(θ)`.
pub fn newton_mle<T: Real>(
    table: &ContingencyTable,
    jset: &JSet,
    cfg: &SolverConfig,
) -> Result<NewtonFit<T>> {
    cfg.validate()?;
    if table.space().levels() != jset.space().levels() {
        return Err(Error::usage("table and J-set live on different spaces"));
    }
    let design = Design::new(jset)?;
    let weights = effective_weights::<T>(table, cfg.epsilon_smoothing)?;
    check_weight_margins(table.space(), &weights, jset.generating_class()?.maximal_sets())?;
    newton_with_design(&design, &weights, cfg)
}

/// Newton fit against nonnegative cell weights using a prebuilt design.
pub fn newton_with_design<T: Real>(
    design: &Design,
    weights: &[T],
    cfg: &SolverConfig,
) -> Result<NewtonFit<T>> {
    if weights.len() != design.cells() {
        return Err(Error::usage("weight vector does not match the design"));
    }
    let total = pairwise_sum(weights);
    if !(total > T::zero()) {
        return Err(Error::domain("cannot fit an empty table"));
    }
    let targets: Vec<T> = design.moments(weights).into_iter().map(|t| t / total).collect();
    let (theta, iterations, gradient_norm) = damped_newton(design.params(), cfg, |theta, hess| {
        let (k, p) = normalize(&design.energies(theta));
        let mu = design.moments(&p);
        let value = theta.iter().zip(&targets).map(|(&a, &b)| a * b).sum::<T>() - k;
        let gradient = targets.iter().zip(&mu).map(|(&t, &m)| t - m).collect();
        let curvature = hess.then(|| {
            let mut h = design.second_moments(&p);
            for a in 0..mu.len() {
                for b in 0..mu.len() {
                    h[(a, b)] -= mu[a] * mu[b];
                }
            }
            h
        });
        Evaluation {
            value,
            gradient,
            curvature,
        }
    })?;
    let (k, _) = normalize(&design.energies(&theta));
    Ok(NewtonFit {
        theta: ThetaVector::new(theta, Some(-k))?,
        iterations,
        gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_jset, theta_from_p, CellSpace, GeneratingClass, ProbabilityVector};

    #[test]
    fn single_vertex_logit() {
        let space = CellSpace::binary(1).unwrap();
        let jset = build_jset(&space, &GeneratingClass::singletons(1)).unwrap();
        let table = ContingencyTable::from_dense(space, vec![2, 6]).unwrap();
        let fit = newton_mle::<f64>(&table, &jset, &SolverConfig::default()).unwrap();
        assert!((fit.theta.get(0) - 3f64.ln()).abs() < 1e-12);
        assert!((fit.theta.theta0().unwrap() - 0.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn saturated_fit_is_empirical_mobius() {
        let space = CellSpace::new(vec![2, 3]).unwrap();
        let jset = JSet::saturated(space.clone()).unwrap();
        let counts = vec![3, 1, 4, 1, 5, 9];
        let table = ContingencyTable::from_dense(space.clone(), counts.clone()).unwrap();
        let fit = newton_mle::<f64>(&table, &jset, &SolverConfig::default()).unwrap();
        let p = ProbabilityVector::from_weights(space, counts.iter().map(|&c| c as f64).collect())
            .unwrap();
        let want = theta_from_p(&p, &jset).unwrap();
        for k in 0..jset.len() {
            assert!((fit.theta.get(k) - want.get(k)).abs() < 1e-8);
        }
    }

    #[test]
    fn separated_data_is_nonexistence() {
        let space = CellSpace::binary(1).unwrap();
        let jset = build_jset(&space, &GeneratingClass::singletons(1)).unwrap();
        let table = ContingencyTable::from_dense(space, vec![0, 6]).unwrap();
        let err = newton_mle::<f64>(&table, &jset, &SolverConfig::default()).unwrap_err();
        assert!(err.is_nonexistence(), "{err}");
    }
}
