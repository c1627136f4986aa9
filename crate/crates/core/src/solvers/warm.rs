use crate::policy::PolicyParams;

#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub theta: PolicyParams,
    pub a: f64,
    pub big_a: f64,
}

/// Initial parameters and step accumulators for a new control step.
///
/// The previous solution is shifted one step forward in time and blended
/// with the prior: `θ₁[t] = (1 − η)·prior[t] + η·θ*[t + 1]` for every slot
/// but the last, which keeps the prior. The step weight interpolates to
/// `a₁ = (1 − η)α + η·a_prv`, and `A₁ = (a₁/2)(a₁/α + 1)` treats `a₁/α` as
/// the number of iterations already done.
pub fn warm_start(theta_star: &PolicyParams, prior: &PolicyParams, a_prv: f64, eta: f64, alpha: f64) -> WarmStart {
    debug_assert!(theta_star.same_shape(prior));
    let dim = prior.action_dim();
    let mut theta = prior.clone();
    {
        let (mu, sigma) = theta.parts_mut();
        let shifted = prior.len() - dim;
        for k in 0..shifted {
            mu[k] = (1.0 - eta) * mu[k] + eta * theta_star.mu()[k + dim];
            sigma[k] = (1.0 - eta) * sigma[k] + eta * theta_star.sigma()[k + dim];
        }
    }
    let a = (1.0 - eta) * alpha + eta * a_prv;
    // (a/2)·((a + α)/α) is exact for a = α
    let big_a = 0.5 * a * ((a + alpha) / alpha);
    WarmStart { theta, a, big_a }
}
