use std::collections::BTreeMap;

use num_traits::Zero;

use super::RaiseRule;
use crate::model::{DemandIdx, DemandInstance, EdgeRef, InstanceId};
use crate::rational::Q;

/// Dual variables; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualState {
    pub alpha: BTreeMap<DemandIdx, Q>,
    pub beta: BTreeMap<EdgeRef, Q>,
}

impl DualState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alpha(&self, a: DemandIdx) -> Q {
        self.alpha.get(&a).cloned().unwrap_or_else(Q::zero)
    }

    pub fn beta(&self, e: &EdgeRef) -> Q {
        self.beta.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_alpha(&mut self, a: DemandIdx, x: &Q) {
        *self.alpha.entry(a).or_insert_with(Q::zero) += x;
    }

    pub fn add_beta(&mut self, e: EdgeRef, x: &Q) {
        *self.beta.entry(e).or_insert_with(Q::zero) += x;
    }

    /// `Σ β(e)` over the instance's path.
    pub fn beta_sum(&self, inst: &DemandInstance) -> Q {
        let mut sum = Q::zero();
        for e in &inst.edges {
            if let Some(b) = self.beta.get(e) {
                sum += b;
            }
        }
        sum
    }

    /// Left-hand side of the instance's dual constraint.
    pub fn lhs(&self, inst: &DemandInstance, rule: RaiseRule) -> Q {
        let beta = self.beta_sum(inst);
        let alpha = self.alpha(inst.demand);
        match rule {
            RaiseRule::Unit => alpha + beta,
            RaiseRule::Narrow => alpha + &inst.height * beta,
        }
    }

    /// `Σα + Σβ`.
    pub fn objective(&self) -> Q {
        let mut total = Q::zero();
        for v in self.alpha.values().chain(self.beta.values()) {
            total += v;
        }
        total
    }

    /// Drops explicit zeros so equal states compare equal.
    pub fn normalized(mut self) -> Self {
        self.alpha.retain(|_, v| !v.is_zero());
        self.beta.retain(|_, v| !v.is_zero());
        self
    }
}

/// `p(d)` minus the left-hand side of its dual constraint.
pub fn slackness(inst: &DemandInstance, duals: &DualState, rule: RaiseRule) -> Q {
    &inst.profit - duals.lhs(inst, rule)
}

/// Dual objective before and after dividing by `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub lambda: Q,
    pub objective: Q,
    pub scaled_objective: Q,
}

/// Checks that `(α/λ, β/λ)` satisfies every listed constraint, that is,
/// every left-hand side is at least `λ·p`. Returns the first violator.
pub fn scale_and_check_dual(
    duals: &DualState,
    lambda: &Q,
    instances: &[DemandInstance],
    ids: &[InstanceId],
    rule: RaiseRule,
) -> Result<DualCertificate, InstanceId> {
    for &id in ids {
        let d = &instances[id];
        if duals.lhs(d, rule) < lambda * &d.profit {
            return Err(id);
        }
    }
    let objective = duals.objective();
    Ok(DualCertificate {
        lambda: lambda.clone(),
        scaled_objective: &objective / lambda,
        objective,
    })
}

/// Smallest `lhs / p` over the listed instances; one when there are none.
pub fn min_satisfaction(
    duals: &DualState,
    instances: &[DemandInstance],
    ids: &[InstanceId],
    rule: RaiseRule,
) -> Q {
    ids.iter()
        .map(|&id| duals.lhs(&instances[id], rule) / &instances[id].profit)
        .min()
        .unwrap_or_else(|| Q::from_integer(1.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use crate::rational::q;

    #[test]
    fn fresh_and_partial_slack() {
        let (_, inst) = fixtures::bottleneck_problem([q(1, 1), q(1, 1), q(1, 1)]);
        let mut duals = DualState::new();
        assert_eq!(slackness(&inst[0], &duals, RaiseRule::Unit), q(1, 1));
        duals.add_alpha(0, &q(1, 3));
        duals.add_beta(EdgeRef::new(0, 4, 5), &q(1, 3));
        assert_eq!(slackness(&inst[0], &duals, RaiseRule::Unit), q(1, 3));
        assert_eq!(duals.objective(), q(2, 3));
    }

    #[test]
    fn narrow_form_scales_beta_by_height() {
        let (_, inst) = fixtures::bottleneck_problem([q(2, 5), q(7, 10), q(3, 10)]);
        let mut duals = DualState::new();
        duals.add_beta(EdgeRef::new(0, 4, 5), &q(1, 1));
        assert_eq!(slackness(&inst[0], &duals, RaiseRule::Narrow), q(3, 5));
        assert_eq!(slackness(&inst[0], &duals, RaiseRule::Unit), q(0, 1));
    }
}

#[cfg(test)]
mod certificate_tests {
    use super::*;
    use crate::model::fixtures;
    use crate::rational::q;

    #[test]
    fn scaling_reaches_lambda() {
        let (_, inst) = fixtures::bottleneck_problem([q(1, 1), q(1, 1), q(1, 1)]);
        let mut duals = DualState::new();
        duals.add_beta(EdgeRef::new(0, 4, 5), &q(9, 10));
        let ids = [0, 1, 2];
        assert_eq!(min_satisfaction(&duals, &inst, &ids, RaiseRule::Unit), q(9, 10));
        let cert = scale_and_check_dual(&duals, &q(9, 10), &inst, &ids, RaiseRule::Unit).unwrap();
        assert_eq!(cert.scaled_objective, q(1, 1));
        assert_eq!(
            scale_and_check_dual(&duals, &q(19, 20), &inst, &ids, RaiseRule::Unit),
            Err(0)
        );
    }
}
