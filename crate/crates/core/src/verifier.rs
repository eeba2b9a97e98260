//! Decodability certificates and exhaustive peak-rate certification.
//!
//! A user hears every broadcast symbol, so its decoding basis is its own
//! cache followed by the whole schedule. Each requested subfile gets an
//! explicit witness: the basis entries whose XOR is that subfile.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gf2::{Eliminator, Gf2Combo, SubfileId};
use crate::rational::{self, Rational};
use crate::schemes::{
    deliver, place, DeliverySchedule, DemandVector, PlacementPlan, ProblemInstance,
};
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubfileWitness {
    pub subfile: SubfileId,
    /// Indices into the user's cache combos.
    pub cache: Vec<usize>,
    /// Indices into the schedule's transmissions.
    pub transmissions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCertificate {
    pub user: usize,
    pub file: usize,
    pub witnesses: Vec<SubfileWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeCertificate {
    pub instance: ProblemInstance,
    pub demand: DemandVector,
    pub users: Vec<UserCertificate>,
}

impl DecodeCertificate {
    /// Re-derives every witness sum from scratch and checks full coverage.
    pub fn recheck(&self, plan: &PlacementPlan, schedule: &DeliverySchedule) -> Result<()> {
        let parts = self.instance.parts();
        for uc in &self.users {
            let cache = plan.cache(uc.user);
            if uc.witnesses.len() != parts {
                return Err(Error::Malformed(format!(
                    "user {} has {} witnesses, expected {parts}",
                    uc.user,
                    uc.witnesses.len()
                )));
            }
            for (w, part) in uc.witnesses.iter().zip(1..) {
                let target = SubfileId::new(uc.file, part);
                let sum: Gf2Combo = w
                    .cache
                    .iter()
                    .flat_map(|&i| cache[i].terms().iter().copied())
                    .chain(
                        w.transmissions
                            .iter()
                            .flat_map(|&i| schedule.transmissions[i].terms().iter().copied()),
                    )
                    .collect();
                if w.subfile != target || sum != Gf2Combo::singleton(target) {
                    return Err(Error::Undecodable {
                        user: uc.user,
                        subfile: target,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Builds a certificate for every user, or reports the first user (in
/// ascending order) and subfile that cannot be recovered.
pub fn verify_decodability(
    plan: &PlacementPlan,
    schedule: &DeliverySchedule,
    demand: &DemandVector,
) -> Result<DecodeCertificate> {
    let inst = plan.instance;
    if schedule.instance != inst {
        return Err(Error::PlanMismatch(format!(
            "schedule is for {} but plan is for {inst}",
            schedule.instance
        )));
    }
    if demand.n_users() != inst.n_users() || plan.caches.len() != inst.n_users() {
        return Err(Error::InvalidDemand(format!(
            "demand has {} entries, plan has {} caches, K = {}",
            demand.n_users(),
            plan.caches.len(),
            inst.n_users()
        )));
    }

    let mut users = Vec::with_capacity(inst.n_users());
    for user in 1..=inst.n_users() {
        let cache = plan.cache(user);
        let elim = Eliminator::from_basis(cache.iter().chain(&schedule.transmissions), true);
        let file = demand.file_of(user);
        let mut witnesses = Vec::with_capacity(inst.parts());
        for part in 1..=inst.parts() {
            let subfile = SubfileId::new(file, part);
            let sources = elim
                .witness(&Gf2Combo::singleton(subfile))
                .ok_or(Error::Undecodable { user, subfile })?;
            let split = sources.partition_point(|&i| i < cache.len());
            witnesses.push(SubfileWitness {
                subfile,
                cache: sources[..split].to_vec(),
                transmissions: sources[split..].iter().map(|i| i - cache.len()).collect(),
            });
        }
        users.push(UserCertificate {
            user,
            file,
            witnesses,
        });
    }
    Ok(DecodeCertificate {
        instance: inst,
        demand: demand.clone(),
        users,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakRateReport {
    pub instance: ProblemInstance,
    #[serde(with = "rational::as_str")]
    pub peak: Rational,
    /// Demand vectors attaining the peak, lexicographically ascending.
    pub worst_demands: Vec<DemandVector>,
    pub demands_checked: u64,
    /// Demands whose schedule carried a full decodability certificate.
    pub certified: u64,
}

/// Demand vector number `index` in lexicographic order over `1..=n`.
fn demand_at(mut index: u64, n: usize, k: usize) -> Vec<usize> {
    let mut d = vec![1; k];
    for slot in d.iter_mut().rev() {
        *slot = (index % n as u64) as usize + 1;
        index /= n as u64;
    }
    d
}

/// Exhaustive peak rate of the coded scheme at `M = 1/K`, with the default budget.
pub fn peak_rate(n: usize, k: usize) -> Result<PeakRateReport> {
    peak_rate_with_budget(n, k, DEFAULT_ENUMERATION_BUDGET)
}

/// Enumerates all `N^K` demand vectors, delivers and certifies each one.
///
/// Refuses outright when `N^K` exceeds `budget`. Runs on the current rayon
/// pool.
pub fn peak_rate_with_budget(n: usize, k: usize, budget: u128) -> Result<PeakRateReport> {
    let instance = ProblemInstance::coded(n, k)?;
    let needed = u32::try_from(k)
        .ok()
        .and_then(|exp| (n as u128).checked_pow(exp))
        .unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let total = needed as u64;
    let plan = place(&instance)?;

    let (peak, mut worst) = (0..total)
        .into_par_iter()
        .map(|index| -> Result<(Rational, Vec<u64>)> {
            let demand = DemandVector::new(demand_at(index, n, k), n)?;
            let schedule = deliver(&plan, &demand)?;
            verify_decodability(&plan, &schedule, &demand)?;
            Ok((schedule.rate(), vec![index]))
        })
        .try_reduce(
            || (Rational::zero(), Vec::new()),
            |a, b| {
                Ok(match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Greater => a,
                    std::cmp::Ordering::Less => b,
                    std::cmp::Ordering::Equal => {
                        let mut idx = a.1;
                        idx.extend(b.1);
                        (a.0, idx)
                    }
                })
            },
        )?;
    worst.sort_unstable();
    let worst_demands = worst
        .into_iter()
        .map(|i| DemandVector::new(demand_at(i, n, k), n))
        .collect::<Result<_>>()?;
    Ok(PeakRateReport {
        instance,
        peak,
        worst_demands,
        demands_checked: total,
        certified: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::schemes::{place_equal_users, place_more_users};

    fn demand(d: &[usize], n: usize) -> DemandVector {
        DemandVector::new(d.to_vec(), n).unwrap()
    }

    #[test]
    fn three_users_certificate() {
        let plan = place_equal_users(3).unwrap();
        let d = demand(&[1, 2, 3], 3);
        let s = deliver(&plan, &d).unwrap();
        let cert = verify_decodability(&plan, &s, &d).unwrap();
        cert.recheck(&plan, &s).unwrap();
        let a1 = &cert.users[0].witnesses[0];
        assert_eq!(a1.subfile, SubfileId::new(1, 1));
        assert_eq!(a1.cache, vec![0]);
        let used: Vec<&Gf2Combo> = a1
            .transmissions
            .iter()
            .map(|&i| &s.transmissions[i])
            .collect();
        assert_eq!(
            used,
            vec![
                &Gf2Combo::singleton(SubfileId::new(2, 1)),
                &Gf2Combo::singleton(SubfileId::new(3, 1))
            ]
        );
    }

    #[test]
    fn uncoded_schedule_gives_singleton_witnesses() {
        let inst = ProblemInstance::uncached(3, 3).unwrap();
        let plan = place(&inst).unwrap();
        let d = demand(&[1, 2, 3], 3);
        let s = deliver(&plan, &d).unwrap();
        let cert = verify_decodability(&plan, &s, &d).unwrap();
        for uc in &cert.users {
            for w in &uc.witnesses {
                assert!(w.cache.is_empty());
                assert_eq!(w.transmissions.len(), 1);
            }
        }
    }

    #[test]
    fn deleting_c2_breaks_user2_at_b2() {
        let plan = place_equal_users(3).unwrap();
        let d = demand(&[1, 2, 3], 3);
        let s = deliver(&plan, &d).unwrap();
        let c2 = Gf2Combo::singleton(SubfileId::new(3, 2));
        let at = s.transmissions.iter().position(|c| *c == c2).unwrap();
        let err = verify_decodability(&plan, &s.without(at), &d).unwrap_err();
        assert_eq!(
            err,
            Error::Undecodable {
                user: 2,
                subfile: SubfileId::new(2, 2)
            }
        );
        assert!(err.is_verification_failure());
    }

    #[test]
    fn recheck_catches_forged_witness() {
        let plan = place_equal_users(3).unwrap();
        let d = demand(&[1, 2, 3], 3);
        let s = deliver(&plan, &d).unwrap();
        let mut cert = verify_decodability(&plan, &s, &d).unwrap();
        cert.users[0].witnesses[0].transmissions.pop();
        assert!(cert.recheck(&plan, &s).is_err());
    }

    #[test]
    fn demand_enumeration_is_lexicographic() {
        assert_eq!(demand_at(0, 3, 2), vec![1, 1]);
        assert_eq!(demand_at(1, 3, 2), vec![1, 2]);
        assert_eq!(demand_at(3, 3, 2), vec![2, 1]);
        assert_eq!(demand_at(8, 3, 2), vec![3, 3]);
    }

    #[test]
    fn peak_equal_users() {
        let report = peak_rate(3, 3).unwrap();
        assert_eq!(report.peak, int(2));
        assert_eq!(report.demands_checked, 27);
        // the 6 permutations, plus the 18 two-file demands sent uncoded at rate 2
        assert_eq!(report.worst_demands.len(), 24);
        let perms = report
            .worst_demands
            .iter()
            .filter(|d| d.distinct_files().len() == 3)
            .count();
        assert_eq!(perms, 6);
    }

    #[test]
    fn peak_single_file_two_users() {
        let report = peak_rate(1, 2).unwrap();
        assert_eq!(report.peak, rat(1, 2));
        assert_eq!(report.worst_demands, vec![demand(&[1, 1], 1)]);
    }

    #[test]
    fn peak_refuses_over_budget() {
        assert_eq!(
            peak_rate_with_budget(3, 4, 80).unwrap_err(),
            Error::BudgetExceeded {
                needed: 81,
                budget: 80
            }
        );
        assert!(matches!(
            peak_rate(10, 40),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let plan = place_more_users(2, 3).unwrap();
        let other = place_equal_users(2).unwrap();
        let d = demand(&[1, 2], 2);
        let s = deliver(&other, &d).unwrap();
        assert!(matches!(
            verify_decodability(&plan, &s, &demand(&[1, 2, 1], 2)),
            Err(Error::PlanMismatch(_))
        ));
        assert!(verify_decodability(&other, &s, &demand(&[1, 2, 1], 2)).is_err());
    }
}
