//! Placement plans and delivery schedules.
//!
//! Two coded operating points are built here, both at cache size `M = 1/K`:
//!
//! * `K = N`: each file is split into `N` parts and user `j` caches the XOR
//!   of part `j` of every file. A permutation demand is answered by sending
//!   every requested part except the one the requester can peel off its own
//!   cache, `N(N - 1)` subfiles in total.
//! * `K > N`: each file is split into `NK` parts and user `i` caches `N`
//!   XORs, covering parts `N(i-1)+1 ..= N(i-1)+N`. Step 1 sends the other
//!   files' parts in each user's block; Step 2 chains the blocks of users
//!   asking for the same file, `(K - 1)N²` symbols in total.
//!
//! Whenever fewer than `N` distinct files are requested the requested files
//! are sent whole, for a rate equal to the number of distinct files.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::gf2::{Gf2Combo, SubfileId};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Server and user population together with the per-user cache size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ProblemInstance {
    n_files: usize,
    n_users: usize,
    cache_size: Rational,
    parts: usize,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    k: usize,
    #[serde(with = "rational::as_str")]
    m: Rational,
    parts: usize,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let inst = ProblemInstance::new(raw.n, raw.k, raw.m)?;
        if inst.parts != raw.parts {
            return Err(Error::InvalidInstance(format!(
                "parts = {} but N = {}, K = {} requires {}",
                raw.parts, raw.n, raw.k, inst.parts
            )));
        }
        Ok(inst)
    }
}

impl From<ProblemInstance> for RawInstance {
    fn from(inst: ProblemInstance) -> Self {
        RawInstance {
            n: inst.n_files,
            k: inst.n_users,
            m: inst.cache_size,
            parts: inst.parts,
        }
    }
}

/// Which construction a [`ProblemInstance`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// `M = 0`: nothing cached, everything sent uncoded.
    Uncached,
    /// `K = N`, `M = 1/N`.
    EqualUsers,
    /// `K > N`, `M = 1/K`.
    MoreUsers,
    /// `0 < M < 1/K`: reachable only by memory sharing between the two above.
    Shared,
}

impl ProblemInstance {
    pub fn new(n_files: usize, n_users: usize, cache_size: Rational) -> Result<Self> {
        if n_files == 0 {
            return Err(Error::InvalidInstance("N must be at least 1".into()));
        }
        if n_users < n_files {
            return Err(Error::InvalidInstance(format!(
                "K = {n_users} is smaller than N = {n_files}"
            )));
        }
        let hi = Rational::new(1, n_users as i64);
        if cache_size < Rational::zero() || cache_size > hi {
            return Err(Error::CacheSizeOutOfRange {
                m: cache_size,
                lo: Rational::zero(),
                hi,
            });
        }
        let parts = if n_users == n_files {
            n_files
        } else {
            n_files * n_users
        };
        Ok(ProblemInstance {
            n_files,
            n_users,
            cache_size,
            parts,
        })
    }

    /// The coded operating point, `M = 1/K`.
    pub fn coded(n_files: usize, n_users: usize) -> Result<Self> {
        Self::new(n_files, n_users, Rational::new(1, n_users.max(1) as i64))
    }

    pub fn uncached(n_files: usize, n_users: usize) -> Result<Self> {
        Self::new(n_files, n_users, Rational::zero())
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn cache_size(&self) -> Rational {
        self.cache_size
    }

    /// Subfiles per file.
    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn kind(&self) -> SchemeKind {
        if self.cache_size.is_zero() {
            SchemeKind::Uncached
        } else if self.cache_size < Rational::new(1, self.n_users as i64) {
            SchemeKind::Shared
        } else if self.n_users == self.n_files {
            SchemeKind::EqualUsers
        } else {
            SchemeKind::MoreUsers
        }
    }

    pub fn contains(&self, id: SubfileId) -> bool {
        (1..=self.n_files).contains(&id.file) && (1..=self.parts).contains(&id.part)
    }

    /// Every subfile id, file-major.
    pub fn subfiles(&self) -> impl Iterator<Item = SubfileId> + '_ {
        (1..=self.n_files).flat_map(move |f| (1..=self.parts).map(move |p| SubfileId::new(f, p)))
    }

    fn check_combos<'a>(&self, combos: impl IntoIterator<Item = &'a Gf2Combo>) -> Result<()> {
        for combo in combos {
            if let Some(bad) = combo.terms().iter().find(|id| !self.contains(**id)) {
                return Err(Error::Malformed(format!(
                    "subfile {bad} outside N = {}, P = {}",
                    self.n_files, self.parts
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} K={} M={} P={}",
            self.n_files, self.n_users, self.cache_size, self.parts
        )
    }
}

/// Entry `i` is the 1-based file requested by user `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(requests: Vec<usize>, n_files: usize) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::InvalidDemand("demand vector is empty".into()));
        }
        if let Some((user, &file)) = requests
            .iter()
            .enumerate()
            .find(|(_, &f)| f == 0 || f > n_files)
        {
            return Err(Error::InvalidDemand(format!(
                "user {} requests file {file}, outside 1..={n_files}",
                user + 1
            )));
        }
        Ok(DemandVector(requests))
    }

    /// Parses `"1,2,3,1"` and checks entries against `n_files`.
    pub fn parse(text: &str, n_files: usize) -> Result<Self> {
        let requests = text
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidDemand(format!("bad file index {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(requests, n_files)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn n_users(&self) -> usize {
        self.0.len()
    }

    /// File requested by 1-based `user`.
    pub fn file_of(&self, user: usize) -> usize {
        self.0[user - 1]
    }

    /// Distinct requested files, ascending. Its length is `L`.
    pub fn distinct_files(&self) -> Vec<usize> {
        let mut files = self.0.clone();
        files.sort_unstable();
        files.dedup();
        files
    }

    /// Users (1-based, ascending) requesting `file`. Its length is `k_file`.
    pub fn requesters(&self, file: usize) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == file)
            .map(|(u, _)| u + 1)
            .collect()
    }

    fn check_for(&self, inst: &ProblemInstance) -> Result<()> {
        if self.n_users() != inst.n_users {
            return Err(Error::InvalidDemand(format!(
                "demand has {} entries but K = {}",
                self.n_users(),
                inst.n_users
            )));
        }
        DemandVector::new(self.0.clone(), inst.n_files).map(|_| ())
    }
}

impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for DemandVector {
    type Err = Error;

    /// Parses without an upper bound on file indices; use
    /// [`DemandVector::parse`] when `N` is known.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, usize::MAX)
    }
}

/// Cache contents of every user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub instance: ProblemInstance,
    /// `caches[u]` holds the combos stored by user `u + 1`.
    pub caches: Vec<Vec<Gf2Combo>>,
}

impl PlacementPlan {
    pub fn cache(&self, user: usize) -> &[Gf2Combo] {
        &self.caches[user - 1]
    }

    /// Fraction of a file each user stores, the largest over users.
    pub fn max_cache_load(&self) -> Rational {
        self.caches
            .iter()
            .map(|c| Rational::new(c.len() as i64, self.instance.parts as i64))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: PlacementPlan =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let inst = &self.instance;
        if self.caches.len() != inst.n_users {
            return Err(Error::Malformed(format!(
                "plan has {} caches but K = {}",
                self.caches.len(),
                inst.n_users
            )));
        }
        inst.check_combos(self.caches.iter().flatten())?;
        if self.max_cache_load() > inst.cache_size {
            return Err(Error::Malformed(format!(
                "a cache holds {} of a file, over the budget M = {}",
                self.max_cache_load(),
                inst.cache_size
            )));
        }
        Ok(())
    }
}

/// Broadcast symbols answering one demand vector, in transmission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct DeliverySchedule {
    pub instance: ProblemInstance,
    pub demand: DemandVector,
    pub transmissions: Vec<Gf2Combo>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    instance: ProblemInstance,
    demand: DemandVector,
    #[serde(with = "rational::as_str")]
    rate: Rational,
    transmissions: Vec<Gf2Combo>,
}

impl TryFrom<RawSchedule> for DeliverySchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        let schedule = DeliverySchedule {
            instance: raw.instance,
            demand: raw.demand,
            transmissions: raw.transmissions,
        };
        schedule.demand.check_for(&schedule.instance)?;
        schedule.instance.check_combos(&schedule.transmissions)?;
        if schedule.rate() != raw.rate {
            return Err(Error::Malformed(format!(
                "stated rate {} disagrees with {} transmissions over P = {}",
                raw.rate,
                schedule.len(),
                schedule.instance.parts
            )));
        }
        Ok(schedule)
    }
}

impl From<DeliverySchedule> for RawSchedule {
    fn from(s: DeliverySchedule) -> Self {
        RawSchedule {
            rate: s.rate(),
            instance: s.instance,
            demand: s.demand,
            transmissions: s.transmissions,
        }
    }
}

impl DeliverySchedule {
    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn rate(&self) -> Rational {
        schedule_rate(self)
    }

    /// Copy with transmission `index` removed.
    pub fn without(&self, index: usize) -> DeliverySchedule {
        let mut out = self.clone();
        out.transmissions.remove(index);
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

/// Transmissions divided by parts per file; every symbol is one subfile long.
pub fn schedule_rate(schedule: &DeliverySchedule) -> Rational {
    Rational::new(
        schedule.transmissions.len() as i64,
        schedule.instance.parts as i64,
    )
}

/// Placement for `K = N`: user `j` caches `W[1,j] + ... + W[N,j]`.
pub fn place_equal_users(n_files: usize) -> Result<PlacementPlan> {
    let instance = ProblemInstance::coded(n_files, n_files)?;
    let caches = (1..=n_files)
        .map(|j| vec![(1..=n_files).map(|f| SubfileId::new(f, j)).collect()])
        .collect();
    Ok(PlacementPlan { instance, caches })
}

/// Placement for `K > N`: user `i` caches, for `j = 1..=N`, the XOR over
/// all files of part `N(i-1)+j`.
pub fn place_more_users(n_files: usize, n_users: usize) -> Result<PlacementPlan> {
    if n_users <= n_files {
        return Err(Error::InvalidInstance(format!(
            "this placement needs K > N, got N = {n_files}, K = {n_users}"
        )));
    }
    let instance = ProblemInstance::coded(n_files, n_users)?;
    let n = n_files;
    let caches = (1..=n_users)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    (1..=n)
                        .map(|f| SubfileId::new(f, n * (i - 1) + j))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(PlacementPlan { instance, caches })
}

/// Placement for any supported instance: empty caches at `M = 0`, the coded
/// placement at `M = 1/K`.
pub fn place(instance: &ProblemInstance) -> Result<PlacementPlan> {
    match instance.kind() {
        SchemeKind::Uncached => Ok(PlacementPlan {
            instance: *instance,
            caches: vec![Vec::new(); instance.n_users],
        }),
        SchemeKind::EqualUsers => place_equal_users(instance.n_files),
        SchemeKind::MoreUsers => place_more_users(instance.n_files, instance.n_users),
        SchemeKind::Shared => Err(Error::InvalidInstance(format!(
            "M = {} lies strictly between 0 and 1/K; it is reached by memory sharing, not by a single plan",
            instance.cache_size
        ))),
    }
}

/// Dispatches to the delivery matching the plan's instance.
pub fn deliver(plan: &PlacementPlan, demand: &DemandVector) -> Result<DeliverySchedule> {
    match plan.instance.kind() {
        SchemeKind::Uncached => {
            demand.check_for(&plan.instance)?;
            Ok(uncoded(&plan.instance, demand))
        }
        SchemeKind::EqualUsers => deliver_equal_users(plan, demand),
        SchemeKind::MoreUsers => deliver_more_users(plan, demand),
        SchemeKind::Shared => Err(Error::PlanMismatch(
            "no delivery for a memory-shared cache size".into(),
        )),
    }
}

fn uncoded(instance: &ProblemInstance, demand: &DemandVector) -> DeliverySchedule {
    let transmissions = demand
        .distinct_files()
        .into_iter()
        .flat_map(|f| (1..=instance.parts).map(move |p| Gf2Combo::singleton(SubfileId::new(f, p))))
        .collect();
    DeliverySchedule {
        instance: *instance,
        demand: demand.clone(),
        transmissions,
    }
}

pub fn deliver_equal_users(
    plan: &PlacementPlan,
    demand: &DemandVector,
) -> Result<DeliverySchedule> {
    let inst = plan.instance;
    if inst.kind() != SchemeKind::EqualUsers {
        return Err(Error::PlanMismatch(format!(
            "expected K = N with M = 1/N, got {inst}"
        )));
    }
    if *plan != place_equal_users(inst.n_files)? {
        return Err(Error::PlanMismatch(
            "caches differ from the K = N placement".into(),
        ));
    }
    demand.check_for(&inst)?;
    let n = inst.n_files;
    if demand.distinct_files().len() < n {
        return Ok(uncoded(&inst, demand));
    }
    // Demand is a permutation: user i recovers part i of its file from Z_i.
    let transmissions = (1..=n)
        .flat_map(|user| {
            let file = demand.file_of(user);
            (1..=n)
                .filter(move |&part| part != user)
                .map(move |part| Gf2Combo::singleton(SubfileId::new(file, part)))
        })
        .collect();
    Ok(DeliverySchedule {
        instance: inst,
        demand: demand.clone(),
        transmissions,
    })
}

pub fn deliver_more_users(plan: &PlacementPlan, demand: &DemandVector) -> Result<DeliverySchedule> {
    let inst = plan.instance;
    if inst.kind() != SchemeKind::MoreUsers {
        return Err(Error::PlanMismatch(format!(
            "expected K > N with M = 1/K, got {inst}"
        )));
    }
    if *plan != place_more_users(inst.n_files, inst.n_users)? {
        return Err(Error::PlanMismatch(
            "caches differ from the K > N placement".into(),
        ));
    }
    demand.check_for(&inst)?;
    let n = inst.n_files;
    if demand.distinct_files().len() < n {
        return Ok(uncoded(&inst, demand));
    }
    let block = |user: usize, j: usize| n * (user - 1) + j;

    let mut transmissions = Vec::with_capacity((inst.n_users - 1) * n * n);
    // Step 1: every file but the requested one, over each user's cache block.
    for user in 1..=inst.n_users {
        let wanted = demand.file_of(user);
        for file in (1..=n).filter(|&f| f != wanted) {
            for j in 1..=n {
                transmissions.push(Gf2Combo::singleton(SubfileId::new(file, block(user, j))));
            }
        }
    }
    debug_assert_eq!(transmissions.len(), (n - 1) * n * inst.n_users);
    // Step 2: chain the blocks of consecutive requesters of the same file.
    for file in 1..=n {
        let group = demand.requesters(file);
        for pair in group.windows(2) {
            for j in 1..=n {
                transmissions.push(
                    [
                        SubfileId::new(file, block(pair[0], j)),
                        SubfileId::new(file, block(pair[1], j)),
                    ]
                    .into_iter()
                    .collect(),
                );
            }
        }
    }
    debug_assert!({
        let mut seen = transmissions.clone();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    });
    Ok(DeliverySchedule {
        instance: inst,
        demand: demand.clone(),
        transmissions,
    })
}
