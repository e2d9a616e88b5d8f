//! Decision variables shared by every solver: placement, caches, association,
//! and the derived per-UAV load.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Structural dimensions a solution must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub uavs: usize,
    pub candidates: usize,
    pub users: usize,
    pub contents: usize,
    /// Per-UAV cache capacity in whole contents.
    pub capacity_items: usize,
}

/// One feasible point of the joint problem. Invariants (checked on
/// construction and kept by the mutating helpers):
///
/// * every UAV occupies exactly one candidate location, no sharing;
/// * every per-UAV cache holds at most `capacity_items` distinct contents;
/// * every user is associated with exactly one UAV;
/// * `load[m]` equals the number of users associated with UAV m.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    deployment: Vec<usize>,
    caches: Vec<BTreeSet<usize>>,
    association: Vec<usize>,
    load: Vec<u32>,
}

impl SolutionState {
    pub fn new(
        deployment: Vec<usize>,
        caches: Vec<BTreeSet<usize>>,
        association: Vec<usize>,
        dims: Dims,
    ) -> Result<Self> {
        let load = loads_of(&association, dims.uavs);
        let state = SolutionState {
            deployment,
            caches,
            association,
            load,
        };
        state.validate(dims)?;
        Ok(state)
    }

    /// Build from dense 0/1 matrices: placement (M x N), caching (M x F),
    /// association (M x K). Rejects anything violating the invariants.
    pub fn from_matrices(
        x: &[Vec<bool>],
        u: &[Vec<bool>],
        a: &[Vec<bool>],
        dims: Dims,
    ) -> Result<Self> {
        if x.len() != dims.uavs || u.len() != dims.uavs || a.len() != dims.uavs {
            return Err(Error::State("matrix row count must equal the UAV count".into()));
        }
        let mut deployment = Vec::with_capacity(dims.uavs);
        for (m, row) in x.iter().enumerate() {
            if row.len() != dims.candidates {
                return Err(Error::State("placement row width mismatch".into()));
            }
            let chosen: Vec<usize> = row
                .iter()
                .enumerate()
                .filter_map(|(n, &set)| set.then_some(n))
                .collect();
            match chosen.as_slice() {
                [n] => deployment.push(*n),
                _ => {
                    return Err(Error::State(format!(
                        "UAV {m} must occupy exactly one location, found {}",
                        chosen.len()
                    )))
                }
            }
        }
        let caches: Vec<BTreeSet<usize>> = u
            .iter()
            .map(|row| {
                if row.len() != dims.contents {
                    return Err(Error::State("cache row width mismatch".into()));
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .filter_map(|(f, &set)| set.then_some(f))
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut association = vec![usize::MAX; dims.users];
        for (m, row) in a.iter().enumerate() {
            if row.len() != dims.users {
                return Err(Error::State("association row width mismatch".into()));
            }
            for (k, &set) in row.iter().enumerate() {
                if set {
                    if association[k] != usize::MAX {
                        return Err(Error::State(format!(
                            "user {k} associated with more than one UAV"
                        )));
                    }
                    association[k] = m;
                }
            }
        }
        if let Some(k) = association.iter().position(|&m| m == usize::MAX) {
            return Err(Error::State(format!("user {k} is not associated")));
        }
        SolutionState::new(deployment, caches, association, dims)
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        if self.deployment.len() != dims.uavs
            || self.caches.len() != dims.uavs
            || self.association.len() != dims.users
        {
            return Err(Error::State("field lengths disagree with the dimensions".into()));
        }
        let mut seen = vec![false; dims.candidates];
        for (m, &n) in self.deployment.iter().enumerate() {
            if n >= dims.candidates {
                return Err(Error::State(format!("UAV {m} placed at unknown location {n}")));
            }
            if seen[n] {
                return Err(Error::State(format!("location {n} occupied twice")));
            }
            seen[n] = true;
        }
        for (m, cache) in self.caches.iter().enumerate() {
            if cache.len() > dims.capacity_items {
                return Err(Error::State(format!(
                    "UAV {m} caches {} contents, capacity is {}",
                    cache.len(),
                    dims.capacity_items
                )));
            }
            if cache.iter().any(|&f| f >= dims.contents) {
                return Err(Error::State(format!("UAV {m} caches an unknown content")));
            }
        }
        for (k, &m) in self.association.iter().enumerate() {
            if m >= dims.uavs {
                return Err(Error::State(format!("user {k} associated with unknown UAV {m}")));
            }
        }
        let expect = loads_of(&self.association, dims.uavs);
        if expect != self.load {
            return Err(Error::State("stored load disagrees with the association".into()));
        }
        Ok(())
    }

    pub fn deployment(&self) -> &[usize] {
        &self.deployment
    }

    pub fn caches(&self) -> &[BTreeSet<usize>] {
        &self.caches
    }

    pub fn association(&self) -> &[usize] {
        &self.association
    }

    pub fn load(&self) -> &[u32] {
        &self.load
    }

    pub fn uav_count(&self) -> usize {
        self.deployment.len()
    }

    pub fn candidate_of(&self, m: usize) -> usize {
        self.deployment[m]
    }

    pub fn serving_uav(&self, k: usize) -> usize {
        self.association[k]
    }

    pub fn is_cached(&self, m: usize, f: usize) -> bool {
        self.caches[m].contains(&f)
    }

    pub fn with_deployment(&self, deployment: Vec<usize>) -> Self {
        debug_assert_eq!(deployment.len(), self.deployment.len());
        SolutionState {
            deployment,
            ..self.clone()
        }
    }

    pub fn with_caches(&self, caches: Vec<BTreeSet<usize>>) -> Self {
        debug_assert_eq!(caches.len(), self.caches.len());
        SolutionState {
            caches,
            ..self.clone()
        }
    }

    pub fn with_association(&self, association: Vec<usize>) -> Self {
        debug_assert_eq!(association.len(), self.association.len());
        let load = loads_of(&association, self.deployment.len());
        SolutionState {
            deployment: self.deployment.clone(),
            caches: self.caches.clone(),
            association,
            load,
        }
    }
}

pub fn loads_of(association: &[usize], uavs: usize) -> Vec<u32> {
    let mut load = vec![0u32; uavs];
    for &m in association {
        if m < uavs {
            load[m] += 1;
        }
    }
    load
}
