//! One fully realized problem instance: world, library, requests and frozen
//! links, plus the scoring parameters and cache budget.

use std::collections::BTreeSet;

use crate::caching::CacheBudget;
use crate::channel::{realize_links, Links};
use crate::config::SimConfig;
use crate::content::{generate_requests, ContentLibrary, RequestAssignment};
use crate::error::Result;
use crate::qoe::MosParams;
use crate::scenario::{generate_scenario, Scenario};
use crate::solution::{Dims, SolutionState};

/// Immutable inputs shared by every solver and evaluator. Safe to share
/// across threads; all evaluation over it is pure.
#[derive(Debug, Clone)]
pub struct Instance {
    pub scenario: Scenario,
    pub library: ContentLibrary,
    pub requests: RequestAssignment,
    pub links: Links,
    pub mos: MosParams,
    pub budget: CacheBudget,
    uavs: usize,
}

impl Instance {
    /// Generate the instance for `(config, seed)`. Pure in both arguments.
    pub fn generate(cfg: &SimConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let scenario = generate_scenario(cfg, seed)?;
        let library = ContentLibrary::new(
            cfg.network.content_count,
            cfg.network.content_bits,
            cfg.network.zipf_gamma,
        )?;
        let requests = generate_requests(&library, cfg.network.user_count, seed)?;
        let links = realize_links(&scenario, &cfg.channel, seed)?;
        Ok(Instance {
            scenario,
            library,
            requests,
            links,
            mos: cfg.mos.clone(),
            budget: CacheBudget {
                bits: cfg.network.cache_bits,
            },
            uavs: cfg.network.uav_count,
        })
    }

    pub fn uav_count(&self) -> usize {
        self.uavs
    }

    pub fn user_count(&self) -> usize {
        self.scenario.users.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.scenario.candidates.len()
    }

    pub fn content_count(&self) -> usize {
        self.library.count
    }

    pub fn capacity_items(&self) -> usize {
        self.budget.capacity_items(self.library.size_bits)
    }

    pub fn dims(&self) -> Dims {
        Dims {
            uavs: self.uavs,
            candidates: self.candidate_count(),
            users: self.user_count(),
            contents: self.content_count(),
            capacity_items: self.capacity_items(),
        }
    }

    /// Validated solution constructor bound to this instance's dimensions.
    pub fn solution(
        &self,
        deployment: Vec<usize>,
        caches: Vec<BTreeSet<usize>>,
        association: Vec<usize>,
    ) -> Result<SolutionState> {
        SolutionState::new(deployment, caches, association, self.dims())
    }
}
