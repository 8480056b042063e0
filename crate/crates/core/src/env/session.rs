//! One training session: a request/response state machine over a simulation.

use crate::config::SimConfig;
use crate::grid::GridError;
use crate::kernel::{AgentId, AgentRef, Overrides, QuarterRecord, Simulation, Stage};
use crate::policy::{decode_action, dimensions, feature_names, AgentType, Observation, OBSERVATION_VERSION};

use super::protocol::{
    AgentFrame, AgentSpace, DimensionSpec, ErrorCode, ErrorFrame, Frame, Request, Response, PROTOCOL_VERSION,
};

/// Agents bound to the `remote` policy in `config`, in id order.
pub fn learners(sim: &Simulation) -> Vec<AgentId> {
    let ids = sim.state().ids;
    (0..ids.total())
        .filter(|&id| match agent_type(sim, id) {
            Some(agent) => sim.config().policies.get(agent).is_remote(),
            None => false,
        })
        .collect()
}

fn agent_type(sim: &Simulation, id: AgentId) -> Option<AgentType> {
    Some(match sim.state().ids.resolve(id)? {
        AgentRef::Household(_) => AgentType::Household,
        AgentRef::Firm(_) => AgentType::Firm,
        AgentRef::CentralBank => AgentType::CentralBank,
        AgentRef::Government => AgentType::Government,
        AgentRef::RegionalBank => return None,
    })
}

/// Normalized and raw reward of `id` in a recorded period. The central bank
/// and government have none in periods where they did not act.
pub fn reward_of(sim: &Simulation, record: &QuarterRecord, id: AgentId) -> (Option<f64>, Option<f64>) {
    match sim.state().ids.resolve(id) {
        Some(AgentRef::Household(i)) => {
            let h = &record.households[i];
            (Some(h.reward_norm), Some(h.reward))
        }
        Some(AgentRef::Firm(j)) => {
            let f = &record.firms[j];
            (Some(f.reward_norm), Some(f.reward))
        }
        Some(AgentRef::CentralBank) => (record.central_bank.reward_norm, record.central_bank.reward),
        Some(AgentRef::Government) => (record.government.reward_norm, record.government.reward),
        _ => (None, None),
    }
}

struct Episode {
    sim: Simulation,
    learners: Vec<AgentId>,
}

pub struct Session {
    base: SimConfig,
    episodes: u64,
    current: Option<Episode>,
}

impl Session {
    pub fn new(base: SimConfig) -> Self {
        Self { base, episodes: 0, current: None }
    }

    /// Handle one request line and return the reply line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let reply = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::error(ErrorCode::MalformedFrame, e.to_string()),
        };
        reply.to_line()
    }

    pub fn handle(&mut self, req: Request) -> Response {
        match req {
            Request::Hello { .. } => Response::Hello {
                protocol: PROTOCOL_VERSION,
                observation_version: OBSERVATION_VERSION,
                server: format!("macrosim {}", env!("CARGO_PKG_VERSION")),
            },
            Request::Reset { seed, config } => self.reset(seed, config.as_deref()),
            Request::Act { actions } => self.step(&actions),
        }
    }

    fn reset(&mut self, seed: Option<u64>, config: Option<&str>) -> Response {
        self.current = None;
        let config = match config {
            Some(text) => match SimConfig::from_toml_str(text) {
                Ok(c) => c,
                Err(e) => return Response::error(ErrorCode::BadConfig, e.to_string()),
            },
            None => self.base.clone(),
        };
        let seed = seed.unwrap_or(config.seed);
        let mut sim = match Simulation::new(config, seed) {
            Ok(sim) => sim,
            Err(e) => return Response::error(ErrorCode::BadConfig, e.to_string()),
        };
        if let Err(e) = sim.begin_period() {
            return Response::error(ErrorCode::SimulationFailed, e.to_string());
        }
        self.episodes += 1;
        let learners = learners(&sim);
        let ep = Episode { sim, learners };
        let mut frame = self.frame(&ep, None);
        frame.action_space = ep.learners.iter().map(|&id| space(&ep.sim, id)).collect();
        self.current = Some(ep);
        Response::Obs(frame)
    }

    fn frame(&self, ep: &Episode, record: Option<&QuarterRecord>) -> Frame {
        let sim = &ep.sim;
        let agents = ep
            .learners
            .iter()
            .map(|&id| {
                let obs = sim.observe(id).expect("learners are observable");
                let (reward, raw_reward) = record.map_or((None, None), |r| reward_of(sim, r, id));
                AgentFrame { id, agent_type: obs.agent_type(), features: obs.features(), reward, raw_reward }
            })
            .collect();
        Frame {
            episode: self.episodes,
            t: sim.state().clock.t,
            done: sim.stage() == Stage::Finished,
            agents,
            action_space: Vec::new(),
        }
    }

    fn step(&mut self, actions: &std::collections::BTreeMap<AgentId, Vec<i64>>) -> Response {
        let Some(ep) = self.current.as_mut() else {
            return Response::error(ErrorCode::NoEpisode, "send reset before act");
        };
        if ep.sim.stage() == Stage::Finished {
            return Response::error(ErrorCode::EpisodeDone, "episode finished; send reset");
        }
        if let Some(id) = actions.keys().find(|id| ep.learners.binary_search(id).is_err()) {
            let mut e = ErrorFrame::new(ErrorCode::UnknownAgent, format!("agent {id} is not a learning agent"));
            e.agent = Some(*id);
            return Response::Error(e);
        }
        let mut overrides = Overrides::new();
        for &id in &ep.learners {
            let Some(raw) = actions.get(&id) else {
                let mut e = ErrorFrame::new(ErrorCode::MissingAction, format!("no action for agent {id}"));
                e.agent = Some(id);
                return Response::Error(e);
            };
            let obs = ep.sim.observe(id).expect("learners are observable");
            match decode(&obs, ep.sim.config(), raw) {
                Ok(action) => {
                    overrides.insert(id, action);
                }
                Err(mut e) => {
                    e.agent = Some(id);
                    return Response::Error(e);
                }
            }
        }
        if let Err(e) = ep.sim.finish_period(&overrides) {
            self.current = None;
            return Response::error(ErrorCode::SimulationFailed, e.to_string());
        }
        if ep.sim.stage() == Stage::Open {
            if let Err(e) = ep.sim.begin_period() {
                self.current = None;
                return Response::error(ErrorCode::SimulationFailed, e.to_string());
            }
        }
        let ep = self.current.as_ref().expect("episode kept");
        let record = ep.sim.quarters().last().expect("a period was recorded");
        let frame = self.frame(ep, Some(record));
        if frame.done {
            Response::Done(frame)
        } else {
            Response::Reward(frame)
        }
    }
}

fn decode(obs: &Observation, config: &SimConfig, raw: &[i64]) -> Result<crate::policy::Action, ErrorFrame> {
    let dims = dimensions(obs, &config.grids);
    if raw.len() != dims.len() {
        return Err(ErrorFrame::new(
            ErrorCode::WrongArity,
            format!("expected {} action indices, got {}", dims.len(), raw.len()),
        ));
    }
    let mut index = Vec::with_capacity(raw.len());
    for (d, &i) in dims.iter().zip(raw) {
        match usize::try_from(i) {
            Ok(i) if i < d.values.len() => index.push(i),
            _ => {
                let mut e = ErrorFrame::new(
                    ErrorCode::IndexOutOfRange,
                    format!("dimension `{}`: index {i} out of range (grid size {})", d.name, d.values.len()),
                );
                e.dimension = Some(d.name.clone());
                return Err(e);
            }
        }
    }
    decode_action(obs, &config.grids, &index).map_err(|e| match e {
        crate::policy::PolicyError::Grid(GridError::IndexOutOfRange { dimension, .. }) => {
            let mut f = ErrorFrame::new(ErrorCode::IndexOutOfRange, format!("dimension `{dimension}` out of range"));
            f.dimension = Some(dimension);
            f
        }
        other => ErrorFrame::new(ErrorCode::WrongArity, other.to_string()),
    })
}

fn space(sim: &Simulation, id: AgentId) -> AgentSpace {
    let obs = sim.observe(id).expect("learners are observable");
    let agent = obs.agent_type();
    let sellers: Vec<u32> = sim.sellers().iter().map(|&j| j as u32).collect();
    let features = feature_names(agent, &sellers, sim.state().firms.len(), sim.state().households.len());
    let dims = dimensions(&obs, &sim.config().grids)
        .into_iter()
        .map(|d| DimensionSpec { name: d.name, values: d.values.to_vec() })
        .collect();
    AgentSpace { id, agent_type: agent, features, dimensions: dims }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicySpec;

    fn config() -> SimConfig {
        let mut c = SimConfig { households: 2, firms: 1, horizon: 2, ..SimConfig::default() };
        c.policies.household = PolicySpec::Remote;
        c
    }

    #[test]
    fn reset_then_step_to_done() {
        let mut s = Session::new(config());
        let Response::Obs(f) = s.handle(Request::Reset { seed: Some(1), config: None }) else { panic!() };
        assert_eq!((f.t, f.done, f.agents.len()), (0, false, 2));
        // savings sit after credit, tax rate, rate, one price and the wage
        assert_eq!(f.agents[0].features[5], 0.0);
        assert_eq!(f.action_space[0].dimensions.len(), 1);
        let act = || Request::Act { actions: [(0, vec![2]), (1, vec![0])].into() };
        assert!(matches!(s.handle(act()), Response::Reward(_)));
        let Response::Done(f) = s.handle(act()) else { panic!() };
        assert!(f.done && f.agents.iter().all(|a| a.reward.is_some()));
        let Response::Error(e) = s.handle(act()) else { panic!() };
        assert_eq!(e.code, ErrorCode::EpisodeDone);
    }

    #[test]
    fn errors_keep_the_session() {
        let mut s = Session::new(config());
        assert!(s.handle_line("{not json").contains("malformed_frame"));
        assert!(s.handle_line(r#"{"kind":"act","actions":{}}"#).contains("no_episode"));
        s.handle(Request::Reset { seed: None, config: None });
        let Response::Error(e) = s.handle(Request::Act { actions: [(0, vec![5]), (1, vec![0])].into() }) else {
            panic!()
        };
        assert_eq!((e.code, e.agent, e.dimension.as_deref()), (ErrorCode::IndexOutOfRange, Some(0), Some("consumption:0")));
        let Response::Error(e) = s.handle(Request::Act { actions: [(0, vec![-1]), (1, vec![0])].into() }) else {
            panic!()
        };
        assert_eq!(e.code, ErrorCode::IndexOutOfRange);
        let Response::Error(e) = s.handle(Request::Act { actions: [(0, vec![1])].into() }) else { panic!() };
        assert_eq!((e.code, e.agent), (ErrorCode::MissingAction, Some(1)));
        let Response::Error(e) = s.handle(Request::Act { actions: [(0, vec![1]), (1, vec![1]), (2, vec![1])].into() })
        else {
            panic!()
        };
        assert_eq!(e.code, ErrorCode::UnknownAgent);
        let Response::Error(e) = s.handle(Request::Act { actions: [(0, vec![1, 1]), (1, vec![1])].into() }) else {
            panic!()
        };
        assert_eq!(e.code, ErrorCode::WrongArity);
        // the episode is still at t = 0 and accepts a valid step
        assert!(matches!(s.handle(Request::Act { actions: [(0, vec![1]), (1, vec![1])].into() }), Response::Reward(_)));
    }

    #[test]
    fn bad_config_is_reported() {
        let mut s = Session::new(config());
        let r = s.handle(Request::Reset { seed: None, config: Some("households = 0\nbogus = 1".into()) });
        assert!(matches!(r, Response::Error(ErrorFrame { code: ErrorCode::BadConfig, .. })));
    }
}
