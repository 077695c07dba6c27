//! Grasp outcome classification from gripper encoder readings and the
//! retry/handover policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{PlanOutcome, Planner, PlannerConfig, SceneModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspOutcome {
    Success,
    /// Fingers closed (almost) completely: nothing in the hand.
    EmptyClose,
    /// Closed on something narrower than expected.
    Slip,
    Pending,
}

impl GraspOutcome {
    pub fn is_failure(self) -> bool {
        matches!(self, GraspOutcome::EmptyClose | GraspOutcome::Slip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupervisorAction {
    Proceed,
    RetryGrasp,
    Handover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspAttemptRecord {
    pub attempt_index: usize,
    /// Opening reported after the close command (meters).
    pub encoder_width: f64,
    /// Object extent along the closing axis of the executed grasp (meters).
    pub expected_width: f64,
    pub outcome: GraspOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupervisorPolicy {
    pub min_grasp_width: f64,
    /// Accepted relative deviation from the expected width.
    pub width_tolerance: f64,
    pub max_retries: usize,
}

impl Default for SupervisorPolicy {
    fn default() -> Self {
        Self {
            min_grasp_width: 0.005,
            width_tolerance: 0.5,
            max_retries: 2,
        }
    }
}

impl SupervisorPolicy {
    pub fn validate(&self, max_opening: f64) -> Result<()> {
        if !(self.min_grasp_width > 0.0 && self.min_grasp_width < max_opening) {
            return Err(Error::InvalidConfig("min_grasp_width must lie in (0, max_opening)".into()));
        }
        if !(self.width_tolerance >= 0.0) {
            return Err(Error::InvalidConfig("width_tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Classifies a closed gripper reading. `max_opening` bounds valid readings.
pub fn classify_outcome(encoder_width: f64, expected_width: f64, max_opening: f64, policy: &SupervisorPolicy) -> Result<GraspOutcome> {
    if !(0.0..=max_opening).contains(&encoder_width) {
        return Err(Error::OutOfRange(format!("encoder width {encoder_width} outside [0, {max_opening}]")));
    }
    if !(expected_width.is_finite() && expected_width >= 0.0) {
        return Err(Error::OutOfRange(format!("expected width {expected_width}")));
    }
    if encoder_width < policy.min_grasp_width {
        return Ok(GraspOutcome::EmptyClose);
    }
    if (encoder_width - expected_width).abs() <= policy.width_tolerance * expected_width {
        return Ok(GraspOutcome::Success);
    }
    Ok(GraspOutcome::Slip)
}

/// Next step after the latest attempt: proceed on success, otherwise retry
/// until the failure count exceeds `max_retries`, then hand over.
pub fn next_action(history: &[GraspAttemptRecord], policy: &SupervisorPolicy) -> Result<SupervisorAction> {
    let last = history.last().ok_or(Error::EmptyHistory)?;
    match last.outcome {
        GraspOutcome::Success => Ok(SupervisorAction::Proceed),
        GraspOutcome::Pending => Err(Error::OutOfRange("last attempt is not classified".into())),
        GraspOutcome::EmptyClose | GraspOutcome::Slip => {
            let failures = history.iter().filter(|r| r.outcome.is_failure()).count();
            if failures > policy.max_retries {
                Ok(SupervisorAction::Handover)
            } else {
                Ok(SupervisorAction::RetryGrasp)
            }
        }
    }
}

/// One manipulation episode: classifies readings and tracks the history.
#[derive(Debug, Clone)]
pub struct Supervisor {
    policy: SupervisorPolicy,
    max_opening: f64,
    history: Vec<GraspAttemptRecord>,
}

impl Supervisor {
    pub fn new(policy: SupervisorPolicy, max_opening: f64) -> Result<Self> {
        policy.validate(max_opening)?;
        Ok(Self {
            policy,
            max_opening,
            history: Vec::new(),
        })
    }

    pub fn record(&mut self, encoder_width: f64, expected_width: f64) -> Result<SupervisorAction> {
        let outcome = classify_outcome(encoder_width, expected_width, self.max_opening, &self.policy)?;
        self.history.push(GraspAttemptRecord {
            attempt_index: self.history.len() + 1,
            encoder_width,
            expected_width,
            outcome,
        });
        next_action(&self.history, &self.policy)
    }

    pub fn history(&self) -> &[GraspAttemptRecord] {
        &self.history
    }
}

/// One executed attempt and the supervisor's response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupervisionEntry {
    pub attempt: usize,
    pub candidate: usize,
    pub encoder_width: f64,
    pub expected_width: f64,
    pub outcome: GraspOutcome,
    pub action: SupervisorAction,
}

/// Result of [`run_episode`]: the last plan and what happened on the way.
#[derive(Debug, Clone)]
pub struct Episode {
    pub outcome: PlanOutcome,
    /// Configuration of the last plan, including accumulated exclusions.
    pub config: PlannerConfig,
    pub log: Vec<SupervisionEntry>,
}

/// Plans, then feeds `readings` to the supervisor one attempt at a time.
/// A retry excludes the failed candidate and replans; proceed, handover, an
/// exhausted reading list or a plan with no feasible grasp ends the episode.
pub fn run_episode(
    planner: &Planner,
    scene: &SceneModel,
    config: &PlannerConfig,
    policy: &SupervisorPolicy,
    readings: &[f64],
) -> Result<Episode> {
    let mut config = config.clone();
    let mut outcome = planner.evaluate(scene, &config)?;
    let mut log = Vec::new();
    if readings.is_empty() {
        return Ok(Episode { outcome, config, log });
    }
    let mut supervisor = Supervisor::new(*policy, scene.gripper.max_opening)?;
    for &reading in readings {
        let (Some(selected), Some(expected)) = (outcome.selected, outcome.expected_width()) else {
            break;
        };
        let action = supervisor.record(reading, expected)?;
        let last = supervisor.history().last().expect("just recorded");
        log.push(SupervisionEntry {
            attempt: last.attempt_index,
            candidate: selected,
            encoder_width: reading,
            expected_width: expected,
            outcome: last.outcome,
            action,
        });
        if action != SupervisorAction::RetryGrasp {
            break;
        }
        config.excluded_candidates.push(selected);
        outcome = planner.evaluate(scene, &config)?;
    }
    Ok(Episode { outcome, config, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(outcome: GraspOutcome) -> GraspAttemptRecord {
        GraspAttemptRecord {
            attempt_index: 1,
            encoder_width: 0.0,
            expected_width: 0.05,
            outcome,
        }
    }

    #[test]
    fn classification() {
        let p = SupervisorPolicy {
            width_tolerance: 0.25,
            ..Default::default()
        };
        assert_eq!(classify_outcome(0.0, 0.06, 0.08, &p).unwrap(), GraspOutcome::EmptyClose);
        assert_eq!(classify_outcome(0.06, 0.06, 0.08, &p).unwrap(), GraspOutcome::Success);
        // Band is [0.045, 0.075].
        assert_eq!(classify_outcome(0.030, 0.06, 0.08, &p).unwrap(), GraspOutcome::Slip);
        assert_eq!(classify_outcome(0.046, 0.06, 0.08, &p).unwrap(), GraspOutcome::Success);
        assert_eq!(classify_outcome(0.076, 0.06, 0.08, &p).unwrap(), GraspOutcome::Slip);
        assert!(matches!(classify_outcome(0.09, 0.06, 0.08, &p), Err(Error::OutOfRange(_))));
        assert!(matches!(classify_outcome(-0.01, 0.06, 0.08, &p), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn actions() {
        let p = SupervisorPolicy::default();
        use GraspOutcome::*;
        assert_eq!(next_action(&[rec(Success)], &p).unwrap(), SupervisorAction::Proceed);
        assert_eq!(next_action(&[rec(EmptyClose)], &p).unwrap(), SupervisorAction::RetryGrasp);
        assert_eq!(
            next_action(&[rec(EmptyClose), rec(Slip), rec(EmptyClose)], &p).unwrap(),
            SupervisorAction::Handover
        );
        assert!(matches!(next_action(&[], &p), Err(Error::EmptyHistory)));
    }

    #[test]
    fn total_over_input_box() {
        let p = SupervisorPolicy::default();
        for i in 0..=80 {
            for j in 0..=80 {
                let enc = i as f64 * 0.001;
                let exp = j as f64 * 0.001;
                assert!(classify_outcome(enc, exp, 0.08, &p).is_ok());
            }
        }
    }

    #[test]
    fn retry_excludes_failed_candidate() {
        let scene = crate::harness::generate_scene(&crate::harness::cube_on_table(1)).unwrap();
        let cfg = PlannerConfig::default();
        let policy = SupervisorPolicy {
            max_retries: 1,
            ..Default::default()
        };
        let ep = run_episode(&Planner::new(), &scene, &cfg, &policy, &[0.0, 0.0, 0.0]).unwrap();
        let actions: Vec<_> = ep.log.iter().map(|e| e.action).collect();
        assert_eq!(actions, [SupervisorAction::RetryGrasp, SupervisorAction::Handover]);
        assert_ne!(ep.log[0].candidate, ep.log[1].candidate);
        assert_eq!(ep.config.excluded_candidates, vec![ep.log[0].candidate]);

        let ep = run_episode(&Planner::new(), &scene, &cfg, &policy, &[0.0]).unwrap();
        let expected = ep.log[0].expected_width;
        let ep2 = run_episode(&Planner::new(), &scene, &cfg, &policy, &[0.0, expected]).unwrap();
        assert_eq!(ep2.log.last().unwrap().action, SupervisorAction::Proceed);
        assert_eq!(ep2.log.len(), 2);
    }

    #[test]
    fn episode() {
        let mut s = Supervisor::new(SupervisorPolicy::default(), 0.08).unwrap();
        assert_eq!(s.record(0.0, 0.05).unwrap(), SupervisorAction::RetryGrasp);
        assert_eq!(s.record(0.05, 0.05).unwrap(), SupervisorAction::Proceed);
        assert_eq!(s.history()[1].attempt_index, 2);
    }
}
