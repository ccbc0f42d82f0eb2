//! Mechanism design over a finite library of game forms.
//!
//! A [`MechanismLibrary`] lists environments, candidate mechanisms
//! (games, possibly re-dressed with environment-specific payoffs),
//! and a target outcome per environment. [`mech_design`] computes the
//! designer's polynomial `p_D` — one position per environment, whose
//! directions are the mechanisms with an equilibrium mapping to the
//! target — and runs a designer coalgebra that walks the environments
//! and emits the lowest-indexed feasible mechanism for each.
//!
//! Environments with no feasible mechanism are legal: they appear in
//! the report with an empty direction set and the coalgebra simply
//! skips them.

use crate::equilibria::{dominant_equilibria, pure_nash, Concept, EquilibriumSet};
use crate::games::{validate_game, Game, GameError};
use crate::poly::{coalg_run, Coalgebra, OutputTriple, Poly, PolyError, Trace};
use serde::Serialize;
use std::collections::BTreeMap;

pub mod schema;

/// Guard on the designer hom: the number of environment-to-mechanism
/// assignments materialized as hom positions.
pub const MAX_ASSIGNMENTS: u128 = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MechError {
    #[error("duplicate environment `{0}`")]
    DuplicateEnvironment(String),
    #[error("duplicate mechanism `{0}`")]
    DuplicateMechanism(String),
    #[error("library lists no environments")]
    NoEnvironments,
    #[error("library lists no mechanisms")]
    NoMechanisms,
    #[error("payoff dressing references unknown mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("`{context}` references unknown environment `{environment}`")]
    UnknownEnvironment {
        context: &'static str,
        environment: String,
    },
    #[error("environment `{0}` has no target outcome")]
    MissingTarget(String),
    #[error(
        "dressing of `{mechanism}` in `{environment}` misses payoff for \
         player `{player}`, outcome `{outcome}`"
    )]
    IncompleteDressing {
        mechanism: String,
        environment: String,
        player: String,
        outcome: String,
    },
    #[error("mechanism `{mechanism}` is not a valid game: {detail}")]
    InvalidGame { mechanism: String, detail: String },
    #[error(
        "designer hom too large: {assignments} assignments exceed the \
         {MAX_ASSIGNMENTS} budget"
    )]
    TooManyAssignments { assignments: u128 },
    #[error("cannot load game `{file}`: {detail}")]
    GameLoad { file: String, detail: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Environment-specific payoff tables: player → outcome → payoff.
pub type PayoffDressing = BTreeMap<String, BTreeMap<String, f64>>;

/// A finite mechanism-design instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismLibrary {
    pub environments: Vec<String>,
    /// Ordered: feasibility ties resolve toward the lowest index.
    pub mechanisms: Vec<(String, Game)>,
    /// mechanism → environment → dressing; a missing entry means the
    /// game's own payoffs apply in that environment.
    pub env_payoffs: BTreeMap<String, BTreeMap<String, PayoffDressing>>,
    /// environment → target outcome id.
    pub targets: BTreeMap<String, String>,
}

impl MechanismLibrary {
    /// Check id uniqueness, game validity, dressing completeness, and
    /// target totality.
    pub fn validate(&self) -> Result<(), MechError> {
        if self.environments.is_empty() {
            return Err(MechError::NoEnvironments);
        }
        if self.mechanisms.is_empty() {
            return Err(MechError::NoMechanisms);
        }
        let mut envs = std::collections::BTreeSet::new();
        for e in &self.environments {
            if !envs.insert(e.clone()) {
                return Err(MechError::DuplicateEnvironment(e.clone()));
            }
        }
        let mut mechs = std::collections::BTreeSet::new();
        for (id, game) in &self.mechanisms {
            if !mechs.insert(id.clone()) {
                return Err(MechError::DuplicateMechanism(id.clone()));
            }
            let report = validate_game(game);
            if !report.ok() {
                return Err(MechError::InvalidGame {
                    mechanism: id.clone(),
                    detail: report.violations.join("; "),
                });
            }
        }
        for (mech, by_env) in &self.env_payoffs {
            let game = self
                .mechanisms
                .iter()
                .find(|(id, _)| id == mech)
                .map(|(_, g)| g)
                .ok_or_else(|| MechError::UnknownMechanism(mech.clone()))?;
            for (env, dressing) in by_env {
                if !envs.contains(env) {
                    return Err(MechError::UnknownEnvironment {
                        context: "payoff dressing",
                        environment: env.clone(),
                    });
                }
                for player in &game.players {
                    for outcome in &game.outcomes {
                        let covered = dressing
                            .get(player)
                            .map(|row| row.contains_key(outcome))
                            .unwrap_or(false);
                        if !covered {
                            return Err(MechError::IncompleteDressing {
                                mechanism: mech.clone(),
                                environment: env.clone(),
                                player: player.clone(),
                                outcome: outcome.clone(),
                            });
                        }
                    }
                }
            }
        }
        for env in self.targets.keys() {
            if !envs.contains(env) {
                return Err(MechError::UnknownEnvironment {
                    context: "targets",
                    environment: env.clone(),
                });
            }
        }
        for env in &self.environments {
            if !self.targets.contains_key(env) {
                return Err(MechError::MissingTarget(env.clone()));
            }
        }
        Ok(())
    }

    /// The mechanism's game as played in an environment: its own
    /// payoffs unless a dressing overrides them.
    pub fn dressed_game(&self, mechanism: &str, environment: &str) -> Option<Game> {
        let (_, game) = self.mechanisms.iter().find(|(id, _)| id == mechanism)?;
        let mut dressed = game.clone();
        if let Some(dressing) = self
            .env_payoffs
            .get(mechanism)
            .and_then(|by_env| by_env.get(environment))
        {
            dressed.payoffs = dressing.clone();
        }
        Some(dressed)
    }
}

fn equilibria_of(game: &Game, concept: Concept) -> EquilibriumSet {
    match concept {
        Concept::PureNash => pure_nash(game),
        Concept::WeakDominance => dominant_equilibria(game),
    }
}

/// Mechanisms whose dressed play in `environment` has an equilibrium
/// that `rho` maps to the target outcome, in library order.
pub fn feasible_mechanisms(
    lib: &MechanismLibrary,
    environment: &str,
    concept: Concept,
) -> Vec<String> {
    let target = match lib.targets.get(environment) {
        Some(t) => t,
        None => return Vec::new(),
    };
    let mut feasible = Vec::new();
    for (id, _) in &lib.mechanisms {
        let dressed = match lib.dressed_game(id, environment) {
            Some(g) => g,
            None => continue,
        };
        let eq = equilibria_of(&dressed, concept);
        let hits = eq.profiles.iter().any(|profile| {
            profile
                .key(&dressed)
                .and_then(|key| dressed.outcome_of(&key).cloned())
                .map(|outcome| outcome == *target)
                .unwrap_or(false)
        });
        if hits {
            feasible.push(id.clone());
        }
    }
    feasible
}

/// Per-environment outcome of a design run.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EnvReport {
    pub environment: String,
    pub target: String,
    /// Mechanisms achieving the target, in library order.
    pub feasible: Vec<String>,
    /// What the designer coalgebra emitted here, if anything.
    pub emitted: Option<String>,
    /// True when the emission matches the lowest-indexed feasible
    /// mechanism, or when the environment is infeasible and nothing
    /// was emitted.
    pub ok: bool,
}

/// Result of [`mech_design`]: the environment polynomial, per-env
/// comparisons, and the designer trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechReport {
    pub concept: Concept,
    pub environments: Vec<EnvReport>,
    /// The constant polynomial of environments.
    pub p_e: Poly,
    pub hom_id: String,
    pub hom_positions: usize,
    pub trace: Trace,
}

impl MechReport {
    pub fn pass(&self) -> bool {
        self.environments.iter().all(|e| e.ok)
    }
}

/// Solve the design problem: build `p_D` (positions = environments,
/// directions = feasible mechanisms), the constant `p_E`, and a
/// designer coalgebra over the hom of environment-to-mechanism
/// assignments whose run emits the lowest-indexed feasible mechanism
/// per feasible environment.
pub fn mech_design(
    lib: &MechanismLibrary,
    concept: Concept,
) -> Result<(Poly, MechReport), MechError> {
    lib.validate()?;

    let mut directions = BTreeMap::new();
    let mut feasible_by_env = BTreeMap::new();
    for env in &lib.environments {
        let feasible = feasible_mechanisms(lib, env, concept);
        directions.insert(env.clone(), feasible.clone());
        feasible_by_env.insert(env.clone(), feasible);
    }
    let p_d = Poly::new("p_D", lib.environments.clone(), directions)?;
    let p_e = Poly::constant("p_E", lib.environments.clone())?;

    // The designer hom, built directly: one position per total
    // assignment of a mechanism to each environment, with directions
    // `env:mech` along the assignment.
    let n_mechs = lib.mechanisms.len() as u128;
    let assignments_count = n_mechs.pow(lib.environments.len() as u32);
    if assignments_count > MAX_ASSIGNMENTS {
        return Err(MechError::TooManyAssignments {
            assignments: assignments_count,
        });
    }
    let mech_ids: Vec<&String> = lib.mechanisms.iter().map(|(id, _)| id).collect();
    let mut hom_positions = Vec::new();
    let mut hom_directions = BTreeMap::new();
    let mut choice = vec![0usize; lib.environments.len()];
    loop {
        let pairs: Vec<String> = lib
            .environments
            .iter()
            .zip(&choice)
            .map(|(e, &k)| format!("{e}:{}", mech_ids[k]))
            .collect();
        let id = pairs.join(";");
        hom_directions.insert(id.clone(), pairs);
        hom_positions.push(id);
        let mut pos = choice.len();
        let mut done = false;
        loop {
            if pos == 0 {
                done = true;
                break;
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < mech_ids.len() {
                break;
            }
            choice[pos] = 0;
            if pos == 0 {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
    }
    let hom = Poly::new("[p_D*p_E,p_M]", hom_positions, hom_directions)?;

    // The designer's assignment: lowest-indexed feasible mechanism
    // per feasible environment; infeasible environments are skipped.
    let feasible_envs: Vec<String> = lib
        .environments
        .iter()
        .filter(|e| !feasible_by_env[*e].is_empty())
        .cloned()
        .collect();
    let trace = if feasible_envs.is_empty() {
        Trace {
            steps: Vec::new(),
            first_repeat: None,
        }
    } else {
        let assignment: BTreeMap<&String, &String> = lib
            .environments
            .iter()
            .map(|e| {
                let best = feasible_by_env[e]
                    .first()
                    .unwrap_or_else(|| &lib.mechanisms[0].0);
                (e, best)
            })
            .collect();
        let assignment_id = lib
            .environments
            .iter()
            .map(|e| format!("{e}:{}", assignment[e]))
            .collect::<Vec<_>>()
            .join(";");
        let mut rho = BTreeMap::new();
        let mut mu = BTreeMap::new();
        for (k, env) in feasible_envs.iter().enumerate() {
            let out = OutputTriple {
                morphism: assignment_id.clone(),
                position: env.clone(),
                direction: assignment[env].clone(),
            };
            let next = feasible_envs[(k + 1) % feasible_envs.len()].clone();
            rho.insert(env.clone(), out.clone());
            mu.insert(out, next);
        }
        let coalgebra = Coalgebra::new(hom.clone(), feasible_envs.clone(), rho, mu)?;
        coalg_run(&coalgebra, &feasible_envs[0], feasible_envs.len())?
    };

    let emitted: BTreeMap<&String, &String> = trace
        .steps
        .iter()
        .map(|step| (&step.state, &step.output.direction))
        .collect();
    let environments = lib
        .environments
        .iter()
        .map(|env| {
            let feasible = feasible_by_env[env].clone();
            let emitted_here = emitted.get(env).map(|m| (*m).clone());
            let ok = match (feasible.first(), &emitted_here) {
                (Some(best), Some(m)) => best == m,
                (None, None) => true,
                _ => false,
            };
            EnvReport {
                environment: env.clone(),
                target: lib.targets[env].clone(),
                feasible,
                emitted: emitted_here,
                ok,
            }
        })
        .collect();
    let report = MechReport {
        concept,
        environments,
        p_e,
        hom_id: hom.id.clone(),
        hom_positions: hom.position_count(),
        trace,
    };
    Ok((p_d, report))
}

/// The reference library: two environments, a twice-dressed
/// coordination form and a defection form, with targets picking out
/// mutual defection in the first environment and the second
/// coordination outcome in the second.
pub fn classic_fixture() -> MechanismLibrary {
    use crate::games::classic;
    let bos1 = classic::battle_of_the_sexes();
    let mut bos2 = classic::battle_of_the_sexes();
    bos2.id = "BoS2".to_string();
    let pd = classic::prisoners_dilemma();

    // In env e2 the second coordination form is dressed so that only
    // (Bx, Bx) survives as an equilibrium.
    let dress = |rows: &[(&str, &[(&str, f64)])]| -> PayoffDressing {
        rows.iter()
            .map(|(player, cells)| {
                (
                    player.to_string(),
                    cells
                        .iter()
                        .map(|(o, v)| (o.to_string(), *v))
                        .collect(),
                )
            })
            .collect()
    };
    let bos2_e2 = dress(&[
        (
            "1",
            &[
                ("Bx|Bx", 2.0),
                ("Bx|Bll", 1.0),
                ("Bll|Bx", 0.0),
                ("Bll|Bll", 0.0),
            ],
        ),
        (
            "2",
            &[
                ("Bx|Bx", 1.0),
                ("Bx|Bll", 0.0),
                ("Bll|Bx", 1.0),
                ("Bll|Bll", 0.0),
            ],
        ),
    ]);

    MechanismLibrary {
        environments: vec!["e1".to_string(), "e2".to_string()],
        mechanisms: vec![
            ("bos1".to_string(), bos1),
            ("bos2".to_string(), bos2),
            ("pd".to_string(), pd),
        ],
        env_payoffs: [(
            "bos2".to_string(),
            [("e2".to_string(), bos2_e2)].into(),
        )]
        .into(),
        targets: [
            ("e1".to_string(), "D|D".to_string()),
            ("e2".to_string(), "Bll|Bll".to_string()),
        ]
        .into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::classic;

    #[test]
    fn fixture_validates_and_filters_mechanisms() {
        let lib = classic_fixture();
        lib.validate().unwrap();
        assert_eq!(
            feasible_mechanisms(&lib, "e1", Concept::PureNash),
            vec!["pd".to_string()]
        );
        assert_eq!(
            feasible_mechanisms(&lib, "e2", Concept::PureNash),
            vec!["bos1".to_string()]
        );
    }

    #[test]
    fn design_emits_one_feasible_mechanism_per_environment() {
        let lib = classic_fixture();
        let (p_d, report) = mech_design(&lib, Concept::PureNash).unwrap();
        assert_eq!(p_d.positions, vec!["e1".to_string(), "e2".to_string()]);
        assert_eq!(p_d.directions["e1"], vec!["pd".to_string()]);
        assert_eq!(p_d.directions["e2"], vec!["bos1".to_string()]);
        assert!(report.pass());
        assert_eq!(report.trace.steps.len(), 2);
        assert_eq!(report.trace.steps[0].output.direction, "pd");
        assert_eq!(report.trace.steps[1].output.direction, "bos1");
        // 3 mechanisms over 2 environments: 9 assignments in the hom.
        assert_eq!(report.hom_positions, 9);
        assert_eq!(report.p_e.position_count(), 2);
        assert_eq!(report.p_e.total_directions(), 0);
    }

    #[test]
    fn directions_match_an_independent_filter() {
        let lib = classic_fixture();
        let (p_d, _) = mech_design(&lib, Concept::PureNash).unwrap();
        for env in &lib.environments {
            let target = &lib.targets[env];
            let mut expected = Vec::new();
            for (id, _) in &lib.mechanisms {
                let dressed = lib.dressed_game(id, env).unwrap();
                let hits = pure_nash(&dressed).profiles.iter().any(|p| {
                    let key = p.key(&dressed).unwrap();
                    dressed.outcome_of(&key) == Some(target)
                });
                if hits {
                    expected.push(id.clone());
                }
            }
            assert_eq!(p_d.directions[env], expected, "env {env}");
        }
    }

    #[test]
    fn unreachable_targets_give_empty_direction_sets() {
        let mut lib = classic_fixture();
        lib.targets.insert("e1".to_string(), "C|C".to_string());
        let (p_d, report) = mech_design(&lib, Concept::PureNash).unwrap();
        assert!(p_d.directions["e1"].is_empty());
        assert!(report.pass());
        let e1 = &report.environments[0];
        assert_eq!(e1.emitted, None);
        assert!(e1.ok);
        // Only the feasible environment is visited.
        assert_eq!(report.trace.steps.len(), 1);
        assert_eq!(report.trace.steps[0].state, "e2");
    }

    #[test]
    fn single_environment_single_mechanism() {
        let lib = MechanismLibrary {
            environments: vec!["only".to_string()],
            mechanisms: vec![("pd".to_string(), classic::prisoners_dilemma())],
            env_payoffs: BTreeMap::new(),
            targets: [("only".to_string(), "D|D".to_string())].into(),
        };
        let (p_d, report) = mech_design(&lib, Concept::PureNash).unwrap();
        assert_eq!(p_d.directions["only"], vec!["pd".to_string()]);
        assert_eq!(report.trace.steps.len(), 1);
        assert_eq!(report.trace.steps[0].output.direction, "pd");
        assert!(report.pass());
    }

    #[test]
    fn ties_resolve_to_the_lowest_library_index() {
        let mut bos_b = classic::battle_of_the_sexes();
        bos_b.id = "BoSb".to_string();
        let lib = MechanismLibrary {
            environments: vec!["e".to_string()],
            mechanisms: vec![
                ("zeta".to_string(), classic::battle_of_the_sexes()),
                ("alpha".to_string(), bos_b),
            ],
            env_payoffs: BTreeMap::new(),
            targets: [("e".to_string(), "Bll|Bll".to_string())].into(),
        };
        let (p_d, report) = mech_design(&lib, Concept::PureNash).unwrap();
        // Both qualify; library order (not lexicographic) wins.
        assert_eq!(
            p_d.directions["e"],
            vec!["zeta".to_string(), "alpha".to_string()]
        );
        assert_eq!(report.trace.steps[0].output.direction, "zeta");
    }

    #[test]
    fn weak_dominance_concept_is_supported() {
        let lib = classic_fixture();
        let (p_d, report) = mech_design(&lib, Concept::WeakDominance).unwrap();
        // PD's defection is dominant; BoS has no dominant profile, so
        // e2 becomes infeasible under this concept.
        assert_eq!(p_d.directions["e1"], vec!["pd".to_string()]);
        assert!(p_d.directions["e2"].is_empty());
        assert!(report.pass());
    }

    #[test]
    fn validation_failures_are_specific() {
        let mut lib = classic_fixture();
        lib.env_payoffs
            .get_mut("bos2")
            .unwrap()
            .get_mut("e2")
            .unwrap()
            .get_mut("1")
            .unwrap()
            .remove("Bll|Bll");
        assert!(matches!(
            lib.validate().unwrap_err(),
            MechError::IncompleteDressing { .. }
        ));

        let mut lib = classic_fixture();
        lib.env_payoffs.insert("ghost".to_string(), BTreeMap::new());
        assert!(matches!(
            lib.validate().unwrap_err(),
            MechError::UnknownMechanism(_)
        ));

        let mut lib = classic_fixture();
        lib.targets.remove("e1");
        assert!(matches!(
            lib.validate().unwrap_err(),
            MechError::MissingTarget(_)
        ));

        let mut lib = classic_fixture();
        lib.targets.insert("e9".to_string(), "D|D".to_string());
        assert!(matches!(
            lib.validate().unwrap_err(),
            MechError::UnknownEnvironment { .. }
        ));
    }

    #[test]
    fn report_serializes() {
        let lib = classic_fixture();
        let (_, report) = mech_design(&lib, Concept::PureNash).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"pd\""));
        assert!(json.contains("e2:bos1"));
    }
}
