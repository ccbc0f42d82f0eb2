//! Finite games in normal form and the ways they compose.
//!
//! A [`Game`] is a tuple of ordered players, per-player finite
//! strategy sets, an outcome set, a bijection `rho` from strategy
//! profiles to outcomes, and per-player payoffs on outcomes. Games
//! form a category: [`GameMorphism`] witnesses one game sitting inside
//! another as a subgame form, [`empty_game`] is initial, and
//! [`coproduct`] / [`pushout`] build composite games, with
//! [`Cospan`]s and [`check_wiring_minimality`] describing how parts
//! are wired into a whole. [`GameBox`] wraps a game as a stateful
//! process with per-player history forests.
//!
//! Profile keys are strategy labels joined by `|` in player order;
//! labels therefore must not contain `|`. Canonical games (built by
//! [`Game::from_tables`]) use profile keys as their outcome ids;
//! composite games use outcome pairs `(o,o')`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub mod classic;
pub mod schema;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("duplicate player `{0}`")]
    DuplicatePlayer(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("player `{0}` has an empty strategy set")]
    EmptyStrategies(String),
    #[error("player `{player}` lists strategy `{label}` twice")]
    DuplicateStrategy { player: String, label: String },
    #[error("strategy label `{label}` of player `{player}` contains `|`")]
    IllegalLabel { player: String, label: String },
    #[error("missing payoff row for player `{0}`")]
    MissingPayoffRow(String),
    #[error("player `{player}` has no payoff at `{key}`")]
    MissingPayoff { player: String, key: String },
    #[error("player `{player}` has a payoff at unknown key `{key}`")]
    UnexpectedPayoff { player: String, key: String },
    #[error("player `{player}` has a non-finite payoff at `{key}`")]
    NonFinitePayoff { player: String, key: String },
    #[error("payoff table row `{0}` does not match any profile")]
    UnknownProfileRow(String),
    #[error("payoff row `{key}` has {got} entries, expected {expected}")]
    RowLength {
        key: String,
        got: usize,
        expected: usize,
    },
    #[error("morphism legs have different sources: `{0}` vs `{1}`")]
    SourceMismatch(String, String),
    #[error("morphism rejected: {0}")]
    MorphismRejected(String),
    #[error("players {0:?} are shared by the targets but absent from the common subgame")]
    SharedOutsideSource(Vec<String>),
    #[error("morphism `{0}` -> `{1}` is not an isomorphism")]
    NotIso(String, String),
    #[error("cospan middles do not match: `{0}` vs `{1}`")]
    MiddleMismatch(String, String),
    #[error("cannot compose: first targets `{0}` but second starts at `{1}`")]
    ComposeMismatch(String, String),
    #[error("box state `{0}` is not in the state set")]
    UnknownState(String),
    #[error("choice map has no profile for state `{0}`")]
    MissingChoice(String),
    #[error("outcome `{0}` is not an outcome of the box's game")]
    UnknownOutcome(String),
    #[error("profile `{0}` is not a profile of the game")]
    UnknownProfile(String),
}

/// How two payoff streams for one shared player are merged when games
/// are composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffCombinator {
    Product,
    Sum,
}

impl PayoffCombinator {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            PayoffCombinator::Product => a * b,
            PayoffCombinator::Sum => a + b,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PayoffCombinator::Product => "product",
            PayoffCombinator::Sum => "sum",
        }
    }
}

/// A finite game in normal form. See the module docs for the profile
/// key convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Game {
    pub id: String,
    /// Player ids in play order (profile keys follow this order).
    pub players: Vec<String>,
    /// Per-player strategy labels in declared order.
    pub strategies: BTreeMap<String, Vec<String>>,
    /// Outcome ids, in the order profiles enumerate.
    pub outcomes: Vec<String>,
    /// Bijection from profile keys to outcome ids.
    pub rho: BTreeMap<String, String>,
    /// Per-player payoff on each outcome.
    pub payoffs: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Render a strategy assignment as a profile key.
pub fn profile_key(parts: &[String]) -> String {
    parts.join("|")
}

fn split_key(key: &str) -> Vec<String> {
    if key.is_empty() {
        Vec::new()
    } else {
        key.split('|').map(str::to_string).collect()
    }
}

/// All assignments drawn from the given ordered sets, last set varying
/// fastest. An empty list of sets yields no assignments (the empty
/// game has no profiles).
fn cartesian(sets: &[&[String]]) -> Vec<Vec<String>> {
    if sets.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for prefix in &out {
            for label in *set {
                let mut assignment = prefix.clone();
                assignment.push(label.clone());
                next.push(assignment);
            }
        }
        out = next;
    }
    out
}

impl Game {
    /// The game with no players, strategies or outcomes; initial
    /// object of the category.
    pub fn empty() -> Game {
        Game {
            id: "empty".to_string(),
            players: Vec::new(),
            strategies: BTreeMap::new(),
            outcomes: Vec::new(),
            rho: BTreeMap::new(),
            payoffs: BTreeMap::new(),
        }
    }

    pub fn is_empty_game(&self) -> bool {
        self.players.is_empty()
    }

    /// Build a canonical game from per-player strategy lists and a
    /// payoff table keyed by profile. Outcome ids are the profile keys
    /// and `rho` is the identity on them.
    pub fn from_tables(
        id: &str,
        players: &[(&str, &[&str])],
        rows: &[(&str, &[f64])],
    ) -> Result<Game, GameError> {
        let player_ids: Vec<String> = players.iter().map(|(p, _)| p.to_string()).collect();
        let strategies: BTreeMap<String, Vec<String>> = players
            .iter()
            .map(|(p, s)| (p.to_string(), s.iter().map(|x| x.to_string()).collect()))
            .collect();
        let mut payoffs: BTreeMap<String, BTreeMap<String, f64>> = player_ids
            .iter()
            .map(|p| (p.clone(), BTreeMap::new()))
            .collect();
        for (key, values) in rows {
            if values.len() != player_ids.len() {
                return Err(GameError::RowLength {
                    key: key.to_string(),
                    got: values.len(),
                    expected: player_ids.len(),
                });
            }
            for (player, value) in player_ids.iter().zip(values.iter()) {
                payoffs
                    .get_mut(player)
                    .expect("row initialized above")
                    .insert(key.to_string(), *value);
            }
        }
        Game::from_parts(id, player_ids, strategies, payoffs)
    }

    /// Build a canonical game from already-assembled maps; payoffs are
    /// keyed by profile key (= outcome id).
    pub fn from_parts(
        id: &str,
        players: Vec<String>,
        strategies: BTreeMap<String, Vec<String>>,
        payoffs: BTreeMap<String, BTreeMap<String, f64>>,
    ) -> Result<Game, GameError> {
        let mut seen = BTreeSet::new();
        for p in &players {
            if !seen.insert(p.clone()) {
                return Err(GameError::DuplicatePlayer(p.clone()));
            }
        }
        for p in &players {
            let list = strategies
                .get(p)
                .ok_or_else(|| GameError::EmptyStrategies(p.clone()))?;
            if list.is_empty() {
                return Err(GameError::EmptyStrategies(p.clone()));
            }
            let mut labels = BTreeSet::new();
            for label in list {
                if label.contains('|') {
                    return Err(GameError::IllegalLabel {
                        player: p.clone(),
                        label: label.clone(),
                    });
                }
                if !labels.insert(label.clone()) {
                    return Err(GameError::DuplicateStrategy {
                        player: p.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
        for key in strategies.keys() {
            if !seen.contains(key) {
                return Err(GameError::UnknownPlayer(key.clone()));
            }
        }

        let sets: Vec<&[String]> = players.iter().map(|p| strategies[p].as_slice()).collect();
        let profiles = cartesian(&sets);
        let outcomes: Vec<String> = profiles.iter().map(|p| profile_key(p)).collect();
        let rho: BTreeMap<String, String> = outcomes
            .iter()
            .map(|k| (k.clone(), k.clone()))
            .collect();

        for p in &players {
            let row = payoffs
                .get(p)
                .ok_or_else(|| GameError::MissingPayoffRow(p.clone()))?;
            for key in row.keys() {
                if !rho.contains_key(key) {
                    return Err(GameError::UnexpectedPayoff {
                        player: p.clone(),
                        key: key.clone(),
                    });
                }
            }
            for outcome in &outcomes {
                let value = row.get(outcome).ok_or_else(|| GameError::MissingPayoff {
                    player: p.clone(),
                    key: outcome.clone(),
                })?;
                if !value.is_finite() {
                    return Err(GameError::NonFinitePayoff {
                        player: p.clone(),
                        key: outcome.clone(),
                    });
                }
            }
        }
        for key in payoffs.keys() {
            if !seen.contains(key) {
                return Err(GameError::UnknownPlayer(key.clone()));
            }
        }

        Ok(Game {
            id: id.to_string(),
            players,
            strategies,
            outcomes,
            rho,
            payoffs,
        })
    }

    /// Strategy profiles in enumeration order (empty game: none).
    pub fn profiles(&self) -> Vec<Vec<String>> {
        let sets: Vec<&[String]> = self
            .players
            .iter()
            .map(|p| self.strategies[p].as_slice())
            .collect();
        cartesian(&sets)
    }

    pub fn profile_keys(&self) -> Vec<String> {
        self.profiles().iter().map(|p| profile_key(p)).collect()
    }

    pub fn outcome_of(&self, key: &str) -> Option<&String> {
        self.rho.get(key)
    }

    pub fn payoff(&self, player: &str, outcome: &str) -> Option<f64> {
        self.payoffs.get(player)?.get(outcome).copied()
    }

    pub fn player_index(&self, player: &str) -> Option<usize> {
        self.players.iter().position(|p| p == player)
    }

    /// The profile where every player takes their first declared
    /// strategy; `None` for the empty game.
    pub fn reference_profile(&self) -> Option<Vec<String>> {
        if self.is_empty_game() {
            return None;
        }
        Some(
            self.players
                .iter()
                .map(|p| self.strategies[p][0].clone())
                .collect(),
        )
    }
}

/// Structural audit of a game: violations break the invariants,
/// warnings flag allowed-but-noteworthy facts (non-positive payoffs).
#[derive(Debug, Clone, Serialize)]
pub struct GameReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl GameReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every game invariant: unique players, nonempty strategy
/// sets, `rho` a bijection from profiles onto outcomes, and complete
/// finite payoffs. Non-positive payoffs are reported as warnings, not
/// violations (composition combinators assume positivity, ordinary
/// play does not).
pub fn validate_game(g: &Game) -> GameReport {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();

    let mut seen = BTreeSet::new();
    for p in &g.players {
        if !seen.insert(p) {
            violations.push(format!("duplicate player `{p}`"));
        }
    }
    for p in &g.players {
        match g.strategies.get(p) {
            None => violations.push(format!("player `{p}` has no strategy set")),
            Some(list) if list.is_empty() => {
                violations.push(format!("player `{p}` has an empty strategy set"))
            }
            Some(list) => {
                let unique: BTreeSet<_> = list.iter().collect();
                if unique.len() != list.len() {
                    violations.push(format!("player `{p}` repeats a strategy label"));
                }
                for label in list {
                    if label.contains('|') {
                        violations.push(format!(
                            "strategy `{label}` of player `{p}` contains `|`"
                        ));
                    }
                }
            }
        }
    }
    for key in g.strategies.keys() {
        if !g.players.contains(key) {
            violations.push(format!("strategy set for unknown player `{key}`"));
        }
    }

    let profile_keys = g.profile_keys();
    if g.rho.len() != profile_keys.len() {
        violations.push(format!(
            "rho has {} entries for {} profiles",
            g.rho.len(),
            profile_keys.len()
        ));
    }
    let outcome_set: BTreeSet<_> = g.outcomes.iter().collect();
    if outcome_set.len() != g.outcomes.len() {
        violations.push("duplicate outcome id".to_string());
    }
    let mut hit = BTreeSet::new();
    for key in &profile_keys {
        match g.rho.get(key) {
            None => violations.push(format!("rho undefined at profile `{key}`")),
            Some(outcome) => {
                if !outcome_set.contains(outcome) {
                    violations.push(format!("rho maps `{key}` to unknown outcome `{outcome}`"));
                }
                if !hit.insert(outcome) {
                    violations.push(format!(
                        "rho is not injective: outcome `{outcome}` hit more than once"
                    ));
                }
            }
        }
    }
    if g.outcomes.len() != profile_keys.len() {
        violations.push(format!(
            "{} outcomes for {} profiles (rho cannot be a bijection)",
            g.outcomes.len(),
            profile_keys.len()
        ));
    }

    for p in &g.players {
        match g.payoffs.get(p) {
            None => violations.push(format!("player `{p}` has no payoff row")),
            Some(row) => {
                for outcome in &g.outcomes {
                    match row.get(outcome) {
                        None => violations
                            .push(format!("player `{p}` lacks a payoff at `{outcome}`")),
                        Some(v) if !v.is_finite() => violations
                            .push(format!("player `{p}` has a non-finite payoff at `{outcome}`")),
                        Some(v) if *v <= 0.0 => warnings.push(format!(
                            "player `{p}` has non-positive payoff {v} at `{outcome}`"
                        )),
                        Some(_) => {}
                    }
                }
                for key in row.keys() {
                    if !outcome_set.contains(key) {
                        violations
                            .push(format!("player `{p}` has a payoff at unknown `{key}`"));
                    }
                }
            }
        }
    }
    for key in g.payoffs.keys() {
        if !g.players.contains(key) {
            violations.push(format!("payoff row for unknown player `{key}`"));
        }
    }

    GameReport {
        violations,
        warnings,
    }
}

/// The game with no players (initial object).
pub fn empty_game() -> Game {
    Game::empty()
}

/// A subgame-form morphism: the source game sits inside the target.
/// `strategy_inc` embeds each source player's strategies into the
/// target's (identity maps for literal subgames, pair labels for
/// composite targets); `profile_proj` maps every target profile back
/// to a source profile; `outcome_inc` injects a subset of target
/// outcomes into source outcomes, and the two must commute with the
/// games' `rho` wherever `outcome_inc` is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMorphism {
    pub source: Game,
    pub target: Game,
    pub strategy_inc: BTreeMap<String, BTreeMap<String, String>>,
    pub profile_proj: BTreeMap<String, String>,
    pub outcome_inc: BTreeMap<String, String>,
}

impl GameMorphism {
    /// The identity morphism on `g`.
    pub fn identity(g: &Game) -> GameMorphism {
        let strategy_inc = g
            .players
            .iter()
            .map(|p| {
                let map = g.strategies[p]
                    .iter()
                    .map(|s| (s.clone(), s.clone()))
                    .collect();
                (p.clone(), map)
            })
            .collect();
        let profile_proj = g
            .profile_keys()
            .into_iter()
            .map(|k| (k.clone(), k))
            .collect();
        let outcome_inc = g
            .outcomes
            .iter()
            .map(|o| (o.clone(), o.clone()))
            .collect();
        GameMorphism {
            source: g.clone(),
            target: g.clone(),
            strategy_inc,
            profile_proj,
            outcome_inc,
        }
    }

    /// The unique morphism out of the empty game: all maps empty, all
    /// conditions vacuous.
    pub fn from_empty(target: &Game) -> GameMorphism {
        GameMorphism {
            source: Game::empty(),
            target: target.clone(),
            strategy_inc: BTreeMap::new(),
            profile_proj: BTreeMap::new(),
            outcome_inc: BTreeMap::new(),
        }
    }

    /// Compose `first: A -> B` with `second: B -> C` into `A -> C`.
    pub fn compose(
        first: &GameMorphism,
        second: &GameMorphism,
    ) -> Result<GameMorphism, GameError> {
        if first.target != second.source {
            return Err(GameError::ComposeMismatch(
                first.target.id.clone(),
                second.source.id.clone(),
            ));
        }
        let mut strategy_inc = BTreeMap::new();
        for (player, map) in &first.strategy_inc {
            let outer = second.strategy_inc.get(player).ok_or_else(|| {
                GameError::MorphismRejected(format!(
                    "player `{player}` missing from the second morphism"
                ))
            })?;
            let mut composed = BTreeMap::new();
            for (a, b) in map {
                let c = outer.get(b).ok_or_else(|| {
                    GameError::MorphismRejected(format!(
                        "strategy `{b}` of player `{player}` missing from the second morphism"
                    ))
                })?;
                composed.insert(a.clone(), c.clone());
            }
            strategy_inc.insert(player.clone(), composed);
        }
        let mut profile_proj = BTreeMap::new();
        for (ck, bk) in &second.profile_proj {
            if let Some(ak) = first.profile_proj.get(bk) {
                profile_proj.insert(ck.clone(), ak.clone());
            }
        }
        let mut outcome_inc = BTreeMap::new();
        for (oc, ob) in &second.outcome_inc {
            if let Some(oa) = first.outcome_inc.get(ob) {
                outcome_inc.insert(oc.clone(), oa.clone());
            }
        }
        Ok(GameMorphism {
            source: first.source.clone(),
            target: second.target.clone(),
            strategy_inc,
            profile_proj,
            outcome_inc,
        })
    }
}

/// Outcome of a morphism check: all violated conditions, plus the
/// first commuting-failure witness profile if any.
#[derive(Debug, Clone, Serialize)]
pub struct MorphismReport {
    pub violations: Vec<String>,
    pub witness: Option<String>,
}

impl MorphismReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify a subgame-form morphism: player containment, per-player
/// injective strategy embeddings, total profile projection, injective
/// partial outcome inclusion, and the commuting condition
/// `rho_src(proj(s')) = outcome_inc(rho_tgt(s'))` at every target
/// profile where `outcome_inc` is defined.
pub fn check_game_morphism(m: &GameMorphism) -> MorphismReport {
    let mut violations = Vec::new();
    let mut witness = None;
    let src = &m.source;
    let tgt = &m.target;

    for p in &src.players {
        if !tgt.players.contains(p) {
            violations.push(format!("player `{p}` of the source is not in the target"));
        }
    }

    for p in &src.players {
        match m.strategy_inc.get(p) {
            None => violations.push(format!("no strategy embedding for player `{p}`")),
            Some(map) => {
                let src_set: BTreeSet<_> = src.strategies[p].iter().collect();
                let tgt_set: BTreeSet<_> = tgt
                    .strategies
                    .get(p)
                    .map(|l| l.iter().collect())
                    .unwrap_or_default();
                for s in &src.strategies[p] {
                    if !map.contains_key(s) {
                        violations.push(format!(
                            "strategy `{s}` of player `{p}` has no embedding"
                        ));
                    }
                }
                let mut image = BTreeSet::new();
                for (s, t) in map {
                    if !src_set.contains(s) {
                        violations.push(format!(
                            "embedding defined at unknown strategy `{s}` of player `{p}`"
                        ));
                    }
                    if !tgt_set.contains(t) {
                        violations.push(format!(
                            "embedding of `{s}` (player `{p}`) hits unknown target strategy `{t}`"
                        ));
                    }
                    if !image.insert(t) {
                        violations.push(format!(
                            "strategy embedding for player `{p}` is not injective at `{t}`"
                        ));
                    }
                }
            }
        }
    }

    let src_profiles: BTreeSet<String> = src.profile_keys().into_iter().collect();
    let tgt_profiles = tgt.profile_keys();
    if src_profiles.is_empty() {
        if !m.profile_proj.is_empty() {
            violations.push("profile projection into the empty game must be empty".to_string());
        }
    } else {
        for key in &tgt_profiles {
            match m.profile_proj.get(key) {
                None => violations.push(format!("profile projection undefined at `{key}`")),
                Some(p) if !src_profiles.contains(p) => violations.push(format!(
                    "profile projection maps `{key}` to unknown source profile `{p}`"
                )),
                Some(_) => {}
            }
        }
    }
    for key in m.profile_proj.keys() {
        if !tgt.rho.contains_key(key) {
            violations.push(format!(
                "profile projection defined at unknown target profile `{key}`"
            ));
        }
    }

    let src_outcomes: BTreeSet<_> = src.outcomes.iter().collect();
    let tgt_outcomes: BTreeSet<_> = tgt.outcomes.iter().collect();
    let mut image = BTreeSet::new();
    for (o_tgt, o_src) in &m.outcome_inc {
        if !tgt_outcomes.contains(o_tgt) {
            violations.push(format!("outcome inclusion defined at unknown `{o_tgt}`"));
        }
        if !src_outcomes.contains(o_src) {
            violations.push(format!("outcome inclusion hits unknown source `{o_src}`"));
        }
        if !image.insert(o_src) {
            violations.push(format!(
                "outcome inclusion is not injective at `{o_src}`"
            ));
        }
    }

    for key in &tgt_profiles {
        let o_tgt = match tgt.rho.get(key) {
            Some(o) => o,
            None => continue, // already reported by validate_game
        };
        if let Some(o_src_expected) = m.outcome_inc.get(o_tgt) {
            let projected = match m.profile_proj.get(key) {
                Some(p) => p,
                None => continue, // totality violation already recorded
            };
            match src.rho.get(projected) {
                Some(o_src) if o_src == o_src_expected => {}
                _ => {
                    violations.push(format!(
                        "commuting condition fails at target profile `{key}`"
                    ));
                    if witness.is_none() {
                        witness = Some(key.clone());
                    }
                }
            }
        }
    }

    MorphismReport {
        violations,
        witness,
    }
}

struct CoproductBuild {
    game: Game,
    inj_left: GameMorphism,
    inj_right: GameMorphism,
    /// Shared player -> (left label, right label) -> combined label.
    pair_labels: BTreeMap<String, BTreeMap<(String, String), String>>,
}

fn coproduct_build(
    g: &Game,
    h: &Game,
    comb: PayoffCombinator,
) -> Result<CoproductBuild, GameError> {
    let id = format!("{}+{}", g.id, h.id);

    // The empty game is the unit: the result is the other operand.
    if g.is_empty_game() || h.is_empty_game() {
        let base = if g.is_empty_game() { h } else { g };
        let mut game = base.clone();
        game.id = id;
        let mut ident = GameMorphism::identity(base);
        ident.target = game.clone();
        let empty = GameMorphism::from_empty(&game);
        let (inj_left, inj_right) = if g.is_empty_game() {
            (empty, ident)
        } else {
            (ident, empty)
        };
        return Ok(CoproductBuild {
            game,
            inj_left,
            inj_right,
            pair_labels: BTreeMap::new(),
        });
    }

    let shared: BTreeSet<String> = g
        .players
        .iter()
        .filter(|p| h.players.contains(*p))
        .cloned()
        .collect();
    let mut players = g.players.clone();
    for p in &h.players {
        if !shared.contains(p) {
            players.push(p.clone());
        }
    }

    // Combined strategy sets; shared players take ordered pairs.
    let mut strategies: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut pair_labels: BTreeMap<String, BTreeMap<(String, String), String>> = BTreeMap::new();
    for p in &players {
        if shared.contains(p) {
            let mut list = Vec::new();
            let mut used = BTreeSet::new();
            let mut pairs = BTreeMap::new();
            for a in &g.strategies[p] {
                for b in &h.strategies[p] {
                    let mut label = format!("{a}-{b}");
                    if !used.insert(label.clone()) {
                        label = format!("{}:{a}-{}:{b}", g.id, h.id);
                        used.insert(label.clone());
                    }
                    pairs.insert((a.clone(), b.clone()), label.clone());
                    list.push(label);
                }
            }
            strategies.insert(p.clone(), list);
            pair_labels.insert(p.clone(), pairs);
        } else if g.players.contains(p) {
            strategies.insert(p.clone(), g.strategies[p].clone());
        } else {
            strategies.insert(p.clone(), h.strategies[p].clone());
        }
    }

    // Enumerate combined profiles, tracking the component profiles.
    let sets: Vec<&[String]> = players.iter().map(|p| strategies[p].as_slice()).collect();
    let profiles = cartesian(&sets);
    let mut outcomes = Vec::with_capacity(profiles.len());
    let mut rho = BTreeMap::new();
    let mut components: Vec<(String, String)> = Vec::with_capacity(profiles.len());
    let mut proj_left = BTreeMap::new();
    let mut proj_right = BTreeMap::new();

    // Strategy-index maps to avoid parsing pair labels back apart.
    let pair_split: BTreeMap<&String, BTreeMap<&String, (&String, &String)>> = pair_labels
        .iter()
        .map(|(p, pairs)| {
            let by_label = pairs
                .iter()
                .map(|((a, b), label)| (label, (a, b)))
                .collect();
            (p, by_label)
        })
        .collect();

    for profile in &profiles {
        let key = profile_key(profile);
        let mut g_parts = Vec::new();
        let mut h_parts = Vec::new();
        for (p, label) in players.iter().zip(profile.iter()) {
            if shared.contains(p) {
                let (a, b) = pair_split[p][label];
                g_parts.push(a.clone());
                h_parts.push(b.clone());
            } else if g.players.contains(p) {
                g_parts.push(label.clone());
            } else {
                h_parts.push(label.clone());
            }
        }
        // Component parts were collected in combined-player order,
        // which preserves each component's own player order.
        let g_key = profile_key(&g_parts);
        let h_key = profile_key(&h_parts);
        let og = g
            .rho
            .get(&g_key)
            .ok_or_else(|| GameError::UnknownProfile(g_key.clone()))?;
        let oh = h
            .rho
            .get(&h_key)
            .ok_or_else(|| GameError::UnknownProfile(h_key.clone()))?;
        let outcome = format!("({og},{oh})");
        outcomes.push(outcome.clone());
        rho.insert(key.clone(), outcome);
        components.push((og.clone(), oh.clone()));
        proj_left.insert(key.clone(), g_key);
        proj_right.insert(key, h_key);
    }

    // Payoffs: own component for exclusive players, combined for
    // shared players.
    let mut payoffs: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for p in &players {
        let mut row = BTreeMap::new();
        for (outcome, (og, oh)) in outcomes.iter().zip(components.iter()) {
            let value = if shared.contains(p) {
                comb.apply(g.payoffs[p][og], h.payoffs[p][oh])
            } else if g.players.contains(p) {
                g.payoffs[p][og]
            } else {
                h.payoffs[p][oh]
            };
            row.insert(outcome.clone(), value);
        }
        payoffs.insert(p.clone(), row);
    }

    let game = Game {
        id,
        players: players.clone(),
        strategies,
        outcomes: outcomes.clone(),
        rho,
        payoffs,
    };

    // Injections: embed via the other game's first strategies, with
    // the outcome inclusion defined on the slice where the other
    // component sits at its reference outcome.
    let g_ref = profile_key(&g.reference_profile().expect("g is nonempty"));
    let h_ref = profile_key(&h.reference_profile().expect("h is nonempty"));
    let og_ref = g.rho[&g_ref].clone();
    let oh_ref = h.rho[&h_ref].clone();

    let mut inc_left: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for p in &g.players {
        let map = g.strategies[p]
            .iter()
            .map(|a| {
                let image = if shared.contains(p) {
                    pair_labels[p][&(a.clone(), h.strategies[p][0].clone())].clone()
                } else {
                    a.clone()
                };
                (a.clone(), image)
            })
            .collect();
        inc_left.insert(p.clone(), map);
    }
    let mut inc_right: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for p in &h.players {
        let map = h.strategies[p]
            .iter()
            .map(|b| {
                let image = if shared.contains(p) {
                    pair_labels[p][&(g.strategies[p][0].clone(), b.clone())].clone()
                } else {
                    b.clone()
                };
                (b.clone(), image)
            })
            .collect();
        inc_right.insert(p.clone(), map);
    }

    let mut out_left = BTreeMap::new();
    let mut out_right = BTreeMap::new();
    for (outcome, (og, oh)) in outcomes.iter().zip(components.iter()) {
        if oh == &oh_ref {
            out_left.insert(outcome.clone(), og.clone());
        }
        if og == &og_ref {
            out_right.insert(outcome.clone(), oh.clone());
        }
    }

    let inj_left = GameMorphism {
        source: g.clone(),
        target: game.clone(),
        strategy_inc: inc_left,
        profile_proj: proj_left,
        outcome_inc: out_left,
    };
    let inj_right = GameMorphism {
        source: h.clone(),
        target: game.clone(),
        strategy_inc: inc_right,
        profile_proj: proj_right,
        outcome_inc: out_right,
    };
    Ok(CoproductBuild {
        game,
        inj_left,
        inj_right,
        pair_labels,
    })
}

/// Direct sum of two games with a chosen payoff combinator for
/// players present in both: combined players get strategy pairs
/// `a-b`, outcomes are pairs `(o,o')`, exclusive players keep their
/// own payoffs and shared players have theirs merged by `comb`.
pub fn coproduct_with(g: &Game, h: &Game, comb: PayoffCombinator) -> Result<Game, GameError> {
    Ok(coproduct_build(g, h, comb)?.game)
}

/// [`coproduct_with`] under the product combinator.
pub fn coproduct(g: &Game, h: &Game) -> Result<Game, GameError> {
    coproduct_with(g, h, PayoffCombinator::Product)
}

/// The coproduct together with its two canonical injections.
pub fn coproduct_injections(
    g: &Game,
    h: &Game,
    comb: PayoffCombinator,
) -> Result<(Game, GameMorphism, GameMorphism), GameError> {
    let build = coproduct_build(g, h, comb)?;
    Ok((build.game, build.inj_left, build.inj_right))
}

/// Is the morphism an isomorphism (same player set, per-player
/// bijective strategy embedding)?
fn is_iso(m: &GameMorphism) -> bool {
    let sp: BTreeSet<_> = m.source.players.iter().collect();
    let tp: BTreeSet<_> = m.target.players.iter().collect();
    if sp != tp {
        return false;
    }
    m.source.players.iter().all(|p| {
        let Some(inc) = m.strategy_inc.get(p) else {
            return m.source.strategies[p].is_empty();
        };
        let image: BTreeSet<_> = inc.values().collect();
        inc.len() == m.source.strategies[p].len()
            && image.len() == m.target.strategies[p].len()
    })
}

/// Invert an isomorphism: strategy maps are reversed and the profile
/// and outcome maps are rebuilt from them.
fn invert_iso(m: &GameMorphism) -> Result<GameMorphism, GameError> {
    if !is_iso(m) {
        return Err(GameError::NotIso(m.source.id.clone(), m.target.id.clone()));
    }
    let mut strategy_inc = BTreeMap::new();
    for (p, map) in &m.strategy_inc {
        let inverted: BTreeMap<String, String> =
            map.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        strategy_inc.insert(p.clone(), inverted);
    }
    let mut profile_proj = BTreeMap::new();
    let mut outcome_inc = BTreeMap::new();
    for profile in m.source.profiles() {
        let src_key = profile_key(&profile);
        let embedded: Vec<String> = m
            .target
            .players
            .iter()
            .map(|p| {
                let idx = m.source.player_index(p).expect("iso shares players");
                m.strategy_inc[p][&profile[idx]].clone()
            })
            .collect();
        let tgt_key = profile_key(&embedded);
        outcome_inc.insert(m.source.rho[&src_key].clone(), m.target.rho[&tgt_key].clone());
        profile_proj.insert(src_key, tgt_key);
    }
    Ok(GameMorphism {
        source: m.target.clone(),
        target: m.source.clone(),
        strategy_inc,
        profile_proj,
        outcome_inc,
    })
}

/// Rename one strategy label of one player, rewriting profile keys in
/// the game's `rho` and in any morphism projections targeting it.
fn relabel_strategy(
    game: &mut Game,
    morphisms: &mut [&mut GameMorphism],
    player: &str,
    old: &str,
    new: &str,
) {
    let idx = game
        .player_index(player)
        .expect("relabel player exists");
    if let Some(list) = game.strategies.get_mut(player) {
        for label in list.iter_mut() {
            if label == old {
                *label = new.to_string();
            }
        }
    }
    let rekey = |key: &str| -> String {
        let mut parts = split_key(key);
        if parts.get(idx).map(|s| s == old).unwrap_or(false) {
            parts[idx] = new.to_string();
        }
        profile_key(&parts)
    };
    game.rho = game
        .rho
        .iter()
        .map(|(k, v)| (rekey(k), v.clone()))
        .collect();
    for m in morphisms.iter_mut() {
        for map in m.strategy_inc.values_mut() {
            for value in map.values_mut() {
                if value == old {
                    *value = new.to_string();
                }
            }
        }
        m.profile_proj = m
            .profile_proj
            .iter()
            .map(|(k, v)| (rekey(k), v.clone()))
            .collect();
    }
}

fn pushout_with_legs(
    f: &GameMorphism,
    g: &GameMorphism,
) -> Result<(Game, GameMorphism, GameMorphism), GameError> {
    if f.source != g.source {
        return Err(GameError::SourceMismatch(
            f.source.id.clone(),
            g.source.id.clone(),
        ));
    }
    for (name, m) in [("left", f), ("right", g)] {
        let report = check_game_morphism(m);
        if !report.ok() {
            return Err(GameError::MorphismRejected(format!(
                "{name} leg: {}",
                report.violations.join("; ")
            )));
        }
    }

    // Pushout along an isomorphism is the other leg's target.
    if is_iso(f) {
        let leg_left = GameMorphism::compose(&invert_iso(f)?, g)?;
        let leg_right = GameMorphism::identity(&g.target);
        return Ok((g.target.clone(), leg_left, leg_right));
    }
    if is_iso(g) {
        let leg_left = GameMorphism::identity(&f.target);
        let leg_right = GameMorphism::compose(&invert_iso(g)?, f)?;
        return Ok((f.target.clone(), leg_left, leg_right));
    }

    // Gluing along the empty game is the coproduct.
    if f.source.is_empty_game() {
        let build = coproduct_build(&f.target, &g.target, PayoffCombinator::Product)?;
        return Ok((build.game, build.inj_left, build.inj_right));
    }

    // General case: only players of the common subgame may be shared
    // by the two targets; any other overlap has no prescribed
    // identification.
    let outside: Vec<String> = f
        .target
        .players
        .iter()
        .filter(|p| g.target.players.contains(*p) && !f.source.players.contains(*p))
        .cloned()
        .collect();
    if !outside.is_empty() {
        return Err(GameError::SharedOutsideSource(outside));
    }

    let build = coproduct_build(&f.target, &g.target, PayoffCombinator::Product)?;
    let mut game = build.game;
    let mut inj_left = build.inj_left;
    let mut inj_right = build.inj_right;
    game.id = format!("po({},{})", f.target.id, g.target.id);

    // Collapse the two images of each common-subgame strategy onto a
    // single label named after the source strategy.
    for p in &f.source.players {
        for s in &f.source.strategies[p] {
            let a = f.strategy_inc[p][s].clone();
            let b = g.strategy_inc[p][s].clone();
            let old = build.pair_labels[p][&(a, b)].clone();
            let mut new = s.clone();
            let taken = game.strategies[p]
                .iter()
                .any(|label| *label == new && *label != old);
            if taken {
                new = format!("{}:{}", f.source.id, s);
            }
            if new != old {
                relabel_strategy(
                    &mut game,
                    &mut [&mut inj_left, &mut inj_right],
                    p,
                    &old,
                    &new,
                );
            }
        }
    }
    inj_left.target = game.clone();
    inj_right.target = game.clone();
    Ok((game, inj_left, inj_right))
}

/// Glue the targets of two morphisms with a common source: the
/// coproduct of the targets with the two images of the source
/// identified (pushout). A leg that is an isomorphism returns the
/// other leg's target; gluing along the empty game is the plain
/// coproduct. Targets may only share players that come from the
/// common source.
pub fn pushout(f: &GameMorphism, g: &GameMorphism) -> Result<Game, GameError> {
    Ok(pushout_with_legs(f, g)?.0)
}

/// Two games embedded in a common apex.
#[derive(Debug, Clone, Serialize)]
pub struct Cospan {
    pub left: Game,
    pub right: Game,
    pub apex: Game,
    pub left_leg: GameMorphism,
    pub right_leg: GameMorphism,
}

impl Cospan {
    pub fn new(
        left: Game,
        right: Game,
        apex: Game,
        left_leg: GameMorphism,
        right_leg: GameMorphism,
    ) -> Result<Cospan, GameError> {
        let cospan = Cospan {
            left,
            right,
            apex,
            left_leg,
            right_leg,
        };
        cospan.validate()?;
        Ok(cospan)
    }

    /// The identity cospan on `g` (both legs the identity).
    pub fn identity(g: &Game) -> Cospan {
        Cospan {
            left: g.clone(),
            right: g.clone(),
            apex: g.clone(),
            left_leg: GameMorphism::identity(g),
            right_leg: GameMorphism::identity(g),
        }
    }

    /// The cospan exhibiting both games inside their coproduct.
    pub fn from_coproduct(g: &Game, h: &Game, comb: PayoffCombinator) -> Result<Cospan, GameError> {
        let (apex, left_leg, right_leg) = coproduct_injections(g, h, comb)?;
        Ok(Cospan {
            left: g.clone(),
            right: h.clone(),
            apex,
            left_leg,
            right_leg,
        })
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.left_leg.source != self.left
            || self.right_leg.source != self.right
            || self.left_leg.target != self.apex
            || self.right_leg.target != self.apex
        {
            return Err(GameError::MorphismRejected(
                "cospan legs do not connect its games".to_string(),
            ));
        }
        for (name, leg) in [("left", &self.left_leg), ("right", &self.right_leg)] {
            let report = check_game_morphism(leg);
            if !report.ok() {
                return Err(GameError::MorphismRejected(format!(
                    "{name} leg: {}",
                    report.violations.join("; ")
                )));
            }
        }
        Ok(())
    }
}

/// Compose two cospans sharing a middle game: the new apex is the
/// pushout of the two apexes over the middle, and the outer legs are
/// composed with the pushout injections (and re-verified).
pub fn compose_cospans(a: &Cospan, b: &Cospan) -> Result<Cospan, GameError> {
    if a.right != b.left {
        return Err(GameError::MiddleMismatch(
            a.right.id.clone(),
            b.left.id.clone(),
        ));
    }
    let (apex, into_a, into_b) = pushout_with_legs(&a.right_leg, &b.left_leg)?;
    let left_leg = GameMorphism::compose(&a.left_leg, &into_a)?;
    let right_leg = GameMorphism::compose(&b.right_leg, &into_b)?;
    for (name, leg) in [("left", &left_leg), ("right", &right_leg)] {
        let report = check_game_morphism(leg);
        if !report.ok() {
            return Err(GameError::MorphismRejected(format!(
                "composed {name} leg: {}",
                report.violations.join("; ")
            )));
        }
    }
    Ok(Cospan {
        left: a.left.clone(),
        right: b.right.clone(),
        apex,
        left_leg,
        right_leg,
    })
}

/// Is `whole` the minimal game wiring the parts together, i.e.
/// isomorphic in player/strategy/outcome structure to the iterated
/// coproduct of `parts`?
pub fn check_wiring_minimality(parts: &[&Game], whole: &Game) -> Result<bool, GameError> {
    let mut acc = Game::empty();
    for part in parts {
        acc = coproduct(&acc, part)?;
    }
    let acc_players: BTreeSet<_> = acc.players.iter().cloned().collect();
    let whole_players: BTreeSet<_> = whole.players.iter().cloned().collect();
    if acc_players != whole_players {
        return Ok(false);
    }
    for p in &acc.players {
        if acc.strategies[p].len() != whole.strategies[p].len() {
            return Ok(false);
        }
    }
    Ok(acc.outcomes.len() == whole.outcomes.len())
}

/// One recorded step of a box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxRecord {
    pub state: String,
    pub input: Vec<String>,
    pub profile: String,
}

/// A game wrapped as a stateful process: input port typed by
/// outcomes, output port typed by profiles, a finite state set with a
/// per-player payoff-instantiation tag, a total choice map from
/// states to profiles, and per-player forests recording the state
/// nodes visited (paths only ever grow).
#[derive(Debug, Clone, Serialize)]
pub struct GameBox {
    pub game: Game,
    pub states: Vec<String>,
    pub state: String,
    /// Which payoff instantiation applies per player (for example
    /// `own`, `product`, `sum`); descriptive tags carried by the
    /// states.
    pub instantiation: BTreeMap<String, String>,
    /// The choice map from states to profile keys.
    pub choices: BTreeMap<String, String>,
    pub forests: BTreeMap<String, Vec<String>>,
    pub trace: Vec<BoxRecord>,
}

impl GameBox {
    pub fn new(
        game: Game,
        states: Vec<String>,
        instantiation: BTreeMap<String, String>,
        choices: BTreeMap<String, String>,
        initial: &str,
    ) -> Result<GameBox, GameError> {
        if !states.iter().any(|s| s == initial) {
            return Err(GameError::UnknownState(initial.to_string()));
        }
        for s in &states {
            match choices.get(s) {
                None => return Err(GameError::MissingChoice(s.clone())),
                Some(profile) => {
                    if game.is_empty_game() {
                        if !profile.is_empty() {
                            return Err(GameError::UnknownProfile(profile.clone()));
                        }
                    } else if !game.rho.contains_key(profile) {
                        return Err(GameError::UnknownProfile(profile.clone()));
                    }
                }
            }
        }
        for p in &game.players {
            if !instantiation.contains_key(p) {
                return Err(GameError::UnknownPlayer(p.clone()));
            }
        }
        let forests = game
            .players
            .iter()
            .map(|p| (p.clone(), Vec::new()))
            .collect();
        Ok(GameBox {
            game,
            states,
            state: initial.to_string(),
            instantiation,
            choices,
            forests,
            trace: Vec::new(),
        })
    }
}

/// Run the box once: validate the input outcomes, return the full
/// per-player payoff vectors (the payoff side of the box), the
/// profile chosen at the current state (the choice side), and a new
/// box whose player paths have grown by the current state node. The
/// empty-game box is a no-op with empty outputs.
pub fn box_step(
    b: &GameBox,
    input: &[String],
) -> Result<(BTreeMap<String, BTreeMap<String, f64>>, String, GameBox), GameError> {
    for outcome in input {
        if !b.game.outcomes.contains(outcome) {
            return Err(GameError::UnknownOutcome(outcome.clone()));
        }
    }
    let profile = b
        .choices
        .get(&b.state)
        .ok_or_else(|| GameError::MissingChoice(b.state.clone()))?
        .clone();
    let payoff_vectors = b.game.payoffs.clone();
    let mut next = b.clone();
    for path in next.forests.values_mut() {
        path.push(b.state.clone());
    }
    next.trace.push(BoxRecord {
        state: b.state.clone(),
        input: input.to_vec(),
        profile: profile.clone(),
    });
    Ok((payoff_vectors, profile, next))
}

/// A random canonical game over the given players: 1–3 strategies
/// each, payoffs uniform in [0.1, 10] (strictly positive, as the
/// composition propositions require).
pub fn random_game<R: rand::Rng>(rng: &mut R, id: &str, players: &[&str]) -> Game {
    let player_ids: Vec<String> = players.iter().map(|p| p.to_string()).collect();
    let mut strategies = BTreeMap::new();
    for p in &player_ids {
        let n = rng.gen_range(1..=3);
        let labels: Vec<String> = (1..=n).map(|k| format!("s{k}")).collect();
        strategies.insert(p.clone(), labels);
    }
    let sets: Vec<&[String]> = player_ids
        .iter()
        .map(|p| strategies[p].as_slice())
        .collect();
    let profiles = cartesian(&sets);
    let mut payoffs: BTreeMap<String, BTreeMap<String, f64>> = player_ids
        .iter()
        .map(|p| (p.clone(), BTreeMap::new()))
        .collect();
    for profile in &profiles {
        let key = profile_key(profile);
        for p in &player_ids {
            let value = rng.gen_range(0.1..=10.0);
            payoffs.get_mut(p).expect("row exists").insert(key.clone(), value);
        }
    }
    Game::from_parts(id, player_ids, strategies, payoffs).expect("random game is canonical")
}

#[cfg(test)]
mod tests {
    use super::classic;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn solo2() -> Game {
        Game::from_tables(
            "solo2",
            &[("2", &["x1", "x2"])],
            &[("x1", &[1.0]), ("x2", &[1.0])],
        )
        .unwrap()
    }

    /// Morphism of the solo player-2 game into a two-player game,
    /// embedding via `to` (x1 -> to[0], x2 -> to[1]) where player 2
    /// sits at `index` in the target's player order.
    fn solo2_into(target: &Game, to: [&str; 2], index: usize) -> GameMorphism {
        let strategy_inc: BTreeMap<String, BTreeMap<String, String>> = [(
            "2".to_string(),
            [
                ("x1".to_string(), to[0].to_string()),
                ("x2".to_string(), to[1].to_string()),
            ]
            .into_iter()
            .collect(),
        )]
        .into_iter()
        .collect();
        let back: BTreeMap<&str, String> = [(to[0], "x1".to_string()), (to[1], "x2".to_string())]
            .into_iter()
            .collect();
        let mut profile_proj = BTreeMap::new();
        let mut outcome_inc = BTreeMap::new();
        let reference = target.reference_profile().unwrap();
        for profile in target.profiles() {
            let key = profile_key(&profile);
            profile_proj.insert(key.clone(), back[profile[index].as_str()].clone());
            let at_reference = profile
                .iter()
                .enumerate()
                .all(|(i, label)| i == index || label == &reference[i]);
            if at_reference {
                outcome_inc.insert(
                    target.rho[&key].clone(),
                    back[profile[index].as_str()].clone(),
                );
            }
        }
        GameMorphism {
            source: solo2(),
            target: target.clone(),
            strategy_inc,
            profile_proj,
            outcome_inc,
        }
    }

    #[test]
    fn canonical_game_enumerates_profiles_in_declared_order() {
        let bos = classic::battle_of_the_sexes();
        assert_eq!(bos.players, vec!["1", "2"]);
        assert_eq!(
            bos.profile_keys(),
            vec!["Bx|Bx", "Bx|Bll", "Bll|Bx", "Bll|Bll"]
        );
        assert_eq!(bos.outcomes, bos.profile_keys());
        assert_eq!(bos.payoff("1", "Bx|Bx"), Some(2.0));
        assert_eq!(bos.payoff("2", "Bll|Bll"), Some(2.0));
        assert_eq!(bos.payoff("1", "Bx|Bll"), Some(0.0));
    }

    #[test]
    fn validation_warns_on_zeros_but_structure_passes() {
        let report = validate_game(&classic::battle_of_the_sexes());
        assert!(report.ok(), "violations: {:?}", report.violations);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn validation_flags_rho_duplicates() {
        let mut bos = classic::battle_of_the_sexes();
        bos.rho.insert("Bx|Bll".to_string(), "Bx|Bx".to_string());
        let report = validate_game(&bos);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("not injective")));
    }

    #[test]
    fn empty_game_is_valid_and_has_no_profiles() {
        let g = empty_game();
        assert!(g.profiles().is_empty());
        assert!(g.outcomes.is_empty());
        assert!(validate_game(&g).ok());
    }

    #[test]
    fn initial_morphism_exists_into_any_game() {
        let m = GameMorphism::from_empty(&classic::battle_of_the_sexes());
        let report = check_game_morphism(&m);
        assert!(report.ok(), "violations: {:?}", report.violations);
    }

    #[test]
    fn identity_morphism_passes() {
        for g in [
            classic::battle_of_the_sexes(),
            classic::prisoners_dilemma(),
            empty_game(),
        ] {
            let report = check_game_morphism(&GameMorphism::identity(&g));
            assert!(report.ok(), "violations: {:?}", report.violations);
        }
    }

    #[test]
    fn coproduct_of_published_games_matches_tables() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let sum = coproduct(&bos, &pd).unwrap();
        assert_eq!(sum.players, vec!["1", "2", "3"]);
        assert_eq!(
            sum.strategies["2"],
            vec!["Bx-C", "Bx-D", "Bll-C", "Bll-D"]
        );
        assert_eq!(sum.outcomes.len(), 16);
        // Profile (Bx, Bx-D, D): player 1 keeps 2, player 2 takes the
        // product 1*1, player 3 keeps 1.
        let outcome = sum.rho["Bx|Bx-D|D"].clone();
        assert_eq!(outcome, "(Bx|Bx,D|D)");
        assert_eq!(sum.payoff("1", &outcome), Some(2.0));
        assert_eq!(sum.payoff("2", &outcome), Some(1.0));
        assert_eq!(sum.payoff("3", &outcome), Some(1.0));
        assert!(validate_game(&sum).ok());
    }

    #[test]
    fn coproduct_with_empty_is_the_identity() {
        let bos = classic::battle_of_the_sexes();
        for sum in [
            coproduct(&bos, &empty_game()).unwrap(),
            coproduct(&empty_game(), &bos).unwrap(),
        ] {
            assert_eq!(sum.players, bos.players);
            assert_eq!(sum.strategies, bos.strategies);
            assert_eq!(sum.outcomes, bos.outcomes);
        }
    }

    #[test]
    fn disjoint_coproduct_multiplies_profiles() {
        let bos = classic::battle_of_the_sexes();
        let solo = Game::from_tables("g9", &[("9", &["l", "r"])], &[("l", &[1.0]), ("r", &[2.0])])
            .unwrap();
        let sum = coproduct(&bos, &solo).unwrap();
        assert_eq!(sum.profiles().len(), 8);
        assert_eq!(sum.outcomes.len(), 8);
        // Exclusive players keep their own payoffs.
        assert_eq!(sum.payoff("9", &sum.rho["Bx|Bx|r"]), Some(2.0));
    }

    #[test]
    fn coproduct_injections_are_morphisms() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let (_, left, right) =
            coproduct_injections(&bos, &pd, PayoffCombinator::Product).unwrap();
        for (name, leg) in [("left", &left), ("right", &right)] {
            let report = check_game_morphism(leg);
            assert!(report.ok(), "{name}: {:?}", report.violations);
        }
        // The left projection drops player 3 and player 2's second
        // pair component.
        assert_eq!(left.profile_proj["Bx|Bx-D|D"], "Bx|Bx");
        assert_eq!(right.profile_proj["Bx|Bx-D|D"], "D|D");
    }

    #[test]
    fn swapped_projection_breaks_commuting_with_witness() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let (_, mut left, _) =
            coproduct_injections(&bos, &pd, PayoffCombinator::Product).unwrap();
        // Swap player 2's component in the projection of two profiles.
        let a = left.profile_proj["Bx|Bx-C|C"].clone();
        let b = left.profile_proj["Bx|Bll-C|C"].clone();
        left.profile_proj.insert("Bx|Bx-C|C".to_string(), b);
        left.profile_proj.insert("Bx|Bll-C|C".to_string(), a);
        let report = check_game_morphism(&left);
        assert!(!report.ok());
        assert!(report.witness.is_some());
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("commuting")));
    }

    #[test]
    fn pushout_along_identity_returns_other_target() {
        let bos = classic::battle_of_the_sexes();
        let id = GameMorphism::identity(&bos);
        let glued = pushout(&id, &id).unwrap();
        assert_eq!(glued.players, bos.players);
        assert_eq!(glued.strategies, bos.strategies);
        assert_eq!(glued.outcomes, bos.outcomes);
    }

    #[test]
    fn pushout_over_empty_game_is_coproduct() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let f = GameMorphism::from_empty(&bos);
        let g = GameMorphism::from_empty(&pd);
        let glued = pushout(&f, &g).unwrap();
        let sum = coproduct(&bos, &pd).unwrap();
        assert_eq!(glued.players, sum.players);
        assert_eq!(glued.strategies, sum.strategies);
        assert_eq!(glued.outcomes.len(), sum.outcomes.len());
    }

    #[test]
    fn pushout_identifies_the_shared_solo_player() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let f = solo2_into(&bos, ["Bx", "Bll"], 1);
        assert!(check_game_morphism(&f).ok());
        let g = solo2_into(&pd, ["C", "D"], 0);
        assert!(check_game_morphism(&g).ok());
        let glued = pushout(&f, &g).unwrap();
        assert_eq!(glued.players.len(), 3);
        assert_eq!(glued.outcomes.len(), 16);
        let p2: BTreeSet<_> = glued.strategies["2"].iter().cloned().collect();
        let expected: BTreeSet<String> = ["x1", "x2", "Bx-D", "Bll-C"]
            .into_iter()
            .map(str::to_string)
            .collect();
        assert_eq!(p2, expected);
        assert!(validate_game(&glued).ok());
    }

    #[test]
    fn pushout_rejects_players_shared_outside_the_source() {
        let bos = classic::battle_of_the_sexes();
        // A second game also naming player 1, which solo2 knows
        // nothing about.
        let other = Game::from_tables(
            "other",
            &[("1", &["L", "R"]), ("2", &["C", "D"])],
            &[
                ("L|C", &[1.0, 1.0]),
                ("L|D", &[1.0, 1.0]),
                ("R|C", &[1.0, 1.0]),
                ("R|D", &[1.0, 1.0]),
            ],
        )
        .unwrap();
        let f = solo2_into(&bos, ["Bx", "Bll"], 1);
        let g = solo2_into(&other, ["C", "D"], 1);
        let err = pushout(&f, &g).unwrap_err();
        assert!(matches!(err, GameError::SharedOutsideSource(ref ps) if ps == &vec!["1".to_string()]));
    }

    #[test]
    fn pushout_rejects_broken_legs() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let mut f = solo2_into(&bos, ["Bx", "Bll"], 1);
        // Make the strategy embedding non-injective.
        f.strategy_inc
            .get_mut("2")
            .unwrap()
            .insert("x2".to_string(), "Bx".to_string());
        let g = solo2_into(&pd, ["C", "D"], 0);
        let err = pushout(&f, &g).unwrap_err();
        assert!(matches!(err, GameError::MorphismRejected(_)));
    }

    #[test]
    fn cospans_compose_and_identity_preserves_the_apex() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let a = Cospan::from_coproduct(&bos, &pd, PayoffCombinator::Product).unwrap();
        let composed = compose_cospans(&a, &Cospan::identity(&pd)).unwrap();
        assert_eq!(composed.apex.players, a.apex.players);
        assert_eq!(composed.apex.strategies, a.apex.strategies);
        composed.validate().unwrap();
    }

    #[test]
    fn cospan_composition_collects_all_players() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let g3 = Game::from_tables("g3", &[("4", &["u", "d"])], &[("u", &[1.0]), ("d", &[2.0])])
            .unwrap();
        let a = Cospan::from_coproduct(&bos, &pd, PayoffCombinator::Product).unwrap();
        let b = Cospan::from_coproduct(&pd, &g3, PayoffCombinator::Product).unwrap();
        let composed = compose_cospans(&a, &b).unwrap();
        let players: BTreeSet<_> = composed.apex.players.iter().cloned().collect();
        let expected: BTreeSet<String> =
            ["1", "2", "3", "4"].into_iter().map(str::to_string).collect();
        assert_eq!(players, expected);
        composed.validate().unwrap();
    }

    #[test]
    fn cospan_composition_requires_matching_middle() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let a = Cospan::from_coproduct(&bos, &pd, PayoffCombinator::Product).unwrap();
        let b = Cospan::identity(&bos);
        let err = compose_cospans(&a, &b).unwrap_err();
        assert!(matches!(err, GameError::MiddleMismatch(_, _)));
    }

    #[test]
    fn wiring_minimality_accepts_the_coproduct_and_rejects_padding() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let sum = coproduct(&bos, &pd).unwrap();
        assert!(check_wiring_minimality(&[&bos, &pd], &sum).unwrap());
        assert!(check_wiring_minimality(&[&bos], &bos).unwrap());
        let dummy =
            Game::from_tables("dummy", &[("9", &["z"])], &[("z", &[1.0])]).unwrap();
        let padded = coproduct(&sum, &dummy).unwrap();
        assert!(!check_wiring_minimality(&[&bos, &pd], &padded).unwrap());
    }

    #[test]
    fn box_step_reports_payoffs_and_grows_paths() {
        let bos = classic::battle_of_the_sexes();
        let b = GameBox::new(
            bos.clone(),
            vec!["s0".to_string()],
            bos.players
                .iter()
                .map(|p| (p.clone(), "own".to_string()))
                .collect(),
            [("s0".to_string(), "Bx|Bx".to_string())].into_iter().collect(),
            "s0",
        )
        .unwrap();
        let (payoffs, profile, next) = box_step(&b, &["Bx|Bx".to_string()]).unwrap();
        assert_eq!(profile, "Bx|Bx");
        assert_eq!(payoffs["1"]["Bx|Bx"], 2.0);
        assert_eq!(payoffs["2"]["Bx|Bx"], 1.0);
        assert_eq!(next.forests["1"], vec!["s0"]);
        let (_, _, after) = box_step(&next, &[]).unwrap();
        assert_eq!(after.forests["1"].len(), 2);
        assert!(after.forests["1"].starts_with(&next.forests["1"]));
        assert_eq!(after.trace.len(), 2);
    }

    #[test]
    fn box_rejects_foreign_outcomes_and_missing_choices() {
        let bos = classic::battle_of_the_sexes();
        let b = GameBox::new(
            bos.clone(),
            vec!["s0".to_string()],
            bos.players
                .iter()
                .map(|p| (p.clone(), "own".to_string()))
                .collect(),
            [("s0".to_string(), "Bx|Bx".to_string())].into_iter().collect(),
            "s0",
        )
        .unwrap();
        let err = box_step(&b, &["C|C".to_string()]).unwrap_err();
        assert!(matches!(err, GameError::UnknownOutcome(_)));
        let err = GameBox::new(
            bos.clone(),
            vec!["s0".to_string(), "s1".to_string()],
            bos.players
                .iter()
                .map(|p| (p.clone(), "own".to_string()))
                .collect(),
            [("s0".to_string(), "Bx|Bx".to_string())].into_iter().collect(),
            "s0",
        )
        .unwrap_err();
        assert!(matches!(err, GameError::MissingChoice(_)));
    }

    #[test]
    fn empty_box_is_a_noop() {
        let b = GameBox::new(
            empty_game(),
            vec!["idle".to_string()],
            BTreeMap::new(),
            [("idle".to_string(), String::new())].into_iter().collect(),
            "idle",
        )
        .unwrap();
        let (payoffs, profile, next) = box_step(&b, &[]).unwrap();
        assert!(payoffs.is_empty());
        assert!(profile.is_empty());
        assert!(next.forests.is_empty());
    }

    #[test]
    fn product_instantiated_box_exposes_component_products() {
        let bos = classic::battle_of_the_sexes();
        let pd = classic::prisoners_dilemma();
        let sum = coproduct(&bos, &pd).unwrap();
        let b = GameBox::new(
            sum.clone(),
            vec!["s0".to_string()],
            sum.players
                .iter()
                .map(|p| {
                    let tag = if p == "2" { "product" } else { "own" };
                    (p.clone(), tag.to_string())
                })
                .collect(),
            [("s0".to_string(), sum.profile_keys()[0].clone())]
                .into_iter()
                .collect(),
            "s0",
        )
        .unwrap();
        let (payoffs, _, _) = box_step(&b, &[]).unwrap();
        for og in &bos.outcomes {
            for oh in &pd.outcomes {
                let combined = format!("({og},{oh})");
                let expected = bos.payoff("2", og).unwrap() * pd.payoff("2", oh).unwrap();
                assert_eq!(payoffs["2"][&combined], expected);
            }
        }
    }

    #[test]
    fn coproduct_is_associative_up_to_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..40 {
            let g = random_game(&mut rng, &format!("g{trial}"), &["1", "2"]);
            let h = random_game(&mut rng, &format!("h{trial}"), &["2", "3"]);
            let k = random_game(&mut rng, &format!("k{trial}"), &["3", "4"]);
            let left = coproduct(&coproduct(&g, &h).unwrap(), &k).unwrap();
            let right = coproduct(&g, &coproduct(&h, &k).unwrap()).unwrap();
            let lp: BTreeSet<_> = left.players.iter().cloned().collect();
            let rp: BTreeSet<_> = right.players.iter().cloned().collect();
            assert_eq!(lp, rp);
            for p in &left.players {
                assert_eq!(
                    left.strategies[p].len(),
                    right.strategies[p].len(),
                    "player {p} strategy counts in trial {trial}"
                );
            }
            assert_eq!(left.outcomes.len(), right.outcomes.len());
            assert!(validate_game(&left).ok());
            assert!(validate_game(&right).ok());
        }
    }

    #[test]
    fn coproduct_rho_is_always_bijective() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..40 {
            let g = random_game(&mut rng, &format!("g{trial}"), &["1", "2", "3"]);
            let h = random_game(&mut rng, &format!("h{trial}"), &["2", "5"]);
            let (sum, left, right) =
                coproduct_injections(&g, &h, PayoffCombinator::Sum).unwrap();
            assert_eq!(sum.profiles().len(), sum.outcomes.len());
            let hit: BTreeSet<_> = sum.rho.values().collect();
            assert_eq!(hit.len(), sum.outcomes.len());
            assert!(check_game_morphism(&left).ok(), "trial {trial}");
            assert!(check_game_morphism(&right).ok(), "trial {trial}");
        }
    }

    #[test]
    fn from_tables_rejects_malformed_input() {
        assert!(matches!(
            Game::from_tables("g", &[("1", &[])], &[]),
            Err(GameError::EmptyStrategies(_))
        ));
        assert!(matches!(
            Game::from_tables(
                "g",
                &[("1", &["a|b"])],
                &[("a|b", &[1.0])],
            ),
            Err(GameError::IllegalLabel { .. })
        ));
        assert!(matches!(
            Game::from_tables(
                "g",
                &[("1", &["a", "b"])],
                &[("a", &[1.0])],
            ),
            Err(GameError::MissingPayoff { .. })
        ));
        assert!(matches!(
            Game::from_tables(
                "g",
                &[("1", &["a"]), ("1", &["b"])],
                &[("a", &[1.0, 1.0])],
            ),
            Err(GameError::DuplicatePlayer(_))
        ));
    }
}
