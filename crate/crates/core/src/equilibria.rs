//! Equilibrium computation and the laws it satisfies under game
//! composition.
//!
//! [`pure_nash`] and [`dominant_equilibria`] compute profile sets for
//! a single game. [`combine_equilibria`] pairs two equilibrium sets
//! the way [`coproduct`](crate::games::coproduct) pairs games (shared
//! players get `a-b` strategy pairs), and [`check_prop3`] verifies
//! the central law: combining component equilibria yields exactly the
//! equilibria of the combined game. [`check_lax_monoidal`] bundles
//! the unit law, the per-pair law, and the state-extended variant via
//! [`stateful_eq`] over [`GameBox`]es.
//!
//! All profile-set comparisons are exact label equality after
//! aligning pair labels with the coproduct's rendering; profiles are
//! discrete so no numeric tolerance applies. The product-combinator
//! law is only guaranteed under strictly positive payoffs; pairs with
//! zeros are still evaluated but flagged as outside that
//! precondition.

use crate::games::{
    box_step, coproduct_with, profile_key, Game, GameBox, GameError, PayoffCombinator,
};
use crate::tol;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibriaError {
    #[error("equilibrium sets use different concepts")]
    ConceptMismatch,
    #[error("box game `{0}` does not match the game under analysis")]
    BoxMismatch(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Which equilibrium notion a set was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Concept {
    PureNash,
    WeakDominance,
}

/// A pure strategy profile as a player-to-label map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile(pub BTreeMap<String, String>);

impl Profile {
    pub fn from_labels(g: &Game, labels: &[String]) -> Profile {
        Profile(
            g.players
                .iter()
                .cloned()
                .zip(labels.iter().cloned())
                .collect(),
        )
    }

    /// Render as the game's profile key (labels in player order).
    pub fn key(&self, g: &Game) -> Option<String> {
        let parts: Option<Vec<String>> =
            g.players.iter().map(|p| self.0.get(p).cloned()).collect();
        parts.map(|p| profile_key(&p))
    }

    /// Does the profile cover exactly the game's players with known
    /// strategies?
    pub fn validates_against(&self, g: &Game) -> bool {
        if self.0.len() != g.players.len() {
            return false;
        }
        g.players.iter().all(|p| {
            self.0
                .get(p)
                .map(|label| g.strategies[p].contains(label))
                .unwrap_or(false)
        })
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, s)| format!("{p}={s}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A set of equilibrium profiles of one game, optionally tagged with
/// the box state it was computed under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub game_id: String,
    pub concept: Concept,
    pub profiles: BTreeSet<Profile>,
    pub state: Option<String>,
}

impl EquilibriumSet {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Profile keys in the game's player order (for display and
    /// set-difference reporting).
    pub fn keys(&self, g: &Game) -> Vec<String> {
        self.profiles
            .iter()
            .filter_map(|p| p.key(g))
            .collect()
    }
}

/// Pure Nash equilibria by exhaustive deviation check: a profile is
/// included iff no player gains strictly more than
/// [`tol::NASH_EPS`] by a unilateral deviation (ties admitted).
pub fn pure_nash(g: &Game) -> EquilibriumSet {
    let mut profiles = BTreeSet::new();
    for profile in g.profiles() {
        if no_profitable_deviation(g, &profile) {
            profiles.insert(Profile::from_labels(g, &profile));
        }
    }
    EquilibriumSet {
        game_id: g.id.clone(),
        concept: Concept::PureNash,
        profiles,
        state: None,
    }
}

fn no_profitable_deviation(g: &Game, profile: &[String]) -> bool {
    let outcome = &g.rho[&profile_key(profile)];
    for (idx, player) in g.players.iter().enumerate() {
        let own = g.payoffs[player][outcome];
        for alt in &g.strategies[player] {
            if alt == &profile[idx] {
                continue;
            }
            let mut deviated = profile.to_vec();
            deviated[idx] = alt.clone();
            let dev_outcome = &g.rho[&profile_key(&deviated)];
            if g.payoffs[player][dev_outcome] > own + tol::NASH_EPS {
                return false;
            }
        }
    }
    true
}

/// All assignments over the given sets, with the empty family giving
/// exactly one empty assignment (opponents of a lone player).
fn assignments(sets: &[&[String]]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for prefix in &out {
            for label in *set {
                let mut a = prefix.clone();
                a.push(label.clone());
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// Profiles where every player's strategy weakly dominates all her
/// alternatives: against every opponent assignment it pays at least
/// as much (within [`tol::NASH_EPS`]).
pub fn dominant_equilibria(g: &Game) -> EquilibriumSet {
    // Per player, the set of weakly dominant strategies.
    let mut dominant: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for (idx, player) in g.players.iter().enumerate() {
        let others: Vec<&[String]> = g
            .players
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, p)| g.strategies[p].as_slice())
            .collect();
        let opponent_assignments = assignments(&others);
        let payoff = |own: &String, opponents: &[String]| -> f64 {
            let mut labels: Vec<String> = Vec::with_capacity(g.players.len());
            let mut it = opponents.iter();
            for j in 0..g.players.len() {
                if j == idx {
                    labels.push(own.clone());
                } else {
                    labels.push(it.next().expect("assignment length").clone());
                }
            }
            g.payoffs[player][&g.rho[&profile_key(&labels)]]
        };
        let mut winners = Vec::new();
        'candidate: for s in &g.strategies[player] {
            for t in &g.strategies[player] {
                if t == s {
                    continue;
                }
                for opp in &opponent_assignments {
                    if payoff(s, opp) < payoff(t, opp) - tol::NASH_EPS {
                        continue 'candidate;
                    }
                }
            }
            winners.push(s);
        }
        dominant.insert(player, winners);
    }

    let mut profiles = BTreeSet::new();
    for profile in g.profiles() {
        let all_dominant = g
            .players
            .iter()
            .zip(profile.iter())
            .all(|(p, s)| dominant[p].contains(&s));
        if all_dominant {
            profiles.insert(Profile::from_labels(g, &profile));
        }
    }
    EquilibriumSet {
        game_id: g.id.clone(),
        concept: Concept::WeakDominance,
        profiles,
        state: None,
    }
}

/// Pairwise combination of two equilibrium sets, mirroring the
/// coproduct on games: for each pair of profiles, players present in
/// both get the pair strategy `a-b`, everyone else keeps their own.
/// The combinator records the payoff contract for shared players and
/// does not affect the profile set. An empty operand yields the empty
/// set (no pairs).
pub fn combine_equilibria(
    eg: &EquilibriumSet,
    eh: &EquilibriumSet,
    _comb: PayoffCombinator,
) -> Result<EquilibriumSet, EquilibriaError> {
    if eg.concept != eh.concept {
        return Err(EquilibriaError::ConceptMismatch);
    }
    let mut profiles = BTreeSet::new();
    for s in &eg.profiles {
        for t in &eh.profiles {
            let mut combined = BTreeMap::new();
            for (player, label) in &s.0 {
                match t.0.get(player) {
                    Some(other) => {
                        combined.insert(player.clone(), format!("{label}-{other}"));
                    }
                    None => {
                        combined.insert(player.clone(), label.clone());
                    }
                }
            }
            for (player, label) in &t.0 {
                combined
                    .entry(player.clone())
                    .or_insert_with(|| label.clone());
            }
            profiles.insert(Profile(combined));
        }
    }
    let state = match (&eg.state, &eh.state) {
        (Some(a), Some(b)) => Some(format!("({a},{b})")),
        _ => None,
    };
    Ok(EquilibriumSet {
        game_id: format!("{}+{}", eg.game_id, eh.game_id),
        concept: eg.concept,
        profiles,
        state,
    })
}

/// Combine component equilibria and rename shared-player pairs to the
/// exact labels the coproduct generated (they differ only when the
/// plain `a-b` rendering collided and was qualified).
fn align_combined(
    eg: &EquilibriumSet,
    eh: &EquilibriumSet,
    g: &Game,
    h: &Game,
    sum: &Game,
) -> BTreeSet<Profile> {
    // The unit game contributes nothing: the other side's equilibria
    // are the combined equilibria.
    if g.is_empty_game() {
        return eh.profiles.clone();
    }
    if h.is_empty_game() {
        return eg.profiles.clone();
    }
    let mut out = BTreeSet::new();
    for s in &eg.profiles {
        for t in &eh.profiles {
            let mut combined = BTreeMap::new();
            for (player, label) in &s.0 {
                match t.0.get(player) {
                    Some(other) => {
                        let ia = g.strategies[player]
                            .iter()
                            .position(|l| l == label)
                            .expect("profile validates against g");
                        let ib = h.strategies[player]
                            .iter()
                            .position(|l| l == other)
                            .expect("profile validates against h");
                        let nb = h.strategies[player].len();
                        let pair = sum.strategies[player][ia * nb + ib].clone();
                        combined.insert(player.clone(), pair);
                    }
                    None => {
                        combined.insert(player.clone(), label.clone());
                    }
                }
            }
            for (player, label) in &t.0 {
                combined
                    .entry(player.clone())
                    .or_insert_with(|| label.clone());
            }
            out.insert(Profile(combined));
        }
    }
    out
}

/// Result of checking the composition law on one pair of games.
#[derive(Debug, Clone, Serialize)]
pub struct Prop3Report {
    pub left_id: String,
    pub right_id: String,
    pub coproduct_id: String,
    pub combinator: PayoffCombinator,
    /// True when the product combinator ran over non-positive payoffs
    /// (the law is only guaranteed for strictly positive ones).
    pub outside_positivity: bool,
    pub equal: bool,
    /// Profile keys found only in the coproduct's equilibria.
    pub coproduct_only: Vec<String>,
    /// Profile keys found only in the combined component equilibria.
    pub combined_only: Vec<String>,
    pub coproduct_count: usize,
    pub combined_count: usize,
}

impl Prop3Report {
    pub fn pass(&self) -> bool {
        self.equal
    }
}

fn has_nonpositive_payoff(g: &Game) -> bool {
    g.payoffs
        .values()
        .any(|row| row.values().any(|v| *v <= 0.0))
}

/// Verify the composition law on one pair: the pure Nash set of the
/// coproduct must equal the pairwise combination of the component
/// pure Nash sets (after pair-label alignment). The unit game
/// combines to the other side's equilibria.
pub fn check_prop3(
    g: &Game,
    h: &Game,
    comb: PayoffCombinator,
) -> Result<Prop3Report, EquilibriaError> {
    let sum = coproduct_with(g, h, comb)?;
    let lhs = pure_nash(&sum);
    let eg = pure_nash(g);
    let eh = pure_nash(h);
    // The pairwise combination, plus alignment to the coproduct's
    // actual labels; cardinalities must agree unless a unit game
    // collapsed the pairing.
    let combined = combine_equilibria(&eg, &eh, comb)?;
    let aligned = align_combined(&eg, &eh, g, h, &sum);
    if !g.is_empty_game() && !h.is_empty_game() {
        assert_eq!(
            combined.profiles.len(),
            aligned.len(),
            "pair-label alignment must be a bijection"
        );
    }

    let coproduct_only: Vec<String> = lhs
        .profiles
        .difference(&aligned)
        .filter_map(|p| p.key(&sum))
        .collect();
    let combined_only: Vec<String> = aligned
        .difference(&lhs.profiles)
        .filter_map(|p| p.key(&sum))
        .collect();
    let outside_positivity = comb == PayoffCombinator::Product
        && (has_nonpositive_payoff(g) || has_nonpositive_payoff(h));
    Ok(Prop3Report {
        left_id: g.id.clone(),
        right_id: h.id.clone(),
        coproduct_id: sum.id.clone(),
        combinator: comb,
        outside_positivity,
        equal: coproduct_only.is_empty() && combined_only.is_empty(),
        coproduct_only,
        combined_only,
        coproduct_count: lhs.profiles.len(),
        combined_count: aligned.len(),
    })
}

/// Equilibria of a boxed game: the box's payoff side instantiates the
/// payoffs (already merged per the box's instantiation tags), pure
/// Nash runs on them, and the result carries the box state as its
/// tag.
pub fn stateful_eq(g: &Game, b: &GameBox) -> Result<EquilibriumSet, EquilibriaError> {
    if b.game != *g {
        return Err(EquilibriaError::BoxMismatch(b.game.id.clone()));
    }
    // The payoff side of the box is its game's payoff tables; step it
    // once to obtain them through the box interface.
    let (payoffs, _, _) = box_step(b, &[])?;
    let mut instantiated = g.clone();
    instantiated.payoffs = payoffs;
    let mut set = pure_nash(&instantiated);
    set.game_id = g.id.clone();
    set.state = Some(b.state.clone());
    Ok(set)
}

/// Status of one pair inside a lax-monoidal check.
#[derive(Debug, Clone, Serialize)]
pub struct LaxPairReport {
    pub left_id: String,
    pub right_id: String,
    /// Component-law equality (the same comparison as
    /// [`check_prop3`]).
    pub equal: bool,
    /// State-extended variant: boxed equilibria of the coproduct
    /// match the combined boxed component equilibria, state included.
    pub stateful_equal: bool,
    pub outside_positivity: bool,
    pub detail: Option<String>,
}

impl LaxPairReport {
    /// A pair only counts against the law when it satisfies the
    /// positivity precondition and still fails.
    pub fn pass(&self) -> bool {
        self.outside_positivity || (self.equal && self.stateful_equal)
    }
}

/// Result of checking the lax monoidal laws over a sample of pairs.
#[derive(Debug, Clone, Serialize)]
pub struct LaxMonoidalReport {
    /// Unit law: the empty game has no equilibria.
    pub unit_ok: bool,
    pub pairs: Vec<LaxPairReport>,
}

impl LaxMonoidalReport {
    pub fn pass(&self) -> bool {
        self.unit_ok && self.pairs.iter().all(|p| p.pass())
    }
}

fn own_tags(g: &Game) -> BTreeMap<String, String> {
    g.players
        .iter()
        .map(|p| (p.clone(), "own".to_string()))
        .collect()
}

fn singleton_box(g: &Game, state: &str) -> Result<GameBox, GameError> {
    let choice = g
        .profile_keys()
        .first()
        .cloned()
        .unwrap_or_default();
    GameBox::new(
        g.clone(),
        vec![state.to_string()],
        own_tags(g),
        [(state.to_string(), choice)].into_iter().collect(),
        state,
    )
}

/// Check the equilibrium functor's monoidal laws over a sample of
/// game pairs: (a) the unit law `Eq` of the empty game is empty, (b)
/// per pair, combined component equilibria equal the coproduct's
/// equilibria, and (c) the state-extended form of (b), where each
/// side runs through a [`GameBox`] and the coproduct's state is the
/// pair of component states.
pub fn check_lax_monoidal(
    sample: &[(Game, Game)],
    comb: PayoffCombinator,
) -> Result<LaxMonoidalReport, EquilibriaError> {
    let unit_ok = pure_nash(&Game::empty()).is_empty();
    let mut pairs = Vec::with_capacity(sample.len());
    for (g, h) in sample {
        let plain = check_prop3(g, h, comb)?;

        // State-extended variant.
        let sum = coproduct_with(g, h, comb)?;
        let box_g = singleton_box(g, "sg")?;
        let box_h = singleton_box(h, "sh")?;
        let paired_state = "(sg,sh)";
        let mut tags = own_tags(&sum);
        for p in g.players.iter().filter(|p| h.players.contains(*p)) {
            tags.insert(p.clone(), comb.label().to_string());
        }
        let box_sum = GameBox::new(
            sum.clone(),
            vec![paired_state.to_string()],
            tags,
            [(
                paired_state.to_string(),
                sum.profile_keys().first().cloned().unwrap_or_default(),
            )]
            .into_iter()
            .collect(),
            paired_state,
        )?;
        let stateful_sum = stateful_eq(&sum, &box_sum)?;
        let stateful_g = stateful_eq(g, &box_g)?;
        let stateful_h = stateful_eq(h, &box_h)?;
        let combined_stateful = combine_equilibria(&stateful_g, &stateful_h, comb)?;
        let aligned = align_combined(&stateful_g, &stateful_h, g, h, &sum);
        let state_matches = if g.is_empty_game() || h.is_empty_game() {
            // Unit coproducts keep the surviving side's equilibria;
            // the paired state is still what the box reports.
            stateful_sum.state.as_deref() == Some(paired_state)
        } else {
            stateful_sum.state.as_deref() == Some(paired_state)
                && combined_stateful.state.as_deref() == Some(paired_state)
        };
        let stateful_equal = stateful_sum.profiles == aligned && state_matches;

        let detail = if plain.equal && stateful_equal {
            None
        } else {
            Some(format!(
                "coproduct-only: [{}]; combined-only: [{}]",
                plain.coproduct_only.join(", "),
                plain.combined_only.join(", ")
            ))
        };
        pairs.push(LaxPairReport {
            left_id: g.id.clone(),
            right_id: h.id.clone(),
            equal: plain.equal,
            stateful_equal,
            outside_positivity: plain.outside_positivity,
            detail,
        });
    }
    Ok(LaxMonoidalReport { unit_ok, pairs })
}

/// A seeded random pair of small positive games sharing exactly
/// player `2`: 2–3 players each, 1–3 strategies per player, payoffs
/// uniform in [0.1, 10].
pub fn random_positive_pair<R: rand::Rng>(rng: &mut R, tag: usize) -> (Game, Game) {
    let g_players: Vec<&str> = if rng.gen_bool(0.5) {
        vec!["1", "2", "4"]
    } else {
        vec!["1", "2"]
    };
    let h_players: Vec<&str> = if rng.gen_bool(0.5) {
        vec!["2", "3", "5"]
    } else {
        vec!["2", "3"]
    };
    (
        crate::games::random_game(rng, &format!("G{tag}"), &g_players),
        crate::games::random_game(rng, &format!("H{tag}"), &h_players),
    )
}
