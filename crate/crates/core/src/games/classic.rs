//! Stock two-player games used throughout the tests and fixtures.

use super::Game;

/// Battle of the Sexes between players `1` and `2`: both prefer to
/// coordinate (payoffs 2/1 at `Bx|Bx`, 1/2 at `Bll|Bll`) and get
/// nothing otherwise.
pub fn battle_of_the_sexes() -> Game {
    Game::from_tables(
        "BoS",
        &[("1", &["Bx", "Bll"]), ("2", &["Bx", "Bll"])],
        &[
            ("Bx|Bx", &[2.0, 1.0]),
            ("Bx|Bll", &[0.0, 0.0]),
            ("Bll|Bx", &[0.0, 0.0]),
            ("Bll|Bll", &[1.0, 2.0]),
        ],
    )
    .expect("battle of the sexes is canonical")
}

/// Prisoner's Dilemma between players `2` and `3`: defection
/// dominates, mutual cooperation pays 2/2, mutual defection 1/1.
pub fn prisoners_dilemma() -> Game {
    Game::from_tables(
        "PD",
        &[("2", &["C", "D"]), ("3", &["C", "D"])],
        &[
            ("C|C", &[2.0, 2.0]),
            ("C|D", &[0.0, 3.0]),
            ("D|C", &[3.0, 0.0]),
            ("D|D", &[1.0, 1.0]),
        ],
    )
    .expect("prisoner's dilemma is canonical")
}
