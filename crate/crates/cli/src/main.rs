//! `catecon` — command-line front end for the catecon library.
//!
//! Every verb reads JSON input files, runs the corresponding library
//! checks, and emits a [`Report`] either as plain text or as JSON
//! (`--format structured`).  Exit codes: 0 when all checks pass, 1
//! when a verification check fails, 2 when the inputs cannot be read,
//! parsed, or validated.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use catecon::equilibria::{
    check_lax_monoidal, check_prop3, dominant_equilibria, pure_nash, random_positive_pair,
    Concept, EquilibriumSet,
};
use catecon::euclid::Vector;
use catecon::games::{coproduct_with, schema::GameDef, validate_game, Game, PayoffCombinator};
use catecon::mech::{mech_design, schema::MechDef};
use catecon::optimize::PointSet;
use catecon::pa::schema::PADef;
use catecon::poly::{internal_hom_with, schema::PolyDef, Coalgebra, Poly};
use catecon::problems::{
    check_compatibility, check_cover, check_glue, check_morphism, section_table, LocalProblem,
    Universe,
};
use catecon::tol;
use catecon_cli::inputs::{CoalgDef, FamilyDef, ProblemFile};
use catecon_cli::report::Report;
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(
    name = "catecon",
    version,
    about = "Check categorical structure on optimization problems, games, and polynomial machines"
)]
struct Cli {
    /// Tolerance for point-set comparisons against expectations.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol_point: f64,

    /// Tolerance for value and residual comparisons.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_value: f64,

    /// Seed for randomized checks (required by verbs that randomize).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of randomized trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConceptArg {
    /// Pure Nash equilibrium.
    Nash,
    /// Weakly dominant strategy equilibrium.
    Dominance,
}

impl From<ConceptArg> for Concept {
    fn from(arg: ConceptArg) -> Concept {
        match arg {
            ConceptArg::Nash => Concept::PureNash,
            ConceptArg::Dominance => Concept::WeakDominance,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CombinatorArg {
    Product,
    Sum,
}

impl From<CombinatorArg> for PayoffCombinator {
    fn from(arg: CombinatorArg) -> PayoffCombinator {
        match arg {
            CombinatorArg::Product => PayoffCombinator::Product,
            CombinatorArg::Sum => PayoffCombinator::Sum,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one optimization problem and print its solution set.
    SolveProblem {
        /// Problem file (optionally with expected points/value).
        problem: PathBuf,
    },
    /// Check a family of problems against an enclosing one: morphisms,
    /// coverage, pairwise compatibility, gluing, and the section table.
    SheafCheck {
        /// Family file: global problem, members, optional universe.
        family: PathBuf,
    },
    /// List the equilibria of one game.
    GameEq {
        /// Game file.
        game: PathBuf,
        /// Equilibrium concept to apply.
        #[arg(long, value_enum, default_value_t = ConceptArg::Nash)]
        concept: ConceptArg,
    },
    /// Form the coproduct of two games and verify that its equilibria
    /// are the pairwise combination of the components' equilibria.
    GameCompose {
        /// Left game file.
        left: PathBuf,
        /// Right game file.
        right: PathBuf,
        /// How shared players' payoffs combine.
        #[arg(long, value_enum, default_value_t = CombinatorArg::Product)]
        combinator: CombinatorArg,
    },
    /// Run the randomized composition-law suite on generated pairs of
    /// positive-payoff games, under both payoff combinators.
    LawCheck {
        /// Which composition law to test (only 3 is defined).
        #[arg(long)]
        prop: u32,
    },
    /// Build the internal hom of two polynomials and list its morphisms.
    PolyHom {
        /// Source polynomial file.
        p: PathBuf,
        /// Target polynomial file.
        q: PathBuf,
    },
    /// Run a coalgebra over an internal hom and print its trace.
    CoalgRun {
        /// Coalgebra file.
        coalg: PathBuf,
        /// Number of steps to run.
        #[arg(long)]
        steps: usize,
    },
    /// Solve a Principal-Agent instance and verify the transfer
    /// inversion round-trips.
    PaSolve {
        /// Principal-Agent instance file.
        pa: PathBuf,
    },
    /// Filter a mechanism library per environment and run the designer
    /// machine over the feasible environments.
    MechDesign {
        /// Mechanism library file (game files resolved relative to it).
        library: PathBuf,
        /// Equilibrium concept used to judge feasibility.
        #[arg(long, value_enum, default_value_t = ConceptArg::Nash)]
        concept: ConceptArg,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read `{path}`: {detail}")]
    Read { path: String, detail: String },
    #[error("cannot parse `{path}`: {detail}")]
    Parse { path: String, detail: String },
    #[error("{0}")]
    Input(String),
}

fn input(err: impl std::fmt::Display) -> CliError {
    CliError::Input(err.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn main() {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(report) => report,
        Err(err) => Report::error(err.to_string()),
    };
    match cli.format {
        Format::Text => print!("{}", report.render_text()),
        Format::Structured => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"))
        }
    }
    std::process::exit(report.exit_code());
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::SolveProblem { problem } => cmd_solve_problem(cli, problem),
        Command::SheafCheck { family } => cmd_sheaf_check(family),
        Command::GameEq { game, concept } => cmd_game_eq(game, (*concept).into()),
        Command::GameCompose {
            left,
            right,
            combinator,
        } => cmd_game_compose(left, right, (*combinator).into()),
        Command::LawCheck { prop } => cmd_law_check(cli, *prop),
        Command::PolyHom { p, q } => cmd_poly_hom(p, q),
        Command::CoalgRun { coalg, steps } => cmd_coalg_run(coalg, *steps),
        Command::PaSolve { pa } => cmd_pa_solve(cli, pa),
        Command::MechDesign { library, concept } => cmd_mech_design(library, (*concept).into()),
    }
}

fn fmt_point(v: &Vector) -> String {
    let coords: Vec<String> = v.as_slice().iter().map(|c| format!("{c:.6}")).collect();
    format!("({})", coords.join(", "))
}

fn solve_from_def(
    def: &catecon::problems::schema::ProblemDef,
) -> Result<LocalProblem, CliError> {
    let problem = def
        .build()
        .map_err(|e| CliError::Input(format!("problem `{}`: {e}", def.id)))?;
    problem
        .solve()
        .map_err(|e| CliError::Input(format!("problem `{}`: {e}", def.id)))
}

fn cmd_solve_problem(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let file: ProblemFile = read_json(path)?;
    let solved = solve_from_def(&file.problem)?;
    let solution = solved.require_solution().map_err(input)?;

    let mut lines = vec![
        format!("id: {}", solved.id()),
        format!("value: {:.9}", solution.value),
        format!("points: {}", solution.points.points().len()),
    ];
    for point in solution.points.points() {
        lines.push(format!("point: {}", fmt_point(point)));
    }

    let mut witnesses = Vec::new();
    if let Some(expected) = file.expected_value {
        if (solution.value - expected).abs() > cli.tol_value {
            witnesses.push(format!(
                "value {:.9} differs from expected {:.9} by more than {:e}",
                solution.value, expected, cli.tol_value
            ));
        }
    }
    if let Some(expected) = &file.expected_points {
        let mut vectors = Vec::with_capacity(expected.len());
        for coords in expected {
            vectors.push(Vector::new(coords.clone()).map_err(input)?);
        }
        let expected_set = PointSet::from_vectors(vectors, tol::CLUSTER_RADIUS);
        if !solution.points.set_eq(&expected_set, cli.tol_point) {
            witnesses.push(format!(
                "solution set {} does not match expected {} at {:e}",
                solution.points, expected_set, cli.tol_point
            ));
        }
    }

    Ok(Report::pass().section("solution", lines).fail_with(witnesses))
}

fn cmd_sheaf_check(path: &Path) -> Result<Report, CliError> {
    let file: FamilyDef = read_json(path)?;
    if file.members.is_empty() {
        return Err(CliError::Input("family has no members".to_string()));
    }
    let global = solve_from_def(&file.global)?;
    let mut members = Vec::with_capacity(file.members.len());
    for def in &file.members {
        members.push(solve_from_def(def)?);
    }
    let member_refs: Vec<&LocalProblem> = members.iter().collect();

    let universe = match &file.universe {
        Some(named) => {
            let mut points = Vec::with_capacity(named.len());
            for (name, coords) in named {
                points.push((name.clone(), Vector::new(coords.clone()).map_err(input)?));
            }
            Universe::from_points(points).map_err(input)?
        }
        None => Universe::from_solutions(&member_refs).map_err(input)?,
    };

    let mut witnesses = Vec::new();

    let mut morphism_lines = Vec::new();
    for member in &members {
        match check_morphism(member, &global) {
            Ok(m) => morphism_lines.push(format!(
                "{} -> {}: ok (dim {} <= {})",
                m.source, m.target, m.source_dim, m.target_dim
            )),
            Err(failure) => {
                morphism_lines.push(format!("{} -> {}: failed", member.id(), global.id()));
                witnesses.push(failure.to_string());
            }
        }
    }

    let mut all_problems: Vec<&LocalProblem> = vec![&global];
    all_problems.extend(member_refs.iter().copied());
    let table = section_table(&all_problems, &universe).map_err(input)?;
    let table_lines: Vec<String> = table
        .render()
        .lines()
        .map(|l| l.to_string())
        .collect();

    let cover = check_cover(&member_refs, &global).map_err(input)?;
    let mut cover_lines = vec![format!(
        "members cover `{}`: {}",
        global.id(),
        if cover.covered { "yes" } else { "no" }
    )];
    if let Some(point) = &cover.witness {
        cover_lines.push(format!("uncovered sample: {}", fmt_point(point)));
    }
    if let Some(reason) = &cover.reason {
        cover_lines.push(format!("note: {reason}"));
    }

    let mut compat_lines = Vec::new();
    for (i, k) in members.iter().enumerate() {
        for l in members.iter().skip(i + 1) {
            let ok = check_compatibility(k, l, &universe).map_err(input)?;
            compat_lines.push(format!(
                "{} ~ {}: {}",
                k.id(),
                l.id(),
                if ok { "compatible" } else { "incompatible" }
            ));
            if !ok {
                witnesses.push(format!(
                    "sections of `{}` and `{}` disagree on their overlap",
                    k.id(),
                    l.id()
                ));
            }
        }
    }

    let glue = check_glue(&member_refs, &global, &universe).map_err(input)?;
    let mut glue_lines = Vec::new();
    for member in &glue.members {
        glue_lines.push(format!(
            "{}: restriction {}, section {}",
            member.id,
            if member.restriction_matches { "ok" } else { "mismatch" },
            if member.section_matches { "ok" } else { "mismatch" },
        ));
    }
    witnesses.extend(glue.failures.iter().cloned());

    Ok(Report::pass()
        .section("morphisms", morphism_lines)
        .section("section table", table_lines)
        .section("cover", cover_lines)
        .section("compatibility", compat_lines)
        .section("glue", glue_lines)
        .fail_with(witnesses))
}

fn load_game(path: &Path) -> Result<Game, CliError> {
    let def: GameDef = read_json(path)?;
    let game = def
        .build()
        .map_err(|e| CliError::Input(format!("game `{}`: {e}", def.id)))?;
    let validation = validate_game(&game);
    if !validation.ok() {
        return Err(CliError::Input(format!(
            "game `{}`: {}",
            game.id,
            validation.violations.join("; ")
        )));
    }
    Ok(game)
}

fn equilibria_lines(game: &Game, set: &EquilibriumSet) -> Vec<String> {
    let mut lines = vec![
        format!("game: {}", game.id),
        format!("players: {}", game.players.join(", ")),
        format!(
            "concept: {}",
            match set.concept {
                Concept::PureNash => "pure-nash",
                Concept::WeakDominance => "weak-dominance",
            }
        ),
        format!("count: {}", set.len()),
    ];
    for profile in &set.profiles {
        lines.push(format!("equilibrium: {profile}"));
    }
    lines
}

fn cmd_game_eq(path: &Path, concept: Concept) -> Result<Report, CliError> {
    let game = load_game(path)?;
    let set = match concept {
        Concept::PureNash => pure_nash(&game),
        Concept::WeakDominance => dominant_equilibria(&game),
    };
    Ok(Report::pass().section("equilibria", equilibria_lines(&game, &set)))
}

fn cmd_game_compose(
    left: &Path,
    right: &Path,
    comb: PayoffCombinator,
) -> Result<Report, CliError> {
    let g = load_game(left)?;
    let h = load_game(right)?;
    let sum = coproduct_with(&g, &h, comb).map_err(input)?;
    let set = pure_nash(&sum);
    let prop3 = check_prop3(&g, &h, comb).map_err(input)?;

    let coproduct_lines = vec![
        format!("id: {}", sum.id),
        format!("players: {}", sum.players.join(", ")),
        format!("profiles: {}", sum.profile_keys().len()),
        format!("combinator: {}", comb.label()),
    ];

    let law_lines = vec![
        format!(
            "coproduct equilibria match combined component equilibria: {}",
            if prop3.equal { "yes" } else { "no" }
        ),
        format!(
            "counts: coproduct {}, combined {}",
            prop3.coproduct_count, prop3.combined_count
        ),
        format!(
            "positivity precondition satisfied: {}",
            if prop3.outside_positivity { "no" } else { "yes" }
        ),
    ];

    let mut witnesses = Vec::new();
    if !prop3.pass() {
        for key in &prop3.coproduct_only {
            witnesses.push(format!("equilibrium only in the coproduct: {key}"));
        }
        for key in &prop3.combined_only {
            witnesses.push(format!("equilibrium only in the combination: {key}"));
        }
    }

    Ok(Report::pass()
        .section("coproduct", coproduct_lines)
        .section("equilibria", equilibria_lines(&sum, &set))
        .section("composition law", law_lines)
        .fail_with(witnesses))
}

fn cmd_law_check(cli: &Cli, prop: u32) -> Result<Report, CliError> {
    if prop != 3 {
        return Err(CliError::Input(format!(
            "unsupported proposition `{prop}`: only the composition law (3) is defined"
        )));
    }
    let seed = cli
        .seed
        .ok_or_else(|| CliError::Input("law-check randomizes and requires --seed".to_string()))?;
    let trials = cli.trials.unwrap_or(200);
    if trials == 0 {
        return Err(CliError::Input("--trials must be positive".to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Game, Game)> = (0..trials)
        .map(|k| random_positive_pair(&mut rng, k))
        .collect();

    let mut report = Report::pass().section(
        "sample",
        vec![format!("seed: {seed}"), format!("pairs: {trials}")],
    );
    let mut witnesses = Vec::new();
    for comb in [PayoffCombinator::Product, PayoffCombinator::Sum] {
        let lax = check_lax_monoidal(&pairs, comb).map_err(input)?;
        let failing: Vec<&catecon::equilibria::LaxPairReport> =
            lax.pairs.iter().filter(|p| !p.pass()).collect();
        report = report.section(
            format!("combinator: {}", comb.label()),
            vec![
                format!("unit law: {}", if lax.unit_ok { "ok" } else { "violated" }),
                format!("pair failures: {}", failing.len()),
            ],
        );
        if !lax.unit_ok {
            witnesses.push(format!(
                "unit law violated under {}: the empty game has equilibria",
                comb.label()
            ));
        }
        for pair in failing {
            witnesses.push(format!(
                "{} + {} under {}: {}",
                pair.left_id,
                pair.right_id,
                comb.label(),
                pair.detail.clone().unwrap_or_else(|| "mismatch".to_string())
            ));
        }
    }

    Ok(report.fail_with(witnesses))
}

fn load_poly(path: &Path) -> Result<Poly, CliError> {
    let def: PolyDef = read_json(path)?;
    def.build()
        .map_err(|e| CliError::Input(format!("polynomial `{}`: {e}", def.id)))
}

fn cmd_poly_hom(p_path: &Path, q_path: &Path) -> Result<Report, CliError> {
    let p = load_poly(p_path)?;
    let q = load_poly(q_path)?;
    let (hom, morphisms) = internal_hom_with(&p, &q).map_err(input)?;

    let total_directions: usize = hom.directions.values().map(|d| d.len()).sum();
    let mut lines = vec![
        format!("id: {}", hom.id),
        format!("morphisms: {}", hom.positions.len()),
        format!("directions: {total_directions}"),
    ];
    const LISTED: usize = 16;
    for m in morphisms.iter().take(LISTED) {
        let cells: Vec<String> = m
            .fwd
            .iter()
            .map(|(i, j)| {
                let pulls: Vec<String> = m
                    .bwd
                    .get(i)
                    .map(|row| row.iter().map(|(d, e)| format!("{d}->{e}")).collect())
                    .unwrap_or_default();
                format!("{i}->{j} [{}]", pulls.join(", "))
            })
            .collect();
        lines.push(format!("{}: {}", m.id, cells.join("; ")));
    }
    if morphisms.len() > LISTED {
        lines.push(format!("... {} more", morphisms.len() - LISTED));
    }

    Ok(Report::pass().section("internal hom", lines))
}

fn cmd_coalg_run(path: &Path, steps: usize) -> Result<Report, CliError> {
    let def: CoalgDef = read_json(path)?;
    let p = def.p.build().map_err(input)?;
    let q = def.q.build().map_err(input)?;
    let (hom, _) = internal_hom_with(&p, &q).map_err(input)?;
    let mu: BTreeMap<_, _> = def.mu.into_iter().map(|e| (e.output, e.next)).collect();
    let coalgebra = Coalgebra::new(hom, def.states, def.rho, mu).map_err(input)?;
    let trace = catecon::poly::coalg_run(&coalgebra, &def.start, steps).map_err(input)?;

    let mut lines = vec![format!("start: {}", def.start), format!("steps: {steps}")];
    for step in &trace.steps {
        lines.push(format!("{}: {} -> {}", step.step, step.state, step.output));
    }
    match &trace.first_repeat {
        Some(repeat) => lines.push(format!(
            "first repeated state: {} at step {}",
            repeat.state, repeat.step
        )),
        None => lines.push("no state repeated within the run".to_string()),
    }

    Ok(Report::pass().section("trace", lines))
}

fn cmd_pa_solve(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let def: PADef = read_json(path)?;
    let pa = def.build().map_err(input)?;
    let solution = catecon::pa::pa_solve(&pa).map_err(input)?;
    let (residual_u, residual_v) = catecon::pa::inverse_round_trip(&pa).map_err(input)?;

    let optimum_lines = vec![
        format!("x: {:.6}", solution.x),
        format!("y: {:.6}", solution.y),
        format!("agent utility: {:.6}", solution.u_a),
        format!("transfer: {:.9}", solution.v),
        format!("principal value: {:.9}", solution.value),
        format!(
            "grid indices: ({}, {}, {})",
            solution.indices.0, solution.indices.1, solution.indices.2
        ),
    ];
    let round_trip_lines = vec![
        format!("max utility residual: {residual_u:.3e}"),
        format!("max transfer residual: {residual_v:.3e}"),
        format!("tolerance: {:e}", cli.tol_value),
    ];

    let mut witnesses = Vec::new();
    if residual_u > cli.tol_value {
        witnesses.push(format!(
            "utility residual {residual_u:.3e} exceeds {:e}",
            cli.tol_value
        ));
    }
    if residual_v > cli.tol_value {
        witnesses.push(format!(
            "transfer residual {residual_v:.3e} exceeds {:e}",
            cli.tol_value
        ));
    }

    Ok(Report::pass()
        .section("optimum", optimum_lines)
        .section("inverse round-trip", round_trip_lines)
        .fail_with(witnesses))
}

fn cmd_mech_design(path: &Path, concept: Concept) -> Result<Report, CliError> {
    let def: MechDef = read_json(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let lib = def
        .build(|file| {
            let game_path = base.join(file);
            let text = std::fs::read_to_string(&game_path).map_err(|e| e.to_string())?;
            let game_def: GameDef =
                serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let game = game_def.build().map_err(|e| e.to_string())?;
            let validation = validate_game(&game);
            if !validation.ok() {
                return Err(validation.violations.join("; "));
            }
            Ok(game)
        })
        .map_err(input)?;
    let (p_d, report) = mech_design(&lib, concept).map_err(input)?;

    let mut env_lines = Vec::new();
    let mut witnesses = Vec::new();
    for env in &report.environments {
        env_lines.push(format!(
            "{}: target `{}`, feasible [{}], emitted {}",
            env.environment,
            env.target,
            env.feasible.join(", "),
            env.emitted.as_deref().unwrap_or("nothing"),
        ));
        if !env.ok {
            witnesses.push(format!(
                "environment `{}`: emitted {} but the lowest-indexed feasible mechanism is {}",
                env.environment,
                env.emitted.as_deref().unwrap_or("nothing"),
                env.feasible.first().map(String::as_str).unwrap_or("absent"),
            ));
        }
    }

    let mut designer_lines = vec![
        format!("environment polynomial: {} positions", p_d.positions.len()),
        format!("designer hom: {} ({} assignments)", report.hom_id, report.hom_positions),
    ];
    for step in &report.trace.steps {
        designer_lines.push(format!(
            "step {}: {} -> {}",
            step.step, step.state, step.output
        ));
    }
    if report.trace.steps.is_empty() {
        designer_lines.push("no feasible environment to visit".to_string());
    }

    Ok(Report::pass()
        .section("environments", env_lines)
        .section("designer", designer_lines)
        .fail_with(witnesses))
}
