//! Command-line front end.
//!
//! Exit codes: 0 when a query is answered, 1 when a decision is answered
//! "no", 2 on usage, parse or validation errors. Exact numbers are printed
//! as `num/den` strings in both output modes.

mod args;
mod report;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use num_traits::{One, ToPrimitive, Zero};

use costodds::chain_solver::cost_distribution;
use costodds::formula::CostFormula;
use costodds::gadgets::{
    circuit_to_chain, circuit_to_dfa, count_parikh_paths, countdown_brute, countdown_to_process, normalize_circuit,
    posslp_decide, posslp_instance, qsubsetsum_brute, qsubsetsum_to_process, qualitative_to_cost_utility,
    threshold_to_half, universal_qsubsetsum_to_process, ArithmeticCircuit, CircuitFile, CountdownGame, DualRail,
    GateId, GateKind, QSubsetSum, RawCircuit, ScaleFactor,
};
use costodds::mc::estimate;
use costodds::mdp_solver::{
    check_threshold, decide_cost_utility, evaluate_scheduler, solve, Mode, Quantifier, Scheduler, SolverRegistry,
};
use costodds::model::{CostProcess, CostUtilityProcess, Process, Validated, Weight};
use costodds::quantile::{budget_upper_bound, quantile_query};
use costodds::rational::{format_rational, parse_cost, parse_rational, Cost, Rational};

use args::{
    BruteCommand, CircuitArg, Cli, Command, GadgetCommand, ModeArg, OutArg, QssArg, QuantArg, SampleArgs,
    SchedulerArgs, SolveArgs,
};
use report::Report;

/// Largest `m` (in bits) printed in full.
const SCALE_PRINT_BITS: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    Yes,
    No,
}

/// Any failure; reported on standard error with exit code 2.
#[derive(Debug)]
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<Exit, Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn print(&mut self, text: &str) -> Result<(), Failure> {
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }

    fn report(&mut self, r: &Report) -> Result<(), Failure> {
        let text = r.render(self.json);
        self.print(&text)
    }
}

/// Runs the program with explicit streams and returns the exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, err, json: cli.json };
    match dispatch(cli.command, &mut io) {
        Ok(Exit::Yes) => 0,
        Ok(Exit::No) => 1,
        Err(Failure(msg)) => {
            let _ = writeln!(io.err, "error: {msg}");
            2
        }
    }
}

/// Runs the program on the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Outcome {
    match command {
        Command::Validate(a) => validate(&a.model.model, a.utility, io),
        Command::Solve(a) => solve_cmd(a, io),
        Command::Dist(a) => dist(&a.model.model, &a.budget, io),
        Command::Quantile(a) => quantile(&a.model.model, &a.tau, a.quant, io),
        Command::Scheduler(a) => scheduler(a, io),
        Command::Gadget(g) => gadget(g, io),
        Command::Brute(b) => brute(b, io),
        Command::Sample(a) => sample(a, io),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn validated<W: Weight>(p: Process<W>, path: &Path) -> Result<Validated<Process<W>>, Failure> {
    p.validated().map_err(|r| Failure(format!("{}: invalid model: {}", path.display(), r.summary())))
}

fn load_process(path: &Path) -> Result<Validated<CostProcess>, Failure> {
    let p = CostProcess::from_json(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    validated(p, path)
}

fn parse_formula(text: &str) -> Result<CostFormula, Failure> {
    Ok(CostFormula::parse(text)?)
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Max => Mode::Max,
        ModeArg::Min => Mode::Min,
    }
}

fn quant_of(q: QuantArg) -> Quantifier {
    match q {
        QuantArg::Exists => Quantifier::Exists,
        QuantArg::Forall => Quantifier::Forall,
    }
}

fn quant_name(q: Quantifier) -> &'static str {
    match q {
        Quantifier::Exists => "exists",
        Quantifier::Forall => "forall",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Max => "max",
        Mode::Min => "min",
    }
}

fn verdict(holds: bool) -> Exit {
    if holds {
        Exit::Yes
    } else {
        Exit::No
    }
}

fn describe<W: Weight>(p: &Process<W>, r: &mut Report) {
    r.put("states", p.num_states()).put("chain", p.is_chain()).put("acyclic", p.is_acyclic());
}

fn validate(path: &Path, utility: bool, io: &mut Io<'_>) -> Outcome {
    let text = read(path)?;
    let mut r = Report::new();
    let report = if utility {
        let p = CostUtilityProcess::from_json(&text)?;
        describe(&p, &mut r);
        p.validate()
    } else {
        let p = CostProcess::from_json(&text)?;
        describe(&p, &mut r);
        p.validate()
    };
    r.put("ok", report.ok);
    r.put("violations", serde_json::to_value(&report.violations)?);
    io.report(&r)?;
    if report.ok {
        Ok(Exit::Yes)
    } else {
        writeln!(io.err, "{}", report.summary())?;
        Err(Failure(format!("{}: model violates the structural assumptions", path.display())))
    }
}

fn solve_cmd(a: SolveArgs, io: &mut Io<'_>) -> Outcome {
    let path = &a.model.model;
    if let (Some(c), Some(u)) = (&a.max_cost, &a.min_utility) {
        let (c, u) = (parse_cost(c)?, parse_cost(u)?);
        let p = CostUtilityProcess::from_json(&read(path)?)?;
        let p = validated(p, path)?;
        let outcome = decide_cost_utility(&p, &c, &u);
        let mut r = Report::new();
        r.text("max-cost", &c).text("min-utility", &u);
        r.put("value", format_rational(&outcome.value)).put("holds", outcome.holds);
        io.report(&r)?;
        return Ok(verdict(outcome.holds));
    }
    let formula = parse_formula(a.formula.as_deref().expect("clap requires a formula here"))?;
    let p = load_process(path)?;
    let registry = SolverRegistry::default();
    let solver = registry.get(&a.solver)?;
    let tau = a.tau.as_deref().map(parse_rational).transpose()?;
    if let Some(tau) = &tau {
        check_threshold(tau)?;
    }
    let quant = quant_of(a.quant);
    let mode = match (&tau, quant) {
        (None, _) => mode_of(a.mode),
        (Some(_), Quantifier::Exists) => Mode::Max,
        (Some(_), Quantifier::Forall) => Mode::Min,
    };
    let result = solver.solve(&p, &formula.query(), mode)?;
    if let Some(out) = &a.scheduler_out {
        write(out, &result.scheduler.to_json(&p))?;
    }
    let mut r = Report::new();
    r.text("formula", &formula).put("mode", mode_name(mode)).put("solver", result.strategy);
    r.put("value", format_rational(&result.value));
    let exit = match &tau {
        Some(tau) => {
            let holds = result.value >= *tau;
            r.put("tau", format_rational(tau)).put("quant", quant_name(quant)).put("holds", holds);
            verdict(holds)
        }
        None => Exit::Yes,
    };
    r.put("stats", serde_json::to_value(&result.stats)?);
    io.report(&r)?;
    Ok(exit)
}

fn dist(path: &Path, budget: &str, io: &mut Io<'_>) -> Outcome {
    let budget = parse_cost(budget)?;
    let p = load_process(path)?;
    let d = cost_distribution(&p, &budget)?;
    let mass: Vec<serde_json::Value> = d
        .mass
        .iter()
        .map(|(c, m)| serde_json::json!({ "cost": c.to_string(), "prob": format_rational(m) }))
        .collect();
    let mut r = Report::new();
    r.text("budget", &budget).put("mass", mass);
    r.put("overflow", format_rational(&d.overflow)).put("total", format_rational(&d.total()));
    io.report(&r)?;
    Ok(Exit::Yes)
}

fn quantile(path: &Path, tau: &str, quant: QuantArg, io: &mut Io<'_>) -> Outcome {
    let tau = parse_rational(tau)?;
    let p = load_process(path)?;
    let quant = quant_of(quant);
    let q = quantile_query(&p, &tau, quant)?;
    let mut r = Report::new();
    r.put("tau", format_rational(&tau)).put("quant", quant_name(quant)).text("quantile", &q);
    if !tau.is_one() {
        r.put("bounds", serde_json::to_value(budget_upper_bound(&p, &tau)?)?);
    }
    io.report(&r)?;
    Ok(Exit::Yes)
}

fn scheduler(a: SchedulerArgs, io: &mut Io<'_>) -> Outcome {
    let formula = parse_formula(&a.formula)?;
    let p = load_process(&a.model.model)?;
    if let Some(file) = &a.evaluate {
        let s = Scheduler::from_json(&read(file)?, &p)?;
        let v = evaluate_scheduler(&p, &s, &formula)?;
        let mut r = Report::new();
        r.text("formula", &formula).put("entries", s.len()).put("value", format_rational(&v));
        io.report(&r)?;
        return Ok(Exit::Yes);
    }
    let registry = SolverRegistry::default();
    let result = registry.get(&a.solver)?.solve(&p, &formula.query(), mode_of(a.mode))?;
    let text = result.scheduler.to_json(&p);
    match &a.out {
        Some(out) => {
            write(out, &text)?;
            let mut r = Report::new();
            r.text("formula", &formula).put("mode", mode_name(result.mode)).put("solver", result.strategy);
            r.put("entries", result.scheduler.len()).put("value", format_rational(&result.value));
            io.report(&r)?;
        }
        None => io.print(&text)?,
    }
    Ok(Exit::Yes)
}

/// Writes a produced model and its parameters.
fn emit(out: &OutArg, model: &str, r: &Report, io: &mut Io<'_>) -> Outcome {
    match &out.out {
        Some(path) => {
            write(path, model)?;
            io.report(r)?;
        }
        None => {
            io.print(model)?;
            io.err.write_all(r.render(io.json).as_bytes())?;
        }
    }
    Ok(Exit::Yes)
}

fn load_qss(a: &QssArg) -> Result<QSubsetSum, Failure> {
    if let Some(path) = &a.instance {
        return Ok(QSubsetSum::from_json(&read(path)?)?);
    }
    let k = a.k.iter().map(|s| parse_cost(s.trim())).collect::<Result<Vec<_>, _>>()?;
    let t = parse_cost(a.t.as_deref().expect("clap requires T here"))?;
    Ok(QSubsetSum::new(k, t))
}

struct LoadedCircuit {
    raw: RawCircuit,
    circuit: ArithmeticCircuit,
    rails: Vec<DualRail>,
}

impl LoadedCircuit {
    fn load(arg: &CircuitArg) -> Result<Self, Failure> {
        let file = CircuitFile::from_json(&read(&arg.circuit)?)?;
        let raw = RawCircuit::from_file(&file)?;
        let (circuit, rails) = normalize_circuit(&raw);
        Ok(LoadedCircuit { raw, circuit, rails })
    }

    /// The rails of the named raw gate, or of the first output.
    fn rail(&self, name: Option<&str>) -> Result<DualRail, Failure> {
        let i = match name {
            Some(n) => self.raw.gates.iter().position(|g| g.name == n).ok_or_else(|| Failure(format!("no gate `{n}`")))?,
            None => *self.raw.outputs.first().ok_or_else(|| Failure("circuit has no outputs; pass --gate".into()))?,
        };
        Ok(self.rails[i])
    }

    fn is_zero(&self, g: GateId) -> bool {
        self.circuit.gate(g).kind == GateKind::Zero
    }
}

fn put_scale(r: &mut Report, scale: &ScaleFactor) {
    r.put("d", scale.d).put("two-exp", scale.two_exp).put("d-exp", scale.d_exp);
    let bits = scale.two_exp + scale.d_exp * (64 - u64::from(scale.d.leading_zeros()));
    if bits <= SCALE_PRINT_BITS {
        r.text("m", scale.value());
    }
}

fn gadget(g: GadgetCommand, io: &mut Io<'_>) -> Outcome {
    match g {
        GadgetCommand::Half { model, formula, tau, n0, n1, out } => {
            let formula = parse_formula(&formula)?;
            let tau = parse_rational(&tau)?;
            let p = load_process(&model.model)?;
            let q = threshold_to_half(&p, &formula, &tau, &parse_cost(&n0)?, &parse_cost(&n1)?)?;
            let mut r = Report::new();
            r.text("formula", &formula).put("tau", "1/2").put("original-tau", format_rational(&tau));
            emit(&out, &q.to_json(), &r, io)
        }
        GadgetCommand::Circuit { circuit, gate, lift, out } => {
            let mut c = LoadedCircuit::load(&circuit)?;
            let rail = c.rail(gate.as_deref())?;
            let mut g = rail.pos;
            if lift && c.circuit.level(g) % 2 == 0 {
                g = c.circuit.lift_to_odd(g);
            }
            let cert = circuit_to_chain(&c.circuit, g)?;
            let value = c.circuit.eval(g);
            let mut r = Report::new();
            r.put("gate", c.circuit.gate(g).name.clone()).put("level", cert.level).text("value", &value);
            if !c.is_zero(rail.neg) {
                r.text("negative-rail", c.circuit.eval(rail.neg));
            }
            r.text("target", &cert.target).text("formula", CostFormula::eq(cert.target.clone()));
            put_scale(&mut r, &cert.scale);
            emit(&out, &cert.chain.to_json(), &r, io)
        }
        GadgetCommand::Posslp { circuit, g1, g2, out } => {
            let mut c = LoadedCircuit::load(&circuit)?;
            let (r1, r2) = (c.rail(Some(&g1))?, c.rail(Some(&g2))?);
            let (a, b) = comparable_pair(&mut c, r1, r2)?;
            let inst = posslp_instance(&c.circuit, a, b)?;
            let v = posslp_decide(&inst)?;
            let mut r = Report::new();
            r.put("g1", g1).put("g2", g2).put("level", inst.first.level);
            r.text("formula", &inst.formula).put("tau", "1/2").put("quant", "exists");
            r.text("horizon", &inst.horizon).text("t1", &inst.first.target).text("t2", &inst.second.target);
            put_scale(&mut r, &inst.first.scale);
            r.put("p1", format_rational(&v.p1)).put("p2", format_rational(&v.p2));
            if let Some(p) = &v.probability {
                r.put("probability", format_rational(p));
            }
            r.put(
                "holds",
                match v.holds {
                    Some(h) => h.to_string(),
                    None => "unknown".into(),
                },
            );
            emit(&out, &inst.chain.to_json(), &r, io)
        }
        GadgetCommand::Qss { inst, out } => {
            let g = qsubsetsum_to_process(&load_qss(&inst)?)?;
            let mut r = Report::new();
            r.text("formula", CostFormula::le(g.budget.clone())).put("tau", format_rational(&g.tau));
            r.put("quant", "exists").text("budget", &g.budget).text("ell", &g.ell).text("big-m", &g.big_m);
            r.put("odd-wins-iff", "the decision holds");
            emit(&out, &g.process.to_json(), &r, io)
        }
        GadgetCommand::Uqss { inst, out } => {
            let g = universal_qsubsetsum_to_process(&load_qss(&inst)?)?;
            let bound = if g.budget.is_zero() { Cost::zero() } else { &g.budget - 1u32 };
            let mut r = Report::new();
            r.text("formula", CostFormula::le(bound)).put("tau", format_rational(&g.tau));
            r.put("quant", "forall").text("budget", &g.budget).text("ell", &g.ell).text("big-m", &g.big_m);
            r.put("odd-wins-iff", "the decision fails");
            emit(&out, &g.process.to_json(), &r, io)
        }
        GadgetCommand::Countdown { game, out } => {
            let game = CountdownGame::from_json(&read(&game)?)?;
            let g = countdown_to_process(&game)?;
            let mut r = Report::new();
            r.text("formula", CostFormula::eq(g.target.clone())).put("tau", "1").put("quant", "exists");
            r.text("target", &g.target);
            emit(&out, &g.process.to_json(), &r, io)
        }
        GadgetCommand::Cu { model, t, out } => {
            let t = parse_cost(&t)?;
            let p = load_process(&model.model)?;
            let q = qualitative_to_cost_utility(&p);
            let mut r = Report::new();
            r.text("max-cost", &t).text("min-utility", &t);
            emit(&out, &q.to_json(), &r, io)
        }
    }
}

/// Two gates on a common odd level whose values compare like the raw gates.
/// With subtraction, `g1 >= g2` iff `pos1 + neg2 >= pos2 + neg1`.
fn comparable_pair(c: &mut LoadedCircuit, r1: DualRail, r2: DualRail) -> Result<(GateId, GateId), Failure> {
    let circuit = &mut c.circuit;
    if c.rails.is_empty() {
        return Err(Failure("empty circuit".into()));
    }
    let signed = circuit.gate(r1.neg).kind != GateKind::Zero || circuit.gate(r2.neg).kind != GateKind::Zero;
    if !signed {
        let mut level = circuit.level(r1.pos).max(circuit.level(r2.pos));
        if level.is_multiple_of(2) {
            level += 1;
        }
        return Ok((circuit.lift(r1.pos, level), circuit.lift(r2.pos, level)));
    }
    let gates = [r1.pos, r2.neg, r2.pos, r1.neg];
    let top = gates.iter().map(|&g| circuit.level(g)).max().unwrap_or(0);
    let even = top + top % 2;
    let [p1, n2, p2, n1] = gates.map(|g| circuit.lift(g, even));
    Ok((circuit.plus(p1, n2)?, circuit.plus(p2, n1)?))
}

fn brute(b: BruteCommand, io: &mut Io<'_>) -> Outcome {
    let mut r = Report::new();
    match b {
        BruteCommand::Qss { inst } => {
            let holds = qsubsetsum_brute(&load_qss(&inst)?)?;
            r.put("holds", holds);
            io.report(&r)?;
            Ok(verdict(holds))
        }
        BruteCommand::Countdown { game } => {
            let holds = countdown_brute(&CountdownGame::from_json(&read(&game)?)?)?;
            r.put("holds", holds);
            io.report(&r)?;
            Ok(verdict(holds))
        }
        BruteCommand::Parikh { circuit, gate } => {
            let c = LoadedCircuit::load(&circuit)?;
            let g = c.rail(gate.as_deref())?.pos;
            let dfa = circuit_to_dfa(&c.circuit, g)?;
            let count = count_parikh_paths(&dfa, dfa.input, dfa.output, &dfa.parikh)?;
            let value = c.circuit.eval(g);
            r.put("gate", c.circuit.gate(g).name.clone()).text("paths", &count).text("value", &value);
            r.put("agree", count == value);
            io.report(&r)?;
            Ok(Exit::Yes)
        }
    }
}

fn sample(a: SampleArgs, io: &mut Io<'_>) -> Outcome {
    let formula = parse_formula(&a.formula)?;
    let p = load_process(&a.model.model)?;
    let (sched, exact): (Scheduler, Rational) = match &a.scheduler {
        Some(file) => {
            let s = Scheduler::from_json(&read(file)?, &p)?;
            let v = evaluate_scheduler(&p, &s, &formula)?;
            (s, v)
        }
        None => {
            let res = solve(&p, &formula, mode_of(a.mode));
            (res.scheduler, res.value)
        }
    };
    let rep = estimate(&p, &sched, &formula, a.n, a.seed)?;
    let mut r = Report::new();
    r.text("formula", &formula).put("n", rep.n).put("hits", rep.hits).put("seed", rep.seed);
    r.put("estimate", format_rational(&rep.estimate)).put("ci-halfwidth", rep.ci_halfwidth);
    r.put("exact", format_rational(&exact));
    let exact_f = exact.to_f64().unwrap_or(f64::NAN);
    r.put("within-ci", (rep.estimate_f64() - exact_f).abs() <= rep.ci_halfwidth);
    io.report(&r)?;
    Ok(Exit::Yes)
}
