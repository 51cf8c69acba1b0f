use fraisse_core::amalgamation::{self, check_1_adequate, enumerate_rp2, ApVerdict, Link, PointType};
use fraisse_core::generic::{ExtensionStep, GenericOracle, Saturation, SaturationReport};
use fraisse_core::reduct::{is_reduct, TypedUniverse};
use fraisse_core::text::{parse_document, write_structure, write_vocab};
use fraisse_core::types::{
    acl_approx, check_degenerate_dependence, check_triviality, enumerate_types, Approximation, DegeneracyVerdict,
    FixedApproximation, OracleApproximation, TrivialityVerdict,
};
use fraisse_core::zeroone::{convergence_report, parse_axiom, Z_95};
use fraisse_core::{Element, FinStructure};

use crate::input::{self, Input};
use crate::report::{Format, Outcome, Report, Table};
use crate::{
    AclArgs, ApArgs, ClassArgs, CliError, DegenerateArgs, EnumArgs, GenArgs, OracleArgs, P2File, ReductArgs,
    TrivialityArgs, TypesArgs, UniverseArgs, ZeroOneArgs,
};

type Run = Result<(Report, Outcome), CliError>;

/// One line: `size n; R: 0 1; 1 0`.
pub fn describe(s: &FinStructure) -> String {
    let mut parts = vec![format!("size {}", s.size())];
    for (i, sym) in s.vocab().symbols().iter().enumerate() {
        let tuples = s.tuples(i);
        if !tuples.is_empty() {
            let body: Vec<String> =
                tuples.iter().map(|t| t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")).collect();
            parts.push(format!("{}: {}", sym.name, body.join(", ")));
        }
    }
    parts.join("; ")
}

pub fn list(xs: &[Element]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn point_name(p: PointType) -> String {
    format!("{:x}", p.0)
}

fn link_name(l: Link) -> String {
    format!("{:x}/{:x}", l.forward, l.backward)
}

pub fn check_hp(f: Format, a: &ClassArgs) -> Run {
    let (spec, input) = input::load_class(&a.class, a.bound)?;
    let r = amalgamation::check_hp(&spec, a.bound);
    let mut rep = Report::new(f, "check-hp", None, &[input]);
    rep.fact("bound", r.bound);
    rep.fact("members checked", r.members_checked);
    rep.fact("verdict", if r.holds { "holds" } else { "fails" });
    if let Some(v) = &r.violation {
        rep.fact("member", describe(&v.member));
        rep.fact("missing substructure on", list(&v.subset));
    }
    Ok((rep, if r.holds { Outcome::Computed } else { Outcome::Negative }))
}

pub fn check_ap(f: Format, a: &ApArgs) -> Run {
    let (spec, input) = input::load_class(&a.class, a.size_bound)?;
    let r = amalgamation::check_ap(&spec, a.amalgam_bound);
    let mut rep = Report::new(f, "check-ap", None, &[input]);
    rep.fact("size bound", r.size_bound);
    rep.fact("amalgam bound", r.amalgam_bound);
    rep.fact("triples checked", r.triples_checked);
    let (word, outcome) = match r.verdict {
        ApVerdict::Holds => ("holds", Outcome::Computed),
        ApVerdict::Fails => ("fails", Outcome::Negative),
        ApVerdict::Inconclusive => ("inconclusive (amalgam bound too small)", Outcome::Inconclusive),
    };
    rep.fact("verdict", word);
    if let Some(t) = &r.counterexample {
        rep.fact("A", describe(&t.a));
        rep.fact("B", describe(&t.b));
        rep.fact("C", describe(&t.c));
        rep.fact("A -> B", list(&t.f_b.map));
        rep.fact("A -> C", list(&t.f_c.map));
    }
    Ok((rep, outcome))
}

pub fn check_adequate(f: Format, a: &P2File) -> Run {
    let (p2, input) = input::load_p2(Some(&a.p2))?;
    let r = check_1_adequate(&p2);
    let mut rep = Report::new(f, "check-adequate", None, &[input]);
    rep.fact("members", p2.members().len());
    rep.fact("point types", p2.point_types().iter().map(|&p| point_name(p)).collect::<Vec<_>>().join(" "));
    rep.fact("closed under substructures", yes_no(r.hp_violation.is_none()));
    rep.fact("has a 2-structure", yes_no(r.has_two_structure));
    rep.fact("verdict", if r.holds { "1-adequate" } else { "not 1-adequate" });
    if let Some((i, sub)) = &r.hp_violation {
        rep.fact("member missing a substructure", format!("{} on {}", i, list(sub)));
    }
    let mut t = Table::new(&["p", "q", "joint member", "links"]);
    for ((p, q), i) in &r.witnesses {
        let links: Vec<String> = p2.links(*p, *q).into_iter().map(link_name).collect();
        t.row(vec![point_name(*p), point_name(*q), i.to_string(), links.join(" ")]);
    }
    for (p, q) in &r.missing_pairs {
        t.row(vec![point_name(*p), point_name(*q), "none".into(), String::new()]);
    }
    rep.table(&t);
    Ok((rep, if r.holds { Outcome::Computed } else { Outcome::Negative }))
}

pub fn enumerate(f: Format, a: &EnumArgs) -> Run {
    let (p2, input) = input::load_p2(Some(&a.p2))?;
    let found = enumerate_rp2(&p2, a.size);
    let mut rep = Report::new(f, "enum", None, &[input]);
    rep.fact("size", a.size);
    rep.fact("isomorphism types", found.len());
    let mut t = Table::new(&["index", "structure"]);
    for (i, s) in found.iter().enumerate() {
        t.row(vec![i.to_string(), describe(s)]);
    }
    rep.table(&t);
    Ok((rep, Outcome::Computed))
}

/// Grows and saturates an oracle as configured.
fn build_oracle(a: &OracleArgs) -> Result<(GenericOracle, Vec<SaturationReport>, Input), CliError> {
    let (p2, input) = input::load_p2(a.p2.as_deref())?;
    let mut o = GenericOracle::new(p2, a.seed)?;
    o.grow(a.points)?;
    let reports = if a.passes > 0 { o.saturate_passes(a.saturate, a.saturation_budget, a.passes) } else { Vec::new() };
    Ok((o, reports, input))
}

fn saturation_facts(rep: &mut Report, o: &GenericOracle, reports: &[SaturationReport]) -> Outcome {
    let sat = o.saturation();
    rep.fact("size", o.size());
    rep.fact("saturation", format!("level {} over the first {} points", sat.level, sat.prefix));
    rep.fact("passes", reports.len());
    rep.fact("closed", yes_no(o.is_closed(sat.level)));
    match reports.iter().find(|r| !r.saturated) {
        Some(r) => {
            rep.fact("budget exhausted", r.missing.as_ref().map_or(String::new(), |m| m.to_string()));
            Outcome::Inconclusive
        }
        None => Outcome::Computed,
    }
}

pub fn gen(_f: Format, a: &GenArgs) -> Run {
    // The report is itself a structure document, whatever the format.
    let (o, saturation, inputs, outcome_reports) = match &a.replay {
        None => {
            let (o, reports, input) = build_oracle(&a.oracle)?;
            let sat = o.saturation();
            (o, sat, vec![input], Some(reports))
        }
        Some(path) => {
            let (p2, p2_input) = input::load_p2(a.oracle.p2.as_deref())?;
            let (text, input) = input::read("transcript", path)?;
            let doc = parse_document(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let seed = match doc.directive("seed") {
                Some(s) => s.parse().map_err(|_| CliError::Usage(format!("{}: bad seed `{s}`", path.display())))?,
                None => a.oracle.seed,
            };
            let steps = doc
                .directives
                .iter()
                .filter(|(_, k, _)| k == "extend")
                .map(|(_, _, rest)| ExtensionStep::parse(&format!("extend {rest}")))
                .collect::<Result<Vec<_>, _>>()?;
            let o = GenericOracle::replay(p2, seed, &steps)?;
            if let Some(recorded) = doc.structures.first() {
                if recorded.structure != *o.current() {
                    return Err(CliError::Usage(format!("{}: replay does not reproduce the recorded structure", path.display())));
                }
            }
            let (_, sat, _) = input::load_structure(path)?;
            (o, sat, vec![p2_input, input], None)
        }
    };
    let mut rep = Report::document("gen", Some(o.seed()), &inputs);
    let outcome = match &outcome_reports {
        Some(reports) => saturation_facts(&mut rep, &o, reports),
        None => {
            rep.note("replayed from transcript");
            Outcome::Computed
        }
    };
    let mut doc = String::new();
    write_vocab(&mut doc, "v", o.current().vocab());
    doc.push('\n');
    write_structure(&mut doc, "approximation", "v", o.current());
    doc.push('\n');
    let Saturation { level, prefix } = saturation;
    doc.push_str(&format!("seed {}\nsaturation {level} {prefix}\n", o.seed()));
    doc.push_str(&o.transcript());
    if !doc.ends_with('\n') {
        doc.push('\n');
    }
    rep.raw(&doc);
    Ok((rep, outcome))
}

enum Source {
    Oracle(GenericOracle),
    Fixed(FixedApproximation<FinStructure>),
}

impl Source {
    fn universe(&self) -> &dyn TypedUniverse {
        match self {
            Source::Oracle(o) => o.current(),
            Source::Fixed(f) => &f.universe,
        }
    }

    fn with_approx<R>(&mut self, f: impl FnOnce(&mut dyn Approximation) -> R) -> R {
        match self {
            Source::Oracle(o) => f(&mut OracleApproximation { oracle: o }),
            Source::Fixed(x) => f(x),
        }
    }
}

/// The structure to analyse and the report opened for it.
fn open(f: Format, command: &str, a: &UniverseArgs) -> Result<(Source, Report, Outcome), CliError> {
    match &a.structure {
        Some(path) => {
            let (s, sat, input) = input::load_structure(path)?;
            let region = if sat == Saturation::default() { s.size() } else { sat.prefix };
            let mut rep = Report::new(f, command, None, &[input]);
            rep.fact("size", s.size());
            rep.fact("saturation", format!("level {} over the first {} points (declared)", sat.level, region));
            Ok((Source::Fixed(FixedApproximation { universe: s, level: sat.level, region }), rep, Outcome::Computed))
        }
        None => {
            let (o, reports, input) = build_oracle(&a.oracle)?;
            let mut rep = Report::new(f, command, Some(a.oracle.seed), &[input]);
            let outcome = saturation_facts(&mut rep, &o, &reports);
            Ok((Source::Oracle(o), rep, outcome))
        }
    }
}

pub fn types(f: Format, a: &TypesArgs) -> Run {
    let (src, mut rep, outcome) = open(f, "types", &a.universe)?;
    let census = enumerate_types(src.universe(), a.n, &a.params, a.distinct)?;
    rep.fact("arity", census.arity);
    rep.fact("parameters", list(&census.params));
    rep.fact("distinct only", yes_no(census.distinct));
    rep.fact("tuples", census.total());
    rep.fact("types", census.len());
    let mut t = Table::new(&["type", "count"]);
    for (ty, count) in &census.entries {
        t.row(vec![ty.to_hex(), count.to_string()]);
    }
    rep.table(&t);
    Ok((rep, outcome))
}

pub fn acl(f: Format, a: &AclArgs) -> Run {
    let (mut src, mut rep, outcome) = open(f, "acl", &a.universe)?;
    let r = src.with_approx(|ap| acl_approx(ap, &a.base, a.d, a.budget, a.candidates.as_deref()))?;
    rep.fact("base", list(&r.base));
    rep.fact("d", r.d);
    rep.fact("points added", r.points_added);
    rep.fact("algebraic", list(&r.algebraic().into_iter().collect::<Vec<_>>()));
    let inconclusive = r.inconclusive();
    rep.fact("inconclusive", inconclusive.len());
    let mut t = Table::new(&["element", "realisations", "verdict"]);
    for e in &r.entries {
        t.row(vec![e.element.to_string(), e.count.to_string(), e.verdict.to_string()]);
    }
    rep.table(&t);
    let mine = if inconclusive.is_empty() { Outcome::Computed } else { Outcome::Inconclusive };
    Ok((rep, outcome.and(mine)))
}

pub fn triviality(f: Format, a: &TrivialityArgs) -> Run {
    let (mut src, mut rep, outcome) = open(f, "triviality", &a.universe)?;
    let r = src.with_approx(|ap| check_triviality(ap, a.max_b, a.d, a.budget))?;
    rep.fact("max base size", a.max_b);
    rep.fact("d", a.d);
    rep.fact("bases checked", r.bases_checked);
    rep.fact("inconclusive entries", r.inconclusive_entries);
    rep.fact("points added", r.points_added);
    let mine = match &r.verdict {
        TrivialityVerdict::Trivial => {
            rep.fact("verdict", "trivial");
            Outcome::Computed
        }
        TrivialityVerdict::Violation { element, base } => {
            rep.fact("verdict", "not trivial");
            rep.fact("witness", format!("{element} is algebraic over {} but over no single point of it", list(base)));
            Outcome::Negative
        }
        TrivialityVerdict::Inconclusive => {
            rep.fact("verdict", "inconclusive");
            Outcome::Inconclusive
        }
    };
    Ok((rep, outcome.and(mine)))
}

pub fn degenerate(f: Format, a: &DegenerateArgs) -> Run {
    let (mut src, mut rep, outcome) = open(f, "degenerate", &a.universe)?;
    let sizes = (a.max_a, a.max_b, a.max_c);
    let r = src.with_approx(|ap| check_degenerate_dependence(ap, a.rho, sizes, a.d, a.budget))?;
    rep.fact("rho", a.rho);
    rep.fact("set sizes", format!("|A| <= {}, |B| <= {}, |C| <= {}", a.max_a, a.max_b, a.max_c));
    rep.fact("configurations", r.configurations);
    rep.fact("dependencies", r.dependencies);
    rep.fact("inconclusive entries", r.inconclusive_entries);
    rep.fact("points added", r.points_added);
    let mine = match &r.verdict {
        DegeneracyVerdict::Degenerate { n } => {
            rep.fact("verdict", format!("{n}-degenerate"));
            Outcome::Computed
        }
        DegeneracyVerdict::Violation { a: x, b, c } => {
            rep.fact("verdict", "not degenerate");
            rep.fact("witness", format!("A = {} depends on B = {} over C = {}", list(x), list(b), list(c)));
            Outcome::Negative
        }
        DegeneracyVerdict::Inconclusive => {
            rep.fact("verdict", "inconclusive");
            Outcome::Inconclusive
        }
    };
    Ok((rep, outcome.and(mine)))
}

pub fn zeroone(f: Format, a: &ZeroOneArgs) -> Run {
    let (p2, input) = input::load_p2(a.p2.as_deref())?;
    let axioms = a
        .axiom
        .iter()
        .map(|s| parse_axiom(s, &p2).map_err(|e| CliError::Usage(format!("axiom `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let r = convergence_report(&p2, &axioms, &a.sizes, a.trials, a.seed)?;
    let mut rep = Report::new(f, "zeroone", Some(a.seed), &[input]);
    rep.note("sampler: point types, then the link of each pair, drawn independently and uniformly");
    rep.note("among the permitted options; trial i uses stream i of the seed");
    rep.fact("axioms", axioms.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" & "));
    rep.fact("trials", a.trials);
    let mut t = Table::new(&["n", "successes", "estimate", "wilson95 low", "wilson95 high"]);
    for row in &r.rows {
        t.row(vec![
            row.estimate.n.to_string(),
            row.estimate.successes.to_string(),
            format!("{:.4}", row.estimate.estimate()),
            format!("{:.4}", row.lower),
            format!("{:.4}", row.upper),
        ]);
    }
    rep.table(&t);
    rep.fact("z", Z_95);
    let outcome = if r.incompatible {
        rep.fact("verdict", "some axiom has no realisation in the class");
        Outcome::Negative
    } else if r.monotone() {
        rep.fact("verdict", "non-decreasing up to interval overlap");
        Outcome::Computed
    } else {
        let drops: Vec<String> = r.non_monotone.iter().map(|(x, y)| format!("{x}->{y}")).collect();
        rep.fact("verdict", format!("drops at {}", drops.join(" ")));
        Outcome::Negative
    };
    Ok((rep, outcome))
}

pub fn reduct(f: Format, a: &ReductArgs) -> Run {
    let (source, si) = input::load_universe("source", &a.source)?;
    let (target, ti) = input::load_universe("target", &a.target)?;
    let r = is_reduct(source.as_dyn(), target.as_dyn(), a.nmax)?;
    let mut rep = Report::new(f, "reduct", None, &[si, ti]);
    rep.fact("carrier", source.as_dyn().carrier_size());
    rep.fact("n max", r.n_max);
    let outcome = match (&r.failing_arity, &r.counterexample) {
        (Some(k), Some((x, y))) => {
            rep.fact("verdict", format!("not a reduct: fails at arity {k}"));
            rep.fact("counterexample", format!("{} and {}", list(x), list(y)));
            let mut t = Table::new(&["tuple", "source type", "target type"]);
            for tup in [x, y] {
                t.row(vec![list(tup), source.as_dyn().type_of(tup).to_hex(), target.as_dyn().type_of(tup).to_hex()]);
            }
            rep.table(&t);
            Outcome::Negative
        }
        _ => {
            rep.fact("verdict", format!("reduct up to arity {}", r.n_max));
            Outcome::Computed
        }
    };
    Ok((rep, outcome))
}
