//! The doubled random graph walk-through.

use std::path::Path;

use fraisse_core::amalgamation::{age, P2Spec};
use fraisse_core::doubled::{
    build_double_from_oracle, build_expansion_star, e_definability_check, three_type_separation, verify_claim1,
    verify_claim2, verify_claim3, DoubledStructure, QuotientGeometry,
};
use fraisse_core::generic::GenericOracle;
use fraisse_core::reduct::{binary_fragment, is_reduct, TypedUniverse};
use fraisse_core::text::structure_to_text;

use crate::commands::list;
use crate::input::{self, quotient_text};
use crate::report::{Format, Outcome, Report};
use crate::{CliError, ExampleArgs, ExampleCheck};

fn verdict(rep: &mut Report, outcome: &mut Outcome, name: &str, pass: bool, detail: String) {
    rep.fact(name, format!("{} {detail}", if pass { "PASS" } else { "FAIL" }));
    if !pass {
        *outcome = outcome.and(Outcome::Negative);
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// `F` grown to `points` and closed under level-`k` saturation.
fn closed_base(seed: u64, points: usize, k: usize) -> Result<(GenericOracle, bool), CliError> {
    let mut o = GenericOracle::new(P2Spec::random_graph(), seed)?;
    o.grow(points)?;
    let reports = o.saturate_passes(k, 1_000_000, 64);
    let closed = reports.iter().all(|r| r.saturated) && o.is_closed(k);
    Ok((o, closed))
}

pub fn run(f: Format, a: &ExampleArgs) -> Result<(Report, Outcome), CliError> {
    let (_, p2_input) = input::load_p2(None)?;
    let mut rep = Report::new(f, "example412", Some(a.seed), &[p2_input]);
    let mut outcome = Outcome::Computed;
    let wants = |c: ExampleCheck| a.check == ExampleCheck::All || a.check == c;

    let (o, closed) = closed_base(a.seed, a.base_size, 2)?;
    let d = build_double_from_oracle(&o)?;
    let g = QuotientGeometry::of(&d);
    rep.fact("F", format!("{} points, level-2 saturation closed: {}", d.base.size(), if closed { "yes" } else { "no" }));
    rep.fact("M", format!("{} points, {} pairs", d.m.size(), g.len()));
    if !closed {
        rep.fact("note", "F is not closed under level-2 saturation; the checks below lack their precondition");
        outcome = Outcome::Inconclusive;
    }

    if wants(ExampleCheck::Claim1) {
        let r = verify_claim1(&d);
        let detail = match r.violation {
            None => format!("u~v iff u'~v' iff u!~v' on all {} ordered pairs", r.pairs_checked),
            Some((u, v)) => format!("violated at ({u}, {v})"),
        };
        verdict(&mut rep, &mut outcome, "claim 1", r.holds(), detail);
    }
    if wants(ExampleCheck::EDefinability) {
        let r = e_definability_check(&d);
        let detail = match r.mismatch {
            None => format!("x E y iff no common neighbour, on all {} pairs", r.pairs_checked),
            Some((x, y)) => format!("formula and pairing disagree at ({x}, {y})"),
        };
        verdict(&mut rep, &mut outcome, "pairing definable", r.definable_here(), detail);
    }
    if wants(ExampleCheck::Claim3) {
        let r = verify_claim3(&g);
        let c = r.case_counts;
        let detail = match r.violation {
            None => format!(
                "{} ordered class pairs share one pair type (cases ~/~ {}, !~/!~ {}, ~/!~ {}, !~/~ {})",
                r.pairs_checked, c[0], c[1], c[2], c[3]
            ),
            Some(((g1, g2), (h1, h2))) => format!("classes ({g1}, {g2}) differ from ({h1}, {h2})"),
        };
        verdict(&mut rep, &mut outcome, "claim 3", r.holds(), detail);
    }
    if wants(ExampleCheck::Claim2) {
        let level = a.claim2_n + 1;
        // One pass is enough: claim 2 only draws from the saturated prefix.
        let mut o3 = GenericOracle::new(P2Spec::random_graph(), a.seed ^ 0x2)?;
        o3.grow(a.claim2_points)?;
        if !o3.saturate(level, 1_000_000).saturated {
            rep.fact("claim 2 base", "saturation budget exhausted; claim 2 is inconclusive");
            outcome = outcome.and(Outcome::Inconclusive);
        }
        let d3 = build_double_from_oracle(&o3)?;
        let r = verify_claim2(&d3, a.claim2_n, a.claim2_trials, a.seed)?;
        let mut detail =
            format!("{}/{} trials at n = {} (base of {} points, level {level})", r.successes, r.trials, r.n, d3.base.size());
        if let Some((us, vs, u)) = &r.failure {
            detail.push_str(&format!("; first failure u = {} v = {} next {u}", list(us), list(vs)));
        }
        verdict(&mut rep, &mut outcome, "claim 2", r.successes == r.trials, detail);
    }
    let witness = if wants(ExampleCheck::Separation) || wants(ExampleCheck::Reduct) {
        match three_type_separation(&g) {
            Ok(w) => {
                let pairs_agree =
                    [(0, 1), (0, 2), (1, 2)].iter().all(|&(i, j)| g.pair_type(&[w.g[i], w.g[j]]) == g.pair_type(&[w.h[i], w.h[j]]));
                let triples_differ = g.pair_type(&w.g) != g.pair_type(&w.h);
                if wants(ExampleCheck::Separation) {
                    let detail = format!(
                        "path classes {} and triangle classes {}: pair types agree, triple types differ",
                        list(&w.g),
                        list(&w.h)
                    );
                    verdict(&mut rep, &mut outcome, "separation", pairs_agree && triples_differ, detail);
                }
                Some(w)
            }
            Err(e) => {
                verdict(&mut rep, &mut outcome, "separation", false, e.to_string());
                None
            }
        }
    } else {
        None
    };
    let star = g.with_structure(build_expansion_star(&d)?)?;
    if wants(ExampleCheck::Reduct) {
        let g0 = binary_fragment(&g)?;
        let r = is_reduct(&g0.structure, &g, 3)?;
        let mut detail = match (&r.failing_arity, &r.counterexample) {
            (Some(k), Some((x, y))) => format!("G is not a reduct of G0: fails at arity {k} on {} and {}", list(x), list(y)),
            _ => "G0 defines G up to arity 3".to_string(),
        };
        let mut pass = r.failing_arity == Some(3);
        if let Some(w) = &witness {
            let refutes = g0.structure.type_of(&w.g) == g0.structure.type_of(&w.h);
            detail.push_str(&format!("; separation witness has equal G0 types: {}", if refutes { "yes" } else { "no" }));
            pass &= refutes;
        }
        verdict(&mut rep, &mut outcome, "reduct of G0", pass, detail);

        let gs0 = binary_fragment(&star)?;
        let r = is_reduct(&gs0.structure, &g, 4)?;
        let detail = match r.failing_arity {
            None => format!(
                "G is a reduct of G*0 up to arity 4 (G*0: {} one-types, {} two-types, {} structures of size <= 2)",
                gs0.one_types.len(),
                gs0.two_types.len(),
                age(&gs0.structure, 2).len()
            ),
            Some(k) => format!("fails at arity {k}"),
        };
        verdict(&mut rep, &mut outcome, "reduct of G*0", r.holds(), detail);
    }

    if let Some(dir) = &a.emit_structures {
        emit(dir, &d, &g, &star)?;
        rep.fact("wrote", format!("{}/{{F,M,Mstar,G,G0,Gstar0}}.txt", dir.display()));
    }
    Ok((rep, outcome))
}

fn emit(dir: &Path, d: &DoubledStructure, g: &QuotientGeometry, star: &QuotientGeometry) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let mut f = structure_to_text("F", &d.base);
    let sat = d.base_saturation;
    f.push_str(&format!("\nsaturation {} {}\n", sat.level, sat.prefix));
    write(dir, "F.txt", &f)?;
    write(dir, "M.txt", &structure_to_text("M", &d.m))?;
    write(dir, "Mstar.txt", &structure_to_text("Mstar", &star.m))?;
    write(dir, "G.txt", &quotient_text("M", g, "full"))?;
    write(dir, "G0.txt", &quotient_text("M", g, "binary"))?;
    write(dir, "Gstar0.txt", &quotient_text("Mstar", star, "binary"))?;
    Ok(())
}
