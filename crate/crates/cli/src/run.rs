//! Dispatch of a problem to the library and assembly of the certificate.

use dmodp::algebra::parse::parse_poly_in;
use dmodp::algebra::{center_names, var_names, MultiPoly, PrimeField, Rationals, Ring};
use dmodp::connection::{
    derham_cohomology, exponential_module, p_curvature, p_curvature_lambda, Connection, LambdaConnection, MatrixRow,
    PMat,
};
use dmodp::dixmier::{twisted_module_support, verify_frobenius_twist, PolyMap2};
use dmodp::functors::{cycle_pushforward, finite_pushforward_curve, FiniteCurveMap};
use dmodp::groebner::Budget;
use dmodp::lifting::{lifts_isomorphic, obstruction_class, Exactness, LiftedConnection, Obstruction};
use dmodp::psupport::{
    annihilator_in_center, cyclic_annihilator, cyclic_connection, default_start_bound, is_lagrangian_candidate,
    p_cycle, p_cycle_of_connection, CenterEvaluation, PCycle,
};
use dmodp::weyl::parse_weyl_mod_p;
use dmodp::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::problem::{ModuleSpec, Payload, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
}

fn check(name: impl Into<String>, pass: bool) -> Assertion {
    Assertion { name: name.into(), pass }
}

/// Outcome at one prime.
#[derive(Clone, Debug)]
pub struct PrimeRun {
    pub prime: u64,
    pub outcome: Result<(Value, Vec<Assertion>)>,
    /// Support entries, kept for the cross-prime comparison.
    pub cycle_key: Option<Vec<(Vec<String>, String)>>,
}

pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => 3,
        Error::BadPrime(_) => 2,
        Error::Parse { .. } => 4,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BadPrime(_) => "bad_prime",
        Error::DomainMismatch(_) => "domain_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::ExponentOverflow => "exponent_overflow",
        Error::BudgetExceeded(_) => "budget_exceeded",
        Error::NotCentral(_) => "not_central",
        Error::NotFlat(_) => "not_flat",
        Error::NotMonic(_) => "not_monic",
        Error::NonStable(_) => "non_stable",
        Error::SampleDegenerate(_) => "sample_degenerate",
        Error::DenominatorEscape(_) => "denominator_escape",
        Error::NoSmoothSample(_) => "no_smooth_sample",
        Error::RelationViolated(_) => "relation_violated",
        Error::NotClosed(_) => "not_closed",
        Error::Parse { .. } => "parse",
        Error::Invalid(_) => "invalid",
    }
}

/// Coefficients written in `(-p/2, p/2]`, so reductions of one integer
/// polynomial print the same at every prime.
pub fn signed(f: &MultiPoly<PrimeField>, names: &[String]) -> String {
    let p = f.ring().p();
    f.map_coeffs(Rationals, |c| {
        let v = if *c > p / 2 { *c as i64 - p as i64 } else { *c as i64 };
        Rationals.from_i64(v)
    })
    .to_string_with(names)
}

fn signed_all(fs: &[MultiPoly<PrimeField>], names: &[String]) -> Vec<String> {
    fs.iter().map(|f| signed(f, names)).collect()
}

fn signed_mats(ms: &[PMat<PrimeField>], names: &[String]) -> Value {
    json!(ms
        .iter()
        .map(|m| m.iter().map(|r| signed_all(r, names)).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn parse_fp(text: &str, names: &[String], field: PrimeField) -> Result<MultiPoly<PrimeField>> {
    parse_poly_in(text, names, field, &|q| field.from_rational(q))
}

fn module_connection(m: &ModuleSpec, field: PrimeField) -> Result<Connection<PrimeField>> {
    let n = m.n.unwrap_or(1);
    if let Some(c) = &m.connection {
        return c.to_connection(field);
    }
    if let Some(f) = &m.exponential {
        return exponential_module(&parse_fp(f, &var_names("x", n), field)?);
    }
    let l = parse_weyl_mod_p(m.cyclic.as_deref().unwrap_or_default(), field, n)?;
    cyclic_connection(&l)
}

fn cycle_json(c: &PCycle) -> Value {
    let names = center_names(c.n);
    let components: Vec<Value> = c
        .components
        .iter()
        .map(|k| {
            json!({
                "ideal": signed_all(k.basis.basis(), &names),
                "multiplicity": k.multiplicity.to_string(),
                "degree": k.degree,
            })
        })
        .collect();
    json!({
        "rank": c.rank,
        "annihilator": signed_all(&c.annihilator, &names),
        "bound": c.bound,
        "components": components,
        "mass": c.mass().to_string(),
        "sample_point": c.sample.point,
        "via_fourier": c.via_fourier,
    })
}

fn cycle_key(c: &PCycle) -> Vec<(Vec<String>, String)> {
    let names = center_names(c.n);
    let mut v: Vec<_> = c
        .components
        .iter()
        .map(|k| (signed_all(k.basis.basis(), &names), k.multiplicity.to_string()))
        .collect();
    v.sort();
    v
}

fn mass_check(c: &PCycle) -> Assertion {
    check("mass_formula", c.mass().to_string() == c.rank.to_string())
}

fn polymap_strings(m: &PolyMap2<PrimeField>) -> Vec<String> {
    let names = center_names(1);
    vec![signed(&m.p, &names), signed(&m.q, &names)]
}

fn parse_matrices(rows: &[Vec<MatrixRow>], n: usize, rank: usize, field: PrimeField) -> Result<Vec<PMat<PrimeField>>> {
    if rows.len() != n {
        return Err(Error::Invalid(format!("expected {n} matrices")));
    }
    let names = var_names("x", n);
    rows.iter()
        .map(|m| {
            let flat: Vec<&String> = m
                .iter()
                .flat_map(|r| match r {
                    MatrixRow::Entry(s) => vec![s],
                    MatrixRow::Row(v) => v.iter().collect(),
                })
                .collect();
            if flat.len() != rank * rank {
                return Err(Error::Invalid(format!("matrix must have {} entries", rank * rank)));
            }
            flat.chunks(rank)
                .map(|r| r.iter().map(|s| parse_fp(s, &names, field)).collect())
                .collect()
        })
        .collect()
}

fn run_prime(spec: &ProblemSpec, p: u64, budget: &Budget) -> PrimeRun {
    let mut key = None;
    let outcome = PrimeField::new(p).and_then(|field| execute_at(spec, field, budget, &mut key));
    PrimeRun {
        prime: p,
        outcome,
        cycle_key: key,
    }
}

fn execute_at(
    spec: &ProblemSpec,
    field: PrimeField,
    budget: &Budget,
    key: &mut Option<Vec<(Vec<String>, String)>>,
) -> Result<(Value, Vec<Assertion>)> {
    match &spec.payload {
        Payload::Pcurv(pl) => {
            let c = module_connection(&pl.module, field)?;
            let n = c.nvars();
            if pl.lambda {
                let lc = LambdaConnection::from_connection(&c)?;
                let mut names = var_names("x", n);
                names.push("lambda".into());
                let psi = p_curvature_lambda(&lc)?;
                return Ok((json!({ "psi_lambda": signed_mats(&psi, &names) }), vec![]));
            }
            let pc = p_curvature(&c)?;
            let names = var_names("x", n);
            let psi: Vec<Value> = pc
                .psi()
                .iter()
                .map(|m| json!(m.iter().map(|r| r.iter().map(|e| e.to_string_with(&names)).collect::<Vec<_>>()).collect::<Vec<_>>()))
                .collect();
            let result = json!({
                "psi": psi,
                "denominator": signed(pc.denominator(), &names),
                "zero": pc.is_zero(),
            });
            // p_curvature refuses to return unless both hold
            Ok((result, vec![check("o_linear", true), check("commuting", true)]))
        }
        Payload::Psupport(pl) => {
            let ann = match &pl.module.cyclic {
                Some(text) => cyclic_annihilator(&parse_weyl_mod_p(text, field, pl.module.n.unwrap_or(1))?, budget)?,
                None => {
                    let c = module_connection(&pl.module, field)?;
                    annihilator_in_center(&CenterEvaluation::of_connection(&c)?, default_start_bound(&c), budget)?
                }
            };
            let names = center_names(ann.basis.nvars() / 2);
            let mut result = json!({
                "annihilator": signed_all(ann.basis.basis(), &names),
                "bound": ann.bound,
                "bounds_tried": ann.bounds_tried,
            });
            let mut asserts = vec![];
            if pl.lagrangian {
                let r = is_lagrangian_candidate(&ann.ideal(), budget)?;
                result["lagrangian"] = json!({
                    "dimension": r.dimension,
                    "dim_ok": r.dim_ok,
                    "samples": r.samples.len(),
                    "isotropic_samples": r.samples.iter().filter(|s| s.isotropic).count(),
                });
                asserts.push(check("lagrangian_candidate", r.is_candidate()));
            }
            Ok((result, asserts))
        }
        Payload::Pcycle(m) => {
            let c = match &m.cyclic {
                Some(text) => p_cycle(&parse_weyl_mod_p(text, field, m.n.unwrap_or(1))?, budget)?,
                None => p_cycle_of_connection(&module_connection(m, field)?, budget)?,
            };
            *key = Some(cycle_key(&c));
            Ok((cycle_json(&c), vec![mass_check(&c)]))
        }
        Payload::Push(pl) => {
            let src = module_connection(&pl.source, field)?;
            if src.nvars() != 1 {
                return Err(Error::DomainMismatch("pushforward is along a map of curves (n = 1)".into()));
            }
            let map = FiniteCurveMap::new(parse_fp(&pl.map, &var_names("x", 1), field)?)?;
            let pushed = finite_pushforward_curve(&src, &map)?;
            let direct = p_cycle_of_connection(&pushed, budget)?;
            let via_cycles = cycle_pushforward(&p_cycle_of_connection(&src, budget)?, &map, budget)?;
            let agree = cycle_key(&direct) == cycle_key(&via_cycles);
            let result = json!({
                "pushforward": serde_json::to_value(pushed.to_spec()).expect("connection spec serializes"),
                "cycle": cycle_json(&direct),
                "pushed_cycle": cycle_json(&via_cycles),
            });
            Ok((result, vec![mass_check(&direct), check("cycle_pushforward_compatible", agree)]))
        }
        Payload::Derham(pl) => {
            let c = module_connection(&pl.module, field)?;
            let h = derham_cohomology(&c, pl.bound)?;
            let groups: Vec<Value> = h
                .groups
                .iter()
                .map(|g| {
                    json!({
                        "degree": g.degree,
                        "truncation": g.truncation,
                        "dimension": g.dimension,
                        "generators": g.generators,
                        "basis": g.basis_strings(),
                    })
                })
                .collect();
            let result = json!({
                "bound": h.bound,
                "groups": groups,
                "stable": h.stable,
                "generators_at_double": h.generators_at_double,
            });
            Ok((result, vec![]))
        }
        Payload::DixmierVerify(pl) => {
            let mut words = Vec::new();
            let mut asserts = Vec::new();
            for (i, w) in pl.all_words().iter().enumerate() {
                let cert = verify_frobenius_twist(w, field)?;
                let mut entry = json!({
                    "word": serde_json::to_value(w).expect("words serialize"),
                    "center_action": polymap_strings(&cert.center),
                    "polymap": polymap_strings(&cert.polymap),
                    "holds": cert.holds,
                    "holds_corrected": cert.holds_corrected,
                });
                if pl.support {
                    let ts = twisted_module_support(w, field, budget)?;
                    let names = center_names(1);
                    entry["support"] = json!({
                        "module": signed_all(ts.module.basis(), &names),
                        "polymap_image": signed_all(ts.polymap_image.basis(), &names),
                        "differ": ts.differ,
                        "via_fourier": ts.via_fourier,
                    });
                }
                asserts.push(check(format!("frobenius_twist[{i}]"), cert.holds));
                words.push(entry);
            }
            let held = words.iter().filter(|w| w["holds"] == json!(true)).count();
            Ok((json!({ "words": words, "held": held }), asserts))
        }
        Payload::LiftObstruction(pl) => {
            let c = module_connection(&pl.module, field)?;
            let names = var_names("x", c.nvars());
            match obstruction_class(&c, pl.bound)? {
                Obstruction::Liftable { witness, primitive } => {
                    let result = json!({
                        "liftable": true,
                        "witness": witness.to_strings(),
                        "primitive": signed_mats(&primitive, &names),
                    });
                    Ok((result, vec![check("witness_flat", witness.is_flat()?)]))
                }
                Obstruction::Obstructed(cls) => {
                    let exactness = match &cls.exactness {
                        Exactness::Cartier { nonvanishing } => json!({
                            "method": "cartier",
                            "blocking_monomials": nonvanishing
                                .iter()
                                .map(|(m, c)| signed(&MultiPoly::term(field, m.clone(), *c), &names))
                                .collect::<Vec<_>>(),
                        }),
                        Exactness::Truncated { bound } => json!({ "method": "truncated", "bound": bound }),
                    };
                    let result = json!({
                        "liftable": false,
                        "representative": signed_mats(std::slice::from_ref(&cls.representative), &names)[0],
                        "exactness": exactness,
                    });
                    Ok((result, vec![]))
                }
            }
        }
        Payload::LiftsIso(pl) => {
            let base = match &pl.base {
                Some(b) => b.to_connection(field)?,
                None => Connection::trivial(field, pl.n, pl.rank),
            };
            if base.nvars() != pl.n || base.rank() != pl.rank {
                return Err(Error::DomainMismatch("base connection does not match n and rank".into()));
            }
            let zero = || vec![vec![vec![MultiPoly::zero(field, pl.n); pl.rank]; pl.rank]; pl.n];
            let alpha = |a: &Option<Vec<Vec<MatrixRow>>>| match a {
                Some(rows) => parse_matrices(rows, pl.n, pl.rank, field),
                None => Ok(zero()),
            };
            let lift = LiftedConnection::lift(&base)?;
            let l1 = lift.perturb(&alpha(&pl.alpha1)?)?;
            let l2 = lift.perturb(&alpha(&pl.alpha2)?)?;
            let r = lifts_isomorphic(&l1, &l2, pl.bound)?;
            let names = var_names("x", pl.n);
            let result = json!({
                "lift1": l1.to_strings(),
                "lift2": l2.to_strings(),
                "isomorphic": r.isomorphic(),
                "witness": r.witness.as_ref().map(|w| signed_mats(std::slice::from_ref(w), &names)[0].clone()),
                "bound": r.bound,
                "bound_sufficient": r.bound_sufficient,
            });
            Ok((result, vec![]))
        }
    }
}

/// Where the pair-reduction budget came from.
fn resolve_budget(spec: &ProblemSpec, override_budget: Option<u64>) -> (Budget, &'static str) {
    if let Some(b) = override_budget {
        return (Budget::new(b), "flag");
    }
    if let Some(b) = spec.budgets.pair_reductions {
        return (Budget::new(b), "problem");
    }
    if std::env::var("WEYL_BUDGET").is_ok() {
        return (Budget::from_env(), "environment");
    }
    (Budget::default(), "default")
}

pub struct Certificate {
    pub json: Value,
    pub exit_code: i32,
}

pub fn execute(spec: &ProblemSpec, override_budget: Option<u64>, timing: bool) -> Certificate {
    let start = std::time::Instant::now();
    let (budget, source) = resolve_budget(spec, override_budget);
    let runs: Vec<PrimeRun> = spec.primes.par_iter().map(|&p| run_prime(spec, p, &budget)).collect();

    let mut exit_code = 0;
    let mut total = 0;
    let mut failed = 0;
    let mut results = Vec::new();
    for run in &runs {
        let mut entry = Map::new();
        entry.insert("prime".into(), json!(run.prime));
        match &run.outcome {
            Ok((value, asserts)) => {
                total += asserts.len();
                let bad = asserts.iter().filter(|a| !a.pass).count();
                failed += bad;
                if bad > 0 && exit_code == 0 {
                    exit_code = 1;
                }
                entry.insert("status".into(), json!("ok"));
                entry.insert("result".into(), value.clone());
                entry.insert(
                    "assertions".into(),
                    json!(asserts.iter().map(|a| json!({"name": a.name, "pass": a.pass})).collect::<Vec<_>>()),
                );
            }
            Err(e) => {
                if exit_code == 0 {
                    exit_code = exit_code_of(e);
                }
                entry.insert("status".into(), json!("error"));
                entry.insert("error".into(), json!({"kind": error_kind(e), "message": e.to_string()}));
            }
        }
        results.push(Value::Object(entry));
    }

    let mut cert = Map::new();
    cert.insert("command".into(), json!(spec.command.name()));
    cert.insert("primes".into(), json!(spec.primes));
    cert.insert("payload".into(), spec.raw_payload.clone());
    cert.insert("budgets".into(), json!({"pair_reductions": budget.pair_reductions, "source": source}));
    cert.insert("seed".into(), json!(spec.seed));
    cert.insert("results".into(), Value::Array(results));
    if matches!(spec.payload, Payload::Pcycle(_)) && spec.primes.len() > 1 {
        let keys: Vec<_> = runs.iter().map(|r| r.cycle_key.as_ref()).collect();
        let constant = keys.iter().all(|k| k.is_some()) && keys.windows(2).all(|w| w[0] == w[1]);
        cert.insert("cross_prime".into(), json!({ "constant": constant }));
    }
    cert.insert("assertions".into(), json!({"total": total, "failed": failed}));
    cert.insert("exit_code".into(), json!(exit_code));
    if timing {
        cert.insert("wall_time_ms".into(), json!(start.elapsed().as_millis() as u64));
    }
    Certificate {
        json: Value::Object(cert),
        exit_code,
    }
}
