//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime
//! against the allowed limit. Exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use dmodp::algebra::parse::parse_poly_in;
use dmodp::algebra::{center_names, var_names, Field, Monomial, MonomialOrder, MultiPoly, PrimeField, Rationals, Ring};
use dmodp::connection::{
    derham_cohomology, exponential_module, p_curvature, p_curvature_lambda, Connection, LambdaConnection, PMat,
};
use dmodp::dixmier::{all_words, verify_frobenius_twist, Generator};
use dmodp::functors::{cycle_pushforward, finite_pushforward_curve, FiniteCurveMap};
use dmodp::groebner::{buchberger, ideal_equal, Budget, Ideal};
use dmodp::lifting::{lifts_isomorphic, obstruction_class, LiftedConnection, Obstruction};
use dmodp::psupport::{cyclic_annihilator, cyclic_connection, p_cycle, p_cycle_of_connection, PCycle};
use dmodp::weyl::{parse_weyl_mod_p, WeylElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fp(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

fn poly(p: u64, text: &str, names: &[String]) -> MultiPoly<PrimeField> {
    let f = fp(p);
    parse_poly_in(text, names, f, &|q| f.from_rational(q)).unwrap()
}

fn x(p: u64, text: &str) -> MultiPoly<PrimeField> {
    poly(p, text, &var_names("x", 1))
}

fn center(p: u64, text: &str) -> MultiPoly<PrimeField> {
    poly(p, text, &center_names(1))
}

fn same_ideal(a: &[MultiPoly<PrimeField>], b: &[MultiPoly<PrimeField>]) -> bool {
    let f = *a[0].ring();
    let n = a[0].nvars();
    let ia = Ideal::new(f, n, a.to_vec()).unwrap();
    let ib = Ideal::new(f, n, b.to_vec()).unwrap();
    ideal_equal(&ia, &ib, &Budget::default()).unwrap()
}

/// Coefficients in `(-p/2, p/2]`, comparable across primes.
fn signed(f: &MultiPoly<PrimeField>, names: &[String]) -> String {
    let p = f.ring().p();
    f.map_coeffs(Rationals, |c| Rationals.from_i64(if *c > p / 2 { *c as i64 - p as i64 } else { *c as i64 }))
        .to_string_with(names)
}

fn cycle_key(c: &PCycle) -> Vec<(Vec<String>, String)> {
    let names = center_names(c.n);
    let mut v: Vec<_> = c
        .components
        .iter()
        .map(|k| (k.basis.basis().iter().map(|g| signed(g, &names)).collect(), k.multiplicity.to_string()))
        .collect();
    v.sort();
    v
}

/// The cycle is exactly `[(gen), m]`.
fn single(c: &PCycle, gen: &MultiPoly<PrimeField>, m: &str) -> bool {
    c.components.len() == 1 && same_ideal(c.components[0].basis.basis(), std::slice::from_ref(gen)) && c.components[0].multiplicity.to_string() == m
}

fn random_poly(rng: &mut ChaCha8Rng, field: PrimeField, n: usize, terms: usize, max_exp: u16) -> MultiPoly<PrimeField> {
    let p = field.p();
    MultiPoly::from_terms(
        field,
        n,
        (0..terms).map(|_| {
            let e: Vec<u16> = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
            (Monomial::from_exps(&e), rng.gen_range(1..p))
        }),
    )
}

fn mat_mul(a: &PMat<PrimeField>, b: &PMat<PrimeField>) -> PMat<PrimeField> {
    let r = a.len();
    let z = MultiPoly::zero(*a[0][0].ring(), a[0][0].nvars());
    (0..r)
        .map(|i| (0..r).map(|j| (0..r).fold(z.clone(), |acc, k| &acc + &(&a[i][k] * &b[k][j]))).collect())
        .collect()
}

fn criterion_1() -> Outcome {
    let mut keys = Vec::new();
    let mut slowest = Duration::ZERO;
    for p in [5, 7, 11, 13] {
        let t = Instant::now();
        let c = p_cycle_of_connection(&exponential_module(&x(p, "x1^3/3")).unwrap(), &Budget::default()).unwrap();
        slowest = slowest.max(t.elapsed());
        if !single(&c, &center(p, "s1 - X1^2"), "1") {
            return Err(format!("p = {p}: got {:?}", c.entries()));
        }
        keys.push(cycle_key(&c));
    }
    if !keys.windows(2).all(|w| w[0] == w[1]) {
        return Err("cross-prime constancy is false".into());
    }
    if slowest >= Duration::from_secs(1) {
        return Err(format!("slowest prime took {slowest:?}"));
    }
    Ok(format!("[(s1 - X1^2), 1] at p = 5, 7, 11, 13; constant; slowest prime {slowest:.2?}"))
}

fn criterion_2() -> Outcome {
    let b = Budget::default();
    for p in [5, 7, 11] {
        let l = parse_weyl_mod_p("d1^2 - x1", fp(p), 1).unwrap();
        let ann = cyclic_annihilator(&l, &b).unwrap();
        if !same_ideal(ann.basis.basis(), &[center(p, "s1^2 - X1")]) {
            return Err(format!("p = {p}: annihilator {:?}", ann.to_strings()));
        }
        if !single(&p_cycle(&l, &b).unwrap(), &center(p, "s1^2 - X1"), "1") {
            return Err(format!("p = {p}: multiplicity is not 1"));
        }
    }
    let l = parse_weyl_mod_p("d1^2 - x1", fp(5), 1).unwrap();
    let psi = p_curvature(&cyclic_connection(&l).unwrap()).unwrap().polynomial_psi().unwrap();
    let expected = vec![vec![x(5, "4*x1"), x(5, "x1^3 + 4")], vec![x(5, "x1^2"), x(5, "x1")]];
    if psi[0] != expected {
        return Err(format!("Ψ at p = 5 is {:?}", psi[0]));
    }
    let sq = mat_mul(&psi[0], &psi[0]);
    let x5 = x(5, "x1^5");
    let zero = x(5, "0");
    if sq != vec![vec![x5.clone(), zero.clone()], vec![zero, x5]] {
        return Err("Ψ² is not x^5·Id".into());
    }
    let l3 = parse_weyl_mod_p("d1^2 - x1", fp(3), 1).unwrap();
    let ann3 = cyclic_annihilator(&l3, &b).unwrap();
    if !same_ideal(ann3.basis.basis(), &[center(3, "s1^2 - X1 - 1")]) {
        return Err(format!("p = 3 regression: {:?}", ann3.to_strings()));
    }
    Ok("(s1^2 - X1) with multiplicity 1 at p = 5, 7, 11; Ψ and Ψ² match; p = 3 gives (s1^2 - X1 - 1)".into())
}

fn criterion_3() -> Outcome {
    let f = fp(5);
    let b = Budget::default();
    let airy = parse_weyl_mod_p("d1^2 - x1", f, 1).unwrap();
    if airy.fourier().unwrap() != parse_weyl_mod_p("x1^2 - d1", f, 1).unwrap() {
        return Err(format!("fourier gives {}", airy.fourier().unwrap().to_string_named()));
    }
    let airy_cycle = p_cycle(&airy, &b).unwrap();
    let other = p_cycle(&parse_weyl_mod_p("d1 - x1^2", f, 1).unwrap(), &b).unwrap();
    // (X, s) ↦ (s, -X)
    let images = [center(5, "s1"), center(5, "-X1")];
    let rotated: Vec<_> = airy_cycle.annihilator.iter().map(|g| g.substitute(&images).unwrap()).collect();
    if !same_ideal(&rotated, &other.annihilator) {
        return Err(format!("rotated {:?} vs {:?}", rotated, other.annihilator_strings()));
    }
    if airy_cycle.components.len() != other.components.len()
        || airy_cycle.components[0].multiplicity != other.components[0].multiplicity
    {
        return Err("multiplicities differ".into());
    }
    Ok("fourier(d1^2 - x1) = x1^2 - d1; rotated Airy support equals support of D/D(d1 - x1^2)".into())
}

fn criterion_4() -> Outcome {
    let b = Budget::default();
    let mut checked = 0;
    for p in [5, 7] {
        let f = fp(p);
        let map = FiniteCurveMap::new(x(p, "x1^2")).unwrap();
        let sources = [
            ("trivial", Connection::trivial(f, 1, 1)),
            ("e^z", exponential_module(&x(p, "x1")).unwrap()),
            ("e^{z^3}", exponential_module(&x(p, "x1^3")).unwrap()),
        ];
        for (name, src) in sources {
            let direct = p_cycle_of_connection(&finite_pushforward_curve(&src, &map).unwrap(), &b).unwrap();
            let pushed = cycle_pushforward(&p_cycle_of_connection(&src, &b).unwrap(), &map, &b).unwrap();
            if cycle_key(&direct) != cycle_key(&pushed) {
                return Err(format!("p = {p}, {name}: {:?} vs {:?}", direct.entries(), pushed.entries()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (prime, source) pairs agree in ideals and multiplicities"))
}

fn criterion_5() -> Outcome {
    let b = Budget::default();
    for p in [5, 7] {
        let triv = p_cycle_of_connection(&Connection::trivial(fp(p), 1, 1), &b).unwrap();
        if !single(&triv, &center(p, "s1"), "1") {
            return Err(format!("p = {p}: trivial gives {:?}", triv.entries()));
        }
        let dd = p_cycle(&parse_weyl_mod_p("d1^2", fp(p), 1).unwrap(), &b).unwrap();
        if !single(&dd, &center(p, "s1"), "2") {
            return Err(format!("p = {p}: D/D·d1^2 gives {:?}", dd.entries()));
        }
    }
    Ok("[(s1), 1] and [(s1), 2] at p = 5, 7".into())
}

fn criterion_6() -> Outcome {
    let names = vec!["x1".to_string(), "lambda".to_string()];
    let lc = LambdaConnection::new(1, vec![vec![vec![poly(5, "x1^4", &names)]]]).unwrap();
    let psi = p_curvature_lambda(&lc).unwrap();
    if psi[0][0][0] != poly(5, "x1^20 + 4*lambda^4", &names) {
        return Err(format!("got {}", psi[0][0][0].to_string_with(&names)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a4bda);
    for case in 0..20 {
        let p = [5, 7][case % 2];
        let f = fp(p);
        let r = 1 + case % 2;
        let theta: PMat<PrimeField> = (0..r)
            .map(|_| (0..r).map(|_| random_poly(&mut rng, f, 2, 2, 3).remap_vars(2, &[0, 0])).collect())
            .collect();
        let theta: PMat<PrimeField> = theta
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(&[MultiPoly::var(f, 2, 0), MultiPoly::zero(f, 2)]).unwrap()).collect())
            .collect();
        let lc = LambdaConnection::new(1, vec![theta.clone()]).unwrap();
        let at_zero: PMat<PrimeField> = p_curvature_lambda(&lc).unwrap()[0]
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(&[MultiPoly::var(f, 2, 0), MultiPoly::zero(f, 2)]).unwrap()).collect())
            .collect();
        let mut power = theta.clone();
        for _ in 1..p {
            power = mat_mul(&power, &theta);
        }
        if at_zero != power {
            return Err(format!("instance {case} (p = {p}, rank {r}): λ = 0 differs from Θ^p"));
        }
    }
    Ok("x1^20 + 4*lambda^4 at p = 5; λ = 0 equals Θ^p on 20 random instances".into())
}

fn criterion_7() -> Outcome {
    let mut gens = vec![Generator::rotation()];
    for d in 0..=4 {
        gens.push(Generator::shear(&format!("x^{d}")));
    }
    let words = all_words(&gens, 3);
    let mut report = Vec::new();
    let mut all = true;
    for p in [5, 7] {
        let mut held = 0;
        let mut corrected = 0;
        for w in &words {
            let cert = verify_frobenius_twist(w, fp(p)).unwrap();
            held += cert.holds as usize;
            corrected += cert.holds_corrected as usize;
        }
        all &= held == words.len();
        report.push(format!("p = {p}: {held}/{} hold ({corrected} with the derivative correction)", words.len()));
    }
    if all {
        Ok(report.join("; "))
    } else {
        Err(report.join("; "))
    }
}

fn criterion_8() -> Outcome {
    let f = fp(5);
    let one = |s: &str| vec![vec![vec![x(5, s)]]];
    let triv = LiftedConnection::lift(&Connection::trivial(f, 1, 1)).unwrap();
    let r = lifts_isomorphic(&triv, &triv.perturb(&one("1")).unwrap(), 10).unwrap();
    if r.witness != Some(vec![vec![x(5, "x1")]]) {
        return Err(format!("witness for p·dx is {:?}", r.witness));
    }
    let r = lifts_isomorphic(&triv, &triv.perturb(&one("x1^4")).unwrap(), 50).unwrap();
    if r.isomorphic() {
        return Err("p·x^4 dx reported isomorphic".into());
    }
    let names = var_names("x", 2);
    let theta = vec![vec![vec![poly(5, "x1^4*x2^5", &names)]], vec![vec![poly(5, "0", &names)]]];
    match obstruction_class(&Connection::polynomial(2, theta).unwrap(), None).unwrap() {
        Obstruction::Obstructed(cls) if cls.representative == vec![vec![poly(5, "-x1^4*x2^4", &names)]] => {}
        other => return Err(format!("x^4 y^5 dx gives {other:?}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xdf);
    for i in 0..10 {
        let g = random_poly(&mut rng, f, 2, 4, 9);
        if !matches!(obstruction_class(&exponential_module(&g).unwrap(), None).unwrap(), Obstruction::Liftable { .. }) {
            return Err(format!("d f not liftable for random f #{i}"));
        }
    }
    Ok("η = x; x^4 dx non-isomorphic at bound 50; -x^4 y^4 dx∧dy; 10 random d f liftable".into())
}

fn criterion_9() -> Outcome {
    let f = fp(5);
    let ex = exponential_module(&x(5, "x1")).unwrap();
    for bound in [10, 20, 40] {
        let h = derham_cohomology(&ex, bound).unwrap();
        if h.groups.iter().any(|g| g.dimension != 0) || !h.stable {
            return Err(format!("e^x at bound {bound}: {:?}", h.groups.iter().map(|g| g.dimension).collect::<Vec<_>>()));
        }
    }
    let triv = Connection::trivial(f, 1, 1);
    for d in 1..=40u32 {
        let h = derham_cohomology(&triv, d).unwrap();
        if h.groups[0].dimension != (d / 5 + 1) as usize {
            return Err(format!("trivial at bound {d}: H^0 has dimension {}", h.groups[0].dimension));
        }
    }
    Ok("e^x: zero at bounds 10, 20, 40 (stable); trivial: dim H^0 = floor(d/5) + 1 for d = 1..40".into())
}

/// `S(f, g)` with monic leading terms under `order`.
fn s_poly(f: &MultiPoly<PrimeField>, g: &MultiPoly<PrimeField>, order: MonomialOrder) -> MultiPoly<PrimeField> {
    let field = *f.ring();
    let (mf, cf) = f.leading_term(order).unwrap();
    let (mg, cg) = g.leading_term(order).unwrap();
    let l = mf.lcm(mg);
    let a = f.mul_term(&mf.quotient_of(&l), &field.inv(cf).unwrap()).unwrap();
    let b = g.mul_term(&mg.quotient_of(&l), &field.inv(cg).unwrap()).unwrap();
    &a - &b
}

fn criterion_10() -> Outcome {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let primes = [5u64, 7, 11, 13];

    let mut gb_cases = 0;
    for i in 0..100 {
        let f = fp(primes[i % 4]);
        let n = 2 + i % 2;
        let gens: Vec<_> = (0..2 + i % 2).map(|_| random_poly(&mut rng, f, n, 3, 2)).collect();
        let ideal = Ideal::new(f, n, gens.clone()).unwrap();
        let order = [MonomialOrder::GrevLex, MonomialOrder::Lex][i % 2];
        let gb = buchberger(&ideal, order, &budget).map_err(|e| format!("GB instance {i}: {e}"))?;
        let basis = gb.basis();
        for a in 0..basis.len() {
            for b in a + 1..basis.len() {
                if !gb.normal_form(&s_poly(&basis[a], &basis[b], order)).is_zero() {
                    return Err(format!("GB instance {i}: S-pair ({a}, {b}) does not reduce to 0"));
                }
            }
        }
        if gens.iter().any(|g| !gb.normal_form(g).is_zero()) {
            return Err(format!("GB instance {i}: a generator is not in the basis ideal"));
        }
        gb_cases += 1;
    }

    let mut weyl_cases = 0;
    for i in 0..100 {
        let f = fp(primes[i % 4]);
        let n = 1 + i % 2;
        let el = |rng: &mut ChaCha8Rng| WeylElement::from_normal(n, random_poly(rng, f, 2 * n, 3, 3));
        let (a, b, c) = (el(&mut rng), el(&mut rng), el(&mut rng));
        if a.mul(&b).unwrap().mul(&c).unwrap() != a.mul(&b.mul(&c).unwrap()).unwrap() {
            return Err(format!("Weyl instance {i}: (ab)c != a(bc)"));
        }
        for k in 0..n {
            let d = WeylElement::d(f, n, k);
            let expected = WeylElement::from_normal(n, a.as_poly().diff(k).unwrap());
            if d.commutator(&a).unwrap() != expected {
                return Err(format!("Weyl instance {i}: [d{}, a] != da/dx{}", k + 1, k + 1));
            }
            for j in 0..n {
                let xj = WeylElement::x(f, n, j);
                let want = if j == k { WeylElement::one(f, n) } else { WeylElement::zero(f, n) };
                if d.commutator(&xj).unwrap() != want {
                    return Err(format!("Weyl instance {i}: [d{}, x{}] is wrong", k + 1, j + 1));
                }
            }
        }
        weyl_cases += 1;
    }

    let mut pc_cases = 0;
    for i in 0..100 {
        let p = primes[i % 2];
        let f = fp(p);
        let c = if i % 4 < 2 {
            let r = 1 + i % 2;
            let theta = (0..r).map(|_| (0..r).map(|_| random_poly(&mut rng, f, 1, 2, 3)).collect()).collect();
            Connection::polynomial(1, vec![theta]).unwrap()
        } else {
            // gauge transform of a sum of two plane exponentials
            let e1 = exponential_module(&random_poly(&mut rng, f, 2, 2, 2)).unwrap();
            let e2 = exponential_module(&random_poly(&mut rng, f, 2, 2, 2)).unwrap();
            let h = random_poly(&mut rng, f, 2, 2, 2);
            let one = MultiPoly::one(f, 2);
            let zero = MultiPoly::zero(f, 2);
            let g = vec![vec![one.clone(), h.clone()], vec![zero.clone(), one.clone()]];
            let g_inv = vec![vec![one.clone(), -&h], vec![zero, one]];
            e1.direct_sum(&e2).unwrap().gauge(&g, &g_inv).unwrap()
        };
        let n = c.nvars();
        let psi = p_curvature(&c).unwrap().polynomial_psi().unwrap();
        let func = random_poly(&mut rng, f, n, 3, 3);
        let den = MultiPoly::one(f, n);
        for (k, psi_k) in psi.iter().enumerate() {
            for j in 0..c.rank() {
                let mut v: Vec<_> = (0..c.rank())
                    .map(|a| {
                        let e = if a == j { func.clone() } else { MultiPoly::zero(f, n) };
                        dmodp::algebra::LocalizedPoly::from_poly(e, &den)
                    })
                    .collect();
                for _ in 0..p {
                    v = c.apply(k, &v).unwrap();
                }
                for a in 0..c.rank() {
                    if v[a].as_poly() != Some(&(&func * &psi_k[a][j])) {
                        return Err(format!("p-curvature instance {i}: not O-linear"));
                    }
                }
            }
        }
        if n == 2 && mat_mul(&psi[0], &psi[1]) != mat_mul(&psi[1], &psi[0]) {
            return Err(format!("p-curvature instance {i}: Ψ_1 and Ψ_2 do not commute"));
        }
        pc_cases += 1;
    }

    let mut mass_cases = 0;
    for i in 0..100 {
        let p = primes[i % 2];
        let f = fp(p);
        let c = match i % 3 {
            0 => exponential_module(&random_poly(&mut rng, f, 1 + i % 2, 2, 3)).unwrap(),
            1 => {
                let a = exponential_module(&random_poly(&mut rng, f, 1, 2, 3)).unwrap();
                let b = exponential_module(&random_poly(&mut rng, f, 1, 2, 3)).unwrap();
                a.direct_sum(&b).unwrap()
            }
            _ => {
                let a = random_poly(&mut rng, f, 1, 2, 2);
                let b = random_poly(&mut rng, f, 1, 2, 2);
                let names = var_names("x", 1);
                let text = format!("d1^2 + ({})*d1 + ({})", signed(&a, &names), signed(&b, &names));
                cyclic_connection(&parse_weyl_mod_p(&text, f, 1).unwrap()).unwrap()
            }
        };
        let cycle = p_cycle_of_connection(&c, &budget).map_err(|e| format!("mass instance {i}: {e}"))?;
        if cycle.mass() != num_rational::Rational64::from_integer(c.rank() as i64) {
            return Err(format!("mass instance {i}: mass {} for rank {}", cycle.mass(), c.rank()));
        }
        mass_cases += 1;
    }
    Ok(format!(
        "GB {gb_cases}, Weyl {weyl_cases}, p-curvature {pc_cases}, mass formula {mass_cases} instances, no failures"
    ))
}

struct Criterion {
    number: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { number: 1, name: "exponential-module support", limit: Duration::from_secs(4), run: criterion_1 },
        Criterion { number: 2, name: "Airy annihilator", limit: Duration::from_secs(2), run: criterion_2 },
        Criterion { number: 3, name: "Fourier coherence", limit: Duration::from_secs(2), run: criterion_3 },
        Criterion { number: 4, name: "cycle-pushforward compatibility", limit: Duration::from_secs(10), run: criterion_4 },
        Criterion { number: 5, name: "normalization", limit: Duration::from_secs(1), run: criterion_5 },
        Criterion { number: 6, name: "lambda-curvature", limit: Duration::from_secs(5), run: criterion_6 },
        Criterion { number: 7, name: "Frobenius-twist identity", limit: Duration::from_secs(60), run: criterion_7 },
        Criterion { number: 8, name: "lifting torsor", limit: Duration::from_secs(10), run: criterion_8 },
        Criterion { number: 9, name: "de Rham desk check", limit: Duration::from_secs(5), run: criterion_9 },
        Criterion { number: 10, name: "property suites", limit: Duration::from_secs(120), run: criterion_10 },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed >= c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {:>2} ({}) [{elapsed:.2?} / {:?}]: {detail}", c.number, c.name, c.limit);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
