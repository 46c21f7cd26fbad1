//! Words in the Dixmier generators of `Aut(A_1)`: polynomial
//! symplectomorphisms of the plane, the matching Weyl algebra
//! automorphisms, and their action on the center.
//!
//! A word applies its generators left to right.

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::parse::{parse_expr, parse_poly_in};
use crate::algebra::{center_names, Field, MonomialOrder, MultiPoly, PrimeField, Rationals};
use crate::error::{Error, Result};
use crate::groebner::{buchberger, eliminate, ideal_equal, Budget, GroebnerBasis, Ideal};
use crate::psupport::p_cycle;
use crate::weyl::WeylElement;

/// A matrix entry: an integer or a rational written as a string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    pub fn value(&self) -> Result<BigRational> {
        match self {
            Entry::Int(v) => Ok(BigRational::from_integer((*v).into())),
            Entry::Text(s) => parse_expr(s)?
                .as_constant()
                .ok_or_else(|| Error::Parse {
                    column: 0,
                    message: format!("matrix entry {s:?} is not a number"),
                }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// `(x, y) ↦ (ax + by, cx + dy)`.
    Sl2 { m: [[Entry; 2]; 2] },
    /// `(x, y) ↦ (x, y + f(x))`.
    Shear { f: String },
}

impl Generator {
    pub fn rotation() -> Self {
        Generator::Sl2 {
            m: [[Entry::Int(0), Entry::Int(1)], [Entry::Int(-1), Entry::Int(0)]],
        }
    }

    pub fn shear(f: &str) -> Self {
        Generator::Shear { f: f.to_string() }
    }

    fn matrix(&self) -> Result<Option<[[BigRational; 2]; 2]>> {
        let Generator::Sl2 { m } = self else { return Ok(None) };
        let v = [[m[0][0].value()?, m[0][1].value()?], [m[1][0].value()?, m[1][1].value()?]];
        if &v[0][0] * &v[1][1] - &v[0][1] * &v[1][0] != BigRational::one() {
            return Err(Error::Invalid("SL2 generator must have determinant 1".into()));
        }
        Ok(Some(v))
    }

    fn shear_poly<F: Field>(&self, field: &F, coeff: &dyn Fn(&BigRational) -> Result<F::Elem>) -> Result<Option<MultiPoly<F>>> {
        let Generator::Shear { f } = self else { return Ok(None) };
        match parse_poly_in(f, &["x1".to_string()], field.clone(), coeff) {
            Err(e @ Error::Parse { .. }) => parse_poly_in(f, &["x".to_string()], field.clone(), coeff)
                .map(Some)
                .map_err(|_| e),
            r => r.map(Some),
        }
    }
}

pub type AutWord = Vec<Generator>;

/// `(x, y) ↦ (P(x, y), Q(x, y))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap2<F: Field> {
    pub p: MultiPoly<F>,
    pub q: MultiPoly<F>,
}

impl<F: Field> PolyMap2<F> {
    pub fn identity(field: F) -> Self {
        PolyMap2 {
            p: MultiPoly::var(field.clone(), 2, 0),
            q: MultiPoly::var(field, 2, 1),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        let im = [first.p.clone(), first.q.clone()];
        Ok(PolyMap2 {
            p: self.p.substitute(&im)?,
            q: self.q.substitute(&im)?,
        })
    }

    pub fn jacobian(&self) -> Result<MultiPoly<F>> {
        Ok(&(&self.p.diff(0)? * &self.q.diff(1)?) - &(&self.p.diff(1)? * &self.q.diff(0)?))
    }

    pub fn to_strings(&self, names: &[String]) -> [String; 2] {
        [self.p.to_string_with(names), self.q.to_string_with(names)]
    }
}

fn generator_map<F: Field>(g: &Generator, field: &F, coeff: &dyn Fn(&BigRational) -> Result<F::Elem>) -> Result<PolyMap2<F>> {
    let x = MultiPoly::var(field.clone(), 2, 0);
    let y = MultiPoly::var(field.clone(), 2, 1);
    if let Some(m) = g.matrix()? {
        let c = |v: &BigRational| -> Result<MultiPoly<F>> { Ok(MultiPoly::constant(field.clone(), 2, coeff(v)?)) };
        return Ok(PolyMap2 {
            p: &(&c(&m[0][0])? * &x) + &(&c(&m[0][1])? * &y),
            q: &(&c(&m[1][0])? * &x) + &(&c(&m[1][1])? * &y),
        });
    }
    let f = g.shear_poly(field, coeff)?.unwrap();
    Ok(PolyMap2 {
        p: x,
        q: &y + &f.remap_vars(2, &[0]),
    })
}

/// Composite polynomial map of a word over any field the coefficients
/// reduce to. The Jacobian is checked to be 1.
pub fn word_to_polymap_in<F: Field>(
    w: &[Generator],
    field: F,
    coeff: &dyn Fn(&BigRational) -> Result<F::Elem>,
) -> Result<PolyMap2<F>> {
    let mut acc = PolyMap2::identity(field.clone());
    for g in w {
        acc = generator_map(g, &field, coeff)?.after(&acc)?;
    }
    let j = acc.jacobian()?;
    if j != MultiPoly::one(field, 2) {
        return Err(Error::RelationViolated(format!("Jacobian of the word is {j}, not 1")));
    }
    Ok(acc)
}

pub fn word_to_polymap(w: &[Generator]) -> Result<PolyMap2<Rationals>> {
    word_to_polymap_in(w, Rationals, &|q| Ok(q.clone()))
}

pub fn word_to_polymap_mod_p(w: &[Generator], field: PrimeField) -> Result<PolyMap2<PrimeField>> {
    word_to_polymap_in(w, field, &|q| field.from_rational(q))
}

/// Images `(A(x), A(∂))` of the Weyl automorphism of a word: SL2 sends
/// `x ↦ ax + b∂, ∂ ↦ cx + d∂`, a shear sends `∂ ↦ ∂ + f(x)`.
pub fn word_to_weyl_auto_in<F: Field>(
    w: &[Generator],
    field: F,
    coeff: &dyn Fn(&BigRational) -> Result<F::Elem>,
) -> Result<(WeylElement<F>, WeylElement<F>)> {
    let mut ax = WeylElement::x(field.clone(), 1, 0);
    let mut ad = WeylElement::d(field.clone(), 1, 0);
    for g in w {
        // the generator's own images, written in x and ∂, then evaluated
        // at the images accumulated so far
        let m = generator_map(g, &field, coeff)?;
        let gx = WeylElement::from_normal(1, m.p.clone());
        let gd = WeylElement::from_normal(1, m.q.clone());
        let nx = gx.substitute(&[ax.clone()], &[ad.clone()])?;
        let nd = gd.substitute(&[ax], &[ad])?;
        ax = nx;
        ad = nd;
    }
    let c = ad.commutator(&ax)?;
    if c != WeylElement::one(field, 1) {
        return Err(Error::RelationViolated(format!("[A(d1), A(x1)] = {c}, not 1")));
    }
    Ok((ax, ad))
}

pub fn word_to_weyl_auto(w: &[Generator]) -> Result<(WeylElement<Rationals>, WeylElement<Rationals>)> {
    word_to_weyl_auto_in(w, Rationals, &|q| Ok(q.clone()))
}

pub fn word_to_weyl_auto_mod_p(w: &[Generator], field: PrimeField) -> Result<(WeylElement<PrimeField>, WeylElement<PrimeField>)> {
    word_to_weyl_auto_in(w, field, &|q| field.from_rational(q))
}

/// `(A(x)^p, A(∂)^p)` read in the center coordinates `(X, s)`.
pub fn center_action(images: &(WeylElement<PrimeField>, WeylElement<PrimeField>)) -> Result<PolyMap2<PrimeField>> {
    let p = images.0.ring().p();
    let power = |a: &WeylElement<PrimeField>| -> Result<MultiPoly<PrimeField>> {
        let mut acc = a.clone();
        for _ in 1..p {
            acc = acc.mul(a)?;
        }
        acc.center_coordinates()
    };
    Ok(PolyMap2 {
        p: power(&images.0)?,
        q: power(&images.1)?,
    })
}

/// The shear `(x, y) ↦ (x, y + f(x) + h(x))` with `h(x^p) = f^{(p-1)}(x)`:
/// `(∂ + f)^p = ∂^p + f^p + f^{(p-1)}`, so this is the map a shear actually
/// induces on the center.
pub fn corrected_polymap(w: &[Generator], field: PrimeField) -> Result<PolyMap2<PrimeField>> {
    let coeff = |q: &BigRational| field.from_rational(q);
    let p = field.p();
    let mut acc = PolyMap2::identity(field);
    for g in w {
        let mut m = generator_map(g, &field, &coeff)?;
        if let Some(f) = g.shear_poly(&field, &coeff)? {
            let mut h = f;
            for _ in 1..p {
                h = h.diff(0)?;
            }
            let mut lowered = MultiPoly::zero(field, 2);
            for (mono, c) in h.terms() {
                let e = mono.exps()[0] as u64;
                debug_assert_eq!(e % p, 0);
                lowered.add_term(crate::algebra::Monomial::from_exps(&[(e / p) as u16, 0]), *c);
            }
            m.q = &m.q + &lowered;
        }
        acc = m.after(&acc)?;
    }
    Ok(acc)
}

/// Both sides of the Frobenius-twist identity for a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistCertificate {
    pub center: PolyMap2<PrimeField>,
    pub polymap: PolyMap2<PrimeField>,
    /// `center == polymap`.
    pub holds: bool,
    /// `center == corrected_polymap`.
    pub holds_corrected: bool,
}

pub fn verify_frobenius_twist(w: &[Generator], field: PrimeField) -> Result<TwistCertificate> {
    let center = center_action(&word_to_weyl_auto_mod_p(w, field)?)?;
    let polymap = word_to_polymap_mod_p(w, field)?;
    let holds = center == polymap;
    let holds_corrected = center == corrected_polymap(w, field)?;
    Ok(TwistCertificate {
        center,
        polymap,
        holds,
        holds_corrected,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedSupport {
    /// p-support of `D/D·A(∂)`.
    pub module: GroebnerBasis<PrimeField>,
    /// Image of the `x`-axis under the word's polynomial map, in `(X, s)`.
    pub polymap_image: GroebnerBasis<PrimeField>,
    /// The two ideals differ (they are related by `s ↦ -s` on graphs).
    pub differ: bool,
    pub via_fourier: bool,
}

impl TwistedSupport {
    pub fn module_strings(&self) -> Vec<String> {
        let names = center_names(1);
        self.module.basis().iter().map(|g| g.to_string_with(&names)).collect()
    }

    pub fn image_strings(&self) -> Vec<String> {
        let names = center_names(1);
        self.polymap_image.basis().iter().map(|g| g.to_string_with(&names)).collect()
    }
}

pub fn twisted_module_support(w: &[Generator], field: PrimeField, budget: &Budget) -> Result<TwistedSupport> {
    let (_, ad) = word_to_weyl_auto_mod_p(w, field)?;
    let cycle = p_cycle(&ad, budget)?;
    let module = buchberger(&Ideal::new(field, 2, cycle.annihilator.clone())?, MonomialOrder::GrevLex, budget)?;

    // eliminate t from (X - P(t, 0), s - Q(t, 0)) in (t, X, s)
    let map = word_to_polymap_mod_p(w, field)?;
    let t = MultiPoly::var(field, 3, 0);
    let zero = MultiPoly::zero(field, 3);
    let on_axis = |g: &MultiPoly<PrimeField>| g.substitute(&[t.clone(), zero.clone()]);
    let gens = vec![
        &MultiPoly::var(field, 3, 1) - &on_axis(&map.p)?,
        &MultiPoly::var(field, 3, 2) - &on_axis(&map.q)?,
    ];
    let image = eliminate(&Ideal::new(field, 3, gens)?, &[1, 2], budget)?.remap_vars(2, &[0, 0, 1]);
    let polymap_image = buchberger(&image, MonomialOrder::GrevLex, budget)?;
    let differ = !ideal_equal(&module.to_ideal(), &polymap_image.to_ideal(), budget)?;
    Ok(TwistedSupport {
        module,
        polymap_image,
        differ,
        via_fourier: cycle.via_fourier,
    })
}

/// All words of length `<= max_len` over `gens`, shortest first.
pub fn all_words(gens: &[Generator], max_len: usize) -> Vec<AutWord> {
    let mut out = vec![vec![]];
    let mut layer: Vec<AutWord> = vec![vec![]];
    for _ in 0..max_len {
        let next: Vec<AutWord> = layer
            .iter()
            .flat_map(|w| {
                gens.iter().map(move |g| {
                    let mut v = w.clone();
                    v.push(g.clone());
                    v
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
