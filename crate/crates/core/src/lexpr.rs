//! Object and morphism expressions over a generator category, denoting cells
//! of the free locally Cartesian closed structure, together with evaluation
//! into finite sets equipped with chosen structure.
//!
//! The free structure is never materialized as a category: only expressions
//! and their evaluations exist. Expression equality is syntactic; semantic
//! equality is only ever tested after evaluation in a given interpretation.
//! Tuple-like constructors carry no proof objects; their commuting
//! obligations are checked at evaluation time.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{shapes, FinCategory};
use crate::finset::{Choosers, FinSetMor, FinSetObj, SetCone, SetDiagram, SetError, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("ill-typed `{subterm}`: {reason}")]
    IllTyped { subterm: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("evaluation obligation failed: {0}")]
    Obligation(String),
}

/// A finite-limit assignment: a shape plus expressions for its cells.
/// Identity morphisms stay implicit; all other morphisms must be assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimSpec {
    pub shape: Arc<FinCategory>,
    pub objs: BTreeMap<String, ObjExpr>,
    pub mors: BTreeMap<String, MorExpr>,
}

/// Object expressions of the free structure over a generator category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjExpr {
    Gen(String),
    Terminal,
    /// apex of the chosen pullback of the cospan `(f, g)`
    Pullback(Box<MorExpr>, Box<MorExpr>),
    /// total object of the dependent product `f_* g`
    Pi(Box<MorExpr>, Box<MorExpr>),
    /// exponential `y^x`
    IHom(Box<ObjExpr>, Box<ObjExpr>),
    /// polynomial `P_f(x)`
    Poly(Box<MorExpr>, Box<ObjExpr>),
    /// apex of the chosen limit of a finite diagram of expressions
    Lim(LimSpec),
}

/// Morphism expressions of the free structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorExpr {
    Gen(String),
    Id(Box<ObjExpr>),
    /// `Comp(g, f)` is `g` after `f`
    Comp(Box<MorExpr>, Box<MorExpr>),
    /// the unique map to the terminal object
    Bang(Box<ObjExpr>),
    PbProj1(Box<MorExpr>, Box<MorExpr>),
    PbProj2(Box<MorExpr>, Box<MorExpr>),
    /// pairing into a pullback; the cospan equation is an evaluation-time
    /// obligation
    PbTuple {
        f: Box<MorExpr>,
        g: Box<MorExpr>,
        left: Box<MorExpr>,
        right: Box<MorExpr>,
    },
    /// transpose into the dependent product: `h : f^* p -> g` over `dom f`
    /// becomes `dom p -> Pi(f, g)`; `p` is read off the domain of `h`
    PiTranspose {
        f: Box<MorExpr>,
        g: Box<MorExpr>,
        h: Box<MorExpr>,
    },
    /// inverse transpose: `k : dom p -> Pi(f, g)` over `cod f` becomes
    /// `f^* p -> dom g`
    PiUntranspose {
        f: Box<MorExpr>,
        g: Box<MorExpr>,
        p: Box<MorExpr>,
        k: Box<MorExpr>,
    },
    LimLeg {
        lim: LimSpec,
        leg: String,
    },
    /// tuple into a limit; legs keyed by shape object, cone condition checked
    /// at evaluation
    LimTuple {
        lim: LimSpec,
        legs: BTreeMap<String, MorExpr>,
    },
    /// `IHom(cod h, y) -> IHom(dom h, y)`
    Precompose {
        h: Box<MorExpr>,
        y: Box<ObjExpr>,
    },
    /// `IHom(x, dom h) -> IHom(x, cod h)`
    Postcompose {
        h: Box<MorExpr>,
        x: Box<ObjExpr>,
    },
    /// action of `P_f` on `h`
    PolyMor {
        f: Box<MorExpr>,
        h: Box<MorExpr>,
    },
}

impl fmt::Display for ObjExpr {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjExpr::Gen(o) => write!(out, "gen({o})"),
            ObjExpr::Terminal => write!(out, "1"),
            ObjExpr::Pullback(f, g) => write!(out, "pb({f}; {g})"),
            ObjExpr::Pi(f, g) => write!(out, "pi({f}; {g})"),
            ObjExpr::IHom(x, y) => write!(out, "ihom({x}, {y})"),
            ObjExpr::Poly(f, x) => write!(out, "poly({f}; {x})"),
            ObjExpr::Lim(spec) => write!(out, "lim{}", DisplayLim(spec)),
        }
    }
}

struct DisplayLim<'a>(&'a LimSpec);

impl fmt::Display for DisplayLim<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{{[")?;
        let mut first = true;
        for (_, o) in self.0.shape.objects() {
            if !first {
                write!(out, "; ")?;
            }
            first = false;
            write!(out, "object {o}")?;
        }
        for (m, name) in self.0.shape.morphisms() {
            if self.0.shape.is_identity(m) {
                continue;
            }
            write!(
                out,
                "; arrow {name} : {} -> {}",
                self.0.shape.obj_name(self.0.shape.dom(m)),
                self.0.shape.obj_name(self.0.shape.cod(m))
            )?;
        }
        write!(out, "]: ")?;
        let mut first = true;
        for (k, v) in &self.0.objs {
            if !first {
                write!(out, ", ")?;
            }
            first = false;
            write!(out, "{k} -> {v}")?;
        }
        for (k, v) in &self.0.mors {
            if !first {
                write!(out, ", ")?;
            }
            first = false;
            write!(out, "{k} -> {v}")?;
        }
        write!(out, "}}")
    }
}

impl fmt::Display for MorExpr {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorExpr::Gen(m) => write!(out, "gen({m})"),
            MorExpr::Id(x) => write!(out, "id({x})"),
            MorExpr::Comp(g, f) => write!(out, "({g} . {f})"),
            MorExpr::Bang(x) => write!(out, "bang({x})"),
            MorExpr::PbProj1(f, g) => write!(out, "p1({f}; {g})"),
            MorExpr::PbProj2(f, g) => write!(out, "p2({f}; {g})"),
            MorExpr::PbTuple { f, g, left, right } => {
                write!(out, "tuple({f}; {g}; {left}; {right})")
            }
            MorExpr::PiTranspose { f, g, h } => write!(out, "lam({f}; {g}; {h})"),
            MorExpr::PiUntranspose { f, g, p, k } => write!(out, "unlam({f}; {g}; {p}; {k})"),
            MorExpr::LimLeg { lim, leg } => write!(out, "leg(lim{}; {leg})", DisplayLim(lim)),
            MorExpr::LimTuple { lim, legs } => {
                write!(out, "ltuple(lim{}; ", DisplayLim(lim))?;
                let mut first = true;
                for (k, v) in legs {
                    if !first {
                        write!(out, ", ")?;
                    }
                    first = false;
                    write!(out, "{k} -> {v}")?;
                }
                write!(out, ")")
            }
            MorExpr::Precompose { h, y } => write!(out, "pre({h}; {y})"),
            MorExpr::Postcompose { h, x } => write!(out, "post({h}; {x})"),
            MorExpr::PolyMor { f, h } => write!(out, "polym({f}; {h})"),
        }
    }
}

fn ill<T>(subterm: &dyn fmt::Display, reason: &str) -> Result<T, ExprError> {
    Err(ExprError::IllTyped {
        subterm: subterm.to_string(),
        reason: reason.to_string(),
    })
}

/// Checks an object expression over the generator category `c`.
pub fn validate_obj(c: &FinCategory, e: &ObjExpr) -> Result<(), ExprError> {
    match e {
        ObjExpr::Gen(o) => {
            if c.obj_ix(o).is_none() {
                return Err(ExprError::UnknownGenerator(o.clone()));
            }
            Ok(())
        }
        ObjExpr::Terminal => Ok(()),
        ObjExpr::Pullback(f, g) => {
            let (_, fc) = infer_boundary(c, f)?;
            let (_, gc) = infer_boundary(c, g)?;
            if fc != gc {
                return ill(e, "pullback arguments do not form a cospan");
            }
            Ok(())
        }
        ObjExpr::Pi(f, g) => {
            let (fd, _) = infer_boundary(c, f)?;
            let (_, gc) = infer_boundary(c, g)?;
            if gc != fd {
                return ill(e, "need g : Z -> X and f : X -> Y");
            }
            Ok(())
        }
        ObjExpr::IHom(x, y) => {
            validate_obj(c, x)?;
            validate_obj(c, y)
        }
        ObjExpr::Poly(f, x) => {
            infer_boundary(c, f)?;
            validate_obj(c, x)
        }
        ObjExpr::Lim(spec) => validate_lim(c, spec),
    }
}

fn validate_lim(c: &FinCategory, spec: &LimSpec) -> Result<(), ExprError> {
    for (_, name) in spec.shape.objects() {
        let Some(o) = spec.objs.get(name) else {
            return Err(ExprError::IllTyped {
                subterm: format!("lim{}", DisplayLim(spec)),
                reason: format!("no assignment for shape object `{name}`"),
            });
        };
        validate_obj(c, o)?;
    }
    for (k, _) in &spec.objs {
        if spec.shape.obj_ix(k).is_none() {
            return Err(ExprError::IllTyped {
                subterm: format!("lim{}", DisplayLim(spec)),
                reason: format!("`{k}` is not a shape object"),
            });
        }
    }
    for (m, name) in spec.shape.morphisms() {
        if spec.shape.is_identity(m) {
            continue;
        }
        let Some(e) = spec.mors.get(name) else {
            return Err(ExprError::IllTyped {
                subterm: format!("lim{}", DisplayLim(spec)),
                reason: format!("no assignment for shape morphism `{name}`"),
            });
        };
        let (d, cd) = infer_boundary(c, e)?;
        let want_d = &spec.objs[spec.shape.obj_name(spec.shape.dom(m))];
        let want_c = &spec.objs[spec.shape.obj_name(spec.shape.cod(m))];
        if &d != want_d || &cd != want_c {
            return Err(ExprError::IllTyped {
                subterm: e.to_string(),
                reason: format!("assignment for `{name}` has the wrong boundary"),
            });
        }
    }
    for (k, _) in &spec.mors {
        match spec.shape.mor_ix(k) {
            None => {
                return Err(ExprError::IllTyped {
                    subterm: format!("lim{}", DisplayLim(spec)),
                    reason: format!("`{k}` is not a shape morphism"),
                })
            }
            Some(m) if spec.shape.is_identity(m) => {
                return Err(ExprError::IllTyped {
                    subterm: format!("lim{}", DisplayLim(spec)),
                    reason: format!("identity `{k}` must stay implicit"),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Computes the (dom, cod) object expressions of a morphism expression, or
/// rejects ill-typed terms. Sub-expressions are validated recursively.
pub fn infer_boundary(c: &FinCategory, e: &MorExpr) -> Result<(ObjExpr, ObjExpr), ExprError> {
    match e {
        MorExpr::Gen(m) => {
            let Some(i) = c.mor_ix(m) else {
                return Err(ExprError::UnknownGenerator(m.clone()));
            };
            Ok((
                ObjExpr::Gen(c.obj_name(c.dom(i)).to_string()),
                ObjExpr::Gen(c.obj_name(c.cod(i)).to_string()),
            ))
        }
        MorExpr::Id(x) => {
            validate_obj(c, x)?;
            Ok(((**x).clone(), (**x).clone()))
        }
        MorExpr::Comp(g, f) => {
            let (fd, fc) = infer_boundary(c, f)?;
            let (gd, gc) = infer_boundary(c, g)?;
            if fc != gd {
                return ill(e, "composition boundary mismatch");
            }
            Ok((fd, gc))
        }
        MorExpr::Bang(x) => {
            validate_obj(c, x)?;
            Ok(((**x).clone(), ObjExpr::Terminal))
        }
        MorExpr::PbProj1(f, g) => {
            let pb = ObjExpr::Pullback(f.clone(), g.clone());
            validate_obj(c, &pb)?;
            let (fd, _) = infer_boundary(c, f)?;
            Ok((pb, fd))
        }
        MorExpr::PbProj2(f, g) => {
            let pb = ObjExpr::Pullback(f.clone(), g.clone());
            validate_obj(c, &pb)?;
            let (gd, _) = infer_boundary(c, g)?;
            Ok((pb, gd))
        }
        MorExpr::PbTuple { f, g, left, right } => {
            let pb = ObjExpr::Pullback(f.clone(), g.clone());
            validate_obj(c, &pb)?;
            let (fd, _) = infer_boundary(c, f)?;
            let (gd, _) = infer_boundary(c, g)?;
            let (ld, lc) = infer_boundary(c, left)?;
            let (rd, rc) = infer_boundary(c, right)?;
            if ld != rd {
                return ill(e, "tuple legs have different domains");
            }
            if lc != fd {
                return ill(e, "left leg must land in dom(f)");
            }
            if rc != gd {
                return ill(e, "right leg must land in dom(g)");
            }
            Ok((ld, pb))
        }
        MorExpr::PiTranspose { f, g, h } => {
            let pi = ObjExpr::Pi(f.clone(), g.clone());
            validate_obj(c, &pi)?;
            let (hd, hc) = infer_boundary(c, h)?;
            let (gd, _) = infer_boundary(c, g)?;
            if hc != gd {
                return ill(e, "transposed map must land in dom(g)");
            }
            let ObjExpr::Pullback(f2, p) = &hd else {
                return ill(e, "domain of the transposed map must be a pullback of f");
            };
            if f2 != f {
                return ill(e, "domain pullback is not along f");
            }
            let (pd, _) = infer_boundary(c, p)?;
            Ok((pd, pi))
        }
        MorExpr::PiUntranspose { f, g, p, k } => {
            let pi = ObjExpr::Pi(f.clone(), g.clone());
            validate_obj(c, &pi)?;
            let (_, fc) = infer_boundary(c, f)?;
            let (pd, pc) = infer_boundary(c, p)?;
            if pc != fc {
                return ill(e, "test family must land in cod(f)");
            }
            let (kd, kc) = infer_boundary(c, k)?;
            if kd != pd {
                return ill(e, "transposed map must start at dom(p)");
            }
            if kc != pi {
                return ill(e, "transposed map must land in the dependent product");
            }
            let (gd, _) = infer_boundary(c, g)?;
            Ok((ObjExpr::Pullback(f.clone(), p.clone()), gd))
        }
        MorExpr::LimLeg { lim, leg } => {
            validate_lim(c, lim)?;
            let Some(obj) = lim.objs.get(leg) else {
                return ill(e, "leg does not name a shape object");
            };
            Ok((ObjExpr::Lim(lim.clone()), obj.clone()))
        }
        MorExpr::LimTuple { lim, legs } => {
            validate_lim(c, lim)?;
            let mut dom: Option<ObjExpr> = None;
            for (_, name) in lim.shape.objects() {
                let Some(leg) = legs.get(name) else {
                    return ill(e, &format!("no leg for shape object `{name}`"));
                };
                let (ld, lc) = infer_boundary(c, leg)?;
                if lc != lim.objs[name] {
                    return ill(e, &format!("leg at `{name}` has the wrong codomain"));
                }
                match &dom {
                    None => dom = Some(ld),
                    Some(d) if *d == ld => {}
                    Some(_) => return ill(e, "legs have different domains"),
                }
            }
            for (k, _) in legs {
                if lim.shape.obj_ix(k).is_none() {
                    return ill(e, &format!("`{k}` is not a shape object"));
                }
            }
            let dom = dom.unwrap_or(ObjExpr::Terminal);
            Ok((dom, ObjExpr::Lim(lim.clone())))
        }
        MorExpr::Precompose { h, y } => {
            validate_obj(c, y)?;
            let (hd, hc) = infer_boundary(c, h)?;
            Ok((
                ObjExpr::IHom(Box::new(hc), y.clone()),
                ObjExpr::IHom(Box::new(hd), y.clone()),
            ))
        }
        MorExpr::Postcompose { h, x } => {
            validate_obj(c, x)?;
            let (hd, hc) = infer_boundary(c, h)?;
            Ok((
                ObjExpr::IHom(x.clone(), Box::new(hd)),
                ObjExpr::IHom(x.clone(), Box::new(hc)),
            ))
        }
        MorExpr::PolyMor { f, h } => {
            infer_boundary(c, f)?;
            let (hd, hc) = infer_boundary(c, h)?;
            Ok((
                ObjExpr::Poly(f.clone(), Box::new(hd)),
                ObjExpr::Poly(f.clone(), Box::new(hc)),
            ))
        }
    }
}

/// The generator embedding: each cell names itself.
pub fn eta_embed(c: &FinCategory) -> (BTreeMap<String, ObjExpr>, BTreeMap<String, MorExpr>) {
    let objs = c
        .objects()
        .map(|(_, o)| (o.to_string(), ObjExpr::Gen(o.to_string())))
        .collect();
    let mors = c
        .morphisms()
        .map(|(_, m)| (m.to_string(), MorExpr::Gen(m.to_string())))
        .collect();
    (objs, mors)
}

/// An interpretation: finite-set values for the generators plus chosen
/// structure on the target.
#[derive(Debug, Clone)]
pub struct Interpretation {
    /// set-valued functor on the generator category
    pub base: SetDiagram,
    pub choosers: Choosers,
}

impl Interpretation {
    pub fn generators(&self) -> &FinCategory {
        &self.base.shape
    }

    /// Evaluates an object expression. Generators evaluate strictly: the
    /// result is identical to the base functor's value.
    pub fn eval_obj(&self, e: &ObjExpr) -> Result<FinSetObj, EvalError> {
        validate_obj(self.generators(), e)?;
        self.eval_obj_unchecked(e)
    }

    fn eval_obj_unchecked(&self, e: &ObjExpr) -> Result<FinSetObj, EvalError> {
        match e {
            ObjExpr::Gen(o) => {
                let i = self
                    .base
                    .shape
                    .obj_ix(o)
                    .ok_or_else(|| ExprError::UnknownGenerator(o.clone()))?;
                Ok(self.base.objs[i].clone())
            }
            ObjExpr::Terminal => {
                let d = SetDiagram::new(Arc::new(shapes::empty()), vec![], vec![])?;
                Ok(self.choosers.limit(&d)?.apex)
            }
            ObjExpr::Pullback(f, g) => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                Ok(self.choosers.pullback(&ef, &eg)?.apex().clone())
            }
            ObjExpr::Pi(f, g) => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                Ok(self.choosers.dependent_product(&ef, &eg)?.pushforward.dom)
            }
            ObjExpr::IHom(x, y) => {
                let ex = self.eval_obj_unchecked(x)?;
                let ey = self.eval_obj_unchecked(y)?;
                Ok(self.choosers.exponential(&ex, &ey)?.0)
            }
            ObjExpr::Poly(f, x) => {
                let ef = self.eval_mor_unchecked(f)?;
                let ex = self.eval_obj_unchecked(x)?;
                Ok(self.choosers.polynomial(&ef, &ex)?)
            }
            ObjExpr::Lim(spec) => Ok(self.eval_lim(spec)?.apex),
        }
    }

    pub(crate) fn eval_lim(&self, spec: &LimSpec) -> Result<SetCone, EvalError> {
        let shape = spec.shape.clone();
        let mut objs = Vec::with_capacity(shape.obj_count());
        for (_, name) in shape.objects() {
            objs.push(self.eval_obj_unchecked(&spec.objs[name])?);
        }
        let mut mors = Vec::with_capacity(shape.mor_count());
        for (m, name) in shape.morphisms() {
            if shape.is_identity(m) {
                mors.push(FinSetMor::identity(&objs[shape.dom(m)]));
            } else {
                mors.push(self.eval_mor_unchecked(&spec.mors[name])?);
            }
        }
        let diagram = SetDiagram::new(shape, objs, mors).map_err(|err| match err {
            SetError::NotFunctorial(d) => {
                EvalError::Obligation(format!("limit diagram is not functorial: {d}"))
            }
            other => EvalError::Set(other),
        })?;
        Ok(self.choosers.limit(&diagram)?)
    }

    /// Evaluates a morphism expression.
    pub fn eval_mor(&self, e: &MorExpr) -> Result<FinSetMor, EvalError> {
        infer_boundary(self.generators(), e)?;
        self.eval_mor_unchecked(e)
    }

    fn eval_mor_unchecked(&self, e: &MorExpr) -> Result<FinSetMor, EvalError> {
        match e {
            MorExpr::Gen(m) => {
                let i = self
                    .base
                    .shape
                    .mor_ix(m)
                    .ok_or_else(|| ExprError::UnknownGenerator(m.clone()))?;
                Ok(self.base.mors[i].clone())
            }
            MorExpr::Id(x) => Ok(FinSetMor::identity(&self.eval_obj_unchecked(x)?)),
            MorExpr::Comp(g, f) => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                Ok(eg.compose(&ef)?)
            }
            MorExpr::Bang(x) => {
                let ex = self.eval_obj_unchecked(x)?;
                let terminal = self.eval_obj_unchecked(&ObjExpr::Terminal)?;
                Ok(FinSetMor::from_fn(ex, terminal, |_| Value::unit())?)
            }
            MorExpr::PbProj1(f, g) => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                Ok(self.choosers.pullback(&ef, &eg)?.proj1().clone())
            }
            MorExpr::PbProj2(f, g) => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                Ok(self.choosers.pullback(&ef, &eg)?.proj2().clone())
            }
            MorExpr::PbTuple { f, g, left, right } => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                let el = self.eval_mor_unchecked(left)?;
                let er = self.eval_mor_unchecked(right)?;
                if ef.compose(&el)? != eg.compose(&er)? {
                    return Err(EvalError::Obligation(format!(
                        "tuple legs do not satisfy the cospan equation in `{e}`"
                    )));
                }
                let pb = self.choosers.pullback(&ef, &eg)?;
                Ok(FinSetMor::from_fn(
                    el.dom.clone(),
                    pb.apex().clone(),
                    |w| {
                        let a = el.apply(w).unwrap().clone();
                        let m = ef.apply(&a).unwrap().clone();
                        let b = er.apply(w).unwrap().clone();
                        Value::Record(vec![
                            ("l".to_string(), a),
                            ("m".to_string(), m),
                            ("r".to_string(), b),
                        ])
                    },
                )?)
            }
            MorExpr::PiTranspose { f, g, h } => {
                let (hd, _) = infer_boundary(self.generators(), h)?;
                let ObjExpr::Pullback(_, p) = hd else {
                    return Err(EvalError::Obligation(format!(
                        "transpose domain is not a pullback in `{e}`"
                    )));
                };
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                let ep = self.eval_mor_unchecked(&p)?;
                let eh = self.eval_mor_unchecked(h)?;
                let dp = self.choosers.dependent_product(&ef, &eg)?;
                dp.transpose(&self.choosers, &ep, &eh)
                    .map_err(|err| match err {
                        SetError::BoundaryMismatch(d) => EvalError::Obligation(d),
                        other => EvalError::Set(other),
                    })
            }
            MorExpr::PiUntranspose { f, g, p, k } => {
                let ef = self.eval_mor_unchecked(f)?;
                let eg = self.eval_mor_unchecked(g)?;
                let ep = self.eval_mor_unchecked(p)?;
                let ek = self.eval_mor_unchecked(k)?;
                let dp = self.choosers.dependent_product(&ef, &eg)?;
                dp.untranspose(&self.choosers, &ep, &ek)
                    .map_err(|err| match err {
                        SetError::BoundaryMismatch(d) => EvalError::Obligation(d),
                        other => EvalError::Set(other),
                    })
            }
            MorExpr::LimLeg { lim, leg } => {
                let cone = self.eval_lim(lim)?;
                let i = lim
                    .shape
                    .obj_ix(leg)
                    .ok_or_else(|| ExprError::UnknownGenerator(leg.clone()))?;
                Ok(cone.legs[i].clone())
            }
            MorExpr::LimTuple { lim, legs } => {
                let limit = self.eval_lim(lim)?;
                let shape = &lim.shape;
                let mut eval_legs = Vec::with_capacity(shape.obj_count());
                for (_, name) in shape.objects() {
                    eval_legs.push(self.eval_mor_unchecked(&legs[name])?);
                }
                let apex = match eval_legs.first() {
                    Some(l) => l.dom.clone(),
                    None => self.eval_obj_unchecked(&ObjExpr::Terminal)?,
                };
                let cone = SetCone::new(limit.diagram.clone(), apex, eval_legs).map_err(|err| {
                    match err {
                        SetError::NotACone(d) => EvalError::Obligation(format!(
                            "tuple legs do not form a cone at `{d}`"
                        )),
                        other => EvalError::Set(other),
                    }
                })?;
                Ok(self.choosers.mediating(&cone, &limit)?)
            }
            MorExpr::Precompose { h, y } => {
                let eh = self.eval_mor_unchecked(h)?;
                let ey = self.eval_obj_unchecked(y)?;
                let (from, _) = self.choosers.exponential(&eh.cod, &ey)?;
                let (to, _) = self.choosers.exponential(&eh.dom, &ey)?;
                Ok(FinSetMor::from_fn(from, to, |v| {
                    let Value::Fun(graph) = v else { unreachable!() };
                    Value::Fun(
                        eh.dom
                            .iter()
                            .map(|a| {
                                let img = eh.apply(a).unwrap();
                                let out = &graph.iter().find(|(x, _)| x == img).unwrap().1;
                                (a.clone(), out.clone())
                            })
                            .collect(),
                    )
                })?)
            }
            MorExpr::Postcompose { h, x } => {
                let eh = self.eval_mor_unchecked(h)?;
                let ex = self.eval_obj_unchecked(x)?;
                let (from, _) = self.choosers.exponential(&ex, &eh.dom)?;
                let (to, _) = self.choosers.exponential(&ex, &eh.cod)?;
                Ok(FinSetMor::from_fn(from, to, |v| {
                    let Value::Fun(graph) = v else { unreachable!() };
                    Value::Fun(
                        graph
                            .iter()
                            .map(|(a, b)| (a.clone(), eh.apply(b).unwrap().clone()))
                            .collect(),
                    )
                })?)
            }
            MorExpr::PolyMor { f, h } => {
                let ef = self.eval_mor_unchecked(f)?;
                let eh = self.eval_mor_unchecked(h)?;
                Ok(self.choosers.polynomial_mor(&ef, &eh)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finset::is_limiting;

    fn gen_o(o: &str) -> ObjExpr {
        ObjExpr::Gen(o.to_string())
    }

    fn gen_m(m: &str) -> MorExpr {
        MorExpr::Gen(m.to_string())
    }

    /// the walking arrow interpreted as El : {e} -> {bot, top}, e over top
    fn prop_universe() -> Interpretation {
        let c = Arc::new(shapes::free(&["EL", "TY"], &[("El", "EL", "TY")]));
        let el_dom = FinSetObj::new(vec![Value::atom("e")]).unwrap();
        let ty = FinSetObj::new(vec![Value::atom("bot"), Value::atom("top")]).unwrap();
        let el = FinSetMor::from_fn(el_dom.clone(), ty.clone(), |_| Value::atom("top")).unwrap();
        let mut objs = vec![FinSetObj::empty(); 2];
        objs[c.obj_ix("EL").unwrap()] = el_dom.clone();
        objs[c.obj_ix("TY").unwrap()] = ty.clone();
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); 3];
        mors[c.mor_ix("El").unwrap()] = el;
        mors[c.mor_ix("id_EL").unwrap()] = FinSetMor::identity(&el_dom);
        mors[c.mor_ix("id_TY").unwrap()] = FinSetMor::identity(&ty);
        Interpretation {
            base: SetDiagram::new(c, objs, mors).unwrap(),
            choosers: Choosers::default(),
        }
    }

    #[test]
    fn boundary_of_generator() {
        let c = shapes::walking_arrow();
        let (d, cd) = infer_boundary(&c, &gen_m("f")).unwrap();
        assert_eq!(d, gen_o("a"));
        assert_eq!(cd, gen_o("b"));
    }

    #[test]
    fn boundary_of_bang() {
        let c = shapes::walking_arrow();
        let (d, cd) = infer_boundary(&c, &MorExpr::Bang(Box::new(gen_o("a")))).unwrap();
        assert_eq!(d, gen_o("a"));
        assert_eq!(cd, ObjExpr::Terminal);
    }

    #[test]
    fn pb_tuple_with_wrong_leg_boundary_is_ill_typed() {
        let c = shapes::walking_cospan();
        // legs swapped: left lands in dom(f2), right in dom(f1)
        let bad = MorExpr::PbTuple {
            f: Box::new(gen_m("f1")),
            g: Box::new(gen_m("f2")),
            left: Box::new(MorExpr::Id(Box::new(gen_o("x2")))),
            right: Box::new(MorExpr::Id(Box::new(gen_o("x1")))),
        };
        let err = infer_boundary(&c, &bad).unwrap_err();
        assert!(matches!(err, ExprError::IllTyped { .. }));
    }

    #[test]
    fn eval_terminal_is_canonical_singleton() {
        let i = prop_universe();
        let t = i.eval_obj(&ObjExpr::Terminal).unwrap();
        assert_eq!(t.to_string(), "{()}");
    }

    #[test]
    fn eval_poly_of_el_has_two_elements() {
        let i = prop_universe();
        let poly = i
            .eval_obj(&ObjExpr::Poly(
                Box::new(gen_m("El")),
                Box::new(gen_o("EL")),
            ))
            .unwrap();
        // 1 (empty fiber over bot) + 1 (one section over top)
        assert_eq!(poly.len(), 2);
    }

    #[test]
    fn eval_comp_with_identity() {
        let i = prop_universe();
        let f = gen_m("El");
        let comp = MorExpr::Comp(
            Box::new(MorExpr::Id(Box::new(gen_o("TY")))),
            Box::new(f.clone()),
        );
        assert_eq!(i.eval_mor(&comp).unwrap(), i.eval_mor(&f).unwrap());
    }

    #[test]
    fn strict_generator_condition() {
        let i = prop_universe();
        let e = i.eval_obj(&gen_o("EL")).unwrap();
        let base = i.base.obj_named("EL").unwrap();
        assert_eq!(&e, base);
    }

    #[test]
    fn eta_preserves_composites() {
        // Gen(g after f) evaluates equal to Comp(Gen g, Gen f)
        let c = Arc::new(shapes::free(
            &["x", "y", "z"],
            &[("f", "x", "y"), ("g", "y", "z")],
        ));
        let sx = FinSetObj::canonical(2);
        let sy = FinSetObj::canonical(3);
        let sz = FinSetObj::canonical(2);
        let ef = FinSetMor::from_fn(sx.clone(), sy.clone(), |v| {
            if v == &Value::atom("0") {
                Value::atom("1")
            } else {
                Value::atom("2")
            }
        })
        .unwrap();
        let eg = FinSetMor::from_fn(sy.clone(), sz.clone(), |v| {
            if v == &Value::atom("2") {
                Value::atom("1")
            } else {
                Value::atom("0")
            }
        })
        .unwrap();
        let mut objs = vec![FinSetObj::empty(); 3];
        objs[c.obj_ix("x").unwrap()] = sx.clone();
        objs[c.obj_ix("y").unwrap()] = sy.clone();
        objs[c.obj_ix("z").unwrap()] = sz.clone();
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); c.mor_count()];
        mors[c.mor_ix("f").unwrap()] = ef.clone();
        mors[c.mor_ix("g").unwrap()] = eg.clone();
        mors[c.mor_ix("f.g").unwrap()] = eg.compose(&ef).unwrap();
        mors[c.mor_ix("id_x").unwrap()] = FinSetMor::identity(&sx);
        mors[c.mor_ix("id_y").unwrap()] = FinSetMor::identity(&sy);
        mors[c.mor_ix("id_z").unwrap()] = FinSetMor::identity(&sz);
        let i = Interpretation {
            base: SetDiagram::new(c.clone(), objs, mors).unwrap(),
            choosers: Choosers::default(),
        };
        let (_, eta_m) = eta_embed(&c);
        let composite = i.eval_mor(&eta_m["f.g"]).unwrap();
        let composed = i
            .eval_mor(&MorExpr::Comp(
                Box::new(gen_m("g")),
                Box::new(gen_m("f")),
            ))
            .unwrap();
        assert_eq!(composite, composed);
    }

    #[test]
    fn ihom_from_terminal_is_isomorphic_not_equal() {
        let i = prop_universe();
        let x = gen_o("TY");
        let ihom = i
            .eval_obj(&ObjExpr::IHom(
                Box::new(ObjExpr::Terminal),
                Box::new(x.clone()),
            ))
            .unwrap();
        let ex = i.eval_obj(&x).unwrap();
        assert_ne!(ihom, ex);
        // iso: a function value from the point corresponds to its image
        let iso = FinSetMor::from_fn(ihom.clone(), ex.clone(), |v| {
            let Value::Fun(graph) = v else { unreachable!() };
            graph[0].1.clone()
        })
        .unwrap();
        assert!(iso.is_bijection());
    }

    #[test]
    fn ihom_agrees_with_pi_desugaring() {
        // IHom(x, y) versus Pi along bang(x) of the product projection
        let i = prop_universe();
        let x = gen_o("EL");
        let y = gen_o("TY");
        let ihom = i
            .eval_obj(&ObjExpr::IHom(Box::new(x.clone()), Box::new(y.clone())))
            .unwrap();
        // proj : x*y -> x is the family over x whose pushforward along
        // bang(x) is the function space
        let proj = MorExpr::PbProj1(
            Box::new(MorExpr::Bang(Box::new(x.clone()))),
            Box::new(MorExpr::Bang(Box::new(y.clone()))),
        );
        let pi = i
            .eval_obj(&ObjExpr::Pi(
                Box::new(MorExpr::Bang(Box::new(x))),
                Box::new(proj),
            ))
            .unwrap();
        assert_eq!(ihom.len(), pi.len());
    }

    #[test]
    fn pullback_eval_passes_is_limiting() {
        let i = prop_universe();
        let ef = i.eval_mor(&gen_m("El")).unwrap();
        let pb = i.choosers.pullback(&ef, &ef).unwrap();
        assert!(is_limiting(&i.choosers, &pb.cone).unwrap().is_limiting());
    }

    #[test]
    fn lim_eval_passes_is_limiting() {
        let i = prop_universe();
        let shape = Arc::new(shapes::discrete(&["u", "v"]));
        let spec = LimSpec {
            shape: shape.clone(),
            objs: [
                ("u".to_string(), gen_o("EL")),
                ("v".to_string(), gen_o("TY")),
            ]
            .into_iter()
            .collect(),
            mors: BTreeMap::new(),
        };
        let apex = i.eval_obj(&ObjExpr::Lim(spec.clone())).unwrap();
        assert_eq!(apex.len(), 2);
        let cone = i.eval_lim(&spec).unwrap();
        assert!(is_limiting(&i.choosers, &cone).unwrap().is_limiting());
        let leg = i
            .eval_mor(&MorExpr::LimLeg {
                lim: spec,
                leg: "u".to_string(),
            })
            .unwrap();
        assert_eq!(leg.dom, apex);
    }

    #[test]
    fn pb_tuple_obligation_fails_on_non_commuting_legs() {
        // base with an involution sw on EL; legs (id, sw) over the kernel
        // cospan (El, El) fail the cospan equation when El is injective
        let c = Arc::new(
            crate::fincat::present_category(&crate::fincat::Presentation {
                vertices: vec!["EL".into(), "TY".into()],
                arrows: vec![
                    ("El".into(), "EL".into(), "TY".into()),
                    ("sw".into(), "EL".into(), "EL".into()),
                ],
                relations: vec![(vec!["sw".into(), "sw".into()], vec![])],
                saturation_bound: 4,
            })
            .unwrap(),
        );
        let el_dom = FinSetObj::canonical(2);
        let ty = FinSetObj::canonical(2);
        let el = FinSetMor::from_fn(el_dom.clone(), ty.clone(), |v| v.clone()).unwrap();
        let swap = FinSetMor::new(
            el_dom.clone(),
            el_dom.clone(),
            &[
                (Value::atom("0"), Value::atom("1")),
                (Value::atom("1"), Value::atom("0")),
            ],
        )
        .unwrap();
        let mut objs = vec![FinSetObj::empty(); 2];
        objs[c.obj_ix("EL").unwrap()] = el_dom.clone();
        objs[c.obj_ix("TY").unwrap()] = ty.clone();
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); c.mor_count()];
        for (m, name) in c.morphisms() {
            let dom = &objs[c.dom(m)];
            mors[m] = match name {
                "El" => el.clone(),
                "sw" => swap.clone(),
                "sw.El" => el.compose(&swap).unwrap(),
                n if n.starts_with("id_") => FinSetMor::identity(dom),
                other => panic!("unexpected morphism {other}"),
            };
        }
        let i = Interpretation {
            base: SetDiagram::new(c.clone(), objs, mors).unwrap(),
            choosers: Choosers::default(),
        };
        let bad = MorExpr::PbTuple {
            f: Box::new(gen_m("El")),
            g: Box::new(gen_m("El")),
            left: Box::new(MorExpr::Id(Box::new(gen_o("EL")))),
            right: Box::new(gen_m("sw")),
        };
        let err = i.eval_mor(&bad).unwrap_err();
        assert!(matches!(err, EvalError::Obligation(_)));
    }

    #[test]
    fn transpose_roundtrip() {
        let i = prop_universe();
        let f = gen_m("El");
        let g = MorExpr::Id(Box::new(gen_o("EL")));
        let p = gen_m("El");
        // h : pb(El, El) -> EL over EL: first projection
        let h = MorExpr::PbProj1(Box::new(f.clone()), Box::new(p.clone()));
        let lam = MorExpr::PiTranspose {
            f: Box::new(f.clone()),
            g: Box::new(g.clone()),
            h: Box::new(h.clone()),
        };
        let unlam = MorExpr::PiUntranspose {
            f: Box::new(f),
            g: Box::new(g),
            p: Box::new(p),
            k: Box::new(lam),
        };
        assert_eq!(i.eval_mor(&unlam).unwrap(), i.eval_mor(&h).unwrap());
    }
}
