//! Operation signatures over finite-category arities, derived-operation
//! categories, algebras, and equation satisfaction.
//!
//! An operation takes a diagram of a fixed finite shape as input and returns
//! a diagram of a fixed result shape; an algebra realizes each operation as a
//! functor between the corresponding functor categories. Derived operations
//! stack these to finite depth; equations compare parallel derived terms
//! under every environment, at both the object and the morphism level (the
//! satisfaction condition is an equality of functors, so environment
//! morphisms count).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{
    enumerate_functors, enumerate_naturals, functor_category, CatError, FinCategory, Functor,
    FunctorCategory, NatTransformation, RawCategory,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgError {
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("ill-formed term: {0}")]
    IllFormedTerm(String),
    #[error("derived operations would materialize {count} cells (ceiling {ceiling})")]
    GuardrailExceeded { count: usize, ceiling: usize },
    #[error("no unique morphism action extends the object map of `{0}`")]
    AmbiguousExtension(String),
}

/// Whether operation functoriality comes for free (`Cat`) or only up to
/// isomorphism (`Grpd`), in which case functoriality squares are emitted as
/// explicit equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enrichment {
    Cat,
    Grpd,
}

/// One operation: an arity shape and a result shape.
#[derive(Debug, Clone)]
pub struct OpDecl {
    pub name: String,
    pub arity: Arc<FinCategory>,
    pub result: Arc<FinCategory>,
}

/// A family of operations.
#[derive(Debug, Clone)]
pub struct Signature {
    pub ops: Vec<OpDecl>,
    pub enrichment: Enrichment,
}

impl Signature {
    pub fn empty(enrichment: Enrichment) -> Signature {
        Signature {
            ops: Vec::new(),
            enrichment,
        }
    }

    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| o.name == name)
    }
}

// ---------------------------------------------------------------------------
// Derived terms
// ---------------------------------------------------------------------------

/// Argument of an operation: expressions for the cells of its arity shape.
/// Identity morphisms stay implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermDiagram {
    pub objs: BTreeMap<String, ObjTerm>,
    pub mors: BTreeMap<String, MorTerm>,
}

impl TermDiagram {
    pub fn empty() -> TermDiagram {
        TermDiagram {
            objs: BTreeMap::new(),
            mors: BTreeMap::new(),
        }
    }
}

/// Object-level derived term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjTerm {
    Var(String),
    Op {
        op: String,
        result_obj: String,
        arg: TermDiagram,
    },
}

/// Morphism-level derived term: a variable, or a cell of a result shape paired
/// with a transformation between two argument diagrams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorTerm {
    Var(String),
    Op {
        op: String,
        result_mor: String,
        src: TermDiagram,
        tgt: TermDiagram,
        nat: BTreeMap<String, MorTerm>,
    },
}

impl ObjTerm {
    pub fn var(s: &str) -> ObjTerm {
        ObjTerm::Var(s.to_string())
    }

    pub fn stage(&self) -> usize {
        match self {
            ObjTerm::Var(_) => 0,
            ObjTerm::Op { arg, .. } => 1 + diagram_stage(arg),
        }
    }
}

impl MorTerm {
    pub fn var(s: &str) -> MorTerm {
        MorTerm::Var(s.to_string())
    }

    pub fn stage(&self) -> usize {
        match self {
            MorTerm::Var(_) => 0,
            MorTerm::Op { src, tgt, nat, .. } => {
                let mut s = diagram_stage(src).max(diagram_stage(tgt));
                for t in nat.values() {
                    s = s.max(t.stage());
                }
                1 + s
            }
        }
    }
}

fn diagram_stage(d: &TermDiagram) -> usize {
    let mut s = 0;
    for t in d.objs.values() {
        s = s.max(t.stage());
    }
    for t in d.mors.values() {
        s = s.max(t.stage());
    }
    s
}

/// Boundary object terms of a morphism term.
pub fn mor_term_boundary(sig: &Signature, c: &FinCategory, t: &MorTerm) -> Result<(ObjTerm, ObjTerm), AlgError> {
    match t {
        MorTerm::Var(m) => {
            let i = c
                .mor_ix(m)
                .ok_or_else(|| AlgError::IllFormedTerm(format!("unknown variable `{m}`")))?;
            Ok((
                ObjTerm::Var(c.obj_name(c.dom(i)).to_string()),
                ObjTerm::Var(c.obj_name(c.cod(i)).to_string()),
            ))
        }
        MorTerm::Op {
            op,
            result_mor,
            src,
            tgt,
            ..
        } => {
            let decl = sig.op(op).ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let m = decl.result.mor_ix(result_mor).ok_or_else(|| {
                AlgError::IllFormedTerm(format!("`{result_mor}` not in result of `{op}`"))
            })?;
            Ok((
                ObjTerm::Op {
                    op: op.clone(),
                    result_obj: decl.result.obj_name(decl.result.dom(m)).to_string(),
                    arg: src.clone(),
                },
                ObjTerm::Op {
                    op: op.clone(),
                    result_obj: decl.result.obj_name(decl.result.cod(m)).to_string(),
                    arg: tgt.clone(),
                },
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Equations
// ---------------------------------------------------------------------------

/// One equation between parallel derived terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equation {
    Obj {
        name: String,
        lhs: ObjTerm,
        rhs: ObjTerm,
    },
    Mor {
        name: String,
        lhs: MorTerm,
        rhs: MorTerm,
    },
}

impl Equation {
    pub fn name(&self) -> &str {
        match self {
            Equation::Obj { name, .. } | Equation::Mor { name, .. } => name,
        }
    }
}

/// Equations grouped by the arity (free-variable shape) they live at. The
/// equation category of a group is the disjoint union of a point per object
/// equation and a walking arrow per morphism equation.
#[derive(Debug, Clone)]
pub struct EquationSet {
    pub groups: Vec<(Arc<FinCategory>, Vec<Equation>)>,
}

impl EquationSet {
    pub fn empty() -> EquationSet {
        EquationSet { groups: Vec::new() }
    }

    /// Materializes the equation category of one group.
    pub fn equation_category(&self, group: usize) -> Result<FinCategory, CatError> {
        let mut raw = RawCategory::default();
        for eq in &self.groups[group].1 {
            match eq {
                Equation::Obj { name, .. } => {
                    let o = format!("{name}:pt");
                    raw.objects.push(o.clone());
                    raw.morphisms.push((format!("id_{o}"), o.clone(), o.clone()));
                    raw.identities.push((o.clone(), format!("id_{o}")));
                    raw.composites
                        .push((format!("id_{o}"), format!("id_{o}"), format!("id_{o}")));
                }
                Equation::Mor { name, .. } => {
                    let (a, b) = (format!("{name}:0"), format!("{name}:1"));
                    for o in [&a, &b] {
                        raw.objects.push(o.clone());
                        raw.morphisms
                            .push((format!("id_{o}"), o.clone(), o.clone()));
                        raw.identities.push((o.clone(), format!("id_{o}")));
                        raw.composites.push((
                            format!("id_{o}"),
                            format!("id_{o}"),
                            format!("id_{o}"),
                        ));
                    }
                    raw.morphisms.push((name.clone(), a.clone(), b.clone()));
                    raw.composites
                        .push((name.clone(), format!("id_{a}"), name.clone()));
                    raw.composites
                        .push((format!("id_{b}"), name.clone(), name.clone()));
                }
            }
        }
        raw.validate()
    }
}

// ---------------------------------------------------------------------------
// Algebras
// ---------------------------------------------------------------------------

/// The realization of one operation in an algebra.
#[derive(Debug, Clone)]
pub struct OpStructure {
    pub arity_fc: FunctorCategory,
    pub result_fc: FunctorCategory,
    /// functor `[arity, carrier] -> [result, carrier]`
    pub nu: Functor,
}

/// A carrier category with a validated structure functor per operation.
#[derive(Debug, Clone)]
pub struct Algebra {
    pub carrier: Arc<FinCategory>,
    pub ops: BTreeMap<String, OpStructure>,
}

impl Algebra {
    /// Builds an algebra from explicit object and morphism assignments:
    /// `obj_assign` sends each functor of `[arity, carrier]` to a functor
    /// `result -> carrier`, and `mor_assign` each natural transformation to a
    /// natural transformation between the corresponding images.
    pub fn from_assignments(
        sig: &Signature,
        carrier: &Arc<FinCategory>,
        mut obj_assign: impl FnMut(&OpDecl, &Functor) -> Result<Functor, AlgError>,
        mut mor_assign: impl FnMut(&OpDecl, &NatTransformation) -> Result<NatTransformation, AlgError>,
    ) -> Result<Algebra, AlgError> {
        let mut ops = BTreeMap::new();
        for decl in &sig.ops {
            let arity_fc = functor_category(&decl.arity, carrier)?;
            let result_fc = functor_category(&decl.result, carrier)?;
            let mut obj_map = vec![usize::MAX; arity_fc.cat.obj_count()];
            for (k, f) in arity_fc.functors.iter().enumerate() {
                let img = obj_assign(decl, f)?;
                let img_ix = result_fc.functor_index(&img).ok_or_else(|| {
                    AlgError::IllFormedTerm(format!(
                        "image of an input diagram is not a functor `{} -> carrier`",
                        decl.name
                    ))
                })?;
                obj_map[arity_fc.functor_obj(k)] = result_fc.functor_obj(img_ix);
            }
            let mut mor_map = vec![usize::MAX; arity_fc.cat.mor_count()];
            for (k, t) in arity_fc.nats.iter().enumerate() {
                let img = mor_assign(decl, t)?;
                let img_ix = result_fc.nat_index(&img).ok_or_else(|| {
                    AlgError::IllFormedTerm(format!(
                        "image of an input transformation is not natural for `{}`",
                        decl.name
                    ))
                })?;
                mor_map[arity_fc.nat_mor(k)] = result_fc.nat_mor(img_ix);
            }
            let nu = Functor::new(
                arity_fc.cat.clone(),
                result_fc.cat.clone(),
                obj_map,
                mor_map,
            )?;
            ops.insert(
                decl.name.clone(),
                OpStructure {
                    arity_fc,
                    result_fc,
                    nu,
                },
            );
        }
        Ok(Algebra {
            carrier: carrier.clone(),
            ops,
        })
    }

    /// Builds an algebra from object maps only, deriving the morphism action
    /// when a unique natural transformation fits. Sufficient for thin
    /// carriers; fails with `AmbiguousExtension` otherwise.
    pub fn from_object_maps(
        sig: &Signature,
        carrier: &Arc<FinCategory>,
        mut obj_assign: impl FnMut(&OpDecl, &Functor) -> Result<Functor, AlgError>,
    ) -> Result<Algebra, AlgError> {
        // first pass: remember images so the morphism pass can search
        let mut images: BTreeMap<(String, Vec<usize>, Vec<usize>), Functor> = BTreeMap::new();
        for decl in &sig.ops {
            for f in enumerate_functors(&decl.arity, carrier) {
                let img = obj_assign(decl, &f)?;
                images.insert(
                    (
                        decl.name.clone(),
                        f.obj_maps().to_vec(),
                        f.mor_maps().to_vec(),
                    ),
                    img,
                );
            }
        }
        Algebra::from_assignments(
            sig,
            carrier,
            |decl, f| {
                images
                    .get(&(
                        decl.name.clone(),
                        f.obj_maps().to_vec(),
                        f.mor_maps().to_vec(),
                    ))
                    .cloned()
                    .ok_or_else(|| AlgError::IllFormedTerm("missing image".into()))
            },
            |decl, t| {
                let src = images[&(
                    decl.name.clone(),
                    t.source.obj_maps().to_vec(),
                    t.source.mor_maps().to_vec(),
                )]
                    .clone();
                let tgt = images[&(
                    decl.name.clone(),
                    t.target.obj_maps().to_vec(),
                    t.target.mor_maps().to_vec(),
                )]
                    .clone();
                let candidates = enumerate_naturals(&src, &tgt);
                match candidates.len() {
                    1 => Ok(candidates.into_iter().next().unwrap()),
                    n => Err(AlgError::AmbiguousExtension(format!(
                        "{} candidates for `{}`",
                        n, decl.name
                    ))),
                }
            },
        )
    }
}

// ---------------------------------------------------------------------------
// Term evaluation
// ---------------------------------------------------------------------------

fn eval_diagram(
    alg: &Algebra,
    sig: &Signature,
    env: &Functor,
    arity: &Arc<FinCategory>,
    d: &TermDiagram,
) -> Result<Functor, AlgError> {
    let mut obj_map = vec![usize::MAX; arity.obj_count()];
    for (i, name) in arity.objects() {
        let t = d
            .objs
            .get(name)
            .ok_or_else(|| AlgError::IllFormedTerm(format!("no argument for object `{name}`")))?;
        obj_map[i] = eval_obj_term(alg, sig, env, t)?;
    }
    let mut mor_map = vec![usize::MAX; arity.mor_count()];
    for (m, name) in arity.morphisms() {
        if arity.is_identity(m) {
            mor_map[m] = alg.carrier.identity_of(obj_map[arity.dom(m)]);
        } else {
            let t = d.mors.get(name).ok_or_else(|| {
                AlgError::IllFormedTerm(format!("no argument for morphism `{name}`"))
            })?;
            mor_map[m] = eval_mor_term(alg, sig, env, t)?;
        }
    }
    Ok(Functor::new(
        arity.clone(),
        alg.carrier.clone(),
        obj_map,
        mor_map,
    )?)
}

/// Evaluates an object term under an environment (a functor from the
/// equation arity into the carrier). Returns a carrier object index.
pub fn eval_obj_term(
    alg: &Algebra,
    sig: &Signature,
    env: &Functor,
    t: &ObjTerm,
) -> Result<usize, AlgError> {
    match t {
        ObjTerm::Var(o) => {
            let i = env
                .source
                .obj_ix(o)
                .ok_or_else(|| AlgError::IllFormedTerm(format!("unknown variable `{o}`")))?;
            Ok(env.obj(i))
        }
        ObjTerm::Op {
            op,
            result_obj,
            arg,
        } => {
            let decl = sig.op(op).ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let st = alg
                .ops
                .get(op)
                .ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let gamma = eval_diagram(alg, sig, env, &decl.arity, arg)?;
            let gi = st
                .arity_fc
                .functor_index(&gamma)
                .ok_or_else(|| AlgError::IllFormedTerm("argument functor not enumerated".into()))?;
            let img_obj = st.nu.obj(st.arity_fc.functor_obj(gi));
            let img = st.result_fc.functor_at_obj(img_obj);
            let ri = decl.result.obj_ix(result_obj).ok_or_else(|| {
                AlgError::IllFormedTerm(format!("`{result_obj}` not in result of `{op}`"))
            })?;
            Ok(img.obj(ri))
        }
    }
}

/// Evaluates a morphism term under an environment. Returns a carrier
/// morphism index.
pub fn eval_mor_term(
    alg: &Algebra,
    sig: &Signature,
    env: &Functor,
    t: &MorTerm,
) -> Result<usize, AlgError> {
    match t {
        MorTerm::Var(m) => {
            let i = env
                .source
                .mor_ix(m)
                .ok_or_else(|| AlgError::IllFormedTerm(format!("unknown variable `{m}`")))?;
            Ok(env.mor(i))
        }
        MorTerm::Op {
            op,
            result_mor,
            src,
            tgt,
            nat,
        } => {
            let decl = sig.op(op).ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let st = alg
                .ops
                .get(op)
                .ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let src_f = eval_diagram(alg, sig, env, &decl.arity, src)?;
            let tgt_f = eval_diagram(alg, sig, env, &decl.arity, tgt)?;
            let mut comps = vec![usize::MAX; decl.arity.obj_count()];
            for (i, name) in decl.arity.objects() {
                let c = nat.get(name).ok_or_else(|| {
                    AlgError::IllFormedTerm(format!("no transformation component at `{name}`"))
                })?;
                comps[i] = eval_mor_term(alg, sig, env, c)?;
            }
            let alpha = NatTransformation::new(src_f, tgt_f, comps)?;
            let ai = st.arity_fc.nat_index(&alpha).ok_or_else(|| {
                AlgError::IllFormedTerm("argument transformation not enumerated".into())
            })?;
            let beta = st.result_fc.nat_at_mor(st.nu.mor(st.arity_fc.nat_mor(ai)));
            let ri = decl.result.mor_ix(result_mor).ok_or_else(|| {
                AlgError::IllFormedTerm(format!("`{result_mor}` not in result of `{op}`"))
            })?;
            // evaluation functor on a product cell (sigma, beta)
            let cod_component = beta.component(decl.result.cod(ri));
            let src_img = beta.source.mor(ri);
            Ok(alg
                .carrier
                .compose(cod_component, src_img)
                .expect("evaluation composite"))
        }
    }
}

/// Component of the extended transformation at an object term: the morphism
/// of the carrier that `nu^omega(alpha)` assigns to the term's cell.
pub fn eval_obj_term_nat(
    alg: &Algebra,
    sig: &Signature,
    alpha: &NatTransformation,
    t: &ObjTerm,
) -> Result<usize, AlgError> {
    match t {
        ObjTerm::Var(o) => {
            let i = alpha
                .source
                .source
                .obj_ix(o)
                .ok_or_else(|| AlgError::IllFormedTerm(format!("unknown variable `{o}`")))?;
            Ok(alpha.component(i))
        }
        ObjTerm::Op {
            op,
            result_obj,
            arg,
        } => {
            let decl = sig.op(op).ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let st = alg
                .ops
                .get(op)
                .ok_or_else(|| AlgError::UnknownOp(op.clone()))?;
            let src_f = eval_diagram(alg, sig, &alpha.source, &decl.arity, arg)?;
            let tgt_f = eval_diagram(alg, sig, &alpha.target, &decl.arity, arg)?;
            let mut comps = vec![usize::MAX; decl.arity.obj_count()];
            for (i, name) in decl.arity.objects() {
                comps[i] = eval_obj_term_nat(alg, sig, alpha, &arg.objs[name])?;
            }
            let whiskered = NatTransformation::new(src_f, tgt_f, comps)?;
            let ai = st.arity_fc.nat_index(&whiskered).ok_or_else(|| {
                AlgError::IllFormedTerm("whiskered transformation not enumerated".into())
            })?;
            let beta = st.result_fc.nat_at_mor(st.nu.mor(st.arity_fc.nat_mor(ai)));
            let ri = decl.result.obj_ix(result_obj).ok_or_else(|| {
                AlgError::IllFormedTerm(format!("`{result_obj}` not in result of `{op}`"))
            })?;
            Ok(beta.component(ri))
        }
    }
}

// ---------------------------------------------------------------------------
// Satisfaction
// ---------------------------------------------------------------------------

/// One satisfaction failure: the equation, the environment (object or
/// morphism of the environment category), and the two values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatFailure {
    pub group: usize,
    pub equation: String,
    pub environment: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone)]
pub struct SatReport {
    pub checked: usize,
    pub failures: Vec<SatFailure>,
}

impl SatReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn describe_env(env: &Functor) -> String {
    let mut s = String::new();
    for (o, name) in env.source.objects() {
        if !s.is_empty() {
            s.push_str(", ");
        }
        let _ = write!(s, "{name}->{}", env.target.obj_name(env.obj(o)));
    }
    for (m, name) in env.source.morphisms() {
        if env.source.is_identity(m) {
            continue;
        }
        if !s.is_empty() {
            s.push_str(", ");
        }
        let _ = write!(s, "{name}->{}", env.target.mor_name(env.mor(m)));
    }
    if s.is_empty() {
        s.push_str("(empty)");
    }
    s
}

fn describe_nat(alpha: &NatTransformation) -> String {
    let mut s = String::from("nat ");
    for (o, name) in alpha.source.source.objects() {
        let _ = write!(
            s,
            "{}{name}=>{}",
            if o > 0 { ", " } else { "" },
            alpha.source.target.mor_name(alpha.component(o))
        );
    }
    if alpha.source.source.obj_count() == 0 {
        s.push_str("(empty)");
    }
    s
}

/// Checks one equation group against explicit environments and environment
/// morphisms, appending failures.
pub fn check_equations(
    alg: &Algebra,
    sig: &Signature,
    group_ix: usize,
    arity: &Arc<FinCategory>,
    equations: &[Equation],
    envs: &[Functor],
    nats: &[NatTransformation],
    failures: &mut Vec<SatFailure>,
) -> Result<usize, AlgError> {
    let mut checked = 0;
    for env in envs {
        for eq in equations {
            checked += 1;
            match eq {
                Equation::Obj { name, lhs, rhs } => {
                    let l = eval_obj_term(alg, sig, env, lhs)?;
                    let r = eval_obj_term(alg, sig, env, rhs)?;
                    if l != r {
                        failures.push(SatFailure {
                            group: group_ix,
                            equation: name.clone(),
                            environment: describe_env(env),
                            lhs: alg.carrier.obj_name(l).to_string(),
                            rhs: alg.carrier.obj_name(r).to_string(),
                        });
                    }
                }
                Equation::Mor { name, lhs, rhs } => {
                    let l = eval_mor_term(alg, sig, env, lhs)?;
                    let r = eval_mor_term(alg, sig, env, rhs)?;
                    if l != r {
                        failures.push(SatFailure {
                            group: group_ix,
                            equation: name.clone(),
                            environment: describe_env(env),
                            lhs: alg.carrier.mor_name(l).to_string(),
                            rhs: alg.carrier.mor_name(r).to_string(),
                        });
                    }
                }
            }
        }
    }
    // morphism-level satisfaction: the two composite functors agree on
    // environment morphisms, i.e. on whiskered transformations at the
    // endpoint object terms of every equation
    for alpha in nats {
        for eq in equations {
            checked += 1;
            let endpoint_pairs: Vec<(ObjTerm, ObjTerm)> = match eq {
                Equation::Obj { lhs, rhs, .. } => vec![(lhs.clone(), rhs.clone())],
                Equation::Mor { lhs, rhs, .. } => {
                    let (ld, lc) = mor_term_boundary(sig, arity, lhs)?;
                    let (rd, rc) = mor_term_boundary(sig, arity, rhs)?;
                    vec![(ld, rd), (lc, rc)]
                }
            };
            for (lt, rt) in endpoint_pairs {
                let l = eval_obj_term_nat(alg, sig, alpha, &lt)?;
                let r = eval_obj_term_nat(alg, sig, alpha, &rt)?;
                if l != r {
                    failures.push(SatFailure {
                        group: group_ix,
                        equation: eq.name().to_string(),
                        environment: describe_nat(alpha),
                        lhs: alg.carrier.mor_name(l).to_string(),
                        rhs: alg.carrier.mor_name(r).to_string(),
                    });
                }
            }
        }
    }
    Ok(checked)
}

/// Checks every equation under every environment (objects and morphisms of
/// each environment category), exhaustively.
pub fn satisfies(alg: &Algebra, sig: &Signature, eqs: &EquationSet) -> Result<SatReport, AlgError> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (gi, (arity, group)) in eqs.groups.iter().enumerate() {
        let envs = enumerate_functors(arity, &alg.carrier);
        let mut nats = Vec::new();
        for f in &envs {
            for g in &envs {
                nats.extend(enumerate_naturals(f, g));
            }
        }
        checked += check_equations(alg, sig, gi, arity, group, &envs, &nats, &mut failures)?;
    }
    Ok(SatReport { checked, failures })
}

// ---------------------------------------------------------------------------
// Derived-operation categories
// ---------------------------------------------------------------------------

/// The materialized category of derived operations at a finite stage, with
/// the canonical inclusion from the previous stage.
#[derive(Debug, Clone)]
pub struct DerivedOps {
    pub cat: Arc<FinCategory>,
    pub inclusion: Option<Functor>,
    /// for op-objects: (op index, result object, functor into the previous
    /// stage), aligned with object indices (None for variables)
    op_objs: Vec<Option<(usize, usize, Functor)>>,
    op_mors: Vec<Option<(usize, usize, NatTransformation)>>,
}

/// Builds the stage-`n` derived-operation category over `c`:
/// stage 0 is `c` itself, and stage n+1 is the disjoint union of `c` with,
/// for every operation, (result shape) x (functor category of arguments at
/// stage n).
pub fn derived_ops(
    sig: &Signature,
    c: &Arc<FinCategory>,
    n: usize,
    ceiling: usize,
) -> Result<DerivedOps, AlgError> {
    if n == 0 {
        return Ok(DerivedOps {
            cat: c.clone(),
            inclusion: None,
            op_objs: vec![None; c.obj_count()],
            op_mors: vec![None; c.mor_count()],
        });
    }
    let prev = derived_ops(sig, c, n - 1, ceiling)?;

    let mut raw = RawCategory::default();
    let var_obj = |name: &str| format!("v:{name}");
    let var_mor = |name: &str| format!("v:{name}");
    for (_, o) in c.objects() {
        raw.objects.push(var_obj(o));
    }
    for (m, name) in c.morphisms() {
        raw.morphisms.push((
            var_mor(name),
            var_obj(c.obj_name(c.dom(m))),
            var_obj(c.obj_name(c.cod(m))),
        ));
    }
    for (o, name) in c.objects() {
        raw.identities
            .push((var_obj(name), var_mor(c.mor_name(c.identity_of(o)))));
    }
    for (g, gn) in c.morphisms() {
        for (f, fname) in c.morphisms() {
            if let Some(gf) = c.compose(g, f) {
                raw.composites
                    .push((var_mor(gn), var_mor(fname), var_mor(c.mor_name(gf))));
            }
        }
    }

    let mut obj_count = c.obj_count();
    let mut meta_objs: Vec<(String, usize, usize, Functor)> = Vec::new();
    let mut meta_mors: Vec<(String, usize, usize, NatTransformation)> = Vec::new();
    for (oi, decl) in sig.ops.iter().enumerate() {
        let functors = enumerate_functors(&decl.arity, &prev.cat);
        obj_count += decl.result.obj_count() * functors.len();
        if obj_count > ceiling {
            return Err(AlgError::GuardrailExceeded {
                count: obj_count,
                ceiling,
            });
        }
        let mut nats = Vec::new();
        for f in &functors {
            for g in &functors {
                nats.extend(enumerate_naturals(f, g));
            }
        }
        let fw = functors.len().max(1).to_string().len();
        let nw = nats.len().max(1).to_string().len();
        let fname = |k: usize| format!("{k:0fw$}");
        let findex = |f: &Functor| functors
            .iter()
            .position(|g| g.obj_maps() == f.obj_maps() && g.mor_maps() == f.mor_maps())
            .unwrap();
        for (ro, roname) in decl.result.objects() {
            for (k, f) in functors.iter().enumerate() {
                let name = format!("o:{}:{}:{}", decl.name, roname, fname(k));
                raw.objects.push(name.clone());
                meta_objs.push((name, oi, ro, f.clone()));
            }
        }
        for (rm, rmname) in decl.result.morphisms() {
            for (k, t) in nats.iter().enumerate() {
                let name = format!("o:{}:{}:n{k:0nw$}", decl.name, rmname);
                let src = findex(&t.source);
                let tgt = findex(&t.target);
                raw.morphisms.push((
                    name.clone(),
                    format!(
                        "o:{}:{}:{}",
                        decl.name,
                        decl.result.obj_name(decl.result.dom(rm)),
                        fname(src)
                    ),
                    format!(
                        "o:{}:{}:{}",
                        decl.name,
                        decl.result.obj_name(decl.result.cod(rm)),
                        fname(tgt)
                    ),
                ));
                meta_mors.push((name.clone(), oi, rm, t.clone()));
                // identity cell: identity result morphism with identity nat
                let is_id_nat = src == tgt
                    && t.components().iter().enumerate().all(|(o, &m)| {
                        m == prev.cat.identity_of(t.source.obj(o))
                    });
                if decl.result.is_identity(rm) && is_id_nat {
                    raw.identities.push((
                        format!(
                            "o:{}:{}:{}",
                            decl.name,
                            decl.result.obj_name(decl.result.dom(rm)),
                            fname(src)
                        ),
                        name,
                    ));
                }
            }
        }
        // composition within the summand: componentwise
        let nat_key = |t: &NatTransformation| {
            (
                findex(&t.source),
                findex(&t.target),
                t.components().to_vec(),
            )
        };
        let mut nat_lookup: BTreeMap<(usize, usize, Vec<usize>), usize> = BTreeMap::new();
        for (k, t) in nats.iter().enumerate() {
            nat_lookup.insert(nat_key(t), k);
        }
        for (gm, _) in decl.result.morphisms() {
            for (fm, _) in decl.result.morphisms() {
                let Some(gfm) = decl.result.compose(gm, fm) else {
                    continue;
                };
                for (gk, gt) in nats.iter().enumerate() {
                    for (fk, ft) in nats.iter().enumerate() {
                        if findex(&ft.target) != findex(&gt.source) {
                            continue;
                        }
                        let comps: Vec<usize> = (0..decl.arity.obj_count())
                            .map(|o| {
                                prev.cat
                                    .compose(gt.component(o), ft.component(o))
                                    .expect("componentwise composite")
                            })
                            .collect();
                        let ck = nat_lookup
                            [&(findex(&ft.source), findex(&gt.target), comps)];
                        raw.composites.push((
                            format!(
                                "o:{}:{}:n{gk:0nw$}",
                                decl.name,
                                decl.result.mor_name(gm)
                            ),
                            format!(
                                "o:{}:{}:n{fk:0nw$}",
                                decl.name,
                                decl.result.mor_name(fm)
                            ),
                            format!(
                                "o:{}:{}:n{ck:0nw$}",
                                decl.name,
                                decl.result.mor_name(gfm)
                            ),
                        ));
                    }
                }
            }
        }
    }

    let cat = Arc::new(raw.validate()?);

    // canonical inclusion of the previous stage
    let mut incl_obj = vec![usize::MAX; prev.cat.obj_count()];
    let mut incl_mor = vec![usize::MAX; prev.cat.mor_count()];
    for (o, name) in prev.cat.objects() {
        match &prev.op_objs[o] {
            None => {
                // variable at stage >= 1 is already prefixed; at stage 0 the
                // bare name gets the prefix now
                let target_name = if prev.inclusion.is_none() {
                    var_obj(name)
                } else {
                    name.to_string()
                };
                incl_obj[o] = cat.obj_ix(&target_name).unwrap();
            }
            Some((oi, ro, gamma)) => {
                let decl = &sig.ops[*oi];
                let lifted = prev
                    .inclusion
                    .as_ref()
                    .expect("op cells only appear past stage 0")
                    .compose_with(gamma)?;
                // find the object named for this (result obj, lifted functor)
                let pos = meta_objs
                    .iter()
                    .find(|(_, o2, r2, f2)| {
                        o2 == oi
                            && r2 == ro
                            && f2.obj_maps() == lifted.obj_maps()
                            && f2.mor_maps() == lifted.mor_maps()
                    })
                    .map(|(n, _, _, _)| n.clone())
                    .expect("lifted argument enumerated");
                let _ = decl;
                incl_obj[o] = cat.obj_ix(&pos).unwrap();
            }
        }
    }
    for (m, name) in prev.cat.morphisms() {
        match &prev.op_mors[m] {
            None => {
                let target_name = if prev.inclusion.is_none() {
                    var_mor(name)
                } else {
                    name.to_string()
                };
                incl_mor[m] = cat.mor_ix(&target_name).unwrap();
            }
            Some((oi, rm, alpha)) => {
                let incl = prev.inclusion.as_ref().unwrap();
                let src = incl.compose_with(&alpha.source)?;
                let tgt = incl.compose_with(&alpha.target)?;
                let comps: Vec<usize> = alpha
                    .components()
                    .iter()
                    .map(|&cmp| incl.mor(cmp))
                    .collect();
                let lifted = NatTransformation::new(src, tgt, comps)?;
                let pos = meta_mors
                    .iter()
                    .find(|(_, o2, r2, t2)| {
                        o2 == oi
                            && r2 == rm
                            && t2.source.obj_maps() == lifted.source.obj_maps()
                            && t2.source.mor_maps() == lifted.source.mor_maps()
                            && t2.target.obj_maps() == lifted.target.obj_maps()
                            && t2.target.mor_maps() == lifted.target.mor_maps()
                            && t2.components() == lifted.components()
                    })
                    .map(|(n, _, _, _)| n.clone())
                    .expect("lifted transformation enumerated");
                incl_mor[m] = cat.mor_ix(&pos).unwrap();
            }
        }
    }
    let inclusion = Functor::new(prev.cat.clone(), cat.clone(), incl_obj, incl_mor)?;

    // align metadata with sorted indices
    let mut op_objs = vec![None; cat.obj_count()];
    for (name, oi, ro, f) in meta_objs {
        op_objs[cat.obj_ix(&name).unwrap()] = Some((oi, ro, f));
    }
    let mut op_mors = vec![None; cat.mor_count()];
    for (name, oi, rm, t) in meta_mors {
        op_mors[cat.mor_ix(&name).unwrap()] = Some((oi, rm, t));
    }

    Ok(DerivedOps {
        cat,
        inclusion: Some(inclusion),
        op_objs,
        op_mors,
    })
}

/// Extends an environment to the materialized stage-`n` category: variables
/// evaluate through `env`, operation cells through the algebra structure.
pub fn extend_algebra(
    alg: &Algebra,
    sig: &Signature,
    c: &Arc<FinCategory>,
    n: usize,
    env: &Functor,
    ceiling: usize,
) -> Result<(DerivedOps, Functor), AlgError> {
    let derived = derived_ops(sig, c, n, ceiling)?;
    let ext = extend_to(alg, sig, c, &derived, env, n)?;
    Ok((derived, ext))
}

fn extend_to(
    alg: &Algebra,
    sig: &Signature,
    c: &Arc<FinCategory>,
    derived: &DerivedOps,
    env: &Functor,
    n: usize,
) -> Result<Functor, AlgError> {
    if n == 0 {
        return Ok(env.clone());
    }
    let prev = derived_ops(sig, c, n - 1, usize::MAX)?;
    let prev_ext = extend_to(alg, sig, c, &prev, env, n - 1)?;
    let mut obj_map = vec![usize::MAX; derived.cat.obj_count()];
    for (o, name) in derived.cat.objects() {
        match &derived.op_objs[o] {
            None => {
                let bare = name.strip_prefix("v:").unwrap_or(name);
                let i = c.obj_ix(bare).ok_or_else(|| {
                    AlgError::IllFormedTerm(format!("variable object `{bare}`"))
                })?;
                obj_map[o] = env.obj(i);
            }
            Some((oi, ro, gamma)) => {
                let decl = &sig.ops[*oi];
                let st = alg
                    .ops
                    .get(&decl.name)
                    .ok_or_else(|| AlgError::UnknownOp(decl.name.clone()))?;
                let arg = prev_ext.compose_with(gamma)?;
                let gi = st.arity_fc.functor_index(&arg).ok_or_else(|| {
                    AlgError::IllFormedTerm("argument functor not enumerated".into())
                })?;
                let img = st
                    .result_fc
                    .functor_at_obj(st.nu.obj(st.arity_fc.functor_obj(gi)));
                obj_map[o] = img.obj(*ro);
            }
        }
    }
    let mut mor_map = vec![usize::MAX; derived.cat.mor_count()];
    for (m, name) in derived.cat.morphisms() {
        match &derived.op_mors[m] {
            None => {
                let bare = name.strip_prefix("v:").unwrap_or(name);
                let i = c.mor_ix(bare).ok_or_else(|| {
                    AlgError::IllFormedTerm(format!("variable morphism `{bare}`"))
                })?;
                mor_map[m] = env.mor(i);
            }
            Some((oi, rm, alpha)) => {
                let decl = &sig.ops[*oi];
                let st = alg.ops.get(&decl.name).unwrap();
                let src = prev_ext.compose_with(&alpha.source)?;
                let tgt = prev_ext.compose_with(&alpha.target)?;
                let comps: Vec<usize> = alpha
                    .components()
                    .iter()
                    .map(|&cmp| prev_ext.mor(cmp))
                    .collect();
                let pushed = NatTransformation::new(src, tgt, comps)?;
                let ai = st.arity_fc.nat_index(&pushed).ok_or_else(|| {
                    AlgError::IllFormedTerm("argument transformation not enumerated".into())
                })?;
                let beta = st.result_fc.nat_at_mor(st.nu.mor(st.arity_fc.nat_mor(ai)));
                let cod_component = beta.component(decl.result.cod(*rm));
                let src_img = beta.source.mor(*rm);
                mor_map[m] = alg
                    .carrier
                    .compose(cod_component, src_img)
                    .expect("evaluation composite");
            }
        }
    }
    Ok(Functor::new(
        derived.cat.clone(),
        alg.carrier.clone(),
        obj_map,
        mor_map,
    )?)
}

// ---------------------------------------------------------------------------
// The presentation of finitely complete categories
// ---------------------------------------------------------------------------

use crate::fincat::{is_limiting, present_category, shapes, Cone, Presentation};

fn present(vertices: &[&str], arrows: &[(&str, &str, &str)], relations: &[(&[&str], &[&str])]) -> Arc<FinCategory> {
    Arc::new(
        present_category(&Presentation {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            arrows: arrows
                .iter()
                .map(|(n, d, c)| (n.to_string(), d.to_string(), c.to_string()))
                .collect(),
            relations: relations
                .iter()
                .map(|(l, r)| {
                    (
                        l.iter().map(|s| s.to_string()).collect(),
                        r.iter().map(|s| s.to_string()).collect(),
                    )
                })
                .collect(),
            saturation_bound: 6,
        })
        .expect("fixed presentation"),
    )
}

/// Arity of the terminal-map operation: a single object.
pub fn lex_arity_object() -> Arc<FinCategory> {
    Arc::new(shapes::discrete(&["v"]))
}

/// Arity of the pullback-square operation: a cospan.
pub fn lex_arity_cospan() -> Arc<FinCategory> {
    Arc::new(shapes::walking_cospan())
}

/// Arity of the gap-map operation: a commuting square viewed as a cone over
/// its underlying cospan.
pub fn lex_arity_cone() -> Arc<FinCategory> {
    present(
        &["v", "x0", "x1", "x2"],
        &[
            ("l1", "v", "x1"),
            ("l2", "v", "x2"),
            ("f1", "x1", "x0"),
            ("f2", "x2", "x0"),
        ],
        &[(&["l1", "f1"], &["l2", "f2"])],
    )
}

/// Result of the terminal-object operation: one object.
pub fn lex_result_terminal() -> Arc<FinCategory> {
    Arc::new(shapes::discrete(&["t"]))
}

/// Result of the terminal-map operation: a walking arrow `d -> c`.
pub fn lex_result_bang() -> Arc<FinCategory> {
    Arc::new(shapes::free(&["d", "c"], &[("arr", "d", "c")]))
}

/// Result of the pullback-square operation: a commuting square on the cospan.
pub fn lex_result_square() -> Arc<FinCategory> {
    present(
        &["pb", "x0", "x1", "x2"],
        &[
            ("p1", "pb", "x1"),
            ("p2", "pb", "x2"),
            ("f1", "x1", "x0"),
            ("f2", "x2", "x0"),
        ],
        &[(&["p1", "f1"], &["p2", "f2"])],
    )
}

/// Result of the gap-map operation: the input cone, the chosen square, and
/// the gap map commuting with both projections.
pub fn lex_result_gap() -> Arc<FinCategory> {
    present(
        &["v", "pb", "x0", "x1", "x2"],
        &[
            ("l1", "v", "x1"),
            ("l2", "v", "x2"),
            ("p1", "pb", "x1"),
            ("p2", "pb", "x2"),
            ("f1", "x1", "x0"),
            ("f2", "x2", "x0"),
            ("gap", "v", "pb"),
        ],
        &[
            (&["p1", "f1"], &["p2", "f2"]),
            (&["gap", "p1"], &["l1"]),
            (&["gap", "p2"], &["l2"]),
        ],
    )
}

fn eta_term_diagram(c: &FinCategory) -> TermDiagram {
    TermDiagram {
        objs: c
            .objects()
            .map(|(_, o)| (o.to_string(), ObjTerm::var(o)))
            .collect(),
        mors: c
            .morphisms()
            .filter(|(m, _)| !c.is_identity(*m))
            .map(|(_, m)| (m.to_string(), MorTerm::var(m)))
            .collect(),
    }
}

fn identity_nat_terms(c: &FinCategory) -> BTreeMap<String, MorTerm> {
    c.objects()
        .map(|(o, name)| {
            (
                name.to_string(),
                MorTerm::var(c.mor_name(c.identity_of(o))),
            )
        })
        .collect()
}

/// The presentation of finitely complete categories: a terminal-object
/// operation, a terminal-map operation, a pullback-square operation, and a
/// gap-map operation, with equations pinning boundaries, forcing the chosen
/// terminal map at the terminal object to be the identity, and forcing the
/// gap map of the chosen square itself to be the identity. Under `Grpd`
/// enrichment the functoriality square of the terminal map is emitted as an
/// explicit equation as well.
pub fn lex_signature(enrichment: Enrichment) -> (Signature, EquationSet) {
    let c_obj = lex_arity_object();
    let c_arr = Arc::new(shapes::walking_arrow());
    let c_empty = Arc::new(shapes::empty());
    let c_cospan = lex_arity_cospan();
    let c_cone = lex_arity_cone();
    let sig = Signature {
        ops: vec![
            OpDecl {
                name: "t/obj".into(),
                arity: c_empty.clone(),
                result: lex_result_terminal(),
            },
            OpDecl {
                name: "t/arr".into(),
                arity: c_obj.clone(),
                result: lex_result_bang(),
            },
            OpDecl {
                name: "pb/obj".into(),
                arity: c_cospan.clone(),
                result: lex_result_square(),
            },
            OpDecl {
                name: "pb/gap".into(),
                arity: c_cone.clone(),
                result: lex_result_gap(),
            },
        ],
        enrichment,
    };

    // terms over the walking arrow a --f--> b
    let src_a: TermDiagram = TermDiagram {
        objs: [("v".to_string(), ObjTerm::var("a"))].into(),
        mors: BTreeMap::new(),
    };
    let tgt_b: TermDiagram = TermDiagram {
        objs: [("v".to_string(), ObjTerm::var("b"))].into(),
        mors: BTreeMap::new(),
    };
    let nat_f: BTreeMap<String, MorTerm> = [("v".to_string(), MorTerm::var("f"))].into();
    let bang_edge = |edge: &str| MorTerm::Op {
        op: "t/arr".into(),
        result_mor: edge.into(),
        src: src_a.clone(),
        tgt: tgt_b.clone(),
        nat: nat_f.clone(),
    };
    let terminal_obj = ObjTerm::Op {
        op: "t/obj".into(),
        result_obj: "t".into(),
        arg: TermDiagram::empty(),
    };
    let terminal_id = MorTerm::Op {
        op: "t/obj".into(),
        result_mor: "id_t".into(),
        src: TermDiagram::empty(),
        tgt: TermDiagram::empty(),
        nat: BTreeMap::new(),
    };
    let mut arr_equations = vec![
        Equation::Mor {
            name: "t/eq/f-dom".into(),
            lhs: bang_edge("id_d"),
            rhs: MorTerm::var("f"),
        },
        Equation::Mor {
            name: "t/eq/f-cod".into(),
            lhs: bang_edge("id_c"),
            rhs: terminal_id.clone(),
        },
    ];
    if enrichment == Enrichment::Grpd {
        // the functoriality square collapses to a single product cell on
        // both sides once the structure map is a genuine functor; emitting
        // it keeps the obligation on record for the weaker enrichment
        arr_equations.push(Equation::Mor {
            name: "t/eq/functorial".into(),
            lhs: bang_edge("arr"),
            rhs: bang_edge("arr"),
        });
    }

    // the no-free-variable uniqueness trick: the terminal map at the
    // terminal object is the identity
    let tt = TermDiagram {
        objs: [("v".to_string(), terminal_obj.clone())].into(),
        mors: BTreeMap::new(),
    };
    let unit_eq = Equation::Mor {
        name: "t/eq/unit".into(),
        lhs: MorTerm::Op {
            op: "t/arr".into(),
            result_mor: "arr".into(),
            src: tt.clone(),
            tgt: tt,
            nat: [("v".to_string(), terminal_id.clone())].into(),
        },
        rhs: terminal_id,
    };

    // square cells over the cospan
    let eta_cospan = eta_term_diagram(&c_cospan);
    let id_cospan = identity_nat_terms(&c_cospan);
    let square_mor = |cell: &str| MorTerm::Op {
        op: "pb/obj".into(),
        result_mor: cell.into(),
        src: eta_cospan.clone(),
        tgt: eta_cospan.clone(),
        nat: id_cospan.clone(),
    };
    let square_obj = |cell: &str| ObjTerm::Op {
        op: "pb/obj".into(),
        result_obj: cell.into(),
        arg: eta_cospan.clone(),
    };

    // the chosen square viewed as a cone over the cospan
    let square_as_cone = TermDiagram {
        objs: [
            ("v".to_string(), square_obj("pb")),
            ("x0".to_string(), square_obj("x0")),
            ("x1".to_string(), square_obj("x1")),
            ("x2".to_string(), square_obj("x2")),
        ]
        .into(),
        mors: [
            ("l1".to_string(), square_mor("p1")),
            ("l2".to_string(), square_mor("p2")),
            ("f1".to_string(), square_mor("f1")),
            ("f2".to_string(), square_mor("f2")),
            ("l1.f1".to_string(), square_mor("p1.f1")),
        ]
        .into(),
    };
    let square_cone_ids: BTreeMap<String, MorTerm> = [
        ("v".to_string(), square_mor("id_pb")),
        ("x0".to_string(), square_mor("id_x0")),
        ("x1".to_string(), square_mor("id_x1")),
        ("x2".to_string(), square_mor("id_x2")),
    ]
    .into();
    let cospan_equations = vec![
        Equation::Mor {
            name: "pb/eq/east".into(),
            lhs: square_mor("f1"),
            rhs: MorTerm::var("f1"),
        },
        Equation::Mor {
            name: "pb/eq/west".into(),
            lhs: square_mor("f2"),
            rhs: MorTerm::var("f2"),
        },
        // the gap map of the chosen square itself is the identity
        Equation::Mor {
            name: "pb/eq/gap-unit".into(),
            lhs: MorTerm::Op {
                op: "pb/gap".into(),
                result_mor: "gap".into(),
                src: square_as_cone.clone(),
                tgt: square_as_cone,
                nat: square_cone_ids,
            },
            rhs: square_mor("id_pb"),
        },
    ];

    // gap-diagram cells over the cone arity
    let eta_cone = eta_term_diagram(&c_cone);
    let id_cone = identity_nat_terms(&c_cone);
    let gap_mor = |cell: &str| MorTerm::Op {
        op: "pb/gap".into(),
        result_mor: cell.into(),
        src: eta_cone.clone(),
        tgt: eta_cone.clone(),
        nat: id_cone.clone(),
    };
    // the cone's underlying cospan
    let rho = TermDiagram {
        objs: [
            ("x0".to_string(), ObjTerm::var("x0")),
            ("x1".to_string(), ObjTerm::var("x1")),
            ("x2".to_string(), ObjTerm::var("x2")),
        ]
        .into(),
        mors: [
            ("f1".to_string(), MorTerm::var("f1")),
            ("f2".to_string(), MorTerm::var("f2")),
        ]
        .into(),
    };
    let rho_ids: BTreeMap<String, MorTerm> = [
        ("x0".to_string(), MorTerm::var("id_x0")),
        ("x1".to_string(), MorTerm::var("id_x1")),
        ("x2".to_string(), MorTerm::var("id_x2")),
    ]
    .into();
    let restricted_square_mor = |cell: &str| MorTerm::Op {
        op: "pb/obj".into(),
        result_mor: cell.into(),
        src: rho.clone(),
        tgt: rho.clone(),
        nat: rho_ids.clone(),
    };
    let cone_equations = vec![
        Equation::Mor {
            name: "pb/eq/gap-l1".into(),
            lhs: gap_mor("l1"),
            rhs: MorTerm::var("l1"),
        },
        Equation::Mor {
            name: "pb/eq/gap-l2".into(),
            lhs: gap_mor("l2"),
            rhs: MorTerm::var("l2"),
        },
        Equation::Mor {
            name: "pb/eq/gap-q1".into(),
            lhs: gap_mor("f1"),
            rhs: MorTerm::var("f1"),
        },
        Equation::Mor {
            name: "pb/eq/gap-q2".into(),
            lhs: gap_mor("f2"),
            rhs: MorTerm::var("f2"),
        },
        Equation::Mor {
            name: "pb/eq/gap-p1".into(),
            lhs: gap_mor("p1"),
            rhs: restricted_square_mor("p1"),
        },
        Equation::Mor {
            name: "pb/eq/gap-p2".into(),
            lhs: gap_mor("p2"),
            rhs: restricted_square_mor("p2"),
        },
    ];

    let eqs = EquationSet {
        groups: vec![
            (c_arr, arr_equations),
            (c_empty, vec![unit_eq]),
            (c_cospan, cospan_equations),
            (c_cone, cone_equations),
        ],
    };
    (sig, eqs)
}

// ---------------------------------------------------------------------------
// Canonical algebra on a finitely complete carrier
// ---------------------------------------------------------------------------

fn cospan_key(f: &Functor) -> (Vec<usize>, Vec<usize>) {
    (f.obj_maps().to_vec(), f.mor_maps().to_vec())
}

/// Restriction of a cone functor to its underlying cospan.
fn cone_to_cospan(
    cone_arity: &Arc<FinCategory>,
    cospan_arity: &Arc<FinCategory>,
    sigma: &Functor,
) -> Functor {
    let mut obj_map = vec![usize::MAX; cospan_arity.obj_count()];
    for (o, name) in cospan_arity.objects() {
        obj_map[o] = sigma.obj(cone_arity.obj_ix(name).unwrap());
    }
    let mut mor_map = vec![usize::MAX; cospan_arity.mor_count()];
    for (m, name) in cospan_arity.morphisms() {
        let source_name = if cospan_arity.is_identity(m) {
            format!("id_{}", cospan_arity.obj_name(cospan_arity.dom(m)))
        } else {
            name.to_string()
        };
        mor_map[m] = sigma.mor(cone_arity.mor_ix(&source_name).unwrap());
    }
    Functor::new(
        cospan_arity.clone(),
        sigma.target.clone(),
        obj_map,
        mor_map,
    )
    .expect("restriction of a cone to its cospan")
}

/// Searches the carrier for canonical finite-limit structure: a terminal
/// object, a certified pullback square per cospan, and gap maps per cone.
/// Returns `None` when the carrier is not finitely complete.
pub fn lex_algebra(sig: &Signature, carrier: &Arc<FinCategory>) -> Result<Option<Algebra>, AlgError> {
    let terminal = match carrier.terminal_objects().first() {
        Some(&t) => t,
        None => return Ok(None),
    };
    let bang = |x: usize| carrier.hom(x, terminal)[0];

    let c_cospan = lex_arity_cospan();
    let c_cone = lex_arity_cone();
    let (sx0, sx1, sx2) = (
        c_cospan.obj_ix("x0").unwrap(),
        c_cospan.obj_ix("x1").unwrap(),
        c_cospan.obj_ix("x2").unwrap(),
    );

    // chosen pullback per cospan, certified by the exhaustive limit check
    let mut pullbacks: BTreeMap<(Vec<usize>, Vec<usize>), (usize, usize, usize)> = BTreeMap::new();
    for cospan in enumerate_functors(&c_cospan, carrier) {
        let (o1, o2) = (cospan.obj(sx1), cospan.obj(sx2));
        let mut found = None;
        'search: for apex in 0..carrier.obj_count() {
            for p1 in carrier.hom(apex, o1) {
                for p2 in carrier.hom(apex, o2) {
                    let d1 = carrier.compose(cospan.mor(c_cospan.mor_ix("f1").unwrap()), p1);
                    let d2 = carrier.compose(cospan.mor(c_cospan.mor_ix("f2").unwrap()), p2);
                    if d1 != d2 {
                        continue;
                    }
                    let mut legs = vec![usize::MAX; 3];
                    legs[sx0] = d1.unwrap();
                    legs[sx1] = p1;
                    legs[sx2] = p2;
                    let cone = match Cone::new(cospan.clone(), apex, legs) {
                        Ok(c) => c,
                        Err(_) => continue,
                    };
                    if is_limiting(&cone)?.is_limiting() {
                        found = Some((apex, p1, p2));
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(data) => {
                pullbacks.insert(cospan_key(&cospan), data);
            }
            None => return Ok(None),
        }
    }

    // the unique mediator between chosen pullbacks along a cospan map
    let mediator = |src_key: &(Vec<usize>, Vec<usize>),
                    tgt_key: &(Vec<usize>, Vec<usize>),
                    u1: usize,
                    u2: usize|
     -> usize {
        let (p, p1, p2) = pullbacks[src_key];
        let (q, q1, q2) = pullbacks[tgt_key];
        let wanted1 = carrier.compose(u1, p1).unwrap();
        let wanted2 = carrier.compose(u2, p2).unwrap();
        let hits: Vec<usize> = carrier
            .hom(p, q)
            .into_iter()
            .filter(|&m| {
                carrier.compose(q1, m) == Some(wanted1) && carrier.compose(q2, m) == Some(wanted2)
            })
            .collect();
        assert_eq!(hits.len(), 1, "chosen pullback admits a unique mediator");
        hits[0]
    };

    let r_term = lex_result_terminal();
    let r_bang = lex_result_bang();
    let r_sq = lex_result_square();
    let r_gap = lex_result_gap();

    let build_by_names = |result: &Arc<FinCategory>,
                          objs: &BTreeMap<&str, usize>,
                          mors: &BTreeMap<&str, usize>|
     -> Functor {
        let obj_map: Vec<usize> = (0..result.obj_count())
            .map(|o| objs[result.obj_name(o)])
            .collect();
        let mor_map: Vec<usize> = (0..result.mor_count())
            .map(|m| {
                let name = result.mor_name(m);
                if let Some(&v) = mors.get(name) {
                    v
                } else if result.is_identity(m) {
                    carrier.identity_of(obj_map[result.dom(m)])
                } else {
                    // composite cell: fold its generating path through mors
                    let mut acc: Option<usize> = None;
                    for part in name.split('.') {
                        let step = mors[part];
                        acc = Some(match acc {
                            None => step,
                            Some(a) => carrier.compose(step, a).expect("path composes"),
                        });
                    }
                    acc.unwrap()
                }
            })
            .collect();
        Functor::new(result.clone(), carrier.clone(), obj_map, mor_map)
            .expect("canonical structure diagram")
    };

    let algebra = Algebra::from_assignments(
        sig,
        carrier,
        |decl, f| match decl.name.as_str() {
            "t/obj" => Ok(build_by_names(&r_term, &[("t", terminal)].into(), &BTreeMap::new())),
            "t/arr" => {
                let x = f.obj(0);
                Ok(build_by_names(
                    &r_bang,
                    &[("d", x), ("c", terminal)].into(),
                    &[("arr", bang(x))].into(),
                ))
            }
            "pb/obj" => {
                let (p, p1, p2) = pullbacks[&cospan_key(f)];
                Ok(build_by_names(
                    &r_sq,
                    &[
                        ("pb", p),
                        ("x0", f.obj(sx0)),
                        ("x1", f.obj(sx1)),
                        ("x2", f.obj(sx2)),
                    ]
                    .into(),
                    &[
                        ("p1", p1),
                        ("p2", p2),
                        ("f1", f.mor(c_cospan.mor_ix("f1").unwrap())),
                        ("f2", f.mor(c_cospan.mor_ix("f2").unwrap())),
                    ]
                    .into(),
                ))
            }
            "pb/gap" => {
                let cospan = cone_to_cospan(&c_cone, &c_cospan, f);
                let (p, p1, p2) = pullbacks[&cospan_key(&cospan)];
                let apex = f.obj(c_cone.obj_ix("v").unwrap());
                let l1 = f.mor(c_cone.mor_ix("l1").unwrap());
                let l2 = f.mor(c_cone.mor_ix("l2").unwrap());
                let gap: Vec<usize> = carrier
                    .hom(apex, p)
                    .into_iter()
                    .filter(|&m| {
                        carrier.compose(p1, m) == Some(l1) && carrier.compose(p2, m) == Some(l2)
                    })
                    .collect();
                assert_eq!(gap.len(), 1, "chosen pullback admits a unique gap map");
                Ok(build_by_names(
                    &r_gap,
                    &[
                        ("v", apex),
                        ("pb", p),
                        ("x0", f.obj(c_cone.obj_ix("x0").unwrap())),
                        ("x1", f.obj(c_cone.obj_ix("x1").unwrap())),
                        ("x2", f.obj(c_cone.obj_ix("x2").unwrap())),
                    ]
                    .into(),
                    &[
                        ("l1", l1),
                        ("l2", l2),
                        ("p1", p1),
                        ("p2", p2),
                        ("f1", f.mor(c_cone.mor_ix("f1").unwrap())),
                        ("f2", f.mor(c_cone.mor_ix("f2").unwrap())),
                        ("gap", gap[0]),
                    ]
                    .into(),
                ))
            }
            other => Err(AlgError::UnknownOp(other.to_string())),
        },
        |decl, t| {
            let build_nat = |result: &Arc<FinCategory>,
                             src: Functor,
                             tgt: Functor,
                             comps: BTreeMap<&str, usize>|
             -> NatTransformation {
                let components: Vec<usize> = (0..result.obj_count())
                    .map(|o| comps[result.obj_name(o)])
                    .collect();
                NatTransformation::new(src, tgt, components)
                    .expect("canonical structure transformation")
            };
            match decl.name.as_str() {
                "t/obj" => {
                    let img = build_by_names(&r_term, &[("t", terminal)].into(), &BTreeMap::new());
                    Ok(build_nat(
                        &r_term,
                        img.clone(),
                        img,
                        [("t", carrier.identity_of(terminal))].into(),
                    ))
                }
                "t/arr" => {
                    let (x, y) = (t.source.obj(0), t.target.obj(0));
                    let u = t.component(0);
                    let src = build_by_names(
                        &r_bang,
                        &[("d", x), ("c", terminal)].into(),
                        &[("arr", bang(x))].into(),
                    );
                    let tgt = build_by_names(
                        &r_bang,
                        &[("d", y), ("c", terminal)].into(),
                        &[("arr", bang(y))].into(),
                    );
                    Ok(build_nat(
                        &r_bang,
                        src,
                        tgt,
                        [("d", u), ("c", carrier.identity_of(terminal))].into(),
                    ))
                }
                "pb/obj" => {
                    let (sk, tk) = (cospan_key(&t.source), cospan_key(&t.target));
                    let u0 = t.component(sx0);
                    let u1 = t.component(sx1);
                    let u2 = t.component(sx2);
                    let m = mediator(&sk, &tk, u1, u2);
                    let mk_square = |key: &(Vec<usize>, Vec<usize>), f: &Functor| {
                        let (p, p1, p2) = pullbacks[key];
                        build_by_names(
                            &r_sq,
                            &[
                                ("pb", p),
                                ("x0", f.obj(sx0)),
                                ("x1", f.obj(sx1)),
                                ("x2", f.obj(sx2)),
                            ]
                            .into(),
                            &[
                                ("p1", p1),
                                ("p2", p2),
                                ("f1", f.mor(c_cospan.mor_ix("f1").unwrap())),
                                ("f2", f.mor(c_cospan.mor_ix("f2").unwrap())),
                            ]
                            .into(),
                        )
                    };
                    Ok(build_nat(
                        &r_sq,
                        mk_square(&sk, &t.source),
                        mk_square(&tk, &t.target),
                        [("pb", m), ("x0", u0), ("x1", u1), ("x2", u2)].into(),
                    ))
                }
                "pb/gap" => {
                    let mk_gap = |f: &Functor| {
                        let cospan = cone_to_cospan(&c_cone, &c_cospan, f);
                        let (p, p1, p2) = pullbacks[&cospan_key(&cospan)];
                        let apex = f.obj(c_cone.obj_ix("v").unwrap());
                        let l1 = f.mor(c_cone.mor_ix("l1").unwrap());
                        let l2 = f.mor(c_cone.mor_ix("l2").unwrap());
                        let gap: Vec<usize> = carrier
                            .hom(apex, p)
                            .into_iter()
                            .filter(|&m| {
                                carrier.compose(p1, m) == Some(l1)
                                    && carrier.compose(p2, m) == Some(l2)
                            })
                            .collect();
                        build_by_names(
                            &r_gap,
                            &[
                                ("v", apex),
                                ("pb", p),
                                ("x0", f.obj(c_cone.obj_ix("x0").unwrap())),
                                ("x1", f.obj(c_cone.obj_ix("x1").unwrap())),
                                ("x2", f.obj(c_cone.obj_ix("x2").unwrap())),
                            ]
                            .into(),
                            &[
                                ("l1", l1),
                                ("l2", l2),
                                ("p1", p1),
                                ("p2", p2),
                                ("f1", f.mor(c_cone.mor_ix("f1").unwrap())),
                                ("f2", f.mor(c_cone.mor_ix("f2").unwrap())),
                                ("gap", gap[0]),
                            ]
                            .into(),
                        )
                    };
                    let sk = cospan_key(&cone_to_cospan(&c_cone, &c_cospan, &t.source));
                    let tk = cospan_key(&cone_to_cospan(&c_cone, &c_cospan, &t.target));
                    let m = mediator(
                        &sk,
                        &tk,
                        t.component(c_cone.obj_ix("x1").unwrap()),
                        t.component(c_cone.obj_ix("x2").unwrap()),
                    );
                    Ok(build_nat(
                        &r_gap,
                        mk_gap(&t.source),
                        mk_gap(&t.target),
                        [
                            ("v", t.component(c_cone.obj_ix("v").unwrap())),
                            ("pb", m),
                            ("x0", t.component(c_cone.obj_ix("x0").unwrap())),
                            ("x1", t.component(c_cone.obj_ix("x1").unwrap())),
                            ("x2", t.component(c_cone.obj_ix("x2").unwrap())),
                        ]
                        .into(),
                    ))
                }
                other => Err(AlgError::UnknownOp(other.to_string())),
            }
        },
    )?;
    Ok(Some(algebra))
}

/// Enumerates every algebra structure for `sig` on `carrier`: the full
/// product over operations of all functors between the materialized functor
/// categories. Only usable on very small carriers; `cap` bounds the count.
pub fn enumerate_algebras(
    sig: &Signature,
    carrier: &Arc<FinCategory>,
    cap: usize,
) -> Result<Vec<Algebra>, AlgError> {
    let mut per_op: Vec<(FunctorCategory, FunctorCategory, Vec<Functor>)> = Vec::new();
    let mut total: usize = 1;
    for decl in &sig.ops {
        let arity_fc = functor_category(&decl.arity, carrier)?;
        let result_fc = functor_category(&decl.result, carrier)?;
        let nus = enumerate_functors(&arity_fc.cat, &result_fc.cat);
        total = total.saturating_mul(nus.len());
        if total > cap {
            return Err(AlgError::GuardrailExceeded {
                count: total,
                ceiling: cap,
            });
        }
        per_op.push((arity_fc, result_fc, nus));
    }
    let mut out = Vec::new();
    let mut counter = vec![0usize; sig.ops.len()];
    if per_op.iter().any(|(_, _, nus)| nus.is_empty()) {
        return Ok(out);
    }
    loop {
        let mut ops = BTreeMap::new();
        for (k, decl) in sig.ops.iter().enumerate() {
            let (arity_fc, result_fc, nus) = &per_op[k];
            ops.insert(
                decl.name.clone(),
                OpStructure {
                    arity_fc: arity_fc.clone(),
                    result_fc: result_fc.clone(),
                    nu: nus[counter[k]].clone(),
                },
            );
        }
        out.push(Algebra {
            carrier: carrier.clone(),
            ops,
        });
        let mut k = sig.ops.len();
        let mut done = true;
        while k > 0 {
            k -= 1;
            counter[k] += 1;
            if counter[k] < per_op[k].2.len() {
                done = false;
                break;
            }
            counter[k] = 0;
        }
        if done || sig.ops.is_empty() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(c: FinCategory) -> Arc<FinCategory> {
        Arc::new(c)
    }

    fn terminal_cat() -> Arc<FinCategory> {
        arc(shapes::point())
    }

    #[test]
    fn empty_signature_derived_ops_are_the_base() {
        let sig = Signature::empty(Enrichment::Cat);
        let c = arc(shapes::walking_cospan());
        for n in 0..3 {
            let d = derived_ops(&sig, &c, n, 10_000).unwrap();
            assert_eq!(d.cat.obj_count(), c.obj_count());
            assert_eq!(d.cat.mor_count(), c.mor_count());
        }
        // inclusions injective on objects
        let d2 = derived_ops(&sig, &c, 2, 10_000).unwrap();
        let incl = d2.inclusion.unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for o in 0..incl.source.obj_count() {
            assert!(seen.insert(incl.obj(o)));
        }
    }

    #[test]
    fn lex_stage_one_over_terminal_golden_counts() {
        // hand expansion of the stage formula at the terminal category:
        // variables contribute (1 obj, 1 mor); each operation contributes
        // (result objects, result morphisms) x (one argument functor):
        //   t/obj:  1 /  1
        //   t/arr:  2 /  3
        //   pb/obj: 4 /  9
        //   pb/gap: 5 / 14
        // totals: 1+1+2+4+5 = 13 objects, 1+1+3+9+14 = 28 morphisms
        let (sig, _) = lex_signature(Enrichment::Cat);
        let d = derived_ops(&sig, &terminal_cat(), 1, 10_000).unwrap();
        assert_eq!(d.cat.obj_count(), 13);
        assert_eq!(d.cat.mor_count(), 28);
        assert!(d.cat.revalidate().is_ok());
    }

    #[test]
    fn lex_stages_over_empty_context() {
        let (sig, _) = lex_signature(Enrichment::Cat);
        let empty = arc(shapes::empty());
        // stage 1: only the terminal-object cell survives (no functors from
        // nonempty arities into the empty stage 0)
        let d1 = derived_ops(&sig, &empty, 1, 10_000).unwrap();
        assert_eq!(d1.cat.obj_count(), 1);
        assert_eq!(d1.cat.mor_count(), 1);
        // stage 2: stage 1 is a point, so every arity has exactly one
        // argument: 1 + 2 + 4 + 5 objects, 1 + 3 + 9 + 14 morphisms
        let d2 = derived_ops(&sig, &empty, 2, 10_000).unwrap();
        assert_eq!(d2.cat.obj_count(), 12);
        assert_eq!(d2.cat.mor_count(), 27);
        // monotone stages: the canonical map is injective on objects
        let incl = d2.inclusion.unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for o in 0..incl.source.obj_count() {
            assert!(seen.insert(incl.obj(o)));
        }
    }

    #[test]
    fn derived_ops_guardrail() {
        let (sig, _) = lex_signature(Enrichment::Cat);
        let err = derived_ops(&sig, &terminal_cat(), 1, 5).unwrap_err();
        assert!(matches!(err, AlgError::GuardrailExceeded { .. }));
    }

    #[test]
    fn extend_algebra_stage_zero_is_env() {
        let (sig, _) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::divisor_poset(6));
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let c = arc(shapes::walking_arrow());
        let env = enumerate_functors(&c, &carrier).into_iter().next().unwrap();
        let (_, ext) = extend_algebra(&alg, &sig, &c, 0, &env, 10_000).unwrap();
        assert_eq!(ext, env);
    }

    #[test]
    fn extend_algebra_terminal_cell_evaluates_to_top() {
        // the divisor poset of 12 is a meet-semilattice with top: the
        // terminal-object cell evaluates to 12
        let (sig, _) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::divisor_poset(12));
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let env = Functor::new(arc(shapes::empty()), carrier.clone(), vec![], vec![]).unwrap();
        let (derived, ext) =
            extend_algebra(&alg, &sig, &arc(shapes::empty()), 1, &env, 10_000).unwrap();
        let t_cell = derived
            .cat
            .obj_ix("o:t/obj:t:0")
            .expect("terminal operation cell");
        assert_eq!(carrier.obj_name(ext.obj(t_cell)), "12");
    }

    #[test]
    fn extend_agrees_with_term_evaluation() {
        let (sig, _) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::divisor_poset(6));
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let empty = arc(shapes::empty());
        let env = Functor::new(empty.clone(), carrier.clone(), vec![], vec![]).unwrap();
        let term = ObjTerm::Op {
            op: "t/obj".into(),
            result_obj: "t".into(),
            arg: TermDiagram::empty(),
        };
        let via_term = eval_obj_term(&alg, &sig, &env, &term).unwrap();
        let (derived, ext) = extend_algebra(&alg, &sig, &empty, 1, &env, 10_000).unwrap();
        let cell = derived.cat.obj_ix("o:t/obj:t:0").unwrap();
        assert_eq!(ext.obj(cell), via_term);
    }

    #[test]
    fn one_object_category_satisfies_lex() {
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let carrier = terminal_cat();
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let report = satisfies(&alg, &sig, &eqs).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
    }

    #[test]
    fn divisor_poset_satisfies_lex() {
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::divisor_poset(12));
        let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
        let report = satisfies(&alg, &sig, &eqs).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures.first());
    }

    #[test]
    fn grpd_enrichment_emits_functoriality_equation() {
        let (_, eqs_cat) = lex_signature(Enrichment::Cat);
        let (sig_g, eqs_grpd) = lex_signature(Enrichment::Grpd);
        let names = |eqs: &EquationSet| -> Vec<String> {
            eqs.groups
                .iter()
                .flat_map(|(_, g)| g.iter().map(|e| e.name().to_string()))
                .collect()
        };
        assert!(!names(&eqs_cat).contains(&"t/eq/functorial".to_string()));
        assert!(names(&eqs_grpd).contains(&"t/eq/functorial".to_string()));
        // trivially satisfied once the structure map is a strict functor
        let carrier = arc(shapes::divisor_poset(6));
        let alg = lex_algebra(&sig_g, &carrier).unwrap().unwrap();
        assert!(satisfies(&alg, &sig_g, &eqs_grpd).unwrap().passed());
    }

    #[test]
    fn discrete_two_admits_no_satisfying_algebra() {
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::discrete(&["A", "B"]));
        assert!(lex_algebra(&sig, &carrier).unwrap().is_none());
        // exhaustive: every algebra structure fails some equation
        let all = enumerate_algebras(&sig, &carrier, 100_000).unwrap();
        assert!(!all.is_empty());
        for alg in &all {
            let report = satisfies(alg, &sig, &eqs).unwrap();
            assert!(!report.passed());
        }
    }

    #[test]
    fn uniqueness_trick_forces_unique_terminal_maps() {
        // in a satisfying algebra every map into the chosen terminal object
        // equals the chosen terminal map
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        for carrier in [
            arc(shapes::divisor_poset(12)),
            terminal_cat(),
            arc(shapes::walking_arrow()),
        ] {
            let alg = lex_algebra(&sig, &carrier).unwrap().unwrap();
            assert!(satisfies(&alg, &sig, &eqs).unwrap().passed());
            let t_struct = &alg.ops["t/obj"];
            let t_obj = t_struct
                .result_fc
                .functor_at_obj(t_struct.nu.obj(t_struct.arity_fc.functor_obj(0)))
                .obj(0);
            let arr_struct = &alg.ops["t/arr"];
            let r_bang = lex_result_bang();
            let arr_ix = r_bang.mor_ix("arr").unwrap();
            for (k, f) in arr_struct.arity_fc.functors.iter().enumerate() {
                let x = f.obj(0);
                let img = arr_struct
                    .result_fc
                    .functor_at_obj(arr_struct.nu.obj(arr_struct.arity_fc.functor_obj(k)));
                let chosen = img.mor(arr_ix);
                for cand in carrier.hom(x, t_obj) {
                    assert_eq!(cand, chosen);
                }
            }
        }
    }

    #[test]
    fn satisfies_failures_stable_under_subsets() {
        // failures found on an environment subset are exactly the full-run
        // failures restricted to that subset
        let (sig, eqs) = lex_signature(Enrichment::Cat);
        let carrier = arc(shapes::discrete(&["A", "B"]));
        let alg = enumerate_algebras(&sig, &carrier, 100_000)
            .unwrap()
            .into_iter()
            .next()
            .unwrap();
        let full = satisfies(&alg, &sig, &eqs).unwrap();
        assert!(!full.passed());
        for (gi, (arity, group)) in eqs.groups.iter().enumerate() {
            let envs = enumerate_functors(arity, &carrier);
            for keep in 0..envs.len().min(3) {
                let subset = vec![envs[keep].clone()];
                let mut failures = Vec::new();
                check_equations(&alg, &sig, gi, arity, group, &subset, &[], &mut failures)
                    .unwrap();
                let env_desc = describe_env(&envs[keep]);
                let expected: Vec<&SatFailure> = full
                    .failures
                    .iter()
                    .filter(|f| f.group == gi && f.environment == env_desc)
                    .collect();
                assert_eq!(failures.len(), expected.len());
            }
        }
    }

    #[test]
    fn equation_category_materializes() {
        let (_, eqs) = lex_signature(Enrichment::Cat);
        // group 0 lives at the walking arrow and has two arrow equations
        let e = eqs.equation_category(0).unwrap();
        assert_eq!(e.obj_count(), 4);
        assert_eq!(e.mor_count(), 6);
    }

    #[test]
    fn boundary_of_morphism_terms() {
        let (sig, _) = lex_signature(Enrichment::Cat);
        let c_arr = shapes::walking_arrow();
        let (d, c) = mor_term_boundary(&sig, &c_arr, &MorTerm::var("f")).unwrap();
        assert_eq!(d, ObjTerm::var("a"));
        assert_eq!(c, ObjTerm::var("b"));
    }
}
