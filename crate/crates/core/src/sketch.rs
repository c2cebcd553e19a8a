//! Generalized sketches: a base category equipped with marked quadruples
//! (generators, diagram shape, embedding, realization), model checking into
//! finite sets, and bounded model enumeration.
//!
//! A model is a set-valued functor on the base together with, per marking, a
//! natural isomorphism from the evaluated realization to the functor's own
//! diagram, restricting to the identity on generator images. Realizations
//! are expressions; their obligations surface during evaluation, so a base
//! category can stay free while its markings impose the equations.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{cone_shape, CatError, Cone, FinCategory, Functor};
use crate::finset::{Choosers, FinSetMor, FinSetObj, SetDiagram, SetError};
use crate::lexpr::{
    eta_embed, infer_boundary, validate_obj, Interpretation, LimSpec, MorExpr, ObjExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SketchError {
    #[error("marking `{marking}`: realization of `{cell}` must be the generator itself")]
    EtaViolation { marking: String, cell: String },
    #[error("marking `{marking}`: {reason}")]
    IllTyped { marking: String, reason: String },
    #[error("marking `{marking}`: {0}", .err)]
    InvalidFunctor { marking: String, err: CatError },
    #[error("model does not live on the sketch base")]
    ModelShapeMismatch,
    #[error("enumeration would visit {candidates} functor candidates (ceiling {ceiling})")]
    GuardrailExceeded { candidates: u128, ceiling: usize },
    #[error(transparent)]
    Set(#[from] SetError),
}

/// A marked quadruple: generators `c`, diagram shape `d`, the embedding
/// `j : c -> d`, the realization `k` of `d` by expressions over `c`, and the
/// image `phi : d -> base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking {
    pub name: String,
    pub generators: Arc<FinCategory>,
    pub shape: Arc<FinCategory>,
    pub j: Functor,
    /// realization keyed by shape object
    pub k_obj: BTreeMap<String, ObjExpr>,
    /// realization keyed by shape morphism; identities stay implicit
    pub k_mor: BTreeMap<String, MorExpr>,
    pub phi: Functor,
}

/// A base category with marked quadruples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    pub base: Arc<FinCategory>,
    pub markings: Vec<Marking>,
}

/// Validates the sketch: functors have the right boundaries, realizations
/// type-check, and the realization restricts to the generators along `j`.
pub fn validate_sketch(s: &Sketch) -> Result<(), SketchError> {
    for m in &s.markings {
        let fail_cat = |err: CatError| SketchError::InvalidFunctor {
            marking: m.name.clone(),
            err,
        };
        if m.j.source != m.generators || m.j.target != m.shape {
            return Err(fail_cat(CatError::BoundaryMismatch(
                "embedding must map generators into the shape".into(),
            )));
        }
        if m.phi.source != m.shape || m.phi.target != s.base {
            return Err(fail_cat(CatError::BoundaryMismatch(
                "image must map the shape into the base".into(),
            )));
        }
        m.j.source.revalidate().map_err(fail_cat)?;
        crate::fincat::check_functor(&m.j).map_err(fail_cat)?;
        crate::fincat::check_functor(&m.phi).map_err(fail_cat)?;

        // realization assignments: total and well-typed over the generators
        for (o, name) in m.shape.objects() {
            let Some(e) = m.k_obj.get(name) else {
                return Err(SketchError::IllTyped {
                    marking: m.name.clone(),
                    reason: format!("no realization for shape object `{name}`"),
                });
            };
            validate_obj(&m.generators, e).map_err(|err| SketchError::IllTyped {
                marking: m.name.clone(),
                reason: err.to_string(),
            })?;
            let _ = o;
        }
        for (mm, name) in m.shape.morphisms() {
            if m.shape.is_identity(mm) {
                continue;
            }
            let Some(e) = m.k_mor.get(name) else {
                return Err(SketchError::IllTyped {
                    marking: m.name.clone(),
                    reason: format!("no realization for shape morphism `{name}`"),
                });
            };
            let (d, c) = infer_boundary(&m.generators, e).map_err(|err| SketchError::IllTyped {
                marking: m.name.clone(),
                reason: err.to_string(),
            })?;
            let want_d = &m.k_obj[m.shape.obj_name(m.shape.dom(mm))];
            let want_c = &m.k_obj[m.shape.obj_name(m.shape.cod(mm))];
            if &d != want_d || &c != want_c {
                return Err(SketchError::IllTyped {
                    marking: m.name.clone(),
                    reason: format!("realization of `{name}` has the wrong boundary"),
                });
            }
        }

        // the realization restricts to the generator embedding, syntactically
        let (eta_o, eta_m) = eta_embed(&m.generators);
        for (o, name) in m.generators.objects() {
            let img = m.shape.obj_name(m.j.obj(o));
            if m.k_obj[img] != eta_o[name] {
                return Err(SketchError::EtaViolation {
                    marking: m.name.clone(),
                    cell: name.to_string(),
                });
            }
        }
        for (mm, name) in m.generators.morphisms() {
            if m.generators.is_identity(mm) {
                continue;
            }
            let img_ix = m.j.mor(mm);
            if m.shape.is_identity(img_ix) {
                continue;
            }
            let img = m.shape.mor_name(img_ix);
            if m.k_mor.get(img) != Some(&eta_m[name]) {
                return Err(SketchError::EtaViolation {
                    marking: m.name.clone(),
                    cell: name.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// One natural isomorphism witnessing a marking, keyed by shape object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alpha {
    pub components: BTreeMap<String, FinSetMor>,
}

impl Alpha {
    /// Names of objects whose component is not an identity function.
    pub fn non_identity_components(&self) -> Vec<&str> {
        self.components
            .iter()
            .filter(|(_, m)| !m.is_identity())
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkingOutcome {
    Found { alphas: Vec<Alpha> },
    Failed { obstruction: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkingVerdict {
    pub marking: String,
    pub outcome: MarkingOutcome,
}

impl MarkingVerdict {
    pub fn found(&self) -> bool {
        matches!(self.outcome, MarkingOutcome::Found { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelReport {
    pub verdicts: Vec<MarkingVerdict>,
}

impl ModelReport {
    pub fn all_found(&self) -> bool {
        self.verdicts.iter().all(|v| v.found())
    }
}

/// A model: the base functor plus the witnesses found per marking.
#[derive(Debug, Clone)]
pub struct Model {
    pub diagram: SetDiagram,
    pub report: ModelReport,
}

fn bijections(a: &FinSetObj, b: &FinSetObj) -> Vec<FinSetMor> {
    if a.len() != b.len() {
        return Vec::new();
    }
    let n = a.len();
    let mut used = vec![false; n];
    let mut assign = vec![0usize; n];
    let mut out = Vec::new();
    fn go(
        a: &FinSetObj,
        b: &FinSetObj,
        pos: usize,
        used: &mut Vec<bool>,
        assign: &mut Vec<usize>,
        out: &mut Vec<FinSetMor>,
    ) {
        if pos == a.len() {
            let pairs: Vec<_> = (0..a.len())
                .map(|i| (a.get(i).clone(), b.get(assign[i]).clone()))
                .collect();
            out.push(FinSetMor::new(a.clone(), b.clone(), &pairs).unwrap());
            return;
        }
        for t in 0..b.len() {
            if !used[t] {
                used[t] = true;
                assign[pos] = t;
                go(a, b, pos + 1, used, assign, out);
                used[t] = false;
            }
        }
    }
    if n == 0 {
        out.push(FinSetMor::new(a.clone(), b.clone(), &[]).unwrap());
        return out;
    }
    go(a, b, 0, &mut used, &mut assign, &mut out);
    out
}

/// Checks one marking of a validated sketch against a model functor.
fn check_marking(
    choosers: &Choosers,
    m: &Marking,
    f: &SetDiagram,
) -> Result<MarkingOutcome, SketchError> {
    // interpretation of the generators: f . phi . j
    let c = m.generators.clone();
    let mut objs = Vec::with_capacity(c.obj_count());
    for o in 0..c.obj_count() {
        objs.push(f.objs[m.phi.obj(m.j.obj(o))].clone());
    }
    let mut mors = Vec::with_capacity(c.mor_count());
    for mm in 0..c.mor_count() {
        mors.push(f.mors[m.phi.mor(m.j.mor(mm))].clone());
    }
    let base = match SetDiagram::new(c, objs, mors) {
        Ok(d) => d,
        Err(err) => {
            return Ok(MarkingOutcome::Failed {
                obstruction: format!("generator interpretation is not functorial: {err}"),
            })
        }
    };
    let interp = Interpretation {
        base,
        choosers: choosers.clone(),
    };

    // evaluate the realization cell by cell
    let shape = &m.shape;
    let mut ev_obj: Vec<FinSetObj> = Vec::with_capacity(shape.obj_count());
    for (_, name) in shape.objects() {
        match interp.eval_obj(&m.k_obj[name]) {
            Ok(v) => ev_obj.push(v),
            Err(err) => {
                return Ok(MarkingOutcome::Failed {
                    obstruction: format!("realization of `{name}` failed: {err}"),
                })
            }
        }
    }
    let mut ev_mor: Vec<FinSetMor> = Vec::with_capacity(shape.mor_count());
    for (mm, name) in shape.morphisms() {
        if shape.is_identity(mm) {
            ev_mor.push(FinSetMor::identity(&ev_obj[shape.dom(mm)]));
            continue;
        }
        match interp.eval_mor(&m.k_mor[name]) {
            Ok(v) => ev_mor.push(v),
            Err(err) => {
                return Ok(MarkingOutcome::Failed {
                    obstruction: format!("realization of `{name}` failed: {err}"),
                })
            }
        }
    }
    // functoriality of the evaluated realization, checked per model
    let evaluated = SetDiagram {
        shape: shape.clone(),
        objs: ev_obj,
        mors: ev_mor,
    };
    if let Err(err) = evaluated.validate() {
        return Ok(MarkingOutcome::Failed {
            obstruction: format!("evaluated realization is not functorial: {err}"),
        });
    }

    // search for natural isomorphisms, identity on generator images
    let in_j_image: Vec<bool> = {
        let mut v = vec![false; shape.obj_count()];
        for o in 0..m.generators.obj_count() {
            v[m.j.obj(o)] = true;
        }
        v
    };
    let mut candidates: Vec<Vec<FinSetMor>> = Vec::with_capacity(shape.obj_count());
    for (o, name) in shape.objects() {
        let from = &evaluated.objs[o];
        let to = &f.objs[m.phi.obj(o)];
        if in_j_image[o] {
            if from != to {
                return Ok(MarkingOutcome::Failed {
                    obstruction: format!(
                        "generator image at `{name}` is not strict: {from} vs {to}"
                    ),
                });
            }
            candidates.push(vec![FinSetMor::identity(from)]);
        } else {
            let bs = bijections(from, to);
            if bs.is_empty() {
                return Ok(MarkingOutcome::Failed {
                    obstruction: format!(
                        "no isomorphism candidate at `{name}`: |{}| vs |{}| elements",
                        from.len(),
                        to.len()
                    ),
                });
            }
            candidates.push(bs);
        }
    }

    let mut alphas: Vec<Alpha> = Vec::new();
    let mut chosen: Vec<Option<usize>> = vec![None; shape.obj_count()];
    let mut last_violation: Option<String> = None;

    fn natural_so_far(
        shape: &FinCategory,
        phi: &Functor,
        evaluated: &SetDiagram,
        f: &SetDiagram,
        candidates: &[Vec<FinSetMor>],
        chosen: &[Option<usize>],
        last_violation: &mut Option<String>,
    ) -> bool {
        for (u, name) in shape.morphisms() {
            let (x, y) = (shape.dom(u), shape.cod(u));
            let (Some(cx), Some(cy)) = (chosen[x], chosen[y]) else {
                continue;
            };
            let ax = &candidates[x][cx];
            let ay = &candidates[y][cy];
            let lhs = ay.compose(&evaluated.mors[u]).unwrap();
            let rhs = f.mors[phi.mor(u)].compose(ax).unwrap();
            if lhs != rhs {
                *last_violation = Some(name.to_string());
                return false;
            }
        }
        true
    }

    fn search(
        shape: &FinCategory,
        phi: &Functor,
        evaluated: &SetDiagram,
        f: &SetDiagram,
        candidates: &[Vec<FinSetMor>],
        chosen: &mut Vec<Option<usize>>,
        pos: usize,
        alphas: &mut Vec<Alpha>,
        last_violation: &mut Option<String>,
    ) {
        if pos == shape.obj_count() {
            let components = shape
                .objects()
                .map(|(o, name)| (name.to_string(), candidates[o][chosen[o].unwrap()].clone()))
                .collect();
            alphas.push(Alpha { components });
            return;
        }
        for c in 0..candidates[pos].len() {
            chosen[pos] = Some(c);
            if natural_so_far(shape, phi, evaluated, f, candidates, chosen, last_violation) {
                search(
                    shape,
                    phi,
                    evaluated,
                    f,
                    candidates,
                    chosen,
                    pos + 1,
                    alphas,
                    last_violation,
                );
            }
            chosen[pos] = None;
        }
    }

    if shape.obj_count() == 0 {
        alphas.push(Alpha {
            components: BTreeMap::new(),
        });
    } else {
        search(
            shape,
            &m.phi,
            &evaluated,
            f,
            &candidates,
            &mut chosen,
            0,
            &mut alphas,
            &mut last_violation,
        );
    }

    if alphas.is_empty() {
        let detail = match last_violation {
            Some(u) => format!("no natural isomorphism; naturality fails at `{u}`"),
            None => "no natural isomorphism".to_string(),
        };
        Ok(MarkingOutcome::Failed { obstruction: detail })
    } else {
        Ok(MarkingOutcome::Found { alphas })
    }
}

/// Checks a model functor against every marking of a validated sketch.
pub fn check_model(
    s: &Sketch,
    choosers: &Choosers,
    f: &SetDiagram,
) -> Result<ModelReport, SketchError> {
    if f.shape != s.base {
        return Err(SketchError::ModelShapeMismatch);
    }
    f.validate()?;
    let mut verdicts = Vec::new();
    for m in &s.markings {
        verdicts.push(MarkingVerdict {
            marking: m.name.clone(),
            outcome: check_marking(choosers, m, f)?,
        });
    }
    Ok(ModelReport { verdicts })
}

/// Enumerates all set-valued functors on `base` with object images among the
/// canonical sets of size at most `bound`, in canonical order.
pub fn enumerate_set_functors(
    base: &Arc<FinCategory>,
    bound: usize,
    ceiling: usize,
) -> Result<Vec<SetDiagram>, SketchError> {
    // guardrail: total candidate count across all size assignments
    let n_obj = base.obj_count();
    let mut total: u128 = 0;
    let mut sizes = vec![0usize; n_obj];
    loop {
        let mut per_assignment: u128 = 1;
        for (mm, _) in base.morphisms() {
            if base.is_identity(mm) {
                continue;
            }
            let d = sizes[base.dom(mm)] as u128;
            let c = sizes[base.cod(mm)] as u128;
            let fns = if d == 0 {
                1
            } else if c == 0 {
                0
            } else {
                c.saturating_pow(d as u32)
            };
            per_assignment = per_assignment.saturating_mul(fns);
        }
        total = total.saturating_add(per_assignment);
        let mut k = n_obj;
        let mut done = true;
        while k > 0 {
            k -= 1;
            sizes[k] += 1;
            if sizes[k] <= bound {
                done = false;
                break;
            }
            sizes[k] = 0;
        }
        if done || n_obj == 0 {
            break;
        }
    }
    if total > ceiling as u128 {
        return Err(SketchError::GuardrailExceeded {
            candidates: total,
            ceiling,
        });
    }

    let mut out = Vec::new();
    let free: Vec<usize> = (0..base.mor_count())
        .filter(|&m| !base.is_identity(m))
        .collect();

    fn assign_mors(
        base: &Arc<FinCategory>,
        objs: &[FinSetObj],
        free: &[usize],
        pos: usize,
        mors: &mut Vec<Option<FinSetMor>>,
        out: &mut Vec<SetDiagram>,
    ) {
        // propagate functoriality on fully assigned composable pairs
        for (f, _) in base.morphisms() {
            for &g in base.from_obj(base.cod(f)) {
                let gf = base.compose(g, f).unwrap();
                if let (Some(mf), Some(mg), Some(mgf)) = (&mors[f], &mors[g], &mors[gf]) {
                    if &mg.compose(mf).unwrap() != mgf {
                        return;
                    }
                }
            }
        }
        if pos == free.len() {
            // fill any composites still unassigned via composition
            let mut filled = mors.clone();
            let mut progress = true;
            while progress {
                progress = false;
                for (f, _) in base.morphisms() {
                    for &g in base.from_obj(base.cod(f)) {
                        let gf = base.compose(g, f).unwrap();
                        if filled[gf].is_none() {
                            if let (Some(mf), Some(mg)) = (&filled[f], &filled[g]) {
                                filled[gf] = Some(mg.compose(mf).unwrap());
                                progress = true;
                            }
                        }
                    }
                }
            }
            if filled.iter().any(|m| m.is_none()) {
                return;
            }
            let diagram = SetDiagram {
                shape: base.clone(),
                objs: objs.to_vec(),
                mors: filled.into_iter().map(|m| m.unwrap()).collect(),
            };
            if diagram.validate().is_ok() {
                out.push(diagram);
            }
            return;
        }
        let m = free[pos];
        if mors[m].is_some() {
            assign_mors(base, objs, free, pos + 1, mors, out);
            return;
        }
        let dom = &objs[base.dom(m)];
        let cod = &objs[base.cod(m)];
        if dom.is_empty() {
            mors[m] = Some(FinSetMor::new(dom.clone(), cod.clone(), &[]).unwrap());
            assign_mors(base, objs, free, pos + 1, mors, out);
            mors[m] = None;
            return;
        }
        if cod.is_empty() {
            return;
        }
        let mut counter = vec![0usize; dom.len()];
        loop {
            let pairs: Vec<_> = dom
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), cod.get(counter[i]).clone()))
                .collect();
            mors[m] = Some(FinSetMor::new(dom.clone(), cod.clone(), &pairs).unwrap());
            assign_mors(base, objs, free, pos + 1, mors, out);
            mors[m] = None;
            let mut k = dom.len();
            let mut done = true;
            while k > 0 {
                k -= 1;
                counter[k] += 1;
                if counter[k] < cod.len() {
                    done = false;
                    break;
                }
                counter[k] = 0;
            }
            if done {
                break;
            }
        }
    }

    let mut sizes = vec![0usize; n_obj];
    loop {
        let objs: Vec<FinSetObj> = sizes.iter().map(|&s| FinSetObj::canonical(s)).collect();
        let mut mors: Vec<Option<FinSetMor>> = vec![None; base.mor_count()];
        for o in 0..n_obj {
            mors[base.identity_of(o)] = Some(FinSetMor::identity(&objs[o]));
        }
        assign_mors(base, &objs, &free, 0, &mut mors, &mut out);
        let mut k = n_obj;
        let mut done = true;
        while k > 0 {
            k -= 1;
            sizes[k] += 1;
            if sizes[k] <= bound {
                done = false;
                break;
            }
            sizes[k] = 0;
        }
        if done || n_obj == 0 {
            break;
        }
    }
    Ok(out)
}

/// Enumerates the models of a sketch with object images among canonical sets
/// of size at most `bound`, filtered by `check_model`.
pub fn enumerate_models(
    s: &Sketch,
    choosers: &Choosers,
    bound: usize,
) -> Result<Vec<Model>, SketchError> {
    validate_sketch(s)?;
    let functors = enumerate_set_functors(&s.base, bound, choosers.ceiling)?;
    let mut models = Vec::new();
    for diagram in functors {
        let report = check_model(s, choosers, &diagram)?;
        if report.all_found() {
            models.push(Model { diagram, report });
        }
    }
    Ok(models)
}

/// Extends a realization given on generating arrows to all composites of the
/// shape: a morphism named `a.b` receives the composition expression of the
/// entries for `a` and `b`.
pub fn extend_realization(
    shape: &FinCategory,
    gens: &BTreeMap<String, MorExpr>,
) -> Result<BTreeMap<String, MorExpr>, SketchError> {
    let mut out = BTreeMap::new();
    for (m, name) in shape.morphisms() {
        if shape.is_identity(m) {
            continue;
        }
        if let Some(e) = gens.get(name) {
            out.insert(name.to_string(), e.clone());
            continue;
        }
        let mut acc: Option<MorExpr> = None;
        for part in name.split('.') {
            let e = gens.get(part).ok_or_else(|| SketchError::IllTyped {
                marking: "(realization)".to_string(),
                reason: format!("no realization for generating arrow `{part}`"),
            })?;
            acc = Some(match acc {
                None => e.clone(),
                Some(prev) => MorExpr::Comp(Box::new(e.clone()), Box::new(prev)),
            });
        }
        out.insert(name.to_string(), acc.unwrap());
    }
    Ok(out)
}

/// Builds a set-valued functor from object values and generating-arrow
/// values, composing along canonical path names for the remaining morphisms.
pub fn set_functor_from_generators(
    base: &Arc<FinCategory>,
    objs: &BTreeMap<String, FinSetObj>,
    gens: &BTreeMap<String, FinSetMor>,
) -> Result<SetDiagram, SketchError> {
    let mut obj_vec = Vec::with_capacity(base.obj_count());
    for (_, name) in base.objects() {
        let v = objs.get(name).ok_or_else(|| SketchError::IllTyped {
            marking: "(model)".to_string(),
            reason: format!("no value for object `{name}`"),
        })?;
        obj_vec.push(v.clone());
    }
    let mut mor_vec = Vec::with_capacity(base.mor_count());
    for (m, name) in base.morphisms() {
        if base.is_identity(m) {
            mor_vec.push(FinSetMor::identity(&obj_vec[base.dom(m)]));
            continue;
        }
        if let Some(v) = gens.get(name) {
            mor_vec.push(v.clone());
            continue;
        }
        let mut acc: Option<FinSetMor> = None;
        for part in name.split('.') {
            let v = gens.get(part).ok_or_else(|| SketchError::IllTyped {
                marking: "(model)".to_string(),
                reason: format!("no value for generating arrow `{part}`"),
            })?;
            acc = Some(match acc {
                None => v.clone(),
                Some(prev) => v.compose(&prev)?,
            });
        }
        mor_vec.push(acc.unwrap());
    }
    Ok(SetDiagram::new(base.clone(), obj_vec, mor_vec)?)
}

/// Builds a marking forcing a base cone to be realized by a limit: the
/// generators are the cone's diagram shape, the marking shape freely adjoins
/// the apex, and the realization sends the apex to the limit of the
/// generator diagram with the legs as projections.
pub fn mark_limit_cone(
    base: &Arc<FinCategory>,
    name: &str,
    cone: &Cone,
) -> Result<Marking, SketchError> {
    if cone.diagram.target != *base {
        return Err(SketchError::IllTyped {
            marking: name.to_string(),
            reason: "cone does not land in the sketch base".to_string(),
        });
    }
    let d0 = cone.diagram.source.clone();
    let (shape, j) = cone_shape(&d0).map_err(|err| SketchError::InvalidFunctor {
        marking: name.to_string(),
        err,
    })?;
    let (eta_o, eta_m) = eta_embed(&d0);
    let spec = LimSpec {
        shape: d0.clone(),
        objs: eta_o.clone(),
        mors: d0
            .morphisms()
            .filter(|(m, _)| !d0.is_identity(*m))
            .map(|(_, n)| (n.to_string(), eta_m[n].clone()))
            .collect(),
    };
    let mut k_obj: BTreeMap<String, ObjExpr> = BTreeMap::new();
    let mut k_mor: BTreeMap<String, MorExpr> = BTreeMap::new();
    // generator part realizes itself; apex and legs realize the limit
    for (o, n) in d0.objects() {
        k_obj.insert(shape.obj_name(j.obj(o)).to_string(), eta_o[n].clone());
    }
    for (mm, n) in d0.morphisms() {
        if d0.is_identity(mm) {
            continue;
        }
        k_mor.insert(shape.mor_name(j.mor(mm)).to_string(), eta_m[n].clone());
    }
    let apex_obj = (0..shape.obj_count())
        .find(|&o| (0..d0.obj_count()).all(|x| j.obj(x) != o))
        .expect("cone shape has a fresh apex");
    k_obj.insert(
        shape.obj_name(apex_obj).to_string(),
        ObjExpr::Lim(spec.clone()),
    );
    for (mm, n) in shape.morphisms() {
        if shape.is_identity(mm) || shape.dom(mm) != apex_obj {
            continue;
        }
        let target = shape.obj_name(shape.cod(mm));
        k_mor.insert(
            n.to_string(),
            MorExpr::LimLeg {
                lim: spec.clone(),
                leg: target.to_string(),
            },
        );
    }
    // phi: the cone itself
    let mut phi_obj = vec![usize::MAX; shape.obj_count()];
    let mut phi_mor = vec![usize::MAX; shape.mor_count()];
    for (o, _) in d0.objects() {
        phi_obj[j.obj(o)] = cone.diagram.obj(o);
    }
    phi_obj[apex_obj] = cone.apex;
    for (mm, _) in d0.morphisms() {
        phi_mor[j.mor(mm)] = cone.diagram.mor(mm);
    }
    phi_mor[shape.identity_of(apex_obj)] = base.identity_of(cone.apex);
    for (mm, _) in shape.morphisms() {
        if phi_mor[mm] != usize::MAX || shape.dom(mm) != apex_obj {
            continue;
        }
        // leg to some diagram object
        let target = shape.cod(mm);
        let o = (0..d0.obj_count()).find(|&x| j.obj(x) == target).unwrap();
        phi_mor[mm] = cone.legs[o];
    }
    let phi = Functor::new(shape.clone(), base.clone(), phi_obj, phi_mor).map_err(|err| {
        SketchError::IllTyped {
            marking: name.to_string(),
            reason: format!("legs do not assemble into a functor: {err}"),
        }
    })?;
    Ok(Marking {
        name: name.to_string(),
        generators: d0,
        shape,
        j,
        k_obj,
        k_mor,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::shapes;
    use crate::finset::{is_limiting, SetCone, Value};

    fn ch() -> Choosers {
        Choosers::default()
    }

    /// base = walking arrow El : EL -> TY, no markings
    fn bare_tt() -> Sketch {
        Sketch {
            base: Arc::new(shapes::free(&["EL", "TY"], &[("El", "EL", "TY")])),
            markings: Vec::new(),
        }
    }

    #[test]
    fn sketch_without_markings_is_valid() {
        let s = bare_tt();
        validate_sketch(&s).unwrap();
        let models = enumerate_models(&s, &ch(), 1).unwrap();
        // sizes (0,0), (0,1), (1,1): the (1,0) pair has no function
        assert_eq!(models.len(), 3);
        for m in &models {
            assert!(m.report.verdicts.is_empty());
        }
    }

    #[test]
    fn walking_tt_count_at_bound_two() {
        let s = bare_tt();
        let models = enumerate_models(&s, &ch(), 2).unwrap();
        // sum over sizes (s, t) of t^s with 0^0 = 1:
        // 1+1+1 + 0+1+2 + 0+1+4 = 11
        assert_eq!(models.len(), 11);
    }

    #[test]
    fn empty_base_has_one_model() {
        let s = Sketch {
            base: Arc::new(shapes::empty()),
            markings: Vec::new(),
        };
        let models = enumerate_models(&s, &ch(), 5).unwrap();
        assert_eq!(models.len(), 1);
    }

    #[test]
    fn terminal_marking_admits_one_model_per_bound() {
        // single object marked as a terminal via the empty-diagram cone
        let base = Arc::new(shapes::discrete(&["X"]));
        let empty = Arc::new(shapes::empty());
        let diagram = Functor::new(empty, base.clone(), vec![], vec![]).unwrap();
        let cone = Cone::new(diagram, base.obj_ix("X").unwrap(), vec![]).unwrap();
        let marking = mark_limit_cone(&base, "x-terminal", &cone).unwrap();
        let s = Sketch {
            base,
            markings: vec![marking],
        };
        validate_sketch(&s).unwrap();
        let models = enumerate_models(&s, &ch(), 3).unwrap();
        // only the canonical singleton passes
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].diagram.objs[0].len(), 1);
    }

    #[test]
    fn eta_violation_detected_syntactically() {
        let base = Arc::new(shapes::free(&["A", "B"], &[("u", "A", "B")]));
        let gens = Arc::new(shapes::walking_arrow());
        let shape = gens.clone();
        let j = Functor::identity(gens.clone());
        let phi = Functor::from_names(
            shape.clone(),
            base.clone(),
            &[("a".into(), "A".into()), ("b".into(), "B".into())].into(),
            &[("f".into(), "u".into())].into(),
        )
        .unwrap();
        let mut k_obj: BTreeMap<String, ObjExpr> = [
            ("a".to_string(), ObjExpr::Gen("a".into())),
            ("b".to_string(), ObjExpr::Gen("b".into())),
        ]
        .into();
        // semantically equal to gen(f), but not syntactically
        let k_mor: BTreeMap<String, MorExpr> = [(
            "f".to_string(),
            MorExpr::Comp(
                Box::new(MorExpr::Id(Box::new(ObjExpr::Gen("b".into())))),
                Box::new(MorExpr::Gen("f".into())),
            ),
        )]
        .into();
        let marking = Marking {
            name: "broken".into(),
            generators: gens,
            shape,
            j,
            k_obj: k_obj.clone(),
            k_mor,
            phi: phi.clone(),
        };
        let s = Sketch {
            base: base.clone(),
            markings: vec![marking.clone()],
        };
        let err = validate_sketch(&s).unwrap_err();
        assert!(matches!(err, SketchError::EtaViolation { .. }));
        // object-level violation reports too
        k_obj.insert("a".to_string(), ObjExpr::Terminal);
        let s2 = Sketch {
            base,
            markings: vec![Marking {
                k_obj,
                k_mor: marking.k_mor.clone(),
                ..marking
            }],
        };
        assert!(matches!(
            validate_sketch(&s2).unwrap_err(),
            SketchError::EtaViolation { .. } | SketchError::IllTyped { .. }
        ));
    }

    #[test]
    fn non_commuting_cone_is_rejected() {
        // spans with legs that do not commute with the diagram cannot even
        // be formed as cones; a wrong-base cone errors out of the marking
        let base = Arc::new(shapes::free(&["A", "B"], &[("u", "A", "B")]));
        let other = Arc::new(shapes::discrete(&["Z"]));
        let empty = Arc::new(shapes::empty());
        let diagram = Functor::new(empty, other.clone(), vec![], vec![]).unwrap();
        let cone = Cone::new(diagram, 0, vec![]).unwrap();
        let err = mark_limit_cone(&base, "oops", &cone).unwrap_err();
        assert!(matches!(err, SketchError::IllTyped { .. }));
    }

    #[test]
    fn marked_pullback_cone_checks_models_by_limits() {
        // base: commutative square; mark the square as a pullback cone over
        // its cospan
        let base = Arc::new(shapes::commutative_square());
        let cospan = Arc::new(shapes::walking_cospan());
        let diagram = Functor::from_names(
            cospan.clone(),
            base.clone(),
            &[
                ("x0".into(), "se".into()),
                ("x1".into(), "ne".into()),
                ("x2".into(), "sw".into()),
            ]
            .into(),
            &[("f1".into(), "e".into()), ("f2".into(), "s".into())].into(),
        )
        .unwrap();
        let apex = base.obj_ix("nw").unwrap();
        let mut legs = vec![usize::MAX; 3];
        legs[cospan.obj_ix("x0").unwrap()] = base.mor_ix("n.e").unwrap();
        legs[cospan.obj_ix("x1").unwrap()] = base.mor_ix("n").unwrap();
        legs[cospan.obj_ix("x2").unwrap()] = base.mor_ix("w").unwrap();
        let cone = Cone::new(diagram, apex, legs).unwrap();
        let marking = mark_limit_cone(&base, "square-pullback", &cone).unwrap();
        let s = Sketch {
            base: base.clone(),
            markings: vec![marking],
        };
        validate_sketch(&s).unwrap();

        // specialization: a model passes iff its square is a pullback
        let found = enumerate_models(&s, &ch(), 2).unwrap();
        assert!(!found.is_empty());
        let all = enumerate_set_functors(&base, 2, 1_000_000).unwrap();
        let mut pass = 0;
        for f in &all {
            let report = check_model(&s, &ch(), f).unwrap();
            // oracle: evaluate the model's own cone over its cospan
            let mut mors = vec![None; cospan.mor_count()];
            mors[cospan.mor_ix("f1").unwrap()] =
                Some(f.mors[base.mor_ix("e").unwrap()].clone());
            mors[cospan.mor_ix("f2").unwrap()] =
                Some(f.mors[base.mor_ix("s").unwrap()].clone());
            let mut objs = vec![None; cospan.obj_count()];
            objs[cospan.obj_ix("x0").unwrap()] =
                Some(f.objs[base.obj_ix("se").unwrap()].clone());
            objs[cospan.obj_ix("x1").unwrap()] =
                Some(f.objs[base.obj_ix("ne").unwrap()].clone());
            objs[cospan.obj_ix("x2").unwrap()] =
                Some(f.objs[base.obj_ix("sw").unwrap()].clone());
            let objs: Vec<FinSetObj> = objs.into_iter().map(|o| o.unwrap()).collect();
            for (mm, _) in cospan.morphisms() {
                if cospan.is_identity(mm) {
                    mors[mm] = Some(FinSetMor::identity(&objs[cospan.dom(mm)]));
                }
            }
            let diagram = SetDiagram::new(
                cospan.clone(),
                objs,
                mors.into_iter().map(|m| m.unwrap()).collect(),
            )
            .unwrap();
            let mut legs = vec![None; 3];
            legs[cospan.obj_ix("x0").unwrap()] =
                Some(f.mors[base.mor_ix("n.e").unwrap()].clone());
            legs[cospan.obj_ix("x1").unwrap()] =
                Some(f.mors[base.mor_ix("n").unwrap()].clone());
            legs[cospan.obj_ix("x2").unwrap()] =
                Some(f.mors[base.mor_ix("w").unwrap()].clone());
            let model_cone = SetCone::new(
                diagram,
                f.objs[base.obj_ix("nw").unwrap()].clone(),
                legs.into_iter().map(|l| l.unwrap()).collect(),
            )
            .unwrap();
            let expected = is_limiting(&ch(), &model_cone).unwrap().is_limiting();
            assert_eq!(report.all_found(), expected);
            if expected {
                pass += 1;
            }
        }
        assert_eq!(found.len(), pass);
    }

    #[test]
    fn strictness_holds_on_generator_images() {
        let base = Arc::new(shapes::discrete(&["X"]));
        let empty = Arc::new(shapes::empty());
        let diagram = Functor::new(empty, base.clone(), vec![], vec![]).unwrap();
        let cone = Cone::new(diagram, 0, vec![]).unwrap();
        let marking = mark_limit_cone(&base, "t", &cone).unwrap();
        let s = Sketch {
            base,
            markings: vec![marking],
        };
        let models = enumerate_models(&s, &ch(), 2).unwrap();
        for m in &models {
            for v in &m.report.verdicts {
                let MarkingOutcome::Found { alphas } = &v.outcome else {
                    panic!()
                };
                // empty generator category: no strictness constraints, but
                // the apex component can be non-identity
                assert!(!alphas.is_empty());
            }
        }
    }

    #[test]
    fn enumerate_agrees_with_check_model() {
        let base = Arc::new(shapes::discrete(&["X"]));
        let empty = Arc::new(shapes::empty());
        let diagram = Functor::new(empty, base.clone(), vec![], vec![]).unwrap();
        let cone = Cone::new(diagram, 0, vec![]).unwrap();
        let marking = mark_limit_cone(&base, "t", &cone).unwrap();
        let s = Sketch {
            base: base.clone(),
            markings: vec![marking],
        };
        let models = enumerate_models(&s, &ch(), 2).unwrap();
        let all = enumerate_set_functors(&base, 2, 1_000_000).unwrap();
        let mut pass = 0;
        for f in &all {
            if check_model(&s, &ch(), f).unwrap().all_found() {
                pass += 1;
                assert!(models.iter().any(|m| &m.diagram == f));
            }
        }
        assert_eq!(pass, models.len());
    }

    #[test]
    fn enumeration_guardrail_trips() {
        let s = bare_tt();
        let tight = Choosers { ceiling: 3 };
        let err = enumerate_models(&s, &tight, 2).unwrap_err();
        assert!(matches!(err, SketchError::GuardrailExceeded { .. }));
    }

    #[test]
    fn terminal_expression_and_empty_lim_agree() {
        // Terminal evaluates identically to the empty-diagram limit, so a
        // marking may use either form
        let i = Interpretation {
            base: SetDiagram::new(Arc::new(shapes::empty()), vec![], vec![]).unwrap(),
            choosers: ch(),
        };
        let t = i.eval_obj(&ObjExpr::Terminal).unwrap();
        let l = i
            .eval_obj(&ObjExpr::Lim(LimSpec {
                shape: Arc::new(shapes::empty()),
                objs: BTreeMap::new(),
                mors: BTreeMap::new(),
            }))
            .unwrap();
        assert_eq!(t, l);
        let _ = Value::unit();
    }
}
