//! Finite sets with chosen structure: limits, exponentials, dependent
//! products, and the polynomial construction built from them.
//!
//! Elements are canonical values; every operation is deterministic, so equal
//! inputs produce bit-identical outputs. Materializing operations check a
//! configurable element-count ceiling before allocating.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{FinCategory, RawCategory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("`{value}` is not an element of {set}")]
    NotAnElement { value: String, set: String },
    #[error("table not total: missing `{0}`")]
    NotTotal(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("legs do not form a cone: {0}")]
    NotACone(String),
    #[error("diagram is not functorial: {0}")]
    NotFunctorial(String),
    #[error("operation would materialize {needed} elements (ceiling {ceiling})")]
    GuardrailExceeded { needed: u128, ceiling: usize },
    #[error("no bound derivable for the competing-cone search")]
    SearchSpaceUnbounded,
}

/// A canonical element value. The derived ordering (variant order, then
/// recursive comparison) is the canonical element order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(String),
    Pair(Box<Value>, Box<Value>),
    Tag(String, Box<Value>),
    /// association tuple keyed by shape-object id, kept sorted; `Record([])`
    /// is the canonical point
    Record(Vec<(String, Value)>),
    /// graph of a tabulated function, kept sorted by argument
    Fun(Vec<(Value, Value)>),
}

impl Value {
    pub fn atom(s: &str) -> Value {
        Value::Atom(s.to_string())
    }

    pub fn unit() -> Value {
        Value::Record(Vec::new())
    }

    pub fn record(mut fields: Vec<(String, Value)>) -> Value {
        fields.sort();
        Value::Record(fields)
    }

    pub fn fun(mut graph: Vec<(Value, Value)>) -> Value {
        graph.sort();
        Value::Fun(graph)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Tag(t, v) => write!(f, "#{t}({v})"),
            Value::Record(fields) => {
                write!(f, "(")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                write!(f, ")")
            }
            Value::Fun(graph) => {
                write!(f, "{{")?;
                for (i, (a, b)) in graph.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a} |-> {b}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A finite set: canonical values in canonical sorted order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinSetObj {
    elements: Vec<Value>,
}

impl FinSetObj {
    pub fn new(mut elements: Vec<Value>) -> Result<FinSetObj, SetError> {
        elements.sort();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(SetError::DuplicateElement(w[0].to_string()));
            }
        }
        Ok(FinSetObj { elements })
    }

    pub fn empty() -> FinSetObj {
        FinSetObj {
            elements: Vec::new(),
        }
    }

    /// `{0, 1, .., n-1}` as atoms: the canonical set of size `n`.
    pub fn canonical(n: usize) -> FinSetObj {
        (0..n).map(|i| Value::Atom(i.to_string())).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.elements.iter()
    }

    pub fn get(&self, i: usize) -> &Value {
        &self.elements[i]
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.elements.binary_search(v).ok()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index_of(v).is_some()
    }
}

impl fmt::Display for FinSetObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Value> for FinSetObj {
    /// Collects, sorting and deduplicating.
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        let mut elements: Vec<Value> = iter.into_iter().collect();
        elements.sort();
        elements.dedup();
        FinSetObj { elements }
    }
}

/// A tabulated function between finite sets, stored by element index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinSetMor {
    pub dom: FinSetObj,
    pub cod: FinSetObj,
    table: Vec<usize>,
}

impl FinSetMor {
    pub fn new(
        dom: FinSetObj,
        cod: FinSetObj,
        pairs: &[(Value, Value)],
    ) -> Result<FinSetMor, SetError> {
        let mut table = vec![usize::MAX; dom.len()];
        for (a, b) in pairs {
            let ai = dom.index_of(a).ok_or_else(|| SetError::NotAnElement {
                value: a.to_string(),
                set: dom.to_string(),
            })?;
            let bi = cod.index_of(b).ok_or_else(|| SetError::NotAnElement {
                value: b.to_string(),
                set: cod.to_string(),
            })?;
            table[ai] = bi;
        }
        for (i, t) in table.iter().enumerate() {
            if *t == usize::MAX {
                return Err(SetError::NotTotal(dom.get(i).to_string()));
            }
        }
        Ok(FinSetMor { dom, cod, table })
    }

    pub fn from_fn(
        dom: FinSetObj,
        cod: FinSetObj,
        f: impl Fn(&Value) -> Value,
    ) -> Result<FinSetMor, SetError> {
        let mut table = Vec::with_capacity(dom.len());
        for v in dom.iter() {
            let img = f(v);
            let bi = cod.index_of(&img).ok_or_else(|| SetError::NotAnElement {
                value: img.to_string(),
                set: cod.to_string(),
            })?;
            table.push(bi);
        }
        Ok(FinSetMor { dom, cod, table })
    }

    pub fn identity(x: &FinSetObj) -> FinSetMor {
        FinSetMor {
            dom: x.clone(),
            cod: x.clone(),
            table: (0..x.len()).collect(),
        }
    }

    pub fn apply_ix(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply(&self, v: &Value) -> Option<&Value> {
        self.dom.index_of(v).map(|i| self.cod.get(self.table[i]))
    }

    pub fn graph(&self) -> Vec<(Value, Value)> {
        self.dom
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), self.cod.get(self.table[i]).clone()))
            .collect()
    }

    /// The function's graph as a canonical `Fun` value.
    pub fn as_value(&self) -> Value {
        Value::fun(self.graph())
    }

    /// `self` after `f`.
    pub fn compose(&self, f: &FinSetMor) -> Result<FinSetMor, SetError> {
        if f.cod != self.dom {
            return Err(SetError::BoundaryMismatch(
                "composition boundary".to_string(),
            ));
        }
        Ok(FinSetMor {
            dom: f.dom.clone(),
            cod: self.cod.clone(),
            table: f.table.iter().map(|&i| self.table[i]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.table.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn is_bijection(&self) -> bool {
        if self.dom.len() != self.cod.len() {
            return false;
        }
        let mut seen = vec![false; self.cod.len()];
        for &t in &self.table {
            if seen[t] {
                return false;
            }
            seen[t] = true;
        }
        true
    }

    pub fn inverse(&self) -> Option<FinSetMor> {
        if !self.is_bijection() {
            return None;
        }
        let mut table = vec![0usize; self.cod.len()];
        for (i, &t) in self.table.iter().enumerate() {
            table[t] = i;
        }
        Some(FinSetMor {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            table,
        })
    }

    pub fn preimage_ix(&self, cod_ix: usize) -> Vec<usize> {
        (0..self.dom.len())
            .filter(|&i| self.table[i] == cod_ix)
            .collect()
    }
}

impl fmt::Display for FinSetMor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.dom.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} |-> {}", self.cod.get(self.table[i]))?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// Set-valued diagrams and cones
// ---------------------------------------------------------------------------

/// A functor from a finite shape into finite sets, given cell-by-cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDiagram {
    pub shape: Arc<FinCategory>,
    /// indexed by shape object
    pub objs: Vec<FinSetObj>,
    /// indexed by shape morphism
    pub mors: Vec<FinSetMor>,
}

impl SetDiagram {
    pub fn new(
        shape: Arc<FinCategory>,
        objs: Vec<FinSetObj>,
        mors: Vec<FinSetMor>,
    ) -> Result<SetDiagram, SetError> {
        let d = SetDiagram { shape, objs, mors };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SetError> {
        if self.objs.len() != self.shape.obj_count() || self.mors.len() != self.shape.mor_count() {
            return Err(SetError::BoundaryMismatch("diagram cell counts".to_string()));
        }
        for (m, name) in self.shape.morphisms() {
            let f = &self.mors[m];
            if f.dom != self.objs[self.shape.dom(m)] || f.cod != self.objs[self.shape.cod(m)] {
                return Err(SetError::BoundaryMismatch(format!(
                    "image of `{name}` has wrong boundary"
                )));
            }
        }
        for (o, name) in self.shape.objects() {
            if !self.mors[self.shape.identity_of(o)].is_identity() {
                return Err(SetError::NotFunctorial(format!(
                    "identity of `{name}` not preserved"
                )));
            }
        }
        for (g, gn) in self.shape.morphisms() {
            for (f, fname) in self.shape.morphisms() {
                if let Some(gf) = self.shape.compose(g, f) {
                    let composite = self.mors[g].compose(&self.mors[f])?;
                    if composite != self.mors[gf] {
                        return Err(SetError::NotFunctorial(format!(
                            "composite of (`{gn}`, `{fname}`) not preserved"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn obj_named(&self, name: &str) -> Option<&FinSetObj> {
        self.shape.obj_ix(name).map(|i| &self.objs[i])
    }

    pub fn mor_named(&self, name: &str) -> Option<&FinSetMor> {
        self.shape.mor_ix(name).map(|i| &self.mors[i])
    }
}

/// A cone over a set-valued diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCone {
    pub diagram: SetDiagram,
    pub apex: FinSetObj,
    pub legs: Vec<FinSetMor>,
}

impl SetCone {
    pub fn new(
        diagram: SetDiagram,
        apex: FinSetObj,
        legs: Vec<FinSetMor>,
    ) -> Result<SetCone, SetError> {
        let c = SetCone {
            diagram,
            apex,
            legs,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SetError> {
        let shape = &self.diagram.shape;
        if self.legs.len() != shape.obj_count() {
            return Err(SetError::BoundaryMismatch("leg count".to_string()));
        }
        for (i, name) in shape.objects() {
            let leg = &self.legs[i];
            if leg.dom != self.apex || leg.cod != self.diagram.objs[i] {
                return Err(SetError::BoundaryMismatch(format!("leg at `{name}`")));
            }
        }
        for (u, name) in shape.morphisms() {
            let (i, j) = (shape.dom(u), shape.cod(u));
            if self.diagram.mors[u].compose(&self.legs[i])? != self.legs[j] {
                return Err(SetError::NotACone(name.to_string()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Chosen structure
// ---------------------------------------------------------------------------

/// The deterministic choosers for limits, exponentials, and dependent
/// products, with a guardrail on materialized sizes.
#[derive(Debug, Clone)]
pub struct Choosers {
    pub ceiling: usize,
}

impl Default for Choosers {
    fn default() -> Self {
        Choosers { ceiling: 1_000_000 }
    }
}

fn guard(needed: u128, ceiling: usize) -> Result<(), SetError> {
    if needed > ceiling as u128 {
        Err(SetError::GuardrailExceeded { needed, ceiling })
    } else {
        Ok(())
    }
}

/// The cospan shape used for chosen pullbacks: `l --al--> m <--ar-- r`.
pub fn cospan_shape() -> Arc<FinCategory> {
    let raw = RawCategory {
        objects: vec!["l".into(), "m".into(), "r".into()],
        morphisms: vec![
            ("al".into(), "l".into(), "m".into()),
            ("ar".into(), "r".into(), "m".into()),
            ("id_l".into(), "l".into(), "l".into()),
            ("id_m".into(), "m".into(), "m".into()),
            ("id_r".into(), "r".into(), "r".into()),
        ],
        identities: vec![
            ("l".into(), "id_l".into()),
            ("m".into(), "id_m".into()),
            ("r".into(), "id_r".into()),
        ],
        composites: vec![
            ("id_m".into(), "al".into(), "al".into()),
            ("al".into(), "id_l".into(), "al".into()),
            ("id_m".into(), "ar".into(), "ar".into()),
            ("ar".into(), "id_r".into(), "ar".into()),
            ("id_l".into(), "id_l".into(), "id_l".into()),
            ("id_m".into(), "id_m".into(), "id_m".into()),
            ("id_r".into(), "id_r".into(), "id_r".into()),
        ],
    };
    Arc::new(raw.validate().unwrap())
}

/// The discrete shape backing evaluation maps: objects `arg` and `fun`.
fn eval_product_shape() -> Arc<FinCategory> {
    Arc::new(crate::fincat::shapes::discrete(&["arg", "fun"]))
}

/// Canonical pullback data: the limit cone over the cospan of `f` and `g`.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub cone: SetCone,
}

impl Pullback {
    pub fn apex(&self) -> &FinSetObj {
        &self.cone.apex
    }

    /// projection to `dom(f)`
    pub fn proj1(&self) -> &FinSetMor {
        &self.cone.legs[self.cone.diagram.shape.obj_ix("l").unwrap()]
    }

    /// projection to `dom(g)`
    pub fn proj2(&self) -> &FinSetMor {
        &self.cone.legs[self.cone.diagram.shape.obj_ix("r").unwrap()]
    }
}

/// A dependent product `f_* g` with its transposition maps.
#[derive(Debug, Clone)]
pub struct DependentProduct {
    pub f: FinSetMor,
    pub g: FinSetMor,
    /// the pushforward family over `cod(f)`
    pub pushforward: FinSetMor,
}

impl Choosers {
    /// Canonical limit: matching families as records keyed by shape-object id.
    pub fn limit(&self, diagram: &SetDiagram) -> Result<SetCone, SetError> {
        diagram.validate()?;
        let shape = &diagram.shape;
        let n = shape.obj_count();
        let mut size: u128 = 1;
        for o in &diagram.objs {
            size = size.saturating_mul(o.len() as u128);
        }
        guard(size, self.ceiling)?;

        let mut families: Vec<Value> = Vec::new();
        if size > 0 {
            let mut counter = vec![0usize; n];
            'outer: loop {
                let ok = shape.morphisms().all(|(u, _)| {
                    let (i, j) = (shape.dom(u), shape.cod(u));
                    diagram.mors[u].apply_ix(counter[i]) == counter[j]
                });
                if ok {
                    families.push(Value::Record(
                        (0..n)
                            .map(|i| {
                                (
                                    shape.obj_name(i).to_string(),
                                    diagram.objs[i].get(counter[i]).clone(),
                                )
                            })
                            .collect(),
                    ));
                }
                let mut k = n;
                loop {
                    if k == 0 {
                        break 'outer;
                    }
                    k -= 1;
                    counter[k] += 1;
                    if counter[k] < diagram.objs[k].len() {
                        break;
                    }
                    counter[k] = 0;
                }
            }
        }
        let apex = FinSetObj::new(families)?;
        let legs: Vec<FinSetMor> = (0..n)
            .map(|i| {
                FinSetMor::from_fn(apex.clone(), diagram.objs[i].clone(), |v| match v {
                    Value::Record(fields) => fields[i].1.clone(),
                    _ => unreachable!("limit elements are records"),
                })
            })
            .collect::<Result<_, _>>()?;
        SetCone::new(diagram.clone(), apex, legs)
    }

    /// The unique map from a cone's apex into the canonical limit.
    pub fn mediating(&self, cone: &SetCone, limit: &SetCone) -> Result<FinSetMor, SetError> {
        cone.validate()?;
        if cone.diagram != limit.diagram {
            return Err(SetError::BoundaryMismatch(
                "cones over different diagrams".to_string(),
            ));
        }
        let shape = &cone.diagram.shape;
        FinSetMor::from_fn(cone.apex.clone(), limit.apex.clone(), |x| {
            Value::Record(
                (0..shape.obj_count())
                    .map(|i| {
                        (
                            shape.obj_name(i).to_string(),
                            cone.legs[i].apply(x).unwrap().clone(),
                        )
                    })
                    .collect(),
            )
        })
    }

    /// Chosen pullback of the cospan `dom(f) --f--> X <--g-- dom(g)`, derived
    /// from the general limit chooser.
    pub fn pullback(&self, f: &FinSetMor, g: &FinSetMor) -> Result<Pullback, SetError> {
        if f.cod != g.cod {
            return Err(SetError::BoundaryMismatch("pullback cospan".to_string()));
        }
        let shape = cospan_shape();
        let l = shape.obj_ix("l").unwrap();
        let m = shape.obj_ix("m").unwrap();
        let r = shape.obj_ix("r").unwrap();
        let mut objs = vec![FinSetObj::empty(); 3];
        objs[l] = f.dom.clone();
        objs[m] = f.cod.clone();
        objs[r] = g.dom.clone();
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); 5];
        mors[shape.mor_ix("al").unwrap()] = f.clone();
        mors[shape.mor_ix("ar").unwrap()] = g.clone();
        mors[shape.mor_ix("id_l").unwrap()] = FinSetMor::identity(&f.dom);
        mors[shape.mor_ix("id_m").unwrap()] = FinSetMor::identity(&f.cod);
        mors[shape.mor_ix("id_r").unwrap()] = FinSetMor::identity(&g.dom);
        let diagram = SetDiagram::new(shape, objs, mors)?;
        Ok(Pullback {
            cone: self.limit(&diagram)?,
        })
    }

    /// Chosen exponential: all tabulated functions `x -> y` plus the
    /// evaluation map out of the chosen product.
    pub fn exponential(
        &self,
        x: &FinSetObj,
        y: &FinSetObj,
    ) -> Result<(FinSetObj, FinSetMor), SetError> {
        let size = (y.len() as u128)
            .checked_pow(x.len() as u32)
            .unwrap_or(u128::MAX);
        guard(size, self.ceiling)?;
        let mut funs: Vec<Value> = Vec::new();
        if x.is_empty() {
            funs.push(Value::Fun(Vec::new()));
        } else if !y.is_empty() {
            let mut counter = vec![0usize; x.len()];
            loop {
                funs.push(Value::Fun(
                    x.iter()
                        .enumerate()
                        .map(|(i, a)| (a.clone(), y.get(counter[i]).clone()))
                        .collect(),
                ));
                let mut k = x.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    counter[k] += 1;
                    if counter[k] < y.len() {
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
        let exp = FinSetObj::new(funs)?;

        // evaluation from the chosen product of (arg = x, fun = exp)
        let shape = eval_product_shape();
        let arg = shape.obj_ix("arg").unwrap();
        let fun = shape.obj_ix("fun").unwrap();
        let mut objs = vec![FinSetObj::empty(); 2];
        objs[arg] = x.clone();
        objs[fun] = exp.clone();
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); 2];
        mors[shape.identity_of(arg)] = FinSetMor::identity(x);
        mors[shape.identity_of(fun)] = FinSetMor::identity(&exp);
        let product = self.limit(&SetDiagram::new(shape, objs, mors)?)?;
        let eval = FinSetMor::from_fn(product.apex.clone(), y.clone(), |v| {
            let Value::Record(fields) = v else {
                unreachable!()
            };
            let a = &fields.iter().find(|(k, _)| k == "arg").unwrap().1;
            let Value::Fun(graph) = &fields.iter().find(|(k, _)| k == "fun").unwrap().1 else {
                unreachable!()
            };
            graph.iter().find(|(arg, _)| arg == a).unwrap().1.clone()
        })?;
        Ok((exp, eval))
    }

    /// Dependent product of `g : Z -> X` along `f : X -> Y`. The fiber of the
    /// pushforward over `y` is the set of sections `s : f^-1(y) -> Z` with
    /// `g(s(x)) = x`; elements are `(y, section-graph)` pairs.
    pub fn dependent_product(
        &self,
        f: &FinSetMor,
        g: &FinSetMor,
    ) -> Result<DependentProduct, SetError> {
        if g.cod != f.dom {
            return Err(SetError::BoundaryMismatch(
                "dependent product boundary: need g : Z -> X and f : X -> Y".to_string(),
            ));
        }
        let mut total: u128 = 0;
        for yi in 0..f.cod.len() {
            let fiber = f.preimage_ix(yi);
            let mut count: u128 = 1;
            for &xi in &fiber {
                count = count.saturating_mul(g.preimage_ix(xi).len() as u128);
            }
            total = total.saturating_add(count);
        }
        guard(total, self.ceiling)?;

        let mut elements = Vec::new();
        for yi in 0..f.cod.len() {
            let y = f.cod.get(yi).clone();
            let fiber = f.preimage_ix(yi);
            let choices: Vec<Vec<usize>> = fiber.iter().map(|&xi| g.preimage_ix(xi)).collect();
            if choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut counter = vec![0usize; fiber.len()];
            loop {
                let graph: Vec<(Value, Value)> = fiber
                    .iter()
                    .enumerate()
                    .map(|(k, &xi)| {
                        (
                            f.dom.get(xi).clone(),
                            g.dom.get(choices[k][counter[k]]).clone(),
                        )
                    })
                    .collect();
                elements.push(Value::Pair(
                    Box::new(y.clone()),
                    Box::new(Value::fun(graph)),
                ));
                let mut k = fiber.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    counter[k] += 1;
                    if counter[k] < choices[k].len() {
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
        let total_set = FinSetObj::new(elements)?;
        let pushforward = FinSetMor::from_fn(total_set.clone(), f.cod.clone(), |v| {
            let Value::Pair(y, _) = v else { unreachable!() };
            (**y).clone()
        })?;
        Ok(DependentProduct {
            f: f.clone(),
            g: g.clone(),
            pushforward,
        })
    }

    /// Polynomial construction `P_f(x)`: the sum over `b` in `cod(f)` of
    /// `x^(f^-1 b)`, with elements as `(b, function-graph)` pairs.
    pub fn polynomial(&self, f: &FinSetMor, x: &FinSetObj) -> Result<FinSetObj, SetError> {
        let mut total: u128 = 0;
        for bi in 0..f.cod.len() {
            let fiber = f.preimage_ix(bi).len() as u32;
            total = total.saturating_add((x.len() as u128).checked_pow(fiber).unwrap_or(u128::MAX));
        }
        guard(total, self.ceiling)?;
        let mut elements = Vec::new();
        for bi in 0..f.cod.len() {
            let b = f.cod.get(bi).clone();
            let fiber = f.preimage_ix(bi);
            if x.is_empty() && !fiber.is_empty() {
                continue;
            }
            let mut counter = vec![0usize; fiber.len()];
            loop {
                let graph: Vec<(Value, Value)> = fiber
                    .iter()
                    .enumerate()
                    .map(|(k, &ei)| (f.dom.get(ei).clone(), x.get(counter[k]).clone()))
                    .collect();
                elements.push(Value::Pair(
                    Box::new(b.clone()),
                    Box::new(Value::fun(graph)),
                ));
                let mut k = fiber.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    counter[k] += 1;
                    if counter[k] < x.len() {
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
        FinSetObj::new(elements)
    }

    /// Action of `P_f` on `h : x -> x'` (postcomposition on each component).
    pub fn polynomial_mor(&self, f: &FinSetMor, h: &FinSetMor) -> Result<FinSetMor, SetError> {
        let src = self.polynomial(f, &h.dom)?;
        let tgt = self.polynomial(f, &h.cod)?;
        FinSetMor::from_fn(src, tgt, |v| {
            let Value::Pair(b, s) = v else { unreachable!() };
            let Value::Fun(graph) = s.as_ref() else {
                unreachable!()
            };
            Value::Pair(
                b.clone(),
                Box::new(Value::Fun(
                    graph
                        .iter()
                        .map(|(a, z)| (a.clone(), h.apply(z).unwrap().clone()))
                        .collect(),
                )),
            )
        })
    }
}

impl DependentProduct {
    /// Transposes `h` in `Hom_/X(f^* p, g)` to `Hom_/Y(p, f_* g)`, where
    /// `f^* p` is the chosen pullback of `p` along `f`.
    pub fn transpose(
        &self,
        choosers: &Choosers,
        p: &FinSetMor,
        h: &FinSetMor,
    ) -> Result<FinSetMor, SetError> {
        if p.cod != self.f.cod {
            return Err(SetError::BoundaryMismatch("test family over Y".to_string()));
        }
        let pb = choosers.pullback(&self.f, p)?;
        if h.dom != *pb.apex() || h.cod != self.g.dom {
            return Err(SetError::BoundaryMismatch(
                "transpose argument boundary".to_string(),
            ));
        }
        if self.g.compose(h)? != *pb.proj1() {
            return Err(SetError::BoundaryMismatch(
                "argument is not a morphism over X".to_string(),
            ));
        }
        FinSetMor::from_fn(p.dom.clone(), self.pushforward.dom.clone(), |pt| {
            let y = p.apply(pt).unwrap().clone();
            let yi = self.f.cod.index_of(&y).unwrap();
            let graph: Vec<(Value, Value)> = self
                .f
                .preimage_ix(yi)
                .into_iter()
                .map(|xi| {
                    let x = self.f.dom.get(xi).clone();
                    let cell = Value::Record(vec![
                        ("l".to_string(), x.clone()),
                        ("m".to_string(), y.clone()),
                        ("r".to_string(), pt.clone()),
                    ]);
                    (x, h.apply(&cell).unwrap().clone())
                })
                .collect();
            Value::Pair(Box::new(y), Box::new(Value::fun(graph)))
        })
    }

    /// Inverse transposition.
    pub fn untranspose(
        &self,
        choosers: &Choosers,
        p: &FinSetMor,
        k: &FinSetMor,
    ) -> Result<FinSetMor, SetError> {
        if k.dom != p.dom || k.cod != self.pushforward.dom {
            return Err(SetError::BoundaryMismatch(
                "untranspose argument boundary".to_string(),
            ));
        }
        if self.pushforward.compose(k)? != *p {
            return Err(SetError::BoundaryMismatch(
                "argument is not a morphism over Y".to_string(),
            ));
        }
        let pb = choosers.pullback(&self.f, p)?;
        FinSetMor::from_fn(pb.apex().clone(), self.g.dom.clone(), |cell| {
            let Value::Record(fields) = cell else {
                unreachable!()
            };
            let x = &fields.iter().find(|(n, _)| n == "l").unwrap().1;
            let pt = &fields.iter().find(|(n, _)| n == "r").unwrap().1;
            let Value::Pair(_, section) = k.apply(pt).unwrap() else {
                unreachable!()
            };
            let Value::Fun(graph) = section.as_ref() else {
                unreachable!()
            };
            graph.iter().find(|(a, _)| a == x).unwrap().1.clone()
        })
    }
}

// ---------------------------------------------------------------------------
// Limit certification over finite sets
// ---------------------------------------------------------------------------

/// Certificate from [`is_limiting`]. Competing cones factor through matching
/// families, so the bijection with the canonical limit carries existence and
/// uniqueness of all mediators; the witness on failure is a singleton cone.
#[derive(Debug, Clone)]
pub enum SetLimitCertificate {
    Limiting {
        /// comparison bijection apex -> canonical limit
        comparison: FinSetMor,
        inverse: FinSetMor,
    },
    NotLimiting {
        witness: SetCone,
        mediators: Vec<FinSetMor>,
    },
}

impl SetLimitCertificate {
    pub fn is_limiting(&self) -> bool {
        matches!(self, SetLimitCertificate::Limiting { .. })
    }
}

/// Certifies whether a cone over a set-valued diagram is limiting. Competing
/// apexes are bounded by the canonical matching-families set: a cone with
/// apex `X` is exactly an `X`-indexed family of point cones, so the point
/// cones decide existence and uniqueness of every mediator.
pub fn is_limiting(choosers: &Choosers, cone: &SetCone) -> Result<SetLimitCertificate, SetError> {
    cone.validate()?;
    let canonical = choosers.limit(&cone.diagram).map_err(|e| match e {
        SetError::GuardrailExceeded { .. } => SetError::SearchSpaceUnbounded,
        other => other,
    })?;
    let comparison = choosers.mediating(cone, &canonical)?;
    if let Some(inverse) = comparison.inverse() {
        return Ok(SetLimitCertificate::Limiting {
            comparison,
            inverse,
        });
    }
    // package a family hit zero or >= 2 times as a singleton competing cone
    let mut hits: Vec<Vec<usize>> = vec![Vec::new(); canonical.apex.len()];
    for i in 0..cone.apex.len() {
        hits[comparison.apply_ix(i)].push(i);
    }
    let shape = &cone.diagram.shape;
    let bad = (0..canonical.apex.len())
        .find(|&fi| hits[fi].len() != 1)
        .expect("non-bijective comparison has a witness family");
    let family = canonical.apex.get(bad).clone();
    let witness_apex = FinSetObj::new(vec![family])?;
    let legs: Vec<FinSetMor> = (0..shape.obj_count())
        .map(|i| {
            FinSetMor::from_fn(witness_apex.clone(), cone.diagram.objs[i].clone(), |v| {
                let Value::Record(fields) = v else {
                    unreachable!()
                };
                fields[i].1.clone()
            })
        })
        .collect::<Result<_, _>>()?;
    let witness = SetCone::new(cone.diagram.clone(), witness_apex.clone(), legs)?;
    let mediators = hits[bad]
        .iter()
        .map(|&i| {
            FinSetMor::from_fn(witness_apex.clone(), cone.apex.clone(), |_| {
                cone.apex.get(i).clone()
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SetLimitCertificate::NotLimiting { witness, mediators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::shapes;

    fn ch() -> Choosers {
        Choosers::default()
    }

    fn discrete_diagram(sets: &[(&str, usize)]) -> SetDiagram {
        let names: Vec<&str> = sets.iter().map(|(n, _)| *n).collect();
        let shape = Arc::new(shapes::discrete(&names));
        let mut objs = vec![FinSetObj::empty(); sets.len()];
        let mut mors = vec![FinSetMor::identity(&FinSetObj::empty()); sets.len()];
        for (n, k) in sets {
            let i = shape.obj_ix(n).unwrap();
            objs[i] = FinSetObj::canonical(*k);
            mors[shape.identity_of(i)] = FinSetMor::identity(&objs[i]);
        }
        SetDiagram::new(shape, objs, mors).unwrap()
    }

    fn enumerate_functions(
        dom: &FinSetObj,
        cod: &FinSetObj,
        visit: &mut impl FnMut(&FinSetMor),
    ) {
        if dom.is_empty() {
            visit(&FinSetMor::new(dom.clone(), cod.clone(), &[]).unwrap());
            return;
        }
        if cod.is_empty() {
            return;
        }
        let mut counter = vec![0usize; dom.len()];
        loop {
            let pairs: Vec<(Value, Value)> = dom
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), cod.get(counter[i]).clone()))
                .collect();
            visit(&FinSetMor::new(dom.clone(), cod.clone(), &pairs).unwrap());
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

    #[test]
    fn empty_limit_is_singleton() {
        let d = SetDiagram::new(Arc::new(shapes::empty()), vec![], vec![]).unwrap();
        let cone = ch().limit(&d).unwrap();
        assert_eq!(cone.apex.len(), 1);
        assert_eq!(cone.apex.get(0), &Value::unit());
        assert_eq!(cone.apex.to_string(), "{()}");
    }

    #[test]
    fn product_of_two_and_three_has_six() {
        let d = discrete_diagram(&[("l", 2), ("r", 3)]);
        let cone = ch().limit(&d).unwrap();
        assert_eq!(cone.apex.len(), 6);
        assert!(is_limiting(&ch(), &cone).unwrap().is_limiting());
    }

    #[test]
    fn pullback_of_identity_and_constant() {
        // f = id on 2 elements, g constant from a singleton: size 1
        let two = FinSetObj::canonical(2);
        let one = FinSetObj::canonical(1);
        let f = FinSetMor::identity(&two);
        let g = FinSetMor::from_fn(one, two, |_| Value::atom("1")).unwrap();
        let pb = ch().pullback(&f, &g).unwrap();
        assert_eq!(pb.apex().len(), 1);
    }

    #[test]
    fn kernel_pair_of_injection_has_domain_size() {
        let three = FinSetObj::canonical(3);
        let four = FinSetObj::canonical(4);
        let f = FinSetMor::from_fn(three, four, |v| v.clone()).unwrap();
        let pb = ch().pullback(&f, &f).unwrap();
        assert_eq!(pb.apex().len(), 3);
    }

    #[test]
    fn mediating_of_canonical_is_identity() {
        let d = discrete_diagram(&[("l", 2), ("r", 2)]);
        let cone = ch().limit(&d).unwrap();
        let m = ch().mediating(&cone, &cone).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn mediating_from_empty_apex() {
        let d = discrete_diagram(&[("l", 2), ("r", 2)]);
        let limit = ch().limit(&d).unwrap();
        let empty = FinSetObj::empty();
        let legs = (0..2)
            .map(|i| FinSetMor::new(empty.clone(), d.objs[i].clone(), &[]).unwrap())
            .collect();
        let cone = SetCone::new(d, empty, legs).unwrap();
        let m = ch().mediating(&cone, &limit).unwrap();
        assert_eq!(m.dom.len(), 0);
    }

    #[test]
    fn mediating_solves_reordered_product() {
        // a product cone re-ordered by an apex bijection maps back by it
        let d = discrete_diagram(&[("l", 2), ("r", 2)]);
        let limit = ch().limit(&d).unwrap();
        let relabeled: FinSetObj = (0..4).map(|i| Value::atom(&format!("p{i}"))).collect();
        // p_i corresponds to limit element (3 - i)
        let legs: Vec<FinSetMor> = (0..2)
            .map(|obj| {
                FinSetMor::from_fn(relabeled.clone(), d.objs[obj].clone(), |v| {
                    let Value::Atom(a) = v else { unreachable!() };
                    let i: usize = a[1..].parse().unwrap();
                    limit.legs[obj].apply(limit.apex.get(3 - i)).unwrap().clone()
                })
                .unwrap()
            })
            .collect();
        let cone = SetCone::new(d, relabeled, legs).unwrap();
        let m = ch().mediating(&cone, &limit).unwrap();
        assert!(m.is_bijection());
        assert_eq!(
            m.apply(&Value::atom("p0")).unwrap(),
            limit.apex.get(3)
        );
    }

    #[test]
    fn mediating_rejects_non_cone() {
        let two = FinSetObj::canonical(2);
        let f = FinSetMor::identity(&two);
        let pb = ch().pullback(&f, &f).unwrap();
        let d = pb.cone.diagram.clone();
        let limit = ch().limit(&d).unwrap();
        let swap = FinSetMor::new(
            two.clone(),
            two.clone(),
            &[
                (Value::atom("0"), Value::atom("1")),
                (Value::atom("1"), Value::atom("0")),
            ],
        )
        .unwrap();
        let shape = d.shape.clone();
        let mut legs = vec![FinSetMor::identity(&two); 3];
        legs[shape.obj_ix("r").unwrap()] = swap;
        let cone = SetCone {
            diagram: d,
            apex: two,
            legs,
        };
        let err = ch().mediating(&cone, &limit).unwrap_err();
        assert!(matches!(err, SetError::NotACone(_)));
    }

    #[test]
    fn exponential_counts() {
        let c = ch();
        let (e, _) = c
            .exponential(&FinSetObj::empty(), &FinSetObj::canonical(3))
            .unwrap();
        assert_eq!(e.len(), 1);
        let (e, _) = c
            .exponential(&FinSetObj::canonical(2), &FinSetObj::canonical(1))
            .unwrap();
        assert_eq!(e.len(), 1);
        let (e, ev) = c
            .exponential(&FinSetObj::canonical(2), &FinSetObj::canonical(3))
            .unwrap();
        assert_eq!(e.len(), 9);
        assert_eq!(ev.dom.len(), 18);
        // evaluation really applies the function component
        for cell in ev.dom.iter() {
            let Value::Record(fields) = cell else {
                unreachable!()
            };
            let a = &fields[0].1;
            let Value::Fun(graph) = &fields[1].1 else {
                unreachable!()
            };
            let expected = &graph.iter().find(|(x, _)| x == a).unwrap().1;
            assert_eq!(ev.apply(cell).unwrap(), expected);
        }
    }

    #[test]
    fn dependent_product_along_identity() {
        let c = ch();
        let three = FinSetObj::canonical(3);
        let f = FinSetMor::identity(&three);
        let z: FinSetObj = (0..4).map(|i| Value::atom(&i.to_string())).collect();
        let g = FinSetMor::from_fn(z.clone(), three, |v| {
            let Value::Atom(a) = v else { unreachable!() };
            let i: usize = a.parse().unwrap();
            Value::Atom([0, 0, 1, 2][i].to_string())
        })
        .unwrap();
        let dp = c.dependent_product(&f, &g).unwrap();
        assert_eq!(dp.pushforward.dom.len(), z.len());
    }

    #[test]
    fn dependent_product_collapses_fibers() {
        // f : 2 -> 1, g = id on 2: exactly one section over the single fiber
        let c = ch();
        let two = FinSetObj::canonical(2);
        let one = FinSetObj::canonical(1);
        let f = FinSetMor::from_fn(two.clone(), one, |_| Value::atom("0")).unwrap();
        let g = FinSetMor::identity(&two);
        let dp = c.dependent_product(&f, &g).unwrap();
        assert_eq!(dp.pushforward.dom.len(), 1);
    }

    #[test]
    fn dependent_product_el_family() {
        // El : {e} -> {bot, top} with e over top, g = id: the empty section
        // over bot plus one section over top, total 2
        let c = ch();
        let el_dom = FinSetObj::new(vec![Value::atom("e")]).unwrap();
        let ty = FinSetObj::new(vec![Value::atom("bot"), Value::atom("top")]).unwrap();
        let el = FinSetMor::from_fn(el_dom.clone(), ty, |_| Value::atom("top")).unwrap();
        let g = FinSetMor::identity(&el_dom);
        let dp = c.dependent_product(&el, &g).unwrap();
        assert_eq!(dp.pushforward.dom.len(), 2);
    }

    #[test]
    fn polynomial_sizes() {
        let c = ch();
        let e = FinSetObj::empty();
        let f = FinSetMor::new(e.clone(), e, &[]).unwrap();
        assert_eq!(c.polynomial(&f, &FinSetObj::canonical(5)).unwrap().len(), 0);
        let el_dom = FinSetObj::new(vec![Value::atom("e")]).unwrap();
        let ty = FinSetObj::new(vec![Value::atom("bot"), Value::atom("top")]).unwrap();
        let el = FinSetMor::from_fn(el_dom, ty, |_| Value::atom("top")).unwrap();
        assert_eq!(c.polynomial(&el, &FinSetObj::canonical(2)).unwrap().len(), 3);
        let one = FinSetObj::canonical(1);
        let id1 = FinSetMor::identity(&one);
        assert_eq!(c.polynomial(&id1, &FinSetObj::canonical(4)).unwrap().len(), 4);
    }

    #[test]
    fn polynomial_closed_form() {
        let c = ch();
        let dom: FinSetObj = (0..4).map(|i| Value::atom(&i.to_string())).collect();
        let cod = FinSetObj::canonical(3);
        let f = FinSetMor::from_fn(dom, cod.clone(), |v| {
            let Value::Atom(a) = v else { unreachable!() };
            let i: usize = a.parse().unwrap();
            Value::Atom((i % 2).to_string())
        })
        .unwrap();
        let x = FinSetObj::canonical(3);
        let poly = c.polynomial(&f, &x).unwrap();
        let expected: usize = (0..cod.len())
            .map(|b| x.len().pow(f.preimage_ix(b).len() as u32))
            .sum();
        assert_eq!(poly.len(), expected);
    }

    #[test]
    fn polynomial_mor_postcomposes() {
        let c = ch();
        let two = FinSetObj::canonical(2);
        let one = FinSetObj::canonical(1);
        let f = FinSetMor::from_fn(two.clone(), one, |_| Value::atom("0")).unwrap();
        let h = FinSetMor::from_fn(two.clone(), two, |v| {
            if v == &Value::atom("0") {
                Value::atom("1")
            } else {
                Value::atom("0")
            }
        })
        .unwrap();
        let pm = c.polynomial_mor(&f, &h).unwrap();
        assert!(pm.is_bijection());
    }

    #[test]
    fn adjunction_counting_small() {
        // |Hom_/X(f^* p, g)| = |Hom_/Y(p, f_* g)| by enumerating both sides
        let c = ch();
        let x = FinSetObj::canonical(2);
        let y = FinSetObj::canonical(2);
        let z = FinSetObj::canonical(3);
        let pdom = FinSetObj::canonical(2);
        let f = FinSetMor::from_fn(x.clone(), y.clone(), |v| v.clone()).unwrap();
        let g = FinSetMor::from_fn(z.clone(), x, |v| {
            let Value::Atom(a) = v else { unreachable!() };
            let i: usize = a.parse().unwrap();
            Value::Atom((i % 2).to_string())
        })
        .unwrap();
        let p = FinSetMor::from_fn(pdom.clone(), y, |_| Value::atom("0")).unwrap();
        let dp = c.dependent_product(&f, &g).unwrap();
        let pb = c.pullback(&f, &p).unwrap();

        let mut left = Vec::new();
        enumerate_functions(pb.apex(), &z, &mut |h| {
            if g.compose(h).unwrap() == *pb.proj1() {
                left.push(h.clone());
            }
        });
        let mut right = Vec::new();
        enumerate_functions(&pdom, &dp.pushforward.dom, &mut |k| {
            if dp.pushforward.compose(k).unwrap() == p {
                right.push(k.clone());
            }
        });
        assert_eq!(left.len(), right.len());
        assert!(!left.is_empty());
        for h in &left {
            let k = dp.transpose(&c, &p, h).unwrap();
            assert!(right.contains(&k));
            let h2 = dp.untranspose(&c, &p, &k).unwrap();
            assert_eq!(&h2, h);
        }
    }

    #[test]
    fn is_limiting_rejects_wrong_size() {
        // product of 2 and 3 with an apex of size 5 cannot be limiting
        let d = discrete_diagram(&[("l", 2), ("r", 3)]);
        let five = FinSetObj::canonical(5);
        let legs: Vec<FinSetMor> = (0..2)
            .map(|i| {
                FinSetMor::from_fn(five.clone(), d.objs[i].clone(), |_| Value::atom("0")).unwrap()
            })
            .collect();
        let cone = SetCone::new(d, five, legs).unwrap();
        let cert = is_limiting(&ch(), &cone).unwrap();
        assert!(!cert.is_limiting());
        let SetLimitCertificate::NotLimiting { witness, mediators } = cert else {
            unreachable!()
        };
        assert!(mediators.len() != 1);
        witness.validate().unwrap();
    }

    #[test]
    fn guardrail_trips() {
        let c = Choosers { ceiling: 10 };
        let err = c
            .exponential(&FinSetObj::canonical(4), &FinSetObj::canonical(4))
            .unwrap_err();
        assert!(matches!(err, SetError::GuardrailExceeded { .. }));
    }

    #[test]
    fn choosers_are_deterministic() {
        let c = ch();
        let d = discrete_diagram(&[("l", 3), ("r", 2)]);
        assert_eq!(c.limit(&d).unwrap(), c.limit(&d).unwrap());
        let (e1, _) = c
            .exponential(&FinSetObj::canonical(2), &FinSetObj::canonical(2))
            .unwrap();
        let (e2, _) = c
            .exponential(&FinSetObj::canonical(2), &FinSetObj::canonical(2))
            .unwrap();
        assert_eq!(e1, e2);
    }
}
