//! Finite categories with explicit composition tables.
//!
//! Everything here is checked exhaustively: categories validate their laws on
//! construction, functors check functoriality on every composable pair, and
//! limits are certified by enumerating competing cones and mediators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Hard cap on paths explored while saturating a presentation. Saturation past
/// this point almost always means the presented category is infinite.
const SATURATION_PATH_GUARD: usize = 500_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("duplicate object id `{0}`")]
    DuplicateObject(String),
    #[error("duplicate morphism id `{0}`")]
    DuplicateMorphism(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("missing identity for object `{0}`")]
    MissingIdentity(String),
    #[error("missing composite for `{g}` after `{f}`")]
    MissingComposite { g: String, f: String },
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("identity law violated at morphism `{morphism}`")]
    IdentityLawViolation { morphism: String },
    #[error("associativity violated on (`{h}`, `{g}`, `{f}`)")]
    AssociativityViolation { h: String, g: String, f: String },
    #[error("functoriality violated: {0}")]
    FunctorialityViolation(String),
    #[error("naturality violated at morphism `{0}`")]
    NaturalityViolation(String),
    #[error("legs do not commute with the diagram at `{0}`")]
    NotACone(String),
    #[error("ill-typed relation: {0}")]
    IllTypedRelation(String),
    #[error("presentation did not close within saturation bound {bound}")]
    BoundExceeded { bound: usize },
}

/// A morphism record: id plus object indices for its boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Mor {
    id: String,
    dom: usize,
    cod: usize,
}

/// Composition storage: dense matrix for small categories, keyed map above
/// the threshold (functor categories can have thousands of morphisms).
#[derive(Clone, PartialEq, Eq)]
enum ComposeTable {
    /// row-major (g * n + f) -> composite index, usize::MAX when undefined
    Dense(Vec<usize>),
    Sparse(BTreeMap<(usize, usize), usize>),
}

const DENSE_TABLE_LIMIT: usize = 1500;

impl ComposeTable {
    fn with_capacity(n_mor: usize) -> ComposeTable {
        if n_mor <= DENSE_TABLE_LIMIT {
            ComposeTable::Dense(vec![usize::MAX; n_mor * n_mor])
        } else {
            ComposeTable::Sparse(BTreeMap::new())
        }
    }

    fn get(&self, n_mor: usize, g: usize, f: usize) -> usize {
        match self {
            ComposeTable::Dense(v) => v[g * n_mor + f],
            ComposeTable::Sparse(m) => m.get(&(g, f)).copied().unwrap_or(usize::MAX),
        }
    }

    fn set(&mut self, n_mor: usize, g: usize, f: usize, gf: usize) {
        match self {
            ComposeTable::Dense(v) => v[g * n_mor + f] = gf,
            ComposeTable::Sparse(m) => {
                m.insert((g, f), gf);
            }
        }
    }
}

/// A finite category: objects, morphisms, identities, and a total composition
/// table, all validated on construction.
///
/// Object and morphism identity is the identifier string; internal indices
/// follow the lexicographic order of ids, so equal categories have equal
/// representations.
#[derive(Clone, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Mor>,
    identity: Vec<usize>,
    compose: ComposeTable,
    /// morphisms grouped by domain object, in index order
    by_dom: Vec<Vec<usize>>,
}

impl fmt::Debug for FinCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FinCategory({} objects, {} morphisms)",
            self.objects.len(),
            self.morphisms.len()
        )
    }
}

/// Unchecked category data, as read from a file or built by hand.
#[derive(Debug, Clone, Default)]
pub struct RawCategory {
    pub objects: Vec<String>,
    /// (id, dom, cod)
    pub morphisms: Vec<(String, String, String)>,
    /// object id -> identity morphism id
    pub identities: Vec<(String, String)>,
    /// (g, f, g_after_f)
    pub composites: Vec<(String, String, String)>,
}

impl RawCategory {
    pub fn validate(&self) -> Result<FinCategory, CatError> {
        FinCategory::from_raw(self)
    }
}

impl FinCategory {
    fn from_raw(raw: &RawCategory) -> Result<FinCategory, CatError> {
        let mut objects = raw.objects.clone();
        objects.sort();
        for w in objects.windows(2) {
            if w[0] == w[1] {
                return Err(CatError::DuplicateObject(w[0].clone()));
            }
        }
        let obj_ix: BTreeMap<&str, usize> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i))
            .collect();

        let mut morphisms: Vec<(String, String, String)> = raw.morphisms.clone();
        morphisms.sort_by(|a, b| a.0.cmp(&b.0));
        for w in morphisms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CatError::DuplicateMorphism(w[0].0.clone()));
            }
        }
        let mut mors = Vec::with_capacity(morphisms.len());
        for (id, dom, cod) in &morphisms {
            let dom = *obj_ix
                .get(dom.as_str())
                .ok_or_else(|| CatError::UnknownObject(dom.clone()))?;
            let cod = *obj_ix
                .get(cod.as_str())
                .ok_or_else(|| CatError::UnknownObject(cod.clone()))?;
            mors.push(Mor {
                id: id.clone(),
                dom,
                cod,
            });
        }
        let mor_ix: BTreeMap<&str, usize> = mors
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.as_str(), i))
            .collect();

        let mut identity = vec![usize::MAX; objects.len()];
        for (o, m) in &raw.identities {
            let oi = *obj_ix
                .get(o.as_str())
                .ok_or_else(|| CatError::UnknownObject(o.clone()))?;
            let mi = *mor_ix
                .get(m.as_str())
                .ok_or_else(|| CatError::UnknownMorphism(m.clone()))?;
            if mors[mi].dom != oi || mors[mi].cod != oi {
                return Err(CatError::BoundaryMismatch(format!(
                    "identity `{m}` of `{o}` is not an endomorphism of `{o}`"
                )));
            }
            identity[oi] = mi;
        }
        for (oi, id) in identity.iter().enumerate() {
            if *id == usize::MAX {
                return Err(CatError::MissingIdentity(objects[oi].clone()));
            }
        }

        let n = mors.len();
        let mut compose = ComposeTable::with_capacity(n);
        for (g, f, gf) in &raw.composites {
            let g = *mor_ix
                .get(g.as_str())
                .ok_or_else(|| CatError::UnknownMorphism(g.clone()))?;
            let f = *mor_ix
                .get(f.as_str())
                .ok_or_else(|| CatError::UnknownMorphism(f.clone()))?;
            let gf = *mor_ix
                .get(gf.as_str())
                .ok_or_else(|| CatError::UnknownMorphism(gf.clone()))?;
            if mors[f].cod != mors[g].dom {
                return Err(CatError::BoundaryMismatch(format!(
                    "table entry `{}` after `{}`: factors not composable",
                    mors[g].id, mors[f].id
                )));
            }
            compose.set(n, g, f, gf);
        }

        let mut by_dom = vec![Vec::new(); objects.len()];
        for (i, m) in mors.iter().enumerate() {
            by_dom[m.dom].push(i);
        }
        let cat = FinCategory {
            objects,
            morphisms: mors,
            identity,
            compose,
            by_dom,
        };
        cat.check_laws()?;
        Ok(cat)
    }

    /// Re-validates the category laws; succeeds for every constructed value.
    pub fn revalidate(&self) -> Result<(), CatError> {
        self.check_laws()
    }

    /// Direct index-based construction for builders whose names are already
    /// in sorted order (functor categories). Laws are still checked.
    pub(crate) fn from_sorted_parts(
        objects: Vec<String>,
        morphisms: Vec<(String, usize, usize)>,
        identity: Vec<usize>,
        composites: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<FinCategory, CatError> {
        debug_assert!(objects.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(morphisms.windows(2).all(|w| w[0].0 < w[1].0));
        let mors: Vec<Mor> = morphisms
            .into_iter()
            .map(|(id, dom, cod)| Mor { id, dom, cod })
            .collect();
        let n = mors.len();
        let mut compose = ComposeTable::with_capacity(n);
        for (g, f, gf) in composites {
            compose.set(n, g, f, gf);
        }
        let mut by_dom = vec![Vec::new(); objects.len()];
        for (i, m) in mors.iter().enumerate() {
            by_dom[m.dom].push(i);
        }
        let cat = FinCategory {
            objects,
            morphisms: mors,
            identity,
            compose,
            by_dom,
        };
        cat.check_laws()?;
        Ok(cat)
    }

    fn check_laws(&self) -> Result<(), CatError> {
        let n = self.morphisms.len();
        // totality + boundary coherence of the table, walking composable
        // pairs through the domain index
        for f in 0..n {
            for &g in &self.by_dom[self.morphisms[f].cod] {
                let entry = self.compose.get(n, g, f);
                if entry == usize::MAX {
                    return Err(CatError::MissingComposite {
                        g: self.morphisms[g].id.clone(),
                        f: self.morphisms[f].id.clone(),
                    });
                }
                let c = &self.morphisms[entry];
                if c.dom != self.morphisms[f].dom || c.cod != self.morphisms[g].cod {
                    return Err(CatError::BoundaryMismatch(format!(
                        "composite `{}` of `{}` after `{}` has wrong boundary",
                        c.id, self.morphisms[g].id, self.morphisms[f].id
                    )));
                }
            }
        }
        // spurious entries (dense table only can hold them silently)
        if let ComposeTable::Dense(table) = &self.compose {
            for g in 0..n {
                for f in 0..n {
                    if table[g * n + f] != usize::MAX
                        && self.morphisms[f].cod != self.morphisms[g].dom
                    {
                        return Err(CatError::BoundaryMismatch(format!(
                            "table declares `{}` after `{}` though not composable",
                            self.morphisms[g].id, self.morphisms[f].id
                        )));
                    }
                }
            }
        } else if let ComposeTable::Sparse(map) = &self.compose {
            for (&(g, f), _) in map {
                if self.morphisms[f].cod != self.morphisms[g].dom {
                    return Err(CatError::BoundaryMismatch(format!(
                        "table declares `{}` after `{}` though not composable",
                        self.morphisms[g].id, self.morphisms[f].id
                    )));
                }
            }
        }
        // identity laws
        for f in 0..n {
            let m = &self.morphisms[f];
            if self.compose.get(n, self.identity[m.cod], f) != f
                || self.compose.get(n, f, self.identity[m.dom]) != f
            {
                return Err(CatError::IdentityLawViolation {
                    morphism: m.id.clone(),
                });
            }
        }
        // associativity on all composable triples
        for f in 0..n {
            for &g in &self.by_dom[self.morphisms[f].cod] {
                let gf = self.compose.get(n, g, f);
                for &h in &self.by_dom[self.morphisms[g].cod] {
                    let hg = self.compose.get(n, h, g);
                    if self.compose.get(n, h, gf) != self.compose.get(n, hg, f) {
                        return Err(CatError::AssociativityViolation {
                            h: self.morphisms[h].id.clone(),
                            g: self.morphisms[g].id.clone(),
                            f: self.morphisms[f].id.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn obj_count(&self) -> usize {
        self.objects.len()
    }

    pub fn mor_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn obj_name(&self, i: usize) -> &str {
        &self.objects[i]
    }

    pub fn mor_name(&self, i: usize) -> &str {
        &self.morphisms[i].id
    }

    pub fn obj_ix(&self, name: &str) -> Option<usize> {
        self.objects.binary_search_by(|o| o.as_str().cmp(name)).ok()
    }

    pub fn mor_ix(&self, name: &str) -> Option<usize> {
        self.morphisms
            .binary_search_by(|m| m.id.as_str().cmp(name))
            .ok()
    }

    pub fn dom(&self, m: usize) -> usize {
        self.morphisms[m].dom
    }

    pub fn cod(&self, m: usize) -> usize {
        self.morphisms[m].cod
    }

    pub fn identity_of(&self, o: usize) -> usize {
        self.identity[o]
    }

    pub fn is_identity(&self, m: usize) -> bool {
        self.identity[self.morphisms[m].dom] == m
    }

    /// `g` after `f`; `None` when the boundaries do not match.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        if self.morphisms[f].cod == self.morphisms[g].dom {
            Some(self.compose.get(self.morphisms.len(), g, f))
        } else {
            None
        }
    }

    /// Morphisms with domain `x`, in index order.
    pub fn from_obj(&self, x: usize) -> &[usize] {
        &self.by_dom[x]
    }

    /// Composes a path in diagrammatic order (first arrow applied first).
    pub fn compose_path(&self, at: usize, path: &[usize]) -> Result<usize, CatError> {
        let mut acc = self.identity[at];
        for &m in path {
            acc = self.compose(m, acc).ok_or_else(|| {
                CatError::BoundaryMismatch(format!(
                    "path breaks at `{}` after `{}`",
                    self.morphisms[m].id, self.morphisms[acc].id
                ))
            })?;
        }
        Ok(acc)
    }

    pub fn hom(&self, x: usize, y: usize) -> Vec<usize> {
        self.by_dom[x]
            .iter()
            .copied()
            .filter(|&m| self.morphisms[m].cod == y)
            .collect()
    }

    pub fn objects(&self) -> impl Iterator<Item = (usize, &str)> {
        self.objects.iter().enumerate().map(|(i, o)| (i, o.as_str()))
    }

    pub fn morphisms(&self) -> impl Iterator<Item = (usize, &str)> {
        self.morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| (i, m.id.as_str()))
    }

    /// Objects `t` with exactly one morphism from every object.
    pub fn terminal_objects(&self) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&t| (0..self.objects.len()).all(|x| self.hom(x, t).len() == 1))
            .collect()
    }
}

/// Convenience constructor used by the builders below. Boundaries are given
/// by index into `objects`; identities and table are synthesized by closure.
pub(crate) struct CatBuilder {
    pub objects: Vec<String>,
    pub morphisms: Vec<(String, usize, usize)>,
    pub compose: BTreeMap<(usize, usize), usize>,
    pub identity: Vec<usize>,
}

impl CatBuilder {
    pub fn finish(self) -> Result<FinCategory, CatError> {
        let raw = RawCategory {
            objects: self.objects.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|(id, d, c)| {
                    (
                        id.clone(),
                        self.objects[*d].clone(),
                        self.objects[*c].clone(),
                    )
                })
                .collect(),
            identities: self
                .identity
                .iter()
                .enumerate()
                .map(|(o, m)| (self.objects[o].clone(), self.morphisms[*m].0.clone()))
                .collect(),
            composites: self
                .compose
                .iter()
                .map(|((g, f), gf)| {
                    (
                        self.morphisms[*g].0.clone(),
                        self.morphisms[*f].0.clone(),
                        self.morphisms[*gf].0.clone(),
                    )
                })
                .collect(),
        };
        raw.validate()
    }
}

// ---------------------------------------------------------------------------
// Presentations
// ---------------------------------------------------------------------------

/// A category presentation: a finite graph plus parallel-path relations,
/// quotiented by saturating path rewrites up to `saturation_bound`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub vertices: Vec<String>,
    /// (name, dom, cod)
    pub arrows: Vec<(String, String, String)>,
    /// pairs of parallel paths, each in diagrammatic order; an empty side
    /// denotes the identity path (endpoints inferred from the other side)
    pub relations: Vec<(Vec<String>, Vec<String>)>,
    pub saturation_bound: usize,
}

/// A path in the free category: start vertex plus arrow indices in
/// diagrammatic order.
type Path = (usize, Vec<usize>);

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Quotient of the free path category on the presentation's graph by the
/// congruence generated by its relations.
///
/// Returns `BoundExceeded` when morphisms distinct from everything of length
/// `<= saturation_bound` still appear one step past the bound.
pub fn present_category(p: &Presentation) -> Result<FinCategory, CatError> {
    if p.saturation_bound == 0 {
        return Err(CatError::BoundExceeded { bound: 0 });
    }
    let mut vertices = p.vertices.clone();
    vertices.sort();
    vertices.dedup();
    if vertices.len() != p.vertices.len() {
        return Err(CatError::DuplicateObject("(presentation vertex)".into()));
    }
    let vix: BTreeMap<&str, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut arrows = p.arrows.clone();
    arrows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut arr: Vec<(String, usize, usize)> = Vec::new();
    for (name, d, c) in &arrows {
        if arr.iter().any(|(n, _, _)| n == name) {
            return Err(CatError::DuplicateMorphism(name.clone()));
        }
        let d = *vix
            .get(d.as_str())
            .ok_or_else(|| CatError::UnknownObject(d.clone()))?;
        let c = *vix
            .get(c.as_str())
            .ok_or_else(|| CatError::UnknownObject(c.clone()))?;
        arr.push((name.clone(), d, c));
    }
    let aix: BTreeMap<&str, usize> = arr
        .iter()
        .enumerate()
        .map(|(i, a)| (a.0.as_str(), i))
        .collect();

    // resolve and type-check relations
    let mut rels: Vec<(Path, Path)> = Vec::new();
    let mut max_rel = 1usize;
    for (lhs, rhs) in &p.relations {
        let resolve = |side: &[String]| -> Result<Vec<usize>, CatError> {
            side.iter()
                .map(|s| {
                    aix.get(s.as_str())
                        .copied()
                        .ok_or_else(|| CatError::UnknownMorphism(s.clone()))
                })
                .collect()
        };
        let l = resolve(lhs)?;
        let r = resolve(rhs)?;
        let ends = |side: &[usize]| -> Result<Option<(usize, usize)>, CatError> {
            let Some(&first) = side.first() else {
                return Ok(None);
            };
            let mut at = arr[first].1;
            let start = at;
            for &a in side {
                if arr[a].1 != at {
                    return Err(CatError::IllTypedRelation(format!(
                        "path breaks at `{}`",
                        arr[a].0
                    )));
                }
                at = arr[a].2;
            }
            Ok(Some((start, at)))
        };
        let le = ends(&l)?;
        let re = ends(&r)?;
        let (start, end) = match (le, re) {
            (Some(e), None) | (None, Some(e)) => e,
            (Some(a), Some(b)) => {
                if a != b {
                    return Err(CatError::IllTypedRelation(
                        "relation sides are not parallel".into(),
                    ));
                }
                a
            }
            (None, None) => continue,
        };
        if start != end && (l.is_empty() || r.is_empty()) {
            return Err(CatError::IllTypedRelation(
                "identity path equated with a non-endo path".into(),
            ));
        }
        max_rel = max_rel.max(l.len()).max(r.len());
        rels.push(((start, l), (start, r)));
    }

    let bound = p.saturation_bound;
    let cap = 2 * bound + max_rel;

    // enumerate all paths of length <= cap
    let mut paths: Vec<Path> = Vec::new();
    let mut index: BTreeMap<Path, usize> = BTreeMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in 0..vertices.len() {
        let path = (v, Vec::new());
        index.insert(path.clone(), paths.len());
        queue.push_back(paths.len());
        paths.push(path);
    }
    while let Some(i) = queue.pop_front() {
        let (start, word) = paths[i].clone();
        if word.len() >= cap {
            continue;
        }
        let at = word.last().map(|&a| arr[a].2).unwrap_or(start);
        for (a, arrow) in arr.iter().enumerate() {
            if arrow.1 != at {
                continue;
            }
            let mut w = word.clone();
            w.push(a);
            let path = (start, w);
            if !index.contains_key(&path) {
                if paths.len() >= SATURATION_PATH_GUARD {
                    return Err(CatError::BoundExceeded { bound });
                }
                index.insert(path.clone(), paths.len());
                queue.push_back(paths.len());
                paths.push(path);
            }
        }
    }

    // union rewrites: every occurrence of a relation side swaps for the other
    let mut uf = UnionFind::new(paths.len());
    for i in 0..paths.len() {
        let (start, word) = &paths[i];
        for ((ls, l), (rs, r)) in &rels {
            for ((side_start, side), to) in [((ls, l), r), ((rs, r), l)] {
                let side = side.as_slice();
                let n = side.len();
                if n > word.len() {
                    continue;
                }
                for pos in 0..=(word.len() - n) {
                    if &word[pos..pos + n] != side {
                        continue;
                    }
                    // vertex where the occurrence begins must match the side's start
                    let at = if pos == 0 {
                        *start
                    } else {
                        arr[word[pos - 1]].2
                    };
                    if at != *side_start {
                        continue;
                    }
                    let mut w = word[..pos].to_vec();
                    w.extend_from_slice(to);
                    w.extend_from_slice(&word[pos + n..]);
                    if w.len() <= cap {
                        if let Some(&j) = index.get(&(*start, w)) {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
    }

    // canonical representative per class: shortest, then lexicographic
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..paths.len() {
        let root = uf.find(i);
        let better = match rep.get(&root) {
            None => true,
            Some(&j) => {
                let (pi, pj) = (&paths[i], &paths[j]);
                (pi.1.len(), &pi.1) < (pj.1.len(), &pj.1)
            }
        };
        if better {
            rep.insert(root, i);
        }
    }

    // a morphism is a class whose representative has length <= bound
    let in_bound: BTreeSet<usize> = rep
        .iter()
        .filter(|(_, &i)| paths[i].1.len() <= bound)
        .map(|(&root, _)| root)
        .collect();

    // closure check: one step past the bound must collapse into bound
    for i in 0..paths.len() {
        if paths[i].1.len() == bound + 1 {
            let root = uf.find(i);
            if !in_bound.contains(&root) {
                return Err(CatError::BoundExceeded { bound });
            }
        }
    }

    // name every morphism by its canonical representative path
    let mor_name = |path: &Path| -> String {
        if path.1.is_empty() {
            format!("id_{}", vertices[path.0])
        } else {
            path.1
                .iter()
                .map(|&a| arr[a].0.as_str())
                .collect::<Vec<_>>()
                .join(".")
        }
    };

    let mut roots: Vec<usize> = in_bound.iter().copied().collect();
    roots.sort_by(|a, b| {
        let (pa, pb) = (&paths[rep[a]], &paths[rep[b]]);
        mor_name(pa).cmp(&mor_name(pb))
    });
    let root_pos: BTreeMap<usize, usize> =
        roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();

    let mut builder = CatBuilder {
        objects: vertices.clone(),
        morphisms: Vec::new(),
        compose: BTreeMap::new(),
        identity: vec![usize::MAX; vertices.len()],
    };
    for &r in &roots {
        let path = &paths[rep[&r]];
        let dom = path.0;
        let cod = path.1.last().map(|&a| arr[a].2).unwrap_or(path.0);
        builder.morphisms.push((mor_name(path), dom, cod));
        if path.1.is_empty() {
            builder.identity[path.0] = builder.morphisms.len() - 1;
        }
    }
    for (gi, &gr) in roots.iter().enumerate() {
        let g = &paths[rep[&gr]];
        for (fi, &fr) in roots.iter().enumerate() {
            let f = &paths[rep[&fr]];
            let f_cod = f.1.last().map(|&a| arr[a].2).unwrap_or(f.0);
            if f_cod != g.0 {
                continue;
            }
            let mut w = f.1.clone();
            w.extend_from_slice(&g.1);
            let concat = (f.0, w);
            let j = *index
                .get(&concat)
                .ok_or(CatError::BoundExceeded { bound })?;
            let root = uf.find(j);
            let pos = root_pos
                .get(&root)
                .ok_or(CatError::BoundExceeded { bound })?;
            builder.compose.insert((gi, fi), *pos);
        }
    }
    builder.finish()
}

// ---------------------------------------------------------------------------
// Functors and natural transformations
// ---------------------------------------------------------------------------

/// A functor between finite categories, validated exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functor {
    pub source: Arc<FinCategory>,
    pub target: Arc<FinCategory>,
    obj_map: Vec<usize>,
    mor_map: Vec<usize>,
}

impl Functor {
    pub fn new(
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        obj_map: Vec<usize>,
        mor_map: Vec<usize>,
    ) -> Result<Functor, CatError> {
        let f = Functor {
            source,
            target,
            obj_map,
            mor_map,
        };
        f.check()?;
        Ok(f)
    }

    /// Builds from name-keyed maps; identities may be omitted.
    pub fn from_names(
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        objs: &BTreeMap<String, String>,
        mors: &BTreeMap<String, String>,
    ) -> Result<Functor, CatError> {
        let mut obj_map = vec![usize::MAX; source.obj_count()];
        for (k, v) in objs {
            let ki = source
                .obj_ix(k)
                .ok_or_else(|| CatError::UnknownObject(k.clone()))?;
            let vi = target
                .obj_ix(v)
                .ok_or_else(|| CatError::UnknownObject(v.clone()))?;
            obj_map[ki] = vi;
        }
        for (i, o) in source.objects() {
            if obj_map[i] == usize::MAX {
                return Err(CatError::UnknownObject(format!("{o} (unmapped)")));
            }
        }
        let mut mor_map = vec![usize::MAX; source.mor_count()];
        for (k, v) in mors {
            let ki = source
                .mor_ix(k)
                .ok_or_else(|| CatError::UnknownMorphism(k.clone()))?;
            let vi = target
                .mor_ix(v)
                .ok_or_else(|| CatError::UnknownMorphism(v.clone()))?;
            mor_map[ki] = vi;
        }
        for (i, m) in source.morphisms() {
            if mor_map[i] == usize::MAX {
                if source.is_identity(i) {
                    mor_map[i] = target.identity_of(obj_map[source.dom(i)]);
                } else {
                    return Err(CatError::UnknownMorphism(format!("{m} (unmapped)")));
                }
            }
        }
        Functor::new(source, target, obj_map, mor_map)
    }

    fn check(&self) -> Result<(), CatError> {
        if self.obj_map.len() != self.source.obj_count()
            || self.mor_map.len() != self.source.mor_count()
        {
            return Err(CatError::FunctorialityViolation("map sizes".into()));
        }
        for &t in &self.obj_map {
            if t >= self.target.obj_count() {
                return Err(CatError::FunctorialityViolation("object image range".into()));
            }
        }
        for (m, name) in self.source.morphisms() {
            let im = self.mor_map[m];
            if im >= self.target.mor_count() {
                return Err(CatError::FunctorialityViolation("morphism image range".into()));
            }
            if self.target.dom(im) != self.obj_map[self.source.dom(m)]
                || self.target.cod(im) != self.obj_map[self.source.cod(m)]
            {
                return Err(CatError::FunctorialityViolation(format!(
                    "boundary of `{name}` not preserved"
                )));
            }
        }
        for (o, name) in self.source.objects() {
            if self.mor_map[self.source.identity_of(o)] != self.target.identity_of(self.obj_map[o])
            {
                return Err(CatError::FunctorialityViolation(format!(
                    "identity of `{name}` not preserved"
                )));
            }
        }
        for (f, fn_) in self.source.morphisms() {
            for &g in self.source.from_obj(self.source.cod(f)) {
                let gf = self.source.compose(g, f).expect("composable by adjacency");
                let gn = self.source.mor_name(g);
                let lhs = self.mor_map[gf];
                let rhs = self
                    .target
                    .compose(self.mor_map[g], self.mor_map[f])
                    .ok_or_else(|| {
                        CatError::FunctorialityViolation(format!(
                            "images of (`{gn}`, `{fn_}`) not composable"
                        ))
                    })?;
                if lhs != rhs {
                    return Err(CatError::FunctorialityViolation(format!(
                        "composition of (`{gn}`, `{fn_}`) not preserved"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn obj(&self, o: usize) -> usize {
        self.obj_map[o]
    }

    pub fn mor(&self, m: usize) -> usize {
        self.mor_map[m]
    }

    pub fn obj_maps(&self) -> &[usize] {
        &self.obj_map
    }

    pub fn mor_maps(&self) -> &[usize] {
        &self.mor_map
    }

    pub fn identity(cat: Arc<FinCategory>) -> Functor {
        Functor {
            obj_map: (0..cat.obj_count()).collect(),
            mor_map: (0..cat.mor_count()).collect(),
            source: cat.clone(),
            target: cat,
        }
    }

    /// `self` after `inner`.
    pub fn compose_with(&self, inner: &Functor) -> Result<Functor, CatError> {
        if inner.target != self.source {
            return Err(CatError::FunctorialityViolation(
                "functor composition boundary".into(),
            ));
        }
        Functor::new(
            inner.source.clone(),
            self.target.clone(),
            inner.obj_map.iter().map(|&o| self.obj_map[o]).collect(),
            inner.mor_map.iter().map(|&m| self.mor_map[m]).collect(),
        )
    }
}

/// Exhaustive functoriality check, reporting the first violation.
pub fn check_functor(f: &Functor) -> Result<(), CatError> {
    f.check()
}

/// Builds a functor from object images and images of *generating* arrows
/// only, extending along composites: a morphism named `a.b.c` (the canonical
/// path naming of presented categories) maps to the composite of the images
/// of `a`, `b`, `c`.
pub fn functor_via_paths(
    source: Arc<FinCategory>,
    target: Arc<FinCategory>,
    objs: &BTreeMap<String, String>,
    gens: &BTreeMap<String, String>,
) -> Result<Functor, CatError> {
    let mut obj_map = vec![usize::MAX; source.obj_count()];
    for (o, name) in source.objects() {
        let img = objs
            .get(name)
            .ok_or_else(|| CatError::UnknownObject(format!("{name} (unmapped)")))?;
        obj_map[o] = target
            .obj_ix(img)
            .ok_or_else(|| CatError::UnknownObject(img.clone()))?;
    }
    let mut mor_map = vec![usize::MAX; source.mor_count()];
    for (m, name) in source.morphisms() {
        if source.is_identity(m) {
            mor_map[m] = target.identity_of(obj_map[source.dom(m)]);
            continue;
        }
        let mut acc: Option<usize> = None;
        for part in name.split('.') {
            let img_name = gens
                .get(part)
                .ok_or_else(|| CatError::UnknownMorphism(format!("{part} (unmapped)")))?;
            let img = target
                .mor_ix(img_name)
                .ok_or_else(|| CatError::UnknownMorphism(img_name.clone()))?;
            acc = Some(match acc {
                None => img,
                Some(prev) => target.compose(img, prev).ok_or_else(|| {
                    CatError::BoundaryMismatch(format!("image path of `{name}` breaks"))
                })?,
            });
        }
        mor_map[m] = acc.expect("non-identity morphism has a nonempty path");
    }
    Functor::new(source, target, obj_map, mor_map)
}

/// A natural transformation between parallel functors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTransformation {
    pub source: Functor,
    pub target: Functor,
    components: Vec<usize>,
}

impl NatTransformation {
    pub fn new(
        source: Functor,
        target: Functor,
        components: Vec<usize>,
    ) -> Result<NatTransformation, CatError> {
        if source.source != target.source || source.target != target.target {
            return Err(CatError::BoundaryMismatch(
                "natural transformation between non-parallel functors".into(),
            ));
        }
        let t = NatTransformation {
            source,
            target,
            components,
        };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), CatError> {
        let dom_cat = &self.source.source;
        let cod_cat = &self.source.target;
        if self.components.len() != dom_cat.obj_count() {
            return Err(CatError::BoundaryMismatch("component count".into()));
        }
        for (o, _) in dom_cat.objects() {
            let c = self.components[o];
            if c >= cod_cat.mor_count()
                || cod_cat.dom(c) != self.source.obj(o)
                || cod_cat.cod(c) != self.target.obj(o)
            {
                return Err(CatError::BoundaryMismatch(format!(
                    "component at `{}`",
                    dom_cat.obj_name(o)
                )));
            }
        }
        for (u, name) in dom_cat.morphisms() {
            let (x, y) = (dom_cat.dom(u), dom_cat.cod(u));
            let lhs = cod_cat.compose(self.components[y], self.source.mor(u));
            let rhs = cod_cat.compose(self.target.mor(u), self.components[x]);
            if lhs.is_none() || lhs != rhs {
                return Err(CatError::NaturalityViolation(name.to_string()));
            }
        }
        Ok(())
    }

    pub fn component(&self, o: usize) -> usize {
        self.components[o]
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }
}

/// Exhaustive naturality check.
pub fn check_natural(t: &NatTransformation) -> Result<(), CatError> {
    t.check()
}

/// All functors `c -> a`, in canonical (object-map, morphism-map) order.
pub fn enumerate_functors(c: &Arc<FinCategory>, a: &Arc<FinCategory>) -> Vec<Functor> {
    let mut out = Vec::new();
    let n_obj = c.obj_count();
    let mut obj_map = vec![0usize; n_obj];
    if a.obj_count() == 0 {
        if n_obj == 0 {
            out.push(Functor::identity(a.clone()));
        }
        return out;
    }

    // non-identity morphisms in canonical order
    let free: Vec<usize> = (0..c.mor_count()).filter(|&m| !c.is_identity(m)).collect();

    fn assign_mors(
        c: &Arc<FinCategory>,
        a: &Arc<FinCategory>,
        obj_map: &[usize],
        free: &[usize],
        pos: usize,
        mor_map: &mut Vec<usize>,
        out: &mut Vec<Functor>,
    ) {
        // propagate forced composites and check consistency so far
        for (g, _) in c.morphisms() {
            for (f, _) in c.morphisms() {
                if let Some(gf) = c.compose(g, f) {
                    let (img, imf, imgf) = (mor_map[g], mor_map[f], mor_map[gf]);
                    if img != usize::MAX && imf != usize::MAX {
                        let comp = match a.compose(img, imf) {
                            Some(x) => x,
                            None => return,
                        };
                        if imgf != usize::MAX && imgf != comp {
                            return;
                        }
                    }
                }
            }
        }
        if pos == free.len() {
            // fill forced composites, then validate outright
            let mut map = mor_map.clone();
            let mut progress = true;
            while progress {
                progress = false;
                for (g, _) in c.morphisms() {
                    for (f, _) in c.morphisms() {
                        if let Some(gf) = c.compose(g, f) {
                            if map[gf] == usize::MAX
                                && map[g] != usize::MAX
                                && map[f] != usize::MAX
                            {
                                if let Some(x) = a.compose(map[g], map[f]) {
                                    map[gf] = x;
                                    progress = true;
                                } else {
                                    return;
                                }
                            }
                        }
                    }
                }
            }
            if map.iter().any(|&m| m == usize::MAX) {
                return;
            }
            if let Ok(f) = Functor::new(c.clone(), a.clone(), obj_map.to_vec(), map) {
                out.push(f);
            }
            return;
        }
        let m = free[pos];
        if mor_map[m] != usize::MAX {
            assign_mors(c, a, obj_map, free, pos + 1, mor_map, out);
            return;
        }
        let (d, cd) = (obj_map[c.dom(m)], obj_map[c.cod(m)]);
        for cand in a.hom(d, cd) {
            mor_map[m] = cand;
            let saved = mor_map.clone();
            assign_mors(c, a, obj_map, free, pos + 1, mor_map, out);
            *mor_map = saved;
        }
        mor_map[m] = usize::MAX;
    }

    fn assign_objs(
        c: &Arc<FinCategory>,
        a: &Arc<FinCategory>,
        pos: usize,
        obj_map: &mut Vec<usize>,
        free: &[usize],
        out: &mut Vec<Functor>,
    ) {
        if pos == obj_map.len() {
            let mut mor_map = vec![usize::MAX; c.mor_count()];
            for (o, _) in c.objects() {
                mor_map[c.identity_of(o)] = a.identity_of(obj_map[o]);
            }
            assign_mors(c, a, obj_map, free, 0, &mut mor_map, out);
            return;
        }
        for t in 0..a.obj_count() {
            obj_map[pos] = t;
            assign_objs(c, a, pos + 1, obj_map, free, out);
        }
    }

    assign_objs(c, a, 0, &mut obj_map, &free, &mut out);
    out
}

/// All natural transformations `f => g`, in canonical component order.
pub fn enumerate_naturals(f: &Functor, g: &Functor) -> Vec<NatTransformation> {
    let mut out = Vec::new();
    let n = f.source.obj_count();
    let mut comp = vec![usize::MAX; n];

    fn go(
        f: &Functor,
        g: &Functor,
        pos: usize,
        comp: &mut Vec<usize>,
        out: &mut Vec<NatTransformation>,
    ) {
        let dom_cat = &f.source;
        let cod_cat = &f.target;
        if pos == comp.len() {
            if let Ok(t) = NatTransformation::new(f.clone(), g.clone(), comp.clone()) {
                out.push(t);
            }
            return;
        }
        for cand in cod_cat.hom(f.obj(pos), g.obj(pos)) {
            comp[pos] = cand;
            // prune: naturality squares whose both endpoints are assigned
            let ok = dom_cat.morphisms().all(|(u, _)| {
                let (x, y) = (dom_cat.dom(u), dom_cat.cod(u));
                if comp[x] == usize::MAX || comp[y] == usize::MAX {
                    return true;
                }
                cod_cat.compose(comp[y], f.mor(u)) == cod_cat.compose(g.mor(u), comp[x])
            });
            if ok {
                go(f, g, pos + 1, comp, out);
            }
        }
        comp[pos] = usize::MAX;
    }

    if n == 0 {
        if let Ok(t) = NatTransformation::new(f.clone(), g.clone(), Vec::new()) {
            out.push(t);
        }
        return out;
    }
    go(f, g, 0, &mut comp, &mut out);
    out
}

/// The functor category `[c, a]`, materialized: objects are all functors,
/// morphisms all natural transformations, composition componentwise.
#[derive(Debug, Clone)]
pub struct FunctorCategory {
    pub cat: Arc<FinCategory>,
    pub functors: Vec<Functor>,
    pub nats: Vec<NatTransformation>,
    /// object index in `cat` per functor (sorted names may permute)
    obj_of_functor: Vec<usize>,
    mor_of_nat: Vec<usize>,
    functor_lookup: BTreeMap<(Vec<usize>, Vec<usize>), usize>,
    nat_lookup: BTreeMap<(usize, usize, Vec<usize>), usize>,
}

impl FunctorCategory {
    pub fn functor_obj(&self, functor_index: usize) -> usize {
        self.obj_of_functor[functor_index]
    }

    pub fn nat_mor(&self, nat_index: usize) -> usize {
        self.mor_of_nat[nat_index]
    }

    pub fn functor_index(&self, f: &Functor) -> Option<usize> {
        self.functor_lookup
            .get(&(f.obj_maps().to_vec(), f.mor_maps().to_vec()))
            .copied()
    }

    pub fn functor_at_obj(&self, obj: usize) -> &Functor {
        let k = self.obj_of_functor.iter().position(|&o| o == obj).unwrap();
        &self.functors[k]
    }

    pub fn nat_at_mor(&self, mor: usize) -> &NatTransformation {
        let k = self.mor_of_nat.iter().position(|&m| m == mor).unwrap();
        &self.nats[k]
    }

    pub fn nat_index(&self, t: &NatTransformation) -> Option<usize> {
        let src = self.functor_index(&t.source)?;
        let tgt = self.functor_index(&t.target)?;
        self.nat_lookup
            .get(&(src, tgt, t.components().to_vec()))
            .copied()
    }
}

fn pad_width(n: usize) -> usize {
    n.max(1).to_string().len()
}

/// Builds `[c, a]` by exhaustive enumeration.
pub fn functor_category(c: &Arc<FinCategory>, a: &Arc<FinCategory>) -> Result<FunctorCategory, CatError> {
    let functors = enumerate_functors(c, a);
    let mut nats = Vec::new();
    let mut nat_ends: Vec<(usize, usize)> = Vec::new();
    for (fi, f) in functors.iter().enumerate() {
        for (gi, g) in functors.iter().enumerate() {
            for t in enumerate_naturals(f, g) {
                nats.push(t);
                nat_ends.push((fi, gi));
            }
        }
    }
    let ow = pad_width(functors.len());
    let mw = pad_width(nats.len());
    let obj_names: Vec<String> = (0..functors.len())
        .map(|i| format!("F{i:0ow$}"))
        .collect();
    // zero-padded names keep index order equal to sorted-name order, so the
    // category can be assembled directly from indices
    let mut mor_records: Vec<(String, usize, usize)> = Vec::with_capacity(nats.len());
    let mut identity = vec![usize::MAX; functors.len()];
    for (k, t) in nats.iter().enumerate() {
        let (s, g) = nat_ends[k];
        mor_records.push((format!("n{k:0mw$}"), s, g));
        let is_id = s == g && t.components().iter().enumerate().all(|(o, &m)| {
            m == a.identity_of(t.source.obj(o))
        });
        if is_id {
            identity[s] = k;
        }
    }
    for (s, id) in identity.iter().enumerate() {
        if *id == usize::MAX {
            return Err(CatError::MissingIdentity(obj_names[s].clone()));
        }
    }
    // composition by componentwise composition, visiting only composable pairs
    let mut lookup: BTreeMap<(usize, usize, Vec<usize>), usize> = BTreeMap::new();
    for (k, t) in nats.iter().enumerate() {
        lookup.insert((nat_ends[k].0, nat_ends[k].1, t.components().to_vec()), k);
    }
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); functors.len()];
    for (k, &(s, _)) in nat_ends.iter().enumerate() {
        by_source[s].push(k);
    }
    let mut composites: Vec<(usize, usize, usize)> = Vec::new();
    for (fk, f) in nats.iter().enumerate() {
        let (fs, ft) = nat_ends[fk];
        for &gk in &by_source[ft] {
            let g = &nats[gk];
            let gt = nat_ends[gk].1;
            let comps: Vec<usize> = (0..c.obj_count())
                .map(|o| {
                    a.compose(g.component(o), f.component(o))
                        .expect("componentwise composition")
                })
                .collect();
            let composite = *lookup
                .get(&(fs, gt, comps))
                .expect("composite natural transformation enumerated");
            composites.push((gk, fk, composite));
        }
    }
    let cat = Arc::new(FinCategory::from_sorted_parts(
        obj_names,
        mor_records,
        identity,
        composites,
    )?);
    let obj_of_functor: Vec<usize> = (0..functors.len()).collect();
    let mor_of_nat: Vec<usize> = (0..nats.len()).collect();
    let functor_lookup: BTreeMap<(Vec<usize>, Vec<usize>), usize> = functors
        .iter()
        .enumerate()
        .map(|(i, f)| ((f.obj_maps().to_vec(), f.mor_maps().to_vec()), i))
        .collect();
    let nat_lookup: BTreeMap<(usize, usize, Vec<usize>), usize> = nats
        .iter()
        .enumerate()
        .map(|(i, t)| {
            (
                (
                    functor_lookup[&(t.source.obj_maps().to_vec(), t.source.mor_maps().to_vec())],
                    functor_lookup[&(t.target.obj_maps().to_vec(), t.target.mor_maps().to_vec())],
                    t.components().to_vec(),
                ),
                i,
            )
        })
        .collect();
    Ok(FunctorCategory {
        cat,
        functors,
        nats,
        obj_of_functor,
        mor_of_nat,
        functor_lookup,
        nat_lookup,
    })
}

// ---------------------------------------------------------------------------
// Cones and limits
// ---------------------------------------------------------------------------

/// A cone over a diagram in a finite category.
#[derive(Debug, Clone)]
pub struct Cone {
    pub diagram: Functor,
    pub apex: usize,
    /// legs indexed by shape object
    pub legs: Vec<usize>,
}

impl Cone {
    pub fn new(diagram: Functor, apex: usize, legs: Vec<usize>) -> Result<Cone, CatError> {
        let cone = Cone {
            diagram,
            apex,
            legs,
        };
        cone.check()?;
        Ok(cone)
    }

    fn check(&self) -> Result<(), CatError> {
        let shape = &self.diagram.source;
        let target = &self.diagram.target;
        if self.legs.len() != shape.obj_count() {
            return Err(CatError::BoundaryMismatch("leg count".into()));
        }
        for (i, name) in shape.objects() {
            let leg = self.legs[i];
            if target.dom(leg) != self.apex || target.cod(leg) != self.diagram.obj(i) {
                return Err(CatError::BoundaryMismatch(format!("leg at `{name}`")));
            }
        }
        for (u, name) in shape.morphisms() {
            let (i, j) = (shape.dom(u), shape.cod(u));
            if target.compose(self.diagram.mor(u), self.legs[i]) != Some(self.legs[j]) {
                return Err(CatError::NotACone(name.to_string()));
            }
        }
        Ok(())
    }
}

/// `d^<|`: freely adjoins an initial object (the would-be limit apex) with one
/// morphism to every object of `d`. Returns the result plus the inclusion.
pub fn cone_shape(d: &Arc<FinCategory>) -> Result<(Arc<FinCategory>, Functor), CatError> {
    let fresh = |base: &str, taken: &dyn Fn(&str) -> bool| -> String {
        let mut name = base.to_string();
        while taken(&name) {
            name.push('_');
        }
        name
    };
    let apex = fresh("apex", &|n| d.obj_ix(n).is_some());
    let mut raw = RawCategory::default();
    for (_, o) in d.objects() {
        raw.objects.push(o.to_string());
    }
    raw.objects.push(apex.clone());
    for (m, _) in d.morphisms() {
        raw.morphisms.push((
            d.mor_name(m).to_string(),
            d.obj_name(d.dom(m)).to_string(),
            d.obj_name(d.cod(m)).to_string(),
        ));
    }
    let mut leg_names = Vec::new();
    for (_, o) in d.objects() {
        let leg = fresh(&format!("leg_{o}"), &|n| {
            d.mor_ix(n).is_some() || raw.morphisms.iter().any(|(id, _, _)| id == n)
        });
        raw.morphisms
            .push((leg.clone(), apex.clone(), o.to_string()));
        leg_names.push(leg);
    }
    let apex_id = fresh(&format!("id_{apex}"), &|n| {
        d.mor_ix(n).is_some() || raw.morphisms.iter().any(|(id, _, _)| id == n)
    });
    raw.morphisms.push((apex_id.clone(), apex.clone(), apex.clone()));
    for (o, name) in d.objects() {
        raw.identities
            .push((name.to_string(), d.mor_name(d.identity_of(o)).to_string()));
    }
    raw.identities.push((apex.clone(), apex_id.clone()));
    // composition: inherited from d, legs absorb (u . leg_i = leg_j), apex id
    for (g, gn) in d.morphisms() {
        for (f, fname) in d.morphisms() {
            if let Some(gf) = d.compose(g, f) {
                raw.composites.push((
                    gn.to_string(),
                    fname.to_string(),
                    d.mor_name(gf).to_string(),
                ));
            }
        }
        raw.composites.push((
            gn.to_string(),
            leg_names[d.dom(g)].clone(),
            leg_names[d.cod(g)].clone(),
        ));
    }
    for (o, _) in d.objects() {
        raw.composites
            .push((leg_names[o].clone(), apex_id.clone(), leg_names[o].clone()));
    }
    raw.composites
        .push((apex_id.clone(), apex_id.clone(), apex_id.clone()));
    let cone = Arc::new(raw.validate()?);
    let inclusion = Functor::new(
        d.clone(),
        cone.clone(),
        (0..d.obj_count())
            .map(|o| cone.obj_ix(d.obj_name(o)).unwrap())
            .collect(),
        (0..d.mor_count())
            .map(|m| cone.mor_ix(d.mor_name(m)).unwrap())
            .collect(),
    )?;
    Ok((cone, inclusion))
}

/// A competing cone together with its mediating morphisms into the candidate.
#[derive(Debug, Clone)]
pub struct Competitor {
    pub apex: usize,
    pub legs: Vec<usize>,
    pub mediators: Vec<usize>,
}

/// Limit certificate for a cone in a finite category. `Limiting` carries every
/// competing cone with its unique mediator; `NotLimiting` carries the witness.
#[derive(Debug, Clone)]
pub enum LimitCertificate {
    Limiting { competitors: Vec<Competitor> },
    NotLimiting { witness: Competitor },
}

impl LimitCertificate {
    pub fn is_limiting(&self) -> bool {
        matches!(self, LimitCertificate::Limiting { .. })
    }
}

/// Certifies whether `cone` is limiting by enumerating every cone over the
/// same diagram and counting mediators.
pub fn is_limiting(cone: &Cone) -> Result<LimitCertificate, CatError> {
    cone.check()?;
    let shape = &cone.diagram.source;
    let target = &cone.diagram.target;
    let mut competitors = Vec::new();
    for apex in 0..target.obj_count() {
        let mut legs = vec![usize::MAX; shape.obj_count()];
        // enumerate legs object-by-object with commutation pruning
        fn enumerate(
            shape: &FinCategory,
            target: &FinCategory,
            diagram: &Functor,
            apex: usize,
            pos: usize,
            legs: &mut Vec<usize>,
            found: &mut Vec<Vec<usize>>,
        ) {
            if pos == legs.len() {
                found.push(legs.clone());
                return;
            }
            for cand in target.hom(apex, diagram.obj(pos)) {
                legs[pos] = cand;
                let ok = shape.morphisms().all(|(u, _)| {
                    let (i, j) = (shape.dom(u), shape.cod(u));
                    if legs[i] == usize::MAX || legs[j] == usize::MAX {
                        return true;
                    }
                    target.compose(diagram.mor(u), legs[i]) == Some(legs[j])
                });
                if ok {
                    enumerate(shape, target, diagram, apex, pos + 1, legs, found);
                }
            }
            legs[pos] = usize::MAX;
        }
        let mut found = Vec::new();
        if shape.obj_count() == 0 {
            found.push(Vec::new());
        } else {
            enumerate(
                shape,
                target,
                &cone.diagram,
                apex,
                0,
                &mut legs,
                &mut found,
            );
        }
        for legs in found {
            let mediators: Vec<usize> = target
                .hom(apex, cone.apex)
                .into_iter()
                .filter(|&m| {
                    (0..shape.obj_count())
                        .all(|i| target.compose(cone.legs[i], m) == Some(legs[i]))
                })
                .collect();
            let comp = Competitor {
                apex,
                legs,
                mediators,
            };
            if comp.mediators.len() != 1 {
                return Ok(LimitCertificate::NotLimiting { witness: comp });
            }
            competitors.push(comp);
        }
    }
    Ok(LimitCertificate::Limiting { competitors })
}

// ---------------------------------------------------------------------------
// Stock shapes
// ---------------------------------------------------------------------------

pub mod shapes {
    use super::*;

    pub fn empty() -> FinCategory {
        RawCategory::default().validate().unwrap()
    }

    pub fn discrete(names: &[&str]) -> FinCategory {
        let raw = RawCategory {
            objects: names.iter().map(|s| s.to_string()).collect(),
            morphisms: names
                .iter()
                .map(|s| (format!("id_{s}"), s.to_string(), s.to_string()))
                .collect(),
            identities: names
                .iter()
                .map(|s| (s.to_string(), format!("id_{s}")))
                .collect(),
            composites: names
                .iter()
                .map(|s| (format!("id_{s}"), format!("id_{s}"), format!("id_{s}")))
                .collect(),
        };
        raw.validate().unwrap()
    }

    pub fn point() -> FinCategory {
        discrete(&["pt"])
    }

    /// Free category on a graph (no relations), bound generous enough for
    /// the finite shapes used here.
    pub fn free(vertices: &[&str], arrows: &[(&str, &str, &str)]) -> FinCategory {
        present_category(&Presentation {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            arrows: arrows
                .iter()
                .map(|(n, d, c)| (n.to_string(), d.to_string(), c.to_string()))
                .collect(),
            relations: Vec::new(),
            saturation_bound: 8,
        })
        .unwrap()
    }

    /// `a --f--> b`
    pub fn walking_arrow() -> FinCategory {
        free(&["a", "b"], &[("f", "a", "b")])
    }

    /// `x1 --f1--> x0 <--f2-- x2`
    pub fn walking_cospan() -> FinCategory {
        free(&["x0", "x1", "x2"], &[("f1", "x1", "x0"), ("f2", "x2", "x0")])
    }

    /// `x1 <--f1-- x0 --f2--> x2`
    pub fn walking_span() -> FinCategory {
        free(&["x0", "x1", "x2"], &[("f1", "x0", "x1"), ("f2", "x0", "x2")])
    }

    /// Commutative square: `w;s = n;e` (one diagonal).
    pub fn commutative_square() -> FinCategory {
        present_category(&Presentation {
            vertices: vec!["nw".into(), "ne".into(), "sw".into(), "se".into()],
            arrows: vec![
                ("n".into(), "nw".into(), "ne".into()),
                ("w".into(), "nw".into(), "sw".into()),
                ("e".into(), "ne".into(), "se".into()),
                ("s".into(), "sw".into(), "se".into()),
            ],
            relations: vec![(
                vec!["n".into(), "e".into()],
                vec!["w".into(), "s".into()],
            )],
            saturation_bound: 4,
        })
        .unwrap()
    }

    /// A finite poset as a thin category; `leq` decides the order.
    pub fn poset(names: &[&str], leq: impl Fn(&str, &str) -> bool) -> FinCategory {
        let mut raw = RawCategory {
            objects: names.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        let arrow = |x: &str, y: &str| {
            if x == y {
                format!("id_{x}")
            } else {
                format!("le_{x}_{y}")
            }
        };
        for x in names {
            for y in names {
                if leq(x, y) {
                    raw.morphisms
                        .push((arrow(x, y), x.to_string(), y.to_string()));
                }
            }
        }
        for x in names {
            raw.identities.push((x.to_string(), arrow(x, x)));
        }
        for x in names {
            for y in names {
                for z in names {
                    if leq(x, y) && leq(y, z) {
                        raw.composites
                            .push((arrow(y, z), arrow(x, y), arrow(x, z)));
                    }
                }
            }
        }
        raw.validate().unwrap()
    }

    /// The divisor lattice of `n` ordered by divisibility.
    pub fn divisor_poset(n: u64) -> FinCategory {
        let divisors: Vec<String> = (1..=n).filter(|d| n % d == 0).map(|d| d.to_string()).collect();
        let refs: Vec<&str> = divisors.iter().map(|s| s.as_str()).collect();
        poset(&refs, |x, y| {
            let (x, y) = (x.parse::<u64>().unwrap(), y.parse::<u64>().unwrap());
            y % x == 0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::shapes;
    use super::*;

    fn arc(c: FinCategory) -> Arc<FinCategory> {
        Arc::new(c)
    }

    #[test]
    fn empty_category_is_valid() {
        let c = shapes::empty();
        assert_eq!(c.obj_count(), 0);
        assert!(c.revalidate().is_ok());
    }

    #[test]
    fn walking_arrow_is_valid() {
        let c = shapes::walking_arrow();
        assert_eq!(c.obj_count(), 2);
        assert_eq!(c.mor_count(), 3);
        assert!(c.revalidate().is_ok());
    }

    #[test]
    fn corrupted_identity_entry_is_reported() {
        // one object, morphisms {e, a}, a.a = a; corrupting the identity row
        // is the only corruption available with two morphisms
        let mut raw = RawCategory {
            objects: vec!["x".into()],
            morphisms: vec![
                ("a".into(), "x".into(), "x".into()),
                ("e".into(), "x".into(), "x".into()),
            ],
            identities: vec![("x".into(), "e".into())],
            composites: vec![
                ("e".into(), "e".into(), "e".into()),
                ("e".into(), "a".into(), "a".into()),
                ("a".into(), "e".into(), "a".into()),
                ("a".into(), "a".into(), "a".into()),
            ],
        };
        assert!(raw.validate().is_ok());
        raw.composites[1] = ("e".into(), "a".into(), "e".into());
        let err = raw.validate().unwrap_err();
        assert!(matches!(err, CatError::IdentityLawViolation { .. }));
    }

    #[test]
    fn corrupted_table_reports_associativity() {
        // identity rows intact; a.a = b, a.b = a, b.a = a, b.b = a gives
        // (a.a).b = b.b = a versus a.(a.b) = a.a = b
        let raw = RawCategory {
            objects: vec!["x".into()],
            morphisms: vec![
                ("a".into(), "x".into(), "x".into()),
                ("b".into(), "x".into(), "x".into()),
                ("e".into(), "x".into(), "x".into()),
            ],
            identities: vec![("x".into(), "e".into())],
            composites: vec![
                ("e".into(), "e".into(), "e".into()),
                ("e".into(), "a".into(), "a".into()),
                ("a".into(), "e".into(), "a".into()),
                ("e".into(), "b".into(), "b".into()),
                ("b".into(), "e".into(), "b".into()),
                ("a".into(), "a".into(), "b".into()),
                ("a".into(), "b".into(), "a".into()),
                ("b".into(), "a".into(), "a".into()),
                ("b".into(), "b".into(), "a".into()),
            ],
        };
        let err = raw.validate().unwrap_err();
        assert!(matches!(err, CatError::AssociativityViolation { .. }));
    }

    #[test]
    fn present_arrow_graph() {
        let c = present_category(&Presentation {
            vertices: vec!["a".into(), "b".into()],
            arrows: vec![("f".into(), "a".into(), "b".into())],
            relations: vec![],
            saturation_bound: 4,
        })
        .unwrap();
        assert_eq!(c.mor_count(), 3);
    }

    #[test]
    fn present_square_with_relation_has_nine_morphisms() {
        let c = shapes::commutative_square();
        // hand count: 4 identities + n, w, e, s + one diagonal
        assert_eq!(c.obj_count(), 4);
        assert_eq!(c.mor_count(), 9);
        assert!(c.revalidate().is_ok());
    }

    #[test]
    fn present_loop_exceeds_bound() {
        let err = present_category(&Presentation {
            vertices: vec!["x".into()],
            arrows: vec![("a".into(), "x".into(), "x".into())],
            relations: vec![],
            saturation_bound: 5,
        })
        .unwrap_err();
        assert!(matches!(err, CatError::BoundExceeded { bound: 5 }));
    }

    #[test]
    fn present_idempotent_section_retraction() {
        // r.s = id collapses alternating words
        let c = present_category(&Presentation {
            vertices: vec!["e".into(), "s_el".into()],
            arrows: vec![
                ("s".into(), "e".into(), "s_el".into()),
                ("r".into(), "s_el".into(), "e".into()),
            ],
            relations: vec![(vec!["s".into(), "r".into()], vec![])],
            saturation_bound: 6,
        })
        .unwrap();
        // morphisms: id_e, id_s_el, s, r, s.r? no: diagrammatic s.r = r∘s = id_e,
        // r.s = s∘r : idempotent on s_el. total: 2 ids + s + r + r.s = 5
        assert_eq!(c.mor_count(), 5);
    }

    #[test]
    fn functor_category_of_arrows() {
        let arrow = arc(shapes::walking_arrow());
        let fc = functor_category(&arrow, &arrow).unwrap();
        assert_eq!(fc.functors.len(), 3);
        assert_eq!(fc.cat.obj_count(), 3);
        assert!(fc.cat.revalidate().is_ok());
    }

    #[test]
    fn functor_category_from_empty_is_terminal() {
        let e = arc(shapes::empty());
        let a = arc(shapes::walking_cospan());
        let fc = functor_category(&e, &a).unwrap();
        assert_eq!(fc.cat.obj_count(), 1);
        assert_eq!(fc.cat.mor_count(), 1);
    }

    #[test]
    fn functor_category_from_point_counts_objects() {
        let p = arc(shapes::point());
        let a = arc(shapes::walking_cospan());
        let fc = functor_category(&p, &a).unwrap();
        assert_eq!(fc.cat.obj_count(), a.obj_count());
    }

    #[test]
    fn functor_category_from_point_iso_to_target() {
        // [1, a] ~= a: build the invertible pair and check both composites
        let p = arc(shapes::point());
        let a = arc(shapes::walking_arrow());
        let fc = functor_category(&p, &a).unwrap();
        // to: a -> [1,a] sends x to the constant functor at x
        let mut to_obj = vec![usize::MAX; a.obj_count()];
        for (k, f) in fc.functors.iter().enumerate() {
            to_obj[f.obj(0)] = fc.functor_obj(k);
        }
        let mut to_mor = vec![usize::MAX; a.mor_count()];
        for (k, t) in fc.nats.iter().enumerate() {
            to_mor[t.component(0)] = fc.nat_mor(k);
        }
        let to = Functor::new(a.clone(), fc.cat.clone(), to_obj, to_mor).unwrap();
        let from = Functor::new(
            fc.cat.clone(),
            a.clone(),
            (0..fc.cat.obj_count())
                .map(|o| fc.functor_at_obj(o).obj(0))
                .collect(),
            (0..fc.cat.mor_count())
                .map(|m| fc.nat_at_mor(m).component(0))
                .collect(),
        )
        .unwrap();
        let round1 = from.compose_with(&to).unwrap();
        let round2 = to.compose_with(&from).unwrap();
        assert_eq!(round1, Functor::identity(a.clone()));
        assert_eq!(round2, Functor::identity(fc.cat.clone()));
    }

    #[test]
    fn cone_shape_of_empty_is_terminal() {
        let e = arc(shapes::empty());
        let (c, _) = cone_shape(&e).unwrap();
        assert_eq!(c.obj_count(), 1);
        assert_eq!(c.mor_count(), 1);
    }

    #[test]
    fn cone_shape_of_cospan_is_commutative_square() {
        let d = arc(shapes::walking_cospan());
        let (c, incl) = cone_shape(&d).unwrap();
        assert_eq!(c.obj_count(), 4);
        assert_eq!(c.mor_count(), 9);
        check_functor(&incl).unwrap();
    }

    #[test]
    fn cone_shape_of_discrete_two_is_span() {
        let d = arc(shapes::discrete(&["a", "b"]));
        let (c, _) = cone_shape(&d).unwrap();
        assert_eq!(c.obj_count(), 3);
        // 3 identities + 2 legs
        assert_eq!(c.mor_count(), 5);
    }

    #[test]
    fn constant_functor_valid_and_swap_invalid() {
        let arrow = arc(shapes::walking_arrow());
        let id = Functor::identity(arrow.clone());
        check_functor(&id).unwrap();
        // object swap without adjusting the arrow image: boundary breaks
        let a = arrow.obj_ix("a").unwrap();
        let b = arrow.obj_ix("b").unwrap();
        let f = arrow.mor_ix("f").unwrap();
        let mut obj_map = vec![0; 2];
        obj_map[a] = b;
        obj_map[b] = a;
        let mut mor_map = vec![0; 3];
        mor_map[arrow.identity_of(a)] = arrow.identity_of(b);
        mor_map[arrow.identity_of(b)] = arrow.identity_of(a);
        mor_map[f] = f;
        let err = Functor::new(arrow.clone(), arrow.clone(), obj_map, mor_map).unwrap_err();
        assert!(matches!(err, CatError::FunctorialityViolation(_)));
    }

    #[test]
    fn terminal_cone_over_empty_diagram() {
        // in the divisor poset of 6, the top element is terminal
        let a = arc(shapes::divisor_poset(6));
        let e = arc(shapes::empty());
        let empty_diag = Functor::new(e.clone(), a.clone(), vec![], vec![]).unwrap();
        let top = a.obj_ix("6").unwrap();
        let cone = Cone::new(empty_diag.clone(), top, vec![]).unwrap();
        assert!(is_limiting(&cone).unwrap().is_limiting());
        let one = a.obj_ix("1").unwrap();
        let bad = Cone::new(empty_diag, one, vec![]).unwrap();
        assert!(!is_limiting(&bad).unwrap().is_limiting());
    }

    #[test]
    fn limiting_apexes_unique_up_to_iso() {
        // two certified cones over the same diagram have mutually inverse mediators
        let a = arc(shapes::divisor_poset(12));
        let shape = arc(shapes::discrete(&["l", "r"]));
        let l = shape.obj_ix("l").unwrap();
        let r = shape.obj_ix("r").unwrap();
        let mut obj_map = vec![0; 2];
        obj_map[l] = a.obj_ix("4").unwrap();
        obj_map[r] = a.obj_ix("6").unwrap();
        let mor_map = vec![
            a.identity_of(obj_map[0]),
            a.identity_of(obj_map[1]),
        ];
        let diag = Functor::new(shape.clone(), a.clone(), obj_map.clone(), mor_map).unwrap();
        // meet of 4 and 6 in the divisor order is 2
        let apex = a.obj_ix("2").unwrap();
        let legs = vec![
            a.hom(apex, diag.obj(0))[0],
            a.hom(apex, diag.obj(1))[0],
        ];
        let cone = Cone::new(diag, apex, legs).unwrap();
        let cert = is_limiting(&cone).unwrap();
        assert!(cert.is_limiting());
    }

    #[test]
    fn revalidation_is_idempotent() {
        for c in [
            shapes::empty(),
            shapes::walking_arrow(),
            shapes::commutative_square(),
            shapes::divisor_poset(12),
        ] {
            assert!(c.revalidate().is_ok());
            assert!(c.revalidate().is_ok());
        }
    }
}
