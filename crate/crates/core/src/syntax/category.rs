//! The category format: `object`, `arrow`, `equal`, and an optional `bound`
//! directive, compiled through presentation saturation.

use std::sync::Arc;

use crate::fincat::{present_category, FinCategory, Presentation};

use super::{lex, Cursor, SyntaxError, Tok};

/// A category together with the presentation it was built from; the
/// presentation keeps the generator structure that file formats speak.
#[derive(Debug, Clone)]
pub struct PresentedCategory {
    pub presentation: Presentation,
    pub cat: Arc<FinCategory>,
}

impl PresentedCategory {
    pub fn from_presentation(p: Presentation) -> Result<PresentedCategory, SyntaxError> {
        let cat = present_category(&p).map_err(SyntaxError::elaborate)?;
        Ok(PresentedCategory {
            presentation: p,
            cat: Arc::new(cat),
        })
    }

    /// Generating arrows (the presentation's own arrows).
    pub fn generators(&self) -> impl Iterator<Item = &str> {
        self.presentation.arrows.iter().map(|(n, _, _)| n.as_str())
    }
}

pub(crate) const DEFAULT_BOUND: usize = 8;

/// Parses the body of a category block (already inside any braces).
pub(crate) fn parse_category_body(cur: &mut Cursor) -> Result<Presentation, SyntaxError> {
    let mut p = Presentation {
        vertices: Vec::new(),
        arrows: Vec::new(),
        relations: Vec::new(),
        saturation_bound: DEFAULT_BOUND,
    };
    loop {
        match cur.peek() {
            Some(Tok::Ident(word)) if word == "object" => {
                cur.next();
                p.vertices.push(cur.ident()?);
            }
            Some(Tok::Ident(word)) if word == "arrow" => {
                cur.next();
                let name = cur.ident()?;
                cur.expect(Tok::Colon)?;
                let dom = cur.ident()?;
                cur.expect(Tok::Arrow)?;
                let cod = cur.ident()?;
                p.arrows.push((name, dom, cod));
            }
            Some(Tok::Ident(word)) if word == "equal" => {
                cur.next();
                let lhs = parse_path(cur)?;
                cur.expect(Tok::Equals)?;
                let rhs = parse_path(cur)?;
                p.relations.push((lhs, rhs));
            }
            Some(Tok::Ident(word)) if word == "bound" => {
                cur.next();
                let n = cur.ident()?;
                p.saturation_bound = n
                    .parse()
                    .map_err(|_| cur.err(format!("`{n}` is not a bound")))?;
            }
            _ => break,
        }
        // statements may be separated by semicolons
        while cur.peek() == Some(&Tok::Semi) {
            cur.next();
        }
    }
    Ok(p)
}

/// A path `f.g.h` in diagrammatic order, or `id` for the identity path.
fn parse_path(cur: &mut Cursor) -> Result<Vec<String>, SyntaxError> {
    if cur.at_keyword("id") {
        cur.next();
        return Ok(Vec::new());
    }
    let mut path = vec![cur.ident()?];
    while cur.peek() == Some(&Tok::Dot) {
        cur.next();
        path.push(cur.ident()?);
    }
    Ok(path)
}

/// Parses a standalone category file.
pub fn parse_category(text: &str) -> Result<PresentedCategory, SyntaxError> {
    let mut cur = Cursor::new(lex(text)?);
    let p = parse_category_body(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    if p.vertices.is_empty() && p.arrows.is_empty() && p.relations.is_empty() {
        return Err(cur.err("empty category file"));
    }
    PresentedCategory::from_presentation(p)
}

/// Canonical text of a presentation: objects, then arrows, then relations,
/// each sorted; the bound only when it differs from the default.
pub fn serialize_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    if p.saturation_bound != DEFAULT_BOUND {
        out.push_str(&format!("bound {}\n", p.saturation_bound));
    }
    let mut vertices = p.vertices.clone();
    vertices.sort();
    for v in vertices {
        out.push_str(&format!("object {v}\n"));
    }
    let mut arrows = p.arrows.clone();
    arrows.sort();
    for (n, d, c) in arrows {
        out.push_str(&format!("arrow {n} : {d} -> {c}\n"));
    }
    let mut relations = p.relations.clone();
    relations.sort();
    for (l, r) in relations {
        let side = |s: &[String]| {
            if s.is_empty() {
                "id".to_string()
            } else {
                s.join(".")
            }
        };
        out.push_str(&format!("equal {} = {}\n", side(&l), side(&r)));
    }
    out
}

/// Recovers a presentation from a finite category, using the naming
/// convention of `present_category`: generators are the dot-free
/// non-identity morphisms, and every product that does not spell out its own
/// path becomes a relation.
pub fn recover_presentation(cat: &FinCategory) -> Presentation {
    let path_of = |m: usize| -> Vec<String> {
        if cat.is_identity(m) {
            Vec::new()
        } else {
            cat.mor_name(m).split('.').map(|s| s.to_string()).collect()
        }
    };
    let mut arrows = Vec::new();
    for (m, name) in cat.morphisms() {
        if !cat.is_identity(m) && !name.contains('.') {
            arrows.push((
                name.to_string(),
                cat.obj_name(cat.dom(m)).to_string(),
                cat.obj_name(cat.cod(m)).to_string(),
            ));
        }
    }
    let mut relations: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    let mut longest = 1usize;
    for (m, _) in cat.morphisms() {
        longest = longest.max(path_of(m).len());
        for (g, gname) in cat.morphisms() {
            if cat.is_identity(g) || gname.contains('.') {
                continue;
            }
            if let Some(mg) = cat.compose(g, m) {
                let mut spelled = path_of(m);
                spelled.push(gname.to_string());
                let canonical = path_of(mg);
                if spelled != canonical {
                    relations.push((spelled, canonical));
                }
            }
        }
    }
    relations.sort();
    relations.dedup();
    Presentation {
        vertices: cat.objects().map(|(_, o)| o.to_string()).collect(),
        arrows,
        relations,
        saturation_bound: (longest + 2).max(DEFAULT_BOUND),
    }
}
