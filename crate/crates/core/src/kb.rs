//! Knowledge base of discovered routes, best route per key.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pso::RunOutcome;
use crate::text::content_lines;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct RouteRecord {
    pub source: NodeId,
    pub dest: NodeId,
    pub path: Vec<NodeId>,
    pub fitness: f64,
    pub iterations_to_converge: usize,
    pub graded: bool,
    pub seed: u64,
}

impl RouteRecord {
    /// `None` when the run found no valid path.
    pub fn from_run(run: &RunOutcome, graded: bool, seed: u64) -> Option<RouteRecord> {
        run.path.valid.then(|| RouteRecord {
            source: run.source,
            dest: run.dest,
            path: run.path.nodes.clone(),
            fitness: run.fitness,
            iterations_to_converge: run.iterations_to_converge,
            graded,
            seed,
        })
    }

    fn key(&self) -> RouteKey {
        (self.source, self.dest, self.graded)
    }
}

type RouteKey = (NodeId, NodeId, bool);

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    routes: BTreeMap<RouteKey, RouteRecord>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Stores `r` unless a record with at least its fitness is already held
    /// for the same (source, dest, graded) key. Returns whether it was kept.
    pub fn record(&mut self, r: RouteRecord) -> bool {
        match self.routes.get(&r.key()) {
            Some(old) if old.fitness >= r.fitness => false,
            _ => {
                self.routes.insert(r.key(), r);
                true
            }
        }
    }

    pub fn query(&self, source: NodeId, dest: NodeId, graded: bool) -> Option<&RouteRecord> {
        self.routes.get(&(source, dest, graded))
    }

    pub fn records(&self) -> impl Iterator<Item = &RouteRecord> {
        self.routes.values()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("kb v1\n");
        for r in self.routes.values() {
            let path: Vec<String> = r.path.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!(
                "route {} {} {} {} {} {} {}\n",
                r.source,
                r.dest,
                u8::from(r.graded),
                r.fitness,
                r.iterations_to_converge,
                r.seed,
                path.join("-")
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, KbError> {
        let mut lines = content_lines(text);
        match lines.next() {
            Some((_, "kb v1")) => {}
            Some((line, other)) => {
                return Err(KbError::Parse {
                    line,
                    message: format!("expected header `kb v1`, found `{other}`"),
                })
            }
            None => {
                return Err(KbError::Parse {
                    line: 1,
                    message: "empty knowledge-base file".into(),
                })
            }
        }
        let mut kb = KnowledgeBase::new();
        for (line, l) in lines {
            let r = parse_route(l).ok_or_else(|| KbError::Parse {
                line,
                message: format!("malformed route `{l}`"),
            })?;
            kb.record(r);
        }
        Ok(kb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KbError> {
        KnowledgeBase::from_text(&fs::read_to_string(path)?)
    }

    /// Loads `path`, or starts empty when the file does not exist yet.
    pub fn load_or_default(path: impl AsRef<Path>) -> Result<Self, KbError> {
        match fs::read_to_string(path) {
            Ok(text) => KnowledgeBase::from_text(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }
}

fn parse_route(l: &str) -> Option<RouteRecord> {
    let f: Vec<&str> = l.split_whitespace().collect();
    let ["route", src, dst, graded, fitness, iters, seed, path] = f.as_slice() else {
        return None;
    };
    let graded = match *graded {
        "0" => false,
        "1" => true,
        _ => return None,
    };
    let fitness: f64 = fitness.parse().ok()?;
    if !(0.0..=1.0).contains(&fitness) {
        return None;
    }
    let path = path
        .split('-')
        .map(|s| s.parse().ok().map(NodeId))
        .collect::<Option<Vec<_>>>()?;
    let source = NodeId(src.parse().ok()?);
    let dest = NodeId(dst.parse().ok()?);
    if path.first() != Some(&source) || path.last() != Some(&dest) {
        return None;
    }
    Some(RouteRecord {
        source,
        dest,
        path,
        fitness,
        iterations_to_converge: iters.parse().ok()?,
        graded,
        seed: seed.parse().ok()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(fitness: f64, graded: bool) -> RouteRecord {
        RouteRecord {
            source: NodeId(0),
            dest: NodeId(5),
            path: vec![NodeId(0), NodeId(2), NodeId(5)],
            fitness,
            iterations_to_converge: 7,
            graded,
            seed: 42,
        }
    }

    #[test]
    fn record_then_query() {
        let mut kb = KnowledgeBase::new();
        assert!(kb.query(NodeId(0), NodeId(5), false).is_none());
        kb.record(rec(0.8, false));
        assert_eq!(
            kb.query(NodeId(0), NodeId(5), false),
            Some(&rec(0.8, false))
        );
    }

    #[test]
    fn keeps_the_best() {
        let mut kb = KnowledgeBase::new();
        kb.record(rec(0.8, false));
        assert!(!kb.record(rec(0.7, false)));
        assert_eq!(kb.query(NodeId(0), NodeId(5), false).unwrap().fitness, 0.8);
        assert!(kb.record(rec(0.85, false)));
        assert_eq!(kb.query(NodeId(0), NodeId(5), false).unwrap().fitness, 0.85);
    }

    #[test]
    fn graded_keys_are_separate() {
        let mut kb = KnowledgeBase::new();
        kb.record(rec(0.5, false));
        kb.record(rec(0.6, true));
        assert_eq!(kb.query(NodeId(0), NodeId(5), false).unwrap().fitness, 0.5);
        assert_eq!(kb.query(NodeId(0), NodeId(5), true).unwrap().fitness, 0.6);
    }

    #[test]
    fn text_format() {
        assert_eq!(KnowledgeBase::new().to_text(), "kb v1\n");
        let mut kb = KnowledgeBase::new();
        kb.record(rec(0.781818181818, true));
        let text = kb.to_text();
        assert_eq!(text, "kb v1\nroute 0 5 1 0.781818181818 7 42 0-2-5\n");
        assert_eq!(KnowledgeBase::from_text(&text).unwrap(), kb);
    }

    #[test]
    fn corrupt_line_is_reported() {
        let err =
            KnowledgeBase::from_text("kb v1\nroute 0 5 1 0.5 7 42 0-2-5\nroute 0 x\n").unwrap_err();
        assert!(matches!(err, KbError::Parse { line: 3, .. }));
        let err = KnowledgeBase::from_text("kb v1\nroute 0 5 1 0.5 7 42 1-2-5\n").unwrap_err();
        assert!(matches!(err, KbError::Parse { line: 2, .. }));
    }
}
