//! C ABI for the `supplykg` library.
//!
//! Graphs and models are opaque handles created by `skg_*_new`/`skg_*_load`
//! functions and released with the matching `skg_*_free`. Every fallible call
//! returns an [`SkgStatus`]; on failure a message is available from
//! [`skg_last_error`] on the same thread until the next failing call.
//!
//! Relations and entity types are passed as their lowercase tags, for example
//! `"buys_from"` or `"company"`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use supplykg::derive::{derive_relations, DeriveConfig};
use supplykg::eval::{auc_from_scores, score_triplets};
use supplykg::model::{load_checkpoint, predict_prob, ModelParams};
use supplykg::sampling::seeded_rng;
use supplykg::synth::{generate, SynthConfig};
use supplykg::{Direction, EntityType, Error, KnowledgeGraph, RelationType, Triplet};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Conformance = 5,
    UnknownEntity = 6,
    SingleClass = 7,
    Incompatible = 8,
    Numerical = 9,
    Panic = 10,
}

/// Edge direction for neighbour queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkgDirection {
    Forward = 0,
    Reverse = 1,
}

/// Opaque knowledge graph handle.
pub struct SkgGraph(KnowledgeGraph);

/// Opaque trained model handle.
pub struct SkgModel(ModelParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SkgStatus {
    match err {
        Error::Io { .. } => SkgStatus::Io,
        Error::Parse { .. } | Error::Json(_) => SkgStatus::Parse,
        Error::Conformance { .. } => SkgStatus::Conformance,
        Error::UnknownEntity(_) => SkgStatus::UnknownEntity,
        Error::SingleClass => SkgStatus::SingleClass,
        Error::Incompatible(_) | Error::Dimension { .. } => SkgStatus::Incompatible,
        Error::Numerical(_) => SkgStatus::Numerical,
        _ => SkgStatus::InvalidArgument,
    }
}

enum Failure {
    Status(SkgStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(SkgStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SkgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SkgStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SkgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::Status(SkgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, Failure> {
    str_arg(ptr, "path").map(PathBuf::from)
}

unsafe fn out_arg<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn graph_ref<'a>(g: *const SkgGraph) -> Result<&'a KnowledgeGraph, Failure> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn graph_mut<'a>(g: *mut SkgGraph) -> Result<&'a mut KnowledgeGraph, Failure> {
    g.as_mut().map(|g| &mut g.0).ok_or_else(|| null("graph"))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn skg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an empty graph.
#[no_mangle]
pub extern "C" fn skg_graph_new() -> *mut SkgGraph {
    Box::into_raw(Box::new(SkgGraph(KnowledgeGraph::new())))
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_free(graph: *mut SkgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Loads a graph file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_load(path: *const c_char, out: *mut *mut SkgGraph) -> SkgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = KnowledgeGraph::load(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(SkgGraph(g)));
        Ok(())
    })
}

/// Writes a graph file.
///
/// # Safety
/// `graph` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_save(graph: *const SkgGraph, path: *const c_char) -> SkgStatus {
    guard(|| Ok(graph_ref(graph)?.save(path_arg(path)?)?))
}

/// Adds (or finds) an entity and stores its id in `*out_id`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_add_entity(
    graph: *mut SkgGraph,
    entity_type: *const c_char,
    label: *const c_char,
    out_id: *mut u32,
) -> SkgStatus {
    guard(|| {
        let g = graph_mut(graph)?;
        let etype: EntityType = str_arg(entity_type, "entity_type")?.parse()?;
        let id = g.add_entity(etype, str_arg(label, "label")?)?;
        *out_arg(out_id, "out_id")? = id;
        Ok(())
    })
}

/// Adds a triplet; `*out_added` is false when it was already present.
///
/// # Safety
/// Pointers must be valid; `relation` NUL-terminated. `out_added` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_add_triplet(
    graph: *mut SkgGraph,
    source: u32,
    relation: *const c_char,
    destination: u32,
    out_added: *mut bool,
) -> SkgStatus {
    guard(|| {
        let g = graph_mut(graph)?;
        let relation: RelationType = str_arg(relation, "relation")?.parse()?;
        let added = g.add_triplet(Triplet::new(source, relation, destination))?;
        if let Some(o) = out_added.as_mut() {
            *o = added;
        }
        Ok(())
    })
}

/// Number of entities, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_entity_count(graph: *const SkgGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.entity_count())
}

/// Number of triplets, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_triplet_count(graph: *const SkgGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.triplet_count())
}

/// Number of triplets of one relation.
///
/// # Safety
/// Pointers must be valid; `relation` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_relation_count(
    graph: *const SkgGraph,
    relation: *const c_char,
    out_count: *mut usize,
) -> SkgStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let relation: RelationType = str_arg(relation, "relation")?.parse()?;
        *out_arg(out_count, "out_count")? = g.relation_count(relation);
        Ok(())
    })
}

/// Copies up to `capacity` neighbour ids into `buffer` and stores the full
/// neighbour count in `*out_len`. Pass `capacity` 0 to query the size.
///
/// # Safety
/// `buffer` must hold `capacity` elements (may be NULL when 0).
#[no_mangle]
pub unsafe extern "C" fn skg_graph_neighbors(
    graph: *const SkgGraph,
    node: u32,
    relation: *const c_char,
    direction: SkgDirection,
    buffer: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> SkgStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let relation: RelationType = str_arg(relation, "relation")?.parse()?;
        let dir = match direction {
            SkgDirection::Forward => Direction::Forward,
            SkgDirection::Reverse => Direction::Reverse,
        };
        let ns = g.neighbors(node, relation, dir)?;
        let out_len = out_arg(out_len, "out_len")?;
        let n = ns.len().min(capacity);
        if n > 0 {
            if buffer.is_null() {
                return Err(null("buffer"));
            }
            std::slice::from_raw_parts_mut(buffer, n).copy_from_slice(&ns[..n]);
        }
        *out_len = ns.len();
        Ok(())
    })
}

/// Recomputes both derived relations with the given thresholds. Counts of
/// derived edges are written to the optional out pointers.
///
/// # Safety
/// `graph` must be a live handle; out pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn skg_graph_derive(
    graph: *mut SkgGraph,
    cooccurrence_threshold: u32,
    projection_threshold: u32,
    out_capability_produces: *mut usize,
    out_complimentary: *mut usize,
) -> SkgStatus {
    guard(|| {
        let g = graph_mut(graph)?;
        let cfg = DeriveConfig {
            capability_cooccurrence_threshold: cooccurrence_threshold,
            projection_weight_threshold: projection_threshold,
        };
        cfg.validate()?;
        let s = derive_relations(g, &cfg)?;
        if let Some(o) = out_capability_produces.as_mut() {
            *o = s.capability_produces_added;
        }
        if let Some(o) = out_complimentary.as_mut() {
            *o = s.complimentary_added;
        }
        Ok(())
    })
}

/// Generates a synthetic graph with default settings except for the given
/// company count, planted strength `lambda` and seed.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_synth_generate(
    companies: usize,
    lambda: f64,
    seed: u64,
    out: *mut *mut SkgGraph,
) -> SkgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = SynthConfig {
            companies,
            lambda,
            seed,
            ..SynthConfig::default()
        };
        let s = generate(&cfg)?;
        *out = Box::into_raw(Box::new(SkgGraph(s.graph)));
        Ok(())
    })
}

/// Exact ROC AUC of `n` scores against 0/1 labels.
///
/// # Safety
/// `scores` and `labels` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn skg_auc(scores: *const f64, labels: *const u8, n: usize, out_auc: *mut f64) -> SkgStatus {
    guard(|| {
        if n > 0 && (scores.is_null() || labels.is_null()) {
            return Err(null("scores or labels"));
        }
        let (s, l) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(scores, n), std::slice::from_raw_parts(labels, n))
        };
        let labels: Vec<bool> = l.iter().map(|&y| y != 0).collect();
        *out_arg(out_auc, "out_auc")? = auc_from_scores(s, &labels)?;
        Ok(())
    })
}

/// Loads model parameters from a checkpoint file.
///
/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn skg_model_load(path: *const c_char, out: *mut *mut SkgModel) -> SkgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ck = load_checkpoint(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(SkgModel(ck.params)));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skg_model_free(model: *mut SkgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Embedding width of a model, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skg_model_dim(model: *const SkgModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim)
}

/// Probabilities for `n` triplets given as parallel arrays, encoded over
/// `graph` with neighbour fan-out `fanout` and sampling seed `seed`.
///
/// # Safety
/// Array arguments must each hold `n` elements; `relations` holds `n`
/// NUL-terminated tags.
#[no_mangle]
pub unsafe extern "C" fn skg_model_score(
    model: *const SkgModel,
    graph: *const SkgGraph,
    sources: *const u32,
    relations: *const *const c_char,
    destinations: *const u32,
    n: usize,
    fanout: usize,
    seed: u64,
    out_probabilities: *mut f64,
) -> SkgStatus {
    guard(|| {
        let params = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let g = graph_ref(graph)?;
        if n == 0 {
            return Ok(());
        }
        if sources.is_null() || relations.is_null() || destinations.is_null() || out_probabilities.is_null() {
            return Err(null("array argument"));
        }
        if params.entity_count() != g.entity_count() {
            return Err(Error::Incompatible(format!(
                "model has {} entities, graph has {}",
                params.entity_count(),
                g.entity_count()
            ))
            .into());
        }
        let src = std::slice::from_raw_parts(sources, n);
        let dst = std::slice::from_raw_parts(destinations, n);
        let rels = std::slice::from_raw_parts(relations, n);
        let mut triplets = Vec::with_capacity(n);
        for i in 0..n {
            let r: RelationType = str_arg(rels[i], "relation")?.parse()?;
            g.entity(src[i])?;
            g.entity(dst[i])?;
            triplets.push(Triplet::new(src[i], r, dst[i]));
        }
        let scores = score_triplets(params, g, &triplets, fanout, &mut seeded_rng(seed, 0))?;
        let out = std::slice::from_raw_parts_mut(out_probabilities, n);
        for (o, s) in out.iter_mut().zip(scores) {
            *o = predict_prob(s);
        }
        Ok(())
    })
}
