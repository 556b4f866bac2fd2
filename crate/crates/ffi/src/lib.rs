//! C ABI over the `pconductance` core.
//!
//! Graphs and potentials are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`PcStatus`]; on failure
//! the message is kept per thread and read with [`pc_last_error_message`].
//! Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;
use pconductance::assignment::{argmax_assign, transport_assign};
use pconductance::measures::{one_vs_all, DiffusionMethod, HeatKernel, LabelMatrix};
use pconductance::solvers::{conductance_objective, solve_multiclass, SolveMethod, SolverConfig};
use pconductance::{Error, WeightedGraph};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Disconnected = 4,
    NotConverged = 5,
    Infeasible = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
    Other = 11,
}

/// A weighted undirected graph.
pub struct PcGraph {
    inner: WeightedGraph,
}

/// An `n × k` matrix of class potentials.
pub struct PcPotential {
    values: DMatrix<f64>,
    converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> PcStatus {
    match err {
        Error::DimensionMismatch { .. } => PcStatus::DimensionMismatch,
        Error::InvalidParameter(_) | Error::InvalidEdge { .. } | Error::DuplicatePoint { .. } | Error::NotMeanZero { .. } | Error::EmptyClass { .. } | Error::ZeroMeasure => {
            PcStatus::InvalidArgument
        }
        Error::Disconnected { .. } => PcStatus::Disconnected,
        Error::NotConverged { .. } | Error::ProxNoConvergence { .. } | Error::CgBreakdown { .. } | Error::LineSearch { .. } | Error::PivotLimit(_) => PcStatus::NotConverged,
        Error::Infeasible | Error::Unbounded => PcStatus::Infeasible,
        Error::Io(_) => PcStatus::Io,
        Error::Parse { .. } => PcStatus::Parse,
        _ => PcStatus::Other,
    }
}

fn fail(status: PcStatus, msg: &str) -> PcStatus {
    set_error(msg);
    status
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (PcStatus, String)>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PcStatus::Ok
        }
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(PcStatus::Panic, "internal panic"),
    }
}

fn core_err(e: Error) -> (PcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PcStatus, String) {
    (PcStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null only when `len == 0`, else valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (PcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length without
/// the terminator; pass `buf = NULL` to query it.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `n` nodes from `m` edges `(src[e], dst[e], weight[e])`.
///
/// # Safety
/// The three edge arrays must be valid for `m` reads; `out` must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_new(n: usize, src: *const usize, dst: *const usize, weight: *const f64, m: usize, out: *mut *mut PcGraph) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, d, w) = (slice(src, m, "src")?, slice(dst, m, "dst")?, slice(weight, m, "weight")?);
        let g = WeightedGraph::new(n, (0..m).map(|e| (s[e], d[e], w[e]))).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PcGraph { inner: g }));
        Ok(())
    })
}

/// Reads an edge-list file (`i j w` per line, `#` comments).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_read(path: *const c_char, out: *mut *mut PcGraph) -> PcStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err(null("path or out"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| (PcStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let n = pconductance::graph::declared_node_count(path.as_ref()).map_err(core_err)?;
        let g = pconductance::graph::read_graph(path, n).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PcGraph { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_free(graph: *mut PcGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_node_count(graph: *const PcGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.node_count())
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_edge_count(graph: *const PcGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// `‖Bᵀφ‖_{p,w} / φᵀr` for potentials `phi` and a mean-zero `r`, both of
/// length `n`. `p = INFINITY` selects the weighted max.
///
/// # Safety
/// `phi` and `r` valid for `n` reads, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn pc_conductance(graph: *const PcGraph, p: f64, phi: *const f64, r: *const f64, n: usize, out: *mut f64) -> PcStatus {
    guard(|| {
        let g = &graph.as_ref().ok_or_else(|| null("graph"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        if n != g.node_count() {
            return Err(core_err(Error::DimensionMismatch { expected: g.node_count(), actual: n }));
        }
        if !(p >= 1.0) {
            return Err((PcStatus::InvalidArgument, format!("p must be at least 1, got {p}")));
        }
        *out = conductance_objective(g, p, slice(phi, n, "phi")?, slice(r, n, "r")?);
        Ok(())
    })
}

/// Solves the one-vs-all programs for `count` labeled nodes
/// (`nodes[i]` has class `classes[i] < k`). `t > 0` diffuses the label
/// measures first. The graph must be connected.
///
/// # Safety
/// `nodes` and `classes` valid for `count` reads; `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn pc_solve(
    graph: *const PcGraph,
    nodes: *const usize,
    classes: *const usize,
    count: usize,
    k: usize,
    p: f64,
    t: f64,
    tol: f64,
    out: *mut *mut PcPotential,
) -> PcStatus {
    guard(|| {
        let g = &graph.as_ref().ok_or_else(|| null("graph"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let (nodes, classes) = (slice(nodes, count, "nodes")?, slice(classes, count, "classes")?);
        let labels: Vec<(usize, usize)> = nodes.iter().copied().zip(classes.iter().copied()).collect();
        let mut y = LabelMatrix::from_labels(g.node_count(), k, &labels).map_err(core_err)?;
        if t > 0.0 {
            y = HeatKernel::new(g).diffuse(&y, t, DiffusionMethod::Auto).map_err(core_err)?;
        }
        let r = one_vs_all(&y).map_err(core_err)?;
        let cfg = SolverConfig { tol, ..Default::default() };
        let pot = solve_multiclass(g, &r, p, SolveMethod::Auto, &cfg).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PcPotential { values: pot.matrix().clone(), converged: pot.converged() }));
        Ok(())
    })
}

/// # Safety
/// `potential` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pc_potential_free(potential: *mut PcPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Writes the row and column counts.
///
/// # Safety
/// `potential` a live handle; `rows` and `cols` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pc_potential_shape(potential: *const PcPotential, rows: *mut usize, cols: *mut usize) -> PcStatus {
    guard(|| {
        let pot = potential.as_ref().ok_or_else(|| null("potential"))?;
        if rows.is_null() || cols.is_null() {
            return Err(null("rows or cols"));
        }
        (*rows, *cols) = pot.values.shape();
        Ok(())
    })
}

/// Whether every class's solve met its tolerance.
///
/// # Safety
/// `potential` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_potential_converged(potential: *const PcPotential) -> bool {
    potential.as_ref().is_some_and(|p| p.converged)
}

/// Copies the potentials row-major (`buf[i * k + c]`) into `buf`.
///
/// # Safety
/// `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pc_potential_copy(potential: *const PcPotential, buf: *mut f64, len: usize) -> PcStatus {
    guard(|| {
        let pot = potential.as_ref().ok_or_else(|| null("potential"))?;
        let (n, k) = pot.values.shape();
        if len < n * k {
            return Err((PcStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", n * k)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, n * k);
        for i in 0..n {
            for c in 0..k {
                out[i * k + c] = pot.values[(i, c)];
            }
        }
        Ok(())
    })
}

/// Assigns each node a class. With `epsilon < 0` the route is argmax;
/// otherwise cardinality-constrained transport with slack `epsilon`
/// towards `class_sizes` (length `k`, summing to `n`; NULL splits evenly).
///
/// # Safety
/// `class_sizes` null or valid for `k` reads; `labels` valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn pc_assign(potential: *const PcPotential, class_sizes: *const usize, epsilon: f64, labels: *mut usize, len: usize) -> PcStatus {
    guard(|| {
        let pot = potential.as_ref().ok_or_else(|| null("potential"))?;
        let (n, k) = pot.values.shape();
        if len < n {
            return Err((PcStatus::BufferTooSmall, format!("need {n} labels, buffer holds {len}")));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        let assigned = if epsilon < 0.0 {
            argmax_assign(&pot.values)
        } else {
            let sizes: Vec<usize> = if class_sizes.is_null() {
                (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
            } else {
                slice(class_sizes, k, "class_sizes")?.to_vec()
            };
            transport_assign(&pot.values, &sizes, epsilon).map_err(core_err)?.labels()
        };
        std::slice::from_raw_parts_mut(labels, n).copy_from_slice(&assigned);
        Ok(())
    })
}
