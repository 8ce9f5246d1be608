//! C ABI for `speclust`.
//!
//! Every fallible function returns a [`SpeclustStatus`]; on failure the
//! message is available from [`speclust_last_error`] on the same thread.
//! Matrices and eigensolver sessions are opaque handles created by
//! `*_new`/`*_from_*` functions and released with the matching `*_free`.
//! Dense outputs are row-major buffers allocated by the caller.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use speclust::eigen::{eigensolve, LanczosConfig, RciSession, RciState};
use speclust::kmeans::{kmeans, KmeansConfig, KmeansInit};
use speclust::laplacian::IsolatedPolicy;
use speclust::metrics::{adjusted_rand_index, ncut, Partition};
use speclust::pipeline::{self, PipelineConfig, PipelineInput};
use speclust::sbm::{sbm_generate, SbmConfig};
use speclust::{CooMatrix, CsrMatrix, DenseMatrix, DupPolicy, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeclustStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    NotSymmetric = 5,
    IsolatedNode = 6,
    NotConverged = 7,
    Breakdown = 8,
    DegenerateInput = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeclustRciState {
    NeedMatvec = 0,
    Converged = 1,
    Failed = 2,
}

/// Eigensolver settings. `subspace = 0` selects the default dimension.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpeclustEigenConfig {
    pub k: usize,
    pub subspace: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpeclustKmeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub n_init: usize,
    pub seed: u64,
    /// Uniformly chosen distinct points instead of k-means++ seeding.
    pub random_init: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpeclustClusterConfig {
    pub k: usize,
    pub seed: u64,
    pub normalize_rows: bool,
    /// Drop zero-degree nodes instead of failing; they are labelled -1.
    pub remove_isolated: bool,
    pub kmeans_restarts: usize,
}

/// Opaque CSR matrix.
pub struct SpeclustMatrix(CsrMatrix);

/// Opaque reverse-communication eigensolver session.
pub struct SpeclustSession(RciSession);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SpeclustStatus {
    use SpeclustStatus as S;
    match e.root() {
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } => S::DimensionMismatch,
        Error::NonFinite(_) => S::NonFinite,
        Error::NotSymmetric { .. } => S::NotSymmetric,
        Error::IsolatedNode(_) => S::IsolatedNode,
        Error::MaxRestartsExceeded { .. } | Error::NotConverged => S::NotConverged,
        Error::Breakdown => S::Breakdown,
        Error::DegenerateVector { .. }
        | Error::ZeroDegree { .. }
        | Error::EmptyPart { .. }
        | Error::ZeroVolumePart { .. } => S::DegenerateInput,
        Error::Io(_) | Error::Parse { .. } => S::Io,
        _ => S::InvalidArgument,
    }
}

struct Fail(SpeclustStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpeclustStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpeclustStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            SpeclustStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SpeclustStatus::Panic
        }
    }
}

/// `len` elements at `p`; an empty slice when `len == 0`.
unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

impl From<&SpeclustEigenConfig> for LanczosConfig {
    fn from(c: &SpeclustEigenConfig) -> Self {
        LanczosConfig {
            k: c.k,
            m: (c.subspace > 0).then_some(c.subspace),
            tol: c.tol,
            max_restarts: c.max_restarts,
            seed: c.seed,
        }
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn speclust_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn speclust_eigen_config_default(k: usize) -> SpeclustEigenConfig {
    let c = LanczosConfig::new(k);
    SpeclustEigenConfig {
        k,
        subspace: 0,
        tol: c.tol,
        max_restarts: c.max_restarts,
        seed: c.seed,
    }
}

#[no_mangle]
pub extern "C" fn speclust_kmeans_config_default(k: usize) -> SpeclustKmeansConfig {
    let c = KmeansConfig::new(k);
    SpeclustKmeansConfig {
        k,
        max_iters: c.max_iters,
        n_init: c.n_init,
        seed: c.seed,
        random_init: false,
    }
}

#[no_mangle]
pub extern "C" fn speclust_cluster_config_default(k: usize) -> SpeclustClusterConfig {
    SpeclustClusterConfig {
        k,
        seed: 0,
        normalize_rows: false,
        remove_isolated: false,
        kmeans_restarts: pipeline::DEFAULT_KMEANS_RESTARTS,
    }
}

/// Builds a CSR matrix from `nnz` triplets. Duplicates are summed when
/// `sum_duplicates` is true and rejected otherwise.
///
/// # Safety
/// `rows`, `cols` and `vals` must each point to `nnz` readable elements and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_from_triplets(
    n_rows: usize,
    n_cols: usize,
    nnz: usize,
    rows: *const usize,
    cols: *const usize,
    vals: *const f64,
    sum_duplicates: bool,
    out: *mut *mut SpeclustMatrix,
) -> SpeclustStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = slice_in(rows, nnz, "rows")?.to_vec();
        let c = slice_in(cols, nnz, "cols")?.to_vec();
        let v = slice_in(vals, nnz, "vals")?.to_vec();
        let policy = if sum_duplicates { DupPolicy::Sum } else { DupPolicy::Error };
        let m = CooMatrix::new(n_rows, n_cols, r, c, v)?.canonicalize(policy)?.to_csr()?;
        *out = Box::into_raw(Box::new(SpeclustMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_free(m: *mut SpeclustMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_n_rows(m: *const SpeclustMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_rows())
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_n_cols(m: *const SpeclustMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_cols())
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_nnz(m: *const SpeclustMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nnz())
}

/// `y = M x`.
///
/// # Safety
/// `x` must hold `n_cols` and `y` `n_rows` elements.
#[no_mangle]
pub unsafe extern "C" fn speclust_matrix_spmv(
    m: *const SpeclustMatrix,
    x: *const f64,
    y: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let m = &handle(m, "matrix")?.0;
        let x = slice_in(x, m.n_cols(), "x")?;
        let y = slice_out(y, m.n_rows(), "y")?;
        m.spmv_into(x, y)?;
        Ok(())
    })
}

/// Largest `cfg.k` eigenpairs of a symmetric matrix.
///
/// # Safety
/// `values` must hold `k` elements and `vectors` `n * k` (row-major, one
/// eigenvector per column).
#[no_mangle]
pub unsafe extern "C" fn speclust_eigensolve(
    m: *const SpeclustMatrix,
    cfg: *const SpeclustEigenConfig,
    values: *mut f64,
    vectors: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let m = &handle(m, "matrix")?.0;
        let cfg = LanczosConfig::from(handle(cfg, "config")?);
        let values = slice_out(values, cfg.k, "values")?;
        let vectors = slice_out(vectors, m.n_rows() * cfg.k, "vectors")?;
        let b = eigensolve(m, &cfg)?;
        values.copy_from_slice(&b.values);
        vectors.copy_from_slice(b.vectors.data());
        Ok(())
    })
}

/// Starts a session for an `n`-dimensional operator.
///
/// # Safety
/// `cfg` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_new(
    n: usize,
    cfg: *const SpeclustEigenConfig,
    out: *mut *mut SpeclustSession,
) -> SpeclustStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = LanczosConfig::from(handle(cfg, "config")?);
        let s = RciSession::new(n, cfg)?;
        *out = Box::into_raw(Box::new(SpeclustSession(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a session that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_free(s: *mut SpeclustSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

fn rci_state(s: RciState) -> SpeclustRciState {
    match s {
        RciState::NeedMatvec => SpeclustRciState::NeedMatvec,
        RciState::Converged => SpeclustRciState::Converged,
        RciState::Failed => SpeclustRciState::Failed,
    }
}

/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_state(s: *const SpeclustSession) -> SpeclustRciState {
    s.as_ref().map_or(SpeclustRciState::Failed, |s| rci_state(s.0.state()))
}

/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_dim(s: *const SpeclustSession) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// The `n` values to multiply by the operator. Valid until the next
/// `speclust_session_advance`.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_in_slot(s: *const SpeclustSession) -> *const f64 {
    s.as_ref().map_or(ptr::null(), |s| s.0.in_slot().as_ptr())
}

/// Where the `n` values of the product go before `speclust_session_advance`.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_out_slot(s: *mut SpeclustSession) -> *mut f64 {
    s.as_mut().map_or(ptr::null_mut(), |s| s.0.out_slot_mut().as_mut_ptr())
}

/// Consumes the out slot and moves the iteration forward.
///
/// # Safety
/// `s` must be a live session; `state` may be null.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_advance(
    s: *mut SpeclustSession,
    state: *mut SpeclustRciState,
) -> SpeclustStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("session"))?;
        let r = s.0.advance();
        if let Some(st) = state.as_mut() {
            *st = rci_state(s.0.state());
        }
        r?;
        Ok(())
    })
}

/// Computes `y = A x` for vectors of length `n`.
pub type SpeclustApply =
    Option<unsafe extern "C" fn(user_data: *mut c_void, x: *const f64, y: *mut f64, n: usize)>;

/// Eigenpairs of a converged session. `apply` is called once per pair to
/// measure the true residual.
///
/// # Safety
/// `values` must hold `k` elements, `vectors` `n * k`, and `residuals`
/// (which may be null) `k`.
#[no_mangle]
pub unsafe extern "C" fn speclust_session_extract(
    s: *const SpeclustSession,
    apply: SpeclustApply,
    user_data: *mut c_void,
    values: *mut f64,
    vectors: *mut f64,
    residuals: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let s = &handle(s, "session")?.0;
        let apply = apply.ok_or_else(|| null("apply"))?;
        let b = s.extract(|x, y| unsafe { apply(user_data, x.as_ptr(), y.as_mut_ptr(), x.len()) })?;
        let k = b.k();
        slice_out(values, k, "values")?.copy_from_slice(&b.values);
        slice_out(vectors, s.dim() * k, "vectors")?.copy_from_slice(b.vectors.data());
        if !residuals.is_null() {
            slice_out(residuals, k, "residuals")?.copy_from_slice(&b.residuals);
        }
        Ok(())
    })
}

/// k-means on the rows of an `n × d` row-major point array.
///
/// # Safety
/// `points` must hold `n * d` elements, `labels` `n`; `sse` may be null.
#[no_mangle]
pub unsafe extern "C" fn speclust_kmeans(
    points: *const f64,
    n: usize,
    d: usize,
    cfg: *const SpeclustKmeansConfig,
    labels: *mut usize,
    sse: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let c = handle(cfg, "config")?;
        let v = DenseMatrix::new(n, d, slice_in(points, n * d, "points")?.to_vec())?;
        let cfg = KmeansConfig {
            max_iters: c.max_iters,
            n_init: c.n_init,
            seed: c.seed,
            init: if c.random_init { KmeansInit::RandomPoints } else { KmeansInit::KmeansPlusPlus },
            ..KmeansConfig::new(c.k)
        };
        let labels = slice_out(labels, n, "labels")?;
        let l = kmeans(&v, &cfg)?;
        labels.copy_from_slice(&l.labels);
        if let Some(s) = sse.as_mut() {
            *s = l.sse;
        }
        Ok(())
    })
}

/// Full spectral clustering of a similarity matrix.
///
/// # Safety
/// `labels` must hold `n` elements; removed isolated nodes get -1.
/// `ncut_value` may be null.
#[no_mangle]
pub unsafe extern "C" fn speclust_cluster(
    m: *const SpeclustMatrix,
    cfg: *const SpeclustClusterConfig,
    labels: *mut i64,
    ncut_value: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let w = &handle(m, "matrix")?.0;
        let c = handle(cfg, "config")?;
        let labels = slice_out(labels, w.n_rows(), "labels")?;
        let mut p = PipelineConfig::new(PipelineInput::Matrix(w.to_coo()), c.k).with_seed(c.seed);
        p.normalize_rows = c.normalize_rows;
        p.kmeans.n_init = c.kmeans_restarts;
        if c.remove_isolated {
            p.isolated_policy = IsolatedPolicy::Remove;
        }
        let r = pipeline::run(&p)?;
        for (dst, l) in labels.iter_mut().zip(r.full_labels()) {
            *dst = l.map_or(-1, |l| l as i64);
        }
        if let Some(out) = ncut_value.as_mut() {
            *out = r.ncut_value;
        }
        Ok(())
    })
}

/// Samples a stochastic block model. `labels` receives the planted block of
/// each of the `sum(block_sizes)` nodes.
///
/// # Safety
/// `block_sizes` must hold `n_blocks` elements, `labels` the node count, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn speclust_sbm_generate(
    block_sizes: *const usize,
    n_blocks: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
    out: *mut *mut SpeclustMatrix,
    labels: *mut usize,
) -> SpeclustStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sizes = slice_in(block_sizes, n_blocks, "block_sizes")?.to_vec();
        let cfg = SbmConfig::new(sizes, p_in, p_out, seed);
        cfg.validate()?;
        let labels = slice_out(labels, cfg.n(), "labels")?;
        let g = sbm_generate(&cfg)?;
        labels.copy_from_slice(&g.labels);
        *out = Box::into_raw(Box::new(SpeclustMatrix(g.matrix.to_csr()?)));
        Ok(())
    })
}

/// Normalized cut of a `k`-way labeling.
///
/// # Safety
/// `labels` must hold one entry per matrix row and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn speclust_ncut(
    m: *const SpeclustMatrix,
    labels: *const usize,
    k: usize,
    out: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let w = &handle(m, "matrix")?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = Partition::new(slice_in(labels, w.n_rows(), "labels")?.to_vec(), k)?;
        *out = ncut(w, &p)?;
        Ok(())
    })
}

/// Adjusted Rand index of two labelings of `n` items.
///
/// # Safety
/// `a` and `b` must hold `n` elements and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn speclust_ari(
    a: *const usize,
    b: *const usize,
    n: usize,
    out: *mut f64,
) -> SpeclustStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = adjusted_rand_index(slice_in(a, n, "a")?, slice_in(b, n, "b")?)?;
        Ok(())
    })
}
