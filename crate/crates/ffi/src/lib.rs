//! C ABI over `opprecond`: opaque handles for meshes, discretized problems
//! and preconditioners, integer status codes, and a thread-local message
//! for the last error.
//!
//! Every handle returned through an out-pointer must be released with its
//! `*_free` function. Functions never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use opprecond::discretization::{dof_layout, DofLayout, SpaceKind};
use opprecond::linalg::LinearOperator;
use opprecond::mesh::{corner_cells, make_structured, nvb_refine, uniform_refine, DirichletSpec, Geometry, MeshCombinatorics, SimplicialMesh};
use opprecond::operators::{assemble_pair, BackendKind, BackendOptions, OperatorPair};
use opprecond::precond::{build, PrecondFactors, PrecondSpec, Variant};
use opprecond::spectral::{dense_kappa, DENSE_EIG_MAX_N};
use opprecond::Error;

/// Status returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OppStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPositiveDefinite = 4,
    SizeLimit = 5,
    Unsupported = 6,
    InvalidMesh = 7,
    OracleNotConverged = 8,
    Panic = 9,
    Other = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OppGeometry {
    Interval = 0,
    ClosedPolygon = 1,
    Ellipse = 2,
    UnitSquare = 3,
    CubeSurface = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OppSpace {
    Discontinuous = 0,
    Continuous = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OppBackend {
    Identity = 0,
    SingleLayerCurve = 1,
    Order2 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OppVariant {
    Disc0 = 0,
    Cont1 = 1,
    DiscHighOpp = 2,
    DiscHighSsc = 3,
    ContHighOpp = 4,
    ContHighSsc = 5,
    Jacobi = 6,
}

/// Opaque simplicial mesh.
pub struct OppMesh(SimplicialMesh);

/// Opaque discretized problem: mesh, trial space, `A` and `B^S`.
pub struct OppProblem {
    mesh: SimplicialMesh,
    comb: MeshCombinatorics,
    layout: DofLayout,
    pair: OperatorPair,
    bs: Arc<dyn LinearOperator>,
}

/// Opaque preconditioner `G`.
pub struct OppPrecond(PrecondFactors);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> OppStatus {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Parse { .. } => OppStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => OppStatus::DimensionMismatch,
        Error::NotPositiveDefinite => OppStatus::NotPositiveDefinite,
        Error::SizeLimit { .. } => OppStatus::SizeLimit,
        Error::Unsupported(_) => OppStatus::Unsupported,
        Error::InvalidMesh(_) => OppStatus::InvalidMesh,
        Error::OracleNotConverged { .. } => OppStatus::OracleNotConverged,
        Error::Io(_) => OppStatus::Other,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (OppStatus, String)>) -> OppStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OppStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            OppStatus::Panic
        }
    }
}

fn lib(e: Error) -> (OppStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (OppStatus, String) {
    (OppStatus::NullPointer, format!("{what} is null"))
}

/// Enum value whose discriminant is `v`; C callers may pass any integer.
fn code<T: Copy + Into<c_int>>(v: c_int, all: &[T], what: &str) -> Result<T, (OppStatus, String)> {
    all.iter()
        .copied()
        .find(|t| (*t).into() == v)
        .ok_or_else(|| (OppStatus::InvalidArgument, format!("unknown {what} code {v}")))
}

macro_rules! to_c_int {
    ($($t:ty),*) => {$(
        impl From<$t> for c_int {
            fn from(v: $t) -> c_int {
                v as c_int
            }
        }
    )*};
}
to_c_int!(OppGeometry, OppSpace, OppBackend, OppVariant);

unsafe fn out_ptr<T>(out: *mut *mut T, v: T) -> Result<(), (OppStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn opp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Structured initial mesh; `dirichlet` = 1 puts the whole boundary on γ.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opp_mesh_structured(
    geometry: c_int,
    initial_elements: usize,
    dirichlet: c_int,
    out: *mut *mut OppMesh,
) -> OppStatus {
    guard(|| {
        let g = match code(geometry, &[OppGeometry::Interval, OppGeometry::ClosedPolygon, OppGeometry::Ellipse, OppGeometry::UnitSquare, OppGeometry::CubeSurface], "geometry")? {
            OppGeometry::Interval => Geometry::interval(),
            OppGeometry::ClosedPolygon => Geometry::closed_polygon(4),
            OppGeometry::Ellipse => Geometry::ellipse(),
            OppGeometry::UnitSquare => Geometry::UnitSquare,
            OppGeometry::CubeSurface => Geometry::CubeSurface,
        };
        let d = if dirichlet != 0 { DirichletSpec::Boundary } else { DirichletSpec::None };
        let m = make_structured(g, initial_elements, d).map_err(lib)?;
        out_ptr(out, OppMesh(m))
    })
}

/// Red refinement (`local` = 0) or bisection of the corner cells (`local` ≠ 0).
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opp_mesh_refine(mesh: *const OppMesh, local: c_int, out: *mut *mut OppMesh) -> OppStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        let r = if local != 0 { nvb_refine(m, &corner_cells(m)) } else { uniform_refine(m) };
        out_ptr(out, OppMesh(r))
    })
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn opp_mesh_n_cells(mesh: *const OppMesh) -> usize {
    mesh.as_ref().map(|m| m.0.n_cells()).unwrap_or(0)
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn opp_mesh_free(mesh: *mut OppMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Assembles `A` and `B^S` for the trial space of the given kind and
/// degree. `alpha` ≤ 0 selects the default rank-one weight.
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opp_problem_new(
    mesh: *const OppMesh,
    space: c_int,
    degree: usize,
    backend: c_int,
    alpha: f64,
    out: *mut *mut OppProblem,
) -> OppStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?.0.clone();
        let space = code(space, &[OppSpace::Discontinuous, OppSpace::Continuous], "space")?;
        let kind = match (space, degree) {
            (OppSpace::Discontinuous, _) => SpaceKind::DiscPoly,
            (OppSpace::Continuous, 1) => SpaceKind::ContLinear,
            (OppSpace::Continuous, _) => SpaceKind::ContPoly,
        };
        let layout = dof_layout(&mesh, kind, degree).map_err(lib)?;
        let comb = MeshCombinatorics::new(&mesh);
        let backend = match code(backend, &[OppBackend::Identity, OppBackend::SingleLayerCurve, OppBackend::Order2], "backend")? {
            OppBackend::Identity => BackendKind::Identity,
            OppBackend::SingleLayerCurve => BackendKind::SingleLayerCurve,
            OppBackend::Order2 => BackendKind::Order2,
        };
        let mut opts = BackendOptions::default();
        if alpha > 0.0 {
            opts.alpha = alpha;
        }
        let pair = assemble_pair(backend, &mesh, &comb, &layout, &opts).map_err(lib)?;
        let bs: Arc<dyn LinearOperator> = Arc::new(pair.bs.clone());
        out_ptr(out, OppProblem { mesh, comb, layout, pair, bs })
    })
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn opp_problem_n_dofs(p: *const OppProblem) -> usize {
    p.as_ref().map(|p| p.layout.n_dofs()).unwrap_or(0)
}

/// Copies the dense Galerkin matrix `A` (column-major, `n*n` entries).
///
/// # Safety
/// `p` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opp_problem_matrix(p: *const OppProblem, buf: *mut f64, len: usize) -> OppStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let a = p.pair.a.as_slice();
        if len != a.len() {
            return Err(lib(Error::DimensionMismatch { expected: a.len(), got: len }));
        }
        std::ptr::copy_nonoverlapping(a.as_ptr(), buf, len);
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn opp_problem_free(p: *mut OppProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Builds a preconditioner for the problem's trial space.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opp_precond_new(
    p: *const OppProblem,
    variant: c_int,
    beta: f64,
    out: *mut *mut OppPrecond,
) -> OppStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let all = [
            OppVariant::Disc0,
            OppVariant::Cont1,
            OppVariant::DiscHighOpp,
            OppVariant::DiscHighSsc,
            OppVariant::ContHighOpp,
            OppVariant::ContHighSsc,
            OppVariant::Jacobi,
        ];
        let variant = match code(variant, &all, "variant")? {
            OppVariant::Disc0 => Variant::Disc0,
            OppVariant::Cont1 => Variant::Cont1,
            OppVariant::DiscHighOpp => Variant::DiscHighOpp,
            OppVariant::DiscHighSsc => Variant::DiscHighSsc,
            OppVariant::ContHighOpp => Variant::ContHighOpp,
            OppVariant::ContHighSsc => Variant::ContHighSsc,
            OppVariant::Jacobi => Variant::Jacobi,
        };
        let spec = PrecondSpec { variant, s: p.pair.s, beta };
        let g = build(&spec, &p.mesh, &p.comb, &p.layout, &p.pair.a, p.bs.clone()).map_err(lib)?;
        out_ptr(out, OppPrecond(g))
    })
}

/// `y = G r` for vectors of length `n`.
///
/// # Safety
/// `g` must be a live handle; `r` and `y` valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opp_precond_apply(g: *const OppPrecond, r: *const f64, y: *mut f64, n: usize) -> OppStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("preconditioner"))?.0;
        if r.is_null() || y.is_null() {
            return Err(null("vector"));
        }
        let out = g.apply(std::slice::from_raw_parts(r, n)).map_err(lib)?;
        std::ptr::copy_nonoverlapping(out.as_ptr(), y, n);
        Ok(())
    })
}

/// Spectral condition number of `G A` by the dense oracle.
///
/// # Safety
/// `p`, `g` must be live handles and `kappa` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opp_kappa(p: *const OppProblem, g: *const OppPrecond, kappa: *mut f64) -> OppStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let g = &g.as_ref().ok_or_else(|| null("preconditioner"))?.0;
        if kappa.is_null() {
            return Err(null("kappa"));
        }
        let gd = g.assemble_dense(DENSE_EIG_MAX_N).map_err(lib)?;
        *kappa = dense_kappa(&gd, &p.pair.a, DENSE_EIG_MAX_N).map_err(lib)?.kappa;
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn opp_precond_free(g: *mut OppPrecond) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
