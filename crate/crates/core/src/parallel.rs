use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(false);

/// Switch the kernels into data-parallel mode.
///
/// Off (the default) every operation is sequential and bit-reproducible.
/// On, transforms fan rows across threads (still exact) while norm
/// reductions lose their fixed summation order, so norm values are only
/// reproducible to about 1e-13 relative.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled, Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    PARALLEL.load(Ordering::Relaxed)
}
