//! CPU time of the calling thread, the single-CPU cost of one run.

#[derive(Debug, Clone, Copy)]
pub struct ThreadCpuTimer {
    start: f64,
}

fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

impl ThreadCpuTimer {
    pub fn start() -> Self {
        Self {
            start: thread_cpu_seconds(),
        }
    }

    pub fn elapsed_seconds(&self) -> f64 {
        thread_cpu_seconds() - self.start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busy_loop_advances_clock() {
        let t = ThreadCpuTimer::start();
        let mut x = 0.0f64;
        for i in 0..2_000_000 {
            x += (f64::from(i)).sqrt();
        }
        assert!(x > 0.0);
        assert!(t.elapsed_seconds() > 0.0);
    }
}
