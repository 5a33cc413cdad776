//! Small reference programs used by tests, examples and the CLI.

use crate::pv_lang::{parse_program, Program};

pub const CROSSED3: &str = "\
resource r1 capacity 2
resource r2 capacity 2
thread T1: P(r1) P(r2) V(r2) V(r1)
thread T2: P(r2) P(r1) V(r1) V(r2)
thread T3: P(r1) P(r2) V(r2) V(r1)
";

pub const DINE2: &str = "\
resource a capacity 1
resource b capacity 1
thread T1: P(a) P(b) V(b) V(a)
thread T2: P(b) P(a) V(a) V(b)
";

pub const DINE3: &str = "\
resource r1 capacity 1
resource r2 capacity 1
resource r3 capacity 1
thread T1: P(r1) P(r2) V(r2) V(r1)
thread T2: P(r2) P(r3) V(r3) V(r2)
thread T3: P(r3) P(r1) V(r1) V(r3)
";

pub const LOPSIDED4: &str = "\
resource r1 capacity 3
resource r2 capacity 3
thread T1: P(r1) P(r2) V(r2) V(r1)
thread T2: P(r1) P(r2) V(r2) V(r1)
thread T3: P(r1) P(r2) V(r2) V(r1)
thread T4: P(r2) P(r1) V(r1) V(r2)
";

pub const BALANCED4: &str = "\
resource r1 capacity 3
resource r2 capacity 3
thread p1: P(r1) P(r2) V(r2) V(r1)
thread p2: P(r1) P(r2) V(r2) V(r1)
thread p3: P(r2) P(r1) V(r1) V(r2)
thread p4: P(r2) P(r1) V(r1) V(r2)
";

pub const SHARED3: &str = "\
resource r capacity 2
thread T1: P(r) V(r)
thread T2: P(r) V(r)
thread T3: P(r) V(r)
";

const P0: &str = "P(r1) P(r2) V(r2) V(r1)";

fn load(text: &str) -> Program {
    parse_program(text).expect("corpus program parses")
}

/// `p0` placed first, so the common vertex stays `(2,…,2)`.
fn with_p0(text: &str) -> Program {
    let (decls, threads): (Vec<&str>, Vec<&str>) =
        text.lines().partition(|l| l.starts_with("resource"));
    let mut s = decls.join("\n");
    s.push_str(&format!("\nthread p0: {P0}\n"));
    s.push_str(&threads.join("\n"));
    load(&s)
}

pub fn crossed3() -> Program {
    load(CROSSED3)
}

pub fn dine2() -> Program {
    load(DINE2)
}

pub fn dine3() -> Program {
    load(DINE3)
}

pub fn lopsided4() -> Program {
    load(LOPSIDED4)
}

pub fn balanced4() -> Program {
    load(BALANCED4)
}

pub fn lopsided5() -> Program {
    with_p0(LOPSIDED4)
}

pub fn balanced5() -> Program {
    with_p0(BALANCED4)
}

pub fn shared3() -> Program {
    load(SHARED3)
}

/// One resource of the given capacity; thread `j` runs `(P(r) V(r))^pairs[j]`.
pub fn single_resource(pairs: &[usize], capacity: u32) -> Program {
    let mut s = format!("resource r capacity {capacity}\n");
    for (j, &k) in pairs.iter().enumerate() {
        s.push_str(&format!("thread T{}:{}\n", j + 1, " P(r) V(r)".repeat(k)));
    }
    load(&s)
}

/// `n` threads, one capacity-`n` resource each thread locks once: no forbidden region.
pub fn free(n: usize) -> Program {
    single_resource(&vec![1; n], n as u32)
}
