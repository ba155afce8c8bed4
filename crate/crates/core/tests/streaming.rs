//! Rows flow to the sink one at a time: a projection over a million edges
//! must not hold them all on the heap.

use std::alloc::{GlobalAlloc, Layout, System};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use kypher_core::harness::generate_scale_file;
use kypher_core::{
    assemble_query, bind_graphs, compile, execute, ExecOptions, Flow, GraphCache, InputSpec, PlanOptions, QueryText,
};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
/// The counters are process-wide, so measured runs take turns.
static SERIAL: Mutex<()> = Mutex::new(());

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// Rows delivered and the heap high-water mark above the starting level.
fn project(dir: &Path, edges: u64, stop_after: Option<u64>) -> (u64, usize) {
    let _turn = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let file = dir.join(format!("scale{edges}.tsv"));
    generate_scale_file(&file, edges, 7).unwrap();
    let mut cache = GraphCache::open(dir.join(format!("cache{edges}.sqlite3"))).unwrap();
    cache.import_graph(&file, Some("g")).unwrap();
    let spec = assemble_query(
        vec![InputSpec::new(file.to_string_lossy(), Some("g"))],
        &QueryText {
            match_text: "(a)-[]->(b)",
            return_text: Some("b, a"),
            ..Default::default()
        },
    )
    .unwrap();
    let compiled = compile(&bind_graphs(&spec, &cache).unwrap(), &PlanOptions::default()).unwrap();
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let mut n = 0u64;
    let mut bytes = 0usize;
    execute(&compiled, &cache, &ExecOptions::default(), &mut |row| {
        n += 1;
        bytes += row.iter().map(|v| v.to_string().len()).sum::<usize>();
        Ok(match stop_after {
            Some(k) if n >= k => Flow::Stop,
            _ => Flow::Continue,
        })
    })
    .unwrap();
    assert!(bytes > 0);
    (n, PEAK.load(Ordering::Relaxed) - base)
}

#[test]
fn projection_memory_does_not_grow_with_input() {
    let dir = tempfile::tempdir().unwrap();
    let (small_rows, small_peak) = project(dir.path(), 100_000, None);
    let (large_rows, large_peak) = project(dir.path(), 1_000_000, None);
    assert_eq!(small_rows, 100_000);
    assert_eq!(large_rows, 1_000_000);
    // A million rows of this shape take well over 40 MB when buffered.
    assert!(large_peak < 4 << 20, "peak {large_peak} bytes");
    assert!(large_peak <= 2 * small_peak + (1 << 20), "{small_peak} -> {large_peak}");
}

#[test]
fn stopping_the_sink_ends_execution() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(project(dir.path(), 50_000, Some(10)).0, 10);
}
