//! Sequential vs data-parallel campaign throughput.
//!
//! Run with `cargo bench -p wdvv-lab-core`; set `WDVV_LAB_THREADS` to cap the
//! parallel pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wdvv_lab_core::campaign::{run_identities, run_wdvv, CampaignConfig};
use wdvv_lab_core::exec::ExecMode;
use wdvv_lab_core::prepotential_zoo::FamilyId;
use wdvv_lab_core::special_fn::SeriesControl;

fn cfg(mode: ExecMode, samples: usize) -> CampaignConfig {
    let mut c = CampaignConfig::new(7, samples);
    c.mode = mode;
    c
}

fn bench_identities(c: &mut Criterion) {
    let ctl = SeriesControl::default();
    let mut g = c.benchmark_group("identities");
    g.sample_size(10);
    for (label, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                let rep = run_identities(&cfg(mode, 8), &ctl);
                assert!(rep.all_pass());
                rep.summary.total
            })
        });
    }
    g.finish();
}

fn bench_wdvv_phi1(c: &mut Criterion) {
    let ctl = SeriesControl::default();
    let mut g = c.benchmark_group("wdvv-G1_3D_Phi1");
    g.sample_size(10);
    for (label, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                let mut config = cfg(mode, 4);
                config.families = Some(vec![FamilyId::G13dPhi1]);
                let rep = run_wdvv(&config, &ctl);
                assert!(rep.all_pass());
                rep.summary.total
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_identities, bench_wdvv_phi1);
criterion_main!(benches);
