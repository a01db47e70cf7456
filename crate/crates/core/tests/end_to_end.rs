use emitforge::bench::{self, BenchmarkSpec};
use emitforge::circuit::{Circuit, Outcomes};
use emitforge::graph::GraphState;
use emitforge::hardware::{self, HardwareModel};
use emitforge::pipeline::{compile_graph, PipelineConfig, Session};
use emitforge::schedule;
use emitforge::tableau::Tableau;
use proptest::prelude::*;

fn quick() -> PipelineConfig {
    PipelineConfig { greedy_starts: 8, ..Default::default() }
}

fn assert_prepares(c: &Circuit, g: &GraphState, hw: &HardwareModel) {
    assert!(c.validate(hw).is_empty(), "{:?}", c.validate(hw));
    let want = Tableau::from_graph(g);
    for o in [Outcomes::AllZero, Outcomes::AllOne, Outcomes::Seeded(3)] {
        assert!(c.replay(hw, o).unwrap().states_equal(&want).unwrap());
    }
}

#[test]
fn benchmark_families_compile() {
    let hw = HardwareModel::default();
    for spec in [
        BenchmarkSpec::Lattice { width: 3, height: 4 },
        BenchmarkSpec::Tree { branching: 2, depth: 3 },
        BenchmarkSpec::Tree { branching: 3, depth: 2 },
        BenchmarkSpec::waxman(15, 2),
    ] {
        let g = spec.generate().unwrap();
        let r = compile_graph(&g, &hw, &quick()).unwrap();
        assert_prepares(&r.circuit, &g, &hw);
        assert!(r.metrics.peak_emitters <= r.ne_limit, "{spec:?}");
    }
}

#[test]
fn circuit_json_round_trip_keeps_metrics() {
    let hw = HardwareModel::default();
    let g = BenchmarkSpec::waxman(12, 4).generate().unwrap();
    let r = compile_graph(&g, &hw, &quick()).unwrap();
    let back = Circuit::from_json(&r.circuit.to_json()).unwrap();
    assert_eq!(back, r.circuit);
    assert_eq!(hardware::metrics(&back, &hw).unwrap(), r.metrics);
    assert_prepares(&back, &g, &hw);
}

#[test]
fn usage_curve_peak_matches_metrics() {
    let hw = HardwareModel::default();
    let g = bench::lattice(3, 3).unwrap();
    let cfg = quick();
    let mut s = Session::new(&g, &hw, &cfg).unwrap();
    for f in [1.0, 1.5, 2.0] {
        let r = s.at_factor(f).unwrap();
        assert_eq!(schedule::usage_curve(&r.circuit, &hw).peak(), r.metrics.peak_emitters);
    }
}

#[test]
fn slower_hardware_still_verifies() {
    let hw = HardwareModel::parse_profile("t_ee_cnot=2\nt_emission=0.2\nloss_per_tau=0.01\n").unwrap();
    let g = bench::tree(2, 2).unwrap();
    let r = compile_graph(&g, &hw, &quick()).unwrap();
    assert_prepares(&r.circuit, &g, &hw);
}

#[test]
fn same_seed_same_circuit() {
    let hw = HardwareModel::default();
    let g = BenchmarkSpec::waxman(16, 9).generate().unwrap();
    let a = compile_graph(&g, &hw, &quick()).unwrap();
    let b = compile_graph(&g, &hw, &quick()).unwrap();
    assert_eq!(a.circuit.to_json(), b.circuit.to_json());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pipeline_output_prepares_the_input(seed in 0u64..1_000_000, n in 1usize..=12, p in 0.15f64..0.7) {
        let hw = HardwareModel::default();
        let g = bench::random_connected(n, p, seed);
        let r = compile_graph(&g, &hw, &PipelineConfig { seed, ..quick() }).unwrap();
        prop_assert!(r.metrics.peak_emitters <= r.ne_limit);
        prop_assert!(r.circuit.emitters <= r.ne_limit);
        assert_prepares(&r.circuit, &g, &hw);
    }
}
