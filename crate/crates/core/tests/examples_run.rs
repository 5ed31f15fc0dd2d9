macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(synthetic_y4m_roundtrip, "synthetic_y4m_roundtrip.rs");
example!(partition_search, "partition_search.rs");
example!(prior_calibration, "prior_calibration.rs");
example!(bayes_gate, "bayes_gate.rs");
example!(multirate_modes, "multirate_modes.rs");
example!(tau_sweep, "tau_sweep.rs");
example!(bound_report, "bound_report.rs");
example!(bd_rate, "bd_rate.rs");

#[test]
fn examples_run() {
    synthetic_y4m_roundtrip::run().unwrap();
    partition_search::run().unwrap();
    prior_calibration::run().unwrap();
    bayes_gate::run().unwrap();
    multirate_modes::run().unwrap();
    tau_sweep::run().unwrap();
    bound_report::run().unwrap();
    bd_rate::run().unwrap();
}
