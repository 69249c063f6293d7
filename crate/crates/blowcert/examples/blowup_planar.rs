//! End-to-end blow-up validation for the planar principal-part model:
//! both reference starts, printing the enclosure of the blow-up time and
//! the certificate document of the second run.

use blowcert::blowup::{reference_initial, validate_blowup, BlowUpOptions};
use blowcert::certificate::certificate_string;
use blowcert::problems::builtin_problems;

fn main() {
    let problem = builtin_problems()
        .into_iter()
        .find(|p| p.id == "kk-simple")
        .unwrap();
    let options = BlowUpOptions::default();

    for run in &problem.reference_runs {
        let y0 = reference_initial(&problem, run);
        let cert = validate_blowup(&problem, run.chart, &y0, &options);
        println!("{}: {}", run.label, cert.status);
        if let Some(t_max) = cert.t_max {
            println!(
                "  t_max in [{}, {}] (width {:.2e}, {:.1}s)",
                t_max.lo(),
                t_max.hi(),
                t_max.width(),
                cert.wall_seconds
            );
            println!("  reference enclosure {:?}", run.expected_t_max);
        }
        if run.label.contains("-0.1, -0.1") {
            println!("--- certificate ---\n{}", certificate_string(&cert));
        }
    }
}
