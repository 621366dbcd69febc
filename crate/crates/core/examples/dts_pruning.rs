//! Double-threshold pruning of one list step next to the exact sort.
//!
//! cargo run --example dts_pruning

use polar_dts::arith::Arithmetic;
use polar_dts::list::{extend_paths, Pmu};
use polar_dts::pruning::{lpo_dts, lpo_sort, track_thresholds, PathExtension};

fn show(label: &str, v: &[PathExtension]) {
    let items: Vec<String> = v
        .iter()
        .map(|e| format!("{}{}:{}", e.parent, e.bit, e.pm))
        .collect();
    println!("{label:<12} {}", items.join("  "));
}

fn main() {
    let list = 4;
    let pms = [1.0, 2.0, 3.0, 4.0];
    let leaf_llrs = [1.0, -3.0, 1.0, 5.0];
    let slots: Vec<usize> = (0..list).collect();
    let ext = extend_paths(&slots, &pms, &leaf_llrs, Pmu::Hardware, &Arithmetic::Float);
    show("extensions", &ext);

    show("sort", &lpo_sort(&ext, list));

    for rt_index in [2, 3] {
        let th = track_thresholds(&pms, rt_index).expect("list of four");
        let out = lpo_dts(&ext, &th, list);
        println!(
            "\nAT = {}, RT = {} (sorted index {rt_index}): rule 1 kept {}, rule 2 pruned {}, rule 3 filled {}{}",
            th.at,
            th.rt,
            out.kept_by_rule1,
            out.pruned_by_rule2,
            out.filled_by_rule3,
            if out.starved { ", starved" } else { "" }
        );
        show("dts", &out.survivors);
    }
}
