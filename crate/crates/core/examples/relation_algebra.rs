//! Relations as bitset rows, and the model language evaluated on one
//! execution.

use memtrans::corpus;
use memtrans::models::{builtin_model, eval_body, parse_expr};
use memtrans::relalg::{shortest_path, Relation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = Relation::from_pairs(4, [(0, 1), (1, 2), (2, 3)]);
    let plus = r.transitive_closure();
    println!("r+ has {} pairs; 0 reaches 3 via {:?}", plus.len(), shortest_path(&r, 0, 3));
    println!("r;r = {:?}", r.compose(&r)?.pairs().collect::<Vec<_>>());
    println!("reduction of r+ is r again: {}", plus.transitive_reduction() == r);

    // store buffering with both reads seeing the initial values
    let e = corpus::raw("sc_e").execution;
    println!("\n{e}");
    let sc = builtin_model("sc")?;
    for src in ["rb", "rb;mo?;hb", "[W];po;[R]", "mo;hb"] {
        let rel = eval_body(&sc, &e, &parse_expr(src)?)?;
        let pairs: Vec<String> = rel.pairs().map(|(a, b)| format!("{}->{}", e.label(a), e.label(b))).collect();
        println!("{src:<12} {}", pairs.join(" "));
    }
    Ok(())
}
