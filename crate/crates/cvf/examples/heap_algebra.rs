//! Exact fractional permission accounting on logical heaps: addition,
//! subtraction, the dominance order, and the weak-consistency check.

use cvf::heap::{Chunk, Fraction, GhostValue, LogicalHeap};

fn show(name: &str, h: &LogicalHeap) {
    println!("{name} = {{{}}}", h.dump_lines().join(", "));
}

fn main() {
    let cell = Chunk::points_to(0, 2);
    let ghost = Chunk::ghost_points_to(1, GhostValue::Int(1));

    let mut left = LogicalHeap::new();
    left.insert(cell.clone(), Fraction::half());
    left.insert(ghost.clone(), Fraction::half());
    let right = LogicalHeap::singleton(cell.clone(), Fraction::half());

    show("left ", &left);
    show("right", &right);

    let sum = left.add(&right);
    show("left + right", &sum);
    assert_eq!(sum.coeff(&cell), Fraction::one());

    println!("sum >= left: {}", sum.geq(&left));
    println!("left >= sum: {}", left.geq(&sum));

    let back = sum.sub(&right).expect("sum dominates right");
    show("sum - right", &back);
    assert_eq!(back, left);

    match LogicalHeap::new().sub(&right) {
        Err(e) => println!("subtracting from empty: {e}"),
        Ok(_) => unreachable!(),
    }

    // weak consistency: coefficients above 1 or conflicting stored values
    // are rejected; atomic space coefficients are unbounded
    println!("wok(sum) = {}", sum.wok());
    let mut over = sum.clone();
    over.insert(cell, Fraction::half());
    println!("wok(sum + extra half of the same cell) = {}", over.wok());
    let mut conflict = LogicalHeap::new();
    conflict.insert(Chunk::points_to(0, 1), Fraction::half());
    conflict.insert(Chunk::points_to(0, 2), Fraction::half());
    println!("wok(two values at one address) = {}", conflict.wok());
    let spaces = LogicalHeap::singleton(
        Chunk::AtomicSpace(GhostValue::Unit, GhostValue::Int(0)),
        Fraction::new(3, 1).unwrap(),
    );
    println!("wok(three copies of an atomic space) = {}", spaces.wok());
}
