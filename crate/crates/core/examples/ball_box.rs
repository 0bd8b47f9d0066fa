//! Ball-and-box protocols: one BMP1 step, completion times, and the coupled run.

use exitroad::ballbox::{bmp1_completion, bmp1_step, bmp2_completion, parse_pairs, BallBoxState};

fn main() {
    let start = BallBoxState::from_pairs(7, &parse_pairs("1:2 3:4 7:3").unwrap()).unwrap();
    println!("start        {:?}", start.as_map());
    println!("after 1 step {:?}", bmp1_step(&start).as_map());
    println!("BMP1 completes in {} ticks", bmp1_completion(&start));
    println!("BMP2 completes in {} ticks", bmp2_completion(&start).unwrap());

    let stacked = BallBoxState::from_pairs(7, &[(7, 9)]).unwrap();
    println!(
        "all nine balls in box 7: {} ticks (M + N = 16)",
        bmp1_completion(&stacked)
    );
}
