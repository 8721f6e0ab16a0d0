fn main() {
    let b = fracq_core::grid::Box3::cube([0.0; 3], 8.0, 64).unwrap();
    let field = fracq_core::grid::GridField3::from_profile(
        b,
        fracq_core::grid::Profile::Gaussian { center: [0.0; 3], sigma: 1.0, amp: 1.0 },
    )
    .unwrap();
    println!("decay: {:?}", field.decay);
    fracq_core::gf3::write_gf3(&field, "/tmp/smoke/g.gf3").unwrap();
    let back = fracq_core::gf3::read_gf3("/tmp/smoke/g.gf3").unwrap();
    println!("back decay: {:?}, profile: {}", back.decay, back.profile.is_some());
    println!("eval at probe [1.1,0,0]: orig {} back {}", field.eval(&[1.1,0.0,0.0]), back.eval(&[1.1,0.0,0.0]));
}
