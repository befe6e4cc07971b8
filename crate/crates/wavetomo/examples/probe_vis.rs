use wavetomo::ray::classify_visibility;
use wavetomo::region::{Edge, GammaSegment, GammaSpec, SubdomainSpec};
use wavetomo::speed::SpeedModel;
use wavetomo::Grid;

fn main() {
    let grid = Grid::square(201).unwrap();
    let c = SpeedModel::constant(1.0).unwrap();
    let region = SubdomainSpec::centered_square(0.9).unwrap();
    let gamma = GammaSpec::new(vec![
        GammaSegment::new(Edge::Left, 0.0, 1.0),
        GammaSegment::new(Edge::Bottom, 0.0, 1.0),
        GammaSegment::new(Edge::Right, 0.0, 0.2),
        GammaSegment::new(Edge::Top, 0.0, 0.2),
    ])
    .unwrap();
    let rep = classify_visibility(&grid, &region, &gamma, &c, 5.0, 2000).unwrap();
    println!("visible {} invisible {} borderline {} stable {}", rep.visible, rep.invisible, rep.borderline, rep.stable);
    for s in rep.samples.iter().filter(|s| s.class != wavetomo::ray::VisibilityClass::Visible) {
        println!("  {:?} at ({:.3},{:.3}) theta {:.4} refl {}", s.class, s.x, s.y, s.theta, s.n_reflections);
    }
}
