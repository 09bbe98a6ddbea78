use newton_critic::expr::{expand, parse};
use newton_critic::resolution::{resolve, verify, ResolveConfig};
use std::time::Instant;
fn main() {
    for text in ["theta^2 - v^2", "(theta - v)^2 - v^3", "theta^3 - 3*v^2*theta + 2*v^3", "v*theta^3 - v^4", "(theta - v)^2*(theta + v) - v^5"] {
        let p = expand(&parse(text).unwrap(), 14).unwrap().poly;
        let t0 = Instant::now();
        let tree = resolve(&p, &ResolveConfig::default()).unwrap();
        let t1 = Instant::now();
        let rep = verify(&tree, 10000, 500, 42);
        let t2 = Instant::now();
        println!("{text}: resolve {:?} verify {:?} eps {:.3e} leaves {} cov {} comp {}", t1-t0, t2-t1, tree.epsilon, rep.leaves, rep.coverage_exact, rep.comparability_ok);
    }
}
