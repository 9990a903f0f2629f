//! Acceptance criteria, one printed PASS/FAIL line each.

use std::time::Instant;

use shearlet_core::experiments::*;
use shearlet_core::lattice::System;
use shearlet_core::spaces::{Family, SStarParams, SpaceParams};
use shearlet_core::FrequencyGrid;

const SEED: u64 = 42;

fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(n).unwrap()
}

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} [{name}]: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn check(id: u32, name: &str, reports: &[&AuditReport], extra: Option<(bool, String)>) {
    let mut pass = true;
    let mut detail = Vec::new();
    for r in reports {
        assert_eq!(r.pass, r.recheck());
        pass &= r.pass;
        for c in r.failed_cases().iter().take(3) {
            detail.push(format!("{}: {} j={:?} l={:?} measured={:?} bound={:?}", r.audit, c.case, c.j, c.shear, c.measured, c.bound));
        }
        if !r.pass {
            detail.push(format!("{} measured {}", r.audit, serde_json::to_string(&r.measured).unwrap()));
        }
    }
    if let Some((ok, msg)) = extra {
        pass &= ok;
        detail.push(msg);
    }
    report(id, name, pass, detail.join("; "));
    assert!(pass, "criterion {id} failed");
}

#[test]
fn c01_smooth_partition_of_unity() {
    let t = Instant::now();
    let r = audit_frame_check(System::SmoothParseval, grid(256), Some(4)).unwrap();
    let secs = t.elapsed().as_secs_f64();
    check(1, "smooth partition of unity", &[&r], Some((secs < 10.0, format!("runtime {secs:.2}s (limit 10s), deviation {}", r.measured["max_deviation"]))));
}

#[test]
fn c02_cone_projected_cover() {
    let r = audit_frame_check(System::ConeProjected, grid(256), None).unwrap();
    check(2, "cone-projected cover", &[&r], Some((true, format!("off-seam deviation {}", r.measured["max_deviation_off_seam"]))));
}

#[test]
fn c03_reproducing_identity() {
    let r = audit_roundtrip(System::SmoothParseval, grid(64), SEED, 10).unwrap();
    check(3, "reproducing identity", &[&r], Some((true, format!("rel err {}, energy dev {}", r.measured["relative_error"], r.measured["energy_deviation"]))));
}

#[test]
fn c04_frame_operator_oracle() {
    let a = audit_frame_operator(System::SmoothParseval, 16, 1).unwrap();
    let b = audit_frame_operator(System::ConeProjected, 16, 1).unwrap();
    check(4, "frame-operator oracle", &[&a, &b], None);
}

#[test]
fn c05_sharp_stretch_bound() {
    let r = audit_lemma71(6).unwrap();
    let detail = format!(
        "min ratio {} at j={} l={}",
        r.measured["min_ratio"], r.measured["argmin_j"], r.measured["argmin_l"]
    );
    check(5, "sharp stretch bound", &[&r], Some((true, detail)));
}

#[test]
fn c06_overlap_bound() {
    let r = audit_overlap(grid(1024), 5).unwrap();
    check(6, "overlap bound", &[&r], Some((true, format!("max count {}", r.measured["max_count"]))));
}

#[test]
fn c07_almost_orthogonality() {
    let g = grid(256);
    let orth = audit_almost_orthogonality(g, System::ConeProjected, &[1, 2, 3, 4], &[3.0, 5.0], 64).unwrap();
    let decay = audit_shearlet_wavelet_decay(g, System::ConeProjected, &[1, 2, 3], 3.0).unwrap();
    check(7, "almost-orthogonality envelopes", &[&orth, &decay], Some((true, format!("height slope {}", decay.measured["height_slope"]))));
}

#[test]
fn c08_s_star_equivalence() {
    let space = SpaceParams::new(0.3, 2.0, 2.0, Family::AbShear).unwrap();
    let star = SStarParams { r: 1.0, decay: 4.0 };
    let r = audit_s_star(&[64, 128], System::SmoothParseval, space, star, 0.9, SEED, 20).unwrap();
    check(8, "s* equivalence", &[&r], Some((true, format!("max ratio {}", r.measured["max_ratio"]))));
}

#[test]
fn c09_operator_boundedness() {
    let params = [
        SpaceParams::new(0.3, 2.0, 2.0, Family::AbShear).unwrap(),
        SpaceParams::new(0.1, 1.5, 4.0, Family::AbShear).unwrap(),
    ];
    let r = audit_operator_bounds(64, System::SmoothParseval, &params, SEED, 10).unwrap();
    check(9, "operator boundedness", &[&r], None);
}

#[test]
fn c10_fading_rates() {
    let g = grid(256);
    let ab = FadingParams { direction: Direction::AbToDyadic, alpha1: 0.0, alpha2: 1.0, p1: 2.0, p2: 2.0, q1: 2.0, q2: 2.0 };
    let dy = FadingParams { direction: Direction::DyadicToAb, alpha1: 2.0, alpha2: 0.0, p1: 2.0, p2: 2.0, q1: 2.0, q2: 2.0 };
    let a = audit_fading(g, System::ConeProjected, ab, (1, 4)).unwrap();
    let b = audit_fading(g, System::ConeProjected, dy, (1, 4)).unwrap();
    let detail = format!(
        "ab->dyadic slope {} (expected {}), dyadic->ab slope {} (expected {})",
        a.measured["slope"], a.measured["expected_slope"], b.measured["slope"], b.measured["expected_slope"]
    );
    check(10, "fading rates", &[&a, &b], Some((true, detail)));
}

#[test]
fn c11_covariance() {
    let a = audit_covariance(System::SmoothParseval, grid(64), SEED).unwrap();
    let b = audit_covariance(System::ConeProjected, grid(64), SEED).unwrap();
    check(11, "covariance exactness", &[&a, &b], None);
}

#[test]
fn c12_maximal_function_chain() {
    let peetre = audit_peetre(32, System::SmoothParseval, &[1.0, 2.0], SEED, 3).unwrap();
    let fs = audit_fefferman_stein(32, &[1.5, 2.0, 4.0], SEED, 3).unwrap();
    check(12, "maximal-function chain", &[&peetre, &fs], None);
}

#[test]
fn embeddings_within_hypotheses() {
    let g = grid(128);
    let d2a = EmbedParams { direction: Direction::DyadicToAb, alpha1: 3.5, alpha2: 0.0, p: 2.0, q: 2.0, lambda: 2.5 };
    let a2d = EmbedParams { direction: Direction::AbToDyadic, alpha1: 0.5, alpha2: 0.5, p: 2.0, q: 2.0, lambda: 0.0 };
    let a = audit_embeddings(g, System::ConeProjected, d2a, SEED, 4).unwrap();
    let b = audit_embeddings(g, System::ConeProjected, a2d, SEED, 4).unwrap();
    println!(
        "embeddings: dyadic->ab slope {} pass {}, ab->dyadic slope {} pass {}",
        a.measured["growth_slope"], a.pass, b.measured["growth_slope"], b.pass
    );
    for r in [&a, &b] {
        for c in r.failed_cases() {
            println!("embeddings: failed {c:?}");
        }
    }
    assert!(a.pass && b.pass);
}
