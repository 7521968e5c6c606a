//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::*;
use schreier_core::corpus::*;
use schreier_core::cover::*;
use schreier_core::factorize::*;
use schreier_core::isoauto::*;
use schreier_core::lengthiso::*;
use schreier_core::perms::*;
use schreier_core::schreier::*;
use schreier_core::{Alphabet, Word};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn petersen_suite() -> Outcome {
    let p = petersen_schreier();
    let g = &p.graph;
    let a = g.alphabet().unwrap();
    ensure!(g.regular_degree() == Some(3), "not 3-regular");
    ensure!(is_transitive(g) == Verdict::True, "not transitive");
    let (v1, w1) = (p.vertex("v1").unwrap(), p.vertex("w1").unwrap());
    ensure!(
        matches!(rooted_x_iso(g, v1, g, w1).unwrap(), XIsoVerdict::NotIso),
        "X-isomorphism between v1 and w1"
    );
    let h = a.parse_word("x a x^-2 a").unwrap();
    ensure!(g.follow(v1, &h).unwrap() == Some(v1), "x a x^-2 a not closed at v1");
    ensure!(g.follow(w1, &h).unwrap() != Some(w1), "x a x^-2 a closed at w1");
    let beta = petersen_beta(&p).ok_or("β is not an automorphism")?;
    let shifted = g.clone().with_root(w1);
    let alpha = schreier_core::lengthiso::alpha_from_beta(&beta, g, &shifted, &[h]).map_err(|e| e.to_string())?;
    let want = a.parse_word("x^-1 a x^-2 a").unwrap();
    ensure!(alpha[0].1 == want, "α(x a x^-2 a) = {}", a.format_word(&alpha[0].1));
    Ok("3-regular, transitive, v1/w1 not X-isomorphic, α(xax⁻²a) = x⁻¹ax⁻²a".into())
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let families = alphabets_by_degree();
    let (mut pairs, mut yes, mut xyes) = (0, 0, 0);
    while pairs < 120 {
        let (_, alphas) = families.choose(&mut rng).unwrap();
        let a1 = alphas.choose(&mut rng).unwrap();
        let g1 = finite_schreier(&mut rng, a1, 10);
        let g2 = match rng.gen_range(0..3) {
            0 => rerooted(&g1, rng.gen_range(0..g1.num_vertices())),
            1 => {
                let a2 = alphas.choose(&mut rng).unwrap();
                finite_schreier(&mut rng, a2, 10)
            }
            _ => match g1.strip_labels().ok().and_then(|p| schreierize(&p).ok()) {
                Some(s) if s.alphabet().unwrap().degree() == a1.degree() => normalize(&s),
                _ => continue,
            },
        };
        if g1.num_vertices() > 40 || g2.num_vertices() > 40 {
            continue;
        }
        pairs += 1;
        let (r1, r2) = (g1.root().unwrap(), g2.root().unwrap());
        let truth = rooted_iso(&g1, r1, &g2, r2);
        let hgens = reconstruct_subgroup(&g1).unwrap();
        let a2 = g2.alphabet().unwrap();
        let pipeline_ok = match &truth {
            IsoVerdict::Yes(beta) => {
                yes += 1;
                let alpha = alpha_from_beta(beta, &g1, &g2, &hgens).map_err(|e| e.to_string())?;
                for (h, img) in &alpha {
                    ensure!(h.len() == img.len() && g2.follow(r2, img).unwrap() == Some(r2), "α(h) malformed");
                }
                pipeline(&g1, &g2, &alpha, 3).is_ok()
            }
            IsoVerdict::No => letter_bijections(a1, a2).iter().any(|t| {
                let alpha: Vec<(Word, Word)> = hgens.iter().map(|h| (h.clone(), apply_letters(a1, t, h))).collect();
                pipeline(&g1, &g2, &alpha, 3).is_ok()
            }),
            IsoVerdict::Unknown { .. } => return Err("finite graphs gave an unknown verdict".into()),
        };
        ensure!(
            pipeline_ok == matches!(truth, IsoVerdict::Yes(_)),
            "pair {pairs}: rooted_iso {:?} but pipeline {}",
            truth.verdict(),
            pipeline_ok
        );
        if a1 == a2 {
            let same = g1.canonical_table(r1).unwrap() == g2.canonical_table(r2).unwrap();
            let x = matches!(rooted_x_iso(&g1, r1, &g2, r2).unwrap(), XIsoVerdict::Iso(_));
            ensure!(same == x, "pair {pairs}: tables equal {same}, X-iso {x}");
            xyes += x as usize;
        }
    }
    ensure!(yes > 10 && yes < pairs, "degenerate sample: {yes} isomorphic of {pairs}");
    Ok(format!("{pairs} pairs, {yes} isomorphic, {xyes} X-isomorphic, all agree"))
}

/// Independent check of one γ on its materialized ball.
fn certify(gamma: &PartialLengthBijection) -> Result<usize, String> {
    let (a1, a2) = gamma.alphabets();
    let r = gamma.radius();
    let ball2: HashSet<Word> = a2.ball(r).into_iter().collect();
    let mut images = HashSet::new();
    let mut identities = 0;
    for (w, g) in gamma.pairs() {
        ensure!(g.len() == w.len() && a2.is_reduced(g), "length of {}", a1.format_word(w));
        ensure!(ball2.contains(g) && images.insert(g.clone()), "not injective at {}", a1.format_word(w));
        for k in 0..w.len() {
            let p = gamma.get(&w.prefix(k)).unwrap();
            ensure!(p.letters() == &g.letters()[..k], "prefix of {}", a1.format_word(w));
        }
        ensure!(gamma.get_inverse(g) == Some(w), "inverse at {}", a2.format_word(g));
        let in1 = gamma.in_h1(w).unwrap();
        ensure!(in1 == gamma.in_h2(g).unwrap(), "H membership differs at {}", a1.format_word(w));
        if in1 {
            for k in 0..=w.len() {
                let f = w.prefix(k);
                let gg = a1.invert(&Word(w.letters()[k..].to_vec()));
                let rhs = a2.multiply(gamma.get(&f).unwrap(), &a2.invert(gamma.get(&gg).unwrap())).unwrap();
                ensure!(&rhs == g, "γ(fg⁻¹) identity fails for {} at {k}", a1.format_word(w));
                identities += 1;
            }
        }
    }
    ensure!(images.len() == ball2.len(), "not onto the target ball");
    for g in &ball2 {
        let w = gamma.get_inverse(g).unwrap();
        if gamma.in_h2(g).unwrap() {
            for k in 0..=g.len() {
                let f = g.prefix(k);
                let gg = a2.invert(&Word(g.letters()[k..].to_vec()));
                let rhs = a1.multiply(gamma.get_inverse(&f).unwrap(), &a1.invert(gamma.get_inverse(&gg).unwrap())).unwrap();
                ensure!(&rhs == w, "γ⁻¹ identity fails for {} at {k}", a2.format_word(g));
                identities += 1;
            }
        }
    }
    let report = lemma_properties_check(gamma, 0, 0);
    ensure!(report.is_ok() && !report.sampled, "library check disagrees: {:?}", report.violations.first());
    Ok(identities)
}

fn gamma_certification() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let rank2 = [Alphabet::parse_spec("x:inf,y:inf").unwrap(), Alphabet::parse_spec("x:inf,a:2").unwrap()];
    let (mut built, mut identities) = (0, 0);
    let p = petersen_schreier();
    let beta = petersen_beta(&p).unwrap();
    let shifted = p.graph.clone().with_root(5);
    let hgens = reconstruct_subgroup(&p.graph).unwrap();
    let alpha = alpha_from_beta(&beta, &p.graph, &shifted, &hgens).unwrap();
    let gamma = gamma_extend(&alpha, p.graph.alphabet().unwrap(), shifted.alphabet().unwrap(), 5).unwrap();
    identities += certify(&gamma)?;
    built += 1;
    while built < 40 {
        let a = rank2.choose(&mut rng).unwrap();
        let g1 = finite_schreier(&mut rng, a, 8);
        let v = rng.gen_range(0..g1.num_vertices());
        let g2 = g1.clone().with_root(v);
        let hgens = reconstruct_subgroup(&g1).unwrap();
        let alpha: Vec<(Word, Word)> = match rooted_iso(&g1, 0, &g2, v) {
            IsoVerdict::Yes(beta) => alpha_from_beta(&beta, &g1, &g2, &hgens).unwrap(),
            _ => {
                let t = letter_bijections(a, a).choose(&mut rng).unwrap().clone();
                hgens.iter().map(|h| (h.clone(), apply_letters(a, &t, h))).collect()
            }
        };
        let r = rng.gen_range(1..=5);
        let gamma = gamma_extend(&alpha, a, a, r).map_err(|e| e.to_string())?;
        identities += certify(&gamma)?;
        built += 1;
    }
    Ok(format!("{built} bijections, {identities} identities, no violations"))
}

fn an_suite() -> Outcome {
    let (act, g) = an_hn(7).map_err(|e| e.to_string())?;
    ensure!(act.group_order().unwrap() == 2520, "|⟨a7,b7⟩| ≠ 2520");
    let c = check_identity("b a^-2 b^-1 a^2", &act).unwrap();
    ensure!(c == Permutation::parse_cycles("(4,3,6)", 7).unwrap(), "commutator is {c}");
    let (act5, _) = an_hn(5).unwrap();
    ensure!(act5.perms[1].pow(2) == act5.perms[0], "b5² ≠ a5");
    let circ = circulant(7, &[1, 2]).to_graph();
    ensure!(matches!(rooted_iso(&g, g.root().unwrap(), &circ, 0), IsoVerdict::Yes(_)), "not ≅ C7(1,2)");
    ensure!(is_transitive(&g) == Verdict::True, "7-point graph not transitive");
    let (_, g6) = an_hn_even(6).unwrap();
    ensure!(is_transitive(&g6) == Verdict::True, "n=6 graph not transitive");
    Ok("order 2520, (4,3,6), b5² = a5, C7(1,2), both transitive".into())
}

fn covering_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let alphas = [
        Alphabet::parse_spec("x:inf,a:2").unwrap(),
        Alphabet::parse_spec("x:inf,y:inf").unwrap(),
        Alphabet::parse_spec("a:2,b:2,c:2").unwrap(),
    ];
    let mut chains = 0;
    while chains < 25 {
        let a = alphas.choose(&mut rng).unwrap();
        let base = finite_schreier(&mut rng, a, 6);
        let k = rng.gen_range(2..=6);
        let Some(cover) = random_cover(&mut rng, &base, k) else { continue };
        let cover = normalize(&cover);
        // H₁ ≤ H₂: every generator of H₁ is closed at the root of Γ₂
        for h in reconstruct_subgroup(&cover).unwrap() {
            ensure!(base.follow(0, &h).unwrap() == Some(0), "chain is not nested");
        }
        let index = cover.num_vertices() / base.num_vertices();
        ensure!(index == k, "index {index} ≠ {k}");
        let phi = x_cover_find(&cover, &base).map_err(|e| e.to_string())?.ok_or("no covering found")?;
        ensure!(phi.degree == index, "degree {} ≠ index {index}", phi.degree);
        ensure!(phi.fibers(base.num_vertices()).iter().all(|f| f.len() == index), "unequal fibers");
        chains += 1;
    }
    let mut pairs = 0;
    for w in [8, 16, 32] {
        for pair in [fig3_pair(w), fig4_pair(w), fig5_pair(w)] {
            let pair = pair.map_err(|e| e.to_string())?;
            let cert = qi_certificate(&pair.cover.graph, &pair.base.graph, &pair.phi).ok_or("disconnected fiber")?;
            let d1 = all_pairs(&pair.cover.graph);
            let d2 = all_pairs(&pair.base.graph);
            for v in 0..d1.len() {
                for u in 0..d1.len() {
                    let (x, y) = (d1[v][u], d2[pair.phi.vertex_map[v]][pair.phi.vertex_map[u]]);
                    let interior = [(&pair.cover.graph, v), (&pair.cover.graph, u)]
                        .iter()
                        .all(|(g, t)| g.boundary_distance(*t).is_none_or(|b| b >= x))
                        && [pair.phi.vertex_map[v], pair.phi.vertex_map[u]]
                            .iter()
                            .all(|&t| pair.base.graph.boundary_distance(t).is_none_or(|b| b >= x));
                    if interior {
                        ensure!(y <= x && x <= y + cert.b, "W={w}: d₂={y}, d₁={x}, B={}", cert.b);
                        pairs += 1;
                    }
                }
            }
            ensure!(cert.holds(), "library certificate reports violations at W={w}");
        }
    }
    Ok(format!("{chains} chains with degree = index, {pairs} interior pairs satisfy d₂ ≤ d₁ ≤ d₂+B"))
}

fn ends_suite() -> Outcome {
    let win = |f: fn(usize) -> Result<CoverPair, CorpusError>, cover: bool| {
        move |w: usize| {
            let p = f(w).unwrap();
            let g = if cover { p.cover.graph } else { p.base.graph };
            let r = g.root().unwrap();
            (g, r)
        }
    };
    let radii = [2, 3, 4];
    let got = [
        ends_estimate(win(fig3_pair, true), &radii, 0).ends,
        ends_estimate(win(fig3_pair, false), &radii, 0).ends,
        ends_estimate(win(fig4_pair, true), &radii, 0).ends,
        ends_estimate(win(fig4_pair, false), &radii, 0).ends,
        ends_estimate(
            |w| {
                let l = line_window(w).unwrap();
                let r = l.graph.root().unwrap();
                (l.graph, r)
            },
            &radii,
            0,
        )
        .ends,
    ];
    ensure!(got == [Some(4), Some(2), Some(2), Some(1), Some(2)], "ends {:?}", got);
    Ok("fig-3 4 vs 2, fig-4 2 vs 1, line 2".into())
}

fn schreierize_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let check = |p: &schreier_core::PlainGraph| -> Result<(), String> {
        let g = schreierize(p).map_err(|e| e.to_string())?;
        ensure!(g.check_wellformed().is_ok(), "not well formed");
        ensure!(g.is_complete().unwrap() && g.is_deterministic().unwrap(), "not a Schreier graph");
        let back = g.strip_labels().map_err(|_| "degenerate loops".to_string())?;
        ensure!(back.edge_multiset() == p.edge_multiset(), "stripping labels changed the graph");
        Ok(())
    };
    let mut n_graphs = 0;
    for _ in 0..60 {
        let n = rng.gen_range(1..=50);
        let p = random_regular_multigraph(&mut rng, n, 4);
        check(&p)?;
        n_graphs += 1;
    }
    let pet = petersen_plain();
    check(&pet)?;
    ensure!(perfect_matching_exhaustive(&pet).is_some(), "oracle: Petersen has no perfect matching");
    let bad = cubic_without_perfect_matching();
    ensure!(bad.vertices <= 20 && perfect_matching_exhaustive(&bad).is_none(), "oracle disagrees");
    ensure!(matches!(schreierize(&bad), Err(FactorError::NotSchreier)), "no-1-factor graph was labeled");
    Ok(format!("{n_graphs} random 4-regular graphs and Petersen labeled; bridged cubic graph rejected"))
}

fn orbit_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let groups = [
        FiniteGroup::symmetric(3),
        FiniteGroup::symmetric(4),
        FiniteGroup::alternating(4),
        FiniteGroup::dihedral(5),
        FiniteGroup::dihedral(6),
        FiniteGroup::alternating(5),
        FiniteGroup::cyclic(12),
    ];
    let mut triples = 0;
    for a in &groups {
        let subs = a.subgroups();
        for _ in 0..3 {
            let k = subs.choose(&mut rng).unwrap();
            let x = loop {
                let x: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..a.order().max(2))).collect();
                if a.generates(&x) {
                    break x;
                }
            };
            let g = from_cosets(a, k, &x).map_err(|e| e.to_string())?;
            let blocks = x_orbits(&g).map_err(|e| e.to_string())?;
            // normalizer by conjugation, independent of the library
            let ks: BTreeSet<usize> = k.iter().copied().collect();
            let n = (0..a.order())
                .filter(|&y| k.iter().map(|&h| a.mul(a.mul(a.inv(y), h), y)).collect::<BTreeSet<_>>() == ks)
                .count();
            ensure!(blocks.len() == a.order() / n, "|A|={}, |K|={}: {} blocks, want {}", a.order(), k.len(), blocks.len(), a.order() / n);
            ensure!(blocks.iter().all(|b| b.len() == n / k.len()), "block size ≠ [N:K]");
            let op = orbit_partition(&g);
            for b in &blocks {
                ensure!(op.blocks.iter().any(|ob| b.iter().all(|v| ob.contains(v))), "orbit partition splits an X-orbit");
            }
            triples += 1;
        }
    }
    Ok(format!("{triples} triples: [A:N] blocks of size [N:K]"))
}

fn closure_size(a: &FiniteGroup, gens: &[usize]) -> usize {
    let mut seen = vec![false; a.order()];
    let mut stack = vec![a.identity()];
    seen[a.identity()] = true;
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = a.index_of(&a.element(x).then(a.element(g))).unwrap();
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().filter(|&&s| s).count()
}

fn generating_systems_suite() -> Outcome {
    for a in [FiniteGroup::symmetric(3), FiniteGroup::alternating(4)] {
        let x = full_generating_system(&a).map_err(|e| e.to_string())?;
        let inv = (1..a.order()).filter(|&g| a.element(g).is_involution()).count();
        ensure!(x.len() == inv + (a.order() - 1 - inv) / 2, "|X| ≠ d(A)");
        for h in a.subgroups() {
            let g = coset_graph(&a, &h, &x).map_err(|e| e.to_string())?;
            ensure!(is_transitive(&g) == Verdict::True, "|A|={} H of size {} not transitive", a.order(), h.len());
        }
    }
    let mut rng = StdRng::seed_from_u64(9);
    let groups = [FiniteGroup::symmetric(3), FiniteGroup::symmetric(4), FiniteGroup::cyclic(6), FiniteGroup::alternating(5), FiniteGroup::dihedral(6)];
    let mut trials = 0;
    while trials < 15 {
        let a = groups.choose(&mut rng).unwrap();
        let subs: Vec<Vec<usize>> = a.subgroups().into_iter().filter(|h| h.len() < a.order()).collect();
        let h = subs.choose(&mut rng).unwrap();
        let x: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..a.order())).collect();
        if closure_size(a, &x) != a.order() {
            continue;
        }
        let y = avoid_subgroup_gens(a, &x, h).map_err(|e| e.to_string())?;
        ensure!(y.len() == x.len(), "|Y| ≠ |X|");
        ensure!(y.iter().all(|g| !h.contains(g)), "Y meets H");
        ensure!(closure_size(a, &y) == a.order(), "Y does not generate");
        trials += 1;
    }
    for p in [2, 3, 5, 7] {
        let scan = strong_simple_scan(&FiniteGroup::cyclic(p), 2).map_err(|e| e.to_string())?;
        ensure!(scan.strongly_simple(), "ℤ/{p} not strongly simple");
    }
    let s3 = FiniteGroup::symmetric(3);
    let scan = strong_simple_scan(&s3, 3).map_err(|e| e.to_string())?;
    ensure!(
        scan.entries.iter().any(|e| !e.normal && e.transitive.is_some()),
        "no transitive witness for a non-normal subgroup of S3"
    );
    Ok(format!("d(A) systems transitive, {trials} avoidance rewrites, ℤ/p strongly simple, S3 witness found"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Petersen suite", petersen_suite),
        ("round trip between rooted isomorphisms and length-isomorphisms", round_trip),
        ("γ certification", gamma_certification),
        ("A_n suite", an_suite),
        ("covering suite", covering_suite),
        ("ends suite", ends_suite),
        ("schreierize suite", schreierize_suite),
        ("orbit-count suite", orbit_suite),
        ("generating systems suite", generating_systems_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
