use std::collections::BTreeMap;

use verigen::grammar::{Grammar, Symbol};
use verigen::TaskRng;

/// Generates the language up to length `max_len` bottom-up: for each
/// nonterminal, yields of trees of height at most `h`, with tree counts
/// saturated at 2. Counts only grow with `h` and are bounded, so iterating
/// until nothing changes gives the exact saturated counts.
pub fn language(g: &Grammar, max_len: usize) -> BTreeMap<Vec<String>, u8> {
    let k = g.num_nonterminals();
    let mut lang: Vec<BTreeMap<Vec<String>, u8>> = vec![BTreeMap::new(); k];
    loop {
        let mut next: Vec<BTreeMap<Vec<String>, u8>> = vec![BTreeMap::new(); k];
        for p in g.productions() {
            let mut partial: BTreeMap<Vec<String>, u8> = BTreeMap::from([(vec![], 1)]);
            for sym in &p.rhs {
                let mut grown = BTreeMap::new();
                for (prefix, c) in &partial {
                    let options: Vec<(Vec<String>, u8)> = match sym {
                        Symbol::Terminal(t) => vec![(vec![t.clone()], 1)],
                        Symbol::Nonterminal(m) => lang[*m].iter().map(|(y, c)| (y.clone(), *c)).collect(),
                    };
                    for (y, c2) in options {
                        if prefix.len() + y.len() > max_len {
                            continue;
                        }
                        let mut s = prefix.clone();
                        s.extend(y);
                        let e = grown.entry(s).or_insert(0u8);
                        *e = (*e + (c * c2).min(2)).min(2);
                    }
                }
                partial = grown;
            }
            for (y, c) in partial {
                let e = next[p.lhs].entry(y).or_insert(0);
                *e = (*e + c).min(2);
            }
        }
        if next == lang {
            return lang.swap_remove(g.start());
        }
        lang = next;
    }
}

pub fn random_grammar(rng: &mut TaskRng) -> Grammar {
    let names = ["S", "A", "B"];
    let mut lines = Vec::new();
    for name in names {
        for _ in 0..rng.range_usize(1, 3) {
            let len = rng.range_usize(1, 3);
            let rhs: Vec<String> = (0..len)
                .map(|_| match rng.below(3) {
                    0 => "'a'".to_string(),
                    1 => "'b'".to_string(),
                    _ => rng.choose(&names).to_string(),
                })
                .collect();
            lines.push(format!("{name} -> {}", rhs.join(" ")));
        }
    }
    lines.sort();
    lines.dedup();
    let s_first: Vec<String> = lines.iter().filter(|l| l.starts_with('S')).chain(lines.iter().filter(|l| !l.starts_with('S'))).cloned().collect();
    Grammar::from_text(&s_first.join("\n")).unwrap()
}

pub fn strings_up_to(n: usize) -> Vec<Vec<&'static str>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|s| ["a", "b"].map(|c| s.iter().copied().chain([c]).collect::<Vec<_>>()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
