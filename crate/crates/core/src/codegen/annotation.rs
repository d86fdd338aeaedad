//! The annotated-code model: source lines interleaved with
//! conditional-compilation directives.
//!
//! An annotation is a pair of comment lines, `//#if <condition>` above the
//! region and `//#endif` below it. Regions nest properly; the structured
//! form here ([`Item`]) makes that nesting explicit so simplification and
//! evaluation never have to re-parse directive text.
//!
//! Two rewrites shrink naive annotated code without changing any generated
//! product:
//!
//! * **S1** deletes an annotation whose condition equals an enclosing
//!   annotation's condition (exact equality, not entailment);
//! * **S2** fuses adjacent sibling annotations with identical conditions
//!   when no printable line separates them.
//!
//! Both only remove directive lines, so the annotation count never
//! increases, and both are sound for any evaluator that decides a block
//! purely by its condition.

use crate::minilang::indent;

/// What an annotated region is guarded by.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// Conjunction of feature names, rendered `A && B`.
    Features(Vec<String>),
    /// An artefact group label, e.g. `grp-3`.
    Group(String),
    /// A single rendered artefact id.
    Artefact(String),
}

impl Condition {
    /// Conjunction with sorted, deduplicated feature names.
    pub fn features(names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        Condition::Features(names)
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::Features(names) => write!(f, "{}", names.join(" && ")),
            Condition::Group(name) => write!(f, "{name}"),
            Condition::Artefact(id) => write!(f, "{id}"),
        }
    }
}

/// One element of an annotated file: a finished source line or a guarded
/// region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    /// A source line, indentation already applied.
    Line(String),
    Block(AnnotatedBlock),
}

/// A region guarded by one annotation. `indent` is the depth of the
/// directive lines themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedBlock {
    pub condition: Condition,
    pub indent: usize,
    pub items: Vec<Item>,
}

/// An annotated source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedFile {
    pub path: String,
    pub items: Vec<Item>,
}

impl AnnotatedFile {
    /// All lines, directives included.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        emit(&self.items, &mut out);
        out
    }

    /// The file as text, newline-terminated when non-empty.
    pub fn render(&self) -> String {
        let mut text = self.lines().join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        text
    }

    pub fn line_count(&self) -> usize {
        self.lines().len()
    }

    /// Number of annotations (directive pairs).
    pub fn annotation_count(&self) -> usize {
        fn count(items: &[Item]) -> usize {
            items
                .iter()
                .map(|item| match item {
                    Item::Line(_) => 0,
                    Item::Block(b) => 1 + count(&b.items),
                })
                .sum()
        }
        count(&self.items)
    }

    /// Source lines kept by `selector`: a guarded region survives iff the
    /// selector accepts its condition; directive lines are stripped.
    pub fn evaluate(&self, selector: &impl Fn(&Condition) -> bool) -> Vec<String> {
        fn walk(items: &[Item], selector: &impl Fn(&Condition) -> bool, out: &mut Vec<String>) {
            for item in items {
                match item {
                    Item::Line(line) => out.push(line.clone()),
                    Item::Block(b) => {
                        if selector(&b.condition) {
                            walk(&b.items, selector, out);
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.items, selector, &mut out);
        out
    }
}

fn emit(items: &[Item], out: &mut Vec<String>) {
    for item in items {
        match item {
            Item::Line(line) => out.push(line.clone()),
            Item::Block(b) => {
                out.push(format!("{}//#if {}", indent(b.indent), b.condition));
                emit(&b.items, out);
                out.push(format!("{}//#endif", indent(b.indent)));
            }
        }
    }
}

/// Apply S1 and S2 to a fixed point.
pub fn simplify(file: &AnnotatedFile) -> AnnotatedFile {
    let mut items = file.items.clone();
    loop {
        let (next, s1) = strip_redundant(items, &mut Vec::new());
        let (next, s2) = fuse_adjacent(next);
        items = next;
        if !s1 && !s2 {
            break;
        }
    }
    AnnotatedFile {
        path: file.path.clone(),
        items,
    }
}

/// S1: splice away blocks whose condition equals an enclosing condition.
fn strip_redundant(items: Vec<Item>, enclosing: &mut Vec<Condition>) -> (Vec<Item>, bool) {
    let mut out = Vec::new();
    let mut changed = false;
    for item in items {
        match item {
            Item::Line(line) => out.push(Item::Line(line)),
            Item::Block(b) => {
                if enclosing.contains(&b.condition) {
                    changed = true;
                    let (inner, _) = strip_redundant(b.items, enclosing);
                    out.extend(inner);
                } else {
                    enclosing.push(b.condition.clone());
                    let (inner, inner_changed) = strip_redundant(b.items, enclosing);
                    enclosing.pop();
                    changed |= inner_changed;
                    out.push(Item::Block(AnnotatedBlock { items: inner, ..b }));
                }
            }
        }
    }
    (out, changed)
}

/// S2: fuse directly adjacent sibling blocks with equal conditions.
fn fuse_adjacent(items: Vec<Item>) -> (Vec<Item>, bool) {
    let mut out: Vec<Item> = Vec::new();
    let mut changed = false;
    for item in items {
        let item = match item {
            Item::Block(b) => {
                let (inner, inner_changed) = fuse_adjacent(b.items);
                changed |= inner_changed;
                Item::Block(AnnotatedBlock { items: inner, ..b })
            }
            line => line,
        };
        match (out.last_mut(), item) {
            (Some(Item::Block(prev)), Item::Block(b))
                if prev.condition == b.condition && prev.indent == b.indent =>
            {
                prev.items.extend(b.items);
                changed = true;
            }
            (_, item) => out.push(item),
        }
    }
    (out, changed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(depth: usize, text: &str) -> Item {
        Item::Line(format!("{}{}", indent(depth), text))
    }

    fn block(cond: Condition, depth: usize, items: Vec<Item>) -> Item {
        Item::Block(AnnotatedBlock {
            condition: cond,
            indent: depth,
            items,
        })
    }

    fn feats(names: &[&str]) -> Condition {
        Condition::features(names.iter().copied())
    }

    /// A naive annotation of the greeter family's merged file: every
    /// artefact guarded by its feature conjunction, so everything inside
    /// the Hello-guarded class that is itself Hello-guarded is redundant,
    /// and the two People statements sit in adjacent twin annotations.
    fn naive_greeter() -> AnnotatedFile {
        let h = || feats(&["Hello"]);
        let hw = || feats(&["Hello", "World"]);
        let ha = || feats(&["All", "Hello"]);
        let hap = || feats(&["All", "Hello", "People"]);
        AnnotatedFile {
            path: "Welcome.java".into(),
            items: vec![block(
                h(),
                0,
                vec![
                    line(0, "class Welcome {"),
                    block(hw(), 1, vec![line(1, "String who = \"World\" ;")]),
                    block(
                        h(),
                        1,
                        vec![
                            line(1, "void sayHello ( ) {"),
                            block(
                                h(),
                                2,
                                vec![
                                    block(h(), 2, vec![line(2, "String msg = \"Hello\" ;")]),
                                    block(h(), 2, vec![line(2, "msg += \" \" ;")]),
                                    block(hw(), 2, vec![line(2, "msg += who ;")]),
                                    block(ha(), 2, vec![line(2, "msg += \"All\" ;")]),
                                    block(hap(), 2, vec![line(2, "msg += \" \" ;")]),
                                    block(hap(), 2, vec![line(2, "msg += who ;")]),
                                    block(h(), 2, vec![line(2, "print ( msg ) ;")]),
                                ],
                            ),
                            line(1, "}"),
                        ],
                    ),
                    block(hap(), 1, vec![line(1, "String who = \"People\" ;")]),
                    line(0, "}"),
                ],
            )],
        }
    }

    #[test]
    fn directives_render_and_nest_properly() {
        let file = naive_greeter();
        let lines = file.lines();
        let mut depth = 0usize;
        let mut pairs = 0;
        for l in &lines {
            let t = l.trim_start();
            if t.starts_with("//#if ") {
                depth += 1;
                pairs += 1;
            } else if t == "//#endif" {
                assert!(depth > 0, "negative nesting at {l:?}");
                depth -= 1;
            }
        }
        assert_eq!(depth, 0, "unbalanced directives");
        assert_eq!(pairs, file.annotation_count());
        assert_eq!(lines.len(), 13 + 2 * pairs);
    }

    #[test]
    fn simplification_shrinks_the_naive_greeter_exactly() {
        let naive = naive_greeter();
        assert_eq!(naive.line_count(), 37);
        let simple = simplify(&naive);
        assert_eq!(simple.line_count(), 25);
        // Better than a quarter of the naive file gone.
        assert!(simple.line_count() * 4 <= naive.line_count() * 3);
        let expected = "\
//#if Hello
class Welcome {
    //#if Hello && World
    String who = \"World\" ;
    //#endif
    void sayHello ( ) {
        String msg = \"Hello\" ;
        msg += \" \" ;
        //#if Hello && World
        msg += who ;
        //#endif
        //#if All && Hello
        msg += \"All\" ;
        //#endif
        //#if All && Hello && People
        msg += \" \" ;
        msg += who ;
        //#endif
        print ( msg ) ;
    }
    //#if All && Hello && People
    String who = \"People\" ;
    //#endif
}
//#endif
";
        assert_eq!(simple.render(), expected);
    }

    #[test]
    fn file_without_annotations_is_unchanged() {
        let file = AnnotatedFile {
            path: "X.java".into(),
            items: vec![line(0, "class X {"), line(0, "}")],
        };
        assert_eq!(simplify(&file), file);
    }

    #[test]
    fn simplify_is_idempotent() {
        let once = simplify(&naive_greeter());
        assert_eq!(simplify(&once), once);
    }

    #[test]
    fn s2_only_fuses_directly_adjacent_blocks() {
        let a = || feats(&["A"]);
        let file = AnnotatedFile {
            path: "X.java".into(),
            items: vec![
                block(a(), 0, vec![line(0, "one ;")]),
                block(a(), 0, vec![line(0, "two ;")]),
                line(0, "gap ;"),
                block(a(), 0, vec![line(0, "three ;")]),
            ],
        };
        let simple = simplify(&file);
        assert_eq!(simple.annotation_count(), 2);
        assert_eq!(
            simple.items[0],
            block(a(), 0, vec![line(0, "one ;"), line(0, "two ;")])
        );
    }

    #[test]
    fn evaluation_strips_directives_and_filters_regions() {
        let file = naive_greeter();
        let all = file.evaluate(&|_| true);
        assert_eq!(all.len(), 13);
        assert!(all.iter().all(|l| !l.contains("//#")));
        let none = file.evaluate(&|_| false);
        assert!(none.is_empty());
        let hello_world = file.evaluate(&|c| match c {
            Condition::Features(names) => {
                names.iter().all(|n| n == "Hello" || n == "World")
            }
            _ => false,
        });
        let text = hello_world.join("\n");
        assert!(text.contains("String who = \"World\" ;"));
        assert!(!text.contains("All"));
        assert!(!text.contains("People"));
    }

    fn random_file(rng: &mut ChaCha8Rng) -> AnnotatedFile {
        const FEATURES: [&str; 5] = ["F0", "F1", "F2", "F3", "F4"];
        fn items(rng: &mut ChaCha8Rng, depth: usize, budget: &mut usize) -> Vec<Item> {
            let mut out = Vec::new();
            let n = rng.random_range(1..=4);
            for _ in 0..n {
                if *budget == 0 {
                    break;
                }
                *budget -= 1;
                if depth < 3 && rng.random_bool(0.55) {
                    let size = rng.random_range(1..=3.min(FEATURES.len()));
                    let mut names: Vec<&str> = Vec::new();
                    while names.len() < size {
                        let f = FEATURES[rng.random_range(0..FEATURES.len())];
                        if !names.contains(&f) {
                            names.push(f);
                        }
                    }
                    out.push(Item::Block(AnnotatedBlock {
                        condition: Condition::features(names),
                        indent: depth,
                        items: items(rng, depth + 1, budget),
                    }));
                } else {
                    out.push(Item::Line(format!(
                        "{}stmt{} ;",
                        indent(depth),
                        rng.random_range(0..1000)
                    )));
                }
            }
            out
        }
        let mut budget = 40;
        AnnotatedFile {
            path: "R.java".into(),
            items: items(rng, 0, &mut budget),
        }
    }

    #[test]
    fn simplification_is_sound_for_every_feature_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..60 {
            let naive = random_file(&mut rng);
            let simple = simplify(&naive);
            assert!(simple.annotation_count() <= naive.annotation_count());
            assert!(simple.line_count() <= naive.line_count());
            for mask in 0u32..(1 << 5) {
                let selected: Vec<String> = (0..5)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| format!("F{i}"))
                    .collect();
                let selector = |c: &Condition| match c {
                    Condition::Features(names) => {
                        names.iter().all(|n| selected.contains(n))
                    }
                    _ => false,
                };
                assert_eq!(
                    naive.evaluate(&selector),
                    simple.evaluate(&selector),
                    "round {round}, mask {mask:05b}"
                );
            }
        }
    }
}
