from __future__ import annotations

import argparse
import random
from pathlib import Path

DEFAULT_OUTPUT = Path("data/diversified_corpus")

STEMS = (
    "alpha", "beta", "cache", "delta", "entry", "field", "grid", "hash", "index", "joint",
    "key", "limit", "mark", "node", "offset", "page", "query", "row", "slot", "token",
    "unit", "value", "width", "xray", "yield_", "zone",
)
CLASS_STEMS = ("Counter", "Summer", "Greeter", "Holder", "Scaler", "Walker", "Keeper", "Mixer")
WORDS = ("hello", "world", "ready", "done", "open", "closed", "empty", "full")

TEMPLATES = (
    """class {cls} {{
    int {a} = {n1};
    void increment() {{
        {a} = {a} + {n2};
    }}
    int get() {{
        return {a};
    }}
}}
""",
    """public class {cls} {{
    int sum(int {a}) {{
        int {b} = 0;
        for (int {c} = 0; {c} < {a}; {c}++) {{
            {b} = {b} + {c};
        }}
        return {b};
    }}
}}
""",
    """public class {cls} {{
    String {a} = "{word}";
    String greet(String {b}) {{
        String {c} = {a} + " " + {b};
        return {c};
    }}
}}
""",
    """class {cls} {{
    ArrayList<String> {a} = new ArrayList<String>();
    void add(String {b}) {{
        {a}.add({b});
    }}
    int size() {{
        return {a}.size();
    }}
}}
""",
    """class {cls} {{
    double {a} = {f1};
    double scale(double {b}) {{
        double {c} = {a} * {b};
        return {c};
    }}
    boolean positive() {{
        return {a} > 0;
    }}
}}
""",
)


def make_identifier(rng: random.Random, used: set[str]) -> str:
    while True:
        name = rng.choice(STEMS) + rng.choice(STEMS).capitalize() + str(rng.randint(0, 99))
        if name not in used:
            used.add(name)
            return name


def render_file(rng: random.Random, template: str, cls: str, used: set[str]) -> str:
    return template.format(
        cls=cls,
        a=make_identifier(rng, used),
        b=make_identifier(rng, used),
        c=make_identifier(rng, used),
        n1=rng.randint(0, 9),
        n2=rng.randint(1, 9),
        f1=f"{rng.randint(1, 9)}.{rng.randint(0, 9)}",
        word=rng.choice(WORDS),
    )


def generate_corpus(output: Path, files: int = 50, projects: int = 5, seed: int = 7) -> list[Path]:
    """Write ``files`` Java sources spread over ``projects`` directories.

    Every file gets fresh variable names, so raw-token vocabularies keep
    growing while the structure stays shared.
    """

    rng = random.Random(seed)
    used: set[str] = set()
    written: list[Path] = []
    for idx in range(files):
        project = output / f"project{idx % projects}"
        project.mkdir(parents=True, exist_ok=True)
        cls = f"{rng.choice(CLASS_STEMS)}{idx}"
        template = TEMPLATES[idx % len(TEMPLATES)]
        path = project / f"{cls}.java"
        path.write_text(render_file(rng, template, cls, used), encoding="utf-8")
        written.append(path)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Generate a corpus with diversified identifiers")
    parser.add_argument("--output", type=Path, default=DEFAULT_OUTPUT, help="Target directory")
    parser.add_argument("--files", type=int, default=50)
    parser.add_argument("--projects", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    written = generate_corpus(args.output, args.files, args.projects, args.seed)
    print(f"Generated {len(written)} files under {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
