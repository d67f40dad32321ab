"""The counter automaton as a corpus auditor.

A conforming stream is corrupted in a few representative ways; the validator
reports every violation with its kind and character offset instead of failing
at the first problem.
"""

from hansel import Example, HanselConfig, augment_hansel, validate

cfg = HanselConfig(delta=10, residual_max=0, seed=0)
example = Example(
    id="demo-2",
    source="",
    reference=" ".join(f"word{i}" for i in range(1, 24)) + ".",
    task="dialogue",
)

rec = augment_hansel(example, cfg, 0)
print("conforming stream:")
print(" ", rec.output)
print("  verdict:", validate(rec.output, cfg).to_dict(), "\n")

corruptions = {
    "terminator claims one stride left": rec.output.replace("<|len:w:0|>", "<|len:w:1|>"),
    "countdown token deleted": rec.output.replace("<|len:w:1|>", "", 1),
    "opening claims one word too many": rec.output.replace("<|len:w:2:3|>", "<|len:w:2:4|>", 1),
    "stray token after the end": rec.output + "<|len:w:0|>",
}

for label, stream in corruptions.items():
    verdict = validate(stream, cfg)
    kinds = [(v.kind, v.position) for v in verdict.violations]
    print(f"{label}:")
    print(f"  ok={verdict.ok}  violations={kinds}")
