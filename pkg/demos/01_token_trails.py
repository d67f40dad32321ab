"""A first look at length-token trails.

One reference is augmented three ways -- hansel (token trail in the output),
gretel (target length in the prompt), vanilla (no length information) -- and
the hansel stream is checked by the protocol validator.
"""

from hansel import (
    Example,
    HanselConfig,
    augment_gretel,
    augment_hansel,
    augment_vanilla,
    strip_tokens,
    validate,
)

REFERENCE = (
    "Famous American foods created across United States. "
    "Connecticut diner claims creation of the hamburger. "
    "Onion rings were courtesy of cook at Pig Stand in Texas."
)

example = Example(
    id="demo-1",
    source="(the full news article would go here)",
    reference=REFERENCE,
    task="summarization",
)

cfg = HanselConfig(delta=10, residual_max=2, seed=0)

print("reference (25 words):")
print(" ", REFERENCE, "\n")

for residual in (0, 2):
    rec = augment_hansel(example, cfg, residual)
    print(f"hansel output, residual {residual}:")
    print(" ", rec.output)
    verdict = validate(rec.output, cfg)
    print(f"  validator: ok={verdict.ok}")
    print(f"  strip round-trip exact: {strip_tokens(rec.output, cfg.rendering) == REFERENCE}")
    print(f"  mask anchor at char {rec.mask_directive.anchor}\n")

gretel = augment_gretel(example, cfg)
print("gretel prompt:", gretel.prompt)
print("gretel output == reference:", gretel.output == REFERENCE, "\n")

vanilla = augment_vanilla(example, cfg)
print("vanilla prompt:", vanilla.prompt)
print("vanilla output == reference:", vanilla.output == REFERENCE)
