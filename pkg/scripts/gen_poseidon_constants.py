#!/usr/bin/env python3
"""Regenerate src/sans/primitives/poseidon_constants.py from the Grain LFSR."""

from pathlib import Path

from sans.primitives.grain import FULL_ROUNDS, PARTIAL_ROUNDS, generate

OUT = Path(__file__).resolve().parents[1] / "src" / "sans" / "primitives" / "poseidon_constants.py"


def main() -> None:
    lines = [
        '"""Poseidon round constants and MDS matrices for BN254, widths 2-5.',
        "",
        "Generated by scripts/gen_poseidon_constants.py; do not edit by hand.",
        '"""',
        "",
        f"FULL_ROUNDS = {FULL_ROUNDS}",
        f"PARTIAL_ROUNDS = {PARTIAL_ROUNDS!r}",
        "",
        "ROUND_CONSTANTS = {",
    ]
    mds_lines = ["MDS = {"]
    for t in sorted(PARTIAL_ROUNDS):
        constants, mds = generate(t)
        lines.append(f"    {t}: [")
        lines += [f"        0x{c:064x}," for c in constants]
        lines.append("    ],")
        mds_lines.append(f"    {t}: [")
        for row in mds:
            mds_lines.append("        [")
            mds_lines += [f"            0x{c:064x}," for c in row]
            mds_lines.append("        ],")
        mds_lines.append("    ],")
    lines.append("}")
    mds_lines.append("}")
    OUT.write_text("\n".join(lines + [""] + mds_lines) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
