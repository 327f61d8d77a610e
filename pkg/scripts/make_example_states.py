"""Write the four worked 2x2x2 example states to data/.

    python3 scripts/make_example_states.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from jacsdp.cli_io import emit_state_text


def states() -> dict[str, np.ndarray]:
    s3 = np.sqrt(3)
    a = np.zeros((2, 2, 2), complex)
    a[0, 0, 0] = 0.5
    a[1, 1, 0] = a[1, 0, 1] = a[0, 1, 1] = s3 / 6
    a[0, 0, 1] = 0.5 + 0.5j

    b = np.zeros((2, 2, 2), complex)
    b[0, 0, 0] = 1 / 6
    b[1, 1, 1] = 2j / 3
    b[1, 0, 1] = np.sqrt(1 / 3) + 1j / 3
    b[1, 0, 0] = s3 / 6

    i1, i2, i3 = np.meshgrid(*[np.arange(1, 3)] * 3, indexing="ij")
    c = (np.cos(i1 - i2 + i3) + 1j * np.sin(i1 + i2 - i3)) / np.sqrt(8)
    d = (np.cos(i1 + i2 + i3) + 1j * np.sin(i1 + i2 + i3)) / np.sqrt(8)
    return {"ex41": a, "ex42": b, "ex43": c, "ex44": d}


def main(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, amp in states().items():
        # floating-point norms can miss 1 by an ulp, so the reader rescales
        text = emit_state_text(amp, normalize=True)
        (outdir / f"{name}.txt").write_text(text)
        print(f"wrote {outdir / f'{name}.txt'} (norm {np.linalg.norm(amp):.17g})")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data")
