"""Writes the block-glyph letter bitmaps under data/letters (P2, dark on white)."""

from pathlib import Path

GLYPHS = {
    "A": [".###.", "#...#", "#####", "#...#", "#...#"],
    "C": [".####", "#....", "#....", "#....", ".####"],
    "M": ["#...#", "##.##", "#.#.#", "#...#", "#...#"],
    "U": ["#...#", "#...#", "#...#", "#...#", ".###."],
}
CELL = 10
SIZE = 64


def render(letters, size=SIZE, cell=CELL):
    width = size * len(letters)
    pixels = [[255] * width for _ in range(size)]
    glyph_px = 5 * cell
    margin = (size - glyph_px) // 2
    for k, letter in enumerate(letters):
        for gr, line in enumerate(GLYPHS[letter]):
            for gc, ch in enumerate(line):
                if ch != "#":
                    continue
                for r in range(cell):
                    for c in range(cell):
                        pixels[margin + gr * cell + r][k * size + margin + gc * cell + c] = 0
    return width, pixels


def write_p2(path, width, pixels):
    rows = [" ".join(str(p) for p in row) for row in pixels]
    path.write_text(f"P2\n# block glyph\n{width} {len(pixels)}\n255\n" + "\n".join(rows) + "\n")


def main():
    out = Path(__file__).resolve().parent.parent / "data" / "letters"
    out.mkdir(parents=True, exist_ok=True)
    for letter in GLYPHS:
        write_p2(out / f"{letter}.pgm", *render(letter))
    write_p2(out / "CMU.pgm", *render("CMU"))


if __name__ == "__main__":
    main()
