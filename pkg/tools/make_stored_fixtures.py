"""Regenerate the stored fixture files shipped in src/tensiform/data/."""

from pathlib import Path

from tensiform import fixtures, fileio

DATA = Path(__file__).resolve().parent.parent / "src" / "tensiform" / "data"


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    for name, build in (("net220", fixtures.make_net220),
                        ("tanzbrunnen", fixtures.make_tanzbrunnen)):
        model = build()
        fileio.save_model(model, DATA / f"{name}.json")
        print(f"{name}: {len(model.nodes)} nodes, {len(model.members)} members, "
              f"{len(model.elements)} elements")


if __name__ == "__main__":
    main()
