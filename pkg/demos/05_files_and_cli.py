"""File round trips and the command-line front end.

Builds a representation, writes it to the binary map format, reads it
back bit-exactly, then drives the same pipeline through the CLI and
checks the bytes agree.  Run: python3 demos/05_files_and_cli.py
"""

import tempfile
from pathlib import Path

from ellipsoidrep import RepresentationConfig, represent_hierarchical
from ellipsoidrep.cli import main
from ellipsoidrep.dataio import read_efm, write_efm, write_labels, write_xyz
from ellipsoidrep.synthetic import height_bands, shell

pts = shell(400, seed=11, radii=(1.0, 0.5, 0.3))
cfg = RepresentationConfig(levels=2, partitions=8, resolution=12, seed=3)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    rep = represent_hierarchical(pts, cfg)
    first = tmp / "direct.efm"
    write_efm(rep, first)
    decoded = read_efm(first)
    second = tmp / "rewritten.efm"
    write_efm(decoded, second)
    print(f"library write : {first.stat().st_size} bytes, "
          f"{len(rep.nodes)} nodes")
    print(f"re-encode identical: {first.read_bytes() == second.read_bytes()}")

    cloud = tmp / "cloud.xyz"
    write_xyz(cloud, pts)
    cli_out = tmp / "cli.efm"
    rc = main(["repr", "--input", str(cloud), "--output", str(cli_out),
               "--partitions", "8", "--resolution", "12", "--seed", "3"])
    print(f"\ncli exit {rc}, bytes match library: "
          f"{cli_out.read_bytes() == first.read_bytes()}")

    write_labels(tmp / "cloud.seg", height_bands(pts, 3))
    (tmp / "manifest.json").write_text(
        '{"categories": {"0": [0, 1, 2]},\n'
        ' "entries": [{"cloud": "cloud.xyz", "labels": "cloud.seg",'
        ' "category": 0}]}\n')
    print("\nmetrics over a one-entry manifest:")
    main(["metrics", "--manifest", str(tmp / "manifest.json"),
          "--levels", "2", "--partitions", "8", "--resolution", "12"])

    print("plotdata head:")
    plot = tmp / "plot.tsv"
    main(["plotdata", "--efm", str(cli_out), "--output", str(plot)])
    for line in plot.read_text().splitlines()[:4]:
        print(f"  {line}")
