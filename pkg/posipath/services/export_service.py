"""
Artifact emitters: path JSON, trajectory CSV, eigenvalue trail SVG, μ-sweep CSV.

Every file is written to a temp file in the target directory and moved
into place with os.replace, so readers never see a partial artifact.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from posipath.core.errors import _make_json_safe
from posipath.core.logger import log_event
from posipath.core.paths import get_output_dir
from posipath.models.domain import PositivePath, Trajectory
from posipath.models.schemas import PathModel, dump_model

TRAJECTORY_HEADER = ["t", "group", "lambda_re", "lambda_im", "kind", "splitting", "stratum"]
SWEEP_HEADER = ["mu", "stable", "strongly_stable", "min_abs_det_plus"]


def resolve_output(file_path: str, output_dir: Optional[str] = None) -> Path:
    """Relative names land in the output directory; absolute ones are kept."""
    p = Path(file_path)
    if p.is_absolute() or p.parent != Path("."):
        return p
    return get_output_dir(output_dir) / p


def write_atomic(text: str, file_path: str | Path) -> str:
    target = Path(file_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    log_event("EXPORT", f"wrote {target}")
    return str(target)


def dumps_json(obj: Any) -> str:
    return json.dumps(_make_json_safe(obj), sort_keys=True, allow_nan=False) + "\n"


def path_to_dict(path: PositivePath) -> Dict[str, Any]:
    return dump_model(PathModel.from_path(path))


def write_path_json(path: PositivePath, file_path: str | Path) -> str:
    return write_atomic(dumps_json(path_to_dict(path)), file_path)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_rows(traj: Trajectory) -> List[List[Any]]:
    """One row per tracked eigenvalue per sample."""
    rows = []
    for k, t in enumerate(traj.times):
        label = traj.labels[k] if k < len(traj.labels) else None
        stratum = label.region.value if label is not None else ""
        for g, z in enumerate(traj.values[k]):
            kind = traj.kinds[k][g] if k < len(traj.kinds) else ""
            split = traj.splittings[k][g] if k < len(traj.splittings) else None
            rows.append([_fmt(t), g, _fmt(z.real), _fmt(z.imag), kind,
                         "n/a" if split is None else int(split), stratum])
    return rows


def write_trajectory_csv(traj: Trajectory, file_path: str | Path) -> str:
    return write_atomic(_csv_text(TRAJECTORY_HEADER, trajectory_rows(traj)), file_path)


def write_sweep_csv(rows: Sequence[Dict[str, Any]], file_path: str | Path) -> str:
    body = ([_fmt(r["mu"]), str(bool(r["stable"])).lower(), str(bool(r["strongly_stable"])).lower(),
             _fmt(r["min_abs_det_plus"])] for r in rows)
    return write_atomic(_csv_text(SWEEP_HEADER, body), file_path)


def render_trajectory_svg(traj: Trajectory, title: Optional[str] = None) -> str:
    """Static SVG of the eigenvalue trails over the unit circle and the real axis."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "posipath", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            phi = np.linspace(0.0, 2.0 * np.pi, 361)
            ax.plot(np.cos(phi), np.sin(phi), color="0.6", linewidth=0.8)
            ax.axhline(0.0, color="0.6", linewidth=0.8)
            T = float(traj.times[-1]) if len(traj.times) else 1.0
            colors = np.asarray(traj.times) / (T if T > 0 else 1.0)
            for g in range(traj.values.shape[1]):
                z = traj.values[:, g]
                ax.scatter(z.real, z.imag, c=colors, cmap="viridis", s=4, vmin=0.0, vmax=1.0)
            ax.set_aspect("equal")
            ax.set_xlabel("Re λ")
            ax.set_ylabel("Im λ")
            if title:
                ax.set_title(title)
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue()


def write_trajectory_svg(traj: Trajectory, file_path: str | Path, title: Optional[str] = None) -> str:
    return write_atomic(render_trajectory_svg(traj, title), file_path)


def write_report_jsonl(rows: Sequence[Dict[str, Any]], file_path: str | Path) -> str:
    return write_atomic("".join(dumps_json(r) for r in rows), file_path)
