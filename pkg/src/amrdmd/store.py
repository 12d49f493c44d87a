"""On-disk snapshot stores, run configuration files, and run manifests.

A store is a directory with a ``manifest.txt`` whose lines read
``index time mesh_file field_file``; mesh and field files use the plain
text formats of the mesh and fem modules. Times are carried as exact
rationals (snapshot index times the output interval) and rendered as
decimals, so manifests never accumulate float drift.
"""

from __future__ import annotations

import dataclasses
import time as _time
import uuid
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fem, mesh as mesh_mod
from .dmd import SnapshotMatrix
from .errors import ConfigError, StoreError
from .fem import FeField
from .seird_sim import AmrPolicy, SeirdParams

TOOL_VERSION = "0.1.0"


def fraction_to_decimal(fr: Fraction) -> str:
    """Exact decimal rendering when the denominator is 2^a 5^b, else the
    shortest float representation."""
    den = fr.denominator
    d2 = d5 = 0
    while den % 2 == 0:
        den //= 2
        d2 += 1
    while den % 5 == 0:
        den //= 5
        d5 += 1
    if den != 1:
        return repr(float(fr))
    shift = max(d2, d5)
    scaled = fr.numerator * 10 ** shift // fr.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(shift + 1, "0")
    if shift == 0:
        return sign + digits
    out = sign + digits[:-shift] + "." + digits[-shift:]
    out = out.rstrip("0").rstrip(".")
    return out if out not in ("", "-") else "0"


@dataclass
class StoreEntry:
    index: int
    time_str: str
    time: float
    mesh_file: str
    field_file: str
    mesh: object
    fields: dict


@dataclass
class Store:
    path: Path
    entries: list

    @property
    def field_names(self):
        return list(self.entries[0].fields) if self.entries else []

    def is_uniform(self) -> bool:
        """All snapshots on one mesh (same mesh file)."""
        return len({e.mesh_file for e in self.entries}) <= 1


def write_store(out_dir, snapshots, force: bool = False) -> Path:
    """Write snapshots [(time_fraction, mesh, {name: values})] as a store.

    Repeated mesh objects are written once and shared through the manifest.
    """
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise FileExistsError(f"output directory {out} is not empty (use --force)")
    out.mkdir(parents=True, exist_ok=True)
    mesh_files = {}
    lines = []
    for idx, (t_frac, msh, fields) in enumerate(snapshots):
        key = id(msh)
        if key not in mesh_files:
            name = f"mesh_{len(mesh_files):04d}.mesh.txt"
            mesh_mod.save_mesh(msh, out / name)
            mesh_files[key] = name
        field_name = f"snap_{idx:04d}.field.txt"
        fe = [FeField(msh, vals, name=name) for name, vals in fields.items()]
        fem.save_fields(fe, out / field_name)
        t_str = t_frac if isinstance(t_frac, str) else fraction_to_decimal(t_frac)
        lines.append(f"{idx} {t_str} {mesh_files[key]} {field_name}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")
    return out


def read_store(store_dir) -> Store:
    root = Path(store_dir)
    manifest = root / "manifest.txt"
    if not manifest.exists():
        raise StoreError(f"no manifest.txt in {root}")
    if (root / ".failed").exists():
        raise StoreError(f"store {root} is marked failed")
    mesh_cache = {}
    entries = []
    for raw in manifest.read_text().splitlines():
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 4:
            raise StoreError(f"malformed manifest line: {raw!r}")
        idx, t_str, mesh_file, field_file = parts
        if mesh_file not in mesh_cache:
            mesh_cache[mesh_file] = mesh_mod.load_mesh(root / mesh_file)
        msh = mesh_cache[mesh_file]
        fields = fem.load_fields(root / field_file, msh)
        entries.append(StoreEntry(index=int(idx), time_str=t_str,
                                  time=float(Fraction(t_str)),
                                  mesh_file=mesh_file, field_file=field_file,
                                  mesh=msh,
                                  fields={k: v.values for k, v in fields.items()}))
    entries.sort(key=lambda e: e.index)
    return Store(path=root, entries=entries)


def store_to_snapshot_matrix(store: Store, field: str,
                             t_start: float | None = None,
                             t_end: float | None = None) -> SnapshotMatrix:
    if not store.is_uniform():
        raise StoreError("store snapshots live on different meshes; project first")
    chosen = [e for e in store.entries
              if (t_start is None or e.time >= t_start - 1e-9)
              and (t_end is None or e.time <= t_end + 1e-9)]
    if len(chosen) < 2:
        raise StoreError("selected window contains fewer than two snapshots")
    for e in chosen:
        if field not in e.fields:
            raise StoreError(f"field {field!r} missing from snapshot {e.index}")
    times = np.array([e.time for e in chosen])
    gaps = np.diff(times)
    if np.max(np.abs(gaps - gaps[0])) > 1e-9:
        raise StoreError("snapshots are not uniformly sampled in the window")
    data = np.column_stack([e.fields[field] for e in chosen])
    return SnapshotMatrix(data=data, t0=float(times[0]), dt_o=float(gaps[0]),
                          field_name=field, mesh=chosen[0].mesh)


# ---------------------------------------------------------------------------
# run configuration: "key = value" lines, '#' comments, unknown keys error

_PARAM_FIELDS = {f.name: f for f in dataclasses.fields(SeirdParams)}
_POLICY_FIELDS = {f.name: f for f in dataclasses.fields(AmrPolicy)}
_INT_KEYS = {"remesh_every", "max_level", "initial_uniform_levels", "n_elems"}


def parse_run_config(path) -> tuple[SeirdParams, AmrPolicy, int]:
    params_kwargs = {}
    policy_kwargs = {}
    n_elems = 125
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"expected 'key = value' on line {line_no}: {raw!r}",
                              line_no=line_no)
        key, _, value = text.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "n_elems":
                n_elems = int(value)
            elif key in _PARAM_FIELDS:
                params_kwargs[key] = float(value)
            elif key in _POLICY_FIELDS:
                policy_kwargs[key] = (int(value) if key in _INT_KEYS
                                      else float(value))
            else:
                raise ConfigError(f"unknown key {key!r} on line {line_no}",
                                  line_no=line_no)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r} on line {line_no}: {exc}",
                              line_no=line_no) from exc
    if not params_kwargs and not policy_kwargs:
        raise ConfigError("configuration file is empty", line_no=1)
    try:
        params = SeirdParams(**params_kwargs)
        policy = AmrPolicy(**policy_kwargs)
    except Exception as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return params, policy, n_elems


# ---------------------------------------------------------------------------
# run manifests (not part of the reproducibility contract: they carry
# wall-clock timings; stores, models, and CSVs stay byte-identical)

def write_run_manifest(out_dir, command: str, seed, config_snapshot: str,
                       outputs: list, timings: dict) -> Path:
    out = Path(out_dir)
    for rel in outputs:
        if not (out / rel).exists():
            raise StoreError(f"manifest references missing file {rel}")
    lines = [
        f"run_id = {uuid.uuid4().hex}",
        f"tool_version = {TOOL_VERSION}",
        f"command = {command}",
        f"seed = {seed}",
        f"created_unix = {_time.time():.3f}",
        f"config = {config_snapshot}",
    ]
    for stage, secs in timings.items():
        lines.append(f"time_{stage}_s = {secs:.3f}")
    for rel in outputs:
        lines.append(f"output = {rel}")
    path = out / "run_manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def mark_failed(out_dir) -> None:
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / ".failed").touch()
    except OSError:
        pass
