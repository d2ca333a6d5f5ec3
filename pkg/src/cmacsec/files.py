"""Readers and writers for channel specs, auxiliary laws and region files."""

from __future__ import annotations

import datetime as _dt
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .info import ConditionalPmf, DmChannel, InnerAuxLaw, Pmf
from .region import RegionCloud

CSV_HEADER = "R0,R1,R2"
SIG_DIGITS = 9


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def channel_from_dict(d):
    try:
        sizes = tuple(int(d[k]) for k in ("x1_size", "x2_size", "y1_size", "y2_size"))
        table = d["p_y1y2_given_x1x2"]
    except KeyError as exc:
        raise ValidationError(f"channel spec is missing {exc.args[0]!r}") from None
    try:
        arr = np.array(table, dtype=float)
    except ValueError:
        raise ValidationError("p_y1y2_given_x1x2 is not a rectangular numeric array") from None
    if arr.shape != sizes:
        raise ValidationError(f"p_y1y2_given_x1x2 has shape {arr.shape}, declared sizes are {sizes}")
    return DmChannel(arr)


def channel_to_dict(ch: DmChannel):
    return {"x1_size": ch.x1_size, "x2_size": ch.x2_size, "y1_size": ch.y1_size,
            "y2_size": ch.y2_size, "p_y1y2_given_x1x2": ch.law.tolist()}


def load_channel(path) -> DmChannel:
    return channel_from_dict(_read_json(path))


def law_from_dict(d) -> InnerAuxLaw:
    try:
        return InnerAuxLaw(Pmf(d["p_u"]), ConditionalPmf(d["p_v1_given_u"]),
                           ConditionalPmf(d["p_x1_given_v1"]), ConditionalPmf(d["p_x2_given_u"]))
    except KeyError as exc:
        raise ValidationError(f"law file is missing {exc.args[0]!r}") from None


def law_to_dict(law: InnerAuxLaw):
    return {"p_u": law.p_u.probs.tolist(), "p_v1_given_u": law.p_v1_given_u.rows.tolist(),
            "p_x1_given_v1": law.p_x1_given_v1.rows.tolist(),
            "p_x2_given_u": law.p_x2_given_u.rows.tolist()}


def load_law(path) -> InnerAuxLaw:
    return law_from_dict(_read_json(path))


def load_json(path):
    return _read_json(path)


def _fmt(x):
    return f"{x:.{SIG_DIGITS}g}"


def _timestamp():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def region_header(cloud: RegionCloud, timestamp=True):
    meta = cloud.meta
    lines = [
        f"# tool: cmacsec {__version__}",
        f"# provenance: {meta.get('provenance', '')}",
        f"# kind: {'closure' if cloud.closed else 'raw'}",
    ]
    if "label" in meta:
        lines.append(f"# label: {meta['label']}")
    config = {k: v for k, v in meta.items() if k not in ("provenance", "label")}
    lines.append(f"# config: {json.dumps(config, sort_keys=True)}")
    seed = meta.get("sweep", {}).get("seed") if isinstance(meta.get("sweep"), dict) else None
    lines.append(f"# seed: {'none' if seed is None else seed}")
    if timestamp:
        lines.append(f"# generated: {_timestamp()}")
    return lines


def write_region_csv(path, cloud: RegionCloud, timestamp=True):
    lines = region_header(cloud, timestamp)
    lines.append(CSV_HEADER)
    lines.extend(",".join(_fmt(v) for v in p) for p in cloud.points)
    Path(path).write_text("\n".join(lines) + "\n")


def write_region_json(path, cloud: RegionCloud, timestamp=True):
    doc = {"tool": f"cmacsec {__version__}", "closed": cloud.closed, "meta": cloud.meta,
           "points": cloud.points.tolist()}
    if timestamp:
        doc["generated"] = _timestamp()
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def read_region_csv(path) -> RegionCloud:
    header = {}
    rows = []
    seen_header = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if not seen_header:
                if line.startswith("#"):
                    key, _, value = line[1:].partition(":")
                    header[key.strip()] = value.strip()
                    continue
                if line != CSV_HEADER:
                    raise ValidationError(f"{path}:{lineno}: expected header {CSV_HEADER!r}, got {line!r}")
                seen_header = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 columns")
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric value") from None
    if not seen_header:
        raise ValidationError(f"{path}: no {CSV_HEADER!r} header row")
    meta = {}
    if "config" in header:
        try:
            meta.update(json.loads(header["config"]))
        except json.JSONDecodeError:
            raise ValidationError(f"{path}: unreadable config header") from None
    for key in ("provenance", "label"):
        if key in header:
            meta[key] = header[key]
    points = np.array(rows, dtype=float).reshape(-1, 3)
    return RegionCloud(points, meta, closed=header.get("kind") == "closure")


def read_region_json(path) -> RegionCloud:
    doc = _read_json(path)
    try:
        return RegionCloud(np.array(doc["points"], dtype=float).reshape(-1, 3), doc.get("meta", {}),
                           closed=bool(doc.get("closed", False)))
    except KeyError:
        raise ValidationError(f"{path}: region JSON needs 'points'") from None


def read_region(path) -> RegionCloud:
    if str(path).endswith(".json"):
        return read_region_json(path)
    return read_region_csv(path)
