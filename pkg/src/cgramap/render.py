"""Plain-text tables: schedules, the folded KMS and the mapped kernel."""

from __future__ import annotations

from .mapping import Mapping
from .schedule import Kms, MobilitySchedule


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]

    def line(cells: list[str]) -> str:
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([line(header), rule, *(line(r) for r in rows)])


def _nodes(ns: list[int]) -> str:
    return " ".join(str(n) for n in sorted(ns))


def schedule_table(ms: MobilitySchedule) -> str:
    asap_rows = [[n for n, t in ms.asap.items() if t == step] for step in range(ms.length)]
    alap_rows = [[n for n, t in ms.alap.items() if t == step] for step in range(ms.length)]
    ms_rows = ms.rows()
    rows = [
        [str(t), _nodes(asap_rows[t]), _nodes(alap_rows[t]), _nodes(ms_rows[t])]
        for t in range(ms.length)
    ]
    return _table(["Time", "ASAP", "ALAP", "MS"], rows)


def kms_table(kms: Kms) -> str:
    rows = [
        [str(slot), " ".join(f"{n}^{it}" for n, it in cells)]
        for slot, cells in enumerate(kms.rows())
    ]
    title = f"KMS  II={kms.ii}  iterations={kms.folds}  (node^iteration)"
    return title + "\n" + _table(["Slot", "Nodes"], rows)


def kernel_table(mapping: Mapping, num_pes: int) -> str:
    rows = []
    for slot, cells in enumerate(mapping.kernel_rows(num_pes)):
        rows.append([str(slot)] + [f"{c[0]}^{c[1]}" if c else "-" for c in cells])
    title = f"Kernel  II={mapping.ii}  (node^iteration per PE)"
    return title + "\n" + _table(["Cycle"] + [f"PE{p}" for p in range(num_pes)], rows)

