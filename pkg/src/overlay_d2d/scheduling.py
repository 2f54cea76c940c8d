"""Subchannel assignment for D2D transmitters.

Arrays in this module index TXs as ``realization.d2d_txs`` followed by the
typical TX in the last slot.  Subchannels are numbered ``1..N``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError
from .geometry import NetworkRealization


class Mode(str, enum.Enum):
    UNCOORDINATED = "uncoordinated"
    COORDINATED = "coordinated"

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, Mode):
            return value
        key = str(value).strip().lower()
        aliases = {"uncoord": cls.UNCOORDINATED, "coord": cls.COORDINATED}
        try:
            return aliases.get(key) or cls(key)
        except ValueError:
            raise ParameterError(f"unknown scheduling mode {value!r}") from None


@dataclass(frozen=True)
class ScheduleConfig:
    """``typical_cell`` picks the cell the typical link is scheduled in: that
    of its TX (``"tx"``, like every other TX) or that of the AP nearest its
    RX (``"rx"``), which forces TX and RX into the same cell."""

    n_subchannels: int
    mode: Mode = Mode.UNCOORDINATED
    typical_cell: str = "tx"

    def __post_init__(self):
        if int(self.n_subchannels) != self.n_subchannels or self.n_subchannels < 1:
            raise ParameterError(f"n_subchannels must be an integer >= 1, got {self.n_subchannels}")
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.typical_cell not in ("tx", "rx"):
            raise ParameterError(f"typical_cell must be 'tx' or 'rx', got {self.typical_cell!r}")


@dataclass(frozen=True)
class SubchannelAssignment:
    sc_of_tx: np.ndarray
    group_of_tx: np.ndarray | None = None
    cell_of_group: np.ndarray | None = None

    @property
    def typical_sc(self) -> int:
        return int(self.sc_of_tx[-1])

    @property
    def groups(self) -> dict[int, list[np.ndarray]]:
        """Per-cell list of TX-index groups (coordinated mode only)."""
        if self.group_of_tx is None:
            return {}
        out: dict[int, list[np.ndarray]] = {}
        order = np.argsort(self.group_of_tx, kind="stable")
        bounds = np.flatnonzero(np.diff(self.group_of_tx[order])) + 1
        for members in np.split(order, bounds):
            if len(members):
                g = self.group_of_tx[members[0]]
                out.setdefault(int(self.cell_of_group[g]), []).append(members)
        return out


def schedule_uncoordinated(realization: NetworkRealization, config: ScheduleConfig, rng: np.random.Generator):
    """Every TX, the typical one included, picks a subchannel uniformly."""
    m = len(realization.d2d_txs) + 1
    return SubchannelAssignment(rng.integers(1, config.n_subchannels + 1, size=m))


def schedule_coordinated(realization: NetworkRealization, config: ScheduleConfig, rng: np.random.Generator):
    """Per-cell grouping: TXs of a cell are shuffled and cut into blocks of N.

    Each block draws distinct subchannels uniformly without replacement; the
    short trailing block of a cell draws from all N subchannels as well.
    Cells are processed independently.  With N = 1 this is the uncoordinated
    scheme.
    """
    n = config.n_subchannels
    if n == 1:
        return schedule_uncoordinated(realization, config, rng)
    m = len(realization.d2d_txs) + 1
    cells = np.empty(m, dtype=np.intp)
    cells[:-1] = realization.cell_of_tx
    cells[-1] = realization.cell_of_typical_tx if config.typical_cell == "tx" else realization.cell_of_typical_rx
    # cell index plus a uniform key in [0, 1): sorting shuffles within each cell
    order = np.argsort(cells + rng.random(m))
    sorted_cells = cells[order]
    new_run = np.ones(m, dtype=bool)
    new_run[1:] = sorted_cells[1:] != sorted_cells[:-1]
    # rank of each TX inside its cell after the shuffle
    idx = np.arange(m)
    rank = idx - np.maximum.accumulate(np.where(new_run, idx, 0))
    pos = rank % n
    gid = np.cumsum(pos == 0) - 1
    n_groups = int(gid[-1]) + 1
    perms = np.argsort(rng.random((n_groups, n)), axis=1) + 1
    sc = np.empty(m, dtype=np.int64)
    sc[order] = perms[gid, pos]
    group_of_tx = np.empty(m, dtype=np.int64)
    group_of_tx[order] = gid
    cell_of_group = sorted_cells[pos == 0]
    return SubchannelAssignment(sc, group_of_tx, cell_of_group)


def schedule(realization: NetworkRealization, config: ScheduleConfig, rng: np.random.Generator):
    if config.mode is Mode.COORDINATED:
        return schedule_coordinated(realization, config, rng)
    return schedule_uncoordinated(realization, config, rng)


class Interferers:
    """Co-channel interferers of the typical link.

    ``intracell`` flags interferers in the cell of the typical RX; it is
    computed on first access.
    """

    def __init__(self, realization: NetworkRealization, tx_indices: np.ndarray):
        self.realization = realization
        self.tx_indices = tx_indices
        self.positions = realization.d2d_txs[tx_indices]

    def __len__(self):
        return len(self.tx_indices)

    @cached_property
    def intracell(self) -> np.ndarray:
        r = self.realization
        return r.in_cell(self.tx_indices, r.cell_of_typical_rx)

    @property
    def intracell_count(self) -> int:
        return int(np.count_nonzero(self.intracell))

    @property
    def intercell_count(self) -> int:
        return len(self) - self.intracell_count


def cochannel_interferers(realization: NetworkRealization, assignment: SubchannelAssignment) -> Interferers:
    """Non-typical TXs on the typical TX's subchannel."""
    sc = assignment.sc_of_tx
    if len(sc) != len(realization.d2d_txs) + 1:
        raise ParameterError("assignment does not cover every TX of the realization")
    return Interferers(realization, np.flatnonzero(sc[:-1] == sc[-1]))
