"""Deterministic CSV output: 17 significant digits, LF endings, fixed column order."""

import logging
import sys

from typing import Dict
from typing import Optional
from typing import Sequence

import numpy as np
import pandas as pd

from ..config.constants import CSV_FLOAT_FORMAT
from ..models import DecoherenceSeries


logger = logging.getLogger(__name__)

_PANDAS_FLOAT_FORMAT = "%" + CSV_FLOAT_FORMAT[2:-1]

SERIES_COLUMNS = ("t", "re_r", "im_r", "abs_r")
SPLIT_COLUMNS = ("t", "abs_phonon", "re_spin", "im_spin", "abs_spin")


def render_csv(columns: Dict[str, Sequence], order: Sequence[str]) -> str:
    frame = pd.DataFrame({name: columns[name] for name in order})
    return frame.to_csv(index=False, float_format=_PANDAS_FLOAT_FORMAT, lineterminator="\n")


def write_text(text: str, out: Optional[str]) -> None:
    """Writes ``text`` to ``out`` or to stdout when no path is given."""
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    logger.info(f"Saída gravada em {out}")


def series_csv(series: DecoherenceSeries) -> str:
    values = series.values
    return render_csv(
        {
            "t": series.times,
            "re_r": values.real,
            "im_r": values.imag,
            "abs_r": np.abs(values),
        },
        SERIES_COLUMNS,
    )


def split_csv(phonon: DecoherenceSeries, spin: DecoherenceSeries) -> str:
    return render_csv(
        {
            "t": phonon.times,
            "abs_phonon": np.abs(phonon.values),
            "re_spin": spin.values.real,
            "im_spin": spin.values.imag,
            "abs_spin": np.abs(spin.values),
        },
        SPLIT_COLUMNS,
    )
