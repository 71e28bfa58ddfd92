"""Random search: i.i.d. uniform draws in the warped space.

Each numeric and bool coordinate is uniform on [0, 1] before unwarping,
and categoricals are uniform over their values, so the baseline already
benefits from log/logit/bilog range information.  Observations are
recorded but never used.
"""

from __future__ import annotations

from .base import Optimizer


class RandomSearchOptimizer(Optimizer):
    supports_warm_start = False

    def _suggest(self, n):
        return self._random_suggestions(n)
