"""Alternative twist evaluator through the ordered Grassmannian tower.

For a form q of dimension n, the tower X_1, ..., X_n alternates
Grassmannians of the prime quadric and of the quadric itself:
X_{2t+1} = G(Q', t) and X_{2t+2} = G(Q, t).  Point existence is downward
closed along the tower, the largest pointed slot is the active index, and
the twist of e^q reads off from that index alone.  Everything is driven by
the point-existence oracle; no motive objects appear.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError
from .forms import Grassmannian, ProjectiveQuadric, QuadraticForm, prime
from .twists import TateTwist


@dataclass(frozen=True)
class ProjectorTower:
    form: QuadraticForm
    entries: tuple[Grassmannian, ...]

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def prime_quadric_dim(self) -> int:
        return self.form.dim - 1


def build_tower(q: QuadraticForm, model=None) -> ProjectorTower:
    """The length-dim(q) tower of Grassmannians for q.

    Declared forms need the model to resolve their prime link.
    """
    if q.is_real:
        q_prime = prime(q)
    elif model is not None:
        q_prime = model.prime_of(q)
    else:
        raise ModelError("a declared form needs the model to resolve its prime")
    quadric = ProjectiveQuadric(q)
    quadric_prime = ProjectiveQuadric(q_prime)
    entries = []
    for i in range(1, q.dim + 1):
        if i % 2 == 1:
            entries.append(Grassmannian(quadric_prime, (i - 1) // 2))
        else:
            entries.append(Grassmannian(quadric, (i - 2) // 2))
    return ProjectorTower(q, tuple(entries))


def active_index(tower: ProjectorTower, extension, model) -> int:
    """Largest tower slot with a rational point over the extension (0 if none).

    A pointed slot above an unpointed one breaks downward closure and means
    the model is invalid; that is a hard error, not a verdict.
    """
    active = 0
    gap = None
    for i, grass in enumerate(tower.entries, start=1):
        if model.has_rational_point(grass.quadric, grass.planes, extension):
            if gap is not None:
                raise ModelError(
                    f"tower of {tower.form.key}: slot {i} pointed above unpointed "
                    f"slot {gap} (downward closure violated)"
                )
            active = i
        elif gap is None:
            gap = i
    return active


def twist_readoff(i: int, n: int, nprime: int) -> TateTwist:
    """Twist of e^q from the active index i, with n = dim(q), nprime = dim(Q')."""
    if not 0 <= i <= n:
        raise ValueError(f"active index {i} outside [0, {n}]")
    if i % 2 == 0:
        return TateTwist(i // 2, i)
    return TateTwist(nprime - (i - 1) // 2, 2 * nprime - i + 2)
