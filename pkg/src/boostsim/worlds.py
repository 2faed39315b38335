"""Synthetic task universes.

A universe fixes the prompt set, the response space, which responses are
correct for which prompt, and a difficulty rank over prompts. The rank is
a seeded total order with no further structure; it exists so adversarial
labelers have a stable notion of "easiest prompts".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rng import derive_seed, substream


class UniverseError(ValueError):
    """Invalid universe construction or an id unknown to the universe."""


@dataclass(frozen=True)
class TaskUniverse:
    """Ground truth for a simulation: prompts, responses, correctness, difficulty."""

    prompts: tuple[int, ...]
    responses: tuple[int, ...]
    correct: dict[int, frozenset[int]]
    difficulty: dict[int, int]
    _incorrect: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)
    _response_set: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        prompt_set = set(self.prompts)
        response_set = set(self.responses)
        if len(prompt_set) != len(self.prompts):
            raise UniverseError("duplicate prompt ids")
        if len(response_set) != len(self.responses):
            raise UniverseError("duplicate response ids")
        if set(self.correct) != prompt_set:
            raise UniverseError("correct map must cover exactly the prompt set")
        for x, good in self.correct.items():
            if not good:
                raise UniverseError(f"prompt {x} has no correct response")
            if not good <= response_set:
                raise UniverseError(f"prompt {x} has correct responses outside the universe")
        if set(self.difficulty) != prompt_set:
            raise UniverseError("difficulty map must cover exactly the prompt set")
        if sorted(self.difficulty.values()) != list(range(len(self.prompts))):
            raise UniverseError("difficulty ranks must be a permutation of 0..n-1")
        incorrect = {
            x: tuple(y for y in sorted(self.responses) if y not in self.correct[x])
            for x in self.prompts
        }
        object.__setattr__(self, "_incorrect", incorrect)
        object.__setattr__(self, "_response_set", frozenset(response_set))

    def quality(self, x: int, y: int) -> int:
        """1 iff y is a correct response to x; unknown ids are an error."""
        if x not in self.correct:
            raise UniverseError(f"unknown prompt id {x}")
        if y not in self._response_set:
            raise UniverseError(f"unknown response id {y}")
        return 1 if y in self.correct[x] else 0

    def correct_responses(self, x: int) -> frozenset[int]:
        try:
            return self.correct[x]
        except KeyError:
            raise UniverseError(f"unknown prompt id {x}") from None

    def canonical_correct(self, x: int) -> int:
        """Lowest-id correct response, the deterministic label choice."""
        return min(self.correct_responses(x))

    def incorrect_responses(self, x: int) -> tuple[int, ...]:
        if x not in self.correct:
            raise UniverseError(f"unknown prompt id {x}")
        return self._incorrect[x]

    def by_difficulty(self, prompts) -> list[int]:
        """Given prompts sorted easiest first (ties impossible: ranks are total)."""
        return sorted(prompts, key=lambda x: self.difficulty[x])


def quality(universe: TaskUniverse, x: int, y: int) -> int:
    return universe.quality(x, y)


def make_universe(
    n_prompts: int,
    n_responses: int,
    seed: int,
    correct_per_prompt: int = 1,
) -> TaskUniverse:
    """Deterministically build a universe from its arguments.

    Prompts are ids ``0..n_prompts-1`` and responses ``0..n_responses-1``.
    Each prompt gets ``correct_per_prompt`` distinct correct responses and
    difficulty ranks are a seeded permutation of the prompts.
    """
    if n_prompts < 1:
        raise UniverseError("n_prompts must be positive")
    if n_responses < 1:
        raise UniverseError("n_responses must be positive")
    if correct_per_prompt < 1:
        raise UniverseError("correct_per_prompt must be positive")
    if correct_per_prompt > n_responses:
        raise UniverseError("correct_per_prompt cannot exceed n_responses")
    rng = substream(derive_seed(seed, "universe"), n_prompts, n_responses, correct_per_prompt)
    correct = {
        x: frozenset(int(y) for y in rng.choice(n_responses, size=correct_per_prompt, replace=False))
        for x in range(n_prompts)
    }
    ranks = rng.permutation(n_prompts)
    difficulty = {x: int(ranks[x]) for x in range(n_prompts)}
    return TaskUniverse(
        prompts=tuple(range(n_prompts)),
        responses=tuple(range(n_responses)),
        correct=correct,
        difficulty=difficulty,
    )


def serialize_universe(universe: TaskUniverse) -> str:
    """Structured-text form: sizes, then one `prompt rank correct-ids` line each."""
    lines = [
        "universe 1",
        f"prompts {len(universe.prompts)}",
        f"responses {len(universe.responses)}",
    ]
    for x in universe.prompts:
        good = ",".join(str(y) for y in sorted(universe.correct[x]))
        lines.append(f"{x}\t{universe.difficulty[x]}\t{good}")
    return "\n".join(lines) + "\n"


def parse_universe(text: str) -> TaskUniverse:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "universe 1":
        raise UniverseError("not a universe serialization")
    n_prompts = int(lines[1].split()[1])
    n_responses = int(lines[2].split()[1])
    correct: dict[int, frozenset[int]] = {}
    difficulty: dict[int, int] = {}
    for ln in lines[3:]:
        xs, rank, good = ln.split("\t")
        x = int(xs)
        difficulty[x] = int(rank)
        correct[x] = frozenset(int(y) for y in good.split(","))
    return TaskUniverse(
        prompts=tuple(range(n_prompts)),
        responses=tuple(range(n_responses)),
        correct=correct,
        difficulty=difficulty,
    )
