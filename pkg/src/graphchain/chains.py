"""API chains: ordered sequences of API calls with argument bindings.

Text form is one step per line: ``<api-id> [<arg>=<value|$k>]...`` where
``$k`` references the output of step ``k`` (0-based, earlier steps only).
Inside exemplar logs steps are joined by ``;`` instead of newlines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_REF_RE = re.compile(r"^\$(\d+)$")
_API_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")


class ChainError(ValueError):
    """A chain or chain document violates a structural rule."""


def ref_index(value: str) -> int | None:
    """Step index of a ``$k`` reference value, or None for a literal."""
    m = _REF_RE.match(value)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class ApiCall:
    api: str
    args: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not _API_ID_RE.match(self.api):
            raise ChainError(f"bad api id {self.api!r}")
        names = [k for k, _ in self.args]
        if len(set(names)) != len(names):
            raise ChainError(f"duplicate argument name in call to {self.api}")

    def arg(self, name: str) -> str | None:
        for k, v in self.args:
            if k == name:
                return v
        return None


@dataclass(frozen=True)
class ApiChain:
    """Directed sequence of API calls; ``partial`` marks an in-progress
    prefix that is still being extended."""

    steps: tuple[ApiCall, ...] = ()
    partial: bool = False

    def __post_init__(self):
        if not self.partial and not self.steps:
            raise ChainError("a full chain must have at least one step")
        for i, step in enumerate(self.steps):
            for name, value in step.args:
                k = ref_index(value)
                if k is not None and k >= i:
                    raise ChainError(
                        f"step {i} argument {name}={value} references step {k}, "
                        "which is not an earlier step"
                    )

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def api_ids(self) -> tuple[str, ...]:
        return tuple(s.api for s in self.steps)

    def append(self, call: ApiCall) -> "ApiChain":
        return ApiChain(self.steps + (call,), partial=self.partial)

    def finalized(self) -> "ApiChain":
        return ApiChain(self.steps, partial=False)


def chain_of(*api_ids: str, partial: bool = False) -> ApiChain:
    """Bare chain from api ids only, no argument bindings."""
    return ApiChain(tuple(ApiCall(a) for a in api_ids), partial=partial)


def parse_step(text: str) -> ApiCall:
    tokens = text.split()
    if not tokens:
        raise ChainError("empty step")
    args = []
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ChainError(f"malformed argument {tok!r} (expected name=value)")
        name, value = tok.split("=", 1)
        if not name or not value:
            raise ChainError(f"malformed argument {tok!r}")
        args.append((name, value))
    return ApiCall(tokens[0], tuple(args))


def parse_chain(text: str, partial: bool = False) -> ApiChain:
    """Parse a chain document (one step per line, ``#`` comments allowed)."""
    steps = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        steps.append(parse_step(line))
    return ApiChain(tuple(steps), partial=partial)


def parse_joined_chain(text: str, sep: str = ";") -> ApiChain:
    """Parse a one-line chain with steps joined by ``sep``."""
    steps = [parse_step(part) for part in text.split(sep) if part.strip()]
    return ApiChain(tuple(steps))


def serialize_step(call: ApiCall) -> str:
    parts = [call.api]
    parts.extend(f"{k}={v}" for k, v in call.args)
    return " ".join(parts)


def serialize_chain(chain: ApiChain) -> str:
    return "\n".join(serialize_step(s) for s in chain.steps) + "\n"


def join_chain(chain: ApiChain, sep: str = ";") -> str:
    return sep.join(serialize_step(s) for s in chain.steps)
