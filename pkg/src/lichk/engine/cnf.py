"""CNF container with DIMACS import/export."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO


class DimacsError(ValueError):
    pass


@dataclass
class CnfFormula:
    num_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, clause: Iterable[int]) -> None:
        """Add a clause; duplicate literals are merged and tautologies dropped."""
        seen: list[int] = []
        for x in clause:
            if x == 0 or abs(x) > self.num_vars:
                raise ValueError(f"literal {x} out of range 1..{self.num_vars}")
            if -x in seen:
                return
            if x not in seen:
                seen.append(x)
        self.clauses.append(seen)

    def check(self) -> None:
        for c in self.clauses:
            s = set(c)
            for x in c:
                if x == 0 or abs(x) > self.num_vars:
                    raise ValueError(f"literal {x} out of range")
                if -x in s:
                    raise ValueError(f"clause {c} contains {x} and {-x}")

    @property
    def num_literals(self) -> int:
        return sum(len(c) for c in self.clauses)

    def satisfied_by(self, model: Sequence[bool]) -> bool:
        """``model[v]`` is the value of variable ``v`` (index 0 unused)."""
        return all(any(model[x] if x > 0 else not model[-x] for x in c) for c in self.clauses)

    def to_dimacs(self, comments: Sequence[str] = ()) -> str:
        lines = [f"c {c}" for c in comments]
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"

    def write(self, fh: TextIO, comments: Sequence[str] = ()) -> None:
        fh.write(self.to_dimacs(comments))

    @classmethod
    def from_dimacs(cls, text: str) -> "CnfFormula":
        header = None
        clauses: list[list[int]] = []
        cur: list[int] = []
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("c") or ln.startswith("%"):
                continue
            if ln.startswith("p"):
                parts = ln.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise DimacsError(f"bad problem line: {ln!r}")
                header = (int(parts[2]), int(parts[3]))
                continue
            if header is None:
                raise DimacsError("clause before 'p cnf' header")
            for tok in ln.split():
                x = int(tok)
                if x == 0:
                    clauses.append(cur)
                    cur = []
                else:
                    if abs(x) > header[0]:
                        raise DimacsError(f"literal {x} exceeds declared {header[0]} variables")
                    cur.append(x)
        if header is None:
            raise DimacsError("missing 'p cnf' header")
        if cur:
            clauses.append(cur)
        if len(clauses) != header[1]:
            raise DimacsError(f"header declares {header[1]} clauses, found {len(clauses)}")
        return cls(header[0], clauses)
