"""Collects one PASS/FAIL line per acceptance criterion for the summary."""

LINES = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] AC{criterion:02d} {detail}"
    LINES.append(line)
    print(line)


def sort_key(line: str) -> str:
    return line.split("] ", 1)[1]
