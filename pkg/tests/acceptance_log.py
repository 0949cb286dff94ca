"""Shared store for acceptance outcomes, printed at the end of the session."""

RESULTS = {}


def record(number: int, passed: bool, detail: str) -> str:
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    return line
