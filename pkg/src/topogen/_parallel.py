import os


def worker_count() -> int:
    """Worker cap from ``TOPOGEN_THREADS``: unset means 1, ``0`` means one per CPU."""
    raw = os.environ.get("TOPOGEN_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TOPOGEN_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("TOPOGEN_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)
