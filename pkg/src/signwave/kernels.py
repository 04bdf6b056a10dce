"""Hot raster kernels: largest 8-connected component and Moore tracing.

Each kernel exists twice.  The ``*_numba`` variants are loop code compiled
with ``numba.njit``; the ``*_numpy`` variants lean on numpy/scipy and plain
Python and are always importable.  ``largest_component`` and
``trace_boundary`` dispatch to the backend chosen in :mod:`signwave._jit`.
"""
import numpy as np
from scipy import ndimage

from ._jit import BACKEND, NUMBA_AVAILABLE, USE_NUMBA, njit

# Moore neighbourhood, clockwise on screen (y grows downwards), starting west.
DY = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.int64)
DX = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)
# DIR_OF[dy + 1, dx + 1] -> index into DY/DX
DIR_OF = np.full((3, 3), -1, dtype=np.int64)
for _k in range(8):
    DIR_OF[DY[_k] + 1, DX[_k] + 1] = _k
del _k

_EIGHT = np.ones((3, 3), dtype=bool)


def _largest_component_loops(mask):
    """Flood-fill every 8-connected component, keep the largest.

    Returns ``(area, sum_x, sum_y, seed_y, seed_x)`` of the component with
    the most pixels; ties go to the component met first in raster order,
    whose seed is therefore its top-most, left-most pixel.  ``area == 0``
    means the mask is empty.
    """
    h, w = mask.shape
    seen = np.zeros((h, w), dtype=np.uint8)
    stack_y = np.empty(h * w, dtype=np.int64)
    stack_x = np.empty(h * w, dtype=np.int64)
    best_area = 0
    best_sx = 0
    best_sy = 0
    best_y = -1
    best_x = -1
    for y0 in range(h):
        for x0 in range(w):
            if mask[y0, x0] == 0 or seen[y0, x0] != 0:
                continue
            seen[y0, x0] = 1
            stack_y[0] = y0
            stack_x[0] = x0
            top = 1
            area = 0
            sx = 0
            sy = 0
            while top > 0:
                top -= 1
                y = stack_y[top]
                x = stack_x[top]
                area += 1
                sx += x
                sy += y
                for dy in range(-1, 2):
                    yy = y + dy
                    if yy < 0 or yy >= h:
                        continue
                    for dx in range(-1, 2):
                        xx = x + dx
                        if xx < 0 or xx >= w:
                            continue
                        if mask[yy, xx] != 0 and seen[yy, xx] == 0:
                            seen[yy, xx] = 1
                            stack_y[top] = yy
                            stack_x[top] = xx
                            top += 1
            if area > best_area:
                best_area = area
                best_sx = sx
                best_sy = sy
                best_y = y0
                best_x = x0
    return best_area, best_sx, best_sy, best_y, best_x


def _trace_loops(mask, sy, sx, cap, dy_tab, dx_tab, dir_of):
    """Moore-neighbour border following from the top-left pixel ``(sy, sx)``.

    Walks clockwise and stops when it stands on the start pixel about to
    repeat its first move, which also closes one-pixel-wide shapes where
    Jacob's entry-direction test never fires.  Returns an
    ``(k, 2)`` int64 array of ``(x, y)`` boundary pixels, at most ``cap``.
    """
    h, w = mask.shape
    out = np.empty((cap, 2), dtype=np.int64)
    out[0, 0] = sx
    out[0, 1] = sy
    count = 1
    py = sy
    px = sx
    # the pixel west of the start is background by construction
    back = 0
    first = -1
    while True:
        found = -1
        for i in range(1, 9):
            d = (back + i) % 8
            ny = py + dy_tab[d]
            nx = px + dx_tab[d]
            if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] != 0:
                found = d
                break
        if found < 0:
            break  # isolated pixel
        if py == sy and px == sx:
            if first < 0:
                first = found
            elif found == first:
                count -= 1  # the start pixel was appended on arrival
                break
        prev = (found + 7) % 8
        by = py + dy_tab[prev]
        bx = px + dx_tab[prev]
        py = py + dy_tab[found]
        px = px + dx_tab[found]
        back = dir_of[by - py + 1, bx - px + 1]
        if count >= cap:
            break
        out[count, 0] = px
        out[count, 1] = py
        count += 1
    return out[:count].copy()


def largest_component_numpy(mask):
    labels, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        return 0, 0, 0, -1, -1
    flat = labels.ravel()
    areas = np.bincount(flat, minlength=n + 1)
    areas[0] = 0
    best = int(np.argmax(areas))
    h, w = mask.shape
    members = np.flatnonzero(flat == best)
    ys, xs = np.divmod(members, w)
    seed = int(members[0])
    return (int(areas[best]), int(xs.sum()), int(ys.sum()), seed // w, seed % w)


def _capacity(area):
    # a boundary pixel is entered at most four times
    return 4 * int(area) + 8


def trace_boundary_numpy(mask, sy, sx, area):
    # the walk is inherently sequential, so the fallback is the loop itself
    return _trace_loops(mask, sy, sx, _capacity(area), DY, DX, DIR_OF)


if NUMBA_AVAILABLE:
    _largest_component_nb = njit(_largest_component_loops)
    _trace_nb = njit(_trace_loops)

    def largest_component_numba(mask):
        area, sx, sy, y, x = _largest_component_nb(mask)
        return int(area), int(sx), int(sy), int(y), int(x)

    def trace_boundary_numba(mask, sy, sx, area):
        return _trace_nb(mask, sy, sx, _capacity(area), DY, DX, DIR_OF)
else:  # pragma: no cover
    largest_component_numba = None
    trace_boundary_numba = None


def largest_component(mask):
    """``(area, sum_x, sum_y, seed_y, seed_x)`` of the largest component."""
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if USE_NUMBA:
        return largest_component_numba(mask)
    return largest_component_numpy(mask)


def trace_boundary(mask, sy, sx, area=None):
    """Clockwise ``(x, y)`` boundary of the component containing the
    top-left pixel ``(sy, sx)``; ``area`` bounds the output buffer."""
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if area is None:
        area = int(np.count_nonzero(mask))
    if USE_NUMBA:
        return trace_boundary_numba(mask, int(sy), int(sx), area)
    return trace_boundary_numpy(mask, int(sy), int(sx), area)


__all__ = [
    "BACKEND",
    "largest_component",
    "largest_component_numba",
    "largest_component_numpy",
    "trace_boundary",
    "trace_boundary_numba",
    "trace_boundary_numpy",
]
