"""Hot and cold cells of the three games, side by side.

A cell is cold when every move from it lands on a hot cell; the player to
move from a cold cell loses against perfect play. Here each board is solved
by backward induction and printed with '#' for cold cells.
"""
import numpy as np

from hqnlab.oracle import floor_phi, solve_retrograde, wythoff_cold_pair

N = 24

for game in ("wythoff", "nim", "euclid"):
    grid = solve_retrograde(game, N, N)
    print(f"{game}: {int(grid.cold.sum())} cold cells on {N}x{N}")
    for row in grid.cold:
        print("".join("#" if x else "." for x in row))
    print()

# Wythoff's cold cells sit on two mirrored lines of slope phi and 1/phi.
pairs = [tuple(wythoff_cold_pair(k)[0]) for k in range(8)]
print("first Wythoff cold pairs:", pairs)

# floor(k*phi) stays exact far beyond float precision
k = 10**25 + 1
print(f"floor({k} * phi) = {floor_phi(k)}")

# Euclid's cold cells fill the wedge between those two lines.
e = solve_retrograde("euclid", N, N).cold
r, c = np.nonzero(e)
ratios = np.maximum(r, c)[1:] / np.minimum(r, c)[1:]
print(f"largest max/min ratio among cold Euclid cells: {ratios.max():.3f} (phi = 1.618)")
