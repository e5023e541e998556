"""First-order convergence of the colliding pair to a shockpeakon.

For phi(x) = exp(-x^2) the pair functional at t_c - eps approaches
amplitude * phi(x_c) - shock * phi'(x_c) with an error proportional to eps.

    python3 demos/shock_limit.py
"""

import numpy as np

from dppeakons.closedform import build
from dppeakons.events import FORWARD, first_collision, pair_functional
from dppeakons.spectral import PeakonState


def main():
    phi = lambda x: np.exp(-x * x)  # noqa: E731
    s = PeakonState([-1.0, 0.0, 1.0], [1.0, 1.0, -1.0])
    cf = build(s)
    ev = first_collision(cf, FORWARD)
    limit = ev.amplitude * phi(ev.x_c) + ev.shock * 2 * ev.x_c * phi(ev.x_c)
    print(f"{'eps':>8} {'error':>12} {'error/eps':>10}")
    for eps in 10.0 ** -np.arange(1, 8):
        err = abs(pair_functional(cf, ev.t_c - eps, ev.pair, phi) - limit)
        print(f"{eps:8.0e} {err:12.4e} {err / eps:10.4f}")


if __name__ == "__main__":
    main()
