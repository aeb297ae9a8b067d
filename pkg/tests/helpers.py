from dataclasses import replace

from scipy.optimize import brentq

from lefthand_sim.dynamics import rho23_weak
from lefthand_sim.params import apply_linkages, preset, save
from lefthand_sim.response import polarizability


def pole_config(directory):
    """Parameter file plus detuning at which the analytical N*alpha_e equals 3.

    alpha_e crosses the positive real axis near Delta_e = 22.4 for fig2-a at
    Gamma2 = 0; choosing N = 3 / alpha_e there puts a Clausius-Mossotti pole
    exactly on the first grid point.
    """
    sc = preset("fig2-a")

    def alpha(d):
        snap = apply_linkages(sc, d, 0.0)
        return polarizability(rho23_weak(snap), snap)

    root = brentq(lambda d: alpha(d).imag, 21.0, 23.0, xtol=1e-15, rtol=1e-15)
    a = alpha(root)
    assert a.real > 0
    path = directory / "pole.yaml"
    save(replace(sc.base, N=3.0 / a.real, Gamma2=0.0), path)
    return path, root
