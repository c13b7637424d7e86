"""Measured parameter tables of the four-spin register."""

import math

from .params import TWO_PI, DriveParams, NuclearSpin, RegisterParams

KHZ = TWO_PI * 1e3

OMEGA_L_E = TWO_PI * 9.414e9
OMEGA_L_N = TWO_PI * 3.5825184138330926e6
A_PAR = (1194 * KHZ, 420 * KHZ, 121 * KHZ, 34 * KHZ)
A_PERP = (
    233.19180977154946 * KHZ,
    147.74748531557418 * KHZ,
    75.51727008466486 * KHZ,
    46.815467374385136 * KHZ,
)
NUCLEAR_T2_STAR = (6.14e-3, 19.42e-3, 13.42e-3, 9.51e-3)

T_2PI = 228e-9

# electron initialization fidelity per inter-pulse spacing
F_E_BY_TAU = {
    8.391e-6: 0.8322,
    8.392e-6: 0.8347,
    8.393e-6: 0.8405,
    8.394e-6: 0.8523,
    8.395e-6: 0.8528,
    8.396e-6: 0.8402,
    8.397e-6: 0.8341,
    8.398e-6: 0.847,
    8.399e-6: 0.8302,
    8.400e-6: 0.8129,
    8.401e-6: 0.8089,
    8.402e-6: 0.845,
    8.403e-6: 0.875,
    8.404e-6: 0.8419,
}

# (sensor, target) 0-based -> (C/2pi in Hz, T2 SEDOR in s)
SEDOR_COUPLINGS = {
    (1, 0): (5.119870272800416, 0.137474595630),
    (1, 2): (28.56382160516395, 0.18051720381295747),
    (0, 2): (19.711365046571963, 0.0897871224471652),
}

NUCLEAR_RABI = (TWO_PI * 3.564e3, TWO_PI * 4.2e3, TWO_PI * 5.068e3, TWO_PI * 4.5e3)

ELECTRON_T2_STAR = 5.688203037479411e-6
ELECTRON_T2_HAHN = 212.59716232213677e-6
ELECTRON_T2_CPMG32 = 1.3116741089960194e-3
ELECTRON_T2_XY = 2.3108671159555234e-3
CHI = 0.5133516863783796
ETA = 2019.2210334474744
GAMMA_0 = 1 / 1.65e-9
T1_ELECTRON = 0.29589101140662677
ELECTRON_RABI = TWO_PI * 70.92898936e3
LOW_POWER_RABI = TWO_PI * 5.492926850010497e3

SSR_WINDOW = 5e-3
SSR_FIDELITIES = (0.98, 0.98, 0.96)
POST_SELECTION_FIDELITY = 0.94
BELL_FIDELITY = 0.6888812931856684
BELL_FIDELITY_ERROR = 0.009428854501926612


def nearest_f_e(tau):
    key = min(F_E_BY_TAU, key=lambda t: abs(t - tau))
    return F_E_BY_TAU[key]


def table_register(n_spins=4, f_e=0.8528, couplings=True):
    """The fitted register with the first ``n_spins`` nuclear spins."""
    spins = [
        NuclearSpin(a_par=A_PAR[i], a_perp=A_PERP[i], label=f'n{i + 1}', t2_star=NUCLEAR_T2_STAR[i])
        for i in range(n_spins)
    ]
    nn = {}
    if couplings:
        for (s, t), (c_hz, _) in SEDOR_COUPLINGS.items():
            if s < n_spins and t < n_spins:
                nn[(s, t)] = TWO_PI * c_hz
    return RegisterParams(
        omega_L_e=OMEGA_L_E,
        omega_L_n=OMEGA_L_N,
        spins=spins,
        nn_couplings=nn,
        f_e=f_e,
        tau_c0=ELECTRON_T2_HAHN,
        beta=2.0,
        chi=CHI,
    )


def table_drive(n_spins=4):
    return DriveParams(mw_rabi=TWO_PI / T_2PI, rf_rabi=NUCLEAR_RABI[:n_spins])


def ideal_register(n_spins=3):
    """Same couplings, perfect electron initialization and no decoherence."""
    return table_register(n_spins, f_e=1.0).evolve(tau_c0=math.inf)
