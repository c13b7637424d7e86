"""Register parameters, rotating frames and drive strengths.

All frequencies are angular (rad/s) and hbar = 1.
"""

import math

import attrs

from spinreg.exceptions import ConfigError, FrameError

MAX_NUCLEAR_SPINS = 5
TWO_PI = 2 * math.pi


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ConfigError(f'{attribute.name} must be >= 0, got {value}')


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(f'{attribute.name} must be > 0, got {value}')


def _fidelity(instance, attribute, value):
    if not 0.5 <= value <= 1.0:
        raise ConfigError(f'{attribute.name} must lie in [0.5, 1], got {value}')


def _spin_count(instance, attribute, value):
    if len(value) > MAX_NUCLEAR_SPINS:
        raise ConfigError(f'at most {MAX_NUCLEAR_SPINS} nuclear spins are supported, got {len(value)}')


def _normalize_couplings(value):
    """Store couplings once per unordered pair; both orders must agree."""
    pairs = {}
    for (i, j), strength in dict(value or {}).items():
        i, j = int(i), int(j)
        if i == j:
            raise ConfigError(f'nuclear coupling ({i}, {j}) couples a spin to itself')
        key = (min(i, j), max(i, j))
        if key in pairs and not math.isclose(pairs[key], strength, rel_tol=0, abs_tol=1e-12):
            raise ConfigError(f'asymmetric nuclear coupling for pair {key}')
        pairs[key] = float(strength)
    return tuple(sorted(pairs.items()))


@attrs.frozen
class NuclearSpin:
    a_par: float
    a_perp: float = attrs.field(default=0.0, validator=_non_negative)
    label: str = ''
    t2_star: float | None = None


@attrs.frozen
class RegisterParams:
    omega_L_e: float
    omega_L_n: float
    spins: tuple = attrs.field(default=(), converter=tuple, validator=_spin_count)
    nn_couplings: tuple = attrs.field(default=(), converter=_normalize_couplings)
    f_e: float = attrs.field(default=1.0, validator=_fidelity)
    tau_c0: float = attrs.field(default=1.0, validator=_positive)
    beta: float = attrs.field(default=1.0, validator=_positive)
    chi: float = 1.0

    def __attrs_post_init__(self):
        for (i, j), _ in self.nn_couplings:
            if j >= len(self.spins):
                raise ConfigError(f'nuclear coupling ({i}, {j}) references a missing spin')

    @property
    def K(self):
        return len(self.spins)

    @property
    def n_qubits(self):
        return 1 + self.K

    @property
    def dim(self):
        return 2 ** self.n_qubits

    def coupling(self, i, j):
        key = (min(i, j), max(i, j))
        return dict(self.nn_couplings).get(key, 0.0)

    def spin_index(self, label):
        """Resolve ``n2`` style labels (1-based) or explicit spin labels."""
        for index, spin in enumerate(self.spins):
            if spin.label and spin.label == label:
                return index
        if label.startswith('n') and label[1:].isdigit():
            index = int(label[1:]) - 1
            if 0 <= index < self.K:
                return index
        raise ConfigError(f'unknown nuclear spin {label!r} (register has {self.K} spins)')

    def evolve(self, **changes):
        return attrs.evolve(self, **changes)


@attrs.frozen
class Frame:
    electron_ref: float
    nuclear_refs: tuple = attrs.field(converter=tuple)
    secular: bool = False

    @classmethod
    def exact(cls, params):
        """Electron rotating at its Larmor frequency, nuclei in the lab frame."""
        return cls(params.omega_L_e, (0.0,) * params.K, secular=False)

    @classmethod
    def fast(cls, params):
        """Every nuclear spin rotating at the bare nuclear Larmor frequency, secular terms only.

        All spins rotate, driven or not. Dropping A_perp is what makes the frame
        time independent, so undriven spins lose their hyperfine tilt and the
        conditional rotations of decoupling sequences; use the exact frame for
        those.
        """
        return cls(params.omega_L_e, (params.omega_L_n,) * params.K, secular=True)

    @classmethod
    def named(cls, name, params):
        if name == 'exact':
            return cls.exact(params)
        if name == 'fast':
            return cls.fast(params)
        raise FrameError(f'unknown frame {name!r}; choose exact or fast')

    def check(self, params):
        if len(self.nuclear_refs) != params.K:
            raise FrameError(
                f'frame has {len(self.nuclear_refs)} nuclear references for {params.K} spins'
            )
        if not self.secular and any(ref != 0 for ref in self.nuclear_refs):
            raise FrameError(
                'a rotating nuclear frame needs secular=True; '
                'the transverse hyperfine term is time dependent there'
            )
        return self


@attrs.frozen
class DriveParams:
    """Rabi frequencies used when a program does not state one."""

    mw_rabi: float = attrs.field(default=TWO_PI / 228e-9, validator=_positive)
    rf_rabi: tuple = attrs.field(default=(), converter=tuple)
    rf_rabi_default: float = attrs.field(default=TWO_PI * 3.564e3, validator=_positive)

    def rf(self, index):
        if index < len(self.rf_rabi):
            return self.rf_rabi[index]
        return self.rf_rabi_default
