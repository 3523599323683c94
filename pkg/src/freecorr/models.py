"""Named input models.

Each model maps a family name plus parameters to everything the front end
needs: the transform log-asymptotics (profile jets by correction order),
the rational geometry used for density reconstruction and outlier
detection, closed-form reference measures by order, and — where a matrix
construction exists — a Monte Carlo ensemble with predicted expansion
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import engine, measures, montecarlo
from .measures import KFunction, RationalFunction
from .series import TruncatedSeries

__all__ = ["Model", "get_model", "list_models", "MODEL_NAMES"]

_PAD = 6  # jet orders beyond K demanded by the second-order engine path


def _series(coeffs, order, center=0):
    c = list(coeffs) + [0] * (order + 1 - len(coeffs))
    return TruncatedSeries(c[: order + 1], center)


def _half_square(order, center=0):
    return _series([0, 0, Fraction(1, 2)], order, center)


def _log_spike(theta, order, center=0):
    # -log(1 - theta*(x - center))
    th = Fraction(theta) if float(theta) == theta else theta
    return _series([0] + [th**n / n for n in range(1, order + 1)], order, center)


def _mp_log(ratio, order):
    # -ratio*log(1 - x)
    r = Fraction(ratio) if float(ratio) == ratio else ratio
    return _series([0] + [r / n for n in range(1, order + 1)], order)


def _lattice_log(scale, order):
    # log(1 + scale*(u - 1)) at center 1
    s = Fraction(scale) if float(scale) == scale else scale
    return _series(
        [0] + [Fraction(-1) ** (n + 1) * s**n / n for n in range(1, order + 1)],
        order,
        center=1,
    )


def _zero(order, center):
    return TruncatedSeries([0] * (order + 1), center)


@dataclass
class Model:
    """A named family resolved at specific parameter values."""

    name: str
    side: str
    params: dict
    description: str
    max_order: int
    epsilon: float = None
    jets: callable = None        # order -> list of profile jets
    measure_specs: dict = field(default_factory=dict)  # order -> (catalog name, kwargs)
    kfunction_spec: callable = None
    mc_spec: callable = None     # () -> EnsembleSpec
    mc_scored_orders: tuple = (0, 1)

    def asymptotic_input(self, order):
        return engine.AsymptoticInput(
            side=self.side, series=self.jets(order), epsilon=self.epsilon
        )

    def expansion(self, K, n=None):
        """Moment rows for orders 0..n (defaults to the model's maximum)."""
        if n is None:
            n = self.max_order
        if n > self.max_order:
            raise ValueError(
                f"model {self.name!r} supports correction orders up to {self.max_order}"
            )
        return engine.expand(self.asymptotic_input(K + _PAD), K, n)

    def cumulants(self, K, n=None):
        if n is None:
            n = min(self.max_order, 1) if self.side == "schur" else self.max_order
        jets = self.jets(max(K, 2) + _PAD)
        if self.side == "schur":
            if n > 1:
                raise ValueError("discrete side supports orders 0 and 1 only")
            phi = jets[1] if len(jets) > 1 else _zero(K + _PAD, 1)
            return engine.quantized_cumulants(jets[0], phi, K)
        return engine.hc_cumulants(jets, n, K)

    def measure(self, order=None, npoints=4001):
        """Closed-form measure at the given correction order."""
        if not self.measure_specs:
            raise ValueError(f"model {self.name!r} has no closed-form measure")
        if order is None:
            order = max(self.measure_specs)
        if order not in self.measure_specs:
            raise ValueError(
                f"model {self.name!r} has measures for orders "
                f"{sorted(self.measure_specs)}, not {order}"
            )
        cat_name, kwargs = self.measure_specs[order]
        return measures.catalog(cat_name, npoints=npoints, **kwargs)

    def kfunction(self):
        if self.kfunction_spec is None:
            raise ValueError(f"model {self.name!r} has no rational geometry")
        return self.kfunction_spec()

    def monte_carlo(self, K):
        """Ensemble spec plus per-k predicted coefficients, or None."""
        if self.mc_spec is None:
            return None
        spec = self.mc_spec()
        res = self.expansion(K, n=min(self.max_order, 1))
        preds = {}
        for k in range(1, K + 1):
            row = []
            for order in (0, 1):
                if order < len(res.orders) and order in self.mc_scored_orders:
                    row.append(float(res.orders[order][k - 1]))
                else:
                    row.append(None)
            preds[k] = tuple(row)
        return spec, preds


def _spike_numerator(theta):
    # theta/(1 - theta*x): residue carrier of a rank-one shift
    return RationalFunction((theta,), (1, -theta))


def _gue_kf(spike=None):
    num = None if spike is None else _spike_numerator(spike)
    return KFunction("hc", RationalFunction((0, 1)), num)


def _wishart_kf(ratio, spike=None):
    num = None if spike is None else _spike_numerator(spike)
    return KFunction("hc", RationalFunction((ratio,), (1, -1)), num)


def _plancherel_kf(intensity, spike=None):
    num = None
    if spike is not None:
        num = RationalFunction((spike,), (1 + spike, -spike)) + RationalFunction(
            (-1,), (0, 2)
        )
    return KFunction("schur", RationalFunction((intensity,)), num)


def _tiling_kf(fraction, edge_weight=None):
    psi_p = RationalFunction((1.0 / fraction - 1.0,), (1, 1))
    num = None
    if edge_weight is not None:
        a = edge_weight
        num = (
            RationalFunction((a,), (1, a))
            + RationalFunction((-1,), (1, 1))
            + RationalFunction((-1,), (0, 2))
        )
    return KFunction("schur", psi_p, num)


def _uniform_kf(correction):
    num = RationalFunction((-1,), (0, 2)) if correction else None
    return KFunction("schur", RationalFunction((0,)), num)


# ----------------------------------------------------------------------
# the registry: name -> (defaults, factory, description)


def _build_gue(p):
    return Model(
        name="gue",
        side="hc",
        params=p,
        description="single quadratic profile; corrections vanish at 1/N and "
        "reduce to the even-genus column at 1/N^2",
        max_order=2,
        jets=lambda order: [_half_square(order)],
        measure_specs={0: ("semicircle", {})},
        kfunction_spec=lambda: _gue_kf(),
        mc_spec=lambda: montecarlo.EnsembleSpec((montecarlo.gue(),)),
    )


def _build_gue_two_scale(p):
    return Model(
        name="gue-two-scale",
        side="hc",
        params=p,
        description="quadratic profile repeated at the adjacent scale; the 1/N "
        "row is the odd-moment column (0, 1, 0, 4, 0, 15, ...)",
        max_order=2,
        jets=lambda order: [_half_square(order), _half_square(order)],
        measure_specs={0: ("semicircle", {}), 1: ("gue_correction", {})},
        kfunction_spec=lambda: _gue_kf(),
    )


def _build_gue_three_scale(p):
    eps = p["epsilon"]
    return Model(
        name="gue-three-scale",
        side="hc",
        params=p,
        description="quadratic profile repeated at three separated scales; "
        "rows are per-scale coefficients",
        max_order=3,
        epsilon=eps,
        jets=lambda order: [_half_square(order)] * 4,
        measure_specs={0: ("semicircle", {})},
        kfunction_spec=lambda: _gue_kf(),
    )


def _build_gue_bbp(p):
    th = p["theta"]
    return Model(
        name="gue-bbp",
        side="hc",
        params=p,
        description="quadratic profile with a rank-one shift; the 1/N measure "
        "grows an outlier atom when |theta| > 1",
        max_order=2,
        jets=lambda order: [_half_square(order), _log_spike(th, order)],
        measure_specs={
            0: ("semicircle", {}),
            1: ("gue_spike_correction", {"spike": th}),
        },
        kfunction_spec=lambda: _gue_kf(th),
        mc_spec=lambda: montecarlo.EnsembleSpec(
            (montecarlo.gue(), montecarlo.diag_spikes((th,)))
        ),
    )


def _build_wishart(p):
    ratio = p["ratio"]
    specs = {0: ("wishart_lln", {"ratio": ratio})}
    if ratio > 1:
        specs[1] = ("wishart_correction", {"ratio": ratio})
    return Model(
        name="wishart",
        side="hc",
        params=p,
        description="sample-covariance profile at the given dimension ratio, "
        "with the family's own subleading term",
        max_order=2,
        jets=lambda order: [_mp_log(ratio, order), _half_square(order)],
        measure_specs=specs,
        kfunction_spec=lambda: _wishart_kf(ratio),
        mc_spec=lambda: montecarlo.EnsembleSpec((montecarlo.wishart(ratio),)),
        mc_scored_orders=(0,),
    )


def _build_wishart_bbp(p):
    th = p["theta"]
    return Model(
        name="wishart-bbp",
        side="hc",
        params=p,
        description="unit-ratio sample-covariance profile with a rank-one "
        "shift; the hard edge carries a half atom",
        max_order=2,
        jets=lambda order: [_mp_log(1, order), _log_spike(th, order)],
        measure_specs={
            0: ("wishart_lln", {"ratio": 1.0}),
            1: ("wishart_spike_correction", {"spike": th}),
        },
        kfunction_spec=lambda: _wishart_kf(1.0, th),
        mc_spec=lambda: montecarlo.EnsembleSpec(
            (montecarlo.wishart(1.0), montecarlo.diag_spikes((th,)))
        ),
        mc_scored_orders=(0,),
    )


def _build_plancherel_dbbp(p):
    g, a = p["intensity"], p["spike"]
    return Model(
        name="plancherel-dbbp",
        side="schur",
        params=p,
        description="linear discrete-side profile with a rank-one shift; the "
        "1/N measure grows an atom past the intensity threshold",
        max_order=1,
        jets=lambda order: [
            _series([0, Fraction(g) if float(g) == g else g], order, 1),
            _log_spike(a, order, center=1),
        ],
        measure_specs={
            0: ("plancherel_lln", {"intensity": g}),
            1: ("plancherel_spike_correction", {"intensity": g, "spike": a}),
        },
        kfunction_spec=lambda: _plancherel_kf(g, a),
    )


def _build_aztec(p):
    al, a = p["fraction"], p["edge_weight"]
    return Model(
        name="aztec",
        side="schur",
        params=p,
        description="two-block lattice profile with a weighted edge; the 1/N "
        "measure carries boundary half-atoms and a conditional outlier",
        max_order=1,
        jets=lambda order: [
            _lattice_log(Fraction(1, 2), order) * (1.0 / al - 1.0),
            _lattice_log(a / (1.0 + a), order) - _lattice_log(Fraction(1, 2), order),
        ],
        measure_specs={
            0: ("tiling_lln", {"fraction": al}),
            1: ("tiling_correction", {"fraction": al, "edge_weight": a}),
        },
        kfunction_spec=lambda: _tiling_kf(al, a),
    )


def _build_uniform_schur(p):
    return Model(
        name="uniform-schur",
        side="schur",
        params=p,
        description="zero profiles on the discrete side: flat unit-interval "
        "limit with a constant -1/2 correction row",
        max_order=1,
        jets=lambda order: [_zero(order, 1), _zero(order, 1)],
        measure_specs={0: ("uniform_lln", {}), 1: ("uniform_correction", {})},
        kfunction_spec=lambda: _uniform_kf(True),
        mc_spec=lambda: montecarlo.EnsembleSpec(
            (montecarlo.haar_fixed_spectrum("uniform01"),)
        ),
        mc_scored_orders=(0,),
    )


def _build_spiked_three_scale(p):
    th1, th2 = p["theta1"], p["theta2"]
    return Model(
        name="spiked-three-scale",
        side="hc",
        params=p,
        description="quadratic profile, a rank-one shift, and a second shift "
        "one scale down; its 1/N^2 row mixes both shifts",
        max_order=2,
        jets=lambda order: [
            _half_square(order),
            _log_spike(th1, order),
            _series([0, th2], order),
        ],
        measure_specs={
            0: ("semicircle", {}),
            1: ("gue_spike_correction", {"spike": th1}),
        },
        kfunction_spec=lambda: _gue_kf(th1),
        mc_spec=lambda: montecarlo.EnsembleSpec(
            (
                montecarlo.gue(),
                montecarlo.diag_spikes((th1,)),
                montecarlo.diag_spikes((0.0, th2), scale=1.0),
            )
        ),
    )


def _build_higher_bbp(p):
    th1, th2, eps = p["theta1"], p["theta2"], p["epsilon"]
    return Model(
        name="higher-bbp",
        side="hc",
        params=p,
        description="quadratic profile with rank-one shifts at two separated "
        "sub-scales; rows are per-scale coefficients",
        max_order=2,
        epsilon=eps,
        jets=lambda order: [
            _half_square(order),
            _log_spike(th1, order),
            _log_spike(th2, order),
        ],
        measure_specs={
            0: ("semicircle", {}),
            1: ("gue_spike_correction", {"spike": th1}),
        },
        kfunction_spec=lambda: _gue_kf(th1),
    )


_REGISTRY = {
    "gue": ({}, _build_gue),
    "gue-two-scale": ({}, _build_gue_two_scale),
    "gue-three-scale": ({"epsilon": 0.25}, _build_gue_three_scale),
    "gue-bbp": ({"theta": 2.0}, _build_gue_bbp),
    "wishart": ({"ratio": 2.0}, _build_wishart),
    "wishart-bbp": ({"theta": 2.5}, _build_wishart_bbp),
    "plancherel-dbbp": ({"intensity": 9.0, "spike": 4.0}, _build_plancherel_dbbp),
    "aztec": ({"fraction": 0.9, "edge_weight": 3.0}, _build_aztec),
    "uniform-schur": ({}, _build_uniform_schur),
    "spiked-three-scale": ({"theta1": 2.0, "theta2": 1.5}, _build_spiked_three_scale),
    "higher-bbp": ({"theta1": 2.0, "theta2": 1.5, "epsilon": 0.25}, _build_higher_bbp),
}

_ALIASES = {"dbbp": "plancherel-dbbp", "uniform": "uniform-schur"}

MODEL_NAMES = tuple(_REGISTRY)


def get_model(name, **params):
    """Resolve a model name (or alias) at the given parameter values."""
    key = _ALIASES.get(name, name)
    if key not in _REGISTRY:
        raise ValueError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
    defaults, factory = _REGISTRY[key]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(
            f"model {key!r} takes {sorted(defaults) or 'no parameters'}; "
            f"got unexpected {sorted(unknown)}"
        )
    resolved = dict(defaults)
    resolved.update({k: float(v) for k, v in params.items()})
    return factory(resolved)


def list_models():
    """Name, default parameters, and description for every model."""
    out = []
    for name, (defaults, factory) in _REGISTRY.items():
        m = factory(dict(defaults))
        out.append(
            {"name": name, "defaults": dict(defaults), "description": m.description}
        )
    return out
