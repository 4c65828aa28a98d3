"""Python access to the coalflow library."""

import json

from ._core import (
    ConfigError,
    DomainError,
    NumericalFailure,
    UnsupportedFamily,
    levy_cdf,
    levy_total_mass,
    psi,
    run_cli,
    simulate_coalescent,
    simulate_csbp,
    simulate_fv,
    ut,
)


def experiment(name, **options):
    """Run an experiment and return its JSON report as a dict.

    Keyword names map to command line flags (``a_list`` is not used: pass
    ``a="50,100"``); underscores become dashes.
    """
    args = ["experiment", name, "--format", "json"]
    for key, value in options.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        args.append(f"--{key.replace('_', '-')}={value}")
    code, out, err = run_cli(args)
    if code == 2:
        raise ConfigError(err.strip())
    return json.loads(out)


__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalFailure",
    "UnsupportedFamily",
    "experiment",
    "levy_cdf",
    "levy_total_mass",
    "psi",
    "run_cli",
    "simulate_coalescent",
    "simulate_csbp",
    "simulate_fv",
    "ut",
]
