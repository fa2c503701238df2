import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from su2lat import GaugeField, LatticeGeometry, SplitMix64, lattice_io
from su2lat import digitize as dg
from su2lat import montecarlo as mc
from su2lat import observables as obs
from su2lat.analysis import MeasurementTable


@pytest.fixture
def rng():
    return SplitMix64(0xC0FFEE)


@pytest.fixture(scope="session")
def hot_field_4():
    """Haar-random 4^4 field, read-only across tests."""
    return GaugeField.hot(LatticeGeometry((4, 4, 4, 4)), SplitMix64(41))


@pytest.fixture(scope="session")
def thermal_field_6():
    """One thermalized 6^4 configuration at beta = 2.0, read-only."""
    field = GaugeField.cold(LatticeGeometry((6, 6, 6, 6)))
    stream = SplitMix64(61)
    for _ in range(120):
        mc.trajectory(field, 2.0, stream)
    return field


def _cache_root(tmp_path_factory):
    env = os.environ.get("SU2LAT_TEST_CACHE")
    if env:
        os.makedirs(env, exist_ok=True)
        return env
    return str(tmp_path_factory.mktemp("su2lat-data"))


class EnsembleLab:
    """Generates, projects and measures acceptance ensembles, caching
    everything on disk so repeated runs skip the expensive steps."""

    def __init__(self, root):
        self.root = root

    def ensemble(self, params):
        out = os.path.join(self.root, f"ens_{params.ensemble_id()}")
        marker = os.path.join(out, "ensemble.json")
        if not os.path.exists(marker):
            mc.generate_ensemble(params, out)
        return out

    def _measure_records(self, ens_dir, scheme_id, bits, transform,
                         observables, rmax, tmax):
        meta = mc.load_ensemble_metadata(ens_dir)
        records = []
        for traj, fname, _state in meta.configs:
            field, header = lattice_io.read_config(os.path.join(ens_dir, fname))
            if transform is not None:
                field = transform(field)
            values = obs.measure_config(field, observables, rmax=rmax, tmax=tmax)
            for key, val in values.items():
                if isinstance(key, tuple):
                    name, r, t = key
                    params = {"r": r, "t": t}
                else:
                    name, params = key, {}
                records.append(obs.MeasurementRecord(
                    ensemble_id=meta.ensemble_id, config_index=traj,
                    observable=name, value=float(val), params=params,
                    scheme=scheme_id, bits_per_link=float(bits),
                    beta=header.beta,
                ))
        return records

    def table(self, ens_dir, scheme=None, observables=("plaq", "loops6", "polyakov"),
              rmax=None, tmax=None):
        """MeasurementTable for one (ensemble, digitization scheme).

        scheme: None for ultrafine, ("l2"|"apr", mesh) or ("fp", p).
        """
        if scheme is None:
            scheme_id, bits, transform = "ultrafine", 256.0, None
        elif scheme[0] == "fp":
            spec = dg.FixedPointSpec(scheme[1])
            scheme_id, bits = spec.scheme_id, float(spec.bits_per_link)
            transform = lambda f: dg.project_fixed_point(f, spec)
        else:
            proj, mesh = scheme
            scheme_id = f"{mesh.label}+{proj}"
            bits = mesh.bits_per_link
            if proj == "l2":
                transform = lambda f: dg.project_l2(f, mesh)
            else:
                transform = lambda f: dg.project_apr(f, mesh)
        tag = scheme_id.replace("+", "_")
        tag += "_" + "".join(o[0] for o in observables)
        if rmax:
            tag += f"_r{rmax}t{tmax}"
        cache = os.path.join(ens_dir, f"meas_{tag}.csv")
        if os.path.exists(cache):
            records = lattice_io.read_measurements(cache)
        else:
            records = self._measure_records(
                ens_dir, scheme_id, bits, transform, observables, rmax, tmax)
            lattice_io.write_measurements(cache, records)
        return MeasurementTable.from_records(records)


@pytest.fixture(scope="session")
def lab(tmp_path_factory):
    return EnsembleLab(_cache_root(tmp_path_factory))


# desk-scale acceptance ensembles

@pytest.fixture(scope="session")
def ens8_beta2(lab):
    """8^4 at beta = 2.0, 100 configurations 10 trajectories apart."""
    params = mc.RunParams(beta=2.0, dims=(8, 8, 8, 8), seed=812,
                          n_trajectories=1200, save_every=10,
                          thermalization=200, start="cold")
    return lab.ensemble(params)


@pytest.fixture(scope="session")
def ens6(lab):
    """6^4 ensembles at beta = 0.5 and 2.0, 100 configurations each."""
    out = {}
    for beta, seed in ((0.5, 65), (2.0, 66)):
        params = mc.RunParams(beta=beta, dims=(6, 6, 6, 6), seed=seed,
                              n_trajectories=600, save_every=5,
                              thermalization=100, start="auto")
        out[beta] = lab.ensemble(params)
    return out


THERMAL_BETAS = (2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6)


@pytest.fixture(scope="session")
def thermal_scan(lab):
    """8^3 x 4 ensembles across the Nt=4 deconfinement transition."""
    dirs = {}
    for i, beta in enumerate(THERMAL_BETAS):
        params = mc.RunParams(beta=beta, dims=(8, 8, 8, 4), seed=4000 + i,
                              n_trajectories=400, save_every=5,
                              thermalization=150, start="cold")
        dirs[beta] = lab.ensemble(params)
    return dirs
