import numpy as np
import pytest
from sklearn.base import clone

from pluripot import GridFunction, psh_envelope
from pluripot.estimators import DirichletPshExtension, PHyperconvexityClassifier, PshEnvelope
from pluripot.exceptions import DimensionMismatch

from conftest import grid


def neg_abs2(p):
    return -np.sum(p**2, axis=1)


def test_params_roundtrip():
    est = PshEnvelope(h=0.2, boundary="closure", radii=[1.0, 2.0])
    params = est.get_params()
    assert params["h"] == 0.2 and params["boundary"] == "closure"
    other = clone(est).set_params(h=0.25)
    assert other.h == 0.25 and est.h == 0.2
    assert other.radii == [1.0, 2.0]


def test_envelope_matches_solver():
    est = PshEnvelope(h=0.1).fit(neg_abs2)
    _, _, mask, cone = grid("unit_disk", 0.1)
    ref = psh_envelope(GridFunction.from_callable(mask, neg_abs2), cone).envelope
    np.testing.assert_allclose(est.envelope_.values, ref.values, atol=1e-12)
    assert est.predict([[0.0, 0.0]])[0] == pytest.approx(ref.at_point((0, 0)), abs=1e-12)


def test_transform_batch_and_array_input():
    est = PshEnvelope(h=0.2).fit(neg_abs2)
    X = np.vstack([neg_abs2(est.nodes_), np.full(est.n_features_in_, 2.0)])
    out = est.transform(X)
    assert out.shape == X.shape
    np.testing.assert_allclose(out[0], est.envelope_.values, atol=1e-12)
    np.testing.assert_allclose(out[1], 2.0, atol=1e-12)
    refit = clone(est).fit(X[0])
    np.testing.assert_allclose(refit.envelope_.values, est.envelope_.values)


def test_input_validation():
    est = PshEnvelope(h=0.2).fit(neg_abs2)
    with pytest.raises(DimensionMismatch):
        est.transform(np.zeros((1, 3)))
    with pytest.raises(DimensionMismatch):
        est.predict([[0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        PshEnvelope(h=0.2).fit(np.full(est.n_features_in_, np.nan))
    with pytest.raises(Exception):
        PshEnvelope().predict([[0.0, 0.0]])


def test_dirichlet_reproduces_harmonic_data():
    est = DirichletPshExtension(h=0.1).fit(lambda p: p[:, 0] ** 2 - p[:, 1] ** 2)
    assert est.boundary_mismatch_ <= 1e-6
    assert est.predict([[0.5, 0.0]])[0] == pytest.approx(0.25, abs=1e-6)


def test_classifier():
    clf = PHyperconvexityClassifier(h=0.1, n_random=20).fit()
    assert set(clf.classes_) == {"NotPHyperconvex", "EvidencePHyperconvex", "Inconclusive"}
    verdicts = clf.predict(["slit_disk", {"name": "unit_disk"}])
    assert verdicts[0] == "NotPHyperconvex"
    assert verdicts[1] == "EvidencePHyperconvex"
    assert len(clf.verdicts_) == 2
