"""
Tests for the configuration schema.

These tests verify that:
1. Documents are validated strictly (unknown fields, lengths, kind-specific fields)
2. Validated documents map onto scheme configs, search spaces and budgets
3. load_config surfaces malformed JSON and schema errors unchanged
"""

import json
import math

import pytest
from pydantic import ValidationError

from catengine.cat_states import CatSpec
from catengine.config_schema import RunManifest, SchemeConfigModel, load_config
from catengine.scheme_sim import InputKind


def _document(**overrides):
    document = {
        "input": {"kind": "coherent", "gamma": [1.0, 0.0]},
        "aux_photons": [2, 2],
        "bs_theta": [0.6, 0.9],
        "aux_alpha": [[0.1, 0.2], [-0.3, 0.0]],
        "alpha0": 0.4,
        "target": {"beta": 1.5, "parity": "odd"},
    }
    document.update(overrides)
    return document


class TestSchemeConfigModel:
    """Validation rules."""

    def test_valid_document(self):
        """A complete document converts to a SchemeConfig."""
        config = SchemeConfigModel.model_validate(_document()).to_scheme_config(require_fixed=True)
        assert config.input.kind is InputKind.COHERENT
        assert config.input.gamma == 1.0
        assert config.aux_alpha == (0.1 + 0.2j, -0.3 + 0j)
        assert config.alpha0 == 0.4

    def test_extra_field_forbidden(self):
        """Unknown top-level keys are rejected."""
        with pytest.raises(ValidationError) as excinfo:
            SchemeConfigModel.model_validate(_document(detector_efficiency=0.9))
        assert "detector_efficiency" in str(excinfo.value)

    def test_length_mismatch(self):
        """bs_theta must have one angle per auxiliary mode."""
        with pytest.raises(ValidationError) as excinfo:
            SchemeConfigModel.model_validate(_document(bs_theta=[0.5]))
        assert "bs_theta has 1 entries" in str(excinfo.value)

    def test_negative_photons(self):
        """Auxiliary photon numbers must be non-negative."""
        with pytest.raises(ValidationError):
            SchemeConfigModel.model_validate(_document(aux_photons=[2, -1]))

    @pytest.mark.parametrize(
        "source,message",
        [
            ({"kind": "fock"}, "needs k0"),
            ({"kind": "coherent"}, "needs gamma"),
            ({"kind": "kitten", "beta_in": 1.0}, "needs beta_in and parity"),
        ],
    )
    def test_kind_fields(self, source, message):
        """Each input kind requires its own fields."""
        with pytest.raises(ValidationError) as excinfo:
            SchemeConfigModel.model_validate(_document(input=source))
        assert message in str(excinfo.value)

    def test_target_beta_positive(self):
        """beta must be strictly positive."""
        with pytest.raises(ValidationError):
            SchemeConfigModel.model_validate(_document(target={"beta": 0.0, "parity": "even"}))

    def test_require_fixed(self):
        """simulate refuses documents with free parameters."""
        model = SchemeConfigModel.model_validate(_document(alpha0="free", bs_theta="free"))
        assert model.free_families == ["bs_theta", "alpha0"]
        with pytest.raises(ValueError) as excinfo:
            model.to_scheme_config(require_fixed=True)
        assert "bs_theta, alpha0" in str(excinfo.value)

    def test_free_families_default(self):
        """Omitted parameters default to free and start balanced."""
        model = SchemeConfigModel.model_validate({"input": {"kind": "vacuum"}, "aux_photons": [1, 3]})
        config = model.to_scheme_config()
        assert config.bs_theta == (math.pi / 4, math.pi / 4)
        assert config.aux_alpha == (0j, 0j)
        assert model.target_spec() is None

    def test_search_space(self):
        """Free families and optimizer flags reach the search space."""
        model = SchemeConfigModel.model_validate(
            _document(
                aux_alpha="free",
                optimizer={"complex_alpha": False, "free_gamma": True, "bounds": {"alpha": [-2, 2]}},
            )
        )
        space = model.to_search_space()
        assert space.names() == ["re_alpha_1", "re_alpha_2", "re_gamma", "im_gamma"]
        assert space.bounds["alpha"] == (-2.0, 2.0)

    def test_budget_overrides(self):
        """Command-line values replace document values; None leaves them."""
        model = SchemeConfigModel.model_validate(_document(optimizer={"restarts": 9, "seed": 4}))
        budget = model.to_budget(restarts=3, seed=None, threads=2)
        assert budget.restarts == 3
        assert budget.seed == 4
        assert budget.threads == 2

    def test_target_spec(self):
        """The target block becomes a CatSpec."""
        assert SchemeConfigModel.model_validate(_document()).target_spec() == CatSpec(1.5, "odd")


class TestLoadConfig:
    """load_config from disk."""

    def test_round_trip(self, tmp_path):
        """A written document loads back."""
        path = tmp_path / "scheme.json"
        path.write_text(json.dumps(_document()), encoding="utf-8")
        assert load_config(path).aux_photons == [2, 2]

    def test_malformed_json(self, tmp_path):
        """Malformed JSON raises JSONDecodeError."""
        path = tmp_path / "broken.json"
        path.write_text("{\"input\": ", encoding="utf-8")
        with pytest.raises(json.JSONDecodeError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """A missing path raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json")


class TestRunManifest:
    def test_forbids_extra(self):
        """Manifests have a fixed field set."""
        with pytest.raises(ValidationError):
            RunManifest(command="x", config_digest="d", seed=1, tool_version="0", wall_time_seconds=0.1, host="h")
