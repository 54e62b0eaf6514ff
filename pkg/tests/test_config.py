"""Config parsing, validation, and the semantic config hash."""

import pytest
import yaml

from meronomy.config import (
    OUT_DIR_ENV,
    ConfigError,
    load_config,
    write_default_config,
)


def write_yaml(path, doc):
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


def minimal_doc(tmp_path, **extra):
    doc = {
        "paths": {"reviews": "reviews.jsonl", "out_dir": "out"},
    }
    doc.update(extra)
    return doc


class TestLoadConfig:
    def test_defaults(self, tmp_path):
        cfg = load_config(write_yaml(tmp_path / "c.yaml", minimal_doc(tmp_path)))
        assert cfg.phrase_passes == 2
        assert cfg.phrase_min_count == 5
        assert cfg.phrase_threshold == 10.0
        assert cfg.top_n_entities == 200
        assert cfg.aspect_threshold == 0.65
        assert cfg.product_threshold == 0.45
        assert cfg.min_votes == 3
        assert cfg.window == 4
        assert cfg.edge_threshold == 0.21
        assert cfg.rcs_n == 10
        assert cfg.max_distance == 3
        assert cfg.scorer_backend == "baseline"
        assert cfg.force is False

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "nested"
        sub.mkdir()
        cfg = load_config(write_yaml(sub / "c.yaml", minimal_doc(tmp_path)))
        assert cfg.reviews == sub / "reviews.jsonl"
        assert cfg.out_dir == sub / "out"

    def test_absolute_paths_kept(self, tmp_path):
        doc = {"paths": {"reviews": str(tmp_path / "r.jsonl"), "out_dir": str(tmp_path / "o")}}
        cfg = load_config(write_yaml(tmp_path / "c.yaml", doc))
        assert cfg.reviews == tmp_path / "r.jsonl"

    def test_product_defaults_to_category(self, tmp_path):
        doc = minimal_doc(tmp_path, corpus={"category": "watch"})
        cfg = load_config(write_yaml(tmp_path / "c.yaml", doc))
        assert cfg.category == "watch"
        assert cfg.product == "watch"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("paths: [unclosed")
        with pytest.raises(ConfigError, match="invalid YAML"):
            load_config(path)

    def test_non_mapping_top_level(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)

    def test_reviews_path_required(self, tmp_path):
        with pytest.raises(ConfigError, match="paths.reviews"):
            load_config(write_yaml(tmp_path / "c.yaml", {"paths": {"out_dir": "o"}}))

    def test_out_dir_required_without_override(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUT_DIR_ENV, raising=False)
        with pytest.raises(ConfigError, match="out_dir"):
            load_config(write_yaml(tmp_path / "c.yaml", {"paths": {"reviews": "r"}}))

    def test_env_var_overrides_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env_out"))
        cfg = load_config(write_yaml(tmp_path / "c.yaml", minimal_doc(tmp_path)))
        assert cfg.out_dir == tmp_path / "env_out"

    def test_env_var_satisfies_missing_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env_out"))
        cfg = load_config(write_yaml(tmp_path / "c.yaml", {"paths": {"reviews": "r"}}))
        assert cfg.out_dir == tmp_path / "env_out"


class TestValidation:
    def test_problems_are_aggregated(self, tmp_path):
        doc = minimal_doc(
            tmp_path,
            phrases={"passes": 3},
            embeddings={"dim": 4},
        )
        with pytest.raises(ConfigError) as err:
            load_config(write_yaml(tmp_path / "c.yaml", doc))
        msg = str(err.value)
        assert "phrases.passes" in msg
        assert "embeddings.dim" in msg

    def test_threshold_ranges(self, tmp_path):
        doc = minimal_doc(tmp_path, aspects={"aspect_threshold": 1.5})
        with pytest.raises(ConfigError, match="aspect_threshold"):
            load_config(write_yaml(tmp_path / "c.yaml", doc))

    def test_unknown_backend_rejected(self, tmp_path):
        doc = minimal_doc(tmp_path, scorer={"backend": "quantum"})
        with pytest.raises(ConfigError, match="backend"):
            load_config(write_yaml(tmp_path / "c.yaml", doc))

    def test_oracle_backend_requires_truth_path(self, tmp_path):
        doc = minimal_doc(tmp_path, scorer={"backend": "oracle"})
        with pytest.raises(ConfigError, match="truth"):
            load_config(write_yaml(tmp_path / "c.yaml", doc))

    def test_external_backend_requires_score_paths(self, tmp_path):
        doc = minimal_doc(tmp_path, scorer={"backend": "external"})
        with pytest.raises(ConfigError, match="aspect_scores"):
            load_config(write_yaml(tmp_path / "c.yaml", doc))


class TestConfigHash:
    def _cfg(self, tmp_path, name, **extra):
        return load_config(write_yaml(tmp_path / name, minimal_doc(tmp_path, **extra)))

    def test_stable_across_loads(self, tmp_path):
        a = self._cfg(tmp_path, "a.yaml")
        b = self._cfg(tmp_path, "b.yaml")
        assert a.config_hash() == b.config_hash()

    def test_paths_do_not_affect_the_hash(self, tmp_path):
        a = self._cfg(tmp_path, "a.yaml")
        doc = {"paths": {"reviews": "elsewhere.jsonl", "out_dir": "other"}}
        b = load_config(write_yaml(tmp_path / "b.yaml", doc))
        assert a.config_hash() == b.config_hash()

    def test_semantic_parameters_change_the_hash(self, tmp_path):
        a = self._cfg(tmp_path, "a.yaml")
        b = self._cfg(tmp_path, "b.yaml", phrases={"threshold": 11.0})
        c = self._cfg(tmp_path, "c.yaml", seed=14)
        assert a.config_hash() != b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert b.config_hash() != c.config_hash()

    def test_force_flag_does_not_affect_the_hash(self, tmp_path):
        a = self._cfg(tmp_path, "a.yaml")
        h = a.config_hash()
        a.force = True
        assert a.config_hash() == h

    def test_stamp_names_the_stage(self, tmp_path):
        cfg = self._cfg(tmp_path, "a.yaml")
        stamp = cfg.stamp("ingest")
        assert stamp == {"config_hash": cfg.config_hash(), "stage": "ingest"}


class TestDefaultConfig:
    def test_written_file_loads_cleanly(self, tmp_path):
        path = tmp_path / "starter.yaml"
        write_default_config(path)
        cfg = load_config(path)
        assert cfg.scorer_backend == "baseline"
        assert cfg.category == "watch"
