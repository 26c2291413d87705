"""Job description validation and TOML parsing."""

import pytest

from lidscope_extract import ExtractionJob, JobError, load_job


def make_job(**overrides):
    kwargs = dict(
        corpus="corpus.txt",
        corpus_kind="plain-text-lines",
        model="checkpoint",
        layers=(0, -1),
        mode="regular",
        out="out",
    )
    kwargs.update(overrides)
    return ExtractionJob(**kwargs)


def test_defaults_are_filled_in():
    job = make_job()
    assert job.split == "data"
    assert job.m_sequences is None
    assert job.seed == 0
    assert job.max_length == 128
    assert job.batch_size == 8
    assert job.jsonl_field == "text"
    assert job.device == "cpu"


def test_layers_list_is_coerced_to_a_tuple():
    assert make_job(layers=[2, 0]).layers == (2, 0)


@pytest.mark.parametrize(
    "overrides",
    [
        {"corpus_kind": "csv"},
        {"mode": "causal"},
        {"layers": ()},
        {"layers": (1, "two")},
        {"layers": (True,)},
        {"layers": (1, 1)},
        {"m_sequences": 0},
        {"seed": -1},
        {"max_length": 1},
        {"batch_size": 0},
        {"split": ""},
    ],
)
def test_bad_fields_are_rejected(overrides):
    with pytest.raises(JobError):
        make_job(**overrides)


def test_to_dict_mirrors_the_fields():
    payload = make_job(layers=(3,), seed=7).to_dict()
    assert payload["layers"] == [3]
    assert payload["seed"] == 7
    assert set(payload) == {
        "corpus",
        "corpus_kind",
        "model",
        "layers",
        "mode",
        "out",
        "split",
        "m_sequences",
        "seed",
        "max_length",
        "batch_size",
        "jsonl_field",
        "device",
    }


JOB_TOML = """\
corpus = "corpus.txt"
corpus_kind = "plain-text-lines"
model = "checkpoint"
layers = [0, -1]
mode = "regular"
out = "outdir"
m_sequences = 10
seed = 3
"""


def test_load_job_parses_a_full_description(tmp_path):
    path = tmp_path / "job.toml"
    path.write_text(JOB_TOML)
    job = load_job(path)
    assert job.corpus == "corpus.txt"
    assert job.layers == (0, -1)
    assert job.mode == "regular"
    assert job.m_sequences == 10
    assert job.seed == 3
    assert job.batch_size == 8


def test_load_job_rejects_unknown_keys(tmp_path):
    path = tmp_path / "job.toml"
    path.write_text(JOB_TOML + 'modle = "typo"\n')
    with pytest.raises(JobError, match="unknown job keys"):
        load_job(path)


def test_load_job_rejects_missing_required_keys(tmp_path):
    path = tmp_path / "job.toml"
    path.write_text('corpus = "corpus.txt"\n')
    with pytest.raises(JobError, match="missing required keys"):
        load_job(path)


def test_load_job_rejects_broken_toml(tmp_path):
    path = tmp_path / "job.toml"
    path.write_text("corpus = [unterminated\n")
    with pytest.raises(JobError, match="not valid TOML"):
        load_job(path)


def test_load_job_missing_file_is_a_job_error(tmp_path):
    with pytest.raises(JobError, match="cannot read"):
        load_job(tmp_path / "absent.toml")


def test_load_job_rejects_wrong_value_types(tmp_path):
    path = tmp_path / "job.toml"
    path.write_text(JOB_TOML.replace("seed = 3", 'seed = "three"'))
    with pytest.raises(JobError):
        load_job(path)
